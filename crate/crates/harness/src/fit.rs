//! Log-log least squares over table columns.

use crate::config::Reduce;
use crate::table::{Cell, Table};
use simmap_core::product_formula::linear_fit;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    pub x_column: String,
    pub y_column: String,
}

pub const FIT_COLUMNS: [&str; 6] = ["x_column", "y_column", "points", "slope", "intercept", "r_squared"];

impl FitResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&FIT_COLUMNS);
        t.push(vec![
            Cell::Text(self.x_column.clone()),
            Cell::Text(self.y_column.clone()),
            Cell::Int(self.points as i64),
            Cell::Float(self.slope),
            Cell::Float(self.intercept),
            Cell::Float(self.r_squared),
        ]);
        t
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("no column `{0}`")]
    MissingColumn(String),
    #[error("column `{column}` row {row}: `{value}` is not a positive number")]
    NonPositive { column: String, row: usize, value: String },
    #[error("need at least 4 points, have {0}")]
    TooFewPoints(usize),
}

/// Fit log y = slope·log x + intercept on raw pairs.
pub fn fit_pairs(x: &[f64], y: &[f64], x_column: &str, y_column: &str) -> Result<FitResult, FitError> {
    if x.len() < 4 {
        return Err(FitError::TooFewPoints(x.len()));
    }
    for (col, v) in [(x_column, x), (y_column, y)] {
        if let Some((row, bad)) = v.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(FitError::NonPositive { column: col.to_string(), row, value: bad.to_string() });
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&lx, &ly);
    Ok(FitResult { slope, intercept, r_squared: r_squared.clamp(0.0, 1.0), points: x.len(), x_column: x_column.into(), y_column: y_column.into() })
}

/// Fit over the rows of `table` kept by `keep`. With [`Reduce::Min`] each
/// distinct x contributes only its smallest y (optimal-error curves).
pub fn fit_power_law(table: &Table, x_column: &str, y_column: &str, keep: impl Fn(&[Cell]) -> bool, reduce: Reduce) -> Result<FitResult, FitError> {
    let xi = table.column(x_column).ok_or_else(|| FitError::MissingColumn(x_column.into()))?;
    let yi = table.column(y_column).ok_or_else(|| FitError::MissingColumn(y_column.into()))?;
    let mut pts: Vec<(f64, f64)> = vec![];
    for (row, r) in table.rows.iter().enumerate().filter(|(_, r)| keep(r)) {
        let get = |i: usize, col: &str| {
            r[i].as_f64().filter(|v| *v > 0.0 && v.is_finite()).ok_or_else(|| FitError::NonPositive { column: col.into(), row, value: r[i].to_string() })
        };
        pts.push((get(xi, x_column)?, get(yi, y_column)?));
    }
    if reduce == Reduce::Min {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup_by(|later, first| later.0 == first.0);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    fit_pairs(&x, &y, x_column, y_column)
}

/// Row predicate from `column:value` conditions (all must hold).
pub fn filter_predicate(table: &Table, conditions: &[(String, String)]) -> Result<impl Fn(&[Cell]) -> bool, FitError> {
    let cols: Vec<(usize, String)> =
        conditions.iter().map(|(c, v)| table.column(c).map(|i| (i, v.clone())).ok_or_else(|| FitError::MissingColumn(c.clone()))).collect::<Result<_, _>>()?;
    Ok(move |r: &[Cell]| cols.iter().all(|(i, v)| r[*i].matches(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(points: &[(f64, f64, &str)]) -> Table {
        let mut t = Table::new(&["x", "y", "tag"]);
        for &(x, y, tag) in points {
            t.push(vec![Cell::Float(x), Cell::Float(y), Cell::Text(tag.into())]);
        }
        t
    }

    #[test]
    fn exact_quadratic_law() {
        let t = table(&(1..=6).map(|i| (i as f64, 3.0 * (i * i) as f64, "a")).collect::<Vec<_>>());
        let f = fit_power_law(&t, "x", "y", |_| true, Reduce::None).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn filter_and_min_reduction() {
        let mut pts: Vec<(f64, f64, &str)> = (1..=5).map(|i| (i as f64, (i as f64).powi(3), "keep")).collect();
        pts.extend((1..=5).map(|i| (i as f64, 10.0 * (i as f64).powi(3), "keep")));
        pts.push((2.0, 1e6, "drop"));
        let t = table(&pts);
        let keep = filter_predicate(&t, &[("tag".into(), "keep".into())]).unwrap();
        let f = fit_power_law(&t, "x", "y", keep, Reduce::Min).unwrap();
        assert_eq!(f.points, 5);
        assert!((f.slope - 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let t = table(&[(1.0, 1.0, "a"), (2.0, 0.0, "a"), (3.0, 1.0, "a"), (4.0, 1.0, "a")]);
        assert!(matches!(fit_power_law(&t, "x", "y", |_| true, Reduce::None), Err(FitError::NonPositive { row: 1, .. })));
        assert!(matches!(fit_power_law(&t, "x", "z", |_| true, Reduce::None), Err(FitError::MissingColumn(_))));
        let t = table(&[(1.0, 1.0, "a"), (2.0, 2.0, "a"), (3.0, 1.0, "a")]);
        assert_eq!(fit_power_law(&t, "x", "y", |_| true, Reduce::None), Err(FitError::TooFewPoints(3)));
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(a in 0.1f64..10.0, k in -4.0f64..4.0, x0 in 0.01f64..1.0) {
            let x: Vec<f64> = (0..8).map(|i| x0 * 1.7f64.powi(i)).collect();
            let y: Vec<f64> = x.iter().map(|x| a * x.powf(k)).collect();
            let f = fit_pairs(&x, &y, "x", "y").unwrap();
            prop_assert!((f.slope - k).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }
    }
}
