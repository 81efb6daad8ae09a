//! Grid evaluation for every experiment kind.

use crate::config::{Boundary, ExperimentConfig, ExperimentKind, Placement};
use crate::fit::{filter_predicate, fit_power_law, FitError, FitResult};
use crate::table::{read_table, sweep_table, Cell, Control, SweepRow, Table};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use simmap_core::bounds::{ft_overhead, tradeoff, FTParams, FTRecord, TradeoffConstants, TradeoffResult};
use simmap_core::dense::{
    evolve_lindblad_dense, evolve_unitary, expectation, jordan_wigner_dense, mean_occupation_operator, DenseDrive, DenseState, Dissipator,
};
use simmap_core::floquet::{run_floquet, FloquetParams};
use simmap_core::gaussian::{
    evolve_exact, evolve_noisy_ode, iq_matrix_with, mode_occupations, mu_matrix, vacuum_state, DepolSpec, GaussianDrive, QuadraticHamiltonian, Waveform,
};
use simmap_core::linalg::{expm, RMat};
use simmap_core::product_formula::{
    even_odd_split_gaussian, fermion_chain_bonds, fermion_ring_bonds, replay_trotter_dense, run_trotter, suzuki_formula, NoisePlacement,
};
use simmap_core::sw::{project_time_average, run_sw, sw_demo};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Engine { context: String, source: simmap_core::Error },
    #[error("fit: {0}")]
    Fit(#[from] FitError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Setup(String),
}

fn ctx<T>(r: simmap_core::Result<T>, context: impl FnOnce() -> String) -> Result<T, RunError> {
    r.map_err(|source| RunError::Engine { context: context(), source })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Sweep(Vec<SweepRow>),
    Bounds(Vec<TradeoffResult>),
    FtOverhead(Vec<(f64, FTRecord)>),
    Fit(FitResult),
}

pub const BOUNDS_COLUMNS: [&str; 10] = ["experiment", "mapping", "p_order", "d", "noise", "tau", "control", "alpha_exponent", "error_bound", "t_sim_bound"];
pub const FT_COLUMNS: [&str; 11] =
    ["experiment", "xi0", "xi_th", "t_code", "levels", "delta", "xi_L", "optimal_T", "total_error", "required_L", "closed_form_L"];

impl Output {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        match self {
            Output::Sweep(rows) => sweep_table(rows),
            Output::Bounds(rs) => {
                let mut t = Table::new(&BOUNDS_COLUMNS);
                for r in rs {
                    t.push(vec![
                        Cell::Text("bounds".into()),
                        Cell::Text(r.kind.name().into()),
                        Cell::Int(r.p as i64),
                        Cell::Int(r.d as i64),
                        Cell::Float(r.gamma),
                        Cell::Float(r.tau),
                        Cell::Float(r.control),
                        Cell::Float(r.alpha_exponent),
                        Cell::Float(r.error_bound),
                        Cell::Float(r.t_sim_bound),
                    ]);
                }
                t
            }
            Output::FtOverhead(rs) => {
                let mut t = Table::new(&FT_COLUMNS);
                for (delta, r) in rs {
                    t.push(vec![
                        Cell::Text("ft-overhead".into()),
                        Cell::Float(cfg.xi0),
                        Cell::Float(cfg.xi_th),
                        Cell::Int(cfg.t_code as i64),
                        Cell::Int(cfg.levels as i64),
                        Cell::Float(*delta),
                        Cell::Float(r.xi_l),
                        Cell::Float(r.optimal_t),
                        Cell::Float(r.total_error),
                        Cell::Int(r.required_l as i64),
                        Cell::Int(r.closed_form_l as i64),
                    ]);
                }
                t
            }
            Output::Fit(f) => f.table(),
        }
    }
}

/// Evaluate `points` on `threads` workers (rayon's default pool when None),
/// then restore canonical order.
fn par_rows<P: Sync>(points: &[P], threads: Option<usize>, f: impl Fn(&P) -> Result<SweepRow, RunError> + Sync + Send) -> Result<Vec<SweepRow>, RunError> {
    let eval = || points.par_iter().map(&f).collect::<Result<Vec<_>, _>>();
    let mut rows = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new().num_threads(k).build().map_err(|e| RunError::Setup(e.to_string()))?.install(eval)?,
        None => eval()?,
    };
    rows.sort_by(|a, b| a.canonical_cmp(b));
    Ok(rows)
}

fn trotter_hamiltonian(n: usize, h: f64, g: f64, boundary: Boundary) -> simmap_core::Result<QuadraticHamiltonian> {
    QuadraticHamiltonian::new(mu_matrix(n) * h + iq_matrix_with(n, boundary == Boundary::Ring) * g)
}

fn trotter_rows(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, RunError> {
    let mut points = vec![];
    for &n in &cfg.n {
        for &p in &cfg.p_order {
            for &t in &cfg.steps {
                for &q in &cfg.noise {
                    points.push((n, p, t, q));
                }
            }
        }
    }
    let placement = match cfg.placement {
        Placement::AllModes => NoisePlacement::AllModes,
        Placement::TouchedModes => NoisePlacement::TouchedModes,
    };
    let case = cfg.boundary.name();
    par_rows(&points, threads, |&(n, p, t, q)| {
        let at = || format!("trotter-sweep N={n} p_order={p} T={t} noise={q}");
        let bonds = ctx(if cfg.boundary == Boundary::Ring { fermion_ring_bonds(n, cfg.h, cfg.g) } else { fermion_chain_bonds(n, cfg.h, cfg.g) }, at)?;
        let split = ctx(even_odd_split_gaussian(n, &bonds), at)?;
        let f = ctx(suzuki_formula(p, 2), at)?;
        let h = ctx(trotter_hamiltonian(n, cfg.h, cfg.g, cfg.boundary), at)?;
        let target = mode_occupations(&ctx(evolve_exact(&vacuum_state(n), &h, cfg.tau), at)?).mean;
        let run = ctx(run_trotter(&vacuum_state(n), &split, &f, cfg.tau, t, Some(q), placement), at)?;
        let depth = (t * f.stages.len()) as f64;
        Ok(SweepRow::new(cfg.kind, case, n, p, Control::Steps(t), q, run.observable, target, depth))
    })
}

fn floquet_rows(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, RunError> {
    let mut points = vec![];
    for &n in &cfg.n {
        for &p in &cfg.p_order {
            for &u in &cfg.uptau {
                for &gamma in &cfg.noise {
                    points.push((n, p, u, gamma));
                }
            }
        }
    }
    par_rows(&points, threads, |&(n, p, uptau, gamma)| {
        let params = FloquetParams {
            n,
            h0: cfg.h0,
            h1: cfg.h1,
            g0: cfg.g0,
            g1: cfg.g1,
            p,
            tau: cfg.tau,
            uptau,
            gamma,
            tol: cfg.tol,
            ring: cfg.boundary == Boundary::Ring,
        };
        let r = ctx(run_floquet(&params), || format!("floquet-sweep N={n} p_order={p} uptau={uptau} noise={gamma}"))?;
        Ok(SweepRow::new(cfg.kind, cfg.boundary.name(), n, p, Control::Period(uptau), gamma, r.observable_sim, r.observable_target, r.t_sim))
    })
}

fn sw_rows(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, RunError> {
    if cfg.p_order.iter().any(|&p| p != 0) {
        return Err(RunError::Setup("sw-sweep: the built-in demo realises its target at p_order = 0 only".into()));
    }
    let mut points = vec![];
    for &n in &cfg.n {
        for &u in &cfg.uptau {
            for &gamma in &cfg.noise {
                points.push((n, u, gamma));
            }
        }
    }
    par_rows(&points, threads, |&(n, uptau, gamma)| {
        let at = || format!("sw-sweep N={n} uptau={uptau} noise={gamma}");
        let demo = ctx(sw_demo(n), at)?;
        let h0 = project_time_average(&demo.m, &demo.projectors);
        let r = ctx(run_sw(&demo.m, &demo.projectors, &h0, 0, &demo.observable, &demo.initial, cfg.tau, uptau, gamma, cfg.tol), at)?;
        Ok(SweepRow::new(cfg.kind, "xxz-demo", n, 0, Control::Period(uptau), gamma, r.observable_sim, r.observable_target, r.t_sim))
    })
}

/// Seeded random quadratic Hamiltonian with entries in [−1, 1].
pub fn random_quadratic(n: usize, seed: u64) -> simmap_core::Result<QuadraticHamiltonian> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = RMat::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        for k in j + 1..2 * n {
            let v = rng.random_range(-1.0..1.0);
            a[(j, k)] = v;
            a[(k, j)] = -v;
        }
    }
    QuadraticHamiltonian::new(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ValidateCase {
    Exact,
    Random,
    Trotter { p: usize, steps: usize, q: f64 },
    Driven { uptau: f64, gamma: f64 },
}

fn validate_rows(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, RunError> {
    let mut points = vec![];
    for &n in &cfg.n {
        points.push((n, ValidateCase::Exact));
        points.push((n, ValidateCase::Random));
        for &p in &cfg.p_order {
            for &steps in &cfg.steps {
                for &q in &cfg.noise {
                    points.push((n, ValidateCase::Trotter { p, steps, q }));
                }
            }
        }
        for &uptau in &cfg.uptau {
            for &gamma in &cfg.gamma {
                points.push((n, ValidateCase::Driven { uptau, gamma }));
            }
        }
    }
    let kind = cfg.kind;
    par_rows(&points, threads, |&(n, case)| {
        let at = || format!("validate N={n} {case:?}");
        let vac = ctx(DenseState::vacuum(n), at)?;
        let occ = mean_occupation_operator(n);
        let unitary_pair = |h: &QuadraticHamiltonian| -> Result<(f64, f64), RunError> {
            let g = mode_occupations(&ctx(evolve_exact(&vacuum_state(n), h, cfg.tau), at)?).mean;
            let hd = ctx(jordan_wigner_dense(h), at)?;
            let rho = evolve_unitary(&vac, &expm(&(&hd.matrix * Complex64::new(0.0, -cfg.tau))));
            Ok((g, ctx(expectation(&rho, &occ), at)?))
        };
        Ok(match case {
            ValidateCase::Exact => {
                let (g, d) = unitary_pair(&ctx(trotter_hamiltonian(n, cfg.h, cfg.g, Boundary::Open), at)?)?;
                SweepRow::new(kind, "exact", n, 0, Control::None, 0.0, g, d, cfg.tau)
            }
            ValidateCase::Random => {
                let (g, d) = unitary_pair(&ctx(random_quadratic(n, cfg.seed.wrapping_add(n as u64)), at)?)?;
                SweepRow::new(kind, "random-exact", n, 0, Control::None, 0.0, g, d, cfg.tau)
            }
            ValidateCase::Trotter { p, steps, q } => {
                let split = ctx(even_odd_split_gaussian(n, &ctx(fermion_chain_bonds(n, cfg.h, cfg.g), at)?), at)?;
                let f = ctx(suzuki_formula(p, 2), at)?;
                let placement = match cfg.placement {
                    Placement::AllModes => NoisePlacement::AllModes,
                    Placement::TouchedModes => NoisePlacement::TouchedModes,
                };
                let g = ctx(run_trotter(&vacuum_state(n), &split, &f, cfg.tau, steps, Some(q), placement), at)?.observable;
                let rho = ctx(replay_trotter_dense(&vac, &split, &f, cfg.tau, steps, Some(q), placement), at)?;
                let d = ctx(expectation(&rho, &occ), at)?;
                SweepRow::new(kind, "trotter-noisy", n, p, Control::Steps(steps), q, g, d, (steps * f.stages.len()) as f64)
            }
            ValidateCase::Driven { uptau, gamma } => {
                let mu = QuadraticHamiltonian::new(mu_matrix(n)).map_err(|e| RunError::Setup(e.to_string()))?;
                let iq = QuadraticHamiltonian::new(iq_matrix_with(n, false)).map_err(|e| RunError::Setup(e.to_string()))?;
                let fh = Waveform::cosine(cfg.h0, cfg.h1, uptau);
                let fg = Waveform::sine(cfg.g0, cfg.g1, uptau);
                let drive = ctx(GaussianDrive::new(vec![(fh.clone(), mu.clone()), (fg.clone(), iq.clone())]), at)?;
                let gs = ctx(evolve_noisy_ode(&vacuum_state(n), &drive, &DepolSpec::all(n, gamma), 0.0, cfg.tau, cfg.tol), at)?;
                let dd = DenseDrive { n, terms: vec![(fh, ctx(jordan_wigner_dense(&mu), at)?.matrix), (fg, ctx(jordan_wigner_dense(&iq), at)?.matrix)] };
                let diss: Vec<Dissipator> = (0..n).map(Dissipator::FermionMode).collect();
                let rho = ctx(evolve_lindblad_dense(&vac, &dd, &diss, gamma, 0.0, cfg.tau, cfg.tol), at)?;
                SweepRow::new(
                    kind,
                    "driven-lindblad",
                    n,
                    0,
                    Control::Period(uptau),
                    gamma,
                    mode_occupations(&gs).mean,
                    ctx(expectation(&rho, &occ), at)?,
                    cfg.tau,
                )
            }
        })
    })
}

fn bounds_rows(cfg: &ExperimentConfig) -> Result<Vec<TradeoffResult>, RunError> {
    let c = TradeoffConstants { c_map: cfg.c_map, c_noise: cfg.c_noise };
    let mut out = vec![];
    for &p in &cfg.p_order {
        for &gamma in &cfg.noise {
            out.push(ctx(tradeoff(cfg.mapping, p, cfg.d, gamma, cfg.tau, &c), || format!("bounds {} p_order={p} noise={gamma}", cfg.mapping.name()))?);
        }
    }
    Ok(out)
}

fn ft_rows(cfg: &ExperimentConfig) -> Result<Vec<(f64, FTRecord)>, RunError> {
    if cfg.p_order.len() != 1 {
        return Err(RunError::Setup("ft-overhead takes a single p_order".into()));
    }
    cfg.delta
        .iter()
        .map(|&delta| {
            let params = FTParams {
                xi0: cfg.xi0,
                xi_th: cfg.xi_th,
                t: cfg.t_code,
                levels: cfg.levels,
                delta,
                tau: cfg.tau,
                d: cfg.d,
                p: cfg.p_order[0],
                constants: TradeoffConstants { c_map: cfg.c_map, c_noise: cfg.c_noise },
            };
            Ok((delta, ctx(ft_overhead(&params), || format!("ft-overhead delta={delta}"))?))
        })
        .collect()
}

fn fit_rows(cfg: &ExperimentConfig) -> Result<FitResult, RunError> {
    let path = cfg.input.as_ref().ok_or_else(|| RunError::Setup("fit needs `input`".into()))?;
    let table = read_table(path)?;
    let keep = filter_predicate(&table, &cfg.filter)?;
    Ok(fit_power_law(&table, &cfg.x_column, &cfg.y_column, keep, cfg.reduce)?)
}

/// Run the whole grid described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Output, RunError> {
    Ok(match cfg.kind {
        ExperimentKind::Validate => Output::Sweep(validate_rows(cfg, threads)?),
        ExperimentKind::TrotterSweep => Output::Sweep(trotter_rows(cfg, threads)?),
        ExperimentKind::FloquetSweep => Output::Sweep(floquet_rows(cfg, threads)?),
        ExperimentKind::SwSweep => Output::Sweep(sw_rows(cfg, threads)?),
        ExperimentKind::Bounds => Output::Bounds(bounds_rows(cfg)?),
        ExperimentKind::FtOverhead => Output::FtOverhead(ft_rows(cfg)?),
        ExperimentKind::Fit => Output::Fit(fit_rows(cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn grid_is_complete_and_sorted() {
        let cfg = parse_config("kind = trotter-sweep\nN = 8, 4\nT = 8, 4\np_order = 2\nnoise = 0, 1e-3\n", None).unwrap();
        let Output::Sweep(rows) = run_experiment(&cfg, Some(2)).unwrap() else { panic!() };
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].n, rows[0].control), (4, Control::Steps(4)));
        for r in &rows {
            assert_eq!(r.abs_error, (r.observable_sim - r.observable_target).abs());
        }
    }

    #[test]
    fn validate_at_four_modes_agrees() {
        let cfg = parse_config("kind = validate\nN = 4\n", None).unwrap();
        let Output::Sweep(rows) = run_experiment(&cfg, None).unwrap() else { panic!() };
        assert_eq!(rows.len(), 4);
        let worst = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
        assert!(worst < 1e-7, "{rows:?}");
    }

    #[test]
    fn engine_errors_carry_grid_point() {
        let cfg = parse_config("kind = floquet-sweep\nN = 4\nuptau = 0.1\np_order = 1\n", None).unwrap();
        let e = run_experiment(&cfg, None).unwrap_err();
        assert!(e.to_string().contains("floquet-sweep N=4 p_order=1 uptau=0.1"), "{e}");
    }

    #[test]
    fn sw_rejects_higher_orders() {
        let cfg = parse_config("kind = sw-sweep\nN = 4\nuptau = 0.1\np_order = 1\n", None).unwrap();
        assert!(matches!(run_experiment(&cfg, None), Err(RunError::Setup(_))));
    }
}
