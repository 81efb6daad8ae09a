//! Byte-identical CSV regardless of worker count.

use simmap_harness::cli::run;

fn csv_with_threads(config: &str, sub: &str, threads: usize) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    let out = dir.path().join("o.csv");
    std::fs::write(&cfg, config).unwrap();
    let args = ["simmap", sub, "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", &threads.to_string()];
    let code = run(args, &mut Vec::new(), &mut Vec::new());
    assert_eq!(code, 0);
    std::fs::read(out).unwrap()
}

#[test]
fn identical_bytes_at_one_two_and_eight_threads() {
    let cases = [
        ("validate", "kind = validate\nN = 2, 3, 4\nseed = 11\n"),
        ("trotter-sweep", "kind = trotter-sweep\nN = 8, 16\nT = 2, 4, 8\np_order = 2, 4\nnoise = 0, 1e-3\n"),
        ("floquet-sweep", "kind = floquet-sweep\nN = 4, 6\nuptau = 0.2, 0.1\np_order = 0\nnoise = 0, 1e-3\n"),
        ("sw-sweep", "kind = sw-sweep\nN = 4\nuptau = 0.2, 0.1\nnoise = 0, 1e-3\n"),
    ];
    for (sub, cfg) in cases {
        let one = csv_with_threads(cfg, sub, 1);
        assert_eq!(one, csv_with_threads(cfg, sub, 2), "{sub}");
        assert_eq!(one, csv_with_threads(cfg, sub, 8), "{sub}");
    }
}
