//! Reduced-size experiment sweeps: N = 2^14, L = 50, n in [4, 6].

use novikov_core::experiments::{run_all, EXPERIMENTS};
use novikov_core::{BesovParams, ExperimentConfig};

fn config(p: f64) -> ExperimentConfig {
    ExperimentConfig {
        besov: BesovParams::new(2.0, p, 2.0).unwrap(),
        n_points: 1 << 14,
        n_max: 6,
        ..ExperimentConfig::default()
    }
}

const EXPECTED_TO_HOLD: [(&str, &str); 12] = [
    ("partition-check", "partition_of_unity"),
    ("partition-check", "reconstruction"),
    ("partition-check", "bernstein"),
    ("norms", "g_besov_slope"),
    ("norms", "u0_high_index_slope"),
    ("norms", "mform_equivalence"),
    ("norms", "localization"),
    ("prop1", "rate_slope"),
    ("prop1", "aux_rate_slope"),
    ("prop2", "zero_at_t0"),
    ("theorem", "initial_distance_slope"),
    ("theorem", "triangle_inequality"),
];

#[test]
fn second_sweep_at_p4() {
    let reports = run_all(&config(4.0)).unwrap();
    assert_eq!(reports.len(), EXPERIMENTS.len());
    for (exp, crit) in EXPECTED_TO_HOLD {
        let rep = reports.iter().find(|r| r.experiment == exp).unwrap();
        let c = rep.criterion(crit).unwrap();
        assert!(c.passed, "{exp}/{crit}: {c:?}");
    }
    let theorem = reports.iter().find(|r| r.experiment == "theorem").unwrap();
    for c in ["rho_divergence", "u_divergence"] {
        assert!(theorem.criterion(c).unwrap().passed);
    }
    // One row per (n, t) sample.
    for exp in ["prop1", "prop2", "theorem"] {
        let rep = reports.iter().find(|r| r.experiment == exp).unwrap();
        assert_eq!(rep.table.rows.len(), 3 * 4);
        let n = rep.table.column("n").unwrap();
        let t = rep.table.column("t").unwrap();
        let keys: Vec<(f64, f64)> = n.into_iter().zip(t).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }
}

#[test]
fn outputs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(2.0);
    let write_all = |sub: &str| {
        let out = dir.path().join(sub);
        for rep in run_all(&cfg).unwrap() {
            rep.write(&out).unwrap();
        }
        out
    };
    let a = write_all("a");
    let b = write_all("b");
    for exp in EXPERIMENTS {
        for ext in ["csv", "json"] {
            let name = format!("{exp}.{ext}");
            let x = std::fs::read(a.join(&name)).unwrap();
            let y = std::fs::read(b.join(&name)).unwrap();
            assert!(!x.is_empty());
            assert_eq!(x, y, "{name} differs between runs");
        }
    }
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("theorem.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["n_points"], 16384);
    assert!(json["scalars"]["riemann_constant"].as_f64().unwrap() > 0.0);
    assert!(json["criteria"].as_array().unwrap().iter().all(|c| c["passed"].is_boolean()));
    let csv = std::fs::read_to_string(a.join("prop1.csv")).unwrap();
    assert!(csv.starts_with("n,t,err_rho_sm1,err_u_s,err,"));
    assert_eq!(csv.lines().count(), 1 + 12);
}
