//! Data-family properties on a mid-size grid (N = 2^14, L = 50, n in 3..=6).

use std::sync::Arc;

use novikov_core::besov::{BesovParams, DyadicPartition};
use novikov_core::counterexamples::{build_pairs, cosine_mean, drift_decomposition, riemann_constant, DataFamily};
use novikov_core::fit::fit_rate;
use novikov_core::snapshot::{read_snapshot, write_snapshot};
use novikov_core::spectral::Grid;
use novikov_core::Field;

fn setup() -> (Arc<Grid>, DyadicPartition, Vec<DataFamily>) {
    let g = Grid::new(1 << 14, 50.0).unwrap();
    let p = DyadicPartition::new(&g).unwrap();
    let fams = (3..=6).map(|n| build_pairs(&g, n, 2.0).unwrap()).collect();
    (g, p, fams)
}

fn besov(p: &DyadicPartition, f: &Field, s: f64) -> f64 {
    p.besov_norm(f, &BesovParams::new(s, 2.0, 2.0).unwrap()).unwrap()
}

fn slope(points: Vec<(f64, f64)>) -> f64 {
    fit_rate(&points).unwrap().slope
}

#[test]
fn scale_ladder() {
    let (_, p, fams) = setup();
    let s = 2.0;
    // ρ̃_{0,n} at s-2 decays like 2^{-n/2} (the g_n part dominates).
    let low: Vec<_> = fams.iter().map(|f| (f.index.n as f64, besov(&p, &f.pair_pert.rho, s - 2.0))).collect();
    let m = slope(low);
    assert!(m <= -0.45, "{m}");
    // ρ̃_{0,n} at s - 1 + σ grows like 2^{nσ} for σ = 1, 2; u at s + σ likewise.
    for sigma in [1.0, 2.0] {
        let r: Vec<_> = fams.iter().map(|f| (f.index.n as f64, besov(&p, &f.pair_pert.rho, s - 1.0 + sigma))).collect();
        let u: Vec<_> = fams.iter().map(|f| (f.index.n as f64, besov(&p, &f.pair_pert.u, s + sigma))).collect();
        assert!((slope(r) - sigma).abs() < 0.05);
        assert!((slope(u) - sigma).abs() < 0.05);
    }
}

#[test]
fn initial_norms_bounded_uniformly() {
    let (_, p, fams) = setup();
    let params = BesovParams::default();
    for pick in [0usize, 1] {
        let vals: Vec<f64> = fams
            .iter()
            .map(|f| {
                let pair = if pick == 0 { &f.pair_plain } else { &f.pair_pert };
                p.pair_norm(&pair.rho, &pair.u, &params).unwrap()
            })
            .collect();
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi / lo < 1.5, "{vals:?}");
    }
}

#[test]
fn parity_of_fields() {
    let (g, _, fams) = setup();
    let n = g.n_points();
    for fam in &fams {
        for (f, sign) in [(&fam.phi, 1.0), (&fam.g_n, 1.0), (&fam.f_n, -1.0)] {
            let v = f.values();
            let scale = f.max_abs();
            for i in 1..n {
                assert!((v[i] - sign * v[n - i]).abs() <= 1e-13 * scale);
            }
        }
    }
}

#[test]
fn remainders_decay_against_leading_term() {
    let (_, p, fams) = setup();
    let r = riemann_constant(2.0, &fams[0].phi).unwrap();
    let mut last = f64::MAX;
    for fam in fams.iter().filter(|f| f.index.n >= 4) {
        let dec = drift_decomposition(fam).unwrap();
        let lead = besov(&p, &dec.leading, 1.0);
        assert!((lead / r - 1.0).abs() < 0.05, "n = {}: {}", fam.index.n, lead / r);
        let rem: f64 = dec.remainders().iter().map(|f| besov(&p, f, 1.0)).sum();
        assert!(rem < last, "remainders must shrink with n");
        last = rem;
    }
}

#[test]
fn riemann_sum_limit_of_f_n() {
    let (_, _, fams) = setup();
    let phi_l2 = fams[0].phi.lp_norm(2.0).unwrap();
    let limit = cosine_mean(2.0).unwrap() * phi_l2;
    let fam = fams.last().unwrap();
    let scaled = fam.f_n.lp_norm(2.0).unwrap() * 2f64.powf(fam.index.n as f64 * 2.0);
    assert!((scaled / limit - 1.0).abs() < 0.01);
}

#[test]
fn family_snapshot_round_trip() {
    let (_, _, fams) = setup();
    let fam = &fams[1];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.bin");
    let fields = [("phi", &fam.phi), ("f_n", &fam.f_n), ("w0", &fam.w0)];
    write_snapshot(std::fs::File::create(&path).unwrap(), &fields).unwrap();
    let (g, back) = read_snapshot(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(g.n_points(), 1 << 14);
    for ((name, f), (bn, bf)) in fields.iter().zip(&back) {
        assert_eq!(name, bn);
        assert_eq!(f.values(), bf.values());
    }
}
