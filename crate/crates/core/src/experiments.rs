//! Sweeps over the frequency index `n`, rate fits and pass/fail criteria.
//!
//! Every experiment produces an [`ExperimentReport`]: a numeric [`Table`]
//! (written as `<name>.csv`) plus fits, scalars, flags and criteria (written
//! with the configuration as `<name>.json`). Families and trajectories for
//! different `n` are computed on the rayon pool; rows are sorted by `(n, t)`
//! before they are written, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{BesovParams, DyadicPartition};
use crate::counterexamples::{
    build_pairs, cosine_mean, drift_decomposition, profile_tail, riemann_constant,
    CounterexampleIndex, DataFamily,
};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, fit_rate, RateFit};
use crate::integrator::{cfl_dt, solve, step_rk4, time_refinement_study, SolverConfig, Trajectory};
use crate::rhs::{closed_form_errors, mform_residual, rhs, StatePair};
use crate::spectral::{Field, Grid};

pub const EXPERIMENTS: [&str; 5] = ["partition-check", "norms", "prop1", "prop2", "theorem"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub besov: BesovParams,
    pub n_points: usize,
    pub half_width: f64,
    pub n_min: u32,
    pub n_max: u32,
    /// Must start at 0 and contain at least three positive times.
    pub sample_times: Vec<f64>,
    pub horizon: f64,
    pub solver: SolverConfig,
    pub out_dir: String,
    /// Accept `s <= max(1 + 1/p, 3/2)`.
    pub allow_outside_theorem_range: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            besov: BesovParams::default(),
            n_points: 1 << 16,
            half_width: 50.0,
            n_min: 4,
            n_max: 8,
            sample_times: vec![0.0, 0.02, 0.05, 0.1],
            horizon: 0.1,
            solver: SolverConfig::default(),
            out_dir: "results".into(),
            allow_outside_theorem_range: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> {
        self.n_min..=self.n_max
    }

    /// Checks the configuration and returns its grid.
    pub fn validate(&self) -> Result<Arc<Grid>> {
        self.besov.validate()?;
        if !self.allow_outside_theorem_range {
            self.besov.require_theorem_range()?;
        }
        if self.n_max < self.n_min + 2 {
            return Err(Error::InvalidConfig(format!(
                "n range [{}, {}] has fewer than three indices",
                self.n_min, self.n_max
            )));
        }
        if !(self.horizon > 0.0) || self.horizon > self.solver.horizon_cap {
            return Err(Error::InvalidConfig(format!(
                "horizon {} outside (0, {}]",
                self.horizon, self.solver.horizon_cap
            )));
        }
        let ts = &self.sample_times;
        if ts.first() != Some(&0.0) {
            return Err(Error::InvalidConfig("sample times must start at 0".into()));
        }
        if ts.windows(2).any(|w| !(w[0] < w[1])) || ts.iter().any(|&t| t > self.horizon) {
            return Err(Error::InvalidConfig(format!(
                "sample times {ts:?} must increase strictly within [0, {}]",
                self.horizon
            )));
        }
        if ts.len() < 4 {
            return Err(Error::InvalidConfig("at least three positive sample times are needed".into()));
        }
        let grid = Grid::new(self.n_points, self.half_width)?;
        for n in self.indices() {
            CounterexampleIndex::new(n, self.besov.s, &grid)?;
        }
        Ok(grid)
    }

    fn positive_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.sample_times.iter().copied().filter(|&t| t > 0.0)
    }
}

/// Numeric table with named columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Lexicographic order on the leading columns.
    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    /// Header row, then one line per row; values use the shortest decimal
    /// form that round-trips.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            if row.len() != self.columns.len() {
                return Err(Error::InvalidConfig(format!(
                    "row of {} values for {} columns",
                    row.len(),
                    self.columns.len()
                )));
            }
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

impl Criterion {
    fn at_most(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Criterion {
            name: name.into(),
            passed: value <= bound,
            value,
            bound,
            detail: detail.into(),
        }
    }

    fn at_least(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Criterion {
            passed: value >= bound,
            ..Criterion::at_most(name, value, bound, detail)
        }
    }

    /// `|value - target| <= tol`; `bound` records the target.
    fn near(name: &str, value: f64, target: f64, tol: f64, detail: impl Into<String>) -> Self {
        Criterion {
            passed: (value - target).abs() <= tol,
            ..Criterion::at_most(name, value, target, format!("{} (tolerance {tol})", detail.into()))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub fits: BTreeMap<String, RateFit>,
    pub scalars: BTreeMap<String, f64>,
    /// Data properties that are reported but never fail a run.
    pub flags: BTreeMap<String, bool>,
    pub criteria: Vec<Criterion>,
    #[serde(skip)]
    pub table: Table,
}

impl ExperimentReport {
    fn new(experiment: &str, config: &ExperimentConfig, table: Table) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config: config.clone(),
            fits: BTreeMap::new(),
            scalars: BTreeMap::new(),
            flags: BTreeMap::new(),
            criteria: Vec::new(),
            table,
        }
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let csv = fs::File::create(dir.join(format!("{}.csv", self.experiment)))?;
        self.table.write_csv(std::io::BufWriter::new(csv))?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(dir.join(format!("{}.json", self.experiment)), json)?;
        Ok(())
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

/// `max / median`, the stability measure for bounded ratios.
fn spread(values: &[f64]) -> f64 {
    max_of(values.iter().copied()) / median(values)
}

/// Deterministic field with every lattice mode up to `band` populated.
fn broadband_field(grid: &Arc<Grid>, band: f64) -> Result<Field> {
    let n = grid.n_points();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(0.3, 0.0);
    for m in 1..n / 2 {
        let k = grid.wavenumbers()[m];
        if k > band {
            break;
        }
        let mf = m as f64;
        let amp = 1.0 / (1.0 + (k / 64.0).powi(2));
        spec[m] = Complex64::new((0.7 * mf * mf).cos(), (1.3 * mf).sin()) * amp;
        spec[n - m] = spec[m].conj();
    }
    Field::from_spectrum(grid, spec)
}

/// Relative sup-norm deviation of `Δ_j f` from `δ_{jn} f` over all blocks.
fn localization_defect(part: &DyadicPartition, f: &Field, n: i32) -> Result<f64> {
    let scale = f.max_abs();
    let mut worst = 0.0f64;
    for j in -1..=part.j_max() {
        let b = part.block(f, j)?;
        let d = if j == n { b.sub(f)?.max_abs() } else { b.max_abs() };
        worst = worst.max(d / scale);
    }
    Ok(worst)
}

fn ratio_label(t: f64) -> String {
    format!("{t}")
}

/// Shared state for a configuration: grid, partition, data families and the
/// lazily solved trajectories.
pub struct Harness {
    config: ExperimentConfig,
    grid: Arc<Grid>,
    partition: DyadicPartition,
    families: Vec<DataFamily>,
    plain: OnceLock<Vec<Trajectory>>,
    perturbed: OnceLock<Vec<Trajectory>>,
}

impl Harness {
    pub fn new(config: &ExperimentConfig) -> Result<Harness> {
        let grid = config.validate()?;
        let partition = DyadicPartition::new(&grid)?;
        let indices: Vec<u32> = config.indices().collect();
        let families = indices
            .par_iter()
            .map(|&n| build_pairs(&grid, n, config.besov.s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Harness {
            config: config.clone(),
            grid,
            partition,
            families,
            plain: OnceLock::new(),
            perturbed: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    pub fn families(&self) -> &[DataFamily] {
        &self.families
    }

    fn params(&self) -> &BesovParams {
        &self.config.besov
    }

    /// `‖f‖_{B^σ_{p,r}}` with the configured `p, r`.
    fn norm(&self, f: &Field, sigma: f64) -> Result<f64> {
        self.partition.besov_norm(f, &self.params().with_s(sigma))
    }

    /// Norms at several indices from one set of block norms.
    fn norms(&self, f: &Field, sigmas: &[f64]) -> Result<Vec<f64>> {
        let blocks = self.partition.block_norms(f, self.params().p)?;
        Ok(sigmas.iter().map(|&s| blocks.besov(s, self.params().r)).collect())
    }

    /// Trajectories from the plain (`perturbed = false`) or perturbed pairs.
    pub fn trajectories(&self, perturbed: bool) -> Result<&[Trajectory]> {
        let cell = if perturbed { &self.perturbed } else { &self.plain };
        if let Some(t) = cell.get() {
            return Ok(t);
        }
        let solved = self
            .families
            .par_iter()
            .map(|fam| {
                let pair = if perturbed { &fam.pair_pert } else { &fam.pair_plain };
                solve(pair, self.config.horizon, &self.config.sample_times, &self.config.solver)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(cell.get_or_init(|| solved))
    }

    pub fn run(&self, experiment: &str) -> Result<ExperimentReport> {
        match experiment {
            "partition-check" => self.partition_check(),
            "norms" => self.initial_norms(),
            "prop1" => self.prop1(),
            "prop2" => self.prop2(),
            "theorem" => self.theorem(),
            other => Err(Error::InvalidConfig(format!("unknown experiment {other}"))),
        }
    }

    /// Partition and block identities, operator closed forms and integrator
    /// checks.
    pub fn partition_check(&self) -> Result<ExperimentReport> {
        let part = &self.partition;
        let j_max = part.j_max();
        let weights: Vec<&[f64]> = (-1..=j_max)
            .map(|j| part.weights(j).map(|w| w.expect("j >= -1")))
            .collect::<Result<_>>()?;
        let cover = part.coverage();

        let mut unity = 0.0f64;
        for (i, k) in self.grid.wavenumbers().iter().enumerate() {
            if k.abs() <= cover {
                let sum: f64 = weights.iter().map(|w| w[i]).sum();
                unity = unity.max((sum - 1.0).abs());
            }
        }
        let mut overlap = 0.0f64;
        for a in 0..weights.len() {
            for b in a + 2..weights.len() {
                let m = weights[a].iter().zip(weights[b]).map(|(x, y)| x * y).fold(0.0, f64::max);
                overlap = overlap.max(m);
            }
        }

        let probe = broadband_field(&self.grid, cover)?;
        let mut corpus = vec![probe.clone()];
        for fam in [&self.families[0], self.families.last().expect("n range is non-empty")] {
            corpus.extend([fam.f_n.clone(), fam.g_n.clone(), fam.w0.clone()]);
        }
        let mut recon = 0.0f64;
        let mut leak = 0.0f64;
        for f in &corpus {
            recon = recon.max(part.reconstruct(f)?.relative_l2_distance(f)?);
            leak = leak.max(part.leakage(f));
        }

        let exps = [1.0, 2.0, self.params().p, f64::INFINITY];
        let mut table = Table::new(&[
            "j",
            "block_l2",
            "bernstein_p1",
            "bernstein_p2",
            "bernstein_p_config",
            "bernstein_inf",
        ]);
        let mut bern = 0.0f64;
        for j in -1..=j_max {
            let b = part.block(&probe, j)?;
            let db = b.derivative();
            let scale = 8.0 / 3.0 * 2f64.powi(j);
            let mut row = vec![j as f64, b.lp_norm(2.0)?];
            for p in exps {
                let r = db.lp_norm(p)? / (scale * b.lp_norm(p)?);
                bern = bern.max(r);
                row.push(r);
            }
            table.rows.push(row);
        }

        let closed = closed_form_errors(256)?;
        let closed_max = max_of(closed.iter().map(|c| c.1));

        let order_grid = Grid::new(64, std::f64::consts::PI)?;
        let smooth = StatePair::new(
            Field::from_fn(&order_grid, |x| 0.5 * x.cos()),
            Field::from_fn(&order_grid, |x| 0.6 * x.cos() + 0.2 * (2.0 * x).sin()),
        )?;
        let order = time_refinement_study(&smooth, 1.0, &[10, 20, 50, 100])?;

        let v = &self.families[0].pair_pert.u;
        let reduced = StatePair::new(Field::zeros(&self.grid), v.clone())?;
        let traj = solve(&reduced, self.config.horizon, &self.config.sample_times, &self.config.solver)?;
        let rho_drift = max_of(traj.states.iter().map(|s| s.rho.max_abs()));

        let mut rep = ExperimentReport::new("partition-check", &self.config, table);
        rep.scalars.insert("j_max".into(), j_max as f64);
        rep.scalars.insert("coverage".into(), cover);
        rep.scalars.insert("max_leakage".into(), leak);
        for (name, e) in &closed {
            rep.scalars.insert(format!("closed_form_{name}"), *e);
        }
        for (dt, e) in order.dts.iter().zip(&order.errors) {
            rep.scalars.insert(format!("rk4_error_dt_{dt}"), *e);
        }
        rep.fits.insert("rk4_order".into(), order.fit);
        rep.criteria = vec![
            Criterion::at_most("partition_of_unity", unity, 1e-10, format!("max |Σ_j ψ_j - 1| for |k| <= {cover}")),
            Criterion::at_most("block_disjointness", overlap, 0.0, "max ψ_j ψ_j' over |j - j'| >= 2"),
            Criterion::at_most("reconstruction", recon, 1e-10, "relative L2 error of Σ_j Δ_j f"),
            Criterion::at_most("bernstein", bern, 1.0 + 1e-6, "‖∂x Δ_j f‖_p / ((8/3) 2^j ‖Δ_j f‖_p)"),
            Criterion::at_most("operator_closed_forms", closed_max, 1e-10, "p1, p2, p3, r1, r2 on cos x"),
            Criterion::near("integrator_order", order.fit.slope, 4.0, 0.3, "RK4 global error slope in dt"),
            Criterion::at_most("density_free_reduction", rho_drift, 0.0, "max |ρ| along a solve from ρ = 0"),
        ];
        Ok(rep)
    }

    /// Norm ladders of the initial data, localization identities, the
    /// equivalence residual and the leading drift constant.
    pub fn initial_norms(&self) -> Result<ExperimentReport> {
        let s = self.params().s;
        let p = self.params().p;
        let sigmas = [s - 2.0, s - 1.0, s, s + 1.0];
        let labels = ["m2", "m1", "0", "p1"];
        let mut columns = vec!["n".to_string()];
        for field in ["rho0", "u0", "rho0_pert", "v0"] {
            for l in labels {
                columns.push(format!("{field}_s{l}"));
            }
        }
        columns.extend(
            [
                "g_s", "g_sm1", "pair_plain", "pair_pert", "w0_sm1", "v0_drift_s", "leading_sm1",
                "leading_sm1_l22", "leading_l22_over_riemann", "f_scaled_lp_over_limit",
                "localization_f", "localization_leading", "mform_t0", "mform_10_steps",
            ]
            .map(String::from),
        );
        let phi = &self.families[0].phi;
        let riemann_p = riemann_constant(p, phi)?;
        let riemann_2 = riemann_constant(2.0, phi)?;
        let limit_f = cosine_mean(p)? * phi.lp_norm(p)?;
        let l22 = BesovParams::new(s - 1.0, 2.0, 2.0)?;

        let rows = self
            .families
            .par_iter()
            .map(|fam| -> Result<Vec<f64>> {
                let n = fam.index.n;
                let mut row = vec![n as f64];
                for f in [&fam.pair_plain.rho, &fam.pair_plain.u, &fam.pair_pert.rho, &fam.pair_pert.u] {
                    row.extend(self.norms(f, &sigmas)?);
                }
                let g = self.norms(&fam.g_n, &[s, s - 1.0])?;
                row.extend(g);
                row.push(self.partition.pair_norm(&fam.pair_plain.rho, &fam.pair_plain.u, self.params())?);
                row.push(self.partition.pair_norm(&fam.pair_pert.rho, &fam.pair_pert.u, self.params())?);
                row.push(self.norm(&fam.w0, s - 1.0)?);
                row.push(self.norm(&fam.v0, s)?);
                let dec = drift_decomposition(fam)?;
                row.push(self.norm(&dec.leading, s - 1.0)?);
                let lead_l22 = self.partition.besov_norm(&dec.leading, &l22)?;
                row.push(lead_l22);
                row.push(lead_l22 / riemann_2);
                let scaled = fam.f_n.lp_norm(p)? * 2f64.powf(n as f64 * s);
                row.push(scaled / limit_f);
                row.push(localization_defect(&self.partition, &fam.f_n, n as i32)?);
                row.push(localization_defect(&self.partition, &dec.leading, n as i32)?);

                let mut res0 = 0.0f64;
                let mut res10 = 0.0f64;
                for pair in [&fam.pair_plain, &fam.pair_pert] {
                    res0 = res0.max(mform_residual(pair, &rhs(pair)?)?.max());
                    let mut state = pair.clone();
                    for _ in 0..10 {
                        let dt = cfl_dt(&state, &self.grid, self.config.solver.safety, self.config.solver.dt_max);
                        state = step_rk4(&state, dt)?;
                    }
                    res10 = res10.max(mform_residual(&state, &rhs(&state)?)?.max());
                }
                row.push(res0);
                row.push(res10);
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;

        let table = Table { columns, rows };
        let col = |name: &str| table.column(name).expect("known column");
        let ns: Vec<f64> = col("n");
        let fit_of = |name: &str| fit_rate(&ns.iter().copied().zip(col(name)).collect::<Vec<_>>());
        let g_fit = fit_of("g_s")?;
        let u_fit = fit_of("u0_sp1")?;
        let last = table.rows.len() - 1;
        let loc_lead: Vec<f64> = ns
            .iter()
            .zip(col("localization_leading"))
            .filter(|(n, _)| **n >= 5.0)
            .map(|(_, v)| v)
            .collect();
        let loc = max_of(col("localization_f").into_iter().chain(loc_lead));
        let mform = max_of(col("mform_t0").into_iter().chain(col("mform_10_steps")));
        let n_top = self.config.n_max;

        let mut rep = ExperimentReport::new("norms", &self.config, Table::default());
        for name in ["g_s", "g_sm1", "u0_sp1", "rho0_pert_sm1", "v0_s0", "w0_sm1", "v0_drift_s"] {
            rep.fits.insert(name.into(), fit_of(name)?);
        }
        rep.scalars.insert("riemann_constant".into(), riemann_p);
        rep.scalars.insert("riemann_constant_l2".into(), riemann_2);
        let tail = profile_tail(phi);
        rep.scalars.insert("profile_tail".into(), tail);
        rep.flags.insert("profile_tail_below_1e-12".into(), tail < 1e-12);
        rep.criteria = vec![
            Criterion::near("g_besov_slope", g_fit.slope, -0.5, 0.05, "log2 ‖g_n‖_{B^s} against n"),
            Criterion::near("u0_high_index_slope", u_fit.slope, 1.0, 0.05, "log2 ‖u_{0,n}‖_{B^{s+1}} against n"),
            Criterion::at_most("pair_norm_plain_stable", spread(&col("pair_plain")), 1.5, "max / median over n"),
            Criterion::at_most("pair_norm_pert_stable", spread(&col("pair_pert")), 1.5, "max / median over n"),
            Criterion::at_most("mform_equivalence", mform, 1e-8, "relative residual at t = 0 and after 10 steps"),
            Criterion::at_most("localization", loc, 1e-12, "Δ_j f_n = δ_jn f_n, and the leading drift for n >= 5"),
            Criterion::near(
                "riemann_constant_l2",
                col("leading_l22_over_riemann")[last],
                1.0,
                0.02,
                format!("‖g_n² ∂x(2^n f_n)‖_{{B^{{s-1}}_{{2,2}}}} / constant at n = {n_top}"),
            ),
            Criterion::near(
                "profile_riemann_sum",
                col("f_scaled_lp_over_limit")[last],
                1.0,
                0.01,
                format!("2^{{ns}} ‖f_n‖_p / (mean |sin|^p)^{{1/p}} ‖φ‖_p at n = {n_top}"),
            ),
        ];
        rep.table = table;
        Ok(rep)
    }

    /// Distance of the solution from its data along the plain pair.
    pub fn prop1(&self) -> Result<ExperimentReport> {
        let s = self.params().s;
        let trajs = self.trajectories(false)?;
        let rows = self
            .families
            .par_iter()
            .zip(trajs)
            .map(|(fam, traj)| -> Result<Vec<Vec<f64>>> {
                let mut rows = Vec::new();
                for &t in &self.config.sample_times {
                    let state = traj.state_at(t).expect("sample time is recorded");
                    let d = state.sub(&fam.pair_plain)?;
                    let r = self.norms(&d.rho, &[s - 1.0, s - 2.0])?;
                    let u = self.norms(&d.u, &[s, s - 1.0])?;
                    rows.push(vec![
                        fam.index.n as f64,
                        t,
                        r[0],
                        u[0],
                        r[0] + u[0],
                        r[1],
                        u[1],
                        r[1] + u[1],
                        traj.steps() as f64,
                        traj.max_tail(),
                        traj.max_residual(),
                    ]);
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(&[
            "n", "t", "err_rho_sm1", "err_u_s", "err", "aux_rho_sm2", "aux_u_sm1", "aux", "steps",
            "max_tail", "max_residual",
        ]);
        table.rows = rows.into_iter().flatten().collect();
        table.sort_rows();

        let sup_by_n = |name: &str| -> Vec<(f64, f64)> {
            let ns = table.column("n").expect("n");
            let vals = table.column(name).expect("column");
            self.config
                .indices()
                .map(|n| {
                    let m = max_of(ns.iter().zip(&vals).filter(|(k, _)| **k == n as f64).map(|(_, v)| *v));
                    (n as f64, m)
                })
                .collect()
        };
        let fit = fit_rate(&sup_by_n("err"))?;
        let aux = fit_rate(&sup_by_n("aux"))?;
        let at_zero = max_of(
            table
                .rows
                .iter()
                .filter(|r| r[1] == 0.0)
                .map(|r| r[4].max(r[7])),
        );
        let mut rep = ExperimentReport::new("prop1", &self.config, Table::default());
        rep.scalars.insert("max_tail".into(), max_of(table.column("max_tail").unwrap()));
        rep.scalars.insert("max_residual".into(), max_of(table.column("max_residual").unwrap()));
        rep.fits.insert("err".into(), fit);
        rep.fits.insert("aux".into(), aux);
        rep.criteria = vec![
            Criterion::at_most("rate_slope", fit.slope, -(s - 1.0) / 2.0 + 0.1, "sup_t X_s against n"),
            Criterion::at_most("aux_rate_slope", aux.slope, -s + 0.1, "sup_t X_{s-1} against n"),
            Criterion::at_most("zero_at_t0", at_zero, 0.0, "error at t = 0"),
        ];
        rep.table = table;
        Ok(rep)
    }

    /// Remainder of the first-order expansion along the perturbed pair.
    pub fn prop2(&self) -> Result<ExperimentReport> {
        let s = self.params().s;
        let trajs = self.trajectories(true)?;
        let rows = self
            .families
            .par_iter()
            .zip(trajs)
            .map(|(fam, traj)| -> Result<Vec<Vec<f64>>> {
                let n = fam.index.n as f64;
                let mut rows = Vec::new();
                for &t in &self.config.sample_times {
                    let state = traj.state_at(t).expect("sample time is recorded");
                    let d = state.sub(&fam.pair_pert)?;
                    let z_rho = d.rho.lincomb(1.0, &fam.w0, -t)?;
                    let z_u = d.u.lincomb(1.0, &fam.v0, -t)?;
                    let dr = self.norm(&z_rho, s - 1.0)?;
                    let du = self.norm(&z_u, s)?;
                    let bound = t * t + 2f64.powf(-n / 2.0);
                    rows.push(vec![n, t, dr, du, dr + du, bound, (dr + du) / bound]);
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(&["n", "t", "d_rho", "d_u", "d", "bound", "ratio"]);
        table.rows = rows.into_iter().flatten().collect();
        table.sort_rows();

        let positive: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[1] > 0.0).collect();
        let ratios: Vec<f64> = positive.iter().map(|r| r[6]).collect();
        let at_zero = max_of(table.rows.iter().filter(|r| r[1] == 0.0).map(|r| r[4]));
        let mut rep = ExperimentReport::new("prop2", &self.config, Table::default());
        for n in self.config.indices() {
            let pts: Vec<(f64, f64)> = positive
                .iter()
                .filter(|r| r[0] == n as f64)
                .map(|r| (r[1], r[4]))
                .collect();
            rep.fits.insert(format!("t_slope_n{n}"), fit_power_law(&pts)?);
        }
        let top = rep.fits[&format!("t_slope_n{}", self.config.n_max)];
        rep.scalars.insert("ratio_max".into(), max_of(ratios.iter().copied()));
        rep.scalars.insert("ratio_median".into(), median(&ratios));
        rep.criteria = vec![
            Criterion::at_most("zero_at_t0", at_zero, 0.0, "D(n, 0)"),
            Criterion::at_most(
                "ratio_stability",
                spread(&ratios),
                1.5,
                "max / median of D / (t² + 2^{-n/2}) over n and t > 0",
            ),
            Criterion::at_least(
                "t_slope",
                top.slope,
                1.9,
                format!("log D against log t at n = {}", self.config.n_max),
            ),
        ];
        rep.table = table;
        Ok(rep)
    }

    /// Divergence of the two solution families.
    pub fn theorem(&self) -> Result<ExperimentReport> {
        let s = self.params().s;
        let riemann = riemann_constant(self.params().p, &self.families[0].phi)?;
        let plain = self.trajectories(false)?;
        let pert = self.trajectories(true)?;
        let rows = self
            .families
            .par_iter()
            .zip(plain.par_iter().zip(pert))
            .map(|(fam, (tp, tq))| -> Result<Vec<Vec<f64>>> {
                let n = fam.index.n as f64;
                let w0 = self.norm(&fam.w0, s - 1.0)?;
                let v0 = self.norm(&fam.v0, s)?;
                let lead = self.norm(&drift_decomposition(fam)?.leading, s - 1.0)?;
                let init_rho = self.norm(&fam.g_n, s - 1.0)?;
                let init_u = self.norm(&fam.g_n, s)?;
                let mut rows = Vec::new();
                for &t in &self.config.sample_times {
                    let a = tp.state_at(t).expect("sample time is recorded");
                    let b = tq.state_at(t).expect("sample time is recorded");
                    let gap = b.sub(a)?;
                    let dist_rho = self.norm(&gap.rho, s - 1.0)?;
                    let dist_u = self.norm(&gap.u, s)?;
                    // gap = z + t·drift + g_n + (data - solution) of the plain pair
                    let z = b.sub(&fam.pair_pert)?;
                    let z_rho = z.rho.lincomb(1.0, &fam.w0, -t)?;
                    let z_u = z.u.lincomb(1.0, &fam.v0, -t)?;
                    let back = fam.pair_plain.sub(a)?;
                    let pred_rho = fam.w0.lincomb(t, &fam.g_n, 1.0)?.add(&back.rho)?;
                    let pred_u = fam.v0.lincomb(t, &fam.g_n, 1.0)?.add(&back.u)?;
                    let slack_rho = self.norm(&z_rho, s - 1.0)? - (dist_rho - self.norm(&pred_rho, s - 1.0)?).abs();
                    let slack_u = self.norm(&z_u, s)? - (dist_u - self.norm(&pred_u, s)?).abs();
                    rows.push(vec![
                        n,
                        t,
                        dist_rho,
                        dist_u,
                        dist_rho / t,
                        dist_u / t,
                        init_rho,
                        init_u,
                        w0,
                        v0,
                        lead,
                        w0 / riemann,
                        lead / riemann,
                        slack_rho / dist_rho.max(f64::MIN_POSITIVE),
                        slack_u / dist_u.max(f64::MIN_POSITIVE),
                    ]);
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(&[
            "n", "t", "dist_rho", "dist_u", "dist_rho_over_t", "dist_u_over_t", "initial_rho",
            "initial_u", "w0_sm1", "v0_drift_s", "leading_sm1", "w0_over_riemann",
            "leading_over_riemann", "triangle_slack_rho", "triangle_slack_u",
        ]);
        table.rows = rows.into_iter().flatten().collect();
        table.sort_rows();

        let n_top = self.config.n_max as f64;
        let initial: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r[1] == 0.0)
            .map(|r| (r[0], r[2] + r[3]))
            .collect();
        let init_fit = fit_rate(&initial)?;
        let top: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[0] == n_top && r[1] > 0.0).collect();
        let lead_top = table.rows.iter().find(|r| r[0] == n_top).expect("n_max row")[12];
        let slack = min_of(table.rows.iter().flat_map(|r| [r[13], r[14]]));

        let mut rep = ExperimentReport::new("theorem", &self.config, Table::default());
        rep.fits.insert("initial_distance".into(), init_fit);
        rep.scalars.insert("riemann_constant".into(), riemann);
        for t in self.config.positive_times() {
            let large: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[0] >= 6.0 && r[1] == t).collect();
            if !large.is_empty() {
                rep.scalars.insert(
                    format!("inf_dist_rho_over_t_at_{}", ratio_label(t)),
                    min_of(large.iter().map(|r| r[4])),
                );
            }
        }
        for n in self.config.indices().filter(|&n| n >= 6) {
            let series: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[0] == n as f64).collect();
            let mono = |c: usize| series.windows(2).all(|w| w[1][c] >= w[0][c]);
            rep.flags.insert(format!("monotone_rho_n{n}"), mono(2));
            rep.flags.insert(format!("monotone_u_n{n}"), mono(3));
        }
        rep.criteria = vec![
            Criterion::near("initial_distance_slope", init_fit.slope, -0.5, 0.05, "log2 of the initial distance against n"),
            Criterion::at_least(
                "rho_divergence",
                min_of(top.iter().map(|r| r[4])),
                0.5 * riemann,
                format!("min_t ‖ρ̃_n - ρ_n‖_{{B^{{s-1}}}} / t at n = {n_top}, against half the constant"),
            ),
            Criterion::at_least(
                "u_divergence",
                min_of(top.iter().map(|r| r[5])),
                0.5 * riemann,
                format!("min_t ‖v_n - u_n‖_{{B^s}} / t at n = {n_top}, against half the constant"),
            ),
            Criterion::near(
                "leading_term_constant",
                lead_top,
                1.0,
                0.05,
                format!("‖w0 minus remainders‖_{{B^{{s-1}}}} / constant at n = {n_top}"),
            ),
            Criterion::at_least(
                "triangle_inequality",
                slack,
                -1e-10,
                "min over (n, t) of (‖z‖ - |dist - ‖prediction‖|) / dist",
            ),
        ];
        rep.table = table;
        Ok(rep)
    }
}

pub fn run_partition_check(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Harness::new(config)?.partition_check()
}

pub fn run_initial_norms(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Harness::new(config)?.initial_norms()
}

pub fn run_prop1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Harness::new(config)?.prop1()
}

pub fn run_prop2(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Harness::new(config)?.prop2()
}

pub fn run_theorem(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Harness::new(config)?.theorem()
}

/// All experiments in [`EXPERIMENTS`] order, sharing one set of trajectories.
pub fn run_all(config: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    let h = Harness::new(config)?;
    EXPERIMENTS.iter().map(|e| h.run(e)).collect()
}
