//! Explicit RK4 time stepping of the nonlocal system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, RateFit};
use crate::rhs::{mform_residual, rhs, StatePair};
use crate::spectral::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// CFL safety factor in `(0, 1]`.
    pub safety: f64,
    pub dt_max: f64,
    /// Largest horizon `solve` accepts.
    pub horizon_cap: f64,
    /// Relative boundary tail that aborts a solve; `None` only records it.
    pub tail_limit: Option<f64>,
    /// Evaluate the momentum-form residual after every step.
    pub track_residual: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            safety: 0.5,
            dt_max: 0.01,
            horizon_cap: 0.5,
            tail_limit: None,
            track_residual: true,
        }
    }
}

const CFL_EPS: f64 = 1e-12;

/// `safety / (max|u|² k_max + ε)`, capped at `dt_max`.
pub fn cfl_dt(state: &StatePair, grid: &Grid, safety: f64, dt_max: f64) -> f64 {
    let umax = state.u.max_abs();
    (safety / (umax * umax * grid.k_max() + CFL_EPS)).min(dt_max)
}

/// One classical four-stage Runge–Kutta step of size `dt` (negative `dt`
/// steps backwards). A non-finite result is reported as
/// [`Error::BlowUp`] with `time` set to `dt`.
pub fn step_rk4(state: &StatePair, dt: f64) -> Result<StatePair> {
    let k1 = rhs(state)?;
    let k2 = rhs(&state.advance(&k1, 0.5 * dt)?)?;
    let k3 = rhs(&state.advance(&k2, 0.5 * dt)?)?;
    let k4 = rhs(&state.advance(&k3, dt)?)?;
    let incr = k1
        .lincomb(1.0, &k2, 2.0)?
        .lincomb(1.0, &k3, 2.0)?
        .lincomb(1.0, &k4, 1.0)?;
    let next = state.advance(&incr, dt / 6.0)?;
    if !next.is_finite() {
        return Err(Error::BlowUp { time: dt });
    }
    Ok(next)
}

/// `n_steps` equal RK4 steps over `[0, horizon]`.
pub fn integrate_fixed(initial: &StatePair, horizon: f64, n_steps: usize) -> Result<StatePair> {
    let dt = horizon / n_steps as f64;
    let mut state = initial.clone();
    for i in 0..n_steps {
        state = step_rk4(&state, dt).map_err(|e| match e {
            Error::BlowUp { .. } => Error::BlowUp { time: (i + 1) as f64 * dt },
            e => e,
        })?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepDiagnostic {
    pub time: f64,
    pub dt: f64,
    /// `max_{|x| > 0.9L}` of each component relative to its maximum.
    pub tail: f64,
    /// Momentum-form residual of the new state, if tracked.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StatePair>,
    pub diagnostics: Vec<StepDiagnostic>,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> Option<&StatePair> {
        self.times.iter().position(|&s| s == t).map(|i| &self.states[i])
    }

    pub fn max_tail(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.tail).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.diagnostics
            .iter()
            .filter_map(|d| d.residual)
            .fold(0.0, f64::max)
    }

    pub fn steps(&self) -> usize {
        self.diagnostics.len()
    }
}

/// Relative magnitude of a state near the ends of the periodic box.
pub fn boundary_tail(state: &StatePair) -> f64 {
    let grid = state.u.grid();
    let edge = 0.9 * grid.half_width();
    [&state.rho, &state.u]
        .iter()
        .map(|f| {
            let peak = f.max_abs();
            if peak == 0.0 {
                return 0.0;
            }
            grid.points()
                .zip(f.values())
                .filter(|(x, _)| x.abs() > edge)
                .map(|(_, v)| v.abs())
                .fold(0.0, f64::max)
                / peak
        })
        .fold(0.0, f64::max)
}

/// Integrates to `horizon`, recording snapshots at `t = 0`, each sample time
/// and `horizon`. Steps follow [`cfl_dt`]; the step before a sample time is
/// shortened so the snapshot is an actual solution state.
pub fn solve(
    initial: &StatePair,
    horizon: f64,
    sample_times: &[f64],
    config: &SolverConfig,
) -> Result<Trajectory> {
    if !(horizon >= 0.0) || horizon > config.horizon_cap {
        return Err(Error::InvalidSolve(format!(
            "horizon {horizon} outside [0, {}]",
            config.horizon_cap
        )));
    }
    if !(config.safety > 0.0 && config.safety <= 1.0) || !(config.dt_max > 0.0) {
        return Err(Error::InvalidSolve(format!(
            "safety {} must lie in (0, 1] and dt_max {} must be positive",
            config.safety, config.dt_max
        )));
    }
    if let Some(&t) = sample_times.iter().find(|&&t| !(0.0..=horizon).contains(&t)) {
        return Err(Error::InvalidSolve(format!("sample time {t} outside [0, {horizon}]")));
    }
    let mut targets: Vec<f64> = sample_times.iter().copied().filter(|&t| t > 0.0).collect();
    if horizon > 0.0 {
        targets.push(horizon);
    }
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let grid = std::sync::Arc::clone(initial.u.grid());
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![initial.clone()],
        diagnostics: Vec::new(),
    };
    let mut state = initial.clone();
    let mut t = 0.0;
    for target in targets {
        while t < target {
            let mut dt = cfl_dt(&state, &grid, config.safety, config.dt_max);
            let landing = t + dt >= target - 1e-12 * target.max(1.0);
            if landing {
                dt = target - t;
            }
            state = step_rk4(&state, dt).map_err(|e| match e {
                Error::BlowUp { .. } => Error::BlowUp { time: t + dt },
                e => e,
            })?;
            t = if landing { target } else { t + dt };
            let tail = boundary_tail(&state);
            if let Some(limit) = config.tail_limit {
                if tail > limit {
                    return Err(Error::TailBreach { tail, limit, time: t });
                }
            }
            let residual = if config.track_residual {
                Some(mform_residual(&state, &rhs(&state)?)?.max())
            } else {
                None
            };
            traj.diagnostics.push(StepDiagnostic { time: t, dt, tail, residual });
        }
        traj.times.push(target);
        traj.states.push(state.clone());
    }
    Ok(traj)
}

/// Global error of fixed-step RK4 against a reference run with a quarter of
/// the smallest step.
#[derive(Debug, Clone, Serialize)]
pub struct OrderStudy {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub fit: RateFit,
}

/// Runs the state to `horizon` with each `horizon / steps` and measures the
/// relative L² error of `(ρ, u)` against a run with `4 * max(steps)` steps.
pub fn time_refinement_study(initial: &StatePair, horizon: f64, steps: &[usize]) -> Result<OrderStudy> {
    let finest = steps.iter().copied().max().unwrap_or(1) * 4;
    let reference = integrate_fixed(initial, horizon, finest)?;
    let ref_norm = reference.rho.lp_norm(2.0)?.hypot(reference.u.lp_norm(2.0)?);
    let mut dts = Vec::new();
    let mut errors = Vec::new();
    for &n in steps {
        let s = integrate_fixed(initial, horizon, n)?;
        let d = s.sub(&reference)?;
        let err = d.rho.lp_norm(2.0)?.hypot(d.u.lp_norm(2.0)?) / ref_norm;
        dts.push(horizon / n as f64);
        errors.push(err);
    }
    let pts: Vec<(f64, f64)> = dts.iter().copied().zip(errors.iter().copied()).collect();
    let fit = fit_power_law(&pts)?;
    Ok(OrderStudy { dts, errors, fit })
}
