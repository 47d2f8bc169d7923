//! Data families behind the non-uniform dependence construction.
//!
//! The profile φ is fixed through its Fourier transform `φ̂`, an even bump
//! equal to 1 on `|k| <= 1/4` and vanishing for `|k| >= 1/2`. With the carrier
//! `K_n = (17/12) 2^n`,
//!
//! ```text
//! f_n = 2^{-ns} φ(x) sin(K_n x),   g_n = 2^{-n/2} φ(x),
//! (ρ_{0,n}, u_{0,n}) = (2^n f_n, f_n),
//! (ρ̃_{0,n}, v_{0,n}) = (2^n f_n + g_n, f_n + g_n).
//! ```
//!
//! All fields are built from their spectra on the lattice. `K_n` is in general
//! not a lattice wavenumber, so `f_n` is assembled as the modulated transform
//! `2^{-ns} (φ̂(k - K_n) - φ̂(k + K_n)) / 2i`; the result is the periodization of
//! the line function and its spectrum sits exactly in `||k| - K_n| <= 1/2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::besov::smooth_step;
use crate::error::{Error, Result};
use crate::rhs::StatePair;
use crate::spectral::{lp_norm, Field, Grid};

pub const CARRIER_RATIO: f64 = 17.0 / 12.0;
pub const PROFILE_FLAT: f64 = 0.25;
pub const PROFILE_SUPPORT: f64 = 0.5;

/// `φ̂(k)`.
pub fn profile_hat(k: f64) -> f64 {
    1.0 - smooth_step((k.abs() - PROFILE_FLAT) / (PROFILE_SUPPORT - PROFILE_FLAT))
}

/// `(17/12) 2^n`.
pub fn carrier(n: u32) -> f64 {
    CARRIER_RATIO * 2f64.powi(n as i32)
}

/// Frequency index `n` with target smoothness `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleIndex {
    pub n: u32,
    pub s: f64,
}

impl CounterexampleIndex {
    pub fn new(n: u32, s: f64, grid: &Grid) -> Result<Self> {
        let idx = CounterexampleIndex { n, s };
        idx.validate(grid)?;
        Ok(idx)
    }

    /// `n >= 3` and `K_n + 1/2 <= k_max / 3`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidIndex {
                n: self.n,
                reason: "n >= 3 is needed for single-block localization".into(),
            });
        }
        let top = carrier(self.n) + PROFILE_SUPPORT;
        if top > grid.k_max() / 3.0 {
            return Err(Error::InvalidIndex {
                n: self.n,
                reason: format!(
                    "carrier band edge {top:.2} exceeds k_max / 3 = {:.2}",
                    grid.k_max() / 3.0
                ),
            });
        }
        Ok(())
    }
}

fn spectral_field(grid: &Arc<Grid>, hat: impl Fn(f64) -> Complex64) -> Result<Field> {
    let spec = grid.wavenumbers().iter().map(|&k| hat(k)).collect();
    Field::from_spectrum(grid, spec)
}

/// φ from `φ̂` sampled on the lattice.
pub fn build_profile(grid: &Arc<Grid>) -> Result<Field> {
    let points = grid
        .wavenumbers()
        .iter()
        .filter(|k| k.abs() <= PROFILE_SUPPORT)
        .count();
    if points < 8 {
        return Err(Error::ProfileUnderResolved { points });
    }
    spectral_field(grid, |k| Complex64::new(profile_hat(k), 0.0))
}

/// `max_{|x| > 0.9L} |φ(x)|`.
pub fn profile_tail(phi: &Field) -> f64 {
    let edge = 0.9 * phi.grid().half_width();
    phi.grid()
        .points()
        .zip(phi.values())
        .filter(|(x, _)| x.abs() > edge)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}

/// `amplitude · φ(x) · sin(K x)` assembled spectrally.
pub fn modulated_profile(grid: &Arc<Grid>, amplitude: f64, frequency: f64) -> Result<Field> {
    spectral_field(grid, |k| {
        let d = profile_hat(k - frequency) - profile_hat(k + frequency);
        Complex64::new(0.0, -0.5 * amplitude * d)
    })
}

pub fn build_f_n(grid: &Arc<Grid>, n: u32, s: f64) -> Result<Field> {
    CounterexampleIndex::new(n, s, grid)?;
    modulated_profile(grid, 2f64.powf(-(n as f64) * s), carrier(n))
}

pub fn build_g_n(grid: &Arc<Grid>, n: u32) -> Result<Field> {
    let amp = 2f64.powf(-(n as f64) / 2.0);
    build_profile(grid).map(|phi| phi.scale(amp))
}

/// One member of the data family together with its drift fields.
#[derive(Debug, Clone)]
pub struct DataFamily {
    pub index: CounterexampleIndex,
    pub phi: Field,
    pub f_n: Field,
    pub g_n: Field,
    /// `(2^n f_n, f_n)`
    pub pair_plain: StatePair,
    /// `(2^n f_n + g_n, f_n + g_n)`
    pub pair_pert: StatePair,
    /// `w0 = v_{0,n}² ∂x ρ̃_{0,n}`
    pub w0: Field,
    /// `v0 = v_{0,n}² ∂x v_{0,n}`
    pub v0: Field,
}

pub fn build_pairs(grid: &Arc<Grid>, n: u32, s: f64) -> Result<DataFamily> {
    let index = CounterexampleIndex::new(n, s, grid)?;
    let phi = build_profile(grid)?;
    let f_n = build_f_n(grid, n, s)?;
    let g_n = phi.scale(2f64.powf(-(n as f64) / 2.0));
    let scale_up = 2f64.powi(n as i32);
    let rho_plain = f_n.scale(scale_up);
    let rho_pert = f_n.lincomb(scale_up, &g_n, 1.0)?;
    let v = f_n.add(&g_n)?;
    let w0 = v.triple(&v, &rho_pert.derivative())?;
    let v0 = v.triple(&v, &v.derivative())?;
    Ok(DataFamily {
        index,
        phi,
        pair_plain: StatePair::new(rho_plain, f_n.clone())?,
        pair_pert: StatePair::new(rho_pert, v)?,
        f_n,
        g_n,
        w0,
        v0,
    })
}

/// `w0` split into its leading term and three remainders:
/// `w0 = g_n² ∂x(2^n f_n) + f_n² ∂x(2^n f_n) + 2 f_n g_n ∂x(2^n f_n) + v_{0,n}² ∂x g_n`.
#[derive(Debug, Clone)]
pub struct DriftDecomposition {
    pub leading: Field,
    pub high_cubic: Field,
    pub mixed: Field,
    pub low_gradient: Field,
}

impl DriftDecomposition {
    pub fn remainders(&self) -> [&Field; 3] {
        [&self.high_cubic, &self.mixed, &self.low_gradient]
    }
}

pub fn drift_decomposition(family: &DataFamily) -> Result<DriftDecomposition> {
    let n = family.index.n;
    let grad = family.f_n.scale(2f64.powi(n as i32)).derivative();
    let f = &family.f_n;
    let g = &family.g_n;
    Ok(DriftDecomposition {
        leading: g.triple(g, &grad)?,
        high_cubic: f.triple(f, &grad)?,
        mixed: f.triple(g, &grad)?.scale(2.0),
        low_gradient: family
            .pair_pert
            .u
            .triple(&family.pair_pert.u, &g.derivative())?,
    })
}

/// `(1/2π ∫_0^{2π} |cos x|^p dx)^{1/p}` by the midpoint rule.
pub fn cosine_mean(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    // |cos|^p has period π; 2^20 midpoints put the error far below 1e-12.
    let m = 1usize << 20;
    let h = PI / m as f64;
    let sum: f64 = (0..m).map(|i| ((i as f64 + 0.5) * h).cos().abs().powf(p)).sum();
    Ok((sum / m as f64).powf(1.0 / p))
}

/// `(17/12) (1/2π ∫|cos|^p)^{1/p} ‖φ³‖_{L^p}`, the limit of
/// `‖g_n² ∂x(2^n f_n)‖_{B^{s-1}_{p,r}}` as `n → ∞`.
pub fn riemann_constant(p: f64, phi: &Field) -> Result<f64> {
    let cube = phi.cube();
    Ok(CARRIER_RATIO * cosine_mean(p)? * lp_norm(cube.values(), phi.grid().dx(), p)?)
}
