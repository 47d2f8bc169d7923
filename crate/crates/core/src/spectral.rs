//! Periodic pseudospectral substrate.
//!
//! The real line is replaced by the periodic interval `[-L, L)` sampled at
//! `N` uniform points `x_i = -L + i dx`. Spectral coefficients follow the
//! convention `û(k) = Σ_i u(x_i) e^{-i k x_i} dx`, so that for a function whose
//! periodization is band-limited the coefficient at a lattice wavenumber is the
//! continuous Fourier transform evaluated there. The inverse is
//! `u(x) = (1 / 2L) Σ_k û(k) e^{i k x}`.
//!
//! Spectra are stored in FFT order: index `m < N/2` holds `k = m π / L`, index
//! `m >= N/2` holds `k = (m - N) π / L`. Index `N/2` is the Nyquist mode.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Fraction of `k_max` retained after every nonlinear product.
///
/// Cubic products of fields supported in `|k| <= k_max / 2` alias only onto
/// `|k| > k_max / 2`, so truncating there keeps every retained mode exact.
pub const DEALIAS_FRACTION: f64 = 0.5;

/// Relative spectral energy above the dealiasing cutoff that triggers a
/// bandwidth warning in [`Field::multiply`] and friends.
pub const BANDWIDTH_WARN_LEVEL: f64 = 1e-20;

/// Imaginary residue tolerated by [`Field::apply_multiplier`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Uniform periodic grid with its wavenumber lattice and cached FFT plans.
pub struct Grid {
    n_points: usize,
    half_width: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("half_width", &self.half_width)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.half_width == other.half_width
    }
}

impl Grid {
    pub fn new(n_points: usize, half_width: f64) -> Result<Arc<Grid>> {
        if n_points < 16
            || !n_points.is_power_of_two()
            || !(half_width > 0.0)
            || !half_width.is_finite()
        {
            return Err(Error::InvalidGrid { n_points, half_width });
        }
        let spacing = PI / half_width;
        let wavenumbers = (0..n_points)
            .map(|m| signed_index(m, n_points) as f64 * spacing)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            n_points,
            half_width,
            dx: 2.0 * half_width / n_points as f64,
            wavenumbers,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        }))
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Lattice spacing `π / L` in wavenumber.
    pub fn dk(&self) -> f64 {
        PI / self.half_width
    }

    /// `π N / (2L)`, the magnitude of the Nyquist wavenumber.
    pub fn k_max(&self) -> f64 {
        PI * self.n_points as f64 / (2.0 * self.half_width)
    }

    pub fn dealias_cutoff(&self) -> f64 {
        DEALIAS_FRACTION * self.k_max()
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Spectrum of real samples under the module's transform convention.
    pub fn forward_transform(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (m, c) in buf.iter_mut().enumerate() {
            // e^{-i k x_0} = (-1)^m because x_0 = -L.
            let sign = if m % 2 == 0 { self.dx } else { -self.dx };
            *c *= sign;
        }
        buf
    }

    /// Inverse transform; returns the real samples and the largest imaginary
    /// magnitude that was discarded.
    pub fn inverse_transform(&self, spectrum: &[Complex64]) -> (Vec<f64>, f64) {
        let scale = 1.0 / (self.n_points as f64 * self.dx);
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .enumerate()
            .map(|(m, &c)| if m % 2 == 0 { c * scale } else { -c * scale })
            .collect();
        self.inverse.process(&mut buf);
        let max_imag = buf.iter().fold(0.0_f64, |acc, c| acc.max(c.im.abs()));
        (buf.into_iter().map(|c| c.re).collect(), max_imag)
    }
}

fn signed_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// A real function sampled on a [`Grid`], with a lazily computed spectrum.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field {
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                got: values.len(),
            });
        }
        Ok(Field {
            grid: Arc::clone(grid),
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: Arc::clone(grid),
            values: grid.points().map(f).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field::with_spectrum(
            grid,
            vec![0.0; grid.n_points],
            vec![Complex64::new(0.0, 0.0); grid.n_points],
        )
    }

    /// Builds a field from spectral coefficients (FFT order). The supplied
    /// coefficients are kept as the field's spectrum; the physical samples are
    /// the real part of the inverse transform.
    pub fn from_spectrum(grid: &Arc<Grid>, spectrum: Vec<Complex64>) -> Result<Field> {
        if spectrum.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                got: spectrum.len(),
            });
        }
        let (values, _) = grid.inverse_transform(&spectrum);
        Ok(Field::with_spectrum(grid, values, spectrum))
    }

    fn with_spectrum(grid: &Arc<Grid>, values: Vec<f64>, spectrum: Vec<Complex64>) -> Field {
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Field {
            grid: Arc::clone(grid),
            values,
            spectrum: cell,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| self.grid.forward_transform(&self.values))
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `a * self + b * other`, combining cached spectra when both are present.
    pub fn lincomb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        match (self.spectrum.get(), other.spectrum.get()) {
            (Some(sa), Some(sb)) => {
                let spec = sa.iter().zip(sb).map(|(x, y)| x * a + y * b).collect();
                Ok(Field::with_spectrum(&self.grid, values, spec))
            }
            _ => Field::from_values(&self.grid, values),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Field {
        let values = self.values.iter().map(|v| c * v).collect();
        match self.spectrum.get() {
            Some(s) => Field::with_spectrum(&self.grid, values, s.iter().map(|z| z * c).collect()),
            None => Field {
                grid: Arc::clone(&self.grid),
                values,
                spectrum: OnceLock::new(),
            },
        }
    }

    /// Applies a Fourier multiplier. The symbol must satisfy
    /// `symbol(-k) = conj(symbol(k))`; otherwise the output would be complex and
    /// [`Error::NonHermitianSymbol`] is returned.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> Complex64) -> Result<Field> {
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(c, &k)| c * symbol(k))
            .collect();
        let (values, max_imag) = self.grid.inverse_transform(&spec);
        let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let residue = max_imag / scale.max(f64::MIN_POSITIVE);
        if max_imag > HERMITIAN_TOLERANCE && residue > HERMITIAN_TOLERANCE {
            return Err(Error::NonHermitianSymbol {
                residue,
                tolerance: HERMITIAN_TOLERANCE,
            });
        }
        Ok(Field::with_spectrum(&self.grid, values, spec))
    }

    /// Multiplier with a known real-valued even symbol (`odd == false`) or an
    /// odd symbol `i * s(k)` with real odd `s` (`odd == true`). Odd multipliers
    /// zero the Nyquist mode.
    pub(crate) fn apply_known(&self, odd: bool, symbol: impl Fn(f64) -> f64) -> Field {
        let nyq = self.grid.nyquist_index();
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .zip(self.grid.wavenumbers())
            .enumerate()
            .map(|(m, (c, &k))| {
                if odd {
                    if m == nyq {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * Complex64::new(0.0, symbol(k))
                    }
                } else {
                    c * symbol(k)
                }
            })
            .collect();
        let (values, _) = self.grid.inverse_transform(&spec);
        Field::with_spectrum(&self.grid, values, spec)
    }

    /// Spectral `∂x` (symbol `ik`, Nyquist zeroed).
    pub fn derivative(&self) -> Field {
        self.apply_known(true, |k| k)
    }

    /// `(1 - ∂x²)^{-1}`, symbol `1 / (1 + k²)`.
    pub fn helmholtz_inverse(&self) -> Field {
        self.apply_known(false, |k| 1.0 / (1.0 + k * k))
    }

    /// `∂x (1 - ∂x²)^{-1}`, symbol `ik / (1 + k²)`.
    pub fn helmholtz_dx(&self) -> Field {
        self.apply_known(true, |k| k / (1.0 + k * k))
    }

    /// `(1 - ∂x²)`, symbol `1 + k²`.
    pub fn helmholtz(&self) -> Field {
        self.apply_known(false, |k| 1.0 + k * k)
    }

    /// Zeroes every mode with `|k| > cutoff` (and the Nyquist mode).
    pub fn truncate(&self, cutoff: f64) -> Field {
        let spec = truncated(&self.grid, self.spectrum().to_vec(), cutoff);
        let (values, _) = self.grid.inverse_transform(&spec);
        Field::with_spectrum(&self.grid, values, spec)
    }

    /// Fraction of spectral energy carried by modes with `|k| > cutoff`.
    pub fn bandwidth_excess(&self, cutoff: f64) -> f64 {
        let mut total = 0.0;
        let mut above = 0.0;
        for (c, &k) in self.spectrum().iter().zip(self.grid.wavenumbers()) {
            let e = c.norm_sqr();
            total += e;
            if k.abs() > cutoff {
                above += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            above / total
        }
    }

    /// Largest `|k|` whose coefficient exceeds `rel_tol` times the largest
    /// coefficient magnitude.
    pub fn effective_bandwidth(&self, rel_tol: f64) -> f64 {
        let spec = self.spectrum();
        let peak = spec.iter().fold(0.0_f64, |acc, c| acc.max(c.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        spec.iter()
            .zip(self.grid.wavenumbers())
            .filter(|(c, _)| c.norm() > rel_tol * peak)
            .fold(0.0_f64, |acc, (_, &k)| acc.max(k.abs()))
    }

    /// Dealiased product `self * other`.
    pub fn multiply(&self, other: &Field) -> Result<Field> {
        product(&[self, other])
    }

    /// Dealiased product of three factors, formed pointwise before a single
    /// truncation so that no retained mode is lost to an intermediate cut.
    pub fn triple(&self, b: &Field, c: &Field) -> Result<Field> {
        product(&[self, b, c])
    }

    pub fn cube(&self) -> Field {
        product(&[self, self, self]).expect("factors share a grid")
    }

    /// Rectangle-rule `L^p` norm; `p = f64::INFINITY` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(&self.values, self.grid.dx, p)
    }

    /// Relative `L²` distance `‖self - other‖ / ‖other‖`.
    pub fn relative_l2_distance(&self, other: &Field) -> Result<f64> {
        let diff = self.sub(other)?;
        let d = diff.lp_norm(2.0)?;
        let n = other.lp_norm(2.0)?;
        Ok(d / n.max(f64::MIN_POSITIVE))
    }
}

fn truncated(grid: &Grid, mut spec: Vec<Complex64>, cutoff: f64) -> Vec<Complex64> {
    let nyq = grid.nyquist_index();
    for (m, (c, &k)) in spec.iter_mut().zip(grid.wavenumbers()).enumerate() {
        if m == nyq || k.abs() > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    spec
}

/// Dealiased pointwise product of any number of factors.
pub fn product(factors: &[&Field]) -> Result<Field> {
    let first = factors.first().ok_or(Error::InvalidSolve("empty product".into()))?;
    let grid = &first.grid;
    let cutoff = grid.dealias_cutoff();
    for f in factors {
        first.check_grid(f)?;
        let excess = f.bandwidth_excess(cutoff);
        if excess > BANDWIDTH_WARN_LEVEL {
            log::warn!(
                "product factor carries {excess:e} of its energy above the dealiasing cutoff {cutoff:.3}"
            );
        }
    }
    let mut values = first.values.clone();
    for f in &factors[1..] {
        for (v, w) in values.iter_mut().zip(&f.values) {
            *v *= w;
        }
    }
    let spec = truncated(grid, grid.forward_transform(&values), cutoff);
    let (values, _) = grid.inverse_transform(&spec);
    Ok(Field::with_spectrum(grid, values, spec))
}

/// Rectangle-rule `(Σ |f_i|^p dx)^{1/p}`; the max norm for infinite `p`.
pub fn lp_norm(values: &[f64], dx: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())));
    }
    // Scale by the max to keep large p from under/overflowing.
    let peak = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = if p == 2.0 {
        values.iter().map(|v| (v / peak) * (v / peak)).sum()
    } else if p == 1.0 {
        values.iter().map(|v| (v / peak).abs()).sum()
    } else {
        values.iter().map(|v| (v / peak).abs().powf(p)).sum()
    };
    Ok(peak * (sum * dx).powf(1.0 / p))
}
