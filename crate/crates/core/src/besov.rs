//! Littlewood–Paley blocks and nonhomogeneous Besov norms on the lattice.
//!
//! The low-pass cutoff is `χ(ξ) = 1 - h((|ξ| - 3/4) / (4/3 - 3/4))` with the
//! smooth step `h(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`, and the ring
//! function is `φ(ξ) = χ(ξ/2) - χ(ξ)`. Block `j = -1` applies `χ(D)`, block
//! `j >= 0` applies `φ(2^{-j} D)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{lp_norm, Field, Grid};

/// Relative spectral energy beyond the partition's coverage that makes a
/// Besov norm untrustworthy.
pub const LEAKAGE_LIMIT: f64 = 1e-12;

pub const CHI_INNER: f64 = 3.0 / 4.0;
pub const CHI_OUTER: f64 = 4.0 / 3.0;
pub const RING_OUTER: f64 = 8.0 / 3.0;

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, `C^∞` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Low-pass cutoff χ: 1 on `|ξ| <= 3/4`, 0 on `|ξ| >= 4/3`.
pub fn chi(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Ring function `χ(ξ/2) - χ(ξ)`, supported in `3/4 <= |ξ| <= 8/3` and equal
/// to 1 on `4/3 <= |ξ| <= 3/2`.
pub fn ring(xi: f64) -> f64 {
    chi(xi / 2.0) - chi(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let params = BesovParams { s, p, r };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidBesovParams(format!("s = {} is not finite", self.s)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidBesovParams(format!("p = {} not in [1, ∞)", self.p)));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(Error::InvalidBesovParams(format!("r = {} not in [1, ∞)", self.r)));
        }
        Ok(())
    }

    /// `s > max(1 + 1/p, 3/2)`, the range where the non-uniform dependence
    /// result holds.
    pub fn in_theorem_range(&self) -> bool {
        self.s > (1.0 + 1.0 / self.p).max(1.5)
    }

    pub fn require_theorem_range(&self) -> Result<()> {
        self.validate()?;
        if self.in_theorem_range() {
            Ok(())
        } else {
            Err(Error::InvalidBesovParams(format!(
                "s = {} must exceed max(1 + 1/p, 3/2) = {}",
                self.s,
                (1.0 + 1.0 / self.p).max(1.5)
            )))
        }
    }

    pub fn with_s(&self, s: f64) -> Self {
        BesovParams { s, ..*self }
    }
}

impl Default for BesovParams {
    fn default() -> Self {
        BesovParams { s: 2.0, p: 2.0, r: 2.0 }
    }
}

/// Dyadic cutoffs sampled on a grid's wavenumber lattice.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: Arc<Grid>,
    chi: Vec<f64>,
    rings: Vec<Vec<f64>>,
    j_max: i32,
}

/// Per-block `L^p` norms `‖Δ_j f‖_{L^p}` for `j = -1 ..= j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorms {
    pub p: f64,
    pub norms: Vec<f64>,
}

impl BlockNorms {
    pub fn block(&self, j: i32) -> f64 {
        self.norms[(j + 1) as usize]
    }

    /// `(Σ_j (2^{js} ‖Δ_j f‖_p)^r)^{1/r}`.
    pub fn besov(&self, s: f64, r: f64) -> f64 {
        let terms = self
            .norms
            .iter()
            .enumerate()
            .map(|(i, &n)| 2f64.powf((i as f64 - 1.0) * s) * n);
        lr_sum(terms, r)
    }

    /// Index of the block with the largest norm.
    pub fn dominant_block(&self) -> i32 {
        self.norms
            .iter()
            .enumerate()
            .fold((0usize, -1.0), |acc, (i, &n)| if n > acc.1 { (i, n) } else { acc })
            .0 as i32
            - 1
    }
}

fn lr_sum(terms: impl Iterator<Item = f64> + Clone, r: f64) -> f64 {
    let peak = terms.clone().fold(0.0_f64, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let sum: f64 = terms.map(|t| (t / peak).powf(r)).sum();
    peak * sum.powf(1.0 / r)
}

impl DyadicPartition {
    pub fn new(grid: &Arc<Grid>) -> Result<DyadicPartition> {
        let k_max = grid.k_max();
        let j_max = (k_max / RING_OUTER).log2().floor() as i32;
        if j_max < 2 {
            return Err(Error::PartitionTooCoarse { j_max });
        }
        let ks = grid.wavenumbers();
        let chi_w = ks.iter().map(|&k| chi(k)).collect();
        let rings = (0..=j_max)
            .map(|j| {
                let scale = 2f64.powi(-j);
                ks.iter().map(|&k| ring(k * scale)).collect()
            })
            .collect();
        Ok(DyadicPartition {
            grid: Arc::clone(grid),
            chi: chi_w,
            rings,
            j_max,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Lattice weights of block `j`, or `None` for `j <= -2`.
    pub fn weights(&self, j: i32) -> Result<Option<&[f64]>> {
        if j > self.j_max {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(match j {
            j if j <= -2 => None,
            -1 => Some(&self.chi),
            j => Some(&self.rings[j as usize]),
        })
    }

    /// `|k|` up to which the blocks `-1 ..= j_max` sum to one. The partial
    /// sums telescope to `χ(2^{-(j_max+1)} k)`, which equals 1 there.
    pub fn coverage(&self) -> f64 {
        CHI_INNER * 2f64.powi(self.j_max + 1)
    }

    /// Fraction of spectral energy beyond [`DyadicPartition::coverage`].
    pub fn leakage(&self, f: &Field) -> f64 {
        f.bandwidth_excess(self.coverage())
    }

    /// `Δ_j f`.
    pub fn block(&self, f: &Field, j: i32) -> Result<Field> {
        match self.weights(j)? {
            None => Ok(Field::zeros(f.grid())),
            Some(w) => {
                let spec: Vec<Complex64> = f.spectrum().iter().zip(w).map(|(c, &a)| c * a).collect();
                Field::from_spectrum(f.grid(), spec)
            }
        }
    }

    /// `Σ_{j=-1}^{j_max} Δ_j f`.
    pub fn reconstruct(&self, f: &Field) -> Result<Field> {
        let mut acc = Field::zeros(f.grid());
        for j in -1..=self.j_max {
            acc = acc.add(&self.block(f, j)?)?;
        }
        Ok(acc)
    }

    /// `‖Δ_j f‖_{L^p}` for every block; blocks whose weighted spectrum is
    /// identically zero are reported as exactly 0.
    pub fn block_norms(&self, f: &Field, p: f64) -> Result<BlockNorms> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let leak = self.leakage(f);
        if leak > LEAKAGE_LIMIT {
            log::warn!(
                "field has {leak:e} of its energy beyond the partition coverage {:.2}",
                self.coverage()
            );
        }
        let spec = f.spectrum();
        let grid = f.grid();
        let mut norms = Vec::with_capacity(self.j_max as usize + 2);
        for j in -1..=self.j_max {
            let w = self.weights(j)?.expect("j >= -1");
            let weighted: Vec<Complex64> = spec.iter().zip(w).map(|(c, &a)| c * a).collect();
            if weighted.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                norms.push(0.0);
                continue;
            }
            let (values, _) = grid.inverse_transform(&weighted);
            norms.push(lp_norm(&values, grid.dx(), p)?);
        }
        Ok(BlockNorms { p, norms })
    }

    pub fn besov_norm(&self, f: &Field, params: &BesovParams) -> Result<f64> {
        params.validate()?;
        Ok(self.block_norms(f, params.p)?.besov(params.s, params.r))
    }

    /// `sqrt(‖ρ‖²_{B^{s-1}} + ‖u‖²_{B^s})`.
    pub fn pair_norm(&self, rho: &Field, u: &Field, params: &BesovParams) -> Result<f64> {
        if !rho.same_grid(u) {
            return Err(Error::GridMismatch);
        }
        let a = self.besov_norm(rho, &params.with_s(params.s - 1.0))?;
        let b = self.besov_norm(u, params)?;
        Ok(a.hypot(b))
    }
}

/// Empirical constants of the two product estimates over a corpus.
#[derive(Debug, Clone, Serialize)]
pub struct ProductEstimateReport {
    /// `‖uv‖_{B^s} / (‖u‖_∞ ‖v‖_{B^s} + ‖v‖_∞ ‖u‖_{B^s})` per pair.
    pub algebra_ratios: Vec<f64>,
    /// `‖uv‖_{B^{s-2}} / (‖u‖_{B^{s-2}} ‖v‖_{B^{s-1}})` per pair.
    pub low_index_ratios: Vec<f64>,
    pub algebra_max: f64,
    pub low_index_max: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

pub fn verify_product_estimates(
    partition: &DyadicPartition,
    corpus: &[(Field, Field)],
    params: &BesovParams,
) -> Result<ProductEstimateReport> {
    let low = params.with_s(params.s - 2.0);
    let mid = params.with_s(params.s - 1.0);
    let mut algebra_ratios = Vec::with_capacity(corpus.len());
    let mut low_index_ratios = Vec::with_capacity(corpus.len());
    for (u, v) in corpus {
        let uv = u.multiply(v)?;
        let uv_blocks = partition.block_norms(&uv, params.p)?;
        let u_blocks = partition.block_norms(u, params.p)?;
        let v_blocks = partition.block_norms(v, params.p)?;
        let rhs = u.max_abs() * v_blocks.besov(params.s, params.r)
            + v.max_abs() * u_blocks.besov(params.s, params.r);
        algebra_ratios.push(ratio(uv_blocks.besov(params.s, params.r), rhs));
        let rhs = u_blocks.besov(low.s, low.r) * v_blocks.besov(mid.s, mid.r);
        low_index_ratios.push(ratio(uv_blocks.besov(low.s, low.r), rhs));
    }
    let algebra_max = algebra_ratios.iter().copied().fold(0.0, f64::max);
    let low_index_max = low_index_ratios.iter().copied().fold(0.0, f64::max);
    Ok(ProductEstimateReport {
        algebra_ratios,
        low_index_ratios,
        algebra_max,
        low_index_max,
    })
}
