//! Right-hand side of the two-component Novikov system in nonlocal form
//!
//! ```text
//! ρ_t = u² ρ_x + ρ u u_x
//! u_t = u² u_x + P1(u) + P2(u) + P3(u) + R1(u, ρ) + R2(u, ρ)
//! ```
//!
//! with `P1 = ∂x(1-∂x²)^{-1}(u³)`, `P2 = (3/2) ∂x(1-∂x²)^{-1}(u u_x²)`,
//! `P3 = (1/2)(1-∂x²)^{-1}(u_x³)`, `R1 = -(1/2) ∂x(1-∂x²)^{-1}(u ρ²)` and
//! `R2 = -(1/2)(1-∂x²)^{-1}(u_x ρ²)`. Every nonlocal operator is applied as a
//! Fourier multiplier and every cubic term as one dealiased triple product.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::Field;

/// The unknowns `(ρ, u)`.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub rho: Field,
    pub u: Field,
}

impl StatePair {
    pub fn new(rho: Field, u: Field) -> Result<StatePair> {
        if !rho.same_grid(&u) {
            return Err(Error::GridMismatch);
        }
        Ok(StatePair { rho, u })
    }

    pub fn zeros(grid: &std::sync::Arc<crate::spectral::Grid>) -> StatePair {
        StatePair {
            rho: Field::zeros(grid),
            u: Field::zeros(grid),
        }
    }

    /// `self + dt * d`.
    pub fn advance(&self, d: &StateDerivative, dt: f64) -> Result<StatePair> {
        Ok(StatePair {
            rho: self.rho.lincomb(1.0, &d.rho_dot, dt)?,
            u: self.u.lincomb(1.0, &d.u_dot, dt)?,
        })
    }

    pub fn scale(&self, c: f64) -> StatePair {
        StatePair {
            rho: self.rho.scale(c),
            u: self.u.scale(c),
        }
    }

    pub fn sub(&self, other: &StatePair) -> Result<StatePair> {
        Ok(StatePair {
            rho: self.rho.sub(&other.rho)?,
            u: self.u.sub(&other.u)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.u.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub rho_dot: Field,
    pub u_dot: Field,
}

impl StateDerivative {
    pub fn lincomb(&self, a: f64, other: &StateDerivative, b: f64) -> Result<StateDerivative> {
        Ok(StateDerivative {
            rho_dot: self.rho_dot.lincomb(a, &other.rho_dot, b)?,
            u_dot: self.u_dot.lincomb(a, &other.u_dot, b)?,
        })
    }
}

pub fn p1(u: &Field) -> Field {
    u.cube().helmholtz_dx()
}

pub fn p2(u: &Field) -> Result<Field> {
    p2_with(u, &u.derivative())
}

pub fn p3(u: &Field) -> Result<Field> {
    p3_with(&u.derivative())
}

pub fn r1(u: &Field, rho: &Field) -> Result<Field> {
    Ok(u.triple(rho, rho)?.helmholtz_dx().scale(-0.5))
}

pub fn r2(u: &Field, rho: &Field) -> Result<Field> {
    r2_with(&u.derivative(), rho)
}

fn p2_with(u: &Field, u_x: &Field) -> Result<Field> {
    Ok(u.triple(u_x, u_x)?.helmholtz_dx().scale(1.5))
}

fn p3_with(u_x: &Field) -> Result<Field> {
    Ok(u_x.cube().helmholtz_inverse().scale(0.5))
}

fn r2_with(u_x: &Field, rho: &Field) -> Result<Field> {
    Ok(u_x.triple(rho, rho)?.helmholtz_inverse().scale(-0.5))
}

/// Every term of the right-hand side, evaluated separately.
#[derive(Debug, Clone)]
pub struct RhsTerms {
    /// `u² ρ_x`
    pub rho_advection: Field,
    /// `ρ u u_x`
    pub rho_stretch: Field,
    /// `u² u_x`
    pub u_advection: Field,
    pub p1: Field,
    pub p2: Field,
    pub p3: Field,
    pub r1: Field,
    pub r2: Field,
}

impl RhsTerms {
    pub fn evaluate(state: &StatePair) -> Result<RhsTerms> {
        let StatePair { rho, u } = state;
        if !rho.same_grid(u) {
            return Err(Error::GridMismatch);
        }
        let u_x = u.derivative();
        let rho_x = rho.derivative();
        Ok(RhsTerms {
            rho_advection: u.triple(u, &rho_x)?,
            rho_stretch: rho.triple(u, &u_x)?,
            u_advection: u.triple(u, &u_x)?,
            p1: p1(u),
            p2: p2_with(u, &u_x)?,
            p3: p3_with(&u_x)?,
            r1: r1(u, rho)?,
            r2: r2_with(&u_x, rho)?,
        })
    }

    /// Terms of the `u` equation in summation order.
    pub fn u_terms(&self) -> [&Field; 6] {
        [&self.u_advection, &self.p1, &self.p2, &self.p3, &self.r1, &self.r2]
    }

    pub fn sum(&self) -> Result<StateDerivative> {
        let rho_dot = self.rho_advection.add(&self.rho_stretch)?;
        let mut u_dot = self.u_advection.clone();
        for t in &self.u_terms()[1..] {
            u_dot = u_dot.add(t)?;
        }
        Ok(StateDerivative { rho_dot, u_dot })
    }
}

pub fn rhs(state: &StatePair) -> Result<StateDerivative> {
    RhsTerms::evaluate(state)?.sum()
}

/// `m = u - u_xx`.
pub fn momentum(u: &Field) -> Field {
    u.helmholtz()
}

/// Relative residuals of the momentum formulation evaluated on a state and
/// its nonlocal-form time derivative.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MformResidual {
    /// `‖m_t - (3 u_x u m + u² m_x - ρ (uρ)_x)‖₂ / (‖m_t‖₂ + 1e-30)`
    pub momentum: f64,
    /// `‖ρ_t - ((u² ρ)_x - ρ u u_x)‖₂ / (‖ρ_t‖₂ + 1e-30)`
    pub density: f64,
}

impl MformResidual {
    pub fn max(&self) -> f64 {
        self.momentum.max(self.density)
    }
}

pub fn mform_residual(state: &StatePair, state_dot: &StateDerivative) -> Result<MformResidual> {
    let StatePair { rho, u } = state;
    let u_x = u.derivative();
    let rho_x = rho.derivative();
    let m = momentum(u);
    let m_x = m.derivative();
    let m_t = momentum(&state_dot.u_dot);

    // ρ (uρ)_x = u_x ρ² + u ρ ρ_x
    let coupling = u_x.triple(rho, rho)?.add(&u.triple(rho, &rho_x)?)?;
    let predicted = u_x
        .triple(u, &m)?
        .lincomb(3.0, &u.triple(u, &m_x)?, 1.0)?
        .sub(&coupling)?;
    let momentum_res = m_t.sub(&predicted)?.lp_norm(2.0)? / (m_t.lp_norm(2.0)? + 1e-30);

    // u² ρ_x + ρ u u_x = (u² ρ)_x - ρ u u_x
    let conservative = u.triple(u, rho)?.derivative().sub(&rho.triple(u, &u_x)?)?;
    let rho_t = &state_dot.rho_dot;
    let density_res = rho_t.sub(&conservative)?.lp_norm(2.0)? / (rho_t.lp_norm(2.0)? + 1e-30);

    Ok(MformResidual {
        momentum: momentum_res,
        density: density_res,
    })
}

/// Max pointwise deviation of each nonlocal term from its trigonometric
/// closed form for single-mode inputs on `[-π, π)` with `n_points` samples.
pub fn closed_form_errors(n_points: usize) -> Result<Vec<(&'static str, f64)>> {
    let g = crate::spectral::Grid::new(n_points, std::f64::consts::PI)?;
    let c = Field::from_fn(&g, f64::cos);
    let one = Field::from_fn(&g, |_| 1.0);
    let dev = |f: &Field, exact: &dyn Fn(f64) -> f64| {
        g.points()
            .zip(f.values())
            .map(|(x, v)| (v - exact(x)).abs())
            .fold(0.0, f64::max)
    };
    let s1 = f64::sin;
    let s3 = |x: f64| (3.0 * x).sin();
    Ok(vec![
        ("p1", dev(&p1(&c), &|x| -0.375 * s1(x) - 0.075 * s3(x))),
        ("p2", dev(&p2(&c)?, &|x| -3.0 / 16.0 * s1(x) + 9.0 / 80.0 * s3(x))),
        ("p3", dev(&p3(&c)?, &|x| -3.0 / 16.0 * s1(x) + 1.0 / 80.0 * s3(x))),
        ("r1", dev(&r1(&c, &c)?, &|x| 3.0 / 16.0 * s1(x) + 3.0 / 80.0 * s3(x))),
        ("r2", dev(&r2(&c, &one)?, &|x| 0.25 * s1(x))),
    ])
}
