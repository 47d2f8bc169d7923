//! Spectral toolkit for a two-component Novikov-type system on a periodic
//! interval: Fourier pseudo-spectral operators, Littlewood–Paley blocks and
//! Besov norms, the nonlocal right-hand side, an RK4 integrator, the
//! high/low-frequency data family and the numerical experiments built on it.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod counterexamples;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod integrator;
pub mod rhs;
pub mod snapshot;
pub mod spectral;

pub use besov::{BesovParams, BlockNorms, DyadicPartition};
pub use counterexamples::{build_pairs, riemann_constant, CounterexampleIndex, DataFamily};
pub use error::{Error, Result};
pub use experiments::{Criterion, ExperimentConfig, ExperimentReport, Table};
pub use fit::{fit_rate, RateFit};
pub use integrator::{solve, SolverConfig, Trajectory};
pub use rhs::{rhs, StateDerivative, StatePair};
pub use spectral::{Field, Grid};
