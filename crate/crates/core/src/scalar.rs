//! Floating-point scalar abstraction for amplitudes.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::str::FromStr;

/// Numeric tolerances used by the simulator for a given precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of `Σ|a_i|²` from 1.
    pub norm: f64,
    /// Allowed deviation of a round-trip fidelity from 1.
    pub fidelity: f64,
    /// Branch probabilities at or below this are treated as impossible.
    pub zero_branch: f64,
}

/// A real scalar usable as the component type of complex amplitudes.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + FromStr + Send + Sync + 'static
{
    const TOLERANCES: Tolerances;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const TOLERANCES: Tolerances = Tolerances {
        norm: 1e-9,
        fidelity: 1e-10,
        zero_branch: 1e-300,
    };
}

impl Scalar for f32 {
    const TOLERANCES: Tolerances = Tolerances {
        norm: 1e-4,
        fidelity: 1e-4,
        zero_branch: 1e-30,
    };
}
