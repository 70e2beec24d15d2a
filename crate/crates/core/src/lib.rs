//! Quantum secret authentication codes on a dense state-vector simulator.
//!
//! A message register is authenticated by attaching key-derived BB84 check
//! qubits and scrambling both through a keyed CNOT network. The receiver
//! undoes the network and measures the check qubits; any deviation reveals
//! tampering. The crate also provides attack channels, closed-form and
//! Monte-Carlo detection statistics, and a one-way direct-communication
//! protocol built on top.
//!
//! Amplitude types are generic over [`Scalar`] (`f64` or `f32`); closed-form
//! probabilities are generic over [`analysis::Probability`] and can be
//! evaluated exactly with [`num_rational::BigRational`].
//!
//! ```
//! use qsac::codec::{encode, exact_pass_probability, verify};
//! use qsac::{BasisSymbol, Key, Pauli, State};
//! use rand::SeedableRng;
//!
//! let key = Key::from_hex("515341432d544553542d4b4559")?;
//! let message = State::prepare_product(&[BasisSymbol::PLUS, BasisSymbol::ONE])?;
//! let mut codeword = encode(&message, &key, 6)?;
//!
//! codeword.state_mut().apply_pauli(Pauli::X, 3)?;
//! let p = exact_pass_probability(&codeword, &key)?;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let outcome = verify(&codeword, &key, &mut rng)?;
//! assert!(p < 1.0 || outcome.authenticated);
//! # Ok::<(), qsac::Error>(())
//! ```

pub mod adversary;
pub mod analysis;
pub mod codec;
mod error;
pub mod keysched;
pub mod qcore;
pub mod qsdc;
mod scalar;

pub use adversary::{AttackKind, AttackSpec, Positions, TamperedCodeword};
pub use analysis::{DetectionFormulas, DetectionStats};
pub use codec::{QsacCodeword, QsacParams, Schedule, VerificationOutcome};
pub use error::{Error, Result};
pub use keysched::{CheckString, Key, SubKeys, TransformString};
pub use qcore::{Basis, BasisSymbol, MeasurementRecord, Pauli, QubitCap, StateVector};
pub use scalar::{Scalar, Tolerances};

pub use num_complex::Complex;
pub use num_rational::BigRational;

/// Double-precision register.
pub type State = StateVector<f64>;
/// Single-precision register.
pub type State32 = StateVector<f32>;
pub type Codeword = QsacCodeword<f64>;
pub type Codeword32 = QsacCodeword<f32>;
pub type Verification = VerificationOutcome<f64>;
pub type Formulas = DetectionFormulas<f64>;
/// Closed forms in exact rational arithmetic.
pub type ExactFormulas = DetectionFormulas<BigRational>;
