//! Dense state-vector engine.
//!
//! Qubits are addressed 1-based. Qubit 1 is the leftmost symbol of a ket
//! string and the most significant bit of the amplitude index, so on an
//! `N`-qubit register qubit `q` owns the index bit `1 << (N - q)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// One of the four BB84 states: 0 → |0>, 1 → |1>, 2 → |+>, 3 → |−>.
///
/// A symbol doubles as a (basis, expected outcome) pair: symbols 0 and 1 are
/// Z-basis eigenstates with outcomes 0 and 1, symbols 2 and 3 are X-basis
/// eigenstates with outcomes 0 (|+>) and 1 (|−>).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisSymbol(u8);

impl BasisSymbol {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);
    pub const PLUS: Self = Self(2);
    pub const MINUS: Self = Self(3);
    pub const ALL: [Self; 4] = [Self::ZERO, Self::ONE, Self::PLUS, Self::MINUS];

    pub fn new(value: u8) -> Result<Self> {
        if value < 4 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidSymbol(value))
        }
    }

    pub fn from_parts(basis: Basis, outcome: u8) -> Self {
        let base = match basis {
            Basis::Z => 0,
            Basis::X => 2,
        };
        Self(base | (outcome & 1))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn basis(self) -> Basis {
        if self.0 < 2 {
            Basis::Z
        } else {
            Basis::X
        }
    }

    pub fn outcome(self) -> u8 {
        self.0 & 1
    }

    /// The ket as `(⟨0|s⟩, ⟨1|s⟩)`.
    pub fn ket<T: Scalar>(self) -> [Complex<T>; 2] {
        let h = T::FRAC_1_SQRT_2();
        let (a, b) = match self.0 {
            0 => (T::one(), T::zero()),
            1 => (T::zero(), T::one()),
            2 => (h, h),
            _ => (h, -h),
        };
        [Complex::new(a, T::zero()), Complex::new(b, T::zero())]
    }

    /// Ket-string character: `0`, `1`, `+` or `-`.
    pub fn as_char(self) -> char {
        ['0', '1', '+', '-'][self.0 as usize]
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Self::ZERO),
            '1' => Some(Self::ONE),
            '+' => Some(Self::PLUS),
            '-' => Some(Self::MINUS),
            _ => None,
        }
    }
}

impl fmt::Display for BasisSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of measuring one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// 1-based index within the measured register.
    pub qubit: usize,
    pub basis: Basis,
    /// Z: 0/1 for |0>/|1>. X: 0/1 for |+>/|−>.
    pub outcome: u8,
}

impl MeasurementRecord {
    pub fn symbol(&self) -> BasisSymbol {
        BasisSymbol::from_parts(self.basis, self.outcome)
    }
}

/// Upper bound on register width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitCap(usize);

impl QubitCap {
    pub const DEFAULT: QubitCap = QubitCap(20);
    /// No cap may be configured above this.
    pub const CEILING: usize = 24;

    pub fn new(cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::EmptyRegister);
        }
        if cap > Self::CEILING {
            return Err(Error::CapAboveCeiling(cap));
        }
        Ok(Self(cap))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, num_qubits: usize) -> Result<()> {
        if num_qubits == 0 {
            Err(Error::EmptyRegister)
        } else if num_qubits > self.0 {
            Err(Error::TooManyQubits {
                requested: num_qubits,
                cap: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for QubitCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Normalized amplitude vector over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Scalar = f64> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> StateVector<T> {
    /// `|0…0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        QubitCap::DEFAULT.check(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = vec![Complex::zero(); dim];
        amps[index] = Complex::one();
        Ok(Self { num_qubits, amps })
    }

    /// Wraps raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        Self::from_amplitudes_capped(amps, QubitCap::DEFAULT)
    }

    pub fn from_amplitudes_capped(amps: Vec<Complex<T>>, cap: QubitCap) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        cap.check(num_qubits)?;
        let state = Self { num_qubits, amps };
        let norm = state.norm_sqr().as_f64();
        if (norm - 1.0).abs() > T::TOLERANCES.norm {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Tensor product of single-qubit BB84 states, first symbol on qubit 1.
    pub fn prepare_product(symbols: &[BasisSymbol]) -> Result<Self> {
        Self::prepare_product_capped(symbols, QubitCap::DEFAULT)
    }

    pub fn prepare_product_capped(symbols: &[BasisSymbol], cap: QubitCap) -> Result<Self> {
        cap.check(symbols.len())?;
        let mut amps = vec![Complex::<T>::one()];
        for s in symbols {
            let [k0, k1] = s.ket::<T>();
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(*a * k0);
                next.push(*a * k1);
            }
            amps = next;
        }
        Ok(Self {
            num_qubits: symbols.len(),
            amps,
        })
    }

    /// Uniformly random direction in amplitude space (not Haar, but full support).
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        QubitCap::DEFAULT.check(num_qubits)?;
        let dim = 1usize << num_qubits;
        loop {
            let amps: Vec<Complex<T>> = (0..dim)
                .map(|_| {
                    Complex::new(
                        T::from_f64_lossy(rng.gen_range(-1.0..1.0)),
                        T::from_f64_lossy(rng.gen_range(-1.0..1.0)),
                    )
                })
                .collect();
            let norm: T = amps
                .iter()
                .map(|a| a.norm_sqr())
                .fold(T::zero(), |x, y| x + y);
            if norm > T::from_f64_lossy(1e-6) {
                let scale = norm.sqrt().recip();
                let amps = amps.into_iter().map(|a| a * scale).collect();
                return Ok(Self { num_qubits, amps });
            }
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y)
    }

    /// `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        QubitCap::DEFAULT.check(num_qubits)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        Ok(Self { num_qubits, amps })
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit == 0 || qubit > self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1usize << (self.num_qubits - qubit))
    }

    /// Errors unless `qubit` addresses this register.
    pub fn check_qubit(&self, qubit: usize) -> Result<()> {
        self.mask(qubit).map(|_| ())
    }

    /// Controlled-NOT. `control == target` is the identity.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        let cmask = self.mask(control)?;
        let tmask = self.mask(target)?;
        if control == target {
            return Ok(());
        }
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, pauli: Pauli, qubit: usize) -> Result<()> {
        let mask = self.mask(qubit)?;
        let i_unit = Complex::<T>::i();
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            match pauli {
                Pauli::X => self.amps.swap(i, j),
                Pauli::Z => self.amps[j] = -self.amps[j],
                Pauli::Y => {
                    let (a0, a1) = (self.amps[i], self.amps[j]);
                    self.amps[i] = -i_unit * a1;
                    self.amps[j] = i_unit * a0;
                }
            }
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        let mask = self.mask(qubit)?;
        let h = T::FRAC_1_SQRT_2();
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = (a0 + a1) * h;
                self.amps[j] = (a0 - a1) * h;
            }
        }
        Ok(())
    }

    /// Applies the (unnormalized) projector onto `expected` at `mask`.
    fn project_mask(amps: &mut [Complex<T>], mask: usize, expected: BasisSymbol) {
        let half = T::from_f64_lossy(0.5);
        for i in 0..amps.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            match (expected.basis(), expected.outcome()) {
                (Basis::Z, 0) => amps[j] = Complex::zero(),
                (Basis::Z, _) => amps[i] = Complex::zero(),
                (Basis::X, outcome) => {
                    let (a0, a1) = (amps[i], amps[j]);
                    if outcome == 0 {
                        let c = (a0 + a1) * half;
                        amps[i] = c;
                        amps[j] = c;
                    } else {
                        let c = (a0 - a1) * half;
                        amps[i] = c;
                        amps[j] = -c;
                    }
                }
            }
        }
    }

    /// `⟨ψ|P|ψ⟩` for the product projector onto every listed qubit's expected
    /// BB84 state. Does not modify the state.
    pub fn projection_probability(&self, targets: &[(usize, BasisSymbol)]) -> Result<T> {
        let mut masks = Vec::with_capacity(targets.len());
        for (k, &(qubit, _)) in targets.iter().enumerate() {
            if targets[..k].iter().any(|&(q, _)| q == qubit) {
                return Err(Error::DuplicateQubit(qubit));
            }
            masks.push(self.mask(qubit)?);
        }
        if targets.is_empty() {
            return Ok(self.norm_sqr());
        }
        let mut amps = self.amps.clone();
        for (&(_, expected), &mask) in targets.iter().zip(&masks) {
            Self::project_mask(&mut amps, mask, expected);
        }
        let p = amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y);
        Ok(p.min(T::one()).max(T::zero()))
    }

    /// Probability that measuring `qubit` in `basis` yields `outcome`.
    pub fn outcome_probability(&self, qubit: usize, basis: Basis, outcome: u8) -> Result<T> {
        self.projection_probability(&[(qubit, BasisSymbol::from_parts(basis, outcome))])
    }

    /// Projectively measures one qubit, collapsing and renormalizing the state.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        let mask = self.mask(qubit)?;
        let p0 = self.outcome_probability(qubit, basis, 0)?.as_f64();
        let u: f64 = rng.gen();
        let outcome = if u < p0 { 0 } else { 1 };
        self.collapse_mask(mask, BasisSymbol::from_parts(basis, outcome))?;
        Ok(MeasurementRecord {
            qubit,
            basis,
            outcome,
        })
    }

    /// Forces `qubit` onto `expected` and renormalizes.
    pub fn collapse(&mut self, qubit: usize, expected: BasisSymbol) -> Result<()> {
        let mask = self.mask(qubit)?;
        self.collapse_mask(mask, expected)
    }

    fn collapse_mask(&mut self, mask: usize, expected: BasisSymbol) -> Result<()> {
        let mut amps = self.amps.clone();
        Self::project_mask(&mut amps, mask, expected);
        let p = amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y);
        if p.as_f64() <= T::TOLERANCES.zero_branch {
            return Err(Error::ZeroProbabilityBranch);
        }
        let scale = p.sqrt().recip();
        for a in &mut amps {
            *a *= scale;
        }
        self.amps = amps;
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * *b)
            .fold(Complex::zero(), |x, y| x + y))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        let f = self.inner(other)?.norm_sqr();
        Ok(f.min(T::one()))
    }

    /// Contracts the leading qubits against `prefix`, returning the
    /// renormalized state of the remaining qubits.
    ///
    /// Exact when `self` is a product `|prefix> ⊗ |rest>`, which holds after
    /// every leading qubit has been measured.
    pub fn contract_prefix(&self, prefix: &Self) -> Result<Self> {
        if prefix.num_qubits >= self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits - 1,
                found: prefix.num_qubits,
            });
        }
        let rest_qubits = self.num_qubits - prefix.num_qubits;
        let rest_dim = 1usize << rest_qubits;
        let mut amps = vec![Complex::<T>::zero(); rest_dim];
        for (c, pc) in prefix.amps.iter().enumerate() {
            if pc.is_zero() {
                continue;
            }
            let w = pc.conj();
            let block = &self.amps[c * rest_dim..(c + 1) * rest_dim];
            for (dst, src) in amps.iter_mut().zip(block) {
                *dst += w * *src;
            }
        }
        let norm = amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y);
        if norm.as_f64() <= T::TOLERANCES.zero_branch {
            return Err(Error::ZeroProbabilityBranch);
        }
        let scale = norm.sqrt().recip();
        for a in &mut amps {
            *a *= scale;
        }
        Ok(Self {
            num_qubits: rest_qubits,
            amps,
        })
    }

    /// Index of the computational basis state if the register is one.
    pub fn basis_index(&self) -> Option<usize> {
        let threshold = 1.0 - T::TOLERANCES.norm;
        self.amps
            .iter()
            .position(|a| a.norm_sqr().as_f64() >= threshold)
    }

    /// Text dump: one line per nonzero amplitude, `bits real imag`, bits
    /// written qubit 1 first. Floats use shortest round-trip formatting.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            out.push_str(&format!(
                "{:0width$b} {} {}\n",
                i,
                fmt_scalar(a.re),
                fmt_scalar(a.im),
                width = self.num_qubits
            ));
        }
        out
    }

    /// Inverse of [`StateVector::dump`]. `first_line` is only used for error positions.
    pub fn parse_dump(num_qubits: usize, text: &str, first_line: usize) -> Result<Self> {
        QubitCap::DEFAULT.check(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut amps = vec![Complex::<T>::zero(); dim];
        let mut seen = vec![false; dim];
        for (k, line) in text.lines().enumerate() {
            let line_no = first_line + k;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let bits = fields[0];
            if bits.len() != num_qubits || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(err(format!("bad index bits {bits:?}")));
            }
            let index = usize::from_str_radix(bits, 2).map_err(|e| err(e.to_string()))?;
            if seen[index] {
                return Err(err(format!("duplicate index {bits}")));
            }
            seen[index] = true;
            let re: T = fields[1]
                .parse()
                .map_err(|_| err(format!("bad real part {:?}", fields[1])))?;
            let im: T = fields[2]
                .parse()
                .map_err(|_| err(format!("bad imaginary part {:?}", fields[2])))?;
            amps[index] = Complex::new(re, im);
        }
        Self::from_amplitudes(amps)
    }
}

fn fmt_scalar<T: Scalar>(x: T) -> String {
    if x.is_zero() {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

impl<T: Scalar> fmt::Display for StateVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
