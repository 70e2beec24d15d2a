//! Keyed encoding of a message register into an authenticated codeword, and
//! the matching decode / verification.
//!
//! Layout: check qubits occupy positions `1..=n`, message qubits
//! `n+1..=n+m`. Encoding applies `CNOT(i, S_T[i])` for ascending `i`;
//! decoding applies the same gates for descending `i`, which is the exact
//! inverse since every CNOT is self-inverse.

use crate::error::{Error, Result};
use crate::keysched::{
    derive_check_string, derive_subkeys, derive_transform_string, CheckString, Key, TransformString,
};
use crate::qcore::{BasisSymbol, MeasurementRecord, QubitCap, StateVector};
use crate::scalar::Scalar;
use rand::Rng;

/// Check-qubit count `n` (the security parameter) and message-qubit count `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QsacParams {
    pub n: usize,
    pub m: usize,
}

impl QsacParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, QubitCap::DEFAULT)
    }

    pub fn with_cap(n: usize, m: usize, cap: QubitCap) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if m < 1 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        cap.check(n + m)?;
        Ok(Self { n, m })
    }

    pub fn total(&self) -> usize {
        self.n + self.m
    }
}

/// The two key-derived strings for one codeword size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    check: CheckString,
    transform: TransformString,
    params: QsacParams,
}

impl Schedule {
    pub fn new(check: CheckString, transform: TransformString) -> Result<Self> {
        let n = check.len();
        if transform.len() <= n {
            return Err(Error::InvalidParams(format!(
                "transform string of length {} leaves no message qubits after {n} checks",
                transform.len()
            )));
        }
        let params = QsacParams::new(n, transform.len() - n)?;
        Ok(Self {
            check,
            transform,
            params,
        })
    }

    pub fn derive(key: &Key, params: QsacParams) -> Result<Self> {
        let sub = derive_subkeys(key);
        let check = derive_check_string(&sub, params.n)?;
        let transform = derive_transform_string(&sub, params.n, params.m)?;
        Self::new(check, transform)
    }

    pub fn check(&self) -> &CheckString {
        &self.check
    }

    pub fn transform(&self) -> &TransformString {
        &self.transform
    }

    pub fn params(&self) -> QsacParams {
        self.params
    }

    /// The prepared check register `|C>`.
    pub fn check_state<T: Scalar>(&self) -> Result<StateVector<T>> {
        StateVector::prepare_product(self.check.symbols())
    }

    /// `(qubit, expected state)` for every check qubit.
    pub fn check_targets(&self) -> Vec<(usize, BasisSymbol)> {
        self.check
            .symbols()
            .iter()
            .enumerate()
            .map(|(i, &s)| (i + 1, s))
            .collect()
    }
}

/// Applies the CNOT network in encoding order.
pub fn apply_encoding_network<T: Scalar>(
    state: &mut StateVector<T>,
    transform: &TransformString,
) -> Result<()> {
    check_width(state.num_qubits(), transform.len())?;
    transform
        .encode_schedule()
        .try_for_each(|(c, t)| state.apply_cnot(c, t))
}

/// Applies the CNOT network in decoding (reverse) order.
pub fn apply_decoding_network<T: Scalar>(
    state: &mut StateVector<T>,
    transform: &TransformString,
) -> Result<()> {
    check_width(state.num_qubits(), transform.len())?;
    transform
        .decode_schedule()
        .try_for_each(|(c, t)| state.apply_cnot(c, t))
}

fn check_width(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// An `(n+m)`-qubit codeword.
#[derive(Clone, Debug, PartialEq)]
pub struct QsacCodeword<T: Scalar = f64> {
    params: QsacParams,
    state: StateVector<T>,
}

impl<T: Scalar> QsacCodeword<T> {
    pub fn new(params: QsacParams, state: StateVector<T>) -> Result<Self> {
        check_width(state.num_qubits(), params.total())?;
        Ok(Self { params, state })
    }

    pub fn params(&self) -> QsacParams {
        self.params
    }

    pub fn state(&self) -> &StateVector<T> {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut StateVector<T> {
        &mut self.state
    }

    pub fn into_state(self) -> StateVector<T> {
        self.state
    }

    /// Text form: a `n <n> m <m>` header line followed by the amplitude dump.
    pub fn to_text(&self) -> String {
        format!(
            "n {} m {}\n{}",
            self.params.n,
            self.params.m,
            self.state.dump()
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .skip_while(|(_, l)| l.trim().is_empty());
        let (idx, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Parse {
            line: idx + 1,
            msg: format!("expected header `n <int> m <int>`, found {header:?}"),
        };
        if fields.len() != 4 || fields[0] != "n" || fields[2] != "m" {
            return Err(bad_header());
        }
        let n: usize = fields[1].parse().map_err(|_| bad_header())?;
        let m: usize = fields[3].parse().map_err(|_| bad_header())?;
        let params = QsacParams::new(n, m)?;
        let body: Vec<&str> = lines.map(|(_, l)| l).collect();
        let state = StateVector::parse_dump(params.total(), &body.join("\n"), idx + 2)?;
        Self::new(params, state)
    }
}

/// What the receiver learns from verifying a codeword.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationOutcome<T: Scalar = f64> {
    pub authenticated: bool,
    /// 1-based check positions whose outcome differed from the expected one.
    pub mismatched_check_indices: Vec<usize>,
    /// One record per check qubit, in measurement order.
    pub records: Vec<MeasurementRecord>,
    /// Post-measurement message register.
    pub message_state: StateVector<T>,
}

pub fn encode<T: Scalar>(message: &StateVector<T>, key: &Key, n: usize) -> Result<QsacCodeword<T>> {
    let params = QsacParams::new(n, message.num_qubits())?;
    encode_with_schedule(message, &Schedule::derive(key, params)?)
}

pub fn encode_with_schedule<T: Scalar>(
    message: &StateVector<T>,
    schedule: &Schedule,
) -> Result<QsacCodeword<T>> {
    let params = schedule.params();
    check_width(message.num_qubits(), params.m)?;
    let mut state = schedule.check_state::<T>()?.tensor(message)?;
    apply_encoding_network(&mut state, schedule.transform())?;
    QsacCodeword::new(params, state)
}

pub fn decode<T: Scalar>(codeword: &QsacCodeword<T>, key: &Key) -> Result<StateVector<T>> {
    decode_with_schedule(codeword, &Schedule::derive(key, codeword.params())?)
}

pub fn decode_with_schedule<T: Scalar>(
    codeword: &QsacCodeword<T>,
    schedule: &Schedule,
) -> Result<StateVector<T>> {
    if codeword.params() != schedule.params() {
        return Err(Error::DimensionMismatch {
            expected: schedule.params().total(),
            found: codeword.params().total(),
        });
    }
    let mut state = codeword.state().clone();
    apply_decoding_network(&mut state, schedule.transform())?;
    Ok(state)
}

pub fn verify<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    key: &Key,
    rng: &mut R,
) -> Result<VerificationOutcome<T>> {
    verify_with_schedule(codeword, &Schedule::derive(key, codeword.params())?, rng)
}

/// Decodes, then measures check qubits `1..=n` in order, each in the basis of
/// its check symbol.
pub fn verify_with_schedule<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    schedule: &Schedule,
    rng: &mut R,
) -> Result<VerificationOutcome<T>> {
    let mut state = decode_with_schedule(codeword, schedule)?;
    let mut records = Vec::with_capacity(schedule.params().n);
    let mut mismatched = Vec::new();
    for (qubit, expected) in schedule.check_targets() {
        let record = state.measure(qubit, expected.basis(), rng)?;
        if record.outcome != expected.outcome() {
            mismatched.push(qubit);
        }
        records.push(record);
    }
    let observed: Vec<BasisSymbol> = records.iter().map(MeasurementRecord::symbol).collect();
    let message_state = state.contract_prefix(&StateVector::prepare_product(&observed)?)?;
    Ok(VerificationOutcome {
        authenticated: mismatched.is_empty(),
        mismatched_check_indices: mismatched,
        records,
        message_state,
    })
}

/// Sampling-free acceptance probability of `codeword` under `key`.
pub fn exact_pass_probability<T: Scalar>(codeword: &QsacCodeword<T>, key: &Key) -> Result<T> {
    exact_pass_probability_with_schedule(codeword, &Schedule::derive(key, codeword.params())?)
}

pub fn exact_pass_probability_with_schedule<T: Scalar>(
    codeword: &QsacCodeword<T>,
    schedule: &Schedule,
) -> Result<T> {
    let decoded = decode_with_schedule(codeword, schedule)?;
    decoded.projection_probability(&schedule.check_targets())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Basis, Pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn key(s: &str) -> Key {
        Key::from_bytes(s.as_bytes().to_vec()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(QsacParams::new(0, 1).is_err());
        assert!(QsacParams::new(1, 0).is_err());
        assert!(matches!(
            QsacParams::new(15, 6),
            Err(Error::TooManyQubits { .. })
        ));
        assert_eq!(QsacParams::new(3, 1).unwrap().total(), 4);
    }

    #[test]
    fn identity_network_leaves_product_state() {
        let check = CheckString::parse("0123").unwrap();
        let sched = Schedule::new(check, TransformString::identity(6).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let msg = StateVector::<f64>::random(2, &mut rng).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        let expected = sched.check_state::<f64>().unwrap().tensor(&msg).unwrap();
        assert_eq!(cw.state(), &expected);
    }

    #[test]
    fn honest_round_trip_authenticates() {
        let k = key("round-trip");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let msg = StateVector::<f64>::random(3, &mut rng).unwrap();
        let cw = encode(&msg, &k, 5).unwrap();
        assert!((cw.state().norm_sqr() - 1.0).abs() < 1e-9);
        assert!((exact_pass_probability(&cw, &k).unwrap() - 1.0).abs() < 1e-9);
        let out = verify(&cw, &k, &mut rng).unwrap();
        assert!(out.authenticated);
        assert!(out.mismatched_check_indices.is_empty());
        assert_eq!(out.records.len(), 5);
        assert!((out.message_state.fidelity(&msg).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_check_replacement_always_detected() {
        // After decoding, check qubit 2 carries |1> instead of the expected |0>.
        let sched = Schedule::new(
            CheckString::parse("201").unwrap(),
            TransformString::new(vec![4, 1, 2, 3]).unwrap(),
        )
        .unwrap();
        let msg = StateVector::<f64>::zero(1).unwrap();
        let mut decoded =
            StateVector::prepare_product(CheckString::parse("211").unwrap().symbols())
                .unwrap()
                .tensor(&msg)
                .unwrap();
        apply_encoding_network(&mut decoded, sched.transform()).unwrap();
        let cw = QsacCodeword::new(sched.params(), decoded).unwrap();
        assert_eq!(
            exact_pass_probability_with_schedule(&cw, &sched).unwrap(),
            0.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let out = verify_with_schedule(&cw, &sched, &mut rng).unwrap();
            assert!(out.mismatched_check_indices.contains(&2));
            assert!(!out.authenticated);
        }
    }

    #[test]
    fn cross_basis_replacement_passes_half_the_time() {
        let sched = Schedule::new(
            CheckString::parse("0").unwrap(),
            TransformString::new(vec![2, 1]).unwrap(),
        )
        .unwrap();
        let mut st =
            StateVector::<f64>::prepare_product(&[BasisSymbol::PLUS, BasisSymbol::ONE]).unwrap();
        apply_encoding_network(&mut st, sched.transform()).unwrap();
        let cw = QsacCodeword::new(sched.params(), st).unwrap();
        let exact = exact_pass_probability_with_schedule(&cw, &sched).unwrap();
        assert!((exact - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 10_000;
        let passes = (0..trials)
            .filter(|_| {
                verify_with_schedule(&cw, &sched, &mut rng)
                    .unwrap()
                    .authenticated
            })
            .count();
        let rate = passes as f64 / trials as f64;
        assert!((rate - 0.5).abs() <= 0.02, "{rate}");
    }

    #[test]
    fn x_flip_on_z_check_through_identity_network() {
        let sched = Schedule::new(
            CheckString::parse("01").unwrap(),
            TransformString::identity(3).unwrap(),
        )
        .unwrap();
        let msg = StateVector::<f64>::zero(1).unwrap();
        let mut cw = encode_with_schedule(&msg, &sched).unwrap();
        cw.state_mut().apply_pauli(Pauli::X, 2).unwrap();
        assert_eq!(
            exact_pass_probability_with_schedule(&cw, &sched).unwrap(),
            0.0
        );
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let k = key("k");
        let msg = StateVector::<f64>::zero(2).unwrap();
        let cw = encode(&msg, &k, 3).unwrap();
        let sched = Schedule::derive(&k, QsacParams::new(2, 3).unwrap()).unwrap();
        assert!(matches!(
            decode_with_schedule(&cw, &sched),
            Err(Error::DimensionMismatch { .. })
        ));
        let other = Schedule::derive(&k, QsacParams::new(3, 1).unwrap()).unwrap();
        assert!(encode_with_schedule(&msg, &other).is_err());
        assert!(encode(&msg, &k, 19).is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let k = key("text");
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let msg = StateVector::<f64>::random(2, &mut rng).unwrap();
        let cw = encode(&msg, &k, 2).unwrap();
        let text = cw.to_text();
        assert_eq!(QsacCodeword::<f64>::from_text(&text).unwrap(), cw);

        assert!(matches!(
            QsacCodeword::<f64>::from_text(""),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            QsacCodeword::<f64>::from_text("n 2 x 2\n"),
            Err(Error::Parse { .. })
        ));
        let truncated: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(QsacCodeword::<f64>::from_text(&truncated).is_err());
    }

    #[test]
    fn verify_measures_in_check_basis() {
        let sched = Schedule::new(
            CheckString::parse("0213").unwrap(),
            TransformString::new(vec![3, 5, 1, 2, 4]).unwrap(),
        )
        .unwrap();
        let msg = StateVector::<f64>::zero(1).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = verify_with_schedule(&cw, &sched, &mut rng).unwrap();
        let bases: Vec<Basis> = out.records.iter().map(|r| r.basis).collect();
        assert_eq!(bases, [Basis::Z, Basis::X, Basis::Z, Basis::X]);
        let qubits: Vec<usize> = out.records.iter().map(|r| r.qubit).collect();
        assert_eq!(qubits, [1, 2, 3, 4]);
    }
}
