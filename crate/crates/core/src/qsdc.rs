//! One-way secure direct communication over an authenticated codeword.
//!
//! Each pair of classical bits is written onto an EPR pair `|φ+>` by a Pauli
//! on its first qubit. Both halves of every pair go into the message
//! register and travel inside a single codeword. The receiver verifies, and
//! only on success Bell-measures the pairs.

use crate::adversary::{apply_attack, AttackSpec};
use crate::codec::{
    encode_with_schedule, verify_with_schedule, QsacCodeword, QsacParams, Schedule,
};
use crate::error::{Error, Result};
use crate::keysched::Key;
use crate::qcore::{Basis, Pauli, StateVector};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Dense-coding operator: `I ↔ 00`, `X ↔ 01`, `Z ↔ 10`, `iY ↔ 11`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliCode {
    I,
    X,
    Z,
    IY,
}

impl PauliCode {
    pub fn from_bits(high: bool, low: bool) -> Self {
        match (high, low) {
            (false, false) => PauliCode::I,
            (false, true) => PauliCode::X,
            (true, false) => PauliCode::Z,
            (true, true) => PauliCode::IY,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliCode::I => (false, false),
            PauliCode::X => (false, true),
            PauliCode::Z => (true, false),
            PauliCode::IY => (true, true),
        }
    }

    /// `iY = ZX`, applied as X then Z.
    pub fn apply<T: Scalar>(self, state: &mut StateVector<T>, qubit: usize) -> Result<()> {
        match self {
            PauliCode::I => state.check_qubit(qubit),
            PauliCode::X => state.apply_pauli(Pauli::X, qubit),
            PauliCode::Z => state.apply_pauli(Pauli::Z, qubit),
            PauliCode::IY => {
                state.apply_pauli(Pauli::X, qubit)?;
                state.apply_pauli(Pauli::Z, qubit)
            }
        }
    }
}

/// Even-length classical bit string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QsdcMessage(Vec<bool>);

impl QsdcMessage {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidMessage("empty bit string".into()));
        }
        if !bits.len().is_multiple_of(2) {
            return Err(Error::InvalidMessage(format!(
                "odd bit count {}",
                bits.len()
            )));
        }
        Ok(Self(bits))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidMessage(format!("bad bit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Number of EPR pairs `k`; the message register has `2k` qubits.
    pub fn pairs(&self) -> usize {
        self.0.len() / 2
    }

    pub fn codes(&self) -> impl Iterator<Item = PauliCode> + '_ {
        self.0.chunks(2).map(|c| PauliCode::from_bits(c[0], c[1]))
    }
}

impl fmt::Display for QsdcMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0
            .iter()
            .try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

/// EPR pairs carrying `message`; pair `p` occupies qubits `2p-1, 2p`.
pub fn prepare_message_register<T: Scalar>(message: &QsdcMessage) -> Result<StateVector<T>> {
    let mut state = StateVector::zero(2 * message.pairs())?;
    for (p, code) in message.codes().enumerate() {
        let first = 2 * p + 1;
        state.apply_hadamard(first)?;
        state.apply_cnot(first, first + 1)?;
        code.apply(&mut state, first)?;
    }
    Ok(state)
}

/// Bell-measures every pair: CNOT within the pair, H on the first qubit,
/// then Z on both. The first outcome is the phase bit, the second the parity bit.
pub fn bell_decode<T: Scalar, R: Rng + ?Sized>(
    register: &StateVector<T>,
    rng: &mut R,
) -> Result<QsdcMessage> {
    if !register.num_qubits().is_multiple_of(2) {
        return Err(Error::InvalidMessage(format!(
            "odd message register width {}",
            register.num_qubits()
        )));
    }
    let mut state = register.clone();
    let mut bits = Vec::with_capacity(register.num_qubits());
    for p in 0..register.num_qubits() / 2 {
        let first = 2 * p + 1;
        state.apply_cnot(first, first + 1)?;
        state.apply_hadamard(first)?;
        let a = state.measure(first, Basis::Z, rng)?.outcome;
        let b = state.measure(first + 1, Basis::Z, rng)?.outcome;
        bits.push(a == 1);
        bits.push(b == 1);
    }
    QsdcMessage::new(bits)
}

pub fn qsdc_send<T: Scalar>(message: &QsdcMessage, key: &Key, n: usize) -> Result<QsacCodeword<T>> {
    let params = QsacParams::new(n, 2 * message.pairs())?;
    let register = prepare_message_register(message)?;
    encode_with_schedule(&register, &Schedule::derive(key, params)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reception {
    pub authenticated: bool,
    /// Absent whenever verification failed.
    pub bits: Option<QsdcMessage>,
}

pub fn qsdc_receive<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    key: &Key,
    rng: &mut R,
) -> Result<Reception> {
    if !codeword.params().m.is_multiple_of(2) {
        return Err(Error::InvalidMessage(format!(
            "odd message register width {}",
            codeword.params().m
        )));
    }
    let schedule = Schedule::derive(key, codeword.params())?;
    let outcome = verify_with_schedule(codeword, &schedule, rng)?;
    if !outcome.authenticated {
        return Ok(Reception {
            authenticated: false,
            bits: None,
        });
    }
    Ok(Reception {
        authenticated: true,
        bits: Some(bell_decode(&outcome.message_state, rng)?),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sender,
    Channel,
    Receiver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    PrepareEpr,
    PauliEncode,
    QsacEncode,
    /// The single quantum transmission of the codeword.
    Transmit,
    Tamper,
    Verify,
    BellMeasure,
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    pub n: usize,
    pub m: usize,
    pub qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub role: Role,
    pub action: Action,
    pub sizes: Sizes,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript(Vec<TranscriptRecord>);

impl Transcript {
    pub fn records(&self) -> &[TranscriptRecord] {
        &self.0
    }

    fn push(&mut self, role: Role, action: Action, params: QsacParams, seed: u64) {
        self.0.push(TranscriptRecord {
            role,
            action,
            sizes: Sizes {
                n: params.n,
                m: params.m,
                qubits: params.total(),
            },
            seed,
        });
    }

    pub fn count(&self, action: Action) -> usize {
        self.0.iter().filter(|r| r.action == action).count()
    }

    /// JSON lines, one record per step.
    pub fn to_jsonl(&self) -> String {
        self.0
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain struct serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionResult {
    pub sent: QsdcMessage,
    pub reception: Reception,
    pub transcript: Transcript,
}

/// One complete session: send, optional channel attack, receive. All
/// randomness comes from a generator seeded with `seed`.
pub fn run_session<T: Scalar>(
    message: &QsdcMessage,
    key: &Key,
    n: usize,
    attack: Option<&AttackSpec>,
    seed: u64,
) -> Result<SessionResult> {
    let params = QsacParams::new(n, 2 * message.pairs())?;
    let schedule = Schedule::derive(key, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transcript = Transcript::default();

    let register = prepare_message_register::<T>(message)?;
    transcript.push(Role::Sender, Action::PrepareEpr, params, seed);
    transcript.push(Role::Sender, Action::PauliEncode, params, seed);
    let codeword = encode_with_schedule(&register, &schedule)?;
    transcript.push(Role::Sender, Action::QsacEncode, params, seed);
    transcript.push(Role::Sender, Action::Transmit, params, seed);

    let delivered = match attack {
        Some(spec) => {
            let t = apply_attack(&codeword, &register, key, &schedule, spec, &mut rng)?;
            transcript.push(Role::Channel, Action::Tamper, params, seed);
            t.codeword
        }
        None => codeword,
    };

    let reception = qsdc_receive(&delivered, key, &mut rng)?;
    transcript.push(Role::Receiver, Action::Verify, params, seed);
    let last = if reception.authenticated {
        Action::BellMeasure
    } else {
        Action::Abort
    };
    transcript.push(Role::Receiver, last, params, seed);
    Ok(SessionResult {
        sent: message.clone(),
        reception,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn h() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn assert_amps(state: &StateVector<f64>, expected: [f64; 4]) {
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((*a - Complex::new(e, 0.0)).norm() < 1e-12, "{state}");
        }
    }

    #[test]
    fn pair_states() {
        let s = prepare_message_register::<f64>(&QsdcMessage::parse("00").unwrap()).unwrap();
        assert_amps(&s, [h(), 0.0, 0.0, h()]);
        let s = prepare_message_register::<f64>(&QsdcMessage::parse("01").unwrap()).unwrap();
        assert_amps(&s, [0.0, h(), h(), 0.0]);
        let s = prepare_message_register::<f64>(&QsdcMessage::parse("10").unwrap()).unwrap();
        assert_amps(&s, [h(), 0.0, 0.0, -h()]);
        // (iσ_y ⊗ I)|φ+> = (|01> − |10>)/√2
        let s = prepare_message_register::<f64>(&QsdcMessage::parse("11").unwrap()).unwrap();
        assert_amps(&s, [0.0, h(), -h(), 0.0]);
    }

    #[test]
    fn message_validation() {
        assert!(QsdcMessage::parse("101").is_err());
        assert!(QsdcMessage::parse("").is_err());
        assert!(QsdcMessage::parse("1a").is_err());
        assert_eq!(QsdcMessage::parse("1001").unwrap().to_string(), "1001");
    }

    #[test]
    fn code_bijection() {
        for code in [PauliCode::I, PauliCode::X, PauliCode::Z, PauliCode::IY] {
            let (a, b) = code.bits();
            assert_eq!(PauliCode::from_bits(a, b), code);
        }
    }

    #[test]
    fn bell_decoding_is_deterministic() {
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(987);
        for text in ["00", "01", "10", "11", "0110"] {
            let msg = QsdcMessage::parse(text).unwrap();
            let reg = prepare_message_register::<f64>(&msg).unwrap();
            assert_eq!(bell_decode(&reg, &mut r1).unwrap(), msg);
            assert_eq!(bell_decode(&reg, &mut r2).unwrap(), msg);
        }
    }

    #[test]
    fn honest_session() {
        let key = Key::from_hex("5eed").unwrap();
        let msg = QsdcMessage::parse("1001").unwrap();
        let s = run_session::<f64>(&msg, &key, 4, None, 3).unwrap();
        assert!(s.reception.authenticated);
        assert_eq!(s.reception.bits.as_ref(), Some(&msg));
        assert_eq!(s.transcript.count(Action::Transmit), 1);
        let back = Transcript::from_jsonl(&s.transcript.to_jsonl()).unwrap();
        assert_eq!(back, s.transcript);
    }

    #[test]
    fn failed_verification_emits_no_bits() {
        let key = Key::from_hex("5eed").unwrap();
        let msg = QsdcMessage::parse("11").unwrap();
        let spec = AttackSpec::check_substitution(1);
        let mut aborted = 0;
        for seed in 0..200 {
            let s = run_session::<f64>(&msg, &key, 6, Some(&spec), seed).unwrap();
            if !s.reception.authenticated {
                aborted += 1;
                assert!(s.reception.bits.is_none());
                assert_eq!(s.transcript.count(Action::Abort), 1);
                assert_eq!(s.transcript.count(Action::BellMeasure), 0);
            }
        }
        assert!(aborted > 0);
    }
}
