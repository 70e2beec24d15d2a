//! Attack channels applied to a codeword in transit.
//!
//! `CheckSubstitution` is the idealized model behind the ε = (1/3)^j
//! estimate: it acts on the *decoded* check register, swapping `j` check
//! states for one of the other three BB84 states, and re-encodes. It needs
//! the key and is an analysis oracle rather than a physical attack. The
//! other three channels only touch the transmitted qubits.

use crate::codec::{
    encode_with_schedule, verify, QsacCodeword, QsacParams, Schedule, VerificationOutcome,
};
use crate::error::{Error, Result};
use crate::keysched::{CheckString, Key};
use crate::qcore::{Basis, BasisSymbol, Pauli, StateVector};
use crate::scalar::Scalar;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    PauliTamper,
    CheckSubstitution,
    InterceptResend,
    Impersonation,
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttackKind::PauliTamper => "PauliTamper",
            AttackKind::CheckSubstitution => "CheckSubstitution",
            AttackKind::InterceptResend => "InterceptResend",
            AttackKind::Impersonation => "Impersonation",
        };
        f.write_str(s)
    }
}

/// Either explicit 1-based positions or `j` positions drawn without
/// replacement when the attack runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Positions {
    Explicit(Vec<usize>),
    Random { random: usize },
}

impl Default for Positions {
    fn default() -> Self {
        Positions::Explicit(Vec::new())
    }
}

impl Positions {
    pub fn count(&self) -> usize {
        match self {
            Positions::Explicit(v) => v.len(),
            Positions::Random { random } => *random,
        }
    }

    fn validate(&self, range: usize, what: &str) -> Result<()> {
        match self {
            Positions::Explicit(v) => {
                for (k, &p) in v.iter().enumerate() {
                    if p == 0 || p > range {
                        return Err(Error::InvalidAttack(format!(
                            "position {p} outside 1..={range} ({what})"
                        )));
                    }
                    if v[..k].contains(&p) {
                        return Err(Error::InvalidAttack(format!("position {p} repeated")));
                    }
                }
            }
            Positions::Random { random } if *random > range => {
                return Err(Error::InvalidAttack(format!(
                    "cannot pick {random} of {range} positions ({what})"
                )));
            }
            Positions::Random { .. } => {}
        }
        Ok(())
    }

    /// Concrete sorted positions in `1..=range`.
    pub fn resolve<R: Rng + ?Sized>(&self, range: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.validate(range, "resolve")?;
        Ok(match self {
            Positions::Explicit(v) => v.clone(),
            Positions::Random { random } => {
                let mut picked: Vec<usize> = sample(rng, range, *random)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect();
                picked.sort_unstable();
                picked
            }
        })
    }
}

/// Declarative description of an adversary channel; the JSON form is used by
/// CLI config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    #[serde(default)]
    pub positions: Positions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<Pauli>,
    /// Impersonation only. Absent means a fresh random key per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guessed_key: Option<Key>,
}

impl AttackSpec {
    /// The honest channel.
    pub fn none() -> Self {
        Self::pauli_tamper(Pauli::X, Positions::Explicit(Vec::new()))
    }

    pub fn pauli_tamper(pauli: Pauli, positions: Positions) -> Self {
        Self {
            kind: AttackKind::PauliTamper,
            positions,
            pauli: Some(pauli),
            guessed_key: None,
        }
    }

    pub fn check_substitution(j: usize) -> Self {
        Self {
            kind: AttackKind::CheckSubstitution,
            positions: Positions::Random { random: j },
            pauli: None,
            guessed_key: None,
        }
    }

    pub fn intercept_resend(positions: Positions) -> Self {
        Self {
            kind: AttackKind::InterceptResend,
            positions,
            pauli: None,
            guessed_key: None,
        }
    }

    pub fn impersonation(guessed_key: Option<Key>) -> Self {
        Self {
            kind: AttackKind::Impersonation,
            positions: Positions::default(),
            pauli: None,
            guessed_key,
        }
    }

    /// Number of affected qubits (0 for impersonation).
    pub fn j(&self) -> usize {
        match self.kind {
            AttackKind::Impersonation => 0,
            _ => self.positions.count(),
        }
    }

    pub fn validate(&self, params: QsacParams) -> Result<()> {
        match self.kind {
            AttackKind::PauliTamper => {
                if self.pauli.is_none() {
                    return Err(Error::InvalidAttack("PauliTamper needs `pauli`".into()));
                }
                self.positions.validate(params.total(), "codeword")
            }
            AttackKind::InterceptResend => self.positions.validate(params.total(), "codeword"),
            AttackKind::CheckSubstitution => {
                if self.positions.count() == 0 {
                    return Err(Error::InvalidAttack(
                        "CheckSubstitution needs j >= 1".into(),
                    ));
                }
                self.positions.validate(params.n, "check register")
            }
            AttackKind::Impersonation => {
                if self.positions.count() != 0 {
                    return Err(Error::InvalidAttack(
                        "Impersonation takes no positions".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// The concrete choices an attack made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedAttack {
    pub kind: AttackKind,
    pub positions: Vec<usize>,
    pub pauli: Option<Pauli>,
    /// Bases picked by intercept-resend, one per position.
    pub bases: Vec<Basis>,
    /// Check string the decoded register carries after substitution.
    pub substituted: Option<CheckString>,
    pub guessed_key: Option<Key>,
}

impl ResolvedAttack {
    fn new(kind: AttackKind, positions: Vec<usize>) -> Self {
        Self {
            kind,
            positions,
            pauli: None,
            bases: Vec::new(),
            substituted: None,
            guessed_key: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TamperedCodeword<T: Scalar = f64> {
    pub codeword: QsacCodeword<T>,
    pub applied: ResolvedAttack,
}

pub fn pauli_tamper<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<TamperedCodeword<T>> {
    if spec.kind != AttackKind::PauliTamper {
        return Err(Error::InvalidAttack(format!(
            "expected PauliTamper, got {}",
            spec.kind
        )));
    }
    spec.validate(codeword.params())?;
    let pauli = spec.pauli.expect("validated");
    let positions = spec.positions.resolve(codeword.params().total(), rng)?;
    let mut out = codeword.clone();
    for &p in &positions {
        out.state_mut().apply_pauli(pauli, p)?;
    }
    let mut applied = ResolvedAttack::new(AttackKind::PauliTamper, positions);
    applied.pauli = Some(pauli);
    Ok(TamperedCodeword {
        codeword: out,
        applied,
    })
}

fn substitute_at<R: Rng + ?Sized>(
    check: &CheckString,
    positions: &[usize],
    rng: &mut R,
) -> Result<CheckString> {
    let mut symbols = check.symbols().to_vec();
    for &p in positions {
        let original = symbols[p - 1].value();
        // uniform over the three other BB84 states
        let shift = rng.gen_range(1..4u8);
        symbols[p - 1] = BasisSymbol::new((original + shift) % 4)?;
    }
    CheckString::new(symbols)
}

/// Replaces `j` uniformly chosen symbols, each by one of the three other
/// BB84 states chosen uniformly.
pub fn substitute_check_states<R: Rng + ?Sized>(
    check: &CheckString,
    j: usize,
    rng: &mut R,
) -> Result<CheckString> {
    if j < 1 || j > check.len() {
        return Err(Error::InvalidAttack(format!(
            "j = {j} outside 1..={}",
            check.len()
        )));
    }
    let positions = Positions::Random { random: j }.resolve(check.len(), rng)?;
    substitute_at(check, &positions, rng)
}

/// Builds a codeword that decodes to `|C''> ⊗ |M>`, where `|C''>` is the
/// check register after substitution. Assumes `codeword` decodes to an
/// honest `|C> ⊗ |M>` under `schedule`.
pub fn check_substitution<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    schedule: &Schedule,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<TamperedCodeword<T>> {
    if spec.kind != AttackKind::CheckSubstitution {
        return Err(Error::InvalidAttack(format!(
            "expected CheckSubstitution, got {}",
            spec.kind
        )));
    }
    spec.validate(codeword.params())?;
    let decoded = crate::codec::decode_with_schedule(codeword, schedule)?;
    let message = decoded.contract_prefix(&schedule.check_state()?)?;
    let positions = spec.positions.resolve(schedule.params().n, rng)?;
    let substituted = substitute_at(schedule.check(), &positions, rng)?;
    let forged_schedule = Schedule::new(substituted.clone(), schedule.transform().clone())?;
    let forged = encode_with_schedule(&message, &forged_schedule)?;
    let mut applied = ResolvedAttack::new(AttackKind::CheckSubstitution, positions);
    applied.substituted = Some(substituted);
    Ok(TamperedCodeword {
        codeword: forged,
        applied,
    })
}

/// Measures each listed qubit in a uniformly random basis and forwards the
/// collapsed register.
pub fn intercept_resend<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    positions: &Positions,
    rng: &mut R,
) -> Result<TamperedCodeword<T>> {
    let resolved = positions.resolve(codeword.params().total(), rng)?;
    let mut out = codeword.clone();
    let mut bases = Vec::with_capacity(resolved.len());
    for &p in &resolved {
        let basis = if rng.gen::<bool>() {
            Basis::X
        } else {
            Basis::Z
        };
        out.state_mut().measure(p, basis, rng)?;
        bases.push(basis);
    }
    let mut applied = ResolvedAttack::new(AttackKind::InterceptResend, resolved);
    applied.bases = bases;
    Ok(TamperedCodeword {
        codeword: out,
        applied,
    })
}

/// A 128-bit key drawn from `rng` that differs from `avoid`.
pub fn random_wrong_key<R: Rng + ?Sized>(avoid: &Key, rng: &mut R) -> Key {
    loop {
        let bytes: Vec<u8> = (0..16).map(|_| rng.gen()).collect();
        let key = Key::from_bytes(bytes).expect("16 bytes");
        if &key != avoid {
            return key;
        }
    }
}

/// Encodes `message` under `guessed_key` and verifies it under `true_key`.
pub fn impersonate<T: Scalar, R: Rng + ?Sized>(
    message: &StateVector<T>,
    guessed_key: &Key,
    true_key: &Key,
    n: usize,
    rng: &mut R,
) -> Result<VerificationOutcome<T>> {
    let forged = crate::codec::encode(message, guessed_key, n)?;
    verify(&forged, true_key, rng)
}

/// Applies `spec` to an honestly encoded `codeword` of `message`.
///
/// `schedule` must be the one derived from the true key.
pub fn apply_attack<T: Scalar, R: Rng + ?Sized>(
    codeword: &QsacCodeword<T>,
    message: &StateVector<T>,
    true_key: &Key,
    schedule: &Schedule,
    spec: &AttackSpec,
    rng: &mut R,
) -> Result<TamperedCodeword<T>> {
    match spec.kind {
        AttackKind::PauliTamper => pauli_tamper(codeword, spec, rng),
        AttackKind::CheckSubstitution => check_substitution(codeword, schedule, spec, rng),
        AttackKind::InterceptResend => {
            spec.validate(codeword.params())?;
            intercept_resend(codeword, &spec.positions, rng)
        }
        AttackKind::Impersonation => {
            spec.validate(codeword.params())?;
            let guessed = match &spec.guessed_key {
                Some(k) => k.clone(),
                None => random_wrong_key(true_key, rng),
            };
            let forged = crate::codec::encode(message, &guessed, codeword.params().n)?;
            let mut applied = ResolvedAttack::new(AttackKind::Impersonation, Vec::new());
            applied.guessed_key = Some(guessed);
            Ok(TamperedCodeword {
                codeword: forged,
                applied,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, exact_pass_probability_with_schedule};
    use crate::keysched::TransformString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn identity_schedule(check: &str, m: usize) -> Schedule {
        let check = CheckString::parse(check).unwrap();
        let total = check.len() + m;
        Schedule::new(check, TransformString::identity(total).unwrap()).unwrap()
    }

    #[test]
    fn json_forms() {
        let spec: AttackSpec =
            serde_json::from_str(r#"{"kind":"PauliTamper","positions":[1,3],"pauli":"Z"}"#)
                .unwrap();
        assert_eq!(
            spec,
            AttackSpec::pauli_tamper(Pauli::Z, Positions::Explicit(vec![1, 3]))
        );
        let spec: AttackSpec =
            serde_json::from_str(r#"{"kind":"CheckSubstitution","positions":{"random":2}}"#)
                .unwrap();
        assert_eq!(spec, AttackSpec::check_substitution(2));
        let spec: AttackSpec =
            serde_json::from_str(r#"{"kind":"Impersonation","guessed_key":"0x0a0b"}"#).unwrap();
        assert_eq!(spec.guessed_key.unwrap().bytes(), &[0x0a, 0x0b]);
        let text = serde_json::to_string(&AttackSpec::intercept_resend(Positions::Random {
            random: 3,
        }))
        .unwrap();
        assert_eq!(
            text,
            r#"{"kind":"InterceptResend","positions":{"random":3}}"#
        );
        assert!(serde_json::from_str::<AttackSpec>(r#"{"kind":"Nope"}"#).is_err());
        assert!(serde_json::from_str::<AttackSpec>(r#"{"kind":"PauliTamper","extra":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let p = QsacParams::new(3, 2).unwrap();
        assert!(
            AttackSpec::pauli_tamper(Pauli::X, Positions::Explicit(vec![6]))
                .validate(p)
                .is_err()
        );
        assert!(
            AttackSpec::pauli_tamper(Pauli::X, Positions::Explicit(vec![5]))
                .validate(p)
                .is_ok()
        );
        assert!(AttackSpec::check_substitution(4).validate(p).is_err());
        assert!(AttackSpec::check_substitution(0).validate(p).is_err());
        let mut no_pauli = AttackSpec::none();
        no_pauli.pauli = None;
        assert!(no_pauli.validate(p).is_err());
        assert!(
            AttackSpec::intercept_resend(Positions::Explicit(vec![2, 2]))
                .validate(p)
                .is_err()
        );
    }

    #[test]
    fn x_tamper_through_identity_network() {
        let sched = identity_schedule("0110", 2);
        let msg = StateVector::<f64>::zero(2).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        for pos in 1..=6 {
            let spec = AttackSpec::pauli_tamper(Pauli::X, Positions::Explicit(vec![pos]));
            let t = pauli_tamper(&cw, &spec, &mut rng(0)).unwrap();
            let p = exact_pass_probability_with_schedule(&t.codeword, &sched).unwrap();
            let expected = if pos <= 4 { 0.0 } else { 1.0 };
            assert_eq!(p, expected, "position {pos}");
            assert!((t.codeword.state().norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn z_tamper_on_plus_check() {
        let sched = identity_schedule("20", 1);
        let msg = StateVector::<f64>::zero(1).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        let spec = AttackSpec::pauli_tamper(Pauli::Z, Positions::Explicit(vec![1]));
        let t = pauli_tamper(&cw, &spec, &mut rng(0)).unwrap();
        let p = exact_pass_probability_with_schedule(&t.codeword, &sched).unwrap();
        assert!(p.abs() < 1e-12);
    }

    #[test]
    fn substitution_changes_exactly_j_symbols() {
        let check = CheckString::parse("01230123").unwrap();
        let mut r = rng(5);
        for j in 1..=8 {
            for _ in 0..20 {
                let sub = substitute_check_states(&check, j, &mut r).unwrap();
                let diff = check
                    .symbols()
                    .iter()
                    .zip(sub.symbols())
                    .filter(|(a, b)| a != b)
                    .count();
                assert_eq!(diff, j);
            }
        }
        assert!(substitute_check_states(&check, 0, &mut r).is_err());
        assert!(substitute_check_states(&check, 9, &mut r).is_err());
    }

    #[test]
    fn single_substitution_mean_is_one_third() {
        // (1/3)(|<0|1>|² + |<0|+>|² + |<0|->|²) = 1/3, exactly over the three choices
        let sched = identity_schedule("0", 1);
        let msg = StateVector::<f64>::zero(1).unwrap();
        let mut total = 0.0;
        for other in ["1", "2", "3"] {
            let forged = Schedule::new(
                CheckString::parse(other).unwrap(),
                sched.transform().clone(),
            )
            .unwrap();
            let cw = encode_with_schedule(&msg, &forged).unwrap();
            total += exact_pass_probability_with_schedule(&cw, &sched).unwrap();
        }
        assert!((total / 3.0 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn substitution_j2_matches_one_ninth() {
        let key = Key::from_hex("00112233445566778899").unwrap();
        let params = QsacParams::new(6, 2).unwrap();
        let sched = Schedule::derive(&key, params).unwrap();
        let msg = StateVector::<f64>::zero(2).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        let spec = AttackSpec::check_substitution(2);
        let mut r = rng(17);
        let trials = 100_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            let t = check_substitution(&cw, &sched, &spec, &mut r).unwrap();
            sum += exact_pass_probability_with_schedule(&t.codeword, &sched).unwrap();
        }
        let mean = sum / trials as f64;
        let p = 1.0 / 9.0;
        // per trial the exact probability is 1/4 (both cross-basis, prob 4/9) or 0
        let variance = 4.0 / 9.0 / 16.0 - p * p;
        let sigma = (variance / trials as f64).sqrt();
        assert!((mean - p).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn intercept_resend_on_zero_check_detects_a_quarter() {
        let sched = identity_schedule("0", 1);
        let msg = StateVector::<f64>::zero(1).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        let mut r = rng(21);
        let trials = 40_000;
        let mut detected = 0;
        for _ in 0..trials {
            let t = intercept_resend(&cw, &Positions::Explicit(vec![1]), &mut r).unwrap();
            let out = crate::codec::verify_with_schedule(&t.codeword, &sched, &mut r).unwrap();
            if !out.authenticated {
                detected += 1;
            }
        }
        let rate = detected as f64 / trials as f64;
        let sigma = (0.25 * 0.75 / trials as f64).sqrt();
        assert!((rate - 0.25).abs() <= 3.0 * sigma, "{rate}");
    }

    #[test]
    fn intercept_nothing_is_a_no_op() {
        let key = Key::from_hex("abcd").unwrap();
        let msg = StateVector::<f64>::zero(2).unwrap();
        let cw = encode(&msg, &key, 3).unwrap();
        let t = intercept_resend(&cw, &Positions::Explicit(vec![]), &mut rng(1)).unwrap();
        assert_eq!(t.codeword, cw);
    }

    #[test]
    fn impersonation_with_true_key_always_passes() {
        let key = Key::from_hex("deadbeef").unwrap();
        let mut r = rng(3);
        let msg = StateVector::<f64>::random(2, &mut r).unwrap();
        for _ in 0..50 {
            let out = impersonate(&msg, &key, &key, 4, &mut r).unwrap();
            assert!(out.authenticated);
        }
    }

    #[test]
    fn same_seed_same_tampering() {
        let key = Key::from_hex("0102030405").unwrap();
        let params = QsacParams::new(4, 2).unwrap();
        let sched = Schedule::derive(&key, params).unwrap();
        let msg = StateVector::<f64>::zero(2).unwrap();
        let cw = encode_with_schedule(&msg, &sched).unwrap();
        for spec in [
            AttackSpec::pauli_tamper(Pauli::Y, Positions::Random { random: 2 }),
            AttackSpec::check_substitution(2),
            AttackSpec::intercept_resend(Positions::Random { random: 3 }),
            AttackSpec::impersonation(None),
        ] {
            let a = apply_attack(&cw, &msg, &key, &sched, &spec, &mut rng(42)).unwrap();
            let b = apply_attack(&cw, &msg, &key, &sched, &spec, &mut rng(42)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.codeword.params(), cw.params());
            assert!((a.codeword.state().norm_sqr() - 1.0).abs() < 1e-9);
        }
    }
}
