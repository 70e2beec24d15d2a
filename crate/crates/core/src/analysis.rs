//! Closed-form detection probabilities, Monte-Carlo estimators and avalanche
//! metrics.

use crate::adversary::{apply_attack, AttackKind, AttackSpec};
use crate::codec::{
    apply_decoding_network, encode_with_schedule, exact_pass_probability_with_schedule,
    verify_with_schedule, QsacParams, Schedule,
};
use crate::error::{Error, Result};
use crate::keysched::Key;
use crate::qcore::{Pauli, StateVector};
use crate::scalar::Scalar;
use num_traits::{pow, Num};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::io::{Read, Write};

/// Number type for closed-form probabilities: `f64`, `f32` or an exact
/// rational such as [`num_rational::BigRational`].
pub trait Probability: Clone + PartialOrd + Num + Debug {}

impl<P: Clone + PartialOrd + Num + Debug> Probability for P {}

fn count<P: Probability>(k: usize) -> P {
    // binary expansion keeps this exact for rationals and integers alike
    let two = P::one() + P::one();
    let mut acc = P::zero();
    for bit in (0..usize::BITS).rev() {
        acc = acc * two.clone();
        if (k >> bit) & 1 == 1 {
            acc = acc + P::one();
        }
    }
    acc
}

/// Forgery acceptance probabilities for `n` check qubits, `m` message qubits
/// and `j` modified check qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionFormulas<P> {
    pub n: usize,
    pub m: usize,
    pub j: usize,
    /// `(1/3)^j`
    pub epsilon: P,
    /// `|message space| / |codeword space| = 2^m / 2^(n+m) = 2^-n`
    pub p_collision: P,
    /// `p_collision + (1 - p_collision) · epsilon`
    pub p_pass: P,
    /// Reference value `(1/3)^(n/2)`; reported, never asserted.
    pub epsilon_avalanche: f64,
}

pub fn formulas<P: Probability>(n: usize, m: usize, j: usize) -> Result<DetectionFormulas<P>> {
    if n < 1 || m < 1 || j < 1 {
        return Err(Error::InvalidParams(format!(
            "need n, m, j >= 1 (got n={n} m={m} j={j})"
        )));
    }
    if j > n {
        return Err(Error::InvalidParams(format!("j = {j} exceeds n = {n}")));
    }
    let third = P::one() / count::<P>(3);
    let epsilon = pow(third, j);
    let p_collision = P::one() / pow(count::<P>(2), n);
    let p_pass = p_collision.clone() + (P::one() - p_collision.clone()) * epsilon.clone();
    Ok(DetectionFormulas {
        n,
        m,
        j,
        epsilon,
        p_collision,
        p_pass,
        epsilon_avalanche: (1.0f64 / 3.0).powf(n as f64 / 2.0),
    })
}

/// Per-interfered-qubit detection probability of random-sampling discussion:
/// `(num_check / total) · 1/4`.
pub fn random_sampling_baseline<P: Probability>(num_check: usize, total: usize) -> Result<P> {
    if num_check < 1 {
        return Err(Error::InvalidParams("num_check must be at least 1".into()));
    }
    if num_check > total {
        return Err(Error::InvalidParams(format!(
            "num_check = {num_check} exceeds total = {total}"
        )));
    }
    Ok(count::<P>(num_check) / count::<P>(total) / count::<P>(4))
}

/// Pass counts of a Monte-Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub trials: u64,
    pub passes: u64,
    pub pass_rate: f64,
    /// `1.96 · sqrt(r(1−r)/trials)`
    pub ci95_half_width: f64,
    pub predicted: Option<f64>,
    pub seed: u64,
}

impl DetectionStats {
    pub fn from_counts(trials: u64, passes: u64, seed: u64, predicted: Option<f64>) -> Self {
        assert!(trials >= 1 && passes <= trials);
        let r = passes as f64 / trials as f64;
        Self {
            trials,
            passes,
            pass_rate: r,
            ci95_half_width: 1.96 * (r * (1.0 - r) / trials as f64).sqrt(),
            predicted,
            seed,
        }
    }

    /// Binomial standard deviation of the rate when the true probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// `|pass_rate − p| ≤ k·σ(p)`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        (self.pass_rate - p).abs() <= k * self.sigma_at(p)
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < 1 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    Ok(())
}

/// Runs `trials` independent attack + verify rounds; trial `i` uses seed
/// `seed + i`. Counts are merged independently of thread scheduling.
pub fn mc_detection<T: Scalar>(
    attack: &AttackSpec,
    params: QsacParams,
    key: &Key,
    message: &StateVector<T>,
    trials: u64,
    seed: u64,
) -> Result<DetectionStats> {
    check_trials(trials)?;
    attack.validate(params)?;
    let schedule = Schedule::derive(key, params)?;
    let codeword = encode_with_schedule(message, &schedule)?;
    let passes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = trial_rng(seed, i);
            let tampered = apply_attack(&codeword, message, key, &schedule, attack, &mut rng)?;
            let outcome = verify_with_schedule(&tampered.codeword, &schedule, &mut rng)?;
            Ok(u64::from(outcome.authenticated))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let predicted = match attack.kind {
        AttackKind::CheckSubstitution => {
            Some(formulas::<f64>(params.n, params.m, attack.j())?.epsilon)
        }
        _ => None,
    };
    Ok(DetectionStats::from_counts(trials, passes, seed, predicted))
}

/// Mean of the exact pass probability over the same tampered codewords that
/// [`mc_detection`] would draw with this seed.
pub fn mean_exact_pass_probability<T: Scalar>(
    attack: &AttackSpec,
    params: QsacParams,
    key: &Key,
    message: &StateVector<T>,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    check_trials(trials)?;
    attack.validate(params)?;
    let schedule = Schedule::derive(key, params)?;
    let codeword = encode_with_schedule(message, &schedule)?;
    let probs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = trial_rng(seed, i);
            let tampered = apply_attack(&codeword, message, key, &schedule, attack, &mut rng)?;
            Ok(exact_pass_probability_with_schedule(&tampered.codeword, &schedule)?.as_f64())
        })
        .collect::<Result<_>>()?;
    Ok(probs.iter().sum::<f64>() / trials as f64)
}

/// One CSV row of detection output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub n: usize,
    pub m: usize,
    pub attack: AttackKind,
    pub j: usize,
    pub trials: u64,
    pub seed: u64,
    pub pass_rate: f64,
    pub ci95: f64,
    pub predicted: Option<f64>,
}

impl DetectionRow {
    pub fn new(params: QsacParams, attack: &AttackSpec, stats: &DetectionStats) -> Self {
        Self {
            n: params.n,
            m: params.m,
            attack: attack.kind,
            j: attack.j(),
            trials: stats.trials,
            seed: stats.seed,
            pass_rate: stats.pass_rate,
            ci95: stats.ci95_half_width,
            predicted: stats.predicted,
        }
    }
}

pub const DETECTION_CSV_HEADER: &str = "n,m,attack,j,trials,seed,pass_rate,ci95,predicted";

pub fn write_detection_csv<W: Write>(rows: &[DetectionRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(DETECTION_CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_detection_csv<R: Read>(input: R) -> Result<Vec<DetectionRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != DETECTION_CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header {:?}", header.join(",")),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Which check states an avalanche scan uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// The key-derived check string as is.
    Keyed,
    /// Key-derived string folded onto the Z basis, with a `|0…0>` message,
    /// so the honest decoded register is a computational basis state.
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvalancheEntry {
    pub position: usize,
    pub pauli: Pauli,
    pub exact_pass_prob: f64,
    /// Hamming distance between honest and tampered decoded basis strings;
    /// absent unless both are basis states.
    pub hamming_spread: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AvalancheReport {
    pub key_hex: Option<String>,
    pub n: usize,
    pub m: usize,
    pub transform: Vec<usize>,
    pub per_position: Vec<AvalancheEntry>,
}

/// Largest codeword an avalanche scan will enumerate.
pub const AVALANCHE_SCAN_BUDGET: usize = 12;

pub fn avalanche_scan(key: &Key, params: QsacParams, mode: CheckMode) -> Result<AvalancheReport> {
    let derived = Schedule::derive(key, params)?;
    let schedule = match mode {
        CheckMode::Keyed => derived,
        CheckMode::Classical => {
            Schedule::new(derived.check().to_classical(), derived.transform().clone())?
        }
    };
    let message = StateVector::<f64>::zero(params.m)?;
    let mut report = avalanche_scan_schedule(&schedule, &message)?;
    report.key_hex = Some(key.to_hex());
    Ok(report)
}

/// Scans a single X and a single Z tamper at every codeword position.
pub fn avalanche_scan_schedule<T: Scalar>(
    schedule: &Schedule,
    message: &StateVector<T>,
) -> Result<AvalancheReport> {
    let params = schedule.params();
    if params.total() > AVALANCHE_SCAN_BUDGET {
        return Err(Error::TooManyQubits {
            requested: params.total(),
            cap: AVALANCHE_SCAN_BUDGET,
        });
    }
    let codeword = encode_with_schedule(message, schedule)?;
    let mut honest = codeword.state().clone();
    apply_decoding_network(&mut honest, schedule.transform())?;
    let honest_index = honest.basis_index();
    let mut per_position = Vec::with_capacity(2 * params.total());
    for position in 1..=params.total() {
        for pauli in [Pauli::X, Pauli::Z] {
            let mut tampered = codeword.clone();
            tampered.state_mut().apply_pauli(pauli, position)?;
            let exact = exact_pass_probability_with_schedule(&tampered, schedule)?.as_f64();
            let mut decoded = tampered.into_state();
            apply_decoding_network(&mut decoded, schedule.transform())?;
            let hamming_spread = match (honest_index, decoded.basis_index()) {
                (Some(a), Some(b)) => Some((a ^ b).count_ones() as usize),
                _ => None,
            };
            per_position.push(AvalancheEntry {
                position,
                pauli,
                exact_pass_prob: exact,
                hamming_spread,
            });
        }
    }
    Ok(AvalancheReport {
        key_hex: None,
        n: params.n,
        m: params.m,
        transform: schedule.transform().targets().to_vec(),
        per_position,
    })
}

impl AvalancheReport {
    pub fn entry(&self, position: usize, pauli: Pauli) -> Option<&AvalancheEntry> {
        self.per_position
            .iter()
            .find(|e| e.position == position && e.pauli == pauli)
    }

    /// Largest X-tamper spread, if spreads are defined.
    pub fn max_x_spread(&self) -> Option<usize> {
        self.per_position
            .iter()
            .filter(|e| e.pauli == Pauli::X)
            .filter_map(|e| e.hamming_spread)
            .max()
    }

    /// CSV with columns `position,pauli,exact_pass_prob,hamming_spread`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.per_position {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}
