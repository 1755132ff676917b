//! Issuing and checking banknotes across a cohort of `t` centers.
//!
//! Issuing: the first center prepares `|psi_{a,b}>` per pair from its
//! precomputed share, and every further center applies its coded operation
//! `U(a) V(b)` pair by pair. Checking: each center of a (possibly different)
//! cohort applies its own operation followed by a secret blinding `V(x)`;
//! the trusted measurer XORs the blinds per pair, measures each pair in that
//! basis and accepts iff every outcome is `00`.
//!
//! Every hop between holders runs the auxiliary-qubit screen on both qubits
//! of each pair.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, PrecomputedShare};
use crate::qsim::{
    apply_op, basis_state, measure, outcome_probabilities, Gate, OpCode, QsimError, StateVector,
    Variant,
};
use crate::trojan::{screen, TrojanError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("no shares supplied")]
    NoShares,
    #[error("inconsistent cohort: {0}")]
    Cohort(String),
    #[error("banknote label `{note}` does not match share label `{share}`")]
    LabelMismatch { note: String, share: String },
    #[error("banknote was issued under {note}, checking under {check}")]
    VariantMismatch { note: Variant, check: Variant },
    #[error("expected {expected} pairs, found {got}")]
    PairCount { expected: usize, got: usize },
    #[error("auxiliary qubit flipped on hop {hop}, pair {pair}")]
    TrojanDetected { hop: usize, pair: usize },
    #[error("expected {expected} blinding records, found {got}")]
    MissingBlind { expected: usize, got: usize },
    #[error("duplicate blinding record from center {0}")]
    DuplicateBlind(usize),
    #[error("blinding record of center {center} has {got} bits, expected {expected}")]
    BlindLength {
        center: usize,
        expected: usize,
        got: usize,
    },
    #[error("malformed banknote: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Trojan(#[from] TrojanError),
}

/// A label plus one two-qubit state per key pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Banknote {
    pub label: String,
    pub variant: Variant,
    /// Subsystem 0 of each state is the 4-dimensional pair slot.
    pub pairs: Vec<StateVector>,
}

/// The blinding bits one checking center sends to the measurer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlindingRecord {
    /// One-based position of the center in the checking cohort.
    pub center: usize,
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub outcomes: Vec<u8>,
    pub accepted: bool,
    pub basis_used: Vec<u8>,
    /// Born probability of `00` per pair in the measured basis.
    pub pair_accept_probabilities: Vec<f64>,
}

fn validate_cohort(shares: &[PrecomputedShare], m: usize) -> Result<&str, ProtocolError> {
    let first = shares.first().ok_or(ProtocolError::NoShares)?;
    for (j, s) in shares.iter().enumerate() {
        if s.label != first.label {
            return Err(ProtocolError::Cohort(format!(
                "center {} holds label `{}`, center 1 holds `{}`",
                j + 1,
                s.label,
                first.label
            )));
        }
        if s.pairs().len() != m {
            return Err(ProtocolError::Cohort(format!(
                "center {} carries {} pairs, expected {m}",
                j + 1,
                s.pairs().len()
            )));
        }
    }
    Ok(&first.label)
}

/// Screens both qubits of every pair for a substituted register.
fn screen_hop<R: Rng + ?Sized>(
    pairs: &mut [StateVector],
    hop: usize,
    rng: &mut R,
) -> Result<(), ProtocolError> {
    for (i, pair) in pairs.iter_mut().enumerate() {
        let qubits = pair.split(0, &[2, 2])?;
        let (flipped, after) = screen(&qubits, &[vec![0], vec![1]], rng)?;
        if flipped {
            return Err(ProtocolError::TrojanDetected { hop, pair: i });
        }
        *pair = after.merge(0, 2)?;
    }
    Ok(())
}

fn apply_share(
    pairs: &mut [StateVector],
    share: &PrecomputedShare,
    variant: Variant,
) -> Result<(), ProtocolError> {
    for (pair, kp) in pairs.iter_mut().zip(share.pairs()) {
        *pair = apply_op(pair, 0, OpCode::new(kp.a, kp.b, variant)?)?;
    }
    Ok(())
}

/// Issues a banknote with the cohort's precomputed shares, in order.
pub fn issue<R: Rng + ?Sized>(
    shares: &[PrecomputedShare],
    m: usize,
    variant: Variant,
    rng: &mut R,
) -> Result<Banknote, ProtocolError> {
    let label = validate_cohort(shares, m)?.to_owned();
    let mut pairs = shares[0]
        .pairs()
        .iter()
        .map(|kp| basis_state(kp.a, kp.b))
        .collect::<Result<Vec<_>, _>>()?;
    for (hop, share) in shares.iter().enumerate().skip(1) {
        screen_hop(&mut pairs, hop, rng)?;
        apply_share(&mut pairs, share, variant)?;
    }
    Ok(Banknote {
        label,
        variant,
        pairs,
    })
}

/// A note of fresh `|00>` pairs carrying a copied label.
pub fn forge(label: &str, m: usize, variant: Variant) -> Result<Banknote, ProtocolError> {
    Ok(Banknote {
        label: label.to_owned(),
        variant,
        pairs: (0..m)
            .map(|_| basis_state(0, 0))
            .collect::<Result<_, _>>()?,
    })
}

fn validate_note(
    banknote: &Banknote,
    shares: &[PrecomputedShare],
    variant: Variant,
) -> Result<(), ProtocolError> {
    let m = banknote.pairs.len();
    let label = validate_cohort(shares, m).map_err(|e| match e {
        ProtocolError::Cohort(_) if shares[0].pairs().len() != m => ProtocolError::PairCount {
            expected: shares[0].pairs().len(),
            got: m,
        },
        other => other,
    })?;
    if label != banknote.label {
        return Err(ProtocolError::LabelMismatch {
            note: banknote.label.clone(),
            share: label.to_owned(),
        });
    }
    if banknote.variant != variant {
        return Err(ProtocolError::VariantMismatch {
            note: banknote.variant,
            check: variant,
        });
    }
    Ok(())
}

/// The centers' half of checking: per center, screen the incoming hop,
/// apply the coded operation and, if `blind`, a fresh uniform `V(x)`.
fn run_centers<R: Rng + ?Sized>(
    banknote: &Banknote,
    shares: &[PrecomputedShare],
    variant: Variant,
    blind: bool,
    rng: &mut R,
) -> Result<(Banknote, Vec<BlindingRecord>), ProtocolError> {
    validate_note(banknote, shares, variant)?;
    let mut pairs = banknote.pairs.clone();
    let v = Gate::V.matrix();
    let mut blinds = Vec::with_capacity(shares.len());
    for (j, share) in shares.iter().enumerate() {
        screen_hop(&mut pairs, j, rng)?;
        apply_share(&mut pairs, share, variant)?;
        let bits: Vec<u8> = pairs
            .iter()
            .map(|_| if blind { rng.random_range(0..2) } else { 0 })
            .collect();
        for (pair, &x) in pairs.iter_mut().zip(&bits) {
            if x == 1 {
                *pair = pair.apply(&v, &[0])?;
            }
        }
        blinds.push(BlindingRecord {
            center: j + 1,
            bits,
        });
    }
    Ok((
        Banknote {
            label: banknote.label.clone(),
            variant,
            pairs,
        },
        blinds,
    ))
}

/// Runs every checking center and returns the state handed to the measurer
/// together with the secret blinding records.
pub fn check_states<R: Rng + ?Sized>(
    banknote: &Banknote,
    shares: &[PrecomputedShare],
    variant: Variant,
    rng: &mut R,
) -> Result<(Banknote, Vec<BlindingRecord>), ProtocolError> {
    run_centers(banknote, shares, variant, true, rng)
}

/// Per-pair measurement bases: the XOR of every center's blind.
pub fn measurement_bases(
    m: usize,
    blinds: &[BlindingRecord],
    expected_centers: usize,
) -> Result<Vec<u8>, ProtocolError> {
    if blinds.len() != expected_centers {
        return Err(ProtocolError::MissingBlind {
            expected: expected_centers,
            got: blinds.len(),
        });
    }
    let mut seen = BTreeSet::new();
    let mut bases = vec![0u8; m];
    for record in blinds {
        if !seen.insert(record.center) {
            return Err(ProtocolError::DuplicateBlind(record.center));
        }
        if record.bits.len() != m {
            return Err(ProtocolError::BlindLength {
                center: record.center,
                expected: m,
                got: record.bits.len(),
            });
        }
        for (basis, &x) in bases.iter_mut().zip(&record.bits) {
            *basis ^= x & 1;
        }
    }
    Ok(bases)
}

/// The trusted measurer: combines the blinds, measures and decides.
pub fn measurer_verify<R: Rng + ?Sized>(
    states: &Banknote,
    blinds: &[BlindingRecord],
    expected_centers: usize,
    rng: &mut R,
) -> Result<CheckReport, ProtocolError> {
    let basis_used = measurement_bases(states.pairs.len(), blinds, expected_centers)?;
    let mut outcomes = Vec::with_capacity(basis_used.len());
    let mut pair_accept_probabilities = Vec::with_capacity(basis_used.len());
    for (pair, &basis) in states.pairs.iter().zip(&basis_used) {
        pair_accept_probabilities.push(outcome_probabilities(pair, 0, basis)?[0]);
        outcomes.push(measure(pair, 0, basis, rng)?.0);
    }
    Ok(CheckReport {
        accepted: outcomes.iter().all(|&c| c == 0),
        outcomes,
        basis_used,
        pair_accept_probabilities,
    })
}

/// Full check of `banknote` by the cohort holding `shares`.
pub fn check<R: Rng + ?Sized>(
    banknote: &Banknote,
    shares: &[PrecomputedShare],
    variant: Variant,
    rng: &mut R,
) -> Result<CheckReport, ProtocolError> {
    let (states, blinds) = check_states(banknote, shares, variant, rng)?;
    measurer_verify(&states, &blinds, shares.len(), rng)
}

fn format_amp(x: f64) -> String {
    format!("{x:.16e}")
}

impl Banknote {
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    /// Text form: `label=`, `m=`, `variant=` header lines then one
    /// `pair=<dims>:<re>,<im>;...` line per pair.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "label={}", self.label);
        let _ = writeln!(out, "m={}", self.pairs.len());
        let _ = writeln!(out, "variant={}", self.variant);
        for pair in &self.pairs {
            let dims: Vec<String> = pair.dims().iter().map(usize::to_string).collect();
            let amps: Vec<String> = pair
                .amps()
                .iter()
                .map(|a| format!("{},{}", format_amp(a.re), format_amp(a.im)))
                .collect();
            let _ = writeln!(out, "pair={}:{}", dims.join(","), amps.join(";"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProtocolError> {
        let bad = |msg: String| ProtocolError::Malformed(msg);
        let mut label = None;
        let mut m = None;
        let mut variant = None;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
            match key {
                "label" if label.is_none() => label = Some(value.to_owned()),
                "m" if m.is_none() => {
                    m = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| bad(format!("bad pair count `{value}`")))?,
                    )
                }
                "variant" if variant.is_none() => variant = Some(value.parse::<Variant>()?),
                "pair" => pairs.push(parse_pair(value).map_err(|e| match e {
                    ProtocolError::Malformed(msg) => bad(format!("line {}: {msg}", lineno + 1)),
                    other => other,
                })?),
                _ => return Err(bad(format!("line {}: unexpected key `{key}`", lineno + 1))),
            }
        }
        let label = label.ok_or_else(|| bad("missing label".into()))?;
        let m = m.ok_or_else(|| bad("missing m".into()))?;
        let variant = variant.ok_or_else(|| bad("missing variant".into()))?;
        if pairs.is_empty() {
            return Err(bad("no pairs".into()));
        }
        if pairs.len() != m {
            return Err(ProtocolError::PairCount {
                expected: m,
                got: pairs.len(),
            });
        }
        Ok(Self {
            label,
            variant,
            pairs,
        })
    }
}

fn parse_pair(value: &str) -> Result<StateVector, ProtocolError> {
    let bad = |msg: &str| ProtocolError::Malformed(msg.to_owned());
    let (dims, amps) = value.split_once(':').ok_or_else(|| bad("missing dims"))?;
    let dims = dims
        .split(',')
        .map(|d| d.parse::<usize>().map_err(|_| bad("bad dimension")))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.first() != Some(&4) {
        return Err(bad("first subsystem must be the 4-dimensional pair slot"));
    }
    let amps = amps
        .split(';')
        .map(|pair| {
            let (re, im) = pair.split_once(',').ok_or_else(|| bad("bad amplitude"))?;
            let re = re.parse::<f64>().map_err(|_| bad("bad real part"))?;
            let im = im.parse::<f64>().map_err(|_| bad("bad imaginary part"))?;
            Ok(crate::qsim::C64::new(re, im))
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    Ok(StateVector::new(dims, amps)?)
}
