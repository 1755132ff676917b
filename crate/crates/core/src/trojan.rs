//! Auxiliary-qubit detector for multi-qubit (Trojan horse) substitutions.
//!
//! For every data position the receiver prepares an auxiliary qubit in a
//! uniformly random basis state, applies `H` to it, a CNOT from it onto each
//! qubit found at the position, then the `T` unitary on (auxiliary, qubit k)
//! for k in ascending order, and finally measures it. On a single legal
//! qubit the circuit is the identity, so the auxiliary never flips.
//!
//! Stage states are laid out with the auxiliary qubit as subsystem 0,
//! followed by the data qubits and any environment subsystems.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{basis_state, kron, Gate, Matrix, QsimError, StateVector, C64};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrojanError {
    #[error("flip statistics need at least two qubits per position, got {0}")]
    TooFewQubits(usize),
    #[error("closed form implemented for 2 <= m <= 4, got {0}")]
    OutOfRange(usize),
    #[error("tau needs a non-empty bit string")]
    EmptyBits,
    #[error("invalid bit `{0}`")]
    BadBit(char),
    #[error("subsystems {0:?} are not qubits")]
    NotQubits(Vec<usize>),
    #[error("copies must be at least 1")]
    NoCopies,
    #[error("bad attack scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// A multi-qubit register substituted for one data qubit, possibly
/// entangled with further environment subsystems that trail the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrojanState {
    state: StateVector,
    m: usize,
}

impl TrojanState {
    /// Pure `m`-qubit state from `2^m` amplitudes.
    pub fn new(amps: Vec<C64>) -> Result<Self, TrojanError> {
        let state = StateVector::qubits(amps)?;
        let m = state.dims().len();
        Ok(Self { state, m })
    }

    /// `|0...0>` on `m` qubits.
    pub fn zeros(m: usize) -> Result<Self, TrojanError> {
        if m == 0 {
            return Err(TrojanError::TooFewQubits(0));
        }
        Ok(Self {
            state: StateVector::basis(vec![2; m], 0)?,
            m,
        })
    }

    /// The first `m` subsystems of `state` are the data qubits.
    pub fn with_environment(state: StateVector, m: usize) -> Result<Self, TrojanError> {
        if m == 0 {
            return Err(TrojanError::TooFewQubits(0));
        }
        if state.dims().len() < m || state.dims()[..m].iter().any(|&d| d != 2) {
            return Err(TrojanError::NotQubits((0..m).collect()));
        }
        Ok(Self { state, m })
    }

    /// Uniformly random pure state (Gaussian amplitudes, normalised).
    pub fn random<R: Rng + ?Sized>(
        m: usize,
        complex: bool,
        rng: &mut R,
    ) -> Result<Self, TrojanError> {
        let amps = random_amplitudes(1 << m, complex, rng);
        Self::new(amps)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    fn is_pure_register(&self) -> bool {
        self.state.dims().len() == self.m
    }
}

pub(crate) fn random_amplitudes<R: Rng + ?Sized>(
    len: usize,
    complex: bool,
    rng: &mut R,
) -> Vec<C64> {
    use rand_distr::StandardNormal;
    let mut amps: Vec<C64> = (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex {
                rng.sample(StandardNormal)
            } else {
                0.0
            };
            C64::new(re, im)
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    amps
}

/// Detector stage states for one preparation of the auxiliary qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorTrace {
    pub aux_prepared: u8,
    /// After `H` on the auxiliary qubit.
    pub eta1: StateVector,
    /// After the CNOTs.
    pub eta2: StateVector,
    /// After the `T` gates.
    pub eta3: StateVector,
    /// Probability that the auxiliary is measured opposite to its preparation.
    pub p_flip: f64,
}

fn check_qubits(state: &StateVector, subs: &[usize]) -> Result<(), TrojanError> {
    if subs.iter().any(|&s| state.dims().get(s) != Some(&2)) {
        return Err(TrojanError::NotQubits(subs.to_vec()));
    }
    Ok(())
}

/// Runs the detector unitary with auxiliary `aux` on the qubits of one
/// position, applying `T` in the order the qubits are listed. Returns the
/// states after the `H`, CNOT and `T` layers.
pub fn detector_stages(
    state: &StateVector,
    aux: usize,
    position: &[usize],
) -> Result<[StateVector; 3], TrojanError> {
    check_qubits(state, &[aux])?;
    check_qubits(state, position)?;
    let eta1 = state.apply(&Gate::H.matrix(), &[aux])?;
    let cnot = Gate::Cnot.matrix();
    let eta2 = position
        .iter()
        .try_fold(eta1.clone(), |s, &q| s.apply(&cnot, &[aux, q]))?;
    let t = Gate::T.matrix();
    let eta3 = position
        .iter()
        .try_fold(eta2.clone(), |s, &q| s.apply(&t, &[aux, q]))?;
    Ok([eta1, eta2, eta3])
}

/// Final detector state only.
pub fn detector_circuit(
    state: &StateVector,
    aux: usize,
    position: &[usize],
) -> Result<StateVector, TrojanError> {
    let [_, _, eta3] = detector_stages(state, aux, position)?;
    Ok(eta3)
}

fn prepend_aux(data: &StateVector, aux: u8) -> Result<StateVector, TrojanError> {
    Ok(StateVector::basis(vec![2], usize::from(aux))?.tensor(data))
}

fn trace_with_order(
    data: &TrojanState,
    aux: u8,
    order: &[usize],
) -> Result<DetectorTrace, TrojanError> {
    let start = prepend_aux(&data.state, aux)?;
    let position: Vec<usize> = order.iter().map(|&k| k + 1).collect();
    let [eta1, eta2, eta3] = detector_stages(&start, 0, &position)?;
    let p_flip = eta3.probabilities(0)?[usize::from(1 - aux)];
    Ok(DetectorTrace {
        aux_prepared: aux,
        eta1,
        eta2,
        eta3,
        p_flip,
    })
}

/// Evolves `data` through the detector with the auxiliary prepared in `|aux>`.
pub fn trace(data: &TrojanState, aux: u8) -> Result<DetectorTrace, TrojanError> {
    let order: Vec<usize> = (0..data.m).collect();
    trace_with_order(data, aux & 1, &order)
}

/// Runs the detector once and measures the auxiliary qubit. Returns whether
/// it flipped and the post-measurement data state.
pub fn detect<R: Rng + ?Sized>(
    data: &TrojanState,
    aux: u8,
    rng: &mut R,
) -> Result<(bool, TrojanState), TrojanError> {
    let trace = trace(data, aux)?;
    let (outcome, collapsed) = trace.eta3.measure(0, rng)?;
    let post = collapsed.discard(0, outcome)?;
    Ok((
        outcome != usize::from(aux & 1),
        TrojanState {
            state: post,
            m: data.m,
        },
    ))
}

/// Exact `(p0, p1)`: `p0 = P(read 1 | prepared 0)`, `p1 = P(read 0 | prepared 1)`.
pub fn flip_probabilities(data: &TrojanState) -> Result<(f64, f64), TrojanError> {
    let order: Vec<usize> = (0..data.m).collect();
    flip_probabilities_ordered(data, &order)
}

/// [`flip_probabilities`] with the `T` layer applied in the given qubit order.
pub fn flip_probabilities_ordered(
    data: &TrojanState,
    order: &[usize],
) -> Result<(f64, f64), TrojanError> {
    if data.m < 2 {
        return Err(TrojanError::TooFewQubits(data.m));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..data.m).collect::<Vec<_>>() {
        return Err(TrojanError::Scenario(format!(
            "{order:?} is not a qubit order"
        )));
    }
    let p0 = trace_with_order(data, 0, order)?.p_flip;
    let p1 = trace_with_order(data, 1, order)?.p_flip;
    Ok((p0, p1))
}

/// Number of adjacent `11` pairs in a bit string.
pub fn tau(bits: &[u8]) -> Result<usize, TrojanError> {
    if bits.is_empty() {
        return Err(TrojanError::EmptyBits);
    }
    Ok(bits.windows(2).filter(|w| w[0] == 1 && w[1] == 1).count())
}

/// [`tau`] over a string of `0`/`1` characters.
pub fn tau_str(bits: &str) -> Result<usize, TrojanError> {
    let parsed = bits
        .chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(TrojanError::BadBit(other)),
        })
        .collect::<Result<Vec<u8>, _>>()?;
    tau(&parsed)
}

fn bits_of(value: usize, width: usize) -> Vec<u8> {
    (0..width)
        .map(|k| ((value >> (width - 1 - k)) & 1) as u8)
        .collect()
}

fn xor_bits(x: &[u8], y: &[u8]) -> Vec<u8> {
    x.iter().zip(y).map(|(p, q)| p ^ q).collect()
}

fn sign(exponent: usize) -> f64 {
    if exponent.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// The detector's output state written as signed sums over `tau`, for a
/// pure register of `2 <= m <= 4` qubits.
///
/// The amplitude of `|0>|i>` sums, over the tails `x_2..x_m`, the term
/// `[(-1)^tau(x xor i) + (-1)^(tau(x xor not i) + aux)] a_x` with
/// `x = i_1 x_2..x_m`; the `|1>|i>` amplitude uses the strings extended by
/// one bit, `x1 xor i0` and `x1 xor (not i)0`. Everything is scaled by
/// `2^{-(m+1)/2}`.
pub fn eta3_closed_form(data: &TrojanState, aux: u8) -> Result<StateVector, TrojanError> {
    let m = data.m;
    if !(2..=4).contains(&m) || !data.is_pure_register() {
        return Err(TrojanError::OutOfRange(m));
    }
    let aux = usize::from(aux & 1);
    let a = data.state.amps();
    let scale = 1.0 / ((1usize << (m + 1)) as f64).sqrt();
    let mut out = vec![C64::default(); 1 << (m + 1)];
    for idx in 0..1usize << m {
        let i = bits_of(idx, m);
        let not_i: Vec<u8> = i.iter().map(|b| 1 - b).collect();
        let i_ext: Vec<u8> = i.iter().copied().chain([0]).collect();
        let not_i_ext: Vec<u8> = not_i.iter().copied().chain([0]).collect();
        let mut zero_branch = C64::default();
        let mut one_branch = C64::default();
        for tail in 0..1usize << (m - 1) {
            let mut x = vec![i[0]];
            x.extend(bits_of(tail, m - 1));
            let x_idx = x.iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b));
            let x_ext: Vec<u8> = x.iter().copied().chain([1]).collect();
            let w0 = sign(tau(&xor_bits(&x, &i))?) + sign(tau(&xor_bits(&x, &not_i))? + aux);
            let w1 = sign(tau(&xor_bits(&x_ext, &i_ext))?)
                + sign(tau(&xor_bits(&x_ext, &not_i_ext))? + aux);
            zero_branch += a[x_idx] * w0;
            one_branch += a[x_idx] * w1;
        }
        out[idx] = zero_branch * scale;
        out[(1 << m) + idx] = one_branch * scale;
    }
    Ok(StateVector::new(vec![2; m + 1], out)?)
}

/// Runs one single-qubit detector per listed position on `state`, sampling
/// each auxiliary preparation and measurement. Returns whether any
/// auxiliary flipped, and the post-detection state.
pub fn screen<R: Rng + ?Sized>(
    state: &StateVector,
    positions: &[Vec<usize>],
    rng: &mut R,
) -> Result<(bool, StateVector), TrojanError> {
    let mut current = state.clone();
    let mut flipped = false;
    for position in positions {
        let aux_bit: u8 = rng.random_range(0..2);
        let aux = current.dims().len();
        let prepared = current.with_qubit(aux_bit);
        let out = detector_circuit(&prepared, aux, position)?;
        let (outcome, collapsed) = out.measure(aux, rng)?;
        flipped |= outcome != usize::from(aux_bit);
        current = collapsed.discard(aux, outcome)?;
    }
    Ok((flipped, current))
}

/// Exact statistics of the multi-copy experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiCopyReport {
    pub copies: usize,
    /// `P(at least one auxiliary flips)` with uniformly prepared auxiliaries.
    pub detection_probability: f64,
    /// Flip probability of the detector at each of the two positions.
    pub position_flip_probabilities: [f64; 2],
    /// Joint flip distribution indexed by the flip mask `2*first + second`.
    pub joint: [f64; 4],
}

/// Sends `copies` copies of a two-qubit state; qubit k of every copy shares
/// data position k. One detector guards each position. Exact joint
/// simulation over all four auxiliary preparations.
pub fn multi_copy_experiment(
    copies: usize,
    base: &StateVector,
) -> Result<MultiCopyReport, TrojanError> {
    let finals = multi_copy_final_states(copies, base)?;
    let mut joint = [0.0; 4];
    for (prep, state) in finals.iter().enumerate() {
        let aux = state.dims().len() - 2;
        let rho = state.reduced(&[aux, aux + 1])?;
        for outcome in 0..4 {
            let p = rho.matrix()[(outcome, outcome)].re;
            joint[outcome ^ prep] += p / 4.0;
        }
    }
    Ok(MultiCopyReport {
        copies,
        detection_probability: 1.0 - joint[0],
        position_flip_probabilities: [joint[2] + joint[3], joint[1] + joint[3]],
        joint,
    })
}

/// Final joint states, indexed by the auxiliary preparation `2*a1 + a2`.
fn multi_copy_final_states(
    copies: usize,
    base: &StateVector,
) -> Result<Vec<StateVector>, TrojanError> {
    if copies == 0 {
        return Err(TrojanError::NoCopies);
    }
    if base.dims() != [4] {
        return Err(QsimError::DimensionMismatch {
            expected: 4,
            got: base.len(),
        }
        .into());
    }
    let pair = base.split(0, &[2, 2])?;
    let mut joint = pair.clone();
    for _ in 1..copies {
        joint = joint.tensor(&pair);
    }
    let first: Vec<usize> = (0..copies).map(|c| 2 * c).collect();
    let second: Vec<usize> = (0..copies).map(|c| 2 * c + 1).collect();
    let aux = 2 * copies;
    (0..4u8)
        .map(|prep| {
            let start = joint.with_qubit(prep >> 1).with_qubit(prep & 1);
            let mid = detector_circuit(&start, aux, &first)?;
            detector_circuit(&mid, aux + 1, &second)
        })
        .collect()
}

/// Named or explicit data states for attack scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateSpec {
    /// All qubits in `|0>`.
    Zero,
    /// `|00bar>`, the conjugated basis state of code `(0, 1)`.
    Conj00,
    /// Seeded random state.
    Random { complex: bool },
    /// Explicit amplitudes (real, imaginary).
    Amplitudes(Vec<(f64, f64)>),
}

impl std::str::FromStr for StateSpec {
    type Err = TrojanError;

    /// `zero`, `conj00`, `random`, `random-complex`, or a comma-separated
    /// list of real amplitudes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(Self::Zero),
            "conj00" => Ok(Self::Conj00),
            "random" => Ok(Self::Random { complex: false }),
            "random-complex" => Ok(Self::Random { complex: true }),
            list => list
                .split(',')
                .map(|x| x.trim().parse::<f64>().map(|re| (re, 0.0)))
                .collect::<Result<Vec<_>, _>>()
                .map(Self::Amplitudes)
                .map_err(|_| TrojanError::Scenario(format!("unrecognised state `{s}`"))),
        }
    }
}

impl StateSpec {
    fn build<R: Rng + ?Sized>(
        &self,
        qubits: usize,
        rng: &mut R,
    ) -> Result<StateVector, TrojanError> {
        let amps = match self {
            StateSpec::Zero => return Ok(StateVector::basis(vec![2; qubits], 0)?),
            StateSpec::Conj00 => {
                if qubits != 2 {
                    return Err(TrojanError::Scenario("conj00 is a two-qubit state".into()));
                }
                return Ok(basis_state(0, 1)?.split(0, &[2, 2])?);
            }
            StateSpec::Random { complex } => random_amplitudes(1 << qubits, *complex, rng),
            StateSpec::Amplitudes(list) => list.iter().map(|&(re, im)| C64::new(re, im)).collect(),
        };
        if amps.len() != 1 << qubits {
            return Err(TrojanError::Scenario(format!(
                "{} amplitudes for {qubits} qubits",
                amps.len()
            )));
        }
        Ok(StateVector::normalized(vec![2; qubits], amps)?)
    }
}

/// One attack configuration: either `m` qubits at a single position, or
/// `copies` copies of a two-qubit state spread over two positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub m: usize,
    pub copies: Option<usize>,
    pub state: StateSpec,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub scenario: AttackScenario,
    /// Exact flip (single position) or detection (multi-copy) probability
    /// under a uniformly prepared auxiliary.
    pub exact_probability: f64,
    /// `(p0, p1)` for single-position runs with `m >= 2`.
    pub flip_pair: Option<(f64, f64)>,
    pub sampled_probability: Option<f64>,
    pub detections: u64,
}

impl AttackScenario {
    pub fn run(&self) -> Result<AttackReport, TrojanError> {
        let mut setup = rng::stream(self.seed, u64::MAX);
        let (exact, flip_pair, prepared) = match self.copies {
            Some(copies) => {
                let base = self.state.build(2, &mut setup)?.merge(0, 2)?;
                let report = multi_copy_experiment(copies, &base)?;
                let finals = multi_copy_final_states(copies, &base)?;
                (
                    report.detection_probability,
                    None,
                    Sampler::MultiCopy(finals),
                )
            }
            None => {
                if self.m == 0 {
                    return Err(TrojanError::TooFewQubits(0));
                }
                let data =
                    TrojanState::with_environment(self.state.build(self.m, &mut setup)?, self.m)?;
                let (exact, pair) = if self.m >= 2 {
                    let (p0, p1) = flip_probabilities(&data)?;
                    ((p0 + p1) / 2.0, Some((p0, p1)))
                } else {
                    let p = (trace(&data, 0)?.p_flip + trace(&data, 1)?.p_flip) / 2.0;
                    (p, None)
                };
                (exact, pair, Sampler::Single(data))
            }
        };
        let mut detections = 0;
        for trial in 0..self.trials {
            let mut r = rng::stream(self.seed, trial);
            if prepared.sample(&mut r)? {
                detections += 1;
            }
        }
        Ok(AttackReport {
            scenario: self.clone(),
            exact_probability: exact,
            flip_pair,
            sampled_probability: (self.trials > 0).then(|| detections as f64 / self.trials as f64),
            detections,
        })
    }
}

enum Sampler {
    Single(TrojanState),
    MultiCopy(Vec<StateVector>),
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<bool, TrojanError> {
        match self {
            Sampler::Single(data) => {
                let aux = rng.random_range(0..2);
                Ok(detect(data, aux, rng)?.0)
            }
            Sampler::MultiCopy(finals) => {
                let prep: usize = rng.random_range(0..4);
                let state = &finals[prep];
                let aux = state.dims().len() - 2;
                let (o1, collapsed) = state.measure(aux, rng)?;
                let (o2, _) = collapsed.measure(aux + 1, rng)?;
                Ok((o1 << 1 | o2) != prep)
            }
        }
    }
}

/// `T (CNOT) (H (x) I)` on (auxiliary, data).
pub fn single_qubit_detector() -> Matrix {
    Gate::T.matrix() * Gate::Cnot.matrix() * kron(&Gate::H.matrix(), &Matrix::identity(2, 2))
}
