//! Fake-signal analysis for a dishonest center probing one pair.
//!
//! The attacker sends the data half of an entangled probe
//! `|theta> = sum_{x, y} amp(x, y) |x>|y>` over data basis `x in {00..11}` and
//! ancilla basis `y in {A, B, C, D}`. The victim applies one of the eight
//! coded operations uniformly at random, leaving the attacker with
//!
//! ```text
//! w = 1/8 sum_op (op (x) I) |theta><theta| (op (x) I)^dagger
//! ```
//!
//! Its entropy bounds what the attacker can learn about the 3-bit code.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{
    basis_state, entropy_of_spectrum, kron, measure, DensityMatrix, Matrix, OpCode, QsimError,
    StateVector, Variant, C64, PSD_TOL, TOL,
};
use crate::rng;
use crate::trojan::random_amplitudes;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EavesdropError {
    #[error("probe norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("unknown amplitude name `{0}`")]
    UnknownName(char),
    #[error("projectors are not an orthonormal resolution of identity: {0}")]
    BadProjectors(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Amplitude names in storage order: `data * 4 + ancilla`.
pub const NAMES: [char; 16] = [
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'q', 'm', 'n', 'r', 's',
];

/// The attacker's probe `|theta>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FakeSignal {
    amps: [C64; 16],
}

impl FakeSignal {
    pub fn new(amps: [C64; 16]) -> Result<Self, EavesdropError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL {
            return Err(EavesdropError::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: [f64; 16]) -> Result<Self, EavesdropError> {
        Self::new(amps.map(|x| C64::new(x, 0.0)))
    }

    /// Builds a probe from named real amplitudes; unnamed ones are zero.
    pub fn from_named(values: &[(char, f64)]) -> Result<Self, EavesdropError> {
        let mut amps = [0.0; 16];
        for &(name, value) in values {
            let idx = NAMES
                .iter()
                .position(|&n| n == name)
                .ok_or(EavesdropError::UnknownName(name))?;
            amps[idx] = value;
        }
        Self::from_real(amps)
    }

    /// Parses `a=0.5,e=-0.5,...`.
    pub fn parse_named(spec: &str) -> Result<Self, EavesdropError> {
        let values = spec
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|kv| {
                let (k, v) = kv.split_once('=').ok_or(EavesdropError::UnknownName(
                    kv.chars().next().unwrap_or(' '),
                ))?;
                let mut chars = k.trim().chars();
                let (Some(name), None) = (chars.next(), chars.next()) else {
                    return Err(EavesdropError::UnknownName(k.chars().next().unwrap_or(' ')));
                };
                let value = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| EavesdropError::UnknownName(name))?;
                Ok((name, value))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_named(&values)
    }

    /// Normalised Gaussian probe.
    pub fn random<R: Rng + ?Sized>(complex: bool, rng: &mut R) -> Self {
        let v = random_amplitudes(16, complex, rng);
        Self {
            amps: std::array::from_fn(|k| v[k]),
        }
    }

    /// The eight legal probes that reach two bits: one of `|00>..|11>`
    /// on a fixed ancilla, or a conjugated-type state with one sign flipped.
    pub fn two_bit_families() -> Vec<(&'static str, FakeSignal)> {
        let h = 0.5;
        let family =
            |name, vals: &[(char, f64)]| (name, Self::from_named(vals).expect("unit norm"));
        vec![
            family("a=1", &[('a', 1.0)]),
            family("e=1", &[('e', 1.0)]),
            family("i=1", &[('i', 1.0)]),
            family("m=1", &[('m', 1.0)]),
            family("-a=e=i=m=1/2", &[('a', -h), ('e', h), ('i', h), ('m', h)]),
            family("a=-e=i=m=1/2", &[('a', h), ('e', -h), ('i', h), ('m', h)]),
            family("a=e=-i=m=1/2", &[('a', h), ('e', h), ('i', -h), ('m', h)]),
            family("a=e=i=-m=1/2", &[('a', h), ('e', h), ('i', h), ('m', -h)]),
        ]
    }

    pub fn amps(&self) -> &[C64; 16] {
        &self.amps
    }

    pub fn is_real(&self) -> bool {
        self.amps.iter().all(|a| a.im == 0.0)
    }

    /// `|theta>` over (data, ancilla).
    pub fn state(&self) -> StateVector {
        StateVector::new(vec![4, 4], self.amps.to_vec()).expect("validated on construction")
    }

    fn real(&self) -> [f64; 16] {
        self.amps.map(|a| a.re)
    }
}

impl fmt::Display for FakeSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = NAMES
            .iter()
            .zip(&self.amps)
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(n, a)| {
                if a.im == 0.0 {
                    format!("{n}={:.6}", a.re)
                } else {
                    format!("{n}={:.6}{:+.6}i", a.re, a.im)
                }
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// The eight ensemble members `(op (x) I)|theta>`, in [`OpCode::all`] order.
pub fn ensemble(theta: &FakeSignal, variant: Variant) -> Result<Vec<StateVector>, EavesdropError> {
    let state = theta.state();
    OpCode::all(variant)
        .iter()
        .map(|op| Ok(state.apply(&op.unitary(), &[0])?))
        .collect()
}

/// The attacker's post-operation state, built from the eight-term mixture.
pub fn build_w(theta: &FakeSignal, variant: Variant) -> Result<DensityMatrix, EavesdropError> {
    let members = ensemble(theta, variant)?;
    Ok(DensityMatrix::mixture(
        members.iter().map(|psi| (1.0 / 8.0, psi)),
    )?)
}

/// The four nonzero eigenvalues `(l1, l2, l3, l4)` of `w` for a real probe
/// under the cyclic alphabet, in closed form.
///
/// Writing `x_y = (amp(00,y), amp(01,y), amp(10,y), amp(11,y))` per ancilla
/// `y`, `l1 = l2` is a quarter of `sum_y (x0-x2)^2 + (x1-x3)^2`, `l3` a
/// quarter of `sum_y (x0-x1+x2-x3)^2` and `l4` a quarter of
/// `sum_y (x0+x1+x2+x3)^2`.
pub fn closed_form(theta: &FakeSignal) -> Option<[f64; 4]> {
    if !theta.is_real() {
        return None;
    }
    let r = theta.real();
    let x = |data: usize, anc: usize| r[data * 4 + anc];
    let mut l12 = 0.0;
    let mut l3 = 0.0;
    let mut l4 = 0.0;
    for y in 0..4 {
        let (x0, x1, x2, x3) = (x(0, y), x(1, y), x(2, y), x(3, y));
        l12 += (x0 - x2).powi(2) + (x1 - x3).powi(2);
        l3 += (x0 - x1 + x2 - x3).powi(2);
        l4 += (x0 + x1 + x2 + x3).powi(2);
    }
    Some([l12 / 4.0, l12 / 4.0, l3 / 4.0, l4 / 4.0])
}

/// The orthogonal change of basis that block-diagonalises `w`: rows 0..8
/// are `(|x> - |x+2>)/sqrt2` on the data, rows 8..12 the alternating
/// quarter-sum and rows 12..16 the plain quarter-sum, each tensored with the
/// ancilla basis.
pub fn x_transform() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut x = Matrix::zeros(16, 16);
    for k in 0..8 {
        x[(k, k)] = C64::new(s, 0.0);
        x[(k, k + 8)] = C64::new(-s, 0.0);
    }
    for k in 0..4 {
        for (block, signs) in [(8, [1.0, -1.0, 1.0, -1.0]), (12, [1.0; 4])] {
            for (d, sign) in signs.iter().enumerate() {
                x[(block + k, k + 4 * d)] = C64::new(0.5 * sign, 0.0);
            }
        }
    }
    x
}

/// `X w X^dagger` split along the 8/4/4 blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedBlocks {
    /// Traces of the three diagonal blocks: `l1 + l2`, `l3`, `l4`.
    pub traces: [f64; 3],
    /// Largest entry outside the diagonal blocks.
    pub off_block: f64,
}

pub fn rotated_blocks(w: &DensityMatrix) -> RotatedBlocks {
    let x = x_transform();
    let r = &x * w.matrix() * x.adjoint();
    let block = |i: usize| match i {
        0..8 => 0,
        8..12 => 1,
        _ => 2,
    };
    let mut traces = [0.0; 3];
    let mut off_block: f64 = 0.0;
    for i in 0..16 {
        traces[block(i)] += r[(i, i)].re;
        for j in 0..16 {
            if block(i) != block(j) {
                off_block = off_block.max(r[(i, j)].norm());
            }
        }
    }
    RotatedBlocks { traces, off_block }
}

/// Numeric spectrum of `w` compared against the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// All sixteen eigenvalues, descending.
    pub numeric: Vec<f64>,
    /// `(l1, l2, l3, l4)`; absent for complex probes.
    pub closed_form: Option<[f64; 4]>,
    /// Max distance between the sorted numeric spectrum and the closed-form
    /// values padded with twelve zeros.
    pub max_deviation: Option<f64>,
    pub entropy_bits: f64,
    pub blocks: RotatedBlocks,
}

/// Spectrum of the cyclic-alphabet `w` with the closed-form comparison.
pub fn closed_form_eigs(theta: &FakeSignal) -> Result<SpectrumReport, EavesdropError> {
    spectrum(theta, Variant::Cyclic)
}

/// Spectrum report for either alphabet. The closed form is only compared
/// for the cyclic alphabet and real probes.
pub fn spectrum(theta: &FakeSignal, variant: Variant) -> Result<SpectrumReport, EavesdropError> {
    let w = build_w(theta, variant)?;
    let numeric = w.eigenvalues();
    let entropy_bits = entropy_of_spectrum(&numeric)?;
    let closed = closed_form(theta).filter(|_| variant == Variant::Cyclic);
    let max_deviation = closed.map(|l| {
        let mut expected: Vec<f64> = l.iter().copied().chain([0.0; 12]).collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        numeric
            .iter()
            .zip(&expected)
            .map(|(n, e)| (n - e).abs())
            .fold(0.0, f64::max)
    });
    Ok(SpectrumReport {
        numeric,
        closed_form: closed,
        max_deviation,
        entropy_bits,
        blocks: rotated_blocks(&w),
    })
}

/// `S(w)` in bits, the ceiling on the attacker's information.
pub fn info_bound(theta: &FakeSignal, variant: Variant) -> Result<f64, EavesdropError> {
    Ok(build_w(theta, variant)?.von_neumann_entropy()?)
}

/// Result of the measure-and-resend strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterceptResendReport {
    pub variant: Variant,
    /// `0` for the exact enumeration.
    pub trials: u64,
    pub error_probability: f64,
    /// One standard error of the sampled estimate (zero when exact).
    pub sigma: f64,
    pub mutual_information_bits: f64,
}

fn entropy_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Shannon mutual information of a joint table `joint[x][y]`.
fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let total: f64 = joint.iter().flatten().sum();
    let px: Vec<f64> = joint
        .iter()
        .map(|row| row.iter().sum::<f64>() / total)
        .collect();
    let ny = joint.first().map_or(0, Vec::len);
    let py: Vec<f64> = (0..ny)
        .map(|y| joint.iter().map(|row| row[y]).sum::<f64>() / total)
        .collect();
    let hxy = entropy_bits(joint.iter().flatten().map(|&p| p / total));
    (entropy_bits(px) + entropy_bits(py) - hxy).max(0.0)
}

/// The attacker sends `|00>`, the victim applies a uniform coded operation,
/// the attacker measures computationally and resends the observed basis
/// state. The next holder checks the resent state against the intended one.
///
/// `trials == 0` enumerates all eight operations and four outcomes exactly;
/// otherwise each trial draws from its own stream of `seed`.
pub fn intercept_resend(
    variant: Variant,
    trials: u64,
    seed: u64,
) -> Result<InterceptResendReport, EavesdropError> {
    let probe = basis_state(0, 0)?;
    let ops = OpCode::all(variant);
    let intended: Vec<StateVector> = ops
        .iter()
        .map(|op| probe.apply(&op.unitary(), &[0]))
        .collect::<Result<_, _>>()?;
    let resent: Vec<StateVector> = (0..4u8)
        .map(|y| basis_state(y, 0))
        .collect::<Result<_, _>>()?;

    if trials == 0 {
        let mut joint = vec![vec![0.0; 4]; 8];
        let mut error = 0.0;
        for (k, psi) in intended.iter().enumerate() {
            for (y, r) in resent.iter().enumerate() {
                let p = psi.fidelity(r);
                joint[k][y] = p / 8.0;
                error += p / 8.0 * (1.0 - p);
            }
        }
        return Ok(InterceptResendReport {
            variant,
            trials,
            error_probability: error,
            sigma: 0.0,
            mutual_information_bits: mutual_information(&joint),
        });
    }

    let mut joint = vec![vec![0.0; 4]; 8];
    let mut errors = 0u64;
    for trial in 0..trials {
        let mut r = rng::stream(seed, trial);
        let k = r.random_range(0..8);
        let op = ops[k];
        let (y, _) = measure(&intended[k], 0, 0, &mut r)?;
        joint[k][usize::from(y)] += 1.0;
        // The next holder measures in the intended basis and expects `a`.
        let (seen, _) = measure(&resent[usize::from(y)], 0, op.b(), &mut r)?;
        if seen != intended_label(op) {
            errors += 1;
        }
    }
    let p = errors as f64 / trials as f64;
    Ok(InterceptResendReport {
        variant,
        trials,
        error_probability: p,
        sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        mutual_information_bits: mutual_information(&joint),
    })
}

/// Outcome an honest measurement in basis `b` returns on `op |00>`.
fn intended_label(op: OpCode) -> u8 {
    // Both alphabets send |00> to |a> and commute with V, so op|00> = V^b|a>.
    op.a()
}

/// Checks that `projectors` are orthogonal projectors summing to identity.
fn validate_projectors(projectors: &[Matrix], dim: usize) -> Result<(), EavesdropError> {
    let bad = |msg: String| Err(EavesdropError::BadProjectors(msg));
    if projectors.is_empty() {
        return bad("empty set".into());
    }
    let mut sum = Matrix::zeros(dim, dim);
    for (i, p) in projectors.iter().enumerate() {
        if p.shape() != (dim, dim) {
            return bad(format!("projector {i} has shape {:?}", p.shape()));
        }
        if crate::qsim::max_deviation(&(p * p), p) > 1e-9
            || crate::qsim::max_deviation(&p.adjoint(), p) > 1e-9
        {
            return bad(format!("projector {i} is not an orthogonal projector"));
        }
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            if (p * q).iter().any(|z| z.norm() > 1e-9) {
                return bad(format!("projectors {i} and {j} overlap"));
            }
        }
        sum += p;
    }
    if crate::qsim::max_deviation(&sum, &Matrix::identity(dim, dim)) > 1e-9 {
        return bad("projectors do not sum to identity".into());
    }
    Ok(())
}

/// Shannon information between the victim's uniform 3-bit code and the
/// outcome of a projective measurement on the returned probe.
pub fn strategy_mi(
    projectors: &[Matrix],
    theta: &FakeSignal,
    variant: Variant,
) -> Result<f64, EavesdropError> {
    validate_projectors(projectors, 16)?;
    let members = ensemble(theta, variant)?;
    let joint: Vec<Vec<f64>> = members
        .iter()
        .map(|psi| {
            let v = nalgebra::DVector::from_column_slice(psi.amps());
            projectors
                .iter()
                .map(|p| ((v.adjoint() * p * &v)[(0, 0)].re / 8.0).max(0.0))
                .collect()
        })
        .collect();
    Ok(mutual_information(&joint))
}

/// Projectors onto the data basis (`0` computational, `1` conjugated),
/// identity on the ancilla.
pub fn data_basis_projectors(basis_bit: u8) -> Result<Vec<Matrix>, EavesdropError> {
    (0..4u8)
        .map(|y| {
            let psi = basis_state(y, basis_bit)?;
            let v = nalgebra::DVector::from_column_slice(psi.amps());
            Ok(kron(&(&v * v.adjoint()), &Matrix::identity(4, 4)))
        })
        .collect()
}

/// Parameters of a random-probe sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub probes: u64,
    pub seed: u64,
    pub variant: Variant,
    pub complex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub index: u64,
    pub entropy_bits: f64,
    pub max_deviation: Option<f64>,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub records: Vec<ProbeRecord>,
    pub max_entropy: f64,
    pub min_entropy: f64,
    pub argmax_probe: String,
    pub max_deviation: Option<f64>,
}

/// Evaluates `config.probes` random probes; probe `k` draws from stream `k`.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport, EavesdropError> {
    let mut records = Vec::with_capacity(config.probes as usize);
    let mut best: Option<(f64, FakeSignal)> = None;
    for index in 0..config.probes {
        let mut r = rng::stream(config.seed, index);
        let theta = FakeSignal::random(config.complex, &mut r);
        let report = spectrum(&theta, config.variant)?;
        if best.as_ref().is_none_or(|(e, _)| report.entropy_bits > *e) {
            best = Some((report.entropy_bits, theta));
        }
        records.push(ProbeRecord {
            index,
            entropy_bits: report.entropy_bits,
            max_deviation: report.max_deviation,
            min_eigenvalue: report.numeric.last().copied().unwrap_or(0.0),
            trace: report.numeric.iter().sum(),
        });
    }
    let max_entropy = records
        .iter()
        .map(|r| r.entropy_bits)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_entropy = records
        .iter()
        .map(|r| r.entropy_bits)
        .fold(f64::INFINITY, f64::min);
    let max_deviation = records
        .iter()
        .filter_map(|r| r.max_deviation)
        .reduce(f64::max);
    Ok(SweepReport {
        config: config.clone(),
        records,
        max_entropy,
        min_entropy,
        argmax_probe: best.map(|(_, t)| t.to_string()).unwrap_or_default(),
        max_deviation,
    })
}

/// A probe invariant, up to phase, under all eight operations of either
/// alphabet: the uniform data superposition on a fixed ancilla.
pub fn invariant_probe() -> FakeSignal {
    FakeSignal::from_named(&[('a', 0.5), ('e', 0.5), ('i', 0.5), ('m', 0.5)]).expect("unit norm")
}

/// Eigenvalues within [`PSD_TOL`] of zero count as zero.
pub fn rank(report: &SpectrumReport) -> usize {
    report.numeric.iter().filter(|&&l| l > PSD_TOL).count()
}
