//! Exact state-vector simulation of the two-qubit operator alphabet.
//!
//! States are dense complex vectors over a tensor product of subsystems.
//! Subsystem 0 is the most significant digit of the flat index, and inside a
//! two-qubit slot the first qubit is the high bit, so `|i1 i2>` has index
//! `2*i1 + i2`.
//!
//! The coded operations are `U(a) V(b)` with `V` the two-qubit Grover
//! diffusion and `U` either the order-four cyclic shift (`Variant::Cyclic`)
//! or the bit-flip `X^a1 (x) X^a2` (`Variant::Xor`).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Matrix = DMatrix<C64>;

/// Normalisation and Hermiticity tolerance.
pub const TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as numerical noise.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("{got} amplitudes do not fit dimensions {dims:?}")]
    Length { dims: Vec<usize>, got: usize },
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("expected dimension {expected}, found {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no subsystem {0}")]
    BadSubsystem(usize),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("invalid operation code a={a}, b={b}")]
    BadCode { a: u8, b: u8 },
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("matrix deviates from Hermitian by {0}")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    BadTrace(f64),
    #[error("eigenvalue {0} below zero")]
    NotPositive(f64),
    #[error("outcome has zero probability")]
    ZeroProbability,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn real_matrix(n: usize, entries: &[f64]) -> Matrix {
    Matrix::from_row_iterator(n, n, entries.iter().map(|&x| c(x)))
}

/// How the permutation part of a coded operation is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `U^a` with the cyclic shift `|x> -> |x+1 mod 4>`.
    Cyclic,
    /// `X^a1 (x) X^a2`, composing by XOR like the recombined shares.
    #[default]
    Xor,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Cyclic, Variant::Xor];

    /// The permutation operator for exponent/mask `a`.
    pub fn u(self, a: u8) -> Matrix {
        match self {
            Variant::Cyclic => {
                let u = Gate::UCyclic.matrix();
                (0..a).fold(Matrix::identity(4, 4), |acc, _| &u * acc)
            }
            Variant::Xor => Gate::UXor(a).matrix(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Cyclic => "cyclic",
            Variant::Xor => "xor",
        })
    }
}

impl FromStr for Variant {
    type Err = QsimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cyclic" => Ok(Variant::Cyclic),
            "xor" => Ok(Variant::Xor),
            other => Err(QsimError::UnknownVariant(other.to_owned())),
        }
    }
}

/// Named fixed gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    /// Two-qubit Grover diffusion, `J/2 - I`.
    V,
    /// Cyclic shift `|x> -> |x+1 mod 4>`.
    UCyclic,
    /// Bit flip `|x> -> |x xor a>`.
    UXor(u8),
    H,
    /// Control on the first (high) qubit.
    Cnot,
    /// The detector's recombination unitary on (auxiliary, data).
    T,
}

impl Gate {
    pub fn matrix(self) -> Matrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Gate::V => real_matrix(
                4,
                &[
                    -0.5, 0.5, 0.5, 0.5, //
                    0.5, -0.5, 0.5, 0.5, //
                    0.5, 0.5, -0.5, 0.5, //
                    0.5, 0.5, 0.5, -0.5,
                ],
            ),
            Gate::UCyclic => real_matrix(
                4,
                &[
                    0.0, 0.0, 0.0, 1.0, //
                    1.0, 0.0, 0.0, 0.0, //
                    0.0, 1.0, 0.0, 0.0, //
                    0.0, 0.0, 1.0, 0.0,
                ],
            ),
            Gate::UXor(a) => {
                let a = usize::from(a & 0b11);
                Matrix::from_fn(4, 4, |row, col| c(f64::from(u8::from(row == col ^ a))))
            }
            Gate::H => real_matrix(2, &[s, s, s, -s]),
            Gate::Cnot => real_matrix(
                4,
                &[
                    1.0, 0.0, 0.0, 0.0, //
                    0.0, 1.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, 1.0, //
                    0.0, 0.0, 1.0, 0.0,
                ],
            ),
            Gate::T => real_matrix(
                4,
                &[
                    s, 0.0, 0.0, s, //
                    0.0, s, s, 0.0, //
                    s, 0.0, 0.0, -s, //
                    0.0, s, -s, 0.0,
                ],
            ),
        }
    }
}

impl FromStr for Gate {
    type Err = QsimError;

    /// Accepts `V`, `U`/`U_cyclic`, `U_xor(a)`, `H`, `CNOT`, `T`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || QsimError::UnknownGate(s.to_owned());
        match s {
            "V" => Ok(Gate::V),
            "U" | "U_cyclic" => Ok(Gate::UCyclic),
            "H" => Ok(Gate::H),
            "CNOT" => Ok(Gate::Cnot),
            "T" => Ok(Gate::T),
            _ => {
                let a = s
                    .strip_prefix("U_xor(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(unknown)?;
                let a: u8 = a.parse().map_err(|_| unknown())?;
                if a > 3 {
                    return Err(unknown());
                }
                Ok(Gate::UXor(a))
            }
        }
    }
}

/// Matrix of a named gate.
pub fn gate(name: &str) -> Result<Matrix, QsimError> {
    Ok(name.parse::<Gate>()?.matrix())
}

/// One of the eight coded operations `U(a) V(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCode {
    a: u8,
    b: u8,
    variant: Variant,
}

impl OpCode {
    pub fn new(a: u8, b: u8, variant: Variant) -> Result<Self, QsimError> {
        if a > 3 || b > 1 {
            return Err(QsimError::BadCode { a, b });
        }
        Ok(Self { a, b, variant })
    }

    /// All eight operations in the order `U(00)V(0), ..., U(11)V(1)`.
    pub fn all(variant: Variant) -> [OpCode; 8] {
        std::array::from_fn(|k| OpCode {
            a: (k % 4) as u8,
            b: (k / 4) as u8,
            variant,
        })
    }

    pub fn a(&self) -> u8 {
        self.a
    }

    pub fn b(&self) -> u8 {
        self.b
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Three-bit code `a << 1 | b`.
    pub fn index(&self) -> usize {
        usize::from(self.a << 1 | self.b)
    }

    pub fn unitary(&self) -> Matrix {
        let v = if self.b == 1 {
            Gate::V.matrix()
        } else {
            Matrix::identity(4, 4)
        };
        self.variant.u(self.a) * v
    }
}

/// Offsets of every multi-index over `subs` (first listed is most
/// significant) within a flat vector with the given strides.
fn offsets(dims: &[usize], strides: &[usize], subs: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subs {
        out = out
            .iter()
            .flat_map(|&base| (0..dims[s]).map(move |d| base + d * strides[s]))
            .collect();
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

/// A normalised pure state over a product of subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, QsimError> {
        let state = Self::unchecked(dims, amps)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > TOL {
            return Err(QsimError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Normalises the given amplitudes.
    pub fn normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, QsimError> {
        let mut state = Self::unchecked(dims, amps)?;
        let norm = state.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QsimError::NotNormalized(norm));
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, QsimError> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != amps.len() {
            return Err(QsimError::Length {
                dims,
                got: amps.len(),
            });
        }
        Ok(Self { dims, amps })
    }

    /// Computational basis state `index`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self, QsimError> {
        let len = dims.iter().product::<usize>();
        let mut amps = vec![C64::default(); len];
        *amps.get_mut(index).ok_or(QsimError::Length {
            dims: dims.clone(),
            got: index,
        })? = c(1.0);
        Self::new(dims, amps)
    }

    /// An `n`-qubit register.
    pub fn qubits(amps: Vec<C64>) -> Result<Self, QsimError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || n == 0 {
            return Err(QsimError::Length {
                dims: vec![],
                got: amps.len(),
            });
        }
        Self::new(vec![2; n], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self (x) other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        let amps = self
            .amps
            .iter()
            .flat_map(|x| other.amps.iter().map(move |y| x * y))
            .collect();
        Self { dims, amps }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Largest amplitude-wise distance; infinite for mismatched shapes.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn check_subsystem(&self, s: usize) -> Result<(), QsimError> {
        if s >= self.dims.len() {
            return Err(QsimError::BadSubsystem(s));
        }
        Ok(())
    }

    fn rest(&self, subs: &[usize]) -> Vec<usize> {
        (0..self.dims.len()).filter(|s| !subs.contains(s)).collect()
    }

    /// Applies `op` to the listed subsystems (first listed is the most
    /// significant index of `op`), identity elsewhere.
    pub fn apply(&self, op: &Matrix, targets: &[usize]) -> Result<Self, QsimError> {
        for (i, &t) in targets.iter().enumerate() {
            self.check_subsystem(t)?;
            if targets[..i].contains(&t) {
                return Err(QsimError::BadSubsystem(t));
            }
        }
        let dim: usize = targets.iter().map(|&t| self.dims[t]).product();
        if op.nrows() != dim || op.ncols() != dim {
            return Err(QsimError::DimensionMismatch {
                expected: dim,
                got: op.nrows(),
            });
        }
        let strides = strides(&self.dims);
        let inner = offsets(&self.dims, &strides, targets);
        let outer = offsets(&self.dims, &strides, &self.rest(targets));
        let mut amps = self.amps.clone();
        let mut buf = vec![C64::default(); dim];
        for base in outer {
            for (k, off) in inner.iter().enumerate() {
                buf[k] = self.amps[base + off];
            }
            for (row, off) in inner.iter().enumerate() {
                amps[base + off] = (0..dim).map(|col| op[(row, col)] * buf[col]).sum();
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// Born probabilities of measuring subsystem `s` computationally.
    pub fn probabilities(&self, s: usize) -> Result<Vec<f64>, QsimError> {
        self.check_subsystem(s)?;
        let strides = strides(&self.dims);
        Ok((0..self.dims[s])
            .map(|d| {
                self.amps
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i / strides[s]) % self.dims[s] == d)
                    .map(|(_, a)| a.norm_sqr())
                    .sum()
            })
            .collect())
    }

    /// Projects subsystem `s` onto `outcome`, returning the outcome
    /// probability and the renormalised post-measurement state.
    pub fn project(&self, s: usize, outcome: usize) -> Result<(f64, Self), QsimError> {
        self.check_subsystem(s)?;
        let strides = strides(&self.dims);
        let d = self.dims[s];
        let amps: Vec<C64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if (i / strides[s]) % d == outcome {
                    a
                } else {
                    C64::default()
                }
            })
            .collect();
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Err(QsimError::ZeroProbability);
        }
        let state = Self::normalized(self.dims.clone(), amps)?;
        Ok((p, state))
    }

    /// Samples a computational-basis measurement of subsystem `s`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        s: usize,
        rng: &mut R,
    ) -> Result<(usize, Self), QsimError> {
        let probs = self.probabilities(s)?;
        let outcome = sample(&probs, rng);
        let (_, state) = self.project(s, outcome)?;
        Ok((outcome, state))
    }

    /// Removes subsystem `s`, keeping the branch where it reads `outcome`.
    pub fn discard(&self, s: usize, outcome: usize) -> Result<Self, QsimError> {
        self.check_subsystem(s)?;
        if self.dims.len() == 1 {
            return Err(QsimError::BadSubsystem(s));
        }
        let strides = strides(&self.dims);
        let rest = self.rest(&[s]);
        let amps = offsets(&self.dims, &strides, &rest)
            .into_iter()
            .map(|off| self.amps[off + outcome * strides[s]])
            .collect();
        let dims = rest.iter().map(|&r| self.dims[r]).collect();
        Self::normalized(dims, amps)
    }

    /// Appends a qubit prepared in `|bit>`.
    pub fn with_qubit(&self, bit: u8) -> Self {
        let q = Self {
            dims: vec![2],
            amps: if bit == 0 {
                vec![c(1.0), c(0.0)]
            } else {
                vec![c(0.0), c(1.0)]
            },
        };
        self.tensor(&q)
    }

    /// Reinterprets subsystem `s` as the product `parts`.
    pub fn split(&self, s: usize, parts: &[usize]) -> Result<Self, QsimError> {
        self.check_subsystem(s)?;
        let product: usize = parts.iter().product();
        if product != self.dims[s] {
            return Err(QsimError::DimensionMismatch {
                expected: self.dims[s],
                got: product,
            });
        }
        let mut dims = self.dims[..s].to_vec();
        dims.extend_from_slice(parts);
        dims.extend_from_slice(&self.dims[s + 1..]);
        Ok(Self {
            dims,
            amps: self.amps.clone(),
        })
    }

    /// Fuses subsystems `s..s+count` into one.
    pub fn merge(&self, s: usize, count: usize) -> Result<Self, QsimError> {
        if count == 0 || s + count > self.dims.len() {
            return Err(QsimError::BadSubsystem(s + count));
        }
        let mut dims = self.dims[..s].to_vec();
        dims.push(self.dims[s..s + count].iter().product());
        dims.extend_from_slice(&self.dims[s + count..]);
        Ok(Self {
            dims,
            amps: self.amps.clone(),
        })
    }

    pub fn density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix {
            entries: &v * v.adjoint(),
        }
    }

    /// Reduced state on `keep` (in the listed order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix, QsimError> {
        for &k in keep {
            self.check_subsystem(k)?;
        }
        let strides = strides(&self.dims);
        let kept = offsets(&self.dims, &strides, keep);
        let traced = offsets(&self.dims, &strides, &self.rest(keep));
        let dim = kept.len();
        let entries = Matrix::from_fn(dim, dim, |i, j| {
            traced
                .iter()
                .map(|&r| self.amps[kept[i] + r] * self.amps[kept[j] + r].conj())
                .sum()
        });
        Ok(DensityMatrix { entries })
    }
}

fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return k;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// `|psi_{a,b}>`: `|a>` when `b = 0`, the conjugated `V|a>` when `b = 1`.
pub fn basis_state(a: u8, b: u8) -> Result<StateVector, QsimError> {
    if a > 3 || b > 1 {
        return Err(QsimError::BadCode { a, b });
    }
    let state = StateVector::basis(vec![4], usize::from(a))?;
    if b == 0 {
        Ok(state)
    } else {
        state.apply(&Gate::V.matrix(), &[0])
    }
}

fn check_slot(state: &StateVector, slot: usize) -> Result<(), QsimError> {
    state.check_subsystem(slot)?;
    if state.dims[slot] != 4 {
        return Err(QsimError::DimensionMismatch {
            expected: 4,
            got: state.dims[slot],
        });
    }
    Ok(())
}

/// Applies the coded operation to a four-dimensional slot.
pub fn apply_op(state: &StateVector, slot: usize, code: OpCode) -> Result<StateVector, QsimError> {
    check_slot(state, slot)?;
    state.apply(&code.unitary(), &[slot])
}

/// Outcome distribution of measuring `slot` in the computational
/// (`basis_bit = 0`) or conjugated (`basis_bit = 1`) basis.
pub fn outcome_probabilities(
    state: &StateVector,
    slot: usize,
    basis_bit: u8,
) -> Result<Vec<f64>, QsimError> {
    check_slot(state, slot)?;
    rotate_basis(state, slot, basis_bit)?.probabilities(slot)
}

fn rotate_basis(state: &StateVector, slot: usize, basis_bit: u8) -> Result<StateVector, QsimError> {
    match basis_bit {
        0 => Ok(state.clone()),
        1 => state.apply(&Gate::V.matrix(), &[slot]),
        _ => Err(QsimError::BadCode { a: 0, b: basis_bit }),
    }
}

/// Measures `slot` in the chosen basis. Basis 1 is realised as `V` followed
/// by a computational measurement; the collapsed state is returned in the
/// measured basis.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    slot: usize,
    basis_bit: u8,
    rng: &mut R,
) -> Result<(u8, StateVector), QsimError> {
    check_slot(state, slot)?;
    let rotated = rotate_basis(state, slot, basis_bit)?;
    let (outcome, collapsed) = rotated.measure(slot, rng)?;
    Ok((outcome as u8, rotate_basis(&collapsed, slot, basis_bit)?))
}

/// A density operator, Hermitian with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace. Positivity is checked where the
    /// spectrum is consumed.
    pub fn new(entries: Matrix) -> Result<Self, QsimError> {
        if !entries.is_square() {
            return Err(QsimError::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let skew = max_deviation(&entries, &entries.adjoint());
        if skew > TOL {
            return Err(QsimError::NotHermitian(skew));
        }
        let trace = entries.trace();
        if (trace - c(1.0)).norm() > TOL {
            return Err(QsimError::BadTrace(trace.re));
        }
        Ok(Self { entries })
    }

    /// `sum_k w_k |psi_k><psi_k|`.
    pub fn mixture<'a>(
        terms: impl IntoIterator<Item = (f64, &'a StateVector)>,
    ) -> Result<Self, QsimError> {
        let mut acc: Option<Matrix> = None;
        for (w, psi) in terms {
            let term = psi.density().entries * c(w);
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        Self::new(acc.ok_or(QsimError::BadTrace(0.0))?)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        // Exactly Hermitian input keeps the solver on its real-spectrum path.
        let hermitian = (&self.entries + self.entries.adjoint()) * c(0.5);
        let mut eig: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        eig
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// `-sum lambda log2 lambda`, treating `0 log 0` as zero.
    pub fn von_neumann_entropy(&self) -> Result<f64, QsimError> {
        entropy_of_spectrum(&self.eigenvalues())
    }
}

/// Entropy in bits of a spectrum; eigenvalues within [`PSD_TOL`] of zero
/// are clamped.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64, QsimError> {
    if let Some(&min) = eigenvalues.iter().min_by(|x, y| x.total_cmp(y)) {
        if min < -PSD_TOL {
            return Err(QsimError::NotPositive(min));
        }
    }
    Ok(eigenvalues
        .iter()
        .filter(|&&l| l > PSD_TOL)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, QsimError> {
    rho.von_neumann_entropy()
}

/// `max |A - B|` entrywise.
pub fn max_deviation(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `A (x) B`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// The algebraic identities the protocol relies on, each with its
/// entrywise deviation from exact equality.
pub fn identity_checks() -> Vec<(String, f64)> {
    let id = |n| Matrix::identity(n, n);
    let v = Gate::V.matrix();
    let u = Gate::UCyclic.matrix();
    let mut checks = vec![
        ("V^2 = I".to_owned(), max_deviation(&(&v * &v), &id(4))),
        (
            "U_cyclic^4 = I".to_owned(),
            max_deviation(&(&u * &u * &u * &u), &id(4)),
        ),
        (
            "U_cyclic V = V U_cyclic".to_owned(),
            max_deviation(&(&u * &v), &(&v * &u)),
        ),
    ];
    for a in 0..4 {
        let x = Gate::UXor(a).matrix();
        checks.push((
            format!("U_xor({a})^2 = I"),
            max_deviation(&(&x * &x), &id(4)),
        ));
        checks.push((
            format!("U_xor({a}) V = V U_xor({a})"),
            max_deviation(&(&x * &v), &(&v * &x)),
        ));
    }
    let circuit = Gate::T.matrix() * Gate::Cnot.matrix() * kron(&Gate::H.matrix(), &id(2));
    checks.push((
        "T CNOT (H x I) = I".to_owned(),
        max_deviation(&circuit, &id(4)),
    ));
    let gates = [Gate::V, Gate::UCyclic, Gate::H, Gate::Cnot, Gate::T]
        .into_iter()
        .chain((0..4).map(Gate::UXor));
    for g in gates {
        let m = g.matrix();
        let n = m.nrows();
        checks.push((
            format!("{g:?} unitary"),
            max_deviation(&(m.adjoint() * &m), &id(n)),
        ));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vec4(xs: [f64; 4]) -> StateVector {
        StateVector::new(vec![4], xs.iter().map(|&x| c(x)).collect()).unwrap()
    }

    fn id(n: usize) -> Matrix {
        Matrix::identity(n, n)
    }

    #[test]
    fn basis_states() {
        assert_eq!(basis_state(0, 0).unwrap(), vec4([1.0, 0.0, 0.0, 0.0]));
        assert!(
            basis_state(0, 1)
                .unwrap()
                .max_abs_diff(&vec4([-0.5, 0.5, 0.5, 0.5]))
                < TOL
        );
        assert!(
            basis_state(3, 1)
                .unwrap()
                .max_abs_diff(&vec4([0.5, 0.5, 0.5, -0.5]))
                < TOL
        );
        assert!(basis_state(4, 0).is_err());
    }

    #[test]
    fn gate_examples() {
        let zero = basis_state(0, 0).unwrap();
        let v0 = zero.apply(&gate("V").unwrap(), &[0]).unwrap();
        assert!(v0.max_abs_diff(&vec4([-0.5, 0.5, 0.5, 0.5])) < TOL);
        let u11 = basis_state(3, 0)
            .unwrap()
            .apply(&gate("U").unwrap(), &[0])
            .unwrap();
        assert_eq!(u11, zero);
        let flipped = basis_state(1, 0)
            .unwrap()
            .apply(&gate("U_xor(2)").unwrap(), &[0])
            .unwrap();
        assert_eq!(flipped, basis_state(3, 0).unwrap());
        assert!(matches!(gate("W"), Err(QsimError::UnknownGate(_))));
        assert!(gate("U_xor(4)").is_err());
    }

    #[test]
    fn operator_identities() {
        let v = Gate::V.matrix();
        let u = Gate::UCyclic.matrix();
        assert!(max_deviation(&(&v * &v), &id(4)) < TOL);
        assert!(max_deviation(&(&u * &u * &u * &u), &id(4)) < TOL);
        assert!(max_deviation(&(&v * &u), &(&u * &v)) < TOL);
        for a in 0..4 {
            let x = Gate::UXor(a).matrix();
            assert!(max_deviation(&(&x * &x), &id(4)) < TOL);
            assert!(max_deviation(&(&v * &x), &(&x * &v)) < TOL);
        }
        let circuit = Gate::T.matrix() * Gate::Cnot.matrix() * kron(&Gate::H.matrix(), &id(2));
        assert!(max_deviation(&circuit, &id(4)) < TOL);
    }

    #[test]
    fn identity_checks_all_hold() {
        let checks = identity_checks();
        assert_eq!(checks.len(), 3 + 8 + 1 + 9);
        for (name, deviation) in checks {
            assert!(deviation < TOL, "{name}: {deviation}");
        }
    }

    #[test]
    fn every_gate_is_unitary() {
        let gates = [Gate::V, Gate::UCyclic, Gate::H, Gate::Cnot, Gate::T]
            .into_iter()
            .chain((0..4).map(Gate::UXor));
        for g in gates {
            let m = g.matrix();
            let n = m.nrows();
            assert!(max_deviation(&(m.adjoint() * &m), &id(n)) < TOL, "{g:?}");
        }
    }

    #[test]
    fn cyclic_shift_acts_on_conjugated_basis() {
        let u = Gate::UCyclic.matrix();
        for x in 0..4u8 {
            let shifted = basis_state(x, 1).unwrap().apply(&u, &[0]).unwrap();
            let expected = basis_state((x + 1) % 4, 1).unwrap();
            assert!(shifted.max_abs_diff(&expected) < TOL);
        }
    }

    #[test]
    fn apply_op_examples() {
        let zero = basis_state(0, 0).unwrap();
        let code = |a, b| OpCode::new(a, b, Variant::Cyclic).unwrap();
        assert_eq!(
            apply_op(&zero, 0, code(1, 0)).unwrap(),
            basis_state(1, 0).unwrap()
        );
        let undone = apply_op(&basis_state(0, 1).unwrap(), 0, code(0, 1)).unwrap();
        assert!(undone.max_abs_diff(&zero) < TOL);
        // U^2 V |00> = U^2 |00bar> = |10bar>
        let got = apply_op(&zero, 0, code(2, 1)).unwrap();
        assert!(got.max_abs_diff(&basis_state(2, 1).unwrap()) < TOL);

        let q = StateVector::qubits(vec![c(1.0), c(0.0)]).unwrap();
        assert!(matches!(
            apply_op(&q, 0, code(0, 0)),
            Err(QsimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_targets_one_slot_of_a_product() {
        let a = basis_state(1, 0).unwrap();
        let b = basis_state(2, 1).unwrap();
        let joint = a.tensor(&b);
        let code = OpCode::new(3, 1, Variant::Xor).unwrap();
        let got = apply_op(&joint, 1, code).unwrap();
        let expected = a.tensor(&apply_op(&b, 0, code).unwrap());
        assert!(got.max_abs_diff(&expected) < TOL);
    }

    #[test]
    fn measurement_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (o, post) = measure(&basis_state(1, 0).unwrap(), 0, 0, &mut rng).unwrap();
        assert_eq!(o, 0b01);
        assert_eq!(post, basis_state(1, 0).unwrap());
        let conj = basis_state(2, 1).unwrap();
        assert!((outcome_probabilities(&conj, 0, 1).unwrap()[2] - 1.0).abs() < TOL);
        let (o, post) = measure(&conj, 0, 1, &mut rng).unwrap();
        assert_eq!(o, 0b10);
        assert!(post.fidelity(&conj) > 1.0 - TOL);
        let p = outcome_probabilities(&basis_state(0, 1).unwrap(), 0, 0).unwrap();
        assert!(p.iter().all(|&x| (x - 0.25).abs() < TOL));
    }

    #[test]
    fn sampled_frequencies_follow_born_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let psi =
            StateVector::normalized(vec![4], vec![c(1.0), C64::new(0.0, 2.0), c(-1.0), c(0.5)])
                .unwrap();
        let probs = outcome_probabilities(&psi, 0, 0).unwrap();
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            counts[measure(&psi, 0, 0, &mut rng).unwrap().0 as usize] += 1;
        }
        for (k, &p) in probs.iter().enumerate() {
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let freq = counts[k] as f64 / trials as f64;
            assert!(
                (freq - p).abs() <= 4.0 * sigma,
                "outcome {k}: {freq} vs {p}"
            );
        }
    }

    #[test]
    fn entropy_examples() {
        let pure = basis_state(2, 1).unwrap().density();
        assert!(pure.von_neumann_entropy().unwrap().abs() < 1e-9);
        let mixed = DensityMatrix::new(id(4) * c(0.25)).unwrap();
        assert!((mixed.von_neumann_entropy().unwrap() - 2.0).abs() < 1e-12);
        let half = DensityMatrix::mixture([
            (0.5, &basis_state(0, 0).unwrap()),
            (0.5, &basis_state(1, 0).unwrap()),
        ])
        .unwrap();
        assert!((half.von_neumann_entropy().unwrap() - 1.0).abs() < 1e-12);

        let mut bad = id(2) * c(0.5);
        bad[(0, 0)] = c(1.5);
        bad[(1, 1)] = c(-0.5);
        let bad = DensityMatrix::new(bad).unwrap();
        assert!(matches!(
            bad.von_neumann_entropy(),
            Err(QsimError::NotPositive(_))
        ));
        assert!(DensityMatrix::new(id(2)).is_err());
    }

    #[test]
    fn partial_trace_of_bell_pair_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::qubits(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let rho = bell.reduced(&[1]).unwrap();
        assert!(max_deviation(rho.matrix(), &(id(2) * c(0.5))) < TOL);
        assert!((rho.von_neumann_entropy().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_merge_discard() {
        let psi = basis_state(2, 0).unwrap().split(0, &[2, 2]).unwrap();
        assert_eq!(psi.dims(), &[2, 2]);
        assert_eq!(psi.probabilities(0).unwrap(), vec![0.0, 1.0]);
        let with_aux = psi.with_qubit(1);
        assert_eq!(with_aux.discard(2, 1).unwrap(), psi);
        assert_eq!(psi.merge(0, 2).unwrap(), basis_state(2, 0).unwrap());
        assert!(psi.split(0, &[3]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state4() -> impl Strategy<Value = StateVector> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
                .prop_filter("nonzero", |v| {
                    v.iter().any(|(r, i)| r.abs() + i.abs() > 1e-3)
                })
                .prop_map(|v| {
                    StateVector::normalized(
                        vec![4],
                        v.into_iter().map(|(r, i)| C64::new(r, i)).collect(),
                    )
                    .unwrap()
                })
        }

        proptest! {
            #[test]
            fn coded_ops_preserve_norm(psi in state4(), a in 0u8..4, b in 0u8..2, cyclic in any::<bool>()) {
                let variant = if cyclic { Variant::Cyclic } else { Variant::Xor };
                let out = apply_op(&psi, 0, OpCode::new(a, b, variant).unwrap()).unwrap();
                prop_assert!((out.norm() - 1.0).abs() < TOL);
            }

            #[test]
            fn xor_ops_compose_by_xor(psi in state4(), a1 in 0u8..4, a2 in 0u8..4, b1 in 0u8..2, b2 in 0u8..2) {
                let op = |a, b| OpCode::new(a, b, Variant::Xor).unwrap();
                let twice = apply_op(&apply_op(&psi, 0, op(a1, b1)).unwrap(), 0, op(a2, b2)).unwrap();
                let once = apply_op(&psi, 0, op(a1 ^ a2, b1 ^ b2)).unwrap();
                prop_assert!(twice.max_abs_diff(&once) < 1e-12);
            }
        }
    }
}
