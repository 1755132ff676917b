//! Binary extension field arithmetic and Shamir sharing of banknote secrets.
//!
//! A banknote secret of `m` pairs is packed into an element of GF(2^N) with
//! `N = 3m`. Pair `i` (zero-based) occupies bits `3i..3i+3`, laid out as
//! `(a_high, a_low, b)` from most to least significant, so pair 0 sits in the
//! least significant bits. Because every later recombination is a bitwise XOR
//! the layout only has to be fixed, not meaningful.
//!
//! The dealer evaluates a random polynomial of degree `t - 1` with the
//! encoded secret as constant term. A cohort of `t` centers each scale their
//! share by a Lagrange coefficient; the XOR of the scaled shares is the
//! encoded secret again.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree. Products are formed in `u128`.
pub const MAX_DEGREE: u32 = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field degree {0} outside 1..={MAX_DEGREE}")]
    UnsupportedDegree(u32),
    #[error("modulus {0:#x} is not irreducible over GF(2)")]
    Reducible(u64),
    #[error("operands belong to different fields ({0:#x} vs {1:#x})")]
    ModulusMismatch(u64, u64),
    #[error("value {value:#x} does not fit in {degree} bits")]
    OutOfRange { value: u64, degree: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("evaluation points must be distinct and nonzero")]
    BadPoints,
    #[error("point {0:#x} is not part of the cohort")]
    NotInCohort(u64),
    #[error("threshold t={t} and share count n={n} violate 1 <= t <= n")]
    BadThreshold { t: usize, n: usize },
    #[error("share count {n} exceeds the {available} nonzero field elements")]
    TooManyShares { n: usize, available: u64 },
    #[error("secret key must hold at least one pair")]
    EmptyKey,
    #[error("pair {index} holds invalid values a={a}, b={b}")]
    BadPair { index: usize, a: u8, b: u8 },
    #[error("field degree {degree} cannot hold {m} pairs")]
    LayoutMismatch { degree: u32, m: usize },
    #[error("malformed share file: {0}")]
    Malformed(String),
}

/// GF(2^N) described by its degree and a reduction polynomial.
///
/// `modulus` includes the leading `x^N` term, e.g. `0b1011` for `x^3 + x + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gf2n {
    degree: u32,
    modulus: u64,
}

impl Gf2n {
    /// The field of the given degree, reduced by the numerically smallest
    /// irreducible polynomial of that degree.
    pub fn new(degree: u32) -> Result<Self, FieldError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(degree));
        }
        let lead = 1u64 << degree;
        (lead..=lead | (lead - 1))
            .find(|&candidate| is_irreducible(candidate))
            .map(|modulus| Self { degree, modulus })
            .ok_or(FieldError::Reducible(lead))
    }

    /// Field for a secret of `m` pairs (`N = 3m`).
    pub fn for_pairs(m: usize) -> Result<Self, FieldError> {
        let degree = u32::try_from(m.saturating_mul(3)).unwrap_or(u32::MAX);
        Self::new(degree)
    }

    pub fn with_modulus(modulus: u64) -> Result<Self, FieldError> {
        if modulus < 2 {
            return Err(FieldError::Reducible(modulus));
        }
        let degree = 63 - modulus.leading_zeros();
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::UnsupportedDegree(degree));
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        Ok(Self { degree, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of field elements, `2^N`.
    pub fn order(&self) -> u128 {
        1u128 << self.degree
    }

    fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn element(&self, bits: u64) -> Result<FieldElement, FieldError> {
        if bits & !self.mask() != 0 {
            return Err(FieldError::OutOfRange {
                value: bits,
                degree: self.degree,
            });
        }
        Ok(FieldElement { bits, field: *self })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            bits: 0,
            field: *self,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            bits: 1,
            field: *self,
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            bits: rng.random::<u64>() & self.mask(),
            field: *self,
        }
    }

    /// Hex digits used for element values in share files, `ceil(N / 4)`.
    pub fn hex_width(&self) -> usize {
        self.degree.div_ceil(4) as usize
    }

    fn mul_bits(&self, x: u64, y: u64) -> u64 {
        reduce(clmul(x, y), self.modulus)
    }

    fn pow_bits(&self, mut base: u64, mut exp: u128) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_bits(acc, base);
            }
            base = self.mul_bits(base, base);
            exp >>= 1;
        }
        acc
    }
}

impl fmt::Display for Gf2n {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.degree, self.modulus)
    }
}

/// Carry-less product of two polynomials over GF(2).
fn clmul(x: u64, y: u64) -> u128 {
    let mut acc = 0u128;
    let mut x = x as u128;
    let mut y = y;
    while y != 0 {
        if y & 1 == 1 {
            acc ^= x;
        }
        x <<= 1;
        y >>= 1;
    }
    acc
}

/// Remainder of `value` modulo `modulus` over GF(2).
fn reduce(mut value: u128, modulus: u64) -> u64 {
    let degree = 127 - (modulus as u128).leading_zeros();
    while value != 0 {
        let top = 127 - value.leading_zeros();
        if top < degree {
            break;
        }
        value ^= (modulus as u128) << (top - degree);
    }
    value as u64
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = reduce(a as u128, b);
        a = b;
        b = r;
    }
    a
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a polynomial over GF(2) given with its
/// leading term.
pub fn is_irreducible(poly: u64) -> bool {
    if poly < 2 {
        return false;
    }
    let degree = 63 - poly.leading_zeros();
    if degree == 1 {
        return true;
    }
    // x^(2^k) mod poly, by repeated squaring of x.
    let frobenius = |k: u32| -> u64 {
        let mut acc = reduce(0b10, poly);
        for _ in 0..k {
            acc = reduce(clmul(acc, acc), poly);
        }
        acc
    };
    let x = reduce(0b10, poly);
    if frobenius(degree) != x {
        return false;
    }
    prime_factors(degree).into_iter().all(|p| {
        let diff = frobenius(degree / p) ^ x;
        poly_gcd(poly, diff) == 1
    })
}

/// An element of GF(2^N), tagged with the field it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    bits: u64,
    field: Gf2n,
}

impl FieldElement {
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn field(&self) -> Gf2n {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field != other.field {
            return Err(FieldError::ModulusMismatch(
                self.field.modulus,
                other.field.modulus,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(Self {
            bits: self.bits ^ other.bits,
            field: self.field,
        })
    }

    /// Subtraction coincides with addition in characteristic two.
    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(Self {
            bits: self.field.mul_bits(self.bits, other.bits),
            field: self.field,
        })
    }

    /// Multiplicative inverse via `x^(2^N - 2)`.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let exp = self.field.order() - 2;
        Ok(Self {
            bits: self.field.pow_bits(self.bits, exp),
            field: self.field,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.mul(&other.inv()?)
    }

    /// Lowercase hex padded to the field's hex width.
    pub fn to_hex(&self) -> String {
        format!("{:0width$x}", self.bits, width = self.field.hex_width())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:#0width$b}",
            self.bits,
            width = self.field.degree as usize + 2
        )
    }
}

/// One `(a_i, b_i)` entry of a banknote secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyPair {
    /// Two-bit permutation exponent, `0..=3`.
    pub a: u8,
    /// Basis bit, `0..=1`.
    pub b: u8,
}

impl KeyPair {
    pub fn new(a: u8, b: u8) -> Option<Self> {
        (a < 4 && b < 2).then_some(Self { a, b })
    }

    fn triple(&self) -> u64 {
        u64::from(self.a) << 1 | u64::from(self.b)
    }

    fn from_triple(bits: u64) -> Self {
        Self {
            a: ((bits >> 1) & 0b11) as u8,
            b: (bits & 1) as u8,
        }
    }
}

/// The banknote secret `K = (a_1, b_1, ..., a_m, b_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SecretKey {
    pairs: Vec<KeyPair>,
}

impl SecretKey {
    pub fn new(pairs: Vec<KeyPair>) -> Result<Self, FieldError> {
        if pairs.is_empty() {
            return Err(FieldError::EmptyKey);
        }
        if let Some((index, p)) = pairs.iter().enumerate().find(|(_, p)| p.a > 3 || p.b > 1) {
            return Err(FieldError::BadPair {
                index,
                a: p.a,
                b: p.b,
            });
        }
        Ok(Self { pairs })
    }

    /// Builds a key from raw `(a, b)` tuples.
    pub fn from_tuples(pairs: &[(u8, u8)]) -> Result<Self, FieldError> {
        Self::new(pairs.iter().map(|&(a, b)| KeyPair { a, b }).collect())
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self, FieldError> {
        Self::new(
            (0..m)
                .map(|_| KeyPair {
                    a: rng.random_range(0..4),
                    b: rng.random_range(0..2),
                })
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[KeyPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Packs the key into a field element of degree `3m`.
    pub fn encode(&self, field: Gf2n) -> Result<FieldElement, FieldError> {
        check_layout(field, self.len())?;
        let bits = self
            .pairs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, p)| acc | p.triple() << (3 * i));
        field.element(bits)
    }

    /// Inverse of [`SecretKey::encode`].
    pub fn decode(element: &FieldElement, m: usize) -> Result<Self, FieldError> {
        check_layout(element.field, m)?;
        Self::new(
            (0..m)
                .map(|i| KeyPair::from_triple(element.bits >> (3 * i)))
                .collect(),
        )
    }
}

fn check_layout(field: Gf2n, m: usize) -> Result<(), FieldError> {
    if m == 0 {
        return Err(FieldError::EmptyKey);
    }
    if field.degree as usize != 3 * m {
        return Err(FieldError::LayoutMismatch {
            degree: field.degree,
            m,
        });
    }
    Ok(())
}

/// Dense polynomial over GF(2^N), coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<FieldElement>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<FieldElement>) -> Result<Self, FieldError> {
        let Some(first) = coeffs.first() else {
            return Err(FieldError::BadThreshold { t: 0, n: 0 });
        };
        for c in &coeffs[1..] {
            first.same_field(c)?;
        }
        Ok(Self { coeffs })
    }

    /// Random polynomial of degree at most `t - 1` with the given constant term.
    pub fn random_with_constant<R: Rng + ?Sized>(
        constant: FieldElement,
        t: usize,
        rng: &mut R,
    ) -> Self {
        let field = constant.field;
        let coeffs = std::iter::once(constant)
            .chain((1..t).map(|_| field.random(rng)))
            .collect();
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn eval(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        let field = self.coeffs[0].field;
        self.coeffs
            .iter()
            .rev()
            .try_fold(field.zero(), |acc, c| acc.mul(x)?.add(c))
    }
}

/// One center's share as delivered by the dealer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub label: String,
    pub t: usize,
    pub n: usize,
    pub m: usize,
    pub x: FieldElement,
    pub s: FieldElement,
}

impl Share {
    /// Share file body: one `key=value` line per field.
    pub fn to_text(&self) -> String {
        format!(
            "label={}\nparams={},{},{}\nmodulus={:x}\nx={}\nS={}\n",
            self.label,
            self.t,
            self.n,
            self.m,
            self.x.field.modulus,
            self.x.to_hex(),
            self.s.to_hex()
        )
    }

    pub fn from_text(text: &str) -> Result<Self, FieldError> {
        let bad = |msg: &str| FieldError::Malformed(msg.to_owned());
        let mut label = None;
        let mut params = None;
        let mut modulus = None;
        let mut x = None;
        let mut s = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line.split_once('=').ok_or_else(|| bad(line))?;
            let slot = match key {
                "label" => &mut label,
                "params" => &mut params,
                "modulus" => &mut modulus,
                "x" => &mut x,
                "S" => &mut s,
                _ => return Err(bad(&format!("unknown key `{key}`"))),
            };
            if slot.replace(value.to_owned()).is_some() {
                return Err(bad(&format!("duplicate key `{key}`")));
            }
        }
        let label = label.ok_or_else(|| bad("missing label"))?;
        let params = params.ok_or_else(|| bad("missing params"))?;
        let nums = params
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("params must be t,n,m"))?;
        let [t, n, m] = nums[..] else {
            return Err(bad("params must be t,n,m"));
        };
        let hex = |v: Option<String>, what: &str| -> Result<u64, FieldError> {
            let v = v.ok_or_else(|| bad(&format!("missing {what}")))?;
            if v.is_empty() || v.chars().any(|c| c.is_ascii_uppercase()) {
                return Err(bad(&format!("{what} must be lowercase hex")));
            }
            u64::from_str_radix(&v, 16).map_err(|_| bad(&format!("{what} is not hex")))
        };
        let field = Gf2n::with_modulus(hex(modulus, "modulus")?)?;
        check_layout(field, m)?;
        let width = field.hex_width();
        let element = |v: Option<String>, what: &str| -> Result<FieldElement, FieldError> {
            if v.as_ref().is_some_and(|v| v.len() != width) {
                return Err(bad(&format!("{what} must be {width} hex digits")));
            }
            field.element(hex(v, what)?)
        };
        let x = element(x, "x")?;
        let s = element(s, "S")?;
        if x.is_zero() {
            return Err(FieldError::BadPoints);
        }
        if t == 0 || t > n {
            return Err(FieldError::BadThreshold { t, n });
        }
        Ok(Self {
            label,
            t,
            n,
            m,
            x,
            s,
        })
    }
}

/// All `n` shares of one banknote secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSet {
    label: String,
    t: usize,
    n: usize,
    m: usize,
    points: Vec<(FieldElement, FieldElement)>,
}

impl ShareSet {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> Gf2n {
        self.points[0].0.field
    }

    /// `(x_j, S_j)` in center order.
    pub fn points(&self) -> &[(FieldElement, FieldElement)] {
        &self.points
    }

    /// The share of center `j` (one-based).
    pub fn share(&self, j: usize) -> Option<Share> {
        let &(x, s) = self.points.get(j.checked_sub(1)?)?;
        Some(Share {
            label: self.label.clone(),
            t: self.t,
            n: self.n,
            m: self.m,
            x,
            s,
        })
    }

    pub fn shares(&self) -> Vec<Share> {
        (1..=self.n).filter_map(|j| self.share(j)).collect()
    }
}

/// Deals `n` shares of `key` with threshold `t`, using the default field
/// for `m = key.len()` and evaluation points `x_j = j`.
pub fn make_shares<R: Rng + ?Sized>(
    key: &SecretKey,
    label: &str,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<ShareSet, FieldError> {
    let field = Gf2n::for_pairs(key.len())?;
    make_shares_with(key, label, t, n, field, None, rng)
}

/// Like [`make_shares`] with an explicit field and optional evaluation points.
pub fn make_shares_with<R: Rng + ?Sized>(
    key: &SecretKey,
    label: &str,
    t: usize,
    n: usize,
    field: Gf2n,
    xs: Option<&[u64]>,
    rng: &mut R,
) -> Result<ShareSet, FieldError> {
    check_share_counts(t, n, field)?;
    let constant = key.encode(field)?;
    let poly = Polynomial::random_with_constant(constant, t, rng);
    let xs = match xs {
        Some(xs) => xs.to_vec(),
        None => (1..=n as u64).collect(),
    };
    share_polynomial(label, &poly, &xs, t, key.len())
}

fn check_share_counts(t: usize, n: usize, field: Gf2n) -> Result<(), FieldError> {
    if t == 0 || t > n {
        return Err(FieldError::BadThreshold { t, n });
    }
    let available = (field.order() - 1).min(u64::MAX as u128) as u64;
    if n as u128 > field.order() - 1 {
        return Err(FieldError::TooManyShares { n, available });
    }
    Ok(())
}

/// Evaluates a fixed dealer polynomial at the given points.
pub fn share_polynomial(
    label: &str,
    poly: &Polynomial,
    xs: &[u64],
    t: usize,
    m: usize,
) -> Result<ShareSet, FieldError> {
    let field = poly.coeffs[0].field;
    check_layout(field, m)?;
    check_share_counts(t, xs.len(), field)?;
    if poly.coeffs.len() > t {
        return Err(FieldError::BadThreshold {
            t: poly.coeffs.len(),
            n: xs.len(),
        });
    }
    let xs = xs
        .iter()
        .map(|&x| field.element(x))
        .collect::<Result<Vec<_>, _>>()?;
    check_points(&xs)?;
    let points = xs
        .into_iter()
        .map(|x| Ok((x, poly.eval(&x)?)))
        .collect::<Result<Vec<_>, FieldError>>()?;
    Ok(ShareSet {
        label: label.to_owned(),
        t,
        n: points.len(),
        m,
        points,
    })
}

fn check_points(xs: &[FieldElement]) -> Result<(), FieldError> {
    for (i, x) in xs.iter().enumerate() {
        if x.is_zero() || xs[..i].iter().any(|y| y.bits == x.bits) {
            return Err(FieldError::BadPoints);
        }
        if i > 0 {
            xs[0].same_field(x)?;
        }
    }
    Ok(())
}

/// `prod_{l != j} x_l / (x_l - x_j)` for the cohort `xs`; `j` indexes `xs`.
pub fn lagrange_coefficient(xs: &[FieldElement], j: usize) -> Result<FieldElement, FieldError> {
    check_points(xs)?;
    let xj = xs.get(j).ok_or(FieldError::BadPoints)?;
    xs.iter()
        .enumerate()
        .filter(|&(l, _)| l != j)
        .try_fold(xj.field.one(), |acc, (_, xl)| {
            acc.mul(&xl.div(&xl.sub(xj)?)?)
        })
}

/// A center's Lagrange-weighted share `K_j` and its decoded pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecomputedShare {
    pub label: String,
    pub k: FieldElement,
    pub decoded: SecretKey,
}

impl PrecomputedShare {
    /// Wraps a raw `K_j` value; useful for hand-built scenarios.
    pub fn from_value(label: &str, k: FieldElement, m: usize) -> Result<Self, FieldError> {
        Ok(Self {
            label: label.to_owned(),
            decoded: SecretKey::decode(&k, m)?,
            k,
        })
    }

    pub fn pairs(&self) -> &[KeyPair] {
        self.decoded.pairs()
    }
}

/// Scales a center's share for the cohort it collaborates with.
pub fn precompute(share: &Share, cohort: &[FieldElement]) -> Result<PrecomputedShare, FieldError> {
    let j = cohort
        .iter()
        .position(|x| x.bits == share.x.bits)
        .ok_or(FieldError::NotInCohort(share.x.bits))?;
    let k = share.s.mul(&lagrange_coefficient(cohort, j)?)?;
    PrecomputedShare::from_value(&share.label, k, share.m)
}

/// Precomputes every member of a cohort given by one-based center indices.
pub fn precompute_cohort(
    shares: &ShareSet,
    centers: &[usize],
) -> Result<Vec<PrecomputedShare>, FieldError> {
    let selected = centers
        .iter()
        .map(|&j| shares.share(j).ok_or(FieldError::BadPoints))
        .collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<FieldElement> = selected.iter().map(|s| s.x).collect();
    selected.iter().map(|s| precompute(s, &xs)).collect()
}

/// XOR of the cohort's `K_j`, i.e. the encoded secret.
pub fn combine(shares: &[PrecomputedShare]) -> Result<FieldElement, FieldError> {
    let first = shares.first().ok_or(FieldError::BadPoints)?;
    shares[1..].iter().try_fold(first.k, |acc, s| acc.add(&s.k))
}
