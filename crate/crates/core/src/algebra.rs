//! Concrete finite-dimensional Banach algebras over ℂ.
//!
//! Three instances are provided:
//!
//! * `Scalar`: ℂ itself with the modulus.
//! * `Matrix`: dense `n × n` complex matrices with the operator (spectral)
//!   norm, i.e. the largest singular value.
//! * `Pointwise`: ℂⁿ with entrywise product and the sup norm.
//!
//! Each comes with its reference adjoint (conjugate transpose, or entrywise
//! conjugation for the commutative instances), under which all three are
//! C*-algebras.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{is_finite_scalar, Real, Scalar};

/// Relative tolerance of the power iteration behind the matrix norm.
pub const NORM_TOL: f64 = 1e-12;
/// Iteration cap of the power iteration behind the matrix norm.
pub const NORM_MAX_ITER: usize = 10_000;
const MAX_DIRECTION_DRAWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    Scalar,
    Matrix,
    Pointwise,
}

/// Shape of an algebra instance. `dim` is the matrix side length for
/// `Matrix`, the tuple length for `Pointwise` and always 1 for `Scalar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct AlgebraSpec {
    kind: AlgebraKind,
    dim: usize,
}

impl AlgebraSpec {
    pub fn new(kind: AlgebraKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dim must be at least 1".into()));
        }
        if kind == AlgebraKind::Scalar && dim != 1 {
            return Err(Error::InvalidSpec(format!(
                "scalar algebra requires dim = 1, got {dim}"
            )));
        }
        Ok(Self { kind, dim })
    }

    pub fn scalar() -> Self {
        Self {
            kind: AlgebraKind::Scalar,
            dim: 1,
        }
    }

    pub fn matrix(dim: usize) -> Result<Self> {
        Self::new(AlgebraKind::Matrix, dim)
    }

    pub fn pointwise(dim: usize) -> Result<Self> {
        Self::new(AlgebraKind::Pointwise, dim)
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of complex entries stored per element.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        match self.kind {
            AlgebraKind::Matrix => self.dim * self.dim,
            _ => self.dim,
        }
    }

    pub fn is_commutative(&self) -> bool {
        self.kind != AlgebraKind::Matrix || self.dim == 1
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AlgebraKind::Scalar => write!(f, "scalar"),
            AlgebraKind::Matrix => write!(f, "matrix({})", self.dim),
            AlgebraKind::Pointwise => write!(f, "pointwise({})", self.dim),
        }
    }
}

/// An element of one of the algebra instances. Matrix entries are stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<T: Real> {
    spec: AlgebraSpec,
    data: Vec<Scalar<T>>,
}

impl<T: Real> Element<T> {
    pub fn new(spec: AlgebraSpec, data: Vec<Scalar<T>>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidElement(format!(
                "{spec} expects {} entries, got {}",
                spec.len(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !is_finite_scalar(z)) {
            return Err(Error::InvalidElement(format!("entry {pos} is not finite")));
        }
        Ok(Self { spec, data })
    }

    /// Builds an element from real entries given as `f64`.
    pub fn from_real(spec: AlgebraSpec, re: &[f64]) -> Result<Self> {
        Self::new(
            spec,
            re.iter()
                .map(|&v| Complex::new(T::lit(v), T::zero()))
                .collect(),
        )
    }

    /// Builds an element from separate real and imaginary parts given as `f64`.
    pub fn from_parts(spec: AlgebraSpec, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::InvalidElement(format!(
                "real part has {} entries, imaginary part {}",
                re.len(),
                im.len()
            )));
        }
        Self::new(
            spec,
            re.iter()
                .zip(im)
                .map(|(&a, &b)| Complex::new(T::lit(a), T::lit(b)))
                .collect(),
        )
    }

    pub fn scalar(z: Scalar<T>) -> Result<Self> {
        Self::new(AlgebraSpec::scalar(), vec![z])
    }

    pub fn zero(spec: AlgebraSpec) -> Self {
        Self {
            spec,
            data: vec![Complex::zero(); spec.len()],
        }
    }

    /// Multiplicative unit of the algebra.
    pub fn identity(spec: AlgebraSpec) -> Self {
        let mut out = Self::zero(spec);
        match spec.kind {
            AlgebraKind::Matrix => {
                for i in 0..spec.dim {
                    out.data[i * spec.dim + i] = Complex::one();
                }
            }
            _ => out.data.iter_mut().for_each(|z| *z = Complex::one()),
        }
        out
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn data(&self) -> &[Scalar<T>] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch {
                left: self.spec,
                right: other.spec,
            });
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(Scalar<T>, Scalar<T>) -> Scalar<T>,
    ) -> Result<Self> {
        self.check_spec(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Self {
            spec: self.spec,
            data,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Algebra product: matrix product for `Matrix`, entrywise otherwise.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        match self.spec.kind {
            AlgebraKind::Matrix => {
                self.check_spec(other)?;
                let n = self.spec.dim;
                Ok(Self {
                    spec: self.spec,
                    data: matmul(n, &self.data, &other.data),
                })
            }
            _ => self.zip_with(other, |a, b| a * b),
        }
    }

    pub fn scale(&self, lambda: Scalar<T>) -> Self {
        Self {
            spec: self.spec,
            data: self.data.iter().map(|&z| lambda * z).collect(),
        }
    }

    pub fn scale_real(&self, t: T) -> Self {
        self.scale(Complex::new(t, T::zero()))
    }

    pub fn neg(&self) -> Self {
        Self {
            spec: self.spec,
            data: self.data.iter().map(|&z| -z).collect(),
        }
    }

    /// Entrywise complex conjugate, without transposition.
    pub fn conj_entries(&self) -> Self {
        Self {
            spec: self.spec,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Reference adjoint: conjugate transpose for matrices, entrywise
    /// conjugation otherwise. Exact (sign flips and moves only).
    pub fn conj_transpose(&self) -> Self {
        match self.spec.kind {
            AlgebraKind::Matrix => {
                let n = self.spec.dim;
                let mut data = vec![Complex::zero(); n * n];
                for i in 0..n {
                    for j in 0..n {
                        data[j * n + i] = self.data[i * n + j].conj();
                    }
                }
                Self {
                    spec: self.spec,
                    data,
                }
            }
            _ => self.conj_entries(),
        }
    }

    /// Banach-algebra norm of the instance.
    pub fn norm(&self) -> Result<T> {
        match self.spec.kind {
            AlgebraKind::Scalar | AlgebraKind::Pointwise => Ok(sup_modulus(&self.data)),
            AlgebraKind::Matrix => spectral_norm(self.spec.dim, &self.data),
        }
    }

    /// Largest entry modulus; equals `norm` for the commutative instances.
    pub fn max_abs(&self) -> T {
        sup_modulus(&self.data)
    }

    /// Matrix inverse by Gauss-Jordan elimination with partial pivoting.
    /// For the commutative instances this is the entrywise reciprocal.
    pub fn inverse(&self) -> Result<Self> {
        match self.spec.kind {
            AlgebraKind::Matrix => {
                let data = invert(self.spec.dim, &self.data)
                    .ok_or_else(|| Error::InvalidElement("matrix is singular".into()))?;
                Self::new(self.spec, data)
            }
            _ => {
                if self.data.iter().any(|z| z.is_zero()) {
                    return Err(Error::InvalidElement("element has a zero entry".into()));
                }
                Self::new(self.spec, self.data.iter().map(|z| z.inv()).collect())
            }
        }
    }

    /// Converts every entry to another scalar type through `f64`.
    pub fn cast<U: Real>(&self) -> Element<U> {
        Element {
            spec: self.spec,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }
}

impl<T: Real> Serialize for Element<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let re: Vec<f64> = self.data.iter().map(|z| z.re.as_f64()).collect();
        let im: Vec<f64> = self.data.iter().map(|z| z.im.as_f64()).collect();
        let mut s = serializer.serialize_struct("Element", 4)?;
        s.serialize_field("kind", &self.spec.kind)?;
        s.serialize_field("dim", &self.spec.dim)?;
        s.serialize_field("re", &re)?;
        s.serialize_field("im", &im)?;
        s.end()
    }
}

fn sup_modulus<T: Real>(data: &[Scalar<T>]) -> T {
    data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

fn matmul<T: Real>(n: usize, a: &[Scalar<T>], b: &[Scalar<T>]) -> Vec<Scalar<T>> {
    let mut out = vec![Complex::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn euclidean<T: Real>(v: &[Scalar<T>]) -> T {
    v.iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |acc, x| acc + x)
        .sqrt()
}

/// Operator norm as the square root of the dominant eigenvalue of `a*a`.
///
/// The matrix is rescaled by its largest entry first. Power iteration starts
/// from the normalized all-ones vector; a second deterministic start
/// `(1, -2, 3, -4, ...)` covers matrices whose dominant right singular vector
/// is orthogonal to all-ones, and the larger estimate wins.
fn spectral_norm<T: Real>(n: usize, a: &[Scalar<T>]) -> Result<T> {
    let scale = sup_modulus(a);
    if scale.is_zero() {
        return Ok(T::zero());
    }
    let scaled: Vec<Scalar<T>> = a.iter().map(|z| z.unscale(scale)).collect();
    let ones = vec![Complex::one(); n];
    let mut best = dominant_gram_eigenvalue(n, &scaled, ones)?;
    if n > 1 {
        let alternating = (0..n)
            .map(|k| {
                let mag = T::lit((k + 1) as f64);
                Complex::new(if k % 2 == 0 { mag } else { -mag }, T::zero())
            })
            .collect();
        best = best.max(dominant_gram_eigenvalue(n, &scaled, alternating)?);
    }
    Ok(best.sqrt() * scale)
}

fn dominant_gram_eigenvalue<T: Real>(
    n: usize,
    a: &[Scalar<T>],
    start: Vec<Scalar<T>>,
) -> Result<T> {
    let tol = T::tol_floor(NORM_TOL);
    let mut v = start;
    let len = euclidean(&v);
    v.iter_mut().for_each(|z| *z = z.unscale(len));

    // Past `tol`, keep iterating while the change still shrinks: the error
    // of the quotient is the change divided by the spectral gap.
    let fine = T::tol_floor(0.0) * T::lit(4.0);
    let mut prev: Option<T> = None;
    let mut last_change: Option<T> = None;
    for _ in 0..NORM_MAX_ITER {
        let av: Vec<Scalar<T>> = (0..n)
            .map(|i| (0..n).fold(Complex::zero(), |acc, j| acc + a[i * n + j] * v[j]))
            .collect();
        // Rayleigh quotient v* (a*a) v = |a v|^2 for unit v.
        let rayleigh = av
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |s, x| s + x);
        let w: Vec<Scalar<T>> = (0..n)
            .map(|j| (0..n).fold(Complex::zero(), |acc, i| acc + a[i * n + j].conj() * av[i]))
            .collect();
        let wn = euclidean(&w);
        if wn.is_zero() {
            return Ok(T::zero());
        }
        if let Some(p) = prev {
            let change = (rayleigh - p).abs();
            let stalled = last_change.is_some_and(|c| change >= c);
            if change <= fine * rayleigh || (change <= tol * rayleigh && stalled) {
                return Ok(rayleigh);
            }
            last_change = Some(change);
        }
        prev = Some(rayleigh);
        v = w.into_iter().map(|z| z.unscale(wn)).collect();
    }
    if let (Some(p), Some(c)) = (prev, last_change) {
        if c <= tol * p {
            return Ok(p);
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: NORM_MAX_ITER,
    })
}

fn invert<T: Real>(n: usize, a: &[Scalar<T>]) -> Option<Vec<Scalar<T>>> {
    let mut m = a.to_vec();
    let mut inv = vec![Complex::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = Complex::one();
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            m[r * n + col]
                .norm()
                .partial_cmp(&m[s * n + col].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot * n + col].is_zero() {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        let p = m[col * n + col];
        for j in 0..n {
            m[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * n + col];
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                m[r * n + j] = m[r * n + j] - factor * m[col * n + j];
                inv[r * n + j] = inv[r * n + j] - factor * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

/// Draws an element whose norm lies in `[r_min, r_max]`.
///
/// The direction has independent standard complex Gaussian entries and is
/// normalized to unit norm; the radius is log-uniform on the interval.
pub fn sample_element<T: Real, R: Rng + ?Sized>(
    spec: AlgebraSpec,
    radius_range: (T, T),
    rng: &mut R,
) -> Result<Element<T>> {
    let (r_min, r_max) = radius_range;
    if !(r_min > T::zero() && r_min <= r_max && r_max.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "radius range ({r_min}, {r_max}) must satisfy 0 < r_min <= r_max"
        )));
    }
    let direction = sample_unit(spec, rng)?;
    let radius = if r_min == r_max {
        r_min
    } else {
        let lo = r_min.as_f64().ln();
        let hi = r_max.as_f64().ln();
        let t: f64 = rng.random_range(lo..=hi);
        T::lit(t.exp()).max(r_min).min(r_max)
    };
    Ok(direction.scale_real(radius))
}

/// Draws a unit-norm element with a Gaussian direction.
pub fn sample_unit<T: Real, R: Rng + ?Sized>(spec: AlgebraSpec, rng: &mut R) -> Result<Element<T>> {
    for _ in 0..MAX_DIRECTION_DRAWS {
        let data: Vec<Scalar<T>> = (0..spec.len())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        let candidate = Element::new(spec, data)?;
        let norm = candidate.norm()?;
        if norm > T::zero() {
            return Ok(candidate.scale_real(norm.recip()));
        }
    }
    Err(Error::DegenerateDirection {
        attempts: MAX_DIRECTION_DRAWS,
    })
}

/// `count` probes drawn from a ChaCha8 stream seeded with `seed`.
pub fn sample_probes<T: Real>(
    spec: AlgebraSpec,
    count: usize,
    radii: (T, T),
    seed: u64,
) -> Result<Vec<Element<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| sample_element(spec, radii, &mut rng))
        .collect()
}
