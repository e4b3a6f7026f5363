//! Constant-curvature geometry on the complex quadric.
//!
//! Both model spaces live on the quadric `<z,z> = 1` in `C^(n+1)` under the
//! *bilinear* (not Hermitian) product: the sphere as the real points, and
//! hyperbolic space as the slice `(x_0, i x_1, ..., i x_n)` with `x_0 >= 1`,
//! where the bilinear product restricts to the Minkowski form
//! `x_0 y_0 - x_1 y_1 - ...`. Real-space points are stored as real vectors
//! and embedded into the complex model only where a complex quantity is
//! actually produced (Gram matrices, the orthant integral).
//!
//! The analytic heart is in [`quadrature`]: the kernel `F(A) = det A *
//! orthant integral of exp(-sum g_jk t_j t_k)`, convergent on the
//! neighborhood `Omega` of the diagonal (`|g_jk - 1| < 1` for all pairs),
//! the oriented simplex volume it induces, and the alternating-sum identity
//! checked by [`zero_sum_residual`](quadrature::zero_sum_residual).

pub mod quadrature;

pub use quadrature::{
    oriented_simplex_volume, volume_kernel, zero_sum_residual, KernelValue, QuadMethod,
    QuadratureSpec, VolumeValue, ZeroSumValue,
};

use crate::gram::{GramError, GramMatrix};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// On-quadric tolerance for stored points.
pub const QUADRIC_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("vector is isotropic (|<z,z>| below {QUADRIC_TOL}); it cannot be normalized")]
    IsotropicVector,
    #[error("real-space vector has nonpositive self-product {q}; not on this model")]
    NotTimelike { q: f64 },
    #[error("point is not on the quadric: |<z,z> - 1| = {defect:.3e}")]
    NotOnQuadric { defect: f64 },
    #[error("operation requires points from the same space")]
    MixedSpaces,
    #[error("operation is defined on the real model spaces only")]
    NotRealSpace,
    #[error("antipodal sphere points have no pseudo-linear interpolant")]
    AntipodalPair,
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("barycentric weights must be nonnegative and sum to 1")]
    BadWeights,
    #[error("configuration leaves the admissible neighborhood: |g_{j}{k} - 1| = {value:.6} >= 1")]
    OmegaViolation { j: usize, k: usize, value: f64 },
    #[error("path denominator fell below 1e-9 at point {j}")]
    PathSingularity { j: usize },
    #[error("volume has imaginary residue {imag:.3e}, beyond 10x the tolerance {tol:.3e}")]
    NonRealResult { imag: f64, tol: f64 },
    #[error("bad quadrature spec: {0}")]
    BadQuadrature(String),
    #[error(transparent)]
    Gram(#[from] GramError),
}

/// Model space tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Sphere,
    Hyperbolic,
    /// Points of the ambient complex quadric with no real structure.
    Complex,
}

impl Space {
    pub fn is_real(self) -> bool {
        matches!(self, Space::Sphere | Space::Hyperbolic)
    }

    /// The scaling unit of the volume normalization: 1 on the sphere, i in
    /// hyperbolic space.
    pub fn nu(self) -> Complex64 {
        match self {
            Space::Hyperbolic => Complex64::new(0.0, 1.0),
            _ => Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Coords {
    /// Sphere: Euclidean coordinates. Hyperbolic: Minkowski coordinates for
    /// the form (+, -, ..., -).
    Real(DVector<f64>),
    Cx(DVector<Complex64>),
}

/// A point of the quadric `<z,z> = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricPoint {
    space: Space,
    coords: Coords,
}

/// Bilinear product of two complex vectors (no conjugation).
pub fn bilinear(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Minkowski product for the (+, -, ..., -) form.
fn minkowski(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let mut s = a[0] * b[0];
    for i in 1..a.len() {
        s -= a[i] * b[i];
    }
    s
}

impl QuadricPoint {
    /// Sphere point from Euclidean coordinates; must be on the unit sphere.
    pub fn sphere(x: &[f64]) -> Result<Self, GeometryError> {
        let v = DVector::from_column_slice(x);
        let q = v.dot(&v);
        if (q - 1.0).abs() > QUADRIC_TOL {
            return Err(GeometryError::NotOnQuadric {
                defect: (q - 1.0).abs(),
            });
        }
        Ok(QuadricPoint {
            space: Space::Sphere,
            coords: Coords::Real(v),
        })
    }

    /// Hyperbolic point from Minkowski coordinates on the upper sheet.
    pub fn hyperbolic(x: &[f64]) -> Result<Self, GeometryError> {
        let v = DVector::from_column_slice(x);
        let q = minkowski(&v, &v);
        if (q - 1.0).abs() > QUADRIC_TOL {
            return Err(GeometryError::NotOnQuadric {
                defect: (q - 1.0).abs(),
            });
        }
        if v[0] < 1.0 - QUADRIC_TOL {
            return Err(GeometryError::NotTimelike { q: v[0] });
        }
        Ok(QuadricPoint {
            space: Space::Hyperbolic,
            coords: Coords::Real(v),
        })
    }

    /// Ambient complex quadric point.
    pub fn complex(z: &[Complex64]) -> Result<Self, GeometryError> {
        let v = DVector::from_column_slice(z);
        let q = bilinear(&v, &v);
        if (q - Complex64::new(1.0, 0.0)).norm() > QUADRIC_TOL {
            return Err(GeometryError::NotOnQuadric {
                defect: (q - Complex64::new(1.0, 0.0)).norm(),
            });
        }
        Ok(QuadricPoint {
            space: Space::Complex,
            coords: Coords::Cx(v),
        })
    }

    /// Wraps a complex vector already on the quadric, recognizing the real
    /// models by their coordinate patterns (all-real for the sphere;
    /// `(real >= 1, imaginary, ...)` for hyperbolic space).
    pub fn classify(z: &DVector<Complex64>) -> Result<Self, GeometryError> {
        let q = bilinear(z, z);
        if (q - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(GeometryError::NotOnQuadric {
                defect: (q - Complex64::new(1.0, 0.0)).norm(),
            });
        }
        let pattern_tol = 1e-12;
        if z.iter().all(|c| c.im.abs() <= pattern_tol) {
            let x: Vec<f64> = z.iter().map(|c| c.re).collect();
            let v = DVector::from_vec(x);
            return Ok(QuadricPoint {
                space: Space::Sphere,
                coords: Coords::Real(v),
            });
        }
        let head_real = z[0].im.abs() <= pattern_tol && z[0].re >= 1.0 - 1e-9;
        let tail_imaginary = z.iter().skip(1).all(|c| c.re.abs() <= pattern_tol);
        if head_real && tail_imaginary {
            let mut x = vec![z[0].re];
            x.extend(z.iter().skip(1).map(|c| c.im));
            return Ok(QuadricPoint {
                space: Space::Hyperbolic,
                coords: Coords::Real(DVector::from_vec(x)),
            });
        }
        Ok(QuadricPoint {
            space: Space::Complex,
            coords: Coords::Cx(z.clone()),
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Ambient dimension n (coordinate length minus one).
    pub fn dim(&self) -> usize {
        match &self.coords {
            Coords::Real(v) => v.len() - 1,
            Coords::Cx(v) => v.len() - 1,
        }
    }

    /// Real coordinates of a real-model point (Minkowski for hyperbolic).
    pub fn real_coords(&self) -> Option<&DVector<f64>> {
        match &self.coords {
            Coords::Real(v) => Some(v),
            Coords::Cx(_) => None,
        }
    }

    /// Column in the complex quadric model: identity for the sphere,
    /// `(x_0, i x_1, ..., i x_n)` for hyperbolic space.
    pub fn embedded(&self) -> DVector<Complex64> {
        match (&self.coords, self.space) {
            (Coords::Real(v), Space::Sphere) => v.map(|x| Complex64::new(x, 0.0)),
            (Coords::Real(v), Space::Hyperbolic) => DVector::from_fn(v.len(), |i, _| {
                if i == 0 {
                    Complex64::new(v[0], 0.0)
                } else {
                    Complex64::new(0.0, v[i])
                }
            }),
            (Coords::Cx(v), _) => v.clone(),
            (Coords::Real(_), Space::Complex) => unreachable!("complex points store Cx coords"),
        }
    }

    /// Bilinear product with another point of the same space, evaluated in
    /// real arithmetic whenever both sides are real-model points.
    pub fn product(&self, other: &QuadricPoint) -> Result<Complex64, GeometryError> {
        if self.space != other.space {
            return Err(GeometryError::MixedSpaces);
        }
        match (&self.coords, &other.coords) {
            (Coords::Real(a), Coords::Real(b)) => {
                let g = match self.space {
                    Space::Sphere => a.dot(b),
                    Space::Hyperbolic => minkowski(a, b),
                    Space::Complex => unreachable!(),
                };
                Ok(Complex64::new(g, 0.0))
            }
            _ => Ok(bilinear(&self.embedded(), &other.embedded())),
        }
    }
}

/// Normalizes a complex vector onto the quadric with the principal branch of
/// the square root, then recognizes the model by coordinate pattern.
pub fn normalize_to_quadric(z: &[Complex64]) -> Result<QuadricPoint, GeometryError> {
    let v = DVector::from_column_slice(z);
    let q = bilinear(&v, &v);
    if q.norm() < QUADRIC_TOL {
        return Err(GeometryError::IsotropicVector);
    }
    let root = q.sqrt();
    let w = v.map(|c| c / root);
    QuadricPoint::classify(&w)
}

/// Real-vector convenience: normalize onto the sphere.
pub fn normalize_sphere(x: &[f64]) -> Result<QuadricPoint, GeometryError> {
    let v = DVector::from_column_slice(x);
    let q = v.dot(&v);
    if q < QUADRIC_TOL {
        return Err(GeometryError::IsotropicVector);
    }
    let w = v / q.sqrt();
    QuadricPoint::sphere(w.as_slice())
}

/// Real-vector convenience: normalize a timelike Minkowski vector onto the
/// upper hyperboloid sheet.
pub fn normalize_hyperbolic(x: &[f64]) -> Result<QuadricPoint, GeometryError> {
    let v = DVector::from_column_slice(x);
    let q = minkowski(&v, &v);
    if q.abs() < QUADRIC_TOL {
        return Err(GeometryError::IsotropicVector);
    }
    if q < 0.0 {
        return Err(GeometryError::NotTimelike { q });
    }
    let mut w = v / q.sqrt();
    if w[0] < 0.0 {
        w = -w;
    }
    QuadricPoint::hyperbolic(w.as_slice())
}

/// Geodesic distance between same-space real-model points.
pub fn distance(p: &QuadricPoint, q: &QuadricPoint) -> Result<f64, GeometryError> {
    if p.space() != q.space() {
        return Err(GeometryError::MixedSpaces);
    }
    if !p.space().is_real() {
        return Err(GeometryError::NotRealSpace);
    }
    let g = p.product(q)?.re;
    match p.space() {
        Space::Sphere => {
            if g <= -1.0 + QUADRIC_TOL {
                return Err(GeometryError::AntipodalPair);
            }
            Ok(g.clamp(-1.0, 1.0).acos())
        }
        Space::Hyperbolic => Ok(g.max(1.0).acosh()),
        Space::Complex => unreachable!(),
    }
}

/// Pseudo-linear combination: normalize the barycentric combination of the
/// vertices back onto the quadric. Defined for real-model points with
/// nonnegative weights summing to 1; restriction to a face is the same map
/// with zeros on the omitted vertices.
pub fn pseudo_linear_eval(
    vertices: &[QuadricPoint],
    weights: &[f64],
) -> Result<QuadricPoint, GeometryError> {
    if vertices.is_empty() || vertices.len() != weights.len() {
        return Err(GeometryError::BadShape(
            "need one weight per vertex".to_string(),
        ));
    }
    let space = vertices[0].space();
    if !space.is_real() {
        return Err(GeometryError::NotRealSpace);
    }
    if vertices.iter().any(|v| v.space() != space) {
        return Err(GeometryError::MixedSpaces);
    }
    if weights.iter().any(|&w| w < -1e-12)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(GeometryError::BadWeights);
    }
    if space == Space::Sphere {
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                if weights[i] > 0.0 && weights[j] > 0.0 {
                    let g = vertices[i].product(&vertices[j])?.re;
                    if g <= -1.0 + QUADRIC_TOL {
                        return Err(GeometryError::AntipodalPair);
                    }
                }
            }
        }
    }
    let dim = vertices[0].dim();
    let mut acc = DVector::<f64>::zeros(dim + 1);
    for (v, &w) in vertices.iter().zip(weights) {
        let x = v.real_coords().expect("real-model point");
        acc += x * w;
    }
    match space {
        Space::Sphere => normalize_sphere(acc.as_slice()),
        Space::Hyperbolic => normalize_hyperbolic(acc.as_slice()),
        Space::Complex => unreachable!(),
    }
}

/// A tuple of quadric points sharing one space, used as the matrix of
/// columns `A = (a_1, ..., a_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    space: Space,
    n: usize,
    points: Vec<QuadricPoint>,
}

impl Configuration {
    pub fn new(points: Vec<QuadricPoint>) -> Result<Self, GeometryError> {
        let Some(first) = points.first() else {
            return Err(GeometryError::BadShape(
                "configuration needs at least one point".to_string(),
            ));
        };
        let space = first.space();
        let n = first.dim();
        if points.iter().any(|p| p.space() != space) {
            return Err(GeometryError::MixedSpaces);
        }
        if points.iter().any(|p| p.dim() != n) {
            return Err(GeometryError::BadShape(
                "all points must share one ambient dimension".to_string(),
            ));
        }
        Ok(Configuration { space, n, points })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[QuadricPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &QuadricPoint {
        &self.points[i]
    }

    /// Complex column matrix of the embedded points, (n+1) x m.
    pub fn embedded_matrix(&self) -> DMatrix<Complex64> {
        let cols: Vec<DVector<Complex64>> = self.points.iter().map(|p| p.embedded()).collect();
        DMatrix::from_columns(&cols)
    }
}

/// Gram matrix of a configuration under the bilinear product.
pub fn gram(a: &Configuration) -> Result<GramMatrix, GeometryError> {
    let m = a.m();
    let mut g = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for u in 0..m {
        g[(u, u)] = Complex64::new(1.0, 0.0);
        for v in (u + 1)..m {
            let p = a.point(u).product(a.point(v))?;
            g[(u, v)] = p;
            g[(v, u)] = p;
        }
    }
    Ok(GramMatrix::from_entries(g)?)
}

/// Membership in the admissible neighborhood of the diagonal:
/// `|<a_j, a_k> - 1| < 1` for every pair, strictly.
pub fn in_omega(points: &[QuadricPoint]) -> bool {
    omega_defect(points).map_or(false, |(_, _, worst)| worst < 1.0)
}

/// The worst pair for the admissibility bound, with its value.
pub fn omega_defect(points: &[QuadricPoint]) -> Option<(usize, usize, f64)> {
    let mut worst: Option<(usize, usize, f64)> = None;
    if points.len() < 2 {
        return Some((0, 0, 0.0));
    }
    for j in 0..points.len() {
        for k in (j + 1)..points.len() {
            let g = match points[j].product(&points[k]) {
                Ok(g) => g,
                Err(_) => return None,
            };
            let value = (g - Complex64::new(1.0, 0.0)).norm();
            if worst.map_or(true, |(_, _, w)| value > w) {
                worst = Some((j, k, value));
            }
        }
    }
    worst
}

/// The contraction path onto the diagonal: `a_0` stays fixed and
///
/// `a_j(t) = [t (1 + q_0j t / 2) a_0 + (1 - t) a_j] / [1 + q_0j (t - t^2/2)]`
///
/// with `q_0j = <a_0, a_j> - 1`. At `t = 0` this is the input tuple, at
/// `t = 1` the diagonal tuple; every sample stays on the quadric, and the
/// pairwise closeness never exceeds the input's (`|g_jk(t) - 1| <= |q_jk|`).
pub fn omega_tilde_path(
    points: &[QuadricPoint],
    t: f64,
) -> Result<Vec<QuadricPoint>, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::BadShape("empty tuple".to_string()));
    }
    let a0 = points[0].embedded();
    let mut out = Vec::with_capacity(points.len());
    out.push(points[0].clone());
    for (j, p) in points.iter().enumerate().skip(1) {
        let aj = p.embedded();
        let q0j = bilinear(&a0, &aj) - Complex64::new(1.0, 0.0);
        let denom = Complex64::new(1.0, 0.0) + q0j * (t - t * t / 2.0);
        if denom.norm() < 1e-9 {
            return Err(GeometryError::PathSingularity { j });
        }
        let head = Complex64::new(t, 0.0) * (Complex64::new(1.0, 0.0) + q0j * (t / 2.0));
        let z = (&a0 * head + &aj * Complex64::new(1.0 - t, 0.0)) / denom;
        out.push(QuadricPoint::classify(&z)?);
    }
    Ok(out)
}

/// `Gamma((n+1)/2)` by the exact half-integer recursion. `twice` is the
/// doubled argument, so `gamma_half(1) = sqrt(pi)` and `gamma_half(2) = 1`.
pub fn gamma_half(twice: u32) -> f64 {
    assert!(twice >= 1, "gamma argument must be positive");
    match twice {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        t => (t as f64 / 2.0 - 1.0) * gamma_half(t - 2),
    }
}

/// Matrix of the ambient bilinear form in real coordinates: the identity on
/// the sphere, `diag(1, -1, ..., -1)` for hyperbolic space.
pub fn form_matrix(space: Space, n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    if space == Space::Hyperbolic {
        for i in 1..=n {
            j[(i, i)] = -1.0;
        }
    }
    j
}

/// A Givens rotation in coordinate plane (p, q) by angle theta.
fn plane_rotation(n: usize, p: usize, q: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(n + 1, n + 1);
    r[(p, p)] = theta.cos();
    r[(q, q)] = theta.cos();
    r[(p, q)] = -theta.sin();
    r[(q, p)] = theta.sin();
    r
}

/// A hyperbolic boost in coordinate plane (0, q) by rapidity s.
fn plane_boost(n: usize, q: usize, s: f64) -> DMatrix<f64> {
    let mut b = DMatrix::identity(n + 1, n + 1);
    b[(0, 0)] = s.cosh();
    b[(q, q)] = s.cosh();
    b[(0, q)] = s.sinh();
    b[(q, 0)] = s.sinh();
    b
}

/// Random isometry of the real model space as a product of plane rotations
/// (and boosts, in the hyperbolic case), acting on real coordinates.
pub fn random_isometry(space: Space, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    use crate::rng::unit_open;
    assert!(space.is_real(), "isometries act on the real models");
    let mut m = DMatrix::identity(n + 1, n + 1);
    let spatial_low = if space == Space::Hyperbolic { 1 } else { 0 };
    for p in spatial_low..n {
        for q in (p + 1)..=n {
            let theta = (unit_open(rng) - 0.5) * std::f64::consts::TAU;
            m = plane_rotation(n, p, q, theta) * m;
        }
    }
    if space == Space::Hyperbolic {
        for q in 1..=n {
            let s = unit_open(rng) - 0.5;
            m = plane_boost(n, q, s) * m;
        }
    }
    m
}

/// Applies a real isometry matrix to a real-model point.
pub fn apply_isometry(m: &DMatrix<f64>, p: &QuadricPoint) -> Result<QuadricPoint, GeometryError> {
    let x = p.real_coords().ok_or(GeometryError::NotRealSpace)?;
    let y = m * x;
    match p.space() {
        Space::Sphere => QuadricPoint::sphere(y.as_slice()),
        Space::Hyperbolic => QuadricPoint::hyperbolic(y.as_slice()),
        Space::Complex => unreachable!("real_coords precluded this"),
    }
}

/// Geodesic exponential at `p` with a tangent vector `v` (`<p,v> = 0` under
/// the space's form): `cos|v| p + sin|v| v/|v|` on the sphere, cosh/sinh in
/// hyperbolic space, where `|v|` is the form length of the tangent.
pub fn geodesic_exp(p: &QuadricPoint, v: &DVector<f64>) -> Result<QuadricPoint, GeometryError> {
    let x = p.real_coords().ok_or(GeometryError::NotRealSpace)?;
    let (norm2, tangency) = match p.space() {
        Space::Sphere => (v.dot(v), x.dot(v)),
        Space::Hyperbolic => (-minkowski(v, v), minkowski(x, v)),
        Space::Complex => unreachable!(),
    };
    if tangency.abs() > 1e-9 {
        return Err(GeometryError::BadShape(
            "vector is not tangent at the base point".to_string(),
        ));
    }
    if norm2 < 0.0 {
        return Err(GeometryError::BadShape(
            "tangent vector has nonpositive length".to_string(),
        ));
    }
    let len = norm2.sqrt();
    if len < 1e-300 {
        return Ok(p.clone());
    }
    let y = match p.space() {
        Space::Sphere => x * len.cos() + v * (len.sin() / len),
        Space::Hyperbolic => x * len.cosh() + v * (len.sinh() / len),
        Space::Complex => unreachable!(),
    };
    match p.space() {
        Space::Sphere => QuadricPoint::sphere(y.as_slice()),
        Space::Hyperbolic => QuadricPoint::hyperbolic(y.as_slice()),
        Space::Complex => unreachable!(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Real(Vec<f64>),
    Cx(Vec<(f64, f64)>),
}

#[derive(Serialize, Deserialize)]
struct ConfigRepr {
    space: Space,
    n: usize,
    points: Vec<PointRepr>,
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let points = self
            .points
            .iter()
            .map(|p| match p.real_coords() {
                Some(x) => PointRepr::Real(x.iter().copied().collect()),
                None => PointRepr::Cx(p.embedded().iter().map(|c| (c.re, c.im)).collect()),
            })
            .collect();
        ConfigRepr {
            space: self.space,
            n: self.n,
            points,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ConfigRepr::deserialize(deserializer)?;
        let mut points = Vec::with_capacity(repr.points.len());
        for (i, pr) in repr.points.iter().enumerate() {
            let complain = |e: GeometryError| D::Error::custom(format!("point {i}: {e}"));
            let p = match (pr, repr.space) {
                (PointRepr::Real(x), Space::Sphere) => {
                    QuadricPoint::sphere(x).map_err(complain)?
                }
                (PointRepr::Real(x), Space::Hyperbolic) => {
                    QuadricPoint::hyperbolic(x).map_err(complain)?
                }
                (PointRepr::Real(_), Space::Complex) => {
                    return Err(D::Error::custom(format!(
                        "point {i}: complex configurations need [re, im] pairs"
                    )))
                }
                (PointRepr::Cx(z), Space::Complex) => {
                    let v: Vec<Complex64> =
                        z.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
                    QuadricPoint::complex(&v).map_err(complain)?
                }
                (PointRepr::Cx(_), _) => {
                    return Err(D::Error::custom(format!(
                        "point {i}: real spaces store real coordinate arrays"
                    )))
                }
            };
            if p.dim() != repr.n {
                return Err(D::Error::custom(format!(
                    "point {i} has dimension {} but the configuration declares {}",
                    p.dim(),
                    repr.n
                )));
            }
            points.push(p);
        }
        Configuration::new(points).map_err(D::Error::custom)
    }
}
