//! Small complex matrices and the predicates used throughout the crate.

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec2 = Vector2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::new(theta.cos(), theta.sin())
}

#[inline]
pub fn mat2(a: C64, b: C64, c_: C64, d: C64) -> Mat2 {
    Mat2::new(a, b, c_, d)
}

#[inline]
pub fn real2(a: f64, b: f64, c_: f64, d: f64) -> Mat2 {
    Mat2::new(c(a, 0.0), c(b, 0.0), c(c_, 0.0), c(d, 0.0))
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn hadamard() -> Mat2 {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    real2(h, h, h, -h)
}

pub fn pauli_x() -> Mat2 {
    real2(0.0, 1.0, 1.0, 0.0)
}

pub fn pauli_y() -> Mat2 {
    mat2(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    real2(1.0, 0.0, 0.0, -1.0)
}

pub fn paulis() -> [Mat2; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// The phase gate `S(φ) = diag(e^{−iφ/2}, e^{iφ/2})`.
pub fn s_gate(phi: f64) -> Mat2 {
    mat2(cis(-phi / 2.0), ZERO, ZERO, cis(phi / 2.0))
}

/// `|k⟩⟨k|`.
pub fn projector(k: usize) -> Mat2 {
    if k == 0 {
        real2(1.0, 0.0, 0.0, 0.0)
    } else {
        real2(0.0, 0.0, 0.0, 1.0)
    }
}

pub fn ket(k: usize) -> Vec2 {
    if k == 0 {
        Vec2::new(ONE, ZERO)
    } else {
        Vec2::new(ZERO, ONE)
    }
}

/// `a ⊗ b` with the first factor on the more significant index.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, s| a[(r / 2, s / 2)] * b[(r % 2, s % 2)])
}

pub fn frob2(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `‖m†m − 𝟙‖_F`.
pub fn unitarity_defect(m: &Mat2) -> f64 {
    (m.adjoint() * m - Mat2::identity()).norm()
}

pub fn is_unitary(m: &Mat2, tol: f64) -> bool {
    unitarity_defect(m) <= tol
}

/// Relative distance of `m†m` from a multiple of the identity.
pub fn proportional_unitary_defect(m: &Mat2) -> f64 {
    let g = m.adjoint() * m;
    let s = (g[(0, 0)].re + g[(1, 1)].re) / 2.0;
    if s <= f64::MIN_POSITIVE {
        return f64::INFINITY;
    }
    (g - Mat2::identity().scale(s)).norm() / s
}

pub fn is_proportional_to_unitary(m: &Mat2, tol: f64) -> bool {
    proportional_unitary_defect(m) <= tol
}

/// Nonzero with vanishing determinant relative to its scale.
pub fn is_rank_one(m: &Mat2, tol: f64) -> bool {
    let n2 = frob2(m);
    n2 > tol * tol && m.determinant().norm() <= tol * n2
}

/// `min_χ ‖a − e^{iχ} b‖_F` over flat entry slices.
///
/// The optimal phase is applied explicitly so that nearly equal arguments do
/// not lose precision to cancellation.
pub fn phase_distance_slices(a: &[C64], b: &[C64]) -> f64 {
    let ov: C64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ph * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Phase-optimised Frobenius distance between two matrices.
pub fn phase_distance(a: &Mat2, b: &Mat2) -> f64 {
    phase_distance_slices(a.as_slice(), b.as_slice())
}

/// Phase-optimised distance after normalising both arguments.
pub fn ray_distance_slices(a: &[C64], b: &[C64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 0.0 } else { f64::INFINITY };
    }
    let an: alloc::vec::Vec<C64> = a.iter().map(|z| z / na).collect();
    let bn: alloc::vec::Vec<C64> = b.iter().map(|z| z / nb).collect();
    phase_distance_slices(&an, &bn)
}

/// `x` reduced into `[0, m)`.
pub fn wrap_angle(x: f64, m: f64) -> f64 {
    let r = x - m * (x / m).floor();
    if r >= m {
        0.0
    } else {
        r
    }
}

/// Rescale a nonsingular 2×2 matrix to unit determinant.
pub fn to_su2(m: &Mat2) -> Mat2 {
    let d = m.determinant();
    let s = d.sqrt();
    m.map(|z| z / s)
}

/// Normalised spinor whose Bloch vector is `n`.
pub fn spinor_from_bloch(n: [f64; 3]) -> Vec2 {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let (x, y, z) = (n[0] / norm, n[1] / norm, n[2] / norm);
    let theta = z.clamp(-1.0, 1.0).acos();
    let az = y.atan2(x);
    Vec2::new(c((theta / 2.0).cos(), 0.0), cis(az) * (theta / 2.0).sin())
}

pub fn is_finite(m: &Mat2) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Binary entropy of a probability vector, skipping zero weights.
pub fn entropy_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .fold(0.0, |acc, h| acc + h)
}
