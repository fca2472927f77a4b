//! Seeded random sampling of unitaries, states and wires.

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::mat::{c, Mat2, Mat4, Vec2, C64};
use crate::mps::{from_preparation_unitary, WireTensor};

/// The crate-wide deterministic generator.
pub type Rng64 = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    rand::SeedableRng::seed_from_u64(seed)
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn cgauss<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(gauss(rng), gauss(rng))
}

/// Haar-random element of SU(2) (uniform unit quaternion).
pub fn haar_su2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let mut q = [0.0; 4];
    let mut n = 0.0;
    while n < 1e-12 {
        for v in q.iter_mut() {
            *v = gauss(rng);
        }
        n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let a = c(q[0], q[1]) / n;
    let b = c(q[2], q[3]) / n;
    Mat2::new(a, b, -b.conj(), a.conj())
}

/// Haar-random unitary of any dimension (QR of a Ginibre matrix with the
/// phase correction on the diagonal of `R`).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let z = DMatrix::from_fn(dim, dim, |_, _| cgauss(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= ph;
    }
    q
}

pub fn haar_unitary4<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    let u = haar_unitary(rng, 4);
    Mat4::from_fn(|r, s| u[(r, s)])
}

pub fn random_unit_vec2<R: Rng + ?Sized>(rng: &mut R) -> Vec2 {
    let v = Vec2::new(cgauss(rng), cgauss(rng));
    v.unscale(v.norm())
}

/// By-product angle uniform on `(0, 2π)`, kept away from the degenerate ends.
pub fn random_phi<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Uniform::new(0.05, 2.0 * core::f64::consts::PI - 0.05))
}

/// A wire from a Haar-random preparation unitary.
pub fn random_wire<R: Rng + ?Sized>(rng: &mut R) -> WireTensor {
    from_preparation_unitary(&haar_unitary4(rng), 1e-9).expect("Haar unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{is_unitary, ONE};

    #[test]
    fn samples_are_unitary_and_reproducible() {
        let mut a = seeded(7);
        let mut b = seeded(7);
        let u = haar_su2(&mut a);
        assert_eq!(u, haar_su2(&mut b));
        assert!(is_unitary(&u, 1e-12));
        assert!((u.determinant() - ONE).norm() < 1e-12);
        let v = haar_unitary4(&mut a);
        assert!((v.adjoint() * v - Mat4::identity()).norm() < 1e-12);
    }

    #[test]
    fn random_wires_are_normalized() {
        let mut r = seeded(1);
        for _ in 0..20 {
            assert!(random_wire(&mut r).normalization_defect() < 1e-12);
        }
    }
}
