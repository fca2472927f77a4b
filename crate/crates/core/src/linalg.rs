//! Dense linear-algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::mat::{c, entropy_bits, Mat4, C64};

/// Eigenvalues of a 4×4 complex matrix, sorted by decreasing modulus.
pub fn eigenvalues4(m: &Mat4) -> [C64; 4] {
    let ev = nalgebra::Schur::new(*m)
        .eigenvalues()
        .expect("complex Schur form is triangular");
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    out
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Von Neumann entropy (bits) of a density matrix.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    entropy_bits(hermitian_eigenvalues(rho))
}

pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Entropy (bits) of the bipartition described by the rows and columns of
/// `psi`, i.e. of the state `Σ psi[a,b] |a⟩|b⟩`.
pub fn bipartite_entropy(psi: &DMatrix<C64>) -> f64 {
    let s = singular_values(psi);
    let norm: f64 = s.iter().map(|x| x * x).sum();
    entropy_bits(s.iter().map(|x| x * x / norm))
}

/// Operator-Schmidt coefficients of a two-qubit operator, descending and
/// normalised to unit Euclidean norm.
pub fn operator_schmidt(v: &Mat4) -> [f64; 4] {
    let r = DMatrix::from_fn(4, 4, |p, q| {
        let (i, j) = (p / 2, p % 2);
        let (k, l) = (q / 2, q % 2);
        v[(2 * i + k, 2 * j + l)]
    });
    let s = singular_values(&r);
    let n: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    [s[0] / n, s[1] / n, s[2] / n, s[3] / n]
}

pub fn schmidt_rank(coeffs: &[f64], tol: f64) -> usize {
    coeffs.iter().filter(|&&x| x > tol).count()
}

/// `exp(−i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&e| c((-t * e).cos(), (-t * e).sin())),
    ));
    u * d * u.adjoint()
}

/// Fill the columns of `m` not listed in `fixed` so that `m` becomes unitary.
///
/// The listed columns must already be orthonormal.  Candidates are the
/// standard basis vectors; at every step the one with the largest residual
/// after projection is taken, which makes the completion deterministic.
pub fn complete_unitary(m: &mut DMatrix<C64>, fixed: &[usize]) {
    let n = m.nrows();
    let mut basis: Vec<DVector<C64>> = fixed.iter().map(|&j| m.column(j).into_owned()).collect();
    for col in 0..n {
        if fixed.contains(&col) {
            continue;
        }
        let mut best: Option<(f64, DVector<C64>)> = None;
        for e in 0..n {
            let mut v = DVector::from_element(n, c(0.0, 0.0));
            v[e] = c(1.0, 0.0);
            for b in &basis {
                let ov = b.dotc(&v);
                v -= b * ov;
            }
            let r = v.norm();
            if best.as_ref().map_or(true, |(br, _)| r > *br + 1e-12) {
                best = Some((r, v));
            }
        }
        let (r, v) = best.expect("non-empty candidate set");
        let v = v.unscale(r);
        m.set_column(col, &v);
        basis.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{hadamard, identity, kron, pauli_z, projector};

    #[test]
    fn schmidt_of_product_and_cz() {
        let p = kron(&hadamard(), &pauli_z());
        let s = operator_schmidt(&p);
        assert_eq!(schmidt_rank(&s, 1e-9), 1);
        let cz = kron(&projector(0), &identity()) + kron(&projector(1), &pauli_z());
        let s = operator_schmidt(&cz);
        assert_eq!(schmidt_rank(&s, 1e-9), 2);
        assert!((s[0] - s[1]).abs() < 1e-12);
    }

    #[test]
    fn completion_is_unitary_and_keeps_fixed_columns() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let mut m = DMatrix::from_element(4, 4, c(0.0, 0.0));
        m[(0, 0)] = c(h, 0.0);
        m[(3, 0)] = c(0.0, h);
        m[(1, 1)] = c(1.0, 0.0);
        let orig = m.clone();
        complete_unitary(&mut m, &[0, 1]);
        let g = m.adjoint() * &m;
        assert!((g - DMatrix::identity(4, 4)).norm() < 1e-12);
        assert_eq!(m.column(0), orig.column(0));
    }

    #[test]
    fn expm_of_projector() {
        let mut p = DMatrix::from_element(2, 2, c(0.0, 0.0));
        p[(1, 1)] = c(1.0, 0.0);
        let u = expm_hermitian(&p, -core::f64::consts::FRAC_PI_2);
        assert!((u[(1, 1)] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn entropy_of_bell() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
        assert!((bipartite_entropy(&psi) - 1.0).abs() < 1e-12);
    }
}
