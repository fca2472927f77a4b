//! Translation-invariant qubit wires as bond-dimension-2 MPS.
//!
//! Conventions: `A[x]_{i,j} = ⟨i,x|U|0,j⟩` where the first factor of the
//! two-qubit preparation unitary `U` is the carrier site `k+1` and the second
//! is the physical site `k`.  Amplitudes are `⟨x_n|A[x_{n−1}]⋯A[x_1]|0⟩`.

use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{complete_unitary, eigenvalues4};
use crate::mat::{c, entropy_bits, frob2, ket, Mat2, Mat4, Vec2, C64, ONE, ZERO};

/// A pair `(A[0], A[1])` of 2×2 matrices with `Σ A[x]†A[x] = 𝟙`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WireTensor {
    a: [Mat2; 2],
}

impl WireTensor {
    /// Checked constructor: the pair must be right-normalized within `tol`.
    pub fn new(a0: Mat2, a1: Mat2, tol: f64) -> Result<Self> {
        let t = Self { a: [a0, a1] };
        let defect = t.normalization_defect();
        if defect > tol || !defect.is_finite() {
            return Err(Error::NotNormalized { defect });
        }
        Ok(t)
    }

    /// Unchecked constructor for callers that normalize later (or test
    /// failure paths).
    pub fn from_raw(a0: Mat2, a1: Mat2) -> Self {
        Self { a: [a0, a1] }
    }

    /// Bring an arbitrary pair into right-normal form by the gauge
    /// `A ↦ Y^{1/2} A Y^{−1/2}/√η`, with `Y` the positive fixed point of the
    /// dual transfer map `Y ↦ Σ A†YA` and `η` its eigenvalue.
    pub fn canonicalize(a0: Mat2, a1: Mat2) -> Result<Self> {
        let a = [a0, a1];
        let dual = |y: &Mat2| a[0].adjoint() * y * a[0] + a[1].adjoint() * y * a[1];
        let mut y = Mat2::identity();
        let mut avg = Mat2::zeros();
        for it in 0..4000 {
            let ny = dual(&y);
            let tr = ny.trace().re;
            if tr.is_nan() || tr <= 0.0 {
                return Err(Error::InvalidArgument(
                    "transfer map annihilates the identity".into(),
                ));
            }
            let ny = ny.unscale(tr);
            if it >= 2000 {
                avg += ny;
            }
            let done = (ny - y).norm() < 1e-15;
            y = ny;
            if done {
                avg = y;
                break;
            }
        }
        if avg != y {
            avg = avg.unscale(avg.trace().re);
        }
        let y = (avg + avg.adjoint()).unscale(2.0);
        let eta = dual(&y).trace().re / y.trace().re;
        let eig = DMatrix::from_fn(2, 2, |r, s| y[(r, s)]).symmetric_eigen();
        if eig.eigenvalues.iter().any(|&e| e <= 1e-14) {
            return Err(Error::InvalidArgument(
                "fixed point of the dual map is singular".into(),
            ));
        }
        let v = &eig.eigenvectors;
        let mk = |p: f64| {
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| c(e.powf(p), 0.0)));
            let m = v * d * v.adjoint();
            Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
        };
        let (sq, isq) = (mk(0.5), mk(-0.5));
        let s = 1.0 / eta.sqrt();
        let b0 = (sq * a[0] * isq).scale(s);
        let b1 = (sq * a[1] * isq).scale(s);
        Self::new(b0, b1, 1e-9)
    }

    pub fn a0(&self) -> &Mat2 {
        &self.a[0]
    }

    pub fn a1(&self) -> &Mat2 {
        &self.a[1]
    }

    pub fn get(&self, x: usize) -> &Mat2 {
        &self.a[x]
    }

    pub fn matrices(&self) -> &[Mat2; 2] {
        &self.a
    }

    /// `‖Σ A[x]†A[x] − 𝟙‖_F`.
    pub fn normalization_defect(&self) -> f64 {
        (self.a[0].adjoint() * self.a[0] + self.a[1].adjoint() * self.a[1] - Mat2::identity())
            .norm()
    }

    /// `ρ ↦ Σ A[x] ρ A[x]†`.
    pub fn apply_channel(&self, rho: &Mat2) -> Mat2 {
        self.a[0] * rho * self.a[0].adjoint() + self.a[1] * rho * self.a[1].adjoint()
    }

    /// Conjugate both matrices: `A[x] ↦ X A[x] X⁻¹`.
    pub fn conjugate(&self, x: &Mat2) -> Self {
        let xi = x.try_inverse().expect("invertible conjugation");
        Self {
            a: [x * self.a[0] * xi, x * self.a[1] * xi],
        }
    }

    /// Physical basis change: `A[x] ↦ Σ_j M_{x,j} A[j]`.
    pub fn mix_physical(&self, m: &Mat2) -> Self {
        let f = |x: usize| self.a[0] * m[(x, 0)] + self.a[1] * m[(x, 1)];
        Self { a: [f(0), f(1)] }
    }
}

/// Matrix of the channel `ρ ↦ Σ A[x] ρ A[x]†` acting on row-major `vec(ρ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferChannel {
    pub m: Mat4,
    /// Eigenvalues sorted by decreasing modulus.
    pub eigenvalues: [C64; 4],
}

impl TransferChannel {
    /// `1 − |λ₂|`.
    pub fn gap(&self) -> f64 {
        1.0 - self.eigenvalues[1].norm()
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let v = self.m * nalgebra::Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]);
        Mat2::new(v[0], v[1], v[2], v[3])
    }

    /// `‖𝔼(𝟙) − 𝟙‖_F`.
    pub fn unitality_residual(&self) -> f64 {
        (self.apply(&Mat2::identity()) - Mat2::identity()).norm()
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_residual() <= tol
    }

    /// `‖𝔼*(𝟙) − 𝟙‖_F`; zero for right-normalized tensors.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for col in 0..4 {
            let s = self.m[(0, col)] + self.m[(3, col)];
            let want = if col == 0 || col == 3 { ONE } else { ZERO };
            r += (s - want).norm_sqr();
        }
        r.sqrt()
    }

    /// The unique state with `𝔼(ρ) = ρ`, assuming a gapped channel.
    pub fn fixed_point(&self) -> Mat2 {
        let mut a = self.m - Mat4::identity();
        for col in 0..4 {
            a[(0, col)] = if col == 0 || col == 3 { ONE } else { ZERO };
        }
        let mut b = nalgebra::Vector4::zeros();
        b[0] = ONE;
        let x = a
            .lu()
            .solve(&b)
            .expect("gapped channel has a unique fixed point");
        let rho = Mat2::new(x[0], x[1], x[2], x[3]);
        (rho + rho.adjoint()).unscale(2.0)
    }
}

/// A normalized correlation-space vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryState {
    pub v: Vec2,
}

impl BoundaryState {
    pub fn new(v: Vec2) -> Result<Self> {
        let n = v.norm();
        if n.is_nan() || n <= 1e-300 || !n.is_finite() {
            return Err(Error::ZeroProbabilityBranch { prob: n * n });
        }
        Ok(Self { v: v.unscale(n) })
    }

    pub fn zero() -> Self {
        Self { v: ket(0) }
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &BoundaryState) -> f64 {
        self.v.dotc(&other.v).norm_sqr()
    }
}

pub fn from_preparation_unitary(u: &Mat4, tol: f64) -> Result<WireTensor> {
    let defect = (u.adjoint() * u - Mat4::identity()).norm();
    if defect > tol || !defect.is_finite() {
        return Err(Error::NotUnitary { defect });
    }
    let a = |x: usize| Mat2::from_fn(|i, j| u[(2 * i + x, j)]);
    Ok(WireTensor::from_raw(a(0), a(1)))
}

/// Inverse of [`from_preparation_unitary`]; the columns `|1,j⟩` are filled by
/// a deterministic orthonormal completion.
pub fn to_preparation_unitary(t: &WireTensor) -> Result<Mat4> {
    let defect = t.normalization_defect();
    if defect > 1e-10 {
        return Err(Error::NotNormalized { defect });
    }
    let mut m = DMatrix::from_element(4, 4, ZERO);
    for i in 0..2 {
        for x in 0..2 {
            for j in 0..2 {
                m[(2 * i + x, j)] = t.get(x)[(i, j)];
            }
        }
    }
    complete_unitary(&mut m, &[0, 1]);
    Ok(Mat4::from_fn(|r, s| m[(r, s)]))
}

pub fn transfer_channel(t: &WireTensor) -> TransferChannel {
    let mut m = Mat4::zeros();
    for a in t.matrices() {
        m += crate::mat::kron(a, &a.map(|z| z.conj()));
    }
    TransferChannel {
        m,
        eigenvalues: eigenvalues4(&m),
    }
}

/// `c̄₀A[0] + c̄₁A[1]` for the local vector `c₀|0⟩ + c₁|1⟩`.
pub fn local_operator(t: &WireTensor, phi: &Vec2) -> Mat2 {
    t.a0() * phi[0].conj() + t.a1() * phi[1].conj()
}

/// Coefficient of `|x₁,…,x_n⟩` (site 1 first).
pub fn amplitude(t: &WireTensor, outcomes: &[u8]) -> Result<C64> {
    let (&last, prefix) = outcomes
        .split_last()
        .ok_or_else(|| Error::InvalidArgument("amplitude needs at least one site".into()))?;
    let mut v = ket(0);
    for &x in prefix {
        v = t.get(x as usize) * v;
    }
    Ok(v[last as usize])
}

/// Single-site reduced state far from the boundary of a normal-form wire.
pub fn single_site_rho(phi: f64) -> Mat2 {
    let h = (phi / 2.0).cos() / 2.0;
    crate::mat::real2(0.5, h, h, 0.5)
}

/// Entropy in bits of [`single_site_rho`].
pub fn single_site_entropy(phi: f64) -> f64 {
    let h = (phi / 2.0).cos().abs();
    entropy_bits([(1.0 + h) / 2.0, (1.0 - h) / 2.0])
}

/// Entropy (bits) of a 2×2 density matrix.
pub fn entropy2(rho: &Mat2) -> f64 {
    let tr = rho.trace().re;
    let det = rho.determinant().re;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    entropy_bits([tr / 2.0 + disc, tr / 2.0 - disc])
}

/// Half-chain entanglement after `k` sites, `S(𝔼^k(|0⟩⟨0|))`.
pub fn halfchain_entropy_at(t: &WireTensor, k: usize) -> f64 {
    let mut rho = crate::mat::projector(0);
    for _ in 0..k {
        rho = t.apply_channel(&rho);
    }
    entropy2(&rho)
}

/// Limiting half-chain entanglement; exactly one ebit for unital channels.
pub fn halfchain_entropy_limit(t: &WireTensor, gap_threshold: f64, tol: f64) -> Result<f64> {
    let ch = transfer_channel(t);
    let gap = ch.gap();
    if gap <= gap_threshold {
        return Err(Error::NoGap { gap });
    }
    if ch.is_unital(tol) {
        return Ok(1.0);
    }
    Ok(entropy2(&ch.fixed_point()))
}

/// Convenience: the trace norm squared of an operator, `tr(A†A)`.
pub fn hs_norm2(m: &Mat2) -> f64 {
    frob2(m)
}

/// All `2ⁿ` amplitudes, site 1 least significant.
pub fn all_amplitudes(t: &WireTensor, n: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(1 << n);
    let mut xs = alloc::vec![0u8; n];
    for idx in 0..(1usize << n) {
        for (s, x) in xs.iter_mut().enumerate() {
            *x = ((idx >> s) & 1) as u8;
        }
        out.push(amplitude(t, &xs).expect("n ≥ 1"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{cis, hadamard, projector, s_gate, to_su2};
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn cluster() -> WireTensor {
        WireTensor::new(hadamard() * projector(0), hadamard() * projector(1), 1e-12).unwrap()
    }

    fn normal_form(w: Mat2, phi: f64) -> WireTensor {
        WireTensor::new(
            w.scale(FRAC_1_SQRT_2),
            (w * s_gate(phi)).scale(FRAC_1_SQRT_2),
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn identity_unitary_gives_projector_pattern() {
        let t = from_preparation_unitary(&Mat4::identity(), 1e-10).unwrap();
        assert_eq!(*t.a0(), projector(0));
        // A[1]_{i,j} = ⟨i,1|0,j⟩ = δ_{i0} δ_{1j}: the map |1⟩ ↦ |0⟩.
        assert_eq!(t.a1()[(0, 1)], ONE);
        assert_eq!(t.a1()[(0, 0)] + t.a1()[(1, 0)] + t.a1()[(1, 1)], ZERO);
    }

    #[test]
    fn non_unitary_preparation_is_rejected() {
        let mut u = Mat4::identity();
        u[(0, 0)] = c(1.001, 0.0);
        assert!(matches!(
            from_preparation_unitary(&u, 1e-10),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn preparation_round_trip() {
        let t = normal_form(to_su2(&hadamard()), PI);
        let u = to_preparation_unitary(&t).unwrap();
        let back = from_preparation_unitary(&u, 1e-10).unwrap();
        assert!((back.a0() - t.a0()).norm() < 1e-14);
        assert!((back.a1() - t.a1()).norm() < 1e-14);
    }

    #[test]
    fn scaled_tensor_is_rejected() {
        let t = cluster();
        let bad = WireTensor::from_raw(t.a0().scale(1.1), t.a1().scale(1.1));
        assert!(matches!(
            to_preparation_unitary(&bad),
            Err(Error::NotNormalized { .. })
        ));
        assert!(WireTensor::new(*bad.a0(), *bad.a1(), 1e-9).is_err());
        let fixed = WireTensor::canonicalize(*bad.a0(), *bad.a1()).unwrap();
        assert!(fixed.normalization_defect() < 1e-9);
    }

    #[test]
    fn canonicalize_non_normal_gauge() {
        let t = normal_form(to_su2(&hadamard()), 1.3);
        let g = crate::mat::real2(2.0, 0.5, 0.0, 1.0);
        let gi = g.try_inverse().unwrap();
        let a0 = g * t.a0() * gi;
        let a1 = g * t.a1() * gi;
        let fixed = WireTensor::canonicalize(a0, a1).unwrap();
        assert!(fixed.normalization_defect() < 1e-9);
        let ch = transfer_channel(&fixed);
        assert!((ch.eigenvalues[0].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cluster_channel_is_unital_with_gap() {
        let ch = transfer_channel(&cluster());
        assert!(ch.is_unital(1e-12));
        assert!((ch.eigenvalues[0].norm() - 1.0).abs() < 1e-12);
        assert!(ch.gap() > 0.5);
        assert!(ch.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn degenerate_tensor_has_no_gap() {
        let h = hadamard().scale(FRAC_1_SQRT_2);
        let t = WireTensor::new(h, h, 1e-12).unwrap();
        let ch = transfer_channel(&t);
        for e in ch.eigenvalues {
            assert!((e.norm() - 1.0).abs() < 1e-9);
        }
        assert!(ch.gap().abs() < 1e-9);
        assert!(matches!(
            halfchain_entropy_limit(&t, 1e-6, 1e-9),
            Err(Error::NoGap { .. })
        ));
    }

    #[test]
    fn local_operator_cases() {
        let t = cluster();
        assert_eq!(local_operator(&t, &ket(0)), *t.a0());
        let plus = crate::mat::Vec2::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0));
        let want = (t.a0() + t.a1()).scale(FRAC_1_SQRT_2);
        assert!((local_operator(&t, &plus) - want).norm() < 1e-15);
        // Hand contraction: H(|0⟩⟨0| + |1⟩⟨1|)/√2 = H/√2.
        assert!((want - hadamard().scale(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn preparation_vector_is_rank_one() {
        let phi = 1.1;
        let w = to_su2(&hadamard());
        let t = normal_form(w, phi);
        let v = crate::mat::Vec2::new(c(FRAC_1_SQRT_2, 0.0), -cis(-phi / 2.0) * FRAC_1_SQRT_2);
        let k = local_operator(&t, &v);
        assert!(crate::mat::is_rank_one(&k, 1e-12));
        let want = w * projector(1) * ((ONE - cis(phi)) / 2.0);
        assert!((k - want).norm() < 1e-14);
    }

    #[test]
    fn amplitudes_are_normalized() {
        let t = normal_form(to_su2(&hadamard()), 0.7);
        for n in 1..=6 {
            let s: f64 = all_amplitudes(&t, n).iter().map(|z| z.norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_symmetry_in_outcomes() {
        let h = hadamard().scale(FRAC_1_SQRT_2);
        let t = WireTensor::new(h, h, 1e-12).unwrap();
        let a = amplitude(&t, &[0, 1]).unwrap();
        let b = amplitude(&t, &[1, 0]).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-14);
    }

    #[test]
    fn single_site_quantities() {
        assert!((single_site_rho(PI) - Mat2::identity().scale(0.5)).norm() < 1e-15);
        let r = single_site_rho(PI / 2.0);
        assert!((r[(0, 1)].re - (PI / 4.0).cos() / 2.0).abs() < 1e-15);
        assert!((single_site_entropy(PI) - 1.0).abs() < 1e-12);
        assert!(single_site_entropy(1e-9) < 1e-12);
        let h = (PI / 4.0).cos();
        let want = entropy_bits([(1.0 + h) / 2.0, (1.0 - h) / 2.0]);
        assert!((single_site_entropy(PI / 2.0) - want).abs() < 1e-15);
        let mut prev = -1.0;
        for k in 0..=50 {
            let s = single_site_entropy(PI * k as f64 / 50.0);
            assert!(s >= prev - 1e-15);
            prev = s;
        }
    }

    #[test]
    fn normal_forms_have_one_ebit() {
        let t = normal_form(to_su2(&hadamard()), PI / 2.0);
        assert_eq!(halfchain_entropy_limit(&t, 1e-6, 1e-9).unwrap(), 1.0);
        assert!((halfchain_entropy_at(&t, 60) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn non_unital_limit_uses_fixed_point() {
        // Amplitude damping: not unital, gapped.
        let g = 0.4f64;
        let a0 = crate::mat::real2(1.0, 0.0, 0.0, (1.0 - g).sqrt());
        let a1 = crate::mat::real2(0.0, g.sqrt(), 0.0, 0.0);
        let t = WireTensor::new(a0, a1, 1e-12).unwrap();
        let s = halfchain_entropy_limit(&t, 1e-6, 1e-9).unwrap();
        assert!((s - halfchain_entropy_at(&t, 400)).abs() < 1e-8);
        assert!(s < 1.0);
    }
}
