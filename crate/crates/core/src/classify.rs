//! Reduction of a qubit wire to its normal form `(W, φ)`.
//!
//! The steps follow the structure of the classification argument: check
//! the spectral gap and unitality of the transfer channel, mix the two Kraus
//! operators into multiples of unitaries, diagonalize `U₀†U₁` by a
//! correlation-space conjugation, remove the relative phase by a physical
//! phase, and finally equalize both branch weights to 1/2 with a real
//! rotation of the physical basis.

use nalgebra::Matrix3;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mat::{
    cis, frob2, mat2, pauli_x, paulis, real2, s_gate, spinor_from_bloch, unitarity_defect,
    wrap_angle, Mat2, C64, I, ONE, ZERO,
};
use crate::mps::{transfer_channel, WireTensor};
use crate::random::{haar_su2, seeded};
use crate::Tolerances;
use core::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

/// `B[0] = W/√2`, `B[1] = W·S(φ)/√2` with `W ∈ SU(2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalFormWire {
    pub w: Mat2,
    pub phi: f64,
}

impl NormalFormWire {
    /// `w` must be special unitary within `1e-9`; `φ` is reduced into `[0, 2π)`.
    pub fn new(w: Mat2, phi: f64) -> Result<Self> {
        let defect = unitarity_defect(&w) + (w.determinant() - ONE).norm();
        if defect > 1e-9 {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self {
            w,
            phi: wrap_angle(phi, TAU),
        })
    }

    /// The cluster wire, `W = H` (made special unitary) and `φ = π`.
    pub fn cluster() -> Self {
        Self::new(hadamard_su2(), PI).expect("iH is special unitary")
    }

    /// The T-resource, `W = H` and `φ = π/2`.
    pub fn t_resource() -> Self {
        Self::new(hadamard_su2(), PI / 2.0).expect("iH is special unitary")
    }

    pub fn b(&self, x: usize) -> Mat2 {
        if x == 0 {
            self.w.scale(FRAC_1_SQRT_2)
        } else {
            (self.w * s_gate(self.phi)).scale(FRAC_1_SQRT_2)
        }
    }

    pub fn tensor(&self) -> WireTensor {
        WireTensor::from_raw(self.b(0), self.b(1))
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        let p = wrap_angle(self.phi, TAU);
        p < tol || TAU - p < tol
    }
}

/// `iH`, the Hadamard gate rescaled into SU(2).
pub fn hadamard_su2() -> Mat2 {
    crate::mat::hadamard() * I
}

/// Gauge relating the normal form to the input tensor:
/// `B[x] = Σ_j M_{x,j} · X A[j] X†`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeData {
    /// Kraus mixing making each operator proportional to a unitary.
    pub v: Mat2,
    /// Correlation-space conjugation.
    pub x: Mat2,
    /// Relative phase removed from the second operator.
    pub alpha: f64,
    /// Angle of the real rotation equalizing the branch weights.
    pub mix: f64,
    /// Composed physical-basis transformation (unitary).
    pub m: Mat2,
}

impl GaugeData {
    /// `max_x ‖B[x] − Σ_j M_{x,j} X A[j] X†‖`.
    pub fn residual(&self, t: &WireTensor, nf: &NormalFormWire) -> f64 {
        let g = t.mix_physical(&self.m).conjugate(&self.x);
        (nf.b(0) - g.a0()).norm().max((nf.b(1) - g.a1()).norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Wire,
    NotGapped,
    NotUnital,
    Degenerate,
    ChoiRankExceeded,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Wire => "Wire",
            Verdict::NotGapped => "NotGapped",
            Verdict::NotUnital => "NotUnital",
            Verdict::Degenerate => "Degenerate",
            Verdict::ChoiRankExceeded => "ChoiRankExceeded",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub normal_form: Option<NormalFormWire>,
    pub gauge: Option<GaugeData>,
    pub gap: f64,
    pub unitality_residual: f64,
    /// Smallest singular value of the unitarity constraint system; zero for
    /// channels that are mixtures of two unitaries.
    pub mixing_residual: f64,
    pub reconstruction_residual: Option<f64>,
    /// Every verdict past the gap check assumes that the peripheral spectrum
    /// of the transfer channel is the single eigenvalue 1.
    pub assumes_unique_peripheral_eigenvalue: bool,
}

impl ClassificationReport {
    fn failed(verdict: Verdict, gap: f64, unitality: f64) -> Self {
        Self {
            verdict,
            normal_form: None,
            gauge: None,
            gap,
            unitality_residual: unitality,
            mixing_residual: f64::NAN,
            reconstruction_residual: None,
            assumes_unique_peripheral_eigenvalue: verdict != Verdict::NotGapped,
        }
    }
}

/// Classify with default gap and degeneracy thresholds.
pub fn classify(t: &WireTensor, tol: f64) -> Result<ClassificationReport> {
    classify_with(
        t,
        &Tolerances {
            eq: tol,
            ..Tolerances::default()
        },
    )
}

pub fn classify_with(t: &WireTensor, tol: &Tolerances) -> Result<ClassificationReport> {
    let defect = t.normalization_defect();
    if defect > 1e-8 {
        return Err(Error::NotNormalized { defect });
    }
    let ch = transfer_channel(t);
    let gap = ch.gap();
    let unital = ch.unitality_residual();
    if gap <= tol.gap {
        return Ok(ClassificationReport::failed(
            Verdict::NotGapped,
            gap,
            unital,
        ));
    }
    if unital > tol.eq.max(1e-12) {
        return Ok(ClassificationReport::failed(
            Verdict::NotUnital,
            gap,
            unital,
        ));
    }

    // Kraus mixing: find a row r with Σ r_j A[j] ∝ unitary.
    let a = t.matrices();
    let sig = paulis();
    let mut r = Matrix3::<f64>::zeros();
    for k in 0..3 {
        let q = Mat2::from_fn(|p, s| (sig[k] * a[p].adjoint() * a[s]).trace());
        for m in 0..3 {
            r[(k, m)] = (q * sig[m]).trace().re / 2.0;
        }
    }
    let svd = r.svd(false, true);
    let (imin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, s)| (i, *s))
        .expect("three singular values");
    let scale = svd.singular_values.max().max(1.0);
    if smin > 1e-6 * scale {
        let mut rep = ClassificationReport::failed(Verdict::ChoiRankExceeded, gap, unital);
        rep.mixing_residual = smin;
        return Ok(rep);
    }
    let vt = svd.v_t.expect("requested");
    let n = [vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)]];
    let sp = spinor_from_bloch(n);
    let v = mat2(sp[0], sp[1], -sp[1].conj(), sp[0].conj());

    let k = t.mix_physical(&v);
    let p0 = frob2(k.a0()) / 2.0;
    let p1 = frob2(k.a1()) / 2.0;
    let u0 = k.a0().unscale(p0.sqrt());
    let u1 = k.a1().unscale(p1.sqrt());

    // Diagonalize D = U₀†U₁ with an SU(2) eigenbasis.
    let d = u0.adjoint() * u1;
    let Some(pmat) = unitary_eigenbasis(&d) else {
        let mut rep = ClassificationReport::failed(Verdict::Degenerate, gap, unital);
        rep.mixing_residual = smin;
        return Ok(rep);
    };
    let mut x = pmat.adjoint();
    let lam = x * d * x.adjoint();
    let alpha = (lam[(0, 0)].arg() + lam[(1, 1)].arg()) / 2.0;

    let mut m = v;
    let mut cur = k.conjugate(&x);
    // Remove the determinant phase of W and the relative phase α.
    let beta = cur.a0().determinant().arg() / 2.0;
    let beta1 = cur.a1().determinant().arg() / 2.0;
    let ph = mat2(cis(-beta), ZERO, ZERO, cis(-beta1));
    m = ph * m;
    cur = t.mix_physical(&m).conjugate(&x);

    // Equalize weights with a real rotation.
    let w0 = cur.a0().unscale(p0.sqrt());
    let sdiag = w0.adjoint() * cur.a1().unscale(p1.sqrt());
    let phi0 = sdiag[(1, 1)].arg() - sdiag[(0, 0)].arg();
    let kk = (p0 * p1).sqrt() * (phi0 / 2.0).cos();
    let mix = 0.5 * (p0 - p1).atan2(2.0 * kk);
    let (s, cth) = mix.sin_cos();
    m = real2(cth, -s, s, cth) * m;
    cur = t.mix_physical(&m).conjugate(&x);

    // Read off the phases of the equalized diagonal factors.
    let wref = w0;
    let e0 = wref.adjoint() * cur.a0();
    let e1 = wref.adjoint() * cur.a1();
    let g0 = (e0[(0, 0)].arg() + e0[(1, 1)].arg()) / 2.0;
    let g1 = (e1[(0, 0)].arg() + e1[(1, 1)].arg()) / 2.0;
    m = mat2(cis(-g0), ZERO, ZERO, cis(-g1)) * m;
    cur = t.mix_physical(&m).conjugate(&x);
    let w = cur.a0().scale(2f64.sqrt());
    let sd = w.adjoint() * cur.a1().scale(2f64.sqrt());
    let mut phi = wrap_angle(sd[(1, 1)].arg() - sd[(0, 0)].arg(), TAU);
    // S(φ) and S(φ − 2π) differ by a sign; fold it into the physical basis.
    if (s_gate(phi) - sd).norm() > (s_gate(phi) + sd).norm() {
        m = mat2(ONE, ZERO, ZERO, -ONE) * m;
    }
    // Use the correlation relabeling σₓ to bring φ into (0, π].
    if phi > PI {
        let isx = pauli_x() * I;
        x = isx * x;
        phi = TAU - phi;
        m = mat2(ONE, ZERO, ZERO, -ONE) * m;
    }
    cur = t.mix_physical(&m).conjugate(&x);
    let w = crate::mat::to_su2(&cur.a0().scale(2f64.sqrt()));
    // `to_su2` may flip the sign of `W`; compensate physically on both rows.
    if (w - cur.a0().scale(2f64.sqrt())).norm() > 1e-6 {
        m = -m;
    }

    if phi < tol.degenerate {
        let mut rep = ClassificationReport::failed(Verdict::Degenerate, gap, unital);
        rep.mixing_residual = smin;
        return Ok(rep);
    }
    let nf = NormalFormWire { w, phi };
    let gauge = GaugeData {
        v,
        x,
        alpha,
        mix,
        m,
    };
    let residual = gauge.residual(t, &nf);
    Ok(ClassificationReport {
        verdict: Verdict::Wire,
        normal_form: Some(nf),
        gauge: Some(gauge),
        gap,
        unitality_residual: unital,
        mixing_residual: smin,
        reconstruction_residual: Some(residual),
        assumes_unique_peripheral_eigenvalue: true,
    })
}

/// SU(2) matrix whose columns are eigenvectors of the unitary `d`, or `None`
/// when `d` is a multiple of the identity.
fn unitary_eigenbasis(d: &Mat2) -> Option<Mat2> {
    let tr = d.trace();
    let det = d.determinant();
    let disc = (tr * tr / 4.0 - det).sqrt();
    if disc.norm() < 1e-9 {
        return None;
    }
    let l1 = tr / 2.0 + disc;
    let c1 = (d[(0, 1)], l1 - d[(0, 0)]);
    let c2 = (l1 - d[(1, 1)], d[(1, 0)]);
    let (e0, e1) = if c1.0.norm_sqr() + c1.1.norm_sqr() >= c2.0.norm_sqr() + c2.1.norm_sqr() {
        c1
    } else {
        c2
    };
    let n = (e0.norm_sqr() + e1.norm_sqr()).sqrt();
    let (e0, e1) = (e0 / n, e1 / n);
    Some(mat2(e0, -e1.conj(), e1, e0.conj()))
}

/// Apply a physical basis change `v` (must be unitary) and a correlation
/// conjugation `x` (must be unitary).
pub fn apply_gauge(t: &WireTensor, v: &Mat2, x: &Mat2) -> Result<WireTensor> {
    for g in [v, x] {
        let defect = unitarity_defect(g);
        if defect > 1e-10 {
            return Err(Error::NotUnitary { defect });
        }
    }
    Ok(t.mix_physical(v).conjugate(x))
}

/// A random unitary physical basis change and correlation conjugation.
pub fn random_gauge(t: &WireTensor, seed: u64) -> WireTensor {
    let mut rng = seeded(seed);
    let ph: f64 = rng.gen_range(0.0..TAU);
    let v = haar_su2(&mut rng) * cis(ph);
    let x = haar_su2(&mut rng);
    apply_gauge(t, &v, &x).expect("Haar samples are unitary")
}

/// Whether two normal forms describe the same wire up to the residual gauge
/// group: global phase on `W`, conjugation by diagonal unitaries, the
/// correlation relabeling `(W, φ) ↦ (σₓWσₓ, 2π − φ)` and the outcome swap
/// `(W, φ) ↦ (W·S(φ), 2π − φ)`.
///
/// At `φ = π` every real rotation of the physical basis preserves the
/// normal form, which adds the continuous symmetry `W ↦ W·S(α)`; there the
/// test reduces to `W₁ = D₁ W₂ D₂` for diagonal unitaries `D₁, D₂`.
pub fn equivalent(n1: &NormalFormWire, n2: &NormalFormWire, tol: f64) -> bool {
    if angle_distance(n1.phi, PI) <= tol && angle_distance(n2.phi, PI) <= tol {
        return diag_sandwich_equal(&n1.w, &n2.w, tol);
    }
    let sx = pauli_x();
    let swapped = NormalFormWire {
        w: n2.w * s_gate(n2.phi),
        phi: TAU - n2.phi,
    };
    for cand in [*n2, swapped] {
        for flip in [false, true] {
            let (w, phi) = if flip {
                (sx * cand.w * sx, TAU - cand.phi)
            } else {
                (cand.w, cand.phi)
            };
            if angle_distance(n1.phi, phi) <= tol && diag_conjugate_equal(&n1.w, &w, tol) {
                return true;
            }
        }
    }
    false
}

/// Distance between two angles modulo 2π.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b, TAU);
    d.min(TAU - d)
}

/// `a = D₁ b D₂` for diagonal unitaries: equal entry moduli and, when all
/// entries are nonzero, equal phase of `a₀₀a₁₁/(a₀₁a₁₀)`.
fn diag_sandwich_equal(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    for k in 0..4 {
        if (a[k].norm() - b[k].norm()).abs() > tol {
            return false;
        }
    }
    if a.iter().all(|z| z.norm() > 1e-6) {
        let cr = |m: &Mat2| m[(0, 0)] * m[(1, 1)] / (m[(0, 1)] * m[(1, 0)]);
        let (x, y) = (cr(a), cr(b));
        return (x / x.norm() - y / y.norm()).norm() <= tol * 10.0;
    }
    true
}

/// `a = e^{iχ} D b D†` for some phase `χ` and diagonal unitary `D`.
fn diag_conjugate_equal(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    for k in 0..4 {
        if (a[k].norm() - b[k].norm()).abs() > tol {
            return false;
        }
    }
    let ratio = |p: C64, q: C64| if q.norm() > 1e-300 { p / q } else { ONE };
    // Global phase from the larger diagonal entry, relative phase from the
    // larger off-diagonal entry; the remaining entries must then agree.
    let diag = if a[(0, 0)].norm() >= a[(1, 1)].norm() {
        (0, 0)
    } else {
        (1, 1)
    };
    let chi = if a[diag].norm() > 1e-6 {
        ratio(a[diag], b[diag]).unscale(ratio(a[diag], b[diag]).norm())
    } else {
        ONE
    };
    let off = if a[(0, 1)].norm() >= a[(1, 0)].norm() {
        (0, 1)
    } else {
        (1, 0)
    };
    let mut beta = ONE;
    if a[off].norm() > 1e-6 {
        let q = ratio(a[off], b[off] * chi);
        beta = q.unscale(q.norm());
        if off == (1, 0) {
            beta = beta.conj();
        }
    }
    let mut chi = chi;
    if a[diag].norm() <= 1e-6 && a[off].norm() > 1e-6 {
        // Anti-diagonal: choose χ to match (0,1), β then fixed by (1,0).
        let q01 = ratio(a[(0, 1)], b[(0, 1)]);
        let q10 = ratio(a[(1, 0)], b[(1, 0)]);
        let prod = q01 * q10;
        chi = prod.sqrt().unscale(prod.norm().sqrt().max(1e-300));
        let q = q01 / chi;
        beta = q.unscale(q.norm().max(1e-300));
    }
    let d = mat2(beta, ZERO, ZERO, ONE);
    let cand = d * b * d.adjoint() * chi;
    (cand - a).norm() <= tol * 4.0
}

/// Draw a uniformly random normal form (Haar `W`, `φ ∈ (0.05, 2π − 0.05)`).
pub fn random_normal_form<R: Rng + ?Sized>(rng: &mut R) -> NormalFormWire {
    let w = haar_su2(rng);
    let phi = crate::random::random_phi(rng);
    NormalFormWire::new(w, phi).expect("Haar SU(2)")
}

#[cfg(test)]
fn is_su2(m: &Mat2, tol: f64) -> bool {
    crate::mat::is_unitary(m, tol) && (m.determinant() - ONE).norm() <= tol
}
