//! Entangling two wires: the Ising-type gadget with an ancilla and the
//! exchange-interaction coupling of cluster wires.
//!
//! Two-wire operators are 4×4 matrices whose first tensor factor acts on the
//! lower wire (sites 5–7) and the second on the upper wire (sites 1–3).

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::classify::NormalFormWire;
use crate::error::{Error, Result};
use crate::linalg::{operator_schmidt, schmidt_rank};
use crate::mat::{
    c, cis, ket, kron, pauli_z, projector, ray_distance_slices, wrap_angle, Mat2, Mat4, Vec2, ZERO,
};
use crate::optimize::{levenberg_marquardt, LmOptions};
use crate::oracle::{
    apply_gate, measure_site, open_segment, Branch, Gate, MeasurementRecord, StateVector,
};
use crate::trajectory::Basis;
use core::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

/// Second operator-Schmidt coefficient above which an operator counts as
/// entangling.
pub const ENTANGLING_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingAngles {
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl CouplingAngles {
    /// Residuals of `e^{iε/2} sinγ = (1 − e^{iφ})/2` and
    /// `|cosδ| = |sinδ sinγ + cosδ cosγ e^{iφ/2}|`.
    pub fn residuals(&self, phi: f64) -> (f64, f64) {
        let (g, e, d) = (self.gamma, self.epsilon, self.delta);
        let r1 = (cis(e / 2.0) * g.sin() - (c(1.0, 0.0) - cis(phi)) * 0.5).norm();
        let rhs = c(d.sin() * g.sin(), 0.0) + cis(phi / 2.0) * (d.cos() * g.cos());
        (r1, (d.cos().abs() - rhs.norm()).abs())
    }

    pub fn max_residual(&self, phi: f64) -> f64 {
        let (a, b) = self.residuals(phi);
        a.max(b)
    }
}

fn check_phi(phi: f64) -> Result<f64> {
    let p = wrap_angle(phi, TAU);
    if p < 1e-9 || TAU - p < 1e-9 {
        Err(Error::Degenerate { phi })
    } else {
        Ok(p)
    }
}

/// `γ = φ/2`, `ε = φ − π` and `tan 2δ = sinγ / cos²γ`.
pub fn solve_coupling_angles(phi: f64) -> Result<CouplingAngles> {
    let phi = check_phi(phi)?;
    let gamma = phi / 2.0;
    let delta = gamma.sin().atan2(gamma.cos().powi(2)) / 2.0;
    let angles = CouplingAngles {
        gamma,
        epsilon: phi - PI,
        delta,
    };
    let r = angles.max_residual(phi);
    if r > 1e-10 {
        return Err(Error::ConstraintViolated { residual: r });
    }
    Ok(angles)
}

/// `{|ψ₀⟩, |ψ₁⟩}` with `|ψ₀⟩ = e^{−iε} sinδ|0⟩ + cosδ|1⟩`.
pub fn measurement_basis_site2(angles: &CouplingAngles) -> Basis {
    let (s, co) = (angles.delta.sin(), angles.delta.cos());
    let ph = cis(-angles.epsilon);
    Basis::custom(
        Vec2::new(ph * s, c(co, 0.0)),
        Vec2::new(-ph * co, c(s, 0.0)),
    )
}

/// Unitary coupling matrix `[[1, 1], [e^{iφ/2}, −e^{iφ/2}]]/√2` conjugating
/// the second controlled-phase gate.
pub fn coupling_matrix(phi: f64) -> Mat2 {
    let e = cis(phi / 2.0);
    Mat2::new(c(1.0, 0.0), c(1.0, 0.0), e, -e).scale(FRAC_1_SQRT_2)
}

/// The variant with `−e^{−iφ/2}` in the corner; singular at `φ = π`.
pub fn coupling_matrix_as_printed(phi: f64) -> Mat2 {
    let e = cis(phi / 2.0);
    Mat2::new(c(1.0, 0.0), c(1.0, 0.0), e, -e.inv()).scale(FRAC_1_SQRT_2)
}

/// `(‖m†m − c𝟙‖/c, c)` with `c = tr(m†m)/4`.
pub fn proportional_unitary_defect4(m: &Mat4) -> (f64, f64) {
    let g = m.adjoint() * m;
    let s = g.trace().re / 4.0;
    if s <= f64::MIN_POSITIVE {
        return (f64::INFINITY, 0.0);
    }
    ((g - Mat4::identity().scale(s)).norm() / s, s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglingGate {
    pub v: Mat4,
    /// `V†V = scale·𝟙`.
    pub scale: f64,
    pub unitarity_defect: f64,
    pub schmidt: [f64; 4],
    pub schmidt_rank: usize,
}

impl EntanglingGate {
    fn from_operator(v: Mat4) -> Self {
        let (unitarity_defect, scale) = proportional_unitary_defect4(&v);
        let schmidt = operator_schmidt(&v);
        Self {
            v,
            scale,
            unitarity_defect,
            schmidt,
            schmidt_rank: schmidt_rank(&schmidt, ENTANGLING_THRESHOLD),
        }
    }

    pub fn is_entangling(&self) -> bool {
        self.schmidt[1] > ENTANGLING_THRESHOLD
    }
}

/// `V = W|0⟩⟨0| ⊗ cosδ B[1] + W|1⟩⟨1| ⊗ (sinδ sinγ B[0] + cosδ cosγ B[1])`.
pub fn entangling_gate(nf: &NormalFormWire, angles: &CouplingAngles) -> Result<EntanglingGate> {
    let r = angles.max_residual(nf.phi);
    if r > 1e-9 {
        return Err(Error::ConstraintViolated { residual: r });
    }
    let (g, d) = (angles.gamma, angles.delta);
    let upper1 = nf.b(1).scale(d.cos());
    let upper2 = nf.b(0).scale(d.sin() * g.sin()) + nf.b(1).scale(d.cos() * g.cos());
    let v = kron(&(nf.w * projector(0)), &upper1) + kron(&(nf.w * projector(1)), &upper2);
    Ok(EntanglingGate::from_operator(v))
}

// Qubit layout of the gadget simulation: each wire segment carries its open
// input and output correlation indices next to its three physical sites.
const SITE: [usize; 8] = [usize::MAX, 1, 2, 3, 5, 7, 8, 9];
const QUBITS: usize = 11;
// After contracting sites 1, 3, 5, 7 the remaining order is
// [top_in, 2, top_out, 4, bottom_in, 6, bottom_out].
const REDUCED: [usize; 8] = [
    usize::MAX,
    usize::MAX,
    1,
    usize::MAX,
    3,
    usize::MAX,
    5,
    usize::MAX,
];

/// Seven-site coupling configuration: upper wire on sites 1–3, ancilla
/// `|+⟩` on site 4, lower wire on sites 5–7.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingGadget {
    pub wire_top: NormalFormWire,
    pub wire_bottom: NormalFormWire,
    pub angles: CouplingAngles,
    pub coupling: Mat2,
    pub site2_basis: Basis,
}

/// One `(x₄, z₆, m₂)` branch of the gadget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GadgetBranch {
    pub x4: u8,
    pub z6: u8,
    pub m2: u8,
    /// Probability given outcome 0 on sites 1, 3, 5, 7.
    pub prob: f64,
    pub gate: EntanglingGate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GadgetRun {
    /// Measurements of sites 6, 4 and 2, in that order.
    pub records: Vec<MeasurementRecord>,
    pub operator: Mat4,
    pub even: bool,
    /// Ray distance to the formula-built `V` on the even/`|ψ₀⟩` branch.
    pub distance_to_v: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoupleOutcome {
    pub outcome: u8,
    pub prob: f64,
    /// Byproducts on the upper (site 2) and lower (site 6) wire.
    pub byproducts: (Mat2, Mat2),
    /// Fidelity of the byproduct-corrected state with the uncoupled one.
    pub fidelity: f64,
}

fn cz() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
    ))
}

fn plus() -> Vec2 {
    Vec2::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0))
}

/// Read `[j₁, i₁, j₂, i₂]` amplitudes as `Σ |i₂ i₁⟩⟨j₂ j₁|`.
fn two_wire_operator(s: &StateVector) -> Mat4 {
    debug_assert_eq!(s.n, 4);
    Mat4::from_fn(|r, col| {
        let (i2, i1) = (r / 2, r % 2);
        let (j2, j1) = (col / 2, col % 2);
        s.amps[j1 | (i1 << 1) | (j2 << 2) | (i2 << 3)]
    })
}

fn strip(op: &Mat4, left: &Mat4, right: &Mat4) -> Result<Mat4> {
    let (li, ri) = match (left.try_inverse(), right.try_inverse()) {
        (Some(l), Some(r)) => (l, r),
        _ => return Err(Error::InvalidArgument("singular boundary tensor".into())),
    };
    Ok(li * op * ri)
}

impl CouplingGadget {
    pub fn new(nf: &NormalFormWire) -> Result<Self> {
        let angles = solve_coupling_angles(nf.phi)?;
        Ok(Self {
            wire_top: *nf,
            wire_bottom: *nf,
            angles,
            coupling: coupling_matrix(nf.phi),
            site2_basis: measurement_basis_site2(&angles),
        })
    }

    /// Formula-built gate for the upper wire's parameters.
    pub fn formula_gate(&self) -> Result<EntanglingGate> {
        entangling_gate(&self.wire_top, &self.angles)
    }

    /// All 11 qubits after both coupling gates.
    pub fn coupled_state(&self) -> Result<StateVector> {
        let s = self.uncoupled_state()?;
        let s = apply_gate(&s, &Gate::Two(cz(), SITE[2], SITE[4]))?;
        let s = apply_gate(&s, &Gate::One(self.coupling.adjoint(), SITE[6]))?;
        let s = apply_gate(&s, &Gate::Two(cz(), SITE[4], SITE[6]))?;
        apply_gate(&s, &Gate::One(self.coupling, SITE[6]))
    }

    pub fn uncoupled_state(&self) -> Result<StateVector> {
        let top = open_segment(&self.wire_top.tensor(), 3, QUBITS)?.normalized();
        let bottom = open_segment(&self.wire_bottom.tensor(), 3, QUBITS)?.normalized();
        Ok(top.tensor(&StateVector::product(&[plus()])).tensor(&bottom))
    }

    /// Coupled state with sites 1, 3, 5, 7 projected on `|0⟩` (normalised).
    fn reduced_state(&self) -> Result<StateVector> {
        let mut s = self.coupled_state()?;
        for site in [7, 5, 3, 1] {
            s = s.contract(SITE[site], &ket(0));
        }
        Ok(s.normalized())
    }

    fn boundary(&self) -> Mat4 {
        kron(&self.wire_bottom.b(0), &self.wire_top.b(0))
    }

    /// Correlation-space operator once sites 6, 4, 2 have been contracted
    /// (in the reduced state) with the given outcome vectors.
    fn extract(
        &self,
        reduced: &StateVector,
        v6: &Vec2,
        v4: &Vec2,
        v2: &Vec2,
    ) -> Result<(Mat4, f64)> {
        let s = reduced
            .contract(REDUCED[6], v6)
            .contract(REDUCED[4], v4)
            .contract(REDUCED[2], v2);
        let prob = s.norm().powi(2) / reduced.norm().powi(2);
        let b = self.boundary();
        Ok((strip(&two_wire_operator(&s), &b, &b)?, prob))
    }

    /// Branch operator read off the exact simulation.
    pub fn oracle_branch(&self, x4: u8, z6: u8, m2: u8, site2: &Basis) -> Result<GadgetBranch> {
        let reduced = self.reduced_state()?;
        let (op, prob) = self.extract(
            &reduced,
            &ket(z6 as usize),
            &Basis::x().vectors[x4 as usize],
            &site2.vectors[m2 as usize],
        )?;
        Ok(GadgetBranch {
            x4,
            z6,
            m2,
            prob,
            gate: EntanglingGate::from_operator(op),
        })
    }

    /// Closed form of the branch operator for site-2 outcome vector `psi`:
    /// `Σ_a ½(−1)^{x₄a} l_a ⊗ u_a`, with `u_a = Σ_k ψ̄_k (−1)^{ak} B[k]` and
    /// `l_a = Σ_k (C Z^a C†)_{z₆k} B[k]`.
    pub fn branch_formula(&self, x4: u8, z6: u8, psi: &Vec2) -> Mat4 {
        let mut out = Mat4::zeros();
        for a in 0..2 {
            let sign = |k: usize| if a * k % 2 == 1 { -1.0 } else { 1.0 };
            let u = self.wire_top.b(0) * (psi[0].conj() * sign(0))
                + self.wire_top.b(1) * (psi[1].conj() * sign(1));
            let za = if a == 0 { Mat2::identity() } else { pauli_z() };
            let m = self.coupling * za * self.coupling.adjoint();
            let z = z6 as usize;
            let l = self.wire_bottom.b(0) * m[(z, 0)] + self.wire_bottom.b(1) * m[(z, 1)];
            let w = if (x4 as usize * a) % 2 == 1 {
                -0.5
            } else {
                0.5
            };
            out += kron(&l, &u).scale(w);
        }
        out
    }

    /// Site-2 basis whose first vector makes the `(x₄, z₆)` branch
    /// proportional to a unitary; returns the basis and the remaining
    /// defect.
    pub fn resolved_site2_basis(&self, x4: u8, z6: u8) -> Result<(Basis, f64)> {
        let psi_of = |q: &[f64]| Vec2::new(cis(q[1]) * q[0].sin(), c(q[0].cos(), 0.0));
        let residual = |q: &[f64], r: &mut [f64]| {
            let o = self.branch_formula(x4, z6, &psi_of(q));
            let g = o.adjoint() * o;
            let s = g.trace().re / 4.0;
            for (k, z) in (g - Mat4::identity().scale(s)).iter().enumerate() {
                r[2 * k] = z.re / s;
                r[2 * k + 1] = z.im / s;
            }
        };
        let opts = LmOptions {
            max_iter: 400,
            tol: 1e-14,
            ..LmOptions::default()
        };
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..8 {
            for j in 0..8 {
                let q0 = [PI * (i as f64 + 0.5) / 8.0, TAU * j as f64 / 8.0];
                let res = levenberg_marquardt(residual, 32, &q0, &opts);
                if best.as_ref().map_or(true, |(r, _)| res.residual_norm < *r) {
                    best = Some((res.residual_norm, res.x));
                }
            }
        }
        let (_, q) = best.expect("non-empty start grid");
        let p0 = psi_of(&q);
        let p1 = Vec2::new(-p0[1].conj(), p0[0].conj());
        let basis = Basis::custom(p0, p1);
        let defect = proportional_unitary_defect4(&self.branch_formula(x4, z6, &p0)).0;
        if defect > 1e-8 {
            return Err(Error::NotReached {
                residual: defect,
                len: 1,
            });
        }
        Ok((basis, defect))
    }

    /// Site-2 basis used after outcomes `(x₄, z₆)`: the printed pair on even
    /// parity, the re-solved pair on odd parity.
    pub fn site2_basis_for(&self, x4: u8, z6: u8) -> Result<Basis> {
        if (x4 + z6) % 2 == 0 {
            Ok(self.site2_basis)
        } else {
            Ok(self.resolved_site2_basis(x4, z6)?.0)
        }
    }

    /// All eight branches with the adaptive site-2 basis.
    pub fn branch_table(&self) -> Result<Vec<GadgetBranch>> {
        let mut out = Vec::with_capacity(8);
        for z6 in 0..2u8 {
            for x4 in 0..2u8 {
                let basis = self.site2_basis_for(x4, z6)?;
                for m2 in 0..2u8 {
                    out.push(self.oracle_branch(x4, z6, m2, &basis)?);
                }
            }
        }
        Ok(out)
    }

    /// Sample sites 6 (Z), 4 (X) and 2 (adaptive basis) in that order.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GadgetRun> {
        let reduced = self.reduced_state()?;
        let (r6, s) = measure_site(
            &reduced,
            REDUCED[6],
            &Basis::computational(),
            Branch::Sample(&mut *rng),
        )?;
        let (r4, s) = measure_site(&s, REDUCED[4], &Basis::x(), Branch::Sample(&mut *rng))?;
        let basis2 = self.site2_basis_for(r4.outcome, r6.outcome)?;
        let (r2, _) = measure_site(&s, REDUCED[2], &basis2, Branch::Sample(&mut *rng))?;
        let (operator, _) = self.extract(
            &reduced,
            &Basis::computational().vectors[r6.outcome as usize],
            &Basis::x().vectors[r4.outcome as usize],
            &basis2.vectors[r2.outcome as usize],
        )?;
        let even = (r4.outcome + r6.outcome) % 2 == 0;
        let distance_to_v = if even && r2.outcome == 0 {
            Some(ray_distance_slices(
                operator.as_slice(),
                self.formula_gate()?.v.as_slice(),
            ))
        } else {
            None
        };
        let relabel = |mut r: MeasurementRecord, site: usize| {
            r.site = site;
            r
        };
        Ok(GadgetRun {
            records: alloc::vec![relabel(r6, 6), relabel(r4, 4), relabel(r2, 2)],
            operator,
            even,
            distance_to_v,
        })
    }

    /// Ray distance between the even/`|ψ₀⟩` oracle branch and `V`.
    pub fn even_branch_distance(&self, x4: u8, z6: u8) -> Result<f64> {
        if (x4 + z6) % 2 != 0 {
            return Err(Error::InvalidArgument("branch parity is odd".into()));
        }
        let branch = self.oracle_branch(x4, z6, 0, &self.site2_basis)?;
        Ok(ray_distance_slices(
            branch.gate.v.as_slice(),
            self.formula_gate()?.v.as_slice(),
        ))
    }

    /// `O·V⁻¹` for the `|ψ₀⟩` outcome of an even branch, and its second
    /// operator-Schmidt coefficient: zero iff the branch equals `V` up to a
    /// local byproduct applied afterwards.
    pub fn byproduct_relative_to_v(&self, x4: u8, z6: u8) -> Result<(Mat4, f64)> {
        let branch = self.oracle_branch(x4, z6, 0, &self.site2_basis)?;
        let v = self.formula_gate()?.v;
        let vi = v
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular gate".into()))?;
        let rel = branch.gate.v * vi;
        Ok((rel, operator_schmidt(&rel)[1]))
    }

    /// Smallest ray distance to `V` over every site-2 outcome vector on the
    /// `(x₄, z₆)` branch, with the minimising vector.
    pub fn best_distance_to_v(&self, x4: u8, z6: u8) -> Result<(f64, Vec2)> {
        let v = self.formula_gate()?.v;
        let psi_of = |q: &[f64]| Vec2::new(cis(q[1]) * q[0].sin(), c(q[0].cos(), 0.0));
        let dist = |q: &[f64]| {
            let o = self.branch_formula(x4, z6, &psi_of(q));
            ray_distance_slices(o.as_slice(), v.as_slice())
        };
        let opts = LmOptions {
            max_iter: 300,
            tol: 1e-15,
            ..LmOptions::default()
        };
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..16 {
            for j in 0..16 {
                let q0 = [PI * (i as f64 + 0.5) / 16.0, TAU * j as f64 / 16.0];
                let res = levenberg_marquardt(|q, r| r[0] = dist(q), 1, &q0, &opts);
                let d = dist(&res.x);
                if d < best.0 {
                    best = (d, [res.x[0], res.x[1]]);
                }
            }
        }
        Ok((best.0, psi_of(&best.1)))
    }

    /// Measure the ancilla in the computational basis instead.
    pub fn decouple<R: Rng + ?Sized>(&self, branch: Branch<'_, R>) -> Result<DecoupleOutcome> {
        let coupled = self.coupled_state()?;
        let (rec, _) = measure_site(&coupled, SITE[4], &Basis::computational(), branch)?;
        let byproducts = if rec.outcome == 0 {
            (Mat2::identity(), Mat2::identity())
        } else {
            (
                pauli_z(),
                self.coupling * pauli_z() * self.coupling.adjoint(),
            )
        };
        // Undo the byproducts and compare with the never-coupled wires.
        let mut post = coupled.contract(SITE[4], &ket(rec.outcome as usize));
        let (top2, bottom6) = (SITE[2], SITE[6] - 1);
        post.apply1(top2, &byproducts.0.adjoint());
        post.apply1(bottom6, &byproducts.1.adjoint());
        let plain = self.uncoupled_state()?.contract(SITE[4], &plus());
        let fidelity = post.fidelity(&plain);
        Ok(DecoupleOutcome {
            outcome: rec.outcome,
            prob: rec.prob,
            byproducts,
            fidelity,
        })
    }
}

/// `exp(iπ/2 |Ψ⁻⟩⟨Ψ⁻|) = 𝟙 + (i − 1)|Ψ⁻⟩⟨Ψ⁻|`.
pub fn exchange_coupling_unitary() -> Mat4 {
    let h = FRAC_1_SQRT_2;
    let psi = nalgebra::Vector4::new(ZERO, c(h, 0.0), c(-h, 0.0), ZERO);
    Mat4::identity() + (psi * psi.adjoint()) * c(-1.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeBranch {
    /// Computational-basis outcomes of sites 1, 2, 3 on the first wire and
    /// 1, 2, 3 on the second, packed least significant first.
    pub outcomes: u8,
    pub prob: f64,
    pub gate: EntanglingGate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeVerdict {
    pub branches: Vec<ExchangeBranch>,
    pub max_second_schmidt: f64,
    pub entangling: bool,
}

/// Two three-site cluster wires coupled by one exchange gate between their
/// middle sites; every computational-basis branch is enumerated exactly.
/// With `coupled = false` the gate is omitted.
pub fn exchange_couple_cluster(nf: &NormalFormWire, coupled: bool) -> Result<ExchangeVerdict> {
    if (nf.phi - PI).abs() > 1e-9 {
        return Err(Error::NotClusterWire);
    }
    let wire = open_segment(&nf.tensor(), 3, 10)?.normalized();
    let mut s = wire.tensor(&wire);
    // Wire one: qubits 0..=4, wire two: qubits 5..=9.
    if coupled {
        s = apply_gate(&s, &Gate::Two(exchange_coupling_unitary(), 7, 2))?;
    }
    let norm2 = s.norm().powi(2);
    let mut branches = Vec::with_capacity(64);
    let mut max_second = 0.0f64;
    for code in 0u8..64 {
        let bit = |k: u8| ((code >> k) & 1) as usize;
        let mut r = s.clone();
        // Descending qubit order keeps the remaining indices valid.
        for (q, k) in [(8, 5), (7, 4), (6, 3), (3, 2), (2, 1), (1, 0)] {
            r = r.contract(q, &ket(bit(k)));
        }
        let prob = r.norm().powi(2) / norm2;
        let left = kron(&nf.b(bit(5)), &nf.b(bit(2)));
        let right = kron(&nf.b(bit(3)), &nf.b(bit(0)));
        let gate = EntanglingGate::from_operator(strip(&two_wire_operator(&r), &left, &right)?);
        max_second = max_second.max(gate.schmidt[1]);
        branches.push(ExchangeBranch {
            outcomes: code,
            prob,
            gate,
        });
    }
    Ok(ExchangeVerdict {
        branches,
        max_second_schmidt: max_second,
        entangling: max_second > ENTANGLING_THRESHOLD,
    })
}

/// Operator-Schmidt coefficients of [`exchange_coupling_unitary`].
pub fn exchange_schmidt() -> [f64; 4] {
    operator_schmidt(&exchange_coupling_unitary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues4;
    use crate::mat::{hadamard, s_gate};
    use crate::random::seeded;

    #[test]
    fn cluster_angles() {
        let a = solve_coupling_angles(PI).unwrap();
        assert!((a.gamma - PI / 2.0).abs() < 1e-15);
        assert!(a.epsilon.abs() < 1e-15);
        assert!((a.delta - PI / 4.0).abs() < 1e-15);
        assert!(matches!(
            solve_coupling_angles(0.0),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn angle_grid() {
        for k in 1..=50 {
            let phi = TAU * k as f64 / 51.0;
            let a = solve_coupling_angles(phi).unwrap();
            assert!(a.max_residual(phi) < 1e-10);
            let nf = NormalFormWire::new(crate::classify::hadamard_su2(), phi).unwrap();
            let g = entangling_gate(&nf, &a).unwrap();
            assert!(g.unitarity_defect < 1e-8, "phi = {phi}");
            assert_eq!(g.schmidt_rank, 2);
        }
    }

    #[test]
    fn site2_basis() {
        let a = solve_coupling_angles(PI).unwrap();
        let b = measurement_basis_site2(&a);
        assert!(b.orthonormality_defect() < 1e-15);
        assert!((b.vectors[0] - plus()).norm() < 1e-15);
        let shifted = CouplingAngles { gamma: 0.3, ..a };
        assert_eq!(measurement_basis_site2(&shifted), b);
    }

    #[test]
    fn cluster_gate_is_controlled_phase_type() {
        let nf = NormalFormWire::cluster();
        let a = solve_coupling_angles(PI).unwrap();
        let g = entangling_gate(&nf, &a).unwrap();
        let h = hadamard();
        let want =
            kron(&(nf.w * projector(0)), &(h * s_gate(PI))) + kron(&(nf.w * projector(1)), &h);
        assert!(ray_distance_slices(g.v.as_slice(), want.as_slice()) < 1e-12);
        assert!(g.is_entangling());
        let bad = CouplingAngles { delta: 0.1, ..a };
        assert!(matches!(
            entangling_gate(&nf, &bad),
            Err(Error::ConstraintViolated { .. })
        ));
    }

    #[test]
    fn coupling_matrices() {
        assert!(crate::mat::is_unitary(&coupling_matrix(1.3), 1e-14));
        assert!(coupling_matrix_as_printed(PI).determinant().norm() < 1e-15);
    }

    #[test]
    fn oracle_branch_matches_closed_form() {
        for phi in [PI, PI / 2.0, 2.0] {
            let nf = NormalFormWire::new(crate::classify::hadamard_su2(), phi).unwrap();
            let g = CouplingGadget::new(&nf).unwrap();
            for (x4, z6) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                for m2 in 0..2 {
                    let br = g.oracle_branch(x4, z6, m2, &g.site2_basis).unwrap();
                    let f = g.branch_formula(x4, z6, &g.site2_basis.vectors[m2 as usize]);
                    assert!(ray_distance_slices(br.gate.v.as_slice(), f.as_slice()) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn cluster_even_branch_is_v() {
        let g = CouplingGadget::new(&NormalFormWire::cluster()).unwrap();
        assert!(g.even_branch_distance(0, 0).unwrap() < 1e-8);
        let table = g.branch_table().unwrap();
        let total: f64 = table.iter().map(|b| b.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn second_even_branch_is_v_up_to_byproduct() {
        let g = CouplingGadget::new(&NormalFormWire::cluster()).unwrap();
        let (rel, second) = g.byproduct_relative_to_v(1, 1).unwrap();
        assert!(second < 1e-10);
        let want = kron(&Mat2::identity(), &crate::mat::pauli_x());
        assert!(ray_distance_slices(rel.as_slice(), want.as_slice()) < 1e-10);
        let (d, _) = g.best_distance_to_v(0, 0).unwrap();
        assert!(d < 1e-7);
    }

    #[test]
    fn resolved_odd_branch_is_unitary_and_entangling() {
        let nf = NormalFormWire::t_resource();
        let g = CouplingGadget::new(&nf).unwrap();
        let (basis, defect) = g.resolved_site2_basis(1, 0).unwrap();
        assert!(defect < 1e-8);
        let br = g.oracle_branch(1, 0, 0, &basis).unwrap();
        assert!(br.gate.unitarity_defect < 1e-7);
        assert!(br.gate.is_entangling());
    }

    #[test]
    fn decoupling() {
        let g = CouplingGadget::new(&NormalFormWire::t_resource()).unwrap();
        for k in 0..2u8 {
            let out = g
                .decouple::<crate::random::Rng64>(Branch::Forced(k))
                .unwrap();
            assert!((out.prob - 0.5).abs() < 1e-12);
            assert!(out.fidelity > 1.0 - 1e-9);
            if k == 1 {
                assert_eq!(out.byproducts.0, pauli_z());
            }
        }
        let mut rng = seeded(3);
        let run = g.simulate(&mut rng).unwrap();
        assert_eq!(
            run.records.iter().map(|r| r.site).collect::<Vec<_>>(),
            [6, 4, 2]
        );
    }

    #[test]
    fn exchange_unitary() {
        let u = exchange_coupling_unitary();
        let h = FRAC_1_SQRT_2;
        let singlet = nalgebra::Vector4::new(ZERO, c(h, 0.0), c(-h, 0.0), ZERO);
        assert!((u * singlet - singlet * crate::mat::I).norm() < 1e-15);
        let triplet = nalgebra::Vector4::new(ZERO, c(h, 0.0), c(h, 0.0), ZERO);
        assert!((u * triplet - triplet).norm() < 1e-15);
        let mut ev = eigenvalues4(&u);
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[3] - crate::mat::I).norm() < 1e-12);
        assert!(ev[..3].iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
        assert!(exchange_schmidt()[1] > 1e-6);
    }

    #[test]
    fn exchange_patch() {
        let nf = NormalFormWire::cluster();
        let v = exchange_couple_cluster(&nf, true).unwrap();
        assert!(v.entangling);
        let total: f64 = v.branches.iter().map(|b| b.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let base = exchange_couple_cluster(&nf, false).unwrap();
        assert!(!base.entangling);
        assert!(matches!(
            exchange_couple_cluster(&NormalFormWire::t_resource(), true),
            Err(Error::NotClusterWire)
        ));
    }
}
