//! Logical single-qubit computation on a classified wire.
//!
//! Measuring a site in `{|0_θ⟩, |1_θ⟩}` applies `W·S(2 arg λ₊)` with
//! probability `|λ₊|²/2` on outcome 0, where `λ₊ = sinθ + cosθ e^{iφ/2}`,
//! and `W·S(2 arg μ₊)` with `μ₊ = cosθ − sinθ e^{iφ/2}` on outcome 1.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::classify::NormalFormWire;
use crate::error::{Error, Result};
use crate::mat::{
    c, cis, hadamard, ket, phase_distance, s_gate, to_su2, unitarity_defect, wrap_angle, Mat2,
    Vec2, C64,
};
use crate::mps::local_operator;
use crate::optimize::{levenberg_marquardt, LmOptions};
use crate::oracle::{measure_site, prepare_with_boundaries, Branch, StateVector};
use crate::random::seeded;
use crate::trajectory::{Basis, Trajectory, TrajectoryStep};
use core::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

/// One outcome of a θ-basis measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchOutcome {
    pub outcome: u8,
    /// Induced correlation-space unitary, in SU(2).
    pub unitary: Mat2,
    pub prob: f64,
}

/// `λ₊(θ, φ) = sinθ + cosθ e^{iφ/2}`.
pub fn lambda_plus(phi: f64, theta: f64) -> C64 {
    c(theta.sin(), 0.0) + cis(phi / 2.0) * theta.cos()
}

/// `μ₊(θ, φ) = cosθ − sinθ e^{iφ/2}`, the outcome-1 analogue.
pub fn mu_plus(phi: f64, theta: f64) -> C64 {
    c(theta.cos(), 0.0) - cis(phi / 2.0) * theta.sin()
}

pub fn basis_action(nf: &NormalFormWire, theta: f64) -> (BranchOutcome, BranchOutcome) {
    let branch = |outcome: u8, z: C64| BranchOutcome {
        outcome,
        unitary: nf.w * s_gate(2.0 * z.arg()),
        prob: z.norm_sqr() / 2.0,
    };
    (
        branch(0, lambda_plus(nf.phi, theta)),
        branch(1, mu_plus(nf.phi, theta)),
    )
}

/// One sample of the curve of realizable phase gates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocusPoint {
    pub theta: f64,
    /// `λ₊(θ)`; the sampled curve is `√p e^{iδ}` with `p = |λ₊|²`.
    pub lambda: C64,
    /// `δ = arg λ₊`; outcome 0 applies `W·S(2δ)`.
    pub delta: f64,
    /// Branch probability `|λ₊|²/2`.
    pub prob: f64,
}

pub fn realizable_locus(nf: &NormalFormWire, k: usize) -> Result<Vec<LocusPoint>> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "locus needs at least two samples".into(),
        ));
    }
    Ok((0..k)
        .map(|i| {
            let theta = TAU * i as f64 / k as f64;
            let lambda = lambda_plus(nf.phi, theta);
            LocusPoint {
                theta,
                lambda,
                delta: lambda.arg(),
                prob: lambda.norm_sqr() / 2.0,
            }
        })
        .collect())
}

/// `|s² + c² − 1|` for the preimage `(s, c)` of `λ` under
/// `[[1, cos φ/2], [0, sin φ/2]]`.
pub fn locus_preimage_defect(phi: f64, lambda: C64) -> f64 {
    let cth = lambda.im / (phi / 2.0).sin();
    let sth = lambda.re - cth * (phi / 2.0).cos();
    (sth * sth + cth * cth - 1.0).abs()
}

fn check_nondegenerate(nf: &NormalFormWire) -> Result<()> {
    if nf.is_degenerate(1e-6) {
        Err(Error::Degenerate { phi: nf.phi })
    } else {
        Ok(())
    }
}

/// θ such that outcome 0 applies `W·S(δ)`; returns `(θ, probability)`.
pub fn solve_phase_basis(nf: &NormalFormWire, delta: f64) -> Result<(f64, f64)> {
    check_nondegenerate(nf)?;
    // arg λ₊ = δ/2 (mod π)  ⇔  tanθ = sin((φ−δ)/2) / sin(δ/2).
    let theta = ((nf.phi - delta) / 2.0).sin().atan2((delta / 2.0).sin());
    Ok((theta, lambda_plus(nf.phi, theta).norm_sqr() / 2.0))
}

/// `W·S(δ_n)⋯W·S(δ₁)`.
pub fn plan_product(nf: &NormalFormWire, deltas: &[f64]) -> Mat2 {
    deltas
        .iter()
        .fold(Mat2::identity(), |acc, &d| nf.w * s_gate(d) * acc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanStep {
    /// Intended gate `W·S(δ)`.
    pub delta: f64,
    /// Basis whose outcome 0 realizes it.
    pub theta: f64,
    /// Probability of outcome 0.
    pub prob: f64,
    /// Angle `δ''` of the gate `W·S(δ'')` applied on outcome 1, which
    /// triggers a compensation walk followed by a retry.
    pub failure_delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanMethod {
    SingleStep,
    Euler,
    Numerical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompilationPlan {
    pub steps: Vec<PlanStep>,
    pub target: Mat2,
    /// `min_χ ‖W S(δ_n)⋯W S(δ₁) − e^{iχ} target‖_F`.
    pub residual: f64,
    pub method: PlanMethod,
}

impl CompilationPlan {
    pub fn deltas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.delta).collect()
    }
}

fn make_plan(
    nf: &NormalFormWire,
    deltas: &[f64],
    target: &Mat2,
    method: PlanMethod,
) -> Result<CompilationPlan> {
    let mut steps = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let (theta, prob) = solve_phase_basis(nf, d)?;
        let (_, fail) = basis_action(nf, theta);
        let failure_delta = 2.0 * mu_plus(nf.phi, theta).arg();
        debug_assert!(phase_distance(&fail.unitary, &(nf.w * s_gate(failure_delta))) < 1e-9);
        steps.push(PlanStep {
            delta: wrap_angle(d, 2.0 * TAU),
            theta,
            prob,
            failure_delta,
        });
    }
    let residual = phase_distance(&plan_product(nf, deltas), target);
    Ok(CompilationPlan {
        steps,
        target: *target,
        residual,
        method,
    })
}

/// `W` commutes or anticommutes with the phase gates: products of
/// `W·S(δ)` then stay diagonal or anti-diagonal.
pub fn is_exceptional(nf: &NormalFormWire, tol: f64) -> bool {
    let w = &nf.w;
    let diag = w[(0, 1)].norm() <= tol && w[(1, 0)].norm() <= tol;
    let anti = w[(0, 0)].norm() <= tol && w[(1, 1)].norm() <= tol;
    diag || anti
}

const STARTS_PER_LENGTH: usize = 8;

/// Find `δ₁…δ_n` with `W S(δ_n)⋯W S(δ₁) = e^{iχ}·target`.
pub fn compile_su2(
    nf: &NormalFormWire,
    target: &Mat2,
    tol: f64,
    max_len: usize,
) -> Result<CompilationPlan> {
    check_nondegenerate(nf)?;
    let defect = unitarity_defect(target);
    if defect > 1e-8 {
        return Err(Error::NotUnitary { defect });
    }
    let t = to_su2(target);

    // Length one: W†T diagonal.
    let m = nf.w.adjoint() * t;
    if m[(0, 1)].norm() < tol && m[(1, 0)].norm() < tol {
        let d = m[(1, 1)].arg() - m[(0, 0)].arg();
        let plan = make_plan(nf, &[d], target, PlanMethod::SingleStep)?;
        if plan.residual <= tol {
            return Ok(plan);
        }
    }

    // Hadamard wires: Euler angles of H·T = R_z(c) R_x(b) R_z(a).
    let h = hadamard();
    if max_len >= 3 && (nf.w.adjoint() * h).trace().norm() > 2.0 - 1e-12 {
        let m = to_su2(&(h * t));
        let b = 2.0 * m[(0, 1)].norm().atan2(m[(0, 0)].norm());
        let sum = -2.0 * m[(0, 0)].arg();
        let diff = 2.0 * (m[(0, 1)].arg() + PI / 2.0);
        let (a, cc) = if m[(0, 0)].norm() < 1e-12 {
            (diff, 0.0)
        } else if m[(0, 1)].norm() < 1e-12 {
            (sum, 0.0)
        } else {
            ((sum + diff) / 2.0, (sum - diff) / 2.0)
        };
        let plan = make_plan(nf, &[a, b, cc], target, PlanMethod::Euler)?;
        if plan.residual <= tol {
            return Ok(plan);
        }
    }

    let mut best = f64::INFINITY;
    let mut best_len = 0;
    let opts = LmOptions {
        max_iter: 300,
        tol: 1e-15,
        ..LmOptions::default()
    };
    for n in 2..=max_len {
        let mut rng = seeded(0x5eed_0000 ^ n as u64);
        for _ in 0..STARTS_PER_LENGTH {
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * TAU)).collect();
            let res = levenberg_marquardt(
                |x, r| {
                    let q = t.adjoint() * plan_product(nf, x);
                    for (k, s) in crate::mat::paulis().iter().enumerate() {
                        r[k] = (q * s).trace().im / 2.0;
                    }
                },
                3,
                &x0,
                &opts,
            );
            let plan = make_plan(nf, &res.x, target, PlanMethod::Numerical)?;
            if plan.residual <= tol {
                return Ok(plan);
            }
            if plan.residual < best {
                best = plan.residual;
                best_len = n;
            }
        }
        if is_exceptional(nf, 1e-12) {
            // Products stay (anti-)diagonal; longer sequences cannot help.
            break;
        }
    }
    Err(Error::NotReached {
        residual: best,
        len: best_len,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupOrder {
    Finite(usize),
    Infinite,
}

/// Closure of `{W, W·S(φ)}` modulo global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct ByproductGroup {
    pub elements: Vec<Mat2>,
    pub generators: [Mat2; 2],
    pub order: GroupOrder,
}

impl ByproductGroup {
    pub fn is_finite(&self) -> bool {
        matches!(self.order, GroupOrder::Finite(_))
    }
}

/// Phase-insensitive set of SU(2) elements, bucketed by `|g₀₀|`.
struct PhaseSet {
    items: Vec<Mat2>,
    buckets: BTreeMap<i64, Vec<usize>>,
    tol: f64,
}

impl PhaseSet {
    const WIDTH: f64 = 1e-6;

    fn new(tol: f64) -> Self {
        Self {
            items: Vec::new(),
            buckets: BTreeMap::new(),
            tol,
        }
    }

    fn key(g: &Mat2) -> i64 {
        (g[(0, 0)].norm() / Self::WIDTH).floor() as i64
    }

    fn contains(&self, g: &Mat2) -> bool {
        let k = Self::key(g);
        (k - 1..=k + 1).any(|kk| {
            self.buckets.get(&kk).is_some_and(|idx| {
                idx.iter()
                    .any(|&i| (self.items[i].adjoint() * g).trace().norm() >= 2.0 - self.tol)
            })
        })
    }

    /// Insert unless present; reports whether it was new.
    fn insert(&mut self, g: Mat2) -> bool {
        if self.contains(&g) {
            return false;
        }
        self.buckets
            .entry(Self::key(&g))
            .or_default()
            .push(self.items.len());
        self.items.push(g);
        true
    }
}

pub fn byproduct_group(nf: &NormalFormWire, tol: f64, max_order: usize) -> ByproductGroup {
    let gens = [to_su2(&nf.w), to_su2(&(nf.w * s_gate(nf.phi)))];
    let mut set = PhaseSet::new(tol);
    let mut frontier = Vec::new();
    for g in gens {
        if set.insert(g) {
            frontier.push(g);
        }
    }
    while let Some(g) = frontier.pop() {
        for h in &gens {
            let p = h * g;
            if set.insert(p) {
                if set.items.len() > max_order {
                    return ByproductGroup {
                        elements: set.items,
                        generators: gens,
                        order: GroupOrder::Infinite,
                    };
                }
                frontier.push(p);
            }
        }
    }
    let n = set.items.len();
    ByproductGroup {
        elements: set.items,
        generators: gens,
        order: GroupOrder::Finite(n),
    }
}

/// Bound used when deciding finiteness inside [`compensate`].
pub const GROUP_BOUND: usize = 10_000;

/// `δ'` if `m` is a phase gate `S(δ')` up to global phase.
pub fn phase_gate_angle(m: &Mat2, tol: f64) -> Option<f64> {
    let scale = m.norm();
    if m[(0, 1)].norm() <= tol * scale && m[(1, 0)].norm() <= tol * scale {
        Some(m[(1, 1)].arg() - m[(0, 0)].arg())
    } else {
        None
    }
}

/// Random walk with computational-basis measurements until the accumulated
/// operator times `wrong` is a phase gate `S(δ')`; returns the walk and the
/// corrective angle `δ − δ'` for the next single-step attempt.
pub fn compensate<R: Rng + ?Sized>(
    nf: &NormalFormWire,
    intended_delta: f64,
    wrong: &Mat2,
    rng: &mut R,
    max_steps: usize,
) -> Result<(Trajectory, f64)> {
    let group = byproduct_group(nf, 1e-9, GROUP_BOUND);
    if !group.is_finite() {
        return Err(Error::InfiniteGroup { bound: GROUP_BOUND });
    }
    let ops = [nf.w, nf.w * s_gate(nf.phi)];
    let mut traj = Trajectory::default();
    let mut acc = Mat2::identity();
    loop {
        if let Some(dp) = phase_gate_angle(&(acc * wrong), 1e-9) {
            return Ok((traj, intended_delta - dp));
        }
        if traj.len() >= max_steps {
            return Err(Error::NotReached {
                residual: f64::NAN,
                len: traj.len(),
            });
        }
        let x = u8::from(rng.gen::<bool>());
        let op = ops[x as usize];
        acc = op * acc;
        traj.steps.push(TrajectoryStep {
            site: traj.len(),
            basis: Basis::computational(),
            outcome: x,
            prob: 0.5,
            operator: op,
        });
    }
}

/// Local vector whose operator is rank one, and the heralded correlation
/// state `W|1⟩`.
pub fn prepare(nf: &NormalFormWire) -> Result<(Vec2, Vec2)> {
    check_nondegenerate(nf)?;
    let v = Vec2::new(c(FRAC_1_SQRT_2, 0.0), -cis(-nf.phi / 2.0) * FRAC_1_SQRT_2);
    Ok((v, nf.w * ket(1)))
}

/// Orthonormal basis containing the preparation vector (as outcome 1).
pub fn readout_basis(nf: &NormalFormWire) -> Result<Basis> {
    let (v1, _) = prepare(nf)?;
    let v0 = Vec2::new(c(FRAC_1_SQRT_2, 0.0), cis(-nf.phi / 2.0) * FRAC_1_SQRT_2);
    Ok(Basis::custom(v0, v1))
}

/// Correlation-space POVM `(E0, E1)` of one readout measurement;
/// `E1 = sin²(φ/2)|1⟩⟨1|`.
pub fn readout_povm(nf: &NormalFormWire) -> Result<(Mat2, Mat2)> {
    let basis = readout_basis(nf)?;
    let t = nf.tensor();
    let e = |k: usize| {
        let kk = local_operator(&t, &basis.vectors[k]);
        kk.adjoint() * kk
    };
    Ok((e(0), e(1)))
}

/// Outcome probabilities of [`readout_povm`] for a correlation state.
pub fn readout_probabilities(nf: &NormalFormWire, state: &Vec2) -> Result<[f64; 2]> {
    let (e0, e1) = readout_povm(nf)?;
    let p = |e: &Mat2| state.dotc(&(e * state)).re / state.norm_squared();
    Ok([p(&e0), p(&e1)])
}

/// Result of running measurements on an exact chain.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun {
    pub trajectory: Trajectory,
    /// Largest `|p_oracle − p_predicted|` over all steps.
    pub max_prob_deviation: f64,
    /// Predicted correlation-space operator, later steps on the left.
    pub total_operator: Mat2,
    /// Fidelity between the unmeasured part of the chain and a fresh chain
    /// whose boundary is the predicted correlation state.
    pub state_fidelity: f64,
}

/// Chain of `n` sites carrying correlation state `initial`; the last site
/// reads the correlation space out.
struct OracleChain {
    nf: NormalFormWire,
    t: crate::mps::WireTensor,
    initial: Vec2,
    n: usize,
    state: StateVector,
    measured: Vec<Vec2>,
    /// Outcomes imposed on the next measurements, in order.
    forced: VecDeque<u8>,
    run: OracleRun,
}

impl OracleChain {
    fn new(nf: &NormalFormWire, initial: &Vec2, n: usize) -> Result<Self> {
        let t = nf.tensor();
        let initial = initial.normalize();
        let state = prepare_with_boundaries(&t, n, &initial, &Mat2::identity(), n)?;
        let run = OracleRun {
            trajectory: Trajectory::default(),
            max_prob_deviation: 0.0,
            total_operator: Mat2::identity(),
            state_fidelity: 1.0,
        };
        Ok(Self {
            nf: *nf,
            t,
            initial,
            n,
            state,
            measured: Vec::new(),
            forced: VecDeque::new(),
            run,
        })
    }

    fn measure<R: Rng + ?Sized>(
        &mut self,
        basis: Basis,
        predicted: (BranchOutcome, BranchOutcome),
        rng: &mut R,
    ) -> Result<u8> {
        let site = self.measured.len();
        if site + 1 >= self.n {
            return Err(Error::ChainExhausted { sites: self.n });
        }
        let branch = match self.forced.pop_front() {
            Some(k) => Branch::Forced(k),
            None => Branch::Sample(rng),
        };
        let (rec, post) = measure_site(&self.state, site, &basis, branch)?;
        let b = if rec.outcome == 0 {
            predicted.0
        } else {
            predicted.1
        };
        self.run.max_prob_deviation = self.run.max_prob_deviation.max((rec.prob - b.prob).abs());
        self.run.total_operator = b.unitary * self.run.total_operator;
        self.run.trajectory.steps.push(TrajectoryStep {
            site,
            basis,
            outcome: rec.outcome,
            prob: rec.prob,
            operator: b.unitary,
        });
        self.measured.push(basis.vectors[rec.outcome as usize]);
        self.state = post;
        Ok(rec.outcome)
    }

    fn computational<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<u8> {
        let predicted = basis_action(&self.nf, PI / 2.0);
        self.measure(Basis::computational(), predicted, rng)
    }

    fn last_operator(&self) -> Mat2 {
        self.run
            .trajectory
            .steps
            .last()
            .map_or_else(Mat2::identity, |s| s.operator)
    }

    fn finish(mut self) -> Result<OracleRun> {
        let mut rest = self.state.clone();
        for (site, v) in self.measured.iter().enumerate().rev() {
            rest = rest.contract(site, v);
        }
        let boundary = self.run.total_operator * self.initial;
        let fresh = prepare_with_boundaries(
            &self.t,
            self.n - self.measured.len(),
            &boundary,
            &Mat2::identity(),
            self.n,
        )?;
        self.run.state_fidelity = rest.fidelity(&fresh);
        Ok(self.run)
    }
}

/// Measure the first sites of an `n`-site chain in the given θ-bases and
/// compare every step with the predicted branch action.
pub fn simulate_bases<R: Rng + ?Sized>(
    nf: &NormalFormWire,
    thetas: &[f64],
    initial: &Vec2,
    n: usize,
    rng: &mut R,
) -> Result<OracleRun> {
    let mut chain = OracleChain::new(nf, initial, n)?;
    for &theta in thetas {
        chain.measure(Basis::theta(theta), basis_action(nf, theta), rng)?;
    }
    chain.finish()
}

/// Execute a plan adaptively on an `n`-site chain: each failed step is
/// followed by a compensation walk and a retry with the corrected angle.
pub fn execute_plan<R: Rng + ?Sized>(
    nf: &NormalFormWire,
    plan: &CompilationPlan,
    initial: &Vec2,
    n: usize,
    rng: &mut R,
) -> Result<OracleRun> {
    execute_plan_forced(nf, plan, initial, n, &[], rng)
}

/// [`execute_plan`] with the first `forced.len()` measurement outcomes
/// imposed rather than sampled.
pub fn execute_plan_forced<R: Rng + ?Sized>(
    nf: &NormalFormWire,
    plan: &CompilationPlan,
    initial: &Vec2,
    n: usize,
    forced: &[u8],
    rng: &mut R,
) -> Result<OracleRun> {
    let group = byproduct_group(nf, 1e-9, GROUP_BOUND);
    let mut chain = OracleChain::new(nf, initial, n)?;
    chain.forced = forced.iter().copied().collect();
    for step in &plan.steps {
        let mut delta = step.delta;
        loop {
            let (theta, _) = solve_phase_basis(nf, delta)?;
            let predicted = basis_action(nf, theta);
            if chain.measure(Basis::theta(theta), predicted, rng)? == 0 {
                break;
            }
            if !group.is_finite() {
                return Err(Error::InfiniteGroup { bound: GROUP_BOUND });
            }
            let wrong = predicted.1.unitary;
            let mut acc = Mat2::identity();
            let dp = loop {
                if let Some(dp) = phase_gate_angle(&(acc * wrong), 1e-9) {
                    break dp;
                }
                chain.computational(rng)?;
                acc = chain.last_operator() * acc;
            };
            // The walk leaves S(δ') relative to before the failed attempt.
            delta -= dp;
        }
    }
    chain.finish()
}
