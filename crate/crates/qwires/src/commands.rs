//! One function per subcommand. Each appends its output to an [`Output`]
//! and reports failures through [`CliError`], so partial reports are still
//! written when a command fails.

use std::f64::consts::PI;
use std::path::Path;

use qwires_core::bose::FockChain;
use qwires_core::classify::{classify, equivalent, random_gauge, random_normal_form};
use qwires_core::compile::{compile_su2, execute_plan_forced, realizable_locus, simulate_bases};
use qwires_core::coupler::{exchange_couple_cluster, CouplingGadget};
use qwires_core::mat::{
    c, hadamard, ket, pauli_x, pauli_y, pauli_z, phase_distance, s_gate, Mat2, Vec2,
};
use qwires_core::mps::transfer_channel;
use qwires_core::oracle::{Branch, MeasurementRecord};
use qwires_core::random::{haar_su2, random_unit_vec2};
use qwires_core::trajectory::{BasisLabel, TrajectoryStep};
use qwires_core::{ClassificationReport, NormalFormWire, Verdict};
use rand::Rng;
use serde::Serialize;

use crate::config::{Format, Output, RunConfig};
use crate::error::{verdict_exit_code, CliError};
use crate::formats::{
    mat2_to_json, mat4_to_json, read_json, JsonComplex, JsonMat2, JsonMat4, NormalFormJson,
    PlanFile, UnitaryFile, WireFile,
};

/// Entropy the Bose-Hubbard wire is compared against, in bits.
pub const BOSE_TARGET_ENTROPY: f64 = 1.725;

#[derive(Serialize)]
struct GaugeJson {
    v: JsonMat2,
    x: JsonMat2,
    m: JsonMat2,
    alpha: f64,
    mix: f64,
}

#[derive(Serialize)]
struct ClassifyJson {
    verdict: &'static str,
    exit_code: u8,
    normal_form: Option<NormalFormJson>,
    gauge: Option<GaugeJson>,
    gap: f64,
    unitality_residual: f64,
    mixing_residual: Option<f64>,
    reconstruction_residual: Option<f64>,
    assumes_unique_peripheral_eigenvalue: bool,
}

impl From<&ClassificationReport> for ClassifyJson {
    fn from(r: &ClassificationReport) -> Self {
        Self {
            verdict: r.verdict.as_str(),
            exit_code: verdict_exit_code(r.verdict),
            normal_form: r.normal_form.as_ref().map(NormalFormJson::from),
            gauge: r.gauge.map(|g| GaugeJson {
                v: mat2_to_json(&g.v),
                x: mat2_to_json(&g.x),
                m: mat2_to_json(&g.m),
                alpha: g.alpha,
                mix: g.mix,
            }),
            gap: r.gap,
            unitality_residual: r.unitality_residual,
            mixing_residual: r.mixing_residual.is_finite().then_some(r.mixing_residual),
            reconstruction_residual: r.reconstruction_residual,
            assumes_unique_peripheral_eigenvalue: r.assumes_unique_peripheral_eigenvalue,
        }
    }
}

fn load_report(cfg: &RunConfig, wire: &Path) -> Result<ClassificationReport, CliError> {
    let file: WireFile = read_json(wire)?;
    let t = file.tensor(cfg.tol.max(1e-9))?;
    Ok(classify(&t, cfg.tol)?)
}

/// Normal form of a wire file, classifying it first unless the file is
/// already in normal form; fails with the verdict's exit code.
fn load_wire(cfg: &RunConfig, wire: &Path) -> Result<NormalFormWire, CliError> {
    let file: WireFile = read_json(wire)?;
    if let Some(nf) = file.normal_form() {
        return nf;
    }
    let report = classify(&file.tensor(cfg.tol.max(1e-9))?, cfg.tol)?;
    report.normal_form.ok_or(CliError::NotAWire(report.verdict))
}

pub fn cmd_classify(cfg: &RunConfig, out: &mut Output, wire: &Path) -> Result<(), CliError> {
    let report = load_report(cfg, wire)?;
    out.document(&ClassifyJson::from(&report))?;
    match report.verdict {
        Verdict::Wire => Ok(()),
        v => Err(CliError::NotAWire(v)),
    }
}

/// A target unitary: a JSON file or one of `I`, `H`, `X`, `Y`, `Z`,
/// `S:<angle>`, `haar`, or `WS:<angle>` for the wire's own step `W·S(angle)`.
pub fn parse_target(cfg: &RunConfig, nf: &NormalFormWire, target: &str) -> Result<Mat2, CliError> {
    let path = Path::new(target);
    if path.exists() {
        let file: UnitaryFile = read_json(path)?;
        return Ok(crate::formats::mat2_from_json(&file.matrix));
    }
    match target {
        "I" => Ok(Mat2::identity()),
        "H" => Ok(hadamard()),
        "X" => Ok(pauli_x()),
        "Y" => Ok(pauli_y()),
        "Z" => Ok(pauli_z()),
        "haar" => Ok(haar_su2(&mut cfg.rng())),
        s => {
            let angle = |prefix| s.strip_prefix(prefix).and_then(|a| a.parse::<f64>().ok());
            if let Some(a) = angle("S:") {
                Ok(s_gate(a))
            } else if let Some(a) = angle("WS:") {
                Ok(nf.w * s_gate(a))
            } else {
                Err(CliError::Input(format!(
                    "target {s:?} is neither a file nor a known gate"
                )))
            }
        }
    }
}

#[derive(Serialize)]
struct NotReachedJson {
    error: &'static str,
    residual: f64,
    length: usize,
}

pub fn cmd_compile(
    cfg: &RunConfig,
    out: &mut Output,
    wire: &Path,
    target: &str,
    max_len: usize,
) -> Result<(), CliError> {
    let nf = load_wire(cfg, wire)?;
    let target = parse_target(cfg, &nf, target)?;
    match compile_su2(&nf, &target, cfg.tol, max_len) {
        Ok(plan) => out.document(&PlanFile::new(&nf, &plan)),
        Err(qwires_core::Error::NotReached { residual, len }) => {
            out.document(&NotReachedJson {
                error: "NotReached",
                residual,
                length: len,
            })?;
            Err(CliError::Failed(format!(
                "no plan up to length {max_len}; best residual {residual:e}"
            )))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct BasisJson {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    vectors: [[JsonComplex; 2]; 2],
}

#[derive(Serialize)]
struct StepRecord {
    r#type: &'static str,
    site: usize,
    basis: BasisJson,
    outcome: u8,
    prob: f64,
    operator: JsonMat2,
}

fn basis_json(b: &qwires_core::trajectory::Basis) -> BasisJson {
    let (kind, theta) = match b.label {
        BasisLabel::Computational => ("computational", None),
        BasisLabel::Theta(t) => ("theta", Some(t)),
        BasisLabel::X => ("x", None),
        BasisLabel::Custom => ("custom", None),
    };
    let v = |k: usize| {
        [
            [b.vectors[k][0].re, b.vectors[k][0].im],
            [b.vectors[k][1].re, b.vectors[k][1].im],
        ]
    };
    BasisJson {
        kind,
        theta,
        vectors: [v(0), v(1)],
    }
}

fn step_record(s: &TrajectoryStep) -> StepRecord {
    StepRecord {
        r#type: "step",
        site: s.site,
        basis: basis_json(&s.basis),
        outcome: s.outcome,
        prob: s.prob,
        operator: mat2_to_json(&s.operator),
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    r#type: &'static str,
    sites: usize,
    measured: usize,
    max_prob_deviation: f64,
    state_fidelity: f64,
    distance_to_target: f64,
    seed: u64,
}

#[derive(Serialize)]
struct ErrorRecord {
    r#type: &'static str,
    message: String,
}

fn parse_initial(s: &str) -> Result<Vec2, CliError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match s {
        "0" => Ok(ket(0)),
        "1" => Ok(ket(1)),
        "+" => Ok(Vec2::new(c(h, 0.0), c(h, 0.0))),
        "-" => Ok(Vec2::new(c(h, 0.0), c(-h, 0.0))),
        other => Err(CliError::Input(format!(
            "initial state {other:?}: expected 0, 1, + or -"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    cfg: &RunConfig,
    out: &mut Output,
    wire: &Path,
    plan: &Path,
    sites: usize,
    initial: &str,
    forced: &[u8],
) -> Result<(), CliError> {
    let nf_wire = load_wire(cfg, wire)?;
    let file: PlanFile = read_json(plan)?;
    let (nf, plan) = file.to_plan()?;
    if !equivalent(&nf, &nf_wire, 1e-7) {
        return Err(CliError::Input(
            "plan was compiled for a different wire".into(),
        ));
    }
    if sites > cfg.cap {
        return Err(CliError::Input(format!(
            "{sites} sites exceed the cap of {}",
            cfg.cap
        )));
    }
    let init = parse_initial(initial)?;
    let mut rng = cfg.rng();
    let run = match execute_plan_forced(&nf, &plan, &init, sites, forced, &mut rng) {
        Ok(run) => run,
        Err(e) => {
            let err = CliError::from(e);
            out.record(&ErrorRecord {
                r#type: "error",
                message: err.to_string(),
            })?;
            return Err(err);
        }
    };
    let summary = SimulateSummary {
        r#type: "summary",
        sites,
        measured: run.trajectory.len(),
        max_prob_deviation: run.max_prob_deviation,
        state_fidelity: run.state_fidelity,
        distance_to_target: phase_distance(&run.total_operator, &plan.target),
        seed: cfg.seed,
    };
    let steps: Vec<StepRecord> = run.trajectory.steps.iter().map(step_record).collect();
    match cfg.format {
        Format::Jsonl => {
            for s in &steps {
                out.record(s)?;
            }
            out.record(&summary)?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                steps: &'a [StepRecord],
                summary: &'a SimulateSummary,
            }
            out.document(&Doc {
                steps: &steps,
                summary: &summary,
            })?;
        }
    }
    if summary.max_prob_deviation > 1e-10
        || (summary.state_fidelity - 1.0).abs() > 1e-10
        || summary.distance_to_target > 1e-6
    {
        return Err(CliError::Failed(
            "replay disagrees with the exact simulation".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct LocusRow {
    theta: f64,
    delta: f64,
    prob: f64,
    lambda: JsonComplex,
}

#[derive(Serialize)]
struct LocusHeader {
    phi: f64,
    samples: usize,
    shape: &'static str,
}

pub fn cmd_locus(
    cfg: &RunConfig,
    out: &mut Output,
    wire: &Path,
    samples: usize,
) -> Result<(), CliError> {
    if samples < 2 {
        return Err(CliError::Input(
            "the locus needs at least two samples".into(),
        ));
    }
    let nf = load_wire(cfg, wire)?;
    let pts = realizable_locus(&nf, samples)?;
    let rows: Vec<LocusRow> = pts
        .iter()
        .map(|p| LocusRow {
            theta: p.theta,
            delta: p.delta,
            prob: p.prob,
            lambda: [p.lambda.re, p.lambda.im],
        })
        .collect();
    let circle = (nf.phi - PI).abs() < 1e-9;
    let header = LocusHeader {
        phi: nf.phi,
        samples,
        shape: if circle { "circle" } else { "ellipse" },
    };
    out.table(cfg.format, &header, &rows)
}

#[derive(Serialize)]
struct BranchJson {
    x4: u8,
    z6: u8,
    m2: u8,
    prob: f64,
    unitarity_defect: f64,
    schmidt: [f64; 4],
    operator: JsonMat4,
}

#[derive(Serialize)]
struct DecoupleJson {
    outcome: u8,
    prob: f64,
    byproduct_upper: JsonMat2,
    byproduct_lower: JsonMat2,
    fidelity: f64,
}

#[derive(Serialize)]
struct RecordJson {
    site: usize,
    outcome: u8,
    prob: f64,
}

#[derive(Serialize)]
struct SampledRunJson {
    records: Vec<RecordJson>,
    even: bool,
    distance_to_v: Option<f64>,
    operator: JsonMat4,
}

#[derive(Serialize)]
struct ExchangeJson {
    max_second_schmidt: f64,
    entangling: bool,
    entangling_branches: usize,
    branches: usize,
}

#[derive(Serialize)]
struct CoupleJson {
    normal_form: NormalFormJson,
    angles: [f64; 3],
    constraint_residual: f64,
    coupling_matrix: JsonMat2,
    v: JsonMat4,
    v_unitarity_defect: f64,
    v_schmidt: [f64; 4],
    v_schmidt_rank: usize,
    branch: [u8; 2],
    oracle_distance_to_v: f64,
    best_distance_to_v: f64,
    byproduct_residual: f64,
    branches: Vec<BranchJson>,
    decouple: Vec<DecoupleJson>,
    sampled: SampledRunJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    exchange: Option<ExchangeJson>,
}

fn record_json(r: &MeasurementRecord) -> RecordJson {
    RecordJson {
        site: r.site,
        outcome: r.outcome,
        prob: r.prob,
    }
}

pub fn cmd_couple(
    cfg: &RunConfig,
    out: &mut Output,
    wire: &Path,
    branch: [u8; 2],
    exchange: bool,
) -> Result<(), CliError> {
    let [x4, z6] = branch;
    if x4 > 1 || z6 > 1 || x4 != z6 {
        return Err(CliError::Input(
            "--branch must be an even outcome pair: 0,0 or 1,1".into(),
        ));
    }
    let nf = load_wire(cfg, wire)?;
    let gadget = CouplingGadget::new(&nf)?;
    let gate = gadget.formula_gate()?;
    let branches = gadget
        .branch_table()?
        .iter()
        .map(|b| BranchJson {
            x4: b.x4,
            z6: b.z6,
            m2: b.m2,
            prob: b.prob,
            unitarity_defect: b.gate.unitarity_defect,
            schmidt: b.gate.schmidt,
            operator: mat4_to_json(&b.gate.v),
        })
        .collect();
    let mut decouple = Vec::new();
    for k in 0..2u8 {
        let d = gadget.decouple::<qwires_core::random::Rng64>(Branch::Forced(k))?;
        decouple.push(DecoupleJson {
            outcome: d.outcome,
            prob: d.prob,
            byproduct_upper: mat2_to_json(&d.byproducts.0),
            byproduct_lower: mat2_to_json(&d.byproducts.1),
            fidelity: d.fidelity,
        });
    }
    let run = gadget.simulate(&mut cfg.rng())?;
    let exchange = if exchange {
        let v = exchange_couple_cluster(&nf, true)?;
        Some(ExchangeJson {
            max_second_schmidt: v.max_second_schmidt,
            entangling: v.entangling,
            entangling_branches: v.branches.iter().filter(|b| b.gate.is_entangling()).count(),
            branches: v.branches.len(),
        })
    } else {
        None
    };
    let a = gadget.angles;
    let report = CoupleJson {
        normal_form: (&nf).into(),
        angles: [a.gamma, a.epsilon, a.delta],
        constraint_residual: a.max_residual(nf.phi),
        coupling_matrix: mat2_to_json(&gadget.coupling),
        v: mat4_to_json(&gate.v),
        v_unitarity_defect: gate.unitarity_defect,
        v_schmidt: gate.schmidt,
        v_schmidt_rank: gate.schmidt_rank,
        branch,
        oracle_distance_to_v: gadget.even_branch_distance(x4, z6)?,
        best_distance_to_v: gadget.best_distance_to_v(x4, z6)?.0,
        byproduct_residual: gadget.byproduct_relative_to_v(x4, z6)?.1,
        branches,
        decouple,
        sampled: SampledRunJson {
            records: run.records.iter().map(record_json).collect(),
            even: run.even,
            distance_to_v: run.distance_to_v,
            operator: mat4_to_json(&run.operator),
        },
        exchange,
    };
    out.document(&report)
}

#[derive(Serialize)]
struct BoseRow {
    round: usize,
    cut: usize,
    entropy: f64,
}

#[derive(Serialize)]
struct BoseSummary {
    pairs: usize,
    sites: usize,
    cutoff: usize,
    rounds: usize,
    max_entropy: f64,
    target_entropy: f64,
    difference: f64,
    max_occupation: usize,
}

pub fn cmd_bose(
    cfg: &RunConfig,
    out: &mut Output,
    pairs: usize,
    cutoff: usize,
    rounds: usize,
) -> Result<(), CliError> {
    if 2 * pairs > cfg.cap {
        return Err(CliError::Input(format!(
            "{} sites exceed the cap of {}",
            2 * pairs,
            cfg.cap
        )));
    }
    let mut s = FockChain::initial_state(pairs, cutoff)?;
    let mut rows = Vec::new();
    let mut max_entropy = 0.0f64;
    for round in 0..=rounds {
        if round > 0 {
            s = s.round(round)?;
        }
        for (i, e) in s.entropy_profile().into_iter().enumerate() {
            max_entropy = max_entropy.max(e);
            rows.push(BoseRow {
                round,
                cut: i + 1,
                entropy: e,
            });
        }
    }
    let summary = BoseSummary {
        pairs,
        sites: 2 * pairs,
        cutoff,
        rounds,
        max_entropy,
        target_entropy: BOSE_TARGET_ENTROPY,
        difference: max_entropy - BOSE_TARGET_ENTROPY,
        max_occupation: s.max_occupation(1e-12),
    };
    out.table(cfg.format, &summary, &rows)
}

#[derive(Serialize)]
struct PropsJson {
    seed: u64,
    cases: usize,
    gauge_invariance_failures: usize,
    max_trajectory_prob_deviation: f64,
    max_trajectory_state_deviation: f64,
    max_unitality_residual: f64,
    max_trace_preservation_residual: f64,
    passed: bool,
}

pub fn cmd_props(cfg: &RunConfig, out: &mut Output, cases: usize) -> Result<(), CliError> {
    let mut rng = cfg.rng();
    let mut gauge_fail = 0;
    let (mut prob_dev, mut state_dev, mut unital, mut tp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let n_max = cfg.cap.min(12);
    for _ in 0..cases {
        let nf = random_normal_form(&mut rng);
        let rep = classify(&random_gauge(&nf.tensor(), rng.gen()), 1e-9)?;
        if !rep.normal_form.is_some_and(|f| equivalent(&f, &nf, 1e-7)) {
            gauge_fail += 1;
        }
        let ch = transfer_channel(&nf.tensor());
        unital = unital.max(ch.unitality_residual());
        tp = tp.max(ch.trace_preservation_residual());
        if n_max >= 3 {
            let n = rng.gen_range(3..=n_max);
            let thetas: Vec<f64> = (0..rng.gen_range(1..n))
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            let init = random_unit_vec2(&mut rng);
            let run = simulate_bases(&nf, &thetas, &init, n, &mut rng)?;
            prob_dev = prob_dev.max(run.max_prob_deviation);
            state_dev = state_dev.max((run.state_fidelity - 1.0).abs());
        }
    }
    let passed =
        gauge_fail == 0 && prob_dev < 1e-10 && state_dev < 1e-10 && unital < 1e-12 && tp < 1e-12;
    out.document(&PropsJson {
        seed: cfg.seed,
        cases,
        gauge_invariance_failures: gauge_fail,
        max_trajectory_prob_deviation: prob_dev,
        max_trajectory_state_deviation: state_dev,
        max_unitality_residual: unital,
        max_trace_preservation_residual: tp,
        passed,
    })?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed("property violations found".into()))
    }
}
