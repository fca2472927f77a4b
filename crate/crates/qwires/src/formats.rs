//! JSON interchange formats. Complex numbers are `[re, im]` pairs, matrices
//! are row-major nested arrays, and every angle is in radians.

use num_complex::Complex64;
use qwires_core::compile::{CompilationPlan, PlanMethod, PlanStep};
use qwires_core::mat::{Mat2, Mat4};
use qwires_core::{NormalFormWire, WireTensor};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type JsonComplex = [f64; 2];
pub type JsonMat2 = [[JsonComplex; 2]; 2];
pub type JsonMat4 = [[JsonComplex; 4]; 4];

pub fn complex_to_json(z: Complex64) -> JsonComplex {
    [z.re, z.im]
}

pub fn mat2_to_json(m: &Mat2) -> JsonMat2 {
    let e = |r, c| complex_to_json(m[(r, c)]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat2_from_json(j: &JsonMat2) -> Mat2 {
    Mat2::from_fn(|r, c| Complex64::new(j[r][c][0], j[r][c][1]))
}

pub fn mat4_to_json(m: &Mat4) -> JsonMat4 {
    let mut out = [[[0.0; 2]; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = complex_to_json(m[(r, c)]);
        }
    }
    out
}

/// Wire given by its two MPS matrices `A[0]`, `A[1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub a0: JsonMat2,
    pub a1: JsonMat2,
}

/// Wire given directly in normal form; classification is skipped.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub w: JsonMat2,
    pub phi: f64,
}

/// Wire file: either `{"a0", "a1"}` or `{"w", "phi"}`, optionally named.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireFile {
    Tensor(TensorWire),
    NormalForm(NormalFormFile),
}

impl WireFile {
    pub fn from_tensor(t: &WireTensor, name: Option<String>) -> Self {
        Self::Tensor(TensorWire {
            name,
            a0: mat2_to_json(t.a0()),
            a1: mat2_to_json(t.a1()),
        })
    }

    pub fn tensor(&self, tol: f64) -> Result<WireTensor, CliError> {
        match self {
            Self::Tensor(f) => WireTensor::new(mat2_from_json(&f.a0), mat2_from_json(&f.a1), tol)
                .map_err(|e| CliError::Input(format!("wire tensor rejected: {e}"))),
            Self::NormalForm(_) => Ok(self.normal_form().expect("normal-form file")?.tensor()),
        }
    }

    /// The normal form, when the file states it directly.
    pub fn normal_form(&self) -> Option<Result<NormalFormWire, CliError>> {
        match self {
            Self::Tensor(_) => None,
            Self::NormalForm(f) => Some(NormalFormJson { w: f.w, phi: f.phi }.to_normal_form()),
        }
    }
}

/// Unitary file: `{"matrix": [[..], [..]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryFile {
    pub matrix: JsonMat2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub w: JsonMat2,
    pub phi: f64,
}

impl From<&NormalFormWire> for NormalFormJson {
    fn from(nf: &NormalFormWire) -> Self {
        Self {
            w: mat2_to_json(&nf.w),
            phi: nf.phi,
        }
    }
}

impl NormalFormJson {
    pub fn to_normal_form(&self) -> Result<NormalFormWire, CliError> {
        NormalFormWire::new(mat2_from_json(&self.w), self.phi)
            .map_err(|e| CliError::Input(format!("normal form rejected: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanStepJson {
    pub delta: f64,
    pub theta: f64,
    pub prob: f64,
    /// Angle of the `W·S(·)` gate applied on the other outcome, which is
    /// followed by a compensation walk and a retry.
    pub failure_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub normal_form: NormalFormJson,
    pub target: JsonMat2,
    pub residual: f64,
    pub method: String,
    pub steps: Vec<PlanStepJson>,
}

fn method_name(m: PlanMethod) -> &'static str {
    match m {
        PlanMethod::SingleStep => "single-step",
        PlanMethod::Euler => "euler",
        PlanMethod::Numerical => "numerical",
    }
}

fn method_from_name(s: &str) -> Result<PlanMethod, CliError> {
    match s {
        "single-step" => Ok(PlanMethod::SingleStep),
        "euler" => Ok(PlanMethod::Euler),
        "numerical" => Ok(PlanMethod::Numerical),
        other => Err(CliError::Input(format!("unknown plan method {other:?}"))),
    }
}

impl PlanFile {
    pub fn new(nf: &NormalFormWire, plan: &CompilationPlan) -> Self {
        Self {
            normal_form: nf.into(),
            target: mat2_to_json(&plan.target),
            residual: plan.residual,
            method: method_name(plan.method).into(),
            steps: plan
                .steps
                .iter()
                .map(|s| PlanStepJson {
                    delta: s.delta,
                    theta: s.theta,
                    prob: s.prob,
                    failure_delta: s.failure_delta,
                })
                .collect(),
        }
    }

    pub fn to_plan(&self) -> Result<(NormalFormWire, CompilationPlan), CliError> {
        let nf = self.normal_form.to_normal_form()?;
        let plan = CompilationPlan {
            steps: self
                .steps
                .iter()
                .map(|s| PlanStep {
                    delta: s.delta,
                    theta: s.theta,
                    prob: s.prob,
                    failure_delta: s.failure_delta,
                })
                .collect(),
            target: mat2_from_json(&self.target),
            residual: self.residual,
            method: method_from_name(&self.method)?,
        };
        Ok((nf, plan))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
