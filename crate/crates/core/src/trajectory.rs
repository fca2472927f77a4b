//! Measurement bases and recorded measurement sequences.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::mat::{c, ket, Mat2, Vec2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisLabel {
    Computational,
    /// `{sinθ|0⟩ + cosθ|1⟩, cosθ|0⟩ − sinθ|1⟩}`.
    Theta(f64),
    /// `{|+⟩, |−⟩}`.
    X,
    Custom,
}

/// An orthonormal single-site basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Basis {
    pub vectors: [Vec2; 2],
    pub label: BasisLabel,
}

impl Basis {
    pub fn computational() -> Self {
        Self {
            vectors: [ket(0), ket(1)],
            label: BasisLabel::Computational,
        }
    }

    pub fn theta(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        Self {
            vectors: [
                Vec2::new(c(s, 0.0), c(co, 0.0)),
                Vec2::new(c(co, 0.0), c(-s, 0.0)),
            ],
            label: BasisLabel::Theta(theta),
        }
    }

    pub fn x() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Self {
            vectors: [
                Vec2::new(c(h, 0.0), c(h, 0.0)),
                Vec2::new(c(h, 0.0), c(-h, 0.0)),
            ],
            label: BasisLabel::X,
        }
    }

    pub fn custom(v0: Vec2, v1: Vec2) -> Self {
        Self {
            vectors: [v0, v1],
            label: BasisLabel::Custom,
        }
    }

    /// `max |⟨v_a|v_b⟩ − δ_ab|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                d = d.max((self.vectors[a].dotc(&self.vectors[b]) - c(want, 0.0)).norm());
            }
        }
        d
    }
}

/// One recorded measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub site: usize,
    pub basis: Basis,
    pub outcome: u8,
    pub prob: f64,
    /// Correlation-space operator applied by this outcome (unitary part,
    /// up to the global phase convention of the producer).
    pub operator: Mat2,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Product of the step operators, later steps on the left.
    pub fn total_operator(&self) -> Mat2 {
        self.steps
            .iter()
            .fold(Mat2::identity(), |acc, s| s.operator * acc)
    }

    pub fn joint_probability(&self) -> f64 {
        self.steps.iter().map(|s| s.prob).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bases_are_orthonormal() {
        for b in [Basis::computational(), Basis::x(), Basis::theta(0.37)] {
            assert!(b.orthonormality_defect() < 1e-15);
        }
    }

    #[test]
    fn theta_half_pi_is_computational_up_to_sign() {
        let b = Basis::theta(core::f64::consts::FRAC_PI_2);
        assert!((b.vectors[0] - ket(0)).norm() < 1e-15);
        assert!((b.vectors[1] + ket(1)).norm() < 1e-15);
    }
}
