use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("wire tensor is not right-normalized (defect {defect:.3e})")]
    NotNormalized { defect: f64 },
    #[error("transfer channel has no spectral gap (gap {gap:.3e})")]
    NoGap { gap: f64 },
    #[error("degenerate by-product angle (phi = {phi:.3e})")]
    Degenerate { phi: f64 },
    #[error("target not reached (residual {residual:.3e} at length {len})")]
    NotReached { residual: f64, len: usize },
    #[error("by-product group is infinite (more than {bound} elements)")]
    InfiniteGroup { bound: usize },
    #[error("system of {n} sites exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("all {sites} chain sites consumed before the plan finished")]
    ChainExhausted { sites: usize },
    #[error("forced measurement branch has probability {prob:.3e}")]
    ZeroProbabilityBranch { prob: f64 },
    #[error("coupling angles violate their constraints (residual {residual:.3e})")]
    ConstraintViolated { residual: f64 },
    #[error("truncated Fock space leaks weight {weight:.3e}")]
    CutoffLeak { weight: f64 },
    #[error("wire is not a cluster wire")]
    NotClusterWire,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
