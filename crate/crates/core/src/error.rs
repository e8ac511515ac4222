use crate::strings::BinaryString;
use thiserror::Error;

/// Errors surfaced by samplers, measure engines, and analytic checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operation that assumes a supercritical process (p > 1/2) was
    /// called with p <= 1/2; callers wanting that regime use the
    /// subcritical operations instead.
    #[error("survival parameter p = {p} is not supercritical (requires p > 1/2)")]
    NotSupercritical { p: f64 },

    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },

    #[error("gamma = {gamma} outside the supported range [0, 1)")]
    InvalidGamma { gamma: f64 },

    #[error("cannot parse gamma spec {input:?}; expected a float or \"log2(q/r)\"")]
    BadGammaSpec { input: String },

    #[error("cannot parse binary string {input:?}; expected 0/1 digits or \"e\"")]
    BadBinaryString { input: String },

    #[error("exact rational mode requires gamma of the form log2(q/r)")]
    ExactModeUnavailable,

    #[error("string of length {len} exceeds the maximum of {max}")]
    StringTooLong { len: usize, max: usize },

    #[error("depth {requested} exceeds the ceiling {max} for {context}")]
    DepthCeiling {
        requested: u32,
        max: u32,
        context: &'static str,
    },

    #[error("string {string} has length {} >= set depth {depth}", .string.len())]
    StringBeyondDepth { string: BinaryString, depth: u32 },

    #[error("set is not prefix-closed: {witness} is present but its parent is not")]
    NotPrefixClosed { witness: BinaryString },

    #[error("replicate count must be at least 1")]
    NoReplicates,

    #[error("ultrametric distance requires distinct strings of equal length")]
    UltrametricUndefined,

    #[error("mass bound violated at {sigma}: mass {mass} > bound {bound}")]
    MassBoundViolation {
        sigma: BinaryString,
        mass: f64,
        bound: f64,
    },

    #[error("period pattern requires 0 < r < q, got q = {q}, r = {r}")]
    BadPeriodPattern { q: u32, r: u32 },

    #[error("change count {count} at stage {stage} exceeds the bound f({stage}) = {bound}")]
    ChangeCountExceeded { stage: u32, count: u64, bound: u64 },

    #[error("witness {witness} at stage {stage} must have length {stage}")]
    BadWitnessLength { stage: u32, witness: BinaryString },

    #[error("measure {tag} is only defined to depth {horizon}, needed {needed}")]
    HorizonExceeded {
        tag: String,
        horizon: u32,
        needed: u32,
    },

    #[error("epsilon = {epsilon} outside (0, 1)")]
    BadEpsilon { epsilon: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
