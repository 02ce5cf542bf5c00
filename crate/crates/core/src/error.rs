use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate axis: zero-norm rotation axis with nonzero angle")]
    DegenerateAxis,

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("gapless point at k = {k}: quasienergy {energy} is within tolerance of 0 or pi")]
    GaplessPoint { k: f64, energy: f64 },

    #[error("frame {0:?} is not chiral-symmetric; use Sym1 or Sym2")]
    NotChiralFrame(crate::model::Frame),

    #[error("resolution {0} is below the minimum of {min}", min = crate::topology::MIN_RESOLUTION)]
    ResolutionTooLow(usize),

    #[error("insufficient resolution: angle step bound not met at {cap} points")]
    InsufficientResolution { cap: usize },

    #[error("no BIS found")]
    NoBisFound,

    #[error("quench component does not change sign across k = {k}")]
    NoSignChange { k: f64 },

    #[error("BIS slope sum {twice} is odd; a BIS is missing or spurious")]
    NonIntegerWinding { twice: i32 },

    #[error("ambiguous slope {slope:.4} at k = {k}")]
    AmbiguousSlope { k: f64, slope: f64 },

    #[error("bulk gap too small: min gap at 0 = {gap_zero:.3e}, at pi = {gap_pi:.3e}, need > {required:.3e}")]
    BulkGapTooSmall {
        gap_zero: f64,
        gap_pi: f64,
        required: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
