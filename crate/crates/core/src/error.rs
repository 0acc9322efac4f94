use core::fmt;

/// Errors surfaced by the geometry, table, strategy and metric layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate fell outside [0,1) or a point had the wrong dimension.
    BadPoint { dim: usize, coord: f64 },
    /// Point dimension does not match the structure it was offered to.
    DimensionMismatch { expected: usize, got: usize },
    /// A rectangle violated 0 <= lo < hi <= 1 on some axis.
    BadRect,
    /// The rectangle is not dyadic, as required by the operation.
    NotDyadic,
    /// The rectangle corners are not on the 2^-level grid.
    NotLattice { level: u32 },
    /// A dyadic level exceeded the exact-arithmetic cap.
    LevelTooLarge { level: u32 },
    /// A shape or Haar identifier was malformed or out of range.
    BadHaarId,
    /// An integer count overflowed the platform range.
    CountOverflow,
    /// Growing the coefficient table would exceed its entry cap.
    EntryCapExceeded { projected: u64, cap: u64 },
    /// Attempted to shrink or re-grow the table to a non-larger order.
    NotGrowth { current: u32, requested: u32 },
    /// beta must lie in (0, 1].
    BadBeta(f64),
    /// The candidate source ran dry before the requested output length.
    CandidatesExhausted { produced: u64 },
    /// The candidate source failed (details live with the source).
    SourceFailure,
    /// A metric was asked for an empty group of values.
    EmptyGroup,
    /// The requested grid does not fit in the configured memory budget.
    GridTooLarge { cells: u64, cap: u64 },
    /// Text input could not be parsed as the expected structure.
    Parse(&'static str),
    /// A snapshot failed validation against its own point list.
    CorruptSnapshot,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadPoint { dim, coord } => {
                write!(f, "coordinate {coord} on axis {dim} is outside [0,1)")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "expected dimension {expected}, got {got}")
            }
            Error::BadRect => write!(f, "rectangle must satisfy 0 <= lo < hi <= 1 on every axis"),
            Error::NotDyadic => write!(f, "rectangle is not dyadic"),
            Error::NotLattice { level } => {
                write!(f, "rectangle corners are not on the 2^-{level} lattice")
            }
            Error::LevelTooLarge { level } => {
                write!(f, "dyadic level {level} exceeds the exact-arithmetic cap")
            }
            Error::BadHaarId => write!(f, "malformed shape or position index"),
            Error::CountOverflow => write!(f, "shape count overflows the integer range"),
            Error::EntryCapExceeded { projected, cap } => {
                write!(f, "growth would allocate {projected} entries, cap is {cap}")
            }
            Error::NotGrowth { current, requested } => {
                write!(
                    f,
                    "requested order {requested} is not above current order {current}"
                )
            }
            Error::BadBeta(b) => write!(f, "beta {b} is outside (0, 1]"),
            Error::CandidatesExhausted { produced } => {
                write!(
                    f,
                    "candidate source exhausted after producing {produced} outputs"
                )
            }
            Error::SourceFailure => write!(f, "candidate source failed"),
            Error::EmptyGroup => write!(f, "empty group has no summary statistics"),
            Error::GridTooLarge { cells, cap } => {
                write!(f, "lattice grid needs {cells} cells, cap is {cap}")
            }
            Error::Parse(what) => write!(f, "parse error: {what}"),
            Error::CorruptSnapshot => write!(f, "snapshot arrays disagree with the stored points"),
        }
    }
}

impl core::error::Error for Error {}
