use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("referenced file does not exist: {0}")]
    MissingFile(PathBuf),

    #[error("non-unit quaternion (norm {0})")]
    NonUnitQuaternion(f64),

    #[error("unsupported bit depth in {path}: expected {expected}")]
    UnsupportedBitDepth { path: PathBuf, expected: &'static str },

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch { expected_w: u32, expected_h: u32, got_w: u32, got_h: u32 },

    #[error("unexpected edge-mask value {value} at pixel ({u}, {v})")]
    UnexpectedMaskValue { value: u8, u: u32, v: u32 },

    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("pose unusable for plan reduction")]
    UnusablePose,

    #[error("invalid depth")]
    InvalidDepth,

    #[error("degenerate capture")]
    DegenerateCapture,

    #[error("cluster collapse")]
    ClusterCollapse,

    #[error("degenerate means")]
    DegenerateMeans,

    #[error("insufficient walls")]
    InsufficientWalls,

    #[error("inconsistent captures: wall group spread {spread:.3} m")]
    InconsistentCaptures { spread: f64 },

    #[error("degenerate room")]
    DegenerateRoom,

    #[error("overlapping rooms {0} and {1} ({2:.6} m^2)")]
    OverlappingRooms(String, String, f64),

    #[error("door outside wall")]
    DoorOutsideWall,

    #[error("door wider than wall ({width:.3} m on a {wall:.3} m wall)")]
    DoorTooWide { width: f64, wall: f64 },

    #[error("zero ground-truth entry at index {0}")]
    ZeroGroundTruth(usize),

    #[error("count mismatch: {0} vs {1}")]
    CountMismatch(usize, usize),

    #[error("unmatched room id {0}")]
    UnmatchedRoom(String),

    #[error("occluded corner {corner} of room {room}")]
    OccludedCorner { room: String, corner: usize },

    #[error("{stage} failed for {context}: {source}")]
    Stage {
        stage: &'static str,
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid { what, why: why.into() }
    }

    pub(crate) fn in_stage(self, stage: &'static str, context: impl Into<String>) -> Self {
        Error::Stage { stage, context: context.into(), source: Box::new(self) }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// `true` for problems with the inputs (files, formats, field values);
    /// `false` for failures inside the geometric pipeline.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Io { .. }
                | Error::Malformed { .. }
                | Error::MissingFile(_)
                | Error::NonUnitQuaternion(_)
                | Error::UnsupportedBitDepth { .. }
                | Error::DimensionMismatch { .. }
                | Error::UnexpectedMaskValue { .. }
                | Error::Invalid { .. }
                | Error::Image(_)
                | Error::UnmatchedRoom(_)
                | Error::CountMismatch(..)
                | Error::ZeroGroundTruth(_)
        )
    }

    /// Process exit code: 1 for input errors, 2 for pipeline/geometry errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_input_error() {
            1
        } else {
            2
        }
    }
}
