use alloc::string::String;
use core::fmt;

/// Errors reported by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Pixel buffer length does not match width * height * channels.
    PixelBufferMismatch {
        width: u32,
        height: u32,
        channels: u8,
        len: usize,
    },
    /// Channel count outside the supported set {1, 3, 4}.
    UnsupportedChannels(u8),
    /// Zero-sized image or rectangle where a non-empty one is required.
    EmptyDimensions,
    /// Rectangle (or placement) extends outside the image bounds.
    OutOfBounds {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
        image_w: u32,
        image_h: u32,
    },
    /// Canny thresholds must satisfy 0 <= low < high.
    InvalidThresholds { low: f32, high: f32 },
    /// Operation needs at least one opaque pixel (alpha > 0).
    NoOpaquePixels,
    /// Icon pool is empty.
    EmptyIconPool,
    /// Icon asset rejected at load/validation time.
    InvalidIcon { id: String, reason: &'static str },
    /// Parameter set failed validation.
    InvalidParams { reason: &'static str },
    /// Detection failed validation (score range, probability vector).
    InvalidDetection { reason: &'static str },
    /// Class probability vector has the wrong length.
    ProbsLength { expected: usize, actual: usize },
    /// Box lies outside the tile coordinate space.
    OutOfTile { x: f64, y: f64, w: f64, h: f64 },
    /// Vector length does not match the expected dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// Every input word was out-of-vocabulary.
    NoWordsEmbedded { skipped: usize },
    /// Vocabulary is empty or contains duplicates.
    InvalidVocabulary { reason: &'static str },
    /// Training/classification input rejected.
    InvalidTrainingData { reason: &'static str },
    /// Loss became NaN or infinite during training.
    NonFiniteLoss { epoch: u32 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PixelBufferMismatch {
                width,
                height,
                channels,
                len,
            } => write!(
                f,
                "pixel buffer of {len} bytes does not match {width}x{height}x{channels}"
            ),
            Error::UnsupportedChannels(c) => {
                write!(f, "unsupported channel count {c} (expected 1, 3 or 4)")
            }
            Error::EmptyDimensions => write!(f, "width and height must be non-zero"),
            Error::OutOfBounds {
                x,
                y,
                w,
                h,
                image_w,
                image_h,
            } => write!(
                f,
                "rect {w}x{h}+{x}+{y} exceeds image bounds {image_w}x{image_h}"
            ),
            Error::InvalidThresholds { low, high } => {
                write!(f, "thresholds must satisfy 0 <= low < high (got {low}, {high})")
            }
            Error::NoOpaquePixels => write!(f, "no opaque pixels (alpha > 0) in image"),
            Error::EmptyIconPool => write!(f, "icon pool is empty"),
            Error::InvalidIcon { id, reason } => write!(f, "icon '{id}': {reason}"),
            Error::InvalidParams { reason } => write!(f, "invalid parameters: {reason}"),
            Error::InvalidDetection { reason } => write!(f, "invalid detection: {reason}"),
            Error::ProbsLength { expected, actual } => {
                write!(f, "class_probs length {actual}, expected {expected}")
            }
            Error::OutOfTile { x, y, w, h } => {
                write!(f, "box ({x}, {y}, {w}, {h}) lies outside the tile")
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::NoWordsEmbedded { skipped } => {
                write!(f, "no embeddable words ({skipped} skipped)")
            }
            Error::InvalidVocabulary { reason } => write!(f, "invalid vocabulary: {reason}"),
            Error::InvalidTrainingData { reason } => {
                write!(f, "invalid training data: {reason}")
            }
            Error::NonFiniteLoss { epoch } => {
                write!(f, "training loss became non-finite in epoch {epoch}")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
