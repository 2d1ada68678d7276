//! File formats: JSON scans and maps, CARMEN logs, SVG figures.

mod carmen;
mod json;
mod svg;

pub use carmen::{parse_carmen_log, CarmenLog, CarmenOptions, CarmenRecord};
pub use json::{MapFile, PolylineRecord, RayRecord, ScanFile, FORMAT_VERSION};
pub use svg::{render_svg, SvgStyle};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}
