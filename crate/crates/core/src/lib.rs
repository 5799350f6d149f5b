// SPDX-License-Identifier: MIT OR Apache-2.0

//! Short segment detection in long noisy sequences.
//!
//! Positions whose absolute value exceeds a threshold are clustered when
//! they lie close together; clusters that are long enough are reported as
//! segments and scored with a p-value bound that only depends on ranks.
//!
//! ```
//! use shortseg::{detect, DetectionParams};
//!
//! let mut x = vec![0.0; 100];
//! x[49..60].fill(10.0);
//! let params = DetectionParams::absolute(1.0, 3, 3).unwrap();
//! let result = detect(&x, &params).unwrap();
//! assert_eq!(result.segments.len(), 1);
//! assert_eq!((result.segments[0].segment.start, result.segments[0].segment.end), (50, 60));
//! ```

#![forbid(unsafe_code)]

pub mod bounds;
pub mod detect;
pub mod error;
pub mod evaluate;
pub mod inference;
pub mod oracle;
pub mod segment;
pub mod simulate;
pub mod tune;

pub use detect::{
    cleanup, complete, detect, resolve_threshold, threshold_positions, AnnotatedSegment,
    DetectionParams, DetectionResult, ThresholdMode,
};
pub use error::{Error, Result};
pub use inference::{annotate_p_values, filter_by_p, p_value_upper_bound, BallConfiguration};
pub use segment::Segment;

/// Detection followed by p-value annotation.
pub fn detect_with_p_values(x: &[f64], params: &DetectionParams) -> Result<DetectionResult> {
    annotate_p_values(detect(x, params)?)
}
