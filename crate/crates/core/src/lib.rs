//! Grid algorithms for discrete Moreau envelopes and compensated convex
//! transforms, with the image and geometry pipelines built on them.

pub mod applications;
pub mod convex_baseline;
pub mod error;
pub mod grid_field;
pub mod io;
pub mod moreau;
pub mod oracles;
pub mod study;
pub mod transforms;

pub use error::{Error, Result};
pub use grid_field::{BinaryMask, FrameFill, FrameSpec, MaskedFrame, ScalarField};
pub use moreau::{ConvergenceReport, Direction, EnvelopeParams, StopRule};
pub use transforms::TransformResult;
