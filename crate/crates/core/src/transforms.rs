//! Compensated convex transforms as mixed Moreau envelopes.
//!
//! * lower transform: `C^l(f) = upper(lower(f))`
//! * upper transform: `C^u(f) = lower(upper(f))`
//!
//! The *local* variants work on a bounded box: `f` gets a one-cell frame
//! filled with `min f` (lower) or `max f` (upper), both envelope passes run
//! with the frame cells frozen, and the frame is cropped off again. The
//! *global* variants run on the grid as given, with out-of-grid neighbours
//! skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_field::{crop, extend_masked, pad_with, BinaryMask, MaskedFrame, ScalarField};
use crate::moreau::{lower_envelope_frozen, upper_envelope_frozen, ConvergenceReport, Direction, EnvelopeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult {
    pub field: ScalarField,
    /// Sum of the sweeps over every envelope pass.
    pub total_iterations: usize,
    pub per_pass: Vec<ConvergenceReport>,
}

/// Iteration bookkeeping of a [`TransformResult`], without the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSummary {
    pub total_iterations: usize,
    pub per_pass: Vec<ConvergenceReport>,
}

impl TransformResult {
    pub(crate) fn from_passes(field: ScalarField, per_pass: Vec<ConvergenceReport>) -> Self {
        Self {
            field,
            total_iterations: per_pass.iter().map(|r| r.iterations).sum(),
            per_pass,
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn into_field(self) -> ScalarField {
        self.field
    }

    pub fn converged(&self) -> bool {
        self.per_pass.iter().all(|r| r.converged)
    }

    pub fn summary(&self) -> TransformSummary {
        TransformSummary {
            total_iterations: self.total_iterations,
            per_pass: self.per_pass.clone(),
        }
    }
}

fn mixed_lower(f: &ScalarField, p: &EnvelopeParams, frozen: Option<&[bool]>) -> Result<TransformResult> {
    p.validate()?;
    let (lo, r1) = lower_envelope_frozen(f, p.lambda, p.stop, frozen)?;
    let (up, r2) = upper_envelope_frozen(&lo, p.lambda, p.stop, frozen)?;
    Ok(TransformResult::from_passes(up, vec![r1, r2]))
}

fn negate(mut r: TransformResult) -> TransformResult {
    r.field = r.field.neg();
    r
}

/// `C^l_lambda(f)` on the grid as given.
pub fn lower_transform(f: &ScalarField, p: &EnvelopeParams) -> Result<TransformResult> {
    mixed_lower(f, p, None)
}

/// `C^u_lambda(f) = -C^l_lambda(-f)`.
pub fn upper_transform(f: &ScalarField, p: &EnvelopeParams) -> Result<TransformResult> {
    Ok(negate(lower_transform(&f.neg(), p)?))
}

fn check_local_dims(f: &ScalarField) -> Result<()> {
    if let Some(&d) = f.dims().iter().find(|&&d| d < 2) {
        return Err(Error::DegenerateDims {
            extent: d,
            reason: "local transforms need at least two cells per axis",
        });
    }
    Ok(())
}

/// Lower transform of a field whose outermost layer is a boundary frame held
/// fixed during both passes. The frame is kept in the output.
pub(crate) fn local_lower_framed(framed: &ScalarField, p: &EnvelopeParams) -> Result<TransformResult> {
    let frozen = BinaryMask::frame(framed.dims(), 1)?;
    mixed_lower(framed, p, Some(frozen.bits()))
}

pub(crate) fn local_upper_framed(framed: &ScalarField, p: &EnvelopeParams) -> Result<TransformResult> {
    Ok(negate(local_lower_framed(&framed.neg(), p)?))
}

/// Local lower transform with an arbitrary frame value. With `frame = min f`
/// this is [`local_lower_transform`].
pub fn local_lower_transform_with_frame(f: &ScalarField, frame: f64, p: &EnvelopeParams) -> Result<TransformResult> {
    check_local_dims(f)?;
    if !frame.is_finite() {
        return Err(Error::InvalidParameter(format!("frame value {frame} is not finite")));
    }
    let padded = pad_with(f, 1, frame);
    let mut r = local_lower_framed(&padded, p)?;
    r.field = crop(&r.field, 1)?;
    Ok(r)
}

/// `C^l_{lambda,Omega}(f^-)`: local lower transform on the box with the
/// `min f` frame.
pub fn local_lower_transform(f: &ScalarField, p: &EnvelopeParams) -> Result<TransformResult> {
    local_lower_transform_with_frame(f, f.min(), p)
}

/// `C^u_{lambda,Omega}(f^+)`, computed as `-C^l_{lambda,Omega}((-f)^-)`.
pub fn local_upper_transform(f: &ScalarField, p: &EnvelopeParams) -> Result<TransformResult> {
    Ok(negate(local_lower_transform(&f.neg(), p)?))
}

/// Default big-M for interpolation: `sup_K |f| + lambda (h * max_dim)^2 + 1`,
/// so that both `+M` and `-M` clear the data by more than `lambda diam^2(D)`
/// for any damaged set `D` in the box.
pub fn default_big_m(f: &ScalarField, known: &BinaryMask, lambda: f64) -> Result<f64> {
    crate::grid_field::ensure_same_dims(f.dims(), known.dims())?;
    let sup = f
        .values()
        .iter()
        .zip(known.bits())
        .filter(|(_, &k)| k)
        .map(|(&v, _)| v.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if sup == f64::NEG_INFINITY {
        return Err(Error::EmptyMask);
    }
    let span = f.spacing() * *f.dims().iter().max().unwrap_or(&0) as f64;
    Ok(sup + lambda * span * span + 1.0)
}

/// Average compensated convex transform of the samples `f` on `known`:
/// the mean of the local lower transform of the `+M` extension and the local
/// upper transform of the `-M` extension. Values of `f` off `known` are ignored.
pub fn average_transform(
    f: &ScalarField,
    known: &BinaryMask,
    big_m: Option<f64>,
    p: &EnvelopeParams,
) -> Result<TransformResult> {
    p.validate()?;
    if !known.any() {
        return Err(Error::EmptyMask);
    }
    let m = match big_m {
        Some(m) => m,
        None => default_big_m(f, known, p.lambda)?,
    };
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "M must be positive and finite, got {m}"
        )));
    }
    let lower_aux = extend_masked(f, known, m, MaskedFrame::MinK)?;
    let upper_aux = extend_masked(f, known, -m, MaskedFrame::MaxK)?;
    let lo = local_lower_framed(&lower_aux, p)?;
    let up = local_upper_framed(&upper_aux, p)?;
    let avg = lo.field().zip_map(up.field(), |a, b| 0.5 * (a + b))?;
    let mut passes = lo.per_pass;
    passes.extend(up.per_pass);
    Ok(TransformResult::from_passes(crop(&avg, 1)?, passes))
}

/// Pads `f` with `pad_cells` cells of `pad_value`, runs the global transform
/// selected by `p.direction` over the padded grid, and crops back.
pub fn global_transform_on_padded(
    f: &ScalarField,
    pad_cells: usize,
    pad_value: f64,
    p: &EnvelopeParams,
) -> Result<TransformResult> {
    if !pad_value.is_finite() {
        return Err(Error::InvalidParameter(format!("pad value {pad_value} is not finite")));
    }
    let padded = pad_with(f, pad_cells, pad_value);
    let mut r = match p.direction {
        Direction::Lower => lower_transform(&padded, p)?,
        Direction::Upper => upper_transform(&padded, p)?,
    };
    r.field = crop(&r.field, pad_cells)?;
    Ok(r)
}
