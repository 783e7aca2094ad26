//! Iterative convex envelope on a grid and the convex-envelope form of the
//! compensated transforms, kept as a slow reference for the Moreau scheme.
//!
//! Each iteration replaces every interior value by the minimum of `f` and the
//! midpoints `(u(x + r h) + u(x - r h)) / 2` over the `(3^n - 1) / 2`
//! directions `|r|_inf = 1`. The outermost layer of the grid keeps the
//! values of `f`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_field::{
    crop, extend_masked, next_index, pad_frame, strides, BinaryMask, FrameSpec, MaskedFrame, ScalarField,
};
use crate::moreau::{ConvergenceReport, DEFAULT_TOLERANCE};
use crate::transforms::{default_big_m, TransformResult};

const PARALLEL_MIN_CELLS: usize = 1 << 14;

/// Norm of the change between successive iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffNorm {
    #[default]
    Linf,
    /// `sqrt(h^n * sum d^2)`.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub tol: f64,
    pub max_iterations: usize,
    pub norm: DiffNorm,
    /// Wall-clock budget; hitting it ends the run unconverged.
    pub time_limit: Option<Duration>,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            max_iterations: 1_000_000,
            norm: DiffNorm::Linf,
            time_limit: None,
        }
    }
}

impl BaselineParams {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iterations(mut self, m: usize) -> Self {
        self.max_iterations = m;
        self
    }

    pub fn with_norm(mut self, norm: DiffNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_time_limit(mut self, limit: Option<Duration>) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Linear offsets of one representative per opposite direction pair.
fn half_stencil(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let st = strides(dims);
    let three = vec![3usize; n];
    let mut digit = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        // the first nonzero component is +1
        let lead = digit.iter().find(|&&d| d != 1);
        if lead == Some(&2) {
            let delta: isize = digit
                .iter()
                .zip(&st)
                .map(|(&d, &s)| (d as isize - 1) * s as isize)
                .sum();
            out.push(delta as usize);
        }
        if !next_index(&mut digit, &three) {
            break;
        }
    }
    out
}

fn interior_flags(dims: &[usize]) -> Vec<bool> {
    let mut idx = vec![0usize; dims.len()];
    let mut out = Vec::with_capacity(dims.iter().product());
    loop {
        out.push(idx.iter().zip(dims).all(|(&i, &d)| i > 0 && i + 1 < d));
        if !next_index(&mut idx, dims) {
            break;
        }
    }
    out
}

/// Convex envelope of `f` with the boundary layer held at `f`.
pub fn convex_envelope_iterative(f: &ScalarField, p: &BaselineParams) -> Result<(ScalarField, ConvergenceReport)> {
    p.validate()?;
    let dims = f.dims();
    let dirs = half_stencil(dims);
    let interior = interior_flags(dims);
    let cell = f.spacing().powi(dims.len() as i32);
    let base = f.values();
    let row_len = dims[dims.len() - 1];

    let mut prev = base.to_vec();
    let mut next = prev.clone();
    let mut diffs = Vec::new();
    let mut converged = false;
    let started = Instant::now();

    let do_row = |row: usize, chunk: &mut [f64], prev: &[f64]| -> (f64, f64) {
        let start = row * row_len;
        let (mut dmax, mut dsq) = (0.0f64, 0.0f64);
        for (c, slot) in chunk.iter_mut().enumerate() {
            let k = start + c;
            if !interior[k] {
                *slot = prev[k];
                continue;
            }
            let mut best = base[k];
            for &d in &dirs {
                let mid = 0.5 * (prev[k + d] + prev[k - d]);
                if mid < best {
                    best = mid;
                }
            }
            let diff = (best - prev[k]).abs();
            dmax = dmax.max(diff);
            dsq += diff * diff;
            *slot = best;
        }
        (dmax, dsq)
    };
    let merge = |a: (f64, f64), b: (f64, f64)| (a.0.max(b.0), a.1 + b.1);

    if !interior.iter().any(|&b| b) {
        let report = ConvergenceReport {
            iterations: 0,
            successive_diffs: Vec::new(),
            converged: true,
        };
        return Ok((f.clone(), report));
    }

    for _ in 0..p.max_iterations {
        let (dmax, dsq) = if prev.len() >= PARALLEL_MIN_CELLS && row_len < prev.len() {
            next.par_chunks_mut(row_len)
                .enumerate()
                .map(|(row, chunk)| do_row(row, chunk, &prev))
                .reduce(|| (0.0, 0.0), merge)
        } else {
            next.chunks_mut(row_len)
                .enumerate()
                .map(|(row, chunk)| do_row(row, chunk, &prev))
                .fold((0.0, 0.0), merge)
        };
        std::mem::swap(&mut prev, &mut next);
        let d = match p.norm {
            DiffNorm::Linf => dmax,
            DiffNorm::L2 => (dsq * cell).sqrt(),
        };
        diffs.push(d);
        if d <= p.tol {
            converged = true;
            break;
        }
        if p.time_limit.is_some_and(|t| started.elapsed() >= t) {
            break;
        }
    }
    let report = ConvergenceReport {
        iterations: diffs.len(),
        successive_diffs: diffs,
        converged,
    };
    Ok((ScalarField::new(dims.to_vec(), f.spacing(), prev)?, report))
}

/// `lambda |x - c|^2` with `c` the grid centre.
fn centred_quadratic(f: &ScalarField, lambda: f64) -> Result<ScalarField> {
    let h = f.spacing();
    let dims = f.dims().to_vec();
    ScalarField::from_fn(&dims, h, |idx| {
        lambda
            * idx
                .iter()
                .zip(&dims)
                .map(|(&i, &d)| {
                    let x = (i as f64 - 0.5 * (d as f64 - 1.0)) * h;
                    x * x
                })
                .sum::<f64>()
    })
}

/// `co[f + lambda |.|^2] - lambda |.|^2` on the grid as given.
pub fn lower_transform_convex(f: &ScalarField, lambda: f64, p: &BaselineParams) -> Result<TransformResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let q = centred_quadratic(f, lambda)?;
    let lifted = f.zip_map(&q, |a, b| a + b)?;
    let (co, report) = convex_envelope_iterative(&lifted, p)?;
    let field = co.zip_map(&q, |a, b| a - b)?;
    Ok(TransformResult::from_passes(field, vec![report]))
}

/// `lambda |.|^2 - co[lambda |.|^2 - f]`, i.e. `-lower_transform_convex(-f)`.
pub fn upper_transform_convex(f: &ScalarField, lambda: f64, p: &BaselineParams) -> Result<TransformResult> {
    let mut r = lower_transform_convex(&f.neg(), lambda, p)?;
    r.field = r.field.neg();
    Ok(r)
}

/// Convex-scheme counterpart of the local lower transform: the field gets a
/// one-cell `min f` frame that stays fixed, and the frame is cropped off.
pub fn local_lower_transform_convex(f: &ScalarField, lambda: f64, p: &BaselineParams) -> Result<TransformResult> {
    let padded = pad_frame(f, FrameSpec::min(1))?;
    let mut r = lower_transform_convex(&padded, lambda, p)?;
    r.field = crop(&r.field, 1)?;
    Ok(r)
}

/// `-local_lower_transform_convex(-f)`.
pub fn local_upper_transform_convex(f: &ScalarField, lambda: f64, p: &BaselineParams) -> Result<TransformResult> {
    let mut r = local_lower_transform_convex(&f.neg(), lambda, p)?;
    r.field = r.field.neg();
    Ok(r)
}

/// Convex-scheme average transform of the samples on `known`, built on the
/// same `+-M` extensions and `min_K` / `max_K` frames as
/// [`crate::transforms::average_transform`].
pub fn average_transform_convex(
    f: &ScalarField,
    known: &BinaryMask,
    lambda: f64,
    big_m: Option<f64>,
    p: &BaselineParams,
) -> Result<TransformResult> {
    let m = match big_m {
        Some(m) => m,
        None => default_big_m(f, known, lambda)?,
    };
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "M must be positive and finite, got {m}"
        )));
    }
    let lo = lower_transform_convex(&extend_masked(f, known, m, MaskedFrame::MinK)?, lambda, p)?;
    let up = upper_transform_convex(&extend_masked(f, known, -m, MaskedFrame::MaxK)?, lambda, p)?;
    let avg = lo.field().zip_map(up.field(), |a, b| 0.5 * (a + b))?;
    let mut passes = lo.per_pass;
    passes.extend(up.per_pass);
    Ok(TransformResult::from_passes(crop(&avg, 1)?, passes))
}
