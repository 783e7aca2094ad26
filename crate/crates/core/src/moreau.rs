//! Discrete lower and upper Moreau envelopes.
//!
//! The lower envelope of a grid function `f` with module `lambda` is
//!
//! ```text
//! M(f)(x_k) = min { f(x_k + r h) + lambda h^2 |r|^2 : r in Z^n, x_k + r h on the grid }
//! ```
//!
//! It is computed by repeated 3^n-point stencil sweeps: sweep `i` takes the
//! minimum of `prev(x_k + r h) + lambda h^2 |r|^2 (2i - 1)` over `|r|_inf <= 1`.
//! After `m` sweeps the field equals the radius-`m` windowed minimum, and once
//! `m` reaches [`iteration_bound`] it equals the full-grid envelope.
//!
//! Sweeps are Jacobi updates: every output cell reads only the previous
//! buffer. Stencil offsets are visited in lexicographic order, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_field::{next_index, oscillation, strides, ScalarField};

/// Default ℓ∞ tolerance between successive iterates.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

const PARALLEL_MIN_CELLS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Exactly `m` sweeps.
    Iterations(usize),
    /// Stop once the ℓ∞ distance between successive iterates is `<= eps`.
    Tolerance(f64),
    /// Run [`iteration_bound`] sweeps; the result is the exact discrete envelope.
    ExactBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub lambda: f64,
    pub stop: StopRule,
    pub direction: Direction,
}

impl EnvelopeParams {
    /// Lower envelope with the default tolerance stop.
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            stop: StopRule::Tolerance(DEFAULT_TOLERANCE),
            direction: Direction::Lower,
        }
    }

    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if let StopRule::Tolerance(eps) = self.stop {
            if eps.is_nan() || eps <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "tolerance must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// ℓ∞ norm between iterate `i` and `i - 1`, one entry per sweep.
    pub successive_diffs: Vec<f64>,
    pub converged: bool,
}

/// Search window for [`moreau_lower_bruteforce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Offsets with `|r|_inf <= m`.
    Radius(usize),
    /// Every grid point.
    Full,
}

/// `floor(sqrt(osc / lambda) / h) + 1`: number of sweeps after which the
/// windowed minimum equals the full-grid envelope.
pub fn iteration_bound(osc: f64, h: f64, lambda: f64) -> usize {
    ((osc / lambda).sqrt() / h).floor() as usize + 1
}

struct Offset {
    delta: isize,
    // bit 2a: needs idx[a] > 0, bit 2a+1: needs idx[a] < dims[a] - 1
    blocked: u64,
    r2: u64,
}

struct Stencil {
    offsets: Vec<Offset>,
}

impl Stencil {
    fn new(dims: &[usize]) -> Self {
        let n = dims.len();
        let st = strides(dims);
        let mut offsets = Vec::with_capacity(3usize.pow(n as u32));
        let three = vec![3usize; n];
        let mut digit = vec![0usize; n];
        loop {
            let mut delta = 0isize;
            let mut blocked = 0u64;
            let mut r2 = 0u64;
            for a in 0..n {
                let r = digit[a] as isize - 1;
                delta += r * st[a] as isize;
                r2 += (r * r) as u64;
                if r < 0 {
                    blocked |= 1 << (2 * a);
                } else if r > 0 {
                    blocked |= 1 << (2 * a + 1);
                }
            }
            offsets.push(Offset { delta, blocked, r2 });
            if !next_index(&mut digit, &three) {
                break;
            }
        }
        Self { offsets }
    }
}

/// Border flags of the cells in one row, excluding the last axis.
fn row_flags(dims: &[usize], mut row: usize) -> u64 {
    let n = dims.len();
    let mut flags = 0u64;
    for a in (0..n - 1).rev() {
        let i = row % dims[a];
        row /= dims[a];
        if i == 0 {
            flags |= 1 << (2 * a);
        }
        if i + 1 == dims[a] {
            flags |= 1 << (2 * a + 1);
        }
    }
    flags
}

/// One Jacobi sweep with stencil weights `lambda h^2 |r|^2 tau`. Returns the
/// ℓ∞ distance between `prev` and `out`.
fn sweep_into(
    dims: &[usize],
    prev: &[f64],
    out: &mut [f64],
    base: f64,
    tau: u64,
    stencil: &Stencil,
    frozen: Option<&[bool]>,
) -> f64 {
    let n = dims.len();
    let row_len = dims[n - 1];
    let last = n - 1;
    let weights: Vec<f64> = stencil.offsets.iter().map(|o| base * (o.r2 * tau) as f64).collect();

    let do_row = |row: usize, chunk: &mut [f64]| -> f64 {
        let outer = row_flags(dims, row);
        let start = row * row_len;
        let mut diff = 0.0f64;
        for (c, slot) in chunk.iter_mut().enumerate() {
            let k = start + c;
            let old = prev[k];
            if frozen.is_some_and(|fz| fz[k]) {
                *slot = old;
                continue;
            }
            let mut flags = outer;
            if c == 0 {
                flags |= 1 << (2 * last);
            }
            if c + 1 == row_len {
                flags |= 1 << (2 * last + 1);
            }
            let mut best = f64::INFINITY;
            for (o, &w) in stencil.offsets.iter().zip(&weights) {
                if flags & o.blocked != 0 {
                    continue;
                }
                let cand = prev[(k as isize + o.delta) as usize] + w;
                if cand < best {
                    best = cand;
                }
            }
            *slot = best;
            diff = diff.max((best - old).abs());
        }
        diff
    };

    if prev.len() >= PARALLEL_MIN_CELLS && row_len < prev.len() {
        out.par_chunks_mut(row_len)
            .enumerate()
            .map(|(row, chunk)| do_row(row, chunk))
            .reduce(|| 0.0, f64::max)
    } else {
        out.chunks_mut(row_len)
            .enumerate()
            .map(|(row, chunk)| do_row(row, chunk))
            .fold(0.0, f64::max)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

fn check_rank(f: &ScalarField) -> Result<()> {
    if f.ndim() > 32 {
        return Err(Error::InvalidParameter(format!(
            "at most 32 axes are supported, got {}",
            f.ndim()
        )));
    }
    Ok(())
}

/// Iteration `i >= 1` of the sweep scheme applied to `prev`.
pub fn sweep_step(prev: &ScalarField, i: usize, lambda: f64) -> Result<ScalarField> {
    check_lambda(lambda)?;
    check_rank(prev)?;
    if i == 0 {
        return Err(Error::InvalidParameter("sweep index starts at 1".into()));
    }
    let h = prev.spacing();
    let stencil = Stencil::new(prev.dims());
    let mut out = vec![0.0; prev.len()];
    let tau = 2 * i as u64 - 1;
    sweep_into(
        prev.dims(),
        prev.values(),
        &mut out,
        lambda * h * h,
        tau,
        &stencil,
        None,
    );
    Ok(ScalarField::from_parts(prev.dims().to_vec(), h, out))
}

/// Lower envelope by sweeping; cells flagged in `frozen` keep their input value.
pub(crate) fn lower_envelope_frozen(
    f: &ScalarField,
    lambda: f64,
    stop: StopRule,
    frozen: Option<&[bool]>,
) -> Result<(ScalarField, ConvergenceReport)> {
    check_lambda(lambda)?;
    check_rank(f)?;
    if let Some(fz) = frozen {
        if fz.len() != f.len() {
            return Err(Error::LengthMismatch {
                dims: f.dims().to_vec(),
                expected: f.len(),
                actual: fz.len(),
            });
        }
    }
    let h = f.spacing();
    let bound = iteration_bound(oscillation(f)?, h, lambda);
    let (max_sweeps, tol) = match stop {
        StopRule::Iterations(m) => (m, None),
        StopRule::Tolerance(eps) => {
            if eps.is_nan() || eps <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "tolerance must be positive, got {eps}"
                )));
            }
            // one sweep past the bound always reports a zero difference
            (bound + 1, Some(eps))
        }
        StopRule::ExactBound => (bound, None),
    };

    let stencil = Stencil::new(f.dims());
    let base = lambda * h * h;
    let mut prev = f.values().to_vec();
    let mut next = vec![0.0; prev.len()];
    let mut diffs = Vec::new();
    let mut converged = false;
    for i in 1..=max_sweeps {
        let tau = 2 * i as u64 - 1;
        let d = sweep_into(f.dims(), &prev, &mut next, base, tau, &stencil, frozen);
        std::mem::swap(&mut prev, &mut next);
        diffs.push(d);
        if let Some(eps) = tol {
            if d <= eps {
                converged = true;
                break;
            }
        }
    }
    match stop {
        StopRule::ExactBound => converged = true,
        StopRule::Iterations(_) => converged = diffs.last().is_some_and(|&d| d == 0.0),
        StopRule::Tolerance(_) => {}
    }
    let report = ConvergenceReport {
        iterations: diffs.len(),
        successive_diffs: diffs,
        converged,
    };
    Ok((ScalarField::from_parts(f.dims().to_vec(), h, prev), report))
}

pub(crate) fn upper_envelope_frozen(
    f: &ScalarField,
    lambda: f64,
    stop: StopRule,
    frozen: Option<&[bool]>,
) -> Result<(ScalarField, ConvergenceReport)> {
    let (lower, report) = lower_envelope_frozen(&f.neg(), lambda, stop, frozen)?;
    Ok((lower.neg(), report))
}

/// Lower Moreau envelope by the sweep scheme.
pub fn moreau_lower_iterative(f: &ScalarField, p: &EnvelopeParams) -> Result<(ScalarField, ConvergenceReport)> {
    p.validate()?;
    lower_envelope_frozen(f, p.lambda, p.stop, None)
}

/// Upper Moreau envelope, computed as `-lower(-f)`.
pub fn moreau_upper(f: &ScalarField, p: &EnvelopeParams) -> Result<(ScalarField, ConvergenceReport)> {
    p.validate()?;
    upper_envelope_frozen(f, p.lambda, p.stop, None)
}

/// Lower or upper envelope according to `p.direction`.
pub fn moreau_envelope(f: &ScalarField, p: &EnvelopeParams) -> Result<(ScalarField, ConvergenceReport)> {
    match p.direction {
        Direction::Lower => moreau_lower_iterative(f, p),
        Direction::Upper => moreau_upper(f, p),
    }
}

/// Direct evaluation of the windowed minimum. Quadratic in the window volume;
/// intended as a reference for small grids.
pub fn moreau_lower_bruteforce(f: &ScalarField, lambda: f64, window: Window) -> Result<ScalarField> {
    check_lambda(lambda)?;
    let dims = f.dims();
    let n = dims.len();
    let radius = match window {
        Window::Radius(m) => m,
        Window::Full => dims.iter().copied().max().unwrap_or(0),
    };
    let st = strides(dims);
    let base = lambda * f.spacing() * f.spacing();
    let vals = f.values();
    let mut out = Vec::with_capacity(f.len());
    let mut x = vec![0usize; n];
    let mut lo = vec![0usize; n];
    let mut ext = vec![0usize; n];
    let mut y = vec![0usize; n];
    loop {
        for a in 0..n {
            lo[a] = x[a].saturating_sub(radius);
            ext[a] = (x[a] + radius).min(dims[a] - 1) - lo[a] + 1;
        }
        y.iter_mut().for_each(|v| *v = 0);
        let mut best = f64::INFINITY;
        loop {
            let mut lin = 0;
            let mut r2 = 0u64;
            for a in 0..n {
                let ya = lo[a] + y[a];
                lin += ya * st[a];
                let r = ya as i64 - x[a] as i64;
                r2 += (r * r) as u64;
            }
            let cand = vals[lin] + base * r2 as f64;
            if cand < best {
                best = cand;
            }
            if !next_index(&mut y, &ext) {
                break;
            }
        }
        out.push(best);
        if !next_index(&mut x, dims) {
            break;
        }
    }
    Ok(ScalarField::from_parts(dims.to_vec(), f.spacing(), out))
}
