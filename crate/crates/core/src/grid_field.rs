//! Dense n-dimensional scalar fields and boolean masks on uniform grids,
//! together with the frame and masked extensions used by the local transforms.
//!
//! Storage is row-major: the last axis varies fastest. Every field carries
//! its own grid spacing `h`.

use crate::error::{Error, Result};

/// Real samples on a uniform n-D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dims: Vec<usize>,
    spacing: f64,
    values: Vec<f64>,
}

/// Boolean samples on an n-D grid, same layout as [`ScalarField`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    dims: Vec<usize>,
    bits: Vec<bool>,
}

/// Value written into the cells of a padding frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameFill {
    Min,
    Max,
    Const(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    pub width: usize,
    pub fill: FrameFill,
}

impl FrameSpec {
    pub fn new(width: usize, fill: FrameFill) -> Self {
        Self { width, fill }
    }

    pub fn min(width: usize) -> Self {
        Self::new(width, FrameFill::Min)
    }

    pub fn max(width: usize) -> Self {
        Self::new(width, FrameFill::Max)
    }
}

/// Which extreme of `f` over `K` fills the frame in [`extend_masked`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskedFrame {
    MinK,
    MaxK,
}

pub(crate) fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

/// Advance a row-major multi-index by one. Returns false once it wraps.
pub(crate) fn next_index(idx: &mut [usize], dims: &[usize]) -> bool {
    for a in (0..dims.len()).rev() {
        idx[a] += 1;
        if idx[a] < dims[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::EmptyField);
    }
    let expected = product(dims);
    if expected != len {
        return Err(Error::LengthMismatch {
            dims: dims.to_vec(),
            expected,
            actual: len,
        });
    }
    Ok(())
}

impl ScalarField {
    pub fn new(dims: Vec<usize>, spacing: f64, values: Vec<f64>) -> Result<Self> {
        check_dims(&dims, values.len())?;
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidSpacing(spacing));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dims, spacing, values })
    }

    /// Builds a field by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(dims: &[usize], spacing: f64, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::EmptyField);
        }
        let mut values = Vec::with_capacity(product(dims));
        let mut idx = vec![0; dims.len()];
        loop {
            values.push(f(&idx));
            if !next_index(&mut idx, dims) {
                break;
            }
        }
        Self::new(dims.to_vec(), spacing, values)
    }

    pub fn constant(dims: &[usize], spacing: f64, value: f64) -> Result<Self> {
        Self::new(dims.to_vec(), spacing, vec![value; product(dims)])
    }

    /// Skips validation; callers guarantee finite values and consistent dims.
    pub(crate) fn from_parts(dims: Vec<usize>, spacing: f64, values: Vec<f64>) -> Self {
        debug_assert_eq!(product(&dims), values.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { dims, spacing, values }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(strides(&self.dims)).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            idx[a] = lin % self.dims[a];
            lin /= self.dims[a];
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.linear_index(idx)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidSpacing(spacing));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dims.clone(),
            self.spacing,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_dims(&self.dims, &other.dims)?;
        Self::new(
            self.dims.clone(),
            self.spacing,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Pointwise negation. Exact in floating point.
    pub fn neg(&self) -> Self {
        Self::from_parts(
            self.dims.clone(),
            self.spacing,
            self.values.iter().map(|v| -v).collect(),
        )
    }
}

pub(crate) fn ensure_same_dims(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch {
            left: a.to_vec(),
            right: b.to_vec(),
        });
    }
    Ok(())
}

impl BinaryMask {
    pub fn new(dims: Vec<usize>, bits: Vec<bool>) -> Result<Self> {
        check_dims(&dims, bits.len())?;
        Ok(Self { dims, bits })
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> bool) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::EmptyField);
        }
        let mut bits = Vec::with_capacity(product(dims));
        let mut idx = vec![0; dims.len()];
        loop {
            bits.push(f(&idx));
            if !next_index(&mut idx, dims) {
                break;
            }
        }
        Self::new(dims.to_vec(), bits)
    }

    pub fn full(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), vec![true; product(dims)])
    }

    pub fn empty(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), vec![false; product(dims)])
    }

    /// Cells lying within `width` of the grid border.
    pub fn frame(dims: &[usize], width: usize) -> Result<Self> {
        Self::from_fn(dims, |idx| {
            idx.iter().zip(dims).any(|(&i, &d)| i < width || i + width >= d)
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> bool {
        let lin: usize = idx.iter().zip(strides(&self.dims)).map(|(i, s)| i * s).sum();
        self.bits[lin]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

/// `max(f) - min(f)`.
pub fn oscillation(f: &ScalarField) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyField);
    }
    Ok(f.max() - f.min())
}

/// Grows every axis by `width` cells on each side, filling new cells with `value`.
pub fn pad_with(f: &ScalarField, width: usize, value: f64) -> ScalarField {
    if width == 0 {
        return f.clone();
    }
    let out_dims: Vec<usize> = f.dims.iter().map(|d| d + 2 * width).collect();
    let mut values = Vec::with_capacity(product(&out_dims));
    let mut idx = vec![0; out_dims.len()];
    let src_strides = strides(&f.dims);
    loop {
        let mut lin = 0;
        let mut inside = true;
        for a in 0..idx.len() {
            let i = idx[a];
            if i < width || i >= width + f.dims[a] {
                inside = false;
                break;
            }
            lin += (i - width) * src_strides[a];
        }
        values.push(if inside { f.values[lin] } else { value });
        if !next_index(&mut idx, &out_dims) {
            break;
        }
    }
    ScalarField::from_parts(out_dims, f.spacing, values)
}

/// Frame extension of `f`: with `Min` fill this realizes `f` extended to the
/// closure of its box by `inf f`, with `Max` fill by `sup f`.
pub fn pad_frame(f: &ScalarField, spec: FrameSpec) -> Result<ScalarField> {
    let value = match spec.fill {
        FrameFill::Min => f.min(),
        FrameFill::Max => f.max(),
        FrameFill::Const(c) => {
            if !c.is_finite() {
                return Err(Error::InvalidParameter(format!("frame value {c} is not finite")));
            }
            c
        }
    };
    Ok(pad_with(f, spec.width, value))
}

/// Removes `width` cells from both ends of every axis.
pub fn crop(f: &ScalarField, width: usize) -> Result<ScalarField> {
    if width == 0 {
        return Ok(f.clone());
    }
    if let Some(&d) = f.dims.iter().find(|&&d| d <= 2 * width) {
        return Err(Error::DegenerateDims {
            extent: d,
            reason: "crop would leave no interior",
        });
    }
    let out_dims: Vec<usize> = f.dims.iter().map(|d| d - 2 * width).collect();
    let src_strides = strides(&f.dims);
    let mut values = Vec::with_capacity(product(&out_dims));
    let mut idx = vec![0; out_dims.len()];
    loop {
        let lin: usize = idx.iter().zip(&src_strides).map(|(i, s)| (i + width) * s).sum();
        values.push(f.values[lin]);
        if !next_index(&mut idx, &out_dims) {
            break;
        }
    }
    Ok(ScalarField::from_parts(out_dims, f.spacing, values))
}

/// Auxiliary extension used for interpolation and inpainting: `f` on `K`,
/// `interior_fill` on the rest of the box, and `min_K f` or `max_K f` on a
/// one-cell frame around the box.
pub fn extend_masked(
    f: &ScalarField,
    known: &BinaryMask,
    interior_fill: f64,
    frame: MaskedFrame,
) -> Result<ScalarField> {
    ensure_same_dims(&f.dims, &known.dims)?;
    if !interior_fill.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "interior fill {interior_fill} is not finite"
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&v, &k) in f.values.iter().zip(&known.bits) {
        if k {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return Err(Error::EmptyMask);
    }
    let inner: Vec<f64> = f
        .values
        .iter()
        .zip(&known.bits)
        .map(|(&v, &k)| if k { v } else { interior_fill })
        .collect();
    let inner = ScalarField::from_parts(f.dims.clone(), f.spacing, inner);
    let frame_value = match frame {
        MaskedFrame::MinK => lo,
        MaskedFrame::MaxK => hi,
    };
    Ok(pad_with(&inner, 1, frame_value))
}

/// Squared diameter of the grid box in physical units.
pub(crate) fn diameter_sq(dims: &[usize], spacing: f64) -> f64 {
    dims.iter()
        .map(|&d| {
            let l = (d.saturating_sub(1)) as f64 * spacing;
            l * l
        })
        .sum()
}

/// Smallest admissible sentinel for `lambda * i_C` on this grid.
pub fn min_indicator_sentinel(dims: &[usize], spacing: f64, lambda: f64) -> f64 {
    lambda * diameter_sq(dims, spacing)
}

/// Finite stand-in for `+inf` outside a set: exceeds every quadratic gain
/// reachable on a grid of these dims, so minimizers never select it.
pub fn default_sentinel(max_value: f64, dims: &[usize], spacing: f64, lambda: f64) -> f64 {
    let span = spacing * dims.iter().sum::<usize>() as f64;
    max_value + lambda * span * span + 1.0
}

/// `lambda * i_C`: zero on `C`, `sentinel` elsewhere.
pub fn indicator_field(set: &BinaryMask, lambda: f64, spacing: f64, sentinel: Option<f64>) -> Result<ScalarField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !set.any() {
        return Err(Error::EmptyMask);
    }
    let sentinel = sentinel.unwrap_or_else(|| default_sentinel(0.0, &set.dims, spacing, lambda));
    let floor = min_indicator_sentinel(&set.dims, spacing, lambda);
    if !(sentinel.is_finite() && sentinel >= floor) {
        return Err(Error::InvalidParameter(format!(
            "sentinel {sentinel} is below the reachable quadratic gain {floor}"
        )));
    }
    ScalarField::new(
        set.dims.clone(),
        spacing,
        set.bits.iter().map(|&b| if b { 0.0 } else { sentinel }).collect(),
    )
}

/// `chi_K`: one on `K`, zero elsewhere.
pub fn characteristic_field(set: &BinaryMask, spacing: f64) -> Result<ScalarField> {
    ScalarField::new(
        set.dims.clone(),
        spacing,
        set.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    )
}
