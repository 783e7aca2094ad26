//! Pipelines built on the transforms: multiscale medial axis map,
//! intersection extraction, inpainting, salt & pepper corruption and removal,
//! and PSNR scoring.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid_field::{characteristic_field, ensure_same_dims, indicator_field, next_index, BinaryMask, ScalarField};
use crate::moreau::{moreau_lower_iterative, EnvelopeParams, StopRule};
use crate::transforms::{average_transform, default_big_m, local_lower_transform, lower_transform, upper_transform};

/// PSNR values are capped here when compared; an exact match is `+inf`.
pub const PSNR_CAP_DB: f64 = 99.0;

const PEAK: f64 = 255.0;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Squared Euclidean distance to `set`, in physical units.
pub fn squared_distance(set: &BinaryMask, spacing: f64) -> Result<ScalarField> {
    let ind = indicator_field(set, 1.0, spacing, None)?;
    let (d, _) = moreau_lower_iterative(&ind, &EnvelopeParams::new(1.0).with_stop(StopRule::ExactBound))?;
    Ok(d)
}

/// `(1 + lambda) (f - C^l_{lambda,Omega}(f))` for a squared-distance field
/// `f`, using the min-frame local transform. Without the scale factor the map
/// is just the gap `f - C^l(f)`.
pub fn medial_axis_map(
    dist_sq: &ScalarField,
    lambda: f64,
    include_scale_factor: bool,
    p: &EnvelopeParams,
) -> Result<ScalarField> {
    check_lambda(lambda)?;
    if let Some(i) = dist_sq.values().iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "squared distances must be non-negative (cell {i} is {})",
            dist_sq.values()[i]
        )));
    }
    let lower = local_lower_transform(dist_sq, &p.with_lambda(lambda))?;
    let scale = if include_scale_factor { 1.0 + lambda } else { 1.0 };
    // C^l <= f holds exactly; max() only absorbs rounding in the subtraction
    dist_sq.zip_map(lower.field(), |f, c| (scale * (f - c)).max(0.0))
}

/// Medial axis map of the shape `set`, with `f = dist^2(., complement)`.
pub fn medial_axis_of_set(
    set: &BinaryMask,
    spacing: f64,
    lambda: f64,
    include_scale_factor: bool,
    p: &EnvelopeParams,
) -> Result<ScalarField> {
    let background = set.complement();
    let f = if background.any() {
        squared_distance(&background, spacing)?
    } else {
        return Err(Error::InvalidParameter("shape fills the whole grid".into()));
    };
    medial_axis_map(&f, lambda, include_scale_factor, p)
}

/// `{x : f(x) > t}`.
pub fn suplevel_mask(f: &ScalarField, t: f64) -> BinaryMask {
    BinaryMask::new(f.dims().to_vec(), f.values().iter().map(|&v| v > t).collect())
        .expect("dims come from a valid field")
}

/// Intersection extraction filter
/// `|C^u_{4l}(chi) - 2 (C^u_{4l}(chi) - C^l_l(C^u_{l'}(chi)))|`
/// with `l' = lambda`, or `4 lambda` when `inner_uses_4lambda` is set. The
/// transforms act on the raw characteristic function of `set`.
pub fn intersection_filter(
    set: &BinaryMask,
    spacing: f64,
    lambda: f64,
    p: &EnvelopeParams,
    inner_uses_4lambda: bool,
) -> Result<ScalarField> {
    check_lambda(lambda)?;
    let chi = characteristic_field(set, spacing)?;
    let p1 = p.with_lambda(lambda);
    let p4 = p.with_lambda(4.0 * lambda);
    let outer = upper_transform(&chi, &p4)?.into_field();
    let inner = if inner_uses_4lambda {
        outer.clone()
    } else {
        upper_transform(&chi, &p1)?.into_field()
    };
    let lower = lower_transform(&inner, &p1)?.into_field();
    outer.zip_map(&lower, |u, l| (u - 2.0 * (u - l)).abs())
}

/// Cells strictly above `threshold` that are `>=` every in-grid neighbour of
/// the `3^n` stencil.
pub fn local_maxima(f: &ScalarField, threshold: f64) -> BinaryMask {
    let dims = f.dims();
    let n = dims.len();
    let three = vec![3usize; n];
    let mut bits = vec![false; f.len()];
    let mut idx = vec![0usize; n];
    let mut nb = vec![0usize; n];
    loop {
        let v = f.get(&idx);
        if v > threshold {
            let mut is_max = true;
            let mut digit = vec![0usize; n];
            'scan: loop {
                let mut inside = true;
                for a in 0..n {
                    let j = idx[a] as isize + digit[a] as isize - 1;
                    if j < 0 || j >= dims[a] as isize {
                        inside = false;
                        break;
                    }
                    nb[a] = j as usize;
                }
                if inside && f.get(&nb) > v {
                    is_max = false;
                    break 'scan;
                }
                if !next_index(&mut digit, &three) {
                    break;
                }
            }
            bits[f.linear_index(&idx)] = is_max;
        }
        if !next_index(&mut idx, dims) {
            break;
        }
    }
    BinaryMask::new(dims.to_vec(), bits).expect("dims come from a valid field")
}

/// Salt & pepper corruption parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub density: f64,
    pub seed: u64,
    pub low: f64,
    pub high: f64,
}

impl NoiseSpec {
    pub fn new(density: f64, seed: u64) -> Self {
        Self {
            density,
            seed,
            low: 0.0,
            high: PEAK,
        }
    }
}

/// Corrupts each cell independently with probability `density`, setting it
/// to `low` or `high` with equal odds. Returns the noisy field and the mask
/// of cells left intact.
///
/// The stream is Xoshiro256++ seeded by `seed_from_u64(seed)`. Cells are
/// visited in row-major order; each draws `u = (x >> 11) * 2^-53` from one
/// output and is corrupted iff `u < density`, in which case the top bit of the
/// next output picks `low` (0) or `high` (1).
pub fn salt_pepper(f: &ScalarField, spec: &NoiseSpec) -> Result<(ScalarField, BinaryMask)> {
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::InvalidParameter(format!(
            "noise density must lie in [0, 1], got {}",
            spec.density
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let mut values = f.values().to_vec();
    let mut intact = vec![true; values.len()];
    for (v, keep) in values.iter_mut().zip(intact.iter_mut()) {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < spec.density {
            *v = if rng.next_u64() >> 63 == 0 { spec.low } else { spec.high };
            *keep = false;
        }
    }
    Ok((
        ScalarField::new(f.dims().to_vec(), f.spacing(), values)?,
        BinaryMask::new(f.dims().to_vec(), intact)?,
    ))
}

/// `10 log10(255^2 / MSE)`; `+inf` when the fields agree exactly.
pub fn psnr(reference: &ScalarField, candidate: &ScalarField) -> Result<f64> {
    ensure_same_dims(reference.dims(), candidate.dims())?;
    let mse = reference
        .values()
        .iter()
        .zip(candidate.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

/// PSNR clamped to [`PSNR_CAP_DB`] for comparisons.
pub fn psnr_capped(db: f64) -> f64 {
    db.min(PSNR_CAP_DB)
}

/// Renders a PSNR for CSV/text output: `inf` for an exact match.
pub fn format_psnr(db: f64) -> String {
    if db.is_infinite() {
        "inf".into()
    } else {
        format!("{db:.3}")
    }
}

mod psnr_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("bad PSNR value {t:?}"))),
        }
    }
}

/// Outcome of an inpainting or denoising run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationReport {
    pub lambda: f64,
    pub big_m: f64,
    /// Sweeps summed over the four envelope passes.
    pub iterations: usize,
    pub per_pass_iterations: Vec<usize>,
    pub converged: bool,
    /// PSNR of the damaged input against the clean reference, when known.
    #[serde(with = "psnr_serde", default)]
    pub psnr_noisy: Option<f64>,
    #[serde(with = "psnr_serde", default)]
    pub psnr_restored: Option<f64>,
}

impl RestorationReport {
    /// Fills in both PSNR values against `clean`.
    pub fn score(&mut self, clean: &ScalarField, damaged: &ScalarField, restored: &ScalarField) -> Result<()> {
        self.psnr_noisy = Some(psnr(clean, damaged)?);
        self.psnr_restored = Some(psnr(clean, restored)?);
        Ok(())
    }
}

/// Restores `f` off `known` with the average transform and keeps the known
/// samples verbatim. `big_m` defaults to [`default_big_m`].
pub fn inpaint(
    f: &ScalarField,
    known: &BinaryMask,
    lambda: f64,
    big_m: Option<f64>,
    p: &EnvelopeParams,
) -> Result<(ScalarField, RestorationReport)> {
    check_lambda(lambda)?;
    ensure_same_dims(f.dims(), known.dims())?;
    if !known.any() {
        return Err(Error::EmptyMask);
    }
    let p = p.with_lambda(lambda);
    let m = match big_m {
        Some(m) => m,
        None => default_big_m(f, known, lambda)?,
    };
    let avg = average_transform(f, known, Some(m), &p)?;
    let values = f
        .values()
        .iter()
        .zip(avg.field().values())
        .zip(known.bits())
        .map(|((&v, &a), &k)| if k { v } else { a })
        .collect();
    let restored = ScalarField::new(f.dims().to_vec(), f.spacing(), values)?;
    let report = RestorationReport {
        lambda,
        big_m: m,
        iterations: avg.total_iterations,
        per_pass_iterations: avg.per_pass.iter().map(|r| r.iterations).collect(),
        converged: avg.converged(),
        psnr_noisy: None,
        psnr_restored: None,
    };
    Ok((restored, report))
}

/// Salt & pepper removal: the corrupted cells are the damaged set. The
/// one-pixel `min_K` / `max_K` padding of the image is the frame the average
/// transform already adds, so this is [`inpaint`] under another name.
pub fn denoise(
    noisy: &ScalarField,
    known: &BinaryMask,
    lambda: f64,
    big_m: Option<f64>,
    p: &EnvelopeParams,
) -> Result<(ScalarField, RestorationReport)> {
    inpaint(noisy, known, lambda, big_m, p)
}

/// A deterministic 8-bit test image: smooth shading, a bright disk, a dark
/// bar and a band of stripes.
pub fn synthetic_image(size: usize) -> Result<ScalarField> {
    if size < 8 {
        return Err(Error::DegenerateDims {
            extent: size,
            reason: "synthetic image needs at least 8 pixels per side",
        });
    }
    let s = size as f64;
    ScalarField::from_fn(&[size, size], 1.0, |i| {
        let (y, x) = (i[0] as f64 / s, i[1] as f64 / s);
        let mut v = 60.0 + 90.0 * x + 40.0 * (3.0 * y).sin();
        if (x - 0.62).hypot(y - 0.38) < 0.2 {
            v = 220.0;
        }
        if (0.15..0.3).contains(&x) && (0.5..0.9).contains(&y) {
            v = 25.0;
        }
        if y > 0.85 && (i[1] / 4) % 2 == 0 {
            v = 180.0;
        }
        v.round().clamp(0.0, PEAK)
    })
}
