//! Closed-form transforms of the two prototype problems (a 1D piecewise affine
//! double well and a 2D radial squared distance), error norms, and a priori
//! discretization bounds.

use crate::error::{Error, Result};
use crate::grid_field::{BinaryMask, ScalarField};

/// `min(|x - 1|, |x + 1|)`.
pub fn double_well(x: f64) -> f64 {
    (x - 1.0).abs().min((x + 1.0).abs())
}

fn require_lambda(lambda: f64, min: f64) -> Result<()> {
    if !(lambda >= min && lambda.is_finite()) {
        return Err(Error::OracleDomain(format!(
            "closed form requires lambda >= {min}, got {lambda}"
        )));
    }
    Ok(())
}

/// Local lower transform of the double well on `[-2, 2]` with the `inf f`
/// boundary extension, valid for `lambda >= 1`.
pub fn lower_transform_1d_exact(x: f64, lambda: f64) -> Result<f64> {
    require_lambda(lambda, 1.0)?;
    let ax = x.abs();
    if ax > 2.0 {
        return Err(Error::OracleDomain(format!("|x| = {ax} lies outside [-2, 2]")));
    }
    let sl = lambda.sqrt();
    let x1 = 2.0 - sl / lambda;
    let x2 = 1.0 / (2.0 * lambda);
    let a = |t: f64| -lambda * t * t + (2.0 * lambda - 2.0 * sl + 1.0) * t - lambda + 2.0 * sl - 1.0;
    // first matching branch wins; the pieces agree on their seams
    let v = if (ax - (2.0 + x1) / 2.0).abs() <= (2.0 - x1) / 2.0 {
        a(ax - 1.0)
    } else if (ax - (x1 + x2) / 2.0).abs() <= (x1 - x2) / 2.0 {
        double_well(x)
    } else if ax <= x2 {
        1.0 - 1.0 / (4.0 * lambda) - lambda * x * x
    } else {
        0.0
    };
    Ok(v)
}

/// Lower transform of the double well extended by `+inf` outside `(-2, 2)`,
/// valid for `lambda >= 1/2`.
pub fn lower_transform_1d_inf_exact(x: f64, lambda: f64) -> Result<f64> {
    require_lambda(lambda, 0.5)?;
    if x.abs() > 2.0 {
        return Err(Error::OracleDomain(format!("|x| = {} lies outside [-2, 2]", x.abs())));
    }
    if x.abs() <= 1.0 / (2.0 * lambda) {
        Ok(1.0 - 1.0 / (4.0 * lambda) - lambda * x * x)
    } else {
        Ok(double_well(x))
    }
}

/// `dist^2(p, unit circle) = (|p| - 1)^2`.
pub fn radial_sqdist(p: [f64; 2]) -> f64 {
    let r = p[0].hypot(p[1]);
    (r - 1.0) * (r - 1.0)
}

/// Local lower transform of the radial squared distance on the disk of
/// radius 2 with the `inf f = 0` extension, as a function of `r = |x|`.
/// Valid for `lambda >= 1`.
pub fn lower_transform_2d_exact(r: f64, lambda: f64) -> Result<f64> {
    require_lambda(lambda, 1.0)?;
    if r < 0.0 {
        return Err(Error::OracleDomain(format!("radius {r} is negative")));
    }
    let s = (1.0 + lambda).sqrt();
    let xp = 2.0 - 1.0 / s;
    let xs = 1.0 / (1.0 + lambda);
    let m = 2.0 * (1.0 + 2.0 * lambda) - 2.0 * s;
    let v = if r > 2.0 {
        0.0
    } else if (r - (2.0 + xp) / 2.0).abs() <= (2.0 - xp) / 2.0 {
        -(m * (r - 2.0)).abs() + 4.0 * lambda - lambda * r * r
    } else if (r - (xs + xp) / 2.0).abs() <= (xp - xs) / 2.0 {
        (r - 1.0) * (r - 1.0)
    } else {
        lambda / (1.0 + lambda) - lambda * r * r
    };
    Ok(v)
}

/// Lower transform of the radial squared distance extended by `+inf` outside
/// the open disk of radius 2.
pub fn lower_transform_2d_inf_exact(r: f64, lambda: f64) -> Result<f64> {
    require_lambda(lambda, f64::MIN_POSITIVE)?;
    if !(0.0..2.0).contains(&r) {
        return Err(Error::OracleDomain(format!("radius {r} lies outside [0, 2)")));
    }
    let xs = 1.0 / (1.0 + lambda);
    if r <= xs {
        Ok(lambda / (1.0 + lambda) - lambda * r * r)
    } else {
        Ok((r - 1.0) * (r - 1.0))
    }
}

type Evaluator = Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// A closed-form reference surface over an axis-aligned box.
pub struct OracleCurve {
    evaluator: Evaluator,
    /// `(lo, hi)` per axis.
    pub valid_region: Vec<(f64, f64)>,
    pub lambda: f64,
}

impl std::fmt::Debug for OracleCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleCurve")
            .field("valid_region", &self.valid_region)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

impl OracleCurve {
    pub fn new(
        valid_region: Vec<(f64, f64)>,
        lambda: f64,
        evaluator: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            evaluator: Box::new(evaluator),
            valid_region,
            lambda,
        }
    }

    pub fn double_well_local(lambda: f64) -> Result<Self> {
        require_lambda(lambda, 1.0)?;
        Ok(Self::new(vec![(-2.0, 2.0)], lambda, move |x| {
            lower_transform_1d_exact(x[0], lambda)
        }))
    }

    pub fn double_well_inf(lambda: f64) -> Result<Self> {
        require_lambda(lambda, 0.5)?;
        Ok(Self::new(vec![(-2.0, 2.0)], lambda, move |x| {
            lower_transform_1d_inf_exact(x[0], lambda)
        }))
    }

    /// The local radial transform is defined on the whole plane (zero outside
    /// the disk); `half_width` sets the reported box.
    pub fn radial_local(lambda: f64, half_width: f64) -> Result<Self> {
        require_lambda(lambda, 1.0)?;
        Ok(Self::new(vec![(-half_width, half_width); 2], lambda, move |p| {
            lower_transform_2d_exact(p[0].hypot(p[1]), lambda)
        }))
    }

    pub fn radial_inf(lambda: f64) -> Result<Self> {
        require_lambda(lambda, f64::MIN_POSITIVE)?;
        Ok(Self::new(vec![(-2.0, 2.0); 2], lambda, move |p| {
            lower_transform_2d_inf_exact(p[0].hypot(p[1]), lambda)
        }))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        (self.evaluator)(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.valid_region.len()
            && x.iter()
                .zip(&self.valid_region)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }
}

/// Physical coordinates of a grid cell whose index-0 corner sits at `origin`.
pub fn grid_point(origin: &[f64], spacing: f64, idx: &[usize]) -> Vec<f64> {
    origin.iter().zip(idx).map(|(o, &i)| o + i as f64 * spacing).collect()
}

/// `max |a - b|` over the cells selected by `mask` (all cells when `None`).
pub fn linf_error(a: &ScalarField, b: &ScalarField, mask: Option<&BinaryMask>) -> Result<f64> {
    crate::grid_field::ensure_same_dims(a.dims(), b.dims())?;
    if let Some(m) = mask {
        crate::grid_field::ensure_same_dims(a.dims(), m.dims())?;
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .enumerate()
        .filter(|(i, _)| mask.is_none_or(|m| m.bits()[*i]))
        .map(|(_, (x, y))| (x - y).abs())
        .fold(0.0, f64::max))
}

/// `max |a - oracle|` over the masked cells, with `a` sampled on a grid whose
/// index-0 corner is at `origin`.
pub fn linf_error_oracle(
    a: &ScalarField,
    origin: &[f64],
    oracle: &OracleCurve,
    mask: Option<&BinaryMask>,
) -> Result<f64> {
    if origin.len() != a.ndim() {
        return Err(Error::InvalidParameter(format!(
            "origin has {} coordinates for a {}-D field",
            origin.len(),
            a.ndim()
        )));
    }
    if let Some(m) = mask {
        crate::grid_field::ensure_same_dims(a.dims(), m.dims())?;
    }
    let mut worst = 0.0f64;
    for (lin, &v) in a.values().iter().enumerate() {
        if mask.is_some_and(|m| !m.bits()[lin]) {
            continue;
        }
        let x = grid_point(origin, a.spacing(), &a.multi_index(lin));
        worst = worst.max((v - oracle.eval(&x)?).abs());
    }
    Ok(worst)
}

/// Pointwise bound on `|discrete envelope - envelope|` for an `L`-Lipschitz
/// function: `(2 + sqrt(n)) L h + 2 lambda h^2 n`.
pub fn error_bound_lipschitz(l: f64, h: f64, lambda: f64, n: usize) -> f64 {
    let n = n as f64;
    (2.0 + n.sqrt()) * l * h + 2.0 * lambda * h * h * n
}

/// Pointwise bound for a function whose modulus of continuity satisfies
/// `omega(t) <= a t + b`:
/// `omega(h sqrt(n)) + 2 lambda h^2 n + 2 h sqrt(lambda) sqrt(omega(a / lambda + sqrt(b / lambda)))`.
pub fn error_bound_modulus(a: f64, b: f64, h: f64, lambda: f64, n: usize, omega: impl Fn(f64) -> f64) -> f64 {
    let nf = n as f64;
    let d = omega(a / lambda + (b / lambda).sqrt()).sqrt();
    omega(h * nf.sqrt()) + 2.0 * lambda * h * h * nf + 2.0 * h * lambda.sqrt() * d
}
