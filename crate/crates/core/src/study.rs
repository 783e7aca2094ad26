//! Convergence studies against the closed-form prototypes: iteration counts
//! and ℓ∞ errors per grid size, transform module and scheme.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::convex_baseline::{local_lower_transform_convex, lower_transform_convex, BaselineParams};
use crate::error::{Error, Result};
use crate::grid_field::{BinaryMask, ScalarField};
use crate::moreau::{EnvelopeParams, StopRule, DEFAULT_TOLERANCE};
use crate::oracles::{double_well, linf_error_oracle, radial_sqdist, OracleCurve};
use crate::transforms::{global_transform_on_padded, local_lower_transform, lower_transform, TransformResult};

/// Which prototype to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyOracle {
    /// Double well on `[-2, 2]`, local lower transform with the min frame.
    Ex1d,
    /// Radial squared distance on `[-2.5, 2.5]^2`, zero outside the disk of
    /// radius 2, local lower transform.
    Ex2d,
    /// Double well with `M` on an extension of width `a`, global transform.
    Ex1dInf,
    /// Radial field with `M` outside the disk on `[-2-a, 2+a]^2`, global
    /// transform, error on the open disk.
    Ex2dInf,
}

impl std::str::FromStr for StudyOracle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex1d" => Ok(Self::Ex1d),
            "ex2d" => Ok(Self::Ex2d),
            "ex1d_inf" | "ex1d-inf" => Ok(Self::Ex1dInf),
            "ex2d_inf" | "ex2d-inf" => Ok(Self::Ex2dInf),
            _ => Err(Error::Parse(format!("unknown oracle {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Moreau,
    Convex,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Moreau => "moreau",
            Scheme::Convex => "convex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub oracle: StudyOracle,
    pub spacings: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub tol: f64,
    /// Extension width for the `*_inf` oracles, in physical units.
    pub pad_a: f64,
    /// Stand-in for `+inf` in the `*_inf` oracles.
    pub big_m: f64,
    /// Budget per convex row; an unfinished row reports `-`.
    pub convex_time_limit: Option<Duration>,
}

impl StudyConfig {
    pub fn new(oracle: StudyOracle, spacings: Vec<f64>, lambdas: Vec<f64>) -> Self {
        Self {
            oracle,
            spacings,
            lambdas,
            schemes: vec![Scheme::Moreau],
            tol: DEFAULT_TOLERANCE,
            pad_a: 1.0,
            big_m: 1e3,
            convex_time_limit: Some(Duration::from_secs(300)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spacings.is_empty() || self.lambdas.is_empty() || self.schemes.is_empty() {
            return Err(Error::InvalidParameter(
                "study needs at least one h, lambda and scheme".into(),
            ));
        }
        if let Some(h) = self.spacings.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidSpacing(*h));
        }
        if !(self.pad_a >= 0.0 && self.big_m.is_finite()) {
            return Err(Error::InvalidParameter("pad width must be >= 0 and M finite".into()));
        }
        Ok(())
    }
}

/// One table row; `m` and `linf_error` are `None` when the run did not finish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    pub lambda: f64,
    pub scheme: Scheme,
    pub m: Option<usize>,
    pub linf_error: Option<f64>,
    pub seconds: f64,
}

fn cells(length: f64, h: f64) -> Result<usize> {
    let n = (length / h).round();
    if n < 2.0 || ((n * h) - length).abs() > 1e-9 * length.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "spacing {h} does not divide the interval length {length}"
        )));
    }
    Ok(n as usize + 1)
}

struct Problem {
    field: ScalarField,
    origin: Vec<f64>,
    oracle: OracleCurve,
    mask: Option<BinaryMask>,
    /// Cells of `M` added around `field` before a global transform; `None`
    /// selects the local transform.
    pad: Option<usize>,
}

fn problem(cfg: &StudyConfig, h: f64, lambda: f64) -> Result<Problem> {
    match cfg.oracle {
        StudyOracle::Ex1d => {
            let n = cells(4.0, h)?;
            Ok(Problem {
                field: ScalarField::from_fn(&[n], h, |i| double_well(-2.0 + i[0] as f64 * h))?,
                origin: vec![-2.0],
                oracle: OracleCurve::double_well_local(lambda)?,
                mask: None,
                pad: None,
            })
        }
        StudyOracle::Ex2d => {
            let n = cells(5.0, h)?;
            let field = ScalarField::from_fn(&[n, n], h, |i| {
                let p = [-2.5 + i[0] as f64 * h, -2.5 + i[1] as f64 * h];
                if p[0].hypot(p[1]) <= 2.0 {
                    radial_sqdist(p)
                } else {
                    0.0
                }
            })?;
            Ok(Problem {
                field,
                origin: vec![-2.5, -2.5],
                oracle: OracleCurve::radial_local(lambda, 2.5)?,
                mask: None,
                pad: None,
            })
        }
        StudyOracle::Ex1dInf => {
            let n = cells(4.0, h)?;
            let pad = (cfg.pad_a / h).round() as usize;
            Ok(Problem {
                field: ScalarField::from_fn(&[n], h, |i| double_well(-2.0 + i[0] as f64 * h))?,
                origin: vec![-2.0],
                oracle: OracleCurve::double_well_inf(lambda)?,
                mask: None,
                pad: Some(pad),
            })
        }
        StudyOracle::Ex2dInf => {
            let half = 2.0 + cfg.pad_a;
            let n = cells(2.0 * half, h)?;
            let at = |i: &[usize]| [-half + i[0] as f64 * h, -half + i[1] as f64 * h];
            let field = ScalarField::from_fn(&[n, n], h, |i| {
                let p = at(i);
                if p[0].hypot(p[1]) <= 2.0 {
                    radial_sqdist(p)
                } else {
                    cfg.big_m
                }
            })?;
            let mask = BinaryMask::from_fn(&[n, n], |i| {
                let p = at(i);
                p[0].hypot(p[1]) < 2.0
            })?;
            Ok(Problem {
                field,
                origin: vec![-half, -half],
                oracle: OracleCurve::radial_inf(lambda)?,
                mask: Some(mask),
                pad: Some(0),
            })
        }
    }
}

fn run_scheme(cfg: &StudyConfig, pr: &Problem, lambda: f64, scheme: Scheme) -> Result<TransformResult> {
    match scheme {
        Scheme::Moreau => {
            let p = EnvelopeParams::new(lambda).with_stop(StopRule::Tolerance(cfg.tol));
            match pr.pad {
                None => local_lower_transform(&pr.field, &p),
                Some(0) => lower_transform(&pr.field, &p),
                Some(w) => global_transform_on_padded(&pr.field, w, cfg.big_m, &p),
            }
        }
        Scheme::Convex => {
            let bp = BaselineParams::default()
                .with_tol(cfg.tol)
                .with_time_limit(cfg.convex_time_limit);
            match pr.pad {
                None => local_lower_transform_convex(&pr.field, lambda, &bp),
                Some(w) => {
                    let padded = crate::grid_field::pad_with(&pr.field, w, cfg.big_m);
                    let mut r = lower_transform_convex(&padded, lambda, &bp)?;
                    r.field = crate::grid_field::crop(&r.field, w)?;
                    Ok(r)
                }
            }
        }
    }
}

/// Runs one `(h, lambda, scheme)` cell of the table.
pub fn run_case(cfg: &StudyConfig, h: f64, lambda: f64, scheme: Scheme) -> Result<StudyRow> {
    let pr = problem(cfg, h, lambda)?;
    let start = Instant::now();
    let r = run_scheme(cfg, &pr, lambda, scheme)?;
    let seconds = start.elapsed().as_secs_f64();
    let (m, linf_error) = if r.converged() {
        let e = linf_error_oracle(r.field(), &pr.origin, &pr.oracle, pr.mask.as_ref())?;
        (Some(r.total_iterations), Some(e))
    } else {
        (None, None)
    };
    Ok(StudyRow {
        h,
        lambda,
        scheme,
        m,
        linf_error,
        seconds,
    })
}

/// Every combination of the configured grid sizes, modules and schemes, in
/// that nesting order.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &h in &cfg.spacings {
        for &lambda in &cfg.lambdas {
            for &scheme in &cfg.schemes {
                rows.push(run_case(cfg, h, lambda, scheme)?);
            }
        }
    }
    Ok(rows)
}

pub const STUDY_CSV_HEADER: &str = "h,lambda,scheme,m,linf_error";

/// `h,lambda,scheme,m,linf_error` rows, with `-` for unfinished runs.
pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from(STUDY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let m = r.m.map_or("-".to_string(), |m| m.to_string());
        let e = r.linf_error.map_or("-".to_string(), |e| e.to_string());
        let _ = writeln!(out, "{},{},{},{m},{e}", r.h, r.lambda, r.scheme.name());
    }
    out
}
