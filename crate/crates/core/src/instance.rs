//! DC problem abstraction.
//!
//! A DC instance minimizes `f(x) = g(x) - h(x)` with `g` strongly convex and
//! `h` convex with a Lipschitz gradient. Strong convexity is measured without
//! the customary one-half factor:
//!
//! ```text
//! g(y) >= g(x) + grad g(x)^T (y - x) + mu * |y - x|^2
//! ```
//!
//! so `g(x) = x^2 / 2` has `mu = 1/2`.

use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{DcError, Result};

/// A point of `R^n` with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(DcError::InvalidArgument(
                "point must have at least one coordinate".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(DcError::NonFinite(coords));
        }
        Ok(Point(coords))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = DcError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

/// Per-coordinate box `[lower, upper]` on which an instance is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
}

impl Domain {
    pub const REALS: Domain = Domain {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&c| c >= self.lower && c <= self.upper)
    }

    /// True when `[x - margin, x + margin]` stays inside the box coordinatewise.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.iter()
            .all(|&c| c - margin >= self.lower && c + margin <= self.upper)
    }
}

/// Value and gradient oracles of a DC decomposition plus the constants the
/// rate analysis needs.
///
/// Oracles must be pure functions of the point. They are not required to
/// behave sensibly outside [`DcInstance::domain`]; use [`f_value`] and
/// [`f_grad`] for checked evaluation.
pub trait DcInstance: Send + Sync {
    fn dim(&self) -> usize;

    fn g_value(&self, x: &[f64]) -> f64;
    fn g_grad(&self, x: &[f64]) -> Vec<f64>;
    fn h_value(&self, x: &[f64]) -> f64;
    fn h_grad(&self, x: &[f64]) -> Vec<f64>;

    /// Strong-convexity constant of `g` (no one-half factor).
    fn mu(&self) -> f64;

    /// Lipschitz constant of `grad h`.
    fn lipschitz_h(&self) -> f64;

    /// Lipschitz constant of `grad g`, when known.
    fn lipschitz_g(&self) -> Option<f64> {
        None
    }

    fn f_low(&self) -> Option<f64> {
        None
    }

    fn domain(&self) -> Domain {
        Domain::REALS
    }

    /// Closed-form solution of `grad g(x) = target`, when available.
    fn inverse_g_grad(&self, _target: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `grad f = grad g - grad h`. Instances may override with a formula that
    /// avoids cancellation.
    fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        sub(&self.g_grad(x), &self.h_grad(x))
    }
}

pub(crate) fn check_point<I: DcInstance + ?Sized>(inst: &I, x: &[f64]) -> Result<()> {
    if x.len() != inst.dim() {
        return Err(DcError::DimensionMismatch {
            expected: inst.dim(),
            got: x.len(),
        });
    }
    let dom = inst.domain();
    if !dom.contains(x) {
        return Err(DcError::OutOfDomain {
            x: x.to_vec(),
            lower: dom.lower,
            upper: dom.upper,
        });
    }
    Ok(())
}

pub fn f_value<I: DcInstance + ?Sized>(inst: &I, x: &[f64]) -> Result<f64> {
    check_point(inst, x)?;
    Ok(inst.g_value(x) - inst.h_value(x))
}

pub fn f_grad<I: DcInstance + ?Sized>(inst: &I, x: &[f64]) -> Result<Vec<f64>> {
    check_point(inst, x)?;
    Ok(inst.grad_f(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    /// `max_i |fd_i - grad_i| / max(1, |grad_i|)`.
    pub max_rel_error: f64,
}

/// Compares `f_grad` with central differences of `f_value`.
///
/// The relative error is floored at an absolute scale of one so that
/// coordinates where the gradient vanishes do not blow up the ratio.
pub fn finite_diff_check<I: DcInstance + ?Sized>(
    inst: &I,
    x: &[f64],
    step: f64,
) -> Result<FdReport> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(DcError::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    check_point(inst, x)?;
    let dom = inst.domain();
    if !dom.contains_with_margin(x, step) {
        return Err(DcError::InvalidArgument(format!(
            "point {x:?} is closer than {step} to the domain boundary"
        )));
    }
    let grad = f_grad(inst, x)?;
    let mut probe = x.to_vec();
    let mut max_rel_error = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = f_value(inst, &probe)?;
        probe[i] = x[i] - step;
        let down = f_value(inst, &probe)?;
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * step);
        let err = (fd - grad[i]).abs() / grad[i].abs().max(1.0);
        max_rel_error = max_rel_error.max(err);
    }
    Ok(FdReport { max_rel_error })
}

/// Smoke-test instance with `g = |x|^2` and `h = |x|^2 / 2 + b^T x`, so that
/// `f = |x|^2 / 2 - b^T x` is minimized at `x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticDc {
    b: Vec<f64>,
}

impl QuadraticDc {
    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

pub fn make_quadratic_dc(b: &Point) -> QuadraticDc {
    QuadraticDc { b: b.to_vec() }
}

impl DcInstance for QuadraticDc {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn g_value(&self, x: &[f64]) -> f64 {
        dot(x, x)
    }

    fn g_grad(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| 2.0 * v).collect()
    }

    fn h_value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, x) + dot(&self.b, x)
    }

    fn h_grad(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.b).map(|(v, b)| v + b).collect()
    }

    fn mu(&self) -> f64 {
        1.0
    }

    fn lipschitz_h(&self) -> f64 {
        1.0
    }

    fn lipschitz_g(&self) -> Option<f64> {
        Some(2.0)
    }

    fn f_low(&self) -> Option<f64> {
        Some(-0.5 * dot(&self.b, &self.b))
    }

    fn inverse_g_grad(&self, target: &[f64]) -> Option<Vec<f64>> {
        Some(target.iter().map(|t| 0.5 * t).collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
