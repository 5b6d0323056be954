//! Slow-convergence instance for DCA.
//!
//! With `g(x) = x^2 / 2` and a convex piecewise-quadratic `h` whose gradient
//! at the knot `x_k` is pinned to the next knot `x_{k+1}`, DCA started at zero
//! walks the knots one by one and
//!
//! ```text
//! |f'(x_k)| = x_k - x_{k+1} = (k + 1)^-(1/2 + delta).
//! ```
//!
//! Knots are generated by `x_{k+1} = x_k - (k + 1)^-(1/2 + delta)` from
//! `x_0 = 0`. On `[x_{k+1}, x_k]` the function `h` is the quadratic expanded
//! from the right knot `x_k` with curvature
//! `c_k = ((k + 1) / (k + 2))^(1/2 + delta)`, and for `x > 0` it continues as
//! the tangent line `h(x) = -x`.
//!
//! The construction is truncated at a horizon `K`: the instance is defined on
//! `[x_{K+1}, +inf)` and evaluating below that is an error.

use std::io::Write;

use crate::error::{DcError, Result};
use crate::instance::{DcInstance, Domain};
use crate::zeta::zeta;

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialInstance {
    delta: f64,
    horizon: usize,
    /// `x_0 .. x_{K+2}`.
    knots: Vec<f64>,
    /// `h'(x_k) = x_{k+1}` for `k = 0 ..= K+1`.
    grad_at_knots: Vec<f64>,
    /// `h(x_k)` for `k = 0 ..= K+1`.
    h_at_knots: Vec<f64>,
    /// Curvature on `[x_{k+1}, x_k]` for `k = 0 ..= K`.
    curvatures: Vec<f64>,
    /// `s_k = x_k - x_{k+1}` for `k = 0 ..= K+1`.
    steps: Vec<f64>,
    f_low: f64,
}

/// One row of the exported knot table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotRow {
    pub k: usize,
    pub x: f64,
    pub h: f64,
    pub grad: f64,
    pub curvature: f64,
}

/// `(k + 1)^-(1/2 + delta)`, the exact gradient norm of the k-th iterate.
pub fn theoretical_grad_norm(delta: f64, k: usize) -> f64 {
    ((k + 1) as f64).powf(-(0.5 + delta))
}

/// The lower bound `-zeta(1 + 2 delta) - 2` on `f`.
pub fn zeta_lower_bound(delta: f64) -> f64 {
    -zeta(1.0 + 2.0 * delta) - 2.0
}

pub fn build_adversarial(delta: f64, horizon: usize) -> Result<AdversarialInstance> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(DcError::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if horizon == 0 {
        return Err(DcError::InvalidArgument(
            "horizon must be at least 1".into(),
        ));
    }
    let exponent = 0.5 + delta;

    let steps: Vec<f64> = (0..horizon + 2)
        .map(|k| theoretical_grad_norm(delta, k))
        .collect();
    let mut knots = Vec::with_capacity(horizon + 3);
    knots.push(0.0);
    for (k, step) in steps.iter().enumerate() {
        knots.push(knots[k] - step);
    }

    let grad_at_knots: Vec<f64> = knots[1..].to_vec();

    let curvatures: Vec<f64> = (0..=horizon)
        .map(|k| ((k + 1) as f64 / (k + 2) as f64).powf(exponent))
        .collect();

    // h(x_{k+1}) = h(x_k) - x_{k+1} s_k + s_k^2 c_k / 2 with s_k = x_k - x_{k+1}.
    let mut h_at_knots = Vec::with_capacity(horizon + 2);
    h_at_knots.push(0.0);
    for k in 0..=horizon {
        let step = steps[k];
        let next = h_at_knots[k] - knots[k + 1] * step + 0.5 * step * step * curvatures[k];
        h_at_knots.push(next);
    }

    Ok(AdversarialInstance {
        delta,
        horizon,
        knots,
        grad_at_knots,
        h_at_knots,
        curvatures,
        steps,
        f_low: zeta_lower_bound(delta),
    })
}

impl AdversarialInstance {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Knot `x_k` for `k = 0 ..= K+2`.
    pub fn knot(&self, k: usize) -> f64 {
        self.knots[k]
    }

    /// Knots `x_0 .. x_{K+1}`, i.e. those inside the domain.
    pub fn knots(&self) -> &[f64] {
        &self.knots[..=self.horizon + 1]
    }

    pub fn grad_at_knots(&self) -> &[f64] {
        &self.grad_at_knots
    }

    pub fn h_at_knots(&self) -> &[f64] {
        &self.h_at_knots
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    /// Left end `x_{K+1}` of the domain.
    pub fn last_knot(&self) -> f64 {
        self.knots[self.horizon + 1]
    }

    /// Value and derivative of `h` at `x`.
    ///
    /// Knots are returned exactly from the precomputed tables. Elsewhere the
    /// enclosing interval is found by binary search.
    pub fn adv_h_eval(&self, x: f64) -> Result<(f64, f64)> {
        if x.is_nan() {
            return Err(DcError::NonFinite(vec![x]));
        }
        if x > 0.0 {
            return Ok((-x, -1.0));
        }
        // knots are strictly decreasing; j = #{i : knots[i] > x}.
        let j = self.knots().partition_point(|&knot| knot > x);
        if j > self.horizon + 1 {
            return Err(DcError::HorizonExceeded {
                x,
                last_knot: self.last_knot(),
            });
        }
        if self.knots[j] == x {
            return Ok((self.h_at_knots[j], self.grad_at_knots[j]));
        }
        let k = j - 1;
        let d = x - self.knots[k];
        let c = self.curvatures[k];
        let grad = self.grad_at_knots[k] + c * d;
        let value = self.h_at_knots[k] + self.grad_at_knots[k] * d + 0.5 * c * d * d;
        Ok((value, grad))
    }

    /// `f'(x)`, written as `s_k + (1 - c_k)(x - x_k)` on `[x_{k+1}, x_k]` so
    /// that small gradients far from the origin keep full relative accuracy.
    pub fn adv_f_grad(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(DcError::NonFinite(vec![x]));
        }
        if x > 0.0 {
            return Ok(x + 1.0);
        }
        let j = self.knots().partition_point(|&knot| knot > x);
        if j > self.horizon + 1 {
            return Err(DcError::HorizonExceeded {
                x,
                last_knot: self.last_knot(),
            });
        }
        if self.knots[j] == x {
            return Ok(self.steps[j]);
        }
        let k = j - 1;
        Ok(self.steps[k] + (1.0 - self.curvatures[k]) * (x - self.knots[k]))
    }

    /// Left and right limits of `h'` at interior knot `x_k`, `1 <= k <= K`.
    pub fn grad_limits_at_knot(&self, k: usize) -> (f64, f64) {
        assert!(k >= 1 && k <= self.horizon, "knot index {k} not interior");
        let right = self.grad_at_knots[k - 1]
            + self.curvatures[k - 1] * (self.knots[k] - self.knots[k - 1]);
        let left = self.grad_at_knots[k];
        (left, right)
    }

    pub fn knot_table(&self) -> Vec<KnotRow> {
        (0..=self.horizon)
            .map(|k| KnotRow {
                k,
                x: self.knots[k],
                h: self.h_at_knots[k],
                grad: self.grad_at_knots[k],
                curvature: self.curvatures[k],
            })
            .collect()
    }

    /// Writes the knot table as CSV with columns `k,x_k,h_k,grad_k,c_k`.
    pub fn write_knot_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "x_k", "h_k", "grad_k", "c_k"])?;
        for row in self.knot_table() {
            w.write_record([
                row.k.to_string(),
                crate::io::fmt_f64(row.x),
                crate::io::fmt_f64(row.h),
                crate::io::fmt_f64(row.grad),
                crate::io::fmt_f64(row.curvature),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One sample of the three curves for plotting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub x: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

/// Samples `f`, `g` and `h` over `[x_n, 0]`, `samples_per_interval` points
/// per knot interval (left knot included) plus the origin, in increasing `x`.
pub fn figure_data(
    delta: f64,
    n_knots: usize,
    samples_per_interval: usize,
) -> Result<Vec<FigureRow>> {
    if samples_per_interval < 2 {
        return Err(DcError::InvalidArgument(format!(
            "samples_per_interval must be at least 2, got {samples_per_interval}"
        )));
    }
    if n_knots == 0 {
        return Err(DcError::InvalidArgument(
            "n_knots must be at least 1".into(),
        ));
    }
    let inst = build_adversarial(delta, n_knots)?;
    let row = |x: f64| -> Result<FigureRow> {
        let g = 0.5 * x * x;
        let (h, _) = inst.adv_h_eval(x)?;
        Ok(FigureRow { x, f: g - h, g, h })
    };
    let mut rows = Vec::with_capacity(n_knots * samples_per_interval + 1);
    for k in (0..n_knots).rev() {
        let (left, right) = (inst.knot(k + 1), inst.knot(k));
        for j in 0..samples_per_interval {
            let x = if j == 0 {
                left
            } else {
                left + (right - left) * j as f64 / samples_per_interval as f64
            };
            rows.push(row(x)?);
        }
    }
    rows.push(row(0.0)?);
    Ok(rows)
}

impl DcInstance for AdversarialInstance {
    fn dim(&self) -> usize {
        1
    }

    fn g_value(&self, x: &[f64]) -> f64 {
        0.5 * x[0] * x[0]
    }

    fn g_grad(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0]]
    }

    /// NaN below the horizon.
    fn h_value(&self, x: &[f64]) -> f64 {
        self.adv_h_eval(x[0]).map_or(f64::NAN, |(v, _)| v)
    }

    /// NaN below the horizon.
    fn h_grad(&self, x: &[f64]) -> Vec<f64> {
        vec![self.adv_h_eval(x[0]).map_or(f64::NAN, |(_, g)| g)]
    }

    fn mu(&self) -> f64 {
        0.5
    }

    fn lipschitz_h(&self) -> f64 {
        1.0
    }

    fn lipschitz_g(&self) -> Option<f64> {
        Some(1.0)
    }

    fn f_low(&self) -> Option<f64> {
        Some(self.f_low)
    }

    fn domain(&self) -> Domain {
        Domain {
            lower: self.last_knot(),
            upper: f64::INFINITY,
        }
    }

    fn inverse_g_grad(&self, target: &[f64]) -> Option<Vec<f64>> {
        Some(target.to_vec())
    }

    /// NaN below the horizon.
    fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        vec![self.adv_f_grad(x[0]).unwrap_or(f64::NAN)]
    }
}
