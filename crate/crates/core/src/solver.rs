//! The DC algorithm.
//!
//! Each step solves `grad g(x_{k+1}) = grad h(x_k)`, i.e. minimizes the convex
//! model `g(x) - grad h(x_k)^T (x - x_k)`. Instances that expose a closed-form
//! inverse of `grad g` are stepped exactly; otherwise the subproblem is solved
//! by gradient descent to the residual tolerance `subproblem_tol`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{DcError, Result};
use crate::instance::{check_point, dist, f_grad, norm, sub, DcInstance, Point};

/// Relative slack of the termination test `|grad f(x_k)| <= epsilon`.
///
/// Gradient norms that equal the tolerance in exact arithmetic can land a few
/// ulps above it.
pub const TERMINATION_REL_SLACK: f64 = 1e-12;

/// The termination test shared by every method.
pub fn meets_tolerance(grad_norm: f64, epsilon: f64) -> bool {
    grad_norm <= epsilon * (1.0 + TERMINATION_REL_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Gradient-norm tolerance of the termination test.
    pub epsilon: f64,
    pub max_iter: usize,
    pub subproblem_tol: f64,
    pub subproblem_max_iter: usize,
}

impl SolverConfig {
    pub fn new(epsilon: f64, max_iter: usize) -> Self {
        SolverConfig {
            epsilon,
            max_iter,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(DcError::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.subproblem_tol.is_nan() || self.subproblem_tol <= 0.0 {
            return Err(DcError::InvalidArgument(format!(
                "subproblem_tol must be positive, got {}",
                self.subproblem_tol
            )));
        }
        if self.subproblem_max_iter == 0 {
            return Err(DcError::InvalidArgument(
                "subproblem_max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-8,
            max_iter: 10_000,
            subproblem_tol: 1e-12,
            subproblem_max_iter: 10_000,
        }
    }
}

/// One row of a trajectory.
///
/// `g` and `h` are absent when the record was loaded from a trajectory file
/// that only stores `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Point,
    pub f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub grad_f_norm: f64,
    /// `|x_{k+1} - x_k|`; zero on the last record.
    pub step_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    EpsilonReached,
    MaxIter,
    DomainExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::EpsilonReached => "epsilon_reached",
            Termination::MaxIter => "max_iter",
            Termination::DomainExhausted => "domain_exhausted",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<IterateRecord>,
    /// Absent for trajectories read back from a CSV file.
    #[serde(default)]
    pub terminated_by: Option<Termination>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn f_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.f)
    }

    pub fn grad_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.grad_f_norm)
    }

    pub fn min_f(&self) -> Option<f64> {
        self.f_values().reduce(f64::min)
    }

    /// Indices `k` where `f(x_{k+1}) > f(x_k) + slack`.
    pub fn monotonicity_violations(&self, slack: f64) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].f > w[0].f + slack)
            .map(|w| w[0].k)
            .collect()
    }
}

/// A run that stopped on an error, with the iterates recorded so far.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error} (after {} recorded iterates)", partial.len())]
pub struct SolveFailure {
    #[source]
    pub error: DcError,
    pub partial: Trajectory,
}

/// Finds `x` with `|grad g(x) - target| <= cfg.subproblem_tol`, starting the
/// iterative fallback at the origin.
pub fn solve_subproblem<I: DcInstance + ?Sized>(
    inst: &I,
    target: &[f64],
    cfg: &SolverConfig,
) -> Result<Point> {
    let start = vec![0.0; target.len()];
    solve_subproblem_from(inst, target, &start, cfg)
}

/// As [`solve_subproblem`], warm-starting the iterative fallback at `start`.
///
/// Without a registered `L_g` the step is found by halving from one until the
/// residual contracts by `1 - s * mu`, which holds for every `s <= 1/L_g`
/// because the model's curvature is at least `2 mu`.
pub fn solve_subproblem_from<I: DcInstance + ?Sized>(
    inst: &I,
    target: &[f64],
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<Point> {
    if target.iter().any(|t| !t.is_finite()) {
        return Err(DcError::NonFinite(target.to_vec()));
    }
    if target.len() != inst.dim() {
        return Err(DcError::DimensionMismatch {
            expected: inst.dim(),
            got: target.len(),
        });
    }
    if let Some(x) = inst.inverse_g_grad(target) {
        return Point::new(x);
    }

    let residual = |x: &[f64]| sub(&inst.g_grad(x), target);
    let mu = inst.mu();
    let mut x = start.to_vec();
    let mut r = residual(&x);
    let mut r_norm = norm(&r);
    for _ in 0..cfg.subproblem_max_iter {
        if r_norm <= cfg.subproblem_tol {
            return Point::new(x);
        }
        match inst.lipschitz_g() {
            Some(lg) => {
                let s = 1.0 / lg;
                x.iter_mut().zip(&r).for_each(|(xi, ri)| *xi -= s * ri);
                r = residual(&x);
                r_norm = norm(&r);
            }
            None => {
                let mut s = 1.0;
                loop {
                    let cand: Vec<f64> = x.iter().zip(&r).map(|(xi, ri)| xi - s * ri).collect();
                    let cand_r = residual(&cand);
                    let cand_norm = norm(&cand_r);
                    if cand_norm <= (1.0 - s * mu).max(0.0) * r_norm
                        || cand_norm <= cfg.subproblem_tol
                    {
                        x = cand;
                        r = cand_r;
                        r_norm = cand_norm;
                        break;
                    }
                    s *= 0.5;
                    if s < f64::EPSILON {
                        return Err(DcError::SubproblemFailure {
                            residual: r_norm,
                            tol: cfg.subproblem_tol,
                            iterations: cfg.subproblem_max_iter,
                        });
                    }
                }
            }
        }
        if !r_norm.is_finite() {
            break;
        }
    }
    if r_norm <= cfg.subproblem_tol {
        return Point::new(x);
    }
    Err(DcError::SubproblemFailure {
        residual: r_norm,
        tol: cfg.subproblem_tol,
        iterations: cfg.subproblem_max_iter,
    })
}

/// One DCA step: `x_{k+1}` solving `grad g(x_{k+1}) = grad h(x_k)`.
///
/// A next iterate outside the instance domain is reported as
/// [`DcError::OutOfDomain`].
pub fn dca_step<I: DcInstance + ?Sized>(
    inst: &I,
    x_k: &[f64],
    cfg: &SolverConfig,
) -> Result<Point> {
    check_point(inst, x_k)?;
    let target = inst.h_grad(x_k);
    let next = solve_subproblem_from(inst, &target, x_k, cfg)?;
    check_point(inst, &next)?;
    Ok(next)
}

pub(crate) fn record_at<I: DcInstance + ?Sized>(
    inst: &I,
    k: usize,
    x: &Point,
) -> Result<IterateRecord> {
    let grad = f_grad(inst, x)?;
    let g = inst.g_value(x);
    let h = inst.h_value(x);
    Ok(IterateRecord {
        k,
        x: x.clone(),
        f: g - h,
        g: Some(g),
        h: Some(h),
        grad_f_norm: norm(&grad),
        step_norm: 0.0,
    })
}

/// Runs DCA from `x0`, recording every iterate including `x0`.
///
/// Stops at the first iterate with `|grad f(x_k)| <= epsilon`, after
/// `max_iter` steps, or when the next iterate leaves the domain.
pub fn run_dca<I: DcInstance + ?Sized>(
    inst: &I,
    x0: &Point,
    cfg: &SolverConfig,
) -> std::result::Result<Trajectory, SolveFailure> {
    let mut traj = Trajectory::default();
    let fail = |error: DcError, partial: Trajectory| SolveFailure { error, partial };
    if let Err(e) = cfg.validate() {
        return Err(fail(e, traj));
    }

    let mut x = x0.clone();
    let mut k = 0usize;
    loop {
        let mut rec = match record_at(inst, k, &x) {
            Ok(r) => r,
            Err(e) => return Err(fail(e, traj)),
        };
        if meets_tolerance(rec.grad_f_norm, cfg.epsilon) {
            traj.records.push(rec);
            traj.terminated_by = Some(Termination::EpsilonReached);
            return Ok(traj);
        }
        if k >= cfg.max_iter {
            traj.records.push(rec);
            traj.terminated_by = Some(Termination::MaxIter);
            return Ok(traj);
        }
        let next = match dca_step(inst, &x, cfg) {
            Ok(p) => p,
            Err(DcError::OutOfDomain { .. }) => {
                traj.records.push(rec);
                traj.terminated_by = Some(Termination::DomainExhausted);
                return Ok(traj);
            }
            Err(e) => {
                traj.records.push(rec);
                return Err(fail(e, traj));
            }
        };
        rec.step_norm = dist(&next, &x);
        if rec.step_norm == 0.0 {
            let grad_norm = rec.grad_f_norm;
            traj.records.push(rec);
            return Err(fail(DcError::Stagnation { k, grad_norm }, traj));
        }
        traj.records.push(rec);
        x = next;
        k += 1;
    }
}

/// `|grad g(x_{k+1}) - grad h(x_k)|` for every step of a trajectory.
pub fn optimality_residuals<I: DcInstance + ?Sized>(inst: &I, traj: &Trajectory) -> Vec<f64> {
    traj.records
        .windows(2)
        .map(|w| norm(&sub(&inst.g_grad(&w[1].x), &inst.h_grad(&w[0].x))))
        .collect()
}
