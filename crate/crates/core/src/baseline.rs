//! Fixed-step steepest descent on `f`, ignoring the DC split.

use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};
use crate::instance::{check_point, dist, f_grad, DcInstance, Point};
use crate::solver::{meets_tolerance, record_at, SolveFailure, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub step_size: f64,
    pub epsilon: f64,
    pub max_iter: usize,
}

impl GdConfig {
    /// Step `1 / (L_g + L_h)` when the instance registers `L_g`.
    pub fn for_instance<I: DcInstance + ?Sized>(
        inst: &I,
        epsilon: f64,
        max_iter: usize,
    ) -> Option<Self> {
        inst.lipschitz_g().map(|lg| GdConfig {
            step_size: 1.0 / (lg + inst.lipschitz_h()),
            epsilon,
            max_iter,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(DcError::InvalidArgument(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(DcError::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// `x_{k+1} = x_k - step_size * grad f(x_k)`, recorded in the same schema as
/// a DCA run.
pub fn run_steepest_descent<I: DcInstance + ?Sized>(
    inst: &I,
    x0: &Point,
    cfg: &GdConfig,
) -> std::result::Result<Trajectory, SolveFailure> {
    let mut traj = Trajectory::default();
    if let Err(error) = cfg.validate() {
        return Err(SolveFailure {
            error,
            partial: traj,
        });
    }
    let mut x = x0.clone();
    let mut k = 0;
    loop {
        let mut rec = match record_at(inst, k, &x) {
            Ok(r) => r,
            Err(error) => {
                return Err(SolveFailure {
                    error,
                    partial: traj,
                })
            }
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
        let grad = f_grad(inst, &x).expect("point checked by record_at");
        let next: Vec<f64> = x
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi - cfg.step_size * gi)
            .collect();
        let next = match Point::new(next).and_then(|p| check_point(inst, &p).map(|_| p)) {
            Ok(p) => p,
            Err(_) => {
                traj.records.push(rec);
                traj.terminated_by = Some(Termination::DomainExhausted);
                return Ok(traj);
            }
        };
        rec.step_norm = dist(&next, &x);
        traj.records.push(rec);
        x = next;
        k += 1;
    }
}
