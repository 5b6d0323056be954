//! Numerical checks of the DCA convergence-rate inequalities on recorded
//! trajectories.
//!
//! For `k >= 2`, with `m = ceil(k/2)` and `n = floor(k/2) + 1` (the number of
//! terms in the window `m..=k`), the averaged squared gradient obeys
//!
//! ```text
//! (1/n) sum_{i=m}^{k} |grad f(x_i)|^2
//!     <= L_h^2 (f(x_m) - f(x_{k+1})) / (mu n)
//!     <= 2 L_h^2 (f(x_m) - f(x_{k+1})) / (mu k),
//! ```
//!
//! and every window satisfies the descent-sum bound
//! `f(x_j) - f(x_{k+1}) >= mu sum_{i=j}^{k} |x_{i+1} - x_i|^2`.
//!
//! The first inequality rests on `|grad f(x_i)| <= L_h |x_{i+1} - x_i|`,
//! which holds when `grad g` is 1-Lipschitz along the step (e.g.
//! `g = |x|^2 / 2`) but not in general: the optimality condition of the step
//! gives `grad g(x_i) = grad h(x_{i-1})`, hence
//! `|grad f(x_i)| <= L_h |x_i - x_{i-1}|`. [`thm1_check_shifted`] checks the
//! bound with the window moved back by one step accordingly, which holds for
//! every exact DCA trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};
use crate::solver::{meets_tolerance, Trajectory};

/// Relative slack applied to every inequality.
pub const REL_SLACK: f64 = 1e-9;

fn slack(rhs: f64) -> f64 {
    REL_SLACK * (1.0 + rhs.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm1Check {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// The `2 L_h^2 (...) / (mu k)` form.
    pub rhs_loose: f64,
    /// Same sum divided by `floor(k/2)` instead of `floor(k/2) + 1`.
    /// Reported for reference only; it does not enter `pass`.
    pub lhs_floor_divisor: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentSumCheck {
    pub j: usize,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledRateRow {
    pub k: usize,
    pub grad_norm: f64,
    pub scaled: f64,
}

/// Averaged squared gradient over `ceil(k/2)..=k` against the descent it
/// must be paid for with. Needs records `0..=k+1`.
pub fn thm1_check(traj: &Trajectory, mu: f64, lipschitz_h: f64, k: usize) -> Result<Thm1Check> {
    if k < 2 {
        return Err(DcError::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if traj.len() < k + 2 {
        return Err(DcError::TrajectoryTooShort {
            needed: k + 2,
            have: traj.len(),
        });
    }
    let r = &traj.records;
    let first = k.div_ceil(2);
    let count = (k / 2 + 1) as f64;
    let sum_sq: f64 = r[first..=k]
        .iter()
        .map(|rec| rec.grad_f_norm * rec.grad_f_norm)
        .sum();
    let decrease = r[first].f - r[k + 1].f;
    let l2 = lipschitz_h * lipschitz_h;

    let lhs = sum_sq / count;
    let rhs = l2 * decrease / (mu * count);
    let rhs_loose = 2.0 * l2 * decrease / (mu * k as f64);
    let pass = lhs <= rhs + slack(rhs) && rhs <= rhs_loose + slack(rhs_loose);
    Ok(Thm1Check {
        k,
        lhs,
        rhs,
        rhs_loose,
        lhs_floor_divisor: sum_sq / (k / 2) as f64,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedThm1Check {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// The averaged-gradient bound with the descent window shifted back by one:
///
/// ```text
/// (1/n) sum_{i=m}^{k} |grad f(x_i)|^2 <= L_h^2 (f(x_{m-1}) - f(x_k)) / (mu n)
/// ```
///
/// with `m = ceil(k/2)` and `n = floor(k/2) + 1`. Needs records `0..=k`.
pub fn thm1_check_shifted(
    traj: &Trajectory,
    mu: f64,
    lipschitz_h: f64,
    k: usize,
) -> Result<ShiftedThm1Check> {
    if k < 2 {
        return Err(DcError::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if traj.len() < k + 1 {
        return Err(DcError::TrajectoryTooShort {
            needed: k + 1,
            have: traj.len(),
        });
    }
    let r = &traj.records;
    let first = k.div_ceil(2);
    let count = (k / 2 + 1) as f64;
    let sum_sq: f64 = r[first..=k]
        .iter()
        .map(|rec| rec.grad_f_norm * rec.grad_f_norm)
        .sum();
    let lhs = sum_sq / count;
    let rhs = lipschitz_h * lipschitz_h * (r[first - 1].f - r[k].f) / (mu * count);
    Ok(ShiftedThm1Check {
        k,
        lhs,
        rhs,
        pass: lhs <= rhs + slack(rhs),
    })
}

/// `f(x_j) - f(x_{k+1}) >= mu * sum_{i=j}^{k} step_i^2`. Needs records `0..=k+1`.
pub fn descent_sum_check(
    traj: &Trajectory,
    mu: f64,
    j: usize,
    k: usize,
) -> Result<DescentSumCheck> {
    if j > k {
        return Err(DcError::InvalidArgument(format!(
            "need j <= k, got j={j}, k={k}"
        )));
    }
    if traj.len() < k + 2 {
        return Err(DcError::TrajectoryTooShort {
            needed: k + 2,
            have: traj.len(),
        });
    }
    let r = &traj.records;
    let lhs = r[j].f - r[k + 1].f;
    let rhs = mu
        * r[j..=k]
            .iter()
            .map(|rec| rec.step_norm * rec.step_norm)
            .sum::<f64>();
    Ok(DescentSumCheck {
        j,
        k,
        lhs,
        rhs,
        pass: lhs >= rhs - slack(rhs),
    })
}

/// Prefix sums for O(1) descent-sum checks over many `(j, k)` pairs.
pub struct DescentSums<'a> {
    traj: &'a Trajectory,
    mu: f64,
    /// `prefix[i] = sum_{t < i} step_t^2`.
    prefix: Vec<f64>,
}

impl<'a> DescentSums<'a> {
    pub fn new(traj: &'a Trajectory, mu: f64) -> Self {
        let mut prefix = Vec::with_capacity(traj.len() + 1);
        prefix.push(0.0);
        for rec in &traj.records {
            prefix.push(prefix.last().unwrap() + rec.step_norm * rec.step_norm);
        }
        DescentSums { traj, mu, prefix }
    }

    /// Same result as [`descent_sum_check`] up to summation order.
    pub fn check(&self, j: usize, k: usize) -> Result<DescentSumCheck> {
        if j > k {
            return Err(DcError::InvalidArgument(format!(
                "need j <= k, got j={j}, k={k}"
            )));
        }
        if self.traj.len() < k + 2 {
            return Err(DcError::TrajectoryTooShort {
                needed: k + 2,
                have: self.traj.len(),
            });
        }
        let r = &self.traj.records;
        let lhs = r[j].f - r[k + 1].f;
        let rhs = self.mu * (self.prefix[k + 1] - self.prefix[j]);
        Ok(DescentSumCheck {
            j,
            k,
            lhs,
            rhs,
            pass: lhs >= rhs - slack(rhs),
        })
    }
}

/// First `k` with `|grad f(x_k)| <= eps`, if any, using the solvers'
/// termination test.
pub fn iterations_to_eps(traj: &Trajectory, eps: f64) -> Option<usize> {
    traj.records
        .iter()
        .find(|r| meets_tolerance(r.grad_f_norm, eps))
        .map(|r| r.k)
}

/// `|grad f(x_k)| (k+1)^(1/2 + delta)`, identically one on the slow instance.
pub fn scaled_rate_table(traj: &Trajectory, delta: f64) -> Vec<ScaledRateRow> {
    traj.records
        .iter()
        .map(|r| ScaledRateRow {
            k: r.k,
            grad_norm: r.grad_f_norm,
            scaled: r.grad_f_norm * ((r.k + 1) as f64).powf(0.5 + delta),
        })
        .collect()
}

/// `f(x_{ceil(k/2)}) - f(x_{k+1})` for `k = 2 ..= len-2`, paired with `k`.
pub fn numerator_sequence(traj: &Trajectory) -> Vec<(usize, f64)> {
    let r = &traj.records;
    if r.len() < 4 {
        return Vec::new();
    }
    (2..=r.len() - 2)
        .map(|k| (k, r[k.div_ceil(2)].f - r[k + 1].f))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub mu: f64,
    pub lipschitz_h: f64,
    pub per_k: Vec<Thm1Check>,
    pub per_k_shifted: Vec<ShiftedThm1Check>,
    /// One check per `k` over the window `ceil(k/2)..=k`.
    pub descent_sum_checks: Vec<DescentSumCheck>,
    pub monotone_violations: Vec<usize>,
    pub iterations_to_eps: Option<usize>,
    pub numerator_sequence: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_rate: Option<ScaledRateSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledRateSummary {
    pub delta: f64,
    pub rows: Vec<ScaledRateRow>,
    /// `k` where `|scaled^2 - 1| > SLOW_RATE_TOL`.
    pub deviations: Vec<usize>,
}

/// Relative tolerance on `|grad f(x_k)|^2 (k+1)^(1 + 2 delta)`.
pub const SLOW_RATE_TOL: f64 = 1e-10;

/// Monotone decrease slack for `f` along a trajectory.
pub const MONOTONE_SLACK: f64 = 1e-12;

impl RateReport {
    pub fn build(
        traj: &Trajectory,
        mu: f64,
        lipschitz_h: f64,
        eps: Option<f64>,
        delta: Option<f64>,
    ) -> Self {
        let n = traj.len();
        let per_k = if n >= 4 {
            (2..=n - 2)
                .map(|k| thm1_check(traj, mu, lipschitz_h, k).expect("k within range"))
                .collect()
        } else {
            Vec::new()
        };
        let per_k_shifted = if n >= 3 {
            (2..=n - 1)
                .map(|k| thm1_check_shifted(traj, mu, lipschitz_h, k).expect("k within range"))
                .collect()
        } else {
            Vec::new()
        };
        let sums = DescentSums::new(traj, mu);
        let descent_sum_checks = if n >= 2 {
            (0..=n - 2)
                .map(|k| sums.check(k.div_ceil(2), k).expect("k within range"))
                .collect()
        } else {
            Vec::new()
        };
        let scaled_rate = delta.map(|delta| {
            let rows = scaled_rate_table(traj, delta);
            let deviations = rows
                .iter()
                .filter(|r| (r.scaled * r.scaled - 1.0).abs() > SLOW_RATE_TOL || r.scaled.is_nan())
                .map(|r| r.k)
                .collect();
            ScaledRateSummary {
                delta,
                rows,
                deviations,
            }
        });
        RateReport {
            mu,
            lipschitz_h,
            per_k,
            per_k_shifted,
            descent_sum_checks,
            monotone_violations: traj.monotonicity_violations(MONOTONE_SLACK),
            iterations_to_eps: eps.and_then(|e| iterations_to_eps(traj, e)),
            numerator_sequence: numerator_sequence(traj)
                .into_iter()
                .map(|(_, v)| v)
                .collect(),
            scaled_rate,
        }
    }

    /// Human-readable descriptions of every failed check.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.per_k.iter().filter(|c| !c.pass) {
            out.push(format!(
                "averaged-gradient bound fails at k={}: lhs={:e} rhs={:e} rhs_loose={:e}",
                c.k, c.lhs, c.rhs, c.rhs_loose
            ));
        }
        for c in self.per_k_shifted.iter().filter(|c| !c.pass) {
            out.push(format!(
                "shifted averaged-gradient bound fails at k={}: lhs={:e} rhs={:e}",
                c.k, c.lhs, c.rhs
            ));
        }
        for c in self.descent_sum_checks.iter().filter(|c| !c.pass) {
            out.push(format!(
                "descent-sum bound fails at j={} k={}: lhs={:e} rhs={:e}",
                c.j, c.k, c.lhs, c.rhs
            ));
        }
        for k in &self.monotone_violations {
            out.push(format!("f increases between k={} and k={}", k, k + 1));
        }
        if let Some(s) = &self.scaled_rate {
            for k in &s.deviations {
                out.push(format!(
                    "gradient norm off the (k+1)^-(1/2+delta) rate at k={k}"
                ));
            }
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversarial::build_adversarial;
    use crate::instance::{make_quadratic_dc, Point};
    use crate::solver::{run_dca, SolverConfig};
    use approx::assert_abs_diff_eq;

    fn adversarial_traj(delta: f64, steps: usize) -> Trajectory {
        let a = build_adversarial(delta, steps + 5).unwrap();
        run_dca(
            &a,
            &Point::scalar(0.0).unwrap(),
            &SolverConfig::new(1e-12, steps),
        )
        .unwrap()
    }

    fn quadratic_traj(steps: usize) -> Trajectory {
        let q = make_quadratic_dc(&Point::scalar(1.0).unwrap());
        run_dca(
            &q,
            &Point::scalar(0.0).unwrap(),
            &SolverConfig::new(1e-15, steps),
        )
        .unwrap()
    }

    #[test]
    fn thm1_worked_anchor() {
        let t = adversarial_traj(0.5, 10);
        let c = thm1_check(&t, 0.5, 1.0, 2).unwrap();
        assert_abs_diff_eq!(c.lhs, 13.0 / 72.0, epsilon = 1e-15);
        // f(x_1) - f(x_3) = -3/4 + 19/18
        assert_abs_diff_eq!(c.rhs, 11.0 / 36.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.records[3].f, -19.0 / 18.0, epsilon = 1e-14);
        assert!(c.pass);
        assert!(c.rhs <= c.rhs_loose);
    }

    #[test]
    fn thm1_on_quadratic() {
        let t = quadratic_traj(8);
        // x_k = 1 - 2^-k, f(x) = (x-1)^2/2 - 1/2, |grad f(x_k)| = 2^-k,
        // |x_{k+1} - x_k| = 2^-(k+1): the gradient is twice the next step, so
        // the unshifted bound is violated by the factor 8/3.
        let f = |k: i32| 0.5 * 0.25f64.powi(k) - 0.5;
        let c = thm1_check(&t, 1.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(c.lhs, (0.25 + 1.0 / 16.0) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.rhs, (f(1) - f(3)) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lhs / c.rhs, 8.0 / 3.0, epsilon = 1e-12);
        assert!(!c.pass);

        let s = thm1_check_shifted(&t, 1.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(s.lhs, c.lhs, epsilon = 0.0);
        assert_abs_diff_eq!(s.rhs, (f(0) - f(2)) / 2.0, epsilon = 1e-15);
        assert!(s.pass);
        for k in 2..=8 {
            assert!(thm1_check_shifted(&t, 1.0, 1.0, k).unwrap().pass);
        }
    }

    #[test]
    fn shifted_check_on_adversarial() {
        let t = adversarial_traj(0.5, 10);
        let s = thm1_check_shifted(&t, 0.5, 1.0, 2).unwrap();
        assert_abs_diff_eq!(s.lhs, 13.0 / 72.0, epsilon = 1e-15);
        // f(x_0) - f(x_2) = 0 + 23/24
        assert_abs_diff_eq!(s.rhs, 23.0 / 24.0, epsilon = 1e-14);
        assert!(s.pass);
        assert!(thm1_check_shifted(&t, 0.5, 1.0, 1).is_err());
        assert!(thm1_check_shifted(&t, 0.5, 1.0, 11).is_err());
    }

    #[test]
    fn thm1_preconditions() {
        let t = quadratic_traj(8);
        assert!(matches!(
            thm1_check(&t, 1.0, 1.0, 1),
            Err(DcError::InvalidArgument(_))
        ));
        assert!(matches!(
            thm1_check(&t, 1.0, 1.0, 8),
            Err(DcError::TrajectoryTooShort {
                needed: 10,
                have: 9
            })
        ));
    }

    #[test]
    fn descent_sum_examples() {
        let t = adversarial_traj(0.5, 10);
        let c = descent_sum_check(&t, 0.5, 1, 2).unwrap();
        assert_abs_diff_eq!(c.rhs, 13.0 / 72.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lhs, 11.0 / 36.0, epsilon = 1e-14);
        assert!(c.pass);
        assert!(descent_sum_check(&t, 0.5, 4, 4).unwrap().pass);

        let q = quadratic_traj(8);
        let c = descent_sum_check(&q, 1.0, 0, 5).unwrap();
        // steps 2^-(i+1), i = 0..=5
        let rhs: f64 = (0..=5).map(|i| 0.25f64.powi(i + 1)).sum();
        assert_abs_diff_eq!(c.rhs, rhs, epsilon = 1e-15);
        assert!(c.pass);
        assert!(descent_sum_check(&q, 1.0, 3, 2).is_err());
        assert!(descent_sum_check(&q, 1.0, 0, 8).is_err());
    }

    #[test]
    fn prefix_sums_agree_with_direct_sum() {
        let t = adversarial_traj(0.3, 200);
        let sums = DescentSums::new(&t, 0.5);
        for (j, k) in [(0, 0), (0, 199), (17, 150), (100, 100)] {
            let a = descent_sum_check(&t, 0.5, j, k).unwrap();
            let b = sums.check(j, k).unwrap();
            assert_abs_diff_eq!(a.rhs, b.rhs, epsilon = 1e-13);
            assert_eq!(a.lhs, b.lhs);
        }
    }

    #[test]
    fn eps_counts() {
        let t = adversarial_traj(0.5, 200);
        assert_eq!(iterations_to_eps(&t, 0.1), Some(9));
        assert_eq!(iterations_to_eps(&t, 1.0), Some(0));
        assert_eq!(iterations_to_eps(&t, 1e-9), None);
        assert_eq!(iterations_to_eps(&quadratic_traj(20), 0.1), Some(4));
    }

    #[test]
    fn scaled_rates() {
        let t = adversarial_traj(0.5, 100);
        for row in scaled_rate_table(&t, 0.5) {
            assert!((row.scaled - 1.0).abs() <= 1e-10, "{row:?}");
        }
        let q = quadratic_traj(30);
        let rows = scaled_rate_table(&q, 0.5);
        for row in &rows {
            let expected = 0.5f64.powi(row.k as i32) * (row.k + 1) as f64;
            assert_abs_diff_eq!(row.scaled, expected, epsilon = 1e-12);
        }
        assert!(rows.last().unwrap().scaled < 1e-6);

        let single = Trajectory {
            records: vec![q.records[0].clone()],
            terminated_by: None,
        };
        let rows = scaled_rate_table(&single, 0.7);
        assert_eq!(rows[0].scaled, rows[0].grad_norm);
    }

    #[test]
    fn report_flags_corruption() {
        let mut t = adversarial_traj(0.5, 50);
        let report = RateReport::build(&t, 0.5, 1.0, Some(0.1), Some(0.5));
        assert!(report.all_pass(), "{:?}", report.failures());
        assert_eq!(report.iterations_to_eps, Some(9));
        assert_eq!(report.per_k.len(), 48);
        assert_eq!(report.per_k_shifted.len(), 49);

        t.records[20].f += 1.0;
        let report = RateReport::build(&t, 0.5, 1.0, None, None);
        assert!(!report.all_pass());
        assert_eq!(report.monotone_violations, vec![19]);
    }

    #[test]
    fn short_trajectories_give_empty_report() {
        let q = quadratic_traj(0);
        let report = RateReport::build(&q, 1.0, 1.0, None, None);
        assert!(report.per_k.is_empty());
        assert!(report.descent_sum_checks.is_empty());
        assert!(report.numerator_sequence.is_empty());
    }
}
