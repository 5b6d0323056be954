mod common;

use common::{diff, dot, norm, ExpDc};
use dclab::analysis::{descent_sum_check, thm1_check_shifted};
use dclab::io::{read_trajectory, write_trajectory, Format};
use dclab::solver::optimality_residuals;
use dclab::{
    build_adversarial, f_grad, f_value, finite_diff_check, make_quadratic_dc, run_dca, DcInstance,
    Point, SolverConfig, Termination,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn point(v: Vec<f64>) -> Point {
    Point::new(v).unwrap()
}

/// Uniform samples inside the domain, clipped to `[lo, hi]`.
fn sample_points(
    inst: &dyn DcInstance,
    lo: f64,
    hi: f64,
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let dom = inst.domain();
    let lo = lo.max(dom.lower);
    let hi = hi.min(dom.upper);
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..inst.dim()).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect()
}

fn builtin_instances() -> Vec<(String, Box<dyn DcInstance>)> {
    let mut v: Vec<(String, Box<dyn DcInstance>)> = vec![
        (
            "quadratic b=1".into(),
            Box::new(make_quadratic_dc(&point(vec![1.0]))),
        ),
        (
            "quadratic b=(3,4)".into(),
            Box::new(make_quadratic_dc(&point(vec![3.0, 4.0]))),
        ),
    ];
    for delta in [0.1, 0.5, 1.0] {
        v.push((
            format!("adversarial delta={delta}"),
            Box::new(build_adversarial(delta, 200).unwrap()),
        ));
    }
    v
}

#[test]
fn builtin_finite_differences() {
    for (name, inst) in builtin_instances() {
        let step = 1e-6;
        let lower = inst.domain().lower + step;
        for x in sample_points(inst.as_ref(), lower.max(-10.0), 5.0, 100, 1) {
            let rep = finite_diff_check(inst.as_ref(), &x, step).unwrap();
            assert!(rep.max_rel_error <= 1e-5, "{name} at {x:?}: {rep:?}");
        }
    }
}

#[test]
fn builtin_strong_convexity_and_lipschitz() {
    for (name, inst) in builtin_instances() {
        let xs = sample_points(inst.as_ref(), -10.0, 5.0, 100, 2);
        let ys = sample_points(inst.as_ref(), -10.0, 5.0, 100, 3);
        for (x, y) in xs.iter().zip(&ys) {
            let d = diff(y, x);
            let gap = inst.g_value(y) - inst.g_value(x) - dot(&inst.g_grad(x), &d);
            assert!(
                gap >= inst.mu() * dot(&d, &d) - 1e-12,
                "{name}: strong convexity at {x:?},{y:?}"
            );
            let dh = norm(&diff(&inst.h_grad(x), &inst.h_grad(y)));
            assert!(
                dh <= inst.lipschitz_h() * norm(&d) + 1e-12,
                "{name}: Lipschitz at {x:?},{y:?}"
            );
        }
    }
}

#[test]
fn builtin_lower_bounds_hold_at_samples() {
    for (name, inst) in builtin_instances() {
        let f_low = inst.f_low().unwrap();
        for x in sample_points(inst.as_ref(), -1e3, 1e3, 1000, 4) {
            assert!(
                f_value(inst.as_ref(), &x).unwrap() >= f_low - 1e-12,
                "{name} at {x:?}"
            );
        }
    }
}

#[test]
fn corrected_gradient_identity_along_runs() {
    // ExpDc stagnates at the rounding floor near 1e-13, so stop it earlier.
    let runs: Vec<(Box<dyn DcInstance>, Vec<f64>, f64)> = vec![
        (
            Box::new(make_quadratic_dc(&point(vec![1.0, -2.0]))),
            vec![5.0, 5.0],
            1e-14,
        ),
        (
            Box::new(build_adversarial(0.3, 400).unwrap()),
            vec![0.0],
            1e-14,
        ),
        (Box::new(ExpDc), vec![2.0], 1e-10),
    ];
    for (inst, x0, eps) in runs {
        let cfg = SolverConfig::new(eps, 300);
        let t = run_dca(inst.as_ref(), &point(x0), &cfg).unwrap();
        assert!(t.len() >= 3);
        let slack = cfg.subproblem_tol * (1.0 + inst.lipschitz_h()) + 1e-15;
        for w in t.records.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            let lhs = cur.grad_f_norm;
            let via_h = norm(&diff(&inst.h_grad(&prev.x), &inst.h_grad(&cur.x)));
            assert!(
                (lhs - via_h).abs() <= slack + 1e-12 * lhs,
                "k={}: {lhs} vs {via_h}",
                cur.k
            );
            assert!(lhs <= inst.lipschitz_h() * prev.step_norm + slack + 1e-12 * lhs);
        }
    }
}

/// The identity `|grad f(x_k)| = |grad h(x_{k+1}) - grad h(x_k)|` with the
/// forward index does not hold: on the quadratic the gradient is twice the
/// next step.
#[test]
fn forward_gradient_identity_counterexample() {
    let q = make_quadratic_dc(&point(vec![1.0]));
    let t = run_dca(&q, &point(vec![0.0]), &SolverConfig::new(1e-12, 5)).unwrap();
    for w in t.records.windows(2) {
        let forward = norm(&diff(&q.h_grad(&w[1].x), &q.h_grad(&w[0].x)));
        assert_eq!(w[0].grad_f_norm, 2.0 * forward);
        assert!(w[0].grad_f_norm > q.lipschitz_h() * w[0].step_norm);
    }
}

#[test]
fn iterative_subproblem_meets_tolerance() {
    let cfg = SolverConfig::new(1e-10, 500);
    let t = run_dca(&ExpDc, &point(vec![3.0]), &cfg).unwrap();
    assert_eq!(t.terminated_by, Some(Termination::EpsilonReached));
    assert!(optimality_residuals(&ExpDc, &t)
        .iter()
        .all(|&r| r <= cfg.subproblem_tol));
    assert!(t.monotonicity_violations(1e-12).is_empty());
}

#[test]
fn replay_is_bit_identical() {
    let a = build_adversarial(0.7, 2000).unwrap();
    let cfg = SolverConfig::new(1e-12, 1500);
    let t1 = run_dca(&a, &point(vec![0.0]), &cfg).unwrap();
    let t2 = run_dca(&a, &point(vec![0.0]), &cfg).unwrap();
    assert_eq!(t1, t2);
    let e1 = run_dca(&ExpDc, &point(vec![-3.0]), &cfg).unwrap();
    let e2 = run_dca(&ExpDc, &point(vec![-3.0]), &cfg).unwrap();
    assert_eq!(e1, e2);
}

#[test]
fn domain_exhaustion_at_horizon() {
    let a = build_adversarial(0.5, 20).unwrap();
    let t = run_dca(&a, &point(vec![0.0]), &SolverConfig::new(1e-12, 1000)).unwrap();
    assert_eq!(t.terminated_by, Some(Termination::DomainExhausted));
    assert_eq!(t.len(), 22);
    assert_eq!(t.records.last().unwrap().x[0], a.last_knot());
}

#[test]
fn instances_are_shareable_across_threads() {
    let a = std::sync::Arc::new(build_adversarial(0.5, 500).unwrap());
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let a = a.clone();
            std::thread::spawn(move || {
                run_dca(
                    a.as_ref(),
                    &point(vec![0.0]),
                    &SolverConfig::new(1e-12, 400),
                )
                .unwrap()
            })
        })
        .collect();
    let runs: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_runs_decrease_and_satisfy_descent_sums(
        b in prop::collection::vec(-5.0f64..5.0, 1..4),
        shift in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let q = make_quadratic_dc(&point(b.clone()));
        let x0: Vec<f64> = b.iter().zip(&shift).map(|(bi, s)| bi + s + 0.25).collect();
        let t = run_dca(&q, &point(x0), &SolverConfig::new(1e-13, 200)).unwrap();
        prop_assert!(t.monotonicity_violations(1e-12).is_empty());
        for k in 0..t.len().saturating_sub(1) {
            prop_assert!(descent_sum_check(&t, q.mu(), k.div_ceil(2), k).unwrap().pass);
            prop_assert!(descent_sum_check(&t, q.mu(), 0, k).unwrap().pass);
        }
        for k in 2..t.len() {
            prop_assert!(thm1_check_shifted(&t, q.mu(), q.lipschitz_h(), k).unwrap().pass);
        }
        prop_assert!(t.min_f().unwrap() >= q.f_low().unwrap() - 1e-12);
    }

    #[test]
    fn adversarial_h_is_convex_and_one_lipschitz(
        delta in 0.05f64..2.0,
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
    ) {
        let a = build_adversarial(delta, 300).unwrap();
        let lo = a.last_knot();
        let x = lo + u * (1.0 - lo);
        let y = lo + v * (1.0 - lo);
        let (hx, gx) = a.adv_h_eval(x).unwrap();
        let (hy, gy) = a.adv_h_eval(y).unwrap();
        prop_assert!((gx - gy).abs() <= (x - y).abs() + 1e-12);
        prop_assert!((gx - gy) * (x - y) >= -1e-12);
        // supporting line
        prop_assert!(hy >= hx + gx * (y - x) - 1e-9 * (1.0 + hx.abs()));
        prop_assert!(f_value(&a, &[x]).unwrap() >= a.f_low().unwrap() - 1e-9);
        let fg = f_grad(&a, &[x]).unwrap()[0];
        prop_assert!(fg >= -1e-15);
    }

    #[test]
    fn trajectory_csv_round_trip(
        delta in 0.05f64..1.5,
        steps in 1usize..60,
    ) {
        let a = build_adversarial(delta, 80).unwrap();
        let t = run_dca(&a, &point(vec![0.0]), &SolverConfig::new(1e-12, steps)).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&t, Format::Csv, &mut buf).unwrap();
        let back = read_trajectory(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), t.len());
        for (r, s) in t.records.iter().zip(&back.records) {
            prop_assert_eq!(&r.x, &s.x);
            prop_assert_eq!(r.f.to_bits(), s.f.to_bits());
            prop_assert_eq!(r.grad_f_norm.to_bits(), s.grad_f_norm.to_bits());
            prop_assert_eq!(r.step_norm.to_bits(), s.step_norm.to_bits());
        }
    }
}
