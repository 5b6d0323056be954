#![allow(dead_code)]

use dclab::DcInstance;

/// `g(x) = x^2/2 + e^x`, `h(x) = x^2/4`: no closed-form inverse and no `L_g`,
/// so DCA has to use the iterative subproblem solver.
pub struct ExpDc;

impl DcInstance for ExpDc {
    fn dim(&self) -> usize {
        1
    }
    fn g_value(&self, x: &[f64]) -> f64 {
        0.5 * x[0] * x[0] + x[0].exp()
    }
    fn g_grad(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] + x[0].exp()]
    }
    fn h_value(&self, x: &[f64]) -> f64 {
        0.25 * x[0] * x[0]
    }
    fn h_grad(&self, x: &[f64]) -> Vec<f64> {
        vec![0.5 * x[0]]
    }
    fn mu(&self) -> f64 {
        0.5
    }
    fn lipschitz_h(&self) -> f64 {
        0.5
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
