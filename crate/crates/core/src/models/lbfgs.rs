//! Limited-memory BFGS with a strong-Wolfe line search, used for the smooth
//! linear-model objectives.

use std::collections::VecDeque;

/// A differentiable objective. `value_grad` writes the gradient into `grad`
/// and returns the function value.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Positive per-coordinate curvature estimates. When given, they scale
    /// the initial inverse-Hessian guess, which helps badly scaled problems.
    fn diagonal_curvature(&self) -> Option<Vec<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LbfgsParams {
    pub max_iter: usize,
    /// Stop once the gradient's infinity norm falls to this value.
    pub grad_tol: f64,
    pub memory: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-4,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    /// The line search could no longer find a decreasing step.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::GradientTolerance
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g` for the current inverse-Hessian
/// approximation, seeded with `gamma * diag(inv_diag)`.
fn search_direction(grad: &[f64], history: &VecDeque<Pair>, inv_diag: Option<&[f64]>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alpha = vec![0.0; history.len()];
    for (k, p) in history.iter().enumerate().rev() {
        alpha[k] = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= alpha[k] * yi);
    }
    match (history.back(), inv_diag) {
        (Some(last), Some(h)) => {
            let yhy: f64 = last.y.iter().zip(h).map(|(y, hi)| y * y * hi).sum();
            let gamma = dot(&last.s, &last.y) / yhy;
            q.iter_mut().zip(h).for_each(|(qi, hi)| *qi *= gamma * hi);
        }
        (None, Some(h)) => q.iter_mut().zip(h).for_each(|(qi, hi)| *qi *= hi),
        (Some(last), None) => {
            let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        (None, None) => {}
    }
    for (k, p) in history.iter().enumerate() {
        let beta = p.rho * dot(&p.y, &q);
        q.iter_mut().zip(&p.s).for_each(|(qi, si)| *qi += (alpha[k] - beta) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

struct Probe {
    step: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

fn probe<O: Objective>(obj: &O, x0: &[f64], dir: &[f64], step: f64) -> Probe {
    let x: Vec<f64> = x0.iter().zip(dir).map(|(a, d)| a + step * d).collect();
    let mut grad = vec![0.0; x.len()];
    let value = obj.value_grad(&x, &mut grad);
    let slope = dot(&grad, dir);
    Probe {
        step,
        value,
        slope,
        x,
        grad,
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_EVALS: usize = 40;

/// Strong-Wolfe line search (bracketing followed by zoom). Returns `None`
/// when no acceptable decreasing step is found.
fn line_search<O: Objective>(
    obj: &O,
    x0: &[f64],
    f0: f64,
    g0_dir: f64,
    dir: &[f64],
    initial_step: f64,
) -> Option<Probe> {
    let mut prev = Probe {
        step: 0.0,
        value: f0,
        slope: g0_dir,
        x: x0.to_vec(),
        grad: Vec::new(),
    };
    let mut step = initial_step;
    for i in 0..MAX_LINE_EVALS {
        let cur = probe(obj, x0, dir, step);
        if !cur.value.is_finite() {
            step = 0.5 * (prev.step + step);
            continue;
        }
        if cur.value > f0 + C1 * step * g0_dir || (i > 0 && cur.value >= prev.value) {
            return zoom(obj, x0, f0, g0_dir, dir, prev, cur);
        }
        if cur.slope.abs() <= -C2 * g0_dir {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            return zoom(obj, x0, f0, g0_dir, dir, cur, prev);
        }
        step *= 2.0;
        prev = cur;
    }
    (prev.step > 0.0).then_some(prev)
}

fn zoom<O: Objective>(
    obj: &O,
    x0: &[f64],
    f0: f64,
    g0_dir: f64,
    dir: &[f64],
    mut lo: Probe,
    mut hi: Probe,
) -> Option<Probe> {
    for _ in 0..MAX_LINE_EVALS {
        // Minimizer of the quadratic through lo's value/slope and hi's value,
        // kept away from the bracket ends.
        let (a, b) = (lo.step, hi.step);
        let width = b - a;
        let denom = 2.0 * (hi.value - lo.value - lo.slope * width);
        let mut step = if denom > 0.0 {
            a - lo.slope * width * width / denom
        } else {
            0.5 * (a + b)
        };
        let (left, right) = (a.min(b), a.max(b));
        let margin = 0.1 * (right - left);
        if !(step > left + margin && step < right - margin) {
            step = 0.5 * (a + b);
        }
        if (right - left) <= f64::EPSILON * right.abs().max(1.0) {
            break;
        }
        let cur = probe(obj, x0, dir, step);
        if cur.value > f0 + C1 * step * g0_dir || cur.value >= lo.value {
            hi = cur;
        } else {
            if cur.slope.abs() <= -C2 * g0_dir {
                return Some(cur);
            }
            if cur.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // Accept the best sufficient-decrease point found, if any.
    (lo.step > 0.0 && lo.value < f0 && !lo.grad.is_empty()).then_some(lo)
}

pub fn minimize<O: Objective>(obj: &O, x0: Vec<f64>, params: &LbfgsParams) -> Minimum {
    let n = obj.dim();
    assert_eq!(x0.len(), n, "starting point has the wrong dimension");
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut value = obj.value_grad(&x, &mut grad);
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(params.memory);
    let inv_diag: Option<Vec<f64>> = obj.diagonal_curvature().map(|d| {
        assert_eq!(d.len(), n, "curvature estimate has the wrong dimension");
        d.iter().map(|&v| if v > 0.0 && v.is_finite() { 1.0 / v } else { 1.0 }).collect()
    });
    let mut iterations = 0;
    let stop = loop {
        if inf_norm(&grad) <= params.grad_tol {
            break StopReason::GradientTolerance;
        }
        if iterations >= params.max_iter {
            break StopReason::MaxIterations;
        }
        let mut dir = search_direction(&grad, &history, inv_diag.as_deref());
        let mut slope = dot(&grad, &dir);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            dir = search_direction(&grad, &history, inv_diag.as_deref());
            slope = dot(&grad, &dir);
        }
        let initial_step = if history.is_empty() && inv_diag.is_none() {
            1.0 / inf_norm(&grad).max(1.0)
        } else {
            1.0
        };
        let Some(next) = line_search(obj, &x, value, slope, &dir, initial_step) else {
            if history.is_empty() {
                break StopReason::Stalled;
            }
            history.clear();
            continue;
        };
        iterations += 1;
        let s: Vec<f64> = next.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) {
            if history.len() == params.memory {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        let decrease = value - next.value;
        x = next.x;
        grad = next.grad;
        value = next.value;
        if decrease <= 1e-15 * value.abs().max(1.0) && inf_norm(&grad) > params.grad_tol {
            break StopReason::Stalled;
        }
    };
    Minimum {
        grad_inf_norm: inf_norm(&grad),
        x,
        value,
        iterations,
        stop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        diag: Vec<f64>,
        center: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.diag.len()
        }
        fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let mut f = 0.0;
            for i in 0..x.len() {
                let d = x[i] - self.center[i];
                f += 0.5 * self.diag[i] * d * d;
                grad[i] = self.diag[i] * d;
            }
            f
        }
    }

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn value_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        }
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let q = Quadratic {
            diag: vec![1.0, 10.0, 100.0, 1000.0],
            center: vec![1.0, -2.0, 3.0, -4.0],
        };
        let m = minimize(&q, vec![0.0; 4], &LbfgsParams::default());
        assert!(m.converged(), "{m:?}");
        for (a, b) in m.x.iter().zip(&q.center) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    struct Preconditioned(Quadratic);

    impl Objective for Preconditioned {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            self.0.value_grad(x, grad)
        }
        fn diagonal_curvature(&self) -> Option<Vec<f64>> {
            Some(self.0.diag.clone())
        }
    }

    #[test]
    fn exact_diagonal_curvature_solves_a_separable_quadratic_in_one_step() {
        let q = Quadratic {
            diag: vec![1e-3, 1.0, 1e4, 1e8],
            center: vec![1.0, -2.0, 3.0, -4.0],
        };
        let params = LbfgsParams { grad_tol: 1e-6, ..Default::default() };
        let m = minimize(&Preconditioned(q), vec![0.0; 4], &params);
        assert!(m.converged(), "{m:?}");
        assert_eq!(m.iterations, 1);
    }

    #[test]
    fn rosenbrock() {
        let params = LbfgsParams {
            max_iter: 1000,
            grad_tol: 1e-8,
            memory: 10,
        };
        let m = minimize(&Rosenbrock, vec![-1.2, 1.0], &params);
        assert!(m.converged(), "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn respects_iteration_budget() {
        let params = LbfgsParams {
            max_iter: 3,
            grad_tol: 0.0,
            memory: 5,
        };
        let m = minimize(&Rosenbrock, vec![-1.2, 1.0], &params);
        assert_eq!(m.iterations, 3);
        assert_eq!(m.stop, StopReason::MaxIterations);
    }
}
