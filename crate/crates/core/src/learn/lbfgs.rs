//! Limited-memory BFGS with a strong Wolfe line search, phrased as a
//! maximizer (the concave training objective is negated internally). The
//! evaluation budget counts every objective/gradient computation, matching
//! the training contract's cap on gradient evaluations.

use std::collections::VecDeque;

use crate::error::Result;

/// Optimizer knobs.
#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    /// Number of (s, y) pairs kept for the inverse-Hessian estimate.
    pub history: usize,
    /// Hard cap on objective/gradient evaluations; 0 returns the start
    /// point untouched.
    pub max_evals: u32,
    /// Stop when the gradient infinity-norm falls below this.
    pub grad_tol: f64,
}

/// One evaluation record, for the training log.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IterRecord {
    pub eval: u32,
    pub objective: f64,
    pub grad_norm: f64,
}

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_LINE_SEARCH_STEPS: usize = 20;

struct Budget<'a, F> {
    eval: &'a mut F,
    used: u32,
    cap: u32,
    log: Vec<IterRecord>,
}

impl<F> Budget<'_, F>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    /// Evaluates the negated (minimization) objective, or `None` when the
    /// budget is spent.
    fn call(&mut self, x: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
        if self.used >= self.cap {
            return Ok(None);
        }
        self.used += 1;
        let (value, mut grad) = (self.eval)(x)?;
        self.log.push(IterRecord {
            eval: self.used,
            objective: value,
            grad_norm: inf_norm(&grad),
        });
        for g in &mut grad {
            *g = -*g;
        }
        Ok(Some((-value, grad)))
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes a concave objective from `x0`. `eval` returns the objective
/// value and gradient (of the maximization problem). Deterministic: same
/// inputs, same output.
pub fn maximize<F>(
    mut eval: F,
    x0: Vec<f64>,
    options: LbfgsOptions,
) -> Result<(Vec<f64>, Vec<IterRecord>)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut budget = Budget { eval: &mut eval, used: 0, cap: options.max_evals, log: Vec::new() };
    let mut x = x0;
    let Some((mut f, mut g)) = budget.call(&x)? else {
        let log = budget.log;
        return Ok((x, log));
    };
    let n = x.len();
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    'outer: while inf_norm(&g) >= options.grad_tol {
        // Two-loop recursion for the search direction d = -H g.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * dot(s, &d);
            for i in 0..n {
                d[i] -= alpha * y[i];
            }
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            if gamma.is_finite() && gamma > 0.0 {
                for v in &mut d {
                    *v *= gamma;
                }
            }
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * dot(y, &d);
            for i in 0..n {
                d[i] += s[i] * (alpha - beta);
            }
        }
        let mut dg = dot(&d, &g);
        if dg >= 0.0 {
            // Not a descent direction (numerical trouble): fall back.
            d = g.iter().map(|v| -v).collect();
            dg = -dot(&g, &g);
            if dg == 0.0 {
                break;
            }
        }

        // Strong Wolfe line search (bracket + zoom).
        let probe = |budget: &mut Budget<'_, F>, alpha: f64| -> Result<Option<(f64, Vec<f64>, f64)>> {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            Ok(budget.call(&trial)?.map(|(ft, gt)| {
                let slope = dot(&gt, &d);
                (ft, gt, slope)
            }))
        };
        let mut alpha_prev = 0.0;
        let mut f_prev = f;
        let mut alpha = 1.0;
        let mut accepted: Option<(f64, f64, Vec<f64>)> = None;
        let mut bracket: Option<(f64, f64, f64, f64)> = None; // lo, f_lo, hi, f_hi
        for i in 0..MAX_LINE_SEARCH_STEPS {
            let Some((ft, gt, slope)) = probe(&mut budget, alpha)? else { break 'outer };
            if ft > f + WOLFE_C1 * alpha * dg || (i > 0 && ft >= f_prev) {
                bracket = Some((alpha_prev, f_prev, alpha, ft));
                break;
            }
            if slope.abs() <= -WOLFE_C2 * dg {
                accepted = Some((alpha, ft, gt));
                break;
            }
            if slope >= 0.0 {
                bracket = Some((alpha, ft, alpha_prev, f_prev));
                break;
            }
            alpha_prev = alpha;
            f_prev = ft;
            alpha *= 2.0;
        }
        if accepted.is_none() {
            if let Some((mut lo, mut f_lo, mut hi, mut f_hi)) = bracket {
                for _ in 0..MAX_LINE_SEARCH_STEPS {
                    let mid = 0.5 * (lo + hi);
                    let Some((fm, gm, slope)) = probe(&mut budget, mid)? else { break 'outer };
                    if fm > f + WOLFE_C1 * mid * dg || fm >= f_lo {
                        hi = mid;
                        f_hi = fm;
                    } else {
                        if slope.abs() <= -WOLFE_C2 * dg {
                            accepted = Some((mid, fm, gm));
                            break;
                        }
                        if slope * (hi - lo) >= 0.0 {
                            hi = lo;
                            f_hi = f_lo;
                        }
                        lo = mid;
                        f_lo = fm;
                    }
                    if (hi - lo).abs() < 1e-16 {
                        break;
                    }
                }
                let _ = f_hi;
            }
        }
        let Some((alpha, f_new, g_new)) = accepted else {
            // Line search exhausted without a Wolfe point; stop rather than
            // accept a non-improving step.
            break;
        };

        let x_new: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == options.history {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    Ok((x, budget.log))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Concave quadratic: f(x) = -(x - t)'A(x - t) with diagonal A.
    fn quadratic(target: Vec<f64>, scale: Vec<f64>) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)> {
        move |x: &[f64]| {
            let mut value = 0.0;
            let mut grad = vec![0.0; x.len()];
            for i in 0..x.len() {
                let d = x[i] - target[i];
                value -= scale[i] * d * d;
                grad[i] = -2.0 * scale[i] * d;
            }
            Ok((value, grad))
        }
    }

    #[test]
    fn maximizes_quadratic() {
        let target = vec![1.5, -2.0, 0.25];
        let eval = quadratic(target.clone(), vec![1.0, 3.0, 0.5]);
        let options = LbfgsOptions { history: 10, max_evals: 100, grad_tol: 1e-10 };
        let (x, log) = maximize(eval, vec![0.0; 3], options).unwrap();
        for (a, b) in x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "{x:?}");
        }
        // Objective values along accepted steps never decrease by more than
        // line-search exploration; the last is the best.
        assert!(log.last().unwrap().objective >= log.first().unwrap().objective);
    }

    #[test]
    fn zero_budget_returns_start() {
        let eval = quadratic(vec![5.0], vec![1.0]);
        let options = LbfgsOptions { history: 10, max_evals: 0, grad_tol: 1e-10 };
        let (x, log) = maximize(eval, vec![0.0], options).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!(log.is_empty());
    }

    #[test]
    fn budget_caps_evaluations() {
        let mut calls = 0u32;
        let eval = |x: &[f64]| {
            calls += 1;
            Ok((-(x[0] - 3.0) * (x[0] - 3.0), vec![-2.0 * (x[0] - 3.0)]))
        };
        let options = LbfgsOptions { history: 5, max_evals: 7, grad_tol: 0.0 };
        let (_, log) = maximize(eval, vec![0.0], options).unwrap();
        assert!(log.len() <= 7);
        assert_eq!(log.len() as u32, calls);
    }

    #[test]
    fn deterministic_across_runs() {
        let run = || {
            let eval = quadratic(vec![0.3, 0.7, -1.1, 2.2], vec![2.0, 0.1, 5.0, 1.0]);
            let options = LbfgsOptions { history: 3, max_evals: 40, grad_tol: 1e-12 };
            maximize(eval, vec![0.0; 4], options).unwrap().0
        };
        assert_eq!(run(), run());
    }
}
