//! BFGS with a strong-Wolfe line search.

use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BfgsConfig {
    /// Stop once the gradient's Euclidean norm falls to this value.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-6, max_iter: 10_000, c1: 1e-4, c2: 0.9, max_line_search: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    /// No step satisfying the Wolfe conditions, even along steepest descent.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    /// Objective at the start and after every iteration.
    pub trajectory: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Probe {
    alpha: f64,
    f: f64,
    d: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

struct Objective<'a, F> {
    f: &'a mut F,
    evals: usize,
}

impl<F> Objective<'_, F>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evals += 1;
        let (f, g) = (self.f)(x)?;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(QidaError::Divergence(format!("objective not finite after {} evaluations", self.evals)));
        }
        Ok((f, g))
    }

    fn probe(&mut self, x0: &[f64], p: &[f64], alpha: f64) -> Result<Probe> {
        let x: Vec<f64> = x0.iter().zip(p).map(|(a, b)| a + alpha * b).collect();
        let (f, g) = self.eval(&x)?;
        Ok(Probe { alpha, f, d: dot(&g, p), x, g })
    }
}

fn cubic_min(a: &Probe, b: &Probe) -> Option<f64> {
    let d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.d * b.d;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let t = b.alpha - (b.alpha - a.alpha) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Strong-Wolfe line search (bracketing followed by zoom).
fn line_search<F>(obj: &mut Objective<'_, F>, x0: &[f64], f0: f64, d0: f64, p: &[f64], cfg: &BfgsConfig, alpha0: f64) -> Result<Option<Probe>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let start = Probe { alpha: 0.0, f: f0, d: d0, x: Vec::new(), g: Vec::new() };
    let mut prev = start;
    let mut alpha = alpha0;
    for i in 0..cfg.max_line_search {
        let cur = obj.probe(x0, p, alpha)?;
        if cur.f > f0 + cfg.c1 * alpha * d0 || (i > 0 && cur.f >= prev.f) {
            return zoom(obj, x0, f0, d0, p, cfg, prev, cur);
        }
        if cur.d.abs() <= -cfg.c2 * d0 {
            return Ok(Some(cur));
        }
        if cur.d >= 0.0 {
            return zoom(obj, x0, f0, d0, p, cfg, cur, prev);
        }
        prev = cur;
        alpha *= 2.0;
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn zoom<F>(obj: &mut Objective<'_, F>, x0: &[f64], f0: f64, d0: f64, p: &[f64], cfg: &BfgsConfig, mut lo: Probe, mut hi: Probe) -> Result<Option<Probe>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    for _ in 0..cfg.max_line_search {
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width < 1e-16 * b.max(1.0) {
            break;
        }
        let mut t = cubic_min(&lo, &hi).unwrap_or(0.5 * (a + b));
        if !(t > a + 0.1 * width && t < b - 0.1 * width) {
            t = 0.5 * (a + b);
        }
        let cur = obj.probe(x0, p, t)?;
        if cur.f > f0 + cfg.c1 * t * d0 || cur.f >= lo.f {
            hi = cur;
        } else {
            if cur.d.abs() <= -cfg.c2 * d0 {
                return Ok(Some(cur));
            }
            if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // fall back to the best sufficient-decrease point found, if any
    Ok((lo.alpha > 0.0 && lo.f < f0).then_some(lo))
}

/// Minimizes `f` (returning value and gradient) from `x0`.
pub fn bfgs<F>(mut f: F, x0: &[f64], cfg: &BfgsConfig) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    bfgs_observed(&mut f, x0, cfg, |_, _| {})
}

/// As [`bfgs`], calling `observe(iteration, f)` after every accepted step.
pub fn bfgs_observed<F, O>(f: &mut F, x0: &[f64], cfg: &BfgsConfig, mut observe: O) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    O: FnMut(usize, f64),
{
    if !(cfg.grad_tol > 0.0) || !(0.0 < cfg.c1 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0) {
        return Err(QidaError::Invalid("BFGS tolerances out of range".into()));
    }
    let n = x0.len();
    let mut obj = Objective { f, evals: 0 };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = obj.eval(&x)?;
    let mut trajectory = vec![fx];
    observe(0, fx);
    if n == 0 {
        return Ok(BfgsResult { x, f: fx, grad_norm: 0.0, iterations: 0, evaluations: obj.evals, stop: StopReason::GradientTolerance, trajectory });
    }
    // inverse Hessian approximation, row major
    let mut hinv = identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;

    while iterations < cfg.max_iter {
        if norm(&g) <= cfg.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        let mut p = matvec(&hinv, &g, n);
        p.iter_mut().for_each(|v| *v = -*v);
        let mut d0 = dot(&g, &p);
        if d0 >= 0.0 || !d0.is_finite() {
            hinv = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            d0 = dot(&g, &p);
        }
        let alpha0 = if fresh { (1.0 / norm(&g)).min(1.0) } else { 1.0 };
        let step = match line_search(&mut obj, &x, fx, d0, &p, cfg, alpha0)? {
            Some(s) => s,
            None if !fresh => {
                hinv = identity(n);
                fresh = true;
                continue;
            }
            None => {
                stop = StopReason::LineSearchFailed;
                break;
            }
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dot(&y, &y);
                hinv.iter_mut().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut hinv, &s, &y, sy, n);
            fresh = false;
        }
        x = step.x;
        fx = step.f;
        g = step.g;
        iterations += 1;
        trajectory.push(fx);
        observe(iterations, fx);
    }
    if iterations >= cfg.max_iter && norm(&g) <= cfg.grad_tol {
        stop = StopReason::GradientTolerance;
    }
    Ok(BfgsResult { grad_norm: norm(&g), x, f: fx, iterations, evaluations: obj.evals, stop, trajectory })
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    (0..n).for_each(|i| m[i * n + i] = 1.0);
    m
}

fn matvec(m: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T` with `r = 1 / (y^T s)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let r = 1.0 / sy;
    let hy = matvec(h, y, n);
    let yhy = dot(y, &hy);
    let c = (1.0 + r * yhy) * r;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += c * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    }

    #[test]
    fn rosenbrock_minimum() {
        let r = bfgs(rosenbrock, &[-1.2, 1.0], &BfgsConfig::default()).unwrap();
        assert_eq!(r.stop, StopReason::GradientTolerance);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
        assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_in_few_steps() {
        let q = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let f = x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v * v).sum();
            Ok((f, x.iter().enumerate().map(|(i, v)| 2.0 * (i as f64 + 1.0) * v).collect()))
        };
        let r = bfgs(q, &[1.0; 5], &BfgsConfig::default()).unwrap();
        assert!(r.f < 1e-12);
        assert!(r.iterations < 30);
    }

    #[test]
    fn cosine_minimum() {
        let r = bfgs(|x: &[f64]| Ok((x[0].cos(), vec![-x[0].sin()])), &[0.1], &BfgsConfig::default()).unwrap();
        assert!((r.f + 1.0).abs() < 1e-10);
        assert!((r.x[0] - std::f64::consts::PI).abs() < 1e-5);
    }

    #[test]
    fn empty_problem() {
        let r = bfgs(|_: &[f64]| Ok((2.5, vec![])), &[], &BfgsConfig::default()).unwrap();
        assert_eq!((r.f, r.iterations), (2.5, 0));
    }

    #[test]
    fn divergence_is_reported() {
        let r = bfgs(|x: &[f64]| Ok((f64::NAN, vec![x[0]])), &[1.0], &BfgsConfig::default());
        assert!(matches!(r, Err(QidaError::Divergence(_))));
    }
}
