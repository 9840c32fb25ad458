//! Gauss–Jacobi rules and a geometrically graded composite rule for
//! integrands carrying algebraic edge weights and nearby singularities.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Nodes per panel of the composite rule.
pub(crate) const PANEL_NODES: usize = 16;

/// Deepest geometric refinement towards an edge; 2^-60 of the half width is
/// below double precision resolution for any sensible support.
const MAX_GRADING: u32 = 60;

/// A Gauss rule on [-1, 1] for the weight (1-u)^alpha (1+u)^beta.
#[derive(Debug, Clone)]
pub(crate) struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Golub–Welsch construction from the three-term recurrence of the
    /// monic Jacobi polynomials.
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> GaussRule {
        assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
        let ab = alpha + beta;
        let diag = (0..n).map(|k| {
            if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                let k = k as f64;
                (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
            }
        });
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let b = if k == 1 {
                    4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
                } else {
                    let k = k as f64;
                    let s = 2.0 * k + ab;
                    4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
                };
                b.sqrt()
            })
            .collect();

        let mut jac = DMatrix::<f64>::zeros(n, n);
        for (k, d) in diag.enumerate() {
            jac[(k, k)] = d;
        }
        for (k, &o) in off.iter().enumerate() {
            jac[(k, k + 1)] = o;
            jac[(k + 1, k)] = o;
        }

        let mu0 =
            ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
                - ln_gamma(ab + 2.0))
            .exp();
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

type RuleKey = (usize, u64, u64);

/// Cached rule lookup; rules are immutable once built.
pub(crate) fn jacobi_rule(n: usize, alpha: f64, beta: f64) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    let key = (n, alpha.to_bits(), beta.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(GaussRule::jacobi(n, alpha, beta));
    cache.lock().unwrap().insert(key, rule.clone());
    rule
}

pub(crate) fn legendre_rule(n: usize) -> Arc<GaussRule> {
    jacobi_rule(n, 0.0, 0.0)
}

/// Algebraic weight (x-a)^p (b-x)^q on [a, b].
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeWeight {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
}

impl EdgeWeight {
    #[cfg(test)]
    pub fn plain(a: f64, b: f64) -> EdgeWeight {
        EdgeWeight {
            a,
            b,
            p: 0.0,
            q: 0.0,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let l = if self.p == 0.0 {
            1.0
        } else {
            (x - self.a).powf(self.p)
        };
        let r = if self.q == 0.0 {
            1.0
        } else {
            (self.b - x).powf(self.q)
        };
        l * r
    }
}

fn grading_depth(half: f64, gap: f64, scale: f64) -> u32 {
    if !(gap < half) {
        return 0;
    }
    // The innermost node of an edge panel sits at ~1/200 of its width, which
    // must stay well above the resolution of the edge coordinate.
    let floor = 1024.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let cap = ((half / floor).log2().floor().max(1.0) as u32).min(MAX_GRADING);
    if gap <= 0.0 {
        return cap;
    }
    ((half / gap).log2().ceil() as u32).clamp(1, cap)
}

/// Integrand values: scalars, or several integrands sharing one set of nodes.
pub(crate) trait Value: Copy {
    const ZERO: Self;
    /// self + w x
    fn add_scaled(self, w: f64, x: Self) -> Self;
    fn is_finite(self) -> bool;
}

impl Value for f64 {
    const ZERO: f64 = 0.0;
    fn add_scaled(self, w: f64, x: f64) -> f64 {
        self + w * x
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Value for [f64; 2] {
    const ZERO: [f64; 2] = [0.0; 2];
    fn add_scaled(self, w: f64, x: [f64; 2]) -> [f64; 2] {
        [self[0] + w * x[0], self[1] + w * x[1]]
    }
    fn is_finite(self) -> bool {
        self[0].is_finite() && self[1].is_finite()
    }
}

/// Integrates `w(x) f(x)` over [a, b].
///
/// `left_gap` / `right_gap` are the distances from the respective edge to the
/// nearest singularity of `f` outside the interval (use `f64::INFINITY` when
/// there is none). Panels shrink geometrically towards an edge until they are
/// no wider than the gap, so every panel sees its nearest singularity at a
/// fixed relative distance.
pub(crate) fn integrate_weighted<T: Value, F: Fn(f64) -> T>(
    w: EdgeWeight,
    f: F,
    left_gap: f64,
    right_gap: f64,
) -> T {
    let EdgeWeight { a, b, p, q } = w;
    if b <= a {
        return T::ZERO;
    }
    let half = 0.5 * (b - a);
    let scale = a.abs().max(b.abs());
    let jl = grading_depth(half, left_gap, scale);
    let jr = grading_depth(half, right_gap, scale);

    let mut total = T::ZERO;

    // Panel touching the left edge: the (x-a)^p factor goes into the rule.
    let first = a + half * 0.5f64.powi(jl as i32);
    {
        let rule = jacobi_rule(PANEL_NODES, 0.0, p);
        let width = first - a;
        let scale = (0.5 * width).powf(p + 1.0);
        let mut acc = T::ZERO;
        for (u, wt) in rule.nodes.iter().zip(&rule.weights) {
            let x = a + 0.5 * width * (1.0 + u);
            let r = if q == 0.0 { 1.0 } else { (b - x).powf(q) };
            acc = acc.add_scaled(wt * r, f(x));
        }
        total = total.add_scaled(scale, acc);
    }
    let gl = legendre_rule(PANEL_NODES);
    let mut smooth_panel = |lo: f64, hi: f64| {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut acc = T::ZERO;
        for (u, wt) in gl.nodes.iter().zip(&gl.weights) {
            let x = c + h * u;
            acc = acc.add_scaled(wt * w.eval(x), f(x));
        }
        total = total.add_scaled(h, acc);
    };
    for j in (1..=jl).rev() {
        let lo = a + half * 0.5f64.powi(j as i32);
        let hi = a + half * 0.5f64.powi(j as i32 - 1);
        smooth_panel(lo, hi);
    }
    for j in 1..=jr {
        let hi = b - half * 0.5f64.powi(j as i32);
        let lo = b - half * 0.5f64.powi(j as i32 - 1);
        smooth_panel(lo, hi);
    }
    // The loops above cover [first, mid] and [mid, last]; when there is no
    // grading on a side the half-interval is handled by the edge panel alone.
    let last = b - half * 0.5f64.powi(jr as i32);
    {
        let rule = jacobi_rule(PANEL_NODES, q, 0.0);
        let width = b - last;
        let scale = (0.5 * width).powf(q + 1.0);
        let mut acc = T::ZERO;
        for (u, wt) in rule.nodes.iter().zip(&rule.weights) {
            let x = last + 0.5 * width * (1.0 + u);
            let l = if p == 0.0 { 1.0 } else { (x - a).powf(p) };
            acc = acc.add_scaled(wt * l, f(x));
        }
        total = total.add_scaled(scale, acc);
    }
    total
}

/// Smooth integrand on [lo, hi] with optional grading towards either end.
#[cfg(test)]
pub(crate) fn integrate_graded<F: Fn(f64) -> f64>(
    lo: f64,
    hi: f64,
    f: F,
    left_gap: f64,
    right_gap: f64,
) -> f64 {
    if hi < lo {
        return -integrate_graded(hi, lo, f, right_gap, left_gap);
    }
    integrate_weighted(EdgeWeight::plain(lo, hi), f, left_gap, right_gap)
}

/// Euler Beta function B(x, y) for x, y > 0.
pub(crate) fn beta_fn(x: f64, y: f64) -> f64 {
    (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = legendre_rule(8);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // int_{-1}^{1} u^14 du = 2/15
        let v: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(u, w)| w * u.powi(14))
            .sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weights_sum_to_mu0() {
        for &(a, b) in &[(0.5, 0.5), (-0.5, 0.5), (0.0, 2.5), (-0.9, 0.3)] {
            let rule = GaussRule::jacobi(12, a, b);
            let s: f64 = rule.weights.iter().sum();
            let mu0 = 2f64.powf(a + b + 1.0) * beta_fn(a + 1.0, b + 1.0);
            assert!((s - mu0).abs() < 1e-13 * mu0, "{a} {b}: {s} vs {mu0}");
        }
    }

    #[test]
    fn weighted_integral_with_edge_exponents() {
        // int_0^1 x^p (1-x)^q dx = B(p+1, q+1)
        for &(p, q) in &[(0.5, 0.5), (-0.5, 0.5), (2.0, -0.3), (0.0, 0.0)] {
            let v = integrate_weighted(
                EdgeWeight {
                    a: 0.0,
                    b: 1.0,
                    p,
                    q,
                },
                |_| 1.0,
                f64::INFINITY,
                f64::INFINITY,
            );
            assert!((v - beta_fn(p + 1.0, q + 1.0)).abs() < 1e-13, "{p} {q}");
        }
    }

    #[test]
    fn grading_resolves_near_singularity() {
        // int_0^1 dx / (x + d) = log((1 + d) / d)
        for &d in &[1.0, 1e-3, 1e-8, 1e-13] {
            let v = integrate_graded(0.0, 1.0, |x| 1.0 / (x + d), d, f64::INFINITY);
            let exact = ((1.0 + d) / d).ln();
            assert!((v - exact).abs() < 1e-12 * exact, "{d}: {v} vs {exact}");
        }
    }
}
