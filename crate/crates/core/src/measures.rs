//! Compactly supported probability measures on the real line and
//! integration of functionals against them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{beta_fn, integrate_weighted, EdgeWeight, Value};

/// Largest admissible deviation of the total mass from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A validated, compactly supported probability measure.
///
/// Construct through [`Measure::semicircle`], [`Measure::marchenko_pastur`],
/// [`Measure::atomic`], [`Measure::jacobi`] or by deserializing the JSON
/// measure schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpec", into = "MeasureSpec")]
pub enum Measure {
    Atomic(Atoms),
    /// Semicircle law on [-2 beta, 2 beta].
    Semicircle {
        beta: f64,
    },
    /// Marchenko–Pastur law with parameter beta: mean beta, support
    /// [(1 - sqrt beta)^2, (1 + sqrt beta)^2] plus an atom of mass
    /// max(1 - beta, 0) at the origin.
    MarchenkoPastur {
        beta: f64,
    },
    Jacobi(JacobiDensity),
}

/// Finitely many atoms, locations strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Atoms {
    atoms: Vec<(f64, f64)>,
}

impl Atoms {
    pub fn as_slice(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Density c (x-a)^p (b-x)^q on [a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiDensity {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl JacobiDensity {
    /// Normalizing constant of the weight (x-a)^p (b-x)^q.
    pub fn normalizer(a: f64, b: f64, p: f64, q: f64) -> f64 {
        1.0 / ((b - a).powf(p + q + 1.0) * beta_fn(p + 1.0, q + 1.0))
    }
}

/// Closed support hull [supp_-, supp_+].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub lower: f64,
    pub upper: f64,
}

impl SupportInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// On-disk / command-line representation of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Semicircle {
        beta: f64,
    },
    MarchenkoPastur {
        beta: f64,
    },
    Atomic {
        atoms: Vec<[f64; 2]>,
    },
    Jacobi {
        a: f64,
        b: f64,
        p: f64,
        q: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
}

impl TryFrom<MeasureSpec> for Measure {
    type Error = Error;

    fn try_from(spec: MeasureSpec) -> Result<Measure> {
        match spec {
            MeasureSpec::Semicircle { beta } => Measure::semicircle(beta),
            MeasureSpec::MarchenkoPastur { beta } => Measure::marchenko_pastur(beta),
            MeasureSpec::Atomic { atoms } => {
                Measure::atomic(atoms.iter().map(|a| (a[0], a[1])).collect())
            }
            MeasureSpec::Jacobi { a, b, p, q, c } => {
                let m = Measure::jacobi(a, b, p, q)?;
                if let (Some(c), Measure::Jacobi(d)) = (c, &m) {
                    if !(c.is_finite() && (c / d.c - 1.0).abs() <= MASS_TOLERANCE) {
                        return Err(Error::InvalidMeasure(format!(
                            "jacobi constant c = {c} gives total mass {} (expected c = {})",
                            c / d.c,
                            d.c
                        )));
                    }
                }
                Ok(m)
            }
        }
    }
}

impl From<Measure> for MeasureSpec {
    fn from(m: Measure) -> MeasureSpec {
        match m {
            Measure::Semicircle { beta } => MeasureSpec::Semicircle { beta },
            Measure::MarchenkoPastur { beta } => MeasureSpec::MarchenkoPastur { beta },
            Measure::Atomic(atoms) => MeasureSpec::Atomic {
                atoms: atoms.atoms.iter().map(|&(x, w)| [x, w]).collect(),
            },
            Measure::Jacobi(d) => MeasureSpec::Jacobi {
                a: d.a,
                b: d.b,
                p: d.p,
                q: d.q,
                c: None,
            },
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Measure> {
        serde_json::from_str(s).map_err(|e| {
            let msg = e.to_string();
            Error::InvalidMeasure(
                msg.strip_prefix("invalid measure: ")
                    .unwrap_or(&msg)
                    .to_string(),
            )
        })
    }
}

/// Continuous part: density `c * weight(x)`, times 1/x when `inv_x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Continuous {
    pub weight: EdgeWeight,
    pub c: f64,
    pub inv_x: bool,
}

impl Continuous {
    fn density_factor(&self, x: f64) -> f64 {
        if self.inv_x {
            self.c / x
        } else {
            self.c
        }
    }
}

fn positive_param(name: &str, beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidMeasure(format!(
            "{name} requires beta > 0, got {beta}"
        )))
    }
}

impl Measure {
    pub fn semicircle(beta: f64) -> Result<Measure> {
        positive_param("semicircle", beta)?;
        Ok(Measure::Semicircle { beta })
    }

    pub fn marchenko_pastur(beta: f64) -> Result<Measure> {
        positive_param("marchenko_pastur", beta)?;
        Ok(Measure::MarchenkoPastur { beta })
    }

    /// Point mass at `x`.
    pub fn delta(x: f64) -> Result<Measure> {
        Measure::atomic(vec![(x, 1.0)])
    }

    /// Atoms as (location, weight) pairs; sorted on construction.
    pub fn atomic(mut atoms: Vec<(f64, f64)>) -> Result<Measure> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure(
                "atomic measure needs at least one atom".into(),
            ));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "atom location {x} is not finite"
                )));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom weight {w} not in (0, 1]"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidMeasure(
                "atom locations must be distinct".into(),
            ));
        }
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!(
                "atom weights sum to {mass}, expected 1"
            )));
        }
        Ok(Measure::Atomic(Atoms { atoms }))
    }

    /// Normalized density proportional to (x-a)^p (b-x)^q on [a, b].
    pub fn jacobi(a: f64, b: f64, p: f64, q: f64) -> Result<Measure> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMeasure(format!(
                "jacobi needs finite a < b, got [{a}, {b}]"
            )));
        }
        if !(p > -1.0 && q > -1.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "jacobi exponents must exceed -1, got p={p}, q={q}"
            )));
        }
        let c = JacobiDensity::normalizer(a, b, p, q);
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidMeasure(
                "jacobi normalization overflowed".into(),
            ));
        }
        Ok(Measure::Jacobi(JacobiDensity { a, b, p, q, c }))
    }

    pub fn support(&self) -> SupportInterval {
        match self {
            Measure::Atomic(a) => SupportInterval {
                lower: a.atoms[0].0,
                upper: a.atoms[a.atoms.len() - 1].0,
            },
            Measure::Semicircle { beta } => SupportInterval {
                lower: -2.0 * beta,
                upper: 2.0 * beta,
            },
            Measure::MarchenkoPastur { beta } => {
                let s = beta.sqrt();
                let lower = if *beta < 1.0 { 0.0 } else { (1.0 - s).powi(2) };
                SupportInterval {
                    lower,
                    upper: (1.0 + s).powi(2),
                }
            }
            Measure::Jacobi(d) => SupportInterval {
                lower: d.a,
                upper: d.b,
            },
        }
    }

    /// A single point mass.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Measure::Atomic(a) if a.atoms.len() == 1)
    }

    pub(crate) fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Measure::Atomic(a) => a.atoms.clone(),
            Measure::MarchenkoPastur { beta } if *beta < 1.0 => vec![(0.0, 1.0 - beta)],
            _ => Vec::new(),
        }
    }

    pub(crate) fn continuous(&self) -> Option<Continuous> {
        match *self {
            Measure::Atomic(_) => None,
            Measure::Semicircle { beta } => Some(Continuous {
                weight: EdgeWeight {
                    a: -2.0 * beta,
                    b: 2.0 * beta,
                    p: 0.5,
                    q: 0.5,
                },
                c: 1.0 / (2.0 * PI * beta * beta),
                inv_x: false,
            }),
            Measure::MarchenkoPastur { beta } => {
                let s = beta.sqrt();
                let (lo, hi) = ((1.0 - s).powi(2), (1.0 + s).powi(2));
                if beta == 1.0 {
                    // sqrt(x (4 - x)) / (2 pi x) = x^{-1/2} (4 - x)^{1/2} / (2 pi)
                    Some(Continuous {
                        weight: EdgeWeight {
                            a: 0.0,
                            b: 4.0,
                            p: -0.5,
                            q: 0.5,
                        },
                        c: 1.0 / (2.0 * PI),
                        inv_x: false,
                    })
                } else {
                    Some(Continuous {
                        weight: EdgeWeight {
                            a: lo,
                            b: hi,
                            p: 0.5,
                            q: 0.5,
                        },
                        c: 1.0 / (2.0 * PI),
                        inv_x: true,
                    })
                }
            }
            Measure::Jacobi(d) => Some(Continuous {
                weight: EdgeWeight {
                    a: d.a,
                    b: d.b,
                    p: d.p,
                    q: d.q,
                },
                c: d.c,
                inv_x: false,
            }),
        }
    }

    /// Integrates a function that is smooth on a neighbourhood of the support.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.integrate_graded(f, f64::INFINITY, f64::INFINITY)
    }

    /// Integrates `f` whose only singularity is at `pole`, which must lie
    /// outside the open support hull. A pole exactly at an edge of a
    /// continuous part is allowed when the singularity is integrable
    /// against the edge behaviour of the density.
    pub fn integrate_near<F: Fn(f64) -> f64>(&self, f: F, pole: f64) -> Result<f64> {
        self.integrate_near_with(f, pole)
    }

    pub(crate) fn integrate_near_with<T: Value, F: Fn(f64) -> T>(
        &self,
        f: F,
        pole: f64,
    ) -> Result<T> {
        let supp = self.support();
        if pole > supp.lower && pole < supp.upper {
            return Err(Error::NonIntegrable(format!(
                "singular point {pole} inside the support ({}, {})",
                supp.lower, supp.upper
            )));
        }
        let (left, right) = if pole <= supp.lower {
            (supp.lower - pole, f64::INFINITY)
        } else {
            (f64::INFINITY, pole - supp.upper)
        };
        self.integrate_graded(f, left, right)
    }

    fn integrate_graded<T: Value, F: Fn(f64) -> T>(
        &self,
        f: F,
        left_gap: f64,
        right_gap: f64,
    ) -> Result<T> {
        let mut total = T::ZERO;
        for (x, w) in self.atoms() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonIntegrable(format!(
                    "integrand is not finite at the atom {x}"
                )));
            }
            total = total.add_scaled(w, v);
        }
        if let Some(cont) = self.continuous() {
            let mut lg = left_gap;
            let rg = right_gap;
            if cont.inv_x {
                // 1/x pole of the Marchenko–Pastur density at the origin
                lg = lg.min(cont.weight.a);
            }
            let df = |x: f64| T::ZERO.add_scaled(cont.density_factor(x), f(x));
            total = total.add_scaled(1.0, integrate_weighted(cont.weight, df, lg, rg));
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::NonIntegrable("integral is not finite".into()))
        }
    }

    /// k-th raw moment.
    pub fn moment(&self, k: u32) -> f64 {
        match self {
            Measure::MarchenkoPastur { beta } => narayana_moment(k, *beta),
            Measure::Semicircle { beta } => semicircle_moment(k, *beta),
            _ => self.moment_about(k, 0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// k-th moment of x - center.
    pub fn moment_about(&self, k: u32, center: f64) -> f64 {
        match self {
            Measure::Atomic(a) => a
                .atoms
                .iter()
                .map(|&(x, w)| w * (x - center).powi(k as i32))
                .sum(),
            Measure::Semicircle { beta } => {
                binomial_shift(k, center, |j| semicircle_moment(j, *beta))
            }
            Measure::MarchenkoPastur { beta } => {
                binomial_shift(k, center, |j| narayana_moment(j, *beta))
            }
            Measure::Jacobi(d) => {
                // x - center = (a - center) + (b - a) t with t ~ Beta(p + 1, q + 1)
                let off = d.a - center;
                let w = d.b - d.a;
                let mut beta_moment = 1.0;
                let mut acc = 0.0;
                for j in 0..=k {
                    if j > 0 {
                        let i = (j - 1) as f64;
                        beta_moment *= (d.p + 1.0 + i) / (d.p + d.q + 2.0 + i);
                    }
                    acc += binom(k, j) * off.powi((k - j) as i32) * w.powi(j as i32) * beta_moment;
                }
                acc
            }
        }
    }

    /// Cumulative distribution function, right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut total: f64 = self.atoms().iter().filter(|a| a.0 <= x).map(|a| a.1).sum();
        if let Some(cont) = self.continuous() {
            let EdgeWeight { a, b, p, q } = cont.weight;
            if x >= b {
                total += 1.0 - self.atoms().iter().map(|a| a.1).sum::<f64>();
            } else if x > a {
                let lg = if cont.inv_x { a } else { f64::INFINITY };
                total += integrate_weighted(
                    EdgeWeight { a, b: x, p, q: 0.0 },
                    |t| cont.density_factor(t) * (b - t).powf(q),
                    lg,
                    b - x,
                );
            }
        }
        total.clamp(0.0, 1.0)
    }

    /// Generalized inverse of the distribution function: the smallest x with
    /// cdf(x) >= u, for u in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        if let Measure::Atomic(a) = self {
            let mut acc = 0.0;
            for &(x, w) in &a.atoms {
                acc += w;
                if acc >= u - 1e-15 {
                    return x;
                }
            }
            return a.atoms[a.atoms.len() - 1].0;
        }
        let supp = self.support();
        let (mut lo, mut hi) = (supp.lower, supp.upper);
        if self.cdf(lo) >= u {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn binomial_shift<M: Fn(u32) -> f64>(k: u32, center: f64, raw: M) -> f64 {
    (0..=k)
        .map(|j| binom(k, j) * (-center).powi((k - j) as i32) * raw(j))
        .sum()
}

/// Catalan numbers times beta^{2j} for even moments, zero for odd ones.
fn semicircle_moment(k: u32, beta: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let j = k / 2;
    binom(2 * j, j) / (j + 1) as f64 * beta.powi(k as i32)
}

/// Moments of the free Poisson law: sum_j N(k, j) beta^j with Narayana numbers.
fn narayana_moment(k: u32, beta: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (1..=k)
        .map(|j| binom(k, j) * binom(k, j - 1) / k as f64 * beta.powi(j as i32))
        .sum()
}
