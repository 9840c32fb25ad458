//! The Stieltjes transform G(z) = ∫ dμ(λ)/(λ - z) on the real line off the
//! support, its derivatives and edge limits, and its monotone inverse.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::num;
use crate::measures::Measure;
use crate::quadrature::beta_fn;
use crate::rtransform::RTransformReal;

/// Limits of G at the support edges. Infinite limits are stored as
/// `f64::INFINITY` / `f64::NEG_INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesEdgeData {
    /// G(supp_-), in (0, +inf].
    #[serde(serialize_with = "num")]
    pub g_star: f64,
    /// G'(supp_-), in (0, +inf].
    #[serde(serialize_with = "num")]
    pub g_star_prime: f64,
    /// G(supp_+), in [-inf, 0).
    #[serde(serialize_with = "num")]
    pub g_plus: f64,
}

fn check_outside(m: &Measure, z: f64) -> Result<()> {
    let s = m.support();
    if z.is_nan() || s.contains(z) {
        Err(Error::InsideSupport {
            z,
            lower: s.lower,
            upper: s.upper,
        })
    } else {
        Ok(())
    }
}

/// Marchenko–Pastur transform from the quadratic z G^2 + (z - beta + 1) G + 1 = 0,
/// using the cancellation-free root on each side. Returns (G, sqrt of discriminant).
fn mp_value(beta: f64, z: f64, left: bool) -> (f64, f64) {
    let b = z - beta + 1.0;
    let sd = (b * b - 4.0 * z).max(0.0).sqrt();
    let g = if left {
        if b < 0.0 {
            2.0 / (sd - b)
        } else {
            (b + sd) / (-2.0 * z)
        }
    } else {
        -2.0 / (b + sd)
    };
    (g, sd)
}

/// Semicircle transform, stable for large |z|. Returns (G, sqrt(z^2 - 4 beta^2)).
fn sc_value(beta: f64, z: f64) -> (f64, f64) {
    let s = ((z - 2.0 * beta) * (z + 2.0 * beta)).max(0.0).sqrt();
    let g = if z < 0.0 {
        2.0 / (s - z)
    } else {
        -2.0 / (z + s)
    };
    (g, s)
}

/// G(z) for real z outside the closed support hull.
pub fn g_value(m: &Measure, z: f64) -> Result<f64> {
    check_outside(m, z)?;
    Ok(match m {
        Measure::Semicircle { beta } => sc_value(*beta, z).0,
        Measure::MarchenkoPastur { beta } => mp_value(*beta, z, z < m.support().lower).0,
        Measure::Atomic(a) => a.as_slice().iter().map(|&(x, w)| w / (x - z)).sum(),
        Measure::Jacobi(_) => m.integrate_near(|x| 1.0 / (x - z), z)?,
    })
}

/// k-th derivative G^(k)(z) = k! ∫ (x - z)^{-(k+1)} dμ(x), k >= 1.
pub fn g_deriv(m: &Measure, z: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return g_value(m, z);
    }
    check_outside(m, z)?;
    let fact: f64 = (1..=k).map(f64::from).product();
    let e = -(k as i32 + 1);
    match (m, k) {
        (Measure::Semicircle { beta }, 1) => {
            let (g, s) = sc_value(*beta, z);
            // differentiate beta^2 G^2 + z G + 1 = 0
            Ok(if z < 0.0 { g / s } else { -g / s })
        }
        (Measure::MarchenkoPastur { beta }, 1) => {
            let left = z < m.support().lower;
            let (g, sd) = mp_value(*beta, z, left);
            // differentiate z G^2 + (z - beta + 1) G + 1 = 0
            Ok(if left {
                g * (g + 1.0) / sd
            } else {
                -g * (g + 1.0) / sd
            })
        }
        (Measure::Atomic(a), _) => Ok(fact
            * a.as_slice()
                .iter()
                .map(|&(x, w)| w * (x - z).powi(e))
                .sum::<f64>()),
        _ => Ok(fact * m.integrate_near(|x| (x - z).powi(e), z)?),
    }
}

/// (G(z), G'(z)) in one pass.
pub(crate) fn g_and_deriv(m: &Measure, z: f64) -> Result<(f64, f64)> {
    match m {
        Measure::Jacobi(_) => {
            check_outside(m, z)?;
            let [g, d] = m.integrate_near_with(
                |x| {
                    let r = 1.0 / (x - z);
                    [r, r * r]
                },
                z,
            )?;
            Ok((g, d))
        }
        _ => Ok((g_value(m, z)?, g_deriv(m, z, 1)?)),
    }
}

/// Edge limits G(supp_-), G'(supp_-) and G(supp_+).
pub fn edge_data(m: &Measure) -> StieltjesEdgeData {
    let inf = f64::INFINITY;
    match *m {
        Measure::Semicircle { beta } => StieltjesEdgeData {
            g_star: 1.0 / beta,
            g_star_prime: inf,
            g_plus: -1.0 / beta,
        },
        Measure::MarchenkoPastur { beta } => {
            let s = beta.sqrt();
            StieltjesEdgeData {
                // atom at 0 (beta < 1) or x^{-1/2} hard edge (beta = 1)
                g_star: if beta > 1.0 { 1.0 / (s - 1.0) } else { inf },
                g_star_prime: inf,
                g_plus: -1.0 / (1.0 + s),
            }
        }
        Measure::Atomic(_) => StieltjesEdgeData {
            g_star: inf,
            g_star_prime: inf,
            g_plus: f64::NEG_INFINITY,
        },
        Measure::Jacobi(d) => {
            let w = d.b - d.a;
            StieltjesEdgeData {
                g_star: if d.p > 0.0 {
                    d.c * w.powf(d.p + d.q) * beta_fn(d.p, d.q + 1.0)
                } else {
                    inf
                },
                g_star_prime: if d.p > 1.0 {
                    d.c * w.powf(d.p + d.q - 1.0) * beta_fn(d.p - 1.0, d.q + 1.0)
                } else {
                    inf
                },
                g_plus: if d.q > 0.0 {
                    -d.c * w.powf(d.p + d.q) * beta_fn(d.p + 1.0, d.q)
                } else {
                    f64::NEG_INFINITY
                },
            }
        }
    }
}

/// The unique z < supp_- with G(z) = g, for g in (0, G(supp_-)).
pub fn g_inverse(m: &Measure, g: f64) -> Result<f64> {
    let edge = edge_data(m);
    if !(g > 0.0 && g < edge.g_star) {
        return Err(Error::OutOfRange {
            g,
            g_star: edge.g_star,
        });
    }
    invert(m, g, true)
}

/// Inverse on either side of the support: g in (G(supp_+), 0) maps to
/// (supp_+, inf), g in (0, G(supp_-)) to (-inf, supp_-).
pub(crate) fn g_inverse_any(m: &Measure, g: f64) -> Result<f64> {
    let edge = edge_data(m);
    if g > 0.0 && g < edge.g_star {
        invert(m, g, true)
    } else if g < 0.0 && g > edge.g_plus {
        invert(m, g, false)
    } else {
        Err(Error::OutOfRange {
            g,
            g_star: edge.g_star,
        })
    }
}

/// G^{[-1]}(g) = R(-g) - 1/g, the real-analytic extension of the inverse.
pub fn g_inverse_extended(m: &Measure, g: f64) -> Result<f64> {
    if g == 0.0 {
        return Err(Error::OutOfDomain {
            what: "inverse extension",
            value: g,
        });
    }
    let r = RTransformReal::new(m);
    let v = r.r_value(-g).map_err(|_| Error::OutOfDomain {
        what: "inverse extension",
        value: g,
    })?;
    Ok(v - 1.0 / g)
}

/// Safeguarded Newton in u = ln(distance to the edge). G is monotone in u,
/// and the log variable keeps Newton well conditioned where G' blows up at
/// the edge.
fn invert(m: &Measure, g: f64, left: bool) -> Result<f64> {
    let supp = m.support();
    let edge = if left { supp.lower } else { supp.upper };
    let sign = if left { -1.0 } else { 1.0 };
    let at = |u: f64| edge + sign * u.exp();
    // phi(u) = dir * (G(at(u)) - g) is decreasing in u on both sides.
    let dir = if left { 1.0 } else { -1.0 };
    let phi = |u: f64| -> Result<(f64, f64)> {
        let z = at(u);
        let (gv, gd) = g_and_deriv(m, z)?;
        let delta = u.exp();
        // d/du G(edge + sign e^u) = G'(z) * sign * e^u
        Ok((dir * (gv - g), dir * gd * sign * delta))
    };

    let u_min = (f64::EPSILON * edge.abs()).max(1e-300).ln();
    // Asymptotic guess G(z) ~ 1/(mean - z).
    let guess = m.mean() - 1.0 / g;
    let d0 = sign * (guess - edge);
    let mut u = if d0 > 0.0 {
        d0.ln()
    } else {
        (0.5 * supp.width().max(1.0)).ln()
    };
    u = u.max(u_min);

    // Bracket: phi(lo) > 0 > phi(hi).
    let (mut lo, mut hi);
    let (mut f_u, mut d_u) = phi(u)?;
    if f_u == 0.0 {
        return Ok(at(u));
    }
    if f_u > 0.0 {
        lo = u;
        let mut step = 1.0;
        let mut v = u;
        loop {
            v += step;
            step *= 2.0;
            let (fv, _) = phi(v)?;
            if fv <= 0.0 {
                hi = v;
                break;
            }
            lo = v;
            if v > 700.0 {
                return Err(Error::Convergence(format!("could not bracket G^-1({g})")));
            }
        }
    } else {
        hi = u;
        let mut step = 1.0;
        let mut v = u;
        loop {
            v = (v - step).max(u_min);
            step *= 2.0;
            let (fv, _) = phi(v)?;
            if fv >= 0.0 {
                lo = v;
                break;
            }
            hi = v;
            if v <= u_min {
                // g is numerically indistinguishable from the edge value
                return Ok(at(u_min));
            }
        }
    }
    if !(lo <= u && u <= hi) {
        u = 0.5 * (lo + hi);
        (f_u, d_u) = phi(u)?;
    }

    for _ in 0..300 {
        if f_u == 0.0 {
            break;
        }
        if f_u > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let newton = u - f_u / d_u;
        let next = if d_u < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - u).abs();
        if at(next) == at(u) {
            // below the resolution of z
            break;
        }
        u = next;
        (f_u, d_u) = phi(u)?;
        if f_u.abs() <= 2.0 * f64::EPSILON * g.abs()
            || step < 4e-15 * u.abs().max(1.0)
            || hi - lo < 1e-15 * u.abs().max(1.0)
        {
            break;
        }
    }
    Ok(at(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(beta: f64) -> Measure {
        Measure::semicircle(beta).unwrap()
    }

    /// Quadrature of the raw definition, independent of the closed forms.
    fn g_by_quadrature(m: &Measure, z: f64) -> f64 {
        m.integrate_near(|x| 1.0 / (x - z), z).unwrap()
    }

    #[test]
    fn semicircle_closed_form_and_quadrature() {
        assert!((g_value(&sc(1.0), -2.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((g_by_quadrature(&sc(1.0), -2.5) - 0.5).abs() < 1e-13);
        let far = g_value(&sc(1.0), -1e6).unwrap();
        assert!((far - 1e-6).abs() < 1e-17);
        for z in [-7.0, -2.61, 2.7, 9.0] {
            let m = sc(1.3);
            assert!(
                (g_value(&m, z).unwrap() - g_by_quadrature(&m, z)).abs() < 1e-12,
                "{z}"
            );
        }
    }

    #[test]
    fn marchenko_pastur_closed_form_matches_quadrature() {
        for beta in [0.5, 1.0, 2.0] {
            let m = Measure::marchenko_pastur(beta).unwrap();
            let s = m.support();
            for z in [
                s.lower - 3.0,
                s.lower - 0.2,
                s.lower - 1e-3,
                s.upper + 0.1,
                s.upper + 5.0,
            ] {
                let closed = g_value(&m, z).unwrap();
                let quad = g_by_quadrature(&m, z);
                assert!(
                    (closed - quad).abs() < 1e-11 * closed.abs().max(1.0),
                    "beta={beta} z={z}: {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn single_atom() {
        let d = Measure::delta(0.0).unwrap();
        for z in [-3.0, -0.1, 0.4] {
            assert_eq!(g_value(&d, z).unwrap(), -1.0 / z);
        }
        assert_eq!(g_deriv(&d, -1.0, 1).unwrap(), 1.0);
        assert!((g_inverse(&d, 0.25).unwrap() + 4.0).abs() < 1e-14);
    }

    #[test]
    fn inside_support_is_rejected() {
        assert!(matches!(
            g_value(&sc(1.0), 0.5),
            Err(Error::InsideSupport { .. })
        ));
        assert!(matches!(
            g_value(&sc(1.0), -2.0),
            Err(Error::InsideSupport { .. })
        ));
    }

    #[test]
    fn derivative_matches_central_differences() {
        let measures = [
            sc(1.0),
            Measure::marchenko_pastur(0.5).unwrap(),
            Measure::marchenko_pastur(2.0).unwrap(),
            Measure::jacobi(-1.0, 1.0, 0.5, 1.5).unwrap(),
            Measure::atomic(vec![(-1.0, 0.3), (0.5, 0.7)]).unwrap(),
        ];
        for m in &measures {
            let lo = m.support().lower;
            for i in 0..12 {
                let z = lo - 10f64.powf(1.0 - 0.35 * i as f64);
                let h = 1e-4 * (lo - z);
                let fd = (g_value(m, z + h).unwrap() - g_value(m, z - h).unwrap()) / (2.0 * h);
                let d = g_deriv(m, z, 1).unwrap();
                assert!(d > 0.0);
                assert!((fd - d).abs() <= 1e-6 * d.abs(), "{m:?} z={z}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn higher_derivatives_are_positive_left_of_support() {
        let m = Measure::jacobi(0.0, 2.0, 0.3, 0.8).unwrap();
        for k in 1..=4 {
            let a = g_deriv(&m, -0.5, k).unwrap();
            let b = g_deriv(&m, -0.2, k).unwrap();
            assert!(a > 0.0 && b > a, "k={k}");
        }
    }

    #[test]
    fn edge_limits() {
        let e = edge_data(&sc(1.0));
        assert_eq!(e.g_star, 1.0);
        assert_eq!(e.g_star_prime, f64::INFINITY);
        // the closed form approaches 1 as z -> -2
        assert!((g_value(&sc(1.0), -2.0 - 1e-12).unwrap() - 1.0).abs() < 1e-5);
        let two = Measure::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(edge_data(&two).g_star, f64::INFINITY);
        assert_eq!(
            edge_data(&Measure::marchenko_pastur(1.0).unwrap()).g_star,
            f64::INFINITY
        );
        let mp4 = Measure::marchenko_pastur(4.0).unwrap();
        assert!((edge_data(&mp4).g_star - 1.0).abs() < 1e-15);
        assert!((g_value(&mp4, 1.0 - 1e-12).unwrap() - 1.0).abs() < 1e-5);
        // Jacobi edge value against quadrature slightly off the edge
        let j = Measure::jacobi(-1.0, 1.0, 1.5, 0.5).unwrap();
        let e = edge_data(&j);
        assert!((g_value(&j, -1.0 - 1e-9).unwrap() - e.g_star).abs() < 1e-6);
        assert!((g_deriv(&j, -1.0 - 1e-9, 1).unwrap() - e.g_star_prime).abs() < 1e-3);
        // q = 1/2 at the right edge: the approach is like sqrt(distance)
        assert!((g_value(&j, 1.0 + 1e-10).unwrap() - e.g_plus).abs() < 10.0 * 1e-5);
        assert!((g_value(&j, 1.0 + 1e-12).unwrap() - e.g_plus).abs() < 10.0 * 1e-6);
    }

    #[test]
    fn inverse_round_trips() {
        let measures = [
            sc(1.0),
            Measure::marchenko_pastur(0.5).unwrap(),
            Measure::marchenko_pastur(1.0).unwrap(),
            Measure::marchenko_pastur(3.0).unwrap(),
            Measure::jacobi(-2.0, 1.0, 0.5, 0.5).unwrap(),
            Measure::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
        ];
        for m in &measures {
            let lo = m.support().lower;
            for i in 0..25 {
                let z = lo - 10f64.powf(1.0 - 0.2 * i as f64);
                let g = g_value(m, z).unwrap();
                let back = g_inverse(m, g).unwrap();
                assert!(
                    (back - z).abs() <= 1e-10 * z.abs().max(1.0),
                    "{m:?} z={z}: {back}"
                );
            }
        }
        assert!((g_inverse(&sc(1.0), 0.5).unwrap() + 2.5).abs() < 1e-13);
        assert!(matches!(
            g_inverse(&sc(1.0), 1.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            g_inverse(&sc(1.0), -0.5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn extended_inverse() {
        assert!((g_inverse_extended(&sc(1.0), 2.0).unwrap() + 2.5).abs() < 1e-15);
        assert!((g_inverse_extended(&sc(1.0), 0.5).unwrap() + 2.5).abs() < 1e-15);
        let mp1 = Measure::marchenko_pastur(1.0).unwrap();
        assert!((g_inverse_extended(&mp1, 1.0).unwrap() + 0.5).abs() < 1e-15);
        for m in [
            sc(0.8),
            Measure::marchenko_pastur(0.5).unwrap(),
            Measure::marchenko_pastur(2.0).unwrap(),
        ] {
            let gs = edge_data(&m).g_star.min(5.0);
            for i in 1..40 {
                let g = gs * i as f64 / 40.0;
                let a = g_inverse_extended(&m, g).unwrap();
                let b = g_inverse(&m, g).unwrap();
                assert!(
                    (a - b).abs() < 1e-10 * a.abs().max(1.0),
                    "{m:?} g={g}: {a} vs {b}"
                );
            }
        }
    }
}
