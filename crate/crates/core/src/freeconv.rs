//! F(h) = R_mu(-G_nu(h)) + h and what it says about mu ⊞ nu: the left edge
//! z*, the edge value g*, the Stieltjes transform left of the edge, and the
//! critical points of the energy functional.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::num;
use crate::measures::Measure;
use crate::numeric::{brent_root, golden_min};
use crate::rtransform::RTransformReal;
use crate::stieltjes::{edge_data, g_and_deriv, g_inverse, g_value};

/// Points of the logarithmic scan grid over dom F.
const SCAN_POINTS: usize = 256;

/// Values of F - z within this relative distance of zero count as touching.
pub const TOUCH_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HStarKind {
    CriticalPoint,
    DomainEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvolutionSummary {
    #[serde(serialize_with = "num")]
    pub h_star: f64,
    #[serde(serialize_with = "num")]
    pub g_star: f64,
    #[serde(serialize_with = "num")]
    pub z_star: f64,
    pub h_star_kind: HStarKind,
    #[serde(serialize_with = "num")]
    pub f_domain_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    LocalMin,
    LocalMax,
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSource {
    FixedPoint,
    RPrimeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    #[serde(serialize_with = "num")]
    pub g: f64,
    /// The h with G_nu(h) = g and F(h) = z.
    #[serde(serialize_with = "num")]
    pub h: f64,
    pub kind: CriticalKind,
    pub source: CriticalSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointReport {
    #[serde(serialize_with = "num")]
    pub z: f64,
    pub points: Vec<CriticalPoint>,
}

impl CriticalPointReport {
    pub fn count(&self, kind: CriticalKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }
}

/// Critical point of F: F' changes sign (extremum) or touches zero.
#[derive(Debug, Clone, Copy)]
struct FCritical {
    h: f64,
    f: f64,
    kind: CriticalKind,
}

/// The pair (mu, nu) with everything that depends only on the pair cached.
#[derive(Debug)]
pub struct ConvolutionPair {
    mu: Measure,
    nu: Measure,
    rt: RTransformReal,
    /// sup dom F
    upper: f64,
    /// lim G_nu(h) as h increases to `upper`
    g_upper: f64,
    /// G_nu(upper) hits the edge of -D rather than the edge of supp nu
    cut_by_domain: bool,
    criticals: OnceLock<Result<Vec<FCritical>>>,
}

impl ConvolutionPair {
    pub fn new(mu: &Measure, nu: &Measure) -> Result<ConvolutionPair> {
        if mu.is_degenerate() {
            return Err(Error::DegenerateMu);
        }
        let rt = RTransformReal::new(mu);
        let g_cap = -rt.domain().lo;
        let nu_edge = edge_data(nu).g_star;
        let (upper, g_upper, cut) = if g_cap >= nu_edge {
            (nu.support().lower, nu_edge, false)
        } else {
            (g_inverse(nu, g_cap)?, g_cap, true)
        };
        Ok(ConvolutionPair {
            mu: mu.clone(),
            nu: nu.clone(),
            rt,
            upper,
            g_upper,
            cut_by_domain: cut,
            criticals: OnceLock::new(),
        })
    }

    pub fn mu(&self) -> &Measure {
        &self.mu
    }

    pub fn nu(&self) -> &Measure {
        &self.nu
    }

    pub fn r_transform(&self) -> &RTransformReal {
        &self.rt
    }

    /// sup dom F.
    pub fn f_domain_upper(&self) -> f64 {
        self.upper
    }

    fn check_h(&self, h: f64) -> Result<()> {
        if h < self.upper {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "F",
                value: h,
            })
        }
    }

    pub fn f_value(&self, h: f64) -> Result<f64> {
        self.check_h(h)?;
        let g = g_value(&self.nu, h)?;
        Ok(self.rt.r_value(-g)? + h)
    }

    pub fn f_deriv(&self, h: f64) -> Result<f64> {
        Ok(self.f_value_and_deriv(h)?.1)
    }

    pub fn f_value_and_deriv(&self, h: f64) -> Result<(f64, f64)> {
        let (f, fd, _) = self.f_parts(h)?;
        Ok((f, fd))
    }

    /// (F, F', R'_mu(-G) G'_nu); the last is what F' subtracts from one and
    /// sets the rounding scale of F'.
    fn f_parts(&self, h: f64) -> Result<(f64, f64, f64)> {
        self.check_h(h)?;
        let (g, gd) = g_and_deriv(&self.nu, h)?;
        let (r, rd) = self.rt.r_value_and_deriv(-g)?;
        let p = rd * gd;
        Ok((r + h, 1.0 - p, p))
    }

    /// lim F(h) as h increases to sup dom F.
    pub fn f_at_upper(&self) -> f64 {
        let r = if self.cut_by_domain || self.g_upper == -self.rt.domain().lo {
            self.rt.r_at_left_end()
        } else {
            self.rt
                .r_value(-self.g_upper)
                .unwrap_or_else(|_| self.rt.r_at_left_end())
        };
        r + self.upper
    }

    /// Fixed-point residual G_nu(z - R_mu(-g)) - g.
    pub fn fixed_point_residual(&self, z: f64, g: f64) -> Result<f64> {
        let w = z - self.rt.r_value(-g)?;
        Ok(g_value(&self.nu, w)? - g)
    }

    fn scale(&self) -> f64 {
        let (sm, sn) = (self.mu.support(), self.nu.support());
        1f64.max(self.upper.abs())
            .max(sm.width())
            .max(sn.width())
            .max(self.mu.mean().abs())
    }

    /// Distances from `upper` of the scan grid, decreasing (h increasing).
    fn scan_distances(&self) -> Vec<f64> {
        let scale = self.scale();
        let d_max = 1e4 * scale;
        let d_min = 1e-11 * self.upper.abs().max(1.0);
        let (a, b) = (d_max.ln(), d_min.ln());
        (0..SCAN_POINTS)
            .map(|i| (a + (b - a) * i as f64 / (SCAN_POINTS - 1) as f64).exp())
            .collect()
    }

    fn criticals(&self) -> Result<&[FCritical]> {
        self.criticals
            .get_or_init(|| self.find_f_criticals())
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    /// All critical points of F on the scan grid, left to right. Sign changes
    /// of F' are bracketed on the grid; local extrema of F' that come close to
    /// zero are refined to catch pairs of nearby roots and tangencies.
    fn find_f_criticals(&self) -> Result<Vec<FCritical>> {
        let ds = self.scan_distances();
        let mut hs = Vec::with_capacity(ds.len());
        let mut fp = Vec::with_capacity(ds.len());
        let mut thr = Vec::with_capacity(ds.len());
        for &d in &ds {
            let h = self.upper - d;
            let (_, fd, p) = self.f_parts(h)?;
            hs.push(h);
            fp.push(fd);
            thr.push(threshold(p));
        }
        if fp[0] <= thr[0] {
            return Err(Error::Convergence(format!(
                "F' is not positive far left of the support (h = {})",
                hs[0]
            )));
        }
        let fprime = |h: f64| self.f_deriv(h).unwrap_or(f64::NAN);
        let root = |a: f64, b: f64, fa: f64, fb: f64| {
            brent_root(fprime, a, b, fa, fb, 1e-14 * a.abs().max(1.0))
        };

        let mut out = Vec::new();
        let push = |out: &mut Vec<FCritical>, h: f64, kind: CriticalKind| -> Result<()> {
            out.push(FCritical {
                h,
                f: self.f_value(h)?,
                kind,
            });
            Ok(())
        };
        let extremum = |before: i8, after: i8| match (before, after) {
            (1, -1) => CriticalKind::LocalMax,
            (-1, 1) => CriticalKind::LocalMin,
            _ => CriticalKind::Inflection,
        };
        let n = hs.len();
        for i in 1..n {
            let (a, b) = (fp[i - 1], fp[i]);
            let sa = sign_with(a, thr[i - 1]);
            let sb = sign_with(b, thr[i]);
            if sa != 0 && sb != 0 && sa != sb {
                push(&mut out, root(hs[i - 1], hs[i], a, b), extremum(sa, sb))?;
                continue;
            }
            if sb == 0 && sa != 0 {
                // lands on zero at a grid point
                let after = (i + 1..n)
                    .map(|j| sign_with(fp[j], thr[j]))
                    .find(|&v| v != 0)
                    .unwrap_or(0);
                push(&mut out, hs[i], extremum(sa, after))?;
                continue;
            }
            // interior extremum of F' at grid point i that stays on one side
            if i + 1 < n && sb != 0 && sign_with(fp[i + 1], thr[i + 1]) == sb {
                let is_min = b < a && b <= fp[i + 1];
                let is_max = b > a && b >= fp[i + 1];
                if (is_min && sb > 0) || (is_max && sb < 0) {
                    let s = sb as f64;
                    let (hm, vm) = golden_min(
                        |h| s * fprime(h),
                        hs[i - 1],
                        hs[i + 1],
                        1e-12 * hs[i].abs().max(1.0),
                    );
                    let vm = s * vm;
                    let tm = thr[i];
                    if sign_with(vm, tm) == 0 {
                        push(&mut out, hm, CriticalKind::Inflection)?;
                    } else if vm.signum() != s {
                        push(&mut out, root(hs[i - 1], hm, a, vm), extremum(sb, -sb))?;
                        push(
                            &mut out,
                            root(hm, hs[i + 1], vm, fp[i + 1]),
                            extremum(-sb, sb),
                        )?;
                    }
                }
            }
        }
        out.dedup_by(|x, y| (x.h - y.h).abs() <= 1e-12 * x.h.abs().max(1.0));
        Ok(out)
    }

    pub fn endpoint_summary(&self) -> Result<ConvolutionSummary> {
        let crit = self.criticals()?;
        Ok(match crit.first() {
            Some(c) => ConvolutionSummary {
                h_star: c.h,
                g_star: g_value(&self.nu, c.h)?,
                z_star: c.f,
                h_star_kind: HStarKind::CriticalPoint,
                f_domain_upper: self.upper,
            },
            None => ConvolutionSummary {
                h_star: self.upper,
                g_star: self.g_upper,
                z_star: self.f_at_upper(),
                h_star_kind: HStarKind::DomainEndpoint,
                f_domain_upper: self.upper,
            },
        })
    }

    /// Critical points of F as (h, F(h), kind), left to right.
    pub fn f_critical_points(&self) -> Result<Vec<(f64, f64, CriticalKind)>> {
        Ok(self
            .criticals()?
            .iter()
            .map(|c| (c.h, c.f, c.kind))
            .collect())
    }

    /// Monotone pieces of F: (left end, right end, F at left, F at right).
    /// The first piece starts at -inf where F tends to -inf.
    fn pieces(&self) -> Result<Vec<(f64, f64, f64, f64)>> {
        let crit = self.criticals()?;
        let mut ends: Vec<(f64, f64)> = vec![(f64::NEG_INFINITY, f64::NEG_INFINITY)];
        ends.extend(crit.iter().map(|c| (c.h, c.f)));
        ends.push((self.upper, self.f_at_upper()));
        Ok(ends
            .windows(2)
            .map(|w| (w[0].0, w[1].0, w[0].1, w[1].1))
            .collect())
    }

    /// The root of F(h) = z on a monotone piece, given the values at its ends
    /// bracket z. Uses the distance to whichever end is finite and closer to
    /// an edge, in log scale.
    fn root_on_piece(&self, z: f64, a: f64, b: f64) -> Result<f64> {
        let fz = |h: f64| self.f_value(h).map(|f| f - z).unwrap_or(f64::NAN);
        if a == f64::NEG_INFINITY {
            // h = b - e^u; find u_far with F(h) < z
            let vb = fz_limit(self, b, z);
            let dir = vb.signum();
            let mut d = (b - (z - self.rt.r_value(0.0)?)).abs().max(1.0);
            let mut v = fz(b - d);
            let mut guard = 0;
            while v.signum() == dir {
                d *= 2.0;
                v = fz(b - d);
                guard += 1;
                if guard > 200 {
                    return Err(Error::Convergence(format!("no bracket for F(h) = {z}")));
                }
            }
            let u_min = (1e-15 * b.abs().max(1.0)).ln();
            return Ok(self.log_root(b, z, u_min, d.ln(), v));
        }
        if b == self.upper {
            let v_far = fz(a);
            let u_max = (b - a).ln();
            let u_min = (1e-15 * b.abs().max(1.0)).ln();
            return Ok(self.log_root(b, z, u_min, u_max, v_far));
        }
        let (va, vb) = (fz(a), fz(b));
        Ok(brent_root(fz, a, b, va, vb, 1e-15 * a.abs().max(1.0)))
    }

    /// Solve F(edge - e^u) = z for u in [u_min, u_max] where the value at
    /// u_max is `v_far`; returns h.
    fn log_root(&self, edge: f64, z: f64, u_min: f64, u_max: f64, v_far: f64) -> f64 {
        let phi = |u: f64| {
            self.f_value(edge - u.exp())
                .map(|f| f - z)
                .unwrap_or(f64::NAN)
        };
        let v_near = phi(u_min);
        if v_near.is_nan() || v_near.signum() == v_far.signum() {
            return edge - u_min.exp();
        }
        let u = brent_root(
            phi,
            u_min,
            u_max,
            v_near,
            v_far,
            1e-15 * u_max.abs().max(1.0),
        );
        edge - u.exp()
    }

    /// G_{mu ⊞ nu}(z) and the leftmost root h^< of F(h) = z, for z < z*.
    pub fn conv_stieltjes(&self, z: f64) -> Result<(f64, f64)> {
        let s = self.endpoint_summary()?;
        if !(z < s.z_star) {
            return Err(Error::BeyondEdge {
                z,
                z_star: s.z_star,
            });
        }
        let h = self.root_on_piece(z, f64::NEG_INFINITY, s.h_star)?;
        Ok((g_value(&self.nu, h)?, h))
    }

    /// All solutions of F(h) = z with their kind as critical points of E,
    /// read off from the sign of F - z on each side.
    pub fn classify_critical_points(&self, z: f64) -> Result<CriticalPointReport> {
        let tol = TOUCH_TOLERANCE * z.abs().max(1.0);
        let snap = |v: f64| if v.abs() <= tol { 0.0 } else { v };
        let pieces = self.pieces()?;
        let mut points = Vec::new();
        for (k, &(a, b, fa, fb)) in pieces.iter().enumerate() {
            let (va, vb) = (snap(fa - z), snap(fb - z));
            if va != 0.0 && vb != 0.0 && va.signum() != vb.signum() {
                let h = self.root_on_piece(z, a, b)?;
                let kind = if vb > va {
                    CriticalKind::LocalMin
                } else {
                    CriticalKind::LocalMax
                };
                points.push(CriticalPoint {
                    g: g_value(&self.nu, h)?,
                    h,
                    kind,
                    source: CriticalSource::FixedPoint,
                });
            }
            // F(b) = z at an interior critical point of F
            if vb == 0.0 && k + 1 < pieces.len() {
                let left = va;
                let right = snap(pieces[k + 1].3 - z);
                let kind = if left < 0.0 && right > 0.0 {
                    CriticalKind::LocalMin
                } else if left > 0.0 && right < 0.0 {
                    CriticalKind::LocalMax
                } else {
                    CriticalKind::Inflection
                };
                points.push(CriticalPoint {
                    g: g_value(&self.nu, b)?,
                    h: b,
                    kind,
                    source: CriticalSource::FixedPoint,
                });
            }
        }
        Ok(CriticalPointReport { z, points })
    }

    /// The second solution of F(h) = z from the left, for z < z*.
    pub fn h_greater(&self, z: f64) -> Result<Option<f64>> {
        let s = self.endpoint_summary()?;
        if !(z < s.z_star) {
            return Err(Error::BeyondEdge {
                z,
                z_star: s.z_star,
            });
        }
        let report = self.classify_critical_points(z)?;
        Ok(report.points.get(1).map(|p| p.h))
    }
}

/// Rounding scale of 1 - p.
fn threshold(p: f64) -> f64 {
    1e-11 * p.abs().max(1.0)
}

fn sign_with(v: f64, thr: f64) -> i8 {
    if v > thr {
        1
    } else if v < -thr {
        -1
    } else {
        0
    }
}

fn fz_limit(pair: &ConvolutionPair, b: f64, z: f64) -> f64 {
    if b == pair.upper {
        pair.f_at_upper() - z
    } else {
        pair.f_value(b).map(|f| f - z).unwrap_or(f64::NAN)
    }
}

pub fn f_value(mu: &Measure, nu: &Measure, h: f64) -> Result<f64> {
    ConvolutionPair::new(mu, nu)?.f_value(h)
}

pub fn f_deriv(mu: &Measure, nu: &Measure, h: f64) -> Result<f64> {
    ConvolutionPair::new(mu, nu)?.f_deriv(h)
}

pub fn endpoint_summary(mu: &Measure, nu: &Measure) -> Result<ConvolutionSummary> {
    ConvolutionPair::new(mu, nu)?.endpoint_summary()
}

pub fn conv_stieltjes(mu: &Measure, nu: &Measure, z: f64) -> Result<(f64, f64)> {
    ConvolutionPair::new(mu, nu)?.conv_stieltjes(z)
}

pub fn h_greater(mu: &Measure, nu: &Measure, z: f64) -> Result<Option<f64>> {
    ConvolutionPair::new(mu, nu)?.h_greater(z)
}

pub fn classify_critical_points(mu: &Measure, nu: &Measure, z: f64) -> Result<CriticalPointReport> {
    ConvolutionPair::new(mu, nu)?.classify_critical_points(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(b: f64) -> Measure {
        Measure::semicircle(b).unwrap()
    }
    fn mp(b: f64) -> Measure {
        Measure::marchenko_pastur(b).unwrap()
    }
    fn delta(a: f64) -> Measure {
        Measure::delta(a).unwrap()
    }
    fn two_atoms() -> Measure {
        Measure::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn f_for_semicircle_and_point_mass() {
        assert!((f_value(&sc(1.0), &delta(0.0), -1.0).unwrap() + 2.0).abs() < 1e-15);
        assert!(f_deriv(&sc(1.0), &delta(0.0), -1.0).unwrap().abs() < 1e-15);
        assert!((f_value(&mp(1.0), &delta(0.0), -1.0).unwrap() + 0.5).abs() < 1e-15);
        let far = f_value(&sc(1.0), &delta(0.0), -1e6).unwrap();
        assert!(((far + 1e6) / 1e6).abs() < 1e-3);
        assert!(matches!(
            f_value(&sc(1.0), &delta(0.0), 0.5),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn f_deriv_matches_central_differences() {
        let pairs = [
            (sc(1.0), two_atoms()),
            (mp(0.5), Measure::jacobi(-1.0, 1.0, 0.5, 0.5).unwrap()),
            (Measure::jacobi(0.0, 1.0, 1.5, 0.5).unwrap(), sc(0.5)),
        ];
        for (mu, nu) in &pairs {
            let pair = ConvolutionPair::new(mu, nu).unwrap();
            let up = pair.f_domain_upper();
            for i in 0..20 {
                let h = up - 10f64.powf(1.0 - 0.2 * i as f64);
                let e = 1e-5 * (up - h);
                let fd = (pair.f_value(h + e).unwrap() - pair.f_value(h - e).unwrap()) / (2.0 * e);
                let d = pair.f_deriv(h).unwrap();
                assert!(
                    (fd - d).abs() < 1e-6 * d.abs().max(1.0),
                    "{mu:?} {nu:?} h={h}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn endpoint_of_semicircle_with_point_mass() {
        let s = endpoint_summary(&sc(1.0), &delta(0.0)).unwrap();
        assert!((s.h_star + 1.0).abs() < 1e-12);
        assert!((s.g_star - 1.0).abs() < 1e-12);
        assert!((s.z_star + 2.0).abs() < 1e-12);
        assert_eq!(s.h_star_kind, HStarKind::CriticalPoint);
    }

    #[test]
    fn endpoint_of_two_semicircles() {
        let s = endpoint_summary(&sc(1.0), &sc(1.0)).unwrap();
        assert!((s.h_star + 4.5f64.sqrt()).abs() < 1e-9, "{s:?}");
        assert!((s.g_star - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((s.z_star + 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn hard_edge_of_marchenko_pastur() {
        let s = endpoint_summary(&mp(1.0), &delta(0.0)).unwrap();
        assert_eq!(s.h_star_kind, HStarKind::DomainEndpoint);
        assert_eq!(s.h_star, 0.0);
        assert_eq!(s.g_star, f64::INFINITY);
        assert_eq!(s.z_star, 0.0);
    }

    #[test]
    fn marchenko_pastur_shifted() {
        for beta in [0.5, 1.0, 2.0] {
            for a in [-1.0, 0.0, 3.0] {
                let s = endpoint_summary(&mp(beta), &delta(a)).unwrap();
                let lower = mp(beta).support().lower;
                let expected = if beta < 1.0 { a } else { a + lower };
                assert!(
                    (s.z_star - expected).abs() < 1e-9,
                    "beta={beta} a={a}: {s:?}"
                );
            }
        }
    }

    #[test]
    fn stieltjes_of_the_convolution() {
        let (g, h) = conv_stieltjes(&sc(1.0), &delta(0.0), -2.5).unwrap();
        assert!((g - 0.5).abs() < 1e-12);
        assert!((h + 2.0).abs() < 1e-12);
        let (g, _) = conv_stieltjes(&sc(1.0), &sc(1.0), -3.0).unwrap();
        let expected = g_value(&sc(2f64.sqrt()), -3.0).unwrap();
        assert!((g - expected).abs() < 1e-12, "{g} vs {expected}");
        assert!(matches!(
            conv_stieltjes(&sc(1.0), &delta(0.0), -2.0),
            Err(Error::BeyondEdge { .. })
        ));
    }

    #[test]
    fn second_root() {
        let h = h_greater(&sc(1.0), &delta(0.0), -2.5).unwrap().unwrap();
        assert!((h + 0.5).abs() < 1e-12);
        let pair = ConvolutionPair::new(&sc(1.0), &two_atoms()).unwrap();
        let h = pair.h_greater(-3.0).unwrap().unwrap();
        assert!((pair.f_value(h).unwrap() + 3.0).abs() < 1e-10);
        assert!(h > pair.endpoint_summary().unwrap().h_star);
    }

    #[test]
    fn trichotomy_for_semicircle() {
        let pair = ConvolutionPair::new(&sc(1.0), &two_atoms()).unwrap();
        let s = pair.endpoint_summary().unwrap();
        let below = pair.classify_critical_points(s.z_star - 0.5).unwrap();
        assert_eq!(below.points.len(), 2);
        assert_eq!(below.points[0].kind, CriticalKind::LocalMin);
        assert!(below.points[0].g < s.g_star);
        assert_eq!(below.points[1].kind, CriticalKind::LocalMax);
        let at = pair.classify_critical_points(s.z_star).unwrap();
        assert_eq!(at.points.len(), 1);
        assert_eq!(at.points[0].kind, CriticalKind::Inflection);
        assert!((at.points[0].g - s.g_star).abs() < 1e-12);
        assert!(pair
            .classify_critical_points(s.z_star + 0.1)
            .unwrap()
            .points
            .is_empty());
    }

    #[test]
    fn fixed_point_holds_at_the_solution() {
        let pair =
            ConvolutionPair::new(&mp(0.5), &Measure::jacobi(-1.0, 1.0, 0.5, 0.5).unwrap()).unwrap();
        let s = pair.endpoint_summary().unwrap();
        for dz in [1e-3, 0.1, 1.0, 10.0] {
            let z = s.z_star - dz;
            let (g, _) = pair.conv_stieltjes(z).unwrap();
            assert!(pair.fixed_point_residual(z, g).unwrap().abs() < 1e-9 * g.max(1.0));
        }
    }

    #[test]
    fn degenerate_mu_is_rejected() {
        assert!(matches!(
            ConvolutionPair::new(&delta(1.0), &sc(1.0)),
            Err(Error::DegenerateMu)
        ));
    }
}
