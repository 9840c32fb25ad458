//! The energy functional E(g) = ∫_0^g s R'_mu(-s) ds + U_nu(z - R_mu(-g)),
//! its minimization over (0, g*), and tables of the curves around it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{fmt17, num};
use crate::freeconv::{ConvolutionPair, CriticalKind};
use crate::measures::Measure;
use crate::numeric::{brent_root, golden_min};
use crate::rtransform::RTransformReal;
use crate::stieltjes::{g_inverse_any, g_value};

/// Agreement required between the two evaluations of U.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMethod {
    VariationalAtRoot,
    BoundedMinimization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialResult {
    #[serde(serialize_with = "num")]
    pub z: f64,
    #[serde(serialize_with = "num")]
    pub u: f64,
    #[serde(serialize_with = "num")]
    pub minimizer_g: f64,
    #[serde(serialize_with = "num")]
    pub e_at_min: f64,
    #[serde(serialize_with = "num")]
    pub fixed_point_residual: f64,
    /// Value of the bounded minimization used as the cross-check.
    #[serde(serialize_with = "num")]
    pub check_u: f64,
    pub method: PotentialMethod,
}

/// U(z) = ∫ log(λ - z) dm for z left of the support.
pub fn u_direct(m: &Measure, z: f64) -> Result<f64> {
    let lower = m.support().lower;
    if !(z < lower) {
        return Err(Error::InsideOrRightOfSupport { z, lower });
    }
    m.integrate_near(|x| (x - z).ln(), z)
}

/// ∫_0^g s R'(-s) ds.
fn first_term(rt: &RTransformReal, g: f64) -> Result<f64> {
    if g == 0.0 {
        return Ok(0.0);
    }
    match *rt.measure() {
        Measure::Semicircle { beta } => Ok(0.5 * beta * beta * g * g),
        Measure::MarchenkoPastur { beta } => Ok(beta * g.ln_1p() - beta * g / (1.0 + g)),
        // Substituting s = G(x) gives log|g| + U(G^{<-1>}(g)); the divergent
        // parts at x = ∓inf cancel.
        ref m => {
            let x = g_inverse_any(m, g)?;
            Ok(g.abs().ln() + m.integrate_near(|l| (l - x).abs().ln(), x)?)
        }
    }
}

/// Energy functional and its derivative for a fixed pair.
impl ConvolutionPair {
    /// w = z - R_mu(-g), checking that g lies in the domain of E.
    fn e_argument(&self, z: f64, g: f64) -> Result<(f64, f64)> {
        let rt = self.r_transform();
        if !rt.domain().contains(-g) {
            return Err(Error::OutOfEDomain { g });
        }
        let (r, rd) = rt
            .r_value_and_deriv(-g)
            .map_err(|_| Error::OutOfEDomain { g })?;
        let w = z - r;
        if !(w < self.nu().support().lower) {
            return Err(Error::OutOfEDomain { g });
        }
        Ok((w, rd))
    }

    pub fn e_value(&self, z: f64, g: f64) -> Result<f64> {
        let (w, _) = self.e_argument(z, g)?;
        Ok(first_term(self.r_transform(), g)? + u_direct(self.nu(), w)?)
    }

    /// E'(g) = R'_mu(-g) (g - G_nu(z - R_mu(-g))).
    pub fn e_deriv(&self, z: f64, g: f64) -> Result<f64> {
        let (w, rd) = self.e_argument(z, g)?;
        Ok(rd * (g - g_value(self.nu(), w)?))
    }

    /// Largest g such that (0, g) lies in the domain of E, capped at `cap`.
    fn e_domain_upper(&self, z: f64, cap: f64) -> f64 {
        let rt = self.r_transform();
        let cap = cap.min(-rt.domain().lo);
        let inside = |g: f64| self.e_argument(z, g).is_ok();
        let probe = if cap.is_finite() {
            cap * (1.0 - 1e-12)
        } else {
            1e12
        };
        if inside(probe) {
            return cap;
        }
        // z - R(-g) increases with g, so the admissible set is an interval
        let (mut lo, mut hi) = (0.0, probe);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        lo
    }

    /// Minimizes E over (eps, g* - eps) by golden section in log g, then
    /// polishes with a root of E' when it is bracketed. Returns (g, E(g)).
    pub fn bounded_minimization(&self, z: f64, g_star: f64) -> Result<(f64, f64)> {
        let upper = self.e_domain_upper(z, g_star);
        let (eps, hi) = if upper.is_finite() {
            (1e-9 * upper.max(1.0), upper * (1.0 - 1e-9))
        } else {
            (1e-9, 1e12)
        };
        let e = |v: f64| self.e_value(z, v.exp()).unwrap_or(f64::INFINITY);
        let (v, _) = golden_min(e, eps.ln(), hi.ln(), 1e-10);
        let mut g = v.exp();
        let (a, b) = (g * (1.0 - 1e-6), (g * (1.0 + 1e-6)).min(hi));
        if let (Ok(da), Ok(db)) = (self.e_deriv(z, a), self.e_deriv(z, b)) {
            if da < 0.0 && db > 0.0 {
                g = brent_root(
                    |x| self.e_deriv(z, x).unwrap_or(f64::NAN),
                    a,
                    b,
                    da,
                    db,
                    1e-15 * g,
                );
            }
        }
        Ok((g, self.e_value(z, g)?))
    }

    /// U_{mu ⊞ nu}(z) as E at G_{mu ⊞ nu}(z), cross-checked against a direct
    /// minimization of E over (0, g*).
    pub fn u_variational(&self, z: f64) -> Result<PotentialResult> {
        let s = self.endpoint_summary()?;
        if !(z < s.z_star) {
            return Err(Error::BeyondEdge {
                z,
                z_star: s.z_star,
            });
        }
        let (g_check, u_check) = self.bounded_minimization(z, s.g_star)?;
        let (g, method) = match self.conv_stieltjes(z) {
            Ok((g, _)) => (g, PotentialMethod::VariationalAtRoot),
            Err(Error::Convergence(_)) => (g_check, PotentialMethod::BoundedMinimization),
            Err(e) => return Err(e),
        };
        let u = self.e_value(z, g)?;
        if (u - u_check).abs() > VERIFY_TOLERANCE * u.abs().max(1.0) {
            return Err(Error::VerificationMismatch {
                primary: u,
                check: u_check,
            });
        }
        Ok(PotentialResult {
            z,
            u,
            minimizer_g: g,
            e_at_min: u,
            fixed_point_residual: self.fixed_point_residual(z, g)?,
            check_u: u_check,
            method,
        })
    }
}

pub fn e_value(mu: &Measure, nu: &Measure, z: f64, g: f64) -> Result<f64> {
    ConvolutionPair::new(mu, nu)?.e_value(z, g)
}

pub fn e_deriv(mu: &Measure, nu: &Measure, z: f64, g: f64) -> Result<f64> {
    ConvolutionPair::new(mu, nu)?.e_deriv(z, g)
}

pub fn u_variational(mu: &Measure, nu: &Measure, z: f64) -> Result<PotentialResult> {
    ConvolutionPair::new(mu, nu)?.u_variational(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// E(g) for a fixed z.
    E,
    /// F(h).
    F,
    /// g -> F(G_nu^{<-1>}(g)).
    GInv,
    /// J(g) = R_mu(-g) + R_nu(-g) - 1/g.
    J,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::E => "e",
            ProfileKind::F => "f",
            ProfileKind::GInv => "ginv",
            ProfileKind::J => "j",
        }
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "e" => Ok(ProfileKind::E),
            "f" => Ok(ProfileKind::F),
            "ginv" => Ok(ProfileKind::GInv),
            "j" => Ok(ProfileKind::J),
            _ => Err(format!(
                "unknown profile kind '{s}' (expected e, f, ginv or j)"
            )),
        }
    }
}

/// Evenly spaced abscissas start, ..., stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotation {
    #[serde(serialize_with = "num")]
    pub abscissa: f64,
    #[serde(serialize_with = "num")]
    pub value: f64,
    /// local_min, local_max, inflection, g_star or h_star.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub kind: ProfileKind,
    pub abscissa: Vec<f64>,
    pub value: Vec<f64>,
    pub annotations: Vec<Annotation>,
}

impl ProfileTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("abscissa,value\n");
        for (x, y) in self.abscissa.iter().zip(&self.value) {
            s.push_str(&format!("{},{}\n", fmt17(*x), fmt17(*y)));
        }
        s
    }

    pub fn annotations_csv(&self) -> String {
        let mut s = String::from("abscissa,value,kind\n");
        for a in &self.annotations {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt17(a.abscissa),
                fmt17(a.value),
                a.kind
            ));
        }
        s
    }
}

fn kind_name(k: CriticalKind) -> &'static str {
    match k {
        CriticalKind::LocalMin => "local_min",
        CriticalKind::LocalMax => "local_max",
        CriticalKind::Inflection => "inflection",
    }
}

/// Tabulates one of the curves on the grid, dropping points outside the
/// curve's domain, and annotates critical points and the edge quantities.
pub fn emit_profile(
    pair: &ConvolutionPair,
    z: Option<f64>,
    kind: ProfileKind,
    grid: &Grid,
) -> Result<ProfileTable> {
    let summary = pair.endpoint_summary()?;
    let in_range = |x: f64| {
        let (a, b) = if grid.start <= grid.stop {
            (grid.start, grid.stop)
        } else {
            (grid.stop, grid.start)
        };
        x >= a && x <= b
    };
    let eval: Box<dyn Fn(f64) -> Result<f64> + '_> = match kind {
        ProfileKind::E => {
            let z = z.ok_or(Error::OutOfDomain {
                what: "E profile needs z",
                value: f64::NAN,
            })?;
            Box::new(move |g| pair.e_value(z, g))
        }
        ProfileKind::F => Box::new(|h| pair.f_value(h)),
        ProfileKind::GInv => Box::new(|g| pair.f_value(g_inverse_any(pair.nu(), g)?)),
        ProfileKind::J => {
            let rt_nu = RTransformReal::new(pair.nu());
            Box::new(move |g| Ok(pair.r_transform().r_value(-g)? + rt_nu.r_value(-g)? - 1.0 / g))
        }
    };
    let mut abscissa = Vec::new();
    let mut value = Vec::new();
    let mut points = grid.points();
    points.sort_by(f64::total_cmp);
    points.dedup();
    for x in points {
        if kind != ProfileKind::F && x == 0.0 {
            continue;
        }
        if let Ok(v) = eval(x) {
            if v.is_finite() {
                abscissa.push(x);
                value.push(v);
            }
        }
    }
    if abscissa.is_empty() {
        return Err(Error::OutOfDomain {
            what: "profile grid",
            value: grid.start,
        });
    }

    let mut annotations = Vec::new();
    let mut note = |x: f64, kind: &str| {
        if in_range(x) {
            if let Ok(v) = eval(x) {
                annotations.push(Annotation {
                    abscissa: x,
                    value: v,
                    kind: kind.to_string(),
                });
            }
        }
    };
    match kind {
        ProfileKind::E => {
            for p in pair.classify_critical_points(z.unwrap())?.points {
                note(p.g, kind_name(p.kind));
            }
            note(summary.g_star, "g_star");
        }
        ProfileKind::F => {
            for (h, _, k) in pair.f_critical_points()? {
                note(h, kind_name(k));
            }
            // F is only defined up to the endpoint; its limit there is z*
            if summary.h_star_kind == crate::freeconv::HStarKind::DomainEndpoint
                && in_range(summary.h_star)
            {
                annotations.push(Annotation {
                    abscissa: summary.h_star,
                    value: summary.z_star,
                    kind: "h_star".into(),
                });
            }
        }
        ProfileKind::GInv | ProfileKind::J => {
            note(summary.g_star, "g_star");
        }
    }
    Ok(ProfileTable {
        kind,
        abscissa,
        value,
        annotations,
    })
}
