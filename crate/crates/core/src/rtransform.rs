//! The real R-transform R(t) = G^{<-1>}(-t) - 1/t on its natural interval
//! (-G(supp_-), -G(supp_+)), with closed forms for the semicircle and
//! Marchenko–Pastur families.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::num;
use crate::measures::Measure;
use crate::stieltjes::{edge_data, g_deriv, g_inverse_any, StieltjesEdgeData};

/// Number of free cumulants kept in the series around t = 0.
const SERIES_TERMS: usize = 16;

/// An open interval (lo, hi); either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpenInterval {
    #[serde(serialize_with = "num")]
    pub lo: f64,
    #[serde(serialize_with = "num")]
    pub hi: f64,
}

impl OpenInterval {
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ClosedForm {
    Semicircle(f64),
    MarchenkoPastur(f64),
}

/// R-transform of a fixed measure. Edge data and the free cumulants are
/// computed once on construction.
#[derive(Debug, Clone)]
pub struct RTransformReal {
    measure: Measure,
    edge: StieltjesEdgeData,
    dhat: OpenInterval,
    d_extended: Option<OpenInterval>,
    closed_form: Option<ClosedForm>,
    cumulants: Vec<f64>,
    /// Below this |t| the numeric path sums the cumulant series instead of
    /// inverting G.
    tau: f64,
}

impl RTransformReal {
    pub fn new(m: &Measure) -> RTransformReal {
        let closed_form = match *m {
            Measure::Semicircle { beta } => Some(ClosedForm::Semicircle(beta)),
            Measure::MarchenkoPastur { beta } => Some(ClosedForm::MarchenkoPastur(beta)),
            _ => None,
        };
        let mut rt = RTransformReal::build(m);
        rt.closed_form = closed_form;
        rt.d_extended = match closed_form {
            Some(ClosedForm::Semicircle(_)) => Some(OpenInterval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            }),
            Some(ClosedForm::MarchenkoPastur(_)) => Some(OpenInterval {
                lo: f64::NEG_INFINITY,
                hi: 1.0,
            }),
            None => None,
        };
        rt
    }

    /// Always use Stieltjes inversion, even for families with a closed form.
    pub fn numeric(m: &Measure) -> RTransformReal {
        RTransformReal::build(m)
    }

    fn build(m: &Measure) -> RTransformReal {
        let edge = edge_data(m);
        let mean = m.mean();
        let supp = m.support();
        let spread = (mean - supp.lower).max(supp.upper - mean);
        let cumulants = free_cumulants(m, SERIES_TERMS);
        RTransformReal {
            measure: m.clone(),
            edge,
            dhat: OpenInterval {
                lo: -edge.g_star,
                hi: -edge.g_plus,
            },
            d_extended: None,
            closed_form: None,
            cumulants,
            tau: 0.02 / spread.max(1e-300),
        }
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn edge(&self) -> &StieltjesEdgeData {
        &self.edge
    }

    /// The interval (-g*, -g_plus) on which R is defined through G.
    pub fn dhat(&self) -> OpenInterval {
        self.dhat
    }

    /// The closed-form extension, where one is known.
    pub fn d_extended(&self) -> Option<OpenInterval> {
        self.d_extended
    }

    /// Working domain: the extension if present, else the natural interval.
    pub fn domain(&self) -> OpenInterval {
        self.d_extended.unwrap_or(self.dhat)
    }

    /// Free cumulants kappa_1, kappa_2, ...
    pub fn free_cumulants(&self) -> &[f64] {
        &self.cumulants
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.domain().contains(t) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "R-transform",
                value: t,
            })
        }
    }

    pub fn r_value(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(match self.closed_form {
            Some(ClosedForm::Semicircle(b)) => t * b * b,
            Some(ClosedForm::MarchenkoPastur(b)) => b / (1.0 - t),
            None if t.abs() < self.tau => self.series(t).0,
            None => g_inverse_any(&self.measure, -t)? - 1.0 / t,
        })
    }

    pub fn r_deriv(&self, t: f64) -> Result<f64> {
        Ok(self.r_value_and_deriv(t)?.1)
    }

    pub fn r_value_and_deriv(&self, t: f64) -> Result<(f64, f64)> {
        self.check(t)?;
        Ok(match self.closed_form {
            Some(ClosedForm::Semicircle(b)) => (t * b * b, b * b),
            Some(ClosedForm::MarchenkoPastur(b)) => {
                let s = 1.0 - t;
                (b / s, b / (s * s))
            }
            None if t.abs() < self.tau => self.series(t),
            None => {
                // inverse function rule: d/dt G^{<-1>}(-t) = -1 / G'(z)
                let z = g_inverse_any(&self.measure, -t)?;
                let gd = g_deriv(&self.measure, z, 1)?;
                (z - 1.0 / t, 1.0 / (t * t) - 1.0 / gd)
            }
        })
    }

    /// Limit of R at the left end of the working domain.
    pub fn r_at_left_end(&self) -> f64 {
        match self.closed_form {
            Some(ClosedForm::Semicircle(_)) => f64::NEG_INFINITY,
            Some(ClosedForm::MarchenkoPastur(_)) => 0.0,
            // G^{<-1>}(g*) = supp_-, and also the limit when g* is infinite
            None => self.measure.support().lower + 1.0 / self.edge.g_star,
        }
    }

    /// Membership in D+ = {t in the domain : R'(t) > 0}.
    pub fn d_plus_contains(&self, t: f64) -> bool {
        if self.dhat.contains(t) {
            return true;
        }
        matches!(self.r_deriv(t), Ok(d) if d > 0.0)
    }

    fn series(&self, t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (k, &c) in self.cumulants.iter().enumerate().rev() {
            // kappa_{k+1} t^k
            v = v * t + c;
            if k > 0 {
                d = d * t + k as f64 * c;
            }
        }
        (v, d)
    }
}

/// First `n` free cumulants from the moment recursion
/// m_k = sum_s kappa_s [x^{k-s}] M(x)^s, with M(x) = sum_j m_j x^j.
/// Central moments are used so that only kappa_1 carries the location.
pub fn free_cumulants(m: &Measure, n: usize) -> Vec<f64> {
    let mean = m.mean();
    let moments: Vec<f64> = (0..=n as u32)
        .map(|k| if k == 0 { 1.0 } else { m.moment_about(k, mean) })
        .collect();
    // powers[s][j] = [x^j] M(x)^s, j <= n
    let mut powers = vec![vec![0.0; n + 1]; n + 1];
    powers[0][0] = 1.0;
    for s in 1..=n {
        for j in 0..=n {
            powers[s][j] = (0..=j).map(|i| moments[i] * powers[s - 1][j - i]).sum();
        }
    }
    let mut kappa = vec![0.0; n + 1];
    for k in 1..=n {
        let rest: f64 = (1..k).map(|s| kappa[s] * powers[s][k - s]).sum();
        kappa[k] = moments[k] - rest;
    }
    kappa[1] = mean;
    kappa.remove(0);
    kappa
}
