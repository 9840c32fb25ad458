//! Random-matrix oracle: spectra of A + D with A from GOE or Wishart and D a
//! deterministic diagonal of quantiles of nu.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{fmt17, num};
use crate::measures::Measure;

/// Default cap on the matrix dimension.
pub const DEFAULT_MAX_N: usize = 4096;

const MIN_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MuEnsemble {
    /// Semicircle on [-2 beta, 2 beta].
    Goe { beta: f64 },
    /// Marchenko–Pastur with parameter beta, as X X^T / n with X of size
    /// n x round(beta n).
    Wishart { beta: f64 },
}

impl MuEnsemble {
    /// The limiting law.
    pub fn measure(&self) -> Result<Measure> {
        match *self {
            MuEnsemble::Goe { beta } => Measure::semicircle(beta),
            MuEnsemble::Wishart { beta } => Measure::marchenko_pastur(beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub mu: MuEnsemble,
    pub nu: Measure,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_n: usize,
}

impl EnsembleSpec {
    pub fn new(mu: MuEnsemble, nu: Measure, n: usize, trials: usize, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            mu,
            nu,
            n,
            trials,
            seed,
            max_n: DEFAULT_MAX_N,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > self.max_n {
            return Err(Error::ResourceLimit {
                n: self.n,
                max: self.max_n,
            });
        }
        if self.n < MIN_N {
            return Err(Error::InvalidEnsemble(format!(
                "n = {} is below the minimum {MIN_N}",
                self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidEnsemble(
                "at least one trial is required".into(),
            ));
        }
        let beta = match self.mu {
            MuEnsemble::Goe { beta } | MuEnsemble::Wishart { beta } => beta,
        };
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidEnsemble(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        if let MuEnsemble::Wishart { .. } = self.mu {
            if self.wishart_columns() == 0 {
                return Err(Error::InvalidEnsemble(format!(
                    "beta = {beta} gives an empty Wishart factor at n = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    fn wishart_columns(&self) -> usize {
        match self.mu {
            MuEnsemble::Wishart { beta } => (beta * self.n as f64).round() as usize,
            MuEnsemble::Goe { .. } => 0,
        }
    }

    /// The beta actually realized: m / n for Wishart, the nominal one for GOE.
    pub fn achieved_beta(&self) -> f64 {
        match self.mu {
            MuEnsemble::Goe { beta } => beta,
            MuEnsemble::Wishart { .. } => self.wishart_columns() as f64 / self.n as f64,
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.n)
            .map(|i| self.nu.quantile((i as f64 + 0.5) / n))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub trial_index: usize,
    pub seed_used: u64,
}

impl SpectrumSample {
    pub fn min_eig(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// The generator for one trial: the master seed selects the key, the trial
/// index the stream, so trials are independent of scheduling.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn sample_spectrum(spec: &EnsembleSpec, trial: usize) -> Result<SpectrumSample> {
    spec.validate()?;
    if trial >= spec.trials {
        return Err(Error::InvalidEnsemble(format!(
            "trial {trial} out of range (trials = {})",
            spec.trials
        )));
    }
    let n = spec.n;
    let mut rng = trial_rng(spec.seed, trial);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut a = match spec.mu {
        MuEnsemble::Goe { beta } => {
            let off = beta / (n as f64).sqrt();
            let diag = off * 2f64.sqrt();
            let mut a = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                a[(j, j)] = diag * normal();
                for i in 0..j {
                    let x = off * normal();
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            a
        }
        MuEnsemble::Wishart { .. } => {
            let m = spec.wishart_columns();
            let x = DMatrix::<f64>::from_fn(n, m, |_, _| normal());
            let mut a = &x * x.transpose();
            a /= n as f64;
            a
        }
    };
    for (i, d) in spec.diagonal().into_iter().enumerate() {
        a[(i, i)] += d;
    }
    let mut eigenvalues: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumSample {
        eigenvalues,
        trial_index: trial,
        seed_used: spec.seed,
    })
}

/// (1/n) Σ log(λ_i - z).
pub fn empirical_potential(s: &SpectrumSample, z: f64) -> Result<f64> {
    let min_eig = s.min_eig();
    if !(z < min_eig) {
        return Err(Error::ZInsideSpectrum { z, min_eig });
    }
    Ok(s.eigenvalues.iter().map(|l| (l - z).ln()).sum::<f64>() / s.eigenvalues.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(serialize_with = "num")]
    pub min_eig: f64,
    /// NaN when no z was requested or z is not below the spectrum.
    #[serde(serialize_with = "num")]
    pub potential_at_z: f64,
}

/// Runs all trials in parallel; records come back in trial order.
pub fn run_trials(spec: &EnsembleSpec, z: Option<f64>) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let s = sample_spectrum(spec, t)?;
            let potential_at_z = match z {
                Some(z) => empirical_potential(&s, z)?,
                None => f64::NAN,
            };
            Ok(TrialRecord {
                trial: t,
                min_eig: s.min_eig(),
                potential_at_z,
            })
        })
        .collect()
}

/// Mean over trials of the smallest eigenvalue.
pub fn empirical_edge(spec: &EnsembleSpec) -> Result<f64> {
    let records = run_trials(spec, None)?;
    Ok(mean(records.iter().map(|r| r.min_eig)))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from("trial,min_eig,potential_at_z\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{}\n",
            r.trial,
            fmt17(r.min_eig),
            fmt17(r.potential_at_z)
        ));
    }
    s
}

/// Comparison of the empirical potential at z with a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    pub n: usize,
    pub trials: usize,
    #[serde(serialize_with = "num")]
    pub achieved_beta: f64,
    #[serde(serialize_with = "num")]
    pub z: f64,
    #[serde(serialize_with = "num")]
    pub empirical_mean: f64,
    #[serde(serialize_with = "num")]
    pub predicted: f64,
    #[serde(serialize_with = "num")]
    pub abs_error: f64,
    #[serde(serialize_with = "num")]
    pub empirical_edge: f64,
    #[serde(serialize_with = "num")]
    pub predicted_edge: f64,
}

impl McSummary {
    pub fn new(
        spec: &EnsembleSpec,
        records: &[TrialRecord],
        z: f64,
        predicted: f64,
        predicted_edge: f64,
    ) -> McSummary {
        let empirical_mean = mean(records.iter().map(|r| r.potential_at_z));
        McSummary {
            n: spec.n,
            trials: spec.trials,
            achieved_beta: spec.achieved_beta(),
            z,
            empirical_mean,
            predicted,
            abs_error: (empirical_mean - predicted).abs(),
            empirical_edge: mean(records.iter().map(|r| r.min_eig)),
            predicted_edge,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goe(n: usize, trials: usize) -> EnsembleSpec {
        EnsembleSpec::new(
            MuEnsemble::Goe { beta: 1.0 },
            Measure::delta(0.0).unwrap(),
            n,
            trials,
            7,
        )
    }

    #[test]
    fn small_goe_edge_is_loosely_bracketed() {
        let spec = goe(16, 100);
        for t in 0..100 {
            let s = sample_spectrum(&spec, t).unwrap();
            assert_eq!(s.eigenvalues.len(), 16);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(
                s.min_eig() > -3.0 && s.min_eig() < 0.0,
                "trial {t}: {}",
                s.min_eig()
            );
        }
    }

    #[test]
    fn deterministic_per_trial() {
        let spec = goe(40, 3);
        assert_eq!(
            sample_spectrum(&spec, 2).unwrap(),
            sample_spectrum(&spec, 2).unwrap()
        );
        assert_ne!(
            sample_spectrum(&spec, 1).unwrap().eigenvalues,
            sample_spectrum(&spec, 2).unwrap().eigenvalues
        );
        let again = run_trials(&spec, Some(-3.0)).unwrap();
        assert_eq!(
            trials_csv(&again),
            trials_csv(&run_trials(&spec, Some(-3.0)).unwrap())
        );
    }

    #[test]
    fn trace_matches_mean_of_nu() {
        let nu = Measure::atomic(vec![(-1.0, 0.5), (2.0, 0.5)]).unwrap();
        let n = 200;
        let spec = EnsembleSpec::new(MuEnsemble::Goe { beta: 1.0 }, nu.clone(), n, 1, 3);
        let s = sample_spectrum(&spec, 0).unwrap();
        let m = s.eigenvalues.iter().sum::<f64>() / n as f64;
        assert!((m - nu.mean()).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn wishart_mean_is_beta() {
        let spec = EnsembleSpec::new(
            MuEnsemble::Wishart { beta: 0.5 },
            Measure::delta(0.0).unwrap(),
            200,
            1,
            11,
        );
        let s = sample_spectrum(&spec, 0).unwrap();
        let m = s.eigenvalues.iter().sum::<f64>() / 200.0;
        assert!((m - 0.5).abs() < 0.05, "{m}");
        // rank m = 100: half the spectrum sits at zero
        assert!(s.eigenvalues[99].abs() < 1e-10);
        assert_eq!(spec.achieved_beta(), 0.5);
    }

    #[test]
    fn potential_and_errors() {
        let s = SpectrumSample {
            eigenvalues: vec![1.0, 2.0],
            trial_index: 0,
            seed_used: 0,
        };
        assert!((empirical_potential(&s, 0.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            empirical_potential(&s, 1.0),
            Err(Error::ZInsideSpectrum { .. })
        ));
        let mut spec = goe(5000, 1);
        assert!(matches!(spec.validate(), Err(Error::ResourceLimit { .. })));
        spec.n = 8;
        assert!(matches!(spec.validate(), Err(Error::InvalidEnsemble(_))));
        assert!(matches!(
            sample_spectrum(&goe(16, 2), 2),
            Err(Error::InvalidEnsemble(_))
        ));
    }
}
