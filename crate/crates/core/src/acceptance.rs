//! The acceptance suite: ten end-to-end checks, each with a tolerance and a
//! runtime budget. Shared by the `acceptance` test target and `fpconv selftest`.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::freeconv::{ConvolutionPair, CriticalKind, HStarKind};
use crate::measures::Measure;
use crate::montecarlo::{run_trials, EnsembleSpec, MuEnsemble};
use crate::potential::{emit_profile, u_direct, Grid, ProfileKind};

const DEFAULTS: [(&str, f64); 8] = [
    ("self_consistency", 1e-8),
    ("additivity", 1e-8),
    ("mp_shift", 1e-9),
    ("fixed_point", 1e-9),
    ("derivative", 1e-6),
    ("mc_edge", 0.1),
    ("mc_potential", 0.05),
    ("tail", 1e-4),
];

/// Named tolerances, overridable from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(DEFAULTS.into_iter().collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn set(&mut self, name: &str, value: f64) -> std::result::Result<(), String> {
        let key = DEFAULTS
            .iter()
            .map(|(k, _)| *k)
            .find(|k| *k == name)
            .ok_or_else(|| {
                format!(
                    "unknown tolerance '{name}' (known: {})",
                    self.names().join(", ")
                )
            })?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(format!("tolerance {name} must be positive, got {value}"));
        }
        self.0.insert(key, value);
        Ok(())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.0.keys().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2} s of {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

type Check = fn(&Tolerances) -> Result<(bool, String)>;

/// (name, budget in seconds, check), indexed by criterion number - 1.
pub const CRITERIA: [(&str, u64, Check); 10] = [
    ("semicircle self-consistency", 5, self_consistency),
    ("R-additivity", 5, additivity),
    ("MP shift", 1, mp_shift),
    ("fixed-point residual", 10, fixed_point),
    ("critical point trichotomy", 10, trichotomy),
    ("derivative identities", 5, derivatives),
    ("Monte Carlo edge and potential", 180, monte_carlo),
    ("tail normalization", 1, tail),
    ("support sandwich", 1, sandwich),
    ("energy landscape shapes", 10, landscape_shapes),
];

/// Runs criterion `id` (1-based). Over-budget runs fail.
pub fn run(id: usize, tol: &Tolerances) -> Outcome {
    let (name, budget, check) = CRITERIA[id - 1];
    let budget = Duration::from_secs(budget);
    let t = Instant::now();
    let (ok, mut detail) = match check(tol) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = t.elapsed();
    if elapsed > budget {
        detail.push_str("; over budget");
    }
    Outcome {
        id,
        name,
        passed: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

pub fn run_all(tol: &Tolerances) -> Vec<Outcome> {
    (1..=CRITERIA.len()).map(|i| run(i, tol)).collect()
}

fn sc(b: f64) -> Measure {
    Measure::semicircle(b).expect("valid beta")
}

fn mp(b: f64) -> Measure {
    Measure::marchenko_pastur(b).expect("valid beta")
}

fn delta(a: f64) -> Measure {
    Measure::delta(a).expect("finite atom")
}

fn two_atoms(x: f64, y: f64) -> Measure {
    Measure::atomic(vec![(x, 0.5), (y, 0.5)]).expect("valid atoms")
}

fn arcsine() -> Measure {
    Measure::jacobi(-1.0, 1.0, 0.5, 0.5).expect("valid jacobi")
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Largest |u_variational - u_direct(expected)| over 50 points left of z*.
fn potential_gap(pair: &ConvolutionPair, expected: &Measure, z_star: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in linspace(z_star - 4.0, z_star - 1e-3, 50) {
        let u = pair.u_variational(z)?.u;
        worst = worst.max((u - u_direct(expected, z)?).abs());
    }
    Ok(worst)
}

fn self_consistency(tol: &Tolerances) -> Result<(bool, String)> {
    let t = tol.get("self_consistency");
    let mut worst: f64 = 0.0;
    for beta in [0.5, 1.0, 2.0] {
        let pair = ConvolutionPair::new(&sc(beta), &delta(0.0))?;
        let z_star = pair.endpoint_summary()?.z_star;
        worst = worst.max(potential_gap(&pair, &sc(beta), z_star)?);
    }
    Ok((
        worst <= t,
        format!("max |u_var - u_direct| = {worst:.2e} (tol {t:.0e})"),
    ))
}

fn additivity(tol: &Tolerances) -> Result<(bool, String)> {
    let t = tol.get("additivity");
    let mut worst_edge: f64 = 0.0;
    let mut worst_u: f64 = 0.0;
    for (b1, b2) in [(1.0, 1.0), (0.5, 2.0), (1.5, 0.7)] {
        let beta = f64::hypot(b1, b2);
        let pair = ConvolutionPair::new(&sc(b1), &sc(b2))?;
        let s = pair.endpoint_summary()?;
        let (g_star, z_star) = (1.0 / beta, -2.0 * beta);
        let h_star = -(b2 * b2 * g_star + 1.0 / g_star);
        for (got, want) in [(s.h_star, h_star), (s.g_star, g_star), (s.z_star, z_star)] {
            worst_edge = worst_edge.max((got - want).abs());
        }
        worst_u = worst_u.max(potential_gap(&pair, &sc(beta), z_star)?);
    }
    Ok((
        worst_edge <= t && worst_u <= t,
        format!(
            "max endpoint error {worst_edge:.2e}, max potential error {worst_u:.2e} (tol {t:.0e})"
        ),
    ))
}

fn mp_shift(tol: &Tolerances) -> Result<(bool, String)> {
    let t = tol.get("mp_shift");
    let mut worst: f64 = 0.0;
    for beta in [0.5, 1.0, 2.0] {
        for a in [-1.0, 0.0, 3.0] {
            let m = mp(beta);
            let expected = a + m.support().lower;
            let got = ConvolutionPair::new(&m, &delta(a))?
                .endpoint_summary()?
                .z_star;
            worst = worst.max((got - expected).abs());
        }
    }
    Ok((
        worst <= t,
        format!("max |z* - a - supp_-| = {worst:.2e} (tol {t:.0e})"),
    ))
}

fn random_measure(rng: &mut ChaCha8Rng, allow_atoms: bool) -> Measure {
    let families = if allow_atoms { 4 } else { 3 };
    match rng.random_range(0..families) {
        0 => sc(rng.random_range(0.3..2.0)),
        1 => mp(rng.random_range(0.2..3.0)),
        2 => {
            let a = rng.random_range(-2.0..1.0);
            let w = rng.random_range(0.5..3.0);
            Measure::jacobi(
                a,
                a + w,
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
            )
            .expect("valid jacobi")
        }
        _ => {
            let k = rng.random_range(1..=3);
            let ws: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = ws.iter().sum();
            let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            let ws = &ws[..xs.len()];
            let total_kept: f64 = ws.iter().sum::<f64>() / total;
            Measure::atomic(
                xs.iter()
                    .zip(ws)
                    .map(|(&x, &w)| (x, w / total / total_kept))
                    .collect(),
            )
            .expect("valid atoms")
        }
    }
}

fn fixed_point(tol: &Tolerances) -> Result<(bool, String)> {
    let t = tol.get("fixed_point");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mu = random_measure(&mut rng, false);
        let nu = random_measure(&mut rng, true);
        let pair = ConvolutionPair::new(&mu, &nu)?;
        let z_star = pair.endpoint_summary()?.z_star;
        let z = z_star - rng.random_range(1e-3f64.ln()..10f64.ln()).exp();
        let (g, _) = pair.conv_stieltjes(z)?;
        worst = worst.max(pair.fixed_point_residual(z, g)?.abs() / g.max(1.0));
    }
    Ok((
        worst <= t,
        format!("max residual {worst:.2e} over 200 pairs (tol {t:.0e})"),
    ))
}

fn trichotomy(_: &Tolerances) -> Result<(bool, String)> {
    let mut failures = Vec::new();
    for (mu_name, mu) in [("sc(1)", sc(1.0)), ("MP(1)", mp(1.0))] {
        for (nu_name, nu) in [
            ("delta0", delta(0.0)),
            ("+-1", two_atoms(-1.0, 1.0)),
            ("arcsine", arcsine()),
        ] {
            let pair = ConvolutionPair::new(&mu, &nu)?;
            let s = pair.endpoint_summary()?;
            let mut fail = |what: String| failures.push(format!("{mu_name}+{nu_name}: {what}"));
            for dz in [1e-3, 0.5, 2.0] {
                let n = pair.classify_critical_points(s.z_star + dz)?.points.len();
                if n != 0 {
                    fail(format!("{n} critical points at z* + {dz}"));
                }
            }
            let at = pair.classify_critical_points(s.z_star)?.points;
            match s.h_star_kind {
                HStarKind::CriticalPoint => {
                    let ok = at.len() == 1
                        && at[0].kind == CriticalKind::Inflection
                        && (at[0].g - s.g_star).abs() <= 1e-6 * s.g_star.max(1.0);
                    if !ok {
                        fail(format!("at z*: {at:?}"));
                    }
                }
                // g* sits on the boundary of the domain of E
                HStarKind::DomainEndpoint => {
                    if !at.is_empty() {
                        fail(format!("interior critical points at z*: {at:?}"));
                    }
                }
            }
            for dz in [1e-2, 0.5, 3.0] {
                let z = s.z_star - dz;
                let pts = pair.classify_critical_points(z)?.points;
                let (g, _) = pair.conv_stieltjes(z)?;
                let ok = match pts.as_slice() {
                    [m, rest @ ..] => {
                        m.kind == CriticalKind::LocalMin
                            && m.g > 0.0
                            && m.g < s.g_star
                            && (m.g - g).abs() <= 1e-9 * g.max(1.0)
                            && rest.len() <= 1
                            && rest
                                .iter()
                                .all(|p| p.kind == CriticalKind::LocalMax && p.g > m.g)
                    }
                    [] => false,
                };
                if !ok {
                    fail(format!("at z* - {dz}: {pts:?}"));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "6 pairs, 7 values of z each".into()
        } else {
            failures.join("; ")
        },
    ))
}

fn derivative_pairs() -> Vec<ConvolutionPair> {
    [
        (sc(1.0), two_atoms(-1.0, 1.0)),
        (mp(0.5), two_atoms(-1.0, 1.0)),
        (sc(1.0), arcsine()),
        (mp(2.0), sc(0.5)),
        (mp(0.5), arcsine()),
    ]
    .iter()
    .map(|(m, n)| ConvolutionPair::new(m, n))
    .collect::<Result<_>>()
    .expect("nondegenerate mu")
}

fn derivatives(tol: &Tolerances) -> Result<(bool, String)> {
    let t = tol.get("derivative");
    let pairs = derivative_pairs();

    // U' = -G
    let mut worst_u: f64 = 0.0;
    for pair in &pairs[..2] {
        let z_star = pair.endpoint_summary()?.z_star;
        for z in linspace(z_star - 3.0, z_star - 0.2, 10) {
            let d = 1e-4;
            let fd = (pair.u_variational(z + d)?.u - pair.u_variational(z - d)?.u) / (2.0 * d);
            worst_u = worst_u.max((fd + pair.conv_stieltjes(z)?.0).abs());
        }
    }

    // E' at random (z, g)
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_e: f64 = 0.0;
    let mut taken = 0;
    while taken < 100 {
        let pair = &pairs[rng.random_range(0..pairs.len())];
        let s = pair.endpoint_summary()?;
        let z = s.z_star - rng.random_range(0.1..3.0);
        let g = rng.random_range(0.05..0.95) * s.g_star.min(5.0);
        let d = 1e-5 * g.max(1.0);
        let (Ok(a), Ok(b), Ok(e1)) = (
            pair.e_value(z, g - d),
            pair.e_value(z, g + d),
            pair.e_deriv(z, g),
        ) else {
            continue;
        };
        worst_e = worst_e.max(((b - a) / (2.0 * d) - e1).abs());
        taken += 1;
    }

    // F' along dom F
    let mut worst_f: f64 = 0.0;
    for pair in &pairs {
        let upper = pair.f_domain_upper();
        for dist in linspace(0.1f64.ln(), 10f64.ln(), 20).map(f64::exp) {
            let h = upper - dist;
            let d = 1e-5;
            let fd = (pair.f_value(h + d)? - pair.f_value(h - d)?) / (2.0 * d);
            worst_f = worst_f.max((fd - pair.f_deriv(h)?).abs());
        }
    }
    let worst = worst_u.max(worst_e).max(worst_f);
    Ok((
        worst <= t,
        format!("max error U' {worst_u:.2e}, E' {worst_e:.2e}, F' {worst_f:.2e} (tol {t:.0e})"),
    ))
}

fn monte_carlo(tol: &Tolerances) -> Result<(bool, String)> {
    let (te, tp) = (tol.get("mc_edge"), tol.get("mc_potential"));
    let nu = two_atoms(-1.0, 1.0);
    let pair = ConvolutionPair::new(&sc(1.0), &nu)?;
    let z_star = pair.endpoint_summary()?.z_star;
    let z = z_star - 0.5;
    let predicted = pair.u_variational(z)?.u;
    let spec = EnsembleSpec::new(MuEnsemble::Goe { beta: 1.0 }, nu, 1000, 20, 2024);
    let records = run_trials(&spec, Some(z))?;
    let k = records.len() as f64;
    let edge = records.iter().map(|r| r.min_eig).sum::<f64>() / k;
    let potential = records.iter().map(|r| r.potential_at_z).sum::<f64>() / k;
    let (de, dp) = ((edge - z_star).abs(), (potential - predicted).abs());
    Ok((
        de <= te && dp <= tp,
        format!("|edge - z*| = {de:.3e} (tol {te}), |potential - u| = {dp:.3e} (tol {tp})"),
    ))
}

fn tail(tol: &Tolerances) -> Result<(bool, String)> {
    let t = tol.get("tail");
    let z = -1e4;
    let mut worst: f64 = 0.0;
    for (mu, nu) in [
        (sc(1.0), delta(0.0)),
        (sc(1.0), two_atoms(-1.0, 1.0)),
        (mp(0.5), arcsine()),
    ] {
        let u = ConvolutionPair::new(&mu, &nu)?.u_variational(z)?.u;
        worst = worst.max((u - z.abs().ln()).abs());
    }
    Ok((
        worst <= t,
        format!("max |u(-1e4) - log 1e4| = {worst:.2e} (tol {t:.0e})"),
    ))
}

fn sandwich(_: &Tolerances) -> Result<(bool, String)> {
    let pairs = [
        (sc(1.0), two_atoms(-1.0, 1.0)),
        (sc(0.5), sc(1.0)),
        (sc(1.0), arcsine()),
        (
            sc(0.3),
            Measure::atomic(vec![(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)]).expect("valid atoms"),
        ),
        (sc(2.0), two_atoms(-0.5, 0.5)),
    ];
    let mut failures = Vec::new();
    for (mu, nu) in &pairs {
        let z_star = ConvolutionPair::new(mu, nu)?.endpoint_summary()?.z_star;
        let (wm, wn) = (mu.support().width(), nu.support().width());
        let w = 2.0 * z_star.abs();
        if !(w >= wm.max(wn) && w <= wm + wn) {
            failures.push(format!("2|z*| = {w} outside [{}, {}]", wm.max(wn), wm + wn));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} symmetric pairs", pairs.len())
        } else {
            failures.join("; ")
        },
    ))
}

/// Counts of (local_min, local_max, inflection) annotations.
fn counts(kinds: &[&str]) -> (usize, usize, usize) {
    let c = |k: &str| kinds.iter().filter(|&&x| x == k).count();
    (c("local_min"), c("local_max"), c("inflection"))
}

fn landscape_shapes(_: &Tolerances) -> Result<(bool, String)> {
    let shifted = two_atoms(-1.17, -0.17);
    let panels: [(&str, Measure, Measure, Option<f64>, f64); 4] = [
        ("a", mp(0.5), two_atoms(-1.0, 1.0), Some(-1.5), 0.0),
        ("b", sc(1.0), two_atoms(-1.0, 1.0), Some(-3.0), 0.0),
        ("c", sc(1.0), shifted.clone(), None, -0.14),
        ("d", sc(1.0), shifted, None, 0.1),
    ];
    let mut failures = Vec::new();
    for (name, mu, nu, z, offset) in panels {
        let pair = ConvolutionPair::new(&mu, &nu)?;
        let s = pair.endpoint_summary()?;
        let z = z.unwrap_or(s.z_star + offset);
        let grid = Grid {
            start: 1e-3,
            stop: 6.0,
            count: 600,
        };
        let e = emit_profile(&pair, Some(z), ProfileKind::E, &grid)?;
        let kinds: Vec<&str> = e
            .annotations
            .iter()
            .map(|a| a.kind.as_str())
            .filter(|k| *k != "g_star")
            .collect();
        let (mins, maxs, infl) = counts(&kinds);
        let f = emit_profile(
            &pair,
            None,
            ProfileKind::F,
            &Grid {
                start: s.f_domain_upper - 8.0,
                stop: s.f_domain_upper,
                count: 400,
            },
        )?;
        let f_kinds: Vec<&str> = f.annotations.iter().map(|a| a.kind.as_str()).collect();
        let mut fail = |what: String| failures.push(format!("panel {name}: {what}"));
        // F peaks at h* except in panel a, where it increases up to the end of its domain
        let f_expected = if name == "a" {
            f_kinds == ["h_star"]
        } else {
            counts(&f_kinds) == (0, 1, 0)
        };
        if !f_expected {
            fail(format!("F annotations {f_kinds:?}"));
        }
        if z < s.z_star {
            // g_1 = G(z) is the unique minimum; anything else is a maximum past g*
            let g1 = pair.conv_stieltjes(z)?.0;
            let min_ok = e
                .annotations
                .iter()
                .any(|a| a.kind == "local_min" && (a.abscissa - g1).abs() <= 1e-9 * g1.max(1.0));
            let spurious_ok = e
                .annotations
                .iter()
                .filter(|a| a.kind == "local_max")
                .all(|a| a.abscissa > s.g_star);
            if mins != 1 || !min_ok || !spurious_ok || infl != 0 {
                fail(format!("E annotations {kinds:?} at z = {z}"));
            }
            let expected_max = usize::from(name != "a");
            if maxs != expected_max {
                fail(format!("expected {expected_max} local max, got {maxs}"));
            }
            if name == "b" {
                // E falls below U(z) near the right end of its domain
                let u = pair.u_variational(z)?.u;
                if e.value.last().is_none_or(|&v| v >= u) {
                    fail("E does not fall below U(z) past g*".into());
                }
            }
        } else if !kinds.is_empty() {
            fail(format!("critical points {kinds:?} at z = {z} > z*"));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "4 panels".into()
        } else {
            failures.join("; ")
        },
    ))
}
