//! Parsing of measure tokens, grids and tolerance overrides.

use std::fmt;

use fpconv::potential::Grid;
use fpconv::{Error, Measure};

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Domain(String),
    Selftest,
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Selftest => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Domain(m) => write!(f, "domain error: {m}"),
            Failure::Selftest => write!(f, "selftest failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_domain_error() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Config(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// Expands `sc`, `sc:B`, `mp`, `mp:B` and `delta:A` to measure JSON.
fn expand_shorthand(token: &str) -> Option<Result<String, String>> {
    let (name, arg) = match token.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (token, None),
    };
    let ty = match name {
        "sc" => "semicircle",
        "mp" => "marchenko_pastur",
        "delta" => "delta",
        _ => return None,
    };
    let value = match arg.map(str::parse::<f64>) {
        None if ty == "delta" => Ok(0.0),
        None => Ok(1.0),
        Some(Ok(v)) => Ok(v),
        Some(Err(_)) => Err(format!("bad number in measure token '{token}'")),
    };
    Some(value.map(|v| match ty {
        "delta" => format!(r#"{{"type":"atomic","atoms":[[{v:e},1]]}}"#),
        _ => format!(r#"{{"type":"{ty}","beta":{v:e}}}"#),
    }))
}

/// A measure from inline JSON, `@path` or a shorthand token.
pub fn parse_measure(arg: &str) -> Outcome<Measure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{path}: {e}")))?
        }
        None => arg.to_string(),
    };
    let text = text.trim();
    let json = match expand_shorthand(text) {
        Some(r) => r.map_err(Failure::Config)?,
        None => text.to_string(),
    };
    json.parse::<Measure>().map_err(Failure::from)
}

/// `start:stop:count`, strictly increasing.
pub fn parse_grid(arg: &str) -> Outcome<Grid> {
    let bad = || Failure::Config(format!("grid '{arg}' is not start:stop:count"));
    let parts: Vec<&str> = arg.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = a.parse().map_err(|_| bad())?;
    let stop: f64 = b.parse().map_err(|_| bad())?;
    let count: usize = n.parse().map_err(|_| bad())?;
    if !(start.is_finite() && stop.is_finite()) || count == 0 {
        return Err(bad());
    }
    if count > 1 && !(start < stop) {
        return Err(Failure::Config(format!(
            "grid '{arg}' is not strictly increasing"
        )));
    }
    Ok(Grid { start, stop, count })
}

/// `NAME=VALUE`.
pub fn parse_tol(arg: &str) -> Outcome<(String, f64)> {
    let (name, value) = arg
        .split_once('=')
        .ok_or_else(|| Failure::Config(format!("tolerance '{arg}' is not NAME=VALUE")))?;
    let value = value
        .parse()
        .map_err(|_| Failure::Config(format!("tolerance '{arg}' has a bad value")))?;
    Ok((name.to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand() {
        assert_eq!(
            parse_measure("sc").unwrap(),
            Measure::semicircle(1.0).unwrap()
        );
        assert_eq!(
            parse_measure("sc:2.0").unwrap(),
            Measure::semicircle(2.0).unwrap()
        );
        assert_eq!(
            parse_measure("mp:0.5").unwrap(),
            Measure::marchenko_pastur(0.5).unwrap()
        );
        assert_eq!(
            parse_measure("delta:-1.5").unwrap(),
            Measure::delta(-1.5).unwrap()
        );
        assert!(matches!(parse_measure("sc:x"), Err(Failure::Config(_))));
        assert!(matches!(parse_measure("sc:-1"), Err(Failure::Config(_))));
        assert!(matches!(
            parse_measure("{\"type\":\"nope\"}"),
            Err(Failure::Config(_))
        ));
    }

    #[test]
    fn grids() {
        let g = parse_grid("-6:-3:4").unwrap();
        assert_eq!(g.points(), vec![-6.0, -5.0, -4.0, -3.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert_eq!(parse_grid("2:2:1").unwrap().points(), vec![2.0]);
    }

    #[test]
    fn tolerances() {
        assert_eq!(parse_tol("tail=1e-3").unwrap(), ("tail".to_string(), 1e-3));
        assert!(parse_tol("tail").is_err());
    }
}
