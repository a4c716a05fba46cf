//! Parsers for command-line values: SI-suffixed numbers, sweep ranges,
//! coupling flags and `key=value` overrides.

use vo2osc::circuit::CouplingKind;

/// Parses a number with an optional SI prefix: `p n u μ m k M`.
pub fn parse_si(s: &str) -> Result<f64, String> {
    let s = s.trim();
    // divide for sub-unit prefixes so that e.g. 10n is the nearest double to 1e-8
    let scales: [(&str, f64, bool); 8] = [
        ("p", 1e12, false),
        ("n", 1e9, false),
        ("u", 1e6, false),
        ("μ", 1e6, false),
        ("m", 1e3, false),
        ("k", 1e3, true),
        ("M", 1e6, true),
        ("", 1.0, true),
    ];
    for (suffix, scale, multiply) in scales {
        let Some(num) = s.strip_suffix(suffix) else {
            continue;
        };
        if num.is_empty() {
            continue;
        }
        let Ok(x) = num.parse::<f64>() else {
            continue;
        };
        let v = if multiply { x * scale } else { x / scale };
        if !v.is_finite() {
            return Err(format!("{s:?} is not a finite number"));
        }
        return Ok(v);
    }
    Err(format!("cannot parse {s:?} as a number (SI prefixes: p n u m k M)"))
}

/// Sweep values from `lo:hi:logN`, `lo:hi:linN`, `lo:hi:N` or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts[..] {
        [list] => list
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(parse_si)
            .collect::<Result<Vec<_>, _>>()?,
        [lo, hi, spacing] => {
            let (lo, hi) = (parse_si(lo)?, parse_si(hi)?);
            let (log, n) = if let Some(n) = spacing.strip_prefix("log") {
                (true, n)
            } else if let Some(n) = spacing.strip_prefix("lin") {
                (false, n)
            } else {
                (false, spacing)
            };
            let n: usize = n
                .parse()
                .map_err(|_| format!("bad point count in range {s:?}"))?;
            if hi < lo {
                return Err(format!("range {s:?} is empty (hi < lo)"));
            }
            if log && !(lo > 0.0) {
                return Err(format!("log range {s:?} needs positive bounds"));
            }
            grid(lo, hi, n, log)
        }
        _ => return Err(format!("bad range {s:?} (expected lo:hi:logN or a comma list)")),
    };
    if values.is_empty() {
        return Err(format!("range {s:?} is empty"));
    }
    Ok(values)
}

fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                let u = k as f64 / (n - 1) as f64;
                if k == n - 1 {
                    hi
                } else if log {
                    lo * (hi / lo).powf(u)
                } else {
                    lo + (hi - lo) * u
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFlag {
    pub kind: CouplingKind,
    pub value: f64,
    pub pair: (usize, usize),
}

/// `KIND:VALUE[@I-J]` with KIND `r` or `c`; the pair defaults to 0-1.
pub fn parse_coupling(s: &str) -> Result<CouplingFlag, String> {
    let (body, pair) = match s.split_once('@') {
        Some((b, p)) => (b, parse_pair(p)?),
        None => (s, (0, 1)),
    };
    let (kind, value) = body
        .split_once(':')
        .ok_or_else(|| format!("bad coupling {s:?} (expected r:VALUE or c:VALUE)"))?;
    let kind = parse_kind(kind)?;
    Ok(CouplingFlag {
        kind,
        value: parse_si(value)?,
        pair,
    })
}

pub fn parse_kind(s: &str) -> Result<CouplingKind, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "r" => Ok(CouplingKind::Resistive),
        "c" => Ok(CouplingKind::Capacitive),
        _ => Err(format!("coupling kind must be r or c (got {s:?})")),
    }
}

/// `I-J` with `I != J`.
pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("bad oscillator pair {s:?} (expected I-J)");
    let (a, b) = s.split_once('-').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == b {
        return Err(bad());
    }
    Ok((a, b))
}

/// `key=value` with an SI-suffixed value.
pub fn parse_set(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("bad override {s:?} (expected key=value)"))?;
    if k.trim().is_empty() {
        return Err(format!("bad override {s:?} (empty key)"));
    }
    Ok((k.trim().to_string(), parse_si(v)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_prefixes() {
        assert_eq!(parse_si("2.4k").unwrap(), 2400.0);
        assert_eq!(parse_si("10n").unwrap(), 1e-8);
        assert_eq!(parse_si("1u").unwrap(), 1e-6);
        assert_eq!(parse_si("1μ").unwrap(), 1e-6);
        assert_eq!(parse_si("2M").unwrap(), 2e6);
        assert_eq!(parse_si("5m").unwrap(), 5e-3);
        assert_eq!(parse_si("10p").unwrap(), 1e-11);
        assert_eq!(parse_si("-0.031").unwrap(), -0.031);
        assert_eq!(parse_si("1e-9").unwrap(), 1e-9);
        for bad in ["", "k", "abc", "1x", "inf", "NaN", "1kk"] {
            assert!(parse_si(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ranges() {
        let r = parse_range("1.5k:10k:log25").unwrap();
        assert_eq!(r.len(), 25);
        assert_eq!(r[0], 1500.0);
        assert_eq!(r[24], 10e3);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        let ratio = r[1] / r[0];
        assert!((r[13] / r[12] - ratio).abs() < 1e-12);
        assert_eq!(parse_range("0:1:lin3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("1n,4n").unwrap(), vec![1e-9, 4e-9]);
        assert_eq!(parse_range("2k").unwrap(), vec![2e3]);
        for bad in ["", "10k:1k:log5", "1k:2k:log0", "1k:2k", "0:1:log3", "1:2:logx"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn couplings() {
        let c = parse_coupling("r:2.4k").unwrap();
        assert_eq!(c.kind, CouplingKind::Resistive);
        assert_eq!(c.value, 2400.0);
        assert_eq!(c.pair, (0, 1));
        let c = parse_coupling("C:1u@2-3").unwrap();
        assert_eq!(c.kind, CouplingKind::Capacitive);
        assert_eq!(c.pair, (2, 3));
        for bad in ["x:1", "r", "r:1@1-1", "r:1@a-b", "r:"] {
            assert!(parse_coupling(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn overrides() {
        assert_eq!(parse_set("v_dd=62").unwrap(), ("v_dd".into(), 62.0));
        assert_eq!(parse_set("sim.duration=500m").unwrap(), ("sim.duration".into(), 0.5));
        assert!(parse_set("v_dd").is_err());
        assert!(parse_set("=1").is_err());
    }
}
