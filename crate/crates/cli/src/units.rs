//! Numbers with SI prefixes and optional unit names on the command line.

const UNITS: [&str; 9] = ["Hz", "ohm", "Ω", "H", "F", "A", "V", "W", "s"];

/// Parse `"100k"`, `"82.8uH"`, `"0.425 ohm"`, `"1e5"` and similar.
pub fn parse_si(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let mut body = t;
    for u in UNITS {
        if let Some(b) = body.strip_suffix(u) {
            body = b.trim_end();
            break;
        }
    }
    let (num, scale) = match body.chars().last() {
        Some('p') => (&body[..body.len() - 1], 1e-12),
        Some('n') => (&body[..body.len() - 1], 1e-9),
        Some('u') => (&body[..body.len() - 1], 1e-6),
        Some('µ') => (&body[..body.len() - 'µ'.len_utf8()], 1e-6),
        Some('m') => (&body[..body.len() - 1], 1e-3),
        Some('k') => (&body[..body.len() - 1], 1e3),
        Some('M') => (&body[..body.len() - 1], 1e6),
        Some('G') => (&body[..body.len() - 1], 1e9),
        _ => (body, 1.0),
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| format!("cannot read `{s}` as a number"))
}

pub fn parse_si_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_si).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_and_units() {
        assert_eq!(parse_si("100k").unwrap(), 1e5);
        assert!((parse_si("82.8uH").unwrap() - 82.8e-6).abs() < 1e-18);
        assert!((parse_si("425 mohm").unwrap() - 0.425).abs() < 1e-15);
        assert_eq!(parse_si("1e5").unwrap(), 1e5);
        assert_eq!(parse_si("2MHz").unwrap(), 2e6);
        assert!((parse_si("100pF").unwrap() - 1e-10).abs() < 1e-24);
        assert!(parse_si("fast").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_si_list("0,10k,100k").unwrap(), vec![0.0, 1e4, 1e5]);
    }
}
