//! Inclusion sets as CSV: header `cx,cy,radius,gbar`, one circle per row.

use std::fmt::Write;

use super::{validate_inclusions, Inclusion};
use crate::error::{Error, Result};
use crate::mesh::Domain;
use crate::scalar::Scalar;

pub fn inclusions_csv<T: Scalar>(inclusions: &[Inclusion<T>]) -> String {
    let mut out = String::from("cx,cy,radius,gbar\n");
    for inc in inclusions {
        let f = |x: T| x.to_f64_lossy();
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", f(inc.center[0]), f(inc.center[1]), f(inc.radius), f(inc.gbar)).unwrap();
    }
    out
}

/// Parses [`inclusions_csv`] output. Lines starting with `#` are skipped.
/// When a domain is given the set is also checked for containment and
/// overlap.
pub fn parse_inclusions_csv<T: Scalar>(text: &str, modes: usize, domain: Option<&Domain<T>>) -> Result<Vec<Inclusion<T>>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != "cx,cy,radius,gbar" {
                return Err(Error::Parse { line: i + 1, detail: "expected header `cx,cy,radius,gbar`".into() });
            }
            header_seen = true;
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse { line: i + 1, detail: e.to_string() }))
            .collect::<Result<_>>()?;
        if f.len() != 4 {
            return Err(Error::Parse { line: i + 1, detail: "expected four columns".into() });
        }
        let inc = Inclusion::new([T::lit(f[0]), T::lit(f[1])], T::lit(f[2]), T::lit(f[3]), modes)
            .map_err(|e| Error::Parse { line: i + 1, detail: e.to_string() })?;
        out.push(inc);
    }
    if !header_seen {
        return Err(Error::Parse { line: 1, detail: "missing header".into() });
    }
    if let Some(d) = domain {
        validate_inclusions(d, &out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let incs = vec![
            Inclusion::new([0.3, -0.1 / 3.0], 0.05, 0.1, 4).unwrap(),
            Inclusion::new([-0.4, 0.3], 0.1, 0.01, 4).unwrap(),
        ];
        let text = format!("# comment\n{}", inclusions_csv(&incs));
        let back = parse_inclusions_csv(&text, 4, Some(&Domain::square(1.0))).unwrap();
        assert_eq!(back, incs);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_inclusions_csv::<f64>("cx,cy,radius,gbar\n0,0,-1,0\n", 2, None).is_err());
        assert!(parse_inclusions_csv::<f64>("cx,cy,radius,gbar\n0,0,0.1\n", 2, None).is_err());
        assert!(parse_inclusions_csv::<f64>("a,b\n", 2, None).is_err());
        let overlap = "cx,cy,radius,gbar\n0,0,0.1,0\n0.1,0,0.1,0\n";
        assert!(parse_inclusions_csv::<f64>(overlap, 2, Some(&Domain::square(1.0))).is_err());
    }
}
