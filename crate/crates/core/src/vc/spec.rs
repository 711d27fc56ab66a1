//! Constellation spec strings: `<coding>/<m><shaping>[R]`.

use crate::error::{Error, Result};
use crate::lattices::{parse_lattice_name, LatticeName};
use std::fmt;

/// Parsed form of a spec such as `Z4/16D4`, `Z32/2^4L32` or `Z4/4D4R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VcSpec {
    pub coding: LatticeName,
    pub m: i64,
    pub shaping: LatticeName,
    pub rotated: bool,
}

impl fmt::Display for VcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}{}{}",
            self.coding,
            self.m,
            self.shaping,
            if self.rotated { "R" } else { "" }
        )
    }
}

pub fn parse_vc_spec(spec: &str) -> Result<VcSpec> {
    let bad = |reason: &str| Error::InvalidSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (coding, rest) = spec
        .trim()
        .split_once('/')
        .ok_or_else(|| bad("missing `/`"))?;
    let coding = parse_lattice_name(coding, None).map_err(|_| bad("unknown coding lattice"))?;
    let n = coding.dim();

    let digits_end = rest
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(rest.len());
    let (m, rest) = if rest[digits_end..].starts_with('^') {
        let base: i64 = rest[..digits_end]
            .parse()
            .map_err(|_| bad("bad scale base"))?;
        let tail = &rest[digits_end + 1..];
        let exp_end = tail
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(tail.len());
        let exp: u32 = tail[..exp_end]
            .parse()
            .map_err(|_| bad("bad scale exponent"))?;
        let m = base
            .checked_pow(exp)
            .ok_or_else(|| bad("scale too large"))?;
        (m, &tail[exp_end..])
    } else if digits_end == 0 {
        (1, rest)
    } else {
        let m: i64 = rest[..digits_end].parse().map_err(|_| bad("bad scale"))?;
        (m, &rest[digits_end..])
    };
    if m < 1 {
        return Err(bad("scale must be positive"));
    }
    let (name, rotated) = match rest.strip_suffix('R') {
        Some(stripped) => (stripped, true),
        None => (rest, false),
    };
    let shaping = parse_lattice_name(name, Some(n)).map_err(|e| match e {
        Error::UnsupportedLattice(_) => bad("unknown or mismatched shaping lattice"),
        other => other,
    })?;
    if rotated && n % 2 != 0 {
        return Err(bad("rotation needs an even dimension"));
    }
    Ok(VcSpec {
        coding,
        m,
        shaping,
        rotated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_specs() {
        let s = parse_vc_spec("Z4/16D4").unwrap();
        assert_eq!(
            (s.coding, s.m, s.shaping, s.rotated),
            (LatticeName::Z(4), 16, LatticeName::D(4), false)
        );
        let s = parse_vc_spec("Z32/2^4L32").unwrap();
        assert_eq!((s.m, s.shaping), (16, LatticeName::L32));
        let s = parse_vc_spec("Z4/4D4R").unwrap();
        assert!(s.rotated);
        assert_eq!(parse_vc_spec("D4/16D4").unwrap().coding, LatticeName::D(4));
        assert_eq!(parse_vc_spec("Z1/2Z").unwrap().shaping, LatticeName::Z(1));
        assert_eq!(
            parse_vc_spec("Z24/2Leech24").unwrap().to_string(),
            "Z24/2Leech24"
        );
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["Z4", "Z4/16E8", "Q4/2D4", "Z4/0D4", "Z3/2Z3R", "Z4/16A4"] {
            assert!(
                matches!(parse_vc_spec(s), Err(Error::InvalidSpec { .. })),
                "{s}"
            );
        }
    }
}
