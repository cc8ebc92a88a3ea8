//! Reader for FCIDUMP-style integral files.
//!
//! The header is a `&FCI ... &END` (or `/`) namelist; `NORB` is required.
//! Two optional non-standard keys are understood: `GEOMETRY=<R>` and
//! `KIND=BARE|EFFECTIVE`. Body lines are `value p q r s` with 1-based indices:
//! `p q r s` all nonzero is a two-body entry, `p q 0 0` a one-body entry and
//! `0 0 0 0` the scalar term. Orbital-energy lines `e p 0 0 0` are skipped.

use std::fs;
use std::path::Path;

use super::{EntryAccumulator, Kind, Symmetry, TensorSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct FcidumpOptions {
    /// Forces the symmetry group; otherwise taken from `KIND=` or inferred.
    pub symmetry: Option<Symmetry>,
    /// Overrides any `GEOMETRY=` header value.
    pub geometry: Option<f64>,
    /// Expected orbital count; a different `NORB` is an error.
    pub n_orb: Option<usize>,
    pub system: Option<String>,
}

struct Header {
    norb: Option<usize>,
    geometry: Option<f64>,
    kind: Option<Kind>,
}

fn parse_header(path: &Path, lines: &[(usize, &str)]) -> Result<Header> {
    let mut h = Header {
        norb: None,
        geometry: None,
        kind: None,
    };
    for &(lineno, line) in lines {
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            let Some((key, value)) = tok.split_once('=') else {
                continue;
            };
            let value = value.trim();
            match key.trim().to_ascii_uppercase().as_str() {
                "NORB" => {
                    h.norb = Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(path, lineno, format!("bad NORB '{value}'")))?,
                    )
                }
                "GEOMETRY" => {
                    h.geometry = Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(path, lineno, format!("bad GEOMETRY '{value}'")))?,
                    )
                }
                "KIND" => h.kind = Some(value.parse()?),
                _ => {}
            }
        }
    }
    Ok(h)
}

/// Reads an FCIDUMP-like file into a fully expanded, canonicalized set.
pub fn load_fcidump(path: impl AsRef<Path>, opts: &FcidumpOptions) -> Result<TensorSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();

    let end = lines
        .iter()
        .position(|(_, l)| {
            let t = l.trim().to_ascii_uppercase();
            t.starts_with("&END") || t == "/" || t.starts_with("/")
        })
        .ok_or_else(|| Error::parse(path, 1, "missing &END terminating the header"))?;
    let header = parse_header(path, &lines[..end])?;
    let norb = header.norb.ok_or_else(|| Error::parse(path, 1, "header lacks NORB"))?;
    if norb == 0 {
        return Err(Error::parse(path, 1, "NORB must be positive"));
    }
    if let Some(expected) = opts.n_orb {
        if expected != norb {
            return Err(Error::Invalid(format!(
                "NORB mismatch: file has {norb}, expected {expected}"
            )));
        }
    }

    let mut acc = EntryAccumulator::new(norb);
    for &(lineno, line) in &lines[end + 1..] {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad value '{}'", fields[0])))?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad index '{f}'")))?;
        }
        if let Some(&bad) = idx.iter().find(|&&i| i > norb) {
            return Err(Error::parse(path, lineno, format!("index {bad} exceeds NORB = {norb}")));
        }
        let located = |e: Error| match e {
            Error::Conflict { what, a, b } => Error::Conflict {
                what: format!("{what} at {}:{lineno}", path.display()),
                a,
                b,
            },
            other => other,
        };
        match idx {
            [0, 0, 0, 0] => acc.add_scalar(value).map_err(located)?,
            [p, 0, 0, 0] if p > 0 => {}
            [p, q, 0, 0] if p > 0 && q > 0 => acc.add_one(p - 1, q - 1, value).map_err(located)?,
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                acc.add_two([p - 1, q - 1, r - 1, s - 1], value).map_err(located)?
            }
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("unrecognised index pattern {idx:?}"),
                ))
            }
        }
    }

    let kind = match (opts.symmetry, header.kind) {
        (Some(sym), _) => Kind::from_symmetry(sym),
        (None, Some(kind)) => kind,
        (None, None) => {
            if acc.consistent_with(Symmetry::EightFold) {
                Kind::Bare
            } else {
                Kind::Effective
            }
        }
    };
    let geometry = opts.geometry.or(header.geometry).unwrap_or(0.0);
    let system = opts.system.clone().unwrap_or_default();
    acc.finish(system, geometry, kind)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn single_two_body_entry() {
        let f = write("&FCI NORB=1,NELEC=2,MS2=0,\n ORBSYM=1,\n ISYM=1,\n&END\n 0.5 1 1 1 1\n");
        let set = load_fcidump(f.path(), &FcidumpOptions::default()).unwrap();
        assert_eq!(set.n_orb(), 1);
        assert_eq!(set.two([0, 0, 0, 0]), 0.5);
        assert_eq!(set.one(0, 0), 0.0);
        assert_eq!(set.kind(), Kind::Bare);
    }

    #[test]
    fn expands_bare_symmetry_and_reads_all_parts() {
        let f = write("&FCI NORB=2,\n&END\n0.25 2 1 1 1\n-1.5 1 2 0 0\n0.75 0 0 0 0\n-0.3 1 0 0 0\n");
        let set = load_fcidump(f.path(), &FcidumpOptions::default()).unwrap();
        for t in Symmetry::EightFold.images([1, 0, 0, 0]) {
            assert_eq!(set.two(t), 0.25);
        }
        assert_eq!(set.one(0, 1), -1.5);
        assert_eq!(set.one(1, 0), -1.5);
        assert_eq!(set.scalar_term(), 0.75);
    }

    #[test]
    fn conflicting_duplicate_is_error() {
        let f = write("&FCI NORB=2\n&END\n0.25 1 2 1 2\n0.26 1 2 1 2\n");
        let err = load_fcidump(f.path(), &FcidumpOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Conflict { .. }), "{err}");
        let f = write("&FCI NORB=2\n&END\n0.25 1 2 1 2\n0.25 1 2 1 2\n");
        assert!(load_fcidump(f.path(), &FcidumpOptions::default()).is_ok());
    }

    #[test]
    fn effective_orbit_violation_is_error() {
        // (12|34) and (34|12) share a 4-fold orbit.
        let f = write("&FCI NORB=4\n&END\n0.1 1 2 3 4\n0.1000001 3 4 1 2\n");
        let opts = FcidumpOptions {
            symmetry: Some(Symmetry::FourFold),
            ..Default::default()
        };
        assert!(matches!(load_fcidump(f.path(), &opts), Err(Error::Symmetry(_))));
        // (12|43) is outside the 4-fold orbit of (12|34): allowed to differ.
        let f = write("&FCI NORB=4\n&END\n0.1 1 2 3 4\n0.2 1 2 4 3\n");
        let set = load_fcidump(f.path(), &FcidumpOptions::default()).unwrap();
        assert_eq!(set.kind(), Kind::Effective);
        assert_eq!(set.two([2, 3, 0, 1]), 0.1);
        assert_eq!(set.two([0, 1, 3, 2]), 0.2);
    }

    #[test]
    fn norb_mismatch_and_malformed_lines() {
        let f = write("&FCI NORB=2\n&END\n0.1 1 3 1 1\n");
        assert!(matches!(
            load_fcidump(f.path(), &FcidumpOptions::default()),
            Err(Error::Parse { .. })
        ));
        let f = write("&FCI NORB=2\n&END\n0.1 1 1 1\n");
        assert!(matches!(
            load_fcidump(f.path(), &FcidumpOptions::default()),
            Err(Error::Parse { line: 3, .. })
        ));
        let f = write("&FCI NORB=2\n&END\n");
        let opts = FcidumpOptions {
            n_orb: Some(3),
            ..Default::default()
        };
        assert!(load_fcidump(f.path(), &opts).is_err());
    }

    #[test]
    fn header_geometry_and_kind() {
        let f = write("&FCI NORB=2, GEOMETRY=2.25, KIND=EFFECTIVE\n&END\n1.0D-1 1 1 2 2\n");
        let set = load_fcidump(f.path(), &FcidumpOptions::default()).unwrap();
        assert_eq!(set.geometry(), 2.25);
        assert_eq!(set.kind(), Kind::Effective);
        assert_eq!(set.two([1, 1, 0, 0]), 0.1);
        assert_eq!(set.two([0, 0, 1, 1]), 0.1);
        assert_eq!(set.two([0, 0, 0, 0]), 0.0);
    }
}
