//! Self-describing text format for one [`TensorSet`].
//!
//! ```text
//! # vnet-tensor-format=1
//! # system=H4
//! # geometry=1.8500000000000001e0
//! # kind=bare
//! # n_orb=4
//! # scalar_term=...
//! <value> p q 0 0      one-body, p <= q
//! <value> p q r s      two-body canonical representative
//! ```
//!
//! Indices are 1-based, entries are sorted by index tuple and values use 17
//! significant digits so that loading a saved file reproduces every bit.
//! Entries whose value is `+0.0` are omitted.

use std::fs;
use std::path::Path;

use super::{one_body_unit_indices, two_body_unit_indices, EntryAccumulator, Kind, TensorSet};
use crate::error::{Error, Result};
use crate::io_util::{fmt_f64, write_atomic};

pub const CANONICAL_VERSION: &str = "1";

pub fn save_canonical(path: impl AsRef<Path>, set: &TensorSet) -> Result<()> {
    let path = path.as_ref();
    let n = set.n_orb();
    let mut out = String::new();
    out.push_str(&format!("# vnet-tensor-format={CANONICAL_VERSION}\n"));
    out.push_str(&format!("# system={}\n", set.system()));
    out.push_str(&format!("# geometry={}\n", fmt_f64(set.geometry())));
    out.push_str(&format!("# kind={}\n", set.kind()));
    out.push_str(&format!("# n_orb={n}\n"));
    out.push_str(&format!("# scalar_term={}\n", fmt_f64(set.scalar_term())));

    let mut entries: Vec<([usize; 4], f64)> = Vec::new();
    for [p, q] in one_body_unit_indices(n) {
        entries.push(([p + 1, q + 1, 0, 0], set.one(p, q)));
    }
    for t in two_body_unit_indices(n, set.symmetry()) {
        entries.push(([t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1], set.two(t)));
    }
    entries.sort_by_key(|e| e.0);
    for ([p, q, r, s], v) in entries {
        if v.to_bits() == 0 {
            continue;
        }
        out.push_str(&format!("{} {p} {q} {r} {s}\n", fmt_f64(v)));
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_canonical(path: impl AsRef<Path>) -> Result<TensorSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut version = None;
    let mut system = String::new();
    let mut geometry = None;
    let mut kind = None;
    let mut n_orb = None;
    let mut scalar = 0.0;
    let mut acc: Option<EntryAccumulator> = None;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let Some((key, value)) = rest.trim().split_once('=') else {
                continue;
            };
            let value = value.trim();
            let bad = |what: &str| Error::parse(path, lineno, format!("bad {what} '{value}'"));
            match key.trim() {
                "vnet-tensor-format" => version = Some(value.to_string()),
                "system" => system = value.to_string(),
                "geometry" => geometry = Some(value.parse::<f64>().map_err(|_| bad("geometry"))?),
                "kind" => kind = Some(value.parse::<Kind>()?),
                "n_orb" => n_orb = Some(value.parse::<usize>().map_err(|_| bad("n_orb"))?),
                "scalar_term" => scalar = value.parse::<f64>().map_err(|_| bad("scalar_term"))?,
                _ => {}
            }
            continue;
        }

        let acc = match acc.as_mut() {
            Some(a) => a,
            None => {
                match version.as_deref() {
                    Some(CANONICAL_VERSION) => {}
                    Some(other) => {
                        return Err(Error::Version {
                            found: other.to_string(),
                            expected: CANONICAL_VERSION.to_string(),
                        })
                    }
                    None => return Err(Error::parse(path, lineno, "missing format header")),
                }
                let n = n_orb.ok_or_else(|| Error::parse(path, lineno, "n_orb must precede entries"))?;
                acc.insert(EntryAccumulator::new(n))
            }
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno, "expected 'value p q r s'"));
        }
        let value: f64 = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad value '{}'", fields[0])))?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad index '{f}'")))?;
        }
        match idx {
            [p, q, 0, 0] if p > 0 && q > 0 => acc.add_one(p - 1, q - 1, value)?,
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => acc.add_two([p - 1, q - 1, r - 1, s - 1], value)?,
            _ => return Err(Error::parse(path, lineno, format!("bad index tuple {idx:?}"))),
        }
    }

    match version.as_deref() {
        Some(CANONICAL_VERSION) => {}
        Some(other) => {
            return Err(Error::Version {
                found: other.to_string(),
                expected: CANONICAL_VERSION.to_string(),
            })
        }
        None => return Err(Error::parse(path, 1, "missing format header")),
    }
    let n = n_orb.ok_or_else(|| Error::parse(path, 1, "missing n_orb"))?;
    let geometry = geometry.ok_or_else(|| Error::parse(path, 1, "missing geometry"))?;
    let kind = kind.ok_or_else(|| Error::parse(path, 1, "missing kind"))?;
    let mut acc = acc.unwrap_or_else(|| EntryAccumulator::new(n));
    acc.set_scalar(scalar);
    acc.finish(system, geometry, kind)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::tensor_store::Symmetry;

    fn random_set(n: usize, kind: Kind, seed: u64) -> TensorSet {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let one: Vec<_> = one_body_unit_indices(n)
            .into_iter()
            .map(|t| (t, rng.random_range(-1.0..1.0)))
            .collect();
        let two: Vec<_> = two_body_unit_indices(n, kind.symmetry())
            .into_iter()
            .map(|t| (t, rng.random_range(-1.0..1.0) * 1e-3f64.powi(rng.random_range(0..3))))
            .collect();
        TensorSet::from_unit("H4", 1.0 / 3.0 + seed as f64, kind, n, -std::f64::consts::PI, one, two).unwrap()
    }

    #[test]
    fn empty_payload_is_all_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.tensor");
        std::fs::write(
            &path,
            "# vnet-tensor-format=1\n# system=x\n# geometry=1.0\n# kind=effective\n# n_orb=4\n",
        )
        .unwrap();
        let set = load_canonical(&path).unwrap();
        assert_eq!(set.n_orb(), 4);
        assert!(set.two_body().iter().all(|&v| v == 0.0));
        assert!(set.one_body().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bare_payload_violating_eightfold_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.tensor");
        // (12|12) and (21|12) are 8-fold equivalent
        std::fs::write(
            &path,
            "# vnet-tensor-format=1\n# geometry=1.0\n# kind=bare\n# n_orb=2\n\
             0.5 1 2 1 2\n0.6 2 1 1 2\n",
        )
        .unwrap();
        assert!(matches!(load_canonical(&path), Err(Error::Symmetry(_))));
    }

    #[test]
    fn version_mismatch_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.tensor");
        std::fs::write(
            &path,
            "# vnet-tensor-format=7\n# geometry=1\n# kind=bare\n# n_orb=1\n0.1 1 1 1 1\n",
        )
        .unwrap();
        assert!(matches!(load_canonical(&path), Err(Error::Version { .. })));
    }

    #[test]
    fn negative_zero_survives() {
        let set = TensorSet::from_unit(
            "s",
            2.0,
            Kind::Bare,
            1,
            0.0,
            vec![([0, 0], -0.0)],
            vec![([0, 0, 0, 0], 1.0)],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("n.tensor");
        save_canonical(&path, &set).unwrap();
        let back = load_canonical(&path).unwrap();
        assert_eq!(back.one(0, 0).to_bits(), (-0.0f64).to_bits());
        assert_eq!(back.symmetry(), Symmetry::EightFold);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn save_load_is_bit_identical(n in 1usize..5, eff in any::<bool>(), seed in any::<u64>()) {
            let kind = if eff { Kind::Effective } else { Kind::Bare };
            let set = random_set(n, kind, seed % 1000);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.tensor");
            save_canonical(&path, &set).unwrap();
            let back = load_canonical(&path).unwrap();
            prop_assert_eq!(back.system(), set.system());
            prop_assert_eq!(back.geometry().to_bits(), set.geometry().to_bits());
            prop_assert_eq!(back.scalar_term().to_bits(), set.scalar_term().to_bits());
            prop_assert_eq!(back.kind(), set.kind());
            for (a, b) in back.two_body().iter().zip(set.two_body()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in back.one_body().iter().zip(set.one_body()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
