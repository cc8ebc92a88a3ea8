use std::collections::BTreeMap;

use ndarray::{Array2, Array4};

use super::{canonical_pair, Kind, Quad, Symmetry, TensorSet, DUPLICATE_TOL};
use crate::error::{Error, Result};

/// Collects listed entries, then validates and expands them under a symmetry group.
pub(crate) struct EntryAccumulator {
    n_orb: usize,
    scalar: Option<f64>,
    one: BTreeMap<[usize; 2], f64>,
    two: BTreeMap<Quad, f64>,
}

fn check_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Representative value of an orbit: the common value if all members agree
/// bit-for-bit, otherwise the mean.
fn orbit_value(values: &[f64]) -> f64 {
    let first = values[0];
    if values.iter().all(|v| v.to_bits() == first.to_bits()) {
        first
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

impl EntryAccumulator {
    pub(crate) fn new(n_orb: usize) -> Self {
        EntryAccumulator {
            n_orb,
            scalar: None,
            one: BTreeMap::new(),
            two: BTreeMap::new(),
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n_orb {
            Err(Error::IndexOutOfRange {
                index: i,
                n_orb: self.n_orb,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn set_scalar(&mut self, v: f64) {
        self.scalar = Some(v);
    }

    pub(crate) fn add_scalar(&mut self, v: f64) -> Result<()> {
        check_finite(v, "scalar term")?;
        match self.scalar {
            Some(old) if (old - v).abs() > DUPLICATE_TOL => Err(Error::Conflict {
                what: "scalar term".into(),
                a: old,
                b: v,
            }),
            Some(_) => Ok(()),
            None => {
                self.scalar = Some(v);
                Ok(())
            }
        }
    }

    pub(crate) fn add_one(&mut self, p: usize, q: usize, v: f64) -> Result<()> {
        self.check_index(p)?;
        self.check_index(q)?;
        check_finite(v, &format!("one-body ({p},{q})"))?;
        match self.one.get(&[p, q]) {
            Some(&old) if (old - v).abs() > DUPLICATE_TOL => Err(Error::Conflict {
                what: format!("duplicate one-body entry ({},{})", p + 1, q + 1),
                a: old,
                b: v,
            }),
            Some(_) => Ok(()),
            None => {
                self.one.insert([p, q], v);
                Ok(())
            }
        }
    }

    pub(crate) fn add_two(&mut self, t: Quad, v: f64) -> Result<()> {
        for &i in &t {
            self.check_index(i)?;
        }
        check_finite(v, &format!("two-body {t:?}"))?;
        match self.two.get(&t) {
            Some(&old) if (old - v).abs() > DUPLICATE_TOL => Err(Error::Conflict {
                what: format!(
                    "duplicate two-body entry ({}{}|{}{})",
                    t[0] + 1,
                    t[1] + 1,
                    t[2] + 1,
                    t[3] + 1
                ),
                a: old,
                b: v,
            }),
            Some(_) => Ok(()),
            None => {
                self.two.insert(t, v);
                Ok(())
            }
        }
    }

    fn grouped_two(&self, sym: Symmetry) -> BTreeMap<Quad, Vec<f64>> {
        let mut groups: BTreeMap<Quad, Vec<f64>> = BTreeMap::new();
        for (&t, &v) in &self.two {
            groups.entry(sym.canonical(t)).or_default().push(v);
        }
        groups
    }

    /// Whether the listed two-body entries are consistent with 8-fold symmetry.
    pub(crate) fn consistent_with(&self, sym: Symmetry) -> bool {
        self.grouped_two(sym)
            .values()
            .all(|vals| spread(vals) <= sym.tolerance())
    }

    pub(crate) fn finish(self, system: impl Into<String>, geometry: f64, kind: Kind) -> Result<TensorSet> {
        let n = self.n_orb;
        if n == 0 {
            return Err(Error::Invalid("n_orb must be at least 1".into()));
        }
        if !geometry.is_finite() {
            return Err(Error::NonFinite("geometry".into()));
        }
        let sym = kind.symmetry();
        let tol = sym.tolerance();

        let mut one_groups: BTreeMap<[usize; 2], Vec<f64>> = BTreeMap::new();
        for (&[p, q], &v) in &self.one {
            one_groups.entry(canonical_pair(p, q)).or_default().push(v);
        }
        let mut one_body = Array2::zeros((n, n));
        for ([p, q], vals) in one_groups {
            if spread(&vals) > tol {
                return Err(Error::Symmetry(format!(
                    "one-body ({},{}) vs ({},{}) differ by {:e}",
                    p + 1,
                    q + 1,
                    q + 1,
                    p + 1,
                    spread(&vals)
                )));
            }
            let v = orbit_value(&vals);
            one_body[[p, q]] = v;
            one_body[[q, p]] = v;
        }

        let mut two_body = Array4::zeros((n, n, n, n));
        for (rep, vals) in self.grouped_two(sym) {
            if spread(&vals) > tol {
                return Err(Error::Symmetry(format!(
                    "{} orbit of ({}{}|{}{}) spans {:e} > {:e}",
                    kind,
                    rep[0] + 1,
                    rep[1] + 1,
                    rep[2] + 1,
                    rep[3] + 1,
                    spread(&vals),
                    tol
                )));
            }
            let v = orbit_value(&vals);
            for [p, q, r, s] in sym.images(rep) {
                two_body[[p, q, r, s]] = v;
            }
        }

        Ok(TensorSet::from_closed_parts(
            system.into(),
            geometry,
            kind,
            self.scalar.unwrap_or(0.0),
            one_body,
            two_body,
        ))
    }
}
