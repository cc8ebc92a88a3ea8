//! Bare and effective interaction tensors in Mulliken `(pq|rs)` ordering.
//!
//! A [`TensorSet`] holds the one-body matrix `(p|q)`, the two-body tensor
//! `(pq|rs)` and the scalar constant for one geometry. Bare tensors carry the
//! full 8-fold permutational symmetry of real orbitals, effective (downfolded)
//! tensors only the 4-fold subgroup `(pq|rs) = (qp|sr) = (rs|pq) = (sr|qp)`.
//! In memory all indices are 0-based; the text formats are 1-based.

mod accumulate;
pub mod canonical;
pub mod fcidump;
mod series;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Array4};

use crate::error::{Error, Result};

pub(crate) use accumulate::EntryAccumulator;
pub use canonical::{load_canonical, save_canonical, CANONICAL_VERSION};
pub use fcidump::{load_fcidump, FcidumpOptions};
pub use series::{load_series_dir, save_series_dir, GeometrySeries, SeriesPoint};

/// Largest orbit disagreement accepted when loading a bare tensor.
pub const BARE_SYMMETRY_TOL: f64 = 1e-12;
/// Largest orbit disagreement accepted for an effective tensor before orbit averaging.
pub const EFFECTIVE_SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance for the same index tuple listed twice.
pub const DUPLICATE_TOL: f64 = 1e-12;

pub type Quad = [usize; 4];

/// Permutational symmetry group of a two-body tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    EightFold,
    FourFold,
}

impl Symmetry {
    /// Images of `(p,q,r,s)` under every group element (duplicates included).
    pub fn images(self, [p, q, r, s]: Quad) -> Vec<Quad> {
        match self {
            Symmetry::EightFold => vec![
                [p, q, r, s],
                [q, p, r, s],
                [p, q, s, r],
                [q, p, s, r],
                [r, s, p, q],
                [s, r, p, q],
                [r, s, q, p],
                [s, r, q, p],
            ],
            Symmetry::FourFold => vec![[p, q, r, s], [q, p, s, r], [r, s, p, q], [s, r, q, p]],
        }
    }

    /// Lexicographically smallest image; no range check.
    pub fn canonical(self, idx: Quad) -> Quad {
        let [p, q, r, s] = idx;
        let mut best = idx;
        let mut consider = |t: Quad| {
            if t < best {
                best = t;
            }
        };
        consider([r, s, p, q]);
        consider([q, p, s, r]);
        consider([s, r, q, p]);
        if self == Symmetry::EightFold {
            consider([q, p, r, s]);
            consider([p, q, s, r]);
            consider([s, r, p, q]);
            consider([r, s, q, p]);
        }
        best
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Symmetry::EightFold => BARE_SYMMETRY_TOL,
            Symmetry::FourFold => EFFECTIVE_SYMMETRY_TOL,
        }
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bare8" | "8" | "eightfold" => Ok(Symmetry::EightFold),
            "eff4" | "4" | "fourfold" => Ok(Symmetry::FourFold),
            other => Err(Error::Invalid(format!("unknown symmetry '{other}' (bare8|eff4)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Bare,
    Effective,
}

impl Kind {
    pub fn symmetry(self) -> Symmetry {
        match self {
            Kind::Bare => Symmetry::EightFold,
            Kind::Effective => Symmetry::FourFold,
        }
    }

    pub fn from_symmetry(sym: Symmetry) -> Self {
        match sym {
            Symmetry::EightFold => Kind::Bare,
            Symmetry::FourFold => Kind::Effective,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Bare => "bare",
            Kind::Effective => "effective",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bare" | "b" => Ok(Kind::Bare),
            "effective" | "eff" | "d" => Ok(Kind::Effective),
            other => Err(Error::Invalid(format!("unknown tensor kind '{other}'"))),
        }
    }
}

/// Canonical representative of `(p,q,r,s)` under `symmetry`. Indices are 0-based.
pub fn canonical_index(idx: Quad, n_orb: usize, symmetry: Symmetry) -> Result<Quad> {
    if let Some(&bad) = idx.iter().find(|&&i| i >= n_orb) {
        return Err(Error::IndexOutOfRange { index: bad, n_orb });
    }
    Ok(symmetry.canonical(idx))
}

pub fn canonical_pair(p: usize, q: usize) -> [usize; 2] {
    if p <= q {
        [p, q]
    } else {
        [q, p]
    }
}

/// One canonical tuple per two-body orbit, in lexicographic order.
pub fn two_body_unit_indices(n_orb: usize, symmetry: Symmetry) -> Vec<Quad> {
    let mut out = Vec::new();
    for p in 0..n_orb {
        for q in 0..n_orb {
            for r in 0..n_orb {
                for s in 0..n_orb {
                    let t = [p, q, r, s];
                    if symmetry.canonical(t) == t {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// Upper-triangle pairs `p <= q`, row-major.
pub fn one_body_unit_indices(n_orb: usize) -> Vec<[usize; 2]> {
    (0..n_orb).flat_map(|p| (p..n_orb).map(move |q| [p, q])).collect()
}

/// One geometry's one-body matrix, two-body tensor and scalar term.
///
/// Construction always goes through symmetry validation and orbit closure, so
/// every instance satisfies `value(t) == value(canonical(t))` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSet {
    system: String,
    geometry: f64,
    kind: Kind,
    scalar_term: f64,
    one_body: Array2<f64>,
    two_body: Array4<f64>,
}

impl TensorSet {
    pub fn zeros(system: impl Into<String>, geometry: f64, kind: Kind, n_orb: usize) -> Result<Self> {
        if n_orb == 0 {
            return Err(Error::Invalid("n_orb must be at least 1".into()));
        }
        if !geometry.is_finite() {
            return Err(Error::NonFinite("geometry".into()));
        }
        Ok(TensorSet {
            system: system.into(),
            geometry,
            kind,
            scalar_term: 0.0,
            one_body: Array2::zeros((n_orb, n_orb)),
            two_body: Array4::zeros((n_orb, n_orb, n_orb, n_orb)),
        })
    }

    /// Builds a set from dense arrays, validating symmetry at the kind's
    /// tolerance and then closing every orbit exactly.
    pub fn from_dense(
        system: impl Into<String>,
        geometry: f64,
        kind: Kind,
        scalar_term: f64,
        one_body: Array2<f64>,
        two_body: Array4<f64>,
    ) -> Result<Self> {
        let n = one_body.nrows();
        if one_body.ncols() != n || two_body.shape() != [n, n, n, n] {
            return Err(Error::Shape(format!(
                "one-body {:?} and two-body {:?} disagree",
                one_body.shape(),
                two_body.shape()
            )));
        }
        let mut acc = EntryAccumulator::new(n);
        acc.set_scalar(scalar_term);
        for p in 0..n {
            for q in 0..n {
                acc.add_one(p, q, one_body[[p, q]])?;
            }
        }
        for ((p, q, r, s), &v) in two_body.indexed_iter() {
            acc.add_two([p, q, r, s], v)?;
        }
        acc.finish(system, geometry, kind)
    }

    /// Expands canonical (or arbitrary orbit-member) entries into a full set.
    /// Entries not listed are zero.
    pub fn from_unit<I, J>(
        system: impl Into<String>,
        geometry: f64,
        kind: Kind,
        n_orb: usize,
        scalar_term: f64,
        one_body: I,
        two_body: J,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = ([usize; 2], f64)>,
        J: IntoIterator<Item = (Quad, f64)>,
    {
        let mut acc = EntryAccumulator::new(n_orb);
        acc.set_scalar(scalar_term);
        for ([p, q], v) in one_body {
            acc.add_one(p, q, v)?;
        }
        for (t, v) in two_body {
            acc.add_two(t, v)?;
        }
        acc.finish(system, geometry, kind)
    }

    pub(crate) fn from_closed_parts(
        system: String,
        geometry: f64,
        kind: Kind,
        scalar_term: f64,
        one_body: Array2<f64>,
        two_body: Array4<f64>,
    ) -> Self {
        TensorSet {
            system,
            geometry,
            kind,
            scalar_term,
            one_body,
            two_body,
        }
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn geometry(&self) -> f64 {
        self.geometry
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn symmetry(&self) -> Symmetry {
        self.kind.symmetry()
    }

    pub fn n_orb(&self) -> usize {
        self.one_body.nrows()
    }

    pub fn scalar_term(&self) -> f64 {
        self.scalar_term
    }

    pub fn one_body(&self) -> &Array2<f64> {
        &self.one_body
    }

    pub fn two_body(&self) -> &Array4<f64> {
        &self.two_body
    }

    pub fn one(&self, p: usize, q: usize) -> f64 {
        self.one_body[[p, q]]
    }

    pub fn two(&self, [p, q, r, s]: Quad) -> f64 {
        self.two_body[[p, q, r, s]]
    }

    pub fn with_system(mut self, system: impl Into<String>) -> Self {
        self.system = system.into();
        self
    }

    /// Same tensors relabelled with another kind. Bare → effective always
    /// succeeds; effective → bare requires 8-fold closure.
    pub fn relabel(&self, kind: Kind) -> Result<Self> {
        if kind == self.kind {
            return Ok(self.clone());
        }
        TensorSet::from_dense(
            self.system.clone(),
            self.geometry,
            kind,
            self.scalar_term,
            self.one_body.clone(),
            self.two_body.clone(),
        )
    }

    /// One representative per two-body orbit, canonical tuples in lexicographic order.
    pub fn nonsymmetric_unit(&self) -> Vec<(Quad, f64)> {
        two_body_unit_indices(self.n_orb(), self.symmetry())
            .into_iter()
            .map(|t| (t, self.two(t)))
            .collect()
    }

    /// Upper triangle of the one-body matrix.
    pub fn one_body_unit(&self) -> Vec<([usize; 2], f64)> {
        one_body_unit_indices(self.n_orb())
            .into_iter()
            .map(|[p, q]| ([p, q], self.one(p, q)))
            .collect()
    }
}

/// Result of [`nonsymmetric_unit`] for a set.
pub fn nonsymmetric_unit(set: &TensorSet) -> Vec<(Quad, f64)> {
    set.nonsymmetric_unit()
}
