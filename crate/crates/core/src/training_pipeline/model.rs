use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::factorized_interactions::{HeadInput, HeadKind, KernelMatrix};
use crate::nn_core::{Checkpoint, OrbitalNet};
use crate::tensor_store::{one_body_unit_indices, two_body_unit_indices, Kind, Quad, Symmetry, TensorSet};

/// Min-max map of geometries onto [0, 1]. A degenerate range maps to 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeomNorm {
    pub lo: f64,
    pub hi: f64,
}

impl GeomNorm {
    pub fn fit(geoms: &[f64]) -> Result<Self> {
        let lo = geoms.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = geoms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid("no finite geometries to normalize".into()));
        }
        Ok(GeomNorm { lo, hi })
    }

    pub fn apply(&self, r: f64) -> f64 {
        if self.hi > self.lo {
            (r - self.lo) / (self.hi - self.lo)
        } else {
            0.0
        }
    }
}

/// A trained head: orbital net(s), kernel and the geometry normalization the
/// nets were trained with. `tilde` is present only for the effective
/// two-body head.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub head: HeadKind,
    pub net: OrbitalNet,
    pub tilde: Option<OrbitalNet>,
    pub kernel: KernelMatrix,
    pub norm: GeomNorm,
}

impl Model {
    pub fn new(
        head: HeadKind,
        net: OrbitalNet,
        tilde: Option<OrbitalNet>,
        kernel: KernelMatrix,
        norm: GeomNorm,
    ) -> Result<Self> {
        if tilde.is_some() != (head.n_nets() == 2) {
            return Err(Error::Invalid(format!(
                "head {head} needs {} orbital net(s)",
                head.n_nets()
            )));
        }
        for n in std::iter::once(&net).chain(tilde.as_ref()) {
            if n.output_dim() != kernel.dim() {
                return Err(Error::Shape(format!(
                    "net output {} vs kernel dim {}",
                    n.output_dim(),
                    kernel.dim()
                )));
            }
        }
        if let Some(t) = &tilde {
            if t.widths() != net.widths() {
                return Err(Error::Shape("the two orbital nets differ in topology".into()));
            }
        }
        Ok(Model {
            head,
            net,
            tilde,
            kernel,
            norm,
        })
    }

    pub fn n_orb(&self) -> usize {
        self.net.n_orb()
    }

    pub fn ell(&self) -> usize {
        self.kernel.dim()
    }

    pub fn kind(&self) -> Kind {
        if self.head.is_effective() {
            Kind::Effective
        } else {
            Kind::Bare
        }
    }

    pub fn symmetry(&self) -> Symmetry {
        self.kind().symmetry()
    }

    /// Pseudo-orbitals for every orbital at geometry `r` (rows = orbitals).
    pub fn orbitals(&self, r: f64) -> Result<(Array2<f64>, Option<Array2<f64>>)> {
        let rn = self.norm.apply(r);
        let q: Vec<(usize, f64)> = (0..self.n_orb()).map(|p| (p, rn)).collect();
        let x = self.net.encode(&q)?;
        let (phi, _) = self.net.forward_batch(x.clone())?;
        let tilde = match &self.tilde {
            Some(t) => Some(t.forward_batch(x)?.0),
            None => None,
        };
        Ok((phi, tilde))
    }

    fn eval_with(&self, phi: &Array2<f64>, tilde: Option<&Array2<f64>>, idx: Quad) -> Result<f64> {
        let n = self.n_orb();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n_orb: n });
        }
        let row = |k: usize| phi.row(idx[k]);
        let input = match self.head {
            HeadKind::BareOneBody | HeadKind::EffOneBody => HeadInput::One { psi: [row(0), row(1)] },
            HeadKind::BareTwoBody => HeadInput::BareTwo {
                phi: [row(0), row(1), row(2), row(3)],
            },
            HeadKind::EffTwoBody => {
                let t = tilde.ok_or_else(|| Error::Invalid("effective head without tilde net".into()))?;
                HeadInput::EffTwo {
                    phi: [row(0), row(1), row(2), row(3)],
                    tilde: [t.row(idx[0]), t.row(idx[1]), t.row(idx[2]), t.row(idx[3])],
                }
            }
        };
        input.eval(&self.kernel)
    }

    /// One entry; one-body heads read `idx[0..2]`.
    pub fn predict(&self, r: f64, idx: Quad) -> Result<f64> {
        let (phi, tilde) = self.orbitals(r)?;
        self.eval_with(&phi, tilde.as_ref(), idx)
    }

    /// Model values on the nonsymmetric unit of its body at geometry `r`.
    pub fn predict_unit(&self, r: f64) -> Result<Vec<(Quad, f64)>> {
        let (phi, tilde) = self.orbitals(r)?;
        self.unit_indices()
            .into_iter()
            .map(|idx| Ok((idx, self.eval_with(&phi, tilde.as_ref(), idx)?)))
            .collect()
    }

    pub fn unit_indices(&self) -> Vec<Quad> {
        if self.head.is_two_body() {
            two_body_unit_indices(self.n_orb(), self.symmetry())
        } else {
            one_body_unit_indices(self.n_orb())
                .into_iter()
                .map(|[p, q]| [p, q, 0, 0])
                .collect()
        }
    }

    /// Dense tensor set holding the model's body; the other body and the
    /// scalar term are zero.
    pub fn predict_set(&self, system: &str, r: f64) -> Result<TensorSet> {
        let unit = self.predict_unit(r)?;
        let n = self.n_orb();
        if self.head.is_two_body() {
            TensorSet::from_unit(system, r, self.kind(), n, 0.0, Vec::new(), unit)
        } else {
            let one: Vec<([usize; 2], f64)> = unit.into_iter().map(|(i, v)| ([i[0], i[1]], v)).collect();
            TensorSet::from_unit(system, r, self.kind(), n, 0.0, one, Vec::new())
        }
    }

    pub fn to_checkpoint(&self, step: u64) -> Checkpoint {
        let mut ck = Checkpoint::new();
        ck.push_meta("head", self.head);
        ck.push_meta("geom_lo", crate::io_util::fmt_f64(self.norm.lo));
        ck.push_meta("geom_hi", crate::io_util::fmt_f64(self.norm.hi));
        let seed = self.net.seed();
        // Names are unique by construction, so push_block cannot fail.
        ck.push_block(self.net.to_block("orbitals", step)).unwrap();
        if let Some(t) = &self.tilde {
            ck.push_block(t.to_block("orbitals_tilde", step)).unwrap();
        }
        ck.push_block(self.kernel.to_block("kernel", seed, step)).unwrap();
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let head: HeadKind = ck
            .meta("head")
            .ok_or_else(|| Error::Invalid("checkpoint lacks head metadata".into()))?
            .parse()?;
        let num = |key: &str| -> Result<f64> {
            ck.meta(key)
                .ok_or_else(|| Error::Invalid(format!("checkpoint lacks {key}")))?
                .parse()
                .map_err(|_| Error::Invalid(format!("bad {key} in checkpoint")))
        };
        let norm = GeomNorm {
            lo: num("geom_lo")?,
            hi: num("geom_hi")?,
        };
        let net = OrbitalNet::from_block(ck.require("orbitals")?)?;
        let tilde = match ck.block("orbitals_tilde") {
            Some(b) => Some(OrbitalNet::from_block(b)?),
            None => None,
        };
        let kernel = KernelMatrix::from_block(ck.require("kernel")?)?;
        Model::new(head, net, tilde, kernel, norm)
    }

    /// Pseudo-orbital vector of orbital `p` at geometry `r`.
    pub fn orbital(&self, p: usize, r: f64) -> Result<Array1<f64>> {
        self.net.forward(p, self.norm.apply(r))
    }
}
