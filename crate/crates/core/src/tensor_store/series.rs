use std::fs;
use std::path::Path;

use super::{load_canonical, save_canonical, Kind, TensorSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoint {
    pub geometry: f64,
    pub bare: Option<TensorSet>,
    pub effective: Option<TensorSet>,
}

impl SeriesPoint {
    pub fn get(&self, kind: Kind) -> Option<&TensorSet> {
        match kind {
            Kind::Bare => self.bare.as_ref(),
            Kind::Effective => self.effective.as_ref(),
        }
    }
}

/// Tensor sets for one system over a strictly increasing list of geometries.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometrySeries {
    system_name: String,
    n_orb: usize,
    points: Vec<SeriesPoint>,
}

impl GeometrySeries {
    /// Groups sets by geometry (exact match). At most one set per (R, kind).
    pub fn from_sets(system_name: impl Into<String>, sets: Vec<TensorSet>) -> Result<Self> {
        let system_name = system_name.into();
        let n_orb = sets
            .first()
            .map(|s| s.n_orb())
            .ok_or_else(|| Error::Invalid(format!("series '{system_name}' is empty")))?;
        let mut points: Vec<SeriesPoint> = Vec::new();
        let mut sets = sets;
        sets.sort_by(|a, b| a.geometry().total_cmp(&b.geometry()).then(a.kind().cmp(&b.kind())));
        for set in sets {
            if set.n_orb() != n_orb {
                return Err(Error::Shape(format!(
                    "n_orb {} at R={} differs from series n_orb {n_orb}",
                    set.n_orb(),
                    set.geometry()
                )));
            }
            let r = set.geometry();
            let point = match points.last_mut() {
                Some(p) if p.geometry.to_bits() == r.to_bits() => p,
                _ => {
                    points.push(SeriesPoint {
                        geometry: r,
                        bare: None,
                        effective: None,
                    });
                    points.last_mut().unwrap()
                }
            };
            let slot = match set.kind() {
                Kind::Bare => &mut point.bare,
                Kind::Effective => &mut point.effective,
            };
            if slot.is_some() {
                return Err(Error::Invalid(format!("two {} sets at geometry {r}", set.kind())));
            }
            *slot = Some(set);
        }
        let series = GeometrySeries {
            system_name,
            n_orb,
            points,
        };
        series.validate()?;
        Ok(series)
    }

    fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if !(w[0].geometry < w[1].geometry) {
                return Err(Error::Invalid(format!(
                    "geometries not strictly increasing: {} then {}",
                    w[0].geometry, w[1].geometry
                )));
            }
        }
        Ok(())
    }

    pub fn system_name(&self) -> &str {
        &self.system_name
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn geometries(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.geometry).collect()
    }

    pub fn sets(&self, kind: Kind) -> Vec<&TensorSet> {
        self.points.iter().filter_map(|p| p.get(kind)).collect()
    }

    /// Index of the point whose geometry lies within `tol` of `r`.
    pub fn find(&self, r: f64, tol: f64) -> Option<usize> {
        self.points.iter().position(|p| (p.geometry - r).abs() <= tol)
    }
}

fn file_name(kind: Kind, index: usize) -> String {
    format!("{}_{index:04}.tensor", kind.as_str())
}

/// Writes one canonical file per set, named `<kind>_<index>.tensor`.
pub fn save_series_dir(dir: impl AsRef<Path>, series: &GeometrySeries) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, point) in series.points.iter().enumerate() {
        for kind in [Kind::Bare, Kind::Effective] {
            if let Some(set) = point.get(kind) {
                save_canonical(dir.join(file_name(kind, i)), set)?;
            }
        }
    }
    Ok(())
}

/// Loads every `*.tensor` file of a directory into one series.
pub fn load_series_dir(dir: impl AsRef<Path>) -> Result<GeometrySeries> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tensor"))
        .collect();
    paths.sort();
    let sets = paths.iter().map(load_canonical).collect::<Result<Vec<_>>>()?;
    let name = sets.first().map(|s| s.system().to_string()).unwrap_or_default();
    if let Some(other) = sets.iter().find(|s| s.system() != name) {
        return Err(Error::Invalid(format!(
            "mixed systems in {}: '{}' and '{}'",
            dir.display(),
            name,
            other.system()
        )));
    }
    GeometrySeries::from_sets(name, sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(r: f64, kind: Kind, n: usize) -> TensorSet {
        TensorSet::from_unit("S", r, kind, n, r, vec![([0, 0], r)], vec![([0, 0, 0, 0], 2.0 * r)]).unwrap()
    }

    #[test]
    fn groups_and_orders_points() {
        let s = GeometrySeries::from_sets(
            "S",
            vec![
                set(2.0, Kind::Bare, 2),
                set(1.0, Kind::Effective, 2),
                set(1.0, Kind::Bare, 2),
            ],
        )
        .unwrap();
        assert_eq!(s.geometries(), vec![1.0, 2.0]);
        assert!(s.points()[0].bare.is_some() && s.points()[0].effective.is_some());
        assert!(s.points()[1].effective.is_none());
        assert_eq!(s.find(2.0 + 1e-12, 1e-9), Some(1));
    }

    #[test]
    fn rejects_mixed_norb_and_duplicates() {
        assert!(GeometrySeries::from_sets("S", vec![set(1.0, Kind::Bare, 2), set(2.0, Kind::Bare, 3)]).is_err());
        assert!(GeometrySeries::from_sets("S", vec![set(1.0, Kind::Bare, 2), set(1.0, Kind::Bare, 2)]).is_err());
        assert!(GeometrySeries::from_sets("S", vec![]).is_err());
    }

    #[test]
    fn directory_round_trip() {
        let s = GeometrySeries::from_sets(
            "S",
            vec![
                set(1.5, Kind::Bare, 2),
                set(1.5, Kind::Effective, 2),
                set(2.5, Kind::Bare, 2),
            ],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_series_dir(dir.path(), &s).unwrap();
        assert_eq!(load_series_dir(dir.path()).unwrap(), s);
    }
}
