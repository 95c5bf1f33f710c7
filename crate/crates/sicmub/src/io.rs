//! JSON schemas for every artifact read or written by the tool.
//!
//! Conventions: field moduli and element coefficients are
//! constant-first lists; complex numbers are `[re, im]` pairs;
//! operators are row-major entry grids; 0-based indices everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::combin::{LatinSquare, Partition, PathSystem};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::operators::{C64, CMat, CVec, FamilyKind, HermitianOperator, OperatorFamily};

/// `{"p":3,"n":2,"modulus":[1,0,1]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub n: usize,
    pub modulus: Vec<u64>,
}

impl FieldDescriptor {
    pub fn of(field: &Field) -> FieldDescriptor {
        FieldDescriptor {
            p: field.p(),
            n: field.n(),
            modulus: field.modulus().to_vec(),
        }
    }

    pub fn build(&self) -> Result<Field> {
        Field::new(self.p, self.n, Some(self.modulus.clone()))
    }
}

/// `{"dim":d,"entries":[[[re,im],...],...]}` row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl OperatorJson {
    pub fn of(matrix: &CMat) -> OperatorJson {
        let dim = matrix.nrows();
        let entries = (0..dim)
            .map(|i| {
                (0..matrix.ncols())
                    .map(|j| [matrix[(i, j)].re, matrix[(i, j)].im])
                    .collect()
            })
            .collect();
        OperatorJson { dim, entries }
    }

    pub fn matrix(&self) -> Result<CMat> {
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            return Err(Error::SchemaViolation(format!(
                "expected {0} x {0} entries",
                self.dim
            )));
        }
        let mut m = CMat::zeros(self.dim, self.dim);
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = C64::new(re, im);
            }
        }
        Ok(m)
    }

    pub fn hermitian(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.matrix()?)
    }
}

/// An operator family with its kind tag and outcome labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub dim: usize,
    pub kind: String,
    pub labels: Vec<String>,
    pub members: Vec<Vec<Vec<[f64; 2]>>>,
}

impl FamilyJson {
    pub fn of(family: &OperatorFamily) -> FamilyJson {
        FamilyJson {
            dim: family.dim(),
            kind: family.kind().as_str().to_string(),
            labels: family.labels().to_vec(),
            members: family
                .members()
                .iter()
                .map(|m| OperatorJson::of(m.matrix()).entries)
                .collect(),
        }
    }

    pub fn family(&self) -> Result<OperatorFamily> {
        let kind = FamilyKind::parse(&self.kind)?;
        let members = self
            .members
            .iter()
            .map(|entries| {
                OperatorJson {
                    dim: self.dim,
                    entries: entries.clone(),
                }
                .hermitian()
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorFamily::new(kind, members, self.labels.clone())
    }
}

/// Partitions as arrays of bins of `[row, col]` cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionJson(pub Vec<Vec<[usize; 2]>>);

impl PartitionJson {
    pub fn of(partition: &Partition) -> PartitionJson {
        let d = partition.order();
        PartitionJson(
            partition
                .bins()
                .iter()
                .map(|bin| bin.iter().map(|&c| [c / d, c % d]).collect())
                .collect(),
        )
    }

    pub fn partition(&self) -> Result<Partition> {
        let d = self.0.len();
        let bins = self
            .0
            .iter()
            .map(|bin| bin.iter().map(|&[r, c]| r * d + c).collect())
            .collect();
        Partition::new(d, bins)
    }
}

/// A Latin square as a plain integer grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatinSquareJson(pub Vec<Vec<usize>>);

impl LatinSquareJson {
    pub fn of(square: &LatinSquare) -> LatinSquareJson {
        LatinSquareJson(square.grid().to_vec())
    }

    pub fn square(&self) -> Result<LatinSquare> {
        LatinSquare::new(self.0.clone())
    }
}

/// Path systems as arrays of `[row, bin]` pairs per path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSystemJson(pub Vec<Vec<[usize; 2]>>);

impl PathSystemJson {
    pub fn of(system: &PathSystem) -> PathSystemJson {
        PathSystemJson(
            system
                .paths()
                .iter()
                .map(|p| p.iter().enumerate().map(|(k, &v)| [k, v]).collect())
                .collect(),
        )
    }

    pub fn system(&self) -> Result<PathSystem> {
        let n_paths = self.0.len();
        let d = (n_paths as f64).sqrt().round() as usize;
        if d * d != n_paths {
            return Err(Error::SchemaViolation(format!(
                "path count {n_paths} is not a square"
            )));
        }
        let paths = self
            .0
            .iter()
            .map(|p| {
                let mut out = vec![usize::MAX; d + 1];
                if p.len() != d + 1 {
                    return Err(Error::SchemaViolation("path length != d+1".into()));
                }
                for &[k, v] in p {
                    if k > d || out[k] != usize::MAX {
                        return Err(Error::SchemaViolation("bad path row index".into()));
                    }
                    out[k] = v;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        PathSystem::new(d, paths)
    }
}

/// Bases as lists of column vectors of `[re, im]` components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasesJson {
    pub dim: usize,
    pub bases: Vec<Vec<Vec<[f64; 2]>>>,
}

impl BasesJson {
    pub fn of(dim: usize, bases: &[CMat]) -> BasesJson {
        BasesJson {
            dim,
            bases: bases
                .iter()
                .map(|b| {
                    (0..b.ncols())
                        .map(|j| (0..b.nrows()).map(|i| [b[(i, j)].re, b[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn matrices(&self) -> Result<Vec<CMat>> {
        self.bases
            .iter()
            .map(|b| {
                if b.len() != self.dim || b.iter().any(|v| v.len() != self.dim) {
                    return Err(Error::SchemaViolation("basis shape mismatch".into()));
                }
                let mut m = CMat::zeros(self.dim, self.dim);
                for (j, v) in b.iter().enumerate() {
                    for (i, &[re, im]) in v.iter().enumerate() {
                        m[(i, j)] = C64::new(re, im);
                    }
                }
                Ok(m)
            })
            .collect()
    }
}

/// Smearing matrices as real grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmearingJson(pub Vec<Vec<f64>>);

/// Bundle written by the marginalization pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalSetJson {
    pub provenance: String,
    pub partitions: Vec<PartitionJson>,
    pub povms: Vec<FamilyJson>,
}

/// Output of the fiducial search:
/// `{"field":...,"psi":[[re,im],...],"residual":...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiducialJson {
    pub field: FieldDescriptor,
    pub psi: Vec<[f64; 2]>,
    pub residual: f64,
}

impl FiducialJson {
    pub fn vector(&self) -> CVec {
        CVec::from_iterator(self.psi.len(), self.psi.iter().map(|&[re, im]| C64::new(re, im)))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::FileIo {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::SchemaViolation(format!("{path:?}: {e}")))
}

/// Serialize deterministically (pretty, trailing newline) so repeat
/// runs produce byte-identical artifacts.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::SchemaViolation(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::FileIo {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::qubit;
    use crate::combin;

    #[test]
    fn field_descriptor_round_trip() {
        let f = Field::new(3, 2, None).unwrap();
        let desc = FieldDescriptor::of(&f);
        let back = desc.build().unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn family_round_trip() {
        let sic = qubit::tetrahedron_sic();
        let json = FamilyJson::of(&sic);
        let back = json.family().unwrap();
        assert_eq!(back.kind(), FamilyKind::SicCandidate);
        for (a, b) in back.members().iter().zip(sic.members()) {
            assert!(crate::operators::max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
        }
        assert_eq!(back.labels(), sic.labels());
    }

    #[test]
    fn partition_and_path_round_trips() {
        let f = Field::prime(3).unwrap();
        let parts = combin::partition_family_from_field(&f);
        for p in &parts {
            let back = PartitionJson::of(p).partition().unwrap();
            assert_eq!(&back, p);
        }
        let sys = combin::dualize_to_path_system(&parts).unwrap();
        let back = PathSystemJson::of(&sys).system().unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn malformed_operator_rejected() {
        let bad = OperatorJson {
            dim: 2,
            entries: vec![vec![[1.0, 0.0]]],
        };
        assert!(matches!(bad.matrix(), Err(Error::SchemaViolation(_))));
    }
}
