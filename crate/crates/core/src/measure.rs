//! Finitely supported probability measures.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler::Point;

/// Tolerance on `|Σ weights - 1|`.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::Parameter(format!(
                "{} atoms with {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].dim();
        if atoms.iter().any(|a| a.dim() != dim) {
            return Err(Error::Parameter("atoms of mixed dimension".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Parameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Parameter(format!("weights sum to {total}, not 1")));
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if atoms[i] == atoms[j] {
                    return Err(Error::Parameter(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn dirac(at: Point) -> Self {
        DiscreteMeasure {
            atoms: vec![at],
            weights: vec![1.0],
        }
    }

    pub fn uniform(atoms: Vec<Point>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Normalizes `weights` to unit mass before validating.
    pub fn normalized(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Parameter("total mass must be positive".into()));
        }
        let mut w: Vec<f64> = weights.iter().map(|v| v / total).collect();
        // absorb rounding into the largest weight
        let err = 1.0 - w.iter().sum::<f64>();
        if let Some(k) = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])) {
            w[k] += err;
        }
        Self::new(atoms, w)
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|v| (v - w).abs() < 1e-14)
    }

    /// Reads one atom per row: coordinates followed by the weight. A header
    /// row is skipped when its fields are not numeric.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals: std::result::Result<Vec<f64>, _> =
                rec.iter().map(str::parse::<f64>).collect();
            match vals {
                Ok(v) if v.len() >= 2 => {
                    weights.push(v[v.len() - 1]);
                    atoms.push(Point(v[..v.len() - 1].to_vec()));
                }
                Ok(_) => {
                    return Err(Error::Parameter(format!(
                        "row {} has fewer than two fields",
                        line + 1
                    )))
                }
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Parameter(format!("row {}: {e}", line + 1))),
            }
        }
        Self::normalized(atoms, weights)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f =
            std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(f)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (a, m) in self.atoms.iter().zip(&self.weights) {
            let mut row: Vec<String> = a.coords().iter().map(|c| format!("{c:.17e}")).collect();
            row.push(format!("{m:.17e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
