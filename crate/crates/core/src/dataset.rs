//! Column-major numeric tables with a designated regression target.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Original range of a column before it was mapped onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaleRecord {
    pub min: f64,
    pub max: f64,
    /// The column held a single value and was mapped to all zeros.
    pub constant: bool,
}

impl RescaleRecord {
    pub fn of(values: &[f64]) -> Self {
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        RescaleRecord {
            min,
            max,
            constant: max <= min,
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    pub fn invert(&self, v: f64) -> f64 {
        if self.constant {
            self.min
        } else {
            self.min + v * (self.max - self.min)
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Drop rows holding empty or non-finite cells instead of failing.
    pub drop_incomplete: bool,
}

/// An immutable numeric table. Every column has the same length and
/// exactly one column is the regression target.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: usize,
    rescale: Option<Vec<RescaleRecord>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, target: &str) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::Shape("no columns".into()));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: n });
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Shape(format!(
                "column {:?} has {} rows, expected {n}",
                names[i],
                c.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        let target = names
            .iter()
            .position(|n| n == target)
            .ok_or_else(|| Error::UnknownColumn(target.to_string()))?;
        Ok(Dataset {
            names,
            columns,
            target,
            rescale: None,
        })
    }

    /// Reads a headed CSV file. The last column is the target when `target` is `None`.
    pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<Self> {
        Self::load_csv_with(path, Some(target), LoadOptions::default()).map(|(d, _)| d)
    }

    /// Like [`Dataset::load_csv`], also returning the number of dropped rows.
    pub fn load_csv_with(
        path: impl AsRef<Path>,
        target: Option<&str>,
        opts: LoadOptions,
    ) -> Result<(Self, usize)> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        let mut dropped = 0;
        let mut row_buf = Vec::with_capacity(names.len());
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            // 1-based data row, header excluded
            let row = i + 1;
            row_buf.clear();
            let mut incomplete = false;
            for (j, cell) in record.iter().enumerate() {
                let parsed = if cell.is_empty() {
                    None
                } else {
                    cell.parse::<f64>().ok()
                };
                match parsed {
                    Some(v) if v.is_finite() => row_buf.push(v),
                    Some(_) if opts.drop_incomplete => incomplete = true,
                    None if cell.is_empty() && opts.drop_incomplete => incomplete = true,
                    _ => {
                        return Err(Error::NonNumeric {
                            row,
                            column: names.get(j).cloned().unwrap_or_default(),
                            value: cell.to_string(),
                        })
                    }
                }
            }
            if incomplete {
                dropped += 1;
                continue;
            }
            for (col, v) in columns.iter_mut().zip(&row_buf) {
                col.push(*v);
            }
        }
        let target = match target {
            Some(t) => t.to_string(),
            None => names
                .last()
                .cloned()
                .ok_or_else(|| Error::Shape("empty header".into()))?,
        };
        Ok((Dataset::new(names, columns, &target)?, dropped))
    }

    /// Writes the raw values with a header row. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv_to(&mut out)
            .map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.names.join(","))?;
        let mut line = String::new();
        for r in 0..self.n_rows() {
            line.clear();
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&col[r].to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    /// Embedding dimension: features plus target.
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn target_name(&self) -> &str {
        &self.names[self.target]
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &[f64] {
        &self.columns[self.target]
    }

    /// Feature names in column order, target excluded.
    pub fn feature_names(&self) -> Vec<&str> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.target)
            .map(|(_, n)| n.as_str())
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn column_at(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn columns(&self) -> Vec<&[f64]> {
        self.columns.iter().map(Vec::as_slice).collect()
    }

    pub fn columns_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<&[f64]>> {
        names.iter().map(|n| self.column(n.as_ref())).collect()
    }

    pub fn rescale_records(&self) -> Option<&[RescaleRecord]> {
        self.rescale.as_deref()
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescale.is_some()
    }

    /// Names of columns that were constant when rescaled.
    pub fn constant_columns(&self) -> Vec<&str> {
        match &self.rescale {
            Some(recs) => recs
                .iter()
                .zip(&self.names)
                .filter(|(r, _)| r.constant)
                .map(|(_, n)| n.as_str())
                .collect(),
            None => Vec::new(),
        }
    }

    /// Maps every column affinely onto `[0, 1]`. Constant columns become all
    /// zeros and are flagged in their [`RescaleRecord`].
    pub fn rescale_unit(&self) -> Dataset {
        let records: Vec<RescaleRecord> =
            self.columns.iter().map(|c| RescaleRecord::of(c)).collect();
        let columns = self
            .columns
            .iter()
            .zip(&records)
            .map(|(c, rec)| c.iter().map(|&v| rec.apply(v)).collect())
            .collect();
        for (rec, name) in records.iter().zip(&self.names) {
            if rec.constant {
                log::warn!("column {name:?} is constant; rescaled to zeros");
            }
        }
        // keep the original-units record across repeated rescaling
        let records = match &self.rescale {
            Some(prev) => prev.clone(),
            None => records,
        };
        Dataset {
            names: self.names.clone(),
            columns,
            target: self.target,
            rescale: Some(records),
        }
    }

    /// Replaces the target with a seeded uniform permutation of itself.
    pub fn shuffle_target(&self, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        out.columns[self.target].shuffle(&mut rng);
        out
    }

    /// Restricts the table to `names`, in that order. The target must be kept.
    pub fn subset<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.index_of(n.as_ref()))
            .collect::<Result<_>>()?;
        let target = idx.iter().position(|&i| i == self.target).ok_or_else(|| {
            Error::Shape(format!(
                "subset drops target column {:?}",
                self.target_name()
            ))
        })?;
        let mut seen = HashSet::new();
        if let Some(&dup) = idx.iter().find(|&&i| !seen.insert(i)) {
            return Err(Error::DuplicateColumn(self.names[dup].clone()));
        }
        Ok(Dataset {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            target,
            rescale: self
                .rescale
                .as_ref()
                .map(|recs| idx.iter().map(|&i| recs[i]).collect()),
        })
    }

    /// Appends a column; the target designation is unchanged.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Dataset> {
        if values.len() != self.n_rows() {
            return Err(Error::Shape(format!(
                "column {name:?} has {} rows, expected {}",
                values.len(),
                self.n_rows()
            )));
        }
        if self.names.iter().any(|n| n == name) {
            return Err(Error::DuplicateColumn(name.to_string()));
        }
        let mut out = self.clone();
        if let Some(recs) = &mut out.rescale {
            recs.push(RescaleRecord::of(&values));
        }
        out.names.push(name.to_string());
        out.columns.push(values);
        Ok(out)
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Dataset> {
        if order.len() != self.n_rows() {
            return Err(Error::Shape("row order length mismatch".into()));
        }
        let mut out = self.clone();
        for (dst, src) in out.columns.iter_mut().zip(&self.columns) {
            for (d, &i) in dst.iter_mut().zip(order) {
                *d = *src
                    .get(i)
                    .ok_or_else(|| Error::Shape(format!("row {i} out of range")))?;
            }
        }
        Ok(out)
    }

    /// Rows selected by index, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            target: self.target,
            rescale: self.rescale.clone(),
        }
    }
}
