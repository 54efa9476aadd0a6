//! Trajectory dataset model and its CSV representation.
//!
//! A dataset holds `n` observations in `R^D`, partitioned into `T` ordered
//! trajectories. Each trajectory carries a fixed set of named real
//! parameters (the process variables that generated it). Points are stored
//! grouped by trajectory and, within a trajectory, in ascending time order.

use std::collections::HashMap;
use std::io::{Read, Write};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::fmt_real;

const TRAJ_COLUMN: &str = "traj";
const TIME_COLUMN: &str = "t";
const PARAM_PREFIX: &str = "param:";

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    points: Array2<f64>,
    trajectory_of: Vec<usize>,
    time_index_of: Vec<usize>,
    times: Vec<f64>,
    trajectory_names: Vec<String>,
    param_names: Vec<String>,
    trajectory_params: Vec<Vec<f64>>,
}

/// Raw parts of a dataset, as accepted by [`TrajectoryDataset::from_parts_unchecked`].
#[derive(Debug, Clone)]
pub struct DatasetParts {
    pub points: Array2<f64>,
    pub trajectory_of: Vec<usize>,
    pub time_index_of: Vec<usize>,
    /// Raw time values; when empty, the time index is used.
    pub times: Vec<f64>,
    /// Display names per trajectory; when empty, ids are used.
    pub trajectory_names: Vec<String>,
    pub param_names: Vec<String>,
    /// One row of `param_names.len()` values per trajectory; may be empty.
    pub trajectory_params: Vec<Vec<f64>>,
}

impl TrajectoryDataset {
    /// Builds a dataset and rejects it if any invariant is violated.
    pub fn new(parts: DatasetParts) -> Result<Self> {
        let ds = Self::from_parts_unchecked(parts);
        let violations = ds.validate();
        if violations.is_empty() {
            Ok(ds)
        } else {
            Err(Error::InvalidDataset(violations.join("; ")))
        }
    }

    /// Builds a dataset without checking invariants. Use [`validate`](Self::validate)
    /// to inspect the result.
    pub fn from_parts_unchecked(parts: DatasetParts) -> Self {
        let n = parts.points.nrows();
        let times =
            if parts.times.len() == n { parts.times } else { parts.time_index_of.iter().map(|&t| t as f64).collect() };
        let t_count = parts.trajectory_of.iter().map(|&t| t + 1).max().unwrap_or(0);
        let trajectory_names = if parts.trajectory_names.is_empty() {
            (0..t_count).map(|t| t.to_string()).collect()
        } else {
            parts.trajectory_names
        };
        let trajectory_params = if parts.trajectory_params.is_empty() && parts.param_names.is_empty() {
            vec![Vec::new(); trajectory_names.len()]
        } else {
            parts.trajectory_params
        };
        TrajectoryDataset {
            points: parts.points,
            trajectory_of: parts.trajectory_of,
            time_index_of: parts.time_index_of,
            times,
            trajectory_names,
            param_names: parts.param_names,
            trajectory_params,
        }
    }

    /// Labels points by trajectory id; the time index of each point is its
    /// order of appearance within its trajectory.
    pub fn from_labeled_points(points: Array2<f64>, trajectory_of: Vec<usize>) -> Result<Self> {
        let mut next = HashMap::new();
        let time_index_of = trajectory_of
            .iter()
            .map(|&t| {
                let c = next.entry(t).or_insert(0usize);
                *c += 1;
                *c - 1
            })
            .collect();
        Self::new(DatasetParts {
            points,
            trajectory_of,
            time_index_of,
            times: Vec::new(),
            trajectory_names: Vec::new(),
            param_names: Vec::new(),
            trajectory_params: Vec::new(),
        })
    }

    /// Lists every violated invariant; empty when the dataset is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.points.nrows();
        if n < 2 {
            out.push(format!("dataset has {n} points, at least 2 required"));
        }
        if self.points.ncols() < 1 {
            out.push("dataset has no feature columns".to_string());
        }
        if self.trajectory_of.len() != n || self.time_index_of.len() != n || self.times.len() != n {
            out.push(format!(
                "per-point metadata length mismatch: {} points, {} trajectory ids, {} time indices, {} times",
                n,
                self.trajectory_of.len(),
                self.time_index_of.len(),
                self.times.len()
            ));
            return out;
        }
        for (i, row) in self.points.rows().into_iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                out.push(format!("point {i} has non-finite feature {j}"));
            }
        }

        let t_count = self.trajectory_of.iter().map(|&t| t + 1).max().unwrap_or(0);
        if t_count == 0 {
            out.push("dataset has no trajectories".to_string());
            return out;
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); t_count];
        for (i, &t) in self.trajectory_of.iter().enumerate() {
            members[t].push(i);
        }
        let missing: Vec<usize> = (0..t_count).filter(|&t| members[t].is_empty()).collect();
        if !missing.is_empty() {
            out.push(format!("trajectory ids not contiguous: ids {missing:?} have no points"));
        }
        for (t, pts) in members.iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let m = pts.len();
            let mut seen = vec![false; m];
            let mut dup = false;
            let mut out_of_range = false;
            for &p in pts {
                let ti = self.time_index_of[p];
                if ti >= m {
                    out_of_range = true;
                } else if seen[ti] {
                    dup = true;
                } else {
                    seen[ti] = true;
                }
            }
            if dup {
                out.push(format!("trajectory {t} has duplicated time indices"));
            }
            if out_of_range {
                out.push(format!("trajectory {t} has time indices outside 0..{m}"));
            }
        }
        if self.trajectory_names.len() != t_count {
            out.push(format!("{} trajectory names for {} trajectories", self.trajectory_names.len(), t_count));
        }
        if self.trajectory_params.len() != t_count
            || self.trajectory_params.iter().any(|p| p.len() != self.param_names.len())
        {
            out.push("trajectory parameter table does not match trajectory count and parameter names".to_string());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectory_names.len()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn trajectory_of(&self, i: usize) -> usize {
        self.trajectory_of[i]
    }

    pub fn trajectory_labels(&self) -> &[usize] {
        &self.trajectory_of
    }

    pub fn time_index_of(&self, i: usize) -> usize {
        self.time_index_of[i]
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn trajectory_name(&self, t: usize) -> &str {
        &self.trajectory_names[t]
    }

    pub fn trajectory_names(&self) -> &[String] {
        &self.trajectory_names
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn trajectory_params(&self, t: usize) -> &[f64] {
        &self.trajectory_params[t]
    }

    /// Point indices of trajectory `t`, ordered by time index.
    pub fn trajectory_points(&self, t: usize) -> Vec<usize> {
        let mut pts: Vec<usize> = (0..self.len()).filter(|&i| self.trajectory_of[i] == t).collect();
        pts.sort_by_key(|&i| self.time_index_of[i]);
        pts
    }

    /// Keeps the listed points (in the given order); time indices are re-ranked
    /// densely within each trajectory. Trajectory ids are unchanged, so every
    /// trajectory must keep at least one point.
    pub(crate) fn select(&self, keep: &[usize]) -> Result<Self> {
        let mut points = Array2::zeros((keep.len(), self.dim()));
        for (r, &i) in keep.iter().enumerate() {
            points.row_mut(r).assign(&self.points.row(i));
        }
        let mut by_traj: Vec<Vec<usize>> = vec![Vec::new(); self.trajectory_count()];
        for (r, &i) in keep.iter().enumerate() {
            by_traj[self.trajectory_of[i]].push(r);
        }
        let mut time_index_of = vec![0; keep.len()];
        for rows in &mut by_traj {
            rows.sort_by_key(|&r| self.time_index_of[keep[r]]);
            for (rank, &r) in rows.iter().enumerate() {
                time_index_of[r] = rank;
            }
        }
        Self::new(DatasetParts {
            points,
            trajectory_of: keep.iter().map(|&i| self.trajectory_of[i]).collect(),
            time_index_of,
            times: keep.iter().map(|&i| self.times[i]).collect(),
            trajectory_names: self.trajectory_names.clone(),
            param_names: self.param_names.clone(),
            trajectory_params: self.trajectory_params.clone(),
        })
    }
}

/// Assigns a role to each column of an input table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub trajectory: String,
    pub time: String,
    /// `(column, parameter name)` pairs.
    pub params: Vec<(String, String)>,
    /// Feature columns, in feature order.
    pub features: Vec<String>,
}

impl CsvSchema {
    /// The standard layout: `traj`, `t`, any `param:<name>` columns and
    /// `f0..f{D-1}`.
    pub fn from_header<S: AsRef<str>>(header: &[S]) -> Result<Self> {
        let malformed = |message: String| Error::MalformedRow { row: 1, message };
        let mut has_traj = false;
        let mut has_time = false;
        let mut params = Vec::new();
        let mut features = Vec::new();
        for col in header.iter().map(AsRef::as_ref) {
            if col == TRAJ_COLUMN {
                has_traj = true;
            } else if col == TIME_COLUMN {
                has_time = true;
            } else if let Some(name) = col.strip_prefix(PARAM_PREFIX) {
                if name.is_empty() {
                    return Err(malformed("parameter column with empty name".into()));
                }
                params.push((col.to_string(), name.to_string()));
            } else if let Some(idx) = col.strip_prefix('f').and_then(|s| s.parse::<usize>().ok()) {
                features.push((idx, col.to_string()));
            } else {
                return Err(malformed(format!("unrecognized column '{col}'")));
            }
        }
        if !has_traj || !has_time {
            return Err(malformed("header must contain 'traj' and 't' columns".into()));
        }
        features.sort();
        if features.is_empty() || features.iter().enumerate().any(|(k, (idx, _))| *idx != k) {
            return Err(malformed("feature columns must be f0..f{D-1} with D >= 1".into()));
        }
        Ok(CsvSchema {
            trajectory: TRAJ_COLUMN.to_string(),
            time: TIME_COLUMN.to_string(),
            params,
            features: features.into_iter().map(|(_, c)| c).collect(),
        })
    }
}

/// Reads a CSV table whose header follows the standard layout.
pub fn read_csv<R: Read>(source: R) -> Result<TrajectoryDataset> {
    load_dataset(source, None)
}

/// Reads a dataset from CSV. With no schema, the header must follow the
/// standard layout (see [`CsvSchema::from_header`]).
///
/// Trajectory names are mapped to ids in order of first appearance, and the
/// points of each trajectory are ranked by ascending time.
pub fn load_dataset<R: Read>(source: R, schema: Option<&CsvSchema>) -> Result<TrajectoryDataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header: Vec<String> =
        reader.headers().map_err(|e| csv_error(e, 1))?.iter().map(|s| s.trim().to_string()).collect();
    let inferred;
    let schema = match schema {
        Some(s) => s,
        None => {
            inferred = CsvSchema::from_header(&header)?;
            &inferred
        }
    };
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedRow { row: 1, message: format!("missing column '{name}'") })
    };
    let traj_col = column(&schema.trajectory)?;
    let time_col = column(&schema.time)?;
    let param_cols = schema.params.iter().map(|(c, _)| column(c)).collect::<Result<Vec<_>>>()?;
    let feature_cols = schema.features.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;

    let mut builder = DatasetBuilder::new(schema.params.iter().map(|(_, n)| n.clone()).collect());
    let mut record = csv::StringRecord::new();
    loop {
        let row = reader.position().line() as usize;
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_error(e, row)),
        }
        let row = record.position().map(|p| p.line() as usize).unwrap_or(row);
        let field = |c: usize| record.get(c).map(str::trim).unwrap_or("");
        let number = |c: usize| -> Result<f64> {
            field(c).parse::<f64>().map_err(|_| Error::MalformedRow {
                row,
                message: format!("column '{}' is not a number: '{}'", header[c], field(c)),
            })
        };
        let time = number(time_col)?;
        if !time.is_finite() {
            return Err(Error::MalformedRow { row, message: "non-finite time value".into() });
        }
        let params = param_cols.iter().map(|&c| number(c)).collect::<Result<Vec<_>>>()?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::MalformedRow { row, message: "non-finite parameter value".into() });
        }
        let features = feature_cols.iter().map(|&c| number(c)).collect::<Result<Vec<_>>>()?;
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row });
        }
        builder.push(field(traj_col), time, params, features, row)?;
    }
    builder.build()
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(row);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Read(io),
        other => Error::MalformedRow { row, message: format!("{other:?}") },
    }
}

/// Writes a dataset in the standard CSV layout, 17 significant digits per value.
pub fn write_csv<W: Write>(dataset: &TrajectoryDataset, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![TRAJ_COLUMN.to_string(), TIME_COLUMN.to_string()];
    header.extend(dataset.param_names.iter().map(|p| format!("{PARAM_PREFIX}{p}")));
    header.extend((0..dataset.dim()).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(write_error)?;
    for i in 0..dataset.len() {
        let t = dataset.trajectory_of[i];
        let mut rec = vec![dataset.trajectory_names[t].clone(), fmt_real(dataset.times[i])];
        rec.extend(dataset.trajectory_params[t].iter().map(|&v| fmt_real(v)));
        rec.extend(dataset.points.row(i).iter().map(|&v| fmt_real(v)));
        w.write_record(&rec).map_err(write_error)?;
    }
    w.flush().map_err(Error::Write)
}

fn write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Write(io),
        other => Error::Write(std::io::Error::other(format!("{other:?}"))),
    }
}

struct PendingRow {
    time: f64,
    features: Vec<f64>,
}

/// Accumulates rows in arbitrary order and produces a canonical dataset:
/// trajectories in first-appearance order, points sorted by time.
pub struct DatasetBuilder {
    param_names: Vec<String>,
    ids: HashMap<String, usize>,
    names: Vec<String>,
    params: Vec<Vec<f64>>,
    rows: Vec<Vec<PendingRow>>,
    dim: Option<usize>,
}

impl DatasetBuilder {
    pub fn new(param_names: Vec<String>) -> Self {
        DatasetBuilder {
            param_names,
            ids: HashMap::new(),
            names: Vec::new(),
            params: Vec::new(),
            rows: Vec::new(),
            dim: None,
        }
    }

    /// Adds one observation. `row` is only used in error messages.
    pub fn push(
        &mut self,
        trajectory: &str,
        time: f64,
        params: Vec<f64>,
        features: Vec<f64>,
        row: usize,
    ) -> Result<()> {
        if params.len() != self.param_names.len() {
            return Err(Error::MalformedRow {
                row,
                message: format!("expected {} parameters, got {}", self.param_names.len(), params.len()),
            });
        }
        match self.dim {
            Some(d) if d != features.len() => {
                return Err(Error::MalformedRow {
                    row,
                    message: format!("expected {d} features, got {}", features.len()),
                })
            }
            _ => self.dim = Some(features.len()),
        }
        let id = match self.ids.get(trajectory) {
            Some(&id) => {
                if self.params[id] != params {
                    return Err(Error::MalformedRow {
                        row,
                        message: format!("parameters change within trajectory '{trajectory}'"),
                    });
                }
                id
            }
            None => {
                let id = self.names.len();
                self.ids.insert(trajectory.to_string(), id);
                self.names.push(trajectory.to_string());
                self.params.push(params);
                self.rows.push(Vec::new());
                id
            }
        };
        self.rows[id].push(PendingRow { time, features });
        Ok(())
    }

    pub fn build(mut self) -> Result<TrajectoryDataset> {
        let dim = self.dim.unwrap_or(0);
        let n: usize = self.rows.iter().map(Vec::len).sum();
        let mut points = Array2::zeros((n, dim));
        let mut trajectory_of = Vec::with_capacity(n);
        let mut time_index_of = Vec::with_capacity(n);
        let mut times = Vec::with_capacity(n);
        for (id, rows) in self.rows.iter_mut().enumerate() {
            if rows.is_empty() {
                return Err(Error::EmptyTrajectory(self.names[id].clone()));
            }
            rows.sort_by(|a, b| a.time.total_cmp(&b.time));
            if let Some(w) = rows.windows(2).find(|w| w[0].time == w[1].time) {
                return Err(Error::DuplicateTime { trajectory: self.names[id].clone(), time: w[0].time });
            }
            for (rank, r) in rows.iter().enumerate() {
                let i = trajectory_of.len();
                points.row_mut(i).iter_mut().zip(&r.features).for_each(|(dst, &v)| *dst = v);
                trajectory_of.push(id);
                time_index_of.push(rank);
                times.push(r.time);
            }
        }
        TrajectoryDataset::new(DatasetParts {
            points,
            trajectory_of,
            time_index_of,
            times,
            trajectory_names: self.names,
            param_names: self.param_names,
            trajectory_params: self.params,
        })
    }
}
