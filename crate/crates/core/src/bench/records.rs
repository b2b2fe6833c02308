use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One replication at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub algorithm: String,
    pub target: String,
    pub n: usize,
    pub m: usize,
    pub t: usize,
    /// `None` when the scales are drawn at random.
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub scheme: String,
    pub adaptation: String,
    pub replication: usize,
    pub seed: u64,
    pub i_hat: Vec<f64>,
    pub z_hat: Option<f64>,
    pub e: u64,
    pub wall_time_s: f64,
}

const LEADING: [&str; 12] = [
    "experiment",
    "algorithm",
    "target",
    "N",
    "M",
    "T",
    "sigma",
    "lambda",
    "scheme",
    "adaptation",
    "replication",
    "seed",
];
const TRAILING: [&str; 3] = ["Z_hat", "E", "wall_time_s"];
const NA: &str = "NA";

/// 17 significant digits: enough for every double to re-parse exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), format_float)
}

/// Column names for records with `dim` estimate components.
pub fn header(dim: usize) -> Vec<String> {
    LEADING
        .iter()
        .map(|s| s.to_string())
        .chain((1..=dim).map(|d| format!("I_hat_{d}")))
        .chain(TRAILING.iter().map(|s| s.to_string()))
        .collect()
}

impl ResultRecord {
    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.experiment.clone(),
            self.algorithm.clone(),
            self.target.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.t.to_string(),
            opt(self.sigma),
            opt(self.lambda),
            self.scheme.clone(),
            self.adaptation.clone(),
            self.replication.to_string(),
            self.seed.to_string(),
        ];
        f.extend(self.i_hat.iter().map(|&v| format_float(v)));
        f.push(opt(self.z_hat));
        f.push(self.e.to_string());
        f.push(format_float(self.wall_time_s));
        f
    }
}

/// Writes the header and one row per record.
pub fn write_csv<W: Write>(records: &[ResultRecord], writer: W) -> Result<()> {
    let dim = records.first().map_or(0, |r| r.i_hat.len());
    if let Some(r) = records.iter().find(|r| r.i_hat.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: r.i_hat.len(),
        });
    }
    let io = |e: csv::Error| Error::Parse {
        path: "<csv>".into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(dim)).map_err(io)?;
    for r in records {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse {
        path: "<csv>".into(),
        message: e.to_string(),
    })
}

/// Writes `records` to `path`.
pub fn export_csv(records: &[ResultRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(records, file).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parses CSV produced by [`write_csv`].
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let err = |line: u64, message: String| Error::Parse {
        path: "<csv>".into(),
        message: format!("line {line}: {message}"),
    };
    let mut rdr = csv::Reader::from_reader(reader);
    let head = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let cols = head.len();
    if cols < LEADING.len() + TRAILING.len() {
        return Err(err(1, format!("expected at least {} columns", LEADING.len() + TRAILING.len())));
    }
    let dim = cols - LEADING.len() - TRAILING.len();
    let expected = header(dim);
    if head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(err(1, "unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| err(line, e.to_string()))?;
        let get = |k: usize| row.get(k).unwrap_or("");
        let int = |k: usize| -> Result<u64> {
            get(k)
                .parse()
                .map_err(|_| err(line, format!("column {}: bad integer `{}`", expected[k], get(k))))
        };
        let float = |k: usize| -> Result<f64> {
            get(k)
                .parse()
                .map_err(|_| err(line, format!("column {}: bad number `{}`", expected[k], get(k))))
        };
        let opt_float = |k: usize| -> Result<Option<f64>> {
            if get(k) == NA {
                Ok(None)
            } else {
                float(k).map(Some)
            }
        };
        let i_hat = (0..dim).map(|d| float(LEADING.len() + d)).collect::<Result<_>>()?;
        let tail = LEADING.len() + dim;
        out.push(ResultRecord {
            experiment: get(0).to_string(),
            algorithm: get(1).to_string(),
            target: get(2).to_string(),
            n: int(3)? as usize,
            m: int(4)? as usize,
            t: int(5)? as usize,
            sigma: opt_float(6)?,
            lambda: opt_float(7)?,
            scheme: get(8).to_string(),
            adaptation: get(9).to_string(),
            replication: int(10)? as usize,
            seed: int(11)?,
            i_hat,
            z_hat: opt_float(tail)?,
            e: int(tail + 1)?,
            wall_time_s: float(tail + 2)?,
        });
    }
    Ok(out)
}

pub fn parse_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}
