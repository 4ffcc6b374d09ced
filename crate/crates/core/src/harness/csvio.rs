//! CSV outputs. Every file starts with a `#schema=<name>.v<N>` line followed by
//! a regular header row; readers must check the schema line before parsing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub columns: &'static [&'static str],
}

impl Schema {
    pub fn tag(&self) -> String {
        format!("#schema={}.v{}", self.name, self.version)
    }
}

pub const TRACE: Schema = Schema {
    name: "trace",
    version: 1,
    columns: &["trial", "step", "mae", "policy_accuracy", "macro", "micro", "gaps"],
};

pub const AGGREGATE: Schema = Schema {
    name: "aggregate",
    version: 1,
    columns: &[
        "step",
        "trials",
        "mae_mean",
        "mae_std",
        "policy_accuracy_mean",
        "policy_accuracy_std",
        "macro_mean",
        "macro_std",
        "micro_mean",
        "micro_std",
    ],
};

pub const EVAL: Schema = Schema {
    name: "eval",
    version: 1,
    columns: &["trial", "stage", "mae", "policy_accuracy", "macro", "micro"],
};

pub const SWEEP: Schema = Schema {
    name: "sweep",
    version: 1,
    columns: &["mass", "rho", "instance", "mae", "policy_accuracy", "macro", "micro"],
};

pub const SWEEP_MEAN: Schema = Schema {
    name: "sweep_mean",
    version: 1,
    columns: &[
        "mass",
        "rho",
        "instances",
        "mae_mean",
        "mae_std",
        "policy_accuracy_mean",
        "policy_accuracy_std",
        "macro_mean",
        "macro_std",
        "micro_mean",
        "micro_std",
    ],
};

pub const STG: Schema = Schema {
    name: "stg",
    version: 1,
    columns: &[
        "instance",
        "group",
        "mean_stg",
        "max_stg",
        "num_rollouts",
        "successes",
        "complete",
        "policy_accuracy",
    ],
};

pub const FREQUENCY: Schema = Schema {
    name: "frequency",
    version: 1,
    columns: &["x", "y", "frequency", "instances"],
};

pub const ACTION_DIST: Schema = Schema {
    name: "action_dist",
    version: 1,
    columns: &["x", "y", "L", "D", "R", "U", "optimal", "correct", "instances", "frequency"],
};

/// Writes `rows` under `schema` to `path`.
pub fn write_csv(path: &Path, schema: &Schema, rows: &[Vec<String>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", schema.tag()).map_err(|e| Error::io(path, e))?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(schema.columns)?;
        for row in rows {
            debug_assert_eq!(row.len(), schema.columns.len());
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_csv`], checking the schema line and header.
pub fn read_csv(path: &Path, schema: &Schema) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let parse_err = |reason: String| Error::Parse {
        path: path.to_path_buf(),
        reason,
    };
    if first.trim_end() != schema.tag() {
        return Err(parse_err(format!(
            "schema line `{}` does not match `{}`",
            first.trim_end(),
            schema.tag()
        )));
    }
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != schema.columns {
        return Err(parse_err(format!("unexpected columns {header:?}")));
    }
    r.records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
