//! CSV datasets: one column per variable holding state labels, then one `do_<name>`
//! column per variable holding `0` or `1`.
//!
//! ```text
//! A,B,do_A,do_B
//! yes,hi,0,0
//! no,lo,1,0
//! ```
//!
//! A value that is not a state label is read as a zero-based state index.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use bnactive_core::{Dataset, Record, Variable};

use crate::error::{Error, Result};

const FLAG_PREFIX: &str = "do_";

#[derive(Debug, thiserror::Error)]
pub enum DatasetFormatError {
    #[error("column `{0}` does not name a variable or flag")]
    UnknownColumn(String),

    #[error("column `{0}` appears twice")]
    DuplicateColumn(String),

    #[error("no value column for variable `{0}`")]
    MissingColumn(String),

    #[error("no intervention flag column `do_{0}`")]
    MissingFlag(String),

    #[error("line {line}: `{value}` is not a state of `{variable}` (states: {states})")]
    UnknownState {
        line: u64,
        variable: String,
        value: String,
        states: String,
    },

    #[error("line {line}: state index {index} out of range for `{variable}` with {arity} states")]
    StateOutOfRange {
        line: u64,
        variable: String,
        index: usize,
        arity: usize,
    },

    #[error("line {line}: flag `{column}` must be 0 or 1, got `{value}`")]
    BadFlag {
        line: u64,
        column: String,
        value: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy)]
enum Column {
    Value(usize),
    Flag(usize),
}

pub fn parse_dataset<R: Read>(
    reader: R,
    schema: &[Variable],
) -> Result<Dataset, DatasetFormatError> {
    use DatasetFormatError as E;
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let find = |name: &str| schema.iter().position(|v| v.name() == name);
    let mut columns = Vec::with_capacity(headers.len());
    let mut seen_value = vec![false; schema.len()];
    let mut seen_flag = vec![false; schema.len()];
    for h in headers.iter() {
        let (col, seen) = if let Some(v) = find(h) {
            (Column::Value(v), &mut seen_value[v])
        } else if let Some(v) = h.strip_prefix(FLAG_PREFIX).and_then(find) {
            (Column::Flag(v), &mut seen_flag[v])
        } else {
            return Err(E::UnknownColumn(h.to_owned()));
        };
        if std::mem::replace(seen, true) {
            return Err(E::DuplicateColumn(h.to_owned()));
        }
        columns.push(col);
    }
    if let Some(v) = seen_value.iter().position(|s| !s) {
        return Err(E::MissingColumn(schema[v].name().to_owned()));
    }
    if let Some(v) = seen_flag.iter().position(|s| !s) {
        return Err(E::MissingFlag(schema[v].name().to_owned()));
    }

    let mut ds = Dataset::empty(schema.to_vec());
    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let mut values = vec![0; schema.len()];
        let mut flags = vec![false; schema.len()];
        for (field, col) in row.iter().zip(&columns) {
            match *col {
                Column::Value(v) => values[v] = parse_state(field, &schema[v], line)?,
                Column::Flag(v) => {
                    flags[v] = match field {
                        "0" => false,
                        "1" => true,
                        _ => {
                            return Err(E::BadFlag {
                                line,
                                column: format!("{FLAG_PREFIX}{}", schema[v].name()),
                                value: field.to_owned(),
                            })
                        }
                    }
                }
            }
        }
        let record = Record::new(values, flags).expect("one flag per value");
        ds.push(record)
            .expect("states validated against the schema");
    }
    Ok(ds)
}

fn parse_state(field: &str, var: &Variable, line: u64) -> Result<usize, DatasetFormatError> {
    if let Some(s) = var.state_index(field) {
        return Ok(s);
    }
    match field.parse::<usize>() {
        Ok(index) if index < var.arity() => Ok(index),
        Ok(index) => Err(DatasetFormatError::StateOutOfRange {
            line,
            variable: var.name().to_owned(),
            index,
            arity: var.arity(),
        }),
        Err(_) => Err(DatasetFormatError::UnknownState {
            line,
            variable: var.name().to_owned(),
            value: field.to_owned(),
            states: var.states().join(", "),
        }),
    }
}

pub fn write_dataset_to<W: Write>(writer: W, ds: &Dataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let schema = ds.schema();
    let header: Vec<String> = schema
        .iter()
        .map(|v| v.name().to_owned())
        .chain(schema.iter().map(|v| format!("{FLAG_PREFIX}{}", v.name())))
        .collect();
    w.write_record(&header)?;
    for r in ds.records() {
        let fields = r
            .values()
            .iter()
            .zip(schema)
            .map(|(&s, v)| v.states()[s].as_str())
            .chain(r.intervened().iter().map(|&f| if f { "1" } else { "0" }));
        w.write_record(fields)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>, schema: &[Variable]) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, schema).map_err(|source| Error::Dataset {
        path: path.to_owned(),
        source,
    })
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_to(file, ds)
}
