//! Mixed observational/interventional datasets and bootstrap resampling.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{Intervention, Variable};

/// One complete instantiation, with a flag per variable marking values forced by `do(q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Record {
    values: Vec<usize>,
    intervened: Vec<bool>,
}

impl Record {
    pub fn new(values: Vec<usize>, intervened: Vec<bool>) -> Result<Self> {
        if values.len() != intervened.len() {
            return Err(Error::Shape(format!(
                "{} values but {} intervention flags",
                values.len(),
                intervened.len()
            )));
        }
        Ok(Self { values, intervened })
    }

    pub fn observational(values: Vec<usize>) -> Self {
        let intervened = alloc::vec![false; values.len()];
        Self { values, intervened }
    }

    /// Record acquired under `do(q)`; flags are set exactly on the query variables.
    pub fn under(values: Vec<usize>, q: &Intervention) -> Self {
        let mut intervened = alloc::vec![false; values.len()];
        for v in q.variables() {
            intervened[v] = true;
        }
        Self { values, intervened }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn intervened(&self) -> &[bool] {
        &self.intervened
    }

    pub fn is_intervened(&self, v: usize) -> bool {
        self.intervened[v]
    }
}

/// Ordered records over a fixed schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<Variable>,
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: Vec<Variable>, records: Vec<Record>) -> Result<Self> {
        let mut ds = Self::empty(schema);
        for r in records {
            ds.push(r)?;
        }
        Ok(ds)
    }

    pub fn empty(schema: Vec<Variable>) -> Self {
        Self {
            schema,
            records: Vec::new(),
        }
    }

    /// Append a record after checking it against the schema.
    pub fn push(&mut self, record: Record) -> Result<()> {
        if record.values.len() != self.schema.len() {
            return Err(Error::Shape(format!(
                "record of length {} for {} variables",
                record.values.len(),
                self.schema.len()
            )));
        }
        for (v, (&s, var)) in record.values.iter().zip(&self.schema).enumerate() {
            if s >= var.arity() {
                return Err(Error::Shape(format!(
                    "state {s} of variable {v} (`{}`) exceeds arity {}",
                    var.name(),
                    var.arity()
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn schema(&self) -> &[Variable] {
        &self.schema
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn variable_count(&self) -> usize {
        self.schema.len()
    }

    /// Classical bootstrap: `len()` records drawn uniformly with replacement.
    pub fn bootstrap_resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Dataset> {
        if self.records.is_empty() {
            return Err(Error::EmptyData);
        }
        let n = self.records.len();
        let records = (0..n)
            .map(|_| self.records[rng.random_range(0..n)].clone())
            .collect();
        Ok(Self {
            schema: self.schema.clone(),
            records,
        })
    }
}
