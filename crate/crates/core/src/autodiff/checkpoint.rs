//! Plain-text parameter checkpoints.
//!
//! ```text
//! isogcl-checkpoint 1
//! meta <key> <value>            zero or more header entries
//! param <name> <rows> <cols>
//! <rows*cols values, space separated, shortest round-trip form>
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! save/load cycle is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::params::ParamStore;
use super::{Tensor, TensorError};

pub const MAGIC: &str = "isogcl-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub value: Tensor,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub meta: BTreeMap<String, String>,
    pub records: Vec<Record>,
}

impl Checkpoint {
    pub fn from_store(meta: BTreeMap<String, String>, store: &ParamStore) -> Self {
        let records = store.iter().map(|(_, p)| Record { name: p.name.clone(), value: p.value.clone() }).collect();
        Self { meta, records }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        for (k, v) in &self.meta {
            writeln!(out, "meta {k} {v}").unwrap();
        }
        for r in &self.records {
            let (rows, cols) = r.value.shape();
            writeln!(out, "param {} {rows} {cols}", r.name).unwrap();
            let values: Vec<String> = r.value.data().iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{}", values.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TensorError> {
        let bad = |line: usize, msg: &str| TensorError::Checkpoint(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(bad(1, "missing checkpoint header")),
        }
        let mut ckpt = Checkpoint::default();
        while let Some((no, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ' ');
            match parts.next() {
                Some("meta") => {
                    let rest = parts.next().unwrap_or("");
                    let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                    ckpt.meta.insert(k.to_string(), v.to_string());
                }
                Some("param") => {
                    let fields: Vec<&str> = parts.next().unwrap_or("").split_whitespace().collect();
                    let [name, rows, cols] = fields.as_slice() else {
                        return Err(bad(no, "expected `param <name> <rows> <cols>`"));
                    };
                    let rows: usize = rows.parse().map_err(|_| bad(no, "bad row count"))?;
                    let cols: usize = cols.parse().map_err(|_| bad(no, "bad column count"))?;
                    let (dno, data_line) = lines.next().ok_or_else(|| bad(no, "missing data line"))?;
                    let data: Vec<f64> = data_line
                        .split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|_| bad(dno, &format!("bad value {t:?}"))))
                        .collect::<Result<_, _>>()?;
                    let value = Tensor::new(rows, cols, data).map_err(|_| bad(dno, "value count does not match shape"))?;
                    ckpt.records.push(Record { name: name.to_string(), value });
                }
                _ => return Err(bad(no, "unknown record")),
            }
        }
        Ok(ckpt)
    }

    /// Copies record values into `store`, matching by name. Every parameter
    /// must be present with the same shape.
    pub fn load_into(&self, store: &mut ParamStore) -> Result<(), TensorError> {
        if self.records.len() != store.len() {
            return Err(TensorError::Checkpoint(format!(
                "checkpoint has {} parameters, model has {}",
                self.records.len(),
                store.len()
            )));
        }
        for r in &self.records {
            let id = store
                .find(&r.name)
                .ok_or_else(|| TensorError::Checkpoint(format!("unknown parameter {}", r.name)))?;
            let p = store.get_mut(id);
            if p.value.shape() != r.value.shape() {
                return Err(TensorError::Shape { op: "checkpoint load", left: p.value.shape(), right: r.value.shape() });
            }
            p.value = r.value.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut store = ParamStore::new();
        store.add("a.w", Tensor::new(2, 2, vec![0.1, -1e-300, 1.0 / 3.0, 7.0]).unwrap());
        store.add("b", Tensor::scalar(f64::MIN_POSITIVE));
        let mut meta = BTreeMap::new();
        meta.insert("layers".to_string(), "3".to_string());
        let text = Checkpoint::from_store(meta.clone(), &store).to_text();
        let back = Checkpoint::parse(&text).unwrap();
        assert_eq!(back.meta, meta);
        let mut fresh = ParamStore::new();
        fresh.add("a.w", Tensor::zeros(2, 2));
        fresh.add("b", Tensor::zeros(1, 1));
        back.load_into(&mut fresh).unwrap();
        assert_eq!(fresh, store);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut store = ParamStore::new();
        store.add("w", Tensor::zeros(2, 3));
        let text = Checkpoint::from_store(BTreeMap::new(), &store).to_text();
        let mut other = ParamStore::new();
        other.add("w", Tensor::zeros(3, 2));
        assert!(Checkpoint::parse(&text).unwrap().load_into(&mut other).is_err());
    }
}
