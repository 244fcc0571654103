//! Committee files: a JSON list of member network files, resolved relative to the
//! committee file, and their weights.
//!
//! ```json
//! {"members": ["member_0.json", "member_1.json"], "weights": [0.5, 0.5]}
//! ```

use std::fs;
use std::path::Path;

use bnactive_core::Committee;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{read_network, write_network};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommitteeDoc {
    members: Vec<String>,
    weights: Vec<f64>,
}

pub fn read_committee(path: impl AsRef<Path>) -> Result<Committee> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: CommitteeDoc = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let members = doc
        .members
        .iter()
        .map(|m| read_network(base.join(m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Committee::new(members, doc.weights)?)
}

/// Write `member_<i>.json` files and `committee.json` into `dir`.
pub fn write_committee(dir: impl AsRef<Path>, c: &Committee) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut members = Vec::with_capacity(c.len());
    for (i, m) in c.members().iter().enumerate() {
        let name = format!("member_{i}.json");
        write_network(dir.join(&name), m)?;
        members.push(name);
    }
    let doc = CommitteeDoc {
        members,
        weights: c.weights().to_vec(),
    };
    let path = dir.join("committee.json");
    let mut text =
        serde_json::to_string_pretty(&doc).expect("committee documents always serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
