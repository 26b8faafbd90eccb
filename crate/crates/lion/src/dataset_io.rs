//! Line-delimited JSON dataset files.
//!
//! Line 1 is the header record, every further line one trajectory:
//!
//! ```text
//! {"format_version":1,"state_dim":2,"action_dim":2,"n_trajectories":34}
//! {"episode_id":0,"transitions":[{"state":[..],"action":[..],"reward":0.01,"next_state":[..]},..],"meta":{"policy":"goal_2d","explore_eps":0.1,"seed":7}}
//! ```
//!
//! Fields appear in the order shown. Numbers are decimal text that parses back
//! to the identical `f64`. Blank lines are not allowed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lion_core::data::{Dataset, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATASET_FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format_version: u64,
    pub state_dim: usize,
    pub action_dim: usize,
    pub n_trajectories: usize,
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> std::io::Result<()> {
    let header = DatasetHeader {
        format_version: DATASET_FORMAT_VERSION,
        state_dim: dataset.state_dim,
        action_dim: dataset.action_dim,
        n_trajectories: dataset.trajectories.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for t in &dataset.trajectories {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

fn parse<T: for<'de> Deserialize<'de>>(line: &str, n: usize) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: n,
        message: format!("column {}: {e}", e.column()),
    })
}

fn check_dims(t: &Trajectory, header: &DatasetHeader, line: usize) -> Result<()> {
    for tr in &t.transitions {
        for (field, found, expected) in [
            ("state", tr.state.len(), header.state_dim),
            ("next_state", tr.next_state.len(), header.state_dim),
            ("action", tr.action.len(), header.action_dim),
        ] {
            if found != expected {
                return Err(Error::DatasetDimension {
                    line,
                    field: field.into(),
                    expected,
                    found,
                });
            }
        }
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Dataset> {
    let mut lines = input.lines().enumerate();
    let read = |r: std::io::Result<String>, n: usize| {
        r.map_err(|e| Error::Parse {
            line: n,
            message: e.to_string(),
        })
    };
    let (i, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file; expected a header record".into(),
    })?;
    let raw: serde_json::Value = parse(&read(first, i + 1)?, 1)?;
    let version = raw.get("format_version").and_then(|v| v.as_u64()).ok_or(Error::Parse {
        line: 1,
        message: "header record lacks an integer format_version".into(),
    })?;
    if version != DATASET_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            what: "dataset",
            found: version,
            supported: DATASET_FORMAT_VERSION,
        });
    }
    let header: DatasetHeader = serde_json::from_value(raw).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let mut trajectories = Vec::with_capacity(header.n_trajectories);
    for (i, line) in lines {
        let n = i + 1;
        let t: Trajectory = parse(&read(line, n)?, n)?;
        check_dims(&t, &header, n)?;
        trajectories.push(t);
    }
    if trajectories.len() != header.n_trajectories {
        return Err(Error::Parse {
            line: trajectories.len() + 1,
            message: format!("header declares {} trajectories, file has {}", header.n_trajectories, trajectories.len()),
        });
    }
    let dataset = Dataset {
        state_dim: header.state_dim,
        action_dim: header.action_dim,
        trajectories,
    };
    dataset.validate()?;
    Ok(dataset)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file))
}
