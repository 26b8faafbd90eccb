//! Versioned binary checkpoints shared by every trained artifact.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 8 | magic `LIONCKPT` |
//! | 8 | 4 | `u32` format_version (currently 1) |
//! | 12 | 4 | `u32` header length `h` in bytes |
//! | 16 | h | UTF-8 JSON [`Header`] |
//! | 16 + h | 8·n | `f64` parameters, networks concatenated in header order |
//!
//! `n` is the sum of the block sizes in every network's `layout`. Trailing bytes
//! are rejected.

use std::fs;
use std::path::Path;

use lion_core::data::NormStats;
use lion_core::diffcore::{NetworkSpec, ParamBlock, ParamVector};
use lion_core::evalsuite::{Critic, RvsPolicy};
use lion_core::lion::{Conditioning, LionPolicy};
use lion_core::models::{Aggregation, BehaviorNet, DynamicsEnsemble, DynamicsMember};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"LIONCKPT";
pub const FORMAT_VERSION: u32 = 1;
const PREFIX: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Behavior,
    Ensemble,
    Policy,
    ReturnConditioned,
    Td3bc,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Behavior => "behavior",
            ArtifactKind::Ensemble => "ensemble",
            ArtifactKind::Policy => "policy",
            ArtifactKind::ReturnConditioned => "return_conditioned",
            ArtifactKind::Td3bc => "td3bc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkEntry {
    pub name: String,
    pub spec: NetworkSpec,
    pub layout: Vec<ParamBlock>,
}

impl NetworkEntry {
    pub fn param_count(&self) -> usize {
        self.layout.iter().map(ParamBlock::len).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: ArtifactKind,
    pub networks: Vec<NetworkEntry>,
    pub norm: Option<NormStats>,
    /// Kind-specific fields needed to rebuild the artifact.
    pub structure: Value,
    /// Free-form provenance supplied by the writer (config, seeds, command).
    #[serde(default)]
    pub meta: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: Header,
    pub params: Vec<ParamVector>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let n: usize = self.params.iter().map(ParamVector::len).sum();
        let mut out = Vec::with_capacity(PREFIX + header.len() + 8 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for p in &self.params {
            for v in &p.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, body) = parse_header(bytes)?;
        let expected: usize = header.networks.iter().map(NetworkEntry::param_count).sum::<usize>() * 8;
        if body.len() < expected {
            return Err(Error::Truncated {
                expected: bytes.len() - body.len() + expected,
                found: bytes.len(),
            });
        }
        if body.len() > expected {
            return Err(Error::Header(format!("{} trailing bytes after parameters", body.len() - expected)));
        }
        let mut floats = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut params = Vec::with_capacity(header.networks.len());
        for net in &header.networks {
            if net.layout != net.spec.layout() {
                return Err(Error::Header(format!("network '{}': layout does not match its spec", net.name)));
            }
            let p = ParamVector {
                values: floats.by_ref().take(net.param_count()).collect(),
                layout: net.layout.clone(),
            };
            p.validate()?;
            params.push(p);
        }
        Ok(Self { header, params })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    fn network(&self, name: &str) -> Result<(&NetworkSpec, &ParamVector)> {
        self.header
            .networks
            .iter()
            .zip(&self.params)
            .find(|(n, _)| n.name == name)
            .map(|(n, p)| (&n.spec, p))
            .ok_or_else(|| Error::Header(format!("missing network '{name}'")))
    }

    fn norm(&self) -> Result<NormStats> {
        self.header.norm.clone().ok_or_else(|| Error::Header("missing normalization statistics".into()))
    }

    fn structure<T: for<'de> Deserialize<'de>>(&self, field: &str) -> Result<T> {
        let v = self.header.structure.get(field).cloned().unwrap_or(Value::Null);
        serde_json::from_value(v).map_err(|e| Error::Header(format!("structure.{field}: {e}")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<(Header, &[u8])> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < PREFIX {
        return Err(Error::Truncated { expected: PREFIX, found: bytes.len() });
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            what: "checkpoint",
            found: version.into(),
            supported: FORMAT_VERSION.into(),
        });
    }
    let len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if bytes.len() < PREFIX + len {
        return Err(Error::Truncated {
            expected: PREFIX + len,
            found: bytes.len(),
        });
    }
    let header: Header = serde_json::from_slice(&bytes[PREFIX..PREFIX + len]).map_err(|e| Error::Header(e.to_string()))?;
    Ok((header, &bytes[PREFIX + len..]))
}

/// Reads only the prefix and header of a checkpoint file.
pub fn read_header(path: &Path) -> Result<Header> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_header(&bytes).map(|(h, _)| h)
}

fn entry(name: impl Into<String>, spec: &NetworkSpec, params: &ParamVector) -> NetworkEntry {
    NetworkEntry {
        name: name.into(),
        spec: spec.clone(),
        layout: params.layout.clone(),
    }
}

/// A trained object with a checkpoint representation.
pub trait Artifact: Sized {
    const KIND: ArtifactKind;

    fn to_checkpoint(&self, meta: Value) -> Checkpoint;
    fn from_parts(ckpt: &Checkpoint) -> Result<Self>;

    fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.header.kind != Self::KIND {
            return Err(Error::KindMismatch {
                expected: Self::KIND.name().into(),
                found: ckpt.header.kind.name().into(),
            });
        }
        Self::from_parts(ckpt)
    }

    fn save(&self, path: &Path, meta: Value) -> Result<()> {
        self.to_checkpoint(meta).save(path)
    }

    fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

impl Artifact for BehaviorNet {
    const KIND: ArtifactKind = ArtifactKind::Behavior;

    fn to_checkpoint(&self, meta: Value) -> Checkpoint {
        Checkpoint {
            header: Header {
                kind: Self::KIND,
                networks: vec![entry("behavior", &self.spec, &self.params)],
                norm: Some(self.norm.clone()),
                structure: json!({}),
                meta,
            },
            params: vec![self.params.clone()],
        }
    }

    fn from_parts(ckpt: &Checkpoint) -> Result<Self> {
        let (spec, params) = ckpt.network("behavior")?;
        Ok(BehaviorNet {
            spec: spec.clone(),
            params: params.clone(),
            norm: ckpt.norm()?,
        })
    }
}

impl Artifact for DynamicsEnsemble {
    const KIND: ArtifactKind = ArtifactKind::Ensemble;

    fn to_checkpoint(&self, meta: Value) -> Checkpoint {
        Checkpoint {
            header: Header {
                kind: Self::KIND,
                networks: self
                    .members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| entry(format!("member{i}"), &m.spec, &m.params))
                    .collect(),
                norm: Some(self.norm.clone()),
                structure: json!({
                    "mode": self.mode,
                    "action_dim": self.action_dim,
                    "history_len": self.history_len,
                    "pred_window": self.pred_window,
                }),
                meta,
            },
            params: self.members.iter().map(|m| m.params.clone()).collect(),
        }
    }

    fn from_parts(ckpt: &Checkpoint) -> Result<Self> {
        let members = ckpt
            .header
            .networks
            .iter()
            .zip(&ckpt.params)
            .map(|(n, p)| DynamicsMember {
                spec: n.spec.clone(),
                params: p.clone(),
            })
            .collect();
        let mode: Aggregation = ckpt.structure("mode")?;
        let ensemble = DynamicsEnsemble::new(members, mode, ckpt.norm()?, ckpt.structure("action_dim")?)?;
        Ok(ensemble.with_recurrence(ckpt.structure("history_len")?, ckpt.structure("pred_window")?))
    }
}

impl Artifact for LionPolicy {
    const KIND: ArtifactKind = ArtifactKind::Policy;

    fn to_checkpoint(&self, meta: Value) -> Checkpoint {
        Checkpoint {
            header: Header {
                kind: Self::KIND,
                networks: vec![entry("policy", &self.spec, &self.params)],
                norm: Some(self.norm.clone()),
                structure: json!({ "conditioning": self.conditioning }),
                meta,
            },
            params: vec![self.params.clone()],
        }
    }

    fn from_parts(ckpt: &Checkpoint) -> Result<Self> {
        let (spec, params) = ckpt.network("policy")?;
        let policy = LionPolicy {
            spec: spec.clone(),
            params: params.clone(),
            norm: ckpt.norm()?,
            conditioning: ckpt.structure::<Conditioning>("conditioning")?,
        };
        let extra = usize::from(policy.is_conditioned());
        if spec.input_dim != policy.state_dim() + extra {
            return Err(Error::Header("policy input does not match its normalization statistics".into()));
        }
        Ok(policy)
    }
}

impl Artifact for RvsPolicy {
    const KIND: ArtifactKind = ArtifactKind::ReturnConditioned;

    fn to_checkpoint(&self, meta: Value) -> Checkpoint {
        Checkpoint {
            header: Header {
                kind: Self::KIND,
                networks: vec![entry("policy", &self.spec, &self.params)],
                norm: Some(self.norm.clone()),
                structure: json!({ "rtg_min": self.rtg_min, "rtg_max": self.rtg_max }),
                meta,
            },
            params: vec![self.params.clone()],
        }
    }

    fn from_parts(ckpt: &Checkpoint) -> Result<Self> {
        let (spec, params) = ckpt.network("policy")?;
        Ok(RvsPolicy {
            spec: spec.clone(),
            params: params.clone(),
            norm: ckpt.norm()?,
            rtg_min: ckpt.structure("rtg_min")?,
            rtg_max: ckpt.structure("rtg_max")?,
        })
    }
}

/// λ-TD3+BC actor with its twin critics.
#[derive(Clone, Debug, PartialEq)]
pub struct Td3bcModel {
    pub policy: LionPolicy,
    pub critics: [Critic; 2],
}

impl Artifact for Td3bcModel {
    const KIND: ArtifactKind = ArtifactKind::Td3bc;

    fn to_checkpoint(&self, meta: Value) -> Checkpoint {
        let p = &self.policy;
        let [c1, c2] = &self.critics;
        Checkpoint {
            header: Header {
                kind: Self::KIND,
                networks: vec![
                    entry("policy", &p.spec, &p.params),
                    entry("critic1", &c1.spec, &c1.params),
                    entry("critic2", &c2.spec, &c2.params),
                ],
                norm: Some(p.norm.clone()),
                structure: json!({ "conditioning": p.conditioning }),
                meta,
            },
            params: vec![p.params.clone(), c1.params.clone(), c2.params.clone()],
        }
    }

    fn from_parts(ckpt: &Checkpoint) -> Result<Self> {
        let policy = LionPolicy::from_parts(ckpt)?;
        let critic = |name: &str| {
            ckpt.network(name).map(|(spec, params)| Critic {
                spec: spec.clone(),
                params: params.clone(),
            })
        };
        Ok(Self {
            policy,
            critics: [critic("critic1")?, critic("critic2")?],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lion_core::diffcore::OutputActivation;
    use lion_core::rng::seeded;

    fn norm() -> NormStats {
        NormStats {
            state_mean: vec![0.1, -0.3],
            state_std: vec![1.7, 0.9],
            reward_min: 0.0,
            reward_max: 0.0707,
            floored_dims: vec![],
        }
    }

    fn policy() -> LionPolicy {
        LionPolicy::init(&norm(), 2, &[8, 8], Conditioning::Input, &mut seeded(3))
    }

    #[test]
    fn policy_round_trips_exactly() {
        let p = policy();
        let meta = json!({ "seed": 7, "note": "x" });
        let ckpt = p.to_checkpoint(meta.clone());
        let back = Checkpoint::from_bytes(&ckpt.to_bytes()).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(LionPolicy::from_checkpoint(&back).unwrap(), p);
        assert_eq!(back.header.meta, meta);
    }

    #[test]
    fn byte_layout_matches_documentation() {
        let bytes = policy().to_checkpoint(Value::Null).to_bytes();
        assert_eq!(&bytes[..8], b"LIONCKPT");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        let h = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let n = policy().params.len();
        assert_eq!(bytes.len(), 16 + h + 8 * n);
        let first = f64::from_le_bytes(bytes[16 + h..24 + h].try_into().unwrap());
        assert_eq!(first, policy().params.values[0]);
    }

    #[test]
    fn rejects_bad_magic_version_and_truncation() {
        let bytes = policy().to_checkpoint(Value::Null).to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bad), Err(Error::BadMagic)));
        let mut bumped = bytes.clone();
        bumped[8] = 2;
        let err = Checkpoint::from_bytes(&bumped).unwrap_err();
        assert!(matches!(err, Error::UnsupportedVersion { found: 2, .. }));
        assert!(err.to_string().contains("format_version 2"));
        assert!(matches!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]), Err(Error::Truncated { .. })));
        assert!(matches!(Checkpoint::from_bytes(&bytes[..12]), Err(Error::Truncated { .. })));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(Checkpoint::from_bytes(&extra), Err(Error::Header(_))));
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let ckpt = policy().to_checkpoint(Value::Null);
        let err = BehaviorNet::from_checkpoint(&ckpt).unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }));
    }

    #[test]
    fn behavior_and_rvs_round_trip() {
        let spec = NetworkSpec::mlp(2, &[5], 2, OutputActivation::Identity);
        let b = BehaviorNet {
            params: spec.init(&mut seeded(1)),
            spec: spec.clone(),
            norm: norm(),
        };
        let back = BehaviorNet::from_checkpoint(&Checkpoint::from_bytes(&b.to_checkpoint(Value::Null).to_bytes()).unwrap());
        assert_eq!(back.unwrap(), b);
        let rspec = NetworkSpec::mlp(3, &[4], 2, OutputActivation::Tanh);
        let r = RvsPolicy {
            params: rspec.init(&mut seeded(2)),
            spec: rspec,
            norm: norm(),
            rtg_min: -0.25,
            rtg_max: 1.0 / 3.0,
        };
        let back = RvsPolicy::from_checkpoint(&Checkpoint::from_bytes(&r.to_checkpoint(Value::Null).to_bytes()).unwrap());
        assert_eq!(back.unwrap(), r);
    }

    #[test]
    fn ensemble_round_trips_with_recurrence() {
        let spec = NetworkSpec::recurrent(4, 3, &[5], 3);
        let members = (0..3)
            .map(|i| DynamicsMember {
                params: spec.init(&mut seeded(i)),
                spec: spec.clone(),
            })
            .collect();
        let e = DynamicsEnsemble::new(members, Aggregation::Mean, norm(), 2).unwrap().with_recurrence(10, 5);
        let back = DynamicsEnsemble::from_checkpoint(&Checkpoint::from_bytes(&e.to_checkpoint(Value::Null).to_bytes()).unwrap());
        assert_eq!(back.unwrap(), e);
    }
}
