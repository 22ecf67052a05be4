use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format::{file_sha256, read_json, to_canonical_bytes};
use crate::error::{CarpetError, Result};
use crate::planner::ConstructionPlan;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// What a build was asked for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    /// Present when the rules came from the exponent planner.
    pub construction: Option<ConstructionPlan>,
    pub rule_seq: Vec<String>,
}

/// Index of a run directory: the plan, the levels built and the SHA-256 of
/// every emitted file. Wall times live in a separate unhashed file so that
/// identical plans give byte-identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub files: BTreeMap<String, String>,
    pub levels: u32,
    pub plan: PlanRecord,
    pub seed: u64,
    pub tool_version: String,
}

impl RunManifest {
    /// Canonical bytes: re-encoding through a JSON value sorts every key,
    /// including those of nested plan structs.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        to_canonical_bytes(&serde_json::to_value(self)?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(MANIFEST_FILE), self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        read_json(&dir.join(MANIFEST_FILE))
    }

    /// Loads the manifest of `dir` and checks every listed file against its
    /// hash before anything else reads it.
    pub fn load_verified(dir: &Path) -> Result<Self> {
        let m = Self::read(dir)?;
        for (name, hash) in &m.files {
            let actual = file_sha256(&dir.join(name))?;
            if &actual != hash {
                return Err(CarpetError::HashMismatch(name.clone()));
            }
        }
        Ok(m)
    }
}

/// Per-level wall times in milliseconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: Vec<u64>,
    pub verify_ms: Vec<u64>,
}

pub fn graph_file(k: u32) -> String {
    format!("level_{k}.graph.json")
}

pub fn ledger_file(k: u32) -> String {
    format!("level_{k}.ledger.json")
}

pub fn drawing_file(k: u32) -> String {
    format!("level_{k}.drawing.json")
}

pub const PROFILE_FILE: &str = "profile.csv";
