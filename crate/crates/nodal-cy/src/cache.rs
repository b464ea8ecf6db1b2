//! On-disk cache of the group, node and divisor tables, keyed by a SHA-256 content hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::divisor_lattice::Family;
use crate::model::Model;
use crate::{Error, Result};

pub const CACHE_FILE: &str = "group.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupArtifact {
    pub version: u32,
    pub group_order: usize,
    pub h_order: usize,
    pub node_count: usize,
    pub stabilizer_order: usize,
    pub ruling_group_order: usize,
    pub divisor_orbits: [usize; 3],
    /// Canonical serialization of every group element, in id order.
    pub elements: Vec<String>,
    pub h_elements: Vec<u32>,
    pub nodes: Vec<Vec<[String; 4]>>,
    /// Node permutation of each group generator.
    pub generator_node_perms: Vec<Vec<usize>>,
}

impl GroupArtifact {
    pub fn from_model(m: &Model) -> GroupArtifact {
        let gen_ids: Vec<u32> = m.group.generators().iter().map(|g| m.group.id_of(g).expect("generator")).collect();
        GroupArtifact {
            version: FORMAT_VERSION,
            group_order: m.group.order(),
            h_order: m.h.order(),
            node_count: m.nodes.nodes.len(),
            stabilizer_order: m.nodes.stabilizer.order(),
            ruling_group_order: m.nodes.ruling_group.order(),
            divisor_orbits: Family::ALL.map(|f| m.divisors.family_members(f).len()),
            elements: m.group.elements().iter().map(|e| e.serialize()).collect(),
            h_elements: m.h.elements.clone(),
            nodes: m.nodes.nodes.iter().map(|n| n.point.to_strings()).collect(),
            generator_node_perms: gen_ids
                .iter()
                .map(|&g| (0..m.nodes.nodes.len()).map(|a| m.nodes.image(g, a)).collect())
                .collect(),
        }
    }

    pub fn content_hash(&self) -> String {
        content_hash(&serde_json::to_vec(self).expect("serializable"))
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    hash: String,
    artifact: GroupArtifact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Built,
    Loaded,
    Rebuilt(String),
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Cache {
        Cache { dir: dir.as_ref().to_path_buf() }
    }

    pub fn path(&self) -> PathBuf {
        self.dir.join(CACHE_FILE)
    }

    fn read(&self) -> std::result::Result<GroupArtifact, String> {
        let bytes = fs::read(self.path()).map_err(|e| e.to_string())?;
        let env: Envelope = serde_json::from_slice(&bytes).map_err(|e| format!("unreadable cache: {e}"))?;
        if env.artifact.version != FORMAT_VERSION {
            return Err(format!("cache format {} is stale", env.artifact.version));
        }
        let hash = env.artifact.content_hash();
        if hash != env.hash {
            return Err(format!("content hash mismatch ({} stored, {hash} computed)", env.hash));
        }
        Ok(env.artifact)
    }

    pub fn write(&self, artifact: &GroupArtifact) -> Result<String> {
        fs::create_dir_all(&self.dir)?;
        let hash = artifact.content_hash();
        let env = Envelope { hash: hash.clone(), artifact: artifact.clone() };
        let bytes = serde_json::to_vec(&env).map_err(|e| Error::Consistency(e.to_string()))?;
        let tmp = self.dir.join(format!("{CACHE_FILE}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, self.path())?;
        Ok(hash)
    }

    /// Loads the cached artifact, or builds and stores it when missing or corrupt.
    pub fn load_or_build(
        &self,
        build: impl FnOnce() -> Result<GroupArtifact>,
    ) -> Result<(GroupArtifact, CacheStatus)> {
        let existed = self.path().exists();
        match self.read() {
            Ok(a) => Ok((a, CacheStatus::Loaded)),
            Err(reason) => {
                let artifact = build()?;
                self.write(&artifact)?;
                let status = if existed { CacheStatus::Rebuilt(reason) } else { CacheStatus::Built };
                Ok((artifact, status))
            }
        }
    }
}
