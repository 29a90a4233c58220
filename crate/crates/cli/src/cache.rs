//! On-disk cache of enumerated levels `S_0, ..., S_k` of a polar space.
//!
//! Each entry is a directory holding `manifest.json` and one little-endian
//! `u16` file per level. The manifest records the tool version, a hash of the
//! field modulus and a SHA-256 digest of every level file; any mismatch makes
//! the entry unusable.

use std::fs;
use std::path::{Path, PathBuf};

use polargrass::{Budget, Elem, PolarModel, SpaceDescriptor, SubspaceTable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Bumped whenever the on-disk layout or the enumeration order changes.
pub const CACHE_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub k: usize,
    pub count: usize,
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool_version: String,
    pub descriptor: String,
    pub field: String,
    pub modulus: Vec<u32>,
    pub modulus_sha256: String,
    pub dim: usize,
    pub levels: Vec<LevelEntry>,
}

pub fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

pub fn modulus_hash(modulus: &[u32]) -> String {
    let text: Vec<String> = modulus.iter().map(u32::to_string).collect();
    hex::encode(Sha256::digest(text.join(",").as_bytes()))
}

fn entry_dir(root: &Path, descriptor: &str) -> PathBuf {
    let h = hex::encode(Sha256::digest(descriptor.as_bytes()));
    root.join(&h[..16])
}

fn encode(data: &[Elem]) -> Vec<u8> {
    data.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn decode(bytes: &[u8]) -> Vec<Elem> {
    bytes.chunks_exact(2).map(|c| Elem::from_le_bytes([c[0], c[1]])).collect()
}

/// Writes every level the model has enumerated so far.
pub fn store(root: &Path, model: &PolarModel) -> Result<PathBuf, CliError> {
    let dir = entry_dir(root, model.descriptor());
    fs::create_dir_all(&dir)?;
    let field = model.field();
    let mut levels = Vec::new();
    for k in 1..=model.levels_built() {
        let table = model.level(k)?;
        let bytes = encode(table.raw());
        let file = format!("level-{k}.bin");
        fs::write(dir.join(&file), &bytes)?;
        levels.push(LevelEntry {
            k,
            count: table.len(),
            file,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        schema: CACHE_SCHEMA,
        tool_version: tool_version(),
        descriptor: model.descriptor().to_string(),
        field: field.descriptor(),
        modulus: field.modulus().to_vec(),
        modulus_sha256: modulus_hash(field.modulus()),
        dim: model.dim(),
        levels,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Cache(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text)?;
    Ok(dir)
}

/// Loads a cached model, or `None` when no entry exists for the descriptor.
/// Entries that exist but fail a check are refused with an error.
pub fn load(root: &Path, descriptor: &str, budget: Budget) -> Result<Option<PolarModel>, CliError> {
    let desc: SpaceDescriptor = descriptor.parse()?;
    let canonical = desc.to_string();
    let dir = entry_dir(root, &canonical);
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Ok(None);
    }
    let rebuild = format!("remove {} or run `polargrass build --space \"{canonical}\" --rebuild`", dir.display());
    let text = fs::read_to_string(&manifest_path)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::Cache(format!("unreadable manifest ({e}); {rebuild}")))?;
    if manifest.schema != CACHE_SCHEMA || manifest.tool_version != tool_version() {
        return Err(CliError::Cache(format!(
            "stale entry written by version {} (schema {}); {rebuild}",
            manifest.tool_version, manifest.schema
        )));
    }
    let field = desc.field()?;
    if manifest.descriptor != canonical
        || manifest.modulus != field.modulus()
        || manifest.modulus_sha256 != modulus_hash(field.modulus())
    {
        return Err(CliError::Cache(format!("entry does not match {canonical} and its modulus; {rebuild}")));
    }
    let form = desc.form()?;
    let mut tables = vec![SubspaceTable::from_sorted(manifest.dim, 0, Vec::new(), 1)];
    for (i, entry) in manifest.levels.iter().enumerate() {
        let bytes = fs::read(dir.join(&entry.file))
            .map_err(|e| CliError::Cache(format!("missing level file {} ({e}); {rebuild}", entry.file)))?;
        if entry.k != i + 1
            || hex::encode(Sha256::digest(&bytes)) != entry.sha256
            || bytes.len() != 2 * entry.count * entry.k * manifest.dim
        {
            return Err(CliError::Cache(format!("level file {} is corrupted; {rebuild}", entry.file)));
        }
        tables.push(SubspaceTable::from_sorted(manifest.dim, entry.k, decode(&bytes), entry.count));
    }
    Ok(Some(PolarModel::from_levels(form, canonical, budget, tables)?))
}
