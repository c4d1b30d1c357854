//! Search checkpoints: `{"version", "checksum", "state"}` where the checksum
//! is the SHA-256 of the exact `state` bytes.

use std::path::Path;

use serde::Deserialize;
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use tsvnet_core::optimizer::search::CHECKPOINT_VERSION;
use tsvnet_core::optimizer::SearchState;

use crate::error::{CliError, CliResult};
use crate::io;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Deserialize)]
struct Envelope<'a> {
    version: u32,
    checksum: String,
    #[serde(borrow)]
    state: &'a RawValue,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn encode(state: &SearchState) -> CliResult<String> {
    let body = serde_json::to_string(state).map_err(|e| CliError::failed(format!("checkpoint serialization: {e}")))?;
    Ok(format!("{{\"version\":{CHECKPOINT_VERSION},\"checksum\":\"{}\",\"state\":{body}}}\n", digest(body.as_bytes())))
}

pub fn decode(text: &str) -> CliResult<SearchState> {
    let corrupt = |why: String| CliError::invalid(format!("checkpoint is corrupt: {why}"));
    let env: Envelope = serde_json::from_str(text.trim_end()).map_err(|e| corrupt(e.to_string()))?;
    if env.version != CHECKPOINT_VERSION {
        return Err(CliError::invalid(format!("checkpoint version {} is not {CHECKPOINT_VERSION}", env.version)));
    }
    let actual = digest(env.state.get().as_bytes());
    if actual != env.checksum {
        return Err(corrupt(format!("checksum {actual} does not match recorded {}", env.checksum)));
    }
    serde_json::from_str(env.state.get()).map_err(|e| corrupt(e.to_string()))
}

pub fn save(path: &Path, state: &SearchState) -> CliResult<()> {
    io::write_atomic(path, encode(state)?.as_bytes())
}

pub fn load(path: &Path) -> CliResult<SearchState> {
    decode(&io::read_text(path)?).map_err(|e| e.context(path.display()))
}
