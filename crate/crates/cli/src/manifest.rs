//! Run manifests and output plumbing.
//!
//! Every output file embeds (JSON) or sits next to (CSV) a manifest recording
//! the command, the digests of its input files, the seeds, the tolerances,
//! and the tool version. Reruns with identical manifests and inputs must
//! reproduce output bytes exactly, so wall-clock time is reported on stderr
//! only and never written into an output file.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use bellows_core::rng::fnv1a;
use serde::{Deserialize, Serialize};

/// Version tag embedded in every JSON output and every manifest.
pub const SCHEMA: &str = "bellows/1";

/// A named input file and the FNV-1a digest of its bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub fnv64: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            tolerances: BTreeMap::new(),
            inputs: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_tol(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    /// Records `path` with the digest of `bytes` (the caller has already read
    /// the file, so the digested bytes are exactly the parsed ones).
    pub fn with_input(mut self, path: &Path, bytes: &[u8]) -> Self {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            fnv64: format!("{:016x}", fnv1a(bytes)),
        });
        self
    }
}

/// Pretty-prints `value` with a trailing newline to `out`, or to stdout when
/// no path was given. Field order follows the struct, so bytes are stable.
pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// Writes a text (CSV) output plus its sibling `<path>.manifest.json`.
pub fn write_text_with_manifest(path: &Path, text: &str, manifest: &RunManifest) -> io::Result<()> {
    fs::write(path, text)?;
    let mut sibling = path.as_os_str().to_owned();
    sibling.push(".manifest.json");
    write_json(Some(Path::new(&sibling)), manifest)
}
