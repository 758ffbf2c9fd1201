//! Config files, flag overrides, run manifests and output files.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Keys a config file may carry besides the command's own settings.
const EXTRA_KEYS: &[&str] = &["suite"];

/// Settings after overlaying flags on the config file, with the canonical
/// JSON they were read from.
pub struct Resolved<T> {
    pub settings: T,
    pub canonical: Value,
    pub seed: u64,
}

/// Reads `config` (if any), overlays every flag that was given and
/// deserializes the result. A config file must set `seed`; flag-only runs
/// default to seed 0.
pub fn resolve<T>(flags: &T, config: Option<&Path>) -> CliResult<Resolved<T>>
where
    T: Serialize + DeserializeOwned + Default,
{
    let known = match serde_json::to_value(T::default())? {
        Value::Object(m) => m,
        _ => unreachable!("settings serialize as objects"),
    };
    let mut merged = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
            let Value::Object(map) = value else {
                return Err(CliError::Usage(format!("config {} is not a JSON object", path.display())));
            };
            if let Some(key) = map.keys().find(|k| !known.contains_key(*k) && !EXTRA_KEYS.contains(&k.as_str())) {
                return Err(CliError::Usage(format!("config {}: unknown key `{key}`", path.display())));
            }
            if map.get("seed").is_none_or(Value::is_null) {
                return Err(CliError::Usage(format!("config {}: `seed` is mandatory", path.display())));
            }
            map
        }
        None => Map::new(),
    };
    if let Value::Object(overrides) = serde_json::to_value(flags)? {
        for (k, v) in overrides {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    merged.retain(|_, v| !v.is_null());
    let canonical = Value::Object(merged);
    let settings: T = serde_json::from_value(canonical.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = canonical.get("seed").and_then(Value::as_u64).unwrap_or(0);
    Ok(Resolved {
        settings,
        canonical,
        seed,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the resolved settings, serialized with sorted keys and
    /// without the output path.
    pub config_hash: String,
    pub config: Value,
    pub outputs: Vec<String>,
    pub status: String,
}

impl Manifest {
    pub fn new(command: &str, canonical: &Value, seed: u64) -> Self {
        let mut hashed = canonical.clone();
        if let Value::Object(m) = &mut hashed {
            m.remove("out");
        }
        let text = serde_json::to_string(&hashed).expect("JSON value serializes");
        Manifest {
            tool: "spectop".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: spectop_core::VERSION.into(),
            command: command.into(),
            seed,
            config_hash: sha256_hex(text.as_bytes()),
            config: hashed,
            outputs: Vec::new(),
            status: String::new(),
        }
    }
}

/// What a command produced.
pub struct Report {
    /// CSV or JSON text.
    pub body: String,
    /// The violating instance, serialized for replay.
    pub violation: Option<Value>,
}

impl Report {
    pub fn pass(body: String) -> Self {
        Report { body, violation: None }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes the report, its violation file (if any) and the manifest. With no
/// output path the body goes to stdout and the manifest to stderr. Returns
/// whether a violation was found.
pub fn emit(report: Report, mut manifest: Manifest, out: Option<&Path>) -> CliResult<bool> {
    let violated = report.violation.is_some();
    manifest.status = if violated { "violation" } else { "pass" }.into();
    match out {
        Some(path) => {
            write(path, &report.body)?;
            manifest.outputs.push(file_name(path));
            if let Some(v) = &report.violation {
                let vpath = sibling(path, ".violation.json");
                write(&vpath, &to_json(v))?;
                manifest.outputs.push(file_name(&vpath));
                eprintln!("violation written to {}", vpath.display());
            }
            write(&sibling(path, ".manifest.json"), &to_json(&manifest))?;
        }
        None => {
            print!("{}", report.body);
            if let Some(v) = &report.violation {
                eprint!("violation: {}", to_json(v));
            }
            eprint!("{}", to_json(&manifest));
        }
    }
    Ok(violated)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, Default, Debug, PartialEq)]
    #[serde(default)]
    struct Toy {
        seed: Option<u64>,
        n: Option<usize>,
        out: Option<String>,
    }

    #[test]
    fn flags_only_default_seed_zero() {
        let r = resolve(&Toy { n: Some(5), ..Toy::default() }, None).unwrap();
        assert_eq!(r.seed, 0);
        assert_eq!(r.canonical, serde_json::json!({"n": 5}));
    }

    #[test]
    fn hash_ignores_output_path_and_key_order() {
        let a = serde_json::json!({"n": 5, "seed": 1, "out": "a.csv"});
        let b = serde_json::json!({"seed": 1, "n": 5, "out": "elsewhere/b.csv"});
        assert_eq!(Manifest::new("x", &a, 1).config_hash, Manifest::new("x", &b, 1).config_hash);
        let c = serde_json::json!({"n": 6, "seed": 1});
        assert_ne!(Manifest::new("x", &a, 1).config_hash, Manifest::new("x", &c, 1).config_hash);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sibling_appends_suffix() {
        assert_eq!(sibling(Path::new("d/r.csv"), ".manifest.json"), Path::new("d/r.csv.manifest.json"));
    }
}
