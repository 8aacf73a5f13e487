//! Deterministic artifact writers. CSV uses '.' decimals with 17 significant
//! digits; JSON is pretty-printed with sorted structural order fixed by the
//! writing code. Every file carries the config hash and artifact version.

use std::fs;
use std::io::Write;
use std::path::Path;

/// FNV-1a over the raw config bytes; hex-encoded in provenance lines.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_hash: String,
    pub artifact_version: String,
    /// Cost mode of the invocation, stamped on every artifact.
    pub mode: String,
}

impl Provenance {
    pub fn from_config_bytes(bytes: &[u8], mode: &str) -> Self {
        Self {
            config_hash: format!("{:016x}", fnv1a64(bytes)),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
        }
    }
}

/// 17 significant digits, locale-free scientific notation.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV artifact: provenance comment, header, then rows.
pub fn write_csv(
    path: &Path,
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    let mut buf = String::new();
    buf.push_str(&format!(
        "# config_hash={} artifact_version={} mode={}\n",
        prov.config_hash, prov.artifact_version, prov.mode
    ));
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}

/// Write a JSON artifact with provenance fields injected at the top level.
pub fn write_json(path: &Path, prov: &Provenance, value: serde_json::Value) -> std::io::Result<()> {
    let mut value = value;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert(
            "config_hash".into(),
            serde_json::Value::String(prov.config_hash.clone()),
        );
        map.insert(
            "artifact_version".into(),
            serde_json::Value::String(prov.artifact_version.clone()),
        );
        map.insert("mode".into(), serde_json::Value::String(prov.mode.clone()));
    }
    let mut buf = serde_json::to_string_pretty(&value).expect("json serialization");
    buf.push('\n');
    atomic_write(path, buf.as_bytes())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
