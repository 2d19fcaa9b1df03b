use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{IntegratorSettings, ScenarioConfig};
use crate::engine::Table;
use crate::error::HarnessError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub name: String,
    pub config_hash: String,
    pub code_version: String,
    pub config_file: String,
    pub files: Vec<String>,
    pub integrator: IntegratorSettings,
    pub time_unit: String,
    pub entanglement_unit: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text of one table: a `#` comment line with units and hash, the
/// header, then rows ending in the config hash.
pub fn render_csv(table: &Table, hash: &str) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = table.header.clone();
    header.push("config_hash".into());
    w.write_record(&header).map_err(csv_err)?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        rec.push(hash.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| HarnessError::Runtime(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(format!(
        "# measure={} time_unit=1/gamma entanglement_unit=nats config_hash={hash}\n{body}",
        table.measure
    ))
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Runtime(format!("csv: {e}"))
}

/// Renders every file in memory and only then writes them, so a failed
/// run leaves no output behind.
pub fn write_outputs(cfg: &ScenarioConfig, tables: &[Table], out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let hash = cfg.hash();
    let mut files: Vec<(String, String)> = Vec::new();
    for t in tables {
        files.push((format!("{}_{}.csv", cfg.name, t.measure), render_csv(t, &hash)?));
    }
    let config_file = format!("{}.config.toml", cfg.name);
    let meta = Metadata {
        name: cfg.name.clone(),
        config_hash: hash,
        code_version: CODE_VERSION.into(),
        config_file: config_file.clone(),
        files: files.iter().map(|(n, _)| n.clone()).collect(),
        integrator: cfg.integrator.clone(),
        time_unit: "1/gamma".into(),
        entanglement_unit: "nats".into(),
        scale: cfg.scale.clone(),
    };
    files.push((config_file, cfg.to_toml()));
    files.push((
        format!("{}.metadata.json", cfg.name),
        serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n",
    ));
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = out.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
