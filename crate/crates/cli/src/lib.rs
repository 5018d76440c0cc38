//! Command-line front end: config ingestion, protocol dispatch, and
//! deterministic result/curve emission.

pub mod config;
pub mod runner;

use std::path::{Path, PathBuf};

use qubench_core::{Error, Result};

pub use config::{apply_overrides, parse_config, ProtocolId, RunConfig};
pub use runner::{run, RunOutput, TOOLKIT_VERSION};

/// Resolve the output directory: `--out`, else `QUBENCH_OUT_DIR`, else the
/// current directory.
pub fn output_dir(cli_out: Option<&Path>) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("QUBENCH_OUT_DIR") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from(".")
}

/// Load a config file, apply overrides, and parse it; the returned echo is
/// the exact document (post-override) that was executed.
pub fn load_config(
    path: &Path,
    overrides: &[(String, String)],
    seed: Option<u64>,
    shots: Option<u64>,
) -> Result<(RunConfig, serde_json::Value)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let mut doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("{} is not valid JSON: {e}", path.display())))?;
    apply_overrides(&mut doc, overrides)?;
    if let Some(s) = seed {
        apply_overrides(&mut doc, &[("seed".into(), s.to_string())])?;
    }
    if let Some(s) = shots {
        apply_overrides(&mut doc, &[("shots".into(), s.to_string())])?;
    }
    let config = parse_config(doc.clone())?;
    Ok((config, doc))
}

/// Execute a run and write the results JSON plus one CSV per curve.
/// Returns (exit code, results path).
pub fn execute_and_write(
    config: &RunConfig,
    echo: serde_json::Value,
    out_dir: &Path,
) -> Result<(i32, PathBuf)> {
    let output = runner::run(config, echo)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::InvalidParameter(format!("cannot create {}: {e}", out_dir.display())))?;
    let name = config.protocol.name();
    let results_path = out_dir.join(format!("{name}_results.json"));
    write_results(&output.document, &results_path)?;
    write_curves(&output.document, out_dir)?;
    for (file_name, content) in &output.extra_files {
        let path = out_dir.join(file_name);
        std::fs::write(&path, content).map_err(|e| {
            Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
        })?;
    }
    Ok((output.exit_code, results_path))
}

pub fn write_results(doc: &qubench_core::io::ResultsDocument, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Emit one CSV per curve, named `<protocol>_<label>.csv`.
pub fn write_curves(doc: &qubench_core::io::ResultsDocument, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for curve in &doc.curves {
        let path = out_dir.join(format!("{}_{}.csv", doc.protocol, sanitize(&curve.label)));
        std::fs::write(&path, qubench_core::io::curve_csv(curve))
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Re-emit plot CSVs from an existing results JSON.
pub fn emit_plotdata(results_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(results_path).map_err(|e| {
        Error::InvalidParameter(format!("cannot read {}: {e}", results_path.display()))
    })?;
    let doc: qubench_core::io::ResultsDocument = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("malformed results file: {e}")))?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::InvalidParameter(format!("cannot create {}: {e}", out_dir.display())))?;
    write_curves(&doc, out_dir)
}

/// Cap the rayon worker pool (call once, before any parallel work).
pub fn set_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}
