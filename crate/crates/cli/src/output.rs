use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::runspec::RunSpec;
use crate::{CliError, Report, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SVG_SIZE: f64 = 640.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

/// What every artifact records about the run that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub spec_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(spec: &RunSpec) -> Self {
        Provenance {
            tool: "qcc",
            version: VERSION,
            command: spec.command.to_string(),
            spec_sha256: spec.sha256(),
            seed: spec.seed,
        }
    }
}

pub fn render(report: &Report, format: Format, prov: &Provenance) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let doc = json!({ "artifact": prov, "status": report.status, "result": report.result });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| CliError::invalid(format!("{} has no CSV output", prov.command)))?;
            render_csv(table, prov)
        }
        Format::Svg => {
            let body = report
                .svg
                .as_ref()
                .ok_or_else(|| CliError::invalid(format!("{} has no SVG output", prov.command)))?;
            Ok(format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" \
                 viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\">\n<metadata>{}</metadata>\n{body}</svg>\n",
                serde_json::to_string(prov)?
            ))
        }
    }
}

fn render_csv(table: &Table, prov: &Provenance) -> Result<String, CliError> {
    let mut out = format!(
        "# tool={} version={} command={} spec_sha256={} seed={}\n",
        prov.tool, prov.version, prov.command, prov.spec_sha256, prov.seed
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::invalid(format!("csv: {e}"));
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::invalid(format!("csv: {e}")))?;
    out.push_str(std::str::from_utf8(&bytes).expect("utf-8 input"));
    Ok(out)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Renders in the requested format and writes to the output path or stdout.
/// SVG written to a file gets a sibling CSV of the same table.
pub fn emit(spec: &RunSpec, report: &Report) -> Result<(), CliError> {
    let prov = Provenance::of(spec);
    let format = spec.format();
    let text = render(report, format, &prov)?;
    match spec.path() {
        Some(path) => {
            write_atomic(path, &text)?;
            if format == Format::Svg && report.table.is_some() {
                write_atomic(&path.with_extension("csv"), &render(report, Format::Csv, &prov)?)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(())
}

pub fn cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Shortest round-trip decimal.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}
