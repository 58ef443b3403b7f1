//! Output assembly: every command produces one document that is written
//! to stdout or atomically to `--out`.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use fstest::Table;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut s = table.to_json();
            s.push('\n');
            s
        }
    }
}

/// Writes to a temporary file beside `path` and renames it into place, so
/// a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(contents: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Output(format!("stdout: {e}")))
        }
    }
}
