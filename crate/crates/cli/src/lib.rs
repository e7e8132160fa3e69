//! Library side of the `mbqc` command-line tool.

pub mod commands;
pub mod config;
pub mod parse;

use std::path::Path;

use mbqc_core::Result;

pub use commands::{execute, Artifacts};
pub use config::{CommandName, ExperimentConfig};

/// Write the artifacts. With several files the output path is a prefix:
/// the main report goes to `<prefix>.json` and each extra file to
/// `<prefix><suffix>`. Without a path the main report goes to stdout.
pub fn emit(art: &Artifacts, out: Option<&str>) -> Result<()> {
    match out {
        None => {
            print!("{}", art.main);
            Ok(())
        }
        Some(path) if art.files.is_empty() => write(Path::new(path), &art.main),
        Some(prefix) => {
            write(Path::new(&format!("{prefix}.json")), &art.main)?;
            for (suffix, text) in &art.files {
                write(Path::new(&format!("{prefix}{suffix}")), text)?;
            }
            Ok(())
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
