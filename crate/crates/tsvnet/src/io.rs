//! File helpers shared by the commands. Every output goes through one
//! writer and is formatted deterministically.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use tsvnet_core::thermal::TemperatureField;
use tsvnet_core::{Role, TsvLayout};

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn read_layout(path: &Path) -> CliResult<TsvLayout> {
    read_json(path)
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::failed(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary sibling and renames it into place, so a
/// killed run never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents).map_err(|e| CliError::write(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| CliError::write(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

/// Rows top to bottom separated by `/`: `S` signal, `G` ground, `.` empty.
pub fn layout_string(layout: &TsvLayout) -> String {
    let mut s = String::with_capacity(layout.cell_count() + layout.rows());
    for r in 0..layout.rows() {
        if r > 0 {
            s.push('/');
        }
        for c in 0..layout.cols() {
            s.push(match layout.role(layout.index(r, c)) {
                Role::Signal => 'S',
                Role::Ground => 'G',
                Role::Empty => '.',
            });
        }
    }
    s
}

/// Structured-grid CSV, x fastest, positions in µm from the block corner.
pub fn temperature_csv(field: &TemperatureField) -> String {
    let mut out = String::from("x_um,y_um,z_um,T_K\n");
    let g = field.grid;
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y, z) = field.position_um(i, j, k);
                let _ = writeln!(out, "{x},{y},{z},{}", field.at(i, j, k));
            }
        }
    }
    out
}
