//! Touchstone version 1 (`.sNp`) export and import.
//!
//! Files are written with `# HZ S RI R <z>`; the comment header lists every
//! port with its signal index, layout cell and side. Two-port data follows
//! the format's `S11 S21 S12 S22` order; larger files are written row by
//! row with at most four pairs per line.

use std::fmt::Write as _;

use tsvnet_core::em::{SParameterBlock, Side};
use tsvnet_core::linalg::CMat;
use tsvnet_core::{TsvLayout, C64};

use crate::error::{CliError, CliResult};

pub fn file_name(stem: &str, ports: usize) -> String {
    format!("{stem}.s{ports}p")
}

pub fn write_touchstone(s: &SParameterBlock, layout: Option<&TsvLayout>) -> String {
    let n = s.port_count();
    let mut out = String::new();
    let _ = writeln!(out, "! tsvnet S-parameters, {n} ports, {} frequencies", s.frequencies.len());
    let _ = writeln!(out, "! port order: top ports by ascending signal cell, then bottom ports in the same order");
    for (k, p) in s.ports.iter().enumerate() {
        let side = match p.side {
            Side::Top => "top",
            Side::Bottom => "bottom",
        };
        match layout {
            Some(l) => {
                let (r, c) = l.position(p.cell);
                let _ = writeln!(out, "! port {}: signal {} cell {} (row {r}, col {c}) {side}", k + 1, p.signal, p.cell);
            }
            None => {
                let _ = writeln!(out, "! port {}: signal {} cell {} {side}", k + 1, p.signal, p.cell);
            }
        }
    }
    let _ = writeln!(out, "# HZ S RI R {}", s.z_ref);
    for (f, m) in s.frequencies.points().iter().zip(&s.data) {
        let _ = write!(out, "{f:e}");
        if n == 2 {
            for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let _ = write!(out, " {:e} {:e}", m[(i, j)].re, m[(i, j)].im);
            }
            out.push('\n');
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                if j > 0 && j % 4 == 0 {
                    out.push('\n');
                }
                let _ = write!(out, " {:e} {:e}", m[(i, j)].re, m[(i, j)].im);
            }
            out.push('\n');
        }
    }
    out
}

/// Parsed network data in the file's frequencies (converted to Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct Touchstone {
    pub frequencies_hz: Vec<f64>,
    pub z_ref: f64,
    pub data: Vec<CMat>,
}

fn bad(msg: impl std::fmt::Display) -> CliError {
    CliError::invalid(format!("touchstone: {msg}"))
}

/// Reads S-parameter data for `ports` ports. Accepts any frequency unit and
/// the RI, MA and DB formats.
pub fn parse_touchstone(text: &str, ports: usize) -> CliResult<Touchstone> {
    if ports == 0 {
        return Err(bad("port count must be positive"));
    }
    let mut scale = 1e9;
    let mut format = "MA".to_string();
    let mut z_ref = 50.0;
    let mut seen_options = false;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(opts) = line.strip_prefix('#') {
            if seen_options {
                continue;
            }
            seen_options = true;
            let toks: Vec<String> = opts.split_whitespace().map(|t| t.to_ascii_uppercase()).collect();
            let mut it = toks.iter();
            while let Some(t) = it.next() {
                match t.as_str() {
                    "HZ" => scale = 1.0,
                    "KHZ" => scale = 1e3,
                    "MHZ" => scale = 1e6,
                    "GHZ" => scale = 1e9,
                    "S" => {}
                    "Y" | "Z" | "H" | "G" => return Err(bad(format!("only S parameters are supported, found {t}"))),
                    "RI" | "MA" | "DB" => format = t.clone(),
                    "R" => {
                        z_ref = it
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("missing reference resistance after R"))?;
                    }
                    other => return Err(bad(format!("unknown option {other}"))),
                }
            }
            continue;
        }
        for tok in line.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| bad(format!("not a number: {tok}")))?);
        }
    }
    let per_record = 1 + 2 * ports * ports;
    if values.is_empty() || values.len() % per_record != 0 {
        return Err(bad(format!("{} values do not form records of {per_record} for {ports} ports", values.len())));
    }
    let mut frequencies_hz = Vec::new();
    let mut data = Vec::new();
    for rec in values.chunks(per_record) {
        frequencies_hz.push(rec[0] * scale);
        let pair = |k: usize| -> C64 {
            let (a, b) = (rec[1 + 2 * k], rec[2 + 2 * k]);
            match format.as_str() {
                "RI" => C64::new(a, b),
                "MA" => C64::from_polar(a, b.to_radians()),
                _ => C64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
            }
        };
        let m = if ports == 2 {
            let v = [pair(0), pair(1), pair(2), pair(3)];
            CMat::from_fn(2, 2, |i, j| v[i + 2 * j])
        } else {
            CMat::from_fn(ports, ports, |i, j| pair(i * ports + j))
        };
        data.push(m);
    }
    Ok(Touchstone { frequencies_hz, z_ref, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsvnet_core::em::solve_sweep;
    use tsvnet_core::{FrequencyGrid, GeometryMaterials};

    fn round_trip(layout: &TsvLayout) {
        let grid = FrequencyGrid::linear(1e9, 100e9, 7).unwrap();
        let s = solve_sweep(layout, &GeometryMaterials::default(), &grid).unwrap();
        let text = write_touchstone(&s, Some(layout));
        let t = parse_touchstone(&text, s.port_count()).unwrap();
        assert_eq!(t.frequencies_hz, grid.points());
        assert_eq!(t.z_ref, 50.0);
        assert_eq!(t.data, s.data);
    }

    #[test]
    fn two_port_round_trip_is_exact() {
        round_trip(&TsvLayout::build(1, 2, &[0], &[1]).unwrap());
    }

    #[test]
    fn multi_port_round_trip_is_exact() {
        round_trip(&TsvLayout::build(3, 3, &[0, 2, 4], &[1, 3, 5, 6, 7, 8]).unwrap());
    }

    #[test]
    fn two_port_order_and_units() {
        let text = "! x\n# GHz S MA R 50\n1 0.5 0 0.1 90 0.2 0 0.4 180\n";
        let t = parse_touchstone(text, 2).unwrap();
        assert_eq!(t.frequencies_hz, [1e9]);
        let m = &t.data[0];
        assert!((m[(1, 0)] - C64::new(0.0, 0.1)).norm() < 1e-15);
        assert!((m[(0, 1)] - C64::new(0.2, 0.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - C64::new(-0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn header_names_ports() {
        let l = TsvLayout::build(1, 3, &[0, 2], &[1]).unwrap();
        let s = solve_sweep(&l, &GeometryMaterials::default(), &FrequencyGrid::single(1e9).unwrap()).unwrap();
        let text = write_touchstone(&s, Some(&l));
        assert!(text.contains("! port 1: signal 0 cell 0 (row 0, col 0) top"));
        assert!(text.contains("! port 4: signal 1 cell 2 (row 0, col 2) bottom"));
        assert_eq!(file_name("layout", 4), "layout.s4p");
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse_touchstone("# HZ S RI R 50\n1 2 3\n", 2).is_err());
        assert!(parse_touchstone("# HZ Y RI R 50\n1 0 0\n", 1).is_err());
        assert!(parse_touchstone("# HZ S RI R 50\n1 x 0\n", 1).is_err());
    }
}
