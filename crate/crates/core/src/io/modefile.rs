//! Portable text files holding a single mode.
//!
//! ```text
//! EPMODE 1
//! provenance: cavity_open
//! parameter: 2.0000000000000001e-1
//! eigenvalue: 6.9580000000000002e0 -1.2e-2
//! ...
//!
//! 0 -9.7999999999999998e-1 0e0 1.2e-3 -4.5e-4
//! ```
//!
//! Data rows are `index x y Re(psi) Im(psi)`. Cavity grids are rebuilt from
//! the header, so the coordinates are checked rather than trusted.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use super::IoError;
use crate::linalg::{ComplexVector, C64};
use crate::models::{build_ellipse_grid, CavitySpec, CavityVariant, Mode, Provenance, Support};

pub const MODE_FILE_MAGIC: &str = "EPMODE 1";

/// A mode together with the sweep parameter it was solved at.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFile {
    pub parameter: f64,
    pub mode: Mode,
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// The file text of `m`.
pub fn render_mode_file(m: &ModeFile) -> String {
    let mode = &m.mode;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
    kv("provenance", mode.provenance.as_str().into());
    kv("parameter", f(m.parameter));
    kv("eigenvalue", format!("{} {}", f(mode.eigen_k.re), f(mode.eigen_k.im)));
    kv("degenerate", if mode.degenerate { "1" } else { "0" }.into());
    if let Support::Grid(g) = &mode.support {
        let s = &g.spec;
        kv("epsilon", f(s.epsilon));
        kv("mean_radius", f(s.mean_radius));
        kv("h", f(s.h));
        if let CavityVariant::Open { cap_strength, cap_width } = s.variant {
            kv("cap_strength", f(cap_strength));
            kv("cap_width", f(cap_width));
        }
        kv("nx", g.nx.to_string());
        kv("ny", g.ny.to_string());
    }
    kv("points", mode.len().to_string());
    let mut text = format!("{MODE_FILE_MAGIC}\n{out}\n");
    for (p, z) in mode.values.as_slice().iter().enumerate() {
        let (x, y) = match &mode.support {
            Support::Grid(g) => g.coords[p],
            Support::TwoLevel => (0.0, 0.0),
        };
        text.push_str(&format!("{p} {} {} {} {}\n", f(x), f(y), f(z.re), f(z.im)));
    }
    text
}

pub fn write_mode_file(m: &ModeFile, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, render_mode_file(m)).map_err(|e| IoError::io(path, e))
}

pub fn read_mode_file(path: &Path) -> Result<ModeFile, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_mode_file(&text, path)
}

const HEADER_KEYS: [&str; 11] = [
    "provenance",
    "parameter",
    "eigenvalue",
    "degenerate",
    "epsilon",
    "mean_radius",
    "h",
    "cap_strength",
    "cap_width",
    "nx",
    "ny",
];

/// Parses file text; `path` only labels errors.
pub fn parse_mode_file(text: &str, path: &Path) -> Result<ModeFile, IoError> {
    let err = |line: usize, message: String| IoError::Format { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim_end() == MODE_FILE_MAGIC => {}
        _ => return Err(err(1, format!("expected `{MODE_FILE_MAGIC}`"))),
    }
    let mut header: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (n, line) in lines.by_ref() {
        if line.trim().is_empty() {
            break;
        }
        let (k, v) = line.split_once(':').ok_or_else(|| err(n, "expected `key: value`".into()))?;
        let k = k.trim();
        if k != "points" && !HEADER_KEYS.contains(&k) {
            return Err(err(n, format!("unknown header key {k}")));
        }
        if header.insert(k, (n, v.trim())).is_some() {
            return Err(err(n, format!("duplicate header key {k}")));
        }
    }
    let req = |k: &str| header.get(k).copied().ok_or_else(|| err(0, format!("missing header key {k}")));
    let num = |k: &str| -> Result<f64, IoError> {
        let (n, v) = req(k)?;
        v.parse::<f64>().map_err(|_| err(n, format!("{k}: cannot parse `{v}`")))
    };
    let count = |k: &str| -> Result<usize, IoError> {
        let (n, v) = req(k)?;
        v.parse::<usize>().map_err(|_| err(n, format!("{k}: cannot parse `{v}`")))
    };

    let (pn, pv) = req("provenance")?;
    let provenance = Provenance::parse(pv).ok_or_else(|| err(pn, format!("unknown provenance `{pv}`")))?;
    let parameter = num("parameter")?;
    let (en, ev) = req("eigenvalue")?;
    let parts: Vec<f64> = ev
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| err(en, format!("eigenvalue: cannot parse `{t}`"))))
        .collect::<Result<_, _>>()?;
    if parts.len() != 2 {
        return Err(err(en, "eigenvalue needs real and imaginary parts".into()));
    }
    let degenerate = match req("degenerate")? {
        (_, "0") => false,
        (_, "1") => true,
        (n, v) => return Err(err(n, format!("degenerate: expected 0 or 1, got `{v}`"))),
    };
    let points = count("points")?;

    let support = match provenance {
        Provenance::TwoLevel => Support::TwoLevel,
        Provenance::CavityClosed | Provenance::CavityOpen => {
            let (eps, r, h) = (num("epsilon")?, num("mean_radius")?, num("h")?);
            let spec = if provenance == Provenance::CavityOpen {
                CavitySpec::open(eps, r, h, num("cap_strength")?, num("cap_width")?)
            } else {
                CavitySpec::closed(eps, r, h)
            };
            let g = build_ellipse_grid(&spec).map_err(|e| err(0, format!("cannot rebuild grid: {e}")))?;
            if g.nx != count("nx")? || g.ny != count("ny")? || g.n_interior() != points {
                return Err(err(0, "grid dimensions do not match the cavity header".into()));
            }
            Support::Grid(Arc::new(g))
        }
    };

    let mut values = vec![C64::default(); points];
    let mut seen = vec![false; points];
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 5 {
            return Err(err(n, format!("expected 5 columns, found {}", t.len())));
        }
        let p: usize = t[0].parse().map_err(|_| err(n, format!("bad index `{}`", t[0])))?;
        if p >= points || seen[p] {
            return Err(err(n, format!("index {p} out of range or repeated")));
        }
        let v: Vec<f64> = t[1..]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| err(n, format!("cannot parse `{s}`"))))
            .collect::<Result<_, _>>()?;
        if let Support::Grid(g) = &support {
            let (x, y) = g.coords[p];
            if (x - v[0]).abs() > 1e-9 * g.h || (y - v[1]).abs() > 1e-9 * g.h {
                return Err(err(n, format!("coordinates of point {p} do not match the grid")));
            }
        }
        values[p] = C64::new(v[2], v[3]);
        seen[p] = true;
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(err(0, format!("no row for point {p}")));
    }
    let values = ComplexVector::new(values).map_err(|e| err(0, e.to_string()))?;
    Ok(ModeFile {
        parameter,
        mode: Mode { support, values, eigen_k: C64::new(parts[0], parts[1]), provenance, degenerate },
    })
}
