//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [model]
//! type = cavity_open
//! h = 0.02
//! cap_strength = 0.8
//!
//! [sweep]
//! epsilon_range = 0.10:0.23:0.005
//! ```

use std::path::PathBuf;

use super::IoError;
use crate::entropy::{EntropyConfig, SpectrumSource, DEFAULT_ALPHAS, DEFAULT_BINS, DEFAULT_K_MAX};
use crate::linalg::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::models::CavitySpec;
use crate::sweep::{AnalysisConfig, Field, ModelSpec, ParamGrid, SweepConfig};
use crate::circstats::DEFAULT_NODE_CUTOFF;

const SECTIONS: [&str; 4] = ["model", "sweep", "analysis", "output"];

const KEYS: [(&str, &[&str]); 4] = [
    ("model", &["type", "g", "gamma", "mean_radius", "h", "cap_strength", "cap_width", "k_target"]),
    ("sweep", &["delta_range", "epsilon_range", "values", "modes", "tol", "max_iter"]),
    ("analysis", &["n_bins", "k_max", "alphas", "node_cutoff", "spectrum_source", "delta_nu_st"]),
    ("output", &["dir", "csv", "svg", "plot_left", "plot_right", "timestamp"]),
];

/// Where and how results are written.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: String,
    /// SVG file name; no plot is drawn when absent.
    pub svg: Option<String>,
    pub plot_left: Vec<Field>,
    pub plot_right: Vec<Field>,
    pub timestamp: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: "sweep.csv".into(),
            svg: None,
            plot_left: vec![Field::Petermann],
            plot_right: vec![Field::SFolded],
            timestamp: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

struct Entry {
    section: String,
    key: String,
    value: String,
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(" #").or_else(|| line.find("\t#")).unwrap_or(line.len());
    let line = &line[..cut];
    if line.trim_start().starts_with('#') || line.trim_start().starts_with(';') {
        ""
    } else {
        line
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && (v.starts_with('"') && v.ends_with('"') || v.starts_with('\'') && v.ends_with('\'')) {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn known_key(section: &str, key: &str) -> bool {
    KEYS.iter().any(|(s, ks)| *s == section && ks.contains(&key))
}

fn lex(text: &str) -> Result<Vec<Entry>, IoError> {
    let mut section: Option<String> = None;
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| IoError::Parse { line: line_no, message: "unterminated section header".into() })?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(IoError::Parse { line: line_no, message: format!("unknown section [{name}]") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| IoError::Parse { line: line_no, message: "expected `key = value`".into() })?;
        let sec = section
            .clone()
            .ok_or_else(|| IoError::Parse { line: line_no, message: "key outside of any section".into() })?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(IoError::Parse { line: line_no, message: "empty key".into() });
        }
        if !known_key(&sec, &key) {
            return Err(IoError::UnknownKey { key: format!("{sec}.{key}"), line: Some(line_no) });
        }
        if out.iter().any(|e| e.section == sec && e.key == key) {
            return Err(IoError::Parse { line: line_no, message: format!("duplicate key {sec}.{key}") });
        }
        out.push(Entry { section: sec, key, value: unquote(v).to_string() });
    }
    Ok(out)
}

struct Table(Vec<Entry>);

impl Table {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.0.iter().find(|e| e.section == section && e.key == key).map(|e| e.value.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, IoError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse::<T>().map_err(|_| invalid(key, &format!("cannot parse `{v}`"))),
        }
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64, IoError> {
        let v = self.parse(section, key, default)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(key, "must be positive"));
        }
        Ok(v)
    }
}

fn invalid(field: &str, message: &str) -> IoError {
    IoError::Validation { field: field.to_string(), message: message.to_string() }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, IoError> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(key, &format!("cannot parse `{}`", t.trim()))))
        .collect()
}

/// `start:stop:step`.
pub fn parse_range(key: &str, v: &str) -> Result<ParamGrid, IoError> {
    let parts = v.split(':').map(str::trim).collect::<Vec<_>>();
    if parts.len() != 3 {
        return Err(invalid(key, "expected start:stop:step"));
    }
    let nums = parts
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| invalid(key, &format!("cannot parse `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid(key, "step must be positive"));
    }
    if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(invalid(key, "stop must not be below start"));
    }
    Ok(ParamGrid::Range { start, stop, step })
}

fn parse_fields(key: &str, v: &str) -> Result<Vec<Field>, IoError> {
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| Field::parse(t).ok_or_else(|| invalid(key, &format!("unknown field `{t}`"))))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, IoError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(key, &format!("expected true or false, got `{v}`"))),
    }
}

fn build(t: &Table) -> Result<RunConfig, IoError> {
    let kind = t.get("model", "type").ok_or_else(|| invalid("type", "model type is required"))?;
    let is_cavity = match kind {
        "two_level" => false,
        "cavity_closed" | "cavity_open" => true,
        other => return Err(invalid("type", &format!("unknown model `{other}`"))),
    };
    let param_key = if is_cavity { "epsilon_range" } else { "delta_range" };
    let wrong_key = if is_cavity { "delta_range" } else { "epsilon_range" };
    if t.get("sweep", wrong_key).is_some() {
        return Err(invalid(wrong_key, &format!("not a parameter of the {kind} model")));
    }
    let cavity_only = ["mean_radius", "h", "cap_strength", "cap_width", "k_target"];
    for k in cavity_only.iter().filter(|_| !is_cavity).chain(["g", "gamma"].iter().filter(|_| is_cavity)) {
        if t.get("model", k).is_some() {
            return Err(invalid(k, &format!("not a parameter of the {kind} model")));
        }
    }
    if kind == "cavity_closed" && (t.get("model", "cap_strength").is_some() || t.get("model", "cap_width").is_some()) {
        return Err(invalid("cap_strength", "closed cavities have no absorbing strip"));
    }

    let model = if is_cavity {
        let mean_radius = t.positive("model", "mean_radius", 1.0)?;
        let h = t.positive("model", "h", 0.02)?;
        let template = if kind == "cavity_open" {
            let strength: f64 = t.parse("model", "cap_strength", 1.0)?;
            if !(strength >= 0.0) || !strength.is_finite() {
                return Err(invalid("cap_strength", "must be non-negative"));
            }
            let width = t.positive("model", "cap_width", 0.2 * mean_radius)?;
            CavitySpec::open(0.0, mean_radius, h, strength, width)
        } else {
            CavitySpec::closed(0.0, mean_radius, h)
        };
        ModelSpec::Cavity { template, k_target: t.positive("model", "k_target", 2.4)? }
    } else {
        let g = t.positive("model", "g", 1.0)?;
        let gamma: f64 = t.parse("model", "gamma", 2.0)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", "must be non-negative"));
        }
        ModelSpec::TwoLevel { g, gamma }
    };

    let grid = match (t.get("sweep", param_key), t.get("sweep", "values")) {
        (Some(_), Some(_)) => return Err(invalid("values", &format!("give either {param_key} or values"))),
        (Some(r), None) => parse_range(param_key, r)?,
        (None, Some(v)) => {
            let list = parse_list("values", v)?;
            if list.is_empty() || list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("values", "must be strictly increasing"));
            }
            ParamGrid::List(list)
        }
        (None, None) if is_cavity => ParamGrid::Range { start: 0.10, stop: 0.23, step: 0.005 },
        (None, None) => ParamGrid::Range { start: -1.0, stop: 1.0, step: 0.01 },
    };
    let modes: i64 = t.parse("sweep", "modes", 2)?;
    if modes < 1 {
        return Err(invalid("modes", "must be at least 1"));
    }
    let tol = t.positive("sweep", "tol", DEFAULT_TOL)?;
    let max_iter: i64 = t.parse("sweep", "max_iter", DEFAULT_MAX_ITER as i64)?;
    if max_iter < 1 {
        return Err(invalid("max_iter", "must be at least 1"));
    }

    let n_bins: i64 = t.parse("analysis", "n_bins", DEFAULT_BINS as i64)?;
    if n_bins < 2 {
        return Err(invalid("n_bins", "must be at least 2"));
    }
    let k_max: i64 = t.parse("analysis", "k_max", DEFAULT_K_MAX as i64)?;
    if k_max < 1 {
        return Err(invalid("k_max", "must be at least 1"));
    }
    let alphas = match t.get("analysis", "alphas") {
        None => DEFAULT_ALPHAS.to_vec(),
        Some(v) => parse_list("alphas", v)?,
    };
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(invalid("alphas", "orders must be positive"));
    }
    let node_cutoff = t.parse("analysis", "node_cutoff", DEFAULT_NODE_CUTOFF)?;
    if !(0.0..1.0).contains(&node_cutoff) {
        return Err(invalid("node_cutoff", "must lie in [0, 1)"));
    }
    let spectrum_source = match t.get("analysis", "spectrum_source") {
        None => SpectrumSource::Sample,
        Some(v) => SpectrumSource::parse(v).ok_or_else(|| invalid("spectrum_source", "expected sample or binned"))?,
    };
    let delta_nu_st = match t.get("analysis", "delta_nu_st") {
        None => None,
        Some(_) => Some(t.positive("analysis", "delta_nu_st", 1.0)?),
    };

    let mut output = OutputConfig::default();
    if let Some(d) = t.get("output", "dir") {
        output.dir = PathBuf::from(d);
    }
    if let Some(c) = t.get("output", "csv") {
        output.csv = c.to_string();
    }
    output.svg = t.get("output", "svg").map(str::to_string);
    if let Some(v) = t.get("output", "plot_left") {
        output.plot_left = parse_fields("plot_left", v)?;
    }
    if let Some(v) = t.get("output", "plot_right") {
        output.plot_right = parse_fields("plot_right", v)?;
    }
    if let Some(v) = t.get("output", "timestamp") {
        output.timestamp = parse_bool("timestamp", v)?;
    }

    let sweep = SweepConfig {
        grid,
        model,
        analysis: AnalysisConfig {
            entropy: EntropyConfig {
                n_bins: n_bins as usize,
                k_max: k_max as usize,
                alphas,
                spectrum_source,
            },
            node_cutoff,
            delta_nu_st,
        },
        modes: modes as usize,
        tol,
        max_iter: max_iter as usize,
    };
    sweep.validate().map_err(|e| invalid("sweep", &e.to_string()))?;
    Ok(RunConfig { sweep, output })
}

/// Parses and validates a configuration, applying defaults for every
/// omitted key.
pub fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    parse_config_with_overrides(text, &[])
}

/// As [`parse_config`], with `section.key=value` overrides applied on top.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, IoError> {
    let mut entries = lex(text)?;
    for o in overrides {
        let (path, value) = o
            .split_once('=')
            .ok_or_else(|| IoError::Validation { field: o.clone(), message: "override must be section.key=value".into() })?;
        let (sec, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| IoError::Validation { field: o.clone(), message: "override must be section.key=value".into() })?;
        if !known_key(sec, key) {
            return Err(IoError::UnknownKey { key: format!("{sec}.{key}"), line: None });
        }
        entries.retain(|e| !(e.section == sec && e.key == key));
        entries.push(Entry { section: sec.into(), key: key.into(), value: unquote(value).into() });
    }
    build(&Table(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CavityVariant;

    #[test]
    fn defaults_applied() {
        let c = parse_config("[model]\ntype = two_level\n[sweep]\n[analysis]\n[output]\n").unwrap();
        let a = &c.sweep.analysis;
        assert_eq!(a.entropy.n_bins, 720);
        assert_eq!(a.entropy.k_max, 50);
        assert_eq!(a.entropy.alphas, vec![1.0, 1.5, 2.0]);
        assert_eq!(a.node_cutoff, 1e-12);
        assert_eq!(c.sweep.model, ModelSpec::TwoLevel { g: 1.0, gamma: 2.0 });
        assert_eq!(c.sweep.modes, 2);
        assert!(c.output.timestamp);
    }

    #[test]
    fn negative_bins_name_the_field() {
        let e = parse_config("[model]\ntype = two_level\n[analysis]\nn_bins = -3\n").unwrap_err();
        assert!(matches!(e, IoError::Validation { ref field, .. } if field == "n_bins"), "{e:?}");
    }

    #[test]
    fn epsilon_range_grid() {
        let c = parse_config("[model]\ntype = cavity_closed\n[sweep]\nepsilon_range = 0.10:0.23:0.005\n").unwrap();
        assert_eq!(c.sweep.grid.values().len(), 27);
    }

    #[test]
    fn open_cavity_keys() {
        let text = "[model]\ntype = cavity_open # lossy\nh = 0.05\ncap_strength = 0.8\ncap_width = 0.25\nk_target = 7\n\
                    [sweep]\nvalues = 0.1, 0.2\nmodes = 3\n";
        let c = parse_config(text).unwrap();
        match c.sweep.model {
            ModelSpec::Cavity { template, k_target } => {
                assert_eq!(template.h, 0.05);
                assert_eq!(template.variant, CavityVariant::Open { cap_strength: 0.8, cap_width: 0.25 });
                assert_eq!(k_target, 7.0);
            }
            _ => panic!("expected a cavity"),
        }
        assert_eq!(c.sweep.grid, ParamGrid::List(vec![0.1, 0.2]));
        assert_eq!(c.sweep.modes, 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config("[model]\ntype = two_level\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, IoError::UnknownKey { ref key, line: Some(3) } if key == "model.bogus"), "{e:?}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        for (text, line) in [
            ("[model]\ntype = two_level\nnot a pair\n", 3),
            ("type = two_level\n", 1),
            ("[model\n", 1),
            ("[model]\ntype = two_level\n[extra]\n", 3),
            ("[model]\ntype = two_level\ntype = cavity_open\n", 3),
        ] {
            match parse_config(text) {
                Err(IoError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn validation_errors() {
        for (text, field) in [
            ("[sweep]\n", "type"),
            ("[model]\ntype = two_level\n[sweep]\ndelta_range = 1:0:0.1\n", "delta_range"),
            ("[model]\ntype = two_level\n[sweep]\ndelta_range = 0:1:0\n", "delta_range"),
            ("[model]\ntype = two_level\n[sweep]\nmodes = 0\n", "modes"),
            ("[model]\ntype = two_level\n[sweep]\nvalues = 0.2, 0.1\n", "values"),
            ("[model]\ntype = two_level\nh = 0.1\n", "h"),
            ("[model]\ntype = cavity_closed\ncap_strength = 1\n", "cap_strength"),
            ("[model]\ntype = two_level\n[analysis]\nalphas = 1, -2\n", "alphas"),
            ("[model]\ntype = two_level\n[analysis]\nspectrum_source = fft\n", "spectrum_source"),
            ("[model]\ntype = two_level\n[output]\nplot_left = nope\n", "plot_left"),
            ("[model]\ntype = two_level\n[output]\ntimestamp = maybe\n", "timestamp"),
        ] {
            match parse_config(text) {
                Err(IoError::Validation { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn overrides_replace_values() {
        let text = "[model]\ntype = two_level\n[analysis]\nn_bins = 100\n";
        let c = parse_config_with_overrides(text, &["analysis.n_bins=360".into(), "output.timestamp=false".into()])
            .unwrap();
        assert_eq!(c.sweep.analysis.entropy.n_bins, 360);
        assert!(!c.output.timestamp);
        assert!(matches!(
            parse_config_with_overrides(text, &["analysis.bins=3".into()]),
            Err(IoError::UnknownKey { .. })
        ));
    }
}
