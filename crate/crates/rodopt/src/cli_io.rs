//! Configuration text format, named experiment presets, history CSV,
//! field snapshots in legacy ASCII VTK, and the summary table.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::{FlowConfig, FlowState, HistoryRow};
use crate::mesh::Mesh;

/// Shared base of all experiments: unit disk of radius 0.7, circular
/// initial condition of radius 0.5 (stiff-phase fraction (5/7)^2), soft
/// phase at 10% stiffness.
fn base_config() -> FlowConfig {
    let eps = 0.003;
    FlowConfig {
        sigma1: 0.0,
        sigma2: 0.0,
        sigma3: 0.0,
        gamma: 0.5,
        eps,
        tau: 0.1 * eps * eps * eps,
        c: 0.1,
        mu_norm: 26.0,
        lambda_norm: 70.57,
        m1: 25.0 / 49.0,
        radius: 0.7,
        inner_radius: 0.5,
        init_ellipticity: 0.0,
        target_elements: 20_000,
        max_steps: 0,
        stat_tol: 1e-6,
        theta1: None,
    }
}

/// Named experiment (a)-(g). (a) is the bare initial condition; the others
/// differ only in the objective weights and the perimeter factor.
pub fn preset(name: &str) -> Result<FlowConfig> {
    let mut cfg = base_config();
    let (s1, s3, gamma, steps) = match name {
        "a" => (0.0, 0.0, 0.5, 0usize),
        "b" => (-1.0, -3.0, 0.5, 100_000),
        "c" => (0.0, 3.0, 0.5, 100_000),
        "d" => (-3.0, 3.0, 1.0, 100_000),
        "e" => (-3.0, 3.0, 0.25, 100_000),
        "f" => (1.5, 3.0, 0.5, 100_000),
        "g" => (1.5, 3.0, 0.25, 100_000),
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (expected a through g)"
            )))
        }
    };
    cfg.sigma1 = s1;
    cfg.sigma2 = 0.0;
    cfg.sigma3 = s3;
    cfg.gamma = gamma;
    cfg.max_steps = steps;
    Ok(cfg)
}

pub const PRESET_NAMES: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64> {
    value.parse().map_err(|_| {
        Error::Config(format!("line {line}: invalid number '{value}' for key '{key}'"))
    })
}

fn parse_usize(key: &str, value: &str, line: usize) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::Config(format!("line {line}: invalid count '{value}' for key '{key}'"))
    })
}

/// Parse the flat `key = value` configuration text. A `preset` key expands
/// first; every other key overrides the expanded value. Commas separate
/// pairs within a line; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<FlowConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for chunk in line.split(',') {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            let (key, value) = chunk.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got '{chunk}'", lineno + 1))
            })?;
            pairs.push((lineno + 1, key.trim().to_string(), value.trim().to_string()));
        }
    }
    let mut cfg = base_config();
    for (line, _key, value) in pairs.iter().filter(|(_, k, _)| k == "preset") {
        if pairs.iter().filter(|(_, k, _)| k == "preset").count() > 1 {
            return Err(Error::Config(format!("line {line}: duplicate preset key")));
        }
        cfg = preset(value)?;
    }
    for (line, key, value) in &pairs {
        let line = *line;
        match key.as_str() {
            "preset" => {}
            "sigma1" => cfg.sigma1 = parse_f64(key, value, line)?,
            "sigma2" => cfg.sigma2 = parse_f64(key, value, line)?,
            "sigma3" => cfg.sigma3 = parse_f64(key, value, line)?,
            "gamma" => cfg.gamma = parse_f64(key, value, line)?,
            "eps" => cfg.eps = parse_f64(key, value, line)?,
            "tau" => cfg.tau = parse_f64(key, value, line)?,
            "c" => cfg.c = parse_f64(key, value, line)?,
            "mu_norm" => cfg.mu_norm = parse_f64(key, value, line)?,
            "lambda_norm" => cfg.lambda_norm = parse_f64(key, value, line)?,
            "m1" => cfg.m1 = parse_f64(key, value, line)?,
            "radius" => cfg.radius = parse_f64(key, value, line)?,
            "inner_radius" => cfg.inner_radius = parse_f64(key, value, line)?,
            "init_ellipticity" => cfg.init_ellipticity = parse_f64(key, value, line)?,
            "elements" => cfg.target_elements = parse_usize(key, value, line)?,
            "max_steps" => cfg.max_steps = parse_usize(key, value, line)?,
            "stat_tol" => cfg.stat_tol = parse_f64(key, value, line)?,
            "theta1" => cfg.theta1 = Some(parse_f64(key, value, line)?),
            other => {
                return Err(Error::Config(format!("line {line}: unknown key '{other}'")))
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_file(path: &Path) -> Result<FlowConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Inverse of `parse_config` up to key order: full-precision values.
pub fn serialize_config(cfg: &FlowConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("sigma1", format!("{:.17e}", cfg.sigma1));
    kv("sigma2", format!("{:.17e}", cfg.sigma2));
    kv("sigma3", format!("{:.17e}", cfg.sigma3));
    kv("gamma", format!("{:.17e}", cfg.gamma));
    kv("eps", format!("{:.17e}", cfg.eps));
    kv("tau", format!("{:.17e}", cfg.tau));
    kv("c", format!("{:.17e}", cfg.c));
    kv("mu_norm", format!("{:.17e}", cfg.mu_norm));
    kv("lambda_norm", format!("{:.17e}", cfg.lambda_norm));
    kv("m1", format!("{:.17e}", cfg.m1));
    kv("radius", format!("{:.17e}", cfg.radius));
    kv("inner_radius", format!("{:.17e}", cfg.inner_radius));
    kv("init_ellipticity", format!("{:.17e}", cfg.init_ellipticity));
    kv("elements", format!("{}", cfg.target_elements));
    kv("max_steps", format!("{}", cfg.max_steps));
    kv("stat_tol", format!("{:.17e}", cfg.stat_tol));
    if let Some(t) = cfg.theta1 {
        kv("theta1", format!("{t:.17e}"));
    }
    out
}

pub const HISTORY_HEADER: &str = "step,t,D_mean,RM,D_T,E_eps,J_eps,mass,residual";

pub fn history_to_csv(history: &[HistoryRow]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in history {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.step, r.t, r.d_mean, r.rm, r.d_t, r.e_eps, r.j_eps, r.mass, r.residual
        );
    }
    out
}

pub fn write_history_csv(state: &FlowState, path: &Path) -> Result<()> {
    std::fs::write(path, history_to_csv(&state.history))?;
    Ok(())
}

pub fn parse_history_csv(text: &str) -> Result<Vec<HistoryRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty history file".into()))?;
    if header.trim() != HISTORY_HEADER {
        return Err(Error::Config(format!("unexpected history header '{header}'")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::Config(format!(
                "history row {}: expected 9 columns, got {}",
                i + 2,
                cols.len()
            )));
        }
        let num = |j: usize| -> Result<f64> {
            cols[j].trim().parse().map_err(|_| {
                Error::Config(format!("history row {}: bad number '{}'", i + 2, cols[j]))
            })
        };
        rows.push(HistoryRow {
            step: cols[0].trim().parse().map_err(|_| {
                Error::Config(format!("history row {}: bad step '{}'", i + 2, cols[0]))
            })?,
            t: num(1)?,
            d_mean: num(2)?,
            rm: num(3)?,
            d_t: num(4)?,
            e_eps: num(5)?,
            j_eps: num(6)?,
            mass: num(7)?,
            residual: num(8)?,
        });
    }
    Ok(rows)
}

/// Legacy ASCII VTK unstructured grid with one scalar point-data block per
/// named field.
pub fn field_snapshot(mesh: &Mesh, fields: &[(&str, &[f64])]) -> Result<String> {
    let n = mesh.num_nodes();
    for (name, values) in fields {
        if values.len() != n {
            return Err(Error::Usage(format!(
                "field '{name}' has {} values for {n} nodes",
                values.len()
            )));
        }
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("rod cross-section snapshot\n");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {n} double");
    for p in &mesh.nodes {
        let _ = writeln!(out, "{:.16e} {:.16e} 0.0", p[0], p[1]);
    }
    let m = mesh.num_elements();
    let _ = writeln!(out, "CELLS {m} {}", 4 * m);
    for tri in &mesh.elements {
        let _ = writeln!(out, "3 {} {} {}", tri[0], tri[1], tri[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {m}");
    for _ in 0..m {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    for (name, values) in fields {
        let _ = writeln!(out, "SCALARS {name} double 1");
        out.push_str("LOOKUP_TABLE default\n");
        for v in *values {
            let _ = writeln!(out, "{v:.16e}");
        }
    }
    Ok(out)
}

pub fn write_field_snapshot(mesh: &Mesh, fields: &[(&str, &[f64])], path: &Path) -> Result<()> {
    std::fs::write(path, field_snapshot(mesh, fields)?)?;
    Ok(())
}

/// One summary line per experiment.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub name: String,
    pub d_mean: f64,
    pub d_t: f64,
}

impl SummaryRow {
    pub fn ratio(&self) -> f64 {
        self.d_mean / self.d_t
    }
}

/// Plain-text table of (name, D_mean, D_T, twist-to-bend ratio).
pub fn summarize(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:>14} {:>14} {:>14}", "name", "D_mean", "D_T", "ratio");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:>14.6e} {:>14.6e} {:>14.4}",
            r.name,
            r.d_mean,
            r.d_t,
            r.ratio()
        );
    }
    out
}
