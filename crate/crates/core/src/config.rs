//! Run configuration: a line-oriented `key = value` format with `[section]` headers.
//!
//! ```text
//! [geometry] L=6.5  H=2.5  nx=130 ny=50
//! [material] E=1.0 nu=0.15 regime=plane_stress Gc=1.0 beta=0.15 eps=0.25 eta=1e-5
//! [load]     kind=uniaxial t_end=4.5 dt=0.1
//! [scheme]   mode=none bc=neumann stag_tol=1e-4 max_m=500
//! [output]   dir=out snapshots=3.0,3.1,3.7,3.8 threshold=0.2
//! ```
//!
//! Several assignments may share a line, and a header may be followed by
//! assignments on the same line. `#` starts a comment.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::evolution::{EvolutionOptions, DEFAULT_CRACK_THRESHOLD};
use crate::fem::{BoundaryCondition, FeSpace};
use crate::mesh::Mesh;
use crate::params::{LoadKind, LoadProgram, MaterialInputs, MaterialParams};
use crate::staggered::{IrreversibilityMode, Staggered, StaggeredOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub half_length: f64,
    /// Ignored for interval runs.
    pub half_height: f64,
    pub interval: bool,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Target mesh size when `nx`/`ny` are absent; defaults to `eps / 2`.
    pub h: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            half_length: 6.5,
            half_height: 2.5,
            interval: false,
            nx: None,
            ny: None,
            h: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub mode: IrreversibilityMode,
    pub bc: BoundaryCondition,
    pub options: StaggeredOptions,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            mode: IrreversibilityMode::None,
            bc: BoundaryCondition::Neumann,
            options: StaggeredOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: Vec<f64>,
    pub threshold: f64,
    /// Runs use no random state, so output is reproducible byte for byte; the
    /// flag is recorded for provenance of the output directory.
    pub deterministic: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshots: Vec::new(),
            threshold: DEFAULT_CRACK_THRESHOLD,
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialInputs,
    pub load: LoadProgram,
    pub scheme: SchemeConfig,
    pub output: OutputConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            material: MaterialInputs::default(),
            load: LoadProgram::default(),
            scheme: SchemeConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

const SECTIONS: [&str; 5] = ["geometry", "material", "load", "scheme", "output"];

/// Prints a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(value: &str) -> std::result::Result<f64, String> {
    value.parse::<f64>().map_err(|_| format!("`{value}` is not a number"))
}

fn parse_usize(value: &str) -> std::result::Result<usize, String> {
    value.parse::<usize>().map_err(|_| format!("`{value}` is not a non-negative integer"))
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_f64(v.trim())).collect()
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

/// Section owning `key`, for keys given without a section prefix.
pub fn section_of(key: &str) -> Option<&'static str> {
    Some(match key {
        "L" | "H" | "nx" | "ny" | "h" | "interval" => "geometry",
        "E" | "nu" | "regime" | "Gc" | "beta" | "eps" | "eta" => "material",
        "kind" | "A" | "t_end" | "dt" => "load",
        "mode" | "bc" | "stag_tol" | "eq_tol" | "lin_tol" | "qp_tol" | "max_m" => "scheme",
        "dir" | "snapshots" | "threshold" | "deterministic" => "output",
        _ => return None,
    })
}

impl EvolutionConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let syntax = |message: String| Error::Syntax {
                line: line_no,
                message,
            };
            let mut line = raw.split('#').next().unwrap_or("").trim();
            if line.starts_with('[') {
                let end = line.find(']').ok_or_else(|| syntax("unterminated section header".into()))?;
                let name = line[1..end].trim();
                if !SECTIONS.contains(&name) {
                    return Err(syntax(format!("unknown section `{name}`")));
                }
                section = Some(name.to_string());
                line = line[end + 1..].trim();
            }
            if line.is_empty() {
                continue;
            }
            for (key, value) in split_assignments(line).map_err(syntax)? {
                let sec = section
                    .as_deref()
                    .ok_or_else(|| syntax(format!("`{key}` appears before any [section] header")))?;
                cfg.set(sec, &key, &value).map_err(syntax)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key. Errors are plain messages; the parser adds line numbers.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
        if section_of(key) != Some(section) {
            return Err(format!("unknown key `{key}` in [{section}]"));
        }
        let g = &mut self.geometry;
        let m = &mut self.material;
        let l = &mut self.load;
        let s = &mut self.scheme;
        let o = &mut self.output;
        match key {
            "L" => g.half_length = parse_f64(value)?,
            "H" => g.half_height = parse_f64(value)?,
            "nx" => g.nx = Some(parse_usize(value)?),
            "ny" => g.ny = Some(parse_usize(value)?),
            "h" => g.h = Some(parse_f64(value)?),
            "interval" => g.interval = parse_bool(value)?,
            "E" => m.young = parse_f64(value)?,
            "nu" => m.poisson = parse_f64(value)?,
            "regime" => m.regime = value.parse().map_err(|e: Error| e.to_string())?,
            "Gc" => m.toughness = parse_f64(value)?,
            "beta" => m.adhesion = parse_f64(value)?,
            "eps" => m.eps = parse_f64(value)?,
            "eta" => m.eta = parse_f64(value)?,
            "kind" => l.kind = value.parse().map_err(|e: Error| e.to_string())?,
            "A" => {
                let a = parse_list(value)?;
                if a.len() != 4 {
                    return Err(format!("A needs 4 row-major entries, got {}", a.len()));
                }
                l.matrix = [[a[0], a[1]], [a[2], a[3]]];
            }
            "t_end" => l.t_end = parse_f64(value)?,
            "dt" => l.dt = parse_f64(value)?,
            "mode" => s.mode = value.parse().map_err(|e: Error| e.to_string())?,
            "bc" => s.bc = value.parse().map_err(|e: Error| e.to_string())?,
            "stag_tol" => s.options.stag_tol = parse_f64(value)?,
            "eq_tol" => s.options.eq_tol = parse_f64(value)?,
            "lin_tol" => s.options.lin_tol = parse_f64(value)?,
            "qp_tol" => s.options.qp_tol = parse_f64(value)?,
            "max_m" => s.options.max_m = parse_usize(value)?,
            "dir" => o.dir = PathBuf::from(value),
            "snapshots" => o.snapshots = parse_list(value)?,
            "threshold" => o.threshold = parse_f64(value)?,
            "deterministic" => o.deterministic = parse_bool(value)?,
            _ => unreachable!("section_of covers every key"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if !(g.half_length > 0.0 && g.half_length.is_finite()) {
            return Err(Error::param("L", format!("must be positive, got {}", g.half_length)));
        }
        if !g.interval && !(g.half_height > 0.0 && g.half_height.is_finite()) {
            return Err(Error::param("H", format!("must be positive, got {}", g.half_height)));
        }
        if g.nx == Some(0) {
            return Err(Error::param("nx", "must be at least 1"));
        }
        if g.ny == Some(0) {
            return Err(Error::param("ny", "must be at least 1"));
        }
        if let Some(h) = g.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::param("h", format!("must be positive, got {h}")));
            }
        }
        MaterialParams::new(self.material)?;
        self.load.validate()?;
        if self.load.kind == LoadKind::Uniaxial && self.load.matrix != LoadProgram::UNIAXIAL {
            return Err(Error::param("A", "a general matrix requires kind=affine"));
        }
        self.scheme.options.validate()?;
        if let Some(s) = self.output.snapshots.iter().find(|s| !(**s >= 0.0 && **s <= self.load.t_end)) {
            return Err(Error::param("snapshots", format!("time {s} outside [0, t_end]")));
        }
        if !(self.output.threshold > 0.0 && self.output.threshold < 1.0) {
            return Err(Error::param("threshold", format!("must lie in (0, 1), got {}", self.output.threshold)));
        }
        Ok(())
    }

    /// Mesh divisions after applying the `h` target.
    pub fn divisions(&self) -> (usize, usize) {
        let g = &self.geometry;
        let h = g.h.unwrap_or(0.5 * self.material.eps);
        let nx = g.nx.unwrap_or_else(|| (2.0 * g.half_length / h).ceil().max(1.0) as usize);
        let ny = if g.interval {
            0
        } else {
            g.ny.unwrap_or_else(|| (2.0 * g.half_height / h).ceil().max(1.0) as usize)
        };
        (nx, ny)
    }

    pub fn mesh(&self) -> Result<Mesh> {
        let (nx, ny) = self.divisions();
        if self.geometry.interval {
            Mesh::interval(self.geometry.half_length, nx)
        } else {
            Mesh::rectangle(self.geometry.half_length, self.geometry.half_height, nx, ny)
        }
    }

    pub fn solver(&self) -> Result<Staggered> {
        self.validate()?;
        Staggered::new(
            FeSpace::new(self.mesh()?),
            MaterialParams::new(self.material)?,
            self.load,
            self.scheme.bc,
            self.scheme.options,
        )
    }

    pub fn evolution_options(&self) -> EvolutionOptions {
        EvolutionOptions {
            mode: self.scheme.mode,
            threshold: self.output.threshold,
            snapshot_times: self.output.snapshots.clone(),
            initial: None,
        }
    }

    /// Canonical text form; `parse(serialize(cfg)) == cfg`.
    pub fn serialize(&self) -> String {
        let g = &self.geometry;
        let m = &self.material;
        let l = &self.load;
        let s = &self.scheme;
        let o = &self.output;
        let list = |xs: &[f64]| xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = write!(out, "[geometry]\nL = {}\nH = {}\ninterval = {}\n", fmt_f64(g.half_length), fmt_f64(g.half_height), g.interval);
        if let Some(nx) = g.nx {
            let _ = writeln!(out, "nx = {nx}");
        }
        if let Some(ny) = g.ny {
            let _ = writeln!(out, "ny = {ny}");
        }
        if let Some(h) = g.h {
            let _ = writeln!(out, "h = {}", fmt_f64(h));
        }
        let _ = write!(
            out,
            "\n[material]\nE = {}\nnu = {}\nregime = {}\nGc = {}\nbeta = {}\neps = {}\neta = {}\n",
            fmt_f64(m.young),
            fmt_f64(m.poisson),
            m.regime,
            fmt_f64(m.toughness),
            fmt_f64(m.adhesion),
            fmt_f64(m.eps),
            fmt_f64(m.eta)
        );
        let a = l.matrix;
        let _ = write!(
            out,
            "\n[load]\nkind = {}\nA = {}\nt_end = {}\ndt = {}\n",
            l.kind,
            list(&[a[0][0], a[0][1], a[1][0], a[1][1]]),
            fmt_f64(l.t_end),
            fmt_f64(l.dt)
        );
        let _ = write!(
            out,
            "\n[scheme]\nmode = {}\nbc = {}\nstag_tol = {}\neq_tol = {}\nlin_tol = {}\nqp_tol = {}\nmax_m = {}\n",
            s.mode,
            s.bc,
            fmt_f64(s.options.stag_tol),
            fmt_f64(s.options.eq_tol),
            fmt_f64(s.options.lin_tol),
            fmt_f64(s.options.qp_tol),
            s.options.max_m
        );
        let _ = write!(
            out,
            "\n[output]\ndir = {}\nsnapshots = {}\nthreshold = {}\ndeterministic = {}\n",
            o.dir.display(),
            list(&o.snapshots),
            fmt_f64(o.threshold),
            o.deterministic
        );
        out
    }
}

/// Splits `a=1 b = 2  c=x,y` into pairs.
fn split_assignments(line: &str) -> std::result::Result<Vec<(String, String)>, String> {
    // glue `key = value` into `key=value` before splitting on whitespace
    let mut glued = String::with_capacity(line.len());
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() {
            let mut ws = String::from(c);
            while let Some(&n) = chars.peek() {
                if n.is_whitespace() {
                    ws.push(n);
                    chars.next();
                } else {
                    break;
                }
            }
            if chars.peek() == Some(&'=') || glued.ends_with('=') {
                continue;
            }
            glued.push(' ');
        } else {
            glued.push(c);
        }
    }
    glued
        .split_whitespace()
        .map(|tok| match tok.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(format!("expected key=value, found `{tok}`")),
        })
        .collect()
}
