//! Line-oriented `[section]` / `key = value` run configuration.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::domain::{CoriolisMode, DiffusionTensor, Grid, GridSpec, Matrix3, PhysParams};
use crate::error::{Error, Result};
use crate::fields::BoundaryForcing;
use crate::model::Mode;
use crate::operators::AdvectionScheme;
use crate::sources::{SourceKind, SourceSpec};

/// Every accepted key, by section.
const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["nx", "ny", "nz", "lx", "ly", "h"]),
    (
        "phys",
        &["nu1", "nu2", "nu3", "f0", "coriolis_mode", "l0", "l_slope"],
    ),
    (
        "diffusion",
        &["m11", "m12", "m13", "m22", "m23", "m33", "file"],
    ),
    ("source", &["kind", "I", "t_s", "x_s"]),
    ("bc", &["theta"]),
    (
        "init",
        &[
            "velocity",
            "velocity_amplitude",
            "concentration",
            "blob_center",
            "blob_width",
            "blob_amplitude",
        ],
    ),
    ("time", &["T", "cfl", "dt_max", "snapshot_every"]),
    (
        "run",
        &[
            "mode",
            "eps_list",
            "output_dir",
            "tol",
            "max_iter",
            "seed",
            "advection",
            "vtk",
            "timing",
        ],
    ),
];

/// Single-run default for `eps_list`.
pub const DEFAULT_EPS: f64 = 0.5;
/// Sweep default for `eps_list`.
pub const DEFAULT_SWEEP_EPS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Aniso,
    Hydro,
    Sweep,
}

impl RunMode {
    pub fn single(self) -> Option<Mode> {
        match self {
            RunMode::Aniso => Some(Mode::Anisotropic),
            RunMode::Hydro => Some(Mode::Hydrostatic),
            RunMode::Sweep => None,
        }
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "aniso" => Ok(RunMode::Aniso),
            "hydro" => Ok(RunMode::Hydro),
            "sweep" => Ok(RunMode::Sweep),
            _ => Err(format!(
                "unknown mode `{s}` (expected aniso, hydro or sweep)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityInit {
    Zero,
    /// Horizontal cellular flow with a `sin(pi x3 / h)` profile, projected.
    TaylorGreenH {
        amplitude: f64,
    },
    /// Uniform random face values in `[-a, a]` from the run seed, projected.
    Random {
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcentrationInit {
    Zero,
    GaussianBlob {
        center: [f64; 3],
        width: f64,
        amplitude: f64,
    },
    /// Uniform random cell values in `[0, a]` from the run seed.
    Random {
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub t_end: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: RunMode,
    pub eps_list: Vec<f64>,
    pub output_dir: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub advection: AdvectionScheme,
    /// Write VTK snapshots.
    pub vtk: bool,
    /// Record wall-clock runtimes; off makes every output reproducible bit for bit.
    pub timing: bool,
}

/// A fully validated configuration. File-backed entries are already loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    /// `eps` holds the first entry of `eps_list`.
    pub phys: PhysParams,
    pub diffusion: DiffusionTensor,
    /// `width` is replaced by the run's `eps`.
    pub source: SourceSpec,
    pub theta: BoundaryForcing,
    pub velocity: VelocityInit,
    pub concentration: ConcentrationInit,
    pub time: TimeSpec,
    pub run: RunSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Raw {
    entries: HashMap<(String, String), Entry>,
}

impl Raw {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.get(section, key).map_or(0, |e| e.line)
    }

    fn parsed<T: FromStr>(&self, section: &str, key: &str, default: T, what: &str) -> Result<T> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| {
                Error::config(e.line, key, format!("expected {what}, got `{}`", e.value))
            }),
        }
    }

    fn float(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.parsed(section, key, default, "a number")?;
        if !v.is_finite() {
            return Err(Error::config(
                self.line(section, key),
                key,
                "must be finite",
            ));
        }
        Ok(v)
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v = self.float(section, key, default)?;
        if v <= 0.0 {
            return Err(Error::config(
                self.line(section, key),
                key,
                format!("{v} must be positive"),
            ));
        }
        Ok(v)
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::config(
                            e.line,
                            key,
                            format!("expected a list of numbers, got `{s}`"),
                        )
                    })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn triple(&self, section: &str, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        match self.list(section, key)? {
            None => Ok(default),
            Some(v) => <[f64; 3]>::try_from(v.as_slice()).map_err(|_| {
                Error::config(
                    self.line(section, key),
                    key,
                    format!("expected 3 numbers, got {}", v.len()),
                )
            }),
        }
    }

    fn flag(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        self.parsed(section, key, default, "true or false")
    }
}

fn tokenize(text: &str) -> Result<Raw> {
    let mut entries = HashMap::new();
    let mut section: Option<String> = None;
    for (n, raw_line) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, content, "unterminated section header"))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(Error::config(line, name, "unknown section"));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::config(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section
            .clone()
            .ok_or_else(|| Error::config(line, key, "key outside of any [section]"))?;
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == sec)
            .map_or(false, |(_, ks)| ks.contains(&key));
        if !known {
            return Err(Error::config(line, key, format!("unknown key in [{sec}]")));
        }
        if value.is_empty() {
            return Err(Error::config(line, key, "missing value"));
        }
        let slot = (sec, key.to_string());
        if let Some(prev) = entries.get(&slot) {
            let prev: &Entry = prev;
            return Err(Error::config(
                line,
                key,
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
        entries.insert(
            slot,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(Raw { entries })
}

/// Parses and validates a configuration; relative file paths resolve against
/// the working directory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."))
}

/// Reads, parses and validates the configuration at `path`; relative file
/// paths inside resolve against its directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Maps a validation failure of a library type onto the line of the key it names.
fn locate(raw: &Raw, section: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => {
            Error::config(raw.line(section, name), name, reason)
        }
        other => Error::config(0, section, other.to_string()),
    }
}

fn read_numbers(path: &Path, per_line: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (n, l) in text.lines().enumerate() {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let row: Vec<f64> = l
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format!("{} line {}: not a number", path.display(), n + 1))?;
        if row.len() != per_line {
            return Err(format!(
                "{} line {}: expected {per_line} values, got {}",
                path.display(),
                n + 1,
                row.len()
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_grid(raw: &Raw) -> Result<GridSpec> {
    let d = GridSpec::default();
    let count = |key: &str, default: usize| -> Result<usize> {
        let v: usize = raw.parsed("grid", key, default, "a cell count")?;
        if v < 4 {
            return Err(Error::config(
                raw.line("grid", key),
                key,
                format!("{v} cells; at least 4 are required"),
            ));
        }
        Ok(v)
    };
    let spec = GridSpec {
        nx: count("nx", d.nx)?,
        ny: count("ny", d.ny)?,
        nz: count("nz", d.nz)?,
        lx: raw.positive("grid", "lx", d.lx)?,
        ly: raw.positive("grid", "ly", d.ly)?,
        h: raw.positive("grid", "h", d.h)?,
    };
    Grid::new(spec).map_err(|e| Error::config(raw.line("grid", "nx"), "grid", e.to_string()))?;
    Ok(spec)
}

fn parse_phys(raw: &Raw) -> Result<PhysParams> {
    let d = PhysParams::default();
    let coriolis = match raw.get("phys", "coriolis_mode") {
        None => d.coriolis,
        Some(e) => match e.value.as_str() {
            "f_plane" => CoriolisMode::FPlane,
            "beta_plane" => CoriolisMode::BetaPlane,
            other => {
                return Err(Error::config(
                    e.line,
                    "coriolis_mode",
                    format!("unknown mode `{other}` (expected f_plane or beta_plane)"),
                ))
            }
        },
    };
    let p = PhysParams {
        nu: [
            raw.float("phys", "nu1", d.nu[0])?,
            raw.float("phys", "nu2", d.nu[1])?,
            raw.float("phys", "nu3", d.nu[2])?,
        ],
        eps: d.eps,
        f0: raw.float("phys", "f0", d.f0)?,
        coriolis,
        l0: raw.float("phys", "l0", d.l0)?,
        l_slope: raw.float("phys", "l_slope", d.l_slope)?,
    };
    p.validate().map_err(|e| locate(raw, "phys", e))?;
    Ok(p)
}

fn parse_diffusion(raw: &Raw, grid: &GridSpec, base: &Path) -> Result<DiffusionTensor> {
    const ENTRIES: [&str; 6] = ["m11", "m12", "m13", "m22", "m23", "m33"];
    let tensor = if let Some(f) = raw.get("diffusion", "file") {
        if let Some(k) = ENTRIES.iter().find(|k| raw.get("diffusion", k).is_some()) {
            return Err(Error::config(
                raw.line("diffusion", k),
                *k,
                "conflicts with `file`",
            ));
        }
        let path = base.join(&f.value);
        let rows = read_numbers(&path, 6).map_err(|m| Error::config(f.line, "file", m))?;
        let shape = [grid.nx, grid.ny, grid.nz];
        let cells: Vec<Matrix3> = rows
            .iter()
            .map(|r| {
                let DiffusionTensor::Uniform(m) =
                    DiffusionTensor::from_upper([r[0], r[1], r[2], r[3], r[4], r[5]])
                else {
                    unreachable!()
                };
                m
            })
            .collect();
        DiffusionTensor::per_cell(shape, cells)
            .map_err(|e| Error::config(f.line, "file", e.to_string()))?
    } else {
        let id = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        let mut u = [0.0; 6];
        for (n, k) in ENTRIES.iter().enumerate() {
            u[n] = raw.float("diffusion", k, id[n])?;
        }
        DiffusionTensor::from_upper(u)
    };
    crate::domain::coercivity_constant(&tensor).map_err(|e| {
        let line = raw
            .get("diffusion", "file")
            .map_or(raw.line("diffusion", "m11"), |f| f.line);
        Error::config(line, "diffusion", e.to_string())
    })?;
    Ok(tensor)
}

fn parse_source(raw: &Raw, grid: &Grid) -> Result<SourceSpec> {
    let kind = match raw.get("source", "kind") {
        None => SourceKind::Gaussian,
        Some(e) => e
            .value
            .parse()
            .map_err(|err: Error| locate(raw, "source", err))?,
    };
    let intensity = raw.float("source", "I", 1.0)?;
    if intensity < 0.0 {
        return Err(Error::config(
            raw.line("source", "I"),
            "I",
            format!("{intensity} must be nonnegative"),
        ));
    }
    let spec = SourceSpec::new(
        kind,
        intensity,
        raw.float("source", "t_s", 0.1)?,
        raw.triple("source", "x_s", [0.5, 0.5, 0.5])?,
        DEFAULT_EPS,
    );
    spec.validate(grid).map_err(|e| match e {
        Error::SourceOutsideDomain { .. } => {
            Error::config(raw.line("source", "x_s"), "x_s", e.to_string())
        }
        other => locate(raw, "source", other),
    })?;
    Ok(spec)
}

fn parse_theta(raw: &Raw, grid: &Grid, base: &Path) -> Result<BoundaryForcing> {
    let Some(e) = raw.get("bc", "theta") else {
        return Ok(BoundaryForcing::zero(grid));
    };
    let bad = |m: String| Error::config(e.line, "theta", m);
    let (word, rest) = e
        .value
        .split_once(char::is_whitespace)
        .unwrap_or((&e.value, ""));
    let rest = rest.trim();
    let theta = match word {
        "zero" if rest.is_empty() => BoundaryForcing::zero(grid),
        "constant" => {
            let v: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("expected `constant c1, c2`, got `{}`", e.value)))?;
            if v.len() != 2 {
                return Err(bad(format!(
                    "expected `constant c1, c2`, got `{}`",
                    e.value
                )));
            }
            BoundaryForcing::constant(grid, v[0], v[1])
        }
        "file" if !rest.is_empty() => {
            let rows = read_numbers(&base.join(rest), 2).map_err(bad)?;
            let n = grid.nx() * grid.ny();
            if rows.len() != n {
                return Err(bad(format!(
                    "expected {n} rows (one per ground cell), got {}",
                    rows.len()
                )));
            }
            let shape = (grid.nx(), grid.ny());
            BoundaryForcing {
                theta1: ndarray::Array2::from_shape_fn(shape, |(i, j)| rows[i * grid.ny() + j][0]),
                theta2: ndarray::Array2::from_shape_fn(shape, |(i, j)| rows[i * grid.ny() + j][1]),
            }
        }
        _ => {
            return Err(bad(format!(
                "expected `zero`, `constant c1, c2` or `file <path>`, got `{}`",
                e.value
            )))
        }
    };
    theta.validate(grid).map_err(|err| bad(err.to_string()))?;
    Ok(theta)
}

fn parse_init(raw: &Raw, grid: &Grid) -> Result<(VelocityInit, ConcentrationInit)> {
    let amp = raw.float("init", "velocity_amplitude", 1.0)?;
    let velocity = match raw.get("init", "velocity").map(|e| e.value.as_str()) {
        None | Some("taylor_green_h") => VelocityInit::TaylorGreenH { amplitude: amp },
        Some("zero") => VelocityInit::Zero,
        Some("random") => VelocityInit::Random { amplitude: amp },
        Some(other) => {
            return Err(Error::config(
                raw.line("init", "velocity"),
                "velocity",
                format!("unknown preset `{other}` (expected zero, taylor_green_h or random)"),
            ))
        }
    };
    let amplitude = raw.float("init", "blob_amplitude", 1.0)?;
    let concentration = match raw.get("init", "concentration").map(|e| e.value.as_str()) {
        None | Some("zero") => ConcentrationInit::Zero,
        Some("gaussian_blob") => {
            let center = raw.triple(
                "init",
                "blob_center",
                [0.5 * grid.lx(), 0.5 * grid.ly(), 0.5 * grid.height()],
            )?;
            ConcentrationInit::GaussianBlob {
                center,
                width: raw.positive("init", "blob_width", 0.1)?,
                amplitude,
            }
        }
        Some("random") => ConcentrationInit::Random { amplitude },
        Some(other) => {
            return Err(Error::config(
                raw.line("init", "concentration"),
                "concentration",
                format!("unknown preset `{other}` (expected zero, gaussian_blob or random)"),
            ))
        }
    };
    Ok((velocity, concentration))
}

fn parse_time(raw: &Raw) -> Result<TimeSpec> {
    let t_end = raw.positive("time", "T", 1.0)?;
    let cfl = raw.positive("time", "cfl", 0.5)?;
    if cfl > 1.0 {
        return Err(Error::config(
            raw.line("time", "cfl"),
            "cfl",
            format!("{cfl} must lie in (0, 1]"),
        ));
    }
    let dt_max = match raw.get("time", "dt_max") {
        None => f64::INFINITY,
        Some(_) => raw.positive("time", "dt_max", 1.0)?,
    };
    let snapshot_every: usize = raw.parsed("time", "snapshot_every", 192, "a step count")?;
    if snapshot_every == 0 {
        return Err(Error::config(
            raw.line("time", "snapshot_every"),
            "snapshot_every",
            "must be at least 1",
        ));
    }
    Ok(TimeSpec {
        t_end,
        cfl,
        dt_max,
        snapshot_every,
    })
}

fn parse_run(raw: &Raw, base: &Path) -> Result<RunSpec> {
    let mode: RunMode = match raw.get("run", "mode") {
        None => RunMode::Aniso,
        Some(e) => e
            .value
            .parse()
            .map_err(|m: String| Error::config(e.line, "mode", m))?,
    };
    let eps_list = match raw.list("run", "eps_list")? {
        Some(v) => v,
        None if mode == RunMode::Sweep => DEFAULT_SWEEP_EPS.to_vec(),
        None => vec![DEFAULT_EPS],
    };
    let line = raw.line("run", "eps_list");
    if eps_list.is_empty() {
        return Err(Error::config(line, "eps_list", "must not be empty"));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::config(
            line,
            "eps_list",
            format!("{e} must lie in (0, 1]"),
        ));
    }
    let advection = match raw.get("run", "advection") {
        None => AdvectionScheme::Upwind1,
        Some(e) => e
            .value
            .parse()
            .map_err(|err: Error| locate(raw, "run", err))?,
    };
    let max_iter: usize = raw.parsed("run", "max_iter", 2000, "an iteration count")?;
    if max_iter == 0 {
        return Err(Error::config(
            raw.line("run", "max_iter"),
            "max_iter",
            "must be at least 1",
        ));
    }
    let output_dir = raw
        .get("run", "output_dir")
        .map_or_else(|| PathBuf::from("output"), |e| PathBuf::from(&e.value));
    Ok(RunSpec {
        mode,
        eps_list,
        output_dir: if output_dir.is_relative() {
            base.join(output_dir)
        } else {
            output_dir
        },
        tol: raw.positive("run", "tol", 1e-8)?,
        max_iter,
        seed: raw.parsed("run", "seed", 0, "an unsigned integer")?,
        advection,
        vtk: raw.flag("run", "vtk", true)?,
        timing: raw.flag("run", "timing", true)?,
    })
}

/// As [`parse_config`], resolving relative paths against `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<RunConfig> {
    let raw = tokenize(text)?;
    let grid_spec = parse_grid(&raw)?;
    let grid = Grid::new(grid_spec)?;
    let mut phys = parse_phys(&raw)?;
    let diffusion = parse_diffusion(&raw, &grid_spec, base)?;
    let source = parse_source(&raw, &grid)?;
    let theta = parse_theta(&raw, &grid, base)?;
    let (velocity, concentration) = parse_init(&raw, &grid)?;
    let time = parse_time(&raw)?;
    let run = parse_run(&raw, base)?;
    phys.eps = run.eps_list[0];
    Ok(RunConfig {
        grid: grid_spec,
        phys,
        diffusion,
        source,
        theta,
        velocity,
        concentration,
        time,
        run,
    })
}
