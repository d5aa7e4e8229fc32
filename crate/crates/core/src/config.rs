//! Experiment configuration: an INI file with `[problem]`, `[mesh]`,
//! `[basis]`, `[ksweep]`, `[stability]` and `[output]` sections.
//!
//! ```ini
//! [problem]
//! kappa = 16
//! sigma = 1
//! # source_x, source_y default to (-pi / (5 kappa), 0)
//!
//! [mesh]
//! lower = 0, -0.5
//! upper = 1, 0.5
//! nx = 4
//! ny = 5
//! jitter = 0.2
//! seed = 1
//! # file = mesh.txt
//!
//! [basis]
//! p_list = 8, 16, 32, 64, 128
//! modes = PPW, EPW
//! epsilon = 1e-14
//! oversampling = 1.1
//! stream_offset = 0
//!
//! [output]
//! dir = out
//! grid = 256
//! ```

use ini::Ini;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::waves::BasisMode;

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Rectangle {
        lower: Point,
        upper: Point,
        nx: usize,
        ny: usize,
        jitter: f64,
        seed: u64,
    },
    File(PathBuf),
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh> {
        Ok(match self {
            MeshSource::Rectangle {
                lower,
                upper,
                nx,
                ny,
                jitter,
                seed,
            } => Mesh::rectangle(*lower, *upper, *nx, *ny, *jitter, *seed)?,
            MeshSource::File(path) => Mesh::load(path)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kappa: f64,
    pub sigma: f64,
    /// Point-source location; `None` means `(-pi / (5 kappa), 0)`.
    pub source: Option<Point>,
    pub mesh: MeshSource,
    pub p_list: Vec<usize>,
    pub modes: Vec<BasisMode>,
    pub epsilon: f64,
    pub oversampling: f64,
    pub stream_offset: u32,
    pub kappa_list: Vec<f64>,
    pub m_list: Vec<u32>,
    pub stability_p_list: Vec<usize>,
    pub out_dir: PathBuf,
    pub grid: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kappa: 16.0,
            sigma: 1.0,
            source: None,
            mesh: MeshSource::Rectangle {
                lower: [0.0, -0.5],
                upper: [1.0, 0.5],
                nx: 4,
                ny: 5,
                jitter: 0.2,
                seed: 1,
            },
            p_list: vec![8, 16, 32, 64, 128],
            modes: vec![BasisMode::Ppw, BasisMode::Epw],
            epsilon: 1e-14,
            oversampling: 1.1,
            stream_offset: 0,
            kappa_list: vec![8.0, 16.0, 32.0],
            m_list: vec![0, 8, 16, 24, 32],
            stability_p_list: vec![16, 32, 64, 96, 128, 160, 192, 256],
            out_dir: PathBuf::from("out"),
            grid: 256,
        }
    }
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("problem", &["kappa", "sigma", "source_x", "source_y"]),
    ("mesh", &["file", "lower", "upper", "nx", "ny", "jitter", "seed"]),
    ("basis", &["p_list", "modes", "epsilon", "oversampling", "stream_offset"]),
    ("ksweep", &["kappa_list"]),
    ("stability", &["m_list", "p_list"]),
    ("output", &["dir", "grid"]),
];

fn bad(section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("[{section}] {key}: {msg}"))
}

fn parse_one<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e| bad(section, key, format!("`{v}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let out: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_one(section, key, s))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(bad(section, key, "empty list"));
    }
    Ok(out)
}

fn parse_point(section: &str, key: &str, v: &str) -> Result<Point> {
    let xs: Vec<f64> = parse_list(section, key, v)?;
    match xs[..] {
        [x, y] => Ok([x, y]),
        _ => Err(bad(section, key, "expected two comma-separated numbers")),
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if let MeshSource::File(f) = &mut cfg.mesh {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (name, props) in ini.iter() {
            if name.is_none() && props.is_empty() {
                continue;
            }
            let name = name.unwrap_or("");
            let keys = KNOWN_KEYS
                .iter()
                .find(|(s, _)| *s == name)
                .map(|(_, k)| *k)
                .ok_or_else(|| Error::Config(format!("unknown section [{name}]")))?;
            for (k, _) in props.iter() {
                if !keys.contains(&k) {
                    return Err(bad(name, k, "unknown key"));
                }
            }
        }
        let get = |s: &str, k: &str| ini.section(Some(s)).and_then(|p| p.get(k));
        let mut cfg = ExperimentConfig::default();

        if let Some(v) = get("problem", "kappa") {
            cfg.kappa = parse_one("problem", "kappa", v)?;
        }
        if let Some(v) = get("problem", "sigma") {
            cfg.sigma = parse_one("problem", "sigma", v)?;
        }
        match (get("problem", "source_x"), get("problem", "source_y")) {
            (Some(x), Some(y)) => {
                cfg.source = Some([
                    parse_one("problem", "source_x", x)?,
                    parse_one("problem", "source_y", y)?,
                ])
            }
            (None, None) => {}
            _ => return Err(bad("problem", "source_x", "source_x and source_y go together")),
        }

        if let Some(f) = get("mesh", "file") {
            cfg.mesh = MeshSource::File(PathBuf::from(f.trim()));
        } else if let MeshSource::Rectangle {
            lower,
            upper,
            nx,
            ny,
            jitter,
            seed,
        } = &mut cfg.mesh
        {
            if let Some(v) = get("mesh", "lower") {
                *lower = parse_point("mesh", "lower", v)?;
            }
            if let Some(v) = get("mesh", "upper") {
                *upper = parse_point("mesh", "upper", v)?;
            }
            if let Some(v) = get("mesh", "nx") {
                *nx = parse_one("mesh", "nx", v)?;
            }
            if let Some(v) = get("mesh", "ny") {
                *ny = parse_one("mesh", "ny", v)?;
            }
            if let Some(v) = get("mesh", "jitter") {
                *jitter = parse_one("mesh", "jitter", v)?;
            }
            if let Some(v) = get("mesh", "seed") {
                *seed = parse_one("mesh", "seed", v)?;
            }
        }

        if let Some(v) = get("basis", "p_list") {
            cfg.p_list = parse_list("basis", "p_list", v)?;
        }
        if let Some(v) = get("basis", "modes") {
            cfg.modes = parse_list("basis", "modes", v)?;
        }
        if let Some(v) = get("basis", "epsilon") {
            cfg.epsilon = parse_one("basis", "epsilon", v)?;
        }
        if let Some(v) = get("basis", "oversampling") {
            cfg.oversampling = parse_one("basis", "oversampling", v)?;
        }
        if let Some(v) = get("basis", "stream_offset") {
            cfg.stream_offset = parse_one("basis", "stream_offset", v)?;
        }
        if let Some(v) = get("ksweep", "kappa_list") {
            cfg.kappa_list = parse_list("ksweep", "kappa_list", v)?;
        }
        if let Some(v) = get("stability", "m_list") {
            cfg.m_list = parse_list("stability", "m_list", v)?;
        }
        if let Some(v) = get("stability", "p_list") {
            cfg.stability_p_list = parse_list("stability", "p_list", v)?;
        }
        if let Some(v) = get("output", "dir") {
            cfg.out_dir = PathBuf::from(v.trim());
        }
        if let Some(v) = get("output", "grid") {
            cfg.grid = parse_one("output", "grid", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.kappa) {
            return Err(bad("problem", "kappa", "must be positive"));
        }
        if !positive(self.sigma) {
            return Err(bad("problem", "sigma", "must be positive"));
        }
        if let Some(s) = self.source {
            if !(s[0].is_finite() && s[1].is_finite()) {
                return Err(bad("problem", "source_x", "must be finite"));
            }
        }
        if let MeshSource::Rectangle {
            lower,
            upper,
            nx,
            ny,
            jitter,
            ..
        } = &self.mesh
        {
            if !(lower[0] < upper[0] && lower[1] < upper[1]) || *nx == 0 || *ny == 0 {
                return Err(bad("mesh", "lower", "need lower < upper and nx, ny >= 1"));
            }
            if !(0.0..0.5).contains(jitter) {
                return Err(bad("mesh", "jitter", "must lie in [0, 0.5)"));
            }
        }
        if self.p_list.contains(&0) || self.stability_p_list.contains(&0) {
            return Err(bad("basis", "p_list", "entries must be >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(bad("basis", "epsilon", "must lie in (0, 1)"));
        }
        if !(self.oversampling >= 1.0 && self.oversampling.is_finite()) {
            return Err(bad("basis", "oversampling", "must be >= 1"));
        }
        if self.kappa_list.iter().any(|&k| !positive(k)) {
            return Err(bad("ksweep", "kappa_list", "entries must be positive"));
        }
        if self.grid == 0 {
            return Err(bad("output", "grid", "must be >= 1"));
        }
        Ok(())
    }

    /// Settings of the large-scale runs: `kappa = 128` with budgets up to 815
    /// waves per element.
    pub fn apply_full(&mut self) {
        self.kappa = 128.0;
        self.p_list = vec![64, 128, 256, 512, 815];
        self.kappa_list = vec![32.0, 64.0, 128.0];
        self.stability_p_list = vec![64, 128, 256, 512, 1024];
        self.m_list = vec![0, 64, 128, 192, 256];
    }

    pub fn source_for(&self, kappa: f64) -> Point {
        self.source.unwrap_or([-PI / (5.0 * kappa), 0.0])
    }

    /// Canonical text of every setting that influences results; the output
    /// directory is excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kappa={:?}", self.kappa);
        let _ = writeln!(s, "sigma={:?}", self.sigma);
        let _ = writeln!(s, "source={:?}", self.source);
        let _ = writeln!(s, "mesh={:?}", self.mesh);
        let _ = writeln!(s, "p_list={:?}", self.p_list);
        let _ = writeln!(s, "modes={:?}", self.modes);
        let _ = writeln!(s, "epsilon={:?}", self.epsilon);
        let _ = writeln!(s, "oversampling={:?}", self.oversampling);
        let _ = writeln!(s, "stream_offset={}", self.stream_offset);
        let _ = writeln!(s, "kappa_list={:?}", self.kappa_list);
        let _ = writeln!(s, "m_list={:?}", self.m_list);
        let _ = writeln!(s, "stability_p_list={:?}", self.stability_p_list);
        let _ = writeln!(s, "grid={}", self.grid);
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
