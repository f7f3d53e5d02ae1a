//! Run configuration: a flat `key = value` file merged with command-line
//! flags, flags taking precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use insulation_core::mesh::{DomainKind, DomainSpec};

pub const KEYS: &[&str] =
    &["domain", "beta", "mass", "mesh_h", "tol", "tol_c", "max_iter", "jobs", "out", "seed", "layer_h", "eps", "audit_samples"];

/// Geometry as written on the command line, e.g. `disk:1`, `polygon:6:1`,
/// `rect:2:1` or `convex:0:0:1:0:0:1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain(pub DomainKind<f64>);

impl Domain {
    pub fn spec(&self, target_h: f64) -> DomainSpec<f64> {
        DomainSpec { kind: self.0.clone(), target_h }
    }

    pub fn disk_radius(&self) -> Option<f64> {
        match self.0 {
            DomainKind::Disk { radius } => Some(radius),
            _ => None,
        }
    }
}

impl FromStr for Domain {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let nums: Vec<f64> = parts
            .map(|p| p.trim().parse::<f64>().map_err(|_| anyhow!("bad number {p:?} in domain {s:?}")))
            .collect::<Result<_>>()?;
        let kind = match (kind, nums.as_slice()) {
            ("disk", [r]) => DomainKind::Disk { radius: *r },
            ("polygon", [n, r]) if n.fract() == 0.0 && *n >= 3.0 => {
                DomainKind::RegularPolygon { sides: *n as usize, circumradius: *r }
            }
            ("rect", [w, h]) => DomainKind::Rectangle { width: *w, height: *h },
            ("convex", xs) if xs.len() >= 6 && xs.len() % 2 == 0 => {
                DomainKind::ConvexPolygon { vertices: xs.chunks(2).map(|c| [c[0], c[1]]).collect() }
            }
            _ => bail!("unrecognized domain {s:?}; expected disk:R, polygon:N:R, rect:W:H or convex:x1:y1:x2:y2:..."),
        };
        Ok(Domain(kind))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            DomainKind::Disk { radius } => write!(f, "disk:{radius}"),
            DomainKind::RegularPolygon { sides, circumradius } => write!(f, "polygon:{sides}:{circumradius}"),
            DomainKind::Rectangle { width, height } => write!(f, "rect:{width}:{height}"),
            DomainKind::ConvexPolygon { vertices } => {
                write!(f, "convex")?;
                for [x, y] in vertices {
                    write!(f, ":{x}:{y}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: Domain,
    pub beta: Vec<f64>,
    pub mass: Vec<f64>,
    pub mesh_h: f64,
    pub tol: f64,
    pub tol_c: f64,
    pub max_iter: usize,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub layer_h: f64,
    pub eps: Vec<f64>,
    pub audit_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: Domain(DomainKind::Disk { radius: 1.0 }),
            beta: vec![1.0],
            mass: vec![1.0],
            mesh_h: 0.1,
            tol: 1e-10,
            tol_c: 1e-8,
            max_iter: 500,
            jobs: 1,
            out: None,
            seed: 0,
            layer_h: 1.0,
            eps: (0..5).map(|j| 0.1 / f64::from(1u32 << j)).collect(),
            audit_samples: 200,
        }
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let xs = v
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| anyhow!("{key}: bad number {x:?}")))
        .collect::<Result<Vec<_>>>()?;
    if xs.is_empty() {
        bail!("{key}: empty list");
    }
    Ok(xs)
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| anyhow!("{key}: cannot parse {v:?}"))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "domain" => self.domain = value.parse()?,
            "beta" => self.beta = parse_list(key, value)?,
            "mass" | "m" => self.mass = parse_list(key, value)?,
            "mesh_h" => self.mesh_h = parse_one(key, value)?,
            "tol" => self.tol = parse_one(key, value)?,
            "tol_c" => self.tol_c = parse_one(key, value)?,
            "max_iter" => self.max_iter = parse_one(key, value)?,
            "jobs" => self.jobs = parse_one(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "seed" => self.seed = parse_one(key, value)?,
            "layer_h" => self.layer_h = parse_one(key, value)?,
            "eps" => self.eps = parse_list(key, value)?,
            "audit_samples" => self.audit_samples = parse_one(key, value)?,
            _ => bail!("unknown config key {key:?} (known: {})", KEYS.join(", ")),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            self.set(k.trim(), v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.apply_text(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.spec(self.mesh_h).validate()?;
        if self.beta.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            bail!("beta must be positive");
        }
        if self.mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            bail!("mass must be nonnegative");
        }
        for (name, v) in [("tol", self.tol), ("tol_c", self.tol_c), ("layer_h", self.layer_h)] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} must be positive");
            }
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) {
            bail!("eps must be positive");
        }
        if self.max_iter == 0 || self.jobs == 0 {
            bail!("max_iter and jobs must be at least 1");
        }
        Ok(())
    }

    /// Effective settings in key order; embedded in every output file.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("domain", self.domain.to_string());
        m.insert("beta", list(&self.beta));
        m.insert("mass", list(&self.mass));
        m.insert("mesh_h", format!("{:?}", self.mesh_h));
        m.insert("tol", format!("{:?}", self.tol));
        m.insert("tol_c", format!("{:?}", self.tol_c));
        m.insert("max_iter", self.max_iter.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("layer_h", format!("{:?}", self.layer_h));
        m.insert("eps", list(&self.eps));
        m.insert("audit_samples", self.audit_samples.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_round_trip() {
        for s in ["disk:1", "polygon:6:1.5", "rect:2:1", "convex:0:0:1:0:0:1"] {
            let d: Domain = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("disk".parse::<Domain>().is_err());
        assert!("polygon:2.5:1".parse::<Domain>().is_err());
        assert!("sphere:1".parse::<Domain>().is_err());
    }

    #[test]
    fn text_config() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\ndomain = polygon:5:1\nbeta = 1, 2.5\n\nmass=0.5 # trailing\n").unwrap();
        assert_eq!(c.beta, vec![1.0, 2.5]);
        assert_eq!(c.mass, vec![0.5]);
        assert_eq!(c.domain.to_string(), "polygon:5:1");
        assert!(c.apply_text("beta 1").is_err());
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("beta = x").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.beta = vec![0.0];
        assert!(c.validate().is_err());
        let mut c = RunConfig { mesh_h: 5.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
        c.mesh_h = 0.1;
        c.mass = vec![-1.0];
        assert!(c.validate().is_err());
    }
}
