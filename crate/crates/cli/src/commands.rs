use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use insulation_core::eigen::EigenOptions;
use insulation_core::fem::Discretization;
use insulation_core::insulation::{
    minimize_lambda_m, optimality_audit, optimality_residual, InsulationOptions, SolveResult, Start,
};
use insulation_core::layered::gamma_limit_report;
use insulation_core::mesh::build_mesh;
use insulation_core::spectra::{
    beta_star_fem, disk_beta_star, disk_dirichlet_oracle, disk_neumann_oracle, disk_robin_oracle, fem_dirichlet,
    fem_neumann, fem_robin, radiality_tolerance,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    NotConverged,
}

/// What a command produced: text for stdout and files for `--out`.
pub struct Output {
    pub status: Status,
    pub stdout: String,
    pub files: Vec<(&'static str, String)>,
}

impl Output {
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, body) in &self.files {
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Schema and config lines that open every CSV file.
fn csv_preamble(command: &str, cfg: &RunConfig) -> String {
    let echo: Vec<String> = cfg.echo().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# schema_version={SCHEMA_VERSION}\n# command={command}\n# config: {}\n", echo.join("; "))
}

fn discretize(cfg: &RunConfig) -> Result<Discretization<f64>> {
    let mesh = build_mesh(&cfg.domain.spec(cfg.mesh_h))?;
    Ok(Discretization::new(mesh)?)
}

fn insulation_options(cfg: &RunConfig) -> InsulationOptions<f64> {
    InsulationOptions { tol_f: cfg.tol, tol_c: cfg.tol_c, max_iter: cfg.max_iter, ..Default::default() }
}

fn single(name: &str, xs: &[f64]) -> Result<f64> {
    match xs {
        [x] => Ok(*x),
        _ => bail!("{name} takes a single value for this command, got {}", xs.len()),
    }
}

#[derive(Serialize)]
struct AuditJson {
    samples: usize,
    violations: usize,
    worst_margin: f64,
}

#[derive(Serialize)]
struct SolveJson {
    schema_version: u32,
    command: &'static str,
    config: std::collections::BTreeMap<&'static str, String>,
    domain: String,
    beta: f64,
    m: f64,
    lambda_m: f64,
    c_u: f64,
    radiality: f64,
    iterations: usize,
    converged: bool,
    start: &'static str,
    multistart_gap: Option<f64>,
    mesh_h: f64,
    vertices: usize,
    eigen_residual: f64,
    optimality_residual: f64,
    lambda_robin: f64,
    audit: Option<AuditJson>,
    functional_trace: Vec<f64>,
}

fn start_name(s: Start) -> &'static str {
    match s {
        Start::Symmetric => "symmetric",
        Start::Tilted => "tilted",
        Start::Bare => "bare",
    }
}

pub fn solve(cfg: &RunConfig) -> Result<Output> {
    let beta = single("beta", &cfg.beta)?;
    let m = single("mass", &cfg.mass)?;
    let disc = discretize(cfg)?;
    let r = minimize_lambda_m(&disc, beta, m, &insulation_options(cfg))?;
    let audit = if m > 0.0 && cfg.audit_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let a = optimality_audit(&disc, &r.u, &r.h, beta, m, cfg.audit_samples, 1e-9, &mut rng)?;
        Some(AuditJson { samples: a.samples, violations: a.violations, worst_margin: a.worst_margin })
    } else {
        None
    };
    let lambda_robin = fem_robin(&disc, beta, &EigenOptions::default())?.lambda;
    let json = SolveJson {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        config: cfg.echo(),
        domain: cfg.domain.to_string(),
        beta,
        m,
        lambda_m: r.lambda_m,
        c_u: r.c_u,
        radiality: r.radiality,
        iterations: r.iterations,
        converged: r.converged,
        start: start_name(r.start),
        multistart_gap: r.multistart_gap,
        mesh_h: disc.mesh_h(),
        vertices: disc.mesh.num_vertices(),
        eigen_residual: r.eigen_residual,
        optimality_residual: optimality_residual(&disc, &r, beta)?,
        lambda_robin,
        audit,
        functional_trace: r.functional_trace.clone(),
    };
    let body = serde_json::to_string_pretty(&json)? + "\n";
    let status = if r.converged { Status::Done } else { Status::NotConverged };
    Ok(Output { status, stdout: body.clone(), files: vec![("result.json", body), ("boundary.csv", boundary_csv(cfg, &disc, &r))] })
}

fn boundary_csv(cfg: &RunConfig, disc: &Discretization<f64>, r: &SolveResult<f64>) -> String {
    let mut s = csv_preamble("solve", cfg);
    s.push_str("arclength,h,trace_u\n");
    let trace = r.u.boundary_trace(&disc.mesh);
    for ((a, h), u) in disc.mesh.boundary_arclength().iter().zip(r.h.values()).zip(&trace) {
        let _ = writeln!(s, "{},{},{}", num(*a), num(*h), num(*u));
    }
    s
}

enum Point {
    Solved(SolveResult<f64>),
    Failed(String),
}

pub fn sweep(cfg: &RunConfig) -> Result<Output> {
    let disc = discretize(cfg)?;
    let opts = insulation_options(cfg);
    // calibrate on the grid and on the broken-symmetry regime 2β*, so the
    // tolerance does not hinge on which coefficients the grid happens to hold
    let mut calibration = cfg.beta.clone();
    calibration.push(2.0 * beta_star_fem(&disc, 1e-10, &opts.eigen)?.beta_star);
    let tau = radiality_tolerance(&disc, &calibration, &opts.eigen)?;
    let grid: Vec<(f64, f64)> = cfg.beta.iter().flat_map(|&b| cfg.mass.iter().map(move |&m| (b, m))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    let points: Vec<Point> = pool.install(|| {
        grid.par_iter()
            .map(|&(b, m)| match minimize_lambda_m(&disc, b, m, &opts) {
                Ok(r) => Point::Solved(r),
                Err(e) => Point::Failed(e.to_string()),
            })
            .collect()
    });

    let mut s = csv_preamble("sweep", cfg);
    let _ = writeln!(s, "# tau_mesh={}", num(tau));
    let flagged: Vec<String> = grid
        .iter()
        .zip(&points)
        .filter_map(|(&(b, m), p)| match p {
            Point::Solved(r) if !r.converged => Some(format!("{b}:{m}:unconverged")),
            Point::Failed(e) => Some(format!("{b}:{m}:failed ({e})")),
            _ => None,
        })
        .collect();
    if !flagged.is_empty() {
        let _ = writeln!(s, "# flagged={}", flagged.join(", "));
    }
    s.push_str("beta,m,lambda_m,radiality,is_radial\n");
    for (&(b, m), p) in grid.iter().zip(&points) {
        match p {
            Point::Solved(r) => {
                let _ = writeln!(s, "{},{},{},{},{}", num(b), num(m), num(r.lambda_m), num(r.radiality), r.radiality < tau);
            }
            Point::Failed(_) => {
                let _ = writeln!(s, "{},{},nan,nan,failed", num(b), num(m));
            }
        }
    }
    Ok(Output { status: Status::Done, stdout: s.clone(), files: vec![("sweep.csv", s)] })
}

pub fn reference(cfg: &RunConfig) -> Result<Output> {
    let beta = single("beta", &cfg.beta)?;
    let disc = discretize(cfg)?;
    let eo = EigenOptions::default();
    let fem = [
        ("lambda_D", fem_dirichlet(&disc, &eo)?.lambda),
        ("lambda_N", fem_neumann(&disc, &eo)?.lambda),
        ("lambda_R", fem_robin(&disc, beta, &eo)?.lambda),
        ("beta_star", beta_star_fem(&disc, 1e-10, &eo)?.beta_star),
    ];
    let oracle: Option<[f64; 4]> = match cfg.domain.disk_radius() {
        Some(r) => Some([
            disk_dirichlet_oracle(r)?.lambda,
            disk_neumann_oracle(r)?.lambda,
            disk_robin_oracle(beta, r)?.lambda,
            disk_beta_star(r)?,
        ]),
        None => None,
    };
    let mut s = csv_preamble("reference", cfg);
    s.push_str("quantity,fem,oracle,rel_gap\n");
    for (i, (name, f)) in fem.iter().enumerate() {
        match oracle {
            Some(o) => {
                let _ = writeln!(s, "{name},{},{},{}", num(*f), num(o[i]), num((f - o[i]).abs() / o[i].abs()));
            }
            None => {
                let _ = writeln!(s, "{name},{},,", num(*f));
            }
        }
    }
    Ok(Output { status: Status::Done, stdout: s.clone(), files: vec![("reference.csv", s)] })
}

pub fn gamma(cfg: &RunConfig) -> Result<Output> {
    let beta = single("beta", &cfg.beta)?;
    let Some(radius) = cfg.domain.disk_radius() else {
        bail!("gamma needs a disk domain, got {}", cfg.domain);
    };
    let report = gamma_limit_report(beta, cfg.layer_h, radius, &cfg.eps)?;
    let mut s = csv_preamble("gamma", cfg);
    let _ = writeln!(s, "# limit={}", num(report.limit));
    s.push_str("eps,lambda_eps,gap\n");
    for row in &report.rows {
        let _ = writeln!(s, "{},{},{}", num(row.eps), num(row.lambda), num(row.gap));
    }
    Ok(Output { status: Status::Done, stdout: s.clone(), files: vec![("gamma.csv", s)] })
}

pub fn mesh_info(cfg: &RunConfig) -> Result<Output> {
    let mesh = build_mesh(&cfg.domain.spec(cfg.mesh_h))?;
    let mut s = csv_preamble("mesh-info", cfg);
    s.push_str("quantity,value\n");
    let _ = writeln!(s, "NV,{}", mesh.num_vertices());
    let _ = writeln!(s, "NT,{}", mesh.num_triangles());
    let _ = writeln!(s, "NB,{}", mesh.num_boundary());
    let _ = writeln!(s, "mesh_h,{}", num(mesh.max_diameter()));
    let _ = writeln!(s, "area,{}", num(mesh.area()));
    let _ = writeln!(s, "perimeter,{}", num(mesh.boundary_edge_lengths().iter().sum()));
    Ok(Output { status: Status::Done, stdout: s.clone(), files: vec![("mesh-info.csv", s), ("mesh.txt", mesh.to_text())] })
}
