//! Command-line front end of the DPW engine.

pub mod config;
pub mod suites;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use dpw_core::geometry::{
    area_report, choose_pole, density_csv, export_obj, fundamental_patch, replicate_symmetry, AreaReport,
    QuadratureResolution, ReplicationTolerance,
};
use dpw_core::potential::PotentialParams;
use dpw_core::solver::{
    certify, continuation_solve, continuation_to, kappa, Certificate, Solver, SolveReport, UnknownVector,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "dpw", version, about = "Loop-group construction of Lawson-type minimal surfaces in S³")]
pub struct Cli {
    /// Flat key = value configuration file; missing keys take defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides m from the configuration.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Overrides k from the configuration.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print κ_m.
    Kappa,
    /// Solve the monodromy problem at (m, k) and write the parameters as JSON.
    Solve {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Areas over a geometric k-range as CSV.
    Sweep {
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residue and quadrature areas from a parameter file.
    Area {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed triangle mesh as OBJ plus per-vertex density CSV.
    Mesh {
        /// Parameter file from `solve`; solves from the configuration when absent.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Run a named check suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Derivatives,
    Blowup,
    Monodromy,
    Iwasawa,
}

/// Configuration or argument problem; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    /// Tail mass over ρ-norm for a, b and c.
    pub fractions: [f64; 3],
    pub adequate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveArtifact {
    pub config: RunConfig,
    pub params: PotentialParams,
    pub report: SolveReport,
    pub certificate: Certificate,
    pub tail: TailReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaArtifact {
    pub config: RunConfig,
    pub report: AreaReport,
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig, UsageError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(UsageError)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.m {
        cfg.m = m;
    }
    if let Some(k) = cli.k {
        cfg.k = k;
        cfg.t = None;
    }
    if let Command::Sweep { k_min, k_max, steps, .. } = &cli.command {
        cfg.k_min = k_min.unwrap_or(cfg.k_min);
        cfg.k_max = k_max.unwrap_or(cfg.k_max);
        cfg.sweep_steps = steps.unwrap_or(cfg.sweep_steps);
    }
    cfg.validate().map_err(UsageError)?;
    Ok(cfg)
}

/// Runs one command; `Ok(false)` means a verification suite failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Kappa => {
            println!("{:.10}", kappa(cfg.m));
            Ok(true)
        }
        Command::Solve { out } => {
            let art = solve(&cfg)?;
            let path = out.clone().unwrap_or_else(|| PathBuf::from(&cfg.params_out));
            write_json(&path, &art)?;
            println!(
                "solved m={} t={:.6e}: residual {:.3e} after {} iterations; tail {}",
                cfg.m,
                art.params.t,
                art.certificate.residual_inf,
                art.report.iterations,
                if art.tail.adequate { "ok" } else { "above tail_fraction" }
            );
            if !art.tail.adequate {
                eprintln!("warning: truncation tail {:?} exceeds {:.1e}; raise trunc_degree", art.tail.fractions, cfg.tail_fraction);
            }
            Ok(true)
        }
        Command::Sweep { out, .. } => {
            let csv = sweep(&cfg)?;
            let path = out.clone().unwrap_or_else(|| PathBuf::from(&cfg.sweep_out));
            write_text(&path, &csv)?;
            print!("{}", csv.lines().skip(1).fold(String::new(), |s, l| s + l + "\n"));
            Ok(true)
        }
        Command::Area { params, out } => {
            let art = load_solve(params)?;
            let report = area_report(&art.params, QuadratureResolution::default(), cfg.immersion(art.params.t))?;
            println!(
                "area m={} k={}: residue {:.12} quadrature {:.12} gap {:.3e}",
                report.m, report.k, report.area_residue, report.area_quadrature, report.relative_gap
            );
            let path = out.clone().unwrap_or_else(|| PathBuf::from(&cfg.area_out));
            write_json(&path, &AreaArtifact { config: cfg, report })?;
            Ok(true)
        }
        Command::Mesh { params, out, density_out } => {
            let p = match params {
                Some(path) => load_solve(path)?.params,
                None => solve(&cfg)?.params,
            };
            let (obj, dens, summary) = mesh(&cfg, &p)?;
            write_text(&out.clone().unwrap_or_else(|| PathBuf::from(&cfg.mesh_out)), &obj)?;
            write_text(&density_out.clone().unwrap_or_else(|| PathBuf::from(&cfg.density_out)), &dens)?;
            println!("{summary}");
            Ok(true)
        }
        Command::Verify { suite } => suites::run_suite(*suite, &cfg),
    }
}

fn config_comment(cfg: &RunConfig) -> String {
    format!("# config {}\n", serde_json::to_string(cfg).expect("config serializes"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(path, &(text + "\n"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_solve(path: &Path) -> Result<SolveArtifact> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let art: SolveArtifact = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    art.params.validate()?;
    Ok(art)
}

fn tail_report(p: &PotentialParams, limit: f64) -> TailReport {
    let frac = |f: &dpw_core::ScalarLoop| f.tail_mass() / f.norm_rho().max(f64::MIN_POSITIVE);
    let fractions = [frac(&p.a), frac(&p.b), frac(&p.c)];
    TailReport { fractions, adequate: fractions.iter().all(|&f| f <= limit) }
}

fn finish(cfg: &RunConfig, params: PotentialParams, report: SolveReport) -> Result<SolveArtifact> {
    let certificate = certify(&params, &cfg.solver())?;
    let tail = tail_report(&params, cfg.tail_fraction);
    Ok(SolveArtifact { config: cfg.clone(), params, report, certificate, tail })
}

pub fn solve(cfg: &RunConfig) -> Result<SolveArtifact> {
    let sc = cfg.solver();
    let res = match cfg.t {
        Some(t) => continuation_to(cfg.m, t, t / 2.0, &sc, &mut Solver::new(sc))?,
        None => continuation_solve(cfg.m, cfg.k, &sc)?,
    };
    finish(cfg, res.params, res.report)
}

/// x₀ + (t/t_prev)(x_prev − x₀): the previous solution moved along the secant through x₀.
fn rescaled_guess(prev: &PotentialParams, t: f64, cfg: &RunConfig) -> PotentialParams {
    let sc = cfg.solver();
    let n = sc.trunc_degree;
    let x0 = UnknownVector::from_params(&PotentialParams::initial(prev.m, sc.param_degree(), sc.rho), n).0;
    let xp = UnknownVector::from_params(prev, n).0;
    let s = t / prev.t;
    let v = x0.iter().zip(&xp).map(|(a, b)| a + s * (b - a)).collect();
    UnknownVector(v).to_params(prev.m, t, n, sc.rho)
}

/// Areas from k_max down to k_min, each solve warm-started from the previous k.
pub fn sweep(cfg: &RunConfig) -> Result<String> {
    let sc = cfg.solver();
    let mut ks = cfg.sweep_ks();
    ks.reverse();
    let mut solver = Solver::new(sc);
    let mut prev: Option<PotentialParams> = None;
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let t = 1.0 / (2.0 * k as f64 + 2.0);
        let warm = prev.as_ref().and_then(|p| solver.solve_at_t(cfg.m, t, &rescaled_guess(p, t, cfg)).ok());
        let params = match warm {
            Some((p, _)) => p,
            None => continuation_solve(cfg.m, k, &sc)?.params,
        };
        let rep = area_report(&params, QuadratureResolution::default(), cfg.immersion(t))?;
        rows.push(rep);
        prev = Some(params);
    }
    rows.reverse();
    let mut out = config_comment(cfg);
    out.push_str("m,k,t,area_residue,area_quadrature,gap\n");
    for r in &rows {
        let _ = writeln!(out, "{},{},{:?},{:?},{:?},{:?}", r.m, r.k, r.t, r.area_residue, r.area_quadrature, r.relative_gap);
    }
    Ok(out)
}

/// OBJ text, density CSV and a one-line summary.
pub fn mesh(cfg: &RunConfig, p: &PotentialParams) -> Result<(String, String, String)> {
    let patch = fundamental_patch(p, cfg.mesh(), cfg.immersion(p.t))?;
    let rep = replicate_symmetry(&patch, ReplicationTolerance::default())?;
    let m = &rep.mesh;
    let pole = choose_pole(m);
    let obj = config_comment(cfg) + &export_obj(m, &pole)?;
    let dens = config_comment(cfg) + &density_csv(m);
    let summary = format!(
        "mesh: {} vertices, {} faces, closed {}, euler characteristic {}, stitch gap {:.2e}",
        m.vertices.len(),
        m.faces.len(),
        m.is_closed(),
        m.euler_characteristic(),
        rep.stitch_gap
    );
    Ok((obj, dens, summary))
}
