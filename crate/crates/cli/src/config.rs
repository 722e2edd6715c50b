//! Flat `key = value` run configuration.

use anyhow::{bail, Context, Result};
use dpw_core::geometry::{ImmersionSettings, MeshResolution};
use dpw_core::ode::OdeOptions;
use dpw_core::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub m: usize,
    pub k: usize,
    /// Overrides t = 1/(2k+2) when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub trunc_degree: usize,
    pub rho: f64,
    pub lambda_grid: usize,
    pub ode_tol: f64,
    pub newton_tol: f64,
    /// Largest tolerated tail mass of a, b, c relative to their ρ-norm.
    pub tail_fraction: f64,
    pub rays_per_sector: usize,
    pub rings: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub sweep_steps: usize,
    pub params_out: String,
    pub area_out: String,
    pub sweep_out: String,
    pub mesh_out: String,
    pub density_out: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        let r = MeshResolution::default();
        RunConfig {
            m: 1,
            k: 20,
            t: None,
            trunc_degree: s.trunc_degree,
            rho: s.rho,
            lambda_grid: s.lambda_grid,
            ode_tol: s.ode.rtol,
            newton_tol: s.newton_tol,
            tail_fraction: 1e-6,
            rays_per_sector: r.rays_per_sector,
            rings: r.rings,
            k_min: 10,
            k_max: 200,
            sweep_steps: 10,
            params_out: "params.json".into(),
            area_out: "area.json".into(),
            sweep_out: "sweep.csv".into(),
            mesh_out: "mesh.obj".into(),
            density_out: "density.csv".into(),
        }
    }
}

impl RunConfig {
    /// Parses and validates; missing keys take their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.trunc_degree;
        let l = self.lambda_grid;
        if self.m == 0 {
            bail!("invariant violated: m >= 1 (got 0)");
        }
        match self.t {
            Some(t) if !(t > 0.0 && t < 0.5) => bail!("invariant violated: 0 < t < 1/2 (got {t})"),
            None if self.k == 0 => bail!("invariant violated: k >= 1 (got 0)"),
            _ => {}
        }
        if n < 2 {
            bail!("invariant violated: trunc_degree >= 2 (got {n})");
        }
        if l % 2 != 0 {
            bail!("invariant violated: lambda_grid must be even (got {l})");
        }
        if l < 2 * n + 2 {
            bail!("invariant violated: lambda_grid >= 2*trunc_degree + 2 (got {l} < {})", 2 * n + 2);
        }
        if !(self.rho > 1.0) {
            bail!("invariant violated: rho > 1 (got {})", self.rho);
        }
        for (name, v) in [("ode_tol", self.ode_tol), ("newton_tol", self.newton_tol), ("tail_fraction", self.tail_fraction)] {
            if !(v > 0.0) {
                bail!("invariant violated: {name} > 0 (got {v})");
            }
        }
        if self.rays_per_sector < 2 || self.rays_per_sector % 2 != 0 {
            bail!("invariant violated: rays_per_sector even and >= 2 (got {})", self.rays_per_sector);
        }
        if self.rings == 0 {
            bail!("invariant violated: rings >= 1 (got 0)");
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            bail!("invariant violated: 1 <= k_min <= k_max (got {}..{})", self.k_min, self.k_max);
        }
        if self.sweep_steps == 0 {
            bail!("invariant violated: sweep_steps >= 1 (got 0)");
        }
        Ok(())
    }

    pub fn t(&self) -> f64 {
        self.t.unwrap_or(1.0 / (2.0 * self.k as f64 + 2.0))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            trunc_degree: self.trunc_degree,
            rho: self.rho,
            lambda_grid: self.lambda_grid,
            ode: OdeOptions { rtol: self.ode_tol, atol: self.ode_tol },
            newton_tol: self.newton_tol,
            ..SolverConfig::default()
        }
    }

    pub fn immersion(&self, t: f64) -> ImmersionSettings {
        let mut s = ImmersionSettings::for_t(t);
        s.ode = OdeOptions { rtol: self.ode_tol, atol: self.ode_tol };
        s
    }

    pub fn mesh(&self) -> MeshResolution {
        MeshResolution { rays_per_sector: self.rays_per_sector, rings: self.rings }
    }

    /// Geometric k-range from k_min to k_max with `sweep_steps` distinct values at most.
    pub fn sweep_ks(&self) -> Vec<usize> {
        if self.sweep_steps == 1 || self.k_min == self.k_max {
            return vec![self.k_min];
        }
        let ratio = (self.k_max as f64 / self.k_min as f64).powf(1.0 / (self.sweep_steps - 1) as f64);
        let mut ks: Vec<usize> = (0..self.sweep_steps)
            .map(|i| (self.k_min as f64 * ratio.powi(i as i32)).round() as usize)
            .collect();
        *ks.last_mut().expect("nonempty") = self.k_max;
        ks.dedup();
        ks
    }
}
