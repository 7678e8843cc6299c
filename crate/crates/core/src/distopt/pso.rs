//! Global-best particle swarm optimization on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Per-step velocity limit.
    pub velocity_clamp: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    /// Constriction-factor settings: `w = 0.729`, `c1 = c2 = 1.49445`.
    fn default() -> Self {
        Self {
            swarm_size: 50,
            iterations: 200,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_clamp: 0.5,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "swarm size {} < 2",
                self.swarm_size
            )));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} = {v}")));
            }
        }
        if !(self.velocity_clamp > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "velocity clamp {} must be positive",
                self.velocity_clamp
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoResult {
    pub position: f64,
    pub fitness: f64,
}

/// Minimizes `fitness` over `[0, 1]`, drawing from `rng`.
///
/// Particles start one per stratum of `[0, 1]`. A particle leaving the
/// interval is placed on the bound it crossed, so bounds are evaluated
/// exactly, and its velocity is reversed and halved. Ties keep the earlier
/// best, so the result depends only on the stream.
pub fn pso_minimize_with<F>(
    fitness: F,
    cfg: &PsoConfig,
    rng: &mut RandomStream,
) -> Result<PsoResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let n = cfg.swarm_size;
    let vmax = cfg.velocity_clamp;
    let mut pos: Vec<f64> = (0..n)
        .map(|i| (i as f64 + rng.uniform()) / n as f64)
        .collect();
    let mut vel: Vec<f64> = (0..n).map(|_| rng.uniform_in(-vmax, vmax)).collect();
    let mut best_pos = pos.clone();
    let mut best_fit: Vec<f64> = pos.iter().map(|&x| fitness(x)).collect();

    let mut g = 0;
    for i in 1..n {
        if best_fit[i] < best_fit[g] {
            g = i;
        }
    }
    let mut g_pos = best_pos[g];
    let mut g_fit = best_fit[g];

    for _ in 0..cfg.iterations {
        for i in 0..n {
            let r1 = rng.uniform();
            let r2 = rng.uniform();
            let v = cfg.inertia * vel[i]
                + cfg.cognitive * r1 * (best_pos[i] - pos[i])
                + cfg.social * r2 * (g_pos - pos[i]);
            vel[i] = v.clamp(-vmax, vmax);
            let next = pos[i] + vel[i];
            if !(0.0..=1.0).contains(&next) {
                // Land on the bound, then head back inside.
                vel[i] *= -0.5;
            }
            pos[i] = next.clamp(0.0, 1.0);
            let fit = fitness(pos[i]);
            if fit < best_fit[i] {
                best_fit[i] = fit;
                best_pos[i] = pos[i];
                if fit < g_fit {
                    g_fit = fit;
                    g_pos = pos[i];
                }
            }
        }
    }
    Ok(PsoResult {
        position: g_pos,
        fitness: g_fit,
    })
}

/// [`pso_minimize_with`] on the stream named by `cfg.seed`.
pub fn pso_minimize<F>(fitness: F, cfg: &PsoConfig) -> Result<PsoResult>
where
    F: Fn(f64) -> f64,
{
    let mut rng = RandomStream::new(cfg.seed);
    pso_minimize_with(fitness, cfg, &mut rng)
}
