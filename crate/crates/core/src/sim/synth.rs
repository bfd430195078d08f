//! Synthetic DOGM frames rendered from a scenario.
//!
//! Actor cells carry the actor's speed along a lagged heading plus Gaussian
//! velocity noise. The lag mimics a particle filter that adapts slowly to a
//! turning vehicle. Static clutter is a fixed block pattern with small
//! velocities that the search mask rejects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Point2};
use crate::grid::{CellIndex, CellState, Cov2, GridFrame};

use super::scenario::Scenario;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
const ACTOR_M_OCC: f64 = 0.9;
const CLUTTER_M_OCC: f64 = 0.8;
const CLUTTER_M_FREE: f64 = 0.1;
const CLUTTER_SIGMA_V: f64 = 0.15;
const CLUTTER_MAX_SPEED: f64 = 0.5;
const CLUTTER_PERIOD: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Per-axis velocity noise, m/s.
    pub sigma_v: f64,
    /// Spread of occupied mass below its nominal value.
    pub sigma_m: f64,
    /// Heading filter gain in [0, 1). 0 tracks the true heading exactly.
    pub lag_gain: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { sigma_v: 0.2, sigma_m: 0.05, lag_gain: 0.85, seed: 7 }
    }
}

impl NoiseConfig {
    /// No noise, no lag.
    pub fn noiseless() -> Self {
        Self { sigma_v: 0.0, sigma_m: 0.0, lag_gain: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.sigma_v >= 0.0 && self.sigma_v.is_finite()) {
            return Err(format!("sigma_v = {} must be finite and >= 0", self.sigma_v));
        }
        if !(self.sigma_m >= 0.0 && self.sigma_m.is_finite()) {
            return Err(format!("sigma_m = {} must be finite and >= 0", self.sigma_m));
        }
        if !(0.0..1.0).contains(&self.lag_gain) {
            return Err(format!("lag_gain = {} must be in [0, 1)", self.lag_gain));
        }
        Ok(())
    }
}

/// Heading the simulated filter reports at frame `n`.
pub fn lagged_heading(scenario: &Scenario, n: usize, lag_gain: f64) -> f64 {
    let mut lagged = scenario.actor.pose(0.0).1;
    for k in 1..=n {
        let truth = scenario.actor.pose(scenario.frame_time(k)).1;
        lagged += (1.0 - lag_gain) * wrap_angle(truth - lagged);
    }
    lagged
}

fn frame_rng(seed: u64, n: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(SEED_STRIDE))
}

fn is_clutter(row: usize, col: usize) -> bool {
    let (br, bc) = (row / CLUTTER_PERIOD, col / CLUTTER_PERIOD);
    (br + bc) % 3 == 0 && row % CLUTTER_PERIOD < 6 && col % CLUTTER_PERIOD < 10
}

/// Frame `n` of the scenario together with the cells covered by the actor.
pub fn synthesize_labeled(scenario: &Scenario, n: usize, noise: &NoiseConfig) -> (GridFrame, Vec<CellIndex>) {
    let g = scenario.grid;
    let t = scenario.frame_time(n);
    let mut rng = frame_rng(noise.seed, n);
    let mut cells: Vec<CellState> = (0..g.len())
        .map(|i| CellState::unknown(g.cell_center(i / g.width, i % g.width)))
        .collect();

    let clutter_noise = Normal::new(0.0, CLUTTER_SIGMA_V).unwrap();
    for row in 0..g.height {
        for col in 0..g.width {
            if !is_clutter(row, col) {
                continue;
            }
            let mut v = Point2::new(clutter_noise.sample(&mut rng), clutter_noise.sample(&mut rng));
            if v.norm() > CLUTTER_MAX_SPEED {
                v = v * (CLUTTER_MAX_SPEED / v.norm());
            }
            let c = &mut cells[row * g.width + col];
            c.m_occ = CLUTTER_M_OCC;
            c.m_free = CLUTTER_M_FREE;
            c.vel = v;
            c.vel_cov = Cov2::isotropic(CLUTTER_SIGMA_V * CLUTTER_SIGMA_V);
        }
    }

    let footprint = scenario.actor.footprint(t);
    let heading = lagged_heading(scenario, n, noise.lag_gain);
    let v_mean = Point2::from_angle(heading) * scenario.actor.speed;
    let mut labels = Vec::new();
    let (lo, hi) = footprint.aabb();
    if let Some((a, z)) = g.index_range(lo, hi) {
        for row in a.row..=z.row {
            for col in a.col..=z.col {
                let center = g.cell_center(row, col);
                if !footprint.contains(center) {
                    continue;
                }
                let (dm, dvx, dvy) = if noise.sigma_m > 0.0 || noise.sigma_v > 0.0 {
                    let m: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * noise.sigma_m;
                    let vx: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * noise.sigma_v;
                    let vy: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * noise.sigma_v;
                    (m.abs(), vx, vy)
                } else {
                    (0.0, 0.0, 0.0)
                };
                let m_occ = (ACTOR_M_OCC - dm).clamp(0.5, 0.95);
                let c = &mut cells[row * g.width + col];
                c.m_occ = m_occ;
                c.m_free = (1.0 - m_occ).min(0.05);
                c.vel = v_mean + Point2::new(dvx, dvy);
                c.vel_cov = Cov2::isotropic(noise.sigma_v * noise.sigma_v);
                labels.push(CellIndex::new(row, col));
            }
        }
    }

    let frame = GridFrame::new(t, g, cells).expect("synthetic cells are valid");
    (frame, labels)
}

pub fn synthesize_frame(scenario: &Scenario, n: usize, noise: &NoiseConfig) -> GridFrame {
    synthesize_labeled(scenario, n, noise).0
}
