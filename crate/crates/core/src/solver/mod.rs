//! Layout generation by multi-restart simulated annealing over box states.

pub mod describe;
pub mod energy;
pub mod moves;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{layout_rule_a, layout_rule_b};
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::geometry::{Layout, LogoInstance};
use crate::synth::templates::constraint_layout;

pub use describe::{describe_layout, LayoutDescription};
pub use energy::{energy, energy_terms, EnergyTerms};
pub use moves::{neighbor_in_place, Touched, MIN_SIDE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    pub overlap: f64,
    pub ratio: f64,
    pub balance: f64,
    pub constraint: f64,
    pub compact: f64,
    pub canvas: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            overlap: 3.0,
            ratio: 1.0,
            balance: 0.5,
            constraint: 100.0,
            compact: 0.5,
            canvas: 10.0,
        }
    }
}

impl Weights {
    fn all(&self) -> [f64; 6] {
        [self.overlap, self.ratio, self.balance, self.constraint, self.compact, self.canvas]
    }

    pub fn sum(&self) -> f64 {
        self.all().iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoveScales {
    /// Standard deviation of translation moves, canvas fraction.
    pub translate: f64,
    /// Resize factors are drawn log-uniformly from [1/(1+r), 1+r].
    pub resize: f64,
}

impl Default for MoveScales {
    fn default() -> Self {
        Self {
            translate: 0.05,
            resize: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub weights: Weights,
    pub iterations: usize,
    pub restarts: usize,
    pub initial_temp: f64,
    pub cooling_rate: f64,
    pub seed: u64,
    pub move_scales: MoveScales,
    pub swap_prob: f64,
    pub ar_preserve_prob: f64,
    /// Total box area the compactness term aims for, canvas fraction.
    pub target_fill: f64,
    /// Side of the occupancy grid used for the overlap term during search.
    pub grid: usize,
    pub time_limit_secs: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            iterations: 20_000,
            restarts: 4,
            initial_temp: 5.0,
            cooling_rate: 0.9995,
            seed: 0,
            move_scales: MoveScales::default(),
            swap_prob: 0.1,
            ar_preserve_prob: 0.7,
            target_fill: 0.35,
            grid: 128,
            time_limit_secs: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return bad("cooling_rate must lie in (0, 1)");
        }
        if !(self.initial_temp.is_finite() && self.initial_temp > 0.0) {
            return bad("initial_temp must be positive");
        }
        if self.weights.all().iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("weights must be finite and non-negative");
        }
        if self.weights.sum() <= 0.0 {
            return bad("at least one weight must be positive");
        }
        let probs = [self.swap_prob, self.ar_preserve_prob];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(self.target_fill > 0.0 && self.target_fill <= 1.0) {
            return bad("target_fill must lie in (0, 1]");
        }
        if self.grid == 0 {
            return bad("grid must be positive");
        }
        let s = self.move_scales;
        if !(s.translate >= 0.0 && s.resize >= 0.0 && s.translate.is_finite() && s.resize.is_finite()) {
            return bad("move scales must be finite and non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub best_energy: f64,
    /// Best energy so far of the winning restart, sampled at regular intervals.
    pub energy_history: Vec<f64>,
    pub accepted_moves: usize,
    pub wall_time: f64,
    pub timed_out: bool,
    /// Energy of each restart's starting layout.
    pub initial_energies: Vec<f64>,
    pub best_restart: usize,
}

/// SplitMix64 mix of a base seed and a stream index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const HISTORY_POINTS: usize = 100;

struct Chain {
    boxes: Layout,
    best: f64,
    initial: f64,
    history: Vec<f64>,
    accepted: usize,
    timed_out: bool,
}

fn run_chain(
    scorer: &energy::Scorer,
    init: &Layout,
    cfg: &SolverConfig,
    seed: u64,
    deadline: Option<Instant>,
) -> Chain {
    let w = &cfg.weights;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = energy::State::new(scorer, init.boxes());
    let mut current = state.energy(w);
    let initial = current;
    let mut best = (current, state.boxes.clone());
    // Temperatures track the weight scale so that scaling all weights leaves
    // acceptance decisions unchanged.
    let mut temp = cfg.initial_temp * w.sum() / Weights::default().sum();
    let every = (cfg.iterations / HISTORY_POINTS).max(1);
    let mut history = Vec::with_capacity(HISTORY_POINTS + 1);
    let mut accepted = 0;
    let mut timed_out = false;
    let mut proposal = state.boxes.clone();
    for it in 0..cfg.iterations {
        if let Some(d) = deadline {
            if it % 256 == 0 && Instant::now() >= d {
                timed_out = true;
                break;
            }
        }
        proposal.copy_from_slice(&state.boxes);
        let touched = neighbor_in_place(&mut proposal, &mut rng, cfg);
        let (changes, k) = match touched {
            Touched::One(i) => ([(i, proposal[i]); 2], 1),
            Touched::Two(i, j) => ([(i, proposal[i]), (j, proposal[j])], 2),
        };
        state.propose(&changes[..k]);
        let next = state.energy(w);
        let delta = next - current;
        let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp();
        if accept {
            state.accept();
            current = next;
            accepted += 1;
            if current < best.0 {
                best = (current, state.boxes.clone());
            }
        } else {
            state.reject();
        }
        temp *= cfg.cooling_rate;
        if it % every == 0 {
            history.push(best.0);
        }
    }
    history.push(best.0);
    Chain {
        boxes: Layout::new(best.1),
        best: best.0,
        initial,
        history,
        accepted,
        timed_out,
    }
}

/// Starting layouts in restart order.
fn initializations(instance: &LogoInstance, constraint: Option<&ConstraintSet>, cfg: &SolverConfig) -> Vec<Layout> {
    let (cw, ch) = instance.canvas();
    let glyphs = instance.glyphs();
    let mut out = Vec::new();
    if let Some(c) = constraint {
        if cfg.weights.constraint > 0.0 && !c.is_empty() {
            if let Ok(l) = constraint_layout(c, glyphs, (cw, ch), cfg.target_fill) {
                out.push(l);
            }
        }
    }
    out.push(layout_rule_a(glyphs, cw, ch));
    out.push(layout_rule_b(glyphs, cw, ch, derive_seed(cfg.seed, u64::MAX)));
    out
}

/// Anneal from several starting layouts and return the lowest-energy result.
pub fn solve(
    instance: &LogoInstance,
    constraint: Option<&ConstraintSet>,
    cfg: &SolverConfig,
) -> Result<(Layout, SolveTrace)> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = cfg.time_limit_secs.map(|s| start + Duration::from_secs_f64(s.max(0.0)));
    let constraint = if cfg.weights.constraint > 0.0 { constraint } else { None };
    let scorer = energy::Scorer::new(instance, constraint, cfg);
    let inits = initializations(instance, constraint, cfg);
    let chains: Vec<Chain> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_chain(&scorer, &inits[r % inits.len()], cfg, derive_seed(cfg.seed, r as u64), deadline))
        .collect();
    let (best_restart, best) = chains
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best.total_cmp(&b.1.best).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    let trace = SolveTrace {
        best_energy: best.best,
        energy_history: best.history.clone(),
        accepted_moves: chains.iter().map(|c| c.accepted).sum(),
        wall_time: start.elapsed().as_secs_f64(),
        timed_out: chains.iter().any(|c| c.timed_out),
        initial_energies: chains.iter().map(|c| c.initial).collect(),
        best_restart,
    };
    Ok((best.boxes.clone(), trace))
}
