//! Ion-by-ion stochastic simulation of defect-cluster accumulation.
//!
//! The film is a lattice of `nx * ny` columns, each `nz` volume elements
//! deep. Every ion lands on a uniformly chosen column, traverses its
//! elements, and in each element that is still free creates a cluster with
//! probability `eta`. For a non-integer traversal depth the ion visits all
//! `nz = ceil(depth)` layers with probability `depth - (nz - 1)` and
//! otherwise skips one uniformly chosen layer, so every element sees on
//! average `depth / nz` traversals per ion landing in its column.
//!
//! # Random numbers
//!
//! Generator: ChaCha8 (`rand_chacha` 0.9), keyed by `seed_from_u64(seed)`.
//! Stream 1 draws the initial occupancy, one `u32` per element in index
//! order. Stream 0 is split into fixed blocks of [`LatticeFilm::words_per_ion`]
//! words: ion `i` reads exactly words `[i W, (i + 1) W)` and nothing else,
//! so the randomness of any ion is a pure function of `(seed, i)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INIT_STREAM: u64 = 1;
const ION_STREAM: u64 = 0;

/// Geometry and creation probability of a simulated film.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    /// Element traversals per ion, `d / v_D^(1/3)`.
    pub depth: f64,
    /// Creation probability per traversal of a free element.
    pub eta: f64,
    /// Probability that an element is occupied before irradiation.
    pub initial_fraction: f64,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("nx/ny", "lattice needs at least one column"));
        }
        if !(self.depth >= 1.0 && self.depth.is_finite()) {
            return Err(Error::invalid("depth", format!("must be >= 1, got {}", self.depth)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.initial_fraction) {
            return Err(Error::invalid("initial_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn nz(&self) -> usize {
        self.depth.ceil() as usize
    }

    pub fn columns(&self) -> usize {
        self.nx * self.ny
    }

    pub fn elements(&self) -> usize {
        self.columns() * self.nz()
    }

    /// Per-element creation probability per ion landing anywhere on the
    /// film, times the column count: the lattice counterpart of
    /// `eta_vD23 * F` is `effective_eta() * ions / columns`.
    pub fn effective_eta(&self) -> f64 {
        self.eta * self.depth / self.nz() as f64
    }
}

/// Probability threshold on a uniform `u32`.
fn threshold(p: f64) -> u64 {
    (p * 4294967296.0).round() as u64
}

#[derive(Debug, Clone)]
pub struct LatticeFilm {
    spec: LatticeSpec,
    nz: usize,
    occupied: Vec<bool>,
    n_occupied: usize,
    ions: u64,
    rng: ChaCha8Rng,
    words_per_ion: usize,
    eta_threshold: u64,
    full_threshold: u64,
}

impl LatticeFilm {
    pub fn new(spec: LatticeSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let nz = spec.nz();
        let n = spec.elements();

        let mut init = ChaCha8Rng::seed_from_u64(seed);
        init.set_stream(INIT_STREAM);
        let t0 = threshold(spec.initial_fraction);
        let occupied: Vec<bool> = (0..n).map(|_| (init.next_u32() as u64) < t0).collect();
        let n_occupied = occupied.iter().filter(|&&o| o).count();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ION_STREAM);
        // column (2 words) + layer-skip selectors (2 words) + one per layer
        let words_per_ion = (4 + nz).div_ceil(16) * 16;
        let frac = spec.depth - (nz - 1) as f64;
        Ok(LatticeFilm {
            spec,
            nz,
            occupied,
            n_occupied,
            ions: 0,
            rng,
            words_per_ion,
            eta_threshold: threshold(spec.eta),
            full_threshold: threshold(frac),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn words_per_ion(&self) -> usize {
        self.words_per_ion
    }

    pub fn ions_delivered(&self) -> u64 {
        self.ions
    }

    pub fn occupied_count(&self) -> usize {
        self.n_occupied
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.n_occupied as f64 / self.occupied.len() as f64
    }

    pub fn is_occupied(&self, column: usize, layer: usize) -> bool {
        self.occupied[column * self.nz + layer]
    }

    /// Fires `count` ions in logical order.
    pub fn fire(&mut self, count: u64) {
        let columns = self.spec.columns() as u128;
        let w = self.words_per_ion;
        let mut buf = [0u8; 4 * 64];
        let mut words = [0u32; 64];
        let big = w > 64;
        for _ in 0..count {
            // Ions needing more than 64 words are streamed word by word.
            if big {
                self.fire_one_streaming(columns);
                continue;
            }
            self.rng.fill_bytes(&mut buf[..4 * w]);
            for (k, chunk) in buf[..4 * w].chunks_exact(4).enumerate() {
                words[k] = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
            let r = ((words[1] as u64) << 32) | words[0] as u64;
            let column = ((r as u128 * columns) >> 64) as usize;
            let skip = if (words[2] as u64) < self.full_threshold {
                usize::MAX
            } else {
                ((words[3] as u64 * self.nz as u64) >> 32) as usize
            };
            let base = column * self.nz;
            for layer in 0..self.nz {
                if layer == skip {
                    continue;
                }
                let cell = &mut self.occupied[base + layer];
                if !*cell && (words[4 + layer] as u64) < self.eta_threshold {
                    *cell = true;
                    self.n_occupied += 1;
                }
            }
            self.ions += 1;
        }
    }

    fn fire_one_streaming(&mut self, columns: u128) {
        let lo = self.rng.next_u32() as u64;
        let hi = self.rng.next_u32() as u64;
        let column = ((((hi << 32) | lo) as u128 * columns) >> 64) as usize;
        let full = (self.rng.next_u32() as u64) < self.full_threshold;
        let sel = self.rng.next_u32() as u64;
        let skip = if full { usize::MAX } else { ((sel * self.nz as u64) >> 32) as usize };
        let base = column * self.nz;
        for layer in 0..self.nz {
            let u = self.rng.next_u32() as u64;
            if layer == skip {
                continue;
            }
            let cell = &mut self.occupied[base + layer];
            if !*cell && u < self.eta_threshold {
                *cell = true;
                self.n_occupied += 1;
            }
        }
        for _ in (4 + self.nz)..self.words_per_ion {
            self.rng.next_u32();
        }
        self.ions += 1;
    }
}

/// Occupied fraction after each irradiation step of one film.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub ions: u64,
    pub occupied_fraction: f64,
}

/// Fires `steps[k]` additional ions at step `k` and records the occupied
/// fraction before the first step and after every step.
pub fn irradiate(film: &mut LatticeFilm, steps: &[u64]) -> Vec<TrajectoryPoint> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(TrajectoryPoint {
        ions: film.ions_delivered(),
        occupied_fraction: film.occupied_fraction(),
    });
    for &n in steps {
        film.fire(n);
        out.push(TrajectoryPoint {
            ions: film.ions_delivered(),
            occupied_fraction: film.occupied_fraction(),
        });
    }
    out
}

/// Ensemble statistics at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePoint {
    /// Requested fluence, ions/nm^2.
    pub fluence_per_nm2: f64,
    /// Fluence actually represented after rounding to whole ions.
    pub realized_fluence_per_nm2: f64,
    pub ions: u64,
    pub mean: f64,
    /// Standard error of the mean over replicas.
    pub stderr: f64,
    /// Closed-form occupied fraction at the realized fluence.
    pub closed_form: f64,
}

/// Replicated lattice simulation mapped onto a fluence grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub lattice: LatticeSpec,
    /// Continuum cross section `eta_vD23` (nm^2) that the lattice emulates.
    pub eta_vd23: f64,
    /// Non-decreasing cumulative fluence grid, ions/nm^2.
    pub fluence_grid: Vec<f64>,
    pub replicas: usize,
    pub base_seed: u64,
}

impl EnsembleConfig {
    /// Cumulative ion count that reproduces `eta_vd23 * fluence`.
    pub fn ions_for(&self, fluence: f64) -> u64 {
        let l = &self.lattice;
        (self.eta_vd23 * fluence * l.columns() as f64 / l.effective_eta()).round() as u64
    }

    pub fn realized_fluence(&self, ions: u64) -> f64 {
        let l = &self.lattice;
        ions as f64 * l.effective_eta() / (l.columns() as f64 * self.eta_vd23)
    }
}

/// Runs `replicas` independent films (seeds `base_seed + r`) in parallel
/// and reduces them in replica order, so the result does not depend on the
/// number of worker threads.
pub fn simulate_ensemble(cfg: &EnsembleConfig) -> Result<Vec<EnsemblePoint>> {
    cfg.lattice.validate()?;
    if cfg.replicas < 2 {
        return Err(Error::invalid("replicas", "need at least 2 replicas for a standard error"));
    }
    if !(cfg.lattice.eta > 0.0 && cfg.eta_vd23 > 0.0) {
        return Err(Error::invalid("eta", "fluence mapping needs eta > 0 and eta_vD23 > 0"));
    }
    if cfg.fluence_grid.iter().any(|&f| !(f >= 0.0)) || cfg.fluence_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("fluence_grid", "must be non-negative and non-decreasing"));
    }
    let targets: Vec<u64> = cfg.fluence_grid.iter().map(|&f| cfg.ions_for(f)).collect();

    let runs: Vec<Vec<f64>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut film = LatticeFilm::new(cfg.lattice, cfg.base_seed.wrapping_add(r as u64))?;
            Ok(targets
                .iter()
                .map(|&t| {
                    film.fire(t - film.ions_delivered());
                    film.occupied_fraction()
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let n = cfg.replicas as f64;
    let f0 = cfg.lattice.initial_fraction;
    Ok(targets
        .iter()
        .enumerate()
        .map(|(k, &ions)| {
            let mean = runs.iter().map(|run| run[k]).sum::<f64>() / n;
            let var = runs.iter().map(|run| (run[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let realized = cfg.realized_fluence(ions);
            EnsemblePoint {
                fluence_per_nm2: cfg.fluence_grid[k],
                realized_fluence_per_nm2: realized,
                ions,
                mean,
                stderr: (var / n).sqrt(),
                closed_form: 1.0 - (1.0 - f0) * (-cfg.eta_vd23 * realized).exp(),
            }
        })
        .collect())
}
