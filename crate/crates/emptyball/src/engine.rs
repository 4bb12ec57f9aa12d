//! The branching-random-walk simulator.
//!
//! Dynamics per generation: every particle dies and leaves a random number
//! of children (offspring law), then each child is displaced by an
//! independent step — branch first, then move, so generation n is the set
//! of positions after the n-th displacement round. Only the current
//! generation is stored: two flat position buffers swapped per round, no
//! genealogy. The empty-ball statistic needs only the indicator
//! `{some generation-n particle lies in B(rho)}` per ancestor, so runs
//! short-circuit on the first hit and abort (flagged, never dropped) when a
//! generation exceeds the population cap.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::limits::ball_volume;
use crate::offspring::OffspringLaw;
use crate::steps::{StepLaw, TruncationWindow};

/// Default per-generation population cap; rare huge generations of
/// heavy-tailed offspring laws abort (flagged) rather than exhaust memory.
pub const DEFAULT_POPULATION_CAP: usize = 10_000_000;

/// Positions of one generation of one simulation, flat with stride `dim`.
#[derive(Clone, Debug)]
pub struct GenerationBuffer {
    pub positions: Vec<f64>,
    pub dim: u32,
    pub generation_index: u64,
}

impl GenerationBuffer {
    pub fn count(&self) -> usize {
        self.positions.len() / self.dim as usize
    }
}

/// Outcome of one single-ancestor run.
#[derive(Clone, Copy, Debug)]
pub struct RunOutcome {
    /// Smallest generation-n distance to the origin that the run observed
    /// (`+inf` on extinction); exact above the short-circuit threshold.
    pub min_distance: f64,
    pub hit: bool,
    pub capped: bool,
    /// Children displaced over the whole run (cost instrumentation).
    pub particle_steps: u64,
}

/// Reusable single-ancestor simulator; buffers persist across runs.
pub struct Simulator<'a> {
    law: &'a OffspringLaw,
    step: &'a StepLaw,
    cap: usize,
    cur: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(law: &'a OffspringLaw, step: &'a StepLaw, cap: usize) -> Self {
        assert!(cap >= 1);
        Simulator {
            law,
            step,
            cap,
            cur: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Advances `cur` one generation (branch, then displace children).
    /// Returns the number of children or `None` when the cap was exceeded.
    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R, steps: &mut u64) -> Option<usize> {
        let d = self.step.dim() as usize;
        self.next.clear();
        let parents = self.cur.len() / d;
        for p in 0..parents {
            let k = self.law.sample_count(rng);
            for _ in 0..k {
                if self.next.len() / d >= self.cap {
                    return None;
                }
                for c in 0..d {
                    let x = self.cur[p * d + c] + self.step.sample_component(rng);
                    self.next.push(x);
                }
                *steps += 1;
            }
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        Some(self.cur.len() / d)
    }

    /// Runs `n` full generations from `start`, returning the final
    /// generation (empty on extinction) and a capped flag.
    pub fn simulate_generations<R: Rng + ?Sized>(
        &mut self,
        start: &[f64],
        n: u64,
        rng: &mut R,
    ) -> (GenerationBuffer, bool) {
        assert_eq!(start.len(), self.step.dim() as usize);
        self.cur.clear();
        self.cur.extend_from_slice(start);
        let mut steps = 0u64;
        for gen in 0..n {
            match self.advance(rng, &mut steps) {
                None => {
                    return (
                        GenerationBuffer {
                            positions: Vec::new(),
                            dim: self.step.dim(),
                            generation_index: gen + 1,
                        },
                        true,
                    )
                }
                Some(0) => {
                    return (
                        GenerationBuffer {
                            positions: Vec::new(),
                            dim: self.step.dim(),
                            generation_index: gen + 1,
                        },
                        false,
                    )
                }
                Some(_) => {}
            }
        }
        (
            GenerationBuffer {
                positions: self.cur.clone(),
                dim: self.step.dim(),
                generation_index: n,
            },
            false,
        )
    }

    /// Minimum distance of generation-n particles from the origin, run with
    /// full branching for `n - 1` rounds and a streamed final round. The
    /// scan stops as soon as a distance below `stop_below` appears; the
    /// returned minimum is exact whenever it is `>= stop_below`.
    pub fn min_distance_run<R: Rng + ?Sized>(
        &mut self,
        start: &[f64],
        n: u64,
        stop_below: f64,
        rng: &mut R,
    ) -> RunOutcome {
        let d = self.step.dim() as usize;
        assert_eq!(start.len(), d);
        let mut steps = 0u64;
        let stop2 = stop_below * stop_below;

        if n == 0 {
            let dist2: f64 = start.iter().map(|x| x * x).sum();
            let dist = dist2.sqrt();
            return RunOutcome {
                min_distance: dist,
                hit: dist2 < stop2,
                capped: false,
                particle_steps: 0,
            };
        }

        self.cur.clear();
        self.cur.extend_from_slice(start);
        for _ in 0..n - 1 {
            match self.advance(rng, &mut steps) {
                None => {
                    return RunOutcome {
                        min_distance: f64::INFINITY,
                        hit: false,
                        capped: true,
                        particle_steps: steps,
                    }
                }
                Some(0) => {
                    return RunOutcome {
                        min_distance: f64::INFINITY,
                        hit: false,
                        capped: false,
                        particle_steps: steps,
                    }
                }
                Some(_) => {}
            }
        }

        // Final round: stream the children, never materializing them.
        let mut min2 = f64::INFINITY;
        let mut produced = 0usize;
        let parents = self.cur.len() / d;
        for p in 0..parents {
            let k = self.law.sample_count(rng);
            for _ in 0..k {
                produced += 1;
                if produced > self.cap {
                    return RunOutcome {
                        min_distance: if min2.is_finite() {
                            min2.sqrt()
                        } else {
                            f64::INFINITY
                        },
                        hit: min2 < stop2,
                        capped: true,
                        particle_steps: steps,
                    };
                }
                let mut dist2 = 0.0;
                for c in 0..d {
                    let x = self.cur[p * d + c] + self.step.sample_component(rng);
                    dist2 += x * x;
                }
                steps += 1;
                if dist2 < min2 {
                    min2 = dist2;
                    if dist2 < stop2 {
                        return RunOutcome {
                            min_distance: dist2.sqrt(),
                            hit: true,
                            capped: false,
                            particle_steps: steps,
                        };
                    }
                }
            }
        }
        RunOutcome {
            min_distance: if min2.is_finite() {
                min2.sqrt()
            } else {
                f64::INFINITY
            },
            hit: min2 < stop2,
            capped: false,
            particle_steps: steps,
        }
    }

    /// Does some generation-n particle land inside `B(radius)`?
    pub fn hits_ball<R: Rng + ?Sized>(
        &mut self,
        start: &[f64],
        n: u64,
        radius: f64,
        rng: &mut R,
    ) -> RunOutcome {
        self.min_distance_run(start, n, radius, rng)
    }

    /// Runs one lineage through `checkpoints.last()` generations, recording
    /// the minimum origin distance of each checkpointed generation
    /// (`+inf` once extinct). One run serves a whole ladder of `n` values
    /// with fully shared randomness.
    pub fn checkpoint_min_distances<R: Rng + ?Sized>(
        &mut self,
        start: &[f64],
        checkpoints: &[u64],
        rng: &mut R,
    ) -> (Vec<f64>, bool, u64) {
        let d = self.step.dim() as usize;
        assert_eq!(start.len(), d);
        debug_assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));
        let mut mins = vec![f64::INFINITY; checkpoints.len()];
        let mut steps = 0u64;
        self.cur.clear();
        self.cur.extend_from_slice(start);
        let mut next_cp = 0usize;
        let last = *checkpoints.last().expect("at least one checkpoint");
        for gen in 0..=last {
            if next_cp < checkpoints.len() && gen == checkpoints[next_cp] {
                let mut min2 = f64::INFINITY;
                for p in self.cur.chunks_exact(d) {
                    let dist2: f64 = p.iter().map(|x| x * x).sum();
                    min2 = min2.min(dist2);
                }
                mins[next_cp] = min2.sqrt();
                next_cp += 1;
                if next_cp == checkpoints.len() {
                    break;
                }
            }
            match self.advance(rng, &mut steps) {
                None => return (mins, true, steps),
                Some(0) => break,
                Some(_) => {}
            }
        }
        (mins, false, steps)
    }
}

/// Initial-field flavor: the continuum Poisson field, or unit-intensity
/// ancestors on the integer lattice (the oracle-comparable variant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FieldMode {
    Lebesgue,
    UnitLattice,
}

/// One sampled initial condition: ancestor positions inside the window.
#[derive(Clone, Debug)]
pub struct FieldSample {
    /// Flat positions, stride `dim`.
    pub ancestors: Vec<f64>,
    pub dim: u32,
    pub window: TruncationWindow,
    pub mode: FieldMode,
}

impl FieldSample {
    pub fn count(&self) -> usize {
        self.ancestors.len() / self.dim as usize
    }
}

/// Draws the initial ancestors inside the window: Poisson(`v_d(L)`), iid
/// uniform positions (Lebesgue) or Poisson(1) per lattice site (UnitLattice).
pub fn sample_field<R: Rng + ?Sized>(
    d: u32,
    window: &TruncationWindow,
    mode: FieldMode,
    rng: &mut R,
) -> FieldSample {
    let mut ancestors = Vec::new();
    match mode {
        FieldMode::Lebesgue => {
            let lambda = ball_volume(d, window.radius);
            let count = Poisson::new(lambda)
                .map(|p| p.sample(rng) as usize)
                .unwrap_or(0);
            ancestors.reserve(count * d as usize);
            for _ in 0..count {
                sample_uniform_in_ball(d, window.radius, rng, &mut ancestors);
            }
        }
        FieldMode::UnitLattice => {
            let l = window.radius;
            let lm = l.floor() as i64;
            let poisson1 = Poisson::new(1.0).expect("unit intensity");
            let mut visit = |site: &[i64]| {
                let norm2: f64 = site.iter().map(|&x| (x * x) as f64).sum();
                if norm2.sqrt() <= l {
                    let k = poisson1.sample(rng) as usize;
                    for _ in 0..k {
                        for &c in site {
                            ancestors.push(c as f64);
                        }
                    }
                }
            };
            match d {
                1 => {
                    for x in -lm..=lm {
                        visit(&[x]);
                    }
                }
                2 => {
                    for x in -lm..=lm {
                        for y in -lm..=lm {
                            visit(&[x, y]);
                        }
                    }
                }
                3 => {
                    for x in -lm..=lm {
                        for y in -lm..=lm {
                            for z in -lm..=lm {
                                visit(&[x, y, z]);
                            }
                        }
                    }
                }
                _ => panic!("lattice fields are provided for d <= 3"),
            }
        }
    }
    FieldSample {
        ancestors,
        dim: d,
        window: *window,
        mode,
    }
}

fn sample_uniform_in_ball<R: Rng + ?Sized>(d: u32, l: f64, rng: &mut R, out: &mut Vec<f64>) {
    match d {
        1 => out.push(l * (2.0 * rng.random::<f64>() - 1.0)),
        _ => {
            // Gaussian direction, radius L U^{1/d}.
            let start = out.len();
            let mut norm2 = 0.0;
            for _ in 0..d {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                out.push(z);
                norm2 += z * z;
            }
            let norm = norm2.sqrt().max(f64::MIN_POSITIVE);
            let radius = l * rng.random::<f64>().powf(1.0 / d as f64);
            for x in &mut out[start..] {
                *x *= radius / norm;
            }
        }
    }
}

/// Result of one field simulation.
#[derive(Clone, Copy, Debug)]
pub struct RnOutcome {
    /// Infimum of generation-n distances over all ancestors in the window;
    /// `+inf` when every line dies out. Exact above the short-circuit
    /// threshold passed to the run.
    pub r_n: f64,
    pub capped: bool,
    pub truncation_eps: f64,
    pub particle_steps: u64,
}

/// Simulates every ancestor of a field for `n` generations and reports the
/// minimum distance. `stop_below` short-circuits the whole field as soon as
/// any particle lands below it; passing the target radius yields exactly the
/// indicator of `{R_n >= target}`.
pub fn simulate_rn<R: Rng + ?Sized>(
    field: &FieldSample,
    law: &OffspringLaw,
    step: &StepLaw,
    n: u64,
    stop_below: f64,
    cap: usize,
    rng: &mut R,
) -> RnOutcome {
    assert_eq!(field.dim, step.dim());
    let d = step.dim() as usize;
    let mut sim = Simulator::new(law, step, cap);
    let mut r_n = f64::INFINITY;
    let mut capped = false;
    let mut steps = 0u64;
    for a in 0..field.count() {
        let start = &field.ancestors[a * d..(a + 1) * d];
        let out = sim.min_distance_run(start, n, stop_below, rng);
        steps += out.particle_steps;
        capped |= out.capped;
        if out.min_distance < r_n {
            r_n = out.min_distance;
        }
        if out.hit {
            break;
        }
    }
    RnOutcome {
        r_n,
        capped,
        truncation_eps: field.window.eps_trunc,
        particle_steps: steps,
    }
}
