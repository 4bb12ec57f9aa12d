//! The two Monte Carlo estimators of `P(R_n / a_n >= r)`.
//!
//! * Direct: sample whole Poisson fields on the certified window and count
//!   the fraction with no generation-n particle inside the target ball.
//!   All radii of one `(n, direct)` cell share the same fields (common
//!   random numbers): each field is simulated once, tracking the minimum
//!   generation-n distance, so the estimated tail is monotone in `r` by
//!   construction.
//! * Factorized: estimate the hit integral
//!   `I_n = int P_{delta_x}(Z_n(B(a_n r)) > 0) dx` by stratified sampling
//!   over radial shells of the window and report `exp(-I_n)`. Budget is
//!   split between a pilot pass and a main pass allocated proportionally to
//!   `shell volume x sqrt(estimated hit rate)`, with the estimated rate
//!   capped by the certified expected-count envelope so that provably dead
//!   shells never eat budget.
//!
//! Both report the window's neglected mass as a one-sided systematic term:
//! the true tail can sit below the estimate by at most that factor, so the
//! lower confidence limit is multiplied by `exp(-eps_trunc)`.

use serde::Serialize;

use crate::engine::{sample_field, simulate_rn, FieldMode, Simulator};
use crate::error::{Error, Result};
use crate::exec::{run_tasks, Exec};
use crate::limits::{self, TheoryBand};
use crate::offspring::Regime;
use crate::rng::{task_stream, StreamDomain};
use crate::steps::{truncation_radius, TruncationWindow};

use super::config::ExperimentConfig;
use super::stats::{binomial_sigma, wilson_ci};

/// Which estimator produced a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Factorized,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Direct => write!(f, "direct"),
            Method::Factorized => write!(f, "factorized"),
        }
    }
}

/// One estimated tail probability with its uncertainty and theory band.
#[derive(Clone, Debug, Serialize)]
pub struct TailEstimate {
    pub regime: Regime,
    pub d: u32,
    pub n: u64,
    pub r: f64,
    pub a_n: f64,
    pub method: Method,
    pub p_hat: f64,
    /// 95% interval, already widened by the truncation systematic.
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Fields (direct) or ancestor runs (factorized) actually used.
    pub m_effective: u64,
    /// Fields containing a capped run (direct) / capped runs (factorized).
    pub capped_count: u64,
    pub trunc_eps: f64,
    pub band: TheoryBand,
    pub seed: u64,
    /// Estimated hit integral and its standard error (factorized only).
    pub hit_integral: Option<f64>,
    pub hit_integral_sigma: Option<f64>,
}

impl TailEstimate {
    /// Standard error of `p_hat` implied by the reported interval.
    pub fn sigma(&self) -> f64 {
        match self.method {
            Method::Direct => binomial_sigma(self.p_hat, self.m_effective.max(1)),
            Method::Factorized => {
                let s = self.hit_integral_sigma.unwrap_or(0.0);
                self.p_hat * s
            }
        }
    }

    pub fn capped_fraction(&self) -> f64 {
        self.capped_count as f64 / self.m_effective.max(1) as f64
    }
}

fn band_for(cfg: &ExperimentConfig, r: f64) -> Result<TheoryBand> {
    limits::theory_band(&cfg.law, &cfg.step, cfg.d, r)
}

fn window_for(cfg: &ExperimentConfig, n: u64, ball: f64) -> Result<TruncationWindow> {
    truncation_radius(&cfg.step, cfg.law.mean(), n, ball, cfg.eps_trunc)
}

/// Direct estimates for a whole `r` grid at one `n`, sharing fields.
pub fn direct_grid(
    cfg: &ExperimentConfig,
    n: u64,
    rs: &[f64],
    exec: Exec,
) -> Result<Vec<TailEstimate>> {
    assert!(!rs.is_empty());
    let a_n = cfg.policy.a(n);
    let balls: Vec<f64> = rs.iter().map(|&r| a_n * r).collect();
    let ball_max = balls.iter().cloned().fold(0.0, f64::max);
    let ball_min = balls.iter().cloned().fold(f64::INFINITY, f64::min);
    let window = window_for(cfg, n, ball_max)?;

    let fields = cfg.fields;
    let outcomes: Vec<(f64, bool)> = run_tasks(exec, fields, |i| {
        let mut rng = task_stream(cfg.master_seed, StreamDomain::Field, &[n, i as u64]);
        let field = sample_field(cfg.d, &window, FieldMode::Lebesgue, &mut rng);
        let out = simulate_rn(&field, &cfg.law, &cfg.step, n, ball_min, cfg.cap, &mut rng);
        (out.r_n, out.capped)
    });

    let capped_count = outcomes.iter().filter(|(_, c)| *c).count() as u64;
    let mut estimates = Vec::with_capacity(rs.len());
    for (&r, &ball) in rs.iter().zip(&balls) {
        let successes = outcomes.iter().filter(|(rn, _)| *rn >= ball).count() as u64;
        let p_hat = successes as f64 / fields as f64;
        let (lo, hi) = wilson_ci(successes, fields as u64, 0.95);
        estimates.push(TailEstimate {
            regime: cfg.law.regime(),
            d: cfg.d,
            n,
            r,
            a_n,
            method: Method::Direct,
            p_hat,
            ci_lo: lo * (-window.eps_trunc).exp(),
            ci_hi: hi,
            m_effective: fields as u64,
            capped_count,
            trunc_eps: window.eps_trunc,
            band: band_for(cfg, r)?,
            seed: cfg.master_seed,
            hit_integral: None,
            hit_integral_sigma: None,
        });
    }
    Ok(estimates)
}

/// Direct estimate at a single `(n, r)`; errors when more than 1% of the
/// fields hit the population cap (the estimate would be biased).
pub fn estimate_direct(cfg: &ExperimentConfig, n: u64, r: f64, exec: Exec) -> Result<TailEstimate> {
    let est = direct_grid(cfg, n, &[r], exec)?
        .pop()
        .expect("one estimate");
    if est.capped_fraction() > 0.01 {
        return Err(Error::CapExceeded {
            capped: est.capped_count as usize,
            total: est.m_effective as usize,
        });
    }
    Ok(est)
}

const SHELLS: usize = 32;
const BATCH: usize = 2048;
const PILOT_FRACTION: f64 = 0.2;

struct Shell {
    r_lo: f64,
    r_hi: f64,
    volume: f64,
    /// Certified upper bound on the hit probability anywhere in the shell.
    envelope: f64,
}

fn make_shells(cfg: &ExperimentConfig, n: u64, ball: f64, window: &TruncationWindow) -> Vec<Shell> {
    let l = window.radius;
    (0..SHELLS)
        .map(|i| {
            let r_lo = l * i as f64 / SHELLS as f64;
            let r_hi = l * (i + 1) as f64 / SHELLS as f64;
            let volume = limits::ball_volume(cfg.d, r_hi) - limits::ball_volume(cfg.d, r_lo);
            let gap = (r_lo - ball).max(0.0);
            let mn = cfg.law.mean().powi(n as i32);
            // Hit probability <= expected count in the ball: bound it both
            // by the deviation tail and, when the walk density is known, by
            // ball volume times the density supremum (much sharper when the
            // ball is small relative to the walk spread).
            let mut envelope = mn * cfg.step.norm_tail_abs(n, gap).expect("certified bound");
            if let Some(density) = cfg.step.walk_density_bound(n, gap) {
                envelope = envelope.min(mn * limits::ball_volume(cfg.d, ball) * density);
            }
            Shell {
                r_lo,
                r_hi,
                volume,
                envelope: envelope.min(1.0),
            }
        })
        .collect()
}

/// Runs `count` single-ancestor hit trials at uniform positions in a shell.
/// Returns (hits, capped, steps).
fn shell_batch(
    cfg: &ExperimentConfig,
    n: u64,
    ball: f64,
    shell: &Shell,
    count: usize,
    rng: &mut impl rand::Rng,
) -> (u64, u64, u64) {
    let d = cfg.d as usize;
    let mut sim = Simulator::new(&cfg.law, &cfg.step, cfg.cap);
    let mut start = vec![0.0f64; d];
    let (mut hits, mut capped, mut steps) = (0u64, 0u64, 0u64);
    let dpow = cfg.d as f64;
    for _ in 0..count {
        // Uniform radius in the shell (volume-weighted), isotropic direction.
        let u: f64 = rng.random();
        let radius = (shell.r_lo.powf(dpow) + u * (shell.r_hi.powf(dpow) - shell.r_lo.powf(dpow)))
            .powf(1.0 / dpow);
        if d == 1 {
            start[0] = if rng.random::<u64>() & 1 == 0 {
                -radius
            } else {
                radius
            };
        } else {
            let mut norm2 = 0.0;
            for s in start.iter_mut() {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                *s = z;
                norm2 += z * z;
            }
            let scale = radius / norm2.sqrt().max(f64::MIN_POSITIVE);
            start.iter_mut().for_each(|s| *s *= scale);
        }
        let out = sim.hits_ball(&start, n, ball, rng);
        hits += out.hit as u64;
        capped += out.capped as u64;
        steps += out.particle_steps;
    }
    (hits, capped, steps)
}

/// Factorized estimate at one `(n, r)`.
pub fn estimate_factorized(
    cfg: &ExperimentConfig,
    n: u64,
    r: f64,
    exec: Exec,
) -> Result<TailEstimate> {
    let a_n = cfg.policy.a(n);
    let ball = a_n * r;
    let window = window_for(cfg, n, ball)?;
    let shells = make_shells(cfg, n, ball, &window);
    let budget = cfg.budget.max(SHELLS * 16);
    let r_tag = r.to_bits();

    // Pilot pass, spread by volume x sqrt(certified envelope). The pilot
    // only steers the main allocation and is excluded from the estimate:
    // pooling it back in would correlate the sample sizes with the sampled
    // hit counts and bias the integral low.
    let pilot_budget = ((budget as f64 * PILOT_FRACTION) as usize).max(SHELLS * 16);
    let pilot_alloc = allocate(
        &shells
            .iter()
            .map(|s| s.volume * s.envelope.sqrt())
            .collect::<Vec<_>>(),
        pilot_budget,
        16,
    );
    let pilot: Vec<(u64, u64, u64)> =
        run_batches(cfg, n, ball, &shells, &pilot_alloc, exec, |s, b| {
            task_stream(
                cfg.master_seed,
                StreamDomain::FactorizedPilot,
                &[n, r_tag, s, b],
            )
        });

    // Main pass: Neyman-style allocation against the pilot rates, capped by
    // the certified envelope. The pilot hit count carries a Gamma prior
    // centered on the envelope (strength: a few pseudo-hits), so a pilot
    // with no power at that rate leaves the certified bound in charge,
    // while a pilot that genuinely resolves the rate overrides it.
    const PRIOR_HITS: f64 = 4.0;
    let mut weights = Vec::with_capacity(SHELLS);
    for (i, s) in shells.iter().enumerate() {
        let (hits, _, _) = pilot[i];
        let trials = pilot_alloc[i] as f64;
        let rate = if s.envelope > 0.0 {
            ((hits as f64 + PRIOR_HITS) / (trials + PRIOR_HITS / s.envelope)).min(s.envelope)
        } else {
            0.0
        };
        weights.push(s.volume * rate.sqrt());
    }
    let main_budget = budget.saturating_sub(pilot_alloc.iter().sum());
    let mut main_alloc = allocate(&weights, main_budget, 0);
    // Shells whose Neyman share rounds away are floored, except provably
    // negligible ones: those are dropped with their certified mass bound
    // carried as a systematic term, exactly like the window truncation.
    let mut skipped_mass = 0.0;
    let mut order: Vec<usize> = (0..SHELLS).collect();
    order.sort_by(|&a, &b| {
        (shells[a].volume * shells[a].envelope)
            .partial_cmp(&(shells[b].volume * shells[b].envelope))
            .unwrap()
    });
    for i in order {
        if main_alloc[i] >= 8 {
            continue;
        }
        let mass = shells[i].volume * shells[i].envelope;
        if skipped_mass + mass <= 0.5 * cfg.eps_trunc {
            skipped_mass += mass;
            main_alloc[i] = 0;
        } else {
            main_alloc[i] = 8;
        }
    }
    let main: Vec<(u64, u64, u64)> =
        run_batches(cfg, n, ball, &shells, &main_alloc, exec, |s, b| {
            task_stream(
                cfg.master_seed,
                StreamDomain::FactorizedMain,
                &[n, r_tag, s, b],
            )
        });

    let mut integral = 0.0;
    let mut variance = 0.0;
    let mut total_runs = 0u64;
    let mut total_capped = 0u64;
    for i in 0..SHELLS {
        let hits = main[i].0;
        let trials = main_alloc[i] as u64;
        total_capped += pilot[i].1 + main[i].1;
        total_runs += (pilot_alloc[i] + main_alloc[i]) as u64;
        if trials == 0 {
            continue;
        }
        let p = hits as f64 / trials as f64;
        integral += shells[i].volume * p;
        // Smoothed rate in the variance term so zero-hit shells do not
        // report spurious certainty.
        let p_var = ((hits as f64 + 0.5) / (trials as f64 + 1.0)).min(shells[i].envelope);
        variance += shells[i].volume * shells[i].volume * p_var * (1.0 - p_var) / trials as f64;
    }
    let sigma_i = variance.sqrt();
    let systematic = window.eps_trunc + skipped_mass;
    let p_hat = (-integral).exp();
    let z = 1.959964;
    let ci_lo = (-(integral + z * sigma_i)).exp() * (-systematic).exp();
    let ci_hi = (-(integral - z * sigma_i)).exp().min(1.0);

    Ok(TailEstimate {
        regime: cfg.law.regime(),
        d: cfg.d,
        n,
        r,
        a_n,
        method: Method::Factorized,
        p_hat,
        ci_lo,
        ci_hi,
        m_effective: total_runs,
        capped_count: total_capped,
        trunc_eps: systematic,
        band: band_for(cfg, r)?,
        seed: cfg.master_seed,
        hit_integral: Some(integral),
        hit_integral_sigma: Some(sigma_i),
    })
}

/// Splits `total` trials across shells proportionally to `weights` with a
/// per-shell floor.
fn allocate(weights: &[f64], total: usize, floor: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || total == 0 {
        // Nothing distinguishable: spread evenly.
        let each = total / weights.len();
        return vec![each.max(floor); weights.len()];
    }
    let mut alloc: Vec<usize> = weights
        .iter()
        .map(|w| ((w / sum) * total as f64).round() as usize)
        .collect();
    for a in alloc.iter_mut() {
        *a = (*a).max(floor);
    }
    alloc
}

/// Runs all per-shell batches as one flat task list.
fn run_batches(
    cfg: &ExperimentConfig,
    n: u64,
    ball: f64,
    shells: &[Shell],
    alloc: &[usize],
    exec: Exec,
    stream: impl Fn(u64, u64) -> rand_chacha::ChaCha8Rng + Sync + Send,
) -> Vec<(u64, u64, u64)> {
    // Task list: (shell, batch index, batch size).
    let mut tasks = Vec::new();
    for (i, &count) in alloc.iter().enumerate() {
        let mut remaining = count;
        let mut batch = 0u64;
        while remaining > 0 {
            let size = remaining.min(BATCH);
            tasks.push((i, batch, size));
            remaining -= size;
            batch += 1;
        }
    }
    let results: Vec<(usize, u64, u64, u64)> = run_tasks(exec, tasks.len(), |t| {
        let (shell_idx, batch, size) = tasks[t];
        let mut rng = stream(shell_idx as u64, batch);
        let (h, c, s) = shell_batch(cfg, n, ball, &shells[shell_idx], size, &mut rng);
        (shell_idx, h, c, s)
    });
    let mut per_shell = vec![(0u64, 0u64, 0u64); shells.len()];
    for (i, h, c, s) in results {
        per_shell[i].0 += h;
        per_shell[i].1 += c;
        per_shell[i].2 += s;
    }
    per_shell
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::config::{
        ConfigFile, EstimatorKind, ExperimentSpec, OffspringSpec, StepKind, StepSpec,
    };

    fn quick_config(text: &str) -> ExperimentConfig {
        ConfigFile::parse_str(text).unwrap().resolve().unwrap()
    }

    fn subcritical_cfg(fields: usize, seed: u64) -> ExperimentConfig {
        let offspring = OffspringSpec::Geometric { mean: 0.8 };
        let step = StepSpec {
            component: StepKind::Gaussian,
            dimension: 1,
            half_width: None,
            tail_index: None,
        };
        let exp = ExperimentSpec {
            regime: None,
            n: vec![15],
            r: vec![0.5],
            estimator: EstimatorKind::Both,
            fields,
            budget: Some(fields * 60),
            eps_trunc: 1e-3,
            cap: 1_000_000,
            master_seed: seed,
            workers: None,
            output: None,
        };
        ExperimentConfig::from_specs(&offspring, &step, &exp).unwrap()
    }

    #[test]
    fn direct_estimate_converges_to_subcritical_limit() {
        let cfg = subcritical_cfg(2000, 7001);
        let est = estimate_direct(&cfg, 15, 0.5, Exec::default()).unwrap();
        let limit = est.band.exact.unwrap();
        let tol = (3.0 * est.sigma()).max(0.03);
        assert!(
            (est.p_hat - limit).abs() <= tol,
            "p_hat {} vs limit {limit} (tol {tol})",
            est.p_hat
        );
        assert!(est.ci_lo <= est.p_hat && est.p_hat <= est.ci_hi);
    }

    #[test]
    fn factorized_estimate_agrees_with_direct() {
        let cfg = subcritical_cfg(1500, 7002);
        let d = estimate_direct(&cfg, 15, 0.5, Exec::default()).unwrap();
        let f = estimate_factorized(&cfg, 15, 0.5, Exec::default()).unwrap();
        assert!(
            f.ci_lo <= d.ci_hi && d.ci_lo <= f.ci_hi,
            "CIs disjoint: direct [{}, {}], factorized [{}, {}]",
            d.ci_lo,
            d.ci_hi,
            f.ci_lo,
            f.ci_hi
        );
        assert!(f.hit_integral.unwrap() > 0.0);
    }

    #[test]
    fn crn_grid_is_monotone_in_r() {
        let cfg = quick_config(
            r#"
            [offspring]
            kind = "binary-critical"
            [step]
            component = "rademacher"
            dimension = 1
            [experiment]
            n = [50]
            r = [0.25, 0.5, 0.75, 1.0, 1.5]
            estimator = "direct"
            fields = 400
            master_seed = 9
        "#,
        );
        let ests = direct_grid(&cfg, 50, &cfg.r_list, Exec::default()).unwrap();
        for w in ests.windows(2) {
            assert!(
                w[1].p_hat <= w[0].p_hat + 1e-15,
                "p_hat not monotone: {} then {}",
                w[0].p_hat,
                w[1].p_hat
            );
        }
    }

    #[test]
    fn immediate_extinction_factorizes_to_one() {
        let offspring = OffspringSpec::Table {
            probs: vec![0.9, 0.1],
        };
        let step = StepSpec {
            component: StepKind::Rademacher,
            dimension: 1,
            half_width: None,
            tail_index: None,
        };
        let exp = ExperimentSpec {
            regime: None,
            n: vec![6],
            r: vec![1.5],
            estimator: EstimatorKind::Factorized,
            fields: 100,
            budget: Some(20_000),
            eps_trunc: 1e-3,
            cap: 1000,
            master_seed: 4,
            workers: None,
            output: None,
        };
        let cfg = ExperimentConfig::from_specs(&offspring, &step, &exp).unwrap();
        // Nearly-dead subcritical law: the hit integral is small and the
        // tail close to 1.
        let est = estimate_factorized(&cfg, 6, 1.5, Exec::default()).unwrap();
        assert!(est.p_hat > 0.8, "p_hat {}", est.p_hat);
        assert!(est.hit_integral.unwrap() < 0.25);
    }

    #[test]
    fn determinism_across_exec_modes() {
        let cfg = subcritical_cfg(300, 7003);
        let a = direct_grid(&cfg, 15, &[0.5], Exec::Sequential).unwrap();
        let b = direct_grid(&cfg, 15, &[0.5], Exec::default()).unwrap();
        assert_eq!(a[0].p_hat.to_bits(), b[0].p_hat.to_bits());
        let fa = estimate_factorized(&cfg, 15, 0.5, Exec::Sequential).unwrap();
        let fb = estimate_factorized(&cfg, 15, 0.5, Exec::default()).unwrap();
        assert_eq!(fa.p_hat.to_bits(), fb.p_hat.to_bits());
    }
}
