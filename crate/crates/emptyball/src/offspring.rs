//! Offspring distributions: probabilities, generating functions, moments,
//! and samplers.
//!
//! Four kinds are supported:
//!
//! * `Table` — an explicit finite table `p_0..p_K`;
//! * `BinaryCritical` — `p_0 = p_2 = 1/2` (critical, variance 1);
//! * `Geometric` — `p_k = (1-q) q^k` parameterized by its mean `m < 1`,
//!   the canonical subcritical example (its extinction numerics have a
//!   linear-fractional closed form);
//! * `Stable` — generating function `f(s) = s + c (1-s)^{1+beta}`, the
//!   critical heavy-tailed family with infinite variance for `beta < 1`.
//!
//! The slowly varying factor of the stable family is instantiated as the
//! constant `c`, which keeps every renormalization scale in closed form.
//! Stable probabilities are tabulated up to a support cutoff (default 10^6)
//! and sampled beyond it from the `k^{-(2+beta)}` power tail.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Default support cutoff for the tabulated part of a stable law.
pub const STABLE_SUPPORT_CUTOFF: usize = 1_000_000;

/// Criticality class of an offspring law; drives scale selection and the
/// survival asymptotics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Regime {
    CriticalFiniteVar,
    CriticalStable,
    Subcritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::CriticalFiniteVar => write!(f, "critical"),
            Regime::CriticalStable => write!(f, "critical-stable"),
            Regime::Subcritical => write!(f, "subcritical"),
        }
    }
}

/// Which family an [`OffspringLaw`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffspringKind {
    Table,
    BinaryCritical,
    Geometric,
    Stable,
}

/// Tabulated head and power-tail parameters of a stable law.
#[derive(Debug)]
struct StableTable {
    /// Cumulative probabilities `P(K <= k)` for `k = 0..=k_max`.
    cum: Vec<f64>,
    /// First entries of `cum`, scanned linearly (they cover almost all draws).
    head: [f64; HEAD_LEN],
    /// Mass beyond `k_max`, drawn from the conditional power tail.
    tail_mass: f64,
    k_max: usize,
}

const HEAD_LEN: usize = 32;

#[derive(Clone, Debug)]
enum Inner {
    Table {
        probs: Vec<f64>,
        cum: Vec<f64>,
    },
    Binary,
    Geometric {
        q: f64,
    },
    Stable {
        beta: f64,
        c: f64,
        table: Arc<StableTable>,
    },
}

/// An offspring distribution `{p_k}` with its generating function, moments,
/// sampler, and regime tag. Immutable after construction and cheap to clone;
/// samplers take an explicit random stream, so one law can be shared across
/// parallel workers.
#[derive(Clone, Debug)]
pub struct OffspringLaw {
    inner: Inner,
    mean: f64,
    variance: f64,
    regime: Regime,
}

impl OffspringLaw {
    /// `p_0 = p_2 = 1/2`: the critical binary law, mean 1, variance 1.
    pub fn binary_critical() -> Self {
        OffspringLaw {
            inner: Inner::Binary,
            mean: 1.0,
            variance: 1.0,
            regime: Regime::CriticalFiniteVar,
        }
    }

    /// Builds a law from an explicit probability table `p_0..p_K`.
    ///
    /// The table must be a probability vector with mean <= 1 (supercritical
    /// laws are out of scope). Degenerate tables (`p_0 = 1` or `p_1 = 1`)
    /// are accepted; they are useful fixtures for the exact oracle, but the
    /// regime-dependent operations reject them because every survival
    /// asymptotic assumes `p_0 < 1`, `p_1 < 1` and positive variance.
    pub fn table(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameters("empty probability table".into()));
        }
        let mut sum = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameters(format!(
                    "p_{k} = {p} out of [0,1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameters(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        let mean: f64 = probs.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
        let second: f64 = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64) * (k as f64) * p)
            .sum();
        if mean > 1.0 + 1e-12 {
            return Err(Error::InvalidParameters(format!(
                "supercritical table (mean {mean} > 1) is unsupported"
            )));
        }
        let mean = mean.min(1.0);
        let variance = (second - mean * mean).max(0.0);
        let regime = if (mean - 1.0).abs() <= 1e-12 {
            Regime::CriticalFiniteVar
        } else {
            Regime::Subcritical
        };
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in probs {
            acc += p;
            cum.push(acc);
        }
        Ok(OffspringLaw {
            inner: Inner::Table {
                probs: probs.to_vec(),
                cum,
            },
            mean,
            variance,
            regime,
        })
    }

    /// Geometric law `p_k = (1-q) q^k` with `q = m/(1+m)`, parameterized by
    /// its mean `m` in `(0, 1)`.
    pub fn geometric(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "geometric mean must lie in (0,1), got {mean}"
            )));
        }
        let q = mean / (1.0 + mean);
        Ok(OffspringLaw {
            inner: Inner::Geometric { q },
            mean,
            // Var K = q/(1-q)^2 = m(1+m) for the geometric-on-{0,1,...} law.
            variance: mean * (1.0 + mean),
            regime: Regime::Subcritical,
        })
    }

    /// Stable law with generating function `f(s) = s + c (1-s)^{1+beta}`,
    /// tabulated up to [`STABLE_SUPPORT_CUTOFF`].
    pub fn stable(beta: f64, c: f64) -> Result<Self> {
        Self::stable_with_cutoff(beta, c, STABLE_SUPPORT_CUTOFF)
    }

    /// Stable law with an explicit support cutoff for the probability table.
    pub fn stable_with_cutoff(beta: f64, c: f64, cutoff: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "stable index beta must lie in (0,1], got {beta}"
            )));
        }
        if !(c > 0.0 && c <= 1.0 / (1.0 + beta)) {
            return Err(Error::InvalidParameters(format!(
                "stable coefficient must lie in (0, 1/(1+beta)] so that p_1 >= 0, got {c}"
            )));
        }
        if cutoff < 4 {
            return Err(Error::InvalidParameters("stable support cutoff < 4".into()));
        }
        let table = Arc::new(build_stable_table(beta, c, cutoff));
        Ok(OffspringLaw {
            inner: Inner::Stable { beta, c, table },
            mean: 1.0,
            variance: if beta < 1.0 { f64::INFINITY } else { 2.0 * c },
            regime: Regime::CriticalStable,
        })
    }

    pub fn kind(&self) -> OffspringKind {
        match self.inner {
            Inner::Table { .. } => OffspringKind::Table,
            Inner::Binary => OffspringKind::BinaryCritical,
            Inner::Geometric { .. } => OffspringKind::Geometric,
            Inner::Stable { .. } => OffspringKind::Stable,
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Mean number of children `m`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Offspring variance; `+inf` for stable laws with `beta < 1`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `(m, sigma^2)` as a pair.
    pub fn mean_var(&self) -> (f64, f64) {
        (self.mean, self.variance)
    }

    /// Stability index, for stable laws.
    pub fn beta(&self) -> Option<f64> {
        match self.inner {
            Inner::Stable { beta, .. } => Some(beta),
            _ => None,
        }
    }

    /// Stable coefficient `c` (the constant slowly varying factor).
    pub fn c_coef(&self) -> Option<f64> {
        match self.inner {
            Inner::Stable { c, .. } => Some(c),
            _ => None,
        }
    }

    /// Explicit probability table, when the kind carries one.
    pub fn probs(&self) -> Option<&[f64]> {
        match &self.inner {
            Inner::Table { probs, .. } => Some(probs),
            _ => None,
        }
    }

    /// `p_k` for any kind (computed on demand for the analytic kinds).
    pub fn prob(&self, k: usize) -> f64 {
        match &self.inner {
            Inner::Table { probs, .. } => probs.get(k).copied().unwrap_or(0.0),
            Inner::Binary => match k {
                0 | 2 => 0.5,
                _ => 0.0,
            },
            Inner::Geometric { q } => (1.0 - q) * q.powi(k as i32),
            Inner::Stable { beta, c, .. } => stable_prob(*beta, *c, k),
        }
    }

    /// Largest index with positive probability, when the support is finite.
    pub fn finite_support(&self) -> Option<usize> {
        match &self.inner {
            Inner::Table { probs, .. } => Some(probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)),
            Inner::Binary => Some(2),
            _ => None,
        }
    }

    /// Generating function `f(s) = sum p_k s^k` on `[0, 1]`.
    pub fn pgf(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("pgf argument {s} outside [0,1]")));
        }
        Ok(match &self.inner {
            Inner::Table { probs, .. } => {
                // Horner in s keeps the summation well conditioned.
                probs.iter().rev().fold(0.0, |acc, &p| acc * s + p)
            }
            Inner::Binary => 0.5 * (1.0 + s * s),
            Inner::Geometric { q } => (1.0 - q) / (1.0 - q * s),
            Inner::Stable { beta, c, .. } => s + c * (1.0 - s).powf(1.0 + beta),
        })
    }

    /// One step of the extinction iteration: `q -> 1 - f(1 - q)`, evaluated
    /// in a cancellation-free form per kind.
    pub fn survival_step(&self, u: f64) -> f64 {
        match &self.inner {
            // 1 - (1 + (1-u)^2)/2 = u (2-u)/2
            Inner::Binary => u * (2.0 - u) * 0.5,
            // 1 - (1-q)/(1-q(1-u)) = m u / (1 + m u) with m = q/(1-q)
            Inner::Geometric { q } => {
                let m = q / (1.0 - q);
                m * u / (1.0 + m * u)
            }
            Inner::Stable { beta, c, .. } => u - c * u.powf(1.0 + beta),
            Inner::Table { probs, .. } => {
                // sum_k p_k (1 - (1-u)^k) with each complement computed via
                // expm1/ln_1p, Neumaier-compensated.
                let mut sum = 0.0;
                let mut comp = 0.0;
                let log_om = (-u).ln_1p();
                for (k, &p) in probs.iter().enumerate() {
                    if k == 0 || p == 0.0 {
                        continue;
                    }
                    let w = if u == 1.0 {
                        1.0
                    } else {
                        -f64::exp_m1(k as f64 * log_om)
                    };
                    let term = p * w;
                    let t = sum + term;
                    if sum.abs() >= term.abs() {
                        comp += (sum - t) + term;
                    } else {
                        comp += (term - t) + sum;
                    }
                    sum = t;
                }
                sum + comp
            }
        }
    }

    /// Draws one offspring count.
    #[inline]
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.inner {
            Inner::Binary => {
                if rng.random::<u64>() & 1 == 0 {
                    0
                } else {
                    2
                }
            }
            Inner::Geometric { q } => {
                // Inverse transform: P(K >= k) = q^k.
                let u: f64 = rng.random();
                if u <= 0.0 {
                    0
                } else {
                    (u.ln() / q.ln()) as u64
                }
            }
            Inner::Table { cum, .. } => {
                let u: f64 = rng.random();
                let mut k = 0usize;
                while k + 1 < cum.len() && u >= cum[k] {
                    k += 1;
                }
                k as u64
            }
            Inner::Stable { beta, table, .. } => sample_stable(*beta, table, rng),
        }
    }
}

/// `p_k` of the stable law by direct recurrence.
fn stable_prob(beta: f64, c: f64, k: usize) -> f64 {
    match k {
        0 => c,
        1 => 1.0 - c * (1.0 + beta),
        _ => {
            let mut p = c * (1.0 + beta) * beta / 2.0;
            for j in 2..k {
                p *= (j as f64 - 1.0 - beta) / (j as f64 + 1.0);
            }
            p
        }
    }
}

fn build_stable_table(beta: f64, c: f64, cutoff: usize) -> StableTable {
    let mut cum = Vec::with_capacity(cutoff.min(1 << 21) + 1);
    // Neumaier-compensated cumulative sum.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let add = |sum: &mut f64, comp: &mut f64, x: f64| {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    };

    let p0 = c;
    let p1 = 1.0 - c * (1.0 + beta);
    add(&mut sum, &mut comp, p0);
    cum.push(sum + comp);
    add(&mut sum, &mut comp, p1.max(0.0));
    cum.push(sum + comp);

    let mut p = c * (1.0 + beta) * beta / 2.0;
    let mut k = 2usize;
    loop {
        add(&mut sum, &mut comp, p);
        cum.push(sum + comp);
        if k >= cutoff || p < 1e-18 * (1.0 - (sum + comp)).max(f64::MIN_POSITIVE) {
            break;
        }
        p *= (k as f64 - 1.0 - beta) / (k as f64 + 1.0);
        k += 1;
    }
    let k_max = cum.len() - 1;
    let tail_mass = (1.0 - (sum + comp)).max(0.0);

    let mut head = [1.0f64; HEAD_LEN];
    for (i, h) in head.iter_mut().enumerate() {
        *h = cum.get(i).copied().unwrap_or(1.0);
    }
    StableTable {
        cum,
        head,
        tail_mass,
        k_max,
    }
}

#[inline]
fn sample_stable<R: Rng + ?Sized>(beta: f64, table: &StableTable, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let head_top = table.head[HEAD_LEN - 1];
    if u < head_top {
        for (k, &cv) in table.head.iter().enumerate() {
            if u < cv {
                return k as u64;
            }
        }
    }
    let total = 1.0 - table.tail_mass;
    if u < total {
        // Binary search: first k with cum[k] > u.
        return table.cum.partition_point(|&cv| cv <= u) as u64;
    }
    // Conditional power tail: P(K > k | K > k_max) ~ (k/k_max)^{-(1+beta)}.
    let v: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let k = (table.k_max as f64) * v.powf(-1.0 / (1.0 + beta));
    k.min(1e18) as u64 + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{task_stream, StreamDomain};
    use proptest::prelude::*;

    #[test]
    fn binary_critical_atoms() {
        let law = OffspringLaw::binary_critical();
        assert_eq!(law.prob(0), 0.5);
        assert_eq!(law.prob(1), 0.0);
        assert_eq!(law.prob(2), 0.5);
        assert_eq!(law.mean_var(), (1.0, 1.0));
        assert_eq!(law.regime(), Regime::CriticalFiniteVar);
    }

    #[test]
    fn stable_example_half_two_thirds() {
        let law = OffspringLaw::stable(0.5, 2.0 / 3.0).unwrap();
        assert!((law.prob(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!(law.prob(1).abs() < 1e-15);
        assert!((law.prob(2) - 0.25).abs() < 1e-15);
        let (m, v) = law.mean_var();
        assert_eq!(m, 1.0);
        assert!(v.is_infinite());
    }

    #[test]
    fn stable_table_sums_to_one_and_is_nonnegative() {
        // Sum the tabulated head plus the analytic tail remainder.
        let law = OffspringLaw::stable(0.5, 2.0 / 3.0).unwrap();
        let Inner::Stable { table, .. } = &law.inner else {
            unreachable!()
        };
        let last = *table.cum.last().unwrap();
        assert!((last + table.tail_mass - 1.0).abs() < 1e-9);
        // Spot-check monotonicity of the cumulative table.
        for w in table.cum.windows(2).step_by(9973) {
            assert!(w[1] >= w[0]);
        }
        for k in [0, 1, 2, 3, 10, 100, 10_000] {
            assert!(law.prob(k) >= 0.0);
        }
    }

    #[test]
    fn geometric_parameterization() {
        let law = OffspringLaw::geometric(0.8).unwrap();
        // q = m/(1+m) = 4/9, p_0 = 1-q = 5/9.
        assert!((law.prob(0) - 5.0 / 9.0).abs() < 1e-15);
        let (m, v) = law.mean_var();
        assert!((m - 0.8).abs() < 1e-15);
        assert!((v - 1.44).abs() < 1e-12);
        // Moment identity cross-check by series summation.
        let q: f64 = 0.8 / 1.8;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..2000 {
            let p = (1.0 - q) * q.powi(k);
            s1 += k as f64 * p;
            s2 += (k as f64) * (k as f64) * p;
        }
        assert!((s1 - m).abs() < 1e-12);
        assert!((s2 - s1 * s1 - v).abs() < 1e-10);
    }

    #[test]
    fn pgf_closed_forms() {
        let binary = OffspringLaw::binary_critical();
        assert_eq!(binary.pgf(0.0).unwrap(), 0.5);
        assert_eq!(binary.pgf(1.0).unwrap(), 1.0);

        let stable = OffspringLaw::stable(0.5, 2.0 / 3.0).unwrap();
        let f = stable.pgf(0.75).unwrap();
        let expect = 0.75 + (2.0 / 3.0) * 0.25f64.powf(1.5);
        assert!((f - expect).abs() < 1e-15);
        // Cross-check against the truncated series sum.
        let series: f64 = (0..400)
            .map(|k| stable.prob(k) * 0.75f64.powi(k as i32))
            .sum();
        assert!((f - series).abs() < 1e-10);

        let geo = OffspringLaw::geometric(0.8).unwrap();
        assert!((geo.pgf(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(geo.pgf(1.2).is_err());
        assert!(binary.pgf(-0.1).is_err());
    }

    #[test]
    fn pgf_derivative_matches_mean() {
        // One-sided finite difference at 1 with h = 1e-6, within 1e-4.
        for law in [
            OffspringLaw::binary_critical(),
            OffspringLaw::geometric(0.8).unwrap(),
            OffspringLaw::table(&[0.4, 0.3, 0.2, 0.1]).unwrap(),
        ] {
            let h = 1e-6;
            let d = (law.pgf(1.0).unwrap() - law.pgf(1.0 - h).unwrap()) / h;
            assert!(
                (d - law.mean()).abs() < 1e-4,
                "pgf'(1) = {d} vs mean {}",
                law.mean()
            );
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(OffspringLaw::table(&[0.5, 0.6]).is_err());
        assert!(OffspringLaw::table(&[-0.1, 1.1]).is_err());
        assert!(OffspringLaw::table(&[0.2, 0.2, 0.6]).is_err()); // mean 1.4
        assert!(OffspringLaw::geometric(1.0).is_err());
        assert!(OffspringLaw::stable(1.2, 0.3).is_err());
        assert!(OffspringLaw::stable(0.5, 0.7).is_err()); // c > 1/(1+beta)
    }

    #[test]
    fn degenerate_tables_construct() {
        // Oracle fixtures: immediate extinction and deterministic lineage.
        let dead = OffspringLaw::table(&[1.0]).unwrap();
        assert_eq!(dead.regime(), Regime::Subcritical);
        let line = OffspringLaw::table(&[0.0, 1.0]).unwrap();
        assert_eq!(line.regime(), Regime::CriticalFiniteVar);
        assert_eq!(line.variance(), 0.0);
    }

    #[test]
    fn sample_binary_mean_clt() {
        let law = OffspringLaw::binary_critical();
        let mut rng = task_stream(7, StreamDomain::Calibration, &[0]);
        let n = 1_000_000usize;
        let sum: u64 = (0..n).map(|_| law.sample_count(&mut rng)).sum();
        let mean = sum as f64 / n as f64;
        // sigma = 1, so a 4/sqrt(n) envelope.
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn sample_geometric_p0_frequency() {
        let law = OffspringLaw::geometric(0.8).unwrap();
        let mut rng = task_stream(8, StreamDomain::Calibration, &[0]);
        let n = 1_000_000usize;
        let zeros = (0..n).filter(|_| law.sample_count(&mut rng) == 0).count();
        let p0 = 5.0 / 9.0;
        let sigma = (p0 * (1.0 - p0) / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - p0).abs() < 3.0 * sigma);
    }

    #[test]
    fn sample_stable_tail_frequency() {
        let law = OffspringLaw::stable(0.5, 2.0 / 3.0).unwrap();
        // Series oracle for P(K >= 100).
        let mut tail = 1.0;
        for k in 0..100 {
            tail -= law.prob(k);
        }
        let mut rng = task_stream(9, StreamDomain::Calibration, &[0]);
        let n = 1_000_000usize;
        let hits = (0..n).filter(|_| law.sample_count(&mut rng) >= 100).count();
        let sigma = (tail * (1.0 - tail) / n as f64).sqrt();
        assert!(
            (hits as f64 / n as f64 - tail).abs() < 3.0 * sigma,
            "tail freq {} vs {}",
            hits as f64 / n as f64,
            tail
        );
    }

    #[test]
    fn empirical_law_total_variation() {
        // TV distance below 5e-3 over 10^6 draws.
        for law in [
            OffspringLaw::binary_critical(),
            OffspringLaw::geometric(0.8).unwrap(),
            OffspringLaw::stable(0.5, 2.0 / 3.0).unwrap(),
            OffspringLaw::table(&[0.5, 0.2, 0.2, 0.1]).unwrap(),
        ] {
            let mut rng = task_stream(10, StreamDomain::Calibration, &[law.prob(0).to_bits()]);
            let n = 1_000_000usize;
            let mut counts = vec![0u64; 4096];
            let mut overflow = 0u64;
            for _ in 0..n {
                let k = law.sample_count(&mut rng) as usize;
                if k < counts.len() {
                    counts[k] += 1;
                } else {
                    overflow += 1;
                }
            }
            let mut tv = 0.0;
            let mut model_tail = 1.0;
            for (k, &cnt) in counts.iter().enumerate() {
                let p = law.prob(k);
                model_tail -= p;
                tv += (cnt as f64 / n as f64 - p).abs();
            }
            tv += (overflow as f64 / n as f64 - model_tail.max(0.0)).abs();
            assert!(tv / 2.0 < 5e-3, "TV {tv} for {:?}", law.kind());
        }
    }

    #[test]
    fn stable_beta_one_is_quadratic() {
        let law = OffspringLaw::stable(1.0, 0.4).unwrap();
        assert!((law.prob(0) - 0.4).abs() < 1e-15);
        assert!((law.prob(1) - 0.2).abs() < 1e-15);
        assert!((law.prob(2) - 0.4).abs() < 1e-15);
        assert_eq!(law.prob(3), 0.0);
        assert_eq!(law.variance(), 0.8);
    }

    proptest! {
        // f is non-decreasing, convex, and dominates s on [0,1] when m <= 1.
        #[test]
        fn pgf_shape(raw in proptest::collection::vec(0.01f64..1.0, 2..6)) {
            let sum: f64 = raw.iter().sum();
            let mut probs: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let mean: f64 = probs.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
            if mean > 0.99 {
                // Scale the tail mass down onto p_0 until safely subcritical.
                let t = 0.99 / mean;
                let mut moved = 0.0;
                for p in probs.iter_mut().skip(1) {
                    moved += *p * (1.0 - t);
                    *p *= t;
                }
                probs[0] += moved;
            }
            let law = OffspringLaw::table(&probs).unwrap();
            let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&s| law.pgf(s).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            for (i, w) in vals.windows(3).enumerate() {
                let _ = i;
                prop_assert!(w[0] + w[2] >= 2.0 * w[1] - 1e-9);
            }
            for (s, v) in grid.iter().zip(&vals) {
                prop_assert!(v + 1e-12 >= *s);
            }
        }
    }
}
