//! Galton-Watson survival numerics and renormalization scales.
//!
//! The survival probability `q_n = P(|Z_n| > 0)` from a single ancestor
//! obeys `q_{n+1} = 1 - f(1 - q_n)`; each law evaluates that map in a
//! cancellation-free closed form (see `OffspringLaw::survival_step`). The
//! three decay regimes are
//!
//! * critical, finite variance: `n q_n -> 2 / sigma^2`;
//! * critical stable: `n q_n^beta c -> 1 / beta`;
//! * subcritical: `m^{-n} q_n -> Q(0) > 0`.
//!
//! `Q` is classically characterized by `Q(f(s)) = m Q(s)` with `Q(1) = 0`,
//! `Q'(1) = 1`; the toolkit never solves that functional equation and
//! computes `Q(0)` as the limit of `m^{-n} q_n`, which is the numerically
//! unambiguous route.

use crate::error::{Error, Result};
use crate::offspring::{OffspringLaw, Regime};

/// The exact survival-probability sequence `q_0..q_{n_max}`.
#[derive(Clone, Debug)]
pub struct SurvivalSequence {
    pub law: OffspringLaw,
    pub q: Vec<f64>,
    pub n_max: usize,
}

impl SurvivalSequence {
    pub fn q_at(&self, n: usize) -> f64 {
        self.q[n]
    }
}

/// Iterates the survival map exactly: `q[0] = 1`, `q[n+1] = 1 - f(1 - q[n])`.
pub fn survival_sequence(law: &OffspringLaw, n_max: usize) -> SurvivalSequence {
    let mut q = Vec::with_capacity(n_max + 1);
    let mut u = 1.0f64;
    q.push(u);
    for _ in 0..n_max {
        u = law.survival_step(u);
        q.push(u);
    }
    SurvivalSequence {
        law: law.clone(),
        q,
        n_max,
    }
}

/// The limit constant of the matching survival asymptotic:
/// `2/sigma^2` (critical finite variance), `1/beta` (critical stable, as the
/// limit of `n q_n^beta c`), or `Q(0)` (subcritical).
pub fn survival_constant(law: &OffspringLaw) -> Result<f64> {
    match law.regime() {
        Regime::CriticalFiniteVar => {
            let v = law.variance();
            if v <= 0.0 {
                return Err(Error::Regime(
                    "survival asymptotics require positive offspring variance".into(),
                ));
            }
            Ok(2.0 / v)
        }
        Regime::CriticalStable => Ok(1.0 / law.beta().expect("stable law")),
        Regime::Subcritical => q_function_at_zero(law, 1e-10),
    }
}

/// `Q(0) = lim m^{-n} q_n` for a subcritical law, iterated until the ratio
/// sequence stabilizes to relative tolerance `tol`.
///
/// The iteration tracks `t_n = m^{-n} q_n` through the multiplicative update
/// `t_{n+1} = t_n * g(q_n)/(m q_n)` with `g(q) = 1 - f(1-q)`, so no explicit
/// `m^{-n}` amplification of round-off ever occurs.
pub fn q_function_at_zero(law: &OffspringLaw, tol: f64) -> Result<f64> {
    if law.regime() != Regime::Subcritical {
        return Err(Error::Regime(format!(
            "Q(0) is defined for subcritical laws, got {}",
            law.regime()
        )));
    }
    if law.prob(0) >= 1.0 {
        return Err(Error::Regime(
            "degenerate law p_0 = 1 has no survival asymptotics".into(),
        ));
    }
    let m = law.mean();
    let max_iter = 100_000usize;
    let mut q = 1.0f64;
    let mut t = 1.0f64;
    for _ in 0..max_iter {
        let q_next = law.survival_step(q);
        if q_next <= 0.0 {
            break; // underflow: the ratio has long stabilized or never will
        }
        let t_next = t * q_next / (m * q);
        let rel = (t_next - t).abs() / t.max(f64::MIN_POSITIVE);
        q = q_next;
        t = t_next;
        if rel < tol {
            return Ok(t);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        context: format!(
            "m^-n q_n did not stabilize to {tol}; the law likely violates the k log k moment"
        ),
    })
}

/// Renormalization scale `b_n = (n c)^{1/(beta d)}` of the stable regime.
pub fn scale_bn(law: &OffspringLaw, n: u64, d: u32) -> Result<f64> {
    let (Some(beta), Some(c)) = (law.beta(), law.c_coef()) else {
        return Err(Error::Regime(
            "b_n is defined for stable offspring laws".into(),
        ));
    };
    if beta > 1.0 / d as f64 + 1e-12 {
        return Err(Error::Regime(format!(
            "stable index beta = {beta} exceeds 1/d = {}; the heavy-tailed scaling \
             regime requires beta <= 1/d",
            1.0 / d as f64
        )));
    }
    Ok((n as f64 * c).powf(1.0 / (beta * d as f64)))
}

/// The empty-ball renormalization `a_n` per regime and dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalePolicy {
    /// d = 1 critical: `a_n = n`.
    Linear,
    /// d = 2 critical: `a_n = sqrt(n)`.
    SqrtN,
    /// d >= 3 critical: `a_n = 1`.
    Unit,
    /// Critical stable: `a_n = b_n = (n c)^{1/(beta d)}`.
    StableBn { beta: f64, c: f64, d: u32 },
    /// Subcritical: `a_n = (1/m)^{n/d}`.
    SubcriticalExp { mean: f64, d: u32 },
}

impl ScalePolicy {
    pub fn a(&self, n: u64) -> f64 {
        match *self {
            ScalePolicy::Linear => n as f64,
            ScalePolicy::SqrtN => (n as f64).sqrt(),
            ScalePolicy::Unit => 1.0,
            ScalePolicy::StableBn { beta, c, d } => (n as f64 * c).powf(1.0 / (beta * d as f64)),
            ScalePolicy::SubcriticalExp { mean, d } => (1.0 / mean).powf(n as f64 / d as f64),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ScalePolicy::Linear => "n",
            ScalePolicy::SqrtN => "sqrt(n)",
            ScalePolicy::Unit => "1",
            ScalePolicy::StableBn { .. } => "b_n",
            ScalePolicy::SubcriticalExp { .. } => "m^(-n/d)",
        }
    }
}

/// Selects the scale matching `(law regime, d)`; rejects unsupported
/// combinations such as stable laws with `beta > 1/d`.
pub fn scale_policy(law: &OffspringLaw, d: u32) -> Result<ScalePolicy> {
    if d == 0 {
        return Err(Error::Regime("dimension must be >= 1".into()));
    }
    if law.prob(0) >= 1.0 || law.prob(1) >= 1.0 {
        return Err(Error::Regime(
            "degenerate offspring law (p_0 = 1 or p_1 = 1) has no scaling regime".into(),
        ));
    }
    match law.regime() {
        Regime::CriticalFiniteVar => {
            if law.variance() <= 0.0 {
                return Err(Error::Regime("critical regime requires sigma^2 > 0".into()));
            }
            Ok(match d {
                1 => ScalePolicy::Linear,
                2 => ScalePolicy::SqrtN,
                _ => ScalePolicy::Unit,
            })
        }
        Regime::CriticalStable => {
            let beta = law.beta().expect("stable law");
            let c = law.c_coef().expect("stable law");
            if beta > 1.0 / d as f64 + 1e-12 {
                return Err(Error::Regime(format!(
                    "stable index beta = {beta} exceeds 1/d = {} (d = {d}); \
                     the b_n scaling regime requires beta <= 1/d",
                    1.0 / d as f64
                )));
            }
            Ok(ScalePolicy::StableBn { beta, c, d })
        }
        Regime::Subcritical => Ok(ScalePolicy::SubcriticalExp {
            mean: law.mean(),
            d,
        }),
    }
}
