//! Closed-form limit values and bounds for the renormalized empty-ball tail
//! `P(R_n / a_n >= r)`, plus the geometric constants they need.
//!
//! Sharp limits exist for three regimes:
//!
//! * d = 1 critical, finite variance: `exp(-4 r / sigma^2)`;
//! * critical stable with index beta <= 1/d: `exp(-v_d(r) (1/beta)^{1/beta})`;
//! * subcritical: `exp(-Q(0) v_d(r))`.
//!
//! For d >= 3 (critical, finite variance) only a band is known:
//! `exp(-v_d(r)) <= lim <= exp(-v_d(r) / (1 + sigma^2 C_d(r) r^2))`.
//! For d = 2 no explicit constants are known at all; the advisory corridor
//! emitted here brackets `exp(-2 pi r^2 / sigma^2)` by a factor K = 2 in the
//! exponent and is labeled non-rigorous in every output.

use crate::error::{Error, Result};
use crate::gw;
use crate::offspring::{OffspringLaw, Regime};
use crate::steps::StepLaw;

/// `Gamma(two_x / 2)` for positive half-integer arguments, exactly.
fn gamma_half(two_x: u64) -> f64 {
    assert!(two_x > 0);
    if two_x.is_multiple_of(2) {
        // Gamma(k) = (k-1)!
        let k = two_x / 2;
        (1..k).map(|j| j as f64).product()
    } else {
        // Gamma(k + 1/2) = sqrt(pi) * prod_{j=1..k} (j - 1/2)
        let k = two_x / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for j in 1..=k {
            g *= j as f64 - 0.5;
        }
        g
    }
}

/// Volume `v_d(r) = pi^{d/2} r^d / Gamma(d/2 + 1)` of the d-ball.
pub fn ball_volume(d: u32, r: f64) -> f64 {
    std::f64::consts::PI.powf(d as f64 / 2.0) * r.powi(d as i32) / gamma_half(d as u64 + 2)
}

/// The second-moment constant of the d >= 3 band:
/// `C_d(r) = 2 [1 + 6 E|X1|^3 / (r E|X1|^2 ^{3/2})]^d / (d-2) + 1`.
pub fn cd_r(step: &StepLaw, d: u32, r: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!(
            "C_d(r) is defined for d >= 3, got d = {d}"
        )));
    }
    if r <= 0.0 {
        return Err(Error::Domain("C_d(r) requires r > 0".into()));
    }
    let m3 = step.abs_moment(3.0)?;
    let m2 = step.abs_moment(2.0)?;
    let c4 = 6.0 * m3 / m2.powf(1.5);
    Ok(2.0 * (1.0 + c4 / r).powi(d as i32) / (d as f64 - 2.0) + 1.0)
}

/// Limit value or band for `P(R_n / a_n >= r)` as `n -> infinity`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TheoryBand {
    pub regime: Regime,
    pub d: u32,
    pub r: f64,
    /// Certified lower bound on the limit.
    pub lo: f64,
    /// Certified upper bound on the limit.
    pub hi: f64,
    /// Present when the limit is sharp (lo = hi).
    pub exact: Option<f64>,
    /// Non-rigorous trend corridor (d = 2 only).
    pub advisory: Option<(f64, f64)>,
    pub description: String,
}

/// Exponent bracket factor for the d = 2 advisory corridor.
const D2_CORRIDOR_K: f64 = 2.0;

/// Computes the theory band for `(law, step, d, r)`.
pub fn theory_band(law: &OffspringLaw, step: &StepLaw, d: u32, r: f64) -> Result<TheoryBand> {
    if r <= 0.0 {
        return Err(Error::Domain("theory band requires r > 0".into()));
    }
    if step.dim() != d {
        return Err(Error::Regime(format!(
            "step law dimension {} does not match requested d = {d}",
            step.dim()
        )));
    }
    // Validating the scale also rejects degenerate laws and beta > 1/d.
    let _ = gw::scale_policy(law, d)?;
    let regime = law.regime();
    let band = match regime {
        Regime::CriticalFiniteVar => {
            let sigma2 = law.variance();
            match d {
                1 => {
                    let e = (-4.0 * r / sigma2).exp();
                    TheoryBand {
                        regime,
                        d,
                        r,
                        lo: e,
                        hi: e,
                        exact: Some(e),
                        advisory: None,
                        description: "d=1 critical limit exp(-4r/sigma^2)".into(),
                    }
                }
                2 => {
                    let x = 2.0 * std::f64::consts::PI * r * r / sigma2;
                    TheoryBand {
                        regime,
                        d,
                        r,
                        lo: 0.0,
                        hi: 1.0,
                        exact: None,
                        advisory: Some(((-D2_CORRIDOR_K * x).exp(), (-x / D2_CORRIDOR_K).exp())),
                        description: "d=2: no explicit constants; advisory corridor around \
                             exp(-2 pi r^2/sigma^2), non-rigorous"
                            .into(),
                    }
                }
                _ => {
                    let v = ball_volume(d, r);
                    let c = cd_r(step, d, r)?;
                    TheoryBand {
                        regime,
                        d,
                        r,
                        lo: (-v).exp(),
                        hi: (-v / (1.0 + sigma2 * c * r * r)).exp(),
                        exact: None,
                        advisory: None,
                        description: format!(
                            "d>=3 critical band [exp(-v_d(r)), exp(-v_d(r)/(1+sigma^2 C r^2))], \
                             C_d(r) = {c:.6}"
                        ),
                    }
                }
            }
        }
        Regime::CriticalStable => {
            let beta = law.beta().expect("stable law");
            let v = ball_volume(d, r);
            let e = (-v * (1.0 / beta).powf(1.0 / beta)).exp();
            TheoryBand {
                regime,
                d,
                r,
                lo: e,
                hi: e,
                exact: Some(e),
                advisory: None,
                description: "stable limit exp(-v_d(r) (1/beta)^(1/beta))".into(),
            }
        }
        Regime::Subcritical => {
            let q0 = gw::q_function_at_zero(law, 1e-10)?;
            let e = (-q0 * ball_volume(d, r)).exp();
            TheoryBand {
                regime,
                d,
                r,
                lo: e,
                hi: e,
                exact: Some(e),
                advisory: None,
                description: format!("subcritical limit exp(-Q(0) v_d(r)), Q(0) = {q0:.9}"),
            }
        }
    };
    Ok(band)
}
