//! Displacement laws, certified tail bounds, and truncation windows.
//!
//! A step law is a mean-zero d-dimensional vector with iid components. The
//! truncation window machinery certifies a radius `L` such that initial
//! ancestors outside the window contribute at most `eps` to the hit
//! integral: the expected number of generation-n descendants that a single
//! ancestor at `x` places inside the target ball is at most
//! `m^n * P(|W_n| >= |x| - ball)`, and the chosen deviation bound makes the
//! radial integral of that envelope computable.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::limits::ball_volume;

/// Component law of a step vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepComponent {
    StandardGaussian,
    /// +1 or -1, each with probability 1/2.
    Rademacher,
    /// Uniform on `(-a, a)`.
    Uniform {
        half_width: f64,
    },
    /// Symmetric Pareto: `P(|X| > t) = t^{-alpha0}` for `t >= 1`.
    ParetoSymmetric {
        tail_index: f64,
    },
}

/// d-dimensional displacement law with iid mean-zero components.
#[derive(Clone, Copy, Debug)]
pub struct StepLaw {
    dim: u32,
    component: StepComponent,
    /// Supremum of finite absolute-moment orders (inclusive except Pareto).
    alpha: f64,
}

impl StepLaw {
    pub fn new(component: StepComponent, dim: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameters("dimension must be >= 1".into()));
        }
        let alpha = match component {
            StepComponent::StandardGaussian | StepComponent::Rademacher => f64::INFINITY,
            StepComponent::Uniform { half_width } => {
                if !(half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::InvalidParameters(format!(
                        "uniform half-width must be positive, got {half_width}"
                    )));
                }
                f64::INFINITY
            }
            StepComponent::ParetoSymmetric { tail_index } => {
                if tail_index.is_nan() || tail_index <= 1.0 {
                    return Err(Error::InvalidParameters(format!(
                        "pareto tail index must exceed 1 (finite mean), got {tail_index}"
                    )));
                }
                tail_index
            }
        };
        Ok(StepLaw {
            dim,
            component,
            alpha,
        })
    }

    pub fn gaussian(dim: u32) -> Self {
        StepLaw::new(StepComponent::StandardGaussian, dim).unwrap()
    }

    pub fn rademacher(dim: u32) -> Self {
        StepLaw::new(StepComponent::Rademacher, dim).unwrap()
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn component(&self) -> StepComponent {
        self.component
    }

    /// Supremum of finite moment orders; for Pareto the supremum itself is
    /// not attained.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Half-width of the component support, when bounded.
    pub fn support_half_width(&self) -> Option<f64> {
        match self.component {
            StepComponent::Rademacher => Some(1.0),
            StepComponent::Uniform { half_width } => Some(half_width),
            _ => None,
        }
    }

    fn moment_order_ok(&self, k: f64) -> bool {
        match self.component {
            StepComponent::ParetoSymmetric { tail_index } => k < tail_index,
            _ => true,
        }
    }

    /// Exact absolute moment `E|X^{(1)}|^k` of one component, `k >= 1`.
    pub fn abs_moment(&self, k: f64) -> Result<f64> {
        if k < 1.0 {
            return Err(Error::Domain(format!("moment order {k} < 1")));
        }
        if !self.moment_order_ok(k) {
            return Err(Error::MomentUnavailable {
                order: k,
                alpha: self.alpha,
            });
        }
        Ok(match self.component {
            StepComponent::StandardGaussian => {
                // E|Z|^k = 2^{k/2} Gamma((k+1)/2) / sqrt(pi)
                2f64.powf(k / 2.0) * libm::tgamma((k + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
            }
            StepComponent::Rademacher => 1.0,
            StepComponent::Uniform { half_width } => half_width.powf(k) / (k + 1.0),
            StepComponent::ParetoSymmetric { tail_index } => tail_index / (tail_index - k),
        })
    }

    /// Draws one step, appending `d` coordinates to `out`.
    #[inline]
    pub fn sample_step_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        for _ in 0..self.dim {
            out.push(self.sample_component(rng));
        }
    }

    /// Draws one step as a fresh vector.
    pub fn sample_step<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim as usize);
        self.sample_step_into(rng, &mut v);
        v
    }

    #[inline]
    pub fn sample_component<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.component {
            StepComponent::StandardGaussian => rng.sample(StandardNormal),
            StepComponent::Rademacher => {
                if rng.random::<u64>() & 1 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            StepComponent::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            StepComponent::ParetoSymmetric { tail_index } => {
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let mag = u.powf(-1.0 / tail_index);
                if rng.random::<u64>() & 1 == 0 {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    /// Certified upper bound on the one-component deviation
    /// `P(|W_n^{(1)}| >= x n)`, preferring the sharpest available family
    /// (exact Gaussian > Hoeffding > Nagaev). Always in `[0, 1]`.
    pub fn tail_bound(&self, n: u64, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        self.component_tail_abs(n, x * n as f64)
    }

    /// Same bound parameterized by the absolute deviation `u`.
    pub fn component_tail_abs(&self, n: u64, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Ok(1.0);
        }
        let nf = n as f64;
        Ok(match self.component {
            StepComponent::StandardGaussian => {
                // W_n^{(1)} ~ N(0, n): exact two-sided tail.
                libm::erfc(u / (2.0 * nf).sqrt()).min(1.0)
            }
            StepComponent::Rademacher => hoeffding(nf, u, 1.0),
            StepComponent::Uniform { half_width } => hoeffding(nf, u, half_width),
            StepComponent::ParetoSymmetric { tail_index } => self.nagaev_tail(nf, u, tail_index),
        })
    }

    /// Two-sided Nagaev-type bound for heavy-tailed components, minimized
    /// over admissible moment orders in `[1, min(2, alpha0))`.
    fn nagaev_tail(&self, n: f64, u: f64, tail_index: f64) -> f64 {
        let hi = 2f64.min(tail_index * (1.0 - 1e-9));
        let mut best = 1.0f64;
        let grid = 8;
        for i in 0..=grid {
            let a = 1.0 + (hi - 1.0) * i as f64 / grid as f64;
            if !self.moment_order_ok(a) {
                continue;
            }
            let ma = tail_index / (tail_index - a); // E|X|^a
                                                    // Validity of the truncation argument: (u/2)^a >= 4 n E|X|^a.
            if (u / 2.0).powf(a) < 4.0 * n * ma {
                continue;
            }
            let c1 = (2f64.powf(a) + 2f64.powf(a - 1.0) * std::f64::consts::E) * ma;
            // One-sided constant; the symmetric two-sided event costs 2x.
            let b = 2.0 * c1 * n / u.powf(a);
            best = best.min(b);
        }
        best.min(1.0)
    }

    /// Supremum of the density of `W_n` over positions at distance `>= gap`
    /// from the origin, when the walk density is known in closed form
    /// (Gaussian components: `N(0, n I)`).
    pub fn walk_density_bound(&self, n: u64, gap: f64) -> Option<f64> {
        match self.component {
            StepComponent::StandardGaussian => {
                let nf = n as f64;
                let peak = (2.0 * std::f64::consts::PI * nf).powf(-(self.dim as f64) / 2.0);
                Some(peak * (-gap.max(0.0).powi(2) / (2.0 * nf)).exp())
            }
            _ => None,
        }
    }

    /// Certified bound on the d-dimensional deviation `P(|W_n| >= u)` in
    /// Euclidean norm. Gaussian walks use the exact chi-square tail for
    /// d <= 3; everything else takes a union bound over components.
    pub fn norm_tail_abs(&self, n: u64, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Ok(1.0);
        }
        let d = self.dim as f64;
        if let Some(a) = self.support_half_width() {
            if u > n as f64 * a * d.sqrt() {
                return Ok(0.0);
            }
        }
        if self.component == StepComponent::StandardGaussian && self.dim <= 3 {
            // |W_n|^2 / n ~ chi-square with d degrees of freedom.
            let z = u * u / n as f64;
            let q = match self.dim {
                1 => libm::erfc((z / 2.0).sqrt()),
                2 => (-z / 2.0).exp(),
                3 => {
                    libm::erfc((z / 2.0).sqrt())
                        + (2.0 * z / std::f64::consts::PI).sqrt() * (-z / 2.0).exp()
                }
                _ => unreachable!(),
            };
            return Ok(q.min(1.0));
        }
        let per = self.component_tail_abs(n, u / d.sqrt())?;
        Ok((d * per).min(1.0))
    }
}

fn hoeffding(n: f64, u: f64, a: f64) -> f64 {
    (2.0 * (-u * u / (2.0 * n * a * a)).exp()).min(1.0)
}

/// Which bound family certified a truncation window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum WindowMethod {
    GaussianTail,
    Hoeffding,
    Nagaev,
    /// Hard cutoff from bounded step support; neglected mass is exactly 0.
    SupportRange,
    /// Estimated from presimulated walks, inflated 3x; not certified.
    EmpiricalQuantile,
}

/// A finite window for the initial Poisson field, with a bound on the hit
/// mass neglected outside it.
#[derive(Clone, Copy, Debug)]
pub struct TruncationWindow {
    /// Window radius; always at least the target ball radius.
    pub radius: f64,
    /// Certified (or, for `EmpiricalQuantile`, estimated) neglected mass.
    pub eps_trunc: f64,
    pub method: WindowMethod,
}

/// Upper bound on the hit mass an initial field outside radius `L`
/// contributes: the radial integral of
/// `min(1, m^n P(|W_n| >= u)) * surface * (u + ball)^{d-1}` over
/// `u > L - ball`, plus a certified remainder beyond the quadrature range.
pub fn neglected_mass(
    step: &StepLaw,
    offspring_mean: f64,
    n: u64,
    ball_radius: f64,
    window_radius: f64,
) -> Result<f64> {
    let d = step.dim();
    let surface = d as f64 * ball_volume(d, 1.0);
    let mn = offspring_mean.powi(n as i32);
    let lo = (window_radius - ball_radius).max(0.0);

    let hard = step
        .support_half_width()
        .map(|a| n as f64 * a * (d as f64).sqrt());
    if let Some(h) = hard {
        if lo >= h {
            return Ok(0.0);
        }
    }

    let g = |u: f64| -> f64 {
        let t = (mn * step.norm_tail_abs(n, u).expect("bounded order")).min(1.0);
        t * surface * (u + ball_radius).powi(d as i32 - 1)
    };

    // Quadrature cutoff: walk the envelope out until it is negligible, then
    // add a closed-form remainder bound.
    let mut hi = (lo + 1.0).max(2.0 * (n as f64).sqrt() + lo);
    if let Some(h) = hard {
        hi = h;
    } else {
        let mut guard = 0;
        while g(hi) > 1e-18 && guard < 300 {
            hi *= 1.25;
            guard += 1;
        }
    }
    let integral = adaptive_simpson(&g, lo, hi, 1e-4);
    let remainder = if hard.is_some() {
        0.0
    } else {
        tail_remainder(step, mn, n, ball_radius, hi)
    };
    Ok(integral + remainder)
}

/// Closed-form over-bound of the neglected-mass integrand beyond `u0`.
fn tail_remainder(step: &StepLaw, mn: f64, n: u64, ball: f64, u0: f64) -> f64 {
    let d = step.dim() as f64;
    let surface = d * ball_volume(step.dim(), 1.0);
    match step.component {
        StepComponent::StandardGaussian
        | StepComponent::Rademacher
        | StepComponent::Uniform { .. } => {
            // Envelope 2 d e^{-u^2/s} with s = 2 n a^2 d (union-bound scale);
            // e^{-u^2/s} <= e^{-u0^2/s} e^{-2 u0 (u-u0)/s} for u >= u0.
            let a = match step.component {
                StepComponent::Uniform { half_width } => half_width,
                _ => 1.0,
            };
            let s = 2.0 * n as f64 * a * a * d;
            let c = mn * 2.0 * d * (-u0 * u0 / s).exp() * surface;
            let lam = 2.0 * u0 / s;
            // int_0^inf e^{-lam t} (t + u0 + ball)^{d-1} dt for d = 1, 2, 3.
            let aa = u0 + ball;
            let poly = match step.dim() {
                1 => 1.0 / lam,
                2 => aa / lam + 1.0 / (lam * lam),
                _ => aa * aa / lam + 2.0 * aa / (lam * lam) + 2.0 / (lam * lam * lam),
            };
            c * poly
        }
        StepComponent::ParetoSymmetric { tail_index } => {
            // Envelope C n u^{-a} with a < min(2, alpha0); (u+ball)^{d-1} <= (2u)^{d-1}
            // for u >= ball. Integrable only when a > d.
            let a = 2f64.min(tail_index * (1.0 - 1e-9));
            if a <= d {
                return f64::INFINITY;
            }
            let ma = tail_index / (tail_index - a);
            let c1 = (2f64.powf(a) + 2f64.powf(a - 1.0) * std::f64::consts::E) * ma;
            let u_eff = u0.max(ball).max(1.0);
            let dd = step.dim() as f64;
            mn * 2.0
                * c1
                * dd.powf(1.0 + a / 2.0)
                * n as f64
                * surface
                * 2f64.powf(d - 1.0)
                * u_eff.powf(d - a)
                / (a - d)
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    // Split the range into a few panels first; the integrand can have a
    // plateau (clamped at 1) followed by fast decay.
    let panels = 16;
    let mut total = 0.0;
    for i in 0..panels {
        let x0 = a + (b - a) * i as f64 / panels as f64;
        let x1 = a + (b - a) * (i + 1) as f64 / panels as f64;
        let (f0, f1, fm) = (f(x0), f(x1), f(0.5 * (x0 + x1)));
        let whole = simpson(x0, f0, x1, f1, fm);
        let tol = rel_tol * whole.abs().max(1e-300);
        total += recurse(f, x0, f0, x1, f1, fm, whole, tol, 40);
    }
    total
}

/// Finds the smallest window radius on a geometric grid whose neglected
/// mass is certified below `eps`.
pub fn truncation_radius(
    step: &StepLaw,
    offspring_mean: f64,
    n: u64,
    ball_radius: f64,
    eps: f64,
) -> Result<TruncationWindow> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    if ball_radius < 0.0 {
        return Err(Error::Domain("negative ball radius".into()));
    }
    let method = match step.component() {
        StepComponent::StandardGaussian => WindowMethod::GaussianTail,
        StepComponent::Rademacher | StepComponent::Uniform { .. } => WindowMethod::Hoeffding,
        StepComponent::ParetoSymmetric { .. } => WindowMethod::Nagaev,
    };
    let hard = step
        .support_half_width()
        .map(|a| ball_radius + n as f64 * a * (step.dim() as f64).sqrt());

    // Degenerate acceptance at the ball edge.
    let at_ball = neglected_mass(step, offspring_mean, n, ball_radius, ball_radius)?;
    if at_ball <= eps {
        return Ok(TruncationWindow {
            radius: ball_radius,
            eps_trunc: at_ball,
            method,
        });
    }

    let u_cap = 1e4 * (ball_radius + n as f64);
    let u_min = 1e-3;
    let ratio = 2f64.powf(0.125);
    let steps_total = ((u_cap / u_min).ln() / ratio.ln()).ceil() as u64 + 1;

    let feasible = |j: u64| -> Result<Option<f64>> {
        let u = u_min * ratio.powi(j as i32);
        let l = ball_radius + u;
        let mass = neglected_mass(step, offspring_mean, n, ball_radius, l)?;
        Ok(if mass <= eps { Some(mass) } else { None })
    };

    // The mass is non-increasing in the radius: binary search the grid.
    let mut lo = 0u64; // infeasible (or untested)
    let mut hi = steps_total;
    let top = feasible(hi)?;
    let mut best = match (top, hard) {
        (Some(m), _) => Some((hi, m)),
        (None, Some(_)) => None,
        (None, None) => {
            return Err(Error::WindowUnbounded {
                limit: 1e4 * (ball_radius + n as f64),
                eps,
            })
        }
    };
    if best.is_some() {
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            match feasible(mid)? {
                Some(m) => {
                    hi = mid;
                    best = Some((mid, m));
                }
                None => lo = mid,
            }
        }
    }

    let grid_window = best.map(|(j, m)| (ball_radius + u_min * ratio.powi(j as i32), m));
    match (grid_window, hard) {
        (Some((l, _)), Some(h)) if h < l => Ok(TruncationWindow {
            radius: h,
            eps_trunc: 0.0,
            method: WindowMethod::SupportRange,
        }),
        (Some((l, m)), _) => Ok(TruncationWindow {
            radius: l,
            eps_trunc: m,
            method,
        }),
        (None, Some(h)) => Ok(TruncationWindow {
            radius: h,
            eps_trunc: 0.0,
            method: WindowMethod::SupportRange,
        }),
        (None, None) => unreachable!("handled above"),
    }
}

/// Non-certified window from presimulated walk norms, inflated by 3x.
pub fn empirical_truncation_radius<R: Rng + ?Sized>(
    step: &StepLaw,
    offspring_mean: f64,
    n: u64,
    ball_radius: f64,
    eps: f64,
    samples: usize,
    rng: &mut R,
) -> Result<TruncationWindow> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let d = step.dim() as usize;
    let mut norms = Vec::with_capacity(samples);
    let mut pos = vec![0.0f64; d];
    for _ in 0..samples {
        pos.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..n {
            for x in pos.iter_mut() {
                *x += step.sample_component(rng);
            }
        }
        norms.push(pos.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mn = offspring_mean.powi(n as i32);
    let s = samples as f64;
    let vol = |u: f64| ball_volume(step.dim(), u + ball_radius);
    // Suffix integral of min(1, 3 m^n (rank/S)) over the shells between
    // consecutive order statistics, truncated at the largest sampled norm
    // (this mode is an estimate, never a certificate).
    let mut mass_above = vec![0.0f64; samples + 1];
    for i in (0..samples - 1).rev() {
        let survivors = (samples - i) as f64; // P(|W_n| >= norms[i]) ~ survivors/S
        let shell = (vol(norms[i + 1]) - vol(norms[i])).max(0.0);
        let t = (3.0 * mn * survivors / s).min(1.0);
        mass_above[i] = mass_above[i + 1] + t * shell;
    }
    let idx = mass_above.partition_point(|&m| m > eps);
    if idx >= samples {
        return Err(Error::WindowUnbounded {
            limit: norms[samples - 1] + ball_radius,
            eps,
        });
    }
    Ok(TruncationWindow {
        radius: ball_radius + norms[idx],
        eps_trunc: mass_above[idx],
        method: WindowMethod::EmpiricalQuantile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{task_stream, StreamDomain};

    fn quadrature_abs_moment(k: f64, pdf: impl Fn(f64) -> f64, hi: f64) -> f64 {
        // Plain Simpson on [0, hi], doubled for symmetry.
        let m = 40_000;
        let h = hi / m as f64;
        let mut s = 0.0;
        for i in 0..m {
            let a = i as f64 * h;
            let b = a + h;
            let f = |x: f64| x.powf(k) * pdf(x);
            s += h / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
        }
        2.0 * s
    }

    #[test]
    fn gaussian_abs_moments() {
        let law = StepLaw::gaussian(1);
        let m3 = law.abs_moment(3.0).unwrap();
        assert!((m3 - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // Quadrature oracle.
        let pdf = |x: f64| (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q = quadrature_abs_moment(3.0, pdf, 12.0);
        assert!((m3 - q).abs() < 1e-8, "{m3} vs {q}");
        assert!((law.abs_moment(2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_and_rademacher_moments() {
        let uni = StepLaw::new(StepComponent::Uniform { half_width: 1.0 }, 2).unwrap();
        assert!((uni.abs_moment(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let rad = StepLaw::rademacher(1);
        assert_eq!(rad.abs_moment(3.0).unwrap(), 1.0);
    }

    #[test]
    fn pareto_moments_and_unavailability() {
        let law = StepLaw::new(StepComponent::ParetoSymmetric { tail_index: 3.5 }, 1).unwrap();
        assert!((law.abs_moment(2.0).unwrap() - 3.5 / 1.5).abs() < 1e-12);
        assert!(matches!(
            law.abs_moment(3.5),
            Err(Error::MomentUnavailable { .. })
        ));
        assert!(matches!(
            law.abs_moment(4.0),
            Err(Error::MomentUnavailable { .. })
        ));
    }

    #[test]
    fn sample_step_statistics() {
        let rad = StepLaw::rademacher(1);
        let mut rng = task_stream(11, StreamDomain::Calibration, &[1]);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| rad.sample_component(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3e-3);

        let gau = StepLaw::gaussian(3);
        let mut rng = task_stream(11, StreamDomain::Calibration, &[2]);
        let mut sum2 = 0.0;
        for _ in 0..n {
            let x = gau.sample_component(&mut rng);
            sum2 += x * x;
        }
        let var = sum2 / n as f64;
        assert!((var - 1.0).abs() < 0.01, "var {var}");

        let uni = StepLaw::new(StepComponent::Uniform { half_width: 1.0 }, 2).unwrap();
        let mut rng = task_stream(11, StreamDomain::Calibration, &[3]);
        let v = uni.sample_step(&mut rng);
        assert!(v.len() == 2 && v.iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn tail_bound_values() {
        let gau = StepLaw::gaussian(1);
        let b = gau.tail_bound(100, 1.0).unwrap();
        assert!(b < 1e-21, "gaussian bound {b}");
        assert!(b <= 2.0 * (-50.0f64).exp());

        let rad = StepLaw::rademacher(1);
        let b = rad.tail_bound(50, 1.01).unwrap();
        let expect = 2.0 * (-50.0 * 1.01f64.powi(2) / 2.0).exp();
        assert!((b - expect).abs() < 1e-18);

        // x -> 0+ approaches the cap at 1; x <= 0 is exactly 1.
        assert!(gau.tail_bound(10, 1e-12).unwrap() > 1.0 - 1e-9);
        assert_eq!(rad.tail_bound(10, -1.0).unwrap(), 1.0);
        assert_eq!(rad.tail_bound(10, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn tail_bound_dominates_empirical_tail() {
        // 10^5 walks, 10-point x grid; empirical frequency never exceeds
        // bound + 3 binomial sigma.
        let n = 64u64;
        let runs = 100_000usize;
        for (tag, law) in [
            (1u64, StepLaw::gaussian(1)),
            (2, StepLaw::rademacher(1)),
            (
                3,
                StepLaw::new(StepComponent::ParetoSymmetric { tail_index: 2.5 }, 1).unwrap(),
            ),
        ] {
            let mut rng = task_stream(12, StreamDomain::Calibration, &[tag]);
            let mut walks = Vec::with_capacity(runs);
            for _ in 0..runs {
                let mut w = 0.0;
                for _ in 0..n {
                    w += law.sample_component(&mut rng);
                }
                walks.push(w.abs());
            }
            for i in 1..=10 {
                let x = 0.15 * i as f64;
                let bound = law.tail_bound(n, x).unwrap();
                let freq =
                    walks.iter().filter(|&&w| w >= x * n as f64).count() as f64 / runs as f64;
                let sigma = (freq * (1.0 - freq) / runs as f64).sqrt().max(1e-6);
                assert!(
                    freq <= bound + 3.0 * sigma,
                    "law {tag}: freq {freq} exceeds bound {bound} at x={x}"
                );
            }
        }
    }

    #[test]
    fn tail_bound_non_increasing_in_x() {
        for law in [
            StepLaw::gaussian(1),
            StepLaw::rademacher(1),
            StepLaw::new(StepComponent::ParetoSymmetric { tail_index: 3.0 }, 1).unwrap(),
        ] {
            let mut prev = 1.0f64;
            for i in 1..=40 {
                let b = law.tail_bound(100, 0.05 * i as f64).unwrap();
                assert!(b <= prev + 1e-15);
                prev = b;
            }
        }
    }

    #[test]
    fn truncation_radius_gaussian_d1() {
        // n = 400, ball 200, eps 1e-3: L = 200 + c sqrt(400) with c <= 12.
        let law = StepLaw::gaussian(1);
        let w = truncation_radius(&law, 1.0, 400, 200.0, 1e-3).unwrap();
        let c = (w.radius - 200.0) / 20.0;
        println!("achieved gaussian window constant c = {c:.3}");
        assert!(c > 0.0 && c <= 12.0, "c = {c}");
        assert!(w.eps_trunc <= 1e-3);
        assert_eq!(w.method, WindowMethod::GaussianTail);
        // Certification: recompute the neglected mass at the returned radius.
        let m = neglected_mass(&law, 1.0, 400, 200.0, w.radius).unwrap();
        assert!(m <= 1e-3);
    }

    #[test]
    fn truncation_radius_rademacher_range_bound() {
        let law = StepLaw::rademacher(1);
        let w = truncation_radius(&law, 1.0, 100, 50.0, 1e-4).unwrap();
        assert!(w.radius <= 150.0 + 1e-9, "L = {}", w.radius);
        assert!(w.eps_trunc <= 1e-4);
    }

    #[test]
    fn truncation_radius_monotonicity() {
        let law = StepLaw::gaussian(1);
        // Non-increasing in eps: tightening eps can only widen the window.
        let mut prev = 0.0;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let w = truncation_radius(&law, 1.0, 100, 30.0, eps).unwrap();
            assert!(w.radius >= prev - 1e-9, "eps {eps}: {} < {prev}", w.radius);
            prev = w.radius;
        }
        // Non-decreasing in ball radius.
        let mut prev = 0.0;
        for ball in [10.0, 20.0, 40.0, 80.0] {
            let w = truncation_radius(&law, 1.0, 100, ball, 1e-3).unwrap();
            assert!(w.radius >= prev - 1e-9);
            prev = w.radius;
        }
    }

    #[test]
    fn truncation_radius_degenerate_eps() {
        // eps close to 1 collapses the window onto the ball for a
        // subcritical law whose far field is negligible.
        let law = StepLaw::gaussian(1);
        let w = truncation_radius(&law, 0.2, 40, 5.0, 0.999).unwrap();
        assert!(w.radius >= 5.0);
        assert!(w.radius < 8.0, "L = {}", w.radius);
    }

    #[test]
    fn empirical_window_smoke() {
        let law = StepLaw::new(StepComponent::ParetoSymmetric { tail_index: 3.0 }, 1).unwrap();
        let mut rng = task_stream(13, StreamDomain::Calibration, &[0]);
        let w = empirical_truncation_radius(&law, 1.0, 16, 10.0, 0.05, 20_000, &mut rng).unwrap();
        assert_eq!(w.method, WindowMethod::EmpiricalQuantile);
        assert!(w.radius > 10.0);
        assert!(w.eps_trunc <= 0.05);
    }
}
