//! Exact computations on small one-dimensional lattice instances.
//!
//! For finite-support offspring laws and lattice-valued steps, the no-hit
//! probability `h_n(x) = P_{delta_x}(no generation-n particle in B(r))`
//! satisfies the exact recursion
//!
//! ```text
//! h_0(x) = 1{|x| >= r},         h_k(x) = f( sum_s P(step = s) h_{k-1}(x + s) ),
//! ```
//!
//! and the empty-ball probability under a unit-intensity lattice Poisson
//! field factorizes as `P(R_n >= r) = exp{ -sum_x (1 - h_n(x)) }`. These
//! close the loop against the simulator's lattice mode with no quadrature
//! error. A continuum variant integrates the factorization over the
//! fractional lattice offset with Gauss-Legendre quadrature and serves as a
//! secondary check for Lebesgue-field runs.
//!
//! `enumerate_tiny` recomputes tiny instances by exhaustive enumeration of
//! tree shapes and step assignments in exact rational arithmetic; it shares
//! no code with the DP and anchors it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;

/// A finite-support step law on the integer lattice.
#[derive(Clone, Debug)]
pub struct LatticeStep {
    offsets: Vec<i64>,
    probs: Vec<f64>,
}

impl LatticeStep {
    pub fn new(offsets: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() || offsets.len() != probs.len() {
            return Err(Error::InvalidParameters(
                "offsets/probs length mismatch".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameters(
                "lattice step probabilities invalid".into(),
            ));
        }
        let mean: f64 = offsets
            .iter()
            .zip(&probs)
            .map(|(&o, &p)| o as f64 * p)
            .sum();
        if mean.abs() > 1e-12 {
            return Err(Error::InvalidParameters(format!(
                "lattice step mean {mean} != 0"
            )));
        }
        Ok(LatticeStep { offsets, probs })
    }

    /// +1/-1 with probability 1/2 each.
    pub fn rademacher() -> Self {
        LatticeStep {
            offsets: vec![-1, 1],
            probs: vec![0.5, 0.5],
        }
    }

    pub fn range(&self) -> i64 {
        self.offsets.iter().map(|o| o.abs()).max().unwrap()
    }
}

/// The exact no-hit table `h_n(x)` over a symmetric lattice window.
#[derive(Clone, Debug)]
pub struct NoHitTable {
    h: Vec<f64>,
    x_min: i64,
    /// Fractional offset of the lattice (sites sit at `x + offset`).
    pub offset: f64,
    pub n: u64,
    pub r: f64,
}

impl NoHitTable {
    /// `h_n(x)`; sites beyond the tabulated range are unreachable, so 1.
    pub fn h_at(&self, x: i64) -> f64 {
        let idx = x - self.x_min;
        if idx < 0 || idx as usize >= self.h.len() {
            1.0
        } else {
            self.h[idx as usize]
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.h
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.x_min + i as i64, v))
    }
}

fn require_finite_support(law: &OffspringLaw) -> Result<usize> {
    law.finite_support().ok_or_else(|| {
        Error::UnsupportedLaw(
            "the exact lattice recursion needs a finite-support offspring law".into(),
        )
    })
}

/// Runs the no-hit recursion for `n` generations on the lattice
/// `{offset + j : j integer}`.
pub fn dp_no_hit_offset(
    law: &OffspringLaw,
    n: u64,
    r: f64,
    step: &LatticeStep,
    offset: f64,
) -> Result<NoHitTable> {
    require_finite_support(law)?;
    if r < 0.0 {
        return Err(Error::Domain("negative ball radius".into()));
    }
    let reach = n as i64 * step.range() + r.ceil() as i64 + 1;
    let size = (2 * reach + 1) as usize;
    let x_min = -reach;
    let inside = |j: i64| (j as f64 + offset).abs() < r;

    let mut h: Vec<f64> = (0..size)
        .map(|i| if inside(x_min + i as i64) { 0.0 } else { 1.0 })
        .collect();
    let mut next = vec![1.0f64; size];

    for _ in 0..n {
        for (i, slot) in next.iter_mut().enumerate() {
            let x = x_min + i as i64;
            let mut mixed = 0.0;
            for (o, p) in step.offsets.iter().zip(&step.probs) {
                let j = x + o - x_min;
                let hv = if j < 0 || j as usize >= size {
                    1.0
                } else {
                    h[j as usize]
                };
                mixed += p * hv;
            }
            *slot = law.pgf(mixed.clamp(0.0, 1.0))?;
        }
        std::mem::swap(&mut h, &mut next);
    }
    Ok(NoHitTable {
        h,
        x_min,
        offset,
        n,
        r,
    })
}

/// The integer-lattice table (offset 0).
pub fn dp_no_hit(law: &OffspringLaw, n: u64, r: f64, step: &LatticeStep) -> Result<NoHitTable> {
    dp_no_hit_offset(law, n, r, step, 0.0)
}

/// Exact `P(R_n >= r)` for the branching random walk started from a
/// unit-intensity Poisson field on the integer lattice:
/// `exp{ -sum_x (1 - h_n(x)) }`.
pub fn exact_tail_lattice(law: &OffspringLaw, n: u64, r: f64, step: &LatticeStep) -> Result<f64> {
    let table = dp_no_hit(law, n, r, step)?;
    Ok((-occupied_mass(&table)).exp())
}

/// `sum_x (1 - h_n(x))`, Neumaier-compensated.
fn occupied_mass(table: &NoHitTable) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (_, h) in table.sites() {
        let term = 1.0 - h;
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

/// Lattice analogue of the integrated log no-hit mass,
/// `sum_x -log h_n(x)`. Returns `+inf` for `n = 0` when sites are occupied.
pub fn u_integral(law: &OffspringLaw, n: u64, r: f64, step: &LatticeStep) -> Result<f64> {
    let table = dp_no_hit(law, n, r, step)?;
    let mut sum = 0.0;
    for (x, h) in table.sites() {
        if h <= 0.0 {
            if n == 0 {
                return Ok(f64::INFINITY);
            }
            return Err(Error::NonPositive { site: x });
        }
        sum += -h.ln();
    }
    Ok(sum)
}

/// Exact hit probability `P_{delta_x0}(Z_n(B(r)) > 0)` on tiny instances by
/// exhaustive enumeration with rational arithmetic: every offspring count
/// and every sign assignment of the children's unit steps is expanded
/// explicitly. Offspring support must lie in `{0, 1, 2}` and `n <= 3`.
pub fn enumerate_tiny(law: &OffspringLaw, n: u64, r: f64, x0: i64) -> Result<BigRational> {
    let support = require_finite_support(law)?;
    if support > 2 {
        return Err(Error::TooLarge(format!(
            "offspring support {support} exceeds 2"
        )));
    }
    if n > 3 {
        return Err(Error::TooLarge(format!("enumeration depth {n} exceeds 3")));
    }
    // Every f64 is a dyadic rational, so the conversion is exact and the
    // comparison target matches the DP bit for bit.
    let probs: Vec<BigRational> = (0..=2)
        .map(|k| BigRational::from_float(law.prob(k)).expect("finite probability"))
        .collect();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let no_hit = enumerate_no_hit(&probs, &half, x0, n, r);
    Ok(BigRational::one() - no_hit)
}

fn enumerate_no_hit(
    probs: &[BigRational],
    half: &BigRational,
    x: i64,
    depth: u64,
    r: f64,
) -> BigRational {
    if depth == 0 {
        return if (x as f64).abs() < r {
            BigRational::zero()
        } else {
            BigRational::one()
        };
    }
    let mut total = BigRational::zero();
    for (k, pk) in probs.iter().enumerate() {
        if pk.is_zero() {
            continue;
        }
        // Enumerate the 2^k sign vectors of the children's steps.
        let mut branch = BigRational::zero();
        for mask in 0..(1u32 << k) {
            let mut term = BigRational::one();
            for child in 0..k {
                let dx = if mask >> child & 1 == 0 { -1 } else { 1 };
                term *= half.clone();
                term *= enumerate_no_hit(probs, half, x + dx, depth - 1, r);
            }
            branch += term;
        }
        total += pk.clone() * branch;
    }
    total
}

/// `P(R_n >= r)` for the continuum (Lebesgue-intensity) Poisson field with
/// lattice steps: the factorization exponent is integrated over the
/// fractional lattice offset, `int_0^1 sum_j (1 - h_n^{(u)}(j)) du`, with
/// Gauss-Legendre panels split at the offsets where ball membership flips.
/// Returns the value and a quadrature-error estimate (the drop from halving
/// the node count).
pub fn exact_tail_continuum(
    law: &OffspringLaw,
    n: u64,
    r: f64,
    step: &LatticeStep,
) -> Result<(f64, f64)> {
    let exponent = |nodes: usize| -> Result<f64> {
        let mut breaks: Vec<f64> = vec![0.0, 1.0];
        let fr = r.fract();
        if fr > 0.0 {
            breaks.push(fr);
            breaks.push(1.0 - fr);
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let (xs, ws) = gauss_legendre(nodes);
        let mut total = 0.0;
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = 0.5 * (a + b);
            let hw = 0.5 * (b - a);
            for (x, w) in xs.iter().zip(&ws) {
                let u = mid + hw * x;
                let table = dp_no_hit_offset(law, n, r, step, u)?;
                total += w * hw * occupied_mass(&table);
            }
        }
        Ok(total)
    };
    let i64n = exponent(64)?;
    let i32n = exponent(32)?;
    Ok(((-i64n).exp(), ((-i64n).exp() - (-i32n).exp()).abs()))
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x).
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}
