//! Shared numerical kernel: mod-1 arithmetic, tanh-sinh quadrature that
//! tolerates integrable endpoint singularities, the exact density of a sum
//! of independent non-identical uniforms, and seeded Monte Carlo
//! integration with reproducible substreams.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The fractional part x - ⌊x⌋, guaranteed to lie in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Mod1Value(f64);

impl Mod1Value {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Fractional part of `x`. Exact integers map to 0.0, and negative inputs
/// follow the floor convention (mod1(-0.25) = 0.75).
pub fn mod1(x: f64) -> Result<Mod1Value> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("mod1 of non-finite input {x}")));
    }
    Ok(Mod1Value(wrap_unit(x)))
}

/// Infallible fractional part for internal hot paths; caller guarantees a
/// finite argument.
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let f = x - x.floor();
    // x slightly below an integer can round the difference up to 1.0.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Outcome of a quadrature routine.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Compensated (Kahan) accumulator for sums with heavy cancellation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

const TANH_SINH_MAX_LEVEL: usize = 12;

/// Tanh-sinh (double exponential) quadrature on a single interval.
///
/// Abscissas are generated as offsets from the endpoints, so integrable
/// endpoint singularities such as 1/√(x-a) are resolved without the
/// integrand ever being sampled at the endpoints themselves. Non-finite
/// integrand values (possible when an offset underflows) are skipped;
/// their weights are negligible by then.
fn tanh_sinh(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> (f64, f64, usize, bool) {
    let center = 0.5 * (a + b);
    let radius = 0.5 * (b - a);
    if radius == 0.0 {
        return (0.0, 0.0, 0, true);
    }

    let half_pi = std::f64::consts::FRAC_PI_2;
    let eval = |t: f64, evals: &mut usize| -> f64 {
        let s = half_pi * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        // offset of the abscissa from the nearer endpoint, in (0, radius]
        let offset = radius * 2.0 * e / (1.0 + e);
        let weight = half_pi * t.cosh() * radius * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if offset == 0.0 || weight == 0.0 {
            return 0.0;
        }
        let x = if t >= 0.0 { b - offset } else { a + offset };
        *evals += 1;
        let y = f(x);
        if y.is_finite() {
            weight * y
        } else {
            0.0
        }
    };

    let mut evals = 0usize;
    let mut sum = KahanSum::default();
    sum.add(half_pi * radius * f_or_zero(f, center, &mut evals));

    let mut prev = f64::NAN;
    let mut err = f64::INFINITY;
    let mut prev_err = f64::INFINITY;
    let mut h = 1.0;
    for level in 0..=TANH_SINH_MAX_LEVEL {
        if level > 0 {
            h *= 0.5;
        }
        // At level 0 take every multiple of h; afterwards only the odd ones.
        let stride = if level == 0 { 1 } else { 2 };
        let start = if level == 0 { 1 } else { 1 };
        let mut k = start;
        let mut tail_small = 0;
        loop {
            let t = k as f64 * h;
            let term = eval(t, &mut evals) + eval(-t, &mut evals);
            sum.add(term);
            if term.abs() <= 1e-18 * sum.total().abs().max(1e-300) {
                tail_small += 1;
                if tail_small >= 2 {
                    break;
                }
            } else {
                tail_small = 0;
            }
            k += stride;
            if t > 7.0 {
                break;
            }
        }
        let estimate = h * sum.total();
        if level > 0 {
            err = (estimate - prev).abs();
            // abscissas next to a singular endpoint get rounded onto the
            // f64 grid, which puts a noise floor of roughly 1e-10 under
            // the level-to-level differences; once the differences are
            // that small and have stopped shrinking, more levels only
            // resample the noise
            let stagnated = level >= 6 && err <= 1e-9 && err >= 0.5 * prev_err;
            if err <= tol || err <= 1e-10 * estimate.abs() || stagnated {
                return (estimate, err, evals, true);
            }
            prev_err = err;
        }
        prev = estimate;
    }
    (prev, err, evals, false)
}

fn f_or_zero(f: &dyn Fn(f64) -> f64, x: f64, evals: &mut usize) -> f64 {
    *evals += 1;
    let y = f(x);
    if y.is_finite() {
        y
    } else {
        0.0
    }
}

/// Integrate `f` over [a, b] to absolute tolerance `tol`, splitting the
/// domain at the listed singular (or merely non-smooth) points and running
/// tanh-sinh quadrature on each open subinterval.
pub fn integrate_1d(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    singularities: &[f64],
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 1,
        });
    }

    let mut cuts: Vec<f64> = singularities
        .iter()
        .copied()
        .filter(|&s| s > a && s < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let nsub = edges.len() - 1;
    let sub_tol = (tol / nsub as f64).max(1e-16);

    let fref: &dyn Fn(f64) -> f64 = &f;
    let mut value = KahanSum::default();
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    for w in edges.windows(2) {
        let (v, e, n, ok) = tanh_sinh(fref, w[0], w[1], sub_tol);
        value.add(v);
        error += e;
        evaluations += n;
        converged &= ok;
    }
    let result = QuadratureResult {
        value: value.total(),
        error_estimate: error,
        evaluations,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::Convergence {
            best: result.value,
            error_estimate: result.error_estimate,
        })
    }
}

/// Maximum number of edges supported by [`BoxSumDensity`]. Above this the
/// alternating inclusion-exclusion sum cancels catastrophically.
pub const MAX_BOX_EDGES: usize = 12;

/// Exact density of S = Σ V_k where the V_k are independent and V_k is
/// uniform on [0, u_k]. A piecewise polynomial of degree (#edges - 1),
/// evaluated by inclusion-exclusion over subsets of edges:
///
///   p_S(s) = (Π u_k)^{-1} Σ_{T⊆K} (-1)^{|T|} (s - Σ_{k∈T} u_k)_+^{m-1} / (m-1)!
///
/// This is the device that reduces every d-dimensional copula integral in
/// this crate to one dimension.
#[derive(Debug, Clone)]
pub struct BoxSumDensity {
    edge_lengths: Vec<f64>,
    /// (subset sum, sign) pairs, sorted by subset sum.
    terms: Vec<(f64, f64)>,
    breakpoints: Vec<f64>,
    /// (Π u_k · (m-1)!)^{-1}
    scale: f64,
}

impl BoxSumDensity {
    pub fn new(edge_lengths: &[f64]) -> Result<Self> {
        if edge_lengths.is_empty() {
            return Err(Error::Domain("box_sum_density needs at least one edge".into()));
        }
        if edge_lengths.len() > MAX_BOX_EDGES {
            return Err(Error::Domain(format!(
                "box_sum_density supports at most {MAX_BOX_EDGES} edges, got {}",
                edge_lengths.len()
            )));
        }
        for &u in edge_lengths {
            if !(u > 0.0 && u <= 1.0) {
                return Err(Error::Domain(format!(
                    "edge length {u} outside (0, 1]"
                )));
            }
        }
        let m = edge_lengths.len();
        let mut terms = Vec::with_capacity(1 << m);
        for mask in 0u32..(1u32 << m) {
            let mut sum = 0.0;
            for (k, &u) in edge_lengths.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    sum += u;
                }
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((sum, sign));
        }
        terms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut breakpoints: Vec<f64> = terms.iter().map(|t| t.0).collect();
        breakpoints.dedup();

        let volume: f64 = edge_lengths.iter().product();
        let factorial: f64 = (1..m).map(|k| k as f64).product();
        Ok(Self {
            edge_lengths: edge_lengths.to_vec(),
            terms,
            breakpoints,
            scale: 1.0 / (volume * factorial),
        })
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    /// Knots of the piecewise polynomial (all subset sums of the edges).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Right end of the support, Σ u_k.
    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= self.support_end() {
            return 0.0;
        }
        let degree = (self.edge_lengths.len() - 1) as i32;
        let mut acc = KahanSum::default();
        for &(subset_sum, sign) in &self.terms {
            if subset_sum >= s {
                break; // terms are sorted, the rest vanish
            }
            acc.add(sign * (s - subset_sum).powi(degree));
        }
        (acc.total() * self.scale).max(0.0)
    }
}

const MC_BLOCK: u64 = 4096;

/// Monte Carlo integration of `f` over the rectangle Π [lo_i, hi_i].
///
/// Sampling is decomposed into fixed-size blocks, each driven by its own
/// counter-indexed ChaCha substream of `seed`, so the result is bit-stable
/// and independent of how blocks would be scheduled across threads.
pub fn mc_integrate(
    f: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    n: u64,
    seed: u64,
) -> Result<QuadratureResult> {
    if n < 2 {
        return Err(Error::Domain("mc_integrate needs n >= 2".into()));
    }
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::Domain("invalid integration box".into()));
    }
    let mut volume = 1.0;
    for (&l, &h) in lo.iter().zip(hi) {
        if !(h >= l) {
            return Err(Error::Domain(format!("invalid box side [{l}, {h}]")));
        }
        volume *= h - l;
    }

    let dim = lo.len();
    let mut point = vec![0.0; dim];
    let mut sum = KahanSum::default();
    let mut sum_sq = KahanSum::default();
    let blocks = n.div_ceil(MC_BLOCK);
    for block in 0..blocks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let in_block = MC_BLOCK.min(n - block * MC_BLOCK);
        let mut block_sum = KahanSum::default();
        let mut block_sq = KahanSum::default();
        for _ in 0..in_block {
            for (x, (&l, &h)) in point.iter_mut().zip(lo.iter().zip(hi)) {
                *x = l + (h - l) * rng.random::<f64>();
            }
            let y = f(&point);
            block_sum.add(y);
            block_sq.add(y * y);
        }
        sum.add(block_sum.total());
        sum_sq.add(block_sq.total());
    }

    let n_f = n as f64;
    let mean = sum.total() / n_f;
    let variance = ((sum_sq.total() - n_f * mean * mean) / (n_f - 1.0)).max(0.0);
    Ok(QuadratureResult {
        value: volume * mean,
        error_estimate: volume * (variance / n_f).sqrt(),
        evaluations: n as usize,
    })
}
