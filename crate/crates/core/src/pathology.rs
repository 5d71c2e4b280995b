//! The pathological generator family: inverse-square-root pair densities
//! f_q diverging at 1-q, rational enumerations, weighted partial-sum
//! mixtures h_n, and constructive unboundedness probes.
//!
//! Each partial sum h_n is a genuine density on [0, 1] with n integrable
//! singularities; as n grows the singular set becomes dense, so the
//! induced copula density is unbounded in every neighborhood while
//! remaining finite at every machine-representable point.

use crate::generators::{invert_monotone_cdf, Generator};
use crate::numerics::KahanSum;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Signed distance of `u` from the singular point 1-q, computed as
/// (1-u)-q. Both subtractions are exact near the singularity (Sterbenz),
/// which is what lets the densities below stay accurate arbitrarily close
/// to their divergence point.
#[inline]
fn gap(q: f64, u: f64) -> f64 {
    (1.0 - u) - q
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q = {q} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_u(u: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} must lie in [0, 1]")));
    }
    Ok(())
}

/// f_q^+(u) = 1 / (2 √((u+q) mod 1)), with the value 1/2 at u = 1-q.
pub fn f_q_plus(q: f64, u: f64) -> Result<f64> {
    check_q(q)?;
    check_u(u)?;
    Ok(f_plus_unchecked(q, u))
}

/// f_q^-(u) = 1 / (2 √((-(u+q)) mod 1)), with the value 1/2 at u = 1-q.
pub fn f_q_minus(q: f64, u: f64) -> Result<f64> {
    check_q(q)?;
    check_u(u)?;
    Ok(f_minus_unchecked(q, u))
}

fn f_plus_unchecked(q: f64, u: f64) -> f64 {
    let t = gap(q, u);
    if t == 0.0 {
        0.5
    } else if t > 0.0 {
        // u + q < 1
        0.5 / (u + q).sqrt()
    } else {
        // (u + q) mod 1 = u - (1 - q) = -t, exact near the singularity
        0.5 / (-t).sqrt()
    }
}

fn f_minus_unchecked(q: f64, u: f64) -> f64 {
    let t = gap(q, u);
    if t == 0.0 {
        0.5
    } else if t > 0.0 {
        // (-(u + q)) mod 1 = 1 - u - q = t, exact near the singularity
        0.5 / t.sqrt()
    } else {
        // 2 - u - q
        0.5 / ((1.0 - u) + (1.0 - q)).sqrt()
    }
}

/// CDF of f_q^+: √(u+q) - √q for u <= 1-q, else 1 - √q + √(u+q-1).
fn cdf_plus(q: f64, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    if gap(q, u) >= 0.0 {
        (u + q).sqrt() - q.sqrt()
    } else {
        1.0 - q.sqrt() + (q - (1.0 - u)).sqrt()
    }
}

/// CDF of f_q^-: √(1-q) - √(1-u-q) for u <= 1-q, else √(1-q) + 1 - √(2-u-q).
fn cdf_minus(q: f64, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let t = gap(q, u);
    if t >= 0.0 {
        (1.0 - q).sqrt() - t.sqrt()
    } else {
        (1.0 - q).sqrt() + 1.0 - ((1.0 - u) + (1.0 - q)).sqrt()
    }
}

fn inverse_cdf_plus(q: f64, p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let split = 1.0 - q.sqrt(); // cdf_plus at 1-q
    if p <= split {
        let r = p + q.sqrt();
        (r * r - q).clamp(0.0, 1.0)
    } else {
        let r = p - 1.0 + q.sqrt();
        (r * r + 1.0 - q).clamp(0.0, 1.0)
    }
}

fn inverse_cdf_minus(q: f64, p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let split = (1.0 - q).sqrt(); // cdf_minus at 1-q
    if p <= split {
        let r = split - p;
        (1.0 - q - r * r).clamp(0.0, 1.0)
    } else {
        let r = split + 1.0 - p;
        (2.0 - q - r * r).clamp(0.0, 1.0)
    }
}

/// The symmetric pair density f_q = (f_q^+ + f_q^-)/2, a proper density
/// on [0, 1] with a single integrable singularity at 1-q.
#[derive(Debug, Clone, Copy)]
pub struct SingularPair {
    q: f64,
}

pub fn singular_pair(q: f64) -> Result<SingularPair> {
    check_q(q)?;
    Ok(SingularPair { q })
}

impl SingularPair {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn singularity(&self) -> f64 {
        1.0 - self.q
    }

    /// Exact draw: pick the + or - branch with probability 1/2, then
    /// invert that branch's closed-form CDF.
    fn draw(&self, rng: &mut impl Rng) -> f64 {
        let p = rng.random::<f64>();
        if rng.random::<bool>() {
            inverse_cdf_plus(self.q, p)
        } else {
            inverse_cdf_minus(self.q, p)
        }
    }
}

impl Generator for SingularPair {
    fn id(&self) -> String {
        format!("fq:{}", self.q)
    }

    fn density(&self, x: f64) -> f64 {
        0.5 * (f_plus_unchecked(self.q, x) + f_minus_unchecked(self.q, x))
    }

    fn cdf(&self, x: f64) -> f64 {
        0.5 * (cdf_plus(self.q, x) + cdf_minus(self.q, x))
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        invert_monotone_cdf(&|x| self.cdf(x), &|x| self.density(x), p, 0.0, 1.0, 1e-13)
    }

    fn singular_points(&self) -> Vec<f64> {
        vec![self.singularity()]
    }
}

/// How the rationals q_1, q_2, ... are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Duplicate-free diagonal enumeration by denominator, reduced
    /// fractions only: 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ... A rational with
    /// denominator D appears within O(D²) terms, so every subinterval of
    /// (0, 1) is reached at a tractable index.
    Diagonal,
    /// The n rationals k/(n+1), k = 1..n (the figure-style construction;
    /// note the set depends on n).
    EvenlySpaced,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// First `n` rationals of the chosen enumeration, all distinct, in (0, 1).
pub fn enumerate_rationals(n: usize, mode: EnumerationMode) -> Vec<f64> {
    match mode {
        EnumerationMode::EvenlySpaced => {
            (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
        }
        EnumerationMode::Diagonal => {
            let mut out = Vec::with_capacity(n);
            let mut den = 2u64;
            'outer: loop {
                for num in 1..den {
                    if gcd(num, den) == 1 {
                        out.push(num as f64 / den as f64);
                        if out.len() == n {
                            break 'outer;
                        }
                    }
                }
                den += 1;
            }
            out
        }
    }
}

/// Mixture weight scheme over the enumeration positions.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightScheme {
    /// w_k ∝ 6/(π² k²); sums to 1 over the full enumeration.
    Zeta,
    /// w_k ∝ 2^{-k}; sums to 1 over the full enumeration.
    Geometric,
    /// w_k ∝ ratio^{-π(k)} under a seeded random permutation π
    /// (the figure construction uses ratio = 1.1).
    PermutedGeometric { ratio: f64 },
    /// Arbitrary positive weights, renormalized.
    Custom(Vec<f64>),
}

impl WeightScheme {
    /// First `n` weights, renormalized to sum exactly to 1.
    pub fn weights(&self, n: usize, permutation_seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Domain("need at least one weight".into()));
        }
        let mut raw: Vec<f64> = match self {
            WeightScheme::Zeta => (1..=n).map(|k| 1.0 / (k as f64 * k as f64)).collect(),
            WeightScheme::Geometric => (1..=n).map(|k| 0.5f64.powi(k as i32)).collect(),
            WeightScheme::PermutedGeometric { ratio } => {
                if !(*ratio > 1.0) {
                    return Err(Error::Domain(format!(
                        "geometric ratio {ratio} must exceed 1"
                    )));
                }
                let mut perm: Vec<usize> = (1..=n).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(permutation_seed);
                perm.shuffle(&mut rng);
                perm.iter().map(|&pi| ratio.powi(-(pi as i32))).collect()
            }
            WeightScheme::Custom(w) => {
                if w.len() != n {
                    return Err(Error::Domain(format!(
                        "custom scheme has {} weights, need {n}",
                        w.len()
                    )));
                }
                w.clone()
            }
        };
        for &w in &raw {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("weight {w} must be positive")));
            }
        }
        let total: f64 = raw.iter().sum();
        for w in &mut raw {
            *w /= total;
        }
        Ok(raw)
    }

    fn token(&self) -> String {
        match self {
            WeightScheme::Zeta => "zeta".into(),
            WeightScheme::Geometric => "geometric".into(),
            WeightScheme::PermutedGeometric { ratio } => format!("geom{ratio}"),
            WeightScheme::Custom(_) => "custom".into(),
        }
    }
}

/// The normalized partial sum h_n = Σ_{k<=n} w̃_k f_{q_k}: a proper
/// density with n integrable singularities, usable anywhere a
/// [`Generator`] is.
#[derive(Debug, Clone)]
pub struct PartialSumGenerator {
    pairs: Vec<SingularPair>,
    weights: Vec<f64>,
    singular: Vec<f64>,
    id: String,
}

pub fn partial_sum_generator(
    n: usize,
    mode: EnumerationMode,
    scheme: WeightScheme,
    permutation_seed: u64,
) -> Result<PartialSumGenerator> {
    if n == 0 {
        return Err(Error::Domain("partial sum needs n >= 1 terms".into()));
    }
    let qs = enumerate_rationals(n, mode);
    let weights = scheme.weights(n, permutation_seed)?;
    let pairs: Vec<SingularPair> = qs.iter().map(|&q| SingularPair { q }).collect();
    let mut singular: Vec<f64> = pairs.iter().map(|p| p.singularity()).collect();
    singular.sort_by(|a, b| a.partial_cmp(b).unwrap());
    singular.dedup();
    let mode_token = match mode {
        EnumerationMode::Diagonal => "diagonal",
        EnumerationMode::EvenlySpaced => "evenly",
    };
    Ok(PartialSumGenerator {
        pairs,
        weights,
        singular,
        id: format!("pathology:{n},{mode_token},{},{permutation_seed}", scheme.token()),
    })
}

impl PartialSumGenerator {
    pub fn terms(&self) -> usize {
        self.pairs.len()
    }

    pub fn components(&self) -> impl Iterator<Item = (&SingularPair, f64)> {
        self.pairs.iter().zip(self.weights.iter().copied())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Density at the real point (1 - q_k) - offset, for 0 < offset well
    /// below one ulp of the singularity. The dominant diverging branch is
    /// evaluated directly in the offset, sidestepping the resolution of
    /// the f64 grid around 1 - q_k; the remaining terms vary smoothly and
    /// are evaluated at the rounded point.
    pub fn density_at_offset(&self, component: usize, offset: f64) -> Result<f64> {
        if component >= self.pairs.len() {
            return Err(Error::Domain(format!("no component {component}")));
        }
        if !(offset > 0.0 && offset < 1.0) {
            return Err(Error::Domain(format!("offset {offset} must lie in (0, 1)")));
        }
        let pair = &self.pairs[component];
        let x = pair.singularity() - offset;
        let mut acc = KahanSum::default();
        for (k, (p, w)) in self.components().enumerate() {
            if k == component {
                // f_q^- branch carries the divergence; its gap is exactly
                // `offset` at the real point. f_q^+ is smooth here.
                let plus = 0.5 / (1.0 - offset).sqrt();
                let minus = 0.5 / offset.sqrt();
                acc.add(w * 0.5 * (plus + minus));
            } else {
                acc.add(w * p.density(x));
            }
        }
        Ok(acc.total())
    }

    /// Draw by component selection (categorical over the weights), then
    /// exact branch inversion inside the selected pair.
    pub fn sample_mixture(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut cumulative = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for &w in &self.weights {
            acc += w;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let r = rng.random::<f64>();
                let k = cumulative.partition_point(|&c| c < r).min(self.pairs.len() - 1);
                self.pairs[k].draw(&mut rng)
            })
            .collect()
    }
}

impl Generator for PartialSumGenerator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn density(&self, x: f64) -> f64 {
        let mut acc = KahanSum::default();
        for (p, w) in self.components() {
            acc.add(w * p.density(x));
        }
        acc.total()
    }

    fn cdf(&self, x: f64) -> f64 {
        let mut acc = KahanSum::default();
        for (p, w) in self.components() {
            acc.add(w * p.cdf(x));
        }
        acc.total()
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        invert_monotone_cdf(&|x| self.cdf(x), &|x| self.density(x), p, 0.0, 1.0, 1e-13)
    }

    fn singular_points(&self) -> Vec<f64> {
        self.singular.clone()
    }
}

/// Certificate that the partial-sum family exceeds `threshold` inside a
/// target interval while staying finite.
///
/// The certified point is `singularity - offset`; `x` is its nearest f64
/// (which may round onto the singularity itself when the offset drops
/// below one ulp — the offset field is the authoritative coordinate).
#[derive(Debug, Clone, Copy)]
pub struct Witness {
    /// Number of mixture terms needed before the interval contains a
    /// singular point.
    pub n: usize,
    /// Index of the component whose singularity is in the interval.
    pub component: usize,
    pub singularity: f64,
    pub offset: f64,
    pub x: f64,
    pub value: f64,
}

/// Find the smallest n whose enumeration places a singular point 1 - q_k
/// inside (a, b), then walk a point geometrically toward that singularity
/// until the (finite) partial-sum density exceeds `threshold`.
pub fn unboundedness_probe(
    mode: EnumerationMode,
    scheme: WeightScheme,
    permutation_seed: u64,
    interval: (f64, f64),
    threshold: f64,
) -> Result<(PartialSumGenerator, Witness)> {
    let (a, b) = interval;
    if !(a < b && a >= 0.0 && b <= 1.0) {
        return Err(Error::Domain(format!("bad interval ({a}, {b})")));
    }
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!("threshold {threshold} must be positive")));
    }

    const MAX_TERMS: usize = 1 << 21;
    let in_interval = |q: f64| 1.0 - q > a && 1.0 - q < b;
    let n = match mode {
        EnumerationMode::Diagonal => {
            // fixed enumeration: smallest n is the first in-interval index
            let mut idx = 0usize;
            let mut den = 2u64;
            'search: loop {
                for num in 1..den {
                    if gcd(num, den) == 1 {
                        idx += 1;
                        if idx > MAX_TERMS {
                            break 'search None;
                        }
                        if in_interval(num as f64 / den as f64) {
                            break 'search Some(idx);
                        }
                    }
                }
                den += 1;
            }
        }
        EnumerationMode::EvenlySpaced => {
            // the set {k/(n+1)} changes with n; scan n directly
            (1..=MAX_TERMS).find(|&n| {
                (1..=n).any(|k| in_interval(k as f64 / (n + 1) as f64))
            })
        }
    }
    .ok_or_else(|| {
        Error::Budget(format!(
            "no singular point in ({a}, {b}) within {MAX_TERMS} terms"
        ))
    })?;

    let gen = partial_sum_generator(n, mode, scheme, permutation_seed)?;
    // prefer the heaviest in-interval component: fewer descent steps
    let component = gen
        .components()
        .enumerate()
        .filter(|(_, (p, _))| {
            let s = p.singularity();
            s > a && s < b
        })
        .max_by(|(_, (_, w1)), (_, (_, w2))| w1.partial_cmp(w2).unwrap())
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Budget("no in-interval component after enumeration".into()))?;
    let singularity = gen.pairs[component].singularity();

    let mut offset = 0.25 * (singularity - a).min(b - singularity);
    for _ in 0..2048 {
        let value = gen.density_at_offset(component, offset)?;
        if value.is_finite() && value > threshold {
            let witness = Witness {
                n,
                component,
                singularity,
                offset,
                x: singularity - offset,
                value,
            };
            return Ok((gen, witness));
        }
        offset *= 0.25;
        if offset < 1e-300 {
            break;
        }
    }
    Err(Error::Budget(format!(
        "threshold {threshold} not reached before offset underflow"
    )))
}

/// `g` with its density forced to 0 on a finite excluded set; the CDF is
/// unchanged (the excision has measure zero).
pub struct ExcisedGenerator {
    inner: Box<dyn Generator>,
    excluded: Vec<f64>,
}

pub fn indicator_excision(inner: Box<dyn Generator>, excluded: Vec<f64>) -> ExcisedGenerator {
    ExcisedGenerator { inner, excluded }
}

impl Generator for ExcisedGenerator {
    fn id(&self) -> String {
        format!("excised({})", self.inner.id())
    }

    fn density(&self, x: f64) -> f64 {
        if self.excluded.iter().any(|&e| e == x) {
            0.0
        } else {
            self.inner.density(x)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        self.inner.inverse_cdf(p)
    }

    fn singular_points(&self) -> Vec<f64> {
        self.inner.singular_points()
    }

    fn supports_exact_cdf(&self) -> bool {
        self.inner.supports_exact_cdf()
    }
}

/// Parse `terms[,mode][,scheme][,seed]` (tokens after the first may come
/// in any order; defaults: evenly, geom1.1, seed 42).
pub fn parse_pathology_spec(args: &str) -> Result<PartialSumGenerator> {
    let mut it = args.split(',');
    let n: usize = it
        .next()
        .ok_or_else(|| Error::Parse("pathology spec needs a term count".into()))?
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad pathology term count in `{args}`")))?;

    let mut mode = EnumerationMode::EvenlySpaced;
    let mut scheme = WeightScheme::PermutedGeometric { ratio: 1.1 };
    let mut seed = 42u64;
    for tok in it {
        let tok = tok.trim();
        match tok {
            "evenly" | "evenly_spaced" => mode = EnumerationMode::EvenlySpaced,
            "diagonal" => mode = EnumerationMode::Diagonal,
            "zeta" => scheme = WeightScheme::Zeta,
            "geometric" => scheme = WeightScheme::Geometric,
            _ => {
                if let Some(ratio) = tok.strip_prefix("geom") {
                    let ratio: f64 = ratio
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad geometric ratio in `{tok}`")))?;
                    scheme = WeightScheme::PermutedGeometric { ratio };
                } else if let Ok(s) = tok.parse::<u64>() {
                    seed = s;
                } else {
                    return Err(Error::Parse(format!("unknown pathology token `{tok}`")));
                }
            }
        }
    }
    partial_sum_generator(n, mode, scheme, seed)
}
