//! Univariate densities on [0, 1] used as copula generators.
//!
//! Every generator exposes density, CDF, inverse CDF and inverse-transform
//! sampling. Densities may take the value +∞ at declared singular points;
//! quadrature consumers split at those points instead of sampling them.

use crate::numerics::{self, integrate_1d};
use crate::special::{beta_inc, ln_beta};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A probability density on [0, 1].
///
/// Contract: `density >= 0` and integrates to 1 over [0, 1]; `cdf` is
/// non-decreasing with cdf(0) = 0 and cdf(1) = 1; `inverse_cdf` is the
/// (generalized) inverse of `cdf`.
pub trait Generator: Send + Sync {
    /// Short identifier in the CLI spec grammar, e.g. `beta:1.5,1.5`.
    fn id(&self) -> String;

    /// Density at `x` in [0, 1]. May return +∞ at a singular point.
    fn density(&self, x: f64) -> f64;

    fn cdf(&self, x: f64) -> f64;

    fn inverse_cdf(&self, p: f64) -> f64;

    /// Points in (0, 1) where the density diverges or is discontinuous
    /// enough to require a quadrature split.
    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Whether `cdf` is closed-form (as opposed to quadrature-backed).
    fn supports_exact_cdf(&self) -> bool {
        true
    }
}

/// `n` iid draws from `g` by inverse-transform sampling, reproducible
/// given `seed`.
pub fn sample(g: &dyn Generator, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| g.inverse_cdf(rng.random::<f64>())).collect()
}

/// Bisection to `tol`, then a couple of Newton polishing steps that fall
/// back to the bisection result if they leave [lo, hi]. Assumes `cdf` is
/// non-decreasing with cdf(lo) <= p <= cdf(hi).
pub(crate) fn invert_monotone_cdf(
    cdf: &dyn Fn(f64) -> f64,
    density: &dyn Fn(f64) -> f64,
    p: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    if p <= 0.0 {
        return lo;
    }
    if p >= 1.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = density(x);
        if !(d.is_finite() && d > 0.0) {
            break;
        }
        let next = x - (cdf(x) - p) / d;
        if next.is_finite() && next > lo - tol && next < hi + tol {
            x = next.clamp(0.0, 1.0);
        } else {
            break;
        }
    }
    x
}

/// The uniform density f ≡ 1; generates the independence copula.
#[derive(Debug, Clone, Copy)]
pub struct UniformGen;

/// f ≡ 1 on [0, 1].
pub fn uniform_generator() -> UniformGen {
    UniformGen
}

impl Generator for UniformGen {
    fn id(&self) -> String {
        "uniform".into()
    }

    fn density(&self, _x: f64) -> f64 {
        1.0
    }

    fn cdf(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        p.clamp(0.0, 1.0)
    }
}

/// The staircase density f_n(x) = (2j-1)/n on [(j-1)/n, j/n), increasing
/// toward the triangular density 2x as n grows.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseGen {
    n: usize,
}

pub fn piecewise_generator(n: usize) -> Result<PiecewiseGen> {
    if n == 0 {
        return Err(Error::Domain("piecewise generator needs n >= 1".into()));
    }
    Ok(PiecewiseGen { n })
}

impl PiecewiseGen {
    /// Interval index of `x`, right-continuous, last interval closed.
    fn interval(&self, x: f64) -> usize {
        ((x * self.n as f64).floor() as usize).min(self.n - 1)
    }
}

impl Generator for PiecewiseGen {
    fn id(&self) -> String {
        format!("piecewise:{}", self.n)
    }

    fn density(&self, x: f64) -> f64 {
        let j = self.interval(x) + 1;
        (2 * j - 1) as f64 / self.n as f64
    }

    fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let n = self.n as f64;
        let j = self.interval(x) + 1;
        // mass of full intervals 1..j-1 is (j-1)^2/n^2
        let below = ((j - 1) * (j - 1)) as f64 / (n * n);
        below + (2 * j - 1) as f64 / n * (x - (j - 1) as f64 / n)
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let n = self.n as f64;
        // find j with (j-1)^2/n^2 <= p <= j^2/n^2
        let j = ((p.sqrt() * n).floor() as usize + 1).min(self.n);
        let below = ((j - 1) * (j - 1)) as f64 / (n * n);
        (j - 1) as f64 / n + (p - below) * n / (2 * j - 1) as f64
    }

    fn singular_points(&self) -> Vec<f64> {
        // jump discontinuities; quadrature must split here even though the
        // density stays bounded
        (1..self.n).map(|j| j as f64 / self.n as f64).collect()
    }
}

/// The triangular density f(x) = 2x.
#[derive(Debug, Clone, Copy)]
pub struct TriangularGen;

pub fn triangular_generator() -> TriangularGen {
    TriangularGen
}

impl Generator for TriangularGen {
    fn id(&self) -> String {
        "triangular".into()
    }

    fn density(&self, x: f64) -> f64 {
        2.0 * x
    }

    fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        x * x
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        p.clamp(0.0, 1.0).sqrt()
    }
}

/// Parameters of a Beta(α, β) distribution.
#[derive(Debug, Clone, Copy)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("beta parameter alpha = {alpha} must be positive")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta parameter beta = {beta} must be positive")));
        }
        Ok(Self { alpha, beta })
    }
}

/// Beta(α, β) density x^{α-1}(1-x)^{β-1} / B(α, β). For α < 1 (resp.
/// β < 1) the density diverges at 0 (resp. 1) and reports the endpoint as
/// a singular point.
#[derive(Debug, Clone, Copy)]
pub struct BetaGen {
    params: BetaParams,
    ln_norm: f64,
}

pub fn beta_generator(params: BetaParams) -> BetaGen {
    BetaGen {
        params,
        ln_norm: ln_beta(params.alpha, params.beta),
    }
}

impl Generator for BetaGen {
    fn id(&self) -> String {
        format!("beta:{},{}", self.params.alpha, self.params.beta)
    }

    fn density(&self, x: f64) -> f64 {
        let (a, b) = (self.params.alpha, self.params.beta);
        if x < 0.0 || x > 1.0 {
            return 0.0;
        }
        if x == 0.0 {
            return if a < 1.0 {
                f64::INFINITY
            } else if a == 1.0 {
                (-self.ln_norm).exp()
            } else {
                0.0
            };
        }
        if x == 1.0 {
            return if b < 1.0 {
                f64::INFINITY
            } else if b == 1.0 {
                (-self.ln_norm).exp()
            } else {
                0.0
            };
        }
        ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - self.ln_norm).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        beta_inc(self.params.alpha, self.params.beta, x.clamp(0.0, 1.0))
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        invert_monotone_cdf(
            &|x| self.cdf(x),
            &|x| self.density(x),
            p.clamp(0.0, 1.0),
            0.0,
            1.0,
            1e-12,
        )
    }

    fn singular_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        if self.params.alpha < 1.0 {
            pts.push(0.0);
        }
        if self.params.beta < 1.0 {
            pts.push(1.0);
        }
        pts
    }
}

/// Parse the generator spec grammar:
/// `uniform`, `piecewise:n`, `triangular`, `beta:alpha,beta`,
/// `pathology:terms,mode,scheme,seed`.
pub fn parse_spec(spec: &str) -> Result<Box<dyn Generator>> {
    let (head, args) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    match head {
        "uniform" => {
            no_args(spec, args)?;
            Ok(Box::new(uniform_generator()))
        }
        "triangular" => {
            no_args(spec, args)?;
            Ok(Box::new(triangular_generator()))
        }
        "piecewise" => {
            let n: usize = args
                .ok_or_else(|| Error::Parse("piecewise:n requires n".into()))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad piecewise count in `{spec}`")))?;
            Ok(Box::new(piecewise_generator(n)?))
        }
        "beta" => {
            let args = args.ok_or_else(|| Error::Parse("beta:alpha,beta requires parameters".into()))?;
            let mut it = args.split(',');
            let alpha = parse_f64(it.next(), "alpha", spec)?;
            let beta = parse_f64(it.next(), "beta", spec)?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("too many beta parameters in `{spec}`")));
            }
            Ok(Box::new(beta_generator(BetaParams::new(alpha, beta)?)))
        }
        "pathology" => {
            let args = args.ok_or_else(|| {
                Error::Parse("pathology:terms,mode,scheme,seed requires arguments".into())
            })?;
            Ok(Box::new(crate::pathology::parse_pathology_spec(args)?))
        }
        other => Err(Error::Parse(format!("unknown generator `{other}`"))),
    }
}

fn no_args(spec: &str, args: Option<&str>) -> Result<()> {
    if args.is_some() {
        return Err(Error::Parse(format!("`{spec}` takes no parameters")));
    }
    Ok(())
}

fn parse_f64(tok: Option<&str>, name: &str, spec: &str) -> Result<f64> {
    tok.ok_or_else(|| Error::Parse(format!("missing {name} in `{spec}`")))?
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {name} in `{spec}`")))
}

/// Quadrature of the density over [0, 1], splitting at declared singular
/// points. Used by validity checks; should return 1 for any generator.
pub fn density_integral(g: &dyn Generator, tol: f64) -> Result<numerics::QuadratureResult> {
    integrate_1d(|x| g.density(x), 0.0, 1.0, tol, &g.singular_points())
}
