//! The verification battery behind `modcop verify`: every module-level
//! invariant, run across a fixed set of generators at desk scale with
//! quantitative gates.

use crate::copula::{CdfMethod, CopulaModel};
use crate::generators::{
    beta_generator, density_integral, piecewise_generator, triangular_generator,
    uniform_generator, BetaParams, Generator,
};
use crate::pathology::{
    self, singular_pair, unboundedness_probe, EnumerationMode, WeightScheme,
};
use crate::stats;
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Knobs for the battery; defaults keep the whole run under a few minutes.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Only run checks whose name contains this substring.
    pub check_filter: Option<String>,
    /// Dimension for the Fréchet bound grid check.
    pub dim: usize,
    /// Sample size for the statistical gates.
    pub n: usize,
    pub seed: u64,
    /// Self-test of the harness: add a generator with a negated mixture
    /// weight and confirm the battery catches it.
    pub inject_bug: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            check_filter: None,
            dim: 2,
            n: 20_000,
            seed: 42,
            inject_bug: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn battery() -> Vec<Arc<dyn Generator>> {
    vec![
        Arc::new(uniform_generator()),
        Arc::new(piecewise_generator(10).unwrap()),
        Arc::new(triangular_generator()),
        Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())),
        Arc::new(beta_generator(BetaParams::new(0.5, 0.5).unwrap())),
        Arc::new(beta_generator(BetaParams::new(0.5, 1.5).unwrap())),
        Arc::new(
            pathology::partial_sum_generator(
                50,
                EnumerationMode::EvenlySpaced,
                WeightScheme::PermutedGeometric { ratio: 1.1 },
                42,
            )
            .unwrap(),
        ),
    ]
}

/// Smooth subset for finite-difference comparisons (discontinuous or
/// singular generators make the FD truncation term blow up).
fn smooth_battery() -> Vec<Arc<dyn Generator>> {
    vec![
        Arc::new(uniform_generator()),
        Arc::new(triangular_generator()),
        Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())),
    ]
}

/// Mixture of two singular pairs with the second weight negated: not a
/// density. Exists only so `--inject-bug` proves the battery can fail.
struct NegatedWeightGen;

impl Generator for NegatedWeightGen {
    fn id(&self) -> String {
        "injected-bug".into()
    }

    fn density(&self, x: f64) -> f64 {
        let a = singular_pair(1.0 / 3.0).unwrap();
        let b = singular_pair(2.0 / 3.0).unwrap();
        0.7 * a.density(x) - 0.3 * b.density(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        let a = singular_pair(1.0 / 3.0).unwrap();
        let b = singular_pair(2.0 / 3.0).unwrap();
        0.7 * a.cdf(x) - 0.3 * b.cdf(x)
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        p.clamp(0.0, 1.0)
    }

    fn singular_points(&self) -> Vec<f64> {
        vec![1.0 / 3.0, 2.0 / 3.0]
    }
}

struct Harness {
    results: Vec<CheckResult>,
    filter: Option<String>,
}

impl Harness {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        if let Some(filter) = &self.filter {
            if !name.contains(filter.as_str()) {
                return;
            }
        }
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.results.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

pub fn run_battery(config: &VerifyConfig) -> Vec<CheckResult> {
    let mut gens = battery();
    if config.inject_bug {
        gens.push(Arc::new(NegatedWeightGen));
    }
    let mut h = Harness {
        results: Vec::new(),
        filter: config.check_filter.clone(),
    };
    let n = config.n;
    let seed = config.seed;

    h.run("density-integral", || {
        let mut worst: (f64, String) = (0.0, String::new());
        for g in &gens {
            let r = density_integral(g.as_ref(), 1e-10)?;
            let gap = (r.value - 1.0).abs();
            if gap > worst.0 {
                worst = (gap, g.id());
            }
        }
        Ok((worst.0 <= 1e-8, format!("max |∫f - 1| = {:.2e} ({})", worst.0, worst.1)))
    });

    h.run("copula-mass", || {
        let mut worst = 0.0f64;
        for g in &gens {
            for d in [2usize, 3] {
                let m = CopulaModel::new(d, Arc::clone(g))?;
                let c = m.cdf(&vec![1.0; d], CdfMethod::Exact)?;
                worst = worst.max((c.value - 1.0).abs());
            }
        }
        Ok((worst <= 1e-4, format!("max |C(1..1) - 1| = {worst:.2e}")))
    });

    h.run("marginal", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for g in &gens {
            for d in [2usize, 3] {
                let m = CopulaModel::new(d, Arc::clone(g))?;
                for slot in 0..d {
                    for _ in 0..5 {
                        let t = rng.random::<f64>();
                        let mut u = vec![1.0; d];
                        u[slot] = t;
                        let c = m.cdf(&u, CdfMethod::Exact)?;
                        worst = worst.max((c.value - t).abs());
                    }
                }
            }
        }
        Ok((worst <= 1e-6, format!("max |C(1,..,t,..,1) - t| = {worst:.2e}")))
    });

    h.run("grounded", || {
        for g in &gens {
            let m = CopulaModel::new(3, Arc::clone(g))?;
            let c = m.cdf(&[0.4, 0.0, 0.9], CdfMethod::Exact)?;
            if c.value != 0.0 {
                return Ok((false, format!("{}: C = {} != 0", g.id(), c.value)));
            }
        }
        Ok((true, "C = 0 exactly whenever a coordinate is 0".into()))
    });

    h.run("d-increasing", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1);
        let mut worst = 0.0f64;
        for g in &gens {
            let m = CopulaModel::new(2, Arc::clone(g))?;
            for _ in 0..25 {
                let (a1, b1) = ordered_pair(&mut rng);
                let (a2, b2) = ordered_pair(&mut rng);
                let mass = m.rectangle_mass(&[a1, a2], &[b1, b2], CdfMethod::Exact)?;
                worst = worst.min(mass);
            }
        }
        Ok((worst >= -1e-7, format!("min rectangle mass = {worst:.2e}")))
    });

    h.run("frechet", || {
        let d = config.dim;
        let mut worst = 0.0f64;
        // at higher dimensions restrict to the closed-form generators to
        // keep the grid affordable
        let grid_gens: Vec<Arc<dyn Generator>> = if d <= 2 {
            gens.clone()
        } else {
            smooth_battery()
        };
        for g in &grid_gens {
            let m = CopulaModel::new(d, Arc::clone(g))?;
            let mut idx = vec![0usize; d];
            loop {
                let u: Vec<f64> = idx.iter().map(|&i| i as f64 / 10.0).collect();
                let c = m.cdf(&u, CdfMethod::Exact)?.value;
                let lower = (u.iter().sum::<f64>() - (d as f64 - 1.0)).max(0.0);
                let upper = u.iter().copied().fold(f64::INFINITY, f64::min);
                worst = worst.max(lower - c).max(c - upper);
                // odometer over the 11^d grid
                let mut k = 0;
                loop {
                    idx[k] += 1;
                    if idx[k] <= 10 {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                    if k == d {
                        break;
                    }
                }
                if k == d {
                    break;
                }
            }
        }
        Ok((worst <= 1e-7, format!("max bound violation = {worst:.2e} on 11^{d} grid")))
    });

    h.run("lipschitz", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2);
        let mut worst = 0.0f64;
        for g in &gens {
            let m = CopulaModel::new(2, Arc::clone(g))?;
            for _ in 0..20 {
                let u = [rng.random::<f64>(), rng.random::<f64>()];
                let v = [rng.random::<f64>(), rng.random::<f64>()];
                let du = (u[0] - v[0]).abs() + (u[1] - v[1]).abs();
                let dc = (m.cdf(&u, CdfMethod::Exact)?.value - m.cdf(&v, CdfMethod::Exact)?.value).abs();
                worst = worst.max(dc - du);
            }
        }
        Ok((worst <= 1e-7, format!("max |ΔC| - ‖Δu‖₁ = {worst:.2e}")))
    });

    h.run("exchangeable", || {
        let mut worst = 0.0f64;
        for g in &gens {
            let m = CopulaModel::new(3, Arc::clone(g))?;
            let u = [0.21, 0.55, 0.83];
            let perm = [0.83, 0.21, 0.55];
            let c1 = m.cdf(&u, CdfMethod::Exact)?.value;
            let c2 = m.cdf(&perm, CdfMethod::Exact)?.value;
            worst = worst.max((c1 - c2).abs() / c1.abs().max(1e-12));
        }
        Ok((worst <= 1e-10, format!("max relative permutation gap = {worst:.2e}")))
    });

    h.run("hyperplane-constancy", || {
        for g in &gens {
            let m = CopulaModel::new(2, Arc::clone(g))?;
            for (u1, u2) in [([0.25, 0.5], [0.375, 0.375]), ([0.5, 0.75], [0.625, 0.625])] {
                if m.density(&u1)?.to_bits() != m.density(&u2)?.to_bits() {
                    return Ok((false, format!("{}: {u1:?} vs {u2:?}", g.id())));
                }
            }
        }
        Ok((true, "densities bit-equal along Σu = r".into()))
    });

    h.run("derivative-bounds", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut second_worst = 0.0f64;
        for g in &gens {
            let m = CopulaModel::new(3, Arc::clone(g))?;
            for _ in 0..20 {
                let u: Vec<f64> = (0..3).map(|_| 0.02 + 0.96 * rng.random::<f64>()).collect();
                for j in 0..3 {
                    let pd = m.partial_derivative(&u, j)?;
                    lo = lo.min(pd);
                    hi = hi.max(pd);
                }
                let s12 = m.second_partial(&u, 0, 1)?;
                let s11 = m.second_partial(&u, 0, 0)?;
                second_worst = second_worst.max(s12.abs()).max(s11.abs());
            }
        }
        let ok = lo >= -1e-6 && hi <= 1.0 + 1e-6 && second_worst <= 1.0 + 1e-6;
        Ok((ok, format!("first ∈ [{lo:.3e}, {hi:.6}], max |second| = {second_worst:.6}")))
    });

    h.run("derivative-fd", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4);
        let mut worst = 0.0f64;
        for g in smooth_battery() {
            let m = CopulaModel::new(3, Arc::clone(&g))?;
            for _ in 0..10 {
                let u: Vec<f64> = (0..3).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
                let exact = m.partial_derivative(&u, 0)?;
                let h_step = 1e-4;
                let mut hi = u.clone();
                let mut lo = u.clone();
                hi[0] += h_step;
                lo[0] -= h_step;
                let fd = (m.cdf(&hi, CdfMethod::Exact)?.value - m.cdf(&lo, CdfMethod::Exact)?.value)
                    / (2.0 * h_step);
                worst = worst.max((exact - fd).abs());
            }
        }
        Ok((worst <= 1e-5, format!("max |exact - fd| = {worst:.2e}")))
    });

    h.run("ks-margins", || {
        let mut min_p = 1.0f64;
        for g in &gens {
            let m = CopulaModel::new(3, Arc::clone(g))?;
            let sample = m.sample(n, seed ^ 0x5);
            for j in 0..3 {
                let r = stats::ks_uniformity(&sample.column(j))?;
                min_p = min_p.min(r.p_value);
            }
        }
        Ok((min_p > 0.001, format!("min margin KS p = {min_p:.4}")))
    });

    h.run("subvector-independence", || {
        let gate = 4.0 / (n as f64).sqrt();
        let mut worst = 0.0f64;
        for g in &gens {
            let m = CopulaModel::new(3, Arc::clone(g))?;
            let sample = m.sample(n, seed ^ 0x6);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let r = stats::spearman_rho_sample(&sample, i, j)?;
                worst = worst.max(r.value.abs());
            }
        }
        Ok((worst <= gate, format!("max pairwise |ρ| = {worst:.4} (gate {gate:.4})")))
    });

    h.run("rho-closed-form", || {
        let cases: [(Arc<dyn Generator>, f64); 4] = [
            (Arc::new(uniform_generator()), 0.0),
            (Arc::new(triangular_generator()), 0.0),
            (Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())), 0.125),
            (Arc::new(beta_generator(BetaParams::new(0.5, 0.5).unwrap())), -0.25),
        ];
        let mut worst = 0.0f64;
        for (g, expected) in &cases {
            let rho = stats::spearman_rho_closed_form(g.as_ref())?;
            worst = worst.max((rho - expected).abs());
        }
        // limit sequences from the open range (-1, 1/2)
        let mut increasing = f64::NEG_INFINITY;
        let mut decreasing = f64::INFINITY;
        let mut monotone = true;
        for k in [1.0, 5.0, 50.0, 500.0] {
            let up = stats::spearman_rho_closed_form(&beta_generator(BetaParams::new(k, k)?))?;
            let down = stats::spearman_rho_closed_form(&beta_generator(BetaParams::new(
                1.0 / k,
                1.0 / k,
            )?))?;
            monotone &= up > increasing && down < decreasing;
            monotone &= up > -1.0 && up < 0.5 && down > -1.0 && down < 0.5;
            increasing = up;
            decreasing = down;
        }
        let ok = worst <= 1e-6 && monotone && increasing < 0.5 && decreasing > -1.0;
        Ok((
            ok,
            format!("max closed-form gap {worst:.2e}; β(k,k)→{increasing:.4}, β(1/k,1/k)→{decreasing:.4}"),
        ))
    });

    h.run("rho-sample-vs-closed", || {
        let gate = 4.0 / (n as f64).sqrt();
        let mut worst = 0.0f64;
        for g in &gens {
            let closed = stats::spearman_rho_closed_form(g.as_ref())?;
            let m = CopulaModel::new(2, Arc::clone(g))?;
            let sample = m.sample(n, seed ^ 0x7);
            let r = stats::spearman_rho_sample(&sample, 0, 1)?;
            worst = worst.max((r.value - closed).abs());
        }
        Ok((worst <= gate, format!("max |sample - closed| = {worst:.4} (gate {gate:.4})")))
    });

    h.run("tau-bound", || {
        let mut max_tau = f64::NEG_INFINITY;
        for g in &gens {
            let m = CopulaModel::new(2, Arc::clone(g))?;
            let sample = m.sample(n, seed ^ 0x8);
            max_tau = max_tau.max(stats::kendall_tau_sample(&sample, 0, 1)?);
        }
        Ok((max_tau <= 2.0 / 3.0 + 0.02, format!("max sample τ = {max_tau:.4}")))
    });

    h.run("tail-decay", || {
        let g: Arc<dyn Generator> = Arc::new(beta_generator(BetaParams::new(1.5, 1.5)?));
        let mut ok = true;
        let mut detail = String::new();
        for d in [2usize, 3] {
            let m = CopulaModel::new(d, Arc::clone(&g))?;
            let pts = stats::tail_diagnostic(&m, &[0.1, 0.05, 0.02, 0.01])?;
            for w in pts.windows(2) {
                ok &= w[1].ratio < w[0].ratio;
            }
            for p in &pts {
                ok &= p.ratio <= p.bound + 1e-8;
            }
            detail.push_str(&format!("d={d}: ratio(0.01)={:.3e} ", pts[3].ratio));
        }
        Ok((ok, detail))
    });

    h.run("pathology-integrals", || {
        let mut worst = 0.0f64;
        for q in [1.0 / 3.0, 0.5, 0.9] {
            let g = singular_pair(q)?;
            worst = worst.max((density_integral(&g, 1e-10)?.value - 1.0).abs());
        }
        if worst > 1e-8 {
            return Ok((false, format!("f_q integral off by {worst:.2e}")));
        }
        let mut worst_h = 0.0f64;
        for terms in [1usize, 10, 100] {
            let g = pathology::partial_sum_generator(
                terms,
                EnumerationMode::EvenlySpaced,
                WeightScheme::PermutedGeometric { ratio: 1.1 },
                42,
            )?;
            worst_h = worst_h.max((density_integral(&g, 1e-10)?.value - 1.0).abs());
        }
        Ok((worst_h <= 1e-7, format!("f_q gap {worst:.2e}, h_n gap {worst_h:.2e}")))
    });

    h.run("pathology-sampler", || {
        let g = pathology::partial_sum_generator(
            10,
            EnumerationMode::EvenlySpaced,
            WeightScheme::PermutedGeometric { ratio: 1.1 },
            42,
        )?;
        // probability transform of the draws should be uniform
        let inverse = crate::generators::sample(&g, n, seed ^ 0x9);
        let via_cdf: Vec<f64> = inverse.iter().map(|&x| g.cdf(x)).collect();
        let p_inv = stats::ks_uniformity(&via_cdf)?.p_value;
        let mixture = g.sample_mixture(n, seed ^ 0xa);
        let via_cdf: Vec<f64> = mixture.iter().map(|&x| g.cdf(x)).collect();
        let p_mix = stats::ks_uniformity(&via_cdf)?.p_value;
        Ok((
            p_inv > 0.001 && p_mix > 0.001,
            format!("KS p: inverse {p_inv:.4}, mixture {p_mix:.4}"),
        ))
    });

    h.run("unboundedness-probe", || {
        let (_, w) = unboundedness_probe(
            EnumerationMode::EvenlySpaced,
            WeightScheme::PermutedGeometric { ratio: 1.1 },
            42,
            (0.45, 0.55),
            1e6,
        )?;
        Ok((
            w.value.is_finite() && w.value > 1e6,
            format!("witness h_{}({} - {:.1e}) = {:.3e}", w.n, w.singularity, w.offset, w.value),
        ))
    });

    h.run("excision-finite", || {
        let g = pathology::partial_sum_generator(
            10,
            EnumerationMode::EvenlySpaced,
            WeightScheme::PermutedGeometric { ratio: 1.1 },
            42,
        )?;
        let sing = crate::generators::Generator::singular_points(&g);
        let excised = pathology::indicator_excision(Box::new(g), sing);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb);
        for _ in 0..n {
            let x = rng.random::<f64>();
            if !excised.density(x).is_finite() {
                return Ok((false, format!("diverges at {x}")));
            }
        }
        Ok((true, format!("finite at {n} random points")))
    });

    h.run("sampler-chisq", || {
        let g: Arc<dyn Generator> = Arc::new(beta_generator(BetaParams::new(1.5, 1.5)?));
        let m = CopulaModel::new(2, Arc::clone(&g))?;
        let sample = m.sample(n, seed ^ 0xc);
        let p = sampler_chi_square(&m, &sample, 10)?;
        Ok((p > 0.001, format!("chi-square p = {p:.4}")))
    });

    h.results
}

fn ordered_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = rng.random::<f64>();
    let b = rng.random::<f64>();
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Chi-square p-value for a bivariate sample binned on a `bins`×`bins`
/// grid against exact cell probabilities from the CDF by
/// inclusion-exclusion.
pub fn sampler_chi_square(model: &CopulaModel, sample: &crate::copula::SampleMatrix, bins: usize) -> Result<f64> {
    let n = sample.n() as f64;
    // cdf on the (bins+1)^2 lattice, cells by inclusion-exclusion
    let mut lattice = vec![0.0; (bins + 1) * (bins + 1)];
    for i in 0..=bins {
        for j in 0..=bins {
            let u = [i as f64 / bins as f64, j as f64 / bins as f64];
            lattice[i * (bins + 1) + j] = model.cdf(&u, CdfMethod::Exact)?.value;
        }
    }
    let cell_prob = |i: usize, j: usize| -> f64 {
        let idx = |a: usize, b: usize| lattice[a * (bins + 1) + b];
        idx(i + 1, j + 1) - idx(i, j + 1) - idx(i + 1, j) + idx(i, j)
    };

    let mut counts = vec![0u64; bins * bins];
    for row in sample.rows() {
        let i = ((row[0] * bins as f64) as usize).min(bins - 1);
        let j = ((row[1] * bins as f64) as usize).min(bins - 1);
        counts[i * bins + j] += 1;
    }

    let mut statistic = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let expected = n * cell_prob(i, j);
            if expected <= 0.0 {
                continue;
            }
            let diff = counts[i * bins + j] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let dof = (bins * bins - 1) as f64;
    Ok(crate::special::gamma_q(dof / 2.0, statistic / 2.0))
}
