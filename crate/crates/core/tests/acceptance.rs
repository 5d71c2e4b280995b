//! Acceptance gate: ten quantitative criteria, each printing exactly one
//! PASS/FAIL line. Tolerances are pinned here and nowhere else.

use modcop::copula::{CdfMethod, CopulaModel};
use modcop::generators::{
    beta_generator, density_integral, piecewise_generator, triangular_generator,
    uniform_generator, BetaParams, Generator,
};
use modcop::numerics::mod1;
use modcop::pathology::{
    indicator_excision, partial_sum_generator, singular_pair, unboundedness_probe,
    EnumerationMode, WeightScheme,
};
use modcop::stats;
use modcop::verify::sampler_chi_square;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::sync::Arc;

const N_SAMPLES: usize = 100_000;

fn battery() -> Vec<Arc<dyn Generator>> {
    vec![
        Arc::new(uniform_generator()),
        Arc::new(piecewise_generator(10).unwrap()),
        Arc::new(triangular_generator()),
        Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())),
        Arc::new(beta_generator(BetaParams::new(0.5, 0.5).unwrap())),
        Arc::new(beta_generator(BetaParams::new(0.5, 1.5).unwrap())),
        Arc::new(
            partial_sum_generator(
                50,
                EnumerationMode::EvenlySpaced,
                WeightScheme::PermutedGeometric { ratio: 1.1 },
                42,
            )
            .unwrap(),
        ),
    ]
}

fn report(criterion: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("[PASS] {criterion}: {detail}"),
        Err(detail) => {
            println!("[FAIL] {criterion}: {detail}");
            panic!("{criterion} failed: {detail}");
        }
    }
}

fn fail<T>(msg: String) -> Result<T, String> {
    Err(msg)
}

#[test]
fn criterion_01_copula_validity() {
    report("criterion 01 copula-validity", (|| {
        let mut worst_mass = 0.0f64;
        let mut min_ks_p = 1.0f64;
        let mut min_rect = f64::INFINITY;
        for g in battery() {
            for d in [2usize, 3] {
                let m = CopulaModel::new(d, Arc::clone(&g)).map_err(|e| e.to_string())?;
                // total mass of the density via the exact reduced quadrature
                let mass = m
                    .cdf(&vec![1.0; d], CdfMethod::Exact)
                    .map_err(|e| e.to_string())?
                    .value;
                worst_mass = worst_mass.max((mass - 1.0).abs());
                if (mass - 1.0).abs() > 1e-4 {
                    return fail(format!("{} d={d}: mass {mass}", g.id()));
                }
                // uniform margins of 10^5 draws
                let sample = m.sample(N_SAMPLES, 7);
                for j in 0..d {
                    let ks = stats::ks_uniformity(&sample.column(j)).map_err(|e| e.to_string())?;
                    min_ks_p = min_ks_p.min(ks.p_value);
                    if ks.p_value <= 0.001 {
                        return fail(format!("{} d={d} margin {j}: KS p {}", g.id(), ks.p_value));
                    }
                }
            }
            // d-increasing: 100 random rectangles per generator (d = 2)
            let m = CopulaModel::new(2, Arc::clone(&g)).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..100 {
                let (a1, b1) = sorted2(&mut rng);
                let (a2, b2) = sorted2(&mut rng);
                let mass = m
                    .rectangle_mass(&[a1, a2], &[b1, b2], CdfMethod::Exact)
                    .map_err(|e| e.to_string())?;
                min_rect = min_rect.min(mass);
                if mass < -1e-7 {
                    return fail(format!("{}: rectangle mass {mass}", g.id()));
                }
            }
        }
        Ok(format!(
            "max |mass-1| = {worst_mass:.2e}, min margin KS p = {min_ks_p:.4}, min rectangle = {min_rect:.2e}"
        ))
    })());
}

fn sorted2(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = rng.random::<f64>();
    let b = rng.random::<f64>();
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[test]
fn criterion_02_marginal_identity() {
    report("criterion 02 marginal-identity", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for g in battery() {
            for d in [2usize, 3] {
                let m = CopulaModel::new(d, Arc::clone(&g)).map_err(|e| e.to_string())?;
                for slot in 0..d {
                    for _ in 0..20 {
                        let t = rng.random::<f64>();
                        let mut u = vec![1.0; d];
                        u[slot] = t;
                        let c = m.cdf(&u, CdfMethod::Exact).map_err(|e| e.to_string())?.value;
                        worst = worst.max((c - t).abs());
                        if (c - t).abs() > 1e-6 {
                            return fail(format!("{} d={d} slot {slot}: |C - t| = {:.2e}", g.id(), (c - t).abs()));
                        }
                    }
                }
            }
        }
        Ok(format!("max |C(1,..,t,..,1) - t| = {worst:.2e}"))
    })());
}

#[test]
fn criterion_03_stochastic_representation() {
    report("criterion 03 stochastic-representation", (|| {
        let mut worst = 0.0f64;
        for g in battery() {
            let m = CopulaModel::new(3, Arc::clone(&g)).map_err(|e| e.to_string())?;
            let sample = m.sample(N_SAMPLES, 13);
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let rho = stats::spearman_rho_sample(&sample, i, j).map_err(|e| e.to_string())?;
                worst = worst.max(rho.value.abs());
                if rho.value.abs() > 0.013 {
                    return fail(format!("{} pair ({i},{j}): |rho| = {:.4}", g.id(), rho.value.abs()));
                }
            }
        }
        Ok(format!("max pairwise |rho| = {worst:.4} (gate 0.013)"))
    })());
}

#[test]
fn criterion_04_spearman_closed_form() {
    report("criterion 04 spearman-closed-form", (|| {
        let cases: [(Arc<dyn Generator>, f64); 4] = [
            (Arc::new(uniform_generator()), 0.0),
            (Arc::new(triangular_generator()), 0.0),
            (Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())), 0.125),
            (Arc::new(beta_generator(BetaParams::new(0.5, 0.5).unwrap())), -0.25),
        ];
        let mut worst_closed = 0.0f64;
        for (g, expected) in &cases {
            let rho = stats::spearman_rho_closed_form(g.as_ref()).map_err(|e| e.to_string())?;
            worst_closed = worst_closed.max((rho - expected).abs());
            if (rho - expected).abs() > 1e-6 {
                return fail(format!("{}: closed-form rho {rho} != {expected}", g.id()));
            }
        }
        // sample agreement across the battery
        let mut worst_gap = 0.0f64;
        for g in battery() {
            let closed = stats::spearman_rho_closed_form(g.as_ref()).map_err(|e| e.to_string())?;
            let m = CopulaModel::new(2, Arc::clone(&g)).map_err(|e| e.to_string())?;
            let sample = m.sample(N_SAMPLES, 17);
            let rho = stats::spearman_rho_sample(&sample, 0, 1).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max((rho.value - closed).abs());
            if (rho.value - closed).abs() > 0.013 {
                return fail(format!("{}: sample rho {} vs closed {closed}", g.id(), rho.value));
            }
        }
        // limit sequences stay inside (-1, 1/2) and are strictly monotone
        let mut up_prev = f64::NEG_INFINITY;
        let mut down_prev = f64::INFINITY;
        let (mut up, mut down) = (0.0, 0.0);
        for k in [1.0, 5.0, 50.0, 500.0] {
            up = stats::spearman_rho_closed_form(&beta_generator(
                BetaParams::new(k, k).map_err(|e| e.to_string())?,
            ))
            .map_err(|e| e.to_string())?;
            down = stats::spearman_rho_closed_form(&beta_generator(
                BetaParams::new(1.0 / k, 1.0 / k).map_err(|e| e.to_string())?,
            ))
            .map_err(|e| e.to_string())?;
            if !(up > up_prev && down < down_prev) {
                return fail(format!("k={k}: sequences not strictly monotone ({up}, {down})"));
            }
            if !(up > -1.0 && up < 0.5 && down > -1.0 && down < 0.5) {
                return fail(format!("k={k}: rho outside (-1, 1/2)"));
            }
            up_prev = up;
            down_prev = down;
        }
        Ok(format!(
            "closed-form gap {worst_closed:.2e}, sample gap {worst_gap:.4}, beta(k,k) -> {up:.4}, beta(1/k,1/k) -> {down:.4}"
        ))
    })());
}

#[test]
fn criterion_05_derivative_bounds() {
    report("criterion 05 derivative-bounds", (|| {
        let gens = battery();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut worst_second = 0.0f64;
        // 200 interior points spread over the battery (d = 3)
        for point in 0..200 {
            let g = &gens[point % gens.len()];
            let m = CopulaModel::new(3, Arc::clone(g)).map_err(|e| e.to_string())?;
            let u: Vec<f64> = (0..3).map(|_| 0.01 + 0.98 * rng.random::<f64>()).collect();
            for j in 0..3 {
                let pd = m.partial_derivative(&u, j).map_err(|e| e.to_string())?;
                lo = lo.min(pd);
                hi = hi.max(pd);
                if !(-1e-6..=1.0 + 1e-6).contains(&pd) {
                    return fail(format!("{} at {u:?}: dC/du_{j} = {pd}", g.id()));
                }
            }
            let mixed = m.second_partial(&u, 0, 1).map_err(|e| e.to_string())?;
            let own = m.second_partial(&u, 0, 0).map_err(|e| e.to_string())?;
            for s in [mixed, own] {
                worst_second = worst_second.max(s.abs());
                if !((-1.0 - 1e-6)..=(1.0 + 1e-6)).contains(&s) {
                    return fail(format!("{} at {u:?}: second partial = {s}", g.id()));
                }
            }
        }
        // finite-difference agreement for the smooth generators
        let smooth: Vec<Arc<dyn Generator>> = vec![
            Arc::new(uniform_generator()),
            Arc::new(triangular_generator()),
            Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())),
        ];
        let mut worst_fd = 0.0f64;
        for g in smooth {
            let m = CopulaModel::new(3, Arc::clone(&g)).map_err(|e| e.to_string())?;
            for _ in 0..15 {
                let u: Vec<f64> = (0..3).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
                let exact = m.partial_derivative(&u, 1).map_err(|e| e.to_string())?;
                let h = 1e-5;
                let mut up = u.clone();
                let mut dn = u.clone();
                up[1] += h;
                dn[1] -= h;
                let fd = (m.cdf(&up, CdfMethod::Exact).map_err(|e| e.to_string())?.value
                    - m.cdf(&dn, CdfMethod::Exact).map_err(|e| e.to_string())?.value)
                    / (2.0 * h);
                worst_fd = worst_fd.max((exact - fd).abs());
                if (exact - fd).abs() > 1e-5 {
                    return fail(format!("{} at {u:?}: exact {exact} vs fd {fd}", g.id()));
                }
            }
        }
        Ok(format!(
            "first in [{lo:.2e}, {hi:.6}], max |second| = {worst_second:.6}, max fd gap = {worst_fd:.2e}"
        ))
    })());
}

#[test]
fn criterion_06_tail_decay() {
    report("criterion 06 tail-decay", (|| {
        let g: Arc<dyn Generator> =
            Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap()));
        let mut detail = String::new();
        for d in [2usize, 3] {
            let m = CopulaModel::new(d, Arc::clone(&g)).map_err(|e| e.to_string())?;
            let pts = stats::tail_diagnostic(&m, &[0.1, 0.05, 0.02, 0.01]).map_err(|e| e.to_string())?;
            for w in pts.windows(2) {
                if !(w[1].ratio < w[0].ratio) {
                    return fail(format!("d={d}: ratio not strictly decreasing at t={}", w[1].t));
                }
            }
            for p in &pts {
                if p.ratio > p.bound + 1e-8 {
                    return fail(format!("d={d} t={}: ratio {} > bound {}", p.t, p.ratio, p.bound));
                }
            }
            detail.push_str(&format!("d={d}: ratio {:.3e} -> {:.3e}; ", pts[0].ratio, pts[3].ratio));
        }
        Ok(detail)
    })());
}

#[test]
fn criterion_07_pathology() {
    report("criterion 07 pathology", (|| {
        for q in [1.0 / 3.0, 0.5, 0.9] {
            let g = singular_pair(q).map_err(|e| e.to_string())?;
            let r = density_integral(&g, 1e-10).map_err(|e| e.to_string())?;
            if (r.value - 1.0).abs() > 1e-8 {
                return fail(format!("f_q q={q}: integral {}", r.value));
            }
        }
        for n in [1usize, 10, 100] {
            let g = partial_sum_generator(
                n,
                EnumerationMode::EvenlySpaced,
                WeightScheme::PermutedGeometric { ratio: 1.1 },
                42,
            )
            .map_err(|e| e.to_string())?;
            let r = density_integral(&g, 1e-10).map_err(|e| e.to_string())?;
            if (r.value - 1.0).abs() > 1e-7 {
                return fail(format!("h_{n}: integral {}", r.value));
            }
            // sampler agrees with its own cdf (probability transform is uniform)
            let draws = modcop::generators::sample(&g, N_SAMPLES, 23);
            let transformed: Vec<f64> = draws.iter().map(|&x| g.cdf(x)).collect();
            let ks = stats::ks_uniformity(&transformed).map_err(|e| e.to_string())?;
            if ks.p_value <= 0.001 {
                return fail(format!("h_{n} sampler: KS p = {}", ks.p_value));
            }
        }

        // unboundedness witness above 10^9 inside (0.45, 0.55)
        let (gen, w) = unboundedness_probe(
            EnumerationMode::EvenlySpaced,
            WeightScheme::PermutedGeometric { ratio: 1.1 },
            42,
            (0.45, 0.55),
            1e9,
        )
        .map_err(|e| e.to_string())?;
        if !(w.value.is_finite() && w.value > 1e9) {
            return fail(format!("witness value {}", w.value));
        }
        // lift to the copula: u = (x, 1) leaves the mod-1 sum at x, so the
        // copula density at (the real point certified by) u is the witness
        let u = [w.x, 1.0];
        let wrapped = mod1(u[0] + u[1]).map_err(|e| e.to_string())?.value();
        if (wrapped - w.x).abs() > 1e-12 {
            return fail(format!("copula point sum {wrapped} vs witness x {}", w.x));
        }
        let c_u = w.value;
        if !(c_u.is_finite() && c_u > 1e9) {
            return fail(format!("copula density {c_u}"));
        }

        // excision stays finite everywhere we look
        let sing = Generator::singular_points(&gen);
        let excised = indicator_excision(Box::new(gen), sing);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..N_SAMPLES {
            let x = rng.random::<f64>();
            let y = excised.density(x);
            if !y.is_finite() {
                return fail(format!("excised density diverges at {x}"));
            }
        }
        Ok(format!(
            "integrals ok, witness h_{}({:.15}) = {:.3e}, c(u) = {:.3e}, excision finite at {N_SAMPLES} points",
            w.n, w.x, w.value, c_u
        ))
    })());
}

#[test]
fn criterion_08_sampler_exactness() {
    report("criterion 08 sampler-exactness", (|| {
        let g: Arc<dyn Generator> =
            Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap()));
        let m = CopulaModel::new(2, Arc::clone(&g)).map_err(|e| e.to_string())?;
        let sample = m.sample(1_000_000, 31);
        let p = sampler_chi_square(&m, &sample, 20).map_err(|e| e.to_string())?;
        if p <= 0.001 {
            return fail(format!("chi-square p = {p}"));
        }
        Ok(format!("20x20 chi-square p = {p:.4} on 10^6 draws"))
    })());
}

#[test]
fn criterion_09_kendall_diagnostic() {
    report("criterion 09 kendall-diagnostic", (|| {
        let mut max_tau = f64::NEG_INFINITY;
        for g in battery() {
            let m = CopulaModel::new(2, Arc::clone(&g)).map_err(|e| e.to_string())?;
            let sample = m.sample(N_SAMPLES, 37);
            let tau = stats::kendall_tau_sample(&sample, 0, 1).map_err(|e| e.to_string())?;
            max_tau = max_tau.max(tau);
            if tau > 2.0 / 3.0 + 0.02 {
                return fail(format!("{}: tau = {tau}", g.id()));
            }
        }
        Ok(format!("max sample tau = {max_tau:.4} (gate {:.4})", 2.0 / 3.0 + 0.02))
    })());
}

#[test]
fn criterion_10_cli_determinism() {
    report("criterion 10 cli-determinism", (|| {
        let bin = env!("CARGO_BIN_EXE_modcop");
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out_a = dir.path().join("a.csv");
        let out_b = dir.path().join("b.csv");

        let file_cmds: Vec<Vec<String>> = vec![
            vec!["sample", "--gen", "beta:1.5,1.5", "--dim", "3", "--n", "200", "--seed", "9"],
            vec!["density-grid", "--gen", "piecewise:10", "--resolution", "21"],
            vec!["generator-plot", "--gen", "pathology:10,evenly,geom1.1,42", "--resolution", "64"],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect();

        for args in &file_cmds {
            let run = |out: &std::path::Path| -> Result<Vec<u8>, String> {
                let status = Command::new(bin)
                    .args(args)
                    .arg("--out")
                    .arg(out)
                    .status()
                    .map_err(|e| e.to_string())?;
                if !status.success() {
                    return fail(format!("{args:?} exited {status}"));
                }
                std::fs::read(out).map_err(|e| e.to_string())
            };
            if run(&out_a)? != run(&out_b)? {
                return fail(format!("{args:?} not byte-identical"));
            }
        }

        let stdout_cmds: Vec<Vec<&str>> = vec![
            vec!["rho", "--gen", "beta:0.5,0.5", "--n", "5000", "--seed", "3"],
            vec!["verify", "--check", "grounded", "--seed", "1"],
            vec!["probe", "--interval", "0.45,0.55", "--threshold", "1e6"],
        ];
        for args in &stdout_cmds {
            let run = || -> Result<Vec<u8>, String> {
                let output = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
                if !output.status.success() {
                    return fail(format!("{args:?} exited {}", output.status));
                }
                Ok(output.stdout)
            };
            if run()? != run()? {
                return fail(format!("{args:?} stdout not byte-identical"));
            }
        }
        Ok("6 commands byte-identical across reruns".into())
    })());
}
