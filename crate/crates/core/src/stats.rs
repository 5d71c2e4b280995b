//! Rank-based estimators and diagnostics: the empirical copula, Spearman's
//! rho (closed form and sample), Kendall's tau, the lower-tail decay
//! diagnostic, and a one-sample Kolmogorov-Smirnov uniformity test.

use crate::copula::{CdfMethod, CopulaModel, SampleMatrix};
use crate::generators::Generator;
use crate::numerics::integrate_1d;
use crate::{Error, Result};

/// Rank-transformed sample supporting step-function copula evaluation.
/// Each column of `ranks` is a permutation of 1..=n; ties (degenerate for
/// continuous data) are broken by original row order.
#[derive(Debug, Clone)]
pub struct EmpiricalCopula {
    ranks: Vec<u32>,
    n: usize,
    dim: usize,
}

/// Per-column ranks of a sample matrix, 1-based, ties broken by row order.
pub fn empirical_copula(data: &SampleMatrix) -> Result<EmpiricalCopula> {
    if data.n() == 0 {
        return Err(Error::Domain("empirical copula of empty sample".into()));
    }
    let (n, dim) = (data.n(), data.dim());
    let mut ranks = vec![0u32; n * dim];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        let col = data.column(j);
        order.sort_by(|&a, &b| {
            col[a]
                .partial_cmp(&col[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        for (rank, &row) in order.iter().enumerate() {
            ranks[row * dim + j] = (rank + 1) as u32;
        }
        order.sort_unstable();
    }
    Ok(EmpiricalCopula { ranks, n, dim })
}

impl EmpiricalCopula {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank of observation `row` in variable `col` (1-based).
    pub fn rank(&self, row: usize, col: usize) -> u32 {
        self.ranks[row * self.dim + col]
    }

    /// Ĉ_n(u) = (1/n) Σ_k 1{R_k^j <= n u_j for all j}.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let n = self.n as f64;
        let mut hits = 0usize;
        for row in 0..self.n {
            let inside = (0..self.dim).all(|j| self.rank(row, j) as f64 <= n * u[j]);
            if inside {
                hits += 1;
            }
        }
        Ok(hits as f64 / n)
    }

    fn rank_column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|row| self.rank(row, j) as f64).collect()
    }
}

/// Spearman's rho with a crude standard error (sample estimator only).
#[derive(Debug, Clone, Copy)]
pub struct RhoResult {
    pub value: f64,
    pub standard_error: f64,
}

/// Closed-form Spearman's rho of the bivariate copula generated by `g`:
/// 6 E[X(1-X)] - 1 with X ~ g, evaluated by quadrature. Always lies in
/// the open interval (-1, 1/2).
pub fn spearman_rho_closed_form(g: &dyn Generator) -> Result<f64> {
    let moment = integrate_1d(
        |x| x * (1.0 - x) * g.density(x),
        0.0,
        1.0,
        1e-11,
        &g.singular_points(),
    )?;
    Ok(6.0 * moment.value - 1.0)
}

/// Sample Spearman's rho between columns i and j: the Pearson correlation
/// of the rank columns. Standard error reported as 1/sqrt(n-1).
pub fn spearman_rho_sample(data: &SampleMatrix, i: usize, j: usize) -> Result<RhoResult> {
    if data.n() < 3 {
        return Err(Error::Domain("spearman rho needs n >= 3".into()));
    }
    let emp = empirical_copula(data)?;
    let a = emp.rank_column(i);
    let b = emp.rank_column(j);
    let value = pearson(&a, &b)?;
    Ok(RhoResult {
        value,
        standard_error: 1.0 / ((data.n() - 1) as f64).sqrt(),
    })
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::Domain("correlation undefined for constant column".into()));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Sample Kendall's tau between columns i and j: concordant minus
/// discordant pair fraction, via O(n log n) inversion counting.
pub fn kendall_tau_sample(data: &SampleMatrix, i: usize, j: usize) -> Result<f64> {
    let n = data.n();
    if n < 2 {
        return Err(Error::Domain("kendall tau needs n >= 2".into()));
    }
    let emp = empirical_copula(data)?;
    // sort by the i-ranks (a permutation, so no ties), then count
    // inversions in the j-ranks
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&row| emp.rank(row, i));
    let mut ys: Vec<u32> = order.iter().map(|&row| emp.rank(row, j)).collect();
    let inversions = count_inversions(&mut ys);
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok(1.0 - 2.0 * inversions as f64 / pairs)
}

fn count_inversions(xs: &mut [u32]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = xs.split_at_mut(mid);
    let mut inv = count_inversions(left) + count_inversions(right);
    let mut merged = Vec::with_capacity(n);
    let (mut a, mut b) = (0, 0);
    while a < left.len() && b < right.len() {
        if left[a] <= right[b] {
            merged.push(left[a]);
            a += 1;
        } else {
            inv += (left.len() - a) as u64;
            merged.push(right[b]);
            b += 1;
        }
    }
    merged.extend_from_slice(&left[a..]);
    merged.extend_from_slice(&right[b..]);
    xs.copy_from_slice(&merged);
    inv
}

/// One entry of the lower-tail decay diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct TailPoint {
    pub t: f64,
    /// C(t, ..., t) / t^{d-1}; tends to 0 as t does.
    pub ratio: f64,
    /// The proof-side upper bound d^{d-1}/(d-1)! * F(t d).
    pub bound: f64,
}

/// Diagonal tail ratios C(t,...,t)/t^{d-1} against the explicit upper
/// bound; all t must lie in (0, 1/d].
pub fn tail_diagnostic(model: &CopulaModel, t_values: &[f64]) -> Result<Vec<TailPoint>> {
    let d = model.dimension();
    let d_f = d as f64;
    for &t in t_values {
        if !(t > 0.0 && t <= 1.0 / d_f) {
            return Err(Error::Domain(format!("t = {t} outside (0, 1/{d}]")));
        }
    }
    let factorial: f64 = (1..d).map(|k| k as f64).product();
    let constant = d_f.powi(d as i32 - 1) / factorial;
    t_values
        .iter()
        .map(|&t| {
            let diag = vec![t; d];
            let c = model.cdf(&diag, CdfMethod::Exact)?.value;
            Ok(TailPoint {
                t,
                ratio: c / t.powi(d as i32 - 1),
                bound: constant * model.generator().cdf(t * d_f),
            })
        })
        .collect()
}

/// One-sample Kolmogorov-Smirnov test result.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// KS test of `sample` against Uniform(0, 1), asymptotic p-value.
pub fn ks_uniformity(sample: &[f64]) -> Result<KsResult> {
    if sample.len() < 10 {
        return Err(Error::Domain("ks test needs n >= 10".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in xs.iter().enumerate() {
        let lo = (x - k as f64 / n).abs();
        let hi = ((k + 1) as f64 / n - x).abs();
        d = d.max(lo).max(hi);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
    })
}

/// Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k² λ²), truncated at 100 terms.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k_f = k as f64;
        let term = (-2.0 * k_f * k_f * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
