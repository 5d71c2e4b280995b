//! The copula family generated by a univariate density through the mod-1
//! coordinate sum: density, CDF, partial derivatives, exact sampling, and
//! the sign-flipped generalization.
//!
//! Every d-dimensional integral here is reduced to one dimension: over a
//! rectangle [0, u], the sum of independent uniforms V_k ~ U(0, u_k) has
//! the exact piecewise-polynomial density [`BoxSumDensity`], so
//!
//!   ∫_{[0,u]} f((Σ v_k) mod 1) dv = (Π u_k) ∫ f(s mod 1) p_S(s) ds.
//!
//! The 1-d integral is then split at the integers (where mod 1 kinks), at
//! the generator's singular points shifted by each integer, and at the
//! knots of p_S, and handled by tanh-sinh quadrature on each piece.

use crate::generators::Generator;
use crate::numerics::{integrate_1d, mc_integrate, wrap_unit, BoxSumDensity, MAX_BOX_EDGES};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Default absolute tolerance for exact (quadrature-backed) CDF values.
const CDF_TOL: f64 = 1e-9;
/// Dimension above which the exact reduction gives way to Monte Carlo
/// (BoxSumDensity caps at 12 edges; stay clear of the cancellation zone).
const EXACT_DIM_LIMIT: usize = 8;

/// How to evaluate the copula CDF.
#[derive(Debug, Clone, Copy)]
pub enum CdfMethod {
    /// Exact reduction for d <= 8, Monte Carlo above.
    Auto,
    /// Deterministic box-sum reduction plus 1-d quadrature.
    Exact,
    /// Monte Carlo over the rectangle [0, u].
    MonteCarlo { samples: u64, seed: u64 },
}

/// A CDF value with an attached error bound (quadrature error or Monte
/// Carlo standard error).
#[derive(Debug, Clone, Copy)]
pub struct CdfEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Sample from a copula model: n rows of d coordinates in [0,1], with the
/// seed and model id that produced them.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    pub seed: u64,
    pub model_id: String,
}

impl SampleMatrix {
    pub fn from_rows(data: Vec<f64>, dim: usize, seed: u64, model_id: String) -> Self {
        assert!(dim > 0 && data.len() % dim == 0);
        let n = data.len() / dim;
        Self { data, n, dim, seed, model_id }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.dim + j]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }
}

/// A copula generated by `generator` in dimension `d`, optionally with
/// sign-flipped coordinates (the density argument becomes
/// Σ (-1)^{s_j} u_j mod 1).
#[derive(Clone)]
pub struct CopulaModel {
    dimension: usize,
    generator: Arc<dyn Generator>,
    signs: Vec<bool>,
}

impl CopulaModel {
    pub fn new(dimension: usize, generator: Arc<dyn Generator>) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Domain(format!("copula dimension {dimension} must be >= 2")));
        }
        Ok(Self {
            signs: vec![false; dimension],
            dimension,
            generator,
        })
    }

    pub fn with_signs(dimension: usize, generator: Arc<dyn Generator>, signs: Vec<bool>) -> Result<Self> {
        if signs.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: signs.len(),
            });
        }
        let mut model = Self::new(dimension, generator)?;
        model.signs = signs;
        Ok(model)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generator(&self) -> &dyn Generator {
        self.generator.as_ref()
    }

    pub fn signs(&self) -> &[bool] {
        &self.signs
    }

    pub fn is_unsigned(&self) -> bool {
        self.signs.iter().all(|&s| !s)
    }

    pub fn id(&self) -> String {
        let mut id = format!("{}|d={}", self.generator.id(), self.dimension);
        if !self.is_unsigned() {
            id.push_str("|signs=");
            for &s in &self.signs {
                id.push(if s { '1' } else { '0' });
            }
        }
        id
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: u.len(),
            });
        }
        for &x in u {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("coordinate {x} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn signed_sum(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.signs)
            .map(|(&x, &s)| if s { -x } else { x })
            .sum()
    }

    /// Copula density at `u`: generator density at the (signed) mod-1
    /// coordinate sum. May be +∞ where the generator diverges.
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        Ok(self.generator.density(wrap_unit(self.signed_sum(u))))
    }

    /// Copula CDF at `u` with an error estimate.
    pub fn cdf(&self, u: &[f64], method: CdfMethod) -> Result<CdfEstimate> {
        self.check_point(u)?;
        match method {
            CdfMethod::Auto => {
                if self.dimension <= EXACT_DIM_LIMIT {
                    self.cdf_exact(u)
                } else {
                    self.cdf_mc(u, 1_000_000, 0)
                }
            }
            CdfMethod::Exact => self.cdf_exact(u),
            CdfMethod::MonteCarlo { samples, seed } => self.cdf_mc(u, samples, seed),
        }
    }

    fn cdf_exact(&self, u: &[f64]) -> Result<CdfEstimate> {
        if self.dimension > MAX_BOX_EDGES {
            return Err(Error::Domain(format!(
                "exact cdf supports d <= {MAX_BOX_EDGES}; use Monte Carlo"
            )));
        }
        if self.is_unsigned() {
            return self.cdf_exact_unsigned(u);
        }
        // Reflection: flipping coordinate j of U ~ C_f gives the signed
        // model, so expand P(flipped <= u) by inclusion-exclusion over
        // the sign-1 slots back into unsigned CDF evaluations.
        let flipped: Vec<usize> = (0..self.dimension).filter(|&j| self.signs[j]).collect();
        let base = CopulaModel::new(self.dimension, Arc::clone(&self.generator))?;
        let mut value = 0.0;
        let mut error = 0.0;
        let mut v = vec![0.0; self.dimension];
        for mask in 0u32..(1u32 << flipped.len()) {
            for j in 0..self.dimension {
                v[j] = u[j];
            }
            let mut sign = 1.0;
            for (bit, &j) in flipped.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    v[j] = 1.0 - u[j];
                    sign = -sign;
                } else {
                    v[j] = 1.0;
                }
            }
            let part = base.cdf_exact_unsigned(&v)?;
            value += sign * part.value;
            error += part.error_estimate;
        }
        Ok(CdfEstimate {
            value: value.clamp(0.0, 1.0),
            error_estimate: error,
        })
    }

    fn cdf_exact_unsigned(&self, u: &[f64]) -> Result<CdfEstimate> {
        if u.iter().any(|&x| x <= 0.0) {
            return Ok(CdfEstimate { value: 0.0, error_estimate: 0.0 });
        }
        let volume: f64 = u.iter().product();
        let box_sum = BoxSumDensity::new(u)?;
        let quad = self.reduced_integral(0.0, &box_sum)?;
        Ok(CdfEstimate {
            value: volume * quad.0,
            error_estimate: volume * quad.1,
        })
    }

    /// ∫ f((shift + s) mod 1) p_S(s) ds over the support of p_S.
    fn reduced_integral(&self, shift: f64, box_sum: &BoxSumDensity) -> Result<(f64, f64)> {
        let total = box_sum.support_end();
        let mut cuts: Vec<f64> = Vec::new();
        // integers of the shifted argument: shift + s ∈ Z
        let mut k = shift.ceil();
        while k - shift < total {
            cuts.push(k - shift);
            k += 1.0;
        }
        // generator singularities shifted by each integer
        for x in self.generator.singular_points() {
            let mut k = (shift - x).floor();
            loop {
                let s = k + x - shift;
                if s > total {
                    break;
                }
                if s > 0.0 {
                    cuts.push(s);
                }
                k += 1.0;
            }
        }
        cuts.extend_from_slice(box_sum.breakpoints());

        let g = self.generator.as_ref();
        let result = integrate_1d(
            |s| g.density(wrap_unit(shift + s)) * box_sum.eval(s),
            0.0,
            total,
            CDF_TOL,
            &cuts,
        )?;
        Ok((result.value, result.error_estimate))
    }

    fn cdf_mc(&self, u: &[f64], samples: u64, seed: u64) -> Result<CdfEstimate> {
        if u.iter().any(|&x| x <= 0.0) {
            return Ok(CdfEstimate { value: 0.0, error_estimate: 0.0 });
        }
        let lo = vec![0.0; self.dimension];
        let g = self.generator.as_ref();
        let signs = &self.signs;
        let r = mc_integrate(
            |p| {
                let s: f64 = p
                    .iter()
                    .zip(signs)
                    .map(|(&x, &fl)| if fl { -x } else { x })
                    .sum();
                let y = g.density(wrap_unit(s));
                if y.is_finite() {
                    y
                } else {
                    0.0
                }
            },
            &lo,
            u,
            samples,
            seed,
        )?;
        Ok(CdfEstimate {
            value: r.value,
            error_estimate: r.error_estimate,
        })
    }

    /// First partial derivative ∂C/∂u_j, which equals the integral of the
    /// density over the rectangle spanned by the other coordinates.
    /// Requires u_j in (0, 1). Always lies in [0, 1]; values outside by
    /// more than 1e-6 are reported as an error rather than clamped.
    pub fn partial_derivative(&self, u: &[f64], j: usize) -> Result<f64> {
        self.check_point(u)?;
        if j >= self.dimension {
            return Err(Error::Domain(format!("no coordinate {j}")));
        }
        if u[j] <= 0.0 || u[j] >= 1.0 {
            return Err(Error::Boundary { index: j, value: u[j] });
        }
        if !self.is_unsigned() {
            // no derivative formula for the signed variant; use central
            // finite differences of the exact signed CDF
            let h = 1e-5_f64.min(u[j]).min(1.0 - u[j]) * 0.5;
            let mut hi = u.to_vec();
            let mut lo = u.to_vec();
            hi[j] += h;
            lo[j] -= h;
            let c_hi = self.cdf(&hi, CdfMethod::Exact)?;
            let c_lo = self.cdf(&lo, CdfMethod::Exact)?;
            return Ok((c_hi.value - c_lo.value) / (2.0 * h));
        }

        let rest: Vec<f64> = u
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &x)| x)
            .collect();
        if rest.iter().any(|&x| x <= 0.0) {
            return Ok(0.0);
        }
        let volume: f64 = rest.iter().product();
        let box_sum = BoxSumDensity::new(&rest)?;
        let (value, _) = self.reduced_integral(u[j], &box_sum)?;
        let value = volume * value;
        if !(-1e-6..=1.0 + 1e-6).contains(&value) {
            return Err(Error::Domain(format!(
                "partial derivative {value} escapes [0,1]; quadrature defect"
            )));
        }
        Ok(value)
    }

    /// Second partial derivative ∂²C/∂u_i∂u_j for d >= 3 and interior
    /// u_i, u_j. For i = j the value is a difference of two (d-2)-fold
    /// density integrals taken at a partner coordinate (the smallest
    /// index other than i) and at 0.
    pub fn second_partial(&self, u: &[f64], i: usize, j: usize) -> Result<f64> {
        self.check_point(u)?;
        if self.dimension < 3 {
            return Err(Error::UnsupportedDimension(
                "second partial derivatives require d >= 3".into(),
            ));
        }
        if i >= self.dimension || j >= self.dimension {
            return Err(Error::Domain(format!("no coordinate pair ({i}, {j})")));
        }
        for idx in [i, j] {
            if u[idx] <= 0.0 || u[idx] >= 1.0 {
                return Err(Error::Boundary { index: idx, value: u[idx] });
            }
        }
        if !self.is_unsigned() {
            // numerical-only path for the signed variant
            let h = 1e-4;
            let mut v = u.to_vec();
            v[i] += h;
            let d_pp = self.partial_derivative_signed_fd(&v, j)?;
            v[i] -= 2.0 * h;
            let d_mm = self.partial_derivative_signed_fd(&v, j)?;
            return Ok((d_pp - d_mm) / (2.0 * h));
        }

        if i != j {
            let rest: Vec<f64> = u
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, &x)| x)
                .collect();
            if rest.iter().any(|&x| x <= 0.0) {
                return Ok(0.0);
            }
            let volume: f64 = rest.iter().product();
            let box_sum = BoxSumDensity::new(&rest)?;
            let (value, _) = self.reduced_integral(u[i] + u[j], &box_sum)?;
            Ok(volume * value)
        } else {
            let partner = (0..self.dimension).find(|&k| k != i).unwrap();
            let rest: Vec<f64> = u
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != partner)
                .map(|(_, &x)| x)
                .collect();
            if rest.iter().any(|&x| x <= 0.0) {
                return Ok(0.0);
            }
            let volume: f64 = rest.iter().product();
            let box_sum = BoxSumDensity::new(&rest)?;
            let (at_partner, _) = self.reduced_integral(u[i] + u[partner], &box_sum)?;
            let (at_zero, _) = self.reduced_integral(u[i], &box_sum)?;
            Ok(volume * (at_partner - at_zero))
        }
    }

    fn partial_derivative_signed_fd(&self, u: &[f64], j: usize) -> Result<f64> {
        let h = 1e-4_f64.min(u[j]).min(1.0 - u[j]) * 0.5;
        let mut hi = u.to_vec();
        let mut lo = u.to_vec();
        hi[j] += h;
        lo[j] -= h;
        let c_hi = self.cdf(&hi, CdfMethod::Exact)?;
        let c_lo = self.cdf(&lo, CdfMethod::Exact)?;
        Ok((c_hi.value - c_lo.value) / (2.0 * h))
    }

    /// Exact sampler. Any d-1 coordinates are iid uniform and the mod-1
    /// coordinate sum is distributed as the generator, so each row draws
    /// V_1..V_{d-1} uniform, X from the generator, and closes with
    /// (X - Σ V_k) mod 1. Sign-1 coordinates are then reflected.
    ///
    /// Rows are generated in fixed-size blocks with per-block substreams,
    /// so the output is independent of any parallel scheduling.
    pub fn sample(&self, n: usize, seed: u64) -> SampleMatrix {
        const BLOCK: usize = 4096;
        let d = self.dimension;
        let mut data = Vec::with_capacity(n * d);
        let mut produced = 0usize;
        let mut block = 0u64;
        while produced < n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let rows = BLOCK.min(n - produced);
            for _ in 0..rows {
                let start = data.len();
                let mut sum = 0.0;
                for _ in 0..d - 1 {
                    let v = rng.random::<f64>();
                    data.push(v);
                    sum += v;
                }
                let x = self.generator.inverse_cdf(rng.random::<f64>());
                data.push(wrap_unit(x - sum));
                for (offset, &s) in self.signs.iter().enumerate() {
                    if s {
                        data[start + offset] = 1.0 - data[start + offset];
                    }
                }
            }
            produced += rows;
            block += 1;
        }
        SampleMatrix::from_rows(data, d, seed, self.id())
    }

    /// Probability mass of the rectangle (lower, upper] by the
    /// alternating-corner inclusion-exclusion sum of the CDF.
    pub fn rectangle_mass(&self, lower: &[f64], upper: &[f64], method: CdfMethod) -> Result<f64> {
        if lower.len() != self.dimension || upper.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: lower.len().max(upper.len()),
            });
        }
        let d = self.dimension;
        let mut corner = vec![0.0; d];
        let mut mass = 0.0;
        for mask in 0u32..(1u32 << d) {
            let mut ones = 0;
            for j in 0..d {
                if mask & (1 << j) != 0 {
                    corner[j] = upper[j];
                    ones += 1;
                } else {
                    corner[j] = lower[j];
                }
            }
            let sign = if (d - ones) % 2 == 0 { 1.0 } else { -1.0 };
            mass += sign * self.cdf(&corner, method)?.value;
        }
        Ok(mass)
    }
}

/// Density of the bivariate checkerboard copula: 2 on
/// [0,1/2]² ∪ [1/2,1]², 0 elsewhere. A contrast example whose partial
/// derivatives are not continuous.
pub fn checkerboard_density(u1: f64, u2: f64) -> f64 {
    let lower = u1 <= 0.5 && u2 <= 0.5;
    let upper = u1 >= 0.5 && u2 >= 0.5;
    if lower || upper {
        2.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{beta_generator, triangular_generator, uniform_generator, BetaParams};

    fn beta_model(d: usize) -> CopulaModel {
        CopulaModel::new(
            d,
            Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap())),
        )
        .unwrap()
    }

    #[test]
    fn density_examples() {
        let m = CopulaModel::new(2, Arc::new(uniform_generator())).unwrap();
        assert_eq!(m.density(&[0.12, 0.97]).unwrap(), 1.0);

        let m = beta_model(2);
        // sum = 1 wraps to 0 where the generator vanishes
        assert_eq!(m.density(&[0.4, 0.6]).unwrap(), 0.0);
        let pi = std::f64::consts::PI;
        assert!((m.density(&[0.25, 0.25]).unwrap() - 4.0 / pi).abs() < 1e-12);

        assert!(m.density(&[0.5]).is_err());
        assert!(m.density(&[0.5, 1.5]).is_err());
    }

    #[test]
    fn cdf_independence() {
        let m = CopulaModel::new(2, Arc::new(uniform_generator())).unwrap();
        let c = m.cdf(&[0.3, 0.7], CdfMethod::Exact).unwrap();
        assert!((c.value - 0.21).abs() < 1e-9);
    }

    #[test]
    fn cdf_grounded_and_marginal() {
        let m = beta_model(3);
        assert_eq!(m.cdf(&[0.5, 0.0, 0.9], CdfMethod::Exact).unwrap().value, 0.0);
        for &t in &[0.1, 0.37, 0.82] {
            for slot in 0..3 {
                let mut u = [1.0, 1.0, 1.0];
                u[slot] = t;
                let c = m.cdf(&u, CdfMethod::Exact).unwrap();
                assert!((c.value - t).abs() < 1e-6, "slot {slot} t {t}: {}", c.value);
            }
        }
    }

    #[test]
    fn cdf_exact_vs_monte_carlo() {
        let m = beta_model(2);
        let u = [0.6, 0.45];
        let exact = m.cdf(&u, CdfMethod::Exact).unwrap();
        let mc = m
            .cdf(&u, CdfMethod::MonteCarlo { samples: 400_000, seed: 9 })
            .unwrap();
        let tol = 3.0 * (mc.error_estimate + exact.error_estimate);
        assert!((exact.value - mc.value).abs() < tol, "{exact:?} vs {mc:?}");
    }

    #[test]
    fn partial_derivative_examples() {
        let m = CopulaModel::new(2, Arc::new(uniform_generator())).unwrap();
        assert!((m.partial_derivative(&[0.5, 0.7], 0).unwrap() - 0.7).abs() < 1e-9);

        // full marginal integral at u2 = 1
        let m = beta_model(2);
        assert!((m.partial_derivative(&[0.3, 1.0], 0).unwrap() - 1.0).abs() < 1e-8);

        // closed form F(u1+u2) - F(u1) when u1 + u2 <= 1
        let g = beta_generator(BetaParams::new(1.5, 1.5).unwrap());
        let got = m.partial_derivative(&[0.5, 0.5], 0).unwrap();
        let expect = crate::generators::Generator::cdf(&g, 1.0) - crate::generators::Generator::cdf(&g, 0.5);
        assert!((got - expect).abs() < 1e-8);
        assert!((got - 0.5).abs() < 1e-8);

        assert!(matches!(
            m.partial_derivative(&[0.0, 0.5], 0),
            Err(Error::Boundary { .. })
        ));
    }

    #[test]
    fn partial_matches_finite_difference() {
        let m = CopulaModel::new(3, Arc::new(triangular_generator())).unwrap();
        let u = [0.43, 0.61, 0.77];
        let exact = m.partial_derivative(&u, 1).unwrap();
        let h = 1e-4;
        let mut hi = u;
        let mut lo = u;
        hi[1] += h;
        lo[1] -= h;
        let fd = (m.cdf(&hi, CdfMethod::Exact).unwrap().value
            - m.cdf(&lo, CdfMethod::Exact).unwrap().value)
            / (2.0 * h);
        assert!((exact - fd).abs() < 1e-5, "exact {exact} fd {fd}");
    }

    #[test]
    fn second_partial_examples() {
        let m = CopulaModel::new(3, Arc::new(uniform_generator())).unwrap();
        let v = m.second_partial(&[0.5, 0.5, 0.5], 0, 1).unwrap();
        assert!((v - 0.5).abs() < 1e-9);

        let m = beta_model(3);
        let u = [0.31, 0.57, 0.73];
        // mixed second partial vs finite difference of the first
        let exact = m.second_partial(&u, 0, 1).unwrap();
        let h = 1e-4;
        let mut hi = u;
        let mut lo = u;
        hi[1] += h;
        lo[1] -= h;
        let fd = (m.partial_derivative(&hi, 0).unwrap() - m.partial_derivative(&lo, 0).unwrap())
            / (2.0 * h);
        assert!((exact - fd).abs() < 1e-4, "exact {exact} fd {fd}");
        assert!((0.0..=1.0).contains(&exact));

        let diag = m.second_partial(&u, 1, 1).unwrap();
        assert!((-1.0..=1.0).contains(&diag));

        let m2 = beta_model(2);
        assert!(matches!(
            m2.second_partial(&[0.5, 0.5], 0, 1),
            Err(Error::UnsupportedDimension(_))
        ));
    }

    #[test]
    fn sampler_deterministic_and_in_range() {
        let m = beta_model(3);
        let a = m.sample(5000, 11);
        let b = m.sample(5000, 11);
        for (ra, rb) in a.rows().zip(b.rows()) {
            assert_eq!(ra, rb);
        }
        for row in a.rows() {
            for &x in row {
                assert!((0.0..=1.0).contains(&x));
            }
        }
        // block decomposition: a prefix of a longer run matches a shorter run
        let long = m.sample(6000, 11);
        for i in 0..5000 {
            assert_eq!(a.row(i), long.row(i));
        }
    }

    #[test]
    fn exchangeability() {
        let m = beta_model(3);
        let u = [0.21, 0.55, 0.83];
        let perm = [0.83, 0.21, 0.55];
        let c1 = m.cdf(&u, CdfMethod::Exact).unwrap().value;
        let c2 = m.cdf(&perm, CdfMethod::Exact).unwrap().value;
        assert!((c1 - c2).abs() <= 1e-10 * c1.abs().max(1.0));
        // dyadic coordinates so the sum is order-independent bit for bit
        let u = [0.25, 0.5, 0.125];
        let perm = [0.5, 0.125, 0.25];
        assert_eq!(
            m.density(&u).unwrap().to_bits(),
            m.density(&perm).unwrap().to_bits()
        );
    }

    #[test]
    fn signed_model_reflection() {
        let gen: Arc<dyn Generator> = Arc::new(beta_generator(BetaParams::new(1.5, 1.5).unwrap()));
        let signed = CopulaModel::with_signs(2, Arc::clone(&gen), vec![false, true]).unwrap();
        // signed density is the unsigned density at the reflected point
        let unsigned = CopulaModel::new(2, gen).unwrap();
        let u = [0.3, 0.8];
        let reflected = [0.3, 1.0 - 0.8];
        assert!(
            (signed.density(&u).unwrap() - unsigned.density(&reflected).unwrap()).abs() < 1e-12
        );
        // signed exact cdf at the all-ones corner is 1
        let c = signed.cdf(&[1.0, 1.0], CdfMethod::Exact).unwrap();
        assert!((c.value - 1.0).abs() < 1e-7);
        // and matches Monte Carlo at an interior point
        let u = [0.7, 0.4];
        let exact = signed.cdf(&u, CdfMethod::Exact).unwrap();
        let mc = signed
            .cdf(&u, CdfMethod::MonteCarlo { samples: 400_000, seed: 3 })
            .unwrap();
        assert!((exact.value - mc.value).abs() < 3.0 * (mc.error_estimate + 1e-7));
    }

    #[test]
    fn checkerboard_examples() {
        assert_eq!(checkerboard_density(0.25, 0.25), 2.0);
        assert_eq!(checkerboard_density(0.25, 0.75), 0.0);
        assert_eq!(checkerboard_density(0.9, 0.9), 2.0);
    }

    #[test]
    fn hyperplane_constancy() {
        let m = beta_model(2);
        // dyadic pairs summing exactly to the same r
        for (u1, u2) in [
            ([0.25, 0.5], [0.375, 0.375]),
            ([0.5, 0.75], [0.625, 0.625]),
            ([0.875, 0.9375], [0.90625, 0.90625]),
        ] {
            assert_eq!(
                m.density(&u1).unwrap().to_bits(),
                m.density(&u2).unwrap().to_bits(),
                "{u1:?} vs {u2:?}"
            );
        }
    }
}
