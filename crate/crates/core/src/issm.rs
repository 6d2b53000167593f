//! Exponential-smoothing state-space model with negative binomial observations.
//!
//! ```text
//! z_1     = seed
//! λ_t     = z_t · l_t
//! y_t     ~ Nb(λ_t, θ)
//! z_{t+1} = z_t − (z_t − y_t / l_t) · α
//! ```
//!
//! The update is evaluated in that form everywhere, in fitting and in
//! simulation, so both see bit-identical states.
//!
//! `(α, θ, seed)` is fitted by exhaustive grid search on the negative
//! log-likelihood. The grid evaluator shares work between seeds: once the
//! seeded recursions reach bit-identical states they stay identical, so the
//! remaining terms are evaluated once per `(α, θ)`.

use crate::error::{ForecastError, Result};
use crate::negbin::{ln_factorial, ln_rising, NbParams, LAMBDA_FLOOR, THETA_FLOOR};

/// Shortest history accepted by [`fit`].
pub const MIN_HISTORY: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub enum SeedAxis {
    /// `count` log-spaced seeds in
    /// `[max(lo_min, m · lo_factor), max(hi_min, m · hi_factor)]`, where `m` is
    /// the mean de-seasonalised observation `mean(y_t / l_t)`.
    Relative {
        count: usize,
        lo_factor: f64,
        hi_factor: f64,
        lo_min: f64,
        hi_min: f64,
    },
    Explicit(Vec<f64>),
}

impl Default for SeedAxis {
    fn default() -> Self {
        SeedAxis::Relative {
            count: 16,
            lo_factor: 1.0 / 8.0,
            hi_factor: 8.0,
            lo_min: 0.01,
            hi_min: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    alphas: Vec<f64>,
    thetas: Vec<f64>,
    seeds: SeedAxis,
}

impl Default for GridSpec {
    /// α ∈ {0, 0.02, …, 1}; 24 log-spaced θ in [0.01, 10]; 16 relative seeds.
    fn default() -> Self {
        Self {
            alphas: uniform_alphas(51),
            thetas: log_spaced(0.01, 10.0, 24),
            seeds: SeedAxis::default(),
        }
    }
}

/// `n` evenly spaced points in `[0, 1]`.
pub fn uniform_alphas(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

fn sorted_axis(name: &str, mut values: Vec<f64>, valid: impl Fn(f64) -> bool) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(ForecastError::invalid(format!("{name} grid is empty")));
    }
    if let Some(v) = values.iter().find(|v| !valid(**v)) {
        return Err(ForecastError::invalid(format!("{name} grid value {v} out of range")));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

impl GridSpec {
    /// Builds a grid; axes are sorted and de-duplicated and θ values are
    /// floored at [`THETA_FLOOR`].
    pub fn new(alphas: Vec<f64>, thetas: Vec<f64>, seeds: SeedAxis) -> Result<Self> {
        let alphas = sorted_axis("alpha", alphas, |a| (0.0..=1.0).contains(&a))?;
        let thetas = sorted_axis("theta", thetas, |t| t.is_finite() && t > 0.0)?
            .into_iter()
            .map(|t| t.max(THETA_FLOOR))
            .collect::<Vec<_>>();
        let thetas = sorted_axis("theta", thetas, |_| true)?;
        let seeds = match seeds {
            SeedAxis::Explicit(v) => {
                SeedAxis::Explicit(sorted_axis("seed", v, |z| z.is_finite() && z > 0.0)?)
            }
            SeedAxis::Relative {
                count,
                lo_factor,
                hi_factor,
                lo_min,
                hi_min,
            } => {
                let positive = [lo_factor, hi_factor, lo_min, hi_min]
                    .iter()
                    .all(|v| v.is_finite() && *v > 0.0);
                if count == 0 || !positive || lo_factor > hi_factor || lo_min > hi_min {
                    return Err(ForecastError::invalid("bad relative seed axis"));
                }
                SeedAxis::Relative {
                    count,
                    lo_factor,
                    hi_factor,
                    lo_min,
                    hi_min,
                }
            }
        };
        Ok(Self {
            alphas,
            thetas,
            seeds,
        })
    }

    /// A grid holding exactly one point.
    pub fn single(alpha: f64, theta: f64, seed: f64) -> Result<Self> {
        Self::new(vec![alpha], vec![theta], SeedAxis::Explicit(vec![seed]))
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn seed_axis(&self) -> &SeedAxis {
        &self.seeds
    }

    pub fn with_seed_axis(mut self, seeds: SeedAxis) -> Result<Self> {
        self.seeds = seeds;
        Self::new(self.alphas, self.thetas, self.seeds)
    }

    /// Concrete seed values for a series.
    pub fn seed_values(&self, y: &[u32], l: &[f64]) -> Vec<f64> {
        match &self.seeds {
            SeedAxis::Explicit(v) => v.clone(),
            SeedAxis::Relative {
                count,
                lo_factor,
                hi_factor,
                lo_min,
                hi_min,
            } => {
                let m = if y.is_empty() {
                    0.0
                } else {
                    y.iter().zip(l).map(|(&y, &l)| y as f64 / l).sum::<f64>() / y.len() as f64
                };
                let lo = (m * lo_factor).max(*lo_min);
                let hi = (m * hi_factor).max(*hi_min);
                let mut v = log_spaced(lo, hi, *count);
                v.dedup();
                v
            }
        }
    }

    /// Number of grid points for a series.
    pub fn len_for(&self, y: &[u32], l: &[f64]) -> usize {
        self.alphas.len() * self.thetas.len() * self.seed_values(y, l).len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedModel {
    pub alpha: f64,
    pub theta: f64,
    /// State that initialises the recursion on the first day.
    pub z_seed: f64,
    /// State after consuming the last observation, floored at [`LAMBDA_FLOOR`].
    pub z_final: f64,
    pub neg_log_lik: f64,
}

fn check_inputs(y: &[u32], l: &[f64]) -> Result<()> {
    if y.len() != l.len() {
        return Err(ForecastError::LengthMismatch {
            expected: y.len(),
            found: l.len(),
        });
    }
    if let Some(v) = l.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(ForecastError::invalid(format!("amplitude value {v} is not positive")));
    }
    Ok(())
}

/// Runs the recursion from `z_seed`. Returns `λ_1..λ_T` (floored at
/// [`LAMBDA_FLOOR`]) and the state after the last observation.
pub fn state_recursion(y: &[u32], l: &[f64], alpha: f64, z_seed: f64) -> Result<(Vec<f64>, f64)> {
    check_inputs(y, l)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ForecastError::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    if !(z_seed.is_finite() && z_seed > 0.0) {
        return Err(ForecastError::invalid(format!("seed {z_seed} is not positive")));
    }
    let mut z = z_seed;
    let mut lambdas = Vec::with_capacity(y.len());
    for (&yt, &lt) in y.iter().zip(l) {
        lambdas.push((z * lt).max(LAMBDA_FLOOR));
        z -= (z - yt as f64 / lt) * alpha;
    }
    Ok((lambdas, z))
}

/// `Σ_t ln Pr(y_t | λ_t, θ)` with `λ_t` from [`state_recursion`].
pub fn log_likelihood(y: &[u32], l: &[f64], alpha: f64, theta: f64, z_seed: f64) -> Result<f64> {
    let (lambdas, _) = state_recursion(y, l, alpha, z_seed)?;
    let mut total = 0.0;
    for (&yt, &lambda) in y.iter().zip(&lambdas) {
        total += NbParams::new(lambda, theta)?.log_pmf(yt as u64);
    }
    Ok(total)
}

/// Sufficient pieces of a run of days for the likelihood at any θ:
/// `Σλ`, `Σy` and the `(λ, y)` pairs with `y > 0`.
#[derive(Default)]
struct Segment {
    sum_lambda: f64,
    sum_y: f64,
    positive: Vec<(f64, u32)>,
}

impl Segment {
    fn push(&mut self, lambda: f64, y: u32) {
        self.sum_lambda += lambda;
        if y > 0 {
            self.sum_y += y as f64;
            self.positive.push((lambda, y));
        }
    }

    fn clear(&mut self) {
        self.sum_lambda = 0.0;
        self.sum_y = 0.0;
        self.positive.clear();
    }

    /// Log-likelihood of the segment without the `−ln y!` terms.
    fn log_lik(&self, inv_theta: f64, ln1p_theta: f64, ln1p_inv_theta: f64) -> f64 {
        let mut acc = -self.sum_lambda * inv_theta * ln1p_theta - self.sum_y * ln1p_inv_theta;
        for &(lambda, y) in &self.positive {
            acc += ln_rising(lambda * inv_theta, y as u64);
        }
        acc
    }
}

/// Grid-search maximum likelihood. Ties go to the smaller α, then θ, then seed.
pub fn fit(y: &[u32], l: &[f64], grid: &GridSpec) -> Result<FittedModel> {
    check_inputs(y, l)?;
    if y.len() < MIN_HISTORY {
        return Err(ForecastError::InsufficientHistory {
            required: MIN_HISTORY,
            found: y.len(),
        });
    }
    let seeds = grid.seed_values(y, l);
    let log_fact: f64 = y.iter().map(|&v| ln_factorial(v as u64)).sum();
    let theta_terms: Vec<(f64, f64, f64)> = grid
        .thetas
        .iter()
        .map(|&t| (1.0 / t, t.ln_1p(), t.recip().ln_1p()))
        .collect();

    let mut heads: Vec<Segment> = seeds.iter().map(|_| Segment::default()).collect();
    let mut tail = Segment::default();
    let mut states = vec![0.0; seeds.len()];
    // (nll, alpha index, theta index, seed index)
    let mut best: Option<(f64, usize, usize, usize)> = None;

    for (ai, &alpha) in grid.alphas.iter().enumerate() {
        states.copy_from_slice(&seeds);
        heads.iter_mut().for_each(Segment::clear);
        tail.clear();

        let mut t = 0;
        while t < y.len() && states.iter().any(|z| z.to_bits() != states[0].to_bits()) {
            let (yt, lt) = (y[t], l[t]);
            let x = yt as f64 / lt;
            for (z, head) in states.iter_mut().zip(heads.iter_mut()) {
                head.push((*z * lt).max(LAMBDA_FLOOR), yt);
                *z -= (*z - x) * alpha;
            }
            t += 1;
        }
        let mut z = states[0];
        for (&yt, &lt) in y[t..].iter().zip(&l[t..]) {
            tail.push((z * lt).max(LAMBDA_FLOOR), yt);
            z -= (z - yt as f64 / lt) * alpha;
        }

        for (ti, &(inv, a, b)) in theta_terms.iter().enumerate() {
            let shared = tail.log_lik(inv, a, b);
            for (si, head) in heads.iter().enumerate() {
                let nll = -(head.log_lik(inv, a, b) + shared - log_fact);
                if best.is_none_or(|(b, ..)| nll < b) {
                    best = Some((nll, ai, ti, si));
                }
            }
        }
    }

    let (_, ai, ti, si) = best.ok_or_else(|| ForecastError::invalid("likelihood is NaN on the whole grid"))?;
    let (alpha, theta, z_seed) = (grid.alphas[ai], grid.thetas[ti], seeds[si]);
    let (_, z_final) = state_recursion(y, l, alpha, z_seed)?;
    let neg_log_lik = -log_likelihood(y, l, alpha, theta, z_seed)?;
    Ok(FittedModel {
        alpha,
        theta,
        z_seed,
        z_final: z_final.max(LAMBDA_FLOOR),
        neg_log_lik,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn worked_recursion() {
        let (lambda, z_final) = state_recursion(&[4, 0], &ones(2), 0.3, 2.0).unwrap();
        assert!((lambda[0] - 2.0).abs() < 1e-15);
        assert!((lambda[1] - 2.6).abs() < 1e-15);
        assert!((z_final - 1.82).abs() < 1e-15);
    }

    #[test]
    fn no_smoothing_keeps_seed() {
        let y = [3, 0, 7, 1];
        let l = [1.0, 2.0, 0.5, 1.5];
        let (lambda, z_final) = state_recursion(&y, &l, 0.0, 2.5).unwrap();
        for (lam, lt) in lambda.iter().zip(l) {
            assert_eq!(*lam, 2.5 * lt);
        }
        assert_eq!(z_final, 2.5);
    }

    #[test]
    fn full_smoothing_is_naive() {
        let y = [3, 5, 7, 1, 4];
        let (lambda, z_final) = state_recursion(&y, &ones(5), 1.0, 9.0).unwrap();
        for t in 1..5 {
            assert_eq!(lambda[t], y[t - 1] as f64);
        }
        assert_eq!(z_final, 4.0);
    }

    #[test]
    fn recursion_errors() {
        assert!(matches!(
            state_recursion(&[1, 2], &[1.0], 0.5, 1.0),
            Err(ForecastError::LengthMismatch { .. })
        ));
        assert!(state_recursion(&[1], &[1.0], 1.5, 1.0).is_err());
        assert!(state_recursion(&[1], &[0.0], 0.5, 1.0).is_err());
        assert!(log_likelihood(&[1], &[1.0], 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn single_observation_likelihood() {
        let ll = log_likelihood(&[0], &[1.0], 0.4, 1.0, 1.0).unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn likelihood_is_additive() {
        let y = [2, 5];
        let l = [1.3, 0.7];
        let (alpha, theta, seed) = (0.35, 0.8, 3.0);
        let both = log_likelihood(&y, &l, alpha, theta, seed).unwrap();
        let first = log_likelihood(&y[..1], &l[..1], alpha, theta, seed).unwrap();
        let (_, z2) = state_recursion(&y[..1], &l[..1], alpha, seed).unwrap();
        let second = log_likelihood(&y[1..], &l[1..], alpha, theta, z2).unwrap();
        assert!((both - first - second).abs() < 1e-12);
    }

    #[test]
    fn singleton_grid_returns_point() {
        let y: Vec<u32> = (0..40).map(|t| (t % 4) as u32).collect();
        let grid = GridSpec::single(0.3, 0.7, 1.9).unwrap();
        let m = fit(&y, &ones(40), &grid).unwrap();
        assert_eq!((m.alpha, m.theta, m.z_seed), (0.3, 0.7, 1.9));
        let expected = -log_likelihood(&y, &ones(40), 0.3, 0.7, 1.9).unwrap();
        assert_eq!(m.neg_log_lik, expected);
    }

    #[test]
    fn all_zero_series() {
        let y = vec![0u32; 60];
        let grid = GridSpec::default();
        let m = fit(&y, &ones(60), &grid).unwrap();
        let seeds = grid.seed_values(&y, &ones(60));
        assert_eq!(m.z_seed, seeds[0]);
        assert!(m.z_final < 1e-3);
        assert!(m.z_final > 0.0);
    }

    #[test]
    fn short_history_is_rejected() {
        let err = fit(&[1; 27], &ones(27), &GridSpec::default()).unwrap_err();
        assert!(matches!(err, ForecastError::InsufficientHistory { .. }));
    }

    #[test]
    fn default_grid_shape() {
        let g = GridSpec::default();
        assert_eq!(g.alphas().len(), 51);
        assert_eq!(g.alphas()[10], 0.2);
        assert_eq!(g.thetas().len(), 24);
        assert!((g.thetas()[0] - 0.01).abs() < 1e-15);
        assert_eq!(*g.thetas().last().unwrap(), 10.0);
        let y = vec![4u32; 30];
        let seeds = g.seed_values(&y, &ones(30));
        assert_eq!(seeds.len(), 16);
        assert!((seeds[0] - 0.5).abs() < 1e-12);
        assert!((seeds[15] - 32.0).abs() < 1e-12);
        let zeros = g.seed_values(&[0; 30], &ones(30));
        assert!((zeros[0] - 0.01).abs() < 1e-15 && (zeros[15] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![], vec![1.0], SeedAxis::default()).is_err());
        assert!(GridSpec::new(vec![1.2], vec![1.0], SeedAxis::default()).is_err());
        assert!(GridSpec::new(vec![0.5], vec![-1.0], SeedAxis::default()).is_err());
        assert!(GridSpec::new(vec![0.5], vec![1.0], SeedAxis::Explicit(vec![0.0])).is_err());
        let g = GridSpec::new(vec![0.5, 0.1, 0.5], vec![1e-9, 2.0], SeedAxis::default()).unwrap();
        assert_eq!(g.alphas(), &[0.1, 0.5]);
        assert_eq!(g.thetas()[0], THETA_FLOOR);
    }

    fn series(len: usize, seed: u64) -> (Vec<u32>, Vec<f64>) {
        // Small deterministic LCG for test inputs.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) as f64 / (1u64 << 31) as f64
        };
        let y = (0..len).map(|_| (next() * next() * 9.0) as u32).collect();
        let l = (0..len).map(|_| 0.3 + 1.5 * next()).collect();
        (y, l)
    }

    #[test]
    fn fit_matches_full_enumeration() {
        let (y, l) = series(90, 3);
        let grid = GridSpec::new(
            uniform_alphas(6),
            log_spaced(0.05, 5.0, 5),
            SeedAxis::Explicit(vec![0.2, 1.0, 2.5, 6.0]),
        )
        .unwrap();
        let m = fit(&y, &l, &grid).unwrap();
        let mut brute = f64::INFINITY;
        for &a in grid.alphas() {
            for &t in grid.thetas() {
                for z in grid.seed_values(&y, &l) {
                    brute = brute.min(-log_likelihood(&y, &l, a, t, z).unwrap());
                }
            }
        }
        assert!((m.neg_log_lik - brute).abs() < 1e-9, "{} vs {}", m.neg_log_lik, brute);
        let (_, z_final) = state_recursion(&y, &l, m.alpha, m.z_seed).unwrap();
        assert_eq!(m.z_final, z_final);
    }

    proptest! {
        #[test]
        fn amplitude_scaling_is_unidentified(c in 0.1f64..10.0, alpha in 0.0f64..1.0, seed in 1u64..1000) {
            let (y, l) = series(60, seed);
            let scaled: Vec<f64> = l.iter().map(|v| v * c).collect();
            let a = log_likelihood(&y, &l, alpha, 0.7, 2.0).unwrap();
            let b = log_likelihood(&y, &scaled, alpha, 0.7, 2.0 / c).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn lambdas_positive(alpha in 0.0f64..=1.0, seed in 1u64..1000, z in 0.001f64..50.0) {
            let (y, l) = series(80, seed);
            let (lambda, _) = state_recursion(&y, &l, alpha, z).unwrap();
            prop_assert!(lambda.iter().all(|&v| v > 0.0));
        }
    }
}
