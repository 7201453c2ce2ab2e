//! Gaussian-mixture separation analysis: the separation statistic
//! `S = u' inv(Sigma) u`, its Bayes error `Phi(-sqrt(S)/2)`, the ratio of
//! separation carried by a feature subset, and Monte-Carlo evaluation of
//! that ratio over random thinned splits.
//!
//! Solves route through Cholesky for positive-definite covariances. Some
//! structured examples of interest (tridiagonal with large off-diagonals)
//! are symmetric but indefinite; those fall back to LU with partial
//! pivoting, and tridiagonal systems use the O(n) banded solver.

use rayon::prelude::*;

use crate::cotrain::thin_split;
use crate::error::{Error, Result};
use crate::linalg::{bands_of, cholesky, dominant_eigenvalue, lu_solve, tridiag_solve, SquareMat};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// A two-component Gaussian mixture with shared covariance, described by
/// the center difference `u = mu1 - mu2` and the covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec<F> {
    center_diff: Vec<F>,
    covariance: SquareMat<F>,
    mixing_weight: F,
}

impl<F: Scalar> MixtureSpec<F> {
    /// Builds a spec, checking symmetry (within 1e-12) and dimensions.
    /// Positive-definiteness is not required here: the solve path handles
    /// symmetric indefinite matrices, which some structured examples are.
    pub fn new(center_diff: Vec<F>, covariance: SquareMat<F>, mixing_weight: F) -> Result<Self> {
        if center_diff.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture dimension must be positive".into(),
            ));
        }
        if covariance.dim() != center_diff.len() {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{} but center difference has {} entries",
                covariance.dim(),
                covariance.dim(),
                center_diff.len()
            )));
        }
        if covariance.asymmetry() > F::of_f64(1e-12) {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        if mixing_weight <= F::zero() || mixing_weight >= F::one() {
            return Err(Error::InvalidArgument(
                "mixing weight must lie in (0, 1)".into(),
            ));
        }
        Ok(Self {
            center_diff,
            covariance,
            mixing_weight,
        })
    }

    /// Balanced mixture (weight 1/2), the only case exercised here.
    pub fn balanced(center_diff: Vec<F>, covariance: SquareMat<F>) -> Result<Self> {
        Self::new(center_diff, covariance, F::of_f64(0.5))
    }

    pub fn dim(&self) -> usize {
        self.center_diff.len()
    }

    pub fn center_diff(&self) -> &[F] {
        &self.center_diff
    }

    pub fn covariance(&self) -> &SquareMat<F> {
        &self.covariance
    }

    pub fn mixing_weight(&self) -> F {
        self.mixing_weight
    }
}

/// Solves `sigma x = rhs`, dispatching on structure: banded elimination for
/// tridiagonal matrices, Cholesky for positive-definite ones, dense LU with
/// partial pivoting otherwise.
fn solve_symmetric<F: Scalar>(sigma: &SquareMat<F>, rhs: &[F]) -> Result<Vec<F>> {
    if sigma.dim() >= 3 && sigma.is_tridiagonal() {
        let (diag, sub, sup) = bands_of(sigma);
        return tridiag_solve(&diag, &sub, &sup, rhs);
    }
    match cholesky(sigma) {
        Ok(factor) => Ok(factor.solve(rhs)),
        Err(_) => lu_solve(sigma, rhs),
    }
}

/// Separation `S = u' inv(sigma) u` of the mixture centers.
pub fn separation<F: Scalar>(u: &[F], sigma: &SquareMat<F>) -> Result<F> {
    if u.len() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "u has {} entries for a {}x{} covariance",
            u.len(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    let x = solve_symmetric(sigma, u)?;
    let s: F = u.iter().zip(&x).map(|(&a, &b)| a * b).sum();
    if !s.is_finite() {
        return Err(Error::NonFinite("separation".into()));
    }
    Ok(s)
}

/// Standard normal CDF via Cody's rational-approximation erfc, accurate to
/// well below 1e-12 absolute.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function, W. J. Cody's three-interval rational
/// approximation (the classic CALERF scheme).
#[allow(clippy::excessive_precision)] // published coefficient table
pub fn erfc(x: f64) -> f64 {
    const THRESH: f64 = 0.46875;
    const SQRPI: f64 = 5.641_895_835_477_562_9e-1; // 1/sqrt(pi)

    let y = x.abs();
    let result = if y <= THRESH {
        // erfc(x) = 1 - erf(x) on the central interval.
        const A: [f64; 5] = [
            3.161_123_743_870_565_6e0,
            1.138_641_541_510_501_6e2,
            3.774_852_376_853_020_2e2,
            3.209_377_589_138_469_5e3,
            1.857_777_061_846_031_5e-1,
        ];
        const B: [f64; 4] = [
            2.360_129_095_234_412_1e1,
            2.440_246_379_344_441_7e2,
            1.282_616_526_077_372_3e3,
            2.844_236_833_439_170_6e3,
        ];
        let z = y * y;
        let mut num = A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + A[i]) * z;
            den = (den + B[i]) * z;
        }
        return 1.0 - x * (num + A[3]) / (den + B[3]);
    } else if y <= 4.0 {
        const C: [f64; 9] = [
            5.641_884_969_886_700_9e-1,
            8.883_149_794_388_376e0,
            6.611_919_063_714_163e1,
            2.986_351_381_974_001_3e2,
            8.819_522_212_417_691e2,
            1.712_047_612_634_070_6e3,
            2.051_078_377_826_071_5e3,
            1.230_339_354_797_997_2e3,
            2.153_115_354_744_038_5e-8,
        ];
        const D: [f64; 8] = [
            1.574_492_611_070_983_5e1,
            1.176_939_508_913_125e2,
            5.371_811_018_620_098_5e2,
            1.621_389_574_566_690_2e3,
            3.290_799_235_733_459_7e3,
            4.362_619_090_143_247e3,
            3.439_367_674_143_721_6e3,
            1.230_339_354_803_749_4e3,
        ];
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        let frac = (num + C[7]) / (den + D[7]);
        scaled_exp(y) * frac
    } else {
        const P: [f64; 6] = [
            3.053_266_349_612_323_4e-1,
            3.603_448_999_498_044_4e-1,
            1.257_817_261_112_292_5e-1,
            1.608_378_514_874_227_6e-2,
            6.587_491_615_298_378e-4,
            1.631_538_713_730_209_8e-2,
        ];
        const Q: [f64; 5] = [
            2.568_520_192_289_822_4e0,
            1.872_952_849_923_460_5e0,
            5.279_051_029_514_284e-1,
            6.051_834_131_244_132e-2,
            2.335_204_976_268_691_8e-3,
        ];
        let z = 1.0 / (y * y);
        let mut num = P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + P[i]) * z;
            den = (den + Q[i]) * z;
        }
        let frac = z * (num + P[4]) / (den + Q[4]);
        scaled_exp(y) * (SQRPI - frac) / y
    };

    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// `exp(-y^2)` split as in CALERF to avoid cancellation for large `y`.
fn scaled_exp(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Bayes error of the balanced mixture: `Phi(-sqrt(S) / 2)`.
pub fn bayes_error(s: f64) -> Result<f64> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "separation must be non-negative and finite, got {s}"
        )));
    }
    Ok(normal_cdf(-0.5 * s.sqrt()))
}

/// Separation diagnostics for a feature subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport<F> {
    pub s_full: F,
    pub s_subset: F,
    /// `s_subset / s_full`.
    pub gamma: F,
    pub bayes_full: F,
    pub bayes_subset: F,
    /// Smallest eigenvalue of `inv(sigma)`, computed as the reciprocal of
    /// the dominant eigenvalue of `sigma` (they coincide for positive-
    /// definite covariances).
    pub lambda_min_inv: F,
    /// Whether the covariance admitted a Cholesky factorization.
    pub positive_definite: bool,
}

/// Power-iteration settings for the eigenvalue diagnostic.
const EIG_TOL: f64 = 1e-10;
const EIG_MAX_ITER: usize = 10_000;

/// Evaluates full and subset separations, their Bayes errors, the ratio of
/// separation, and the eigenvalue diagnostic.
pub fn ratio_of_separation<F: Scalar>(
    u: &[F],
    sigma: &SquareMat<F>,
    subset: &[usize],
) -> Result<SeparationReport<F>> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("feature subset is empty".into()));
    }
    let mut idx: Vec<usize> = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();

    let s_full = separation(u, sigma)?;
    if s_full <= F::zero() {
        return Err(Error::InvalidArgument(format!(
            "full separation must be positive to form a ratio, got {s_full}"
        )));
    }
    let sub_sigma = sigma.principal_submatrix(&idx)?;
    let sub_u: Vec<F> = idx.iter().map(|&i| u[i]).collect();
    let s_subset = separation(&sub_u, &sub_sigma)?;

    let positive_definite = cholesky(sigma).is_ok();
    let lambda_max = dominant_eigenvalue(sigma, EIG_TOL, EIG_MAX_ITER);
    Ok(SeparationReport {
        s_full,
        s_subset,
        gamma: s_subset / s_full,
        bayes_full: F::of_f64(bayes_error(s_full.as_f64())?),
        bayes_subset: F::of_f64(bayes_error(s_subset.as_f64())?),
        lambda_min_inv: F::one() / lambda_max,
        positive_definite,
    })
}

/// Monte-Carlo distribution of the ratio of separation over random thinned
/// splits (one slice evaluated per trial).
#[derive(Debug, Clone, PartialEq)]
pub struct McGammaReport<F> {
    /// One gamma per trial, in trial order.
    pub samples: Vec<F>,
    pub min: F,
    pub median: F,
    /// The reference value `1/J - epsilon`.
    pub threshold: f64,
    /// Fraction of trials with gamma below the threshold.
    pub frac_below: f64,
}

/// Draws `trials` random `thin_split` partitions with sub-seeds derived per
/// trial and evaluates the first slice's gamma for each.
pub fn mc_gamma<F: Scalar>(
    spec: &MixtureSpec<F>,
    j: usize,
    trials: usize,
    seed: u64,
    epsilon: f64,
) -> Result<McGammaReport<F>> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "trial count must be at least 1".into(),
        ));
    }
    let p = spec.dim();
    let s_full = separation(spec.center_diff(), spec.covariance())?;
    if s_full <= F::zero() {
        return Err(Error::InvalidArgument(format!(
            "full separation must be positive, got {s_full}"
        )));
    }
    let samples: Vec<F> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let split = thin_split(p, j, derive_seed(seed, t as u64))?;
            let slice = &split.subsets()[0];
            let sub_sigma = spec.covariance().principal_submatrix(slice)?;
            let sub_u: Vec<F> = slice.iter().map(|&i| spec.center_diff()[i]).collect();
            Ok(separation(&sub_u, &sub_sigma)? / s_full)
        })
        .collect::<Result<Vec<F>>>()?;

    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite gammas"));
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / F::of_f64(2.0)
    };
    let threshold = 1.0 / j as f64 - epsilon;
    let below = samples.iter().filter(|g| g.as_f64() < threshold).count();
    Ok(McGammaReport {
        min: sorted[0],
        median,
        threshold,
        frac_below: below as f64 / trials as f64,
        samples,
    })
}

/// Structured covariance families for simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovKind {
    Identity,
    /// Unit diagonal, constant first off-diagonal.
    Tridiagonal(f64),
    /// `rho^|i-j|`; requires `|rho| < 1`.
    Ar1(f64),
}

/// Builds the named covariance structure.
///
/// Structural validity only: tridiagonal matrices with large off-diagonals
/// are accepted even where they stop being positive definite, since the
/// separation solve handles symmetric indefinite systems.
pub fn make_cov<F: Scalar>(kind: CovKind, p: usize) -> Result<SquareMat<F>> {
    if p == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    match kind {
        CovKind::Identity => Ok(SquareMat::identity(p)),
        CovKind::Tridiagonal(rho) => {
            if !rho.is_finite() {
                return Err(Error::InvalidArgument("off-diagonal must be finite".into()));
            }
            let mut m = SquareMat::identity(p);
            let r = F::of_f64(rho);
            for i in 0..p.saturating_sub(1) {
                m.set(i, i + 1, r);
                m.set(i + 1, i, r);
            }
            Ok(m)
        }
        CovKind::Ar1(rho) => {
            if !rho.is_finite() || rho.abs() >= 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "ar1 decay must satisfy |rho| < 1, got {rho}"
                )));
            }
            let mut m = SquareMat::zeros(p);
            for i in 0..p {
                for j in 0..p {
                    m.set(i, j, F::of_f64(rho.powi((i as i32 - j as i32).abs())));
                }
            }
            Ok(m)
        }
    }
}
