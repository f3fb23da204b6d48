//! Partial-transpose sector spectra and negativity.
//!
//! The partial transpose of a damped state from this family is block
//! diagonal in total photon number. Sector `m` contributes an
//! `(m+1) x (m+1)` real block
//!
//! ```text
//! M(m)[l,n] = exp(-gbt (n-l)^2) / G *
//!             sum_k  C(m-n, l-k) C(n, k) C1^k C2^(m-l-n+k) |D|^(l+n-2k)
//! ```
//!
//! with `k` running over `max(0, l+n-m) ..= min(l, n)`. Every summand
//! carries non-negative integer powers of `C1`, `C2`, `|D|`, so the
//! entries stay finite as `C_i -> 0` (pure squeezed vacuum) provided the
//! powers are assembled before exponentiation; `LogProduct` does that
//! bookkeeping. The union of block spectra over all `m` is the full
//! spectrum of the partial transpose, each block counted once, and the
//! block traces sum to one.
//!
//! Negativity is the absolute sum of negative eigenvalues across
//! blocks; truncation is adaptive in `m` with a reported geometric tail
//! bound. Log-negativity is `log2(1 + 2N)`.
//!
//! For the symmetric channel (`C1 = C2 = C`, `D` real) three spectra
//! are known in closed form and anchor the numerics: the scalar block
//! `1/G`, the lowest eigenvalue `(C - D e^-gbt)/G` of block 1, and the
//! antisymmetric eigenvalue `(C^2 - D^2 e^-4gbt)/G` of block 2. A
//! first-order phase-diffusion expansion of the diagonal provides an
//! independent small-`gbt` diagnostic.

use nalgebra::DMatrix;

use crate::eig;
use crate::error::{Error, Result};
use crate::mathutil::{close, inf_norm, ln_binomial, LogProduct};
use crate::par;
use crate::params::DerivedCoefficients;

/// Default relative truncation target for adaptive block sums.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Hard cap on the sector index during adaptive truncation.
const BLOCK_CAP: usize = 16_384;

/// Blocks are eigensolved in batches of this size so the parallel
/// build stays deterministic (batch results are reduced in order).
const BATCH: usize = 16;

/// Negative eigenvalues smaller than this times the block norm are
/// eigensolver noise around zero, not negativity.
const NOISE_FLOOR: f64 = 1e-15;

/// One partial-transpose sector: matrix and its (real) spectrum.
#[derive(Debug, Clone)]
pub struct SpectralBlock {
    pub m: usize,
    pub entries: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl SpectralBlock {
    pub fn compute(d: &DerivedCoefficients, m: usize) -> Result<Self> {
        let entries = build_m_block(d, m);
        let eigenvalues = eig::symmetrized_eigenvalues(entries.clone())?;
        Ok(SpectralBlock { m, entries, eigenvalues })
    }
}

/// Builds the `(m+1) x (m+1)` partial-transpose sector block.
pub fn build_m_block(d: &DerivedCoefficients, m: usize) -> DMatrix<f64> {
    let dabs = d.d_abs();
    let mut out = DMatrix::zeros(m + 1, m + 1);
    for l in 0..=m {
        for n in 0..=m {
            let kmin = (l + n).saturating_sub(m);
            let kmax = l.min(n);
            let mut sum = 0.0f64;
            for k in kmin..=kmax {
                sum += LogProduct::new()
                    .ln_term(ln_binomial(m - n, l - k) + ln_binomial(n, k))
                    .pow(d.c1, k)
                    .pow(d.c2, m + k - l - n)
                    .pow(dabs, l + n - 2 * k)
                    .value();
            }
            let df = n as f64 - l as f64;
            out[(l, n)] = (-d.gbt * df * df).exp() * sum / d.g;
        }
    }
    out
}

/// Eigenvalues of sector `m`, ascending.
pub fn block_eigenvalues(d: &DerivedCoefficients, m: usize) -> Result<Vec<f64>> {
    eig::symmetrized_eigenvalues(build_m_block(d, m))
}

/// Closed-form anchors for the block spectra. In the asymmetric case
/// `C` means `sqrt(C1 C2)` and `D` means `|D|`; the sign of these
/// expressions then still decides positivity of the partial transpose,
/// though they match exact eigenvalues only for a symmetric channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormEigs {
    /// The scalar sector: `1/G`.
    pub lambda_0: f64,
    /// Lowest eigenvalue of sector 1: `(C - D e^-gbt)/G`.
    pub lambda_min_1: f64,
    /// Antisymmetric eigenvalue of sector 2: `(C^2 - D^2 e^-4gbt)/G`.
    pub lambda_anti_2: f64,
}

pub fn closed_form_eigs(d: &DerivedCoefficients) -> Result<ClosedFormEigs> {
    let cc = d.c1 * d.c2;
    if cc < 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "C1 C2 = {cc} < 0: closed-form block eigenvalues assume non-negative C_i"
        )));
    }
    let c = cc.sqrt();
    let dabs = d.d_abs();
    Ok(ClosedFormEigs {
        lambda_0: 1.0 / d.g,
        lambda_min_1: (c - dabs * (-d.gbt).exp()) / d.g,
        lambda_anti_2: (c * c - dabs * dabs * (-4.0 * d.gbt).exp()) / d.g,
    })
}

/// Adaptive negativity over the block tower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityResult {
    /// Sum of |negative eigenvalues| over all computed blocks.
    pub negativity: f64,
    /// `log2(1 + 2 * negativity)`.
    pub log_negativity: f64,
    /// Number of sector blocks actually eigensolved.
    pub blocks_used: usize,
    /// Trace captured by the computed blocks (converges to 1).
    pub trace_accumulated: f64,
    /// Geometric estimate of the neglected blocks' total weight.
    pub tail_bound: f64,
}

/// Sums |negative eigenvalues| over sectors, stopping once the
/// accumulated trace reaches `1 - eps` *and* the current block's
/// infinity norm falls below `eps` (traceless-but-nonzero sectors exist
/// at the pure point, so the trace test alone is not sufficient).
pub fn negativity(d: &DerivedCoefficients, eps: f64) -> Result<NegativityResult> {
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation eps must lie in (0,1), got {eps}"
        )));
    }
    let mut neg = 0.0f64;
    let mut trace = 0.0f64;
    let mut last_norm = f64::NAN;
    let mut start = 0usize;
    loop {
        let batch = par::map_range(start, (start + BATCH).min(BLOCK_CAP), |m| {
            let entries = build_m_block(d, m);
            let norm = inf_norm(&entries);
            let tr = entries.trace();
            eig::symmetrized_eigenvalues(entries).map(|eigs| (tr, norm, eigs))
        });
        for item in batch {
            let (tr, norm, eigs) = item?;
            trace += tr;
            let floor = NOISE_FLOOR * norm;
            neg += eigs.iter().filter(|&&x| x < -floor).map(|x| -x).sum::<f64>();
            start += 1;
            if trace >= 1.0 - eps && norm < eps {
                // last_norm still holds the previous block here, so the
                // ratio estimates the geometric decay of the tower.
                let ratio = if last_norm.is_finite() && last_norm > 0.0 {
                    (norm / last_norm).clamp(0.0, 0.999)
                } else {
                    0.0
                };
                return Ok(NegativityResult {
                    negativity: neg,
                    log_negativity: (1.0 + 2.0 * neg).log2(),
                    blocks_used: start,
                    trace_accumulated: trace,
                    tail_bound: norm * ratio / (1.0 - ratio),
                });
            }
            last_norm = norm;
        }
        if start >= BLOCK_CAP {
            return Err(Error::Truncation(format!(
                "negativity did not converge within {BLOCK_CAP} blocks \
                 (trace {trace:.15}, last block norm {last_norm:.3e})"
            )));
        }
    }
}

/// Diagonal entry of the phase-diffusion perturbation series for
/// sector `m` (symmetric channel). Exact in `gbt`: the integrand is
/// expanded into Fourier modes `e^{ikx}`, each of which averages to
/// `e^{-gbt k^2}` under the Gaussian phase weight.
pub fn perturb_diag(d: &DerivedCoefficients, m: usize, n: usize) -> Result<f64> {
    if n > m {
        return Err(Error::InvalidArgument(format!("need n <= m, got n={n}, m={m}")));
    }
    if !close(d.c1, d.c2, 1e-12) {
        return Err(Error::InvalidArgument(
            "perturbative diagonal is defined for the symmetric channel (C1 = C2)".into(),
        ));
    }
    let c = 0.5 * (d.c1 + d.c2);
    let dabs = d.d_abs();
    // Laurent polynomials in z = e^{ix}: cos x = (z + 1/z)/2 and
    // i sin x = (z - 1/z)/2, so every factor below has real
    // coefficients.
    let cos_plus = LaurentF64::new(-1, vec![0.5 * dabs, c, 0.5 * dabs]);
    let cos_minus = LaurentF64::new(-1, vec![-0.5 * dabs, c, -0.5 * dabs]);
    let isin = LaurentF64::new(-1, vec![-0.5 * dabs, 0.0, 0.5 * dabs]);
    let mut total = 0.0f64;
    let kmin = (2 * n).saturating_sub(m);
    for k in kmin..=n {
        let poly = cos_plus
            .pow(m + k - 2 * n)
            .mul(&cos_minus.pow(k))
            .mul(&isin.pow(2 * (n - k)));
        let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        let weight = (ln_binomial(m - n, n - k) + ln_binomial(n, k)).exp();
        total += sign * weight * poly.gaussian_phase_average(d.gbt);
    }
    Ok(total / d.g)
}

/// First-order phase-diffusion factor for the eigenvalue
/// `(C+D)^(m-n) (C-D)^n / G`:
/// `f(m,n) = 1 - gbt [ D/(D+C) (m-n) + D/(D-C) n + 2D^2/((D+C)(D-C)) (m-n) n ]`.
pub fn f_factor(m: usize, n: usize, c: f64, d: f64, gbt: f64) -> Result<f64> {
    if n > m {
        return Err(Error::InvalidArgument(format!("need n <= m, got n={n}, m={m}")));
    }
    let sum = d + c;
    let diff = d - c;
    if sum == 0.0 || diff == 0.0 {
        return Err(Error::SingularInput(format!(
            "f(m,n) has poles at D = -C and D = C; got C={c}, D={d}"
        )));
    }
    let mn = (m - n) as f64;
    let nn = n as f64;
    Ok(1.0 - gbt * (d / sum * mn + d / diff * nn + 2.0 * d * d / (sum * diff) * mn * nn))
}

/// Leading-order negativity estimate in the symmetric channel,
/// expressed through `C` and `D`:
/// `N ~ (D-C)/(1+C-D) - gbt * D(1-C+D) / ((1-C-D)(1+C-D)^2)`.
pub fn negativity_estimate(d: &DerivedCoefficients) -> Result<f64> {
    let cc = d.c1 * d.c2;
    if cc < 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "C1 C2 = {cc} < 0: estimate assumes non-negative C_i"
        )));
    }
    let c = cc.sqrt();
    let dd = d.d_abs();
    let denom = (1.0 - c - dd) * (1.0 + c - dd) * (1.0 + c - dd);
    if denom == 0.0 || (1.0 + c - dd) == 0.0 {
        return Err(Error::SingularInput(
            "negativity estimate pole: 1 - C - D or 1 + C - D vanishes".into(),
        ));
    }
    Ok((dd - c) / (1.0 + c - dd) - d.gbt * dd * (1.0 - c + dd) / denom)
}

/// The same estimate written in terms of the second-moment
/// coefficients: `N ~ (1-A+B)/(2(A-B)-1) - gbt * B/(2(A-B)-1)^2`.
pub fn negativity_estimate_from_moments(a: f64, b: f64, gbt: f64) -> Result<f64> {
    let denom = 2.0 * (a - b) - 1.0;
    if denom == 0.0 {
        return Err(Error::SingularInput(
            "negativity estimate pole: 2(A-B) = 1".into(),
        ));
    }
    Ok((1.0 - a + b) / denom - gbt * b / (denom * denom))
}

/// Dense Laurent polynomial over f64, only used for the perturbative
/// Fourier-mode bookkeeping (degrees stay O(m)).
#[derive(Debug, Clone)]
struct LaurentF64 {
    min: i64,
    coef: Vec<f64>,
}

impl LaurentF64 {
    fn new(min: i64, coef: Vec<f64>) -> Self {
        LaurentF64 { min, coef }
    }

    fn one() -> Self {
        LaurentF64 { min: 0, coef: vec![1.0] }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coef = vec![0.0; self.coef.len() + other.coef.len() - 1];
        for (i, a) in self.coef.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coef.iter().enumerate() {
                coef[i + j] += a * b;
            }
        }
        LaurentF64 { min: self.min + other.min, coef }
    }

    fn pow(&self, e: usize) -> Self {
        let mut acc = LaurentF64::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Applies the phase average `e^{ikx} -> e^{-gbt k^2}` mode by mode.
    fn gaussian_phase_average(&self, gbt: f64) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.min + i as i64;
                c * (-gbt * (k * k) as f64).exp()
            })
            .sum()
    }
}
