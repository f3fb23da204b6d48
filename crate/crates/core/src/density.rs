//! Photon-number-difference sector spectra of the damped state, von
//! Neumann entropy, and coherent information.
//!
//! The damped state commutes with the photon-number difference
//! `N1 - N2`, so it is block diagonal over sectors `n1 - n2 = +-m`.
//! The sector with `m` excess photons in mode 1 has entries (infinite
//! indices `l, n`, truncated adaptively)
//!
//! ```text
//! L(m)[l,n] = exp(-gbt (n-l)^2) / G *
//!             sum_{k<=min(l,n)} C(m+n, n-k) C(l, k) C1^k C2^(m+k) (-|D|)^(l+n-2k)
//! ```
//!
//! Note the label crossing: `C2 = 1 - A2/G` carries the excess
//! exponent because at `B = 0` it reduces to mode ONE's thermal ratio
//! `nbar1/(nbar1 + 1)` (the crossing comes from inverting the 2x2
//! covariance). For a symmetric channel (`C1 = C2 = C`) the sum
//! collapses to the product form
//! `C^m sum_k C(m+n,n-k) C(l,k) C^{2k} (-D)^{l+n-2k} / G`. The
//! mode-2-excess sector is the same construction with the mode labels
//! swapped; for a symmetric channel the two coincide, which is where
//! the usual degeneracy factor 2 in the entropy sum comes from.
//!
//! Spot anchors: at `r = 0` the blocks are diagonal with entries
//! `q^(m+2n) (1-q)^2`, `q = nbar/(nbar+1)`, and for the pure squeezed
//! vacuum (`C = 0`) the only nonzero sector is `m = 0`, a rank-one
//! block, so the entropy vanishes.

use nalgebra::DMatrix;

use crate::eig;
use crate::error::{Error, Result};
use crate::mathutil::ln_binomial;
use crate::mathutil::LogProduct;
use crate::par;
use crate::params::DerivedCoefficients;

/// Hard caps for the adaptive truncation.
const SECTOR_CAP: usize = 4096;
const SIZE_CAP: usize = 4096;

/// Batch width for parallel sector builds (reduced in order).
const BATCH: usize = 8;

/// Relative PSD gate: eigenvalues below `-PSD_GATE * block norm` mean
/// the numerics failed, not that the state has negative probabilities.
const PSD_GATE: f64 = 1e-10;

/// Eigenvalues below this absolute floor are dropped from `x ln x`.
const ENTROPY_FLOOR: f64 = 1e-14;

/// One photon-difference sector of the state.
#[derive(Debug, Clone)]
pub struct DensityBlock {
    pub m: usize,
    pub entries: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl DensityBlock {
    /// Builds and eigensolves the mode-1-excess sector `m` at a fixed
    /// truncation size.
    pub fn compute(d: &DerivedCoefficients, m: usize, size: usize) -> Result<Self> {
        let entries = build_l_block(d, m, size);
        let eigenvalues = eig::symmetrized_eigenvalues(entries.clone())?;
        Ok(DensityBlock { m, entries, eigenvalues })
    }
}

/// Entry `[l, n]` of the mode-1-excess sector block.
fn l_entry(d: &DerivedCoefficients, m: usize, l: usize, n: usize) -> f64 {
    let dabs = d.d_abs();
    let mut sum = 0.0f64;
    for k in 0..=l.min(n) {
        sum += LogProduct::new()
            .ln_term(ln_binomial(m + n, n - k) + ln_binomial(l, k))
            .pow(d.c1, k)
            .pow(d.c2, m + k)
            .pow(dabs, l + n - 2 * k)
            .value();
    }
    let sign = if (l + n).is_multiple_of(2) { 1.0 } else { -1.0 };
    let df = n as f64 - l as f64;
    sign * (-d.gbt * df * df).exp() * sum / d.g
}

/// Builds the `size x size` truncation of the mode-1-excess sector `m`.
pub fn build_l_block(d: &DerivedCoefficients, m: usize, size: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(size, size);
    for l in 0..size {
        for n in 0..size {
            out[(l, n)] = l_entry(d, m, l, n);
        }
    }
    out
}

/// Eigenvalues of the truncated sector, ascending.
pub fn block_eigenvalues(d: &DerivedCoefficients, m: usize, size: usize) -> Result<Vec<f64>> {
    eig::symmetrized_eigenvalues(build_l_block(d, m, size))
}

/// Truncation size for sector `m`: grow until the trailing diagonal
/// entry drops below `eps` times the leading one.
fn sector_size(d: &DerivedCoefficients, m: usize, eps: f64) -> usize {
    let leading = l_entry(d, m, 0, 0);
    if leading <= 0.0 {
        return 1;
    }
    let mut n = 1;
    while n < SIZE_CAP && l_entry(d, m, n, n) >= eps * leading {
        n += 1;
    }
    n + 1
}

/// Entropy of one sector block: `-sum lambda ln lambda` plus its trace,
/// with the PSD gate applied.
fn sector_entropy(d: &DerivedCoefficients, m: usize, eps: f64) -> Result<(f64, f64)> {
    let size = sector_size(d, m, eps);
    let entries = build_l_block(d, m, size);
    let trace = entries.trace();
    if trace <= 0.0 {
        return Ok((0.0, trace.max(0.0)));
    }
    let norm = crate::mathutil::inf_norm(&entries);
    let eigs = eig::symmetrized_eigenvalues(entries)?;
    let mut s = 0.0;
    for &x in &eigs {
        if x < -PSD_GATE * norm {
            return Err(Error::Numerical(format!(
                "sector {m} eigenvalue {x:.3e} violates positivity (norm {norm:.3e})"
            )));
        }
        if x > ENTROPY_FLOOR {
            s -= x * x.ln();
        }
    }
    Ok((s, trace))
}

/// Von Neumann entropy result (natural log).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyResult {
    pub entropy: f64,
    /// Sectors per orientation that were eigensolved.
    pub blocks_used: usize,
    /// Total probability captured across all computed sectors.
    pub trace_accumulated: f64,
}

/// Adaptive von Neumann entropy over all photon-difference sectors.
/// Sectors `+-m` are both computed (they coincide for a symmetric
/// channel); truncation stops once the captured trace reaches
/// `1 - eps` and the latest sector traces are below `eps`.
pub fn entropy(d: &DerivedCoefficients, eps: f64) -> Result<EntropyResult> {
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation eps must lie in (0,1), got {eps}"
        )));
    }
    let swapped = d.swap_modes();
    let (s0, tr0) = sector_entropy(d, 0, eps)?;
    let mut total_s = s0;
    let mut total_tr = tr0;
    let mut m = 1usize;
    loop {
        let hi = (m + BATCH).min(SECTOR_CAP);
        let batch = par::map_range(m, hi, |mm| {
            let plus = sector_entropy(d, mm, eps)?;
            let minus = sector_entropy(&swapped, mm, eps)?;
            Ok::<_, Error>((plus, minus))
        });
        for item in batch {
            let ((sp, trp), (sm, trm)) = item?;
            total_s += sp + sm;
            total_tr += trp + trm;
            m += 1;
            if total_tr >= 1.0 - eps && trp < eps && trm < eps {
                return Ok(EntropyResult {
                    entropy: total_s,
                    blocks_used: m,
                    trace_accumulated: total_tr,
                });
            }
        }
        if m >= SECTOR_CAP {
            return Err(Error::Truncation(format!(
                "entropy did not converge within {SECTOR_CAP} sectors (trace {total_tr:.15})"
            )));
        }
    }
}

/// Entropy of one reduced mode: `A ln A - (A-1) ln(A-1)` for the
/// second-moment coefficient `A >= 1` (a thermal state with occupation
/// `A - 1`).
pub fn reduced_entropy(a: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "reduced-mode coefficient must satisfy A >= 1, got {a}"
        )));
    }
    let n = (a - 1.0).max(0.0);
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(a * a.ln() - n * n.ln())
}

/// Coherent information of both cuts:
/// `I_i = max(0, S(rho_i) - S(rho))`.
pub fn coherent_info(d: &DerivedCoefficients, eps: f64) -> Result<(f64, f64)> {
    let s = entropy(d, eps)?.entropy;
    let s1 = reduced_entropy(d.a1)?;
    let s2 = reduced_entropy(d.a2)?;
    Ok(((s1 - s).max(0.0), (s2 - s).max(0.0)))
}

/// Unclamped entropy gaps `S(rho_i) - S(rho)`; the root finder for the
/// coherent-information crossing needs the sign.
pub fn entropy_gaps(d: &DerivedCoefficients, eps: f64) -> Result<(f64, f64)> {
    let s = entropy(d, eps)?.entropy;
    Ok((reduced_entropy(d.a1)? - s, reduced_entropy(d.a2)? - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{coefficients_at, ChannelParams, GaussianStateParams};
    use approx::assert_relative_eq;

    /// Direct transcription of the symmetric-channel product form, used
    /// to pin the general builder.
    fn symmetric_entry(c: f64, dabs: f64, g: f64, gbt: f64, m: usize, l: usize, n: usize) -> f64 {
        let mut sum = 0.0;
        for k in 0..=l.min(n) {
            sum += crate::mathutil::binomial(m + n, n - k)
                * crate::mathutil::binomial(l, k)
                * c.powi(2 * k as i32)
                * (-dabs).powi((l + n - 2 * k) as i32);
        }
        let df = n as f64 - l as f64;
        c.powi(m as i32) * sum * (-gbt * df * df).exp() / g
    }

    #[test]
    fn general_builder_reduces_to_symmetric_product_form() {
        let s = GaussianStateParams::squeezed_thermal(0.45, 0.15).unwrap();
        let ch = ChannelParams::symmetric(0.6, 0.35, 0.4).unwrap();
        let d = coefficients_at(&s, &ch, 0.8).unwrap();
        for m in 0..4usize {
            let blk = build_l_block(&d, m, 6);
            for l in 0..6 {
                for n in 0..6 {
                    let want = symmetric_entry(d.c1, d.d_abs(), d.g, d.gbt, m, l, n);
                    assert_relative_eq!(blk[(l, n)], want, epsilon = 1e-16, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn thermal_sectors_are_diagonal_geometric() {
        // r = 0, fully thermalized: L(m) diagonal, entries
        // q^(m+2n) (1-q)^2 with q = nbar/(nbar+1).
        let s = GaussianStateParams::squeezed_vacuum(0.0).unwrap();
        let ch = ChannelParams::symmetric(1.0, 0.0, 0.5).unwrap();
        let d = coefficients_at(&s, &ch, 60.0).unwrap();
        let q: f64 = 0.5 / 1.5;
        for m in 0..4usize {
            let blk = build_l_block(&d, m, 5);
            for l in 0..5 {
                for n in 0..5 {
                    let want = if l == n {
                        q.powi((m + 2 * n) as i32) * (1.0 - q) * (1.0 - q)
                    } else {
                        0.0
                    };
                    assert_relative_eq!(blk[(l, n)], want, epsilon = 1e-12, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn thermal_entropy_matches_closed_form() {
        let nbar: f64 = 0.5;
        let s = GaussianStateParams::squeezed_vacuum(0.0).unwrap();
        let ch = ChannelParams::symmetric(1.0, 0.0, nbar).unwrap();
        let d = coefficients_at(&s, &ch, 60.0).unwrap();
        let got = entropy(&d, 1e-13).unwrap();
        let want = 2.0 * ((nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln());
        assert_relative_eq!(got.entropy, want, max_relative = 1e-10);
        assert!(got.trace_accumulated > 1.0 - 1e-12);
    }

    #[test]
    fn pure_squeezed_vacuum_has_zero_entropy() {
        let s = GaussianStateParams::squeezed_vacuum(0.5).unwrap();
        let ch = ChannelParams::symmetric(0.0, 0.0, 0.0).unwrap();
        let d = coefficients_at(&s, &ch, 0.0).unwrap();
        // Sector 0 is rank one with eigenvalue 1...
        let eigs = block_eigenvalues(&d, 0, 24).unwrap();
        assert_relative_eq!(*eigs.last().unwrap(), 1.0, max_relative = 1e-12);
        assert!(eigs[eigs.len() - 2].abs() < 1e-12);
        // ...and the m >= 1 sectors vanish identically.
        let blk = build_l_block(&d, 1, 8);
        assert_eq!(blk.abs().max(), 0.0);
        let s = entropy(&d, 1e-12).unwrap();
        assert!(s.entropy.abs() < 1e-9, "entropy {} should vanish", s.entropy);
    }

    #[test]
    fn sector_traces_sum_to_one_asymmetric() {
        let s = GaussianStateParams::squeezed_thermal(0.35, 0.2).unwrap();
        let ch = ChannelParams::new([0.8, 0.3], [0.2, 0.5], [0.1, 0.6]).unwrap();
        let d = coefficients_at(&s, &ch, 0.7).unwrap();
        let sw = d.swap_modes();
        let mut tr = build_l_block(&d, 0, 64).trace();
        for m in 1..64 {
            tr += build_l_block(&d, m, 64).trace();
            tr += build_l_block(&sw, m, 64).trace();
        }
        assert_relative_eq!(tr, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn reduced_entropy_limits_and_values() {
        assert_eq!(reduced_entropy(1.0).unwrap(), 0.0);
        // Thermal occupation 0.5: (1.5 ln 1.5 - 0.5 ln 0.5).
        let want = 1.5 * 1.5f64.ln() - 0.5 * 0.5f64.ln();
        assert_relative_eq!(reduced_entropy(1.5).unwrap(), want, max_relative = 1e-14);
        assert!(reduced_entropy(0.8).is_err());
    }

    #[test]
    fn coherent_info_of_pure_squeezed_vacuum_is_entanglement_entropy() {
        let r: f64 = 0.5;
        let s = GaussianStateParams::squeezed_vacuum(r).unwrap();
        let ch = ChannelParams::symmetric(0.0, 0.0, 0.0).unwrap();
        let d = coefficients_at(&s, &ch, 0.0).unwrap();
        let (i1, i2) = coherent_info(&d, 1e-12).unwrap();
        let ch2 = r.cosh() * r.cosh();
        let sh2 = r.sinh() * r.sinh();
        let want = ch2 * ch2.ln() - sh2 * sh2.ln();
        assert_relative_eq!(i1, want, max_relative = 1e-8);
        assert_relative_eq!(i2, want, max_relative = 1e-8);
    }

    #[test]
    fn entropy_gap_signs_flip_under_strong_damping() {
        let s = GaussianStateParams::squeezed_vacuum(0.5).unwrap();
        let ch = ChannelParams::symmetric(0.5, 0.5, 0.5).unwrap();
        let early = coefficients_at(&s, &ch, 0.0).unwrap();
        let (g1, _) = entropy_gaps(&early, 1e-11).unwrap();
        assert!(g1 > 0.0);
        let late = coefficients_at(&s, &ch, 5.0).unwrap();
        let (g1, g2) = entropy_gaps(&late, 1e-11).unwrap();
        assert!(g1 < 0.0 && g2 < 0.0);
    }
}
