//! Truncated Fock-basis oracle.
//!
//! Everything in this module is deliberately independent of the
//! analytic layer: states are dense two-mode density matrices on a
//! photon-number grid, evolution is a fixed-step RK4 integration of the
//! Lindblad generator
//!
//! ```text
//! d rho/dt = sum_i Gamma_i/2 [ (nbar_i+1)(2 a_i rho a_i+ - {a_i+ a_i, rho})
//!                              + nbar_i (2 a_i+ rho a_i - {a_i a_i+, rho}) ]
//!          + sum_i gamma_i/2 (2 N_i rho N_i - {N_i^2, rho})
//! ```
//!
//! and spectra come from a complex Hermitian eigensolver. The generator
//! is applied as an index stencil (the ladder operators are shift
//! matrices), so one right-hand side costs O(cutoff^4), not a dense
//! matrix product. The truncated generator conserves trace except for
//! the probability a hot reservoir pumps past the cutoff, so lost trace
//! is a direct leakage meter; both it and the boundary-shell population
//! are checked after every integration.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ChannelParams;

/// Population allowed on the top photon shell before the truncation is
/// declared too small for the requested evolution.
const LEAKAGE_LIMIT: f64 = 1e-4;

/// Target for the step-halving Richardson control (max elementwise
/// difference between consecutive refinements).
const RICHARDSON_TOL: f64 = 1e-10;

/// Refinement cap: at most 2^MAX_DOUBLINGS times the initial step count.
const MAX_DOUBLINGS: u32 = 12;

/// Eigenvalues with magnitude below this are treated as zero when
/// summing spectra (eigensolver noise at the scale of unit trace).
const SPECTRUM_FLOOR: f64 = 1e-14;

/// Dense two-mode state on the grid `0..cutoff` per mode. Row index is
/// `n1 * cutoff + n2`.
#[derive(Debug, Clone)]
pub struct FockDensity {
    pub cutoff: usize,
    pub rho: DMatrix<Complex64>,
    /// Probability mass lost when the initial state was truncated to
    /// the grid (before renormalization).
    pub truncation_deficit: f64,
}

impl FockDensity {
    fn dim(&self) -> usize {
        self.cutoff * self.cutoff
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Population sitting on the truncation boundary (either mode at
    /// its top level).
    pub fn boundary_population(&self) -> f64 {
        let n = self.cutoff;
        let mut p = 0.0;
        for n1 in 0..n {
            for n2 in 0..n {
                if n1 == n - 1 || n2 == n - 1 {
                    p += self.rho[(n1 * n + n2, n1 * n + n2)].re;
                }
            }
        }
        p
    }
}

/// Two-mode squeezed vacuum, truncated to the grid and renormalized.
/// The discarded weight `tanh(r)^(2 cutoff)` is reported on the state.
pub fn tmsv_fock(r: f64, cutoff: usize) -> Result<FockDensity> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!("need finite r >= 0, got {r}")));
    }
    if cutoff < 2 {
        return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
    }
    let th = r.tanh();
    let mut amps = vec![0.0f64; cutoff];
    let mut norm2 = 0.0;
    for (n, a) in amps.iter_mut().enumerate() {
        *a = th.powi(n as i32) / r.cosh();
        norm2 += *a * *a;
    }
    // The amplitudes are exactly geometric, so the discarded mass is the
    // geometric tail; `1 - norm2` would lose it to cancellation once it
    // drops below ~1e-8.
    let deficit = (th * th).powi(cutoff as i32);
    let scale = norm2.sqrt();
    let dim = cutoff * cutoff;
    let mut rho = DMatrix::zeros(dim, dim);
    for n in 0..cutoff {
        for m in 0..cutoff {
            let v = (amps[n] / scale) * (amps[m] / scale);
            rho[(n * cutoff + n, m * cutoff + m)] = Complex64::new(v, 0.0);
        }
    }
    Ok(FockDensity { cutoff, rho, truncation_deficit: deficit })
}

/// Product of two thermal states, truncated and renormalized.
pub fn thermal_fock(nbar: [f64; 2], cutoff: usize) -> Result<FockDensity> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
    }
    let mut probs = [vec![0.0f64; cutoff], vec![0.0f64; cutoff]];
    let mut kept = 1.0;
    for (i, &nb) in nbar.iter().enumerate() {
        if !(nb.is_finite() && nb >= 0.0) {
            return Err(Error::InvalidArgument(format!("need nbar >= 0, got {nb}")));
        }
        let q = nb / (nb + 1.0);
        let mut total = 0.0;
        for (n, p) in probs[i].iter_mut().enumerate() {
            *p = (1.0 - q) * q.powi(n as i32);
            total += *p;
        }
        kept *= total;
        for p in probs[i].iter_mut() {
            *p /= total;
        }
    }
    let dim = cutoff * cutoff;
    let mut rho = DMatrix::zeros(dim, dim);
    for n1 in 0..cutoff {
        for n2 in 0..cutoff {
            rho[(n1 * cutoff + n2, n1 * cutoff + n2)] =
                Complex64::new(probs[0][n1] * probs[1][n2], 0.0);
        }
    }
    Ok(FockDensity { cutoff, rho, truncation_deficit: 1.0 - kept })
}

/// Lindblad right-hand side as an index stencil.
fn rhs(cutoff: usize, ch: &ChannelParams, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
    let n = cutoff;
    let idx = |a: usize, b: usize| a * n + b;
    for i1 in 0..n {
        for i2 in 0..n {
            for j1 in 0..n {
                for j2 in 0..n {
                    let r = idx(i1, i2);
                    let c = idx(j1, j2);
                    let x = rho[(r, c)];
                    let mut acc = Complex64::ZERO;
                    // Mode 1 amplitude channel.
                    {
                        let (g, nb) = (ch.gamma_amp[0], ch.nbar[0]);
                        if g > 0.0 {
                            let (ni, mi) = (i1 as f64, j1 as f64);
                            if i1 + 1 < n && j1 + 1 < n {
                                acc += g * (nb + 1.0) * ((ni + 1.0) * (mi + 1.0)).sqrt()
                                    * rho[(idx(i1 + 1, i2), idx(j1 + 1, j2))];
                            }
                            if i1 > 0 && j1 > 0 {
                                acc += g * nb * (ni * mi).sqrt()
                                    * rho[(idx(i1 - 1, i2), idx(j1 - 1, j2))];
                            }
                            acc -= 0.5
                                * g
                                * ((nb + 1.0) * (ni + mi) + nb * (ni + mi + 2.0))
                                * x;
                        }
                    }
                    // Mode 2 amplitude channel.
                    {
                        let (g, nb) = (ch.gamma_amp[1], ch.nbar[1]);
                        if g > 0.0 {
                            let (ni, mi) = (i2 as f64, j2 as f64);
                            if i2 + 1 < n && j2 + 1 < n {
                                acc += g * (nb + 1.0) * ((ni + 1.0) * (mi + 1.0)).sqrt()
                                    * rho[(idx(i1, i2 + 1), idx(j1, j2 + 1))];
                            }
                            if i2 > 0 && j2 > 0 {
                                acc += g * nb * (ni * mi).sqrt()
                                    * rho[(idx(i1, i2 - 1), idx(j1, j2 - 1))];
                            }
                            acc -= 0.5
                                * g
                                * ((nb + 1.0) * (ni + mi) + nb * (ni + mi + 2.0))
                                * x;
                        }
                    }
                    // Phase channels are diagonal in this basis.
                    let d1 = i1 as f64 - j1 as f64;
                    let d2 = i2 as f64 - j2 as f64;
                    acc -= 0.5 * (ch.gamma_phase[0] * d1 * d1 + ch.gamma_phase[1] * d2 * d2) * x;
                    out[(r, c)] = acc;
                }
            }
        }
    }
}

fn rk4_run(
    cutoff: usize,
    ch: &ChannelParams,
    rho0: &DMatrix<Complex64>,
    t: f64,
    steps: usize,
) -> DMatrix<Complex64> {
    let h = t / steps as f64;
    let dim = cutoff * cutoff;
    let mut rho = rho0.clone();
    let mut k1 = DMatrix::zeros(dim, dim);
    let mut k2 = DMatrix::zeros(dim, dim);
    let mut k3 = DMatrix::zeros(dim, dim);
    let mut k4 = DMatrix::zeros(dim, dim);
    for _ in 0..steps {
        rhs(cutoff, ch, &rho, &mut k1);
        let stage = &rho + &k1 * Complex64::new(0.5 * h, 0.0);
        rhs(cutoff, ch, &stage, &mut k2);
        let stage = &rho + &k2 * Complex64::new(0.5 * h, 0.0);
        rhs(cutoff, ch, &stage, &mut k3);
        let stage = &rho + &k3 * Complex64::new(h, 0.0);
        rhs(cutoff, ch, &stage, &mut k4);
        rho += (&k1 + &k2 * Complex64::new(2.0, 0.0) + &k3 * Complex64::new(2.0, 0.0) + &k4)
            * Complex64::new(h / 6.0, 0.0);
        // Integration noise is the only source of non-hermiticity;
        // fold it back each step.
        let herm = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        rho = herm;
    }
    rho
}

/// Integrates the master equation to time `t`. The step count starts at
/// `ceil(t / dt_max)` and doubles until two consecutive refinements
/// agree elementwise within 1e-10.
pub fn integrate_master(
    state: &FockDensity,
    ch: &ChannelParams,
    t: f64,
    dt_max: f64,
) -> Result<FockDensity> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need finite t >= 0, got {t}")));
    }
    if !(dt_max.is_finite() && dt_max > 0.0) {
        return Err(Error::InvalidArgument(format!("need dt_max > 0, got {dt_max}")));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let mut steps = (t / dt_max).ceil() as usize;
    let mut coarse = rk4_run(state.cutoff, ch, &state.rho, t, steps);
    let mut result = None;
    let mut probe = (coarse[(0, 0)], coarse[(0, 0)]);
    for _ in 0..MAX_DOUBLINGS {
        steps *= 2;
        let fine = rk4_run(state.cutoff, ch, &state.rho, t, steps);
        let diff = (&fine - &coarse)
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        probe = (fine[(0, 0)], coarse[(0, 0)]);
        if diff < RICHARDSON_TOL {
            result = Some(fine);
            break;
        }
        coarse = fine;
    }
    let rho = result.ok_or(Error::NonConvergent { last: probe.0, previous: probe.1 })?;
    let out = FockDensity {
        cutoff: state.cutoff,
        rho,
        truncation_deficit: state.truncation_deficit,
    };
    // The truncated generator conserves trace except for the flux a hot
    // reservoir pumps past the cutoff, so lost trace measures leakage
    // directly. Boundary population catches cold-channel pile-up.
    let leakage = (state.trace() - out.trace()).max(out.boundary_population());
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::CutoffTooSmall { leakage, limit: LEAKAGE_LIMIT });
    }
    Ok(out)
}

/// Partial transpose on mode 2 (swap its row/column indices).
pub fn partial_transpose(state: &FockDensity) -> DMatrix<Complex64> {
    let n = state.cutoff;
    let dim = n * n;
    let mut out = DMatrix::zeros(dim, dim);
    for n1 in 0..n {
        for n2 in 0..n {
            for m1 in 0..n {
                for m2 in 0..n {
                    out[(n1 * n + n2, m1 * n + m2)] = state.rho[(n1 * n + m2, m1 * n + n2)];
                }
            }
        }
    }
    out
}

fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    // An exactly-zero row pairs with a zero column (hermiticity), so the
    // matrix is support-block (+) 0 and compacting is exact. It also
    // keeps all-zero columns away from the Householder pass, which
    // returns NaN on very sparse inputs like the raw squeezed vacuum.
    let n = m.nrows();
    let support: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| m[(i, j)] != Complex64::ZERO || m[(j, i)] != Complex64::ZERO))
        .collect();
    let mut eigs: Vec<f64> = if support.len() == n {
        m.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let sub = m.select_rows(support.iter()).select_columns(support.iter());
        let mut e: Vec<f64> = sub.symmetric_eigenvalues().iter().copied().collect();
        e.resize(n, 0.0);
        e
    };
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("hermitian eigenvalues are finite"));
    eigs
}

fn von_neumann(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&x| x > SPECTRUM_FLOOR)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Reduced state of one mode (0-based index).
fn reduced(state: &FockDensity, mode: usize) -> DMatrix<Complex64> {
    let n = state.cutoff;
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += if mode == 0 {
                    state.rho[(a * n + k, b * n + k)]
                } else {
                    state.rho[(k * n + a, k * n + b)]
                };
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Entanglement and entropy measures straight from dense spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMeasures {
    pub negativity: f64,
    pub log_negativity: f64,
    pub entropy: f64,
    pub reduced_entropy: [f64; 2],
    pub coherent_info: [f64; 2],
}

pub fn oracle_measures(state: &FockDensity) -> Result<OracleMeasures> {
    let pt_eigs = hermitian_eigenvalues(partial_transpose(state));
    let negativity: f64 = pt_eigs
        .iter()
        .filter(|&&x| x < -SPECTRUM_FLOOR)
        .map(|&x| -x)
        .sum();
    let rho_eigs = hermitian_eigenvalues(state.rho.clone());
    if let Some(&lo) = rho_eigs.first() {
        if lo < -1e-8 {
            return Err(Error::Numerical(format!(
                "density eigenvalue {lo:.3e} violates positivity"
            )));
        }
    }
    let entropy = von_neumann(&rho_eigs);
    let s1 = von_neumann(&hermitian_eigenvalues(reduced(state, 0)));
    let s2 = von_neumann(&hermitian_eigenvalues(reduced(state, 1)));
    Ok(OracleMeasures {
        negativity,
        log_negativity: (1.0 + 2.0 * negativity).log2(),
        entropy,
        reduced_entropy: [s1, s2],
        coherent_info: [(s1 - entropy).max(0.0), (s2 - entropy).max(0.0)],
    })
}

/// Spectrum of the total-photon-number sector `m` of the partial
/// transpose. Exactly `(m+1)`-dimensional on the grid when
/// `m < cutoff`.
pub fn pt_sector_spectrum(state: &FockDensity, m: usize) -> Result<Vec<f64>> {
    if m >= state.cutoff {
        return Err(Error::InvalidArgument(format!(
            "sector {m} is truncated at cutoff {}; spectra would be incomplete",
            state.cutoff
        )));
    }
    let pt = partial_transpose(state);
    let n = state.cutoff;
    let mut block = DMatrix::zeros(m + 1, m + 1);
    for (i, n1) in (0..=m).enumerate() {
        for (j, m1) in (0..=m).enumerate() {
            block[(i, j)] = pt[(n1 * n + (m - n1), m1 * n + (m - m1))];
        }
    }
    Ok(hermitian_eigenvalues(block))
}

/// Spectrum of the photon-difference sector `n1 - n2 = dm` of the
/// state itself (signed; the grid truncates the sector length).
pub fn rho_sector_spectrum(state: &FockDensity, dm: i64) -> Result<Vec<f64>> {
    let n = state.cutoff as i64;
    if dm.abs() >= n {
        return Err(Error::InvalidArgument(format!(
            "sector {dm} is empty at cutoff {n}"
        )));
    }
    let len = (n - dm.abs()) as usize;
    let base = |k: usize| -> usize {
        let k = k as i64;
        let (n1, n2) = if dm >= 0 { (k + dm, k) } else { (k, k - dm) };
        (n1 * n + n2) as usize
    };
    let mut block = DMatrix::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            block[(i, j)] = state.rho[(base(i), base(j))];
        }
    }
    Ok(hermitian_eigenvalues(block))
}

/// Second moments `<a_i+ a_i>` and `<a1+ a2+>`. For damped states from
/// the Gaussian family these are `A_i' - 1/2` and `B e^-gbt`: the cross
/// moment is a photon-number coherence, so phase damping multiplies it
/// by the `k = 1` harmonic factor.
pub fn second_moments(state: &FockDensity) -> ([f64; 2], Complex64) {
    let n = state.cutoff;
    let mut occ = [0.0f64; 2];
    let mut b = Complex64::ZERO;
    for n1 in 0..n {
        for n2 in 0..n {
            let p = state.rho[(n1 * n + n2, n1 * n + n2)].re;
            occ[0] += n1 as f64 * p;
            occ[1] += n2 as f64 * p;
            // <a1+ a2+> = sum rho[(n1,n2),(n1+1,n2+1)] sqrt((n1+1)(n2+1)).
            if n1 + 1 < n && n2 + 1 < n {
                b += state.rho[(n1 * n + n2, (n1 + 1) * n + n2 + 1)]
                    * (((n1 + 1) * (n2 + 1)) as f64).sqrt();
            }
        }
    }
    (occ, b)
}

/// Symmetric-order characteristic function `tr[rho D(mu1) D(mu2)]`.
pub fn chi_point(state: &FockDensity, mu1: Complex64, mu2: Complex64) -> Complex64 {
    let d1 = displacement_matrix(mu1, state.cutoff);
    let d2 = displacement_matrix(mu2, state.cutoff);
    let n = state.cutoff;
    let mut acc = Complex64::ZERO;
    for n1 in 0..n {
        for n2 in 0..n {
            for m1 in 0..n {
                for m2 in 0..n {
                    acc += state.rho[(n1 * n + n2, m1 * n + m2)] * d1[(m1, n1)] * d2[(m2, n2)];
                }
            }
        }
    }
    acc
}

/// `<m| D(mu) |n>` on the truncated grid.
fn displacement_matrix(mu: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let x = mu.norm_sqr();
    let env = (-0.5 * x).exp();
    let mut out = DMatrix::zeros(cutoff, cutoff);
    for m in 0..cutoff {
        for n in 0..cutoff {
            let (lo, a) = (m.min(n), m.abs_diff(n));
            // sqrt(lo! / hi!) = 1 / sqrt(prod_{k=lo+1..hi} k).
            let mut ratio = 1.0f64;
            for k in lo + 1..=lo + a {
                ratio /= k as f64;
            }
            let ratio = ratio.sqrt();
            let phase = if m >= n { mu.powu(a as u32) } else { (-mu.conj()).powu(a as u32) };
            out[(m, n)] = phase * ratio * env * laguerre(lo, a as f64, x);
        }
    }
    out
}

/// Associated Laguerre polynomial `L_k^{(a)}(x)` by the three-term
/// recurrence.
fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0f64;
    let mut cur = 1.0 + a - x;
    for i in 1..k {
        let next = ((2.0 * i as f64 + 1.0 + a - x) * cur - (i as f64 + a) * prev) / (i as f64 + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
