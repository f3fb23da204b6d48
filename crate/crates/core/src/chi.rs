//! Characteristic functions of the damped states.
//!
//! Two independent evaluation routes are kept side by side on purpose.
//! The series route expands the phase average of the evolved Gaussian
//! envelope: with `w = B(t) mu1 mu2` the average over the summed phase
//! (variance `2 gbt`) leaves
//!
//! ```text
//! chi = env(mu) [ I_0(2|w|) + 2 sum_{k>=1} e^{-gbt k^2} cos(k arg w) I_k(2|w|) ]
//! ```
//!
//! where `env = exp(-A1'|mu1|^2 - A2'|mu2|^2)` and the `I_k` are the
//! usual modified Bessel sums, here accumulated term by term. The
//! quadrature route never uses the Gaussian structure of the initial
//! state: it phase-averages any caller-supplied characteristic function
//! with per-mode Gauss-Hermite rules, doubling the node count until two
//! refinements agree. The two must coincide on the Gaussian family,
//! which is exactly what the cross-validation tests check.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{ChannelParams, EvolvedParams, GaussianStateParams};

/// Overall cap on accumulated series terms.
const MAX_TERMS: usize = 10_000;

/// Relative truncation threshold for the series route.
const SERIES_TOL: f64 = 1e-15;

/// Relative agreement required between quadrature refinements.
const QUAD_TOL: f64 = 1e-10;

/// Node-count cap for one quadrature dimension.
const MAX_NODES: usize = 512;

/// Phase-harmonic cap for the series route.
const MAX_HARMONICS: usize = 512;

/// Anything that can evaluate a two-mode symmetric-order
/// characteristic function at a point.
pub trait CharacteristicFn {
    fn chi(&self, mu1: Complex64, mu2: Complex64) -> Result<Complex64>;
}

/// The undamped Gaussian family itself.
#[derive(Debug, Clone, Copy)]
pub struct GaussianChi {
    pub state: GaussianStateParams,
}

impl CharacteristicFn for GaussianChi {
    fn chi(&self, mu1: Complex64, mu2: Complex64) -> Result<Complex64> {
        let s = &self.state;
        let quad = -s.a10 * mu1.norm_sqr() - s.a20 * mu2.norm_sqr();
        let cross = 2.0 * (s.b0 * mu1 * mu2).re;
        Ok(Complex64::new((quad + cross).exp(), 0.0))
    }
}

/// Series route: characteristic function of the evolved state at one
/// point. Exact up to the truncation threshold; real by construction.
pub fn evolved_gaussian_chi(ep: &EvolvedParams, mu1: Complex64, mu2: Complex64) -> Result<f64> {
    evolved_gaussian_chi_tol(ep, mu1, mu2, SERIES_TOL)
}

/// Series route with an explicit relative truncation threshold.
pub fn evolved_gaussian_chi_tol(
    ep: &EvolvedParams,
    mu1: Complex64,
    mu2: Complex64,
    tol: f64,
) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "series tolerance must lie in (0,1), got {tol}"
        )));
    }
    let env = (-ep.a1p * mu1.norm_sqr() - ep.a2p * mu2.norm_sqr()).exp();
    let w = ep.b * mu1 * mu2;
    let x = w.norm();
    let phi = if x == 0.0 { 0.0 } else { w.arg() };
    let mut budget = MAX_TERMS;
    let mut acc = bessel_sum(0, x, &mut budget, tol)?;
    let mut quiet = 0u32;
    for k in 1.. {
        if k > MAX_HARMONICS {
            return Err(Error::Truncation(format!(
                "phase series still moving after {k} harmonics"
            )));
        }
        let weight = (-ep.gbt * (k * k) as f64).exp();
        let ik = bessel_sum(k, x, &mut budget, tol)?;
        acc += 2.0 * weight * (phi * k as f64).cos() * ik;
        // cos can vanish at a single harmonic; require two quiet ones.
        if 2.0 * weight * ik <= tol * acc.abs().max(1.0) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(env * acc)
}

/// `I_k(2x)` as the plain ascending series, charging each term to the
/// shared budget.
fn bessel_sum(k: usize, x: f64, budget: &mut usize, tol: f64) -> Result<f64> {
    // Leading term x^k / k! built multiplicatively.
    let mut term = 1.0f64;
    for j in 1..=k {
        term *= x / j as f64;
    }
    let mut acc = term;
    let mut b = 0usize;
    while term > tol * acc.max(1.0) || b == 0 {
        if *budget == 0 {
            return Err(Error::Truncation(format!(
                "series budget of {MAX_TERMS} terms exhausted at harmonic {k}"
            )));
        }
        *budget -= 1;
        b += 1;
        term *= x * x / (b * (b + k)) as f64;
        acc += term;
        if term == 0.0 {
            break;
        }
    }
    Ok(acc)
}

/// Quadrature route: evolve any initial characteristic function through
/// the joint channel and evaluate at one point. The amplitude part
/// rescales the arguments and multiplies in the thermal envelope; the
/// phase part is a two-fold Gaussian average over mode rotations.
pub fn evolve_chi_general(
    chi0: &dyn CharacteristicFn,
    ch: &ChannelParams,
    t: f64,
    mu1: Complex64,
    mu2: Complex64,
) -> Result<Complex64> {
    evolve_chi_general_tol(chi0, ch, t, mu1, mu2, QUAD_TOL)
}

/// Quadrature route with an explicit refinement agreement threshold.
pub fn evolve_chi_general_tol(
    chi0: &dyn CharacteristicFn,
    ch: &ChannelParams,
    t: f64,
    mu1: Complex64,
    mu2: Complex64,
    tol: f64,
) -> Result<Complex64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need finite t >= 0, got {t}")));
    }
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quadrature tolerance must lie in (0,1), got {tol}"
        )));
    }
    let decay = [
        (-0.5 * ch.gamma_amp[0] * t).exp(),
        (-0.5 * ch.gamma_amp[1] * t).exp(),
    ];
    let env = (-(ch.nbar[0] + 0.5) * (1.0 - decay[0] * decay[0]) * mu1.norm_sqr()
        - (ch.nbar[1] + 0.5) * (1.0 - decay[1] * decay[1]) * mu2.norm_sqr())
    .exp();
    let scaled = [mu1 * decay[0], mu2 * decay[1]];
    // Phase spread per mode; zero collapses that dimension to a point.
    let sigma = [
        (ch.gamma_phase[0] * t).sqrt(),
        (ch.gamma_phase[1] * t).sqrt(),
    ];

    let eval = |n: usize| -> Result<Complex64> {
        let point = vec![(0.0f64, std::f64::consts::PI.sqrt())];
        let rules: [Vec<(f64, f64)>; 2] = [
            if sigma[0] == 0.0 { point.clone() } else { hermite_rule(n) },
            if sigma[1] == 0.0 { point.clone() } else { hermite_rule(n) },
        ];
        let mut acc = Complex64::ZERO;
        for &(u1, w1) in &rules[0] {
            let rot1 = Complex64::from_polar(1.0, std::f64::consts::SQRT_2 * sigma[0] * u1);
            for &(u2, w2) in &rules[1] {
                let rot2 = Complex64::from_polar(1.0, std::f64::consts::SQRT_2 * sigma[1] * u2);
                acc += chi0.chi(scaled[0] * rot1, scaled[1] * rot2)? * (w1 * w2);
            }
        }
        Ok(acc / std::f64::consts::PI)
    };

    let mut n = 8usize;
    let mut prev = eval(n)?;
    loop {
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::NonConvergent { last: prev, previous: prev });
        }
        let cur = eval(n)?;
        if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
            return Ok(cur * env);
        }
        prev = cur;
    }
}

/// Gauss-Hermite nodes and weights for weight `exp(-u^2)`, from the
/// eigendecomposition of the Jacobi matrix.
fn hermite_rule(n: usize) -> Vec<(f64, f64)> {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let beta = (j as f64 / 2.0).sqrt();
        jac[(j - 1, j)] = beta;
        jac[(j, j - 1)] = beta;
    }
    let eig = jac.symmetric_eigen();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0: f64 = eig.eigenvectors.column(i)[0];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("hermite nodes are finite"));
    rule
}
