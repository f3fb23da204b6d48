//! State family, damping channel, and the closed-form parameter flow.
//!
//! The states handled by this crate are two-mode x-p symmetric Gaussian
//! states, fixed by a characteristic function
//!
//! ```text
//! chi(mu, 0) = exp[ -(A10 |mu1|^2 + A20 |mu2|^2) + B0 mu1 mu2 + conj(B0 mu1 mu2) ]
//! ```
//!
//! Each mode couples to its own amplitude-damping reservoir (rate
//! `Gamma_i`, thermal occupation `nbar_i`) and phase-damping reservoir
//! (rate `gamma_i`). Under the joint evolution the Gaussian envelope
//! stays closed:
//!
//! ```text
//! A_i'(t) = exp(-Gamma_i t) A_i0 + (nbar_i + 1/2)(1 - exp(-Gamma_i t))
//! B(t)    = exp(-(Gamma_1 + Gamma_2) t / 2) B0
//! ```
//!
//! while phase damping only survives as diffusion of the joint phase of
//! the cross term, summarised by the single number `gbt = (gamma_1 +
//! gamma_2) t / 2`. Everything downstream (block spectra, separability
//! margins, the P-function analysis) is a function of the derived
//! coefficients computed here.

use num_complex::Complex64;

use crate::error::{Error, Result, StateViolation};

/// Relative slack for physicality checks, so states constructed exactly
/// on a boundary (pure squeezed vacuum) survive rounding.
const PHYS_TOL: f64 = 1e-12;

/// Initial Gaussian envelope `(A10, A20, B0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStateParams {
    pub a10: f64,
    pub a20: f64,
    pub b0: Complex64,
}

impl GaussianStateParams {
    /// Arbitrary envelope; rejected unless physical.
    pub fn explicit(a10: f64, a20: f64, b0: Complex64) -> Result<Self> {
        let p = GaussianStateParams { a10, a20, b0 };
        p.validate().map_err(Error::Unphysical)?;
        Ok(p)
    }

    /// Two-mode squeezed vacuum with squeezing parameter `r`.
    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument("squeezing r must be finite".into()));
        }
        Ok(GaussianStateParams {
            a10: (2.0 * r).cosh() / 2.0,
            a20: (2.0 * r).cosh() / 2.0,
            b0: Complex64::new((2.0 * r).sinh() / 2.0, 0.0),
        })
    }

    /// Two-mode squeezed thermal state: both modes start at occupation
    /// `n0 >= 0` before the squeezer acts.
    pub fn squeezed_thermal(r: f64, n0: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument("squeezing r must be finite".into()));
        }
        if !(n0.is_finite() && n0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "thermal occupation n0 must be finite and >= 0, got {n0}"
            )));
        }
        let w = n0 + 0.5;
        Ok(GaussianStateParams {
            a10: w * (2.0 * r).cosh(),
            a20: w * (2.0 * r).cosh(),
            b0: Complex64::new(w * (2.0 * r).sinh(), 0.0),
        })
    }

    /// Checks the physicality inequalities
    /// `A_i0 >= 1/2` and `A10 A20 - |B0|^2 >= 1/4`.
    pub fn validate(&self) -> std::result::Result<(), StateViolation> {
        if !self.a10.is_finite() {
            return Err(StateViolation::NonFinite { field: "A10" });
        }
        if !self.a20.is_finite() {
            return Err(StateViolation::NonFinite { field: "A20" });
        }
        if !self.b0.re.is_finite() || !self.b0.im.is_finite() {
            return Err(StateViolation::NonFinite { field: "B0" });
        }
        let slack = |scale: f64| PHYS_TOL * scale.abs().max(1.0);
        if self.a10 < 0.5 - slack(self.a10) {
            return Err(StateViolation::ModeBelowVacuum { mode: 1, value: self.a10 });
        }
        if self.a20 < 0.5 - slack(self.a20) {
            return Err(StateViolation::ModeBelowVacuum { mode: 2, value: self.a20 });
        }
        let product = self.a10 * self.a20 - self.b0.norm_sqr();
        if product < 0.25 - slack(self.a10 * self.a20) {
            return Err(StateViolation::UncertaintyProduct { value: product });
        }
        Ok(())
    }
}

/// Per-mode reservoir couplings. Index 0 is mode 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Amplitude-damping rates `Gamma_i`.
    pub gamma_amp: [f64; 2],
    /// Phase-damping rates `gamma_i`.
    pub gamma_phase: [f64; 2],
    /// Thermal occupations `nbar_i` of the amplitude reservoirs.
    pub nbar: [f64; 2],
}

impl ChannelParams {
    pub fn new(gamma_amp: [f64; 2], gamma_phase: [f64; 2], nbar: [f64; 2]) -> Result<Self> {
        for (name, vals) in [
            ("gamma_amp", &gamma_amp),
            ("gamma_phase", &gamma_phase),
            ("nbar", &nbar),
        ] {
            for v in vals {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "{name} must be finite and >= 0, got {v}"
                    )));
                }
            }
        }
        Ok(ChannelParams { gamma_amp, gamma_phase, nbar })
    }

    /// Both modes see identical reservoirs.
    pub fn symmetric(gamma_amp: f64, gamma_phase: f64, nbar: f64) -> Result<Self> {
        ChannelParams::new([gamma_amp; 2], [gamma_phase; 2], [nbar; 2])
    }

    /// Mean phase-damping rate `(gamma_1 + gamma_2) / 2`.
    pub fn gamma_phase_mean(&self) -> f64 {
        0.5 * (self.gamma_phase[0] + self.gamma_phase[1])
    }
}

/// Gaussian envelope at time `t`, plus the accumulated phase diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedParams {
    pub a1p: f64,
    pub a2p: f64,
    pub b: Complex64,
    /// Phase-diffusion weight `(gamma_1 + gamma_2) t / 2`.
    pub gbt: f64,
}

/// Closed-form evolution of the envelope under both dampings.
pub fn evolve_params(
    state: &GaussianStateParams,
    channel: &ChannelParams,
    t: f64,
) -> Result<EvolvedParams> {
    state.validate().map_err(Error::Unphysical)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let decay = |gamma: f64| (-gamma * t).exp();
    let a1p = decay(channel.gamma_amp[0]) * state.a10
        + (channel.nbar[0] + 0.5) * (1.0 - decay(channel.gamma_amp[0]));
    let a2p = decay(channel.gamma_amp[1]) * state.a20
        + (channel.nbar[1] + 0.5) * (1.0 - decay(channel.gamma_amp[1]));
    let b = state.b0 * (-(channel.gamma_amp[0] + channel.gamma_amp[1]) * t / 2.0).exp();
    Ok(EvolvedParams { a1p, a2p, b, gbt: channel.gamma_phase_mean() * t })
}

/// Coefficients of the P-function analysis. Defined whenever the
/// denominator `(A1-1)(A2-1) - |B|^2` is nonzero; the accompanying
/// `DerivedCoefficients::p_normalizable` tells whether the P-function
/// normalization integral actually converges (positive denominator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PCoefficients {
    pub e1: f64,
    pub e2: f64,
    pub f: Complex64,
    /// Overall prefactor `1 / ((A1-1)(A2-1) - |B|^2)`.
    pub c: f64,
}

/// All coefficients the spectral and separability layers consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoefficients {
    /// `A_i = A_i' + 1/2`.
    pub a1: f64,
    pub a2: f64,
    /// Cross coefficient `B(t)`, carried for the second-moment checks
    /// and the Simon-type margin.
    pub b: Complex64,
    /// `G = A1 A2 - |B|^2`, the spectral prefactor denominator.
    pub g: f64,
    /// `C_i = 1 - A_i / G`.
    pub c1: f64,
    pub c2: f64,
    /// `D = B / G`.
    pub d: Complex64,
    /// P-function coefficients; `None` exactly when the denominator
    /// `(A1-1)(A2-1) - |B|^2` vanishes.
    pub p: Option<PCoefficients>,
    /// Phase-diffusion weight, passed through from `EvolvedParams`.
    pub gbt: f64,
}

impl DerivedCoefficients {
    pub fn d_abs(&self) -> f64 {
        self.d.norm()
    }

    /// `(A1-1)(A2-1) - |B|^2`, the P-function denominator.
    pub fn p_denominator(&self) -> f64 {
        (self.a1 - 1.0) * (self.a2 - 1.0) - self.b.norm_sqr()
    }

    /// True iff the P-function normalization integral converges.
    pub fn p_normalizable(&self) -> bool {
        self.p_denominator() > 0.0
    }

    /// Same state with the mode labels exchanged. Spectral blocks for
    /// the photon-excess-in-mode-2 sectors are built from the swapped
    /// coefficients.
    pub fn swap_modes(&self) -> Self {
        DerivedCoefficients {
            a1: self.a2,
            a2: self.a1,
            c1: self.c2,
            c2: self.c1,
            p: self.p.map(|p| PCoefficients { e1: p.e2, e2: p.e1, ..p }),
            ..*self
        }
    }
}

/// Derives the spectral-layer coefficients from an evolved envelope.
pub fn derive_coefficients(e: &EvolvedParams) -> Result<DerivedCoefficients> {
    let a1 = e.a1p + 0.5;
    let a2 = e.a2p + 0.5;
    let g = a1 * a2 - e.b.norm_sqr();
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "A1 A2 - |B|^2 = {g} must be positive; envelope is not a valid state"
        )));
    }
    let h = (a1 - 1.0) * (a2 - 1.0) - e.b.norm_sqr();
    let p = if h != 0.0 && h.is_finite() {
        Some(PCoefficients {
            e1: (a1 - 1.0) / h,
            e2: (a2 - 1.0) / h,
            f: e.b / h,
            c: 1.0 / h,
        })
    } else {
        None
    };
    Ok(DerivedCoefficients {
        a1,
        a2,
        b: e.b,
        g,
        c1: 1.0 - a1 / g,
        c2: 1.0 - a2 / g,
        d: e.b / g,
        p,
        gbt: e.gbt,
    })
}

/// Convenience: evolve and derive in one step.
pub fn coefficients_at(
    state: &GaussianStateParams,
    channel: &ChannelParams,
    t: f64,
) -> Result<DerivedCoefficients> {
    derive_coefficients(&evolve_params(state, channel, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn squeezed_vacuum_hits_pure_state_identities() {
        // cosh/sinh algebra: A = cosh^2 r, A^2 - B^2 = cosh^2 r,
        // so C = 0 and D = tanh r exactly.
        for r in [0.0, 0.3, 0.5, 1.0] {
            let s = GaussianStateParams::squeezed_vacuum(r).unwrap();
            let ch = ChannelParams::symmetric(0.0, 0.0, 0.0).unwrap();
            let d = coefficients_at(&s, &ch, 0.0).unwrap();
            assert_relative_eq!(d.a1, r.cosh() * r.cosh(), max_relative = 1e-14);
            assert!(d.c1.abs() < 1e-14, "C1 = {} should vanish", d.c1);
            assert!(d.c2.abs() < 1e-14);
            assert_relative_eq!(d.d.re, r.tanh(), max_relative = 1e-13, epsilon = 1e-15);
            assert_eq!(d.d.im, 0.0);
        }
    }

    #[test]
    fn squeezed_vacuum_saturates_uncertainty_product() {
        let s = GaussianStateParams::squeezed_vacuum(0.8).unwrap();
        let product = s.a10 * s.a20 - s.b0.norm_sqr();
        assert_relative_eq!(product, 0.25, max_relative = 1e-12);
        s.validate().unwrap();
    }

    #[test]
    fn violations_name_the_failed_inequality() {
        let err = GaussianStateParams::explicit(0.3, 0.6, Complex64::new(0.0, 0.0));
        match err {
            Err(Error::Unphysical(StateViolation::ModeBelowVacuum { mode: 1, .. })) => {}
            other => panic!("expected mode-1 violation, got {other:?}"),
        }
        let err = GaussianStateParams::explicit(0.6, 0.6, Complex64::new(0.9, 0.0));
        match err {
            Err(Error::Unphysical(StateViolation::UncertaintyProduct { .. })) => {}
            other => panic!("expected uncertainty violation, got {other:?}"),
        }
    }

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let s = GaussianStateParams::squeezed_thermal(0.4, 0.2).unwrap();
        let ch = ChannelParams::new([0.5, 0.3], [0.2, 0.7], [0.1, 0.9]).unwrap();
        let e = evolve_params(&s, &ch, 0.0).unwrap();
        assert_eq!(e.a1p, s.a10);
        assert_eq!(e.a2p, s.a20);
        assert_eq!(e.b, s.b0);
        assert_eq!(e.gbt, 0.0);
    }

    #[test]
    fn evolution_limits_to_thermal_fixed_point() {
        let s = GaussianStateParams::squeezed_vacuum(0.7).unwrap();
        let ch = ChannelParams::new([0.5, 0.8], [0.1, 0.1], [0.3, 1.2]).unwrap();
        let e = evolve_params(&s, &ch, 200.0).unwrap();
        assert_relative_eq!(e.a1p, 0.8, max_relative = 1e-12);
        assert_relative_eq!(e.a2p, 1.7, max_relative = 1e-12);
        assert!(e.b.norm() < 1e-12);
    }

    #[test]
    fn evolved_envelope_stays_physical_onwards() {
        // Physicality of the envelope is preserved: spot check a grid.
        let s = GaussianStateParams::squeezed_vacuum(1.0).unwrap();
        let ch = ChannelParams::new([0.4, 0.9], [0.0, 0.0], [0.0, 0.6]).unwrap();
        for i in 0..40 {
            let t = i as f64 * 0.25;
            let e = evolve_params(&s, &ch, t).unwrap();
            let envelope = GaussianStateParams { a10: e.a1p, a20: e.a2p, b0: e.b };
            envelope.validate().unwrap();
            // And the derived denominator stays positive.
            derive_coefficients(&e).unwrap();
        }
    }

    #[test]
    fn thermal_coefficients_reduce_to_occupation_ratio() {
        // r = 0 at late times: A = nbar + 1, C = nbar / (nbar + 1).
        let s = GaussianStateParams::squeezed_vacuum(0.0).unwrap();
        let ch = ChannelParams::symmetric(1.0, 0.0, 0.5).unwrap();
        let d = coefficients_at(&s, &ch, 80.0).unwrap();
        assert_relative_eq!(d.a1, 1.5, max_relative = 1e-12);
        assert_relative_eq!(d.c1, 0.5 / 1.5, max_relative = 1e-12);
        assert!(d.d.norm() < 1e-15);
    }

    #[test]
    fn p_coefficients_follow_denominator_sign() {
        // Pure squeezed vacuum: denominator -sinh^2 r < 0, so the
        // P-representation does not normalize but the coefficients are
        // still finite values for the singularity analysis.
        let s = GaussianStateParams::squeezed_vacuum(0.5).unwrap();
        let ch = ChannelParams::symmetric(0.0, 0.0, 0.0).unwrap();
        let d = coefficients_at(&s, &ch, 0.0).unwrap();
        assert!(!d.p_normalizable());
        let p = d.p.expect("denominator is nonzero here");
        assert_relative_eq!(p.e1, -1.0, max_relative = 1e-12);
        assert_relative_eq!(p.f.re, -1.0 / 0.5f64.tanh(), max_relative = 1e-12);

        // Well-thermalized state: denominator positive, normalizable.
        let ch = ChannelParams::symmetric(1.0, 0.2, 1.0).unwrap();
        let d = coefficients_at(&s, &ch, 50.0).unwrap();
        assert!(d.p_normalizable());
        let p = d.p.unwrap();
        assert!(p.e1 > 0.0 && p.e2 > 0.0 && p.c > 0.0);
    }

    #[test]
    fn swap_modes_is_an_involution_and_swaps_channels() {
        let s = GaussianStateParams::explicit(0.9, 1.4, Complex64::new(0.55, 0.1)).unwrap();
        let ch = ChannelParams::new([0.5, 0.1], [0.3, 0.2], [0.0, 0.7]).unwrap();
        let d = coefficients_at(&s, &ch, 0.8).unwrap();
        let sw = d.swap_modes();
        assert_eq!(sw.a1, d.a2);
        assert_eq!(sw.c2, d.c1);
        assert_eq!(sw.swap_modes(), d);
    }
}
