//! Separability classification and the P-representation analysis.
//!
//! Three nested criteria order the time axis. With `A_i`, `B`, `C_i`,
//! `D` the derived coefficients and `gbt` the phase-diffusion weight,
//!
//! ```text
//! m_simon = sqrt((A1-1)(A2-1)) - |B| e^{-gbt}   second-moment witness
//! m_ppt   = sqrt(C1 C2) - |D| e^{-gbt}          exact partial transpose
//! m_sep   = sqrt(C1 C2) - |D|                   explicit P-representation
//! ```
//!
//! A negative `m_ppt` certifies entanglement; a non-negative `m_sep`
//! certifies separability through a positive normalizable P-function;
//! the window in between is undecided. `m_sep <= m_ppt` always, and the
//! zero crossings come ordered `t1 <= t2 <= t3` on monotone families.
//! The P-function itself is a Gaussian in `|alpha_i|` times a phase
//! series with the same `e^{-gbt k^2}` suppression that appears in
//! every spectral formula here.

use crate::density::entropy_gaps;
use crate::error::{Error, Result};
use crate::par;
use crate::params::{coefficients_at, ChannelParams, DerivedCoefficients, GaussianStateParams};

/// Coefficients this far below zero are treated as unphysical rather
/// than as rounding residue.
const C_NEG_TOL: f64 = 1e-12;

/// Relative width at which bisection stops.
const ROOT_TOL: f64 = 1e-10;

/// Truncation ceiling shared by the P-function and g(z) series.
const MAX_TERMS: usize = 10_000;

/// Entropy truncation used for the coherent-information curve.
const CI_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    NptEntangled,
    PptUndecided,
    Separable,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::NptEntangled => "NPT_ENTANGLED",
            Region::PptUndecided => "PPT_UNDECIDED",
            Region::Separable => "SEPARABLE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub simon: f64,
    pub ppt: f64,
    pub sep: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityVerdict {
    pub region: Region,
    pub margins: Margins,
}

/// The three criterion margins at one set of coefficients.
pub fn margins(d: &DerivedCoefficients) -> Result<Margins> {
    if d.c1.min(d.c2) < -C_NEG_TOL {
        return Err(Error::InvalidArgument(format!(
            "criteria need C1, C2 >= 0; got C1 = {}, C2 = {}",
            d.c1, d.c2
        )));
    }
    let root_c = (d.c1.max(0.0) * d.c2.max(0.0)).sqrt();
    let damp = (-d.gbt).exp();
    let witness = ((d.a1 - 1.0).max(0.0) * (d.a2 - 1.0).max(0.0)).sqrt();
    Ok(Margins {
        simon: witness - d.b.norm() * damp,
        ppt: root_c - d.d_abs() * damp,
        sep: root_c - d.d_abs(),
    })
}

/// Region assignment from the margin signs.
pub fn classify(d: &DerivedCoefficients) -> Result<SeparabilityVerdict> {
    let m = margins(d)?;
    let region = if m.sep >= 0.0 {
        Region::Separable
    } else if m.ppt >= 0.0 {
        Region::PptUndecided
    } else {
        Region::NptEntangled
    };
    Ok(SeparabilityVerdict { region, margins: m })
}

/// First zero of each criterion curve, plus every bracketed root.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrossingTimes {
    /// Coherent information turns zero.
    pub t0: Option<f64>,
    /// Second-moment witness margin turns zero.
    pub t1: Option<f64>,
    /// Partial-transpose margin turns zero.
    pub t2: Option<f64>,
    /// Separability margin turns zero.
    pub t3: Option<f64>,
    /// All grid-bracketed roots per curve, in the order above.
    pub all_roots: [Vec<f64>; 4],
}

/// Scans the four curves on a uniform grid over `[0, t_max]` and
/// bisects every strict sign change to relative width 1e-10. Curves
/// that never change sign leave their field empty.
pub fn crossing_times(
    p: &GaussianStateParams,
    ch: &ChannelParams,
    t_max: f64,
    grid: usize,
) -> Result<CrossingTimes> {
    crossing_times_with_tol(p, ch, t_max, grid, ROOT_TOL)
}

/// Same scan with an explicit relative root width.
pub fn crossing_times_with_tol(
    p: &GaussianStateParams,
    ch: &ChannelParams,
    t_max: f64,
    grid: usize,
    tol: f64,
) -> Result<CrossingTimes> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("need t_max > 0, got {t_max}")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("need grid >= 2, got {grid}")));
    }
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "root tolerance must lie in (0,1), got {tol}"
        )));
    }
    let ts: Vec<f64> = (0..=grid).map(|i| t_max * i as f64 / grid as f64).collect();
    // The margin curves are cheap; the coherent-information curve pays
    // for an entropy sum per point, so the grid sweep fans out.
    let rows: Vec<Result<[f64; 4]>> = par::map_items(ts.clone(), |t| {
        let d = coefficients_at(p, ch, t)?;
        let m = margins(&d)?;
        let (g1, g2) = entropy_gaps(&d, CI_EPS)?;
        Ok([g1.max(g2), m.simon, m.ppt, m.sep])
    });
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        values.push(row?);
    }

    let mut out = CrossingTimes::default();
    // `curve` picks both a column of `values` and a closure arm, so an
    // index loop is the clear shape here.
    #[allow(clippy::needless_range_loop)]
    for curve in 0..4 {
        let f = |t: f64| -> Result<f64> {
            let d = coefficients_at(p, ch, t)?;
            Ok(match curve {
                0 => {
                    let (g1, g2) = entropy_gaps(&d, CI_EPS)?;
                    g1.max(g2)
                }
                1 => margins(&d)?.simon,
                2 => margins(&d)?.ppt,
                _ => margins(&d)?.sep,
            })
        };
        let mut roots = Vec::new();
        for i in 0..grid {
            let (fa, fb) = (values[i][curve], values[i + 1][curve]);
            if fa == 0.0 {
                // A grid zero counts only when the curve actually
                // changes sign around it; margins that sit at zero
                // (vacuum input) are not crossings.
                if i > 0 && values[i - 1][curve] * fb < 0.0 {
                    roots.push(ts[i]);
                }
                continue;
            }
            if fa * fb < 0.0 {
                roots.push(bisect(&f, ts[i], ts[i + 1], fa, tol)?);
            }
        }
        let first = roots.first().copied();
        out.all_roots[curve] = roots;
        match curve {
            0 => out.t0 = first,
            1 => out.t1 = first,
            2 => out.t2 = first,
            _ => out.t3 = first,
        }
    }
    Ok(out)
}

fn bisect(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, fa: f64, tol: f64) -> Result<f64> {
    let sa = fa.signum();
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= tol * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// P-representation density at radii `r1, r2` and relative phase `phi`.
/// The double series pairs `l` with `n - l`, so the value is real; the
/// complex residue is checked anyway.
pub fn p_function(d: &DerivedCoefficients, r1: f64, r2: f64, phi: f64, eps: f64) -> Result<f64> {
    let p = d.p.as_ref().ok_or_else(|| {
        Error::UnsupportedRegime("P-representation coefficients are undefined at H = 0".into())
    })?;
    if !(r1 >= 0.0 && r2 >= 0.0) {
        return Err(Error::InvalidArgument("radii must be non-negative".into()));
    }
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation eps must lie in (0,1), got {eps}"
        )));
    }
    let x = p.f.norm() * r1 * r2;
    let mut re = 1.0f64; // n = 0 phase sum is 1
    let mut im = 0.0f64;
    let mut coef = 1.0f64; // x^n / n!
    let mut bound = 1.0f64; // (2x)^n / n!, majorizes |coef * phase sum|
    let mut done = x == 0.0;
    for n in 1..=MAX_TERMS {
        if done {
            break;
        }
        coef *= x / n as f64;
        bound *= 2.0 * x / n as f64;
        // sum_l C(n,l) exp[-gbt (2l-n)^2 + i (2l-n) phi]
        let mut binom = 1.0f64;
        let (mut s_re, mut s_im) = (0.0f64, 0.0f64);
        for l in 0..=n {
            let k = (2 * l) as f64 - n as f64;
            let w = binom * (-d.gbt * k * k).exp();
            s_re += w * (k * phi).cos();
            s_im += w * (k * phi).sin();
            binom *= (n - l) as f64 / (l + 1) as f64;
        }
        re += coef * s_re;
        im += coef * s_im;
        // Once past the series peak the majorant decays geometrically.
        done = n as f64 >= 2.0 * x && bound < eps * re.abs().max(1e-300);
    }
    if !done {
        return Err(Error::Truncation(format!(
            "P-function series needed more than {MAX_TERMS} terms at |F| r1 r2 = {x}"
        )));
    }
    let envelope = (-p.e2 * r1 * r1 - p.e1 * r2 * r2).exp();
    let value_im = p.c * envelope * im;
    if value_im.abs() > 1e-12 {
        return Err(Error::Numerical(format!(
            "P-function imaginary residue {value_im:.3e} exceeds 1e-12"
        )));
    }
    Ok(p.c * envelope * re)
}

/// Singularity of the P-representation: true when `sqrt(E1 E2) < |F|`,
/// which coincides with `m_sep < 0`. The pure-state boundary
/// `C1 C2 = 0` with `|D| > 0` has no distribution in this class at all.
pub fn p_singular(d: &DerivedCoefficients) -> Result<bool> {
    let p = d.p.as_ref().ok_or_else(|| {
        Error::UnsupportedRegime("P-representation coefficients are undefined at H = 0".into())
    })?;
    if d.c1.max(0.0) * d.c2.max(0.0) < 1e-12 && d.d_abs() > 1e-12 {
        return Err(Error::UnsupportedRegime(
            "P-representation analysis degenerates on the pure-state boundary C1 C2 = 0".into(),
        ));
    }
    let singular = (p.e1 * p.e2).max(0.0).sqrt() < p.f.norm();
    // Same sign as the separability margin by the determinant identity
    // E1 E2 - |F|^2 = 1/H = G / (H G).
    let m = margins(d)?;
    debug_assert!(
        singular == (m.sep < 0.0) || m.sep.abs() < 1e-9,
        "singularity flag disagrees with m_sep = {}",
        m.sep
    );
    Ok(singular)
}

/// `g(z) = sum_n (z/2)^n / n! sum_l C(n,l) e^{-gbt (2l-n)^2}`, the
/// envelope that controls P-function normalizability. Bounded by `e^z`
/// and logarithmically asymptotic to it.
pub fn g_function(z: f64, gbt: f64, eps: f64) -> Result<f64> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidArgument(format!("need z >= 0, got {z}")));
    }
    if !(gbt.is_finite() && gbt >= 0.0) {
        return Err(Error::InvalidArgument(format!("need gbt >= 0, got {gbt}")));
    }
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation eps must lie in (0,1), got {eps}"
        )));
    }
    let mut acc = 1.0f64;
    let mut coef = 1.0f64;
    for n in 1..=MAX_TERMS {
        coef *= z / (2 * n) as f64;
        let mut binom = 1.0f64;
        let mut inner = 0.0f64;
        for l in 0..=n {
            let k = (2 * l) as f64 - n as f64;
            inner += binom * (-gbt * k * k).exp();
            binom *= (n - l) as f64 / (l + 1) as f64;
        }
        let term = coef * inner;
        acc += term;
        // inner <= 2^n caps the tail by the exponential series for z.
        if term < eps * acc && n as f64 > z {
            return Ok(acc);
        }
    }
    Err(Error::Truncation(format!(
        "g(z) series needed more than {MAX_TERMS} terms at z = {z}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn figure_state() -> (GaussianStateParams, ChannelParams) {
        (
            GaussianStateParams::squeezed_vacuum(0.5).unwrap(),
            ChannelParams::symmetric(0.5, 0.5, 0.5).unwrap(),
        )
    }

    #[test]
    fn damped_squeezed_vacuum_stays_npt_without_thermal_noise() {
        let st = GaussianStateParams::squeezed_vacuum(0.7).unwrap();
        let ch = ChannelParams::new([0.0, 0.0], [0.4, 0.4], [0.0, 0.0]).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let d = coefficients_at(&st, &ch, t).unwrap();
            let v = classify(&d).unwrap();
            assert_eq!(v.region, Region::NptEntangled, "t = {t}");
            assert!(v.margins.ppt < 0.0);
        }
    }

    #[test]
    fn thermal_states_are_separable() {
        let st = GaussianStateParams::squeezed_thermal(0.0, 0.8).unwrap();
        let ch = ChannelParams::symmetric(0.3, 0.2, 0.4).unwrap();
        let d = coefficients_at(&st, &ch, 0.5).unwrap();
        let v = classify(&d).unwrap();
        assert_eq!(v.region, Region::Separable);
        assert_eq!(d.d_abs(), 0.0);
    }

    #[test]
    fn margins_are_ordered_and_consistent() {
        let (st, ch) = figure_state();
        for t in [0.05, 0.3, 0.9, 2.0] {
            let d = coefficients_at(&st, &ch, t).unwrap();
            let m = margins(&d).unwrap();
            assert!(m.sep <= m.ppt + 1e-15);
            // PPT already positive forces the weaker witness positive.
            if m.ppt >= 0.0 {
                assert!(m.simon >= 0.0);
            }
        }
    }

    #[test]
    fn one_negative_c_coefficient_is_rejected() {
        let st = GaussianStateParams::explicit(1.0, 0.5, num_complex::Complex64::new(0.5, 0.0))
            .unwrap();
        let ch = ChannelParams::symmetric(0.0, 0.0, 0.0).unwrap();
        let d = coefficients_at(&st, &ch, 0.0).unwrap();
        assert!(d.c1.min(d.c2) < -1e-3, "corner case no longer exercises C < 0");
        assert!(matches!(margins(&d), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn figure_crossings_are_ordered_with_gaps() {
        let (st, ch) = figure_state();
        let ct = crossing_times(&st, &ch, 3.0, 96).unwrap();
        let (t0, t1, t2, t3) = (
            ct.t0.expect("coherent info crossing"),
            ct.t1.expect("witness crossing"),
            ct.t2.expect("ppt crossing"),
            ct.t3.expect("separability crossing"),
        );
        assert!(t0 < t1, "t0 = {t0}, t1 = {t1}");
        assert!(t1 < t2 && t2 < t3, "t1 = {t1}, t2 = {t2}, t3 = {t3}");
        // The verdict flips exactly across the roots.
        let mid = 0.5 * (t2 + t3);
        let d = coefficients_at(&st, &ch, mid).unwrap();
        assert_eq!(classify(&d).unwrap().region, Region::PptUndecided);
        let d = coefficients_at(&st, &ch, 0.5 * t1).unwrap();
        assert_eq!(classify(&d).unwrap().region, Region::NptEntangled);
        let d = coefficients_at(&st, &ch, t3 + 0.3).unwrap();
        assert_eq!(classify(&d).unwrap().region, Region::Separable);
    }

    #[test]
    fn no_phase_damping_collapses_the_three_roots() {
        let st = GaussianStateParams::squeezed_vacuum(0.5).unwrap();
        let ch = ChannelParams::new([0.5, 0.5], [0.0, 0.0], [0.5, 0.5]).unwrap();
        let ct = crossing_times(&st, &ch, 3.0, 64).unwrap();
        let (t1, t2, t3) = (ct.t1.unwrap(), ct.t2.unwrap(), ct.t3.unwrap());
        assert!((t1 - t2).abs() < 1e-9 && (t2 - t3).abs() < 1e-9);
    }

    #[test]
    fn unsqueezed_input_never_crosses() {
        let st = GaussianStateParams::squeezed_vacuum(0.0).unwrap();
        let ch = ChannelParams::symmetric(0.5, 0.5, 0.5).unwrap();
        let ct = crossing_times(&st, &ch, 3.0, 48).unwrap();
        assert!(ct.t1.is_none() && ct.t2.is_none() && ct.t3.is_none());
    }

    #[test]
    fn p_function_closed_forms() {
        let st = GaussianStateParams::squeezed_thermal(0.2, 0.6).unwrap();
        let ch = ChannelParams::symmetric(0.4, 0.5, 0.3).unwrap();
        let d = coefficients_at(&st, &ch, 1.2).unwrap();
        let p = d.p.as_ref().unwrap();
        // Origin value is the prefactor alone.
        assert_relative_eq!(
            p_function(&d, 0.0, 0.0, 1.3, 1e-14).unwrap(),
            p.c,
            max_relative = 1e-14
        );
        // Without dephasing the phase series is a plain exponential.
        let ch0 = ChannelParams::new([0.4, 0.4], [0.0, 0.0], [0.3, 0.3]).unwrap();
        let d0 = coefficients_at(&st, &ch0, 1.2).unwrap();
        let q = d0.p.as_ref().unwrap();
        let (r1, r2, phi) = (0.7f64, 0.4f64, 0.9f64);
        let want = q.c
            * (-q.e2 * r1 * r1 - q.e1 * r2 * r2 + 2.0 * q.f.norm() * r1 * r2 * phi.cos()).exp();
        assert_relative_eq!(
            p_function(&d0, r1, r2, phi, 1e-14).unwrap(),
            want,
            max_relative = 1e-11
        );
    }

    #[test]
    fn p_function_is_nonnegative_in_the_separable_regime() {
        let (st, ch) = figure_state();
        let ct = crossing_times(&st, &ch, 3.0, 64).unwrap();
        let t = ct.t3.unwrap() + 0.4;
        let d = coefficients_at(&st, &ch, t).unwrap();
        assert!(!p_singular(&d).unwrap());
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..6 {
                    let v = p_function(
                        &d,
                        0.35 * i as f64,
                        0.35 * j as f64,
                        std::f64::consts::PI * k as f64 / 3.0,
                        1e-12,
                    )
                    .unwrap();
                    assert!(v >= -1e-12, "P({i},{j},{k}) = {v}");
                }
            }
        }
    }

    #[test]
    fn singularity_flips_at_the_separability_root() {
        let (st, ch) = figure_state();
        let ct = crossing_times(&st, &ch, 3.0, 64).unwrap();
        let t3 = ct.t3.unwrap();
        let below = coefficients_at(&st, &ch, t3 - 1e-4).unwrap();
        let above = coefficients_at(&st, &ch, t3 + 1e-4).unwrap();
        assert!(p_singular(&below).unwrap());
        assert!(!p_singular(&above).unwrap());
    }

    #[test]
    fn squeezed_vacuum_boundary_is_out_of_scope_for_singularity() {
        let st = GaussianStateParams::squeezed_vacuum(0.5).unwrap();
        let ch = ChannelParams::symmetric(0.0, 0.5, 0.0).unwrap();
        let d = coefficients_at(&st, &ch, 0.0).unwrap();
        assert!(matches!(p_singular(&d), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn g_series_respects_the_exponential_bound() {
        assert_relative_eq!(g_function(0.0, 0.25, 1e-12).unwrap(), 1.0);
        for &z in &[0.5, 3.0, 12.0, 50.0] {
            let g = g_function(z, 0.25, 1e-12).unwrap();
            assert!(g <= z.exp(), "g({z}) = {g} exceeds e^z");
            assert!(g >= 1.0);
        }
        let g50 = g_function(50.0, 0.25, 1e-12).unwrap();
        let ratio = g50.ln() / 50.0;
        assert!((0.9..1.0).contains(&ratio), "ln g(50)/50 = {ratio}");
        // gbt = 0 collapses to the exponential series exactly.
        assert_relative_eq!(g_function(7.0, 0.0, 1e-13).unwrap(), 7f64.exp(), max_relative = 1e-11);
    }

    #[test]
    fn region_is_monotone_along_the_figure_trajectory() {
        let (st, ch) = figure_state();
        let mut best = 0u8;
        for i in 0..120 {
            let t = 3.0 * i as f64 / 120.0;
            let d = coefficients_at(&st, &ch, t).unwrap();
            let rank = match classify(&d).unwrap().region {
                Region::NptEntangled => 0,
                Region::PptUndecided => 1,
                Region::Separable => 2,
            };
            assert!(rank >= best, "region regressed at t = {t}");
            best = best.max(rank);
        }
    }
}
