//! One function per subcommand. Each returns a `Report` whose `params`
//! map echoes every numeric it consumed, so any output file or JSON
//! document doubles as a reproduction recipe.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use cv_damp_core::chi::{evolve_chi_general_tol, evolved_gaussian_chi_tol, GaussianChi};
use cv_damp_core::fock::{integrate_master, oracle_measures, tmsv_fock};
use cv_damp_core::params::{coefficients_at, evolve_params};
use cv_damp_core::separability::{classify, crossing_times_with_tol, margins};
use cv_damp_core::{density, ppt, prover};

use crate::config::Resolved;
use crate::CliError;

pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub result: Value,
}

impl Report {
    pub fn render(&self, json: bool) -> String {
        if json {
            let doc = json!({
                "command": self.command,
                "params": Value::Object(self.params.clone()),
                "result": self.result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            return s;
        }
        let mut out = format!("# cv-damp v{}\n# command = {}\n", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in &self.params {
            out.push_str(&format!("# {k} = {}\n", plain(v)));
        }
        flatten("", &self.result, &mut out);
        out
    }
}

/// Scalar rendering shared by text mode and CSV headers: JSON for
/// structure, bare token for scalars.
fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&path, val, out);
            }
        }
        Value::Array(items) => {
            for (i, val) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), val, out);
            }
        }
        other => {
            out.push_str(&format!("{prefix} = {}\n", plain(other)));
        }
    }
}

fn base_params(r: &Resolved, extra: &[(&str, Value)]) -> Map<String, Value> {
    let mut m = r.metadata();
    for (k, v) in extra {
        m.insert((*k).into(), v.clone());
    }
    m
}

pub fn chi(r: &Resolved, mu: [f64; 4], route: &str) -> Result<Report, CliError> {
    let state = r.state()?;
    let ch = r.channel()?;
    let mu1 = Complex64::new(mu[0], mu[1]);
    let mu2 = Complex64::new(mu[2], mu[3]);
    let value = match route {
        "series" => {
            let e = evolve_params(&state, &ch, r.t)?;
            json!({ "chi": evolved_gaussian_chi_tol(&e, mu1, mu2, r.eps_series)? })
        }
        "quadrature" => {
            let chi0 = GaussianChi { state };
            let v = evolve_chi_general_tol(&chi0, &ch, r.t, mu1, mu2, r.eps_series)?;
            json!({ "chi": v.re, "chi_im": v.im })
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown route {other:?}; expected series or quadrature"
            )))
        }
    };
    Ok(Report {
        command: "chi",
        params: base_params(
            r,
            &[
                ("t", json!(r.t)),
                ("mu1_re", json!(mu[0])),
                ("mu1_im", json!(mu[1])),
                ("mu2_re", json!(mu[2])),
                ("mu2_im", json!(mu[3])),
                ("route", json!(route)),
            ],
        ),
        result: value,
    })
}

pub fn spectrum(r: &Resolved, block: &str, m: usize, size: usize) -> Result<Report, CliError> {
    let d = coefficients_at(&r.state()?, &r.channel()?, r.t)?;
    let (eigs, extra) = match block {
        "pt" => (ppt::block_eigenvalues(&d, m)?, vec![("block", json!("pt")), ("m", json!(m))]),
        "state" => (
            density::block_eigenvalues(&d, m, size)?,
            vec![("block", json!("state")), ("m", json!(m)), ("size", json!(size))],
        ),
        other => {
            return Err(CliError::Usage(format!(
                "unknown block {other:?}; expected pt or state"
            )))
        }
    };
    let mut extras = extra;
    extras.push(("t", json!(r.t)));
    Ok(Report {
        command: "spectrum",
        params: base_params(r, &extras),
        result: json!({ "eigenvalues": eigs }),
    })
}

pub fn negativity(r: &Resolved) -> Result<Report, CliError> {
    let d = coefficients_at(&r.state()?, &r.channel()?, r.t)?;
    let n = ppt::negativity(&d, r.eps_trace)?;
    Ok(Report {
        command: "negativity",
        params: base_params(r, &[("t", json!(r.t))]),
        result: json!({
            "negativity": n.negativity,
            "log_negativity": n.log_negativity,
            "blocks_used": n.blocks_used,
            "trace_accumulated": n.trace_accumulated,
            "tail_bound": n.tail_bound,
        }),
    })
}

pub fn log_negativity(r: &Resolved) -> Result<Report, CliError> {
    let d = coefficients_at(&r.state()?, &r.channel()?, r.t)?;
    let n = ppt::negativity(&d, r.eps_trace)?;
    Ok(Report {
        command: "ln",
        params: base_params(r, &[("t", json!(r.t))]),
        result: json!({ "log_negativity": n.log_negativity, "blocks_used": n.blocks_used }),
    })
}

pub fn entropy(r: &Resolved) -> Result<Report, CliError> {
    let d = coefficients_at(&r.state()?, &r.channel()?, r.t)?;
    let e = density::entropy(&d, r.eps_trace)?;
    Ok(Report {
        command: "entropy",
        params: base_params(r, &[("t", json!(r.t))]),
        result: json!({
            "entropy": e.entropy,
            "blocks_used": e.blocks_used,
            "trace_accumulated": e.trace_accumulated,
        }),
    })
}

pub fn coherent_info(r: &Resolved) -> Result<Report, CliError> {
    let d = coefficients_at(&r.state()?, &r.channel()?, r.t)?;
    let (i1, i2) = density::coherent_info(&d, r.eps_trace)?;
    Ok(Report {
        command: "coherent-info",
        params: base_params(r, &[("t", json!(r.t))]),
        result: json!({ "coherent_info_1": i1, "coherent_info_2": i2 }),
    })
}

pub fn classify_cmd(r: &Resolved) -> Result<Report, CliError> {
    let d = coefficients_at(&r.state()?, &r.channel()?, r.t)?;
    let v = classify(&d)?;
    Ok(Report {
        command: "classify",
        params: base_params(r, &[("t", json!(r.t))]),
        result: json!({
            "region": v.region.to_string(),
            "margins": {
                "simon": v.margins.simon,
                "ppt": v.margins.ppt,
                "sep": v.margins.sep,
            },
        }),
    })
}

pub fn crossings(r: &Resolved) -> Result<Report, CliError> {
    let ct = crossing_times_with_tol(&r.state()?, &r.channel()?, r.t_max, r.grid, r.root_tol)?;
    Ok(Report {
        command: "crossings",
        params: base_params(r, &[("t_max", json!(r.t_max)), ("grid", json!(r.grid))]),
        result: json!({
            "t0": ct.t0,
            "t1": ct.t1,
            "t2": ct.t2,
            "t3": ct.t3,
            "roots_coherent_info": ct.all_roots[0],
            "roots_simon": ct.all_roots[1],
            "roots_ppt": ct.all_roots[2],
            "roots_sep": ct.all_roots[3],
        }),
    })
}

/// The CSV body for `curves`: margins, log-negativity, and the larger
/// coherent information at each grid point.
pub fn curves_csv(r: &Resolved) -> Result<String, CliError> {
    let state = r.state()?;
    let ch = r.channel()?;
    let mut out = format!("# cv-damp v{}\n# command = curves\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in base_params(r, &[("t_max", json!(r.t_max)), ("steps", json!(r.steps))]) {
        out.push_str(&format!("# {k} = {}\n", plain(&v)));
    }
    out.push_str("t,m_simon,m_ppt,m_sep,LN,CI\n");
    for i in 0..=r.steps {
        let t = r.t_max * i as f64 / r.steps as f64;
        let d = coefficients_at(&state, &ch, t)?;
        let m = margins(&d)?;
        let ln = ppt::negativity(&d, r.eps_trace)?.log_negativity;
        let (i1, i2) = density::coherent_info(&d, r.eps_trace)?;
        let ci = i1.max(i2);
        out.push_str(&format!("{t},{},{},{},{ln},{ci}\n", m.simon, m.ppt, m.sep));
    }
    Ok(out)
}

pub fn curves(r: &Resolved, out_path: Option<&Path>) -> Result<Option<Report>, CliError> {
    let csv = curves_csv(r)?;
    match out_path {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            f.write_all(csv.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(Some(Report {
                command: "curves",
                params: base_params(
                    r,
                    &[
                        ("t_max", json!(r.t_max)),
                        ("steps", json!(r.steps)),
                        ("out", json!(path.display().to_string())),
                    ],
                ),
                result: json!({ "rows": r.steps + 1 }),
            }))
        }
        None => {
            print!("{csv}");
            Ok(None)
        }
    }
}

pub fn prove_det(m_max: usize, json_mode: bool) -> Result<Report, CliError> {
    let reports = prover::verify_range(m_max);
    let mut rows = Vec::new();
    let mut falsified = Vec::new();
    for rep in &reports {
        if let Some(v) = &rep.violation {
            falsified.push(format!("m = {}, j = {}: {v}", rep.m, rep.j));
        }
        rows.push(json!({
            "m": rep.m,
            "j": rep.j,
            "p": rep.p,
            "cofactor_multiplicity": rep.cofactor_multiplicity,
            "residual_coeffs_nonneg": rep.residual_coeffs_nonneg,
            "max_coeff_bits": rep.max_coeff_bits,
            "wall_us": rep.wall.as_micros() as u64,
            "violation": rep.violation,
        }));
    }
    if !falsified.is_empty() {
        // Print what was found before signalling: a falsification is
        // the one result that must never be swallowed by an exit code.
        let doc = Report {
            command: "prove-det",
            params: Map::from_iter([("m_max".to_string(), json!(m_max))]),
            result: json!({ "minors": rows, "falsified": falsified.clone() }),
        };
        print!("{}", doc.render(json_mode));
        return Err(CliError::Falsified(falsified.join("; ")));
    }
    Ok(Report {
        command: "prove-det",
        params: Map::from_iter([("m_max".to_string(), json!(m_max))]),
        result: json!({
            "minors": rows,
            "verified": reports.len(),
            "statement": "every principal minor is d^-p (d-1)^(j(j+1)/2) P(d) with P coefficients >= 0",
        }),
    })
}

pub fn oracle(r: &Resolved) -> Result<Report, CliError> {
    if r.preset != "squeezed_vacuum" {
        return Err(CliError::Usage(
            "the Fock oracle starts from the squeezed vacuum; use --preset squeezed_vacuum".into(),
        ));
    }
    let ch = r.channel()?;
    let initial = tmsv_fock(r.r, r.cutoff)?;
    let evolved = integrate_master(&initial, &ch, r.t, r.dt_max)?;
    let m = oracle_measures(&evolved)?;
    Ok(Report {
        command: "oracle",
        params: base_params(
            r,
            &[
                ("t", json!(r.t)),
                ("cutoff", json!(r.cutoff)),
                ("dt_max", json!(r.dt_max)),
            ],
        ),
        result: json!({
            "negativity": m.negativity,
            "log_negativity": m.log_negativity,
            "entropy": m.entropy,
            "reduced_entropy_1": m.reduced_entropy[0],
            "reduced_entropy_2": m.reduced_entropy[1],
            "coherent_info_1": m.coherent_info[0],
            "coherent_info_2": m.coherent_info[1],
            "trace": evolved.trace(),
            "boundary_population": evolved.boundary_population(),
            "truncation_deficit": evolved.truncation_deficit,
        }),
    })
}
