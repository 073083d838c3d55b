//! Single-point summary of a model: spectrum, response strengths, QFI and bounds.

use serde_json::{json, Value};

use epsense::qfi;
use epsense::spectral::{self, PointKind, SpectralError};

use crate::params::Selection;
use crate::CliError;

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// QFI values carry a `_gamma2` suffix or are bounds; both are multiplied by γ².
pub fn report(sel: &Selection, omega: f64) -> Result<Value, CliError> {
    let (m, pert) = sel.params.build()?;
    let g2 = sel.gamma * sel.gamma;
    let h = m.effective_hamiltonian();
    let eigenvalues = h.eig().map_err(SpectralError::from).map_err(qfi::QfiError::from)?.values;

    let (i_max, optimal_input) = qfi::qfi_max(&m, &pert, omega)?;
    let i_avg = qfi::qfi_avg(&m, &pert, omega)?;
    let i_mod = qfi::decay_modified_qfi(&m, &pert, omega)?;
    let (i_reduced, ldos) = match pert.localized_site() {
        Some(site) => {
            let ch = m.observed_channels()[0];
            (
                json!(g2 * qfi::reduced_qfi(&m, &pert, omega, ch, ch)?),
                json!(spectral::ldos(&m, site, omega, false)?.rho),
            )
        }
        None => (Value::Null, Value::Null),
    };

    let mut doc = json!({
        "model": sel.params,
        "reference_gamma": sel.gamma,
        "omega": omega,
        "eigenvalues": eigenvalues.iter().map(|w| json!([w.re, w.im])).collect::<Vec<_>>(),
        "decay_rates": eigenvalues.iter().map(|w| -w.im).collect::<Vec<_>>(),
        "i_max": i_max,
        "i_max_gamma2": g2 * i_max,
        "i_avg_gamma2": g2 * i_avg,
        "i_reduced_gamma2": i_reduced,
        "i_mod": i_mod,
        "ldos": ldos,
        "cramer_rao_single_trial": finite(qfi::cramer_rao(1, i_max)),
        "optimal_input": optimal_input.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
    });

    let fields = match spectral::kato_decompose_default(&h) {
        Ok(k) => {
            let l = k.nearest_cluster(omega);
            let c = &k.clusters()[l];
            let xi = spectral::spectral_response_strength(&k, l)?;
            let order = c.nilpotent_index;
            let passive = spectral::passive_xi_bound(c.decay_rate(), order.max(2));
            let clusters: Vec<Value> = k
                .clusters()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "omega": [c.omega.re, c.omega.im],
                        "order": c.order,
                        "nilpotent_index": c.nilpotent_index,
                        "kind": c.kind,
                        "xi": finite(spectral::spectral_response_strength(&k, i).unwrap_or(f64::NAN)),
                    })
                })
                .collect();
            json!({
                "clusters": clusters,
                "nearest_cluster": l,
                "kind": c.kind,
                "xi": xi,
                "petermann": if c.kind == PointKind::Isolated { json!(c.petermann()) } else { Value::Null },
                "bound_localized": finite(g2 * spectral::qfi_bound_localized(&k, l, omega)?),
                "bound_general": finite(g2 * spectral::qfi_bound_general(&m, &pert, &k, l, omega)?),
                "enhancement_factor": if c.kind == PointKind::Exceptional {
                    finite(spectral::enhancement_factor(xi, c.decay_rate(), order))
                } else {
                    Value::Null
                },
                "passive_bound": passive,
            })
        }
        Err(SpectralError::IllConditioned { gap, threshold }) => json!({
            "clusters": Value::Null,
            "spectrum_warning": format!("eigenvalues too close to classify (gap {gap:e}, threshold {threshold:e})"),
        }),
        Err(e) => return Err(qfi::QfiError::from(e).into()),
    };
    if let (Value::Object(d), Value::Object(f)) = (&mut doc, fields) {
        d.extend(f);
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::params::model_from_config;

    fn run(text: &str) -> Value {
        let sel = model_from_config(&Config::parse(text).unwrap()).unwrap();
        report(&sel, 0.0).unwrap()
    }

    fn close(v: &Value, x: f64) -> bool {
        (v.as_f64().unwrap() - x).abs() <= 1e-9 * x.abs()
    }

    #[test]
    fn two_ring_ep_report() {
        let r = run("model = two-ring\ngamma = 1\nv = 0.25");
        assert!(close(&r["i_max_gamma2"], 1024.0));
        assert!(close(&r["xi"], 0.5));
        assert!(close(&r["bound_localized"], 1024.0));
        assert!(close(&r["bound_general"], 16384.0));
        assert!(close(&r["enhancement_factor"], 4.0));
        assert_eq!(r["kind"], "exceptional");
        assert!(r["petermann"].is_null());
    }

    #[test]
    fn reference_models() {
        assert!(close(&run("model = single-ring\ngamma_wg = 0.5")["i_max_gamma2"], 256.0));
        let r = run("model = mirror-ring\ngamma = 1\nrho = 0");
        assert!(close(&r["i_max_gamma2"], 64.0));
        assert_eq!(r["kind"], "diabolic");
        assert!(r["i_reduced_gamma2"].is_null());
    }
}
