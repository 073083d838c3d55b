//! Data behind the published figures, all at γ = 1 and on resonance.

use rayon::prelude::*;

use epsense::model::ModelParams;
use epsense::numerics::C64;
use epsense::qfi;
use epsense::spectral::{self, PointKind};

use crate::table::{Cell, SweepResult};
use crate::CliError;

pub const FIGURES: [&str; 6] = ["fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6"];

/// Internal loss at which the optimal coupling reaches the EP, `(√2 − 1)γ/2`.
pub fn kappa_critical(gamma: f64) -> f64 {
    (2f64.sqrt() - 1.0) * gamma / 2.0
}

/// `|V|_opt = √((γ + κ)κ/4)`.
pub fn v_optimal(gamma: f64, kappa: f64) -> f64 {
    ((gamma + kappa) * kappa / 4.0).sqrt()
}

fn two_ring(gamma: f64, v: f64, kappa: f64) -> ModelParams {
    ModelParams::TwoRing { gamma, v: C64::new(v, 0.0), kappa }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn with_points(mut grid: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    grid.extend_from_slice(extra);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

fn reduced(params: ModelParams) -> Result<f64, CliError> {
    let (m, p) = params.build()?;
    Ok(qfi::reduced_qfi(&m, &p, 0.0, 0, 0)?)
}

fn table(header: &[&str], rows: Vec<Result<Vec<Cell>, CliError>>, figure: &str) -> Result<SweepResult, CliError> {
    let mut t = SweepResult::new(header.iter().map(|s| s.to_string()).collect());
    t.meta("figure", figure);
    t.meta("gamma", "1");
    t.meta("omega", "0 (resonance)");
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

pub fn figure(id: &str) -> Result<SweepResult, CliError> {
    match id {
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4a" => fig4a(),
        "fig4b" => fig4b(),
        "fig5" => fig5(),
        "fig6" => fig6(),
        other => Err(CliError::Usage(format!(
            "unknown figure `{other}` (expected one of {})",
            FIGURES.join(", ")
        ))),
    }
}

/// Lossless two-ring QFI against `|V|`: full value, long-lived modal term and
/// its isolated-mode bound (weak coupling only), and the decay-modified QFI.
fn fig2() -> Result<SweepResult, CliError> {
    let vs: Vec<f64> = (10..=120).map(|k| k as f64 / 200.0).collect();
    let rows = vs
        .par_iter()
        .map(|&v| -> Result<Vec<Cell>, CliError> {
            let (m, p) = two_ring(1.0, v, 0.0).build()?;
            let (i_max, _) = qfi::qfi_max(&m, &p, 0.0)?;
            let i_mod = qfi::decay_modified_qfi(&m, &p, 0.0)?;
            let regime = if v < 0.25 {
                "weak"
            } else if v == 0.25 {
                "ep"
            } else {
                "strong"
            };
            let (mut term, mut bound) = (f64::NAN, f64::NAN);
            if regime == "weak" {
                let sample = spectral::ldos(&m, 1, 0.0, true)?;
                if let Some(terms) = sample.modal_terms {
                    let long = terms
                        .iter()
                        .min_by(|a, b| a.eigenvalue.im.abs().total_cmp(&b.eigenvalue.im.abs()))
                        .expect("two modes");
                    term = 16.0 * long.green.im.powi(2);
                }
                let k = spectral::kato_decompose_default(&m.effective_hamiltonian())?;
                let l = (0..k.len())
                    .min_by(|&a, &b| {
                        k.clusters()[a].decay_rate().total_cmp(&k.clusters()[b].decay_rate())
                    })
                    .expect("nonempty");
                if k.clusters()[l].kind == PointKind::Isolated {
                    bound = spectral::qfi_bound_localized(&k, l, 0.0)?;
                }
            }
            Ok(vec![
                v.into(),
                regime.into(),
                i_max.into(),
                term.into(),
                bound.into(),
                i_mod.into(),
            ])
        })
        .collect();
    table(
        &[
            "v_over_gamma",
            "regime",
            "gamma2_i_max",
            "gamma2_long_lived",
            "gamma2_long_lived_bound",
            "gamma2_i_mod",
        ],
        rows,
        "fig2",
    )
}

/// Phase of the reflected light and its slope QFI against the detuning ε.
fn fig3() -> Result<SweepResult, CliError> {
    let eps = linspace(-0.5, 0.5, 401);
    let (ep, ep_pert) = ModelParams::two_ring_ep(1.0).build()?;
    let (iso, iso_pert) = ModelParams::SingleRing { gamma_wg: 0.5, kappa: 0.0 }.build()?;
    let phase_ep = qfi::phase_response(&ep, &ep_pert, 0.0, &eps)?;
    let phase_iso = qfi::phase_response(&iso, &iso_pert, 0.0, &eps)?;
    let rows = eps
        .par_iter()
        .enumerate()
        .map(|(i, &e)| -> Result<Vec<Cell>, CliError> {
            let slope = |m: &epsense::model::ScatteringModel, p| -> Result<f64, CliError> {
                Ok(qfi::phase_response(&m.perturbed(p, e)?, p, 0.0, &[])?.qfi())
            };
            Ok(vec![
                e.into(),
                phase_ep.phase[i].into(),
                phase_iso.phase[i].into(),
                slope(&ep, &ep_pert)?.into(),
                slope(&iso, &iso_pert)?.into(),
            ])
        })
        .collect();
    table(
        &[
            "epsilon_over_gamma",
            "phase_ep",
            "phase_isolated",
            "gamma2_qfi_ep",
            "gamma2_qfi_isolated",
        ],
        rows,
        "fig3",
    )
}

fn kappa_grid() -> Vec<f64> {
    with_points(linspace(0.005, 0.5, 100), &[kappa_critical(1.0)])
}

/// Reduced QFI against κ/γ, scaled by γ².
fn fig4a() -> Result<SweepResult, CliError> {
    let rows = kappa_grid()
        .par_iter()
        .map(|&k| -> Result<Vec<Cell>, CliError> {
            Ok(vec![
                k.into(),
                reduced(two_ring(1.0, 0.25, k))?.into(),
                reduced(ModelParams::SingleRing { gamma_wg: 0.5, kappa: k })?.into(),
                reduced(two_ring(1.0, v_optimal(1.0, k), k))?.into(),
            ])
        })
        .collect();
    table(
        &[
            "kappa_over_gamma",
            "gamma2_i_red_ep",
            "gamma2_i_red_isolated",
            "gamma2_i_red_opt",
        ],
        rows,
        "fig4a",
    )
}

/// Reduced QFI against γ/κ at κ = 1, scaled by κ².
fn fig4b() -> Result<SweepResult, CliError> {
    let log: Vec<f64> = (0..=120).map(|i| 10f64.powf(-1.0 + i as f64 / 40.0)).collect();
    let rows = with_points(log, &[2.0, 6.0])
        .par_iter()
        .map(|&g| -> Result<Vec<Cell>, CliError> {
            Ok(vec![
                g.into(),
                reduced(two_ring(g, g / 4.0, 1.0))?.into(),
                reduced(ModelParams::SingleRing { gamma_wg: g / 2.0, kappa: 1.0 })?.into(),
                reduced(two_ring(g, v_optimal(g, 1.0), 1.0))?.into(),
            ])
        })
        .collect();
    let mut t = table(
        &[
            "gamma_over_kappa",
            "kappa2_i_red_ep",
            "kappa2_i_red_isolated",
            "kappa2_i_red_opt",
        ],
        rows,
        "fig4b",
    )?;
    t.metadata.retain(|(k, _)| k != "gamma");
    t.meta("kappa", "1");
    Ok(t)
}

/// Two-ring reduced QFI against `|V|` for three loss rates.
fn fig5() -> Result<SweepResult, CliError> {
    let kappas = [0.1, kappa_critical(1.0), 0.4];
    let vs: Vec<f64> = (2..=120).map(|k| k as f64 / 200.0).collect();
    let rows = vs
        .par_iter()
        .map(|&v| -> Result<Vec<Cell>, CliError> {
            let mut row = vec![Cell::Num(v)];
            for &k in &kappas {
                row.push(reduced(two_ring(1.0, v, k))?.into());
            }
            Ok(row)
        })
        .collect();
    let mut t = table(
        &[
            "v_over_gamma",
            "gamma2_i_red_kappa_0p1",
            "gamma2_i_red_kappa_c",
            "gamma2_i_red_kappa_0p4",
        ],
        rows,
        "fig5",
    )?;
    t.meta("kappa_values", format!("{:e}, {:e}, {:e}", kappas[0], kappas[1], kappas[2]));
    Ok(t)
}

/// Eigenfrequencies of the two-ring system at the optimal coupling against κ/γ.
fn fig6() -> Result<SweepResult, CliError> {
    let rows = kappa_grid()
        .par_iter()
        .map(|&k| -> Result<Vec<Cell>, CliError> {
            let v = v_optimal(1.0, k);
            let (m, _) = two_ring(1.0, v, k).build()?;
            let mut w = m
                .effective_hamiltonian()
                .eig()
                .map_err(spectral::SpectralError::from)
                .map_err(qfi::QfiError::from)?
                .values;
            // Long-lived mode first below κ_c, lower real part first above it.
            w.sort_by(|a, b| (a.re - a.im).total_cmp(&(b.re - b.im)));
            Ok(vec![
                k.into(),
                v.into(),
                w[0].re.into(),
                w[0].im.into(),
                w[1].re.into(),
                w[1].im.into(),
            ])
        })
        .collect();
    table(
        &[
            "kappa_over_gamma",
            "v_opt_over_gamma",
            "re_omega_1",
            "im_omega_1",
            "re_omega_2",
            "im_omega_2",
        ],
        rows,
        "fig6",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_loss_value() {
        assert!((kappa_critical(1.0) - 0.20710678118654752).abs() < 1e-16);
        assert!((v_optimal(1.0, kappa_critical(1.0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fig2_reference_row() {
        let t = figure("fig2").unwrap();
        let v = t.column("v_over_gamma").unwrap();
        let i = t.column("gamma2_i_max").unwrap();
        let m = t.column("gamma2_i_mod").unwrap();
        let ep = v.iter().position(|&x| x == 0.25).unwrap();
        assert!((i[ep] - 1024.0).abs() < 1e-9 * 1024.0);
        for k in ep..v.len() {
            assert!((m[k] - i[k]).abs() < 1e-9 * i[k]);
        }
        let red = t.column("gamma2_long_lived").unwrap();
        let orange = t.column("gamma2_long_lived_bound").unwrap();
        assert!(red[0].is_finite() && red[ep].is_nan());
        assert!(red[0] <= orange[0] * (1.0 + 1e-9));
    }

    #[test]
    fn fig6_merges_at_critical_loss() {
        let t = figure("fig6").unwrap();
        let k = t.column("kappa_over_gamma").unwrap();
        let c = k.iter().position(|&x| (x - kappa_critical(1.0)).abs() < 1e-15).unwrap();
        let (a, b) = (t.column("im_omega_1").unwrap(), t.column("im_omega_2").unwrap());
        assert!((a[c] - b[c]).abs() < 1e-6);
        assert!((a[0] - b[0]).abs() > 1e-3);
    }

    #[test]
    fn unknown_figure() {
        assert!(matches!(figure("fig9"), Err(CliError::Usage(_))));
    }
}
