//! Scattering matrix, its derivative with respect to the sensed parameter,
//! and the quantum Fisher information (QFI) figures of merit.
//!
//! All QFI values are per unit incoming photon flux with `ħω = 1`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, Perturbation, ScatteringModel};
use crate::numerics::{CMat, CVec, C64};
use crate::spectral::{self, greens_function, SpectralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfiError {
    #[error("perturbation is not localized on a single site")]
    NotLocalized,
    #[error("phase response needs a single lossless channel, model has {channels}")]
    MultiChannel { channels: usize },
    #[error("phase step {step:.3} rad at epsilon = {epsilon}: refine the grid")]
    GridTooCoarse { step: f64, epsilon: f64 },
    #[error("reduced QFI routes disagree: {factorized:e} vs {matrix_element:e}")]
    Inconsistent { factorized: f64, matrix_element: f64 },
    #[error("channel {channel} out of range for {channels} channels")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("input vector has length {got}, model has {channels} channels")]
    InputLength { got: usize, channels: usize },
    #[error("input vector is zero")]
    ZeroInput,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl QfiError {
    /// True when the failure is a real pole of the Green's function.
    pub fn is_pole(&self) -> bool {
        matches!(self, QfiError::Spectral(SpectralError::AtPole { .. }))
    }
}

/// Largest step of the unwrapped phase between neighbouring grid points.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

/// `S = I − 2i·W†·G(ω)·W`.
pub fn scattering_matrix(m: &ScatteringModel, omega: f64) -> Result<CMat, QfiError> {
    let g = greens_function(&m.effective_hamiltonian(), omega)?;
    let w = m.coupling();
    let t = w.adjoint().matmul(&g).matmul(w);
    Ok(&CMat::identity(m.n_channels()) - &t.scale(C64::new(0.0, 2.0)))
}

/// `∂S = −2i·W†·G·H₁·G·W`.
pub fn scattering_derivative(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
) -> Result<CMat, QfiError> {
    pert.check_dimension(m.n_modes())?;
    let g = greens_function(&m.effective_hamiltonian(), omega)?;
    let w = m.coupling();
    let d = w
        .adjoint()
        .matmul(&g)
        .matmul(pert.h1())
        .matmul(&g)
        .matmul(w);
    Ok(d.scale(C64::new(0.0, -2.0)))
}

/// Generalized Wigner-Smith operator in closed form, `Q = −2·W†·G†·H₁·G·W`.
pub fn wigner_smith(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
) -> Result<CMat, QfiError> {
    pert.check_dimension(m.n_modes())?;
    let g = greens_function(&m.effective_hamiltonian(), omega)?;
    let w = m.coupling();
    let q = w
        .adjoint()
        .matmul(&g.adjoint())
        .matmul(pert.h1())
        .matmul(&g)
        .matmul(w);
    Ok(q.scale_real(-2.0))
}

/// `Q = −i·S†·∂S`, built from the scattering matrix and its derivative.
pub fn wigner_smith_from_s(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
) -> Result<CMat, QfiError> {
    let s = scattering_matrix(m, omega)?;
    let ds = scattering_derivative(m, pert, omega)?;
    Ok(s.adjoint().matmul(&ds).scale(C64::new(0.0, -1.0)))
}

/// `4·‖∂S·u‖²/‖u‖²` for a coherent input with amplitudes `u_in` over all channels.
pub fn qfi_for_input(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
    u_in: &CVec,
) -> Result<f64, QfiError> {
    if u_in.len() != m.n_channels() {
        return Err(QfiError::InputLength {
            got: u_in.len(),
            channels: m.n_channels(),
        });
    }
    let norm = u_in.norm_sqr();
    if norm == 0.0 {
        return Err(QfiError::ZeroInput);
    }
    let ds = scattering_derivative(m, pert, omega)?;
    Ok(4.0 * ds.mul_vec(u_in).norm_sqr() / norm)
}

/// Maximum QFI over all inputs, `4·‖Q‖² = 16·‖W†G†H₁GW‖²`, and the input achieving it.
///
/// The input is normalized with its largest entry real and positive.
pub fn qfi_max(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
) -> Result<(f64, CVec), QfiError> {
    let q = wigner_smith(m, pert, omega)?;
    let (sigma, v) = q.dominant_singular();
    Ok((4.0 * sigma * sigma, v.fix_phase()))
}

/// Mean of the QFI over single-channel inputs, `4·‖∂S‖_F²/M`.
pub fn qfi_avg(m: &ScatteringModel, pert: &Perturbation, omega: f64) -> Result<f64, QfiError> {
    let ds = scattering_derivative(m, pert, omega)?;
    Ok(4.0 * ds.frobenius_norm().powi(2) / m.n_channels() as f64)
}

/// `16π²·ρ_j(ω)²` for a perturbation localized at site `j`.
pub fn qfi_max_via_ldos(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
) -> Result<f64, QfiError> {
    let site = pert.localized_site().ok_or(QfiError::NotLocalized)?;
    pert.check_dimension(m.n_modes())?;
    let rho = spectral::ldos(m, site, omega, false)?.rho;
    Ok(16.0 * PI * PI * rho * rho)
}

/// `|u⟩ = √2·W†·G†·|j⟩`, with `Q = −|u⟩⟨u|` for a source localized at `j`.
pub fn localized_source_vector(
    m: &ScatteringModel,
    site: usize,
    omega: f64,
) -> Result<CVec, QfiError> {
    if site >= m.n_modes() {
        return Err(ModelError::SiteOutOfRange {
            site,
            modes: m.n_modes(),
        }
        .into());
    }
    let g = greens_function(&m.effective_hamiltonian(), omega)?;
    let col = g.adjoint().mul_vec(&CVec::basis(m.n_modes(), site));
    Ok(m.coupling()
        .adjoint()
        .mul_vec(&col)
        .scale(C64::new(2f64.sqrt(), 0.0)))
}

/// QFI available from a single output channel when light enters through `in_channel`:
/// `16·|⟨out|W†G|j⟩|²·|⟨j|GW|in⟩|²`.
pub fn reduced_qfi(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
    in_channel: usize,
    out_channel: usize,
) -> Result<f64, QfiError> {
    let site = pert.localized_site().ok_or(QfiError::NotLocalized)?;
    pert.check_dimension(m.n_modes())?;
    let channels = m.n_channels();
    for ch in [in_channel, out_channel] {
        if ch >= channels {
            return Err(QfiError::ChannelOutOfRange {
                channel: ch,
                channels,
            });
        }
    }
    let g = greens_function(&m.effective_hamiltonian(), omega)?;
    let w = m.coupling();
    let left = w.adjoint().matmul(&g)[(out_channel, site)];
    let right = g.matmul(w)[(site, in_channel)];
    let factorized = 16.0 * left.norm_sqr() * right.norm_sqr();

    let ds = scattering_derivative(m, pert, omega)?;
    let matrix_element = 4.0 * ds[(out_channel, in_channel)].norm_sqr();
    let scale = 16.0 * (w.spectral_norm() * g.spectral_norm()).powi(4);
    if (factorized - matrix_element).abs() > 1e-10 * factorized.max(matrix_element) + 1e-15 * scale
    {
        return Err(QfiError::Inconsistent {
            factorized,
            matrix_element,
        });
    }
    Ok(factorized)
}

/// Phase of a single-channel reflection as the parameter is swept.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseResponse {
    pub epsilon_grid: Vec<f64>,
    /// Unwrapped `arg S(ε)`, zero at ε = 0.
    pub phase: Vec<f64>,
    pub modulus: Vec<f64>,
    /// `dφ/dε` at ε = 0.
    pub dphase_deps: f64,
}

impl PhaseResponse {
    /// QFI from the phase slope, `4·(dφ/dε)²`.
    pub fn qfi(&self) -> f64 {
        4.0 * self.dphase_deps * self.dphase_deps
    }
}

fn single_element(m: &ScatteringModel, pert: &Perturbation, omega: f64, eps: f64) -> Result<C64, QfiError> {
    let s = scattering_matrix(&m.perturbed(pert, eps)?, omega)?;
    Ok(s[(0, 0)])
}

/// Sweeps `arg S(ε)` over `epsilon_grid` for a one-channel lossless model.
///
/// The slope at zero uses a five-point central difference with a step tied to
/// `‖H‖/‖H₁‖`.
pub fn phase_response(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
    epsilon_grid: &[f64],
) -> Result<PhaseResponse, QfiError> {
    if m.n_channels() != 1 {
        return Err(QfiError::MultiChannel {
            channels: m.n_channels(),
        });
    }
    pert.check_dimension(m.n_modes())?;
    let s0 = single_element(m, pert, omega, 0.0)?;
    let rel = |eps: f64| -> Result<(f64, f64), QfiError> {
        let s = single_element(m, pert, omega, eps)?;
        Ok(((s / s0).arg(), s.norm()))
    };

    let h1 = pert.h1().spectral_norm();
    let dphase_deps = if h1 == 0.0 {
        0.0
    } else {
        let h = 1e-3 * m.effective_hamiltonian().spectral_norm().max(f64::MIN_POSITIVE) / h1;
        let f = |k: f64| rel(k * h).map(|(p, _)| p);
        (f(-2.0)? - 8.0 * f(-1.0)? + 8.0 * f(1.0)? - f(2.0)?) / (12.0 * h)
    };

    let mut raw = Vec::with_capacity(epsilon_grid.len());
    let mut modulus = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let (p, r) = rel(eps)?;
        raw.push(p);
        modulus.push(r);
    }
    // Unwrap outward from the grid point closest to zero, where the phase is near 0.
    let mut phase = raw.clone();
    if let Some(anchor) = (0..epsilon_grid.len())
        .min_by(|&a, &b| epsilon_grid[a].abs().total_cmp(&epsilon_grid[b].abs()))
    {
        let step = |prev: f64, next_raw: f64, eps: f64| -> Result<f64, QfiError> {
            let mut d = next_raw - prev.rem_euclid(2.0 * PI);
            d = (d + PI).rem_euclid(2.0 * PI) - PI;
            if d.abs() > MAX_PHASE_STEP {
                return Err(QfiError::GridTooCoarse { step: d, epsilon: eps });
            }
            Ok(prev + d)
        };
        for i in anchor + 1..phase.len() {
            phase[i] = step(phase[i - 1], raw[i], epsilon_grid[i])?;
        }
        for i in (0..anchor).rev() {
            phase[i] = step(phase[i + 1], raw[i], epsilon_grid[i])?;
        }
    }
    Ok(PhaseResponse {
        epsilon_grid: epsilon_grid.to_vec(),
        phase,
        modulus,
        dphase_deps,
    })
}

/// Maximum QFI weighted by the squared linewidth of the longest-lived mode,
/// `16·min_l |Im ω_l|²·I_max`.
pub fn decay_modified_qfi(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
) -> Result<f64, QfiError> {
    let (i_max, _) = qfi_max(m, pert, omega)?;
    let decay = min_decay_rate(m)?;
    Ok(16.0 * decay * decay * i_max)
}

/// Smallest `|Im ω_l|` over the eigenvalues of the effective Hamiltonian.
///
/// Coalesced eigenvalues are replaced by their cluster mean, which is far
/// less sensitive to rounding than the individual members.
pub fn min_decay_rate(m: &ScatteringModel) -> Result<f64, QfiError> {
    let h = m.effective_hamiltonian();
    let values: Vec<C64> = match spectral::kato_decompose_default(&h) {
        Ok(k) => k.clusters().iter().map(|c| c.omega).collect(),
        Err(SpectralError::IllConditioned { .. }) => h.eig().map_err(SpectralError::from)?.values,
        Err(e) => return Err(e.into()),
    };
    Ok(values
        .iter()
        .map(|w| w.im.abs())
        .fold(f64::INFINITY, f64::min))
}

/// Quantum Cramér-Rao limit on the standard deviation after `trials` repetitions.
pub fn cramer_rao(trials: u64, qfi: f64) -> f64 {
    assert!(trials >= 1, "at least one trial is needed");
    1.0 / (trials as f64 * qfi).sqrt()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QfiBounds {
    pub localized: f64,
    pub general: f64,
}

/// All figures of merit at one frequency.
#[derive(Debug, Clone, Serialize)]
pub struct QfiEvaluation {
    pub omega: f64,
    /// QFI for the supplied input, or for the first observed channel alone.
    pub i_input: f64,
    pub i_max: f64,
    pub i_avg: f64,
    /// First observed channel in and out; present for localized perturbations.
    pub i_reduced: Option<f64>,
    pub optimal_input: CVec,
    pub q_operator: CMat,
    /// Bounds from the cluster nearest `omega`; absent if the spectrum cannot be resolved.
    pub bounds: Option<QfiBounds>,
}

pub fn evaluate(
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
    u_in: Option<&CVec>,
) -> Result<QfiEvaluation, QfiError> {
    let q_operator = wigner_smith(m, pert, omega)?;
    let (i_max, optimal_input) = qfi_max(m, pert, omega)?;
    let first = m.observed_channels()[0];
    let default_input = CVec::basis(m.n_channels(), first);
    let i_input = qfi_for_input(m, pert, omega, u_in.unwrap_or(&default_input))?;
    let i_avg = qfi_avg(m, pert, omega)?;
    let i_reduced = match pert.localized_site() {
        Some(_) => Some(reduced_qfi(m, pert, omega, first, first)?),
        None => None,
    };
    let bounds = match spectral::kato_decompose_default(&m.effective_hamiltonian()) {
        Ok(k) => {
            let l = k.nearest_cluster(omega);
            Some(QfiBounds {
                localized: spectral::qfi_bound_localized(&k, l, omega)?,
                general: spectral::qfi_bound_general(m, pert, &k, l, omega)?,
            })
        }
        Err(SpectralError::IllConditioned { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(QfiEvaluation {
        omega,
        i_input,
        i_max,
        i_avg,
        i_reduced,
        optimal_input,
        q_operator,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_ring(v: f64, kappa: f64) -> (ScatteringModel, Perturbation) {
        ModelParams::TwoRing { gamma: 1.0, v: c(v, 0.0), kappa }.build().unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn decoupled_model_does_not_scatter() {
        let m = ScatteringModel::new(
            CMat::from_diag(&[c(0.3, 0.0)]),
            CMat::zeros(1, 2),
            vec![0],
            0.0,
        )
        .unwrap();
        assert_eq!(scattering_matrix(&m, 0.0).unwrap(), CMat::identity(2));
    }

    #[test]
    fn single_ring_reflects_with_phase_pi() {
        let (m, p) = ModelParams::SingleRing { gamma_wg: 0.5, kappa: 0.0 }.build().unwrap();
        let s = scattering_matrix(&m, 0.0).unwrap();
        assert!((s[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        let (i_max, _) = qfi_max(&m, &p, 0.0).unwrap();
        assert!(rel(i_max, 256.0) < 1e-12);
    }

    #[test]
    fn ep_derivative_magnitude() {
        let (m, p) = two_ring(0.25, 0.0);
        let s = scattering_matrix(&m, 0.0).unwrap();
        assert!((s[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let ds = scattering_derivative(&m, &p, 0.0).unwrap();
        assert!((ds[(0, 0)].norm() - 16.0).abs() < 1e-12);
        let zero = Perturbation::new(CMat::zeros(2, 2)).unwrap();
        assert_eq!(scattering_derivative(&m, &zero, 0.0).unwrap().max_abs(), 0.0);
        assert_eq!(wigner_smith(&m, &zero, 0.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (m, p) = two_ring(0.31, 0.07);
        let omega = 0.05;
        let ds = scattering_derivative(&m, &p, omega).unwrap();
        let h = 1e-5;
        let plus = scattering_matrix(&m.perturbed(&p, h).unwrap(), omega).unwrap();
        let minus = scattering_matrix(&m.perturbed(&p, -h).unwrap(), omega).unwrap();
        let fd = (&plus - &minus).scale_real(0.5 / h);
        assert!(fd.max_abs_diff(&ds) < 1e-8 * ds.max_abs());
    }

    #[test]
    fn wigner_smith_routes_agree() {
        for (m, p) in [two_ring(0.2, 0.0), two_ring(0.4, 0.1)] {
            let a = wigner_smith(&m, &p, 0.03).unwrap();
            let b = wigner_smith_from_s(&m, &p, 0.03).unwrap();
            assert!(a.is_hermitian(1e-11 * a.max_abs()));
            assert!(a.max_abs_diff(&b) < 1e-10 * a.max_abs());
        }
    }

    #[test]
    fn localized_source_is_rank_one() {
        let (m, p) = two_ring(0.3, 0.05);
        let omega = 0.1;
        let q = wigner_smith(&m, &p, omega).unwrap();
        let u = localized_source_vector(&m, 1, omega).unwrap();
        let outer = CMat::outer(&u, &u).scale_real(-1.0);
        assert!(q.max_abs_diff(&outer) < 1e-12 * q.max_abs());
        let rho = spectral::ldos(&m, 1, omega, false).unwrap().rho;
        assert!(rel(u.norm_sqr(), 2.0 * PI * rho) < 1e-12);

        // An input orthogonal to u carries no information.
        let orth = CVec::new(vec![-u[1].conj(), u[0].conj(), C64::new(0.0, 0.0)]);
        let i = qfi_for_input(&m, &p, omega, &orth).unwrap();
        let (i_max, _) = qfi_max(&m, &p, omega).unwrap();
        assert!(i < 1e-12 * i_max);
    }

    #[test]
    fn optimal_input_attains_maximum() {
        let (m, p) = two_ring(0.3, 0.05);
        let (i_max, u) = qfi_max(&m, &p, 0.0).unwrap();
        let i = qfi_for_input(&m, &p, 0.0, &u).unwrap();
        assert!(rel(i, i_max) < 1e-10);
        let avg = qfi_avg(&m, &p, 0.0).unwrap();
        assert!(rel(avg * m.n_channels() as f64, i_max) < 1e-9);
        assert!(rel(qfi_max_via_ldos(&m, &p, 0.0).unwrap(), i_max) < 1e-9);
    }

    #[test]
    fn reference_values() {
        for k in 1..=8 {
            let v = 0.05 * k as f64;
            let (m, p) = two_ring(v, 0.0);
            let (i, _) = qfi_max(&m, &p, 0.0).unwrap();
            assert!(rel(i, 4.0 / v.powi(4)) < 1e-10, "v = {v}");
        }
        let (m, p) = ModelParams::three_ring_ep(1.0).build().unwrap();
        assert!(rel(qfi_max(&m, &p, 0.0).unwrap().0, 4096.0) < 1e-9);
        let (m, p) = ModelParams::MirrorRing { gamma: 1.0, rho: 0.5, phi: 0.0 }.build().unwrap();
        assert!(rel(qfi_max(&m, &p, 0.0).unwrap().0, 144.0) < 1e-10);
        assert_eq!(qfi_max_via_ldos(&m, &p, 0.0), Err(QfiError::NotLocalized));
        let (m, p) = ModelParams::two_ring_ep(1.0).build().unwrap();
        assert!(rel(qfi_max_via_ldos(&m, &p, 0.0).unwrap(), 1024.0) < 1e-12);
    }

    #[test]
    fn reduced_qfi_closed_forms() {
        for &(v, kappa) in &[(0.25, 0.1), (0.4, 0.02), (0.1, 0.3)] {
            let (m, p) = two_ring(v, kappa);
            let i = reduced_qfi(&m, &p, 0.0, 0, 0).unwrap();
            let expected = 4.0 * v.powi(4) / ((1.0 + kappa) * kappa / 4.0 + v * v).powi(4);
            assert!(rel(i, expected) < 1e-10, "v {v} kappa {kappa}");
            let (full, _) = qfi_max(&m, &p, 0.0).unwrap();
            assert!(i <= full * (1.0 + 1e-9));
        }
        let (m, p) = two_ring(0.25, 0.0);
        assert!(rel(reduced_qfi(&m, &p, 0.0, 0, 0).unwrap(), 1024.0) < 1e-12);
        assert!(matches!(
            reduced_qfi(&m, &p, 0.0, 0, 3),
            Err(QfiError::ChannelOutOfRange { .. })
        ));
    }

    #[test]
    fn phase_route() {
        let grid: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.01).collect();
        let (m, p) = two_ring(0.25, 0.0);
        let r = phase_response(&m, &p, 0.0, &grid).unwrap();
        assert!(rel(r.qfi(), 1024.0) < 1e-6);
        assert!(r.modulus.iter().all(|x| (x - 1.0).abs() < 1e-10));
        assert_eq!(r.phase[50], 0.0);
        for k in 0..50 {
            assert!((r.phase[k] + r.phase[100 - k]).abs() < 1e-10, "odd in epsilon");
        }
        let (m, p) = ModelParams::SingleRing { gamma_wg: 0.5, kappa: 0.0 }.build().unwrap();
        let r = phase_response(&m, &p, 0.0, &grid).unwrap();
        assert!(rel(r.qfi(), 256.0) < 1e-6);

        let coarse = [-0.5, 0.0, 0.5];
        let (m, p) = two_ring(0.25, 0.0);
        assert!(matches!(
            phase_response(&m, &p, 0.0, &coarse),
            Err(QfiError::GridTooCoarse { .. })
        ));
        let (m, p) = two_ring(0.25, 0.1);
        assert_eq!(
            phase_response(&m, &p, 0.0, &grid).unwrap_err(),
            QfiError::MultiChannel { channels: 3 }
        );
    }

    #[test]
    fn decay_modified_qfi_limits() {
        for &v in &[0.25, 0.3, 0.5] {
            let (m, p) = two_ring(v, 0.0);
            let (i_max, _) = qfi_max(&m, &p, 0.0).unwrap();
            assert!(rel(decay_modified_qfi(&m, &p, 0.0).unwrap(), i_max) < 1e-9);
        }
        let (m, p) = two_ring(1e-3, 0.0);
        assert!(rel(decay_modified_qfi(&m, &p, 0.0).unwrap(), 256.0) < 1e-4);
    }

    #[test]
    fn cramer_rao_values() {
        assert_eq!(cramer_rao(1, 1.0), 1.0);
        assert!((cramer_rao(100, 1.0) - 0.1).abs() < 1e-16);
        assert_eq!(cramer_rao(1, 1024.0), 1.0 / 32.0);
    }

    #[test]
    fn evaluation_bundles_everything() {
        let (m, p) = ModelParams::two_ring_ep(1.0).build().unwrap();
        let e = evaluate(&m, &p, 0.0, None).unwrap();
        assert!(rel(e.i_max, 1024.0) < 1e-10);
        assert!(rel(e.i_input, 1024.0) < 1e-10);
        assert!(rel(e.i_avg, 1024.0) < 1e-10);
        assert!(rel(e.i_reduced.unwrap(), 1024.0) < 1e-10);
        let b = e.bounds.unwrap();
        assert!(rel(b.localized, 1024.0) < 1e-10 && rel(b.general, 16384.0) < 1e-10);
        assert!(e.q_operator.is_hermitian(1e-11 * e.q_operator.max_abs()));
    }

    #[test]
    fn poles_are_reported() {
        let m = ScatteringModel::new(CMat::from_diag(&[c(0.0, 0.0)]), CMat::zeros(1, 1), vec![0], 0.0)
            .unwrap();
        assert!(scattering_matrix(&m, 0.0).unwrap_err().is_pole());
    }
}
