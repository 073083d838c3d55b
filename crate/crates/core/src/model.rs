//! Scattering models: an internal Hamiltonian, its coupling to external
//! channels, and the perturbation whose strength is being sensed.
//!
//! The microring systems are built in the clockwise two-mode subspace only,
//! with the reference frequency ω₀ fixed to zero. Internal loss is added as
//! one auxiliary channel per cavity so that the full scattering matrix stays
//! unitary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{CMat, CVec, LinalgError, C64};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("internal Hamiltonian is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("perturbation generator is not Hermitian (deviation {0:e})")]
    PerturbationNotHermitian(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("observed channel set is empty")]
    NoObservedChannels,
    #[error("observed channel {channel} out of range for {channels} channels")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("site {site} out of range for {modes} modes")]
    SiteOutOfRange { site: usize, modes: usize },
    #[error("model has gain: eigenvalue imaginary part {0:e} > 0")]
    Gain(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A passive open system: `H = h_sys − i·W·W†`, probed through `M` channels.
#[derive(Debug, Clone)]
pub struct ScatteringModel {
    h_sys: CMat,
    coupling: CMat,
    observed: Vec<usize>,
    omega_ref: f64,
}

impl ScatteringModel {
    /// Validates and builds a model.
    ///
    /// `coupling` is the N×M matrix `W`; channels are indexed from 0.
    pub fn new(
        h_sys: CMat,
        coupling: CMat,
        observed: Vec<usize>,
        omega_ref: f64,
    ) -> Result<Self, ModelError> {
        if !h_sys.is_square() {
            return Err(ModelError::Dimension(format!(
                "h_sys is {}x{}",
                h_sys.rows(),
                h_sys.cols()
            )));
        }
        let n = h_sys.rows();
        if n == 0 || coupling.rows() != n || coupling.cols() == 0 {
            return Err(ModelError::Dimension(format!(
                "coupling is {}x{} for {n} modes",
                coupling.rows(),
                coupling.cols()
            )));
        }
        let deviation = h_sys.max_abs_diff(&h_sys.adjoint());
        if deviation > HERMITIAN_TOL * h_sys.spectral_norm().max(f64::MIN_POSITIVE) {
            return Err(ModelError::NotHermitian(deviation));
        }
        if observed.is_empty() {
            return Err(ModelError::NoObservedChannels);
        }
        let m = coupling.cols();
        if let Some(&channel) = observed.iter().find(|&&c| c >= m) {
            return Err(ModelError::ChannelOutOfRange {
                channel,
                channels: m,
            });
        }
        let mut observed = observed;
        observed.sort_unstable();
        observed.dedup();
        let model = ScatteringModel {
            h_sys,
            coupling,
            observed,
            omega_ref,
        };
        let h = model.effective_hamiltonian();
        let scale = h.spectral_norm().max(1.0);
        for w in h.eig()?.values {
            if w.im > 1e-12 * scale {
                return Err(ModelError::Gain(w.im));
            }
        }
        Ok(model)
    }

    pub fn n_modes(&self) -> usize {
        self.h_sys.rows()
    }

    pub fn n_channels(&self) -> usize {
        self.coupling.cols()
    }

    pub fn h_sys(&self) -> &CMat {
        &self.h_sys
    }

    pub fn coupling(&self) -> &CMat {
        &self.coupling
    }

    pub fn observed_channels(&self) -> &[usize] {
        &self.observed
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    /// `H = h_sys − i·W·W†`.
    pub fn effective_hamiltonian(&self) -> CMat {
        let ww = self.coupling.matmul(&self.coupling.adjoint());
        &self.h_sys - &ww.scale(C64::new(0.0, 1.0))
    }

    /// Decay operator `Γ = i(H − H†) = 2·W·W†`.
    pub fn decay_operator(&self) -> CMat {
        self.coupling
            .matmul(&self.coupling.adjoint())
            .scale_real(2.0)
    }

    /// Same system with the internal Hamiltonian shifted by `epsilon·h1`.
    pub fn perturbed(&self, pert: &Perturbation, epsilon: f64) -> Result<Self, ModelError> {
        pert.check_dimension(self.n_modes())?;
        let h = &self.h_sys + &pert.h1.scale_real(epsilon);
        // The sum of two Hermitian matrices stays Hermitian; skip revalidation.
        Ok(ScatteringModel {
            h_sys: h,
            coupling: self.coupling.clone(),
            observed: self.observed.clone(),
            omega_ref: self.omega_ref,
        })
    }

    /// Adds one loss channel of rate `kappa` to every cavity.
    ///
    /// The new channels sit after the existing ones and are not observed.
    pub fn with_uniform_loss(&self, kappa: f64) -> Result<Self, ModelError> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("kappa = {kappa}")));
        }
        if kappa == 0.0 {
            return Ok(self.clone());
        }
        let n = self.n_modes();
        let m = self.n_channels();
        let amp = C64::new((kappa / 2.0).sqrt(), 0.0);
        let mut w = CMat::zeros(n, m + n);
        for i in 0..n {
            for j in 0..m {
                w[(i, j)] = self.coupling[(i, j)];
            }
            w[(i, m + i)] = amp;
        }
        ScatteringModel::new(
            self.h_sys.clone(),
            w,
            self.observed.clone(),
            self.omega_ref,
        )
    }
}

/// Hermitian generator `H₁` of the sensed parameter; the estimand ε multiplies it.
#[derive(Debug, Clone)]
pub struct Perturbation {
    h1: CMat,
    site: Option<usize>,
}

impl Perturbation {
    /// Wraps a Hermitian generator. A generator equal to `|j⟩⟨j|` is tagged as localized at `j`.
    pub fn new(h1: CMat) -> Result<Self, ModelError> {
        if !h1.is_square() {
            return Err(ModelError::Dimension(format!(
                "h1 is {}x{}",
                h1.rows(),
                h1.cols()
            )));
        }
        let deviation = h1.max_abs_diff(&h1.adjoint());
        if deviation > HERMITIAN_TOL * h1.max_abs().max(f64::MIN_POSITIVE) {
            return Err(ModelError::PerturbationNotHermitian(deviation));
        }
        let n = h1.rows();
        let site = (0..n).find(|&j| h1 == CMat::outer(&CVec::basis(n, j), &CVec::basis(n, j)));
        Ok(Perturbation { h1, site })
    }

    /// Frequency shift of a single cavity, `H₁ = |site⟩⟨site|`.
    pub fn localized(n_modes: usize, site: usize) -> Result<Self, ModelError> {
        if site >= n_modes {
            return Err(ModelError::SiteOutOfRange {
                site,
                modes: n_modes,
            });
        }
        let e = CVec::basis(n_modes, site);
        Ok(Perturbation {
            h1: CMat::outer(&e, &e),
            site: Some(site),
        })
    }

    pub fn h1(&self) -> &CMat {
        &self.h1
    }

    pub fn localized_site(&self) -> Option<usize> {
        self.site
    }

    pub fn n_modes(&self) -> usize {
        self.h1.rows()
    }

    pub(crate) fn check_dimension(&self, n: usize) -> Result<(), ModelError> {
        if self.h1.rows() == n {
            Ok(())
        } else {
            Err(ModelError::Dimension(format!(
                "perturbation acts on {} modes, model has {n}",
                self.h1.rows()
            )))
        }
    }
}

/// Parameters of the microring systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelParams {
    /// Two rings; the upper one couples to the waveguide at rate `gamma`.
    TwoRing { gamma: f64, v: C64, kappa: f64 },
    /// Three rings in a chain, the first one on the waveguide.
    ThreeRing {
        gamma: f64,
        v1: C64,
        v2: C64,
        kappa: f64,
    },
    /// One ring with waveguide coupling `gamma_wg`.
    SingleRing { gamma_wg: f64, kappa: f64 },
    /// One ring on a semi-infinite waveguide closed by a partial mirror.
    MirrorRing { gamma: f64, rho: f64, phi: f64 },
}

impl ModelParams {
    /// Two rings exactly at their second-order exceptional point, `|V| = γ/4`.
    pub fn two_ring_ep(gamma: f64) -> Self {
        ModelParams::TwoRing {
            gamma,
            v: C64::new(gamma / 4.0, 0.0),
            kappa: 0.0,
        }
    }

    /// Three rings at their third-order exceptional point.
    pub fn three_ring_ep(gamma: f64) -> Self {
        let s3 = 3.0f64.sqrt();
        ModelParams::ThreeRing {
            gamma,
            v1: C64::new(2.0f64.sqrt() * gamma / (3.0 * s3), 0.0),
            v2: C64::new(gamma / (6.0 * s3), 0.0),
            kappa: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!("{name} must be > 0, got {x}")))
            }
        };
        let non_negative = |name: &str, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!("{name} must be >= 0, got {x}")))
            }
        };
        let finite = |name: &str, z: C64| {
            if z.re.is_finite() && z.im.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match *self {
            ModelParams::TwoRing { gamma, v, kappa } => {
                positive("gamma", gamma)?;
                finite("v", v)?;
                non_negative("kappa", kappa)
            }
            ModelParams::ThreeRing {
                gamma,
                v1,
                v2,
                kappa,
            } => {
                positive("gamma", gamma)?;
                finite("v1", v1)?;
                finite("v2", v2)?;
                non_negative("kappa", kappa)
            }
            ModelParams::SingleRing { gamma_wg, kappa } => {
                positive("gamma_wg", gamma_wg)?;
                non_negative("kappa", kappa)
            }
            ModelParams::MirrorRing { gamma, rho, phi } => {
                positive("gamma", gamma)?;
                if !(0.0..=1.0).contains(&rho) {
                    return Err(ModelError::InvalidParameter(format!(
                        "rho must lie in [0, 1], got {rho}"
                    )));
                }
                if !phi.is_finite() {
                    return Err(ModelError::InvalidParameter("phi must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Builds the model together with its natural perturbation.
    pub fn build(&self) -> Result<(ScatteringModel, Perturbation), ModelError> {
        self.validate()?;
        match *self {
            ModelParams::TwoRing { gamma, v, kappa } => build_two_ring(gamma, v, kappa),
            ModelParams::ThreeRing {
                gamma,
                v1,
                v2,
                kappa,
            } => build_three_ring(gamma, v1, v2, kappa),
            ModelParams::SingleRing { gamma_wg, kappa } => build_single_ring(gamma_wg, kappa),
            ModelParams::MirrorRing { gamma, rho, phi } => build_mirror_ring(gamma, rho, phi),
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            ModelParams::TwoRing { kappa, .. }
            | ModelParams::ThreeRing { kappa, .. }
            | ModelParams::SingleRing { kappa, .. } => kappa,
            ModelParams::MirrorRing { .. } => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::TwoRing { .. } => "two-ring",
            ModelParams::ThreeRing { .. } => "three-ring",
            ModelParams::SingleRing { .. } => "single-ring",
            ModelParams::MirrorRing { .. } => "mirror-ring",
        }
    }
}

fn waveguide_column(n: usize, gamma: f64) -> CMat {
    let mut w = CMat::zeros(n, 1);
    w[(0, 0)] = C64::new((gamma / 2.0).sqrt(), 0.0);
    w
}

/// Two coupled rings; the perturbation shifts the lower ring (site 1).
pub fn build_two_ring(
    gamma: f64,
    v: C64,
    kappa: f64,
) -> Result<(ScatteringModel, Perturbation), ModelError> {
    let zero = C64::new(0.0, 0.0);
    let h_sys = CMat::from_rows(&[vec![zero, v.conj()], vec![v, zero]]);
    let model = ScatteringModel::new(h_sys, waveguide_column(2, gamma), vec![0], 0.0)?
        .with_uniform_loss(kappa)?;
    Ok((model, Perturbation::localized(2, 1)?))
}

/// Three rings in a chain; the perturbation shifts the last ring (site 2).
pub fn build_three_ring(
    gamma: f64,
    v1: C64,
    v2: C64,
    kappa: f64,
) -> Result<(ScatteringModel, Perturbation), ModelError> {
    let zero = C64::new(0.0, 0.0);
    let h_sys = CMat::from_rows(&[
        vec![zero, v1.conj(), zero],
        vec![v1, zero, v2.conj()],
        vec![zero, v2, zero],
    ]);
    let model = ScatteringModel::new(h_sys, waveguide_column(3, gamma), vec![0], 0.0)?
        .with_uniform_loss(kappa)?;
    Ok((model, Perturbation::localized(3, 2)?))
}

/// A single ring; the perturbation shifts its frequency.
pub fn build_single_ring(
    gamma_wg: f64,
    kappa: f64,
) -> Result<(ScatteringModel, Perturbation), ModelError> {
    let model = ScatteringModel::new(CMat::zeros(1, 1), waveguide_column(1, gamma_wg), vec![0], 0.0)?
        .with_uniform_loss(kappa)?;
    Ok((model, Perturbation::localized(1, 0)?))
}

/// Ring next to a partial mirror, in the (CW, CCW) traveling-wave basis.
///
/// Light leaving CW is partly reflected back into CCW, never the reverse,
/// which makes the effective Hamiltonian lower triangular. The perturbation is
/// symmetric backscattering `H₁ = [[0, 1], [1, 0]]`.
pub fn build_mirror_ring(
    gamma: f64,
    rho: f64,
    phi: f64,
) -> Result<(ScatteringModel, Perturbation), ModelError> {
    let tau = (1.0 - rho * rho).max(0.0).sqrt();
    let amp = (gamma / 2.0).sqrt();
    let zero = C64::new(0.0, 0.0);
    let coupling = CMat::from_rows(&[
        vec![C64::new(amp, 0.0), zero],
        vec![
            C64::from_polar(amp * rho, 2.0 * phi),
            C64::from_polar(amp * tau, phi),
        ],
    ]);
    // h_sys = H₀ + i·W·W† with H₀ carrying −iγρe^{2iφ} below the diagonal.
    let upper = C64::new(0.0, gamma * rho / 2.0) * C64::from_polar(1.0, -2.0 * phi);
    let h_sys = CMat::from_rows(&[vec![zero, upper], vec![upper.conj(), zero]]);
    let model = ScatteringModel::new(h_sys, coupling, vec![0, 1], 0.0)?;
    let h1 = CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    Ok((model, Perturbation::new(h1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted_eigs(h: &CMat) -> Vec<C64> {
        let mut v = h.eig().unwrap().values;
        v.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        v
    }

    #[test]
    fn decoupled_limit_is_h_sys() {
        let h = CMat::from_diag(&[c(0.3, 0.0)]);
        let m = ScatteringModel::new(h.clone(), CMat::zeros(1, 1), vec![0], 0.3).unwrap();
        assert_eq!(m.effective_hamiltonian(), h);
    }

    #[test]
    fn two_ring_effective_hamiltonian() {
        let gamma = 1.3;
        let v = c(0.2, 0.1);
        let (m, p) = ModelParams::TwoRing { gamma, v, kappa: 0.0 }.build().unwrap();
        let expected = CMat::from_rows(&[vec![c(0.0, -gamma / 2.0), v.conj()], vec![v, c(0.0, 0.0)]]);
        assert!(m.effective_hamiltonian().max_abs_diff(&expected) < 1e-15);
        assert_eq!(p.localized_site(), Some(1));
        assert_eq!(m.observed_channels(), &[0]);

        let kappa = 0.07;
        let (m, _) = ModelParams::TwoRing { gamma, v, kappa }.build().unwrap();
        let expected = CMat::from_rows(&[
            vec![c(0.0, -(gamma + kappa) / 2.0), v.conj()],
            vec![v, c(0.0, -kappa / 2.0)],
        ]);
        assert!(m.effective_hamiltonian().max_abs_diff(&expected) < 1e-15);
        assert_eq!(m.n_channels(), 3);
    }

    #[test]
    fn two_ring_ep_is_double_eigenvalue() {
        let (m, _) = ModelParams::two_ring_ep(1.0).build().unwrap();
        for w in sorted_eigs(&m.effective_hamiltonian()) {
            assert!((w - c(0.0, -0.25)).norm() < 1e-7);
        }
        let (m, _) = ModelParams::TwoRing { gamma: 1.0, v: c(0.0, 0.0), kappa: 0.0 }
            .build()
            .unwrap();
        let e = sorted_eigs(&m.effective_hamiltonian());
        assert!((e[0] - c(0.0, -0.5)).norm() < 1e-15 && e[1].norm() < 1e-15);
    }

    #[test]
    fn uniform_loss_shifts_spectrum() {
        for &kappa in &[0.01, 0.2, 1.0] {
            let (m, _) = ModelParams::TwoRing { gamma: 1.0, v: c(0.3, 0.0), kappa }
                .build()
                .unwrap();
            for w in m.effective_hamiltonian().eig().unwrap().values {
                assert!(w.im <= -kappa / 2.0 + 1e-12);
            }
            let (m0, _) = ModelParams::TwoRing { gamma: 1.0, v: c(0.3, 0.0), kappa: 0.0 }
                .build()
                .unwrap();
            let shifted = m0.effective_hamiltonian().shift_diag(c(0.0, -kappa / 2.0));
            assert!(m.effective_hamiltonian().max_abs_diff(&shifted) < 1e-14);
        }
    }

    #[test]
    fn three_ring_spectra() {
        let (m, p) = ModelParams::three_ring_ep(1.0).build().unwrap();
        assert_eq!(p.localized_site(), Some(2));
        let h = m.effective_hamiltonian();
        // Cube-root sensitivity: rounding of V1, V2 splits the triple root by ~1e-5.
        for w in h.eig().unwrap().values {
            assert!((w - c(0.0, -1.0 / 6.0)).norm() < 1e-4);
        }
        assert!((h.trace() / 3.0 - c(0.0, -1.0 / 6.0)).norm() < 1e-15);

        let (m, _) = ModelParams::ThreeRing {
            gamma: 1.0,
            v1: c(0.0, 0.0),
            v2: c(0.0, 0.0),
            kappa: 0.0,
        }
        .build()
        .unwrap();
        let e = sorted_eigs(&m.effective_hamiltonian());
        assert!((e[0] - c(0.0, -0.5)).norm() < 1e-15);
        assert!(e[1].norm() < 1e-15 && e[2].norm() < 1e-15);
    }

    #[test]
    fn single_ring_eigenvalue() {
        for &(g, k) in &[(0.5, 0.0), (1.0 / 6.0, 0.0), (0.5, 0.2)] {
            let (m, _) = ModelParams::SingleRing { gamma_wg: g, kappa: k }.build().unwrap();
            let w = m.effective_hamiltonian()[(0, 0)];
            assert!((w - c(0.0, -(g + k) / 2.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn mirror_ring_matches_closed_form() {
        for &(rho, phi) in &[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0), (0.8, -1.1)] {
            let gamma = 1.0;
            let (m, p) = ModelParams::MirrorRing { gamma, rho, phi }.build().unwrap();
            let h = m.effective_hamiltonian();
            let expected = CMat::from_rows(&[
                vec![c(0.0, -gamma / 2.0), c(0.0, 0.0)],
                vec![c(0.0, -gamma * rho) * C64::from_polar(1.0, 2.0 * phi), c(0.0, -gamma / 2.0)],
            ]);
            assert!(h.max_abs_diff(&expected) < 1e-15, "rho {rho} phi {phi}");
            assert_eq!(p.localized_site(), None);
        }
    }

    #[test]
    fn zoo_decay_operators_are_rank_one_and_psd() {
        for params in [
            ModelParams::two_ring_ep(1.0),
            ModelParams::three_ring_ep(2.0),
            ModelParams::MirrorRing { gamma: 1.0, rho: 0.6, phi: 0.2 },
        ] {
            let (m, _) = params.build().unwrap();
            let h = m.effective_hamiltonian();
            let g = (&h - &h.adjoint()).scale(c(0.0, 1.0));
            assert!(g.max_abs_diff(&m.decay_operator()) < 1e-14);
            let reconstructed = (&h + &h.adjoint()).scale_real(0.5);
            assert!(reconstructed.max_abs_diff(m.h_sys()) < 1e-15);
            let mut eigs: Vec<f64> = g.eig().unwrap().values.iter().map(|w| w.re).collect();
            eigs.sort_by(f64::total_cmp);
            assert!(eigs[0] > -1e-14);
            if !matches!(params, ModelParams::MirrorRing { .. }) {
                assert_eq!(eigs.iter().filter(|&&x| x > 1e-12).count(), 1);
            }
        }
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(matches!(
            ModelParams::TwoRing { gamma: 0.0, v: c(0.1, 0.0), kappa: 0.0 }.build(),
            Err(ModelError::InvalidParameter(_))
        ));
        assert!(ModelParams::MirrorRing { gamma: 1.0, rho: 1.2, phi: 0.0 }.build().is_err());
        assert!(ModelParams::SingleRing { gamma_wg: 1.0, kappa: -0.1 }.build().is_err());
        let h = CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        assert!(matches!(
            ScatteringModel::new(h, CMat::zeros(2, 1), vec![0], 0.0),
            Err(ModelError::NotHermitian(_))
        ));
        let w = CMat::zeros(1, 1);
        assert!(matches!(
            ScatteringModel::new(CMat::zeros(1, 1), w.clone(), vec![], 0.0),
            Err(ModelError::NoObservedChannels)
        ));
        assert!(matches!(
            ScatteringModel::new(CMat::zeros(1, 1), w, vec![1], 0.0),
            Err(ModelError::ChannelOutOfRange { .. })
        ));
        assert!(Perturbation::localized(2, 2).is_err());
        let skew = CMat::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]);
        assert!(Perturbation::new(skew).is_err());
    }

    #[test]
    fn perturbation_detects_localized_generators() {
        let p = Perturbation::new(CMat::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(p.localized_site(), Some(1));
        let p = Perturbation::new(CMat::from_real_rows(&[&[0.0, 0.0], &[0.0, 2.0]])).unwrap();
        assert_eq!(p.localized_site(), None);
    }
}
