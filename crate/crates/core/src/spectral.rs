//! Resolvents, generalized eigenspaces and the quantities built from them:
//! spectral response strengths, Petermann factors, local densities of states
//! and the resulting upper bounds on the Fisher information.

use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, Perturbation, ScatteringModel};
use crate::numerics::{CMat, LinalgError, C64};

/// Default relative tolerance for grouping eigenvalues into clusters.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Below this overlap `|⟨L|R⟩|` a mode is treated as sitting on an exceptional point.
pub const SELF_ORTHOGONAL_OVERLAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("frequency {omega} lies on a pole of the Green's function")]
    AtPole { omega: f64 },
    #[error("eigenvalue clusters are too close to separate (gap {gap:e}, threshold {threshold:e})")]
    IllConditioned { gap: f64, threshold: f64 },
    #[error("mode is nearly self-orthogonal (|<L|R>| = {overlap:e}); use the spectral response strength")]
    NearDefective { overlap: f64 },
    #[error("eigenvalue of mode {mode} is not simple (gap {gap:e})")]
    Degenerate { mode: usize, gap: f64 },
    #[error("Petermann factor routes disagree: {eigenvector} vs {projector}")]
    Inconsistent { eigenvector: f64, projector: f64 },
    #[error("index {index} out of range ({len})")]
    InvalidIndex { index: usize, len: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `G(ω) = (ω·I − H)⁻¹` at a real frequency.
pub fn greens_function(h: &CMat, omega: f64) -> Result<CMat, SpectralError> {
    resolvent(h, C64::new(omega, 0.0)).map_err(|e| match e {
        SpectralError::Linalg(LinalgError::Singular { .. }) => SpectralError::AtPole { omega },
        other => other,
    })
}

fn resolvent(h: &CMat, z: C64) -> Result<CMat, SpectralError> {
    Ok(h.scale_real(-1.0).shift_diag(z).inverse()?)
}

/// Classification of a cluster of coalescing eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    /// A simple eigenvalue.
    Isolated,
    /// Degenerate eigenvalue with a complete set of eigenvectors.
    Diabolic,
    /// Degenerate eigenvalue with a nonzero nilpotent part.
    Exceptional,
}

/// One generalized eigenspace: `H·P = ω·P + N` on its range.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// Mean of the clustered eigenvalues.
    pub omega: C64,
    /// Algebraic multiplicity `n_l`.
    pub order: usize,
    pub projector: CMat,
    pub nilpotent: CMat,
    /// The eigenvalues as returned by the eigensolver.
    pub eigenvalues: Vec<C64>,
    /// Smallest `k` with `N^k` numerically zero.
    pub nilpotent_index: usize,
    pub kind: PointKind,
}

impl Cluster {
    pub fn decay_rate(&self) -> f64 {
        -self.omega.im
    }

    /// Right-most element of the Kato expansion that survives: `N^{index-1}`.
    pub fn leading_nilpotent_power(&self) -> CMat {
        self.nilpotent.pow(self.nilpotent_index as u32 - 1)
    }

    pub fn petermann(&self) -> f64 {
        self.projector.spectral_norm().powi(2)
    }

    pub fn is_exceptional(&self) -> bool {
        self.kind == PointKind::Exceptional
    }
}

/// `H = Σ_l (ω_l·P_l + N_l)` over all eigenvalue clusters.
#[derive(Debug, Clone)]
pub struct KatoDecomposition {
    clusters: Vec<Cluster>,
    dim: usize,
    scale: f64,
}

impl KatoDecomposition {
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, l: usize) -> Result<&Cluster, SpectralError> {
        self.clusters.get(l).ok_or(SpectralError::InvalidIndex {
            index: l,
            len: self.clusters.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max(1, ‖H‖)`, the scale the clustering tolerance refers to.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Index of the cluster whose eigenvalue is closest to the real frequency `omega`.
    pub fn nearest_cluster(&self, omega: f64) -> usize {
        let z = C64::new(omega, 0.0);
        let mut best = 0;
        for (l, c) in self.clusters.iter().enumerate() {
            if (c.omega - z).norm() < (self.clusters[best].omega - z).norm() {
                best = l;
            }
        }
        best
    }

    /// `Σ_l (ω_l·P_l + N_l)`.
    pub fn reconstruct(&self) -> CMat {
        self.clusters.iter().fold(CMat::zeros(self.dim, self.dim), |acc, c| {
            &(&acc + &c.projector.scale(c.omega)) + &c.nilpotent
        })
    }

    /// Partial-fraction form of the resolvent at complex `z`.
    pub fn resolvent(&self, z: C64) -> CMat {
        let mut g = CMat::zeros(self.dim, self.dim);
        for c in &self.clusters {
            let d = z - c.omega;
            g = &g + &c.projector.scale(1.0 / d);
            let mut power = c.nilpotent.clone();
            let mut denom = d * d;
            for _ in 2..=c.order {
                g = &g + &power.scale(1.0 / denom);
                power = power.matmul(&c.nilpotent);
                denom *= d;
            }
        }
        g
    }
}

/// Groups the spectrum of `h` into clusters and builds projectors and nilpotents.
///
/// A group of `k` eigenvalues counts as one cluster when its diameter is at
/// most `scale·cluster_tol^(1/k)`: an order-`k` exceptional point perturbed by
/// rounding splits by the `k`-th root of that rounding.
pub fn kato_decompose(h: &CMat, cluster_tol: f64) -> Result<KatoDecomposition, SpectralError> {
    let n = h.rows();
    let scale = h.spectral_norm().max(1.0);
    let values = h.eig()?.values;
    let groups = cluster_eigenvalues(&values, scale, cluster_tol)?;

    let means: Vec<C64> = groups
        .iter()
        .map(|g| g.iter().map(|&i| values[i]).sum::<C64>() / g.len() as f64)
        .collect();

    let mut clusters = Vec::with_capacity(groups.len());
    for (l, group) in groups.iter().enumerate() {
        let omega = means[l];
        let others: Vec<C64> = (0..n)
            .filter(|i| !group.contains(i))
            .map(|i| values[i])
            .collect();
        let projector = cluster_projector(h, omega, group.len(), &others);
        let nilpotent = h.shift_diag(-omega).matmul(&projector);
        let eigenvalues: Vec<C64> = group.iter().map(|&i| values[i]).collect();
        let diameter = diameter(&eigenvalues);

        let mut nilpotent_index = 1;
        let mut power = CMat::identity(n);
        for q in 1..group.len() {
            power = power.matmul(&nilpotent);
            let norm = power.spectral_norm();
            let threshold = (1e-8 * scale.powi(q as i32)).max(10.0 * diameter.powi(q as i32));
            if norm > threshold {
                nilpotent_index = q + 1;
            }
        }
        let kind = match (group.len(), nilpotent_index) {
            (1, _) => PointKind::Isolated,
            (_, 1) => PointKind::Diabolic,
            _ => PointKind::Exceptional,
        };
        clusters.push(Cluster {
            omega,
            order: group.len(),
            projector,
            nilpotent,
            eigenvalues,
            nilpotent_index,
            kind,
        });
    }
    Ok(KatoDecomposition {
        clusters,
        dim: n,
        scale,
    })
}

/// [`kato_decompose`] with [`DEFAULT_CLUSTER_TOL`].
pub fn kato_decompose_default(h: &CMat) -> Result<KatoDecomposition, SpectralError> {
    kato_decompose(h, DEFAULT_CLUSTER_TOL)
}

fn diameter(values: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[..i] {
            d = d.max((a - b).norm());
        }
    }
    d
}

fn merge_threshold(scale: f64, tol: f64, size: usize) -> f64 {
    scale * tol.powf(1.0 / size as f64)
}

fn cluster_eigenvalues(
    values: &[C64],
    scale: f64,
    tol: f64,
) -> Result<Vec<Vec<usize>>, SpectralError> {
    let groups = merge_eigenvalues(values, scale, tol);
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            let gap = groups[a]
                .iter()
                .flat_map(|&i| groups[b].iter().map(move |&j| (values[i] - values[j]).norm()))
                .fold(f64::INFINITY, f64::min);
            let threshold = 10.0 * merge_threshold(scale, tol, groups[a].len() + groups[b].len());
            if gap < threshold {
                return Err(SpectralError::IllConditioned { gap, threshold });
            }
        }
    }
    Ok(groups)
}

fn merge_eigenvalues(values: &[C64], scale: f64, tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = (0..values.len()).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let merged: Vec<C64> = groups[a]
                    .iter()
                    .chain(&groups[b])
                    .map(|&i| values[i])
                    .collect();
                let ratio = diameter(&merged) / merge_threshold(scale, tol, merged.len());
                if ratio <= 1.0 && best.is_none_or(|(_, _, r)| ratio < r) {
                    best = Some((a, b, ratio));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let moved = groups.remove(b);
        groups[a].extend(moved);
        groups[a].sort_unstable();
    }
    groups
}

/// Spectral projector of the cluster at `omega` with multiplicity `order`.
///
/// `P = f(H)·g(H)` with `f(z) = Π_k (z − ω_k)` over the remaining eigenvalues
/// and `g` the degree `order − 1` Taylor polynomial of `1/f` at `omega`, so
/// that `P` is the identity on the cluster's generalized eigenspace even when
/// the cluster is defective.
fn cluster_projector(h: &CMat, omega: C64, order: usize, others: &[C64]) -> CMat {
    let n = h.rows();
    if others.is_empty() {
        return CMat::identity(n);
    }
    // Taylor coefficients of Π_k 1/(d_k + t), d_k = ω − ω_k.
    let mut coeffs = vec![C64::new(0.0, 0.0); order];
    coeffs[0] = C64::new(1.0, 0.0);
    for &w in others {
        let d = omega - w;
        let series: Vec<C64> = (0..order)
            .map(|q| {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                sign / d.powu(q as u32 + 1)
            })
            .collect();
        let mut product = vec![C64::new(0.0, 0.0); order];
        for (i, a) in coeffs.iter().enumerate() {
            for (j, b) in series.iter().enumerate().take(order - i) {
                product[i + j] += a * b;
            }
        }
        coeffs = product;
    }
    let f = others
        .iter()
        .fold(CMat::identity(n), |acc, &w| acc.matmul(&h.shift_diag(-w)));
    let shifted = h.shift_diag(-omega);
    let mut g = CMat::zeros(n, n);
    let mut power = CMat::identity(n);
    for (q, c) in coeffs.iter().enumerate() {
        if q > 0 {
            power = power.matmul(&shifted);
        }
        g = &g + &power.scale(*c);
    }
    f.matmul(&g)
}

/// `ξ = ‖N^{n−1}‖` for an exceptional point, `‖P‖ = √K` otherwise.
pub fn spectral_response_strength(
    k: &KatoDecomposition,
    cluster: usize,
) -> Result<f64, SpectralError> {
    let c = k.cluster(cluster)?;
    Ok(if c.is_exceptional() {
        c.leading_nilpotent_power().spectral_norm()
    } else {
        c.projector.spectral_norm()
    })
}

/// Petermann factor `K = 1/|⟨L|R⟩|²` of a simple mode of `h`.
///
/// Cross-checked against `‖P‖²` of the mode's projector whenever the overlap
/// is large enough for both routes to be accurate.
pub fn petermann_factor(h: &CMat, mode: usize) -> Result<f64, SpectralError> {
    let eig = h.eig()?;
    let n = eig.values.len();
    if mode >= n {
        return Err(SpectralError::InvalidIndex { index: mode, len: n });
    }
    let scale = h.spectral_norm().max(1.0);
    let w = eig.values[mode];
    let gap = (0..n)
        .filter(|&k| k != mode)
        .map(|k| (eig.values[k] - w).norm())
        .fold(f64::INFINITY, f64::min);
    let overlap = eig.left_vector(mode).dot(&eig.right_vector(mode)).norm();
    if in_cluster(&eig.values, mode, scale) {
        return Err(if overlap < 1e-4 {
            SpectralError::NearDefective { overlap }
        } else {
            SpectralError::Degenerate { mode, gap }
        });
    }
    if overlap < SELF_ORTHOGONAL_OVERLAP {
        return Err(SpectralError::NearDefective { overlap });
    }
    let eigenvector = 1.0 / (overlap * overlap);
    if overlap > 1e-4 {
        let others: Vec<C64> = (0..n).filter(|&k| k != mode).map(|k| eig.values[k]).collect();
        let projector = cluster_projector(h, w, 1, &others).spectral_norm().powi(2);
        if (projector - eigenvector).abs() > 1e-6 * eigenvector {
            return Err(SpectralError::Inconsistent {
                eigenvector,
                projector,
            });
        }
    }
    Ok(eigenvector)
}

/// Whether eigenvalue `mode` would be grouped with others by [`kato_decompose`].
fn in_cluster(values: &[C64], mode: usize, scale: f64) -> bool {
    merge_eigenvalues(values, scale, DEFAULT_CLUSTER_TOL)
        .iter()
        .any(|g| g.len() > 1 && g.contains(&mode))
}

/// Contribution of one eigenmode to `⟨j|G(ω)|j⟩`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModalTerm {
    pub eigenvalue: C64,
    /// `⟨j|R⟩⟨L|j⟩ / (⟨L|R⟩·(ω − ω_l))`.
    pub green: C64,
}

impl ModalTerm {
    /// Share of the LDOS, `−Im(green)/π`.
    pub fn ldos(&self) -> f64 {
        -self.green.im / std::f64::consts::PI
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LdosSample {
    pub site: usize,
    pub omega: f64,
    pub rho: f64,
    /// Per-mode terms; present only when requested and all modes are simple.
    pub modal_terms: Option<Vec<ModalTerm>>,
}

impl LdosSample {
    /// `Σ_l green_l`, which equals `⟨j|G|j⟩` when the modal expansion is valid.
    pub fn modal_green_sum(&self) -> Option<C64> {
        self.modal_terms
            .as_ref()
            .map(|terms| terms.iter().map(|t| t.green).sum())
    }
}

/// Local density of states `ρ_j(ω) = −Im⟨j|G₀(ω)|j⟩/π`.
pub fn ldos(
    model: &ScatteringModel,
    site: usize,
    omega: f64,
    with_modes: bool,
) -> Result<LdosSample, SpectralError> {
    let n = model.n_modes();
    if site >= n {
        return Err(SpectralError::InvalidIndex { index: site, len: n });
    }
    let h = model.effective_hamiltonian();
    let g = greens_function(&h, omega)?;
    let rho = -g[(site, site)].im / std::f64::consts::PI;
    let modal_terms = if with_modes {
        modal_terms(&h, site, omega)?
    } else {
        None
    };
    Ok(LdosSample {
        site,
        omega,
        rho,
        modal_terms,
    })
}

fn modal_terms(h: &CMat, site: usize, omega: f64) -> Result<Option<Vec<ModalTerm>>, SpectralError> {
    let eig = h.eig()?;
    let n = eig.values.len();
    let scale = h.spectral_norm().max(1.0);
    let mut terms = Vec::with_capacity(n);
    for l in 0..n {
        let w = eig.values[l];
        let simple = !in_cluster(&eig.values, l, scale);
        let r = eig.right_vector(l);
        let lv = eig.left_vector(l);
        let overlap = lv.dot(&r);
        if !simple || overlap.norm() < SELF_ORTHOGONAL_OVERLAP {
            return Ok(None);
        }
        let green = r[site] * lv[site].conj() / (overlap * (C64::new(omega, 0.0) - w));
        terms.push(ModalTerm {
            eigenvalue: w,
            green,
        });
    }
    Ok(Some(terms))
}

/// Bound on `I_max/n̄` for a localized source near one cluster:
/// `16·K/|ω−ω_l|²` for isolated modes and diabolic points,
/// `16·ξ²/|ω−ω_EP|^{2n}` at an exceptional point of order `n`.
pub fn qfi_bound_localized(
    k: &KatoDecomposition,
    cluster: usize,
    omega: f64,
) -> Result<f64, SpectralError> {
    let c = k.cluster(cluster)?;
    let dist = (C64::new(omega, 0.0) - c.omega).norm();
    let strength = spectral_response_strength(k, cluster)?;
    Ok(if c.is_exceptional() {
        16.0 * strength.powi(2) / dist.powi(2 * c.nilpotent_index as i32)
    } else {
        16.0 * strength.powi(2) / dist.powi(2)
    })
}

/// Bound on `I_max/n̄` for an arbitrary perturbation, from submultiplicativity:
/// `16·‖H₁‖²·‖W‖⁴·K²/|ω−ω_l|⁴`, or `16·‖H₁‖²·‖W‖⁴·ξ⁴/|ω−ω_EP|^{4n}`.
pub fn qfi_bound_general(
    model: &ScatteringModel,
    pert: &Perturbation,
    k: &KatoDecomposition,
    cluster: usize,
    omega: f64,
) -> Result<f64, SpectralError> {
    pert.check_dimension(model.n_modes())?;
    let c = k.cluster(cluster)?;
    let dist = (C64::new(omega, 0.0) - c.omega).norm();
    let prefactor = 16.0 * pert.h1().spectral_norm().powi(2) * model.coupling().spectral_norm().powi(4);
    let strength = spectral_response_strength(k, cluster)?;
    if prefactor == 0.0 {
        return Ok(0.0);
    }
    Ok(if c.is_exceptional() {
        prefactor * strength.powi(4) / dist.powi(4 * c.nilpotent_index as i32)
    } else {
        // strength is √K here.
        prefactor * strength.powi(4) / dist.powi(4)
    })
}

/// Ratio of the exceptional-point bound to the isolated-mode bound at equal decay rate.
pub fn enhancement_factor(xi: f64, decay: f64, order: usize) -> f64 {
    xi * xi / decay.powi(2 * (order as i32 - 1))
}

/// Largest spectral response strength a passive system can reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassiveBound {
    /// `(√(2n)·decay)^{n−1}`.
    pub xi_max: f64,
    /// Sharper `4·decay²`, known for `n = 3` only.
    pub xi_max_tight: Option<f64>,
    /// `(2n)^{n−1}`.
    pub ef_cap: f64,
    /// Enhancement cap implied by `xi_max_tight`.
    pub ef_cap_tight: Option<f64>,
}

pub fn passive_xi_bound(decay: f64, order: usize) -> PassiveBound {
    let n = order as f64;
    let xi_max = ((2.0 * n).sqrt() * decay).powi(order as i32 - 1);
    let ef_cap = (2.0 * n).powi(order as i32 - 1);
    let (xi_max_tight, ef_cap_tight) = if order == 3 {
        (Some(4.0 * decay * decay), Some(16.0))
    } else {
        (None, None)
    };
    PassiveBound {
        xi_max,
        xi_max_tight,
        ef_cap,
        ef_cap_tight,
    }
}
