//! Level-set state: box initialization, smoothed delta, reinitialization
//! and the discrete energy.

use crate::error::{Error, Result};
use crate::grid::{divergence, unit_gradient, GridSpec, ScalarField, Scheme, VectorField};
use crate::pointcloud::PointCloud;

pub use crate::contour::{extract_zero_level, Contour};

#[derive(Clone, Debug)]
pub struct SolverState {
    pub psi: ScalarField,
    pub u: VectorField,
    pub q: ScalarField,
    pub iteration: usize,
}

impl SolverState {
    /// Builds a state from `psi` with `u = ∇ᶜψ/|∇ᶜψ|` and `q = ∇ᶜ·u`.
    pub fn from_psi(psi: ScalarField) -> Self {
        let (u, _) = unit_gradient(&psi);
        let q = divergence(&u, Scheme::Central);
        SolverState {
            psi,
            u,
            q,
            iteration: 0,
        }
    }
}

/// Signed distance to the axis-aligned box `[lo, hi]`, negative inside.
pub fn box_sdf(x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut outside = 0.0;
    let mut inside = f64::NEG_INFINITY;
    for a in 0..x.len() {
        let c = 0.5 * (lo[a] + hi[a]);
        let h = 0.5 * (hi[a] - lo[a]);
        let q = (x[a] - c).abs() - h;
        outside += q.max(0.0).powi(2);
        inside = inside.max(q);
    }
    outside.sqrt() + inside.min(0.0)
}

/// Initial state: ψ⁰ is the signed distance to the cloud's bounding box
/// grown by `pad` cells on every side.
pub fn init_state(cloud: &PointCloud, spec: &GridSpec, pad: f64) -> Result<SolverState> {
    let (mut lo, mut hi) = cloud.bounds().ok_or(Error::EmptyCloud)?;
    if cloud.dim() != spec.dim() {
        return Err(Error::GridMismatch(format!(
            "cloud is {}-dimensional, grid is {}-dimensional",
            cloud.dim(),
            spec.dim()
        )));
    }
    for a in 0..spec.dim() {
        lo[a] -= pad;
        hi[a] += pad;
        let top = (spec.dims()[a] - 1) as f64;
        if lo[a] < 0.0 || hi[a] > top {
            return Err(Error::OutOfDomain(format!(
                "initial box [{:.3}, {:.3}] on axis {a} exceeds [0, {top}]",
                lo[a], hi[a]
            )));
        }
    }
    let d = spec.dim();
    let psi = ScalarField::from_fn(spec, |x| box_sdf(x, &lo[..d], &hi[..d]));
    Ok(SolverState::from_psi(psi))
}

/// `ε/(π(ε²+φ²))` pointwise.
pub fn delta_eps(psi: &ScalarField, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    Ok(psi.map(|p| delta_value(p, eps)))
}

#[inline]
pub(crate) fn delta_value(phi: f64, eps: f64) -> f64 {
    eps / (std::f64::consts::PI * (eps * eps + phi * phi))
}

/// Pseudo-time step of the reinitialization flow.
pub const REINIT_TAU: f64 = 0.5;

/// Explicit steps of `φ_τ = −S(ψ)(|∇φ|−1)` with Godunov upwinding and the
/// smoothed sign `S(ψ) = ψ/√(ψ²+1)` of the input field.
///
/// The stencil does not wrap: a difference that would cross the domain edge
/// is replaced by the one on the other side (linear extrapolation), so
/// linear signed distance functions are fixed points.
pub fn reinitialize(psi: &ScalarField, iters: usize) -> ScalarField {
    if iters == 0 {
        return psi.clone();
    }
    let spec = psi.spec().clone();
    let d = spec.dim();
    let sign: Vec<f64> = psi.values().iter().map(|&p| p / (p * p + 1.0).sqrt()).collect();
    let mut phi = psi.values().to_vec();
    let mut next = phi.clone();
    for _ in 0..iters {
        for n in 0..spec.len() {
            let s = sign[n];
            if s == 0.0 {
                next[n] = phi[n];
                continue;
            }
            let mut g2 = 0.0;
            for a in 0..d {
                let c = spec.coord(n, a);
                let m = spec.dims()[a];
                let back = (c > 0).then(|| phi[n] - phi[n - spec.stride(a)]);
                let fwd = (c + 1 < m).then(|| phi[n + spec.stride(a)] - phi[n]);
                let (dm, dp) = match (back, fwd) {
                    (Some(b), Some(f)) => (b, f),
                    (Some(b), None) => (b, b),
                    (None, Some(f)) => (f, f),
                    (None, None) => (0.0, 0.0),
                };
                g2 += if s > 0.0 {
                    dm.max(0.0).powi(2).max(dp.min(0.0).powi(2))
                } else {
                    dm.min(0.0).powi(2).max(dp.max(0.0).powi(2))
                };
            }
            next[n] = phi[n] - REINIT_TAU * s * (g2.sqrt() - 1.0);
        }
        std::mem::swap(&mut phi, &mut next);
    }
    ScalarField::from_values(&spec, phi).expect("same grid")
}

/// The three weighted terms of the energy and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyTerms {
    pub dist: f64,
    pub curv: f64,
    pub normal: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.dist + self.curv + self.normal
    }
}

/// Weights entering [`energy`].
#[derive(Clone, Copy, Debug)]
pub struct EnergyWeights {
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eps: f64,
}

/// Discrete energy of `psi`:
/// `Σ [η₀f² + (η₁/2)κ² + (η₂/2)r(1−(p·n)²)] δ_ε(ψ)|∇ᶜψ|` with
/// `n = ∇ᶜψ/|∇ᶜψ|` and `κ = ∇ᶜ·n`.
pub fn energy(
    psi: &ScalarField,
    f: &ScalarField,
    p: &VectorField,
    r: &ScalarField,
    w: &EnergyWeights,
) -> EnergyTerms {
    let (n, mag) = unit_gradient(psi);
    let kappa = divergence(&n, Scheme::Central);
    let d = psi.spec().dim();
    let mut t = EnergyTerms::default();
    for i in 0..psi.spec().len() {
        let weight = delta_value(psi.values()[i], w.eps) * mag.values()[i];
        if weight == 0.0 {
            continue;
        }
        let dot: f64 = (0..d).map(|a| p.component(a)[i] * n.component(a)[i]).sum();
        let fv = f.values()[i];
        let k = kappa.values()[i];
        t.dist += w.eta0 * fv * fv * weight;
        t.curv += 0.5 * w.eta1 * k * k * weight;
        t.normal += 0.5 * w.eta2 * r.values()[i] * (1.0 - dot * dot) * weight;
    }
    t
}
