//! The four-substep splitting iteration.
//!
//! Each iteration updates `(ψ, u, q)`:
//! 1. distance-driven ψ step (frozen-coefficient screened solve), then the
//!    pointwise `u` and `q` relaxations;
//! 2. the coupled `u` solve tying `u` to `∇ψ/|∇ψ|` and `q` to `∇·u`;
//! 3. projection of `u` onto unit vectors;
//! 4. the regularizing ψ step driven by `G = η₁q² + η₂r(1−(u·p)²)`.
//!
//! followed by a few reinitialization steps.

use std::time::Instant;

use crate::config::SolverConfig;
use crate::distance::{eikonal_fast_sweep, weight_field, SweepOptions};
use crate::error::{Error, Result};
use crate::grid::{divergence, gradient, laplacian, unit_gradient, GridSpec, ScalarField, Scheme, VectorField};
use crate::levelset::{
    delta_value, energy, extract_zero_level, init_state, reinitialize, Contour, EnergyTerms, EnergyWeights,
    SolverState,
};
use crate::normals::{estimate_normals, NormalField};
use crate::pointcloud::PointCloud;
use crate::spectral::{adjugate3, GradDiv, Spectral};

/// Fields fixed for the duration of a stage.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub f: ScalarField,
    pub normals: NormalField,
    pub r: ScalarField,
}

impl Inputs {
    pub fn p(&self) -> &VectorField {
        &self.normals.p
    }
}

/// Distance, direction and weight fields for `cfg`.
pub fn prepare_inputs(cloud: &PointCloud, spec: &GridSpec, cfg: &SolverConfig) -> Result<Inputs> {
    let opts = SweepOptions {
        max_passes: cfg.sweep_passes,
        ..SweepOptions::default()
    };
    let dist = eikonal_fast_sweep(cloud, spec, opts)?;
    let c_p = cfg.c_p.unwrap_or(spec.dim() + 1);
    let normals = estimate_normals(cloud, spec, cfg.lambda, c_p);
    let r = weight_field(&dist, cfg.r_mode);
    Ok(Inputs { f: dist.f, normals, r })
}

fn weights(cfg: &SolverConfig) -> EnergyWeights {
    EnergyWeights {
        eta0: cfg.eta0,
        eta1: cfg.eta1,
        eta2: cfg.eta2,
        eps: cfg.eps,
    }
}

/// `b = ψ − cΔψ + Δt·s·∇ᶜ·(h ∇ᶜψ/|∇ᶜψ|)` with `s` applied pointwise.
fn frozen_rhs(psi: &ScalarField, c: f64, dt: f64, h: &ScalarField, scale: &ScalarField) -> ScalarField {
    let (n, _) = unit_gradient(psi);
    let mut flux = n;
    for a in 0..flux.dim() {
        for (v, hv) in flux.component_mut(a).iter_mut().zip(h.values()) {
            *v *= hv;
        }
    }
    let div = divergence(&flux, Scheme::Central);
    let lap = laplacian(psi);
    let mut b = psi.clone();
    for (i, bv) in b.values_mut().iter_mut().enumerate() {
        *bv += -c * lap.values()[i] + dt * scale.values()[i] * div.values()[i];
    }
    b
}

/// Substep 1: distance-driven ψ update, then the `u` and `q` relaxations
/// at the new ψ.
pub fn substep1(state: &SolverState, inp: &Inputs, cfg: &SolverConfig, sp: &Spectral) -> Result<SolverState> {
    let spec = state.psi.spec();
    let d = spec.dim();
    let c = cfg.dt * cfg.beta1;
    let f2 = inp.f.map(|v| v * v);
    let delta0 = state.psi.map(|v| cfg.eta0 * delta_value(v, cfg.eps));
    let b = frozen_rhs(&state.psi, c, cfg.dt, &f2, &delta0);
    let psi = sp.solve_scalar(&b, c)?;

    let mag = gradient(&psi, Scheme::Central).norm();
    let mut u = state.u.clone();
    let mut q = state.q.clone();
    let p = inp.p();
    for n in 0..spec.len() {
        let dg = delta_value(psi.values()[n], cfg.eps) * mag.values()[n];
        if cfg.eta2 != 0.0 {
            let w = cfg.dt * cfg.eta2 * inp.r.values()[n] * dg;
            let pv = p.at(n);
            let mut m = [[0.0; 3]; 3];
            for i in 0..d {
                for j in 0..d {
                    m[i][j] = if i == j { cfg.gamma1 } else { 0.0 } - w * pv[i] * pv[j];
                }
            }
            let rhs = state.u.at(n).map(|v| cfg.gamma1 * v);
            let out = pointwise_solve(&m, &rhs, d).ok_or_else(|| Error::SingularPointwise {
                node: spec.unravel(n)[..d].to_vec(),
                det: det(&m, d),
            })?;
            u.set(n, &out[..d]);
        }
        if cfg.eta1 != 0.0 {
            q.values_mut()[n] = cfg.gamma2 * state.q.values()[n] / (cfg.gamma2 + cfg.dt * cfg.eta1 * dg);
        }
    }
    Ok(SolverState {
        psi,
        u,
        q,
        iteration: state.iteration,
    })
}

fn det(m: &[[f64; 3]; 3], d: usize) -> f64 {
    if d == 2 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    } else {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Explicit 2x2 inverse or 3x3 adjugate solve; `None` when `det ≤ 0`.
fn pointwise_solve(m: &[[f64; 3]; 3], b: &[f64; 3], d: usize) -> Option<[f64; 3]> {
    let dt = det(m, d);
    if !(dt > 0.0) {
        return None;
    }
    if d == 2 {
        Some([
            (m[1][1] * b[0] - m[0][1] * b[1]) / dt,
            (m[0][0] * b[1] - m[1][0] * b[0]) / dt,
            0.0,
        ])
    } else {
        let adj = adjugate3(m);
        let mut x = [0.0; 3];
        for (k, row) in adj.iter().enumerate() {
            x[k] = (row[0] * b[0] + row[1] * b[1] + row[2] * b[2]) / dt;
        }
        Some(x)
    }
}

/// Substep 2: solves `(γ₁+Δtα₁)u − (γ₂+Δtα₂)∇ᶜ(∇ᶜ·u) = s` for `u` and
/// sets `q = ∇ᶜ·u`; ψ is unchanged.
pub fn substep2(state: &SolverState, cfg: &SolverConfig, sp: &Spectral) -> Result<SolverState> {
    let (g, _) = unit_gradient(&state.psi);
    let divg = divergence(&g, Scheme::Central);
    let t = state.q.zip_map(&divg, |q, dg| cfg.gamma2 * q + cfg.dt * cfg.alpha2 * dg);
    let grad_t = gradient(&t, Scheme::Central);
    let d = state.psi.spec().dim();
    let comps = (0..d)
        .map(|a| {
            state
                .u
                .component(a)
                .iter()
                .zip(g.component(a))
                .zip(grad_t.component(a))
                .map(|((u, g), gt)| cfg.gamma1 * u + cfg.dt * cfg.alpha1 * g - gt)
                .collect()
        })
        .collect();
    let s = VectorField::from_components(state.psi.spec(), comps)?;
    let k1 = cfg.gamma1 + cfg.dt * cfg.alpha1;
    let k2 = cfg.gamma2 + cfg.dt * cfg.alpha2;
    let u = sp.solve_vector_checked(&s, k1, k2, GradDiv::Central)?.field;
    let q = divergence(&u, Scheme::Central);
    Ok(SolverState {
        psi: state.psi.clone(),
        u,
        q,
        iteration: state.iteration,
    })
}

/// Substep 3: `u ← u/|u|`, with the last axis where `u = 0`.
pub fn substep3(state: &SolverState) -> SolverState {
    let mut u = state.u.clone();
    let d = u.dim();
    for n in 0..u.spec().len() {
        let v = u.at(n);
        let norm = v[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut out = [0.0; 3];
        if norm > 0.0 {
            for a in 0..d {
                out[a] = v[a] / norm;
            }
        } else {
            out[d - 1] = 1.0;
        }
        u.set(n, &out[..d]);
    }
    SolverState {
        psi: state.psi.clone(),
        u,
        q: state.q.clone(),
        iteration: state.iteration,
    }
}

/// `G = η₁q² + η₂r(1−(u·p)²)` pointwise.
pub fn g_field(state: &SolverState, inp: &Inputs, cfg: &SolverConfig) -> ScalarField {
    let d = state.psi.spec().dim();
    let p = inp.p();
    let vals = (0..state.psi.spec().len())
        .map(|n| {
            let (u, pv) = (state.u.at(n), p.at(n));
            let dot: f64 = (0..d).map(|a| u[a] * pv[a]).sum();
            let q = state.q.values()[n];
            cfg.eta1 * q * q + cfg.eta2 * inp.r.values()[n] * (1.0 - dot * dot)
        })
        .collect();
    ScalarField::from_values(state.psi.spec(), vals).expect("same grid")
}

/// Substep 4: regularizing ψ update `(I − Δtβ₂Δ)ψ' = ψ − Δtβ₂Δψ + Δtδ_ε(ψ)∇ᶜ·(G n)`.
pub fn substep4(state: &SolverState, inp: &Inputs, cfg: &SolverConfig, sp: &Spectral) -> Result<SolverState> {
    let c = cfg.dt * cfg.beta2;
    let g = g_field(state, inp, cfg);
    let delta = state.psi.map(|v| delta_value(v, cfg.eps));
    let b = frozen_rhs(&state.psi, c, cfg.dt, &g, &delta);
    let psi = sp.solve_scalar(&b, c)?;
    Ok(SolverState {
        psi,
        u: state.u.clone(),
        q: state.q.clone(),
        iteration: state.iteration,
    })
}

/// One full iteration including reinitialization.
pub fn iterate(state: &SolverState, inp: &Inputs, cfg: &SolverConfig, sp: &Spectral) -> Result<SolverState> {
    let s1 = substep1(state, inp, cfg, sp)?;
    let s2 = substep2(&s1, cfg, sp)?;
    let s3 = substep3(&s2);
    let mut s4 = substep4(&s3, inp, cfg, sp)?;
    s4.psi = reinitialize(&s4.psi, cfg.reinit_iters);
    s4.iteration = state.iteration + 1;
    if !s4.psi.is_finite() {
        return Err(Error::Divergence {
            iteration: s4.iteration,
        });
    }
    Ok(s4)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub iteration: usize,
    pub terms: EnergyTerms,
}

impl EnergyRecord {
    pub fn total(&self) -> f64 {
        self.terms.total()
    }
}

/// Writes the energy trace as CSV.
pub fn write_trace<W: std::io::Write>(mut w: W, trace: &[EnergyRecord]) -> std::io::Result<()> {
    writeln!(w, "iteration,E_total,E_dist,E_curv,E_normal")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iteration,
            r.total(),
            r.terms.dist,
            r.terms.curv,
            r.terms.normal
        )?;
    }
    Ok(())
}

/// Mean relative energy change over the last `window` iterations, once
/// that many are available.
pub fn mean_relative_change(trace: &[EnergyRecord], window: usize) -> Option<f64> {
    if trace.len() < window + 1 {
        return None;
    }
    let tail = &trace[trace.len() - window - 1..];
    let sum: f64 = tail
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].total(), w[1].total());
            (b - a).abs() / a.abs().max(f64::MIN_POSITIVE)
        })
        .sum();
    Some(sum / window as f64)
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub spec: GridSpec,
    pub state: SolverState,
    pub trace: Vec<EnergyRecord>,
    pub contour: Contour,
    /// Iteration at which the convergence test first passed in the final
    /// stage, if it did.
    pub converged_at: Option<usize>,
    pub seconds: f64,
}

/// Grid for `cloud`: the configured size, or one wide enough to hold the
/// cloud with a margin equal to its distance from the origin on each axis
/// (at least `pad + λ + 2` cells).
pub fn grid_for(cloud: &PointCloud, cfg: &SolverConfig) -> Result<GridSpec> {
    if let Some(g) = &cfg.grid {
        return GridSpec::new(g);
    }
    let (lo, hi) = cloud.bounds().ok_or(Error::EmptyCloud)?;
    let margin = (cfg.pad + cfg.lambda + 2.0).ceil();
    let dims: Vec<usize> = (0..cloud.dim())
        .map(|a| (hi[a].ceil() + lo[a].floor().max(margin)).max(4.0) as usize)
        .collect();
    GridSpec::new(&dims)
}

/// Observer hook called after every iteration with the new state.
pub type Observer<'a> = dyn FnMut(&SolverState, &EnergyRecord) + 'a;

/// Runs the full schedule on `cloud`.
pub fn run(cloud: &PointCloud, spec: &GridSpec, cfg: &SolverConfig) -> Result<RunOutput> {
    run_observed(cloud, spec, cfg, &mut |_, _| {})
}

pub fn run_observed(
    cloud: &PointCloud,
    spec: &GridSpec,
    cfg: &SolverConfig,
    observer: &mut Observer<'_>,
) -> Result<RunOutput> {
    let start = Instant::now();
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    cloud.check_fits(spec)?;
    let stages = cfg.stage_configs()?;
    let sp = Spectral::new(spec);
    let mut state = init_state(cloud, spec, cfg.pad)?;
    let mut inputs: Option<(Inputs, (f64, Option<usize>, crate::distance::WeightMode, usize))> = None;
    let mut trace = Vec::new();
    let mut converged_at = None;
    let mut done = 0usize;
    for (k, (scfg, iters)) in stages.iter().enumerate() {
        let key = (scfg.lambda, scfg.c_p, scfg.r_mode, scfg.sweep_passes);
        if inputs.as_ref().is_none_or(|(_, k)| *k != key) {
            inputs = Some((prepare_inputs(cloud, spec, scfg)?, key));
        }
        let inp = &inputs.as_ref().expect("prepared").0;
        let w = weights(scfg);
        let mut stage_trace = vec![EnergyRecord {
            iteration: state.iteration,
            terms: energy(&state.psi, &inp.f, inp.p(), &inp.r, &w),
        }];
        if k == 0 {
            trace.push(stage_trace[0]);
        }
        converged_at = None;
        let budget = (*iters).min(cfg.max_iters - done);
        for _ in 0..budget {
            state = iterate(&state, inp, scfg, &sp)?;
            let rec = EnergyRecord {
                iteration: state.iteration,
                terms: energy(&state.psi, &inp.f, inp.p(), &inp.r, &w),
            };
            observer(&state, &rec);
            trace.push(rec);
            stage_trace.push(rec);
            done += 1;
            if mean_relative_change(&stage_trace, scfg.conv_window).is_some_and(|m| m < scfg.tol) {
                converged_at = Some(state.iteration);
                break;
            }
        }
    }
    let contour = extract_zero_level(&state.psi);
    Ok(RunOutput {
        spec: spec.clone(),
        state,
        trace,
        contour,
        converged_at,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normals::NormalSource;

    fn circle_psi(spec: &GridSpec) -> ScalarField {
        ScalarField::from_fn(spec, |x| (x[0] - 16.0).hypot(x[1] - 16.0) - 8.0)
    }

    fn inputs_with(spec: &GridSpec, p: VectorField) -> Inputs {
        Inputs {
            f: ScalarField::from_fn(spec, |x| ((x[0] - 16.0).hypot(x[1] - 16.0) - 8.0).abs()),
            normals: NormalField {
                p,
                source: vec![NormalSource::Pca; spec.len()],
            },
            r: ScalarField::constant(spec, 1.0),
        }
    }

    #[test]
    fn pointwise_diagonal_case() {
        let m = [[50.0, 0.0, 0.0], [0.0, 100.0, 0.0], [0.0; 3]];
        let x = pointwise_solve(&m, &[100.0, 100.0, 0.0], 2).unwrap();
        assert_eq!(&x[..2], &[2.0, 1.0]);
        let m = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]];
        assert!(pointwise_solve(&m, &[1.0, 1.0, 0.0], 2).is_none());
    }

    #[test]
    fn eta2_zero_keeps_u() {
        let spec = GridSpec::new(&[32, 32]).unwrap();
        let st = SolverState::from_psi(circle_psi(&spec));
        let mut cfg = SolverConfig {
            eta2: 0.0,
            ..SolverConfig::default()
        };
        let sp = Spectral::new(&spec);
        let inp = inputs_with(&spec, VectorField::constant(&spec, &[1.0, 0.0]));
        let out = substep1(&st, &inp, &cfg, &sp).unwrap();
        assert_eq!(out.u.components(), st.u.components());
        cfg.eta1 = 0.0;
        cfg.eta2 = 1.0;
        let out = substep1(&st, &inp, &cfg, &sp).unwrap();
        assert_eq!(out.q.values(), st.q.values());
    }

    #[test]
    fn singular_node_reported() {
        let spec = GridSpec::new(&[32, 32]).unwrap();
        let st = SolverState::from_psi(circle_psi(&spec));
        let cfg = SolverConfig {
            eta2: 1e6,
            ..SolverConfig::default()
        };
        let sp = Spectral::new(&spec);
        let inp = inputs_with(&spec, VectorField::constant(&spec, &[1.0, 0.0]));
        match substep1(&st, &inp, &cfg, &sp) {
            Err(Error::SingularPointwise { node, det }) => {
                assert_eq!(node.len(), 2);
                assert!(det <= 0.0);
            }
            other => panic!("expected a singular node, got {other:?}"),
        }
    }

    #[test]
    fn substep3_cases() {
        let spec = GridSpec::new(&[4, 4]).unwrap();
        let mut u = VectorField::constant(&spec, &[3.0, 4.0]);
        u.set(5, &[0.0, 0.0]);
        let st = SolverState {
            psi: ScalarField::zeros(&spec),
            u,
            q: ScalarField::zeros(&spec),
            iteration: 0,
        };
        let out = substep3(&st);
        assert_eq!(&out.u.at(0)[..2], &[0.6, 0.8]);
        assert_eq!(&out.u.at(5)[..2], &[0.0, 1.0]);
        let again = substep3(&out);
        for n in 0..spec.len() {
            let (a, b) = (again.u.at(n), out.u.at(n));
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn relative_change_window() {
        let rec = |i: usize, e: f64| EnergyRecord {
            iteration: i,
            terms: EnergyTerms {
                dist: e,
                curv: 0.0,
                normal: 0.0,
            },
        };
        let t: Vec<_> = (0..5).map(|i| rec(i, 100.0 - i as f64)).collect();
        assert!(mean_relative_change(&t, 10).is_none());
        let m = mean_relative_change(&t, 2).unwrap();
        assert!((m - 0.5 * (1.0 / 98.0 + 1.0 / 97.0)).abs() < 1e-15);
    }
}
