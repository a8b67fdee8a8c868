//! FFT-based exact inverses of the constant-coefficient periodic operators
//! that appear in the implicit substeps.
//!
//! Transform pair: unnormalized forward DFT, inverse scaled by `1 / #nodes`.
//! Symbols use `2 - 2cos z = 4 sin²(z/2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};

/// Which discrete grad-div pair the vector system is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradDiv {
    /// `∇⁺(∇⁻·u)`.
    ForwardBackward,
    /// `∇ᶜ(∇ᶜ·u)`.
    Central,
}

/// Cached FFT plans for one grid shape.
pub struct Spectral {
    spec: GridSpec,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("spec", &self.spec).finish()
    }
}

/// Output of a solve plus the largest imaginary part discarded when taking
/// the real part.
#[derive(Clone, Debug)]
pub struct Solved<T> {
    pub field: T,
    pub max_imag: f64,
}

impl Spectral {
    pub fn new(spec: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = spec
            .dims()
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inverse = spec
            .dims()
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();
        Self {
            spec: spec.clone(),
            forward,
            inverse,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let spec = &self.spec;
        let plans = if inverse { &self.inverse } else { &self.forward };
        let d = spec.dim();
        // last axis is contiguous
        plans[d - 1].process(data);
        let mut line = Vec::new();
        for a in 0..d - 1 {
            let n = spec.dims()[a];
            let stride = spec.stride(a);
            line.resize(n, Complex64::new(0.0, 0.0));
            let block = n * stride;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for (k, l) in line.iter_mut().enumerate() {
                        *l = data[start + k * stride];
                    }
                    plans[a].process(&mut line);
                    for (k, l) in line.iter().enumerate() {
                        data[start + k * stride] = *l;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / data.len() as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    pub fn fft(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    pub fn ifft(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut data, true);
        data
    }

    /// Angular frequencies `z_k = 2π i_k / N_k` of flat mode index `n`.
    fn frequencies(&self, n: usize) -> [f64; 3] {
        let idx = self.spec.unravel(n);
        let mut z = [0.0; 3];
        for a in 0..self.spec.dim() {
            z[a] = 2.0 * PI * idx[a] as f64 / self.spec.dims()[a] as f64;
        }
        z
    }

    /// Fourier symbol of `I - c ∇⁻·∇⁺` at flat mode index `n`.
    pub fn helmholtz_symbol(&self, c: f64, n: usize) -> f64 {
        let z = self.frequencies(n);
        1.0 + 4.0 * c * z[..self.spec.dim()].iter().map(|z| (z / 2.0).sin().powi(2)).sum::<f64>()
    }

    /// Solves `(I - c ∇⁻·∇⁺) ψ = b`.
    pub fn solve_scalar(&self, b: &ScalarField, c: f64) -> Result<ScalarField> {
        Ok(self.solve_scalar_checked(b, c)?.field)
    }

    pub fn solve_scalar_checked(&self, b: &ScalarField, c: f64) -> Result<Solved<ScalarField>> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "screening coefficient must be positive, got {c}"
            )));
        }
        self.check_grid(b.spec())?;
        let mut hat = self.fft(b.values());
        for (n, h) in hat.iter_mut().enumerate() {
            *h /= self.helmholtz_symbol(c, n);
        }
        let out = self.ifft(hat);
        let max_imag = out.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        let field = ScalarField::from_values(b.spec(), out.iter().map(|v| v.re).collect())?;
        Ok(Solved { field, max_imag })
    }

    /// Per-axis symbols `(σ_out, σ_in)` of the grad and div factors.
    fn grad_div_factors(&self, n: usize, op: GradDiv) -> ([Complex64; 3], [Complex64; 3]) {
        let z = self.frequencies(n);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut inn = out;
        for a in 0..self.spec.dim() {
            let e = Complex64::from_polar(1.0, z[a]);
            match op {
                GradDiv::ForwardBackward => {
                    out[a] = e - 1.0;
                    inn[a] = 1.0 - e.conj();
                }
                GradDiv::Central => {
                    let s = Complex64::new(0.0, z[a].sin());
                    out[a] = s;
                    inn[a] = s;
                }
            }
        }
        (out, inn)
    }

    /// Symbol matrix `a_kl = κ₁ δ_kl - κ₂ σ_out,k σ_in,l` at flat mode `n`.
    pub fn vector_symbol(&self, kappa1: f64, kappa2: f64, n: usize, op: GradDiv) -> [[Complex64; 3]; 3] {
        let (so, si) = self.grad_div_factors(n, op);
        let d = self.spec.dim();
        let mut a = [[Complex64::new(0.0, 0.0); 3]; 3];
        for k in 0..d {
            for l in 0..d {
                a[k][l] = -kappa2 * so[k] * si[l];
                if k == l {
                    a[k][l] += kappa1;
                }
            }
        }
        a
    }

    /// Solves `(κ₁ I - κ₂ ∇⁺(∇⁻·)) u = s`.
    pub fn solve_vector(&self, s: &VectorField, kappa1: f64, kappa2: f64) -> Result<VectorField> {
        Ok(self
            .solve_vector_checked(s, kappa1, kappa2, GradDiv::ForwardBackward)?
            .field)
    }

    pub fn solve_vector_checked(
        &self,
        s: &VectorField,
        kappa1: f64,
        kappa2: f64,
        op: GradDiv,
    ) -> Result<Solved<VectorField>> {
        if !(kappa1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa1 must be positive, got {kappa1}"
            )));
        }
        if !(kappa2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa2 must be non-negative, got {kappa2}"
            )));
        }
        self.check_grid(s.spec())?;
        let d = self.spec.dim();
        let hats: Vec<Vec<Complex64>> = (0..d).map(|a| self.fft(s.component(a))).collect();
        let mut sol = vec![vec![Complex64::new(0.0, 0.0); self.spec.len()]; d];
        for n in 0..self.spec.len() {
            let a = self.vector_symbol(kappa1, kappa2, n, op);
            let rhs = [
                hats[0][n],
                hats[1][n],
                if d == 3 { hats[2][n] } else { Complex64::new(0.0, 0.0) },
            ];
            let x = if d == 2 { solve2(&a, &rhs) } else { solve3(&a, &rhs) };
            for k in 0..d {
                sol[k][n] = x[k];
            }
        }
        let mut max_imag = 0.0f64;
        let mut comps = Vec::with_capacity(d);
        for c in sol {
            let out = self.ifft(c);
            max_imag = out.iter().fold(max_imag, |m, v| m.max(v.im.abs()));
            comps.push(out.iter().map(|v| v.re).collect());
        }
        Ok(Solved {
            field: VectorField::from_components(s.spec(), comps)?,
            max_imag,
        })
    }

    fn check_grid(&self, spec: &GridSpec) -> Result<()> {
        if spec != &self.spec {
            return Err(Error::GridMismatch(format!(
                "plan for {:?}, field on {:?}",
                self.spec.dims(),
                spec.dims()
            )));
        }
        Ok(())
    }
}

fn solve2(a: &[[Complex64; 3]; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    assert!(det.norm() > 0.0, "singular 2x2 frequency system");
    [
        (a[1][1] * b[0] - a[0][1] * b[1]) / det,
        (-a[1][0] * b[0] + a[0][0] * b[1]) / det,
        Complex64::new(0.0, 0.0),
    ]
}

fn solve3(a: &[[Complex64; 3]; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    let adj = adjugate3(a);
    let det = a[0][0] * adj[0][0] + a[0][1] * adj[1][0] + a[0][2] * adj[2][0];
    assert!(det.norm() > 0.0, "singular 3x3 frequency system");
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for (k, row) in adj.iter().enumerate() {
        x[k] = (row[0] * b[0] + row[1] * b[1] + row[2] * b[2]) / det;
    }
    x
}

/// Adjugate (transposed cofactor matrix) of a 3x3 matrix over any field.
pub(crate) fn adjugate3<T>(m: &[[T; 3]; 3]) -> [[T; 3]; 3]
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Sub<Output = T>,
{
    [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ]
}

/// Convenience wrapper that plans and solves in one call.
pub fn solve_scalar_helmholtz(b: &ScalarField, c: f64) -> Result<ScalarField> {
    Spectral::new(b.spec()).solve_scalar(b, c)
}

/// Convenience wrapper that plans and solves in one call.
pub fn solve_vector_system(s: &VectorField, kappa1: f64, kappa2: f64) -> Result<VectorField> {
    Spectral::new(s.spec()).solve_vector(s, kappa1, kappa2)
}

/// Applies `κ₁ u - κ₂ ∇_out(∇_in·u)` in real space with finite differences.
pub fn apply_vector_operator(u: &VectorField, kappa1: f64, kappa2: f64, op: GradDiv) -> VectorField {
    use crate::grid::{divergence, gradient, Scheme};
    let (outer, inner) = match op {
        GradDiv::ForwardBackward => (Scheme::Forward, Scheme::Backward),
        GradDiv::Central => (Scheme::Central, Scheme::Central),
    };
    let gd = gradient(&divergence(u, inner), outer);
    let spec = u.spec();
    let comps = (0..u.dim())
        .map(|a| {
            u.component(a)
                .iter()
                .zip(gd.component(a))
                .map(|(x, g)| kappa1 * x - kappa2 * g)
                .collect()
        })
        .collect();
    VectorField::from_components(spec, comps).expect("same grid")
}

/// Applies `(I - c ∇⁻·∇⁺) ψ` in real space.
pub fn apply_scalar_operator(psi: &ScalarField, c: f64) -> ScalarField {
    let lap = crate::grid::laplacian(psi);
    psi.zip_map(&lap, |p, l| p - c * l)
}
