//! Unsigned distance to the point cloud via Godunov fast sweeping, and the
//! weight field `r(x)` derived from it.
//!
//! Distances use the non-periodic metric: the sweep never wraps around the
//! domain edge.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::pointcloud::PointCloud;

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub f: ScalarField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    /// Upper bound on full passes (each pass runs all `2^d` orderings).
    pub max_passes: usize,
    /// Stop once the largest change in a pass falls below this.
    pub tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_passes: 8,
            tol: 1e-6,
        }
    }
}

/// Convergence record for a fast-sweeping solve.
#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    /// Largest decrease seen in each pass. Updates only ever lower a value.
    pub pass_updates: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// `r = 1`.
    Constant,
    /// `r = √f`.
    SqrtF,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" | "1" => Ok(Self::Constant),
            "sqrt_f" | "sqrt-f" | "sqrtf" => Ok(Self::SqrtF),
            other => Err(Error::Config(format!("unknown r mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::SqrtF => "sqrt_f",
        })
    }
}

/// Solves `|∇f| = 1` with `f` seeded from the cloud.
///
/// Every node within one cell (per axis) of a cloud point is fixed to its
/// exact distance to the nearest cloud point; the remaining nodes are
/// filled by Gauss-Seidel sweeps in all `2^d` axis orderings.
pub fn eikonal_fast_sweep(cloud: &PointCloud, spec: &GridSpec, opts: SweepOptions) -> Result<DistanceField> {
    Ok(eikonal_fast_sweep_report(cloud, spec, opts)?.0)
}

pub fn eikonal_fast_sweep_report(
    cloud: &PointCloud,
    spec: &GridSpec,
    opts: SweepOptions,
) -> Result<(DistanceField, SweepReport)> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if cloud.dim() != spec.dim() {
        return Err(Error::GridMismatch(format!(
            "{}D cloud on a {}D grid",
            cloud.dim(),
            spec.dim()
        )));
    }
    let d = spec.dim();
    let dims = spec.dims();
    let mut f = vec![f64::INFINITY; spec.len()];
    let mut fixed = vec![false; spec.len()];

    // Exact distances in a radius-2 box around each point; nodes within the
    // radius-1 box become sources.
    for p in cloud.points() {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for a in 0..d {
            lo[a] = ((p[a] - 2.0).ceil() as i64).max(0);
            hi[a] = ((p[a] + 2.0).floor() as i64).min(dims[a] as i64 - 1);
            if lo[a] > hi[a] {
                lo[a] = 1;
                hi[a] = 0;
            }
        }
        let (k_lo, k_hi) = if d == 3 { (lo[2], hi[2]) } else { (0, 0) };
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in k_lo..=k_hi {
                    let idx = [i as usize, j as usize, k as usize];
                    let mut r2 = 0.0;
                    let mut near = true;
                    for a in 0..d {
                        let delta = idx[a] as f64 - p[a];
                        r2 += delta * delta;
                        near &= delta.abs() <= 1.0;
                    }
                    let n = spec.index(&idx[..d]);
                    let r = r2.sqrt();
                    if r < f[n] {
                        f[n] = r;
                    }
                    if near {
                        fixed[n] = true;
                    }
                }
            }
        }
    }
    for n in 0..spec.len() {
        if !fixed[n] {
            f[n] = f64::INFINITY;
        }
    }

    let mut report = SweepReport::default();
    for _ in 0..opts.max_passes.max(1) {
        let mut max_change = 0.0f64;
        for dirs in 0..(1usize << d) {
            let c = sweep(spec, &mut f, &fixed, dirs);
            max_change = max_change.max(c);
        }
        report.pass_updates.push(max_change);
        if max_change < opts.tol {
            break;
        }
    }
    let f = ScalarField::from_values(spec, f)?;
    Ok((DistanceField { f }, report))
}

/// One Gauss-Seidel sweep; bit `a` of `dirs` reverses axis `a`.
fn sweep(spec: &GridSpec, f: &mut [f64], fixed: &[bool], dirs: usize) -> f64 {
    let d = spec.dim();
    let dims = spec.dims();
    let order = |a: usize, t: usize| if dirs >> a & 1 == 1 { dims[a] - 1 - t } else { t };
    let nk = if d == 3 { dims[2] } else { 1 };
    let mut max_change = 0.0f64;
    for ti in 0..dims[0] {
        let i = order(0, ti);
        for tj in 0..dims[1] {
            let j = order(1, tj);
            for tk in 0..nk {
                let k = if d == 3 { order(2, tk) } else { 0 };
                let idx = [i, j, k];
                let n = spec.index(&idx[..d]);
                if fixed[n] {
                    continue;
                }
                let mut nb = [f64::INFINITY; 3];
                for a in 0..d {
                    let s = spec.stride(a);
                    let mut m = f64::INFINITY;
                    if idx[a] > 0 {
                        m = m.min(f[n - s]);
                    }
                    if idx[a] + 1 < dims[a] {
                        m = m.min(f[n + s]);
                    }
                    nb[a] = m;
                }
                let cand = godunov_update(&mut nb[..d]);
                if cand < f[n] {
                    let change = if f[n].is_finite() { f[n] - cand } else { f64::INFINITY };
                    max_change = max_change.max(change);
                    f[n] = cand;
                }
            }
        }
    }
    max_change
}

/// Upwind solution of `Σ ((x - a_k)^+)² = 1` for unit spacing.
fn godunov_update(nb: &mut [f64]) -> f64 {
    nb.sort_by(|a, b| a.total_cmp(b));
    if !nb[0].is_finite() {
        return f64::INFINITY;
    }
    let mut x = nb[0] + 1.0;
    for m in 2..=nb.len() {
        if x <= nb[m - 1] {
            break;
        }
        let a = &nb[..m];
        let s: f64 = a.iter().sum();
        let s2: f64 = a.iter().map(|v| v * v).sum();
        let mf = m as f64;
        let disc = s * s - mf * (s2 - 1.0);
        x = (s + disc.max(0.0).sqrt()) / mf;
    }
    x
}

/// Exact nearest-point distance at every node, `O(#nodes × #points)`.
pub fn brute_force_distance(cloud: &PointCloud, spec: &GridSpec) -> Result<DistanceField> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let d = spec.dim();
    let f = ScalarField::from_fn(spec, |x| {
        cloud
            .points()
            .iter()
            .map(|p| (0..d).map(|a| (x[a] - p[a]).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    });
    Ok(DistanceField { f })
}

pub fn weight_field(f: &DistanceField, mode: WeightMode) -> ScalarField {
    match mode {
        WeightMode::Constant => f.f.map(|_| 1.0),
        WeightMode::SqrtF => f.f.map(|v| v.max(0.0).sqrt()),
    }
}
