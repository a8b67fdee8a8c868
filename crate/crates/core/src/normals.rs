//! PCA direction field: at every node, the covariance eigenvector for the
//! smallest eigenvalue of the cloud points inside the node's window, with a
//! radial fallback about the domain center where the window is too sparse.
//!
//! Window sums (count, Σz, Σzzᵀ) for all nodes are gathered at once with a
//! d-dimensional difference array and prefix sums, so cost is linear in
//! grid size plus cloud size regardless of the window width.

use crate::grid::{GridSpec, VectorField};
use crate::pointcloud::PointCloud;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalSource {
    Pca,
    Fallback,
}

#[derive(Clone, Debug)]
pub struct NormalField {
    pub p: VectorField,
    pub source: Vec<NormalSource>,
}

impl NormalField {
    pub fn fallback_count(&self) -> usize {
        self.source
            .iter()
            .filter(|&&s| s == NormalSource::Fallback)
            .count()
    }
}

/// Eigen-decomposition summary of a symmetric 2x2 or 3x3 matrix.
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    /// Eigenvalues in ascending order (trailing slot unused in 2D).
    pub values: [f64; 3],
    /// Unit eigenvector for `values[0]`.
    pub smallest: [f64; 3],
    /// The smallest eigenvalue is (numerically) repeated.
    pub degenerate: bool,
}

const TIE_TOL: f64 = 1e-9;

/// Unit eigenvector for the smallest eigenvalue of a symmetric matrix
/// (`d = 2` or `3`, only the leading `d×d` block is read). A repeated
/// smallest eigenvalue resolves to the canonical axis with the largest
/// projection onto its eigenspace, preferring the last axis.
pub fn smallest_eigvec_sym(m: &[[f64; 3]; 3], d: usize) -> SymEigen {
    match d {
        2 => eig2(m[0][0], m[0][1], m[1][1]),
        3 => eig3(m),
        _ => panic!("only 2x2 and 3x3 matrices are supported"),
    }
}

fn eig2(a: f64, b: f64, c: f64) -> SymEigen {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let scale = a.abs().max(c.abs()).max(b.abs());
    let lo = mean - rad;
    let hi = mean + rad;
    if rad <= TIE_TOL * scale || scale == 0.0 {
        return SymEigen {
            values: [lo, hi, 0.0],
            smallest: [0.0, 1.0, 0.0],
            degenerate: true,
        };
    }
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    SymEigen {
        values: [lo, hi, 0.0],
        smallest: [-s, co, 0.0],
        degenerate: false,
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Eigenvector for eigenvalue `lam`, from the best-conditioned cross product
/// of the rows of `m - lam I`.
fn eigvec_for(m: &[[f64; 3]; 3], lam: f64) -> Option<[f64; 3]> {
    let mut r = *m;
    for k in 0..3 {
        r[k][k] -= lam;
    }
    let cands = [cross(&r[0], &r[1]), cross(&r[0], &r[2]), cross(&r[1], &r[2])];
    let best = cands
        .iter()
        .max_by(|a, b| norm3(a).total_cmp(&norm3(b)))
        .copied()?;
    let n = norm3(&best);
    let scale = r.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if n <= 1e-12 * scale * scale || n == 0.0 {
        return None;
    }
    Some([best[0] / n, best[1] / n, best[2] / n])
}

fn eig3(m: &[[f64; 3]; 3]) -> SymEigen {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut vals;
    if p1 <= (1e-15 * scale).powi(2) {
        vals = [m[0][0], m[1][1], m[2][2]];
    } else {
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = *m;
        for (k, row) in b.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v /= p;
            }
            row[k] -= q / p;
        }
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        vals = [e3, 3.0 * q - e1 - e3, e1];
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    let spread = scale.max(f64::MIN_POSITIVE);
    let tie_low = vals[1] - vals[0] <= TIE_TOL * spread;
    if !tie_low {
        if let Some(v) = eigvec_for(m, vals[0]) {
            return SymEigen {
                values: vals,
                smallest: v,
                degenerate: false,
            };
        }
    }
    // Repeated smallest eigenvalue: pick the canonical axis with the largest
    // projection onto the eigenspace.
    let tie_all = vals[2] - vals[0] <= TIE_TOL * spread;
    let smallest = if tie_all || scale == 0.0 {
        [0.0, 0.0, 1.0]
    } else {
        match eigvec_for(m, vals[2]) {
            Some(top) => {
                let mut best = [0.0, 0.0, 1.0];
                let mut best_norm = -1.0;
                for k in (0..3).rev() {
                    let mut e = [0.0; 3];
                    e[k] = 1.0;
                    let dot = top[k];
                    let proj = [e[0] - dot * top[0], e[1] - dot * top[1], e[2] - dot * top[2]];
                    let n = norm3(&proj);
                    if n > best_norm + 1e-12 {
                        best_norm = n;
                        best = [proj[0] / n, proj[1] / n, proj[2] / n];
                    }
                }
                best
            }
            None => [0.0, 0.0, 1.0],
        }
    };
    SymEigen {
        values: vals,
        smallest,
        degenerate: true,
    }
}

/// Flips `v` so its first component with magnitude above 1e-12 is positive.
pub fn canonical_sign(v: &mut [f64]) {
    if let Some(&c) = v.iter().find(|c| c.abs() > 1e-12) {
        if c < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Radial unit direction `(x - x̄)/|x - x̄|`; the last axis at `x̄` itself.
pub fn radial_direction(x: &[f64], center: &[f64]) -> [f64; 3] {
    let mut v = [0.0; 3];
    let mut n2 = 0.0;
    for a in 0..x.len() {
        v[a] = x[a] - center[a];
        n2 += v[a] * v[a];
    }
    if n2 == 0.0 {
        let mut e = [0.0; 3];
        e[x.len() - 1] = 1.0;
        return e;
    }
    let n = n2.sqrt();
    for c in v.iter_mut() {
        *c /= n;
    }
    v
}

/// Per-node window statistics: count, Σz, and the upper triangle of Σzzᵀ,
/// with coordinates taken relative to `origin`.
struct WindowSums {
    channels: usize,
    data: Vec<f64>,
}

fn window_sums(cloud: &PointCloud, spec: &GridSpec, lambda: f64, origin: &[f64]) -> WindowSums {
    let d = spec.dim();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let channels = 1 + d + pairs.len();
    // difference array on a grid padded by one node per axis
    let pdims: Vec<usize> = spec.dims().iter().map(|n| n + 1).collect();
    let mut pstride = vec![1; d];
    for a in (0..d - 1).rev() {
        pstride[a] = pstride[a + 1] * pdims[a + 1];
    }
    let plen: usize = pdims.iter().product();
    let mut diff = vec![0.0; plen * channels];
    let mut vals = vec![0.0; channels];
    for p in cloud.points() {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut empty = false;
        for a in 0..d {
            let l = (p[a] - lambda).ceil().max(0.0);
            let h = (p[a] + lambda).floor().min((spec.dims()[a] - 1) as f64);
            if l > h {
                empty = true;
                break;
            }
            lo[a] = l as usize;
            hi[a] = h as usize + 1;
        }
        if empty {
            continue;
        }
        let z: Vec<f64> = (0..d).map(|a| p[a] - origin[a]).collect();
        vals[0] = 1.0;
        for a in 0..d {
            vals[1 + a] = z[a];
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            vals[1 + d + k] = z[a] * z[b];
        }
        for corner in 0..(1usize << d) {
            let mut idx = 0;
            let mut sign = 1.0;
            for a in 0..d {
                if corner >> a & 1 == 1 {
                    idx += hi[a] * pstride[a];
                    sign = -sign;
                } else {
                    idx += lo[a] * pstride[a];
                }
            }
            let base = idx * channels;
            for c in 0..channels {
                diff[base + c] += sign * vals[c];
            }
        }
    }
    // prefix sums along each axis
    for a in 0..d {
        let s = pstride[a];
        for n in 0..plen {
            let coord = (n / s) % pdims[a];
            if coord == 0 {
                continue;
            }
            let (prev, cur) = ((n - s) * channels, n * channels);
            for c in 0..channels {
                diff[cur + c] += diff[prev + c];
            }
        }
    }
    // drop the padding
    let mut data = vec![0.0; spec.len() * channels];
    for n in 0..spec.len() {
        let idx = spec.unravel(n);
        let pn: usize = (0..d).map(|a| idx[a] * pstride[a]).sum();
        data[n * channels..(n + 1) * channels]
            .copy_from_slice(&diff[pn * channels..(pn + 1) * channels]);
    }
    WindowSums { channels, data }
}

/// Estimates the direction field over the whole grid.
///
/// Window membership is `|z_k - x_k| ≤ λ` on every axis. Nodes with fewer
/// than `c_p` points, or whose covariance has a repeated smallest
/// eigenvalue, take the radial fallback about the domain center.
pub fn estimate_normals(cloud: &PointCloud, spec: &GridSpec, lambda: f64, c_p: usize) -> NormalField {
    let d = spec.dim();
    let center = spec.center();
    let sums = window_sums(cloud, spec, lambda, &center);
    let mut p = VectorField::zeros(spec);
    let mut source = vec![NormalSource::Fallback; spec.len()];
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    for n in 0..spec.len() {
        let s = &sums.data[n * sums.channels..(n + 1) * sums.channels];
        let count = s[0].round();
        let idx = spec.unravel(n);
        let x: Vec<f64> = (0..d).map(|a| idx[a] as f64).collect();
        let mut dir = None;
        if count >= c_p.max(1) as f64 {
            let mut cov = [[0.0; 3]; 3];
            for (k, &(a, b)) in pairs.iter().enumerate() {
                let v = s[1 + d + k] - s[1 + a] * s[1 + b] / count;
                cov[a][b] = v;
                cov[b][a] = v;
            }
            let e = smallest_eigvec_sym(&cov, d);
            if !e.degenerate {
                dir = Some(e.smallest);
            }
        }
        let v = match dir {
            Some(mut v) => {
                canonical_sign(&mut v[..d]);
                source[n] = NormalSource::Pca;
                v
            }
            None => radial_direction(&x, &center),
        };
        p.set(n, &v[..d]);
    }
    NormalField { p, source }
}
