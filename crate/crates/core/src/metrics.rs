//! Point-set distances and contour shape measures.

use std::collections::HashMap;

/// Bucketed nearest-neighbour index over a fixed point set.
pub struct NearestIndex<'a> {
    points: &'a [[f64; 3]],
    origin: [f64; 3],
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    extent: [i64; 3],
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [[f64; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let diag = (0..3).map(|a| (hi[a] - lo[a]).powi(2)).sum::<f64>().sqrt();
        let cell = (diag / (points.len().max(1) as f64).sqrt()).max(1e-9);
        let mut index = NearestIndex {
            points,
            origin: lo,
            cell,
            buckets: HashMap::new(),
            extent: [0; 3],
        };
        for (i, p) in points.iter().enumerate() {
            let k = index.key(p);
            for a in 0..3 {
                index.extent[a] = index.extent[a].max(k[a]);
            }
            index.buckets.entry(k).or_default().push(i);
        }
        index
    }

    fn key(&self, p: &[f64; 3]) -> [i64; 3] {
        let mut k = [0i64; 3];
        for a in 0..3 {
            k[a] = ((p[a] - self.origin[a]) / self.cell).floor() as i64;
        }
        k
    }

    /// Distance from `q` to the closest indexed point, `+∞` when empty.
    pub fn nearest_distance(&self, q: &[f64; 3]) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let c = self.key(q);
        let outside = (0..3)
            .map(|a| (-c[a]).max(c[a] - self.extent[a]).max(0))
            .max()
            .unwrap_or(0);
        let last = outside + (0..3).map(|a| self.extent[a]).max().unwrap_or(0) + 1;
        let mut best2 = f64::INFINITY;
        // rings closer than `outside` hold no buckets
        let mut r = outside;
        loop {
            let range = |a: usize| (c[a] - r).max(0)..=(c[a] + r).min(self.extent[a]);
            for x in range(0) {
                for y in range(1) {
                    for z in range(2) {
                        let k = [x, y, z];
                        if (0..3).map(|a| (k[a] - c[a]).abs()).max() != Some(r) {
                            continue;
                        }
                        if let Some(ids) = self.buckets.get(&k) {
                            for &i in ids {
                                let p = &self.points[i];
                                let d2 = (0..3).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>();
                                best2 = best2.min(d2);
                            }
                        }
                    }
                }
            }
            // every cell in ring r + 1 or beyond is at least r cells away
            let reach = r as f64 * self.cell;
            if best2 <= reach * reach || r >= last {
                return best2.sqrt();
            }
            r += 1;
        }
    }
}

/// `max_{a∈A} min_{b∈B} |a−b|`.
pub fn directed_hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let index = NearestIndex::new(b);
    a.iter().map(|p| index.nearest_distance(p)).fold(0.0, f64::max)
}

/// Symmetric Hausdorff and mean (chamfer) distance between two point sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub hausdorff: f64,
    pub chamfer: f64,
}

/// `None` when either set is empty.
pub fn compare(a: &[[f64; 3]], b: &[[f64; 3]]) -> Option<Comparison> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (ia, ib) = (NearestIndex::new(a), NearestIndex::new(b));
    let ab: Vec<f64> = a.iter().map(|p| ib.nearest_distance(p)).collect();
    let ba: Vec<f64> = b.iter().map(|p| ia.nearest_distance(p)).collect();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Some(Comparison {
        hausdorff: max(&ab).max(max(&ba)),
        chamfer: 0.5 * (mean(&ab) + mean(&ba)),
    })
}

pub fn hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    compare(a, b).map_or(f64::INFINITY, |c| c.hausdorff)
}

pub fn chamfer(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    compare(a, b).map_or(f64::INFINITY, |c| c.chamfer)
}

/// Closed polyline resampled at equal arc-length steps close to `spacing`.
pub fn resample_closed(points: &[[f64; 2]], spacing: f64) -> Vec<[f64; 2]> {
    let n = points.len();
    if n < 2 {
        return points.to_vec();
    }
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        cum.push(cum[i] + (b[0] - a[0]).hypot(b[1] - a[1]));
    }
    let total = cum[n];
    let m = ((total / spacing).round() as usize).max(3);
    let step = total / m as f64;
    let mut out = Vec::with_capacity(m);
    let mut j = 0;
    for k in 0..m {
        let s = k as f64 * step;
        while j + 1 < n && cum[j + 1] < s {
            j += 1;
        }
        let len = cum[j + 1] - cum[j];
        let t = if len > 0.0 { (s - cum[j]) / len } else { 0.0 };
        let (a, b) = (points[j], points[(j + 1) % n]);
        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    out
}

/// Discrete curvature total variation `Σ|κ_{k+1} − κ_k|` of a closed curve,
/// with `κ_k` the turning angle per unit length after resampling at
/// `spacing`.
pub fn curvature_total_variation(points: &[[f64; 2]], spacing: f64) -> f64 {
    let res = resample_closed(points, spacing);
    let m = res.len();
    if m < 3 {
        return 0.0;
    }
    let mut perimeter = 0.0;
    for k in 0..m {
        let (a, b) = (res[k], res[(k + 1) % m]);
        perimeter += (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    let step = perimeter / m as f64;
    let kappa: Vec<f64> = (0..m)
        .map(|k| {
            let (a, b, c) = (res[(k + m - 1) % m], res[k], res[(k + 1) % m]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - b[0], c[1] - b[1]];
            (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]) / step
        })
        .collect();
    (0..m).map(|k| (kappa[(k + 1) % m] - kappa[k]).abs()).sum()
}

/// Largest signed distance from the chord `a→b` over points whose
/// projection falls on the chord, positive on the side of `toward`.
/// Points farther than `band` from the chord are ignored.
pub fn max_chord_offset(points: &[[f64; 3]], a: [f64; 2], b: [f64; 2], toward: [f64; 2], band: f64) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return 0.0;
    }
    let side = ((toward[0] - a[0]) * dy - (toward[1] - a[1]) * dx).signum();
    let mut best = f64::NEG_INFINITY;
    for q in points {
        let t = ((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / (len * len);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let s = side * ((q[0] - a[0]) * dy - (q[1] - a[1]) * dx) / len;
        if s.abs() <= band {
            best = best.max(s);
        }
    }
    best
}
