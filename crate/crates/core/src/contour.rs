//! Zero level set extraction and export.
//!
//! 2D uses marching squares, 3D a marching-cubes variant that traces the
//! isoline loops on the six faces of each cell and fans each loop into
//! triangles. Face ambiguities are resolved from the four face values only,
//! so neighbouring cells agree and the surface is watertight.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::pointcloud::PointCloud;

#[derive(Clone, Debug, Default)]
pub struct Contour {
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
    /// 2D line segments (vertex index pairs).
    pub segments: Vec<[usize; 2]>,
    /// 3D triangles (vertex index triples).
    pub triangles: Vec<[usize; 3]>,
}

/// A chained sequence of contour vertices.
#[derive(Clone, Debug)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[inline]
fn inside(v: f64) -> bool {
    v < 0.0
}

/// Isoline segments through a square with corners ordered
/// (0,0), (1,0), (1,1), (0,1). Edge k joins corner k and corner k+1 (mod 4).
fn square_segments(v: [f64; 4]) -> Vec<(usize, usize)> {
    let mut mask = 0;
    for (k, &x) in v.iter().enumerate() {
        if inside(x) {
            mask |= 1 << k;
        }
    }
    let cut: Vec<usize> = (0..4).filter(|&e| (mask >> e & 1) != (mask >> ((e + 1) % 4) & 1)).collect();
    match cut.len() {
        0 => vec![],
        2 => vec![(cut[0], cut[1])],
        _ => {
            // saddle: corners 0 and 2 share a state
            let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            if inside(center) == inside(v[0]) {
                // 0 and 2 connect through the middle; cut off corners 1 and 3
                vec![(0, 1), (2, 3)]
            } else {
                vec![(3, 0), (1, 2)]
            }
        }
    }
}

/// Interpolated crossing on the edge from `a` to `b`, as the weight from `a`.
#[inline]
fn crossing(a: f64, b: f64) -> f64 {
    let t = a / (a - b);
    t.clamp(0.0, 1.0)
}

struct VertexTable<'a> {
    psi: &'a ScalarField,
    ids: HashMap<(usize, usize), usize>,
    vertices: Vec<[f64; 3]>,
}

impl<'a> VertexTable<'a> {
    fn new(psi: &'a ScalarField) -> Self {
        VertexTable {
            psi,
            ids: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    /// Vertex on the grid edge leaving node `n` along `axis` (non-wrapping).
    fn get(&mut self, n: usize, axis: usize) -> usize {
        if let Some(&id) = self.ids.get(&(n, axis)) {
            return id;
        }
        let spec = self.psi.spec();
        let m = n + spec.stride(axis);
        let t = crossing(self.psi.values()[n], self.psi.values()[m]);
        let idx = spec.unravel(n);
        let mut p = [0.0; 3];
        for a in 0..spec.dim() {
            p[a] = idx[a] as f64;
        }
        p[axis] += t;
        let id = self.vertices.len();
        self.vertices.push(p);
        self.ids.insert((n, axis), id);
        id
    }
}

/// Global (node, axis) key of local square edge `e` for a face spanned by
/// axes `b` and `c` with lower corner at node `n0`.
fn face_edge(spec: &GridSpec, n0: usize, b: usize, c: usize, e: usize) -> (usize, usize) {
    match e {
        0 => (n0, b),
        1 => (n0 + spec.stride(b), c),
        2 => (n0 + spec.stride(c), b),
        _ => (n0, c),
    }
}

fn face_values(psi: &ScalarField, n0: usize, b: usize, c: usize) -> [f64; 4] {
    let spec = psi.spec();
    let v = psi.values();
    let (sb, sc) = (spec.stride(b), spec.stride(c));
    [v[n0], v[n0 + sb], v[n0 + sb + sc], v[n0 + sc]]
}

/// Marching squares (2D) or cubes (3D) on the zero level of `psi`. Cells do
/// not wrap around the periodic boundary.
pub fn extract_zero_level(psi: &ScalarField) -> Contour {
    let spec = psi.spec().clone();
    let mut table = VertexTable::new(psi);
    let mut contour = Contour {
        dim: spec.dim(),
        ..Default::default()
    };
    let interior = |n: usize| (0..spec.dim()).all(|a| spec.coord(n, a) + 1 < spec.dims()[a]);
    if spec.dim() == 2 {
        for n in 0..spec.len() {
            if !interior(n) {
                continue;
            }
            for (e1, e2) in square_segments(face_values(psi, n, 0, 1)) {
                let (na, aa) = face_edge(&spec, n, 0, 1, e1);
                let (nb, ab) = face_edge(&spec, n, 0, 1, e2);
                let s = [table.get(na, aa), table.get(nb, ab)];
                contour.segments.push(s);
            }
        }
    } else {
        let faces = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
        for n in 0..spec.len() {
            if !interior(n) {
                continue;
            }
            let v = psi.values();
            let corners: Vec<f64> = (0..8)
                .map(|k| {
                    let off: usize = (0..3).filter(|a| k >> a & 1 == 1).map(|a| spec.stride(a)).sum();
                    v[n + off]
                })
                .collect();
            if corners.iter().all(|&x| inside(x)) || corners.iter().all(|&x| !inside(x)) {
                continue;
            }
            let mut segs: Vec<[usize; 2]> = Vec::new();
            for &(b, c, fixed) in &faces {
                for off in [0, spec.stride(fixed)] {
                    let n0 = n + off;
                    for (e1, e2) in square_segments(face_values(psi, n0, b, c)) {
                        let (na, aa) = face_edge(&spec, n0, b, c, e1);
                        let (nb, ab) = face_edge(&spec, n0, b, c, e2);
                        segs.push([table.get(na, aa), table.get(nb, ab)]);
                    }
                }
            }
            for lp in chain_loops(&segs) {
                let tri_start = contour.triangles.len();
                for k in 1..lp.len().saturating_sub(1) {
                    contour.triangles.push([lp[0], lp[k], lp[k + 1]]);
                }
                orient(&mut contour.triangles[tri_start..], &table.vertices, &corners);
            }
        }
    }
    contour.vertices = table.vertices;
    contour
}

/// Flips triangles so their normals point toward increasing ψ, judged by the
/// trilinear gradient at the cell center.
fn orient(tris: &mut [[usize; 3]], verts: &[[f64; 3]], corners: &[f64]) {
    let mut g = [0.0; 3];
    for k in 0..8 {
        for a in 0..3 {
            let s = if k >> a & 1 == 1 { 1.0 } else { -1.0 };
            g[a] += 0.25 * s * corners[k];
        }
    }
    for t in tris.iter_mut() {
        let (p0, p1, p2) = (verts[t[0]], verts[t[1]], verts[t[2]]);
        let e1 = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
        let e2 = [p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]];
        let nrm = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        if nrm[0] * g[0] + nrm[1] * g[1] + nrm[2] * g[2] < 0.0 {
            t.swap(1, 2);
        }
    }
}

/// Chains undirected segments whose vertices all have degree two into
/// closed vertex loops.
fn chain_loops(segs: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, s) in segs.iter().enumerate() {
        adj.entry(s[0]).or_default().push(k);
        adj.entry(s[1]).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segs[start][0];
        let mut lp = vec![first];
        let mut cur = segs[start][1];
        while cur != first {
            lp.push(cur);
            let next = adj[&cur].iter().copied().find(|&k| !used[k]);
            match next {
                Some(k) => {
                    used[k] = true;
                    cur = if segs[k][0] == cur { segs[k][1] } else { segs[k][0] };
                }
                None => break,
            }
        }
        loops.push(lp);
    }
    loops
}

impl Contour {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.triangles.is_empty()
    }

    pub fn segments_2d(&self) -> Vec<([f64; 2], [f64; 2])> {
        self.segments
            .iter()
            .map(|s| {
                let (a, b) = (self.vertices[s[0]], self.vertices[s[1]]);
                ([a[0], a[1]], [b[0], b[1]])
            })
            .collect()
    }

    /// Chains the 2D segments into polylines.
    pub fn loops(&self) -> Vec<Polyline> {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, s) in self.segments.iter().enumerate() {
            if s[0] == s[1] {
                continue;
            }
            adj.entry(s[0]).or_default().push(k);
            adj.entry(s[1]).or_default().push(k);
        }
        let mut used = vec![false; self.segments.len()];
        let mut out = Vec::new();
        let pt = |v: usize| [self.vertices[v][0], self.vertices[v][1]];
        // open chains first start at degree-one vertices
        let mut starts: Vec<usize> = adj.iter().filter(|(_, e)| e.len() == 1).map(|(&v, _)| v).collect();
        starts.sort_unstable();
        let mut all: Vec<usize> = adj.keys().copied().collect();
        all.sort_unstable();
        starts.extend(all);
        for s in starts {
            let Some(k0) = adj[&s].iter().copied().find(|&k| !used[k]) else {
                continue;
            };
            let mut pts = vec![pt(s)];
            let mut cur = s;
            let mut k = k0;
            let mut closed = false;
            loop {
                used[k] = true;
                let seg = self.segments[k];
                cur = if seg[0] == cur { seg[1] } else { seg[0] };
                if cur == s {
                    closed = true;
                    break;
                }
                pts.push(pt(cur));
                match adj[&cur].iter().copied().find(|&j| !used[j]) {
                    Some(j) => k = j,
                    None => break,
                }
            }
            out.push(Polyline { points: pts, closed });
        }
        out
    }

    /// Number of edge-connected triangle groups (3D) or polylines (2D).
    pub fn component_count(&self) -> usize {
        self.component_sizes().len()
    }

    /// Segment (2D) or triangle (3D) count of each component, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = if self.dim == 2 {
            self.loops().iter().map(|l| l.points.len() - usize::from(!l.closed)).collect()
        } else {
            let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for t in &self.triangles {
                let r0 = find(&mut parent, t[0]);
                for &v in &t[1..] {
                    let r = find(&mut parent, v);
                    parent[r] = r0;
                }
            }
            let mut count = std::collections::HashMap::new();
            for t in &self.triangles {
                *count.entry(find(&mut parent, t[0])).or_insert(0usize) += 1;
            }
            count.into_values().collect()
        };
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Points along the contour no farther than `spacing` apart.
    pub fn sample(&self, spacing: f64) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for s in &self.segments {
            let (a, b) = (self.vertices[s[0]], self.vertices[s[1]]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let k = (len / spacing).ceil().max(1.0) as usize;
            for i in 0..=k {
                let t = i as f64 / k as f64;
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), 0.0]);
            }
        }
        for t in &self.triangles {
            let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
            let longest = [(a, b), (b, c), (c, a)]
                .iter()
                .map(|(p, q)| ((0..3).map(|i| (p[i] - q[i]).powi(2)).sum::<f64>()).sqrt())
                .fold(0.0, f64::max);
            let k = (longest / spacing).ceil().max(1.0) as usize;
            for i in 0..=k {
                for j in 0..=(k - i) {
                    let (u, v) = (i as f64 / k as f64, j as f64 / k as f64);
                    let w = 1.0 - u - v;
                    out.push([
                        w * a[0] + u * b[0] + v * c[0],
                        w * a[1] + u * b[1] + v * c[1],
                        w * a[2] + u * b[2] + v * c[2],
                    ]);
                }
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x1,y1,x2,y2")?;
        for (a, b) in self.segments_2d() {
            writeln!(w, "{},{},{},{}", a[0], a[1], b[0], b[1])?;
        }
        Ok(())
    }

    pub fn write_obj<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }

    /// Plots the contour (and optionally the cloud) in grid coordinates with
    /// the y axis pointing up.
    pub fn write_svg<W: Write>(&self, mut w: W, dims: &[usize], cloud: Option<&PointCloud>) -> std::io::Result<()> {
        let (wd, ht) = (dims[0] as f64, dims[1] as f64);
        let scale = 6.0;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {wd} {ht}">"#,
            wd * scale,
            ht * scale
        )?;
        writeln!(w, r#"<rect width="{wd}" height="{ht}" fill="white"/>"#)?;
        writeln!(w, r#"<g transform="translate(0,{ht}) scale(1,-1)">"#)?;
        if let Some(c) = cloud {
            for p in c.points() {
                writeln!(w, r#"<circle cx="{}" cy="{}" r="0.4" fill="black"/>"#, p[0], p[1])?;
            }
        }
        for pl in self.loops() {
            let pts: Vec<String> = pl.points.iter().map(|p| format!("{:.4},{:.4}", p[0], p[1])).collect();
            let tag = if pl.closed { "polygon" } else { "polyline" };
            writeln!(
                w,
                r#"<{tag} points="{}" fill="none" stroke="crimson" stroke-width="0.3"/>"#,
                pts.join(" ")
            )?;
        }
        writeln!(w, "</g>\n</svg>")
    }

    /// Writes CSV for 2D contours and OBJ for 3D ones.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        if self.dim == 2 {
            self.write_csv(&mut w)?;
        } else {
            self.write_obj(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a segment CSV or an OBJ mesh, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let is_obj = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"));
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut c = Contour {
            dim: if is_obj { 3 } else { 2 },
            ..Default::default()
        };
        for (k, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with("x1") {
                continue;
            }
            if is_obj {
                let mut it = t.split_whitespace();
                match it.next() {
                    Some("v") => {
                        let v: Vec<f64> = it
                            .map(|s| s.parse::<f64>().map_err(|e| parse_err(k + 1, e.to_string())))
                            .collect::<Result<_>>()?;
                        if v.len() < 3 {
                            return Err(parse_err(k + 1, "vertex needs 3 coordinates".into()));
                        }
                        c.vertices.push([v[0], v[1], v[2]]);
                    }
                    Some("f") => {
                        let f: Vec<usize> = it
                            .map(|s| {
                                s.split('/')
                                    .next()
                                    .unwrap_or("")
                                    .parse::<usize>()
                                    .map_err(|e| parse_err(k + 1, e.to_string()))
                            })
                            .collect::<Result<_>>()?;
                        if f.len() < 3 || f.iter().any(|&i| i == 0 || i > c.vertices.len()) {
                            return Err(parse_err(k + 1, "bad face record".into()));
                        }
                        for j in 1..f.len() - 1 {
                            c.triangles.push([f[0] - 1, f[j] - 1, f[j + 1] - 1]);
                        }
                    }
                    _ => {}
                }
            } else {
                let v: Vec<f64> = t
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|e| parse_err(k + 1, e.to_string())))
                    .collect::<Result<_>>()?;
                if v.len() != 4 {
                    return Err(parse_err(k + 1, format!("expected 4 values, got {}", v.len())));
                }
                let i = c.vertices.len();
                c.vertices.push([v[0], v[1], 0.0]);
                c.vertices.push([v[2], v[3], 0.0]);
                c.segments.push([i, i + 1]);
            }
        }
        if !is_obj {
            c.weld();
        }
        Ok(c)
    }

    /// Merges bitwise-identical vertices so loaded segments chain again.
    fn weld(&mut self) {
        let mut map: HashMap<(u64, u64, u64), usize> = HashMap::new();
        let mut verts = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let key = (v[0].to_bits(), v[1].to_bits(), v[2].to_bits());
            let id = *map.entry(key).or_insert_with(|| {
                verts.push(*v);
                verts.len() - 1
            });
            remap.push(id);
        }
        for s in &mut self.segments {
            *s = [remap[s[0]], remap[s[1]]];
        }
        for t in &mut self.triangles {
            *t = [remap[t[0]], remap[t[1]], remap[t[2]]];
        }
        self.vertices = verts;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_line() {
        let spec = GridSpec::new(&[100, 20]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| x[0] - 50.5);
        let c = extract_zero_level(&psi);
        assert_eq!(c.segments.len(), 19);
        assert!(c.vertices.iter().all(|v| (v[0] - 50.5).abs() < 1e-12));
        let loops = c.loops();
        assert_eq!(loops.len(), 1);
        assert!(!loops[0].closed);
        assert_eq!(loops[0].points.len(), 20);
    }

    #[test]
    fn single_inside_corner() {
        assert_eq!(square_segments([-1.0, 1.0, 1.0, 1.0]), vec![(0, 3)]);
        let spec = GridSpec::new(&[4, 4]).unwrap();
        let mut v = vec![1.0; 16];
        v[spec.index(&[1, 1])] = -1.0;
        let psi = ScalarField::from_values(&spec, v).unwrap();
        let c = extract_zero_level(&psi);
        // the lone negative node is surrounded by four cells
        assert_eq!(c.segments.len(), 4);
        assert!(c.vertices.contains(&[1.5, 1.0, 0.0]));
        assert!(c.vertices.contains(&[1.0, 1.5, 0.0]));
        let loops = c.loops();
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closed);
    }

    #[test]
    fn saddle_uses_center() {
        // center inside: diagonal insides connect
        let segs = square_segments([-1.0, 0.5, -1.0, 0.5]);
        assert_eq!(segs, vec![(0, 1), (2, 3)]);
        let segs = square_segments([-0.2, 1.0, -0.2, 1.0]);
        assert_eq!(segs, vec![(3, 0), (1, 2)]);
    }

    #[test]
    fn circle_vertices_on_radius() {
        let spec = GridSpec::new(&[100, 100]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| (x[0] - 50.0).hypot(x[1] - 50.0) - 30.0);
        let c = extract_zero_level(&psi);
        let err = c
            .vertices
            .iter()
            .map(|v| ((v[0] - 50.0).hypot(v[1] - 50.0) - 30.0).abs())
            .fold(0.0, f64::max);
        assert!(err <= 0.5, "{err}");
        let loops = c.loops();
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closed);
    }

    #[test]
    fn sphere_is_closed_single_component() {
        let spec = GridSpec::new(&[24, 24, 24]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| {
            ((x[0] - 12.0).powi(2) + (x[1] - 11.5).powi(2) + (x[2] - 12.2).powi(2)).sqrt() - 7.3
        });
        let c = extract_zero_level(&psi);
        assert_eq!(c.component_count(), 1);
        let err = c
            .vertices
            .iter()
            .map(|v| (((v[0] - 12.0).powi(2) + (v[1] - 11.5).powi(2) + (v[2] - 12.2).powi(2)).sqrt() - 7.3).abs())
            .fold(0.0, f64::max);
        assert!(err <= 0.5);
        // watertight: every edge is shared by exactly two triangles
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &c.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        assert!(edges.values().all(|&n| n == 2));
        // outward orientation: signed volume is positive
        let vol: f64 = c
            .triangles
            .iter()
            .map(|t| {
                let (a, b, d) = (c.vertices[t[0]], c.vertices[t[1]], c.vertices[t[2]]);
                a[0] * (b[1] * d[2] - b[2] * d[1]) - a[1] * (b[0] * d[2] - b[2] * d[0]) + a[2] * (b[0] * d[1] - b[1] * d[0])
            })
            .sum::<f64>()
            / 6.0;
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 7.3f64.powi(3);
        assert!((vol - exact).abs() < 0.05 * exact, "{vol} vs {exact}");
    }

    #[test]
    fn two_spheres_two_components() {
        let spec = GridSpec::new(&[30, 16, 16]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| {
            let a = ((x[0] - 8.0).powi(2) + (x[1] - 8.0).powi(2) + (x[2] - 8.0).powi(2)).sqrt() - 4.0;
            let b = ((x[0] - 21.0).powi(2) + (x[1] - 8.0).powi(2) + (x[2] - 8.0).powi(2)).sqrt() - 4.0;
            a.min(b)
        });
        assert_eq!(extract_zero_level(&psi).component_count(), 2);
    }

    #[test]
    fn empty_when_single_signed() {
        let spec = GridSpec::new(&[8, 8]).unwrap();
        assert!(extract_zero_level(&ScalarField::constant(&spec, 1.0)).is_empty());
    }

    #[test]
    fn csv_roundtrip_rechains() {
        let spec = GridSpec::new(&[40, 40]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| (x[0] - 20.0).hypot(x[1] - 20.0) - 9.0);
        let c = extract_zero_level(&psi);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        c.save(&path).unwrap();
        let back = Contour::load(&path).unwrap();
        assert_eq!(back.segments.len(), c.segments.len());
        assert_eq!(back.loops().len(), 1);
        assert!(back.loops()[0].closed);
    }

    #[test]
    fn obj_roundtrip() {
        let spec = GridSpec::new(&[16, 16, 16]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| {
            ((x[0] - 8.0).powi(2) + (x[1] - 8.0).powi(2) + (x[2] - 8.0).powi(2)).sqrt() - 4.0
        });
        let c = extract_zero_level(&psi);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.obj");
        c.save(&path).unwrap();
        let back = Contour::load(&path).unwrap();
        assert_eq!(back.triangles, c.triangles);
        assert_eq!(back.vertices.len(), c.vertices.len());
    }
}
