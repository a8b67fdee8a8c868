//! Point clouds: text I/O and synthetic shape generators.
//!
//! Every shape is sampled uniformly in its own parameter space. Curves use a
//! single parameter `t ∈ [0, 1)`; surfaces use `(t, s)` where gap intervals
//! act on `s` (height for the cylinder, length for the rail, tube angle for
//! the torus). Gaps are removed first, then Gaussian noise is added.

use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<[f64; 3]>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("cloud dimension {dim}")));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(Self { dim, points })
    }

    pub fn from_2d(points: &[[f64; 2]]) -> Self {
        Self {
            dim: 2,
            points: points.iter().map(|p| [p[0], p[1], 0.0]).collect(),
        }
    }

    pub fn from_3d(points: &[[f64; 3]]) -> Self {
        Self {
            dim: 3,
            points: points.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points padded to three components; the third is 0 in 2D.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i][..self.dim]
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = self.points.first()?;
        let mut lo = *first;
        let mut hi = *first;
        for p in &self.points {
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Some((lo, hi))
    }

    /// Checks the cloud is nonempty, matches the grid dimension and lies in
    /// the node box.
    pub fn check_fits(&self, spec: &GridSpec) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if self.dim != spec.dim() {
            return Err(Error::OutOfDomain(format!(
                "{}D cloud on a {}D grid",
                self.dim,
                spec.dim()
            )));
        }
        if let Some(p) = self
            .points
            .iter()
            .find(|p| !spec.contains_point(&p[..self.dim]))
        {
            return Err(Error::OutOfDomain(format!(
                "point {:?} outside {:?}",
                &p[..self.dim],
                spec.dims()
            )));
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.points {
            match self.dim {
                2 => writeln!(w, "{} {}", p[0], p[1])?,
                _ => writeln!(w, "{} {} {}", p[0], p[1], p[2])?,
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated coordinates, one point per line. `#` starts a
    /// comment; the first data line fixes the dimension.
    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f), path)
    }

    pub fn read<R: BufRead>(r: R, path: &Path) -> Result<Self> {
        let mut dim = None;
        let mut points = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let data = line.split('#').next().unwrap_or("").trim();
            if data.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                msg,
            };
            let vals = data
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| perr(format!("`{t}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            let d = *dim.get_or_insert(vals.len());
            if d != 2 && d != 3 {
                return Err(perr(format!("expected 2 or 3 coordinates, got {d}")));
            }
            if vals.len() != d {
                return Err(perr(format!(
                    "expected {d} coordinates, got {}",
                    vals.len()
                )));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(perr("non-finite coordinate".into()));
            }
            let mut p = [0.0; 3];
            p[..d].copy_from_slice(&vals);
            points.push(p);
        }
        match dim {
            None => Err(Error::EmptyCloud),
            Some(d) => Ok(Self { dim: d, points }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        /// Rotation in radians.
        rotation: f64,
    },
    /// Axis-aligned square; parameter starts at the lower-left corner and
    /// runs counter-clockwise.
    Square {
        center: [f64; 2],
        edge: f64,
    },
    /// Regular polygon given by circumradius; vertex 0 at angle `rotation`.
    Polygon {
        center: [f64; 2],
        radius: f64,
        sides: usize,
        rotation: f64,
    },
    /// Polar rose `r(θ) = radius + amplitude cos(petals θ)`.
    Flower {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
        petals: usize,
    },
    /// Lateral surface of a z-aligned cylinder.
    Cylinder {
        center: [f64; 3],
        radius: f64,
        height: f64,
    },
    /// Torus around the z axis.
    Torus {
        center: [f64; 3],
        major: f64,
        minor: f64,
    },
    /// Open rectangular tube running along x (a straight hand rail).
    BoxRail {
        center: [f64; 3],
        size: [f64; 3],
    },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Cylinder { .. } | Shape::Torus { .. } | Shape::BoxRail { .. } => 3,
            _ => 2,
        }
    }

    /// Polygon vertices (square, regular polygon), counter-clockwise.
    pub fn vertices(&self) -> Option<Vec<[f64; 2]>> {
        match *self {
            Shape::Square { center, edge } => {
                let h = edge / 2.0;
                Some(vec![
                    [center[0] - h, center[1] - h],
                    [center[0] + h, center[1] - h],
                    [center[0] + h, center[1] + h],
                    [center[0] - h, center[1] + h],
                ])
            }
            Shape::Polygon {
                center,
                radius,
                sides,
                rotation,
            } => Some(
                (0..sides)
                    .map(|k| {
                        let a = rotation + TAU * k as f64 / sides as f64;
                        [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Point on a curve at parameter `t ∈ [0, 1)`.
    pub fn curve_point(&self, t: f64) -> [f64; 2] {
        match *self {
            Shape::Circle { center, radius } => {
                let a = TAU * t;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            Shape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let a = TAU * t;
                let (x, y) = (semi_axes[0] * a.cos(), semi_axes[1] * a.sin());
                let (s, c) = rotation.sin_cos();
                [center[0] + c * x - s * y, center[1] + s * x + c * y]
            }
            Shape::Flower {
                center,
                radius,
                amplitude,
                petals,
            } => {
                let a = TAU * t;
                let r = radius + amplitude * (petals as f64 * a).cos();
                [center[0] + r * a.cos(), center[1] + r * a.sin()]
            }
            Shape::Square { .. } | Shape::Polygon { .. } => {
                let v = self.vertices().expect("polygon");
                let n = v.len();
                let pos = t.rem_euclid(1.0) * n as f64;
                let k = (pos.floor() as usize).min(n - 1);
                let w = pos - k as f64;
                let (a, b) = (v[k], v[(k + 1) % n]);
                [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
            }
            _ => panic!("curve_point on a surface shape"),
        }
    }

    /// Point on a surface at parameters `(t, s) ∈ [0, 1)²`.
    pub fn surface_point(&self, t: f64, s: f64) -> [f64; 3] {
        match *self {
            Shape::Cylinder {
                center,
                radius,
                height,
            } => {
                let a = TAU * t;
                [
                    center[0] + radius * a.cos(),
                    center[1] + radius * a.sin(),
                    center[2] - height / 2.0 + height * s,
                ]
            }
            Shape::Torus {
                center,
                major,
                minor,
            } => {
                let (a, b) = (TAU * t, TAU * s);
                let r = major + minor * b.cos();
                [
                    center[0] + r * a.cos(),
                    center[1] + r * a.sin(),
                    center[2] + minor * b.sin(),
                ]
            }
            Shape::BoxRail { center, size } => {
                // t walks the rectangular cross-section perimeter in the y-z plane
                let (hy, hz) = (size[1] / 2.0, size[2] / 2.0);
                let perim = 2.0 * (size[1] + size[2]);
                let mut d = t.rem_euclid(1.0) * perim;
                let (y, z) = if d < size[1] {
                    (-hy + d, -hz)
                } else if {
                    d -= size[1];
                    d < size[2]
                } {
                    (hy, -hz + d)
                } else if {
                    d -= size[2];
                    d < size[1]
                } {
                    (hy - d, hz)
                } else {
                    d -= size[1];
                    (-hy, hz - d)
                };
                [
                    center[0] - size[0] / 2.0 + size[0] * s,
                    center[1] + y,
                    center[2] + z,
                ]
            }
            _ => panic!("surface_point on a curve shape"),
        }
    }

    /// Distance from `p` to the exact shape (closed-form where available,
    /// otherwise a dense-sampling estimate).
    pub fn distance(&self, p: &[f64]) -> f64 {
        match *self {
            Shape::Circle { center, radius } => {
                ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs()
            }
            Shape::Square { .. } | Shape::Polygon { .. } => {
                let v = self.vertices().expect("polygon");
                (0..v.len())
                    .map(|k| point_segment_distance(p, &v[k], &v[(k + 1) % v.len()]))
                    .fold(f64::INFINITY, f64::min)
            }
            Shape::Cylinder {
                center,
                radius,
                height,
            } => {
                let radial = (p[0] - center[0]).hypot(p[1] - center[1]) - radius;
                let dz = ((p[2] - center[2]).abs() - height / 2.0).max(0.0);
                radial.hypot(dz)
            }
            Shape::Torus {
                center,
                major,
                minor,
            } => {
                let q = (p[0] - center[0]).hypot(p[1] - center[1]) - major;
                (q.hypot(p[2] - center[2]) - minor).abs()
            }
            _ => {
                let samples = self.dense_samples(0.01);
                samples
                    .iter()
                    .map(|s| dist(s, p))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Samples with consecutive spacing at most about `spacing` (curves
    /// only; surfaces use a parameter lattice).
    pub fn dense_samples(&self, spacing: f64) -> Vec<Vec<f64>> {
        if self.dim() == 2 {
            let n = ((self.curve_length_estimate() / spacing).ceil() as usize).max(16);
            (0..n)
                .map(|k| self.curve_point(k as f64 / n as f64).to_vec())
                .collect()
        } else {
            let n = (1.0 / spacing).ceil().max(16.0) as usize;
            let mut out = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..=n {
                    let s = j as f64 / n as f64;
                    out.push(self.surface_point(i as f64 / n as f64, s.min(1.0)).to_vec());
                }
            }
            out
        }
    }

    fn curve_length_estimate(&self) -> f64 {
        let n = 4096;
        (0..n)
            .map(|k| {
                let a = self.curve_point(k as f64 / n as f64);
                let b = self.curve_point((k + 1) as f64 / n as f64);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .sum()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match *self {
            Shape::Circle { radius, .. } if !(radius > 0.0) => bad("radius must be positive"),
            Shape::Ellipse { semi_axes, .. } if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) => {
                bad("semi-axes must be positive")
            }
            Shape::Square { edge, .. } if !(edge > 0.0) => bad("edge must be positive"),
            Shape::Polygon { radius, sides, .. } if !(radius > 0.0) || sides < 3 => {
                bad("polygon needs radius > 0 and at least 3 sides")
            }
            Shape::Flower {
                radius, amplitude, ..
            } if !(radius > amplitude.abs()) => bad("flower needs radius > |amplitude|"),
            Shape::Cylinder { radius, height, .. } if !(radius > 0.0 && height > 0.0) => {
                bad("cylinder needs positive radius and height")
            }
            Shape::Torus { major, minor, .. } if !(major > minor && minor > 0.0) => {
                bad("torus needs major > minor > 0")
            }
            Shape::BoxRail { size, .. } if size.iter().any(|&s| !(s > 0.0)) => {
                bad("rail sizes must be positive")
            }
            _ => Ok(()),
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = d.iter().map(|x| x * x).sum();
    let t = if len2 > 0.0 {
        (p.iter().zip(a).zip(&d).map(|((p, a), d)| (p - a) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.iter()
        .zip(a)
        .zip(&d)
        .map(|((p, a), d)| {
            let e = p - (a + t * d);
            e * e
        })
        .sum::<f64>()
        .sqrt()
}

/// Deletes samples whose gap parameter falls in a closed interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gap {
    /// `[start, end]` in normalized parameter units; `start > end` wraps
    /// through 0.
    Interval { start: f64, end: f64 },
    /// Everything within `radius` (arc length) of a polygon vertex.
    Corners { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeRecipe {
    #[serde(flatten)]
    pub shape: Shape,
    pub count: usize,
    #[serde(default)]
    pub gaps: Vec<Gap>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ShapeRecipe {
    pub fn new(shape: Shape, count: usize) -> Self {
        Self {
            shape,
            count,
            gaps: Vec::new(),
            sigma: 0.0,
            seed: 0,
        }
    }

    pub fn with_gaps(mut self, gaps: Vec<Gap>) -> Self {
        self.gaps = gaps;
        self
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.sigma = sigma;
        self.seed = seed;
        self
    }

    /// Gap intervals resolved to normalized-parameter form.
    fn intervals(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for g in &self.gaps {
            match *g {
                Gap::Interval { start, end } => {
                    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) {
                        return Err(Error::InvalidParameter(format!(
                            "gap [{start}, {end}] outside [0, 1]"
                        )));
                    }
                    out.push((start, end));
                }
                Gap::Corners { radius } => {
                    let v = self.shape.vertices().ok_or_else(|| {
                        Error::InvalidParameter("corner gaps need a polygonal shape".into())
                    })?;
                    let n = v.len();
                    let edge = (v[0][0] - v[1][0]).hypot(v[0][1] - v[1][1]);
                    if !(radius >= 0.0) || radius >= edge / 2.0 {
                        return Err(Error::InvalidParameter(format!(
                            "corner gap radius {radius} must be in [0, {})",
                            edge / 2.0
                        )));
                    }
                    let h = radius / (edge * n as f64);
                    for k in 0..n {
                        let t = k as f64 / n as f64;
                        out.push(((t - h).rem_euclid(1.0), t + h));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("count must be positive".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidParameter("sigma must be non-negative".into()));
        }
        self.shape.validate()?;
        self.intervals().map(|_| ())
    }

    /// Deterministic for a fixed recipe.
    pub fn generate(&self) -> Result<PointCloud> {
        self.validate()?;
        let gaps = self.intervals()?;
        let in_gap = |s: f64| {
            gaps.iter().any(|&(a, b)| {
                if a <= b {
                    s >= a && s <= b
                } else {
                    s >= a || s <= b
                }
            })
        };
        let dim = self.shape.dim();
        let n = self.count;
        let mut points = Vec::with_capacity(n);
        if dim == 2 {
            for k in 0..n {
                let t = k as f64 / n as f64;
                if in_gap(t) {
                    continue;
                }
                let p = self.shape.curve_point(t);
                points.push([p[0], p[1], 0.0]);
            }
        } else {
            // golden-ratio lattice over (t, s)
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for k in 0..n {
                let t = (k as f64 * phi).fract();
                let s = (k as f64 + 0.5) / n as f64;
                if in_gap(s) {
                    continue;
                }
                points.push(self.shape.surface_point(t, s));
            }
        }
        if self.sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let normal = Normal::new(0.0, self.sigma).expect("sigma checked");
            for p in &mut points {
                for c in p.iter_mut().take(dim) {
                    *c += normal.sample(&mut rng);
                }
            }
        }
        PointCloud::new(dim, points)
    }
}

/// Parses a shape name plus generic parameters, as used by the CLI.
pub fn shape_from_name(
    name: &str,
    center: &[f64],
    radius: Option<f64>,
    radii: Option<[f64; 2]>,
    edge: Option<f64>,
    petals: Option<usize>,
    size: Option<[f64; 3]>,
    rotation: f64,
) -> Result<Shape> {
    let c2 = || -> Result<[f64; 2]> {
        match center {
            [x, y] => Ok([*x, *y]),
            _ => Err(Error::InvalidParameter("2D shapes need a 2D center".into())),
        }
    };
    let c3 = || -> Result<[f64; 3]> {
        match center {
            [x, y, z] => Ok([*x, *y, *z]),
            _ => Err(Error::InvalidParameter("3D shapes need a 3D center".into())),
        }
    };
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("{name} needs --{what}")))
    };
    let shape = match name {
        "circle" => Shape::Circle {
            center: c2()?,
            radius: need(radius, "radius")?,
        },
        "ellipse" => Shape::Ellipse {
            center: c2()?,
            semi_axes: radii.ok_or_else(|| Error::InvalidParameter("ellipse needs --radii".into()))?,
            rotation,
        },
        "square" => Shape::Square {
            center: c2()?,
            edge: need(edge, "edge")?,
        },
        "pentagon" | "hexagon" => Shape::Polygon {
            center: c2()?,
            radius: need(radius, "radius")?,
            sides: if name == "pentagon" { 5 } else { 6 },
            rotation: if name == "pentagon" {
                PI / 2.0 + rotation
            } else {
                rotation
            },
        },
        "flower" => {
            let r = need(radius, "radius")?;
            Shape::Flower {
                center: c2()?,
                radius: r,
                amplitude: radii.map(|r| r[0]).unwrap_or(r / 3.0),
                petals: petals.unwrap_or(3),
            }
        }
        "cylinder" => Shape::Cylinder {
            center: c3()?,
            radius: need(radius, "radius")?,
            height: need(edge, "edge")?,
        },
        "torus" => {
            let r = radii.ok_or_else(|| Error::InvalidParameter("torus needs --radii".into()))?;
            Shape::Torus {
                center: c3()?,
                major: r[0],
                minor: r[1],
            }
        }
        "box-rail" => Shape::BoxRail {
            center: c3()?,
            size: size.ok_or_else(|| Error::InvalidParameter("box-rail needs --size".into()))?,
        },
        other => return Err(Error::UnknownShape(other.to_string())),
    };
    Ok(shape)
}
