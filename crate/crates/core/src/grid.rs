//! Periodic regular grids with unit spacing, plus the finite-difference
//! stencils used by every solver stage.
//!
//! Node `(i, j[, k])` sits at coordinate `(i, j[, k])`. Storage is row-major
//! with the last axis fastest. All stencils in this module wrap periodically.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Shape of a 2D or 3D periodic grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl GridSpec {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.len() != 2 && dims.len() != 3 {
            return Err(Error::InvalidGrid(format!(
                "expected 2 or 3 axes, got {}",
                dims.len()
            )));
        }
        if let Some(&n) = dims.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidGrid(format!("axis length {n} is below 4")));
        }
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len() - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Ok(Self {
            dims: dims.to_vec(),
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim());
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Multi-index of a flat node index; unused trailing slots are zero.
    pub fn unravel(&self, mut n: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in 0..self.dim() {
            out[a] = n / self.strides[a];
            n %= self.strides[a];
        }
        out
    }

    /// Coordinate of node `n` along `axis`.
    #[inline]
    pub fn coord(&self, n: usize, axis: usize) -> usize {
        (n / self.strides[axis]) % self.dims[axis]
    }

    /// Periodic neighbor of `n` one step forward along `axis`.
    #[inline]
    pub fn next(&self, n: usize, axis: usize) -> usize {
        let s = self.strides[axis];
        if self.coord(n, axis) + 1 < self.dims[axis] {
            n + s
        } else {
            n - (self.dims[axis] - 1) * s
        }
    }

    /// Periodic neighbor of `n` one step backward along `axis`.
    #[inline]
    pub fn prev(&self, n: usize, axis: usize) -> usize {
        let s = self.strides[axis];
        if self.coord(n, axis) > 0 {
            n - s
        } else {
            n + (self.dims[axis] - 1) * s
        }
    }

    /// Geometric center of the periodic domain `[0, M] x [0, N] (x [0, P])`.
    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(|&n| n as f64 / 2.0).collect()
    }

    /// Coordinate box `[0, M-1] x ...` spanned by the nodes.
    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(&self.dims)
                .all(|(&x, &n)| x >= 0.0 && x <= (n - 1) as f64)
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Forward,
    Backward,
    Central,
}

/// One real value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn constant(spec: &GridSpec, value: f64) -> Self {
        Self {
            spec: spec.clone(),
            values: vec![value; spec.len()],
        }
    }

    pub fn from_values(spec: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                spec.len()
            )));
        }
        Ok(Self {
            spec: spec.clone(),
            values,
        })
    }

    /// Evaluates `f` at every node coordinate.
    pub fn from_fn(spec: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let d = spec.dim();
        let values = (0..spec.len())
            .map(|n| {
                let idx = spec.unravel(n);
                let x = [idx[0] as f64, idx[1] as f64, idx[2] as f64];
                f(&x[..d])
            })
            .collect();
        Self {
            spec: spec.clone(),
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.spec.index(idx)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.spec, other.spec);
        Self {
            spec: self.spec.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", dump_header(&self.spec))?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn save_dump(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(file))?;
        Ok(())
    }

    pub fn load_dump(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| perr(1, "missing header".into()))??;
        let dims = header
            .strip_prefix("dims:")
            .ok_or_else(|| perr(1, "header must start with `dims:`".into()))?
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| perr(1, e.to_string()))?;
        let spec = GridSpec::new(&dims)?;
        let mut values = Vec::with_capacity(spec.len());
        for (k, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|e| perr(k + 2, e.to_string()))?);
        }
        Self::from_values(&spec, values)
    }
}

/// A `d`-vector per node, stored one component array per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    spec: GridSpec,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self {
            spec: spec.clone(),
            comps: vec![vec![0.0; spec.len()]; spec.dim()],
        }
    }

    /// Same vector at every node.
    pub fn constant(spec: &GridSpec, v: &[f64]) -> Self {
        assert_eq!(v.len(), spec.dim());
        Self {
            spec: spec.clone(),
            comps: v.iter().map(|&c| vec![c; spec.len()]).collect(),
        }
    }

    pub fn from_components(spec: &GridSpec, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != spec.dim() || comps.iter().any(|c| c.len() != spec.len()) {
            return Err(Error::GridMismatch(
                "component count or length does not match the grid".into(),
            ));
        }
        Ok(Self {
            spec: spec.clone(),
            comps,
        })
    }

    pub fn from_scalars(fields: Vec<ScalarField>) -> Result<Self> {
        let spec = fields
            .first()
            .map(|f| f.spec().clone())
            .ok_or_else(|| Error::GridMismatch("no components".into()))?;
        if fields.iter().any(|f| f.spec() != &spec) {
            return Err(Error::GridMismatch("components on different grids".into()));
        }
        Self::from_components(&spec, fields.into_iter().map(|f| f.values).collect())
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }

    pub fn component_field(&self, axis: usize) -> ScalarField {
        ScalarField {
            spec: self.spec.clone(),
            values: self.comps[axis].clone(),
        }
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Vector at node `n`, padded with zeros past `dim()`.
    #[inline]
    pub fn at(&self, n: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (a, c) in self.comps.iter().enumerate() {
            v[a] = c[n];
        }
        v
    }

    #[inline]
    pub fn set(&mut self, n: usize, v: &[f64]) {
        for (a, c) in self.comps.iter_mut().enumerate() {
            c[n] = v[a];
        }
    }

    /// Pointwise Euclidean norm.
    pub fn norm(&self) -> ScalarField {
        let values = (0..self.spec.len())
            .map(|n| self.comps.iter().map(|c| c[n] * c[n]).sum::<f64>().sqrt())
            .collect();
        ScalarField {
            spec: self.spec.clone(),
            values,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            spec: self.spec.clone(),
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|v| v * s).collect())
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// One node per line, `d` floats each.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", dump_header(&self.spec))?;
        let mut line = String::new();
        for n in 0..self.spec.len() {
            line.clear();
            for (a, c) in self.comps.iter().enumerate() {
                if a > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{}", c[n]);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn save_dump(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(file))?;
        Ok(())
    }
}

fn dump_header(spec: &GridSpec) -> String {
    let dims: Vec<String> = spec.dims().iter().map(|d| d.to_string()).collect();
    format!("dims: {}", dims.join(" "))
}

/// Periodic one-sided or central difference along `axis`.
pub fn diff(field: &ScalarField, axis: usize, scheme: Scheme) -> Result<ScalarField> {
    let spec = field.spec();
    spec.check_axis(axis)?;
    let v = field.values();
    let values = (0..spec.len())
        .map(|n| match scheme {
            Scheme::Forward => v[spec.next(n, axis)] - v[n],
            Scheme::Backward => v[n] - v[spec.prev(n, axis)],
            Scheme::Central => 0.5 * (v[spec.next(n, axis)] - v[spec.prev(n, axis)]),
        })
        .collect();
    Ok(ScalarField {
        spec: spec.clone(),
        values,
    })
}

pub fn gradient(field: &ScalarField, scheme: Scheme) -> VectorField {
    let comps = (0..field.spec().dim())
        .map(|a| diff(field, a, scheme).expect("axis in range").values)
        .collect();
    VectorField {
        spec: field.spec().clone(),
        comps,
    }
}

pub fn divergence(vf: &VectorField, scheme: Scheme) -> ScalarField {
    let spec = vf.spec();
    let mut out = vec![0.0; spec.len()];
    for a in 0..vf.dim() {
        let c = vf.component_field(a);
        let d = diff(&c, a, scheme).expect("axis in range");
        for (o, x) in out.iter_mut().zip(d.values()) {
            *o += x;
        }
    }
    ScalarField {
        spec: spec.clone(),
        values: out,
    }
}

/// `∇⁻·∇⁺ v`, the standard 2d+1 point Laplacian.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let spec = field.spec();
    let v = field.values();
    let d = spec.dim() as f64;
    let values = (0..spec.len())
        .map(|n| {
            let mut s = -2.0 * d * v[n];
            for a in 0..spec.dim() {
                s += v[spec.next(n, a)] + v[spec.prev(n, a)];
            }
            s
        })
        .collect();
    ScalarField {
        spec: spec.clone(),
        values,
    }
}

/// Lower bound applied to `|∇ψ|` wherever it appears in a denominator.
pub const GRAD_GUARD: f64 = 1e-8;

/// `∇ᶜψ / max(|∇ᶜψ|, guard)` together with the unguarded magnitude `|∇ᶜψ|`.
pub fn unit_gradient(psi: &ScalarField) -> (VectorField, ScalarField) {
    let g = gradient(psi, Scheme::Central);
    let mag = g.norm();
    let mut unit = g;
    for a in 0..unit.dim() {
        for (u, m) in unit.comps[a].iter_mut().zip(mag.values()) {
            *u /= m.max(GRAD_GUARD);
        }
    }
    (unit, mag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(spec: &GridSpec, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..spec.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        ScalarField::from_values(spec, v).unwrap()
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(GridSpec::new(&[3, 8]).is_err());
        assert!(GridSpec::new(&[8]).is_err());
        assert!(GridSpec::new(&[8, 8, 8, 8]).is_err());
        assert!(GridSpec::new(&[4, 5, 6]).is_ok());
    }

    #[test]
    fn index_roundtrip() {
        let s = GridSpec::new(&[4, 5, 6]).unwrap();
        for n in 0..s.len() {
            let i = s.unravel(n);
            assert_eq!(s.index(&i), n);
        }
    }

    #[test]
    fn constant_has_zero_differences() {
        let s = GridSpec::new(&[6, 7]).unwrap();
        let f = ScalarField::constant(&s, 3.25);
        for axis in 0..2 {
            for scheme in [Scheme::Forward, Scheme::Backward, Scheme::Central] {
                let d = diff(&f, axis, scheme).unwrap();
                assert!(d.values().iter().all(|&v| v == 0.0));
            }
        }
        let g = gradient(&f, Scheme::Central);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn forward_difference_wraps() {
        let s = GridSpec::new(&[4, 4]).unwrap();
        let f = ScalarField::from_fn(&s, |x| x[0]);
        let d = diff(&f, 0, Scheme::Forward).unwrap();
        let col: Vec<f64> = (0..4).map(|i| d.get(&[i, 2])).collect();
        assert_eq!(col, vec![1.0, 1.0, 1.0, -3.0]);
    }

    #[test]
    fn axis_out_of_range() {
        let s = GridSpec::new(&[4, 4]).unwrap();
        let f = ScalarField::zeros(&s);
        assert!(matches!(
            diff(&f, 2, Scheme::Forward),
            Err(Error::AxisOutOfRange { axis: 2, dim: 2 })
        ));
    }

    #[test]
    fn central_is_mean_of_one_sided() {
        let s = GridSpec::new(&[8, 8]).unwrap();
        let f = random_field(&s, 1);
        for axis in 0..2 {
            let fw = diff(&f, axis, Scheme::Forward).unwrap();
            let bw = diff(&f, axis, Scheme::Backward).unwrap();
            let c = diff(&f, axis, Scheme::Central).unwrap();
            for n in 0..s.len() {
                let mean = 0.5 * (fw.values()[n] + bw.values()[n]);
                assert!((c.values()[n] - mean).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn one_sided_differences_sum_to_zero() {
        let s = GridSpec::new(&[6, 5, 7]).unwrap();
        let f = random_field(&s, 2);
        for axis in 0..3 {
            for scheme in [Scheme::Forward, Scheme::Backward] {
                let d = diff(&f, axis, scheme).unwrap();
                assert!(d.sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn summation_by_parts() {
        let s = GridSpec::new(&[8, 8]).unwrap();
        let v = random_field(&s, 3);
        let u = VectorField::from_scalars(vec![random_field(&s, 4), random_field(&s, 5)]).unwrap();
        let gv = gradient(&v, Scheme::Forward);
        let lhs: f64 = (0..s.len())
            .map(|n| (0..2).map(|a| gv.component(a)[n] * u.component(a)[n]).sum::<f64>())
            .sum();
        let div = divergence(&u, Scheme::Backward);
        let rhs: f64 = -(0..s.len()).map(|n| v.values()[n] * div.values()[n]).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
    }

    #[test]
    fn laplacian_cosine_eigenfunction() {
        let m = 16;
        let s = GridSpec::new(&[m, 12]).unwrap();
        let k = 2.0 * std::f64::consts::PI / m as f64;
        let v = ScalarField::from_fn(&s, |x| (k * x[0]).cos());
        let lap = divergence(&gradient(&v, Scheme::Forward), Scheme::Backward);
        let lam = -4.0 * (std::f64::consts::PI / m as f64).sin().powi(2);
        for n in 0..s.len() {
            assert!((lap.values()[n] - lam * v.values()[n]).abs() < 1e-12);
        }
        let lap2 = laplacian(&v);
        for n in 0..s.len() {
            assert!((lap2.values()[n] - lap.values()[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn dump_roundtrip() {
        let s = GridSpec::new(&[4, 5]).unwrap();
        let f = random_field(&s, 9);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        f.save_dump(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("dims: 4 5\n"));
        let g = ScalarField::load_dump(&p).unwrap();
        assert_eq!(f, g);
    }
}
