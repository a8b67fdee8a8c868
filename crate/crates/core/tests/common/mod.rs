#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use lsrecon::config::{preset, SolverConfig};
use lsrecon::contour::Contour;
use lsrecon::metrics::{compare, curvature_total_variation, max_chord_offset, NearestIndex};
use lsrecon::pointcloud::{Gap, Shape, ShapeRecipe};
use lsrecon::solver::{grid_for, run, RunOutput};
use lsrecon::PointCloud;

pub fn pad3(v: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    p
}

pub fn reference(shape: &Shape, spacing: f64) -> Vec<[f64; 3]> {
    shape.dense_samples(spacing).iter().map(|v| pad3(v)).collect()
}

pub fn config(name: &str, overrides: &[&str]) -> SolverConfig {
    let mut cfg = preset(name).unwrap();
    for kv in overrides {
        cfg.apply_override(kv).unwrap();
    }
    cfg
}

pub fn reconstruct(cloud: &PointCloud, cfg: &SolverConfig) -> RunOutput {
    let spec = grid_for(cloud, cfg).unwrap();
    run(cloud, &spec, cfg).unwrap()
}

/// Symmetric Hausdorff distance between the contour and the analytic curve.
pub fn hausdorff_to(contour: &Contour, shape: &Shape) -> f64 {
    compare(&contour.sample(0.25), &reference(shape, 0.25))
        .map_or(f64::INFINITY, |c| c.hausdorff)
}

pub fn circle() -> (Shape, PointCloud) {
    let shape = Shape::Circle {
        center: [50.0, 50.0],
        radius: 30.0,
    };
    let cloud = ShapeRecipe::new(shape.clone(), 200).generate().unwrap();
    (shape, cloud)
}

pub const SQUARE_CORNER_GAP: f64 = 10.0;

/// Square with every corner region removed.
pub fn gapped_square() -> (Shape, PointCloud) {
    let shape = Shape::Square {
        center: [50.0, 50.0],
        edge: 60.0,
    };
    let cloud = ShapeRecipe::new(shape.clone(), 200)
        .with_gaps(vec![Gap::Corners {
            radius: SQUARE_CORNER_GAP,
        }])
        .generate()
        .unwrap();
    (shape, cloud)
}

/// Largest distance from the true boundary near a corner to the contour.
pub fn corner_error(contour: &Contour, shape: &Shape) -> f64 {
    let samples = contour.sample(0.25);
    let index = NearestIndex::new(&samples);
    let corners = shape.vertices().unwrap();
    reference(shape, 0.25)
        .iter()
        .filter(|p| corners.iter().any(|v| (v[0] - p[0]).hypot(v[1] - p[1]) <= SQUARE_CORNER_GAP))
        .map(|p| index.nearest_distance(p))
        .fold(0.0, f64::max)
}

pub const PENTAGON_GAP: (f64, f64) = (0.72, 0.88);

/// Pentagon missing the stretch around its fifth vertex.
pub fn gapped_pentagon() -> (Shape, PointCloud) {
    let shape = Shape::Polygon {
        center: [50.0, 50.0],
        radius: 35.0,
        sides: 5,
        rotation: FRAC_PI_2,
    };
    let cloud = ShapeRecipe::new(shape.clone(), 160)
        .with_gaps(vec![Gap::Interval {
            start: PENTAGON_GAP.0,
            end: PENTAGON_GAP.1,
        }])
        .generate()
        .unwrap();
    (shape, cloud)
}

/// How far the bridge across the pentagon gap bulges past the chord joining
/// the last data points on either side, toward the missing vertex.
pub fn bridge_offset(contour: &Contour, shape: &Shape, cloud: &PointCloud) -> f64 {
    let nearest = |q: [f64; 2]| {
        let mut best = ([0.0; 2], f64::INFINITY);
        for p in cloud.points() {
            let d = (p[0] - q[0]).hypot(p[1] - q[1]);
            if d < best.1 {
                best = ([p[0], p[1]], d);
            }
        }
        best.0
    };
    let a = nearest(shape.curve_point(PENTAGON_GAP.0));
    let b = nearest(shape.curve_point(PENTAGON_GAP.1));
    let vertex = shape.vertices().unwrap()[4];
    max_chord_offset(&contour.sample(0.25), a, b, vertex, 20.0)
}

pub fn noisy_ellipse() -> (Shape, PointCloud) {
    let shape = Shape::Ellipse {
        center: [50.0, 50.0],
        semi_axes: [32.0, 20.0],
        rotation: 0.3,
    };
    let cloud = ShapeRecipe::new(shape.clone(), 200)
        .with_noise(1.5, 7)
        .generate()
        .unwrap();
    (shape, cloud)
}

/// Curvature total variation of the single closed loop, if that is what the
/// contour is.
pub fn single_loop_tv(contour: &Contour) -> Option<f64> {
    let loops = contour.loops();
    match loops.as_slice() {
        [l] if l.closed => Some(curvature_total_variation(&l.points, 1.0)),
        _ => None,
    }
}

pub const CYLINDER_GAP: (f64, f64) = (0.35, 0.65);

/// Cylinder lateral surface (radius 12, height 30) without its middle band.
pub fn banded_cylinder() -> (Shape, PointCloud) {
    let shape = Shape::Cylinder {
        center: [25.0, 25.0, 25.0],
        radius: 12.0,
        height: 30.0,
    };
    let cloud = ShapeRecipe::new(shape.clone(), 6000)
        .with_gaps(vec![Gap::Interval {
            start: CYLINDER_GAP.0,
            end: CYLINDER_GAP.1,
        }])
        .generate()
        .unwrap();
    (shape, cloud)
}
