mod common;

use proptest::prelude::*;

use common::pad3;
use lsrecon::distance::{brute_force_distance, eikonal_fast_sweep, SweepOptions};
use lsrecon::grid::{diff, Scheme};
use lsrecon::levelset::{delta_eps, energy, extract_zero_level, reinitialize, EnergyWeights};
use lsrecon::metrics::hausdorff;
use lsrecon::normals::estimate_normals;
use lsrecon::pointcloud::{Gap, Shape, ShapeRecipe};
use lsrecon::spectral::{apply_scalar_operator, apply_vector_operator, GradDiv, Spectral};
use lsrecon::{GridSpec, PointCloud, ScalarField, VectorField};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        prop::collection::vec(4usize..24, 2),
        prop::collection::vec(4usize..10, 3),
    ]
}

fn field(spec: &GridSpec, values: &[f64]) -> ScalarField {
    let v = (0..spec.len()).map(|i| values[i % values.len()] * (1.0 + (i / values.len()) as f64)).collect();
    ScalarField::from_values(spec, v).unwrap()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_sided_differences_sum_to_zero(dims in dims_strategy(), ints in prop::collection::vec(-1000i32..1000, 1..64)) {
        let spec = GridSpec::new(&dims).unwrap();
        let vals: Vec<f64> = (0..spec.len()).map(|i| ints[i % ints.len()] as f64 + i as f64).collect();
        let f = ScalarField::from_values(&spec, vals).unwrap();
        for axis in 0..spec.dim() {
            for scheme in [Scheme::Forward, Scheme::Backward] {
                prop_assert_eq!(diff(&f, axis, scheme).unwrap().sum(), 0.0);
            }
        }
    }

    #[test]
    fn summation_by_parts(dims in dims_strategy(), a in prop::collection::vec(-1.0f64..1.0, 7), b in prop::collection::vec(-1.0f64..1.0, 5)) {
        let spec = GridSpec::new(&dims).unwrap();
        let (fa, fb) = (field(&spec, &a), field(&spec, &b));
        for axis in 0..spec.dim() {
            let da = diff(&fa, axis, Scheme::Forward).unwrap();
            let db = diff(&fb, axis, Scheme::Backward).unwrap();
            let lhs: f64 = da.values().iter().zip(fb.values()).map(|(x, y)| x * y).sum();
            let rhs: f64 = -fa.values().iter().zip(db.values()).map(|(x, y)| x * y).sum::<f64>();
            let scale = da.values().iter().zip(fb.values()).map(|(x, y)| (x * y).abs()).sum::<f64>().max(1e-300);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn scalar_solve_is_exact_inverse(dims in dims_strategy(), c in 0.01f64..50.0, seed in prop::collection::vec(-1.0f64..1.0, 11)) {
        let spec = GridSpec::new(&dims).unwrap();
        let b = field(&spec, &seed);
        let solved = Spectral::new(&spec).solve_scalar_checked(&b, c).unwrap();
        prop_assert!(rel(apply_scalar_operator(&solved.field, c).values(), b.values()) <= 1e-10);
        prop_assert!(solved.max_imag <= 1e-10 * solved.field.max_abs());
    }

    #[test]
    fn vector_solve_is_exact_inverse(dims in dims_strategy(), k1 in 0.1f64..1e3, k2 in 0.0f64..1e3, central in any::<bool>(), seed in prop::collection::vec(-1.0f64..1.0, 13)) {
        let spec = GridSpec::new(&dims).unwrap();
        let comps = (0..spec.dim())
            .map(|a| field(&spec, &seed).values().iter().map(|v| v * (a as f64 + 1.0) - 0.3).collect())
            .collect();
        let s = VectorField::from_components(&spec, comps).unwrap();
        let op = if central { GradDiv::Central } else { GradDiv::ForwardBackward };
        let solved = Spectral::new(&spec).solve_vector_checked(&s, k1, k2, op).unwrap();
        let back = apply_vector_operator(&solved.field, k1, k2, op);
        for a in 0..spec.dim() {
            prop_assert!(rel(back.component(a), s.component(a)) <= 1e-10);
        }
        prop_assert!(solved.max_imag <= 1e-10 * solved.field.max_abs());
    }

    #[test]
    fn generation_is_deterministic(count in 4usize..300, sigma in 0.0f64..3.0, seed in any::<u64>()) {
        let r = ShapeRecipe::new(Shape::Flower { center: [50.0, 50.0], radius: 25.0, amplitude: 8.0, petals: 3 }, count)
            .with_noise(sigma, seed);
        let (a, b) = (r.generate().unwrap(), r.generate().unwrap());
        prop_assert_eq!(a.points(), b.points());
    }

    #[test]
    fn clean_points_lie_on_shape(cx in 20.0f64..80.0, cy in 20.0f64..80.0, r in 1.0f64..40.0, count in 1usize..400) {
        let shape = Shape::Circle { center: [cx, cy], radius: r };
        for p in ShapeRecipe::new(shape, count).generate().unwrap().points() {
            prop_assert!(((p[0] - cx).hypot(p[1] - cy) - r).abs() <= 1e-9);
        }
    }

    #[test]
    fn gaps_only_remove_inside(start in 0.0f64..1.0, len in 0.0f64..0.5, count in 10usize..400) {
        let end = (start + len).min(1.0);
        let shape = Shape::Circle { center: [50.0, 50.0], radius: 30.0 };
        let all = ShapeRecipe::new(shape.clone(), count).generate().unwrap();
        let kept = ShapeRecipe::new(shape, count)
            .with_gaps(vec![Gap::Interval { start, end }])
            .generate()
            .unwrap();
        let expected: Vec<[f64; 3]> = all
            .points()
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let t = *k as f64 / count as f64;
                !(t >= start && t <= end)
            })
            .map(|(_, p)| *p)
            .collect();
        prop_assert_eq!(kept.points(), &expected[..]);
    }

    #[test]
    fn distance_field_properties(pts in prop::collection::vec((2.0f64..62.0, 2.0f64..62.0), 1..50)) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let cloud = PointCloud::from_2d(&pts);
        let spec = GridSpec::new(&[64, 64]).unwrap();
        let f = eikonal_fast_sweep(&cloud, &spec, SweepOptions::default()).unwrap().f;
        let brute = brute_force_distance(&cloud, &spec).unwrap().f;
        for n in 0..spec.len() {
            let v = f.values()[n];
            prop_assert!(v.is_finite() && v >= 0.0);
            prop_assert!((v - brute.values()[n]).abs() <= 2.0);
            for a in 0..2 {
                if spec.coord(n, a) + 1 < 64 {
                    let m = n + spec.stride(a);
                    prop_assert!((f.values()[m] - v).abs() <= 1.0 + 1e-6);
                }
            }
        }
    }

    #[test]
    fn directions_are_total_and_unit(pts in prop::collection::vec((5.0f64..35.0, 5.0f64..35.0), 0..40), lambda in 1.0f64..8.0) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let spec = GridSpec::new(&[40, 40]).unwrap();
        let nf = estimate_normals(&PointCloud::from_2d(&pts), &spec, lambda, 3);
        for v in nf.p.norm().values() {
            prop_assert!((v - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn energy_ignores_direction_signs(flips in prop::collection::vec(any::<bool>(), 64), r in 5.0f64..12.0) {
        let spec = GridSpec::new(&[32, 32]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| (x[0] - 16.0).hypot(x[1] - 15.5) - r);
        let f = ScalarField::from_fn(&spec, |x| (x[0] - 14.0).abs());
        let rr = ScalarField::constant(&spec, 1.3);
        let p = VectorField::from_scalars(vec![
            ScalarField::from_fn(&spec, |x| (0.1 * x[0]).cos()),
            ScalarField::from_fn(&spec, |x| (0.1 * x[0]).sin()),
        ])
        .unwrap();
        let mut q = p.clone();
        for n in 0..spec.len() {
            if flips[n % flips.len()] {
                let v = q.at(n);
                q.set(n, &[-v[0], -v[1]]);
            }
        }
        let w = EnergyWeights { eta0: 1.0, eta1: 2.0, eta2: 3.0, eps: 1.0 };
        let (a, b) = (energy(&psi, &f, &p, &rr, &w), energy(&psi, &f, &q, &rr, &w));
        prop_assert!((a.total() - b.total()).abs() <= 1e-12 * a.total().abs());
    }

    #[test]
    fn delta_is_even_positive_peaked(phi in -1e3f64..1e3, eps in 0.01f64..5.0) {
        let spec = GridSpec::new(&[4, 4]).unwrap();
        let d = |v: f64| delta_eps(&ScalarField::constant(&spec, v), eps).unwrap().values()[0];
        prop_assert_eq!(d(phi), d(-phi));
        prop_assert!(d(phi) > 0.0);
        prop_assert!(d(phi) <= d(0.0));
    }

    #[test]
    fn reinit_keeps_far_signs(cx in 20.0f64..44.0, cy in 20.0f64..44.0, r in 5.0f64..15.0, k in 0.3f64..3.0) {
        let spec = GridSpec::new(&[64, 64]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| k * ((x[0] - cx).hypot(x[1] - cy) - r));
        let out = reinitialize(&psi, 3);
        for (a, b) in out.values().iter().zip(psi.values()) {
            if b.abs() > 2.0 {
                prop_assert_eq!(a.signum(), b.signum());
            }
        }
    }

    #[test]
    fn extraction_tracks_circle_sdf(cx in 20.0f64..44.0, cy in 20.0f64..44.0, r in 4.0f64..15.0) {
        let spec = GridSpec::new(&[64, 64]).unwrap();
        let psi = ScalarField::from_fn(&spec, |x| (x[0] - cx).hypot(x[1] - cy) - r);
        let shape = Shape::Circle { center: [cx, cy], radius: r };
        let reference: Vec<[f64; 3]> = shape.dense_samples(0.1).iter().map(|v| pad3(v)).collect();
        let c = extract_zero_level(&psi);
        prop_assert!(hausdorff(&c.sample(0.1), &reference) <= 0.5);
    }
}

#[test]
fn extraction_tracks_sphere_sdf() {
    let spec = GridSpec::new(&[32, 32, 32]).unwrap();
    let (c, r) = ([15.7, 16.2, 15.1], 9.3);
    let psi = ScalarField::from_fn(&spec, |x| {
        ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt() - r
    });
    let contour = extract_zero_level(&psi);
    let worst = contour
        .sample(0.5)
        .iter()
        .map(|p| (((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt() - r).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.5, "{worst}");
    assert_eq!(contour.component_count(), 1);
}

#[test]
fn distance_oracle_3d() {
    let pts: Vec<[f64; 3]> = (0..30)
        .map(|k| {
            let t = k as f64 * 0.7;
            [16.0 + 10.0 * t.cos(), 16.0 + 10.0 * t.sin(), 4.0 + 0.8 * k as f64]
        })
        .collect();
    let cloud = PointCloud::from_3d(&pts);
    let spec = GridSpec::new(&[32, 32, 32]).unwrap();
    let f = eikonal_fast_sweep(&cloud, &spec, SweepOptions::default()).unwrap().f;
    let brute = brute_force_distance(&cloud, &spec).unwrap().f;
    let err = f
        .values()
        .iter()
        .zip(brute.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 2.0, "{err}");
}

#[test]
fn segment_directions_are_exact() {
    // one horizontal segment; nodes whose window sees only it
    let pts: Vec<[f64; 2]> = (0..81).map(|k| [10.0 + 0.5 * k as f64, 25.3]).collect();
    let spec = GridSpec::new(&[60, 50]).unwrap();
    let lambda = 4.0;
    let nf = estimate_normals(&PointCloud::from_2d(&pts), &spec, lambda, 3);
    let mut checked = 0;
    for n in 0..spec.len() {
        let x = [spec.coord(n, 0) as f64, spec.coord(n, 1) as f64];
        if (x[1] - 25.3).abs() <= lambda && x[0] >= 10.0 + lambda && x[0] <= 50.0 - lambda {
            assert!(nf.p.at(n)[1].abs() >= 1.0 - 1e-6);
            checked += 1;
        }
    }
    assert!(checked > 100);
}
