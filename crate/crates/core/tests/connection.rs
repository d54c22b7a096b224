mod common;

use std::f64::consts::FRAC_PI_4;

use common::*;
use jetgeom::connection::{Covariant, Direction, GeometryOptions, PointGeometry};
use jetgeom::expr::{Dims, Var};
use jetgeom::scenario::JetPoint;

fn geometry(doc: &str, at: &JetPoint) -> PointGeometry {
    PointGeometry::build(&scenario(doc), at, &GeometryOptions::default()).unwrap()
}

fn val(t: &jetgeom::connection::JetTable, ix: &[usize]) -> f64 {
    t.at(ix).value()
}

#[test]
fn flat_temporal_christoffel_vanishes() {
    let geo = geometry(FLAT, &generic_point(Dims::new(2, 2)));
    assert_eq!(geo.temporal_christoffel.values().max_abs(), 0.0);
    assert_eq!(geo.spatial_christoffel.values().max_abs(), 0.0);
}

/// Christoffel symbols of a diagonal metric from central differences of its entries.
fn fd_christoffel(diag: &dyn Fn(&[f64]) -> Vec<f64>, z: &[f64], a: usize, b: usize, c: usize) -> f64 {
    let h = 1e-5;
    let d = |k: usize, comp: usize| {
        let mut up = z.to_vec();
        let mut dn = z.to_vec();
        up[k] += h;
        dn[k] -= h;
        (diag(&up)[comp] - diag(&dn)[comp]) / (2.0 * h)
    };
    let m = diag(z);
    let lower = |dd: usize| {
        let term = |x: usize, y: usize, k: usize| if x == y { d(k, x) } else { 0.0 };
        0.5 * (term(dd, b, c) + term(dd, c, b) - term(b, c, dd))
    };
    lower(a) / m[a]
}

#[test]
fn curved_temporal_metric_christoffel() {
    let at = point(&[2.0, 0.3], &[0.1, 0.2], &[&[0.5, 0.1], &[0.2, -0.3]]);
    let geo = geometry(CURVED_H, &at);
    let h = &geo.temporal_christoffel;
    assert_close(val(h, &[1, 0, 1]), 0.5, 1e-14);
    assert_close(val(h, &[0, 1, 1]), -2.0, 1e-14);
    let diag = |t: &[f64]| vec![1.0, t[0] * t[0]];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                assert_close(val(h, &[a, b, c]), fd_christoffel(&diag, &at.t, a, b, c), 1e-8);
            }
        }
    }
}

#[test]
fn sphere_spatial_christoffel() {
    let at = point(&[0.0], &[FRAC_PI_4, 0.3], &[&[1.0], &[1.0]]);
    let geo = geometry(SPHERE_AUTONOMOUS, &at);
    let g = &geo.spatial_christoffel;
    assert_close(val(g, &[0, 1, 1]), -0.5, 1e-12);
    assert_close(val(g, &[1, 0, 1]), 1.0, 1e-12);
    let diag = |x: &[f64]| vec![1.0, x[0].sin().powi(2)];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                assert_close(val(g, &[a, b, c]), fd_christoffel(&diag, &at.x, a, b, c), 1e-8);
            }
        }
    }
}

#[test]
fn exponential_metric_christoffel() {
    let doc = r#"
        p = 2
        n = 2
        family = "autonomous"
        h = [["1", "0"], ["0", "1"]]
        g = [["exp(x1)", "0"], ["0", "1"]]
    "#;
    let geo = geometry(doc, &JetPoint::zeros(Dims::new(2, 2)));
    assert_close(val(&geo.spatial_christoffel, &[0, 0, 0]), 0.5, 1e-14);
}

#[test]
fn flat_nonlinear_connection_vanishes() {
    let geo = geometry(FLAT, &generic_point(Dims::new(2, 2)));
    assert_eq!(geo.m.values().max_abs(), 0.0);
    assert_eq!(geo.n.values().max_abs(), 0.0);
}

#[test]
fn u_curl_enters_spatial_connection() {
    let geo = geometry(FLAT_U, &generic_point(Dims::new(2, 2)));
    let uc = geo.u_curl.as_ref().unwrap();
    assert_close(val(uc, &[0, 0, 1]), 1.0, 1e-15);
    assert_close(val(uc, &[0, 1, 0]), -1.0, 1e-15);
    assert_close(val(&geo.n, &[0, 0, 1]), 0.25, 1e-15);
    assert_close(val(&geo.n, &[1, 0, 0]), -0.25, 1e-15);
}

#[test]
fn adapted_derivatives() {
    let d = Dims::new(2, 2);
    let geo = geometry(FLAT_U, &generic_point(d));
    let f = expr("v1_1", d);
    assert_close(geo.adapted_derivative(&f, Direction::X(1)).unwrap(), -0.25, 1e-15);
    let f = expr("x1^2 * t2", d);
    let at = generic_point(d);
    assert_close(
        geo.adapted_derivative(&f, Direction::X(0)).unwrap(),
        2.0 * at.x[0] * at.t[1],
        1e-14,
    );
    let f = expr("sin(t1) * x2", d);
    assert_close(
        geo.adapted_derivative(&f, Direction::T(0)).unwrap(),
        at.t[0].cos() * at.x[1],
        1e-14,
    );
}

#[test]
fn adapted_derivative_is_a_derivation() {
    let d = Dims::new(2, 2);
    let geo = geometry(RHEONOMIC, &generic_point(d));
    let f = expr("sin(x1) * v1_2 + t1 * v2_1^2", d);
    let g = expr("exp(0.3 * v1_1) * x2 + t2", d);
    let fg = jetgeom::expr::Expr::bin(jetgeom::expr::BinOp::Mul, f.clone(), g.clone());
    let at = generic_point(d);
    for dir in [Direction::T(0), Direction::T(1), Direction::X(0), Direction::X(1), Direction::V { i: 1, alpha: 0 }] {
        let lhs = geo.adapted_derivative(&fg, dir).unwrap();
        let rhs = geo.adapted_derivative(&f, dir).unwrap() * value(&g, &at)
            + value(&f, &at) * geo.adapted_derivative(&g, dir).unwrap();
        assert_close(lhs, rhs, 1e-12);
        let sum = jetgeom::expr::Expr::bin(jetgeom::expr::BinOp::Add, f.clone(), g.clone());
        let lin = geo.adapted_derivative(&f, dir).unwrap() + geo.adapted_derivative(&g, dir).unwrap();
        assert_close(geo.adapted_derivative(&sum, dir).unwrap(), lin, 1e-12);
    }
}

#[test]
fn p1_semispray_path_reproduces_levi_civita_connection() {
    let at = point(&[0.0], &[FRAC_PI_4, 0.3], &[&[1.0], &[1.0]]);
    let geo = geometry(SPHERE_P1, &at);
    assert_close(val(&geo.n, &[0, 0, 1]), -0.5, 1e-12);
    for i in 0..2 {
        for j in 0..2 {
            let expect: f64 = (0..2).map(|k| val(&geo.spatial_christoffel, &[i, j, k]) * at.v[k][0]).sum();
            assert_close(val(&geo.n, &[i, 0, j]), expect, 1e-12);
        }
    }
}

#[test]
fn p1_vertical_metric_from_hessian() {
    let doc = r#"
        p = 1
        n = 1
        family = "general_p1"
        h = [["1"]]
        L = "(1 + t1^2) * v1_1^2"
    "#;
    let at = point(&[1.0], &[0.0], &[&[0.7]]);
    let geo = geometry(doc, &at);
    assert_close(val(&geo.vertical_metric, &[0, 0, 0, 0]), 2.0, 1e-14);
    assert_close(val(&geo.g, &[0, 0]), 2.0, 1e-14);
}

#[test]
fn vertical_cartan_coefficient_matches_finite_differences() {
    let s = scenario(GENERAL_P1);
    let at = generic_point(s.dims);
    let geo = PointGeometry::build(&s, &at, &GeometryOptions::default()).unwrap();
    let l = s.lagrangian();
    // g_ij from a finite-difference Hessian of L, then C from finite differences of g
    let metric = |q: &JetPoint, i: usize, j: usize| {
        let f = |r: &JetPoint| value(&l, r);
        let fi = |r: &JetPoint| central(&f, r, Var::V { i, alpha: 0 }, 1e-3);
        0.5 * central(&fi, q, Var::V { i: j, alpha: 0 }, 1e-3)
    };
    let dg = |m: usize, a: usize, k: usize| central(&|q| metric(q, m, a), &at, Var::V { i: k, alpha: 0 }, 1e-3);
    let g: Vec<Vec<f64>> = (0..2).map(|i| (0..2).map(|j| metric(&at, i, j)).collect()).collect();
    let gi = jetgeom::linalg::invert_symmetric(&g).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let expect: f64 = (0..2)
                    .map(|m| gi[i][m] * 0.5 * (dg(m, j, k) + dg(m, k, j) - dg(j, k, m)))
                    .sum();
                assert_close(val(&geo.cartan_c, &[i, j, k, 0]), expect, 1e-5);
            }
        }
    }
}

#[test]
fn multi_time_cartan_reductions() {
    let s = scenario(RHEONOMIC);
    let geo = PointGeometry::build(&s, &generic_point(s.dims), &GeometryOptions::default()).unwrap();
    assert!(geo.cartan_c.data().iter().all(|c| c.is_zero()));
    assert!(geo.cartan_l.values().max_diff(&geo.spatial_christoffel.values()) < 1e-13);
    let (p, n) = (2, 2);
    for k in 0..n {
        for j in 0..n {
            for c in 0..p {
                let expect: f64 = (0..n)
                    .map(|i| 0.5 * val(&geo.g_inv, &[k, i]) * geo.g.at(&[i, j]).gradient(s.dims.t(c)))
                    .sum();
                assert_close(val(&geo.cartan_g, &[k, j, c]), expect, 1e-13);
            }
        }
    }
}

#[test]
fn cartan_symmetries() {
    for doc in [RHEONOMIC, GENERAL_P1, SPHERE_P1] {
        let s = scenario(doc);
        let geo = PointGeometry::build(&s, &generic_point(s.dims), &GeometryOptions::default()).unwrap();
        assert!(geo.cartan_l.values().symmetry_deviation(1, 2) < 1e-10);
        assert!(geo.cartan_c.values().symmetry_deviation(1, 2) < 1e-10);
    }
}

#[test]
fn metricity_holds() {
    for doc in [RHEONOMIC, GENERAL_P1, SPHERE_P1, CURVED_H] {
        let s = scenario(doc);
        let geo = PointGeometry::build(&s, &generic_point(s.dims), &GeometryOptions::default()).unwrap();
        for (name, t) in geo.metricity() {
            assert!(t.max_abs() < 1e-10, "{name}: {}", t.max_abs());
        }
    }
}

#[test]
fn fault_injection_breaks_metricity() {
    let s = scenario(FLAT);
    let opts = GeometryOptions { fault: Some(1e-3) };
    let geo = PointGeometry::build(&s, &generic_point(s.dims), &opts).unwrap();
    let worst = geo.metricity().iter().map(|(_, t)| t.max_abs()).fold(0.0, f64::max);
    assert!(worst >= 1e-3);
}

#[test]
fn scalar_covariant_derivatives_are_adapted_derivatives() {
    let s = scenario(RHEONOMIC);
    let at = generic_point(s.dims);
    let geo = PointGeometry::build(&s, &at, &GeometryOptions::default()).unwrap();
    let f = geo.g.at(&[0, 1]).clone();
    let scalar = jetgeom::table::ComponentTable::from_fn("f", &[], s.dims, |_| f.clone());
    let cov = geo.covariant(&scalar, Covariant::Spatial);
    for k in 0..2 {
        assert_close(cov.at(&[k]).value(), geo.delta_value(&f, Direction::X(k)), 1e-14);
    }
}

#[test]
fn degenerate_metric_is_reported() {
    let doc = FLAT.replace(r#"g = [["1", "0"], ["0", "1"]]"#, r#"g = [["1", "0"], ["0", "0"]]"#);
    let s = scenario(&doc);
    let err = PointGeometry::build(&s, &generic_point(s.dims), &GeometryOptions::default()).unwrap_err();
    assert!(err.to_string().contains("not h-regular here"), "{err}");
}
