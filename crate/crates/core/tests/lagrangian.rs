mod common;

use common::*;
use jetgeom::expr::{Dims, Expr, Var};
use jetgeom::lagrangian::*;
use jetgeom::scenario::JetPoint;

fn h_of(rows: &[&[&str]], dims: Dims) -> Vec<Vec<Expr>> {
    rows.iter().map(|r| r.iter().map(|s| expr(s, dims)).collect()).collect()
}

fn identity(p: usize) -> Vec<Vec<&'static str>> {
    (0..p).map(|a| (0..p).map(|b| if a == b { "1" } else { "0" }).collect()).collect()
}

fn check(l: &str, h: &[Vec<&str>], dims: Dims, pts: &[JetPoint]) -> RegularityReport {
    let rows: Vec<&[&str]> = h.iter().map(Vec::as_slice).collect();
    check_lagrangian(&expr(l, dims), &h_of(&rows, dims), pts, 1e-9)
}

fn some_points(dims: Dims) -> Vec<JetPoint> {
    (0..4)
        .map(|k| {
            let f = |j: usize| 0.3 * ((k * 7 + j * 3) % 11) as f64 / 11.0 - 0.1 * k as f64;
            let t = (0..dims.p).map(|a| 0.2 + f(a)).collect();
            let x = (0..dims.n).map(|i| 0.4 + f(10 + i)).collect();
            let v = (0..dims.n).map(|i| (0..dims.p).map(|a| f(20 + i * dims.p + a) - 0.1).collect()).collect();
            JetPoint::new(t, x, v)
        })
        .collect()
}

#[test]
fn quadratic_lagrangian_has_identity_metric() {
    let dims = Dims::new(1, 2);
    let pts = some_points(dims);
    let r = check("v1_1^2 + v2_1^2", &identity(1), dims, &pts);
    assert!(r.pass);
    assert_eq!(r.max_kronecker_residual, 0.0);
    assert_eq!(r.points[0].signature, Signature { positive: 2, negative: 0, zero: 0 });
    let g = hessian_metric(&expr("v1_1^2 + v2_1^2", dims), &pts[0]).unwrap();
    assert_eq!(*g.at(&[0, 0, 0, 0]), 1.0);
    assert_eq!(*g.at(&[0, 0, 0, 1]), 0.0);
}

#[test]
fn time_dependent_coefficient() {
    let dims = Dims::new(1, 1);
    let at = point(&[1.0], &[0.3], &[&[0.8]]);
    let g = hessian_metric(&expr("(1 + t1^2) * v1_1^2", dims), &at).unwrap();
    assert_close(*g.at(&[0, 0, 0, 0]), 2.0, 1e-14);
}

#[test]
fn hessian_matches_finite_differences() {
    let dims = Dims::new(2, 2);
    let src = "exp(0.3*v1_1*v2_2) + sin(x1)*v1_2^2*v2_1 + t1*v2_1*v1_1^3";
    let l = expr(src, dims);
    let at = some_points(dims)[1].clone();
    let g = hessian_metric(&l, &at).unwrap();
    let f = |p: &JetPoint| value(&l, p);
    let h = 1e-4;
    for ix in g.indices() {
        let (a, b, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        let (va, vb) = (Var::V { i, alpha: a }, Var::V { i: j, alpha: b });
        let fd = central(&|p: &JetPoint| central(&f, p, vb, h), &at, va, h);
        assert_close(*g.at(&ix), 0.5 * fd, 1e-6);
    }
}

#[test]
fn exponential_p1_lagrangian_is_regular() {
    let dims = Dims::new(1, 1);
    let r = check("exp(v1_1^2)", &identity(1), dims, &some_points(dims));
    assert!(r.pass, "{r:?}");
    assert!(r.points.iter().all(|p| p.cubic_velocity.is_none()));
}

#[test]
fn electrodynamics_lagrangian_passes() {
    let dims = Dims::new(2, 2);
    let h = [vec!["1 + 0.1*t1^2", "0.2"], vec!["0.2", "2"]];
    let s = scenario(
        r#"
        p = 2
        n = 2
        family = "electrodynamics"
        h = [["1 + 0.1*t1^2", "0.2"], ["0.2", "2"]]
        g = [["1 + x1^2", "0"], ["0", "2"]]
        U = [["x2", "t1"], ["0", "x1*x2"]]
        F = "sin(x1) + t2"
    "#,
    );
    let pts = some_points(dims);
    let r = check_kronecker_regularity(&s, &pts, 1e-9);
    assert!(r.pass, "{r:?}");
    assert!(r.max_cubic_velocity < 1e-12);
    assert!(r.constant_signature);
    let rows: Vec<&[&str]> = h.iter().map(Vec::as_slice).collect();
    let alt = check_lagrangian(&s.lagrangian(), &h_of(&rows, dims), &pts, 1e-9);
    assert!(alt.pass);
}

#[test]
fn synthesized_lagrangian_reproduces_the_vertical_metric() {
    for doc in [FLAT_U, RHEONOMIC, CURVED_H, SPHERE_AUTONOMOUS] {
        let s = scenario(doc);
        let l = s.lagrangian();
        for at in some_points(s.dims) {
            let vm = vertical_metric(&s, &at).unwrap();
            let hm = hessian_metric(&l, &at).unwrap();
            for ix in hm.indices() {
                assert_close(*hm.at(&ix), *vm.tensor.at(&ix), 1e-8);
            }
        }
    }
}

#[test]
fn quartic_velocity_term_breaks_regularity() {
    let dims = Dims::new(2, 1);
    let r = check("v1_1^2 + v1_2^2 + v1_1^4", &identity(2), dims, &some_points(dims));
    assert!(!r.pass);
    assert!(r.max_cubic_velocity > 1e-3);
    let bad = r.points.iter().find(|p| !p.verdict).unwrap();
    assert!(bad.cubic_velocity.unwrap() > 1e-3);
}

#[test]
fn velocity_mixing_violates_the_kronecker_form() {
    let dims = Dims::new(2, 1);
    let r = check("v1_1^2 + 3*v1_2^2", &identity(2), dims, &some_points(dims));
    assert!(!r.pass);
    assert_close(r.max_kronecker_residual, 1.0, 1e-12);
}

#[test]
fn degenerate_metric_fails() {
    let dims = Dims::new(1, 2);
    let r = check("v1_1^2", &identity(1), dims, &some_points(dims));
    assert!(!r.pass);
    assert_eq!(r.points[0].signature, Signature { positive: 1, negative: 0, zero: 1 });
    let s = scenario(
        r#"
        p = 1
        n = 2
        family = "general_p1"
        h = [["1"]]
        L = "v1_1^2"
    "#,
    );
    assert!(matches!(vertical_metric(&s, &some_points(dims)[0]), Err(LagrangianError::NotRegular { .. })));
}

#[test]
fn signature_changes_are_detected() {
    let dims = Dims::new(1, 1);
    let pts = vec![point(&[0.0], &[-0.5], &[&[0.1]]), point(&[0.0], &[0.5], &[&[0.1]])];
    let r = check("x1 * v1_1^2", &identity(1), dims, &pts);
    assert!(!r.constant_signature);
    assert!(!r.pass);
    assert!(r.points.iter().all(|p| p.verdict));
}

#[test]
fn lorentzian_signature() {
    let s = signature(&[vec![1.0, 0.0, 0.0], vec![0.0, -2.0, 0.0], vec![0.0, 0.0, 1e-12]]);
    assert_eq!(s, Signature { positive: 1, negative: 1, zero: 1 });
    let s = signature(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    assert_eq!(s, Signature { positive: 1, negative: 1, zero: 0 });
}

#[test]
fn evaluation_errors_are_reported_per_point() {
    let dims = Dims::new(1, 1);
    let r = check("log(x1) * v1_1^2", &identity(1), dims, &[point(&[0.0], &[-1.0], &[&[0.3]])]);
    assert!(!r.pass);
    assert!(r.points[0].error.as_deref().is_some_and(|e| e.contains('L')));
    let singular_h = vec![vec!["0"]];
    let r = check("v1_1^2", &singular_h, dims, &[point(&[0.0], &[1.0], &[&[0.3]])]);
    assert!(r.points[0].error.as_deref().is_some_and(|e| e.contains("temporal")));
}
