#![allow(dead_code)]

use jetgeom::expr::{parse, Dims, Expr, Var};
use jetgeom::scenario::{JetPoint, Scenario};

pub fn scenario(doc: &str) -> Scenario {
    Scenario::from_toml_str(doc).unwrap_or_else(|e| panic!("bad fixture: {e}\n{doc}"))
}

pub fn point(t: &[f64], x: &[f64], v: &[&[f64]]) -> JetPoint {
    JetPoint::new(t.to_vec(), x.to_vec(), v.iter().map(|r| r.to_vec()).collect())
}

pub fn expr(src: &str, dims: Dims) -> Expr {
    parse(src, dims).unwrap()
}

/// Plain value of an expression (order-0 evaluation only).
pub fn value(e: &Expr, at: &JetPoint) -> f64 {
    e.eval_jet(at, 0).unwrap().value()
}

/// Central difference of `f` along one coordinate.
pub fn central(f: &dyn Fn(&JetPoint) -> f64, at: &JetPoint, var: Var, h: f64) -> f64 {
    let mut up = at.clone();
    let mut dn = at.clone();
    *up.coord_mut(var) += h;
    *dn.coord_mut(var) -= h;
    (f(&up) - f(&dn)) / (2.0 * h)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[track_caller]
pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(close(a, b, tol), "{a} vs {b} (tol {tol:e})");
}

pub const FLAT: &str = r#"
p = 2
n = 2
family = "electrodynamics"
h = [["1", "0"], ["0", "1"]]
g = [["1", "0"], ["0", "1"]]
U = [["0", "0"], ["0", "0"]]
F = "0"
"#;

pub const FLAT_U: &str = r#"
p = 2
n = 2
family = "electrodynamics"
h = [["1", "0"], ["0", "1"]]
g = [["1", "0"], ["0", "1"]]
U = [["x2", "0"], ["0", "0"]]
"#;

pub const SPHERE_P1: &str = r#"
p = 1
n = 2
family = "general_p1"
h = [["1"]]
L = "v1_1^2 + sin(x1)^2 * v2_1^2"
"#;

pub const SPHERE_AUTONOMOUS: &str = r#"
p = 1
n = 2
family = "autonomous"
h = [["1"]]
g = [["1", "0"], ["0", "sin(x1)^2"]]
"#;

pub const CURVED_H: &str = r#"
p = 2
n = 2
family = "autonomous"
h = [["1", "0"], ["0", "t1^2"]]
g = [["1", "0"], ["0", "1"]]
"#;

/// A rheonomic electrodynamics space with every ingredient switched on.
pub const RHEONOMIC: &str = r#"
p = 2
n = 2
family = "electrodynamics"
h = [["1 + 0.2*t1^2", "0.1*t2"], ["0.1*t2", "2 + 0.1*sin(t1)"]]
g = [["2 + 0.3*sin(x1 + t2)", "0.2*x2*t1"], ["0.2*x2*t1", "1.5 + 0.2*cos(x2) + 0.1*t1*t2"]]
U = [["x2 + 0.3*t1*x1", "0.5*x1^2"], ["sin(x2) * t2", "x1*x2"]]
F = "x1*t1"
"#;

/// A p = 1 Lagrangian outside the electrodynamics family.
pub const GENERAL_P1: &str = r#"
p = 1
n = 2
family = "general_p1"
h = [["1"]]
L = "(1 + 0.2*t1^2 + 0.1*x1^2) * v1_1^2 + exp(0.3*v1_1) * (1 + 0.1*x2) + (2 + 0.2*sin(x1*t1)) * v2_1^2 + 0.2*v1_1^2*v2_1^2 + x1*v2_1"
"#;

pub fn generic_point(dims: Dims) -> JetPoint {
    let t: Vec<f64> = (0..dims.p).map(|a| 0.31 + 0.17 * a as f64).collect();
    let x: Vec<f64> = (0..dims.n).map(|i| 0.42 - 0.23 * i as f64).collect();
    let v: Vec<Vec<f64>> = (0..dims.n)
        .map(|i| (0..dims.p).map(|a| 0.27 - 0.19 * i as f64 + 0.11 * a as f64).collect())
        .collect();
    JetPoint::new(t, x, v)
}
