//! The vertical fundamental metrical d-tensor and Kronecker h-regularity.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Dims, Expr, ExprError, Var};
use crate::linalg::{invert_symmetric, LinalgError};
use crate::scenario::{Family, JetPoint, Scenario};
use crate::table::{ComponentTable, Slot};

/// Eigenvalues below this magnitude count as zero.
pub const SIGNATURE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum LagrangianError {
    #[error("evaluating `{field}` at {point}: {source}")]
    Eval {
        field: String,
        point: String,
        #[source]
        source: ExprError,
    },
    #[error("temporal metric at {point}: {source}")]
    Temporal {
        point: String,
        #[source]
        source: LinalgError,
    },
    #[error("not h-regular here ({point}): {source}")]
    NotRegular {
        point: String,
        #[source]
        source: LinalgError,
    },
}

#[derive(Clone, Debug)]
pub struct VerticalMetric {
    pub at: JetPoint,
    /// `G^{(α)(β)}_{(i)(j)}` at `[α, β, i, j]`.
    pub tensor: ComponentTable<f64>,
    pub g: Vec<Vec<f64>>,
    pub h_inv: Vec<Vec<f64>>,
}

fn eval(e: &Expr, field: &str, at: &JetPoint, order: usize) -> Result<crate::expr::JetValue, LagrangianError> {
    e.eval_jet(at, order).map_err(|source| LagrangianError::Eval { field: field.into(), point: at.to_string(), source })
}

fn values(m: &[Vec<Expr>], field: &str, at: &JetPoint) -> Result<Vec<Vec<f64>>, LagrangianError> {
    m.iter()
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(b, e)| Ok(eval(e, &format!("{field}[{}][{}]", a + 1, b + 1), at, 0)?.value()))
                .collect()
        })
        .collect()
}

fn metric_sig() -> [Slot; 4] {
    [Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO]
}

/// `½ ∂²L/∂x^i_α ∂x^j_β` at `[α, β, i, j]`.
pub fn hessian_metric(l: &Expr, at: &JetPoint) -> Result<ComponentTable<f64>, LagrangianError> {
    let dims = at.dims();
    let jv = eval(l, "L", at, 2)?;
    Ok(ComponentTable::from_fn("G", &metric_sig(), dims, |ix| {
        0.5 * jv.partial(&[Var::V { i: ix[2], alpha: ix[0] }, Var::V { i: ix[3], alpha: ix[1] }])
    }))
}

pub fn vertical_metric(s: &Scenario, at: &JetPoint) -> Result<VerticalMetric, LagrangianError> {
    let d = s.dims;
    let h = values(&s.h, "h", at)?;
    let h_inv = invert_symmetric(&h).map_err(|source| LagrangianError::Temporal { point: at.to_string(), source })?;
    let (tensor, g) = match &s.family {
        Family::GeneralP1 { l } => {
            let t = hessian_metric(l, at)?;
            let g = (0..d.n).map(|i| (0..d.n).map(|j| h[0][0] * t.at(&[0, 0, i, j])).collect()).collect();
            (t, g)
        }
        Family::Electrodynamics(e) | Family::Autonomous(e) => {
            let g = values(&e.g, "g", at)?;
            let t = ComponentTable::from_fn("G", &metric_sig(), d, |ix| h_inv[ix[0]][ix[1]] * g[ix[2]][ix[3]]);
            (t, g)
        }
    };
    invert_symmetric(&g).map_err(|source| LagrangianError::NotRegular { point: at.to_string(), source })?;
    Ok(VerticalMetric { at: at.clone(), tensor, g, h_inv })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

pub fn signature(m: &[Vec<f64>]) -> Signature {
    let k = m.len();
    let eig = SymmetricEigen::new(DMatrix::from_fn(k, k, |i, j| 0.5 * (m[i][j] + m[j][i])));
    let mut s = Signature { positive: 0, negative: 0, zero: 0 };
    for &l in eig.eigenvalues.iter() {
        if l.abs() < SIGNATURE_THRESHOLD {
            s.zero += 1;
        } else if l > 0.0 {
            s.positive += 1;
        } else {
            s.negative += 1;
        }
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct PointRegularity {
    pub point: JetPoint,
    /// `‖G − h^{αβ} g_ij‖∞` with `g_ij = (1/p) h_αβ G^{(α)(β)}_{(i)(j)}`.
    pub kronecker_residual: f64,
    /// Max `|∂³L/∂v∂v∂v|`, i.e. the velocity dependence of `G` (p ≥ 2 only).
    pub cubic_velocity: Option<f64>,
    pub signature: Signature,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub points: Vec<PointRegularity>,
    pub constant_signature: bool,
    pub max_kronecker_residual: f64,
    pub max_cubic_velocity: f64,
    pub pass: bool,
}

fn check_point(l: &Expr, h_exprs: &[Vec<Expr>], at: &JetPoint, tol: f64) -> Result<PointRegularity, LagrangianError> {
    let d: Dims = at.dims();
    let h = values(h_exprs, "h", at)?;
    let h_inv = invert_symmetric(&h).map_err(|source| LagrangianError::Temporal { point: at.to_string(), source })?;
    let order = if d.p >= 2 { 3 } else { 2 };
    let jv = eval(l, "L", at, order)?;
    let v = |i, alpha| Var::V { i, alpha };
    let big = |a: usize, b: usize, i: usize, j: usize| 0.5 * jv.partial(&[v(i, a), v(j, b)]);
    let g: Vec<Vec<f64>> = (0..d.n)
        .map(|i| {
            (0..d.n)
                .map(|j| {
                    let mut s = 0.0;
                    for a in 0..d.p {
                        for b in 0..d.p {
                            s += h[a][b] * big(a, b, i, j);
                        }
                    }
                    s / d.p as f64
                })
                .collect()
        })
        .collect();
    let mut residual: f64 = 0.0;
    for a in 0..d.p {
        for b in 0..d.p {
            for i in 0..d.n {
                for j in 0..d.n {
                    residual = residual.max((big(a, b, i, j) - h_inv[a][b] * g[i][j]).abs());
                }
            }
        }
    }
    let cubic_velocity = (d.p >= 2).then(|| {
        let vars: Vec<Var> = (0..d.n).flat_map(|i| (0..d.p).map(move |a| v(i, a))).collect();
        let mut worst: f64 = 0.0;
        for (x, &a) in vars.iter().enumerate() {
            for (y, &b) in vars.iter().enumerate().skip(x) {
                for &c in &vars[y..] {
                    worst = worst.max(jv.partial(&[a, b, c]).abs());
                }
            }
        }
        worst
    });
    let signature = signature(&g);
    let verdict = residual < tol && signature.zero == 0 && cubic_velocity.is_none_or(|c| c < tol);
    Ok(PointRegularity { point: at.clone(), kronecker_residual: residual, cubic_velocity, signature, verdict, error: None })
}

/// Checks an arbitrary Lagrangian against the Kronecker h-regularity conditions.
pub fn check_lagrangian(l: &Expr, h: &[Vec<Expr>], pts: &[JetPoint], tol: f64) -> RegularityReport {
    let points: Vec<PointRegularity> = pts
        .iter()
        .map(|at| {
            check_point(l, h, at, tol).unwrap_or_else(|e| PointRegularity {
                point: at.clone(),
                kronecker_residual: f64::NAN,
                cubic_velocity: None,
                signature: Signature { positive: 0, negative: 0, zero: 0 },
                verdict: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let constant_signature = points.windows(2).all(|w| w[0].signature == w[1].signature);
    let max_kronecker_residual = points.iter().fold(0.0_f64, |m, p| m.max(p.kronecker_residual));
    let max_cubic_velocity = points.iter().filter_map(|p| p.cubic_velocity).fold(0.0_f64, f64::max);
    let pass = !points.is_empty() && constant_signature && points.iter().all(|p| p.verdict);
    RegularityReport { points, constant_signature, max_kronecker_residual, max_cubic_velocity, pass }
}

pub fn check_kronecker_regularity(s: &Scenario, pts: &[JetPoint], tol: f64) -> RegularityReport {
    check_lagrangian(&s.lagrangian(), &s.h, pts, tol)
}
