//! Scenario files and jet points.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! p = 2
//! n = 2
//! family = "electrodynamics"      # or "general_p1", "autonomous"
//! h = [["1", "0"], ["0", "1"]]
//! g = [["1", "0"], ["0", "1"]]
//! U = [["x2", "0"], ["0", "0"]]   # U[a][i], optional
//! F = "0"                         # optional
//! einstein_K = 1.0                # optional, 0 means vacuum
//! tol = 1e-8                      # optional
//! ```
//!
//! A `general_p1` scenario gives `L = "expr"` instead of `g`, `U`, `F`.
//! Matrix entries may be strings or bare numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, BinOp, Dims, Expr, ExprError, Var};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario document: {0}")]
    Document(String),
    #[error("invalid dimensions p={p}, n={n}: both must be at least 1")]
    InvalidDims { p: usize, n: usize },
    #[error("GeneralP1 requires p=1 (got p={0})")]
    GeneralP1RequiresP1(usize),
    #[error("field `{field}`: expected {expected}, found {found}")]
    Dimension {
        field: String,
        expected: String,
        found: String,
    },
    #[error("field `{0}` is required for this family")]
    Missing(&'static str),
    #[error("field `{field}` is not allowed for family {family}")]
    Unexpected { field: &'static str, family: String },
    #[error("field `{field}`: {source}")]
    Expr {
        field: String,
        #[source]
        source: ExprError,
    },
    #[error("`{field}` is declared asymmetrically: entry [{i}][{j}] differs from [{j}][{i}]")]
    Asymmetric { field: &'static str, i: usize, j: usize },
    #[error("field `{field}` may not depend on {var} ({reason})")]
    ForbiddenVariable {
        field: String,
        var: String,
        reason: &'static str,
    },
    #[error("field `{field}`: {reason}")]
    InvalidValue { field: &'static str, reason: String },
}

/// Which Lagrangian family the scenario declares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    GeneralP1,
    Electrodynamics,
    Autonomous,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::GeneralP1 => "general_p1",
            FamilyKind::Electrodynamics => "electrodynamics",
            FamilyKind::Autonomous => "autonomous",
        })
    }
}

/// Spatial data of an electrodynamics space.
#[derive(Clone, Debug, PartialEq)]
pub struct Electro {
    pub g: Vec<Vec<Expr>>,
    /// `u[a][i]` is `U^{(a)}_{(i)}`.
    pub u: Vec<Vec<Expr>>,
    pub f: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    GeneralP1 { l: Expr },
    Electrodynamics(Electro),
    Autonomous(Electro),
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::GeneralP1 { .. } => FamilyKind::GeneralP1,
            Family::Electrodynamics(_) => FamilyKind::Electrodynamics,
            Family::Autonomous(_) => FamilyKind::Autonomous,
        }
    }

    pub fn electro(&self) -> Option<&Electro> {
        match self {
            Family::GeneralP1 { .. } => None,
            Family::Electrodynamics(e) | Family::Autonomous(e) => Some(e),
        }
    }
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub dims: Dims,
    pub h: Vec<Vec<Expr>>,
    pub family: Family,
    /// Einstein constant; zero means vacuum.
    pub einstein_k: f64,
    pub tol: f64,
}

pub const DEFAULT_TOL: f64 = 1e-8;

/// A point `(t^α, x^i, x^i_α)` of the jet space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetPoint {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// `v[i][alpha]` is `x^i_alpha`.
    pub v: Vec<Vec<f64>>,
}

impl JetPoint {
    pub fn new(t: Vec<f64>, x: Vec<f64>, v: Vec<Vec<f64>>) -> Self {
        JetPoint { t, x, v }
    }

    pub fn zeros(dims: Dims) -> Self {
        JetPoint {
            t: vec![0.0; dims.p],
            x: vec![0.0; dims.n],
            v: vec![vec![0.0; dims.p]; dims.n],
        }
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.t.len(), self.x.len())
    }

    /// Checks shape against `dims` and finiteness.
    pub fn validate(&self, dims: Dims) -> Result<(), String> {
        if self.t.len() != dims.p || self.x.len() != dims.n {
            return Err(format!(
                "point has {} t and {} x coordinates, scenario needs {} and {}",
                self.t.len(),
                self.x.len(),
                dims.p,
                dims.n
            ));
        }
        if self.v.len() != dims.n || self.v.iter().any(|row| row.len() != dims.p) {
            return Err(format!("point velocities must be an {}x{} array", dims.n, dims.p));
        }
        if !self.coords().iter().all(|c| c.is_finite()) {
            return Err("point has non-finite coordinates".into());
        }
        Ok(())
    }

    /// Coordinates in jet-variable order.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.t.len() + self.x.len() * (1 + self.t.len()));
        c.extend(&self.t);
        c.extend(&self.x);
        for row in &self.v {
            c.extend(row);
        }
        c
    }

    pub fn coord(&self, var: Var) -> f64 {
        match var {
            Var::T(a) => self.t[a],
            Var::X(i) => self.x[i],
            Var::V { i, alpha } => self.v[i][alpha],
        }
    }

    pub fn coord_mut(&mut self, var: Var) -> &mut f64 {
        match var {
            Var::T(a) => &mut self.t[a],
            Var::X(i) => &mut self.x[i],
            Var::V { i, alpha } => &mut self.v[i][alpha],
        }
    }
}

impl fmt::Display for JetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={:?} x={:?} v={:?}", self.t, self.x, self.v)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn source(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Number(v) => format!("{v:?}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    p: usize,
    n: usize,
    family: FamilyKind,
    h: Vec<Vec<Entry>>,
    #[serde(rename = "L")]
    l: Option<Entry>,
    g: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "U")]
    u: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "F")]
    f: Option<Entry>,
    #[serde(rename = "einstein_K")]
    einstein_k: Option<f64>,
    tol: Option<f64>,
}

fn parse_entry(e: &Entry, field: String, dims: Dims) -> Result<Expr, ScenarioError> {
    parse(&e.source(), dims).map_err(|source| ScenarioError::Expr { field, source })
}

fn parse_matrix(
    rows: &[Vec<Entry>],
    name: &'static str,
    shape: (usize, usize),
    dims: Dims,
) -> Result<Vec<Vec<Expr>>, ScenarioError> {
    let bad_shape = || ScenarioError::Dimension {
        field: name.to_string(),
        expected: format!("{}x{} matrix", shape.0, shape.1),
        found: format!(
            "{} rows of lengths {:?}",
            rows.len(),
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ),
    };
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(bad_shape());
    }
    rows.iter()
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(b, e)| parse_entry(e, format!("{name}[{}][{}]", a + 1, b + 1), dims))
                .collect()
        })
        .collect()
}

fn zero_matrix(rows: usize, cols: usize) -> Vec<Vec<Expr>> {
    vec![vec![Expr::Num(0.0); cols]; rows]
}

impl Scenario {
    /// Builds and validates a scenario from parsed parts.
    pub fn new(dims: Dims, h: Vec<Vec<Expr>>, family: Family, einstein_k: f64, tol: f64) -> Result<Self, ScenarioError> {
        let s = Scenario {
            dims,
            h,
            family,
            einstein_k,
            tol,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let doc: Document = toml::from_str(text).map_err(|e| ScenarioError::Document(e.to_string()))?;
        let dims = Dims::new(doc.p, doc.n);
        if !dims.is_valid() {
            return Err(ScenarioError::InvalidDims { p: doc.p, n: doc.n });
        }
        let h = parse_matrix(&doc.h, "h", (dims.p, dims.p), dims)?;
        let family = match doc.family {
            FamilyKind::GeneralP1 => {
                if dims.p != 1 {
                    return Err(ScenarioError::GeneralP1RequiresP1(dims.p));
                }
                for (present, field) in [(doc.g.is_some(), "g"), (doc.u.is_some(), "U"), (doc.f.is_some(), "F")] {
                    if present {
                        return Err(ScenarioError::Unexpected {
                            field,
                            family: doc.family.to_string(),
                        });
                    }
                }
                let l = doc.l.as_ref().ok_or(ScenarioError::Missing("L"))?;
                Family::GeneralP1 {
                    l: parse_entry(l, "L".into(), dims)?,
                }
            }
            kind => {
                if doc.l.is_some() {
                    return Err(ScenarioError::Unexpected {
                        field: "L",
                        family: kind.to_string(),
                    });
                }
                let g = parse_matrix(doc.g.as_deref().ok_or(ScenarioError::Missing("g"))?, "g", (dims.n, dims.n), dims)?;
                let u = match &doc.u {
                    Some(rows) => parse_matrix(rows, "U", (dims.p, dims.n), dims)?,
                    None => zero_matrix(dims.p, dims.n),
                };
                let f = match &doc.f {
                    Some(e) => parse_entry(e, "F".into(), dims)?,
                    None => Expr::Num(0.0),
                };
                let e = Electro { g, u, f };
                if kind == FamilyKind::Autonomous {
                    Family::Autonomous(e)
                } else {
                    Family::Electrodynamics(e)
                }
            }
        };
        Scenario::new(
            dims,
            h,
            family,
            doc.einstein_k.unwrap_or(1.0),
            doc.tol.unwrap_or(DEFAULT_TOL),
        )
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let d = self.dims;
        if !d.is_valid() {
            return Err(ScenarioError::InvalidDims { p: d.p, n: d.n });
        }
        if !(self.einstein_k.is_finite() && self.einstein_k >= 0.0) {
            return Err(ScenarioError::InvalidValue {
                field: "einstein_K",
                reason: format!("must be a finite nonnegative number, got {}", self.einstein_k),
            });
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(ScenarioError::InvalidValue {
                field: "tol",
                reason: format!("must be a positive number, got {}", self.tol),
            });
        }
        check_shape(&self.h, "h", d.p, d.p)?;
        check_symmetric(&self.h, "h")?;
        for (a, row) in self.h.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                forbid(e, format!("h[{}][{}]", a + 1, b + 1), |v| !v.is_temporal(), "h depends on t only")?;
            }
        }
        match &self.family {
            Family::GeneralP1 { .. } => {
                if d.p != 1 {
                    return Err(ScenarioError::GeneralP1RequiresP1(d.p));
                }
            }
            Family::Electrodynamics(e) | Family::Autonomous(e) => {
                let autonomous = matches!(self.family, Family::Autonomous(_));
                check_shape(&e.g, "g", d.n, d.n)?;
                check_symmetric(&e.g, "g")?;
                check_shape(&e.u, "U", d.p, d.n)?;
                for (i, row) in e.g.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        let field = format!("g[{}][{}]", i + 1, j + 1);
                        forbid(x, field.clone(), Var::is_velocity, "g depends on (t, x) only")?;
                        if autonomous {
                            forbid(x, field, Var::is_temporal, "an autonomous g depends on x only")?;
                        }
                    }
                }
                for (a, row) in e.u.iter().enumerate() {
                    for (i, x) in row.iter().enumerate() {
                        forbid(x, format!("U[{}][{}]", a + 1, i + 1), Var::is_velocity, "U depends on (t, x) only")?;
                    }
                }
                forbid(&e.f, "F".into(), Var::is_velocity, "F depends on (t, x) only")?;
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    /// True when the geometry is driven by a general Lagrangian (p = 1 branch).
    pub fn uses_p1_branch(&self) -> bool {
        self.dims.p == 1
    }

    /// The Lagrangian: `L` itself, or the synthesized electrodynamics form
    /// `h^{αβ} g_ij x^i_α x^j_β + U^{(α)}_{(i)} x^i_α + F`.
    pub fn lagrangian(&self) -> Expr {
        match &self.family {
            Family::GeneralP1 { l } => l.clone(),
            Family::Electrodynamics(e) | Family::Autonomous(e) => {
                let d = self.dims;
                let h_inv = symbolic_inverse(&self.h);
                let mut terms = Vec::new();
                for a in 0..d.p {
                    for b in 0..d.p {
                        for i in 0..d.n {
                            for j in 0..d.n {
                                if h_inv[a][b].is_zero_literal() || e.g[i][j].is_zero_literal() {
                                    continue;
                                }
                                terms.push(Expr::product([
                                    h_inv[a][b].clone(),
                                    e.g[i][j].clone(),
                                    Expr::var(Var::V { i, alpha: a }),
                                    Expr::var(Var::V { i: j, alpha: b }),
                                ]));
                            }
                        }
                    }
                }
                for a in 0..d.p {
                    for i in 0..d.n {
                        if !e.u[a][i].is_zero_literal() {
                            terms.push(Expr::product([e.u[a][i].clone(), Expr::var(Var::V { i, alpha: a })]));
                        }
                    }
                }
                if !e.f.is_zero_literal() {
                    terms.push(e.f.clone());
                }
                Expr::sum(terms)
            }
        }
    }

    /// Every expression of the scenario keyed by its field name.
    pub fn expressions(&self) -> BTreeMap<String, &Expr> {
        let mut out = BTreeMap::new();
        for (a, row) in self.h.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                out.insert(format!("h[{}][{}]", a + 1, b + 1), e);
            }
        }
        match &self.family {
            Family::GeneralP1 { l } => {
                out.insert("L".into(), l);
            }
            Family::Electrodynamics(e) | Family::Autonomous(e) => {
                for (i, row) in e.g.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        out.insert(format!("g[{}][{}]", i + 1, j + 1), x);
                    }
                }
                for (a, row) in e.u.iter().enumerate() {
                    for (i, x) in row.iter().enumerate() {
                        out.insert(format!("U[{}][{}]", a + 1, i + 1), x);
                    }
                }
                out.insert("F".into(), &e.f);
            }
        }
        out
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml_str(&text)
}

fn check_shape(m: &[Vec<Expr>], field: &'static str, rows: usize, cols: usize) -> Result<(), ScenarioError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(ScenarioError::Dimension {
            field: field.into(),
            expected: format!("{rows}x{cols} matrix"),
            found: format!("{} rows", m.len()),
        });
    }
    Ok(())
}

fn check_symmetric(m: &[Vec<Expr>], field: &'static str) -> Result<(), ScenarioError> {
    for i in 0..m.len() {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(ScenarioError::Asymmetric { field, i: j + 1, j: i + 1 });
            }
        }
    }
    Ok(())
}

fn forbid(e: &Expr, field: String, bad: impl Fn(&Var) -> bool, reason: &'static str) -> Result<(), ScenarioError> {
    match e.free_vars().into_iter().find(|v| bad(v)) {
        Some(v) => Err(ScenarioError::ForbiddenVariable {
            field,
            var: v.to_string(),
            reason,
        }),
        None => Ok(()),
    }
}

fn minor(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|&(r, _)| r != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(c, _)| c != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

fn neg(e: Expr) -> Expr {
    if e.is_zero_literal() {
        e
    } else {
        Expr::Neg(Box::new(e))
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn symbolic_det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::Num(1.0),
        1 => m[0][0].clone(),
        k => Expr::sum((0..k).filter(|&c| !m[0][c].is_zero_literal()).map(|c| {
            let term = Expr::product([m[0][c].clone(), symbolic_det(&minor(m, 0, c))]);
            if c % 2 == 1 {
                neg(term)
            } else {
                term
            }
        })),
    }
}

/// Inverse through the adjugate.
pub fn symbolic_inverse(m: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let k = m.len();
    if k == 1 {
        return vec![vec![Expr::bin(BinOp::Div, Expr::Num(1.0), m[0][0].clone())]];
    }
    let det = symbolic_det(m);
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let cof = symbolic_det(&minor(m, j, i));
                    let cof = if (i + j) % 2 == 1 { neg(cof) } else { cof };
                    if cof.is_zero_literal() {
                        Expr::Num(0.0)
                    } else {
                        Expr::bin(BinOp::Div, cof, det.clone())
                    }
                })
                .collect()
        })
        .collect()
}
