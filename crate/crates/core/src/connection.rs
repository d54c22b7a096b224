//! Canonical nonlinear connection, Cartan canonical connection, adapted and
//! covariant derivatives at one jet point.
//!
//! Every field is kept as a [`Jet`], so derivatives of connection
//! coefficients come from the same evaluation instead of finite differences.
//! Index order inside the tables:
//!
//! | family | slots |
//! |---|---|
//! | `H^γ_{αβ}` | `[γ, α, β]` |
//! | `Γ^i_{jk}`, `L^i_{jk}` | `[i, j, k]` |
//! | `M^{(i)}_{(α)β}` | `[i, α, β]` |
//! | `N^{(i)}_{(α)j}` | `[i, α, j]` |
//! | `G^k_{jγ}` | `[k, j, γ]` |
//! | `C^{i(γ)}_{j(k)}` | `[i, j, k, γ]` |
//! | `U^{(β)}_{(k)j}` | `[β, k, j]` |
//! | `G^{(α)(β)}_{(i)(j)}` | `[α, β, i, j]` |

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Dims, Expr, ExprError};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{invert, LinalgError};
use crate::scenario::{FamilyKind, JetPoint, Scenario};
use crate::table::{ComponentTable, Slot, SlotKind, Variance};

/// Jet order used for the Lagrangian on the p = 1 branch.
pub const P1_ORDER: usize = 5;
/// Jet order used for h, g, U on the p ≥ 2 branch.
pub const MULTI_ORDER: usize = 3;

#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("point {point}: {reason}")]
    Point { point: String, reason: String },
    #[error("evaluating `{field}` at {point}: {source}")]
    Eval {
        field: String,
        point: String,
        #[source]
        source: ExprError,
    },
    #[error("metric {family} at {point}: {source}")]
    Singular {
        family: &'static str,
        point: String,
        #[source]
        source: LinalgError,
    },
    #[error("not h-regular here ({point}): the spatial metric is degenerate: {source}")]
    NotRegular {
        point: String,
        #[source]
        source: LinalgError,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GeometryOptions {
    /// Test hook: added to `L^1_{11}` after the Cartan connection is built.
    pub fault: Option<f64>,
}

/// The three covariant derivatives of the Cartan connection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Covariant {
    /// `_{/γ}`, appends a lower temporal slot
    Temporal,
    /// `_{|k}`, appends a lower spatial slot
    Spatial,
    /// `|^{(γ)}_{(k)}`, appends a lower spatial then an upper temporal slot
    Vertical,
}

/// Adapted frame directions `δ/δt^α`, `δ/δx^i`, `∂/∂x^i_α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    T(usize),
    X(usize),
    V { i: usize, alpha: usize },
}

pub type JetTable = ComponentTable<Jet>;

/// Everything the connection layer knows at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub dims: Dims,
    pub at: JetPoint,
    pub kind: FamilyKind,
    pub space: Arc<JetSpace>,
    /// The Lagrangian (p = 1 branch only).
    pub lagrangian: Option<Jet>,
    pub h: JetTable,
    pub h_inv: JetTable,
    pub g: JetTable,
    pub g_inv: JetTable,
    pub h_condition: f64,
    pub g_condition: f64,
    pub vertical_metric: JetTable,
    pub temporal_christoffel: JetTable,
    pub spatial_christoffel: JetTable,
    /// `U^{(β)}_{(k)j}` for electrodynamics families.
    pub u_curl: Option<JetTable>,
    /// `𝒢^i` (p = 1 branch only).
    pub semispray: Option<JetTable>,
    pub m: JetTable,
    pub n: JetTable,
    pub cartan_g: JetTable,
    pub cartan_l: JetTable,
    pub cartan_c: JetTable,
    neg_m: JetTable,
    neg_n: JetTable,
}

fn point_string(at: &JetPoint) -> String {
    at.to_string()
}

fn eval(e: &Expr, field: &str, space: &Arc<JetSpace>, order: usize, dims: Dims, at: &JetPoint) -> Result<Jet, GeometryError> {
    e.eval_in(space, order, dims, &at.coords()).map_err(|source| GeometryError::Eval {
        field: field.to_string(),
        point: point_string(at),
        source,
    })
}

/// `Σ a_k b_k`
pub fn dot<'a>(zero: &Jet, pairs: impl IntoIterator<Item = (&'a Jet, &'a Jet)>) -> Jet {
    let mut acc = zero.clone();
    for (a, b) in pairs {
        acc.add_product(a, b);
    }
    acc
}

/// Christoffel symbols `m^{ad}/2 (∂_c m_db + ∂_b m_dc − ∂_d m_bc)` of a metric
/// under a family of derivations `d(f, c)`; `[a][b][c]`.
fn christoffel(metric: &[Vec<Jet>], inv: &[Vec<Jet>], zero: &Jet, d: impl Fn(&Jet, usize) -> Jet) -> Vec<Vec<Vec<Jet>>> {
    let k = metric.len();
    // dm[c][a][b] = d_c m_ab
    let dm: Vec<Vec<Vec<Jet>>> = (0..k)
        .map(|c| (0..k).map(|a| (0..k).map(|b| d(&metric[a][b], c)).collect()).collect())
        .collect();
    let mut out = vec![vec![vec![zero.clone(); k]; k]; k];
    for b in 0..k {
        for c in b..k {
            let lowered: Vec<Jet> = (0..k)
                .map(|dd| (&dm[c][dd][b] + &dm[b][dd][c] - &dm[dd][b][c]).scale(0.5))
                .collect();
            for a in 0..k {
                let v = dot(zero, (0..k).map(|dd| (&inv[a][dd], &lowered[dd])));
                out[a][b][c] = v.clone();
                out[a][c][b] = v;
            }
        }
    }
    out
}

impl PointGeometry {
    pub fn build(s: &Scenario, at: &JetPoint, opts: &GeometryOptions) -> Result<Self, GeometryError> {
        let dims = s.dims;
        at.validate(dims).map_err(|reason| GeometryError::Point {
            point: point_string(at),
            reason,
        })?;
        let (p, n) = (dims.p, dims.n);
        let order = if s.uses_p1_branch() { P1_ORDER } else { MULTI_ORDER };
        let space = JetSpace::shared(dims.nvars(), order);
        let zero = Jet::zero(&space, order);
        let coord = |var: usize| Jet::variable(&space, order, var, at.coords()[var]);
        let pt = point_string(at);

        let mut h = vec![vec![zero.clone(); p]; p];
        for a in 0..p {
            for b in 0..p {
                h[a][b] = eval(&s.h[a][b], &format!("h[{}][{}]", a + 1, b + 1), &space, order, dims, at)?;
            }
        }
        let (h_inv, h_condition) = invert(&h).map_err(|source| GeometryError::Singular {
            family: "h",
            point: pt.clone(),
            source,
        })?;
        let hh = christoffel(&h, &h_inv, &zero, |f, c| f.partial(dims.t(c)));

        let electro = s.family.electro();
        let u_exprs = match electro {
            Some(e) => {
                let mut u = vec![vec![zero.clone(); n]; p];
                for a in 0..p {
                    for i in 0..n {
                        u[a][i] = eval(&e.u[a][i], &format!("U[{}][{}]", a + 1, i + 1), &space, order, dims, at)?;
                    }
                }
                Some(u)
            }
            None => None,
        };
        let u_curl = u_exprs.as_ref().map(|u| {
            ComponentTable::from_fn("U", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], dims, |ix| {
                let (b, k, j) = (ix[0], ix[1], ix[2]);
                u[b][k].partial(dims.x(j)) - u[b][j].partial(dims.x(k))
            })
        });

        let y: Vec<Vec<Jet>> = (0..n).map(|i| (0..p).map(|a| coord(dims.v(i, a))).collect()).collect();

        let lagrangian;
        let semispray;
        let g;
        let vertical: Vec<Vec<Vec<Vec<Jet>>>>;
        let m_tab: Vec<Vec<Vec<Jet>>>;
        let n_tab: Vec<Vec<Vec<Jet>>>;
        let g_inv;
        let g_condition;
        let gamma;

        if s.uses_p1_branch() {
            let l = eval(&s.lagrangian(), "L", &space, order, dims, at)?;
            let ly: Vec<Jet> = (0..n).map(|i| l.partial(dims.v(i, 0))).collect();
            let hess: Vec<Vec<Jet>> = (0..n)
                .map(|i| (0..n).map(|j| ly[i].partial(dims.v(j, 0)).scale(0.5)).collect())
                .collect();
            g = hess.iter().map(|row| row.iter().map(|x| x * &h[0][0]).collect::<Vec<Jet>>()).collect::<Vec<_>>();
            let (gi, cond) = invert(&g).map_err(|source| GeometryError::NotRegular { point: pt.clone(), source })?;
            g_inv = gi;
            g_condition = cond;
            vertical = vec![vec![hess]];
            gamma = christoffel(&g, &g_inv, &zero, |f, c| f.partial(dims.x(c)));

            let h11 = &hh[0][0][0];
            let lx: Vec<Jet> = (0..n).map(|k| l.partial(dims.x(k))).collect();
            let bracket: Vec<Jet> = (0..n)
                .map(|k| {
                    let mut b = zero.clone();
                    for j in 0..n {
                        b.add_product(&ly[k].partial(dims.x(j)), &y[j][0]);
                    }
                    b = b - &lx[k] + ly[k].partial(dims.t(0));
                    b.add_product(&lx[k], h11);
                    let gy = dot(&zero, (0..n).map(|l| (&g[k][l], &y[l][0])));
                    b.add_product(&(&h_inv[0][0] * h11).scale(2.0), &gy);
                    b
                })
                .collect();
            let sp: Vec<Jet> = (0..n)
                .map(|i| dot(&zero, (0..n).map(|k| (&g_inv[i][k], &bracket[k]))).scale(0.25))
                .collect();
            n_tab = (0..n)
                .map(|i| vec![(0..n).map(|j| &h[0][0] * &sp[i].partial(dims.v(j, 0))).collect()])
                .collect();
            m_tab = (0..n).map(|i| vec![vec![-(h11 * &y[i][0])]]).collect();
            semispray = Some(ComponentTable::from_fn("𝒢", &[Slot::S_UP], dims, |ix| sp[ix[0]].clone()));
            lagrangian = Some(l);
        } else {
            let e = electro.expect("p ≥ 2 scenarios are electrodynamics families");
            let mut gm = vec![vec![zero.clone(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    gm[i][j] = eval(&e.g[i][j], &format!("g[{}][{}]", i + 1, j + 1), &space, order, dims, at)?;
                }
            }
            g = gm;
            let (gi, cond) = invert(&g).map_err(|source| GeometryError::NotRegular { point: pt.clone(), source })?;
            g_inv = gi;
            g_condition = cond;
            vertical = (0..p)
                .map(|a| (0..p).map(|b| (0..n).map(|i| (0..n).map(|j| &h_inv[a][b] * &g[i][j]).collect()).collect()).collect())
                .collect();
            gamma = christoffel(&g, &g_inv, &zero, |f, c| f.partial(dims.x(c)));
            m_tab = (0..n)
                .map(|i| (0..p).map(|a| (0..p).map(|b| -dot(&zero, (0..p).map(|c| (&hh[c][a][b], &y[i][c])))).collect()).collect())
                .collect();
            let uc = u_curl.as_ref().expect("electrodynamics has U");
            n_tab = (0..n)
                .map(|i| {
                    (0..p)
                        .map(|a| {
                            (0..n)
                                .map(|j| {
                                    let mut acc = dot(&zero, (0..n).map(|k| (&gamma[i][j][k], &y[k][a])));
                                    for k in 0..n {
                                        acc.add_product(&g_inv[i][k], &g[j][k].partial(dims.t(a)).scale(0.5));
                                        let hu = dot(&zero, (0..p).map(|b| (&h[a][b], uc.at(&[b, k, j]))));
                                        acc.add_product(&g_inv[i][k], &hu.scale(0.25));
                                    }
                                    acc
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            semispray = None;
            lagrangian = None;
        }

        let table2 = |name: &str, sig: &[Slot], v: &[Vec<Jet>]| ComponentTable::from_fn(name, sig, dims, |ix| v[ix[0]][ix[1]].clone());
        let table3 = |name: &str, sig: &[Slot], v: &[Vec<Vec<Jet>>]| {
            ComponentTable::from_fn(name, sig, dims, |ix| v[ix[0]][ix[1]][ix[2]].clone())
        };
        let m = table3("M", &[Slot::S_UP, Slot::T_LO, Slot::T_LO], &m_tab);
        let nn = table3("N", &[Slot::S_UP, Slot::T_LO, Slot::S_LO], &n_tab);
        let mut geo = PointGeometry {
            dims,
            at: at.clone(),
            kind: s.kind(),
            space: space.clone(),
            lagrangian,
            h: table2("h", &[Slot::T_LO, Slot::T_LO], &h),
            h_inv: table2("h^-1", &[Slot::T_UP, Slot::T_UP], &h_inv),
            g: table2("g", &[Slot::S_LO, Slot::S_LO], &g),
            g_inv: table2("g^-1", &[Slot::S_UP, Slot::S_UP], &g_inv),
            h_condition,
            g_condition,
            vertical_metric: ComponentTable::from_fn("G", &[Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO], dims, |ix| {
                vertical[ix[0]][ix[1]][ix[2]][ix[3]].clone()
            }),
            temporal_christoffel: table3("H", &[Slot::T_UP, Slot::T_LO, Slot::T_LO], &hh),
            spatial_christoffel: table3("Γ", &[Slot::S_UP, Slot::S_LO, Slot::S_LO], &gamma),
            u_curl,
            semispray,
            neg_m: m.map(|x| -x),
            neg_n: nn.map(|x| -x),
            m,
            n: nn,
            cartan_g: ComponentTable::zeros_like_jet("G", &[Slot::S_UP, Slot::S_LO, Slot::T_LO], dims, &zero),
            cartan_l: ComponentTable::zeros_like_jet("L", &[Slot::S_UP, Slot::S_LO, Slot::S_LO], dims, &zero),
            cartan_c: ComponentTable::zeros_like_jet("C", &[Slot::S_UP, Slot::S_LO, Slot::S_LO, Slot::T_UP], dims, &zero),
        };
        geo.build_cartan(&g, &g_inv, &zero);
        if let Some(eps) = opts.fault {
            let bumped = geo.cartan_l.at(&[0, 0, 0]).add_scalar(eps);
            geo.cartan_l.set(&[0, 0, 0], bumped).expect("index in range");
        }
        Ok(geo)
    }

    fn build_cartan(&mut self, g: &[Vec<Jet>], g_inv: &[Vec<Jet>], zero: &Jet) {
        let d = self.dims;
        let (p, n) = (d.p, d.n);
        let dg: Vec<Vec<Vec<Jet>>> = (0..p)
            .map(|c| (0..n).map(|i| (0..n).map(|j| self.delta(&g[i][j], Direction::T(c))).collect()).collect())
            .collect();
        self.cartan_g = ComponentTable::from_fn("G", &[Slot::S_UP, Slot::S_LO, Slot::T_LO], d, |ix| {
            let (k, j, c) = (ix[0], ix[1], ix[2]);
            dot(zero, (0..n).map(|i| (&g_inv[k][i], &dg[c][i][j]))).scale(0.5)
        });
        let l = christoffel(g, g_inv, zero, |f, k| self.delta(f, Direction::X(k)));
        self.cartan_l = ComponentTable::from_fn("L", &[Slot::S_UP, Slot::S_LO, Slot::S_LO], d, |ix| l[ix[0]][ix[1]][ix[2]].clone());
        let c: Vec<Vec<Vec<Vec<Jet>>>> = (0..p)
            .map(|gam| christoffel(g, g_inv, zero, |f, k| f.partial(d.v(k, gam))))
            .collect();
        self.cartan_c = ComponentTable::from_fn("C", &[Slot::S_UP, Slot::S_LO, Slot::S_LO, Slot::T_UP], d, |ix| {
            c[ix[3]][ix[0]][ix[1]][ix[2]].clone()
        });
    }

    /// `N^i_{(α)j} = Γ^i_{jk}x^k_α + g^{ik}/2 ∂g_jk/∂t^α + g^{ik}h_αβ/4 U^{(β)}_{(k)j}` assembled
    /// from `h`, `g` and `U` directly; `None` outside the electrodynamics families.
    pub fn electrodynamics_nonlinear_connection(&self) -> Option<JetTable> {
        let uc = self.u_curl.as_ref()?;
        let d = self.dims;
        let (p, n) = (d.p, d.n);
        let zero = self.zero();
        let x = self.liouville();
        Some(ComponentTable::from_fn("N", &[Slot::S_UP, Slot::T_LO, Slot::S_LO], d, |ix| {
            let (i, a, j) = (ix[0], ix[1], ix[2]);
            let mut acc = dot(&zero, (0..n).map(|k| (self.spatial_christoffel.at(&[i, j, k]), x.at(&[k, a]))));
            for k in 0..n {
                let gi = self.g_inv.at(&[i, k]);
                acc.add_product(gi, &self.g.at(&[j, k]).partial(d.t(a)).scale(0.5));
                let hu = dot(&zero, (0..p).map(|b| (self.h.at(&[a, b]), uc.at(&[b, k, j]))));
                acc.add_product(gi, &hu.scale(0.25));
            }
            acc
        }))
    }

    /// The zero jet at the top order of this point.
    pub fn zero(&self) -> Jet {
        Jet::zero(&self.space, self.space.order())
    }

    /// A coordinate function as a jet at `order`.
    pub fn coordinate(&self, var: usize, order: usize) -> Jet {
        Jet::variable(&self.space, order, var, self.at.coords()[var])
    }

    /// Jet order of the Cartan coefficients.
    pub fn connection_order(&self) -> usize {
        [&self.cartan_g, &self.cartan_l, &self.cartan_c, &self.n, &self.m]
            .iter()
            .flat_map(|t| t.data().iter().map(Jet::order))
            .min()
            .unwrap_or(0)
    }

    /// Adapted derivative of a jet field.
    pub fn delta(&self, f: &Jet, dir: Direction) -> Jet {
        let d = self.dims;
        let (var, conn) = match dir {
            Direction::T(a) => (d.t(a), Some((&self.neg_m, a))),
            Direction::X(i) => (d.x(i), Some((&self.neg_n, i))),
            Direction::V { i, alpha } => (d.v(i, alpha), None),
        };
        let mut out = f.partial(var);
        if let Some((coef, last)) = conn {
            for j in 0..d.n {
                for b in 0..d.p {
                    let dv = f.partial(d.v(j, b));
                    if !dv.is_zero() {
                        out.add_product(coef.at(&[j, b, last]), &dv);
                    }
                }
            }
        }
        out
    }

    /// Value of an adapted derivative, read from first-order coefficients.
    pub fn delta_value(&self, f: &Jet, dir: Direction) -> f64 {
        let d = self.dims;
        let (var, conn) = match dir {
            Direction::T(a) => (d.t(a), Some((&self.m, a))),
            Direction::X(i) => (d.x(i), Some((&self.n, i))),
            Direction::V { i, alpha } => (d.v(i, alpha), None),
        };
        let mut out = f.gradient(var);
        if let Some((coef, last)) = conn {
            for j in 0..d.n {
                for b in 0..d.p {
                    let dv = f.gradient(d.v(j, b));
                    if dv != 0.0 {
                        out -= coef.at(&[j, b, last]).value() * dv;
                    }
                }
            }
        }
        out
    }

    /// Adapted derivative of a scenario expression at this point.
    pub fn adapted_derivative(&self, f: &Expr, dir: Direction) -> Result<f64, GeometryError> {
        let jet = eval(f, &f.to_string(), &self.space, 1, self.dims, &self.at)?;
        Ok(self.delta_value(&jet, dir))
    }

    /// Covariant derivative of a jet table field.
    pub fn covariant(&self, t: &JetTable, kind: Covariant) -> JetTable {
        let d = self.dims;
        let mut sig = t.signature().to_vec();
        let (suffix, label) = match kind {
            Covariant::Temporal => (vec![Slot::T_LO], "/"),
            Covariant::Spatial => (vec![Slot::S_LO], "|"),
            Covariant::Vertical => (vec![Slot::S_LO, Slot::T_UP], "|v"),
        };
        sig.extend(&suffix);
        let rank = t.rank();
        let name = format!("{}{}", t.name(), label);
        ComponentTable::from_fn(&name, &sig, d, |ix| {
            let (base, tail) = ix.split_at(rank);
            let dir = match kind {
                Covariant::Temporal => Direction::T(tail[0]),
                Covariant::Spatial => Direction::X(tail[0]),
                Covariant::Vertical => Direction::V { i: tail[0], alpha: tail[1] },
            };
            let mut acc = self.delta(t.at(base), dir);
            let mut idx = base.to_vec();
            for (s, slot) in t.signature().iter().enumerate() {
                let own = base[s];
                let extent = slot.extent(d);
                for m in 0..extent {
                    let coef = match (kind, slot.kind, slot.variance) {
                        (Covariant::Temporal, SlotKind::Temporal, Variance::Upper) => {
                            self.temporal_christoffel.at(&[own, m, tail[0]]).clone()
                        }
                        (Covariant::Temporal, SlotKind::Temporal, Variance::Lower) => {
                            -self.temporal_christoffel.at(&[m, own, tail[0]])
                        }
                        (Covariant::Temporal, SlotKind::Spatial, Variance::Upper) => self.cartan_g.at(&[own, m, tail[0]]).clone(),
                        (Covariant::Temporal, SlotKind::Spatial, Variance::Lower) => -self.cartan_g.at(&[m, own, tail[0]]),
                        (Covariant::Spatial, SlotKind::Spatial, Variance::Upper) => self.cartan_l.at(&[own, m, tail[0]]).clone(),
                        (Covariant::Spatial, SlotKind::Spatial, Variance::Lower) => -self.cartan_l.at(&[m, own, tail[0]]),
                        (Covariant::Vertical, SlotKind::Spatial, Variance::Upper) => {
                            self.cartan_c.at(&[own, m, tail[0], tail[1]]).clone()
                        }
                        (Covariant::Vertical, SlotKind::Spatial, Variance::Lower) => {
                            -self.cartan_c.at(&[m, own, tail[0], tail[1]])
                        }
                        _ => break,
                    };
                    if coef.is_zero() {
                        continue;
                    }
                    idx[s] = m;
                    acc.add_product(&coef, t.at(&idx));
                }
                idx[s] = own;
            }
            acc
        })
    }

    /// Liouville field `x^i_α` as a table `[i, α]` of jets one order above the connection.
    pub fn liouville(&self) -> JetTable {
        let order = (self.connection_order() + 1).min(self.space.order());
        ComponentTable::from_fn("x", &[Slot::S_UP, Slot::T_LO], self.dims, |ix| self.coordinate(self.dims.v(ix[0], ix[1]), order))
    }

    /// Generic constant table (e.g. a Kronecker delta) as jets.
    pub fn constant_table(&self, name: &str, sig: &[Slot], f: impl Fn(&[usize]) -> f64) -> JetTable {
        let order = self.space.order();
        ComponentTable::from_fn(name, sig, self.dims, |ix| Jet::constant(&self.space, order, f(ix)))
    }

    /// `δ^β_α` helper
    pub fn kron(a: usize, b: usize) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }

    /// Six metricity residual tables: `g_{ij|k}`, `g_{ij}|^{(γ)}_{(k)}`, `g_{ij/γ}`,
    /// `h_{αβ/γ}`, `h_{αβ|k}`, `h_{αβ}|^{(γ)}_{(k)}`.
    pub fn metricity(&self) -> Vec<(&'static str, ComponentTable<f64>)> {
        vec![
            ("g_ij|k", self.covariant(&self.g, Covariant::Spatial).values()),
            ("g_ij|v", self.covariant(&self.g, Covariant::Vertical).values()),
            ("g_ij/t", self.covariant(&self.g, Covariant::Temporal).values()),
            ("h_ab/t", self.covariant(&self.h, Covariant::Temporal).values()),
            ("h_ab|k", self.covariant(&self.h, Covariant::Spatial).values()),
            ("h_ab|v", self.covariant(&self.h, Covariant::Vertical).values()),
        ]
    }
}

impl ComponentTable<Jet> {
    pub fn zeros_like_jet(name: &str, sig: &[Slot], dims: Dims, zero: &Jet) -> Self {
        ComponentTable::filled(name, sig, dims, zero.clone())
    }
}
