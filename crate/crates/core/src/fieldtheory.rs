//! Deflections, the electromagnetic d-form and its Maxwell equations, Ricci
//! contractions, Einstein blocks and their conservation laws.
//!
//! Metrical tables list upper indices first: `D^{(α)}_{(i)j}` at `[α, i, j]`,
//! `d^{(α)(β)}_{(i)(j)}` at `[α, β, i, j]`, `F^{(α)}_{(i)j}` at `[α, i, j]`.
//! Raw deflections keep the Liouville order: `D^{(i)}_{(α)j}` at `[i, α, j]`,
//! `d^{(i)(β)}_{(α)(j)}` at `[i, α, j, β]`.

use serde::Serialize;

use crate::connection::{Covariant, Direction, JetTable, PointGeometry};
use crate::curvature::{g_curvature, h_curvature, p_v_xv, p_xxv, CurvatureTensors, Ctx, FamilySet, FrameMap, TorsionTensors};
use crate::frame::{Block, Frame};
use crate::jet::Jet;
use crate::scenario::FamilyKind;
use crate::table::{ComponentTable, Slot};

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn table_diff(a: &JetTable, b: &JetTable) -> f64 {
    a.values().max_diff(&b.values())
}

#[derive(Clone, Debug)]
pub struct DeflectionTensors {
    /// `D̄^{(i)}_{(α)β} = x^i_{α/β}`
    pub raw_bar: JetTable,
    /// `D^{(i)}_{(α)j} = x^i_{α|j}`
    pub raw_d: JetTable,
    /// `d^{(i)(β)}_{(α)(j)} = x^i_α|^{(β)}_{(j)}`
    pub raw_dd: JetTable,
    /// Metrical `D̄^{(α)}_{(i)β}`, contracted from the raw table.
    pub bar: JetTable,
    pub d: JetTable,
    pub dd: JetTable,
    /// Closed forms of the metrical deflections.
    pub closed_bar: JetTable,
    pub closed_d: JetTable,
    pub closed_dd: JetTable,
    /// `x^{(α)}_{(p)} = G^{(α)(β)}_{(p)(q)} x^q_β`
    pub velocity: JetTable,
}

impl DeflectionTensors {
    /// Largest difference between the generic and closed-form metrical deflections.
    pub fn discrepancy(&self) -> f64 {
        table_diff(&self.bar, &self.closed_bar)
            .max(table_diff(&self.d, &self.closed_d))
            .max(table_diff(&self.dd, &self.closed_dd))
    }
}

pub fn deflections(geo: &PointGeometry) -> DeflectionTensors {
    let c = Ctx::new(geo);
    let (d, n, p) = (c.d, c.d.n, c.d.p);
    let gm = &geo.vertical_metric;
    let raw_bar = geo.covariant(&c.x, Covariant::Temporal);
    let raw_d = geo.covariant(&c.x, Covariant::Spatial);
    let raw_dd = geo.covariant(&c.x, Covariant::Vertical);
    // G^{(α)(γ)}_{(i)(k)} X^{(k)}_{(γ)…}
    let lower = |al: usize, i: usize, f: &dyn Fn(usize, usize) -> Jet| -> Jet {
        let mut s = c.zero.clone();
        for ga in 0..p {
            for k in 0..n {
                s.add_product(gm.at(&[al, ga, i, k]), &f(k, ga));
            }
        }
        s
    };
    let bar = c.table("D̄", &[Slot::T_UP, Slot::S_LO, Slot::T_LO], |ix| lower(ix[0], ix[1], &|k, ga| raw_bar.at(&[k, ga, ix[2]]).clone()));
    let dm = c.table("D", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| lower(ix[0], ix[1], &|k, ga| raw_d.at(&[k, ga, ix[2]]).clone()));
    let dd = c.table("d", &[Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
        lower(ix[0], ix[2], &|k, ga| raw_dd.at(&[k, ga, ix[3], ix[1]]).clone())
    });
    let velocity = c.table("x_low", &[Slot::T_UP, Slot::S_LO], |ix| lower(ix[0], ix[1], &|k, ga| c.x.at(&[k, ga]).clone()));

    let g = |i: usize, j: usize| geo.g.at(&[i, j]);
    let hi = |a: usize, b: usize| geo.h_inv.at(&[a, b]);
    let (closed_bar, closed_d, closed_dd);
    if p == 1 {
        let y = |m: usize| c.x.at(&[m, 0]);
        closed_bar = c.table("D̄", &[Slot::T_UP, Slot::S_LO, Slot::T_LO], |ix| {
            let i = ix[1];
            let s = c.sum(n, |m, acc| acc.add_product(&geo.delta(g(i, m), Direction::T(0)), y(m)));
            (hi(0, 0) * &s).scale(0.5)
        });
        closed_d = c.table("D", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
            let (i, j) = (ix[1], ix[2]);
            let s = c.sum(n, |k, acc| {
                let mut inner = -geo.n.at(&[k, 0, j]);
                for m in 0..n {
                    inner.add_product(geo.cartan_l.at(&[k, j, m]), y(m));
                }
                acc.add_product(g(i, k), &inner);
            });
            hi(0, 0) * &s
        });
        closed_dd = c.table("d", &[Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
            let (i, j) = (ix[2], ix[3]);
            let mut s = g(i, j).clone();
            for k in 0..n {
                for m in 0..n {
                    s.add_product(&(g(i, k) * geo.cartan_c.at(&[k, m, j, 0])), y(m));
                }
            }
            hi(0, 0) * &s
        });
    } else {
        closed_bar = c.table("D̄", &[Slot::T_UP, Slot::S_LO, Slot::T_LO], |ix| {
            let (al, i, be) = (ix[0], ix[1], ix[2]);
            let mut s = c.zero.clone();
            for ga in 0..p {
                for m in 0..n {
                    s.add_product(&hi(al, ga).scale(0.5), &(g(i, m).partial(d.t(be)) * c.x.at(&[m, ga])));
                }
            }
            s
        });
        closed_d = c.table("D", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
            let (al, i, j) = (ix[0], ix[1], ix[2]);
            let mut s = c.sum(p, |ga, acc| acc.add_product(&hi(al, ga).scale(-0.5), &g(i, j).partial(d.t(ga))));
            if let Some(u) = &geo.u_curl {
                s -= &u.at(&[al, i, j]).scale(0.25);
            }
            s
        });
        closed_dd = c.table("d", &[Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| hi(ix[0], ix[1]) * g(ix[2], ix[3]));
    }
    DeflectionTensors { raw_bar, raw_d, raw_dd, bar, d: dm, dd, closed_bar, closed_d, closed_dd, velocity }
}

#[derive(Clone, Debug)]
pub struct ElectromagneticForm {
    /// `F^{(α)}_{(i)j} = ½[D_{(i)j} − D_{(j)i}]`
    pub f: JetTable,
    /// `f^{(α)(β)}_{(i)(j)} = ½[d_{(i)(j)} − d_{(j)(i)}]`
    pub f_vertical: JetTable,
    /// Closed form of `F`.
    pub closed: JetTable,
}

impl ElectromagneticForm {
    pub fn discrepancy(&self) -> f64 {
        table_diff(&self.f, &self.closed)
    }

    /// `F_{(i)j} + F_{(j)i}`
    pub fn antisymmetry(&self) -> f64 {
        let v = self.f.values();
        max_abs(v.indices().map(|ix| v.at(&ix) + v.at(&[ix[0], ix[2], ix[1]])))
    }
}

pub fn electromagnetic_form(geo: &PointGeometry, defl: &DeflectionTensors) -> ElectromagneticForm {
    let c = Ctx::new(geo);
    let n = c.d.n;
    let f = c.table("F", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
        (defl.d.at(&[ix[0], ix[1], ix[2]]) - defl.d.at(&[ix[0], ix[2], ix[1]])).scale(0.5)
    });
    let f_vertical = c.table("f", &[Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
        (defl.dd.at(&[ix[0], ix[1], ix[2], ix[3]]) - defl.dd.at(&[ix[0], ix[1], ix[3], ix[2]])).scale(0.5)
    });
    let closed = if c.d.p == 1 {
        let g = |i: usize, j: usize| geo.g.at(&[i, j]);
        c.table("F", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
            let (i, j) = (ix[1], ix[2]);
            let mut s = c.zero.clone();
            for m in 0..n {
                s.add_product(g(j, m), geo.n.at(&[m, 0, i]));
                s -= &(g(i, m) * geo.n.at(&[m, 0, j]));
                for k in 0..n {
                    let w = g(i, k) * geo.cartan_l.at(&[k, j, m]) - g(j, k) * geo.cartan_l.at(&[k, i, m]);
                    s.add_product(&w, c.x.at(&[m, 0]));
                }
            }
            (geo.h_inv.at(&[0, 0]) * &s).scale(0.5)
        })
    } else {
        c.table("F", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| match &geo.u_curl {
            Some(u) => (u.at(&[ix[0], ix[2], ix[1]]) - u.at(&[ix[0], ix[1], ix[2]])).scale(0.125),
            None => c.zero.clone(),
        })
    };
    ElectromagneticForm { f, f_vertical, closed }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MaxwellResiduals {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    /// Simplified first equation of an autonomous space.
    pub autonomous: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DeflectionIdentityResiduals {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Torsion and curvature pieces used by the field equations, on every branch.
struct Pieces {
    t: JetTable,
    t_cov: JetTable,
    r_tx: JetTable,
    r_xx: JetTable,
    r_xtx: JetTable,
    r_xxx: JetTable,
    p_xxv: JetTable,
    p_xv: JetTable,
}

impl Pieces {
    fn new(c: &Ctx, tors: &TorsionTensors, curv: &CurvatureTensors) -> Self {
        let p_xv = tors.get("P_v_xv").cloned().unwrap_or_else(|| p_v_xv(c));
        let p_xxv = curv.get("P_xxv").cloned().unwrap_or_else(|| p_xxv(c, &p_xv));
        let t = tors.expect("T_tx").clone();
        Pieces {
            t_cov: c.geo.covariant(&t, Covariant::Spatial),
            t,
            r_tx: tors.expect("R_v_tx").clone(),
            r_xx: tors.expect("R_v_xx").clone(),
            r_xtx: curv.expect("R_xtx").clone(),
            r_xxx: curv.expect("R_xxx").clone(),
            p_xxv,
            p_xv,
        }
    }
}

/// Residuals (left minus right side) of the three Maxwell equations.
pub fn maxwell_residuals(
    geo: &PointGeometry,
    tors: &TorsionTensors,
    curv: &CurvatureTensors,
    defl: &DeflectionTensors,
    em: &ElectromagneticForm,
) -> MaxwellResiduals {
    let c = Ctx::new(geo);
    let pc = Pieces::new(&c, tors, curv);
    let (n, p) = (c.d.n, c.d.p);
    let val = |t: &JetTable, ix: &[usize]| t.at(ix).value();
    let f_t = geo.covariant(&em.f, Covariant::Temporal);
    let f_x = geo.covariant(&em.f, Covariant::Spatial);
    let f_v = geo.covariant(&em.f, Covariant::Vertical);
    let bar_x = geo.covariant(&defl.bar, Covariant::Spatial);
    let cc = &geo.cartan_c;

    let mut first = Vec::new();
    for al in 0..p {
        for be in 0..p {
            for i in 0..n {
                for k in 0..n {
                    let brace = |i: usize, k: usize| {
                        let mut s = val(&bar_x, &[al, i, be, k]);
                        for m in 0..n {
                            s += val(&defl.d, &[al, i, m]) * val(&pc.t, &[m, be, k]);
                            for mu in 0..p {
                                s += val(&defl.dd, &[al, mu, i, m]) * val(&pc.r_tx, &[m, mu, be, k]);
                            }
                        }
                        for q in 0..n {
                            let mut bracket = val(&pc.t_cov, &[q, be, i, k]);
                            for m in 0..n {
                                for mu in 0..p {
                                    bracket += val(cc, &[q, k, m, mu]) * val(&pc.r_tx, &[m, mu, be, i]);
                                }
                            }
                            s -= bracket * val(&defl.velocity, &[al, q]);
                        }
                        s
                    };
                    first.push(val(&f_t, &[al, i, k, be]) - 0.5 * (brace(i, k) - brace(k, i)));
                }
            }
        }
    }

    // C^{(1)(1)(1)}_{(i)(l)(m)} = G^{(1)(1)}_{(l)(q)} C^{q(1)}_{i(m)} = ¼ ∂³L/∂y^i∂y^l∂y^m
    let c3 = |i: usize, l: usize, m: usize| -> f64 {
        (0..n).map(|q| val(&geo.vertical_metric, &[0, 0, l, q]) * val(cc, &[q, i, m, 0])).sum()
    };
    let mut second = Vec::new();
    for al in 0..p {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let cyc = [(i, j, k), (j, k, i), (k, i, j)];
                    let lhs: f64 = cyc.iter().map(|&(a, b, e)| val(&f_x, &[al, a, b, e])).sum();
                    let rhs = if p == 1 {
                        let mut s = 0.0;
                        for &(a, b, e) in &cyc {
                            for l in 0..n {
                                for m in 0..n {
                                    s += c3(a, l, m) * val(&pc.r_xx, &[m, 0, b, e]) * val(&c.x, &[l, 0]);
                                }
                            }
                        }
                        // full coefficient −1 on the C·R·y term
                        -s
                    } else {
                        0.0
                    };
                    second.push(lhs - rhs);
                }
            }
        }
    }

    let mut third = Vec::new();
    for al in 0..p {
        for ga in 0..p {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        third.push(val(&f_v, &[al, i, j, k, ga]) + val(&f_v, &[al, j, k, i, ga]) + val(&f_v, &[al, k, i, j, ga]));
                    }
                }
            }
        }
    }

    let autonomous = (geo.kind == FamilyKind::Autonomous).then(|| {
        let mut out = Vec::new();
        for al in 0..p {
            for be in 0..p {
                for i in 0..n {
                    for k in 0..n {
                        let y = |i: usize, k: usize| {
                            let mut s = 0.0;
                            for mu in 0..p {
                                for m in 0..n {
                                    s += val(&geo.h_inv, &[al, mu]) * val(&geo.g, &[i, m]) * val(&pc.r_tx, &[m, mu, be, k]);
                                }
                            }
                            s
                        };
                        out.push(val(&f_t, &[al, i, k, be]) - 0.5 * (y(i, k) - y(k, i)));
                    }
                }
            }
        }
        max_abs(out)
    });

    MaxwellResiduals { first: max_abs(first), second: max_abs(second), third: max_abs(third), autonomous }
}

/// Residuals of the metrical deflection identities d′1–d′3.
pub fn deflection_identity_residuals(
    geo: &PointGeometry,
    tors: &TorsionTensors,
    curv: &CurvatureTensors,
    defl: &DeflectionTensors,
) -> DeflectionIdentityResiduals {
    let c = Ctx::new(geo);
    let pc = Pieces::new(&c, tors, curv);
    let (n, p) = (c.d.n, c.d.p);
    let val = |t: &JetTable, ix: &[usize]| t.at(ix).value();
    let bar_x = geo.covariant(&defl.bar, Covariant::Spatial);
    let d_t = geo.covariant(&defl.d, Covariant::Temporal);
    let d_x = geo.covariant(&defl.d, Covariant::Spatial);
    let d_v = geo.covariant(&defl.d, Covariant::Vertical);
    let dd_x = geo.covariant(&defl.dd, Covariant::Spatial);
    let xl = &defl.velocity;

    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut d3 = Vec::new();
    for al in 0..p {
        for i in 0..n {
            for k in 0..n {
                for be in 0..p {
                    let mut s = val(&bar_x, &[al, i, be, k]) - val(&d_t, &[al, i, k, be]);
                    for m in 0..n {
                        s += val(xl, &[al, m]) * val(&pc.r_xtx, &[m, i, be, k]);
                        s += val(&defl.d, &[al, i, m]) * val(&pc.t, &[m, be, k]);
                        for mu in 0..p {
                            s += val(&defl.dd, &[al, mu, i, m]) * val(&pc.r_tx, &[m, mu, be, k]);
                        }
                    }
                    d1.push(s);
                }
                for j in 0..n {
                    let mut s = val(&d_x, &[al, i, j, k]) - val(&d_x, &[al, i, k, j]);
                    for m in 0..n {
                        s += val(xl, &[al, m]) * val(&pc.r_xxx, &[m, i, j, k]);
                        for mu in 0..p {
                            s += val(&defl.dd, &[al, mu, i, m]) * val(&pc.r_xx, &[m, mu, j, k]);
                        }
                    }
                    d2.push(s);
                    for ga in 0..p {
                        let mut s = val(&d_v, &[al, i, j, k, ga]) - val(&dd_x, &[al, ga, i, k, j]);
                        for m in 0..n {
                            s += val(xl, &[al, m]) * val(&pc.p_xxv, &[m, i, j, k, ga]);
                            s += val(&defl.d, &[al, i, m]) * val(&geo.cartan_c, &[m, j, k, ga]);
                            for mu in 0..p {
                                s += val(&defl.dd, &[al, mu, i, m]) * val(&pc.p_xv, &[m, mu, j, k, ga]);
                            }
                        }
                        d3.push(s);
                    }
                }
            }
        }
    }
    DeflectionIdentityResiduals { d1: max_abs(d1), d2: max_abs(d2), d3: max_abs(d3) }
}

#[derive(Clone, Debug)]
pub struct RicciData {
    /// Ricci components as contractions of the curvature closed forms.
    pub families: FamilySet,
    /// `H = h^{αβ}H_{αβ}` (p ≥ 2).
    pub h: Option<Jet>,
    /// `R = g^{ij}R_{ij}`
    pub r: Jet,
    /// `S = h_{11} g^{ij} S^{(1)(1)}_{(i)(j)}` (p = 1).
    pub s: Option<Jet>,
    /// `Sc = R + S` (p = 1) or `H + R` (p ≥ 2).
    pub scalar: Jet,
}

pub fn ricci(geo: &PointGeometry, curv: &CurvatureTensors) -> RicciData {
    let c = Ctx::new(geo);
    let (n, p) = (c.d.n, c.d.p);
    let trace = |f: &dyn Fn(usize) -> Jet| c.sum(n, |m, acc| *acc += &f(m));
    let mut fam = FamilySet::default();
    let rxx = curv.expect("R_xxx");
    let rtx = curv.expect("R_xtx");
    let ricci_xx = c.table("R", &[Slot::S_LO, Slot::S_LO], |ix| trace(&|m| rxx.at(&[m, ix[0], ix[1], m]).clone()));
    let ricci_xt = c.table("R", &[Slot::S_LO, Slot::T_LO], |ix| trace(&|m| rtx.at(&[m, ix[0], ix[1], m]).clone()));
    let g_trace = |t: &JetTable| {
        let mut s = c.zero.clone();
        for i in 0..n {
            for j in 0..n {
                s.add_product(geo.g_inv.at(&[i, j]), t.at(&[i, j]));
            }
        }
        s
    };
    let r = g_trace(&ricci_xx);
    let xt = |d: crate::expr::Dims, ix: &[usize]| [d.x(ix[0]), d.t(ix[1])];
    if p == 1 {
        let pxx = curv.expect("P_xxv");
        let pxt = curv.expect("P_xtv");
        let sv = curv.expect("S_xvv");
        fam.push("H_tt", "temporal Ricci H_{11}", c.table("H", &[Slot::T_LO, Slot::T_LO], |_| c.zero.clone()), Some(FrameMap::Ricci(|d, _| [d.t(0), d.t(0)])));
        fam.push("R_xt", "Ricci R_{i1}", ricci_xt, Some(FrameMap::Ricci(xt)));
        fam.push("R_xx", "Ricci R_{ij}", ricci_xx, Some(FrameMap::Ricci(|d, ix| [d.x(ix[0]), d.x(ix[1])])));
        fam.push(
            "P_x_v",
            "Ricci P^{(1)}_{i(j)}",
            c.table("P", &[Slot::S_LO, Slot::S_LO, Slot::T_UP], |ix| -trace(&|m| pxx.at(&[m, ix[0], m, ix[1], ix[2]]).clone())),
            Some(FrameMap::Ricci(|d, ix| [d.x(ix[0]), d.v(ix[1], ix[2])])),
        );
        fam.push(
            "P_v_x",
            "Ricci P^{(1)}_{(i)j}",
            c.table("P", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| trace(&|m| pxx.at(&[m, ix[1], ix[2], m, ix[0]]).clone())),
            Some(FrameMap::Ricci(|d, ix| [d.v(ix[1], ix[0]), d.x(ix[2])])),
        );
        fam.push(
            "P_v_t",
            "Ricci P^{(1)}_{(i)1}",
            c.table("P", &[Slot::T_UP, Slot::S_LO, Slot::T_LO], |ix| trace(&|m| pxt.at(&[m, ix[1], ix[2], m, ix[0]]).clone())),
            Some(FrameMap::Ricci(|d, ix| [d.v(ix[1], ix[0]), d.t(ix[2])])),
        );
        let s_tab = c.table("S", &[Slot::T_UP, Slot::T_UP, Slot::S_LO, Slot::S_LO], |ix| {
            trace(&|m| sv.at(&[m, ix[2], ix[3], ix[0], m, ix[1]]).clone())
        });
        let s = geo.h.at(&[0, 0]) * &c.sum(n, |i, acc| {
            for j in 0..n {
                acc.add_product(geo.g_inv.at(&[i, j]), s_tab.at(&[0, 0, i, j]));
            }
        });
        fam.push("S_vv", "Ricci S^{(1)(1)}_{(i)(j)}", s_tab, Some(FrameMap::Ricci(|d, ix| [d.v(ix[2], ix[0]), d.v(ix[3], ix[1])])));
        let scalar = &r + &s;
        RicciData { families: fam, h: None, r, s: Some(s), scalar }
    } else {
        let hc = curv.expect("H_tttt");
        let h_tt = c.table("H", &[Slot::T_LO, Slot::T_LO], |ix| c.sum(p, |mu, acc| *acc += hc.at(&[mu, ix[0], ix[1], mu])));
        let h = c.sum(p, |a, acc| {
            for b in 0..p {
                acc.add_product(geo.h_inv.at(&[a, b]), h_tt.at(&[a, b]));
            }
        });
        fam.push("H_tt", "temporal Ricci H_{αβ}", h_tt, Some(FrameMap::Ricci(|d, ix| [d.t(ix[0]), d.t(ix[1])])));
        fam.push("R_xt", "Ricci R_{iα}", ricci_xt, Some(FrameMap::Ricci(xt)));
        fam.push("R_xx", "Ricci R_{ij}", ricci_xx, Some(FrameMap::Ricci(|d, ix| [d.x(ix[0]), d.x(ix[1])])));
        let scalar = &h + &r;
        RicciData { families: fam, h: Some(h), r, s: None, scalar }
    }
}

/// Largest frame Ricci component in the blocks that vanish identically.
pub fn ricci_zero_blocks(frame: &Frame) -> Vec<(&'static str, f64)> {
    let d = frame.dims();
    let size = frame.size();
    let kinds: &[(&'static str, fn(Block) -> bool, fn(Block) -> bool)] = if d.p == 1 {
        &[("H_11", is_t, is_t)]
    } else {
        &[("P_i(j)", is_x, is_v), ("P_(i)j", is_v, is_x), ("P_(i)b", is_v, is_t), ("S_(i)(j)", is_v, is_v)]
    };
    kinds
        .iter()
        .map(|&(name, fa, fb)| {
            let mut worst: f64 = 0.0;
            for a in 0..size {
                for b in 0..size {
                    if fa(frame.block(a)) && fb(frame.block(b)) {
                        worst = worst.max(frame.ricci(a, b).abs());
                    }
                }
            }
            (name, worst)
        })
        .collect()
}

fn is_t(b: Block) -> bool {
    matches!(b, Block::Temporal(_))
}
fn is_x(b: Block) -> bool {
    matches!(b, Block::Spatial(_))
}
fn is_v(b: Block) -> bool {
    matches!(b, Block::Vertical { .. })
}

#[derive(Clone, Debug, Serialize)]
pub struct EinsteinSystem {
    /// `G^{AB}` over the adapted basis.
    pub metric_inverse: Vec<Vec<f64>>,
    /// `E_{AB} = R_{AB} − Sc/2 G_{AB}` from the frame Ricci tensor.
    pub blocks: Vec<Vec<f64>>,
    /// Scalar curvature of the frame path.
    pub scalar: f64,
    /// `𝒯 = E/𝒦`, unset in vacuum.
    pub stress_energy: Option<Vec<Vec<f64>>>,
    /// Max |E| when `𝒦 = 0`.
    pub vacuum_residual: Option<f64>,
    /// Max |E − closed form| over the first group of equations.
    pub closed_discrepancy: f64,
    /// Blocks of the second group that must vanish.
    pub zero_blocks: Vec<(String, f64)>,
    /// `{H_{αβ} − H/2 h_{αβ}, R_{ij} − R/2 g_{ij}}` for p > 2, n > 2.
    pub reduced: Option<ReducedEinstein>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedEinstein {
    pub temporal: Vec<Vec<f64>>,
    pub spatial: Vec<Vec<f64>>,
}

pub fn einstein(geo: &PointGeometry, frame: &Frame, ric: &RicciData, k: f64) -> EinsteinSystem {
    let d = geo.dims;
    let (n, p) = (d.n, d.p);
    let size = frame.size();
    let rm = frame.ricci_matrix();
    let sc = frame.scalar_of(&rm);
    let blocks: Vec<Vec<f64>> = (0..size).map(|a| (0..size).map(|b| rm[a][b] - 0.5 * sc * frame.metric(a, b)).collect()).collect();
    let metric_inverse = (0..size).map(|a| (0..size).map(|b| frame.metric_inverse(a, b)).collect()).collect();

    let v = |t: &JetTable, ix: &[usize]| t.at(ix).value();
    let s_closed = ric.scalar.value();
    let mut closed: f64 = 0.0;
    let mut cmp = |a: usize, b: usize, expect: f64| closed = closed.max((blocks[a][b] - expect).abs());
    let hval = |a: usize, b: usize| geo.h.at(&[a, b]).value();
    let gval = |i: usize, j: usize| geo.g.at(&[i, j]).value();
    let hinv = |a: usize, b: usize| geo.h_inv.at(&[a, b]).value();
    let rxx = ric.families.expect("R_xx");
    for i in 0..n {
        for j in 0..n {
            cmp(d.x(i), d.x(j), v(rxx, &[i, j]) - 0.5 * s_closed * gval(i, j));
        }
    }
    let htt = ric.families.expect("H_tt");
    for a in 0..p {
        for b in 0..p {
            cmp(d.t(a), d.t(b), v(htt, &[a, b]) - 0.5 * s_closed * hval(a, b));
        }
    }
    for a in 0..p {
        for b in 0..p {
            for i in 0..n {
                for j in 0..n {
                    let sv = ric.families.get("S_vv").map_or(0.0, |s| v(s, &[a, b, i, j]));
                    cmp(d.v(i, a), d.v(j, b), sv - 0.5 * s_closed * hinv(a, b) * gval(i, j));
                }
            }
        }
    }

    let block_max = |fa: fn(Block) -> bool, fb: fn(Block) -> bool| {
        let mut w: f64 = 0.0;
        for a in 0..size {
            for b in 0..size {
                if fa(frame.block(a)) && fb(frame.block(b)) {
                    w = w.max(blocks[a][b].abs());
                }
            }
        }
        w
    };
    let zero_kinds: &[(&str, fn(Block) -> bool, fn(Block) -> bool)] = if p == 1 {
        &[("T_1i", is_t, is_x), ("T_1(i)", is_t, is_v)]
    } else {
        &[("T_ai", is_t, is_x), ("T_a(i)", is_t, is_v), ("T_i(j)", is_x, is_v), ("T_(i)j", is_v, is_x), ("T_(i)b", is_v, is_t)]
    };
    let zero_blocks = zero_kinds.iter().map(|&(name, fa, fb)| (name.to_string(), block_max(fa, fb) / if k > 0.0 { k } else { 1.0 })).collect();

    let reduced = (p > 2 && n > 2).then(|| {
        let h = ric.h.as_ref().map_or(0.0, Jet::value);
        let r = ric.r.value();
        ReducedEinstein {
            temporal: (0..p).map(|a| (0..p).map(|b| v(htt, &[a, b]) - 0.5 * h * hval(a, b)).collect()).collect(),
            spatial: (0..n).map(|i| (0..n).map(|j| v(rxx, &[i, j]) - 0.5 * r * gval(i, j)).collect()).collect(),
        }
    });

    let (stress_energy, vacuum_residual) = if k > 0.0 {
        (Some(blocks.iter().map(|row| row.iter().map(|e| e / k).collect()).collect()), None)
    } else {
        (None, Some(blocks.iter().flatten().fold(0.0_f64, |m, e| m.max(e.abs()))))
    };

    EinsteinSystem { metric_inverse, blocks, scalar: sc, stress_energy, vacuum_residual, closed_discrepancy: closed, zero_blocks, reduced }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConservationResiduals {
    /// One entry per conservation law.
    pub laws: Vec<f64>,
    /// The simplified laws of an autonomous space.
    pub autonomous: Option<Vec<f64>>,
}

impl ConservationResiduals {
    pub fn max(&self) -> f64 {
        max_abs(self.laws.iter().chain(self.autonomous.iter().flatten()).copied())
    }
}

pub fn conservation_residuals(geo: &PointGeometry, ric: &RicciData) -> ConservationResiduals {
    let c = Ctx::new(geo);
    let (n, p) = (c.d.n, c.d.p);
    let val = |t: &JetTable, ix: &[usize]| t.at(ix).value();
    let sc = &ric.scalar;
    let raise = |t: &JetTable, sig: &[Slot], name: &str| -> JetTable {
        // g^{mi} T_{i…}
        c.table(name, sig, |ix| {
            c.sum(n, |i, acc| {
                let mut b = vec![i];
                b.extend_from_slice(&ix[1..]);
                acc.add_product(geo.g_inv.at(&[ix[0], i]), t.at(&b));
            })
        })
    };
    let rxx = ric.families.expect("R_xx");
    let rxt = ric.families.expect("R_xt");
    let mix_xx = raise(rxx, &[Slot::S_UP, Slot::S_LO], "R^m_j");
    let div_xx = geo.covariant(&mix_xx, Covariant::Spatial);
    let mix_xt = raise(rxt, &[Slot::S_UP, Slot::T_LO], "R^m_b");
    let div_xt = geo.covariant(&mix_xt, Covariant::Spatial);
    let spatial_law = |j: usize, div: &JetTable, scal: &Jet| -> f64 {
        (0..n).map(|m| val(div, &[m, j, m])).sum::<f64>() - 0.5 * geo.delta_value(scal, Direction::X(j))
    };

    let mut laws = Vec::new();
    let mut autonomous = None;
    if p == 1 {
        let pvx = ric.families.expect("P_v_x");
        let pvt = ric.families.expect("P_v_t");
        let pxv = ric.families.expect("P_x_v");
        let svv = ric.families.expect("S_vv");
        let h11 = geo.h.at(&[0, 0]);
        // h_11 g^{im} X_{(m)…} with the temporal slot kept in front
        let raise_v = |t: &JetTable, sig: &[Slot], name: &str, idx: &dyn Fn(usize, &[usize]) -> Vec<usize>| -> JetTable {
            c.table(name, sig, |ix| {
                let s = c.sum(n, |m, acc| acc.add_product(geo.g_inv.at(&[ix[0], m]), t.at(&idx(m, ix))));
                h11 * &s
            })
        };
        let p1 = raise_v(pvt, &[Slot::S_UP, Slot::T_LO, Slot::T_LO], "P^(m)_(1)1", &|m, ix| vec![0, m, ix[2]]);
        let pj = raise_v(pvx, &[Slot::S_UP, Slot::T_LO, Slot::S_LO], "P^(m)_(1)j", &|m, ix| vec![0, m, ix[2]]);
        let smix = raise_v(svv, &[Slot::S_UP, Slot::T_LO, Slot::T_UP, Slot::S_LO], "S^(m)(1)_(1)(j)", &|m, ix| vec![0, 0, m, ix[3]]);
        let pv = raise(pxv, &[Slot::S_UP, Slot::S_LO, Slot::T_UP], "P^m(1)_(j)");
        let dp1 = geo.covariant(&p1, Covariant::Vertical);
        let dpj = geo.covariant(&pj, Covariant::Vertical);
        let dsm = geo.covariant(&smix, Covariant::Vertical);
        let dpv = geo.covariant(&pv, Covariant::Spatial);
        let l1 = 0.5 * geo.delta_value(sc, Direction::T(0)) - (0..n).map(|m| val(&div_xt, &[m, 0, m])).sum::<f64>()
            + (0..n).map(|m| val(&dp1, &[m, 0, 0, m, 0])).sum::<f64>();
        laws.push(l1);
        for j in 0..n {
            laws.push(spatial_law(j, &div_xx, sc) + (0..n).map(|m| val(&dpj, &[m, 0, j, m, 0])).sum::<f64>());
        }
        for j in 0..n {
            let lhs = (0..n).map(|m| val(&dsm, &[m, 0, 0, j, m, 0])).sum::<f64>() - 0.5 * geo.delta_value(sc, Direction::V { i: j, alpha: 0 });
            laws.push(lhs + (0..n).map(|m| val(&dpv, &[m, j, 0, m])).sum::<f64>());
        }
    } else {
        let htt = ric.families.expect("H_tt");
        let hmix = c.table("H^m_b", &[Slot::T_UP, Slot::T_LO], |ix| c.sum(p, |g, acc| acc.add_product(geo.h_inv.at(&[ix[0], g]), htt.at(&[g, ix[1]]))));
        let div_h = geo.covariant(&hmix, Covariant::Temporal);
        let temporal_law = |b: usize, scal: &Jet, with_r: bool| -> f64 {
            let mut s = (0..p).map(|mu| val(&div_h, &[mu, b, mu])).sum::<f64>() - 0.5 * geo.delta_value(scal, Direction::T(b));
            if with_r {
                s += (0..n).map(|m| val(&div_xt, &[m, b, m])).sum::<f64>();
            }
            s
        };
        for b in 0..p {
            laws.push(temporal_law(b, sc, true));
        }
        for j in 0..n {
            laws.push(spatial_law(j, &div_xx, sc));
        }
        if geo.kind == FamilyKind::Autonomous {
            let rc = g_curvature(&c);
            let r_ij = c.table("r", &[Slot::S_LO, Slot::S_LO], |ix| c.sum(n, |m, acc| *acc += rc.at(&[m, ix[0], ix[1], m])));
            let r_scalar = c.sum(n, |i, acc| {
                for j in 0..n {
                    acc.add_product(geo.g_inv.at(&[i, j]), r_ij.at(&[i, j]));
                }
            });
            let hc = h_curvature(&c);
            let h_tt = c.table("H", &[Slot::T_LO, Slot::T_LO], |ix| c.sum(p, |mu, acc| *acc += hc.at(&[mu, ix[0], ix[1], mu])));
            let h_scalar = c.sum(p, |a, acc| {
                for b in 0..p {
                    acc.add_product(geo.h_inv.at(&[a, b]), h_tt.at(&[a, b]));
                }
            });
            let total = &h_scalar + &r_scalar;
            let hm = c.table("H^m_b", &[Slot::T_UP, Slot::T_LO], |ix| c.sum(p, |g, acc| acc.add_product(geo.h_inv.at(&[ix[0], g]), h_tt.at(&[g, ix[1]]))));
            let dh = geo.covariant(&hm, Covariant::Temporal);
            let rm = raise(&r_ij, &[Slot::S_UP, Slot::S_LO], "r^m_j");
            let dr = geo.covariant(&rm, Covariant::Spatial);
            let mut out = Vec::new();
            for b in 0..p {
                out.push((0..p).map(|mu| val(&dh, &[mu, b, mu])).sum::<f64>() - 0.5 * geo.delta_value(&total, Direction::T(b)));
            }
            for j in 0..n {
                out.push(spatial_law(j, &dr, &total));
            }
            autonomous = Some(out);
        }
    }
    ConservationResiduals { laws, autonomous }
}

/// Convenience bundle of everything computed at one point.
#[derive(Clone, Debug)]
pub struct FieldTheory {
    pub deflections: DeflectionTensors,
    pub em: ElectromagneticForm,
    pub maxwell: MaxwellResiduals,
    pub deflection_identities: DeflectionIdentityResiduals,
    pub ricci: RicciData,
    pub conservation: ConservationResiduals,
}

impl FieldTheory {
    pub fn compute(geo: &PointGeometry, tors: &TorsionTensors, curv: &CurvatureTensors) -> Self {
        let deflections = deflections(geo);
        let em = electromagnetic_form(geo, &deflections);
        let maxwell = maxwell_residuals(geo, tors, curv, &deflections, &em);
        let deflection_identities = deflection_identity_residuals(geo, tors, curv, &deflections);
        let ricci = ricci(geo, curv);
        let conservation = conservation_residuals(geo, &ricci);
        FieldTheory { deflections, em, maxwell, deflection_identities, ricci, conservation }
    }
}

impl ComponentTable<Jet> {
    /// Largest |value| of a jet table.
    pub fn max_abs_value(&self) -> f64 {
        self.values().max_abs()
    }
}
