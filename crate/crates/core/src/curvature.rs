//! Torsion and curvature d-tensors of the Cartan connection, computed from their
//! closed forms as jets, plus Bianchi and antisymmetry residuals.
//!
//! Storage follows the written index order, upper indices first within each pair:
//!
//! | key | tensor | slots |
//! |---|---|---|
//! | `T_tx` | `T^m_{αj}` | `[m, α, j]` |
//! | `P_x_v` | `P^{m(γ)}_{i(j)}` | `[m, i, j, γ]` |
//! | `P_v_tv` | `P^{(m)(β)}_{(μ)α(j)}` | `[m, μ, α, j, β]` |
//! | `P_v_xv` | `P^{(m)(γ)}_{(μ)i(j)}` | `[m, μ, i, j, γ]` |
//! | `R_v_tt` | `R^{(m)}_{(μ)αβ}` | `[m, μ, α, β]` |
//! | `R_v_tx` | `R^{(m)}_{(μ)αj}` | `[m, μ, α, j]` |
//! | `R_v_xx` | `R^{(m)}_{(μ)ij}` | `[m, μ, i, j]` |
//! | `H_tttt` | `H^α_{ηβγ}` | `[α, η, β, γ]` |
//! | `R_xtt` | `R^l_{iβγ}` | `[l, i, β, γ]` |
//! | `R_xtx` | `R^l_{iβk}` | `[l, i, β, k]` |
//! | `R_xxx` | `R^l_{ijk}` | `[l, i, j, k]` |
//! | `P_xtv` | `P^{l(γ)}_{iβ(k)}` | `[l, i, β, k, γ]` |
//! | `P_xxv` | `P^{l(γ)}_{ij(k)}` | `[l, i, j, k, γ]` |
//! | `S_xvv` | `S^{l(β)(γ)}_{i(j)(k)}` | `[l, i, j, β, k, γ]` |
//! | `Rv_tt` | `R^{(l)(α)}_{(η)(i)βγ}` | `[l, α, η, i, β, γ]` |
//! | `Rv_tx` | `R^{(l)(α)}_{(η)(i)βk}` | `[l, α, η, i, β, k]` |
//! | `Rv_xx` | `R^{(l)(α)}_{(η)(i)jk}` | `[l, α, η, i, j, k]` |
//! | `F_aux` | `F^m_{i(μ)}` | `[m, i, μ]` |
//! | `r_xxx` | `r^m_{pij}` | `[m, p, i, j]` |

use serde::Serialize;

use crate::connection::{Covariant, Direction, JetTable, PointGeometry};
use crate::expr::Dims;
use crate::frame::{Block, Frame};
use crate::jet::Jet;
use crate::table::{ComponentTable, Slot};

/// Where a family lives in the adapted frame.
#[derive(Clone, Copy)]
pub enum FrameMap {
    /// `(D, B, C)` of `T^D_{BC}`
    Torsion(fn(Dims, &[usize]) -> [usize; 3]),
    /// `(D, A, B, C)` of `R^D_{ABC}`
    Curvature(fn(Dims, &[usize]) -> [usize; 4]),
    /// `(A, B)` of `R_{AB}`
    Ricci(fn(Dims, &[usize]) -> [usize; 2]),
}

impl std::fmt::Debug for FrameMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameMap::Torsion(_) => f.write_str("Torsion"),
            FrameMap::Curvature(_) => f.write_str("Curvature"),
            FrameMap::Ricci(_) => f.write_str("Ricci"),
        }
    }
}

impl FrameMap {
    pub fn eval(&self, frame: &Frame, ix: &[usize]) -> f64 {
        let d = frame.dims();
        match self {
            FrameMap::Torsion(f) => {
                let [a, b, c] = f(d, ix);
                frame.torsion(a, b, c)
            }
            FrameMap::Curvature(f) => {
                let [a, b, c, e] = f(d, ix);
                frame.curvature(a, b, c, e)
            }
            FrameMap::Ricci(f) => {
                let [a, b] = f(d, ix);
                frame.ricci(a, b)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Family {
    pub key: &'static str,
    /// Descriptive name for reports.
    pub label: &'static str,
    pub table: JetTable,
    pub frame: Option<FrameMap>,
}

#[derive(Clone, Debug, Default)]
pub struct FamilySet {
    families: Vec<Family>,
}

impl FamilySet {
    pub fn push(&mut self, key: &'static str, label: &'static str, table: JetTable, frame: Option<FrameMap>) {
        self.families.push(Family { key, label, table: table.renamed(key), frame });
    }

    pub fn get(&self, key: &str) -> Option<&JetTable> {
        self.families.iter().find(|f| f.key == key).map(|f| &f.table)
    }

    /// Panics when the family is not part of this branch.
    pub fn expect(&self, key: &str) -> &JetTable {
        self.get(key).unwrap_or_else(|| panic!("no family `{key}` on this branch"))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Family> {
        self.families.iter()
    }

    pub fn keys(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.key).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// Largest |closed form − frame| per family that has a frame counterpart.
    pub fn frame_discrepancies(&self, frame: &Frame) -> Vec<(&'static str, f64)> {
        self.families
            .iter()
            .filter_map(|f| {
                let map = f.frame?;
                let worst = f
                    .table
                    .indices()
                    .map(|ix| (f.table.at(&ix).value() - map.eval(frame, &ix)).abs())
                    .fold(0.0, f64::max);
                Some((f.key, worst))
            })
            .collect()
    }
}

pub type TorsionTensors = FamilySet;
pub type CurvatureTensors = FamilySet;

fn x(d: Dims, i: usize) -> usize {
    d.x(i)
}
fn t(d: Dims, a: usize) -> usize {
    d.t(a)
}
fn v(d: Dims, i: usize, a: usize) -> usize {
    d.v(i, a)
}

/// Helpers shared by the closed forms.
pub(crate) struct Ctx<'a> {
    pub geo: &'a PointGeometry,
    pub d: Dims,
    pub zero: Jet,
    pub x: JetTable,
}

impl<'a> Ctx<'a> {
    pub fn new(geo: &'a PointGeometry) -> Self {
        Ctx { geo, d: geo.dims, zero: geo.zero(), x: geo.liouville() }
    }

    pub fn table(&self, name: &str, sig: &[Slot], f: impl FnMut(&[usize]) -> Jet) -> JetTable {
        ComponentTable::from_fn(name, sig, self.d, f)
    }

    pub fn delta(&self, f: &Jet, dir: Direction) -> Jet {
        self.geo.delta(f, dir)
    }

    pub fn partial_v(&self, f: &Jet, i: usize, a: usize) -> Jet {
        f.partial(self.d.v(i, a))
    }

    pub fn sum(&self, range: usize, mut f: impl FnMut(usize, &mut Jet)) -> Jet {
        let mut acc = self.zero.clone();
        for m in 0..range {
            f(m, &mut acc);
        }
        acc
    }

    pub fn kron(a: usize, b: usize) -> f64 {
        PointGeometry::kron(a, b)
    }
}

/// `H^γ_{μαβ}`, curvature of the temporal metric.
pub(crate) fn h_curvature(c: &Ctx) -> JetTable {
    let g = c.geo;
    let (d, p) = (c.d, c.d.p);
    let hh = &g.temporal_christoffel;
    c.table("H", &[Slot::T_UP, Slot::T_LO, Slot::T_LO, Slot::T_LO], |ix| {
        let (ga, mu, al, be) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = hh.at(&[ga, mu, al]).partial(d.t(be)) - hh.at(&[ga, mu, be]).partial(d.t(al));
        for e in 0..p {
            r.add_product(hh.at(&[e, mu, al]), hh.at(&[ga, e, be]));
            r -= &(hh.at(&[e, mu, be]) * hh.at(&[ga, e, al]));
        }
        r
    })
}

/// `r^m_{pij}` straight from the Christoffel symbols of `g`.
pub(crate) fn g_curvature(c: &Ctx) -> JetTable {
    let (d, n) = (c.d, c.d.n);
    let gm = &c.geo.spatial_christoffel;
    c.table("r", &[Slot::S_UP, Slot::S_LO, Slot::S_LO, Slot::S_LO], |ix| {
        let (m, pp, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = gm.at(&[m, pp, i]).partial(d.x(j)) - gm.at(&[m, pp, j]).partial(d.x(i));
        for k in 0..n {
            r.add_product(gm.at(&[k, pp, i]), gm.at(&[m, k, j]));
            r -= &(gm.at(&[k, pp, j]) * gm.at(&[m, k, i]));
        }
        r
    })
}

/// `F^m_{i(μ)} = g^{mp}/2 [∂g_{pi}/∂t^μ + ½ h_{μβ} U^{(β)}_{(p)i}]`
pub(crate) fn f_aux(c: &Ctx) -> JetTable {
    let g = c.geo;
    let (d, n, p) = (c.d, c.d.n, c.d.p);
    c.table("F", &[Slot::S_UP, Slot::S_LO, Slot::T_LO], |ix| {
        let (m, i, mu) = (ix[0], ix[1], ix[2]);
        c.sum(n, |q, acc| {
            let mut inner = g.g.at(&[q, i]).partial(d.t(mu));
            if let Some(u) = &g.u_curl {
                for b in 0..p {
                    inner.add_product(&g.h.at(&[mu, b]).scale(0.5), u.at(&[b, q, i]));
                }
            }
            acc.add_product(&g.g_inv.at(&[m, q]).scale(0.5), &inner);
        })
    })
}

fn t_tx(c: &Ctx) -> JetTable {
    c.table("T", &[Slot::S_UP, Slot::T_LO, Slot::S_LO], |ix| -c.geo.cartan_g.at(&[ix[0], ix[2], ix[1]]))
}

fn p_x_v(c: &Ctx) -> JetTable {
    c.geo.cartan_c.clone()
}

fn p_v_tv(c: &Ctx) -> JetTable {
    c.table("P", &[Slot::S_UP, Slot::T_LO, Slot::T_LO, Slot::S_LO, Slot::T_UP], |ix| {
        let (m, mu, al, j, be) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        c.geo.cartan_g.at(&[m, j, al]).scale(-Ctx::kron(be, mu))
    })
}

pub(crate) fn p_v_xv(c: &Ctx) -> JetTable {
    c.table("P", &[Slot::S_UP, Slot::T_LO, Slot::S_LO, Slot::S_LO, Slot::T_UP], |ix| {
        let (m, mu, i, j, ga) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        c.partial_v(c.geo.n.at(&[m, mu, i]), j, ga) - c.geo.cartan_l.at(&[m, j, i]).scale(Ctx::kron(ga, mu))
    })
}

fn r_v_tt(c: &Ctx, hc: &JetTable) -> JetTable {
    c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::T_LO, Slot::T_LO], |ix| {
        let (m, mu, al, be) = (ix[0], ix[1], ix[2], ix[3]);
        -c.sum(c.d.p, |ga, acc| acc.add_product(hc.at(&[ga, mu, al, be]), c.x.at(&[m, ga])))
    })
}

fn r_v_tx_p1(c: &Ctx) -> JetTable {
    let g = c.geo;
    let (d, n) = (c.d, c.d.n);
    let h111 = g.temporal_christoffel.at(&[0, 0, 0]);
    c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::T_LO, Slot::S_LO], |ix| {
        let (m, j) = (ix[0], ix[3]);
        let nmj = g.n.at(&[m, 0, j]);
        let mut bracket = nmj.clone();
        for k in 0..n {
            bracket -= &(nmj.partial(d.v(k, 0)) * c.x.at(&[k, 0]));
        }
        -nmj.partial(d.t(0)) + h111 * &bracket
    })
}

fn r_v_tx_multi(c: &Ctx) -> JetTable {
    let g = c.geo;
    let (d, n, p) = (c.d, c.d.n, c.d.p);
    c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::T_LO, Slot::S_LO], |ix| {
        let (m, mu, al, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = -g.n.at(&[m, mu, j]).partial(d.t(al));
        for k in 0..n {
            for be in 0..p {
                let mut inner = g.g.at(&[j, k]).partial(d.t(be));
                if let Some(u) = &g.u_curl {
                    for ga in 0..p {
                        inner.add_product(&g.h.at(&[be, ga]).scale(0.5), u.at(&[ga, k, j]));
                    }
                }
                let coef = g.g_inv.at(&[m, k]).scale(0.5) * g.temporal_christoffel.at(&[be, mu, al]);
                r.add_product(&coef, &inner);
            }
        }
        r
    })
}

fn r_v_xx_p1(c: &Ctx) -> JetTable {
    let g = c.geo;
    c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::S_LO, Slot::S_LO], |ix| {
        let (m, mu, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        c.delta(g.n.at(&[m, mu, i]), Direction::X(j)) - c.delta(g.n.at(&[m, mu, j]), Direction::X(i))
    })
}

fn r_v_xx_multi(c: &Ctx, r: &JetTable, f: &JetTable) -> JetTable {
    let fd = c.geo.covariant(f, Covariant::Spatial);
    c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::S_LO, Slot::S_LO], |ix| {
        let (m, mu, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut out = fd.at(&[m, i, mu, j]) - fd.at(&[m, j, mu, i]);
        for k in 0..c.d.n {
            out.add_product(r.at(&[m, k, i, j]), c.x.at(&[k, mu]));
        }
        out
    })
}

/// The torsion families of this branch; structural zeros are not stored.
pub fn torsion(geo: &PointGeometry) -> TorsionTensors {
    let c = Ctx::new(geo);
    let mut s = FamilySet::default();
    s.push("T_tx", "horizontal mixed torsion T^m_{αj}", t_tx(&c), Some(FrameMap::Torsion(|d, ix| [x(d, ix[0]), t(d, ix[1]), x(d, ix[2])])));
    if c.d.p == 1 {
        s.push("P_x_v", "spatial-vertical torsion P^{m(1)}_{i(j)}", p_x_v(&c), Some(FrameMap::Torsion(|d, ix| [x(d, ix[0]), x(d, ix[1]), v(d, ix[2], ix[3])])));
    }
    s.push(
        "P_v_tv",
        "vertical torsion P^{(m)(β)}_{(μ)α(j)}",
        p_v_tv(&c),
        Some(FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), t(d, ix[2]), v(d, ix[3], ix[4])])),
    );
    if c.d.p == 1 {
        s.push(
            "P_v_xv",
            "vertical torsion P^{(m)(1)}_{(1)i(j)}",
            p_v_xv(&c),
            Some(FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), x(d, ix[2]), v(d, ix[3], ix[4])])),
        );
    }
    let map_tt = FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), t(d, ix[2]), t(d, ix[3])]);
    let map_tx = FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), t(d, ix[2]), x(d, ix[3])]);
    let map_xx = FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), x(d, ix[2]), x(d, ix[3])]);
    if c.d.p == 1 {
        s.push("R_v_tx", "nonlinear-connection curvature R^{(m)}_{(1)1j}", r_v_tx_p1(&c), Some(map_tx));
        s.push("R_v_xx", "nonlinear-connection curvature R^{(m)}_{(1)ij}", r_v_xx_p1(&c), Some(map_xx));
    } else {
        let hc = h_curvature(&c);
        let r = g_curvature(&c);
        let f = f_aux(&c);
        s.push("R_v_tt", "nonlinear-connection curvature R^{(m)}_{(μ)αβ}", r_v_tt(&c, &hc), Some(map_tt));
        s.push("R_v_tx", "nonlinear-connection curvature R^{(m)}_{(μ)αj}", r_v_tx_multi(&c), Some(map_tx));
        s.push("R_v_xx", "nonlinear-connection curvature R^{(m)}_{(μ)ij}", r_v_xx_multi(&c, &r, &f), Some(map_xx));
        s.push("F_aux", "auxiliary tensor F^m_{i(μ)}", f, None);
        s.push("H_tttt", "temporal metric curvature H^γ_{μαβ}", hc, None);
        s.push("r_xxx", "spatial metric curvature r^m_{pij}", r, None);
    }
    s
}

/// Simplified torsion of an autonomous space (`g = g(x)`), p ≥ 2.
///
/// The last term of `R^{(m)}_{(μ)ij}` is the antisymmetrization of `U_{(k)i|j}`.
pub fn autonomous_torsion(geo: &PointGeometry) -> TorsionTensors {
    let c = Ctx::new(geo);
    let (n, p) = (c.d.n, c.d.p);
    let g = c.geo;
    let hc = h_curvature(&c);
    let r = g_curvature(&c);
    let zero_u;
    let u = match &g.u_curl {
        Some(u) => u,
        None => {
            zero_u = ComponentTable::zeros_like_jet("U", &[Slot::T_UP, Slot::S_LO, Slot::S_LO], c.d, &c.zero);
            &zero_u
        }
    };
    let du = g.covariant(u, Covariant::Spatial);
    let mut s = FamilySet::default();
    s.push(
        "R_v_tt",
        "nonlinear-connection curvature R^{(m)}_{(μ)αβ}",
        r_v_tt(&c, &hc),
        Some(FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), t(d, ix[2]), t(d, ix[3])])),
    );
    let tx = c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::T_LO, Slot::S_LO], |ix| {
        let (m, mu, al, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut out = c.zero.clone();
        for k in 0..n {
            for eta in 0..p {
                let coef = (g.h.at(&[mu, eta]) * g.g_inv.at(&[m, k])).scale(-0.25);
                let mut inner = u.at(&[eta, k, j]).partial(c.d.t(al));
                for ga in 0..p {
                    inner.add_product(g.temporal_christoffel.at(&[eta, al, ga]), u.at(&[ga, k, j]));
                }
                out.add_product(&coef, &inner);
            }
        }
        out
    });
    s.push(
        "R_v_tx",
        "nonlinear-connection curvature R^{(m)}_{(μ)αj}",
        tx,
        Some(FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), t(d, ix[2]), x(d, ix[3])])),
    );
    let xx = c.table("R", &[Slot::S_UP, Slot::T_LO, Slot::S_LO, Slot::S_LO], |ix| {
        let (m, mu, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut out = c.zero.clone();
        for k in 0..n {
            out.add_product(r.at(&[m, k, i, j]), c.x.at(&[k, mu]));
            for eta in 0..p {
                let coef = (g.h.at(&[mu, eta]) * g.g_inv.at(&[m, k])).scale(0.25);
                out.add_product(&coef, &(du.at(&[eta, k, i, j]) - du.at(&[eta, k, j, i])));
            }
        }
        out
    });
    s.push(
        "R_v_xx",
        "nonlinear-connection curvature R^{(m)}_{(μ)ij}",
        xx,
        Some(FrameMap::Torsion(|d, ix| [v(d, ix[0], ix[1]), x(d, ix[2]), x(d, ix[3])])),
    );
    s
}

fn curv_sig(tail: &[Slot]) -> Vec<Slot> {
    let mut s = vec![Slot::S_UP, Slot::S_LO];
    s.extend_from_slice(tail);
    s
}

/// `R^{(m)}_{(μ)··}` contracted with `C^{l(μ)}_{i(m)}`, one jet per tail index.
fn c_times(c: &Ctx, l: usize, i: usize, rest: impl Fn(usize, usize) -> Jet) -> Jet {
    c.sum(c.d.n, |m, acc| {
        for mu in 0..c.d.p {
            let cc = c.geo.cartan_c.at(&[l, i, m, mu]);
            if !cc.is_zero() {
                acc.add_product(cc, &rest(m, mu));
            }
        }
    })
}

fn r_xtt(c: &Ctx) -> JetTable {
    let gg = &c.geo.cartan_g;
    c.table("R", &curv_sig(&[Slot::T_LO, Slot::T_LO]), |ix| {
        let (l, i, be, ga) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = c.delta(gg.at(&[l, i, be]), Direction::T(ga)) - c.delta(gg.at(&[l, i, ga]), Direction::T(be));
        for m in 0..c.d.n {
            r.add_product(gg.at(&[m, i, be]), gg.at(&[l, m, ga]));
            r -= &(gg.at(&[m, i, ga]) * gg.at(&[l, m, be]));
        }
        r
    })
}

fn r_xtx(c: &Ctx, r_tx: &JetTable) -> JetTable {
    let (gg, ll) = (&c.geo.cartan_g, &c.geo.cartan_l);
    c.table("R", &curv_sig(&[Slot::T_LO, Slot::S_LO]), |ix| {
        let (l, i, be, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = c.delta(gg.at(&[l, i, be]), Direction::X(k)) - c.delta(ll.at(&[l, i, k]), Direction::T(be));
        for m in 0..c.d.n {
            r.add_product(gg.at(&[m, i, be]), ll.at(&[l, m, k]));
            r -= &(ll.at(&[m, i, k]) * gg.at(&[l, m, be]));
        }
        r + c_times(c, l, i, |m, mu| r_tx.at(&[m, mu, be, k]).clone())
    })
}

fn r_xxx(c: &Ctx, r_xx: &JetTable) -> JetTable {
    let ll = &c.geo.cartan_l;
    c.table("R", &curv_sig(&[Slot::S_LO, Slot::S_LO]), |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut r = c.delta(ll.at(&[l, i, j]), Direction::X(k)) - c.delta(ll.at(&[l, i, k]), Direction::X(j));
        for m in 0..c.d.n {
            r.add_product(ll.at(&[m, i, j]), ll.at(&[l, m, k]));
            r -= &(ll.at(&[m, i, k]) * ll.at(&[l, m, j]));
        }
        r + c_times(c, l, i, |m, mu| r_xx.at(&[m, mu, j, k]).clone())
    })
}

fn p_xtv(c: &Ctx, p_tv: &JetTable) -> JetTable {
    let cd = c.geo.covariant(&c.geo.cartan_c, Covariant::Temporal);
    c.table("P", &curv_sig(&[Slot::T_LO, Slot::S_LO, Slot::T_UP]), |ix| {
        let (l, i, be, k, ga) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        c.partial_v(c.geo.cartan_g.at(&[l, i, be]), k, ga) - cd.at(&[l, i, k, ga, be])
            + c_times(c, l, i, |m, mu| p_tv.at(&[m, mu, be, k, ga]).clone())
    })
}

pub(crate) fn p_xxv(c: &Ctx, p_xv: &JetTable) -> JetTable {
    let cd = c.geo.covariant(&c.geo.cartan_c, Covariant::Spatial);
    c.table("P", &curv_sig(&[Slot::S_LO, Slot::S_LO, Slot::T_UP]), |ix| {
        let (l, i, j, k, ga) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        c.partial_v(c.geo.cartan_l.at(&[l, i, j]), k, ga) - cd.at(&[l, i, k, ga, j])
            + c_times(c, l, i, |m, mu| p_xv.at(&[m, mu, j, k, ga]).clone())
    })
}

fn s_xvv(c: &Ctx) -> JetTable {
    let cc = &c.geo.cartan_c;
    c.table("S", &curv_sig(&[Slot::S_LO, Slot::T_UP, Slot::S_LO, Slot::T_UP]), |ix| {
        let (l, i, j, be, k, ga) = (ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]);
        let mut s = c.partial_v(cc.at(&[l, i, j, be]), k, ga) - c.partial_v(cc.at(&[l, i, k, ga]), j, be);
        for m in 0..c.d.n {
            s.add_product(cc.at(&[m, i, j, be]), cc.at(&[l, m, k, ga]));
            s -= &(cc.at(&[m, i, k, ga]) * cc.at(&[l, m, j, be]));
        }
        s
    })
}

fn vertical_block(c: &Ctx, base: &JetTable, h: Option<&JetTable>, tail: &[Slot]) -> JetTable {
    let mut sig = vec![Slot::S_UP, Slot::T_UP, Slot::T_LO, Slot::S_LO];
    sig.extend_from_slice(tail);
    c.table("Rv", &sig, |ix| {
        let (l, al, eta, i) = (ix[0], ix[1], ix[2], ix[3]);
        let rest = &ix[4..];
        let mut r = if al == eta {
            let mut b = vec![l, i];
            b.extend_from_slice(rest);
            base.at(&b).clone()
        } else {
            c.zero.clone()
        };
        if let (Some(h), true) = (h, l == i) {
            let mut b = vec![al, eta];
            b.extend_from_slice(rest);
            r += h.at(&b);
        }
        r
    })
}

/// Torsion families needed by every branch's curvature, whether stored or not.
pub(crate) struct TorsionParts {
    pub r_tx: JetTable,
    pub r_xx: JetTable,
    pub p_tv: JetTable,
    pub p_xv: JetTable,
}

impl TorsionParts {
    pub fn new(c: &Ctx, tors: &TorsionTensors) -> Self {
        TorsionParts {
            r_tx: tors.expect("R_v_tx").clone(),
            r_xx: tors.expect("R_v_xx").clone(),
            p_tv: tors.expect("P_v_tv").clone(),
            p_xv: tors.get("P_v_xv").cloned().unwrap_or_else(|| p_v_xv(c)),
        }
    }
}

/// The curvature families of this branch; structural zeros are not stored.
pub fn curvature(geo: &PointGeometry, tors: &TorsionTensors) -> CurvatureTensors {
    let c = Ctx::new(geo);
    let parts = TorsionParts::new(&c, tors);
    let mut s = FamilySet::default();
    let multi = c.d.p >= 2;
    let hc = if multi { Some(h_curvature(&c)) } else { None };
    if let Some(hc) = &hc {
        s.push("H_tttt", "temporal curvature H^α_{ηβγ}", hc.clone(), Some(FrameMap::Curvature(|d, ix| [t(d, ix[0]), t(d, ix[1]), t(d, ix[2]), t(d, ix[3])])));
        s.push("R_xtt", "h-curvature R^l_{iβγ}", r_xtt(&c), Some(FrameMap::Curvature(|d, ix| [x(d, ix[0]), x(d, ix[1]), t(d, ix[2]), t(d, ix[3])])));
    }
    let rtx = r_xtx(&c, &parts.r_tx);
    let rxx = r_xxx(&c, &parts.r_xx);
    s.push("R_xtx", "h-curvature R^l_{iβk}", rtx.clone(), Some(FrameMap::Curvature(|d, ix| [x(d, ix[0]), x(d, ix[1]), t(d, ix[2]), x(d, ix[3])])));
    s.push("R_xxx", "h-curvature R^l_{ijk}", rxx.clone(), Some(FrameMap::Curvature(|d, ix| [x(d, ix[0]), x(d, ix[1]), x(d, ix[2]), x(d, ix[3])])));
    if multi {
        s.push("r_xxx", "spatial metric curvature r^l_{ijk}", g_curvature(&c), None);
        let rtt = s.expect("R_xtt").clone();
        s.push("Rv_tt", "vertical block R^{(l)(α)}_{(η)(i)βγ}", vertical_block(&c, &rtt, hc.as_ref(), &[Slot::T_LO, Slot::T_LO]), None);
        s.push(
            "Rv_tx",
            "vertical block R^{(l)(α)}_{(η)(i)βk}",
            vertical_block(&c, &rtx, None, &[Slot::T_LO, Slot::S_LO]),
            Some(FrameMap::Curvature(|d, ix| [v(d, ix[0], ix[2]), v(d, ix[3], ix[1]), t(d, ix[4]), x(d, ix[5])])),
        );
        s.push(
            "Rv_xx",
            "vertical block R^{(l)(α)}_{(η)(i)jk}",
            vertical_block(&c, &rxx, None, &[Slot::S_LO, Slot::S_LO]),
            Some(FrameMap::Curvature(|d, ix| [v(d, ix[0], ix[2]), v(d, ix[3], ix[1]), x(d, ix[4]), x(d, ix[5])])),
        );
    } else {
        s.push(
            "P_xtv",
            "hv-curvature P^{l(1)}_{i1(k)}",
            p_xtv(&c, &parts.p_tv),
            Some(FrameMap::Curvature(|d, ix| [x(d, ix[0]), x(d, ix[1]), t(d, ix[2]), v(d, ix[3], ix[4])])),
        );
        s.push(
            "P_xxv",
            "hv-curvature P^{l(1)}_{ij(k)}",
            p_xxv(&c, &parts.p_xv),
            Some(FrameMap::Curvature(|d, ix| [x(d, ix[0]), x(d, ix[1]), x(d, ix[2]), v(d, ix[3], ix[4])])),
        );
        s.push(
            "S_xvv",
            "v-curvature S^{l(1)(1)}_{i(j)(k)}",
            s_xvv(&c),
            Some(FrameMap::Curvature(|d, ix| [x(d, ix[0]), x(d, ix[1]), v(d, ix[2], ix[3]), v(d, ix[4], ix[5])])),
        );
    }
    s
}

/// Frame value of the vertical block `R^{(l)(α)}_{(η)(i)βγ}`.
pub fn vertical_block_from_frame(frame: &Frame, ix: &[usize]) -> f64 {
    let d = frame.dims();
    frame.curvature(d.v(ix[0], ix[2]), d.v(ix[3], ix[1]), d.t(ix[4]), d.t(ix[5]))
}

/// Which of the three distributions an adapted index belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Part {
    #[serde(rename = "h_T")]
    HT,
    #[serde(rename = "h_M")]
    HM,
    #[serde(rename = "v")]
    V,
}

impl std::fmt::Display for Part {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Part::HT => "h_T",
            Part::HM => "h_M",
            Part::V => "v",
        })
    }
}

fn part(b: Block) -> Part {
    match b {
        Block::Temporal(_) => Part::HT,
        Block::Spatial(_) => Part::HM,
        Block::Vertical { .. } => Part::V,
    }
}

fn pair(a: Part, b: Part) -> (Part, Part) {
    if a >= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn torsion_allowed(p1: bool, out: Part, pr: (Part, Part)) -> bool {
    use Part::*;
    let cells: &[(Part, (Part, Part))] = if p1 {
        &[(HM, (HM, HT)), (V, (HM, HT)), (V, (HM, HM)), (V, (V, HT)), (HM, (V, HM)), (V, (V, HM))]
    } else {
        &[(V, (HT, HT)), (HM, (HM, HT)), (V, (HM, HT)), (V, (HM, HM)), (V, (V, HT))]
    };
    cells.contains(&(out, pr))
}

fn curvature_allowed(p1: bool, out: Part, arg: Part, pr: (Part, Part)) -> bool {
    use Part::*;
    if out != arg {
        return false;
    }
    let pairs: &[(Part, Part)] = match (p1, arg) {
        (true, HT) => &[],
        (true, _) => &[(HM, HT), (HM, HM), (V, HT), (V, HM), (V, V)],
        (false, HT) => &[(HT, HT)],
        (false, _) => &[(HT, HT), (HM, HT), (HM, HM)],
    };
    pairs.contains(&pr)
}

/// One class of cells that must vanish.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroCell {
    pub tensor: &'static str,
    /// Distribution of the output index.
    pub out: Part,
    /// Distribution of the transported index (curvature only).
    pub arg: Option<Part>,
    pub pair: (Part, Part),
    pub max_abs: f64,
}

/// Evaluates every structurally zero cell of the torsion and curvature tables
/// from the frame, including the components mixing distributions.
pub fn structural_zero_audit(frame: &Frame) -> Vec<ZeroCell> {
    use std::collections::BTreeMap;
    let d = frame.dims();
    let p1 = d.p == 1;
    let size = frame.size();
    let parts: Vec<Part> = (0..size).map(|a| part(frame.block(a))).collect();
    let mut tors: BTreeMap<(Part, (Part, Part)), f64> = BTreeMap::new();
    let mut curv: BTreeMap<(Part, Part, (Part, Part)), f64> = BTreeMap::new();
    for dd in 0..size {
        for b in 0..size {
            for cc in 0..size {
                let pr = pair(parts[b], parts[cc]);
                if !torsion_allowed(p1, parts[dd], pr) {
                    let e = tors.entry((parts[dd], pr)).or_insert(0.0);
                    *e = e.max(frame.torsion(dd, b, cc).abs());
                }
                for a in 0..size {
                    if !curvature_allowed(p1, parts[dd], parts[a], pr) {
                        let e = curv.entry((parts[dd], parts[a], pr)).or_insert(0.0);
                        *e = e.max(frame.curvature(dd, a, b, cc).abs());
                    }
                }
            }
        }
    }
    let mut out: Vec<ZeroCell> = tors
        .into_iter()
        .map(|((o, pr), m)| ZeroCell { tensor: "torsion", out: o, arg: None, pair: pr, max_abs: m })
        .collect();
    out.extend(curv.into_iter().map(|((o, a, pr), m)| ZeroCell { tensor: "curvature", out: o, arg: Some(a), pair: pr, max_abs: m }));
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BianchiResiduals {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AntisymmetryResiduals {
    /// `R_{mijk} + R_{imjk}`
    pub r_xxx: f64,
    /// `R_{miβk} + R_{imβk}`
    pub r_xtx: f64,
    /// `P_{mij(k)} + P_{imj(k)}`
    pub p_xxv: f64,
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// The three Bianchi identities b1, b2, b3, max-abs over free indices.
pub fn bianchi_residuals(geo: &PointGeometry, tors: &TorsionTensors, curv: &CurvatureTensors) -> BianchiResiduals {
    let c = Ctx::new(geo);
    let parts = TorsionParts::new(&c, tors);
    let (n, p) = (c.d.n, c.d.p);
    let cc = &geo.cartan_c;
    let rtx = curv.expect("R_xtx");
    let rxx = curv.expect("R_xxx");
    let pxx = curv.get("P_xxv").cloned().unwrap_or_else(|| p_xxv(&c, &parts.p_xv));
    let dt = geo.covariant(tors.expect("T_tx"), Covariant::Spatial);
    let dc = geo.covariant(cc, Covariant::Spatial);
    // C^{l(μ)}_{k(m)} X^{(m)}_{(μ)}
    let cx = |l: usize, k: usize, f: &dyn Fn(usize, usize) -> f64| -> f64 {
        let mut s = 0.0;
        for m in 0..n {
            for mu in 0..p {
                s += cc.at(&[l, k, m, mu]).value() * f(m, mu);
            }
        }
        s
    };

    let mut b1 = Vec::new();
    for l in 0..n {
        for al in 0..p {
            for j in 0..n {
                for k in 0..n {
                    let side = |j: usize, k: usize| {
                        rtx.at(&[l, j, al, k]).value()
                            + dt.at(&[l, al, j, k]).value()
                            + cx(l, k, &|m, mu| parts.r_tx.at(&[m, mu, al, j]).value())
                    };
                    b1.push(side(j, k) - side(k, j));
                }
            }
        }
    }

    let mut b2 = Vec::new();
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let term = |i: usize, j: usize, k: usize| {
                        rxx.at(&[l, i, j, k]).value() - cx(l, k, &|m, mu| parts.r_xx.at(&[m, mu, i, j]).value())
                    };
                    b2.push(term(i, j, k) + term(j, k, i) + term(k, i, j));
                }
            }
        }
    }

    let mut b3 = Vec::new();
    for l in 0..n {
        for eps in 0..p {
            for q in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let side = |j: usize, k: usize| {
                            pxx.at(&[l, j, k, q, eps]).value()
                                + dc.at(&[l, j, q, eps, k]).value()
                                + cx(l, k, &|m, mu| parts.p_xv.at(&[m, mu, j, q, eps]).value())
                        };
                        b3.push(side(j, k) - side(k, j));
                    }
                }
            }
        }
    }

    BianchiResiduals { b1: max_abs(b1), b2: max_abs(b2), b3: max_abs(b3) }
}

/// Antisymmetry of the lowered curvature in its first pair.
pub fn antisymmetry_residuals(geo: &PointGeometry, tors: &TorsionTensors, curv: &CurvatureTensors) -> AntisymmetryResiduals {
    let c = Ctx::new(geo);
    let parts = TorsionParts::new(&c, tors);
    let (n, p) = (c.d.n, c.d.p);
    let g = |i: usize, j: usize| geo.g.at(&[i, j]).value();
    let lower = |t: &JetTable, m: usize, i: usize, rest: &[usize]| -> f64 {
        (0..n)
            .map(|q| {
                let mut ix = vec![q, m];
                ix.extend_from_slice(rest);
                g(i, q) * t.at(&ix).value()
            })
            .sum()
    };
    let rxx = curv.expect("R_xxx");
    let rtx = curv.expect("R_xtx");
    let pxx = curv.get("P_xxv").cloned().unwrap_or_else(|| p_xxv(&c, &parts.p_xv));
    let mut out = AntisymmetryResiduals::default();
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.r_xxx = out.r_xxx.max((lower(rxx, m, i, &[j, k]) + lower(rxx, i, m, &[j, k])).abs());
                    for ga in 0..p {
                        out.p_xxv = out.p_xxv.max((lower(&pxx, m, i, &[j, k, ga]) + lower(&pxx, i, m, &[j, k, ga])).abs());
                    }
                }
                for be in 0..p {
                    for k in 0..n {
                        out.r_xtx = out.r_xtx.max((lower(rtx, m, i, &[be, k]) + lower(rtx, i, m, &[be, k])).abs());
                    }
                }
            }
        }
    }
    out
}
