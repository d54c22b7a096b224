//! Per-point geometry reports and the grouped verification suite.

use rayon::prelude::*;
use serde::Serialize;

use crate::connection::{GeometryError, GeometryOptions, JetTable, PointGeometry};
use crate::curvature::{
    antisymmetry_residuals, autonomous_torsion, bianchi_residuals, curvature, structural_zero_audit, torsion, CurvatureTensors,
    FamilySet, TorsionTensors,
};
use crate::fieldtheory::{einstein, ricci_zero_blocks, FieldTheory};
use crate::frame::Frame;
use crate::scenario::{FamilyKind, JetPoint, Scenario};
use crate::table::ComponentTable;

/// What `geometry` reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum What {
    Connection,
    Torsion,
    Curvature,
    Maxwell,
    Einstein,
    Conserve,
}

impl What {
    pub const ALL: [What; 6] = [What::Connection, What::Torsion, What::Curvature, What::Maxwell, What::Einstein, What::Conserve];
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    /// One-based index.
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub key: String,
    pub label: String,
    pub components: Vec<Component>,
}

impl TableReport {
    fn new(key: &str, label: &str, t: &ComponentTable<f64>) -> Self {
        TableReport {
            key: key.into(),
            label: label.into(),
            components: t.indices().map(|ix| Component { value: *t.at(&ix), index: ix.iter().map(|i| i + 1).collect() }).collect(),
        }
    }

    fn jet(key: &str, label: &str, t: &JetTable) -> Self {
        Self::new(key, label, &t.values())
    }

    fn matrix(key: &str, label: &str, m: &[Vec<f64>]) -> Self {
        let components = m
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().enumerate().map(move |(b, &value)| Component { index: vec![a + 1, b + 1], value }))
            .collect();
        TableReport { key: key.into(), label: label.into(), components }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
}

/// Identity classes of the verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Metricity,
    Symmetry,
    DualPath,
    StructuralZeros,
    AutonomousReduction,
    Antisymmetry,
    Bianchi,
    VerticalFormVanishes,
    Maxwell,
    DeflectionIdentities,
    EinsteinZeros,
    Vacuum,
    Conservation,
}

impl Class {
    pub fn label(self) -> &'static str {
        match self {
            Class::Metricity => "metricity",
            Class::Symmetry => "symmetry",
            Class::DualPath => "dual-path agreement",
            Class::StructuralZeros => "structural zeros",
            Class::AutonomousReduction => "autonomous reduction",
            Class::Antisymmetry => "antisymmetry",
            Class::Bianchi => "Bianchi identities",
            Class::VerticalFormVanishes => "vertical electromagnetic form f = 0",
            Class::Maxwell => "Maxwell equations",
            Class::DeflectionIdentities => "deflection identities",
            Class::EinsteinZeros => "Einstein zero blocks",
            Class::Vacuum => "vacuum Einstein equations",
            Class::Conservation => "conservation laws",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub class: Class,
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub point: JetPoint,
    pub tables: Vec<TableReport>,
    pub scalars: Vec<Scalar>,
    pub residuals: Vec<Residual>,
    pub pass: bool,
}

/// Everything computed at one point.
pub struct Analysis {
    pub geo: PointGeometry,
    pub frame: Frame,
    pub torsion: TorsionTensors,
    pub curvature: CurvatureTensors,
    pub field: FieldTheory,
}

impl Analysis {
    pub fn new(s: &Scenario, at: &JetPoint, opts: &GeometryOptions) -> Result<Self, GeometryError> {
        let geo = PointGeometry::build(s, at, opts)?;
        let frame = Frame::build(&geo);
        let tors = torsion(&geo);
        let curv = curvature(&geo, &tors);
        let field = FieldTheory::compute(&geo, &tors, &curv);
        Ok(Analysis { geo, frame, torsion: tors, curvature: curv, field })
    }
}

struct Builder {
    tol: f64,
    tables: Vec<TableReport>,
    scalars: Vec<Scalar>,
    residuals: Vec<Residual>,
}

impl Builder {
    fn residual(&mut self, class: Class, name: impl Into<String>, value: f64) {
        let value = value.abs();
        self.residuals.push(Residual { class, name: name.into(), value, pass: value < self.tol });
    }

    fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.push(Scalar { name: name.into(), value });
    }

    fn families(&mut self, set: &FamilySet) {
        for f in set.iter() {
            self.tables.push(TableReport::jet(f.key, f.label, &f.table));
        }
    }

    fn dual(&mut self, set: &FamilySet, frame: &Frame) {
        for (key, diff) in set.frame_discrepancies(frame) {
            self.residual(Class::DualPath, format!("{key} closed form vs frame"), diff);
        }
    }
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn jet_diff(a: &JetTable, b: &JetTable) -> f64 {
    a.values().max_diff(&b.values())
}

fn connection_section(b: &mut Builder, a: &Analysis) {
    let geo = &a.geo;
    let push = |b: &mut Builder, key: &str, label: &str, t: &JetTable| b.tables.push(TableReport::jet(key, label, t));
    push(b, "h", "temporal metric h_{αβ}", &geo.h);
    push(b, "g", "spatial metric g_{ij}", &geo.g);
    push(b, "G", "vertical metric G^{(α)(β)}_{(i)(j)}", &geo.vertical_metric);
    push(b, "H", "temporal Christoffel symbols H^γ_{αβ}", &geo.temporal_christoffel);
    push(b, "Gamma", "spatial Christoffel symbols Γ^i_{jk}", &geo.spatial_christoffel);
    if let Some(sp) = &geo.semispray {
        push(b, "semispray", "canonical spray 𝒢^i", sp);
    }
    push(b, "M", "temporal nonlinear connection M^{(i)}_{(α)β}", &geo.m);
    push(b, "N", "spatial nonlinear connection N^{(i)}_{(α)j}", &geo.n);
    push(b, "G_cartan", "Cartan coefficients G^k_{jγ}", &geo.cartan_g);
    push(b, "L_cartan", "Cartan coefficients L^i_{jk}", &geo.cartan_l);
    push(b, "C_cartan", "Cartan coefficients C^{i(γ)}_{j(k)}", &geo.cartan_c);
    b.scalar("h condition", geo.h_condition);
    b.scalar("g condition", geo.g_condition);

    for (name, t) in geo.metricity() {
        b.residual(Class::Metricity, name, t.max_abs());
    }
    let vm = geo.vertical_metric.values();
    let swap = max_abs(vm.indices().map(|ix| vm.at(&ix) - vm.at(&[ix[1], ix[0], ix[3], ix[2]])));
    b.residual(Class::Symmetry, "g_ij = g_ji", geo.g.values().symmetry_deviation(0, 1));
    b.residual(Class::Symmetry, "h_ab = h_ba", geo.h.values().symmetry_deviation(0, 1));
    b.residual(Class::Symmetry, "G under (α,i)↔(β,j)", swap);
    b.residual(Class::Symmetry, "Γ^i_jk = Γ^i_kj", geo.spatial_christoffel.values().symmetry_deviation(1, 2));
    b.residual(Class::Symmetry, "H^γ_ab = H^γ_ba", geo.temporal_christoffel.values().symmetry_deviation(1, 2));
    b.residual(Class::Symmetry, "L^i_jk = L^i_kj", geo.cartan_l.values().symmetry_deviation(1, 2));
    b.residual(Class::Symmetry, "C^i_j(k) = C^i_k(j)", geo.cartan_c.values().symmetry_deviation(1, 2));
    if geo.dims.p == 1 {
        if let Some(closed) = geo.electrodynamics_nonlinear_connection() {
            b.residual(Class::DualPath, "N from the spray vs electrodynamics closed form", jet_diff(&geo.n, &closed));
        }
    }
}

fn torsion_section(b: &mut Builder, a: &Analysis, audit: &[crate::curvature::ZeroCell]) {
    b.families(&a.torsion);
    b.dual(&a.torsion, &a.frame);
    b.residual(Class::StructuralZeros, "torsion zero cells", max_abs(audit.iter().filter(|c| c.tensor == "torsion").map(|c| c.max_abs)));
    if a.geo.kind == FamilyKind::Autonomous && a.geo.dims.p >= 2 {
        for f in autonomous_torsion(&a.geo).iter() {
            b.residual(Class::AutonomousReduction, format!("{} reduced form", f.key), jet_diff(&f.table, a.torsion.expect(f.key)));
        }
    }
}

fn curvature_section(b: &mut Builder, a: &Analysis, audit: &[crate::curvature::ZeroCell]) {
    let curv = &a.curvature;
    b.families(curv);
    b.dual(curv, &a.frame);
    if let (Some(rv), Some(hc), Some(rtt)) = (curv.get("Rv_tt"), curv.get("H_tttt"), curv.get("R_xtt")) {
        // the frame transports the temporal index of a vertical vector with the opposite sign
        let worst = max_abs(rv.indices().map(|ix| {
            let (l, al, eta, i, be, ga) = (ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]);
            let base = if al == eta { rtt.at(&[l, i, be, ga]).value() } else { 0.0 };
            let h = if l == i { hc.at(&[al, eta, be, ga]).value() } else { 0.0 };
            let composed = (rv.at(&ix).value() - base - h).abs();
            composed.max((crate::curvature::vertical_block_from_frame(&a.frame, &ix) - (base - h)).abs())
        }));
        b.residual(Class::DualPath, "Rv_tt vertical block vs frame", worst);
    }
    b.residual(Class::StructuralZeros, "curvature zero cells", max_abs(audit.iter().filter(|c| c.tensor == "curvature").map(|c| c.max_abs)));
    let bi = bianchi_residuals(&a.geo, &a.torsion, curv);
    b.residual(Class::Bianchi, "b1", bi.b1);
    b.residual(Class::Bianchi, "b2", bi.b2);
    b.residual(Class::Bianchi, "b3", bi.b3);
    let an = antisymmetry_residuals(&a.geo, &a.torsion, curv);
    b.residual(Class::Antisymmetry, "R_mijk + R_imjk", an.r_xxx);
    b.residual(Class::Antisymmetry, "R_mibk + R_imbk", an.r_xtx);
    b.residual(Class::Antisymmetry, "P_mij(k) + P_imj(k)", an.p_xxv);
    if a.geo.kind == FamilyKind::Autonomous && a.geo.dims.p >= 2 {
        let r = jet_diff(curv.expect("R_xxx"), curv.expect("r_xxx"));
        let rest = curv.expect("R_xtt").values().max_abs().max(curv.expect("R_xtx").values().max_abs());
        b.residual(Class::AutonomousReduction, "R^l_ijk = r^l_ijk", r);
        b.residual(Class::AutonomousReduction, "mixed h-curvatures vanish", rest);
    }
}

fn maxwell_section(b: &mut Builder, a: &Analysis) {
    let f = &a.field;
    let d = &f.deflections;
    let push = |b: &mut Builder, key: &str, label: &str, t: &JetTable| b.tables.push(TableReport::jet(key, label, t));
    push(b, "Dbar", "temporal deflection D̄^{(α)}_{(i)β}", &d.bar);
    push(b, "D", "spatial deflection D^{(α)}_{(i)j}", &d.d);
    push(b, "d", "vertical deflection d^{(α)(β)}_{(i)(j)}", &d.dd);
    push(b, "F", "electromagnetic field F^{(α)}_{(i)j}", &f.em.f);
    push(b, "f", "vertical electromagnetic field f^{(α)(β)}_{(i)(j)}", &f.em.f_vertical);
    b.residual(Class::DualPath, "D̄ generic vs closed form", jet_diff(&d.bar, &d.closed_bar));
    b.residual(Class::DualPath, "D generic vs closed form", jet_diff(&d.d, &d.closed_d));
    b.residual(Class::DualPath, "d generic vs closed form", jet_diff(&d.dd, &d.closed_dd));
    b.residual(Class::DualPath, "F antisymmetrized vs closed form", f.em.discrepancy());
    b.residual(Class::Antisymmetry, "F_(i)j + F_(j)i", f.em.antisymmetry());
    b.residual(Class::VerticalFormVanishes, "max |f|", f.em.f_vertical.values().max_abs());
    b.residual(Class::Maxwell, "first", f.maxwell.first);
    b.residual(Class::Maxwell, "second", f.maxwell.second);
    b.residual(Class::Maxwell, "third", f.maxwell.third);
    if let Some(r) = f.maxwell.autonomous {
        b.residual(Class::Maxwell, "first, autonomous form", r);
    }
    b.residual(Class::DeflectionIdentities, "d'1", f.deflection_identities.d1);
    b.residual(Class::DeflectionIdentities, "d'2", f.deflection_identities.d2);
    b.residual(Class::DeflectionIdentities, "d'3", f.deflection_identities.d3);
}

fn einstein_section(b: &mut Builder, a: &Analysis, k: f64) {
    let ric = &a.field.ricci;
    b.families(&ric.families);
    b.dual(&ric.families, &a.frame);
    if let Some(h) = &ric.h {
        b.scalar("H", h.value());
    }
    b.scalar("R", ric.r.value());
    if let Some(s) = &ric.s {
        b.scalar("S", s.value());
    }
    b.scalar("Sc", ric.scalar.value());
    b.scalar("Sc (frame)", a.frame.scalar());
    b.residual(Class::DualPath, "Sc closed form vs frame", ric.scalar.value() - a.frame.scalar());
    for (name, v) in ricci_zero_blocks(&a.frame) {
        b.residual(Class::StructuralZeros, format!("Ricci {name}"), v);
    }
    let e = einstein(&a.geo, &a.frame, ric, k);
    b.tables.push(TableReport::matrix("G_inv", "block metric G^{AB}", &e.metric_inverse));
    b.tables.push(TableReport::matrix("E", "Einstein tensor E_{AB}", &e.blocks));
    if let Some(t) = &e.stress_energy {
        b.tables.push(TableReport::matrix("T", "stress-energy 𝒯_{AB} = E/𝒦", t));
    }
    if let Some(r) = &e.reduced {
        b.tables.push(TableReport::matrix("T_tilde_t", "reduced temporal Einstein block", &r.temporal));
        b.tables.push(TableReport::matrix("T_tilde_x", "reduced spatial Einstein block", &r.spatial));
    }
    b.residual(Class::DualPath, "Einstein blocks vs Ricci closed forms", e.closed_discrepancy);
    for (name, v) in &e.zero_blocks {
        b.residual(Class::EinsteinZeros, name.clone(), *v);
    }
    if let Some(v) = e.vacuum_residual {
        b.residual(Class::Vacuum, "max |E|", v);
    }
}

fn conserve_section(b: &mut Builder, a: &Analysis) {
    let c = &a.field.conservation;
    let ric = &a.field.ricci;
    b.scalar("Sc", ric.scalar.value());
    for (i, v) in c.laws.iter().enumerate() {
        b.residual(Class::Conservation, format!("law {}", i + 1), *v);
    }
    if let Some(auto) = &c.autonomous {
        for (i, v) in auto.iter().enumerate() {
            b.residual(Class::Conservation, format!("autonomous law {}", i + 1), *v);
        }
    }
}

/// Builds the report for the requested sections at one point.
pub fn point_report(s: &Scenario, at: &JetPoint, whats: &[What], tol: f64, opts: &GeometryOptions) -> Result<GeometryReport, GeometryError> {
    let a = Analysis::new(s, at, opts)?;
    let mut b = Builder { tol, tables: Vec::new(), scalars: Vec::new(), residuals: Vec::new() };
    let audit = structural_zero_audit(&a.frame);
    for w in whats {
        match w {
            What::Connection => connection_section(&mut b, &a),
            What::Torsion => torsion_section(&mut b, &a, &audit),
            What::Curvature => curvature_section(&mut b, &a, &audit),
            What::Maxwell => maxwell_section(&mut b, &a),
            What::Einstein => einstein_section(&mut b, &a, s.einstein_k),
            What::Conserve => conserve_section(&mut b, &a),
        }
    }
    let pass = b.residuals.iter().all(|r| r.pass);
    Ok(GeometryReport { point: at.clone(), tables: b.tables, scalars: b.scalars, residuals: b.residuals, pass })
}

/// Reports for every point, in input order.
pub fn geometry_reports(s: &Scenario, pts: &[JetPoint], whats: &[What], tol: f64, opts: &GeometryOptions) -> Result<Vec<GeometryReport>, GeometryError> {
    pts.par_iter().map(|at| point_report(s, at, whats, tol, opts)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteLine {
    pub class: Class,
    pub label: &'static str,
    pub max_residual: f64,
    /// The residual name and one-based point index where the maximum occurred.
    pub worst: Option<(String, usize)>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub family: FamilyKind,
    pub points: usize,
    pub tol: f64,
    pub lines: Vec<SuiteLine>,
    pub pass: bool,
}

/// Runs every section at every point and groups the residuals by identity class.
pub fn verify(s: &Scenario, pts: &[JetPoint], tol: f64, opts: &GeometryOptions) -> Result<SuiteReport, GeometryError> {
    let reports = geometry_reports(s, pts, &What::ALL, tol, opts)?;
    let mut lines: Vec<SuiteLine> = Vec::new();
    for (pi, r) in reports.iter().enumerate() {
        for res in &r.residuals {
            let line = match lines.iter_mut().find(|l| l.class == res.class) {
                Some(l) => l,
                None => {
                    lines.push(SuiteLine { class: res.class, label: res.class.label(), max_residual: 0.0, worst: None, pass: true });
                    lines.last_mut().expect("just pushed")
                }
            };
            let worse = res.value > line.max_residual || (res.value.is_nan() && !line.max_residual.is_nan());
            if line.worst.is_none() || worse {
                line.max_residual = res.value;
                line.worst = Some((res.name.clone(), pi + 1));
            }
            line.pass &= res.pass;
        }
    }
    lines.sort_by_key(|l| l.class);
    let pass = !lines.is_empty() && lines.iter().all(|l| l.pass);
    Ok(SuiteReport { family: s.kind(), points: pts.len(), tol, lines, pass })
}
