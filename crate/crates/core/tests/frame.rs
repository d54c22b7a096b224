mod common;

use std::f64::consts::FRAC_PI_4;

use common::*;
use jetgeom::connection::{GeometryOptions, PointGeometry};
use jetgeom::frame::{Block, Frame};

fn frame(doc: &str, at: &jetgeom::scenario::JetPoint) -> (PointGeometry, Frame) {
    let geo = PointGeometry::build(&scenario(doc), at, &GeometryOptions::default()).unwrap();
    let f = Frame::build(&geo);
    (geo, f)
}

#[test]
fn block_indexing_round_trips() {
    let d = jetgeom::expr::Dims::new(3, 2);
    for a in 0..d.nvars() {
        assert_eq!(Block::of(d, a).index(d), a);
    }
}

#[test]
fn sphere_scalar_curvature_is_two() {
    for doc in [SPHERE_P1, SPHERE_AUTONOMOUS] {
        let at = point(&[0.2], &[FRAC_PI_4, 0.3], &[&[0.7], &[-0.4]]);
        let (_, f) = frame(doc, &at);
        assert_close(f.scalar(), 2.0, 1e-9);
    }
}

#[test]
fn flat_frame_is_flat() {
    let (_, f) = frame(FLAT, &generic_point(jetgeom::expr::Dims::new(2, 2)));
    let s = f.size();
    for d in 0..s {
        for a in 0..s {
            for c in 0..s {
                assert_eq!(f.gamma(d, a, c), 0.0);
                assert_eq!(f.omega(d, a, c), 0.0);
                for b in 0..s {
                    assert_eq!(f.curvature(d, a, b, c), 0.0);
                }
            }
        }
    }
}

#[test]
fn horizontal_temporal_torsion_is_minus_g() {
    let d = jetgeom::expr::Dims::new(2, 2);
    let (geo, f) = frame(RHEONOMIC, &generic_point(d));
    for m in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                let t = f.torsion(d.x(m), d.t(a), d.x(j));
                assert_close(t, -geo.cartan_g.at(&[m, j, a]).value(), 1e-13);
            }
        }
    }
}

#[test]
fn curvature_is_antisymmetric_in_last_pair() {
    let d = jetgeom::expr::Dims::new(1, 2);
    let (_, f) = frame(GENERAL_P1, &generic_point(d));
    let s = f.size();
    for dd in 0..s {
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    assert_close(f.curvature(dd, a, b, c), -f.curvature(dd, a, c, b), 1e-12);
                }
            }
        }
    }
}
