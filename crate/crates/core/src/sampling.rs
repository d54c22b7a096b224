//! Seeded sampling of well-conditioned jet points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lagrangian::vertical_metric;
use crate::linalg::invert;
use crate::scenario::{JetPoint, Scenario};

/// Points whose metrics have a larger condition estimate are redrawn.
pub const MAX_SAMPLE_CONDITION: f64 = 1e8;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox { lo: -1.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SampleError {
    #[error("empty sampling box [{lo}, {hi}]")]
    EmptyBox { lo: f64, hi: f64 },
    #[error("no well-conditioned point found after {0} draws")]
    Exhausted(usize),
}

/// Condition estimate of the worse of `h` and `g`, or `None` where either is singular.
pub fn point_condition(s: &Scenario, at: &JetPoint) -> Option<f64> {
    let vm = vertical_metric(s, at).ok()?;
    let h: Vec<Vec<f64>> = vm.h_inv.clone();
    let (_, ch) = invert(&h).ok()?;
    let (_, cg) = invert(&vm.g).ok()?;
    Some(ch.max(cg))
}

/// Draws `count` points uniformly from the box, skipping ill-conditioned ones.
pub fn sample_points(s: &Scenario, count: usize, seed: u64, bx: SampleBox) -> Result<Vec<JetPoint>, SampleError> {
    if bx.lo.partial_cmp(&bx.hi) != Some(std::cmp::Ordering::Less) {
        return Err(SampleError::EmptyBox { lo: bx.lo, hi: bx.hi });
    }
    let d = s.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == MAX_ATTEMPTS {
            return Err(SampleError::Exhausted(attempts));
        }
        attempts += 1;
        let mut draw = || rng.gen_range(bx.lo..bx.hi);
        let t = (0..d.p).map(|_| draw()).collect();
        let x = (0..d.n).map(|_| draw()).collect();
        let v = (0..d.n).map(|_| (0..d.p).map(|_| draw()).collect()).collect();
        let at = JetPoint::new(t, x, v);
        if point_condition(s, &at).is_some_and(|c| c <= MAX_SAMPLE_CONDITION) {
            out.push(at);
        }
    }
    Ok(out)
}
