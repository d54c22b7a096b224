//! The Cartan connection in the full adapted frame `X_A = (δ/δt^α, δ/δx^i, ∂/∂x^i_α)`.
//!
//! Frame indices coincide with jet variable indices: `α`, `p + i`, `p + n + i·p + α`.
//! Conventions: `D_{X_C} X_A = Γ^D_{AC} X_D`, `[X_C, X_B] = Ω^E_{CB} X_E`,
//! `T(X_C, X_B) = T^D_{BC} X_D`, `R(X_C, X_B) X_A = R^D_{ABC} X_D`, `R_{AB} = R^D_{ABD}`.
//!
//! Everything here is a plain value. Derivatives of connection coefficients come
//! from the first-order jet coefficients, so this path shares no formulas with
//! the closed forms in [`crate::curvature`].

use crate::connection::{Direction, PointGeometry};
use crate::expr::Dims;
use crate::jet::Jet;

/// Which part of the adapted frame an index belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Temporal(usize),
    Spatial(usize),
    Vertical { i: usize, alpha: usize },
}

impl Block {
    pub fn of(dims: Dims, a: usize) -> Block {
        let (p, n) = (dims.p, dims.n);
        if a < p {
            Block::Temporal(a)
        } else if a < p + n {
            Block::Spatial(a - p)
        } else {
            let r = a - p - n;
            Block::Vertical { i: r / p, alpha: r % p }
        }
    }

    pub fn index(self, dims: Dims) -> usize {
        match self {
            Block::Temporal(a) => dims.t(a),
            Block::Spatial(i) => dims.x(i),
            Block::Vertical { i, alpha } => dims.v(i, alpha),
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Block::Temporal(a) => Direction::T(a),
            Block::Spatial(i) => Direction::X(i),
            Block::Vertical { i, alpha } => Direction::V { i, alpha },
        }
    }

    pub fn is_horizontal(self) -> bool {
        !matches!(self, Block::Vertical { .. })
    }
}

/// Value and frame derivatives `X_E f` of one coefficient.
#[derive(Clone, Debug)]
struct Coeff {
    value: f64,
    grad: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Frame {
    dims: Dims,
    size: usize,
    /// `Γ^D_{AC}` at `[D][A][C]`
    gamma: Vec<f64>,
    /// `X_E Γ^D_{AC}` at `[D][A][C][E]`
    dgamma: Vec<f64>,
    /// `Ω^D_{CB}` at `[D][C][B]`
    omega: Vec<f64>,
    metric: Vec<f64>,
    metric_inv: Vec<f64>,
}

impl Frame {
    pub fn build(geo: &PointGeometry) -> Frame {
        let dims = geo.dims;
        let (p, n) = (dims.p, dims.n);
        let size = dims.nvars();
        let blocks: Vec<Block> = (0..size).map(|a| Block::of(dims, a)).collect();
        let coeff = |j: &Jet| Coeff {
            value: j.value(),
            grad: blocks.iter().map(|b| geo.delta_value(j, b.direction())).collect(),
        };
        let none = Coeff { value: 0.0, grad: vec![0.0; size] };

        // Γ̄^β_{αC} and Γ^l_{jC}
        let mut hbar = vec![none.clone(); p * p * size];
        let mut spat = vec![none.clone(); n * n * size];
        for (c, &bc) in blocks.iter().enumerate() {
            for b in 0..p {
                for a in 0..p {
                    if let Block::Temporal(g) = bc {
                        hbar[(b * p + a) * size + c] = coeff(geo.temporal_christoffel.at(&[b, a, g]));
                    }
                }
            }
            for l in 0..n {
                for j in 0..n {
                    let jet = match bc {
                        Block::Temporal(g) => geo.cartan_g.at(&[l, j, g]),
                        Block::Spatial(k) => geo.cartan_l.at(&[l, j, k]),
                        Block::Vertical { i: k, alpha: g } => geo.cartan_c.at(&[l, j, k, g]),
                    };
                    spat[(l * n + j) * size + c] = coeff(jet);
                }
            }
        }

        let mut gamma = vec![0.0; size * size * size];
        let mut dgamma = vec![0.0; size * size * size * size];
        for d in 0..size {
            for a in 0..size {
                for c in 0..size {
                    let mut terms: Vec<(f64, &Coeff)> = Vec::new();
                    match (blocks[d], blocks[a]) {
                        (Block::Temporal(b), Block::Temporal(al)) => terms.push((1.0, &hbar[(b * p + al) * size + c])),
                        (Block::Spatial(l), Block::Spatial(j)) => terms.push((1.0, &spat[(l * n + j) * size + c])),
                        (Block::Vertical { i: l, alpha: eta }, Block::Vertical { i: j, alpha: beta }) => {
                            if eta == beta {
                                terms.push((1.0, &spat[(l * n + j) * size + c]));
                            }
                            if l == j {
                                terms.push((-1.0, &hbar[(beta * p + eta) * size + c]));
                            }
                        }
                        _ => {}
                    }
                    let at = (d * size + a) * size + c;
                    for (s, cf) in terms {
                        gamma[at] += s * cf.value;
                        for e in 0..size {
                            dgamma[at * size + e] += s * cf.grad[e];
                        }
                    }
                }
            }
        }

        // N_C with the temporal part M
        let nonlinear = |j: usize, b: usize, c: Block| -> &Jet {
            match c {
                Block::Temporal(g) => geo.m.at(&[j, b, g]),
                Block::Spatial(k) => geo.n.at(&[j, b, k]),
                Block::Vertical { .. } => unreachable!(),
            }
        };
        let mut omega = vec![0.0; size * size * size];
        for j in 0..n {
            for b in 0..p {
                let d = dims.v(j, b);
                for c in 0..size {
                    for bb in 0..size {
                        let val = match (blocks[c], blocks[bb]) {
                            (hc, hb) if hc.is_horizontal() && hb.is_horizontal() => {
                                -(geo.delta_value(nonlinear(j, b, hb), hc.direction())
                                    - geo.delta_value(nonlinear(j, b, hc), hb.direction()))
                            }
                            (hc, Block::Vertical { .. }) if hc.is_horizontal() => nonlinear(j, b, hc).gradient(bb),
                            (Block::Vertical { .. }, hb) if hb.is_horizontal() => -nonlinear(j, b, hb).gradient(c),
                            _ => 0.0,
                        };
                        omega[(d * size + c) * size + bb] = val;
                    }
                }
            }
        }

        let mut metric = vec![0.0; size * size];
        let mut metric_inv = vec![0.0; size * size];
        for a in 0..size {
            for b in 0..size {
                let (lo, hi) = match (blocks[a], blocks[b]) {
                    (Block::Temporal(x), Block::Temporal(y)) => (geo.h.at(&[x, y]).value(), geo.h_inv.at(&[x, y]).value()),
                    (Block::Spatial(x), Block::Spatial(y)) => (geo.g.at(&[x, y]).value(), geo.g_inv.at(&[x, y]).value()),
                    (Block::Vertical { i, alpha }, Block::Vertical { i: j, alpha: beta }) => (
                        geo.h_inv.at(&[alpha, beta]).value() * geo.g.at(&[i, j]).value(),
                        geo.h.at(&[alpha, beta]).value() * geo.g_inv.at(&[i, j]).value(),
                    ),
                    _ => (0.0, 0.0),
                };
                metric[a * size + b] = lo;
                metric_inv[a * size + b] = hi;
            }
        }

        Frame { dims, size, gamma, dgamma, omega, metric, metric_inv }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn block(&self, a: usize) -> Block {
        Block::of(self.dims, a)
    }

    /// `Γ^D_{AC}`
    pub fn gamma(&self, d: usize, a: usize, c: usize) -> f64 {
        self.gamma[(d * self.size + a) * self.size + c]
    }

    fn dgamma(&self, d: usize, a: usize, c: usize, e: usize) -> f64 {
        self.dgamma[((d * self.size + a) * self.size + c) * self.size + e]
    }

    /// `Ω^D_{CB}` with `[X_C, X_B] = Ω^D_{CB} X_D`
    pub fn omega(&self, d: usize, c: usize, b: usize) -> f64 {
        self.omega[(d * self.size + c) * self.size + b]
    }

    /// `T^D_{BC}`, the `X_D` component of `T(X_C, X_B)`.
    pub fn torsion(&self, d: usize, b: usize, c: usize) -> f64 {
        self.gamma(d, b, c) - self.gamma(d, c, b) - self.omega(d, c, b)
    }

    /// `R^D_{ABC}`, the `X_D` component of `R(X_C, X_B) X_A`.
    pub fn curvature(&self, d: usize, a: usize, b: usize, c: usize) -> f64 {
        let mut r = self.dgamma(d, a, b, c) - self.dgamma(d, a, c, b);
        for e in 0..self.size {
            r += self.gamma(e, a, b) * self.gamma(d, e, c) - self.gamma(e, a, c) * self.gamma(d, e, b)
                - self.omega(e, c, b) * self.gamma(d, a, e);
        }
        r
    }

    /// `R_{AB} = R^D_{ABD}`
    pub fn ricci(&self, a: usize, b: usize) -> f64 {
        (0..self.size).map(|d| self.curvature(d, a, b, d)).sum()
    }

    pub fn ricci_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.size).map(|a| (0..self.size).map(|b| self.ricci(a, b)).collect()).collect()
    }

    /// `G_{AB}`: `h_{αβ}`, `g_{ij}`, `h^{αβ} g_{ij}`.
    pub fn metric(&self, a: usize, b: usize) -> f64 {
        self.metric[a * self.size + b]
    }

    /// `G^{AB}`: `h^{αβ}`, `g^{ij}`, `h_{αβ} g^{ij}`.
    pub fn metric_inverse(&self, a: usize, b: usize) -> f64 {
        self.metric_inv[a * self.size + b]
    }

    /// `Sc = G^{AB} R_{AB}` for a precomputed Ricci matrix.
    pub fn scalar_of(&self, ricci: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.size {
            for b in 0..self.size {
                let gi = self.metric_inverse(a, b);
                if gi != 0.0 {
                    s += gi * ricci[a][b];
                }
            }
        }
        s
    }

    pub fn scalar(&self) -> f64 {
        self.scalar_of(&self.ricci_matrix())
    }
}
