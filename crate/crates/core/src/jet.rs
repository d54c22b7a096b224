//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `f_m = (∂^m f)(z0) / m!` of a smooth
//! scalar for every monomial `m` of total degree at most its order. Products,
//! quotients and elementary functions are propagated exactly up to that order,
//! and [`Jet::partial`] differentiates a jet at the cost of one order.
//!
//! All jets that take part in one computation share a [`JetSpace`], which owns
//! the monomial enumeration and the precomputed multiplication and
//! differentiation tables.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

/// Highest truncation order supported by the engine.
pub const MAX_ORDER: usize = 5;

/// Monomial tables for `nvars` variables truncated at total degree `order`.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    degree_end: Vec<usize>,
    pairs: Vec<(u32, u32, u32)>,
    pair_end: Vec<usize>,
    deriv: Vec<Vec<(u32, f64)>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("monomials", &self.monomials.len())
            .finish()
    }
}

fn enumerate_degree(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        let used: usize = prefix.iter().map(|&e| e as usize).sum();
        let mut m = prefix.clone();
        m.push((degree - used) as u8);
        out.push(m);
        return;
    }
    let used: usize = prefix.iter().map(|&e| e as usize).sum();
    for e in (0..=degree - used).rev() {
        prefix.push(e as u8);
        enumerate_degree(nvars, degree, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    /// Builds the tables. Prefer [`JetSpace::shared`], which caches spaces.
    pub fn new(nvars: usize, order: usize) -> Self {
        assert!(nvars >= 1, "jet space needs at least one variable");
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut monomials = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            enumerate_degree(nvars, d, &mut Vec::new(), &mut monomials);
            degree_end.push(monomials.len());
        }
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let degree = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();

        let mut pairs = Vec::new();
        let mut pair_end = Vec::with_capacity(order + 1);
        let mut sum = vec![0u8; nvars];
        for d in 0..=order {
            // every output monomial of degree d, split into all (a, b) factors
            let lo = if d == 0 { 0 } else { degree_end[d - 1] };
            for out in lo..degree_end[d] {
                for a in 0..degree_end[d] {
                    let ma = &monomials[a];
                    if ma.iter().zip(&monomials[out]).any(|(x, y)| x > y) {
                        continue;
                    }
                    for (k, s) in sum.iter_mut().enumerate() {
                        *s = monomials[out][k] - ma[k];
                    }
                    let b = index[&sum];
                    pairs.push((a as u32, b as u32, out as u32));
                }
            }
            pair_end.push(pairs.len());
        }

        let mut deriv = Vec::with_capacity(nvars);
        let below = if order == 0 { 0 } else { degree_end[order - 1] };
        for v in 0..nvars {
            let mut table = Vec::with_capacity(below);
            for m in monomials.iter().take(below) {
                let mut up = m.clone();
                up[v] += 1;
                debug_assert!(degree(&up) <= order);
                table.push((index[&up] as u32, (m[v] + 1) as f64));
            }
            deriv.push(table);
        }

        JetSpace {
            nvars,
            order,
            monomials,
            index,
            degree_end,
            pairs,
            pair_end,
            deriv,
        }
    }

    /// Process-wide cache of spaces keyed by `(nvars, order)`.
    pub fn shared(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::new(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials of total degree `<= order`.
    pub fn len_at(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn monomial_index(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }
}

/// A truncated Taylor expansion. An empty coefficient vector is the zero jet.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: u8,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.value())
            .finish()
    }
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>, order: usize) -> Self {
        debug_assert!(order <= space.order);
        Jet {
            space: space.clone(),
            order: order as u8,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(space: &Arc<JetSpace>, order: usize, value: f64) -> Self {
        if value == 0.0 {
            return Self::zero(space, order);
        }
        let mut coeffs = vec![0.0; space.len_at(order)];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            order: order as u8,
            coeffs,
        }
    }

    /// The coordinate function `z_var` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, order: usize, var: usize, value: f64) -> Self {
        assert!(var < space.nvars, "variable {var} out of range");
        let mut coeffs = vec![0.0; space.len_at(order)];
        coeffs[0] = value;
        if order >= 1 {
            let mut e = vec![0u8; space.nvars];
            e[var] = 1;
            coeffs[space.index[&e]] = 1.0;
        }
        Jet {
            space: space.clone(),
            order: order as u8,
            coeffs,
        }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn taylor_coeff(&self, exponents: &[u8]) -> f64 {
        let deg: usize = exponents.iter().map(|&e| e as usize).sum();
        if deg > self.order() || self.coeffs.is_empty() {
            return 0.0;
        }
        self.space
            .monomial_index(exponents)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Partial derivative `∂^m f` at the expansion point (Taylor coefficient times `m!`).
    pub fn derivative(&self, exponents: &[u8]) -> f64 {
        let fact: f64 = exponents
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product();
        self.taylor_coeff(exponents) * fact
    }

    /// First partial `∂f/∂z_var` at the expansion point, without building a jet.
    pub fn gradient(&self, var: usize) -> f64 {
        if self.order == 0 || self.coeffs.is_empty() {
            return 0.0;
        }
        // degree-1 monomials are enumerated in variable order right after the constant
        self.coeffs[1 + var]
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        let mut coeffs = self.coeffs.clone();
        if !coeffs.is_empty() {
            coeffs.truncate(self.space.len_at(order));
        }
        Jet {
            space: self.space.clone(),
            order: order as u8,
            coeffs,
        }
    }

    /// `∂f/∂z_var` as a jet one order lower.
    ///
    /// Panics on an order-0 jet: the caller sized the pipeline too small.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order > 0, "jet order exhausted while differentiating");
        let order = self.order() - 1;
        if self.coeffs.is_empty() {
            return Jet::zero(&self.space, order);
        }
        let n = self.space.len_at(order);
        let table = &self.space.deriv[var];
        let coeffs: Vec<f64> = table[..n]
            .iter()
            .map(|&(src, factor)| self.coeffs[src as usize] * factor)
            .collect();
        Jet {
            space: self.space.clone(),
            order: order as u8,
            coeffs,
        }
        .normalized()
    }

    fn normalized(mut self) -> Jet {
        if self.coeffs.iter().all(|&c| c == 0.0) {
            self.coeffs.clear();
        }
        self
    }

    fn padded(&self, order: usize) -> Vec<f64> {
        let n = self.space.len_at(order);
        if self.coeffs.is_empty() {
            vec![0.0; n]
        } else {
            self.coeffs[..n].to_vec()
        }
    }

    pub fn scale(&self, c: f64) -> Jet {
        if c == 0.0 || self.coeffs.is_empty() {
            return Jet::zero(&self.space, self.order());
        }
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut coeffs = self.padded(self.order());
        coeffs[0] += c;
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs,
        }
        .normalized()
    }

    /// `self += a * b`, truncating to the lowest order involved.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let order = self.order().min(a.order()).min(b.order());
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            if order < self.order() {
                *self = self.truncate(order);
            }
            return;
        }
        let n = self.space.len_at(order);
        if self.coeffs.is_empty() {
            self.coeffs = vec![0.0; n];
        } else {
            self.coeffs.truncate(n);
        }
        self.order = order as u8;
        let (ac, bc, out) = (&a.coeffs, &b.coeffs, &mut self.coeffs);
        for &(i, j, o) in &self.space.pairs[..self.space.pair_end[order]] {
            out[o as usize] += ac[i as usize] * bc[j as usize];
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let mut out = Jet::zero(&self.space, self.order().min(other.order()));
        out.add_product(self, other);
        out
    }

    fn combine(&self, other: &Jet, sign: f64) -> Jet {
        let order = self.order().min(other.order());
        if other.coeffs.is_empty() {
            return self.truncate(order);
        }
        if self.coeffs.is_empty() {
            return other.truncate(order).scale(sign);
        }
        let n = self.space.len_at(order);
        let coeffs: Vec<f64> = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a + sign * b)
            .collect();
        Jet {
            space: self.space.clone(),
            order: order as u8,
            coeffs,
        }
        .normalized()
    }

    /// Composes a univariate function with this jet given its derivatives
    /// `f(a0), f'(a0), ..., f^(k)(a0)` at the base value.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let order = self.order();
        debug_assert!(derivs.len() > order);
        let mut tail = self.clone();
        if !tail.coeffs.is_empty() {
            tail.coeffs[0] = 0.0;
            tail = tail.normalized();
        }
        // Horner in the nilpotent part
        let mut fact = 1.0;
        let mut scaled = Vec::with_capacity(order + 1);
        for (r, d) in derivs.iter().take(order + 1).enumerate() {
            if r > 0 {
                fact *= r as f64;
            }
            scaled.push(d / fact);
        }
        let mut acc = Jet::constant(&self.space, order, scaled[order]);
        for r in (0..order).rev() {
            acc = acc.mul_jet(&tail).add_scalar(scaled[r]);
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let derivs: Vec<f64> = (0..=self.order())
            .map(|r| {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(r) / a.powi(r as i32 + 1)
            })
            .collect();
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.order()).map(|r| cycle[r % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.order()).map(|r| cycle[r % 4]).collect();
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn sinh(&self) -> Jet {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        let derivs: Vec<f64> = (0..=self.order())
            .map(|r| if r % 2 == 0 { s } else { c })
            .collect();
        self.compose(&derivs)
    }

    pub fn cosh(&self) -> Jet {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        let derivs: Vec<f64> = (0..=self.order())
            .map(|r| if r % 2 == 0 { c } else { s })
            .collect();
        self.compose(&derivs)
    }

    pub fn tan(&self) -> Jet {
        &self.sin() / &self.cos()
    }

    /// Natural logarithm; the base value must be positive.
    pub fn ln(&self) -> Jet {
        let a = self.value();
        let derivs: Vec<f64> = (0..=self.order())
            .map(|r| {
                if r == 0 {
                    a.ln()
                } else {
                    let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
                    sign * factorial(r - 1) / a.powi(r as i32)
                }
            })
            .collect();
        self.compose(&derivs)
    }

    /// Real power `a^c`; the base value must be positive.
    pub fn powf(&self, c: f64) -> Jet {
        let a = self.value();
        let mut falling = 1.0;
        let derivs: Vec<f64> = (0..=self.order())
            .map(|r| {
                if r > 0 {
                    falling *= c - (r as f64 - 1.0);
                }
                falling * a.powf(c - r as f64)
            })
            .collect();
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    /// Integer power by repeated squaring; negative exponents go through [`Jet::recip`].
    pub fn powi(&self, k: i64) -> Jet {
        if k < 0 {
            return self.recip().powi(-k);
        }
        let mut result = Jet::constant(&self.space, self.order(), 1.0);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }

    /// Raw Taylor coefficients in the space's monomial order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.padded(self.order())
    }
}

fn factorial(r: usize) -> f64 {
    (1..=r as u64).product::<u64>() as f64
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.combine(b, 1.0));
binop!(Sub, sub, |a, b| a.combine(b, -1.0));
binop!(Mul, mul, |a, b| a.mul_jet(b));
binop!(Div, div, |a, b| a.mul_jet(&b.recip()));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = self.combine(rhs, 1.0);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = self.combine(rhs, -1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, k: usize) -> Arc<JetSpace> {
        JetSpace::shared(n, k)
    }

    #[test]
    fn monomial_counts_are_binomial() {
        // C(n + k, k)
        assert_eq!(JetSpace::new(2, 3).len_at(3), 10);
        assert_eq!(JetSpace::new(5, 5).len_at(5), 252);
        assert_eq!(JetSpace::new(3, 0).len_at(0), 1);
    }

    #[test]
    fn square_of_variable() {
        let s = space(1, 2);
        let x = Jet::variable(&s, 2, 0, 3.0);
        let y = &x * &x;
        assert_eq!(y.derivative(&[0]), 9.0);
        assert_eq!(y.derivative(&[1]), 6.0);
        assert_eq!(y.derivative(&[2]), 2.0);
    }

    #[test]
    fn sine_maclaurin() {
        let s = space(1, 3);
        let t = Jet::variable(&s, 3, 0, 0.0);
        let y = t.sin();
        assert!((y.derivative(&[0])).abs() < 1e-15);
        assert!((y.derivative(&[1]) - 1.0).abs() < 1e-15);
        assert!((y.derivative(&[2])).abs() < 1e-15);
        assert!((y.derivative(&[3]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_lowers_order_and_matches_derivative() {
        let s = space(2, 4);
        let x = Jet::variable(&s, 4, 0, 0.7);
        let y = Jet::variable(&s, 4, 1, -0.3);
        let f = (&x * &y).exp() + x.powi(3);
        let fx = f.partial(0);
        assert_eq!(fx.order(), 3);
        for e in [[0u8, 0], [1, 0], [0, 1], [1, 1], [2, 1], [0, 3]] {
            let mut up = e;
            up[0] += 1;
            assert!((fx.derivative(&e) - f.derivative(&up)).abs() < 1e-12);
        }
        assert_eq!(f.gradient(0), f.derivative(&[1, 0]));
        assert_eq!(f.gradient(1), f.derivative(&[0, 1]));
    }

    #[test]
    fn reciprocal_times_self_is_one() {
        let s = space(3, 5);
        let a = Jet::variable(&s, 5, 0, 1.3) + Jet::variable(&s, 5, 1, 0.2).sin()
            + Jet::variable(&s, 5, 2, 0.4).powi(2);
        let one = &a * &a.recip();
        for (i, c) in one.coefficients().iter().enumerate() {
            let expect = if i == 0 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-12, "coeff {i} = {c}");
        }
    }

    #[test]
    fn zero_jet_fast_paths() {
        let s = space(2, 2);
        let z = Jet::zero(&s, 2);
        let x = Jet::variable(&s, 2, 0, 2.0);
        assert!((&z * &x).is_zero());
        assert_eq!((&z + &x).derivative(&[1, 0]), 1.0);
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn mixed_order_operands_truncate() {
        let s = space(1, 3);
        let x = Jet::variable(&s, 3, 0, 1.0);
        let y = Jet::variable(&s, 1, 0, 1.0);
        assert_eq!((&x * &y).order(), 1);
        assert_eq!((&x + &y).order(), 1);
    }
}
