//! Dense multi-index component storage tagged with an index signature.

use serde::Serialize;
use thiserror::Error;

use crate::expr::Dims;
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Temporal,
    Spatial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Upper,
    Lower,
}

/// One index slot of a d-tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Slot {
    pub kind: SlotKind,
    pub variance: Variance,
}

impl Slot {
    pub const T_UP: Slot = Slot { kind: SlotKind::Temporal, variance: Variance::Upper };
    pub const T_LO: Slot = Slot { kind: SlotKind::Temporal, variance: Variance::Lower };
    pub const S_UP: Slot = Slot { kind: SlotKind::Spatial, variance: Variance::Upper };
    pub const S_LO: Slot = Slot { kind: SlotKind::Spatial, variance: Variance::Lower };

    pub fn extent(&self, dims: Dims) -> usize {
        match self.kind {
            SlotKind::Temporal => dims.p,
            SlotKind::Spatial => dims.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("table `{name}`: index {index:?} does not match extents {extents:?}")]
    OutOfRange {
        name: String,
        index: Vec<usize>,
        extents: Vec<usize>,
    },
    #[error("table `{name}` is not symmetric in slots {a} and {b} (deviation {deviation:e})")]
    Asymmetric {
        name: String,
        a: usize,
        b: usize,
        deviation: f64,
    },
}

/// A d-tensor family at one point. `T` is `f64` for values or [`Jet`] for
/// fields that can still be differentiated.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentTable<T = f64> {
    name: String,
    signature: Vec<Slot>,
    extents: Vec<usize>,
    data: Vec<T>,
}

/// Row-major iteration over every multi-index of the given extents.
pub fn multi_indices(extents: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = extents.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; extents.len()];
        for (slot, &e) in extents.iter().enumerate().rev() {
            idx[slot] = flat % e;
            flat /= e;
        }
        idx
    })
}

impl<T: Clone> ComponentTable<T> {
    pub fn from_fn(name: &str, signature: &[Slot], dims: Dims, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let extents: Vec<usize> = signature.iter().map(|s| s.extent(dims)).collect();
        let data = multi_indices(&extents).map(|idx| f(&idx)).collect();
        ComponentTable {
            name: name.to_string(),
            signature: signature.to_vec(),
            extents,
            data,
        }
    }

    pub fn filled(name: &str, signature: &[Slot], dims: Dims, value: T) -> Self {
        Self::from_fn(name, signature, dims, |_| value.clone())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn signature(&self) -> &[Slot] {
        &self.signature
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn offset(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.extents.len() {
            return None;
        }
        let mut flat = 0;
        for (&i, &e) in index.iter().zip(&self.extents) {
            if i >= e {
                return None;
            }
            flat = flat * e + i;
        }
        Some(flat)
    }

    fn range_error(&self, index: &[usize]) -> TableError {
        TableError::OutOfRange {
            name: self.name.clone(),
            index: index.to_vec(),
            extents: self.extents.clone(),
        }
    }

    pub fn get(&self, index: &[usize]) -> Result<&T, TableError> {
        self.offset(index)
            .map(|k| &self.data[k])
            .ok_or_else(|| self.range_error(index))
    }

    pub fn set(&mut self, index: &[usize], value: T) -> Result<(), TableError> {
        let k = self.offset(index).ok_or_else(|| self.range_error(index))?;
        self.data[k] = value;
        Ok(())
    }

    /// Unchecked access for internal loops; panics on a bad index.
    pub fn at(&self, index: &[usize]) -> &T {
        match self.offset(index) {
            Some(k) => &self.data[k],
            None => panic!("{}", self.range_error(index)),
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        multi_indices(&self.extents)
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> ComponentTable<U> {
        ComponentTable {
            name: self.name.clone(),
            signature: self.signature.clone(),
            extents: self.extents.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl ComponentTable<f64> {
    pub fn zeros(name: &str, signature: &[Slot], dims: Dims) -> Self {
        Self::filled(name, signature, dims, 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// Max-abs entrywise difference; tables must have equal extents.
    pub fn max_diff(&self, other: &ComponentTable<f64>) -> f64 {
        assert_eq!(self.extents, other.extents, "comparing `{}` with `{}`", self.name, other.name);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Largest deviation from symmetry under exchange of slots `a` and `b`.
    pub fn symmetry_deviation(&self, a: usize, b: usize) -> f64 {
        self.indices()
            .map(|idx| {
                let mut swapped = idx.clone();
                swapped.swap(a, b);
                (self.at(&idx) - self.at(&swapped)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_symmetric(&self, a: usize, b: usize, tol: f64) -> Result<(), TableError> {
        let deviation = self.symmetry_deviation(a, b);
        if deviation > tol {
            return Err(TableError::Asymmetric {
                name: self.name.clone(),
                a,
                b,
                deviation,
            });
        }
        Ok(())
    }
}

impl ComponentTable<Jet> {
    /// Values at the expansion point.
    pub fn values(&self) -> ComponentTable<f64> {
        self.map(Jet::value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn christoffel_sig() -> [Slot; 3] {
        [Slot::S_UP, Slot::S_LO, Slot::S_LO]
    }

    #[test]
    fn zero_initialized() {
        let t = ComponentTable::zeros("L", &christoffel_sig(), Dims::new(2, 3));
        assert_eq!(t.extents(), &[3, 3, 3]);
        assert_eq!(t.data().len(), 27);
        assert!(t.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn set_then_get_round_trips() {
        let mut t = ComponentTable::zeros("H", &[Slot::T_UP, Slot::T_LO, Slot::T_LO], Dims::new(2, 1));
        t.set(&[1, 0, 1], 3.5).unwrap();
        assert_eq!(*t.get(&[1, 0, 1]).unwrap(), 3.5);
        assert_eq!(*t.get(&[1, 1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let t = ComponentTable::zeros("g", &[Slot::S_LO, Slot::S_LO], Dims::new(1, 2));
        assert!(matches!(t.get(&[2, 0]), Err(TableError::OutOfRange { .. })));
        assert!(matches!(t.get(&[0]), Err(TableError::OutOfRange { .. })));
    }

    #[test]
    fn symmetry_check_flags_asymmetric_writes() {
        let mut t = ComponentTable::zeros("Gamma", &christoffel_sig(), Dims::new(1, 2));
        t.set(&[0, 0, 1], 1.0).unwrap();
        t.set(&[0, 1, 0], 1.0).unwrap();
        assert!(t.check_symmetric(1, 2, 1e-12).is_ok());
        t.set(&[1, 0, 1], 0.5).unwrap();
        assert!(matches!(t.check_symmetric(1, 2, 1e-12), Err(TableError::Asymmetric { .. })));
    }

    #[test]
    fn row_major_order() {
        let idx: Vec<Vec<usize>> = multi_indices(&[2, 3]).collect();
        assert_eq!(idx[0], vec![0, 0]);
        assert_eq!(idx[1], vec![0, 1]);
        assert_eq!(idx[3], vec![1, 0]);
        assert_eq!(idx.len(), 6);
    }
}
