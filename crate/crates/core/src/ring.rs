//! Ring arithmetic modulo D and index bookkeeping for composite systems.
//!
//! Basis labels of a D-level system live in the ring Z_D. Composite basis
//! states are flattened row-major with the first subsystem most significant.

use std::fmt;

use crate::error::{Error, Result};

/// Dimension of a single qudit. Always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(usize);

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDim(d));
        }
        Ok(Dim(d))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Basis label of a single qudit, an element of Z_D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dit(usize);

impl Dit {
    pub fn new(value: usize, dim: Dim) -> Result<Self> {
        if value >= dim.get() {
            return Err(Error::DitOutOfRange {
                value,
                dim: dim.get(),
            });
        }
        Ok(Dit(value))
    }

    pub fn value(self) -> usize {
        self.0
    }

    fn check(self, dim: Dim) -> Result<usize> {
        if self.0 >= dim.get() {
            return Err(Error::DitOutOfRange {
                value: self.0,
                dim: dim.get(),
            });
        }
        Ok(self.0)
    }
}

impl fmt::Display for Dit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canonical representative of (i - j) mod D in [0, D).
///
/// This is the subtraction entering the gate |i⟩|j⟩ → |i⟩|i⊖j⟩; it satisfies
/// i⊖j = 0 iff i = j.
pub fn mod_sub(i: Dit, j: Dit, dim: Dim) -> Result<Dit> {
    let (a, b) = (i.check(dim)?, j.check(dim)?);
    Ok(Dit(sub_mod(a, b, dim.get())))
}

/// Canonical representative of (i + j) mod D in [0, D).
pub fn mod_add(i: Dit, j: Dit, dim: Dim) -> Result<Dit> {
    let (a, b) = (i.check(dim)?, j.check(dim)?);
    Ok(Dit(add_mod(a, b, dim.get())))
}

/// (a - b) mod d for raw indices already known to be in range.
pub(crate) fn sub_mod(a: usize, b: usize, d: usize) -> usize {
    debug_assert!(a < d && b < d);
    (a + d - b) % d
}

/// (a + b) mod d for raw indices already known to be in range.
pub(crate) fn add_mod(a: usize, b: usize, d: usize) -> usize {
    debug_assert!(a < d && b < d);
    (a + b) % d
}

/// Ordered digits of a composite basis label, one per subsystem.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    digits: Vec<Dit>,
}

impl MultiIndex {
    /// Builds a multi-index, checking each digit against its subsystem's dimension.
    pub fn new(digits: Vec<Dit>, dims: &[Dim]) -> Result<Self> {
        if digits.len() != dims.len() {
            return Err(Error::DimMismatch(format!(
                "{} digits for {} subsystems",
                digits.len(),
                dims.len()
            )));
        }
        for (&digit, &dim) in digits.iter().zip(dims) {
            digit.check(dim)?;
        }
        Ok(MultiIndex { digits })
    }

    /// Decodes a flat row-major index over the given subsystem dimensions.
    pub fn from_flat(flat: usize, dims: &[Dim]) -> Result<Self> {
        let total: usize = dims.iter().map(|d| d.get()).product();
        if flat >= total {
            return Err(Error::InvalidArgument(format!(
                "flat index {flat} out of range for total dimension {total}"
            )));
        }
        let raw = unflatten(flat, dims);
        Ok(MultiIndex {
            digits: raw.into_iter().map(Dit).collect(),
        })
    }

    /// Flat row-major index (first subsystem most significant).
    pub fn to_flat(&self, dims: &[Dim]) -> Result<usize> {
        if self.digits.len() != dims.len() {
            return Err(Error::DimMismatch(format!(
                "{} digits for {} subsystems",
                self.digits.len(),
                dims.len()
            )));
        }
        let mut flat = 0;
        for (&digit, &dim) in self.digits.iter().zip(dims) {
            flat = flat * dim.get() + digit.check(dim)?;
        }
        Ok(flat)
    }

    pub fn digits(&self) -> &[Dit] {
        &self.digits
    }
}

/// Row-major digit decomposition of a flat index.
pub(crate) fn unflatten(flat: usize, dims: &[Dim]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    let mut rem = flat;
    for (slot, &dim) in digits.iter_mut().zip(dims).rev() {
        *slot = rem % dim.get();
        rem /= dim.get();
    }
    digits
}

/// Strides of each subsystem in the flat row-major layout.
pub(crate) fn strides(dims: &[Dim]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1].get();
    }
    strides
}
