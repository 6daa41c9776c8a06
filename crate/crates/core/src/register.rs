//! Labeled tensor-product registers and mixed-radix index arithmetic.
//!
//! A `Register` is an ordered list of named parts. Global indices are
//! mixed-radix numbers where the leftmost part is the most significant
//! digit; every module in this crate inherits that convention.

use crate::{Error, Result};

/// One named subsystem of a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub label: String,
    pub dim: usize,
}

impl Part {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Part { label: label.into(), dim }
    }
}

/// An ordered collection of named parts with distinct labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    parts: Vec<Part>,
}

impl Register {
    /// Builds a register; labels must be distinct and dims at least 1.
    pub fn new(parts: Vec<Part>) -> Result<Self> {
        for (i, p) in parts.iter().enumerate() {
            if p.dim == 0 {
                return Err(Error::Register(format!("part {} has dimension 0", p.label)));
            }
            if parts[..i].iter().any(|q| q.label == p.label) {
                return Err(Error::Register(format!("duplicate label {}", p.label)));
            }
        }
        Ok(Register { parts })
    }

    /// Convenience constructor from `(label, dim)` pairs.
    pub fn from_dims(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|(l, d)| Part::new(*l, *d)).collect())
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Total Hilbert-space dimension (product of part dims).
    pub fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parts.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.label == label)
    }

    pub fn part(&self, label: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.label == label)
    }

    /// Positions of `labels` in register order; errors on unknown labels.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            match self.position(l) {
                Some(p) => pos.push(p),
                None => return Err(Error::Register(format!("unknown label {l}"))),
            }
        }
        pos.sort_unstable();
        pos.dedup();
        if pos.len() != labels.len() {
            return Err(Error::Register("repeated label in selection".into()));
        }
        Ok(pos)
    }

    /// Sub-register containing `labels`, kept in register order.
    pub fn keep(&self, labels: &[&str]) -> Result<Register> {
        let pos = self.positions(labels)?;
        Register::new(pos.into_iter().map(|p| self.parts[p].clone()).collect())
    }

    /// Sub-register with `labels` removed, order preserved.
    pub fn drop(&self, labels: &[&str]) -> Result<Register> {
        let pos = self.positions(labels)?;
        let kept: Vec<Part> = self
            .parts
            .iter()
            .enumerate()
            .filter(|(i, _)| !pos.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        Register::new(kept)
    }

    /// Concatenation; label sets must stay disjoint.
    pub fn concat(&self, other: &Register) -> Result<Register> {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Register::new(parts)
    }

    /// Strides of each part in the global index (leftmost most significant).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.parts.len()];
        for i in (0..self.parts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.parts[i + 1].dim;
        }
        strides
    }

    /// Decomposes a global index into per-part digits.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.dim());
        let mut digits = vec![0usize; self.parts.len()];
        let mut rest = index;
        for i in (0..self.parts.len()).rev() {
            digits[i] = rest % self.parts[i].dim;
            rest /= self.parts[i].dim;
        }
        digits
    }

    /// Recombines per-part digits into a global index.
    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.parts.len());
        let mut idx = 0usize;
        for (digit, part) in digits.iter().zip(&self.parts) {
            debug_assert!(*digit < part.dim);
            idx = idx * part.dim + digit;
        }
        idx
    }

    /// Splits a global index into (kept, dropped) sub-indices for the given
    /// kept positions (sorted). Both sub-indices follow register order.
    pub fn split_index(&self, index: usize, kept_positions: &[usize]) -> (usize, usize) {
        let digits = self.digits(index);
        let mut kept = 0usize;
        let mut dropped = 0usize;
        for (i, part) in self.parts.iter().enumerate() {
            if kept_positions.contains(&i) {
                kept = kept * part.dim + digits[i];
            } else {
                dropped = dropped * part.dim + digits[i];
            }
        }
        (kept, dropped)
    }
}
