//! Monomial edge labels.
//!
//! A node of a nodal curve over a base with normal-crossings parameters
//! `x_1, ..., x_k` has local equation `uv = x_1^{a_1} ... x_k^{a_k}` up to a
//! unit, so its label (the principal ideal generated by the right-hand side)
//! is determined by the exponent vector `(a_1, ..., a_k)`. The zero vector is
//! the unit ideal: the node is smoothed out at that point of the base.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("parameter names must be non-empty")]
    EmptyName,
    #[error("duplicate parameter `{0}`")]
    DuplicateName(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("label has {found} exponents but the parameter set has {expected}")]
    Arity { expected: usize, found: usize },
    #[error("labels are over different parameter sets")]
    ParameterMismatch,
}

/// Ordered list of distinct parameter names. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParameterSet(Arc<[String]>);

impl ParameterSet {
    pub fn new<I, S>(names: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(LabelError::EmptyName);
            }
            if names[..i].contains(name) {
                return Err(LabelError::DuplicateName(name.clone()));
            }
        }
        Ok(ParameterSet(names.into()))
    }

    pub fn empty() -> Self {
        ParameterSet(Arc::from(Vec::new()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// The sub-set of parameters named in `keep`, in this set's order.
    pub fn restrict<S: AsRef<str>>(&self, keep: &[S]) -> Result<ParameterSet, LabelError> {
        for name in keep {
            if self.index_of(name.as_ref()).is_none() {
                return Err(LabelError::UnknownParameter(name.as_ref().to_string()));
            }
        }
        let kept = self
            .0
            .iter()
            .filter(|n| keep.iter().any(|k| k.as_ref() == n.as_str()))
            .cloned();
        ParameterSet::new(kept)
    }

    /// Sub-set selected by a bitmask over positions (bit `i` keeps parameter `i`).
    pub fn restrict_mask(&self, mask: u64) -> ParameterSet {
        let kept: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < 64 && mask >> i & 1 == 1)
            .map(|(_, n)| n.clone())
            .collect();
        ParameterSet(kept.into())
    }

    pub fn is_subset_of(&self, other: &ParameterSet) -> bool {
        self.0.iter().all(|n| other.index_of(n).is_some())
    }
}

impl fmt::Debug for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A principal monomial ideal, stored as its exponent vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Label {
    params: ParameterSet,
    exponents: Vec<BigUint>,
}

impl Label {
    pub fn new(params: ParameterSet, exponents: Vec<BigUint>) -> Result<Self, LabelError> {
        if exponents.len() != params.len() {
            return Err(LabelError::Arity {
                expected: params.len(),
                found: exponents.len(),
            });
        }
        Ok(Label { params, exponents })
    }

    pub fn from_u64s(params: ParameterSet, exponents: &[u64]) -> Result<Self, LabelError> {
        Label::new(params, exponents.iter().map(|&e| BigUint::from(e)).collect())
    }

    pub fn unit(params: ParameterSet) -> Self {
        let exponents = vec![BigUint::zero(); params.len()];
        Label { params, exponents }
    }

    /// Builds a label from `{name: exponent}`; absent names have exponent zero.
    pub fn from_map<'a, I>(params: ParameterSet, entries: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = (&'a str, BigUint)>,
    {
        let mut exponents = vec![BigUint::zero(); params.len()];
        for (name, e) in entries {
            let i = params
                .index_of(name)
                .ok_or_else(|| LabelError::UnknownParameter(name.to_string()))?;
            exponents[i] = e;
        }
        Ok(Label { params, exponents })
    }

    /// `{name: exponent}` with zero entries omitted; the unit label maps to `{}`.
    pub fn to_map(&self) -> BTreeMap<String, BigUint> {
        self.params
            .names()
            .iter()
            .zip(&self.exponents)
            .filter(|(_, e)| !e.is_zero())
            .map(|(n, e)| (n.clone(), e.clone()))
            .collect()
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn exponents(&self) -> &[BigUint] {
        &self.exponents
    }

    pub fn is_unit(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    /// Names of the parameters with nonzero exponent.
    pub fn support(&self) -> Vec<&str> {
        self.params
            .names()
            .iter()
            .zip(&self.exponents)
            .filter(|(_, e)| !e.is_zero())
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn total_degree(&self) -> BigUint {
        self.exponents.iter().sum()
    }

    /// Whether `self^n1 = other^n2` for some positive `n1, n2`.
    ///
    /// Two unit labels are parallel; a unit and a non-unit are not. For two
    /// non-units this is proportionality of the exponent vectors, decided by
    /// cross-multiplication against a pivot coordinate.
    pub fn parallel(&self, other: &Label) -> Result<bool, LabelError> {
        self.check_same(other)?;
        let pivot = match self.exponents.iter().position(|e| !e.is_zero()) {
            None => return Ok(other.is_unit()),
            Some(i) => i,
        };
        let (a, b) = (&self.exponents[pivot], &other.exponents[pivot]);
        if b.is_zero() {
            return Ok(false);
        }
        Ok(self
            .exponents
            .iter()
            .zip(&other.exponents)
            .all(|(x, y)| x * b == y * a))
    }

    /// Image of the label at a generization where only `keep` stay non-units.
    pub fn project(&self, keep: &ParameterSet) -> Result<Label, LabelError> {
        let mut exponents = Vec::with_capacity(keep.len());
        for name in keep.names() {
            let i = self
                .params
                .index_of(name)
                .ok_or_else(|| LabelError::UnknownParameter(name.clone()))?;
            exponents.push(self.exponents[i].clone());
        }
        Ok(Label {
            params: keep.clone(),
            exponents,
        })
    }

    pub fn multiply(&self, other: &Label) -> Result<Label, LabelError> {
        self.check_same(other)?;
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Label {
            params: self.params.clone(),
            exponents,
        })
    }

    fn check_same(&self, other: &Label) -> Result<(), LabelError> {
        if self.params != other.params {
            return Err(LabelError::ParameterMismatch);
        }
        Ok(())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return f.write_str("1");
        }
        let mut first = true;
        for (name, e) in self.params.names().iter().zip(&self.exponents) {
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e.to_u64() == Some(1) {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({self})")
    }
}
