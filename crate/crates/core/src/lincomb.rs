use std::collections::BTreeMap;

use crate::cyclo::CycloNum;

/// A finitely supported linear combination of basis symbols. Zero
/// coefficients are never stored, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb<K: Ord> {
    terms: BTreeMap<K, CycloNum>,
}

impl<K: Ord + Clone> Default for LinComb<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn zero() -> Self {
        LinComb { terms: BTreeMap::new() }
    }

    pub fn single(key: K, coeff: CycloNum) -> Self {
        let mut out = Self::zero();
        out.add_term(key, &coeff);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: K, coeff: &CycloNum) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, coeff.clone());
            }
        }
    }

    pub fn add_assign_scaled(&mut self, c: &CycloNum, other: &Self) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), &(c * v));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), &-v);
        }
        out
    }

    pub fn neg(&self) -> Self {
        LinComb { terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect() }
    }

    pub fn scale(&self, c: &CycloNum) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LinComb { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn coeff(&self, key: &K) -> Option<&CycloNum> {
        self.terms.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &CycloNum)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&K) -> bool) {
        self.terms.retain(|k, _| keep(k));
    }

    /// Extends a bilinear map on basis symbols to combinations.
    pub fn bilinear<K2: Ord + Clone, O: Ord + Clone>(
        &self,
        other: &LinComb<K2>,
        mut basis: impl FnMut(&K, &K2) -> LinComb<O>,
    ) -> LinComb<O> {
        let mut out = LinComb::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let prod = ca * cb;
                out.add_assign_scaled(&prod, &basis(a, b));
            }
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, CycloNum)> for LinComb<K> {
    fn from_iter<I: IntoIterator<Item = (K, CycloNum)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in iter {
            out.add_term(k, &c);
        }
        out
    }
}
