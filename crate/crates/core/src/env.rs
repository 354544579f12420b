//! Total valuations of variables, stored as overrides on a default value.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use crate::ast::Variable;

/// A total map from variables to reals.
///
/// Canonical form: no override equals the default, and `-0.0` is stored as
/// `0.0`. Equality, ordering and hashing compare bit patterns, which is
/// well defined because NaN is never stored.
#[derive(Clone, Debug)]
pub struct Environment {
    default: f64,
    overrides: BTreeMap<Variable, f64>,
}

fn canon(x: f64) -> f64 {
    assert!(!x.is_nan(), "environments never hold NaN");
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl Environment {
    /// Every variable maps to `default`.
    pub fn constant(default: f64) -> Self {
        Environment { default: canon(default), overrides: BTreeMap::new() }
    }

    pub fn zero() -> Self {
        Environment::constant(0.0)
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn lookup(&self, v: Variable) -> f64 {
        self.overrides.get(&v).copied().unwrap_or(self.default)
    }

    pub fn set(&mut self, v: Variable, value: f64) {
        let value = canon(value);
        if value.to_bits() == self.default.to_bits() {
            self.overrides.remove(&v);
        } else {
            self.overrides.insert(v, value);
        }
    }

    /// Applies the updates left to right; a later write to the same
    /// variable wins.
    pub fn with(&self, updates: &[(Variable, f64)]) -> Self {
        let mut out = self.clone();
        for &(v, r) in updates {
            out.set(v, r);
        }
        out
    }

    pub fn overrides(&self) -> impl Iterator<Item = (Variable, f64)> + '_ {
        self.overrides.iter().map(|(v, x)| (*v, *x))
    }

    fn key(&self) -> (u64, Vec<(u32, u64)>) {
        (
            self.default.to_bits(),
            self.overrides.iter().map(|(v, x)| (v.0, x.to_bits())).collect(),
        )
    }
}

/// `env_with` of the definition: the environment `e` updated pointwise.
pub fn env_with(e: &Environment, updates: &[(Variable, f64)]) -> Environment {
    e.with(updates)
}

impl PartialEq for Environment {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Environment {}

impl Hash for Environment {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Environment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Environment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: Variable = Variable(0);
    const Y: Variable = Variable(1);

    #[test]
    fn empty_update_is_identity() {
        assert_eq!(env_with(&Environment::zero(), &[]), Environment::zero());
    }

    #[test]
    fn circle_point_lookup() {
        let c = 2.0;
        let e = env_with(&Environment::zero(), &[(X, c / 2.0), (Y, 3f64.sqrt() * c / 2.0)]);
        assert_eq!(e.lookup(X), 1.0);
        assert_eq!(e.lookup(Y), 3f64.sqrt());
        assert_eq!(e.lookup(Variable(9)), 0.0);
    }

    #[test]
    fn last_write_wins() {
        let e = env_with(&Environment::zero(), &[(X, 1.0), (X, 2.0)]);
        assert_eq!(e.lookup(X), 2.0);
    }

    #[test]
    fn canonical_form_drops_default_overrides() {
        let e = env_with(&Environment::zero(), &[(X, 1.0), (X, 0.0), (Y, -0.0)]);
        assert_eq!(e.overrides().count(), 0);
        assert_eq!(e, Environment::zero());
    }
}
