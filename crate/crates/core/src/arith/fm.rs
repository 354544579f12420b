//! Fourier–Motzkin elimination over exact rationals, with witness
//! reconstruction by back-substitution.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::ast::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    /// `≥ 0`
    Ge,
    /// `> 0`
    Gt,
    /// `= 0`
    Eq,
}

/// `Σ coeffs[i]·x_i + constant ⋈ 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinConstraint {
    pub coeffs: BTreeMap<usize, Rational>,
    pub constant: Rational,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FmResult {
    Infeasible,
    /// A satisfying assignment for every atom that occurred.
    Feasible(BTreeMap<usize, Rational>),
    /// The intermediate system grew beyond the limit.
    Unknown,
}

impl LinConstraint {
    pub fn new(coeffs: BTreeMap<usize, Rational>, constant: Rational, kind: Kind) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LinConstraint { coeffs, constant, kind }
    }

    fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    fn scaled(&self, k: &Rational) -> LinConstraint {
        LinConstraint {
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c * k)).collect(),
            constant: &self.constant * k,
            kind: self.kind,
        }
    }

    fn plus(&self, other: &LinConstraint, kind: Kind) -> LinConstraint {
        let mut coeffs = self.coeffs.clone();
        for (i, c) in &other.coeffs {
            *coeffs.entry(*i).or_insert_with(Rational::zero) += c;
        }
        LinConstraint::new(coeffs, &self.constant + &other.constant, kind)
    }

    /// Divides by the magnitude of the first coefficient so that equal
    /// half-spaces compare equal.
    fn normalized(self) -> LinConstraint {
        match self.coeffs.values().next() {
            Some(c) => {
                let k = c.abs().recip();
                self.scaled(&k)
            }
            None => self,
        }
    }

    /// Truth of a variable-free constraint.
    fn holds_trivially(&self) -> bool {
        match self.kind {
            Kind::Ge => !self.constant.is_negative(),
            Kind::Gt => self.constant.is_positive(),
            Kind::Eq => self.constant.is_zero(),
        }
    }

    fn value_without(&self, skip: usize, values: &BTreeMap<usize, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (i, c) in &self.coeffs {
            if *i != skip {
                acc += c * values.get(i).cloned().unwrap_or_else(Rational::zero);
            }
        }
        acc
    }

    pub fn holds_at(&self, values: &BTreeMap<usize, Rational>) -> bool {
        let v = self.value_without(usize::MAX, values);
        match self.kind {
            Kind::Ge => !v.is_negative(),
            Kind::Gt => v.is_positive(),
            Kind::Eq => v.is_zero(),
        }
    }
}

/// Decides feasibility of a conjunction of linear constraints. `limit`
/// bounds the number of constraints in any intermediate system.
pub fn fm_solve(constraints: &[LinConstraint], limit: usize) -> FmResult {
    let mut system: Vec<LinConstraint> = constraints.to_vec();
    let atoms: BTreeSet<usize> = system.iter().flat_map(|c| c.coeffs.keys().copied()).collect();

    // x_j = -(rest)/a for each eliminated equality.
    let mut eq_steps: Vec<(usize, LinConstraint)> = Vec::new();
    while let Some(pos) = system.iter().position(|c| c.kind == Kind::Eq && !c.coeffs.is_empty()) {
        let eq = system.swap_remove(pos);
        let (&j, a) = eq.coeffs.iter().next().expect("nonempty");
        let def = eq.scaled(&(-a.recip()));
        system = system
            .into_iter()
            .map(|c| {
                let k = c.coeff(j);
                if k.is_zero() {
                    c
                } else {
                    let mut d = def.scaled(&k);
                    d.coeffs.remove(&j);
                    let mut base = c.clone();
                    base.coeffs.remove(&j);
                    base.plus(&d, c.kind)
                }
            })
            .collect();
        eq_steps.push((j, def));
    }

    let mut steps: Vec<(usize, Vec<LinConstraint>)> = Vec::new();
    loop {
        let mut set = BTreeSet::new();
        for c in system.drain(..) {
            if c.coeffs.is_empty() {
                if !c.holds_trivially() {
                    return FmResult::Infeasible;
                }
            } else {
                set.insert(c.normalized());
            }
        }
        if set.is_empty() {
            break;
        }
        let vars: BTreeSet<usize> = set.iter().flat_map(|c| c.coeffs.keys().copied()).collect();
        let cost = |v: usize| {
            let pos = set.iter().filter(|c| c.coeff(v).is_positive()).count();
            let neg = set.iter().filter(|c| c.coeff(v).is_negative()).count();
            pos * neg
        };
        let v = *vars.iter().min_by_key(|&&v| (cost(v), v)).expect("nonempty");
        let (with_v, rest): (Vec<_>, Vec<_>) = set.into_iter().partition(|c| !c.coeff(v).is_zero());
        let mut next = rest;
        for p in with_v.iter().filter(|c| c.coeff(v).is_positive()) {
            for n in with_v.iter().filter(|c| c.coeff(v).is_negative()) {
                let kind = if p.kind == Kind::Gt || n.kind == Kind::Gt { Kind::Gt } else { Kind::Ge };
                let combo = p.scaled(&-n.coeff(v)).plus(&n.scaled(&p.coeff(v)), kind);
                next.push(combo);
                if next.len() > limit {
                    return FmResult::Unknown;
                }
            }
        }
        steps.push((v, with_v));
        system = next;
    }

    let mut values: BTreeMap<usize, Rational> = BTreeMap::new();
    for (v, cs) in steps.iter().rev() {
        values.insert(*v, choose(*v, cs, &values));
    }
    for (j, def) in eq_steps.iter().rev() {
        let x = def.value_without(*j, &values);
        values.insert(*j, x);
    }
    for a in atoms {
        values.entry(a).or_insert_with(Rational::zero);
    }
    FmResult::Feasible(values)
}

fn choose(v: usize, cs: &[LinConstraint], values: &BTreeMap<usize, Rational>) -> Rational {
    let mut lower: Option<(Rational, bool)> = None;
    let mut upper: Option<(Rational, bool)> = None;
    for c in cs {
        let a = c.coeff(v);
        let bound = -c.value_without(v, values) / &a;
        let strict = c.kind == Kind::Gt;
        if a.is_positive() {
            if lower.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && strict && !s)) {
                lower = Some((bound, strict));
            }
        } else if upper.as_ref().is_none_or(|(u, s)| bound < *u || (bound == *u && strict && !s)) {
            upper = Some((bound, strict));
        }
    }
    match (lower, upper) {
        (Some((l, false)), _) => l,
        (_, Some((u, false))) => u,
        (Some((l, _)), Some((u, _))) => (l + u) / Rational::from_integer(2.into()),
        (Some((l, _)), None) => l + Rational::one(),
        (None, Some((u, _))) => u - Rational::one(),
        (None, None) => Rational::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn c(terms: &[(usize, i64)], k: i64, kind: Kind) -> LinConstraint {
        LinConstraint::new(terms.iter().map(|&(i, a)| (i, r(a))).collect(), r(k), kind)
    }

    #[test]
    fn infeasible_interval() {
        // x >= 0, x <= -1
        let sys = [c(&[(0, 1)], 0, Kind::Ge), c(&[(0, -1)], -1, Kind::Ge)];
        assert_eq!(fm_solve(&sys, 1000), FmResult::Infeasible);
    }

    #[test]
    fn witness_satisfies_system() {
        // x + y <= 1, x - y <= 1, x > 1 is infeasible; drop the last and
        // ask for x >= 1.
        let sys = [
            c(&[(0, -1), (1, -1)], 1, Kind::Ge),
            c(&[(0, -1), (1, 1)], 1, Kind::Ge),
            c(&[(0, 1)], -1, Kind::Gt),
        ];
        assert_eq!(fm_solve(&sys, 1000), FmResult::Infeasible);
        let sys2 = [sys[0].clone(), sys[1].clone(), c(&[(0, 1)], -1, Kind::Ge)];
        match fm_solve(&sys2, 1000) {
            FmResult::Feasible(w) => assert!(sys2.iter().all(|k| k.holds_at(&w))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equalities_back_substitute() {
        // x = 2y + 1, y > 3, x < 9
        let sys = [
            c(&[(0, 1), (1, -2)], -1, Kind::Eq),
            c(&[(1, 1)], -3, Kind::Gt),
            c(&[(0, -1)], 9, Kind::Gt),
        ];
        match fm_solve(&sys, 1000) {
            FmResult::Feasible(w) => assert!(sys.iter().all(|k| k.holds_at(&w)), "{w:?}"),
            other => panic!("{other:?}"),
        }
        let bad = [sys[0].clone(), sys[1].clone(), c(&[(0, -1)], 7, Kind::Gt)];
        assert_eq!(fm_solve(&bad, 1000), FmResult::Infeasible);
    }

    #[test]
    fn upper_bound_witness_is_tight() {
        // -x >= 0 gives x = 0.
        match fm_solve(&[c(&[(0, -1)], 0, Kind::Ge)], 10) {
            FmResult::Feasible(w) => assert_eq!(w[&0], r(0)),
            other => panic!("{other:?}"),
        }
    }
}
