//! Incomplete decision procedures for real arithmetic goals: polynomial
//! identities, Fourier–Motzkin on linear systems, and Fourier–Motzkin over
//! a product relaxation for low-degree nonlinear goals.

mod fm;
mod poly;

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use fm::{fm_solve, FmResult, Kind, LinConstraint};
pub use poly::{poly_normalize, Monomial, PolyNF};

use crate::ast::{BoolExpr, Rational, RelOp, Variable, VarsOf};
use crate::env::Environment;
use crate::eval::eval_sequent;
use crate::sequent::Sequent;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("not a polynomial: {0:?}")]
    NotPolynomial(crate::ast::RealExpr),
    #[error("not linear: {0}")]
    NotLinear(String),
    #[error("not a quantifier-free arithmetic formula: {0:?}")]
    NotFirstOrder(BoolExpr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// A consequent comparison holds after normalization.
    Identity,
    FourierMotzkin,
    /// Fourier–Motzkin after adding products of hypotheses.
    ProductRelaxation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved(Method),
    /// Exact values under which every antecedent holds and every
    /// consequent fails. Unlisted variables are 0.
    Counterexample(Vec<(Variable, Rational)>),
    Unknown,
}

const FM_LIMIT: usize = 4000;
const MAX_CASES: usize = 256;
const MAX_PRODUCTS: usize = 400;

/// A comparison `p ⋈ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Lit {
    poly: PolyNF,
    op: RelOp,
}

enum Nnf {
    True,
    False,
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn to_nnf(p: &BoolExpr, positive: bool) -> Result<Nnf, ArithError> {
    Ok(match p {
        BoolExpr::Top => if positive { Nnf::True } else { Nnf::False },
        BoolExpr::Bot => if positive { Nnf::False } else { Nnf::True },
        BoolExpr::Rel(op, a, b) => {
            let poly = poly_normalize(a)?.sub(&poly_normalize(b)?);
            Nnf::Lit(Lit { poly, op: if positive { *op } else { op.negate() } })
        }
        BoolExpr::Not(a) => to_nnf(a, !positive)?,
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            let parts = vec![to_nnf(a, positive)?, to_nnf(b, positive)?];
            if matches!(p, BoolExpr::And(..)) == positive {
                Nnf::And(parts)
            } else {
                Nnf::Or(parts)
            }
        }
        BoolExpr::Implies(a, b) => {
            let parts = vec![to_nnf(a, !positive)?, to_nnf(b, positive)?];
            if positive {
                Nnf::Or(parts)
            } else {
                Nnf::And(parts)
            }
        }
        BoolExpr::Iff(a, b) => {
            let both = Nnf::And(vec![to_nnf(a, true)?, to_nnf(b, true)?]);
            let neither = Nnf::And(vec![to_nnf(a, false)?, to_nnf(b, false)?]);
            let a_only = Nnf::And(vec![to_nnf(a, true)?, to_nnf(b, false)?]);
            let b_only = Nnf::And(vec![to_nnf(a, false)?, to_nnf(b, true)?]);
            if positive {
                Nnf::Or(vec![both, neither])
            } else {
                Nnf::Or(vec![a_only, b_only])
            }
        }
        _ => return Err(ArithError::NotFirstOrder(p.clone())),
    })
}

/// Disjunctive normal form; `None` when it has more than `MAX_CASES`
/// disjuncts.
fn dnf(n: &Nnf) -> Option<Vec<Vec<Lit>>> {
    Some(match n {
        Nnf::True => vec![vec![]],
        Nnf::False => vec![],
        Nnf::Lit(l) => match l.op {
            RelOp::Ne => vec![
                vec![Lit { poly: l.poly.clone(), op: RelOp::Gt }],
                vec![Lit { poly: l.poly.clone(), op: RelOp::Lt }],
            ],
            _ => vec![vec![l.clone()]],
        },
        Nnf::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf(p)?);
                if out.len() > MAX_CASES {
                    return None;
                }
            }
            out
        }
        Nnf::And(parts) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            for p in parts {
                let d = dnf(p)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                if next.len() > MAX_CASES {
                    return None;
                }
                acc = next;
            }
            acc
        }
    })
}

/// `p ⋈ 0` as a constraint of kind `≥`, `>` or `=`.
fn oriented(l: &Lit) -> (PolyNF, Kind) {
    match l.op {
        RelOp::Ge => (l.poly.clone(), Kind::Ge),
        RelOp::Gt => (l.poly.clone(), Kind::Gt),
        RelOp::Le => (l.poly.neg(), Kind::Ge),
        RelOp::Lt => (l.poly.neg(), Kind::Gt),
        RelOp::Eq => (l.poly.clone(), Kind::Eq),
        RelOp::Ne => unreachable!("split by dnf"),
    }
}

/// Maps nonconstant monomials to FM atoms.
#[derive(Default)]
struct Atoms {
    index: BTreeMap<Monomial, usize>,
}

impl Atoms {
    fn constraint(&mut self, p: &PolyNF, kind: Kind) -> LinConstraint {
        let mut coeffs = BTreeMap::new();
        for (m, c) in p.terms() {
            if !m.is_one() {
                let n = self.index.len();
                let i = *self.index.entry(m.clone()).or_insert(n);
                coeffs.insert(i, c.clone());
            }
        }
        LinConstraint::new(coeffs, p.constant_term(), kind)
    }

    /// Values of the degree-one atoms in an FM witness.
    fn variable_values(&self, w: &BTreeMap<usize, Rational>) -> BTreeMap<Variable, Rational> {
        let mut out = BTreeMap::new();
        for (m, i) in &self.index {
            if let [(v, 1)] = m.factors() {
                out.insert(*v, w.get(i).cloned().unwrap_or_else(Rational::zero));
            }
        }
        out
    }
}

enum CaseResult {
    Infeasible(Method),
    Witness(BTreeMap<Variable, Rational>),
    Unknown,
}

fn solve_case(lits: &[Lit], allow_nonlinear: bool) -> Result<CaseResult, ArithError> {
    let mut cons: Vec<(PolyNF, Kind)> = lits.iter().map(oriented).collect();
    if !allow_nonlinear {
        if let Some((p, _)) = cons.iter().find(|(p, _)| !p.is_linear()) {
            return Err(ArithError::NotLinear(p.to_string()));
        }
        return Ok(linear_case(&cons, &[]));
    }

    // Eliminate equalities that define a variable linearly.
    let mut defs: Vec<(Variable, PolyNF)> = Vec::new();
    while let Some((i, v, def)) = cons.iter().enumerate().find_map(|(i, (p, k))| {
        if *k != Kind::Eq {
            return None;
        }
        p.variables().into_iter().find_map(|v| {
            p.solve_linear_for(v).map(|(a, rest)| (i, v, rest.scale(&(-a.recip()))))
        })
    }) {
        cons.remove(i);
        for (p, _) in cons.iter_mut() {
            *p = p.substitute(v, &def);
        }
        for (_, d) in defs.iter_mut() {
            *d = d.substitute(v, &def);
        }
        defs.push((v, def));
    }

    if cons.iter().all(|(p, _)| p.is_linear()) {
        return Ok(linear_case(&cons, &defs));
    }

    let mut atoms = Atoms::default();
    let mut system: Vec<LinConstraint> = cons.iter().map(|(p, k)| atoms.constraint(p, *k)).collect();
    let nonconst: Vec<&(PolyNF, Kind)> = cons.iter().filter(|(p, _)| p.as_constant().is_none()).collect();
    let mut products = 0;
    'outer: for i in 0..nonconst.len() {
        for j in i..nonconst.len() {
            let (p, kp) = nonconst[i];
            let (q, kq) = nonconst[j];
            let kind = match (kp, kq) {
                (Kind::Eq, _) | (_, Kind::Eq) => Kind::Eq,
                (Kind::Gt, Kind::Gt) => Kind::Gt,
                _ => Kind::Ge,
            };
            let prod = p.mul(q);
            if prod.degree() > 4 {
                continue;
            }
            system.push(atoms.constraint(&prod, kind));
            products += 1;
            if products >= MAX_PRODUCTS {
                break 'outer;
            }
        }
    }
    let evens: Vec<Monomial> = atoms.index.keys().filter(|m| m.is_even()).cloned().collect();
    for m in evens {
        let p = PolyNF::monomial(m, Rational::from_integer(1.into()));
        system.push(atoms.constraint(&p, Kind::Ge));
    }
    Ok(match fm_solve(&system, FM_LIMIT) {
        FmResult::Infeasible => CaseResult::Infeasible(Method::ProductRelaxation),
        FmResult::Feasible(w) => CaseResult::Witness(complete(atoms.variable_values(&w), &defs)),
        FmResult::Unknown => CaseResult::Unknown,
    })
}

fn linear_case(cons: &[(PolyNF, Kind)], defs: &[(Variable, PolyNF)]) -> CaseResult {
    let mut atoms = Atoms::default();
    let system: Vec<LinConstraint> = cons.iter().map(|(p, k)| atoms.constraint(p, *k)).collect();
    match fm_solve(&system, FM_LIMIT) {
        FmResult::Infeasible => CaseResult::Infeasible(Method::FourierMotzkin),
        FmResult::Feasible(w) => CaseResult::Witness(complete(atoms.variable_values(&w), defs)),
        FmResult::Unknown => CaseResult::Unknown,
    }
}

/// Adds values for variables eliminated through equalities.
fn complete(mut values: BTreeMap<Variable, Rational>, defs: &[(Variable, PolyNF)]) -> BTreeMap<Variable, Rational> {
    for (v, def) in defs.iter().rev() {
        let x = def.eval_exact(&|w| values.get(&w).cloned().unwrap_or_else(Rational::zero));
        values.insert(*v, x);
    }
    values
}

/// Exact truth value of a quantifier-free polynomial formula.
pub fn eval_exact(p: &BoolExpr, values: &BTreeMap<Variable, Rational>) -> Option<bool> {
    let lookup = |v: Variable| values.get(&v).cloned().unwrap_or_else(Rational::zero);
    Some(match p {
        BoolExpr::Top => true,
        BoolExpr::Bot => false,
        BoolExpr::Rel(op, a, b) => {
            let d = poly_normalize(a).ok()?.sub(&poly_normalize(b).ok()?).eval_exact(&lookup);
            op.holds(&d, &Rational::zero())
        }
        BoolExpr::And(a, b) => eval_exact(a, values)? && eval_exact(b, values)?,
        BoolExpr::Or(a, b) => eval_exact(a, values)? || eval_exact(b, values)?,
        BoolExpr::Not(a) => !eval_exact(a, values)?,
        BoolExpr::Implies(a, b) => !eval_exact(a, values)? || eval_exact(b, values)?,
        BoolExpr::Iff(a, b) => eval_exact(a, values)? == eval_exact(b, values)?,
        _ => return None,
    })
}

/// The sequent is false at these exact values.
pub fn is_counterexample(s: &Sequent, values: &BTreeMap<Variable, Rational>) -> bool {
    s.antecedent.iter().all(|g| eval_exact(g, values) == Some(true))
        && s.consequent.iter().all(|d| eval_exact(d, values) == Some(false))
}

fn trivially_true(p: &BoolExpr) -> bool {
    match p {
        BoolExpr::Top => true,
        BoolExpr::Rel(op, a, b) => match (poly_normalize(a), poly_normalize(b)) {
            (Ok(x), Ok(y)) => x.sub(&y).as_constant().is_some_and(|d| op.holds(&d, &Rational::zero())),
            _ => false,
        },
        _ => false,
    }
}

fn refutation_cases(formulas: &[(bool, &BoolExpr)]) -> Result<Option<Vec<Vec<Lit>>>, ArithError> {
    let parts = formulas
        .iter()
        .map(|(positive, f)| to_nnf(f, *positive))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(dnf(&Nnf::And(parts)))
}

fn decide(s: &Sequent, formulas: &[(bool, &BoolExpr)], allow_nonlinear: bool, complete_seq: bool) -> Result<Verdict, ArithError> {
    if s.consequent.iter().any(trivially_true) {
        return Ok(Verdict::Proved(Method::Identity));
    }
    let Some(cases) = refutation_cases(formulas)? else {
        return Ok(Verdict::Unknown);
    };
    let mut method = Method::FourierMotzkin;
    let mut unknown = false;
    for case in &cases {
        match solve_case(case, allow_nonlinear)? {
            CaseResult::Infeasible(m) => {
                if m == Method::ProductRelaxation {
                    method = m;
                }
            }
            CaseResult::Witness(w) => {
                if complete_seq && is_counterexample(s, &w) {
                    return Ok(Verdict::Counterexample(w.into_iter().collect()));
                }
                unknown = true;
            }
            CaseResult::Unknown => unknown = true,
        }
    }
    Ok(if unknown { Verdict::Unknown } else { Verdict::Proved(method) })
}

/// Fourier–Motzkin on `Γ ∧ ¬Δ`. Every atom must be linear.
pub fn linear_close(s: &Sequent) -> Result<Verdict, ArithError> {
    let formulas: Vec<(bool, &BoolExpr)> = s
        .antecedent
        .iter()
        .map(|g| (true, g))
        .chain(s.consequent.iter().map(|d| (false, d)))
        .collect();
    decide(s, &formulas, false, true)
}

fn supported(p: &BoolExpr) -> bool {
    to_nnf(p, true).is_ok()
}

/// The arithmetic closure used by the `arith` rule. Formulas outside
/// quantifier-free polynomial arithmetic are ignored, which only weakens
/// the goal.
pub fn arith_close(s: &Sequent) -> Verdict {
    let formulas: Vec<(bool, &BoolExpr)> = s
        .antecedent
        .iter()
        .filter(|g| supported(g))
        .map(|g| (true, g))
        .chain(s.consequent.iter().filter(|d| supported(d)).map(|d| (false, d)))
        .collect();
    let complete_seq = formulas.len() == s.len();
    decide(s, &formulas, true, complete_seq).unwrap_or(Verdict::Unknown)
}

/// `hyps ⊢ goal` is closed by [`arith_close`].
pub fn entails(hyps: &[BoolExpr], goal: &BoolExpr) -> bool {
    matches!(arith_close(&Sequent::new(hyps.to_vec(), vec![goal.clone()])), Verdict::Proved(_))
}

/// Random search for an environment falsifying the sequent. Values are
/// drawn from small integers, halves and uniform reals in [-10, 10].
pub fn sample_counterexample(s: &Sequent, samples: usize, seed: u64) -> Option<Environment> {
    let vars: Vec<Variable> = s.vars_of().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let updates: Vec<(Variable, f64)> = vars
            .iter()
            .map(|v| {
                let x = match rng.gen_range(0..3) {
                    0 => rng.gen_range(-5i32..=5) as f64,
                    1 => rng.gen_range(-20i32..=20) as f64 / 2.0,
                    _ => rng.gen_range(-10.0..10.0),
                };
                (*v, x)
            })
            .collect();
        let e = Environment::zero().with(&updates);
        if let Ok(false) = eval_sequent(s, &e, None) {
            return Some(e);
        }
    }
    None
}
