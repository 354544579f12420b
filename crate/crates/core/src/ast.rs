//! Expression, formula and hybrid-program syntax trees.
//!
//! Variables are plain indices. Real expressions carry exact rational
//! constants; evaluation to floating point lives in [`crate::eval`].

use std::collections::BTreeSet;
use std::fmt;
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational constant.
pub type Rational = BigRational;

/// A program variable, identified by its index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(pub u32);

impl Variable {
    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("variable {0} is assigned more than once")]
    DuplicateTarget(Variable),
    #[error("ODE domain must be free of modalities and quantifiers")]
    DomainNotFirstOrder,
    #[error("test formula must be free of modalities")]
    TestHasModality,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RealExpr {
    Cnst(Rational),
    Val(Variable),
    Add(Box<RealExpr>, Box<RealExpr>),
    Sub(Box<RealExpr>, Box<RealExpr>),
    Mul(Box<RealExpr>, Box<RealExpr>),
    Div(Box<RealExpr>, Box<RealExpr>),
    Neg(Box<RealExpr>),
    Sqrt(Box<RealExpr>),
    Pow(Box<RealExpr>, u32),
}

impl RealExpr {
    pub fn int(n: i64) -> Self {
        RealExpr::Cnst(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        RealExpr::Cnst(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(v: Variable) -> Self {
        RealExpr::Val(v)
    }

    pub fn pow(self, n: u32) -> Self {
        RealExpr::Pow(Box::new(self), n)
    }

    pub fn sqrt(self) -> Self {
        RealExpr::Sqrt(Box::new(self))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RealExpr::Cnst(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, RealExpr::Cnst(c) if c.is_one())
    }

    /// True when the tree contains no `Div` or `Sqrt` node.
    pub fn is_polynomial(&self) -> bool {
        match self {
            RealExpr::Cnst(_) | RealExpr::Val(_) => true,
            RealExpr::Add(a, b) | RealExpr::Sub(a, b) | RealExpr::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            RealExpr::Neg(a) | RealExpr::Pow(a, _) => a.is_polynomial(),
            RealExpr::Div(..) | RealExpr::Sqrt(_) => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            RealExpr::Cnst(_) | RealExpr::Val(_) => 1,
            RealExpr::Add(a, b) | RealExpr::Sub(a, b) | RealExpr::Mul(a, b) | RealExpr::Div(a, b) => {
                1 + a.size() + b.size()
            }
            RealExpr::Neg(a) | RealExpr::Sqrt(a) | RealExpr::Pow(a, _) => 1 + a.size(),
        }
    }
}

impl ops::Add for RealExpr {
    type Output = RealExpr;
    fn add(self, rhs: RealExpr) -> RealExpr {
        RealExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for RealExpr {
    type Output = RealExpr;
    fn sub(self, rhs: RealExpr) -> RealExpr {
        RealExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for RealExpr {
    type Output = RealExpr;
    fn mul(self, rhs: RealExpr) -> RealExpr {
        RealExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Div for RealExpr {
    type Output = RealExpr;
    fn div(self, rhs: RealExpr) -> RealExpr {
        RealExpr::Div(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for RealExpr {
    type Output = RealExpr;
    fn neg(self) -> RealExpr {
        RealExpr::Neg(Box::new(self))
    }
}

/// Comparison operators of atomic formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Le,
    Ge,
    Lt,
    Gt,
    Eq,
    Ne,
}

impl RelOp {
    pub const ALL: [RelOp; 6] = [RelOp::Le, RelOp::Ge, RelOp::Lt, RelOp::Gt, RelOp::Eq, RelOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Le => "<=",
            RelOp::Ge => ">=",
            RelOp::Lt => "<",
            RelOp::Gt => ">",
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
        }
    }

    /// The operator whose truth value is the complement of this one.
    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Le => RelOp::Gt,
            RelOp::Ge => RelOp::Lt,
            RelOp::Lt => RelOp::Ge,
            RelOp::Gt => RelOp::Le,
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
        }
    }

    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            RelOp::Le => a <= b,
            RelOp::Ge => a >= b,
            RelOp::Lt => a < b,
            RelOp::Gt => a > b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Top,
    Bot,
    Rel(RelOp, RealExpr, RealExpr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
    Iff(Box<BoolExpr>, Box<BoolExpr>),
    Forall(Variable, Box<BoolExpr>),
    Exists(Variable, Box<BoolExpr>),
    AllRuns(Box<HybridProgram>, Box<BoolExpr>),
    SomeRuns(Box<HybridProgram>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn rel(op: RelOp, a: RealExpr, b: RealExpr) -> Self {
        BoolExpr::Rel(op, a, b)
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(a))
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Variable, p: BoolExpr) -> Self {
        BoolExpr::Forall(v, Box::new(p))
    }

    pub fn exists(v: Variable, p: BoolExpr) -> Self {
        BoolExpr::Exists(v, Box::new(p))
    }

    pub fn box_(a: HybridProgram, p: BoolExpr) -> Self {
        BoolExpr::AllRuns(Box::new(a), Box::new(p))
    }

    pub fn diamond(a: HybridProgram, p: BoolExpr) -> Self {
        BoolExpr::SomeRuns(Box::new(a), Box::new(p))
    }

    pub fn has_modality(&self) -> bool {
        match self {
            BoolExpr::Top | BoolExpr::Bot | BoolExpr::Rel(..) => false,
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                a.has_modality() || b.has_modality()
            }
            BoolExpr::Not(a) | BoolExpr::Forall(_, a) | BoolExpr::Exists(_, a) => a.has_modality(),
            BoolExpr::AllRuns(..) | BoolExpr::SomeRuns(..) => true,
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            BoolExpr::Top | BoolExpr::Bot | BoolExpr::Rel(..) => false,
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                a.has_quantifier() || b.has_quantifier()
            }
            BoolExpr::Not(a) => a.has_quantifier(),
            BoolExpr::Forall(..) | BoolExpr::Exists(..) => true,
            BoolExpr::AllRuns(a, p) | BoolExpr::SomeRuns(a, p) => a.has_quantifier() || p.has_quantifier(),
        }
    }

    /// Immediate formula children, in path order.
    pub fn children(&self) -> Vec<&BoolExpr> {
        match self {
            BoolExpr::Top | BoolExpr::Bot | BoolExpr::Rel(..) => vec![],
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                vec![a, b]
            }
            BoolExpr::Not(a)
            | BoolExpr::Forall(_, a)
            | BoolExpr::Exists(_, a)
            | BoolExpr::AllRuns(_, a)
            | BoolExpr::SomeRuns(_, a) => vec![a],
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut BoolExpr> {
        match (self, i) {
            (BoolExpr::And(a, _), 0)
            | (BoolExpr::Or(a, _), 0)
            | (BoolExpr::Implies(a, _), 0)
            | (BoolExpr::Iff(a, _), 0) => Some(a),
            (BoolExpr::And(_, b), 1)
            | (BoolExpr::Or(_, b), 1)
            | (BoolExpr::Implies(_, b), 1)
            | (BoolExpr::Iff(_, b), 1) => Some(b),
            (BoolExpr::Not(a), 0)
            | (BoolExpr::Forall(_, a), 0)
            | (BoolExpr::Exists(_, a), 0)
            | (BoolExpr::AllRuns(_, a), 0)
            | (BoolExpr::SomeRuns(_, a), 0) => Some(a),
            _ => None,
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&BoolExpr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at_path(rest)),
        }
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut BoolExpr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.child_mut(i).and_then(|c| c.at_path_mut(rest)),
        }
    }
}

/// Simultaneous assignment `x1 := e1, ..., xn := en` with distinct targets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct AssignmentList {
    pairs: Vec<(Variable, RealExpr)>,
}

impl AssignmentList {
    pub fn new(pairs: Vec<(Variable, RealExpr)>) -> Result<Self, AstError> {
        let mut seen = BTreeSet::new();
        for (v, _) in &pairs {
            if !seen.insert(*v) {
                return Err(AstError::DuplicateTarget(*v));
            }
        }
        Ok(AssignmentList { pairs })
    }

    pub fn empty() -> Self {
        AssignmentList::default()
    }

    pub fn single(v: Variable, e: RealExpr) -> Self {
        AssignmentList { pairs: vec![(v, e)] }
    }

    pub fn get(&self, v: Variable) -> Option<&RealExpr> {
        self.pairs.iter().find(|(w, _)| *w == v).map(|(_, e)| e)
    }

    pub fn contains(&self, v: Variable) -> bool {
        self.pairs.iter().any(|(w, _)| *w == v)
    }

    pub fn targets(&self) -> impl Iterator<Item = Variable> + '_ {
        self.pairs.iter().map(|(v, _)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Variable, RealExpr)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn into_pairs(self) -> Vec<(Variable, RealExpr)> {
        self.pairs
    }
}

/// `x1' = e1, ..., xn' = en & domain`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OdeSystem {
    pub equations: AssignmentList,
    pub domain: BoolExpr,
}

impl OdeSystem {
    pub fn new(equations: AssignmentList, domain: BoolExpr) -> Result<Self, AstError> {
        if domain.has_modality() || domain.has_quantifier() {
            return Err(AstError::DomainNotFirstOrder);
        }
        Ok(OdeSystem { equations, domain })
    }

    pub fn with_domain(&self, domain: BoolExpr) -> Result<Self, AstError> {
        OdeSystem::new(self.equations.clone(), domain)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HybridProgram {
    Assign(AssignmentList),
    Ode(OdeSystem),
    Test(BoolExpr),
    AnyAssign(Variable),
    Seq(Box<HybridProgram>, Box<HybridProgram>),
    Choice(Box<HybridProgram>, Box<HybridProgram>),
    Star(Box<HybridProgram>),
}

impl HybridProgram {
    pub fn assign(v: Variable, e: RealExpr) -> Self {
        HybridProgram::Assign(AssignmentList::single(v, e))
    }

    pub fn test(p: BoolExpr) -> Result<Self, AstError> {
        if p.has_modality() {
            return Err(AstError::TestHasModality);
        }
        Ok(HybridProgram::Test(p))
    }

    pub fn seq(a: HybridProgram, b: HybridProgram) -> Self {
        HybridProgram::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: HybridProgram, b: HybridProgram) -> Self {
        HybridProgram::Choice(Box::new(a), Box::new(b))
    }

    pub fn star(a: HybridProgram) -> Self {
        HybridProgram::Star(Box::new(a))
    }

    /// No ODE node anywhere in the tree.
    pub fn is_discrete(&self) -> bool {
        match self {
            HybridProgram::Ode(_) => false,
            HybridProgram::Assign(_) | HybridProgram::AnyAssign(_) => true,
            HybridProgram::Test(p) => !p.has_modality(),
            HybridProgram::Seq(a, b) | HybridProgram::Choice(a, b) => a.is_discrete() && b.is_discrete(),
            HybridProgram::Star(a) => a.is_discrete(),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            HybridProgram::Assign(_) | HybridProgram::AnyAssign(_) => false,
            HybridProgram::Ode(sys) => sys.domain.has_quantifier(),
            HybridProgram::Test(p) => p.has_quantifier(),
            HybridProgram::Seq(a, b) | HybridProgram::Choice(a, b) => a.has_quantifier() || b.has_quantifier(),
            HybridProgram::Star(a) => a.has_quantifier(),
        }
    }

    /// Number of program constructors in the tree.
    pub fn size(&self) -> usize {
        match self {
            HybridProgram::Assign(_) | HybridProgram::Ode(_) | HybridProgram::Test(_) | HybridProgram::AnyAssign(_) => 1,
            HybridProgram::Seq(a, b) | HybridProgram::Choice(a, b) => 1 + a.size() + b.size(),
            HybridProgram::Star(a) => 1 + a.size(),
        }
    }

    /// Variables a run of the program may change.
    pub fn bound_vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut BTreeSet<Variable>) {
        match self {
            HybridProgram::Assign(l) => out.extend(l.targets()),
            HybridProgram::Ode(sys) => out.extend(sys.equations.targets()),
            HybridProgram::Test(_) => {}
            HybridProgram::AnyAssign(v) => {
                out.insert(*v);
            }
            HybridProgram::Seq(a, b) | HybridProgram::Choice(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            HybridProgram::Star(a) => a.collect_bound(out),
        }
    }
}

/// Collection of every variable index occurring in a tree, including
/// bound occurrences and assignment targets.
pub trait VarsOf {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>);

    fn vars_of(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

impl VarsOf for RealExpr {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            RealExpr::Cnst(_) => {}
            RealExpr::Val(v) => {
                out.insert(*v);
            }
            RealExpr::Add(a, b) | RealExpr::Sub(a, b) | RealExpr::Mul(a, b) | RealExpr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            RealExpr::Neg(a) | RealExpr::Sqrt(a) | RealExpr::Pow(a, _) => a.collect_vars(out),
        }
    }
}

impl VarsOf for BoolExpr {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            BoolExpr::Top | BoolExpr::Bot => {}
            BoolExpr::Rel(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            BoolExpr::Not(a) => a.collect_vars(out),
            BoolExpr::Forall(v, a) | BoolExpr::Exists(v, a) => {
                out.insert(*v);
                a.collect_vars(out);
            }
            BoolExpr::AllRuns(prog, p) | BoolExpr::SomeRuns(prog, p) => {
                prog.collect_vars(out);
                p.collect_vars(out);
            }
        }
    }
}

impl VarsOf for AssignmentList {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        for (v, e) in self.iter() {
            out.insert(*v);
            e.collect_vars(out);
        }
    }
}

impl VarsOf for OdeSystem {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        self.equations.collect_vars(out);
        self.domain.collect_vars(out);
    }
}

impl VarsOf for HybridProgram {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            HybridProgram::Assign(l) => l.collect_vars(out),
            HybridProgram::Ode(sys) => sys.collect_vars(out),
            HybridProgram::Test(p) => p.collect_vars(out),
            HybridProgram::AnyAssign(v) => {
                out.insert(*v);
            }
            HybridProgram::Seq(a, b) | HybridProgram::Choice(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            HybridProgram::Star(a) => a.collect_vars(out),
        }
    }
}

impl<T: VarsOf> VarsOf for [T] {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        for t in self {
            t.collect_vars(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RealExpr {
        RealExpr::var(Variable(0))
    }
    fn y() -> RealExpr {
        RealExpr::var(Variable(1))
    }

    #[test]
    fn constant_has_no_vars() {
        assert!(RealExpr::int(5).vars_of().is_empty());
    }

    #[test]
    fn circle_vars() {
        let c = RealExpr::int(2);
        let circle = BoolExpr::rel(RelOp::Eq, x().pow(2) + y().pow(2), c.pow(2));
        let vars: Vec<_> = circle.vars_of().into_iter().collect();
        assert_eq!(vars, vec![Variable(0), Variable(1)]);
    }

    #[test]
    fn bound_and_target_occurrences_count() {
        let p = BoolExpr::forall(Variable(7), BoolExpr::Top);
        assert!(p.vars_of().contains(&Variable(7)));
        let prog = HybridProgram::AnyAssign(Variable(3));
        assert!(prog.vars_of().contains(&Variable(3)));
    }

    #[test]
    fn duplicate_targets_rejected() {
        let err = AssignmentList::new(vec![(Variable(0), RealExpr::int(1)), (Variable(0), RealExpr::int(2))]);
        assert_eq!(err, Err(AstError::DuplicateTarget(Variable(0))));
        assert!(AssignmentList::new(vec![(Variable(0), y()), (Variable(1), x())]).is_ok());
    }

    #[test]
    fn ode_domain_must_be_first_order() {
        let eqs = AssignmentList::single(Variable(0), RealExpr::int(1));
        let modal = BoolExpr::box_(HybridProgram::assign(Variable(0), RealExpr::int(0)), BoolExpr::Top);
        assert_eq!(OdeSystem::new(eqs.clone(), modal), Err(AstError::DomainNotFirstOrder));
        assert_eq!(
            OdeSystem::new(eqs, BoolExpr::forall(Variable(1), BoolExpr::Top)),
            Err(AstError::DomainNotFirstOrder)
        );
    }

    #[test]
    fn paths_address_children() {
        let p = BoolExpr::implies(BoolExpr::Top, BoolExpr::not(BoolExpr::Bot));
        assert_eq!(p.at_path(&[1, 0]), Some(&BoolExpr::Bot));
        assert_eq!(p.at_path(&[2]), None);
    }
}
