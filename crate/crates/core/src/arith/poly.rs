use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::ArithError;
use crate::ast::{Rational, RealExpr, Variable};
use crate::eval::rational_to_f64;
use crate::env::Environment;

/// Power product with sorted variables and positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Variable, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Variable) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Every exponent is even, so the monomial is never negative.
    pub fn is_even(&self) -> bool {
        !self.0.is_empty() && self.0.iter().all(|(_, e)| e % 2 == 0)
    }

    pub fn factors(&self) -> &[(Variable, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: Variable) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m: BTreeMap<Variable, u32> = self.0.iter().copied().collect();
        for (v, e) in &other.0 {
            *m.entry(*v).or_insert(0) += e;
        }
        Monomial(m.into_iter().collect())
    }

    /// The monomial with `v` removed.
    fn without(&self, v: Variable) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(w, _)| *w != v).collect())
    }

    fn to_expr(&self) -> Option<RealExpr> {
        self.0
            .iter()
            .map(|(v, e)| if *e == 1 { RealExpr::Val(*v) } else { RealExpr::Val(*v).pow(*e) })
            .reduce(|a, b| a * b)
    }
}

/// Canonical multivariate polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyNF {
    terms: BTreeMap<Monomial, Rational>,
}

impl PolyNF {
    pub fn zero() -> Self {
        PolyNF::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = PolyNF::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        PolyNF::constant(Rational::from_integer(n.into()))
    }

    pub fn var(v: Variable) -> Self {
        let mut p = PolyNF::zero();
        p.add_term(Monomial::var(v), Rational::one());
        p
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = PolyNF::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn add(&self, other: &PolyNF) -> PolyNF {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> PolyNF {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &PolyNF) -> PolyNF {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> PolyNF {
        let mut p = PolyNF::zero();
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c * k);
        }
        p
    }

    pub fn mul(&self, other: &PolyNF) -> PolyNF {
        let mut p = PolyNF::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> PolyNF {
        let mut acc = PolyNF::int(1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Variables occurring with a nonzero coefficient.
    pub fn variables(&self) -> Vec<Variable> {
        let mut vs: Vec<Variable> = self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| *v)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Writes the polynomial as `a·v + q` with `q` free of `v`, when `v`
    /// occurs only linearly and `a` is a constant.
    pub fn solve_linear_for(&self, v: Variable) -> Option<(Rational, PolyNF)> {
        let mut a = None;
        let mut rest = PolyNF::zero();
        for (m, c) in &self.terms {
            match m.exponent(v) {
                0 => rest.add_term(m.clone(), c.clone()),
                1 if m.without(v).is_one() => a = Some(c.clone()),
                _ => return None,
            }
        }
        a.map(|a| (a, rest))
    }

    /// Substitutes `v := q`.
    pub fn substitute(&self, v: Variable, q: &PolyNF) -> PolyNF {
        let mut out = PolyNF::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            let base = PolyNF::monomial(m.without(v), c.clone());
            out = out.add(&if e == 0 { base } else { base.mul(&q.pow(e)) });
        }
        out
    }

    pub fn eval_exact(&self, value: &dyn Fn(Variable) -> Rational) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let x = value(*v);
                for _ in 0..*e {
                    t *= &x;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, env: &Environment) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .fold(rational_to_f64(c), |acc, (v, e)| acc * env.lookup(*v).powi(*e as i32))
            })
            .sum()
    }

    /// Expression form: terms in monomial order, coefficients in front.
    pub fn to_expr(&self) -> RealExpr {
        let mut out: Option<RealExpr> = None;
        for (m, c) in &self.terms {
            let mag = c.abs();
            let term = match m.to_expr() {
                None => RealExpr::Cnst(mag),
                Some(e) if mag.is_one() => e,
                Some(e) => RealExpr::Cnst(mag) * e,
            };
            out = Some(match out {
                None if c.is_negative() => -term,
                None => term,
                Some(acc) if c.is_negative() => acc - term,
                Some(acc) => acc + term,
            });
        }
        out.unwrap_or_else(|| RealExpr::int(0))
    }
}

impl fmt::Display for PolyNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::Printer::raw().real(&self.to_expr()))
    }
}

/// Expands a polynomial expression. Division is allowed only by a nonzero
/// constant.
pub fn poly_normalize(r: &RealExpr) -> Result<PolyNF, ArithError> {
    Ok(match r {
        RealExpr::Cnst(c) => PolyNF::constant(c.clone()),
        RealExpr::Val(v) => PolyNF::var(*v),
        RealExpr::Add(a, b) => poly_normalize(a)?.add(&poly_normalize(b)?),
        RealExpr::Sub(a, b) => poly_normalize(a)?.sub(&poly_normalize(b)?),
        RealExpr::Mul(a, b) => poly_normalize(a)?.mul(&poly_normalize(b)?),
        RealExpr::Neg(a) => poly_normalize(a)?.neg(),
        RealExpr::Pow(a, n) => poly_normalize(a)?.pow(*n),
        RealExpr::Div(a, b) => match poly_normalize(b)?.as_constant() {
            Some(d) if !d.is_zero() => poly_normalize(a)?.scale(&d.recip()),
            _ => return Err(ArithError::NotPolynomial(r.clone())),
        },
        RealExpr::Sqrt(_) => return Err(ArithError::NotPolynomial(r.clone())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_real, Scope};

    fn nf(s: &str) -> PolyNF {
        poly_normalize(&parse_real(s, &Scope::with_vars(&["x", "y", "c"])).unwrap()).unwrap()
    }

    #[test]
    fn identities() {
        assert!(nf("2*x*(-y) + 2*y*x").is_zero());
        assert!(nf("(x+1)^2 - x^2 - 2*x - 1").is_zero());
        assert!(nf("x - x").is_zero());
        assert_eq!(nf("(x + y)*(x - y)"), nf("x^2 - y^2"));
        assert_eq!(nf("x*y/2").degree(), 2);
    }

    #[test]
    fn rejects_non_polynomials() {
        let sc = Scope::with_vars(&["x"]);
        assert!(poly_normalize(&parse_real("1/x", &sc).unwrap()).is_err());
        assert!(poly_normalize(&parse_real("sqrt(x)", &sc).unwrap()).is_err());
        assert!(poly_normalize(&parse_real("x/(2 - 2)", &sc).unwrap()).is_err());
        assert_eq!(poly_normalize(&parse_real("x/4", &sc).unwrap()).unwrap().degree(), 1);
    }

    #[test]
    fn linear_solving_and_substitution() {
        let p = nf("2*x + y^2 - 4");
        let (a, rest) = p.solve_linear_for(Variable(0)).unwrap();
        assert_eq!(a, Rational::from_integer(2.into()));
        assert_eq!(rest, nf("y^2 - 4"));
        assert!(nf("x^2 + x").solve_linear_for(Variable(0)).is_none());
        assert!(nf("x*y").solve_linear_for(Variable(0)).is_none());
        assert_eq!(nf("x^2 + y").substitute(Variable(0), &nf("y + 1")), nf("y^2 + 3*y + 1"));
    }

    #[test]
    fn expression_round_trip() {
        for s in ["x^2 - 3*x*y + 1/2", "-x + c", "0", "-(7)"] {
            let p = nf(s);
            assert_eq!(poly_normalize(&p.to_expr()).unwrap(), p, "{s}");
        }
    }
}
