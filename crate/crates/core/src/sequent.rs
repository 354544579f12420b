use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ast::{BoolExpr, Variable, VarsOf};

/// `Γ ⊢ Δ`: the conjunction of the antecedent implies the disjunction of
/// the consequent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Sequent {
    pub antecedent: Vec<BoolExpr>,
    pub consequent: Vec<BoolExpr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A formula occurrence: side, index on that side, and a path of child
/// indices into the formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    pub side: Side,
    pub index: usize,
    pub path: Vec<usize>,
}

impl Position {
    pub fn left(index: usize) -> Self {
        Position { side: Side::Left, index, path: Vec::new() }
    }

    pub fn right(index: usize) -> Self {
        Position { side: Side::Right, index, path: Vec::new() }
    }

    pub fn top(&self) -> bool {
        self.path.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Left => 'L',
            Side::Right => 'R',
        };
        write!(f, "{s}:{}", self.index)?;
        if !self.path.is_empty() {
            let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
            write!(f, ":{}", p.join("."))?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = String;

    /// `L:2`, `R:0:1.0`.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.split(':');
        let side = match parts.next() {
            Some("L") => Side::Left,
            Some("R") => Side::Right,
            _ => return Err(format!("bad position `{s}`: expected L:<i> or R:<i>")),
        };
        let index = parts
            .next()
            .and_then(|i| i.parse().ok())
            .ok_or_else(|| format!("bad position `{s}`: missing index"))?;
        let path = match parts.next() {
            None | Some("") => Vec::new(),
            Some(p) => p
                .split('.')
                .map(|i| i.parse().map_err(|_| format!("bad position `{s}`: path `{p}`")))
                .collect::<Result<_, _>>()?,
        };
        if parts.next().is_some() {
            return Err(format!("bad position `{s}`"));
        }
        Ok(Position { side, index, path })
    }
}

impl Sequent {
    pub fn new(antecedent: Vec<BoolExpr>, consequent: Vec<BoolExpr>) -> Self {
        Sequent { antecedent, consequent }
    }

    pub fn side(&self, side: Side) -> &Vec<BoolExpr> {
        match side {
            Side::Left => &self.antecedent,
            Side::Right => &self.consequent,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut Vec<BoolExpr> {
        match side {
            Side::Left => &mut self.antecedent,
            Side::Right => &mut self.consequent,
        }
    }

    pub fn get(&self, pos: &Position) -> Option<&BoolExpr> {
        self.side(pos.side).get(pos.index)?.at_path(&pos.path)
    }

    pub fn get_mut(&mut self, pos: &Position) -> Option<&mut BoolExpr> {
        self.side_mut(pos.side).get_mut(pos.index)?.at_path_mut(&pos.path)
    }

    /// The single formula `∧Γ → ∨Δ`.
    pub fn to_formula(&self) -> BoolExpr {
        let conj = self.antecedent.iter().cloned().reduce(BoolExpr::and).unwrap_or(BoolExpr::Top);
        let disj = self.consequent.iter().cloned().reduce(BoolExpr::or).unwrap_or(BoolExpr::Bot);
        BoolExpr::implies(conj, disj)
    }

    pub fn len(&self) -> usize {
        self.antecedent.len() + self.consequent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl VarsOf for Sequent {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        for f in self.antecedent.iter().chain(&self.consequent) {
            f.collect_vars(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_round_trip() {
        for s in ["L:0", "R:3:1.0.2"] {
            let p: Position = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("X:1".parse::<Position>().is_err());
        assert!("L:".parse::<Position>().is_err());
    }

    #[test]
    fn empty_sequent_formula() {
        assert_eq!(Sequent::default().to_formula(), BoolExpr::implies(BoolExpr::Top, BoolExpr::Bot));
    }
}
