use std::fmt;
use std::str::FromStr;

use serde::Serialize;

macro_rules! rule_ids {
    ($($variant:ident => $name:literal, $group:ident;)*) => {
        /// Every rule of the calculus, plus the arithmetic closing rule.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleId {
            $($variant,)*
        }

        impl RuleId {
            pub const ALL: &'static [RuleId] = &[$(RuleId::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(RuleId::$variant => $name,)*
                }
            }

            pub fn group(self) -> RuleGroup {
                match self {
                    $(RuleId::$variant => RuleGroup::$group,)*
                }
            }
        }
    };
}

rule_ids! {
    NotR => "notR", Propositional;
    NotL => "notL", Propositional;
    AndR => "andR", Propositional;
    AndL => "andL", Propositional;
    OrR => "orR", Propositional;
    OrL => "orL", Propositional;
    ImpliesR => "impliesR", Propositional;
    ImpliesL => "impliesL", Propositional;
    IffR => "iffR", Propositional;
    IffL => "iffL", Propositional;
    Cut => "cut", Propositional;
    WeakR => "weakR", Propositional;
    WeakL => "weakL", Propositional;
    FalseL => "falseL", Propositional;
    TrueR => "trueR", Propositional;
    Axiom => "axiom", Propositional;
    ExistsR => "existsR", Quantifier;
    ForallL => "forallL", Quantifier;
    ForallR => "forallR", Quantifier;
    ExistsL => "existsL", Quantifier;
    MoveR => "moveR", Structural;
    MoveL => "moveL", Structural;
    HideR => "hideR", Structural;
    HideL => "hideL", Structural;
    Boxd => "boxd", Rewrite;
    Assignb => "assignb", Rewrite;
    Assignd => "assignd", Rewrite;
    Testb => "testb", Rewrite;
    Testd => "testd", Rewrite;
    Choiceb => "choiceb", Rewrite;
    Choiced => "choiced", Rewrite;
    Composeb => "composeb", Rewrite;
    Composed => "composed", Rewrite;
    Iterateb => "iterateb", Rewrite;
    Iterated => "iterated", Rewrite;
    Anyb => "anyb", Rewrite;
    Anyd => "anyd", Rewrite;
    Mb => "Mb", Program;
    Md => "Md", Program;
    K => "K", Program;
    Loop => "loop", Program;
    MbR => "mbR", Program;
    MbL => "mbL", Program;
    Ghost => "ghost", Program;
    Gb => "Gb", Program;
    Gd => "Gd", Program;
    VRb => "VRb", Program;
    VRd => "VRd", Program;
    MdR => "mdR", Program;
    MdL => "mdL", Program;
    Dinit => "dinit", Differential;
    DW => "dW", Differential;
    DI => "dI", Differential;
    DC => "dC", Differential;
    DG => "dG", Differential;
    DS => "dS", Differential;
    Arith => "arith", Arithmetic;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleGroup {
    Propositional,
    Quantifier,
    Structural,
    Rewrite,
    Program,
    Differential,
    Arithmetic,
}

/// What kind of value a rule argument holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgKind {
    Position,
    Formula,
    Term,
    Variable,
    Direction,
    Solution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ArgSpec {
    /// Key in a `.dlp` command line.
    pub key: &'static str,
    pub kind: ArgKind,
    pub required: bool,
}

const fn arg(key: &'static str, kind: ArgKind, required: bool) -> ArgSpec {
    ArgSpec { key, kind, required }
}

const AT: ArgSpec = arg("at", ArgKind::Position, false);
const AT_REQ: ArgSpec = arg("at", ArgKind::Position, true);
const FORMULA: ArgSpec = arg("with", ArgKind::Formula, true);
const TERM: ArgSpec = arg("with", ArgKind::Term, true);
const DIR: ArgSpec = arg("dir", ArgKind::Direction, false);
const UNSUBSTITUTED: ArgSpec = arg("with", ArgKind::Formula, false);
const GHOST: ArgSpec = arg("ghost", ArgKind::Variable, false);
const GHOST_A: ArgSpec = arg("a", ArgKind::Term, true);
const GHOST_B: ArgSpec = arg("b", ArgKind::Term, true);
const SOLUTION: ArgSpec = arg("sol", ArgKind::Solution, false);

impl RuleId {
    /// The rules of the calculus, without `arith`.
    pub fn calculus_rules() -> impl Iterator<Item = RuleId> {
        RuleId::ALL.iter().copied().filter(|r| *r != RuleId::Arith)
    }

    /// Whether the rule rewrites a subformula to an equivalent one.
    pub fn is_rewrite(self) -> bool {
        self.group() == RuleGroup::Rewrite
    }

    pub fn args(self) -> &'static [ArgSpec] {
        use RuleId::*;
        match self {
            Cut => &[FORMULA],
            Loop | DC => &[AT, FORMULA],
            WeakR | WeakL | MbR | MbL | MdR | MdL => &[AT, FORMULA],
            ExistsR | ForallL => &[AT, TERM],
            MoveR | MoveL | HideR | HideL => &[AT_REQ],
            Assignb | Assignd => &[AT, DIR, UNSUBSTITUTED],
            Boxd | Testb | Testd | Choiceb | Choiced | Composeb | Composed | Iterateb | Iterated | Anyb | Anyd => {
                &[AT, DIR]
            }
            Ghost => &[AT, TERM, GHOST],
            DG => &[AT, FORMULA, GHOST, GHOST_A, GHOST_B],
            DS => &[AT, SOLUTION],
            Arith => &[],
            _ => &[AT],
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

impl Serialize for RuleId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_counts() {
        let count = |g| RuleId::calculus_rules().filter(|r| r.group() == g).count();
        assert_eq!(count(RuleGroup::Propositional), 16);
        assert_eq!(count(RuleGroup::Quantifier), 4);
        assert_eq!(count(RuleGroup::Structural), 4);
        assert_eq!(count(RuleGroup::Rewrite), 13);
        assert_eq!(count(RuleGroup::Program), 13);
        assert_eq!(count(RuleGroup::Differential), 6);
        assert_eq!(RuleId::calculus_rules().count(), 56);
    }

    #[test]
    fn names_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(r.name().parse::<RuleId>().unwrap(), *r);
        }
        assert!("nope".parse::<RuleId>().is_err());
    }
}
