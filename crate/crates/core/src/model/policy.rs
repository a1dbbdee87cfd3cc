use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::term::Atom;

/// Optimization direction for reward objectives.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Objective {
    Pmax,
    Rmin,
    Rmax,
}

impl Objective {
    /// Direction used when signing the necessary-rule penalty.
    pub fn sense(self) -> Sense {
        match self {
            Objective::Rmax => Sense::Max,
            Objective::Pmax | Objective::Rmin => Sense::Min,
        }
    }

    /// Direction in which state values are optimized.
    pub fn direction(self) -> Sense {
        match self {
            Objective::Pmax | Objective::Rmax => Sense::Max,
            Objective::Rmin => Sense::Min,
        }
    }

    pub fn default_label(self) -> &'static str {
        match self {
            Objective::Pmax => "doneP",
            Objective::Rmin | Objective::Rmax => "doneR",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Pmax => "pmax",
            Objective::Rmin => "rmin",
            Objective::Rmax => "rmax",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pmax" => Ok(Objective::Pmax),
            "rmin" => Ok(Objective::Rmin),
            "rmax" => Ok(Objective::Rmax),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

/// State-action table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Policy {
    pub objective: Objective,
    pub choice: BTreeMap<usize, Atom>,
}

impl Policy {
    pub fn new(objective: Objective) -> Self {
        Policy {
            objective,
            choice: BTreeMap::new(),
        }
    }

    pub fn get(&self, s: usize) -> Option<&Atom> {
        self.choice.get(&s)
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }
}
