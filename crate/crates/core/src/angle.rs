//! Exact spider phases.
//!
//! A phase is a multiple of π/2 plus an integer combination of free symbols.
//! Symbols stand for arbitrary (non-Clifford) angles; they only get a numeric
//! value when a diagram is evaluated by the semantics oracle.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Identifier of a free angle symbol.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(pub u32);

/// Coarse phase class, as seen by the agent's observation encoding.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AngleClass {
    Zero,
    HalfPi,
    Pi,
    ThreeHalfPi,
    Symbolic,
}

/// `quarter_turns * π/2 + Σ coef * symbol`.
///
/// Invariants: `quarter_turns < 4`, the symbol list is sorted by id and holds
/// no zero coefficients. Derived equality is therefore structural equality of
/// the represented linear form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle {
    quarter_turns: u8,
    symbols: Vec<(Symbol, i32)>,
}

impl Angle {
    pub const ZERO: Angle = Angle { quarter_turns: 0, symbols: Vec::new() };
    pub const HALF_PI: Angle = Angle { quarter_turns: 1, symbols: Vec::new() };
    pub const PI: Angle = Angle { quarter_turns: 2, symbols: Vec::new() };
    pub const THREE_HALF_PI: Angle = Angle { quarter_turns: 3, symbols: Vec::new() };

    /// A concrete multiple of π/2, normalized modulo 4.
    pub fn quarter(turns: i64) -> Angle {
        Angle { quarter_turns: turns.rem_euclid(4) as u8, symbols: Vec::new() }
    }

    /// The bare symbol `s` with coefficient one.
    pub fn symbol(s: Symbol) -> Angle {
        Angle { quarter_turns: 0, symbols: vec![(s, 1)] }
    }

    /// Builds an angle from raw parts, normalizing the quarter turns and
    /// dropping zero coefficients.
    pub fn from_parts(turns: i64, symbols: impl IntoIterator<Item = (Symbol, i32)>) -> Angle {
        let mut acc: BTreeMap<Symbol, i64> = BTreeMap::new();
        for (s, c) in symbols {
            *acc.entry(s).or_insert(0) += c as i64;
        }
        Angle {
            quarter_turns: turns.rem_euclid(4) as u8,
            symbols: acc.into_iter().filter(|&(_, c)| c != 0).map(|(s, c)| (s, c as i32)).collect(),
        }
    }

    pub fn quarter_turns(&self) -> u8 {
        self.quarter_turns
    }

    pub fn symbols(&self) -> &[(Symbol, i32)] {
        &self.symbols
    }

    pub fn is_concrete(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_concrete() && self.quarter_turns == 0
    }

    pub fn is_pi(&self) -> bool {
        self.is_concrete() && self.quarter_turns == 2
    }

    /// Zero or π, i.e. a Pauli phase.
    pub fn is_pauli(&self) -> bool {
        self.is_concrete() && self.quarter_turns % 2 == 0
    }

    pub fn class(&self) -> AngleClass {
        if !self.is_concrete() {
            return AngleClass::Symbolic;
        }
        match self.quarter_turns {
            0 => AngleClass::Zero,
            1 => AngleClass::HalfPi,
            2 => AngleClass::Pi,
            _ => AngleClass::ThreeHalfPi,
        }
    }

    /// Numeric value in radians. `value_of` supplies a value for every symbol;
    /// `None` from it is reported back as the missing symbol.
    pub fn radians_with(&self, mut value_of: impl FnMut(Symbol) -> Option<f64>) -> Result<f64, Symbol> {
        let mut total = self.quarter_turns as f64 * FRAC_PI_2;
        for &(s, c) in &self.symbols {
            total += c as f64 * value_of(s).ok_or(s)?;
        }
        Ok(total)
    }

    /// Numeric value of a concrete angle.
    pub fn concrete_radians(&self) -> Option<f64> {
        self.is_concrete().then(|| self.quarter_turns as f64 * FRAC_PI_2)
    }
}

impl Add for &Angle {
    type Output = Angle;

    fn add(self, rhs: &Angle) -> Angle {
        Angle::from_parts(
            self.quarter_turns as i64 + rhs.quarter_turns as i64,
            self.symbols.iter().chain(rhs.symbols.iter()).copied(),
        )
    }
}

impl Add for Angle {
    type Output = Angle;

    fn add(self, rhs: Angle) -> Angle {
        &self + &rhs
    }
}

impl AddAssign<&Angle> for Angle {
    fn add_assign(&mut self, rhs: &Angle) {
        *self = &*self + rhs;
    }
}

impl Neg for &Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle {
            quarter_turns: ((4 - self.quarter_turns) % 4),
            symbols: self.symbols.iter().map(|&(s, c)| (s, -c)).collect(),
        }
    }
}

impl Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        -&self
    }
}

impl Sub for &Angle {
    type Output = Angle;

    fn sub(self, rhs: &Angle) -> Angle {
        self + &(-rhs)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.quarter_turns {
            0 => "0",
            1 => "π/2",
            2 => "π",
            _ => "3π/2",
        };
        if self.symbols.is_empty() {
            return f.write_str(base);
        }
        let mut first = true;
        if self.quarter_turns != 0 {
            f.write_str(base)?;
            first = false;
        }
        for &(Symbol(s), c) in &self.symbols {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            match c.abs() {
                1 => write!(f, "{sign}a{s}")?,
                k => write!(f, "{sign}{k}a{s}")?,
            }
            first = false;
        }
        Ok(())
    }
}
