//! Soundness checks of rewrites against the semantics oracle.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;

use crate::angle::Symbol;
use crate::diagram::Diagram;
use crate::semantics::{scalar_deviation, Oracle, SemanticsError};

/// Relative magnitude below which an evaluation counts as the zero map.
pub const ZERO_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Equal up to a nonzero scalar under every assignment tried.
    Sound { deviation: f64 },
    /// The maps differ; `deviation` is `None` when exactly one side is zero.
    Violation { deviation: Option<f64> },
    /// The original diagram is the zero map, where scalars carry no
    /// information.
    Degenerate,
    /// A diagram exceeds the oracle's size cap.
    TooLarge,
}

impl Verdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, Verdict::Violation { .. })
    }
}

/// Uniform random values in `[0, 2π)` for every symbol of the diagrams.
pub fn random_assignment<R: Rng + ?Sized>(diagrams: &[&Diagram], rng: &mut R) -> BTreeMap<Symbol, f64> {
    let mut out = BTreeMap::new();
    for d in diagrams {
        for s in d.symbols() {
            out.entry(s).or_insert_with(|| rng.gen_range(0.0..TAU));
        }
    }
    out
}

/// Compares `before` and `after` under `trials` independent random symbol
/// assignments.
pub fn check_rewrite<R: Rng + ?Sized>(
    oracle: &Oracle,
    before: &Diagram,
    after: &Diagram,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Verdict {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let assignment = random_assignment(&[before, after], rng);
        let evals = oracle.evaluate(before, &assignment).and_then(|a| Ok((a, oracle.evaluate(after, &assignment)?)));
        let (a, b) = match evals {
            Ok(pair) => pair,
            Err(SemanticsError::TooLarge { .. }) => return Verdict::TooLarge,
            Err(SemanticsError::MissingSymbol(s)) => unreachable!("assignment covers {s:?}"),
        };
        if a.is_zero(ZERO_REL_TOL) {
            return Verdict::Degenerate;
        }
        if b.is_zero(ZERO_REL_TOL) {
            return Verdict::Violation { deviation: None };
        }
        match scalar_deviation(&a.matrix, &b.matrix, 0.0) {
            Ok(Some(dev)) if dev < tol => worst = worst.max(dev),
            Ok(Some(dev)) => return Verdict::Violation { deviation: Some(dev) },
            _ => return Verdict::Violation { deviation: None },
        }
    }
    Verdict::Sound { deviation: worst }
}
