//! Deterministic execution budgets.
//!
//! Wall-clock timeouts make search outcomes machine-dependent, so every
//! budgeted computation (tactic application, rewriting, resolution, the
//! search loop itself) is metered in virtual microseconds instead. Each
//! primitive step charges a fixed cost chosen so that one virtual second
//! roughly matches one real second on commodity hardware. Exceeding the
//! budget surfaces as a `Timeout` outcome, never as a hang.

use std::time::Duration;

/// Virtual cost of one rewrite step (match + replace).
pub const COST_REWRITE_STEP: u64 = 20;
/// Virtual cost of one resolution inference attempt.
pub const COST_RESOLUTION_STEP: u64 = 40;
/// Virtual cost of evaluating one truth-table row.
pub const COST_TAUT_ROW: u64 = 2;
/// Flat entry cost of any tactic application.
pub const COST_TACTIC_BASE: u64 = 50;
/// Virtual cost of scoring one stored vector during prediction.
pub const COST_SCORE_VECTOR: u64 = 4;
/// Virtual cost of creating one search node.
pub const COST_NODE_CREATE: u64 = 80;
/// Virtual cost of one frontier selection.
pub const COST_NODE_SELECT: u64 = 8;
/// Virtual cost of deleting one node.
pub const COST_NODE_DELETE: u64 = 10;

/// Raised when a metered computation runs out of budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded;

/// A virtual clock with a fixed budget, denominated in microseconds.
#[derive(Debug, Clone)]
pub struct Meter {
    budget: u64,
    used: u64,
}

impl Meter {
    pub fn new(budget: Duration) -> Meter {
        Meter {
            budget: budget.as_micros() as u64,
            used: 0,
        }
    }

    /// A meter that never trips. Used by replay, where determinism of the
    /// outcome matters but the step caps inside each tactic still bound work.
    pub fn unlimited() -> Meter {
        Meter {
            budget: u64::MAX,
            used: 0,
        }
    }

    pub fn charge(&mut self, units: u64) -> Result<(), BudgetExceeded> {
        self.used = self.used.saturating_add(units);
        if self.used > self.budget {
            Err(BudgetExceeded)
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used > self.budget
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charges_accumulate_until_budget() {
        let mut m = Meter::new(Duration::from_micros(100));
        assert!(m.charge(60).is_ok());
        assert!(m.charge(40).is_ok());
        assert_eq!(m.charge(1), Err(BudgetExceeded));
        assert!(m.exhausted());
    }

    #[test]
    fn unlimited_never_trips() {
        let mut m = Meter::unlimited();
        for _ in 0..1000 {
            assert!(m.charge(u64::MAX / 2000).is_ok());
        }
    }
}
