//! Exact discrete optimum by linear programming, and canonical-menu searches against it.

mod gap;
mod lp;
pub mod simplex;

pub use gap::{best_family_prices, menu_grid_search, optimality_gap, weakly_decreasing, GapRow, GapTable, GridSearchResult};
pub use lp::{build_lp, lp_solve, Assignment, Constraint, ConstraintKind, LPProblem, LPSolution};
pub use simplex::LpStatus;
