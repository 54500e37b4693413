//! Exact rational bounding suite for the "spread n points in the unit square"
//! problem: maximize the minimum squared pairwise distance gamma of n points
//! in [0,1]^2.
//!
//! Everything here runs over arbitrary-precision rationals; no floating point
//! enters any certified path. The crate provides:
//!
//! * [`model`] — variables, sparse linear expressions, constraints, LP and SDP
//!   model containers, feasibility checking with exact slacks.
//! * [`envelope`] — concave envelopes of (x_j - x_i)^2 over boxes, triangles
//!   and general convex polygons, via exact upper convex hulls.
//! * [`relax`] — builders for the twelve named relaxations, clique cuts for
//!   the boolean-quadric region, block rescaling for partitioned instances,
//!   and diagonal ordering cuts.
//! * [`simplex`] — an exact bounded-variable primal simplex (Bland's rule,
//!   two phases, deterministic pivoting) with dual multiplier extraction,
//!   plus clique-cut separation and row generation.
//! * [`certify`] — closed-form bound values, feasible points attaining them,
//!   hand-checkable dual aggregation recipes, exact LDL^T positive
//!   semidefiniteness verification, and decimal radius conversion.
//! * [`io`] — LP-format and sparse SDPA export (round-trip safe through
//!   exact-value comments), bound tables, CSV and SVG emission, and the
//!   bundled table of best known packing values.
//!
//! The `cpbounds` binary exposes build/solve/verify/table/export/plot
//! subcommands over the same APIs.

pub mod certify;
pub mod envelope;
pub mod io;
pub mod model;
pub mod relax;
pub mod simplex;

pub use model::{Constraint, FeasiblePoint, LinExpr, LinearModel, Rat, SdpModel, Sense, VarId};
pub use relax::RelaxationId;
