//! Exact LP solving and certificate checking.
//!
//! The solver is a bounded-variable primal simplex over arbitrary-precision
//! rationals with a full tableau. Pivoting follows Bland's rule (first
//! eligible entering column in a fixed column order, smallest basis column
//! on leaving ties), which guarantees termination; bound flips are taken
//! only when the entering variable's own range is strictly the tightest
//! limit, and such flips strictly improve the objective. Phase one adds an
//! artificial column per initially violated row and drives their sum to
//! zero.
//!
//! Large models are solved through row subsetting: start from the rows with
//! small support, solve, pull in violated excluded rows in deterministic
//! batches, and repeat until the subset optimum is feasible for the whole
//! model. Dropped rows receive zero multipliers, so the returned dual
//! vector certifies the full model.
//!
//! Every optimal result is replayed before it is returned: the primal point
//! is re-checked against every row and bound, and the dual vector is fed
//! through [`aggregate_bound`], which must reproduce the objective value
//! exactly. A result that fails either check is reported as an error, never
//! returned as an optimum.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{rint, Block, FeasiblePoint, LinExpr, LinearModel, ModelError, Rat, Sense, VarId};
use crate::relax::{
    apply_bnd_mapping, build_multi_row, clique_cut, partition_indices, CutStrategy, IndexPartition,
    RelaxError, RelaxationId,
};

/// Bit-size ceiling for tableau entries; exceeding it aborts the solve.
const BLOWUP_BITS: u64 = 1_000_000;
/// Row-count threshold above which the solver works on row subsets.
const SIFT_ROWS: usize = 320;
/// Support size that puts a row into the initial working subset.
const SIFT_SUPPORT: usize = 8;
/// Maximum excluded rows pulled in per subsetting round.
const SIFT_BATCH: usize = 64;
/// Hard cap on simplex pivots per subproblem.
const PIVOT_LIMIT: u64 = 2_000_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("tableau entries exceeded {BLOWUP_BITS} bits")]
    NumericBlowup,
    #[error("iteration limit exceeded: {0}")]
    IterationLimit(String),
    #[error("optimal basis failed certificate replay: {0}")]
    CertificateMismatch(String),
    #[error("internal solver invariant broken: {0}")]
    Internal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Certificate(#[from] CertError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of an exact solve. On `Optimal` the point, value and duals are
/// present and already replayed; on `Unbounded` the improving ray is
/// returned instead.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub value: Option<Rat>,
    pub primal: Option<FeasiblePoint>,
    /// Per-row multipliers, aligned with `model.constraints`. Sign
    /// convention: the multiplier applies to the row rewritten in `<=`
    /// form, so inequality multipliers are nonnegative; equality rows may
    /// carry either sign.
    pub duals: Option<Vec<Rat>>,
    /// Structural direction of unboundedness.
    pub ray: Option<FeasiblePoint>,
    pub pivots: u64,
}

impl SolveResult {
    /// Nonzero multipliers keyed by row tag.
    pub fn duals_by_tag(&self, model: &LinearModel) -> Vec<(String, Rat)> {
        let mut out = Vec::new();
        if let Some(duals) = &self.duals {
            for (c, d) in model.constraints.iter().zip(duals) {
                if !d.is_zero() {
                    out.push((c.tag.clone(), d.clone()));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Dual aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("no row tagged {0} in the model")]
    KeyError(String),
    #[error("multiplier for inequality row {0} is negative")]
    SignError(String),
    #[error("aggregated gamma coefficient {0} is not positive")]
    BadGammaCoefficient(Rat),
    #[error("residual coefficient on {0} has no finite bound to cancel against")]
    UnboundedResidual(VarId),
    #[error("aggregation proves {implied}, above the claimed {claimed}")]
    LooseBound { implied: Rat, claimed: Rat },
}

/// A claimed upper bound on gamma together with the row multipliers that
/// are supposed to prove it.
#[derive(Debug, Clone)]
pub struct AggregationRecipe {
    pub multipliers: Vec<(String, Rat)>,
    pub claimed: Rat,
}

/// Combines rows of `model` with the given multipliers and returns the
/// implied upper bound on gamma.
///
/// Each row is rewritten in `<=` form; inequality multipliers must be
/// nonnegative (equality rows may be scaled by either sign). In the
/// combined inequality the gamma coefficient must be positive; every other
/// leftover variable coefficient is canceled against the variable's finite
/// lower bound (positive residual) or upper bound (negative residual).
pub fn aggregate_bound(
    model: &LinearModel,
    multipliers: &[(String, Rat)],
) -> Result<Rat, CertError> {
    let mut combined = LinExpr::new();
    let mut rhs = Rat::zero();
    for (tag, lambda) in multipliers {
        let (_, row) = model
            .constraint_by_tag(tag)
            .ok_or_else(|| CertError::KeyError(tag.clone()))?;
        let sign = match row.sense {
            Sense::Le => Rat::one(),
            Sense::Ge => -Rat::one(),
            Sense::Eq => Rat::one(),
        };
        if row.sense != Sense::Eq && lambda.is_negative() {
            return Err(CertError::SignError(tag.clone()));
        }
        let scale = lambda * &sign;
        combined.add_scaled(&row.expr, &scale);
        rhs += &scale * &row.rhs;
    }
    rhs -= &combined.constant;

    let gamma_coeff = combined.coeff(VarId::Gamma);
    if !gamma_coeff.is_positive() {
        return Err(CertError::BadGammaCoefficient(gamma_coeff));
    }
    for (v, rho) in combined.iter() {
        if *v == VarId::Gamma {
            continue;
        }
        let decl = model.decl(*v).expect("validated model declares all vars");
        if rho.is_positive() {
            match &decl.lower {
                Some(l) => rhs -= rho * l,
                None => return Err(CertError::UnboundedResidual(*v)),
            }
        } else {
            match &decl.upper {
                Some(u) => rhs -= rho * u,
                None => return Err(CertError::UnboundedResidual(*v)),
            }
        }
    }
    Ok(rhs / gamma_coeff)
}

/// Checks an aggregation recipe: the implied bound must exist and be at
/// most the claimed bound. Returns the implied bound on success.
pub fn dual_certificate_check(
    model: &LinearModel,
    recipe: &AggregationRecipe,
) -> Result<Rat, CertError> {
    let implied = aggregate_bound(model, &recipe.multipliers)?;
    if implied <= recipe.claimed {
        Ok(implied)
    } else {
        Err(CertError::LooseBound {
            implied,
            claimed: recipe.claimed.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Tableau
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
    /// Free variable resting at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack(usize),
    Artificial,
}

struct Col {
    kind: ColKind,
    lower: Option<Rat>,
    upper: Option<Rat>,
}

impl Col {
    fn fixed(&self) -> bool {
        matches!((&self.lower, &self.upper), (Some(l), Some(u)) if l == u)
    }
}

struct Tableau {
    cols: Vec<Col>,
    /// Tableau rows (basis inverse times constraint matrix).
    t: Vec<Vec<Rat>>,
    /// Current values of basic variables, by row.
    xb: Vec<Rat>,
    /// Basic column of each row.
    basis: Vec<usize>,
    /// Which column is basic in which row.
    row_of: Vec<Option<usize>>,
    /// Resting side of each nonbasic column.
    side: Vec<Side>,
    /// Reduced costs for the current phase objective.
    zrow: Vec<Rat>,
    costs: Vec<Rat>,
    pivots: u64,
}

enum RunEnd {
    Optimal,
    Unbounded { col: usize, up: bool },
}

impl Tableau {
    fn nonbasic_value(&self, j: usize) -> Rat {
        match self.side[j] {
            Side::Lower => self.cols[j].lower.clone().expect("lower side has bound"),
            Side::Upper => self.cols[j].upper.clone().expect("upper side has bound"),
            Side::Zero => Rat::zero(),
        }
    }

    fn value_of(&self, j: usize) -> Rat {
        match self.row_of[j] {
            Some(r) => self.xb[r].clone(),
            None => self.nonbasic_value(j),
        }
    }

    fn recompute_zrow(&mut self) {
        let n = self.cols.len();
        self.zrow = self.costs.clone();
        for (i, row) in self.t.iter().enumerate() {
            let cb = &self.costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..n {
                if !row[j].is_zero() {
                    let delta = cb * &row[j];
                    self.zrow[j] -= delta;
                }
            }
        }
    }

    fn entering(&self) -> Option<(usize, bool)> {
        for j in 0..self.cols.len() {
            if self.row_of[j].is_some() || self.cols[j].fixed() {
                continue;
            }
            let d = &self.zrow[j];
            match self.side[j] {
                Side::Lower if d.is_positive() => return Some((j, true)),
                Side::Upper if d.is_negative() => return Some((j, false)),
                Side::Zero if d.is_positive() => return Some((j, true)),
                Side::Zero if d.is_negative() => return Some((j, false)),
                _ => {}
            }
        }
        None
    }

    fn run(&mut self) -> Result<RunEnd, SolveError> {
        loop {
            let Some((j, up)) = self.entering() else {
                return Ok(RunEnd::Optimal);
            };
            self.pivots += 1;
            if self.pivots > PIVOT_LIMIT {
                return Err(SolveError::IterationLimit(format!(
                    "{PIVOT_LIMIT} pivots"
                )));
            }

            // Own range limit of the entering variable.
            let v_j = self.nonbasic_value(j);
            let own: Option<Rat> = if up {
                self.cols[j].upper.as_ref().map(|u| u - &v_j)
            } else {
                self.cols[j].lower.as_ref().map(|l| &v_j - l)
            };

            // Row limits.
            let mut best: Option<Rat> = own;
            let mut best_row: Option<usize> = None;
            for i in 0..self.t.len() {
                let w = &self.t[i][j];
                if w.is_zero() {
                    continue;
                }
                // Basic value moves at rate -delta * w per unit step.
                let rate_pos = (up && w.is_negative()) || (!up && w.is_positive());
                let bc = &self.cols[self.basis[i]];
                let lim: Option<Rat> = if rate_pos {
                    bc.upper.as_ref().map(|ub| {
                        let gap = ub - &self.xb[i];
                        let rate = if up { -w.clone() } else { w.clone() };
                        gap / rate
                    })
                } else {
                    bc.lower.as_ref().map(|lb| {
                        let gap = &self.xb[i] - lb;
                        let rate = if up { w.clone() } else { -w.clone() };
                        gap / rate
                    })
                };
                let Some(l) = lim else { continue };
                debug_assert!(!l.is_negative(), "negative ratio limit");
                let replace = match (&best, best_row) {
                    (None, _) => true,
                    (Some(b), None) => l <= *b,
                    (Some(b), Some(r)) => l < *b || (l == *b && self.basis[i] < self.basis[r]),
                };
                if replace {
                    best = Some(l);
                    best_row = Some(i);
                }
            }

            let Some(delta) = best else {
                return Ok(RunEnd::Unbounded { col: j, up });
            };

            // Move values.
            if !delta.is_zero() {
                for i in 0..self.t.len() {
                    let w = &self.t[i][j];
                    if w.is_zero() {
                        continue;
                    }
                    let step = if up { w * &delta } else { -(w * &delta) };
                    self.xb[i] -= step;
                }
            }
            let new_val = if up { &v_j + &delta } else { &v_j - &delta };

            match best_row {
                None => {
                    // Bound flip: the entering variable crosses its range.
                    self.side[j] = if up { Side::Upper } else { Side::Lower };
                }
                Some(r) => {
                    let leaving = self.basis[r];
                    let w_r_neg = self.t[r][j].is_negative();
                    let rate_pos = (up && w_r_neg) || (!up && !w_r_neg);
                    self.side[leaving] = if rate_pos { Side::Upper } else { Side::Lower };
                    self.row_of[leaving] = None;
                    self.basis[r] = j;
                    self.row_of[j] = Some(r);
                    self.xb[r] = new_val;
                    self.eliminate(r, j)?;
                }
            }
        }
    }

    /// Gaussian elimination making column `j` the unit vector of row `r`.
    fn eliminate(&mut self, r: usize, j: usize) -> Result<(), SolveError> {
        let ncols = self.cols.len();
        let p = self.t[r][j].clone();
        debug_assert!(!p.is_zero(), "pivot on zero element");
        if !p.is_one() {
            let inv = Rat::one() / &p;
            for e in self.t[r].iter_mut() {
                if !e.is_zero() {
                    *e *= &inv;
                }
            }
        }
        let prow = self.t[r].clone();
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][j].clone();
            if f.is_zero() {
                continue;
            }
            for k in 0..ncols {
                if !prow[k].is_zero() {
                    let delta = &f * &prow[k];
                    self.t[i][k] -= delta;
                }
            }
        }
        let fz = self.zrow[j].clone();
        if !fz.is_zero() {
            for k in 0..ncols {
                if !prow[k].is_zero() {
                    let delta = &fz * &prow[k];
                    self.zrow[k] -= delta;
                }
            }
        }
        // Blowup guard on the freshly scaled pivot row.
        for e in &self.t[r] {
            if e.numer().bits() + e.denom().bits() > BLOWUP_BITS {
                return Err(SolveError::NumericBlowup);
            }
        }
        Ok(())
    }
}

/// Solves `model` restricted to the given constraint indices. Returned
/// duals align with `rows`.
fn solve_rows(model: &LinearModel, rows: &[usize]) -> Result<SolveResult, SolveError> {
    let structurals: Vec<VarId> = model.variables().map(|d| d.id).collect();
    let col_of: BTreeMap<VarId, usize> = structurals
        .iter()
        .enumerate()
        .map(|(k, v)| (*v, k))
        .collect();
    let n_struct = structurals.len();
    let m = rows.len();

    let mut cols: Vec<Col> = model
        .variables()
        .map(|d| Col {
            kind: ColKind::Structural,
            lower: d.lower.clone(),
            upper: d.upper.clone(),
        })
        .collect();
    for (k, &ri) in rows.iter().enumerate() {
        let (lower, upper) = match model.constraints[ri].sense {
            Sense::Le => (Some(Rat::zero()), None),
            Sense::Ge => (None, Some(Rat::zero())),
            Sense::Eq => (Some(Rat::zero()), Some(Rat::zero())),
        };
        cols.push(Col {
            kind: ColKind::Slack(k),
            lower,
            upper,
        });
    }

    // Initial nonbasic sides for structurals.
    let mut side: Vec<Side> = cols
        .iter()
        .map(|c| match (&c.lower, &c.upper) {
            (Some(_), _) => Side::Lower,
            (None, Some(_)) => Side::Upper,
            (None, None) => Side::Zero,
        })
        .collect();

    // Row data with the expression constant folded into the right side.
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut xb: Vec<Rat> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut artificial_of: Vec<Option<usize>> = vec![None; m];
    let mut art_specs: Vec<(usize, bool)> = Vec::new(); // (row, positive sigma)

    for (k, &ri) in rows.iter().enumerate() {
        let c = &model.constraints[ri];
        let b = &c.rhs - &c.expr.constant;
        let mut row = vec![Rat::zero(); n_struct + m];
        let mut r_i = b.clone();
        for (v, coeff) in c.expr.iter() {
            let j = col_of[v];
            row[j] = coeff.clone();
            let val = match side[j] {
                Side::Lower => cols[j].lower.clone().unwrap(),
                Side::Upper => cols[j].upper.clone().unwrap(),
                Side::Zero => Rat::zero(),
            };
            if !val.is_zero() {
                r_i -= coeff * &val;
            }
        }
        let sc = n_struct + k;
        row[sc] = Rat::one();
        let (sl, su) = (cols[sc].lower.clone(), cols[sc].upper.clone());
        let above = su.as_ref().is_some_and(|u| r_i > *u);
        let below = sl.as_ref().is_some_and(|l| r_i < *l);
        if above || below {
            // Park the slack at the violated bound and let an artificial
            // absorb the gap.
            let (parked, sigma_pos, tval) = if above {
                let u = su.unwrap();
                (Side::Upper, true, &r_i - &u)
            } else {
                let l = sl.unwrap();
                (Side::Lower, false, &l - &r_i)
            };
            side[sc] = parked;
            art_specs.push((k, sigma_pos));
            xb.push(tval);
            basis.push(usize::MAX); // patched once artificial columns exist
            artificial_of[k] = Some(art_specs.len() - 1);
        } else {
            side[sc] = Side::Lower; // irrelevant while basic
            xb.push(r_i);
            basis.push(sc);
        }
        t.push(row);
    }

    // Append artificial columns and patch rows.
    let n_art = art_specs.len();
    for (ai, &(k, sigma_pos)) in art_specs.iter().enumerate() {
        let ac = n_struct + m + ai;
        for (kk, row) in t.iter_mut().enumerate() {
            row.push(if kk == k {
                if sigma_pos {
                    Rat::one()
                } else {
                    -Rat::one()
                }
            } else {
                Rat::zero()
            });
        }
        cols.push(Col {
            kind: ColKind::Artificial,
            lower: Some(Rat::zero()),
            upper: None,
        });
        side.push(Side::Lower);
        basis[k] = ac;
        if !sigma_pos {
            // Scale the row so the basic artificial column reads +1.
            for e in t[k].iter_mut() {
                if !e.is_zero() {
                    *e = -e.clone();
                }
            }
        }
    }

    let ncols = cols.len();
    let mut row_of = vec![None; ncols];
    for (i, &bc) in basis.iter().enumerate() {
        row_of[bc] = Some(i);
    }

    let mut tab = Tableau {
        cols,
        t,
        xb,
        basis,
        row_of,
        side,
        zrow: vec![Rat::zero(); ncols],
        costs: vec![Rat::zero(); ncols],
        pivots: 0,
    };

    // Phase one: drive the artificial sum to zero.
    if n_art > 0 {
        for c in tab.costs.iter_mut() {
            *c = Rat::zero();
        }
        for j in 0..ncols {
            if matches!(tab.cols[j].kind, ColKind::Artificial) {
                tab.costs[j] = -Rat::one();
            }
        }
        tab.recompute_zrow();
        match tab.run()? {
            RunEnd::Optimal => {}
            RunEnd::Unbounded { .. } => {
                return Err(SolveError::Internal(
                    "phase one objective is bounded by construction".to_string(),
                ));
            }
        }
        let mut infeas = Rat::zero();
        for j in 0..ncols {
            if matches!(tab.cols[j].kind, ColKind::Artificial) {
                infeas += tab.value_of(j);
            }
        }
        if !infeas.is_zero() {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                value: None,
                primal: None,
                duals: None,
                ray: None,
                pivots: tab.pivots,
            });
        }
        for j in 0..ncols {
            if matches!(tab.cols[j].kind, ColKind::Artificial) {
                tab.cols[j].upper = Some(Rat::zero());
            }
        }
    }

    // Phase two.
    for c in tab.costs.iter_mut() {
        *c = Rat::zero();
    }
    for (v, coeff) in model.objective.iter() {
        tab.costs[col_of[v]] = coeff.clone();
    }
    tab.recompute_zrow();
    let end = tab.run()?;

    match end {
        RunEnd::Unbounded { col, up } => {
            // Structural direction: entering moves by +-1, basics react.
            let mut ray = FeasiblePoint::new();
            for v in &structurals {
                ray.set(*v, Rat::zero());
            }
            let unit = if up { Rat::one() } else { -Rat::one() };
            if col < n_struct {
                ray.set(structurals[col], unit.clone());
            }
            for i in 0..tab.t.len() {
                let w = &tab.t[i][col];
                if w.is_zero() {
                    continue;
                }
                let bc = tab.basis[i];
                if bc < n_struct {
                    let delta = -(&unit * w);
                    ray.set(structurals[bc], delta);
                }
            }
            Ok(SolveResult {
                status: SolveStatus::Unbounded,
                value: None,
                primal: None,
                duals: None,
                ray: Some(ray),
                pivots: tab.pivots,
            })
        }
        RunEnd::Optimal => {
            let mut point = FeasiblePoint::new();
            for (j, v) in structurals.iter().enumerate() {
                point.set(*v, tab.value_of(j));
            }
            let value = model.objective.eval(&point)?;
            let mut duals = Vec::with_capacity(m);
            for (k, &ri) in rows.iter().enumerate() {
                let d = &tab.zrow[n_struct + k];
                let lam = match model.constraints[ri].sense {
                    Sense::Le | Sense::Eq => -d.clone(),
                    Sense::Ge => d.clone(),
                };
                if model.constraints[ri].sense != Sense::Eq {
                    debug_assert!(
                        !lam.is_negative(),
                        "optimal multiplier has wrong sign on row {}",
                        model.constraints[ri].tag
                    );
                }
                duals.push(lam);
            }
            Ok(SolveResult {
                status: SolveStatus::Optimal,
                value: Some(value),
                primal: Some(point),
                duals: Some(duals),
                ray: None,
                pivots: tab.pivots,
            })
        }
    }
}

/// True when the model's objective is exactly `gamma`, which enables the
/// aggregation replay.
fn gamma_objective(model: &LinearModel) -> bool {
    model.objective.constant.is_zero()
        && model.objective.len() == 1
        && model.objective.coeff(VarId::Gamma).is_one()
}

/// Exact optimum of a linear model, with certified output.
///
/// Models with many rows are solved on growing row subsets; the final
/// answer is always exact for the full model. On `Optimal` the result has
/// been replayed: primal feasibility on every row and bound, and dual
/// aggregation reproducing the value exactly (for gamma objectives).
pub fn solve_exact(model: &LinearModel) -> Result<SolveResult, SolveError> {
    model.validate()?;
    let m = model.constraints.len();
    if m <= SIFT_ROWS {
        let rows: Vec<usize> = (0..m).collect();
        let res = solve_rows(model, &rows)?;
        return finalize(model, res, &rows);
    }

    let mut active: BTreeSet<usize> = (0..m)
        .filter(|&i| model.constraints[i].expr.len() <= SIFT_SUPPORT)
        .collect();
    loop {
        let rows: Vec<usize> = active.iter().copied().collect();
        let res = solve_rows(model, &rows)?;
        match res.status {
            SolveStatus::Infeasible => return Ok(res),
            SolveStatus::Optimal => {
                let point = res.primal.as_ref().expect("optimal has point");
                let mut violated: Vec<(Rat, usize)> = Vec::new();
                for i in 0..m {
                    if active.contains(&i) {
                        continue;
                    }
                    let slack = model.constraints[i].slack(point)?;
                    if slack.is_negative() {
                        violated.push((slack, i));
                    }
                }
                if violated.is_empty() {
                    return finalize(model, res, &rows);
                }
                violated.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
                for (_, i) in violated.into_iter().take(SIFT_BATCH) {
                    active.insert(i);
                }
            }
            SolveStatus::Unbounded => {
                let ray = res.ray.as_ref().expect("unbounded has ray");
                // An excluded row kills the ray if it is violated along it.
                let mut cutters: Vec<(Rat, usize)> = Vec::new();
                for i in 0..m {
                    if active.contains(&i) {
                        continue;
                    }
                    let c = &model.constraints[i];
                    let mut along = Rat::zero();
                    for (v, coeff) in c.expr.iter() {
                        along += coeff * &ray.get(*v).unwrap_or_else(Rat::zero);
                    }
                    let measure = match c.sense {
                        Sense::Le => along.clone(),
                        Sense::Ge => -along.clone(),
                        Sense::Eq => along.abs(),
                    };
                    if measure.is_positive() {
                        cutters.push((-measure, i));
                    }
                }
                if cutters.is_empty() {
                    return Ok(res); // genuinely unbounded
                }
                cutters.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
                for (_, i) in cutters.into_iter().take(SIFT_BATCH) {
                    active.insert(i);
                }
            }
        }
    }
}

/// Scatter subset duals to full length and replay all certificates.
fn finalize(
    model: &LinearModel,
    res: SolveResult,
    rows: &[usize],
) -> Result<SolveResult, SolveError> {
    if res.status != SolveStatus::Optimal {
        return Ok(res);
    }
    let point = res.primal.as_ref().expect("optimal has point");
    let value = res.value.as_ref().expect("optimal has value");
    let report = model.check_feasible(point)?;
    if !report.ok() {
        return Err(SolveError::CertificateMismatch(format!(
            "optimal point violates {}",
            report.violations[0]
        )));
    }
    let sub_duals = res.duals.as_ref().expect("optimal has duals");
    let mut duals = vec![Rat::zero(); model.constraints.len()];
    for (k, &ri) in rows.iter().enumerate() {
        duals[ri] = sub_duals[k].clone();
    }
    if gamma_objective(model) {
        let mult: Vec<(String, Rat)> = model
            .constraints
            .iter()
            .zip(&duals)
            .filter(|(_, d)| !d.is_zero())
            .map(|(c, d)| (c.tag.clone(), d.clone()))
            .collect();
        let implied = aggregate_bound(model, &mult)?;
        if implied != *value {
            return Err(SolveError::CertificateMismatch(format!(
                "dual aggregation gives {implied}, primal value is {value}"
            )));
        }
    }
    Ok(SolveResult {
        duals: Some(duals),
        ..res
    })
}

// ---------------------------------------------------------------------------
// Clique separation
// ---------------------------------------------------------------------------

/// A violated clique inequality found by separation, in the (possibly
/// rescaled) space the values were given in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatedCut {
    pub block: Block,
    pub indices: Vec<u32>,
    pub alpha: i64,
    pub violation: Rat,
}

fn cut_lhs(v: &[Rat], vv: &dyn Fn(u32, u32) -> Rat, set: &[u32], alpha: i64) -> Rat {
    let mut s = Rat::zero();
    for &i in set {
        s += &v[(i - 1) as usize];
    }
    let mut q = Rat::zero();
    for (a, &i) in set.iter().enumerate() {
        for &j in set.iter().skip(a + 1) {
            q += vv(i, j);
        }
    }
    rint(alpha) * s - q
}

fn best_alpha_for(
    v: &[Rat],
    vv: &dyn Fn(u32, u32) -> Rat,
    set: &[u32],
    with_rhs: bool,
) -> (i64, Rat) {
    let m = set.len() as i64;
    let mut best: Option<(i64, Rat)> = None;
    // The left side is concave in alpha, so only the integers around the
    // unconstrained maximizer matter; with few candidates checking the
    // whole range is simplest and exact.
    for alpha in 1..=(m - 2) {
        let mut viol = cut_lhs(v, vv, set, alpha);
        if with_rhs {
            viol -= crate::model::rat(alpha * (alpha + 1), 2);
        }
        match &best {
            Some((_, b)) if *b >= viol => {}
            _ => best = Some((alpha, viol)),
        }
    }
    best.expect("set size at least 3")
}

/// Exhaustively separates the most violated clique inequality over all
/// index sets of size 3..=max_m. Values are for one block, `v[i-1]` the
/// coordinate and `vv(i, j)` the product entry. Returns `None` if no cut
/// is violated.
pub fn separate_clique_exhaustive(
    block: Block,
    v: &[Rat],
    vv: &dyn Fn(u32, u32) -> Rat,
    max_m: u32,
) -> Option<SeparatedCut> {
    let n = v.len() as u32;
    let mut best: Option<SeparatedCut> = None;
    let mut stack: Vec<u32> = Vec::new();
    fn rec(
        start: u32,
        n: u32,
        max_m: u32,
        stack: &mut Vec<u32>,
        v: &[Rat],
        vv: &dyn Fn(u32, u32) -> Rat,
        block: Block,
        best: &mut Option<SeparatedCut>,
    ) {
        if stack.len() >= 3 {
            let (alpha, viol) = best_alpha_for(v, vv, stack, true);
            if viol.is_positive() && best.as_ref().map_or(true, |b| viol > b.violation) {
                *best = Some(SeparatedCut {
                    block,
                    indices: stack.clone(),
                    alpha,
                    violation: viol,
                });
            }
        }
        if (stack.len() as u32) < max_m {
            for i in start..=n {
                stack.push(i);
                rec(i + 1, n, max_m, stack, v, vv, block, best);
                stack.pop();
            }
        }
    }
    rec(1, n, max_m.min(n), &mut stack, v, vv, block, &mut best);
    best
}

/// Greedy separation for larger instances: indices are considered in
/// decreasing coordinate order and added while they increase the best
/// violation.
pub fn separate_clique_greedy(
    block: Block,
    v: &[Rat],
    vv: &dyn Fn(u32, u32) -> Rat,
    max_m: u32,
) -> Option<SeparatedCut> {
    let n = v.len() as u32;
    if n < 3 {
        return None;
    }
    let mut order: Vec<u32> = (1..=n).collect();
    order.sort_by(|a, b| {
        v[(*b - 1) as usize]
            .cmp(&v[(*a - 1) as usize])
            .then(a.cmp(b))
    });
    let mut set: Vec<u32> = order[..3].to_vec();
    set.sort_unstable();
    let (mut alpha, mut viol) = best_alpha_for(v, vv, &set, true);
    while (set.len() as u32) < max_m.min(n) {
        let mut gain: Option<(Rat, i64, u32)> = None;
        for &k in &order {
            if set.contains(&k) {
                continue;
            }
            let mut trial = set.clone();
            trial.push(k);
            trial.sort_unstable();
            let (a, w) = best_alpha_for(v, vv, &trial, true);
            if w > viol && gain.as_ref().map_or(true, |(g, _, _)| w > *g) {
                gain = Some((w, a, k));
            }
        }
        match gain {
            Some((w, a, k)) => {
                set.push(k);
                set.sort_unstable();
                alpha = a;
                viol = w;
            }
            None => break,
        }
    }
    if viol.is_positive() {
        Some(SeparatedCut {
            block,
            indices: set,
            alpha,
            violation: viol,
        })
    } else {
        None
    }
}

/// Separation entry point: exhaustive up to 12 coordinates, greedy above.
pub fn separate_clique(
    block: Block,
    v: &[Rat],
    vv: &dyn Fn(u32, u32) -> Rat,
    max_m: u32,
) -> Option<SeparatedCut> {
    if v.len() <= 12 {
        separate_clique_exhaustive(block, v, vv, max_m)
    } else {
        separate_clique_greedy(block, v, vv, max_m)
    }
}

/// Ray variant: finds a clique inequality whose left side grows along the
/// given direction values (the constant right side plays no role for a
/// recession direction).
pub fn separate_clique_ray(
    block: Block,
    v: &[Rat],
    vv: &dyn Fn(u32, u32) -> Rat,
    max_m: u32,
) -> Option<SeparatedCut> {
    let n = v.len() as u32;
    let mut best: Option<SeparatedCut> = None;
    let sets = all_sets(n, max_m.min(n));
    for set in &sets {
        let (alpha, viol) = best_alpha_for(v, vv, set, false);
        if viol.is_positive() && best.as_ref().map_or(true, |b| viol > b.violation) {
            best = Some(SeparatedCut {
                block,
                indices: set.clone(),
                alpha,
                violation: viol,
            });
        }
    }
    best
}

fn all_sets(n: u32, max_m: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(start: u32, n: u32, max_m: u32, stack: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if stack.len() >= 3 {
            out.push(stack.clone());
        }
        if (stack.len() as u32) < max_m {
            for i in start..=n {
                stack.push(i);
                rec(i + 1, n, max_m, stack, out);
                stack.pop();
            }
        }
    }
    rec(1, n, max_m, &mut stack, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Row generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RowGenConfig {
    pub max_rounds: u32,
    /// Force exhaustive or greedy separation; `None` picks exhaustive for
    /// n <= 12.
    pub force_exhaustive: Option<bool>,
}

impl Default for RowGenConfig {
    fn default() -> Self {
        RowGenConfig {
            max_rounds: 500,
            force_exhaustive: None,
        }
    }
}

#[derive(Debug)]
pub struct RowGenOutcome {
    pub result: SolveResult,
    /// Master model including every separated cut.
    pub model: LinearModel,
    pub rounds: u32,
    pub cuts_added: usize,
}

fn hat_values<'a>(
    point: &'a FeasiblePoint,
    block: Block,
    n: u32,
    part: Option<&'a IndexPartition>,
) -> (Vec<Rat>, impl Fn(u32, u32) -> Rat + 'a) {
    let scale = move |v: VarId| -> Rat {
        match part {
            Some(p) => p.hat_scale(v),
            None => rint(1),
        }
    };
    let v: Vec<Rat> = (1..=n)
        .map(|i| {
            let id = VarId::coord(block, i);
            point.get(id).unwrap_or_else(Rat::zero) * scale(id)
        })
        .collect();
    let vv = move |i: u32, j: u32| -> Rat {
        let id = VarId::product(block, i, j);
        point.get(id).unwrap_or_else(Rat::zero) * scale(id)
    };
    (v, vv)
}

/// Cutting-plane solve of a multi-row relaxation: start from the cut-free
/// master, alternate exact solves with clique separation until no cut of
/// the model's family is violated. The final result is therefore the exact
/// optimum over the model's full cut set.
pub fn solve_with_row_generation(
    id: RelaxationId,
    n: u32,
    cfg: &RowGenConfig,
) -> Result<RowGenOutcome, SolveError> {
    let part = partition_indices(n)?;
    let mut master = build_multi_row(id, n, CutStrategy::RowGeneration)?;
    let mapped = matches!(id, RelaxationId::MtBndClique | RelaxationId::MtCombTri);
    let blocks: &[Block] = match id {
        RelaxationId::MtClique | RelaxationId::MtBndClique => &[Block::X, Block::Y],
        _ => &[Block::Y],
    };
    let max_m = match id {
        RelaxationId::MtOrdTri | RelaxationId::MtCombTri => 3,
        _ => n,
    };
    let exhaustive = cfg.force_exhaustive.unwrap_or(n <= 12);
    let map_part = if mapped { Some(&part) } else { None };

    let mut cuts_added = 0usize;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for round in 1..=cfg.max_rounds {
        let res = solve_exact(&master)?;
        let found: Vec<SeparatedCut> = match res.status {
            SolveStatus::Infeasible => {
                return Ok(RowGenOutcome {
                    result: res,
                    model: master,
                    rounds: round,
                    cuts_added,
                })
            }
            SolveStatus::Optimal => {
                let point = res.primal.as_ref().expect("optimal has point");
                let mut found = Vec::new();
                for &block in blocks {
                    let (v, vv) = hat_values(point, block, n, map_part);
                    let cut = if exhaustive {
                        separate_clique_exhaustive(block, &v, &vv, max_m)
                    } else {
                        separate_clique_greedy(block, &v, &vv, max_m)
                    };
                    if let Some(c) = cut {
                        found.push(c);
                    }
                }
                if found.is_empty() {
                    return Ok(RowGenOutcome {
                        result: res,
                        model: master,
                        rounds: round,
                        cuts_added,
                    });
                }
                found
            }
            SolveStatus::Unbounded => {
                let ray = res.ray.as_ref().expect("unbounded has ray");
                let mut found = Vec::new();
                for &block in blocks {
                    let (v, vv) = hat_values(ray, block, n, map_part);
                    if let Some(c) = separate_clique_ray(block, &v, &vv, max_m) {
                        found.push(c);
                    }
                }
                if found.is_empty() {
                    return Ok(RowGenOutcome {
                        result: res,
                        model: master,
                        rounds: round,
                        cuts_added,
                    });
                }
                found
            }
        };
        for cut in found {
            let mut row = clique_cut(cut.block, &cut.indices, cut.alpha)?;
            if mapped {
                row = apply_bnd_mapping(&row, &part)?;
            }
            if !seen.insert(row.tag.clone()) {
                return Err(SolveError::Internal(format!(
                    "separated an already present cut {}",
                    row.tag
                )));
            }
            master.push(row);
            cuts_added += 1;
        }
    }
    Err(SolveError::IterationLimit(format!(
        "row generation did not converge in {} rounds",
        cfg.max_rounds
    )))
}
