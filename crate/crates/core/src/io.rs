//! Export and reporting: LP-format text that survives a round trip through
//! exact-value comments, sparse SDPA output for the moment relaxations, the
//! bundled table of best known packing values, bound tables with CSV
//! rendering, and a small deterministic SVG line chart.
//!
//! Solver-facing bodies are decimal; every coefficient additionally travels
//! in a comment as an exact rational, and the reader reconstructs models
//! from those comments alone, so importing an exported model reproduces it
//! coefficient for coefficient.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::Path;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::certify::{closed_form_bound, ClosedForm};
use crate::model::{
    decimal_string, parse_rat, Constraint, LinExpr, LinearModel, Rat, SdpModel, Sense, VarId,
};
use crate::relax::{build_any, AnyModel, Family, RelaxationId};
use crate::simplex::{solve_with_row_generation, RowGenConfig, SolveStatus};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("writing {path} failed: {source}")]
    IoFailure {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("exact value for n = {n} exceeds the value for n = {prev}")]
    MonotonicityViolation { n: u32, prev: u32 },
    #[error("{id} has no {what} at n = {n}")]
    Unavailable {
        id: RelaxationId,
        n: u32,
        what: &'static str,
    },
    #[error("{id} at n = {n} solves to {solved} but the recorded value is {closed}")]
    MismatchDetected {
        id: RelaxationId,
        n: u32,
        solved: Rat,
        closed: Rat,
    },
    #[error("refusing to chart an empty table")]
    EmptyTable,
    #[error(transparent)]
    Relax(#[from] crate::relax::RelaxError),
    #[error(transparent)]
    Solve(#[from] crate::simplex::SolveError),
    #[error(transparent)]
    Certify(#[from] crate::certify::CertifyError),
}

/// Significant digits used for table and chart decimals.
pub const DISPLAY_SIG: usize = 12;
/// Significant digits used for solver-facing export bodies.
const EXPORT_SIG: usize = 17;

fn write_text(path: impl AsRef<Path>, text: &str) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|source| IoError::IoFailure {
        path: path.display().to_string(),
        source,
    })
}

/// `p` or `p/q`, the forms `parse_rat` reads back exactly.
fn rat_text(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal with at most `sig` significant digits, trailing zeros trimmed.
/// Exact whenever the denominator divides a power of ten within `sig`.
fn decimal_short(r: &Rat, sig: usize) -> String {
    let mut s = decimal_string(r, sig);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

// ---------------------------------------------------------------------------
// LP text format
// ---------------------------------------------------------------------------

/// Body rendering of a linear expression: signed decimal coefficients in
/// canonical variable order, unit coefficients elided.
fn lp_terms(expr: &LinExpr) -> String {
    let mut s = String::new();
    for (v, c) in expr.iter() {
        if s.is_empty() {
            if c.is_negative() {
                s.push_str("- ");
            }
        } else if c.is_negative() {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        let a = c.abs();
        if !a.is_one() {
            let _ = write!(s, "{} ", decimal_short(&a, EXPORT_SIG));
        }
        let _ = write!(s, "{v}");
    }
    s
}

/// Comment rendering: explicit `rational variable` pairs.
fn exact_terms(expr: &LinExpr) -> String {
    let mut s = String::new();
    for (v, c) in expr.iter() {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{} {v}", rat_text(c));
    }
    s
}

/// Row with any constant folded into the right-hand side.
fn folded(c: &Constraint) -> (LinExpr, Rat) {
    let mut expr = c.expr.clone();
    let rhs = &c.rhs - &expr.constant;
    expr.constant = Rat::zero();
    (expr, rhs)
}

/// Renders `model` as a CPLEX-LP-compatible document. Every row and bound
/// is preceded by a `\ exact:` comment carrying its rationals; constant
/// terms inside rows are folded into the right-hand side.
pub fn lp_text(model: &LinearModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "\\ unit-square spread relaxation, {} points", model.n);
    let _ = writeln!(s, "\\ exact: n {}", model.n);
    let _ = writeln!(s, "Maximize");
    let _ = writeln!(s, "\\ exact: objective: {}", exact_terms(&model.objective));
    let _ = writeln!(s, " obj: {}", lp_terms(&model.objective));
    let _ = writeln!(s, "Subject To");
    for c in &model.constraints {
        let (expr, rhs) = folded(c);
        let _ = writeln!(
            s,
            "\\ exact: row {}: {} {} {}",
            c.tag,
            exact_terms(&expr),
            c.sense,
            rat_text(&rhs)
        );
        let _ = writeln!(
            s,
            " {}: {} {} {}",
            c.tag,
            lp_terms(&expr),
            c.sense,
            decimal_short(&rhs, EXPORT_SIG)
        );
    }
    let _ = writeln!(s, "Bounds");
    for d in model.variables() {
        let lo = d.lower.as_ref().map(rat_text).unwrap_or("-inf".into());
        let hi = d.upper.as_ref().map(rat_text).unwrap_or("+inf".into());
        let _ = writeln!(s, "\\ exact: bound {}: {} {}", d.id, lo, hi);
        match (&d.lower, &d.upper) {
            (Some(l), Some(u)) => {
                let _ = writeln!(
                    s,
                    " {} <= {} <= {}",
                    decimal_short(l, EXPORT_SIG),
                    d.id,
                    decimal_short(u, EXPORT_SIG)
                );
            }
            (Some(l), None) => {
                let _ = writeln!(s, " {} >= {}", d.id, decimal_short(l, EXPORT_SIG));
            }
            (None, Some(u)) => {
                let _ = writeln!(s, " -infinity <= {} <= {}", d.id, decimal_short(u, EXPORT_SIG));
            }
            (None, None) => {
                let _ = writeln!(s, " {} free", d.id);
            }
        }
    }
    let _ = writeln!(s, "End");
    s
}

/// Writes [`lp_text`] to a file.
pub fn export_lp(model: &LinearModel, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_text(path, &lp_text(model))
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::ParseError {
        line,
        msg: msg.into(),
    }
}

fn parse_terms(tokens: &[&str], line: usize) -> Result<LinExpr, IoError> {
    if tokens.len() % 2 != 0 {
        return Err(parse_err(line, "dangling coefficient"));
    }
    let mut expr = LinExpr::new();
    for pair in tokens.chunks(2) {
        let coeff =
            parse_rat(pair[0]).map_err(|e| parse_err(line, format!("bad coefficient: {e}")))?;
        let var: VarId = pair[1]
            .parse()
            .map_err(|e| parse_err(line, format!("bad variable: {e}")))?;
        expr.add_term(var, coeff);
    }
    Ok(expr)
}

fn parse_sense(tok: &str, line: usize) -> Result<Sense, IoError> {
    match tok {
        "<=" => Ok(Sense::Le),
        ">=" => Ok(Sense::Ge),
        "=" => Ok(Sense::Eq),
        other => Err(parse_err(line, format!("bad sense token {other:?}"))),
    }
}

fn parse_opt_bound(tok: &str, line: usize) -> Result<Option<Rat>, IoError> {
    match tok {
        "-inf" | "+inf" => Ok(None),
        other => parse_rat(other)
            .map(Some)
            .map_err(|e| parse_err(line, format!("bad bound: {e}"))),
    }
}

/// Rebuilds a model from the `\ exact:` comments of an exported LP
/// document. The decimal body is ignored; the comments are the exact
/// source of truth.
pub fn parse_lp(text: &str) -> Result<LinearModel, IoError> {
    let mut model: Option<LinearModel> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let Some(rest) = raw.trim_start().strip_prefix("\\ exact:") else {
            continue;
        };
        let rest = rest.trim();
        if let Some(ns) = rest.strip_prefix("n ") {
            if model.is_some() {
                return Err(parse_err(line, "duplicate size header"));
            }
            let n: u32 = ns
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad size {ns:?}")))?;
            model = Some(LinearModel::new(n));
            continue;
        }
        let m = model
            .as_mut()
            .ok_or_else(|| parse_err(line, "exact data before the size header"))?;
        if let Some(body) = rest.strip_prefix("objective:") {
            let tokens: Vec<&str> = body.split_whitespace().collect();
            m.objective = parse_terms(&tokens, line)?;
        } else if let Some(body) = rest.strip_prefix("row ") {
            let (tag, tail) = body
                .split_once(':')
                .ok_or_else(|| parse_err(line, "row comment without a tag"))?;
            let tokens: Vec<&str> = tail.split_whitespace().collect();
            if tokens.len() < 2 {
                return Err(parse_err(line, "row comment without sense and rhs"));
            }
            let sense = parse_sense(tokens[tokens.len() - 2], line)?;
            let rhs = parse_rat(tokens[tokens.len() - 1])
                .map_err(|e| parse_err(line, format!("bad rhs: {e}")))?;
            let expr = parse_terms(&tokens[..tokens.len() - 2], line)?;
            m.push(Constraint::new(expr, sense, rhs, tag.trim()));
        } else if let Some(body) = rest.strip_prefix("bound ") {
            let (var, tail) = body
                .split_once(':')
                .ok_or_else(|| parse_err(line, "bound comment without a variable"))?;
            let var: VarId = var
                .trim()
                .parse()
                .map_err(|e| parse_err(line, format!("bad variable: {e}")))?;
            let tokens: Vec<&str> = tail.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(parse_err(line, "bound comment needs lower and upper"));
            }
            let lo = parse_opt_bound(tokens[0], line)?;
            let hi = parse_opt_bound(tokens[1], line)?;
            m.declare(var, lo, hi);
        } else {
            return Err(parse_err(line, format!("unknown exact record {rest:?}")));
        }
    }
    let model = model.ok_or_else(|| parse_err(0, "no size header in document"))?;
    model
        .validate()
        .map_err(|e| parse_err(0, format!("reconstructed model is inconsistent: {e}")))?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// Sparse SDPA format
// ---------------------------------------------------------------------------

/// One diagonal slot of the SDPA LP block: `expr - rhs >= 0` after folding
/// and sign normalization.
struct LpSlot {
    expr: LinExpr,
    rhs: Rat,
    note: String,
}

fn lp_slots(model: &LinearModel) -> Vec<LpSlot> {
    let mut slots = Vec::new();
    for c in &model.constraints {
        let (expr, rhs) = folded(c);
        match c.sense {
            Sense::Ge => slots.push(LpSlot {
                expr,
                rhs,
                note: format!("row {}: {} >= {}", c.tag, exact_terms(&c.expr), rat_text(&c.rhs)),
            }),
            Sense::Le => {
                let mut neg = LinExpr::new();
                neg.add_scaled(&expr, &-Rat::one());
                slots.push(LpSlot {
                    expr: neg,
                    rhs: -&rhs,
                    note: format!("row {}: {} <= {}", c.tag, exact_terms(&c.expr), rat_text(&c.rhs)),
                });
            }
            Sense::Eq => {
                let mut neg = LinExpr::new();
                neg.add_scaled(&expr, &-Rat::one());
                slots.push(LpSlot {
                    expr: expr.clone(),
                    rhs: rhs.clone(),
                    note: format!("row {} (>= half): {} = {}", c.tag, exact_terms(&c.expr), rat_text(&c.rhs)),
                });
                slots.push(LpSlot {
                    expr: neg,
                    rhs: -&rhs,
                    note: format!("row {} (<= half)", c.tag),
                });
            }
        }
    }
    for d in model.variables() {
        if let Some(l) = &d.lower {
            slots.push(LpSlot {
                expr: LinExpr::term(d.id, Rat::one()),
                rhs: l.clone(),
                note: format!("bound {} >= {}", d.id, rat_text(l)),
            });
        }
        if let Some(u) = &d.upper {
            slots.push(LpSlot {
                expr: LinExpr::term(d.id, -Rat::one()),
                rhs: -u,
                note: format!("bound {} <= {}", d.id, rat_text(u)),
            });
        }
    }
    slots
}

/// Renders a moment relaxation in sparse SDPA form (`.dat-s`): the bordered
/// PSD matrices come first, then one diagonal block holding every linear
/// row and variable bound. The objective is `min -gamma`. Header comments
/// record the exact rational content of every slot.
pub fn sdpa_text(model: &SdpModel) -> String {
    let base = &model.base;
    let vars: Vec<VarId> = base.variables().map(|d| d.id).collect();
    let slots = lp_slots(base);

    let mut s = String::new();
    let _ = writeln!(s, "* unit-square spread moment relaxation, {} points", base.n);
    let _ = writeln!(s, "* exact: n {}", base.n);
    for (k, v) in vars.iter().enumerate() {
        let _ = writeln!(s, "* exact: var {} {}", k + 1, v);
    }
    for (b, blk) in model.psd_blocks.iter().enumerate() {
        let _ = writeln!(s, "* exact: psd {} {} dim {}", b + 1, blk.label, blk.dim());
    }
    for (d, slot) in slots.iter().enumerate() {
        let _ = writeln!(s, "* exact: lp {} {}", d + 1, slot.note);
    }

    let nblocks = model.psd_blocks.len() + 1;
    let _ = writeln!(s, "{}", vars.len());
    let _ = writeln!(s, "{nblocks}");
    let mut struct_line = String::new();
    for blk in &model.psd_blocks {
        let _ = write!(struct_line, "{} ", blk.dim());
    }
    let _ = write!(struct_line, "-{}", slots.len());
    let _ = writeln!(s, "{struct_line}");

    // min c^T y with c = -objective (the model maximizes).
    let mut cs: Vec<String> = Vec::with_capacity(vars.len());
    for v in &vars {
        cs.push(decimal_short(&-base.objective.coeff(*v), EXPORT_SIG));
    }
    let _ = writeln!(s, "{}", cs.join(" "));

    let lp_block = nblocks;
    let mut entry = |mat: usize, blk: usize, i: usize, j: usize, v: &Rat| {
        if !v.is_zero() {
            let _ = writeln!(s, "{mat} {blk} {i} {j} {}", decimal_short(v, EXPORT_SIG));
        }
    };

    // F_0: the constant side. Bordered blocks pin the (1,1) corner to one;
    // the LP block carries the right-hand sides.
    for (b, _) in model.psd_blocks.iter().enumerate() {
        entry(0, b + 1, 1, 1, &-Rat::one());
    }
    for (d, slot) in slots.iter().enumerate() {
        entry(0, lp_block, d + 1, d + 1, &slot.rhs);
    }

    // F_k: positions of variable k. PSD entries are given on the upper
    // triangle only; SDPA mirrors them.
    for (k, v) in vars.iter().enumerate() {
        for (b, blk) in model.psd_blocks.iter().enumerate() {
            for (c, bv) in blk.border.iter().enumerate() {
                if bv == v {
                    entry(k + 1, b + 1, 1, c + 2, &Rat::one());
                }
            }
            let dim = blk.dim() - 1;
            for a in 0..dim {
                for c in a..dim {
                    if blk.matrix[a][c] == *v {
                        entry(k + 1, b + 1, a + 2, c + 2, &Rat::one());
                    }
                }
            }
        }
        for (d, slot) in slots.iter().enumerate() {
            entry(k + 1, lp_block, d + 1, d + 1, &slot.expr.coeff(*v));
        }
    }
    s
}

/// Writes [`sdpa_text`] to a file.
pub fn export_sdpa(model: &SdpModel, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_text(path, &sdpa_text(model))
}

// ---------------------------------------------------------------------------
// Best known packing values
// ---------------------------------------------------------------------------

/// Best known spread values gamma for n points in the unit square, keyed
/// by n. Values are exact rationals parsed from decimal snapshots and are
/// nonincreasing in n.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExactValuesTable {
    rows: BTreeMap<u32, Rat>,
}

impl ExactValuesTable {
    pub fn get(&self, n: u32) -> Option<&Rat> {
        self.rows.get(&n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u32, &Rat)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Parses a `n,gamma_exact[,...]` CSV. Rows may arrive in any order;
/// duplicate or sub-2 sizes are rejected, and the values must be
/// nonincreasing in n once sorted. Columns beyond the first two (such as
/// provenance notes) are ignored.
pub fn parse_exact_values(text: &str) -> Result<ExactValuesTable, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty document"))?;
    let mut fields = header.split(',');
    if fields.next().map(str::trim) != Some("n") || fields.next().map(str::trim) != Some("gamma_exact")
    {
        return Err(parse_err(1, "header must start with n,gamma_exact"));
    }
    let mut rows = BTreeMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.split(',');
        let n_str = fields.next().unwrap_or("");
        let g_str = fields
            .next()
            .ok_or_else(|| parse_err(line, "missing gamma_exact field"))?;
        let n: u32 = n_str
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad point count {n_str:?}")))?;
        if n < 2 {
            return Err(parse_err(line, "point counts start at 2"));
        }
        let g = parse_rat(g_str.trim())
            .map_err(|e| parse_err(line, format!("bad gamma value: {e}")))?;
        if rows.insert(n, g).is_some() {
            return Err(parse_err(line, format!("duplicate row for n = {n}")));
        }
    }
    let mut prev: Option<(u32, &Rat)> = None;
    for (n, g) in &rows {
        if let Some((pn, pg)) = prev {
            if g > pg {
                return Err(IoError::MonotonicityViolation { n: *n, prev: pn });
            }
        }
        prev = Some((*n, g));
    }
    Ok(ExactValuesTable { rows })
}

/// Reads and parses an exact-values CSV file.
pub fn load_exact_values(path: impl AsRef<Path>) -> Result<ExactValuesTable, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    parse_exact_values(&text)
}

/// The snapshot shipped with the crate: n = 2..50, proved closed forms for
/// small n and locally computed best known packings for the rest.
pub fn bundled_exact_values() -> ExactValuesTable {
    parse_exact_values(include_str!("../data/exact_gamma.csv"))
        .expect("bundled snapshot parses")
}

// ---------------------------------------------------------------------------
// Bound tables
// ---------------------------------------------------------------------------

/// One table line: a relaxation bound at one instance size, with decimal
/// rendering and, when a best known value is on hand, the bound/exact
/// ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRow {
    pub n: u32,
    pub relaxation: RelaxationId,
    pub bound: Rat,
    pub bound_decimal: String,
    pub exact_gamma: Option<String>,
    pub ratio: Option<String>,
}

/// How the bound column is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    /// Evaluate the recorded closed forms.
    ClosedForm,
    /// Solve the LP exactly; cross-checked against the closed form, and a
    /// disagreement is a hard error rather than a silent row.
    Solve,
}

fn solved_value(id: RelaxationId, n: u32) -> Result<Rat, IoError> {
    if id.family() == Family::Sdp {
        return Err(IoError::Unavailable {
            id,
            n,
            what: "exact solve",
        });
    }
    let res = match id {
        // The clique models are solved over their full cut family by
        // separation, which stays exact for the exhaustive regime.
        RelaxationId::MtClique | RelaxationId::MtBndClique => {
            solve_with_row_generation(id, n, &RowGenConfig::default())?.result
        }
        _ => match build_any(id, n, None)? {
            AnyModel::Linear(m) => crate::simplex::solve_exact(&m)?,
            AnyModel::Sdp(_) => unreachable!("sdp family handled above"),
        },
    };
    if res.status != SolveStatus::Optimal {
        return Err(IoError::Solve(crate::simplex::SolveError::Internal(
            format!("{id} at n = {n} did not reach an optimum"),
        )));
    }
    Ok(res.value.expect("optimal solve carries a value"))
}

/// Builds the bound table for the given sizes and relaxations, in size
/// order with relaxations in the order given. All arithmetic is exact;
/// decimals are display-only at [`DISPLAY_SIG`] digits.
pub fn bound_table(
    ns: RangeInclusive<u32>,
    relaxations: &[RelaxationId],
    exact: Option<&ExactValuesTable>,
    method: TableMethod,
) -> Result<Vec<BoundRow>, IoError> {
    let mut rows = Vec::new();
    for n in ns {
        for &id in relaxations {
            let closed = match closed_form_bound(id, n)? {
                ClosedForm::Value(v) => Some(v),
                ClosedForm::Unavailable => None,
            };
            let bound = match method {
                TableMethod::ClosedForm => closed.clone().ok_or(IoError::Unavailable {
                    id,
                    n,
                    what: "closed form",
                })?,
                TableMethod::Solve => {
                    let solved = solved_value(id, n)?;
                    if let Some(cf) = &closed {
                        if solved != *cf {
                            return Err(IoError::MismatchDetected {
                                id,
                                n,
                                solved,
                                closed: cf.clone(),
                            });
                        }
                    }
                    solved
                }
            };
            let exact_for_n = exact.and_then(|t| t.get(n));
            rows.push(BoundRow {
                n,
                relaxation: id,
                bound_decimal: decimal_string(&bound, DISPLAY_SIG),
                exact_gamma: exact_for_n.map(|g| decimal_string(g, DISPLAY_SIG)),
                ratio: exact_for_n.map(|g| decimal_string(&(&bound / g), DISPLAY_SIG)),
                bound,
            });
        }
    }
    Ok(rows)
}

/// CSV rendering of a bound table. The schema is fixed:
/// `n,relaxation,bound,bound_decimal,exact_gamma,ratio`, with empty fields
/// where no exact value is on hand.
pub fn bound_table_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("n,relaxation,bound,bound_decimal,exact_gamma,ratio\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n,
            r.relaxation,
            rat_text(&r.bound),
            r.bound_decimal,
            r.exact_gamma.as_deref().unwrap_or(""),
            r.ratio.as_deref().unwrap_or("")
        );
    }
    s
}

// ---------------------------------------------------------------------------
// SVG chart
// ---------------------------------------------------------------------------

const SVG_W: i64 = 800;
const SVG_H: i64 = 500;
const MARGIN_L: i64 = 60;
const MARGIN_R: i64 = 150;
const MARGIN_T: i64 = 20;
const MARGIN_B: i64 = 45;
const PALETTE: [&str; 6] = [
    "#1f6fb4", "#c23b22", "#2a9d4e", "#8a56b0", "#d97e00", "#5c6068",
];

fn svg_coord(v: &Rat) -> String {
    decimal_short(v, 8)
}

/// Deterministic SVG line chart of a bound table: one series per
/// relaxation in first-appearance order, plus a dashed series for the
/// exact values when any row carries them. Identical input yields
/// identical bytes.
pub fn emit_plot(rows: &[BoundRow]) -> Result<String, IoError> {
    if rows.is_empty() {
        return Err(IoError::EmptyTable);
    }
    let mut series: Vec<(RelaxationId, Vec<(u32, Rat)>)> = Vec::new();
    let mut exact: BTreeMap<u32, Rat> = BTreeMap::new();
    for r in rows {
        match series.iter_mut().find(|(id, _)| *id == r.relaxation) {
            Some((_, pts)) => pts.push((r.n, r.bound.clone())),
            None => series.push((r.relaxation, vec![(r.n, r.bound.clone())])),
        }
        if let Some(g) = &r.exact_gamma {
            // Display strings parse back exactly; they were rendered from rationals.
            let v = crate::model::parse_decimal(g)
                .map_err(|e| parse_err(0, format!("unparseable exact field: {e}")))?;
            exact.insert(r.n, v);
        }
    }

    let n_min = rows.iter().map(|r| r.n).min().expect("nonempty");
    let n_max = rows.iter().map(|r| r.n).max().expect("nonempty");
    let mut v_max = Rat::zero();
    for r in rows {
        if r.bound > v_max {
            v_max = r.bound.clone();
        }
    }
    for v in exact.values() {
        if *v > v_max {
            v_max = v.clone();
        }
    }
    if v_max.is_zero() {
        v_max = Rat::one();
    }

    let plot_w = Rat::from_integer((SVG_W - MARGIN_L - MARGIN_R).into());
    let plot_h = Rat::from_integer((SVG_H - MARGIN_T - MARGIN_B).into());
    let left = Rat::from_integer(MARGIN_L.into());
    let top = Rat::from_integer(MARGIN_T.into());
    let n_span = n_max.saturating_sub(n_min).max(1);
    let px = |n: u32| -> Rat {
        &left + &plot_w * Rat::new((n - n_min).into(), n_span.into())
    };
    let py = |v: &Rat| -> Rat { &top + &plot_h * (Rat::one() - v / &v_max) };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(s, "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>");
    let x0 = MARGIN_L;
    let y0 = SVG_H - MARGIN_B;
    let x1 = SVG_W - MARGIN_R;
    let _ = writeln!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{x0}\" y1=\"{MARGIN_T}\" x2=\"{x0}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{x0}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{n_min}</text>",
        y0 + 16
    );
    let _ = writeln!(
        s,
        "<text x=\"{x1}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{n_max}</text>",
        y0 + 16
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{y0}\" font-size=\"12\" text-anchor=\"end\">0</text>",
        x0 - 6
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>",
        x0 - 6,
        MARGIN_T + 10,
        decimal_short(&v_max, 4)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">points</text>",
        (x0 + x1) / 2,
        SVG_H - 8
    );

    let mut legend_y = MARGIN_T + 10;
    let legend_x = SVG_W - MARGIN_R + 14;
    let mut draw_series = |s: &mut String, name: &str, color: &str, dash: &str, pts: &[(u32, Rat)]| {
        let coords: Vec<String> = pts
            .iter()
            .map(|(n, v)| format!("{},{}", svg_coord(&px(*n)), svg_coord(&py(v))))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
            coords.join(" ")
        );
        for (n, v) in pts {
            let _ = writeln!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{color}\"/>",
                svg_coord(&px(*n)),
                svg_coord(&py(v))
            );
        }
        let _ = writeln!(
            s,
            "<rect x=\"{legend_x}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            legend_y - 9
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{legend_y}\" font-size=\"12\">{name}</text>",
            legend_x + 14
        );
        legend_y += 18;
    };

    for (k, (id, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        draw_series(&mut s, id.kind_str(), color, "", pts);
    }
    if !exact.is_empty() {
        let pts: Vec<(u32, Rat)> = exact.into_iter().collect();
        draw_series(
            &mut s,
            "exact",
            "#000000",
            " stroke-dasharray=\"5,3\"",
            &pts,
        );
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

/// Writes [`emit_plot`] output to a file.
pub fn export_plot(rows: &[BoundRow], path: impl AsRef<Path>) -> Result<(), IoError> {
    write_text(path, &emit_plot(rows)?)
}

// ---------------------------------------------------------------------------
