//! Exact rational model layer: variables, sparse linear expressions,
//! constraints, LP/SDP containers and feasibility checking.
//!
//! All coefficients are arbitrary-precision rationals ([`Rat`]). Variable
//! identity is structural ([`VarId`]) and totally ordered, which fixes
//! column order, constraint term order and every other iteration order in
//! the crate; nothing downstream depends on hash ordering.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational. Always normalized (gcd 1, denominator > 0)
/// by construction.
pub type Rat = num_rational::BigRational;

/// `p/q` as a [`Rat`]. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as a [`Rat`].
pub fn rint(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable {0} has no value in the point")]
    UnassignedVariable(VarId),
    #[error("variable {0} referenced but not declared in the model")]
    UndeclaredVariable(VarId),
    #[error("constraint tag must be nonempty")]
    EmptyTag,
    #[error("invalid variable indices for {0}")]
    BadIndices(String),
}

/// Structured variable identity.
///
/// Index convention is 1-based. Product variables `Xx(i,j)`/`Yy(i,j)`
/// require `i <= j`; `Beta(i,j)` requires `i < j`. The derived order
/// (variant first, then indices) is the canonical variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    /// x_i: first coordinate of point i.
    X(u32),
    /// y_i: second coordinate of point i.
    Y(u32),
    /// X_ij: product term x_i * x_j (i <= j).
    Xx(u32, u32),
    /// Y_ij: product term y_i * y_j (i <= j).
    Yy(u32, u32),
    /// beta_ij: lower bound on the squared distance of the pair (i, j), i < j.
    Beta(u32, u32),
    /// gamma: the common lower bound being maximized.
    Gamma,
}

impl VarId {
    /// Product variable on the given block with indices put in canonical
    /// (sorted) order.
    pub fn product(block: Block, i: u32, j: u32) -> VarId {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        match block {
            Block::X => VarId::Xx(a, b),
            Block::Y => VarId::Yy(a, b),
        }
    }

    /// Coordinate variable on the given block.
    pub fn coord(block: Block, i: u32) -> VarId {
        match block {
            Block::X => VarId::X(i),
            Block::Y => VarId::Y(i),
        }
    }

    /// Checks the structural index invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match *self {
            VarId::X(i) | VarId::Y(i) => i >= 1,
            VarId::Xx(i, j) | VarId::Yy(i, j) => 1 <= i && i <= j,
            VarId::Beta(i, j) => 1 <= i && i < j,
            VarId::Gamma => true,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::BadIndices(self.to_string()))
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarId::X(i) => write!(f, "x_{i}"),
            VarId::Y(i) => write!(f, "y_{i}"),
            VarId::Xx(i, j) => write!(f, "X_{i}_{j}"),
            VarId::Yy(i, j) => write!(f, "Y_{i}_{j}"),
            VarId::Beta(i, j) => write!(f, "beta_{i}_{j}"),
            VarId::Gamma => write!(f, "gamma"),
        }
    }
}

impl FromStr for VarId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadIndices(s.to_string());
        if s == "gamma" {
            return Ok(VarId::Gamma);
        }
        let (head, rest) = s.split_once('_').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split('_').collect();
        let idx = |t: &str| t.parse::<u32>().map_err(|_| bad());
        let id = match (head, parts.as_slice()) {
            ("x", [i]) => VarId::X(idx(i)?),
            ("y", [i]) => VarId::Y(idx(i)?),
            ("X", [i, j]) => VarId::Xx(idx(i)?, idx(j)?),
            ("Y", [i, j]) => VarId::Yy(idx(i)?, idx(j)?),
            ("beta", [i, j]) => VarId::Beta(idx(i)?, idx(j)?),
            _ => return Err(bad()),
        };
        id.validate()?;
        Ok(id)
    }
}

/// The two coordinate blocks of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    X,
    Y,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::X => write!(f, "x"),
            Block::Y => write!(f, "y"),
        }
    }
}

/// Sparse linear expression: sum of coefficient * variable plus a constant.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinExpr {
    terms: BTreeMap<VarId, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    /// Single term `coeff * var`.
    pub fn term(var: VarId, coeff: Rat) -> Self {
        let mut e = Self::new();
        e.add_term(var, coeff);
        e
    }

    /// Constant expression.
    pub fn constant(c: Rat) -> Self {
        let mut e = Self::new();
        e.constant = c;
        e
    }

    /// Adds `coeff * var`, merging with an existing term and dropping the
    /// entry if the merged coefficient is zero.
    pub fn add_term(&mut self, var: VarId, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(var).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&var);
        }
    }

    /// Adds `scale * other` into `self`.
    pub fn add_scaled(&mut self, other: &LinExpr, scale: &Rat) {
        if scale.is_zero() {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, c * scale);
        }
        self.constant += &other.constant * scale;
    }

    pub fn coeff(&self, var: VarId) -> Rat {
        self.terms.get(&var).cloned().unwrap_or_else(Rat::zero)
    }

    /// Terms in canonical variable order.
    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact value at a total assignment.
    pub fn eval(&self, point: &FeasiblePoint) -> Result<Rat, ModelError> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            let val = point
                .get(*v)
                .ok_or(ModelError::UnassignedVariable(*v))?;
            acc += c * val;
        }
        Ok(acc)
    }

    /// Builder-style chained term addition.
    pub fn with(mut self, var: VarId, coeff: Rat) -> Self {
        self.add_term(var, coeff);
        self
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{a} {v}")?;
            }
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if !self.constant.is_zero() {
            if self.constant.is_negative() {
                write!(f, " - {}", self.constant.abs())?;
            } else {
                write!(f, " + {}", self.constant)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Ge => write!(f, ">="),
            Sense::Eq => write!(f, "="),
        }
    }
}

/// One linear constraint with a unique free-form tag used for dual
/// multiplier keys and export row names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: Rat,
    pub tag: String,
}

impl Constraint {
    pub fn new(expr: LinExpr, sense: Sense, rhs: Rat, tag: impl Into<String>) -> Self {
        let tag = tag.into();
        assert!(!tag.is_empty(), "constraint tag must be nonempty");
        Constraint { expr, sense, rhs, tag }
    }

    /// Satisfaction slack at a point. Nonnegative iff the constraint holds:
    /// `lhs - rhs` for `>=`, `rhs - lhs` for `<=`, `-|lhs - rhs|` for `=`.
    pub fn slack(&self, point: &FeasiblePoint) -> Result<Rat, ModelError> {
        let lhs = self.expr.eval(point)?;
        Ok(match self.sense {
            Sense::Ge => lhs - &self.rhs,
            Sense::Le => self.rhs.clone() - lhs,
            Sense::Eq => -(lhs - &self.rhs).abs(),
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {} {}", self.tag, self.expr, self.sense, self.rhs)
    }
}

/// Declared variable with optional finite bounds (`None` = unbounded side).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub id: VarId,
    pub lower: Option<Rat>,
    pub upper: Option<Rat>,
}

/// Linear program `maximize objective subject to constraints and bounds`.
///
/// `n` is the instance size the model was built for. Variables are kept in
/// canonical [`VarId`] order; constraint order is the build order and is
/// part of the model identity (export preserves it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearModel {
    pub n: u32,
    variables: BTreeMap<VarId, VariableDecl>,
    pub constraints: Vec<Constraint>,
    pub objective: LinExpr,
}

impl LinearModel {
    /// Empty maximization model for instance size `n`.
    pub fn new(n: u32) -> Self {
        LinearModel {
            n,
            variables: BTreeMap::new(),
            constraints: Vec::new(),
            objective: LinExpr::new(),
        }
    }

    pub fn declare(&mut self, id: VarId, lower: Option<Rat>, upper: Option<Rat>) {
        id.validate().expect("declared variable has valid indices");
        if let (Some(l), Some(u)) = (&lower, &upper) {
            assert!(l <= u, "declared bounds must satisfy lower <= upper");
        }
        self.variables.insert(id, VariableDecl { id, lower, upper });
    }

    pub fn decl(&self, id: VarId) -> Option<&VariableDecl> {
        self.variables.get(&id)
    }

    /// Declared variables in canonical order.
    pub fn variables(&self) -> impl Iterator<Item = &VariableDecl> {
        self.variables.values()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn constraint_by_tag(&self, tag: &str) -> Option<(usize, &Constraint)> {
        self.constraints
            .iter()
            .enumerate()
            .find(|(_, c)| c.tag == tag)
    }

    /// Every variable referenced by constraints or the objective must be
    /// declared, and tags must be unique.
    pub fn validate(&self) -> Result<(), ModelError> {
        let check_expr = |e: &LinExpr| -> Result<(), ModelError> {
            for (v, _) in e.iter() {
                if !self.variables.contains_key(v) {
                    return Err(ModelError::UndeclaredVariable(*v));
                }
            }
            Ok(())
        };
        check_expr(&self.objective)?;
        let mut tags = std::collections::BTreeSet::new();
        for c in &self.constraints {
            check_expr(&c.expr)?;
            if c.tag.is_empty() {
                return Err(ModelError::EmptyTag);
            }
            assert!(tags.insert(c.tag.as_str()), "duplicate tag {}", c.tag);
        }
        Ok(())
    }

    /// Exact feasibility check of a total assignment.
    pub fn check_feasible(&self, point: &FeasiblePoint) -> Result<FeasibilityReport, ModelError> {
        let mut report = FeasibilityReport::default();
        for decl in self.variables.values() {
            let value = point
                .get(decl.id)
                .ok_or(ModelError::UnassignedVariable(decl.id))?;
            if let Some(l) = &decl.lower {
                if value < *l {
                    report.violations.push(Violation::Bound {
                        var: decl.id,
                        bound: l.clone(),
                        slack: value.clone() - l,
                    });
                }
            }
            if let Some(u) = &decl.upper {
                if value > *u {
                    report.violations.push(Violation::Bound {
                        var: decl.id,
                        bound: u.clone(),
                        slack: u - value,
                    });
                }
            }
        }
        for c in &self.constraints {
            let slack = c.slack(point)?;
            if slack.is_negative() {
                report.violations.push(Violation::Row {
                    tag: c.tag.clone(),
                    slack: slack.clone(),
                });
            }
            report.row_slacks.push((c.tag.clone(), slack));
        }
        Ok(report)
    }
}

/// Symmetric matrix of product variables bordered by a unit corner and a
/// coordinate vector:
///
/// ```text
/// [ 1    v^T ]
/// [ v    M   ]
/// ```
///
/// `border[k]` is the variable in position (0, k+1); `matrix[a][b]` (a <= b)
/// is the variable in position (a+1, b+1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsdBlock {
    pub label: String,
    pub border: Vec<VarId>,
    pub matrix: Vec<Vec<VarId>>,
}

impl PsdBlock {
    /// Standard block for one coordinate axis: border x_1..x_n, matrix X_ij.
    pub fn for_block(block: Block, n: u32) -> Self {
        let border = (1..=n).map(|i| VarId::coord(block, i)).collect();
        let matrix = (1..=n)
            .map(|i| (1..=n).map(|j| VarId::product(block, i, j)).collect())
            .collect();
        PsdBlock {
            label: format!("moment_{block}"),
            border,
            matrix,
        }
    }

    /// Bordered matrix dimension (n + 1).
    pub fn dim(&self) -> usize {
        self.border.len() + 1
    }

    /// Evaluates the bordered matrix at a point, row-major, exact.
    pub fn eval(&self, point: &FeasiblePoint) -> Result<Vec<Vec<Rat>>, ModelError> {
        let n = self.border.len();
        let mut m = vec![vec![Rat::zero(); n + 1]; n + 1];
        m[0][0] = Rat::one();
        for (k, v) in self.border.iter().enumerate() {
            let val = point.get(*v).ok_or(ModelError::UnassignedVariable(*v))?;
            m[0][k + 1] = val.clone();
            m[k + 1][0] = val;
        }
        for a in 0..n {
            for b in 0..n {
                let v = self.matrix[a][b];
                let val = point.get(v).ok_or(ModelError::UnassignedVariable(v))?;
                m[a + 1][b + 1] = val;
            }
        }
        Ok(m)
    }
}

/// Linear base model plus bordered PSD requirements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpModel {
    pub base: LinearModel,
    pub psd_blocks: Vec<PsdBlock>,
}

impl SdpModel {
    /// Exact feasibility: linear part plus an LDL^T certificate or negative
    /// curvature witness per PSD block.
    pub fn check_feasible(&self, point: &FeasiblePoint) -> Result<FeasibilityReport, ModelError> {
        let mut report = self.base.check_feasible(point)?;
        for blk in &self.psd_blocks {
            let m = blk.eval(point)?;
            match crate::certify::ldl_verify(&m) {
                Ok(_) => report.psd_ok.push(blk.label.clone()),
                Err(crate::certify::LdlError::NotPsdWitness { witness, value }) => {
                    report.violations.push(Violation::Psd {
                        label: blk.label.clone(),
                        witness,
                        value,
                    });
                }
                // eval writes both triangles from the same variables.
                Err(crate::certify::LdlError::NotSymmetric { .. }) => unreachable!(),
            }
        }
        Ok(report)
    }
}

/// Total assignment of rationals to variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasiblePoint {
    values: BTreeMap<VarId, Rat>,
}

impl FeasiblePoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: VarId, value: Rat) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<Rat> {
        self.values.get(&var).cloned()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Rat)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(VarId, Rat)> for FeasiblePoint {
    fn from_iter<T: IntoIterator<Item = (VarId, Rat)>>(iter: T) -> Self {
        FeasiblePoint {
            values: iter.into_iter().collect(),
        }
    }
}

/// Outcome of an exact feasibility check.
#[derive(Debug, Clone, Default)]
pub struct FeasibilityReport {
    /// Bound, row and PSD violations (empty iff feasible).
    pub violations: Vec<Violation>,
    /// Exact satisfaction slack of every row, in constraint order.
    pub row_slacks: Vec<(String, Rat)>,
    /// Labels of PSD blocks that verified.
    pub psd_ok: Vec<String>,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Slack of the row with the given tag, if present.
    pub fn slack_of(&self, tag: &str) -> Option<&Rat> {
        self.row_slacks
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, s)| s)
    }
}

#[derive(Debug, Clone)]
pub enum Violation {
    /// A variable bound is violated; `slack < 0` is the signed distance.
    Bound { var: VarId, bound: Rat, slack: Rat },
    /// A row is violated; `slack < 0`.
    Row { tag: String, slack: Rat },
    /// A PSD block failed: `witness^T M witness = value < 0`.
    Psd {
        label: String,
        witness: Vec<Rat>,
        value: Rat,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Bound { var, bound, slack } => {
                write!(f, "bound on {var} (bound {bound}, slack {slack})")
            }
            Violation::Row { tag, slack } => write!(f, "row {tag} (slack {slack})"),
            Violation::Psd { label, value, .. } => {
                write!(f, "psd block {label} (witness value {value})")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Decimal rendering and parsing
// ---------------------------------------------------------------------------

/// Renders `r` with exactly `sig` significant digits, rounding half to even.
/// No exponent notation; magnitudes here are desk-scale.
pub fn decimal_string(r: &Rat, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let (p, q) = (a.numer().clone(), a.denom().clone());
    // e = floor(log10(a)): unique e with 10^e <= a < 10^(e+1).
    let mut e: i64 = (digits10(&p) as i64) - (digits10(&q) as i64);
    let ten = BigInt::from(10);
    // a >= 10^e  <=>  p >= q * 10^e
    let cmp_pow = |e: i64| -> std::cmp::Ordering {
        if e >= 0 {
            p.cmp(&(&q * ten.pow(e as u32)))
        } else {
            (&p * ten.pow((-e) as u32)).cmp(&q)
        }
    };
    while cmp_pow(e) == std::cmp::Ordering::Less {
        e -= 1;
    }
    while cmp_pow(e + 1) != std::cmp::Ordering::Less {
        e += 1;
    }
    // m = round_half_even(a * 10^(sig-1-e)) has exactly `sig` digits.
    let shift = sig as i64 - 1 - e;
    let (num, den) = if shift >= 0 {
        (&p * ten.pow(shift as u32), q.clone())
    } else {
        (p.clone(), &q * ten.pow((-shift) as u32))
    };
    let mut m = round_half_even(&num, &den);
    let mut e = e;
    if digits10(&m) > sig as u64 {
        // 999.. rounded up to 1000..: drop one digit, bump exponent.
        m /= &ten;
        e += 1;
    }
    let digits = m.to_string();
    debug_assert_eq!(digits.len(), sig);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    if e >= sig as i64 - 1 {
        // Integer with possible trailing zeros.
        s.push_str(&digits);
        for _ in 0..(e - (sig as i64 - 1)) {
            s.push('0');
        }
    } else if e >= 0 {
        let point = (e + 1) as usize;
        s.push_str(&digits[..point]);
        s.push('.');
        s.push_str(&digits[point..]);
    } else {
        s.push_str("0.");
        for _ in 0..(-e - 1) {
            s.push('0');
        }
        s.push_str(&digits);
    }
    s
}

/// Round-half-even of num/den for positive inputs.
fn round_half_even(num: &BigInt, den: &BigInt) -> BigInt {
    let (quo, rem) = num_integer::Integer::div_rem(num, den);
    let twice: BigInt = &rem * 2;
    match twice.cmp(den) {
        std::cmp::Ordering::Less => quo,
        std::cmp::Ordering::Greater => quo + 1,
        std::cmp::Ordering::Equal => {
            if num_integer::Integer::is_even(&quo) {
                quo
            } else {
                quo + 1
            }
        }
    }
}

fn digits10(v: &BigInt) -> u64 {
    if v.is_zero() {
        return 1;
    }
    let (_, digits) = v.to_radix_be(10);
    debug_assert!(v.sign() != Sign::Minus);
    digits.len() as u64
}

/// Parses a plain decimal literal (`-?d+(.d+)?`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rat, ModelError> {
    let bad = || ModelError::BadIndices(format!("not a decimal literal: {s:?}"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = match t.split_once('.') {
        Some((a, b)) => (a, b),
        None => (t, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let num: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| bad())?
    };
    let den = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(Rat::new(num * BigInt::from(sign), den))
}

/// Parses either an exact fraction "p/q" or a decimal literal.
pub fn parse_rat(s: &str) -> Result<Rat, ModelError> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let bad = || ModelError::BadIndices(format!("not a rational literal: {s:?}"));
        let pn: BigInt = p.trim().parse().map_err(|_| bad())?;
        let qn: BigInt = q.trim().parse().map_err(|_| bad())?;
        if qn.is_zero() {
            return Err(bad());
        }
        Ok(Rat::new(pn, qn))
    } else {
        parse_decimal(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_order_is_kind_then_indices() {
        let mut v = vec![
            VarId::Gamma,
            VarId::Yy(1, 2),
            VarId::X(2),
            VarId::Beta(1, 3),
            VarId::Xx(1, 1),
            VarId::Y(1),
            VarId::X(1),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                VarId::X(1),
                VarId::X(2),
                VarId::Y(1),
                VarId::Xx(1, 1),
                VarId::Yy(1, 2),
                VarId::Beta(1, 3),
                VarId::Gamma,
            ]
        );
    }

    #[test]
    fn var_display_round_trips() {
        for id in [
            VarId::X(3),
            VarId::Y(12),
            VarId::Xx(1, 2),
            VarId::Yy(4, 4),
            VarId::Beta(2, 9),
            VarId::Gamma,
        ] {
            assert_eq!(id.to_string().parse::<VarId>().unwrap(), id);
        }
        assert!("X_2_1".parse::<VarId>().is_err());
        assert!("beta_3_3".parse::<VarId>().is_err());
        assert!("z_1".parse::<VarId>().is_err());
    }

    #[test]
    fn expr_merges_and_drops_zeros() {
        let mut e = LinExpr::new();
        e.add_term(VarId::X(1), rat(1, 2));
        e.add_term(VarId::X(1), rat(1, 2));
        e.add_term(VarId::Y(1), rat(3, 4));
        e.add_term(VarId::Y(1), rat(-3, 4));
        assert_eq!(e.coeff(VarId::X(1)), rint(1));
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn eval_reports_missing_assignment() {
        let e = LinExpr::term(VarId::Gamma, rint(1));
        let p = FeasiblePoint::new();
        assert_eq!(
            e.eval(&p).unwrap_err(),
            ModelError::UnassignedVariable(VarId::Gamma)
        );
    }

    #[test]
    fn bound_violation_has_exact_slack() {
        let mut m = LinearModel::new(2);
        m.declare(VarId::X(1), Some(rint(0)), Some(rint(1)));
        let mut p = FeasiblePoint::new();
        p.set(VarId::X(1), rint(2));
        let rep = m.check_feasible(&p).unwrap();
        assert!(!rep.ok());
        match &rep.violations[0] {
            Violation::Bound { var, slack, .. } => {
                assert_eq!(*var, VarId::X(1));
                assert_eq!(*slack, rint(-1));
            }
            other => panic!("expected bound violation, got {other}"),
        }
    }

    #[test]
    fn row_slack_sign_convention() {
        let mut m = LinearModel::new(2);
        m.declare(VarId::X(1), Some(rint(0)), Some(rint(1)));
        m.push(Constraint::new(
            LinExpr::term(VarId::X(1), rint(1)),
            Sense::Ge,
            rat(1, 2),
            "half",
        ));
        let mut p = FeasiblePoint::new();
        p.set(VarId::X(1), rat(1, 4));
        let rep = m.check_feasible(&p).unwrap();
        assert_eq!(rep.slack_of("half"), Some(&rat(-1, 4)));
        assert!(!rep.ok());
    }

    #[test]
    fn decimal_rendering_half_even() {
        assert_eq!(decimal_string(&rint(2), 12), "2.00000000000");
        assert_eq!(decimal_string(&rat(1, 3), 6), "0.333333");
        assert_eq!(decimal_string(&rat(2, 3), 6), "0.666667");
        assert_eq!(decimal_string(&rat(-5, 4), 3), "-1.25");
        // Ties round to even: 0.125 at two significant digits.
        assert_eq!(decimal_string(&rat(1, 8), 2), "0.12");
        assert_eq!(decimal_string(&rat(3, 8), 2), "0.38");
        // Carry across a power of ten: 0.9999 -> 1.00.
        assert_eq!(decimal_string(&rat(9999, 10000), 3), "1.00");
        assert_eq!(decimal_string(&rint(987654), 3), "988000");
    }

    #[test]
    fn decimal_parse_is_exact() {
        assert_eq!(parse_decimal("2.0").unwrap(), rint(2));
        assert_eq!(parse_decimal("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_decimal("-3.5").unwrap(), rat(-7, 2));
        assert_eq!(parse_rat("22/7").unwrap(), rat(22, 7));
        assert!(parse_decimal("1e3").is_err());
        assert!(parse_rat("1/0").is_err());
    }
}
