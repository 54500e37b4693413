//! Builders for the twelve relaxations of the packing problem.
//!
//! Every model maximizes `gamma`, a common lower bound on all squared
//! pairwise distances of `n` points in the unit square. The families:
//!
//! * single-row LPs (`tw`, `twbnd`, `tword`, `twcomb`): each squared
//!   coordinate difference is replaced by its concave envelope over a
//!   per-pair domain, giving one row per envelope piece combination;
//! * multi-row LPs (`mtclique`, `mtbndclique`, `mtordtri`, `mtcombtri`):
//!   products are modeled by explicit matrix variables tied down by
//!   diagonal rows and clique cuts;
//! * SDPs (`sdp1`, `sdp2`, `sdpord`, `sdpcomb`): the matrix variables are
//!   constrained through bordered positive-semidefinite moment blocks.
//!
//! Variants use three strengthenings, alone or combined: `bnd` rescales a
//! prefix of each coordinate block to live in `[0, 1/2]` (points can be
//! assigned to half-squares), `ord` sorts a coordinate chain, and `comb`
//! applies both with the chain broken at the rescaling cut. All builders
//! are deterministic: same input, same model, row for row.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::envelope::{Domain, EnvelopeError, Polytope2};
use crate::model::{rat, rint, Block, Constraint, LinExpr, LinearModel, PsdBlock, Rat, SdpModel, Sense, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelaxError {
    #[error("instance size {n} is too small for {what} (needs n >= {min})")]
    InstanceTooSmall { what: String, n: u32, min: u32 },
    #[error("{id} does not belong to the {expected} family")]
    WrongFamily {
        id: RelaxationId,
        expected: &'static str,
    },
    #[error("cut strategy not usable here: {0}")]
    StrategyInfeasible(String),
    #[error("unknown relaxation {0:?}")]
    UnknownRelaxation(String),
    #[error("clique parameter alpha = {alpha} outside 1..={max}")]
    BadAlpha { alpha: i64, max: i64 },
    #[error("clique index set needs at least 3 elements, got {0}")]
    SetTooSmall(usize),
    #[error("index set must be strictly increasing with entries in 1..=n")]
    BadIndexSet,
    #[error("constraint mixes variables from both coordinate blocks")]
    MixedBlocks,
    #[error("{id} has no envelope domain on block {block}")]
    NoEnvelopeDomain { id: RelaxationId, block: Block },
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
}

/// The twelve relaxations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelaxationId {
    Tw,
    TwBnd,
    TwOrd,
    TwComb,
    MtClique,
    MtBndClique,
    MtOrdTri,
    MtCombTri,
    Sdp1,
    Sdp2,
    SdpOrd,
    SdpComb,
}

/// Model family a relaxation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SingleRow,
    MultiRow,
    Sdp,
}

impl RelaxationId {
    pub const ALL: [RelaxationId; 12] = [
        RelaxationId::Tw,
        RelaxationId::TwBnd,
        RelaxationId::TwOrd,
        RelaxationId::TwComb,
        RelaxationId::MtClique,
        RelaxationId::MtBndClique,
        RelaxationId::MtOrdTri,
        RelaxationId::MtCombTri,
        RelaxationId::Sdp1,
        RelaxationId::Sdp2,
        RelaxationId::SdpOrd,
        RelaxationId::SdpComb,
    ];

    pub fn kind_str(self) -> &'static str {
        match self {
            RelaxationId::Tw => "tw",
            RelaxationId::TwBnd => "twbnd",
            RelaxationId::TwOrd => "tword",
            RelaxationId::TwComb => "twcomb",
            RelaxationId::MtClique => "mtclique",
            RelaxationId::MtBndClique => "mtbndclique",
            RelaxationId::MtOrdTri => "mtordtri",
            RelaxationId::MtCombTri => "mtcombtri",
            RelaxationId::Sdp1 => "sdp1",
            RelaxationId::Sdp2 => "sdp2",
            RelaxationId::SdpOrd => "sdpord",
            RelaxationId::SdpComb => "sdpcomb",
        }
    }

    pub fn family(self) -> Family {
        match self {
            RelaxationId::Tw | RelaxationId::TwBnd | RelaxationId::TwOrd | RelaxationId::TwComb => {
                Family::SingleRow
            }
            RelaxationId::MtClique
            | RelaxationId::MtBndClique
            | RelaxationId::MtOrdTri
            | RelaxationId::MtCombTri => Family::MultiRow,
            RelaxationId::Sdp1 | RelaxationId::Sdp2 | RelaxationId::SdpOrd | RelaxationId::SdpComb => {
                Family::Sdp
            }
        }
    }

    /// Smallest instance size the construction is defined for. Variants
    /// that place points into half-squares need both halves populated.
    pub fn min_n(self) -> u32 {
        match self {
            RelaxationId::Tw | RelaxationId::TwOrd | RelaxationId::Sdp1 | RelaxationId::SdpOrd => 2,
            RelaxationId::MtClique | RelaxationId::MtOrdTri => 3,
            RelaxationId::TwBnd
            | RelaxationId::TwComb
            | RelaxationId::MtBndClique
            | RelaxationId::MtCombTri
            | RelaxationId::Sdp2
            | RelaxationId::SdpComb => 5,
        }
    }

    /// True when the model rescales a prefix of a coordinate block.
    pub fn uses_bnd(self) -> bool {
        matches!(
            self,
            RelaxationId::TwBnd
                | RelaxationId::TwComb
                | RelaxationId::MtBndClique
                | RelaxationId::MtCombTri
                | RelaxationId::Sdp2
                | RelaxationId::SdpComb
        )
    }

    /// True when the model orders a coordinate chain.
    pub fn uses_ord(self) -> bool {
        matches!(
            self,
            RelaxationId::TwOrd
                | RelaxationId::TwComb
                | RelaxationId::MtOrdTri
                | RelaxationId::MtCombTri
                | RelaxationId::SdpOrd
                | RelaxationId::SdpComb
        )
    }
}

impl fmt::Display for RelaxationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind_str())
    }
}

impl FromStr for RelaxationId {
    type Err = RelaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelaxationId::ALL
            .iter()
            .copied()
            .find(|id| id.kind_str() == s)
            .ok_or_else(|| RelaxError::UnknownRelaxation(s.to_string()))
    }
}

/// Prefix sizes used by the `bnd` and `comb` variants: the first `n_x`
/// points get the left half in x, and of those the first `n_y` get the
/// bottom half in y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexPartition {
    pub n: u32,
    pub n_x: u32,
    pub n_y: u32,
}

impl IndexPartition {
    pub fn cut(&self, block: Block) -> u32 {
        match block {
            Block::X => self.n_x,
            Block::Y => self.n_y,
        }
    }

    /// Coordinate scale that maps a variable to the rescaled (hat) space:
    /// 2 for coordinates in the tightened prefix, 1 otherwise; products
    /// scale multiplicatively.
    pub fn hat_scale(&self, var: VarId) -> Rat {
        let s = |cut: u32, i: u32| if i <= cut { 2i64 } else { 1i64 };
        match var {
            VarId::X(i) => rint(s(self.n_x, i)),
            VarId::Y(i) => rint(s(self.n_y, i)),
            VarId::Xx(i, j) => rint(s(self.n_x, i) * s(self.n_x, j)),
            VarId::Yy(i, j) => rint(s(self.n_y, i) * s(self.n_y, j)),
            VarId::Beta(_, _) | VarId::Gamma => rint(1),
        }
    }
}

/// Splits `1..=n` as evenly as a two-step halving allows: `n_x = ceil(n/2)`
/// points share the left half-square, and `n_y = ceil(n_x/2)` of those
/// share its bottom half.
pub fn partition_indices(n: u32) -> Result<IndexPartition, RelaxError> {
    if n < 2 {
        return Err(RelaxError::InstanceTooSmall {
            what: "the index partition".to_string(),
            n,
            min: 2,
        });
    }
    let n_x = n.div_ceil(2);
    let n_y = n_x.div_ceil(2);
    Ok(IndexPartition { n, n_x, n_y })
}

/// How clique cuts enter a multi-row model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutStrategy {
    /// All clique cuts on sets of size 3..=max_m, both blocks.
    Exhaustive { max_m: u32 },
    /// Only the size-3 cuts the construction prescribes.
    TriangleOnly,
    /// No cuts in the built model; they are separated during the solve.
    RowGeneration,
}

/// Either kind of built model.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Linear(LinearModel),
    Sdp(SdpModel),
}

impl AnyModel {
    pub fn base(&self) -> &LinearModel {
        match self {
            AnyModel::Linear(m) => m,
            AnyModel::Sdp(m) => &m.base,
        }
    }
}

fn check_min_n(id: RelaxationId, n: u32) -> Result<(), RelaxError> {
    if n < id.min_n() {
        return Err(RelaxError::InstanceTooSmall {
            what: id.to_string(),
            n,
            min: id.min_n(),
        });
    }
    Ok(())
}

/// Per-pair envelope domain of a relaxation on one coordinate block.
///
/// For ordered chains the pair lives on a triangle (or a trapezoid when
/// only the smaller-index coordinate is rescaled); for unordered pairs it
/// is the box of the two coordinate ranges.
pub fn domain_for_pair(
    id: RelaxationId,
    block: Block,
    part: &IndexPartition,
    i: u32,
    j: u32,
) -> Result<Domain, RelaxError> {
    assert!(1 <= i && i < j && j <= part.n, "pair indices out of range");
    let half = rat(1, 2);
    let one = rint(1);
    let bnd_box = |cut: u32| Domain::Box {
        u1: if i <= cut { half.clone() } else { one.clone() },
        u2: if j <= cut { half.clone() } else { one.clone() },
    };
    match (id, block) {
        (RelaxationId::Tw, _) => Ok(Domain::unit()),
        (RelaxationId::TwBnd, b) => Ok(bnd_box(part.cut(b))),
        (RelaxationId::TwOrd, Block::X) => Ok(Domain::Triangle { u: one }),
        (RelaxationId::TwOrd, Block::Y) => Ok(Domain::unit()),
        (RelaxationId::TwComb, Block::X) | (RelaxationId::MtCombTri, Block::X) => {
            let (n_x, n_y) = (part.n_x, part.n_y);
            if j <= n_y {
                Ok(Domain::Triangle { u: half })
            } else if i > n_x {
                Ok(Domain::Triangle { u: one })
            } else if i > n_y {
                if j <= n_x {
                    Ok(Domain::Triangle { u: half })
                } else {
                    // Ordered pair with only the lower coordinate capped:
                    // { 0 <= xi <= xj <= 1, xi <= 1/2 }.
                    let z = Rat::zero();
                    let poly = Polytope2::new(vec![
                        (z.clone(), z.clone()),
                        (half.clone(), half.clone()),
                        (half.clone(), one.clone()),
                        (z, one.clone()),
                    ])?;
                    Ok(Domain::Polytope(poly))
                }
            } else {
                // i <= n_y < j: the two chain segments do not order this pair.
                Ok(bnd_box(n_x))
            }
        }
        (RelaxationId::TwComb, Block::Y) => Ok(bnd_box(part.n_y)),
        _ => Err(RelaxError::NoEnvelopeDomain { id, block }),
    }
}

/// One clique cut on a coordinate block: for an index set `I` of size `m`
/// and an integer `1 <= alpha <= m - 2`,
///
/// ```text
/// alpha * sum_{i in I} v_i  -  sum_{i<j in I} V_ij  <=  alpha (alpha + 1) / 2
/// ```
///
/// which holds whenever `v` is any 0/1-box point and `V` its products, and
/// more generally on `[0, 1]^m` since the left side is multilinear.
pub fn clique_cut(block: Block, indices: &[u32], alpha: i64) -> Result<Constraint, RelaxError> {
    if indices.len() < 3 {
        return Err(RelaxError::SetTooSmall(indices.len()));
    }
    if indices[0] < 1 || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RelaxError::BadIndexSet);
    }
    let m = indices.len() as i64;
    if alpha < 1 || alpha > m - 2 {
        return Err(RelaxError::BadAlpha { alpha, max: m - 2 });
    }
    let mut expr = LinExpr::new();
    for &i in indices {
        expr.add_term(VarId::coord(block, i), rint(alpha));
    }
    for (a, &i) in indices.iter().enumerate() {
        for &j in indices.iter().skip(a + 1) {
            expr.add_term(VarId::product(block, i, j), rint(-1));
        }
    }
    let tag = format!(
        "clique_m{}_a{}_{}_{}",
        m,
        alpha,
        block,
        indices
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("_")
    );
    Ok(Constraint::new(expr, Sense::Le, rat(alpha * (alpha + 1), 2), tag))
}

/// All clique cuts on one block for sets of size 3..=max_m, in
/// deterministic order: size ascending, index sets lexicographic, alpha
/// ascending.
pub fn enumerate_clique_cuts(block: Block, n: u32, max_m: u32) -> Vec<Constraint> {
    let mut out = Vec::new();
    let top = max_m.min(n);
    for m in 3..=top.max(2) {
        if m < 3 {
            continue;
        }
        for set in combinations(n, m as usize) {
            for alpha in 1..=(m as i64 - 2) {
                out.push(clique_cut(block, &set, alpha).expect("enumerated cut is valid"));
            }
        }
    }
    out
}

/// k-subsets of 1..=n in lexicographic order.
fn combinations(n: u32, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::with_capacity(k);
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=(n + 1 - need as u32) {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    if k >= 1 && (k as u32) <= n {
        rec(1, n, k, &mut cur, &mut out);
    }
    out
}

fn block_of(var: VarId) -> Option<Block> {
    match var {
        VarId::X(_) | VarId::Xx(_, _) => Some(Block::X),
        VarId::Y(_) | VarId::Yy(_, _) => Some(Block::Y),
        VarId::Beta(_, _) | VarId::Gamma => None,
    }
}

/// Rewrites a constraint stated for the rescaled (hat) variables of one
/// block into the original variables: each coefficient is multiplied by
/// the variable's hat scale. Constant sides are untouched. Fails if the
/// constraint touches both coordinate blocks, since the two blocks rescale
/// at different cuts.
pub fn apply_bnd_mapping(
    c: &Constraint,
    part: &IndexPartition,
) -> Result<Constraint, RelaxError> {
    scale_constraint(c, part, false)
}

/// Inverse of [`apply_bnd_mapping`]: divides each coefficient by the
/// variable's hat scale.
pub fn unapply_bnd_mapping(
    c: &Constraint,
    part: &IndexPartition,
) -> Result<Constraint, RelaxError> {
    scale_constraint(c, part, true)
}

fn scale_constraint(
    c: &Constraint,
    part: &IndexPartition,
    invert: bool,
) -> Result<Constraint, RelaxError> {
    let mut seen: Option<Block> = None;
    for (v, _) in c.expr.iter() {
        if let Some(b) = block_of(*v) {
            match seen {
                None => seen = Some(b),
                Some(prev) if prev != b => return Err(RelaxError::MixedBlocks),
                _ => {}
            }
        }
    }
    let mut expr = LinExpr::new();
    expr.constant = c.expr.constant.clone();
    for (v, coeff) in c.expr.iter() {
        let s = part.hat_scale(*v);
        let scaled = if invert { coeff / &s } else { coeff * &s };
        expr.add_term(*v, scaled);
    }
    Ok(Constraint::new(expr, c.sense, c.rhs.clone(), c.tag.clone()))
}

// ---------------------------------------------------------------------------
// Shared row assembly
// ---------------------------------------------------------------------------

fn gamma_term() -> (VarId, Rat) {
    (VarId::Gamma, rint(-1))
}

/// `V_ii - 2 V_ij + V_jj`, the exact expansion of `(v_j - v_i)^2` in the
/// product variables of one block.
fn quad_diff(block: Block, i: u32, j: u32) -> LinExpr {
    LinExpr::new()
        .with(VarId::product(block, i, i), rint(1))
        .with(VarId::product(block, i, j), rint(-2))
        .with(VarId::product(block, j, j), rint(1))
}

fn declare_coords(model: &mut LinearModel, part: &IndexPartition, id: RelaxationId) {
    let n = part.n;
    let upper = |block: Block, i: u32| -> Rat {
        // Every bnd-style model clamps the rescaled prefix outright; the
        // halved diagonal rows are only valid on top of these bounds.
        if id.uses_bnd() && i <= part.cut(block) {
            return rat(1, 2);
        }
        rint(1)
    };
    for i in 1..=n {
        model.declare(VarId::X(i), Some(rint(0)), Some(upper(Block::X, i)));
    }
    for i in 1..=n {
        model.declare(VarId::Y(i), Some(rint(0)), Some(upper(Block::Y, i)));
    }
    model.declare(VarId::Gamma, Some(rint(0)), None);
}

fn declare_products(model: &mut LinearModel, block: Block, n: u32) {
    for i in 1..=n {
        for j in i..=n {
            model.declare(VarId::product(block, i, j), Some(rint(0)), Some(rint(1)));
        }
    }
}

/// Chain rows `x_{i+1} - x_i >= 0` over inclusive segments.
fn push_chain(model: &mut LinearModel, segments: &[(u32, u32)]) {
    for &(lo, hi) in segments {
        for i in lo..hi {
            let expr = LinExpr::new()
                .with(VarId::X(i + 1), rint(1))
                .with(VarId::X(i), rint(-1));
            model.push(Constraint::new(expr, Sense::Ge, rint(0), format!("chain_x_{i}")));
        }
    }
}

fn chain_segments(id: RelaxationId, part: &IndexPartition) -> Vec<(u32, u32)> {
    match id {
        RelaxationId::TwOrd | RelaxationId::MtOrdTri | RelaxationId::SdpOrd => vec![(1, part.n)],
        RelaxationId::TwComb | RelaxationId::MtCombTri | RelaxationId::SdpComb => {
            vec![(1, part.n_y), (part.n_y + 1, part.n)]
        }
        _ => vec![],
    }
}

/// Product floors `v_i + v_j - V_ij <= 1`, the degenerate two-index
/// members of the clique family. The clique polyhedron is understood to
/// include them; without them the small prefix instances go slack.
fn mccormick_rows(block: Block, n: u32) -> Vec<Constraint> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            let expr = LinExpr::new()
                .with(VarId::coord(block, i), rint(1))
                .with(VarId::coord(block, j), rint(1))
                .with(VarId::product(block, i, j), rint(-1));
            out.push(Constraint::new(
                expr,
                Sense::Le,
                rint(1),
                format!("mccormick_{block}_{i}_{j}"),
            ));
        }
    }
    out
}

/// Diagonal rows `V_ii <= c * v_i`; the factor drops to 1/2 inside a
/// rescaled prefix (`half_cut`).
fn push_diag(model: &mut LinearModel, block: Block, n: u32, half_cut: u32) {
    for i in 1..=n {
        let c = if i <= half_cut { rat(1, 2) } else { rint(1) };
        let expr = LinExpr::new()
            .with(VarId::product(block, i, i), rint(1))
            .with(VarId::coord(block, i), -c);
        model.push(Constraint::new(
            expr,
            Sense::Le,
            rint(0),
            format!("diag_{block}_{i}"),
        ));
    }
}

/// Products of chain inequalities with variables and residual bounds:
/// for each ordered pair (i, j) in a chain segment,
///
/// * `rlt_diag_i_j`:  `X_ij - X_ii >= 0`        (from `x_i (x_j - x_i) >= 0`)
/// * `rlt_shift_i_j`: `c x_j - c x_i + X_ij - X_jj >= 0`
///   (from `(c - x_j)(x_j - x_i) >= 0`, where `c` is the upper bound of
///   `x_j`: 1/2 for `j <= half_upto`, 1 otherwise).
pub fn rlt_order_cuts(segments: &[(u32, u32)], half_upto: u32) -> Vec<Constraint> {
    let mut out = Vec::new();
    for &(lo, hi) in segments {
        for i in lo..=hi {
            for j in (i + 1)..=hi {
                let diag = LinExpr::new()
                    .with(VarId::Xx(i, j), rint(1))
                    .with(VarId::Xx(i, i), rint(-1));
                out.push(Constraint::new(
                    diag,
                    Sense::Ge,
                    rint(0),
                    format!("rlt_diag_{i}_{j}"),
                ));
                let c = if j <= half_upto { rat(1, 2) } else { rint(1) };
                let shift = LinExpr::new()
                    .with(VarId::X(j), c.clone())
                    .with(VarId::X(i), -c)
                    .with(VarId::Xx(i, j), rint(1))
                    .with(VarId::Xx(j, j), rint(-1));
                out.push(Constraint::new(
                    shift,
                    Sense::Ge,
                    rint(0),
                    format!("rlt_shift_{i}_{j}"),
                ));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Single-row builders
// ---------------------------------------------------------------------------

/// Builds one of the envelope LPs: `tw`, `twbnd`, `tword`, `twcomb`.
pub fn build_single_row(id: RelaxationId, n: u32) -> Result<LinearModel, RelaxError> {
    if id.family() != Family::SingleRow {
        return Err(RelaxError::WrongFamily {
            id,
            expected: "single-row",
        });
    }
    check_min_n(id, n)?;
    let part = partition_indices(n)?;
    let mut model = LinearModel::new(n);
    declare_coords(&mut model, &part, id);

    for i in 1..=n {
        for j in (i + 1)..=n {
            let env_x = domain_for_pair(id, Block::X, &part, i, j)?.envelope()?;
            let env_y = domain_for_pair(id, Block::Y, &part, i, j)?.envelope()?;
            let mut k = 0usize;
            for px in env_x.pieces() {
                for py in env_y.pieces() {
                    k += 1;
                    let mut expr = LinExpr::new();
                    expr.add_term(VarId::X(i), px.ai.clone());
                    expr.add_term(VarId::X(j), px.aj.clone());
                    expr.add_term(VarId::Y(i), py.ai.clone());
                    expr.add_term(VarId::Y(j), py.aj.clone());
                    let (gv, gc) = gamma_term();
                    expr.add_term(gv, gc);
                    let rhs = -(&px.a0 + &py.a0);
                    model.push(Constraint::new(
                        expr,
                        Sense::Ge,
                        rhs,
                        format!("{}_pair_{i}_{j}_{k}", id.kind_str()),
                    ));
                }
            }
        }
    }
    push_chain(&mut model, &chain_segments(id, &part));
    model.objective = LinExpr::term(VarId::Gamma, rint(1));
    model.validate().expect("built model is well formed");
    Ok(model)
}

// ---------------------------------------------------------------------------
// Multi-row builders
// ---------------------------------------------------------------------------

/// Builds one of the matrix-variable LPs: `mtclique`, `mtbndclique`,
/// `mtordtri`, `mtcombtri`.
pub fn build_multi_row(
    id: RelaxationId,
    n: u32,
    strategy: CutStrategy,
) -> Result<LinearModel, RelaxError> {
    if id.family() != Family::MultiRow {
        return Err(RelaxError::WrongFamily {
            id,
            expected: "multi-row",
        });
    }
    check_min_n(id, n)?;
    let part = partition_indices(n)?;
    let tri_model = matches!(id, RelaxationId::MtOrdTri | RelaxationId::MtCombTri);
    if tri_model && matches!(strategy, CutStrategy::Exhaustive { .. }) {
        return Err(RelaxError::StrategyInfeasible(format!(
            "{id} prescribes its own size-3 cut set; use TriangleOnly or RowGeneration"
        )));
    }
    if let CutStrategy::Exhaustive { .. } = strategy {
        if n > 12 {
            return Err(RelaxError::StrategyInfeasible(format!(
                "exhaustive clique enumeration blows up for n = {n} > 12; use RowGeneration"
            )));
        }
    }

    let mut model = LinearModel::new(n);
    declare_coords(&mut model, &part, id);
    if matches!(id, RelaxationId::MtClique | RelaxationId::MtBndClique) {
        declare_products(&mut model, Block::X, n);
    }
    declare_products(&mut model, Block::Y, n);

    // Pair rows.
    for i in 1..=n {
        for j in (i + 1)..=n {
            match id {
                RelaxationId::MtClique | RelaxationId::MtBndClique => {
                    let mut expr = quad_diff(Block::X, i, j);
                    expr.add_scaled(&quad_diff(Block::Y, i, j), &rint(1));
                    let (gv, gc) = gamma_term();
                    expr.add_term(gv, gc);
                    model.push(Constraint::new(
                        expr,
                        Sense::Ge,
                        rint(0),
                        format!("{}_pair_{i}_{j}", id.kind_str()),
                    ));
                }
                RelaxationId::MtOrdTri => {
                    let mut expr = LinExpr::new()
                        .with(VarId::X(j), rint(1))
                        .with(VarId::X(i), rint(-1));
                    expr.add_scaled(&quad_diff(Block::Y, i, j), &rint(1));
                    let (gv, gc) = gamma_term();
                    expr.add_term(gv, gc);
                    model.push(Constraint::new(
                        expr,
                        Sense::Ge,
                        rint(0),
                        format!("{}_pair_{i}_{j}", id.kind_str()),
                    ));
                }
                RelaxationId::MtCombTri => {
                    let env_x = domain_for_pair(id, Block::X, &part, i, j)?.envelope()?;
                    for (k, px) in env_x.pieces().iter().enumerate() {
                        let mut expr = LinExpr::new();
                        expr.add_term(VarId::X(i), px.ai.clone());
                        expr.add_term(VarId::X(j), px.aj.clone());
                        expr.add_scaled(&quad_diff(Block::Y, i, j), &rint(1));
                        let (gv, gc) = gamma_term();
                        expr.add_term(gv, gc);
                        model.push(Constraint::new(
                            expr,
                            Sense::Ge,
                            -px.a0.clone(),
                            format!("{}_pair_{i}_{j}_{}", id.kind_str(), k + 1),
                        ));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    push_chain(&mut model, &chain_segments(id, &part));

    // Diagonal rows.
    match id {
        RelaxationId::MtClique => {
            push_diag(&mut model, Block::X, n, 0);
            push_diag(&mut model, Block::Y, n, 0);
        }
        RelaxationId::MtBndClique => {
            push_diag(&mut model, Block::X, n, part.n_x);
            push_diag(&mut model, Block::Y, n, part.n_y);
        }
        RelaxationId::MtOrdTri => {
            push_diag(&mut model, Block::Y, n, 0);
        }
        RelaxationId::MtCombTri => {
            push_diag(&mut model, Block::Y, n, part.n_y);
        }
        _ => unreachable!(),
    }

    // Product floors for the clique models, mapped like their cuts.
    match id {
        RelaxationId::MtClique => {
            for block in [Block::X, Block::Y] {
                for c in mccormick_rows(block, n) {
                    model.push(c);
                }
            }
        }
        RelaxationId::MtBndClique => {
            for block in [Block::X, Block::Y] {
                for c in mccormick_rows(block, n) {
                    model.push(apply_bnd_mapping(&c, &part)?);
                }
            }
        }
        _ => {}
    }

    // Cuts.
    let cuts = clique_rows(id, n, &part, strategy)?;
    for c in cuts {
        model.push(c);
    }

    model.objective = LinExpr::term(VarId::Gamma, rint(1));
    model.validate().expect("built model is well formed");
    Ok(model)
}

/// The cut rows a strategy contributes to a multi-row model.
pub fn clique_rows(
    id: RelaxationId,
    n: u32,
    part: &IndexPartition,
    strategy: CutStrategy,
) -> Result<Vec<Constraint>, RelaxError> {
    let mapped = matches!(id, RelaxationId::MtBndClique | RelaxationId::MtCombTri);
    let map = |cut: Constraint| -> Result<Constraint, RelaxError> {
        if mapped {
            apply_bnd_mapping(&cut, part)
        } else {
            Ok(cut)
        }
    };
    let mut out = Vec::new();
    match (id, strategy) {
        (_, CutStrategy::RowGeneration) => {}
        (RelaxationId::MtClique | RelaxationId::MtBndClique, CutStrategy::Exhaustive { max_m }) => {
            for block in [Block::X, Block::Y] {
                for cut in enumerate_clique_cuts(block, n, max_m) {
                    out.push(map(cut)?);
                }
            }
        }
        (RelaxationId::MtClique | RelaxationId::MtBndClique, CutStrategy::TriangleOnly) => {
            for block in [Block::X, Block::Y] {
                for cut in enumerate_clique_cuts(block, n, 3) {
                    out.push(map(cut)?);
                }
            }
        }
        (RelaxationId::MtOrdTri | RelaxationId::MtCombTri, CutStrategy::TriangleOnly) => {
            for cut in enumerate_clique_cuts(Block::Y, n, 3) {
                out.push(map(cut)?);
            }
        }
        (id, CutStrategy::Exhaustive { .. }) => {
            return Err(RelaxError::StrategyInfeasible(format!(
                "{id} does not take exhaustive clique cuts"
            )));
        }
        // Single-row and moment relaxations carry no clique cuts.
        (_, CutStrategy::TriangleOnly) => {}
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// SDP builders
// ---------------------------------------------------------------------------

/// Builds one of the moment relaxations: `sdp1`, `sdp2`, `sdpord`,
/// `sdpcomb`. The returned model couples the linear base with bordered
/// PSD blocks over the product variables.
pub fn build_sdp(id: RelaxationId, n: u32) -> Result<SdpModel, RelaxError> {
    if id.family() != Family::Sdp {
        return Err(RelaxError::WrongFamily { id, expected: "sdp" });
    }
    check_min_n(id, n)?;
    let part = partition_indices(n)?;
    let mut model = LinearModel::new(n);
    declare_coords(&mut model, &part, id);
    let has_x_products = id != RelaxationId::SdpOrd;
    if has_x_products {
        declare_products(&mut model, Block::X, n);
    }
    declare_products(&mut model, Block::Y, n);

    for i in 1..=n {
        for j in (i + 1)..=n {
            let mut expr = if has_x_products {
                quad_diff(Block::X, i, j)
            } else {
                LinExpr::new()
                    .with(VarId::X(j), rint(1))
                    .with(VarId::X(i), rint(-1))
            };
            expr.add_scaled(&quad_diff(Block::Y, i, j), &rint(1));
            let (gv, gc) = gamma_term();
            expr.add_term(gv, gc);
            model.push(Constraint::new(
                expr,
                Sense::Ge,
                rint(0),
                format!("{}_pair_{i}_{j}", id.kind_str()),
            ));
        }
    }

    push_chain(&mut model, &chain_segments(id, &part));

    match id {
        RelaxationId::Sdp1 => {
            push_diag(&mut model, Block::X, n, 0);
            push_diag(&mut model, Block::Y, n, 0);
        }
        RelaxationId::Sdp2 => {
            push_diag(&mut model, Block::X, n, part.n_x);
            push_diag(&mut model, Block::Y, n, part.n_y);
        }
        RelaxationId::SdpOrd => {
            push_diag(&mut model, Block::Y, n, 0);
        }
        RelaxationId::SdpComb => {
            push_diag(&mut model, Block::X, n, part.n_x);
            push_diag(&mut model, Block::Y, n, part.n_y);
        }
        _ => unreachable!(),
    }

    if id == RelaxationId::SdpComb {
        for c in rlt_order_cuts(&chain_segments(id, &part), part.n_x) {
            model.push(c);
        }
    }

    model.objective = LinExpr::term(VarId::Gamma, rint(1));
    model.validate().expect("built model is well formed");

    let mut psd_blocks = Vec::new();
    if has_x_products {
        psd_blocks.push(PsdBlock::for_block(Block::X, n));
    }
    psd_blocks.push(PsdBlock::for_block(Block::Y, n));
    Ok(SdpModel {
        base: model,
        psd_blocks,
    })
}

/// Uniform entry point used by the command line: builds the model for any
/// relaxation with a sensible default strategy (exhaustive cuts where the
/// construction asks for them and the size allows, otherwise the model's
/// own cut set).
pub fn build_any(id: RelaxationId, n: u32, strategy: Option<CutStrategy>) -> Result<AnyModel, RelaxError> {
    match id.family() {
        Family::SingleRow => Ok(AnyModel::Linear(build_single_row(id, n)?)),
        Family::MultiRow => {
            let strat = strategy.unwrap_or(match id {
                RelaxationId::MtClique | RelaxationId::MtBndClique => {
                    if n <= 12 {
                        CutStrategy::Exhaustive { max_m: n }
                    } else {
                        CutStrategy::RowGeneration
                    }
                }
                _ => CutStrategy::TriangleOnly,
            });
            Ok(AnyModel::Linear(build_multi_row(id, n, strat)?))
        }
        Family::Sdp => Ok(AnyModel::Sdp(build_sdp(id, n)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeasiblePoint;
    use num_traits::Signed;

    fn choose(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        let mut r = 1u64;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }

    #[test]
    fn partition_examples() {
        let p = partition_indices(5).unwrap();
        assert_eq!((p.n_x, p.n_y), (3, 2));
        let p = partition_indices(9).unwrap();
        assert_eq!((p.n_x, p.n_y), (5, 3));
        let p = partition_indices(4).unwrap();
        assert_eq!((p.n_x, p.n_y), (2, 1));
        assert!(matches!(
            partition_indices(1),
            Err(RelaxError::InstanceTooSmall { .. })
        ));
    }

    #[test]
    fn partition_is_two_step_halving() {
        for n in 2..=60 {
            let p = partition_indices(n).unwrap();
            assert_eq!(p.n_x, n.div_ceil(2));
            assert_eq!(p.n_y, p.n_x.div_ceil(2));
            assert_eq!(p.n_y, n.div_ceil(4));
            assert_eq!((n - 1) / 4, p.n_y - 1);
        }
    }

    #[test]
    fn clique_cut_shape_and_errors() {
        let c = clique_cut(Block::Y, &[1, 2, 3], 1).unwrap();
        assert_eq!(c.tag, "clique_m3_a1_y_1_2_3");
        assert_eq!(c.sense, Sense::Le);
        assert_eq!(c.rhs, rint(1));
        assert_eq!(c.expr.coeff(VarId::Y(1)), rint(1));
        assert_eq!(c.expr.coeff(VarId::Yy(1, 2)), rint(-1));
        assert_eq!(c.expr.coeff(VarId::Yy(2, 3)), rint(-1));
        assert_eq!(c.expr.len(), 6);

        assert_eq!(
            clique_cut(Block::X, &[1, 2], 1).unwrap_err(),
            RelaxError::SetTooSmall(2)
        );
        assert_eq!(
            clique_cut(Block::X, &[1, 2, 3], 2).unwrap_err(),
            RelaxError::BadAlpha { alpha: 2, max: 1 }
        );
        assert_eq!(
            clique_cut(Block::X, &[1, 2, 3], 0).unwrap_err(),
            RelaxError::BadAlpha { alpha: 0, max: 1 }
        );
        assert_eq!(
            clique_cut(Block::X, &[2, 1, 3], 1).unwrap_err(),
            RelaxError::BadIndexSet
        );
    }

    #[test]
    fn clique_cut_holds_on_box_products() {
        // Multilinear form attains its max over the box at a vertex, so
        // checking all 0/1 points of the set proves validity there.
        for m in 3..=5u32 {
            let idx: Vec<u32> = (1..=m).collect();
            for alpha in 1..=(m as i64 - 2) {
                let cut = clique_cut(Block::X, &idx, alpha).unwrap();
                for bits in 0..(1u32 << m) {
                    let mut p = FeasiblePoint::new();
                    for i in 1..=m {
                        let v = if bits & (1 << (i - 1)) != 0 { 1 } else { 0 };
                        p.set(VarId::X(i), rint(v));
                    }
                    for i in 1..=m {
                        for j in i..=m {
                            let v = p.get(VarId::X(i)).unwrap() * p.get(VarId::X(j)).unwrap();
                            p.set(VarId::Xx(i, j), v);
                        }
                    }
                    let slack = cut.slack(&p).unwrap();
                    assert!(
                        !slack.is_negative(),
                        "cut m={m} alpha={alpha} violated at bits {bits:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn clique_enumeration_counts() {
        assert_eq!(enumerate_clique_cuts(Block::X, 3, 3).len(), 1);
        assert_eq!(enumerate_clique_cuts(Block::X, 4, 4).len(), 6);
        assert_eq!(enumerate_clique_cuts(Block::Y, 5, 5).len(), 23);
        // General count: sum over m of C(n, m) * (m - 2).
        for n in 3..=8u64 {
            let expect: u64 = (3..=n).map(|m| choose(n, m) * (m - 2)).sum();
            assert_eq!(
                enumerate_clique_cuts(Block::X, n as u32, n as u32).len() as u64,
                expect
            );
        }
    }

    #[test]
    fn bnd_mapping_scales_and_round_trips() {
        let part = partition_indices(5).unwrap(); // n_x = 3, n_y = 2
        let cut = clique_cut(Block::Y, &[1, 2, 3], 1).unwrap();
        let mapped = apply_bnd_mapping(&cut, &part).unwrap();
        // y_1, y_2 are inside the rescaled prefix (n_y = 2), y_3 is not.
        assert_eq!(mapped.expr.coeff(VarId::Y(1)), rint(2));
        assert_eq!(mapped.expr.coeff(VarId::Y(2)), rint(2));
        assert_eq!(mapped.expr.coeff(VarId::Y(3)), rint(1));
        assert_eq!(mapped.expr.coeff(VarId::Yy(1, 2)), rint(-4));
        assert_eq!(mapped.expr.coeff(VarId::Yy(1, 3)), rint(-2));
        assert_eq!(mapped.expr.coeff(VarId::Yy(2, 3)), rint(-2));
        assert_eq!(mapped.rhs, rint(1));
        let back = unapply_bnd_mapping(&mapped, &part).unwrap();
        assert_eq!(back, cut);
    }

    #[test]
    fn bnd_mapping_rejects_mixed_blocks() {
        let part = partition_indices(5).unwrap();
        let expr = LinExpr::new()
            .with(VarId::X(1), rint(1))
            .with(VarId::Y(1), rint(1));
        let c = Constraint::new(expr, Sense::Le, rint(1), "mixed");
        assert_eq!(
            apply_bnd_mapping(&c, &part).unwrap_err(),
            RelaxError::MixedBlocks
        );
    }

    #[test]
    fn tw_two_points_has_the_four_envelope_rows() {
        let m = build_single_row(RelaxationId::Tw, 2).unwrap();
        let tags: Vec<&str> = m.constraints.iter().map(|c| c.tag.as_str()).collect();
        assert_eq!(
            tags,
            vec!["tw_pair_1_2_1", "tw_pair_1_2_2", "tw_pair_1_2_3", "tw_pair_1_2_4"]
        );
        // First row combines the two origin-side planes: x_1+x_2+y_1+y_2 >= gamma.
        let c = &m.constraints[0];
        assert_eq!(c.expr.coeff(VarId::X(1)), rint(1));
        assert_eq!(c.expr.coeff(VarId::Y(2)), rint(1));
        assert_eq!(c.expr.coeff(VarId::Gamma), rint(-1));
        assert_eq!(c.rhs, rint(0));
        // Last row combines the two far-corner planes, constants move right.
        let c = &m.constraints[3];
        assert_eq!(c.expr.coeff(VarId::X(1)), rint(-1));
        assert_eq!(c.expr.coeff(VarId::Y(1)), rint(-1));
        assert_eq!(c.rhs, rint(-4));
    }

    #[test]
    fn single_row_counts() {
        for n in [2u32, 3, 6, 9] {
            let pairs = (n * (n - 1) / 2) as usize;
            let m = build_single_row(RelaxationId::Tw, n).unwrap();
            assert_eq!(m.constraints.len(), 4 * pairs);
            let m = build_single_row(RelaxationId::TwOrd, n).unwrap();
            assert_eq!(m.constraints.len(), 2 * pairs + (n as usize - 1));
            if n >= 5 {
                let m = build_single_row(RelaxationId::TwBnd, n).unwrap();
                assert_eq!(m.constraints.len(), 4 * pairs);
            }
        }
    }

    #[test]
    fn comb_domains_by_pair_position() {
        let part = partition_indices(9).unwrap(); // n_x = 5, n_y = 3
        let d = |i, j| domain_for_pair(RelaxationId::TwComb, Block::X, &part, i, j).unwrap();
        assert_eq!(d(1, 2), Domain::Triangle { u: rat(1, 2) });
        assert_eq!(
            d(3, 4),
            Domain::Box {
                u1: rat(1, 2),
                u2: rat(1, 2)
            }
        );
        assert_eq!(d(4, 5), Domain::Triangle { u: rat(1, 2) });
        assert!(matches!(d(4, 6), Domain::Polytope(_)));
        assert_eq!(
            d(2, 7),
            Domain::Box {
                u1: rat(1, 2),
                u2: rint(1)
            }
        );
        assert_eq!(d(6, 8), Domain::Triangle { u: rint(1) });
        assert!(matches!(
            domain_for_pair(RelaxationId::MtClique, Block::X, &part, 1, 2),
            Err(RelaxError::NoEnvelopeDomain { .. })
        ));
    }

    #[test]
    fn twcomb_bounds_follow_the_partition() {
        let m = build_single_row(RelaxationId::TwComb, 9).unwrap();
        assert_eq!(m.decl(VarId::X(5)).unwrap().upper, Some(rat(1, 2)));
        assert_eq!(m.decl(VarId::X(6)).unwrap().upper, Some(rint(1)));
        assert_eq!(m.decl(VarId::Y(3)).unwrap().upper, Some(rat(1, 2)));
        assert_eq!(m.decl(VarId::Y(4)).unwrap().upper, Some(rint(1)));
        // Broken chain skips the crossing pair (n_y, n_y + 1).
        let tags: Vec<&str> = m
            .constraints
            .iter()
            .map(|c| c.tag.as_str())
            .filter(|t| t.starts_with("chain_"))
            .collect();
        assert_eq!(
            tags,
            vec![
                "chain_x_1", "chain_x_2", "chain_x_4", "chain_x_5", "chain_x_6", "chain_x_7",
                "chain_x_8"
            ]
        );
    }

    #[test]
    fn mtordtri_row_census() {
        let n = 4u32;
        let m = build_multi_row(RelaxationId::MtOrdTri, n, CutStrategy::TriangleOnly).unwrap();
        let pairs = (n * (n - 1) / 2) as usize;
        let triples = choose(n as u64, 3) as usize;
        assert_eq!(
            m.constraints.len(),
            pairs + (n as usize - 1) + n as usize + triples
        );
        let clique_tags: Vec<&str> = m
            .constraints
            .iter()
            .map(|c| c.tag.as_str())
            .filter(|t| t.starts_with("clique_m3_a1_"))
            .collect();
        assert_eq!(
            clique_tags,
            vec![
                "clique_m3_a1_y_1_2_3",
                "clique_m3_a1_y_1_2_4",
                "clique_m3_a1_y_1_3_4",
                "clique_m3_a1_y_2_3_4"
            ]
        );
        // No x products in this model.
        assert!(m.decl(VarId::Xx(1, 1)).is_none());
        assert!(m.decl(VarId::Yy(1, 1)).is_some());
    }

    #[test]
    fn mtclique_census_and_guards() {
        let n = 5u32;
        let m = build_multi_row(RelaxationId::MtClique, n, CutStrategy::Exhaustive { max_m: n })
            .unwrap();
        let pairs = (n * (n - 1) / 2) as usize;
        // Pair rows, two diagonal rows per point, product floors on both
        // blocks, and 23 exhaustive clique cuts per block.
        assert_eq!(
            m.constraints.len(),
            pairs + 2 * n as usize + 2 * pairs + 2 * 23
        );
        assert!(matches!(
            build_multi_row(RelaxationId::MtClique, 13, CutStrategy::Exhaustive { max_m: 13 }),
            Err(RelaxError::StrategyInfeasible(_))
        ));
        assert!(matches!(
            build_multi_row(RelaxationId::MtClique, 2, CutStrategy::TriangleOnly),
            Err(RelaxError::InstanceTooSmall { .. })
        ));
        assert!(matches!(
            build_multi_row(RelaxationId::Tw, 5, CutStrategy::TriangleOnly),
            Err(RelaxError::WrongFamily { .. })
        ));
        assert!(matches!(
            build_multi_row(RelaxationId::MtOrdTri, 5, CutStrategy::Exhaustive { max_m: 5 }),
            Err(RelaxError::StrategyInfeasible(_))
        ));
    }

    #[test]
    fn mtbndclique_diag_rows_are_halved_inside_prefix() {
        let m = build_multi_row(RelaxationId::MtBndClique, 5, CutStrategy::TriangleOnly).unwrap();
        let (_, dx1) = m.constraint_by_tag("diag_x_1").unwrap();
        assert_eq!(dx1.expr.coeff(VarId::X(1)), rat(-1, 2)); // 1 <= n_x = 3
        let (_, dx4) = m.constraint_by_tag("diag_x_4").unwrap();
        assert_eq!(dx4.expr.coeff(VarId::X(4)), rint(-1));
        let (_, dy2) = m.constraint_by_tag("diag_y_2").unwrap();
        assert_eq!(dy2.expr.coeff(VarId::Y(2)), rat(-1, 2)); // 2 <= n_y = 2
        let (_, dy3) = m.constraint_by_tag("diag_y_3").unwrap();
        assert_eq!(dy3.expr.coeff(VarId::Y(3)), rint(-1));
        // Clique cuts are stated in rescaled variables mapped back.
        let (_, c) = m.constraint_by_tag("clique_m3_a1_y_1_2_3").unwrap();
        assert_eq!(c.expr.coeff(VarId::Y(1)), rint(2));
        assert_eq!(c.expr.coeff(VarId::Yy(1, 2)), rint(-4));
        assert_eq!(c.expr.coeff(VarId::Yy(1, 3)), rint(-2));
        // Prefix coordinates are clamped to the half square; the halved
        // diagonal rows above are only sound together with these bounds.
        assert_eq!(m.decl(VarId::X(1)).unwrap().upper, Some(rat(1, 2)));
        assert_eq!(m.decl(VarId::X(4)).unwrap().upper, Some(rint(1)));
        assert_eq!(m.decl(VarId::Y(2)).unwrap().upper, Some(rat(1, 2)));
        assert_eq!(m.decl(VarId::Y(3)).unwrap().upper, Some(rint(1)));
    }

    #[test]
    fn rlt_cuts_full_and_broken_chain() {
        let full = rlt_order_cuts(&[(1, 3)], 0);
        assert_eq!(full.len(), 6);
        assert_eq!(full[0].tag, "rlt_diag_1_2");
        assert_eq!(full[1].tag, "rlt_shift_1_2");
        // Unhalved shift: x_j - x_i + X_ij - X_jj >= 0.
        assert_eq!(full[1].expr.coeff(VarId::X(2)), rint(1));

        let part = partition_indices(5).unwrap(); // n_y = 2, n_x = 3
        let broken = rlt_order_cuts(&[(1, part.n_y), (part.n_y + 1, 5)], part.n_x);
        let pairs: Vec<&str> = broken
            .iter()
            .filter(|c| c.tag.starts_with("rlt_diag"))
            .map(|c| c.tag.as_str())
            .collect();
        assert_eq!(
            pairs,
            vec!["rlt_diag_1_2", "rlt_diag_3_4", "rlt_diag_3_5", "rlt_diag_4_5"]
        );
        assert_eq!(broken.len(), 8);
        // Pair (1,2) has j = 2 <= n_x: halved shift coefficient.
        let shift12 = broken.iter().find(|c| c.tag == "rlt_shift_1_2").unwrap();
        assert_eq!(shift12.expr.coeff(VarId::X(2)), rat(1, 2));
        // Pair (3,4) has j = 4 > n_x: unhalved.
        let shift34 = broken.iter().find(|c| c.tag == "rlt_shift_3_4").unwrap();
        assert_eq!(shift34.expr.coeff(VarId::X(4)), rint(1));
        // The diagonal comparison is never halved.
        let diag12 = broken.iter().find(|c| c.tag == "rlt_diag_1_2").unwrap();
        assert_eq!(diag12.expr.coeff(VarId::Xx(1, 2)), rint(1));
        assert_eq!(diag12.expr.coeff(VarId::Xx(1, 1)), rint(-1));
    }

    #[test]
    fn sdp_blocks_present_per_variant() {
        let m = build_sdp(RelaxationId::Sdp1, 2).unwrap();
        assert_eq!(m.psd_blocks.len(), 2);
        assert_eq!(m.psd_blocks[0].dim(), 3);
        let m = build_sdp(RelaxationId::SdpOrd, 3).unwrap();
        assert_eq!(m.psd_blocks.len(), 1);
        assert_eq!(m.psd_blocks[0].label, "moment_y");
        assert_eq!(m.psd_blocks[0].dim(), 4);
        assert!(m.base.decl(VarId::Xx(1, 1)).is_none());
        let m = build_sdp(RelaxationId::SdpComb, 5).unwrap();
        assert_eq!(m.psd_blocks.len(), 2);
        let rlt_rows = m
            .base
            .constraints
            .iter()
            .filter(|c| c.tag.starts_with("rlt_"))
            .count();
        assert_eq!(rlt_rows, 8);
        assert_eq!(m.base.decl(VarId::X(3)).unwrap().upper, Some(rat(1, 2)));
        assert_eq!(m.base.decl(VarId::X(4)).unwrap().upper, Some(rint(1)));
    }

    #[test]
    fn all_models_validate_for_small_sizes() {
        for id in RelaxationId::ALL {
            for n in id.min_n()..=7 {
                let m = build_any(id, n, None).unwrap();
                m.base().validate().unwrap();
                assert_eq!(m.base().objective, LinExpr::term(VarId::Gamma, rint(1)));
            }
        }
    }

    #[test]
    fn relaxation_names_round_trip() {
        for id in RelaxationId::ALL {
            assert_eq!(id.kind_str().parse::<RelaxationId>().unwrap(), id);
        }
        assert!("nope".parse::<RelaxationId>().is_err());
    }
}
