//! Certificates that pin the optimal value of every relaxation from both
//! sides, independently of the solver.
//!
//! For each relaxation with a known optimum the module provides
//!
//! * [`closed_form_bound`], the optimal value as an exact rational,
//! * [`proof_point`], an explicit feasible point attaining that value
//!   (so the optimum is at least the closed form), and
//! * [`aggregation_recipe`], row multipliers whose aggregate proves
//!   `gamma <=` the closed form (so the optimum is at most the closed form).
//!
//! The PSD side is handled by [`ldl_verify`], an exact LDL^T factorization
//! with diagonal pivoting that either returns nonnegative pivots or a
//! rational vector of negative quadratic form. The remaining items are
//! small self-contained derivations used by the test suite: the symmetric
//! reduction of the plain moment relaxation, the redundancy check for
//! order-product cuts, and the conversion from the squared-distance value
//! to the packing radius.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::{
    rat, rint, Block, FeasiblePoint, ModelError, PsdBlock, Rat, VarId,
};
use crate::relax::{
    build_multi_row, clique_cut, partition_indices, CutStrategy, RelaxError, RelaxationId,
};
use crate::simplex::{solve_exact, AggregationRecipe, SolveError, SolveStatus};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("{id} is not defined for n = {n}; it needs n >= {min}")]
    OutOfRange { id: RelaxationId, n: u32, min: u32 },
    #[error("no explicit optimal point is available for {id} at n = {n}")]
    NoPointAvailable { id: RelaxationId, n: u32 },
    #[error("no aggregation recipe is available for {id} at n = {n}")]
    NoRecipeAvailable { id: RelaxationId, n: u32 },
    #[error("the membership program is stated for odd n >= 3, got {0}")]
    BadParity(u32),
    #[error("squared distances are nonnegative, got {0}")]
    NegativeGamma(Rat),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn check_range(id: RelaxationId, n: u32) -> Result<(), CertifyError> {
    if n < id.min_n() {
        return Err(CertifyError::OutOfRange {
            id,
            n,
            min: id.min_n(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Exact optimal value of a relaxation, when one is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedForm {
    Value(Rat),
    /// No closed form is known; the relaxation is export-only here.
    Unavailable,
}

impl ClosedForm {
    /// The value, or a panic; for callers that already matched on the id.
    pub fn unwrap_value(self) -> Rat {
        match self {
            ClosedForm::Value(v) => v,
            ClosedForm::Unavailable => panic!("no closed form for this relaxation"),
        }
    }
}

/// The optimal value of the relaxation as an exact rational.
///
/// The `ord`-free single-row values are constants; the others decay in `n`
/// (or in the partition size `n_y`) and are attained by the points from
/// [`proof_point`] and certified from above by [`aggregation_recipe`].
pub fn closed_form_bound(id: RelaxationId, n: u32) -> Result<ClosedForm, CertifyError> {
    check_range(id, n)?;
    let part = partition_indices(n)?;
    let ny = part.n_y as i64;
    let nn = n as i64;
    let v = match id {
        RelaxationId::Tw => rint(2),
        RelaxationId::TwBnd => rat(1, 2),
        RelaxationId::TwOrd | RelaxationId::Sdp1 => rat(nn, nn - 1),
        RelaxationId::TwComb | RelaxationId::Sdp2 => rat(ny, 4 * (ny - 1)),
        RelaxationId::MtClique => {
            if n % 2 == 1 {
                rat(nn + 1, nn)
            } else {
                rat(nn, nn - 1)
            }
        }
        RelaxationId::MtOrdTri => {
            let t = (nn - 1) / 2;
            rat(2 * (t + 1), 3 * t)
        }
        RelaxationId::MtCombTri => {
            if n <= 8 {
                rat(1, 2)
            } else {
                let t = (ny - 1) / 2;
                rat(t + 1, 6 * t)
            }
        }
        RelaxationId::MtBndClique => {
            if ny == 2 {
                rat(1, 2)
            } else if ny % 2 == 1 {
                rat(ny + 1, 4 * ny)
            } else {
                rat(ny, 4 * (ny - 1))
            }
        }
        RelaxationId::SdpOrd | RelaxationId::SdpComb => return Ok(ClosedForm::Unavailable),
    };
    Ok(ClosedForm::Value(v))
}

// ---------------------------------------------------------------------------
// Proof points
// ---------------------------------------------------------------------------

fn set_coords(p: &mut FeasiblePoint, block: Block, n: u32, f: impl Fn(u32) -> Rat) {
    for i in 1..=n {
        p.set(VarId::coord(block, i), f(i));
    }
}

fn set_products(p: &mut FeasiblePoint, block: Block, n: u32, f: impl Fn(u32, u32) -> Rat) {
    for i in 1..=n {
        for j in i..=n {
            p.set(VarId::product(block, i, j), f(i, j));
        }
    }
}

/// An explicit feasible point of the relaxation whose objective value is
/// the closed form, including the `gamma` entry. Feeding it to the model's
/// `check_feasible` together with [`closed_form_bound`] certifies the lower
/// side of the optimum.
///
/// Points exist for every linear relaxation except `mtcombtri` instances
/// whose partition tail `n_y` is even and at least 4, and for the two
/// moment relaxations with known optima (`sdp1`, `sdp2`). The rest return
/// [`CertifyError::NoPointAvailable`].
pub fn proof_point(id: RelaxationId, n: u32) -> Result<FeasiblePoint, CertifyError> {
    check_range(id, n)?;
    let part = partition_indices(n)?;
    let (nx, ny) = (part.n_x, part.n_y);
    let mut p = FeasiblePoint::new();
    let gamma = match closed_form_bound(id, n)? {
        ClosedForm::Value(v) => v,
        ClosedForm::Unavailable => return Err(CertifyError::NoPointAvailable { id, n }),
    };

    match id {
        RelaxationId::Tw => {
            set_coords(&mut p, Block::X, n, |_| rat(1, 2));
            set_coords(&mut p, Block::Y, n, |_| rat(1, 2));
        }
        RelaxationId::TwBnd => {
            set_coords(&mut p, Block::X, n, |i| {
                if i <= nx {
                    rat(1, 4)
                } else {
                    rat(1, 2)
                }
            });
            set_coords(&mut p, Block::Y, n, |i| {
                if i <= ny {
                    rat(1, 4)
                } else {
                    rat(1, 2)
                }
            });
        }
        RelaxationId::TwOrd => {
            set_coords(&mut p, Block::X, n, |i| rat(i as i64 - 1, n as i64 - 1));
            set_coords(&mut p, Block::Y, n, |_| rat(1, 2));
        }
        RelaxationId::TwComb => {
            set_coords(&mut p, Block::X, n, |i| {
                if i <= ny {
                    rat(i as i64 - 1, 2 * (ny as i64 - 1))
                } else {
                    rat(1, 2)
                }
            });
            set_coords(&mut p, Block::Y, n, |i| {
                if i <= ny {
                    rat(1, 4)
                } else {
                    rat(1, 2)
                }
            });
        }
        RelaxationId::MtClique => {
            // Odd n: every hat coordinate sits at q/2 with pairwise products
            // q/4, the second moments of a uniformly random (n+1)/2-subset
            // of [n]. Even n drops the last point to the origin and plays
            // the odd construction on the first n - 1 indices.
            let live = if n % 2 == 1 { n } else { n - 1 };
            let q = gamma.clone();
            let coord = |i: u32| if i <= live { &q / rint(2) } else { Rat::zero() };
            let prod = |i: u32, j: u32| {
                if j > live {
                    Rat::zero()
                } else if i == j {
                    &q / rint(2)
                } else {
                    &q / rint(4)
                }
            };
            set_coords(&mut p, Block::X, n, coord);
            set_coords(&mut p, Block::Y, n, coord);
            set_products(&mut p, Block::X, n, prod);
            set_products(&mut p, Block::Y, n, prod);
        }
        RelaxationId::MtOrdTri => {
            // All pair rows are tight: the lifted products track the chain
            // exactly, Y_ij = (x_j - x_i) / 2, so each row collapses to the
            // constant 2(1 + 1/T)/3. The x spacing only has to keep every
            // window of three at least 1/T wide for the triangle cuts.
            let t = ((n - 1) / 2) as i64;
            let x = move |i: u32| {
                if n % 2 == 1 {
                    rat(i as i64 - 1, 2 * t)
                } else {
                    rat((i as i64 - 1) / 2, t)
                }
            };
            let ylevel = rat(t + 1, 3 * t);
            set_coords(&mut p, Block::X, n, x);
            set_coords(&mut p, Block::Y, n, |_| ylevel.clone());
            set_products(&mut p, Block::Y, n, move |i, j| {
                if i == j {
                    ylevel.clone()
                } else {
                    (x(j) - x(i)) / rint(2)
                }
            });
        }
        RelaxationId::MtCombTri => {
            if ny == 2 {
                // Small instances: the first point anchors at zero, the
                // rest of the left-half prefix at 1/2. The cross products
                // split unevenly (3/16 against 1/16) so that the pair rows
                // with the 1/2-anchored second point survive their flat
                // envelope piece while the mapped triples stay tight.
                set_coords(&mut p, Block::X, n, |i| {
                    if i == 1 {
                        Rat::zero()
                    } else {
                        rat(1, 2)
                    }
                });
                set_coords(&mut p, Block::Y, n, |i| {
                    if i <= 2 {
                        rat(1, 4)
                    } else {
                        rat(1, 2)
                    }
                });
                set_products(&mut p, Block::Y, n, |i, j| {
                    if i == j {
                        if i <= 2 {
                            rat(1, 8)
                        } else {
                            rat(1, 2)
                        }
                    } else if j == 2 {
                        Rat::zero()
                    } else if i == 1 {
                        if j <= nx {
                            rat(3, 16)
                        } else {
                            rat(1, 8)
                        }
                    } else if i == 2 {
                        if j <= nx {
                            rat(1, 16)
                        } else {
                            rat(1, 8)
                        }
                    } else {
                        rat(1, 4)
                    }
                });
            } else if ny % 2 == 1 {
                // Tail prefix spread uniformly over [0, 1/2]; products of
                // consecutive prefix points track the spacing so the pair
                // rows are tight, and the mixed products are plain products
                // of the coordinate levels.
                let d = ny as i64 - 1;
                let x = move |i: u32| {
                    if i <= ny {
                        rat(i as i64 - 1, 2 * d)
                    } else {
                        rat(1, 2)
                    }
                };
                let cy = rat(ny as i64 + 1, 6 * d);
                set_coords(&mut p, Block::X, n, x);
                {
                    let cy = cy.clone();
                    set_coords(&mut p, Block::Y, n, move |i| {
                        if i <= ny {
                            cy.clone()
                        } else {
                            rat(1, 2)
                        }
                    });
                }
                set_products(&mut p, Block::Y, n, move |i, j| {
                    if i == j {
                        if i <= ny {
                            &cy / rint(2)
                        } else {
                            rat(1, 2)
                        }
                    } else if j <= ny {
                        rat(j as i64 - i as i64, 8 * d)
                    } else if i <= ny {
                        &cy / rint(2)
                    } else {
                        rat(1, 4)
                    }
                });
            } else {
                // With an even tail the uniform spread overruns the half
                // bound and the flat spread breaks the mapped triples; no
                // explicit point is known.
                return Err(CertifyError::NoPointAvailable { id, n });
            }
        }
        RelaxationId::MtBndClique => {
            if ny == 2 {
                point3_into(&mut p, n, nx, ny);
            } else {
                // Subset second moments again, now on the tail prefix: for
                // odd n_y a uniformly random (n_y+1)/2-subset, for even n_y
                // the same on the first n_y - 1 indices with the last
                // dropped to the origin.
                let live = if ny % 2 == 1 { ny } else { ny - 1 };
                let q = rat(live as i64 + 1, live as i64);
                let coord = {
                    let q = q.clone();
                    move |i: u32| {
                        if i <= live {
                            &q / rint(4)
                        } else if i <= ny {
                            Rat::zero()
                        } else {
                            rat(1, 2)
                        }
                    }
                };
                let prod = |q: Rat, half_cut: u32| {
                    move |i: u32, j: u32| {
                        if i == j {
                            let c = coord_point2(&q, live, ny, i);
                            if i <= half_cut {
                                c / rint(2)
                            } else {
                                c
                            }
                        } else if j <= ny {
                            if j <= live {
                                &q / rint(16)
                            } else {
                                Rat::zero()
                            }
                        } else if i <= ny {
                            if i <= live {
                                &q / rint(8)
                            } else {
                                Rat::zero()
                            }
                        } else {
                            rat(1, 4)
                        }
                    }
                };
                set_coords(&mut p, Block::X, n, coord.clone());
                set_coords(&mut p, Block::Y, n, coord);
                set_products(&mut p, Block::X, n, prod(q.clone(), nx));
                set_products(&mut p, Block::Y, n, prod(q, ny));
            }
        }
        RelaxationId::Sdp1 => {
            let off = rat(n as i64 - 2, 4 * (n as i64 - 1));
            let prod = move |i: u32, j: u32| if i == j { rat(1, 2) } else { off.clone() };
            set_coords(&mut p, Block::X, n, |_| rat(1, 2));
            set_coords(&mut p, Block::Y, n, |_| rat(1, 2));
            set_products(&mut p, Block::X, n, prod.clone());
            set_products(&mut p, Block::Y, n, prod);
        }
        RelaxationId::Sdp2 => {
            point3_into(&mut p, n, nx, ny);
        }
        RelaxationId::SdpOrd | RelaxationId::SdpComb => {
            return Err(CertifyError::NoPointAvailable { id, n });
        }
    }

    p.set(VarId::Gamma, gamma);
    Ok(p)
}

fn coord_point2(q: &Rat, live: u32, ny: u32, i: u32) -> Rat {
    if i <= live {
        q / rint(4)
    } else if i <= ny {
        Rat::zero()
    } else {
        rat(1, 2)
    }
}

/// The shared rank-deficient point of the halved moment relaxation: both
/// coordinate blocks sit at 1/4 on the tail prefix and 1/2 elsewhere, the
/// halved diagonals are tight, and the prefix block of the Schur
/// complement is an exactly singular equicorrelation matrix.
fn point3_into(p: &mut FeasiblePoint, n: u32, nx: u32, ny: u32) {
    let coord = move |i: u32| if i <= ny { rat(1, 4) } else { rat(1, 2) };
    let off_small = rat(ny as i64 - 2, 16 * (ny as i64 - 1));
    let prod = |half_cut: u32| {
        let off_small = off_small.clone();
        move |i: u32, j: u32| {
            if i == j {
                if i <= half_cut {
                    coord(i) / rint(2)
                } else {
                    coord(i)
                }
            } else if j <= ny {
                off_small.clone()
            } else if i <= ny {
                rat(1, 8)
            } else {
                rat(1, 4)
            }
        }
    };
    set_coords(p, Block::X, n, coord);
    set_coords(p, Block::Y, n, coord);
    set_products(p, Block::X, n, prod(nx));
    set_products(p, Block::Y, n, prod(ny));
}

// ---------------------------------------------------------------------------
// Aggregation recipes
// ---------------------------------------------------------------------------

/// Row multipliers that prove `gamma <=` the closed form when fed to
/// `dual_certificate_check` against the canonically built model.
///
/// The single-row and clique families have patterned recipes; the two
/// smallest `mtbndclique` and `mtcombtri` regimes (`n_y = 2`) read their
/// multipliers off an exact optimal basis instead. The moment relaxations
/// have no linear recipe and return [`CertifyError::NoRecipeAvailable`].
pub fn aggregation_recipe(id: RelaxationId, n: u32) -> Result<AggregationRecipe, CertifyError> {
    check_range(id, n)?;
    let part = partition_indices(n)?;
    let ny = part.n_y;
    let claimed = match closed_form_bound(id, n)? {
        ClosedForm::Value(v) => v,
        ClosedForm::Unavailable => return Err(CertifyError::NoRecipeAvailable { id, n }),
    };
    let kind = id.kind_str();
    let mut rows: Vec<(String, Rat)> = Vec::new();

    match id {
        RelaxationId::Tw | RelaxationId::TwBnd => {
            for k in 1..=4 {
                rows.push((format!("{kind}_pair_1_2_{k}"), rat(1, 4)));
            }
        }
        RelaxationId::TwOrd => {
            for i in 1..n {
                for k in 1..=2 {
                    rows.push((format!("{kind}_pair_{i}_{}_{k}", i + 1), rat(1, 2)));
                }
            }
        }
        RelaxationId::TwComb => {
            for i in 1..ny {
                for k in 1..=2 {
                    rows.push((format!("{kind}_pair_{i}_{}_{k}", i + 1), rat(1, 2)));
                }
            }
        }
        RelaxationId::MtClique => {
            let live = if n % 2 == 1 { n } else { n - 1 };
            let alpha = (live as i64 - 1) / 2;
            for i in 1..=live {
                for j in (i + 1)..=live {
                    rows.push((format!("{kind}_pair_{i}_{j}"), rint(1)));
                }
            }
            for i in 1..=live {
                rows.push((format!("diag_x_{i}"), rint(live as i64 - 1)));
                rows.push((format!("diag_y_{i}"), rint(live as i64 - 1)));
            }
            let set: Vec<u32> = (1..=live).collect();
            for block in [Block::X, Block::Y] {
                rows.push((clique_cut(block, &set, alpha)?.tag, rint(2)));
            }
        }
        RelaxationId::MtBndClique => {
            if ny == 2 {
                return solved_recipe(id, n, CutStrategy::Exhaustive { max_m: n }, claimed);
            }
            let live = if ny % 2 == 1 { ny } else { ny - 1 };
            let alpha = (live as i64 - 1) / 2;
            for i in 1..=live {
                for j in (i + 1)..=live {
                    rows.push((format!("{kind}_pair_{i}_{j}"), rint(1)));
                }
            }
            for i in 1..=live {
                rows.push((format!("diag_x_{i}"), rint(live as i64 - 1)));
                rows.push((format!("diag_y_{i}"), rint(live as i64 - 1)));
            }
            let set: Vec<u32> = (1..=live).collect();
            for block in [Block::X, Block::Y] {
                rows.push((clique_cut(block, &set, alpha)?.tag, rat(1, 2)));
            }
        }
        RelaxationId::MtOrdTri => {
            // One window per odd l: the three pair rows, the triangle cut
            // and the three diagonal rows aggregate to
            //   gamma <= 2/3 + 2(x_{l+2} - x_l)/3,
            // and the windows telescope across 1..2T+1.
            let t = (n - 1) / 2;
            for w in 0..t {
                let l = 2 * w + 1;
                push_window(&mut rows, kind, l, "", rat(1, 3), rat(2, 3), rat(2, 3))?;
            }
        }
        RelaxationId::MtCombTri => {
            if n <= 8 {
                return solved_recipe(id, n, CutStrategy::TriangleOnly, claimed);
            }
            // Same telescoping windows, now inside the tail prefix with the
            // halved envelope piece and the rescaled triangle cut.
            let t = (ny - 1) / 2;
            for w in 0..t {
                let l = 2 * w + 1;
                push_window(&mut rows, kind, l, "_1", rat(1, 3), rat(1, 6), rat(2, 3))?;
            }
        }
        RelaxationId::Sdp1
        | RelaxationId::Sdp2
        | RelaxationId::SdpOrd
        | RelaxationId::SdpComb => {
            return Err(CertifyError::NoRecipeAvailable { id, n });
        }
    }

    Ok(AggregationRecipe {
        multipliers: rows,
        claimed,
    })
}

fn push_window(
    rows: &mut Vec<(String, Rat)>,
    kind: &str,
    l: u32,
    pair_suffix: &str,
    w_pair: Rat,
    w_tri: Rat,
    w_diag: Rat,
) -> Result<(), CertifyError> {
    let (a, b, c) = (l, l + 1, l + 2);
    for (i, j) in [(a, b), (a, c), (b, c)] {
        rows.push((format!("{kind}_pair_{i}_{j}{pair_suffix}"), w_pair.clone()));
    }
    rows.push((clique_cut(Block::Y, &[a, b, c], 1)?.tag, w_tri));
    for i in [a, b, c] {
        rows.push((format!("diag_y_{i}"), w_diag.clone()));
    }
    Ok(())
}

/// Multipliers read off an exact optimal basis of the canonical model.
/// Deterministic because the build order and the pivot rule are. The
/// claimed value stays the closed form, so the check still fails loudly if
/// the solve and the closed form ever drift apart.
fn solved_recipe(
    id: RelaxationId,
    n: u32,
    strategy: CutStrategy,
    claimed: Rat,
) -> Result<AggregationRecipe, CertifyError> {
    let model = build_multi_row(id, n, strategy)?;
    let res = solve_exact(&model)?;
    if res.status != SolveStatus::Optimal {
        return Err(CertifyError::Solve(SolveError::Internal(format!(
            "{id} at n = {n} did not solve to optimality"
        ))));
    }
    Ok(AggregationRecipe {
        multipliers: res.duals_by_tag(&model),
        claimed,
    })
}

// ---------------------------------------------------------------------------
// Clique membership program
// ---------------------------------------------------------------------------

/// Maximal violation the all-equal configuration can extract from any
/// clique cut: with every coordinate at `q/2 = (n+1)/(2n)` and every
/// product at `q/4`, the cut on an m-subset at level alpha has slack
///
/// ```text
/// g(m, alpha) = (q/2) alpha m - (q/8) m (m-1) - alpha (alpha+1) / 2.
/// ```
///
/// The maximum over `3 <= m <= n`, `1 <= alpha <= m - 2` is exactly zero
/// for odd `n` (attained at the full set with its middle alpha), which is
/// what makes the all-equal point optimal rather than cut off. Even `n`
/// has no such configuration and is rejected.
pub fn clique_membership_qp(n: u32) -> Result<Rat, CertifyError> {
    if n % 2 == 0 || n < 3 {
        return Err(CertifyError::BadParity(n));
    }
    let q = rat(n as i64 + 1, n as i64);
    let mut best: Option<Rat> = None;
    for m in 3..=(n as i64) {
        for alpha in 1..=(m - 2) {
            let g = &q / rint(2) * rint(alpha * m) - &q / rint(8) * rint(m * (m - 1))
                - rat(alpha * (alpha + 1), 2);
            if best.as_ref().is_none_or(|b| g > *b) {
                best = Some(g);
            }
        }
    }
    Ok(best.expect("n >= 3 admits at least one cut"))
}

// ---------------------------------------------------------------------------
// Exact LDL^T verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LdlError {
    #[error("matrix is not symmetric at entry ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is not positive semidefinite: w^T A w = {value}")]
    NotPsdWitness { witness: Vec<Rat>, value: Rat },
}

/// A pivoted factorization `A[perm[i]][perm[j]] = sum_k L[i][k] d[k] L[j][k]`
/// with unit lower-triangular `L` and nonnegative pivots `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdlFactors {
    /// Elimination order; `perm[k]` is the original index pivoted at step k.
    pub perm: Vec<usize>,
    /// Pivots in elimination order, all nonnegative.
    pub pivots: Vec<Rat>,
    /// Unit lower-triangular multipliers, indexed by elimination position.
    pub lower: Vec<Vec<Rat>>,
}

impl LdlFactors {
    /// Rebuilds the matrix in its original indexing; exact.
    pub fn reconstruct(&self) -> Vec<Vec<Rat>> {
        let dim = self.perm.len();
        let mut a = vec![vec![Rat::zero(); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = Rat::zero();
                for k in 0..=i.min(j) {
                    s += &self.lower[i][k] * &self.pivots[k] * &self.lower[j][k];
                }
                a[self.perm[i]][self.perm[j]] = s;
            }
        }
        a
    }
}

/// Exact positive-semidefiniteness check by LDL^T with greedy diagonal
/// pivoting (largest remaining diagonal, ties to the smallest index).
///
/// On success every pivot is nonnegative and [`LdlFactors::reconstruct`]
/// returns the input exactly. On failure the error carries a rational
/// vector `w` with `w^T A w < 0`, lifted back through the eliminations, so
/// the refutation can be replayed against the original matrix by anyone.
pub fn ldl_verify(a: &[Vec<Rat>]) -> Result<LdlFactors, LdlError> {
    let dim = a.len();
    for (i, row) in a.iter().enumerate() {
        if row.len() != dim {
            return Err(LdlError::NotSymmetric {
                row: i,
                col: row.len().min(dim.saturating_sub(1)),
            });
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            if a[i][j] != a[j][i] {
                return Err(LdlError::NotSymmetric { row: j, col: i });
            }
        }
    }

    let mut s: Vec<Vec<Rat>> = a.to_vec();
    let mut alive: Vec<usize> = (0..dim).collect();
    let mut perm: Vec<usize> = Vec::with_capacity(dim);
    let mut pivots: Vec<Rat> = Vec::with_capacity(dim);
    // Multipliers per step, as (original row, multiplier) over the rows
    // still alive after that step; doubles as the witness lifting record.
    let mut steps: Vec<(usize, Vec<(usize, Rat)>)> = Vec::with_capacity(dim);

    let witness = |targets: Vec<(usize, Rat)>,
                   steps: &[(usize, Vec<(usize, Rat)>)]|
     -> LdlError {
        let mut w = vec![Rat::zero(); dim];
        for (idx, coef) in targets {
            w[idx] = coef;
        }
        for (p, mults) in steps.iter().rev() {
            let mut acc = Rat::zero();
            for (r, m) in mults {
                acc -= m * &w[*r];
            }
            w[*p] = acc;
        }
        let mut value = Rat::zero();
        for (i, wi) in w.iter().enumerate() {
            if wi.is_zero() {
                continue;
            }
            for (j, wj) in w.iter().enumerate() {
                if !wj.is_zero() {
                    value += wi * &a[i][j] * wj;
                }
            }
        }
        debug_assert!(value.is_negative(), "lifted witness lost negativity");
        LdlError::NotPsdWitness { witness: w, value }
    };

    while !alive.is_empty() {
        // Largest remaining diagonal, ties to the smallest index.
        let mut p = alive[0];
        for &r in &alive {
            if s[r][r] > s[p][p] {
                p = r;
            }
        }
        if s[p][p].is_positive() {
            let d = s[p][p].clone();
            alive.retain(|&r| r != p);
            let mults: Vec<(usize, Rat)> = alive
                .iter()
                .map(|&r| (r, &s[r][p] / &d))
                .collect();
            for &r in &alive {
                for &c in &alive {
                    let delta = &s[r][p] * &s[p][c] / &d;
                    let cur = std::mem::take(&mut s[r][c]);
                    s[r][c] = cur - delta;
                }
            }
            perm.push(p);
            pivots.push(d);
            steps.push((p, mults));
            continue;
        }
        // No positive diagonal remains.
        if let Some(&q) = alive.iter().find(|&&r| s[r][r].is_negative()) {
            return Err(witness(vec![(q, Rat::one())], &steps));
        }
        // All remaining diagonals are zero; a nonzero off-diagonal entry
        // c at (i, j) makes e_i - sign(c) e_j a direction of value -2|c|.
        let mut offdiag: Option<(usize, usize)> = None;
        'scan: for (ai, &r) in alive.iter().enumerate() {
            for &c in &alive[(ai + 1)..] {
                if !s[r][c].is_zero() {
                    offdiag = Some((r, c));
                    break 'scan;
                }
            }
        }
        if let Some((r, c)) = offdiag {
            let sign = if s[r][c].is_positive() {
                -Rat::one()
            } else {
                Rat::one()
            };
            return Err(witness(vec![(r, Rat::one()), (c, sign)], &steps));
        }
        // The remaining block is identically zero: zero pivots, no updates.
        for &r in &alive {
            perm.push(r);
            pivots.push(Rat::zero());
            steps.push((r, Vec::new()));
        }
        break;
    }

    // Assemble L rows in elimination order from the recorded columns.
    let mut pos = vec![0usize; dim];
    for (k, &p) in perm.iter().enumerate() {
        pos[p] = k;
    }
    let mut lower = vec![vec![Rat::zero(); dim]; dim];
    for (k, (_, mults)) in steps.iter().enumerate() {
        lower[k][k] = Rat::one();
        for (r, m) in mults {
            lower[pos[*r]][k] = m.clone();
        }
    }
    Ok(LdlFactors {
        perm,
        pivots,
        lower,
    })
}

// ---------------------------------------------------------------------------
// Natural-order factors of the shared rank-deficient point
// ---------------------------------------------------------------------------

/// LDL^T factors of both bordered moment matrices at the halved moment
/// relaxation's optimal point, in natural order (no pivoting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point3Ldl {
    pub dx: Vec<Rat>,
    pub lx: Vec<Vec<Rat>>,
    pub dy: Vec<Rat>,
    pub ly: Vec<Vec<Rat>>,
}

/// Factors the two bordered moment matrices of the [`proof_point`] for the
/// halved moment relaxation without pivoting. The diagonal follows a short
/// closed pattern: a leading 1, then `(1/16) prod_{i<j-1} (1 - 1/(n_y-i)^2)`
/// down the tail prefix until it hits an exact zero, zeros across the rest
/// of the halved range, and 1/4 beyond; the x block keeps its zeros through
/// the left-half prefix, the y block only through the tail prefix.
pub fn point3_ldl_factors(n: u32) -> Result<Point3Ldl, CertifyError> {
    let point = proof_point(RelaxationId::Sdp2, n)?;
    let mx = PsdBlock::for_block(Block::X, n).eval(&point)?;
    let my = PsdBlock::for_block(Block::Y, n).eval(&point)?;
    let (dx, lx) = natural_ldl(&mx);
    let (dy, ly) = natural_ldl(&my);
    Ok(Point3Ldl { dx, lx, dy, ly })
}

/// Unpivoted LDL^T; requires every zero pivot to have a zero column below
/// it, which holds for the rank-deficient points factored here.
fn natural_ldl(a: &[Vec<Rat>]) -> (Vec<Rat>, Vec<Vec<Rat>>) {
    let dim = a.len();
    let mut s = a.to_vec();
    let mut d = Vec::with_capacity(dim);
    let mut lower = vec![vec![Rat::zero(); dim]; dim];
    for k in 0..dim {
        lower[k][k] = Rat::one();
        let piv = s[k][k].clone();
        assert!(
            !piv.is_negative(),
            "negative pivot in a factorization of a certified point"
        );
        d.push(piv.clone());
        for r in (k + 1)..dim {
            if piv.is_zero() {
                assert!(
                    s[r][k].is_zero(),
                    "zero pivot with a nonzero column; the point lost rank structure"
                );
                continue;
            }
            let m = &s[r][k] / &piv;
            lower[r][k] = m.clone();
            for c in (k + 1)..=r {
                let delta = &m * &s[k][c];
                let cur = std::mem::take(&mut s[r][c]);
                s[r][c] = cur - delta;
                s[c][r] = s[r][c].clone();
            }
        }
    }
    (d, lower)
}

// ---------------------------------------------------------------------------
// Symmetric reduction of the plain moment relaxation
// ---------------------------------------------------------------------------

/// Outcome of collapsing the plain moment relaxation by symmetry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sdp1Reduction {
    /// Common coordinate level at the optimum.
    pub t_star: Rat,
    /// Common off-diagonal product at the optimum.
    pub z_star: Rat,
    /// Optimal value `n / (n - 1)`.
    pub bound: Rat,
}

/// Determinant of the order-`m` leading principal submatrix of the Schur
/// complement under the symmetric ansatz (all coordinates `t`, diagonal
/// products tight at `t`, off-diagonal products `z`):
///
/// ```text
/// (t - z)^{m-1} (t + (m - 1) z - m t^2)
/// ```
pub fn sdp1_minor_value(m: u32, t: &Rat, z: &Rat) -> Rat {
    assert!(m >= 1);
    let lead = t - z;
    let mut pow = Rat::one();
    for _ in 1..m {
        pow *= &lead;
    }
    pow * (t + rint(m as i64 - 1) * z - rint(m as i64) * t * t)
}

/// Objective of the symmetric reduction after eliminating `z` at the PSD
/// boundary: `4n (t - t^2) / (n - 1)`.
pub fn sdp1_profile(n: u32, t: &Rat) -> Rat {
    rat(4 * n as i64, n as i64 - 1) * (t - t * t)
}

/// Collapses the plain moment relaxation by symmetry: at the optimum all
/// coordinates share a level `t`, all off-diagonal products a level `z`,
/// and the last minor pins `z` to `(n t^2 - t) / (n - 1)`. The objective
/// becomes the concave profile [`sdp1_profile`], maximized at `t = 1/2`,
/// reproducing the closed form `n / (n - 1)` without a solver.
pub fn sdp1_reduction(n: u32) -> Result<Sdp1Reduction, CertifyError> {
    check_range(RelaxationId::Sdp1, n)?;
    let t = rat(1, 2);
    let z = (rint(n as i64) * &t * &t - &t) / rint(n as i64 - 1);
    let bound = sdp1_profile(n, &t);
    debug_assert!(sdp1_minor_value(n, &t, &z).is_zero());
    debug_assert_eq!(bound, rat(n as i64, n as i64 - 1));
    Ok(Sdp1Reduction {
        t_star: t,
        z_star: z,
        bound,
    })
}

// ---------------------------------------------------------------------------
// Order-product cut redundancy
// ---------------------------------------------------------------------------

/// Checks that the rescaled product lower bounds (the McCormick floors in
/// hat coordinates) already hold at the halved moment relaxation's optimal
/// point, i.e. adding them as rows could not cut that point off:
///
/// * both indices in the rescaled prefix: `V_ij >= v_i/2 + v_j/2 - 1/4`,
/// * one index in: `V_ij >= v_i + v_j/2 - 1/2`,
/// * both out: `V_ij >= v_i + v_j - 1`.
pub fn rlt_redundancy_check(n: u32) -> Result<bool, CertifyError> {
    let part = partition_indices(n)?;
    let point = proof_point(RelaxationId::Sdp2, n)?;
    for (block, cut) in [(Block::X, part.n_x), (Block::Y, part.n_y)] {
        for i in 1..=n {
            for j in (i + 1)..=n {
                let vi = point.get(VarId::coord(block, i)).expect("point is total");
                let vj = point.get(VarId::coord(block, j)).expect("point is total");
                let vij = point
                    .get(VarId::product(block, i, j))
                    .expect("point is total");
                let floor = if j <= cut {
                    (&vi + &vj) / rint(2) - rat(1, 4)
                } else if i <= cut {
                    &vi + &vj / rint(2) - rat(1, 2)
                } else {
                    &vi + &vj - rint(1)
                };
                if vij < floor {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Radius conversion
// ---------------------------------------------------------------------------

/// Converts a squared-distance value to the packing radius
/// `r = sqrt(gamma) / (2 (1 + sqrt(gamma)))` for `n` equal circles in the
/// unit square. The square root is taken by integer square root at 40
/// decimal digits, so the result is exact to well under `10^-39`.
pub fn gamma_to_radius(gamma: &Rat) -> Result<Rat, CertifyError> {
    if gamma.is_negative() {
        return Err(CertifyError::NegativeGamma(gamma.clone()));
    }
    if gamma.is_zero() {
        return Ok(Rat::zero());
    }
    let scale = num_bigint::BigInt::from(10u32).pow(40);
    let p = gamma.numer().clone();
    let q = gamma.denom().clone();
    // floor(sqrt(p q) * 10^40) / (q 10^40) <= sqrt(p/q), off by < 10^-40.
    let root = (&p * &q * &scale * &scale).sqrt();
    let s = Rat::new(root, q * scale);
    Ok(&s / (rint(2) * (rint(1) + &s)))
}

// ---------------------------------------------------------------------------
