//! Blockwise truncated-SVD regularization of the discrete system.
//!
//! Each tall block `D_K = U S V*` is replaced by `D_K^+ = V S_eps^+ U*`,
//! where `S_eps^+` inverts only singular values `s_q >= eps s_1`, and the
//! square system `(I - D^+ C) u = D^+ b` is solved by pivoted LU after an
//! exact change of variables that removes the `1 / s_q` scaling (see
//! [`solve_uwvf`]).
//!
//! The system inherits the element adjacency pattern of `C`, so elements are
//! renumbered (reverse Cuthill-McKee) before factoring to keep the band
//! narrow. The factorization itself is ordinary partial-pivoting LU.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::assembly::{offsets, BlockMatrix};
use crate::error::LinalgError;
use crate::linalg::{bandwidths, norm2, svd, CMatrix, LuFactors};

pub const DEFAULT_EPSILON: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(
        "regularized system is singular (zero pivot in column {column}); \
         worst block {worst_block} has sigma_min/sigma_max = {worst_ratio:.3e}, rank {worst_rank}"
    )]
    Singular {
        column: usize,
        worst_block: usize,
        worst_ratio: f64,
        worst_rank: usize,
    },
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Full SVD of one block with its truncation rank.
#[derive(Clone, Debug)]
pub struct SvdBlock {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
    pub rank_eps: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

fn check_epsilon(epsilon: f64) -> Result<(), SolveError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(SolveError::BadEpsilon(epsilon))
    }
}

/// Number of singular values with `s_q >= epsilon s_1`.
pub fn truncation_rank(s: &[f64], epsilon: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().take_while(|&&x| x >= epsilon * s1).count(),
        _ => 0,
    }
}

/// SVD of a `rows >= cols` matrix; `rank_eps` is taken at `epsilon`.
pub fn complex_svd(a: &CMatrix, epsilon: f64) -> Result<SvdBlock, SolveError> {
    check_epsilon(epsilon)?;
    let f = svd(a)?;
    let rank_eps = truncation_rank(&f.s, epsilon);
    Ok(SvdBlock {
        sigma_max: f.s[0],
        sigma_min: *f.s.last().unwrap(),
        rank_eps,
        u: f.u,
        s: f.s,
        v: f.v,
    })
}

/// `V S_eps^+ U*` for one block.
#[derive(Clone, Debug)]
pub struct PinvBlock {
    pub data: CMatrix,
    pub rank: usize,
}

pub fn truncated_pinv(f: &SvdBlock, epsilon: f64) -> Result<PinvBlock, SolveError> {
    check_epsilon(epsilon)?;
    let rank = truncation_rank(&f.s, epsilon);
    let (m, n) = (f.u.rows(), f.v.rows());
    let mut data = CMatrix::zeros(n, m);
    for q in 0..rank {
        let inv = 1.0 / f.s[q];
        let vq = f.v.col(q);
        let uq = f.u.col(q);
        for (j, uj) in uq.iter().enumerate() {
            let a = uj.conj() * inv;
            let col = data.col_mut(j);
            for (c, vi) in col.iter_mut().zip(vq) {
                *c += a * vi;
            }
        }
    }
    Ok(PinvBlock { data, rank })
}

/// Block-diagonal regularized inverse of `D`.
#[derive(Clone, Debug)]
pub struct RegularizedInverse {
    pub epsilon: f64,
    pub blocks: Vec<PinvBlock>,
    /// Offsets of the trial (row) index ranges.
    pub trial_offsets: Vec<usize>,
    /// Offsets of the test (column) index ranges.
    pub test_offsets: Vec<usize>,
}

impl RegularizedInverse {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = Vec::with_capacity(*self.trial_offsets.last().unwrap());
        for (k, b) in self.blocks.iter().enumerate() {
            y.extend(b.data.matvec(&x[self.test_offsets[k]..self.test_offsets[k + 1]]));
        }
        y
    }
}

/// Singular-value diagnostics of one `D_K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockStats {
    pub n_test: usize,
    pub n_trial: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub coefficients: Vec<C64>,
    pub blocks: Vec<BlockStats>,
    /// Residual of the reduced system actually factored (see
    /// [`solve_uwvf`]); [`unscaled_residual`] gives the trial-space one.
    pub residual: f64,
    /// Norm of the reduced right-hand side `S_r^{-1/2} U_r* b`.
    pub rhs_norm: f64,
    pub coeff_norm: f64,
    pub element_coeff_norms: Vec<f64>,
    pub epsilon: f64,
    /// Set when the residual exceeds `1e-8` times the right-hand side.
    pub residual_warning: bool,
    /// Lower and upper bandwidth of the factored system.
    pub bandwidth: (usize, usize),
    /// Size of the reduced system, the sum of the truncation ranks.
    pub reduced_dim: usize,
    pub inverse: RegularizedInverse,
}

impl SolveReport {
    pub fn min_rank_ratio(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.rank as f64 / b.n_trial as f64)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sigma_min_over_max(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.sigma_min / b.sigma_max)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn relative_residual(&self) -> f64 {
        if self.rhs_norm > 0.0 {
            self.residual / self.rhs_norm
        } else {
            self.residual
        }
    }
}

/// Reverse Cuthill-McKee ordering of a graph given by adjacency lists.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&v| !seen[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .unwrap();
        seen[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            next.dedup();
            for w in next {
                seen[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// Largest distance in `order` between adjacent vertices.
fn block_bandwidth(adj: &[Vec<usize>], order: &[usize]) -> usize {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    adj.iter()
        .enumerate()
        .flat_map(|(v, nb)| nb.iter().map(move |&w| (v, w)))
        .map(|(v, w)| pos[v].abs_diff(pos[w]))
        .max()
        .unwrap_or(0)
}

fn check_dimensions(d: &BlockMatrix, c: &BlockMatrix, b: &[C64]) -> Result<usize, SolveError> {
    let nelem = d.row_offsets.len() - 1;
    if d.blocks.len() != nelem
        || d.blocks
            .iter()
            .enumerate()
            .any(|(k, blk)| blk.row_elem != k || blk.col_elem != k)
    {
        return Err(SolveError::Dimension(
            "D must hold exactly one diagonal block per element, in order".into(),
        ));
    }
    if c.row_offsets != d.row_offsets || c.col_offsets != d.col_offsets {
        return Err(SolveError::Dimension("C and D block layouts differ".into()));
    }
    if b.len() != d.nrows() {
        return Err(SolveError::Dimension(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            d.nrows()
        )));
    }
    for (k, blk) in d.blocks.iter().enumerate() {
        if blk.data.rows() < blk.data.cols() {
            return Err(SolveError::Dimension(format!(
                "block {k} has fewer test ({}) than trial ({}) functions",
                blk.data.rows(),
                blk.data.cols()
            )));
        }
    }
    Ok(nelem)
}

/// Per-element factors of the retained part `D_K = U_r S_r V_r*`:
/// `left = S_r^{-1/2} U_r*` and `right = V_r S_r^{-1/2}`, so that
/// `D_K^+ = right * left`.
#[derive(Clone, Debug)]
struct ScaledFactors {
    left: CMatrix,
    right: CMatrix,
}

fn scaled_factors(f: &SvdBlock, rank: usize) -> ScaledFactors {
    let (m, n) = (f.u.rows(), f.v.rows());
    let mut left = CMatrix::zeros(rank, m);
    let mut right = CMatrix::zeros(n, rank);
    for q in 0..rank {
        let s = f.s[q].sqrt().recip();
        for (j, uj) in f.u.col(q).iter().enumerate() {
            left.col_mut(j)[q] = uj.conj() * s;
        }
        for (r, vi) in right.col_mut(q).iter_mut().zip(f.v.col(q)) {
            *r = vi * s;
        }
    }
    ScaledFactors { left, right }
}

struct Factorization {
    pinv: RegularizedInverse,
    scaled: Vec<ScaledFactors>,
    stats: Vec<BlockStats>,
}

fn factor_blocks(d: &BlockMatrix, epsilon: f64) -> Result<Factorization, SolveError> {
    check_epsilon(epsilon)?;
    let parts: Vec<(PinvBlock, ScaledFactors, BlockStats)> = d
        .blocks
        .par_iter()
        .map(|blk| {
            let f = complex_svd(&blk.data, epsilon)?;
            let p = truncated_pinv(&f, epsilon)?;
            let sc = scaled_factors(&f, p.rank);
            let stats = BlockStats {
                n_test: blk.data.rows(),
                n_trial: blk.data.cols(),
                sigma_max: f.sigma_max,
                sigma_min: f.sigma_min,
                rank: p.rank,
            };
            Ok((p, sc, stats))
        })
        .collect::<Result<_, SolveError>>()?;
    let mut blocks = Vec::with_capacity(parts.len());
    let mut scaled = Vec::with_capacity(parts.len());
    let mut stats = Vec::with_capacity(parts.len());
    for (p, sc, st) in parts {
        blocks.push(p);
        scaled.push(sc);
        stats.push(st);
    }
    Ok(Factorization {
        pinv: RegularizedInverse {
            epsilon,
            blocks,
            trial_offsets: d.col_offsets.clone(),
            test_offsets: d.row_offsets.clone(),
        },
        scaled,
        stats,
    })
}

/// SVDs and regularized inverses of all diagonal blocks, in parallel.
pub fn regularized_inverse(
    d: &BlockMatrix,
    epsilon: f64,
) -> Result<(RegularizedInverse, Vec<BlockStats>), SolveError> {
    let f = factor_blocks(d, epsilon)?;
    Ok((f.pinv, f.stats))
}

fn singular_error(column: usize, stats: &[BlockStats]) -> SolveError {
    let (worst_block, worst) = stats
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.sigma_min / a.1.sigma_max).total_cmp(&(b.1.sigma_min / b.1.sigma_max)))
        .unwrap();
    SolveError::Singular {
        column,
        worst_block,
        worst_ratio: worst.sigma_min / worst.sigma_max,
        worst_rank: worst.rank,
    }
}

/// Solves `(I - D^+ C) u = D^+ b`.
///
/// Every solution lies in the span of the retained right singular vectors,
/// `u_K = V_r S_r^{-1/2} w_K`. Multiplying the `K`-th block row by
/// `S_r^{1/2} V_r*` gives the equivalent reduced system
///
/// ```text
/// w_K - sum_{K'} S_r^{-1/2} U_r* C_{K,K'} V_r' S_r'^{-1/2} w_K' = S_r^{-1/2} U_r* b_K
/// ```
///
/// whose entries stay bounded however small the retained singular values
/// are, so pivoted LU is backward stable in the variables that carry the
/// solution.
pub fn solve_uwvf(
    d: &BlockMatrix,
    c: &BlockMatrix,
    b: &[C64],
    epsilon: f64,
) -> Result<SolveReport, SolveError> {
    let nelem = check_dimensions(d, c, b)?;
    let Factorization {
        pinv,
        scaled,
        stats,
    } = factor_blocks(d, epsilon)?;
    let trial_offs = &d.col_offsets;
    let test_offs = &d.row_offsets;

    let products: Vec<(usize, usize, CMatrix)> = c
        .blocks
        .par_iter()
        .map(|blk| {
            let lc = scaled[blk.row_elem].left.matmul(&blk.data)?;
            let m = lc.matmul(&scaled[blk.col_elem].right)?;
            Ok((blk.row_elem, blk.col_elem, m))
        })
        .collect::<Result<_, SolveError>>()?;

    let mut adj = vec![Vec::new(); nelem];
    for &(r, col, _) in &products {
        if r != col {
            adj[r].push(col);
        }
    }
    let identity: Vec<usize> = (0..nelem).collect();
    let rcm = reverse_cuthill_mckee(&adj);
    let order = if block_bandwidth(&adj, &rcm) < block_bandwidth(&adj, &identity) {
        rcm
    } else {
        identity
    };
    let ranks: Vec<usize> = stats.iter().map(|s| s.rank).collect();
    let nred: usize = ranks.iter().sum();
    let perm_offs = offsets(order.iter().map(|&k| ranks[k]));
    let mut new_start = vec![0; nelem];
    for (i, &k) in order.iter().enumerate() {
        new_start[k] = perm_offs[i];
    }

    let mut m = CMatrix::identity(nred);
    for (r, col, p) in &products {
        let (r0, c0) = (new_start[*r], new_start[*col]);
        for j in 0..p.cols() {
            let dst = &mut m.col_mut(c0 + j)[r0..r0 + p.rows()];
            for (x, y) in dst.iter_mut().zip(p.col(j)) {
                *x -= y;
            }
        }
    }
    let mut rhs_red = vec![C64::new(0.0, 0.0); nred];
    for k in 0..nelem {
        let ck = scaled[k].left.matvec(&b[test_offs[k]..test_offs[k + 1]]);
        rhs_red[new_start[k]..new_start[k] + ranks[k]].copy_from_slice(&ck);
    }
    let rhs_norm = norm2(&rhs_red);

    let (kl, ku) = bandwidths(&m);
    let lu = LuFactors::factor(m.clone(), kl, ku).map_err(|e| match e {
        LinalgError::Singular { column } => singular_error(column, &stats),
        other => SolveError::Linalg(other),
    })?;
    let w = lu.solve(&rhs_red);
    let mw = m.matvec(&w);
    let res: Vec<C64> = mw.iter().zip(&rhs_red).map(|(x, y)| x - y).collect();
    let residual = norm2(&res);

    let mut u = Vec::with_capacity(*trial_offs.last().unwrap());
    for k in 0..nelem {
        u.extend(scaled[k].right.matvec(&w[new_start[k]..new_start[k] + ranks[k]]));
    }

    let residual_warning = residual > 1e-8 * rhs_norm;
    if residual_warning {
        log::warn!(
            "regularized solve residual {residual:.3e} exceeds 1e-8 * rhs norm {rhs_norm:.3e}"
        );
    }
    let element_coeff_norms = (0..nelem)
        .map(|k| norm2(&u[trial_offs[k]..trial_offs[k + 1]]))
        .collect();
    Ok(SolveReport {
        coeff_norm: norm2(&u),
        coefficients: u,
        blocks: stats,
        residual,
        rhs_norm,
        element_coeff_norms,
        epsilon,
        residual_warning,
        bandwidth: (kl, ku),
        reduced_dim: nred,
        inverse: pinv,
    })
}

/// `||(I - D^+ C) u - D^+ b||` evaluated directly in the trial coordinates.
pub fn unscaled_residual(report: &SolveReport, c: &BlockMatrix, b: &[C64]) -> f64 {
    let u = &report.coefficients;
    let dcu = report.inverse.apply(&c.matvec(u));
    let db = report.inverse.apply(b);
    let res: Vec<C64> = u
        .iter()
        .zip(&dcu)
        .zip(&db)
        .map(|((x, y), z)| x - y - z)
        .collect();
    norm2(&res)
}
