//! Subquadratic attention approximations used as accuracy baselines.
//!
//! Both are intentionally simple: `sampled(k)` renormalizes the softmax over
//! k uniformly sampled keys per query (O(nk) score evaluations), and
//! `kernel-feature(r)` replaces `exp(q . k)` with a rank-r positive
//! random-feature kernel, `E[phi(q) . phi(k)]` for
//! `phi(u) = exp(w . u - |u|^2 / 2)`, `w ~ N(0, I)`, giving O(nr) evaluation
//! through factored sums. Both are deterministic in the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::attention::{softmax_row, AttentionUnitParams, Mask, Matrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicKind {
    Sampled { k: usize },
    KernelFeature { r: usize },
}

/// Approximate attention with the chosen backend.
pub fn heuristic_attention(
    kind: HeuristicKind,
    params: &AttentionUnitParams,
    x: &Matrix,
    seed: u64,
) -> Result<Matrix> {
    if x.ncols() != params.d_in() {
        return Err(Error::validation("input width does not match score dimension"));
    }
    let n = x.nrows();
    if params.mask == Mask::ExcludeSelf && n < 2 {
        return Err(Error::validation("exclude-self mask needs at least 2 rows"));
    }
    match kind {
        HeuristicKind::Sampled { k } => {
            if k == 0 || k > n {
                return Err(Error::validation(format!("sample size {k} outside [1, {n}]")));
            }
            sampled_attention(k, params, x, seed)
        }
        HeuristicKind::KernelFeature { r } => {
            if r == 0 {
                return Err(Error::validation("feature rank must be at least 1"));
            }
            kernel_feature_attention(r, params, x, seed)
        }
    }
}

/// Per query row: k distinct uniform keys, softmax renormalized over the
/// sample. Each row uses its own RNG stream so results do not depend on
/// evaluation order; k covering the full support reproduces exact attention.
fn sampled_attention(
    k: usize,
    params: &AttentionUnitParams,
    x: &Matrix,
    seed: u64,
) -> Result<Matrix> {
    let n = x.nrows();
    let xm = x.matmul(&params.score)?;
    let xv = x.matmul(&params.value)?;
    let mut out = Matrix::zeros(n, params.d_out());
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let support_len = if params.mask == Mask::None { n } else { n - 1 };
        let take = k.min(support_len);
        // dense sample sizes use a partial Fisher-Yates; sparse ones use
        // rejection sampling so the per-row cost stays O(k), not O(n)
        let mut picked: Vec<usize> = if 2 * take >= support_len {
            let mut support: Vec<usize> =
                (0..n).filter(|&j| params.mask == Mask::None || j != i).collect();
            for t in 0..take {
                let swap = rng.gen_range(t..support.len());
                support.swap(t, swap);
            }
            support.truncate(take);
            support
        } else {
            let mut seen = std::collections::HashSet::with_capacity(take);
            let mut picked = Vec::with_capacity(take);
            while picked.len() < take {
                let j = rng.gen_range(0..n);
                if (params.mask == Mask::ExcludeSelf && j == i) || !seen.insert(j) {
                    continue;
                }
                picked.push(j);
            }
            picked
        };
        picked.sort_unstable();
        let scores: Vec<f64> = picked
            .iter()
            .map(|&j| xm.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum())
            .collect();
        let weights = softmax_row(&scores)?;
        for (w, &j) in weights.iter().zip(&picked) {
            for c in 0..params.d_out() {
                out.set(i, c, out.get(i, c) + w * xv.get(j, c));
            }
        }
    }
    Ok(out)
}

fn feature_map(u: &[f64], omega: &Matrix) -> Vec<f64> {
    let half_sq: f64 = u.iter().map(|a| a * a).sum::<f64>() / 2.0;
    (0..omega.nrows())
        .map(|r| {
            let proj: f64 = omega.row(r).iter().zip(u).map(|(w, a)| w * a).sum();
            (proj - half_sq).exp()
        })
        .collect()
}

/// Linear attention through positive random features: row i is
/// `phi(q_i) . S_v / phi(q_i) . s_1` with `S_v = sum_j phi(k_j) v_j^T` and
/// `s_1 = sum_j phi(k_j)`, so the pass over keys happens once. The mask is
/// honored by subtracting the self term from both sums.
fn kernel_feature_attention(
    r: usize,
    params: &AttentionUnitParams,
    x: &Matrix,
    seed: u64,
) -> Result<Matrix> {
    let n = x.nrows();
    let d = params.d_in();
    let d_out = params.d_out();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omega = Matrix::zeros(r, d);
    for i in 0..r {
        for j in 0..d {
            omega.set(i, j, rng.sample(StandardNormal));
        }
    }
    let xm = x.matmul(&params.score)?;
    let xv = x.matmul(&params.value)?;
    let phi_q: Vec<Vec<f64>> = (0..n).map(|i| feature_map(xm.row(i), &omega)).collect();
    let phi_k: Vec<Vec<f64>> = (0..n).map(|j| feature_map(x.row(j), &omega)).collect();
    // factored sums over keys
    let mut s1 = vec![0.0; r];
    let mut sv = vec![vec![0.0; d_out]; r];
    for j in 0..n {
        for t in 0..r {
            s1[t] += phi_k[j][t];
            for c in 0..d_out {
                sv[t][c] += phi_k[j][t] * xv.get(j, c);
            }
        }
    }
    let mut out = Matrix::zeros(n, d_out);
    for i in 0..n {
        let self_w: f64 = if params.mask == Mask::ExcludeSelf {
            phi_q[i].iter().zip(&phi_k[i]).map(|(a, b)| a * b).sum()
        } else {
            0.0
        };
        let mut denom: f64 = phi_q[i].iter().zip(&s1).map(|(a, b)| a * b).sum();
        denom -= self_w;
        for c in 0..d_out {
            let mut num: f64 = phi_q[i].iter().zip(&sv).map(|(a, row)| a * row[c]).sum();
            if params.mask == Mask::ExcludeSelf {
                num -= self_w * xv.get(i, c);
            }
            out.set(i, c, num / denom);
        }
    }
    Ok(out)
}
