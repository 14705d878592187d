use rayon::prelude::*;

use crate::numat::{op_norm, Matrix};
use crate::scalar::Real;

/// Largest operator norm among the residual matrices produced for every
/// index pair, with the pair attaining it.
///
/// The residuals are formed in parallel and ranked by Frobenius norm; the
/// exact spectral norm is then evaluated in that order until the Frobenius
/// bound drops below the best value found, which yields the same maximum as
/// evaluating every pair. Ties go to the smallest pair index, so the result
/// does not depend on scheduling.
pub(crate) fn worst_pair<T, F>(n_a: usize, n_b: usize, residuals: F) -> (T, Option<(usize, usize)>)
where
    T: Real,
    F: Fn(usize, usize) -> Vec<Matrix<T>> + Sync,
{
    let mut candidates: Vec<(T, usize, Matrix<T>)> = (0..n_a * n_b)
        .into_par_iter()
        .flat_map_iter(|idx| {
            residuals(idx / n_b, idx % n_b)
                .into_iter()
                .map(move |m| (m.fro_norm(), idx, m))
        })
        .collect();
    candidates.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.1.cmp(&y.1))
    });

    let mut best = T::zero();
    let mut witness: Option<usize> = None;
    for (frob, idx, m) in &candidates {
        if witness.is_some() && *frob <= best {
            break;
        }
        let norm = op_norm(m);
        let better = match witness {
            None => true,
            Some(w) => norm > best || (norm == best && *idx < w),
        };
        if better {
            best = norm;
            witness = Some(*idx);
        }
    }
    (best, witness.map(|idx| (idx / n_b, idx % n_b)))
}
