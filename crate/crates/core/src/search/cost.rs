use crate::codebook::Grid;
use crate::error::{Error, Result};

use super::AlgorithmId;

/// Exact oracle query count of an algorithm.
///
/// `rows`/`cols` count the rows and columns that hold controllable cells,
/// `elements` is `N` and `influential` is `I` (required for alg1 only).
///
/// | algorithm  | queries                      |
/// |------------|------------------------------|
/// | bench1     | `1 + 4N`                     |
/// | bench2     | `1 + 4R + 4C`                |
/// | alg1       | `2 + 4R + 4C + 4(N - I)`     |
/// | exhaustive | `4^N`                        |
///
/// Random search has no formula of its own; its count is its budget.
pub fn predicted_queries(
    algorithm: AlgorithmId,
    rows: usize,
    cols: usize,
    elements: usize,
    influential: Option<usize>,
) -> Result<u64> {
    let (r, c, n) = (rows as u64, cols as u64, elements as u64);
    match algorithm {
        AlgorithmId::Bench1 => Ok(1 + 4 * n),
        AlgorithmId::Bench2 => Ok(1 + 4 * r + 4 * c),
        AlgorithmId::Alg1 => {
            let i = influential.ok_or_else(|| {
                Error::InvalidArgument("alg1 query count needs the influential count".into())
            })? as u64;
            if i > n {
                return Err(Error::InvalidArgument(format!(
                    "influential count {i} exceeds element count {n}"
                )));
            }
            Ok(2 + 4 * r + 4 * c + 4 * (n - i))
        }
        AlgorithmId::Exhaustive => 4u64
            .checked_pow(elements as u32)
            .ok_or_else(|| Error::InvalidArgument(format!("4^{elements} overflows"))),
        AlgorithmId::Random => Err(Error::InvalidArgument(
            "random search uses its budget, there is no closed form".into(),
        )),
    }
}

/// [`predicted_queries`] with the shape taken from `grid`.
pub fn predicted_queries_for_grid(
    algorithm: AlgorithmId,
    grid: &Grid,
    influential: Option<usize>,
) -> Result<u64> {
    predicted_queries(
        algorithm,
        grid.active_rows(),
        grid.active_cols(),
        grid.controllable(),
        influential,
    )
}
