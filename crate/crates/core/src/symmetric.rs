use crate::error::{GeometryError, Result};

/// All elementary symmetric functions `s_0 ..= s_n` of `values`.
///
/// Coefficients of `∏(x + v_i)`, built one factor at a time. For nonnegative
/// inputs every update is a sum of nonnegative terms, so there is no
/// cancellation.
pub fn sym_elem_all(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    for (m, &v) in values.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            coeffs[k] += v * coeffs[k - 1];
        }
    }
    coeffs
}

/// The `k`-th elementary symmetric function `s_k(values)`.
pub fn sym_elem(values: &[f64], k: usize) -> Result<f64> {
    if k > values.len() {
        return Err(GeometryError::domain(format!(
            "sym_elem order k = {k} exceeds the number of values {}",
            values.len()
        )));
    }
    Ok(sym_elem_all(values)[k])
}

/// `s_k` of `values` with entry `skip` removed, for every `k`.
pub(crate) fn sym_elem_all_without(values: &[f64], skip: usize) -> Vec<f64> {
    let rest: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != skip)
        .map(|(_, v)| *v)
        .collect();
    sym_elem_all(&rest)
}
