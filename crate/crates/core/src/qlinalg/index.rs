//! Index arithmetic for operators on tensor products of finite-dimensional
//! spaces. Row-major, leftmost factor most significant.
//!
//! These maps are shared by the dense operator routines and by the affine
//! expression layer of the SDP modeller, so both apply exactly the same
//! partial trace / partial transpose conventions.

/// Row-major strides for `dims`.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Maps an entry `(row, col)` of `X^{T_sys}` to the entry of `X` it is read
/// from.
pub fn partial_transpose_source(dims: &[usize], sys: usize, row: usize, col: usize) -> (usize, usize) {
    let st = strides(dims);
    let rd = (row / st[sys]) % dims[sys];
    let cd = (col / st[sys]) % dims[sys];
    let r = row - rd * st[sys] + cd * st[sys];
    let c = col - cd * st[sys] + rd * st[sys];
    (r, c)
}

/// Enumerates every term of a partial trace that keeps the (sorted) factors
/// in `keep`. The callback receives `(out_row, out_col, in_row, in_col)`.
pub fn for_each_partial_trace_term(
    dims: &[usize],
    keep: &[usize],
    mut f: impl FnMut(usize, usize, usize, usize),
) {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_dim: usize = traced_dims.iter().product();
    let st = strides(dims);

    // Precompute the offsets contributed by kept and traced digits.
    let kept_offset: Vec<usize> = (0..out_dim)
        .map(|i| {
            let d = digits(i, &kept_dims);
            keep.iter().zip(&d).map(|(&k, &v)| v * st[k]).sum()
        })
        .collect();
    let traced_offset: Vec<usize> = (0..traced_dim)
        .map(|t| {
            let d = digits(t, &traced_dims);
            traced.iter().zip(&d).map(|(&k, &v)| v * st[k]).sum()
        })
        .collect();

    for r in 0..out_dim {
        for c in 0..out_dim {
            for &t in &traced_offset {
                f(r, c, kept_offset[r] + t, kept_offset[c] + t);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_roundtrip() {
        let dims = [2, 3, 2];
        for i in 0..12 {
            assert_eq!(compose(&digits(i, &dims), &dims), i);
        }
        assert_eq!(strides(&dims), vec![6, 2, 1]);
    }

    #[test]
    fn transpose_source_is_involution() {
        let dims = [3, 2];
        for r in 0..6 {
            for c in 0..6 {
                let (r1, c1) = partial_transpose_source(&dims, 0, r, c);
                assert_eq!(partial_transpose_source(&dims, 0, r1, c1), (r, c));
            }
        }
    }

    #[test]
    fn trace_term_count() {
        let mut n = 0;
        for_each_partial_trace_term(&[2, 3], &[1], |_, _, _, _| n += 1);
        assert_eq!(n, 9 * 2);
        let mut m = 0;
        for_each_partial_trace_term(&[2, 3], &[], |r, c, i, j| {
            assert_eq!((r, c), (0, 0));
            assert_eq!(i, j);
            m += 1;
        });
        assert_eq!(m, 6);
    }
}
