//! Dense kernels for the tiny matrices this crate works with (n <= 8 for
//! covariances, n <= 6 for vertex solves). Row-major flat buffers.

/// Pivots below this magnitude are treated as zero when solving.
pub const PIVOT_EPS: f64 = 1e-12;

/// `log2 |det A|` and the sign of `det A`, by LU with partial pivoting.
///
/// `a` is consumed as scratch. Returns `None` for an exactly singular matrix.
pub fn log2_abs_det(a: &mut [f64], n: usize) -> Option<(f64, f64)> {
    debug_assert_eq!(a.len(), n * n);
    let mut sign = 1.0;
    let mut acc = 0.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = libm::fabs(a[col * n + col]);
        for row in col + 1..n {
            let v = libm::fabs(a[row * n + col]);
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            sign = -sign;
        }
        let d = a[col * n + col];
        if d < 0.0 {
            sign = -sign;
        }
        acc += libm::log2(libm::fabs(d));
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    Some((acc, sign))
}

/// Solves `A x = b` in place (`b` becomes `x`). Returns `false` when a pivot
/// falls below `PIVOT_EPS` relative to the largest entry of its column.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut piv = col;
        let mut best = libm::fabs(a[col * n + col]);
        for row in col + 1..n {
            let v = libm::fabs(a[row * n + col]);
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < PIVOT_EPS {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

/// Numerical rank of an `rows x cols` matrix by Gaussian elimination with
/// full pivoting. Entries below `tol` after elimination count as zero.
pub fn rank(a: &mut [f64], rows: usize, cols: usize, tol: f64) -> usize {
    debug_assert_eq!(a.len(), rows * cols);
    let mut r = 0;
    let mut used_cols = [false; 64];
    assert!(cols <= 64, "rank: too many columns");
    while r < rows {
        let mut best = tol;
        let mut at = None;
        for i in r..rows {
            for j in 0..cols {
                if used_cols[j] {
                    continue;
                }
                let v = libm::fabs(a[i * cols + j]);
                if v > best {
                    best = v;
                    at = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = at else { break };
        for k in 0..cols {
            a.swap(r * cols + k, pi * cols + k);
        }
        used_cols[pj] = true;
        let d = a[r * cols + pj];
        for i in r + 1..rows {
            let f = a[i * cols + pj] / d;
            if f != 0.0 {
                for k in 0..cols {
                    a[i * cols + k] -= f * a[r * cols + k];
                }
            }
        }
        r += 1;
    }
    r
}
