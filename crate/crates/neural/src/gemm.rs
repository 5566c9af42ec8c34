//! Safe wrapper around `matrixmultiply::dgemm` with explicit strides.

/// Strided read-only matrix view.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub data: &'a [f64],
    pub row_stride: usize,
    pub col_stride: usize,
}

impl<'a> View<'a> {
    pub fn row_major(data: &'a [f64], cols: usize) -> Self {
        Self {
            data,
            row_stride: cols,
            col_stride: 1,
        }
    }

    /// Transposed view of a row-major matrix with `cols` columns.
    pub fn transposed(data: &'a [f64], cols: usize) -> Self {
        Self {
            data,
            row_stride: 1,
            col_stride: cols,
        }
    }

    fn check(&self, rows: usize, cols: usize) {
        if rows == 0 || cols == 0 {
            return;
        }
        let last = (rows - 1) * self.row_stride + (cols - 1) * self.col_stride;
        assert!(last < self.data.len(), "gemm view out of bounds");
    }
}

/// `c = a·b + beta·c` where `a` is `m×k`, `b` is `k×n` and `c` is row-major `m×n`.
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: View, b: View, beta: f64, c: &mut [f64]) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= m * n, "gemm output too small");
    if k == 0 {
        for x in c[..m * n].iter_mut() {
            *x *= beta;
        }
        return;
    }
    a.check(m, k);
    b.check(k, n);
    // SAFETY: all three operands were bounds-checked above against the
    // extents dgemm touches; `c` does not alias `a` or `b` (distinct borrows).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.row_stride as isize,
            a.col_stride as isize,
            b.data.as_ptr(),
            b.row_stride as isize,
            b.col_stride as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
