/// Tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// solved by the Thomas algorithm.
///
/// `lower[0]` and `upper[n-1]` are ignored. The scratch buffer avoids an
/// allocation per solve; the systems here are diagonally dominant so no
/// pivoting is done.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl Tridiagonal {
    pub fn with_len(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Solves in place: `rhs` is overwritten with the solution.
    pub fn solve(&mut self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        let c = &mut self.scratch;
        let mut denom = self.diag[0];
        c[0] = self.upper[0] / denom;
        rhs[0] /= denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i] * c[i - 1];
            c[i] = self.upper[i] / denom;
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= c[i] * rhs[i + 1];
        }
    }
}
