//! Thomas algorithm for the constant-coefficient system
//! `-k u[i-1] + d u[i] - k u[i+1] = rhs[i]` that Crank–Nicolson produces
//! on the interior nodes.

/// Pre-factored `(d, -k, -k)` tridiagonal matrix of size `n`.
#[derive(Debug, Clone)]
pub struct ConstTridiag {
    off: f64,
    /// Modified super-diagonal `c'`.
    c_prime: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl ConstTridiag {
    /// `diag` on the main diagonal, `off` on both neighbours.
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        assert!(n > 0);
        let mut c_prime = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let pivot = if i == 0 { diag } else { diag - off * prev_c };
            inv_pivot[i] = 1.0 / pivot;
            prev_c = off * inv_pivot[i];
            c_prime[i] = prev_c;
        }
        Self {
            off,
            c_prime,
            inv_pivot,
        }
    }

    pub fn len(&self) -> usize {
        self.c_prime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_prime.is_empty()
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.off * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}
