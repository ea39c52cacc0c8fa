//! Discrete heat-kernel propagation: convolution with the Gaussian of
//! variance `2σt`, the fundamental solution of `∂t g = σ ∂x² g`.

use super::grid::Grid;

/// Mass-normalised sampled Gaussian for one `(σ, t)` pair.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    weights: Vec<f64>,
}

impl HeatKernel {
    /// Standard deviations kept on each side of the kernel.
    pub const TRUNCATION: f64 = 8.0;

    pub fn new(sigma: f64, t: f64, grid: &Grid) -> Self {
        let variance = 2.0 * sigma * t;
        if !(variance > 0.0) {
            return Self { weights: vec![1.0] };
        }
        let dx = grid.dx();
        let std = variance.sqrt();
        let mut half = (Self::TRUNCATION * std / dx).ceil() as usize;
        if half >= grid.n_points {
            log::warn!(
                "heat kernel (std {std:.3e}) is wider than the domain of {} points; truncating",
                grid.n_points
            );
            half = grid.n_points - 1;
        }
        let mut weights: Vec<f64> = (0..=2 * half)
            .map(|k| {
                let y = (k as f64 - half as f64) * dx;
                (-y * y / (2.0 * variance)).exp()
            })
            .collect();
        let mass: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= mass);
        Self { weights }
    }

    pub fn half_width(&self) -> usize {
        self.weights.len() / 2
    }

    /// Convolves `field` with the kernel. Values beyond the ends are held at
    /// the edge values, matching fields that are flat near `±X`.
    pub fn apply(&self, field: &[f64], out: &mut [f64]) {
        let n = field.len();
        let half = self.half_width() as isize;
        if half == 0 {
            out.copy_from_slice(field);
            return;
        }
        let last = n as isize - 1;
        for (i, o) in out.iter_mut().enumerate() {
            let i = i as isize;
            let mut acc = 0.0;
            if i - half >= 0 && i + half <= last {
                let base = (i - half) as usize;
                for (w, f) in self.weights.iter().zip(&field[base..]) {
                    acc += w * f;
                }
            } else {
                for (k, w) in self.weights.iter().enumerate() {
                    let j = (i + k as isize - half).clamp(0, last) as usize;
                    acc += w * field[j];
                }
            }
            *o = acc;
        }
    }
}

/// `g_σ(t) * field` on the grid; identity for `σ = 0` or `t = 0`.
pub fn heat_propagate(field: &[f64], sigma: f64, t: f64, grid: &Grid) -> Vec<f64> {
    assert!(t >= 0.0 && sigma >= 0.0, "heat_propagate needs t, sigma >= 0");
    let mut out = vec![0.0; field.len()];
    HeatKernel::new(sigma, t, grid).apply(field, &mut out);
    out
}
