use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::{eval_profiles, sup_amplitude, SourceParams};

/// Uniform grid on `[-X, X]`, the truncation of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_extent: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(half_extent: f64, n_points: usize) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "grid.half_extent",
                value: half_extent,
                reason: "must be finite and positive",
            });
        }
        if n_points < 3 {
            return Err(Error::InvalidParameter {
                name: "grid.n_points",
                value: n_points as f64,
                reason: "need at least 3 points",
            });
        }
        Ok(Self {
            half_extent,
            n_points,
        })
    }

    /// `X = 40 max(d1, d2, |x0| + d2)`.
    pub fn default_half_extent(source: &SourceParams) -> f64 {
        40.0 * source.d1.max(source.d2).max(source.x0.abs() + source.d2)
    }

    /// Smallest half-extent (to 1%) at least [`Grid::default_half_extent`] whose
    /// edge amplitude is within `tol` of the source amplitude.
    pub fn half_extent_for_tolerance(source: &SourceParams, tol: f64) -> f64 {
        let ok = |x: f64| Grid { half_extent: x, n_points: 3 }.truncation(source).relative <= tol;
        let mut hi = Self::default_half_extent(source);
        if ok(hi) {
            return hi;
        }
        let mut lo = hi;
        while !ok(hi) {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 0.01 * lo {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same extent, `2(n-1)+1` points: every old node is kept.
    pub fn refined(&self) -> Self {
        Self {
            half_extent: self.half_extent,
            n_points: 2 * (self.n_points - 1) + 1,
        }
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        let f = (x + self.half_extent) / self.dx();
        let i = f.round();
        ((f - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.n_points).then_some(i as usize)
    }

    pub fn truncation(&self, source: &SourceParams) -> Truncation {
        let edge = |x: f64| {
            let f = eval_profiles(source, x);
            f.a.abs() + f.b.abs()
        };
        let edge_amplitude = edge(-self.half_extent).max(edge(self.half_extent));
        let delta = sup_amplitude(source);
        Truncation {
            edge_amplitude,
            sup_amplitude: delta,
            relative: if delta > 0.0 { edge_amplitude / delta } else { 0.0 },
        }
    }
}

/// Source amplitude left at the truncated boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub edge_amplitude: f64,
    pub sup_amplitude: f64,
    pub relative: f64,
}

impl Truncation {
    pub const DEFAULT_TOL: f64 = 1e-4;

    pub fn acceptable(&self) -> bool {
        self.relative <= Self::DEFAULT_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_refinement() {
        let g = Grid::new(2.0, 5).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.points(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let r = g.refined();
        assert_eq!(r.n_points, 9);
        assert_eq!(r.dx(), 0.5);
        assert_eq!(g.index_of(1.0), Some(3));
        assert_eq!(g.index_of(0.5), None);
        assert!(Grid::new(1.0, 2).is_err());
        assert!(Grid::new(0.0, 10).is_err());
    }

    #[test]
    fn default_extent_truncates_sources() {
        let s = SourceParams::new(0.4, 0.3, 1.0, 1.0, 1.0, 100.0, 1.0).unwrap();
        let x = Grid::default_half_extent(&s);
        assert_eq!(x, 80.0);
        let t = Grid::new(x, 101).unwrap().truncation(&s);
        assert!(!t.acceptable() && t.relative < 2e-4, "{t:?}");
        let wide = Grid::half_extent_for_tolerance(&s, Truncation::DEFAULT_TOL);
        assert!(wide > x);
        let t = Grid::new(wide, 101).unwrap().truncation(&s);
        assert!(t.acceptable(), "{t:?}");
    }
}
