//! Domains with closed-form Laplacian spectra: intervals, finite disjoint unions
//! of intervals, and axis-aligned rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Pairwise disjoint closed intervals, sorted.
    Intervals(Vec<(f64, f64)>),
    /// `[x.0, x.1] x [y.0, y.1]`
    Rectangle { x: (f64, f64), y: (f64, f64) },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::union(vec![(a, b)])
    }

    pub fn union(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::UnsupportedDomain("empty union".into()));
        }
        for &(a, b) in &parts {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::UnsupportedDomain(format!("bad interval ({a}, {b})")));
            }
        }
        parts.sort_by(|p, q| p.0.total_cmp(&q.0));
        for w in parts.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::UnsupportedDomain(format!(
                    "intervals ({}, {}) and ({}, {}) are not disjoint",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Domain::Intervals(parts))
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if !(x.0 < x.1 && y.0 < y.1) {
            return Err(Error::UnsupportedDomain(format!("bad rectangle {x:?} x {y:?}")));
        }
        Ok(Domain::Rectangle { x, y })
    }

    pub fn dimension(&self) -> u32 {
        match self {
            Domain::Intervals(_) => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Domain::Intervals(p) => p.iter().map(|(a, b)| b - a).sum(),
            Domain::Rectangle { x, y } => (x.1 - x.0) * (y.1 - y.0),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Domain::Intervals(p) => p.len() == 1,
            Domain::Rectangle { .. } => true,
        }
    }

    /// Intervals of a 1D domain.
    pub fn components(&self) -> Result<&[(f64, f64)]> {
        match self {
            Domain::Intervals(p) => Ok(p),
            Domain::Rectangle { .. } => Err(Error::UnsupportedDomain("rectangle has no interval components".into())),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Intervals(p) => p.last().unwrap().1 - p[0].0,
            Domain::Rectangle { x, y } => (x.1 - x.0).hypot(y.1 - y.0),
        }
    }

    /// Distance from an interior point to the boundary; `None` outside.
    pub fn interior_distance(&self, point: &[f64]) -> Option<f64> {
        match (self, point) {
            (Domain::Intervals(p), [x]) => p
                .iter()
                .find(|(a, b)| x > a && x < b)
                .map(|(a, b)| (x - a).min(b - x)),
            (Domain::Rectangle { x, y }, [px, py]) => {
                if px > &x.0 && px < &x.1 && py > &y.0 && py < &y.1 {
                    Some((px - x.0).min(x.1 - px).min(py - y.0).min(y.1 - py))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Index of the interval containing `x` in its closure.
    pub fn component_of(&self, x: f64) -> Option<usize> {
        match self {
            Domain::Intervals(p) => p.iter().position(|(a, b)| x >= *a && x <= *b),
            Domain::Rectangle { .. } => None,
        }
    }

    /// Equispaced interior grid `a + (b-a) i/(n+1)` per axis, dropping points in the
    /// boundary layer of width `0.05 diam`.
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let layer = 0.05 * self.diameter();
        let axis = |a: f64, b: f64| -> Vec<f64> {
            (1..=per_axis)
                .map(|i| a + (b - a) * i as f64 / (per_axis + 1) as f64)
                .filter(|x| x - a >= layer && b - x >= layer)
                .collect()
        };
        match self {
            Domain::Intervals(p) => p.iter().flat_map(|&(a, b)| axis(a, b)).map(|x| vec![x]).collect(),
            Domain::Rectangle { x, y } => {
                let xs = axis(x.0, x.1);
                let ys = axis(y.0, y.1);
                xs.iter().flat_map(|&px| ys.iter().map(move |&py| vec![px, py])).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_checks() {
        let d = Domain::union(vec![(2.0, 3.0), (0.0, 1.0)]).unwrap();
        assert_eq!(d.components().unwrap(), &[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(d.measure(), 2.0);
        assert!(!d.is_convex());
        assert!(Domain::union(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(Domain::interval(1.0, 0.0).is_err());
    }

    #[test]
    fn rectangle_basics() {
        let d = Domain::rectangle((0.0, 1.0), (0.0, 2.0)).unwrap();
        assert_eq!(d.measure(), 2.0);
        assert!(d.is_convex());
        assert_eq!(d.interior_distance(&[0.5, 0.25]), Some(0.25));
        assert_eq!(d.interior_distance(&[1.5, 0.25]), None);
    }

    #[test]
    fn grid_avoids_boundary_layer() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let g = d.interior_grid(9);
        assert_eq!(g.len(), 9);
        assert!((g[0][0] - 0.1).abs() < 1e-15 && (g[8][0] - 0.9).abs() < 1e-15);
    }
}
