//! Unions of disjoint open intervals sampled on one global lattice `x = k h`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Finite union of open intervals with pairwise disjoint closures, sorted by
/// left endpoint. Component ids follow that order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Domain {
    intervals: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Domain("a domain needs at least one interval".into()));
        }
        let mut sorted = intervals.to_vec();
        for &(a, b) in &sorted {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Domain(format!(
                    "interval ({a}, {b}) is empty or not finite"
                )));
            }
        }
        sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
        for w in sorted.windows(2) {
            if !(w[0].1 < w[1].0) {
                return Err(Error::Domain(format!(
                    "intervals ({}, {}) and ({}, {}) have intersecting closures",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Domain { intervals: sorted })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(&[(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn num_components(&self) -> usize {
        self.intervals.len()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Disjoint union of two domains.
    pub fn union(&self, other: &Domain) -> Result<Domain> {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Domain::new(&all)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Node {
    /// Lattice integer; the coordinate is `k * h`.
    pub k: i64,
    pub x: f64,
    pub component: usize,
}

/// Interior lattice nodes of a [`Domain`]. Exterior lattice points carry no
/// unknowns, which imposes `u = 0` outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    h: f64,
    nodes: Vec<Node>,
    ranges: Vec<Range<usize>>,
}

fn interior_lattice(a: f64, b: f64, h: f64) -> (i64, i64) {
    let mut lo = libm::floor(a / h) as i64;
    while (lo as f64) * h <= a {
        lo += 1;
    }
    while ((lo - 1) as f64) * h > a {
        lo -= 1;
    }
    let mut hi = libm::ceil(b / h) as i64;
    while (hi as f64) * h >= b {
        hi -= 1;
    }
    while ((hi + 1) as f64) * h < b {
        hi += 1;
    }
    (lo, hi)
}

pub fn build_grid(domain: &Domain, h: f64) -> Result<Grid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "lattice spacing h = {h} must be positive"
        )));
    }
    let mut nodes = Vec::new();
    let mut ranges = Vec::with_capacity(domain.num_components());
    for (j, &(a, b)) in domain.intervals().iter().enumerate() {
        if b - a < 4.0 * h {
            return Err(Error::Resolution(format!(
                "interval {j} = ({a}, {b}) has length {} < 4h = {}",
                b - a,
                4.0 * h
            )));
        }
        let (lo, hi) = interior_lattice(a, b, h);
        let start = nodes.len();
        for k in lo..=hi {
            nodes.push(Node {
                k,
                x: k as f64 * h,
                component: j,
            });
        }
        if nodes.len() - start < 3 {
            return Err(Error::Resolution(format!(
                "interval {j} = ({a}, {b}) holds fewer than 3 nodes"
            )));
        }
        ranges.push(start..nodes.len());
    }
    Ok(Grid {
        domain: domain.clone(),
        h,
        nodes,
        ranges,
    })
}

/// The grid of component `j` alone, with the same spacing and node positions.
pub fn component_restriction(grid: &Grid, j: usize) -> Result<Grid> {
    let Some(&(a, b)) = grid.domain.intervals().get(j) else {
        return Err(Error::Index(format!(
            "component {j} does not exist (grid has {})",
            grid.num_components()
        )));
    };
    build_grid(&Domain::interval(a, b)?, grid.h)
}

impl Grid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn num_components(&self) -> usize {
        self.ranges.len()
    }

    /// Node ordinals of component `j` (components are contiguous).
    pub fn component_range(&self, j: usize) -> Range<usize> {
        self.ranges[j].clone()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.x).collect()
    }

    /// Ordinal of lattice integer `k`, if it is an interior node.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        self.nodes.binary_search_by_key(&k, |n| n.k).ok()
    }

    /// Largest lattice distance between two nodes.
    pub fn lattice_span(&self) -> usize {
        match (self.nodes.first(), self.nodes.last()) {
            (Some(f), Some(l)) => (l.k - f.k) as usize,
            _ => 0,
        }
    }

    /// Zero extension of a vector given on `sub` (whose nodes must be nodes of
    /// `self`) into this grid.
    pub fn zero_extend(&self, sub: &Grid, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != sub.len() {
            return Err(Error::Shape {
                expected: sub.len(),
                found: v.len(),
            });
        }
        if sub.h.to_bits() != self.h.to_bits() {
            return Err(Error::Domain("grids use different lattice spacings".into()));
        }
        let mut out = alloc::vec![0.0; self.len()];
        for (node, &val) in sub.nodes.iter().zip(v) {
            let i = self.index_of(node.k).ok_or_else(|| {
                Error::Domain(format!(
                    "node x = {} is not a node of the target grid",
                    node.x
                ))
            })?;
            out[i] = val;
        }
        Ok(out)
    }

    /// Permutation `p` with node `p[i]` at lattice integer `-k_i`, when the
    /// node set is symmetric under `x -> -x`.
    pub fn reflection(&self) -> Option<Vec<usize>> {
        self.nodes.iter().map(|n| self.index_of(-n.k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_interval_quarter_spacing() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 0.25).unwrap();
        assert_eq!(g.coordinates(), alloc::vec![0.25, 0.5, 0.75]);
        assert_eq!(g.num_components(), 1);
    }

    #[test]
    fn two_components_at_half_spacing_are_too_coarse() {
        // each unit interval holds a single interior node at h = 0.5
        let d = Domain::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        assert!(matches!(build_grid(&d, 0.5), Err(Error::Resolution(_))));
        let g = build_grid(&d, 0.25).unwrap();
        assert_eq!(
            g.coordinates(),
            alloc::vec![-1.75, -1.5, -1.25, 1.25, 1.5, 1.75]
        );
        assert_eq!(g.nodes()[4].component, 1);
    }

    #[test]
    fn overlap_is_a_domain_error() {
        assert!(matches!(
            Domain::new(&[(0.0, 1.0), (0.5, 2.0)]),
            Err(Error::Domain(_))
        ));
        // touching closures are not allowed either
        assert!(Domain::new(&[(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(Domain::new(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn intervals_are_sorted() {
        let d = Domain::new(&[(1.0, 2.0), (-2.0, -1.0)]).unwrap();
        assert_eq!(d.intervals(), &[(-2.0, -1.0), (1.0, 2.0)]);
    }

    #[test]
    fn restriction() {
        let d = Domain::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        let g = build_grid(&d, 1.0 / 16.0).unwrap();
        let r = component_restriction(&g, 0).unwrap();
        assert_eq!(r.domain().intervals(), &[(-2.0, -1.0)]);
        let parent: Vec<f64> = g.coordinates();
        assert!(r.coordinates().iter().all(|x| parent.contains(x)));
        assert!(matches!(component_restriction(&g, 2), Err(Error::Index(_))));

        let single = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 0.1).unwrap();
        assert_eq!(component_restriction(&single, 0).unwrap(), single);
    }

    #[test]
    fn node_count_matches_enumeration() {
        let d = Domain::new(&[(-0.73, -0.21), (0.05, 0.9), (1.3, 2.71)]).unwrap();
        for n in [16, 37, 64, 100] {
            let h = 1.0 / n as f64;
            let g = build_grid(&d, h).unwrap();
            let mut expected = 0;
            for &(a, b) in d.intervals() {
                for k in -10 * n as i64..10 * n as i64 {
                    let x = k as f64 * h;
                    if a < x && x < b {
                        expected += 1;
                    }
                }
            }
            assert_eq!(g.len(), expected);
            for (i, node) in g.nodes().iter().enumerate() {
                assert_eq!(g.index_of(node.k), Some(i));
                let (a, b) = d.intervals()[node.component];
                assert!(a < node.x && node.x < b);
            }
        }
    }

    #[test]
    fn endpoints_on_lattice_are_exterior() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 1.0 / 512.0).unwrap();
        assert_eq!(g.len(), 511);
        assert_relative_eq!(g.nodes()[0].x, 1.0 / 512.0);
    }

    #[test]
    fn zero_extension_and_reflection() {
        let d = Domain::new(&[(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        let g = build_grid(&d, 0.125).unwrap();
        let r = component_restriction(&g, 1).unwrap();
        let v: Vec<f64> = (0..r.len()).map(|i| i as f64 + 1.0).collect();
        let e = g.zero_extend(&r, &v).unwrap();
        assert_eq!(&e[g.component_range(1)], &v[..]);
        assert!(e[g.component_range(0)].iter().all(|&x| x == 0.0));
        let p = g.reflection().unwrap();
        for (i, &j) in p.iter().enumerate() {
            assert_eq!(g.nodes()[i].k, -g.nodes()[j].k);
        }
        let asym = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 0.125).unwrap();
        assert!(asym.reflection().is_none());
    }
}
