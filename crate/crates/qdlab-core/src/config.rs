//! Gauge configurations on an ordered edge set and sparse states over them.

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::group::{Elem, FiniteGroup};
use crate::lattice::{Edge, OrientedEdge, Region};

/// Amplitudes below this magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

/// An ordered edge set; gauge configurations index into it.
#[derive(Debug, Clone)]
pub struct EdgeSpace {
    edges: Vec<Edge>,
    index: FxHashMap<Edge, usize>,
}

impl EdgeSpace {
    pub fn new(edges: Vec<Edge>) -> Self {
        let index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Self { edges, index }
    }

    pub fn from_region(region: &Region) -> Self {
        Self::new(region.edges.clone())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn idx(&self, e: Edge) -> Option<usize> {
        self.index.get(&e).copied()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.index.contains_key(&e)
    }
}

/// A group-element assignment on the edges of an [`EdgeSpace`].
///
/// Values are element indices; the oriented extension uses the group inverse
/// for reversed traversal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaugeConfig {
    vals: Box<[u8]>,
}

impl GaugeConfig {
    pub fn identity(space: &EdgeSpace) -> Self {
        Self { vals: vec![0u8; space.len()].into_boxed_slice() }
    }

    pub fn from_vals(vals: Vec<u8>) -> Self {
        Self { vals: vals.into_boxed_slice() }
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Elem {
        self.vals[idx] as Elem
    }

    #[inline]
    pub fn set(&mut self, idx: usize, g: Elem) {
        self.vals[idx] = g as u8;
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Value along an oriented traversal of `edge`.
    #[inline]
    pub fn oriented(&self, group: &FiniteGroup, idx: usize, forward: bool) -> Elem {
        let g = self.get(idx);
        if forward {
            g
        } else {
            group.inv(g)
        }
    }

    /// Oriented value over an oriented edge resolved through `space`.
    pub fn oriented_edge(
        &self,
        group: &FiniteGroup,
        space: &EdgeSpace,
        oe: OrientedEdge,
    ) -> Option<Elem> {
        let (e, fwd) = oe.canonical();
        space.idx(e).map(|i| self.oriented(group, i, fwd))
    }

    pub fn vals(&self) -> &[u8] {
        &self.vals
    }
}

/// A finite complex linear combination of gauge configurations.
#[derive(Debug, Clone, Default)]
pub struct SparseState {
    amps: FxHashMap<GaugeConfig, Complex64>,
}

impl SparseState {
    pub fn zero() -> Self {
        Self { amps: FxHashMap::default() }
    }

    pub fn basis(config: GaugeConfig) -> Self {
        let mut amps = FxHashMap::default();
        amps.insert(config, Complex64::new(1.0, 0.0));
        Self { amps }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GaugeConfig, &Complex64)> {
        self.amps.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, config: &GaugeConfig) -> Complex64 {
        self.amps.get(config).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Accumulate `coeff * |config>`, dropping the entry if it cancels out.
    pub fn add_term(&mut self, config: GaugeConfig, coeff: Complex64) {
        if coeff.norm() == 0.0 {
            return;
        }
        let entry = self.amps.entry(config);
        match entry {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let v = *o.get() + coeff;
                if v.norm() < PRUNE_TOL {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::hash_map::Entry::Vacant(vac) => {
                vac.insert(coeff);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SparseState, coeff: Complex64) {
        for (c, &a) in other.terms() {
            self.add_term(c.clone(), coeff * a);
        }
    }

    pub fn scale(&mut self, coeff: Complex64) {
        if coeff.norm() == 0.0 {
            self.amps.clear();
            return;
        }
        for a in self.amps.values_mut() {
            *a *= coeff;
        }
    }

    pub fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_TOL);
    }

    /// <self|other> with the left argument conjugated.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        let (small, big, flip) = if self.num_terms() <= other.num_terms() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut sum = Complex64::new(0.0, 0.0);
        for (c, &a) in small.terms() {
            let b = big.amplitude(c);
            sum += if flip { b.conj() * a } else { a.conj() * b };
        }
        sum
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    pub fn normalized(&self) -> SparseState {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero state");
        let mut out = self.clone();
        out.scale(Complex64::new(1.0 / n, 0.0));
        out
    }

    /// Max norm of the amplitude difference, over the union of supports.
    pub fn max_abs_diff(&self, other: &SparseState) -> f64 {
        let mut m = 0.0f64;
        for (c, &a) in self.terms() {
            m = m.max((a - other.amplitude(c)).norm());
        }
        for (c, &b) in other.terms() {
            m = m.max((self.amplitude(c) - b).norm());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{v, Face, Region, Site};

    #[test]
    fn oriented_values_invert() {
        let g = FiniteGroup::symmetric_3();
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        let region = Region::build(s0, 1).unwrap();
        let space = EdgeSpace::from_region(&region);
        let mut cfg = GaugeConfig::identity(&space);
        let e = region.edges[5];
        cfg.set(5, 3);
        let fwd = OrientedEdge { from: e.from_vertex(), to: e.to_vertex() };
        assert_eq!(cfg.oriented_edge(&g, &space, fwd), Some(3));
        assert_eq!(cfg.oriented_edge(&g, &space, fwd.reversed()), Some(g.inv(3)));
    }

    #[test]
    fn state_arithmetic() {
        let space = EdgeSpace::new(vec![]);
        let c = GaugeConfig::identity(&space);
        let mut psi = SparseState::basis(c.clone());
        psi.add_term(c.clone(), Complex64::new(-1.0, 0.0));
        assert_eq!(psi.num_terms(), 0, "exact cancellation prunes the term");

        let mut phi = SparseState::basis(c.clone());
        phi.scale(Complex64::new(0.0, 2.0));
        assert!((phi.norm() - 2.0).abs() < 1e-15);
        assert_eq!(phi.inner(&phi).im, 0.0);
        let psi = SparseState::basis(c);
        // <psi|phi> = conj(1) * 2i.
        assert!((psi.inner(&phi) - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }
}
