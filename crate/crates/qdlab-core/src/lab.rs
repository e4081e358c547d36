//! The working context: a quantum double, a region, and its edge space.

use crate::config::{EdgeSpace, SparseState};
use crate::group::FiniteGroup;
use crate::lattice::{v, Face, Region, Ribbon, Site};
use crate::ops::{self, LinearOp, OpError};
use crate::rep::{QuantumDouble, RepError};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

/// A finite group together with a finite region: the arena every operator
/// and state in this crate lives on.
#[derive(Debug, Clone)]
pub struct Lab {
    pub qd: QuantumDouble,
    pub region: Region,
    pub space: EdgeSpace,
}

impl Lab {
    pub fn new(group: FiniteGroup, origin: Site, radius: usize) -> Result<Self, LabError> {
        let qd = QuantumDouble::new(group)?;
        let region = Region::build(origin, radius)?;
        let space = EdgeSpace::from_region(&region);
        Ok(Self { qd, region, space })
    }

    /// Lab on the canonical origin site: vertex (0,0) with the face straight
    /// above it.
    pub fn canonical(group: FiniteGroup, radius: usize) -> Result<Self, LabError> {
        let origin = Site::new(v(0, 0), Face::down(v(-1, 1))).expect("canonical origin site");
        Self::new(group, origin, radius)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.qd.group
    }

    pub fn apply(&self, op: &LinearOp, psi: &SparseState) -> Result<SparseState, OpError> {
        ops::apply(self.group(), &self.space, op, psi)
    }

    pub fn flux(
        &self,
        cfg: &crate::config::GaugeConfig,
        ribbon: &Ribbon,
    ) -> Result<crate::group::Elem, OpError> {
        ops::flux(self.group(), &self.space, cfg, ribbon)
    }

    pub fn adjoint(&self, op: &LinearOp) -> LinearOp {
        ops::adjoint(self.group(), op)
    }
}
