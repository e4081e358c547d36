//! Constrained gauge-configuration enumeration and the excited-state bases.
//!
//! A pack is the set of configurations that are flat away from the origin
//! face, carry flux `c_i` at the origin site, restrict to a boundary
//! condition `b`, and realize a fiducial flux `q_i m qbar_{i(b)}`. Each pack
//! is a single free orbit of the interior gauge group, which gives two
//! complementary computation routes: explicit orbit enumeration for small
//! regions, and O(|E|) orbit-membership solving for everything else.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::config::{EdgeSpace, GaugeConfig, SparseState};
use crate::group::{Elem, FiniteGroup};
use crate::lab::Lab;
use crate::lattice::{Edge, Face, Ribbon, Site, Vertex};
use crate::ops::{self, BasisKernel, LinearOp, OpError};
use crate::rep::Sector;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("boundary condition incompatible with the requested class")]
    IncompatibleBoundary,
    #[error("label out of range: {0}")]
    LabelOutOfRange(String),
    #[error("face {0:?} violates its flux constraint in the solved configuration")]
    FaceCheckFailed(Face),
    #[error("no interior-preserving boundary move exists between these conditions")]
    NoBoundaryMove,
    #[error("configuration constraint violated: {0}")]
    ConstraintViolated(String),
    #[error(transparent)]
    Op(#[from] OpError),
}

/// A boundary condition: one group element per boundary edge, stored in the
/// counterclockwise traversal order of the boundary ribbon, as values on the
/// canonical edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundaryCondition {
    vals: Vec<u8>,
}

impl BoundaryCondition {
    pub fn trivial(lab: &Lab) -> Self {
        Self { vals: vec![0; lab.region.boundary_edges.len()] }
    }

    pub fn from_vals(vals: Vec<u8>) -> Self {
        Self { vals }
    }

    pub fn vals(&self) -> &[u8] {
        &self.vals
    }

    /// Read the boundary condition off a configuration.
    pub fn of_config(lab: &Lab, cfg: &GaugeConfig) -> Self {
        Self { vals: lab.region.boundary_edges.iter().map(|&i| cfg.get(i) as u8).collect() }
    }

    /// The boundary flux measured through the boundary ribbon.
    pub fn flux(&self, lab: &Lab) -> Elem {
        let g = lab.group();
        let mut f: Elem = 0;
        for (t, oe) in lab.region.boundary_ribbon.direct_path().iter().enumerate() {
            let (_, fwd) = oe.canonical();
            let val = self.vals[t] as Elem;
            f = g.mul(f, if fwd { val } else { g.inv(val) });
        }
        f
    }

    /// The class of the boundary flux and the label `i(b)` within it.
    pub fn compatibility(&self, lab: &Lab) -> (usize, usize) {
        let phi = self.flux(lab);
        for (ci, class) in lab.qd.classes.iter().enumerate() {
            if let Some(i) = class.label(phi) {
                return (ci, i);
            }
        }
        unreachable!("every element belongs to a class")
    }

    /// The boundary projector P_b.
    pub fn projector(&self, lab: &Lab) -> LinearOp {
        let pairs = lab
            .region
            .boundary_edges
            .iter()
            .zip(&self.vals)
            .map(|(&i, &g)| (lab.region.edges[i], g as Elem))
            .collect();
        ops::diag_proj(pairs)
    }
}

/// Labels of a pack: class, origin flux label i, boundary condition, and the
/// centralizer element index m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackLabel {
    pub class: usize,
    pub i: usize,
    pub boundary: BoundaryCondition,
    pub m: usize,
}

/// Check the four defining constraints of a pack member directly; this is the
/// oracle the solver-produced configurations are held against.
pub fn check_pack_constraints(
    lab: &Lab,
    cfg: &GaugeConfig,
    label: &PackLabel,
) -> Result<(), NetError> {
    let g = lab.group();
    let class = &lab.qd.classes[label.class];
    // Flatness away from the origin face.
    for f in lab.region.faces_without_origin() {
        let anchor = Site::new(f.vertices()[0], f).expect("face base vertex");
        let phi = lab.flux(cfg, &Ribbon::elementary_direct(anchor))?;
        if phi != 0 {
            return Err(NetError::ConstraintViolated(format!("face {f:?} has flux {phi}")));
        }
    }
    // Origin flux c_i, read from the origin site.
    let phi0 = lab.flux(cfg, &Ribbon::elementary_direct(lab.region.origin))?;
    if phi0 != class.elements[label.i] {
        return Err(NetError::ConstraintViolated(format!(
            "origin flux {phi0}, expected c_i = {}",
            class.elements[label.i]
        )));
    }
    // Boundary restriction.
    if BoundaryCondition::of_config(lab, cfg) != label.boundary {
        return Err(NetError::ConstraintViolated("boundary mismatch".into()));
    }
    // Fiducial flux in q_i N_C qbar_{i(b)}, with the right centralizer label.
    let (cb, ib) = label.boundary.compatibility(lab);
    if cb != label.class {
        return Err(NetError::IncompatibleBoundary);
    }
    let phi = lab.flux(cfg, &lab.region.fiducial)?;
    let twisted = g.mul(g.mul(g.inv(class.iterators[label.i]), phi), class.iterators[ib]);
    match class.centralizer.from_parent(twisted) {
        Some(k) if k == label.m => Ok(()),
        Some(k) => Err(NetError::ConstraintViolated(format!(
            "fiducial label {k}, expected {}",
            label.m
        ))),
        None => Err(NetError::ConstraintViolated(
            "twisted fiducial flux leaves the centralizer".into(),
        )),
    }
}

/// A face's counterclockwise edge cycle as (edge index, forward) pairs.
fn face_cycle(lab: &Lab, f: Face) -> Vec<(usize, bool)> {
    let anchor = Site::new(f.vertices()[0], f).expect("face base vertex");
    Ribbon::elementary_direct(anchor)
        .direct_path()
        .iter()
        .map(|oe| {
            let (e, fwd) = oe.canonical();
            (lab.space.idx(e).expect("face edge inside region"), fwd)
        })
        .collect()
}

fn cycle_flux(g: &FiniteGroup, cfg: &GaugeConfig, cycle: &[(usize, bool)]) -> Elem {
    let mut f: Elem = 0;
    for &(ei, fwd) in cycle {
        f = g.mul(f, cfg.oriented(g, ei, fwd));
    }
    f
}

/// Solve one face constraint for its single unassigned edge: the oriented
/// cycle product must equal `target`; every edge but `solve_idx` is known.
fn solve_face_edge(
    g: &FiniteGroup,
    cfg: &mut GaugeConfig,
    cycle: &[(usize, bool)],
    solve_idx: usize,
    target: Elem,
) {
    let mut a: Elem = 0;
    let mut b: Elem = 0;
    let mut fwd_sign = true;
    let mut before = true;
    for &(ei, fwd) in cycle {
        if ei == solve_idx {
            fwd_sign = fwd;
            before = false;
            continue;
        }
        let val = cfg.oriented(g, ei, fwd);
        if before {
            a = g.mul(a, val);
        } else {
            b = g.mul(b, val);
        }
    }
    // target = a * x * b for the oriented value x of the unknown edge.
    let x = g.mul(g.mul(g.inv(a), target), g.inv(b));
    cfg.set(solve_idx, if fwd_sign { x } else { g.inv(x) });
}

/// Construct one member of the pack by fixing boundary and fiducial edges and
/// propagating face constraints along a dual spanning tree rooted at the
/// origin face. The root face acts as the compatibility check.
pub fn seed_config(lab: &Lab, label: &PackLabel) -> Result<GaugeConfig, NetError> {
    let g = lab.group();
    let region = &lab.region;
    let class = &lab.qd.classes[label.class];
    if label.i >= class.size() || label.m >= class.centralizer.order() {
        return Err(NetError::LabelOutOfRange(format!("i = {}, m = {}", label.i, label.m)));
    }
    let (cb, ib) = label.boundary.compatibility(lab);
    if cb != label.class {
        return Err(NetError::IncompatibleBoundary);
    }

    let mut cfg = GaugeConfig::identity(&lab.space);
    let mut assigned = vec![false; region.edge_count()];

    for (t, &ei) in region.boundary_edges.iter().enumerate() {
        cfg.set(ei, label.boundary.vals[t] as Elem);
        assigned[ei] = true;
    }

    // Fiducial path: oriented values identity except the last, which realizes
    // the full fiducial flux q_i m qbar_{i(b)}.
    let phi = g.mul(
        g.mul(class.iterators[label.i], class.centralizer.to_parent(label.m)),
        g.inv(class.iterators[ib]),
    );
    let path = region.fiducial.direct_path();
    for (k, oe) in path.iter().enumerate() {
        let (e, fwd) = oe.canonical();
        let ei = lab.space.idx(e).expect("fiducial edge inside region");
        let oriented_val = if k + 1 == path.len() { phi } else { 0 };
        cfg.set(ei, if fwd { oriented_val } else { g.inv(oriented_val) });
        assigned[ei] = true;
    }

    // Dual spanning tree over faces through unassigned edges, rooted at f0.
    let f0 = region.origin.face;
    let cycles: Vec<Vec<(usize, bool)>> =
        region.faces.iter().map(|&f| face_cycle(lab, f)).collect();
    let mut edge_faces: Vec<Vec<usize>> = vec![Vec::new(); region.edge_count()];
    for (fi, cyc) in cycles.iter().enumerate() {
        for &(ei, _) in cyc {
            edge_faces[ei].push(fi);
        }
    }
    let root = region.faces.iter().position(|&f| f == f0).expect("origin face in region");
    let mut parent_edge: Vec<Option<usize>> = vec![None; region.faces.len()];
    let mut visited = vec![false; region.faces.len()];
    let mut order = Vec::with_capacity(region.faces.len());
    visited[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(fi) = queue.pop_front() {
        order.push(fi);
        for &(ei, _) in &cycles[fi] {
            if assigned[ei] {
                continue;
            }
            for &fj in &edge_faces[ei] {
                if !visited[fj] {
                    visited[fj] = true;
                    parent_edge[fj] = Some(ei);
                    // Reserve this edge as the tree edge of fj.
                    assigned[ei] = true;
                    queue.push_back(fj);
                }
            }
        }
    }
    if !visited.iter().all(|&x| x) {
        return Err(NetError::ConstraintViolated(
            "dual face graph is disconnected over unassigned edges".into(),
        ));
    }
    // Remaining co-tree edges stay at the identity.

    // Peel from the leaves to the root, solving the tree edge of every
    // non-root face from its flatness constraint.
    for &fi in order.iter().rev() {
        if fi == root {
            continue;
        }
        let ei = parent_edge[fi].expect("non-root faces have tree edges");
        solve_face_edge(g, &mut cfg, &cycles[fi], ei, 0);
    }
    // The root face must come out at flux c_i as read from the origin site;
    // this is exactly where an incompatible request would surface.
    let phi0 = lab.flux(&cfg, &Ribbon::elementary_direct(region.origin))?;
    if phi0 != class.elements[label.i] {
        return Err(NetError::FaceCheckFailed(f0));
    }

    check_pack_constraints(lab, &cfg, label)?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// Orbit calculus.
// ---------------------------------------------------------------------------

/// Decide whether `cand` lies on the interior gauge orbit of `seed`, by
/// solving for the unique gauge assignment and verifying every edge.
pub fn orbit_contains(lab: &Lab, seed: &GaugeConfig, cand: &GaugeConfig) -> bool {
    let g = lab.group();
    let region = &lab.region;
    let mut verts: Vec<Vertex> = Vec::new();
    let mut pos: HashMap<Vertex, usize> = HashMap::new();
    let mut adj: Vec<Vec<(usize, usize, bool)>> = Vec::new();
    for (ei, &e) in region.edges.iter().enumerate() {
        let a = *pos.entry(e.from_vertex()).or_insert_with(|| {
            verts.push(e.from_vertex());
            adj.push(Vec::new());
            verts.len() - 1
        });
        let b = *pos.entry(e.to_vertex()).or_insert_with(|| {
            verts.push(e.to_vertex());
            adj.push(Vec::new());
            verts.len() - 1
        });
        adj[a].push((b, ei, true));
        adj[b].push((a, ei, false));
    }
    let mut gv: Vec<Option<Elem>> = verts
        .iter()
        .map(|&w| if region.is_interior(w) { None } else { Some(0) })
        .collect();
    let mut queue: VecDeque<usize> =
        gv.iter().enumerate().filter(|(_, x)| x.is_some()).map(|(k, _)| k).collect();
    while let Some(a) = queue.pop_front() {
        let ga = gv[a].expect("queued vertices are solved");
        for &(b, ei, outgoing) in &adj[a] {
            if gv[b].is_some() {
                continue;
            }
            let s = seed.get(ei);
            let c = cand.get(ei);
            // cand = g_from * seed * gbar_to on the canonical orientation.
            let gb = if outgoing {
                g.mul(g.mul(g.inv(c), ga), s)
            } else {
                g.mul(g.mul(c, ga), g.inv(s))
            };
            gv[b] = Some(gb);
            queue.push_back(b);
        }
    }
    debug_assert!(gv.iter().all(Option::is_some), "edge graph must be connected");
    for (ei, &e) in region.edges.iter().enumerate() {
        let from = gv[pos[&e.from_vertex()]].unwrap();
        let to = gv[pos[&e.to_vertex()]].unwrap();
        if cand.get(ei) != g.mul(g.mul(from, seed.get(ei)), g.inv(to)) {
            return false;
        }
    }
    true
}

/// Apply a per-vertex gauge assignment to a configuration.
pub fn gauge_transform(
    lab: &Lab,
    cfg: &GaugeConfig,
    assignment: &HashMap<Vertex, Elem>,
) -> GaugeConfig {
    let g = lab.group();
    let mut out = cfg.clone();
    for (ei, &e) in lab.region.edges.iter().enumerate() {
        let g0 = assignment.get(&e.from_vertex()).copied().unwrap_or(0);
        let g1 = assignment.get(&e.to_vertex()).copied().unwrap_or(0);
        if g0 != 0 || g1 != 0 {
            out.set(ei, g.mul(g.mul(g0, cfg.get(ei)), g.inv(g1)));
        }
    }
    out
}

/// Enumerate the full interior gauge orbit of a seed configuration,
/// asserting freeness (distinctness of all |G|^|interior| images).
pub fn enumerate_orbit(lab: &Lab, seed: &GaugeConfig) -> Vec<GaugeConfig> {
    let g = lab.group();
    let n = g.order();
    let interior = &lab.region.interior_vertices;
    let k = interior.len();
    let total = n.checked_pow(k as u32).expect("orbit size overflow");
    let vpos: HashMap<Vertex, usize> =
        interior.iter().enumerate().map(|(p, &w)| (w, p)).collect();
    let ends: Vec<(Option<usize>, Option<usize>)> = lab
        .region
        .edges
        .iter()
        .map(|e| (vpos.get(&e.from_vertex()).copied(), vpos.get(&e.to_vertex()).copied()))
        .collect();
    let mut out = Vec::with_capacity(total);
    let mut counter = vec![0usize; k];
    loop {
        let mut cfg = seed.clone();
        for (ei, &(p0, p1)) in ends.iter().enumerate() {
            let g0 = p0.map(|p| counter[p]).unwrap_or(0);
            let g1 = p1.map(|p| counter[p]).unwrap_or(0);
            if g0 != 0 || g1 != 0 {
                cfg.set(ei, g.mul(g.mul(g0, seed.get(ei)), g.inv(g1)));
            }
        }
        out.push(cfg);
        let mut p = 0;
        loop {
            if p == k {
                debug_assert_eq!(out.len(), total);
                let distinct: HashSet<&GaugeConfig> = out.iter().collect();
                assert_eq!(distinct.len(), out.len(), "interior gauge action must be free");
                return out;
            }
            counter[p] += 1;
            if counter[p] < n {
                break;
            }
            counter[p] = 0;
            p += 1;
        }
    }
}

/// A pack handle: its label and one member.
#[derive(Debug, Clone)]
pub struct Pack {
    pub label: PackLabel,
    pub seed: GaugeConfig,
}

impl Pack {
    pub fn build(lab: &Lab, label: PackLabel) -> Result<Pack, NetError> {
        let seed = seed_config(lab, &label)?;
        Ok(Pack { label, seed })
    }

    /// The unit-norm uniform superposition over the pack, enumerated.
    pub fn eta_state(&self, lab: &Lab) -> SparseState {
        let members = enumerate_orbit(lab, &self.seed);
        let amp = Complex64::new(1.0 / (members.len() as f64).sqrt(), 0.0);
        let mut psi = SparseState::zero();
        for m in members {
            psi.add_term(m, amp);
        }
        psi
    }
}

/// `<eta(seed1)| op |eta(seed2)>` for uniform orbit states, without
/// enumeration: apply the adjoint to the left seed and test membership of
/// each reached configuration in the right orbit.
///
/// Valid whenever `op` commutes with the interior gauge projector, which
/// holds for every operator family anchored at the origin site, the boundary
/// ribbon, or outside the interior.
pub fn orbit_matrix_element(
    lab: &Lab,
    op: &LinearOp,
    seed1: &GaugeConfig,
    seed2: &GaugeConfig,
) -> Result<Complex64, NetError> {
    let adj = lab.adjoint(op);
    let reached = lab.apply(&adj, &SparseState::basis(seed1.clone()))?;
    let mut total = Complex64::new(0.0, 0.0);
    for (cfg, &c) in reached.terms() {
        if orbit_contains(lab, seed2, cfg) {
            total += c.conj();
        }
    }
    Ok(total)
}

/// A full eta-basis label: sector, site label u = (i, j), boundary label
/// v = (family index, j').
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaLabel {
    pub sector: Sector,
    pub u: (usize, usize),
    pub v: (usize, usize),
}

/// A deterministic family of boundary conditions standing in for the full
/// boundary-condition set, which is far too large to enumerate.
#[derive(Debug, Clone)]
pub struct BoundaryFamily {
    pub members: Vec<BoundaryCondition>,
}

impl BoundaryFamily {
    /// Generate a family of at least `target` boundary conditions: the
    /// trivial boundary, single-edge insertions realizing every group element
    /// as boundary flux, and gauge-dressed variants at outer vertices.
    pub fn generate(lab: &Lab, target: usize, seed: u64) -> BoundaryFamily {
        use rand::{Rng, SeedableRng};
        let g = lab.group();
        let nb = lab.region.boundary_edges.len();
        let mut members = vec![BoundaryCondition::trivial(lab)];
        let mut seen: HashSet<BoundaryCondition> = members.iter().cloned().collect();
        let path = lab.region.boundary_ribbon.direct_path();
        for x in 1..g.order() {
            let mut vals = vec![0u8; nb];
            let (_, fwd) = path[0].canonical();
            vals[0] = if fwd { x } else { g.inv(x) } as u8;
            let b = BoundaryCondition::from_vals(vals);
            if seen.insert(b.clone()) {
                members.push(b);
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base_count = members.len();
        let mut round = 0;
        while members.len() < target && round < 64 {
            for k in 0..base_count {
                let assignment: HashMap<Vertex, Elem> = lab
                    .region
                    .outer_vertices
                    .iter()
                    .map(|&w| (w, rng.gen_range(0..g.order())))
                    .collect();
                let b0 = members[k].clone();
                let mut vals = vec![0u8; nb];
                for (t, &ei) in lab.region.boundary_edges.iter().enumerate() {
                    let e: Edge = lab.region.edges[ei];
                    let g0 = assignment.get(&e.from_vertex()).copied().unwrap_or(0);
                    let g1 = assignment.get(&e.to_vertex()).copied().unwrap_or(0);
                    vals[t] = g.mul(g.mul(g0, b0.vals[t] as Elem), g.inv(g1)) as u8;
                }
                let b = BoundaryCondition::from_vals(vals);
                if seen.insert(b.clone()) {
                    members.push(b);
                }
            }
            round += 1;
        }
        BoundaryFamily { members }
    }

    /// Indices of members compatible with a class.
    pub fn compatible_with(&self, lab: &Lab, class: usize) -> Vec<usize> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, b)| b.compatibility(lab).0 == class)
            .map(|(k, _)| k)
            .collect()
    }
}

/// The eta basis machinery over a boundary family.
#[derive(Debug, Clone)]
pub struct EtaBasis {
    pub family: BoundaryFamily,
}

impl EtaBasis {
    pub fn new(family: BoundaryFamily) -> Self {
        Self { family }
    }

    /// All labels (u, v) of a sector over the compatible part of the family.
    pub fn labels(&self, lab: &Lab, sector: Sector) -> Vec<EtaLabel> {
        let class = lab.qd.class(sector);
        let irrep = lab.qd.irrep(sector);
        let compat = self.family.compatible_with(lab, sector.class);
        let mut out = Vec::new();
        for i in 0..class.size() {
            for j in 0..irrep.dim {
                for &b in &compat {
                    for jp in 0..irrep.dim {
                        out.push(EtaLabel { sector, u: (i, j), v: (b, jp) });
                    }
                }
            }
        }
        out
    }

    pub fn pack(
        &self,
        lab: &Lab,
        sector: Sector,
        i: usize,
        b: usize,
        m: usize,
    ) -> Result<Pack, NetError> {
        Pack::build(
            lab,
            PackLabel { class: sector.class, i, boundary: self.family.members[b].clone(), m },
        )
    }

    /// Coefficients of eta^{RC;uv} over the packs, indexed by m:
    /// sqrt(dim R / |N_C|) R^{j j'}(m)^*.
    pub fn uv_coefficients(&self, lab: &Lab, l: &EtaLabel) -> Vec<Complex64> {
        let irrep = lab.qd.irrep(l.sector);
        let nc = lab.qd.class(l.sector).centralizer.order();
        let w = (irrep.dim as f64 / nc as f64).sqrt();
        (0..nc).map(|m| irrep.entry(m, l.u.1, l.v.1).conj() * w).collect()
    }

    /// Explicitly enumerated eta^{RC;uv} state.
    pub fn eta_uv_state(&self, lab: &Lab, l: &EtaLabel) -> Result<SparseState, NetError> {
        let coeffs = self.uv_coefficients(lab, l);
        let mut psi = SparseState::zero();
        for (m, &c) in coeffs.iter().enumerate() {
            if c.norm() < 1e-15 {
                continue;
            }
            let pack = self.pack(lab, l.sector, l.u.0, l.v.0, m)?;
            psi.add_scaled(&pack.eta_state(lab), c);
        }
        psi.prune();
        Ok(psi)
    }

    /// `<eta(l1)| op |eta(l2)>` through the orbit-membership route; `op` must
    /// commute with the interior gauge projector.
    pub fn matrix_element_orbit(
        &self,
        lab: &Lab,
        op: &LinearOp,
        l1: &EtaLabel,
        l2: &EtaLabel,
    ) -> Result<Complex64, NetError> {
        let c1 = self.uv_coefficients(lab, l1);
        let c2 = self.uv_coefficients(lab, l2);
        let mut total = Complex64::new(0.0, 0.0);
        for (m1, &a1) in c1.iter().enumerate() {
            if a1.norm() < 1e-15 {
                continue;
            }
            let p1 = self.pack(lab, l1.sector, l1.u.0, l1.v.0, m1)?;
            for (m2, &a2) in c2.iter().enumerate() {
                if a2.norm() < 1e-15 {
                    continue;
                }
                let p2 = self.pack(lab, l2.sector, l2.u.0, l2.v.0, m2)?;
                total += a1.conj() * a2 * orbit_matrix_element(lab, op, &p1.seed, &p2.seed)?;
            }
        }
        Ok(total)
    }

    /// Gram matrix of a label list through the membership route.
    pub fn gram_orbit(
        &self,
        lab: &Lab,
        labels: &[EtaLabel],
    ) -> Result<Vec<Vec<Complex64>>, NetError> {
        let n = labels.len();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for r in 0..n {
            for c in 0..n {
                m[r][c] =
                    self.matrix_element_orbit(lab, &LinearOp::Identity, &labels[r], &labels[c])?;
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// Boundary moves (the unitaries behind the boundary label changers).
// ---------------------------------------------------------------------------

/// Plan for re-solving the outer annulus after a boundary replacement.
#[derive(Debug)]
struct MovePlan {
    /// (face cycle, edge to solve), in leaf-to-root order.
    steps: Vec<(Vec<(usize, bool)>, usize)>,
    /// Faces whose flux is re-checked after solving (tree roots).
    check_faces: Vec<Vec<(usize, bool)>>,
    /// The last fiducial edge and its traversal orientation.
    last_fiducial: (usize, bool),
}

/// The interior-preserving boundary replacement U_{b2 b1}: on a basis state
/// with boundary b1 it returns the unique basis state with boundary b2 that
/// agrees on every inner edge, preserves all face fluxes, and twists the
/// last fiducial edge by the iterator correction q_{i(b1)} qbar_{i(b2)}.
#[derive(Debug)]
pub struct BoundaryMove {
    edge_count: usize,
    from: BoundaryCondition,
    to: BoundaryCondition,
    boundary_positions: Vec<usize>,
    correction: Elem,
    plan: Arc<MovePlan>,
    group: FiniteGroup,
}

impl BoundaryMove {
    pub fn new(
        lab: &Lab,
        to: BoundaryCondition,
        from: BoundaryCondition,
    ) -> Result<LinearOp, NetError> {
        let g = lab.group();
        let (c1, i1) = from.compatibility(lab);
        let (c2, i2) = to.compatibility(lab);
        if c1 != c2 {
            return Err(NetError::NoBoundaryMove);
        }
        let class = &lab.qd.classes[c1];
        let correction = g.mul(class.iterators[i1], g.inv(class.iterators[i2]));

        let region = &lab.region;
        let inner: HashSet<usize> = inner_edge_indices(lab).into_iter().collect();
        let boundary_set: HashSet<usize> = region.boundary_edges.iter().copied().collect();

        let path = region.fiducial.direct_path();
        let (last_edge, last_fwd) = path.last().expect("fiducial nonempty").canonical();
        let last_idx = lab.space.idx(last_edge).expect("fiducial edge in region");

        let mut unknown: Vec<bool> = (0..region.edge_count())
            .map(|ei| !inner.contains(&ei) && !boundary_set.contains(&ei) && ei != last_idx)
            .collect();

        let cycles: Vec<Vec<(usize, bool)>> =
            region.faces.iter().map(|&f| face_cycle(lab, f)).collect();
        let active: Vec<usize> = (0..cycles.len())
            .filter(|&fi| cycles[fi].iter().any(|&(ei, _)| unknown[ei]))
            .collect();
        let mut edge_faces: HashMap<usize, Vec<usize>> = HashMap::new();
        for &fi in &active {
            for &(ei, _) in &cycles[fi] {
                if unknown[ei] {
                    edge_faces.entry(ei).or_default().push(fi);
                }
            }
        }
        let mut visited: HashMap<usize, Option<usize>> = HashMap::new();
        let mut order: Vec<usize> = Vec::new();
        for &start in &active {
            if visited.contains_key(&start) {
                continue;
            }
            visited.insert(start, None);
            let mut queue = VecDeque::from([start]);
            while let Some(fi) = queue.pop_front() {
                order.push(fi);
                for &(ei, _) in &cycles[fi] {
                    if !unknown[ei] {
                        continue;
                    }
                    for &fj in edge_faces.get(&ei).into_iter().flatten() {
                        if let std::collections::hash_map::Entry::Vacant(slot) =
                            visited.entry(fj)
                        {
                            slot.insert(Some(ei));
                            unknown[ei] = false;
                            queue.push_back(fj);
                        }
                    }
                }
            }
        }
        let mut steps = Vec::new();
        let mut check_faces = Vec::new();
        for &fi in order.iter().rev() {
            match visited[&fi] {
                Some(ei) => steps.push((cycles[fi].clone(), ei)),
                None => check_faces.push(cycles[fi].clone()),
            }
        }
        let plan = MovePlan { steps, check_faces, last_fiducial: (last_idx, last_fwd) };
        Ok(LinearOp::Kernel(Arc::new(BoundaryMove {
            edge_count: region.edge_count(),
            from,
            to,
            boundary_positions: region.boundary_edges.clone(),
            correction,
            plan: Arc::new(plan),
            group: g.clone(),
        })))
    }
}

impl BasisKernel for BoundaryMove {
    fn apply_basis(
        &self,
        group: &FiniteGroup,
        _space: &EdgeSpace,
        cfg: &GaugeConfig,
    ) -> Result<Vec<(GaugeConfig, Complex64)>, OpError> {
        if cfg.len() != self.edge_count {
            return Err(OpError::Kernel("boundary move applied on a foreign space".into()));
        }
        for (t, &ei) in self.boundary_positions.iter().enumerate() {
            if cfg.get(ei) != self.from.vals[t] as Elem {
                return Err(OpError::Kernel(
                    "boundary move applied outside its source boundary sector".into(),
                ));
            }
        }
        let g = group;
        let mut out = cfg.clone();
        for (t, &ei) in self.boundary_positions.iter().enumerate() {
            out.set(ei, self.to.vals[t] as Elem);
        }
        let (li, fwd) = self.plan.last_fiducial;
        let oriented = out.oriented(g, li, fwd);
        let corrected = g.mul(oriented, self.correction);
        out.set(li, if fwd { corrected } else { g.inv(corrected) });
        for (cycle, ei) in &self.plan.steps {
            let target = cycle_flux(g, cfg, cycle);
            solve_face_edge(g, &mut out, cycle, *ei, target);
        }
        for cycle in &self.plan.check_faces {
            if cycle_flux(g, &out, cycle) != cycle_flux(g, cfg, cycle) {
                return Err(OpError::Kernel(
                    "no interior-preserving boundary extension for this configuration".into(),
                ));
            }
        }
        Ok(vec![(out, Complex64::new(1.0, 0.0))])
    }

    fn adjoint(&self) -> LinearOp {
        LinearOp::Kernel(Arc::new(BoundaryMove {
            edge_count: self.edge_count,
            from: self.to.clone(),
            to: self.from.clone(),
            boundary_positions: self.boundary_positions.clone(),
            correction: self.group.inv(self.correction),
            plan: self.plan.clone(),
            group: self.group.clone(),
        }))
    }

    fn support(&self) -> Vec<Edge> {
        Vec::new()
    }
}

/// Edges a boundary move must leave untouched: the radius-(n-1) sub-region
/// plus all fiducial edges except the last.
fn inner_edge_indices(lab: &Lab) -> Vec<usize> {
    let region = &lab.region;
    let mut out: HashSet<usize> = HashSet::new();
    if region.radius >= 2 {
        let sub = crate::lattice::Region::build(region.origin, region.radius - 1)
            .expect("sub-region builds");
        for e in &sub.edges {
            if let Some(ei) = lab.space.idx(*e) {
                out.insert(ei);
            }
        }
    }
    let path = region.fiducial.direct_path();
    for oe in &path[..path.len() - 1] {
        out.insert(lab.space.idx(oe.canonical().0).expect("fiducial edge"));
    }
    out.into_iter().collect()
}

/// The boundary label changer: a weighted combination of boundary moves and
/// boundary-ribbon L operators mapping eta^{RC;u v1} to eta^{RC;u v2}.
pub fn boundary_label_changer(
    lab: &Lab,
    basis: &EtaBasis,
    sector: Sector,
    v2: (usize, usize),
    v1: (usize, usize),
) -> Result<LinearOp, NetError> {
    let g = lab.group();
    let class = lab.qd.class(sector);
    let irrep = lab.qd.irrep(sector);
    let b1 = &basis.family.members[v1.0];
    let b2 = &basis.family.members[v2.0];
    let (c1, i1) = b1.compatibility(lab);
    if c1 != sector.class || b2.compatibility(lab).0 != sector.class {
        return Err(NetError::IncompatibleBoundary);
    }
    let q = class.iterators[i1];
    let mover = BoundaryMove::new(lab, b2.clone(), b1.clone())?;
    let w = irrep.dim as f64 / class.centralizer.order() as f64;
    let mut terms = Vec::new();
    for (mi, &m) in class.centralizer.elements.iter().enumerate() {
        // Coefficient R^{j2' j1'}(m), not conjugated, and the L exponent
        // carries mbar conjugated by q_{i(b1)}.
        let coeff = irrep.entry(mi, v2.1, v1.1);
        if coeff.norm() < 1e-15 {
            continue;
        }
        let h = g.conj(q, g.inv(m));
        terms.push(ops::scaled(
            coeff,
            ops::prod(vec![mover.clone(), ops::ribbon_l(g, &lab.region.boundary_ribbon, h)]),
        ));
    }
    Ok(ops::scaled_re(w, ops::sum(terms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::rep::Sector;

    fn z2_lab(n: usize) -> Lab {
        Lab::canonical(FiniteGroup::cyclic(2), n).unwrap()
    }

    fn s3_lab(n: usize) -> Lab {
        Lab::canonical(FiniteGroup::symmetric_3(), n).unwrap()
    }

    #[test]
    fn trivial_seed_is_all_identity() {
        let lab = z2_lab(1);
        let label =
            PackLabel { class: 0, i: 0, boundary: BoundaryCondition::trivial(&lab), m: 0 };
        let seed = seed_config(&lab, &label).unwrap();
        assert!(seed.vals().iter().all(|&x| x == 0));
    }

    #[test]
    fn incompatible_boundary_rejected() {
        let lab = z2_lab(1);
        // A boundary with flux 1 (nontrivial class) against class 0.
        let mut vals = vec![0u8; lab.region.boundary_edges.len()];
        vals[0] = 1;
        let b = BoundaryCondition::from_vals(vals);
        assert_eq!(b.compatibility(&lab).0, 1);
        let label = PackLabel { class: 0, i: 0, boundary: b, m: 0 };
        assert!(matches!(seed_config(&lab, &label), Err(NetError::IncompatibleBoundary)));
    }

    #[test]
    fn s3_seed_satisfies_all_constraints() {
        let lab = s3_lab(1);
        // Transposition class of S3.
        let class_idx = 1;
        let class = &lab.qd.classes[class_idx];
        assert_eq!(class.size(), 3);
        let fam = BoundaryFamily::generate(&lab, 8, 7);
        let compat = fam.compatible_with(&lab, class_idx);
        assert!(!compat.is_empty());
        for &bid in compat.iter().take(3) {
            for i in 0..class.size() {
                for m in 0..class.centralizer.order() {
                    let label = PackLabel {
                        class: class_idx,
                        i,
                        boundary: fam.members[bid].clone(),
                        m,
                    };
                    let seed = seed_config(&lab, &label).unwrap();
                    check_pack_constraints(&lab, &seed, &label).unwrap();
                }
            }
        }
    }

    #[test]
    fn orbit_size_and_freeness_z2_n1() {
        let lab = z2_lab(1);
        let label =
            PackLabel { class: 0, i: 0, boundary: BoundaryCondition::trivial(&lab), m: 0 };
        let seed = seed_config(&lab, &label).unwrap();
        let orbit = enumerate_orbit(&lab, &seed);
        assert_eq!(orbit.len(), 64, "2^6 members for the six interior vertices");
        for cfg in &orbit {
            check_pack_constraints(&lab, cfg, &label).unwrap();
        }
        for cfg in orbit.iter().take(16) {
            assert!(orbit_contains(&lab, &seed, cfg));
        }
        let mut off = seed.clone();
        off.set(0, 1);
        // Flipping a single edge leaves the orbit (it breaks flatness).
        assert!(!orbit_contains(&lab, &seed, &off));
    }

    #[test]
    fn membership_matches_enumeration() {
        let lab = s3_lab(1);
        let fam = BoundaryFamily::generate(&lab, 6, 1);
        // 3-cycle class against the trivial boundary: incompatible.
        let label = PackLabel { class: 2, i: 0, boundary: fam.members[0].clone(), m: 0 };
        assert!(matches!(seed_config(&lab, &label), Err(NetError::IncompatibleBoundary)));

        let compat = fam.compatible_with(&lab, 2);
        let label =
            PackLabel { class: 2, i: 1, boundary: fam.members[compat[0]].clone(), m: 2 };
        let seed = seed_config(&lab, &label).unwrap();
        let orbit = enumerate_orbit(&lab, &seed);
        assert_eq!(orbit.len(), 6usize.pow(6));
        let in_set: HashSet<&GaugeConfig> = orbit.iter().collect();
        for cfg in orbit.iter().step_by(4096) {
            assert!(orbit_contains(&lab, &seed, cfg));
        }
        let mut other = seed.clone();
        other.set(3, lab.group().mul(other.get(3), 1));
        assert_eq!(in_set.contains(&other), orbit_contains(&lab, &seed, &other));
    }

    #[test]
    fn pack_sizes_independent_of_m() {
        let lab = s3_lab(1);
        let fam = BoundaryFamily::generate(&lab, 8, 3);
        let class_idx = 1;
        let class = &lab.qd.classes[class_idx];
        let compat = fam.compatible_with(&lab, class_idx);
        let bid = compat[0];
        let mut sizes = Vec::new();
        for m in 0..class.centralizer.order() {
            let label =
                PackLabel { class: class_idx, i: 0, boundary: fam.members[bid].clone(), m };
            let seed = seed_config(&lab, &label).unwrap();
            sizes.push(enumerate_orbit(&lab, &seed).len());
        }
        assert!(sizes.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(sizes[0], 6usize.pow(6));
    }

    #[test]
    fn eta_m_states_are_orthonormal() {
        let lab = z2_lab(1);
        let fam = BoundaryFamily::generate(&lab, 8, 5);
        assert!(fam.members.len() >= 3);
        let mut states = Vec::new();
        for class in 0..2 {
            for &bid in fam.compatible_with(&lab, class).iter().take(2) {
                for m in 0..2 {
                    let label =
                        PackLabel { class, i: 0, boundary: fam.members[bid].clone(), m };
                    let pack = Pack::build(&lab, label).unwrap();
                    states.push(pack.eta_state(&lab));
                }
            }
        }
        for (r, a) in states.iter().enumerate() {
            for (c, b) in states.iter().enumerate() {
                let want = if r == c { 1.0 } else { 0.0 };
                let got = a.inner(b);
                assert!(
                    (got.re - want).abs() < 1e-12 && got.im.abs() < 1e-14,
                    "gram({r},{c}) = {got}"
                );
            }
        }
    }

    #[test]
    fn eta_uv_gram_is_identity_s3_n1() {
        let lab = s3_lab(1);
        let fam = BoundaryFamily::generate(&lab, 8, 11);
        let basis = EtaBasis::new(fam);
        let mut labels = Vec::new();
        for sector in lab.qd.sectors() {
            let ls = basis.labels(&lab, sector);
            labels.extend(ls.into_iter().take(3));
        }
        let gram = basis.gram_orbit(&lab, &labels).unwrap();
        for (r, row) in gram.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!(
                    (x.re - want).abs() < 1e-10 && x.im.abs() < 1e-10,
                    "gram({r},{c}) = {x} for {:?} vs {:?}",
                    labels[r],
                    labels[c]
                );
            }
        }
    }

    #[test]
    fn explicit_and_orbit_inner_products_agree() {
        let lab = z2_lab(1);
        let fam = BoundaryFamily::generate(&lab, 8, 13);
        let basis = EtaBasis::new(fam);
        let nontrivial = Sector { class: 1, irrep: 1 };
        let compat = basis.family.compatible_with(&lab, 1);
        let l1 = EtaLabel { sector: nontrivial, u: (0, 0), v: (compat[0], 0) };
        let l2 = EtaLabel { sector: nontrivial, u: (0, 0), v: (compat[1], 0) };
        let s1 = basis.eta_uv_state(&lab, &l1).unwrap();
        let s2 = basis.eta_uv_state(&lab, &l2).unwrap();
        let explicit = s1.inner(&s2);
        let orbit =
            basis.matrix_element_orbit(&lab, &LinearOp::Identity, &l1, &l2).unwrap();
        assert!((explicit - orbit).norm() < 1e-12);
        let explicit_diag = s1.inner(&s1);
        let orbit_diag =
            basis.matrix_element_orbit(&lab, &LinearOp::Identity, &l1, &l1).unwrap();
        assert!((explicit_diag - orbit_diag).norm() < 1e-12);
        assert!((explicit_diag.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_family_spans_classes() {
        for lab in [z2_lab(1), s3_lab(1)] {
            let fam = BoundaryFamily::generate(&lab, 8, 23);
            for class in 0..lab.qd.classes.len() {
                assert!(
                    !fam.compatible_with(&lab, class).is_empty(),
                    "family misses class {class}"
                );
            }
            assert!(fam.members.len() >= 8);
        }
    }

    #[test]
    fn boundary_move_roundtrip_and_adjoint() {
        let lab = z2_lab(2);
        let fam = BoundaryFamily::generate(&lab, 8, 29);
        let compat = fam.compatible_with(&lab, 1);
        let b1 = fam.members[compat[0]].clone();
        let b2 = fam.members[compat[1]].clone();
        let label = PackLabel { class: 1, i: 0, boundary: b1.clone(), m: 0 };
        let seed = seed_config(&lab, &label).unwrap();
        let mv = BoundaryMove::new(&lab, b2.clone(), b1.clone()).unwrap();
        let back = lab.adjoint(&mv);
        let psi = SparseState::basis(seed.clone());
        let moved = lab.apply(&mv, &psi).unwrap();
        assert_eq!(moved.num_terms(), 1);
        let (moved_cfg, _) = moved.terms().next().unwrap();
        // Image lies in the b2 pack with the same (class, i, m).
        let label2 = PackLabel { class: 1, i: 0, boundary: b2, m: 0 };
        check_pack_constraints(&lab, moved_cfg, &label2).unwrap();
        // Inner edges untouched.
        let last_idx = lab
            .space
            .idx(lab.region.fiducial.direct_path().last().unwrap().canonical().0)
            .unwrap();
        for ei in inner_edge_indices(&lab) {
            if ei != last_idx {
                assert_eq!(seed.get(ei), moved_cfg.get(ei));
            }
        }
        // U_{b1 b2} U_{b2 b1} = 1 on the b1 sector.
        let round = lab.apply(&back, &moved).unwrap();
        assert_eq!(round.num_terms(), 1);
        assert!((round.amplitude(&seed).re - 1.0).abs() < 1e-14);
        // Mismatched class pairs are refused outright.
        let incompatible = BoundaryMove::new(
            &lab,
            BoundaryCondition::trivial(&lab),
            fam.members[compat[0]].clone(),
        );
        assert!(matches!(incompatible, Err(NetError::NoBoundaryMove)));
    }
}
