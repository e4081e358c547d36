//! The operator calculus: ribbon operators and every operator family built
//! from them, as lazy kernels acting on sparse states.
//!
//! Operators are expression trees over a small set of primitives, each of
//! which maps a basis configuration to a short weighted list of basis
//! configurations. Nothing is ever materialized as a matrix outside the
//! dense test oracle, since every primitive here is a generalized
//! permutation.
//!
//! The composition convention is `(AB)psi = A(B psi)`: in a product the
//! rightmost factor acts first.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::config::{EdgeSpace, GaugeConfig, SparseState};
use crate::group::{Elem, FiniteGroup};
use crate::lattice::{Edge, Ribbon, Site, Triangle, TriangleKind, Vertex};
use crate::rep::{QuantumDouble, Sector};

#[derive(Debug, Error)]
pub enum OpError {
    #[error("operator support escapes the edge space at {0:?}")]
    SupportEscape(Edge),
    #[error("triangle kind mismatch: {0}")]
    KindMismatch(String),
    #[error("ribbon must be closed for charge detectors")]
    NotClosed,
    #[error("label out of range: {0}")]
    LabelOutOfRange(String),
    #[error("{0}")]
    Kernel(String),
}

/// A primitive operator kernel supplied from outside th module
/// (boundary moves live in the string-net engine).
pub trait BasisKernel: fmt::Debug + Send + Sync {
    fn apply_basis(
        &self,
        group: &FiniteGroup,
        space: &EdgeSpace,
        cfg: &GaugeConfig,
    ) -> Result<Vec<(GaugeConfig, Complex64)>, OpError>;
    fn adjoint(&self) -> LinearOp;
    fn support(&self) -> Vec<Edge>;
}

/// A finitely supported operator: an expression tree over primitive kernels.
#[derive(Debug, Clone)]
pub enum LinearOp {
    Identity,
    Zero,
    Scaled(Complex64, Box<LinearOp>),
    Sum(Vec<LinearOp>),
    /// Rightmost factor applied first.
    Product(Vec<LinearOp>),
    /// Left multiplication on one edge: |g> -> |hg>.
    EdgeL { edge: Edge, h: Elem },
    /// Right multiplication: |g> -> |g hbar>.
    EdgeR { edge: Edge, h: Elem },
    /// Projector |g><g|.
    EdgeT { edge: Edge, g: Elem },
    /// Diagonal projector on several edges at once.
    DiagProj(Arc<Vec<(Edge, Elem)>>),
    /// The ribbon operator F^{h,g}.
    RibbonF { ribbon: Arc<Ribbon>, h: Elem, g: Elem },
    /// A gauge transformation U[{g_v}]; vertices absent from the list act
    /// trivially.
    GaugeU(Arc<Vec<(Vertex, Elem)>>),
    Kernel(Arc<dyn BasisKernel>),
}

pub fn scaled(c: Complex64, op: LinearOp) -> LinearOp {
    LinearOp::Scaled(c, Box::new(op))
}

pub fn scaled_re(c: f64, op: LinearOp) -> LinearOp {
    scaled(Complex64::new(c, 0.0), op)
}

pub fn sum(ops: Vec<LinearOp>) -> LinearOp {
    LinearOp::Sum(ops)
}

/// Product in writing order: `prod([A, B])` is the operator AB.
pub fn prod(ops: Vec<LinearOp>) -> LinearOp {
    LinearOp::Product(ops)
}

impl LinearOp {
    /// The union of primitive supports.
    pub fn support(&self) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut BTreeSet<Edge>) {
        match self {
            LinearOp::Identity | LinearOp::Zero => {}
            LinearOp::Scaled(_, op) => op.collect_support(out),
            LinearOp::Sum(v) | LinearOp::Product(v) => {
                for op in v {
                    op.collect_support(out);
                }
            }
            LinearOp::EdgeL { edge, .. }
            | LinearOp::EdgeR { edge, .. }
            | LinearOp::EdgeT { edge, .. } => {
                out.insert(*edge);
            }
            LinearOp::DiagProj(pairs) => out.extend(pairs.iter().map(|&(e, _)| e)),
            LinearOp::RibbonF { ribbon, .. } => out.extend(ribbon.support()),
            LinearOp::GaugeU(assign) => {
                for &(w, _) in assign.iter() {
                    out.extend(crate::lattice::edges_at(w));
                }
            }
            LinearOp::Kernel(k) => out.extend(k.support()),
        }
    }
}

/// Structural adjoint.
pub fn adjoint(group: &FiniteGroup, op: &LinearOp) -> LinearOp {
    match op {
        LinearOp::Identity => LinearOp::Identity,
        LinearOp::Zero => LinearOp::Zero,
        LinearOp::Scaled(c, inner) => scaled(c.conj(), adjoint(group, inner)),
        LinearOp::Sum(v) => sum(v.iter().map(|o| adjoint(group, o)).collect()),
        LinearOp::Product(v) => prod(v.iter().rev().map(|o| adjoint(group, o)).collect()),
        LinearOp::EdgeL { edge, h } => LinearOp::EdgeL { edge: *edge, h: group.inv(*h) },
        LinearOp::EdgeR { edge, h } => LinearOp::EdgeR { edge: *edge, h: group.inv(*h) },
        LinearOp::EdgeT { edge, g } => LinearOp::EdgeT { edge: *edge, g: *g },
        LinearOp::DiagProj(p) => LinearOp::DiagProj(p.clone()),
        // (F^{h,g})* = F^{hbar,g}
        LinearOp::RibbonF { ribbon, h, g } => {
            LinearOp::RibbonF { ribbon: ribbon.clone(), h: group.inv(*h), g: *g }
        }
        LinearOp::GaugeU(assign) => LinearOp::GaugeU(Arc::new(
            assign.iter().map(|&(w, g)| (w, group.inv(g))).collect(),
        )),
        LinearOp::Kernel(k) => k.adjoint(),
    }
}

/// Apply an operator to a state; amplitudes below the pruning threshold drop.
pub fn apply(
    group: &FiniteGroup,
    space: &EdgeSpace,
    op: &LinearOp,
    psi: &SparseState,
) -> Result<SparseState, OpError> {
    let mut out = SparseState::zero();
    match op {
        LinearOp::Identity => out = psi.clone(),
        LinearOp::Zero => {}
        LinearOp::Scaled(c, inner) => {
            out = apply(group, space, inner, psi)?;
            out.scale(*c);
        }
        LinearOp::Sum(ops) => {
            for o in ops {
                let part = apply(group, space, o, psi)?;
                out.add_scaled(&part, Complex64::new(1.0, 0.0));
            }
            out.prune();
        }
        LinearOp::Product(ops) => {
            let mut cur = psi.clone();
            for o in ops.iter().rev() {
                cur = apply(group, space, o, &cur)?;
            }
            out = cur;
        }
        _ => {
            for (cfg, &amp) in psi.terms() {
                for (cfg2, w) in apply_primitive(group, space, op, cfg)? {
                    out.add_term(cfg2, amp * w);
                }
            }
        }
    }
    Ok(out)
}

/// Apply a primitive (non-composite) operator to one basis configuration.
fn apply_primitive(
    group: &FiniteGroup,
    space: &EdgeSpace,
    op: &LinearOp,
    cfg: &GaugeConfig,
) -> Result<Vec<(GaugeConfig, Complex64)>, OpError> {
    let one = Complex64::new(1.0, 0.0);
    let idx = |e: Edge| space.idx(e).ok_or(OpError::SupportEscape(e));
    match op {
        LinearOp::EdgeL { edge, h } => {
            let i = idx(*edge)?;
            let mut c = cfg.clone();
            c.set(i, group.mul(*h, c.get(i)));
            Ok(vec![(c, one)])
        }
        LinearOp::EdgeR { edge, h } => {
            let i = idx(*edge)?;
            let mut c = cfg.clone();
            c.set(i, group.mul(c.get(i), group.inv(*h)));
            Ok(vec![(c, one)])
        }
        LinearOp::EdgeT { edge, g } => {
            let i = idx(*edge)?;
            Ok(if cfg.get(i) == *g { vec![(cfg.clone(), one)] } else { vec![] })
        }
        LinearOp::DiagProj(pairs) => {
            for &(e, g) in pairs.iter() {
                if cfg.get(idx(e)?) != g {
                    return Ok(vec![]);
                }
            }
            Ok(vec![(cfg.clone(), one)])
        }
        LinearOp::RibbonF { ribbon, h, g } => apply_ribbon_f(group, space, ribbon, *h, *g, cfg),
        LinearOp::GaugeU(assign) => {
            let mut c = cfg.clone();
            let lookup = |w: Vertex| {
                assign.iter().find(|&&(u, _)| u == w).map(|&(_, g)| g).unwrap_or(0)
            };
            for (i, &e) in space.edges().iter().enumerate() {
                let g0 = lookup(e.from_vertex());
                let g1 = lookup(e.to_vertex());
                if g0 != 0 || g1 != 0 {
                    c.set(i, group.mul(group.mul(g0, c.get(i)), group.inv(g1)));
                }
            }
            Ok(vec![(c, one)])
        }
        LinearOp::Kernel(k) => k.apply_basis(group, space, cfg),
        _ => unreachable!("composite operators handled in apply"),
    }
}

/// The ribbon operator on a basis state.
///
/// F^{h,g} projects the flux along the direct path onto g and left/right
/// multiplies each dual-triangle edge by h conjugated by the direct flux
/// accumulated so far. This is the closed form of the inductive definition;
/// the test oracle recomputes it by literal recursion.
fn apply_ribbon_f(
    group: &FiniteGroup,
    space: &EdgeSpace,
    ribbon: &Ribbon,
    h: Elem,
    g: Elem,
    cfg: &GaugeConfig,
) -> Result<Vec<(GaugeConfig, Complex64)>, OpError> {
    let mut out = cfg.clone();
    let mut flux: Elem = 0;
    for tri in ribbon.triangles() {
        let i = space.idx(tri.edge).ok_or(OpError::SupportEscape(tri.edge))?;
        match tri.kind {
            TriangleKind::Direct => {
                let fwd = tri.edge.from_vertex() == tri.s0.vertex;
                flux = group.mul(flux, cfg.oriented(group, i, fwd));
            }
            TriangleKind::Dual => {
                let hp = group.mul(group.mul(group.inv(flux), h), flux);
                let dual_forward = (tri.s0.face, tri.s1.face) == tri.edge.dual();
                let at_from = tri.s0.vertex == tri.edge.from_vertex();
                let val = out.get(i);
                let new = match (dual_forward, at_from) {
                    // L_e^{h'}
                    (true, true) => group.mul(hp, val),
                    // R_e^{hbar'}
                    (true, false) => group.mul(val, hp),
                    // L_e^{hbar'}
                    (false, true) => group.mul(group.inv(hp), val),
                    // R_e^{h'}
                    (false, false) => group.mul(val, group.inv(hp)),
                };
                out.set(i, new);
            }
        }
    }
    if flux == g {
        Ok(vec![(out, Complex64::new(1.0, 0.0))])
    } else {
        Ok(vec![])
    }
}

/// Flux of a configuration through a ribbon: the ordered product of oriented
/// edge values along the direct path.
pub fn flux(
    group: &FiniteGroup,
    space: &EdgeSpace,
    cfg: &GaugeConfig,
    ribbon: &Ribbon,
) -> Result<Elem, OpError> {
    let mut f: Elem = 0;
    for oe in ribbon.direct_path() {
        let (e, fwd) = oe.canonical();
        let i = space.idx(e).ok_or(OpError::SupportEscape(e))?;
        f = group.mul(f, cfg.oriented(group, i, fwd));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Named operator families.
// ---------------------------------------------------------------------------

/// The unitary attached to a single triangle: L^h for dual, T^g for direct.
pub fn triangle_op(tri: &Triangle, kind_elem: Elem, kind: TriangleKind) -> Result<LinearOp, OpError> {
    if tri.kind != kind {
        return Err(OpError::KindMismatch(format!(
            "asked for a {kind:?} action on a {:?} triangle",
            tri.kind
        )));
    }
    let ribbon = Ribbon::new(vec![*tri]).expect("single triangle is a ribbon");
    Ok(match kind {
        TriangleKind::Direct => LinearOp::RibbonF { ribbon: Arc::new(ribbon), h: 0, g: kind_elem },
        TriangleKind::Dual => LinearOp::RibbonF { ribbon: Arc::new(ribbon), h: kind_elem, g: 0 },
    })
}

pub fn ribbon_f(ribbon: &Ribbon, h: Elem, g: Elem) -> LinearOp {
    LinearOp::RibbonF { ribbon: Arc::new(ribbon.clone()), h, g }
}

/// T^g over a ribbon: the flux projector F^{1,g}.
pub fn ribbon_t(ribbon: &Ribbon, g: Elem) -> LinearOp {
    ribbon_f(ribbon, 0, g)
}

/// L^h over a ribbon: sum over g of F^{h,g}.
pub fn ribbon_l(group: &FiniteGroup, ribbon: &Ribbon, h: Elem) -> LinearOp {
    sum(group.elements().map(|g| ribbon_f(ribbon, h, g)).collect())
}

/// Gauge transformation A_s^h = F^{h,1} over the elementary dual ribbon.
pub fn a_site(s: Site, h: Elem) -> LinearOp {
    ribbon_f(&Ribbon::elementary_dual(s), h, 0)
}

/// Flux projector B_s^g = F^{1,g} over the elementary direct ribbon.
pub fn b_site(s: Site, g: Elem) -> LinearOp {
    ribbon_f(&Ribbon::elementary_direct(s), 0, g)
}

/// The gauge projector A_v = |G|^-1 sum_h A_v^h.
pub fn a_vertex_proj(group: &FiniteGroup, s: Site) -> LinearOp {
    let w = 1.0 / group.order() as f64;
    scaled_re(w, sum(group.elements().map(|h| a_site(s, h)).collect()))
}

/// The flat-face projector B_f = B_s^1.
pub fn b_face_proj(s: Site) -> LinearOp {
    b_site(s, 0)
}

fn sector_parts<'a>(
    qd: &'a QuantumDouble,
    sector: Sector,
) -> (&'a crate::group::ConjugacyClass, &'a crate::rep::Irrep, f64) {
    let class = qd.class(sector);
    let irrep = qd.irrep(sector);
    let w = irrep.dim as f64 / class.centralizer.order() as f64;
    (class, irrep, w)
}

/// The Wigner projector D_s^{RC}.
pub fn wigner_rc(qd: &QuantumDouble, s: Site, sector: Sector) -> LinearOp {
    let (class, irrep, w) = sector_parts(qd, sector);
    let g = &qd.group;
    let mut terms = Vec::new();
    for (mi, &m) in class.centralizer.elements.iter().enumerate() {
        let chi = irrep.character(mi).conj();
        if chi.norm() < 1e-15 {
            continue;
        }
        for &q in &class.iterators {
            let a = a_site(s, g.conj(q, m));
            let b = b_site(s, g.conj(q, class.representative()));
            terms.push(scaled(chi, prod(vec![a, b])));
        }
    }
    scaled_re(w, sum(terms))
}

/// The gauge factor A_s^{RC;u} of the Wigner sub-projector.
pub fn wigner_gauge_u(qd: &QuantumDouble, s: Site, sector: Sector, u: (usize, usize)) -> LinearOp {
    label_changer(qd, s, sector, u, u)
}

/// The Wigner sub-projector D_s^{RC;u} = A_s^{RC;u} B_s^{c_i}.
pub fn wigner_rcu(qd: &QuantumDouble, s: Site, sector: Sector, u: (usize, usize)) -> LinearOp {
    let class = qd.class(sector);
    let b = b_site(s, class.elements[u.0]);
    prod(vec![wigner_gauge_u(qd, s, sector, u), b])
}

/// The label changer A_s^{RC;u2 u1}; at equal labels it reduces to the
/// Wigner gauge factor.
pub fn label_changer(
    qd: &QuantumDouble,
    s: Site,
    sector: Sector,
    u2: (usize, usize),
    u1: (usize, usize),
) -> LinearOp {
    let (class, irrep, w) = sector_parts(qd, sector);
    let g = &qd.group;
    let (i2, j2) = u2;
    let (i1, j1) = u1;
    let mut terms = Vec::new();
    for (mi, &m) in class.centralizer.elements.iter().enumerate() {
        let coeff = irrep.entry(mi, j2, j1).conj();
        if coeff.norm() < 1e-15 {
            continue;
        }
        // A_s^{q_{i2} m qbar_{i1}}
        let h = g.mul(g.mul(class.iterators[i2], m), g.inv(class.iterators[i1]));
        terms.push(scaled(coeff, a_site(s, h)));
    }
    scaled_re(w, sum(terms))
}

/// The sector ribbon operator F^{RC;uv}.
pub fn ribbon_f_rc(
    qd: &QuantumDouble,
    ribbon: &Ribbon,
    sector: Sector,
    u: (usize, usize),
    v: (usize, usize),
) -> Result<LinearOp, OpError> {
    let (class, irrep, w) = sector_parts(qd, sector);
    let g = &qd.group;
    let (i, j) = u;
    let (ip, jp) = v;
    if i >= class.size() || ip >= class.size() || j >= irrep.dim || jp >= irrep.dim {
        return Err(OpError::LabelOutOfRange(format!("u = {u:?}, v = {v:?}")));
    }
    let cbar = g.inv(class.elements[i]);
    let mut terms = Vec::new();
    for (mi, &m) in class.centralizer.elements.iter().enumerate() {
        let coeff = irrep.entry(mi, j, jp).conj();
        if coeff.norm() < 1e-15 {
            continue;
        }
        let gg = g.mul(g.mul(class.iterators[i], m), g.inv(class.iterators[ip]));
        terms.push(scaled(coeff, ribbon_f(ribbon, cbar, gg)));
    }
    Ok(scaled_re(w, sum(terms)))
}

/// The charge detector K_sigma^{RC} over a closed ribbon.
pub fn charge_detector(
    qd: &QuantumDouble,
    sigma: &Ribbon,
    sector: Sector,
) -> Result<LinearOp, OpError> {
    if !sigma.is_closed() {
        return Err(OpError::NotClosed);
    }
    let (class, irrep, w) = sector_parts(qd, sector);
    let g = &qd.group;
    let r = class.representative();
    let mut terms = Vec::new();
    for (mi, &m) in class.centralizer.elements.iter().enumerate() {
        let chi = irrep.character(mi).conj();
        if chi.norm() < 1e-15 {
            continue;
        }
        for &q in &class.iterators {
            terms.push(scaled(chi, ribbon_f(sigma, g.conj(q, m), g.conj(q, r))));
        }
    }
    Ok(scaled_re(w, sum(terms)))
}

/// U[{g_v}], the product of gauge transformations over an assignment.
pub fn gauge_unitary(assignment: Vec<(Vertex, Elem)>) -> LinearOp {
    LinearOp::GaugeU(Arc::new(assignment))
}

/// Diagonal projector onto given edge values.
pub fn diag_proj(pairs: Vec<(Edge, Elem)>) -> LinearOp {
    LinearOp::DiagProj(Arc::new(pairs))
}

// ---------------------------------------------------------------------------
// Dense oracle.
// ---------------------------------------------------------------------------

/// Enumerate all basis configurations of a small edge space.
pub fn enumerate_basis(group: &FiniteGroup, space: &EdgeSpace) -> Vec<GaugeConfig> {
    let k = space.len();
    let n = group.order();
    let total = n.checked_pow(k as u32).expect("basis count overflow");
    assert!(total <= 1 << 24, "basis too large to enumerate: {n}^{k}");
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut vals = vec![0u8; k];
        for slot in vals.iter_mut() {
            *slot = (code % n) as u8;
            code /= n;
        }
        out.push(GaugeConfig::from_vals(vals));
    }
    out
}

/// `<psi| op |psi>` without materializing the image state: linear parts of
/// the expression tree are recursed, everything else is applied term by term
/// against the existing amplitude map.
pub fn expectation_value(
    group: &FiniteGroup,
    space: &EdgeSpace,
    op: &LinearOp,
    psi: &SparseState,
) -> Result<Complex64, OpError> {
    match op {
        LinearOp::Identity => Ok(psi.inner(psi)),
        LinearOp::Zero => Ok(Complex64::new(0.0, 0.0)),
        LinearOp::Scaled(c, inner) => Ok(c * expectation_value(group, space, inner, psi)?),
        LinearOp::Sum(ops) => {
            let mut total = Complex64::new(0.0, 0.0);
            for o in ops {
                total += expectation_value(group, space, o, psi)?;
            }
            Ok(total)
        }
        _ => {
            let mut total = Complex64::new(0.0, 0.0);
            for (cfg, &amp) in psi.terms() {
                let out = apply(group, space, op, &SparseState::basis(cfg.clone()))?;
                for (cfg2, &w) in out.terms() {
                    total += psi.amplitude(cfg2).conj() * amp * w;
                }
            }
            Ok(total)
        }
    }
}

/// Compare two operators on basis states: exhaustively when the space is
/// small enough, otherwise on `samples` deterministic random configurations.
/// Returns the maximum amplitude deviation observed.
pub fn op_basis_diff(
    group: &FiniteGroup,
    space: &EdgeSpace,
    lhs: &LinearOp,
    rhs: &LinearOp,
    samples: usize,
    seed: u64,
) -> Result<f64, OpError> {
    let k = space.len() as u32;
    let exhaustive = group
        .order()
        .checked_pow(k)
        .map(|t| t <= 4096)
        .unwrap_or(false);
    let configs: Vec<GaugeConfig> = if exhaustive {
        enumerate_basis(group, space)
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                GaugeConfig::from_vals(
                    (0..space.len()).map(|_| rng.gen_range(0..group.order()) as u8).collect(),
                )
            })
            .collect()
    };
    let mut max = 0.0f64;
    for cfg in configs {
        let psi = SparseState::basis(cfg);
        let a = apply(group, space, lhs, &psi)?;
        let b = apply(group, space, rhs, &psi)?;
        max = max.max(a.max_abs_diff(&b));
    }
    Ok(max)
}

/// Materialize an operator as a dense column-action matrix on a small space.
/// Entry (r, c) is `<basis_r| op |basis_c>`; row index is the basis position.
pub fn dense_matrix(
    group: &FiniteGroup,
    space: &EdgeSpace,
    op: &LinearOp,
) -> Result<Vec<Vec<Complex64>>, OpError> {
    let dim = group.order().checked_pow(space.len() as u32).expect("dense dim overflow");
    assert!(dim <= 4096, "dense matrix too large: dim {dim}");
    let basis = enumerate_basis(group, space);
    let pos: std::collections::HashMap<&GaugeConfig, usize> =
        basis.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let dim = basis.len();
    let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (c, cfg) in basis.iter().enumerate() {
        let out = apply(group, space, op, &SparseState::basis(cfg.clone()))?;
        for (cfg2, &amp) in out.terms() {
            let r = *pos.get(cfg2).expect("operator must stay inside the space");
            mat[r][c] += amp;
        }
    }
    Ok(mat)
}

pub fn dense_max_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let mut m = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            m = m.max((x - y).norm());
        }
    }
    m
}

pub fn dense_identity(dim: usize) -> Vec<Vec<Complex64>> {
    let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in mat.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    mat
}

pub fn dense_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let dim = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for r in 0..dim {
        for k in 0..dim {
            let v = a[r][k];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..dim {
                out[r][c] += v * b[k][c];
            }
        }
    }
    out
}

pub fn dense_dagger(a: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let dim = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for r in 0..dim {
        for c in 0..dim {
            out[c][r] = a[r][c].conj();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Independent oracle: the inductive definition of F, evaluated literally.
// ---------------------------------------------------------------------------

pub mod oracle {
    //! Literal recursion over the inductive ribbon-operator definition,
    //! kept independent of the closed-form kernel it checks.

    use super::*;

    /// Apply F^{h,g} to a state by recursive splitting:
    /// `F_rho = sum_k F^{h,k}_{tau_1} F^{kbar h k, kbar g}_{rest}`.
    pub fn ribbon_f_inductive(
        group: &FiniteGroup,
        space: &EdgeSpace,
        ribbon: &Ribbon,
        h: Elem,
        g: Elem,
        psi: &SparseState,
    ) -> Result<SparseState, OpError> {
        ribbon_f_split(group, space, ribbon, h, g, 1, psi)
    }

    /// Same, but splitting at a chosen point first (for split-invariance
    /// checks). Recursive calls always split off the first triangle.
    pub fn ribbon_f_split(
        group: &FiniteGroup,
        space: &EdgeSpace,
        ribbon: &Ribbon,
        h: Elem,
        g: Elem,
        split: usize,
        psi: &SparseState,
    ) -> Result<SparseState, OpError> {
        if ribbon.is_empty() {
            return Ok(if g == 0 { psi.clone() } else { SparseState::zero() });
        }
        if ribbon.len() == 1 {
            let tri = ribbon.triangles()[0];
            return match tri.kind {
                TriangleKind::Direct => {
                    let op = triangle_op(&tri, g, TriangleKind::Direct)?;
                    apply(group, space, &op, psi)
                }
                TriangleKind::Dual => {
                    if g != 0 {
                        Ok(SparseState::zero())
                    } else {
                        let op = triangle_op(&tri, h, TriangleKind::Dual)?;
                        apply(group, space, &op, psi)
                    }
                }
            };
        }
        let split = split.clamp(1, ribbon.len() - 1);
        let (r1, r2) = ribbon.split_at(split);
        let mut out = SparseState::zero();
        for k in group.elements() {
            let hk = group.conj(group.inv(k), h);
            let gk = group.mul(group.inv(k), g);
            let inner = ribbon_f_split(group, space, &r2, hk, gk, 1, psi)?;
            if inner.num_terms() == 0 {
                continue;
            }
            let outer = ribbon_f_split(group, space, &r1, h, k, 1, &inner)?;
            out.add_scaled(&outer, Complex64::new(1.0, 0.0));
        }
        out.prune();
        Ok(out)
    }
}
