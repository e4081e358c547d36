//! Finite-scale experiments: amplimorphism maps, charge detection, transport,
//! and the sweep procedure that herds constraint violations onto one site.
//!
//! The infinite-volume statements all have finite surrogates here: the ground
//! state is played by the trivial-sector patch state on a region strictly
//! larger than every operator support, and half-infinite ribbons are played
//! by ribbons reaching the boundary ring.

use num_complex::Complex64;

use crate::config::SparseState;

use crate::lab::Lab;
use crate::lattice::{faces_at, Face, Ribbon, Site, Triangle, Vertex};
use crate::ops::{self, LinearOp, OpError};
use crate::rep::Sector;
use crate::stringnet::{BoundaryCondition, EtaBasis, EtaLabel, NetError, Pack, PackLabel};

#[derive(Debug, thiserror::Error)]
pub enum AnyonError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("geometry precondition unmet: {0}")]
    Geometry(String),
    #[error("sweep found no nonzero candidate at {0:?}")]
    SweepDeadEnd(Vertex),
}

/// The trivial-sector patch state: the finite-volume stand-in for the ground
/// state. It is the uniform superposition over all flat configurations with
/// the given boundary condition.
pub fn ground_patch(lab: &Lab, boundary: &BoundaryCondition) -> Result<SparseState, AnyonError> {
    let trivial = lab.qd.trivial_sector();
    let nc = lab.qd.class(trivial).centralizer.order();
    let w = Complex64::new((1.0 / nc as f64).sqrt(), 0.0);
    let mut psi = SparseState::zero();
    for m in 0..nc {
        let pack = Pack::build(
            lab,
            PackLabel { class: trivial.class, i: 0, boundary: boundary.clone(), m },
        )?;
        psi.add_scaled(&pack.eta_state(lab), w);
    }
    Ok(psi)
}

/// The amplimorphism component mu_rho^{RC;u1 u2}(O) as an operator:
/// (|N_C|/dim R)^2 sum_v F^{RC;u1 v}* O F^{RC;u2 v}.
pub fn mu_op(
    lab: &Lab,
    ribbon: &Ribbon,
    sector: Sector,
    u1: (usize, usize),
    u2: (usize, usize),
    o: &LinearOp,
) -> Result<LinearOp, AnyonError> {
    let class = lab.qd.class(sector);
    let irrep = lab.qd.irrep(sector);
    let w = (class.centralizer.order() as f64 / irrep.dim as f64).powi(2);
    let mut terms = Vec::new();
    for v in lab.qd.labels_u(sector) {
        let f1 = ops::ribbon_f_rc(&lab.qd, ribbon, sector, u1, v)?;
        let f2 = ops::ribbon_f_rc(&lab.qd, ribbon, sector, u2, v)?;
        terms.push(ops::prod(vec![lab.adjoint(&f1), o.clone(), f2]));
    }
    Ok(ops::scaled_re(w, ops::sum(terms)))
}

/// The map t_rho^{RC;uv}(O) behind the cyclicity argument:
/// (|N_C|/dim R)^2 sum_{w,z} F^{RC;uw} O (F^{RC;zw})* A^{RC;zv} D^{RC;v}.
///
/// The squared prefactor is the inverse of the sector ribbon weight: chasing
/// the collapse identities through chi(t(O)) on the patch leaves exactly one
/// net factor (dim R/|N_C|)^2, so this choice makes the delta-delta identity
/// come out with unit coefficient.
pub fn t_op(
    lab: &Lab,
    ribbon: &Ribbon,
    sector: Sector,
    u: (usize, usize),
    v: (usize, usize),
    o: &LinearOp,
) -> Result<LinearOp, AnyonError> {
    let class = lab.qd.class(sector);
    let irrep = lab.qd.irrep(sector);
    let s0 = lab.region.origin;
    let w_coef = (class.centralizer.order() as f64 / irrep.dim as f64).powi(2);
    let d_v = ops::wigner_rcu(&lab.qd, s0, sector, v);
    let mut terms = Vec::new();
    for w in lab.qd.labels_u(sector) {
        for z in lab.qd.labels_u(sector) {
            let f_uw = ops::ribbon_f_rc(&lab.qd, ribbon, sector, u, w)?;
            let f_zw = ops::ribbon_f_rc(&lab.qd, ribbon, sector, z, w)?;
            let a_zv = ops::label_changer(&lab.qd, s0, sector, z, v);
            terms.push(ops::prod(vec![
                f_uw,
                o.clone(),
                lab.adjoint(&f_zw),
                a_zv,
                d_v.clone(),
            ]));
        }
    }
    Ok(ops::scaled_re(w_coef, ops::sum(terms)))
}

/// The transport operator from the proof that all states of one sector are
/// equivalent: T = (|N_C|/dim R) sum_w (A_{s'}^{RC;w u'})* (F_{rho1}^{RC;u w})*.
pub fn transport_op(
    lab: &Lab,
    rho1: &Ribbon,
    s_prime: Site,
    sector: Sector,
    u: (usize, usize),
    u_prime: (usize, usize),
) -> Result<LinearOp, AnyonError> {
    let class = lab.qd.class(sector);
    let irrep = lab.qd.irrep(sector);
    let w_coef = class.centralizer.order() as f64 / irrep.dim as f64;
    let mut terms = Vec::new();
    for w in lab.qd.labels_u(sector) {
        let a = ops::label_changer(&lab.qd, s_prime, sector, w, u_prime);
        let f = ops::ribbon_f_rc(&lab.qd, rho1, sector, u, w)?;
        terms.push(ops::prod(vec![lab.adjoint(&a), lab.adjoint(&f)]));
    }
    Ok(ops::scaled_re(w_coef, ops::sum(terms)))
}

/// Expectation in a normalized state.
pub fn expectation(lab: &Lab, op: &LinearOp, psi: &SparseState) -> Result<Complex64, AnyonError> {
    let out = lab.apply(op, psi)?;
    Ok(psi.inner(&out))
}

/// `omega_n^{RC;u}(O)`: the expectation of O in the eta state of the next
/// larger region, checked to be independent of the boundary label v across
/// the supplied labels. Returns (value, max deviation across v, max
/// off-diagonal norm in v).
pub fn restricted_expectation(
    lab: &Lab,
    basis: &EtaBasis,
    sector: Sector,
    u: (usize, usize),
    v_labels: &[(usize, usize)],
    op: &LinearOp,
) -> Result<(Complex64, f64, f64), AnyonError> {
    assert!(!v_labels.is_empty());
    let states: Vec<SparseState> = v_labels
        .iter()
        .map(|&v| basis.eta_uv_state(lab, &EtaLabel { sector, u, v }))
        .collect::<Result<_, _>>()?;
    let mut diag = Vec::with_capacity(states.len());
    let mut max_off = 0.0f64;
    for (r, sr) in states.iter().enumerate() {
        let op_sr = lab.apply(op, sr)?;
        for (c, sc) in states.iter().enumerate() {
            let val = sc.inner(&op_sr);
            if r == c {
                diag.push(val);
            } else {
                max_off = max_off.max(val.norm());
            }
        }
    }
    let value = diag[0];
    let max_dev = diag.iter().map(|x| (x - value).norm()).fold(0.0, f64::max);
    Ok((value, max_dev, max_off))
}

// ---------------------------------------------------------------------------
// Ribbons between sites.
// ---------------------------------------------------------------------------

/// Decompose a displacement into at most two unit-step runs spanning one
/// sextant, so connector rotations never collide with path edges.
fn two_segment_steps(delta: (i32, i32)) -> Vec<(i32, i32)> {
    let (a, b) = delta;
    let mut steps = Vec::new();
    let push = |steps: &mut Vec<(i32, i32)>, d: (i32, i32), k: i32| {
        for _ in 0..k {
            steps.push(d);
        }
    };
    if a >= 0 && b >= 0 {
        push(&mut steps, (1, 0), a);
        push(&mut steps, (0, 1), b);
    } else if a <= 0 && b <= 0 {
        push(&mut steps, (-1, 0), -a);
        push(&mut steps, (0, -1), -b);
    } else if a > 0 {
        // a > 0, b < 0: mix of SE and one of E/S.
        let k = a.min(-b);
        push(&mut steps, (1, -1), k);
        push(&mut steps, (1, 0), a - k);
        push(&mut steps, (0, -1), -b - k);
    } else {
        let k = (-a).min(b);
        push(&mut steps, (-1, 1), k);
        push(&mut steps, (-1, 0), -a - k);
        push(&mut steps, (0, 1), b - k);
    }
    steps
}

/// The face left of an oriented step out of `w`.
fn left_face_of_step(w: Vertex, step: (i32, i32)) -> Face {
    let oe = crate::lattice::OrientedEdge { from: w, to: w.add(step) };
    let (e, fwd) = oe.canonical();
    if fwd {
        e.left_face()
    } else {
        e.right_face()
    }
}

/// Dual triangles rotating clockwise at `w` from `from` to `to`.
fn cw_connector(w: Vertex, from: Face, to: Face) -> Vec<Triangle> {
    let fs = faces_at(w);
    let pos = |f: Face| fs.iter().position(|&x| x == f).expect("face at vertex");
    let mut cur = pos(from);
    let target = pos(to);
    let mut out = Vec::new();
    while cur != target {
        let next = (cur + 5) % 6;
        out.push(
            Triangle::dual(
                Site::new(w, fs[cur]).unwrap(),
                Site::new(w, fs[next]).unwrap(),
            )
            .unwrap(),
        );
        cur = next;
    }
    out
}

/// A positive ribbon from a site to a target vertex (ending with a direct
/// triangle into the target) or further to a target face at that vertex.
pub fn ribbon_to(
    from: Site,
    to_vertex: Vertex,
    to_face: Option<Face>,
) -> Result<Ribbon, AnyonError> {
    let delta = (to_vertex.n1 - from.vertex.n1, to_vertex.n2 - from.vertex.n2);
    let steps = two_segment_steps(delta);
    let mut tris: Vec<Triangle> = Vec::new();
    let mut at = from.vertex;
    let mut face = from.face;
    for step in steps {
        let f = left_face_of_step(at, step);
        tris.extend(cw_connector(at, face, f));
        let next = at.add(step);
        tris.push(
            Triangle::direct(Site::new(at, f).unwrap(), Site::new(next, f).unwrap()).unwrap(),
        );
        at = next;
        face = f;
    }
    if let Some(f) = to_face {
        tris.extend(cw_connector(at, face, f));
    }
    if tris.is_empty() {
        return Err(AnyonError::Geometry("empty ribbon between coincident sites".into()));
    }
    Ribbon::new(tris).map_err(|e| AnyonError::Geometry(e.to_string()))
}

// ---------------------------------------------------------------------------
// Charge detection.
// ---------------------------------------------------------------------------

/// Detection matrix entry for one state label against one detector sector.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DetectionEntry {
    pub state_sector: String,
    pub detector_sector: String,
    pub value_re: f64,
    pub value_im: f64,
    pub expected: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DetectionReport {
    pub entries: Vec<DetectionEntry>,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Expectation of every charge detector K_{beta_n}^{R'C'} in one eta state
/// per sector: the matrix must be the identity pattern.
///
/// Uses the orbit-membership route, so it scales to regions whose packs are
/// far beyond enumeration.
pub fn detection_matrix(
    lab: &Lab,
    basis: &EtaBasis,
    tolerance: f64,
) -> Result<DetectionReport, AnyonError> {
    let sectors = lab.qd.sectors();
    let mut entries = Vec::new();
    let mut max_dev = 0.0f64;
    for &s in &sectors {
        let compat = basis.family.compatible_with(lab, s.class);
        if compat.is_empty() {
            return Err(AnyonError::Geometry(format!(
                "boundary family has no member compatible with class {}",
                s.class
            )));
        }
        let label = EtaLabel { sector: s, u: (0, 0), v: (compat[0], 0) };
        for &d in &sectors {
            let k = ops::charge_detector(&lab.qd, &lab.region.boundary_ribbon, d)?;
            let val = basis.matrix_element_orbit(lab, &k, &label, &label)?;
            let expected = if s == d { 1.0 } else { 0.0 };
            let dev = (val - expected).norm();
            max_dev = max_dev.max(dev);
            entries.push(DetectionEntry {
                state_sector: lab.qd.sector_name(s),
                detector_sector: lab.qd.sector_name(d),
                value_re: val.re,
                value_im: val.im,
                expected,
                pass: dev <= tolerance,
            });
        }
    }
    Ok(DetectionReport { entries, tolerance, max_deviation: max_dev, pass: max_dev <= tolerance })
}

// ---------------------------------------------------------------------------
// Sweeping violations onto one site.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepStep {
    pub kind: String,
    pub location: String,
    pub chosen_element: usize,
    pub candidate_norm: f64,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub state: SparseState,
    pub steps: Vec<SweepStep>,
}

/// For a projector P and a unit vector, `|| P psi - psi ||^2 = 1 - <P>`:
/// a site is violated exactly when its constraint expectation falls short
/// of one.
fn projector_deficit(lab: &Lab, op: &LinearOp, psi: &SparseState) -> Result<f64, AnyonError> {
    let val = ops::expectation_value(lab.group(), &lab.space, op, psi)?;
    Ok(1.0 - val.re)
}

fn gauge_deficit(lab: &Lab, psi: &SparseState, w: Vertex) -> Result<f64, AnyonError> {
    let s = Site::new(w, faces_at(w)[0]).unwrap();
    projector_deficit(lab, &ops::a_vertex_proj(lab.group(), s), psi)
}

fn flux_deficit(lab: &Lab, psi: &SparseState, f: Face) -> Result<f64, AnyonError> {
    let s = Site::new(f.vertices()[0], f).unwrap();
    projector_deficit(lab, &ops::b_face_proj(s), psi)
}

/// Vertices of the region whose gauge constraint the state violates, and
/// faces whose flux constraint it violates (excluding the target site).
pub fn find_violations(
    lab: &Lab,
    psi: &SparseState,
    exclude: Site,
    tol: f64,
) -> Result<(Vec<Vertex>, Vec<Face>), AnyonError> {
    let mut bad_v = Vec::new();
    for &w in &lab.region.vertices {
        if w != exclude.vertex && gauge_deficit(lab, psi, w)? > tol {
            bad_v.push(w);
        }
    }
    let mut bad_f = Vec::new();
    for &f in &lab.region.faces {
        if f != exclude.face && flux_deficit(lab, psi, f)? > tol {
            bad_f.push(f);
        }
    }
    Ok((bad_v, bad_f))
}

/// Move every constraint violation of `psi` onto the site `s_star`, one
/// sweep identity at a time: gauge violations via |G| sum_g T^g A_v T^g = 1,
/// flux violations via sum_h L^{hbar} B_f L^h = 1.
///
/// Each removal provably introduces no new violations, so after the initial
/// full scan only the remaining list is rechecked; a final full scan
/// certifies the outcome.
pub fn sweep(lab: &Lab, psi: &SparseState, s_star: Site) -> Result<SweepOutcome, AnyonError> {
    let g = lab.group();
    let tol = 1e-9;
    let mut state = psi.normalized();
    let mut steps = Vec::new();
    let (mut bad_v, mut bad_f) = find_violations(lab, &state, s_star, tol)?;
    while !bad_v.is_empty() || !bad_f.is_empty() {
        if let Some(f) = bad_f.pop() {
            // Pick the face vertex closest to the star site as the ribbon end.
            let end_v =
                *f.vertices().iter().min_by_key(|w| s_star.vertex.dist(**w)).unwrap();
            let rho = ribbon_to(s_star, end_v, Some(f))?;
            if !lab.region.supports_ribbon(&rho) {
                return Err(AnyonError::Geometry("sweep ribbon escapes the region".into()));
            }
            let anchor = Site::new(f.vertices()[0], f).unwrap();
            let bf = ops::b_face_proj(anchor);
            let mut best: Option<(usize, f64, SparseState)> = None;
            for h in g.elements() {
                let cand =
                    lab.apply(&ops::prod(vec![bf.clone(), ops::ribbon_l(g, &rho, h)]), &state)?;
                let n = cand.norm();
                if best.as_ref().map_or(true, |(_, bn, _)| n > *bn) {
                    best = Some((h, n, cand));
                }
            }
            let (h, n, cand) = best.expect("nonempty group");
            if n < tol {
                return Err(AnyonError::SweepDeadEnd(end_v));
            }
            steps.push(SweepStep {
                kind: "face".into(),
                location: format!("{f:?}"),
                chosen_element: h,
                candidate_norm: n,
            });
            state = cand.normalized();
        } else {
            let w = bad_v.pop().expect("nonempty by loop condition");
            let rho = ribbon_to(s_star, w, None)?;
            if !lab.region.supports_ribbon(&rho) {
                return Err(AnyonError::Geometry("sweep ribbon escapes the region".into()));
            }
            let s_w = Site::new(w, faces_at(w)[0]).unwrap();
            let av = ops::a_vertex_proj(g, s_w);
            let mut best: Option<(usize, f64, SparseState)> = None;
            for x in g.elements() {
                let cand =
                    lab.apply(&ops::prod(vec![av.clone(), ops::ribbon_t(&rho, x)]), &state)?;
                let n = cand.norm();
                if best.as_ref().map_or(true, |(_, bn, _)| n > *bn) {
                    best = Some((x, n, cand));
                }
            }
            let (x, n, cand) = best.expect("nonempty group");
            if n < tol {
                return Err(AnyonError::SweepDeadEnd(w));
            }
            steps.push(SweepStep {
                kind: "vertex".into(),
                location: format!("{w:?}"),
                chosen_element: x,
                candidate_norm: n,
            });
            state = cand.normalized();
        }
        // Re-examine only the outstanding sites; removals never add new ones.
        let mut still_v = Vec::new();
        for w in bad_v {
            if gauge_deficit(lab, &state, w)? > tol {
                still_v.push(w);
            }
        }
        bad_v = still_v;
        let mut still_f = Vec::new();
        for f in bad_f {
            if flux_deficit(lab, &state, f)? > tol {
                still_f.push(f);
            }
        }
        bad_f = still_f;
    }
    let (bv, bf) = find_violations(lab, &state, s_star, tol)?;
    if !bv.is_empty() || !bf.is_empty() {
        return Err(AnyonError::Geometry(format!(
            "sweep left violations behind: {bv:?} {bf:?}"
        )));
    }
    Ok(SweepOutcome { state, steps })
}

/// Sector weights of a constrained state: lambda_RC = <psi| D^{RC} |psi>.
pub fn sector_weights(lab: &Lab, psi: &SparseState) -> Result<Vec<(Sector, f64)>, AnyonError> {
    let mut out = Vec::new();
    for sector in lab.qd.sectors() {
        let d = ops::wigner_rc(&lab.qd, lab.region.origin, sector);
        let val = expectation(lab, &d, psi)?;
        out.push((sector, val.re));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Amplimorphism experiment drivers.
// ---------------------------------------------------------------------------

use crate::report::Check;

fn op_eq_check(
    lab: &Lab,
    name: &str,
    lhs: &LinearOp,
    rhs: &LinearOp,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<Check, AnyonError> {
    let mut edges = lhs.support();
    edges.extend(rhs.support());
    let space = if edges.is_empty() {
        crate::config::EdgeSpace::new(lab.region.edges[..1].to_vec())
    } else {
        crate::config::EdgeSpace::new(edges.into_iter().collect())
    };
    let d = ops::op_basis_diff(lab.group(), &space, lhs, rhs, samples, seed)?;
    Ok(Check::new(name, d, tol))
}

/// The five structural properties of the maps mu at finite truncation:
/// extension stability for local observables, unit preservation, locality,
/// multiplicativity, and the adjoint rule.
pub fn ampli_properties_report(
    lab: &Lab,
    sector: Sector,
    tol: f64,
    samples: usize,
) -> Result<Vec<Check>, AnyonError> {
    let labels = lab.qd.labels_u(sector);
    let rho = &lab.region.fiducial;
    let prefix_len = rho.len() - 2;
    let (rho_short, _) = rho.split_at(prefix_len);
    let u1 = labels[0];
    let u2 = labels[labels.len() - 1];
    let mut checks = Vec::new();

    // Item 1: stability under ribbon extension for an observable near the
    // origin, away from the extension's support.
    let near = ops::prod(vec![
        LinearOp::EdgeL { edge: crate::lattice::edges_at(lab.region.origin.vertex)[3], h: 1 },
        LinearOp::EdgeT { edge: crate::lattice::edges_at(lab.region.origin.vertex)[4], g: 0 },
    ]);
    checks.push(op_eq_check(
        lab,
        "mu stability under ribbon extension",
        &mu_op(lab, &rho_short, sector, u1, u2, &near)?,
        &mu_op(lab, rho, sector, u1, u2, &near)?,
        tol,
        samples,
        151,
    )?);

    // Item 2: mu(1) = delta * 1.
    for &ua in &[u1, u2] {
        for &ub in &[u1, u2] {
            let rhs = if ua == ub { LinearOp::Identity } else { LinearOp::Zero };
            checks.push(op_eq_check(
                lab,
                &format!("mu({ua:?},{ub:?}) preserves the unit"),
                &mu_op(lab, rho, sector, ua, ub, &LinearOp::Identity)?,
                &rhs,
                tol,
                samples,
                153,
            )?);
        }
    }

    // Item 3: mu acts trivially on observables disjoint from the ribbon.
    let rho_edges = rho.support();
    let far_edge = *lab
        .region
        .edges
        .iter()
        .find(|e| {
            !rho_edges.contains(e)
                && e.from_vertex().n2 < -1
                && !rho_edges.iter().any(|re| re == *e)
        })
        .expect("region has edges away from the fiducial ribbon");
    let far = LinearOp::EdgeL { edge: far_edge, h: 1 };
    checks.push(op_eq_check(
        lab,
        "mu is local: disjoint observables pass through",
        &mu_op(lab, rho, sector, u1, u1, &far)?,
        &far,
        tol,
        samples,
        157,
    )?);
    checks.push(op_eq_check(
        lab,
        "mu is local: off-diagonal labels annihilate disjoint observables",
        &mu_op(lab, rho, sector, u1, u2, &far)?,
        &if u1 == u2 { far.clone() } else { LinearOp::Zero },
        tol,
        samples,
        159,
    )?);

    // Item 4: multiplicativity through the internal label sum.
    let o1 = ops::prod(vec![near.clone(), far.clone()]);
    let o2 = LinearOp::EdgeT { edge: rho_edges[1], g: 0 };
    let lhs = mu_op(lab, rho, sector, u1, u2, &ops::prod(vec![o1.clone(), o2.clone()]))?;
    let rhs = ops::sum(
        labels
            .iter()
            .map(|&u3| {
                Ok(ops::prod(vec![
                    mu_op(lab, rho, sector, u1, u3, &o1)?,
                    mu_op(lab, rho, sector, u3, u2, &o2)?,
                ]))
            })
            .collect::<Result<Vec<_>, AnyonError>>()?,
    );
    checks.push(op_eq_check(lab, "mu is multiplicative", &lhs, &rhs, tol, samples, 163)?);

    // Item 5: the adjoint rule.
    checks.push(op_eq_check(
        lab,
        "mu adjoint rule",
        &lab.adjoint(&mu_op(lab, rho, sector, u1, u2, &near)?),
        &mu_op(lab, rho, sector, u2, u1, &lab.adjoint(&near))?,
        tol,
        samples,
        167,
    )?);
    Ok(checks)
}

/// The lemmas about how sector ribbon operators act on the ground patch:
/// label changing, label projection, and constraint preservation.
pub fn ground_action_report(
    lab: &Lab,
    omega: &SparseState,
    sector: Sector,
    tol: f64,
) -> Result<Vec<Check>, AnyonError> {
    let labels = lab.qd.labels_u(sector);
    let rho = &lab.region.fiducial;
    let s0 = lab.region.origin;
    let mut checks = Vec::new();
    let u1 = labels[0];
    let u2 = labels[labels.len() - 1];
    let v = labels[labels.len() / 2];

    // Changing the ribbon label at the origin.
    let f_u1 = ops::ribbon_f_rc(&lab.qd, rho, sector, u1, v)?;
    let f_u2 = ops::ribbon_f_rc(&lab.qd, rho, sector, u2, v)?;
    let a21 = ops::label_changer(&lab.qd, s0, sector, u2, u1);
    let lhs = lab.apply(&a21, &lab.apply(&f_u1, omega)?)?;
    let rhs = lab.apply(&f_u2, omega)?;
    checks.push(Check::new(
        "origin label changer rewrites ribbon labels on the patch",
        lhs.max_abs_diff(&rhs),
        tol,
    ));

    // The Wigner sub-projector filters the ribbon label.
    for &up in &[u1, u2] {
        let d = ops::wigner_rcu(&lab.qd, s0, sector, up);
        let lhs = lab.apply(&d, &lab.apply(&f_u2, omega)?)?;
        let rhs = if up == u2 { lab.apply(&f_u2, omega)? } else { SparseState::zero() };
        checks.push(Check::new(
            format!("Wigner sub-projector {up:?} filters ribbon label {u2:?}"),
            lhs.max_abs_diff(&rhs),
            tol,
        ));
    }

    // The Wigner projectors annihilate the patch except in the trivial sector.
    let triv = lab.qd.trivial_sector();
    let d = ops::wigner_rc(&lab.qd, s0, sector);
    let projected = lab.apply(&d, omega)?;
    let expect = if sector == triv { omega.clone() } else { SparseState::zero() };
    checks.push(Check::new(
        "Wigner projector on the patch is the trivial-sector filter",
        projected.max_abs_diff(&expect),
        tol,
    ));
    Ok(checks)
}

/// The finite analogues of the amplimorphism composition lemmas on the
/// ground patch: changing and projecting the internal label inside chi.
pub fn chi_action_report(
    lab: &Lab,
    omega: &SparseState,
    sector: Sector,
    o: &LinearOp,
    tol: f64,
) -> Result<Vec<Check>, AnyonError> {
    let labels = lab.qd.labels_u(sector);
    let rho = &lab.region.fiducial;
    let s0 = lab.region.origin;
    let mut checks = Vec::new();
    let u1 = labels[0];
    let u2 = labels[labels.len() - 1];
    let u3 = labels[labels.len() / 2];

    // chi^{u1 u2}(O A^{u3 u2}) = chi^{u1 u3}(O) on the patch.
    let a32 = ops::label_changer(&lab.qd, s0, sector, u3, u2);
    let lhs = lab.apply(
        &mu_op(lab, rho, sector, u1, u2, &ops::prod(vec![o.clone(), a32]))?,
        omega,
    )?;
    let rhs = lab.apply(&mu_op(lab, rho, sector, u1, u3, o)?, omega)?;
    checks.push(Check::new(
        "chi absorbs origin label changers",
        lhs.max_abs_diff(&rhs),
        tol,
    ));

    // chi^{u2 u1}(O D^{u3}) = delta_{u1 u3} chi^{u2 u1}(O) on the patch.
    for &u3b in &[u1, u3] {
        let d3 = ops::wigner_rcu(&lab.qd, s0, sector, u3b);
        let lhs = lab.apply(
            &mu_op(lab, rho, sector, u2, u1, &ops::prod(vec![o.clone(), d3]))?,
            omega,
        )?;
        let rhs = if u3b == u1 {
            lab.apply(&mu_op(lab, rho, sector, u2, u1, o)?, omega)?
        } else {
            SparseState::zero()
        };
        checks.push(Check::new(
            format!("chi filters the Wigner sub-projector {u3b:?}"),
            lhs.max_abs_diff(&rhs),
            tol,
        ));
    }

    // chi^{uu} of bulk constraints fixes the patch (margins: interior
    // vertices and faces away from both ribbon endpoints).
    let v_mid = crate::lattice::v(0, 1).add((lab.region.origin.vertex.n1, 0));
    let s_mid = Site::new(v_mid, faces_at(v_mid)[0]).unwrap();
    let av = ops::a_vertex_proj(lab.group(), s_mid);
    let lhs = lab.apply(&mu_op(lab, rho, sector, u1, u1, &av)?, omega)?;
    checks.push(Check::new(
        "chi of an interior gauge projector fixes the patch",
        lhs.max_abs_diff(omega),
        tol,
    ));
    let f_mid = Face::down(crate::lattice::v(-1, 0));
    let s_f = Site::new(f_mid.vertices()[0], f_mid).unwrap();
    let bf = ops::b_face_proj(s_f);
    let lhs = lab.apply(&mu_op(lab, rho, sector, u1, u1, &bf)?, omega)?;
    checks.push(Check::new(
        "chi of an interior flux projector fixes the patch",
        lhs.max_abs_diff(omega),
        tol,
    ));
    Ok(checks)
}

/// The remarkable delta-delta property of the maps t: composing them through
/// chi reproduces the observable on the patch exactly when all labels match.
pub fn magic_report(
    lab: &Lab,
    omega: &SparseState,
    sector: Sector,
    o: &LinearOp,
    tol: f64,
) -> Result<Vec<Check>, AnyonError> {
    let labels = lab.qd.labels_u(sector);
    let rho = &lab.region.fiducial;
    let prefix_len = rho.len().saturating_sub(3).max(1);
    let (rho_k, tail) = rho.split_at(prefix_len);
    // The observable must avoid the ribbon tail.
    let tail_support: Vec<_> = tail.support();
    for e in o.support() {
        if tail_support.contains(&e) {
            return Err(AnyonError::Geometry(
                "observable support reaches the ribbon tail".into(),
            ));
        }
    }
    let mut checks = Vec::new();
    let o_omega = lab.apply(o, omega)?;
    for &u1 in labels.iter().take(2) {
        for &u2 in labels.iter().take(2) {
            for &v1 in labels.iter().take(2) {
                for &v2 in labels.iter().take(2) {
                    let t = t_op(lab, &rho_k, sector, u2, v2, o)?;
                    let chi_t = mu_op(lab, rho, sector, u1, v1, &t)?;
                    let lhs = lab.apply(&chi_t, omega)?;
                    let rhs = if u1 == u2 && v1 == v2 {
                        o_omega.clone()
                    } else {
                        SparseState::zero()
                    };
                    checks.push(Check::new(
                        format!("t-map delta pattern ({u1:?},{v1:?}) vs ({u2:?},{v2:?})"),
                        lhs.max_abs_diff(&rhs),
                        tol,
                    ));
                }
            }
        }
    }
    Ok(checks)
}

/// Consistency of the two routes to the excited-state expectation: through
/// the amplimorphism on the patch, and directly in the eta state.
pub fn state_consistency_check(
    lab: &Lab,
    basis: &EtaBasis,
    omega: &SparseState,
    sector: Sector,
    u: (usize, usize),
    o: &LinearOp,
    tol: f64,
) -> Result<Check, AnyonError> {
    let rho = &lab.region.fiducial;
    let lhs = expectation(lab, &mu_op(lab, rho, sector, u, u, o)?, omega)?;
    let compat = basis.family.compatible_with(lab, sector.class);
    let l = EtaLabel { sector, u, v: (compat[0], 0) };
    let eta = basis.eta_uv_state(lab, &l)?;
    let rhs = expectation(lab, o, &eta)?;
    Ok(Check::new(
        "amplimorphism route matches the eta-state expectation",
        (lhs - rhs).norm(),
        tol,
    ))
}

/// Transport: the local operator T carries one anyon state onto another.
pub fn transport_check(
    lab: &Lab,
    omega: &SparseState,
    sector: Sector,
    split: usize,
    o: &LinearOp,
    tol: f64,
) -> Result<Check, AnyonError> {
    let labels = lab.qd.labels_u(sector);
    let u = labels[0];
    let u_prime = labels[labels.len() - 1];
    let rho = &lab.region.fiducial;
    let (rho1, rho_tail) = rho.split_at(split);
    let s_prime = rho_tail.start().expect("nonempty tail");
    let t = transport_op(lab, &rho1, s_prime, sector, u, u_prime)?;
    // The state anchored at the origin evaluates O exactly as the state
    // anchored at s' evaluates the transported observable T O T*.
    let lhs = expectation(lab, &mu_op(lab, rho, sector, u, u, o)?, omega)?;
    let sandwich = ops::prod(vec![t.clone(), o.clone(), lab.adjoint(&t)]);
    let rhs = expectation(lab, &mu_op(lab, &rho_tail, sector, u_prime, u_prime, &sandwich)?, omega)?;
    Ok(Check::new("anyon transport preserves expectations", (lhs - rhs).norm(), tol))
}
