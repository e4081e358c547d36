//! State-level identities: how the operator families act on the constrained
//! eta bases — Wigner sub-projectors as label filters, label changers as
//! label shifts, the inverse irrep rotation, and the diagonal action of the
//! charge detectors.

use num_complex::Complex64;
use qdlab_core::anyon;
use qdlab_core::group::FiniteGroup;
use qdlab_core::ops::{self, LinearOp};
use qdlab_core::rep::Sector;
use qdlab_core::stringnet::{
    boundary_label_changer, BoundaryFamily, EtaBasis, EtaLabel, Pack, PackLabel,
};
use qdlab_core::Lab;

const TOL: f64 = 1e-10;

fn z2(n: usize) -> (Lab, EtaBasis) {
    let lab = Lab::canonical(FiniteGroup::cyclic(2), n).unwrap();
    let fam = BoundaryFamily::generate(&lab, 8, 101);
    (lab, EtaBasis::new(fam))
}

fn s3(n: usize) -> (Lab, EtaBasis) {
    let lab = Lab::canonical(FiniteGroup::symmetric_3(), n).unwrap();
    let fam = BoundaryFamily::generate(&lab, 8, 103);
    (lab, EtaBasis::new(fam))
}

/// Components of `op |eta(l)>` against the full pack family over the same
/// boundary condition, through the membership route. Returns the vector of
/// `<eta^{C;i b}(m)| op |eta(l)>` indexed by (i, m).
fn components_after(
    lab: &Lab,
    basis: &EtaBasis,
    op: &LinearOp,
    l: &EtaLabel,
) -> Vec<((usize, usize), Complex64)> {
    let class = lab.qd.class(l.sector);
    let nc = class.centralizer.order();
    let coeffs = basis.uv_coefficients(lab, l);
    let mut out = Vec::new();
    for i in 0..class.size() {
        for m in 0..nc {
            let bra = Pack::build(
                lab,
                PackLabel {
                    class: l.sector.class,
                    i,
                    boundary: basis.family.members[l.v.0].clone(),
                    m,
                },
            )
            .unwrap();
            let mut total = Complex64::new(0.0, 0.0);
            for (m2, &a2) in coeffs.iter().enumerate() {
                if a2.norm() < 1e-15 {
                    continue;
                }
                let ket = basis.pack(lab, l.sector, l.u.0, l.v.0, m2).unwrap();
                total += a2
                    * qdlab_core::stringnet::orbit_matrix_element(lab, op, &bra.seed, &ket.seed)
                        .unwrap();
            }
            out.push(((i, m), total));
        }
    }
    out
}

#[test]
fn bulk_gauge_invariance_of_eta() {
    let (lab, basis) = s3(1);
    let sector = Sector { class: 1, irrep: 0 };
    let compat = basis.family.compatible_with(&lab, 1);
    let l = EtaLabel { sector, u: (1, 0), v: (compat[0], 0) };
    let psi = basis.eta_uv_state(&lab, &l).unwrap();
    for &w in lab.region.interior_vertices.iter().take(4) {
        let s = qdlab_core::lattice::Site::new(w, qdlab_core::lattice::faces_at(w)[0]).unwrap();
        let av = ops::a_vertex_proj(lab.group(), s);
        let out = lab.apply(&av, &psi).unwrap();
        assert!(out.max_abs_diff(&psi) < TOL, "gauge projector moved eta at {w:?}");
    }
}

#[test]
fn centralizer_left_action_on_eta_m() {
    // A_{s0}^{q_i m1 qbar_i} maps eta(m2) to eta(m1 m2).
    for (lab, basis) in [z2(1), s3(1)] {
        let g = lab.group();
        for class_idx in 0..lab.qd.classes.len() {
            let class = &lab.qd.classes[class_idx];
            let compat = basis.family.compatible_with(&lab, class_idx);
            let bid = compat[0];
            let i = class.size() - 1;
            let q = class.iterators[i];
            for m1 in 0..class.centralizer.order().min(3) {
                for m2 in 0..class.centralizer.order().min(3) {
                    let h = g.conj(q, class.centralizer.to_parent(m1));
                    let a = ops::a_site(lab.region.origin, h);
                    let src = basis
                        .pack(&lab, Sector { class: class_idx, irrep: 0 }, i, bid, m2)
                        .unwrap();
                    let m12 = class.centralizer.as_group().mul(m1, m2);
                    let dst = basis
                        .pack(&lab, Sector { class: class_idx, irrep: 0 }, i, bid, m12)
                        .unwrap();
                    // As uniform orbit states: A |eta(m2)> = |eta(m1 m2)>,
                    // checked by mapping the seed and testing membership.
                    let moved = lab
                        .apply(&a, &qdlab_core::SparseState::basis(src.seed.clone()))
                        .unwrap();
                    assert_eq!(moved.num_terms(), 1);
                    let (cfg, &amp) = moved.terms().next().unwrap();
                    assert!((amp - Complex64::new(1.0, 0.0)).norm() < 1e-15);
                    assert!(
                        qdlab_core::stringnet::orbit_contains(&lab, &dst.seed, cfg),
                        "left action misses target pack (class {class_idx}, m1 {m1}, m2 {m2})"
                    );
                }
            }
        }
    }
}

#[test]
fn wigner_subprojector_filters_u_labels() {
    for (lab, basis) in [z2(1), s3(1)] {
        for sector in lab.qd.sectors() {
            let compat = basis.family.compatible_with(&lab, sector.class);
            let labels = lab.qd.labels_u(sector);
            let l2 = EtaLabel { sector, u: labels[labels.len() - 1], v: (compat[0], 0) };
            for &u1 in labels.iter() {
                let d = ops::wigner_rcu(&lab.qd, lab.region.origin, sector, u1);
                let got = basis.matrix_element_orbit(&lab, &d, &l2, &l2).unwrap();
                let want = if u1 == l2.u { 1.0 } else { 0.0 };
                assert!(
                    (got.re - want).abs() < TOL && got.im.abs() < TOL,
                    "sub-projector {u1:?} on {:?}: {got}",
                    l2.u
                );
            }
        }
    }
}

#[test]
fn wigner_projector_filters_sectors() {
    for (lab, basis) in [z2(1), s3(1)] {
        let sectors = lab.qd.sectors();
        for &s_state in &sectors {
            let compat = basis.family.compatible_with(&lab, s_state.class);
            let l = EtaLabel { sector: s_state, u: (0, 0), v: (compat[0], 0) };
            for &s_proj in &sectors {
                let d = ops::wigner_rc(&lab.qd, lab.region.origin, s_proj);
                let got = basis.matrix_element_orbit(&lab, &d, &l, &l).unwrap();
                let want = if s_proj == s_state { 1.0 } else { 0.0 };
                assert!(
                    (got.re - want).abs() < TOL && got.im.abs() < TOL,
                    "sector projector {s_proj:?} on {s_state:?}: {got}"
                );
            }
        }
    }
}

#[test]
fn site_label_changer_shifts_u() {
    // A^{RC;u2 u1} eta^{RC;u1 v} = eta^{RC;u2 v}, and its adjoint pulls back.
    for (lab, basis) in [z2(1), s3(1)] {
        for sector in lab.qd.sectors() {
            let labels = lab.qd.labels_u(sector);
            if labels.len() < 2 {
                continue;
            }
            let compat = basis.family.compatible_with(&lab, sector.class);
            let v0 = (compat[0], 0);
            let u1 = labels[0];
            let u2 = labels[labels.len() - 1];
            let a21 = ops::label_changer(&lab.qd, lab.region.origin, sector, u2, u1);
            let from = EtaLabel { sector, u: u1, v: v0 };
            let to = EtaLabel { sector, u: u2, v: v0 };
            // <eta(u2 v)| A^{u2 u1} |eta(u1 v)> = 1 plus unit norms pins the
            // state equality within the constrained space.
            let overlap = basis.matrix_element_orbit(&lab, &a21, &to, &from).unwrap();
            assert!(
                (overlap - Complex64::new(1.0, 0.0)).norm() < TOL,
                "label changer overlap {overlap} for {sector:?}"
            );
            // Norm of A |eta(u1 v)> via A*A.
            let norm_sq = basis
                .matrix_element_orbit(
                    &lab,
                    &ops::prod(vec![lab.adjoint(&a21), a21.clone()]),
                    &from,
                    &from,
                )
                .unwrap();
            assert!(
                (norm_sq - Complex64::new(1.0, 0.0)).norm() < TOL,
                "label changer image norm {norm_sq}"
            );
            // Adjoint direction.
            let back = basis.matrix_element_orbit(&lab, &lab.adjoint(&a21), &from, &to).unwrap();
            assert!((back - Complex64::new(1.0, 0.0)).norm() < TOL);
        }
    }
}

#[test]
fn boundary_label_changer_shifts_v() {
    // The boundary label changer moves eta^{RC;u v1} to eta^{RC;u v2} without
    // touching u; verified for n = 2 where the inner region is nonempty.
    for (lab, basis) in [z2(2), s3(2)] {
        for sector in lab.qd.sectors().into_iter().take(4) {
            let compat = basis.family.compatible_with(&lab, sector.class);
            if compat.len() < 2 {
                continue;
            }
            let dim = lab.qd.irrep(sector).dim;
            let u = (0, 0);
            let v1 = (compat[0], 0);
            let v2 = (compat[1], dim - 1);
            let from = EtaLabel { sector, u, v: v1 };
            let to = EtaLabel { sector, u, v: v2 };
            let a = boundary_label_changer(&lab, &basis, sector, v2, v1).unwrap();
            let overlap = basis.matrix_element_orbit(&lab, &a, &to, &from).unwrap();
            assert!(
                (overlap - Complex64::new(1.0, 0.0)).norm() < TOL,
                "boundary label changer overlap {overlap} for {sector:?}"
            );
            let norm_sq = basis
                .matrix_element_orbit(
                    &lab,
                    &ops::prod(vec![lab.adjoint(&a), a.clone()]),
                    &from,
                    &from,
                )
                .unwrap();
            assert!(
                (norm_sq - Complex64::new(1.0, 0.0)).norm() < TOL,
                "boundary label changer image norm {norm_sq} for {sector:?}"
            );
            // Distinct target labels are reached orthogonally: the composite
            // (A^{v a})* A^{v' a} acts as delta_{v v'} on eta^{RC;u a}.
            let a2 = boundary_label_changer(&lab, &basis, sector, v2, v1).unwrap();
            let gram = basis
                .matrix_element_orbit(
                    &lab,
                    &ops::prod(vec![lab.adjoint(&a2), a.clone()]),
                    &from,
                    &from,
                )
                .unwrap();
            assert!((gram - Complex64::new(1.0, 0.0)).norm() < TOL);
        }
    }
}

#[test]
fn inverse_rotation_roundtrip() {
    // eta^{C;ib}(m) = sum_R sqrt(dim/|N|) sum_{j j'} R^{jj'}(m) eta^{RC;(i,j)(b,j')}.
    for (lab, basis) in [z2(1), s3(1)] {
        for class_idx in 0..lab.qd.classes.len() {
            let class = &lab.qd.classes[class_idx];
            let nc = class.centralizer.order();
            let compat = basis.family.compatible_with(&lab, class_idx);
            let bid = compat[0];
            let i = 0;
            for m in 0..nc {
                let direct = basis
                    .pack(&lab, Sector { class: class_idx, irrep: 0 }, i, bid, m)
                    .unwrap()
                    .eta_state(&lab);
                let mut rebuilt = qdlab_core::SparseState::zero();
                for (ri, irrep) in lab.qd.class_irreps[class_idx].iter().enumerate() {
                    let w = (irrep.dim as f64 / nc as f64).sqrt();
                    for j in 0..irrep.dim {
                        for jp in 0..irrep.dim {
                            let coeff = irrep.entry(m, j, jp) * w;
                            if coeff.norm() < 1e-15 {
                                continue;
                            }
                            let l = EtaLabel {
                                sector: Sector { class: class_idx, irrep: ri },
                                u: (i, j),
                                v: (bid, jp),
                            };
                            let st = basis.eta_uv_state(&lab, &l).unwrap();
                            rebuilt.add_scaled(&st, coeff);
                        }
                    }
                }
                rebuilt.prune();
                assert!(
                    rebuilt.max_abs_diff(&direct) < TOL,
                    "inverse rotation failed at class {class_idx}, m = {m}"
                );
            }
        }
    }
}

#[test]
fn detectors_act_diagonally_on_eta() {
    // K_{beta}^{R'C'} |eta^{RC;uv}> = delta_{RC,R'C'} |eta^{RC;uv}>:
    // checked componentwise against the pack family of the same boundary.
    for (lab, basis) in [z2(2), s3(2)] {
        let sectors = lab.qd.sectors();
        for &s_state in sectors.iter().take(4) {
            let compat = basis.family.compatible_with(&lab, s_state.class);
            let l = EtaLabel { sector: s_state, u: (0, 0), v: (compat[0], 0) };
            let own_coeffs = basis.uv_coefficients(&lab, &l);
            for &s_det in sectors.iter().take(4) {
                let k =
                    ops::charge_detector(&lab.qd, &lab.region.boundary_ribbon, s_det).unwrap();
                let comps = components_after(&lab, &basis, &k, &l);
                for ((i, m), got) in comps {
                    let want = if s_det == s_state && i == l.u.0 {
                        own_coeffs[m]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert!(
                        (got - want).norm() < TOL,
                        "detector {s_det:?} on {s_state:?} component (i={i}, m={m}): {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn eta_m_gram_rank_is_centralizer_order() {
    // The packs at fixed (C, i, b) span a space of dimension |N_C|.
    let (lab, basis) = s3(1);
    for class_idx in 0..lab.qd.classes.len() {
        let class = &lab.qd.classes[class_idx];
        let nc = class.centralizer.order();
        let compat = basis.family.compatible_with(&lab, class_idx);
        let mut gram = vec![vec![Complex64::new(0.0, 0.0); nc]; nc];
        for m1 in 0..nc {
            let p1 = basis.pack(&lab, Sector { class: class_idx, irrep: 0 }, 0, compat[0], m1).unwrap();
            for m2 in 0..nc {
                let p2 = basis
                    .pack(&lab, Sector { class: class_idx, irrep: 0 }, 0, compat[0], m2)
                    .unwrap();
                gram[m1][m2] = qdlab_core::stringnet::orbit_matrix_element(
                    &lab,
                    &LinearOp::Identity,
                    &p1.seed,
                    &p2.seed,
                )
                .unwrap();
            }
        }
        assert_eq!(qdlab_core::report::matrix_rank(&gram, 1e-9), nc);
    }
}

#[test]
fn boundary_independence_of_interior_observables() {
    // For operators supported on the inner region, matrix elements between
    // eta^{uv} and eta^{u'v'} vanish unless v = v', and the diagonal value is
    // independent of v.
    let (lab, basis) = z2(2);
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let inner = qdlab_core::lattice::Region::build(lab.region.origin, 1).unwrap();
    let sector = Sector { class: 1, irrep: 0 };
    let compat = basis.family.compatible_with(&lab, sector.class);
    let vs: Vec<(usize, usize)> = compat.iter().take(3).map(|&b| (b, 0)).collect();
    let states: Vec<qdlab_core::SparseState> = vs
        .iter()
        .map(|&v| basis.eta_uv_state(&lab, &EtaLabel { sector, u: (0, 0), v }).unwrap())
        .collect();
    for _ in 0..12 {
        // Random monomial on the inner edge set.
        let factors: Vec<LinearOp> = (0..3)
            .map(|_| {
                let e = inner.edges[rng.gen_range(0..inner.edges.len())];
                match rng.gen_range(0..3) {
                    0 => LinearOp::EdgeL { edge: e, h: rng.gen_range(0..2) },
                    1 => LinearOp::EdgeR { edge: e, h: rng.gen_range(0..2) },
                    _ => LinearOp::EdgeT { edge: e, g: rng.gen_range(0..2) },
                }
            })
            .collect();
        let o = ops::prod(factors);
        let mut diag = Vec::new();
        for (r, sr) in states.iter().enumerate() {
            let osr = lab.apply(&o, sr).unwrap();
            for (c, sc) in states.iter().enumerate() {
                let val = sc.inner(&osr);
                if r == c {
                    diag.push(val);
                } else {
                    assert!(val.norm() < 1e-9, "off-diagonal in v: {val}");
                }
            }
        }
        for d in &diag[1..] {
            assert!((d - diag[0]).norm() < 1e-9, "diagonal varies across v: {diag:?}");
        }
    }
}

#[test]
fn ground_patch_is_trivial_sector_eta() {
    // The trivial-sector eta with trivial boundary equals the ground patch.
    let (lab, basis) = z2(1);
    let triv = lab.qd.trivial_sector();
    let l = EtaLabel { sector: triv, u: (0, 0), v: (0, 0) };
    assert_eq!(basis.family.compatible_with(&lab, 0)[0], 0);
    let eta = basis.eta_uv_state(&lab, &l).unwrap();
    let patch = anyon::ground_patch(
        &lab,
        &qdlab_core::stringnet::BoundaryCondition::trivial(&lab),
    )
    .unwrap();
    assert!(eta.max_abs_diff(&patch) < 1e-12);
}
