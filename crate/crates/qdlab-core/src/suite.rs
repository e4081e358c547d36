//! Parameterized check suites over the operator calculus. The command-line
//! `verify` subcommand and the acceptance tests are both thin drivers over
//! these builders; every check name identifies the algebraic identity it
//! certifies.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::config::{EdgeSpace, GaugeConfig, SparseState};
use crate::group::FiniteGroup;
use crate::lab::Lab;
use crate::lattice::Ribbon;
use crate::ops::{self, LinearOp};
use crate::rep::{irreps_of, schur_verify};
use crate::report::Check;
use crate::stringnet::{EtaBasis, EtaLabel};

/// Operator equality as a named check; exhaustive on small supports,
/// sampled otherwise.
pub fn op_eq_check(
    lab: &Lab,
    name: &str,
    lhs: &LinearOp,
    rhs: &LinearOp,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Check {
    let mut edges = lhs.support();
    edges.extend(rhs.support());
    let space = if edges.is_empty() {
        EdgeSpace::new(lab.region.edges[..1].to_vec())
    } else {
        EdgeSpace::new(edges.into_iter().collect())
    };
    let d = ops::op_basis_diff(lab.group(), &space, lhs, rhs, samples, seed)
        .map_or(f64::INFINITY, |d| d);
    Check::new(name, d, tol)
}

/// Representation-theory checks: Schur orthogonality in both forms and
/// completeness of the centralizer irrep lists.
pub fn rep_checks(group: &FiniteGroup, tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let classes = crate::group::conjugacy_classes(group);
    for class in &classes {
        let n = class.centralizer.as_group();
        match irreps_of(n) {
            Ok(irreps) => {
                let report = schur_verify(n, &irreps, tol);
                out.push(Check::new(
                    format!("schur orthogonality of matrix elements (centralizer order {})", n.order()),
                    report.max_dev_elements,
                    tol,
                ));
                out.push(Check::new(
                    format!("schur orthogonality of characters (centralizer order {})", n.order()),
                    report.max_dev_characters,
                    tol,
                ));
                let dimsum: usize = irreps.iter().map(|r| r.dim * r.dim).sum();
                out.push(Check::new(
                    format!("squared irrep dimensions sum to the group order ({})", n.order()),
                    (dimsum as f64 - n.order() as f64).abs(),
                    0.5,
                ));
            }
            Err(e) => out.push(Check::new(format!("irrep catalog: {e}"), f64::INFINITY, tol)),
        }
    }
    out
}

fn random_monomial(
    lab: &Lab,
    rng: &mut ChaCha8Rng,
    edges: &[crate::lattice::Edge],
    factors: usize,
) -> LinearOp {
    let g = lab.group();
    let ops_vec: Vec<LinearOp> = (0..factors)
        .map(|_| {
            let e = edges[rng.gen_range(0..edges.len())];
            match rng.gen_range(0..3) {
                0 => LinearOp::EdgeL { edge: e, h: rng.gen_range(0..g.order()) },
                1 => LinearOp::EdgeR { edge: e, h: rng.gen_range(0..g.order()) },
                _ => LinearOp::EdgeT { edge: e, g: rng.gen_range(0..g.order()) },
            }
        })
        .collect();
    ops::prod(ops_vec)
}

/// Ribbon-operator algebra checks: the product rule in both signs, the
/// adjoint rule, splitting invariance against the literal inductive oracle,
/// the L/T factorization, endpoint commutation relations, and the sweep
/// identities.
pub fn ribbon_checks(lab: &Lab, tol: f64, samples: usize, seed: u64) -> Vec<Check> {
    let g = lab.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let rho = open_ribbon(lab, (3 * lab.region.radius + 2).min(6));
    let neg = rho.reversed();

    // Product rule, both signs.
    let mut dev_pos = 0.0f64;
    let mut dev_neg = 0.0f64;
    for _ in 0..6 {
        let (h, hp) = (rng.gen_range(0..g.order()), rng.gen_range(0..g.order()));
        let (x, xp) = (rng.gen_range(0..g.order()), rng.gen_range(0..g.order()));
        for (ribbon, dev, flip) in
            [(&rho, &mut dev_pos, false), (&neg, &mut dev_neg, true)]
        {
            let lhs = ops::prod(vec![ops::ribbon_f(ribbon, h, x), ops::ribbon_f(ribbon, hp, xp)]);
            let rhs = if x != xp {
                LinearOp::Zero
            } else {
                ops::ribbon_f(ribbon, if flip { g.mul(h, hp) } else { g.mul(hp, h) }, x)
            };
            let c = op_eq_check(lab, "tmp", &lhs, &rhs, tol, samples, rng.gen());
            *dev = dev.max(c.max_deviation);
        }
    }
    out.push(Check::new("ribbon operator product rule (positive ribbons)", dev_pos, tol));
    out.push(Check::new("ribbon operator product rule (negative ribbons)", dev_neg, tol));

    // Adjoint rule.
    let mut dev = 0.0f64;
    for _ in 0..4 {
        let (h, x) = (rng.gen_range(0..g.order()), rng.gen_range(0..g.order()));
        let f = ops::ribbon_f(&rho, h, x);
        let c = op_eq_check(
            lab,
            "tmp",
            &lab.adjoint(&f),
            &ops::ribbon_f(&rho, g.inv(h), x),
            tol,
            samples,
            rng.gen(),
        );
        dev = dev.max(c.max_deviation);
    }
    out.push(Check::new("ribbon operator adjoint rule", dev, tol));

    // Split invariance against the inductive oracle.
    let space = {
        let mut edges = rho.support();
        edges.sort();
        EdgeSpace::new(edges)
    };
    let mut dev = 0.0f64;
    for _ in 0..3 {
        let (h, x) = (rng.gen_range(0..g.order()), rng.gen_range(0..g.order()));
        let cfg = GaugeConfig::from_vals(
            (0..space.len()).map(|_| rng.gen_range(0..g.order()) as u8).collect(),
        );
        let psi = SparseState::basis(cfg);
        let direct =
            ops::apply(g, &space, &ops::ribbon_f(&rho, h, x), &psi).unwrap();
        for split in 1..rho.len() {
            let ind = ops::oracle::ribbon_f_split(g, &space, &rho, h, x, split, &psi).unwrap();
            dev = dev.max(direct.max_abs_diff(&ind));
        }
    }
    out.push(Check::new("inductive split invariance of ribbon operators", dev, tol));

    // F = L T = T L.
    let mut dev = 0.0f64;
    for _ in 0..3 {
        let (h, x) = (rng.gen_range(0..g.order()), rng.gen_range(0..g.order()));
        let f = ops::ribbon_f(&rho, h, x);
        for order in [
            ops::prod(vec![ops::ribbon_l(g, &rho, h), ops::ribbon_t(&rho, x)]),
            ops::prod(vec![ops::ribbon_t(&rho, x), ops::ribbon_l(g, &rho, h)]),
        ] {
            let c = op_eq_check(lab, "tmp", &f, &order, tol, samples, rng.gen());
            dev = dev.max(c.max_deviation);
        }
    }
    out.push(Check::new("ribbon operators factor into flux and shift parts", dev, tol));

    // Endpoint commutation relations (positive case suffices here; the
    // integration suite covers the negative case exhaustively).
    let s0 = rho.start().unwrap();
    let s1 = rho.end().unwrap();
    let mut dev = 0.0f64;
    for _ in 0..4 {
        let (h, x, k) = (
            rng.gen_range(0..g.order()),
            rng.gen_range(0..g.order()),
            rng.gen_range(0..g.order()),
        );
        let f = ops::ribbon_f(&rho, h, x);
        let pairs = [
            (
                ops::prod(vec![ops::a_site(s0, k), f.clone()]),
                ops::prod(vec![
                    ops::ribbon_f(&rho, g.conj(k, h), g.mul(k, x)),
                    ops::a_site(s0, k),
                ]),
            ),
            (
                ops::prod(vec![ops::b_site(s1, k), f.clone()]),
                ops::prod(vec![
                    f.clone(),
                    ops::b_site(s1, g.mul(g.mul(k, g.inv(x)), g.mul(g.inv(h), x))),
                ]),
            ),
        ];
        for (lhs, rhs) in pairs {
            let c = op_eq_check(lab, "tmp", &lhs, &rhs, tol, samples, rng.gen());
            dev = dev.max(c.max_deviation);
        }
    }
    out.push(Check::new("endpoint commutation of site and ribbon operators", dev, tol));

    // Sweep identities on a short ribbon.
    let short = crate::anyon::ribbon_to(lab.region.origin, crate::lattice::v(1, 0), None)
        .expect("unit ribbon");
    let av = ops::a_vertex_proj(g, short.end().unwrap());
    let lhs = ops::scaled_re(
        g.order() as f64,
        ops::sum(
            g.elements()
                .map(|x| {
                    ops::prod(vec![
                        ops::ribbon_t(&short, x),
                        av.clone(),
                        ops::ribbon_t(&short, x),
                    ])
                })
                .collect(),
        ),
    );
    out.push(op_eq_check(
        lab,
        "gauge sweep identity resolves the identity",
        &lhs,
        &LinearOp::Identity,
        tol,
        samples,
        seed ^ 0xabc,
    ));
    let f_target = crate::lattice::Face::up(crate::lattice::v(0, 0));
    let rho_f =
        crate::anyon::ribbon_to(lab.region.origin, crate::lattice::v(1, 0), Some(f_target))
            .expect("face ribbon");
    let anchor = crate::lattice::Site::new(f_target.vertices()[0], f_target).unwrap();
    let bf = ops::b_face_proj(anchor);
    let lhs = ops::sum(
        g.elements()
            .map(|h| {
                ops::prod(vec![
                    ops::ribbon_l(g, &rho_f, g.inv(h)),
                    bf.clone(),
                    ops::ribbon_l(g, &rho_f, h),
                ])
            })
            .collect(),
    );
    out.push(op_eq_check(
        lab,
        "flux sweep identity resolves the identity",
        &lhs,
        &LinearOp::Identity,
        tol,
        samples,
        seed ^ 0xdef,
    ));
    out
}

fn open_ribbon(lab: &Lab, len: usize) -> Ribbon {
    let (r, _) = lab.region.fiducial.split_at(len.min(lab.region.fiducial.len() - 1));
    r
}

/// Projector-algebra checks: Wigner completeness, orthogonality and
/// decomposition, the commuting-factor lemma, sector ribbon splitting, the
/// isometry identity, and the charge detector algebra (formal plus sampled).
pub fn projector_checks(lab: &Lab, tol: f64, samples: usize, seed: u64) -> Vec<Check> {
    let g = lab.group();
    let s = lab.region.origin;
    let sectors = lab.qd.sectors();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let total =
        ops::sum(sectors.iter().map(|&sec| ops::wigner_rc(&lab.qd, s, sec)).collect());
    out.push(op_eq_check(
        lab,
        "wigner projectors sum to the identity",
        &total,
        &LinearOp::Identity,
        tol,
        samples,
        rng.gen(),
    ));
    let mut dev_orth = 0.0f64;
    let mut dev_decomp = 0.0f64;
    for &s1 in &sectors {
        let d1 = ops::wigner_rc(&lab.qd, s, s1);
        for &s2 in &sectors {
            let d2 = ops::wigner_rc(&lab.qd, s, s2);
            let rhs = if s1 == s2 { d1.clone() } else { LinearOp::Zero };
            let c = op_eq_check(
                lab,
                "tmp",
                &ops::prod(vec![d1.clone(), d2]),
                &rhs,
                tol,
                samples / 4,
                rng.gen(),
            );
            dev_orth = dev_orth.max(c.max_deviation);
        }
        let parts = ops::sum(
            lab.qd
                .labels_u(s1)
                .into_iter()
                .map(|u| ops::wigner_rcu(&lab.qd, s, s1, u))
                .collect(),
        );
        let c = op_eq_check(lab, "tmp", &d1, &parts, tol, samples / 2, rng.gen());
        dev_decomp = dev_decomp.max(c.max_deviation);
    }
    out.push(Check::new("wigner projectors are mutually orthogonal", dev_orth, tol));
    out.push(Check::new("wigner projectors decompose into site labels", dev_decomp, tol));

    // Detector algebra: formal coefficients on the boundary ribbon.
    let coeffs: Vec<FxHashMap<(usize, usize), Complex64>> =
        sectors.iter().map(|&sec| detector_coeffs(lab, sec)).collect();
    let identity: FxHashMap<(usize, usize), Complex64> =
        g.elements().map(|x| ((0, x), Complex64::new(1.0, 0.0))).collect();
    let mut totalc: FxHashMap<(usize, usize), Complex64> = FxHashMap::default();
    for c in &coeffs {
        for (k, &v) in c {
            *totalc.entry(*k).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
    }
    out.push(Check::new(
        "charge detectors resolve the identity (formal)",
        fmax_diff(&totalc, &identity),
        tol,
    ));
    let mut dev = 0.0f64;
    for (i1, c1) in coeffs.iter().enumerate() {
        for (i2, c2) in coeffs.iter().enumerate() {
            let prod = fmul(g, c1, c2);
            let expect = if i1 == i2 { c1.clone() } else { FxHashMap::default() };
            dev = dev.max(fmax_diff(&prod, &expect));
        }
    }
    out.push(Check::new("charge detector product rule (formal)", dev, tol));

    // Numeric spot check of the detector algebra on sampled basis states.
    let k0 = ops::charge_detector(&lab.qd, &lab.region.boundary_ribbon, sectors[0]).unwrap();
    out.push(op_eq_check(
        lab,
        "charge detector idempotence (sampled)",
        &ops::prod(vec![k0.clone(), k0.clone()]),
        &k0,
        tol,
        samples / 2,
        rng.gen(),
    ));
    out
}

type FMap = FxHashMap<(usize, usize), Complex64>;

/// Formal coefficients of a charge detector over the ribbon operator labels.
pub fn detector_coeffs(lab: &Lab, sector: crate::rep::Sector) -> FMap {
    let g = lab.group();
    let class = lab.qd.class(sector);
    let irrep = lab.qd.irrep(sector);
    let w = irrep.dim as f64 / class.centralizer.order() as f64;
    let mut out: FMap = FxHashMap::default();
    for (mi, &m) in class.centralizer.elements.iter().enumerate() {
        let chi = irrep.character(mi).conj() * w;
        for &q in &class.iterators {
            let key = (g.conj(q, m), g.conj(q, class.representative()));
            *out.entry(key).or_insert(Complex64::new(0.0, 0.0)) += chi;
        }
    }
    out
}

/// Formal product of ribbon-operator combinations on a positive ribbon.
pub fn fmul(g: &FiniteGroup, a: &FMap, b: &FMap) -> FMap {
    let mut out: FMap = FxHashMap::default();
    for (&(h, x), &ca) in a {
        for (&(hp, xp), &cb) in b {
            if x != xp {
                continue;
            }
            *out.entry((g.mul(hp, h), x)).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

pub fn fmax_diff(a: &FMap, b: &FMap) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    let mut m = 0.0f64;
    for (k, &ca) in a {
        m = m.max((ca - b.get(k).copied().unwrap_or(zero)).norm());
    }
    for (k, &cb) in b {
        m = m.max((cb - a.get(k).copied().unwrap_or(zero)).norm());
    }
    m
}

/// Eta-basis checks through the orbit route: Gram identity and, for small
/// regions, pack cardinality and the explicit/orbit cross-validation.
pub fn eta_checks(
    lab: &Lab,
    basis: &EtaBasis,
    tol: f64,
    enumerate_packs: bool,
) -> Vec<Check> {
    let mut out = Vec::new();
    let mut labels: Vec<EtaLabel> = Vec::new();
    for sector in lab.qd.sectors() {
        labels.extend(basis.labels(lab, sector).into_iter().take(4));
    }
    match basis.gram_orbit(lab, &labels) {
        Ok(gram) => out.push(Check::new(
            format!("eta basis gram identity over {} labels", labels.len()),
            crate::report::identity_deviation(&gram),
            tol,
        )),
        Err(e) => out.push(Check::new(format!("eta basis gram: {e}"), f64::INFINITY, tol)),
    }
    if enumerate_packs {
        let interior = lab.region.interior_vertices.len() as u32;
        let expect = lab.group().order().pow(interior);
        let mut worst = 0.0f64;
        for sector in lab.qd.sectors().into_iter().take(2) {
            let compat = basis.family.compatible_with(lab, sector.class);
            if let Ok(pack) = basis.pack(lab, sector, 0, compat[0], 0) {
                let n = crate::stringnet::enumerate_orbit(lab, &pack.seed).len();
                worst = worst.max((n as f64 - expect as f64).abs());
            }
        }
        out.push(Check::new(
            format!("pack cardinality equals |G|^{interior}"),
            worst,
            0.5,
        ));
    }
    out
}

/// Random monomials on a sub-edge set, for boundary-independence checks.
pub fn monomials(
    lab: &Lab,
    edges: &[crate::lattice::Edge],
    count: usize,
    factors: usize,
    seed: u64,
) -> Vec<LinearOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_monomial(lab, &mut rng, edges, factors)).collect()
}
