//! Irreducible unitary representations of centralizer subgroups and the
//! (R, C) sector labels of the quantum double algebra.
//!
//! Irreps are concrete matrix tables indexed by the subgroup's canonical
//! element order. The catalog covers every centralizer that arises from the
//! built-in groups (cyclic, two-factor abelian, S3, D4, Q8); anything else
//! must come in as a user table, and the validator is the trust boundary
//! either way: homomorphism, unitarity, irreducibility, and completeness are
//! always checked.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::group::{conjugacy_classes, ConjugacyClass, Elem, FiniteGroup};

pub const REP_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("homomorphism violated in irrep `{irrep}`: R({a})R({b}) != R({a}*{b})")]
    Homomorphism { irrep: String, a: usize, b: usize },
    #[error("irrep `{irrep}` is not unitary at element {elem}")]
    NotUnitary { irrep: String, elem: usize },
    #[error("`{irrep}` is reducible: norm-squared character sum = {sum:.6}")]
    Reducible { irrep: String, sum: f64 },
    #[error("incomplete irrep set: sum of squared dimensions is {got}, group order is {want}")]
    Incomplete { got: usize, want: usize },
    #[error("duplicate irreps: `{a}` and `{b}` have identical characters")]
    Duplicate { a: String, b: String },
    #[error("no catalog irreps for this group (order {order}); supply an irrep table file")]
    NeedUserTable { order: usize },
    #[error("irrep table parse error: {0}")]
    Parse(String),
    #[error("quantum double dimension identity failed: sum (|C| dim R)^2 = {got}, |G|^2 = {want}")]
    DimensionIdentity { got: usize, want: usize },
}

/// Small dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zero(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for j in 0..dim {
            m.data[j * dim + j] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim);
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.dim + k]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zero(d);
        for j in 0..d {
            for l in 0..d {
                let a = self.data[j * d + l];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out.data[j * d + k] += a * other.data[l * d + k];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zero(d);
        for j in 0..d {
            for k in 0..d {
                out.data[k * d + j] = self.data[j * d + k].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|j| self.at(j, j)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A validated unitary matrix representation of a finite group.
///
/// `matrices[k]` is `R(m_k)` where `m_k` is element `k` of the group the
/// irrep was built for (a centralizer subgroup in standalone indexing).
#[derive(Debug, Clone)]
pub struct Irrep {
    pub name: String,
    pub dim: usize,
    pub matrices: Vec<CMat>,
}

impl Irrep {
    /// Component `R^{j j'}(m)` for subgroup element index `m`.
    #[inline]
    pub fn entry(&self, m: usize, j: usize, jp: usize) -> Complex64 {
        self.matrices[m].at(j, jp)
    }

    /// Character `χ_R(m)`.
    pub fn character(&self, m: usize) -> Complex64 {
        self.matrices[m].trace()
    }
}

fn phase(turns: f64) -> Complex64 {
    Complex64::new((2.0 * PI * turns).cos(), (2.0 * PI * turns).sin())
}

/// Build an irrep from generator matrices by expanding group words.
///
/// Every element is reached by a breadth-first walk over right-multiplication
/// by the generators; the validator afterwards certifies the result really is
/// a homomorphism.
fn irrep_from_generators(
    group: &FiniteGroup,
    name: &str,
    gens: &[(Elem, CMat)],
) -> Option<Irrep> {
    let dim = gens.first().map_or(1, |(_, m)| m.dim);
    let mut mats: Vec<Option<CMat>> = vec![None; group.order()];
    mats[0] = Some(CMat::identity(dim));
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let mx = mats[x].clone().expect("queued elements have matrices");
        for (g, mg) in gens {
            let y = group.mul(x, *g);
            if mats[y].is_none() {
                mats[y] = Some(mx.mul(mg));
                queue.push_back(y);
            }
        }
    }
    if mats.iter().any(Option::is_none) {
        return None; // generators do not generate
    }
    Some(Irrep { name: name.to_string(), dim, matrices: mats.into_iter().flatten().collect() })
}

/// Catalog irreps of an abelian group that is cyclic or a direct product of
/// two cyclic subgroups.
fn abelian_irreps(group: &FiniteGroup) -> Option<Vec<Irrep>> {
    let n = group.order();
    // Cyclic case.
    if let Some(g) = group.elements().find(|&g| group.elem_order(g) == n) {
        let mut log = vec![0usize; n];
        let mut x = 0;
        for j in 0..n {
            log[x] = j;
            x = group.mul(x, g);
        }
        return Some(
            (0..n)
                .map(|k| Irrep {
                    name: format!("chi{k}"),
                    dim: 1,
                    matrices: (0..n)
                        .map(|e| CMat::from_rows(&[vec![phase(
                            (k * log[e]) as f64 / n as f64,
                        )]]))
                        .collect(),
                })
                .collect(),
        );
    }
    // Two-factor case: G = <g1> x <g2>.
    let g1 = (0..n).max_by_key(|&g| group.elem_order(g))?;
    let d1 = group.elem_order(g1);
    let cyc1: Vec<Elem> = {
        let mut v = vec![0];
        let mut x = g1;
        while x != 0 {
            v.push(x);
            x = group.mul(x, g1);
        }
        v
    };
    for g2 in group.elements() {
        let d2 = group.elem_order(g2);
        if d1 * d2 != n || cyc1.contains(&g2) && g2 != 0 {
            continue;
        }
        // Decompose every element as g1^a g2^b; demand the map is a bijection.
        let mut coords: HashMap<Elem, (usize, usize)> = HashMap::new();
        for a in 0..d1 {
            for b in 0..d2 {
                let mut x = 0;
                for _ in 0..a {
                    x = group.mul(x, g1);
                }
                for _ in 0..b {
                    x = group.mul(x, g2);
                }
                coords.insert(x, (a, b));
            }
        }
        if coords.len() != n {
            continue;
        }
        let mut irreps = Vec::with_capacity(n);
        for k1 in 0..d1 {
            for k2 in 0..d2 {
                irreps.push(Irrep {
                    name: format!("chi{k1}_{k2}"),
                    dim: 1,
                    matrices: (0..n)
                        .map(|e| {
                            let (a, b) = coords[&e];
                            CMat::from_rows(&[vec![
                                phase((k1 * a) as f64 / d1 as f64)
                                    * phase((k2 * b) as f64 / d2 as f64),
                            ]])
                        })
                        .collect(),
                });
            }
        }
        return Some(irreps);
    }
    None
}

fn s3_irreps(group: &FiniteGroup) -> Option<Vec<Irrep>> {
    let a = group.elements().find(|&g| group.elem_order(g) == 3)?;
    let b = group.elements().find(|&g| group.elem_order(g) == 2)?;
    let (c, s) = (-0.5, 3f64.sqrt() / 2.0);
    let rot = CMat::from_rows(&[
        vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]);
    let refl = CMat::from_rows(&[
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
    ]);
    let one = |x: f64| CMat::from_rows(&[vec![Complex64::new(x, 0.0)]]);
    Some(vec![
        irrep_from_generators(group, "trivial", &[(a, one(1.0)), (b, one(1.0))])?,
        irrep_from_generators(group, "sign", &[(a, one(1.0)), (b, one(-1.0))])?,
        irrep_from_generators(group, "standard", &[(a, rot), (b, refl)])?,
    ])
}

fn d4_irreps(group: &FiniteGroup) -> Option<Vec<Irrep>> {
    let r = group.elements().find(|&g| group.elem_order(g) == 4)?;
    let r2 = group.mul(r, r);
    let s = group
        .elements()
        .find(|&g| group.elem_order(g) == 2 && g != r2)?;
    let zero = Complex64::new(0.0, 0.0);
    let rot = CMat::from_rows(&[
        vec![zero, Complex64::new(-1.0, 0.0)],
        vec![Complex64::new(1.0, 0.0), zero],
    ]);
    let refl = CMat::from_rows(&[
        vec![Complex64::new(1.0, 0.0), zero],
        vec![zero, Complex64::new(-1.0, 0.0)],
    ]);
    let one = |x: f64| CMat::from_rows(&[vec![Complex64::new(x, 0.0)]]);
    let mut out = Vec::new();
    for (name, xr, xs) in [
        ("trivial", 1.0, 1.0),
        ("sign_s", 1.0, -1.0),
        ("sign_r", -1.0, 1.0),
        ("sign_rs", -1.0, -1.0),
    ] {
        out.push(irrep_from_generators(group, name, &[(r, one(xr)), (s, one(xs))])?);
    }
    out.push(irrep_from_generators(group, "standard", &[(r, rot), (s, refl)])?);
    Some(out)
}

fn q8_irreps(group: &FiniteGroup) -> Option<Vec<Irrep>> {
    let i = group.elements().find(|&g| group.elem_order(g) == 4)?;
    let i2 = group.mul(i, i);
    let j = group
        .elements()
        .find(|&g| group.elem_order(g) == 4 && g != i && g != group.inv(i))?;
    debug_assert_eq!(group.mul(j, j), i2);
    let zero = Complex64::new(0.0, 0.0);
    let mi = CMat::from_rows(&[
        vec![Complex64::new(0.0, 1.0), zero],
        vec![zero, Complex64::new(0.0, -1.0)],
    ]);
    let mj = CMat::from_rows(&[
        vec![zero, Complex64::new(1.0, 0.0)],
        vec![Complex64::new(-1.0, 0.0), zero],
    ]);
    let one = |x: f64| CMat::from_rows(&[vec![Complex64::new(x, 0.0)]]);
    let mut out = Vec::new();
    for (name, xi, xj) in [
        ("trivial", 1.0, 1.0),
        ("sign_j", 1.0, -1.0),
        ("sign_i", -1.0, 1.0),
        ("sign_ij", -1.0, -1.0),
    ] {
        out.push(irrep_from_generators(group, name, &[(i, one(xi)), (j, one(xj))])?);
    }
    out.push(irrep_from_generators(group, "standard", &[(i, mi), (j, mj)])?);
    Some(out)
}

/// A complete list of irreducible unitary representations of `group`.
///
/// Catalog-backed for abelian groups (one or two cyclic factors) and for the
/// non-abelian groups of order 6 and 8; everything is validated before being
/// returned.
pub fn irreps_of(group: &FiniteGroup) -> Result<Vec<Irrep>, RepError> {
    let irreps = if group.is_abelian() {
        abelian_irreps(group).ok_or(RepError::NeedUserTable { order: group.order() })?
    } else if group.order() == 6 {
        s3_irreps(group).ok_or(RepError::NeedUserTable { order: 6 })?
    } else if group.order() == 8 {
        let order2 = group.elements().filter(|&g| group.elem_order(g) == 2).count();
        let built = if order2 == 1 { q8_irreps(group) } else { d4_irreps(group) };
        built.ok_or(RepError::NeedUserTable { order: 8 })?
    } else {
        return Err(RepError::NeedUserTable { order: group.order() });
    };
    validate_irreps(group, &irreps)?;
    Ok(irreps)
}

/// Check the three irrep invariants plus completeness and distinctness.
pub fn validate_irreps(group: &FiniteGroup, irreps: &[Irrep]) -> Result<(), RepError> {
    let n = group.order();
    for r in irreps {
        if r.matrices.len() != n {
            return Err(RepError::Parse(format!(
                "irrep `{}` has {} matrices, group order is {n}",
                r.name,
                r.matrices.len()
            )));
        }
        for (a, ma) in r.matrices.iter().enumerate() {
            let prod = ma.mul(&ma.dagger());
            if prod.max_abs_diff(&CMat::identity(r.dim)) > REP_TOL {
                return Err(RepError::NotUnitary { irrep: r.name.clone(), elem: a });
            }
            for b in 0..n {
                let ab = group.mul(a, b);
                if ma.mul(&r.matrices[b]).max_abs_diff(&r.matrices[ab]) > 1e-12 {
                    return Err(RepError::Homomorphism { irrep: r.name.clone(), a, b });
                }
            }
        }
        let sum: f64 =
            (0..n).map(|m| r.character(m).norm_sqr()).sum::<f64>() / n as f64;
        if (sum - 1.0).abs() > REP_TOL {
            return Err(RepError::Reducible { irrep: r.name.clone(), sum });
        }
    }
    let dim_sum: usize = irreps.iter().map(|r| r.dim * r.dim).sum();
    if dim_sum != n {
        return Err(RepError::Incomplete { got: dim_sum, want: n });
    }
    for (x, rx) in irreps.iter().enumerate() {
        for ry in &irreps[x + 1..] {
            let same = (0..n).all(|m| (rx.character(m) - ry.character(m)).norm() <= REP_TOL);
            if same {
                return Err(RepError::Duplicate { a: rx.name.clone(), b: ry.name.clone() });
            }
        }
    }
    Ok(())
}

/// Outcome of the Schur orthogonality sweep over a complete irrep list.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SchurReport {
    /// Max deviation in the matrix-element orthogonality relation.
    pub max_dev_elements: f64,
    /// Worst (irrep1, irrep2, j, k, l, m) tuple for the element relation.
    pub worst_tuple: (String, String, usize, usize, usize, usize),
    /// Max deviation in the character column orthogonality relation.
    pub max_dev_characters: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Verify both Schur orthogonality relations for a complete irrep list:
/// matrix-element orthogonality and character column orthogonality.
pub fn schur_verify(group: &FiniteGroup, irreps: &[Irrep], tol: f64) -> SchurReport {
    let n = group.order();
    let mut max_el = 0.0f64;
    let mut worst = (String::new(), String::new(), 0, 0, 0, 0);
    for (x, rx) in irreps.iter().enumerate() {
        for (y, ry) in irreps.iter().enumerate() {
            for j in 0..rx.dim {
                for k in 0..rx.dim {
                    for l in 0..ry.dim {
                        for m in 0..ry.dim {
                            let sum: Complex64 = (0..n)
                                .map(|h| rx.entry(h, j, k) * ry.entry(h, l, m).conj())
                                .sum();
                            let expect = if x == y && j == l && k == m {
                                Complex64::new(n as f64 / rx.dim as f64, 0.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            };
                            let dev = (sum - expect).norm();
                            if dev > max_el {
                                max_el = dev;
                                worst =
                                    (rx.name.clone(), ry.name.clone(), j, k, l, m);
                            }
                        }
                    }
                }
            }
        }
    }
    // Character columns: sum over irreps of χ(h1) χ(h2)* is |Z_{h1}| on equal
    // classes and 0 otherwise.
    let classes = conjugacy_classes(group);
    let class_of = |h: Elem| classes.iter().position(|c| c.contains(h)).unwrap();
    let mut max_ch = 0.0f64;
    for h1 in 0..n {
        for h2 in 0..n {
            let sum: Complex64 = irreps
                .iter()
                .map(|r| r.character(h1) * r.character(h2).conj())
                .sum();
            let expect = if class_of(h1) == class_of(h2) {
                Complex64::new(classes[class_of(h1)].centralizer.order() as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            max_ch = max_ch.max((sum - expect).norm());
        }
    }
    SchurReport {
        max_dev_elements: max_el,
        worst_tuple: worst,
        max_dev_characters: max_ch,
        tolerance: tol,
        pass: max_el <= tol && max_ch <= tol,
    }
}

fn parse_complex(token: &str) -> Result<Complex64, RepError> {
    let t = token.trim();
    let err = || RepError::Parse(format!("bad complex entry `{token}`"));
    if let Some(body) = t.strip_suffix('i') {
        // Forms: "bi", "+bi", "-bi", "a+bi", "a-bi".
        let body = body.trim();
        // Find the split between real and imaginary parts: the last +/- not at
        // position 0 and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for p in (1..bytes.len()).rev() {
            if (bytes[p] == b'+' || bytes[p] == b'-')
                && bytes[p - 1] != b'e'
                && bytes[p - 1] != b'E'
            {
                split = Some(p);
                break;
            }
        }
        match split {
            Some(p) => {
                let re: f64 = body[..p].parse().map_err(|_| err())?;
                let im_str = &body[p..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| err())?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().map_err(|_| err())?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| err())?, 0.0))
    }
}

/// Parse an irrep table file: per-irrep blocks `irrep <name> dim <d>`
/// followed by one d-line matrix per group element, entries `a+bi`.
pub fn parse_irrep_table(group: &FiniteGroup, text: &str) -> Result<Vec<Irrep>, RepError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let mut irreps = Vec::new();
    while let Some(head) = lines.next() {
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "irrep" || parts[2] != "dim" {
            return Err(RepError::Parse(format!("expected `irrep <name> dim <d>`, got `{head}`")));
        }
        let name = parts[1].to_string();
        let dim: usize =
            parts[3].parse().map_err(|_| RepError::Parse(format!("bad dim `{}`", parts[3])))?;
        let mut matrices = Vec::with_capacity(group.order());
        for _ in 0..group.order() {
            let mut rows = Vec::with_capacity(dim);
            for _ in 0..dim {
                let row = lines
                    .next()
                    .ok_or_else(|| RepError::Parse("matrix rows ended early".into()))?;
                let vals: Result<Vec<Complex64>, _> =
                    row.split_whitespace().map(parse_complex).collect();
                let vals = vals?;
                if vals.len() != dim {
                    return Err(RepError::Parse(format!(
                        "row `{row}` has {} entries, expected {dim}",
                        vals.len()
                    )));
                }
                rows.push(vals);
            }
            matrices.push(CMat::from_rows(&rows));
        }
        irreps.push(Irrep { name, dim, matrices });
    }
    validate_irreps(group, &irreps)?;
    Ok(irreps)
}

/// A sector label (R, C): conjugacy class index plus centralizer irrep index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Sector {
    pub class: usize,
    pub irrep: usize,
}

/// Internal site label u = (i, j): class element index and irrep row.
pub type LabelU = (usize, usize);

/// A finite group together with its conjugacy data and the irreps of every
/// centralizer: everything needed to label and build quantum double sectors.
#[derive(Debug, Clone)]
pub struct QuantumDouble {
    pub group: FiniteGroup,
    pub classes: Vec<ConjugacyClass>,
    pub class_irreps: Vec<Vec<Irrep>>,
}

impl QuantumDouble {
    pub fn new(group: FiniteGroup) -> Result<Self, RepError> {
        let classes = conjugacy_classes(&group);
        let class_irreps: Result<Vec<_>, _> =
            classes.iter().map(|c| irreps_of(c.centralizer.as_group())).collect();
        let qd = Self { group, classes, class_irreps: class_irreps? };
        qd.check_dimension_identity()?;
        Ok(qd)
    }

    /// As `new`, but with caller-supplied irreps for centralizers the catalog
    /// cannot produce (map keyed by class index).
    pub fn with_user_irreps(
        group: FiniteGroup,
        mut user: HashMap<usize, Vec<Irrep>>,
    ) -> Result<Self, RepError> {
        let classes = conjugacy_classes(&group);
        let mut class_irreps = Vec::with_capacity(classes.len());
        for (ci, c) in classes.iter().enumerate() {
            match user.remove(&ci) {
                Some(irreps) => {
                    validate_irreps(c.centralizer.as_group(), &irreps)?;
                    class_irreps.push(irreps);
                }
                None => class_irreps.push(irreps_of(c.centralizer.as_group())?),
            }
        }
        let qd = Self { group, classes, class_irreps };
        qd.check_dimension_identity()?;
        Ok(qd)
    }

    fn check_dimension_identity(&self) -> Result<(), RepError> {
        let got: usize = self
            .sectors()
            .iter()
            .map(|&s| {
                let d = self.sector_dim(s);
                d * d
            })
            .sum();
        let want = self.group.order() * self.group.order();
        if got != want {
            return Err(RepError::DimensionIdentity { got, want });
        }
        Ok(())
    }

    /// All sector labels (C, R), classes outermost, in deterministic order.
    pub fn sectors(&self) -> Vec<Sector> {
        let mut out = Vec::new();
        for (class, irreps) in self.class_irreps.iter().enumerate() {
            for irrep in 0..irreps.len() {
                out.push(Sector { class, irrep });
            }
        }
        out
    }

    /// The trivial sector: trivial class, trivial irrep.
    pub fn trivial_sector(&self) -> Sector {
        let irrep = self.class_irreps[0]
            .iter()
            .position(|r| {
                r.dim == 1 && (0..r.matrices.len()).all(|m| (r.entry(m, 0, 0).re - 1.0).abs() < 1e-12 && r.entry(m, 0, 0).im.abs() < 1e-12)
            })
            .expect("trivial irrep exists");
        Sector { class: 0, irrep }
    }

    #[inline]
    pub fn class(&self, s: Sector) -> &ConjugacyClass {
        &self.classes[s.class]
    }

    #[inline]
    pub fn irrep(&self, s: Sector) -> &Irrep {
        &self.class_irreps[s.class][s.irrep]
    }

    /// |C| * dim R, the size of the site label set I_RC.
    pub fn sector_dim(&self, s: Sector) -> usize {
        self.class(s).size() * self.irrep(s).dim
    }

    /// The site label set I_RC = {0..|C|} x {0..dim R}.
    pub fn labels_u(&self, s: Sector) -> Vec<LabelU> {
        let mut out = Vec::with_capacity(self.sector_dim(s));
        for i in 0..self.class(s).size() {
            for j in 0..self.irrep(s).dim {
                out.push((i, j));
            }
        }
        out
    }

    pub fn sector_name(&self, s: Sector) -> String {
        let rep = self.class(s).representative();
        format!("C[{}];{}", self.group.name(rep), self.irrep(s).name)
    }
}
