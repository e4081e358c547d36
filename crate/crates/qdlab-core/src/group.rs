//! Finite groups as explicit multiplication tables.
//!
//! Group elements are identified by their index into the table; index 0 is
//! always the identity. On top of the raw table this module derives the
//! conjugacy data consumed by the rest of the crate: classes `C = {c_i}`,
//! a representative `r_C` per class, an iterator set `Q_C = {q_i}` with
//! `q_i r_C q̄_i = c_i`, and the centralizer subgroup `N_C`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Index of a group element into its group's tables.
pub type Elem = usize;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("multiplication table is not square: row {row} has {len} entries, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("table entry out of range: mult[{a}][{b}] = {val}, order is {order}")]
    EntryOutOfRange { a: Elem, b: Elem, val: usize, order: usize },
    #[error("identity/inverse law violated: no two-sided identity or element {elem} has no inverse")]
    IdentityInverse { elem: Elem },
    #[error("associativity violated at triple ({a}, {b}, {c})")]
    Associativity { a: Elem, b: Elem, c: Elem },
    #[error("unknown catalog group `{0}`")]
    UnknownCatalog(String),
    #[error("group table parse error: {0}")]
    Parse(String),
    #[error("subset is not closed under product: {a} * {b} leaves the subset")]
    NotClosed { a: Elem, b: Elem },
}

/// A finite group given by explicit multiplication and inverse tables.
///
/// Immutable after construction; element index 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mult: Vec<Elem>,
    inv: Vec<Elem>,
    names: Vec<String>,
}

impl FiniteGroup {
    /// Validate a multiplication table and build the group.
    ///
    /// The table must be square with in-range entries, have a two-sided
    /// identity, inverses, and be associative. If the identity is not at
    /// index 0 the elements are relabeled so that it is.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self, GroupError> {
        let order = table.len();
        for (row, r) in table.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::NotSquare { row, len: r.len(), order });
            }
            for (b, &v) in r.iter().enumerate() {
                if v >= order {
                    return Err(GroupError::EntryOutOfRange { a: row, b, val: v, order });
                }
            }
        }
        // Locate a two-sided identity.
        let id = (0..order)
            .find(|&e| (0..order).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or(GroupError::IdentityInverse { elem: 0 })?;
        // Relabel so the identity sits at index 0.
        let perm: Vec<usize> = (0..order)
            .map(|i| if i == id { 0 } else if i == 0 { id } else { i })
            .collect();
        let mut mult = vec![0; order * order];
        for a in 0..order {
            for b in 0..order {
                mult[perm[a] * order + perm[b]] = perm[table[a][b]];
            }
        }
        // Inverses.
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            match (0..order).find(|&b| mult[a * order + b] == 0 && mult[b * order + a] == 0) {
                Some(b) => inv[a] = b,
                None => return Err(GroupError::IdentityInverse { elem: a }),
            }
        }
        // Associativity, all triples.
        for a in 0..order {
            for b in 0..order {
                let ab = mult[a * order + b];
                for c in 0..order {
                    let bc = mult[b * order + c];
                    if mult[ab * order + c] != mult[a * order + bc] {
                        return Err(GroupError::Associativity { a, b, c });
                    }
                }
            }
        }
        let names = (0..order).map(|i| format!("g{i}")).collect();
        Ok(Self { order, mult, inv, names })
    }

    /// Cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let mut g = Self::from_table(&table).expect("cyclic table is a group");
        g.names = (0..n).map(|i| format!("r{i}")).collect();
        g
    }

    /// Symmetric group on three letters, elements indexed by one-line notation
    /// in lexicographic order (identity first).
    pub fn symmetric_3() -> Self {
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: &[usize; 3]| perms.iter().position(|q| q == p).unwrap();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        // (a ∘ b)(x) = a(b(x))
                        let c = [a[b[0]], a[b[1]], a[b[2]]];
                        index(&c)
                    })
                    .collect()
            })
            .collect();
        let mut g = Self::from_table(&table).expect("S3 table is a group");
        g.names = vec!["e", "(12)", "(01)", "(012)", "(021)", "(02)"]
            .into_iter()
            .map(String::from)
            .collect();
        g
    }

    /// Dihedral group of the square, order 8. Element `a + 4b` is `r^a s^b`.
    pub fn dihedral_4() -> Self {
        let idx = |a: usize, b: usize| a % 4 + 4 * (b % 2);
        let mut table = vec![vec![0usize; 8]; 8];
        for a1 in 0..4 {
            for b1 in 0..2 {
                for a2 in 0..4 {
                    for b2 in 0..2 {
                        // (r^a1 s^b1)(r^a2 s^b2) = r^(a1 ± a2) s^(b1+b2)
                        let a = if b1 == 0 { (a1 + a2) % 4 } else { (a1 + 4 - a2 % 4) % 4 };
                        table[idx(a1, b1)][idx(a2, b2)] = idx(a, b1 + b2);
                    }
                }
            }
        }
        let mut g = Self::from_table(&table).expect("D4 table is a group");
        g.names = vec!["e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"]
            .into_iter()
            .map(String::from)
            .collect();
        g
    }

    /// Quaternion group, order 8: {1, -1, i, -i, j, -j, k, -k}.
    pub fn quaternion_8() -> Self {
        // (sign, axis) with axis 0 = scalar, 1 = i, 2 = j, 3 = k.
        let enc = |s: i8, ax: usize| ax * 2 + usize::from(s < 0);
        let units: [(i8, usize); 8] =
            [(1, 0), (-1, 0), (1, 1), (-1, 1), (1, 2), (-1, 2), (1, 3), (-1, 3)];
        let mul = |(s1, a1): (i8, usize), (s2, a2): (i8, usize)| -> (i8, usize) {
            let s = s1 * s2;
            match (a1, a2) {
                (0, a) => (s, a),
                (a, 0) => (s, a),
                (a, b) if a == b => (-s, 0),
                // i*j = k and cyclic; anti-cyclic flips sign.
                (1, 2) => (s, 3),
                (2, 3) => (s, 1),
                (3, 1) => (s, 2),
                (2, 1) => (-s, 3),
                (3, 2) => (-s, 1),
                (1, 3) => (-s, 2),
                _ => unreachable!(),
            }
        };
        let mut table = vec![vec![0usize; 8]; 8];
        for (u1, &q1) in units.iter().enumerate() {
            for (u2, &q2) in units.iter().enumerate() {
                let (s, ax) = mul(q1, q2);
                table[enc(q1.0, q1.1)][enc(q2.0, q2.1)] = enc(s, ax);
                debug_assert_eq!(enc(q1.0, q1.1), u1);
                debug_assert_eq!(enc(q2.0, q2.1), u2);
            }
        }
        let mut g = Self::from_table(&table).expect("Q8 table is a group");
        g.names = vec!["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
            .into_iter()
            .map(String::from)
            .collect();
        g
    }

    /// Look up a catalog group by name: `Z1`..`Z12`, `S3`, `D4`, `Q8`.
    pub fn catalog(name: &str) -> Result<Self, GroupError> {
        let upper = name.to_ascii_uppercase();
        if let Some(n) = upper.strip_prefix('Z').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=12).contains(&n) {
                return Ok(Self::cyclic(n));
            }
        }
        match upper.as_str() {
            "S3" => Ok(Self::symmetric_3()),
            "D4" => Ok(Self::dihedral_4()),
            "Q8" => Ok(Self::quaternion_8()),
            _ => Err(GroupError::UnknownCatalog(name.to_string())),
        }
    }

    /// Parse the plain-text group table format:
    /// first line `order N`, then N rows of N indices, then an optional
    /// `names` line followed by N whitespace-separated display names.
    pub fn parse_table(text: &str) -> Result<Self, GroupError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| GroupError::Parse("empty file".into()))?;
        let order: usize = head
            .strip_prefix("order")
            .map(str::trim)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GroupError::Parse(format!("expected `order N`, got `{head}`")))?;
        let mut table = Vec::with_capacity(order);
        for _ in 0..order {
            let row = lines
                .next()
                .ok_or_else(|| GroupError::Parse("table ended early".into()))?;
            let vals: Result<Vec<usize>, _> = row.split_whitespace().map(str::parse).collect();
            table.push(vals.map_err(|e| GroupError::Parse(format!("bad row `{row}`: {e}")))?);
        }
        let mut g = Self::from_table(&table)?;
        if let Some(l) = lines.next() {
            if l == "names" {
                let names: Vec<String> = lines
                    .flat_map(|l| l.split_whitespace())
                    .map(String::from)
                    .collect();
                if names.len() != order {
                    return Err(GroupError::Parse(format!(
                        "names block has {} entries, expected {order}",
                        names.len()
                    )));
                }
                g.names = names;
            }
        }
        Ok(g)
    }

    /// Emit the plain-text table format accepted by [`FiniteGroup::parse_table`].
    pub fn to_table_text(&self) -> String {
        let mut out = format!("order {}\n", self.order);
        for a in 0..self.order {
            for b in 0..self.order {
                if b > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", self.mul(a, b));
            }
            out.push('\n');
        }
        out.push_str("names\n");
        out.push_str(&self.names.join(" "));
        out.push('\n');
        out
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mult[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a]
    }

    /// Conjugate `g` by `q`: `q g q̄`.
    #[inline]
    pub fn conj(&self, q: Elem, g: Elem) -> Elem {
        self.mul(self.mul(q, g), self.inv(q))
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order
    }

    pub fn name(&self, g: Elem) -> &str {
        &self.names[g]
    }

    pub fn set_names(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.order);
        self.names = names;
    }

    /// Order of a single element.
    pub fn elem_order(&self, g: Elem) -> usize {
        let mut x = g;
        let mut n = 1;
        while x != 0 {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

/// A subgroup of a parent group, with its own relabeled group structure.
///
/// `elements[k]` is the parent element behind subgroup index `k`; elements
/// are sorted ascending, so index 0 is the parent identity.
#[derive(Debug, Clone)]
pub struct Subgroup {
    pub elements: Vec<Elem>,
    group: FiniteGroup,
    parent_index: HashMap<Elem, usize>,
}

impl Subgroup {
    /// Build from a subset of parent elements, checking closure.
    pub fn new(parent: &FiniteGroup, mut elements: Vec<Elem>) -> Result<Self, GroupError> {
        elements.sort_unstable();
        elements.dedup();
        let parent_index: HashMap<Elem, usize> =
            elements.iter().enumerate().map(|(k, &g)| (g, k)).collect();
        let n = elements.len();
        let mut table = vec![vec![0usize; n]; n];
        for (a, &ga) in elements.iter().enumerate() {
            for (b, &gb) in elements.iter().enumerate() {
                let gc = parent.mul(ga, gb);
                match parent_index.get(&gc) {
                    Some(&c) => table[a][b] = c,
                    None => return Err(GroupError::NotClosed { a: ga, b: gb }),
                }
            }
        }
        let mut group = FiniteGroup::from_table(&table)?;
        group.set_names(elements.iter().map(|&g| parent.name(g).to_string()).collect());
        Ok(Self { elements, group, parent_index })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// The subgroup as a standalone group over indices `0..order`.
    pub fn as_group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Parent element behind subgroup index `k`.
    #[inline]
    pub fn to_parent(&self, k: usize) -> Elem {
        self.elements[k]
    }

    /// Subgroup index of a parent element, if it belongs to the subgroup.
    #[inline]
    pub fn from_parent(&self, g: Elem) -> Option<usize> {
        self.parent_index.get(&g).copied()
    }

    pub fn contains(&self, g: Elem) -> bool {
        self.parent_index.contains_key(&g)
    }
}

/// Conjugacy class bookkeeping: elements, representative, iterator set, and
/// centralizer, all with deterministic ordering.
#[derive(Debug, Clone)]
pub struct ConjugacyClass {
    /// Class elements `c_i`, sorted ascending; `c_0` is the representative.
    pub elements: Vec<Elem>,
    /// Iterator set `q_i` with `q_i r_C q̄_i = c_i` and `q_0 = identity`.
    pub iterators: Vec<Elem>,
    /// Centralizer `N_C` of the representative.
    pub centralizer: Subgroup,
    label_of: HashMap<Elem, usize>,
}

impl ConjugacyClass {
    /// The chosen representative `r_C` (smallest element index in the class).
    #[inline]
    pub fn representative(&self) -> Elem {
        self.elements[0]
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    /// Label function `i(g)`: the 0-based position of `g` within the class.
    pub fn label(&self, g: Elem) -> Option<usize> {
        self.label_of.get(&g).copied()
    }

    pub fn contains(&self, g: Elem) -> bool {
        self.label_of.contains_key(&g)
    }
}

/// Conjugacy classes of `group`, sorted by minimal element index.
///
/// The representative is the smallest element of each class and `q_i` is the
/// first conjugator in element-index order, so the output is deterministic.
pub fn conjugacy_classes(group: &FiniteGroup) -> Vec<ConjugacyClass> {
    let n = group.order();
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for rep in 0..n {
        if seen[rep] {
            continue;
        }
        let mut elements: Vec<Elem> = group.elements().map(|q| group.conj(q, rep)).collect();
        elements.sort_unstable();
        elements.dedup();
        for &c in &elements {
            seen[c] = true;
        }
        debug_assert_eq!(elements[0], rep);
        let iterators: Vec<Elem> = elements
            .iter()
            .map(|&c| {
                group
                    .elements()
                    .find(|&q| group.conj(q, rep) == c)
                    .expect("class element must be conjugate to the representative")
            })
            .collect();
        let centralizer_elems: Vec<Elem> = group
            .elements()
            .filter(|&m| group.mul(m, rep) == group.mul(rep, m))
            .collect();
        let centralizer =
            Subgroup::new(group, centralizer_elems).expect("centralizers are subgroups");
        let label_of = elements.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        classes.push(ConjugacyClass { elements, iterators, centralizer, label_of });
    }
    classes
}

/// Write `g = q n` with `q ∈ Q_C` and `n ∈ N_C`; the pair is unique.
///
/// Returns `(i, k)` where `q = iterators[i]` and `n = centralizer.elements[k]`.
pub fn decompose_qn(group: &FiniteGroup, class: &ConjugacyClass, g: Elem) -> (usize, usize) {
    // g r ḡ lands on some class element c_i, and then q̄_i g centralizes r.
    let c = group.conj(g, class.representative());
    let i = class.label(c).expect("conjugate of the representative stays in the class");
    let n = group.mul(group.inv(class.iterators[i]), g);
    let k = class
        .centralizer
        .from_parent(n)
        .expect("q̄ g must centralize the representative; corrupted class data");
    (i, k)
}
