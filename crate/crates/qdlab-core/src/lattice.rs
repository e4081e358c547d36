//! The oriented triangular lattice: sites, triangles, ribbons, and the
//! finite regions the constrained-state analysis lives on.
//!
//! Vertices carry integer coordinates (n1, n2) in the basis l1 = (1, 0),
//! l2 = (1/2, sqrt(3)/2). Every geometric edge has one canonical orientation
//! pointing left to right, i.e. one of the steps E = (1,0), NE = (0,1),
//! SE = (1,-1). Faces are triangles keyed by a base vertex and an up/down
//! flag. All positivity tests are exact integer cross products.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("vertices {0:?} and {1:?} are not nearest neighbours")]
    NotNeighbours(Vertex, Vertex),
    #[error("vertex set {0:?} is not a face")]
    NotAFace([Vertex; 3]),
    #[error("site vertex {vertex:?} does not lie on face {face:?}")]
    BadSite { vertex: Vertex, face: Face },
    #[error("invalid {kind:?} triangle: {reason}")]
    BadTriangle { kind: TriangleKind, reason: String },
    #[error("ribbon triangles {0} and {1} are not composable")]
    NotComposable(usize, usize),
    #[error("edge {0:?} appears in two ribbon triangles")]
    EdgeReused(Edge),
    #[error("ribbon mixes positive and negative triangles")]
    MixedSign,
    #[error("region radius must be at least 1")]
    RadiusZero,
}

/// Lattice vertex in (n1, n2) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Vertex {
    pub n1: i32,
    pub n2: i32,
}

pub const fn v(n1: i32, n2: i32) -> Vertex {
    Vertex { n1, n2 }
}

impl Vertex {
    pub fn add(self, d: (i32, i32)) -> Vertex {
        v(self.n1 + d.0, self.n2 + d.1)
    }

    /// Graph distance on the triangular lattice.
    pub fn dist(self, other: Vertex) -> u32 {
        let q = (self.n1 - other.n1).abs() as u32;
        let r = (self.n2 - other.n2).abs() as u32;
        let s = (self.n1 - other.n1 + self.n2 - other.n2).abs() as u32;
        (q + r + s) / 2
    }

    /// Position scaled by 18 (exact integers for orientation tests).
    fn p18(self) -> (i64, i64) {
        ((18 * self.n1 + 9 * self.n2) as i64, (18 * self.n2) as i64)
    }

    /// Rotate by 60 degrees counterclockwise about the origin.
    pub fn rot60(self) -> Vertex {
        v(-self.n2, self.n1 + self.n2)
    }
}

/// The six unit steps to nearest neighbours, counterclockwise from E.
pub const STEPS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Canonical (left-to-right) edge directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeDir {
    /// (1, 0)
    E,
    /// (0, 1)
    NE,
    /// (1, -1)
    SE,
}

impl EdgeDir {
    pub fn step(self) -> (i32, i32) {
        match self {
            EdgeDir::E => (1, 0),
            EdgeDir::NE => (0, 1),
            EdgeDir::SE => (1, -1),
        }
    }
}

/// A geometric edge in its canonical left-to-right orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub a: Vertex,
    pub dir: EdgeDir,
}

impl Edge {
    /// Canonical edge through two neighbouring vertices.
    pub fn between(x: Vertex, y: Vertex) -> Result<Edge, LatticeError> {
        let d = (y.n1 - x.n1, y.n2 - x.n2);
        match d {
            (1, 0) => Ok(Edge { a: x, dir: EdgeDir::E }),
            (0, 1) => Ok(Edge { a: x, dir: EdgeDir::NE }),
            (1, -1) => Ok(Edge { a: x, dir: EdgeDir::SE }),
            (-1, 0) => Ok(Edge { a: y, dir: EdgeDir::E }),
            (0, -1) => Ok(Edge { a: y, dir: EdgeDir::NE }),
            (-1, 1) => Ok(Edge { a: y, dir: EdgeDir::SE }),
            _ => Err(LatticeError::NotNeighbours(x, y)),
        }
    }

    /// Initial vertex of the canonical orientation.
    pub fn from_vertex(self) -> Vertex {
        self.a
    }

    /// Final vertex of the canonical orientation.
    pub fn to_vertex(self) -> Vertex {
        self.a.add(self.dir.step())
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        (self.from_vertex(), self.to_vertex())
    }

    /// Face to the left of the canonical orientation.
    pub fn left_face(self) -> Face {
        match self.dir {
            EdgeDir::E => Face::up(self.a),
            EdgeDir::NE => Face::down(self.a.add((-1, 1))),
            EdgeDir::SE => Face::down(self.a),
        }
    }

    /// Face to the right of the canonical orientation.
    pub fn right_face(self) -> Face {
        match self.dir {
            EdgeDir::E => Face::down(self.a),
            EdgeDir::NE => Face::up(self.a),
            EdgeDir::SE => Face::up(self.a.add((0, -1))),
        }
    }

    /// The oriented dual edge: it crosses from the right face to the left face.
    pub fn dual(self) -> (Face, Face) {
        (self.right_face(), self.left_face())
    }

    pub fn touches(self, w: Vertex) -> bool {
        self.from_vertex() == w || self.to_vertex() == w
    }
}

/// An edge with a traversal orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OrientedEdge {
    pub from: Vertex,
    pub to: Vertex,
}

impl OrientedEdge {
    pub fn new(from: Vertex, to: Vertex) -> Result<Self, LatticeError> {
        Edge::between(from, to)?;
        Ok(Self { from, to })
    }

    pub fn reversed(self) -> Self {
        Self { from: self.to, to: self.from }
    }

    /// Canonical edge plus whether the traversal follows it forwards.
    pub fn canonical(self) -> (Edge, bool) {
        let e = Edge::between(self.from, self.to).expect("constructed from neighbours");
        (e, e.from_vertex() == self.from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FaceKind {
    Up,
    Down,
}

/// A triangular face keyed by its base vertex.
///
/// `Up` has vertices {v, v+(1,0), v+(0,1)}, `Down` has {v, v+(1,-1), v+(1,0)},
/// both listed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Face {
    pub base: Vertex,
    pub kind: FaceKind,
}

impl Face {
    pub fn up(base: Vertex) -> Face {
        Face { base, kind: FaceKind::Up }
    }

    pub fn down(base: Vertex) -> Face {
        Face { base, kind: FaceKind::Down }
    }

    /// Vertices in counterclockwise order starting at the base.
    pub fn vertices(self) -> [Vertex; 3] {
        match self.kind {
            FaceKind::Up => [self.base, self.base.add((1, 0)), self.base.add((0, 1))],
            FaceKind::Down => [self.base, self.base.add((1, -1)), self.base.add((1, 0))],
        }
    }

    pub fn edges(self) -> [Edge; 3] {
        let [a, b, c] = self.vertices();
        [
            Edge::between(a, b).unwrap(),
            Edge::between(b, c).unwrap(),
            Edge::between(c, a).unwrap(),
        ]
    }

    pub fn contains_vertex(self, w: Vertex) -> bool {
        self.vertices().contains(&w)
    }

    pub fn from_vertices(mut vs: [Vertex; 3]) -> Result<Face, LatticeError> {
        vs.sort();
        for base in vs {
            for kind in [FaceKind::Up, FaceKind::Down] {
                let f = Face { base, kind };
                let mut fv = f.vertices();
                fv.sort();
                if fv == vs {
                    return Ok(f);
                }
            }
        }
        Err(LatticeError::NotAFace(vs))
    }

    /// Face center scaled by 18.
    fn c18(self) -> (i64, i64) {
        let [a, b, c] = self.vertices();
        let (ax, ay) = a.p18();
        let (bx, by) = b.p18();
        let (cx, cy) = c.p18();
        ((ax + bx + cx) / 3, (ay + by + cy) / 3)
    }

    pub fn rot60(self) -> Face {
        let [a, b, c] = self.vertices();
        Face::from_vertices([a.rot60(), b.rot60(), c.rot60()]).expect("rotation preserves faces")
    }
}

/// The six faces around a vertex, counterclockwise; sector k spans angles
/// [60k, 60(k+1)).
pub fn faces_at(w: Vertex) -> [Face; 6] {
    [
        Face::up(w),
        Face::down(w.add((-1, 1))),
        Face::up(w.add((-1, 0))),
        Face::down(w.add((-1, 0))),
        Face::up(w.add((0, -1))),
        Face::down(w),
    ]
}

/// The six edges at a vertex; edge k points at angle 60k and separates
/// sectors k-1 and k of [`faces_at`].
pub fn edges_at(w: Vertex) -> [Edge; 6] {
    [
        Edge { a: w, dir: EdgeDir::E },
        Edge { a: w, dir: EdgeDir::NE },
        Edge { a: w.add((-1, 1)), dir: EdgeDir::SE },
        Edge { a: w.add((-1, 0)), dir: EdgeDir::E },
        Edge { a: w.add((0, -1)), dir: EdgeDir::NE },
        Edge { a: w, dir: EdgeDir::SE },
    ]
}

/// A site: a vertex on the boundary of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Site {
    pub vertex: Vertex,
    pub face: Face,
}

impl Site {
    pub fn new(vertex: Vertex, face: Face) -> Result<Site, LatticeError> {
        if !face.contains_vertex(vertex) {
            return Err(LatticeError::BadSite { vertex, face });
        }
        Ok(Site { vertex, face })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TriangleKind {
    Direct,
    Dual,
}

/// A direct or dual triangle between two sites over one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Triangle {
    pub kind: TriangleKind,
    pub s0: Site,
    pub s1: Site,
    pub edge: Edge,
}

fn cross(a: (i64, i64), b: (i64, i64)) -> i64 {
    a.0 * b.1 - a.1 * b.0
}

impl Triangle {
    pub fn direct(s0: Site, s1: Site) -> Result<Triangle, LatticeError> {
        if s0.face != s1.face {
            return Err(LatticeError::BadTriangle {
                kind: TriangleKind::Direct,
                reason: format!("sites must share a face: {:?} vs {:?}", s0.face, s1.face),
            });
        }
        let edge = Edge::between(s0.vertex, s1.vertex)?;
        Ok(Triangle { kind: TriangleKind::Direct, s0, s1, edge })
    }

    pub fn dual(s0: Site, s1: Site) -> Result<Triangle, LatticeError> {
        if s0.vertex != s1.vertex {
            return Err(LatticeError::BadTriangle {
                kind: TriangleKind::Dual,
                reason: format!("sites must share a vertex: {:?} vs {:?}", s0.vertex, s1.vertex),
            });
        }
        let shared: Vec<Edge> = s0
            .face
            .edges()
            .into_iter()
            .filter(|e| s1.face.edges().contains(e))
            .collect();
        let [edge] = shared[..] else {
            return Err(LatticeError::BadTriangle {
                kind: TriangleKind::Dual,
                reason: format!("faces {:?} and {:?} do not share an edge", s0.face, s1.face),
            });
        };
        if !edge.touches(s0.vertex) {
            return Err(LatticeError::BadTriangle {
                kind: TriangleKind::Dual,
                reason: "shared edge does not touch the site vertex".into(),
            });
        }
        Ok(Triangle { kind: TriangleKind::Dual, s0, s1, edge })
    }

    /// The oriented edge `e_tau` of a direct triangle.
    pub fn oriented_edge(&self) -> OrientedEdge {
        debug_assert_eq!(self.kind, TriangleKind::Direct);
        OrientedEdge { from: self.s0.vertex, to: self.s1.vertex }
    }

    pub fn reversed(&self) -> Triangle {
        Triangle { kind: self.kind, s0: self.s1, s1: self.s0, edge: self.edge }
    }

    /// Positivity per the left/right rules: a direct triangle is positive when
    /// its face lies left of `e_tau`; a dual one when its vertex lies right of
    /// the oriented dual edge `(f(s0), f(s1))`.
    pub fn is_positive(&self) -> bool {
        match self.kind {
            TriangleKind::Direct => {
                let a = self.s0.vertex.p18();
                let b = self.s1.vertex.p18();
                let c = self.s0.face.c18();
                cross((b.0 - a.0, b.1 - a.1), (c.0 - a.0, c.1 - a.1)) > 0
            }
            TriangleKind::Dual => {
                let c0 = self.s0.face.c18();
                let c1 = self.s1.face.c18();
                let p = self.s0.vertex.p18();
                cross((c1.0 - c0.0, c1.1 - c0.1), (p.0 - c0.0, p.1 - c0.1)) < 0
            }
        }
    }
}

/// An ordered, composable, edge-disjoint tuple of triangles of uniform sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ribbon {
    triangles: Vec<Triangle>,
}

impl Ribbon {
    pub fn new(triangles: Vec<Triangle>) -> Result<Ribbon, LatticeError> {
        for i in 1..triangles.len() {
            if triangles[i - 1].s1 != triangles[i].s0 {
                return Err(LatticeError::NotComposable(i - 1, i));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &triangles {
            if !seen.insert(t.edge) {
                return Err(LatticeError::EdgeReused(t.edge));
            }
        }
        if let Some(first) = triangles.first() {
            let sign = first.is_positive();
            if triangles.iter().any(|t| t.is_positive() != sign) {
                return Err(LatticeError::MixedSign);
            }
        }
        Ok(Ribbon { triangles })
    }

    pub fn empty() -> Ribbon {
        Ribbon { triangles: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn start(&self) -> Option<Site> {
        self.triangles.first().map(|t| t.s0)
    }

    pub fn end(&self) -> Option<Site> {
        self.triangles.last().map(|t| t.s1)
    }

    pub fn is_closed(&self) -> bool {
        !self.is_empty() && self.start() == self.end()
    }

    pub fn is_positive(&self) -> Option<bool> {
        self.triangles.first().map(|t| t.is_positive())
    }

    pub fn concat(&self, other: &Ribbon) -> Result<Ribbon, LatticeError> {
        let mut ts = self.triangles.clone();
        ts.extend_from_slice(&other.triangles);
        Ribbon::new(ts)
    }

    /// Split into a prefix of `k` triangles and the remainder.
    pub fn split_at(&self, k: usize) -> (Ribbon, Ribbon) {
        (
            Ribbon { triangles: self.triangles[..k].to_vec() },
            Ribbon { triangles: self.triangles[k..].to_vec() },
        )
    }

    pub fn reversed(&self) -> Ribbon {
        Ribbon { triangles: self.triangles.iter().rev().map(Triangle::reversed).collect() }
    }

    /// The ordered oriented edges of the direct triangles.
    pub fn direct_path(&self) -> Vec<OrientedEdge> {
        self.triangles
            .iter()
            .filter(|t| t.kind == TriangleKind::Direct)
            .map(Triangle::oriented_edge)
            .collect()
    }

    /// Edges of all triangles, in ribbon order.
    pub fn support(&self) -> Vec<Edge> {
        self.triangles.iter().map(|t| t.edge).collect()
    }

    /// The closed counterclockwise direct ribbon around `f(s)`, based at `s`.
    pub fn elementary_direct(s: Site) -> Ribbon {
        let vs = s.face.vertices();
        let k = vs.iter().position(|&w| w == s.vertex).expect("site vertex on face");
        let w = |i: usize| vs[(k + i) % 3];
        let site = |i: usize| Site::new(w(i), s.face).unwrap();
        Ribbon::new(vec![
            Triangle::direct(site(0), site(1)).unwrap(),
            Triangle::direct(site(1), site(2)).unwrap(),
            Triangle::direct(site(2), site(0)).unwrap(),
        ])
        .expect("elementary direct ribbon is valid")
    }

    /// The closed counterclockwise dual ribbon around `v(s)`, based at `s`.
    ///
    /// Counterclockwise face order makes this a negative ribbon, which is what
    /// gives the gauge transformations their left group law.
    pub fn elementary_dual(s: Site) -> Ribbon {
        let fs = faces_at(s.vertex);
        let k = fs.iter().position(|&f| f == s.face).expect("site face at vertex");
        let f = |i: usize| fs[(k + i) % 6];
        let site = |i: usize| Site::new(s.vertex, f(i)).unwrap();
        let tris: Vec<Triangle> =
            (0..6).map(|i| Triangle::dual(site(i), site(i + 1)).unwrap()).collect();
        Ribbon::new(tris).expect("elementary dual ribbon is valid")
    }
}

/// Dual triangles at `vertex` rotating clockwise from `from` to `to`
/// (exclusive bounds are the sites themselves). Clockwise keeps them positive.
fn dual_connector_cw(vertex: Vertex, from: Face, to: Face) -> Vec<Triangle> {
    let fs = faces_at(vertex);
    let pos = |f: Face| fs.iter().position(|&x| x == f).expect("face at vertex");
    let mut cur = pos(from);
    let target = pos(to);
    let mut out = Vec::new();
    while cur != target {
        let next = (cur + 5) % 6;
        let s0 = Site::new(vertex, fs[cur]).unwrap();
        let s1 = Site::new(vertex, fs[next]).unwrap();
        out.push(Triangle::dual(s0, s1).unwrap());
        cur = next;
    }
    out
}

/// A lattice isometry: rotate by 60k counterclockwise, then translate.
#[derive(Debug, Clone, Copy)]
struct Isometry {
    rot_k: usize,
    translate: Vertex,
}

impl Isometry {
    fn vertex(&self, mut w: Vertex) -> Vertex {
        for _ in 0..self.rot_k {
            w = w.rot60();
        }
        w.add((self.translate.n1, self.translate.n2))
    }

    fn face(&self, f: Face) -> Face {
        let [a, b, c] = f.vertices();
        Face::from_vertices([self.vertex(a), self.vertex(b), self.vertex(c)])
            .expect("isometries preserve faces")
    }

    fn site(&self, s: Site) -> Site {
        Site::new(self.vertex(s.vertex), self.face(s.face)).expect("isometries preserve sites")
    }

    fn triangle(&self, t: &Triangle) -> Triangle {
        let s0 = self.site(t.s0);
        let s1 = self.site(t.s1);
        match t.kind {
            TriangleKind::Direct => Triangle::direct(s0, s1).unwrap(),
            TriangleKind::Dual => Triangle::dual(s0, s1).unwrap(),
        }
    }

    fn ribbon(&self, r: &Ribbon) -> Ribbon {
        Ribbon::new(r.triangles.iter().map(|t| self.triangle(t)).collect())
            .expect("isometries preserve ribbons")
    }
}

/// The vertices at distance exactly `m` from `center`, counterclockwise
/// starting at `center + (m, 0)`.
fn ring(center: Vertex, m: i32) -> Vec<Vertex> {
    debug_assert!(m >= 1);
    let corners_dirs: [(i32, i32); 6] = [(-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1)];
    let mut out = Vec::with_capacity(6 * m as usize);
    let mut w = center.add((m, 0));
    for d in corners_dirs {
        for _ in 0..m {
            out.push(w);
            w = w.add(d);
        }
    }
    debug_assert_eq!(w, center.add((m, 0)));
    out
}

/// A finite region: the vertex/face/edge sets around an origin site plus the
/// fiducial and boundary ribbons, with a canonical edge indexing.
#[derive(Debug, Clone)]
pub struct Region {
    pub origin: Site,
    pub radius: usize,
    /// V_n, sorted.
    pub vertices: Vec<Vertex>,
    /// V_n without the origin vertex, sorted.
    pub interior_vertices: Vec<Vertex>,
    /// The outer vertex ring V_{n+1} \ V_n, sorted.
    pub outer_vertices: Vec<Vertex>,
    /// F_n, sorted.
    pub faces: Vec<Face>,
    /// E_n in canonical index order.
    pub edges: Vec<Edge>,
    /// Indices into `edges` of the boundary edges, in counterclockwise
    /// traversal order of the boundary ribbon.
    pub boundary_edges: Vec<usize>,
    /// Fiducial ribbon from the origin site out to the boundary ring.
    pub fiducial: Ribbon,
    /// Closed boundary ribbon based at the fiducial end site.
    pub boundary_ribbon: Ribbon,
    edge_index: HashMap<Edge, usize>,
    vertex_set: BTreeSet<Vertex>,
    interior_set: BTreeSet<Vertex>,
}

impl Region {
    /// Build the radius-`n` region around `origin`.
    ///
    /// The fiducial ribbon's direct path runs n+1 straight edges so that its
    /// end vertex sits on the outer ring: that way the fiducial flux projector
    /// commutes with every interior gauge projector and the boundary ribbon
    /// can be based at the fiducial end site.
    pub fn build(origin: Site, n: usize) -> Result<Region, LatticeError> {
        if n == 0 {
            return Err(LatticeError::RadiusZero);
        }
        let v0 = origin.vertex;
        let nn = n as i32;

        // The six sites at v0 are indexed by face sector; the canonical frame
        // has the origin face in sector 1 (straight above v0).
        let sector = faces_at(v0)
            .iter()
            .position(|&f| f == origin.face)
            .ok_or(LatticeError::BadSite { vertex: v0, face: origin.face })?;
        let iso = Isometry { rot_k: (sector + 5) % 6, translate: v0 };

        let mut vertices: Vec<Vertex> = Vec::new();
        vertices.push(v0);
        for m in 1..=nn {
            vertices.extend(ring(v0, m));
        }
        vertices.sort_unstable();
        let vertex_set: BTreeSet<Vertex> = vertices.iter().copied().collect();

        let mut face_set: BTreeSet<Face> = BTreeSet::new();
        for &w in &vertices {
            face_set.extend(faces_at(w));
        }
        let faces: Vec<Face> = face_set.iter().copied().collect();

        let mut edge_count: BTreeMap<Edge, usize> = BTreeMap::new();
        for f in &faces {
            for e in f.edges() {
                *edge_count.entry(e).or_insert(0) += 1;
            }
        }
        let edges: Vec<Edge> = edge_count.keys().copied().collect();
        let edge_index: HashMap<Edge, usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

        let interior_vertices: Vec<Vertex> =
            vertices.iter().copied().filter(|&w| w != v0).collect();
        let outer_vertices: Vec<Vertex> = {
            let mut o = ring(v0, nn + 1);
            o.sort_unstable();
            o
        };

        // Fiducial ribbon in the canonical frame, then mapped to the origin.
        let canon_origin = v(0, 0);
        let mut tris: Vec<Triangle> = Vec::new();
        let f_north = Face::down(v(-1, 1));
        tris.push(
            Triangle::dual(
                Site::new(canon_origin, f_north).unwrap(),
                Site::new(canon_origin, Face::up(canon_origin)).unwrap(),
            )
            .unwrap(),
        );
        for i in 0..=nn {
            let a = v(i, 0);
            let b = v(i + 1, 0);
            let f = Face::up(a);
            tris.push(
                Triangle::direct(Site::new(a, f).unwrap(), Site::new(b, f).unwrap()).unwrap(),
            );
            if i < nn {
                tris.extend(dual_connector_cw(b, f, Face::up(b)));
            }
        }
        let fiducial = iso.ribbon(&Ribbon::new(tris)?);

        // Boundary ribbon in the canonical frame: direct triangles along the
        // outer ring counterclockwise, dual connectors at each ring vertex.
        let loop_vs = ring(canon_origin, nn + 1);
        let l = loop_vs.len();
        let seg_face = |t: usize| -> Face {
            let oe = OrientedEdge { from: loop_vs[t], to: loop_vs[(t + 1) % l] };
            let (e, fwd) = oe.canonical();
            if fwd {
                e.left_face()
            } else {
                e.right_face()
            }
        };
        let mut btris: Vec<Triangle> = Vec::new();
        for t in 0..l {
            let f = seg_face(t);
            btris.push(
                Triangle::direct(
                    Site::new(loop_vs[t], f).unwrap(),
                    Site::new(loop_vs[(t + 1) % l], f).unwrap(),
                )
                .unwrap(),
            );
            btris.extend(dual_connector_cw(loop_vs[(t + 1) % l], f, seg_face((t + 1) % l)));
        }
        let boundary_ribbon = iso.ribbon(&Ribbon::new(btris)?);

        let boundary_edges: Vec<usize> = boundary_ribbon
            .direct_path()
            .iter()
            .map(|oe| edge_index[&oe.canonical().0])
            .collect();

        let interior_set: BTreeSet<Vertex> = interior_vertices.iter().copied().collect();
        Ok(Region {
            origin,
            radius: n,
            vertices,
            interior_vertices,
            outer_vertices,
            faces,
            edges,
            boundary_edges,
            fiducial,
            boundary_ribbon,
            edge_index,
            vertex_set,
            interior_set,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_idx(&self, e: Edge) -> Option<usize> {
        self.edge_index.get(&e).copied()
    }

    pub fn contains_vertex(&self, w: Vertex) -> bool {
        self.vertex_set.contains(&w)
    }

    /// Interior vertices carry gauge freedom; everything else is pinned.
    pub fn is_interior(&self, w: Vertex) -> bool {
        self.interior_set.contains(&w)
    }

    /// Boundary edges as a set of canonical edges.
    pub fn boundary_edge_set(&self) -> BTreeSet<Edge> {
        self.boundary_edges.iter().map(|&i| self.edges[i]).collect()
    }

    /// Faces other than the origin face.
    pub fn faces_without_origin(&self) -> impl Iterator<Item = Face> + '_ {
        let f0 = self.origin.face;
        self.faces.iter().copied().filter(move |&f| f != f0)
    }

    /// The end site of the fiducial ribbon (base site of the boundary ribbon).
    pub fn fiducial_end(&self) -> Site {
        self.fiducial.end().expect("fiducial ribbon is nonempty")
    }

    /// Does the edge set of this region contain every edge of `r`?
    pub fn supports_ribbon(&self, r: &Ribbon) -> bool {
        r.support().iter().all(|e| self.edge_index.contains_key(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let o = v(0, 0);
        assert_eq!(o.dist(v(1, 0)), 1);
        assert_eq!(o.dist(v(1, -1)), 1);
        assert_eq!(o.dist(v(1, 1)), 2);
        assert_eq!(o.dist(v(-2, 1)), 2);
        assert_eq!(o.dist(v(2, -1)), 2);
        // BFS oracle over a small ball.
        let mut dist = HashMap::from([(o, 0u32)]);
        let mut frontier = vec![o];
        for d in 1..=4u32 {
            let mut next = Vec::new();
            for &w in &frontier {
                for s in STEPS {
                    let u = w.add(s);
                    dist.entry(u).or_insert_with(|| {
                        next.push(u);
                        d
                    });
                }
            }
            frontier = next;
        }
        for (&w, &d) in &dist {
            assert_eq!(o.dist(w), d, "distance to {w:?}");
        }
    }

    #[test]
    fn edge_face_adjacency() {
        // Every edge lies in exactly its left and right faces.
        for w in [v(0, 0), v(3, -2), v(-1, 4)] {
            for e in edges_at(w) {
                assert!(e.left_face().edges().contains(&e));
                assert!(e.right_face().edges().contains(&e));
                assert_ne!(e.left_face(), e.right_face());
            }
            // Sector convention: edge k separates faces k-1 and k.
            let fs = faces_at(w);
            let es = edges_at(w);
            for k in 0..6 {
                let shared: Vec<Edge> = fs[k]
                    .edges()
                    .into_iter()
                    .filter(|e| fs[(k + 5) % 6].edges().contains(e))
                    .collect();
                assert_eq!(shared, vec![es[k]]);
            }
        }
    }

    #[test]
    fn rot60_preserves_structure() {
        let e = Edge { a: v(2, -1), dir: EdgeDir::SE };
        let (x, y) = e.endpoints();
        let e2 = Edge::between(x.rot60(), y.rot60()).unwrap();
        assert_eq!(e2.left_face(), e.left_face().rot60());
        assert_eq!(e2.right_face(), e.right_face().rot60());
        assert_eq!(v(1, 0).rot60(), v(0, 1));
        assert_eq!(v(0, 1).rot60(), v(-1, 1));
    }

    #[test]
    fn elementary_ribbons() {
        for w in [v(0, 0), v(2, 1)] {
            for f in faces_at(w) {
                let s = Site::new(w, f).unwrap();
                let tri = Ribbon::elementary_direct(s);
                assert_eq!(tri.len(), 3);
                assert!(tri.is_closed());
                assert_eq!(tri.start(), Some(s));
                assert_eq!(tri.is_positive(), Some(true));
                let mut visited: Vec<Edge> =
                    tri.direct_path().iter().map(|oe| oe.canonical().0).collect();
                visited.sort();
                let mut expect = f.edges().to_vec();
                expect.sort();
                assert_eq!(visited, expect, "direct path visits the face edges");

                let star = Ribbon::elementary_dual(s);
                assert_eq!(star.len(), 6);
                assert!(star.is_closed());
                assert_eq!(star.start(), Some(s));
                assert_eq!(star.is_positive(), Some(false));
                assert!(star.direct_path().is_empty());
                let mut sup = star.support();
                sup.sort();
                let mut expect: Vec<Edge> = edges_at(w).to_vec();
                expect.sort();
                assert_eq!(sup, expect);
            }
        }
    }

    #[test]
    fn ribbon_validation_errors() {
        let s = Site::new(v(0, 0), Face::up(v(0, 0))).unwrap();
        let tri = Ribbon::elementary_direct(s);
        // Reusing an edge: concatenating a closed ribbon with itself.
        assert_eq!(tri.concat(&tri).unwrap_err(), LatticeError::EdgeReused(tri.support()[0]));
        // Non-composable: skip a triangle.
        let ts = tri.triangles();
        assert!(matches!(
            Ribbon::new(vec![ts[0], ts[2]]),
            Err(LatticeError::NotComposable(0, 1))
        ));
        // Mixed sign: a positive triangle followed by its reverse is not
        // composable, so build a genuinely mixed pair instead.
        let t0 = ts[0];
        let back = Triangle::direct(t0.s1, t0.s0).unwrap();
        assert!(!back.is_positive());
        assert!(t0.is_positive());
        assert!(matches!(
            Ribbon::new(vec![back.reversed().reversed(), back]),
            Err(LatticeError::NotComposable(0, 1)) | Err(LatticeError::EdgeReused(_))
        ));
    }

    #[test]
    fn reversal_flips_sign_and_path() {
        let s = Site::new(v(0, 0), Face::up(v(0, 0))).unwrap();
        let tri = Ribbon::elementary_direct(s);
        let rev = tri.reversed();
        assert_eq!(rev.is_positive(), Some(false));
        let fwd_path = tri.direct_path();
        let mut rev_path = rev.direct_path();
        rev_path.reverse();
        let flipped: Vec<OrientedEdge> = rev_path.iter().map(|oe| oe.reversed()).collect();
        assert_eq!(fwd_path, flipped);
    }

    /// Literal brute-force region enumeration over a bounding box.
    fn brute_region(origin: Vertex, n: u32) -> (Vec<Vertex>, Vec<Face>, Vec<Edge>, Vec<Edge>) {
        let r = n as i32 + 4;
        let mut vs = Vec::new();
        for n1 in -r..=r {
            for n2 in -r..=r {
                let w = origin.add((n1, n2));
                if origin.dist(w) <= n {
                    vs.push(w);
                }
            }
        }
        vs.sort_unstable();
        let mut fs = BTreeSet::new();
        for n1 in -r..=r {
            for n2 in -r..=r {
                for kind in [FaceKind::Up, FaceKind::Down] {
                    let f = Face { base: origin.add((n1, n2)), kind };
                    if f.vertices().iter().any(|w| vs.binary_search(w).is_ok()) {
                        fs.insert(f);
                    }
                }
            }
        }
        let mut ecount: BTreeMap<Edge, usize> = BTreeMap::new();
        for f in &fs {
            for e in f.edges() {
                *ecount.entry(e).or_insert(0) += 1;
            }
        }
        let es: Vec<Edge> = ecount.keys().copied().collect();
        let boundary: Vec<Edge> =
            ecount.iter().filter(|&(_, &c)| c == 1).map(|(&e, _)| e).collect();
        (vs, fs.into_iter().collect(), es, boundary)
    }

    #[test]
    fn region_counts_n1() {
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        let reg = Region::build(s0, 1).unwrap();
        assert_eq!(reg.vertices.len(), 7);
        assert_eq!(reg.interior_vertices.len(), 6);
        // Golden counts from the brute-force enumerator below.
        assert_eq!(reg.faces.len(), 24);
        assert_eq!(reg.edges.len(), 42);
        assert_eq!(reg.boundary_edges.len(), 12);
        assert_eq!(reg.outer_vertices.len(), 12);

        let (vs, fs, es, be) = brute_region(v(0, 0), 1);
        assert_eq!(reg.vertices, vs);
        assert_eq!(reg.faces, fs);
        assert_eq!(reg.edges, es);
        let mut sorted_boundary: Vec<Edge> =
            reg.boundary_edges.iter().map(|&i| reg.edges[i]).collect();
        sorted_boundary.sort();
        assert_eq!(sorted_boundary, be);
    }

    #[test]
    fn region_matches_brute_force_up_to_3() {
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        for n in 1..=3u32 {
            let reg = Region::build(s0, n as usize).unwrap();
            let (vs, fs, es, be) = brute_region(v(0, 0), n);
            assert_eq!(reg.vertices, vs, "V_{n}");
            assert_eq!(reg.faces, fs, "F_{n}");
            assert_eq!(reg.edges, es, "E_{n}");
            let mut sb: Vec<Edge> = reg.boundary_edges.iter().map(|&i| reg.edges[i]).collect();
            sb.sort();
            assert_eq!(sb, be, "boundary edges at n = {n}");
        }
    }

    #[test]
    fn region_nesting() {
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        let r1 = Region::build(s0, 1).unwrap();
        let r2 = Region::build(s0, 2).unwrap();
        let v1: BTreeSet<_> = r1.vertices.iter().collect();
        let v2: BTreeSet<_> = r2.vertices.iter().collect();
        assert!(v1.is_subset(&v2));
        let e1: BTreeSet<_> = r1.edges.iter().collect();
        let e2: BTreeSet<_> = r2.edges.iter().collect();
        assert!(e1.is_subset(&e2));
        // Boundary edges of the smaller region are interior to the larger.
        for e in r1.boundary_edge_set() {
            assert!(r2.edge_idx(e).is_some());
            assert!(!r2.boundary_edge_set().contains(&e));
        }
        // The annulus support claim behind the boundary label changers:
        // the boundary ribbon of the larger region avoids the smaller region.
        for e in r2.boundary_ribbon.support() {
            assert!(r1.edge_idx(e).is_none());
        }
    }

    #[test]
    fn fiducial_ribbon_shape() {
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        for n in 1..=3usize {
            let reg = Region::build(s0, n).unwrap();
            let fid = &reg.fiducial;
            assert_eq!(fid.len(), 3 * n + 2);
            assert_eq!(fid.is_positive(), Some(true));
            assert_eq!(fid.start(), Some(s0));
            // Straight direct path of n+1 east edges ending on the outer ring.
            let path = fid.direct_path();
            assert_eq!(path.len(), n + 1);
            for (i, oe) in path.iter().enumerate() {
                assert_eq!(oe.from, v(i as i32, 0));
                assert_eq!(oe.to, v(i as i32 + 1, 0));
            }
            let end = fid.end().unwrap();
            assert_eq!(end.vertex, v(n as i32 + 1, 0));
            assert!(matches!(fid.triangles().last().unwrap().kind, TriangleKind::Direct));
            // Supported inside E_n, away from the boundary edges.
            assert!(reg.supports_ribbon(fid));
            let bset = reg.boundary_edge_set();
            for e in fid.support() {
                assert!(!bset.contains(&e));
            }
        }
    }

    #[test]
    fn boundary_ribbon_shape() {
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        for n in 1..=2usize {
            let reg = Region::build(s0, n).unwrap();
            let b = &reg.boundary_ribbon;
            assert!(b.is_closed());
            assert_eq!(b.is_positive(), Some(true));
            assert_eq!(b.start(), Some(reg.fiducial_end()));
            assert!(reg.supports_ribbon(b));
            // Its direct path enumerates the boundary edges exactly once.
            let path = b.direct_path();
            assert_eq!(path.len(), reg.boundary_edges.len());
            let visited: BTreeSet<Edge> = path.iter().map(|oe| oe.canonical().0).collect();
            assert_eq!(visited, reg.boundary_edge_set());
            assert_eq!(path.len(), 6 * (n + 1));
        }
    }

    #[test]
    fn rotated_origins_work() {
        for w in [v(0, 0), v(3, -1)] {
            for f in faces_at(w) {
                let s0 = Site::new(w, f).unwrap();
                let reg = Region::build(s0, 1).unwrap();
                assert_eq!(reg.vertices.len(), 7);
                assert_eq!(reg.fiducial.start(), Some(s0));
                assert_eq!(reg.fiducial.is_positive(), Some(true));
                assert!(reg.boundary_ribbon.is_closed());
                assert_eq!(reg.boundary_ribbon.is_positive(), Some(true));
                assert_eq!(reg.boundary_ribbon.start(), Some(reg.fiducial_end()));
                assert!(reg.supports_ribbon(&reg.fiducial));
                assert!(reg.supports_ribbon(&reg.boundary_ribbon));
                assert_eq!(
                    reg.fiducial_end().vertex.dist(w),
                    2,
                    "fiducial ends on the outer ring"
                );
            }
        }
    }

    #[test]
    fn radius_zero_rejected() {
        let s0 = Site::new(v(0, 0), Face::up(v(0, 0))).unwrap();
        assert_eq!(Region::build(s0, 0).unwrap_err(), LatticeError::RadiusZero);
    }

    #[test]
    fn concat_endpoints_compose() {
        let s0 = Site::new(v(0, 0), Face::down(v(-1, 1))).unwrap();
        let reg = Region::build(s0, 2).unwrap();
        let fid = &reg.fiducial;
        for k in [1, 3, fid.len() - 1] {
            let (r1, r2) = fid.split_at(k);
            assert_eq!(r1.end(), r2.start());
            let glued = r1.concat(&r2).unwrap();
            assert_eq!(&glued, fid);
            assert_eq!(glued.start(), r1.start());
            assert_eq!(glued.end(), r2.end());
        }
    }
}
