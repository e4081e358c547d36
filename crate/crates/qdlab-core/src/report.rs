//! Report data structures and numeric helpers shared by the experiment
//! drivers and the command-line tool. JSON is the contract; the aligned-text
//! tables are secondary renderings.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::SparseState;
use crate::lab::Lab;
use crate::lattice::{Region, TriangleKind};

pub const SCHEMA_VERSION: u32 = 1;

/// One named check with its observed deviation.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        let name = name.into();
        Self { name, max_deviation, tolerance, pass: max_deviation <= tolerance }
    }
}

/// A full run report: configuration echo, checks, and optional matrices.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<MatrixDump>,
    pub pass: bool,
}

impl Report {
    pub fn new(config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            checks: Vec::new(),
            matrices: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Aligned text rendering, one line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(4);
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {}  max dev {:.3e}  (tol {:.1e})\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.max_deviation,
                c.tolerance,
                width = width
            ));
        }
        for m in &self.matrices {
            out.push('\n');
            out.push_str(&m.to_text());
        }
        out.push_str(&format!("\noverall: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        out
    }
}

/// A labeled complex matrix, serialized entrywise as "re,im" strings.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixDump {
    pub name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<String>>,
}

impl MatrixDump {
    pub fn new(
        name: impl Into<String>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        m: &[Vec<Complex64>],
    ) -> Self {
        let entries = m
            .iter()
            .map(|row| row.iter().map(|z| format!("{},{}", z.re, z.im)).collect())
            .collect();
        Self { name: name.into(), row_labels, col_labels, entries }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.name);
        for (r, row) in self.entries.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|s| {
                    let mut it = s.split(',');
                    let re: f64 = it.next().unwrap().parse().unwrap();
                    let im: f64 = it.next().unwrap().parse().unwrap();
                    if im.abs() < 5e-10 {
                        format!("{re:7.4}")
                    } else {
                        format!("{re:.3}{im:+.3}i")
                    }
                })
                .collect();
            out.push_str(&format!("  {:12} {}\n", self.row_labels[r], cells.join(" ")));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (r, row) in self.entries.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", self.row_labels[r], self.col_labels[c], cell));
            }
        }
        out
    }
}

/// Rank of a complex matrix by Gaussian elimination with a pivot tolerance.
pub fn matrix_rank(m: &[Vec<Complex64>], tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let rows = m.len();
    let cols = m[0].len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut rank = 0;
    for c in 0..cols {
        let (best, mag) = (rank..rows)
            .map(|r| (r, a[r][c].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((rank, 0.0));
        if mag <= tol {
            continue;
        }
        a.swap(rank, best);
        let pivot = a[rank][c];
        for r in 0..rows {
            if r != rank {
                let factor = a[r][c] / pivot;
                for k in c..cols {
                    let sub = factor * a[rank][k];
                    a[r][k] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Identity-pattern deviation of a square matrix.
pub fn identity_deviation(m: &[Vec<Complex64>]) -> f64 {
    let mut dev = 0.0f64;
    for (r, row) in m.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            let want = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((z - Complex64::new(want, 0.0)).norm());
        }
    }
    dev
}

/// JSON dump of a sparse state: configuration bytes to "re,im" amplitude.
pub fn state_dump(lab: &Lab, psi: &SparseState) -> serde_json::Value {
    let mut terms: Vec<(String, String)> = psi
        .terms()
        .map(|(cfg, amp)| {
            let key: Vec<String> = cfg.vals().iter().map(|v| v.to_string()).collect();
            (key.join(" "), format!("{},{}", amp.re, amp.im))
        })
        .collect();
    terms.sort();
    serde_json::json!({
        "edge_order": lab.region.edges.iter().map(|e| format!("{:?}", e)).collect::<Vec<_>>(),
        "terms": terms
            .into_iter()
            .map(|(k, v)| serde_json::json!({"config": k, "amp": v}))
            .collect::<Vec<_>>(),
    })
}

/// JSON description of a region: vertex coordinates, edges, faces, and the
/// two distinguished ribbons as triangle lists.
pub fn region_dump(region: &Region) -> serde_json::Value {
    let ribbon_json = |r: &crate::lattice::Ribbon| {
        r.triangles()
            .iter()
            .map(|t| {
                serde_json::json!({
                    "kind": match t.kind {
                        TriangleKind::Direct => "direct",
                        TriangleKind::Dual => "dual",
                    },
                    "s0": format!("{:?}|{:?}", t.s0.vertex, t.s0.face),
                    "s1": format!("{:?}|{:?}", t.s1.vertex, t.s1.face),
                    "edge": format!("{:?}", t.edge),
                    "positive": t.is_positive(),
                })
            })
            .collect::<Vec<_>>()
    };
    serde_json::json!({
        "origin": format!("{:?}|{:?}", region.origin.vertex, region.origin.face),
        "radius": region.radius,
        "vertices": region.vertices.iter().map(|w| [w.n1, w.n2]).collect::<Vec<_>>(),
        "interior_vertices": region.interior_vertices.iter().map(|w| [w.n1, w.n2]).collect::<Vec<_>>(),
        "outer_vertices": region.outer_vertices.iter().map(|w| [w.n1, w.n2]).collect::<Vec<_>>(),
        "faces": region.faces.iter().map(|f| format!("{f:?}")).collect::<Vec<_>>(),
        "edges": region.edges.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>(),
        "boundary_edge_indices": region.boundary_edges,
        "fiducial_ribbon": ribbon_json(&region.fiducial),
        "boundary_ribbon": ribbon_json(&region.boundary_ribbon),
        "counts": {
            "vertices": region.vertices.len(),
            "faces": region.faces.len(),
            "edges": region.edges.len(),
            "boundary_edges": region.boundary_edges.len(),
        },
    })
}
