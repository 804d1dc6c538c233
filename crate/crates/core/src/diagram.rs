//! Van Kampen diagrams on closed oriented surfaces.
//!
//! A diagram is a set of disks whose boundaries read powers of the relator,
//! glued along edges. Vertices are never stored: every side of a disk boundary
//! is a half-edge, and the corner after half-edge h continues around its vertex
//! at `twin(next(h))`. The orbits of that permutation are the vertices.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use ratlp::rational::{int, rat};
use ratlp::Rational;
use serde::{Deserialize, Serialize};

use crate::pods::{Pod, Rectangle, VerVector};
use crate::words::{primitive_root, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("cannot read diagram: {0}")]
    Format(String),
    #[error("invalid relator: {0}")]
    InvalidRelator(String),
    #[error("edge {edge}: invalid label {label:?}")]
    InvalidEdgeLabel { edge: String, label: String },
    #[error("edge {edge}: {message}")]
    EdgePairingError { edge: String, message: String },
    #[error("disk {disk}: boundary does not read a power of the relator (first mismatch at position {position})")]
    LabelMismatch { disk: usize, position: usize },
    #[error("disk {disk} has degree 0")]
    ZeroDegreeDisk { disk: usize },
    #[error("the vertex after position {position} of disk {disk} has degree 1")]
    DegreeOneVertex { disk: usize, position: usize },
    #[error("the total degree is 0")]
    ZeroTotalDegree,
    #[error("edge {edge}: rectangle {rectangle} pairs two different positions")]
    NotCancelling { edge: String, rectangle: String },
    #[error("edge {edge}: rectangle {rectangle} pairs a position with itself")]
    NotReduced { edge: String, rectangle: String },
    #[error("no edge with id {0}")]
    UnknownEdge(String),
}

impl DiagramError {
    pub fn name(&self) -> &'static str {
        match self {
            DiagramError::Format(_) => "Format",
            DiagramError::InvalidRelator(_) => "InvalidRelator",
            DiagramError::InvalidEdgeLabel { .. } => "InvalidEdgeLabel",
            DiagramError::EdgePairingError { .. } => "EdgePairingError",
            DiagramError::LabelMismatch { .. } => "LabelMismatch",
            DiagramError::ZeroDegreeDisk { .. } => "ZeroDegreeDisk",
            DiagramError::DegreeOneVertex { .. } => "DegreeOneVertex",
            DiagramError::ZeroTotalDegree => "ZeroTotalDegree",
            DiagramError::NotCancelling { .. } => "NotCancelling",
            DiagramError::NotReduced { .. } => "NotReduced",
            DiagramError::UnknownEdge(_) => "UnknownEdge",
        }
    }
}

/// The JSON file format. Boundaries run counterclockwise; an edge label may
/// span several letters and is subdivided on validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramDoc {
    pub relator: String,
    #[serde(default = "one")]
    pub power: i64,
    pub edges: Vec<EdgeDoc>,
    pub disks: Vec<DiskDoc>,
}

fn one() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: i64,
    pub letter: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskDoc {
    pub degree: i64,
    pub boundary: Vec<SideDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideDoc {
    pub edge: i64,
    pub reversed: bool,
}

impl DiagramDoc {
    pub fn from_json(text: &str) -> Result<DiagramDoc, DiagramError> {
        serde_json::from_str(text).map_err(|e| DiagramError::Format(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DiagramDoc, DiagramError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| DiagramError::Format(format!("{}: {e}", path.display())))?;
        DiagramDoc::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// The id from the file; subdivided edges get "id.k".
    pub id: String,
    pub letter: Letter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Side {
    pub edge: usize,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disk {
    pub degree: i64,
    pub boundary: Vec<Side>,
    /// The boundary reads the relator (or its inverse) starting at this offset.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub disks: Vec<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    pub genus: i64,
}

/// A validated diagram with single-letter edges.
#[derive(Debug, Clone)]
pub struct VanKampenDiagram {
    root: Word,
    power: u32,
    edges: Vec<Edge>,
    disks: Vec<Disk>,
    /// Half-edge h of disk d is `start[d] + k`.
    start: Vec<usize>,
    owner: Vec<(usize, usize)>,
    twin: Vec<usize>,
    vertex_of: Vec<usize>,
    orbits: Vec<Vec<usize>>,
    components: Vec<Component>,
}

fn side_letter(edges: &[Edge], s: Side) -> Letter {
    let l = edges[s.edge].letter;
    if s.reversed {
        l.inverse()
    } else {
        l
    }
}

impl VanKampenDiagram {
    pub fn from_doc(doc: &DiagramDoc) -> Result<VanKampenDiagram, DiagramError> {
        let relator = Word::parse(&doc.relator)
            .map_err(|e| DiagramError::InvalidRelator(e.to_string()))?;
        if relator.is_empty() || !relator.is_cyclically_reduced() {
            return Err(DiagramError::InvalidRelator(format!(
                "{} must be non-empty and cyclically reduced",
                doc.relator
            )));
        }
        if doc.power < 1 || doc.power > u32::MAX as i64 {
            return Err(DiagramError::InvalidRelator(format!("power {} must be positive", doc.power)));
        }
        let dec = primitive_root(&relator).expect("non-empty");
        let power = doc.power as u32 * dec.exponent;

        let mut edges = Vec::new();
        let mut pieces: HashMap<i64, Vec<usize>> = HashMap::new();
        for e in &doc.edges {
            let bad = || DiagramError::InvalidEdgeLabel {
                edge: e.id.to_string(),
                label: e.letter.clone(),
            };
            let raw = crate::words::scan_letters(e.letter.trim(), 26).map_err(|_| bad())?;
            if raw.is_empty() {
                return Err(bad());
            }
            if pieces.contains_key(&e.id) {
                return Err(DiagramError::EdgePairingError {
                    edge: e.id.to_string(),
                    message: "duplicate edge id".into(),
                });
            }
            let mut ids = Vec::new();
            for (k, &l) in raw.iter().enumerate() {
                let id = if raw.len() == 1 {
                    e.id.to_string()
                } else {
                    format!("{}.{}", e.id, k + 1)
                };
                ids.push(edges.len());
                edges.push(Edge { id, letter: l });
            }
            pieces.insert(e.id, ids);
        }

        let mut disks = Vec::new();
        for d in &doc.disks {
            let mut boundary = Vec::new();
            for s in &d.boundary {
                let ids = pieces.get(&s.edge).ok_or_else(|| DiagramError::EdgePairingError {
                    edge: s.edge.to_string(),
                    message: "used in a boundary but not declared".into(),
                })?;
                if s.reversed {
                    boundary.extend(ids.iter().rev().map(|&edge| Side { edge, reversed: true }));
                } else {
                    boundary.extend(ids.iter().map(|&edge| Side { edge, reversed: false }));
                }
            }
            disks.push((d.degree, boundary));
        }
        VanKampenDiagram::assemble(dec.root, power, edges, disks)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<VanKampenDiagram, DiagramError> {
        VanKampenDiagram::from_doc(&DiagramDoc::load(path)?)
    }

    /// Checks every invariant and derives vertices and components.
    fn assemble(
        root: Word,
        power: u32,
        edges: Vec<Edge>,
        raw_disks: Vec<(i64, Vec<Side>)>,
    ) -> Result<VanKampenDiagram, DiagramError> {
        let n = root.len();
        // Pairing: once forwards, once reversed.
        let mut uses = vec![[None::<usize>, None::<usize>]; edges.len()];
        let mut start = Vec::new();
        let mut owner = Vec::new();
        for (d, (_, boundary)) in raw_disks.iter().enumerate() {
            start.push(owner.len());
            for (k, s) in boundary.iter().enumerate() {
                let slot = &mut uses[s.edge][s.reversed as usize];
                if slot.is_some() {
                    return Err(DiagramError::EdgePairingError {
                        edge: edges[s.edge].id.clone(),
                        message: format!(
                            "used {} more than once",
                            if s.reversed { "reversed" } else { "forwards" }
                        ),
                    });
                }
                *slot = Some(owner.len());
                owner.push((d, k));
            }
        }
        let mut twin = vec![0; owner.len()];
        for (e, u) in uses.iter().enumerate() {
            match *u {
                [Some(a), Some(b)] => {
                    twin[a] = b;
                    twin[b] = a;
                }
                _ => {
                    return Err(DiagramError::EdgePairingError {
                        edge: edges[e].id.clone(),
                        message: "must appear exactly twice, once reversed".into(),
                    })
                }
            }
        }

        let fwd: Vec<Letter> = root.letters().to_vec();
        let inv: Vec<Letter> = root.inverse().letters().to_vec();
        let mut disks = Vec::new();
        for (d, (degree, boundary)) in raw_disks.into_iter().enumerate() {
            if degree == 0 {
                return Err(DiagramError::ZeroDegreeDisk { disk: d });
            }
            let expected = n * power as usize * degree.unsigned_abs() as usize;
            if boundary.len() != expected {
                return Err(DiagramError::LabelMismatch {
                    disk: d,
                    position: boundary.len().min(expected),
                });
            }
            let base = if degree > 0 { &fwd } else { &inv };
            let read: Vec<Letter> = boundary.iter().map(|&s| side_letter(&edges, s)).collect();
            let mut furthest = 0;
            let mut offset = None;
            for o in 0..n {
                match (0..read.len()).find(|&k| read[k] != base[(o + k) % n]) {
                    None => {
                        offset = Some(o);
                        break;
                    }
                    Some(k) => furthest = furthest.max(k),
                }
            }
            let Some(offset) = offset else {
                return Err(DiagramError::LabelMismatch {
                    disk: d,
                    position: furthest,
                });
            };
            disks.push(Disk {
                degree,
                boundary,
                offset,
            });
        }

        let next = |h: usize| {
            let (d, k) = owner[h];
            start[d] + (k + 1) % disks[d].boundary.len()
        };
        let mut vertex_of = vec![usize::MAX; owner.len()];
        let mut orbits = Vec::new();
        for h0 in 0..owner.len() {
            if vertex_of[h0] != usize::MAX {
                continue;
            }
            let mut orbit = Vec::new();
            let mut h = h0;
            loop {
                vertex_of[h] = orbits.len();
                orbit.push(h);
                h = twin[next(h)];
                if h == h0 {
                    break;
                }
            }
            if orbit.len() == 1 {
                let (disk, position) = owner[h0];
                return Err(DiagramError::DegreeOneVertex { disk, position });
            }
            orbits.push(orbit);
        }

        // Components: union-find over disks.
        let mut parent: Vec<usize> = (0..disks.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for h in 0..owner.len() {
            let a = find(&mut parent, owner[h].0);
            let b = find(&mut parent, owner[twin[h]].0);
            parent[a] = b;
        }
        let mut comp_index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut components: Vec<Component> = Vec::new();
        let mut disk_comp = vec![0; disks.len()];
        for d in 0..disks.len() {
            let r = find(&mut parent, d);
            let c = *comp_index.entry(r).or_insert_with(|| {
                components.push(Component {
                    disks: Vec::new(),
                    vertices: 0,
                    edges: 0,
                    faces: 0,
                    chi: 0,
                    genus: 0,
                });
                components.len() - 1
            });
            disk_comp[d] = c;
            components[c].disks.push(d);
            components[c].faces += 1;
            // Each edge has exactly one forwards side.
            components[c].edges += disks[d].boundary.iter().filter(|s| !s.reversed).count();
        }
        for orbit in &orbits {
            components[disk_comp[owner[orbit[0]].0]].vertices += 1;
        }
        for c in &mut components {
            c.chi = c.vertices as i64 - c.edges as i64 + c.faces as i64;
            c.genus = (2 - c.chi) / 2;
        }

        Ok(VanKampenDiagram {
            root,
            power,
            edges,
            disks,
            start,
            owner,
            twin,
            vertex_of,
            orbits,
            components,
        })
    }

    pub fn root(&self) -> &Word {
        &self.root
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn num_vertices(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    /// Degrees of the vertices, in orbit order.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        self.orbits.iter().map(Vec::len).collect()
    }

    pub fn total_degree(&self) -> i64 {
        self.disks.iter().map(|d| d.degree).sum()
    }

    pub fn chi(&self) -> i64 {
        self.components.iter().map(|c| c.chi).sum()
    }

    /// χ ignoring sphere components.
    pub fn chi_minus(&self) -> i64 {
        self.components.iter().filter(|c| c.chi != 2).map(|c| c.chi).sum()
    }

    fn edge_index(&self, id: &str) -> Result<usize, DiagramError> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| DiagramError::UnknownEdge(id.to_string()))
    }

    /// Position (1-based) and sign of half-edge h in the root.
    fn reading(&self, h: usize) -> (u32, i8) {
        let (d, k) = self.owner[h];
        let disk = &self.disks[d];
        let n = self.root.len();
        let j = (disk.offset + k) % n;
        if disk.degree > 0 {
            (j as u32 + 1, 1)
        } else {
            ((n - j) as u32, -1)
        }
    }

    /// The rectangle of the edge seen from half-edge h.
    fn rectangle(&self, h: usize) -> Rectangle {
        let (i, s) = self.reading(h);
        let (i2, s2) = self.reading(self.twin[h]);
        Rectangle { i, s, i2, s2 }
    }

    fn forward_half_edge(&self, e: usize) -> usize {
        (0..self.owner.len())
            .find(|&h| {
                let (d, k) = self.owner[h];
                let s = self.disks[d].boundary[k];
                s.edge == e && !s.reversed
            })
            .expect("every edge has a forwards side")
    }

    /// Edges whose rectangle pairs a position with itself.
    pub fn offending_rectangles(&self) -> Vec<(String, Rectangle)> {
        let mut out = Vec::new();
        for h in 0..self.owner.len() {
            let (d, k) = self.owner[h];
            let s = self.disks[d].boundary[k];
            if s.reversed {
                continue;
            }
            let r = self.rectangle(h);
            if r.i == r.i2 {
                out.push((self.edges[s.edge].id.clone(), r));
            }
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.offending_rectangles().is_empty()
    }

    /// κ(D) for every disk: Σ over boundary corners of (1/deg − 1/2), plus 1.
    pub fn curvatures(&self) -> Vec<Rational> {
        (0..self.disks.len())
            .map(|d| {
                let len = self.disks[d].boundary.len();
                let mut k = Rational::one();
                for j in 0..len {
                    let deg = self.orbits[self.vertex_of[self.start[d] + j]].len() as i64;
                    k += rat(1, deg) - rat(1, 2);
                }
                k
            })
            .collect()
    }

    /// β(D): corners of D at vertices of degree at least 3.
    pub fn branch_counts(&self) -> Vec<usize> {
        (0..self.disks.len())
            .map(|d| {
                (0..self.disks[d].boundary.len())
                    .filter(|&j| self.orbits[self.vertex_of[self.start[d] + j]].len() >= 3)
                    .count()
            })
            .collect()
    }

    pub fn metrics(&self) -> DiagramMetrics {
        let curvature_per_disk = self.curvatures();
        let chi_from_curvature = curvature_per_disk.iter().fold(Rational::zero(), |a, b| a + b);
        DiagramMetrics {
            vertices: self.num_vertices(),
            edges: self.edges.len(),
            faces: self.disks.len(),
            chi: self.chi(),
            chi_from_curvature,
            chi_minus: self.chi_minus(),
            total_degree: self.total_degree(),
            genus: self.components.iter().map(|c| c.genus).collect(),
            curvature_per_disk,
            branch_counts: self.branch_counts(),
            reduced: self.is_reduced(),
            offending_rectangles: self
                .offending_rectangles()
                .into_iter()
                .map(|(edge, rectangle)| OffendingRectangle { edge, rectangle })
                .collect(),
        }
    }

    /// −2·χ⁻ / |Σ n(D)|, an upper bound for the volume of ⟨S | r^M⟩.
    pub fn volume_upper_bound(&self) -> Result<Rational, DiagramError> {
        let deg = self.total_degree();
        if deg == 0 {
            return Err(DiagramError::ZeroTotalDegree);
        }
        Ok(int(-2 * self.chi_minus()) / int(deg.abs()))
    }

    /// (−2χ + 2Σ(1 − |n(D)|)) / Σ n(D), the quantity lallop minimises.
    pub fn lallop_ratio(&self) -> Result<Rational, DiagramError> {
        let deg = self.total_degree();
        if deg == 0 {
            return Err(DiagramError::ZeroTotalDegree);
        }
        let defect: i64 = self.disks.iter().map(|d| 1 - d.degree.abs()).sum();
        Ok(int(-2 * self.chi() + 2 * defect) / int(deg))
    }

    /// Φ(D): the pod around each vertex, read clockwise.
    pub fn phi(&self) -> Result<VerVector, DiagramError> {
        if let Some((edge, r)) = self.offending_rectangles().into_iter().next() {
            return Err(DiagramError::NotReduced {
                edge,
                rectangle: r.to_string(),
            });
        }
        let n = self.root.len() as u32;
        let mut out = VerVector::new();
        for orbit in &self.orbits {
            let rects = orbit.iter().map(|&h| self.rectangle(h)).collect();
            let pod = Pod::new(rects, n).expect("the corners around a vertex form a pod");
            *out.entry(pod).or_insert_with(Rational::zero) += Rational::one();
        }
        Ok(out)
    }

    /// Cuts out the two disks on either side of a cancelling edge and glues
    /// their remaining boundaries together, folding matching letters.
    pub fn eliminate_cancelling_pair(&self, edge_id: &str) -> Result<VanKampenDiagram, DiagramError> {
        let e = self.edge_index(edge_id)?;
        let h = self.forward_half_edge(e);
        let rect = self.rectangle(h);
        if rect.i != rect.i2 {
            return Err(DiagramError::NotCancelling {
                edge: edge_id.to_string(),
                rectangle: rect.to_string(),
            });
        }
        let h2 = self.twin[h];
        let (d1, k1) = self.owner[h];
        let (d2, k2) = self.owner[h2];
        debug_assert_ne!(d1, d2, "opposite signs put the two sides on different disks");

        let mut disks: Vec<(i64, Vec<Side>)> = Vec::new();
        let mut merged = Vec::new();
        for (d, k) in [(d1, k1), (d2, k2)] {
            let b = &self.disks[d].boundary;
            merged.extend((1..b.len()).map(|j| b[(k + j) % b.len()]));
        }
        let mut removed = vec![false; self.edges.len()];
        removed[e] = true;
        // Other disks may hold the twins of folded sides, so fold over the whole list.
        for (d, disk) in self.disks.iter().enumerate() {
            if d != d1 && d != d2 {
                disks.push((disk.degree, disk.boundary.clone()));
            }
        }
        let merged_degree = self.disks[d1].degree + self.disks[d2].degree;
        disks.push((merged_degree, merged));
        let m = disks.len() - 1;
        loop {
            let b = &disks[m].1;
            let len = b.len();
            let found = (0..len).find(|&j| {
                len >= 2
                    && side_letter(&self.edges, b[j]) == side_letter(&self.edges, b[(j + 1) % len]).inverse()
            });
            let Some(j) = found else { break };
            let a = disks[m].1[j];
            let bb = disks[m].1[(j + 1) % len];
            if a.edge != bb.edge {
                // twin(b) becomes the partner of twin(a) under a's edge.
                removed[bb.edge] = true;
                for (_, bd) in disks.iter_mut() {
                    for s in bd.iter_mut() {
                        if s.edge == bb.edge && s.reversed != bb.reversed {
                            *s = Side {
                                edge: a.edge,
                                reversed: a.reversed,
                            };
                        }
                    }
                }
            } else {
                removed[a.edge] = true;
            }
            let bnd = &mut disks[m].1;
            let (x, y) = (j, (j + 1) % len);
            let (hi, lo) = if x > y { (x, y) } else { (y, x) };
            bnd.remove(hi);
            bnd.remove(lo);
        }
        if disks[m].1.is_empty() {
            disks.pop();
        }
        // Renumber the surviving edges.
        let mut map = vec![usize::MAX; self.edges.len()];
        let mut edges = Vec::new();
        for (i, ed) in self.edges.iter().enumerate() {
            if !removed[i] {
                map[i] = edges.len();
                edges.push(ed.clone());
            }
        }
        for (_, b) in disks.iter_mut() {
            for s in b.iter_mut() {
                s.edge = map[s.edge];
            }
        }
        VanKampenDiagram::assemble(self.root.clone(), self.power, edges, disks)
    }

    /// A file document with one single-letter edge per edge, numbered from 1.
    pub fn to_doc(&self) -> DiagramDoc {
        let relator = self.root.to_string();
        DiagramDoc {
            relator,
            power: self.power as i64,
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| EdgeDoc {
                    id: i as i64 + 1,
                    letter: e.letter.to_string(),
                })
                .collect(),
            disks: self
                .disks
                .iter()
                .map(|d| DiskDoc {
                    degree: d.degree,
                    boundary: d
                        .boundary
                        .iter()
                        .map(|s| SideDoc {
                            edge: s.edge as i64 + 1,
                            reversed: s.reversed,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Parses and validates a diagram document.
pub fn validate_diagram(doc: &DiagramDoc) -> Result<VanKampenDiagram, DiagramError> {
    VanKampenDiagram::from_doc(doc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OffendingRectangle {
    pub edge: String,
    pub rectangle: Rectangle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramMetrics {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    #[serde(with = "crate::rational_serde")]
    pub chi_from_curvature: Rational,
    pub chi_minus: i64,
    #[serde(rename = "degree")]
    pub total_degree: i64,
    pub genus: Vec<i64>,
    #[serde(with = "crate::rational_serde::vec")]
    pub curvature_per_disk: Vec<Rational>,
    pub branch_counts: Vec<usize>,
    pub reduced: bool,
    pub offending_rectangles: Vec<OffendingRectangle>,
}

impl DiagramMetrics {
    /// V − E + F equals the total curvature.
    pub fn gauss_bonnet_holds(&self) -> bool {
        int(self.chi) == self.chi_from_curvature
    }

    /// κ(D) ≤ (6 − β(D))/6 on every disk.
    pub fn branch_bound_holds(&self) -> bool {
        self.curvature_per_disk
            .iter()
            .zip(&self.branch_counts)
            .all(|(k, &b)| *k <= rat(6 - b as i64, 6))
    }
}

/// Disks labelled by the given degrees of `root^power`, each read from a random
/// offset, with sides reading g glued to sides reading g⁻¹ by a random
/// bijection. Needs `root` in the commutator subgroup, or total degree 0.
pub fn random_glued_diagram<R: Rng>(
    root: &Word,
    power: u32,
    degrees: &[i64],
    rng: &mut R,
) -> Result<VanKampenDiagram, DiagramError> {
    let n = root.len();
    let fwd = root.letters();
    let inv = root.inverse();
    let mut reads: Vec<Vec<Letter>> = Vec::new();
    for &deg in degrees {
        if deg == 0 {
            return Err(DiagramError::ZeroDegreeDisk { disk: reads.len() });
        }
        let base = if deg > 0 { fwd } else { inv.letters() };
        let len = n * power as usize * deg.unsigned_abs() as usize;
        let o = rng.random_range(0..n);
        reads.push((0..len).map(|k| base[(o + k) % n]).collect());
    }
    let mut by_letter: BTreeMap<(u32, bool), Vec<(usize, usize)>> = BTreeMap::new();
    for (d, r) in reads.iter().enumerate() {
        for (k, l) in r.iter().enumerate() {
            by_letter.entry((l.generator(), l.is_positive())).or_default().push((d, k));
        }
    }
    let mut disks: Vec<(i64, Vec<Side>)> = degrees
        .iter()
        .zip(&reads)
        .map(|(&deg, r)| {
            (
                deg,
                vec![
                    Side {
                        edge: 0,
                        reversed: false
                    };
                    r.len()
                ],
            )
        })
        .collect();
    let mut edges = Vec::new();
    let gens: Vec<u32> = by_letter.keys().map(|k| k.0).collect();
    for g in gens {
        if !by_letter.contains_key(&(g, true)) && !by_letter.contains_key(&(g, false)) {
            continue;
        }
        let pos = by_letter.get(&(g, true)).cloned().unwrap_or_default();
        let mut neg = by_letter.get(&(g, false)).cloned().unwrap_or_default();
        if pos.len() != neg.len() {
            return Err(DiagramError::EdgePairingError {
                edge: Letter::new(g, true).to_string(),
                message: "unequal numbers of g and g⁻¹ sides".into(),
            });
        }
        by_letter.remove(&(g, true));
        by_letter.remove(&(g, false));
        neg.shuffle(rng);
        for (&(d, k), &(d2, k2)) in pos.iter().zip(&neg) {
            let e = edges.len();
            edges.push(Edge {
                id: (e + 1).to_string(),
                letter: Letter::new(g, true),
            });
            disks[d].1[k] = Side {
                edge: e,
                reversed: false,
            };
            disks[d2].1[k2] = Side {
                edge: e,
                reversed: true,
            };
        }
    }
    let dec = primitive_root(root).map_err(|e| DiagramError::InvalidRelator(e.to_string()))?;
    if dec.exponent != 1 || !dec.conjugator.is_empty() {
        return Err(DiagramError::InvalidRelator(format!(
            "{root} must be cyclically reduced and root-free"
        )));
    }
    VanKampenDiagram::assemble(root.clone(), power, edges, disks)
}
