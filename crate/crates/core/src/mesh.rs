//! Structured triangulations of the unit square and the electrode layout.
//!
//! Sides are numbered counterclockwise starting at the bottom. Each side has an
//! arc coordinate in `[0, 1]` measured from its counterclockwise start corner:
//! bottom from (0,0), right from (1,0), top from (1,1), left from (0,1).
//! Electrodes are numbered counterclockwise from the bottom side as well.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const ALIGN_TOL: f64 = 1e-9;
const MAX_LEVEL: u32 = 12;

/// One side of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bottom = 0,
    Right = 1,
    Top = 2,
    Left = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Side> {
        Side::ALL.get(i).copied()
    }

    /// Counterclockwise successor (the 90° rotation of the square).
    pub fn next(self) -> Side {
        Side::ALL[(self.index() + 1) % 4]
    }

    /// Point of the square at arc coordinate `s` on this side.
    pub fn point(self, s: f64) -> [f64; 2] {
        match self {
            Side::Bottom => [s, 0.0],
            Side::Right => [1.0, s],
            Side::Top => [1.0 - s, 1.0],
            Side::Left => [0.0, 1.0 - s],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    /// Endpoints in counterclockwise order.
    pub nodes: [usize; 2],
    pub side: Side,
    /// Arc coordinates of the two endpoints on `side`; `arc[0] < arc[1]`.
    pub arc: [f64; 2],
    pub electrode: Option<usize>,
}

impl BoundaryEdge {
    pub fn length(&self) -> f64 {
        self.arc[1] - self.arc[0]
    }
}

/// Uniform right-triangle mesh of `[0,1]²` with spacing `2^-level`.
#[derive(Clone, Debug)]
pub struct Mesh {
    level: u32,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    classified: bool,
}

/// Builds the level-`level` mesh. Every lattice cell is split along its
/// lower-left to upper-right diagonal; nodes are numbered row by row.
pub fn build_unit_square_mesh(level: u32) -> Result<Mesh> {
    if level == 0 {
        return Err(Error::InvalidArgument("mesh level must be at least 1".into()));
    }
    if level > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("mesh level {level} is too fine")));
    }
    let cells = 1usize << level;
    let side = cells + 1;
    let h = 1.0 / cells as f64;
    let id = |i: usize, j: usize| j * side + i;

    let mut nodes = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for j in 0..cells {
        for i in 0..cells {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }

    let mut boundary_edges = Vec::with_capacity(4 * cells);
    for s in Side::ALL {
        for e in 0..cells {
            let node_at = |t: usize| match s {
                Side::Bottom => id(t, 0),
                Side::Right => id(cells, t),
                Side::Top => id(cells - t, cells),
                Side::Left => id(0, cells - t),
            };
            boundary_edges.push(BoundaryEdge {
                nodes: [node_at(e), node_at(e + 1)],
                side: s,
                arc: [e as f64 * h, (e + 1) as f64 * h],
                electrode: None,
            });
        }
    }

    Ok(Mesh { level, nodes, triangles, boundary_edges, classified: false })
}

impl Mesh {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn is_classified(&self) -> bool {
        self.classified
    }

    /// Largest `|i - j|` over nodes sharing a triangle.
    pub fn bandwidth(&self) -> usize {
        (1usize << self.level) + 2
    }

    /// Signed area of triangle `t` (positive for counterclockwise orientation).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn centroids(&self) -> Vec<[f64; 2]> {
        (0..self.triangles.len()).map(|t| self.centroid(t)).collect()
    }

    /// Debug dump: a count line, then nodes `x y`, triangles `i j k` and
    /// boundary edges `i j side electrode` (`-1` for no electrode).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for [x, y] in &self.nodes {
            let _ = writeln!(out, "{x} {y}");
        }
        for [i, j, k] in &self.triangles {
            let _ = writeln!(out, "{i} {j} {k}");
        }
        for e in &self.boundary_edges {
            let tag = e.electrode.map_or(-1, |k| k as i64);
            let _ = writeln!(out, "{} {} {} {}", e.nodes[0], e.nodes[1], e.side.index(), tag);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Electrode {
    pub side: Side,
    pub start: f64,
    pub end: f64,
}

impl Electrode {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    pub fn contains(&self, side: Side, s: f64) -> bool {
        side == self.side && s >= self.start && s <= self.end
    }
}

/// `K` equal electrodes covering half of the perimeter, `K/4` per side.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectrodeLayout {
    electrodes: Vec<Electrode>,
}

pub fn electrode_layout(k: usize) -> Result<ElectrodeLayout> {
    if k < 4 || !k.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "electrode count must be a positive multiple of 4, got {k}"
        )));
    }
    let per_side = k / 4;
    let e = 2.0 / k as f64;
    let mut electrodes = Vec::with_capacity(k);
    for side in Side::ALL {
        for i in 0..per_side {
            let start = e / 2.0 + 2.0 * i as f64 * e;
            electrodes.push(Electrode { side, start, end: start + e });
        }
    }
    Ok(ElectrodeLayout { electrodes })
}

impl ElectrodeLayout {
    pub fn count(&self) -> usize {
        self.electrodes.len()
    }

    pub fn electrodes(&self) -> &[Electrode] {
        &self.electrodes
    }

    pub fn electrode(&self, k: usize) -> &Electrode {
        &self.electrodes[k]
    }

    /// Electrode whose closed interval contains the boundary point, if any.
    pub fn electrode_at(&self, side: Side, s: f64) -> Option<usize> {
        self.electrodes.iter().position(|e| e.contains(side, s))
    }
}

/// Tags every boundary edge with the electrode containing it.
///
/// Electrode endpoints must be mesh nodes; an endpoint strictly inside an
/// edge is reported as [`Error::Misaligned`].
pub fn classify_boundary_edges(mut mesh: Mesh, layout: &ElectrodeLayout) -> Result<Mesh> {
    check_alignment(layout, mesh.level)?;
    for edge in &mut mesh.boundary_edges {
        edge.electrode = layout.electrodes().iter().position(|el| {
            el.side == edge.side
                && edge.arc[0] >= el.start - ALIGN_TOL
                && edge.arc[1] <= el.end + ALIGN_TOL
        });
    }
    mesh.classified = true;
    Ok(mesh)
}

/// Fails unless every electrode endpoint lies on the level-`level` lattice.
pub fn check_alignment(layout: &ElectrodeLayout, level: u32) -> Result<()> {
    if level == 0 || level > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("mesh level must be in 1..={MAX_LEVEL}, got {level}")));
    }
    let scale = (1u64 << level) as f64;
    for el in layout.electrodes() {
        for endpoint in [el.start, el.end] {
            let t = endpoint * scale;
            if (t - t.round()).abs() > ALIGN_TOL {
                return Err(Error::Misaligned { side: el.side.index(), endpoint, level });
            }
        }
    }
    Ok(())
}
