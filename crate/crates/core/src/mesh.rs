//! Voxelized spatial domain with staggered field placement.
//!
//! Cells are unit cubes of side `spacing`; the domain is the union of masked
//! cells, which may be arbitrarily irregular (checkerboards, slits). Electric
//! degrees of freedom live on cell edges, magnetic ones on cell faces. The
//! electric boundary condition is imposed algebraically: tangential edges on
//! the Γ₁ part of the boundary are simply excluded from the edge DOF space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate axis of an edge direction or face normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two axes following `self` in right-handed cyclic order.
    pub fn cyclic(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    fn unit(self) -> [usize; 3] {
        let mut e = [0; 3];
        e[self.index()] = 1;
        e
    }
}

/// Geometric location of an edge (direction `axis`, origin lattice node) or a
/// face (normal `axis`, lowest-corner lattice node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeomLoc {
    pub axis: Axis,
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl GeomLoc {
    pub fn new(axis: Axis, i: usize, j: usize, k: usize) -> Self {
        GeomLoc { axis, i, j, k }
    }

    fn coords(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }

    fn shifted(&self, axis: Axis) -> GeomLoc {
        let e = axis.unit();
        GeomLoc::new(self.axis, self.i + e[0], self.j + e[1], self.k + e[2])
    }
}

/// Which part of the boundary a boundary face belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryLabel {
    /// Electric condition: tangential E is forced to zero (edges deleted).
    Gamma1,
    /// Natural (magnetic) condition: no action needed.
    Gamma2,
}

/// Assignment of boundary faces to Γ₁ and Γ₂.
///
/// `BoxSides` labels faces lying on the bounding-box surface by side
/// (−x, +x, −y, +y, −z, +z); boundary faces of interior cavities stay Γ₁.
/// `ExplicitGamma2` lists individual boundary faces; listing a face that is
/// not a boundary face is a validation error.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySplit {
    #[default]
    AllGamma1,
    AllGamma2,
    BoxSides { gamma2_sides: [bool; 6] },
    ExplicitGamma2 { faces: Vec<GeomLoc> },
}

/// What a DOF space indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    EEdges,
    HFaces,
    Combined,
}

/// Lightweight descriptor used for conformity checks between operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceInfo {
    pub kind: DofKind,
    pub count: usize,
}

/// Bijection between retained geometric locations and contiguous DOF indices.
///
/// Ordering is deterministic: axis-major, then lexicographic in (i, j, k).
#[derive(Debug, Clone)]
pub struct DofSpace {
    kind: DofKind,
    dims: [[usize; 3]; 3],
    offsets: [usize; 3],
    slot_to_dof: Vec<Option<u32>>,
    dof_to_loc: Vec<GeomLoc>,
}

impl DofSpace {
    fn build(kind: DofKind, dims: [[usize; 3]; 3], retained: &[bool]) -> Self {
        let mut offsets = [0usize; 3];
        let mut total = 0usize;
        for a in 0..3 {
            offsets[a] = total;
            total += dims[a][0] * dims[a][1] * dims[a][2];
        }
        debug_assert_eq!(retained.len(), total);
        let mut slot_to_dof = vec![None; total];
        let mut dof_to_loc = Vec::new();
        for axis in Axis::ALL {
            let d = dims[axis.index()];
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let slot = offsets[axis.index()] + (i * d[1] + j) * d[2] + k;
                        if retained[slot] {
                            slot_to_dof[slot] = Some(dof_to_loc.len() as u32);
                            dof_to_loc.push(GeomLoc::new(axis, i, j, k));
                        }
                    }
                }
            }
        }
        DofSpace {
            kind,
            dims,
            offsets,
            slot_to_dof,
            dof_to_loc,
        }
    }

    pub fn kind(&self) -> DofKind {
        self.kind
    }

    pub fn count(&self) -> usize {
        self.dof_to_loc.len()
    }

    pub fn info(&self) -> SpaceInfo {
        SpaceInfo {
            kind: self.kind,
            count: self.count(),
        }
    }

    fn slot(&self, loc: GeomLoc) -> Option<usize> {
        let d = self.dims[loc.axis.index()];
        let c = loc.coords();
        if c[0] < d[0] && c[1] < d[1] && c[2] < d[2] {
            Some(self.offsets[loc.axis.index()] + (c[0] * d[1] + c[1]) * d[2] + c[2])
        } else {
            None
        }
    }

    /// DOF index of a geometric location, if it carries a DOF.
    pub fn index_of(&self, loc: GeomLoc) -> Option<usize> {
        self.slot(loc)
            .and_then(|s| self.slot_to_dof[s])
            .map(|i| i as usize)
    }

    /// Geometric location of a DOF index.
    pub fn loc_of(&self, dof: usize) -> GeomLoc {
        self.dof_to_loc[dof]
    }

    /// All retained locations in index order.
    pub fn locations(&self) -> &[GeomLoc] {
        &self.dof_to_loc
    }
}

/// Combined (E, H) state: one real value per retained edge and face.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub e: Vec<f64>,
    pub h: Vec<f64>,
}

impl StateVector {
    pub fn zeros(ne: usize, nh: usize) -> Self {
        StateVector {
            e: vec![0.0; ne],
            h: vec![0.0; nh],
        }
    }

    pub fn zeros_like(other: &StateVector) -> Self {
        StateVector::zeros(other.e.len(), other.h.len())
    }

    pub fn len(&self) -> usize {
        self.e.len() + self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn conforms_to(&self, grid: &Grid) -> bool {
        self.e.len() == grid.e_space().count() && self.h.len() == grid.h_space().count()
    }

    /// Plain Euclidean dot product over both blocks (no measure weight).
    pub fn dot_euclid(&self, other: &StateVector) -> f64 {
        let de: f64 = self.e.iter().zip(&other.e).map(|(a, b)| a * b).sum();
        let dh: f64 = self.h.iter().zip(&other.h).map(|(a, b)| a * b).sum();
        de + dh
    }

    /// Norm in the discrete spatial space H for a given cell measure (h³).
    pub fn space_norm(&self, measure: f64) -> f64 {
        (measure * self.dot_euclid(self)).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        self.e.iter_mut().for_each(|v| *v *= c);
        self.h.iter_mut().for_each(|v| *v *= c);
    }

    /// self += c * other
    pub fn add_scaled(&mut self, c: f64, other: &StateVector) {
        for (a, b) in self.e.iter_mut().zip(&other.e) {
            *a += c * b;
        }
        for (a, b) in self.h.iter_mut().zip(&other.h) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }
}

/// The voxel grid: cell mask, boundary classification and both DOF spaces.
#[derive(Debug, Clone)]
pub struct Grid {
    cells: [usize; 3],
    spacing: f64,
    mask: Vec<bool>,
    split: BoundarySplit,
    e_space: DofSpace,
    h_space: DofSpace,
    /// Per face slot: boundary label, None for non-boundary faces.
    face_labels: Vec<Option<BoundaryLabel>>,
    gamma1_faces: usize,
    gamma2_faces: usize,
}

pub fn edge_dims(cells: [usize; 3]) -> [[usize; 3]; 3] {
    let [nx, ny, nz] = cells;
    [
        [nx, ny + 1, nz + 1],
        [nx + 1, ny, nz + 1],
        [nx + 1, ny + 1, nz],
    ]
}

pub fn face_dims(cells: [usize; 3]) -> [[usize; 3]; 3] {
    let [nx, ny, nz] = cells;
    [
        [nx + 1, ny, nz],
        [nx, ny + 1, nz],
        [nx, ny, nz + 1],
    ]
}

fn slot_count(dims: [[usize; 3]; 3]) -> usize {
    dims.iter().map(|d| d[0] * d[1] * d[2]).sum()
}

fn slot_of(dims: [[usize; 3]; 3], loc: GeomLoc) -> usize {
    let offset: usize = dims
        .iter()
        .take(loc.axis.index())
        .map(|d| d[0] * d[1] * d[2])
        .sum();
    let d = dims[loc.axis.index()];
    offset + (loc.i * d[1] + loc.j) * d[2] + loc.k
}

impl Grid {
    /// Build a grid from cell counts, spacing, a per-cell mask and the
    /// boundary split. See [`BoundarySplit`] for how faces are classified.
    pub fn build(
        cells: [usize; 3],
        spacing: f64,
        mask: Vec<bool>,
        split: BoundarySplit,
    ) -> Result<Grid> {
        if cells.contains(&0) {
            return Err(Error::Domain("cells_per_axis components must be >= 1".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!("spacing must be > 0, got {spacing}")));
        }
        let ncells = cells[0] * cells[1] * cells[2];
        if mask.len() != ncells {
            return Err(Error::dim(ncells, mask.len(), "domain mask"));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Domain("domain mask selects no cell".into()));
        }

        let edims = edge_dims(cells);
        let fdims = face_dims(cells);

        let cell_index = |c: [usize; 3]| (c[0] * cells[1] + c[1]) * cells[2] + c[2];
        let masked = |c: [isize; 3]| -> bool {
            if c.iter().zip(&cells).any(|(&x, &n)| x < 0 || x >= n as isize) {
                return false;
            }
            mask[cell_index([c[0] as usize, c[1] as usize, c[2] as usize])]
        };

        // Faces adjacent to at least one masked cell carry H DOFs; faces with
        // exactly one masked neighbor form the boundary.
        let mut face_in_domain = vec![false; slot_count(fdims)];
        let mut face_labels: Vec<Option<BoundaryLabel>> = vec![None; slot_count(fdims)];
        let mut gamma1_faces = 0usize;
        let mut gamma2_faces = 0usize;
        for axis in Axis::ALL {
            let d = fdims[axis.index()];
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let loc = GeomLoc::new(axis, i, j, k);
                        let (inner, outer) = face_neighbor_cells(loc);
                        let m_in = masked(inner);
                        let m_out = masked(outer);
                        if !(m_in || m_out) {
                            continue;
                        }
                        let slot = slot_of(fdims, loc);
                        face_in_domain[slot] = true;
                        if m_in != m_out {
                            let label = classify_boundary_face(&split, cells, loc)?;
                            match label {
                                BoundaryLabel::Gamma1 => gamma1_faces += 1,
                                BoundaryLabel::Gamma2 => gamma2_faces += 1,
                            }
                            face_labels[slot] = Some(label);
                        }
                    }
                }
            }
        }
        if let BoundarySplit::ExplicitGamma2 { faces } = &split {
            for f in faces {
                let slot = slot_of(fdims, *f);
                if face_labels.get(slot).copied().flatten().is_none() {
                    return Err(Error::Validation(format!(
                        "boundary_split lists non-boundary face {f:?}"
                    )));
                }
            }
        }

        // Edges adjacent to at least one masked cell, minus Γ₁ tangential ones.
        let mut edge_retained = vec![false; slot_count(edims)];
        for axis in Axis::ALL {
            let d = edims[axis.index()];
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let loc = GeomLoc::new(axis, i, j, k);
                        if edge_neighbor_cells(loc).into_iter().any(&masked) {
                            edge_retained[slot_of(edims, loc)] = true;
                        }
                    }
                }
            }
        }
        for axis in Axis::ALL {
            let d = fdims[axis.index()];
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let loc = GeomLoc::new(axis, i, j, k);
                        if face_labels[slot_of(fdims, loc)] == Some(BoundaryLabel::Gamma1) {
                            for (edge, _) in face_edge_stencil(loc) {
                                edge_retained[slot_of(edims, edge)] = false;
                            }
                        }
                    }
                }
            }
        }

        let e_space = DofSpace::build(DofKind::EEdges, edims, &edge_retained);
        let h_space = DofSpace::build(DofKind::HFaces, fdims, &face_in_domain);

        Ok(Grid {
            cells,
            spacing,
            mask,
            split,
            e_space,
            h_space,
            face_labels,
            gamma1_faces,
            gamma2_faces,
        })
    }

    /// Full-mask convenience constructor.
    pub fn full(cells: [usize; 3], spacing: f64, split: BoundarySplit) -> Result<Grid> {
        let n = cells[0] * cells[1] * cells[2];
        Grid::build(cells, spacing, vec![true; n], split)
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Cell volume h³: the weight of the discrete L² inner product.
    pub fn measure(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.cells[1] + c[1]) * self.cells[2] + c[2]
    }

    pub fn is_masked(&self, c: [usize; 3]) -> bool {
        self.mask[self.cell_index(c)]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn boundary_split(&self) -> &BoundarySplit {
        &self.split
    }

    pub fn e_space(&self) -> &DofSpace {
        &self.e_space
    }

    pub fn h_space(&self) -> &DofSpace {
        &self.h_space
    }

    pub fn combined_info(&self) -> SpaceInfo {
        SpaceInfo {
            kind: DofKind::Combined,
            count: self.e_space.count() + self.h_space.count(),
        }
    }

    pub fn boundary_face_counts(&self) -> (usize, usize) {
        (self.gamma1_faces, self.gamma2_faces)
    }

    pub fn boundary_label(&self, face: GeomLoc) -> Option<BoundaryLabel> {
        let fdims = face_dims(self.cells);
        self.face_labels.get(slot_of(fdims, face)).copied().flatten()
    }

    /// Masked cells adjacent to an edge (1 to 4 of them).
    pub fn masked_cells_of_edge(&self, loc: GeomLoc) -> Vec<[usize; 3]> {
        edge_neighbor_cells(loc)
            .into_iter()
            .filter_map(|c| self.clip_masked(c))
            .collect()
    }

    /// Masked cells adjacent to a face (1 or 2 of them).
    pub fn masked_cells_of_face(&self, loc: GeomLoc) -> Vec<[usize; 3]> {
        let (a, b) = face_neighbor_cells(loc);
        [a, b].into_iter().filter_map(|c| self.clip_masked(c)).collect()
    }

    fn clip_masked(&self, c: [isize; 3]) -> Option<[usize; 3]> {
        if c.iter().zip(&self.cells).any(|(&x, &n)| x < 0 || x >= n as isize) {
            return None;
        }
        let c = [c[0] as usize, c[1] as usize, c[2] as usize];
        self.mask[self.cell_index(c)].then_some(c)
    }

    /// Node lattice dimensions (nx+1, ny+1, nz+1).
    pub fn node_dims(&self) -> [usize; 3] {
        [self.cells[0] + 1, self.cells[1] + 1, self.cells[2] + 1]
    }

    pub fn node_index(&self, n: [usize; 3]) -> usize {
        let d = self.node_dims();
        (n[0] * d[1] + n[1]) * d[2] + n[2]
    }

    /// The two endpoint nodes of an edge.
    pub fn edge_nodes(&self, loc: GeomLoc) -> ([usize; 3], [usize; 3]) {
        let tail = loc.coords();
        let e = loc.axis.unit();
        let head = [tail[0] + e[0], tail[1] + e[1], tail[2] + e[2]];
        (tail, head)
    }

    /// True per node that lies on a Γ₁-labeled boundary face.
    pub fn gamma1_node_mask(&self) -> Vec<bool> {
        let d = self.node_dims();
        let mut on = vec![false; d[0] * d[1] * d[2]];
        let fdims = face_dims(self.cells);
        for axis in Axis::ALL {
            let fd = fdims[axis.index()];
            for i in 0..fd[0] {
                for j in 0..fd[1] {
                    for k in 0..fd[2] {
                        let loc = GeomLoc::new(axis, i, j, k);
                        if self.face_labels[slot_of(fdims, loc)] == Some(BoundaryLabel::Gamma1) {
                            let (b, c) = loc.axis.cyclic();
                            let base = loc.coords();
                            let eb = b.unit();
                            let ec = c.unit();
                            for db in 0..=1usize {
                                for dc in 0..=1usize {
                                    let n = [
                                        base[0] + db * eb[0] + dc * ec[0],
                                        base[1] + db * eb[1] + dc * ec[1],
                                        base[2] + db * eb[2] + dc * ec[2],
                                    ];
                                    on[self.node_index(n)] = true;
                                }
                            }
                        }
                    }
                }
            }
        }
        on
    }
}

/// The cells on either side of a face, as possibly-out-of-range coordinates.
fn face_neighbor_cells(loc: GeomLoc) -> ([isize; 3], [isize; 3]) {
    let c = loc.coords().map(|x| x as isize);
    let a = loc.axis.index();
    let mut lower = c;
    lower[a] -= 1;
    (lower, c)
}

/// The up-to-four cells sharing an edge, as possibly-out-of-range coordinates.
fn edge_neighbor_cells(loc: GeomLoc) -> [[isize; 3]; 4] {
    let c = loc.coords().map(|x| x as isize);
    let (b, cc) = loc.axis.cyclic();
    let (bi, ci) = (b.index(), cc.index());
    let mut out = [[0isize; 3]; 4];
    let mut idx = 0;
    for db in [-1isize, 0] {
        for dc in [-1isize, 0] {
            let mut cell = c;
            cell[bi] += db;
            cell[ci] += dc;
            out[idx] = cell;
            idx += 1;
        }
    }
    out
}

/// The four edges bounding a face, with circulation signs so that the signed
/// sum divided by the spacing is the face-normal component of curl E.
pub fn face_edge_stencil(face: GeomLoc) -> [(GeomLoc, f64); 4] {
    let (b, c) = face.axis.cyclic();
    let base = GeomLoc::new(c, face.i, face.j, face.k);
    let base_b = GeomLoc::new(b, face.i, face.j, face.k);
    [
        (base.shifted(b), 1.0),
        (base, -1.0),
        (base_b.shifted(c), -1.0),
        (base_b, 1.0),
    ]
}

fn classify_boundary_face(
    split: &BoundarySplit,
    cells: [usize; 3],
    loc: GeomLoc,
) -> Result<BoundaryLabel> {
    Ok(match split {
        BoundarySplit::AllGamma1 => BoundaryLabel::Gamma1,
        BoundarySplit::AllGamma2 => BoundaryLabel::Gamma2,
        BoundarySplit::BoxSides { gamma2_sides } => {
            let a = loc.axis.index();
            let coord = loc.coords()[a];
            let side = if coord == 0 {
                Some(2 * a)
            } else if coord == cells[a] {
                Some(2 * a + 1)
            } else {
                None
            };
            match side {
                Some(s) if gamma2_sides[s] => BoundaryLabel::Gamma2,
                _ => BoundaryLabel::Gamma1,
            }
        }
        BoundarySplit::ExplicitGamma2 { faces } => {
            if faces.contains(&loc) {
                BoundaryLabel::Gamma2
            } else {
                BoundaryLabel::Gamma1
            }
        }
    })
}

/// Discrete L²(Ω)⁶ inner product: h³ times the Euclidean pairing of both blocks.
pub fn inner_product(x: &StateVector, y: &StateVector, grid: &Grid) -> Result<f64> {
    if !x.conforms_to(grid) {
        return Err(Error::dim(
            grid.e_space().count() + grid.h_space().count(),
            x.len(),
            "inner_product lhs",
        ));
    }
    if !y.conforms_to(grid) {
        return Err(Error::dim(
            grid.e_space().count() + grid.h_space().count(),
            y.len(),
            "inner_product rhs",
        ));
    }
    Ok(grid.measure() * x.dot_euclid(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent edge/face enumeration for small full grids: counts by the
    /// closed combinatorial formulas rather than the DofSpace construction.
    fn full_grid_edge_count(n: usize) -> usize {
        3 * n * (n + 1) * (n + 1)
    }

    fn full_grid_face_count(n: usize) -> usize {
        3 * n * n * (n + 1)
    }

    /// Brute-force count of edges that touch the surface of a full n³ box.
    fn boundary_tangential_edge_count(n: usize) -> usize {
        let mut count = 0;
        let edims = edge_dims([n, n, n]);
        for axis in Axis::ALL {
            let d = edims[axis.index()];
            let (b, c) = axis.cyclic();
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let coords = [i, j, k];
                        let on_surface = |ax: Axis| {
                            let v = coords[ax.index()];
                            v == 0 || v == n
                        };
                        if on_surface(b) || on_surface(c) {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn dof_counts_2x2x2_all_gamma1() {
        let g = Grid::full([2, 2, 2], 1.0, BoundarySplit::AllGamma1).unwrap();
        assert_eq!(g.e_space().count(), 6);
        assert_eq!(g.h_space().count(), 36);
        assert_eq!(
            full_grid_edge_count(2) - boundary_tangential_edge_count(2),
            6
        );
        assert_eq!(full_grid_face_count(2), 36);
    }

    #[test]
    fn dof_counts_1x1x1_all_gamma1_empty_e_space() {
        let g = Grid::full([1, 1, 1], 1.0, BoundarySplit::AllGamma1).unwrap();
        assert_eq!(g.e_space().count(), 0);
        assert_eq!(g.h_space().count(), 6);
    }

    #[test]
    fn dof_counts_2x2x2_all_gamma2() {
        let g = Grid::full([2, 2, 2], 1.0, BoundarySplit::AllGamma2).unwrap();
        assert_eq!(g.e_space().count(), 54);
        assert_eq!(full_grid_edge_count(2), 54);
    }

    #[test]
    fn dof_count_formulas_hold_on_full_grids() {
        for n in [1usize, 2, 3, 4] {
            let g = Grid::full([n, n, n], 0.5, BoundarySplit::AllGamma2).unwrap();
            assert_eq!(g.e_space().count(), full_grid_edge_count(n));
            assert_eq!(g.h_space().count(), full_grid_face_count(n));
            let g1 = Grid::full([n, n, n], 0.5, BoundarySplit::AllGamma1).unwrap();
            assert_eq!(
                g1.e_space().count(),
                full_grid_edge_count(n) - boundary_tangential_edge_count(n)
            );
        }
    }

    #[test]
    fn empty_mask_is_a_domain_error() {
        let err = Grid::build([2, 2, 2], 1.0, vec![false; 8], BoundarySplit::AllGamma1);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn explicit_split_rejects_non_boundary_faces() {
        // Interior x-face of a full 2x2x2 grid (i = 1) is not a boundary face.
        let err = Grid::full(
            [2, 2, 2],
            1.0,
            BoundarySplit::ExplicitGamma2 {
                faces: vec![GeomLoc::new(Axis::X, 1, 0, 0)],
            },
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn boundary_faces_partition_and_tie_break() {
        // Mixed split: +x side Γ₂, rest Γ₁.
        let mut sides = [false; 6];
        sides[1] = true;
        let g = Grid::full([2, 2, 2], 1.0, BoundarySplit::BoxSides { gamma2_sides: sides }).unwrap();
        let (g1, g2) = g.boundary_face_counts();
        assert_eq!(g1 + g2, 24); // 6 sides x 4 faces on a full 2^3 box
        assert_eq!(g2, 4);
        // Edges of the +x side shared with Γ₁ sides stay deleted (Γ₁ wins):
        // only the 4 edges interior to the +x face patch survive there.
        let all_g1 = Grid::full([2, 2, 2], 1.0, BoundarySplit::AllGamma1).unwrap();
        assert_eq!(g.e_space().count(), all_g1.e_space().count() + 4);
    }

    #[test]
    fn irregular_mask_checkerboard_builds() {
        // 2x2x2 checkerboard: 4 disjoint-ish cells sharing edges only.
        let mut mask = vec![false; 8];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    if (i + j + k) % 2 == 0 {
                        mask[(i * 2 + j) * 2 + k] = true;
                    }
                }
            }
        }
        let g = Grid::build([2, 2, 2], 1.0, mask, BoundarySplit::AllGamma1).unwrap();
        // Every face of a masked cell is a boundary face here.
        let (g1, g2) = g.boundary_face_counts();
        assert_eq!(g1, 24);
        assert_eq!(g2, 0);
        // All tangential edges get deleted, so no E DOFs survive.
        assert_eq!(g.e_space().count(), 0);
        assert_eq!(g.h_space().count(), 24);
    }

    #[test]
    fn index_map_is_deterministic_and_bijective() {
        let g1 = Grid::full([3, 2, 4], 0.25, BoundarySplit::AllGamma1).unwrap();
        let g2 = Grid::full([3, 2, 4], 0.25, BoundarySplit::AllGamma1).unwrap();
        assert_eq!(g1.e_space().locations(), g2.e_space().locations());
        assert_eq!(g1.h_space().locations(), g2.h_space().locations());
        for (idx, &loc) in g1.e_space().locations().iter().enumerate() {
            assert_eq!(g1.e_space().index_of(loc), Some(idx));
        }
        for (idx, &loc) in g1.h_space().locations().iter().enumerate() {
            assert_eq!(g1.h_space().index_of(loc), Some(idx));
        }
    }

    #[test]
    fn inner_product_examples() {
        let g = Grid::full([2, 2, 2], 1.0, BoundarySplit::AllGamma1).unwrap();
        let ones = StateVector {
            e: vec![1.0; 6],
            h: vec![1.0; 36],
        };
        assert_eq!(inner_product(&ones, &ones, &g).unwrap(), 42.0);
        let zero = StateVector::zeros(6, 36);
        assert_eq!(inner_product(&ones, &zero, &g).unwrap(), 0.0);

        let gh = Grid::full([2, 2, 2], 0.5, BoundarySplit::AllGamma1).unwrap();
        assert!((inner_product(&ones, &ones, &gh).unwrap() - 42.0 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let g = Grid::full([2, 2, 2], 1.0, BoundarySplit::AllGamma1).unwrap();
        let bad = StateVector::zeros(5, 36);
        let ok = StateVector::zeros(6, 36);
        assert!(matches!(
            inner_product(&bad, &ok, &g),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inner_product_is_symmetric_bilinear_positive() {
        use rand::prelude::*;
        let g = Grid::full([2, 2, 2], 0.5, BoundarySplit::AllGamma2).unwrap();
        let (ne, nh) = (g.e_space().count(), g.h_space().count());
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let rv = |rng: &mut rand_chacha::ChaCha12Rng| StateVector {
                e: (0..ne).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                h: (0..nh).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let x = rv(&mut rng);
            let y = rv(&mut rng);
            let xy = inner_product(&x, &y, &g).unwrap();
            let yx = inner_product(&y, &x, &g).unwrap();
            assert!((xy - yx).abs() <= 1e-14 * (1.0 + xy.abs()));
            let xx = inner_product(&x, &x, &g).unwrap();
            assert!(xx > 0.0);
            // bilinearity in the first slot
            let mut x2 = x.clone();
            x2.scale(3.0);
            let x2y = inner_product(&x2, &y, &g).unwrap();
            assert!((x2y - 3.0 * xy).abs() <= 1e-12 * (1.0 + x2y.abs()));
        }
    }
}
