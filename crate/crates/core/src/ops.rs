//! Discrete curl pair and the skew spatial block operator.
//!
//! `curl0` is the boundary-conditioned edge-to-face circulation (E to H);
//! its transpose is the unconstrained realization acting on faces. The block
//! operator A = [[0, -curl0ᵀ], [curl0, 0]] is exactly skew with respect to
//! the uniform h³-weighted inner product because the weight cancels.

use crate::error::{Error, Result};
use crate::mesh::{face_edge_stencil, Grid, StateVector};
use crate::sparse::SparseOperator;

/// Edge-to-face circulation with the electric boundary condition built in:
/// columns exist only for retained edges, rows for all in-domain faces.
/// Entries are ±1/h.
pub fn assemble_curl0(grid: &Grid) -> SparseOperator {
    let scale = 1.0 / grid.spacing();
    let mut triples = Vec::new();
    for (face_idx, &face) in grid.h_space().locations().iter().enumerate() {
        for (edge, sign) in face_edge_stencil(face) {
            if let Some(edge_idx) = grid.e_space().index_of(edge) {
                triples.push((face_idx, edge_idx, sign * scale));
            }
        }
    }
    SparseOperator::from_triples(grid.h_space().info(), grid.e_space().info(), triples)
        .expect("curl stencil indices are in range by construction")
}

/// The Maxwell spatial operator as a 2x2 block structure over (E, H).
#[derive(Debug, Clone)]
pub struct BlockOperatorA {
    curl0: SparseOperator,
    curl0_t: SparseOperator,
}

impl BlockOperatorA {
    pub fn new(curl0: SparseOperator) -> BlockOperatorA {
        let curl0_t = curl0.transpose();
        BlockOperatorA { curl0, curl0_t }
    }

    pub fn from_grid(grid: &Grid) -> BlockOperatorA {
        BlockOperatorA::new(assemble_curl0(grid))
    }

    /// Boundary-conditioned curl (E edges to H faces).
    pub fn curl0(&self) -> &SparseOperator {
        &self.curl0
    }

    /// The adjoint realization (H faces to E edges).
    pub fn curl0_transpose(&self) -> &SparseOperator {
        &self.curl0_t
    }

    pub fn e_count(&self) -> usize {
        self.curl0.ncols()
    }

    pub fn h_count(&self) -> usize {
        self.curl0.nrows()
    }

    /// A u = (-curl0ᵀ h, curl0 e).
    pub fn apply(&self, u: &StateVector) -> Result<StateVector> {
        if u.e.len() != self.e_count() || u.h.len() != self.h_count() {
            return Err(Error::dim(
                self.e_count() + self.h_count(),
                u.len(),
                "block operator apply",
            ));
        }
        let mut out = StateVector::zeros(self.e_count(), self.h_count());
        self.curl0_t.apply_into(&u.h, &mut out.e);
        out.e.iter_mut().for_each(|v| *v = -*v);
        self.curl0.apply_into(&u.e, &mut out.h);
        Ok(out)
    }
}
