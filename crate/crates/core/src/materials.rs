//! Region-wise material coefficients and the eddy-current limit family.
//!
//! Cell labels (air / insulator / core metal) induce per-DOF coefficients by
//! arithmetic averaging over the masked cells adjacent to each edge or face.
//! The limit family scales only the metal dielectricity: eps_s = eps_base +
//! s * eps_metal_part, so the coefficient deviation from the limit model is
//! exactly linear in s. sigma and mu do not depend on s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{DofKind, Grid, SpaceInfo};
use crate::sparse::SparseOperator;

/// Cell material classification for the laminated-core setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Air,
    Insulator,
    CoreMetal,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Air => "air",
            Region::Insulator => "insulator",
            Region::CoreMetal => "core_metal",
        }
    }
}

/// Scalar coefficients per region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCoefficients {
    pub eps_air: f64,
    pub eps_lam: f64,
    pub eps_cor: f64,
    pub sigma_cor: f64,
    pub mu: f64,
}

impl Default for RegionCoefficients {
    fn default() -> Self {
        RegionCoefficients {
            eps_air: 1.0,
            eps_lam: 2.0,
            eps_cor: 10.0,
            sigma_cor: 5.0,
            mu: 1.0,
        }
    }
}

impl RegionCoefficients {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_air", self.eps_air),
            ("eps_lam", self.eps_lam),
            ("eps_cor", self.eps_cor),
            ("mu", self.mu),
        ] {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.sigma_cor >= 0.0) {
            return Err(Error::Validation(format!(
                "sigma_cor must be >= 0, got {}",
                self.sigma_cor
            )));
        }
        Ok(())
    }

    fn eps_of(&self, r: Region) -> f64 {
        match r {
            Region::Air => self.eps_air,
            Region::Insulator => self.eps_lam,
            Region::CoreMetal => self.eps_cor,
        }
    }

    fn sigma_of(&self, r: Region) -> f64 {
        match r {
            Region::CoreMetal => self.sigma_cor,
            _ => 0.0,
        }
    }
}

/// Per-DOF material data. `eps_per_e_dof` holds the full-model (s = 1)
/// values; `eps_metal_part` is the portion contributed by metal cells, which
/// is the part scaled by the family parameter.
#[derive(Debug, Clone)]
pub struct MaterialMap {
    region_labels: Vec<Region>,
    eps_per_e_dof: Vec<f64>,
    eps_metal_part: Vec<f64>,
    sigma_per_e_dof: Vec<f64>,
    mu_per_h_dof: Vec<f64>,
    /// Region hint per E DOF for diagnostics: the label of its adjacent cells
    /// if they agree, None for mixed DOFs.
    e_dof_region: Vec<Option<Region>>,
}

impl MaterialMap {
    /// Derive per-DOF coefficients from cell labels by arithmetic averaging
    /// over adjacent masked cells. Fails with `ModelInvalid` if some E DOF
    /// would end up with eps = 0 and sigma = 0 in the limit model.
    pub fn from_regions(
        grid: &Grid,
        region_labels: Vec<Region>,
        coeffs: &RegionCoefficients,
    ) -> Result<MaterialMap> {
        coeffs.validate()?;
        if region_labels.len() != grid.cell_count() {
            return Err(Error::dim(
                grid.cell_count(),
                region_labels.len(),
                "region labels",
            ));
        }
        let ne = grid.e_space().count();
        let nh = grid.h_space().count();
        let mut eps = vec![0.0; ne];
        let mut metal = vec![0.0; ne];
        let mut sigma = vec![0.0; ne];
        let mut e_dof_region = vec![None; ne];
        for (idx, &loc) in grid.e_space().locations().iter().enumerate() {
            let cells = grid.masked_cells_of_edge(loc);
            debug_assert!(!cells.is_empty());
            let n = cells.len() as f64;
            let mut first = None;
            let mut uniform = true;
            for c in &cells {
                let r = region_labels[grid.cell_index(*c)];
                eps[idx] += coeffs.eps_of(r) / n;
                sigma[idx] += coeffs.sigma_of(r) / n;
                if r == Region::CoreMetal {
                    metal[idx] += coeffs.eps_cor / n;
                }
                match first {
                    None => first = Some(r),
                    Some(f) if f != r => uniform = false,
                    _ => {}
                }
            }
            if uniform {
                e_dof_region[idx] = first;
            }
        }
        // mu is constant per scenario, so averaging over adjacent cells is a
        // no-op; keep the adjacency assertion.
        let mut mu = vec![0.0; nh];
        for (idx, &loc) in grid.h_space().locations().iter().enumerate() {
            debug_assert!(!grid.masked_cells_of_face(loc).is_empty());
            mu[idx] = coeffs.mu;
        }
        let map = MaterialMap {
            region_labels,
            eps_per_e_dof: eps,
            eps_metal_part: metal,
            sigma_per_e_dof: sigma,
            mu_per_h_dof: mu,
            e_dof_region,
        };
        map.validate_limit_structure()?;
        Ok(map)
    }

    /// Low-level constructor from explicit per-DOF arrays. Lengths are
    /// checked; the eps/sigma positivity structure is not, so invalid limit
    /// models can be built deliberately (the well-posedness computation will
    /// report them).
    pub fn from_dof_values(
        eps_per_e_dof: Vec<f64>,
        eps_metal_part: Vec<f64>,
        sigma_per_e_dof: Vec<f64>,
        mu_per_h_dof: Vec<f64>,
        region_labels: Vec<Region>,
    ) -> Result<MaterialMap> {
        let ne = eps_per_e_dof.len();
        if eps_metal_part.len() != ne {
            return Err(Error::dim(ne, eps_metal_part.len(), "eps metal part"));
        }
        if sigma_per_e_dof.len() != ne {
            return Err(Error::dim(ne, sigma_per_e_dof.len(), "sigma"));
        }
        if mu_per_h_dof.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Validation("mu must be > 0 on every H DOF".into()));
        }
        Ok(MaterialMap {
            region_labels,
            eps_per_e_dof,
            eps_metal_part,
            sigma_per_e_dof,
            mu_per_h_dof,
            e_dof_region: vec![None; ne],
        })
    }

    /// Check the structural condition that makes the limit model well-posed:
    /// every E DOF keeps eps > 0 or sigma > 0 when the metal dielectricity is
    /// sent to zero.
    pub fn validate_limit_structure(&self) -> Result<()> {
        for i in 0..self.e_count() {
            let eps0 = self.eps_per_e_dof[i] - self.eps_metal_part[i];
            if eps0 <= 0.0 && self.sigma_per_e_dof[i] <= 0.0 {
                return Err(Error::ModelInvalid {
                    kind: "E",
                    dof: i,
                    value: 0.0,
                    detail: format!(
                        "region {}",
                        self.e_dof_region[i].map_or("mixed", Region::name)
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn e_count(&self) -> usize {
        self.eps_per_e_dof.len()
    }

    pub fn h_count(&self) -> usize {
        self.mu_per_h_dof.len()
    }

    pub fn combined_info(&self) -> SpaceInfo {
        SpaceInfo {
            kind: DofKind::Combined,
            count: self.e_count() + self.h_count(),
        }
    }

    pub fn region_labels(&self) -> &[Region] {
        &self.region_labels
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma_per_e_dof
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu_per_h_dof
    }

    /// eps per E DOF at family parameter s.
    pub fn eps_at(&self, s: f64, dof: usize) -> f64 {
        self.eps_per_e_dof[dof] - (1.0 - s) * self.eps_metal_part[dof]
    }

    /// Largest metal contribution among E DOFs; the operator norm of
    /// M_0 - M_s equals s times this value.
    pub fn metal_part_max(&self) -> f64 {
        self.eps_metal_part.iter().cloned().fold(0.0, f64::max)
    }

    /// Diagonal of M_0 - M_s on the combined space: -s * metal part on the E
    /// block, zero on the H block. The N block difference is identically zero
    /// because sigma does not depend on s.
    pub fn delta_m_diagonal(&self, s: f64) -> Vec<f64> {
        let mut d: Vec<f64> = self.eps_metal_part.iter().map(|&m| -s * m).collect();
        d.extend(std::iter::repeat_n(0.0, self.h_count()));
        d
    }
}

/// A member of the limit family: the base map with the metal dielectricity
/// scaled by s. s = 0 is the eddy-current model, s = 1 the full model.
#[derive(Debug, Clone)]
pub struct LimitFamily<'a> {
    base: &'a MaterialMap,
    s: f64,
}

impl<'a> LimitFamily<'a> {
    pub fn new(base: &'a MaterialMap, s: f64) -> Result<LimitFamily<'a>> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Validation(format!("s must lie in [0, 1], got {s}")));
        }
        Ok(LimitFamily { base, s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn base(&self) -> &MaterialMap {
        self.base
    }

    fn combined_diag_m(&self) -> Vec<f64> {
        let mut d: Vec<f64> = (0..self.base.e_count())
            .map(|i| self.base.eps_at(self.s, i))
            .collect();
        d.extend_from_slice(&self.base.mu_per_h_dof);
        d
    }
}

/// Diagonal M_s on the combined DOF space: eps_s on the E block, mu on H.
pub fn assemble_m(family: &LimitFamily, grid: &Grid) -> Result<SparseOperator> {
    check_conformity(family.base, grid)?;
    let diag = family.combined_diag_m();
    if let Some(&bad) = diag.iter().find(|&&v| v < 0.0) {
        return Err(Error::Validation(format!(
            "negative material coefficient {bad} in M"
        )));
    }
    SparseOperator::diagonal(grid.combined_info(), diag)
}

/// Diagonal N on the combined DOF space: sigma on the E block, zero on H.
pub fn assemble_n(map: &MaterialMap, grid: &Grid) -> Result<SparseOperator> {
    check_conformity(map, grid)?;
    if let Some(&bad) = map.sigma_per_e_dof.iter().find(|&&v| v < 0.0) {
        return Err(Error::Validation(format!("negative conductivity {bad}")));
    }
    let mut diag = map.sigma_per_e_dof.clone();
    diag.extend(std::iter::repeat_n(0.0, map.h_count()));
    SparseOperator::diagonal(grid.combined_info(), diag)
}

fn check_conformity(map: &MaterialMap, grid: &Grid) -> Result<()> {
    if map.e_count() != grid.e_space().count() {
        return Err(Error::dim(grid.e_space().count(), map.e_count(), "E DOFs"));
    }
    if map.h_count() != grid.h_space().count() {
        return Err(Error::dim(grid.h_space().count(), map.h_count(), "H DOFs"));
    }
    Ok(())
}

/// The well-posedness constant c = min diag(rho M_s + N_s). For diagonal
/// operators this is the exact minimum eigenvalue. Fails with `ModelInvalid`
/// (naming the offending DOF) when the minimum is not positive.
pub fn wellposedness_constant(family: &LimitFamily, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Validation(format!("rho must be > 0, got {rho}")));
    }
    let map = family.base;
    let mut min = f64::INFINITY;
    let mut arg = (0usize, "E");
    for i in 0..map.e_count() {
        let v = rho * map.eps_at(family.s, i) + map.sigma_per_e_dof[i];
        if v < min {
            min = v;
            arg = (i, "E");
        }
    }
    for (i, &mu) in map.mu_per_h_dof.iter().enumerate() {
        let v = rho * mu;
        if v < min {
            min = v;
            arg = (i, "H");
        }
    }
    if !(min > 0.0) || !min.is_finite() {
        let detail = if arg.1 == "E" {
            format!(
                "region {}",
                map.e_dof_region[arg.0].map_or("mixed", Region::name)
            )
        } else {
            "mu block".to_string()
        };
        return Err(Error::ModelInvalid {
            kind: if arg.1 == "E" { "E" } else { "H" },
            dof: arg.0,
            value: min,
            detail,
        });
    }
    Ok(min)
}

/// Infimum of the well-posedness constant over a set of family parameters;
/// this is the constant entering the 1/c bound on the solution operators.
/// Also checks the monotonicity the linear family guarantees: c(s) does not
/// decrease with s.
pub fn uniform_family_bound(map: &MaterialMap, s_values: &[f64], rho: f64) -> Result<f64> {
    if s_values.is_empty() {
        return Err(Error::Validation("empty family parameter set".into()));
    }
    let mut sorted = s_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite s values"));
    let mut inf = f64::INFINITY;
    let mut prev: Option<f64> = None;
    for &s in &sorted {
        let c = wellposedness_constant(&LimitFamily::new(map, s)?, rho)?;
        if let Some(p) = prev {
            if c < p * (1.0 - 1e-12) {
                return Err(Error::Validation(format!(
                    "well-posedness constant decreased along the family: c({s}) = {c} < {p}"
                )));
            }
        }
        prev = Some(c);
        inf = inf.min(c);
    }
    Ok(inf)
}
