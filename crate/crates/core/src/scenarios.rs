//! Scenario constructors: the laminated iron core in air with a coil loop,
//! plus minimal analytic configurations for property tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{MaterialMap, Region, RegionCoefficients};
use crate::mesh::{Axis, BoundarySplit, GeomLoc, Grid, StateVector};
use crate::time::Trajectory;

/// Causal scalar signal: zero for t <= onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    /// C¹ ramp from 0 to `amplitude` over `width`, constant afterwards.
    SmoothRamp {
        amplitude: f64,
        onset: f64,
        width: f64,
    },
    /// Sine of the given frequency under a C¹ ramp envelope over one period.
    SineBurst {
        amplitude: f64,
        onset: f64,
        frequency: f64,
    },
    /// Discontinuous jump to `amplitude` (rough forcing).
    Step { amplitude: f64, onset: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::SmoothRamp {
                amplitude,
                onset,
                width,
            } => {
                if t <= onset {
                    0.0
                } else {
                    let x = ((t - onset) / width).min(1.0);
                    amplitude * x * x * (3.0 - 2.0 * x)
                }
            }
            TimeProfile::SineBurst {
                amplitude,
                onset,
                frequency,
            } => {
                if t <= onset {
                    0.0
                } else {
                    let s = t - onset;
                    let x = (s * frequency).min(1.0);
                    let envelope = x * x * (3.0 - 2.0 * x);
                    amplitude * envelope * (2.0 * std::f64::consts::PI * frequency * s).sin()
                }
            }
            TimeProfile::Step { amplitude, onset } => {
                if t <= onset {
                    0.0
                } else {
                    amplitude
                }
            }
        }
    }

    pub fn onset(&self) -> f64 {
        match *self {
            TimeProfile::SmoothRamp { onset, .. }
            | TimeProfile::SineBurst { onset, .. }
            | TimeProfile::Step { onset, .. } => onset,
        }
    }

    /// Shift the onset, keeping the shape: used by causality studies.
    pub fn with_onset(&self, onset: f64) -> TimeProfile {
        let mut p = *self;
        match &mut p {
            TimeProfile::SmoothRamp { onset: o, .. }
            | TimeProfile::SineBurst { onset: o, .. }
            | TimeProfile::Step { onset: o, .. } => *o = onset,
        }
        p
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, TimeProfile::Step { .. })
    }
}

/// Ordered, oriented path of edges carrying the prescribed current density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoilLoop {
    /// (edge, orientation): +1 runs along the edge direction, -1 against it.
    pub edges: Vec<(GeomLoc, f64)>,
    pub amplitude: f64,
    pub profile: TimeProfile,
}

impl CoilLoop {
    /// Check the edges form one closed connected loop under the given
    /// orientations.
    pub fn validate_closed(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::Validation("coil loop has no edges".into()));
        }
        let endpoints = |loc: GeomLoc| {
            let tail = [loc.i, loc.j, loc.k];
            let mut head = tail;
            head[loc.axis.index()] += 1;
            (tail, head)
        };
        let start = {
            let (tail, head) = endpoints(self.edges[0].0);
            if self.edges[0].1 > 0.0 {
                tail
            } else {
                head
            }
        };
        let mut cur = start;
        for &(loc, sign) in &self.edges {
            let (tail, head) = endpoints(loc);
            let (from, to) = if sign > 0.0 { (tail, head) } else { (head, tail) };
            if from != cur {
                return Err(Error::Validation(format!(
                    "coil path breaks at edge {loc:?}: expected start {cur:?}, got {from:?}"
                )));
            }
            cur = to;
        }
        if cur != start {
            return Err(Error::Validation("coil path does not close".into()));
        }
        Ok(())
    }

    /// Rectangular loop of edges in the plane z = layer (node coordinate),
    /// running counterclockwise around the node rectangle
    /// [i0, i1] x [j0, j1].
    pub fn rectangle(
        i0: usize,
        i1: usize,
        j0: usize,
        j1: usize,
        layer: usize,
        amplitude: f64,
        profile: TimeProfile,
    ) -> Result<CoilLoop> {
        if i1 <= i0 || j1 <= j0 {
            return Err(Error::Validation(format!(
                "degenerate coil rectangle [{i0},{i1}]x[{j0},{j1}]"
            )));
        }
        let mut edges = Vec::new();
        for i in i0..i1 {
            edges.push((GeomLoc::new(Axis::X, i, j0, layer), 1.0));
        }
        for j in j0..j1 {
            edges.push((GeomLoc::new(Axis::Y, i1, j, layer), 1.0));
        }
        for i in (i0..i1).rev() {
            edges.push((GeomLoc::new(Axis::X, i, j1, layer), -1.0));
        }
        for j in (j0..j1).rev() {
            edges.push((GeomLoc::new(Axis::Y, i0, j, layer), -1.0));
        }
        let coil = CoilLoop {
            edges,
            amplitude,
            profile,
        };
        coil.validate_closed()?;
        Ok(coil)
    }
}

/// Optional air gap: a range of cell layers along the lamination axis that
/// is replaced by air.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AirGap {
    pub from: usize,
    pub to: usize,
}

/// The realistic configuration: a laminated core inside an air box, driven
/// by a closed coil loop of prescribed current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminatedCoreScenario {
    pub outer_box_cells: [usize; 3],
    pub spacing: f64,
    /// Core cell range per axis, half-open [min, max).
    pub core_min: [usize; 3],
    pub core_max: [usize; 3],
    pub lamination_axis: Axis,
    /// Slab thickness in cells; metal and insulator slabs alternate starting
    /// with metal at the low end of the core.
    pub lamination_period: usize,
    pub air_gap: Option<AirGap>,
    pub coil: CoilLoop,
    pub coefficients: RegionCoefficients,
    pub boundary: BoundarySplit,
}

impl LaminatedCoreScenario {
    /// The shipped default: 16³ box with a 6³ core laminated cell-by-cell
    /// along x and a square coil ring around it in the mid z-plane.
    pub fn default_16() -> LaminatedCoreScenario {
        let profile = TimeProfile::SmoothRamp {
            amplitude: 1.0,
            onset: 0.0,
            width: 0.5,
        };
        LaminatedCoreScenario {
            outer_box_cells: [16, 16, 16],
            spacing: 1.0 / 16.0,
            core_min: [5, 5, 5],
            core_max: [11, 11, 11],
            lamination_axis: Axis::X,
            lamination_period: 1,
            air_gap: None,
            coil: CoilLoop::rectangle(3, 13, 3, 13, 8, 1.0, profile)
                .expect("default coil rectangle is valid"),
            coefficients: RegionCoefficients::default(),
            boundary: BoundarySplit::AllGamma1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if self.core_min[a] == 0
                || self.core_max[a] <= self.core_min[a]
                || self.core_max[a] >= self.outer_box_cells[a]
            {
                return Err(Error::Validation(format!(
                    "core range [{}, {}) must lie strictly inside the box (axis {a})",
                    self.core_min[a], self.core_max[a]
                )));
            }
        }
        if self.lamination_period == 0 {
            return Err(Error::Validation("lamination_period must be >= 1".into()));
        }
        let ax = self.lamination_axis.index();
        let extent = self.core_max[ax] - self.core_min[ax];
        if !extent.is_multiple_of(self.lamination_period) {
            return Err(Error::Validation(format!(
                "laminations of period {} do not tile the core extent {extent}",
                self.lamination_period
            )));
        }
        if let Some(gap) = self.air_gap {
            if gap.to <= gap.from || gap.from < self.core_min[ax] || gap.to > self.core_max[ax] {
                return Err(Error::Validation(format!(
                    "air gap [{}, {}) must lie inside the core along the lamination axis",
                    gap.from, gap.to
                )));
            }
        }
        self.coil.validate_closed()
    }

    /// Cell labels: metal/insulator slabs inside the core, air elsewhere and
    /// inside the optional gap. The labeling partitions the box.
    pub fn region_labels(&self) -> Vec<Region> {
        let [nx, ny, nz] = self.outer_box_cells;
        let ax = self.lamination_axis.index();
        let mut labels = Vec::with_capacity(nx * ny * nz);
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let c = [i, j, k];
                    let inside = (0..3).all(|a| c[a] >= self.core_min[a] && c[a] < self.core_max[a]);
                    let gapped = self
                        .air_gap
                        .is_some_and(|g| c[ax] >= g.from && c[ax] < g.to);
                    let label = if !inside || gapped {
                        Region::Air
                    } else {
                        let slab = (c[ax] - self.core_min[ax]) / self.lamination_period;
                        if slab.is_multiple_of(2) {
                            Region::CoreMetal
                        } else {
                            Region::Insulator
                        }
                    };
                    labels.push(label);
                }
            }
        }
        labels
    }
}

/// Spatial support of the forcing (resolved E-DOF indices with weights) plus
/// the time profile. Sampling produces F = (-J, 0): the E block carries minus
/// the prescribed current density, the H block is zero.
#[derive(Debug, Clone)]
pub struct ForcingSpec {
    e_entries: Vec<(usize, f64)>,
    ne: usize,
    nh: usize,
    profile: TimeProfile,
}

impl ForcingSpec {
    pub fn new(
        e_entries: Vec<(usize, f64)>,
        ne: usize,
        nh: usize,
        profile: TimeProfile,
    ) -> ForcingSpec {
        ForcingSpec {
            e_entries,
            ne,
            nh,
            profile,
        }
    }

    pub fn profile(&self) -> TimeProfile {
        self.profile
    }

    pub fn with_profile(&self, profile: TimeProfile) -> ForcingSpec {
        ForcingSpec {
            profile,
            ..self.clone()
        }
    }

    /// Sample on the window t = tau, 2 tau, ..., steps * tau.
    pub fn sample(&self, tau: f64, steps: usize, rho: f64) -> Result<Trajectory> {
        Trajectory::from_fn(tau, 1, rho, steps, |_, t| {
            let mut s = StateVector::zeros(self.ne, self.nh);
            let v = self.profile.value(t);
            for &(dof, j) in &self.e_entries {
                s.e[dof] = -j * v;
            }
            s
        })
    }
}

/// Assemble the laminated-core scenario: full-box grid, region materials and
/// the coil forcing support.
pub fn build_laminated_core(
    scenario: &LaminatedCoreScenario,
) -> Result<(Grid, MaterialMap, ForcingSpec)> {
    scenario.validate()?;
    let grid = Grid::full(
        scenario.outer_box_cells,
        scenario.spacing,
        scenario.boundary.clone(),
    )?;
    let map = MaterialMap::from_regions(&grid, scenario.region_labels(), &scenario.coefficients)?;
    let mut entries = Vec::with_capacity(scenario.coil.edges.len());
    for &(loc, sign) in &scenario.coil.edges {
        let dof = grid.e_space().index_of(loc).ok_or_else(|| {
            Error::Validation(format!(
                "coil edge {loc:?} is not a retained E DOF (boundary or outside the domain)"
            ))
        })?;
        entries.push((dof, sign * scenario.coil.amplitude));
    }
    let spec = ForcingSpec::new(
        entries,
        grid.e_space().count(),
        grid.h_space().count(),
        scenario.coil.profile,
    );
    Ok((grid, map, spec))
}

/// Minimal configurations for property tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitScenarioKind {
    HomogeneousBox,
    SingleConductorBlock,
    AllGamma2Box,
}

pub fn build_unit_test_scenario(
    kind: UnitScenarioKind,
) -> Result<(Grid, MaterialMap, ForcingSpec)> {
    let profile = TimeProfile::SmoothRamp {
        amplitude: 1.0,
        onset: 0.0,
        width: 0.3,
    };
    match kind {
        UnitScenarioKind::HomogeneousBox => {
            let coeffs = RegionCoefficients {
                eps_air: 1.0,
                eps_lam: 1.0,
                eps_cor: 1.0,
                sigma_cor: 0.0,
                mu: 1.0,
            };
            let grid = Grid::full([6, 6, 6], 1.0 / 6.0, BoundarySplit::AllGamma1)?;
            let map = MaterialMap::from_regions(&grid, vec![Region::Air; 216], &coeffs)?;
            let spec = dipole_forcing(&grid, profile)?;
            Ok((grid, map, spec))
        }
        UnitScenarioKind::SingleConductorBlock => {
            let grid = Grid::full([6, 6, 6], 1.0 / 6.0, BoundarySplit::AllGamma1)?;
            let labels: Vec<Region> = (0..6usize)
                .flat_map(|i| {
                    (0..6usize).flat_map(move |j| {
                        (0..6usize).map(move |k| {
                            let inside =
                                [i, j, k].iter().all(|&c| (2..4).contains(&c));
                            if inside {
                                Region::CoreMetal
                            } else {
                                Region::Air
                            }
                        })
                    })
                })
                .collect();
            let map = MaterialMap::from_regions(&grid, labels, &RegionCoefficients::default())?;
            let spec = dipole_forcing(&grid, profile)?;
            Ok((grid, map, spec))
        }
        UnitScenarioKind::AllGamma2Box => {
            let coeffs = RegionCoefficients {
                eps_air: 1.0,
                eps_lam: 1.0,
                eps_cor: 1.0,
                sigma_cor: 0.0,
                mu: 1.0,
            };
            let grid = Grid::full([4, 4, 4], 0.25, BoundarySplit::AllGamma2)?;
            let map = MaterialMap::from_regions(&grid, vec![Region::Air; 64], &coeffs)?;
            let spec = dipole_forcing(&grid, profile)?;
            Ok((grid, map, spec))
        }
    }
}

/// One interior x-edge carrying the profile: the simplest causal forcing.
fn dipole_forcing(grid: &Grid, profile: TimeProfile) -> Result<ForcingSpec> {
    let [nx, ny, nz] = grid.cells();
    let loc = GeomLoc::new(Axis::X, nx / 2, ny / 2, nz / 2);
    let dof = grid
        .e_space()
        .index_of(loc)
        .ok_or_else(|| Error::Validation(format!("dipole edge {loc:?} not retained")))?;
    Ok(ForcingSpec::new(
        vec![(dof, 1.0)],
        grid.e_space().count(),
        grid.h_space().count(),
        profile,
    ))
}
