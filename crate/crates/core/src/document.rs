//! The JSON scenario document: one declarative file describing geometry,
//! materials, discretization, weight and the study to run, with every
//! tolerance pinned in the document (defaults mirror the shipped schema).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    study_causality, study_convergence_rate, study_resolvent_identity,
    study_smoothed_operator_convergence, study_structure_checks, study_uniform_bound, StudyConfig,
    StudyTolerances, Workbench,
};
use crate::materials::{uniform_family_bound, RegionCoefficients};
use crate::mesh::{Axis, BoundarySplit};
use crate::report::{digest_of, StudyReport};
use crate::scenarios::{build_laminated_core, AirGap, CoilLoop, LaminatedCoreScenario, TimeProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub geometry: GeometrySection,
    pub materials: RegionCoefficients,
    pub discretization: DiscretizationSection,
    pub weight: WeightSection,
    pub study: StudySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Physical box edge lengths; spacing is box / cells and must be uniform.
    #[serde(rename = "box")]
    pub box_size: [f64; 3],
    pub core: CoreSection,
    pub laminations: LaminationSection,
    #[serde(default)]
    pub gap: Option<AirGap>,
    pub coil: CoilSection,
    #[serde(default)]
    pub boundary: BoundarySplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreSection {
    pub min: [usize; 3],
    pub max: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminationSection {
    pub axis: Axis,
    pub period: usize,
}

/// Rectangular coil ring in a z-plane around the core, `margin` cells out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilSection {
    pub layer: usize,
    pub margin: usize,
    pub amplitude: f64,
    pub profile: TimeProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub cells: [usize; 3],
    pub tau: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Structure,
    Bound,
    Causality,
    Identity,
    Rate,
    Smoothed,
}

impl StudyKind {
    pub fn parse(name: &str) -> Option<StudyKind> {
        match name {
            "structure" => Some(StudyKind::Structure),
            "bound" => Some(StudyKind::Bound),
            "causality" => Some(StudyKind::Causality),
            "identity" => Some(StudyKind::Identity),
            "rate" => Some(StudyKind::Rate),
            "smoothed" => Some(StudyKind::Smoothed),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Structure => "structure",
            StudyKind::Bound => "bound",
            StudyKind::Causality => "causality",
            StudyKind::Identity => "identity",
            StudyKind::Rate => "rate",
            StudyKind::Smoothed => "smoothed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub kind: StudyKind,
    /// Family parameters; per-kind defaults apply when empty.
    #[serde(default)]
    pub s_values: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    /// Sample count for the smoothed study.
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    /// Family parameter for the causality study.
    #[serde(default = "default_one")]
    pub causality_s: f64,
    /// Family parameter compared against s = 0 in the identity study.
    #[serde(default = "default_identity_s")]
    pub identity_s: f64,
    /// Cutoff times for the causality study; defaults to T/4 and T/2.
    #[serde(default)]
    pub cutoffs: Option<Vec<f64>>,
}

fn default_lin_tol() -> f64 {
    crate::evolution::DEFAULT_LIN_TOL
}

fn default_n_samples() -> usize {
    10
}

fn default_one() -> f64 {
    1.0
}

fn default_identity_s() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "d_structure")]
    pub structure_defect: f64,
    #[serde(default = "d_causality")]
    pub causality_factor: f64,
    #[serde(default = "d_slack")]
    pub bound_slack: f64,
    #[serde(default = "d_identity")]
    pub identity_factor: f64,
    #[serde(default = "d_band")]
    pub rate_band: [f64; 2],
}

fn d_structure() -> f64 {
    1e-12
}
fn d_causality() -> f64 {
    1e-10
}
fn d_slack() -> f64 {
    0.1
}
fn d_identity() -> f64 {
    100.0
}
fn d_band() -> [f64; 2] {
    [0.9, 1.1]
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            structure_defect: d_structure(),
            causality_factor: d_causality(),
            bound_slack: d_slack(),
            identity_factor: d_identity(),
            rate_band: d_band(),
        }
    }
}

impl From<&ToleranceSection> for StudyTolerances {
    fn from(t: &ToleranceSection) -> StudyTolerances {
        StudyTolerances {
            structure_defect: t.structure_defect,
            causality_factor: t.causality_factor,
            bound_slack: t.bound_slack,
            identity_factor: t.identity_factor,
            rate_band: (t.rate_band[0], t.rate_band[1]),
        }
    }
}

impl ScenarioDocument {
    /// Parse with structural validation (unknown keys rejected).
    pub fn from_json(text: &str) -> Result<ScenarioDocument> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<ScenarioDocument> {
        let text = std::fs::read_to_string(path)?;
        ScenarioDocument::from_json(&text)
    }

    /// The document describing the shipped default laminated-core setup.
    pub fn default_document() -> ScenarioDocument {
        ScenarioDocument {
            geometry: GeometrySection {
                box_size: [1.0, 1.0, 1.0],
                core: CoreSection {
                    min: [5, 5, 5],
                    max: [11, 11, 11],
                },
                laminations: LaminationSection {
                    axis: Axis::X,
                    period: 1,
                },
                gap: None,
                coil: CoilSection {
                    layer: 8,
                    margin: 2,
                    amplitude: 1.0,
                    profile: TimeProfile::SmoothRamp {
                        amplitude: 1.0,
                        onset: 0.0,
                        width: 0.5,
                    },
                },
                boundary: BoundarySplit::AllGamma1,
            },
            materials: RegionCoefficients::default(),
            discretization: DiscretizationSection {
                cells: [16, 16, 16],
                tau: 0.01,
                t_end: 2.0,
            },
            weight: WeightSection { rho: 1.0 },
            study: StudySection {
                kind: StudyKind::Rate,
                s_values: vec![],
                seed: 42,
                lin_tol: default_lin_tol(),
                tolerances: ToleranceSection::default(),
                n_samples: default_n_samples(),
                causality_s: 1.0,
                identity_s: 0.1,
                cutoffs: None,
            },
        }
    }

    /// Uniform spacing from box lengths and cell counts.
    pub fn spacing(&self) -> Result<f64> {
        let g = &self.geometry;
        let d = &self.discretization;
        if d.cells.contains(&0) {
            return Err(Error::Validation("cells must be >= 1 per axis".into()));
        }
        let h = g.box_size[0] / d.cells[0] as f64;
        for a in 1..3 {
            let ha = g.box_size[a] / d.cells[a] as f64;
            if (ha - h).abs() > 1e-12 * h.abs() {
                return Err(Error::Validation(format!(
                    "non-uniform spacing: axis 0 gives {h}, axis {a} gives {ha}"
                )));
            }
        }
        if !(h > 0.0) {
            return Err(Error::Validation(format!("spacing must be > 0, got {h}")));
        }
        Ok(h)
    }

    pub fn to_scenario(&self) -> Result<LaminatedCoreScenario> {
        let h = self.spacing()?;
        let g = &self.geometry;
        let c = &g.coil;
        if c.margin == 0 {
            return Err(Error::Validation("coil margin must be >= 1".into()));
        }
        let i0 = g.core.min[0]
            .checked_sub(c.margin)
            .ok_or_else(|| Error::Validation("coil margin reaches past the box".into()))?;
        let j0 = g.core.min[1]
            .checked_sub(c.margin)
            .ok_or_else(|| Error::Validation("coil margin reaches past the box".into()))?;
        let i1 = g.core.max[0] + c.margin;
        let j1 = g.core.max[1] + c.margin;
        let coil = CoilLoop::rectangle(i0, i1, j0, j1, c.layer, c.amplitude, c.profile)?;
        let scenario = LaminatedCoreScenario {
            outer_box_cells: self.discretization.cells,
            spacing: h,
            core_min: g.core.min,
            core_max: g.core.max,
            lamination_axis: g.laminations.axis,
            lamination_period: g.laminations.period,
            air_gap: g.gap,
            coil,
            coefficients: self.materials,
            boundary: g.boundary.clone(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Steps from tau and T; T/tau must be an integer step count.
    pub fn steps(&self) -> Result<usize> {
        let d = &self.discretization;
        if !(d.tau > 0.0) {
            return Err(Error::Validation(format!("tau must be > 0, got {}", d.tau)));
        }
        let raw = d.t_end / d.tau;
        let steps = raw.round();
        if steps < 1.0 || (raw - steps).abs() > 1e-9 * raw.max(1.0) {
            return Err(Error::Validation(format!(
                "t_end / tau = {raw} is not a positive integer step count"
            )));
        }
        Ok(steps as usize)
    }

    pub fn study_config(&self) -> Result<StudyConfig> {
        if !(self.weight.rho > 0.0) {
            return Err(Error::Validation(format!(
                "rho must be > 0, got {}",
                self.weight.rho
            )));
        }
        Ok(StudyConfig {
            rho: self.weight.rho,
            tau: self.discretization.tau,
            steps: self.steps()?,
            s_values: self.effective_s_values(),
            seed: self.study.seed,
            lin_tol: self.study.lin_tol,
            tolerances: (&self.study.tolerances).into(),
        })
    }

    pub fn effective_s_values(&self) -> Vec<f64> {
        if !self.study.s_values.is_empty() {
            return self.study.s_values.clone();
        }
        match self.study.kind {
            StudyKind::Rate => vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            StudyKind::Bound => vec![1.0, 0.1, 0.01, 0.0],
            StudyKind::Smoothed => vec![0.1, 0.03, 0.01, 0.003],
            _ => vec![0.1],
        }
    }

    pub fn effective_cutoffs(&self) -> Vec<f64> {
        match &self.study.cutoffs {
            Some(c) => c.clone(),
            None => {
                let t = self.discretization.t_end;
                vec![t / 4.0, t / 2.0]
            }
        }
    }

    /// Build the workbench for this document.
    pub fn workbench(&self) -> Result<Workbench> {
        let scenario = self.to_scenario()?;
        let (grid, map, spec) = build_laminated_core(&scenario)?;
        Workbench::new(grid, map, spec, digest_of(self))
    }

    /// Run the study named in the document.
    pub fn run_study(&self) -> Result<StudyReport> {
        let wb = self.workbench()?;
        let cfg = self.study_config()?;
        match self.study.kind {
            StudyKind::Structure => {
                study_structure_checks(wb.grid(), wb.digest(), cfg.seed, &cfg.tolerances)
            }
            StudyKind::Bound => study_uniform_bound(&wb, &cfg),
            StudyKind::Causality => {
                study_causality(&wb, &cfg, self.study.causality_s, &self.effective_cutoffs())
            }
            StudyKind::Identity => study_resolvent_identity(&wb, &cfg, self.study.identity_s),
            StudyKind::Rate => study_convergence_rate(&wb, &cfg),
            StudyKind::Smoothed => {
                study_smoothed_operator_convergence(&wb, &cfg, self.study.n_samples)
            }
        }
    }

    /// Validate the model and summarize: DOF counts and the uniform
    /// well-posedness constant over the document's s values plus both ends
    /// of the family.
    pub fn check(&self) -> Result<CheckSummary> {
        let wb = self.workbench()?;
        let mut s_values = self.effective_s_values();
        s_values.push(0.0);
        s_values.push(1.0);
        let c = uniform_family_bound(wb.map(), &s_values, self.weight.rho)?;
        Ok(CheckSummary {
            e_dofs: wb.grid().e_space().count(),
            h_dofs: wb.grid().h_space().count(),
            cells: wb.grid().cells(),
            spacing: wb.grid().spacing(),
            steps: self.steps()?,
            wellposedness_constant: c,
            digest: wb.digest().to_string(),
        })
    }

    /// Derive a document with the cube resolution changed to n per axis,
    /// scaling the cell-based geometry proportionally. Used by grid sweeps.
    pub fn with_grid_resolution(&self, n: usize) -> Result<ScenarioDocument> {
        if n == 0 {
            return Err(Error::Validation("grid resolution must be >= 1".into()));
        }
        let base = self.discretization.cells[0];
        let factor = n as f64 / base as f64;
        let scale = |v: usize| -> usize { (v as f64 * factor).round() as usize };
        let mut doc = self.clone();
        doc.discretization.cells = [
            scale(self.discretization.cells[0]),
            scale(self.discretization.cells[1]),
            scale(self.discretization.cells[2]),
        ];
        doc.geometry.core.min = self.geometry.core.min.map(scale);
        doc.geometry.core.max = self.geometry.core.max.map(scale);
        doc.geometry.coil.layer = scale(self.geometry.coil.layer);
        doc.geometry.coil.margin = scale(self.geometry.coil.margin).max(1);
        if let Some(gap) = self.geometry.gap {
            doc.geometry.gap = Some(AirGap {
                from: scale(gap.from),
                to: scale(gap.to).max(scale(gap.from) + 1),
            });
        }
        Ok(doc)
    }
}

/// What `check` prints for a valid document.
#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub e_dofs: usize,
    pub h_dofs: usize,
    pub cells: [usize; 3],
    pub spacing: f64,
    pub steps: usize,
    pub wellposedness_constant: f64,
    pub digest: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_document_roundtrips_and_builds() {
        let doc = ScenarioDocument::default_document();
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let parsed = ScenarioDocument::from_json(&json).unwrap();
        assert_eq!(doc, parsed);
        let scenario = doc.to_scenario().unwrap();
        assert_eq!(scenario.outer_box_cells, [16, 16, 16]);
        assert!((scenario.spacing - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(doc.steps().unwrap(), 200);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = ScenarioDocument::default_document();
        let mut v: serde_json::Value = serde_json::to_value(&doc).unwrap();
        v["geometry"]["unexpected"] = serde_json::json!(1);
        assert!(ScenarioDocument::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn non_uniform_spacing_is_rejected() {
        let mut doc = ScenarioDocument::default_document();
        doc.geometry.box_size = [1.0, 2.0, 1.0];
        assert!(doc.spacing().is_err());
    }

    #[test]
    fn non_integer_step_count_is_rejected() {
        let mut doc = ScenarioDocument::default_document();
        doc.discretization.t_end = 2.0037;
        assert!(doc.steps().is_err());
    }

    #[test]
    fn default_s_values_depend_on_study_kind() {
        let mut doc = ScenarioDocument::default_document();
        doc.study.kind = StudyKind::Bound;
        assert_eq!(doc.effective_s_values(), vec![1.0, 0.1, 0.01, 0.0]);
        doc.study.s_values = vec![0.5];
        assert_eq!(doc.effective_s_values(), vec![0.5]);
    }

    #[test]
    fn check_reports_positive_constant_for_default() {
        let mut doc = ScenarioDocument::default_document();
        // keep this test quick: a small box with a proportionally small core
        doc = doc.with_grid_resolution(8).unwrap();
        let summary = doc.check().unwrap();
        assert!(summary.wellposedness_constant > 0.0);
        assert!(summary.e_dofs > 0);
    }

    #[test]
    fn grid_rescaling_halves_geometry() {
        let doc = ScenarioDocument::default_document();
        let half = doc.with_grid_resolution(8).unwrap();
        assert_eq!(half.discretization.cells, [8, 8, 8]);
        assert_eq!(half.geometry.core.min, [3, 3, 3]);
        assert_eq!(half.geometry.core.max, [6, 6, 6]);
        half.to_scenario().unwrap();
    }
}
