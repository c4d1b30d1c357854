use alloc::string::String;

use crate::em::metrics::{crosstalk_report_from_matrix, max_reflection_db, mean_insertion_db};
use crate::em::sweep::{SolverPath, SweepSolver};
use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::geometry::GeometryMaterials;
use crate::layout::TsvLayout;
use crate::rlcg::extract_rlcg;
use crate::thermal::etc::array_etc;

pub const DEFAULT_EVAL_HZ: f64 = 15e9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveVector {
    /// `max_i dB|S(top_i, top_i)|`.
    pub max_reflection_db: f64,
    /// Mean over signals of `dB|S(bottom_i, top_i)|`.
    pub mean_insertion_db: f64,
    /// Largest per-victim total crosstalk, dB.
    pub worst_crosstalk_db: f64,
    /// Vertical block conductivity, W/mK.
    pub k_z: f64,
}

impl ObjectiveVector {
    /// Values in "smaller is better" form.
    pub fn minimization_key(&self) -> [f64; 4] {
        [self.max_reflection_db, self.mean_insertion_db.abs(), self.worst_crosstalk_db, -self.k_z]
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.max_reflection_db, self.mean_insertion_db, self.worst_crosstalk_db].iter().all(|v| v.is_finite());
        if !finite || !(self.k_z > 0.0 && self.k_z.is_finite()) {
            return Err(Error::InvalidResult(alloc::format!("invalid objectives {self:?}")));
        }
        Ok(())
    }
}

/// Objectives plus the array-average crosstalk, which is reported but does
/// not take part in ranking or dominance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    pub objectives: ObjectiveVector,
    pub average_crosstalk_db: Option<f64>,
}

/// Source of objective values for a design.
pub trait Evaluator {
    fn evaluate(&self, layout: &TsvLayout, g: &GeometryMaterials) -> Result<Evaluation>;

    fn name(&self) -> String;
}

/// Solves the RLCG model at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticalEvaluator {
    pub frequency_hz: f64,
}

impl Default for AnalyticalEvaluator {
    fn default() -> Self {
        AnalyticalEvaluator { frequency_hz: DEFAULT_EVAL_HZ }
    }
}

impl Evaluator for AnalyticalEvaluator {
    fn evaluate(&self, layout: &TsvLayout, g: &GeometryMaterials) -> Result<Evaluation> {
        evaluate_design(layout, g, self.frequency_hz)
    }

    fn name(&self) -> String {
        alloc::format!("analytical@{}Hz", self.frequency_hz)
    }
}

pub fn evaluate_design(layout: &TsvLayout, g: &GeometryMaterials, frequency_hz: f64) -> Result<Evaluation> {
    let grid = FrequencyGrid::single(frequency_hz)?;
    let model = extract_rlcg(layout, g, &grid)?;
    let s = SweepSolver::new(model, SolverPath::Auto)?.solve_at(frequency_hz)?;
    let report = crosstalk_report_from_matrix(&s, frequency_hz)?;
    let objectives = ObjectiveVector {
        max_reflection_db: max_reflection_db(&s)?,
        mean_insertion_db: mean_insertion_db(&s)?,
        worst_crosstalk_db: report.worst_victim_db,
        k_z: array_etc(layout, g)?.k_z,
    };
    objectives.validate()?;
    Ok(Evaluation { objectives, average_crosstalk_db: report.average_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::metrics::to_db;
    use crate::em::sweep::solve_sweep;
    use crate::symmetry::apply_d4;
    use crate::D4Transform;

    #[test]
    fn table_iii_geometry_evaluates() {
        let l = TsvLayout::build(3, 3, &[1, 3, 5, 7], &[0, 2, 4, 6, 8]).unwrap();
        let e = evaluate_design(&l, &GeometryMaterials::default(), 15e9).unwrap();
        assert!(e.objectives.mean_insertion_db < 0.0);
        assert!(e.objectives.worst_crosstalk_db < 0.0);
        assert!(e.average_crosstalk_db.is_some());
        for t in D4Transform::ALL {
            let o = evaluate_design(&apply_d4(&l, t).unwrap(), &GeometryMaterials::default(), 15e9).unwrap().objectives;
            for (a, b) in o.minimization_key().iter().zip(e.objectives.minimization_key()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn worst_crosstalk_matches_scan() {
        let l = TsvLayout::build(3, 3, &[0, 4, 5], &[1, 2, 3, 6, 7, 8]).unwrap();
        let g = GeometryMaterials::default();
        let e = evaluate_design(&l, &g, 15e9).unwrap();
        let s = solve_sweep(&l, &g, &FrequencyGrid::single(15e9).unwrap()).unwrap();
        let m = &s.data[0];
        let n = 3;
        let mut worst = f64::NEG_INFINITY;
        for v in 0..n {
            let mut p = 0.0;
            for a in 0..n {
                if a != v {
                    p += m[(v, a)].norm_sqr() + m[(v, a + n)].norm_sqr();
                }
            }
            worst = worst.max(10.0 * p.log10());
        }
        assert!((e.objectives.worst_crosstalk_db - worst).abs() < 1e-9);
        let r = (0..n).map(|i| to_db(m[(i, i)].norm())).fold(f64::MIN, f64::max);
        assert_eq!(e.objectives.max_reflection_db, r);
    }
}
