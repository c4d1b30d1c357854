//! Evaluator backed by a prediction file in the dataset record schema, so a
//! trained surrogate can drive the search without being linked in.

use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use tsvnet_core::em::metrics::average_from_totals;
use tsvnet_core::em::to_db;
use tsvnet_core::optimizer::{Evaluation, Evaluator, ObjectiveVector};
use tsvnet_core::thermal::array_etc;
use tsvnet_core::{Error, GeometryMaterials, Role, TsvLayout};

use crate::dataset::{DatasetRecord, LabelBlock};
use crate::error::{CliError, CliResult};
use crate::io;

/// Geometry is matched on (r, p, h, t_ox) rounded to this many µm.
const GEOMETRY_QUANTUM_UM: f64 = 1e-6;
const FREQUENCY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct DesignKey {
    rows: usize,
    cols: usize,
    roles: Vec<i8>,
    geometry: [i64; 4],
}

impl DesignKey {
    fn new(layout: &TsvLayout, g: &GeometryMaterials) -> Self {
        let q = |v: f64| (v / GEOMETRY_QUANTUM_UM).round() as i64;
        DesignKey {
            rows: layout.rows(),
            cols: layout.cols(),
            roles: layout.roles().iter().map(|r| r.code()).collect(),
            geometry: [q(g.r_cond_um), q(g.p_int_um), q(g.h_int_um), q(g.t_ins_um)],
        }
    }
}

#[derive(Debug, Clone)]
struct Prediction {
    frequencies_hz: Vec<f64>,
    labels: LabelBlock,
}

#[derive(Debug, Clone)]
pub struct SurrogateFileEvaluator {
    frequency_hz: f64,
    digest: String,
    predictions: HashMap<DesignKey, Prediction>,
}

impl SurrogateFileEvaluator {
    pub fn from_jsonl(text: &str, frequency_hz: f64) -> CliResult<Self> {
        let mut predictions = HashMap::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let at = |e: &dyn std::fmt::Display| CliError::invalid(format!("prediction line {}: {e}", n + 1));
            let r: DatasetRecord = serde_json::from_str(line).map_err(|e| at(&e))?;
            r.labels.validate(r.frequencies_hz.len()).map_err(|e| at(&e))?;
            if r.labels.signal_cells != r.layout.signal_cells() {
                return Err(at(&"signal_cells do not match the layout"));
            }
            predictions
                .entry(DesignKey::new(&r.layout, &r.geometry))
                .or_insert(Prediction { frequencies_hz: r.frequencies_hz, labels: r.labels });
        }
        if predictions.is_empty() {
            return Err(CliError::invalid("prediction file holds no records"));
        }
        Ok(SurrogateFileEvaluator { frequency_hz, digest: hex::encode(Sha256::digest(text.as_bytes())), predictions })
    }

    pub fn load(path: &Path, frequency_hz: f64) -> CliResult<Self> {
        Self::from_jsonl(&io::read_text(path)?, frequency_hz).map_err(|e| e.context(path.display()))
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Objectives from labels at frequency index `k`, using the same definitions
/// as the analytical evaluator; `k_z` comes from the homogenized block.
fn objectives_from_labels(labels: &LabelBlock, k: usize, k_z: f64) -> tsvnet_core::Result<Evaluation> {
    let n = labels.signal_cells.len();
    if n == 0 {
        return Err(Error::InvalidLayout("prediction has no signal ports".into()));
    }
    let max_reflection_db = labels.s11.iter().map(|s| to_db(norm(s[k]))).fold(f64::NEG_INFINITY, f64::max);
    let mean_insertion_db = labels.s21.iter().map(|s| to_db(norm(s[k]))).sum::<f64>() / n as f64;
    let mut power = vec![0.0; n];
    for p in &labels.pairs {
        power[p.victim] += norm(p.next[k]).powi(2) + norm(p.fext[k]).powi(2);
    }
    let totals: Vec<f64> = power.into_iter().map(f64::sqrt).collect();
    let worst = if n >= 2 { totals.iter().copied().fold(f64::NEG_INFINITY, f64::max) } else { 0.0 };
    let objectives = ObjectiveVector { max_reflection_db, mean_insertion_db, worst_crosstalk_db: to_db(worst), k_z };
    objectives.validate()?;
    let average_crosstalk_db = if n >= 2 { Some(average_from_totals(&totals)?) } else { None };
    Ok(Evaluation { objectives, average_crosstalk_db })
}

impl Evaluator for SurrogateFileEvaluator {
    fn evaluate(&self, layout: &TsvLayout, g: &GeometryMaterials) -> tsvnet_core::Result<Evaluation> {
        let p = self.predictions.get(&DesignKey::new(layout, g)).ok_or_else(|| {
            Error::Mismatch(format!(
                "no prediction for layout with {} signals at r={} p={} h={} t_ox={} µm",
                layout.count(Role::Signal),
                g.r_cond_um,
                g.p_int_um,
                g.h_int_um,
                g.t_ins_um
            ))
        })?;
        let f = self.frequency_hz;
        let k = p
            .frequencies_hz
            .iter()
            .position(|&x| (x - f).abs() <= FREQUENCY_RTOL * f)
            .ok_or_else(|| Error::Mismatch(format!("prediction has no point at {f} Hz")))?;
        objectives_from_labels(&p.labels, k, array_etc(layout, g)?.k_z)
    }

    fn name(&self) -> String {
        format!("surrogate-file:{}@{}Hz", self.digest, self.frequency_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use tsvnet_core::em::solve_sweep;
    use tsvnet_core::optimizer::AnalyticalEvaluator;
    use tsvnet_core::FrequencyGrid;

    fn record(layout: &TsvLayout, g: &GeometryMaterials, id: u64) -> String {
        let grid = FrequencyGrid::new(vec![5e9, 15e9]).unwrap();
        let s = solve_sweep(layout, g, &grid).unwrap();
        let r = DatasetRecord {
            id,
            split: Split::All,
            layout: layout.clone(),
            geometry: g.clone(),
            frequencies_hz: grid.points().to_vec(),
            labels: LabelBlock::from_s(&s),
        };
        serde_json::to_string(&r).unwrap()
    }

    #[test]
    fn exact_labels_reproduce_analytical_objectives() {
        let g = GeometryMaterials::default();
        let layouts = [
            TsvLayout::build(3, 3, &[0, 4, 8], &[1, 2, 3, 5, 6, 7]).unwrap(),
            TsvLayout::build(2, 2, &[0], &[1, 2, 3]).unwrap(),
        ];
        let text: String = layouts.iter().enumerate().map(|(i, l)| record(l, &g, i as u64) + "\n").collect();
        let ev = SurrogateFileEvaluator::from_jsonl(&text, 15e9).unwrap();
        assert_eq!(ev.len(), 2);
        let analytical = AnalyticalEvaluator { frequency_hz: 15e9 };
        for l in &layouts {
            let a = analytical.evaluate(l, &g).unwrap();
            let b = ev.evaluate(l, &g).unwrap();
            for (x, y) in a.objectives.minimization_key().iter().zip(b.objectives.minimization_key()) {
                assert!((x - y).abs() < 1e-9, "{x} {y}");
            }
            assert_eq!(a.average_crosstalk_db.is_some(), b.average_crosstalk_db.is_some());
        }
    }

    #[test]
    fn misses_are_errors() {
        let g = GeometryMaterials::default();
        let l = TsvLayout::build(2, 2, &[0], &[1, 2, 3]).unwrap();
        let text = record(&l, &g, 0);
        let ev = SurrogateFileEvaluator::from_jsonl(&text, 15e9).unwrap();
        let other = GeometryMaterials { r_cond_um: 4.0, ..g.clone() };
        assert!(ev.evaluate(&l, &other).is_err());
        let ev = SurrogateFileEvaluator::from_jsonl(&text, 20e9).unwrap();
        assert!(ev.evaluate(&l, &g).unwrap_err().to_string().contains("Hz"));
        assert!(SurrogateFileEvaluator::from_jsonl("", 15e9).is_err());
        assert!(SurrogateFileEvaluator::from_jsonl("{}", 15e9).is_err());
    }

    #[test]
    fn name_tracks_file_contents() {
        let g = GeometryMaterials::default();
        let l = TsvLayout::build(2, 2, &[0], &[1, 2, 3]).unwrap();
        let a = SurrogateFileEvaluator::from_jsonl(&record(&l, &g, 0), 15e9).unwrap();
        let b = SurrogateFileEvaluator::from_jsonl(&record(&l, &g, 1), 15e9).unwrap();
        assert_ne!(a.name(), b.name());
    }
}
