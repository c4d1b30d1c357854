//! Exhaustive layout search: a deterministic design stream, per-design
//! evaluation, ranking and the resumable search state.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::GeometryMaterials;
use crate::layout::TsvLayout;

use super::enumerate::{binomial, enumerate_layouts, mask_to_layout, MaskSymmetry, MAX_CELLS};
use super::objectives::{Evaluation, Evaluator, DEFAULT_EVAL_HZ};
use super::pareto::pareto_front;

pub const CHECKPOINT_INTERVAL: usize = 10_000;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchConfig {
    pub rows: usize,
    pub cols: usize,
    pub min_signals: usize,
    pub max_signals: usize,
    pub frequency_hz: f64,
    /// Evaluate one representative per D4 orbit (square grids only).
    pub symmetry: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { rows: 3, cols: 3, min_signals: 2, max_signals: 3, frequency_hz: DEFAULT_EVAL_HZ, symmetry: true }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let cells = self.rows * self.cols;
        if self.rows == 0 || self.cols == 0 || cells > MAX_CELLS {
            return Err(Error::param("grid", alloc::format!("{}x{} grid must have 1..={MAX_CELLS} cells", self.rows, self.cols)));
        }
        if self.min_signals == 0 || self.min_signals > self.max_signals {
            return Err(Error::param(
                "min_signals",
                alloc::format!("signal range [{}, {}] must satisfy 0 < min <= max", self.min_signals, self.max_signals),
            ));
        }
        if self.min_signals > cells - 1 {
            return Err(Error::param(
                "min_signals",
                alloc::format!("no feasible layout: {} signals leave no ground on {cells} cells", self.min_signals),
            ));
        }
        if self.symmetry && self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::param("frequency_hz", "evaluation frequency must be > 0"));
        }
        Ok(())
    }

    /// Signal counts actually enumerated (capped to leave one ground).
    pub fn signal_counts(&self) -> core::ops::RangeInclusive<usize> {
        self.min_signals..=self.max_signals.min(self.rows * self.cols - 1)
    }

    /// Designs in the unreduced space.
    pub fn total_layouts(&self) -> u64 {
        self.signal_counts().map(|k| binomial(self.rows * self.cols, k)).sum()
    }
}

/// One position of the design stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Design {
    /// Position in the stream; the deterministic merge key.
    pub index: u64,
    pub mask: u64,
    /// Layouts this design stands for (1 without symmetry reduction).
    pub multiplicity: usize,
}

/// Designs in order: ascending signal count, lexicographic placements,
/// optionally only canonical representatives.
pub fn design_stream(config: &SearchConfig) -> Result<impl Iterator<Item = Design>> {
    config.validate()?;
    let sym = if config.symmetry { Some(MaskSymmetry::new(config.rows)?) } else { None };
    let (rows, cols) = (config.rows, config.cols);
    let streams = config.signal_counts().map(move |k| enumerate_layouts(rows, cols, k)).collect::<Result<Vec<_>>>()?;
    Ok(streams
        .into_iter()
        .flatten()
        .filter_map(move |mask| match &sym {
            Some(s) if !s.is_canonical(mask) => None,
            Some(s) => Some((mask, s.orbit_size(mask))),
            None => Some((mask, 1)),
        })
        .enumerate()
        .map(|(i, (mask, multiplicity))| Design { index: i as u64, mask, multiplicity }))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignRecord {
    pub index: u64,
    pub layout: TsvLayout,
    pub multiplicity: usize,
    pub evaluation: Option<Evaluation>,
    /// Set when the evaluation failed; the search carries on.
    pub error: Option<String>,
}

/// Evaluation failures are stored in the record; only a mask that does not
/// fit the grid is an error.
pub fn evaluate_search_design(
    config: &SearchConfig,
    g: &GeometryMaterials,
    d: Design,
    evaluator: &dyn Evaluator,
) -> Result<DesignRecord> {
    let layout = mask_to_layout(d.mask, config.rows, config.cols)?;
    let (evaluation, error) = match evaluator.evaluate(&layout, g) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(alloc::format!("design {}: {e}", d.index))),
    };
    Ok(DesignRecord { index: d.index, layout, multiplicity: d.multiplicity, evaluation, error })
}

/// Resumable progress: everything evaluated so far, in stream order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchState {
    pub version: u32,
    pub config: SearchConfig,
    pub geometry: GeometryMaterials,
    pub evaluator: String,
    /// Number of designs of the stream already processed.
    pub next_index: u64,
    pub records: Vec<DesignRecord>,
}

impl SearchState {
    pub fn new(config: SearchConfig, geometry: GeometryMaterials, evaluator: String) -> Self {
        SearchState { version: CHECKPOINT_VERSION, config, geometry, evaluator, next_index: 0, records: Vec::new() }
    }

    /// Refuses a state produced by another version, config, geometry or
    /// evaluator.
    pub fn check_compatible(&self, config: &SearchConfig, geometry: &GeometryMaterials, evaluator: &str) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Mismatch(alloc::format!("checkpoint version {} != {CHECKPOINT_VERSION}", self.version)));
        }
        if &self.config != config || &self.geometry != geometry || self.evaluator != evaluator {
            return Err(Error::Mismatch("checkpoint was written for a different search".into()));
        }
        if self.records.len() as u64 != self.next_index || self.records.iter().enumerate().any(|(i, r)| r.index != i as u64) {
            return Err(Error::Mismatch("checkpoint records are not a contiguous prefix of the stream".into()));
        }
        Ok(())
    }

    /// Evaluates up to `limit` further designs sequentially; returns how
    /// many were processed.
    pub fn advance(&mut self, evaluator: &dyn Evaluator, limit: usize) -> Result<usize> {
        let before = self.records.len();
        let designs: Vec<Design> = design_stream(&self.config)?.skip(self.next_index as usize).take(limit).collect();
        for d in designs {
            self.records.push(evaluate_search_design(&self.config, &self.geometry, d, evaluator)?);
        }
        self.next_index = self.records.len() as u64;
        Ok(self.records.len() - before)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchOutcome {
    pub records: Vec<DesignRecord>,
    /// Indices into `records` of evaluated designs, best first.
    pub ranking: Vec<usize>,
    /// Indices into `records` of the non-dominated designs.
    pub front: Vec<usize>,
    pub failures: usize,
}

impl SearchOutcome {
    pub fn best(&self) -> Option<&DesignRecord> {
        self.ranking.first().map(|&i| &self.records[i])
    }
}

/// Ranks by worst-victim crosstalk (stream index breaks ties) and extracts
/// the Pareto front.
pub fn finish_search(records: Vec<DesignRecord>) -> Result<SearchOutcome> {
    let evaluated: Vec<usize> = (0..records.len()).filter(|&i| records[i].evaluation.is_some()).collect();
    if evaluated.is_empty() {
        return Err(Error::InvalidLayout("no design in the search space could be evaluated".into()));
    }
    let objective = |i: usize| records[i].evaluation.as_ref().map(|e| e.objectives).expect("evaluated");
    let mut ranking = evaluated.clone();
    ranking.sort_by(|&a, &b| {
        objective(a).worst_crosstalk_db.total_cmp(&objective(b).worst_crosstalk_db).then(records[a].index.cmp(&records[b].index))
    });
    let points: Vec<_> = evaluated.iter().map(|&i| objective(i)).collect();
    let front = pareto_front(&points).into_iter().map(|k| evaluated[k]).collect();
    let failures = records.len() - evaluated.len();
    Ok(SearchOutcome { records, ranking, front, failures })
}

/// Sequential search over the whole stream.
pub fn combinatorial_search(config: &SearchConfig, g: &GeometryMaterials, evaluator: &dyn Evaluator) -> Result<SearchOutcome> {
    let mut state = SearchState::new(config.clone(), g.clone(), evaluator.name());
    while state.advance(evaluator, CHECKPOINT_INTERVAL)? > 0 {}
    finish_search(state.records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::objectives::AnalyticalEvaluator;
    use crate::symmetry::canonical_form;

    #[test]
    fn stream_sizes() {
        let full = SearchConfig { symmetry: false, ..Default::default() };
        assert_eq!(design_stream(&full).unwrap().count(), 36 + 84);
        let reduced: Vec<Design> = design_stream(&SearchConfig::default()).unwrap().collect();
        assert_eq!(reduced.iter().map(|d| d.multiplicity as u64).sum::<u64>(), 120);
        assert!(reduced.windows(2).all(|w| w[1].index == w[0].index + 1));
    }

    #[test]
    fn infeasible_configs() {
        let c = SearchConfig { min_signals: 9, max_signals: 9, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SearchConfig { rows: 2, cols: 3, ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::NotSquare { .. })));
        assert!(SearchConfig { rows: 2, cols: 3, symmetry: false, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn reduced_and_full_searches_agree() {
        let g = GeometryMaterials::default();
        let ev = AnalyticalEvaluator::default();
        let cfg = SearchConfig { min_signals: 2, max_signals: 2, ..Default::default() };
        let a = combinatorial_search(&cfg, &g, &ev).unwrap();
        let b = combinatorial_search(&SearchConfig { symmetry: false, ..cfg }, &g, &ev).unwrap();
        let (ba, bb) = (a.best().unwrap(), b.best().unwrap());
        let (oa, ob) = (ba.evaluation.unwrap().objectives, bb.evaluation.unwrap().objectives);
        assert!((oa.worst_crosstalk_db - ob.worst_crosstalk_db).abs() < 1e-9);
        assert_eq!(canonical_form(&ba.layout).unwrap(), canonical_form(&bb.layout).unwrap());
    }

    #[test]
    fn resumed_state_matches_single_pass() {
        let g = GeometryMaterials::default();
        let ev = AnalyticalEvaluator::default();
        let cfg = SearchConfig::default();
        let mut s = SearchState::new(cfg.clone(), g.clone(), ev.name());
        s.advance(&ev, 7).unwrap();
        let mut resumed = s.clone();
        resumed.check_compatible(&cfg, &g, &ev.name()).unwrap();
        while resumed.advance(&ev, 5).unwrap() > 0 {}
        let one = combinatorial_search(&cfg, &g, &ev).unwrap();
        assert_eq!(finish_search(resumed.records).unwrap(), one);
        assert!(s.check_compatible(&SearchConfig { symmetry: false, ..cfg }, &g, &ev.name()).is_err());
    }
}
