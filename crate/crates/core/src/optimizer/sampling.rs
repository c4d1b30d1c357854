//! Geometry samples over the sweep ranges and the per-sample sweep.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::GeometryMaterials;
use crate::layout::TsvLayout;

use super::objectives::{Evaluation, Evaluator};
use super::pareto::pareto_front;

pub const DEFAULT_LHS_SAMPLES: usize = 4096;
pub const DEFAULT_SEED: u64 = 42;

/// Closed interval in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    fn at(&self, u: f64) -> f64 {
        if self.max == self.min {
            self.min
        } else {
            self.min + u * (self.max - self.min)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometryRanges {
    pub r_cond_um: Range,
    pub p_int_um: Range,
    pub h_int_um: Range,
    pub t_ins_um: Range,
}

impl Default for GeometryRanges {
    fn default() -> Self {
        GeometryRanges {
            r_cond_um: Range::new(2.0, 6.0),
            p_int_um: Range::new(20.0, 60.0),
            h_int_um: Range::new(60.0, 100.0),
            t_ins_um: Range::new(0.5, 3.0),
        }
    }
}

impl GeometryRanges {
    fn axes(&self) -> [(&'static str, Range); 4] {
        [("r_cond_um", self.r_cond_um), ("p_int_um", self.p_int_um), ("h_int_um", self.h_int_um), ("t_ins_um", self.t_ins_um)]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in self.axes() {
            if !(r.min > 0.0 && r.min <= r.max && r.max.is_finite()) {
                return Err(Error::param(name, alloc::format!("range [{}, {}] must satisfy 0 < min <= max", r.min, r.max)));
            }
        }
        Ok(())
    }

    /// True when every bound lies within the default sweep ranges.
    pub fn within_defaults(&self) -> bool {
        let d = GeometryRanges::default();
        self.axes().iter().zip(d.axes()).all(|((_, r), (_, b))| r.min >= b.min && r.max <= b.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Sampler {
    /// Full factorial grid with this many points per axis.
    Grid { points_per_axis: usize },
    LatinHypercube { samples: usize, seed: u64 },
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::LatinHypercube { samples: DEFAULT_LHS_SAMPLES, seed: DEFAULT_SEED }
    }
}

/// One sampled geometry (µm).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometrySample {
    pub r_cond_um: f64,
    pub p_int_um: f64,
    pub h_int_um: f64,
    pub t_ins_um: f64,
}

impl GeometrySample {
    pub fn apply(&self, base: &GeometryMaterials) -> GeometryMaterials {
        GeometryMaterials {
            r_cond_um: self.r_cond_um,
            p_int_um: self.p_int_um,
            h_int_um: self.h_int_um,
            t_ins_um: self.t_ins_um,
            ..base.clone()
        }
    }

    fn from_unit(ranges: &GeometryRanges, u: [f64; 4]) -> Self {
        GeometrySample {
            r_cond_um: ranges.r_cond_um.at(u[0]),
            p_int_um: ranges.p_int_um.at(u[1]),
            h_int_um: ranges.h_int_um.at(u[2]),
            t_ins_um: ranges.t_ins_um.at(u[3]),
        }
    }
}

/// `n` points in `[0, 1)^d`: each axis is cut into `n` strata, each stratum
/// is hit exactly once, with a uniform offset inside it.
pub fn latin_hypercube(n: usize, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = alloc::vec![alloc::vec![0.0; dims]; n];
    for d in 0..dims {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (p, s) in points.iter_mut().zip(strata) {
            p[d] = (s as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    points
}

/// Samples in generation order with exact duplicates removed.
pub fn geometry_samples(ranges: &GeometryRanges, sampler: Sampler) -> Result<Vec<GeometrySample>> {
    ranges.validate()?;
    let raw: Vec<GeometrySample> = match sampler {
        Sampler::Grid { points_per_axis: m } => {
            if m == 0 {
                return Err(Error::param("points_per_axis", "need at least one point per axis"));
            }
            let u = |i: usize| if m == 1 { 0.5 } else { i as f64 / (m - 1) as f64 };
            let mut out = Vec::with_capacity(m.pow(4));
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        for d in 0..m {
                            out.push(GeometrySample::from_unit(ranges, [u(a), u(b), u(c), u(d)]));
                        }
                    }
                }
            }
            out
        }
        Sampler::LatinHypercube { samples, seed } => {
            if samples == 0 {
                return Err(Error::param("samples", "need at least one sample"));
            }
            latin_hypercube(samples, 4, seed)
                .into_iter()
                .map(|p| GeometrySample::from_unit(ranges, [p[0], p[1], p[2], p[3]]))
                .collect()
        }
    };
    let mut seen = BTreeSet::new();
    Ok(raw
        .into_iter()
        .filter(|s| seen.insert([s.r_cond_um, s.p_int_um, s.h_int_um, s.t_ins_um].map(f64::to_bits)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometryRecord {
    pub sample_index: usize,
    pub geometry: GeometrySample,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkippedSample {
    pub sample_index: usize,
    pub geometry: GeometrySample,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometricSweep {
    pub records: Vec<GeometryRecord>,
    pub skipped: Vec<SkippedSample>,
    /// Indices into `records`.
    pub front: Vec<usize>,
}

/// Outcome for one sample: a record, or the reason it was skipped.
pub fn evaluate_sample(
    layout: &TsvLayout,
    base: &GeometryMaterials,
    index: usize,
    sample: GeometrySample,
    evaluator: &dyn Evaluator,
) -> core::result::Result<GeometryRecord, SkippedSample> {
    let g = sample.apply(base);
    g.validate()
        .and_then(|_| evaluator.evaluate(layout, &g))
        .map(|evaluation| GeometryRecord { sample_index: index, geometry: sample, evaluation })
        .map_err(|e| SkippedSample { sample_index: index, geometry: sample, reason: e.to_string() })
}

/// Collects per-sample outcomes (in sample order) into records and front.
pub fn assemble_sweep(outcomes: Vec<core::result::Result<GeometryRecord, SkippedSample>>) -> GeometricSweep {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(s) => skipped.push(s),
        }
    }
    let objectives: Vec<_> = records.iter().map(|r: &GeometryRecord| r.evaluation.objectives).collect();
    let front = pareto_front(&objectives);
    GeometricSweep { records, skipped, front }
}

pub fn geometric_sweep(
    layout: &TsvLayout,
    base: &GeometryMaterials,
    ranges: &GeometryRanges,
    sampler: Sampler,
    evaluator: &dyn Evaluator,
) -> Result<GeometricSweep> {
    let samples = geometry_samples(ranges, sampler)?;
    Ok(assemble_sweep(
        samples.into_iter().enumerate().map(|(i, s)| evaluate_sample(layout, base, i, s, evaluator)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::objectives::AnalyticalEvaluator;

    #[test]
    fn lhs_hits_every_stratum_once() {
        let pts = latin_hypercube(64, 4, 42);
        for d in 0..4 {
            let mut strata: Vec<usize> = pts.iter().map(|p| (p[d] * 64.0) as usize).collect();
            strata.sort();
            assert_eq!(strata, (0..64).collect::<Vec<_>>());
        }
        assert_eq!(pts, latin_hypercube(64, 4, 42));
        assert_ne!(pts, latin_hypercube(64, 4, 43));
    }

    #[test]
    fn samples_respect_ranges() {
        let r = GeometryRanges::default();
        assert!(r.within_defaults());
        for s in geometry_samples(&r, Sampler::default()).unwrap() {
            assert!((2.0..=6.0).contains(&s.r_cond_um));
            assert!((20.0..=60.0).contains(&s.p_int_um));
            assert!((60.0..=100.0).contains(&s.h_int_um));
            assert!((0.5..=3.0).contains(&s.t_ins_um));
        }
        assert_eq!(geometry_samples(&r, Sampler::Grid { points_per_axis: 3 }).unwrap().len(), 81);
    }

    #[test]
    fn degenerate_ranges_give_one_record() {
        let point = |v: f64| Range::new(v, v);
        let r = GeometryRanges { r_cond_um: point(5.0), p_int_um: point(60.0), h_int_um: point(100.0), t_ins_um: point(0.5) };
        let l = TsvLayout::build(2, 2, &[0, 3], &[1, 2]).unwrap();
        let sweep = geometric_sweep(&l, &GeometryMaterials::default(), &r, Sampler::default(), &AnalyticalEvaluator::default()).unwrap();
        assert_eq!(sweep.records.len(), 1);
        assert_eq!(sweep.front, [0]);
    }

    #[test]
    fn infeasible_samples_are_skipped() {
        let r = GeometryRanges { r_cond_um: Range::new(6.0, 6.0), p_int_um: Range::new(12.0, 12.0), ..Default::default() };
        let l = TsvLayout::build(2, 2, &[0, 3], &[1, 2]).unwrap();
        let sweep = geometric_sweep(&l, &GeometryMaterials::default(), &r, Sampler::LatinHypercube { samples: 8, seed: 1 }, &AnalyticalEvaluator::default()).unwrap();
        assert!(sweep.records.is_empty());
        assert_eq!(sweep.skipped.len(), 8);
        assert!(sweep.skipped[0].reason.contains("t_ins_um"));
    }

    #[test]
    fn k_z_grows_with_radius() {
        let l = TsvLayout::build(3, 3, &[4], &[0, 1, 2, 3, 5, 6, 7, 8]).unwrap();
        let ev = AnalyticalEvaluator::default();
        let mut prev = 0.0;
        for r in [2.0, 3.0, 4.0, 5.0, 6.0] {
            let g = GeometryMaterials { r_cond_um: r, t_ins_um: 1.0, p_int_um: 40.0, ..Default::default() };
            let k = ev.evaluate(&l, &g).unwrap().objectives.k_z;
            assert!(k > prev);
            prev = k;
        }
    }
}
