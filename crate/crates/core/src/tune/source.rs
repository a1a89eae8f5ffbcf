//! Segment access tagged with the protocol step doing the reading, so tests
//! can audit which vectors each step touched.

use crate::label::RhythmLabel;
use crate::preprocess::LabeledSegment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    /// Training or PCA fitting during grid search (Tr).
    SearchFit,
    /// Scoring a grid point (V).
    SearchEvaluate,
    /// Training or PCA fitting for cross-validation fold `fold`.
    Fit { fold: usize },
    /// Scoring held-out fold `fold`.
    Evaluate { fold: usize },
}

pub trait SegmentSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, i: usize) -> RhythmLabel;

    fn samples(&self, i: usize, access: Access) -> &[f64];

    fn labels(&self) -> Vec<RhythmLabel> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

impl SegmentSource for [LabeledSegment] {
    fn len(&self) -> usize {
        <[LabeledSegment]>::len(self)
    }

    fn label(&self, i: usize) -> RhythmLabel {
        self[i].label
    }

    fn samples(&self, i: usize, _access: Access) -> &[f64] {
        &self[i].samples
    }
}

impl SegmentSource for Vec<LabeledSegment> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn label(&self, i: usize) -> RhythmLabel {
        self[i].label
    }

    fn samples(&self, i: usize, _access: Access) -> &[f64] {
        &self[i].samples
    }
}
