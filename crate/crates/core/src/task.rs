//! Classification tasks: which rhythm labels take part and how they group
//! into the rows of a coding matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecoc::CodingMatrix;
use crate::error::Error;
use crate::label::RhythmLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// SR vs VT vs VF through the 3 × 6 code.
    ThreeWay,
    /// {SR, VT} vs VF with one classifier.
    NonVfVsVf,
    /// VT vs VF with one classifier; SR is not used.
    VtVsVf,
}

impl Task {
    /// Class groups, one per coding-matrix row.
    pub fn groups(&self) -> Vec<Vec<RhythmLabel>> {
        use RhythmLabel::*;
        match self {
            Task::ThreeWay => vec![vec![SR], vec![VT], vec![VF]],
            Task::NonVfVsVf => vec![vec![SR, VT], vec![VF]],
            Task::VtVsVf => vec![vec![VT], vec![VF]],
        }
    }

    pub fn group_of(&self, label: RhythmLabel) -> Option<usize> {
        self.groups().iter().position(|g| g.contains(&label))
    }

    pub fn uses(&self, label: RhythmLabel) -> bool {
        self.group_of(label).is_some()
    }

    /// Labels that take part, in SR, VT, VF order.
    pub fn labels(&self) -> Vec<RhythmLabel> {
        RhythmLabel::ALL.into_iter().filter(|&l| self.uses(l)).collect()
    }

    /// Label standing in for a whole group (its first member). Used as the
    /// class key of per-group PCA.
    pub fn group_key(&self, group: usize) -> RhythmLabel {
        self.groups()[group][0]
    }

    pub fn coding_matrix(&self) -> CodingMatrix {
        match self {
            Task::ThreeWay => CodingMatrix::standard(),
            Task::NonVfVsVf | Task::VtVsVf => CodingMatrix::from_rows(vec![vec![1], vec![-1]])
                .expect("two-row code is well formed"),
        }
    }

    /// Label recorded in a confusion matrix for a prediction of `group`:
    /// the true label when the group contains it, else the group's key.
    pub fn predicted_label(&self, truth: RhythmLabel, group: usize) -> RhythmLabel {
        let groups = self.groups();
        if groups[group].contains(&truth) {
            truth
        } else {
            groups[group][0]
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::ThreeWay => "three-way",
            Task::NonVfVsVf => "nonvf-vs-vf",
            Task::VtVsVf => "vt-vs-vf",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "three-way" | "3-way" => Ok(Task::ThreeWay),
            "nonvf-vs-vf" => Ok(Task::NonVfVsVf),
            "vt-vs-vf" => Ok(Task::VtVsVf),
            other => Err(Error::Config(format!("unknown task {other:?}"))),
        }
    }
}
