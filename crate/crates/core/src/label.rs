use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Rhythm classes handled by the classifier, in their fixed decoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RhythmLabel {
    SR,
    VT,
    VF,
}

impl RhythmLabel {
    pub const ALL: [RhythmLabel; 3] = [RhythmLabel::SR, RhythmLabel::VT, RhythmLabel::VF];

    /// Row index in the coding matrix and the confusion matrix.
    pub fn index(self) -> usize {
        match self {
            RhythmLabel::SR => 0,
            RhythmLabel::VT => 1,
            RhythmLabel::VF => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RhythmLabel::SR => "SR",
            RhythmLabel::VT => "VT",
            RhythmLabel::VF => "VF",
        }
    }
}

impl fmt::Display for RhythmLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLabel(pub String);

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown rhythm label {:?} (expected SR, VT or VF)", self.0)
    }
}

impl std::error::Error for UnknownLabel {}

impl FromStr for RhythmLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SR" => Ok(RhythmLabel::SR),
            "VT" => Ok(RhythmLabel::VT),
            "VF" => Ok(RhythmLabel::VF),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}
