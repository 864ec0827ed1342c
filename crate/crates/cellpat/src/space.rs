//! Search spaces and their operation sets.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The two supported cell search spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SearchSpace {
    /// DARTS-style space: 2 input nodes, M intermediate nodes, 1 output node,
    /// 7 candidate operations, 2 incoming edges per intermediate node.
    Darts,
    /// NAS-Bench-201 space: complete forward DAG with a fixed topology and
    /// 5 candidate operations (including `none`).
    Nb201,
}

impl SearchSpace {
    pub fn id(self) -> &'static str {
        match self {
            SearchSpace::Darts => "darts",
            SearchSpace::Nb201 => "nb201",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "darts" => Ok(SearchSpace::Darts),
            "nb201" => Ok(SearchSpace::Nb201),
            other => Err(Error::UnknownSearchSpace(other.to_string())),
        }
    }

    /// The operation set of this space, in canonical order.
    pub fn operations(self) -> &'static [Op] {
        match self {
            SearchSpace::Darts => DARTS_OPS,
            SearchSpace::Nb201 => NB201_OPS,
        }
    }

    /// Size of the operation set (K).
    pub fn operation_count(self) -> usize {
        self.operations().len()
    }

    /// Default number of intermediate nodes (4 for DARTS, 3 for NB201).
    pub fn default_m(self) -> usize {
        match self {
            SearchSpace::Darts => 4,
            SearchSpace::Nb201 => 3,
        }
    }
}

impl fmt::Display for SearchSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for SearchSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for SearchSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SearchSpace::from_id(&s).map_err(D::Error::custom)
    }
}

const DARTS_OPS: &[Op] = &[
    Op::SepConv3x3,
    Op::SepConv5x5,
    Op::DilConv3x3,
    Op::DilConv5x5,
    Op::MaxPool3x3,
    Op::AvgPool3x3,
    Op::SkipConnect,
];

const NB201_OPS: &[Op] = &[
    Op::NoneOp,
    Op::SkipConnect,
    Op::Conv1x1,
    Op::Conv3x3,
    Op::AvgPool3x3,
];

/// A candidate operation that can be placed on a cell edge.
///
/// The DARTS set has 7 members (`s3 s5 d3 d5 mp3 ap3 sc`), the NB201 set has
/// 5 (`none sc c1 c3 ap3`); `sc` and `ap3` are shared between the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    SepConv3x3,
    SepConv5x5,
    DilConv3x3,
    DilConv5x5,
    MaxPool3x3,
    AvgPool3x3,
    SkipConnect,
    /// NB201 only: the edge carries no connection.
    NoneOp,
    Conv1x1,
    Conv3x3,
}

impl Op {
    /// Short canonical code used in genotype files and reports.
    pub fn code(self) -> &'static str {
        match self {
            Op::SepConv3x3 => "s3",
            Op::SepConv5x5 => "s5",
            Op::DilConv3x3 => "d3",
            Op::DilConv5x5 => "d5",
            Op::MaxPool3x3 => "mp3",
            Op::AvgPool3x3 => "ap3",
            Op::SkipConnect => "sc",
            Op::NoneOp => "none",
            Op::Conv1x1 => "c1",
            Op::Conv3x3 => "c3",
        }
    }

    /// Parses either the short code or the long legacy name.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "s3" | "sep_conv_3x3" => Ok(Op::SepConv3x3),
            "s5" | "sep_conv_5x5" => Ok(Op::SepConv5x5),
            "d3" | "dil_conv_3x3" => Ok(Op::DilConv3x3),
            "d5" | "dil_conv_5x5" => Ok(Op::DilConv5x5),
            "mp3" | "max_pool_3x3" => Ok(Op::MaxPool3x3),
            "ap3" | "avg_pool_3x3" => Ok(Op::AvgPool3x3),
            "sc" | "skip_connect" => Ok(Op::SkipConnect),
            "none" => Ok(Op::NoneOp),
            "c1" | "conv_1x1" | "nor_conv_1x1" => Ok(Op::Conv1x1),
            "c3" | "conv_3x3" | "nor_conv_3x3" => Ok(Op::Conv3x3),
            other => Err(Error::UnknownOperation(other.to_string())),
        }
    }

    /// True for the convolution members of either operation set.
    pub fn is_convolution(self) -> bool {
        matches!(
            self,
            Op::SepConv3x3
                | Op::SepConv5x5
                | Op::DilConv3x3
                | Op::DilConv5x5
                | Op::Conv1x1
                | Op::Conv3x3
        )
    }

    /// True for the NB201 `none` operation ("no connection").
    pub fn is_none_op(self) -> bool {
        self == Op::NoneOp
    }

    pub fn in_space(self, space: SearchSpace) -> bool {
        space.operations().contains(&self)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Op {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Op {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Op::parse(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn darts_set_has_seven_members() {
        assert_eq!(SearchSpace::Darts.operation_count(), 7);
        let convs: Vec<Op> = DARTS_OPS
            .iter()
            .copied()
            .filter(|o| o.is_convolution())
            .collect();
        assert_eq!(
            convs,
            vec![Op::SepConv3x3, Op::SepConv5x5, Op::DilConv3x3, Op::DilConv5x5]
        );
    }

    #[test]
    fn nb201_set_has_five_members_including_none() {
        assert_eq!(SearchSpace::Nb201.operation_count(), 5);
        assert!(Op::NoneOp.in_space(SearchSpace::Nb201));
        assert!(!Op::NoneOp.in_space(SearchSpace::Darts));
        assert!(Op::Conv1x1.is_convolution());
        assert!(!Op::AvgPool3x3.is_convolution());
    }

    #[test]
    fn codes_round_trip() {
        for space in [SearchSpace::Darts, SearchSpace::Nb201] {
            for &op in space.operations() {
                assert_eq!(Op::parse(op.code()).unwrap(), op);
            }
        }
        assert_eq!(Op::parse("sep_conv_3x3").unwrap(), Op::SepConv3x3);
        assert!(Op::parse("conv_7x7").is_err());
    }
}
