use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::KSet;
use crate::matching::MatchingCertificate;

pub type Result<T, E = EmcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EmcError {
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("duplicate set {0} in family")]
    DuplicateSet(KSet),

    #[error("arithmetic overflow evaluating {0}")]
    Overflow(String),

    /// The input family already contains `s` pairwise disjoint members.
    #[error("family contains {} pairwise disjoint sets: {certificate}", certificate.len())]
    ForbiddenMatching { certificate: MatchingCertificate },

    #[error("{method} search inconclusive after {nodes} nodes")]
    Inconclusive { method: &'static str, nodes: u64 },

    /// A step of the shifting argument failed on a concrete instance.
    #[error("claim violated: {0}")]
    ClaimViolation(Box<Violation>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl EmcError {
    pub fn violation(claim: Claim, message: impl Into<String>, evidence: serde_json::Value) -> Self {
        EmcError::ClaimViolation(Box::new(Violation {
            claim,
            message: message.into(),
            evidence,
        }))
    }

    pub fn as_violation(&self) -> Option<&Violation> {
        match self {
            EmcError::ClaimViolation(v) => Some(v),
            _ => None,
        }
    }
}

/// The individual statements the toolkit checks on concrete instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Branch-and-bound and all-subsets matching numbers agree.
    MatcherAgreement,
    /// A shifted member keeps its size.
    ShiftPreservesSetSize,
    /// The shift is injective on the family.
    ShiftPreservesFamilySize,
    /// The matching number does not grow under a shift.
    ShiftMatchingMonotone,
    /// At most one member of a matching in the shifted family was moved.
    PullbackAtMostOneAltered,
    /// The blocked replacement set used by the pullback lies in the family.
    PullbackReplacementPresent,
    /// The pullback produced a valid matching of the right size.
    PullbackValid,
    /// A family with an uncovered element stays that way after a shift.
    ShiftPreservesTriviality,
    /// The case-specific uncovered element after a shift.
    TrivialityWitness,
    /// The chain never runs past `r` stages.
    ChainLength,
    /// The degree of the pivot element is untouched by all shifts but the last.
    PivotDegreeInvariant,
    /// Every chain source `A_p` is still present when its shift is applied.
    ChainSourcePresent,
    /// Every chain target `B_p` is absent when its shift is applied.
    ChainTargetAbsent,
    /// The degree of the pivot element strictly increases.
    PivotDegreeGain,
    /// Degrees of elements of the fixed set never decrease.
    FixedSetDegreesMonotone,
    /// The potential strictly increases.
    PotentialIncrease,
    /// Family size is unchanged by an iteration.
    SizeConserved,
    /// Matching number does not grow across an iteration.
    MatchingMonotone,
    /// Once an intermediate family is trivial, all later ones are.
    TrivialityPropagation,
    /// The run reached a state with every set meeting `S` present and one set avoiding it.
    ForbiddenMatchingReached,
    /// The run exceeded the iteration bound implied by the potential.
    IterationCap,
    /// The terminal family exceeds the bound its termination condition implies.
    TerminalBound,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        match s.as_ref().and_then(|v| v.as_str()) {
            Some(name) => f.write_str(name),
            None => write!(f, "{self:?}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub claim: Claim,
    pub message: String,
    pub evidence: serde_json::Value,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.claim, self.message)
    }
}
