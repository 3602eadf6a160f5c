//! Deliberate defects used by mutation tests to show that the checkers fire.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// The shift moves a member exactly when its target is already present.
    FlipShiftBlocking,
    /// Chain construction ends after its first stage without testing that the
    /// target is missing.
    SkipChainStop,
    /// Chain construction ignores missing targets before the last stage.
    NoEarlyStop,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Fault::None),
            "flip-shift-blocking" => Ok(Fault::FlipShiftBlocking),
            "skip-chain-stop" => Ok(Fault::SkipChainStop),
            "no-early-stop" => Ok(Fault::NoEarlyStop),
            other => Err(format!("unknown fault '{other}'")),
        }
    }
}
