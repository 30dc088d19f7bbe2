//! The transition relation, as a pure function of (state, trigger).

use serde::{Deserialize, Serialize};

use super::{Cause, GuardState, Observation};

/// Anything that can move the machine: an observation from the agent layer
/// or a deadline crossed on the simulated clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Observed(Observation),
    /// No contact for `comm_timeout` after a silent poll.
    CommTimeout,
    /// Stuck in `Anchoring` for `anchor_timeout`.
    AnchorTimeout,
    /// In `Anchored` for `park_timeout`.
    ParkTimeout,
}

impl Trigger {
    pub const ALL: [Trigger; 12] = [
        Trigger::Observed(Observation::GpsOk),
        Trigger::Observed(Observation::GpsFailed),
        Trigger::Observed(Observation::CommSilent),
        Trigger::Observed(Observation::SensorPowerFailed),
        Trigger::Observed(Observation::PropulsionFailed),
        Trigger::Observed(Observation::AnchorConfirmed),
        Trigger::Observed(Observation::AnchorRefused),
        Trigger::Observed(Observation::ParkConfirmed),
        Trigger::Observed(Observation::FlagsCleared),
        Trigger::CommTimeout,
        Trigger::AnchorTimeout,
        Trigger::ParkTimeout,
    ];

    /// The failure cause this trigger reports, if any.
    pub fn cause(self) -> Option<Cause> {
        match self {
            Trigger::Observed(Observation::GpsFailed) => Some(Cause::Gps),
            Trigger::Observed(Observation::SensorPowerFailed) => Some(Cause::SensorPower),
            Trigger::Observed(Observation::PropulsionFailed) => Some(Cause::Propulsion),
            Trigger::CommTimeout => Some(Cause::Communication),
            Trigger::AnchorTimeout | Trigger::ParkTimeout => Some(Cause::Timeout),
            Trigger::Observed(_) => None,
        }
    }
}

/// Side effect requested by a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Anchor,
    AutoPark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub next: GuardState,
    /// Cause to add to the episode's cause set.
    pub add: Option<Cause>,
    pub action: Option<Action>,
}

impl Outcome {
    fn stay(state: GuardState) -> Self {
        Self { next: state, add: None, action: None }
    }

    fn to(next: GuardState, add: Option<Cause>, action: Option<Action>) -> Self {
        Self { next, add, action }
    }
}

/// One successor for every `(state, trigger)` pair.
///
/// `can_drive` is true when neither propulsion nor communication is in the
/// cause set after this trigger's cause has been added; auto-parking is only
/// possible then.
pub fn transition(state: GuardState, trigger: Trigger, can_drive: bool) -> Outcome {
    use GuardState::*;
    use Observation::*;
    let failure = trigger.cause().filter(|c| *c != Cause::Timeout);
    match (state, trigger) {
        (Nominal, _) if failure.is_some() => Outcome::to(Anchoring, failure, Some(Action::Anchor)),
        (Nominal, _) => Outcome::stay(Nominal),

        (Anchoring, Trigger::Observed(AnchorConfirmed)) => Outcome::to(Anchored, None, None),
        (Anchoring, Trigger::Observed(AnchorRefused)) => escalate(None, can_drive),
        (Anchoring, Trigger::AnchorTimeout) => escalate(Some(Cause::Timeout), can_drive),

        (Anchored, Trigger::ParkTimeout) if can_drive => {
            Outcome::to(AutoParking, Some(Cause::Timeout), Some(Action::AutoPark))
        }

        (AutoParking, Trigger::Observed(ParkConfirmed)) => Outcome::to(Parked, None, None),
        (AutoParking, Trigger::Observed(PropulsionFailed) | Trigger::CommTimeout) => {
            Outcome::to(Anchoring, failure, Some(Action::Anchor))
        }

        (s, _) => Outcome { next: s, add: failure, action: None },
    }
}

fn escalate(add: Option<Cause>, can_drive: bool) -> Outcome {
    if can_drive {
        Outcome::to(GuardState::AutoParking, add, Some(Action::AutoPark))
    } else {
        Outcome::to(GuardState::Distress, add, None)
    }
}
