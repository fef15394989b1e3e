//! Event taxonomy: the event codes, how each one acts on an exposure, and
//! which codes belong to which exposure type.

use serde::{Deserialize, Serialize};

use crate::error::PealError;

/// Mnemonic of an event that may hit an exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventCode {
    /// Prepayment.
    Pe,
    /// Default.
    De,
    /// Death of the borrower.
    Dh,
    /// Not paid (employer or renter missing a payment).
    Npd,
    /// Job loss.
    Jl,
    /// Collateral depreciation.
    Cd,
    /// Reference-rate move.
    Eu,
    /// Fraud.
    Fr,
    /// Impairment of a perishable asset.
    Imp,
    /// Recovery-rate change.
    Rr,
    /// Selling-price change.
    Sp,
    /// Moratorium.
    Tm,
    /// Return to life after a default.
    Trl,
    /// Recovery-time change.
    Tr,
    /// Selling-time change.
    Ts,
    /// Not rented.
    Nr,
    /// Over-indebtedness ruling.
    Oi,
    /// Extreme natural event.
    En,
}

impl EventCode {
    pub const ALL: [EventCode; 18] = [
        EventCode::Pe,
        EventCode::De,
        EventCode::Dh,
        EventCode::Npd,
        EventCode::Jl,
        EventCode::Cd,
        EventCode::Eu,
        EventCode::Fr,
        EventCode::Imp,
        EventCode::Rr,
        EventCode::Sp,
        EventCode::Tm,
        EventCode::Trl,
        EventCode::Tr,
        EventCode::Ts,
        EventCode::Nr,
        EventCode::Oi,
        EventCode::En,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventCode::Pe => "pe",
            EventCode::De => "de",
            EventCode::Dh => "dh",
            EventCode::Npd => "npd",
            EventCode::Jl => "jl",
            EventCode::Cd => "cd",
            EventCode::Eu => "eu",
            EventCode::Fr => "fr",
            EventCode::Imp => "imp",
            EventCode::Rr => "rr",
            EventCode::Sp => "sp",
            EventCode::Tm => "tm",
            EventCode::Trl => "trl",
            EventCode::Tr => "tr",
            EventCode::Ts => "ts",
            EventCode::Nr => "nr",
            EventCode::Oi => "oi",
            EventCode::En => "en",
        }
    }

    pub fn kind(self) -> EventKind {
        use Affects::*;
        use Polarity::*;
        use TemporalClass::*;
        let (temporal_class, affects, polarity) = match self {
            EventCode::Pe
            | EventCode::De
            | EventCode::Dh
            | EventCode::Npd
            | EventCode::Jl
            | EventCode::Fr
            | EventCode::Imp
            | EventCode::Oi
            | EventCode::Tm => (Continuous, Both, Negative),
            EventCode::Trl => (Continuous, Both, Positive),
            EventCode::Eu => (Continuous, Interest, Hybrid),
            EventCode::Cd | EventCode::En => (Spot, Capital, Negative),
            EventCode::Rr | EventCode::Sp | EventCode::Tr | EventCode::Ts | EventCode::Nr => {
                (Spot, Both, Hybrid)
            }
        };
        EventKind { code: self, temporal_class, affects, polarity }
    }
}

impl std::fmt::Display for EventCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EventCode {
    type Err = PealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventCode::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| PealError::UnknownEvent(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemporalClass {
    Spot,
    Continuous,
}

/// Which leg of the installment an event cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Affects {
    Capital,
    Interest,
    Both,
}

impl Affects {
    pub fn capital(self) -> bool {
        matches!(self, Affects::Capital | Affects::Both)
    }

    pub fn interest(self) -> bool {
        matches!(self, Affects::Interest | Affects::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Positive,
    Hybrid,
}

/// How an occurrence acts on the cash flows of its exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    /// Stops the affected legs from the occurrence month on.
    Gate,
    /// Restarts legs stopped by an earlier default-type gate.
    Reactivate,
    /// Shifts future interest by a rate payload.
    RateShift,
    /// No gating; only its payload (if any) moves cash.
    Spot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventKind {
    pub code: EventCode,
    pub temporal_class: TemporalClass,
    pub affects: Affects,
    pub polarity: Polarity,
}

impl EventKind {
    pub fn effect(&self) -> Effect {
        match (self.temporal_class, self.polarity) {
            (TemporalClass::Spot, _) => Effect::Spot,
            (TemporalClass::Continuous, Polarity::Negative) => Effect::Gate,
            (TemporalClass::Continuous, Polarity::Positive) => Effect::Reactivate,
            (TemporalClass::Continuous, Polarity::Hybrid) => Effect::RateShift,
        }
    }
}

// ---------------------------------------------------------------------------
// Exposure types
// ---------------------------------------------------------------------------

/// Exposure type, selecting the list of events and the extreme events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExposureType {
    /// Salary-backed loans (quinto pensione).
    QP,
    /// Salary-assignment loans (quinto stipendio).
    QS,
    /// Consumer loans.
    CL,
    /// Export assets.
    EA,
    /// Non-performing exposures.
    NE,
    /// Energy efficiency.
    EE,
    /// Credit cards.
    CC,
    /// Student loans.
    SL,
    /// Mortgage loans.
    ML,
    /// Auto loans.
    AL,
    /// Real estate.
    RE,
}

impl ExposureType {
    /// The list of events for this type.
    pub fn events(self) -> &'static [EventCode] {
        use EventCode::*;
        match self {
            ExposureType::QP => &[Pe, Dh],
            ExposureType::QS => &[Pe, Dh, Npd, Jl],
            ExposureType::CL => &[Pe, De, Eu, Trl],
            ExposureType::EA => &[Imp, Fr, Ts, Sp],
            ExposureType::NE => &[Fr, Trl, Rr, Tr],
            ExposureType::EE => &[Npd, Fr, Ts, Sp],
            ExposureType::CC => &[De, Fr, Eu, Trl],
            ExposureType::SL => &[Pe, De, Dh, Eu, Trl],
            ExposureType::ML => &[Pe, De, Cd, Eu, Trl],
            ExposureType::AL => &[Pe, De, Cd, Eu, Trl],
            ExposureType::RE => &[Npd, Fr, Cd, Ts, Sp, Nr],
        }
    }

    /// Extreme events, excluded unless explicitly enabled.
    pub fn extreme_events(self) -> &'static [EventCode] {
        use EventCode::*;
        match self {
            ExposureType::QP | ExposureType::QS | ExposureType::CC => &[Tm, Oi],
            ExposureType::EA => &[En],
            ExposureType::EE | ExposureType::RE => &[Tm, En],
            ExposureType::CL | ExposureType::NE | ExposureType::SL | ExposureType::ML | ExposureType::AL => &[Tm],
        }
    }

    /// Number of listed events `NE`.
    pub fn event_count(self) -> usize {
        self.events().len()
    }

    pub fn allows(self, code: EventCode, allow_extreme: bool) -> bool {
        self.events().contains(&code) || (allow_extreme && self.extreme_events().contains(&code))
    }
}

impl std::fmt::Display for ExposureType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip_through_strings() {
        for c in EventCode::ALL {
            assert_eq!(c.as_str().parse::<EventCode>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
        assert!("xx".parse::<EventCode>().is_err());
    }

    #[test]
    fn event_counts_per_type() {
        let counts: Vec<usize> = [
            ExposureType::QP,
            ExposureType::QS,
            ExposureType::CL,
            ExposureType::EA,
            ExposureType::NE,
            ExposureType::EE,
            ExposureType::CC,
            ExposureType::SL,
            ExposureType::ML,
            ExposureType::AL,
            ExposureType::RE,
        ]
        .iter()
        .map(|t| t.event_count())
        .collect();
        assert_eq!(counts, vec![2, 4, 4, 4, 4, 4, 4, 5, 5, 5, 6]);
    }

    #[test]
    fn extreme_events_need_opt_in() {
        assert!(!ExposureType::CL.allows(EventCode::Tm, false));
        assert!(ExposureType::CL.allows(EventCode::Tm, true));
        assert!(!ExposureType::CL.allows(EventCode::Oi, true));
        assert!(ExposureType::CL.allows(EventCode::De, false));
    }

    #[test]
    fn effects_follow_class_and_polarity() {
        assert_eq!(EventCode::De.kind().effect(), Effect::Gate);
        assert_eq!(EventCode::Pe.kind().effect(), Effect::Gate);
        assert_eq!(EventCode::Trl.kind().effect(), Effect::Reactivate);
        assert_eq!(EventCode::Eu.kind().effect(), Effect::RateShift);
        assert_eq!(EventCode::Sp.kind().effect(), Effect::Spot);
        assert_eq!(EventCode::Trl.kind().polarity, Polarity::Positive);
    }
}
