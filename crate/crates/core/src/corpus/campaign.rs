//! Campaign periods and swing-state clusterings.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Campaign {
    Primaries2016,
    Election2016,
    Election2020,
    Election2024,
    Other,
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

impl Campaign {
    /// The four named campaign periods, in chronological order.
    pub const PERIODS: [Campaign; 4] = [
        Campaign::Primaries2016,
        Campaign::Election2016,
        Campaign::Election2020,
        Campaign::Election2024,
    ];

    /// Inclusive date window, from candidacy declaration to election day
    /// (or nomination for the primaries).
    pub fn window(self) -> Option<(NaiveDate, NaiveDate)> {
        match self {
            Campaign::Primaries2016 => Some((ymd(2015, 6, 16), ymd(2016, 7, 19))),
            Campaign::Election2016 => Some((ymd(2016, 7, 21), ymd(2016, 11, 8))),
            Campaign::Election2020 => Some((ymd(2019, 6, 18), ymd(2020, 11, 3))),
            Campaign::Election2024 => Some((ymd(2022, 11, 15), ymd(2024, 11, 5))),
            Campaign::Other => None,
        }
    }

    /// Dates outside every window (e.g. between campaigns) map to `Other`.
    pub fn from_date(date: NaiveDate) -> Campaign {
        Campaign::PERIODS
            .into_iter()
            .find(|c| {
                let (start, end) = c.window().unwrap();
                start <= date && date <= end
            })
            .unwrap_or(Campaign::Other)
    }

    pub fn contains(self, date: NaiveDate) -> bool {
        match self.window() {
            Some((start, end)) => start <= date && date <= end,
            None => Campaign::from_date(date) == Campaign::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Campaign::Primaries2016 => "Primaries2016",
            Campaign::Election2016 => "Election2016",
            Campaign::Election2020 => "Election2020",
            Campaign::Election2024 => "Election2024",
            Campaign::Other => "Other",
        }
    }

    /// Human-readable label used in report rows.
    pub fn display_name(self) -> &'static str {
        match self {
            Campaign::Primaries2016 => "2016 Primaries",
            Campaign::Election2016 => "2016 Campaign",
            Campaign::Election2020 => "2020 Campaign",
            Campaign::Election2024 => "2024 Campaign",
            Campaign::Other => "Other",
        }
    }

    /// Election year for the three general-election campaigns.
    pub fn election_year(self) -> Option<u16> {
        match self {
            Campaign::Election2016 => Some(2016),
            Campaign::Election2020 => Some(2020),
            Campaign::Election2024 => Some(2024),
            _ => None,
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "primaries2016" | "2016primaries" => Ok(Campaign::Primaries2016),
            "election2016" | "2016election" | "2016campaign" | "campaign2016" => {
                Ok(Campaign::Election2016)
            }
            "election2020" | "2020election" | "2020campaign" | "campaign2020" => {
                Ok(Campaign::Election2020)
            }
            "election2024" | "2024election" | "2024campaign" | "campaign2024" => {
                Ok(Campaign::Election2024)
            }
            "other" | "" => Ok(Campaign::Other),
            _ => Err(Error::InvalidConfig(format!("unknown campaign {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwingScheme {
    /// Campaign-specific battleground lists from pre-election polling.
    Ballotpedia,
    /// States in the top quartile of campaign speech counts.
    HighAttention,
}

/// Swing-state list for a campaign under the given clustering scheme.
pub fn swing_states(campaign: Campaign, scheme: SwingScheme) -> Option<&'static [&'static str]> {
    use SwingScheme::*;
    let list: &'static [&'static str] = match (campaign, scheme) {
        (Campaign::Election2016, Ballotpedia) => &[
            "AZ", "CO", "FL", "IA", "MI", "NV", "NH", "NC", "OH", "PA", "VA", "WI",
        ],
        (Campaign::Election2016, HighAttention) => &["FL", "NC", "OH", "PA", "CO"],
        (Campaign::Election2020, Ballotpedia) => &[
            "AZ", "FL", "GA", "IA", "MI", "MN", "NV", "NH", "NC", "OH", "PA", "TX", "WI",
        ],
        (Campaign::Election2020, HighAttention) => &["PA", "NC", "FL", "MI", "WI", "AZ", "MN", "OH"],
        (Campaign::Election2024, Ballotpedia) => &["AZ", "GA", "MI", "NV", "NC", "PA", "WI"],
        (Campaign::Election2024, HighAttention) => &["IA", "PA", "NC", "NH", "MI", "WI"],
        _ => return None,
    };
    Some(list)
}

/// Whether `state` is a swing state in `campaign`; `None` outside the
/// three general-election campaigns.
pub fn is_swing(campaign: Campaign, state: &str, scheme: SwingScheme) -> Option<bool> {
    let state = state.trim().to_ascii_uppercase();
    swing_states(campaign, scheme).map(|list| list.contains(&state.as_str()))
}
