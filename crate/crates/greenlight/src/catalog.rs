//! Built-in reputation catalog: the published sample f2 table, verbatim.
//!
//! Eight rungs of the time-domain ladder, from organic realtime response to
//! whole-node shutdown. The "Energy TE" row carries worst > average exactly
//! as published; it loads as-is and surfaces through the warning API.

use std::sync::OnceLock;

use crate::money::Money;
use crate::value::{ReputationEntry, ReputationProfile, TimeScale};

const ROWS: [(&str, f64, i64, i64, i64); 8] = [
    ("realtime", 1e-6, 0, 0, 0),
    ("802.3az", 1e-3, 50_000, 50_000, 50_000),
    ("Energy TE", 1e-1, 50_000, 40_000, 50_000),
    ("TE /link", 1e0, 40_000, 10_000, 0),
    ("TE /plane", 1e1, 20_000, -10_000, -50_000),
    ("TE /PIC", 5e1, 30_000, -10_000, -100_000),
    ("TE /card", 5e2, 50_000, -20_000, -10_000_000),
    ("TE /node", 1e3, -100_000, -100_000, -50_000_000),
];

pub fn builtin_profile() -> &'static ReputationProfile {
    static PROFILE: OnceLock<ReputationProfile> = OnceLock::new();
    PROFILE.get_or_init(|| {
        let entries = ROWS
            .iter()
            .map(|&(tech, t, best, average, worst)| ReputationEntry {
                technology: tech.to_string(),
                time_scale: TimeScale::new(t).expect("catalog time scales are positive"),
                best: Money::dollars(best),
                average: Money::dollars(average),
                worst: Money::dollars(worst),
            })
            .collect();
        ReputationProfile::new(entries).expect("builtin catalog satisfies profile invariants")
    })
}
