//! The `oracle` subcommand: sampled kernel checks as one JSON report.

use plaidy_core::oracle::{
    locally_checkable, parser_round_trip, rewrite_equivalence, sampled_soundness, EquivalenceReport, RoundTripReport,
    SoundnessReport,
};
use serde::Serialize;

/// Environments per instance.
pub const ENVS: usize = 100;

/// Star unrolling depth, from `PLAIDY_BUDGET_STAR` when set.
pub fn star_budget() -> Result<usize, String> {
    match std::env::var("PLAIDY_BUDGET_STAR") {
        Ok(v) => v.trim().parse().map_err(|_| format!("PLAIDY_BUDGET_STAR must be a natural number, got `{v}`")),
        Err(_) => Ok(4),
    }
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub fuzz: usize,
    pub star_unroll: usize,
    pub envs: usize,
    pub soundness: Vec<SoundnessReport>,
    pub equivalence: Vec<EquivalenceReport>,
    pub round_trip: RoundTripReport,
    pub ok: bool,
}

pub fn run(fuzz: usize, seed: u64, star: usize) -> OracleReport {
    let mut soundness = Vec::new();
    let mut equivalence = Vec::new();
    for rule in locally_checkable() {
        soundness.push(sampled_soundness(rule, false, fuzz, ENVS, star, seed));
        if rule.is_rewrite() {
            soundness.push(sampled_soundness(rule, true, fuzz, ENVS, star, seed));
            equivalence.push(rewrite_equivalence(rule, fuzz, ENVS, star, seed));
        }
    }
    let round_trip = parser_round_trip(fuzz, seed);
    let ok = soundness.iter().all(|r| r.violations == 0)
        && equivalence.iter().all(|r| r.mismatches == 0)
        && round_trip.failures == 0;
    OracleReport { seed, fuzz, star_unroll: star, envs: ENVS, soundness, equivalence, round_trip, ok }
}
