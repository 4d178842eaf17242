//! Restart policy: abandon the current search (keeping learned clauses)
//! when the epoch has processed too many nodes or run too long, up to a
//! fixed number of restarts.

use std::time::Duration;

#[derive(Debug, Clone, Copy)]
pub struct RestartPolicy {
    pub max_restarts: u32,
    pub node_threshold: u64,
    pub time_threshold: Duration,
    /// Restarts taken so far.
    pub epoch: u32,
}

impl Default for RestartPolicy {
    fn default() -> Self {
        RestartPolicy {
            max_restarts: 3,
            node_threshold: 300,
            time_threshold: Duration::from_secs(50),
            epoch: 0,
        }
    }
}

/// Counters for the current epoch (reset at every restart).
#[derive(Debug, Clone, Copy, Default)]
pub struct EpochStats {
    pub nodes_processed: u64,
    pub elapsed: Duration,
}

/// True iff another restart is allowed and either trigger fired.
pub fn should_restart(policy: &RestartPolicy, stats: &EpochStats) -> bool {
    policy.epoch < policy.max_restarts
        && (stats.nodes_processed > policy.node_threshold
            || stats.elapsed > policy.time_threshold)
}
