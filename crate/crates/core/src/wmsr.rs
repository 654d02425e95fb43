//! W-MSR trimmed-mean filter, the resilient-consensus baseline.
//!
//! Each round a robot sorts the values received from its neighbors,
//! discards up to `F` values strictly greater than its own (the largest
//! ones) and up to `F` strictly smaller (the smallest ones), and averages
//! the survivors together with its own value. Unlike the blocklist
//! protocol, the resilience parameter `F` must be chosen a priori and the
//! connectivity requirements grow with it. 2D states are filtered
//! per-coordinate.

/// Resilience parameter, fixed for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WmsrParams {
    pub f: usize,
}

/// One W-MSR update. An empty neighbor list returns `own` unchanged.
pub fn wmsr_step(own: f64, neighbor_values: &[f64], params: WmsrParams) -> f64 {
    wmsr_step_with_survivors(own, neighbor_values, params).0
}

/// Like [`wmsr_step`], also reporting how many neighbor values survived
/// the trim. A zero count means the robot learned nothing this round.
pub fn wmsr_step_with_survivors(
    own: f64,
    neighbor_values: &[f64],
    params: WmsrParams,
) -> (f64, usize) {
    if neighbor_values.is_empty() {
        return (own, 0);
    }
    let mut sorted = neighbor_values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let below = sorted.iter().filter(|&&v| v < own).count();
    let above = sorted.iter().filter(|&&v| v > own).count();
    let trim_low = below.min(params.f);
    let trim_high = above.min(params.f);

    let survivors = &sorted[trim_low..sorted.len() - trim_high];
    let sum: f64 = own + survivors.iter().sum::<f64>();
    (sum / (survivors.len() + 1) as f64, survivors.len())
}

/// Robots that directly observe the reference quantity pin their state to
/// the observation before the consensus round.
pub fn wmsr_observer_inject(_own: f64, observation: f64) -> f64 {
    observation
}
