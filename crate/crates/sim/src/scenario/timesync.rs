//! Clock synchronization against a universal reference.
//!
//! Anchors read the reference clock on a fixed period and broadcast the
//! reading; non-anchors set their clock to the largest observed time in
//! their cache whenever new observations arrive, and drift by
//! `1 + mu + U[-0.05, 0.05]` per tick otherwise. An anchor accuses the
//! origin of any observation claiming a time ahead of the anchor's own
//! clock: cooperative observations can only lag the reference.

use dbp_core::ids::Timestep;
use dbp_core::messages::ClockObservation;
use dbp_core::protocol::DbpState;
use dbp_core::wmsr::{wmsr_step_with_survivors, WmsrParams};

use crate::rng::Pcg32;

use super::{Envelope, Payload, StepCtx, StepOutput};

/// The max-clock update rule: on ticks with new arrivals the clock becomes
/// the cache maximum (unconditionally — even a smaller value is adopted if
/// the cache holds nothing larger); otherwise it drifts.
pub fn clock_update(local: f64, mu: f64, arrivals_max: Option<f64>, drift_draw: f64) -> f64 {
    match arrivals_max {
        Some(max) => max,
        None => local + 1.0 + mu + drift_draw,
    }
}

/// Anchor accusation rule: the observed time must not be ahead of the
/// anchor's local clock.
pub fn anchor_accuses(local: f64, obs: &ClockObservation) -> bool {
    obs.observed_time > local
}

#[derive(Clone, Debug)]
pub struct CachedClock {
    pub obs: ClockObservation,
    pub remaining_tx: u32,
    pub received_at: Timestep,
}

#[derive(Clone, Debug)]
pub struct ClockState {
    pub local: f64,
    pub mu: f64,
    pub cache: Vec<CachedClock>,
}

impl ClockState {
    pub fn new(mu: f64) -> Self {
        ClockState { local: 0.0, mu, cache: Vec::new() }
    }
}

pub fn coop_step(
    state: &mut ClockState,
    dbp: Option<&DbpState>,
    is_anchor: bool,
    rng: &mut Pcg32,
    inbox: &[Envelope],
    ctx: &StepCtx,
    out: &mut StepOutput,
) {
    let cfg = ctx.cfg;
    let now = ctx.now;
    let blocked = |id| dbp.is_some_and(|d: &DbpState| d.is_blocked(id));

    state
        .cache
        .retain(|c| now.since(c.received_at) <= cfg.obs_expiry && !blocked(c.obs.observer));

    // Clock bookkeeping first, so accusal below compares against this
    // tick's local time.
    if is_anchor {
        if now.0 % cfg.anchor_period == 0 {
            state.local = ctx.reference_clock;
            let own = ClockObservation { observer: ctx.self_id, observed_time: state.local };
            out.outgoing.push(Payload::ClockObs(own));
        } else {
            let draw = rng.range_f64(-0.05, 0.05);
            state.local = clock_update(state.local, state.mu, None, draw);
        }
    }

    // Ingest new observations.
    let mut new_arrivals = false;
    for env in inbox {
        let Payload::ClockObs(obs) = &env.payload else { continue };
        if obs.observer == ctx.self_id || blocked(obs.observer) || !obs.observed_time.is_finite() {
            continue;
        }
        let duplicate = state
            .cache
            .iter()
            .any(|c| c.obs.observer == obs.observer && c.obs.observed_time == obs.observed_time);
        if duplicate {
            continue;
        }
        if is_anchor && dbp.is_some() && anchor_accuses(state.local, obs) {
            out.accuse.push(obs.observer);
        }
        new_arrivals = true;
        state.cache.push(CachedClock {
            obs: *obs,
            // Anchors never relay observations.
            remaining_tx: if is_anchor { 0 } else { cfg.retransmit_cap },
            received_at: now,
        });
    }

    if !is_anchor {
        let arrivals_max = if new_arrivals {
            state
                .cache
                .iter()
                .map(|c| c.obs.observed_time)
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        } else {
            None
        };
        state.local = if arrivals_max.is_some() {
            clock_update(state.local, state.mu, arrivals_max, 0.0)
        } else {
            let draw = rng.range_f64(-0.05, 0.05);
            clock_update(state.local, state.mu, None, draw)
        };

        // Re-transmit the largest cached observation with budget left.
        let candidate = state
            .cache
            .iter_mut()
            .filter(|c| c.remaining_tx > 0)
            .max_by(|a, b| {
                a.obs
                    .observed_time
                    .total_cmp(&b.obs.observed_time)
                    .then(b.obs.observer.cmp(&a.obs.observer))
            });
        if let Some(entry) = candidate {
            entry.remaining_tx -= 1;
            out.outgoing.push(Payload::ClockObs(entry.obs));
        }
    }
}

/// Byzantine behavior: broadcast the reference clock plus a fixed offset,
/// on the same period as the anchors.
pub fn byz_step(ctx: &StepCtx, out: &mut StepOutput) {
    if ctx.now.0 % ctx.cfg.anchor_period == 0 {
        out.outgoing.push(Payload::ClockObs(ClockObservation {
            observer: ctx.self_id,
            observed_time: ctx.reference_clock + ctx.cfg.attack.ts_offset,
        }));
    }
}

/// W-MSR variant: scalar consensus on clock values broadcast every tick.
#[derive(Clone, Debug)]
pub struct WmsrClock {
    pub clock: f64,
    pub mu: f64,
    pub influenced: bool,
}

impl WmsrClock {
    pub fn new(mu: f64) -> Self {
        WmsrClock { clock: 0.0, mu, influenced: false }
    }
}

pub fn wmsr_coop_step(
    state: &mut WmsrClock,
    f: usize,
    is_anchor: bool,
    rng: &mut Pcg32,
    inbox: &[Envelope],
    ctx: &StepCtx,
    out: &mut StepOutput,
) {
    if is_anchor && ctx.now.0 % ctx.cfg.anchor_period == 0 {
        state.clock = ctx.reference_clock;
    } else {
        let draw = rng.range_f64(-0.05, 0.05);
        state.clock += 1.0 + state.mu + draw;
    }

    if !is_anchor {
        let values: Vec<f64> = inbox
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::Consensus1(v) if v.is_finite() => Some(*v),
                _ => None,
            })
            .collect();
        let (clock, survivors) = wmsr_step_with_survivors(state.clock, &values, WmsrParams { f });
        state.clock = clock;
        if survivors > 0 {
            state.influenced = true;
        }
    }

    out.outgoing.push(Payload::Consensus1(state.clock));
}

pub fn wmsr_byz_step(ctx: &StepCtx, out: &mut StepOutput) {
    out.outgoing.push(Payload::Consensus1(ctx.reference_clock + ctx.cfg.attack.ts_offset));
}
