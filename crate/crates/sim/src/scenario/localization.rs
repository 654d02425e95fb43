//! Cooperative localization from anchor broadcasts.
//!
//! Anchors know their position and broadcast it as a point box. Non-anchor
//! robots fold received localization beliefs, each dilated by the
//! transmission range plus per-tick travel, into their own belief box, and
//! re-broadcast it bundling the freshest anchor message they folded.
//! Non-anchor messages without an anchor attachment are ignored.
//!
//! Two accusation rules apply. Anchors check every anchor-flagged claim
//! (direct or attached) against network physics: a claim of age `a` can
//! be at most `net_speed * a` from the receiving anchor. All robots check
//! non-anchor messages for internal consistency: a cooperative sender's
//! belief always lies within its attachment's box dilated by
//! `net_speed * (outer time - attachment time)`, because each relay
//! generation adds one tick of age and one dilation step.

use dbp_core::geom::Vec2;
use dbp_core::ids::Timestep;
use dbp_core::messages::LocalizationMsg;
use dbp_core::protocol::DbpState;

use super::{Envelope, Payload, StepCtx, StepOutput, RULE_EPS};

/// Structural validity of a received localization message. Messages that
/// fail are junk no cooperative robot produces; they are dropped without
/// accusation.
pub fn basic_valid(msg: &LocalizationMsg, now: Timestep) -> bool {
    if msg.belief.is_empty() || msg.local_time > now {
        return false;
    }
    if msg.anchor_flag {
        msg.attached.is_none()
    } else {
        match &msg.attached {
            Some(att) => {
                att.anchor_flag
                    && att.attached.is_none()
                    && !att.belief.is_empty()
                    && att.local_time <= now
            }
            None => false, // non-anchor messages without attachments are ignored
        }
    }
}

/// Rule 1, applied by anchors: an anchor claim of age `a` cannot originate
/// further than `net_speed * a` from here.
pub fn anchor_claim_violation(
    claim: &LocalizationMsg,
    receiver_pos: Vec2,
    now: Timestep,
    net_speed: f64,
) -> bool {
    let age = now.since(claim.local_time) as f64;
    receiver_pos.distance(claim.belief.center()) > net_speed * age + RULE_EPS
}

/// Rule 2, applied by everyone: a non-anchor message must be internally
/// consistent with its attachment. A cooperative sender's belief is an
/// intersection of once-dilated received beliefs, each of which sits
/// inside its own attachment's cone, so the belief always lies within the
/// attachment's box dilated by `net_speed * (gap + 1)` — the `+ 1` covers
/// the tick between folding a message and re-broadcasting the result. A
/// violation therefore always marks the sender.
pub fn attachment_violation(msg: &LocalizationMsg, net_speed: f64) -> bool {
    let Some(att) = msg.attached.as_deref() else {
        return false; // no attachment: the message is ignored, not accused
    };
    if msg.local_time < att.local_time {
        return true; // the bundled anchor message cannot postdate the relay
    }
    let gap = (msg.local_time.0 - att.local_time.0) as f64;
    !att.belief.dilate(net_speed * (gap + 1.0)).contains_box(msg.belief, RULE_EPS)
}

/// Fold order: most recent underlying anchor time first, then a stable
/// pass that puts direct anchor messages ahead of relays. Callers supply
/// arrival order (ascending sender) so ties stay deterministic.
pub fn sort_for_fold(msgs: &mut [LocalizationMsg]) {
    msgs.sort_by(|a, b| {
        let ta = a.underlying_anchor().map(|m| m.local_time).unwrap_or(Timestep(0));
        let tb = b.underlying_anchor().map(|m| m.local_time).unwrap_or(Timestep(0));
        tb.cmp(&ta)
    });
    msgs.sort_by_key(|m| std::cmp::Reverse(m.anchor_flag));
}

#[derive(Clone, Debug, Default)]
pub struct FoldOutcome {
    pub belief: Option<dbp_core::geom::Aabb>,
    pub latest_anchor: Option<LocalizationMsg>,
}

/// Intersect dilated beliefs in order; a message that would empty the
/// running intersection is dropped and the fold ends. The freshest anchor
/// message actually folded (ties to the lower sender id) is returned for
/// bundling.
pub fn localization_fold(sorted: &[LocalizationMsg], dilation: f64) -> FoldOutcome {
    let mut running = None;
    let mut latest: Option<&LocalizationMsg> = None;
    for msg in sorted {
        let grown = msg.belief.dilate(dilation);
        let candidate = match running {
            None => grown,
            Some(r) => grown.intersect(r),
        };
        if candidate.is_empty() {
            break;
        }
        running = Some(candidate);
        if let Some(anchor) = msg.underlying_anchor() {
            let newer = latest.is_none_or(|cur| {
                anchor.local_time > cur.local_time
                    || (anchor.local_time == cur.local_time && anchor.sender < cur.sender)
            });
            if newer {
                latest = Some(anchor);
            }
        }
    }
    FoldOutcome { belief: running, latest_anchor: latest.cloned() }
}

#[derive(Clone, Debug, Default)]
pub struct LocState {
    pub belief: Option<dbp_core::geom::Aabb>,
    pub latest_anchor: Option<LocalizationMsg>,
}

pub fn coop_step(
    state: &mut LocState,
    dbp: Option<&DbpState>,
    is_anchor: bool,
    inbox: &[Envelope],
    ctx: &StepCtx,
    out: &mut StepOutput,
) {
    let cfg = ctx.cfg;
    let now = ctx.now;
    let net_speed = cfg.rule_speed_bound();
    let blocked = |id| dbp.is_some_and(|d: &DbpState| d.is_blocked(id));

    // Information from blocked senders is deleted, including a previously
    // adopted anchor bundle.
    if state.latest_anchor.as_ref().is_some_and(|a| blocked(a.sender)) {
        state.latest_anchor = None;
    }

    let mut candidates: Vec<LocalizationMsg> = Vec::new();
    for env in inbox {
        let Payload::Loc(msg) = &env.payload else { continue };
        // The radio stamps the true sender; a mismatched sender field
        // would be a forged signature.
        if msg.sender != env.sender || msg.sender == ctx.self_id {
            continue;
        }
        if blocked(msg.sender) || !basic_valid(msg, now) {
            continue;
        }
        if let Some(att) = msg.attached.as_deref() {
            if blocked(att.sender) {
                continue;
            }
        }
        if !msg.anchor_flag && dbp.is_some() && attachment_violation(msg, net_speed) {
            out.accuse.push(msg.sender);
            continue;
        }
        candidates.push(msg.clone());
    }

    if is_anchor {
        if dbp.is_some() {
            for msg in &candidates {
                let Some(claim) = msg.underlying_anchor() else { continue };
                if claim.sender == ctx.self_id || blocked(claim.sender) {
                    continue;
                }
                if anchor_claim_violation(claim, ctx.pos, now, net_speed) {
                    out.accuse.push(claim.sender);
                }
            }
        }
        // Anchors localize themselves; they only broadcast.
        if now.0 % cfg.anchor_period == 0 {
            out.outgoing.push(Payload::Loc(LocalizationMsg::from_anchor(
                ctx.self_id,
                now,
                dbp_core::geom::Aabb::point(ctx.pos),
            )));
        }
        return;
    }

    if !candidates.is_empty() {
        sort_for_fold(&mut candidates);
        let outcome = localization_fold(&candidates, cfg.loc_dilation());
        if outcome.belief.is_some() {
            state.belief = outcome.belief;
            if outcome.latest_anchor.is_some() {
                state.latest_anchor = outcome.latest_anchor;
            }
        }
    }

    if let (Some(belief), Some(anchor)) = (state.belief, state.latest_anchor.clone()) {
        out.outgoing.push(Payload::Loc(LocalizationMsg::from_non_anchor(
            ctx.self_id,
            now,
            belief,
            anchor,
        )));
    }
}

/// Byzantine behavior: impersonate an anchor, claiming a point position
/// offset from the true one by fresh uniform draws in the configured
/// square. The stamp is one tick ahead of the send tick so the claim
/// arrives looking brand new and sorts to the front of receivers' folds.
pub fn byz_step(rng: &mut crate::rng::Pcg32, ctx: &StepCtx, out: &mut StepOutput) {
    let range = ctx.cfg.attack.cl_offset_range;
    let dx = rng.range_f64(-range, range);
    let dy = rng.range_f64(-range, range);
    let claim = ctx.pos + Vec2::new(dx, dy);
    out.outgoing.push(Payload::Loc(LocalizationMsg::from_anchor(
        ctx.self_id,
        Timestep(ctx.now.0 + 1),
        dbp_core::geom::Aabb::point(claim),
    )));
}
