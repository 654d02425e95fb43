//! Per-robot DBP state machine.
//!
//! Each robot stores every accusation it has received, keeps a forwarding
//! budget per accusation, maintains the accusation graph, and memoizes the
//! blocklist. Accusations are always stored and forwarded regardless of
//! the local blocklist: only application messages are gated, because
//! filtering accusations would let robots' graphs drift apart.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::AccusationGraph;
use crate::ids::RobotId;
use crate::matching::blocklist_of;
use crate::messages::Accusation;

#[derive(Clone, Debug)]
pub struct DbpState {
    received: BTreeSet<Accusation>,
    forward_budget: BTreeMap<Accusation, u32>,
    graph: AccusationGraph,
    blocklist: BTreeSet<RobotId>,
    budget_n: u32,
}

impl DbpState {
    /// `budget_n` is the number of times each stored accusation is
    /// re-broadcast.
    pub fn new(budget_n: u32) -> Self {
        assert!(budget_n >= 1, "forwarding budget must be positive");
        DbpState {
            received: BTreeSet::new(),
            forward_budget: BTreeMap::new(),
            graph: AccusationGraph::new(),
            blocklist: BTreeSet::new(),
            budget_n,
        }
    }

    /// Store a received accusation. Returns true iff it was new; duplicates
    /// and self-accusations leave the state unchanged. New accusations are
    /// scheduled for forwarding with the full budget.
    pub fn on_receive(&mut self, acc: Accusation) -> bool {
        if !acc.is_well_formed() {
            return false;
        }
        if !self.received.insert(acc) {
            return false;
        }
        self.forward_budget.insert(acc, self.budget_n);
        if self.graph.insert_accusation(acc) {
            self.blocklist = blocklist_of(&self.graph);
        }
        true
    }

    /// Originate an accusation, storing it as if received and returning it
    /// for immediate broadcast. Re-issuing an accusation already held
    /// resets its forwarding budget: the origin restarting a flood is
    /// indistinguishable from the first flood.
    pub fn issue(&mut self, self_id: RobotId, accused: RobotId) -> Accusation {
        assert!(self_id != accused, "cooperative code never self-accuses");
        let acc = Accusation::new(self_id, accused);
        self.received.insert(acc);
        self.forward_budget.insert(acc, self.budget_n);
        if self.graph.insert_accusation(acc) {
            self.blocklist = blocklist_of(&self.graph);
        }
        acc
    }

    /// Accusations due for transmission this tick, in ascending
    /// (origin, accused) order, each with its budget decremented by one.
    pub fn drain_outbox(&mut self) -> Vec<Accusation> {
        let mut out = Vec::new();
        self.forward_budget.retain(|&acc, remaining| {
            out.push(acc);
            *remaining -= 1;
            *remaining > 0
        });
        out
    }

    /// Whether any accusation with positive remaining budget exists.
    pub fn has_pending_forwards(&self) -> bool {
        !self.forward_budget.is_empty()
    }

    pub fn is_blocked(&self, id: RobotId) -> bool {
        self.blocklist.contains(&id)
    }

    pub fn blocklist(&self) -> &BTreeSet<RobotId> {
        &self.blocklist
    }

    pub fn graph(&self) -> &AccusationGraph {
        &self.graph
    }

    pub fn received(&self) -> &BTreeSet<Accusation> {
        &self.received
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc(origin: u32, accused: u32) -> Accusation {
        Accusation::new(RobotId(origin), RobotId(accused))
    }

    #[test]
    fn receiving_a_new_accusation_updates_the_blocklist() {
        let mut state = DbpState::new(10);
        assert!(state.on_receive(acc(1, 2)));
        assert_eq!(state.blocklist(), &BTreeSet::from([RobotId(1), RobotId(2)]));
    }

    #[test]
    fn duplicate_receives_are_ignored() {
        let mut state = DbpState::new(10);
        assert!(state.on_receive(acc(1, 2)));
        assert!(!state.on_receive(acc(1, 2)));
        assert_eq!(state.received().len(), 1);
    }

    #[test]
    fn self_accusations_are_dropped() {
        let mut state = DbpState::new(10);
        assert!(!state.on_receive(acc(4, 4)));
        assert!(state.received().is_empty());
        assert!(state.blocklist().is_empty());
    }

    #[test]
    fn issuing_stores_and_returns_the_accusation() {
        let mut state = DbpState::new(10);
        let a = state.issue(RobotId(7), RobotId(3));
        assert_eq!(a, acc(7, 3));
        assert_eq!(state.blocklist(), &BTreeSet::from([RobotId(3), RobotId(7)]));
    }

    #[test]
    #[should_panic(expected = "never self-accuses")]
    fn self_issue_is_a_contract_violation() {
        let mut state = DbpState::new(10);
        let _ = state.issue(RobotId(7), RobotId(7));
    }

    #[test]
    fn two_accusers_of_one_robot_block_a_single_pair() {
        // Star on {3, 7, 8}: the maximum matching has size one, so only
        // the accused and its lowest accuser are blocked.
        let mut state = DbpState::new(10);
        state.on_receive(acc(7, 3));
        state.on_receive(acc(8, 3));
        assert_eq!(state.blocklist(), &BTreeSet::from([RobotId(3), RobotId(7)]));
    }

    #[test]
    fn budget_counts_down_per_drain() {
        let mut state = DbpState::new(2);
        state.on_receive(acc(1, 2));
        assert_eq!(state.drain_outbox(), vec![acc(1, 2)]);
        assert_eq!(state.drain_outbox(), vec![acc(1, 2)]);
        assert_eq!(state.drain_outbox(), vec![]);
        assert!(!state.has_pending_forwards());
    }

    #[test]
    fn drain_is_sorted_by_origin_then_accused() {
        let mut state = DbpState::new(1);
        state.on_receive(acc(3, 1));
        state.on_receive(acc(1, 4));
        state.on_receive(acc(1, 2));
        assert_eq!(state.drain_outbox(), vec![acc(1, 2), acc(1, 4), acc(3, 1)]);
    }

    #[test]
    fn reissue_resets_the_budget() {
        let mut state = DbpState::new(2);
        state.on_receive(acc(5, 6));
        let _ = state.drain_outbox();
        let _ = state.drain_outbox();
        assert!(!state.has_pending_forwards());
        let _ = state.issue(RobotId(5), RobotId(6));
        assert!(state.has_pending_forwards());
        assert_eq!(state.received().len(), 1);
    }

    #[test]
    fn empty_state_blocks_nobody() {
        let mut state = DbpState::new(10);
        assert!(!state.is_blocked(RobotId(0)));
        assert!(state.drain_outbox().is_empty());
    }

    #[test]
    fn blocklist_membership_is_a_plain_lookup() {
        let mut state = DbpState::new(10);
        state.on_receive(acc(1, 2));
        assert!(state.is_blocked(RobotId(2)));
        assert!(!state.is_blocked(RobotId(3)));
    }
}
