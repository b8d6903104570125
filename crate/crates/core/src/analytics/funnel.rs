//! Stage-by-stage flow of attempts, for Sankey diagrams.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::outcome::{CallOutcome, ProgressBucket};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelNode {
    pub id: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelEdge {
    pub from: String,
    pub to: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub nodes: Vec<FunnelNode>,
    pub edges: Vec<FunnelEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunnelError {
    #[error("{outcomes} outcomes do not partition {attempts} attempts")]
    NotPartition { attempts: u64, outcomes: u64 },
    #[error("flow not conserved at {node}: in {inflow}, out {outflow}")]
    NotConserved { node: String, inflow: u64, outflow: u64 },
}

/// Stage path of an outcome, from `attempted` to its leaf.
pub fn stage_path(o: &CallOutcome) -> Vec<&'static str> {
    let mut p = vec!["attempted"];
    match o {
        CallOutcome::NotPickedUp => p.push("not_picked_up"),
        CallOutcome::NotClickedThrough => p.push("not_clicked_through"),
        CallOutcome::HungUpAtAiReveal => p.extend(["connected", "hung_up_at_ai_reveal"]),
        CallOutcome::ExplicitRefusal => p.extend(["connected", "explicit_refusal"]),
        CallOutcome::EarlyBreakOff => p.extend(["connected", "engaged", "progress_0_10"]),
        CallOutcome::ProgressBucket(b) => {
            p.extend(["connected", "engaged"]);
            match b {
                ProgressBucket::P11To25 => p.push("progress_11_25"),
                ProgressBucket::P26To50 => p.push("progress_26_50"),
                ProgressBucket::P51To75 => p.push("progress_51_75"),
                ProgressBucket::P76To99 => p.extend(["progress_76_100", "partial_76_99"]),
            }
        }
        CallOutcome::FullyCompleted => {
            p.extend(["connected", "engaged", "progress_76_100", "fully_completed"])
        }
    }
    p
}

const NODE_ORDER: [&str; 14] = [
    "attempted",
    "not_picked_up",
    "not_clicked_through",
    "connected",
    "hung_up_at_ai_reveal",
    "explicit_refusal",
    "engaged",
    "progress_0_10",
    "progress_11_25",
    "progress_26_50",
    "progress_51_75",
    "progress_76_100",
    "partial_76_99",
    "fully_completed",
];

fn rank(id: &str) -> usize {
    NODE_ORDER.iter().position(|n| *n == id).unwrap_or(NODE_ORDER.len())
}

/// Builds the funnel; zero-count nodes and edges are omitted.
pub fn sankey_flow(attempts: u64, outcomes: &[CallOutcome]) -> Result<Funnel, FunnelError> {
    if outcomes.len() as u64 != attempts {
        return Err(FunnelError::NotPartition { attempts, outcomes: outcomes.len() as u64 });
    }
    let mut nodes: BTreeMap<&str, u64> = BTreeMap::new();
    let mut edges: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for o in outcomes {
        let path = stage_path(o);
        for id in &path {
            *nodes.entry(id).or_default() += 1;
        }
        for w in path.windows(2) {
            *edges.entry((w[0], w[1])).or_default() += 1;
        }
    }
    if attempts == 0 {
        nodes.insert("attempted", 0);
    }
    let mut nodes: Vec<FunnelNode> =
        nodes.into_iter().map(|(id, count)| FunnelNode { id: id.into(), count }).collect();
    nodes.sort_by_key(|n| rank(&n.id));
    let mut edges: Vec<FunnelEdge> = edges
        .into_iter()
        .map(|((from, to), count)| FunnelEdge { from: from.into(), to: to.into(), count })
        .collect();
    edges.sort_by_key(|e| (rank(&e.from), rank(&e.to)));
    let f = Funnel { nodes, edges };
    f.check_conservation()?;
    Ok(f)
}

impl Funnel {
    pub fn count(&self, id: &str) -> u64 {
        self.nodes.iter().find(|n| n.id == id).map_or(0, |n| n.count)
    }

    /// Every node's count equals its inflow (except the root) and, when it
    /// has outgoing edges, its outflow.
    pub fn check_conservation(&self) -> Result<(), FunnelError> {
        for n in &self.nodes {
            let inflow: u64 = self.edges.iter().filter(|e| e.to == n.id).map(|e| e.count).sum();
            let outflow: u64 = self.edges.iter().filter(|e| e.from == n.id).map(|e| e.count).sum();
            let has_in = self.edges.iter().any(|e| e.to == n.id);
            let has_out = self.edges.iter().any(|e| e.from == n.id);
            if has_in && inflow != n.count {
                return Err(FunnelError::NotConserved { node: n.id.clone(), inflow, outflow: n.count });
            }
            if has_out && outflow != n.count {
                return Err(FunnelError::NotConserved { node: n.id.clone(), inflow: n.count, outflow });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("funnel serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_unanswered() {
        let f = sankey_flow(10, &[CallOutcome::NotPickedUp; 10]).unwrap();
        assert_eq!(f.edges, vec![FunnelEdge { from: "attempted".into(), to: "not_picked_up".into(), count: 10 }]);
    }

    #[test]
    fn partition_required() {
        assert!(matches!(sankey_flow(3, &[CallOutcome::NotPickedUp]), Err(FunnelError::NotPartition { .. })));
    }

    #[test]
    fn conservation_detects_tampering() {
        let mut f = sankey_flow(2, &[CallOutcome::FullyCompleted, CallOutcome::NotPickedUp]).unwrap();
        f.edges[0].count += 1;
        assert!(f.check_conservation().is_err());
    }
}
