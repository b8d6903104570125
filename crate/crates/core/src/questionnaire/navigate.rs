use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{AnswerValue, Next, NodeId, QuestionKind, Questionnaire};

/// A caller broke a navigation precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractViolation {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("answer {answer} is not valid for {kind} node {node}")]
    IncompatibleAnswer { node: NodeId, kind: &'static str, answer: String },
    #[error("node {0} is not reachable from the entry node via the given answers")]
    Unreachable(String),
    #[error("questionnaire graph contains a cycle through {0}")]
    Cyclic(NodeId),
}

/// Target of the first matching branch, else the node's `default_next`.
pub fn next_node(
    q: &Questionnaire,
    current: &NodeId,
    answer: &AnswerValue,
) -> Result<Next, ContractViolation> {
    let node = q.node(current).ok_or_else(|| ContractViolation::UnknownNode(current.clone()))?;
    if node.kind == QuestionKind::Statement {
        return Ok(node.default_next.clone());
    }
    if !answer.compatible_with(&node.kind) {
        return Err(ContractViolation::IncompatibleAnswer {
            node: current.clone(),
            kind: node.kind.name(),
            answer: format!("{answer:?}"),
        });
    }
    Ok(node
        .branches
        .iter()
        .find(|b| b.predicate.matches(answer))
        .map(|b| Next::Node(b.target.clone()))
        .unwrap_or_else(|| node.default_next.clone()))
}

/// Walks from the entry node through recorded answers (statements fall
/// through to `default_next`) and returns the visited nodes up to and
/// including `current`. `current == End` requires the walk to reach End.
pub fn realized_path<'q>(
    q: &'q Questionnaire,
    answers: &BTreeMap<NodeId, AnswerValue>,
    current: &Next,
) -> Result<Vec<&'q NodeId>, ContractViolation> {
    let mut path = Vec::new();
    let mut at = Next::Node(q.entry_node.clone());
    for _ in 0..=q.nodes.len() {
        if &at == current {
            if let Next::Node(id) = &at {
                let node = q.node(id).ok_or_else(|| ContractViolation::UnknownNode(id.clone()))?;
                path.push(&node.id);
            }
            return Ok(path);
        }
        let id = match &at {
            Next::End => return Err(ContractViolation::Unreachable(current.to_string())),
            Next::Node(id) => id,
        };
        let node = q.node(id).ok_or_else(|| ContractViolation::UnknownNode(id.clone()))?;
        path.push(&node.id);
        at = if node.kind == QuestionKind::Statement {
            node.default_next.clone()
        } else {
            match answers.get(id) {
                Some(a) => next_node(q, id, a)?,
                None => return Err(ContractViolation::Unreachable(current.to_string())),
            }
        };
    }
    Err(ContractViolation::Cyclic(q.entry_node.clone()))
}

/// Largest number of progress-counting nodes on any path from `from` to
/// End, `from` included.
fn longest_remaining(
    q: &Questionnaire,
    from: &NodeId,
    memo: &mut HashMap<NodeId, usize>,
    depth: usize,
) -> Result<usize, ContractViolation> {
    if let Some(&v) = memo.get(from) {
        return Ok(v);
    }
    if depth > q.nodes.len() {
        return Err(ContractViolation::Cyclic(from.clone()));
    }
    let node = q.node(from).ok_or_else(|| ContractViolation::UnknownNode(from.clone()))?;
    let mut best = 0;
    for target in node.branches.iter().map(|b| &b.target).chain(node.default_next.node()) {
        best = best.max(longest_remaining(q, target, memo, depth + 1)?);
    }
    let v = best + usize::from(node.counts_toward_progress);
    memo.insert(from.clone(), v);
    Ok(v)
}

/// Completion fraction of a session positioned at `current`.
///
/// The numerator counts answered progress nodes on the realized path. The
/// denominator adds the longest possible remainder from `current`, so the
/// value never drops when a branch opens a longer sub-path, and nodes on a
/// skipped branch disappear from it once the branch is taken.
pub fn progress(
    q: &Questionnaire,
    answers: &BTreeMap<NodeId, AnswerValue>,
    current: &Next,
) -> Result<f64, ContractViolation> {
    let path = realized_path(q, answers, current)?;
    let answered = path
        .iter()
        .filter(|id| Next::Node((**id).clone()) != *current)
        .filter(|id| q.node(id).is_some_and(|n| n.counts_toward_progress))
        .count();
    let remaining = match current {
        Next::End => 0,
        Next::Node(id) => longest_remaining(q, id, &mut HashMap::new(), 0)?,
    };
    let total = answered + remaining;
    if total == 0 {
        return Ok(if *current == Next::End { 1.0 } else { 0.0 });
    }
    Ok(answered as f64 / total as f64)
}
