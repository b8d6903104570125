use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::{AnswerPredicate, Next, NodeId, QuestionKind, Questionnaire, END_MARKER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoNodes,
    NonPositiveDuration,
    DuplicateId,
    ReservedId,
    MissingEntry,
    DanglingBranchTarget,
    DanglingDefaultNext,
    StatementWithBranches,
    StatementCountsTowardProgress,
    LikertPointCount,
    IncompatiblePredicate,
    PredicateRange,
    CycleDetected,
    NoPathToEnd,
}

impl ViolationKind {
    pub fn reason(&self) -> &'static str {
        match self {
            ViolationKind::NoNodes => "questionnaire has no nodes",
            ViolationKind::NonPositiveDuration => "expected_duration_min must be positive",
            ViolationKind::DuplicateId => "duplicate node id",
            ViolationKind::ReservedId => "node id is reserved",
            ViolationKind::MissingEntry => "entry node does not exist",
            ViolationKind::DanglingBranchTarget => "dangling branch target",
            ViolationKind::DanglingDefaultNext => "dangling default_next",
            ViolationKind::StatementWithBranches => "statement node has branches",
            ViolationKind::StatementCountsTowardProgress => {
                "statement node counts toward progress"
            }
            ViolationKind::LikertPointCount => "likert point_count outside 2..=11",
            ViolationKind::IncompatiblePredicate => "predicate incompatible with node kind",
            ViolationKind::PredicateRange => "predicate range outside the node's valid range",
            ViolationKind::CycleDetected => "cycle detected",
            ViolationKind::NoPathToEnd => "node cannot reach the end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: Option<NodeId>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(id) => write!(f, "{id}: {}", self.kind.reason())?,
            None => f.write_str(self.kind.reason())?,
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, node: Option<&NodeId>, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation { node: node.cloned(), kind, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant and returns all violations found.
pub fn validate(q: &Questionnaire) -> ValidationReport {
    let mut report = ValidationReport::default();

    if q.nodes.is_empty() {
        report.push(None, ViolationKind::NoNodes, "");
    }
    if q.expected_duration_min == 0 {
        report.push(None, ViolationKind::NonPositiveDuration, "");
    }

    let mut seen = HashSet::new();
    for node in &q.nodes {
        if !seen.insert(&node.id) {
            report.push(Some(&node.id), ViolationKind::DuplicateId, "");
        }
        if node.id.as_str() == END_MARKER {
            report.push(Some(&node.id), ViolationKind::ReservedId, END_MARKER);
        }
    }
    if !q.nodes.is_empty() && !seen.contains(&q.entry_node) {
        report.push(Some(&q.entry_node), ViolationKind::MissingEntry, "");
    }

    for node in &q.nodes {
        for b in &node.branches {
            if !seen.contains(&b.target) {
                report.push(Some(&node.id), ViolationKind::DanglingBranchTarget, b.target.as_str());
            }
        }
        if let Next::Node(t) = &node.default_next {
            if !seen.contains(t) {
                report.push(Some(&node.id), ViolationKind::DanglingDefaultNext, t.as_str());
            }
        }
        if node.kind == QuestionKind::Statement {
            if !node.branches.is_empty() {
                report.push(Some(&node.id), ViolationKind::StatementWithBranches, "");
            }
            if node.counts_toward_progress {
                report.push(Some(&node.id), ViolationKind::StatementCountsTowardProgress, "");
            }
        }
        if let QuestionKind::Likert { point_count } = node.kind {
            if !(2..=11).contains(&point_count) {
                report.push(
                    Some(&node.id),
                    ViolationKind::LikertPointCount,
                    point_count.to_string(),
                );
            }
        }
        for b in &node.branches {
            check_predicate(&mut report, &node.id, &node.kind, &b.predicate);
        }
    }

    check_graph(q, &mut report);
    report
}

fn check_predicate(
    report: &mut ValidationReport,
    id: &NodeId,
    kind: &QuestionKind,
    pred: &AnswerPredicate,
) {
    match pred {
        AnswerPredicate::Always => {}
        AnswerPredicate::EqualsYes | AnswerPredicate::EqualsNo => {
            if *kind != QuestionKind::YesNo {
                report.push(Some(id), ViolationKind::IncompatiblePredicate, kind.name());
            }
        }
        AnswerPredicate::RatingInRange { lo, hi } => match kind.rating_range() {
            None => report.push(Some(id), ViolationKind::IncompatiblePredicate, kind.name()),
            Some((min, max)) => {
                if lo > hi || *lo < min || *hi > max {
                    report.push(
                        Some(id),
                        ViolationKind::PredicateRange,
                        format!("{lo}..={hi} not within {min}..={max}"),
                    );
                }
            }
        },
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Visiting,
    Done,
}

/// Depth-first search for back edges, followed by a reverse reachability
/// pass from End.
fn check_graph(q: &Questionnaire, report: &mut ValidationReport) {
    let ids: BTreeMap<&NodeId, usize> = q.nodes.iter().enumerate().map(|(i, n)| (&n.id, i)).collect();
    let succ: Vec<Vec<Option<usize>>> = q
        .nodes
        .iter()
        .map(|n| {
            n.branches
                .iter()
                .map(|b| Some(&b.target))
                .chain(std::iter::once(n.default_next.node()))
                .filter_map(|t| match t {
                    None => Some(None),
                    Some(id) => ids.get(id).map(|&i| Some(i)),
                })
                .collect()
        })
        .collect();

    let mut marks: Vec<Option<Mark>> = vec![None; q.nodes.len()];
    let mut cyclic: Vec<usize> = Vec::new();
    for start in 0..q.nodes.len() {
        if marks[start].is_some() {
            continue;
        }
        // iterative DFS: (node, next successor index)
        let mut stack = vec![(start, 0usize)];
        marks[start] = Some(Mark::Visiting);
        while let Some(top) = stack.last_mut() {
            let (node, pos) = *top;
            if pos < succ[node].len() {
                top.1 += 1;
                let next = succ[node][pos];
                if let Some(n) = next {
                    match marks[n] {
                        None => {
                            marks[n] = Some(Mark::Visiting);
                            stack.push((n, 0));
                        }
                        Some(Mark::Visiting) => cyclic.push(n),
                        Some(Mark::Done) => {}
                    }
                }
            } else {
                marks[node] = Some(Mark::Done);
                stack.pop();
            }
        }
    }
    cyclic.sort_unstable();
    cyclic.dedup();
    for i in cyclic {
        report.push(Some(&q.nodes[i].id), ViolationKind::CycleDetected, "");
    }

    // A node reaches End if any successor is End or reaches End.
    let mut reaches = vec![false; q.nodes.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..q.nodes.len() {
            if !reaches[i] && succ[i].iter().any(|s| s.is_none_or(|j| reaches[j])) {
                reaches[i] = true;
                changed = true;
            }
        }
    }
    for (i, ok) in reaches.iter().enumerate() {
        if !ok {
            report.push(Some(&q.nodes[i].id), ViolationKind::NoPathToEnd, "");
        }
    }
}
