use std::collections::BTreeMap;
use std::fmt;

use super::{CorpusError, DesignRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InheritanceClass {
    Standalone,
    Inherited,
}

impl fmt::Display for InheritanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InheritanceClass::Standalone => "Standalone",
            InheritanceClass::Inherited => "Inherited",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphWarning {
    /// `child` names a parent that is not in the corpus; the edge was dropped.
    DanglingParent { child: String, parent: String },
}

impl fmt::Display for GraphWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphWarning::DanglingParent { child, parent } => {
                write!(f, "design `{child}` references unknown parent `{parent}` (edge dropped)")
            }
        }
    }
}

/// Parent-to-child inheritance DAG over the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct RemixGraph {
    records: BTreeMap<String, DesignRecord>,
    /// Pruned, de-duplicated parent lists in their original order.
    parents: BTreeMap<String, Vec<String>>,
}

impl RemixGraph {
    pub fn record(&self, id: &str) -> Option<&DesignRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &DesignRecord> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Parents present in the corpus.
    pub fn parents(&self, id: &str) -> &[String] {
        self.parents.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Parent-to-child edges, sorted by child then parent order.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.parents
            .iter()
            .flat_map(|(child, ps)| ps.iter().map(move |p| (p.as_str(), child.as_str())))
            .collect()
    }

    pub fn class_of(&self, id: &str) -> InheritanceClass {
        if self.parents(id).is_empty() {
            InheritanceClass::Standalone
        } else {
            InheritanceClass::Inherited
        }
    }
}

/// Builds the remix DAG, pruning parents not present in the corpus.
pub fn build_graph(records: Vec<DesignRecord>) -> Result<(RemixGraph, Vec<GraphWarning>), CorpusError> {
    let mut by_id = BTreeMap::new();
    for r in records {
        if by_id.contains_key(&r.id) {
            return Err(CorpusError::DuplicateId(r.id));
        }
        by_id.insert(r.id.clone(), r);
    }
    let mut warnings = Vec::new();
    let mut parents = BTreeMap::new();
    for (id, r) in &by_id {
        let mut kept: Vec<String> = Vec::new();
        for p in &r.parent_ids {
            if !by_id.contains_key(p) {
                warnings.push(GraphWarning::DanglingParent { child: id.clone(), parent: p.clone() });
            } else if !kept.contains(p) {
                kept.push(p.clone());
            }
        }
        parents.insert(id.clone(), kept);
    }
    let graph = RemixGraph { records: by_id, parents };
    if let Some(cycle) = find_cycle(&graph) {
        return Err(CorpusError::CycleDetected(cycle));
    }
    Ok((graph, warnings))
}

/// Iterative three-color DFS along child-to-parent links. Returns one cycle
/// with its first node repeated at the end.
fn find_cycle(graph: &RemixGraph) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let ids: Vec<&str> = graph.ids().collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let adjacency: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| graph.parents(id).iter().map(|p| index[p.as_str()]).collect())
        .collect();
    let mut color = vec![Color::White; ids.len()];
    for root in 0..ids.len() {
        if color[root] != Color::White {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = Color::Grey;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&succ) = adjacency[node].get(*next) {
                *next += 1;
                match color[succ] {
                    Color::White => {
                        color[succ] = Color::Grey;
                        stack.push((succ, 0));
                    }
                    Color::Grey => {
                        let start = stack.iter().position(|(n, _)| *n == succ).unwrap();
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|(n, _)| ids[*n].to_string()).collect();
                        cycle.push(ids[succ].to_string());
                        return Some(cycle);
                    }
                    Color::Black => {}
                }
            } else {
                color[node] = Color::Black;
                stack.pop();
            }
        }
    }
    None
}

/// Standalone iff the design has no parents left after pruning.
pub fn classify(graph: &RemixGraph) -> BTreeMap<String, InheritanceClass> {
    graph.ids().map(|id| (id.to_string(), graph.class_of(id))).collect()
}
