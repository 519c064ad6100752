use std::collections::{BTreeMap, BTreeSet};

use super::{MaturityModel, RequirementId};

/// Requirement dependency graph. An edge `(a, b)` means `a` depends on `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<RequirementId>,
    pub edges: Vec<(RequirementId, RequirementId)>,
}

impl DependencyGraph {
    /// Mirrors the model's `dependencies` fields exactly, in document order.
    pub fn from_model(model: &MaturityModel) -> Self {
        let nodes = model.requirements.iter().map(|r| r.id).collect();
        let edges = model
            .requirements
            .iter()
            .flat_map(|r| r.dependencies.iter().map(move |d| (r.id, *d)))
            .collect();
        Self { nodes, edges }
    }

    pub fn new(nodes: Vec<RequirementId>, edges: Vec<(RequirementId, RequirementId)>) -> Self {
        Self { nodes, edges }
    }

    /// Node list deduplicated and sorted, plus an adjacency list over indices.
    /// Edges whose endpoints are not nodes are ignored.
    fn indexed(&self) -> (Vec<RequirementId>, Vec<Vec<usize>>) {
        let ids: Vec<RequirementId> = self.nodes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<RequirementId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (from, to) in &self.edges {
            if let (Some(&a), Some(&b)) = (index.get(from), index.get(to)) {
                adj[a].push(b);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        (ids, adj)
    }
}

/// Tarjan's algorithm, iterative so arbitrarily deep user models cannot
/// overflow the stack. Returns components as index lists.
fn strongly_connected(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, next edge position)
        let mut work = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos == 0 && index[v] == UNVISITED {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                components.push(component);
            }
        }
    }
    components
}

/// All strongly connected components with at least two members. Each
/// component is sorted by ID; components are ordered by their smallest member.
pub fn detect_cycles(graph: &DependencyGraph) -> Vec<Vec<RequirementId>> {
    let (ids, adj) = graph.indexed();
    let mut out: Vec<Vec<RequirementId>> = strongly_connected(&adj)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|c| {
            let mut members: Vec<RequirementId> = c.into_iter().map(|i| ids[i]).collect();
            members.sort_unstable();
            members
        })
        .collect();
    out.sort_unstable_by_key(|c| c[0]);
    out
}

/// Total order over all requirements: by level, then dependencies first within
/// a level (cycles condensed), then ascending ID.
///
/// Requirements with an out-of-range level sort after level 4 by ID.
pub fn evaluation_order(model: &MaturityModel) -> Vec<RequirementId> {
    let mut by_level: BTreeMap<i64, Vec<RequirementId>> = BTreeMap::new();
    for r in &model.requirements {
        by_level.entry(MaturityModel::level_of(r).map_or(i64::MAX, i64::from)).or_default().push(r.id);
    }
    let graph = DependencyGraph::from_model(model);
    let mut order = Vec::with_capacity(model.requirements.len());
    for members in by_level.values() {
        let set: BTreeSet<RequirementId> = members.iter().copied().collect();
        let sub = DependencyGraph::new(
            members.clone(),
            graph
                .edges
                .iter()
                .filter(|(a, b)| set.contains(a) && set.contains(b))
                .copied()
                .collect(),
        );
        order.extend(order_within(&sub));
    }
    order
}

fn order_within(graph: &DependencyGraph) -> Vec<RequirementId> {
    let (ids, adj) = graph.indexed();
    let mut components = strongly_connected(&adj);
    for c in &mut components {
        c.sort_unstable();
    }
    let mut component_of = vec![0; ids.len()];
    for (ci, c) in components.iter().enumerate() {
        for &v in c {
            component_of[v] = ci;
        }
    }
    // Condensation: pending[c] = number of distinct components c depends on.
    let mut pending = vec![BTreeSet::new(); components.len()];
    let mut dependents = vec![BTreeSet::new(); components.len()];
    for (v, targets) in adj.iter().enumerate() {
        for &w in targets {
            let (cv, cw) = (component_of[v], component_of[w]);
            if cv != cw {
                pending[cv].insert(cw);
                dependents[cw].insert(cv);
            }
        }
    }
    // Ready components keyed by their smallest member's ID.
    let mut ready: BTreeMap<RequirementId, usize> = pending
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_empty())
        .map(|(ci, _)| (ids[components[ci][0]], ci))
        .collect();
    let mut out = Vec::with_capacity(ids.len());
    while let Some((_, ci)) = ready.pop_first() {
        out.extend(components[ci].iter().map(|&v| ids[v]));
        for &d in &dependents[ci] {
            pending[d].remove(&ci);
            if pending[d].is_empty() {
                ready.insert(ids[components[d][0]], d);
            }
        }
    }
    out
}
