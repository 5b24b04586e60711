//! Execution order and buffer layout.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use blockflow_runtime::wiring::BlockPorts;
use serde::Serialize;
use thiserror::Error;

use crate::graph::GraphModel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    /// Instance names around the cycle, starting at the smallest name.
    #[error("algebraic loop: {}", render_cycle(.0))]
    AlgebraicLoop(Vec<String>),
}

fn render_cycle(names: &[String]) -> String {
    let mut parts: Vec<&str> = names.iter().map(String::as_str).collect();
    if let Some(first) = names.first() {
        parts.push(first);
    }
    parts.join(" -> ")
}

/// Topological order of `names` under `edges` (`(from, to)` index pairs).
/// Among ready nodes the lexicographically smallest name goes first. If the
/// graph has a cycle, returns one, rotated to start at its smallest name.
pub fn topological_order(names: &[&str], edges: &[(usize, usize)]) -> Result<Vec<usize>, Vec<usize>> {
    let n = names.len();
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for &(a, b) in edges {
        succ[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: BinaryHeap<Reverse<(&str, usize)>> =
        (0..n).filter(|&i| indegree[i] == 0).map(|i| Reverse((names[i], i))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, v))) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse((names[w], w)));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    Err(find_cycle(names, edges, &indegree))
}

/// Every node left with nonzero in-degree has a predecessor that is also
/// left, so walking predecessors from any of them must close a cycle.
fn find_cycle(names: &[&str], edges: &[(usize, usize)], indegree: &[usize]) -> Vec<usize> {
    let remaining = |v: usize| indegree[v] > 0;
    let start = (0..names.len())
        .filter(|&v| remaining(v))
        .min_by_key(|&v| names[v])
        .expect("a node remains");
    let mut seen_at = vec![usize::MAX; names.len()];
    let mut path = Vec::new();
    let mut v = start;
    while seen_at[v] == usize::MAX {
        seen_at[v] = path.len();
        path.push(v);
        v = edges
            .iter()
            .filter(|&&(a, b)| b == v && remaining(a))
            .map(|&(a, _)| a)
            .min_by_key(|&a| names[a])
            .expect("remaining node has a remaining predecessor");
    }
    let mut cycle: Vec<usize> = path[seen_at[v]..].to_vec();
    cycle.reverse();
    let lowest = (0..cycle.len()).min_by_key(|&i| names[cycle[i]]).unwrap();
    cycle.rotate_left(lowest);
    cycle
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduledBlock {
    pub name: String,
    pub library: String,
    pub label: String,
}

/// Connection by position in the schedule: `(block, port)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ScheduledLink {
    pub from: (usize, usize),
    pub to: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Consumer {
    pub input: String,
    /// `false` when the consumer reads the previous step's value.
    pub feedthrough: bool,
}

/// One signal buffer per output port.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BufferPlan {
    pub producer: String,
    pub dtype: String,
    pub width: usize,
    pub consumers: Vec<Consumer>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub step_size: f64,
    pub order: Vec<ScheduledBlock>,
    pub links: Vec<ScheduledLink>,
    pub buffers: Vec<BufferPlan>,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serializes");
        s.push('\n');
        s
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.order.iter().position(|b| b.name == name)
    }
}

/// Orders `model` given each block's resolved ports (indexed like
/// `model.blocks`). Only connections into feedthrough inputs constrain
/// the order. Connections must already be in range.
pub fn compute_schedule(model: &GraphModel, ports: &[BlockPorts]) -> Result<Schedule, ScheduleError> {
    let names: Vec<&str> = model.blocks.iter().map(|b| b.name.as_str()).collect();
    let index = |name: &str| model.index_of(name).expect("connection endpoints checked at load");
    let links: Vec<((usize, usize), (usize, usize))> = model
        .connections
        .iter()
        .map(|c| ((index(&c.from.block), c.from.port), (index(&c.to.block), c.to.port)))
        .collect();
    let edges: Vec<(usize, usize)> = links
        .iter()
        .filter(|(_, (b, p))| ports[*b].inputs[*p].feedthrough)
        .map(|((a, _), (b, _))| (*a, *b))
        .collect();
    let order = topological_order(&names, &edges)
        .map_err(|cycle| ScheduleError::AlgebraicLoop(cycle.into_iter().map(|i| names[i].to_owned()).collect()))?;

    let mut position = vec![0; names.len()];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }
    let mut scheduled_links: Vec<ScheduledLink> = links
        .iter()
        .map(|&((a, ap), (b, bp))| ScheduledLink {
            from: (position[a], ap),
            to: (position[b], bp),
        })
        .collect();
    scheduled_links.sort_by_key(|l| (l.to, l.from));
    scheduled_links.dedup();

    let mut buffers = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        for spec in &ports[i].outputs {
            let consumers = scheduled_links
                .iter()
                .filter(|l| l.from == (pos, spec.index))
                .map(|l| {
                    let consumer = order[l.to.0];
                    Consumer {
                        input: format!("{}.{}", names[consumer], l.to.1),
                        feedthrough: ports[consumer].inputs[l.to.1].feedthrough,
                    }
                })
                .collect();
            buffers.push(BufferPlan {
                producer: format!("{}.{}", names[i], spec.index),
                dtype: spec.dtype.name().to_owned(),
                width: spec.width.fixed().unwrap_or(0),
                consumers,
            });
        }
    }

    Ok(Schedule {
        step_size: model.step_size,
        order: order
            .iter()
            .map(|&i| {
                let b = &model.blocks[i];
                ScheduledBlock {
                    name: b.name.clone(),
                    library: b.library.clone(),
                    label: b.label.clone(),
                }
            })
            .collect(),
        links: scheduled_links,
        buffers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain() {
        let names = ["A", "B", "C"];
        assert_eq!(topological_order(&names, &[(1, 2), (0, 1)]), Ok(vec![0, 1, 2]));
    }

    #[test]
    fn ties_break_by_name() {
        let names = ["zeta", "alpha", "mid"];
        assert_eq!(topological_order(&names, &[]), Ok(vec![1, 2, 0]));
        // "mid" becomes ready only after "zeta"; "alpha" still goes first.
        assert_eq!(topological_order(&names, &[(0, 2)]), Ok(vec![1, 0, 2]));
    }

    #[test]
    fn two_gain_loop() {
        let names = ["g2", "g1"];
        let cycle = topological_order(&names, &[(0, 1), (1, 0)]).unwrap_err();
        assert_eq!(cycle, vec![1, 0]);
        let err = ScheduleError::AlgebraicLoop(vec!["g1".into(), "g2".into()]);
        assert_eq!(err.to_string(), "algebraic loop: g1 -> g2 -> g1");
    }

    #[test]
    fn self_loop_and_downstream_nodes() {
        let names = ["a", "b", "c"];
        // b feeds itself and c; c is blocked but not on the cycle.
        let cycle = topological_order(&names, &[(1, 1), (1, 2), (0, 1)]).unwrap_err();
        assert_eq!(cycle, vec![1]);
    }

    #[test]
    fn cycle_is_reported_in_edge_direction() {
        let names = ["a", "b", "c", "d"];
        let cycle = topological_order(&names, &[(0, 2), (2, 1), (1, 0), (3, 0)]).unwrap_err();
        assert_eq!(cycle, vec![0, 2, 1]);
    }
}
