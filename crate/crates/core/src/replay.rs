//! Script replay: applies an edit script to `T`, re-prices every operation
//! with the model and checks that the result is `T'`.

use std::collections::HashMap;

use thiserror::Error;

use crate::cost::Cost;
use crate::edit::{EditOp, EditScript, Mapping};
use crate::model::CostModel;
use crate::tree::{IndexedTree, Label};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("operation {index} ({op}): {message}")]
    BadOperation {
        index: usize,
        op: &'static str,
        message: String,
    },
    #[error("operation {index} ({op}) claims cost {claimed} but costs {actual}")]
    CostMismatch {
        index: usize,
        op: &'static str,
        claimed: Cost,
        actual: Cost,
    },
    #[error("script produces {found} instead of {expected}")]
    WrongResult { expected: String, found: String },
    #[error("script costs {script} but the distance is {distance}")]
    TotalMismatch { script: Cost, distance: Cost },
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
}

#[derive(Clone, Debug)]
struct WorkNode {
    label: Label,
    children: Vec<usize>,
    parent: usize,
    fused: bool,
}

/// Mutable forest under a virtual root (slot 0). Slots are never reused.
#[derive(Clone, Debug)]
struct Work {
    nodes: Vec<WorkNode>,
    /// Node id in the input it currently belongs to -> slot.
    slot: HashMap<usize, usize>,
}

impl Work {
    fn from_tree(t: &IndexedTree) -> Work {
        let virtual_root = WorkNode {
            label: Label::symbol('_'),
            children: vec![t.root()],
            parent: 0,
            fused: false,
        };
        let mut nodes = vec![virtual_root];
        let mut slot = HashMap::new();
        for i in 1..=t.len() {
            let parent = if i == t.root() { 0 } else { t.parent(i) };
            nodes.push(WorkNode {
                label: t.label(i).clone(),
                children: t.children(i).to_vec(),
                parent,
                fused: false,
            });
            slot.insert(i, i);
        }
        Work { nodes, slot }
    }

    fn position(&self, s: usize) -> usize {
        let p = self.nodes[s].parent;
        self.nodes[p]
            .children
            .iter()
            .position(|&c| c == s)
            .expect("child of its parent")
    }

    /// Removes `s`, moving its children into its place.
    fn splice_out(&mut self, s: usize) {
        let p = self.nodes[s].parent;
        let k = self.position(s);
        let kids = std::mem::take(&mut self.nodes[s].children);
        for &c in &kids {
            self.nodes[c].parent = p;
        }
        self.nodes[p].children.splice(k..k + 1, kids);
    }

    fn subtree(&self, s: usize) -> Vec<usize> {
        let mut out = vec![s];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.nodes[out[k]].children.iter().copied());
            k += 1;
        }
        out
    }

    fn is_ancestor(&self, a: usize, mut d: usize) -> bool {
        while d != 0 {
            d = self.nodes[d].parent;
            if d == a {
                return true;
            }
        }
        false
    }

    fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(s) = stack.pop() {
            out.push(s);
            stack.extend(self.nodes[s].children.iter().rev());
        }
        out
    }

    fn text(&self) -> String {
        fn go(w: &Work, s: usize, out: &mut String) {
            out.push_str(&w.nodes[s].label.to_string());
            let kids = &w.nodes[s].children;
            if !kids.is_empty() {
                out.push('(');
                for (k, &c) in kids.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    go(w, c, out);
                }
                out.push(')');
            }
        }
        let mut out = String::new();
        for (k, &c) in self.nodes[0].children.iter().enumerate() {
            if k > 0 {
                out.push_str(" | ");
            }
            go(self, c, &mut out);
        }
        out
    }

    fn lookup(&self, id: usize) -> Option<usize> {
        self.slot.get(&id).copied()
    }

    /// Applies a fusion and returns its price.
    fn fuse(&mut self, m: &dyn CostModel, edge: bool, upper: usize, lower: usize, split: bool) -> Result<Cost, String> {
        let u = self.lookup(upper).ok_or("upper node is gone")?;
        let v = self.lookup(lower).ok_or("lower node is gone")?;
        if u == v || self.nodes[v].parent != u {
            return Err("lower node is not a child of the upper node".into());
        }
        if self.nodes[u].parent == 0 {
            return Err("the root cannot take part in a fusion".into());
        }
        if self.nodes[v].fused {
            return Err("lower node was already fused".into());
        }
        let (ul, vl) = (self.nodes[u].label.clone(), self.nodes[v].label.clone());
        if !edge {
            let price = if split {
                m.node_split(&ul, &vl)
            } else {
                m.node_fusion(&ul, &vl)
            };
            self.nodes[u].label = m.merge_node(&ul, &vl);
            self.nodes[u].fused = true;
            self.splice_out(v);
            self.slot.remove(&lower);
            return Ok(price);
        }
        let mut price = if split {
            m.edge_split(&ul, &vl)
        } else {
            m.edge_fusion(&ul, &vl)
        };
        let siblings: Vec<usize> = self.nodes[u].children.iter().copied().filter(|&c| c != v).collect();
        for s in siblings {
            for d in self.subtree(s) {
                let l = &self.nodes[d].label;
                price += if split { m.insert(l) } else { m.delete(l) };
                self.slot.retain(|_, &mut x| x != d);
            }
        }
        let p = self.nodes[u].parent;
        let k = self.position(u);
        self.nodes[p].children[k] = v;
        self.nodes[v].parent = p;
        self.nodes[v].label = m.merge_edge(&ul, &vl);
        self.nodes[v].fused = true;
        self.nodes[u].children.clear();
        self.slot.remove(&upper);
        Ok(price)
    }
}

/// Replays `script` on `t1`. On success returns the recomputed total, which
/// equals both the sum of the recorded costs and `distance`.
pub fn replay(
    t1: &IndexedTree,
    t2: &IndexedTree,
    m: &dyn CostModel,
    script: &EditScript,
    distance: Cost,
    mapping: Option<&Mapping>,
) -> Result<Cost, ReplayError> {
    // Forward image of the T' fusions, undone by the trailing splits.
    let splits: Vec<(usize, &EditOp)> = script
        .ops
        .iter()
        .enumerate()
        .filter(|(_, op)| matches!(op, EditOp::NodeSplit { .. } | EditOp::EdgeSplit { .. }))
        .collect();
    let mut target = Work::from_tree(t2);
    let mut split_prices = HashMap::new();
    for &(index, op) in splits.iter().rev() {
        let (edge, upper, lower) = match op {
            EditOp::NodeSplit { upper, lower, .. } => (false, *upper, *lower),
            EditOp::EdgeSplit { upper, lower, .. } => (true, *upper, *lower),
            _ => unreachable!(),
        };
        let price = target
            .fuse(m, edge, upper, lower, true)
            .map_err(|message| ReplayError::BadOperation {
                index,
                op: op.name(),
                message,
            })?;
        split_prices.insert(index, price);
    }

    let target_id: HashMap<usize, usize> = target.slot.iter().map(|(&id, &s)| (s, id)).collect();
    let target_rank: HashMap<usize, usize> = target.preorder().into_iter().enumerate().map(|(r, s)| (s, r)).collect();
    let mut work = Work::from_tree(t1);
    // T' id -> slot, and back, for nodes already carrying their final label.
    let mut retagged: HashMap<usize, usize> = HashMap::new();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut total = Cost::ZERO;
    let mut mapped_stage: Option<Work> = None;
    for (index, op) in script.ops.iter().enumerate() {
        let bad = |message: &str| ReplayError::BadOperation {
            index,
            op: op.name(),
            message: message.to_string(),
        };
        let actual = match op {
            EditOp::NodeFusion { upper, lower, .. } | EditOp::EdgeFusion { upper, lower, .. } => {
                let edge = matches!(op, EditOp::EdgeFusion { .. });
                work.fuse(m, edge, *upper, *lower, false).map_err(|e| bad(&e))?
            }
            EditOp::Delete { node, .. } => {
                let s = work.lookup(*node).ok_or_else(|| bad("node is gone"))?;
                if work.nodes[s].fused {
                    return Err(bad("fused nodes are not deleted"));
                }
                work.splice_out(s);
                work.slot.remove(node);
                m.delete(&work.nodes[s].label)
            }
            EditOp::Relabel { from, to, .. } => {
                if mapped_stage.is_none() {
                    mapped_stage = Some(work.clone());
                }
                let s = work.slot.remove(from).ok_or_else(|| bad("node is gone"))?;
                let ts = target.lookup(*to).ok_or_else(|| bad("target node is gone"))?;
                let goal = target.nodes[ts].label.clone();
                let price = m.relabel(&work.nodes[s].label, &goal);
                work.nodes[s].label = goal;
                if retagged.insert(*to, s).is_some() {
                    return Err(bad("target node matched twice"));
                }
                owner.insert(s, *to);
                price
            }
            EditOp::Insert { node, .. } => {
                let ts = target.lookup(*node).ok_or_else(|| bad("target node is gone"))?;
                if target.nodes[ts].fused {
                    return Err(bad("fused nodes are not inserted"));
                }
                let tp = target.nodes[ts].parent;
                let parent = if tp == 0 {
                    0
                } else {
                    let id = target_id[&tp];
                    *retagged.get(&id).ok_or_else(|| bad("parent is not present yet"))?
                };
                // Current children whose counterpart lies below the new node.
                let inside: Vec<bool> = work.nodes[parent]
                    .children
                    .iter()
                    .map(|c| {
                        owner
                            .get(c)
                            .and_then(|&id| target.lookup(id))
                            .is_some_and(|tc| target.is_ancestor(ts, tc))
                    })
                    .collect();
                let first = inside.iter().position(|&b| b);
                let count = inside.iter().filter(|&&b| b).count();
                let start = match first {
                    Some(f) if inside[f..f + count].iter().all(|&b| b) => f,
                    Some(_) => return Err(bad("adopted children are not contiguous")),
                    None => {
                        // Leaf: place it after the siblings that precede it.
                        let mine = target_rank[&ts];
                        work.nodes[parent]
                            .children
                            .iter()
                            .take_while(|c| {
                                owner
                                    .get(c)
                                    .and_then(|&id| target.lookup(id))
                                    .map(|tc| target_rank[&tc])
                                    < Some(mine)
                            })
                            .count()
                    }
                };
                let adopted: Vec<usize> = work.nodes[parent].children.drain(start..start + count).collect();
                let label = target.nodes[ts].label.clone();
                let s = work.nodes.len();
                for &c in &adopted {
                    work.nodes[c].parent = s;
                }
                work.nodes.push(WorkNode {
                    label: label.clone(),
                    children: adopted,
                    parent,
                    fused: false,
                });
                work.nodes[parent].children.insert(start, s);
                retagged.insert(*node, s);
                owner.insert(s, *node);
                m.insert(&label)
            }
            EditOp::NodeSplit { .. } | EditOp::EdgeSplit { .. } => {
                if work.text() != target.text() {
                    return Err(ReplayError::WrongResult {
                        expected: target.text(),
                        found: work.text(),
                    });
                }
                split_prices[&index]
            }
        };
        if actual != op.cost() {
            return Err(ReplayError::CostMismatch {
                index,
                op: op.name(),
                claimed: op.cost(),
                actual,
            });
        }
        total += actual;
    }
    if work.text() != target.text() {
        return Err(ReplayError::WrongResult {
            expected: target.text(),
            found: work.text(),
        });
    }
    let expected = t2.tree().to_text();
    if Work::from_tree(t2).text() != expected {
        return Err(ReplayError::WrongResult {
            expected,
            found: Work::from_tree(t2).text(),
        });
    }
    if total != distance {
        return Err(ReplayError::TotalMismatch {
            script: total,
            distance,
        });
    }
    if let Some(mapping) = mapping {
        let source = mapped_stage.unwrap_or(work);
        check_mapping(&source, &target, mapping).map_err(ReplayError::InvalidMapping)?;
    }
    Ok(total)
}

/// One-to-one, ancestor- and sibling-order preserving, over the fused trees.
fn check_mapping(a: &Work, b: &Work, mapping: &Mapping) -> Result<(), String> {
    let rank =
        |w: &Work| -> HashMap<usize, usize> { w.preorder().into_iter().enumerate().map(|(r, s)| (s, r)).collect() };
    let (ra, rb) = (rank(a), rank(b));
    let mut pairs = Vec::new();
    let (mut seen_a, mut seen_b) = (std::collections::HashSet::new(), std::collections::HashSet::new());
    for p in mapping {
        let sa = a.lookup(p.t).ok_or_else(|| format!("T node {} is not present", p.t))?;
        let sb = b
            .lookup(p.t2)
            .ok_or_else(|| format!("T' node {} is not present", p.t2))?;
        if !seen_a.insert(sa) || !seen_b.insert(sb) {
            return Err(format!("pair ({}, {}) is not one-to-one", p.t, p.t2));
        }
        pairs.push((p.t, p.t2, sa, sb));
    }
    for &(x, x2, sa, sb) in &pairs {
        for &(y, y2, ta, tb) in &pairs {
            if a.is_ancestor(sa, ta) != b.is_ancestor(sb, tb) {
                return Err(format!("({x}, {x2}) and ({y}, {y2}) disagree on ancestry"));
            }
            if (ra[&sa] < ra[&ta]) != (rb[&sb] < rb[&tb]) {
                return Err(format!("({x}, {x2}) and ({y}, {y2}) disagree on order"));
            }
        }
    }
    Ok(())
}
