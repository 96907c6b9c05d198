//! Brute-force reference implementations used to cross-check the DPs.
//!
//! `mapping_oracle` enumerates valid mappings directly. The fusion oracle
//! runs a uniform-cost search over the trees reachable from each input by
//! fusions (and, on the target side, by the fusions that the splits undo),
//! then closes the gap between every pair of reachable trees with the
//! mapping oracle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::cost::Cost;
use crate::edit::FusionKind;
use crate::error::DistanceError;
use crate::model::CostModel;
use crate::tree::{Label, LabeledTree};

/// Largest tree either oracle accepts.
pub const MAX_ORACLE_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: usize,
    /// Search states costlier than this are dropped.
    pub max_cost: Option<Cost>,
    /// Maximum consecutive fusions per node.
    pub l: usize,
    /// Forbid an edge fusion right after a node fusion on the same node.
    pub prune: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: MAX_ORACLE_NODES,
            max_cost: None,
            l: 1,
            prune: false,
        }
    }
}

impl SearchBudget {
    pub fn with_l(l: usize) -> SearchBudget {
        SearchBudget {
            l,
            ..SearchBudget::default()
        }
    }

    fn admit(&self, t: &LabeledTree) -> Result<(), DistanceError> {
        let limit = self.max_nodes.min(MAX_ORACLE_NODES);
        if t.len() > limit {
            return Err(DistanceError::BudgetExceeded(format!(
                "{} nodes exceeds the limit of {limit}",
                t.len()
            )));
        }
        Ok(())
    }
}

/// How two nodes of one tree relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    Same,
    Ancestor,
    Descendant,
    Left,
    Right,
}

/// Node labels plus the pairwise relation matrix.
struct Flat {
    labels: Vec<Label>,
    rel: Vec<Vec<Rel>>,
}

impl Flat {
    fn new(t: &LabeledTree) -> Flat {
        let order = t.preorder();
        let n = order.len();
        let mut pos = vec![0; t.len()];
        for (k, &id) in order.iter().enumerate() {
            pos[id] = k;
        }
        // Preorder interval [k, end) covers the subtree of the k-th node.
        let mut end = vec![0; n];
        for k in (0..n).rev() {
            let id = order[k];
            end[k] = t.children(id).last().map_or(k + 1, |&c| end[pos[c]]);
        }
        let rel = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        if i == k {
                            Rel::Same
                        } else if i < k && k < end[i] {
                            Rel::Ancestor
                        } else if k < i && i < end[k] {
                            Rel::Descendant
                        } else if i < k {
                            Rel::Left
                        } else {
                            Rel::Right
                        }
                    })
                    .collect()
            })
            .collect();
        Flat {
            labels: order.iter().map(|&id| t.label(id).clone()).collect(),
            rel,
        }
    }
}

struct MappingSearch<'a> {
    a: &'a Flat,
    b: &'a Flat,
    del: Vec<Cost>,
    ins: Vec<Cost>,
    relabel: Vec<Vec<Cost>>,
    /// Cheapest possible fate of each suffix of `a`.
    suffix_floor: Vec<Cost>,
    min_ins: Cost,
    chosen: Vec<Option<usize>>,
    used: Vec<bool>,
    best: Cost,
}

impl MappingSearch<'_> {
    fn go(&mut self, i: usize, cost: Cost, unused_b: usize) {
        let remaining_a = self.a.labels.len() - i;
        let forced_inserts = unused_b.saturating_sub(remaining_a) as i64;
        if cost + self.suffix_floor[i] + Cost(self.min_ins.0 * forced_inserts) >= self.best {
            return;
        }
        if i == self.a.labels.len() {
            let ins: Cost = (0..self.b.labels.len())
                .filter(|&j| !self.used[j])
                .map(|j| self.ins[j])
                .sum();
            self.best = self.best.min(cost + ins);
            return;
        }
        let mut options: Vec<usize> = (0..self.b.labels.len())
            .filter(|&j| !self.used[j])
            .filter(|&j| {
                (0..i).all(|k| match self.chosen[k] {
                    Some(l) => self.a.rel[i][k] == self.b.rel[j][l],
                    None => true,
                })
            })
            .collect();
        options.sort_by_key(|&j| self.relabel[i][j]);
        for j in options {
            self.chosen[i] = Some(j);
            self.used[j] = true;
            self.go(i + 1, cost + self.relabel[i][j], unused_b - 1);
            self.used[j] = false;
        }
        self.chosen[i] = None;
        self.go(i + 1, cost + self.del[i], unused_b);
    }
}

fn mapping_cost(a: &Flat, b: &Flat, m: &dyn CostModel) -> Cost {
    let del: Vec<Cost> = a.labels.iter().map(|l| m.delete(l)).collect();
    let ins: Vec<Cost> = b.labels.iter().map(|l| m.insert(l)).collect();
    let relabel: Vec<Vec<Cost>> = a
        .labels
        .iter()
        .map(|x| b.labels.iter().map(|y| m.relabel(x, y)).collect())
        .collect();
    let mut suffix_floor = vec![Cost::ZERO; a.labels.len() + 1];
    for i in (0..a.labels.len()).rev() {
        let best_match = relabel[i].iter().copied().min().unwrap_or(del[i]);
        suffix_floor[i] = suffix_floor[i + 1] + del[i].min(best_match);
    }
    let everything = del.iter().copied().sum::<Cost>() + ins.iter().copied().sum::<Cost>();
    let mut search = MappingSearch {
        a,
        b,
        min_ins: ins.iter().copied().min().unwrap_or(Cost::ZERO),
        del,
        ins,
        relabel,
        suffix_floor,
        chosen: vec![None; a.labels.len()],
        used: vec![false; b.labels.len()],
        best: everything + Cost(1),
    };
    search.go(0, Cost::ZERO, b.labels.len());
    search.best
}

/// Minimum cost over all one-to-one, ancestor- and order-preserving
/// mappings: matched pairs pay relabel, the rest pay delete or insert.
pub fn mapping_oracle(t1: &LabeledTree, t2: &LabeledTree, m: &dyn CostModel) -> Result<Cost, DistanceError> {
    let budget = SearchBudget::default();
    budget.admit(t1)?;
    budget.admit(t2)?;
    Ok(mapping_cost(&Flat::new(t1), &Flat::new(t2), m))
}

/// A tree during the fusion search. Nodes remember whether they are still
/// untouched originals, how many fusions their chain holds and the kind of
/// the last one.
#[derive(Clone, Debug)]
struct SearchNode {
    label: Label,
    children: Vec<usize>,
    original: bool,
    count: usize,
    last: Option<FusionKind>,
}

#[derive(Clone, Debug)]
struct SearchTree {
    nodes: Vec<SearchNode>,
    root: usize,
}

impl SearchTree {
    fn new(t: &LabeledTree) -> SearchTree {
        let nodes = t
            .nodes
            .iter()
            .map(|n| SearchNode {
                label: n.label.clone(),
                children: n.children.clone(),
                original: true,
                count: 0,
                last: None,
            })
            .collect();
        SearchTree { nodes, root: t.root() }
    }

    fn write(&self, s: usize, flags: bool, out: &mut String) {
        use std::fmt::Write;
        let n = &self.nodes[s];
        let _ = write!(out, "{}", n.label);
        if flags {
            let last = match n.last {
                None => '-',
                Some(FusionKind::Node) => 'n',
                Some(FusionKind::Edge) => 'e',
            };
            let _ = write!(out, "[{}{}{}]", u8::from(n.original), n.count, last);
        }
        if !n.children.is_empty() {
            out.push('(');
            for (k, &c) in n.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                self.write(c, flags, out);
            }
            out.push(')');
        }
    }

    fn key(&self, flags: bool) -> String {
        let mut out = String::new();
        self.write(self.root, flags, &mut out);
        out
    }

    fn to_tree(&self) -> LabeledTree {
        let mut t = LabeledTree::new(self.nodes[self.root].label.clone());
        let mut stack: Vec<(usize, usize)> = self.nodes[self.root].children.iter().rev().map(|&c| (c, 0)).collect();
        while let Some((s, parent)) = stack.pop() {
            let id = t.add_child(parent, self.nodes[s].label.clone());
            stack.extend(self.nodes[s].children.iter().rev().map(|&c| (c, id)));
        }
        t
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

    fn parent_of(&self, s: usize) -> Option<usize> {
        (0..self.nodes.len()).find(|&p| self.nodes[p].children.contains(&s))
    }

    /// All single fusions available from this tree, with their prices.
    fn moves(&self, m: &dyn CostModel, budget: &SearchBudget, split: bool) -> Vec<(Cost, SearchTree)> {
        let mut out = Vec::new();
        let reachable = self.subtree(self.root);
        for &u in &reachable {
            let un = &self.nodes[u];
            if u == self.root || un.count >= budget.l {
                continue;
            }
            for (k, &v) in un.children.iter().enumerate() {
                let vn = &self.nodes[v];
                if !vn.original {
                    continue;
                }
                // Node fusion.
                let mut t = self.clone();
                let price = if split {
                    m.node_split(&un.label, &vn.label)
                } else {
                    m.node_fusion(&un.label, &vn.label)
                };
                t.nodes[u].label = m.merge_node(&un.label, &vn.label);
                t.nodes[u].original = false;
                t.nodes[u].count = un.count + 1;
                t.nodes[u].last = Some(FusionKind::Node);
                let grand = vn.children.clone();
                t.nodes[u].children.splice(k..k + 1, grand);
                out.push((price, t));

                if budget.prune && un.last == Some(FusionKind::Node) {
                    continue;
                }
                // Edge fusion.
                let mut price = if split {
                    m.edge_split(&un.label, &vn.label)
                } else {
                    m.edge_fusion(&un.label, &vn.label)
                };
                for &sib in un.children.iter().filter(|&&c| c != v) {
                    for d in self.subtree(sib) {
                        let l = &self.nodes[d].label;
                        price += if split { m.insert(l) } else { m.delete(l) };
                    }
                }
                let mut t = self.clone();
                let p = self.parent_of(u).expect("non-root has a parent");
                let pos = t.nodes[p].children.iter().position(|&c| c == u).expect("child");
                t.nodes[p].children[pos] = v;
                t.nodes[v].label = m.merge_edge(&un.label, &vn.label);
                t.nodes[v].original = false;
                t.nodes[v].count = un.count + 1;
                t.nodes[v].last = Some(FusionKind::Edge);
                t.nodes[u].children.clear();
                out.push((price, t));
            }
        }
        out
    }
}

/// Every tree reachable by fusions, keyed by its labelled shape, with the
/// cheapest way to reach it.
fn fused_variants(t: &LabeledTree, m: &dyn CostModel, budget: &SearchBudget, split: bool) -> Vec<(Cost, LabeledTree)> {
    let start = SearchTree::new(t);
    let mut best: HashMap<String, Cost> = HashMap::new();
    let mut states: Vec<SearchTree> = Vec::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.key(true), Cost::ZERO);
    heap.push(Reverse((Cost::ZERO, 0usize)));
    states.push(start);
    let mut settled: HashMap<String, (Cost, LabeledTree)> = HashMap::new();
    let mut done = std::collections::HashSet::new();
    while let Some(Reverse((cost, s))) = heap.pop() {
        let key = states[s].key(true);
        if !done.insert(key) {
            continue;
        }
        let shape = states[s].key(false);
        settled.entry(shape).or_insert_with(|| (cost, states[s].to_tree()));
        for (price, next) in states[s].moves(m, budget, split) {
            let c = cost + price;
            if budget.max_cost.is_some_and(|cap| c > cap) {
                continue;
            }
            let k = next.key(true);
            if best.get(&k).is_none_or(|&old| c < old) {
                best.insert(k, c);
                states.push(next);
                heap.push(Reverse((c, states.len() - 1)));
            }
        }
    }
    let mut out: Vec<(Cost, LabeledTree)> = settled.into_values().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.to_text().cmp(&b.1.to_text())));
    out
}

/// Exhaustive fusion distance between two small trees.
pub fn script_search_oracle(
    t1: &LabeledTree,
    t2: &LabeledTree,
    m: &dyn CostModel,
    budget: &SearchBudget,
) -> Result<Cost, DistanceError> {
    FusionOracle::new(m, *budget).distance(t1, t2)
}

/// Fusion oracle that caches fused variants and mapping costs across calls,
/// for exhaustive suites over many pairs of the same trees.
pub struct FusionOracle<'m> {
    model: &'m dyn CostModel,
    budget: SearchBudget,
    ids: HashMap<String, u32>,
    flats: Vec<Flat>,
    sources: HashMap<String, Vec<(Cost, u32)>>,
    targets: HashMap<String, Vec<(Cost, u32)>>,
    mapped: HashMap<(u32, u32), Cost>,
}

impl<'m> FusionOracle<'m> {
    pub fn new(model: &'m dyn CostModel, budget: SearchBudget) -> FusionOracle<'m> {
        FusionOracle {
            model,
            budget,
            ids: HashMap::new(),
            flats: Vec::new(),
            sources: HashMap::new(),
            targets: HashMap::new(),
            mapped: HashMap::new(),
        }
    }

    fn intern(&mut self, t: &LabeledTree) -> u32 {
        let key = t.to_text();
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.flats.len() as u32;
        self.flats.push(Flat::new(t));
        self.ids.insert(key, id);
        id
    }

    fn variants(&mut self, t: &LabeledTree, split: bool) -> Vec<(Cost, u32)> {
        let key = t.to_text();
        let cache = if split { &self.targets } else { &self.sources };
        if let Some(v) = cache.get(&key) {
            return v.clone();
        }
        let found = fused_variants(t, self.model, &self.budget, split);
        let v: Vec<(Cost, u32)> = found.iter().map(|(c, f)| (*c, self.intern(f))).collect();
        let cache = if split { &mut self.targets } else { &mut self.sources };
        cache.insert(key, v.clone());
        v
    }

    fn mapping(&mut self, a: u32, b: u32) -> Cost {
        if let Some(&c) = self.mapped.get(&(a, b)) {
            return c;
        }
        let c = mapping_cost(&self.flats[a as usize], &self.flats[b as usize], self.model);
        self.mapped.insert((a, b), c);
        c
    }

    pub fn distance(&mut self, t1: &LabeledTree, t2: &LabeledTree) -> Result<Cost, DistanceError> {
        self.budget.admit(t1)?;
        self.budget.admit(t2)?;
        let left = self.variants(t1, false);
        let right = self.variants(t2, true);
        let mut best = Cost::INFINITY;
        // Both lists are sorted by cost, so later entries can only lose.
        for &(ca, a) in &left {
            if ca >= best {
                break;
            }
            for &(cb, b) in &right {
                if ca + cb >= best {
                    break;
                }
                best = best.min(ca + cb + self.mapping(a, b));
            }
        }
        Ok(best)
    }

    /// Number of distinct trees seen so far (inputs and fused variants).
    pub fn interned(&self) -> usize {
        self.flats.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{structural_model, unit_model};
    use crate::tree::parse_tree;

    fn t(s: &str) -> LabeledTree {
        parse_tree(s).unwrap()
    }

    #[test]
    fn mapping_examples() {
        let m = unit_model(0.1).unwrap();
        assert_eq!(mapping_oracle(&t("sa"), &t("sa"), &m).unwrap(), Cost::ZERO);
        assert_eq!(mapping_oracle(&t("sa"), &t("sb"), &m).unwrap(), Cost::ONE);
        let d = mapping_oracle(&t("sA(sB(sC,sD),sE)"), &t("sF(sC,sG(sD,sE))"), &m).unwrap();
        assert_eq!(d, Cost(3 * Cost::ONE.0));
        let big = t("sa(sa,sa,sa,sa,sa,sa,sa,sa)");
        assert!(matches!(
            mapping_oracle(&big, &big, &m),
            Err(DistanceError::BudgetExceeded(_))
        ));
    }

    #[test]
    fn fusion_free_search_is_the_mapping_oracle() {
        let m = structural_model(0.05).unwrap();
        let (a, b) = (t("E:0/0(H:3@13)"), t("E:0/0(I:2/2@7(H:3@5))"));
        let plain = SearchBudget::with_l(0);
        assert_eq!(
            script_search_oracle(&a, &b, &m, &plain).unwrap(),
            mapping_oracle(&a, &b, &m).unwrap()
        );
        let fused = script_search_oracle(&a, &b, &m, &SearchBudget::with_l(1)).unwrap();
        assert!(fused < mapping_oracle(&a, &b, &m).unwrap());
        assert_eq!(
            script_search_oracle(&a, &a, &m, &SearchBudget::with_l(2)).unwrap(),
            Cost::ZERO
        );
    }
}
