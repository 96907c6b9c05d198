//! Edit distance extended with node fusion, edge fusion and their splits.
//!
//! Fusions are organized as chains hanging off the node that starts them:
//! each step absorbs one original node that is currently a child of the
//! merged node. When the DP reaches a pair of whole subtrees it also tries
//! every chain on either side, matching the two merged objects and aligning
//! the child forests left behind by the chains.

use std::collections::HashMap;

use crate::cost::Cost;
use crate::edit::{
    forest_dp, keyroot_dp, EditOp, EditScript, Extractor, ForestSeq, FusedChoices, FusionKind, Mapping, MappingPair,
    ModelCosts, PairCosts, PathStep, ScriptBuilder, Table, TreeHook,
};
use crate::error::DistanceError;
use crate::model::CostModel;
use crate::tree::{IndexedTree, Label};

/// Largest accepted bound on consecutive fusions per node.
pub const MAX_FUSIONS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FusionParams {
    /// Maximum number of consecutive fusions per node.
    pub l: usize,
    /// Skip paths where an edge fusion directly follows a node fusion.
    pub prune: bool,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams { l: 1, prune: true }
    }
}

impl FusionParams {
    pub fn new(l: usize) -> FusionParams {
        FusionParams {
            l,
            ..FusionParams::default()
        }
    }

    pub fn unpruned(l: usize) -> FusionParams {
        FusionParams { l, prune: false }
    }

    pub fn check(&self) -> Result<(), DistanceError> {
        if self.l > MAX_FUSIONS {
            return Err(DistanceError::FusionBoundTooLarge(self.l));
        }
        if self.l > 2 {
            log::warn!("l = {} makes the fusion DP expensive", self.l);
        }
        Ok(())
    }
}

/// Number of distinct fusion paths of length exactly `l` at a node of a tree
/// with maximum degree `d`: `2^l * prod_{k=1..l} sum_{j=1..k} d^j`.
pub fn path_count_bound(d: usize, l: usize) -> u128 {
    let d = d as u128;
    let mut total: u128 = 1;
    for k in 1..=l as u32 {
        let choices: u128 = (1..=k).map(|j| d.saturating_pow(j)).fold(0u128, u128::saturating_add);
        total = total.saturating_mul(2).saturating_mul(choices);
    }
    total
}

/// A node after a sequence of fusions.
#[derive(Clone, Debug)]
struct Chain {
    label: Label,
    /// Original nodes that are currently children of the merged node.
    frontier: Vec<usize>,
    seq: ForestSeq,
    cost: Cost,
    path: Vec<PathStep>,
    /// Node carrying the merged label.
    rep: usize,
    group: Vec<usize>,
    ops: Vec<EditOp>,
}

#[derive(Clone, Copy)]
enum Side {
    Source,
    Target,
}

/// Enumerates the fusion chains of one tree.
struct ChainBuilder<'a> {
    tree: &'a IndexedTree,
    model: &'a dyn CostModel,
    side: Side,
    params: FusionParams,
    /// Delete (or insert) price of each whole subtree.
    subtree: Vec<Cost>,
}

impl ChainBuilder<'_> {
    fn chains(&self, x: usize) -> Vec<Chain> {
        let t = self.tree;
        let base = Chain {
            label: t.label(x).clone(),
            frontier: t.children(x).to_vec(),
            seq: ForestSeq::new(t, t.children(x)),
            cost: Cost::ZERO,
            path: Vec::new(),
            rep: x,
            group: vec![x],
            ops: Vec::new(),
        };
        let mut out = vec![base];
        if x == t.root() {
            return out;
        }
        let mut next = 0;
        while next < out.len() {
            if out[next].path.len() < self.params.l {
                let grown = self.extend(&out[next]);
                out.extend(grown);
            }
            next += 1;
        }
        out
    }

    fn extend(&self, c: &Chain) -> Vec<Chain> {
        let t = self.tree;
        let last = c.path.last().map(|s| s.kind);
        let mut out = Vec::new();
        for (k, &v) in c.frontier.iter().enumerate() {
            let lower = t.label(v);
            // Node fusion: v's children take v's place among the frontier.
            let price = match self.side {
                Side::Source => self.model.node_fusion(&c.label, lower),
                Side::Target => self.model.node_split(&c.label, lower),
            };
            let mut frontier = c.frontier[..k].to_vec();
            frontier.extend_from_slice(t.children(v));
            frontier.extend_from_slice(&c.frontier[k + 1..]);
            out.push(self.step(
                c,
                FusionKind::Node,
                v,
                self.model.merge_node(&c.label, lower),
                frontier,
                price,
                c.rep,
            ));

            if self.params.prune && last == Some(FusionKind::Node) {
                continue;
            }
            // Edge fusion: v replaces the merged node, its siblings go.
            let displaced: Cost = c.frontier.iter().filter(|&&f| f != v).map(|&f| self.subtree[f]).sum();
            let price = match self.side {
                Side::Source => self.model.edge_fusion(&c.label, lower),
                Side::Target => self.model.edge_split(&c.label, lower),
            } + displaced;
            let label = self.model.merge_edge(&c.label, lower);
            out.push(self.step(c, FusionKind::Edge, v, label, t.children(v).to_vec(), price, v));
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        c: &Chain,
        kind: FusionKind,
        v: usize,
        label: Label,
        frontier: Vec<usize>,
        price: Cost,
        rep: usize,
    ) -> Chain {
        let mut path = c.path.clone();
        path.push(PathStep { kind, node: v });
        let op = match kind {
            FusionKind::Node => EditOp::NodeFusion {
                upper: c.rep,
                lower: v,
                cost: price,
                path: path.clone(),
            },
            FusionKind::Edge => EditOp::EdgeFusion {
                upper: c.rep,
                lower: v,
                cost: price,
                path: path.clone(),
            },
        };
        let mut ops = c.ops.clone();
        ops.push(op);
        let mut group = c.group.clone();
        group.push(v);
        Chain {
            seq: ForestSeq::new(self.tree, &frontier),
            label,
            frontier,
            cost: c.cost + price,
            path,
            rep,
            group,
            ops,
        }
    }
}

fn subtree_prices(t: &IndexedTree, price: impl Fn(usize) -> Cost) -> Vec<Cost> {
    let mut out = vec![Cost::ZERO; t.len() + 1];
    for i in 1..=t.len() {
        out[i] = price(i) + t.children(i).iter().map(|&c| out[c]).sum::<Cost>();
    }
    out
}

/// The fused pair chosen at a subtree pair: chain indices and the relabel
/// price of the two merged objects.
type Choice = (u32, u32, Cost);

struct FusionHook<'a> {
    model: &'a dyn CostModel,
    costs: &'a ModelCosts,
    chains1: &'a [Vec<Chain>],
    chains2: &'a [Vec<Chain>],
    choices: HashMap<(usize, usize), Choice>,
    fd: Table,
}

impl TreeHook for FusionHook<'_> {
    fn tree_cell(&mut self, x: usize, y: usize, td: &Table, classical: Cost) -> Cost {
        let mut best = classical;
        let mut choice = None;
        for (p, c1) in self.chains1[x].iter().enumerate() {
            for (q, c2) in self.chains2[y].iter().enumerate() {
                if p == 0 && q == 0 {
                    continue;
                }
                let fixed = c1.cost + c2.cost;
                if fixed >= best {
                    continue;
                }
                let relabel = self.model.relabel(&c1.label, &c2.label);
                if fixed + relabel >= best {
                    continue;
                }
                let v = fixed + relabel + forest_dp(&c1.seq, &c2.seq, self.costs, td, &mut self.fd);
                if v < best {
                    best = v;
                    choice = Some((p as u32, q as u32, relabel));
                }
            }
        }
        if let Some(c) = choice {
            self.choices.insert((x, y), c);
        }
        best
    }
}

/// Completed fusion DP, ready for script extraction.
pub struct FusionDPState {
    pub td: Table,
    costs: ModelCosts,
    chains1: Vec<Vec<Chain>>,
    chains2: Vec<Vec<Chain>>,
    choices: HashMap<(usize, usize), Choice>,
    n1: usize,
    n2: usize,
}

impl FusionDPState {
    pub fn distance(&self) -> Cost {
        self.td.get(self.n1, self.n2)
    }

    /// Most fusion paths of a single length seen at any node, per length.
    pub fn max_paths_by_length(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for chains in self.chains1.iter().chain(self.chains2.iter()) {
            let mut counts: Vec<usize> = Vec::new();
            for c in chains {
                let m = c.path.len();
                if counts.len() <= m {
                    counts.resize(m + 1, 0);
                }
                counts[m] += 1;
            }
            if out.len() < counts.len() {
                out.resize(counts.len(), 0);
            }
            for (o, c) in out.iter_mut().zip(counts) {
                *o = (*o).max(c);
            }
        }
        out
    }

    /// Number of subtree pairs resolved by fusions.
    pub fn fused_cells(&self) -> usize {
        self.choices.len()
    }
}

fn all_chains(
    t: &IndexedTree,
    model: &dyn CostModel,
    side: Side,
    params: FusionParams,
    subtree: Vec<Cost>,
) -> Vec<Vec<Chain>> {
    let builder = ChainBuilder {
        tree: t,
        model,
        side,
        params,
        subtree,
    };
    let mut out = vec![Vec::new()];
    let d = t.max_degree();
    for x in 1..=t.len() {
        let chains = builder.chains(x);
        if cfg!(debug_assertions) {
            let mut counts = vec![0u128; params.l + 1];
            for c in &chains {
                counts[c.path.len()] += 1;
            }
            for (m, &n) in counts.iter().enumerate() {
                debug_assert!(
                    n <= path_count_bound(d, m),
                    "{n} paths of length {m} at node {x} (d = {d})"
                );
            }
        }
        out.push(chains);
    }
    out
}

/// Distance with fusions and splits, plus the state needed to extract an
/// optimal script.
pub fn fusion_dp(
    t1: &IndexedTree,
    t2: &IndexedTree,
    model: &dyn CostModel,
    params: &FusionParams,
) -> Result<(Cost, FusionDPState), DistanceError> {
    params.check()?;
    let costs = ModelCosts::new(t1, t2, model);
    let sub1 = subtree_prices(t1, |i| costs.del(i));
    let sub2 = subtree_prices(t2, |j| costs.ins(j));
    let chains1 = all_chains(t1, model, Side::Source, *params, sub1);
    let chains2 = all_chains(t2, model, Side::Target, *params, sub2);
    let mut hook = FusionHook {
        model,
        costs: &costs,
        chains1: &chains1,
        chains2: &chains2,
        choices: HashMap::new(),
        fd: Table::new(0, 0, Cost::ZERO),
    };
    let td = keyroot_dp(t1, t2, &costs, &mut hook);
    let choices = hook.choices;
    let state = FusionDPState {
        td,
        costs,
        chains1,
        chains2,
        choices,
        n1: t1.len(),
        n2: t2.len(),
    };
    Ok((state.distance(), state))
}

impl FusedChoices for FusionDPState {
    fn expand(&self, x: usize, y: usize, out: &mut ScriptBuilder) -> Option<(Vec<usize>, Vec<usize>)> {
        let &(p, q, relabel) = self.choices.get(&(x, y))?;
        let (c1, c2) = (&self.chains1[x][p as usize], &self.chains2[y][q as usize]);
        out.t_fusions.extend(c1.ops.iter().cloned());
        out.t2_fusions.extend(c2.ops.iter().cloned());
        out.relabels.push(EditOp::Relabel {
            from: c1.rep,
            to: c2.rep,
            cost: relabel,
        });
        out.mapping.push(MappingPair {
            t: c1.rep,
            t2: c2.rep,
            t_group: c1.group.clone(),
            t2_group: c2.group.clone(),
        });
        Some((c1.frontier.clone(), c2.frontier.clone()))
    }
}

/// Optimal script (fusions and splits included) and the induced mapping of
/// merged objects.
pub fn extract_fusion_script(t1: &IndexedTree, t2: &IndexedTree, state: &FusionDPState) -> (EditScript, Mapping) {
    Extractor {
        t1,
        t2,
        costs: &state.costs,
        td: &state.td,
        fused: state,
    }
    .run()
}

/// Distance, script and mapping in one call.
pub fn fusion_distance(
    t1: &IndexedTree,
    t2: &IndexedTree,
    model: &dyn CostModel,
    params: &FusionParams,
) -> Result<(Cost, EditScript, Mapping), DistanceError> {
    let (d, state) = fusion_dp(t1, t2, model, params)?;
    let (script, mapping) = extract_fusion_script(t1, t2, &state);
    Ok((d, script, mapping))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::zs_distance;
    use crate::model::{structural_model, unit_model};
    use crate::tree::parse_tree;

    fn idx(s: &str) -> IndexedTree {
        IndexedTree::new(parse_tree(s).unwrap())
    }

    #[test]
    fn bound_formula() {
        assert_eq!(path_count_bound(2, 0), 1);
        assert_eq!(path_count_bound(2, 1), 4);
        assert_eq!(path_count_bound(3, 2), 2 * 3 * 2 * (3 + 9));
    }

    #[test]
    fn zero_fusions_is_classical() {
        let m = structural_model(0.05).unwrap();
        let (a, b) = (idx("E:0/0(H:3@13)"), idx("E:0/0(I:2/2@7(H:3@5))"));
        let (d0, _) = fusion_dp(&a, &b, &m, &FusionParams::new(0)).unwrap();
        assert_eq!(d0, zs_distance(&a, &b, &m).0);
    }

    #[test]
    fn helix_split_uses_an_edge_fusion() {
        let m = structural_model(0.05).unwrap();
        let (a, b) = (idx("E:0/0(H:3@13)"), idx("E:0/0(I:2/2@7(H:3@5))"));
        let classical = zs_distance(&a, &b, &m).0;
        let (d, script, mapping) = fusion_distance(&a, &b, &m, &FusionParams::new(1)).unwrap();
        assert!(d < classical, "{d} vs {classical}");
        assert_eq!(script.total_cost(), d);
        assert!(script.ops.iter().any(|op| matches!(op, EditOp::EdgeSplit { .. })));
        let helix = mapping.iter().find(|p| p.t == 1).unwrap();
        assert_eq!(helix.t2_group.len(), 2);
    }

    #[test]
    fn identity_and_errors() {
        let m = unit_model(0.1).unwrap();
        let a = idx("sa(sb(sc),sd)");
        assert_eq!(fusion_dp(&a, &a, &m, &FusionParams::new(2)).unwrap().0, Cost::ZERO);
        assert!(matches!(
            fusion_dp(&a, &a, &m, &FusionParams::new(4)),
            Err(DistanceError::FusionBoundTooLarge(4))
        ));
    }
}
