//! Classical tree edit distance over postorder-indexed trees, the keyroot
//! schedule shared with the fusion distance, and script extraction.

use serde::{Deserialize, Serialize};

use crate::cost::Cost;
use crate::model::CostModel;
use crate::tree::IndexedTree;

/// Dense `(n1 + 1) x (n2 + 1)` table indexed by postorder positions.
#[derive(Clone, Debug)]
pub struct Table {
    cols: usize,
    cells: Vec<Cost>,
}

impl Table {
    pub fn new(rows: usize, cols: usize, fill: Cost) -> Table {
        Table {
            cols,
            cells: vec![fill; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cost {
        self.cells[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cost) {
        self.cells[i * self.cols + j] = v;
    }

    fn reset(&mut self, rows: usize, cols: usize) {
        self.cols = cols;
        self.cells.clear();
        self.cells.resize(rows * cols, Cost::ZERO);
    }
}

/// Index-based prices for one pair of trees.
pub trait PairCosts {
    fn del(&self, i: usize) -> Cost;
    fn ins(&self, j: usize) -> Cost;
    fn relabel(&self, i: usize, j: usize) -> Cost;
}

/// Model prices evaluated once per node and node pair.
#[derive(Clone, Debug)]
pub struct ModelCosts {
    del: Vec<Cost>,
    ins: Vec<Cost>,
    relabel: Table,
}

impl ModelCosts {
    pub fn new(t1: &IndexedTree, t2: &IndexedTree, m: &dyn CostModel) -> ModelCosts {
        let (n1, n2) = (t1.len(), t2.len());
        let mut relabel = Table::new(n1 + 1, n2 + 1, Cost::ZERO);
        for i in 1..=n1 {
            for j in 1..=n2 {
                relabel.set(i, j, m.relabel(t1.label(i), t2.label(j)));
            }
        }
        let mut del = vec![Cost::ZERO; n1 + 1];
        for (i, d) in del.iter_mut().enumerate().skip(1) {
            *d = m.delete(t1.label(i));
        }
        let mut ins = vec![Cost::ZERO; n2 + 1];
        for (j, c) in ins.iter_mut().enumerate().skip(1) {
            *c = m.insert(t2.label(j));
        }
        ModelCosts { del, ins, relabel }
    }

    /// Replaces the relabel price of selected pairs.
    pub fn override_relabel(&mut self, mut f: impl FnMut(usize, usize, Cost) -> Cost) {
        let n1 = self.del.len() - 1;
        let n2 = self.ins.len() - 1;
        for i in 1..=n1 {
            for j in 1..=n2 {
                let v = f(i, j, self.relabel.get(i, j));
                self.relabel.set(i, j, v);
            }
        }
    }

    pub fn total_delete(&self) -> Cost {
        self.del.iter().sum()
    }

    pub fn total_insert(&self) -> Cost {
        self.ins.iter().sum()
    }
}

impl PairCosts for ModelCosts {
    fn del(&self, i: usize) -> Cost {
        self.del[i]
    }
    fn ins(&self, j: usize) -> Cost {
        self.ins[j]
    }
    fn relabel(&self, i: usize, j: usize) -> Cost {
        self.relabel.get(i, j)
    }
}

/// Extra options evaluated whenever the DP reaches a pair of whole subtrees.
pub(crate) trait TreeHook {
    /// Returns the subtree distance of `(x, y)` given the classical value.
    fn tree_cell(&mut self, x: usize, y: usize, td: &Table, classical: Cost) -> Cost;
}

pub(crate) struct NoHook;

impl TreeHook for NoHook {
    fn tree_cell(&mut self, _: usize, _: usize, _: &Table, classical: Cost) -> Cost {
        classical
    }
}

/// Runs the keyroot schedule and returns the subtree-distance table.
pub(crate) fn keyroot_dp(t1: &IndexedTree, t2: &IndexedTree, c: &dyn PairCosts, hook: &mut dyn TreeHook) -> Table {
    let (n1, n2) = (t1.len(), t2.len());
    let mut td = Table::new(n1 + 1, n2 + 1, Cost::INFINITY);
    let mut fd = Table::new(0, 0, Cost::ZERO);
    for &i in t1.keyroots() {
        for &j in t2.keyroots() {
            let (li, lj) = (t1.lml(i), t2.lml(j));
            let (rows, cols) = (i - li + 2, j - lj + 2);
            fd.reset(rows, cols);
            for a in 1..rows {
                fd.set(a, 0, fd.get(a - 1, 0) + c.del(li + a - 1));
            }
            for b in 1..cols {
                fd.set(0, b, fd.get(0, b - 1) + c.ins(lj + b - 1));
            }
            for x in li..=i {
                let a = x - li + 1;
                for y in lj..=j {
                    let b = y - lj + 1;
                    let del = fd.get(a - 1, b) + c.del(x);
                    let ins = fd.get(a, b - 1) + c.ins(y);
                    if t1.lml(x) == li && t2.lml(y) == lj {
                        let classical = del.min(ins).min(fd.get(a - 1, b - 1) + c.relabel(x, y));
                        let v = hook.tree_cell(x, y, &td, classical);
                        fd.set(a, b, v);
                        td.set(x, y, v);
                    } else {
                        let (la, lb) = (t1.lml(x) - li, t2.lml(y) - lj);
                        fd.set(a, b, del.min(ins).min(fd.get(la, lb) + td.get(x, y)));
                    }
                }
            }
        }
    }
    td
}

/// Postorder sequence of a forest given by its roots, with the start of
/// each node's subtree within the sequence (both 1-based).
#[derive(Clone, Debug, Default)]
pub(crate) struct ForestSeq {
    pub nodes: Vec<usize>,
    pub start: Vec<usize>,
}

impl ForestSeq {
    pub fn new(t: &IndexedTree, roots: &[usize]) -> ForestSeq {
        let mut seq = ForestSeq {
            nodes: vec![0],
            start: vec![0],
        };
        for &r in roots {
            let base = seq.nodes.len();
            for k in t.lml(r)..=r {
                seq.nodes.push(k);
                seq.start.push(base + (t.lml(k) - t.lml(r)));
            }
        }
        seq
    }

    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Distance between two forests, using `td` for every pair of subtrees.
pub(crate) fn forest_dp(a: &ForestSeq, b: &ForestSeq, c: &dyn PairCosts, td: &Table, fd: &mut Table) -> Cost {
    let (rows, cols) = (a.len() + 1, b.len() + 1);
    fd.reset(rows, cols);
    for s in 1..rows {
        fd.set(s, 0, fd.get(s - 1, 0) + c.del(a.nodes[s]));
    }
    for s2 in 1..cols {
        fd.set(0, s2, fd.get(0, s2 - 1) + c.ins(b.nodes[s2]));
    }
    for s in 1..rows {
        let x = a.nodes[s];
        let dx = c.del(x);
        let sa = a.start[s] - 1;
        for s2 in 1..cols {
            let y = b.nodes[s2];
            let v = (fd.get(s - 1, s2) + dx)
                .min(fd.get(s, s2 - 1) + c.ins(y))
                .min(fd.get(sa, b.start[s2] - 1) + td.get(x, y));
            fd.set(s, s2, v);
        }
    }
    fd.get(rows - 1, cols - 1)
}

/// Completed classical DP.
#[derive(Clone, Debug)]
pub struct DPTables {
    pub td: Table,
    pub n1: usize,
    pub n2: usize,
}

impl DPTables {
    pub fn distance(&self) -> Cost {
        self.td.get(self.n1, self.n2)
    }
}

/// Classical edit distance under a cost model.
pub fn zs_distance(t1: &IndexedTree, t2: &IndexedTree, m: &dyn CostModel) -> (Cost, DPTables, ModelCosts) {
    let costs = ModelCosts::new(t1, t2, m);
    let (d, tables) = zs_distance_with(t1, t2, &costs);
    (d, tables, costs)
}

pub fn zs_distance_with(t1: &IndexedTree, t2: &IndexedTree, c: &dyn PairCosts) -> (Cost, DPTables) {
    let td = keyroot_dp(t1, t2, c, &mut NoHook);
    let tables = DPTables {
        td,
        n1: t1.len(),
        n2: t2.len(),
    };
    (tables.distance(), tables)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionKind {
    Node,
    Edge,
}

/// One step of a fusion path: which kind of fusion absorbed which node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub kind: FusionKind,
    pub node: usize,
}

/// An edit operation. Node ids are 1-based postorder positions in the input
/// they belong to: `T` for deletions and fusions, `T'` for insertions and
/// splits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Delete {
        node: usize,
        cost: Cost,
    },
    Insert {
        node: usize,
        cost: Cost,
    },
    Relabel {
        from: usize,
        to: usize,
        cost: Cost,
    },
    /// `upper` is the current representative of the fused group.
    NodeFusion {
        upper: usize,
        lower: usize,
        cost: Cost,
        path: Vec<PathStep>,
    },
    EdgeFusion {
        upper: usize,
        lower: usize,
        cost: Cost,
        path: Vec<PathStep>,
    },
    NodeSplit {
        upper: usize,
        lower: usize,
        cost: Cost,
        path: Vec<PathStep>,
    },
    EdgeSplit {
        upper: usize,
        lower: usize,
        cost: Cost,
        path: Vec<PathStep>,
    },
}

impl EditOp {
    pub fn cost(&self) -> Cost {
        match self {
            EditOp::Delete { cost, .. }
            | EditOp::Insert { cost, .. }
            | EditOp::Relabel { cost, .. }
            | EditOp::NodeFusion { cost, .. }
            | EditOp::EdgeFusion { cost, .. }
            | EditOp::NodeSplit { cost, .. }
            | EditOp::EdgeSplit { cost, .. } => *cost,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EditOp::Delete { .. } => "delete",
            EditOp::Insert { .. } => "insert",
            EditOp::Relabel { .. } => "relabel",
            EditOp::NodeFusion { .. } => "node_fusion",
            EditOp::EdgeFusion { .. } => "edge_fusion",
            EditOp::NodeSplit { .. } => "node_split",
            EditOp::EdgeSplit { .. } => "edge_split",
        }
    }

    pub fn is_fusion(&self) -> bool {
        matches!(
            self,
            EditOp::NodeFusion { .. } | EditOp::EdgeFusion { .. } | EditOp::NodeSplit { .. } | EditOp::EdgeSplit { .. }
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    pub fn total_cost(&self) -> Cost {
        self.ops.iter().map(EditOp::cost).sum()
    }

    /// Operation counts in a fixed order of kinds.
    pub fn counts(&self) -> Vec<(&'static str, usize)> {
        let names = [
            "relabel",
            "delete",
            "insert",
            "node_fusion",
            "edge_fusion",
            "node_split",
            "edge_split",
        ];
        names
            .iter()
            .map(|&n| (n, self.ops.iter().filter(|o| o.name() == n).count()))
            .collect()
    }
}

/// A matched pair of objects. Groups list every original node merged into
/// the object (a single node unless fusions were applied); `t` and `t2` are
/// the representatives that carry the merged label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingPair {
    pub t: usize,
    pub t2: usize,
    pub t_group: Vec<usize>,
    pub t2_group: Vec<usize>,
}

pub type Mapping = Vec<MappingPair>;

/// Collects operations during backtracking.
#[derive(Default)]
pub(crate) struct ScriptBuilder {
    pub t_fusions: Vec<EditOp>,
    pub t2_fusions: Vec<EditOp>,
    pub deletes: Vec<EditOp>,
    pub relabels: Vec<EditOp>,
    pub inserts: Vec<EditOp>,
    pub mapping: Mapping,
}

impl ScriptBuilder {
    /// Canonical order: fusions on `T`, deletions, relabels, insertions in
    /// preorder of `T'`, then splits undoing the `T'` fusions last-first.
    pub fn finish(mut self, t2: &IndexedTree) -> (EditScript, Mapping) {
        self.deletes.sort_by_key(|op| match op {
            EditOp::Delete { node, .. } => *node,
            _ => unreachable!(),
        });
        self.inserts.sort_by_key(|op| match op {
            EditOp::Insert { node, .. } => t2.preorder_rank(*node),
            _ => unreachable!(),
        });
        self.relabels.sort_by_key(|op| match op {
            EditOp::Relabel { from, .. } => *from,
            _ => unreachable!(),
        });
        self.mapping.sort_by_key(|p| p.t);
        let splits = self.t2_fusions.into_iter().rev().map(|op| match op {
            EditOp::NodeFusion {
                upper,
                lower,
                cost,
                path,
            } => EditOp::NodeSplit {
                upper,
                lower,
                cost,
                path,
            },
            EditOp::EdgeFusion {
                upper,
                lower,
                cost,
                path,
            } => EditOp::EdgeSplit {
                upper,
                lower,
                cost,
                path,
            },
            other => other,
        });
        let mut ops = self.t_fusions;
        ops.extend(self.deletes);
        ops.extend(self.relabels);
        ops.extend(self.inserts);
        ops.extend(splits);
        (EditScript { ops }, self.mapping)
    }
}

/// Supplies the fused alternative chosen at a pair of subtrees, if any.
pub(crate) trait FusedChoices {
    /// When `(x, y)` was resolved by fusions, records the fusion operations
    /// and the matched pair, and returns the two remaining child forests.
    fn expand(&self, x: usize, y: usize, out: &mut ScriptBuilder) -> Option<(Vec<usize>, Vec<usize>)>;
}

impl FusedChoices for () {
    fn expand(&self, _: usize, _: usize, _: &mut ScriptBuilder) -> Option<(Vec<usize>, Vec<usize>)> {
        None
    }
}

pub(crate) struct Extractor<'a> {
    pub t1: &'a IndexedTree,
    pub t2: &'a IndexedTree,
    pub costs: &'a dyn PairCosts,
    pub td: &'a Table,
    pub fused: &'a dyn FusedChoices,
}

impl Extractor<'_> {
    pub fn run(&self) -> (EditScript, Mapping) {
        let mut out = ScriptBuilder::default();
        let mut work = vec![(vec![self.t1.root()], vec![self.t2.root()])];
        while let Some((a, b)) = work.pop() {
            self.forest(&a, &b, &mut out, &mut work);
        }
        out.finish(self.t2)
    }

    /// Backtracks one forest pair; subtree pairs that need their own
    /// decomposition are pushed onto `work`.
    fn forest(&self, a: &[usize], b: &[usize], out: &mut ScriptBuilder, work: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        let (sa, sb) = (ForestSeq::new(self.t1, a), ForestSeq::new(self.t2, b));
        let mut fd = Table::new(0, 0, Cost::ZERO);
        forest_dp(&sa, &sb, self.costs, self.td, &mut fd);
        let (mut s, mut s2) = (sa.len(), sb.len());
        while s > 0 || s2 > 0 {
            let here = fd.get(s, s2);
            if s > 0 && s2 > 0 {
                let (x, y) = (sa.nodes[s], sb.nodes[s2]);
                let (pa, pb) = (sa.start[s] - 1, sb.start[s2] - 1);
                if fd.get(pa, pb) + self.td.get(x, y) == here {
                    self.tree(x, y, out, work);
                    s = pa;
                    s2 = pb;
                    continue;
                }
            }
            if s > 0 && fd.get(s - 1, s2) + self.costs.del(sa.nodes[s]) == here {
                let x = sa.nodes[s];
                out.deletes.push(EditOp::Delete {
                    node: x,
                    cost: self.costs.del(x),
                });
                s -= 1;
            } else {
                let y = sb.nodes[s2];
                debug_assert!(s2 > 0 && fd.get(s, s2 - 1) + self.costs.ins(y) == here);
                out.inserts.push(EditOp::Insert {
                    node: y,
                    cost: self.costs.ins(y),
                });
                s2 -= 1;
            }
        }
    }

    /// Resolves the subtree pair `(x, y)` whose distance is `td[x][y]`.
    fn tree(&self, x: usize, y: usize, out: &mut ScriptBuilder, work: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        let (t1, t2) = (self.t1, self.t2);
        let target = self.td.get(x, y);
        let (cx, cy) = (t1.children(x).to_vec(), t2.children(y).to_vec());
        let mut fd = Table::new(0, 0, Cost::ZERO);
        let mut dist = |a: &[usize], b: &[usize]| {
            forest_dp(
                &ForestSeq::new(t1, a),
                &ForestSeq::new(t2, b),
                self.costs,
                self.td,
                &mut fd,
            )
        };
        if dist(&cx, &cy) + self.costs.relabel(x, y) == target {
            out.relabels.push(EditOp::Relabel {
                from: x,
                to: y,
                cost: self.costs.relabel(x, y),
            });
            out.mapping.push(MappingPair {
                t: x,
                t2: y,
                t_group: vec![x],
                t2_group: vec![y],
            });
            work.push((cx, cy));
        } else if dist(&cx, &[y]) + self.costs.del(x) == target {
            out.deletes.push(EditOp::Delete {
                node: x,
                cost: self.costs.del(x),
            });
            work.push((cx, vec![y]));
        } else if dist(&[x], &cy) + self.costs.ins(y) == target {
            out.inserts.push(EditOp::Insert {
                node: y,
                cost: self.costs.ins(y),
            });
            work.push((vec![x], cy));
        } else {
            let rest = self.fused.expand(x, y, out).expect("subtree distance has no witness");
            work.push(rest);
        }
    }
}

/// Edit script and mapping realizing a classical distance.
pub fn extract_script(
    t1: &IndexedTree,
    t2: &IndexedTree,
    costs: &dyn PairCosts,
    tables: &DPTables,
) -> (EditScript, Mapping) {
    Extractor {
        t1,
        t2,
        costs,
        td: &tables.td,
        fused: &(),
    }
    .run()
}

/// Classical distance, script and mapping in one call.
pub fn classical(t1: &IndexedTree, t2: &IndexedTree, m: &dyn CostModel) -> (Cost, EditScript, Mapping) {
    let (d, tables, costs) = zs_distance(t1, t2, m);
    let (script, mapping) = extract_script(t1, t2, &costs, &tables);
    (d, script, mapping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::unit_model;
    use crate::tree::parse_tree;

    fn idx(s: &str) -> IndexedTree {
        IndexedTree::new(parse_tree(s).unwrap())
    }

    #[test]
    fn unit_examples() {
        let m = unit_model(0.1).unwrap();
        let one = |a: &str, b: &str| zs_distance(&idx(a), &idx(b), &m).0;
        assert_eq!(one("sa", "sa"), Cost::ZERO);
        assert_eq!(one("sa", "sb"), Cost::ONE);
        assert_eq!(one("sa(sb,sc)", "sa(sb,sc)"), Cost::ZERO);
        assert_eq!(one("sa(sb,sc)", "sa"), Cost(2 * Cost::ONE.0));
        // Relabel A to F, delete B, insert G.
        let t = "sA(sB(sC,sD),sE)";
        let t2 = "sF(sC,sG(sD,sE))";
        assert_eq!(one(t, t2), Cost(3 * Cost::ONE.0));
        // Classic textbook pair.
        assert_eq!(
            one("sf(sd(sa,sc(sb)),se)", "sf(sc(sd(sa,sb)),se)"),
            Cost(2 * Cost::ONE.0)
        );
    }

    #[test]
    fn scripts_cover_the_distance() {
        let m = unit_model(0.1).unwrap();
        let (t1, t2) = (idx("sA(sB(sC,sD),sE)"), idx("sF(sC,sG(sD,sE))"));
        let (d, script, mapping) = classical(&t1, &t2, &m);
        assert_eq!(script.total_cost(), d);
        assert_eq!(mapping.len(), 4);
        let (_, script, mapping) = classical(&t1, &t1, &m);
        assert!(script
            .ops
            .iter()
            .all(|op| matches!(op, EditOp::Relabel { cost: Cost::ZERO, .. })));
        assert!(mapping.iter().all(|p| p.t == p.t2));
        assert_eq!(mapping.len(), 5);
    }

    #[test]
    fn single_node_relabel_script() {
        let m = unit_model(0.1).unwrap();
        let (_, script, mapping) = classical(&idx("sA"), &idx("sB"), &m);
        assert_eq!(
            script.ops,
            vec![EditOp::Relabel {
                from: 1,
                to: 1,
                cost: Cost::ONE
            }]
        );
        assert_eq!(mapping[0].t, 1);
    }
}
