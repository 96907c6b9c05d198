#![allow(dead_code)]

use rand::Rng;
use rnatreedit::tree::{IndexedTree, Kind, Label, LabeledTree};

/// Small label alphabet for the structural model: loops with sizes and
/// incoming helix lengths.
pub fn loop_labels() -> Vec<Label> {
    vec![
        Label::new(Kind::Hairpin, [3]).with_edge(4),
        Label::new(Kind::Internal, [1, 2]).with_edge(2),
        Label::new(Kind::Bulge, [2]).with_edge(1),
        Label::new(Kind::Multiloop, [0, 3, 1]).with_edge(5),
        Label::new(Kind::Hairpin, [6]).with_edge(3),
    ]
}

pub fn symbols() -> Vec<Label> {
    vec![Label::symbol('a'), Label::symbol('b')]
}

pub fn random_indexed<R: Rng>(rng: &mut R, max_nodes: usize, max_degree: usize, labels: &[Label]) -> IndexedTree {
    let n = rng.gen_range(1..=max_nodes);
    IndexedTree::new(rnatreedit::generate::random_tree(rng, n, max_degree, labels))
}

pub fn indexed(t: &LabeledTree) -> IndexedTree {
    IndexedTree::new(t.clone())
}
