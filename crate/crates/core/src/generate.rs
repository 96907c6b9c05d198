//! Tree and structure generators for tests, the `verify` command and
//! benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::structure::{PairingPolicy, SecondaryStructure};
use crate::tree::{Label, LabeledTree};

/// Random ordered tree with `n` nodes and at most `max_degree` children per
/// node, labels drawn uniformly from `labels`.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, max_degree: usize, labels: &[Label]) -> LabeledTree {
    assert!(n >= 1 && max_degree >= 1 && !labels.is_empty());
    let mut t = LabeledTree::new(labels.choose(rng).expect("labels").clone());
    let mut open = vec![0usize];
    for _ in 1..n {
        let k = rng.gen_range(0..open.len());
        let parent = open[k];
        let child = t.add_child(parent, labels.choose(rng).expect("labels").clone());
        // Move the new child to a random position among its siblings.
        let kids = &mut t.nodes[parent].children;
        let pos = rng.gen_range(0..kids.len());
        let last = kids.pop().expect("child");
        kids.insert(pos, last);
        if t.nodes[parent].children.len() >= max_degree {
            open.swap_remove(k);
        }
        open.push(child);
    }
    renumber(&t)
}

/// Copies a tree so that arena ids follow preorder.
fn renumber(t: &LabeledTree) -> LabeledTree {
    let mut out = LabeledTree::new(t.label(t.root()).clone());
    let mut stack: Vec<(usize, usize)> = t.children(t.root()).iter().rev().map(|&c| (c, 0)).collect();
    while let Some((old, parent)) = stack.pop() {
        let new = out.add_child_with_origin(parent, t.label(old).clone(), t.nodes[old].origin.clone());
        stack.extend(t.children(old).iter().rev().map(|&c| (c, new)));
    }
    out.rep = t.rep;
    out
}

/// Ordered tree shapes with exactly `n` nodes, as tree text templates with
/// `*` standing for each label (preorder).
pub fn shapes(n: usize) -> Vec<String> {
    fn forests(k: usize) -> Vec<Vec<String>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for first in 1..=k {
            for t in shapes(first) {
                for mut rest in forests(k - first) {
                    rest.insert(0, t.clone());
                    out.push(rest);
                }
            }
        }
        out
    }
    if n == 0 {
        return Vec::new();
    }
    forests(n - 1)
        .into_iter()
        .map(|f| {
            if f.is_empty() {
                "*".to_string()
            } else {
                format!("*({})", f.join(","))
            }
        })
        .collect()
}

/// Every labelled ordered tree with 1 to `max_nodes` nodes over `labels`.
pub fn all_trees(max_nodes: usize, labels: &[Label]) -> Vec<LabeledTree> {
    let texts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        for shape in shapes(n) {
            let combos = texts.len().pow(n as u32);
            for mut code in 0..combos {
                let mut text = String::new();
                for ch in shape.chars() {
                    if ch == '*' {
                        text.push_str(&texts[code % texts.len()]);
                        code /= texts.len();
                    } else {
                        text.push(ch);
                    }
                }
                out.push(crate::tree::parse_tree(&text).expect("generated text parses"));
            }
        }
    }
    out
}

/// Random pseudoknot-free structure of length `n` with canonical or wobble
/// pairs and hairpins of at least three bases.
pub fn random_structure<R: Rng>(rng: &mut R, n: usize, id: &str) -> SecondaryStructure {
    fn region<R: Rng>(rng: &mut R, budget: usize, out: &mut Vec<u8>) {
        let mut left = budget;
        while left > 0 {
            if left >= 5 && rng.gen_bool(0.3) {
                let h = rng.gen_range(1..=((left - 3) / 2).min(5));
                let inner = rng.gen_range(3..=(left - 2 * h));
                out.extend(std::iter::repeat_n(b'(', h));
                region(rng, inner, out);
                out.extend(std::iter::repeat_n(b')', h));
                left -= 2 * h + inner;
            } else {
                out.push(b'.');
                left -= 1;
            }
        }
    }
    let mut dots = Vec::with_capacity(n);
    region(rng, n, &mut dots);
    const PAIRS: [(u8, u8); 6] = [
        (b'G', b'C'),
        (b'C', b'G'),
        (b'A', b'U'),
        (b'U', b'A'),
        (b'G', b'U'),
        (b'U', b'G'),
    ];
    let mut seq: Vec<u8> = (0..n).map(|_| *b"ACGU".choose(rng).expect("base")).collect();
    let mut stack = Vec::new();
    let mut pairs = Vec::new();
    for (k, &c) in dots.iter().enumerate() {
        match c {
            b'(' => stack.push(k),
            b')' => {
                let i = stack.pop().expect("balanced");
                let (a, b) = *PAIRS.choose(rng).expect("pair");
                seq[i] = a;
                seq[k] = b;
                pairs.push((i, k));
            }
            _ => {}
        }
    }
    pairs.sort_unstable();
    SecondaryStructure::new(
        id,
        std::str::from_utf8(&seq).expect("ascii"),
        pairs,
        PairingPolicy::Permissive,
    )
    .expect("generated structure is valid")
}
