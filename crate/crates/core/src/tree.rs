//! Ordered labeled trees, the four RNA encodings, postorder indexing and
//! the text and Graphviz renderings.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::structure::{decompose, ElementGraph, ElementKind, LoopItem, SecondaryStructure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Root,
    Exterior,
    Hairpin,
    Bulge,
    Internal,
    Multiloop,
    Stack,
    Unpaired,
    Base(char),
    Pair(char, char),
    Symbol(char),
}

impl Kind {
    pub fn from_element(kind: ElementKind) -> Kind {
        match kind {
            ElementKind::Helix => Kind::Stack,
            ElementKind::HairpinLoop => Kind::Hairpin,
            ElementKind::InternalLoop => Kind::Internal,
            ElementKind::Bulge => Kind::Bulge,
            ElementKind::Multiloop => Kind::Multiloop,
            ElementKind::ExteriorRegion => Kind::Exterior,
        }
    }

    pub fn is_loop(self) -> bool {
        matches!(
            self,
            Kind::Hairpin | Kind::Bulge | Kind::Internal | Kind::Multiloop | Kind::Exterior
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Root => f.write_str("^"),
            Kind::Exterior => f.write_str("E"),
            Kind::Hairpin => f.write_str("H"),
            Kind::Bulge => f.write_str("B"),
            Kind::Internal => f.write_str("I"),
            Kind::Multiloop => f.write_str("M"),
            Kind::Stack => f.write_str("S"),
            Kind::Unpaired => f.write_str("U"),
            Kind::Base(c) => write!(f, "b{c}"),
            Kind::Pair(a, b) => write!(f, "p{a}{b}"),
            Kind::Symbol(c) => write!(f, "s{c}"),
        }
    }
}

/// The label of a node together with the label of the edge leading to it.
/// The two are compared, inserted and deleted as a single object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub kind: Kind,
    /// Numeric payload, e.g. unpaired counts per loop side.
    pub sizes: Vec<u32>,
    /// Edge payload, e.g. the stacked-pair count of the helix above a loop.
    pub edge: Option<u32>,
}

impl Label {
    pub fn new(kind: Kind, sizes: impl Into<Vec<u32>>) -> Label {
        Label {
            kind,
            sizes: sizes.into(),
            edge: None,
        }
    }

    pub fn with_edge(mut self, edge: u32) -> Label {
        self.edge = Some(edge);
        self
    }

    pub fn symbol(c: char) -> Label {
        Label::new(Kind::Symbol(c), [])
    }

    pub fn size(&self) -> u32 {
        self.sizes.iter().sum()
    }

    pub fn edge_size(&self) -> u32 {
        self.edge.unwrap_or(0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.sizes.is_empty() {
            f.write_char(':')?;
            for (i, s) in self.sizes.iter().enumerate() {
                if i > 0 {
                    f.write_char('/')?;
                }
                write!(f, "{s}")?;
            }
        }
        if let Some(e) = self.edge {
            write!(f, "@{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    RepB,
    RepC,
    RepD,
    RepE,
    #[default]
    Generic,
}

/// Where a node comes from in the secondary structure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub bases: Vec<usize>,
    pub elements: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub label: Label,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub origin: Origin,
}

/// Rooted ordered tree stored as an arena; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTree {
    pub nodes: Vec<TreeNode>,
    pub rep: Representation,
}

impl LabeledTree {
    pub fn new(root: Label) -> LabeledTree {
        LabeledTree::with_origin(root, Origin::default(), Representation::Generic)
    }

    fn with_origin(root: Label, origin: Origin, rep: Representation) -> LabeledTree {
        LabeledTree {
            nodes: vec![TreeNode {
                label: root,
                children: Vec::new(),
                parent: None,
                origin,
            }],
            rep,
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_child(&mut self, parent: usize, label: Label) -> usize {
        self.add_child_with_origin(parent, label, Origin::default())
    }

    pub fn add_child_with_origin(&mut self, parent: usize, label: Label, origin: Origin) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            label,
            children: Vec::new(),
            parent: Some(parent),
            origin,
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn label(&self, node: usize) -> &Label {
        &self.nodes[node].label
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.nodes[node].children
    }

    /// Node ids in postorder (children left to right, then the node).
    pub fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((node, next)) = stack.pop() {
            if let Some(&child) = self.nodes[node].children.get(next) {
                stack.push((node, next + 1));
                stack.push((child, 0));
            } else {
                order.push(node);
            }
        }
        order
    }

    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            order.push(node);
            stack.extend(self.nodes[node].children.iter().rev());
        }
        order
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    /// Parenthesized text, e.g. `E(H:3@13,I:2/2@7(H:3@5))`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        // (node, next child to open)
        let mut stack = vec![(self.root(), 0usize)];
        let _ = write!(out, "{}", self.label(self.root()));
        while let Some((node, next)) = stack.pop() {
            let children = &self.nodes[node].children;
            if next < children.len() {
                out.push(if next == 0 { '(' } else { ',' });
                let child = children[next];
                let _ = write!(out, "{}", self.label(child));
                stack.push((node, next + 1));
                stack.push((child, 0));
            } else if !children.is_empty() {
                out.push(')');
            }
        }
        out
    }

    /// Structural equality on shape and labels, ignoring origins.
    pub fn same_shape_and_labels(&self, other: &LabeledTree) -> bool {
        self.to_text() == other.to_text()
    }
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Reads the text produced by [`LabeledTree::to_text`]. Whitespace between
/// tokens is ignored.
pub fn parse_tree(text: &str) -> Result<LabeledTree, ParseError> {
    let bytes: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut pos = 0;
    let err = |offset: usize, message: &str| ParseError::TreeSyntax {
        offset,
        message: message.to_string(),
    };
    let offset_at = |pos: usize| bytes.get(pos).map_or(text.len(), |(o, _)| *o);

    let read_label = |pos: &mut usize| -> Result<Label, ParseError> {
        let start = offset_at(*pos);
        let take = |pos: &mut usize| -> Option<char> {
            let c = bytes.get(*pos).map(|(_, c)| *c);
            if c.is_some() {
                *pos += 1;
            }
            c
        };
        let kind = match take(pos).ok_or_else(|| err(start, "expected a label"))? {
            '^' => Kind::Root,
            'E' => Kind::Exterior,
            'H' => Kind::Hairpin,
            'B' => Kind::Bulge,
            'I' => Kind::Internal,
            'M' => Kind::Multiloop,
            'S' => Kind::Stack,
            'U' => Kind::Unpaired,
            'b' => Kind::Base(
                take(pos)
                    .filter(|c| c.is_ascii_alphabetic())
                    .ok_or_else(|| err(start, "bad base"))?,
            ),
            'p' => {
                let a = take(pos)
                    .filter(|c| c.is_ascii_alphabetic())
                    .ok_or_else(|| err(start, "bad pair"))?;
                let b = take(pos)
                    .filter(|c| c.is_ascii_alphabetic())
                    .ok_or_else(|| err(start, "bad pair"))?;
                Kind::Pair(a, b)
            }
            's' => Kind::Symbol(
                take(pos)
                    .filter(|c| c.is_ascii_alphanumeric())
                    .ok_or_else(|| err(start, "bad symbol"))?,
            ),
            _ => return Err(err(start, "unknown label kind")),
        };
        let read_number = |pos: &mut usize| -> Result<u32, ParseError> {
            let begin = *pos;
            let mut value: u32 = 0;
            while let Some(d) = bytes.get(*pos).and_then(|(_, c)| c.to_digit(10)) {
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(d))
                    .ok_or_else(|| err(offset_at(begin), "number too large"))?;
                *pos += 1;
            }
            if *pos == begin {
                return Err(err(offset_at(begin), "expected a number"));
            }
            Ok(value)
        };
        let mut label = Label::new(kind, []);
        if bytes.get(*pos).map(|(_, c)| *c) == Some(':') {
            *pos += 1;
            label.sizes.push(read_number(pos)?);
            while bytes.get(*pos).map(|(_, c)| *c) == Some('/') {
                *pos += 1;
                label.sizes.push(read_number(pos)?);
            }
        }
        if bytes.get(*pos).map(|(_, c)| *c) == Some('@') {
            *pos += 1;
            label.edge = Some(read_number(pos)?);
        }
        Ok(label)
    };

    let mut tree = LabeledTree::new(read_label(&mut pos)?);
    let mut stack: Vec<usize> = Vec::new();
    let mut last = tree.root();
    while pos < bytes.len() {
        let (offset, c) = bytes[pos];
        pos += 1;
        match c {
            '(' => {
                stack.push(last);
                let label = read_label(&mut pos)?;
                last = tree.add_child(last, label);
            }
            ',' => {
                let parent = *stack.last().ok_or_else(|| err(offset, "',' outside of a child list"))?;
                let label = read_label(&mut pos)?;
                last = tree.add_child(parent, label);
            }
            ')' => {
                last = stack.pop().ok_or_else(|| err(offset, "unbalanced ')'"))?;
            }
            _ => return Err(err(offset, "unexpected character")),
        }
        if stack.is_empty() && pos < bytes.len() {
            return Err(err(offset_at(pos), "trailing input after the root"));
        }
    }
    if !stack.is_empty() {
        return Err(err(text.len(), "missing ')'"));
    }
    Ok(tree)
}

/// Rep-B: one internal node per base pair, one leaf per unpaired base.
pub fn build_rep_b(s: &SecondaryStructure) -> LabeledTree {
    let mut tree = LabeledTree::with_origin(Label::new(Kind::Root, []), Origin::default(), Representation::RepB);
    let partner = s.partner_table();
    // (parent node, next base, end of interior)
    let mut stack = vec![(tree.root(), 0usize, s.len())];
    while let Some((parent, k, end)) = stack.pop() {
        if k >= end {
            continue;
        }
        match partner[k] {
            Some(p) if p > k => {
                let label = Label::new(Kind::Pair(s.base(k), s.base(p)), [1]);
                let node = tree.add_child_with_origin(
                    parent,
                    label,
                    Origin {
                        bases: vec![k, p],
                        elements: Vec::new(),
                    },
                );
                stack.push((parent, p + 1, end));
                stack.push((node, k + 1, p));
            }
            _ => {
                let label = Label::new(Kind::Base(s.base(k)), [1]);
                tree.add_child_with_origin(
                    parent,
                    label,
                    Origin {
                        bases: vec![k],
                        elements: Vec::new(),
                    },
                );
                stack.push((parent, k + 1, end));
            }
        }
    }
    fill_elements(&mut tree, &decompose(s));
    tree
}

fn fill_elements(tree: &mut LabeledTree, graph: &ElementGraph) {
    for node in &mut tree.nodes {
        let mut elements: Vec<usize> = node.origin.bases.iter().map(|&b| graph.base_owner[b]).collect();
        elements.dedup();
        node.origin.elements = elements;
    }
}

fn helix_size(graph: &ElementGraph, helix: usize) -> u32 {
    graph.elements[helix].sizes[0]
}

/// Rep-C: one node per run of unpaired bases or per stack of pairs.
pub fn build_rep_c(graph: &ElementGraph) -> LabeledTree {
    let mut tree = LabeledTree::with_origin(Label::new(Kind::Root, []), Origin::default(), Representation::RepC);
    let mut pending = vec![(tree.root(), graph.root)];
    while let Some((parent, loop_id)) = pending.pop() {
        for item in &graph.elements[loop_id].layout {
            match *item {
                LoopItem::Run { start, len } => {
                    let origin = Origin {
                        bases: (start..start + len).collect(),
                        elements: vec![loop_id],
                    };
                    tree.add_child_with_origin(parent, Label::new(Kind::Unpaired, [len as u32]), origin);
                }
                LoopItem::Helix(h) => {
                    let origin = Origin {
                        bases: graph.elements[h].bases.clone(),
                        elements: vec![h],
                    };
                    let node =
                        tree.add_child_with_origin(parent, Label::new(Kind::Stack, [helix_size(graph, h)]), origin);
                    pending.push((node, graph.elements[h].inner_loop.expect("inner loop")));
                }
            }
        }
    }
    // Children were attached in layout order per loop; the pending stack only
    // changes the order in which loops are visited.
    tree
}

fn loop_origin(graph: &ElementGraph, ids: &[usize]) -> Origin {
    let mut bases: Vec<usize> = ids
        .iter()
        .flat_map(|&e| graph.elements[e].bases.iter().copied())
        .collect();
    bases.sort_unstable();
    Origin {
        bases,
        elements: ids.to_vec(),
    }
}

fn loop_label(graph: &ElementGraph, id: usize) -> Label {
    let e = &graph.elements[id];
    Label::new(Kind::from_element(e.kind), e.sizes.clone())
}

/// Rep-D: loops are nodes, helices are edges labelled with their length.
pub fn build_rep_d(graph: &ElementGraph) -> LabeledTree {
    build_element_tree(graph, false)
}

/// Rep-E: the multiloop skeleton. Internal loops and bulges are contracted
/// into the edge, whose label sums the contracted helix and loop sizes.
pub fn build_rep_e(graph: &ElementGraph) -> LabeledTree {
    build_element_tree(graph, true)
}

fn build_element_tree(graph: &ElementGraph, contract: bool) -> LabeledTree {
    let rep = if contract {
        Representation::RepE
    } else {
        Representation::RepD
    };
    let root_origin = loop_origin(graph, &[graph.root]);
    let mut tree = LabeledTree::with_origin(loop_label(graph, graph.root), root_origin, rep);
    let mut pending = vec![(tree.root(), graph.root)];
    while let Some((parent, loop_id)) = pending.pop() {
        for h in graph.elements[loop_id].branches() {
            let mut edge = helix_size(graph, h);
            let mut ids = vec![h];
            let mut inner = graph.elements[h].inner_loop.expect("inner loop");
            while contract
                && matches!(
                    graph.elements[inner].kind,
                    ElementKind::InternalLoop | ElementKind::Bulge
                )
            {
                let next = graph.elements[inner].branches().next().expect("one branch");
                edge += graph.elements[inner].sizes.iter().sum::<u32>() + helix_size(graph, next);
                ids.push(inner);
                ids.push(next);
                inner = graph.elements[next].inner_loop.expect("inner loop");
            }
            ids.push(inner);
            let label = loop_label(graph, inner).with_edge(edge);
            let node = tree.add_child_with_origin(parent, label, loop_origin(graph, &ids));
            pending.push((node, inner));
        }
    }
    tree
}

/// Builds the chosen encoding of a structure.
pub fn build(s: &SecondaryStructure, rep: Representation) -> LabeledTree {
    match rep {
        Representation::RepB | Representation::Generic => build_rep_b(s),
        Representation::RepC => build_rep_c(&decompose(s)),
        Representation::RepD => build_rep_d(&decompose(s)),
        Representation::RepE => build_rep_e(&decompose(s)),
    }
}

/// Postorder view of a tree, 1-based: node `i` is the i-th node of a
/// left-to-right postorder traversal and `i = len()` is the root.
#[derive(Clone, Debug)]
pub struct IndexedTree {
    tree: LabeledTree,
    /// `arena[i]` is the arena id of postorder node `i` (slot 0 unused).
    arena: Vec<usize>,
    labels: Vec<Label>,
    lml: Vec<usize>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    keyroots: Vec<usize>,
    pre_rank: Vec<usize>,
    leaves: usize,
    height: usize,
    max_degree: usize,
}

impl IndexedTree {
    pub fn new(tree: LabeledTree) -> IndexedTree {
        let order = tree.postorder();
        let n = order.len();
        let mut index_of = vec![0usize; n];
        for (k, &id) in order.iter().enumerate() {
            index_of[id] = k + 1;
        }
        let mut arena = vec![usize::MAX; n + 1];
        let mut labels = vec![Label::new(Kind::Root, []); n + 1];
        let mut lml = vec![0usize; n + 1];
        let mut parent = vec![0usize; n + 1];
        let mut children = vec![Vec::new(); n + 1];
        let mut depth = vec![0usize; n + 1];
        for (k, &id) in order.iter().enumerate() {
            let i = k + 1;
            arena[i] = id;
            labels[i] = tree.nodes[id].label.clone();
            children[i] = tree.nodes[id].children.iter().map(|&c| index_of[c]).collect();
            lml[i] = children[i].first().map_or(i, |&c| lml[c]);
            if let Some(p) = tree.nodes[id].parent {
                parent[i] = index_of[p];
            }
        }
        let mut height = 0;
        for i in (1..=n).rev() {
            depth[i] = if parent[i] == 0 { 1 } else { depth[parent[i]] + 1 };
            height = height.max(depth[i]);
        }
        let mut seen = vec![false; n + 1];
        let mut keyroots = Vec::new();
        for i in (1..=n).rev() {
            if !seen[lml[i]] {
                seen[lml[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.reverse();
        let mut pre_rank = vec![0usize; n + 1];
        for (r, id) in tree.preorder().into_iter().enumerate() {
            pre_rank[index_of[id]] = r;
        }
        let leaves = (1..=n).filter(|&i| children[i].is_empty()).count();
        let max_degree = children.iter().map(Vec::len).max().unwrap_or(0);
        IndexedTree {
            tree,
            arena,
            labels,
            lml,
            parent,
            children,
            keyroots,
            pre_rank,
            leaves,
            height,
            max_degree,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn root(&self) -> usize {
        self.len()
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    /// Leftmost leaf descendant of `i`.
    pub fn lml(&self, i: usize) -> usize {
        self.lml[i]
    }

    /// Parent of `i`; 0 for the root.
    pub fn parent(&self, i: usize) -> usize {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn keyroots(&self) -> &[usize] {
        &self.keyroots
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Position of `i` in a preorder traversal, from 0.
    pub fn preorder_rank(&self, i: usize) -> usize {
        self.pre_rank[i]
    }

    pub fn arena_id(&self, i: usize) -> usize {
        self.arena[i]
    }

    pub fn tree(&self) -> &LabeledTree {
        &self.tree
    }

    pub fn origin(&self, i: usize) -> &Origin {
        &self.tree.nodes[self.arena[i]].origin
    }

    /// True when `a` is a proper ancestor of `d`.
    pub fn is_ancestor(&self, a: usize, d: usize) -> bool {
        d < a && self.lml[a] <= d
    }
}

fn dot_shape(kind: Kind) -> &'static str {
    match kind {
        Kind::Bulge => "triangle",
        Kind::Internal => "diamond",
        Kind::Hairpin => "box",
        Kind::Multiloop => "circle",
        Kind::Exterior | Kind::Root => "doublecircle",
        _ => "ellipse",
    }
}

/// Fill colours cycled over colour ids.
const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

/// One tree to draw: a name prefix for node ids, the tree, and an optional
/// colour per arena node.
pub struct DotTree<'a> {
    pub name: &'a str,
    pub tree: &'a LabeledTree,
    pub colors: Option<&'a [Option<u32>]>,
}

/// A node in a multi-tree drawing: `(tree, arena node)`.
pub type DotNode = (usize, usize);

/// Renders trees side by side. `links` join node pairs with dashed edges
/// (used for mappings).
pub fn to_dot(trees: &[DotTree<'_>], links: &[(DotNode, DotNode)]) -> String {
    let mut out = String::from("digraph rnatreedit {\n  node [style=filled, fillcolor=white];\n");
    for (t, dt) in trees.iter().enumerate() {
        let _ = writeln!(
            out,
            "  subgraph cluster_{t} {{\n    label=\"{}\";",
            dt.name.replace('"', "'")
        );
        for (id, node) in dt.tree.nodes.iter().enumerate() {
            let fill = dt
                .colors
                .and_then(|c| c.get(id).copied().flatten())
                .map_or("white", |c| PALETTE[c as usize % PALETTE.len()]);
            let style = if dt.colors.is_some() && fill == "white" {
                ", style=\"dashed\""
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    t{t}_{id} [label=\"{}\", shape={}, fillcolor=\"{fill}\"{style}];",
                node.label,
                dot_shape(node.label.kind)
            );
        }
        for (id, node) in dt.tree.nodes.iter().enumerate() {
            for &c in &node.children {
                match dt.tree.nodes[c].label.edge {
                    Some(e) => {
                        let _ = writeln!(out, "    t{t}_{id} -> t{t}_{c} [label=\"{e}\"];");
                    }
                    None => {
                        let _ = writeln!(out, "    t{t}_{id} -> t{t}_{c};");
                    }
                }
            }
        }
        out.push_str("  }\n");
    }
    for ((ta, a), (tb, b)) in links {
        let _ = writeln!(
            out,
            "  t{ta}_{a} -> t{tb}_{b} [style=dashed, dir=none, constraint=false, color=gray40];"
        );
    }
    out.push_str("}\n");
    out
}
