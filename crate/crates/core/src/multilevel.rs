//! Two-pass comparison: a coarse comparison with fusions colours the
//! structural elements, then the per-base trees are compared with matches
//! allowed only between nodes of the same colour.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::cost::Cost;
use crate::edit::{extract_script, zs_distance_with, EditScript, Mapping, ModelCosts, PairCosts};
use crate::error::DistanceError;
use crate::fusion::{extract_fusion_script, fusion_dp, FusionParams};
use crate::model::CostModel;
use crate::structure::{decompose, SecondaryStructure};
use crate::tree::{build_rep_b, build_rep_c, build_rep_d, IndexedTree};

static PASS_IDS: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoarseRep {
    #[default]
    RepC,
    RepD,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MultilevelParams {
    pub coarse: CoarseRep,
    pub fusion: FusionParams,
}

/// Colours from one coarse pass. `None` marks deleted or inserted elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorAssignment {
    /// Colour per base of the first structure.
    pub a: Vec<Option<u32>>,
    /// Colour per base of the second structure.
    pub b: Vec<Option<u32>>,
    /// Colour per coarse node (1-based postorder; slot 0 unused).
    pub a_nodes: Vec<Option<u32>>,
    pub b_nodes: Vec<Option<u32>>,
    /// Colour shared by the two roots, when they are matched.
    pub root: Option<u32>,
    pub count: u32,
    #[serde(skip)]
    pass: u64,
}

pub struct CoarseResult {
    pub tree_a: IndexedTree,
    pub tree_b: IndexedTree,
    pub distance: Cost,
    pub script: EditScript,
    pub mapping: Mapping,
    pub colors: ColorAssignment,
}

fn coarse_tree(s: &SecondaryStructure, rep: CoarseRep) -> IndexedTree {
    let graph = decompose(s);
    IndexedTree::new(match rep {
        CoarseRep::RepC => build_rep_c(&graph),
        CoarseRep::RepD => build_rep_d(&graph),
    })
}

/// Compares the coarse trees with fusions and colours elements by the
/// resulting mapping. A fused group receives one colour.
pub fn coarse_pass(
    a: &SecondaryStructure,
    b: &SecondaryStructure,
    rep: CoarseRep,
    m: &dyn CostModel,
    p: &FusionParams,
) -> Result<CoarseResult, DistanceError> {
    let (tree_a, tree_b) = (coarse_tree(a, rep), coarse_tree(b, rep));
    let (distance, state) = fusion_dp(&tree_a, &tree_b, m, p)?;
    let (script, mapping) = extract_fusion_script(&tree_a, &tree_b, &state);
    let mut colors = ColorAssignment {
        a: vec![None; a.len()],
        b: vec![None; b.len()],
        a_nodes: vec![None; tree_a.len() + 1],
        b_nodes: vec![None; tree_b.len() + 1],
        root: None,
        count: mapping.len() as u32,
        pass: PASS_IDS.fetch_add(1, Ordering::Relaxed),
    };
    for (color, pair) in mapping.iter().enumerate() {
        let color = color as u32;
        for (tree, group, nodes, bases) in [
            (&tree_a, &pair.t_group, &mut colors.a_nodes, &mut colors.a),
            (&tree_b, &pair.t2_group, &mut colors.b_nodes, &mut colors.b),
        ] {
            for &n in group {
                nodes[n] = Some(color);
                for &base in &tree.origin(n).bases {
                    bases[base] = Some(color);
                }
            }
        }
        if pair.t == tree_a.root() && pair.t2 == tree_b.root() {
            colors.root = Some(color);
        }
    }
    Ok(CoarseResult {
        tree_a,
        tree_b,
        distance,
        script,
        mapping,
        colors,
    })
}

/// Per-base tree whose nodes carry the colour of their element.
#[derive(Clone, Debug)]
pub struct ColoredRepB {
    pub tree: IndexedTree,
    /// Colour per node (1-based postorder; slot 0 unused).
    pub colors: Vec<Option<u32>>,
    pass: u64,
}

/// Colours the Rep-B tree of `s` with `base_colors`; the synthetic root takes
/// the root colour.
pub fn color_rep_b(s: &SecondaryStructure, base_colors: &[Option<u32>], colors: &ColorAssignment) -> ColoredRepB {
    let tree = IndexedTree::new(build_rep_b(s));
    let mut out = vec![None; tree.len() + 1];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = match tree.origin(i).bases.first() {
            Some(&base) => base_colors[base],
            None => colors.root,
        };
    }
    ColoredRepB {
        tree,
        colors: out,
        pass: colors.pass,
    }
}

pub struct FineResult {
    pub distance: Cost,
    pub script: EditScript,
    pub mapping: Mapping,
}

/// Classical distance between coloured Rep-B trees where nodes of different
/// colours, or without colour, cannot be matched.
pub fn fine_pass(a: &ColoredRepB, b: &ColoredRepB, m: &dyn CostModel) -> Result<FineResult, DistanceError> {
    if a.pass != b.pass {
        return Err(DistanceError::ColorSetMismatch);
    }
    let mut costs = ModelCosts::new(&a.tree, &b.tree, m);
    // Dearer than deleting everything and inserting everything.
    let forbidden = Cost::ONE + costs.total_delete() + costs.total_insert();
    costs.override_relabel(|i, j, c| match (a.colors[i], b.colors[j]) {
        (Some(x), Some(y)) if x == y => c,
        _ => forbidden,
    });
    let (distance, tables) = zs_distance_with(&a.tree, &b.tree, &costs);
    let (script, mapping) = extract_script(&a.tree, &b.tree, &costs, &tables);
    if mapping.iter().any(|p| costs.relabel(p.t, p.t2) == forbidden) {
        return Err(DistanceError::MalformedIndex(
            "fine mapping matched nodes of different colours".into(),
        ));
    }
    Ok(FineResult {
        distance,
        script,
        mapping,
    })
}

pub struct MultilevelResult {
    pub coarse: CoarseResult,
    pub fine_a: ColoredRepB,
    pub fine_b: ColoredRepB,
    pub fine: FineResult,
}

pub fn multilevel(
    a: &SecondaryStructure,
    b: &SecondaryStructure,
    m: &dyn CostModel,
    p: &MultilevelParams,
) -> Result<MultilevelResult, DistanceError> {
    let coarse = coarse_pass(a, b, p.coarse, m, &p.fusion)?;
    let fine_a = color_rep_b(a, &coarse.colors.a, &coarse.colors);
    let fine_b = color_rep_b(b, &coarse.colors.b, &coarse.colors);
    let fine = fine_pass(&fine_a, &fine_b, m)?;
    Ok(MultilevelResult {
        coarse,
        fine_a,
        fine_b,
        fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::structural_model;
    use crate::structure::{parse_dotbracket, PairingPolicy};

    fn s(seq: &str, st: &str) -> SecondaryStructure {
        parse_dotbracket(&format!("{seq}\n{st}\n"), PairingPolicy::Permissive).unwrap()
    }

    #[test]
    fn identical_structures_color_everything() {
        let m = structural_model(0.05).unwrap();
        let x = s("GGGAAACCCAGGAAACC", "(((...))).((...))");
        let r = multilevel(&x, &x, &m, &MultilevelParams::default()).unwrap();
        assert!(r.coarse.colors.a.iter().all(Option::is_some));
        assert_eq!(r.coarse.colors.a, r.coarse.colors.b);
        assert_eq!(r.fine.distance, Cost::ZERO);
        assert_eq!(r.fine.mapping.len(), r.fine_a.tree.len());
    }

    #[test]
    fn empty_structures_share_the_root_color() {
        let m = structural_model(0.05).unwrap();
        let e = SecondaryStructure::new("e", "", [], PairingPolicy::Permissive).unwrap();
        let r = coarse_pass(&e, &e, CoarseRep::RepC, &m, &FusionParams::default()).unwrap();
        assert_eq!(r.colors.count, 1);
        assert_eq!(r.colors.root, Some(0));
    }

    #[test]
    fn colorings_from_different_passes_are_rejected() {
        let m = structural_model(0.05).unwrap();
        let x = s("GGGAAACCC", "(((...)))");
        let one = coarse_pass(&x, &x, CoarseRep::RepC, &m, &FusionParams::default()).unwrap();
        let two = coarse_pass(&x, &x, CoarseRep::RepC, &m, &FusionParams::default()).unwrap();
        let a = color_rep_b(&x, &one.colors.a, &one.colors);
        let b = color_rep_b(&x, &two.colors.b, &two.colors);
        assert!(matches!(fine_pass(&a, &b, &m), Err(DistanceError::ColorSetMismatch)));
    }
}
