mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rnatreedit::edit::classical;
use rnatreedit::fusion::{fusion_distance, FusionParams};
use rnatreedit::model::{structural_model, unit_model, CostModel};
use rnatreedit::replay::replay;

use common::{loop_labels, random_indexed, symbols};

fn check_pairs(model: &dyn CostModel, labels: &[rnatreedit::tree::Label], seed: u64, runs: usize, max_nodes: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for run in 0..runs {
        let a = random_indexed(&mut rng, max_nodes, 3, labels);
        let b = random_indexed(&mut rng, max_nodes, 3, labels);
        let (d, script, mapping) = classical(&a, &b, model);
        replay(&a, &b, model, &script, d, Some(&mapping))
            .unwrap_or_else(|e| panic!("run {run} classical {} -> {}: {e}", a.tree(), b.tree()));
        for params in [FusionParams::new(1), FusionParams::new(2), FusionParams::unpruned(2)] {
            let (d, script, mapping) = fusion_distance(&a, &b, model, &params).unwrap();
            replay(&a, &b, model, &script, d, Some(&mapping))
                .unwrap_or_else(|e| panic!("run {run} {params:?} {} -> {}: {e}\n{script:#?}", a.tree(), b.tree()));
        }
    }
}

#[test]
fn structural_scripts_replay() {
    check_pairs(&structural_model(0.05).unwrap(), &loop_labels(), 1, 300, 8);
}

#[test]
fn structural_scripts_replay_without_premium() {
    check_pairs(&structural_model(0.0).unwrap(), &loop_labels(), 2, 300, 8);
}

#[test]
fn unit_scripts_replay() {
    check_pairs(&unit_model(0.1).unwrap(), &symbols(), 3, 300, 8);
}
