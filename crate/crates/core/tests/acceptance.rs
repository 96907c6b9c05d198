//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rnatreedit::cost::Cost;
use rnatreedit::edit::{classical, zs_distance, EditOp};
use rnatreedit::error::ParseError;
use rnatreedit::fusion::{fusion_distance, fusion_dp, FusionParams};
use rnatreedit::generate::{all_trees, random_structure, random_tree};
use rnatreedit::model::{structural_model, unit_model, CostModel};
use rnatreedit::multilevel::{multilevel, MultilevelParams};
use rnatreedit::oracle::{mapping_oracle, FusionOracle, SearchBudget};
use rnatreedit::replay::replay;
use rnatreedit::structure::{parse_ct, parse_dotbracket, PairingPolicy, SecondaryStructure};
use rnatreedit::tree::{build_rep_b, parse_tree, IndexedTree, Kind, Label, LabeledTree};

use common::{loop_labels, random_indexed, symbols};

/// Slack allowed on triangle sums, in cost units of 1e-9.
const TRIANGLE_SLACK_UNITS: i64 = 1;
const PERF_L1_LIMIT: Duration = Duration::from_secs(2);
const PERF_L2_LIMIT: Duration = Duration::from_secs(60);
const MEMORY_LIMIT_KB: u64 = 1 << 20;

type Outcome = Result<String, String>;

fn fixture(text: &str) -> IndexedTree {
    IndexedTree::new(parse_tree(text).expect("fixture parses"))
}

/// Long helix split by an internal loop, against the unbroken helix.
fn helix_split() -> (IndexedTree, IndexedTree) {
    (fixture("E:0/0(I:2/2@7(H:3@5))"), fixture("E:0/0(H:3@13)"))
}

/// Short helix and bulge in front of an internal loop, against a single
/// wider internal loop.
fn small_helix() -> (IndexedTree, IndexedTree) {
    (
        fixture("E:0/0(B:2@6(I:2/2@1(H:4@6)))"),
        fixture("E:0/0(I:3/4@6(H:4@6))"),
    )
}

fn structural_pair_labels() -> Vec<Label> {
    vec![
        Label::new(Kind::Internal, [1]).with_edge(2),
        Label::new(Kind::Hairpin, [3]).with_edge(4),
    ]
}

fn classical_oracle_equivalence() -> Outcome {
    let unit = unit_model(0.1).unwrap();
    let trees = all_trees(5, &symbols());
    let mut pairs = 0usize;
    for a in &trees {
        let ia = IndexedTree::new(a.clone());
        for b in &trees {
            let dp = zs_distance(&ia, &IndexedTree::new(b.clone()), &unit).0;
            let want = mapping_oracle(a, b, &unit).map_err(|e| e.to_string())?;
            if dp != want {
                return Err(format!("{a} vs {b}: dp {dp}, oracle {want}"));
            }
            pairs += 1;
        }
    }
    let structural = structural_model(0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (m, labels) in [(&unit as &dyn CostModel, symbols()), (&structural, loop_labels())] {
        for _ in 0..200 {
            let a = random_indexed(&mut rng, 8, 3, &labels);
            let b = random_indexed(&mut rng, 8, 3, &labels);
            let dp = zs_distance(&a, &b, m).0;
            let want = mapping_oracle(a.tree(), b.tree(), m).map_err(|e| e.to_string())?;
            if dp != want {
                return Err(format!("{} vs {}: dp {dp}, oracle {want}", a.tree(), b.tree()));
            }
        }
    }
    Ok(format!("{pairs} exhaustive pairs and 400 random pairs agree exactly"))
}

/// Criteria 2 and 5 share the exhaustive suite.
fn fusion_oracle_suite() -> (Outcome, Outcome) {
    let trees: Vec<(LabeledTree, IndexedTree)> = all_trees(5, &structural_pair_labels())
        .into_iter()
        .map(|t| (t.clone(), IndexedTree::new(t)))
        .collect();
    let mut compared = 0usize;
    let mut oracle_failure = None;
    let mut prune_failure = None;
    for t in [0.0, 0.05, 0.2] {
        let m = structural_model(t).unwrap();
        for l in [1, 2] {
            let mut oracle = FusionOracle::new(
                &m,
                SearchBudget {
                    l,
                    prune: false,
                    ..SearchBudget::default()
                },
            );
            for (a, ia) in &trees {
                for (b, ib) in &trees {
                    let pruned = fusion_dp(ia, ib, &m, &FusionParams { l, prune: true }).unwrap().0;
                    let unpruned = fusion_dp(ia, ib, &m, &FusionParams { l, prune: false }).unwrap().0;
                    let want = oracle.distance(a, b).unwrap();
                    if pruned != want && oracle_failure.is_none() {
                        oracle_failure = Some(format!("t={t} l={l} {a} vs {b}: dp {pruned}, oracle {want}"));
                    }
                    if pruned != unpruned && prune_failure.is_none() {
                        prune_failure = Some(format!("t={t} l={l} {a} vs {b}: pruned {pruned}, unpruned {unpruned}"));
                    }
                    compared += 1;
                }
            }
        }
    }
    let ok = |f: Option<String>, what: &str| match f {
        None => Ok(format!(
            "{compared} pairs over t in {{0, 0.05, 0.2}} and l in {{1, 2}}: {what}"
        )),
        Some(e) => Err(e),
    };
    (
        ok(oracle_failure, "dp equals search oracle"),
        ok(prune_failure, "pruned equals unpruned"),
    )
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let unit = unit_model(0.1).unwrap();
    let structural = structural_model(0.05).unwrap();
    for (m, labels) in [(&unit as &dyn CostModel, symbols()), (&structural, loop_labels())] {
        for l in [1, 2] {
            let p = FusionParams::new(l);
            let d = |a: &IndexedTree, b: &IndexedTree| fusion_distance(a, b, m, &p).unwrap().0;
            for _ in 0..200 {
                let a = random_indexed(&mut rng, 10, 3, &labels);
                let b = random_indexed(&mut rng, 10, 3, &labels);
                let (ab, ba) = (d(&a, &b), d(&b, &a));
                if ab < Cost::ZERO || ab != ba {
                    return Err(format!("{} l={l}: {} vs {}: {ab} / {ba}", m.echo(), a.tree(), b.tree()));
                }
                if d(&a, &a) != Cost::ZERO || ((ab == Cost::ZERO) != a.tree().same_shape_and_labels(b.tree())) {
                    return Err(format!(
                        "{} l={l}: identity fails on {} vs {}",
                        m.echo(),
                        a.tree(),
                        b.tree()
                    ));
                }
            }
            for _ in 0..200 {
                let x = random_indexed(&mut rng, 8, 3, &labels);
                let y = random_indexed(&mut rng, 8, 3, &labels);
                let z = random_indexed(&mut rng, 8, 3, &labels);
                let (xz, xy, yz) = (d(&x, &z), d(&x, &y), d(&y, &z));
                if xz.units() > (xy + yz).units() + TRIANGLE_SLACK_UNITS {
                    return Err(format!(
                        "{} l={l}: d({}, {}) = {xz} > {xy} + {yz} via {}",
                        m.echo(),
                        x.tree(),
                        z.tree(),
                        y.tree()
                    ));
                }
            }
        }
    }
    Ok("unit and structural models, l in {1, 2}: 200 pairs and 200 triples each".into())
}

fn reduction_and_dominance() -> Outcome {
    let m = structural_model(0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let a = random_indexed(&mut rng, 14, 4, &loop_labels());
        let b = random_indexed(&mut rng, 14, 4, &loop_labels());
        let plain = zs_distance(&a, &b, &m).0;
        if fusion_distance(&a, &b, &m, &FusionParams::new(0)).unwrap().0 != plain {
            return Err(format!(
                "l=0 differs from the classical distance on {} vs {}",
                a.tree(),
                b.tree()
            ));
        }
        for l in [1, 2] {
            let fused = fusion_distance(&a, &b, &m, &FusionParams::new(l)).unwrap().0;
            if fused > plain {
                return Err(format!("l={l}: {fused} > {plain} on {} vs {}", a.tree(), b.tree()));
            }
        }
    }
    let mut detail = Vec::new();
    for (name, (a, b)) in [("helix-split", helix_split()), ("small-helix", small_helix())] {
        let plain = zs_distance(&a, &b, &m).0;
        for l in [1, 2] {
            let fused = fusion_distance(&a, &b, &m, &FusionParams::new(l)).unwrap().0;
            if fused >= plain {
                return Err(format!("{name} l={l}: fused {fused} is not below classical {plain}"));
            }
            detail.push(format!("{name} l={l} {fused} < {plain}"));
        }
    }
    Ok(format!("500 random pairs; {}", detail.join(", ")))
}

fn t_behaviour() -> Outcome {
    let (a, b) = helix_split();
    let p = FusionParams::new(1);
    let mut last = Cost::ZERO;
    let mut uses = Vec::new();
    for k in 0..20 {
        let t = k as f64 * 0.05;
        let m = structural_model(t).unwrap();
        let (d, script, _) = fusion_distance(&a, &b, &m, &p).unwrap();
        if d < last {
            return Err(format!("distance drops from {last} to {d} at t={t}"));
        }
        last = d;
        uses.push((t, script.ops.iter().any(|op| matches!(op, EditOp::EdgeFusion { .. }))));
    }
    let switch = uses.iter().position(|&(_, used)| !used);
    match switch {
        Some(k) if k > 0 && uses[k..].iter().all(|&(_, used)| !used) => Ok(format!(
            "edge fusion used for t <= {:.2}, absent from t = {:.2}; distance non-decreasing over 20 points",
            uses[k - 1].0,
            uses[k].0
        )),
        _ => Err(format!("edge fusion pattern over the sweep: {uses:?}")),
    }
}

fn peak_memory_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn performance() -> Outcome {
    let m = structural_model(0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pair = |n: usize| {
        let a = IndexedTree::new(random_tree(&mut rng, n, 4, &loop_labels()));
        let b = IndexedTree::new(random_tree(&mut rng, n, 4, &loop_labels()));
        (a, b)
    };
    let (a, b) = pair(80);
    let started = Instant::now();
    fusion_dp(&a, &b, &m, &FusionParams::new(1)).unwrap();
    let l1 = started.elapsed();
    let (a, b) = pair(40);
    let started = Instant::now();
    fusion_dp(&a, &b, &m, &FusionParams::new(2)).unwrap();
    let l2 = started.elapsed();
    let memory = peak_memory_kb();
    let detail = format!(
        "l=1 on 80 nodes {:.3} s (limit {:?}), l=2 on 40 nodes {:.3} s (limit {:?}), peak memory {} MB",
        l1.as_secs_f64(),
        PERF_L1_LIMIT,
        l2.as_secs_f64(),
        PERF_L2_LIMIT,
        memory.map_or("unknown".to_string(), |kb| (kb / 1024).to_string())
    );
    if l1 < PERF_L1_LIMIT && l2 < PERF_L2_LIMIT && memory.is_none_or(|kb| kb < MEMORY_LIMIT_KB) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn script_replay() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let models: Vec<(Box<dyn CostModel>, Vec<Label>)> = vec![
        (Box::new(unit_model(0.1).unwrap()), symbols()),
        (Box::new(structural_model(0.05).unwrap()), loop_labels()),
        (Box::new(structural_model(0.0).unwrap()), loop_labels()),
    ];
    let mut runs = 0usize;
    for (m, labels) in &models {
        let m = m.as_ref();
        let mut pairs = vec![helix_split(), small_helix()];
        for _ in 0..120 {
            pairs.push((
                random_indexed(&mut rng, 12, 4, labels),
                random_indexed(&mut rng, 12, 4, labels),
            ));
        }
        for (a, b) in &pairs {
            for l in [0, 1, 2] {
                let (d, script, mapping) = if l == 0 {
                    classical(a, b, m)
                } else {
                    fusion_distance(a, b, m, &FusionParams::new(l)).unwrap()
                };
                let replayed = replay(a, b, m, &script, d, Some(&mapping))
                    .map_err(|e| format!("{} l={l}: {} vs {}: {e}", m.echo(), a.tree(), b.tree()))?;
                if replayed != d {
                    return Err(format!("{} l={l}: replayed {replayed} != {d}", m.echo()));
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs replayed to the target with exact cost"))
}

fn record(name: &str, db: &str) -> SecondaryStructure {
    let mut seq = vec![b'A'; db.len()];
    let mut open = Vec::new();
    for (i, c) in db.bytes().enumerate() {
        match c {
            b'(' => open.push(i),
            b')' => {
                let j = open.pop().unwrap();
                seq[j] = b'G';
                seq[i] = b'C';
            }
            _ => {}
        }
    }
    let text = format!(">{name}\n{}\n{db}\n", String::from_utf8(seq).unwrap());
    parse_dotbracket(&text, PairingPolicy::Strict).unwrap()
}

fn multilevel_restriction() -> Outcome {
    // Two short hairpins against one long hairpin: the coarse pass pairs the
    // long hairpin with one of them, leaving the other loop divergent.
    let a = record("a", "(((...))).(((...)))");
    let b = record("b", "((((((........))))))");
    let a_loops = [3..6, 13..16];
    let b_loop = 6..14;

    let m = structural_model(0.05).unwrap();
    let r = multilevel(&a, &b, &m, &MultilevelParams::default()).map_err(|e| e.to_string())?;
    let colors = &r.coarse.colors;
    let Some(divergent) = a_loops
        .iter()
        .find(|range| colors.a[range.start] != colors.b[b_loop.start])
    else {
        return Err("the coarse pass gave both hairpins of the first structure the colour of the second".into());
    };
    let (fa, fb) = (&r.fine_a, &r.fine_b);
    let crossing = r
        .fine
        .mapping
        .iter()
        .filter(|p| fa.colors[p.t].is_none() || fa.colors[p.t] != fb.colors[p.t2])
        .count();
    let touches = |t: &IndexedTree, i: usize, range: &std::ops::Range<usize>| {
        t.origin(i).bases.iter().any(|base| range.contains(base))
    };
    let shared = |mapping: &rnatreedit::edit::Mapping, ta: &IndexedTree, tb: &IndexedTree| {
        mapping
            .iter()
            .filter(|p| touches(ta, p.t, divergent) && touches(tb, p.t2, &b_loop))
            .count()
    };
    let restricted = shared(&r.fine.mapping, &fa.tree, &fb.tree);

    let (ua, ub) = (IndexedTree::new(build_rep_b(&a)), IndexedTree::new(build_rep_b(&b)));
    let (unrestricted, _, free_mapping) = classical(&ua, &ub, &m);
    let scattered = shared(&free_mapping, &ua, &ub);
    let detail = format!(
        "{crossing} cross-colour pairs, {restricted} pairs between the divergent loops (unrestricted: {scattered}), \
         fine {} >= unrestricted {}",
        r.fine.distance, unrestricted
    );
    if crossing == 0 && restricted == 0 && scattered > 0 && r.fine.distance >= unrestricted {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ct_text(seq: &str, partners: &[usize]) -> String {
    let n = seq.len();
    let mut out = format!("{n} knot\n");
    for (i, base) in seq.chars().enumerate() {
        out += &format!(
            "{} {base} {} {} {} {}\n",
            i + 1,
            i,
            (i + 2) % (n + 1),
            partners[i],
            i + 1
        );
    }
    out
}

fn parsing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 0..50 {
        let n = 10 + k * 3;
        let s = random_structure(&mut rng, n, &format!("s{k}"));
        let from_ct = parse_ct(&s.to_ct(), PairingPolicy::Permissive).map_err(|e| format!("s{k}: {e}"))?;
        let from_db =
            parse_dotbracket(&s.to_dotbracket(), PairingPolicy::Permissive).map_err(|e| format!("s{k}: {e}"))?;
        if from_ct != from_db || from_ct != s {
            return Err(format!("s{k}: CT and dot-bracket records disagree"));
        }
    }
    let mut rejected = 0;
    for n in 8..=24 {
        // Pairs (1, n-2) and (3, n) cross.
        let mut partners = vec![0; n];
        for (i, j) in [(1, n - 2), (3, n)] {
            partners[i - 1] = j;
            partners[j - 1] = i;
        }
        let seq: String = (1..=n)
            .map(|i| {
                if partners[i - 1] == 0 {
                    'A'
                } else if partners[i - 1] > i {
                    'G'
                } else {
                    'C'
                }
            })
            .collect();
        match parse_ct(&ct_text(&seq, &partners), PairingPolicy::Permissive) {
            Err(ParseError::PseudoknotDetected { .. }) => rejected += 1,
            other => return Err(format!("{n}-base knot: expected PseudoknotDetected, got {other:?}")),
        }
    }
    Ok(format!(
        "50 structures identical across formats; {rejected} pseudoknotted CT records rejected"
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, started: Instant, outcome: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name} ({secs:.1} s): {detail}");
            }
        }
    };
    let started = Instant::now();
    report(
        1,
        "classical oracle equivalence",
        started,
        classical_oracle_equivalence(),
    );
    let started = Instant::now();
    let (fusion, pruning) = fusion_oracle_suite();
    report(2, "fusion oracle equivalence", started, fusion);
    let started = Instant::now();
    report(3, "metric axioms", started, metric_axioms());
    let started = Instant::now();
    report(4, "reduction and dominance", started, reduction_and_dominance());
    report(5, "pruning soundness", Instant::now(), pruning);
    let started = Instant::now();
    report(6, "t behaviour", started, t_behaviour());
    let started = Instant::now();
    report(7, "performance", started, performance());
    let started = Instant::now();
    report(8, "script replay", started, script_replay());
    let started = Instant::now();
    report(9, "multilevel colour restriction", started, multilevel_restriction());
    let started = Instant::now();
    report(10, "parsing", started, parsing());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
