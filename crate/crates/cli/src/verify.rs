use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use rnatreedit::cost::Cost;
use rnatreedit::edit::zs_distance;
use rnatreedit::fusion::{fusion_distance, FusionParams};
use rnatreedit::generate::{all_trees, random_tree};
use rnatreedit::model::{sample_labels, validate, CostModel, Model, ModelKind};
use rnatreedit::oracle::{mapping_oracle, FusionOracle, SearchBudget, MAX_ORACLE_NODES};
use rnatreedit::replay::replay;
use rnatreedit::tree::{IndexedTree, Kind, Label, LabeledTree};

use crate::commands::{emit, fusion_params, load_model};
use crate::{Failure, Format, Injection, VerifyArgs};

/// Wraps a model and overcharges insertions, breaking symmetry.
struct AsymmetricInsert(Model);

impl CostModel for AsymmetricInsert {
    fn relabel(&self, a: &Label, b: &Label) -> Cost {
        self.0.relabel(a, b)
    }
    fn delete(&self, a: &Label) -> Cost {
        self.0.delete(a)
    }
    fn insert(&self, a: &Label) -> Cost {
        self.0.delete(a) + Cost::ONE
    }
    fn merge_node(&self, u: &Label, v: &Label) -> Label {
        self.0.merge_node(u, v)
    }
    fn merge_edge(&self, u: &Label, v: &Label) -> Label {
        self.0.merge_edge(u, v)
    }
    fn node_fusion(&self, u: &Label, v: &Label) -> Cost {
        self.0.node_fusion(u, v)
    }
    fn edge_fusion(&self, u: &Label, v: &Label) -> Cost {
        self.0.edge_fusion(u, v)
    }
    fn t(&self) -> Cost {
        self.0.t()
    }
    fn echo(&self) -> String {
        format!("{} inject=asymmetric-insert", self.0.echo())
    }
}

#[derive(Serialize)]
struct Section {
    name: String,
    cases: usize,
    failures: usize,
    counterexample: Option<String>,
}

impl Section {
    fn new(name: impl Into<String>) -> Section {
        Section {
            name: name.into(),
            cases: 0,
            failures: 0,
            counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, dump: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(dump());
            }
        }
    }
}

#[derive(Serialize)]
struct Summary {
    model: String,
    l: usize,
    prune: bool,
    seed: u64,
    model_checks: rnatreedit::model::ValidityReport,
    sections: Vec<Section>,
}

fn labels_for(m: &Model) -> Vec<Label> {
    match m.config().kind {
        ModelKind::Unit => vec![Label::symbol('a'), Label::symbol('b')],
        ModelKind::Structural => vec![
            Label::new(Kind::Internal, [1]).with_edge(2),
            Label::new(Kind::Hairpin, [3]).with_edge(4),
        ],
    }
}

fn pair_dump(a: &LabeledTree, b: &LabeledTree, got: Cost, want: Cost) -> String {
    format!("T1 = {a}\nT2 = {b}\nalgorithm = {got}\noracle = {want}")
}

/// Compares the DP against both oracles on one pair and replays the
/// fused script.
fn check_pair(
    a: &LabeledTree,
    b: &LabeledTree,
    m: &dyn CostModel,
    p: &FusionParams,
    oracle: &mut FusionOracle<'_>,
    [classical, fused, replays]: &mut [Section; 3],
) -> Result<(), Failure> {
    let (ia, ib) = (IndexedTree::new(a.clone()), IndexedTree::new(b.clone()));
    let oracle_err = |e: rnatreedit::DistanceError| Failure::Internal(e.to_string());
    let got = zs_distance(&ia, &ib, m).0;
    let want = mapping_oracle(a, b, m).map_err(oracle_err)?;
    classical.record(got == want, || pair_dump(a, b, got, want));
    if p.l == 0 {
        return Ok(());
    }
    let (d, script, mapping) = fusion_distance(&ia, &ib, m, p).map_err(|e| Failure::Config(e.to_string()))?;
    let want = oracle.distance(a, b).map_err(oracle_err)?;
    fused.record(d == want, || pair_dump(a, b, d, want));
    let r = replay(&ia, &ib, m, &script, d, Some(&mapping));
    replays.record(r.is_ok(), || format!("T1 = {a}\nT2 = {b}\nreplay: {}", r.unwrap_err()));
    Ok(())
}

fn fused(a: &LabeledTree, b: &LabeledTree, m: &dyn CostModel, p: &FusionParams) -> Result<Cost, Failure> {
    let (ia, ib) = (IndexedTree::new(a.clone()), IndexedTree::new(b.clone()));
    if p.l == 0 {
        return Ok(zs_distance(&ia, &ib, m).0);
    }
    fusion_distance(&ia, &ib, m, p)
        .map(|r| r.0)
        .map_err(|e| Failure::Config(e.to_string()))
}

pub fn run(args: &VerifyArgs) -> Result<(), Failure> {
    if args.max_nodes > MAX_ORACLE_NODES || args.exhaustive_nodes > MAX_ORACLE_NODES {
        return Err(Failure::Config(format!(
            "the oracles accept at most {MAX_ORACLE_NODES} nodes per tree"
        )));
    }
    if args.max_nodes == 0 {
        return Err(Failure::Config("--max-nodes must be at least 1".into()));
    }
    let base = load_model(&args.model)?;
    let p = fusion_params(&args.fusion)?;
    let labels = labels_for(&base);
    let m: Box<dyn CostModel> = match args.inject {
        None => Box::new(base),
        Some(Injection::AsymmetricInsert) => Box::new(AsymmetricInsert(base)),
    };
    let m = m.as_ref();
    let budget = SearchBudget {
        l: p.l,
        prune: p.prune,
        ..SearchBudget::default()
    };
    let mut oracle = FusionOracle::new(m, budget);
    let mut rng = StdRng::seed_from_u64(args.seed);

    let model_checks = validate(m, &sample_labels());
    let mut pairs = [
        Section::new("classical vs mapping oracle"),
        Section::new(format!("fusion l={} vs search oracle", p.l)),
        Section::new("script replay"),
    ];

    let small = all_trees(args.exhaustive_nodes, &labels);
    log::info!("exhaustive pass over {} trees", small.len());
    for a in &small {
        for b in &small {
            check_pair(a, b, m, &p, &mut oracle, &mut pairs)?;
        }
    }
    let random = |rng: &mut StdRng| {
        let n = rng.gen_range(1..=args.max_nodes);
        random_tree(rng, n, 3, &labels)
    };
    for _ in 0..args.samples {
        let (a, b) = (random(&mut rng), random(&mut rng));
        check_pair(&a, &b, m, &p, &mut oracle, &mut pairs)?;
    }

    let mut identity = Section::new("identity");
    let mut symmetry = Section::new("symmetry");
    let mut triangle = Section::new("triangle inequality");
    for _ in 0..args.samples {
        let (x, y, z) = (random(&mut rng), random(&mut rng), random(&mut rng));
        let dxx = fused(&x, &x, m, &p)?;
        identity.record(dxx == Cost::ZERO, || format!("T = {x}\nd(T, T) = {dxx}"));
        let (dxy, dyx) = (fused(&x, &y, m, &p)?, fused(&y, &x, m, &p)?);
        symmetry.record(dxy == dyx, || {
            format!("T1 = {x}\nT2 = {y}\nd(T1, T2) = {dxy}\nd(T2, T1) = {dyx}")
        });
        let (dyz, dxz) = (fused(&y, &z, m, &p)?, fused(&x, &z, m, &p)?);
        triangle.record(dxz <= dxy + dyz, || {
            format!("T1 = {x}\nT2 = {y}\nT3 = {z}\nd(T1, T3) = {dxz} > {dxy} + {dyz}")
        });
    }

    let summary = Summary {
        model: m.echo(),
        l: p.l,
        prune: p.prune,
        seed: args.seed,
        model_checks,
        sections: pairs.into_iter().chain([identity, symmetry, triangle]).collect(),
    };
    let failed = !summary.model_checks.all_passed() || summary.sections.iter().any(|s| s.failures > 0);
    let text = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&summary).map_err(|e| Failure::Internal(e.to_string()))? + "\n",
        _ => {
            let mut out = format!("{}\n{}", summary.model, summary.model_checks);
            for s in &summary.sections {
                let status = if s.failures == 0 {
                    "ok".to_string()
                } else {
                    format!("FAILED {}", s.failures)
                };
                let _ = writeln!(out, "{:<32} {:>7} cases  {status}", s.name, s.cases);
                if let Some(c) = &s.counterexample {
                    for line in c.lines() {
                        let _ = writeln!(out, "    {line}");
                    }
                }
            }
            out
        }
    };
    emit(&args.output, &text)?;
    if failed {
        Err(Failure::Mismatch("verification found a counterexample".into()))
    } else {
        Ok(())
    }
}
