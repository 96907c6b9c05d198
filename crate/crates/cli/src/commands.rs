use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use rnatreedit::cost::Cost;
use rnatreedit::edit::{classical, EditOp, EditScript, Mapping};
use rnatreedit::fusion::{fusion_distance, path_count_bound, FusionParams};
use rnatreedit::model::{sample_labels, validate as validate_model, CostModel, Model, ModelConfig};
use rnatreedit::multilevel::{self, MultilevelParams};
use rnatreedit::replay::replay;
use rnatreedit::report::{verify_report, Comparison, Meta, Report, ReportError};
use rnatreedit::structure::{parse_auto, parse_ct, parse_dotbracket, PairingPolicy, SecondaryStructure};
use rnatreedit::tree::{build, to_dot, DotTree, IndexedTree, Representation};

use crate::{
    CheckArgs, CoarseRep, CompareArgs, Failure, Format, FusionArgs, InputArgs, InputFormat, ModelArgs, MultilevelArgs,
    OutputArgs, ParseArgs, Rep, StatsArgs, ValidateArgs,
};

pub fn representation(rep: Rep) -> Representation {
    match rep {
        Rep::B => Representation::RepB,
        Rep::C => Representation::RepC,
        Rep::D => Representation::RepD,
        Rep::E => Representation::RepE,
    }
}

fn rep_name(rep: Rep) -> &'static str {
    match rep {
        Rep::B => "b",
        Rep::C => "c",
        Rep::D => "d",
        Rep::E => "e",
    }
}

pub fn load_structure(path: &Path, args: &InputArgs) -> Result<SecondaryStructure, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let policy = if args.strict_pairs {
        PairingPolicy::Strict
    } else {
        PairingPolicy::Permissive
    };
    let parsed = match args.input_format {
        InputFormat::Auto => parse_auto(&path.to_string_lossy(), &text, policy),
        InputFormat::Dotbracket => parse_dotbracket(&text, policy),
        InputFormat::Ct => parse_ct(&text, policy),
    };
    let mut s = parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if s.id.is_empty() {
        s.id = path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(s)
}

pub fn load_model(args: &ModelArgs) -> Result<Model, Failure> {
    let mut cfg = match args.model.as_str() {
        "unit" => ModelConfig::unit(0.1),
        "structural" => ModelConfig::structural(0.05),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{path}: {e}")))?;
            ModelConfig::parse(&text).map_err(|e| Failure::Config(format!("{path}: {e}")))?
        }
    };
    if let Some(t) = args.t {
        cfg.t = t;
    }
    cfg.build().map_err(|e| Failure::Config(e.to_string()))
}

pub fn fusion_params(args: &FusionArgs) -> Result<FusionParams, Failure> {
    let p = FusionParams {
        l: args.l,
        prune: !args.no_prune,
    };
    p.check().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(p)
}

pub fn emit(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

/// Replays a script; a failure here is a bug, not a user error.
fn audit(
    a: &IndexedTree,
    b: &IndexedTree,
    m: &dyn CostModel,
    script: &EditScript,
    d: Cost,
    mapping: &Mapping,
) -> Result<(), Failure> {
    replay(a, b, m, script, d, Some(mapping))
        .map(|_| ())
        .map_err(|e| Failure::Internal(format!("script replay failed: {e}")))
}

fn dot_links(a: &IndexedTree, b: &IndexedTree, mapping: &Mapping) -> Vec<((usize, usize), (usize, usize))> {
    let mut links = Vec::new();
    for p in mapping {
        let (ra, rb) = (a.arena_id(p.t), b.arena_id(p.t2));
        links.push(((0, ra), (1, rb)));
        for &n in p.t_group.iter().filter(|&&n| n != p.t) {
            links.push(((0, a.arena_id(n)), (1, rb)));
        }
        for &n in p.t2_group.iter().filter(|&&n| n != p.t2) {
            links.push(((0, ra), (1, b.arena_id(n))));
        }
    }
    links
}

fn op_line(op: &EditOp) -> String {
    let path = |p: &[rnatreedit::edit::PathStep]| {
        p.iter()
            .map(|s| {
                format!(
                    "{}{}",
                    if s.kind == rnatreedit::edit::FusionKind::Node {
                        'n'
                    } else {
                        'e'
                    },
                    s.node
                )
            })
            .collect::<Vec<_>>()
            .join(",")
    };
    match op {
        EditOp::Delete { node, cost } => format!("delete {node} ({cost})"),
        EditOp::Insert { node, cost } => format!("insert {node} ({cost})"),
        EditOp::Relabel { from, to, cost } => format!("relabel {from} -> {to} ({cost})"),
        EditOp::NodeFusion {
            upper,
            lower,
            cost,
            path: p,
        }
        | EditOp::EdgeFusion {
            upper,
            lower,
            cost,
            path: p,
        }
        | EditOp::NodeSplit {
            upper,
            lower,
            cost,
            path: p,
        }
        | EditOp::EdgeSplit {
            upper,
            lower,
            cost,
            path: p,
        } => {
            format!("{} {upper} <- {lower} ({cost}) path [{}]", op.name(), path(p))
        }
    }
}

pub fn parse(args: &ParseArgs) -> Result<(), Failure> {
    let s = load_structure(&args.input, &args.input_args)?;
    let tree = build(&s, representation(args.rep));
    let text = match args.output.format {
        Format::Text => format!("{}\n", tree.to_text()),
        Format::Dot => to_dot(
            &[DotTree {
                name: &s.id,
                tree: &tree,
                colors: None,
            }],
            &[],
        ),
        Format::Json => {
            #[derive(Serialize)]
            struct Parsed<'a> {
                id: &'a str,
                sequence: String,
                structure: String,
                pairs: &'a [(usize, usize)],
                rep: &'a str,
                nodes: usize,
                tree: String,
            }
            to_json(&Parsed {
                id: &s.id,
                sequence: s.sequence().to_string(),
                structure: s.dot_bracket(),
                pairs: s.pairs(),
                rep: rep_name(args.rep),
                nodes: tree.len(),
                tree: tree.to_text(),
            })?
        }
    };
    emit(&args.output, &text)
}

struct Compared {
    report: Report,
    a: IndexedTree,
    b: IndexedTree,
    elapsed_ms: f64,
}

#[allow(clippy::too_many_arguments)]
fn compare_one(
    pa: &Path,
    pb: &Path,
    input: &InputArgs,
    rep: Rep,
    m: &Model,
    p: &FusionParams,
) -> Result<Compared, Failure> {
    let (sa, sb) = (load_structure(pa, input)?, load_structure(pb, input)?);
    let r = representation(rep);
    let (a, b) = (IndexedTree::new(build(&sa, r)), IndexedTree::new(build(&sb, r)));
    let started = Instant::now();
    let (d, script, mapping) = if p.l == 0 {
        classical(&a, &b, m)
    } else {
        fusion_distance(&a, &b, m, p).map_err(|e| Failure::Config(e.to_string()))?
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    audit(&a, &b, m, &script, d, &mapping)?;
    let meta = Meta {
        tool: "rnatreedit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "compare".into(),
        inputs: vec![pa.display().to_string(), pb.display().to_string()],
        rep: rep_name(rep).into(),
        model: m.echo(),
        l: p.l,
        prune: p.prune,
        tree_a: a.tree().to_text(),
        tree_b: b.tree().to_text(),
    };
    let report = Report {
        meta,
        distance: d.as_f64(),
        distance_units: d,
        script: script.ops,
        mapping,
        colors: None,
        coarse: None,
    };
    Ok(Compared {
        report,
        a,
        b,
        elapsed_ms,
    })
}

fn counts_line(ops: &[EditOp]) -> String {
    let script = EditScript { ops: ops.to_vec() };
    script
        .counts()
        .iter()
        .map(|(n, c)| format!("{n}={c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn compare_text(c: &Compared) -> String {
    let r = &c.report;
    let mut out = String::new();
    let _ = writeln!(out, "distance    {}", r.distance_units);
    let _ = writeln!(out, "operations  {}", counts_line(&r.script));
    for op in r.script.iter().filter(|op| op.is_fusion()) {
        let _ = writeln!(out, "fusion      {}", op_line(op));
    }
    let _ = writeln!(
        out,
        "parameters  rep={} l={} prune={} {}",
        r.meta.rep, r.meta.l, r.meta.prune, r.meta.model
    );
    let _ = writeln!(out, "elapsed     {:.3} ms", c.elapsed_ms);
    out
}

pub fn compare(args: &CompareArgs) -> Result<(), Failure> {
    let m = load_model(&args.model)?;
    let p = fusion_params(&args.fusion)?;
    if let Some(list) = &args.pairs {
        return compare_batch(args, list, &m, &p);
    }
    let (Some(pa), Some(pb)) = (&args.a, &args.b) else {
        return Err(Failure::Config("compare needs two inputs or --pairs".into()));
    };
    let c = compare_one(pa, pb, &args.input_args, args.rep, &m, &p)?;
    let text = match args.output.format {
        Format::Text => compare_text(&c),
        Format::Json => to_json(&c.report)?,
        Format::Dot => to_dot(
            &[
                DotTree {
                    name: &c.report.meta.inputs[0],
                    tree: c.a.tree(),
                    colors: None,
                },
                DotTree {
                    name: &c.report.meta.inputs[1],
                    tree: c.b.tree(),
                    colors: None,
                },
            ],
            &dot_links(&c.a, &c.b, &c.report.mapping),
        ),
    };
    emit(&args.output, &text)
}

fn compare_batch(args: &CompareArgs, list: &Path, m: &Model, p: &FusionParams) -> Result<(), Failure> {
    if args.output.format == Format::Dot {
        return Err(Failure::Config("dot output is not available with --pairs".into()));
    }
    if args.jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    let text = fs::read_to_string(list).map_err(|e| Failure::Input(format!("{}: {e}", list.display())))?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Failure::Input(format!(
                "{}: line {}: expected two paths",
                list.display(),
                n + 1
            )));
        }
        pairs.push((Path::new(fields[0]).to_path_buf(), Path::new(fields[1]).to_path_buf()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let results: Vec<Result<Compared, Failure>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(a, b)| compare_one(a, b, &args.input_args, args.rep, m, p))
            .collect()
    });
    let results: Vec<Compared> = results.into_iter().collect::<Result<_, _>>()?;
    let out = match args.output.format {
        Format::Json => to_json(&results.iter().map(|c| &c.report).collect::<Vec<_>>())?,
        _ => results
            .iter()
            .map(|c| {
                format!(
                    "{}\t{}\t{}\n",
                    c.report.meta.inputs[0], c.report.meta.inputs[1], c.report.distance_units
                )
            })
            .collect(),
    };
    emit(&args.output, &out)
}

pub fn multilevel(args: &MultilevelArgs) -> Result<(), Failure> {
    let m = load_model(&args.model)?;
    let p = fusion_params(&args.fusion)?;
    let (sa, sb) = (
        load_structure(&args.a, &args.input_args)?,
        load_structure(&args.b, &args.input_args)?,
    );
    let coarse = match args.coarse {
        CoarseRep::C => multilevel::CoarseRep::RepC,
        CoarseRep::D => multilevel::CoarseRep::RepD,
    };
    let started = Instant::now();
    let r = multilevel::multilevel(&sa, &sb, &m, &MultilevelParams { coarse, fusion: p }).map_err(|e| match e {
        rnatreedit::DistanceError::FusionBoundTooLarge(_) => Failure::Config(e.to_string()),
        _ => Failure::Internal(e.to_string()),
    })?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let c = &r.coarse;
    audit(&c.tree_a, &c.tree_b, &m, &c.script, c.distance, &c.mapping)?;
    let (fa, fb) = (&r.fine_a.tree, &r.fine_b.tree);
    // The fine mapping only pairs same-colour nodes, so the plain model
    // prices every operation of the script.
    audit(fa, fb, &m, &r.fine.script, r.fine.distance, &r.fine.mapping)?;
    let report = Report {
        meta: Meta {
            tool: "rnatreedit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: "multilevel".into(),
            inputs: vec![args.a.display().to_string(), args.b.display().to_string()],
            rep: "b".into(),
            model: m.echo(),
            l: p.l,
            prune: p.prune,
            tree_a: fa.tree().to_text(),
            tree_b: fb.tree().to_text(),
        },
        distance: r.fine.distance.as_f64(),
        distance_units: r.fine.distance,
        script: r.fine.script.ops.clone(),
        mapping: r.fine.mapping.clone(),
        colors: Some(c.colors.clone()),
        coarse: Some(Comparison {
            tree_a: c.tree_a.tree().to_text(),
            tree_b: c.tree_b.tree().to_text(),
            distance: c.distance.as_f64(),
            distance_units: c.distance,
            script: c.script.ops.clone(),
            mapping: c.mapping.clone(),
        }),
    };
    let text = match args.output.format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            let uncolored = |v: &[Option<u32>]| v.iter().filter(|c| c.is_none()).count();
            let mut out = String::new();
            let _ = writeln!(out, "coarse      {} ({})", c.distance, counts_line(&c.script.ops));
            for op in c.script.ops.iter().filter(|op| op.is_fusion()) {
                let _ = writeln!(out, "fusion      {}", op_line(op));
            }
            let _ = writeln!(out, "colors      {}", c.colors.count);
            let _ = writeln!(
                out,
                "uncolored   {} of {} bases, {} of {} bases",
                uncolored(&c.colors.a),
                c.colors.a.len(),
                uncolored(&c.colors.b),
                c.colors.b.len()
            );
            let _ = writeln!(
                out,
                "fine        {} ({})",
                r.fine.distance,
                counts_line(&r.fine.script.ops)
            );
            let _ = writeln!(out, "parameters  l={} prune={} {}", p.l, p.prune, m.echo());
            let _ = writeln!(out, "elapsed     {elapsed_ms:.3} ms");
            out
        }
        Format::Dot => {
            let arena_colors = |t: &IndexedTree, colors: &[Option<u32>]| {
                let mut v = vec![None; t.len()];
                for i in 1..=t.len() {
                    v[t.arena_id(i)] = colors[i];
                }
                v
            };
            let ca = arena_colors(fa, &r.fine_a.colors);
            let cb = arena_colors(fb, &r.fine_b.colors);
            to_dot(
                &[
                    DotTree {
                        name: &report.meta.inputs[0],
                        tree: fa.tree(),
                        colors: Some(&ca),
                    },
                    DotTree {
                        name: &report.meta.inputs[1],
                        tree: fb.tree(),
                        colors: Some(&cb),
                    },
                ],
                &dot_links(fa, fb, &r.fine.mapping),
            )
        }
    };
    emit(&args.output, &text)
}

pub fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let m = load_model(&args.model)?;
    let report = validate_model(&m, &sample_labels());
    let text = match args.output.format {
        Format::Json => to_json(&report)?,
        _ => format!("{}\n{report}", m.echo()),
    };
    emit(&args.output, &text)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Mismatch("the model violates at least one condition".into()))
    }
}

pub fn stats(args: &StatsArgs) -> Result<(), Failure> {
    if args.l > rnatreedit::fusion::MAX_FUSIONS {
        return Err(Failure::Config(
            rnatreedit::DistanceError::FusionBoundTooLarge(args.l).to_string(),
        ));
    }
    let s = load_structure(&args.input, &args.input_args)?;
    #[derive(Serialize)]
    struct Row {
        rep: &'static str,
        nodes: usize,
        leaves: usize,
        height: usize,
        max_degree: usize,
        path_bound: String,
    }
    let rows: Vec<Row> = [Rep::B, Rep::C, Rep::D, Rep::E]
        .into_iter()
        .map(|rep| {
            let t = IndexedTree::new(build(&s, representation(rep)));
            Row {
                rep: rep_name(rep),
                nodes: t.len(),
                leaves: t.leaf_count(),
                height: t.height(),
                max_degree: t.max_degree(),
                path_bound: path_count_bound(t.max_degree(), args.l).to_string(),
            }
        })
        .collect();
    let text = match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Stats<'a> {
                id: &'a str,
                length: usize,
                pairs: usize,
                l: usize,
                reps: Vec<Row>,
            }
            to_json(&Stats {
                id: &s.id,
                length: s.len(),
                pairs: s.pairs().len(),
                l: args.l,
                reps: rows,
            })?
        }
        _ => {
            let mut out = format!("{}: {} bases, {} pairs\n", s.id, s.len(), s.pairs().len());
            let _ = writeln!(out, "rep  nodes  leaves  height  max_degree  paths(l={})", args.l);
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<4} {:>5}  {:>6}  {:>6}  {:>10}  {}",
                    r.rep, r.nodes, r.leaves, r.height, r.max_degree, r.path_bound
                );
            }
            out
        }
    };
    emit(&args.output, &text)
}

pub fn check(args: &CheckArgs) -> Result<(), Failure> {
    let text =
        fs::read_to_string(&args.report).map_err(|e| Failure::Input(format!("{}: {e}", args.report.display())))?;
    match verify_report(&text) {
        Ok(d) => {
            println!("ok {d}");
            Ok(())
        }
        Err(e @ (ReportError::Json(_) | ReportError::Tree(_))) => {
            Err(Failure::Input(format!("{}: {e}", args.report.display())))
        }
        Err(e @ ReportError::Model(_)) => Err(Failure::Config(format!("{}: {e}", args.report.display()))),
        Err(e) => Err(Failure::Mismatch(format!("{}: {e}", args.report.display()))),
    }
}
