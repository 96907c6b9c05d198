//! Cost models: operation prices, label merging, configuration text and a
//! validity checker for the conditions under which the fused distance is a
//! metric.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::Cost;
use crate::error::ConfigError;
use crate::tree::{Kind, Label};

/// Prices for the seven edit operations. A label always stands for a node
/// together with its incoming edge.
pub trait CostModel: Send + Sync {
    fn relabel(&self, a: &Label, b: &Label) -> Cost;
    fn delete(&self, a: &Label) -> Cost;
    fn insert(&self, a: &Label) -> Cost {
        self.delete(a)
    }
    /// Label of `upper` after absorbing its child `lower`.
    fn merge_node(&self, upper: &Label, lower: &Label) -> Label;
    /// Label of the object that replaces `upper` and its child `lower` once
    /// the two incident edges are joined.
    fn merge_edge(&self, upper: &Label, lower: &Label) -> Label;
    /// Node fusion of `lower` into `upper` (labels as they currently are).
    fn node_fusion(&self, upper: &Label, lower: &Label) -> Cost;
    /// Edge fusion of `upper` with its child `lower`, excluding the deletion
    /// of displaced sibling subtrees.
    fn edge_fusion(&self, upper: &Label, lower: &Label) -> Cost;
    fn node_split(&self, upper: &Label, lower: &Label) -> Cost {
        self.node_fusion(upper, lower)
    }
    fn edge_split(&self, upper: &Label, lower: &Label) -> Cost {
        self.edge_fusion(upper, lower)
    }
    fn t(&self) -> Cost;
    /// Canonical one-line description of the effective parameters.
    fn echo(&self) -> String;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Unit,
    #[default]
    Structural,
}

/// How a multi-sided loop size is reduced to a scalar.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeView {
    #[default]
    Sum,
    Min,
    Max,
    Mean,
}

impl SizeView {
    pub fn apply(self, sizes: &[u32]) -> f64 {
        if sizes.is_empty() {
            return 0.0;
        }
        let it = sizes.iter().map(|&s| f64::from(s));
        match self {
            SizeView::Sum => it.sum(),
            SizeView::Min => it.fold(f64::INFINITY, f64::min),
            SizeView::Max => it.fold(0.0, f64::max),
            SizeView::Mean => it.sum::<f64>() / sizes.len() as f64,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SizeView::Sum => "sum",
            SizeView::Min => "min",
            SizeView::Max => "max",
            SizeView::Mean => "mean",
        }
    }
}

/// Effective parameters of a built-in model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub t: f64,
    /// Cap the deletion-plus-t part of fusion prices at 1.
    pub cap: bool,
    pub kind_penalty: f64,
    pub size_view: SizeView,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Structural,
            t: 0.05,
            cap: false,
            kind_penalty: 0.5,
            size_view: SizeView::Sum,
        }
    }
}

impl ModelConfig {
    pub fn unit(t: f64) -> ModelConfig {
        ModelConfig {
            kind: ModelKind::Unit,
            t,
            ..ModelConfig::default()
        }
    }

    pub fn structural(t: f64) -> ModelConfig {
        ModelConfig {
            kind: ModelKind::Structural,
            t,
            ..ModelConfig::default()
        }
    }

    /// Reads `key = value` lines; `#` starts a comment. Keys: `model`
    /// (unit|structural), `t`, `cap`, `kind_penalty`, `size_view`
    /// (sum|min|max|mean). Unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<ModelConfig, ConfigError> {
        let mut cfg = ModelConfig::default();
        let mut t_set = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                message: "expected key = value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
            };
            match key {
                "model" => {
                    cfg.kind = match value {
                        "unit" => ModelKind::Unit,
                        "structural" => ModelKind::Structural,
                        _ => return Err(bad()),
                    }
                }
                "t" => {
                    cfg.t = value.parse().map_err(|_| bad())?;
                    t_set = true;
                }
                "cap" => cfg.cap = value.parse().map_err(|_| bad())?,
                "kind_penalty" => {
                    cfg.kind_penalty = value.parse().map_err(|_| bad())?;
                    if !(0.0..=1.0).contains(&cfg.kind_penalty) {
                        return Err(bad());
                    }
                }
                "size_view" => {
                    cfg.size_view = match value {
                        "sum" => SizeView::Sum,
                        "min" => SizeView::Min,
                        "max" => SizeView::Max,
                        "mean" => SizeView::Mean,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            }
        }
        if !t_set && cfg.kind == ModelKind::Unit {
            cfg.t = 0.1;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(ConfigError::InvalidT(self.t));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Model, ConfigError> {
        self.check()?;
        Ok(Model {
            cfg: self.clone(),
            t: Cost::from_f64(self.t),
            kind_penalty: self.kind_penalty,
        })
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ModelKind::Unit => "unit",
            ModelKind::Structural => "structural",
        };
        write!(
            f,
            "model={kind} t={} cap={} kind_penalty={} size_view={}",
            self.t,
            self.cap,
            self.kind_penalty,
            self.size_view.name()
        )
    }
}

/// Merged kind when a loop absorbs a neighbouring loop.
pub fn merge_kinds(upper: Kind, lower: Kind) -> Kind {
    fn rank(k: Kind) -> Option<u8> {
        match k {
            Kind::Hairpin => Some(0),
            Kind::Bulge => Some(1),
            Kind::Internal => Some(2),
            Kind::Multiloop => Some(3),
            _ => None,
        }
    }
    match (upper, lower) {
        (Kind::Bulge, Kind::Bulge) => Kind::Internal,
        _ => match (rank(upper), rank(lower)) {
            (Some(a), Some(b)) if b > a => lower,
            _ => upper,
        },
    }
}

/// Built-in unit or structural model.
#[derive(Clone, Debug)]
pub struct Model {
    cfg: ModelConfig,
    t: Cost,
    kind_penalty: f64,
}

/// `|x - y| / (x + y)`, with 0/0 read as 0.
fn normalized_difference(x: f64, y: f64) -> f64 {
    if x + y == 0.0 {
        0.0
    } else {
        (x - y).abs() / (x + y)
    }
}

impl Model {
    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    fn object_size(&self, a: &Label) -> f64 {
        self.cfg.size_view.apply(&a.sizes) + f64::from(a.edge_size())
    }

    /// Deletion price of an object of scalar size `s`: concave, increasing,
    /// within [1/2, 1).
    fn deletion_of_size(s: f64) -> f64 {
        (s + 1.0) / (s + 2.0)
    }

    fn fusion_price(&self, deleted: Cost) -> Cost {
        let price = deleted + self.t;
        if self.cfg.cap {
            price.min(Cost::ONE)
        } else {
            price
        }
    }
}

impl CostModel for Model {
    fn relabel(&self, a: &Label, b: &Label) -> Cost {
        match self.cfg.kind {
            ModelKind::Unit => {
                if a == b {
                    Cost::ZERO
                } else {
                    Cost::ONE
                }
            }
            ModelKind::Structural => {
                if a == b {
                    return Cost::ZERO;
                }
                let kind = if a.kind == b.kind { 0.0 } else { self.kind_penalty };
                let view = self.cfg.size_view;
                let node = normalized_difference(view.apply(&a.sizes), view.apply(&b.sizes));
                let edge = normalized_difference(f64::from(a.edge_size()), f64::from(b.edge_size()));
                Cost::from_f64((kind + node + edge).min(1.0))
            }
        }
    }

    fn delete(&self, a: &Label) -> Cost {
        match self.cfg.kind {
            ModelKind::Unit => Cost::ONE,
            ModelKind::Structural => Cost::from_f64(Model::deletion_of_size(self.object_size(a))),
        }
    }

    fn merge_node(&self, upper: &Label, lower: &Label) -> Label {
        Label {
            kind: merge_kinds(upper.kind, lower.kind),
            sizes: vec![upper.size() + lower.edge_size() + lower.size()],
            edge: upper.edge,
        }
    }

    fn merge_edge(&self, upper: &Label, lower: &Label) -> Label {
        Label {
            kind: lower.kind,
            sizes: lower.sizes.clone(),
            edge: Some(upper.edge_size() + upper.size() + lower.edge_size()),
        }
    }

    fn node_fusion(&self, _upper: &Label, lower: &Label) -> Cost {
        self.fusion_price(self.delete(lower))
    }

    fn edge_fusion(&self, upper: &Label, _lower: &Label) -> Cost {
        self.fusion_price(self.delete(upper))
    }

    fn t(&self) -> Cost {
        self.t
    }

    fn echo(&self) -> String {
        self.cfg.to_string()
    }
}

pub fn unit_model(t: f64) -> Result<Model, ConfigError> {
    ModelConfig::unit(t).build()
}

pub fn structural_model(t: f64) -> Result<Model, ConfigError> {
    ModelConfig::structural(t).build()
}

/// Outcome of one validity condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// First violating labels, rendered as tree text.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub checks: Vec<Check>,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{:<24} {}", c.name, if c.passed { "ok" } else { "FAILED" })?;
            if let Some(w) = &c.witness {
                write!(f, "  witness: {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks the metric and fusion-sanity conditions over every pair and
/// triple of `samples`.
pub fn validate(m: &dyn CostModel, samples: &[Label]) -> ValidityReport {
    fn first<'a, I, F>(items: I, mut bad: F) -> Option<String>
    where
        I: IntoIterator<Item = Vec<&'a Label>>,
        F: FnMut(&[&'a Label]) -> bool,
    {
        items
            .into_iter()
            .find(|xs| bad(xs))
            .map(|xs| xs.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))
    }
    let singles = || samples.iter().map(|a| vec![a]);
    let pairs = || samples.iter().flat_map(|a| samples.iter().map(move |b| vec![a, b]));
    let triples = || pairs().flat_map(|ab| samples.iter().map(move |c| vec![ab[0], ab[1], c]));
    let zero = Cost::ZERO;

    let mut checks = Vec::new();
    let mut push = |name: &'static str, witness: Option<String>| {
        checks.push(Check {
            name,
            passed: witness.is_none(),
            witness,
        })
    };
    push(
        "non-negativity",
        first(pairs(), |x| {
            m.delete(x[0]) < zero
                || m.insert(x[0]) < zero
                || m.relabel(x[0], x[1]) < zero
                || m.node_fusion(x[0], x[1]) < zero
                || m.edge_fusion(x[0], x[1]) < zero
        }),
    );
    push(
        "insert/delete symmetry",
        first(singles(), |x| m.insert(x[0]) != m.delete(x[0])),
    );
    push(
        "fusion/split symmetry",
        first(pairs(), |x| {
            m.node_fusion(x[0], x[1]) != m.node_split(x[0], x[1])
                || m.edge_fusion(x[0], x[1]) != m.edge_split(x[0], x[1])
        }),
    );
    push("relabel identity", first(singles(), |x| m.relabel(x[0], x[0]) != zero));
    push(
        "relabel symmetry",
        first(pairs(), |x| m.relabel(x[0], x[1]) != m.relabel(x[1], x[0])),
    );
    push(
        "relabel triangle",
        first(triples(), |x| {
            m.relabel(x[0], x[2]) > m.relabel(x[0], x[1]) + m.relabel(x[1], x[2])
        }),
    );
    push(
        "relabel vs delete+insert",
        first(pairs(), |x| m.relabel(x[0], x[1]) > m.delete(x[0]) + m.insert(x[1])),
    );
    push(
        "node merge subadditivity",
        first(pairs(), |x| {
            m.delete(x[0]) + m.delete(x[1]) < m.delete(&m.merge_node(x[0], x[1]))
        }),
    );
    push(
        "edge merge subadditivity",
        first(pairs(), |x| {
            m.delete(x[0]) + m.delete(x[1]) < m.delete(&m.merge_edge(x[0], x[1]))
        }),
    );
    // A merged object never costs less to delete than its parts; otherwise
    // fusing before deleting would undercut plain deletion.
    push(
        "merge monotonicity",
        first(pairs(), |x| {
            let most = m.delete(x[0]).max(m.delete(x[1]));
            m.delete(&m.merge_node(x[0], x[1])) < most || m.delete(&m.merge_edge(x[0], x[1])) < most
        }),
    );
    ValidityReport { checks }
}

/// A representative label set for validating a model.
pub fn sample_labels() -> Vec<Label> {
    let mut out = Vec::new();
    for kind in [
        Kind::Hairpin,
        Kind::Bulge,
        Kind::Internal,
        Kind::Multiloop,
        Kind::Exterior,
    ] {
        for sizes in [vec![0], vec![3], vec![2, 2], vec![1, 0, 4]] {
            for edge in [None, Some(1), Some(5)] {
                out.push(Label {
                    kind,
                    sizes: sizes.clone(),
                    edge,
                });
            }
        }
    }
    for kind in [Kind::Stack, Kind::Unpaired] {
        for s in [1, 2, 7] {
            out.push(Label::new(kind, [s]));
        }
    }
    for c in ['A', 'C', 'G', 'U'] {
        out.push(Label::new(Kind::Base(c), [1]));
    }
    out.push(Label::new(Kind::Pair('G', 'C'), [1]));
    out.push(Label::new(Kind::Pair('A', 'U'), [1]));
    out.push(Label::new(Kind::Root, []));
    out.push(Label::symbol('a'));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hairpin(n: u32) -> Label {
        Label::new(Kind::Hairpin, [n])
    }

    #[test]
    fn unit_prices() {
        let m = unit_model(0.1).unwrap();
        assert_eq!(m.relabel(&Label::symbol('a'), &Label::symbol('a')), Cost::ZERO);
        assert_eq!(m.relabel(&Label::symbol('a'), &Label::symbol('b')), Cost::ONE);
        assert_eq!(m.delete(&hairpin(9)), Cost::ONE);
        assert_eq!(m.node_fusion(&hairpin(1), &hairpin(2)), Cost::from_f64(1.1));
        let capped = ModelConfig {
            cap: true,
            ..ModelConfig::unit(0.1)
        }
        .build()
        .unwrap();
        assert_eq!(capped.node_fusion(&hairpin(1), &hairpin(2)), Cost::ONE);
    }

    #[test]
    fn structural_prices() {
        let m = structural_model(0.05).unwrap();
        let helix = |n| Label::new(Kind::Stack, [n]);
        assert_eq!(m.relabel(&helix(5), &helix(5)), Cost::ZERO);
        assert_eq!(m.relabel(&hairpin(4), &hairpin(6)), Cost::from_f64(0.2));
        assert_eq!(
            m.relabel(&hairpin(4), &Label::new(Kind::Bulge, [4])),
            Cost::from_f64(0.5)
        );
        assert_eq!(m.delete(&hairpin(3).with_edge(3)), Cost::from_f64(7.0 / 8.0));
        assert_eq!(m.t(), Cost::from_f64(0.05));
    }

    #[test]
    fn merges() {
        let m = structural_model(0.0).unwrap();
        let upper = Label::new(Kind::Bulge, [2]).with_edge(6);
        let lower = Label::new(Kind::Internal, [4]).with_edge(1);
        assert_eq!(
            m.merge_node(&upper, &lower),
            Label::new(Kind::Internal, [7]).with_edge(6)
        );
        let upper = Label::new(Kind::Internal, [2]).with_edge(7);
        let lower = hairpin(3).with_edge(5);
        assert_eq!(m.merge_edge(&upper, &lower), hairpin(3).with_edge(14));
        assert_eq!(merge_kinds(Kind::Bulge, Kind::Bulge), Kind::Internal);
        assert_eq!(merge_kinds(Kind::Hairpin, Kind::Multiloop), Kind::Multiloop);
        assert_eq!(merge_kinds(Kind::Symbol('a'), Kind::Symbol('b')), Kind::Symbol('a'));
    }

    #[test]
    fn t_shift_moves_only_fusions() {
        let a = structural_model(0.05).unwrap();
        let b = structural_model(0.15).unwrap();
        let delta = Cost::from_f64(0.1);
        let labels = sample_labels();
        for x in &labels {
            assert_eq!(a.delete(x), b.delete(x));
            for y in &labels {
                assert_eq!(a.relabel(x, y), b.relabel(x, y));
                assert_eq!(a.node_fusion(x, y) + delta, b.node_fusion(x, y));
                assert_eq!(a.edge_fusion(x, y) + delta, b.edge_fusion(x, y));
            }
        }
    }

    #[test]
    fn built_in_models_validate() {
        let labels = sample_labels();
        for cfg in [
            ModelConfig::unit(0.1),
            ModelConfig::structural(0.05),
            ModelConfig {
                size_view: SizeView::Max,
                ..ModelConfig::structural(0.2)
            },
        ] {
            let report = validate(&cfg.build().unwrap(), &labels);
            assert!(report.all_passed(), "{cfg}\n{report}");
        }
    }

    struct Lopsided(Model);

    impl CostModel for Lopsided {
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
            "lopsided".into()
        }
    }

    struct Superadditive(Model);

    impl CostModel for Superadditive {
        fn relabel(&self, a: &Label, b: &Label) -> Cost {
            self.0.relabel(a, b)
        }
        fn delete(&self, a: &Label) -> Cost {
            Cost::from_f64(f64::from(a.size() + a.edge_size()))
        }
        fn merge_node(&self, u: &Label, v: &Label) -> Label {
            let mut l = self.0.merge_node(u, v);
            l.sizes[0] += 1;
            l
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
            "superadditive".into()
        }
    }

    #[test]
    fn violations_are_reported_with_witnesses() {
        let labels = sample_labels();
        let report = validate(&Lopsided(structural_model(0.05).unwrap()), &labels);
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert_eq!(failed, vec!["insert/delete symmetry"]);
        assert!(report.checks[1].witness.is_some());

        let report = validate(&Superadditive(structural_model(0.05).unwrap()), &labels);
        let bad = report
            .checks
            .iter()
            .find(|c| c.name == "node merge subadditivity")
            .unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.witness.as_deref().map(|w| w.split(' ').count()), Some(2));
    }

    #[test]
    fn config_text() {
        let cfg = ModelConfig::parse("# x\nmodel = structural\nt=0.2\ncap = true\nsize_view=max\n").unwrap();
        assert_eq!(
            cfg.to_string(),
            "model=structural t=0.2 cap=true kind_penalty=0.5 size_view=max"
        );
        assert_eq!(ModelConfig::parse("model=unit").unwrap().t, 0.1);
        assert_eq!(ModelConfig::parse("").unwrap(), ModelConfig::default());
        assert_eq!(ModelConfig::parse("t=-1"), Err(ConfigError::InvalidT(-1.0)));
        assert!(ModelConfig::parse("t=NaN").is_err());
        assert!(matches!(
            ModelConfig::parse("colour=red"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            ModelConfig::parse("model"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ModelConfig::parse("model=x"),
            Err(ConfigError::InvalidValue { .. })
        ));
        let echoed = ModelConfig::parse(&cfg.to_string().replace(' ', "\n")).unwrap();
        assert_eq!(echoed, cfg);
    }
}
