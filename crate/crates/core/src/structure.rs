//! RNA secondary structures: dot-bracket and CT readers, and the
//! decomposition into helices and loops that the tree encodings are built
//! from.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Which base pairs are accepted when a structure is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairingPolicy {
    /// Any two bases may pair.
    #[default]
    Permissive,
    /// Watson-Crick pairs (A-U, G-C) only; wobble G-U is rejected.
    Strict,
}

/// A pseudoknot-free secondary structure over A, C, G, U.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondaryStructure {
    pub id: String,
    sequence: Vec<u8>,
    /// 0-based `(i, j)` with `i < j`, sorted by `i`.
    pairs: Vec<(usize, usize)>,
}

impl SecondaryStructure {
    /// Builds a structure, normalizing the sequence (upper case, T to U) and
    /// checking the pair list.
    pub fn new(
        id: impl Into<String>,
        sequence: &str,
        pairs: impl IntoIterator<Item = (usize, usize)>,
        policy: PairingPolicy,
    ) -> Result<Self, ParseError> {
        let sequence = normalize_sequence(sequence, 0)?;
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(i, j)| if i < j { (i, j) } else { (j, i) })
            .collect();
        pairs.sort_unstable();
        let n = sequence.len();
        let mut partner = vec![usize::MAX; n];
        for &(i, j) in &pairs {
            if j >= n || i == j {
                return Err(ParseError::BadRecord {
                    line: 0,
                    message: format!("pair ({i},{j}) out of range for length {n}"),
                });
            }
            for (a, b) in [(i, j), (j, i)] {
                if partner[a] != usize::MAX && partner[a] != b {
                    return Err(ParseError::NonReciprocalPair { line: 0, i: a, j: b });
                }
                partner[a] = b;
            }
        }
        pairs.dedup();
        check_nested(&pairs)?;
        if policy == PairingPolicy::Strict {
            for &(i, j) in &pairs {
                let (a, b) = (sequence[i] as char, sequence[j] as char);
                if !is_watson_crick(a, b) {
                    return Err(ParseError::NonCanonicalPair {
                        i,
                        j,
                        left: a,
                        right: b,
                    });
                }
            }
        }
        Ok(SecondaryStructure {
            id: id.into(),
            sequence,
            pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn sequence(&self) -> &str {
        // Only ASCII letters are ever stored.
        std::str::from_utf8(&self.sequence).expect("ascii sequence")
    }

    pub fn base(&self, i: usize) -> char {
        self.sequence[i] as char
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `partner[i]` is the base paired with `i`, if any.
    pub fn partner_table(&self) -> Vec<Option<usize>> {
        let mut partner = vec![None; self.len()];
        for &(i, j) in &self.pairs {
            partner[i] = Some(j);
            partner[j] = Some(i);
        }
        partner
    }

    pub fn unpaired_count(&self) -> usize {
        self.len() - 2 * self.pairs.len()
    }

    /// The structure line of the dot-bracket encoding.
    pub fn dot_bracket(&self) -> String {
        let mut line = vec![b'.'; self.len()];
        for &(i, j) in &self.pairs {
            line[i] = b'(';
            line[j] = b')';
        }
        String::from_utf8(line).expect("ascii")
    }

    pub fn to_dotbracket(&self) -> String {
        format!(">{}\n{}\n{}\n", self.id, self.sequence(), self.dot_bracket())
    }

    pub fn to_ct(&self) -> String {
        let partner = self.partner_table();
        let n = self.len();
        let mut out = format!("{n} {}\n", self.id);
        for (i, p) in partner.iter().enumerate() {
            let next = if i + 1 < n { i + 2 } else { 0 };
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                i + 1,
                self.base(i),
                i,
                next,
                p.map_or(0, |p| p + 1),
                i + 1
            );
        }
        out
    }
}

fn is_watson_crick(a: char, b: char) -> bool {
    matches!((a, b), ('A', 'U') | ('U', 'A') | ('G', 'C') | ('C', 'G'))
}

fn normalize_sequence(text: &str, line: usize) -> Result<Vec<u8>, ParseError> {
    text.chars()
        .enumerate()
        .map(|(column, ch)| match ch.to_ascii_uppercase() {
            'T' | 'U' => Ok(b'U'),
            c @ ('A' | 'C' | 'G') => Ok(c as u8),
            _ => Err(ParseError::IllegalCharacter {
                line,
                column: column + 1,
                ch,
            }),
        })
        .collect()
}

/// Rejects interleaving pairs. `pairs` must be sorted by opening index.
fn check_nested(pairs: &[(usize, usize)]) -> Result<(), ParseError> {
    let mut open: Vec<(usize, usize)> = Vec::new();
    for &(i, j) in pairs {
        while let Some(&(_, top_j)) = open.last() {
            if top_j < i {
                open.pop();
            } else {
                break;
            }
        }
        if let Some(&(k, l)) = open.last() {
            if j > l {
                return Err(ParseError::PseudoknotDetected { i: k, j: l, k: i, l: j });
            }
        }
        open.push((i, j));
    }
    Ok(())
}

/// Parses `>name` (optional), a sequence line and a structure line.
///
/// Anything after the first whitespace on the structure line (for example
/// an energy annotation) is ignored.
pub fn parse_dotbracket(text: &str, policy: PairingPolicy) -> Result<SecondaryStructure, ParseError> {
    let mut id = String::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = lines.next();
    if let Some((_, l)) = next {
        if let Some(name) = l.strip_prefix('>') {
            id = name.trim().to_string();
            next = lines.next();
        }
    }
    let (seq_line, seq_text) = next.ok_or(ParseError::Missing("sequence line"))?;
    let sequence = normalize_sequence(seq_text, seq_line)?;
    let (st_line, st_text) = lines.next().ok_or(ParseError::Missing("structure line"))?;
    let structure = st_text.split_whitespace().next().unwrap_or("");
    if let Some((line, _)) = lines.next() {
        return Err(ParseError::BadRecord {
            line,
            message: "unexpected extra line".into(),
        });
    }

    let mut stack = Vec::new();
    let mut pairs = Vec::new();
    let mut length = 0;
    for (column, ch) in structure.chars().enumerate() {
        length += 1;
        match ch {
            '.' => {}
            '(' => stack.push(column),
            ')' => {
                let i = stack.pop().ok_or(ParseError::UnbalancedBrackets {
                    line: st_line,
                    column: column + 1,
                })?;
                pairs.push((i, column));
            }
            _ => {
                return Err(ParseError::IllegalCharacter {
                    line: st_line,
                    column: column + 1,
                    ch,
                })
            }
        }
    }
    if let Some(&i) = stack.last() {
        return Err(ParseError::UnbalancedBrackets {
            line: st_line,
            column: i + 1,
        });
    }
    if length != sequence.len() {
        return Err(ParseError::LengthMismatch {
            line: st_line,
            sequence: sequence.len(),
            structure: length,
        });
    }
    let seq = String::from_utf8(sequence).expect("ascii");
    SecondaryStructure::new(id, &seq, pairs, policy)
}

/// Parses a connectivity table: a header whose first field is the length,
/// then one record per base with the 1-based partner in column 5.
pub fn parse_ct(text: &str, policy: PairingPolicy) -> Result<SecondaryStructure, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or(ParseError::Missing("CT header"))?;
    let mut fields = header.split_whitespace();
    let expected: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| ParseError::BadRecord {
            line: header_line,
            message: "header must start with the length".into(),
        })?;
    let id = fields.collect::<Vec<_>>().join(" ");

    let mut sequence = String::with_capacity(expected.min(1 << 16));
    let mut partner: Vec<usize> = Vec::with_capacity(expected.min(1 << 16));
    let mut record_lines = Vec::with_capacity(expected.min(1 << 16));
    let mut found = 0;
    for (line, record) in lines {
        found += 1;
        if found > expected {
            continue;
        }
        let cols: Vec<&str> = record.split_whitespace().collect();
        if cols.len() < 6 {
            return Err(ParseError::BadRecord {
                line,
                message: format!("expected 6 columns, found {}", cols.len()),
            });
        }
        let index: usize = cols[0].parse().map_err(|_| ParseError::BadRecord {
            line,
            message: format!("bad index {:?}", cols[0]),
        })?;
        if index != found {
            return Err(ParseError::BadRecord {
                line,
                message: format!("expected record {found}, found {index}"),
            });
        }
        let base = cols[1];
        if base.chars().count() != 1 {
            return Err(ParseError::BadRecord {
                line,
                message: format!("bad base {base:?}"),
            });
        }
        let p: usize = cols[4].parse().map_err(|_| ParseError::BadRecord {
            line,
            message: format!("bad partner {:?}", cols[4]),
        })?;
        if p > expected || p == index {
            return Err(ParseError::BadRecord {
                line,
                message: format!("partner {p} out of range"),
            });
        }
        sequence.push_str(base);
        partner.push(p);
        record_lines.push(line);
    }
    if found != expected {
        return Err(ParseError::BadRecordCount { expected, found });
    }
    let sequence = normalize_sequence(&sequence, 0).map_err(|e| match e {
        ParseError::IllegalCharacter { column, ch, .. } => ParseError::IllegalCharacter {
            line: record_lines[column - 1],
            column: 2,
            ch,
        },
        other => other,
    })?;

    let mut pairs = Vec::new();
    for (i, &p) in partner.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let j = p - 1;
        if partner[j] != i + 1 {
            return Err(ParseError::NonReciprocalPair {
                line: record_lines[i],
                i: i + 1,
                j: p,
            });
        }
        if i < j {
            pairs.push((i, j));
        }
    }
    check_nested(&pairs)?;
    let seq = String::from_utf8(sequence).expect("ascii");
    SecondaryStructure::new(id, &seq, pairs, policy)
}

/// Picks a reader from the file extension, falling back to sniffing the
/// first line (a CT header starts with an integer).
pub fn parse_auto(name: &str, text: &str, policy: PairingPolicy) -> Result<SecondaryStructure, ParseError> {
    let lower = name.to_ascii_lowercase();
    if lower.ends_with(".ct") {
        return parse_ct(text, policy);
    }
    if [".db", ".dbn", ".dot", ".fold", ".vienna"]
        .iter()
        .any(|e| lower.ends_with(e))
    {
        return parse_dotbracket(text, policy);
    }
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let looks_ct = first
        .split_whitespace()
        .next()
        .is_some_and(|f| f.parse::<usize>().is_ok());
    if looks_ct {
        parse_ct(text, policy)
    } else {
        parse_dotbracket(text, policy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Helix,
    HairpinLoop,
    InternalLoop,
    Bulge,
    Multiloop,
    ExteriorRegion,
}

impl ElementKind {
    pub fn is_loop(self) -> bool {
        self != ElementKind::Helix
    }
}

/// One piece of a loop read 5' to 3': a run of unpaired bases or a helix
/// leaving the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopItem {
    Run { start: usize, len: usize },
    Helix(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureElement {
    pub kind: ElementKind,
    /// Bases owned by the element, increasing.
    pub bases: Vec<usize>,
    /// Helix: `[stacked pairs]`. Loops: unpaired count of each segment
    /// between consecutive helices (two entries for internal loops and
    /// bulges, one for hairpins).
    pub sizes: Vec<u32>,
    /// Loops only.
    pub layout: Vec<LoopItem>,
    /// Helix: outermost pair. Loops: the closing pair, if any.
    pub outer_pair: Option<(usize, usize)>,
    /// Helix: the loop it leaves from. Loops: the helix that closes it.
    pub parent: Option<usize>,
    /// Helix only: the loop closed by its innermost pair.
    pub inner_loop: Option<usize>,
}

impl StructureElement {
    pub fn size(&self) -> u32 {
        self.sizes.iter().sum()
    }

    /// Helices leaving this loop, 5' to 3'.
    pub fn branches(&self) -> impl Iterator<Item = usize> + '_ {
        self.layout.iter().filter_map(|item| match item {
            LoopItem::Helix(h) => Some(*h),
            LoopItem::Run { .. } => None,
        })
    }
}

/// Element-level tree: loops are nodes, helices link a loop to the loop it
/// closes. Element 0 is always the exterior region.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementGraph {
    pub elements: Vec<StructureElement>,
    pub root: usize,
    /// Owning element of each base.
    pub base_owner: Vec<usize>,
}

impl ElementGraph {
    pub fn count(&self, kind: ElementKind) -> usize {
        self.elements.iter().filter(|e| e.kind == kind).count()
    }

    /// `(helix, outer loop, inner loop)` for every helix.
    pub fn helix_links(&self) -> Vec<(usize, usize, usize)> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == ElementKind::Helix)
            .map(|(h, e)| {
                (
                    h,
                    e.parent.expect("helix parent"),
                    e.inner_loop.expect("helix inner loop"),
                )
            })
            .collect()
    }
}

/// Splits a structure into helices and loops.
pub fn decompose(s: &SecondaryStructure) -> ElementGraph {
    let partner = s.partner_table();
    let mut graph = ElementGraph {
        elements: vec![StructureElement {
            kind: ElementKind::ExteriorRegion,
            bases: Vec::new(),
            sizes: Vec::new(),
            layout: Vec::new(),
            outer_pair: None,
            parent: None,
            inner_loop: None,
        }],
        root: 0,
        base_owner: vec![0; s.len()],
    };
    // Explicit stack of loops still to scan: (loop element, interior range).
    let mut pending = vec![(0usize, 0usize, s.len())];
    while let Some((loop_id, lo, hi)) = pending.pop() {
        let mut layout = Vec::new();
        let mut bases = Vec::new();
        let mut k = lo;
        while k < hi {
            match partner[k] {
                Some(p) if p > k => {
                    let mut n = 1;
                    while k + n < p - n && partner[k + n] == Some(p - n) {
                        n += 1;
                    }
                    let helix = graph.elements.len();
                    let mut helix_bases: Vec<usize> = (k..k + n).chain(p + 1 - n..=p).collect();
                    helix_bases.sort_unstable();
                    for &b in &helix_bases {
                        graph.base_owner[b] = helix;
                    }
                    let inner = helix + 1;
                    graph.elements.push(StructureElement {
                        kind: ElementKind::Helix,
                        bases: helix_bases,
                        sizes: vec![n as u32],
                        layout: Vec::new(),
                        outer_pair: Some((k, p)),
                        parent: Some(loop_id),
                        inner_loop: Some(inner),
                    });
                    // Kind is fixed once the loop has been scanned.
                    graph.elements.push(StructureElement {
                        kind: ElementKind::HairpinLoop,
                        bases: Vec::new(),
                        sizes: Vec::new(),
                        layout: Vec::new(),
                        outer_pair: Some((k + n - 1, p + 1 - n)),
                        parent: Some(helix),
                        inner_loop: None,
                    });
                    pending.push((inner, k + n, p + 1 - n));
                    layout.push(LoopItem::Helix(helix));
                    k = p + 1;
                }
                Some(_) => unreachable!("closing base reached before its opening base"),
                None => {
                    let start = k;
                    while k < hi && partner[k].is_none() {
                        graph.base_owner[k] = loop_id;
                        bases.push(k);
                        k += 1;
                    }
                    layout.push(LoopItem::Run { start, len: k - start });
                }
            }
        }
        let mut sizes = Vec::new();
        let mut run = 0u32;
        for item in &layout {
            match item {
                LoopItem::Run { len, .. } => run += *len as u32,
                LoopItem::Helix(_) => {
                    sizes.push(run);
                    run = 0;
                }
            }
        }
        sizes.push(run);
        let branches = layout.iter().filter(|i| matches!(i, LoopItem::Helix(_))).count();
        let element = &mut graph.elements[loop_id];
        if element.kind != ElementKind::ExteriorRegion {
            element.kind = match branches {
                0 => ElementKind::HairpinLoop,
                1 if sizes[0] > 0 && sizes[1] > 0 => ElementKind::InternalLoop,
                1 => ElementKind::Bulge,
                _ => ElementKind::Multiloop,
            };
        }
        element.bases = bases;
        element.sizes = sizes;
        element.layout = layout;
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(seq: &str, st: &str) -> Result<SecondaryStructure, ParseError> {
        parse_dotbracket(&format!("{seq}\n{st}\n"), PairingPolicy::Permissive)
    }

    #[test]
    fn dotbracket_examples() {
        let s = db("GAAAC", ".....").unwrap();
        assert!(s.pairs().is_empty());
        assert_eq!(s.unpaired_count(), 5);

        let s = db("GGGAAACCC", "(((...)))").unwrap();
        assert_eq!(s.pairs(), &[(0, 8), (1, 7), (2, 6)]);

        assert!(matches!(
            db("GGAAACC", "((.).))"),
            Err(ParseError::UnbalancedBrackets { .. })
        ));
    }

    #[test]
    fn dotbracket_errors() {
        assert!(matches!(
            db("GGAAA", "((..."),
            Err(ParseError::UnbalancedBrackets { line: 2, column: 2 })
        ));
        assert!(matches!(db("GGAA", "(..)."), Err(ParseError::LengthMismatch { .. })));
        assert!(matches!(
            db("GGAA", "(x.)"),
            Err(ParseError::IllegalCharacter { ch: 'x', .. })
        ));
        assert!(matches!(
            db("GXAA", "(..)"),
            Err(ParseError::IllegalCharacter { ch: 'X', .. })
        ));
        assert!(parse_dotbracket("GAAAC\n(...)\n", PairingPolicy::Strict).is_ok());
        let wobble = parse_dotbracket("GAAAU\n(...)\n", PairingPolicy::Strict);
        assert!(matches!(wobble, Err(ParseError::NonCanonicalPair { i: 0, j: 4, .. })));
        assert!(db("GAAAU", "(...)").is_ok());
        assert!(db("AAAAA", "(...)").is_ok());
    }

    #[test]
    fn header_energy_and_thymine() {
        let s = parse_dotbracket(">trna 1\nggtaaacc\n((....)) (-1.20)\n", PairingPolicy::Permissive).unwrap();
        assert_eq!(s.id, "trna 1");
        assert_eq!(s.sequence(), "GGUAAACC");
        assert_eq!(s.dot_bracket(), "((....))");
    }

    const HAIRPIN_CT: &str = "9 hp\n\
        1 G 0 2 9 1\n2 G 1 3 8 2\n3 G 2 4 7 3\n4 A 3 5 0 4\n5 A 4 6 0 5\n\
        6 A 5 7 0 6\n7 C 6 8 3 7\n8 C 7 9 2 8\n9 C 8 0 1 9\n";

    #[test]
    fn ct_examples() {
        let s = parse_ct(
            "5 x\n1 G 0 2 0 1\n2 A 1 3 0 2\n3 A 2 4 0 3\n4 A 3 5 0 4\n5 C 4 0 0 5\n",
            PairingPolicy::Permissive,
        )
        .unwrap();
        assert!(s.pairs().is_empty());

        let s = parse_ct(HAIRPIN_CT, PairingPolicy::Permissive).unwrap();
        assert_eq!(s.pairs(), &[(0, 8), (1, 7), (2, 6)]);
        assert_eq!(s.id, "hp");

        let knot = "10 pk\n1 G 0 2 0 1\n2 G 1 3 8 2\n3 A 2 4 0 3\n4 G 3 5 9 4\n5 A 4 6 0 5\n\
                    6 A 5 7 0 6\n7 A 6 8 0 7\n8 C 7 9 2 8\n9 C 8 10 4 9\n10 A 9 0 0 10\n";
        assert!(matches!(
            parse_ct(knot, PairingPolicy::Permissive),
            Err(ParseError::PseudoknotDetected { .. })
        ));
    }

    #[test]
    fn ct_errors() {
        let nonrecip = "3 x\n1 G 0 2 3 1\n2 A 1 3 0 2\n3 C 2 0 0 3\n";
        assert!(matches!(
            parse_ct(nonrecip, PairingPolicy::Permissive),
            Err(ParseError::NonReciprocalPair { line: 2, .. })
        ));
        let short = "4 x\n1 G 0 2 0 1\n2 A 1 3 0 2\n";
        assert_eq!(
            parse_ct(short, PairingPolicy::Permissive),
            Err(ParseError::BadRecordCount { expected: 4, found: 2 })
        );
        let long = "1 x\n1 G 0 2 0 1\n2 A 1 3 0 2\n";
        assert_eq!(
            parse_ct(long, PairingPolicy::Permissive),
            Err(ParseError::BadRecordCount { expected: 1, found: 2 })
        );
        assert!(matches!(
            parse_ct("2 x\n1 G 0 2 0\n2 A 1 0 0 2\n", PairingPolicy::Permissive),
            Err(ParseError::BadRecord { line: 2, .. })
        ));
    }

    #[test]
    fn ct_and_dotbracket_agree() {
        let a = parse_ct(HAIRPIN_CT, PairingPolicy::Permissive).unwrap();
        let b = parse_dotbracket(">hp\nGGGAAACCC\n(((...)))\n", PairingPolicy::Permissive).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_ct(&a.to_ct(), PairingPolicy::Permissive).unwrap(), a);
        assert_eq!(parse_auto("x.txt", HAIRPIN_CT, PairingPolicy::Permissive).unwrap(), a);
        assert_eq!(
            parse_auto("x", &b.to_dotbracket(), PairingPolicy::Permissive).unwrap(),
            b
        );
    }

    fn kinds(g: &ElementGraph) -> Vec<(ElementKind, Vec<u32>)> {
        g.elements.iter().map(|e| (e.kind, e.sizes.clone())).collect()
    }

    #[test]
    fn decompose_stem_loop() {
        let s = db("GGGAAACCC", "(((...)))").unwrap();
        let g = decompose(&s);
        use ElementKind::*;
        assert_eq!(
            kinds(&g),
            vec![(ExteriorRegion, vec![0, 0]), (Helix, vec![3]), (HairpinLoop, vec![3])]
        );
    }

    #[test]
    fn decompose_internal_loop() {
        // Hand enumeration: pairs (0,14),(1,13) form helix 2; bases 2,3 and
        // 11,12 form a 2+2 internal loop; pairs (4,10),(5,9) helix 2;
        // bases 6..=8 the hairpin.
        let s = db("GGAAGGAAACCAACC", "((..((...))..))").unwrap();
        let g = decompose(&s);
        use ElementKind::*;
        assert_eq!(
            kinds(&g),
            vec![
                (ExteriorRegion, vec![0, 0]),
                (Helix, vec![2]),
                (InternalLoop, vec![2, 2]),
                (Helix, vec![2]),
                (HairpinLoop, vec![3]),
            ]
        );
        assert_eq!(g.elements[2].bases, vec![2, 3, 11, 12]);
        assert_eq!(g.elements[3].bases, vec![4, 5, 9, 10]);
    }

    #[test]
    fn decompose_two_stems() {
        let s = db("GGAAACCGGAAACC", "((...))((...))").unwrap();
        let g = decompose(&s);
        assert_eq!(g.count(ElementKind::Multiloop), 0);
        assert_eq!(g.count(ElementKind::HairpinLoop), 2);
        assert_eq!(g.elements[0].branches().count(), 2);
        assert_eq!(g.count(ElementKind::Helix), 2);
    }

    #[test]
    fn decompose_bulge_and_multiloop() {
        let s = db("GGAGGAAACCGGAAACCAACC", "((.((...))((...))..))").unwrap();
        let g = decompose(&s);
        let ml: Vec<_> = g.elements.iter().filter(|e| e.kind == ElementKind::Multiloop).collect();
        assert_eq!(ml.len(), 1);
        assert_eq!(ml[0].sizes, vec![1, 0, 2]);
        let isolated = db("GAAAC", "(...)").unwrap();
        assert_eq!(decompose(&isolated).elements[1].sizes, vec![1]);
        let bulge = db("GGAGGAAACCCC", "((.((...))))").unwrap();
        assert_eq!(decompose(&bulge).count(ElementKind::Bulge), 1);
    }

    #[test]
    fn partition_and_euler_counts() {
        let s = db("GGAGGAAACCGGAAACCAACCAA", "((.((...))((...))..))..").unwrap();
        let g = decompose(&s);
        let total: usize = g.elements.iter().map(|e| e.bases.len()).sum();
        assert_eq!(total, s.len());
        let helices = g.count(ElementKind::Helix);
        let closed = g
            .elements
            .iter()
            .filter(|e| e.kind.is_loop() && e.kind != ElementKind::ExteriorRegion)
            .count();
        assert_eq!(helices, closed);
    }
}
