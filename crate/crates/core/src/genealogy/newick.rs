//! Newick ingestion for rooted binary genealogies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sampling dates keyed by tip label, in forward (calendar) time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TipDates(BTreeMap<String, f64>);

impl TipDates {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, date: f64) {
        self.0.insert(label.into(), date);
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.0.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parse a two-column table of `label<TAB>date`. Blank lines and lines
    /// starting with `#` are skipped; a first row whose date column is not
    /// numeric is treated as a header.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut dates = TipDates::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(label), Some(date)) = (cols.next(), cols.next()) else {
                return Err(Error::validation(format!(
                    "tip-date table line {}: expected two tab-separated columns",
                    lineno + 1
                )));
            };
            match date.trim().parse::<f64>() {
                Ok(d) if d.is_finite() => dates.insert(label.trim(), d),
                _ if lineno == 0 && dates.is_empty() => continue,
                _ => {
                    return Err(Error::validation(format!(
                        "tip-date table line {}: bad date {:?}",
                        lineno + 1,
                        date
                    )))
                }
            }
        }
        Ok(dates)
    }
}

/// Where tip sampling dates come from when parsing.
#[derive(Debug, Clone, Default)]
pub enum DateSource<'a> {
    /// Heights come from branch lengths alone.
    #[default]
    None,
    /// A sidecar table keyed by label.
    Table(&'a TipDates),
    /// Labels carry a `name<delim>date` suffix; the date is stripped from the label.
    LabelSuffix(char),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: Option<String>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Time before the most recent sample.
    pub height: f64,
    /// Forward-time sampling date, tips only.
    pub date: Option<f64>,
}

impl Node {
    pub fn is_tip(&self) -> bool {
        self.children.is_empty()
    }
}

/// A rooted binary tree with node heights measured backward from the most
/// recent tip.
#[derive(Debug, Clone, PartialEq)]
pub struct Genealogy {
    nodes: Vec<Node>,
    root: usize,
}

impl Genealogy {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn tips(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_tip())
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.is_tip())
    }

    pub fn num_tips(&self) -> usize {
        self.tips().count()
    }

    pub fn root_height(&self) -> f64 {
        self.nodes[self.root].height
    }

    /// Write the tree back out as Newick with branch lengths derived from
    /// the node heights.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, idx: usize, out: &mut String) {
        let node = &self.nodes[idx];
        if !node.is_tip() {
            out.push('(');
            for (i, &c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.write_node(c, out);
            }
            out.push(')');
        }
        if let Some(label) = &node.label {
            write_label(label, out);
        }
        if let Some(p) = node.parent {
            let _ = write!(out, ":{}", self.nodes[p].height - node.height);
        }
    }
}

fn write_label(label: &str, out: &mut String) {
    let plain = !label.is_empty()
        && label
            .chars()
            .all(|c| !c.is_whitespace() && !"()[]':;,".contains(c));
    if plain {
        out.push_str(label);
    } else {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    }
}

/// Parse a single Newick tree without tip dates.
pub fn parse_newick(text: &str) -> Result<Genealogy> {
    parse_newick_with_dates(text, DateSource::None)
}

/// Parse a single Newick tree, attaching tip dates from `dates`.
///
/// Node heights are computed from branch lengths and shifted so the most
/// recent tip sits at height 0. When dates are supplied, each tip's
/// branch-length height must agree with `max_date - date` (relative
/// tolerance 1e-6 of the tree height); the date-implied value is then used.
pub fn parse_newick_with_dates(text: &str, dates: DateSource<'_>) -> Result<Genealogy> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
        nodes: Vec::new(),
        lengths: Vec::new(),
    };
    let root = parser.parse_tree()?;
    let Parser { nodes, lengths, .. } = parser;
    finish(nodes, lengths, root, dates)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    nodes: Vec<Node>,
    lengths: Vec<(Option<f64>, usize)>,
}

impl Parser {
    fn peek(&mut self) -> Option<char> {
        self.skip_trivia();
        self.chars.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_whitespace() {
                self.pos += 1;
            } else if c == '[' {
                while let Some(&c) = self.chars.get(self.pos) {
                    self.pos += 1;
                    if c == ']' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(Error::parse(
                self.pos,
                format!("expected '{want}', found '{c}'"),
            )),
            None => Err(Error::parse(
                self.pos,
                format!("unexpected end of input, expected '{want}'"),
            )),
        }
    }

    fn parse_tree(&mut self) -> Result<usize> {
        let root = self.parse_subtree()?;
        self.expect(';')?;
        if let Some(c) = self.peek() {
            return Err(Error::parse(
                self.pos,
                format!("unexpected '{c}' after end of tree (only one tree per input)"),
            ));
        }
        Ok(root)
    }

    fn parse_subtree(&mut self) -> Result<usize> {
        let start = self.pos;
        let mut children = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                children.push(self.parse_subtree()?);
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => {
                        return Err(Error::parse(
                            self.pos,
                            format!("expected ',' or ')', found '{c}'"),
                        ))
                    }
                    None => {
                        return Err(Error::parse(
                            self.pos,
                            "unexpected end of input, unbalanced parentheses",
                        ))
                    }
                }
            }
        }
        let label = self.parse_label()?;
        let end = self.pos;
        if children.is_empty() && label.is_none() {
            return Err(match self.peek() {
                Some(c) => Error::parse(self.pos, format!("expected a tip label, found '{c}'")),
                None => Error::parse(self.pos, "unexpected end of input, expected a tip label"),
            });
        }
        let length = if self.peek() == Some(':') {
            self.pos += 1;
            Some(self.parse_number()?)
        } else {
            None
        };
        if !children.is_empty() && children.len() != 2 {
            return Err(Error::validation(format!(
                "node starting at position {start} has {} children; only binary trees are supported",
                children.len()
            )));
        }
        let idx = self.nodes.len();
        for &c in &children {
            self.nodes[c].parent = Some(idx);
        }
        self.nodes.push(Node {
            label,
            parent: None,
            children,
            height: 0.0,
            date: None,
        });
        self.lengths.push((length, end));
        Ok(idx)
    }

    fn parse_label(&mut self) -> Result<Option<String>> {
        match self.peek() {
            Some('\'') => {
                let open = self.pos;
                self.pos += 1;
                let mut label = String::new();
                loop {
                    match self.chars.get(self.pos).copied() {
                        Some('\'') if self.chars.get(self.pos + 1) == Some(&'\'') => {
                            label.push('\'');
                            self.pos += 2;
                        }
                        Some('\'') => {
                            self.pos += 1;
                            return Ok(Some(label));
                        }
                        Some(c) => {
                            label.push(c);
                            self.pos += 1;
                        }
                        None => {
                            return Err(Error::parse(
                                self.pos,
                                format!("unterminated quoted label opened at position {open}"),
                            ))
                        }
                    }
                }
            }
            _ => {
                let begin = self.pos;
                while let Some(&c) = self.chars.get(self.pos) {
                    if c.is_whitespace() || "()[]':;,".contains(c) {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == begin {
                    Ok(None)
                } else {
                    let raw: String = self.chars[begin..self.pos].iter().collect();
                    Ok(Some(raw.replace('_', " ")))
                }
            }
        }
    }

    fn parse_number(&mut self) -> Result<f64> {
        self.skip_trivia();
        let begin = self.pos;
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_ascii_digit() || "+-.eE".contains(c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let raw: String = self.chars[begin..self.pos].iter().collect();
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ if raw.is_empty() && self.pos >= self.chars.len() => Err(Error::parse(
                begin,
                "unexpected end of input, expected a branch length",
            )),
            _ => Err(Error::parse(begin, format!("bad branch length {raw:?}"))),
        }
    }
}

fn finish(
    mut nodes: Vec<Node>,
    lengths: Vec<(Option<f64>, usize)>,
    root: usize,
    dates: DateSource<'_>,
) -> Result<Genealogy> {
    // Depth of each node below the root, accumulated top-down. Children are
    // pushed before their parents, so walking indices downward from the root
    // visits every parent before its children.
    let mut depth = vec![0.0; nodes.len()];
    for idx in (0..nodes.len()).rev() {
        if idx == root {
            continue;
        }
        let (len, pos) = lengths[idx];
        let Some(len) = len else {
            return Err(Error::parse(
                pos,
                format!(
                    "missing branch length for node {}",
                    nodes[idx].label.as_deref().unwrap_or("(internal)")
                ),
            ));
        };
        if len < 0.0 {
            return Err(Error::validation(format!(
                "negative branch length {len} ending at position {pos}"
            )));
        }
        let parent = nodes[idx].parent.expect("non-root node has a parent");
        depth[idx] = depth[parent] + len;
    }
    let max_depth = nodes
        .iter()
        .zip(&depth)
        .filter(|(n, _)| n.is_tip())
        .map(|(_, &d)| d)
        .fold(0.0_f64, f64::max);
    for (node, d) in nodes.iter_mut().zip(&depth) {
        node.height = max_depth - d;
    }
    let scale = max_depth.max(1.0);

    match dates {
        DateSource::None => snap_tip_heights(&mut nodes, 1e-9 * scale),
        DateSource::Table(table) => {
            for node in nodes.iter_mut().filter(|n| n.is_tip()) {
                let label = node.label.as_deref().unwrap_or_default();
                let date = table.get(label).ok_or_else(|| {
                    Error::validation(format!("no sampling date for tip {label:?}"))
                })?;
                node.date = Some(date);
            }
            apply_dates(&mut nodes, 1e-6 * scale)?;
        }
        DateSource::LabelSuffix(delim) => {
            for node in nodes.iter_mut().filter(|n| n.is_tip()) {
                let label = node.label.clone().unwrap_or_default();
                let (name, date) = label.rsplit_once(delim).ok_or_else(|| {
                    Error::validation(format!("tip {label:?} has no '{delim}' date suffix"))
                })?;
                let date: f64 = date.trim().parse().map_err(|_| {
                    Error::validation(format!("tip {label:?}: bad date suffix {date:?}"))
                })?;
                node.label = Some(name.to_string());
                node.date = Some(date);
            }
            apply_dates(&mut nodes, 1e-6 * scale)?;
        }
    }

    for node in nodes.iter().filter(|n| !n.is_tip()) {
        for &c in &node.children {
            if node.height <= nodes[c].height {
                return Err(Error::validation(format!(
                    "internal node at height {} does not exceed child height {} (zero-length branch)",
                    node.height, nodes[c].height
                )));
            }
        }
    }
    Ok(Genealogy { nodes, root })
}

/// Collapse floating-point noise so tips meant to share a sampling time
/// share an exact height.
fn snap_tip_heights(nodes: &mut [Node], tol: f64) {
    let mut heights: Vec<f64> = nodes.iter().filter(|n| n.is_tip()).map(|n| n.height).collect();
    heights.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::new();
    for h in heights {
        match reps.last() {
            Some(&r) if h - r <= tol => {}
            _ => reps.push(if reps.is_empty() && h <= tol { 0.0 } else { h }),
        }
    }
    for node in nodes.iter_mut().filter(|n| n.is_tip()) {
        let i = reps.partition_point(|&r| r <= node.height);
        node.height = reps[i.saturating_sub(1)];
    }
}

fn apply_dates(nodes: &mut [Node], tol: f64) -> Result<()> {
    let max_date = nodes
        .iter()
        .filter_map(|n| n.date)
        .fold(f64::NEG_INFINITY, f64::max);
    for node in nodes.iter_mut().filter(|n| n.is_tip()) {
        let date = node.date.expect("all tips dated");
        let implied = max_date - date;
        if implied < 0.0 || (implied - node.height).abs() > tol {
            return Err(Error::validation(format!(
                "tip {:?}: sampling date implies height {implied}, branch lengths give {}",
                node.label.as_deref().unwrap_or_default(),
                node.height
            )));
        }
        node.height = implied;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_tip_tree() {
        let g = parse_newick("(A:1.0,B:1.0);").unwrap();
        assert_eq!(g.num_tips(), 2);
        assert!(g.tips().all(|t| t.height == 0.0));
        assert_eq!(g.root_height(), 1.0);
    }

    #[test]
    fn nested_tree_heights() {
        let g = parse_newick("((A:0.3,B:0.3):0.7,C:1.0);").unwrap();
        assert_eq!(g.root_height(), 1.0);
        let inner: Vec<f64> = g
            .internal_nodes()
            .filter(|n| n.parent.is_some())
            .map(|n| n.height)
            .collect();
        assert_eq!(inner.len(), 1);
        assert!((inner[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_input_reports_end_of_input() {
        let text = "(A:1.0,B:1.0";
        match parse_newick(text) {
            Err(Error::Parse { position, message }) => {
                assert_eq!(position, text.len());
                assert!(message.contains("end of input"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_branch_length_is_an_error() {
        assert!(matches!(
            parse_newick("(A,B:1.0);"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn multifurcation_rejected() {
        assert!(matches!(
            parse_newick("(A:1,B:1,C:1);"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn zero_length_internal_branch_rejected() {
        assert!(matches!(
            parse_newick("((A:1,B:1):0,C:1);"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(parse_newick("(A:1,B:1);(C:1,D:1);").is_err());
    }

    #[test]
    fn comments_quotes_and_whitespace() {
        let g = parse_newick(" ( 'A b':1.0 [&rate=1], B_c : 1.0 ) root ;").unwrap();
        let labels: Vec<_> = g.tips().map(|t| t.label.clone().unwrap()).collect();
        assert_eq!(labels, vec!["A b".to_string(), "B c".to_string()]);
    }

    #[test]
    fn label_suffix_dates() {
        let g = parse_newick_with_dates(
            "((A|2000:0.3,B|2000:0.3):0.7,C|2000.5:1.5);",
            DateSource::LabelSuffix('|'),
        )
        .unwrap();
        let c = g.tips().find(|t| t.label.as_deref() == Some("C")).unwrap();
        assert_eq!(c.height, 0.0);
        let a = g.tips().find(|t| t.label.as_deref() == Some("A")).unwrap();
        assert_eq!(a.height, 0.5);
        assert_eq!(a.date, Some(2000.0));
    }

    #[test]
    fn inconsistent_dates_rejected() {
        let mut dates = TipDates::new();
        dates.insert("A", 2000.0);
        dates.insert("B", 2001.0);
        let err = parse_newick_with_dates("(A:1.0,B:1.0);", DateSource::Table(&dates));
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn tsv_table_with_header() {
        let t = TipDates::from_tsv("label\tdate\nA\t1993.0\n\nB\t1990.5\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("B"), Some(1990.5));
        assert!(TipDates::from_tsv("A\t1\nB\tx\n").is_err());
    }

    #[test]
    fn round_trip_preserves_heights() {
        let text = "((A:0.3,B:0.3):0.7,(C:0.45,D:0.2):0.55);";
        let g = parse_newick(text).unwrap();
        let again = parse_newick(&g.to_newick()).unwrap();
        for (a, b) in g.nodes().iter().zip(again.nodes()) {
            assert!((a.height - b.height).abs() < 1e-12);
        }
    }
}
