//! Line-based tree files, their serializer, and a seeded random
//! instance generator.
//!
//! The format is deliberately plain: a kind header, `node` lines, then
//! `edge` lines. `#` starts a comment line, blank lines are skipped, and
//! identifiers are arbitrary whitespace-free tokens. Numbers accept
//! integer, fraction (`7/4`), and decimal (`2.5`, converted exactly)
//! literals.
//!
//! ```text
//! mergetree            metrictree
//! node a 0             node u
//! node r 5             node v
//! edge a r             edge u v 5
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::Rational;
use crate::tree::{
    validate_merge_tree, validate_metric_tree, MergeTree, MetricTree, TreeError,
};

/// Failure to read a tree out of a file or text.
#[derive(Debug, Error)]
pub enum IoError {
    /// The file could not be read at all.
    #[error("cannot read {path}: {source}")]
    Read {
        /// The offending path.
        path: String,
        /// The underlying error.
        source: std::io::Error,
    },
    /// A malformed line.
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        /// 1-based line number.
        line: usize,
        /// 1-based column of the offending token.
        column: usize,
        /// What was wrong.
        message: String,
    },
    /// The header names no known tree kind.
    #[error("line {line}: unknown kind {found:?} (expected \"mergetree\" or \"metrictree\")")]
    UnknownKind {
        /// 1-based line number of the header.
        line: usize,
        /// The token found instead.
        found: String,
    },
    /// The lines parsed but the tree they describe is invalid.
    #[error(transparent)]
    Invalid(Box<TreeError>),
}

// Boxed to keep the error (and with it every parse result) small.
impl From<TreeError> for IoError {
    fn from(e: TreeError) -> IoError {
        IoError::Invalid(Box::new(e))
    }
}

/// A successfully parsed tree of either kind.
#[derive(Clone, Debug)]
pub enum ParsedTree {
    /// A rooted tree with heights.
    Merge(MergeTree),
    /// An unrooted tree with edge lengths.
    Metric(MetricTree),
}

impl ParsedTree {
    /// The kind header this tree serializes under.
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedTree::Merge(_) => "mergetree",
            ParsedTree::Metric(_) => "metrictree",
        }
    }

    /// The merge tree, if that is what was parsed.
    pub fn into_merge(self) -> Option<MergeTree> {
        match self {
            ParsedTree::Merge(t) => Some(t),
            ParsedTree::Metric(_) => None,
        }
    }

    /// The metric tree, if that is what was parsed.
    pub fn into_metric(self) -> Option<MetricTree> {
        match self {
            ParsedTree::Metric(t) => Some(t),
            ParsedTree::Merge(_) => None,
        }
    }
}

/// Reads and parses a tree file.
pub fn parse_tree_file(path: &Path) -> Result<ParsedTree, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_tree_text(&text)
}

// (1-based column, token) pairs of one line.
fn tokens_of(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> IoError {
    IoError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_rational(line: usize, column: usize, token: &str) -> Result<Rational, IoError> {
    Rational::parse(token).map_err(|e| syntax(line, column, e.to_string()))
}

/// Parses tree file text. The grammar: a `mergetree` or `metrictree`
/// header, `node` lines, then `edge` lines; comments (`#`) and blank
/// lines are skipped anywhere.
pub fn parse_tree_text(text: &str) -> Result<ParsedTree, IoError> {
    let mut kind: Option<(bool, usize)> = None; // (is_merge, header line)
    let mut merge_nodes: Vec<(String, Rational)> = Vec::new();
    let mut metric_nodes: Vec<String> = Vec::new();
    let mut merge_edges: Vec<(String, String)> = Vec::new();
    let mut metric_edges: Vec<(String, String, Rational)> = Vec::new();
    let mut seen_edge = false;
    let mut line_count = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        line_count = line;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let tokens = tokens_of(raw);
        let Some(is_merge) = kind.map(|(k, _)| k) else {
            let (_, token) = tokens[0];
            let is_merge = match token {
                "mergetree" => true,
                "metrictree" => false,
                _ => {
                    return Err(IoError::UnknownKind {
                        line,
                        found: token.to_string(),
                    })
                }
            };
            if let Some(&(extra_col, extra)) = tokens.get(1) {
                return Err(syntax(
                    line,
                    extra_col,
                    format!("unexpected token {extra:?} after the kind header"),
                ));
            }
            kind = Some((is_merge, line));
            continue;
        };
        let (keyword_col, keyword) = tokens[0];
        match (keyword, is_merge) {
            ("node", true) => {
                if seen_edge {
                    return Err(syntax(line, keyword_col, "node line after edge lines"));
                }
                let [(_, name), (hcol, htok)] = expect_args(line, &tokens, 2, "node <id> <height>")?
                    .try_into()
                    .expect("exactly two arguments");
                merge_nodes.push((name.to_string(), parse_rational(line, hcol, htok)?));
            }
            ("node", false) => {
                if seen_edge {
                    return Err(syntax(line, keyword_col, "node line after edge lines"));
                }
                let [(_, name)] = expect_args(line, &tokens, 1, "node <id>")?
                    .try_into()
                    .expect("exactly one argument");
                metric_nodes.push(name.to_string());
            }
            ("edge", true) => {
                seen_edge = true;
                let [(_, child), (_, parent)] =
                    expect_args(line, &tokens, 2, "edge <child-id> <parent-id>")?
                        .try_into()
                        .expect("exactly two arguments");
                merge_edges.push((child.to_string(), parent.to_string()));
            }
            ("edge", false) => {
                seen_edge = true;
                let [(_, a), (_, b), (lcol, ltok)] =
                    expect_args(line, &tokens, 3, "edge <id> <id> <length>")?
                        .try_into()
                        .expect("exactly three arguments");
                metric_edges.push((
                    a.to_string(),
                    b.to_string(),
                    parse_rational(line, lcol, ltok)?,
                ));
            }
            _ => {
                return Err(syntax(
                    line,
                    keyword_col,
                    format!("unknown keyword {keyword:?} (expected \"node\" or \"edge\")"),
                ));
            }
        }
    }
    match kind {
        None => Err(syntax(line_count + 1, 1, "missing kind header")),
        Some((true, _)) => Ok(ParsedTree::Merge(validate_merge_tree(
            &merge_nodes,
            &merge_edges,
        )?)),
        Some((false, _)) => Ok(ParsedTree::Metric(validate_metric_tree(
            &metric_nodes,
            &metric_edges,
        )?)),
    }
}

// The argument tokens after the keyword, exactly `count` of them.
fn expect_args<'a>(
    line: usize,
    tokens: &[(usize, &'a str)],
    count: usize,
    usage: &str,
) -> Result<Vec<(usize, &'a str)>, IoError> {
    if tokens.len() != count + 1 {
        let column = if tokens.len() > count + 1 {
            tokens[count + 1].0
        } else {
            tokens.last().expect("keyword token exists").0
        };
        return Err(syntax(
            line,
            column,
            format!(
                "expected {count} arguments as in `{usage}`, found {}",
                tokens.len() - 1
            ),
        ));
    }
    Ok(tokens[1..].to_vec())
}

/// Serializes a merge tree in the file grammar. Node identifiers must be
/// whitespace-free (parsed trees always are).
pub fn serialize_merge_tree(t: &MergeTree) -> String {
    let mut out = String::from("mergetree\n");
    for v in t.node_ids() {
        out.push_str(&format!("node {} {}\n", t.name(v), t.height(v)));
    }
    for (child, parent) in t.edge_pairs() {
        out.push_str(&format!("edge {} {}\n", t.name(child), t.name(parent)));
    }
    out
}

/// Serializes a metric tree in the file grammar. Node identifiers must
/// be whitespace-free (parsed trees always are).
pub fn serialize_metric_tree(m: &MetricTree) -> String {
    let mut out = String::from("metrictree\n");
    for v in m.node_ids() {
        out.push_str(&format!("node {}\n", m.name(v)));
    }
    for (a, b, length) in m.edges() {
        out.push_str(&format!("edge {} {} {}\n", m.name(*a), m.name(*b), length));
    }
    out
}

/// Which kind of tree to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// Rooted tree with integer heights.
    Merge,
    /// Unrooted tree with positive integer edge lengths.
    Metric,
}

/// Parameters for the random tree generator.
#[derive(Clone, Debug)]
pub struct GenSpec {
    /// Which kind of tree.
    pub kind: GenKind,
    /// Node count, at least 1.
    pub nodes: usize,
    /// RNG seed; equal seeds give byte-identical output.
    pub seed: u64,
    /// Smallest height (merge) or smallest length (metric, clamped to
    /// at least 1).
    pub low: i64,
    /// Largest height or length, inclusive.
    pub high: i64,
    /// Most children per node (merge) or most neighbors per node
    /// (metric).
    pub max_degree: usize,
}

/// Why generation was impossible.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    /// Zero nodes requested.
    #[error("node count must be at least 1")]
    NoNodes,
    /// The sampling range is empty.
    #[error("empty sampling range: low {low} exceeds high {high}")]
    EmptyRange {
        /// Lower bound given.
        low: i64,
        /// Upper bound given.
        high: i64,
    },
    /// Metric lengths must be positive but the range allows none.
    #[error("edge lengths need a positive range; high {high} is below 1")]
    NonPositiveLengths {
        /// Upper bound given.
        high: i64,
    },
    /// Every potential attachment point is saturated or at the floor.
    #[error(
        "no eligible attachment point for node {index}: every candidate \
         is saturated or at the height floor"
    )]
    Saturated {
        /// Index of the node that could not be placed.
        index: usize,
    },
}

/// Generates a random tree file deterministically from the seed.
///
/// Merge trees start from a root at the top of the height range and
/// attach each new node below a uniformly chosen unsaturated node with a
/// strictly smaller uniform integer height. Metric trees attach each new
/// node to a uniformly chosen unsaturated node with a positive uniform
/// integer length.
pub fn generate_tree_text(spec: &GenSpec) -> Result<String, GenError> {
    if spec.nodes == 0 {
        return Err(GenError::NoNodes);
    }
    if spec.low > spec.high {
        return Err(GenError::EmptyRange {
            low: spec.low,
            high: spec.high,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        GenKind::Merge => generate_merge(spec, &mut rng),
        GenKind::Metric => generate_metric(spec, &mut rng),
    }
}

fn generate_merge(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<String, GenError> {
    let mut heights: Vec<i64> = vec![spec.high];
    let mut parents: Vec<usize> = vec![usize::MAX];
    let mut child_counts: Vec<usize> = vec![0];
    for index in 1..spec.nodes {
        let eligible: Vec<usize> = (0..heights.len())
            .filter(|&v| heights[v] > spec.low && child_counts[v] < spec.max_degree)
            .collect();
        if eligible.is_empty() {
            return Err(GenError::Saturated { index });
        }
        let parent = eligible[rng.random_range(0..eligible.len())];
        let height = rng.random_range(spec.low..=heights[parent] - 1);
        heights.push(height);
        parents.push(parent);
        child_counts[parent] += 1;
        child_counts.push(0);
    }
    let mut out = String::from("mergetree\n");
    for (v, h) in heights.iter().enumerate() {
        out.push_str(&format!("node n{v} {h}\n"));
    }
    for (v, &p) in parents.iter().enumerate().skip(1) {
        out.push_str(&format!("edge n{v} n{p}\n"));
    }
    Ok(out)
}

fn generate_metric(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<String, GenError> {
    if spec.high < 1 {
        return Err(GenError::NonPositiveLengths { high: spec.high });
    }
    let low = spec.low.max(1);
    let mut degrees: Vec<usize> = vec![0];
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    for index in 1..spec.nodes {
        let eligible: Vec<usize> = (0..degrees.len())
            .filter(|&v| degrees[v] < spec.max_degree)
            .collect();
        if eligible.is_empty() {
            return Err(GenError::Saturated { index });
        }
        let anchor = eligible[rng.random_range(0..eligible.len())];
        let length = rng.random_range(low..=spec.high);
        edges.push((anchor, index, length));
        degrees[anchor] += 1;
        degrees.push(1);
    }
    let mut out = String::from("metrictree\n");
    for v in 0..spec.nodes {
        out.push_str(&format!("node n{v}\n"));
    }
    for (a, b, length) in edges {
        out.push_str(&format!("edge n{a} n{b} {length}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_two_kinds() {
        let merge = parse_tree_text("mergetree\nnode a 0\nnode r 5\nedge a r\n").unwrap();
        let ParsedTree::Merge(t) = merge else {
            panic!("expected a merge tree")
        };
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.height(t.root()), &Rational::from_integer(5));

        let metric = parse_tree_text("metrictree\nnode u\nnode v\nedge u v 5\n").unwrap();
        let ParsedTree::Metric(m) = metric else {
            panic!("expected a metric tree")
        };
        assert_eq!(m.node_count(), 2);
        assert_eq!(
            m.geodesic_distance(0, 1),
            Rational::from_integer(5)
        );
    }

    #[test]
    fn skips_comments_and_blanks_and_reads_decimals_exactly() {
        let text = "# a comment\n\nmergetree\n  # indented comment\nnode a 2.5\nnode r 7/2\n\nedge a r\n";
        let ParsedTree::Merge(t) = parse_tree_text(text).unwrap() else {
            panic!("expected a merge tree")
        };
        assert_eq!(t.height(0), &Rational::new(5, 2));
        assert_eq!(t.height(1), &Rational::new(7, 2));
    }

    #[test]
    fn rejects_malformed_lines_with_positions() {
        match parse_tree_text("mergetree\nnode a\n") {
            Err(IoError::Syntax { line: 2, .. }) => {}
            other => panic!("expected a syntax error, got {other:?}"),
        }
        match parse_tree_text("mergetree\nnode a 1e3\n") {
            Err(IoError::Syntax {
                line: 2,
                column: 8,
                ..
            }) => {}
            other => panic!("expected a syntax error at the height, got {other:?}"),
        }
        match parse_tree_text("mergetree\nvertex a 3\n") {
            Err(IoError::Syntax {
                line: 2, column: 1, ..
            }) => {}
            other => panic!("expected an unknown-keyword error, got {other:?}"),
        }
        match parse_tree_text("forest\nnode a 3\n") {
            Err(IoError::UnknownKind { line: 1, found }) => assert_eq!(found, "forest"),
            other => panic!("expected an unknown-kind error, got {other:?}"),
        }
        match parse_tree_text("# nothing\n\n") {
            Err(IoError::Syntax {
                message, line: 3, ..
            }) => assert!(message.contains("missing kind header")),
            other => panic!("expected a missing-header error, got {other:?}"),
        }
        match parse_tree_text("mergetree\nnode a 0\nnode r 5\nedge a r\nnode b 1\n") {
            Err(IoError::Syntax { line: 5, message, .. }) => {
                assert!(message.contains("after edge lines"))
            }
            other => panic!("expected an ordering error, got {other:?}"),
        }
    }

    #[test]
    fn delegates_validation_failures() {
        match parse_tree_text("mergetree\nnode a 3\nnode r 3\nedge a r\n") {
            Err(IoError::Invalid(e)) => {
                assert!(matches!(*e, TreeError::EdgeHeightOrder { .. }), "got {e:?}")
            }
            other => panic!("expected a height-order error, got {other:?}"),
        }
        match parse_tree_text("metrictree\nnode u\nnode v\nedge u v 0\n") {
            Err(IoError::Invalid(e)) => {
                assert!(matches!(*e, TreeError::NonPositiveLength { .. }), "got {e:?}")
            }
            other => panic!("expected a length error, got {other:?}"),
        }
    }

    #[test]
    fn serialization_round_trips() {
        let text = "mergetree\nnode a 0\nnode b 1/2\nnode m 2\nnode r 9/2\nedge a m\nedge b m\nedge m r\n";
        let ParsedTree::Merge(t) = parse_tree_text(text).unwrap() else {
            panic!("expected a merge tree")
        };
        let written = serialize_merge_tree(&t);
        assert_eq!(written, text);
        let reparsed = parse_tree_text(&written).unwrap();
        assert_eq!(serialize_merge_tree(&reparsed.into_merge().unwrap()), written);

        let text = "metrictree\nnode u\nnode v\nnode w\nedge u v 5\nedge v w 7/3\n";
        let ParsedTree::Metric(m) = parse_tree_text(text).unwrap() else {
            panic!("expected a metric tree")
        };
        let written = serialize_metric_tree(&m);
        assert_eq!(written, text);
    }

    #[test]
    fn generator_is_deterministic_and_in_range() {
        let spec = GenSpec {
            kind: GenKind::Merge,
            nodes: 7,
            seed: 42,
            low: 0,
            high: 8,
            max_degree: 3,
        };
        let once = generate_tree_text(&spec).unwrap();
        let twice = generate_tree_text(&spec).unwrap();
        assert_eq!(once, twice);
        let ParsedTree::Merge(t) = parse_tree_text(&once).unwrap() else {
            panic!("expected a merge tree")
        };
        assert_eq!(t.node_count(), 7);
        for v in t.node_ids() {
            assert!(t.height(v) >= &Rational::zero());
            assert!(t.height(v) <= &Rational::from_integer(8));
        }

        let single = generate_tree_text(&GenSpec {
            kind: GenKind::Merge,
            nodes: 1,
            seed: 7,
            low: 0,
            high: 8,
            max_degree: 3,
        })
        .unwrap();
        assert_eq!(single, "mergetree\nnode n0 8\n");
    }

    #[test]
    fn generator_builds_connected_positive_metric_trees() {
        let spec = GenSpec {
            kind: GenKind::Metric,
            nodes: 5,
            seed: 3,
            low: 1,
            high: 9,
            max_degree: 4,
        };
        let text = generate_tree_text(&spec).unwrap();
        let ParsedTree::Metric(m) = parse_tree_text(&text).unwrap() else {
            panic!("expected a metric tree")
        };
        assert_eq!(m.node_count(), 5);
        assert_eq!(m.edges().len(), 4);
        for (_, _, length) in m.edges() {
            assert!(length > &Rational::zero());
        }
    }

    #[test]
    fn generator_reports_infeasible_constraints() {
        assert_eq!(
            generate_tree_text(&GenSpec {
                kind: GenKind::Merge,
                nodes: 0,
                seed: 0,
                low: 0,
                high: 8,
                max_degree: 3,
            }),
            Err(GenError::NoNodes)
        );
        assert_eq!(
            generate_tree_text(&GenSpec {
                kind: GenKind::Merge,
                nodes: 2,
                seed: 0,
                low: 9,
                high: 8,
                max_degree: 3,
            }),
            Err(GenError::EmptyRange { low: 9, high: 8 })
        );
        // Root at the floor: nothing can attach below it.
        assert_eq!(
            generate_tree_text(&GenSpec {
                kind: GenKind::Merge,
                nodes: 2,
                seed: 0,
                low: 8,
                high: 8,
                max_degree: 3,
            }),
            Err(GenError::Saturated { index: 1 })
        );
        // A metric path saturates both ends under degree cap 1.
        assert_eq!(
            generate_tree_text(&GenSpec {
                kind: GenKind::Metric,
                nodes: 3,
                seed: 0,
                low: 1,
                high: 4,
                max_degree: 1,
            }),
            Err(GenError::Saturated { index: 2 })
        );
        assert_eq!(
            generate_tree_text(&GenSpec {
                kind: GenKind::Metric,
                nodes: 2,
                seed: 0,
                low: 0,
                high: 0,
                max_degree: 2,
            }),
            Err(GenError::NonPositiveLengths { high: 0 })
        );
    }
}
