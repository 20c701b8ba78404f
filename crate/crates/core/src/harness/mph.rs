//! MPH v1: a line-oriented multi-personality hypergraph format.
//!
//! ```text
//! MPH 1
//! <N> <M> <R>
//! <locked 0|1> <k> <k groups of R weights>     (N node lines)
//! <weight> <pincount> <pins, 1-based>          (M edge lines)
//! ```
//!
//! Lines starting with `%` and blank lines are ignored. The writer emits the
//! canonical form: no comments, single spaces, sorted pins, trailing newline.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Hyperedge, Hypergraph, Node};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next content line as (1-based line number, tokens).
    fn next(&mut self, expected: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok((i + 1, t.split_whitespace().collect()));
        }
        Err(Error::Truncated(expected.to_string()))
    }

    fn rest_is_empty(&mut self) -> Result<()> {
        match self.next("") {
            Ok((line, _)) => Err(Error::Parse { line, msg: "unexpected content after the last edge".into() }),
            Err(_) => Ok(()),
        }
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} '{tok}'") })
}

pub fn parse_mph(text: &str) -> Result<Hypergraph> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (line, head) = lines.next("header 'MPH 1'")?;
    if head != ["MPH", "1"] {
        return Err(Error::Parse { line, msg: "expected header 'MPH 1'".into() });
    }
    let (line, dims) = lines.next("size line '<N> <M> <R>'")?;
    if dims.len() != 3 {
        return Err(Error::Parse { line, msg: "expected '<N> <M> <R>'".into() });
    }
    let n: usize = num(line, dims.first(), "node count")?;
    let m: usize = num(line, dims.get(1), "edge count")?;
    let r: usize = num(line, dims.get(2), "resource count")?;

    let mut nodes = Vec::with_capacity(n);
    for v in 0..n {
        let (line, t) = lines.next(&format!("node line {} of {n}", v + 1))?;
        let locked: u8 = num(line, t.first(), "lock flag")?;
        if locked > 1 {
            return Err(Error::Parse { line, msg: "lock flag must be 0 or 1".into() });
        }
        let k: usize = num(line, t.get(1), "personality count")?;
        if t.len() != 2 + k * r {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} weights, found {}", k * r, t.len().saturating_sub(2)),
            });
        }
        let mut pers = Vec::with_capacity(k);
        for p in 0..k {
            let w = (0..r)
                .map(|i| num::<i64>(line, t.get(2 + p * r + i), "weight"))
                .collect::<Result<Vec<_>>>()?;
            pers.push(w);
        }
        nodes.push(if locked == 1 { Node::locked(pers) } else { Node::new(pers) });
    }
    let mut edges = Vec::with_capacity(m);
    for e in 0..m {
        let (line, t) = lines.next(&format!("edge line {} of {m}", e + 1))?;
        let weight: i64 = num(line, t.first(), "edge weight")?;
        let count: usize = num(line, t.get(1), "pin count")?;
        if t.len() != 2 + count {
            return Err(Error::Parse { line, msg: format!("expected {count} pins, found {}", t.len().saturating_sub(2)) });
        }
        let pins = (0..count)
            .map(|i| {
                let p: usize = num(line, t.get(2 + i), "pin")?;
                if p == 0 {
                    return Err(Error::Parse { line, msg: "pins are 1-based".into() });
                }
                Ok(p - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        edges.push(Hyperedge::new(weight, pins));
    }
    lines.rest_is_empty()?;
    Hypergraph::build(r, nodes, edges)
}

pub fn to_mph_string(graph: &Hypergraph) -> String {
    let mut out = String::new();
    let r = graph.resource_count();
    writeln!(out, "MPH 1\n{} {} {}", graph.node_count(), graph.edge_count(), r).unwrap();
    for v in 0..graph.node_count() {
        write!(out, "{} {}", graph.is_locked(v) as u8, graph.personality_count(v)).unwrap();
        for p in 0..graph.personality_count(v) {
            for w in graph.weights(v, p) {
                write!(out, " {w}").unwrap();
            }
        }
        out.push('\n');
    }
    for e in 0..graph.edge_count() {
        let mut pins: Vec<u32> = graph.pins(e).to_vec();
        pins.sort_unstable();
        write!(out, "{} {}", graph.edge_weight(e), pins.len()).unwrap();
        for p in pins {
            write!(out, " {}", p + 1).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_mph(path: impl AsRef<Path>) -> Result<Hypergraph> {
    parse_mph(&std::fs::read_to_string(path)?)
}

pub fn write_mph(graph: &Hypergraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_mph_string(graph))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_graph;

    const EXAMPLE: &str = "MPH 1
2 1 2
% N node lines: <locked:0|1> <k> then k groups of R integers
0 2  4 0  0 2
0 1  3 0
% M edge lines: <weight> <pincount> <pins...>
5 2 1 2
";

    const CANONICAL: &str = "MPH 1\n2 1 2\n0 2 4 0 0 2\n0 1 3 0\n5 2 1 2\n";

    #[test]
    fn example_file() {
        let g = parse_mph(EXAMPLE).unwrap();
        assert_eq!((g.node_count(), g.edge_count(), g.resource_count()), (2, 1, 2));
        assert_eq!(g.combination_count(), 2.0);
        assert_eq!(g.weights(0, 1), &[0, 2]);
        assert_eq!(g.pins(0), &[0, 1]);
        assert_eq!(to_mph_string(&g), CANONICAL);
        assert_eq!(to_mph_string(&parse_mph(CANONICAL).unwrap()), CANONICAL);
    }

    #[test]
    fn truncated_and_malformed() {
        let cut = "MPH 1\n2 1 2\n0 2 4 0 0 2\n";
        match parse_mph(cut) {
            Err(Error::Truncated(what)) => assert!(what.contains("node line 2"), "{what}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_mph("MPH 1\n2 1 2\n0 2 4 0 0 2\n0 1 3 0\n"), Err(Error::Truncated(w)) if w.contains("edge")));
        assert!(matches!(parse_mph(""), Err(Error::Truncated(_))));
        assert!(matches!(parse_mph("MPH 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_mph("MPH 1\n1 0 1\n0 1 x\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_mph("MPH 1\n2 1 1\n0 1 1\n0 1 1\n1 2 1 3\n"), Err(Error::PinOutOfRange { .. })));
        assert!(matches!(parse_mph("MPH 1\n1 0 1\n0 1 1\n0 1 1\n"), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn round_trip_random_graphs() {
        for seed in 0..50 {
            let g = random_graph(seed, 9, 12, 3, 3);
            let text = to_mph_string(&g);
            let back = parse_mph(&text).unwrap();
            assert_eq!(to_mph_string(&back), text);
            assert_eq!(back.node_count(), g.node_count());
            for v in 0..g.node_count() {
                assert_eq!(back.is_locked(v), g.is_locked(v));
                assert_eq!(back.personality_count(v), g.personality_count(v));
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.mph");
        let g = parse_mph(CANONICAL).unwrap();
        write_mph(&g, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), CANONICAL);
        assert_eq!(read_mph(&path).unwrap(), g);
    }
}
