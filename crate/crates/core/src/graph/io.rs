//! Edge-list text format.
//!
//! ```text
//! # comment
//! n=4
//! 0,1
//! 1,2
//! ```
//!
//! The header `n=<count>` must precede the edges; pairs are 0-indexed.
//! Comments start with `#` and may follow data on the same line. The writer
//! emits the canonical form: header, then sorted pairs with `i < j`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    read_edge_list(text.as_bytes())
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        if let Some(rest) = content.strip_prefix("n=") {
            if n.is_some() {
                return Err(parse_err("duplicate header".into()));
            }
            n = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| parse_err(format!("bad node count `{rest}`")))?,
            );
            continue;
        }
        if n.is_none() {
            return Err(parse_err("missing `n=<count>` header before edges".into()));
        }
        let (a, b) = content
            .split_once(',')
            .ok_or_else(|| parse_err(format!("expected `i,j`, got `{content}`")))?;
        let i = a
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad node `{a}`")))?;
        let j = b
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad node `{b}`")))?;
        edges.push((i, j));
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `n=<count>` header".into(),
    })?;
    Graph::new(n, edges)
}

pub fn load_edge_list(path: &Path) -> Result<Graph> {
    let file = std::fs::File::open(path)?;
    read_edge_list(std::io::BufReader::new(file))
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(8 + 12 * g.edge_count());
    let _ = writeln!(out, "n={}", g.node_count());
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{i},{j}");
    }
    out
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    w.write_all(format_edge_list(g).as_bytes())?;
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<()> {
    std::fs::write(path, format_edge_list(g))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_canonicalises() {
        let text = "# a ring\nn=4\n1,0  # reversed\n\n1,2\n2,3\n3,0\n0,1\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(format_edge_list(&g), "n=4\n0,1\n0,3\n1,2\n2,3\n");
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            parse_edge_list("0,1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("n=3\n0;1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("n=3\n0,0\n"),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            parse_edge_list("n=3\n0,5\n"),
            Err(Error::NodeOutOfRange { .. })
        ));
        assert!(matches!(
            parse_edge_list("# nothing\n"),
            Err(Error::Parse { .. })
        ));
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(n in 1usize..30, raw in proptest::collection::vec((0usize..30, 0usize..30), 0..60)) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
            let g = Graph::new(n, edges).unwrap();
            let back = parse_edge_list(&format_edge_list(&g)).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
