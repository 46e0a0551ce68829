//! Versioned text serialisation of a [`Graph`].
//!
//! ```text
//! pswg 1 <L> <N> <n> <c> <alpha> <dbar> <seed>
//! <id> <x> <y>            (N lines)
//! local <M1>
//! <u> <v>                 (M1 lines, u < v)
//! shortcut <M2>
//! <u> <v>                 (M2 lines, u < v)
//! ```
//!
//! Reals are written in positional decimal with 17 significant digits, which
//! round-trips every `f64`; reading then writing a file reproduces it byte
//! for byte.

use std::io::{BufRead, Write};

use crate::error::FormatError;
use crate::geometry::TorusPoint;

use super::{Graph, ModelParams, NodeId};

pub const MAGIC: &str = "pswg";
pub const VERSION: u32 = 1;

/// Positional decimal with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let sci = format!("{x:.16e}");
    let exponent: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific formatting always has an exponent");
    let precision = (16 - exponent).max(0) as usize;
    format!("{x:.precision$}")
}

pub fn write_graph<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    let p = graph.params();
    writeln!(
        out,
        "{MAGIC} {VERSION} {} {} {} {} {} {} {}",
        format_sig17(p.side()),
        graph.len(),
        p.n(),
        format_sig17(p.c()),
        format_sig17(p.alpha()),
        format_sig17(p.dbar()),
        p.seed()
    )?;
    for node in graph.nodes() {
        writeln!(
            out,
            "{} {} {}",
            node.id,
            format_sig17(node.pos.x),
            format_sig17(node.pos.y)
        )?;
    }
    for (label, adj) in [
        ("local", graph.local_adjacency()),
        ("shortcut", graph.shortcut_adjacency()),
    ] {
        writeln!(out, "{label} {}", adj.edge_count())?;
        for (u, v) in adj.edges() {
            writeln!(out, "{u} {v}")?;
        }
    }
    Ok(())
}

pub fn to_text(graph: &Graph) -> String {
    let mut buf = Vec::new();
    write_graph(graph, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("format is ASCII")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self, what: &str) -> Result<(usize, String), FormatError> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok((self.number, line?)),
            None => Err(FormatError::syntax(
                self.number,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }
}

fn field<T: std::str::FromStr>(line: usize, token: Option<&str>, name: &str) -> Result<T, FormatError> {
    let token = token.ok_or_else(|| FormatError::syntax(line, format!("missing {name}")))?;
    token
        .parse()
        .map_err(|_| FormatError::syntax(line, format!("invalid {name} `{token}`")))
}

fn no_trailing(line: usize, mut tokens: std::str::SplitAsciiWhitespace<'_>) -> Result<(), FormatError> {
    match tokens.next() {
        Some(t) => Err(FormatError::syntax(line, format!("unexpected trailing token `{t}`"))),
        None => Ok(()),
    }
}

fn read_edges<R: BufRead>(
    lines: &mut Lines<R>,
    label: &str,
    node_count: usize,
) -> Result<Vec<(NodeId, NodeId)>, FormatError> {
    let (no, header) = lines.next_line(label)?;
    let mut tokens = header.split_ascii_whitespace();
    if tokens.next() != Some(label) {
        return Err(FormatError::syntax(no, format!("expected `{label} <count>`")));
    }
    let count: usize = field(no, tokens.next(), "edge count")?;
    no_trailing(no, tokens)?;
    let mut edges = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, line) = lines.next_line("edge")?;
        let mut tokens = line.split_ascii_whitespace();
        let u: NodeId = field(no, tokens.next(), "edge endpoint")?;
        let v: NodeId = field(no, tokens.next(), "edge endpoint")?;
        no_trailing(no, tokens)?;
        if u >= v {
            return Err(FormatError::syntax(no, format!("edge ({u}, {v}) must have u < v")));
        }
        if v as usize >= node_count {
            return Err(FormatError::syntax(no, format!("edge endpoint {v} out of range")));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

pub fn read_graph<R: BufRead>(input: R) -> Result<Graph, FormatError> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    let (no, header) = lines.next_line("header")?;
    let mut tokens = header.split_ascii_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(FormatError::syntax(no, format!("missing `{MAGIC}` magic")));
    }
    let version: u32 = field(no, tokens.next(), "version")?;
    if version != VERSION {
        return Err(FormatError::syntax(no, format!("unsupported version {version}")));
    }
    let side: f64 = field(no, tokens.next(), "side")?;
    let count: usize = field(no, tokens.next(), "node count")?;
    let n: u64 = field(no, tokens.next(), "n")?;
    let c: f64 = field(no, tokens.next(), "c")?;
    let alpha: f64 = field(no, tokens.next(), "alpha")?;
    let dbar: f64 = field(no, tokens.next(), "dbar")?;
    let seed: u64 = field(no, tokens.next(), "seed")?;
    no_trailing(no, tokens)?;
    let params = ModelParams::new(n, c, alpha, dbar, seed).map_err(|e| FormatError::syntax(no, e.to_string()))?;
    if (side - params.side()).abs() > 1e-9 * params.side() {
        return Err(FormatError::syntax(
            no,
            format!("side {side} does not match sqrt(n) = {}", params.side()),
        ));
    }

    let mut positions = Vec::with_capacity(count);
    for id in 0..count {
        let (no, line) = lines.next_line("node")?;
        let mut tokens = line.split_ascii_whitespace();
        let got: usize = field(no, tokens.next(), "node id")?;
        if got != id {
            return Err(FormatError::syntax(no, format!("expected node id {id}, found {got}")));
        }
        let x: f64 = field(no, tokens.next(), "x")?;
        let y: f64 = field(no, tokens.next(), "y")?;
        no_trailing(no, tokens)?;
        positions.push(TorusPoint::new(x, y));
    }
    let local = read_edges(&mut lines, "local", count)?;
    let shortcuts = read_edges(&mut lines, "shortcut", count)?;
    if let Some(extra) = lines.inner.next() {
        let line = extra?;
        if !line.trim().is_empty() {
            return Err(FormatError::syntax(
                lines.number + 1,
                "unexpected content after shortcut list",
            ));
        }
    }
    Ok(Graph::from_parts(params, positions, &local, &shortcuts)?)
}

pub fn from_text(text: &str) -> Result<Graph, FormatError> {
    read_graph(text.as_bytes())
}
