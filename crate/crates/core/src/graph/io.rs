//! Line-oriented text format for list-coloring instances:
//!
//! ```text
//! # comment
//! dlc 1 <n> <m>
//! node <id> <c1> <c2> ... <ck>
//! edge <u> <v>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{Color, ColoringInstance, Graph, NodeId};
use crate::error::{Error, ParseError};

pub fn write_instance(instance: &ColoringInstance, path: impl AsRef<Path>) -> Result<(), Error> {
    fs::write(path, render_instance(instance))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<ColoringInstance, Error> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn render_instance(instance: &ColoringInstance) -> String {
    let g = instance.graph();
    let mut out = String::new();
    writeln!(out, "dlc 1 {} {}", g.node_count(), g.edge_count()).unwrap();
    for i in 0..g.node_count() {
        write!(out, "node {}", g.id(i)).unwrap();
        for c in instance.list(i) {
            write!(out, " {c}").unwrap();
        }
        out.push('\n');
    }
    for (u, v) in g.edges() {
        writeln!(out, "edge {} {}", g.id(u), g.id(v)).unwrap();
    }
    out
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("bad {what} `{tok}`")))
}

pub fn parse_instance(text: &str) -> Result<ColoringInstance, Error> {
    let mut header: Option<(usize, usize)> = None;
    let mut nodes: Vec<(NodeId, Vec<Color>)> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_ascii_whitespace();
        let keyword = toks.next().unwrap();
        match (keyword, header) {
            ("dlc", None) => {
                let version: u32 = field(toks.next(), line, "version")?;
                if version != 1 {
                    return Err(ParseError::new(line, format!("unsupported version {version}")).into());
                }
                let n = field(toks.next(), line, "node count")?;
                let m = field(toks.next(), line, "edge count")?;
                header = Some((n, m));
            }
            ("dlc", Some(_)) => return Err(ParseError::new(line, "second header").into()),
            (_, None) => return Err(ParseError::new(line, "expected `dlc 1 <n> <m>` header").into()),
            ("node", Some(_)) => {
                let id = NodeId(field(toks.next(), line, "node id")?);
                let colors = toks
                    .map(|t| field::<u32>(Some(t), line, "color").map(Color))
                    .collect::<Result<Vec<_>, _>>()?;
                nodes.push((id, colors));
            }
            ("edge", Some(_)) => {
                let u = NodeId(field(toks.next(), line, "endpoint")?);
                let v = NodeId(field(toks.next(), line, "endpoint")?);
                if toks.next().is_some() {
                    return Err(ParseError::new(line, "trailing tokens after edge").into());
                }
                edges.push((u, v));
            }
            (other, Some(_)) => {
                return Err(ParseError::new(line, format!("unknown keyword `{other}`")).into())
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(ParseError::new(last_line.max(1), "empty instance").into());
    };
    if nodes.len() != n || edges.len() != m {
        return Err(ParseError::new(
            last_line,
            format!(
                "header declares {n} nodes and {m} edges, found {} and {}",
                nodes.len(),
                edges.len()
            ),
        )
        .into());
    }
    let ids: Vec<NodeId> = nodes.iter().map(|(id, _)| *id).collect();
    let graph = Graph::build(&ids, &edges)?;
    nodes.sort_by_key(|(id, _)| *id);
    let lists = nodes.into_iter().map(|(_, l)| l).collect();
    Ok(ColoringInstance::new(graph, lists)?)
}
