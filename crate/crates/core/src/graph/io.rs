//! Tab-separated graph files and dense CSV export.
//!
//! Edge lists are `src<TAB>dst[<TAB>weight]` with `#` comments; attribute
//! files are `node<TAB>label`. Node ids are arbitrary tokens, re-indexed
//! densely in the order the attribute file lists them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::ArrayView2;

use super::AttributedGraph;
use crate::error::{Error, Result};

/// A graph read from disk together with the original node tokens.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: AttributedGraph,
    pub node_names: Vec<String>,
    /// Original label token of each dense label id.
    pub label_names: Vec<String>,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split('\t').map(str::trim).collect()))
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_graph(edges_path: impl AsRef<Path>, attrs_path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let (edges_path, attrs_path) = (edges_path.as_ref(), attrs_path.as_ref());
    let attrs = read_to_string(attrs_path)?;
    let parse_err = |path: &Path, line, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut node_names = Vec::new();
    let mut index = HashMap::new();
    let mut raw_labels = Vec::new();
    for (line, fields) in data_lines(&attrs) {
        if fields.len() < 2 {
            return Err(parse_err(attrs_path, line, "expected node<TAB>label".into()));
        }
        let name = fields[0].to_string();
        if index.insert(name.clone(), node_names.len()).is_some() {
            return Err(parse_err(attrs_path, line, format!("duplicate node {name:?}")));
        }
        node_names.push(name);
        raw_labels.push(fields[1].to_string());
    }
    if node_names.is_empty() {
        return Err(parse_err(attrs_path, 0, "no nodes listed".into()));
    }

    let mut label_names: Vec<String> = raw_labels.clone();
    label_names.sort();
    label_names.dedup();
    if label_names.iter().all(|s| s.parse::<u64>().is_ok()) {
        label_names.sort_by_key(|s| s.parse::<u64>().unwrap_or(0));
    }
    let label_id: HashMap<&str, usize> = label_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let labels = raw_labels.iter().map(|s| label_id[s.as_str()]).collect();

    let text = read_to_string(edges_path)?;
    let mut edges = Vec::new();
    for (line, fields) in data_lines(&text) {
        if fields.len() < 2 {
            return Err(parse_err(edges_path, line, "expected src<TAB>dst[<TAB>weight]".into()));
        }
        let lookup = |tok: &str| {
            index
                .get(tok)
                .copied()
                .ok_or_else(|| parse_err(edges_path, line, format!("node {tok:?} has no label")))
        };
        let (u, v) = (lookup(fields[0])?, lookup(fields[1])?);
        let w = match fields.get(2) {
            Some(tok) => tok
                .parse::<f64>()
                .map_err(|e| parse_err(edges_path, line, format!("bad weight {tok:?}: {e}")))?,
            None => 1.0,
        };
        edges.push((u, v, w));
    }

    let graph = AttributedGraph::from_edges(node_names.len(), &edges, labels)?;
    Ok(LoadedGraph {
        graph,
        node_names,
        label_names,
    })
}

/// One line per edge with `u < v`; the weight column is omitted for 0/1 graphs.
pub fn edge_list_tsv(g: &AttributedGraph) -> String {
    let mut out = String::new();
    let weighted = !g.is_binary_weights();
    for (u, v, w) in g.edges() {
        if weighted {
            let _ = writeln!(out, "{u}\t{v}\t{w}");
        } else {
            let _ = writeln!(out, "{u}\t{v}");
        }
    }
    out
}

pub fn attributes_tsv(g: &AttributedGraph) -> String {
    let mut out = String::new();
    for (node, s) in g.labels().iter().enumerate() {
        let _ = writeln!(out, "{node}\t{s}");
    }
    out
}

pub fn dense_csv(m: ArrayView2<'_, f64>) -> String {
    let mut out = String::new();
    for row in m.outer_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write `<dir>/<stem>.edges.tsv` and `<dir>/<stem>.attrs.tsv`.
pub fn write_graph(g: &AttributedGraph, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
    let dir = dir.as_ref();
    write_text(dir.join(format!("{stem}.edges.tsv")), &edge_list_tsv(g))?;
    write_text(dir.join(format!("{stem}.attrs.tsv")), &attributes_tsv(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn reads_named_nodes_and_string_labels() {
        let dir = tempfile::tempdir().unwrap();
        let attrs = dir.path().join("a.tsv");
        let edges = dir.path().join("e.tsv");
        fs::write(&attrs, "# node\tlabel\nbob\tM\nalice\tF\ncarol\tF\n").unwrap();
        fs::write(&edges, "bob\talice\nalice\tcarol\t2.5 # weighted\n\n").unwrap();
        let loaded = read_graph(&edges, &attrs).unwrap();
        assert_eq!(loaded.node_names, ["bob", "alice", "carol"]);
        assert_eq!(loaded.label_names, ["F", "M"]);
        assert_eq!(loaded.graph.labels(), &[1, 0, 0]);
        assert_eq!(loaded.graph.weight(0, 1), 1.0);
        assert_eq!(loaded.graph.weight(2, 1), 2.5);
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let dir = tempfile::tempdir().unwrap();
        let attrs = dir.path().join("a.tsv");
        let edges = dir.path().join("e.tsv");
        fs::write(&attrs, "0\t10\n1\t2\n2\t10\n").unwrap();
        fs::write(&edges, "0\t1\n").unwrap();
        let loaded = read_graph(&edges, &attrs).unwrap();
        assert_eq!(loaded.graph.labels(), &[1, 0, 1]);
    }

    #[test]
    fn unknown_node_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let attrs = dir.path().join("a.tsv");
        let edges = dir.path().join("e.tsv");
        fs::write(&attrs, "0\t0\n1\t1\n").unwrap();
        fs::write(&edges, "0\t1\n0\t7\n").unwrap();
        match read_graph(&edges, &attrs) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn written_files_read_back() {
        let a = array![[0., 0.5, 0.], [0.5, 0., 1.], [0., 1., 0.]];
        let g = AttributedGraph::new(a, vec![0, 1, 1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_graph(&g, dir.path(), "g").unwrap();
        let back = read_graph(dir.path().join("g.edges.tsv"), dir.path().join("g.attrs.tsv")).unwrap();
        assert_eq!(back.graph, g);
        assert_eq!(dense_csv(g.adjacency()).lines().next().unwrap(), "0,0.5,0");
    }
}
