//! JSON and DOT renderings. Rationals are written as `"p/q"` strings so that
//! no precision is lost; all collections are emitted in a fixed order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::ifs::IfsSystem;
use crate::morphism::TreeMap;
use crate::ordinal::ExtHeight;
use crate::report::Report;
use crate::tree::{HeightTree, NodePath, TreeNorm};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub path: NodePath,
    pub height: ExtHeight,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeExport {
    pub root_height: ExtHeight,
    pub depth: usize,
    pub breadth: usize,
    pub nodes: Vec<NodeRecord>,
}

pub fn tree_export(tree: &HeightTree, norm: Option<&dyn TreeNorm>, depth: usize, breadth: usize) -> Result<TreeExport> {
    let mut nodes = Vec::new();
    for (path, height) in tree.window(&[], depth, breadth)? {
        let norm = match norm {
            Some(n) => Some(n.norm(&path)?.to_string()),
            None => None,
        };
        nodes.push(NodeRecord { path, height, norm });
    }
    Ok(TreeExport {
        root_height: tree.root_height().clone(),
        depth,
        breadth,
        nodes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorphismPair {
    pub src_path: NodePath,
    pub dst_path: NodePath,
}

pub fn morphism_window<M: TreeMap + ?Sized>(m: &M, depth: usize, breadth: usize) -> Result<Vec<MorphismPair>> {
    m.source_tree()
        .window(m.source_root(), depth, breadth)?
        .into_iter()
        .map(|(src_path, _)| {
            let dst_path = m.apply(&src_path)?;
            Ok(MorphismPair { src_path, dst_path })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteVerdict {
    pub suite: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
}

impl From<&Report> for SuiteVerdict {
    fn from(r: &Report) -> Self {
        SuiteVerdict {
            suite: r.suite.clone(),
            passed: r.passed(),
            checks: r.checked,
            failures: r.failure_count,
        }
    }
}

/// Summary of one Hutchinson run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub space: String,
    pub lambda: String,
    pub n: usize,
    pub maps: Vec<String>,
    /// `|Tₖ|` for `k = 0..=n` (single-tree systems only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub level_sizes: Vec<usize>,
    /// `|𝓕ᵏ(seed)|` for `k = 0..=n`.
    pub net_sizes: Vec<usize>,
    /// `d_H(𝓕ᵏ(seed), 𝓕ᵏ⁺¹(seed))` for `k = 0..n`.
    pub hausdorff: Vec<String>,
    pub verdicts: Vec<SuiteVerdict>,
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Truncated tree as a DOT digraph, labelled with heights (and norms).
pub fn tree_dot(tree: &HeightTree, norm: Option<&dyn TreeNorm>, depth: usize, breadth: usize) -> Result<String> {
    let ex = tree_export(tree, norm, depth, breadth)?;
    let mut out = String::from("digraph tree {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in &ex.nodes {
        let mut label = format!("{}\\nh={}", dot_escape(&n.path.to_string()), n.height);
        if let Some(v) = &n.norm {
            let _ = write!(label, "\\n|x|={v}");
        }
        let style = if n.height == ExtHeight::MinusOne { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  \"{}\" [label=\"{label}\"{style}];", n.path);
    }
    for n in &ex.nodes {
        if let Some(parent) = n.path.parent() {
            let _ = writeln!(out, "  \"{parent}\" -> \"{}\";", n.path);
        }
    }
    out.push_str("}\n");
    Ok(out)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// `Tₙ` as a DOT digraph; each node is coloured by the map whose image
/// contains it.
pub fn level_set_dot(s: &IfsSystem, n: usize) -> Result<String> {
    let sets = s.level_sets(n)?;
    let nodes: &BTreeSet<NodePath> = &sets[n];
    let mut out = format!("digraph level_set {{\n  label=\"T{n}\";\n  node [shape=circle, style=filled, fontname=\"monospace\"];\n");
    for p in nodes {
        let mut owner = None;
        for (i, m) in s.maps().iter().enumerate() {
            if m.preimage(p)?.is_some() {
                owner = Some(i);
                break;
            }
        }
        let (color, tag) = match owner {
            Some(i) => (PALETTE[i % PALETTE.len()], s.labels()[i].as_str()),
            None => ("#ffffff", "-"),
        };
        let _ = writeln!(
            out,
            "  \"{p}\" [label=\"{}\\n{}\", fillcolor=\"{color}\"];",
            p,
            dot_escape(tag)
        );
    }
    for p in nodes {
        if let Some(parent) = p.parent() {
            if nodes.contains(&parent) {
                let _ = writeln!(out, "  \"{parent}\" -> \"{p}\";");
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::build_ifs_unital;
    use crate::morphism::HeightMorphism;
    use crate::tree::{canonical_tree, rational};
    use std::sync::Arc;

    #[test]
    fn tree_json_shape() {
        let s = build_ifs_unital("1".parse().unwrap(), rational(1, 2)).unwrap();
        let ex = tree_export(s.tree(), Some(&s), 1, 2).unwrap();
        let v = serde_json::to_value(&ex).unwrap();
        assert_eq!(v["root_height"], "1");
        assert_eq!(v["nodes"][0]["path"], serde_json::json!([]));
        assert_eq!(v["nodes"][0]["norm"], "1");
        assert_eq!(v["nodes"][2]["norm"], "1/2");
        assert_eq!(v["nodes"][1]["height"], "-1");
    }

    #[test]
    fn morphism_pairs() {
        let f = HeightMorphism::shift(Arc::new(canonical_tree("1".parse().unwrap()).unwrap())).unwrap();
        let w = morphism_window(&f, 1, 2).unwrap();
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(v[2], serde_json::json!({"src_path": [1], "dst_path": [2]}));
    }

    #[test]
    fn dot_outputs_are_stable() {
        let s = build_ifs_unital("1".parse().unwrap(), rational(1, 2)).unwrap();
        let a = level_set_dot(&s, 3).unwrap();
        assert_eq!(a, level_set_dot(&s, 3).unwrap());
        assert!(a.contains("\"[]\" -> \"[1]\""));
        let t = tree_dot(s.tree(), None, 2, 2).unwrap();
        assert!(t.starts_with("digraph tree {"));
        assert!(t.contains("[label=\"[1]\\nh=0\"]"), "{t}");
    }
}
