//! Neighbor-joining trees, Newick serialisation and Phylip distance files.

use std::fmt::Write as _;

use log::warn;

use crate::error::{Error, Result};
use crate::similarity::CategoryMatrix;

pub const PHYLIP_NAME_WIDTH: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// Unrooted tree. Nodes `0..leaves.len()` are the named leaves; higher
/// indices are anonymous internal nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PhyloTree {
    pub leaves: Vec<String>,
    pub node_count: usize,
    pub edges: Vec<Edge>,
}

impl PhyloTree {
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.a].push((e.b, e.length));
            adj[e.b].push((e.a, e.length));
        }
        adj
    }

    /// Leaf-to-leaf path lengths.
    pub fn path_lengths(&self) -> Vec<Vec<f64>> {
        let adj = self.adjacency();
        let n = self.leaves.len();
        (0..n)
            .map(|start| {
                let mut dist = vec![f64::NAN; self.node_count];
                dist[start] = 0.0;
                let mut stack = vec![start];
                while let Some(v) = stack.pop() {
                    for &(w, len) in &adj[v] {
                        if dist[w].is_nan() {
                            dist[w] = dist[v] + len;
                            stack.push(w);
                        }
                    }
                }
                dist.truncate(n);
                dist
            })
            .collect()
    }

    /// Leaf pair with the smallest path length, ties to the lexicographically
    /// smallest name pair. Returned as leaf indices `(i, j)` with `i < j`.
    pub fn closest_leaf_pair(&self) -> Option<(usize, usize)> {
        let d = self.path_lengths();
        let n = self.leaves.len();
        let mut best: Option<(f64, (usize, usize))> = None;
        for i in 0..n {
            for j in i + 1..n {
                let better = match best {
                    None => true,
                    Some((bd, (bi, bj))) => {
                        d[i][j] < bd || (d[i][j] == bd && self.name_pair(i, j) < self.name_pair(bi, bj))
                    }
                };
                if better {
                    best = Some((d[i][j], (i, j)));
                }
            }
        }
        best.map(|(_, p)| p)
    }

    fn name_pair(&self, i: usize, j: usize) -> (&str, &str) {
        let (a, b) = (self.leaves[i].as_str(), self.leaves[j].as_str());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Leaf pairs attached to a common node.
    pub fn cherries(&self) -> Vec<(usize, usize)> {
        let adj = self.adjacency();
        let n = self.leaves.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let shared = adj[i].iter().any(|&(p, _)| adj[j].iter().any(|&(q, _)| p == q));
                let direct = adj[i].iter().any(|&(p, _)| p == j);
                if shared || direct {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

fn check_tree_input(d: &CategoryMatrix) -> Result<()> {
    let n = d.len();
    if n < 2 {
        return Err(Error::Contract(format!("tree needs at least 2 taxa, got {n}")));
    }
    let scale = d.values.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    if d.asymmetry() > 1e-12 * scale {
        return Err(Error::Contract(format!(
            "distance matrix is not symmetric (max deviation {:e})",
            d.asymmetry()
        )));
    }
    if let Some(i) = (0..n).find(|&i| d.values[i][i] != 0.0) {
        return Err(Error::Contract(format!(
            "distance matrix diagonal of '{}' is {}, must be 0",
            d.categories[i], d.values[i][i]
        )));
    }
    let mut names = d.categories.clone();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Contract("taxon names must be distinct".into()));
    }
    Ok(())
}

fn clamped(length: f64) -> f64 {
    if length < 0.0 {
        warn!("negative branch length {length:e} clamped to 0");
        0.0
    } else {
        length
    }
}

/// Neighbor-joining on a symmetric, zero-diagonal matrix. The pair
/// minimising the Q criterion is joined first; near-ties go to the
/// lexicographically smallest pair of representative names, where a
/// subtree is represented by its smallest leaf name.
pub fn neighbor_joining(d: &CategoryMatrix) -> Result<PhyloTree> {
    check_tree_input(d)?;
    let n = d.len();
    let mut edges = Vec::with_capacity(2 * n - 3);
    // (node id, representative name)
    let mut active: Vec<(usize, String)> = d.categories.iter().cloned().enumerate().collect();
    let mut dist: Vec<Vec<f64>> = d.values.clone();
    let mut next_node = n;

    while active.len() > 2 {
        let r = active.len();
        let row_sums: Vec<f64> = dist.iter().map(|row| row.iter().sum()).collect();
        let q = |i: usize, j: usize| (r as f64 - 2.0) * dist[i][j] - row_sums[i] - row_sums[j];
        let scale = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .fold(0.0f64, |m, (i, j)| m.max(q(i, j).abs()));
        let tolerance = 1e-12 * scale.max(1.0);
        let pair_name = |i: usize, j: usize| {
            let (a, b) = (&active[i].1, &active[j].1);
            if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        };

        let (mut bi, mut bj) = (0, 1);
        let mut best_q = q(0, 1);
        for i in 0..r {
            for j in i + 1..r {
                if (i, j) == (0, 1) {
                    continue;
                }
                let qij = q(i, j);
                if qij < best_q - tolerance || (qij <= best_q + tolerance && pair_name(i, j) < pair_name(bi, bj)) {
                    best_q = qij;
                    bi = i;
                    bj = j;
                }
            }
        }

        let dij = dist[bi][bj];
        let li = dij / 2.0 + (row_sums[bi] - row_sums[bj]) / (2.0 * (r as f64 - 2.0));
        let lj = dij - li;
        let u = next_node;
        next_node += 1;
        edges.push(Edge {
            a: u,
            b: active[bi].0,
            length: clamped(li),
        });
        edges.push(Edge {
            a: u,
            b: active[bj].0,
            length: clamped(lj),
        });

        let new_row: Vec<f64> = (0..r)
            .filter(|&k| k != bi && k != bj)
            .map(|k| (dist[bi][k] + dist[bj][k] - dij) / 2.0)
            .collect();
        let rep = active[bi].1.clone().min(active[bj].1.clone());

        // bi < bj: remove the later index first
        for idx in [bj, bi] {
            active.remove(idx);
            dist.remove(idx);
            for row in &mut dist {
                row.remove(idx);
            }
        }
        for (row, &v) in dist.iter_mut().zip(&new_row) {
            row.push(v);
        }
        let mut last = new_row;
        last.push(0.0);
        dist.push(last);
        active.push((u, rep));
    }

    edges.push(Edge {
        a: active[0].0,
        b: active[1].0,
        length: clamped(dist[0][1]),
    });
    Ok(PhyloTree {
        leaves: d.categories.clone(),
        node_count: next_node,
        edges,
    })
}

fn newick_label(name: &str) -> String {
    let plain = !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if plain {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

/// Newick text with 6-decimal branch lengths. A two-leaf tree is shown
/// rooted at the midpoint of its edge; larger trees are rooted at the
/// internal node adjacent to the lexicographically first leaf, with children
/// ordered by their smallest leaf name.
pub fn to_newick(tree: &PhyloTree) -> String {
    let n = tree.leaves.len();
    let mut out = String::new();
    if n == 2 {
        let half = tree.edges[0].length / 2.0;
        let (a, b) = if tree.leaves[0] <= tree.leaves[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        let _ = writeln!(
            out,
            "({}:{half:.6},{}:{half:.6});",
            newick_label(&tree.leaves[a]),
            newick_label(&tree.leaves[b])
        );
        return out;
    }
    if n == 1 {
        let _ = writeln!(out, "{};", newick_label(&tree.leaves[0]));
        return out;
    }

    let adj = tree.adjacency();
    let first_leaf = (0..n).min_by(|&a, &b| tree.leaves[a].cmp(&tree.leaves[b])).unwrap();
    let root = adj[first_leaf][0].0;

    // smallest leaf name below each node when hanging from `root`
    fn min_leaf<'a>(tree: &'a PhyloTree, adj: &[Vec<(usize, f64)>], v: usize, parent: usize) -> &'a str {
        if v < tree.leaves.len() {
            return &tree.leaves[v];
        }
        adj[v]
            .iter()
            .filter(|&&(w, _)| w != parent)
            .map(|&(w, _)| min_leaf(tree, adj, w, v))
            .min()
            .unwrap_or("")
    }

    fn write_node(tree: &PhyloTree, adj: &[Vec<(usize, f64)>], v: usize, parent: usize, out: &mut String) {
        if v < tree.leaves.len() {
            out.push_str(&newick_label(&tree.leaves[v]));
            return;
        }
        let mut children: Vec<(usize, f64)> = adj[v].iter().copied().filter(|&(w, _)| w != parent).collect();
        children.sort_by(|a, b| min_leaf(tree, adj, a.0, v).cmp(min_leaf(tree, adj, b.0, v)));
        out.push('(');
        for (k, (w, len)) in children.into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write_node(tree, adj, w, v, out);
            let _ = write!(out, ":{len:.6}");
        }
        out.push(')');
    }

    write_node(tree, &adj, root, usize::MAX, &mut out);
    out.push_str(";\n");
    out
}

fn phylip_name(name: &str) -> String {
    let truncated: String = name.chars().take(PHYLIP_NAME_WIDTH).collect();
    format!("{truncated:<width$}", width = PHYLIP_NAME_WIDTH)
}

/// Square Phylip distance file: taxon count right-aligned in 4 columns,
/// then per taxon a 10-column name and `%9.6f` values separated by single
/// spaces.
pub fn export_phylip(d: &CategoryMatrix) -> Result<String> {
    let scale = d.values.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    if d.asymmetry() > 1e-12 * scale {
        return Err(Error::Contract("Phylip export needs a symmetric matrix".into()));
    }
    let names: Vec<String> = d.categories.iter().map(|n| phylip_name(n)).collect();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            if names[i] == names[j] {
                return Err(Error::Export(format!(
                    "'{}' and '{}' collide after truncation to {PHYLIP_NAME_WIDTH} characters",
                    d.categories[i], d.categories[j]
                )));
            }
        }
    }
    let mut out = format!("{:>4}\n", d.len());
    for (name, row) in names.iter().zip(&d.values) {
        out.push_str(name);
        let cells: Vec<String> = row.iter().map(|v| format!("{v:9.6}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    Ok(out)
}
