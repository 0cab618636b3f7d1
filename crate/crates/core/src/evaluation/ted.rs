//! Zhang-Shasha ordered tree edit distance with unit costs.

use serde::{Deserialize, Serialize};

use crate::syntax::{AstNode, DockerfileAst};

struct Postorder<'a> {
    labels: Vec<&'a str>,
    /// leftmost leaf descendant of each node, in postorder numbering
    lmd: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(root: &'a AstNode) -> Self {
        let mut labels = Vec::new();
        let mut lmd = Vec::new();
        // iterative postorder: (node, next child index, leftmost leaf so far)
        let mut stack: Vec<(&AstNode, usize, Option<usize>)> = vec![(root, 0, None)];
        while let Some((node, child, leftmost)) = stack.pop() {
            if child < node.children.len() {
                stack.push((node, child + 1, leftmost));
                stack.push((&node.children[child], 0, None));
                continue;
            }
            let id = labels.len();
            let l = leftmost.unwrap_or(id);
            labels.push(node.label.as_str());
            lmd.push(l);
            if let Some(parent) = stack.last_mut() {
                if parent.2.is_none() {
                    parent.2 = Some(l);
                }
            }
        }
        let n = labels.len();
        let mut seen = vec![false; n];
        let mut keyroots = Vec::new();
        for i in (0..n).rev() {
            if !seen[lmd[i]] {
                seen[lmd[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.reverse();
        Self {
            labels,
            lmd,
            keyroots,
        }
    }
}

/// Minimum number of node insertions, deletions and relabelings turning `a` into `b`.
pub fn node_edit_distance(a: &AstNode, b: &AstNode) -> usize {
    let ta = Postorder::new(a);
    let tb = Postorder::new(b);
    let (n, m) = (ta.labels.len(), tb.labels.len());
    let mut td = vec![0u32; n * m];
    let mut fd: Vec<u32> = Vec::new();

    for &i in &ta.keyroots {
        for &j in &tb.keyroots {
            let (li, lj) = (ta.lmd[i], tb.lmd[j]);
            let rows = i - li + 2;
            let cols = j - lj + 2;
            fd.clear();
            fd.resize(rows * cols, 0);
            for x in 1..rows {
                fd[x * cols] = fd[(x - 1) * cols] + 1;
            }
            for y in 1..cols {
                fd[y] = fd[y - 1] + 1;
            }
            for x in li..=i {
                let dx = x - li + 1;
                for y in lj..=j {
                    let dy = y - lj + 1;
                    let delete = fd[(dx - 1) * cols + dy] + 1;
                    let insert = fd[dx * cols + dy - 1] + 1;
                    let best = if ta.lmd[x] == li && tb.lmd[y] == lj {
                        let relabel = u32::from(ta.labels[x] != tb.labels[y]);
                        let v = delete.min(insert).min(fd[(dx - 1) * cols + dy - 1] + relabel);
                        td[x * m + y] = v;
                        v
                    } else {
                        let px = ta.lmd[x] - li;
                        let py = tb.lmd[y] - lj;
                        delete.min(insert).min(fd[px * cols + py] + td[x * m + y])
                    };
                    fd[dx * cols + dy] = best;
                }
            }
        }
    }
    td[n * m - 1] as usize
}

pub fn tree_edit_distance(a: &DockerfileAst, b: &DockerfileAst) -> usize {
    node_edit_distance(&a.root, &b.root)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub raw: usize,
    pub normalized: f64,
    pub size_a: usize,
    pub size_b: usize,
}

pub fn distance_report(a: &DockerfileAst, b: &DockerfileAst) -> DistanceReport {
    let raw = tree_edit_distance(a, b);
    let size_a = a.root.size();
    let size_b = b.root.size();
    DistanceReport {
        raw,
        normalized: raw as f64 / (size_a + size_b) as f64,
        size_a,
        size_b,
    }
}

/// Edit distance divided by the combined size of both trees.
pub fn normalized_distance(a: &DockerfileAst, b: &DockerfileAst) -> f64 {
    distance_report(a, b).normalized
}
