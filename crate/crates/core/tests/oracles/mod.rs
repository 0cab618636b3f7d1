//! Brute-force reference implementations, kept independent of the library.
#![allow(dead_code)]

use dockspec_core::AstNode;

// ---- tree edit distance via exhaustive mapping search ----

struct Flat {
    labels: Vec<String>,
    /// preorder index of the last node in each subtree
    last: Vec<usize>,
}

fn flatten(root: &AstNode) -> Flat {
    fn walk(n: &AstNode, labels: &mut Vec<String>, last: &mut Vec<usize>) {
        let me = labels.len();
        labels.push(n.label.clone());
        last.push(me);
        for c in &n.children {
            walk(c, labels, last);
        }
        last[me] = labels.len() - 1;
    }
    let mut f = Flat {
        labels: Vec::new(),
        last: Vec::new(),
    };
    walk(root, &mut f.labels, &mut f.last);
    f
}

impl Flat {
    fn ancestor(&self, a: usize, d: usize) -> bool {
        a < d && d <= self.last[a]
    }

    fn left_of(&self, x: usize, y: usize) -> bool {
        x < y && !self.ancestor(x, y)
    }
}

/// Minimum edit cost over every valid ordered mapping between the trees.
pub fn ted_by_mappings(a: &AstNode, b: &AstNode) -> usize {
    let ta = flatten(a);
    let tb = flatten(b);
    let mut assign: Vec<Option<usize>> = vec![None; ta.labels.len()];
    let mut used = vec![false; tb.labels.len()];
    let mut best = usize::MAX;

    fn consistent(ta: &Flat, tb: &Flat, assign: &[Option<usize>], i: usize, j: usize) -> bool {
        assign.iter().enumerate().take(i).all(|(k, m)| match m {
            None => true,
            Some(l) => {
                ta.ancestor(k, i) == tb.ancestor(*l, j)
                    && ta.ancestor(i, k) == tb.ancestor(j, *l)
                    && ta.left_of(k, i) == tb.left_of(*l, j)
                    && ta.left_of(i, k) == tb.left_of(j, *l)
            }
        })
    }

    fn cost(ta: &Flat, tb: &Flat, assign: &[Option<usize>]) -> usize {
        let mut mapped = 0;
        let mut relabel = 0;
        for (i, m) in assign.iter().enumerate() {
            if let Some(j) = m {
                mapped += 1;
                if ta.labels[i] != tb.labels[*j] {
                    relabel += 1;
                }
            }
        }
        relabel + (ta.labels.len() - mapped) + (tb.labels.len() - mapped)
    }

    fn search(
        i: usize,
        ta: &Flat,
        tb: &Flat,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut usize,
    ) {
        if i == ta.labels.len() {
            *best = (*best).min(cost(ta, tb, assign));
            return;
        }
        assign[i] = None;
        search(i + 1, ta, tb, assign, used, best);
        for j in 0..tb.labels.len() {
            if !used[j] && consistent(ta, tb, assign, i, j) {
                used[j] = true;
                assign[i] = Some(j);
                search(i + 1, ta, tb, assign, used, best);
                assign[i] = None;
                used[j] = false;
            }
        }
    }

    search(0, &ta, &tb, &mut assign, &mut used, &mut best);
    best
}

/// Random ordered tree of exactly `size` nodes over a small alphabet.
pub fn random_tree(rng: &mut impl rand::Rng, size: usize, alphabet: &[&str]) -> AstNode {
    // parent[i] < i; children kept in creation order
    let parents: Vec<usize> = (1..size).map(|i| rng.gen_range(0..i)).collect();
    let labels: Vec<&str> = (0..size)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect();
    fn build(i: usize, parents: &[usize], labels: &[&str]) -> AstNode {
        let children = (1..labels.len())
            .filter(|&c| parents[c - 1] == i)
            .map(|c| build(c, parents, labels))
            .collect();
        AstNode::new(labels[i], children)
    }
    build(0, &parents, &labels)
}

// ---- BM25 full scan ----

/// Every document scored straight from the formula, ranked by score then id.
pub fn bm25_full_scan(
    docs: &[Vec<Vec<String>>],
    query: &[Vec<String>],
    k1: f64,
    b: f64,
) -> Vec<(usize, f64)> {
    let n = docs.len() as f64;
    let fields = query.len();
    let avg: Vec<f64> = (0..fields)
        .map(|f| docs.iter().map(|d| d[f].len() as f64).sum::<f64>() / n)
        .collect();
    let mut scored: Vec<(usize, f64)> = docs
        .iter()
        .enumerate()
        .map(|(id, d)| {
            let mut s = 0.0;
            for f in 0..fields {
                for t in &query[f] {
                    let tf = d[f].iter().filter(|w| *w == t).count() as f64;
                    if tf == 0.0 {
                        continue;
                    }
                    let df = docs.iter().filter(|o| o[f].contains(t)).count() as f64;
                    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                    let norm = if avg[f] > 0.0 { d[f].len() as f64 / avg[f] } else { 0.0 };
                    s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
                }
            }
            (id, s)
        })
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    scored
}

// ---- rank-sum statistics ----

fn u_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// (U, two-sided p) from enumerating every way to relabel the pooled sample.
pub fn mann_whitney_by_permutation(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let na = a.len();
    let mean = (a.len() * b.len()) as f64 / 2.0;
    let observed = u_by_pairs(a, b);
    let dev = (observed - mean).abs();
    let (mut hit, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let (xa, xb): (Vec<f64>, Vec<f64>) = {
            let mut xa = Vec::new();
            let mut xb = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    xa.push(*v);
                } else {
                    xb.push(*v);
                }
            }
            (xa, xb)
        };
        total += 1;
        if (u_by_pairs(&xa, &xb) - mean).abs() >= dev - 1e-9 {
            hit += 1;
        }
    }
    (observed, hit as f64 / total as f64)
}

pub fn cliffs_delta_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0i64;
    for x in a {
        for y in b {
            s += if x > y {
                1
            } else if x < y {
                -1
            } else {
                0
            };
        }
    }
    s as f64 / (a.len() * b.len()) as f64
}

// ---- dense TF-IDF cosine ----

/// Cosine between dense TF-IDF vectors of term lists, smooth idf.
pub fn dense_cosine(docs: &[Vec<String>], query: &[String]) -> Vec<f64> {
    let mut vocab: Vec<&String> = docs.iter().flatten().collect();
    vocab.sort();
    vocab.dedup();
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let vec_of = |terms: &[String]| -> Vec<f64> {
        vocab
            .iter()
            .zip(&idf)
            .map(|(t, w)| terms.iter().filter(|x| x == t).count() as f64 * w)
            .collect()
    };
    let q = vec_of(query);
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    docs.iter()
        .map(|d| {
            let v = vec_of(d);
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if qn == 0.0 || vn == 0.0 {
                0.0
            } else {
                q.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() / (qn * vn)
            }
        })
        .collect()
}
