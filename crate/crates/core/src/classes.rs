//! Digraphs of square matrices, strongly connected classes, the access
//! order between classes, and chain lengths.
//!
//! Vertices and classes are 0-based throughout the API. Reports convert to
//! 1-based labels at the serialization boundary.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Directed graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut succ = vec![Vec::new(); n];
        for (m, k) in edges {
            for v in [m, k] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if m == k {
                return Err(Error::SelfLoop(m));
            }
            succ[m].push(k);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Ok(Digraph { succ })
    }

    /// Builds the digraph whose edges are the off-diagonal pairs accepted by `edge`.
    pub fn from_pattern(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let succ = (0..n)
            .map(|m| (0..n).filter(|&k| k != m && edge(m, k)).collect())
            .collect();
        Digraph { succ }
    }

    /// Edge (m, n) is present iff m != n and |a[m, n]| > threshold.
    pub fn from_matrix(a: &DMatrix<f64>, threshold: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        Ok(Self::from_pattern(a.nrows(), |m, k| a[(m, k)].abs() > threshold))
    }

    pub fn vertex_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, m: usize, k: usize) -> bool {
        self.succ[m].binary_search(&k).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(m, s)| s.iter().map(move |&k| (m, k)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Plain breadth-first reachability (reflexive).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                return true;
            }
            for &k in &self.succ[v] {
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        false
    }
}

pub fn digraph_of_matrix(a: &DMatrix<f64>, threshold: f64) -> Result<Digraph> {
    Digraph::from_matrix(a, threshold)
}

/// Strongly connected components listed in a topological order of the
/// access relation, together with that relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    // access[j][k]: class j reaches class k (reflexive)
    access: Vec<Vec<bool>>,
    cond_succ: Vec<Vec<usize>>,
    cond_pred: Vec<Vec<usize>>,
}

impl ClassPartition {
    pub fn of(g: &Digraph) -> Self {
        let n = g.vertex_count();
        let comp = tarjan(g);
        let raw_count = comp.iter().copied().max().map_or(0, |c| c + 1);

        let mut members = vec![Vec::new(); raw_count];
        for v in 0..n {
            members[comp[v]].push(v);
        }
        let mut raw_succ = vec![Vec::new(); raw_count];
        let mut indeg = vec![0usize; raw_count];
        for (m, k) in g.edges() {
            let (a, b) = (comp[m], comp[k]);
            if a != b && !raw_succ[a].contains(&b) {
                raw_succ[a].push(b);
                indeg[b] += 1;
            }
        }

        // Kahn's algorithm, ties broken by the smallest vertex label in the class.
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..raw_count)
            .filter(|&c| indeg[c] == 0)
            .map(|c| Reverse((members[c][0], c)))
            .collect();
        let mut order = Vec::with_capacity(raw_count);
        while let Some(Reverse((_, c))) = heap.pop() {
            order.push(c);
            for &d in &raw_succ[c] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    heap.push(Reverse((members[d][0], d)));
                }
            }
        }

        let mut rank = vec![0; raw_count];
        for (i, &c) in order.iter().enumerate() {
            rank[c] = i;
        }
        let classes: Vec<Vec<usize>> = order.iter().map(|&c| members[c].clone()).collect();
        let class_of: Vec<usize> = comp.iter().map(|&c| rank[c]).collect();
        let m = classes.len();
        let mut cond_succ = vec![Vec::new(); m];
        let mut cond_pred = vec![Vec::new(); m];
        for (c, succ) in raw_succ.iter().enumerate() {
            for &d in succ {
                cond_succ[rank[c]].push(rank[d]);
                cond_pred[rank[d]].push(rank[c]);
            }
        }
        for v in cond_succ.iter_mut().chain(cond_pred.iter_mut()) {
            v.sort_unstable();
        }

        let mut access = vec![vec![false; m]; m];
        for j in (0..m).rev() {
            access[j][j] = true;
            for &k in &cond_succ[j] {
                for t in 0..m {
                    if access[k][t] {
                        access[j][t] = true;
                    }
                }
            }
        }

        ClassPartition { classes, class_of, access, cond_succ, cond_pred }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, k: usize) -> &[usize] {
        &self.classes[k]
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.class_of[v]
    }

    /// Index of the class whose vertex set equals `vertices` (any order).
    pub fn find_class(&self, vertices: &[usize]) -> Option<usize> {
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        self.classes.iter().position(|c| *c == sorted)
    }

    /// Reflexive access: class j reaches class k.
    pub fn accesses(&self, j: usize, k: usize) -> bool {
        self.access[j][k]
    }

    /// Strict access: j reaches k and j != k.
    pub fn precedes(&self, j: usize, k: usize) -> bool {
        j != k && self.access[j][k]
    }

    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.len();
        (0..m)
            .flat_map(|j| (0..m).map(move |k| (j, k)))
            .filter(|&(j, k)| self.precedes(j, k))
            .collect()
    }

    /// Edges of the condensation DAG.
    pub fn condensation_successors(&self, k: usize) -> &[usize] {
        &self.cond_succ[k]
    }

    pub fn is_irreducible(&self) -> bool {
        self.len() == 1
    }

    pub fn initial_classes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.cond_pred[k].is_empty()).collect()
    }

    pub fn final_classes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.cond_succ[k].is_empty()).collect()
    }

    /// `perm[new] = old`: listing vertices class by class in class order.
    pub fn block_permutation(&self) -> Vec<usize> {
        self.classes.iter().flatten().copied().collect()
    }

    /// Longest chain length, counted in basic classes.
    ///
    /// With supports, only chains whose first class meets `source_support`
    /// and whose last class meets `target_support` are admitted.
    pub fn longest_chain_length(&self, query: &ChainQuery) -> Result<usize> {
        let m = self.len();
        if query.basic.len() != m {
            return Err(Error::Dimension(format!(
                "{} basic flags for {} classes",
                query.basic.len(),
                m
            )));
        }
        let meets = |support: &Option<Vec<usize>>, k: usize| match support {
            None => true,
            Some(s) => s.iter().any(|&v| v < self.vertex_count() && self.class_of[v] == k),
        };

        // best[k]: longest admissible-start chain ending at class k, None if none
        let mut best: Vec<Option<usize>> = vec![None; m];
        for k in 0..m {
            let mut inherited = if meets(&query.source_support, k) { Some(0) } else { None };
            for &p in &self.cond_pred[k] {
                inherited = inherited.max(best[p]);
            }
            best[k] = inherited.map(|b| b + usize::from(query.basic[k]));
        }
        Ok((0..m)
            .filter(|&k| meets(&query.target_support, k))
            .filter_map(|k| best[k])
            .max()
            .unwrap_or(0))
    }

    pub fn is_chain(&self, chain: &[usize]) -> bool {
        !chain.is_empty()
            && chain.iter().all(|&k| k < self.len())
            && chain.windows(2).all(|w| self.precedes(w[0], w[1]))
    }

    /// A chain whose consecutive connecting blocks are semipositive.
    pub fn is_direct_chain(&self, a: &DMatrix<f64>, chain: &[usize]) -> Result<bool> {
        if !self.is_chain(chain) {
            return Err(Error::InvalidChain(format!("{chain:?}")));
        }
        if a.nrows() != self.vertex_count() || !a.is_square() {
            return Err(Error::Dimension("matrix does not match the partition".into()));
        }
        Ok(chain.windows(2).all(|w| {
            let mut any = false;
            for &r in &self.classes[w[0]] {
                for &c in &self.classes[w[1]] {
                    let x = a[(r, c)];
                    if x < 0.0 {
                        return false;
                    }
                    any |= x > 0.0;
                }
            }
            any
        }))
    }

    /// Every chain of classes. Debug utility, limited to 12 classes.
    pub fn enumerate_chains(&self) -> Result<Vec<Vec<usize>>> {
        const CAP: usize = 12;
        if self.len() > CAP {
            return Err(Error::Dimension(format!(
                "chain enumeration is limited to {CAP} classes, got {}",
                self.len()
            )));
        }
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..self.len()).map(|k| vec![k]).collect();
        while let Some(chain) = stack.pop() {
            let last = *chain.last().unwrap();
            for k in last + 1..self.len() {
                if self.precedes(last, k) {
                    let mut next = chain.clone();
                    next.push(k);
                    stack.push(next);
                }
            }
            out.push(chain);
        }
        out.sort();
        Ok(out)
    }
}

pub fn scc_partition(g: &Digraph) -> ClassPartition {
    ClassPartition::of(g)
}

pub fn is_irreducible(g: &Digraph) -> bool {
    ClassPartition::of(g).is_irreducible()
}

/// Basic flags plus optional supports restricting chain endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainQuery {
    pub basic: Vec<bool>,
    pub source_support: Option<Vec<usize>>,
    pub target_support: Option<Vec<usize>>,
}

impl ChainQuery {
    pub fn new(basic: Vec<bool>) -> Self {
        ChainQuery { basic, source_support: None, target_support: None }
    }

    pub fn with_supports(mut self, source: Option<Vec<usize>>, target: Option<Vec<usize>>) -> Self {
        self.source_support = source;
        self.target_support = target;
        self
    }
}

/// Indices with a strictly positive entry.
pub fn support(v: &[f64]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, _)| i).collect()
}

/// Checks that `perm` (with `perm[new] = old`) brings `a` to block upper
/// triangular form with irreducible diagonal blocks, blocks following the
/// classes of `p` in listed order.
pub fn is_block_upper_triangular(a: &DMatrix<f64>, p: &ClassPartition, perm: &[usize]) -> bool {
    let n = a.nrows();
    if perm.len() != n || p.vertex_count() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in perm {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let b = DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
    let mut bounds = Vec::with_capacity(p.len());
    let mut start = 0;
    for class in p.classes() {
        bounds.push(start..start + class.len());
        start += class.len();
    }
    let block_of = |i: usize| bounds.iter().position(|r| r.contains(&i)).unwrap();
    for i in 0..n {
        for j in 0..n {
            if i != j && block_of(i) > block_of(j) && b[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    bounds.iter().all(|r| {
        let k = r.len();
        let g = Digraph::from_pattern(k, |x, y| b[(r.start + x, r.start + y)] != 0.0);
        is_irreducible(&g)
    })
}

// Iterative Tarjan; returns a component id per vertex.
fn tarjan(g: &Digraph) -> Vec<usize> {
    let n = g.vertex_count();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![UNSEEN; n];
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.successors(v).get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}
