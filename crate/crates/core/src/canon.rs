//! Canonical forms for (labelled) graphs.
//!
//! Color refinement produces an equitable ordered partition; the remaining
//! ambiguity is resolved by individualizing vertices of the first
//! non-singleton cell and recursing. Among all leaves the ordering with the
//! lexicographically least adjacency encoding wins. Interchangeable twin
//! vertices are explored once.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::config::size_guard;
use crate::error::{DclError, Result};
use crate::graph::{Arrow, Graph, GraphMorphism};

/// Maximum number of search-tree leaves examined before refusing.
pub const LEAF_BUDGET: usize = 250_000;

/// A canonical representative together with the isomorphism onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub graph: Arc<Graph>,
    /// Isomorphism from the input graph to `graph`.
    pub relabeling: GraphMorphism,
}

/// Canonicalizes an unlabelled graph.
pub fn canonicalize(g: &Arc<Graph>) -> Result<CanonicalForm> {
    let labels = Labels {
        node: vec![0; g.node_count()],
        arrow: vec![0; g.arrow_count()],
    };
    let order = canonical_order(g, &labels)?;
    Ok(build(g, &labels, &order))
}

/// Label ranks for every node and arrow of a graph, in sorted id order.
pub(crate) struct Labels {
    pub node: Vec<u32>,
    pub arrow: Vec<u32>,
}

/// Output of the labelled canonicalization used for typed graphs.
pub(crate) struct LabelledCanon {
    pub form: CanonicalForm,
    /// Original node index at each canonical position.
    #[allow(dead_code)]
    pub order: Vec<usize>,
}

pub(crate) fn canonicalize_labelled(g: &Arc<Graph>, labels: &Labels) -> Result<LabelledCanon> {
    let order = canonical_order(g, labels)?;
    let form = build(g, labels, &order);
    Ok(LabelledCanon { form, order })
}

fn width(n: usize) -> usize {
    let mut w = 1;
    let mut x = n.saturating_sub(1);
    while x >= 10 {
        x /= 10;
        w += 1;
    }
    w
}

pub(crate) fn canonical_node_id(i: usize, n: usize) -> String {
    format!("n{:0w$}", i, w = width(n))
}

pub(crate) fn canonical_arrow_id(i: usize, n: usize) -> String {
    format!("a{:0w$}", i, w = width(n))
}

fn build(g: &Arc<Graph>, labels: &Labels, order: &[usize]) -> CanonicalForm {
    let nodes: Vec<&str> = g.nodes().collect();
    let n = nodes.len();
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let node_ix: std::collections::HashMap<&str, usize> =
        nodes.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let mut arrows: Vec<(usize, usize, u32, &str)> = g
        .arrows()
        .enumerate()
        .map(|(i, (id, a))| (pos[node_ix[a.src.as_str()]], pos[node_ix[a.tgt.as_str()]], labels.arrow[i], id))
        .collect();
    arrows.sort();
    let m = arrows.len();

    let ids: Vec<String> = (0..n).map(|p| canonical_node_id(p, n)).collect();
    let mut node_map = BTreeMap::new();
    let mut canon_nodes = std::collections::BTreeSet::new();
    for (i, v) in nodes.iter().enumerate() {
        let id = ids[pos[i]].clone();
        node_map.insert(v.to_string(), id.clone());
        canon_nodes.insert(id);
    }
    let mut arrow_map = BTreeMap::new();
    let mut canon_arrows = BTreeMap::new();
    for (k, (s, t, _, id)) in arrows.iter().enumerate() {
        let cid = canonical_arrow_id(k, m);
        arrow_map.insert(id.to_string(), cid.clone());
        canon_arrows.insert(
            cid,
            Arrow {
                src: ids[*s].clone(),
                tgt: ids[*t].clone(),
            },
        );
    }
    let canon = Arc::new(Graph::from_parts(canon_nodes, canon_arrows));
    if *canon == **g {
        return CanonicalForm {
            relabeling: GraphMorphism::identity(g.clone()),
            graph: g.clone(),
        };
    }
    CanonicalForm {
        relabeling: GraphMorphism::new_unchecked(g.clone(), canon.clone(), node_map, arrow_map),
        graph: canon,
    }
}

type Encoding = (Vec<u32>, Vec<(usize, usize, u32)>);

struct Ctx<'a> {
    n: usize,
    node_label: &'a [u32],
    arrows: Vec<(usize, usize, u32)>,
    out: Vec<Vec<(usize, u32)>>,
    inc: Vec<Vec<(usize, u32)>>,
    /// Sorted label multiset on each ordered pair, dense.
    adj: Vec<Vec<Vec<u32>>>,
    leaves: usize,
    best: Option<(Encoding, Vec<usize>)>,
}

fn canonical_order(g: &Graph, labels: &Labels) -> Result<Vec<usize>> {
    let n = g.node_count();
    if n > size_guard() {
        return Err(DclError::SizeGuard(format!(
            "canonicalization refused: {n} nodes exceeds the guard of {}",
            size_guard()
        )));
    }
    let nodes: Vec<&str> = g.nodes().collect();
    let ix: std::collections::HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    let arrows: Vec<(usize, usize, u32)> = g
        .arrows()
        .enumerate()
        .map(|(i, (_, a))| (ix[a.src.as_str()], ix[a.tgt.as_str()], labels.arrow[i]))
        .collect();
    let mut out = vec![Vec::new(); n];
    let mut inc = vec![Vec::new(); n];
    let mut adj = vec![vec![Vec::new(); n]; n];
    for &(s, t, l) in &arrows {
        out[s].push((t, l));
        inc[t].push((s, l));
        adj[s][t].push(l);
    }
    for row in adj.iter_mut() {
        for cell in row.iter_mut() {
            cell.sort_unstable();
        }
    }
    let mut ctx = Ctx {
        n,
        node_label: &labels.node,
        arrows,
        out,
        inc,
        adj,
        leaves: 0,
        best: None,
    };
    // initial partition by node label
    let mut by_label: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_label.entry(labels.node[v]).or_default().push(v);
    }
    let cells: Vec<Vec<usize>> = by_label.into_values().collect();
    ctx.search(cells)?;
    Ok(ctx.best.map(|(_, o)| o).unwrap_or_default())
}

impl Ctx<'_> {
    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        let mut cell_of = vec![0usize; self.n];
        loop {
            for (c, cell) in cells.iter().enumerate() {
                for &v in cell {
                    cell_of[v] = c;
                }
            }
            let sig = |v: usize| -> (Vec<(usize, u32)>, Vec<(usize, u32)>) {
                let mut o: Vec<(usize, u32)> = self.out[v].iter().map(|&(t, l)| (cell_of[t], l)).collect();
                let mut i: Vec<(usize, u32)> = self.inc[v].iter().map(|&(s, l)| (cell_of[s], l)).collect();
                o.sort_unstable();
                i.sort_unstable();
                (o, i)
            };
            let mut next = Vec::with_capacity(cells.len());
            for cell in &cells {
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(_, usize)> = cell.iter().map(|&v| (sig(v), v)).collect();
                keyed.sort();
                let mut start = 0;
                for k in 1..=keyed.len() {
                    if k == keyed.len() || keyed[k].0 != keyed[start].0 {
                        next.push(keyed[start..k].iter().map(|x| x.1).collect());
                        start = k;
                    }
                }
            }
            if next.len() == cells.len() {
                return next;
            }
            cells = next;
        }
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        if self.node_label[u] != self.node_label[v]
            || self.adj[u][u] != self.adj[v][v]
            || self.adj[u][v] != self.adj[v][u]
        {
            return false;
        }
        (0..self.n)
            .filter(|&w| w != u && w != v)
            .all(|w| self.adj[u][w] == self.adj[v][w] && self.adj[w][u] == self.adj[w][v])
    }

    fn encode(&self, order: &[usize]) -> Encoding {
        let mut pos = vec![0usize; self.n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let labels = order.iter().map(|&v| self.node_label[v]).collect();
        let mut arrows: Vec<(usize, usize, u32)> =
            self.arrows.iter().map(|&(s, t, l)| (pos[s], pos[t], l)).collect();
        arrows.sort_unstable();
        (labels, arrows)
    }

    fn search(&mut self, cells: Vec<Vec<usize>>) -> Result<()> {
        let cells = self.refine(cells);
        let Some(target) = cells.iter().position(|c| c.len() > 1) else {
            self.leaves += 1;
            if self.leaves > LEAF_BUDGET {
                return Err(DclError::SizeGuard(format!(
                    "canonicalization refused: more than {LEAF_BUDGET} search leaves"
                )));
            }
            let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
            let enc = self.encode(&order);
            let better = match &self.best {
                None => true,
                Some((be, bo)) => (&enc, &order) < (be, bo),
            };
            if better {
                self.best = Some((enc, order));
            }
            return Ok(());
        };
        let mut reps: Vec<usize> = Vec::new();
        for &v in &cells[target] {
            if !reps.iter().any(|&r| self.twins(r, v)) {
                reps.push(v);
            }
        }
        for v in reps {
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend_from_slice(&cells[..target]);
            next.push(vec![v]);
            next.push(cells[target].iter().copied().filter(|&x| x != v).collect());
            next.extend_from_slice(&cells[target + 1..]);
            self.search(next)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::find_isomorphism;

    fn g(nodes: &[&str], arrows: &[(&str, &str, &str)]) -> Arc<Graph> {
        Arc::new(Graph::new(nodes.iter().copied(), arrows.iter().copied()).unwrap())
    }

    #[test]
    fn relabelled_paths_agree() {
        let p1 = g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "b", "c")]);
        let p2 = g(&["z", "y", "x"], &[("1", "x", "y"), ("2", "y", "z")]);
        assert!(find_isomorphism(&p1, &p2).unwrap().is_some());
        assert_eq!(canonicalize(&p1).unwrap().graph, canonicalize(&p2).unwrap().graph);
    }

    #[test]
    fn path_and_cycle_differ() {
        let p = g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "b", "c")]);
        let c = g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "b", "c"), ("h", "c", "a")]);
        assert!(find_isomorphism(&p, &c).unwrap().is_none());
        assert_ne!(canonicalize(&p).unwrap().graph, canonicalize(&c).unwrap().graph);
    }

    #[test]
    fn canonical_graph_is_fixed() {
        let p = g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "b", "c"), ("h", "b", "c")]);
        let c1 = canonicalize(&p).unwrap();
        let c2 = canonicalize(&c1.graph).unwrap();
        assert_eq!(c1.graph, c2.graph);
        assert!(c2.relabeling.is_identity());
        assert!(c1.relabeling.is_isomorphism());
    }

    #[test]
    fn many_isolated_nodes_are_cheap() {
        let names: Vec<String> = (0..40).map(|i| format!("v{i}")).collect();
        let big = Arc::new(Graph::discrete(names).unwrap());
        let c = canonicalize(&big).unwrap();
        assert_eq!(c.graph.node_count(), 40);
    }

    #[test]
    fn size_guard_refuses() {
        let names: Vec<String> = (0..(size_guard() + 1)).map(|i| format!("v{i}")).collect();
        let big = Arc::new(Graph::discrete(names).unwrap());
        assert!(matches!(canonicalize(&big), Err(DclError::SizeGuard(_))));
    }

    #[test]
    fn empty_graph() {
        let e = Arc::new(Graph::empty());
        assert_eq!(*canonicalize(&e).unwrap().graph, Graph::empty());
    }
}
