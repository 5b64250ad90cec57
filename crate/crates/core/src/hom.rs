//! Backtracking search for graph homomorphisms.
//!
//! Nodes of the domain are assigned first, in sorted id order, with
//! forward checking on incidence; arrows are assigned afterwards, also in
//! sorted order. Candidates are tried in sorted codomain order, so
//! solutions come out in lexicographic order of their image tables.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{Graph, GraphMorphism};

/// Default cap on candidate trials before a search gives up.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Integer view of a graph: nodes and arrows indexed in sorted id order.
#[derive(Debug)]
pub(crate) struct Indexed<'g> {
    pub nodes: Vec<&'g str>,
    pub node_ix: HashMap<&'g str, usize>,
    pub arrows: Vec<(&'g str, usize, usize)>,
    pub arrow_ix: HashMap<&'g str, usize>,
}

impl<'g> Indexed<'g> {
    pub fn new(g: &'g Graph) -> Self {
        let nodes: Vec<&str> = g.nodes().collect();
        let node_ix: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let arrows: Vec<(&str, usize, usize)> = g
            .arrows()
            .map(|(id, a)| (id, node_ix[a.src.as_str()], node_ix[a.tgt.as_str()]))
            .collect();
        let arrow_ix = arrows.iter().enumerate().map(|(i, a)| (a.0, i)).collect();
        Indexed {
            nodes,
            node_ix,
            arrows,
            arrow_ix,
        }
    }
}

/// Result of an enumeration that may have been cut short by a limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomEnumeration {
    pub morphisms: Vec<GraphMorphism>,
    pub truncated: bool,
}

/// A configurable homomorphism search problem `dom → cod`.
#[derive(Debug, Clone)]
pub struct HomSearch {
    dom: Arc<Graph>,
    cod: Arc<Graph>,
    node_allowed: BTreeMap<String, Vec<String>>,
    arrow_allowed: BTreeMap<String, Vec<String>>,
    injective: bool,
    budget: u64,
}

impl HomSearch {
    pub fn new(dom: Arc<Graph>, cod: Arc<Graph>) -> Self {
        HomSearch {
            dom,
            cod,
            node_allowed: BTreeMap::new(),
            arrow_allowed: BTreeMap::new(),
            injective: false,
            budget: DEFAULT_BUDGET,
        }
    }

    /// Restricts the image of a domain node. Repeated calls intersect.
    pub fn restrict_node<S: AsRef<str>>(mut self, node: &str, allowed: impl IntoIterator<Item = S>) -> Self {
        let new: Vec<String> = allowed.into_iter().map(|s| s.as_ref().to_string()).collect();
        let entry = self.node_allowed.entry(node.to_string());
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(new);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().retain(|x| new.contains(x));
            }
        }
        self
    }

    pub fn fix_node(self, node: &str, image: &str) -> Self {
        self.restrict_node(node, [image])
    }

    pub fn restrict_arrow<S: AsRef<str>>(mut self, arrow: &str, allowed: impl IntoIterator<Item = S>) -> Self {
        let new: Vec<String> = allowed.into_iter().map(|s| s.as_ref().to_string()).collect();
        match self.arrow_allowed.entry(arrow.to_string()) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(new);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().retain(|x| new.contains(x));
            }
        }
        self
    }

    pub fn fix_arrow(self, arrow: &str, image: &str) -> Self {
        self.restrict_arrow(arrow, [image])
    }

    /// Requires `partial ; result = target`, where `partial: P → dom` and
    /// `target: P → cod`. Conflicting requirements leave no solutions.
    pub fn extending(mut self, partial: &GraphMorphism, target: &GraphMorphism) -> Self {
        for (n, img) in partial.node_map() {
            self = self.fix_node(img, target.node(n));
        }
        for (a, img) in partial.arrow_map() {
            self = self.fix_arrow(img, target.arrow(a));
        }
        self
    }

    /// Requires `result ; over_cod = over_dom`, i.e. the result is a
    /// slice morphism between the typed graphs `over_dom` and `over_cod`.
    pub fn over(mut self, over_dom: &GraphMorphism, over_cod: &GraphMorphism) -> Self {
        let mut by_type: HashMap<&str, Vec<&str>> = HashMap::new();
        for (n, t) in over_cod.node_map() {
            by_type.entry(t.as_str()).or_default().push(n.as_str());
        }
        for (a, t) in over_cod.arrow_map() {
            by_type.entry(t.as_str()).or_default().push(a.as_str());
        }
        let empty = Vec::new();
        for (n, t) in over_dom.node_map() {
            let c = by_type.get(t.as_str()).unwrap_or(&empty).clone();
            self = self.restrict_node(n, c);
        }
        for (a, t) in over_dom.arrow_map() {
            let c = by_type.get(t.as_str()).unwrap_or(&empty).clone();
            self = self.restrict_arrow(a, c);
        }
        self
    }

    pub fn injective(mut self, yes: bool) -> Self {
        self.injective = yes;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Visits every solution in lexicographic order until the visitor
    /// breaks. Errors only when the budget runs out.
    pub fn for_each<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(&GraphMorphism) -> ControlFlow<()>,
    {
        let dom_ix = Indexed::new(&self.dom);
        let cod_ix = Indexed::new(&self.cod);
        let Some(problem) = Problem::build(self, &dom_ix, &cod_ix) else {
            return Ok(());
        };
        let mut state = State {
            node_img: vec![usize::MAX; dom_ix.nodes.len()],
            arrow_img: vec![usize::MAX; dom_ix.arrows.len()],
            used_nodes: vec![false; cod_ix.nodes.len()],
            used_arrows: vec![false; cod_ix.arrows.len()],
            steps: 0,
        };
        let mut emit = |st: &State| -> ControlFlow<()> {
            let nodes = st
                .node_img
                .iter()
                .enumerate()
                .map(|(i, &j)| (dom_ix.nodes[i].to_string(), cod_ix.nodes[j].to_string()))
                .collect();
            let arrows = st
                .arrow_img
                .iter()
                .enumerate()
                .map(|(i, &j)| (dom_ix.arrows[i].0.to_string(), cod_ix.arrows[j].0.to_string()))
                .collect();
            let m = GraphMorphism::new_unchecked(self.dom.clone(), self.cod.clone(), nodes, arrows);
            visit(&m)
        };
        match problem.nodes(0, &mut state, &mut emit) {
            Step::Exhausted => Err(DclError::SearchExhausted(format!(
                "homomorphism search {} → {} exceeded {} steps",
                self.dom.summary(),
                self.cod.summary(),
                self.budget
            ))),
            _ => Ok(()),
        }
    }

    pub fn first(&self) -> Result<Option<GraphMorphism>> {
        let mut found = None;
        self.for_each(|m| {
            found = Some(m.clone());
            ControlFlow::Break(())
        })?;
        Ok(found)
    }

    pub fn exists(&self) -> Result<bool> {
        Ok(self.first()?.is_some())
    }

    /// Collects up to `limit` solutions; `truncated` is set if more exist.
    pub fn collect(&self, limit: usize) -> Result<HomEnumeration> {
        let mut morphisms = Vec::new();
        let mut truncated = false;
        self.for_each(|m| {
            if morphisms.len() == limit {
                truncated = true;
                return ControlFlow::Break(());
            }
            morphisms.push(m.clone());
            ControlFlow::Continue(())
        })?;
        Ok(HomEnumeration {
            morphisms,
            truncated,
        })
    }

    /// Counts solutions, stopping once `limit + 1` have been seen.
    pub fn count(&self, limit: usize) -> Result<usize> {
        let mut n = 0usize;
        self.for_each(|_| {
            n += 1;
            if n > limit {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(n)
    }
}

enum Step {
    Continue,
    Stop,
    Exhausted,
}

struct State {
    node_img: Vec<usize>,
    arrow_img: Vec<usize>,
    used_nodes: Vec<bool>,
    used_arrows: Vec<bool>,
    steps: u64,
}

struct Problem {
    node_cands: Vec<Vec<usize>>,
    arrow_allowed: Vec<Option<Vec<bool>>>,
    dom_arrows: Vec<(usize, usize)>,
    /// Arrows whose later endpoint (in assignment order) is node `k`.
    check_at: Vec<Vec<usize>>,
    between: HashMap<(usize, usize), Vec<usize>>,
    injective: bool,
    budget: u64,
}

impl Problem {
    fn build(search: &HomSearch, dom: &Indexed<'_>, cod: &Indexed<'_>) -> Option<Problem> {
        if search.injective
            && (dom.nodes.len() > cod.nodes.len() || dom.arrows.len() > cod.arrows.len())
        {
            return None;
        }
        let mut node_cands = Vec::with_capacity(dom.nodes.len());
        for n in &dom.nodes {
            let cands: Vec<usize> = match search.node_allowed.get(*n) {
                Some(allowed) => {
                    let mut v: Vec<usize> =
                        allowed.iter().filter_map(|a| cod.node_ix.get(a.as_str()).copied()).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                }
                None => (0..cod.nodes.len()).collect(),
            };
            if cands.is_empty() {
                return None;
            }
            node_cands.push(cands);
        }
        let mut arrow_allowed = Vec::with_capacity(dom.arrows.len());
        for (a, _, _) in &dom.arrows {
            match search.arrow_allowed.get(*a) {
                Some(allowed) => {
                    let mut mask = vec![false; cod.arrows.len()];
                    let mut any = false;
                    for x in allowed {
                        if let Some(&j) = cod.arrow_ix.get(x.as_str()) {
                            mask[j] = true;
                            any = true;
                        }
                    }
                    if !any {
                        return None;
                    }
                    arrow_allowed.push(Some(mask));
                }
                None => arrow_allowed.push(None),
            }
        }
        let mut check_at = vec![Vec::new(); dom.nodes.len()];
        for (i, (_, s, t)) in dom.arrows.iter().enumerate() {
            check_at[(*s).max(*t)].push(i);
        }
        let mut between: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (j, (_, s, t)) in cod.arrows.iter().enumerate() {
            between.entry((*s, *t)).or_default().push(j);
        }
        Some(Problem {
            node_cands,
            arrow_allowed,
            dom_arrows: dom.arrows.iter().map(|(_, s, t)| (*s, *t)).collect(),
            check_at,
            between,
            injective: search.injective,
            budget: search.budget,
        })
    }

    fn arrow_ok(&self, a: usize, cand: usize, st: &State) -> bool {
        if self.injective && st.used_arrows[cand] {
            return false;
        }
        match &self.arrow_allowed[a] {
            Some(mask) => mask[cand],
            None => true,
        }
    }

    fn nodes<F>(&self, k: usize, st: &mut State, emit: &mut F) -> Step
    where
        F: FnMut(&State) -> ControlFlow<()>,
    {
        if k == self.node_cands.len() {
            return self.arrows(0, st, emit);
        }
        for &c in &self.node_cands[k] {
            st.steps += 1;
            if st.steps > self.budget {
                return Step::Exhausted;
            }
            if self.injective && st.used_nodes[c] {
                continue;
            }
            st.node_img[k] = c;
            let consistent = self.check_at[k].iter().all(|&a| {
                let (s, t) = self.dom_arrows[a];
                self.between
                    .get(&(st.node_img[s], st.node_img[t]))
                    .is_some_and(|cands| cands.iter().any(|&x| self.arrow_ok(a, x, st)))
            });
            if !consistent {
                continue;
            }
            st.used_nodes[c] = true;
            let r = self.nodes(k + 1, st, emit);
            st.used_nodes[c] = false;
            match r {
                Step::Continue => {}
                other => return other,
            }
        }
        st.node_img[k] = usize::MAX;
        Step::Continue
    }

    fn arrows<F>(&self, k: usize, st: &mut State, emit: &mut F) -> Step
    where
        F: FnMut(&State) -> ControlFlow<()>,
    {
        if k == self.dom_arrows.len() {
            return match emit(st) {
                ControlFlow::Continue(()) => Step::Continue,
                ControlFlow::Break(()) => Step::Stop,
            };
        }
        let (s, t) = self.dom_arrows[k];
        let Some(cands) = self.between.get(&(st.node_img[s], st.node_img[t])) else {
            return Step::Continue;
        };
        for &c in cands {
            st.steps += 1;
            if st.steps > self.budget {
                return Step::Exhausted;
            }
            if !self.arrow_ok(k, c, st) {
                continue;
            }
            st.arrow_img[k] = c;
            st.used_arrows[c] = true;
            let r = self.arrows(k + 1, st, emit);
            st.used_arrows[c] = false;
            match r {
                Step::Continue => {}
                other => return other,
            }
        }
        Step::Continue
    }
}

/// All homomorphisms `g → h` in lexicographic order, at most `limit` of them.
pub fn enumerate_homomorphisms(g: &Arc<Graph>, h: &Arc<Graph>, limit: usize) -> Result<HomEnumeration> {
    HomSearch::new(g.clone(), h.clone()).collect(limit)
}

fn degree_profile(g: &Graph) -> BTreeMap<&str, (usize, usize, usize)> {
    let mut p: BTreeMap<&str, (usize, usize, usize)> = g.nodes().map(|n| (n, (0, 0, 0))).collect();
    for (_, a) in g.arrows() {
        if a.src == a.tgt {
            p.get_mut(a.src.as_str()).unwrap().2 += 1;
        }
        p.get_mut(a.src.as_str()).unwrap().0 += 1;
        p.get_mut(a.tgt.as_str()).unwrap().1 += 1;
    }
    p
}

/// Lexicographically least isomorphism `g → h`, if any.
pub fn find_isomorphism(g: &Arc<Graph>, h: &Arc<Graph>) -> Result<Option<GraphMorphism>> {
    isomorphism_search(g, h).map(|s| s.first()).unwrap_or(Ok(None))
}

/// The search problem behind [`find_isomorphism`], with degree filtering
/// already applied; `None` when a counting obstruction rules out an iso.
pub fn isomorphism_search(g: &Arc<Graph>, h: &Arc<Graph>) -> Option<HomSearch> {
    if g.node_count() != h.node_count() || g.arrow_count() != h.arrow_count() {
        return None;
    }
    let pg = degree_profile(g);
    let ph = degree_profile(h);
    let mut search = HomSearch::new(g.clone(), h.clone()).injective(true);
    for (n, prof) in &pg {
        let cands: Vec<&str> = ph.iter().filter(|(_, q)| *q == prof).map(|(m, _)| *m).collect();
        if cands.is_empty() {
            return None;
        }
        search = search.restrict_node(n, cands);
    }
    Some(search)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::compose;

    fn g(nodes: &[&str], arrows: &[(&str, &str, &str)]) -> Arc<Graph> {
        Arc::new(Graph::new(nodes.iter().copied(), arrows.iter().copied()).unwrap())
    }

    /// Exhaustive oracle: every total map, filtered by incidence.
    fn brute_force_count(dom: &Graph, cod: &Graph) -> usize {
        let dn: Vec<&str> = dom.nodes().collect();
        let cn: Vec<&str> = cod.nodes().collect();
        let da: Vec<(&str, &crate::graph::Arrow)> = dom.arrows().collect();
        let ca: Vec<(&str, &crate::graph::Arrow)> = cod.arrows().collect();
        let total_n = cn.len().pow(dn.len() as u32);
        let total_a = ca.len().pow(da.len() as u32);
        let mut count = 0;
        for mut ni in 0..total_n {
            let mut nmap = BTreeMap::new();
            for n in &dn {
                nmap.insert(*n, cn[ni % cn.len()]);
                ni /= cn.len().max(1);
            }
            for mut ai in 0..total_a {
                let mut ok = true;
                for (_, a) in &da {
                    let (_, img) = ca[ai % ca.len()];
                    ai /= ca.len().max(1);
                    if nmap[a.src.as_str()] != img.src || nmap[a.tgt.as_str()] != img.tgt {
                        ok = false;
                    }
                }
                if ok {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn one_node_into_two_nodes() {
        let one = g(&["x"], &[]);
        let two = g(&["p", "q"], &[]);
        let homs = enumerate_homomorphisms(&one, &two, 10).unwrap();
        assert_eq!(homs.morphisms.len(), 2);
        assert!(!homs.truncated);
        assert_eq!(homs.morphisms[0].node("x"), "p");
    }

    #[test]
    fn arrow_into_loop_and_arrow() {
        let arrow = g(&["1", "2"], &[("e", "1", "2")]);
        let lp = g(&["p"], &[("l", "p", "p")]);
        assert_eq!(enumerate_homomorphisms(&arrow, &lp, 10).unwrap().morphisms.len(), 1);
        assert_eq!(brute_force_count(&arrow, &lp), 1);
        assert_eq!(enumerate_homomorphisms(&arrow, &arrow, 10).unwrap().morphisms.len(), 1);
        assert_eq!(brute_force_count(&arrow, &arrow), 1);
    }

    #[test]
    fn truncation_is_flagged() {
        let one = g(&["x"], &[]);
        let three = g(&["a", "b", "c"], &[]);
        let res = enumerate_homomorphisms(&one, &three, 2).unwrap();
        assert_eq!(res.morphisms.len(), 2);
        assert!(res.truncated);
    }

    #[test]
    fn agrees_with_brute_force_on_small_graphs() {
        let cases = [
            (g(&["a", "b"], &[("e", "a", "b"), ("f", "b", "a")]), g(&["x", "y"], &[("u", "x", "y"), ("v", "y", "x"), ("w", "x", "x")])),
            (g(&["a"], &[("e", "a", "a")]), g(&["x", "y"], &[("u", "x", "y"), ("v", "y", "y")])),
            (g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "a", "c")]), g(&["x", "y"], &[("u", "x", "y"), ("v", "x", "y")])),
        ];
        for (d, c) in cases {
            let n = enumerate_homomorphisms(&d, &c, usize::MAX).unwrap().morphisms.len();
            assert_eq!(n, brute_force_count(&d, &c));
        }
    }

    #[test]
    fn order_is_lexicographic() {
        let d = g(&["a", "b"], &[]);
        let c = g(&["x", "y"], &[]);
        let homs = enumerate_homomorphisms(&d, &c, 10).unwrap().morphisms;
        let tables: Vec<Vec<&str>> = homs.iter().map(|m| m.node_map().values().map(String::as_str).collect()).collect();
        assert_eq!(tables, vec![vec!["x", "x"], vec!["x", "y"], vec!["y", "x"], vec!["y", "y"]]);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let d = g(&["a", "b", "c", "d"], &[]);
        let c = g(&["x", "y", "z"], &[]);
        let res = HomSearch::new(d, c).budget(5).collect(1000);
        assert!(matches!(res, Err(DclError::SearchExhausted(_))));
    }

    #[test]
    fn isomorphism_search() {
        let p1 = g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "b", "c")]);
        let p2 = g(&["z", "y", "x"], &[("1", "x", "y"), ("2", "y", "z")]);
        let iso = find_isomorphism(&p1, &p2).unwrap().unwrap();
        assert!(iso.is_isomorphism());
        assert_eq!(iso.node("a"), "x");
        let cyc = g(&["a", "b", "c"], &[("e", "a", "b"), ("f", "b", "c"), ("h", "c", "a")]);
        assert!(find_isomorphism(&p1, &cyc).unwrap().is_none());
        let id = find_isomorphism(&p1, &p1).unwrap().unwrap();
        assert!(id.is_identity());
        assert!(compose(&iso, &iso.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn node_count_obstruction() {
        assert!(find_isomorphism(&g(&["a"], &[]), &g(&["a", "b"], &[])).unwrap().is_none());
    }
}
