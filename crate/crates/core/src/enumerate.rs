//! Exhaustive enumeration of small typed instances, one per isomorphism
//! class.
//!
//! An instance over a schema is described by the number of elements of each
//! sort and, for every ordered pair of elements, how many links of each
//! schema arrow run between them. Isomorphisms permute elements within
//! sorts. One sort without self-arrows is chosen as pivot: the links touching
//! a pivot element form its row, rows are generated in sorted order, and a
//! configuration is kept only when no permutation of the other sorts yields
//! a lexicographically smaller description. Schemas where every sort carries
//! a self-arrow fall back to raw generation with canonical deduplication.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{DclError, Result};
use crate::graph::{Arrow, Graph, GraphMorphism};
use crate::slice::{canonicalize_instance, TypedInstance};

/// Upper bound on raw configurations examined by one enumeration.
pub const RAW_LIMIT: u128 = 200_000_000;

/// Shape bounds for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of elements of each schema node.
    pub per_sort: usize,
    /// Maximum number of links from one element to another, summed over
    /// all schema arrows between their sorts.
    pub parallel: usize,
}

struct Group {
    src: usize,
    tgt: usize,
    types: Vec<String>,
    /// Per-type multiplicity vectors with sum at most `parallel`.
    configs: Vec<Vec<u8>>,
}

struct Layout {
    sorts: Vec<String>,
    groups: Vec<Group>,
}

fn configs(types: usize, parallel: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..types {
        let mut next = Vec::new();
        for v in &out {
            let used: usize = v.iter().map(|&x| x as usize).sum();
            for m in 0..=parallel - used {
                let mut w = v.clone();
                w.push(m as u8);
                next.push(w);
            }
        }
        out = next;
    }
    out.sort();
    out
}

impl Layout {
    fn new(schema: &Graph, parallel: usize) -> Layout {
        let sorts: Vec<String> = schema.nodes().map(String::from).collect();
        let ix: BTreeMap<&str, usize> = sorts.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut grouped: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for (a, arrow) in schema.arrows() {
            grouped
                .entry((ix[arrow.src.as_str()], ix[arrow.tgt.as_str()]))
                .or_default()
                .push(a.to_string());
        }
        let groups = grouped
            .into_iter()
            .map(|((src, tgt), types)| Group {
                src,
                tgt,
                configs: configs(types.len(), parallel),
                types,
            })
            .collect();
        Layout { sorts, groups }
    }

    fn pivot(&self) -> Option<usize> {
        (0..self.sorts.len())
            .filter(|&s| !self.groups.iter().any(|g| g.src == s && g.tgt == s))
            .max_by_key(|&s| {
                let touching = self.groups.iter().filter(|g| g.src == s || g.tgt == s).count();
                (touching, usize::MAX - s)
            })
    }
}

/// Cells of a configuration with fixed sort sizes.
struct Frame<'l> {
    layout: &'l Layout,
    counts: Vec<usize>,
    pivot: usize,
    /// (group, x, y) for cells not touching the pivot.
    rest: Vec<(usize, usize, usize)>,
    /// (group, other element) for the cells of one pivot row.
    row: Vec<(usize, usize)>,
    rest_ix: BTreeMap<(usize, usize, usize), usize>,
    row_ix: BTreeMap<(usize, usize), usize>,
    /// Element ids per sort.
    names: Vec<Vec<String>>,
    /// Link ids per arrow type, enough for every cell.
    link_ids: BTreeMap<String, Vec<String>>,
}

impl<'l> Frame<'l> {
    fn new(layout: &'l Layout, counts: Vec<usize>, pivot: usize) -> Frame<'l> {
        let mut rest = Vec::new();
        let mut row = Vec::new();
        for (gi, g) in layout.groups.iter().enumerate() {
            if g.src == pivot {
                row.extend((0..counts[g.tgt]).map(|y| (gi, y)));
            } else if g.tgt == pivot {
                row.extend((0..counts[g.src]).map(|x| (gi, x)));
            } else {
                for x in 0..counts[g.src] {
                    rest.extend((0..counts[g.tgt]).map(|y| (gi, x, y)));
                }
            }
        }
        let rest_ix = rest.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let row_ix = row.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let names = counts
            .iter()
            .enumerate()
            .map(|(s, &c)| (0..c).map(|j| format!("{}.{}", layout.sorts[s], j)).collect())
            .collect();
        let mut link_ids = BTreeMap::new();
        for g in &layout.groups {
            let most = g.configs.iter().flatten().copied().max().unwrap_or(0) as usize;
            let cells = counts[g.src] * counts[g.tgt];
            for ty in &g.types {
                link_ids.insert(ty.clone(), (0..cells * most).map(|k| format!("{ty}.{k}")).collect());
            }
        }
        Frame {
            layout,
            counts,
            pivot,
            rest,
            row,
            rest_ix,
            row_ix,
            names,
            link_ids,
        }
    }

    fn radix(&self, group: usize) -> usize {
        self.layout.groups[group].configs.len()
    }

    fn row_space(&self) -> u128 {
        self.row.iter().map(|&(g, _)| self.radix(g) as u128).product()
    }

    fn rest_space(&self) -> u128 {
        self.rest.iter().map(|&(g, _, _)| self.radix(g) as u128).product()
    }

    fn decode_row(&self, mut index: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.row.len()];
        for i in (0..self.row.len()).rev() {
            let r = self.radix(self.row[i].0);
            out[i] = (index % r) as u8;
            index /= r;
        }
        out
    }

    fn encode_row(&self, row: &[u8]) -> usize {
        row.iter()
            .zip(&self.row)
            .fold(0, |acc, (&v, &(g, _))| acc * self.radix(g) + v as usize)
    }

    fn permute_rest(&self, rest: &[u8], perms: &[Vec<usize>]) -> Vec<u8> {
        let mut out = vec![0u8; rest.len()];
        for (i, &(g, x, y)) in self.rest.iter().enumerate() {
            let grp = &self.layout.groups[g];
            let j = self.rest_ix[&(g, perms[grp.src][x], perms[grp.tgt][y])];
            out[j] = rest[i];
        }
        out
    }

    fn permute_row(&self, row: &[u8], perms: &[Vec<usize>]) -> Vec<u8> {
        let mut out = vec![0u8; row.len()];
        for (i, &(g, o)) in self.row.iter().enumerate() {
            let grp = &self.layout.groups[g];
            let other = if grp.src == self.pivot { grp.tgt } else { grp.src };
            out[self.row_ix[&(g, perms[other][o])]] = row[i];
        }
        out
    }

    fn build(&self, rest: &[u8], rows: &[Vec<u8>], schema: &Arc<Graph>) -> TypedInstance {
        let layout = self.layout;
        let name = |s: usize, j: usize| self.names[s][j].clone();
        let mut nodes = BTreeSet::new();
        let mut node_typing = BTreeMap::new();
        for (s, &c) in self.counts.iter().enumerate() {
            for j in 0..c {
                nodes.insert(name(s, j));
                node_typing.insert(name(s, j), layout.sorts[s].clone());
            }
        }
        let mut arrows = BTreeMap::new();
        let mut arrow_typing = BTreeMap::new();
        let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
        let mut emit = |g: usize, x: usize, y: usize, config: u8| {
            let grp = &layout.groups[g];
            for (ty, &m) in grp.types.iter().zip(&grp.configs[config as usize]) {
                for _ in 0..m {
                    let k = counters.entry(ty.as_str()).or_insert(0);
                    let id = self.link_ids[ty][*k].clone();
                    *k += 1;
                    arrows.insert(
                        id.clone(),
                        Arrow {
                            src: name(grp.src, x),
                            tgt: name(grp.tgt, y),
                        },
                    );
                    arrow_typing.insert(id, ty.clone());
                }
            }
        };
        for (i, &(g, x, y)) in self.rest.iter().enumerate() {
            emit(g, x, y, rest[i]);
        }
        for (p, row) in rows.iter().enumerate() {
            for (i, &(g, o)) in self.row.iter().enumerate() {
                let (x, y) = if layout.groups[g].src == self.pivot { (p, o) } else { (o, p) };
                emit(g, x, y, row[i]);
            }
        }
        let carrier = Arc::new(Graph::from_parts(nodes, arrows));
        TypedInstance::new(GraphMorphism::new_unchecked(carrier, schema.clone(), node_typing, arrow_typing))
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All tuples of permutations of the non-pivot sorts, identity excluded.
fn permutation_tuples(counts: &[usize], pivot: usize) -> Vec<Vec<Vec<usize>>> {
    let mut tuples: Vec<Vec<Vec<usize>>> = vec![counts.iter().map(|&c| (0..c).collect()).collect()];
    for (s, &c) in counts.iter().enumerate() {
        if s == pivot || c < 2 {
            continue;
        }
        let mut next = Vec::new();
        for t in &tuples {
            let mut p: Vec<usize> = (0..c).collect();
            loop {
                let mut u = t.clone();
                u[s] = p.clone();
                next.push(u);
                if !next_permutation(&mut p) {
                    break;
                }
            }
        }
        tuples = next;
    }
    tuples.remove(0);
    tuples
}

fn odometer(digits: &mut [u8], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        if (digits[i] as usize) + 1 < radix(i) {
            digits[i] += 1;
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn all_counts(sorts: usize, per_sort: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..sorts {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=per_sort).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn check_budget(raw: u128) -> Result<()> {
    if raw > RAW_LIMIT {
        return Err(DclError::SizeGuard(format!(
            "instance enumeration would examine {raw} configurations (limit {RAW_LIMIT})"
        )));
    }
    Ok(())
}

/// Visits one instance per isomorphism class within `bounds`.
pub fn for_each_instance<F>(schema: &Arc<Graph>, bounds: Bounds, mut visit: F) -> Result<()>
where
    F: FnMut(&TypedInstance) -> ControlFlow<()>,
{
    let layout = Layout::new(schema, bounds.parallel);
    match layout.pivot() {
        Some(pivot) => pivoted(schema, &layout, pivot, bounds, &mut visit),
        None => deduplicated(schema, &layout, bounds, &mut visit),
    }
}

/// Collects one instance per isomorphism class within `bounds`.
pub fn enumerate_instances(schema: &Arc<Graph>, bounds: Bounds) -> Result<Vec<TypedInstance>> {
    let mut out = Vec::new();
    for_each_instance(schema, bounds, |t| {
        out.push(t.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

fn pivoted<F>(schema: &Arc<Graph>, layout: &Layout, pivot: usize, bounds: Bounds, visit: &mut F) -> Result<()>
where
    F: FnMut(&TypedInstance) -> ControlFlow<()>,
{
    for counts in all_counts(layout.sorts.len(), bounds.per_sort) {
        let frame = Frame::new(layout, counts.clone(), pivot);
        let rows = frame.row_space();
        let multisets = (0..counts[pivot] as u128).fold(1u128, |acc, k| acc * (rows + k) / (k + 1));
        check_budget(frame.rest_space().saturating_mul(multisets))?;
        let rows = rows as usize;
        let perms = permutation_tuples(&counts, pivot);
        // Row images under each permutation, tabulated when small enough.
        let table: Option<(Vec<Vec<u8>>, Vec<Vec<usize>>)> = (rows.saturating_mul(perms.len() + 1) <= 1 << 20).then(|| {
            let decoded: Vec<Vec<u8>> = (0..rows).map(|i| frame.decode_row(i)).collect();
            let images = perms
                .iter()
                .map(|p| decoded.iter().map(|r| frame.encode_row(&frame.permute_row(r, p))).collect())
                .collect();
            (decoded, images)
        });
        let mut rest = vec![0u8; frame.rest.len()];
        loop {
            let rest_images: Vec<Vec<u8>> = perms.iter().map(|p| frame.permute_rest(&rest, p)).collect();
            let k = counts[pivot];
            let mut idx = vec![0usize; k];
            'multisets: loop {
                let mut minimal = true;
                let mut img = Vec::with_capacity(k);
                for (pi, (p, rest_img)) in perms.iter().zip(&rest_images).enumerate() {
                    match rest_img.cmp(&rest) {
                        std::cmp::Ordering::Less => {
                            minimal = false;
                            break;
                        }
                        std::cmp::Ordering::Greater => continue,
                        std::cmp::Ordering::Equal => {}
                    }
                    img.clear();
                    match &table {
                        Some((_, images)) => img.extend(idx.iter().map(|&i| images[pi][i])),
                        None => img.extend(
                            idx.iter()
                                .map(|&i| frame.encode_row(&frame.permute_row(&frame.decode_row(i), p))),
                        ),
                    }
                    img.sort_unstable();
                    if img < idx {
                        minimal = false;
                        break;
                    }
                }
                if minimal {
                    let decoded: Vec<Vec<u8>> = match &table {
                        Some((rows, _)) => idx.iter().map(|&i| rows[i].clone()).collect(),
                        None => idx.iter().map(|&i| frame.decode_row(i)).collect(),
                    };
                    if visit(&frame.build(&rest, &decoded, schema)).is_break() {
                        return Ok(());
                    }
                }
                // next non-decreasing sequence
                let mut i = k;
                loop {
                    if i == 0 {
                        break 'multisets;
                    }
                    i -= 1;
                    if idx[i] + 1 < rows {
                        let v = idx[i] + 1;
                        for slot in &mut idx[i..] {
                            *slot = v;
                        }
                        break;
                    }
                }
            }
            if !odometer(&mut rest, |i| frame.radix(frame.rest[i].0)) {
                break;
            }
        }
    }
    Ok(())
}

fn deduplicated<F>(schema: &Arc<Graph>, layout: &Layout, bounds: Bounds, visit: &mut F) -> Result<()>
where
    F: FnMut(&TypedInstance) -> ControlFlow<()>,
{
    let mut seen = HashSet::new();
    for counts in all_counts(layout.sorts.len(), bounds.per_sort) {
        // A pivot index past the sorts puts every cell in `rest`.
        let frame = Frame::new(layout, counts, usize::MAX);
        check_budget(frame.rest_space())?;
        let mut rest = vec![0u8; frame.rest.len()];
        loop {
            let t = frame.build(&rest, &[], schema);
            let c = canonicalize_instance(&t)?;
            if seen.insert(c.instance) && visit(&t).is_break() {
                return Ok(());
            }
            if !odometer(&mut rest, |i| frame.radix(frame.rest[i].0)) {
                break;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_classes(schema: &Arc<Graph>, bounds: Bounds) -> usize {
        let layout = Layout::new(schema, bounds.parallel);
        let mut seen = HashSet::new();
        deduplicated(schema, &layout, bounds, &mut |t| {
            seen.insert(canonicalize_instance(t).unwrap().instance);
            ControlFlow::Continue(())
        })
        .unwrap();
        seen.len()
    }

    fn check_against_brute_force(schema: Graph, bounds: Bounds) {
        let schema = Arc::new(schema);
        let all = enumerate_instances(&schema, bounds).unwrap();
        let canon: HashSet<_> = all
            .iter()
            .map(|t| canonicalize_instance(t).unwrap().instance)
            .collect();
        assert_eq!(canon.len(), all.len(), "duplicate isomorphism class emitted");
        assert_eq!(all.len(), brute_force_classes(&schema, bounds));
    }

    #[test]
    fn single_arrow_arity() {
        check_against_brute_force(Graph::new(["A", "B"], [("r", "A", "B")]).unwrap(), Bounds { per_sort: 2, parallel: 2 });
    }

    #[test]
    fn parallel_pair_arity() {
        check_against_brute_force(
            Graph::new(["A", "B"], [("r1", "A", "B"), ("r2", "A", "B")]).unwrap(),
            Bounds { per_sort: 2, parallel: 2 },
        );
    }

    #[test]
    fn span_arity() {
        check_against_brute_force(
            Graph::new(["R", "A", "B"], [("f", "R", "A"), ("g", "R", "B")]).unwrap(),
            Bounds { per_sort: 2, parallel: 1 },
        );
    }

    #[test]
    fn path_arity_with_middle_sort() {
        check_against_brute_force(
            Graph::new(["A", "B", "C"], [("p", "A", "B"), ("q", "B", "C")]).unwrap(),
            Bounds { per_sort: 2, parallel: 1 },
        );
    }

    #[test]
    fn loops_fall_back() {
        let schema = Arc::new(Graph::terminal());
        // simple digraphs with loops on at most 2 nodes: 1 + 2 + 10
        let all = enumerate_instances(&schema, Bounds { per_sort: 2, parallel: 1 }).unwrap();
        assert_eq!(all.len(), 13);
    }

    #[test]
    fn one_class_per_sort_count_without_arrows() {
        let schema = Arc::new(Graph::discrete(["A", "B"]).unwrap());
        let all = enumerate_instances(&schema, Bounds { per_sort: 3, parallel: 2 }).unwrap();
        assert_eq!(all.len(), 16);
    }
}
