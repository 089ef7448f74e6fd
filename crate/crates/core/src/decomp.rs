//! Tree decompositions of conjunctive queries.
//!
//! Decompositions are enumerated from elimination orders of the primal graph
//! in which every quantified variable is eliminated before every free one.
//! The resulting node-per-variable trees are contracted (a node merges into a
//! neighbour whose bag contains its own, unless that would move a free-side
//! node into the bound side) and deduplicated up to tree isomorphism.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rustc_hash::FxHashSet;

use crate::cq::Cq;
use crate::error::{Error, Result};
use crate::varset::{Var, VarSet};

pub const DEFAULT_VAR_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<VarSet>,
    pub edges: Vec<(usize, usize)>,
    /// Nodes whose bags together cover exactly the free variables.
    pub connex: Option<Vec<usize>>,
}

/// Outcome of [`validate_td`]: the first violated condition, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdCheck {
    Valid,
    NotATree,
    BagOutOfScope { node: usize },
    AtomUncovered { atom: usize },
    PathCondition { var: Var },
}

impl TdCheck {
    pub fn is_valid(&self) -> bool {
        *self == TdCheck::Valid
    }
}

impl fmt::Display for TdCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdCheck::Valid => write!(f, "valid"),
            TdCheck::NotATree => write!(f, "edges do not form a tree"),
            TdCheck::BagOutOfScope { node } => write!(f, "bag of node {node} leaves the query"),
            TdCheck::AtomUncovered { atom } => write!(f, "atom {atom} is not covered by a bag"),
            TdCheck::PathCondition { var } => {
                write!(f, "nodes containing variable {var} are not connected")
            }
        }
    }
}

impl TreeDecomposition {
    pub fn new(bags: Vec<VarSet>, edges: Vec<(usize, usize)>) -> Self {
        TreeDecomposition {
            bags,
            edges,
            connex: None,
        }
    }

    pub fn single_bag(bag: VarSet) -> Self {
        TreeDecomposition::new(vec![bag], Vec::new())
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_tree(&self) -> bool {
        let n = self.bags.len();
        if n == 0 || self.edges.len() != n - 1 {
            return false;
        }
        if self.edges.iter().any(|&(a, b)| a >= n || b >= n) {
            return false;
        }
        connected_within(&self.adjacency(), &(0..n).collect::<Vec<_>>())
    }

    /// Nodes in breadth-first order from `root`, each with its parent.
    pub fn rooted(&self, root: usize) -> Vec<(usize, Option<usize>)> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.bags.len()];
        let mut out = Vec::with_capacity(self.bags.len());
        let mut queue = VecDeque::from([(root, None)]);
        seen[root] = true;
        while let Some((t, p)) = queue.pop_front() {
            out.push((t, p));
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back((u, Some(t)));
                }
            }
        }
        out
    }

    pub fn to_text(&self, phi: &Cq) -> String {
        let witness: FxHashSet<usize> = self.connex.iter().flatten().copied().collect();
        let mut s = String::new();
        for (i, bag) in self.bags.iter().enumerate() {
            s.push_str(&format!("node {i}:"));
            for v in bag.iter() {
                s.push(' ');
                s.push_str(phi.var_name(v));
            }
            if witness.contains(&i) {
                s.push_str(" [F]");
            }
            s.push('\n');
        }
        for &(a, b) in &self.edges {
            s.push_str(&format!("edge {a} {b}\n"));
        }
        s
    }

    /// Reads the format written by [`TreeDecomposition::to_text`]. Nodes must
    /// be numbered `0..n` in order.
    pub fn parse(text: &str, phi: &Cq) -> Result<Self> {
        let mut bags = Vec::new();
        let mut edges = Vec::new();
        let mut witness = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let bad = |reason: &str| Error::TdFormat {
                line: no + 1,
                reason: reason.to_string(),
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("node") {
                let (id, vars) = rest.split_once(':').ok_or_else(|| bad("missing ':'"))?;
                let id: usize = id.trim().parse().map_err(|_| bad("bad node id"))?;
                if id != bags.len() {
                    return Err(bad("nodes must be numbered consecutively from 0"));
                }
                let mut bag = VarSet::EMPTY;
                for tok in vars.split_whitespace() {
                    if tok == "[F]" {
                        witness.push(id);
                        continue;
                    }
                    let v = phi
                        .var_index(tok)
                        .ok_or_else(|| bad(&format!("unknown variable `{tok}`")))?;
                    bag.insert(v);
                }
                bags.push(bag);
            } else if let Some(rest) = line.strip_prefix("edge") {
                let ids: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| bad("bad edge endpoint")))
                    .collect::<Result<_>>()?;
                let [a, b] = ids[..] else {
                    return Err(bad("edge needs two endpoints"));
                };
                edges.push((a, b));
            } else {
                return Err(bad("expected `node` or `edge`"));
            }
        }
        let mut td = TreeDecomposition::new(bags, edges);
        if !witness.is_empty() {
            td.connex = Some(witness);
        }
        Ok(td)
    }
}

fn connected_within(adj: &[Vec<usize>], nodes: &[usize]) -> bool {
    let Some(&start) = nodes.first() else {
        return true;
    };
    let allowed: FxHashSet<usize> = nodes.iter().copied().collect();
    let mut seen = FxHashSet::default();
    let mut stack = vec![start];
    seen.insert(start);
    while let Some(t) = stack.pop() {
        for &u in &adj[t] {
            if allowed.contains(&u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen.len() == allowed.len()
}

pub fn validate_td(phi: &Cq, td: &TreeDecomposition) -> TdCheck {
    if !td.is_tree() {
        return TdCheck::NotATree;
    }
    let vars = phi.vars();
    if let Some(node) = td.bags.iter().position(|b| !b.is_subset(vars)) {
        return TdCheck::BagOutOfScope { node };
    }
    for (i, atom) in phi.atoms().iter().enumerate() {
        let av = atom.vars();
        if !td.bags.iter().any(|b| av.is_subset(*b)) {
            return TdCheck::AtomUncovered { atom: i };
        }
    }
    let adj = td.adjacency();
    for v in vars.iter() {
        let holding: Vec<usize> = (0..td.len()).filter(|&t| td.bags[t].contains(v)).collect();
        if !connected_within(&adj, &holding) {
            return TdCheck::PathCondition { var: v };
        }
    }
    TdCheck::Valid
}

/// A connected node set whose bags cover exactly `free(φ)`, if one exists.
///
/// Such a set only uses nodes with bags inside `free(φ)`, so it lies in one
/// connected component of those nodes, and that whole component also works.
pub fn is_free_connex(phi: &Cq, td: &TreeDecomposition) -> Result<Option<Vec<usize>>> {
    let check = validate_td(phi, td);
    if !check.is_valid() {
        return Err(Error::InvalidTd(check.to_string()));
    }
    let free = phi.free();
    if free.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let adj = td.adjacency();
    let inside: Vec<bool> = td.bags.iter().map(|b| b.is_subset(free)).collect();
    let mut seen = vec![false; td.len()];
    for start in 0..td.len() {
        if !inside[start] || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        let mut cover = VarSet::EMPTY;
        seen[start] = true;
        let mut i = 0;
        while i < comp.len() {
            let t = comp[i];
            cover = cover.union(td.bags[t]);
            for &u in &adj[t] {
                if inside[u] && !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
            i += 1;
        }
        if cover == free {
            comp.sort_unstable();
            return Ok(Some(comp));
        }
    }
    Ok(None)
}

pub fn primal_graph(phi: &Cq) -> Vec<VarSet> {
    let mut adj = vec![VarSet::EMPTY; phi.num_vars()];
    for atom in phi.atoms() {
        let av = atom.vars();
        for v in av.iter() {
            adj[v] = adj[v].union(av.without(v));
        }
    }
    adj
}

/// Variables reachable from `v` through eliminated vertices, plus `v`.
fn elimination_bag(adj: &[VarSet], eliminated: VarSet, v: Var) -> VarSet {
    let mut bag = VarSet::singleton(v);
    let mut seen = VarSet::singleton(v);
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for y in adj[x].difference(seen).iter() {
            seen.insert(y);
            if eliminated.contains(y) {
                stack.push(y);
            } else {
                bag.insert(y);
            }
        }
    }
    bag
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    bag: VarSet,
    in_f: bool,
    parent: Option<usize>,
}

/// A forest under construction. Parents always point to nodes, never to
/// uneliminated variables; open roots remember nothing beyond their bag.
#[derive(Clone, Debug)]
struct Forest {
    nodes: Vec<Node>,
}

impl Forest {
    fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (i, p)))
            .collect()
    }

    /// Merges `t` into its neighbour `u`; `u` keeps its bag and side.
    fn merge(&mut self, t: usize, u: usize) {
        let t_parent = self.nodes[t].parent;
        for i in 0..self.nodes.len() {
            if i != u && self.nodes[i].parent == Some(t) {
                self.nodes[i].parent = Some(u);
            }
        }
        if self.nodes[u].parent == Some(t) {
            self.nodes[u].parent = t_parent;
        }
        self.nodes.remove(t);
        for n in &mut self.nodes {
            if let Some(p) = n.parent.as_mut() {
                if *p > t {
                    *p -= 1;
                }
            }
        }
    }

    fn contract(&mut self) {
        'outer: loop {
            for (a, b) in self.edges() {
                for (t, u) in [(a, b), (b, a)] {
                    let (nt, nu) = (&self.nodes[t], &self.nodes[u]);
                    if nt.bag.is_subset(nu.bag) && !(nt.in_f && !nu.in_f) {
                        self.merge(t, u);
                        continue 'outer;
                    }
                }
            }
            break;
        }
    }

    /// Minimum AHU encoding over all roots; parent links are ignored.
    fn canonical(&self) -> String {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        let label = |i: usize| format!("{:x}{}", self.nodes[i].bag.bits(), if self.nodes[i].in_f { "f" } else { "" });
        fn enc(t: usize, from: Option<usize>, adj: &[Vec<usize>], label: &dyn Fn(usize) -> String) -> String {
            let mut kids: Vec<String> = adj[t]
                .iter()
                .filter(|&&u| Some(u) != from)
                .map(|&u| enc(u, Some(t), adj, label))
                .collect();
            kids.sort();
            format!("({}{})", label(t), kids.concat())
        }
        (0..n).map(|r| enc(r, None, &adj, &label)).min().unwrap_or_default()
    }
}

/// All free-connex tree decompositions reachable by quantified-first
/// elimination orders, contracted and deduplicated, in canonical order.
pub fn enumerate_fc_tds(phi: &Cq, var_cap: usize) -> Result<Vec<TreeDecomposition>> {
    let k = phi.num_vars();
    if k > var_cap {
        return Err(Error::TooManyVariables {
            found: k,
            cap: var_cap,
        });
    }
    let adj = primal_graph(phi);
    let free = phi.free();
    let mut visited: FxHashSet<(VarSet, String)> = FxHashSet::default();
    let mut found: BTreeMap<String, Forest> = BTreeMap::new();
    let forest = Forest { nodes: Vec::new() };
    // Node of each eliminated variable; `None` once merged away. Parent links
    // to not-yet-eliminated variables are resolved when those are eliminated.
    explore(
        &adj,
        phi.vars(),
        free,
        VarSet::EMPTY,
        forest,
        &mut visited,
        &mut found,
    );
    let mut out = Vec::with_capacity(found.len());
    for forest in found.into_values() {
        let bags: Vec<VarSet> = forest.nodes.iter().map(|n| n.bag).collect();
        let mut td = TreeDecomposition::new(bags, forest.edges());
        let witness: Vec<usize> = (0..forest.nodes.len())
            .filter(|&i| forest.nodes[i].in_f)
            .collect();
        td.connex = Some(witness);
        debug_assert!(validate_td(phi, &td).is_valid(), "{}", td.to_text(phi));
        out.push(td);
    }
    Ok(out)
}

fn explore(
    adj: &[VarSet],
    all: VarSet,
    free: VarSet,
    eliminated: VarSet,
    forest: Forest,
    visited: &mut FxHashSet<(VarSet, String)>,
    found: &mut BTreeMap<String, Forest>,
) {
    if !visited.insert((eliminated, forest_key(&forest))) {
        return;
    }
    let remaining = all.difference(eliminated);
    if remaining.is_empty() {
        let mut done = forest;
        connect_roots(&mut done);
        done.contract();
        let key = done.canonical();
        found.entry(key).or_insert(done);
        return;
    }
    let bound_left = remaining.difference(free);
    let choices = if bound_left.is_empty() { remaining } else { bound_left };
    for v in choices.iter() {
        let bag = elimination_bag(adj, eliminated, v);
        let mut next = forest.clone();
        let id = next.nodes.len();
        next.nodes.push(Node {
            bag,
            in_f: free.contains(v),
            parent: None,
        });
        // Open roots waiting for `v`: those whose remaining bag part has `v`
        // as its first eliminated member, which is `v` exactly when the rest
        // of that part lies in `bag`.
        for i in 0..id {
            let n = &next.nodes[i];
            if n.parent.is_some() {
                continue;
            }
            let open = n.bag.intersection(remaining);
            if open.contains(v) && open.is_subset(bag) {
                next.nodes[i].parent = Some(id);
            }
        }
        next.contract();
        explore(adj, all, free, eliminated.with(v), next, visited, found);
    }
}

fn forest_key(forest: &Forest) -> String {
    // Roots matter for future attachment, so encode each tree from its root.
    let n = forest.nodes.len();
    let mut kids = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (i, node) in forest.nodes.iter().enumerate() {
        match node.parent {
            Some(p) => kids[p].push(i),
            None => roots.push(i),
        }
    }
    fn enc(t: usize, forest: &Forest, kids: &[Vec<usize>]) -> String {
        let mut parts: Vec<String> = kids[t].iter().map(|&u| enc(u, forest, kids)).collect();
        parts.sort();
        let node = &forest.nodes[t];
        format!("({:x}{}{})", node.bag.bits(), if node.in_f { "f" } else { "" }, parts.concat())
    }
    let mut parts: Vec<String> = roots.iter().map(|&r| enc(r, forest, &kids)).collect();
    parts.sort();
    parts.concat()
}

/// Joins the component trees: roots on the free side form a chain, other
/// roots hang below the first root.
fn connect_roots(forest: &mut Forest) {
    let roots: Vec<usize> = (0..forest.nodes.len())
        .filter(|&i| forest.nodes[i].parent.is_none())
        .collect();
    let (f_roots, others): (Vec<usize>, Vec<usize>) =
        roots.iter().partition(|&&r| forest.nodes[r].in_f);
    let Some(&anchor) = f_roots.first().or(others.first()) else {
        return;
    };
    for w in f_roots.windows(2) {
        forest.nodes[w[1]].parent = Some(w[0]);
    }
    for &r in &others {
        if r != anchor {
            forest.nodes[r].parent = Some(anchor);
        }
    }
}

/// Rooted tree over atom indices with the running-intersection property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    pub parent: Vec<Option<usize>>,
    pub root: usize,
}

impl JoinTree {
    pub fn children(&self, t: usize) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&i| self.parent[i] == Some(t))
            .collect()
    }

    pub fn as_td(&self, phi: &Cq) -> TreeDecomposition {
        let bags = phi.atoms().iter().map(|a| a.vars()).collect();
        let edges = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, p)))
            .collect();
        TreeDecomposition::new(bags, edges)
    }
}

/// GYO ear removal. An atom is an ear when the variables it shares with the
/// other remaining atoms all occur in a single one of them.
pub fn build_join_tree(psi: &Cq) -> Result<JoinTree> {
    let vars: Vec<VarSet> = psi.atoms().iter().map(|a| a.vars()).collect();
    let n = vars.len();
    if n == 0 {
        return Err(Error::NotAcyclic);
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut parent = vec![None; n];
    let mut left = n;
    while left > 1 {
        let mut progress = false;
        for e in 0..n {
            if !active[e] {
                continue;
            }
            let others = (0..n)
                .filter(|&f| f != e && active[f])
                .fold(VarSet::EMPTY, |acc, f| acc.union(vars[f]));
            let shared = vars[e].intersection(others);
            let witness = (0..n).find(|&f| f != e && active[f] && shared.is_subset(vars[f]));
            if let Some(f) = witness {
                parent[e] = Some(f);
                active[e] = false;
                left -= 1;
                progress = true;
                if left == 1 {
                    break;
                }
            }
        }
        if !progress {
            return Err(Error::NotAcyclic);
        }
    }
    let root = active.iter().position(|&a| a).unwrap();
    Ok(JoinTree { parent, root })
}
