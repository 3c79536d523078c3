//! Verifying, searching, enumerating, and restricting maximal green
//! sequences; oriented-exchange-graph exploration.

use crate::error::{Error, Result};
use crate::quiver::{IceQuiver, Quiver, RowSign};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};

/// A candidate or certified maximal green sequence: mutable vertex indices,
/// applied left to right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreenSequence(pub Vec<usize>);

impl GreenSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse_csv(text: &str) -> Result<GreenSequence> {
        let steps: std::result::Result<Vec<usize>, _> =
            text.split(',').map(|t| t.trim().parse::<usize>()).collect();
        Ok(GreenSequence(steps.map_err(|e| {
            Error::InvalidInput(format!("bad sequence: {}", e))
        })?))
    }
}

impl std::fmt::Display for GreenSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One c-vector per step: the c-vector of the mutated vertex just before the
/// step. All vectors are positive along a valid green sequence.
pub type CVectorTrace = Vec<Vec<i64>>;

/// Applies `s` as green moves starting from the framed quiver of `q`.
/// Fails fast with `NotGreenAtStep` (1-based) when a step targets a red
/// vertex.
pub fn apply_green_sequence(q: &Quiver, s: &GreenSequence) -> Result<(IceQuiver, CVectorTrace)> {
    let mut seed = q.framed();
    let mut trace = Vec::with_capacity(s.len());
    for (idx, &k) in s.0.iter().enumerate() {
        if k < 1 || k > q.n() {
            return Err(Error::IndexOutOfRange(k, q.n()));
        }
        let c = seed.c_matrix()?;
        if c.row_sign(k) != Some(RowSign::NonNegative) {
            return Err(Error::NotGreenAtStep(idx + 1));
        }
        trace.push(c.row(k).to_vec());
        seed = seed.mutate(k)?;
    }
    Ok((seed, trace))
}

/// Why a sequence failed to be a maximal green sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum InvalidReason {
    NotGreenAtStep(usize),
    FinalSeedNotAllRed,
    BadIndex(usize),
}

/// `Ok(trace)` when `s` is a maximal green sequence of `q`, otherwise the
/// reason it is not.
pub fn check_maximal_green(
    q: &Quiver,
    s: &GreenSequence,
) -> std::result::Result<CVectorTrace, InvalidReason> {
    match apply_green_sequence(q, s) {
        Ok((end, trace)) => {
            if end.is_all_red().unwrap_or(false) {
                Ok(trace)
            } else {
                Err(InvalidReason::FinalSeedNotAllRed)
            }
        }
        Err(Error::NotGreenAtStep(j)) => Err(InvalidReason::NotGreenAtStep(j)),
        Err(Error::IndexOutOfRange(k, _)) => Err(InvalidReason::BadIndex(k)),
        Err(_) => Err(InvalidReason::FinalSeedNotAllRed),
    }
}

pub fn is_maximal_green(q: &Quiver, s: &GreenSequence) -> bool {
    check_maximal_green(q, s).is_ok()
}

/// Search limits for the breadth-first explorations.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_nodes: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 2_000_000 }
    }
}

/// Result of a bounded breadth-first search for a shortest maximal green
/// sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SearchCertificate {
    pub minimal_length: Option<usize>,
    pub witness: Option<GreenSequence>,
    pub trace: Option<CVectorTrace>,
    pub explored_depth: usize,
    pub exhaustive: bool,
    pub nodes: usize,
}

/// Breadth-first search over seeds reachable by green moves, deduplicated by
/// the canonical c-matrix key. Returns the first depth at which an all-red
/// seed appears together with the lexicographically smallest witness of that
/// depth. `exhaustive` is true when every strictly shorter green path was
/// explored (always the case when a witness is found within `depth_bound`),
/// or when the green-move search space was exhausted below the bound.
pub fn shortest_mgs(q: &Quiver, depth_bound: usize, budget: SearchBudget) -> Result<SearchCertificate> {
    if depth_bound < 1 {
        return Err(Error::InvalidInput("depth_bound must be at least 1".into()));
    }
    let start = q.framed();
    let mut layer: Vec<(IceQuiver, Vec<usize>)> = vec![(start.clone(), Vec::new())];
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    seen.insert(start.c_matrix()?.canonical_key(), ());
    let mut nodes = 1usize;

    for depth in 0..depth_bound {
        // Lexicographically smallest path first within a layer, children in
        // ascending vertex order: the first all-red hit is the lex-min witness.
        let mut next: Vec<(IceQuiver, Vec<usize>)> = Vec::new();
        for (seed, path) in &layer {
            let c = seed.c_matrix()?;
            for k in 1..=q.n() {
                if c.row_sign(k) != Some(RowSign::NonNegative) {
                    continue;
                }
                let child = seed.mutate(k)?;
                let key = child.c_matrix()?.canonical_key();
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, ());
                nodes += 1;
                if nodes > budget.max_nodes {
                    return Err(Error::ResourceLimit(format!(
                        "node budget {} exceeded",
                        budget.max_nodes
                    )));
                }
                let mut p = path.clone();
                p.push(k);
                if child.is_all_red()? {
                    let witness = GreenSequence(p);
                    let trace = check_maximal_green(q, &witness)
                        .map_err(|_| Error::ConstructionInvariantViolated("bfs witness invalid".into()))?;
                    return Ok(SearchCertificate {
                        minimal_length: Some(depth + 1),
                        witness: Some(witness),
                        trace: Some(trace),
                        explored_depth: depth + 1,
                        exhaustive: true,
                        nodes,
                    });
                }
                next.push((child, p));
            }
        }
        if next.is_empty() {
            // Green search space exhausted with no all-red seed.
            return Ok(SearchCertificate {
                minimal_length: None,
                witness: None,
                trace: None,
                explored_depth: depth,
                exhaustive: true,
                nodes,
            });
        }
        layer = next;
    }
    Ok(SearchCertificate {
        minimal_length: None,
        witness: None,
        trace: None,
        explored_depth: depth_bound,
        exhaustive: false,
        nodes,
    })
}

/// Exhaustive DFS of green-move prefixes up to length `limit`; returns every
/// maximal green sequence found, in lexicographic order. Sequences, not
/// seeds, are the output: nothing is deduplicated.
pub fn all_mgs_up_to_length(
    q: &Quiver,
    limit: usize,
    budget: SearchBudget,
) -> Result<Vec<GreenSequence>> {
    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut prefix = Vec::new();
    dfs_green(&q.framed(), q.n(), limit, &mut prefix, &mut out, &mut visited, budget.max_nodes)?;
    Ok(out)
}

fn dfs_green(
    seed: &IceQuiver,
    n: usize,
    limit: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<GreenSequence>,
    visited: &mut usize,
    max_nodes: usize,
) -> Result<()> {
    *visited += 1;
    if *visited > max_nodes {
        return Err(Error::ResourceLimit(format!("node budget {} exceeded", max_nodes)));
    }
    if seed.is_all_red()? {
        out.push(GreenSequence(prefix.clone()));
        return Ok(());
    }
    if prefix.len() == limit {
        return Ok(());
    }
    let c = seed.c_matrix()?;
    for k in 1..=n {
        if c.row_sign(k) == Some(RowSign::NonNegative) {
            let child = seed.mutate(k)?;
            prefix.push(k);
            dfs_green(&child, n, limit, prefix, out, visited, max_nodes)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// A node of the enumerated exchange graph.
#[derive(Clone, Debug, Serialize)]
pub struct GraphNode {
    pub id: usize,
    pub c_matrix: Vec<Vec<i64>>,
    pub all_red: bool,
    pub all_green: bool,
}

/// An edge, labeled by the mutated vertex and its c-vector at the source.
#[derive(Clone, Debug, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub vertex: usize,
    pub c_vector: Vec<i64>,
    pub green: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub truncated: bool,
}

impl ExchangeGraph {
    /// Number of maximal directed green paths from the initial seed, with
    /// their lengths. Only meaningful when the graph is complete.
    pub fn maximal_green_paths(&self) -> Vec<usize> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            if e.green {
                adj.entry(e.from).or_default().push(e.to);
            }
        }
        let mut lengths = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((v, d)) = stack.pop() {
            match adj.get(&v) {
                Some(children) if !children.is_empty() => {
                    for &w in children {
                        stack.push((w, d + 1));
                    }
                }
                _ => lengths.push(d),
            }
        }
        lengths.sort_unstable();
        lengths
    }

    /// Deterministic DOT rendering; green edges carry c-vector labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph exchange {\n");
        for node in &self.nodes {
            let shape = if node.all_red {
                " peripheries=2"
            } else if node.all_green {
                " penwidth=2"
            } else {
                ""
            };
            s.push_str(&format!("  n{} [label=\"{}\"{}];\n", node.id, node.id, shape));
        }
        for e in &self.edges {
            if e.green {
                let label: Vec<String> = e.c_vector.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!(
                    "  n{} -> n{} [label=\"{} ({})\" color=green];\n",
                    e.from,
                    e.to,
                    e.vertex,
                    label.join(",")
                ));
            } else {
                s.push_str(&format!(
                    "  n{} -> n{} [label=\"{}\" color=red style=dashed];\n",
                    e.from, e.to, e.vertex
                ));
            }
        }
        s.push_str("}\n");
        s
    }

    /// JSON-lines rendering: one node or edge object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            out.push_str(&serde_json::json!({ "node": node }).to_string());
            out.push('\n');
        }
        for e in &self.edges {
            out.push_str(&serde_json::json!({ "edge": e }).to_string());
            out.push('\n');
        }
        out
    }
}

/// Enumerates seeds reachable from the framed quiver, deduplicated by
/// canonical c-matrix key. With `green_only`, only green moves are followed
/// (the oriented exchange graph); otherwise every mutation is followed and
/// each directed edge records whether it was a green move. Nodes are
/// processed in canonical-key order per depth layer, so the output is
/// deterministic.
pub fn enumerate_exchange_graph(
    q: &Quiver,
    node_limit: usize,
    green_only: bool,
) -> Result<ExchangeGraph> {
    if node_limit < 1 {
        return Err(Error::InvalidInput("node_limit must be at least 1".into()));
    }
    let start = q.framed();
    let start_key = start.c_matrix()?.canonical_key();
    let mut ids: HashMap<Vec<u8>, usize> = HashMap::new();
    ids.insert(start_key, 0);
    let mut nodes = vec![make_node(0, &start)?];
    let mut edges = Vec::new();
    let mut truncated = false;
    let mut queue: VecDeque<(usize, IceQuiver)> = VecDeque::new();
    queue.push_back((0, start));

    while let Some((id, seed)) = queue.pop_front() {
        let c = seed.c_matrix()?;
        for k in 1..=q.n() {
            let green = c.row_sign(k) == Some(RowSign::NonNegative);
            if green_only && !green {
                continue;
            }
            let child = seed.mutate(k)?;
            let key = child.c_matrix()?.canonical_key();
            let child_id = match ids.get(&key) {
                Some(&cid) => cid,
                None => {
                    if nodes.len() >= node_limit {
                        truncated = true;
                        continue;
                    }
                    let cid = nodes.len();
                    ids.insert(key, cid);
                    nodes.push(make_node(cid, &child)?);
                    queue.push_back((cid, child.clone()));
                    cid
                }
            };
            edges.push(GraphEdge {
                from: id,
                to: child_id,
                vertex: k,
                c_vector: c.row(k).to_vec(),
                green,
            });
        }
    }
    // The unoriented exchange graph double-counts each edge (once per
    // direction); keep both since they carry direction-specific labels.
    Ok(ExchangeGraph { nodes, edges, truncated })
}

fn make_node(id: usize, seed: &IceQuiver) -> Result<GraphNode> {
    let c = seed.c_matrix()?;
    let all_red = (1..=seed.n()).all(|i| c.row_sign(i) == Some(RowSign::NonPositive));
    let all_green = (1..=seed.n()).all(|i| c.row_sign(i) == Some(RowSign::NonNegative));
    Ok(GraphNode { id, c_matrix: c.rows(), all_red, all_green })
}

/// Outcome of restricting a maximal green sequence to a full subquiver.
#[derive(Clone, Debug, Serialize)]
pub struct Restriction {
    /// Steps in the subquiver's own 1-based numbering.
    pub sequence: GreenSequence,
    /// `vertex_map[i]` is the original label of subquiver vertex `i + 1`.
    pub vertex_map: Vec<usize>,
}

/// Restricts a maximal green sequence of `q` to the full subquiver on `s_set`
/// by filtering its c-vector trace to the vectors supported on `s_set`,
/// projecting, and replaying: at each step the unique green vertex whose
/// c-vector equals the next filtered vector is mutated.
pub fn restrict_mgs(q: &Quiver, s: &GreenSequence, s_set: &[usize]) -> Result<Restriction> {
    let trace = check_maximal_green(q, s).map_err(|r| {
        Error::InvalidInput(format!("sequence is not a maximal green sequence: {:?}", r))
    })?;
    let (sub, map) = q.full_subquiver(s_set)?;
    let positions: Vec<usize> = map.iter().map(|&v| v - 1).collect();
    let in_set = |coord: usize| positions.contains(&coord);

    let mut filtered: Vec<Vec<i64>> = Vec::new();
    for vec in &trace {
        let supported = vec
            .iter()
            .enumerate()
            .all(|(coord, &val)| val == 0 || in_set(coord));
        if supported {
            filtered.push(positions.iter().map(|&p| vec[p]).collect());
        }
    }

    let mut seed = sub.framed();
    let mut steps = Vec::with_capacity(filtered.len());
    for want in &filtered {
        let c = seed.c_matrix()?;
        let mut found = None;
        for k in 1..=sub.n() {
            if c.row_sign(k) == Some(RowSign::NonNegative) && c.row(k) == want.as_slice() {
                found = Some(k);
                break;
            }
        }
        let k = found.ok_or_else(|| Error::ReplayMismatch(want.clone()))?;
        steps.push(k);
        seed = seed.mutate(k)?;
    }
    if !seed.is_all_red()? {
        return Err(Error::ReplayMismatch(vec![]));
    }
    Ok(Restriction { sequence: GreenSequence(steps), vertex_map: map })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> Quiver {
        Quiver::new(2, &[(1, 2, 1)]).unwrap()
    }

    fn cycle3() -> Quiver {
        Quiver::new(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 1)]).unwrap()
    }

    #[test]
    fn a2_apply_and_trace() {
        // Oracle-derived frozen values for the framed 1->2.
        let (end, trace) = apply_green_sequence(&a2(), &GreenSequence(vec![1, 2])).unwrap();
        assert!(end.is_all_red().unwrap());
        assert_eq!(trace, vec![vec![1, 0], vec![0, 1]]);

        let (end, trace) = apply_green_sequence(&a2(), &GreenSequence(vec![2, 1, 2])).unwrap();
        assert!(end.is_all_red().unwrap());
        assert_eq!(trace, vec![vec![0, 1], vec![1, 1], vec![1, 0]]);

        let err = apply_green_sequence(&a2(), &GreenSequence(vec![1, 1])).unwrap_err();
        assert_eq!(err, Error::NotGreenAtStep(2));
    }

    #[test]
    fn a2_maximality() {
        assert!(is_maximal_green(&a2(), &GreenSequence(vec![1, 2])));
        assert!(!is_maximal_green(&a2(), &GreenSequence(vec![1])));
        assert_eq!(
            check_maximal_green(&a2(), &GreenSequence(vec![1])),
            Err(InvalidReason::FinalSeedNotAllRed)
        );
    }

    #[test]
    fn trace_vectors_positive() {
        let trace = check_maximal_green(&cycle3(), &GreenSequence(vec![1, 2, 3, 1])).ok();
        if let Some(trace) = trace {
            for v in trace {
                assert!(v.iter().all(|&x| x >= 0) && v.iter().any(|&x| x > 0));
            }
        }
    }

    #[test]
    fn shortest_a2() {
        let cert = shortest_mgs(&a2(), 10, SearchBudget::default()).unwrap();
        assert_eq!(cert.minimal_length, Some(2));
        assert_eq!(cert.witness, Some(GreenSequence(vec![1, 2])));
        assert!(cert.exhaustive);
    }

    #[test]
    fn shortest_cycle3_is_four() {
        let cert = shortest_mgs(&cycle3(), 10, SearchBudget::default()).unwrap();
        assert_eq!(cert.minimal_length, Some(4));
        assert!(is_maximal_green(&cycle3(), cert.witness.as_ref().unwrap()));
    }

    #[test]
    fn shortest_acyclic_is_vertex_count() {
        let q = Quiver::new(4, &[(1, 2, 1), (2, 3, 1), (3, 4, 1)]).unwrap();
        let cert = shortest_mgs(&q, 10, SearchBudget::default()).unwrap();
        assert_eq!(cert.minimal_length, Some(4));
    }

    #[test]
    fn all_mgs_a2() {
        let found = all_mgs_up_to_length(&a2(), 3, SearchBudget::default()).unwrap();
        assert_eq!(
            found,
            vec![GreenSequence(vec![1, 2]), GreenSequence(vec![2, 1, 2])]
        );
        let short = all_mgs_up_to_length(&a2(), 1, SearchBudget::default()).unwrap();
        assert!(short.is_empty());
    }

    #[test]
    fn all_mgs_cycle3_at_bound() {
        let found = all_mgs_up_to_length(&cycle3(), 4, SearchBudget::default()).unwrap();
        assert!(!found.is_empty());
        assert!(found.iter().all(|s| s.len() == 4));
        assert!(found.iter().all(|s| is_maximal_green(&cycle3(), s)));
    }

    #[test]
    fn monotone_certificate() {
        for q in [a2(), cycle3()] {
            let cert = shortest_mgs(&q, 10, SearchBudget::default()).unwrap();
            let min = cert.minimal_length.unwrap();
            assert!(all_mgs_up_to_length(&q, min - 1, SearchBudget::default())
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn exchange_graph_a2_pentagon() {
        let g = enumerate_exchange_graph(&a2(), 100, false).unwrap();
        assert_eq!(g.nodes.len(), 5);
        assert!(!g.truncated);
        assert_eq!(g.maximal_green_paths(), vec![2, 3]);
    }

    #[test]
    fn exchange_graph_single_vertex() {
        let q = Quiver::new(1, &[]).unwrap();
        let g = enumerate_exchange_graph(&q, 100, false).unwrap();
        assert_eq!(g.nodes.len(), 2);
        // one unoriented edge, recorded once per direction
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.edges.iter().filter(|e| e.green).count(), 1);
    }

    #[test]
    fn exchange_graph_kronecker_green_side() {
        let q = Quiver::new(2, &[(1, 2, 2)]).unwrap();
        // The (1,2) path terminates all-red; the other green fan never does.
        let found = all_mgs_up_to_length(&q, 3, SearchBudget::default()).unwrap();
        assert_eq!(found, vec![GreenSequence(vec![1, 2])]);
        let g = enumerate_exchange_graph(&q, 8, true).unwrap();
        assert!(g.truncated);
        assert!(g.nodes.iter().any(|n| n.all_red));
    }

    #[test]
    fn exchange_graph_truncation() {
        let err_free = enumerate_exchange_graph(&cycle3(), 3, false).unwrap();
        assert!(err_free.truncated);
        assert_eq!(err_free.nodes.len(), 3);
    }

    #[test]
    fn dot_is_deterministic() {
        let g1 = enumerate_exchange_graph(&a2(), 100, false).unwrap().to_dot();
        let g2 = enumerate_exchange_graph(&a2(), 100, false).unwrap().to_dot();
        assert_eq!(g1, g2);
        assert!(g1.contains("color=green"));
    }

    #[test]
    fn restrict_identity_and_single() {
        let s = GreenSequence(vec![2, 1, 2]);
        let full = restrict_mgs(&a2(), &s, &[1, 2]).unwrap();
        assert_eq!(full.sequence, s);

        let single = restrict_mgs(&a2(), &s, &[1]).unwrap();
        assert_eq!(single.sequence, GreenSequence(vec![1]));
        assert_eq!(single.vertex_map, vec![1]);

        let single2 = restrict_mgs(&a2(), &s, &[2]).unwrap();
        assert_eq!(single2.sequence, GreenSequence(vec![1]));
        assert_eq!(single2.vertex_map, vec![2]);
    }

    #[test]
    fn restrict_preserves_maximality() {
        let q = cycle3();
        let cert = shortest_mgs(&q, 10, SearchBudget::default()).unwrap();
        let witness = cert.witness.unwrap();
        for subset in [vec![1], vec![2, 3], vec![1, 3], vec![1, 2, 3]] {
            let r = restrict_mgs(&q, &witness, &subset).unwrap();
            let (sub, _) = q.full_subquiver(&subset).unwrap();
            assert!(is_maximal_green(&sub, &r.sequence));
        }
    }
}
