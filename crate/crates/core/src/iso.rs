//! Isomorphism of diagrams that preserves node kinds, phases and the ordered
//! boundary lists.

use std::collections::{BTreeMap, HashMap};

use crate::diagram::{Diagram, NodeId, NodeKind};

/// Refined node colors after a few rounds of neighborhood hashing. Boundary
/// nodes are pinned to their position in the input/output lists.
fn refine(d: &Diagram, rounds: usize) -> BTreeMap<NodeId, u64> {
    use std::hash::{Hash, Hasher};
    let hash = |v: &dyn Fn(&mut std::collections::hash_map::DefaultHasher)| {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        v(&mut h);
        h.finish()
    };
    let mut color: BTreeMap<NodeId, u64> = d
        .nodes()
        .map(|(id, n)| {
            let pos = match n.kind {
                NodeKind::Input => d.inputs().iter().position(|&x| x == id),
                NodeKind::Output => d.outputs().iter().position(|&x| x == id),
                _ => None,
            };
            let c = hash(&|h| {
                n.kind.hash(h);
                n.phase.hash(h);
                pos.hash(h);
                d.multiplicity(id, id).hash(h);
            });
            (id, c)
        })
        .collect();
    for _ in 0..rounds {
        color = d
            .nodes()
            .map(|(id, n)| {
                let mut nb: Vec<(u64, u32)> = n.adjacency().iter().map(|&(m, k)| (color[&m], k)).collect();
                nb.sort_unstable();
                (id, hash(&|h| {
                    color[&id].hash(h);
                    nb.hash(h);
                }))
            })
            .collect();
    }
    color
}

/// Whether `a` and `b` are the same diagram up to renaming of node ids.
pub fn isomorphic(a: &Diagram, b: &Diagram) -> bool {
    if a.num_nodes() != b.num_nodes()
        || a.edge_list().len() != b.edge_list().len()
        || a.inputs().len() != b.inputs().len()
        || a.outputs().len() != b.outputs().len()
    {
        return false;
    }
    let rounds = a.num_nodes().min(8);
    let ca = refine(a, rounds);
    let cb = refine(b, rounds);
    let mut hist_a: Vec<u64> = ca.values().copied().collect();
    let mut hist_b: Vec<u64> = cb.values().copied().collect();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return false;
    }
    let mut by_color: HashMap<u64, Vec<NodeId>> = HashMap::new();
    for (&id, &c) in &cb {
        by_color.entry(c).or_default().push(id);
    }
    // Most constrained nodes first.
    let mut order: Vec<NodeId> = a.node_ids().collect();
    order.sort_by_key(|id| (by_color[&ca[id]].len(), *id));
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    let mut used: HashMap<NodeId, bool> = HashMap::new();
    extend(a, b, &order, 0, &ca, &by_color, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    a: &Diagram,
    b: &Diagram,
    order: &[NodeId],
    depth: usize,
    ca: &BTreeMap<NodeId, u64>,
    by_color: &HashMap<u64, Vec<NodeId>>,
    map: &mut HashMap<NodeId, NodeId>,
    used: &mut HashMap<NodeId, bool>,
) -> bool {
    let Some(&n) = order.get(depth) else { return true };
    for &cand in &by_color[&ca[&n]] {
        if used.get(&cand).copied().unwrap_or(false) {
            continue;
        }
        let consistent = a
            .node(n)
            .unwrap()
            .adjacency()
            .iter()
            .filter_map(|&(m, k)| if m == n { Some((cand, k)) } else { map.get(&m).map(|&mm| (mm, k)) })
            .all(|(mm, k)| b.multiplicity(cand, mm) == k);
        let mapped_degree = a.node(n).unwrap().adjacency().iter().filter(|(m, _)| map.contains_key(m)).count();
        let back_degree = b.node(cand).unwrap().adjacency().iter().filter(|(m, _)| used.get(m).copied().unwrap_or(false)).count();
        if !consistent || mapped_degree != back_degree {
            continue;
        }
        map.insert(n, cand);
        used.insert(cand, true);
        if extend(a, b, order, depth + 1, ca, by_color, map, used) {
            return true;
        }
        map.remove(&n);
        used.insert(cand, false);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;

    fn path(kinds: &[(NodeKind, Angle)]) -> Diagram {
        let mut d = Diagram::new();
        let mut prev = d.add_input();
        for (k, a) in kinds {
            let n = d.add_node(*k, a.clone());
            d.add_edge(prev, n);
            prev = n;
        }
        let o = d.add_output();
        d.add_edge(prev, o);
        d
    }

    #[test]
    fn relabeled_is_isomorphic() {
        let a = path(&[(NodeKind::Z, Angle::PI), (NodeKind::X, Angle::ZERO)]);
        let mut b = Diagram::new();
        let o = b.add_output();
        let x = b.add_spider(NodeKind::X, Angle::ZERO);
        let z = b.add_spider(NodeKind::Z, Angle::PI);
        let i = b.add_input();
        b.add_edge(i, z);
        b.add_edge(z, x);
        b.add_edge(x, o);
        assert!(isomorphic(&a, &b));
    }

    #[test]
    fn phase_and_order_matter() {
        let a = path(&[(NodeKind::Z, Angle::PI), (NodeKind::X, Angle::ZERO)]);
        let b = path(&[(NodeKind::X, Angle::ZERO), (NodeKind::Z, Angle::PI)]);
        let c = path(&[(NodeKind::Z, Angle::HALF_PI), (NodeKind::X, Angle::ZERO)]);
        assert!(!isomorphic(&a, &b));
        assert!(!isomorphic(&a, &c));
    }
}
