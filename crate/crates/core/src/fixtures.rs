//! Small reference graphs and random graph generators for tests and self-checks.

use crate::graph::Graph;
use crate::rng::RandomSource;

/// One node hanging off the root with weight 2.
pub fn g1() -> Graph {
    Graph::new(vec![vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap()
}

/// Two nodes, every possible edge with weight 1.
pub fn g2() -> Graph {
    Graph::from_fn(2, |_, _| 1.0).unwrap()
}

/// Three nodes; two dependency trees use root -> 1 and one uses root -> 2.
/// The root-constrained walk picks each root child with probability 1/2.
pub fn g3() -> Graph {
    Graph::new(vec![
        vec![0.0, 0.5, 0.5, 0.0],
        vec![0.0, 0.0, 1.0, 1.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 1.0, 0.0, 0.0],
    ])
    .unwrap()
}

/// Node 2 has no incoming edge.
pub fn isolated() -> Graph {
    Graph::new(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap()
}

/// Valid graph with spanning trees but no single-root tree: every non-root
/// node hangs only off the root.
pub fn no_dependency_tree() -> Graph {
    Graph::new(vec![vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap()
}

/// Heavy root edges, so most spanning trees have several root children.
pub fn root_heavy() -> Graph {
    Graph::new(vec![
        vec![0.0, 3.0, 2.0, 2.0],
        vec![0.0, 0.0, 1.0, 0.5],
        vec![0.0, 0.5, 0.0, 1.0],
        vec![0.0, 1.0, 0.5, 0.0],
    ])
    .unwrap()
}

/// The named fixtures with at most four nodes that have dependency trees.
pub fn small() -> Vec<(&'static str, Graph)> {
    vec![("g1", g1()), ("g2", g2()), ("g3", g3()), ("root-heavy", root_heavy())]
}

/// Random graph on `n` nodes: each edge is kept with probability `density`
/// and weighted uniformly on (0, 1]. Redrawn until every node has an incoming
/// edge and at least one single-root tree exists.
pub fn random_graph(n: usize, density: f64, rng: &mut RandomSource) -> Graph {
    loop {
        let g = Graph::from_fn(n, |_, _| {
            let keep = rng.uniform() < density;
            let w = 1.0 - rng.uniform();
            if keep {
                w
            } else {
                0.0
            }
        })
        .unwrap();
        if g.validate().is_ok() && has_dependency_tree(&g) {
            return g;
        }
    }
}

fn has_dependency_tree(g: &Graph) -> bool {
    // some root child must reach every node through non-root edges
    let n = g.n();
    (1..=n).filter(|&c| g.weight(0, c) > 0.0).any(|c| {
        let mut seen = vec![false; n + 1];
        seen[c] = true;
        let mut stack = vec![c];
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate().skip(1) {
                if !*s && g.weight(i, j) > 0.0 {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TreeKind;
    use crate::oracle::exact_distribution;

    #[test]
    fn fixture_support_sizes() {
        let dep = |g: &Graph| exact_distribution(g, TreeKind::Dependency).map(|d| d.len());
        assert_eq!(dep(&g1()), Ok(1));
        assert_eq!(dep(&g2()), Ok(2));
        assert_eq!(dep(&g3()), Ok(3));
        assert!(isolated().validate().is_err());
        assert!(no_dependency_tree().validate().is_ok());
        assert!(dep(&no_dependency_tree()).is_err());
        assert_eq!(exact_distribution(&no_dependency_tree(), TreeKind::Spanning).unwrap().len(), 1);
    }

    #[test]
    fn random_graphs_have_dependency_trees() {
        let mut rng = RandomSource::new(1);
        for n in 2..=5 {
            let g = random_graph(n, 0.6, &mut rng);
            assert!(exact_distribution(&g, TreeKind::Dependency).unwrap().z > 0.0);
        }
    }
}
