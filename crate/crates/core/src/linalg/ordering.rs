use std::collections::VecDeque;

/// Reverse Cuthill-McKee ordering of an undirected graph given by adjacency
/// lists. Returns `order` with `order[new] = old`. Each component starts from
/// a pseudo-peripheral node.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adjacency, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            next.dedup();
            for w in next {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adjacency: &[Vec<usize>], start: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adjacency.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adjacency[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (level, last)
}

fn pseudo_peripheral(adjacency: &[Vec<usize>], seed: usize) -> usize {
    let mut v = seed;
    let (mut level, _) = bfs_levels(adjacency, v);
    let mut ecc = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
    for _ in 0..8 {
        // farthest node of minimum degree
        let far = (0..adjacency.len())
            .filter(|&w| level[w] == ecc)
            .min_by_key(|&w| (adjacency[w].len(), w))
            .unwrap_or(v);
        let (l2, _) = bfs_levels(adjacency, far);
        let e2 = l2.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if e2 <= ecc {
            break;
        }
        v = far;
        level = l2;
        ecc = e2;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_gets_bandwidth_one() {
        // shuffled path 3-0-4-1-2
        let adj = vec![vec![3, 4], vec![4, 2], vec![1], vec![0], vec![0, 1]];
        let order = reverse_cuthill_mckee(&adj);
        let mut pos = vec![0; 5];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        for (v, nb) in adj.iter().enumerate() {
            for &w in nb {
                assert_eq!((pos[v] as isize - pos[w] as isize).abs(), 1);
            }
        }
    }

    #[test]
    fn covers_disconnected_graphs() {
        let adj = vec![vec![1], vec![0], vec![], vec![4], vec![3]];
        let mut order = reverse_cuthill_mckee(&adj);
        order.sort();
        assert_eq!(order, vec![0, 1, 2, 3, 4]);
    }
}
