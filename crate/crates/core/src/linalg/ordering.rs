//! Fill-reducing ordering by recursive bisection with BFS level-set
//! separators (George's automatic nested dissection).

use std::collections::VecDeque;

const LEAF_SIZE: usize = 48;

struct Graph<'a> {
    row_ptr: &'a [usize],
    col_idx: &'a [usize],
}

impl Graph<'_> {
    fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.col_idx[self.row_ptr[v]..self.row_ptr[v + 1]].iter().copied().filter(move |&w| w != v)
    }
}

struct Dissector<'a> {
    graph: Graph<'a>,
    mark: Vec<u32>,
    next_id: u32,
    level: Vec<u32>,
    order: Vec<usize>,
}

/// Returns `perm` with `perm[k]` the original index eliminated at step `k`.
/// The adjacency is given in compressed-row form; the diagonal is ignored.
pub fn nested_dissection(n: usize, row_ptr: &[usize], col_idx: &[usize]) -> Vec<usize> {
    let mut d = Dissector {
        graph: Graph { row_ptr, col_idx },
        mark: vec![0; n],
        next_id: 1,
        level: vec![u32::MAX; n],
        order: Vec::with_capacity(n),
    };
    d.dissect((0..n).collect());
    debug_assert_eq!(d.order.len(), n);
    d.order
}

impl Dissector<'_> {
    fn fresh_mark(&mut self, set: &[usize]) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        for &v in set {
            self.mark[v] = id;
        }
        id
    }

    /// BFS inside the marked set; returns the visit order and level counts.
    fn bfs(&mut self, root: usize, id: u32) -> (Vec<usize>, Vec<usize>) {
        let mut visit = vec![root];
        let mut counts = vec![1usize];
        self.level[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let lv = self.level[v];
            for w in self.graph.neighbours(v) {
                if self.mark[w] == id && self.level[w] == u32::MAX {
                    self.level[w] = lv + 1;
                    if counts.len() <= (lv + 1) as usize {
                        counts.push(0);
                    }
                    counts[(lv + 1) as usize] += 1;
                    visit.push(w);
                    queue.push_back(w);
                }
            }
        }
        (visit, counts)
    }

    fn clear_levels(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.level[v] = u32::MAX;
        }
    }

    fn dissect(&mut self, set: Vec<usize>) {
        if set.len() <= LEAF_SIZE {
            self.order.extend(set);
            return;
        }
        let id = self.fresh_mark(&set);

        // Split into connected components first.
        let (visit, _) = self.bfs(set[0], id);
        if visit.len() < set.len() {
            let mut components = Vec::new();
            let mut comp = visit;
            loop {
                self.clear_levels(&comp);
                for &v in &comp {
                    self.mark[v] = 0;
                }
                components.push(comp);
                match set.iter().find(|&&v| self.mark[v] == id) {
                    Some(&root) => comp = self.bfs(root, id).0,
                    None => break,
                }
            }
            for c in components {
                self.dissect(c);
            }
            return;
        }
        self.clear_levels(&visit);

        // Pseudo-peripheral root: repeat BFS from the farthest node.
        let mut root = set[0];
        let mut ecc = 0usize;
        let (mut visit, mut counts);
        loop {
            let r = self.bfs(root, id);
            visit = r.0;
            counts = r.1;
            let depth = counts.len() - 1;
            let far = *visit.last().unwrap();
            self.clear_levels(&visit);
            if depth <= ecc {
                break;
            }
            ecc = depth;
            root = far;
        }
        let (visit, counts) = self.bfs(root, id);
        let depth = counts.len() - 1;
        if depth < 2 {
            self.clear_levels(&visit);
            self.order.extend(set);
            return;
        }
        // Smallest level among those leaving at least a fifth of the set on
        // either side; graded meshes have much thinner levels away from the
        // median.
        let n = set.len();
        let mut before = 0;
        let mut mid = 0;
        let mut best = usize::MAX;
        for (j, &c) in counts.iter().enumerate() {
            let after = n - before - c;
            if j > 0 && j < depth && 5 * before >= n && 5 * after >= n && c < best {
                best = c;
                mid = j;
            }
            before += c;
        }
        if best == usize::MAX {
            let mut acc = 0;
            for (j, &c) in counts.iter().enumerate() {
                acc += c;
                if 2 * acc >= n {
                    mid = j;
                    break;
                }
            }
        }
        let mid = mid.clamp(1, depth - 1) as u32;
        let (mut left, mut right, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &visit {
            match self.level[v].cmp(&mid) {
                std::cmp::Ordering::Less => left.push(v),
                std::cmp::Ordering::Equal => {
                    // A level vertex with no neighbour beyond it does not
                    // separate anything.
                    let graph = &self.graph;
                    let (level, mark) = (&self.level, &self.mark);
                    if graph.neighbours(v).any(|w| mark[w] == id && level[w] == mid + 1) {
                        sep.push(v);
                    } else {
                        left.push(v);
                    }
                }
                std::cmp::Ordering::Greater => right.push(v),
            }
        }
        self.clear_levels(&visit);
        self.dissect(left);
        self.dissect(right);
        self.order.extend(sep);
    }
}

/// Nested dissection driven by node coordinates: each set is cut at the
/// median along one axis and the nodes of one half touching the other half
/// form the separator. Of the two axes the one with the smaller separator
/// is used. On strongly graded meshes this keeps separators short where
/// BFS level sets wander along the refined region.
pub fn coordinate_dissection(n: usize, row_ptr: &[usize], col_idx: &[usize], coords: &[[f64; 2]]) -> Vec<usize> {
    assert_eq!(coords.len(), n, "one coordinate per node");
    let mut c = CoordDissector { graph: Graph { row_ptr, col_idx }, coords, stamp: vec![0; n], next_id: 1, order: Vec::with_capacity(n) };
    c.dissect((0..n).collect());
    debug_assert_eq!(c.order.len(), n);
    c.order
}

struct CoordDissector<'a> {
    graph: Graph<'a>,
    coords: &'a [[f64; 2]],
    stamp: Vec<u32>,
    next_id: u32,
    order: Vec<usize>,
}

impl CoordDissector<'_> {
    /// Median split along `axis`; returns `(left, right, separator)` with
    /// the separator taken from the right half.
    fn split(&mut self, set: &[usize], axis: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut sorted = set.to_vec();
        let mid = sorted.len() / 2;
        let coords = self.coords;
        sorted.select_nth_unstable_by(mid, |&a, &b| coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b)));
        let right_half = sorted.split_off(mid);
        let id = self.next_id;
        self.next_id += 1;
        for &v in &sorted {
            self.stamp[v] = id;
        }
        let (mut right, mut sep) = (Vec::new(), Vec::new());
        for v in right_half {
            if self.graph.neighbours(v).any(|w| self.stamp[w] == id) {
                sep.push(v);
            } else {
                right.push(v);
            }
        }
        (sorted, right, sep)
    }

    fn dissect(&mut self, set: Vec<usize>) {
        if set.len() <= LEAF_SIZE {
            self.order.extend(set);
            return;
        }
        let by_x = self.split(&set, 0);
        let by_y = self.split(&set, 1);
        let (left, right, sep) = if by_y.2.len() < by_x.2.len() { by_y } else { by_x };
        self.dissect(left);
        self.dissect(right);
        self.order.extend(sep);
    }
}
