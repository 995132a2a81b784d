//! Immutable simple graphs on labels 1..=N with compressed adjacency.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected simple graph. Slot 0 of the offset array is an empty dummy so
/// that labels index directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    offsets: Vec<u64>,
    adj: Vec<u32>,
}

impl Graph {
    /// Graph on 1..=n with no edges.
    pub fn empty(n: u32) -> Self {
        Self {
            n,
            offsets: vec![0; n as usize + 2],
            adj: Vec::new(),
        }
    }

    /// Builds a graph from undirected edges; rejects self-loops, out-of-range
    /// labels and duplicates.
    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut deg = vec![0u64; n as usize + 2];
        for &(u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::VertexOutOfRange(w as u64));
                }
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0u64; n as usize + 2];
        for v in 1..=n as usize {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill: Vec<u64> = offsets.clone();
        let mut adj = vec![0u32; offsets[n as usize + 1] as usize];
        for &(u, v) in edges {
            adj[fill[u as usize] as usize] = v;
            fill[u as usize] += 1;
            adj[fill[v as usize] as usize] = u;
            fill[v as usize] += 1;
        }
        for v in 1..=n as usize {
            let s = &mut adj[offsets[v] as usize..offsets[v + 1] as usize];
            s.sort_unstable();
            if let Some(w) = s.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge {} {}",
                    v.min(w[0] as usize),
                    v.max(w[0] as usize)
                )));
            }
        }
        Ok(Self { n, offsets, adj })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n_edges(&self) -> u64 {
        self.adj.len() as u64 / 2
    }

    /// Sorted neighbors of v.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.adj[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: u32) -> u64 {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Number of neighbors with a larger label (the indegree in a growth model).
    pub fn younger_degree(&self, v: u32) -> u64 {
        let nb = self.neighbors(v);
        (nb.len() - nb.partition_point(|&w| w < v)) as u64
    }

    /// Edges (u, v) with u < v in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (1..=self.n).flat_map(move |u| {
            let nb = self.neighbors(u);
            nb[nb.partition_point(|&w| w < u)..]
                .iter()
                .map(move |&w| (u, w))
        })
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Induced subgraph on 1..=m.
    pub fn prefix(&self, m: u32) -> Graph {
        let m = m.min(self.n);
        let mut offsets = vec![0u64; m as usize + 2];
        let mut adj = Vec::new();
        for v in 1..=m {
            let nb = self.neighbors(v);
            adj.extend_from_slice(&nb[..nb.partition_point(|&w| w <= m)]);
            offsets[v as usize + 1] = adj.len() as u64;
        }
        Graph { n: m, offsets, adj }
    }

    /// Symmetry, simplicity and range checks.
    pub fn check_invariants(&self) -> Result<()> {
        for v in 1..=self.n {
            let nb = self.neighbors(v);
            for (i, &w) in nb.iter().enumerate() {
                if w == 0 || w > self.n {
                    return Err(Error::VertexOutOfRange(w as u64));
                }
                if w == v {
                    return Err(Error::InvalidParameter(format!("self-loop at {v}")));
                }
                if i > 0 && nb[i - 1] >= w {
                    return Err(Error::InvalidParameter(format!(
                        "neighbors of {v} not strictly sorted"
                    )));
                }
                if !self.has_edge(w, v) {
                    return Err(Error::InvalidParameter(format!("asymmetric edge {v}->{w}")));
                }
            }
        }
        Ok(())
    }
}

/// Connected components of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    /// label[v] for v in 1..=N; label[0] is unused.
    pub label: Vec<u32>,
    pub sizes: Vec<u64>,
    pub largest: u32,
}

impl ComponentLabeling {
    pub fn largest_size(&self) -> u64 {
        self.sizes.get(self.largest as usize).copied().unwrap_or(0)
    }

    /// Vertices of component `id` in ascending order.
    pub fn members(&self, id: u32) -> Vec<u32> {
        (1..self.label.len() as u32)
            .filter(|&v| self.label[v as usize] == id)
            .collect()
    }
}

/// Components by BFS sweep; ids follow the smallest member, ties for the
/// largest go to the smallest id.
pub fn components(g: &Graph) -> ComponentLabeling {
    const NONE: u32 = u32::MAX;
    let n = g.n();
    let mut label = vec![NONE; n as usize + 1];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for s in 1..=n {
        if label[s as usize] != NONE {
            continue;
        }
        let id = sizes.len() as u32;
        label[s as usize] = id;
        queue.push_back(s);
        let mut size = 0u64;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                if label[w as usize] == NONE {
                    label[w as usize] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    label[0] = 0;
    let mut largest = 0u32;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[largest as usize] {
            largest = i as u32;
        }
    }
    ComponentLabeling {
        label,
        sizes,
        largest,
    }
}

/// Reusable BFS buffers with epoch tagging.
#[derive(Clone, Debug)]
pub struct BfsScratch {
    epoch: u32,
    seen_a: Vec<u32>,
    seen_b: Vec<u32>,
    dist_a: Vec<u32>,
    dist_b: Vec<u32>,
    front: Vec<u32>,
    next: Vec<u32>,
    front_b: Vec<u32>,
}

impl BfsScratch {
    pub fn new(n: u32) -> Self {
        let len = n as usize + 1;
        Self {
            epoch: 0,
            seen_a: vec![0; len],
            seen_b: vec![0; len],
            dist_a: vec![0; len],
            dist_b: vec![0; len],
            front: Vec::new(),
            next: Vec::new(),
            front_b: Vec::new(),
        }
    }

    fn bump(&mut self, n: u32) {
        if self.seen_a.len() < n as usize + 1 {
            *self = Self::new(n);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen_a.iter_mut().for_each(|x| *x = 0);
            self.seen_b.iter_mut().for_each(|x| *x = 0);
            self.epoch = 1;
        }
    }

    /// Distance from the source of the last `bfs_from` call.
    pub fn dist(&self, v: u32) -> Option<u32> {
        (self.seen_a[v as usize] == self.epoch).then(|| self.dist_a[v as usize])
    }

    /// Full single-source BFS; distances are read back with `dist`.
    pub fn bfs_from(&mut self, g: &Graph, src: u32) {
        self.bump(g.n());
        let ep = self.epoch;
        self.seen_a[src as usize] = ep;
        self.dist_a[src as usize] = 0;
        self.front.clear();
        self.front.push(src);
        let mut d = 0;
        while !self.front.is_empty() {
            d += 1;
            self.next.clear();
            for &v in &self.front {
                for &w in g.neighbors(v) {
                    if self.seen_a[w as usize] != ep {
                        self.seen_a[w as usize] = ep;
                        self.dist_a[w as usize] = d;
                        self.next.push(w);
                    }
                }
            }
            std::mem::swap(&mut self.front, &mut self.next);
        }
    }

    /// Shortest-path length by bidirectional BFS, always expanding the
    /// frontier with the smaller total degree.
    pub fn distance(&mut self, g: &Graph, u: u32, v: u32) -> Option<u32> {
        if u == v {
            return Some(0);
        }
        self.bump(g.n());
        let ep = self.epoch;
        self.seen_a[u as usize] = ep;
        self.dist_a[u as usize] = 0;
        self.seen_b[v as usize] = ep;
        self.dist_b[v as usize] = 0;
        self.front.clear();
        self.front.push(u);
        self.front_b.clear();
        self.front_b.push(v);
        let (mut da, mut db) = (0u32, 0u32);
        loop {
            if self.front.is_empty() || self.front_b.is_empty() {
                return None;
            }
            let cost_a: u64 = self.front.iter().map(|&x| g.degree(x)).sum();
            let cost_b: u64 = self.front_b.iter().map(|&x| g.degree(x)).sum();
            let expand_a = cost_a <= cost_b;
            let (front, seen, dist, oseen, odist, depth) = if expand_a {
                (
                    &mut self.front,
                    &mut self.seen_a,
                    &mut self.dist_a,
                    &self.seen_b,
                    &self.dist_b,
                    &mut da,
                )
            } else {
                (
                    &mut self.front_b,
                    &mut self.seen_b,
                    &mut self.dist_b,
                    &self.seen_a,
                    &self.dist_a,
                    &mut db,
                )
            };
            *depth += 1;
            let mut best = u32::MAX;
            self.next.clear();
            for &x in front.iter() {
                for &w in g.neighbors(x) {
                    if oseen[w as usize] == ep {
                        best = best.min(*depth + odist[w as usize]);
                    }
                    if seen[w as usize] != ep {
                        seen[w as usize] = ep;
                        dist[w as usize] = *depth;
                        self.next.push(w);
                    }
                }
            }
            if best != u32::MAX {
                return Some(best);
            }
            std::mem::swap(front, &mut self.next);
        }
    }
}

/// Graph distance between u and v; None if disconnected.
pub fn bfs_distance(g: &Graph, u: u32, v: u32) -> Result<Option<u32>> {
    for w in [u, v] {
        if w == 0 || w > g.n() {
            return Err(Error::VertexOutOfRange(w as u64));
        }
    }
    Ok(BfsScratch::new(g.n()).distance(g, u, v))
}

/// A shortest path from u to v as a vertex sequence, if one exists.
pub fn shortest_path(g: &Graph, u: u32, v: u32) -> Option<Vec<u32>> {
    let mut s = BfsScratch::new(g.n());
    s.bfs_from(g, v);
    let mut d = s.dist(u)?;
    let mut path = vec![u];
    let mut x = u;
    while d > 0 {
        x = *g.neighbors(x).iter().find(|&&w| s.dist(w) == Some(d - 1))?;
        path.push(x);
        d -= 1;
    }
    Some(path)
}

/// max_{u,v∈s} d(u,v) with distances in the whole graph; None if some pair is
/// disconnected.
///
/// Uses eccentricity bounds: after a BFS from x, every w in s satisfies
/// max(d, e(x)−d) ≤ e(w) ≤ e(x)+d with d = d(x,w), where e is eccentricity
/// restricted to s. Vertices whose upper bound cannot beat the best
/// eccentricity seen are dropped without their own BFS.
pub fn subset_diameter(g: &Graph, s: &[u32]) -> Result<Option<u32>> {
    let mut set: Vec<u32> = s.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() {
        return Err(Error::InvalidParameter(
            "subset_diameter needs a nonempty set".into(),
        ));
    }
    if let Some(&w) = set.iter().find(|&&w| w == 0 || w > g.n()) {
        return Err(Error::VertexOutOfRange(w as u64));
    }
    let mut scratch = BfsScratch::new(g.n());
    let k = set.len();
    let mut lo = vec![0u32; k];
    let mut hi = vec![u32::MAX; k];
    let mut alive: Vec<usize> = (0..k).collect();
    let mut best = 0u32;
    let mut pick_high = true;
    while !alive.is_empty() {
        let &xi = if pick_high {
            alive
                .iter()
                .max_by_key(|&&i| (hi[i], std::cmp::Reverse(i)))
                .unwrap()
        } else {
            alive.iter().min_by_key(|&&i| (lo[i], i)).unwrap()
        };
        pick_high = !pick_high;
        scratch.bfs_from(g, set[xi]);
        let mut ecc = 0u32;
        let mut d = vec![0u32; k];
        for (i, &w) in set.iter().enumerate() {
            match scratch.dist(w) {
                Some(x) => {
                    d[i] = x;
                    ecc = ecc.max(x);
                }
                None => return Ok(None),
            }
        }
        best = best.max(ecc);
        lo[xi] = ecc;
        hi[xi] = ecc;
        for &i in &alive {
            lo[i] = lo[i].max(d[i]).max(ecc.saturating_sub(d[i]));
            hi[i] = hi[i].min(ecc.saturating_add(d[i]));
            best = best.max(lo[i]);
        }
        alive.retain(|&i| i != xi && hi[i] > best && lo[i] < hi[i]);
    }
    Ok(Some(best))
}

const HEADER_PREFIX: &str = "critnet-graph v1 ";

/// Serializes a graph in the edge-list v1 text format.
pub fn to_edge_list(g: &Graph) -> String {
    let mut s = String::with_capacity(16 + g.n_edges() as usize * 14);
    let _ = writeln!(s, "{HEADER_PREFIX}N={} E={}", g.n(), g.n_edges());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_edge_list(g).as_bytes())?;
    f.flush()?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the edge-list v1 text format.
pub fn from_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("");
    let rest = header
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| parse_err(1, "missing critnet-graph v1 header"))?;
    let mut parts = rest.split(' ');
    let field = |p: Option<&str>, key: &str| -> Result<u64> {
        p.and_then(|s| s.strip_prefix(key))
            .and_then(|s| {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                    None
                } else {
                    s.parse().ok()
                }
            })
            .ok_or_else(|| parse_err(1, format!("malformed header field {key}")))
    };
    let n = field(parts.next(), "N=")?;
    let e = field(parts.next(), "E=")?;
    if parts.next().is_some() {
        return Err(parse_err(1, "trailing header fields"));
    }
    let n: u32 = u32::try_from(n).map_err(|_| parse_err(1, "N too large"))?;
    let mut edges = Vec::with_capacity(e as usize);
    let mut seen_end = false;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.is_empty() {
            seen_end = true;
            continue;
        }
        if seen_end {
            return Err(parse_err(lineno - 1, "empty line"));
        }
        let mut it = line.split(' ');
        let parse = |s: Option<&str>| -> Option<u32> {
            s.filter(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|t| t.parse().ok())
        };
        let (u, v) = match (parse(it.next()), parse(it.next()), it.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => return Err(parse_err(lineno, format!("malformed edge line {line:?}"))),
        };
        if u == v {
            return Err(parse_err(lineno, format!("self-loop at {u}")));
        }
        if u == 0 || v == 0 || u > n || v > n {
            return Err(parse_err(lineno, format!("label out of range in {line:?}")));
        }
        edges.push((u.min(v), u.max(v), lineno));
    }
    if edges.len() as u64 != e {
        return Err(parse_err(
            1,
            format!("header declares E={e} but found {} edges", edges.len()),
        ));
    }
    let mut sorted: Vec<(u32, u32, usize)> = edges.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted
        .windows(2)
        .find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1)
    {
        return Err(parse_err(
            w[0].2.max(w[1].2),
            format!("duplicate edge {} {}", w[0].0, w[0].1),
        ));
    }
    let pairs: Vec<(u32, u32)> = sorted.iter().map(|&(u, v, _)| (u, v)).collect();
    Graph::from_edges(n, &pairs)
}

pub fn load_edge_list(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    from_edge_list(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(n: u32) -> Graph {
        let e: Vec<(u32, u32)> = (1..n).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    fn star(leaves: u32) -> Graph {
        let e: Vec<(u32, u32)> = (2..=leaves + 1).map(|i| (1, i)).collect();
        Graph::from_edges(leaves + 1, &e).unwrap()
    }

    #[test]
    fn components_examples() {
        let c = components(&Graph::empty(5));
        assert_eq!(c.sizes, vec![1; 5]);
        assert_eq!(c.largest, 0);
        assert_eq!(c.largest_size(), 1);
        let c = components(&path(4));
        assert_eq!(c.sizes, vec![4]);
        let g = Graph::from_edges(6, &[(2, 3), (5, 6), (4, 5)]).unwrap();
        let c = components(&g);
        assert_eq!(c.sizes, vec![1, 2, 3]);
        assert_eq!(c.largest, 2);
        assert_eq!(c.members(2), vec![4, 5, 6]);
        let tie = Graph::from_edges(4, &[(3, 4), (1, 2)]).unwrap();
        assert_eq!(components(&tie).largest, 0);
    }

    #[test]
    fn bfs_examples() {
        let g = path(3);
        assert_eq!(bfs_distance(&g, 2, 2).unwrap(), Some(0));
        assert_eq!(bfs_distance(&g, 1, 3).unwrap(), Some(2));
        let s = star(5);
        assert_eq!(bfs_distance(&s, 3, 6).unwrap(), Some(2));
        assert_eq!(bfs_distance(&Graph::empty(2), 1, 2).unwrap(), None);
        assert!(bfs_distance(&g, 0, 1).is_err());
        assert!(bfs_distance(&g, 1, 4).is_err());
    }

    #[test]
    fn subset_diameter_examples() {
        let g = path(5);
        assert_eq!(subset_diameter(&g, &[3]).unwrap(), Some(0));
        assert_eq!(subset_diameter(&g, &[3, 4]).unwrap(), Some(1));
        assert_eq!(subset_diameter(&g, &[1, 3, 5]).unwrap(), Some(4));
        let h = Graph::from_edges(4, &[(1, 2)]).unwrap();
        assert_eq!(subset_diameter(&h, &[1, 3]).unwrap(), None);
    }

    fn random_graph(n: u32, p: f64, seed: u64) -> Graph {
        use rand::Rng;
        let mut r = crate::rng::substream(seed, 99, 0);
        let mut e = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                if r.random::<f64>() < p {
                    e.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    #[allow(clippy::needless_range_loop)]
    fn floyd(g: &Graph) -> Vec<Vec<Option<u32>>> {
        let n = g.n() as usize;
        let mut d = vec![vec![None; n + 1]; n + 1];
        for u in 1..=n {
            d[u][u] = Some(0);
            for &w in g.neighbors(u as u32) {
                d[u][w as usize] = Some(1);
            }
        }
        for k in 1..=n {
            for i in 1..=n {
                for j in 1..=n {
                    if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                        if d[i][j].is_none_or(|c| a + b < c) {
                            d[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        d
    }

    #[test]
    fn bfs_matches_floyd_warshall_small() {
        let mut scratch = BfsScratch::new(8);
        for seed in 0..400u64 {
            let n = 1 + (seed % 8) as u32;
            let g = random_graph(n, 0.1 + 0.1 * (seed % 5) as f64, seed);
            let d = floyd(&g);
            for u in 1..=n {
                for v in 1..=n {
                    assert_eq!(
                        scratch.distance(&g, u, v),
                        d[u as usize][v as usize],
                        "seed {seed} {u} {v}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bidirectional_matches_single_source(n in 2u32..120, p in 0.005f64..0.08, seed in 0u64..1000) {
            let g = random_graph(n, p, seed);
            let mut a = BfsScratch::new(n);
            let mut b = BfsScratch::new(n);
            for u in (1..=n).step_by(7) {
                a.bfs_from(&g, u);
                for v in 1..=n {
                    prop_assert_eq!(b.distance(&g, u, v), a.dist(v));
                }
            }
        }

        #[test]
        fn subset_diameter_matches_brute_force(n in 2u32..80, p in 0.02f64..0.2, seed in 0u64..1000, k in 1usize..12) {
            let g = random_graph(n, p, seed);
            let s: Vec<u32> = (0..k).map(|i| 1 + ((seed as u32).wrapping_mul(31).wrapping_add(i as u32 * 17) % n)).collect();
            let mut scratch = BfsScratch::new(n);
            let mut want = Some(0u32);
            for &u in &s {
                for &v in &s {
                    want = match (want, scratch.distance(&g, u, v)) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                }
            }
            prop_assert_eq!(subset_diameter(&g, &s).unwrap(), want);
        }

        #[test]
        fn edge_list_roundtrip(n in 1u32..60, p in 0.0f64..0.3, seed in 0u64..1000) {
            let g = random_graph(n, p, seed);
            let text = to_edge_list(&g);
            let back = from_edge_list(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(to_edge_list(&back), text);
        }
    }

    #[test]
    fn shortest_path_is_a_path() {
        let g = random_graph(60, 0.05, 3);
        let mut s = BfsScratch::new(60);
        for v in 2..=60 {
            match (shortest_path(&g, 1, v), s.distance(&g, 1, v)) {
                (Some(p), Some(d)) => {
                    assert_eq!(p.len() as u32, d + 1);
                    assert!(p.windows(2).all(|w| g.has_edge(w[0], w[1])));
                    assert_eq!((p[0], *p.last().unwrap()), (1, v));
                }
                (None, None) => {}
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn edge_list_examples() {
        assert_eq!(to_edge_list(&Graph::empty(3)), "critnet-graph v1 N=3 E=0\n");
        let tri = Graph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(
            to_edge_list(&tri),
            "critnet-graph v1 N=3 E=3\n1 2\n1 3\n2 3\n"
        );
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let cases = [
            ("critnet-graph v1 N=3 E=1\n1 1\n", 2, "self-loop"),
            ("critnet-graph v1 N=3 E=2\n1 2\n2 1\n", 3, "duplicate"),
            ("critnet-graph v1 N=3 E=1\n1 x\n", 2, "malformed"),
            ("critnet-graph v1 N=3 E=2\n1 2\n\n2 3\n", 3, "empty"),
            ("graph N=3 E=0\n", 1, "header"),
            ("critnet-graph v1 N=3 E=1\n1 2\r\n", 2, "malformed"),
        ];
        for (text, line, what) in cases {
            match from_edge_list(text) {
                Err(Error::Parse { line: l, msg }) => {
                    assert_eq!(l, line, "{text:?}: {msg}");
                    assert!(msg.contains(what), "{msg}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn prefix_is_induced() {
        let g = random_graph(50, 0.1, 9);
        let p = g.prefix(30);
        p.check_invariants().unwrap();
        let want: Vec<(u32, u32)> = g.edges().filter(|&(_, v)| v <= 30).collect();
        assert_eq!(p.edges().collect::<Vec<_>>(), want);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(1, 4)]).is_err());
        assert!(Graph::from_edges(3, &[(1, 2), (2, 1)]).is_err());
    }
}
