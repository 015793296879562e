//! Primal network simplex for the uncapacitated transportation problem with
//! Euclidean costs.
//!
//! The initial basis hangs every node from an artificial root. Artificial
//! arcs carry a symbolic big-M cost, so potentials are kept as pairs
//! `(k, r)` meaning `k·M + r` and compared lexicographically; this avoids
//! the cancellation a numeric big-M would introduce. The tree is kept
//! strongly feasible (every downward arc carries positive flow), which
//! rules out cycling.

use crate::geom::Vec2;
use crate::sum::exact_sum;

const NONE: u32 = u32::MAX;

pub(crate) struct Solution {
    pub cost: f64,
    /// (source, sink, mass) for every real arc carrying flow.
    pub routes: Vec<(usize, usize, f64)>,
    pub artificial_flow: f64,
}

struct Solver<'a> {
    xs: &'a [Vec2],
    ys: &'a [Vec2],
    m: usize,
    n: usize,
    root: usize,
    parent: Vec<u32>,
    /// Real arc id `i*n + j` or `NONE` for the artificial root arc.
    arc: Vec<u64>,
    up: Vec<bool>,
    flow: Vec<f64>,
    depth: Vec<u32>,
    pk: Vec<i64>,
    pr: Vec<f64>,
    first_child: Vec<u32>,
    next_sib: Vec<u32>,
    prev_sib: Vec<u32>,
}

const ARTIFICIAL: u64 = u64::MAX;

impl<'a> Solver<'a> {
    fn cost(&self, arc: u64) -> (i64, f64) {
        if arc == ARTIFICIAL {
            (1, 0.0)
        } else {
            let i = (arc / self.n as u64) as usize;
            let j = (arc % self.n as u64) as usize;
            (0, self.xs[i].dist(self.ys[j]))
        }
    }

    fn detach(&mut self, u: usize) {
        let p = self.parent[u] as usize;
        let (prev, next) = (self.prev_sib[u], self.next_sib[u]);
        if prev == NONE {
            self.first_child[p] = next;
        } else {
            self.next_sib[prev as usize] = next;
        }
        if next != NONE {
            self.prev_sib[next as usize] = prev;
        }
        self.prev_sib[u] = NONE;
        self.next_sib[u] = NONE;
    }

    fn attach(&mut self, u: usize, p: usize) {
        self.parent[u] = p as u32;
        let head = self.first_child[p];
        self.next_sib[u] = head;
        self.prev_sib[u] = NONE;
        if head != NONE {
            self.prev_sib[head as usize] = u as u32;
        }
        self.first_child[p] = u as u32;
    }

    /// Recomputes depth and potentials below (and including) `top`.
    fn refresh(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(u) = stack.pop() {
            let p = self.parent[u] as usize;
            let (ck, cr) = self.cost(self.arc[u]);
            // tree arcs have zero reduced cost c + π_tail − π_head
            if self.up[u] {
                self.pk[u] = self.pk[p] - ck;
                self.pr[u] = self.pr[p] - cr;
            } else {
                self.pk[u] = self.pk[p] + ck;
                self.pr[u] = self.pr[p] + cr;
            }
            self.depth[u] = self.depth[p] + 1;
            let mut c = self.first_child[u];
            while c != NONE {
                stack.push(c as usize);
                c = self.next_sib[c as usize];
            }
        }
    }

    fn reduced(&self, arc: u64) -> (i64, f64) {
        let i = (arc / self.n as u64) as usize;
        let j = self.m + (arc % self.n as u64) as usize;
        let (_, c) = self.cost(arc);
        (self.pk[i] - self.pk[j], c + self.pr[i] - self.pr[j])
    }
}

fn less(a: (i64, f64), b: (i64, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Solves min Σ f_ij |x_i − y_j| subject to row sums `a` and column sums `b`.
/// All masses must be positive.
pub(crate) fn solve(xs: &[Vec2], a: &[f64], ys: &[Vec2], b: &[f64]) -> Solution {
    let m = xs.len();
    let n = ys.len();
    let nodes = m + n + 1;
    let root = m + n;
    let mut s = Solver {
        xs,
        ys,
        m,
        n,
        root,
        parent: vec![NONE; nodes],
        arc: vec![ARTIFICIAL; nodes],
        up: vec![false; nodes],
        flow: vec![0.0; nodes],
        depth: vec![0; nodes],
        pk: vec![0; nodes],
        pr: vec![0.0; nodes],
        first_child: vec![NONE; nodes],
        next_sib: vec![NONE; nodes],
        prev_sib: vec![NONE; nodes],
    };
    for u in (0..m + n).rev() {
        s.attach(u, root);
        if u < m {
            s.up[u] = true;
            s.flow[u] = a[u];
        } else {
            s.flow[u] = b[u - m];
        }
    }
    s.refresh_all();

    let max_cost = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| x.dist(*y)))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 4.0 * f64::EPSILON * nodes as f64 * max_cost;
    let total_arcs = (m * n) as u64;
    let block = ((total_arcs as f64).sqrt().ceil() as u64).max(16).min(total_arcs.max(1));
    let mut next_arc: u64 = 0;

    loop {
        // block search pricing
        let mut best: Option<(u64, (i64, f64))> = None;
        let mut scanned: u64 = 0;
        let mut in_block: u64 = 0;
        while scanned < total_arcs {
            let e = next_arc;
            next_arc += 1;
            if next_arc == total_arcs {
                next_arc = 0;
            }
            scanned += 1;
            in_block += 1;
            let rc = s.reduced(e);
            if (rc.0 < 0 || (rc.0 == 0 && rc.1 < -tol)) && best.map_or(true, |(_, b)| less(rc, b)) {
                best = Some((e, rc));
            }
            if in_block == block {
                if best.is_some() {
                    break;
                }
                in_block = 0;
            }
        }
        let Some((entering, _)) = best else { break };
        s.pivot(entering);
    }

    let mut routes = Vec::new();
    let mut terms = Vec::new();
    let mut artificial = Vec::new();
    for u in 0..m + n {
        if s.arc[u] == ARTIFICIAL {
            artificial.push(s.flow[u]);
        } else if s.flow[u] > 0.0 {
            let e = s.arc[u];
            let i = (e / n as u64) as usize;
            let j = (e % n as u64) as usize;
            terms.push(s.flow[u] * xs[i].dist(ys[j]));
            routes.push((i, j, s.flow[u]));
        }
    }
    routes.sort_by(|p, q| (p.0, p.1).cmp(&(q.0, q.1)));
    Solution {
        cost: exact_sum(terms),
        routes,
        artificial_flow: exact_sum(artificial),
    }
}

impl Solver<'_> {
    fn refresh_all(&mut self) {
        let mut c = self.first_child[self.root];
        let mut tops = Vec::new();
        while c != NONE {
            tops.push(c as usize);
            c = self.next_sib[c as usize];
        }
        for t in tops {
            self.refresh(t);
        }
    }

    fn pivot(&mut self, entering: u64) {
        let i = (entering / self.n as u64) as usize;
        let j = self.m + (entering % self.n as u64) as usize;
        // join node
        let (mut u, mut v) = (i, j);
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u] as usize;
            } else {
                v = self.parent[v] as usize;
            }
        }
        let join = u;

        // Flow runs join → … → i → j → … → join. Blocking arcs on the i side
        // point up (flow decreases going down); on the j side they point down.
        // The last blocking arc in cycle order keeps the tree strongly feasible.
        let mut delta = f64::INFINITY;
        let mut out = NONE as usize;
        let mut out_on_j = false;
        let mut w = i;
        while w != join {
            if self.up[w] && self.flow[w] < delta {
                delta = self.flow[w];
                out = w;
            }
            w = self.parent[w] as usize;
        }
        let mut w = j;
        while w != join {
            if !self.up[w] && self.flow[w] <= delta {
                delta = self.flow[w];
                out = w;
                out_on_j = true;
            }
            w = self.parent[w] as usize;
        }
        assert!(out != NONE as usize, "unbounded transportation cycle");

        if delta > 0.0 {
            let mut w = i;
            while w != join {
                if self.up[w] {
                    self.flow[w] -= delta;
                } else {
                    self.flow[w] += delta;
                }
                w = self.parent[w] as usize;
            }
            let mut w = j;
            while w != join {
                if self.up[w] {
                    self.flow[w] += delta;
                } else {
                    self.flow[w] -= delta;
                }
                w = self.parent[w] as usize;
            }
        }
        self.flow[out] = 0.0;

        // re-hang the subtree cut off at `out` below the entering arc
        let (start, new_parent, start_up) = if out_on_j { (j, i, false) } else { (i, j, true) };
        let mut path = vec![start];
        while *path.last().unwrap() != out {
            let last = *path.last().unwrap();
            path.push(self.parent[last] as usize);
        }
        let saved: Vec<(u64, bool, f64)> = path.iter().map(|&p| (self.arc[p], self.up[p], self.flow[p])).collect();
        for &p in path.iter().rev() {
            self.detach(p);
        }
        for k in 1..path.len() {
            let (arc, up, flow) = saved[k - 1];
            self.arc[path[k]] = arc;
            self.up[path[k]] = !up;
            self.flow[path[k]] = flow;
            self.attach(path[k], path[k - 1]);
        }
        self.arc[start] = entering;
        self.up[start] = start_up;
        self.flow[start] = delta;
        self.attach(start, new_parent);
        self.refresh(start);
    }
}
