use rayon::prelude::*;

use super::{blob_raw, KernelParams, Targets, INV_2PI};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sum::{Accumulator, ExactSum, PlainSum, VecAcc};

const LEAF_CAPACITY: usize = 8;
const MAX_DEPTH: usize = 48;
const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Node {
    pub center: Vec2,
    pub half_width: f64,
    pub circulation: f64,
    pub abs_circulation: f64,
    /// Circulation-weighted mean position; the box center when the total
    /// circulation vanishes.
    pub centroid: Vec2,
    /// Largest distance from the centroid to a particle of the node.
    pub radius: f64,
    pub sign_definite: bool,
    /// Complex second moment Σ Γ_k (x_k − centroid)², as (re, im).
    pub quadrupole: (f64, f64),
    /// Index of the first of four consecutive children, or `NO_CHILD`.
    first_child: u32,
    /// Range into [`QuadTree::order`].
    start: u32,
    end: u32,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.first_child == NO_CHILD
    }

    pub fn children(&self) -> Option<std::ops::Range<usize>> {
        (!self.is_leaf()).then(|| {
            let c = self.first_child as usize;
            c..c + 4
        })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Distance from `x` to the closest point of the node's box.
#[inline]
fn box_distance(x: Vec2, node: &Node) -> f64 {
    let dx = ((x.x - node.center.x).abs() - node.half_width).max(0.0);
    let dy = ((x.y - node.center.y).abs() - node.half_width).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

/// Second-order far-field term of a node about its centroid. In complex
/// form the velocity is u_x − i u_y = (−i/2π) [Γ/z + Q/z³ + …]; the dipole
/// term vanishes because the expansion point is the centroid.
#[inline]
fn quadrupole_velocity(z: Vec2, (qr, qi): (f64, f64)) -> Vec2 {
    // 1/z³ = conj(z)³ / |z|⁶
    let r2 = z.norm_sq();
    let inv6 = 1.0 / (r2 * r2 * r2);
    let (a, b) = (z.x, -z.y);
    let c3r = a * a * a - 3.0 * a * b * b;
    let c3i = 3.0 * a * a * b - b * b * b;
    let wr = (qr * c3r - qi * c3i) * inv6;
    let wi = (qr * c3i + qi * c3r) * inv6;
    // multiply by −i/2π: (wr + i wi)(−i) = wi − i wr
    let (ur, ui) = (wi * INV_2PI, -wr * INV_2PI);
    Vec2::new(ur, -ui)
}

/// Immutable quadtree over point circulations.
#[derive(Debug, Clone)]
pub struct QuadTree {
    positions: Vec<Vec2>,
    gammas: Vec<f64>,
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl QuadTree {
    pub fn build(positions: &[Vec2], gammas: &[f64]) -> Self {
        assert_eq!(positions.len(), gammas.len());
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in positions {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let (center, half) = if positions.is_empty() {
            (Vec2::ZERO, 1.0)
        } else {
            let half = 0.5 * (hi.x - lo.x).max(hi.y - lo.y);
            (0.5 * (lo + hi), if half > 0.0 { half * (1.0 + 1e-12) } else { 1.0 })
        };
        let mut tree = QuadTree {
            positions: positions.to_vec(),
            gammas: gammas.to_vec(),
            nodes: Vec::with_capacity(positions.len() / 2 + 1),
            order: (0..positions.len() as u32).collect(),
        };
        tree.nodes.push(tree.empty_node(center, half, 0, positions.len()));
        tree.subdivide(0, 0);
        tree
    }

    fn empty_node(&self, center: Vec2, half_width: f64, start: usize, end: usize) -> Node {
        Node {
            center,
            half_width,
            circulation: 0.0,
            abs_circulation: 0.0,
            centroid: center,
            radius: 0.0,
            sign_definite: true,
            quadrupole: (0.0, 0.0),
            first_child: NO_CHILD,
            start: start as u32,
            end: end as u32,
        }
    }

    fn subdivide(&mut self, idx: usize, depth: usize) {
        let (start, end, center, half) = {
            let n = &self.nodes[idx];
            (n.start as usize, n.end as usize, n.center, n.half_width)
        };
        if end - start > LEAF_CAPACITY && depth < MAX_DEPTH {
            // counting sort of the node's particles into quadrants
            let quadrant = |p: Vec2| (usize::from(p.x >= center.x)) | (usize::from(p.y >= center.y) << 1);
            let mut buckets: [Vec<u32>; 4] = Default::default();
            for &k in &self.order[start..end] {
                buckets[quadrant(self.positions[k as usize])].push(k);
            }
            let first = self.nodes.len();
            let mut s = start;
            let q = 0.5 * half;
            for (b, bucket) in buckets.iter().enumerate() {
                let c = Vec2::new(
                    center.x + if b & 1 == 1 { q } else { -q },
                    center.y + if b & 2 == 2 { q } else { -q },
                );
                self.order[s..s + bucket.len()].copy_from_slice(bucket);
                let node = self.empty_node(c, q, s, s + bucket.len());
                self.nodes.push(node);
                s += bucket.len();
            }
            self.nodes[idx].first_child = first as u32;
            for c in first..first + 4 {
                self.subdivide(c, depth + 1);
            }
        }
        self.summarize(idx);
    }

    fn summarize(&mut self, idx: usize) {
        let (start, end) = (self.nodes[idx].start as usize, self.nodes[idx].end as usize);
        if start == end {
            return;
        }
        let mut g = 0.0;
        let mut ga = 0.0;
        let mut m = Vec2::ZERO;
        let (mut pos, mut neg) = (false, false);
        for &k in &self.order[start..end] {
            let k = k as usize;
            let gk = self.gammas[k];
            g += gk;
            ga += gk.abs();
            m += gk * self.positions[k];
            pos |= gk > 0.0;
            neg |= gk < 0.0;
        }
        let centroid = if g != 0.0 { (1.0 / g) * m } else { self.nodes[idx].center };
        let mut radius = 0.0f64;
        let (mut qr, mut qi) = (0.0, 0.0);
        for &k in &self.order[start..end] {
            let d = self.positions[k as usize] - centroid;
            let gk = self.gammas[k as usize];
            radius = radius.max(d.norm());
            qr += gk * (d.x * d.x - d.y * d.y);
            qi += gk * 2.0 * d.x * d.y;
        }
        let node = &mut self.nodes[idx];
        node.circulation = g;
        node.abs_circulation = ga;
        node.centroid = centroid;
        node.radius = radius;
        node.sign_definite = !(pos && neg);
        node.quadrupole = (qr, qi);
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Particle indices held by a node.
    pub fn indices(&self, node: &Node) -> impl Iterator<Item = usize> + '_ {
        self.order[node.start as usize..node.end as usize]
            .iter()
            .map(|&k| k as usize)
    }

    fn velocity_at<A: Accumulator>(
        &self,
        x: Vec2,
        target: usize,
        skip: Option<usize>,
        params: &KernelParams,
        stack: &mut Vec<u32>,
    ) -> Result<Vec2> {
        let blob_sq = params.blob_radius * params.blob_radius;
        let mut acc = VecAcc::<A>::default();
        stack.clear();
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.is_empty() {
                continue;
            }
            let z = x - node.centroid;
            if node.sign_definite && 2.0 * node.half_width < params.theta * box_distance(x, node) {
                acc.add(node.circulation * blob_raw(z, blob_sq));
                acc.add(quadrupole_velocity(z, node.quadrupole));
            } else if node.is_leaf() {
                for &k in &self.order[node.start as usize..node.end as usize] {
                    let k = k as usize;
                    if skip == Some(k) {
                        continue;
                    }
                    let z = x - self.positions[k];
                    if blob_sq == 0.0 && z == Vec2::ZERO {
                        return Err(Error::Coincident {
                            target,
                            source_index: k,
                        });
                    }
                    acc.add(self.gammas[k] * blob_raw(z, blob_sq));
                }
            } else {
                let c = node.first_child;
                stack.extend([c + 3, c + 2, c + 1, c]);
            }
        }
        Ok(acc.value())
    }

    /// Velocities at `targets` from the tree's particles.
    pub fn velocity(&self, targets: Targets<'_>, params: &KernelParams) -> Result<Vec<Vec2>> {
        let eval = |stack: &mut Vec<u32>, t: usize, x: Vec2, skip: Option<usize>| {
            if params.deterministic {
                self.velocity_at::<ExactSum>(x, t, skip, params, stack)
            } else {
                self.velocity_at::<PlainSum>(x, t, skip, params, stack)
            }
        };
        match targets {
            Targets::Points(pts) => pts
                .par_iter()
                .enumerate()
                .map_init(Vec::new, |st, (t, &x)| eval(st, t, x, None))
                .collect(),
            Targets::Sources => self
                .positions
                .par_iter()
                .enumerate()
                .map_init(Vec::new, |st, (t, &x)| eval(st, t, x, Some(t)))
                .collect(),
        }
    }
}

/// Barnes–Hut approximation of [`super::direct_velocity`]: a sign-definite
/// node whose box width is below `theta` times the distance from the target
/// to the box is replaced by its total circulation at the centroid plus
/// the quadrupole correction.
pub fn tree_velocity(
    sources: &[Vec2],
    gammas: &[f64],
    targets: Targets<'_>,
    params: &KernelParams,
) -> Result<Vec<Vec2>> {
    QuadTree::build(sources, gammas).velocity(targets, params)
}
