//! Polyblock outer approximation for maximizing an increasing function over
//! a normal subset of a box.
//!
//! The feasible set is approximated from outside by a union of boxes
//! `[a, v]`, one per vertex `v`, where `a` sits slightly below the origin.
//! Each iteration takes the vertex with the largest objective (a valid upper
//! bound), projects it onto the boundary of the feasible set along the
//! segment from `a`, and replaces it by the vertices of `[a, v]` minus the
//! cone above the projection. Points with negative coordinates stand for
//! their positive part, so the extended set stays normal. Starting the rays
//! below the origin keeps every cut a fixed fraction of the vertex extent;
//! rays from the origin itself stall on vertices close to a coordinate face.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rstar::primitives::GeomWithData;
use rstar::{RTree, AABB};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyblockConfig {
    /// Stop once `upper_bound - value <= tol * max(1, |value|)`.
    pub tol: f64,
    pub max_iters: usize,
    pub max_vertices: usize,
    /// Relative width of the final projection bracket.
    pub projection_tol: f64,
    /// Rays start at `-origin_shift * upper_corner`.
    pub origin_shift: f64,
    pub time_budget: Option<Duration>,
}

impl Default for PolyblockConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iters: 1_000_000,
            max_vertices: 1_000_000,
            projection_tol: 1e-9,
            origin_shift: 1.0,
            time_budget: None,
        }
    }
}

impl PolyblockConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("polyblock tol must be positive, got {}", self.tol)));
        }
        if !(self.projection_tol > 0.0 && self.projection_tol < self.tol) {
            return Err(Error::InvalidParameter(
                "projection tolerance must be positive and below the polyblock tolerance".into(),
            ));
        }
        if !(self.origin_shift > 0.0 && self.origin_shift.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "origin shift must be positive, got {}",
                self.origin_shift
            )));
        }
        if self.max_iters == 0 || self.max_vertices == 0 {
            return Err(Error::InvalidParameter("polyblock budgets must be nonzero".into()));
        }
        Ok(())
    }
}

/// A normal set: `z` in the set and `0 <= y <= z` imply `y` in the set.
pub trait NormalSet {
    fn contains(&self, z: &[f64]) -> bool;

    /// Optional continuous level function, nondecreasing in every
    /// coordinate, with `level(z) <= 0` exactly when `contains(z)`. When
    /// present, projections use a bracketed secant search instead of
    /// bisection.
    fn level(&self, _z: &[f64]) -> Option<f64> {
        None
    }
}

/// Adapts a membership closure to [`NormalSet`].
pub struct Predicate<G>(pub G);

impl<G: Fn(&[f64]) -> bool> NormalSet for Predicate<G> {
    fn contains(&self, z: &[f64]) -> bool {
        (self.0)(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyblockStatus {
    Converged,
    IterationLimit,
    VertexLimit,
    TimeLimit,
}

impl PolyblockStatus {
    pub fn is_converged(self) -> bool {
        self == PolyblockStatus::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyblockResult {
    /// Best feasible point found.
    pub point: Vec<f64>,
    pub value: f64,
    /// Valid upper bound on the maximum.
    pub upper_bound: f64,
    pub iters: usize,
    pub peak_vertices: usize,
    pub status: PolyblockStatus,
    /// Upper bound after every iteration; nonincreasing.
    pub bound_trace: Vec<f64>,
    /// Incumbent value after every iteration; nondecreasing.
    pub incumbent_trace: Vec<f64>,
}

impl PolyblockResult {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.value
    }
}

/// Bracket `[lo, hi]` of the largest `mu` in `[0, 1]` whose point on the
/// segment is feasible. The point at `lo` is feasible and, unless
/// `hi == 1` and the segment end is feasible, the point at `hi` is not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayProjection {
    pub lo: f64,
    pub hi: f64,
}

/// Positive part of `base + mu (v - base)`.
pub fn segment_point(base: &[f64], v: &[f64], mu: f64, out: &mut [f64]) {
    for ((o, a), x) in out.iter_mut().zip(base).zip(v) {
        *o = (a + mu * (x - a)).max(0.0);
    }
}

/// Bisects along the ray from the origin through `v` until the bracket is
/// narrower than `rel_tol * hi`. Requires the origin to be feasible.
pub fn project_to_boundary<G>(feasible: G, v: &[f64], rel_tol: f64) -> RayProjection
where
    G: Fn(&[f64]) -> bool,
{
    project_segment(&Predicate(feasible), &vec![0.0; v.len()], v, rel_tol)
}

/// Locates the boundary on the segment from `base <= 0` to `v`, where each
/// point stands for its positive part. Requires the origin to be feasible.
pub fn project_segment<S: NormalSet + ?Sized>(set: &S, base: &[f64], v: &[f64], rel_tol: f64) -> RayProjection {
    let mut z = vec![0.0; v.len()];
    segment_point(base, v, 1.0, &mut z);
    if set.contains(&z) {
        return RayProjection { lo: 1.0, hi: 1.0 };
    }
    let mut lo = 0.0;
    let mut hi = 1.0;

    if let Some(mut f_hi) = set.level(&z) {
        segment_point(base, v, 0.0, &mut z);
        if let Some(mut f_lo) = set.level(&z).filter(|f| *f <= 0.0) {
            // Illinois variant of regula falsi; each endpoint keeps its sign.
            let mut last_side = 0i8;
            let mut steps = 0;
            while hi - lo > rel_tol * hi && steps < 100 {
                steps += 1;
                let mut c = hi - f_hi * (hi - lo) / (f_hi - f_lo);
                if !(c > lo && c < hi) {
                    c = 0.5 * (lo + hi);
                }
                segment_point(base, v, c, &mut z);
                let f_c = set.level(&z).unwrap_or(f64::NAN);
                if f_c <= 0.0 {
                    lo = c;
                    f_lo = f_c;
                    if last_side == -1 {
                        f_hi *= 0.5;
                    }
                    last_side = -1;
                } else if f_c > 0.0 {
                    hi = c;
                    f_hi = f_c;
                    if last_side == 1 {
                        f_lo *= 0.5;
                    }
                    last_side = 1;
                } else {
                    break;
                }
            }
        }
    }

    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        segment_point(base, v, mid, &mut z);
        if set.contains(&z) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    RayProjection { lo, hi }
}

struct Vertex {
    value: f64,
    coords: Box<[f64]>,
}

/// `w` dominates `u` in every coordinate except `skip`.
fn covers_except(w: &[f64], u: &[f64], skip: usize) -> bool {
    w.iter().zip(u).enumerate().all(|(l, (a, b))| l == skip || a >= b)
}

/// Spatial index over live vertex slots.
trait VertexStore {
    fn insert(&mut self, slot: usize, coords: &[f64]);
    fn remove(&mut self, slot: usize, coords: &[f64]);
    /// Removes every vertex with `coords[j] >= x[j]` for all `j` in `cut`
    /// and appends its slot to `out`.
    fn drain_above(&mut self, x: &[f64], cut: &[usize], out: &mut Vec<usize>);
    fn len(&self) -> usize;
}

#[derive(Default)]
struct ScanStore {
    items: Vec<(usize, Box<[f64]>)>,
}

impl VertexStore for ScanStore {
    fn insert(&mut self, slot: usize, coords: &[f64]) {
        self.items.push((slot, coords.into()));
    }

    fn remove(&mut self, slot: usize, _coords: &[f64]) {
        if let Some(i) = self.items.iter().position(|(s, _)| *s == slot) {
            self.items.swap_remove(i);
        }
    }

    fn drain_above(&mut self, x: &[f64], cut: &[usize], out: &mut Vec<usize>) {
        let mut i = 0;
        while i < self.items.len() {
            if cut.iter().all(|&j| self.items[i].1[j] >= x[j]) {
                out.push(self.items.swap_remove(i).0);
            } else {
                i += 1;
            }
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

struct TreeStore<const D: usize> {
    tree: RTree<GeomWithData<[f64; D], usize>>,
}

impl<const D: usize> TreeStore<D> {
    fn new() -> Self {
        Self { tree: RTree::new() }
    }

    fn point(coords: &[f64]) -> [f64; D] {
        let mut p = [0.0; D];
        p.copy_from_slice(coords);
        p
    }
}

impl<const D: usize> VertexStore for TreeStore<D> {
    fn insert(&mut self, slot: usize, coords: &[f64]) {
        self.tree.insert(GeomWithData::new(Self::point(coords), slot));
    }

    fn remove(&mut self, slot: usize, coords: &[f64]) {
        self.tree.remove(&GeomWithData::new(Self::point(coords), slot));
    }

    fn drain_above(&mut self, x: &[f64], cut: &[usize], out: &mut Vec<usize>) {
        let mut lower = [f64::MIN; D];
        for &j in cut {
            lower[j] = x[j];
        }
        let env = AABB::from_corners(lower, [f64::MAX; D]);
        out.extend(self.tree.drain_in_envelope(env).map(|g| g.data));
    }

    fn len(&self) -> usize {
        self.tree.size()
    }
}

fn vertex_store(dim: usize) -> Box<dyn VertexStore> {
    match dim {
        1 => Box::new(TreeStore::<1>::new()),
        2 => Box::new(TreeStore::<2>::new()),
        3 => Box::new(TreeStore::<3>::new()),
        4 => Box::new(TreeStore::<4>::new()),
        5 => Box::new(TreeStore::<5>::new()),
        6 => Box::new(TreeStore::<6>::new()),
        7 => Box::new(TreeStore::<7>::new()),
        8 => Box::new(TreeStore::<8>::new()),
        _ => Box::new(ScanStore::default()),
    }
}

/// Live vertices: slab storage, a spatial index and a lazily pruned max-heap.
struct VertexSet {
    slots: Vec<Option<Vertex>>,
    free: Vec<usize>,
    store: Box<dyn VertexStore>,
    heap: BinaryHeap<HeapEntry>,
}

struct HeapEntry {
    value: f64,
    slot: usize,
    stamp: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(other.stamp.cmp(&self.stamp))
    }
}

impl VertexSet {
    fn new(dim: usize) -> Self {
        Self {
            slots: Vec::new(),
            free: Vec::new(),
            store: vertex_store(dim),
            heap: BinaryHeap::new(),
        }
    }

    fn len(&self) -> usize {
        self.store.len()
    }

    fn insert(&mut self, v: Vertex, stamp: u64) {
        let slot = self.free.pop().unwrap_or_else(|| {
            self.slots.push(None);
            self.slots.len() - 1
        });
        self.store.insert(slot, &v.coords);
        self.heap.push(HeapEntry {
            value: v.value,
            slot,
            stamp,
        });
        self.slots[slot] = Some(v);
    }

    fn take(&mut self, slot: usize) -> Vertex {
        self.free.push(slot);
        self.slots[slot].take().expect("live vertex slot")
    }

    /// Slot and value of the best live vertex.
    fn peek(&mut self) -> Option<(usize, f64)> {
        while let Some(top) = self.heap.peek() {
            match &self.slots[top.slot] {
                Some(v) if v.value == top.value => return Some((top.slot, top.value)),
                _ => {
                    self.heap.pop();
                }
            }
        }
        None
    }
}

/// Maximizes an increasing `objective` over the normal set described by
/// `feasible`, contained in the box `[0, upper_corner]`. The origin must be
/// feasible.
pub fn polyblock_maximize<F, G>(objective: F, feasible: G, upper_corner: &[f64], cfg: &PolyblockConfig) -> Result<PolyblockResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    polyblock_maximize_set(objective, &Predicate(feasible), upper_corner, None, cfg)
}

/// As [`polyblock_maximize`], seeding the incumbent with a known feasible
/// point.
pub fn polyblock_maximize_from<F, G>(
    objective: F,
    feasible: G,
    upper_corner: &[f64],
    start: Option<&[f64]>,
    cfg: &PolyblockConfig,
) -> Result<PolyblockResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    polyblock_maximize_set(objective, &Predicate(feasible), upper_corner, start, cfg)
}

/// Polyblock maximization over any [`NormalSet`].
pub fn polyblock_maximize_set<F, S>(
    objective: F,
    set: &S,
    upper_corner: &[f64],
    start: Option<&[f64]>,
    cfg: &PolyblockConfig,
) -> Result<PolyblockResult>
where
    F: Fn(&[f64]) -> f64,
    S: NormalSet + ?Sized,
{
    cfg.validate()?;
    if upper_corner.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::InvalidParameter("upper corner must be finite and nonnegative".into()));
    }
    let dim = upper_corner.len();
    let origin = vec![0.0; dim];
    if !set.contains(&origin) {
        return Err(Error::InvalidParameter("the origin must be feasible".into()));
    }
    let started = Instant::now();
    let base: Vec<f64> = upper_corner.iter().map(|c| -cfg.origin_shift * c).collect();

    let (mut best, mut best_val) = match start {
        Some(s) => {
            if s.len() != dim || s.iter().any(|x| *x < 0.0) || !set.contains(s) {
                return Err(Error::Infeasible("polyblock start point".into()));
            }
            (s.to_vec(), objective(s))
        }
        None => {
            let v = objective(&origin);
            (origin, v)
        }
    };
    let slack = |v: f64| cfg.tol * v.abs().max(1.0);

    let mut verts = VertexSet::new(dim);
    let mut stamp = 0u64;
    let top = objective(upper_corner);
    let mut upper = top.max(best_val);
    if top > best_val + slack(best_val) {
        verts.insert(
            Vertex {
                value: top,
                coords: upper_corner.into(),
            },
            stamp,
        );
    }
    // Largest value among vertices dropped for being within tolerance of
    // the incumbent; it stays part of the upper bound.
    let mut dropped = f64::NEG_INFINITY;

    let mut iters = 0;
    let mut peak = verts.len();
    let mut status = PolyblockStatus::Converged;
    let mut bound_trace = Vec::new();
    let mut incumbent_trace = Vec::new();
    let mut z = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    let mut cut = Vec::with_capacity(dim);
    let mut drained = Vec::new();
    let mut above: Vec<Vertex> = Vec::new();

    loop {
        let Some((imax, vmax)) = verts.peek() else {
            upper = upper.min(dropped.max(best_val));
            break;
        };
        upper = upper.min(vmax.max(dropped).max(best_val));
        if upper - best_val <= slack(best_val) {
            break;
        }
        if iters >= cfg.max_iters {
            status = PolyblockStatus::IterationLimit;
            break;
        }
        if iters % 64 == 0 && cfg.time_budget.is_some_and(|b| started.elapsed() >= b) {
            status = PolyblockStatus::TimeLimit;
            break;
        }
        iters += 1;

        let v = verts.slots[imax].as_ref().expect("peeked vertex is live");
        let proj = project_segment(set, &base, &v.coords, cfg.projection_tol);
        segment_point(&base, &v.coords, proj.lo, &mut z);
        let val = objective(&z);
        if val > best_val {
            best_val = val;
            best.copy_from_slice(&z);
        }
        if proj.hi >= 1.0 {
            // The whole box below this vertex is feasible.
            let v = verts.take(imax);
            verts.store.remove(imax, &v.coords);
        } else {
            for (xi, (a, c)) in x.iter_mut().zip(base.iter().zip(v.coords.iter())) {
                *xi = a + proj.hi * (c - a);
            }
            // Every point above `x` in the coordinates where `x` is positive
            // is infeasible. Cut that cone out of every vertex box reaching
            // into it; other coordinates do not constrain the positive part.
            cut.clear();
            cut.extend((0..dim).filter(|&i| x[i] > 0.0));
            verts.store.drain_above(&x, &cut, &mut drained);
            for slot in drained.drain(..) {
                let coords = verts.slots[slot].as_ref().expect("indexed vertex is live").coords.clone();
                if cut.iter().any(|&j| coords[j] <= x[j]) {
                    // touches the cone only on its boundary
                    verts.store.insert(slot, &coords);
                } else {
                    above.push(verts.take(slot));
                }
            }
            for (ui, u) in above.iter().enumerate() {
                for &j in &cut {
                    // Skip children that another cut vertex covers.
                    let covered = above.iter().enumerate().any(|(wi, w)| {
                        wi != ui
                            && covers_except(&w.coords, &u.coords, j)
                            && (wi < ui || w.coords[..] != u.coords[..])
                    });
                    if covered {
                        continue;
                    }
                    let mut child = u.coords.clone();
                    child[j] = x[j];
                    segment_point(&base, &child, 1.0, &mut z);
                    let cv = objective(&z);
                    if cv > best_val + slack(best_val) {
                        stamp += 1;
                        verts.insert(Vertex { value: cv, coords: child }, stamp);
                    } else if cv > best_val {
                        dropped = dropped.max(cv);
                    }
                }
            }
            above.clear();
        }
        peak = peak.max(verts.len());
        let ub_now = verts
            .peek()
            .map_or(f64::NEG_INFINITY, |(_, v)| v)
            .max(dropped)
            .max(best_val);
        upper = upper.min(ub_now);
        bound_trace.push(upper);
        incumbent_trace.push(best_val);
        if verts.len() > cfg.max_vertices {
            status = PolyblockStatus::VertexLimit;
            break;
        }
    }

    Ok(PolyblockResult {
        point: best,
        value: best_val,
        upper_bound: upper.max(best_val),
        iters,
        peak_vertices: peak,
        status,
        bound_trace,
        incumbent_trace,
    })
}
