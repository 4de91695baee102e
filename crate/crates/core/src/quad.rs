//! Adaptive quadrature on rectangles and discs for weakly singular integrands.
//!
//! Cells live in a global priority queue ordered by error estimate. Declared
//! singular points are cut onto cell corners and singular lines onto cell
//! edges. A cell touching a singularity becomes a *chain*: it is repeatedly
//! halved toward the singular feature, the released pieces are integrated as
//! ordinary cells, and the per-level sums are extrapolated with Wynn's epsilon
//! algorithm. The innermost piece is never evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::structures::{Point, Region};

/// Axis-parallel line carrying an integrable singularity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingularLine {
    /// `x = c`.
    Vertical(f64),
    /// `y = c`.
    Horizontal(f64),
}

/// Tensor Gauss–Kronrod pairs; the error is the difference between the
/// Kronrod rule and the embedded Gauss rule on the same nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseRule {
    /// 5×5 Kronrod (degree 7) around 2×2 Gauss (degree 3).
    Kronrod5,
    /// 7×7 Kronrod (degree 11) around 3×3 Gauss (degree 5).
    Kronrod7,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of splits below a root cell.
    pub max_depth: u32,
    pub singular_points: Vec<Point>,
    pub singular_lines: Vec<SingularLine>,
    /// Lines where the integrand is only continuous; rectangles are split there.
    pub cuts: Vec<SingularLine>,
    /// Chains stop refining once their innermost cell is smaller than this.
    pub exclusion_radius_floor: f64,
    pub base_rule: BaseRule,
    pub max_cells: usize,
    /// Absolute target as a fraction of `∫|f|`, for integrals that cancel.
    pub magnitude_tol: f64,
    /// Extrapolate the remainder of each chain instead of dropping it.
    pub tail_extrapolation: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_depth: 22,
            singular_points: Vec::new(),
            singular_lines: Vec::new(),
            cuts: Vec::new(),
            exclusion_radius_floor: 1e-7,
            base_rule: BaseRule::Kronrod5,
            max_cells: 400_000,
            magnitude_tol: 0.0,
            tail_extrapolation: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol must be positive");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.exclusion_radius_floor > 0.0) {
            return bad("exclusion_radius_floor must be positive");
        }
        if !(self.magnitude_tol >= 0.0 && self.magnitude_tol.is_finite()) {
            return bad("magnitude_tol must be non-negative");
        }
        if self.max_cells < 1 {
            return bad("max_cells must be positive");
        }
        if self.singular_points.iter().any(|p| !p.is_finite()) {
            return bad("singular points must be finite");
        }
        Ok(())
    }

    pub fn with_singular_point(mut self, p: Point) -> Self {
        self.singular_points.push(p);
        self
    }

    pub fn with_singular_line(mut self, l: SingularLine) -> Self {
        self.singular_lines.push(l);
        self
    }

    pub fn with_magnitude_tol(mut self, m: f64) -> Self {
        self.magnitude_tol = m;
        self
    }

    pub fn with_cut(mut self, l: SingularLine) -> Self {
        self.cuts.push(l);
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.exclusion_radius_floor = floor;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub cells_used: usize,
    pub converged: bool,
    pub evaluations: usize,
}

impl IntegralResult {
    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { value: self.value, error_estimate: self.error_estimate })
        }
    }
}

// ---------------------------------------------------------------------------
// Rules

const K5_X: [f64; 5] = [-0.925_820_099_772_551_4, -0.577_350_269_189_625_8, 0.0, 0.577_350_269_189_625_8, 0.925_820_099_772_551_4];
const K5_W: [f64; 5] = [98.0 / 495.0, 27.0 / 55.0, 28.0 / 45.0, 27.0 / 55.0, 98.0 / 495.0];
const G2_IDX: [usize; 2] = [1, 3];
const G2_W: [f64; 2] = [1.0, 1.0];

const K7_X: [f64; 7] = [
    -0.960_491_268_708_020_3,
    -0.774_596_669_241_483_4,
    -0.434_243_749_346_802_56,
    0.0,
    0.434_243_749_346_802_56,
    0.774_596_669_241_483_4,
    0.960_491_268_708_020_3,
];
const K7_W: [f64; 7] = [
    0.104_656_226_026_467_26,
    0.268_488_089_868_333_44,
    0.401_397_414_775_962_2,
    0.450_916_538_658_474_14,
    0.401_397_414_775_962_2,
    0.268_488_089_868_333_44,
    0.104_656_226_026_467_26,
];
const G3_IDX: [usize; 3] = [1, 3, 5];
const G3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

impl BaseRule {
    fn parts(self) -> (&'static [f64], &'static [f64], &'static [usize], &'static [f64]) {
        match self {
            BaseRule::Kronrod5 => (&K5_X, &K5_W, &G2_IDX, &G2_W),
            BaseRule::Kronrod7 => (&K7_X, &K7_W, &G3_IDX, &G3_W),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Rect {
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
}

impl Rect {
    fn du(&self) -> f64 {
        self.u1 - self.u0
    }
    fn dv(&self) -> f64 {
        self.v1 - self.v0
    }
    fn um(&self) -> f64 {
        0.5 * (self.u0 + self.u1)
    }
    fn vm(&self) -> f64 {
        0.5 * (self.v0 + self.v1)
    }
}

/// Rule output with directional error indicators.
#[derive(Clone, Copy, Debug)]
struct CellEstimate {
    value: Complex64,
    err: f64,
    err_u: f64,
    err_v: f64,
    evals: usize,
}

fn apply_rule<G: Fn(f64, f64) -> Complex64>(rule: BaseRule, r: &Rect, g: &G) -> CellEstimate {
    let (xk, wk, gi, wg) = rule.parts();
    let n = xk.len();
    let hu = 0.5 * r.du();
    let hv = 0.5 * r.dv();
    let (um, vm) = (r.um(), r.vm());
    let area = hu * hv;
    let mut f = [[Complex64::zero(); 7]; 7];
    for i in 0..n {
        for j in 0..n {
            f[i][j] = g(um + hu * xk[i], vm + hv * xk[j]);
        }
    }
    let mut high = Complex64::zero();
    for i in 0..n {
        for j in 0..n {
            high += f[i][j] * (wk[i] * wk[j]);
        }
    }
    let mut low = Complex64::zero();
    for (a, &i) in gi.iter().enumerate() {
        for (b, &j) in gi.iter().enumerate() {
            low += f[i][j] * (wg[a] * wg[b]);
        }
    }
    // 1D Kronrod/Gauss differences along each axis, weighted across the other
    let mut eu = 0.0;
    let mut ev = 0.0;
    for k in 0..n {
        let mut du = Complex64::zero();
        let mut dv = Complex64::zero();
        for i in 0..n {
            du += f[i][k] * wk[i];
            dv += f[k][i] * wk[i];
        }
        for (a, &i) in gi.iter().enumerate() {
            du -= f[i][k] * wg[a];
            dv -= f[k][i] * wg[a];
        }
        eu += du.norm() * wk[k];
        ev += dv.norm() * wk[k];
    }
    let value = high * area;
    let mut err = ((high - low) * area).norm();
    if !value.is_finite() || !err.is_finite() {
        err = f64::INFINITY;
    }
    CellEstimate { value, err, err_u: eu * area, err_v: ev * area, evals: n * n }
}

/// Applies the base rule to a single rectangle, returning `(value, error estimate)`.
pub fn integrate_cell<F: Fn(Point) -> Complex64>(f: F, x: (f64, f64), y: (f64, f64), rule: BaseRule) -> (Complex64, f64) {
    let r = Rect { u0: x.0, u1: x.1, v0: y.0, v1: y.1 };
    let e = apply_rule(rule, &r, &|u, v| f(Point::new(u, v)));
    (e.value, e.err)
}

// ---------------------------------------------------------------------------
// Engine

#[derive(Clone, Copy, Debug, PartialEq)]
enum Owner {
    Root,
    Chain { chain: usize, level: usize },
}

#[derive(Clone, Debug)]
struct Cell {
    rect: Rect,
    est: CellEstimate,
    depth: u32,
    owner: Owner,
    alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Feature {
    /// Singular corner at `(u, v)`.
    Corner(f64, f64),
    /// Edge on the line `u = c`.
    EdgeU(f64),
    /// Edge on the line `v = c`.
    EdgeV(f64),
}

#[derive(Clone, Debug)]
struct Chain {
    owner: Owner,
    inner: Rect,
    feature: Feature,
    levels: Vec<Complex64>,
    estimate: Complex64,
    tail_err: f64,
    frozen: bool,
    /// Smallest inner size; absolute for points, relative to the start for lines.
    floor: f64,
}

#[derive(PartialEq)]
struct HeapItem {
    err: f64,
    idx: usize,
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.idx.cmp(&self.idx))
    }
}

struct Engine<'a, G> {
    g: &'a G,
    spec: &'a QuadratureSpec,
    points: Vec<(f64, f64)>,
    lines_u: Vec<f64>,
    lines_v: Vec<f64>,
    cells: Vec<Cell>,
    chains: Vec<Chain>,
    heap: BinaryHeap<HeapItem>,
    root_sum: Complex64,
    cell_err: f64,
    cell_mag: f64,
    evaluations: usize,
    cells_used: usize,
}

enum Kind {
    Regular,
    Composite,
    Chain(Feature),
}

impl<'a, G: Fn(f64, f64) -> Complex64> Engine<'a, G> {
    fn classify(&self, r: &Rect) -> Kind {
        let corners = [(r.u0, r.v0), (r.u1, r.v0), (r.u0, r.v1), (r.u1, r.v1)];
        let sing: Vec<(f64, f64)> = corners.iter().copied().filter(|c| self.points.contains(c)).collect();
        let mut edges: Vec<Feature> = Vec::new();
        for &c in &self.lines_u {
            if c == r.u0 || c == r.u1 {
                edges.push(Feature::EdgeU(c));
            }
        }
        for &c in &self.lines_v {
            if c == r.v0 || c == r.v1 {
                edges.push(Feature::EdgeV(c));
            }
        }
        let interior_point = self
            .points
            .iter()
            .any(|&(u, v)| u >= r.u0 && u <= r.u1 && v >= r.v0 && v <= r.v1 && !corners.contains(&(u, v)));
        let interior_line = self.lines_u.iter().any(|&c| c > r.u0 && c < r.u1)
            || self.lines_v.iter().any(|&c| c > r.v0 && c < r.v1);
        if interior_point || interior_line {
            return Kind::Composite;
        }
        match (sing.len(), edges.len()) {
            (0, 0) => Kind::Regular,
            (0, 1) => Kind::Chain(edges[0]),
            (1, _) => {
                let (u, v) = sing[0];
                let through = edges.iter().all(|e| match *e {
                    Feature::EdgeU(c) => c == u,
                    Feature::EdgeV(c) => c == v,
                    Feature::Corner(..) => false,
                });
                if through {
                    Kind::Chain(Feature::Corner(u, v))
                } else {
                    Kind::Composite
                }
            }
            _ => Kind::Composite,
        }
    }

    fn evaluate(&mut self, rect: Rect) -> CellEstimate {
        let e = apply_rule(self.spec.base_rule, &rect, self.g);
        self.evaluations += e.evals;
        self.cells_used += 1;
        e
    }

    /// Adds a piece of the domain with the given owner; returns its contribution.
    fn add_piece(&mut self, rect: Rect, owner: Owner, depth: u32) -> (Complex64, f64) {
        match self.classify(&rect) {
            Kind::Regular => {
                let est = self.evaluate(rect);
                let idx = self.cells.len();
                self.cells.push(Cell { rect, est, depth, owner, alive: true });
                if depth < self.spec.max_depth {
                    self.heap.push(HeapItem { err: est.err, idx });
                }
                self.cell_err += est.err;
                self.cell_mag += est.value.norm();
                (est.value, est.err)
            }
            Kind::Composite if !splittable(&rect) => {
                let est = self.evaluate(rect);
                self.cell_err += est.err;
                self.cell_mag += est.value.norm();
                (est.value, est.err)
            }
            Kind::Composite => {
                let mut v = Complex64::zero();
                let mut e = 0.0;
                for q in split4(&rect) {
                    let (a, b) = self.add_piece(q, owner, depth);
                    v += a;
                    e += b;
                }
                (v, e)
            }
            Kind::Chain(feature) => {
                let floor = match feature {
                    Feature::Corner(..) => self.spec.exclusion_radius_floor,
                    Feature::EdgeU(_) => self.spec.exclusion_radius_floor * rect.du().min(1.0),
                    Feature::EdgeV(_) => self.spec.exclusion_radius_floor * rect.dv().min(1.0),
                };
                self.chains.push(Chain {
                    floor,
                    owner,
                    inner: rect,
                    feature,
                    levels: Vec::new(),
                    estimate: Complex64::zero(),
                    tail_err: f64::INFINITY,
                    frozen: false,
                });
                (Complex64::zero(), 0.0)
            }
        }
    }

    fn propagate(&mut self, mut owner: Owner, mut delta: Complex64) {
        loop {
            match owner {
                Owner::Root => {
                    self.root_sum += delta;
                    return;
                }
                Owner::Chain { chain, level } => {
                    let c = &mut self.chains[chain];
                    c.levels[level] += delta;
                    let (est, err) = extrapolate(&c.levels, c.frozen, self.spec.tail_extrapolation);
                    delta = est - c.estimate;
                    c.estimate = est;
                    c.tail_err = err;
                    owner = c.owner;
                }
            }
        }
    }

    fn split_cell(&mut self, idx: usize) {
        let cell = self.cells[idx].clone();
        self.cells[idx].alive = false;
        let r = cell.rect;
        let e = cell.est;
        let children: Vec<Rect> = if e.err_u > 4.0 * e.err_v {
            vec![Rect { u1: r.um(), ..r }, Rect { u0: r.um(), ..r }]
        } else if e.err_v > 4.0 * e.err_u {
            vec![Rect { v1: r.vm(), ..r }, Rect { v0: r.vm(), ..r }]
        } else {
            split4(&r).to_vec()
        };
        let mut sum = Complex64::zero();
        for c in children {
            let (v, _) = self.add_piece(c, cell.owner, cell.depth + 1);
            sum += v;
        }
        self.cell_err -= e.err;
        self.cell_mag -= e.value.norm();
        self.propagate(cell.owner, sum - e.value);
    }

    fn inner_size(c: &Chain) -> f64 {
        match c.feature {
            Feature::Corner(..) => c.inner.du().max(c.inner.dv()),
            Feature::EdgeU(_) => c.inner.du(),
            Feature::EdgeV(_) => c.inner.dv(),
        }
    }

    fn deepen_chain(&mut self, ci: usize) {
        let chain = self.chains[ci].clone();
        if Self::inner_size(&chain) * 0.5 < chain.floor {
            let c = &mut self.chains[ci];
            c.frozen = true;
            let (est, err) = extrapolate(&c.levels, true, self.spec.tail_extrapolation);
            let delta = est - c.estimate;
            c.estimate = est;
            c.tail_err = err;
            let owner = c.owner;
            self.propagate(owner, delta);
            return;
        }
        let r = chain.inner;
        let (um, vm) = (r.um(), r.vm());
        let (inner, released): (Rect, Vec<Rect>) = match chain.feature {
            Feature::Corner(u, v) => {
                let quads = split4(&r);
                let pos = quads
                    .iter()
                    .position(|q| (q.u0 == u || q.u1 == u) && (q.v0 == v || q.v1 == v))
                    .expect("corner lies on a quadrant");
                let rest = quads.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, q)| *q).collect();
                (quads[pos], rest)
            }
            Feature::EdgeU(c) => {
                let (a, b) = (Rect { u1: um, ..r }, Rect { u0: um, ..r });
                if a.u0 == c { (a, vec![b]) } else { (b, vec![a]) }
            }
            Feature::EdgeV(c) => {
                let (a, b) = (Rect { v1: vm, ..r }, Rect { v0: vm, ..r });
                if a.v0 == c { (a, vec![b]) } else { (b, vec![a]) }
            }
        };
        let level = chain.levels.len();
        self.chains[ci].levels.push(Complex64::zero());
        self.chains[ci].inner = inner;
        let owner = Owner::Chain { chain: ci, level };
        let mut sum = Complex64::zero();
        for q in released {
            let (v, _) = self.add_piece(q, owner, 0);
            sum += v;
        }
        // recompute even for a zero sum: the level count changed
        self.propagate(owner, sum);
    }

    /// Error that refinement can still reduce, and the error of frozen chains.
    fn split_err(&self) -> (f64, f64) {
        let mut open = self.cell_err.max(0.0);
        let mut fixed = 0.0;
        for c in &self.chains {
            if !c.frozen {
                open += c.tail_err;
            } else if c.tail_err.is_finite() {
                // divergent chains are final; their infinite error is reported, not refined
                fixed += c.tail_err;
            }
        }
        (open, fixed)
    }

    fn target(&self, value: Complex64, mag: f64) -> f64 {
        (self.spec.rel_tol * value.norm()).max(self.spec.abs_tol).max(self.spec.magnitude_tol * mag)
    }

    fn run_loop(mut self) -> IntegralResult {
        let mut converged = false;
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations % 4096 == 0 {
                self.cell_err = self.cells.iter().filter(|c| c.alive).map(|c| c.est.err).sum();
                self.cell_mag = self.cells.iter().filter(|c| c.alive).map(|c| c.est.value.norm()).sum();
            }
            let (open, fixed) = self.split_err();
            let target = self.target(self.root_sum, self.cell_mag);
            if open + fixed <= target {
                converged = true;
                break;
            }
            if fixed >= target && open <= target {
                break;
            }
            if self.cells_used >= self.spec.max_cells {
                break;
            }
            while let Some(top) = self.heap.peek() {
                if self.cells[top.idx].alive {
                    break;
                }
                self.heap.pop();
            }
            let best_cell = self.heap.peek().map(|h| (h.err, h.idx));
            let best_chain = self
                .chains
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.frozen)
                .max_by(|a, b| a.1.tail_err.total_cmp(&b.1.tail_err).then_with(|| b.0.cmp(&a.0)))
                .map(|(i, c)| (c.tail_err, i));
            match (best_cell, best_chain) {
                (None, None) => break,
                (Some((_, ci)), None) => {
                    self.heap.pop();
                    self.split_cell(ci);
                }
                (None, Some((_, ch))) => self.deepen_chain(ch),
                (Some((ce, ci)), Some((he, ch))) => {
                    if he >= ce {
                        self.deepen_chain(ch);
                    } else {
                        self.heap.pop();
                        self.split_cell(ci);
                    }
                }
            }
        }
        let (value, err) = self.final_sums();
        let mag = self.cells.iter().filter(|c| c.alive).map(|c| c.est.value.norm()).sum();
        let target = self.target(value, mag);
        IntegralResult {
            value,
            error_estimate: err,
            cells_used: self.cells_used,
            converged: converged && err <= target * (1.0 + 1e-9),
            evaluations: self.evaluations,
        }
    }

    /// Recomputes all sums from scratch in a fixed order.
    fn final_sums(&mut self) -> (Complex64, f64) {
        let nchains = self.chains.len();
        let mut level_acc: Vec<Vec<Neumaier>> =
            self.chains.iter().map(|c| vec![Neumaier::default(); c.levels.len()]).collect();
        let mut root = Neumaier::default();
        let mut err = 0.0;
        for c in self.cells.iter().filter(|c| c.alive) {
            err += c.est.err;
            match c.owner {
                Owner::Root => root.add(c.est.value),
                Owner::Chain { chain, level } => level_acc[chain][level].add(c.est.value),
            }
        }
        for ci in (0..nchains).rev() {
            let levels: Vec<Complex64> = level_acc[ci].iter().map(|a| a.sum()).collect();
            let (est, e) = extrapolate(&levels, self.chains[ci].frozen, self.spec.tail_extrapolation);
            err += e;
            match self.chains[ci].owner {
                Owner::Root => root.add(est),
                Owner::Chain { chain, level } => level_acc[chain][level].add(est),
            }
        }
        (root.sum(), err)
    }
}

fn splittable(r: &Rect) -> bool {
    let (um, vm) = (r.um(), r.vm());
    um > r.u0 && um < r.u1 && vm > r.v0 && vm < r.v1
}

fn split4(r: &Rect) -> [Rect; 4] {
    let (um, vm) = (r.um(), r.vm());
    [
        Rect { u0: r.u0, u1: um, v0: r.v0, v1: vm },
        Rect { u0: um, u1: r.u1, v0: r.v0, v1: vm },
        Rect { u0: r.u0, u1: um, v0: vm, v1: r.v1 },
        Rect { u0: um, u1: r.u1, v0: vm, v1: r.v1 },
    ]
}

/// Compensated complex summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

impl Neumaier {
    pub fn add(&mut self, x: Complex64) {
        let re = neumaier_step(self.sum.re, self.comp.re, x.re);
        let im = neumaier_step(self.sum.im, self.comp.im, x.im);
        self.sum = Complex64::new(re.0, im.0);
        self.comp = Complex64::new(re.1, im.1);
    }

    pub fn sum(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier_step(sum: f64, comp: f64, x: f64) -> (f64, f64) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
    (t, comp + c)
}

/// Limit of the partial sums of `levels` with an error estimate.
///
/// While a chain can still be refined, too few levels or growing levels give an
/// infinite error so the engine keeps refining it; once frozen, growth means
/// divergence and the partial sum is returned with an infinite error.
fn extrapolate(levels: &[Complex64], frozen: bool, tail: bool) -> (Complex64, f64) {
    let n = levels.len();
    let mut acc = Neumaier::default();
    let mut partial = Vec::with_capacity(n);
    for c in levels {
        acc.add(*c);
        partial.push(acc.sum());
    }
    let s = acc.sum();
    if n == 0 {
        return (s, if frozen { 0.0 } else { f64::INFINITY });
    }
    let last = levels[n - 1].norm();
    if levels.iter().all(|c| c.norm() == 0.0) {
        return (s, if frozen || n >= 3 { 0.0 } else { f64::INFINITY });
    }
    let eps_floor = 4.0 * f64::EPSILON * s.norm();
    if n < 3 {
        return (s, if frozen { f64::INFINITY } else { f64::INFINITY });
    }
    let r1 = levels[n - 1].norm() / levels[n - 2].norm();
    let r2 = levels[n - 2].norm() / levels[n - 3].norm();
    let growing = r1 >= 1.0 && r2 >= 1.0;
    if growing {
        return (s, f64::INFINITY);
    }
    if last <= eps_floor {
        return (s, eps_floor.max(last));
    }
    if !tail {
        let r = r1.max(r2);
        let err = if r < 1.0 { last * r / (1.0 - r) } else { f64::INFINITY };
        return (s, err);
    }
    if n < 4 {
        return (s, f64::INFINITY);
    }
    let start = n.saturating_sub(12);
    let (est, err) = wynn_epsilon(&partial[start..]);
    // geometric tail as a sanity bound
    let r = r1.max(r2);
    let geo = if r < 1.0 { last * r / (1.0 - r) } else { f64::INFINITY };
    let err = if (est - s).norm() > 10.0 * geo + eps_floor {
        err.max((est - s).norm())
    } else {
        err
    };
    (est, err.max(eps_floor))
}

/// Wynn's epsilon algorithm on a sequence of partial sums.
fn wynn_epsilon(s: &[Complex64]) -> (Complex64, f64) {
    let n = s.len();
    // prev2 = ε_{k−1}, prev = ε_k columns
    let mut prev2: Vec<Complex64> = vec![Complex64::zero(); n + 1];
    let mut prev: Vec<Complex64> = s.to_vec();
    let mut best = (s[n - 1], (s[n - 1] - s[n - 2]).norm() * 10.0);
    let mut k = 0;
    while prev.len() >= 2 {
        let mut next = Vec::with_capacity(prev.len() - 1);
        let mut broken = false;
        for i in 0..prev.len() - 1 {
            let d = prev[i + 1] - prev[i];
            if d.norm() <= 1e-300 || !d.is_finite() {
                broken = true;
                break;
            }
            let base = if k == 0 { Complex64::zero() } else { prev2[i + 1] };
            next.push(base + d.inv());
        }
        if broken {
            break;
        }
        k += 1;
        if k % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let cand = next[m - 1];
            let e = (next[m - 1] - next[m - 2]).norm() + (cand - s[n - 1]).norm() * f64::EPSILON;
            if e < best.1 && cand.is_finite() {
                best = (cand, e);
            }
        }
        prev2 = prev;
        prev = next;
    }
    best
}

/// Integrates `f` over `region`, honoring the singularities declared in `spec`.
///
/// Non-convergence is reported in the result, not as an error.
pub fn integrate<F>(f: F, region: &Region, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(Point) -> Complex64,
{
    spec.validate()?;
    match *region {
        Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
            let g = |u: f64, v: f64| f(Point::new(u, v));
            let mut points: Vec<(f64, f64)> = spec
                .singular_points
                .iter()
                .filter(|p| region.contains(**p))
                .map(|p| (p.x, p.y))
                .collect();
            let lines_u: Vec<f64> = spec
                .singular_lines
                .iter()
                .filter_map(|l| match *l {
                    SingularLine::Vertical(c) if c >= x_lo && c <= x_hi => Some(c),
                    _ => None,
                })
                .collect();
            let lines_v: Vec<f64> = spec
                .singular_lines
                .iter()
                .filter_map(|l| match *l {
                    SingularLine::Horizontal(c) if c >= y_lo && c <= y_hi => Some(c),
                    _ => None,
                })
                .collect();
            for &u in &lines_u {
                for &v in &lines_v {
                    points.push((u, v));
                }
            }
            let mut cuts = (Vec::new(), Vec::new());
            for l in &spec.cuts {
                match *l {
                    SingularLine::Vertical(c) => cuts.0.push(c),
                    SingularLine::Horizontal(c) => cuts.1.push(c),
                }
            }
            run_engine(&g, spec, points, lines_u, lines_v, cuts, Rect { u0: x_lo, u1: x_hi, v0: y_lo, v1: y_hi })
        }
        Region::Disc { center, radius } => {
            if !spec.singular_lines.is_empty() {
                return Err(Error::InvalidParameter("singular lines are only supported on rectangles".into()));
            }
            let inside: Vec<Point> = spec.singular_points.iter().copied().filter(|p| region.contains(*p)).collect();
            if let [p] = inside[..] {
                if p != center && region.margin(p) > 0.0 {
                    return eccentric_polar(&f, center, radius, p, spec);
                }
            }
            let mut angles: Vec<f64> = inside
                .iter()
                .filter(|p| **p != center)
                .map(|p| (p.y - center.y).atan2(p.x - center.x).rem_euclid(2.0 * PI))
                .collect();
            angles.sort_by(f64::total_cmp);
            let theta0 = largest_gap_mid(&angles);
            let polar = |p: &Point| {
                let r = p.dist(center).min(radius);
                let mut th = (p.y - center.y).atan2(p.x - center.x);
                while th < theta0 {
                    th += 2.0 * PI;
                }
                while th > theta0 + 2.0 * PI {
                    th -= 2.0 * PI;
                }
                (r, th)
            };
            let mut lines_u = Vec::new();
            let mut points = Vec::new();
            for p in &inside {
                if *p == center {
                    lines_u.push(0.0);
                } else {
                    points.push(polar(p));
                }
            }
            let g = |r: f64, th: f64| {
                let (s, c) = th.sin_cos();
                f(Point::new(center.x + r * c, center.y + r * s)) * r
            };
            run_engine(&g, spec, points, lines_u, Vec::new(), (Vec::new(), Vec::new()), Rect { u0: 0.0, u1: radius, v0: theta0, v1: theta0 + 2.0 * PI })
        }
    }
}

/// Polar coordinates about an interior point `p`: `ζ = p + ρ R(θ) e^{iθ}`, `ρ ∈ [0,1]`.
fn eccentric_polar<F: Fn(Point) -> Complex64>(f: &F, center: Point, radius: f64, p: Point, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let (dx, dy) = (p.x - center.x, p.y - center.y);
    let c0 = dx * dx + dy * dy - radius * radius;
    let reach = |th: f64| {
        let (s, c) = th.sin_cos();
        let b = dx * c + dy * s;
        // stable root of r² + 2br + c0 = 0 with c0 < 0
        let disc = (b * b - c0).sqrt();
        if b > 0.0 { -c0 / (b + disc) } else { disc - b }
    };
    let g = |rho: f64, th: f64| {
        let (s, c) = th.sin_cos();
        let big_r = reach(th);
        let r = rho * big_r;
        f(Point::new(p.x + r * c, p.y + r * s)) * (r * big_r)
    };
    run_engine(&g, spec, Vec::new(), vec![0.0], Vec::new(), (Vec::new(), Vec::new()), Rect { u0: 0.0, u1: 1.0, v0: 0.0, v1: 2.0 * PI })
}

fn largest_gap_mid(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let mut best = (sorted[0] + 2.0 * PI - sorted[sorted.len() - 1], sorted[sorted.len() - 1]);
    for w in sorted.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    best.1 + 0.5 * best.0
}

fn run_engine<G: Fn(f64, f64) -> Complex64>(
    g: &G,
    spec: &QuadratureSpec,
    points: Vec<(f64, f64)>,
    lines_u: Vec<f64>,
    lines_v: Vec<f64>,
    cuts: (Vec<f64>, Vec<f64>),
    root: Rect,
) -> Result<IntegralResult> {
    // cut the root so every singular coordinate lies on a cell boundary
    let mut us: Vec<f64> = vec![root.u0, root.u1];
    let mut vs: Vec<f64> = vec![root.v0, root.v1];
    for &(u, v) in &points {
        us.push(u);
        vs.push(v);
    }
    us.extend(lines_u.iter().copied());
    vs.extend(lines_v.iter().copied());
    let add_cuts = |xs: &mut Vec<f64>, cs: Vec<f64>, width: f64| {
        for c in cs {
            if xs.iter().all(|x| (x - c).abs() > 1e-9 * width) {
                xs.push(c);
            }
        }
    };
    add_cuts(&mut us, cuts.0, root.du());
    add_cuts(&mut vs, cuts.1, root.dv());
    let clean = |mut xs: Vec<f64>, lo: f64, hi: f64| {
        xs.retain(|x| *x >= lo && *x <= hi);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    };
    let us = clean(us, root.u0, root.u1);
    let vs = clean(vs, root.v0, root.v1);
    let mut engine = Engine {
        g,
        spec,
        points,
        lines_u,
        lines_v,
        cells: Vec::new(),
        chains: Vec::new(),
        heap: BinaryHeap::new(),
        root_sum: Complex64::zero(),
        cell_err: 0.0,
        cell_mag: 0.0,
        evaluations: 0,
        cells_used: 0,
    };
    let mut sum = Complex64::zero();
    for wu in us.windows(2) {
        for wv in vs.windows(2) {
            let r = Rect { u0: wu[0], u1: wu[1], v0: wv[0], v1: wv[1] };
            if r.du() > 0.0 && r.dv() > 0.0 {
                let (v, _) = engine.add_piece(r, Owner::Root, 0);
                sum += v;
            }
        }
    }
    engine.root_sum = sum;
    Ok(engine.run_loop())
}

// ---------------------------------------------------------------------------
// One dimension

const GK15_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GK15_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK15_WK[7];
    let mut g = fc * GK15_WG[3];
    for i in 0..7 {
        let s = f(c - h * GK15_X[i]) + f(c + h * GK15_X[i]);
        k += s * GK15_WK[i];
        if i % 2 == 1 {
            g += s * GK15_WG[i / 2];
        }
    }
    let err = ((k - g) * h).norm();
    (k * h, if err.is_finite() { err } else { f64::INFINITY })
}

/// Globally adaptive 7/15-point Gauss–Kronrod quadrature on `[a, b]`.
///
/// Endpoint singularities are tolerated because nodes are interior.
pub fn integrate_1d<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_intervals: usize) -> IntegralResult {
    let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
    let mut parts: Vec<(f64, f64, Complex64, f64, bool)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    parts.push((a, b, v, e, true));
    heap.push(HeapItem { err: e, idx: 0 });
    let mut value = v;
    let mut err = e;
    let mut evaluations = 15;
    let mut converged = false;
    loop {
        if err <= (rel_tol * value.norm()).max(abs_tol) {
            converged = true;
            break;
        }
        if parts.len() >= max_intervals {
            break;
        }
        let Some(top) = heap.pop() else { break };
        let (lo, hi, pv, pe, _) = parts[top.idx];
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            continue;
        }
        parts[top.idx].4 = false;
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        for (l, h, v, e) in [(lo, mid, v1, e1), (mid, hi, v2, e2)] {
            heap.push(HeapItem { err: e, idx: parts.len() });
            parts.push((l, h, v, e, true));
        }
        value += v1 + v2 - pv;
        err += e1 + e2 - pe;
    }
    let mut acc = Neumaier::default();
    let mut total_err = 0.0;
    for p in parts.iter().filter(|p| p.4) {
        acc.add(p.2);
        total_err += p.3;
    }
    let value = acc.sum();
    IntegralResult {
        value,
        error_estimate: total_err,
        cells_used: parts.len(),
        converged: converged || total_err <= (rel_tol * value.norm()).max(abs_tol),
        evaluations,
    }
}

// ---------------------------------------------------------------------------
// Quasi-homogeneous model integrals

/// `∫_{s²+t²≤ρ²} |s + i sgn(t)|t|^{1/τ}|^{−q} ds dt` and its power-law majorant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiHomogeneousIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    /// `angular_factor · radial_factor`, an upper bound for `value`.
    pub majorant: f64,
    /// `∫_0^{2π} τ |sin θ|^{τ−1} dθ`.
    pub angular_factor: f64,
    /// `ρ'^{1+τ−q} / (1+τ−q)` with `ρ' = max(ρ, ρ^{1/τ})`.
    pub radial_factor: f64,
}

/// Radius `R` with `R² cos²θ + R^{2τ} sin^{2τ}θ = ρ²`.
fn boundary_radius(theta: f64, tau: f64, rho: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let h = |r: f64| r * r * c * c + (r * s.abs()).powf(2.0 * tau) - rho * rho;
    let mut hi = rho / c.abs().max(1e-300);
    if s.abs() > 0.0 {
        hi = hi.min(rho.powf(1.0 / tau) / s.abs());
    }
    let mut lo = hi * 1e-12;
    while h(lo) > 0.0 {
        lo *= 1e-12;
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if h(m.exp()) > 0.0 {
            b = m;
        } else {
            a = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    (0.5 * (a + b)).exp()
}

/// `∫_0^{π/2} τ sin^{τ−1}θ · w(θ) dθ` after `θ = (π/2) v^{1/τ}`.
fn angular_integral<W: Fn(f64) -> f64>(tau: f64, w: W, rel_tol: f64) -> IntegralResult {
    let scale = tau * FRAC_PI_2.powf(tau) / tau;
    integrate_1d(
        |v: f64| {
            let theta = FRAC_PI_2 * v.powf(1.0 / tau);
            let sinc = if theta == 0.0 { 1.0 } else { theta.sin() / theta };
            Complex64::new(scale * sinc.powf(tau - 1.0) * w(theta), 0.0)
        },
        0.0,
        1.0,
        rel_tol,
        1e-300,
        10_000,
    )
}

pub fn integrate_quasihomogeneous(tau: f64, q: f64, rho: f64, spec: &QuadratureSpec) -> Result<QuasiHomogeneousIntegral> {
    spec.validate()?;
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must lie in (0, 1]")));
    }
    if !(q > 0.0) || !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter("q and rho must be positive".into()));
    }
    let e = 1.0 + tau - q;
    if !(e > 0.0) {
        return Err(Error::InvalidParameter(format!("q = {q} must be below 1 + tau = {}", 1.0 + tau)));
    }
    let main = angular_integral(tau, |th| boundary_radius(th, tau, rho).powf(e) / e, spec.rel_tol);
    let ang = angular_integral(tau, |_| 1.0, 1e-13);
    let angular_factor = 4.0 * ang.value.re;
    let rho_p = rho.max(rho.powf(1.0 / tau));
    let radial_factor = rho_p.powf(e) / e;
    Ok(QuasiHomogeneousIntegral {
        value: 4.0 * main.value.re,
        error_estimate: 4.0 * main.error_estimate,
        converged: main.converged,
        majorant: angular_factor * radial_factor,
        angular_factor,
        radial_factor,
    })
}

/// `η = sgn(t)|t|^{1/τ}`.
pub fn eta_of(t: f64, tau: f64) -> f64 {
    t.signum() * t.abs().powf(1.0 / tau)
}

/// `∫∫_R g(s,t) ds dt` computed in `(s, η)` with `t = sgn(η)|η|^τ`.
///
/// Singular points and lines of `spec` are given in `(s,t)` and mapped;
/// the Jacobian singularity on `η = 0` is declared automatically.
pub fn integrate_power_substituted<F>(g: F, tau: f64, region: &Region, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(Point) -> Complex64,
{
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must lie in (0, 1]")));
    }
    let Region::Rectangle { x_lo, x_hi, y_lo, y_hi } = *region else {
        return Err(Error::UnsupportedRegion("the power substitution needs a rectangle".into()));
    };
    let mapped = Region::rectangle(x_lo, x_hi, eta_of(y_lo, tau), eta_of(y_hi, tau))?;
    let mut s = spec.clone();
    s.singular_points = spec.singular_points.iter().map(|p| Point::new(p.x, eta_of(p.y, tau))).collect();
    s.singular_lines = spec
        .singular_lines
        .iter()
        .map(|l| match *l {
            SingularLine::Horizontal(c) => SingularLine::Horizontal(eta_of(c, tau)),
            v => v,
        })
        .collect();
    s.cuts = spec
        .cuts
        .iter()
        .map(|l| match *l {
            SingularLine::Horizontal(c) => SingularLine::Horizontal(eta_of(c, tau)),
            v => v,
        })
        .collect();
    if tau < 1.0 && !s.singular_lines.contains(&SingularLine::Horizontal(0.0)) {
        s.singular_lines.push(SingularLine::Horizontal(0.0));
    }
    integrate(
        |p: Point| {
            let a = p.y.abs();
            if a == 0.0 {
                return Complex64::zero();
            }
            let t = p.y.signum() * a.powf(tau);
            g(Point::new(p.x, t)) * (tau * t.abs() / a)
        },
        &mapped,
        &s,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn base_rule_is_exact_to_degree_five() {
        let (x, y): ((f64, f64), (f64, f64)) = ((0.3, 1.1), (-0.7, 0.2));
        for (a, b) in [(0, 0), (5, 0), (0, 5), (2, 3), (4, 1), (3, 2)] {
            let exact = (x.1.powi(a + 1) - x.0.powi(a + 1)) / (a + 1) as f64
                * (y.1.powi(b + 1) - y.0.powi(b + 1))
                / (b + 1) as f64;
            for rule in [BaseRule::Kronrod5, BaseRule::Kronrod7] {
                let (v, _) = integrate_cell(|p| c(p.x.powi(a) * p.y.powi(b)), x, y, rule);
                assert!((v.re - exact).abs() < 1e-13, "{a} {b} {rule:?}");
            }
        }
    }

    #[test]
    fn smooth_integrands() {
        let r = Region::rectangle(0.0, 1.0, 0.0, 2.0).unwrap();
        let res = integrate(|p| Complex64::new(p.x.exp() * p.y.cos(), p.x * p.y), &r, &QuadratureSpec::default()).unwrap();
        assert!(res.converged);
        let exact = Complex64::new((1f64.exp() - 1.0) * 2f64.sin(), 1.0);
        assert!((res.value - exact).norm() < 1e-8, "{res:?}");
        let d = Region::disc(Point::new(0.5, -0.5), 2.0).unwrap();
        let res = integrate(|p| c((p.x - 0.5).powi(2)), &d, &QuadratureSpec::default()).unwrap();
        assert!((res.value.re - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn point_singularity_on_a_disc_centre() {
        // ∫_{|z|<1} |z|^{-3/2} = 4π
        let d = Region::unit_disc();
        let spec = QuadratureSpec::default().with_singular_point(Point::new(0.0, 0.0));
        let res = integrate(|p| c(p.x.hypot(p.y).powf(-1.5)), &d, &spec).unwrap();
        assert!(res.converged, "{res:?}");
        assert!((res.value.re - 4.0 * PI).abs() < 1e-5 * 4.0 * PI, "{res:?}");
    }

    #[test]
    fn interior_point_singularity_on_a_square() {
        // ∫_{[-1,1]^2} |z|^{-1} = 8 asinh(1)
        let r = Region::square(1.0);
        let spec = QuadratureSpec::default().with_singular_point(Point::new(0.0, 0.0));
        let res = integrate(|p| c(1.0 / p.x.hypot(p.y)), &r, &spec).unwrap();
        let exact = 8.0 * 1f64.asinh();
        assert!(res.converged && (res.value.re - exact).abs() < 1e-5 * exact, "{res:?}");
    }

    #[test]
    fn off_centre_singularity_on_a_disc() {
        let d = Region::unit_disc();
        let s = Point::new(0.3, 0.2);
        let spec = QuadratureSpec::default().with_singular_point(s);
        let res = integrate(|p| c(1.0 / p.dist(s)), &d, &spec).unwrap();
        // ∫_{|z|<1} 1/|z−a| = 4 E(|a|) for the complete elliptic integral E
        let a = s.x.hypot(s.y);
        let e = integrate_1d(|t: f64| c((1.0 - a * a * t.sin().powi(2)).sqrt()), 0.0, FRAC_PI_2, 1e-14, 0.0, 100);
        let exact = 4.0 * e.value.re;
        assert!(res.converged && (res.value.re - exact).abs() < 1e-5 * exact, "{res:?} vs {exact}");
    }

    #[test]
    fn line_singularity() {
        // ∫_{[0,1]^2} |x − 1/3|^{-1/2} dx dy
        let r = Region::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        let spec = QuadratureSpec::default().with_singular_line(SingularLine::Vertical(1.0 / 3.0));
        let res = integrate(|p| c((p.x - 1.0 / 3.0).abs().powf(-0.5)), &r, &spec).unwrap();
        let exact = 2.0 * ((1.0f64 / 3.0).sqrt() + (2.0f64 / 3.0).sqrt());
        assert!(res.converged && (res.value.re - exact).abs() < 1e-5 * exact, "{res:?}");
    }

    #[test]
    fn crossing_lines() {
        let r = Region::square(1.0);
        let spec = QuadratureSpec::default()
            .with_singular_line(SingularLine::Vertical(0.0))
            .with_singular_line(SingularLine::Horizontal(0.0));
        let res = integrate(|p| c((p.x * p.y).abs().powf(-0.5)), &r, &spec).unwrap();
        assert!(res.converged && (res.value.re - 16.0).abs() < 1e-5 * 16.0, "{res:?}");
    }

    #[test]
    fn divergent_integral_is_not_converged() {
        let d = Region::unit_disc();
        let spec = QuadratureSpec::default().with_singular_point(Point::new(0.0, 0.0)).with_floor(1e-5);
        let res = integrate(|p| c(p.x.hypot(p.y).powf(-2.5)), &d, &spec).unwrap();
        assert!(!res.converged);
        assert!(res.require_converged().is_err());
    }

    #[test]
    fn floored_chain_stops_refinement() {
        let r = Region::square(1.0);
        let mut spec =
            QuadratureSpec::default().with_singular_point(Point::new(0.0, 0.0)).with_floor(1e-2).with_tolerances(1e-6, 1e-14);
        spec.tail_extrapolation = false;
        let res = integrate(|p| c(p.x.hypot(p.y).powf(-1.5)), &r, &spec).unwrap();
        assert!(!res.converged);
        assert!(res.cells_used < spec.max_cells / 10, "{res:?}");
    }

    #[test]
    fn one_dimensional() {
        let r = integrate_1d(|x: f64| c(x.powf(-0.5)), 0.0, 1.0, 1e-10, 0.0, 1000);
        assert!((r.value.re - 2.0).abs() < 1e-9 && r.converged);
    }

    #[test]
    fn quasihomogeneous_reference_values() {
        // τ = 1 reduces to ∫_{|z|<ρ} |z|^{-q} = 2π ρ^{2−q}/(2−q)
        let spec = QuadratureSpec::default();
        let r = integrate_quasihomogeneous(1.0, 1.5, 0.5, &spec).unwrap();
        let exact = 2.0 * PI * 0.5f64.sqrt() / 0.5;
        assert!((r.value - exact).abs() < 1e-7 * exact, "{r:?}");
        // angular factor for τ = 1/2 is 2 ∫_0^{π/2} sin^{-1/2}
        let r = integrate_quasihomogeneous(0.5, 1.2, 0.3, &spec).unwrap();
        assert!((r.angular_factor - 2.0 * 2.622_057_554_292_12).abs() < 1e-10, "{r:?}");
        assert!(r.value <= r.majorant);
    }

    #[test]
    fn quasihomogeneous_matches_reference() {
        // q = 1: the s-integral is 2 asinh(√(ρ²−t²)/|t|³), integrated independently
        let r = integrate_quasihomogeneous(1.0 / 3.0, 1.0, 0.5, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 9.588_228_100_560_172).abs() < 1e-8, "{r:?}");
        // direct polar integration must not claim a wrong value
        let spec = QuadratureSpec::default().with_tolerances(1e-5, 1e-12).with_singular_point(Point::new(0.0, 0.0));
        let spec = QuadratureSpec { max_cells: 50_000, ..spec };
        let d = integrate(
            |p| c(Complex64::new(p.x, p.y.powi(3)).norm().recip()),
            &Region::disc(Point::new(0.0, 0.0), 0.5).unwrap(),
            &spec,
        )
        .unwrap();
        assert!(!d.converged || (d.value.re - r.value).abs() <= d.error_estimate.max(1e-5 * r.value));
    }

    #[test]
    fn anisotropic_kernel_through_substitution() {
        // ∫_{[-1/2,1/2]²} |s + i t³|^{-1} = ∫ 2 asinh(1/(2|t|³)) dt
        let spec = QuadratureSpec::default().with_singular_point(Point::new(0.0, 0.0));
        let r = integrate_power_substituted(
            |p| c(Complex64::new(p.x, p.y.powi(3)).norm().recip()),
            1.0 / 3.0,
            &Region::square(0.5),
            &spec,
        )
        .unwrap();
        assert!(r.converged && (r.value.re - 10.163_292_327_152_808).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn eta_substitution_agrees_with_direct() {
        let g = |p: Point| Complex64::new((p.x * p.y).cos() + p.y * p.y, p.x);
        let spec = QuadratureSpec::default().with_tolerances(1e-9, 1e-14);
        let direct = integrate(g, &Region::rectangle(-0.5, 1.0, -0.8, 0.8).unwrap(), &spec).unwrap();
        let sub = integrate_power_substituted(g, 1.0 / 3.0, &Region::rectangle(-0.5, 1.0, -0.8, 0.8).unwrap(), &spec).unwrap();
        assert!((direct.value - sub.value).norm() < 1e-7, "{direct:?} {sub:?}");
    }
}
