//! Newton collocation solver for soliton networks.
//!
//! Unknowns are the junction positions and all interior arc nodes. Each arc
//! contributes the full vector equation eta'' + |eta'|^2 (s eta' - eta) = 0
//! at its interior nodes (second-order stencils on graded grids); each
//! junction contributes the balance of inward unit tangents. External ends
//! are pinned to the fan rays on the truncation circle, which also fixes the
//! scaling gauge eta(c s). The Newton step condenses every arc onto its two
//! endpoint variables by a block-tridiagonal solve and then solves a small
//! dense system over the junction positions.

use super::{ArcEnd, ExpanderArc, ExpanderError, SolitonJunction, SolitonNetwork};
use crate::geom::Vec2;
use crate::net::{BlockTree, Fan, TopologyDescriptor};
use crate::numeric::{interior_stencil, onesided_stencil, solve_dense};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// truncation radius of the ball the network is solved in
    pub radius: f64,
    /// interior intervals per external arc
    pub nodes_external: usize,
    /// interior intervals per internal arc
    pub nodes_internal: usize,
    /// power grading of external grids (denser near the origin)
    pub grading: f64,
    /// max-norm residual target
    pub tol: f64,
    pub max_iters: usize,
    /// seed for jittered retries, recorded for reproducibility
    pub seed: u64,
    pub retries: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            radius: 4.0,
            nodes_external: 96,
            nodes_internal: 28,
            grading: 1.6,
            tol: 1e-11,
            max_iters: 80,
            seed: 7,
            retries: 6,
        }
    }
}

#[derive(Clone, Copy)]
enum EndSpec {
    Junction(usize),
    Fixed(Vec2),
}

struct ArcSpec {
    s: Vec<f64>,
    lo: EndSpec,
    hi: EndSpec,
    asymptotic: Option<Vec2>,
    internal: bool,
}

struct Problem {
    arcs: Vec<ArcSpec>,
    /// arms per junction
    junctions: Vec<Vec<(usize, ArcEnd)>>,
}

struct State {
    /// junction positions
    p: Vec<Vec2>,
    /// interior nodes per arc
    nodes: Vec<Vec<Vec2>>,
}

#[derive(Clone, Copy, Default)]
struct Mat2 {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Mat2 {
    const ZERO: Mat2 = Mat2 { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    fn ident(s: f64) -> Mat2 {
        Mat2 { a: s, b: 0.0, c: 0.0, d: s }
    }

    fn outer(u: Vec2, v: Vec2) -> Mat2 {
        Mat2 { a: u.x * v.x, b: u.x * v.y, c: u.y * v.x, d: u.y * v.y }
    }

    fn mulv(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    fn mulm(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    fn add(&self, o: &Mat2) -> Mat2 {
        Mat2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }

    fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }

    fn scale(&self, s: f64) -> Mat2 {
        Mat2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    fn inv(&self) -> Mat2 {
        let det = self.a * self.d - self.b * self.c;
        Mat2 { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }
}

impl Problem {
    fn endpoint(&self, state: &State, spec: EndSpec) -> Vec2 {
        match spec {
            EndSpec::Junction(v) => state.p[v],
            EndSpec::Fixed(p) => p,
        }
    }

    fn arc_points(&self, state: &State, ai: usize) -> Vec<Vec2> {
        let spec = &self.arcs[ai];
        let mut pts = Vec::with_capacity(spec.s.len());
        pts.push(self.endpoint(state, spec.lo));
        pts.extend_from_slice(&state.nodes[ai]);
        pts.push(self.endpoint(state, spec.hi));
        pts
    }

    /// Interior collocation residuals of one arc.
    fn arc_residuals(&self, pts: &[Vec2], s: &[f64]) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(s.len() - 2);
        for i in 1..s.len() - 1 {
            let (w1, w2) = interior_stencil(s[i] - s[i - 1], s[i + 1] - s[i]);
            let d1 = pts[i - 1] * w1[0] + pts[i] * w1[1] + pts[i + 1] * w1[2];
            let d2 = pts[i - 1] * w2[0] + pts[i] * w2[1] + pts[i + 1] * w2[2];
            out.push(d2 + (d1 * s[i] - pts[i]) * d1.norm_sq());
        }
        out
    }

    /// Inward unit tangent of arc `ai` at the given end plus the stencil
    /// weights and node indices (into the full point list) it used.
    fn tangent_data(&self, pts: &[Vec2], s: &[f64], end: ArcEnd) -> (Vec2, [f64; 3], [usize; 3]) {
        let n = s.len();
        match end {
            ArcEnd::Lo => {
                let w = onesided_stencil(s[1] - s[0], s[2] - s[1]);
                (pts[0] * w[0] + pts[1] * w[1] + pts[2] * w[2], w, [0, 1, 2])
            }
            ArcEnd::Hi => {
                let w = onesided_stencil(s[n - 1] - s[n - 2], s[n - 2] - s[n - 3]);
                (
                    pts[n - 1] * w[0] + pts[n - 2] * w[1] + pts[n - 3] * w[2],
                    w,
                    [n - 1, n - 2, n - 3],
                )
            }
        }
    }

    fn junction_residual(&self, state: &State, v: usize) -> Vec2 {
        let mut sum = Vec2::default();
        for &(ai, end) in &self.junctions[v] {
            let pts = self.arc_points(state, ai);
            let (t, _, _) = self.tangent_data(&pts, &self.arcs[ai].s, end);
            sum += t.normalized();
        }
        sum
    }

    fn residual_norm(&self, state: &State) -> f64 {
        let mut worst = 0.0f64;
        for (ai, spec) in self.arcs.iter().enumerate() {
            let pts = self.arc_points(state, ai);
            for r in self.arc_residuals(&pts, &spec.s) {
                worst = worst.max(r.x.abs()).max(r.y.abs());
            }
        }
        for v in 0..self.junctions.len() {
            let r = self.junction_residual(state, v);
            worst = worst.max(r.x.abs()).max(r.y.abs());
        }
        worst
    }

    /// One Newton step by arc condensation; returns the step for junctions
    /// and interior nodes.
    fn newton_step(&self, state: &State) -> Option<(Vec<Vec2>, Vec<Vec<Vec2>>)> {
        let nv = self.junctions.len();
        struct Condensed {
            /// delta_int = base + xl * dp_lo + xh * dp_hi, rows per interior node
            base: Vec<Vec2>,
            xl: Vec<Mat2>,
            xh: Vec<Mat2>,
        }
        let mut condensed = Vec::with_capacity(self.arcs.len());
        for (ai, spec) in self.arcs.iter().enumerate() {
            let pts = self.arc_points(state, ai);
            let s = &spec.s;
            let k = s.len() - 2;
            // Jacobian blocks of the interior equations
            let mut aa = vec![Mat2::ZERO; k];
            let mut bb = vec![Mat2::ZERO; k];
            let mut cc = vec![Mat2::ZERO; k];
            let mut rhs = vec![Vec2::default(); k];
            for i in 1..s.len() - 1 {
                let (w1, w2) = interior_stencil(s[i] - s[i - 1], s[i + 1] - s[i]);
                let d1 = pts[i - 1] * w1[0] + pts[i] * w1[1] + pts[i + 1] * w1[2];
                let d2 = pts[i - 1] * w2[0] + pts[i] * w2[1] + pts[i + 1] * w2[2];
                let mu = d1 * s[i] - pts[i];
                let n2 = d1.norm_sq();
                let res = d2 + mu * n2;
                let row = i - 1;
                rhs[row] = -res;
                for (slot, m) in [(0usize, i - 1), (1, i), (2, i + 1)] {
                    // d/d eta_m [d2 + |d1|^2 mu]
                    //   = w2_m I + 2 w1_m mu d1^T + |d1|^2 (s_i w1_m - [m==i]) I
                    let kron = if m == i { 1.0 } else { 0.0 };
                    let block = Mat2::ident(w2[slot])
                        .add(&Mat2::outer(mu, d1).scale(2.0 * w1[slot]))
                        .add(&Mat2::ident(n2 * (s[i] * w1[slot] - kron)));
                    match slot {
                        0 => aa[row] = block,
                        1 => bb[row] = block,
                        _ => cc[row] = block,
                    }
                }
            }
            // block-Thomas with three right-hand sides: residual, unit lo, unit hi
            // unknowns delta_1..delta_k; delta_0 = dp_lo, delta_{k+1} = dp_hi
            let mut cprime = vec![Mat2::ZERO; k];
            let mut base = rhs.clone();
            let mut xl: Vec<Mat2> = vec![Mat2::ZERO; k];
            let mut xh: Vec<Mat2> = vec![Mat2::ZERO; k];
            // move endpoint couplings to RHS as matrix columns
            xl[0] = aa[0].scale(-1.0);
            if k >= 1 {
                xh[k - 1] = cc[k - 1].scale(-1.0);
            }
            // forward sweep
            let mut denom = bb[0];
            let mut dinv = denom.inv();
            cprime[0] = dinv.mulm(&cc[0]);
            base[0] = dinv.mulv(base[0]);
            xl[0] = dinv.mulm(&xl[0]);
            xh[0] = dinv.mulm(&xh[0]);
            for i in 1..k {
                denom = bb[i].sub(&aa[i].mulm(&cprime[i - 1]));
                dinv = denom.inv();
                if !dinv.a.is_finite() {
                    return None;
                }
                cprime[i] = dinv.mulm(&cc[i]);
                let b = base[i] - aa[i].mulv(base[i - 1]);
                base[i] = dinv.mulv(b);
                let l = xl[i].sub(&aa[i].mulm(&xl[i - 1]));
                xl[i] = dinv.mulm(&l);
                let h = xh[i].sub(&aa[i].mulm(&xh[i - 1]));
                xh[i] = dinv.mulm(&h);
            }
            // back substitution
            for i in (0..k - 1).rev() {
                base[i] = base[i] - cprime[i].mulv(base[i + 1]);
                xl[i] = xl[i].sub(&cprime[i].mulm(&xl[i + 1]));
                xh[i] = xh[i].sub(&cprime[i].mulm(&xh[i + 1]));
            }
            condensed.push(Condensed { base, xl, xh });
        }

        // dense junction system
        let n = 2 * nv;
        let mut big = vec![0.0; n * n];
        let mut brhs = vec![0.0; n];
        if nv > 0 {
            for v in 0..nv {
                let mut cval = -self.junction_residual(state, v);
                let add_block = |big: &mut Vec<f64>, row: usize, col: usize, m: &Mat2| {
                    big[(2 * row) * n + 2 * col] += m.a;
                    big[(2 * row) * n + 2 * col + 1] += m.b;
                    big[(2 * row + 1) * n + 2 * col] += m.c;
                    big[(2 * row + 1) * n + 2 * col + 1] += m.d;
                };
                for &(ai, end) in &self.junctions[v] {
                    let spec = &self.arcs[ai];
                    let pts = self.arc_points(state, ai);
                    let (t, w, idx) = self.tangent_data(&pts, &spec.s, end);
                    let tn = t.norm();
                    let u = t / tn;
                    let ju = Mat2::ident(1.0).sub(&Mat2::outer(u, u)).scale(1.0 / tn);
                    let cd = &condensed[ai];
                    let k = spec.s.len() - 2;
                    // delta of node `id` as (const, coef_lo, coef_hi)
                    let node_delta = |id: usize| -> (Vec2, Mat2, Mat2) {
                        if id == 0 {
                            (Vec2::default(), Mat2::ident(1.0), Mat2::ZERO)
                        } else if id == spec.s.len() - 1 {
                            (Vec2::default(), Mat2::ZERO, Mat2::ident(1.0))
                        } else {
                            (cd.base[id - 1], cd.xl[id - 1], cd.xh[id - 1])
                        }
                    };
                    let _ = k;
                    for (slot, &id) in idx.iter().enumerate() {
                        let (bse, ml, mh) = node_delta(id);
                        let jw = ju.scale(w[slot]);
                        cval -= jw.mulv(bse);
                        match spec.lo {
                            EndSpec::Junction(vl) => add_block(&mut big, v, vl, &jw.mulm(&ml)),
                            EndSpec::Fixed(_) => {}
                        }
                        match spec.hi {
                            EndSpec::Junction(vh) => add_block(&mut big, v, vh, &jw.mulm(&mh)),
                            EndSpec::Fixed(_) => {}
                        }
                    }
                }
                brhs[2 * v] = cval.x;
                brhs[2 * v + 1] = cval.y;
            }
            if !solve_dense(&mut big, &mut brhs, n) {
                return None;
            }
        }
        let dp: Vec<Vec2> = (0..nv)
            .map(|v| Vec2::new(brhs[2 * v], brhs[2 * v + 1]))
            .collect();
        // recover interior deltas
        let mut dnodes = Vec::with_capacity(self.arcs.len());
        for (ai, spec) in self.arcs.iter().enumerate() {
            let cd = &condensed[ai];
            let dlo = match spec.lo {
                EndSpec::Junction(v) => dp[v],
                EndSpec::Fixed(_) => Vec2::default(),
            };
            let dhi = match spec.hi {
                EndSpec::Junction(v) => dp[v],
                EndSpec::Fixed(_) => Vec2::default(),
            };
            let k = spec.s.len() - 2;
            let mut dn = Vec::with_capacity(k);
            for i in 0..k {
                dn.push(cd.base[i] + cd.xl[i].mulv(dlo) + cd.xh[i].mulv(dhi));
            }
            dnodes.push(dn);
        }
        Some((dp, dnodes))
    }

    fn newton(&self, mut state: State, tol: f64, max_iters: usize) -> (State, f64, usize) {
        let mut best = self.residual_norm(&state);
        for it in 0..max_iters {
            if best <= tol {
                return (state, best, it);
            }
            let Some((dp, dn)) = self.newton_step(&state) else {
                return (state, best, it);
            };
            let mut lambda = 1.0f64;
            let mut improved = false;
            for _ in 0..40 {
                let cand = State {
                    p: state
                        .p
                        .iter()
                        .zip(&dp)
                        .map(|(p, d)| *p + *d * lambda)
                        .collect(),
                    nodes: state
                        .nodes
                        .iter()
                        .zip(&dn)
                        .map(|(row, drow)| {
                            row.iter().zip(drow).map(|(p, d)| *p + *d * lambda).collect()
                        })
                        .collect(),
                };
                let r = self.residual_norm(&cand);
                if r < best {
                    state = cand;
                    best = r;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                return (state, best, it);
            }
        }
        (state, best, max_iters)
    }
}

fn external_grid(radius: f64, m: usize, p: f64) -> Vec<f64> {
    crate::numeric::graded_grid(radius, m, p)
}

/// Symmetric grid on [-R, R], graded toward the middle.
fn through_grid(radius: f64, m: usize, p: f64) -> Vec<f64> {
    (0..=m)
        .map(|i| {
            let u = -1.0 + 2.0 * (i as f64) / (m as f64);
            radius * u.signum() * u.abs().powf(p)
        })
        .collect()
}

struct Built {
    problem: Problem,
    state: State,
    ray_arcs: Vec<(usize, ArcEnd)>,
}

/// Build the collocation problem for a fan + topology, with a covariant
/// heuristic initialization (junctions along subtree bisectors).
fn build_problem(fan: &Fan, topology: &TopologyDescriptor, opts: &SolveOptions) -> Built {
    let dirs = &fan.directions;
    let r = opts.radius;
    let mut arcs: Vec<ArcSpec> = Vec::new();
    let mut junction_arms: Vec<Vec<(usize, ArcEnd)>> = Vec::new();
    let mut junction_init: Vec<Vec2> = Vec::new();
    let mut ray_arcs: Vec<(usize, ArcEnd)> = vec![(usize::MAX, ArcEnd::Hi); dirs.len()];
    let mut internal_pairs: Vec<(usize, usize, usize)> = Vec::new(); // (arc, vlo, vhi)

    for block in &topology.blocks {
        if block.size() == 2 {
            let (ra, rb) = (block.rays[0], block.rays[1]);
            let s = through_grid(r, 2 * opts.nodes_external, opts.grading);
            let ai = arcs.len();
            arcs.push(ArcSpec {
                s,
                lo: EndSpec::Fixed(dirs[ra] * r),
                hi: EndSpec::Fixed(dirs[rb] * r),
                asymptotic: Some(dirs[rb]),
                internal: false,
            });
            ray_arcs[ra] = (ai, ArcEnd::Lo);
            ray_arcs[rb] = (ai, ArcEnd::Hi);
            continue;
        }
        let tree = block.tree.as_ref().expect("block >= 3 has a tree");
        let stem = *block.rays.last().unwrap();
        // recursive build: returns junction index of the subtree root
        struct Ctx<'a> {
            dirs: &'a [Vec2],
            r: f64,
            opts: &'a SolveOptions,
            arcs: &'a mut Vec<ArcSpec>,
            arms: &'a mut Vec<Vec<(usize, ArcEnd)>>,
            init: &'a mut Vec<Vec2>,
            ray_arcs: &'a mut Vec<(usize, ArcEnd)>,
            internal_pairs: &'a mut Vec<(usize, usize, usize)>,
        }
        fn subtree_rays(t: &BlockTree, acc: &mut Vec<usize>) {
            match t {
                BlockTree::Leaf(i) => acc.push(*i),
                BlockTree::Join(l, r) => {
                    subtree_rays(l, acc);
                    subtree_rays(r, acc);
                }
            }
        }
        fn visit(ctx: &mut Ctx, node: &BlockTree, extra_leaf: Option<usize>) -> usize {
            let (l, rgt) = match node {
                BlockTree::Join(l, r) => (l.as_ref(), r.as_ref()),
                BlockTree::Leaf(_) => unreachable!("visit is called on joins only"),
            };
            let v = ctx.arms.len();
            ctx.arms.push(Vec::new());
            // init position: bisector of directly attached leaves, or of the
            // whole subtree when both children are joins
            let mut direct: Vec<usize> = Vec::new();
            for child in [l, rgt] {
                if let BlockTree::Leaf(i) = child {
                    direct.push(*i);
                }
            }
            if let Some(sr) = extra_leaf {
                direct.push(sr);
            }
            let bis = if direct.is_empty() {
                let mut all = Vec::new();
                subtree_rays(node, &mut all);
                let sum = all
                    .iter()
                    .fold(Vec2::default(), |acc, &i| acc + ctx.dirs[i]);
                if sum.norm() < 1e-9 {
                    Vec2::new(0.0, 0.0)
                } else {
                    sum.normalized() * 0.18
                }
            } else {
                let sum = direct
                    .iter()
                    .fold(Vec2::default(), |acc, &i| acc + ctx.dirs[i]);
                if sum.norm() < 1e-9 {
                    Vec2::new(0.0, 0.0)
                } else {
                    sum.normalized() * 0.35
                }
            };
            ctx.init.push(bis);
            for child in [l, rgt] {
                match child {
                    BlockTree::Leaf(i) => {
                        let ai = ctx.arcs.len();
                        ctx.arcs.push(ArcSpec {
                            s: external_grid(ctx.r, ctx.opts.nodes_external, ctx.opts.grading),
                            lo: EndSpec::Junction(v),
                            hi: EndSpec::Fixed(ctx.dirs[*i] * ctx.r),
                            asymptotic: Some(ctx.dirs[*i]),
                            internal: false,
                        });
                        ctx.ray_arcs[*i] = (ai, ArcEnd::Hi);
                        ctx.arms[v].push((ai, ArcEnd::Lo));
                    }
                    BlockTree::Join(..) => {
                        let child_v = visit(ctx, child, None);
                        let ai = ctx.arcs.len();
                        let blen = (ctx.init[v].dist(ctx.init[child_v])).max(0.25);
                        ctx.arcs.push(ArcSpec {
                            s: crate::numeric::uniform_grid(0.0, blen, ctx.opts.nodes_internal),
                            lo: EndSpec::Junction(v),
                            hi: EndSpec::Junction(child_v),
                            asymptotic: None,
                            internal: true,
                        });
                        ctx.arms[v].push((ai, ArcEnd::Lo));
                        ctx.arms[child_v].push((ai, ArcEnd::Hi));
                        ctx.internal_pairs.push((ai, v, child_v));
                    }
                }
            }
            // stem leaf attaches to the root join
            if let Some(sr) = extra_leaf {
                let ai = ctx.arcs.len();
                ctx.arcs.push(ArcSpec {
                    s: external_grid(ctx.r, ctx.opts.nodes_external, ctx.opts.grading),
                    lo: EndSpec::Junction(v),
                    hi: EndSpec::Fixed(ctx.dirs[sr] * ctx.r),
                    asymptotic: Some(ctx.dirs[sr]),
                    internal: false,
                });
                ctx.ray_arcs[sr] = (ai, ArcEnd::Hi);
                ctx.arms[v].push((ai, ArcEnd::Lo));
            }
            v
        }
        let mut ctx = Ctx {
            dirs,
            r,
            opts,
            arcs: &mut arcs,
            arms: &mut junction_arms,
            init: &mut junction_init,
            ray_arcs: &mut ray_arcs,
            internal_pairs: &mut internal_pairs,
        };
        match tree {
            BlockTree::Leaf(i) => {
                // two-leaf block encoded as a bare leaf plus stem
                let v = ctx.arms.len();
                ctx.arms.push(Vec::new());
                ctx.init.push(
                    (ctx.dirs[*i] + ctx.dirs[stem]).normalized() * 0.35,
                );
                for &ray in &[*i, stem] {
                    let ai = ctx.arcs.len();
                    ctx.arcs.push(ArcSpec {
                        s: external_grid(ctx.r, ctx.opts.nodes_external, ctx.opts.grading),
                        lo: EndSpec::Junction(v),
                        hi: EndSpec::Fixed(ctx.dirs[ray] * ctx.r),
                        asymptotic: Some(ctx.dirs[ray]),
                        internal: false,
                    });
                    ctx.ray_arcs[ray] = (ai, ArcEnd::Hi);
                    ctx.arms[v].push((ai, ArcEnd::Lo));
                }
            }
            BlockTree::Join(..) => {
                visit(&mut ctx, tree, Some(stem));
            }
        }
    }

    // initial interior nodes: straight interpolation between the endpoints
    let problem = Problem { arcs, junctions: junction_arms };
    let mut nodes = Vec::with_capacity(problem.arcs.len());
    let state0 = State { p: junction_init.clone(), nodes: Vec::new() };
    for spec in &problem.arcs {
        let a = problem.endpoint(&state0, spec.lo);
        let b = problem.endpoint(&state0, spec.hi);
        let m = spec.s.len();
        let smin = spec.s[0];
        let smax = spec.s[m - 1];
        let inner: Vec<Vec2> = spec.s[1..m - 1]
            .iter()
            .map(|&sv| a.lerp(b, (sv - smin) / (smax - smin)))
            .collect();
        nodes.push(inner);
    }
    Built {
        problem,
        state: State { p: junction_init, nodes },
        ray_arcs,
    }
}

fn finish(
    problem: &Problem,
    state: State,
    fan: &Fan,
    topology: &TopologyDescriptor,
    ray_arcs: Vec<(usize, ArcEnd)>,
    radius: f64,
    residual: f64,
) -> SolitonNetwork {
    let arcs: Vec<ExpanderArc> = problem
        .arcs
        .iter()
        .enumerate()
        .map(|(ai, spec)| ExpanderArc {
            s: spec.s.clone(),
            points: problem.arc_points(&state, ai),
            asymptotic: spec.asymptotic,
        })
        .collect();
    let junctions = problem
        .junctions
        .iter()
        .enumerate()
        .map(|(v, arms)| SolitonJunction { position: state.p[v], arms: arms.clone() })
        .collect();
    SolitonNetwork {
        arcs,
        junctions,
        topology: topology.clone(),
        fan: fan.clone(),
        radius,
        ray_arcs,
        residual,
    }
}

/// Solve for the soliton network of a fan under a chosen resolution
/// topology, inside the ball of radius `opts.radius`.
pub fn solve_soliton(
    fan: &Fan,
    topology: &TopologyDescriptor,
    opts: &SolveOptions,
) -> Result<SolitonNetwork, ExpanderError> {
    assert_eq!(topology.valence, fan.valence(), "topology/fan valence mismatch");
    let built = build_problem(fan, topology, opts);
    let Built { problem, state, ray_arcs } = built;
    let (mut best_state, mut best_res, mut iters) =
        problem.newton(state, opts.tol, opts.max_iters);
    if best_res > opts.tol {
        // deterministic jittered retries
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.retries {
            let rebuilt = build_problem(fan, topology, opts);
            let mut st = rebuilt.state;
            for p in &mut st.p {
                *p += Vec2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            }
            // re-interpolate interior nodes for the jittered junctions
            for (ai, spec) in rebuilt.problem.arcs.iter().enumerate() {
                let a = rebuilt.problem.endpoint(&st, spec.lo);
                let b = rebuilt.problem.endpoint(&st, spec.hi);
                let m = spec.s.len();
                let (smin, smax) = (spec.s[0], spec.s[m - 1]);
                st.nodes[ai] = spec.s[1..m - 1]
                    .iter()
                    .map(|&sv| a.lerp(b, (sv - smin) / (smax - smin)))
                    .collect();
            }
            let (st2, r2, it2) = rebuilt.problem.newton(st, opts.tol, opts.max_iters);
            if r2 < best_res {
                best_state = st2;
                best_res = r2;
                iters = it2;
            }
            if best_res <= opts.tol {
                break;
            }
        }
    }
    if best_res > opts.tol {
        return Err(ExpanderError::SolverFailure { residual: best_res, iters });
    }
    // detect collapsed internal edges
    for (ai, spec) in problem.arcs.iter().enumerate() {
        if spec.internal {
            let pts = problem.arc_points(&best_state, ai);
            if crate::geom::polyline_length(&pts) < 1e-3 * opts.radius {
                return Err(ExpanderError::TopologyDegenerate { edge: ai });
            }
        }
    }
    Ok(finish(&problem, best_state, fan, topology, ray_arcs, opts.radius, best_res))
}

/// Single complete geodesic of the expander metric between two boundary
/// angles on the truncation circle: the two-leaf network solved by the same
/// collocation machinery.
pub fn geodesic_bvp(
    theta1: f64,
    theta2: f64,
    radius: f64,
    opts: &SolveOptions,
) -> Result<ExpanderArc, ExpanderError> {
    let tau = 2.0 * std::f64::consts::PI;
    let sep = ((theta2 - theta1) % tau + tau) % tau;
    if sep.min(tau - sep) < 1e-9 {
        return Err(ExpanderError::CoincidentAngles);
    }
    let u1 = Vec2::from_angle(theta1);
    let u2 = Vec2::from_angle(theta2);
    let s = through_grid(radius, 2 * opts.nodes_external, opts.grading);
    let problem = Problem {
        arcs: vec![ArcSpec {
            s: s.clone(),
            lo: EndSpec::Fixed(u1 * radius),
            hi: EndSpec::Fixed(u2 * radius),
            asymptotic: Some(u2),
            internal: false,
        }],
        junctions: vec![],
    };
    let a = u1 * radius;
    let b = u2 * radius;
    let m = s.len();
    let nodes: Vec<Vec2> = s[1..m - 1]
        .iter()
        .map(|&sv| a.lerp(b, (sv - s[0]) / (s[m - 1] - s[0])))
        .collect();
    let state = State { p: vec![], nodes: vec![nodes] };
    let (state, res, iters) = problem.newton(state, opts.tol, opts.max_iters);
    if res > opts.tol {
        return Err(ExpanderError::SolverFailure { residual: res, iters });
    }
    Ok(ExpanderArc {
        s,
        points: problem.arc_points(&state, 0),
        asymptotic: Some(u2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expander::{asymptotic_fit, soliton_residual, straight_star};
    use crate::net::enumerate_resolutions;
    use std::f64::consts::PI;

    fn sym_fan() -> Fan {
        Fan::from_angles(
            Vec2::default(),
            &[PI / 2.0, PI / 2.0 + 2.0 * PI / 3.0, PI / 2.0 + 4.0 * PI / 3.0],
        )
    }

    #[test]
    fn diameter_is_a_straight_chord() {
        let opts = SolveOptions::default();
        let arc = geodesic_bvp(0.3, 0.3 + PI, 4.0, &opts).unwrap();
        // all samples on the line through the origin with direction u(0.3+pi)
        let d = Vec2::from_angle(0.3 + PI);
        for (i, p) in arc.points.iter().enumerate() {
            let along = p.dot(d);
            let off = (Vec2::new(d.x * along, d.y * along)).dist(*p);
            assert!(off < 1e-9, "sample {i} off-line by {off}");
        }
        assert!(soliton_residual(&arc).unwrap() < 1e-10);
    }

    #[test]
    fn right_angle_geodesic_is_reflection_symmetric() {
        let opts = SolveOptions::default();
        let arc = geodesic_bvp(0.0, PI / 2.0, 4.0, &opts).unwrap();
        // reflect across the bisector angle pi/4 and compare as sets
        let refl = |p: Vec2| Vec2::new(p.y, p.x);
        let mirrored: Vec<Vec2> = arc.points.iter().rev().map(|&p| refl(p)).collect();
        let mut worst = 0.0f64;
        for p in &arc.points {
            let d = crate::geom::point_polyline_dist(*p, &mirrored);
            worst = worst.max(d);
        }
        assert!(worst < 1e-8, "symmetry defect {worst}");
        assert!(soliton_residual(&arc).unwrap() < 1e-10);
    }

    #[test]
    fn geodesic_rotation_equivariance() {
        let opts = SolveOptions::default();
        let phi = 0.37;
        let a = geodesic_bvp(0.1, 1.9, 4.0, &opts).unwrap();
        let b = geodesic_bvp(0.1 + phi, 1.9 + phi, 4.0, &opts).unwrap();
        let mut worst = 0.0f64;
        for (p, q) in a.points.iter().zip(&b.points) {
            worst = worst.max(p.rotated(phi).dist(*q));
        }
        assert!(worst < 1e-10, "equivariance defect {worst}");
    }

    #[test]
    fn coincident_angles_error() {
        let opts = SolveOptions::default();
        assert!(matches!(
            geodesic_bvp(0.5, 0.5 + 2.0 * PI, 4.0, &opts),
            Err(ExpanderError::CoincidentAngles)
        ));
    }

    #[test]
    fn symmetric_triod_solves_to_the_fan_itself() {
        let fan = sym_fan();
        let topo = &enumerate_resolutions(3, false).unwrap()[0];
        let sol = solve_soliton(&fan, topo, &SolveOptions::default()).unwrap();
        let exact = straight_star(&fan, 4.0, 96);
        // junction at the origin
        assert!(sol.junctions[0].position.norm() < 1e-10);
        // samples on the straight star
        let mut worst = 0.0f64;
        for arc in &sol.arcs {
            for (i, p) in arc.points.iter().enumerate() {
                let want_dir = arc.asymptotic.unwrap();
                let want = want_dir * arc.s[i];
                worst = worst.max(p.dist(want));
            }
        }
        let _ = exact;
        assert!(worst < 1e-10, "deviation from straight star {worst}");
        assert!(sol.junction_balance() < 1e-11);
    }

    #[test]
    fn cross_soliton_matches_prototype_geometry() {
        let fan = Fan::from_angles(
            Vec2::default(),
            &[PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0],
        );
        let topos = enumerate_resolutions(4, false).unwrap();
        let sol = solve_soliton(&fan, &topos[0], &SolveOptions::default()).unwrap();
        assert!(sol.max_residual() < 1e-8, "residual {}", sol.max_residual());
        assert!(sol.junction_balance() < 1e-9);
        assert_eq!(sol.junctions.len(), 2);
        let j1 = sol.junctions[0].position;
        let j2 = sol.junctions[1].position;
        // junctions symmetric through the origin, separation ~0.545 at R=4
        assert!((j1 + j2).norm() < 1e-7, "not centrally symmetric: {j1:?} {j2:?}");
        let sep = j1.dist(j2);
        assert!((sep - 0.545).abs() < 0.01, "separation {sep}");
        // decay of mu on the external arcs
        for &(ai, _) in &sol.ray_arcs {
            let fit = asymptotic_fit(&sol.arcs[ai]).unwrap();
            let slope = fit.decay_slope.unwrap();
            assert!(slope <= -0.4, "decay slope {slope}");
        }
    }

    #[test]
    fn two_cross_topologies_differ() {
        let fan = Fan::from_angles(
            Vec2::default(),
            &[PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0],
        );
        let topos = enumerate_resolutions(4, false).unwrap();
        let a = solve_soliton(&fan, &topos[0], &SolveOptions::default()).unwrap();
        let b = solve_soliton(&fan, &topos[1], &SolveOptions::default()).unwrap();
        let d = a.hausdorff_to(&b);
        assert!(d > 0.2, "topologies too close: {d}");
    }

    #[test]
    fn disconnected_cross_pairing_gives_disjoint_geodesics() {
        let fan = Fan::from_angles(
            Vec2::default(),
            &[PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0],
        );
        let all = enumerate_resolutions(4, true).unwrap();
        let disc = all.iter().find(|d| !d.is_connected()).unwrap();
        let sol = solve_soliton(&fan, disc, &SolveOptions::default()).unwrap();
        assert_eq!(sol.junctions.len(), 0);
        assert_eq!(sol.arcs.len(), 2);
        // pairwise disjoint: min distance between the two arcs is positive
        let mut min_d = f64::INFINITY;
        for p in &sol.arcs[0].points {
            min_d = min_d.min(crate::geom::point_polyline_dist(*p, &sol.arcs[1].points));
        }
        assert!(min_d > 0.05, "arcs nearly touch: {min_d}");
        assert!(sol.max_residual() < 1e-8);
    }
}
