//! Reverse-mode sweep over a recorded forward evaluation.
//!
//! Every node on the tape is a jet: a row of `width` lanes
//! (`val, dx, dy, dxx, dyy` at width 5, just `val` at width 1). Forward
//! values are computed eagerly while recording; `backward` replays the
//! instruction list in reverse and accumulates one adjoint per parameter
//! slot. Derivative lanes are ordinary forward outputs, so a loss built
//! from `dx`/`dxx` slots is differentiated through them exactly.
//!
//! Besides scalar primitives the op set carries two fused instructions,
//! `Affine` (a whole weight matrix applied to a contiguous run of nodes)
//! and `SumList` (a scaled gather-sum). They are what the network emits;
//! interpreting a 5k-weight layer one scalar multiply at a time would be
//! an order of magnitude slower without changing any result.
//!
//! A tape is single-threaded and meant to be reused: `clear` resets the
//! instruction list but keeps every buffer allocation.

use super::jet::Jet2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TapeError {
    #[error("backward called on a tape with no recorded loss node")]
    NoLoss,
}

/// Number of lanes per node: full jets for PDE work, bare values for data
/// and boundary misfits (which never read derivative slots).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Width {
    One,
    Five,
}

impl Width {
    #[inline]
    pub const fn lanes(self) -> usize {
        match self {
            Width::One => 1,
            Width::Five => 5,
        }
    }
}

/// Derivative lane of a jet node.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Lane {
    Val = 0,
    Dx = 1,
    Dy = 2,
    Dxx = 3,
    Dyy = 4,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct NodeId(u32);

#[derive(Copy, Clone, Debug)]
enum Op {
    /// Constant or coordinate seed; nothing flows back through it.
    Leaf { out: u32 },
    Param { slot: u32, out: u32 },
    Add { a: u32, b: u32, out: u32 },
    Sub { a: u32, b: u32, out: u32 },
    Neg { a: u32, out: u32 },
    Scale { a: u32, c: f64, out: u32 },
    Mul { a: u32, b: u32, out: u32 },
    Sin { a: u32, out: u32 },
    /// Copies one derivative lane of `a` into the value lane of `out`.
    Slot { a: u32, lane: u8, out: u32 },
    /// Dense layer: `out[j] = sum_i W[j,i]·in[i] + b[j]` over `n_out`
    /// contiguous output nodes, reading `n_in` contiguous input nodes.
    Affine { w_ofs: u32, b_ofs: u32, n_in: u32, n_out: u32, input: u32, out: u32 },
    /// `out = sum(nodes in index list)`, lane-wise.
    SumList { idx_start: u32, n: u32, out: u32 },
}

pub struct Tape {
    width: Width,
    ops: Vec<Op>,
    /// Node storage, `width` lanes per node.
    vals: Vec<f64>,
    /// Adjoint storage, same layout as `vals`.
    adj: Vec<f64>,
    /// Index buffer backing `SumList` ops.
    idx: Vec<u32>,
    /// One adjoint per parameter slot; rewritten by each `backward`.
    grad: Vec<f64>,
    n_nodes: usize,
    loss: Option<NodeId>,
}

impl Tape {
    pub fn new(n_params: usize) -> Self {
        Self {
            width: Width::Five,
            ops: Vec::new(),
            vals: Vec::new(),
            adj: Vec::new(),
            idx: Vec::new(),
            grad: vec![0.0; n_params],
            n_nodes: 0,
            loss: None,
        }
    }

    /// Resets the recording, keeping allocations. Also resizes the
    /// parameter-adjoint buffer if the parameter count changed.
    pub fn clear(&mut self, width: Width, n_params: usize) {
        self.width = width;
        self.ops.clear();
        self.vals.clear();
        self.idx.clear();
        self.n_nodes = 0;
        self.loss = None;
        if self.grad.len() != n_params {
            self.grad.resize(n_params, 0.0);
        }
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn width(&self) -> Width {
        self.width
    }

    /// Value lane of a node.
    pub fn value(&self, node: NodeId) -> f64 {
        self.vals[node.0 as usize * self.width.lanes()]
    }

    /// Full jet of a node (derivative lanes are zero on a width-1 tape).
    pub fn jet(&self, node: NodeId) -> Jet2 {
        let w = self.width.lanes();
        let row = &self.vals[node.0 as usize * w..][..w];
        match self.width {
            Width::One => Jet2::constant(row[0]),
            Width::Five => Jet2 { val: row[0], dx: row[1], dy: row[2], dxx: row[3], dyy: row[4] },
        }
    }

    fn alloc(&mut self, count: usize) -> u32 {
        let first = self.n_nodes as u32;
        self.n_nodes += count;
        self.vals.resize(self.n_nodes * self.width.lanes(), 0.0);
        first
    }

    fn write_row(&mut self, node: u32, jet: Jet2) {
        let w = self.width.lanes();
        let row = &mut self.vals[node as usize * w..][..w];
        row[0] = jet.val;
        if w == 5 {
            row[1] = jet.dx;
            row[2] = jet.dy;
            row[3] = jet.dxx;
            row[4] = jet.dyy;
        }
    }

    /// Records an arbitrary jet leaf (constant with respect to parameters).
    pub fn leaf(&mut self, jet: Jet2) -> NodeId {
        let out = self.alloc(1);
        self.write_row(out, jet);
        self.ops.push(Op::Leaf { out });
        NodeId(out)
    }

    pub fn constant(&mut self, c: f64) -> NodeId {
        self.leaf(Jet2::constant(c))
    }

    pub fn seed_x(&mut self, x: f64) -> NodeId {
        self.leaf(Jet2::seed_x(x))
    }

    pub fn seed_y(&mut self, y: f64) -> NodeId {
        self.leaf(Jet2::seed_y(y))
    }

    pub fn param(&mut self, params: &[f64], slot: usize) -> NodeId {
        let out = self.alloc(1);
        self.write_row(out, Jet2::constant(params[slot]));
        self.ops.push(Op::Param { slot: slot as u32, out });
        NodeId(out)
    }

    fn binary(&mut self, a: NodeId, b: NodeId, f: impl Fn(Jet2, Jet2) -> Jet2) -> u32 {
        let ja = self.jet(a);
        let jb = self.jet(b);
        let out = self.alloc(1);
        self.write_row(out, f(ja, jb));
        out
    }

    fn unary(&mut self, a: NodeId, f: impl Fn(Jet2) -> Jet2) -> u32 {
        let ja = self.jet(a);
        let out = self.alloc(1);
        self.write_row(out, f(ja));
        out
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let out = self.binary(a, b, |x, y| x + y);
        self.ops.push(Op::Add { a: a.0, b: b.0, out });
        NodeId(out)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let out = self.binary(a, b, |x, y| x - y);
        self.ops.push(Op::Sub { a: a.0, b: b.0, out });
        NodeId(out)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        let out = self.unary(a, |x| -x);
        self.ops.push(Op::Neg { a: a.0, out });
        NodeId(out)
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let out = self.unary(a, |x| x.scale(c));
        self.ops.push(Op::Scale { a: a.0, c, out });
        NodeId(out)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let out = self.binary(a, b, |x, y| x * y);
        self.ops.push(Op::Mul { a: a.0, b: b.0, out });
        NodeId(out)
    }

    pub fn sin(&mut self, a: NodeId) -> NodeId {
        let out = self.unary(a, Jet2::sin);
        self.ops.push(Op::Sin { a: a.0, out });
        NodeId(out)
    }

    /// Reads a derivative lane of `a` as a plain scalar node.
    pub fn slot(&mut self, a: NodeId, lane: Lane) -> NodeId {
        debug_assert!(
            self.width == Width::Five || lane == Lane::Val,
            "derivative lanes do not exist on a width-1 tape"
        );
        let w = self.width.lanes();
        let v = self.vals[a.0 as usize * w + lane as usize];
        let out = self.alloc(1);
        self.write_row(out, Jet2::constant(v));
        self.ops.push(Op::Slot { a: a.0, lane: lane as u8, out });
        NodeId(out)
    }

    /// Dense layer over the `n_in` consecutive nodes starting at `input`.
    /// Weights are row-major at `params[w_ofs..]`, biases at
    /// `params[b_ofs..]`. Returns the first of `n_out` consecutive outputs.
    pub fn affine(
        &mut self,
        params: &[f64],
        w_ofs: usize,
        b_ofs: usize,
        n_in: usize,
        n_out: usize,
        input: NodeId,
    ) -> NodeId {
        let out = self.alloc(n_out);
        match self.width {
            Width::One => affine_forward::<1>(
                &mut self.vals, params, w_ofs, b_ofs, n_in, n_out, input.0 as usize, out as usize,
            ),
            Width::Five => affine_forward::<5>(
                &mut self.vals, params, w_ofs, b_ofs, n_in, n_out, input.0 as usize, out as usize,
            ),
        }
        self.ops.push(Op::Affine {
            w_ofs: w_ofs as u32,
            b_ofs: b_ofs as u32,
            n_in: n_in as u32,
            n_out: n_out as u32,
            input: input.0,
            out,
        });
        NodeId(out)
    }

    /// Applies `sin` to `n` consecutive nodes starting at `input`,
    /// producing `n` consecutive outputs.
    pub fn sin_range(&mut self, input: NodeId, n: usize) -> NodeId {
        let first = self.sin(NodeId(input.0));
        for k in 1..n {
            self.sin(NodeId(input.0 + k as u32));
        }
        first
    }

    /// Lane-wise sum of an arbitrary list of nodes.
    pub fn sum_list(&mut self, nodes: &[NodeId]) -> NodeId {
        let idx_start = self.idx.len() as u32;
        self.idx.extend(nodes.iter().map(|n| n.0));
        let w = self.width.lanes();
        let mut acc = [0.0f64; 5];
        for n in nodes {
            let row = &self.vals[n.0 as usize * w..][..w];
            for s in 0..w {
                acc[s] += row[s];
            }
        }
        let out = self.alloc(1);
        let row = &mut self.vals[out as usize * w..][..w];
        row.copy_from_slice(&acc[..w]);
        self.ops.push(Op::SumList { idx_start, n: nodes.len() as u32, out });
        NodeId(out)
    }

    /// Marks the scalar loss the reverse sweep starts from.
    pub fn set_loss(&mut self, node: NodeId) {
        self.loss = Some(node);
    }

    /// Reverse sweep from the recorded loss node, seeding its value-lane
    /// adjoint with `seed` (the coefficient of this tape's loss inside the
    /// total objective). Returns one adjoint per parameter slot; unused
    /// parameters get exactly 0.
    pub fn backward(&mut self, params: &[f64], seed: f64) -> Result<&[f64], TapeError> {
        let loss = self.loss.ok_or(TapeError::NoLoss)?;
        let w = self.width.lanes();
        self.adj.clear();
        self.adj.resize(self.n_nodes * w, 0.0);
        self.grad.fill(0.0);
        self.adj[loss.0 as usize * w] = seed;

        for op in self.ops.iter().rev() {
            match *op {
                Op::Leaf { .. } => {}
                Op::Param { slot, out } => {
                    self.grad[slot as usize] += self.adj[out as usize * w];
                }
                Op::Add { a, b, out } => {
                    for s in 0..w {
                        let z = self.adj[out as usize * w + s];
                        self.adj[a as usize * w + s] += z;
                        self.adj[b as usize * w + s] += z;
                    }
                }
                Op::Sub { a, b, out } => {
                    for s in 0..w {
                        let z = self.adj[out as usize * w + s];
                        self.adj[a as usize * w + s] += z;
                        self.adj[b as usize * w + s] -= z;
                    }
                }
                Op::Neg { a, out } => {
                    for s in 0..w {
                        self.adj[a as usize * w + s] -= self.adj[out as usize * w + s];
                    }
                }
                Op::Scale { a, c, out } => {
                    for s in 0..w {
                        self.adj[a as usize * w + s] += c * self.adj[out as usize * w + s];
                    }
                }
                Op::Mul { a, b, out } => match self.width {
                    Width::One => {
                        let z = self.adj[out as usize];
                        let av = self.vals[a as usize];
                        let bv = self.vals[b as usize];
                        self.adj[a as usize] += z * bv;
                        self.adj[b as usize] += z * av;
                    }
                    Width::Five => {
                        mul_backward(&self.vals, &mut self.adj, a as usize, b as usize, out as usize);
                    }
                },
                Op::Sin { a, out } => match self.width {
                    Width::One => {
                        let z = self.adj[out as usize];
                        self.adj[a as usize] += z * self.vals[a as usize].cos();
                    }
                    Width::Five => {
                        sin_backward(&self.vals, &mut self.adj, a as usize, out as usize);
                    }
                },
                Op::Slot { a, lane, out } => {
                    self.adj[a as usize * w + lane as usize] += self.adj[out as usize * w];
                }
                Op::Affine { w_ofs, b_ofs, n_in, n_out, input, out } => {
                    let args = (
                        w_ofs as usize,
                        b_ofs as usize,
                        n_in as usize,
                        n_out as usize,
                        input as usize,
                        out as usize,
                    );
                    match self.width {
                        Width::One => affine_backward::<1>(
                            &self.vals, &mut self.adj, &mut self.grad, params, args,
                        ),
                        Width::Five => affine_backward::<5>(
                            &self.vals, &mut self.adj, &mut self.grad, params, args,
                        ),
                    }
                }
                Op::SumList { idx_start, n, out } => {
                    let (before, z_and_after) = self.adj.split_at_mut(out as usize * w);
                    let z = &z_and_after[..w];
                    for &node in &self.idx[idx_start as usize..(idx_start + n) as usize] {
                        let row = &mut before[node as usize * w..][..w];
                        for s in 0..w {
                            row[s] += z[s];
                        }
                    }
                }
            }
        }
        Ok(&self.grad)
    }
}

fn affine_forward<const W: usize>(
    vals: &mut [f64],
    params: &[f64],
    w_ofs: usize,
    b_ofs: usize,
    n_in: usize,
    n_out: usize,
    input: usize,
    out: usize,
) {
    let (head, tail) = vals.split_at_mut(out * W);
    let ins = &head[input * W..(input + n_in) * W];
    let outs = &mut tail[..n_out * W];
    for j in 0..n_out {
        let mut acc = [0.0f64; W];
        let wrow = &params[w_ofs + j * n_in..][..n_in];
        for (i, &wv) in wrow.iter().enumerate() {
            let a = &ins[i * W..][..W];
            for s in 0..W {
                acc[s] += wv * a[s];
            }
        }
        acc[0] += params[b_ofs + j];
        outs[j * W..][..W].copy_from_slice(&acc);
    }
}

fn affine_backward<const W: usize>(
    vals: &[f64],
    adj: &mut [f64],
    grad: &mut [f64],
    params: &[f64],
    (w_ofs, b_ofs, n_in, n_out, input, out): (usize, usize, usize, usize, usize, usize),
) {
    let a_in = &vals[input * W..(input + n_in) * W];
    let (adj_head, adj_tail) = adj.split_at_mut(out * W);
    let adj_in = &mut adj_head[input * W..(input + n_in) * W];
    let zbar = &adj_tail[..n_out * W];
    for j in 0..n_out {
        let z = &zbar[j * W..][..W];
        grad[b_ofs + j] += z[0];
        let wrow = &params[w_ofs + j * n_in..][..n_in];
        let grow = &mut grad[w_ofs + j * n_in..][..n_in];
        for i in 0..n_in {
            let ai = &a_in[i * W..][..W];
            let adji = &mut adj_in[i * W..][..W];
            let wv = wrow[i];
            let mut dot = 0.0;
            for s in 0..W {
                adji[s] += wv * z[s];
                dot += z[s] * ai[s];
            }
            grow[i] += dot;
        }
    }
}

/// Adjoint of the width-5 jet product (see `Jet2: Mul` for the forward
/// lane formulas).
fn mul_backward(vals: &[f64], adj: &mut [f64], a: usize, b: usize, out: usize) {
    let av = [vals[a * 5], vals[a * 5 + 1], vals[a * 5 + 2], vals[a * 5 + 3], vals[a * 5 + 4]];
    let bv = [vals[b * 5], vals[b * 5 + 1], vals[b * 5 + 2], vals[b * 5 + 3], vals[b * 5 + 4]];
    let z = [
        adj[out * 5],
        adj[out * 5 + 1],
        adj[out * 5 + 2],
        adj[out * 5 + 3],
        adj[out * 5 + 4],
    ];

    adj[a * 5] += z[0] * bv[0] + z[1] * bv[1] + z[2] * bv[2] + z[3] * bv[3] + z[4] * bv[4];
    adj[a * 5 + 1] += z[1] * bv[0] + 2.0 * z[3] * bv[1];
    adj[a * 5 + 2] += z[2] * bv[0] + 2.0 * z[4] * bv[2];
    adj[a * 5 + 3] += z[3] * bv[0];
    adj[a * 5 + 4] += z[4] * bv[0];

    adj[b * 5] += z[0] * av[0] + z[1] * av[1] + z[2] * av[2] + z[3] * av[3] + z[4] * av[4];
    adj[b * 5 + 1] += z[1] * av[0] + 2.0 * z[3] * av[1];
    adj[b * 5 + 2] += z[2] * av[0] + 2.0 * z[4] * av[2];
    adj[b * 5 + 3] += z[3] * av[0];
    adj[b * 5 + 4] += z[4] * av[0];
}

/// Adjoint of the width-5 jet sine. Forward lanes:
/// `z = [sin a0, c·a1, c·a2, c·a3 - s·a1², c·a4 - s·a2²]` with
/// `s = sin a0`, `c = cos a0`.
fn sin_backward(vals: &[f64], adj: &mut [f64], a: usize, out: usize) {
    let a0 = vals[a * 5];
    let a1 = vals[a * 5 + 1];
    let a2 = vals[a * 5 + 2];
    let a3 = vals[a * 5 + 3];
    let a4 = vals[a * 5 + 4];
    let (s, c) = a0.sin_cos();
    let z = [
        adj[out * 5],
        adj[out * 5 + 1],
        adj[out * 5 + 2],
        adj[out * 5 + 3],
        adj[out * 5 + 4],
    ];

    adj[a * 5] += z[0] * c - z[1] * s * a1 - z[2] * s * a2
        + z[3] * (-s * a3 - c * a1 * a1)
        + z[4] * (-s * a4 - c * a2 * a2);
    adj[a * 5 + 1] += z[1] * c - 2.0 * z[3] * s * a1;
    adj[a * 5 + 2] += z[2] * c - 2.0 * z[4] * s * a2;
    adj[a * 5 + 3] += z[3] * c;
    adj[a * 5 + 4] += z[4] * c;
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite difference of `f` in its `i`-th argument.
    fn central_diff(f: impl Fn(&[f64]) -> f64, at: &[f64], i: usize, h: f64) -> f64 {
        let mut p = at.to_vec();
        p[i] = at[i] + h;
        let hi = f(&p);
        p[i] = at[i] - h;
        let lo = f(&p);
        (hi - lo) / (2.0 * h)
    }

    #[test]
    fn squared_product_gradient() {
        // loss = (w·x)² at w = 2, x = 3: d/dw = 2wx·x = 36.
        let params = [2.0];
        let mut t = Tape::new(1);
        t.clear(Width::One, 1);
        let w = t.param(&params, 0);
        let x = t.constant(3.0);
        let wx = t.mul(w, x);
        let loss = t.mul(wx, wx);
        t.set_loss(loss);
        let g = t.backward(&params, 1.0).unwrap();
        assert_eq!(g[0], 36.0);
    }

    #[test]
    fn unused_parameter_has_exactly_zero_adjoint() {
        let params = [2.0, -7.0];
        let mut t = Tape::new(2);
        t.clear(Width::Five, 2);
        let w = t.param(&params, 0);
        let _ignored = t.param(&params, 1);
        let loss = t.mul(w, w);
        t.set_loss(loss);
        let g = t.backward(&params, 1.0).unwrap();
        assert_eq!(g[0], 4.0);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn backward_without_loss_is_rejected() {
        let mut t = Tape::new(1);
        t.clear(Width::One, 1);
        let _ = t.constant(1.0);
        assert!(matches!(t.backward(&[0.0], 1.0), Err(TapeError::NoLoss)));
    }

    #[test]
    fn gradient_matches_finite_differences_through_derivative_slots() {
        // loss = (d/dx sin(p0·x))² + p1·(d²/dx² sin(p0·x)) at x = 0.7,
        // exercising the reverse pass through dx and dxx lanes.
        let x = 0.7;
        let f = |p: &[f64]| {
            let ddx = p[0] * (p[0] * x).cos();
            let ddxx = -p[0] * p[0] * (p[0] * x).sin();
            ddx * ddx + p[1] * ddxx
        };
        let params = [1.3, 0.4];

        let mut t = Tape::new(2);
        t.clear(Width::Five, 2);
        let xj = t.seed_x(x);
        let p0 = t.param(&params, 0);
        let p1 = t.param(&params, 1);
        let px = t.mul(p0, xj);
        let s = t.sin(px);
        let ddx = t.slot(s, Lane::Dx);
        let ddxx = t.slot(s, Lane::Dxx);
        let sq = t.mul(ddx, ddx);
        let lin = t.mul(p1, ddxx);
        let loss = t.add(sq, lin);
        t.set_loss(loss);

        assert!((t.value(loss) - f(&params)).abs() < 1e-14);
        let g = t.backward(&params, 1.0).unwrap().to_vec();
        for i in 0..2 {
            let fd = central_diff(f, &params, i, 1e-6);
            assert!(
                (g[i] - fd).abs() <= 1e-9 + 1e-8 * fd.abs(),
                "component {i}: ad {} vs fd {fd}",
                g[i]
            );
        }
    }

    #[test]
    fn fused_affine_agrees_with_scalar_ops() {
        // 2 inputs -> 3 outputs, then sin, then sum. Once with the fused
        // Affine op and once spelled out scalar-by-scalar.
        let params: Vec<f64> = vec![0.3, -0.7, 1.1, 0.2, -0.4, 0.9, 0.05, -0.15, 0.25];
        let (w_ofs, b_ofs) = (0usize, 6usize);
        let (x, y) = (0.35, -0.8);

        let mut fused = Tape::new(params.len());
        fused.clear(Width::Five, params.len());
        let xs = fused.seed_x(x);
        let _ys = fused.seed_y(y);
        let z0 = fused.affine(&params, w_ofs, b_ofs, 2, 3, xs);
        let s0 = fused.sin_range(z0, 3);
        let outs: Vec<NodeId> = (0..3).map(|k| NodeId(s0.0 + k)).collect();
        let loss_f = fused.sum_list(&outs);
        fused.set_loss(loss_f);
        let gf = fused.backward(&params, 1.0).unwrap().to_vec();

        let mut scalar = Tape::new(params.len());
        scalar.clear(Width::Five, params.len());
        let xs = scalar.seed_x(x);
        let ys = scalar.seed_y(y);
        let mut acts = Vec::new();
        for j in 0..3 {
            let wj0 = scalar.param(&params, w_ofs + j * 2);
            let wj1 = scalar.param(&params, w_ofs + j * 2 + 1);
            let bj = scalar.param(&params, b_ofs + j);
            let t0 = scalar.mul(wj0, xs);
            let t1 = scalar.mul(wj1, ys);
            let sum = scalar.add(t0, t1);
            let z = scalar.add(sum, bj);
            acts.push(scalar.sin(z));
        }
        let loss_s = scalar.sum_list(&acts);
        scalar.set_loss(loss_s);
        let gs = scalar.backward(&params, 1.0).unwrap().to_vec();

        assert!((fused.value(loss_f) - scalar.value(loss_s)).abs() < 1e-14);
        for (a, b) in gf.iter().zip(gs.iter()) {
            assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn backward_is_linear_in_the_seed() {
        let params = [0.8, -1.4];
        let build = |t: &mut Tape| -> (NodeId, NodeId) {
            let x = t.seed_x(0.4);
            let p0 = t.param(&params, 0);
            let p1 = t.param(&params, 1);
            let px = t.mul(p0, x);
            let l1 = t.sin(px);
            let pp = t.mul(p1, p1);
            let l2 = t.mul(pp, px);
            (l1, l2)
        };

        let (alpha, beta) = (2.5, -0.75);
        let mut t = Tape::new(2);
        t.clear(Width::Five, 2);
        let (l1, l2) = build(&mut t);
        t.set_loss(l1);
        let g1 = t.backward(&params, 1.0).unwrap().to_vec();
        t.set_loss(l2);
        let g2 = t.backward(&params, 1.0).unwrap().to_vec();

        let mut t3 = Tape::new(2);
        t3.clear(Width::Five, 2);
        let (l1, l2) = build(&mut t3);
        let a = t3.scale(l1, alpha);
        let b = t3.scale(l2, beta);
        let combined = t3.add(a, b);
        t3.set_loss(combined);
        let gc = t3.backward(&params, 1.0).unwrap().to_vec();

        for i in 0..2 {
            let want = alpha * g1[i] + beta * g2[i];
            assert!((gc[i] - want).abs() <= 1e-15 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn tape_length_is_static_across_param_values() {
        let record = |params: &[f64]| -> (usize, usize) {
            let mut t = Tape::new(params.len());
            t.clear(Width::Five, params.len());
            let x = t.seed_x(0.2);
            let z = t.affine(params, 0, 4, 1, 4, x);
            let s = t.sin_range(z, 4);
            let outs: Vec<NodeId> = (0..4).map(|k| NodeId(s.0 + k)).collect();
            let l = t.sum_list(&outs);
            t.set_loss(l);
            (t.op_count(), t.node_count())
        };
        let a = record(&[0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0, 0.0]);
        let b = record(&[9.0, -3.0, 7.7, 0.01, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn backward_is_bit_deterministic() {
        let params: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
        let run = || {
            let mut t = Tape::new(params.len());
            t.clear(Width::Five, params.len());
            let x = t.seed_x(0.3);
            let y = t.seed_y(0.6);
            let xy = t.mul(x, y);
            let z = t.affine(&params, 0, 4, 1, 4, xy);
            let s = t.sin_range(z, 4);
            let outs: Vec<NodeId> = (0..4).map(|k| NodeId(s.0 + k)).collect();
            let l = t.sum_list(&outs);
            t.set_loss(l);
            t.backward(&params, 1.0).unwrap().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn clear_keeps_capacity_and_resets_state() {
        let mut t = Tape::new(2);
        t.clear(Width::Five, 2);
        for _ in 0..100 {
            let c = t.constant(1.0);
            t.set_loss(c);
        }
        let cap_ops = t.ops.capacity();
        let cap_vals = t.vals.capacity();
        t.clear(Width::One, 2);
        assert_eq!(t.op_count(), 0);
        assert_eq!(t.node_count(), 0);
        assert!(t.ops.capacity() >= cap_ops.min(1));
        assert_eq!(t.vals.capacity(), cap_vals);
        assert!(matches!(t.backward(&[0.0, 0.0], 1.0), Err(TapeError::NoLoss)));
    }
}
