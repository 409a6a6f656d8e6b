//! Batched jet propagation through networks for training.
//!
//! Each scalar quantity carries `1 + n_dirs * ord` coefficients: a shared
//! value followed by `ord` Taylor coefficients per seed direction. All
//! directions share the base point, so activation derivative tables are
//! computed once per neuron. The backward pass is the exact transpose of
//! the truncated Taylor arithmetic, giving parameter gradients of losses
//! that contain input derivatives up to fourth order.

use super::{Activation, Mlp, Network, RbfNet};

/// Floating-point type the trainer runs in.
pub trait Real:
    Copy
    + PartialOrd
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn tanh_r(self) -> Self;
    fn exp_r(self) -> Self;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn tanh_r(self) -> Self {
        self.tanh()
    }
    fn exp_r(self) -> Self {
        self.exp()
    }
}

impl Real for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn tanh_r(self) -> Self {
        self.tanh()
    }
    fn exp_r(self) -> Self {
        self.exp()
    }
}

/// Seed directions and Taylor order of a jet batch.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPlan {
    pub dirs: Vec<Vec<f64>>,
    pub ord: usize,
}

impl JetPlan {
    pub fn new(dirs: Vec<Vec<f64>>, ord: usize) -> Self {
        assert!(ord >= 1 && ord <= 4, "jet order must be 1..=4");
        JetPlan { dirs, ord }
    }

    /// Coefficients per scalar: shared value + ord per direction.
    pub fn stride(&self) -> usize {
        1 + self.dirs.len() * self.ord
    }

    /// Coordinate axes of `R^d`.
    pub fn axes(d: usize, ord: usize) -> Self {
        let dirs = (0..d)
            .map(|j| {
                let mut v = vec![0.0; d];
                v[j] = 1.0;
                v
            })
            .collect();
        JetPlan::new(dirs, ord)
    }

    /// Axes plus the two diagonals `(1,1)` and `(1,-1)`; recovers mixed
    /// partials in 2D by polarization.
    pub fn axes_and_diagonals_2d(ord: usize) -> Self {
        JetPlan::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]],
            ord,
        )
    }

    /// Fill the jet coefficients of the input coordinates at a point.
    pub fn seed_input<R: Real>(&self, x: &[f64], out: &mut [R]) {
        let stride = self.stride();
        debug_assert_eq!(out.len(), x.len() * stride);
        for v in out.iter_mut() {
            *v = R::zero();
        }
        for (j, &xj) in x.iter().enumerate() {
            out[j * stride] = R::from_f64(xj);
            for (t, dir) in self.dirs.iter().enumerate() {
                out[j * stride + 1 + t * self.ord] = R::from_f64(dir[j]);
            }
        }
    }
}

/// Derivatives `g, g', .., g^(5)` of the activation at `v`.
fn act_derivs<R: Real>(act: Activation, v: R) -> [R; 6] {
    let z = R::zero();
    match act {
        Activation::Tanh => {
            let t = v.tanh_r();
            let one = R::from_f64(1.0);
            let u = one - t * t;
            let t2 = t * t;
            [
                t,
                u,
                -(R::from_f64(2.0)) * t * u,
                u * (R::from_f64(6.0) * t2 - R::from_f64(2.0)),
                u * t * (R::from_f64(16.0) - R::from_f64(24.0) * t2),
                u * (R::from_f64(16.0) - R::from_f64(120.0) * t2
                    + R::from_f64(120.0) * t2 * t2),
            ]
        }
        Activation::ReLU => {
            if v > R::zero() {
                [v, R::from_f64(1.0), z, z, z, z]
            } else {
                [z; 6]
            }
        }
        Activation::RePU3 => {
            if v > R::zero() {
                [
                    v * v * v,
                    R::from_f64(3.0) * v * v,
                    R::from_f64(6.0) * v,
                    R::from_f64(6.0),
                    z,
                    z,
                ]
            } else {
                [z; 6]
            }
        }
        Activation::Gaussian => {
            let v2 = v * v;
            let e = (-v2).exp_r();
            [
                e,
                R::from_f64(-2.0) * v * e,
                (R::from_f64(4.0) * v2 - R::from_f64(2.0)) * e,
                (R::from_f64(12.0) * v - R::from_f64(8.0) * v * v2) * e,
                (R::from_f64(12.0) - R::from_f64(48.0) * v2 + R::from_f64(16.0) * v2 * v2)
                    * e,
                (R::from_f64(-120.0) * v + R::from_f64(160.0) * v * v2
                    - R::from_f64(32.0) * v * v2 * v2)
                    * e,
            ]
        }
    }
}

/// Taylor composition of one direction: `y[k] = sum d_(m+shift)/m! zhat^m`,
/// writing `ord` coefficients. `z` and `y` are the per-direction slices
/// (index 0 is the first-order coefficient).
#[inline]
fn compose_dir<R: Real>(d: &[R; 6], shift: usize, z: &[R], y: &mut [R], ord: usize) {
    let d1 = d[shift + 1];
    y[0] = d1 * z[0];
    if ord >= 2 {
        let d2 = d[shift + 2];
        y[1] = d1 * z[1] + R::from_f64(0.5) * d2 * z[0] * z[0];
        if ord >= 3 {
            let d3 = d[shift + 3];
            y[2] = d1 * z[2]
                + d2 * z[0] * z[1]
                + R::from_f64(1.0 / 6.0) * d3 * z[0] * z[0] * z[0];
            if ord >= 4 {
                let d4 = d[shift + 4];
                y[3] = d1 * z[3]
                    + d2 * (z[0] * z[2] + R::from_f64(0.5) * z[1] * z[1])
                    + R::from_f64(0.5) * d3 * z[0] * z[0] * z[1]
                    + R::from_f64(1.0 / 24.0) * d4 * z[0] * z[0] * z[0] * z[0];
            }
        }
    }
}

/// Monomorphize a kernel over the small set of coefficient strides the
/// plans produce, so accumulators live in registers.
macro_rules! dispatch_stride {
    ($stride:expr, $S:ident, $body:block) => {
        match $stride {
            2 => {
                const $S: usize = 2;
                $body
            }
            3 => {
                const $S: usize = 3;
                $body
            }
            4 => {
                const $S: usize = 4;
                $body
            }
            5 => {
                const $S: usize = 5;
                $body
            }
            7 => {
                const $S: usize = 7;
                $body
            }
            9 => {
                const $S: usize = 9;
                $body
            }
            13 => {
                const $S: usize = 13;
                $body
            }
            17 => {
                const $S: usize = 17;
                $body
            }
            other => panic!("unsupported jet stride {other}"),
        }
    };
}

#[inline]
fn affine_forward<R: Real, const S: usize>(
    w: &[R],
    b: &[R],
    a: &[R],
    z: &mut [R],
    n_in: usize,
    n_out: usize,
) {
    for i in 0..n_out {
        let mut acc = [R::zero(); S];
        let wrow = &w[i * n_in..(i + 1) * n_in];
        for (j, &wij) in wrow.iter().enumerate() {
            let aj = &a[j * S..j * S + S];
            for k in 0..S {
                acc[k] += wij * aj[k];
            }
        }
        acc[0] += b[i];
        z[i * S..(i + 1) * S].copy_from_slice(&acc);
    }
}

#[inline]
fn affine_backward<R: Real, const S: usize>(
    w: &[R],
    a: &[R],
    zbar: &[R],
    abar: &mut [R],
    gw: &mut [R],
    gb: &mut [R],
    n_in: usize,
    n_out: usize,
) {
    for c in abar.iter_mut() {
        *c = R::zero();
    }
    for i in 0..n_out {
        let mut zb = [R::zero(); S];
        zb.copy_from_slice(&zbar[i * S..(i + 1) * S]);
        gb[i] += zb[0];
        let wrow = &w[i * n_in..(i + 1) * n_in];
        let grow = &mut gw[i * n_in..(i + 1) * n_in];
        for j in 0..n_in {
            let aj = &a[j * S..j * S + S];
            let mut dot = R::zero();
            for k in 0..S {
                dot += zb[k] * aj[k];
            }
            grow[j] += dot;
            let wij = wrow[j];
            let ab = &mut abar[j * S..j * S + S];
            for k in 0..S {
                ab[k] += wij * zb[k];
            }
        }
    }
}

/// Scratch buffers for jet propagation through one MLP.
pub struct JetMlp<R: Real> {
    widths: Vec<usize>,
    act: Activation,
    stride: usize,
    ord: usize,
    n_dirs: usize,
    /// activations per layer (layer 0 = input), each `width * stride`
    acts: Vec<Vec<R>>,
    /// pre-activations per hidden layer
    zs: Vec<Vec<R>>,
    /// `g' o z` jets per hidden layer (for the backward pass)
    ws: Vec<Vec<R>>,
    /// adjoint buffers per layer
    adj: Vec<Vec<R>>,
}

impl<R: Real> JetMlp<R> {
    pub fn new(mlp: &Mlp, plan: &JetPlan) -> Self {
        let stride = plan.stride();
        let widths = mlp.widths.clone();
        let acts = widths.iter().map(|&w| vec![R::zero(); w * stride]).collect();
        let zs = widths[1..].iter().map(|&w| vec![R::zero(); w * stride]).collect();
        let ws = widths[1..].iter().map(|&w| vec![R::zero(); w * stride]).collect();
        let adj = widths.iter().map(|&w| vec![R::zero(); w * stride]).collect();
        JetMlp {
            widths,
            act: mlp.activation,
            stride,
            ord: plan.ord,
            n_dirs: plan.dirs.len(),
            acts,
            zs,
            ws,
            adj,
        }
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Forward pass; `input` is `d * stride` seeded coordinates. Returns
    /// the output jet (`stride` coefficients).
    pub fn forward<'a>(&'a mut self, params: &[R], input: &[R]) -> &'a [R] {
        dispatch_stride!(self.stride, S, { self.forward_s::<S>(params, input) })
    }

    fn forward_s<'a, const S: usize>(&'a mut self, params: &[R], input: &[R]) -> &'a [R] {
        debug_assert_eq!(self.stride, S);
        let n_layers = self.widths.len() - 1;
        self.acts[0].copy_from_slice(input);
        let mut offset = 0usize;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &params[offset..offset + n_in * n_out];
            let b = &params[offset + n_in * n_out..offset + n_out * (n_in + 1)];
            offset += n_out * (n_in + 1);
            let (before, after) = self.acts.split_at_mut(l + 1);
            let a = &before[l];
            let z = &mut self.zs[l];
            affine_forward::<R, S>(w, b, a, z, n_in, n_out);
            let out = &mut after[0];
            if l + 1 == n_layers {
                out.copy_from_slice(z);
            } else {
                let wt = &mut self.ws[l];
                for i in 0..n_out {
                    let zi = &z[i * S..(i + 1) * S];
                    let yi = &mut out[i * S..(i + 1) * S];
                    let wi = &mut wt[i * S..(i + 1) * S];
                    let d = act_derivs::<R>(self.act, zi[0]);
                    yi[0] = d[0];
                    wi[0] = d[1];
                    for t in 0..self.n_dirs {
                        let lo = 1 + t * self.ord;
                        let hi = lo + self.ord;
                        compose_dir(&d, 0, &zi[lo..hi], &mut yi[lo..hi], self.ord);
                        compose_dir(&d, 1, &zi[lo..hi], &mut wi[lo..hi], self.ord);
                    }
                }
            }
        }
        &self.acts[n_layers]
    }

    /// Backward pass for the most recent [`Self::forward`]. Seeds the
    /// output adjoint and accumulates parameter gradients into `grad`.
    /// Overwrites the stored pre-activations with their adjoints.
    pub fn backward(&mut self, params: &[R], out_adj: &[R], grad: &mut [R]) {
        dispatch_stride!(self.stride, S, { self.backward_s::<S>(params, out_adj, grad) })
    }

    fn backward_s<const S: usize>(&mut self, params: &[R], out_adj: &[R], grad: &mut [R]) {
        let ord = self.ord;
        let n_layers = self.widths.len() - 1;
        self.adj[n_layers].copy_from_slice(out_adj);
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0usize;
        for l in 0..n_layers {
            offsets.push(off);
            off += self.widths[l + 1] * (self.widths[l] + 1);
        }
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let offset = offsets[l];
            let w = &params[offset..offset + n_in * n_out];
            let (gw, gb) = {
                let slice = &mut grad[offset..offset + n_out * (n_in + 1)];
                slice.split_at_mut(n_in * n_out)
            };
            // activation backward: adjoint on the layer output -> adjoint
            // on z, written over self.zs[l]
            if l + 1 == n_layers {
                let src = &self.adj[n_layers];
                self.zs[l].copy_from_slice(src);
            } else {
                let wt = &self.ws[l];
                let ybar = &self.adj[l + 1];
                let z = &mut self.zs[l];
                for i in 0..n_out {
                    let wi = &wt[i * S..(i + 1) * S];
                    let yb = &ybar[i * S..(i + 1) * S];
                    let zb = &mut z[i * S..(i + 1) * S];
                    // shared value slot chains through every direction
                    let mut v = yb[0] * wi[0];
                    for t in 0..self.n_dirs {
                        let lo = 1 + t * ord;
                        for k in 0..ord {
                            v += yb[lo + k] * wi[lo + k];
                        }
                        let mut out = [R::zero(); 4];
                        for i2 in 0..ord {
                            let mut acc = yb[lo + i2] * wi[0];
                            for k in (i2 + 1)..ord {
                                acc += yb[lo + k] * wi[lo + (k - i2 - 1)];
                            }
                            out[i2] = acc;
                        }
                        zb[lo..lo + ord].copy_from_slice(&out[..ord]);
                    }
                    zb[0] = v;
                }
            }
            affine_backward::<R, S>(
                w,
                &self.acts[l],
                &self.zs[l],
                &mut self.adj[l],
                gw,
                gb,
                n_in,
                n_out,
            );
        }
    }
}

/// Jet propagation for the RBF network (1D input).
pub struct JetRbf<R: Real> {
    centers: Vec<f64>,
    stride: usize,
    ord: usize,
    n_dirs: usize,
    /// per neuron: z jet, g jet, g' jet
    zs: Vec<R>,
    gs: Vec<R>,
    ws: Vec<R>,
    input: Vec<R>,
}

impl<R: Real> JetRbf<R> {
    pub fn new(rbf: &RbfNet, plan: &JetPlan) -> Self {
        let stride = plan.stride();
        let n = rbf.centers.len();
        JetRbf {
            centers: rbf.centers.clone(),
            stride,
            ord: plan.ord,
            n_dirs: plan.dirs.len(),
            zs: vec![R::zero(); n * stride],
            gs: vec![R::zero(); n * stride],
            ws: vec![R::zero(); n * stride],
            input: vec![R::zero(); stride],
        }
    }

    pub fn forward(&mut self, params: &[R], input: &[R], out: &mut [R]) {
        let stride = self.stride;
        let n = self.centers.len();
        self.input.copy_from_slice(input);
        for c in out.iter_mut() {
            *c = R::zero();
        }
        for i in 0..n {
            let gamma = params[i];
            let weight = params[n + i];
            let zi = &mut self.zs[i * stride..(i + 1) * stride];
            zi[0] = gamma * (input[0] - R::from_f64(self.centers[i]));
            for k in 1..stride {
                zi[k] = gamma * input[k];
            }
            let d = act_derivs::<R>(Activation::Gaussian, zi[0]);
            let gi = &mut self.gs[i * stride..(i + 1) * stride];
            let wi = &mut self.ws[i * stride..(i + 1) * stride];
            gi[0] = d[0];
            wi[0] = d[1];
            for t in 0..self.n_dirs {
                let lo = 1 + t * self.ord;
                let hi = lo + self.ord;
                compose_dir(&d, 0, &zi[lo..hi], &mut gi[lo..hi], self.ord);
                compose_dir(&d, 1, &zi[lo..hi], &mut wi[lo..hi], self.ord);
            }
            for k in 0..stride {
                out[k] += weight * gi[k];
            }
        }
    }

    pub fn backward(&mut self, params: &[R], out_adj: &[R], grad: &mut [R]) {
        let stride = self.stride;
        let n = self.centers.len();
        for i in 0..n {
            let gamma = params[i];
            let weight = params[n + i];
            let zi = &self.zs[i * stride..(i + 1) * stride];
            let gi = &self.gs[i * stride..(i + 1) * stride];
            let wi = &self.ws[i * stride..(i + 1) * stride];
            // d out / d weight = g jet
            let mut dot = R::zero();
            for (o, g) in out_adj.iter().zip(gi) {
                dot += *o * *g;
            }
            grad[n + i] += dot;
            // g-bar = weight * out_adj, then activation backward to z-bar
            let mut zb = vec![R::zero(); stride];
            let mut v = out_adj[0] * weight * wi[0];
            for t in 0..self.n_dirs {
                let lo = 1 + t * self.ord;
                for k in 0..self.ord {
                    v += out_adj[lo + k] * weight * wi[lo + k];
                }
                for i2 in 0..self.ord {
                    let mut acc = out_adj[lo + i2] * weight * wi[0];
                    for k in (i2 + 1)..self.ord {
                        acc += out_adj[lo + k] * weight * wi[lo + (k - i2 - 1)];
                    }
                    zb[lo + i2] = acc;
                }
            }
            zb[0] = v;
            // z = gamma * (x - c): dz/dgamma has the input jet shape
            let mut dg = zb[0] * (self.input[0] - R::from_f64(self.centers[i]));
            for k in 1..stride {
                dg += zb[k] * self.input[k];
            }
            grad[i] += dg;
            let _ = (zi, gamma);
        }
    }
}

/// Jet propagation over either network kind.
pub enum JetNet<R: Real> {
    Mlp(JetMlp<R>),
    Rbf(JetRbf<R>, Vec<R>),
}

impl<R: Real> JetNet<R> {
    pub fn new(net: &Network, plan: &JetPlan) -> Self {
        match net {
            Network::Mlp(m) => JetNet::Mlp(JetMlp::new(m, plan)),
            Network::Rbf(r) => {
                let stride = plan.stride();
                JetNet::Rbf(JetRbf::new(r, plan), vec![R::zero(); stride])
            }
        }
    }

    pub fn forward(&mut self, params: &[R], input: &[R]) -> &[R] {
        match self {
            JetNet::Mlp(m) => m.forward(params, input),
            JetNet::Rbf(r, out) => {
                r.forward(params, input, out);
                out
            }
        }
    }

    pub fn backward(&mut self, params: &[R], out_adj: &[R], grad: &mut [R]) {
        match self {
            JetNet::Mlp(m) => m.backward(params, out_adj, grad),
            JetNet::Rbf(r, _) => r.backward(params, out_adj, grad),
        }
    }
}
