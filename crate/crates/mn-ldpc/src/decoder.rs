//! Belief-propagation decoding over GF(q).
//!
//! Message containers, check-node (horizontal) and variable-node
//! (vertical) updates, pseudo-posteriors, dynamic Markov prior
//! re-estimation, and the two schedules:
//!
//! * [`decode_pus`] - flooding: one full horizontal pass over every check
//!   using only the previous iteration's variable messages, then one full
//!   vertical pass.
//! * [`decode_sus`] - per-column sweep: for each variable in turn, refresh
//!   exactly the check messages entering that column (a partial horizontal
//!   pass over the freshest available data), then update the column's
//!   variable messages and pseudo-posterior before moving on.
//!
//! Check messages are computed by direct XOR convolution over the additive
//! group of GF(2^m), with each incoming message first pushed through its
//! edge coefficient; forward/backward partial convolutions serve all edges
//! of a degree-d check in O(d q^2). A Walsh-Hadamard transform-domain
//! variant is provided for cross-checking and benchmarking; the schedules
//! always use the direct form.

use crate::channel::{noise_symbol_prior, ChannelOutput};
use crate::code::SparseCode;
use crate::gf::GfTables;
use crate::source::MarkovModel;
use crate::{Error, Result};

/// Nonzero probabilities below this are clamped before normalization so a
/// long product cannot underflow to an exact zero; exact zeros themselves
/// are legal message values (embedded sources rely on them).
const PROB_FLOOR: f64 = 1e-300;

/// Per-edge and per-variable message storage for one decode.
///
/// Vectors are length-q slices packed flat: edge e occupies
/// `[e*q, (e+1)*q)` of `q_msg`/`r_msg`, variable j the same range of
/// `prior`/`posterior`. The edge set mirrors the nonzero pattern of H.
/// Normalization constants are applied in place and never stored.
#[derive(Debug, Clone)]
pub struct MessageSet {
    q: usize,
    num_vars: usize,
    q_msg: Vec<f64>,
    r_msg: Vec<f64>,
    prior: Vec<f64>,
    posterior: Vec<f64>,
}

impl MessageSet {
    /// Builds a message set with explicit per-variable priors (normalized
    /// here). Variable messages start equal to their variable's prior on
    /// every edge; check messages are left for the first horizontal pass.
    pub fn with_priors(code: &SparseCode, priors: Vec<Vec<f64>>) -> MessageSet {
        let q = code.q();
        let num_vars = code.n() + code.m_len();
        assert_eq!(priors.len(), num_vars);
        let mut prior = Vec::with_capacity(num_vars * q);
        for p in &priors {
            assert_eq!(p.len(), q);
            let sum: f64 = p.iter().sum();
            assert!(sum > 0.0, "prior must have positive mass");
            prior.extend(p.iter().map(|&x| x / sum));
        }
        let posterior = prior.clone();
        let num_edges = code.graph().num_edges();
        let mut q_msg = vec![0.0; num_edges * q];
        for j in 0..num_vars {
            for e in code.graph().var(j) {
                q_msg[e.id * q..(e.id + 1) * q].copy_from_slice(&prior[j * q..(j + 1) * q]);
            }
        }
        MessageSet {
            q,
            num_vars,
            q_msg,
            r_msg: vec![0.0; num_edges * q],
            prior,
            posterior,
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Pseudo-posterior Q_j over GF(q).
    pub fn posterior(&self, j: usize) -> &[f64] {
        &self.posterior[j * self.q..(j + 1) * self.q]
    }

    /// Current prior p_j over GF(q).
    pub fn prior(&self, j: usize) -> &[f64] {
        &self.prior[j * self.q..(j + 1) * self.q]
    }

    pub(crate) fn q_slice(&self, e: usize) -> &[f64] {
        &self.q_msg[e * self.q..(e + 1) * self.q]
    }

    pub(crate) fn r_slice(&self, e: usize) -> &[f64] {
        &self.r_msg[e * self.q..(e + 1) * self.q]
    }

    /// Clips every variable to its posterior argmax; ties go to the
    /// smallest symbol value.
    pub fn clip(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.num_vars];
        self.clip_into(&mut out);
        out
    }

    fn clip_into(&self, out: &mut [u8]) {
        for (j, slot) in out.iter_mut().enumerate() {
            let post = self.posterior(j);
            let mut best = 0usize;
            for (a, &p) in post.iter().enumerate() {
                if p > post[best] {
                    best = a;
                }
            }
            *slot = best as u8;
        }
    }
}

/// Initializes messages for a received block: source variables take the
/// model's stationary distribution as prior (uniform 1/q for i.i.d.),
/// noise variables the channel's noise-symbol likelihoods.
pub fn init_messages(
    code: &SparseCode,
    output: &ChannelOutput,
    source: &MarkovModel,
) -> MessageSet {
    let q = code.q();
    let m_bits = code.tables().m() as usize;
    assert_eq!(output.bit_flip_prob.len(), code.m_len() * m_bits);
    let source_prior = source.stationary_padded(q);
    let mut priors = Vec::with_capacity(code.n() + code.m_len());
    for _ in 0..code.n() {
        priors.push(source_prior.clone());
    }
    for j in 0..code.m_len() {
        priors.push(noise_symbol_prior(output, j, q));
    }
    MessageSet::with_priors(code, priors)
}

/// Outcome of one decode attempt.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    /// True iff the clipped estimate satisfied every check equation within
    /// the iteration budget.
    pub converged: bool,
    /// Iterations executed; the converging iteration counts.
    pub iterations: usize,
    /// Clipped estimate of [s; n], length N + M.
    pub x_hat: Vec<u8>,
    /// Fraction of correct source bits after each executed iteration,
    /// measured against the true source block.
    pub correct_source_fraction: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Schedule {
    Pus,
    Sus,
}

/// Decodes with the parallel (flooding) schedule. `truth` is the true
/// source block, used only for the per-iteration correctness trace.
pub fn decode_pus(
    code: &SparseCode,
    z: &[u8],
    msgs: &mut MessageSet,
    source: &MarkovModel,
    max_iters: usize,
    truth: &[u8],
) -> DecodeResult {
    run_decode(code, z, msgs, source, max_iters, truth, Schedule::Pus, None)
}

/// Decodes with the sequential per-column schedule, sweeping columns in
/// natural index order (source symbols first, then noise symbols).
pub fn decode_sus(
    code: &SparseCode,
    z: &[u8],
    msgs: &mut MessageSet,
    source: &MarkovModel,
    max_iters: usize,
    truth: &[u8],
) -> DecodeResult {
    run_decode(code, z, msgs, source, max_iters, truth, Schedule::Sus, None)
}

/// Sequential decode with an explicit column visiting order, for sweep
/// order sensitivity checks. `order` must be a permutation of the
/// variable indices.
pub fn decode_sus_ordered(
    code: &SparseCode,
    z: &[u8],
    msgs: &mut MessageSet,
    source: &MarkovModel,
    max_iters: usize,
    truth: &[u8],
    order: &[usize],
) -> DecodeResult {
    assert_eq!(order.len(), code.n() + code.m_len());
    run_decode(
        code,
        z,
        msgs,
        source,
        max_iters,
        truth,
        Schedule::Sus,
        Some(order),
    )
}

#[allow(clippy::too_many_arguments)]
fn run_decode(
    code: &SparseCode,
    z: &[u8],
    msgs: &mut MessageSet,
    source: &MarkovModel,
    max_iters: usize,
    truth: &[u8],
    schedule: Schedule,
    order: Option<&[usize]>,
) -> DecodeResult {
    assert_eq!(z.len(), code.m_len());
    assert_eq!(truth.len(), code.n());
    let n = code.n();
    let m_bits = code.tables().m();
    let dynamic_priors = !source.is_uniform();
    let mut st = DecodeState::new(code, z, msgs);
    let mut x_hat = st.msgs.clip();
    let mut trace = Vec::new();
    for iter in 1..=max_iters {
        let step = match schedule {
            Schedule::Pus => st.pus_iteration(),
            Schedule::Sus => st.sus_iteration(order),
        };
        if step.is_err() {
            // contradictory messages: the trial counts as non-convergent
            st.msgs.clip_into(&mut x_hat);
            return DecodeResult {
                converged: false,
                iterations: iter - 1,
                x_hat,
                correct_source_fraction: trace,
            };
        }
        st.msgs.clip_into(&mut x_hat);
        trace.push(source_bit_fraction(&x_hat[..n], truth, m_bits));
        if code.check_solution(&x_hat, z) {
            return DecodeResult {
                converged: true,
                iterations: iter,
                x_hat,
                correct_source_fraction: trace,
            };
        }
        if dynamic_priors {
            update_markov_priors(st.code, st.msgs, source);
        }
    }
    DecodeResult {
        converged: false,
        iterations: max_iters,
        x_hat,
        correct_source_fraction: trace,
    }
}

fn source_bit_fraction(x_src: &[u8], truth: &[u8], m_bits: u32) -> f64 {
    let mut correct = 0u32;
    for (&x, &t) in x_src.iter().zip(truth) {
        correct += m_bits - (x ^ t).count_ones();
    }
    correct as f64 / (x_src.len() as f64 * m_bits as f64)
}

/// Runs plain BP iterations with fixed priors until posteriors stop moving
/// (L-inf change below `tol`) or `max_iters` is hit. No clipping, no
/// convergence test, no prior re-estimation: this is the raw fixed point
/// the tree-exactness oracle compares against. Returns whether the fixed
/// point was reached.
pub(crate) fn iterate_to_fixed_point(
    code: &SparseCode,
    z: &[u8],
    msgs: &mut MessageSet,
    sequential: bool,
    max_iters: usize,
    tol: f64,
) -> Result<bool> {
    let mut st = DecodeState::new(code, z, msgs);
    let mut prev = st.msgs.posterior.clone();
    for _ in 0..max_iters {
        let step = if sequential {
            st.sus_iteration(None)
        } else {
            st.pus_iteration()
        };
        step.map_err(|variable| Error::ContradictoryMessages { variable })?;
        let delta = st
            .msgs
            .posterior
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if delta < tol {
            return Ok(true);
        }
        prev.copy_from_slice(&st.msgs.posterior);
    }
    Ok(false)
}

/// Scratch-carrying decode driver shared by both schedules.
struct DecodeState<'a> {
    code: &'a SparseCode,
    z: &'a [u8],
    msgs: &'a mut MessageSet,
    /// Permuted incoming messages of one check, max_check_degree * q.
    perm: Vec<f64>,
    /// Forward partial convolutions, (max_check_degree + 1) * q.
    fwd: Vec<f64>,
    /// Backward partial convolutions, (max_check_degree + 1) * q.
    bwd: Vec<f64>,
    /// Variable-side forward partial products, (max_var_degree + 1) * q.
    col_fwd: Vec<f64>,
    /// Variable-side backward partial products, (max_var_degree + 1) * q.
    col_bwd: Vec<f64>,
    tmp: Vec<f64>,
    tmp2: Vec<f64>,
}

impl<'a> DecodeState<'a> {
    fn new(code: &'a SparseCode, z: &'a [u8], msgs: &'a mut MessageSet) -> DecodeState<'a> {
        let q = code.q();
        let dc = code.graph().max_check_degree();
        let dv = code.graph().max_var_degree();
        DecodeState {
            code,
            z,
            msgs,
            perm: vec![0.0; dc * q],
            fwd: vec![0.0; (dc + 1) * q],
            bwd: vec![0.0; (dc + 1) * q],
            col_fwd: vec![0.0; (dv + 1) * q],
            col_bwd: vec![0.0; (dv + 1) * q],
            tmp: vec![0.0; q],
            tmp2: vec![0.0; q],
        }
    }

    /// One flooding iteration: every r from the previous iteration's q
    /// values, row by row, then every column's q messages and posterior.
    fn pus_iteration(&mut self) -> std::result::Result<(), usize> {
        for i in 0..self.code.m_len() {
            self.check_update_all_edges(i);
        }
        for j in 0..self.msgs.num_vars {
            self.column_update(j)?;
        }
        Ok(())
    }

    /// One sequential iteration: per column, a partial horizontal pass
    /// over exactly the column's incident checks (using the freshest q
    /// values), then the column's vertical pass and posterior.
    fn sus_iteration(&mut self, order: Option<&[usize]>) -> std::result::Result<(), usize> {
        match order {
            None => {
                for j in 0..self.msgs.num_vars {
                    self.refresh_column_r(j);
                    self.column_update(j)?;
                }
            }
            Some(order) => {
                for &j in order {
                    self.refresh_column_r(j);
                    self.column_update(j)?;
                }
            }
        }
        Ok(())
    }

    /// Horizontal update of every edge of check `i` at once via
    /// forward/backward partial convolutions.
    fn check_update_all_edges(&mut self, i: usize) {
        let q = self.msgs.q;
        let tables = self.code.tables();
        let edges = self.code.graph().check(i);
        let d = edges.len();
        let z_i = self.z[i];
        for (k, e) in edges.iter().enumerate() {
            let src = &self.msgs.q_msg[e.id * q..(e.id + 1) * q];
            let dst = &mut self.perm[k * q..(k + 1) * q];
            for (x, &p) in src.iter().enumerate() {
                dst[tables.mul(e.coeff, x as u8) as usize] = p;
            }
        }
        // fwd[k] = conv(perm[0..k]), starting from a point mass at 0
        self.fwd[..q].fill(0.0);
        self.fwd[0] = 1.0;
        for k in 1..=d {
            let (head, tail) = self.fwd.split_at_mut(k * q);
            conv_xor(
                &head[(k - 1) * q..k * q],
                &self.perm[(k - 1) * q..k * q],
                &mut tail[..q],
            );
        }
        // bwd[k] = conv(perm[k..d])
        self.bwd[d * q..(d + 1) * q].fill(0.0);
        self.bwd[d * q] = 1.0;
        for k in (0..d).rev() {
            let (head, tail) = self.bwd.split_at_mut((k + 1) * q);
            conv_xor(
                &self.perm[k * q..(k + 1) * q],
                &tail[..q],
                &mut head[k * q..(k + 1) * q],
            );
        }
        // r for edge k: the convolution of everyone else, read out at
        // z_i - h_k a (subtraction is XOR)
        for (k, e) in edges.iter().enumerate() {
            conv_xor(
                &self.fwd[k * q..(k + 1) * q],
                &self.bwd[(k + 1) * q..(k + 2) * q],
                &mut self.tmp,
            );
            let dst = &mut self.msgs.r_msg[e.id * q..(e.id + 1) * q];
            for (a, slot) in dst.iter_mut().enumerate() {
                *slot = self.tmp[(z_i ^ tables.mul(e.coeff, a as u8)) as usize];
            }
        }
    }

    /// Partial horizontal pass for SUS: recompute r on each edge entering
    /// column `j`, by direct convolution over the other edges of the
    /// corresponding check.
    fn refresh_column_r(&mut self, j: usize) {
        let q = self.msgs.q;
        let tables = self.code.tables();
        let graph = self.code.graph();
        for e in graph.var(j) {
            let z_i = self.z[e.other];
            self.tmp.fill(0.0);
            self.tmp[0] = 1.0;
            for e2 in graph.check(e.other) {
                if e2.id == e.id {
                    continue;
                }
                let src = &self.msgs.q_msg[e2.id * q..(e2.id + 1) * q];
                let perm = &mut self.perm[..q];
                perm.fill(0.0);
                for (x, &p) in src.iter().enumerate() {
                    perm[tables.mul(e2.coeff, x as u8) as usize] = p;
                }
                conv_xor(&self.tmp, &self.perm[..q], &mut self.tmp2);
                std::mem::swap(&mut self.tmp, &mut self.tmp2);
            }
            let dst = &mut self.msgs.r_msg[e.id * q..(e.id + 1) * q];
            for (a, slot) in dst.iter_mut().enumerate() {
                *slot = self.tmp[(z_i ^ tables.mul(e.coeff, a as u8)) as usize];
            }
        }
    }

    /// Vertical pass over one column: q messages for every incident edge
    /// plus the pseudo-posterior, via forward/backward partial products of
    /// the incoming r messages around the prior. Errors with the variable
    /// index when every symbol's probability vanishes.
    fn column_update(&mut self, j: usize) -> std::result::Result<(), usize> {
        let q = self.msgs.q;
        let edges = self.code.graph().var(j);
        let d = edges.len();
        self.col_fwd[..q].copy_from_slice(&self.msgs.prior[j * q..(j + 1) * q]);
        for k in 1..=d {
            let r = &self.msgs.r_msg[edges[k - 1].id * q..edges[k - 1].id * q + q];
            let (head, tail) = self.col_fwd.split_at_mut(k * q);
            for a in 0..q {
                tail[a] = head[(k - 1) * q + a] * r[a];
            }
        }
        self.col_bwd[d * q..(d + 1) * q].fill(1.0);
        for k in (0..d).rev() {
            let r = &self.msgs.r_msg[edges[k].id * q..edges[k].id * q + q];
            let (head, tail) = self.col_bwd.split_at_mut((k + 1) * q);
            for a in 0..q {
                head[k * q + a] = r[a] * tail[a];
            }
        }
        for (k, e) in edges.iter().enumerate() {
            let dst = &mut self.msgs.q_msg[e.id * q..(e.id + 1) * q];
            for a in 0..q {
                dst[a] = self.col_fwd[k * q + a] * self.col_bwd[(k + 1) * q + a];
            }
            normalize(dst).map_err(|()| j)?;
        }
        let post = &mut self.msgs.posterior[j * q..(j + 1) * q];
        post.copy_from_slice(&self.col_fwd[d * q..(d + 1) * q]);
        normalize(post).map_err(|()| j)?;
        Ok(())
    }
}

/// Re-estimates the priors of the source symbols from their neighbors'
/// pseudo-posteriors through the Markov transition matrix:
/// `P_i^b ∝ (sum_a Q_{i-1}^a T[a][b]) (sum_c T[b][c] Q_{i+1}^c)`,
/// one-sided at the block boundaries. All new priors are computed from the
/// posteriors as they stand on entry (which never change here), i.e. from
/// a pre-update snapshot.
pub fn update_markov_priors(code: &SparseCode, msgs: &mut MessageSet, source: &MarkovModel) {
    let q = msgs.q;
    let n = code.n();
    let states = source.alphabet();
    assert!(states <= q, "source alphabet exceeds field size");
    let mut tmp = vec![0.0; states];
    for i in 0..n {
        let has_left = i > 0;
        let has_right = i + 1 < n;
        if !has_left && !has_right {
            continue;
        }
        for (b, slot) in tmp.iter_mut().enumerate() {
            let lf = if has_left {
                let ql = &msgs.posterior[(i - 1) * q..i * q];
                (0..states).map(|a| ql[a] * source.transition(a, b)).sum()
            } else {
                1.0
            };
            let rf = if has_right {
                let qr = &msgs.posterior[(i + 1) * q..(i + 2) * q];
                (0..states).map(|c| source.transition(b, c) * qr[c]).sum()
            } else {
                1.0
            };
            *slot = lf * rf;
        }
        // a vanishing product would leave nothing to normalize; keep the
        // previous prior in that (pathological) case
        if normalize(&mut tmp).is_ok() {
            let dst = &mut msgs.prior[i * q..(i + 1) * q];
            dst[..states].copy_from_slice(&tmp);
            dst[states..].fill(0.0);
        }
    }
}

/// Check-to-variable message r_ij by direct convolution: the probability,
/// for each a, that the other variables of check i sum to z_i - h_ij a
/// under the product of their incoming messages. Panics unless H[i][j] is
/// nonzero.
pub fn check_node_update(
    code: &SparseCode,
    msgs: &MessageSet,
    i: usize,
    j: usize,
    z_i: u8,
) -> Vec<f64> {
    let edges = code.graph().check(i);
    let me = edges
        .iter()
        .find(|e| e.other == j)
        .expect("check_node_update requires H[i][j] != 0");
    let incoming: Vec<(u8, &[f64])> = edges
        .iter()
        .filter(|e| e.id != me.id)
        .map(|e| (e.coeff, msgs.q_slice(e.id)))
        .collect();
    check_message_direct(code.tables(), &incoming, me.coeff, z_i)
}

/// Transform-domain variant of [`check_node_update`]: Walsh-Hadamard
/// transforms turn the XOR convolution into a pointwise product.
pub fn check_node_update_wht(
    code: &SparseCode,
    msgs: &MessageSet,
    i: usize,
    j: usize,
    z_i: u8,
) -> Vec<f64> {
    let edges = code.graph().check(i);
    let me = edges
        .iter()
        .find(|e| e.other == j)
        .expect("check_node_update_wht requires H[i][j] != 0");
    let incoming: Vec<(u8, &[f64])> = edges
        .iter()
        .filter(|e| e.id != me.id)
        .map(|e| (e.coeff, msgs.q_slice(e.id)))
        .collect();
    check_message_wht(code.tables(), &incoming, me.coeff, z_i)
}

/// Variable-to-check message q_ij: the prior times all incoming r except
/// the one from check i, normalized.
pub fn variable_node_update(
    code: &SparseCode,
    msgs: &MessageSet,
    i: usize,
    j: usize,
) -> Result<Vec<f64>> {
    let q = msgs.q;
    let mut out = msgs.prior(j).to_vec();
    for e in code.graph().var(j) {
        if e.other == i {
            continue;
        }
        let r = msgs.r_slice(e.id);
        for a in 0..q {
            out[a] *= r[a];
        }
    }
    normalize(&mut out).map_err(|()| Error::ContradictoryMessages { variable: j })?;
    Ok(out)
}

/// Pseudo-posterior Q_j: the prior times every incoming r, normalized.
pub fn compute_posterior(code: &SparseCode, msgs: &MessageSet, j: usize) -> Result<Vec<f64>> {
    let q = msgs.q;
    let mut out = msgs.prior(j).to_vec();
    for e in code.graph().var(j) {
        let r = msgs.r_slice(e.id);
        for a in 0..q {
            out[a] *= r[a];
        }
    }
    normalize(&mut out).map_err(|()| Error::ContradictoryMessages { variable: j })?;
    Ok(out)
}

/// XOR convolution over GF(2^m) representations:
/// `out[c] = sum_x a[x] b[x ^ c]`.
pub(crate) fn conv_xor(a: &[f64], b: &[f64], out: &mut [f64]) {
    let q = out.len();
    debug_assert!(a.len() == q && b.len() == q);
    out.fill(0.0);
    for (x, &ax) in a.iter().enumerate() {
        if ax == 0.0 {
            continue;
        }
        for (c, slot) in out.iter_mut().enumerate() {
            *slot += ax * b[x ^ c];
        }
    }
}

/// In-place unnormalized Walsh-Hadamard transform; applying it twice
/// multiplies by the length. The length must be a power of two.
pub(crate) fn wht_in_place(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        let mut i = 0;
        while i < n {
            for j in i..i + h {
                let x = v[j];
                let y = v[j + h];
                v[j] = x + y;
                v[j + h] = x - y;
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// Direct-convolution check message kernel over raw slices. `incoming`
/// holds (coefficient, q-message) for every edge of the check except the
/// excluded one; `h_excl` is the excluded edge's coefficient.
pub(crate) fn check_message_direct(
    tables: &GfTables,
    incoming: &[(u8, &[f64])],
    h_excl: u8,
    z_i: u8,
) -> Vec<f64> {
    let q = tables.q();
    let mut w = vec![0.0; q];
    w[0] = 1.0;
    let mut perm = vec![0.0; q];
    let mut out = vec![0.0; q];
    for &(h, msg) in incoming {
        perm.fill(0.0);
        for (x, &p) in msg.iter().enumerate() {
            perm[tables.mul(h, x as u8) as usize] = p;
        }
        conv_xor(&w, &perm, &mut out);
        std::mem::swap(&mut w, &mut out);
    }
    (0..q)
        .map(|a| w[(z_i ^ tables.mul(h_excl, a as u8)) as usize])
        .collect()
}

/// Walsh-Hadamard check message kernel: transform each permuted incoming
/// message, multiply pointwise, transform back.
pub(crate) fn check_message_wht(
    tables: &GfTables,
    incoming: &[(u8, &[f64])],
    h_excl: u8,
    z_i: u8,
) -> Vec<f64> {
    let q = tables.q();
    let mut acc = vec![1.0; q];
    let mut perm = vec![0.0; q];
    for &(h, msg) in incoming {
        perm.fill(0.0);
        for (x, &p) in msg.iter().enumerate() {
            perm[tables.mul(h, x as u8) as usize] = p;
        }
        wht_in_place(&mut perm);
        for (a, &p) in acc.iter_mut().zip(perm.iter()) {
            *a *= p;
        }
    }
    wht_in_place(&mut acc);
    let scale = 1.0 / q as f64;
    (0..q)
        .map(|a| acc[(z_i ^ tables.mul(h_excl, a as u8)) as usize] * scale)
        .collect()
}

/// Normalizes a probability vector in place; nonzero entries are floored
/// at [`PROB_FLOOR`] first. An all-zero vector is an error.
fn normalize(v: &mut [f64]) -> std::result::Result<(), ()> {
    let mut sum = 0.0;
    for x in v.iter_mut() {
        if *x > 0.0 && *x < PROB_FLOOR {
            *x = PROB_FLOOR;
        }
        sum += *x;
    }
    if sum == 0.0 {
        return Err(());
    }
    let inv = 1.0 / sum;
    for x in v.iter_mut() {
        *x *= inv;
    }
    Ok(())
}
