//! Built-in verification suites.
//!
//! Each suite checks a fast implementation path against an independent
//! reference computation: table-driven field arithmetic against schoolbook
//! polynomial reduction, convolution check messages against configuration
//! enumeration, and BP posteriors on cycle-free codes against brute-force
//! marginalization over every configuration. The suites run from the CLI
//! (`mn-ldpc selftest`) and from the acceptance tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::code::SparseCode;
use crate::decoder::{
    check_message_direct, check_message_wht, iterate_to_fixed_point, MessageSet,
};
use crate::gf::GfTables;
use crate::sparse::SparseMatrix;

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SelftestReport {
    fn from_result(name: &'static str, result: Result<String, String>) -> SelftestReport {
        match result {
            Ok(detail) => SelftestReport {
                name,
                passed: true,
                detail,
            },
            Err(detail) => SelftestReport {
                name,
                passed: false,
                detail,
            },
        }
    }
}

/// Runs every suite with default sizes.
pub fn run_all() -> Vec<SelftestReport> {
    vec![
        field_axioms(),
        check_node_enumeration(0xC0FFEE, 100),
        tree_posterior_exactness(0xBEEF, 20),
    ]
}

/// Schoolbook GF(2^m) multiplication: polynomial product reduced by the
/// primitive polynomial, independent of the exp/log tables.
fn poly_mul_mod(x: u8, y: u8, poly: u16, m: u32) -> u8 {
    let mut acc: u16 = 0;
    for k in 0..m {
        if (y >> k) & 1 == 1 {
            acc ^= (x as u16) << k;
        }
    }
    for k in (m..2 * m).rev() {
        if acc & (1 << k) != 0 {
            acc ^= poly << (k - m);
        }
    }
    acc as u8
}

/// Exhaustive field-axiom check for q in {2, 4, 8}: closure, commutativity,
/// associativity, distributivity over all triples, inverses, and agreement
/// of table multiplication with polynomial reduction.
pub fn field_axioms() -> SelftestReport {
    SelftestReport::from_result("field axioms (q = 2, 4, 8)", field_axioms_inner())
}

fn field_axioms_inner() -> Result<String, String> {
    let mut triples = 0usize;
    for q in [2usize, 4, 8] {
        let t = GfTables::new(q).map_err(|e| e.to_string())?;
        let syms: Vec<u8> = (0..q as u8).collect();
        for &x in &syms {
            for &y in &syms {
                if t.mul(x, y) != poly_mul_mod(x, y, t.prim_poly(), t.m()) {
                    return Err(format!("q={q}: table mul {x}*{y} disagrees with polynomial oracle"));
                }
                if t.add(x, y) != x ^ y {
                    return Err(format!("q={q}: addition is not XOR at ({x}, {y})"));
                }
                for &z in &syms {
                    triples += 1;
                    if t.add(t.add(x, y), z) != t.add(x, t.add(y, z)) {
                        return Err(format!("q={q}: add not associative at ({x},{y},{z})"));
                    }
                    if t.mul(t.mul(x, y), z) != t.mul(x, t.mul(y, z)) {
                        return Err(format!("q={q}: mul not associative at ({x},{y},{z})"));
                    }
                    if t.mul(x, t.add(y, z)) != t.add(t.mul(x, y), t.mul(x, z)) {
                        return Err(format!("q={q}: not distributive at ({x},{y},{z})"));
                    }
                }
                if t.mul(x, y) != t.mul(y, x) {
                    return Err(format!("q={q}: mul not commutative at ({x},{y})"));
                }
            }
            if x != 0 {
                let inv = t.inv(x).map_err(|e| e.to_string())?;
                if t.mul(x, inv) != 1 {
                    return Err(format!("q={q}: inv({x}) wrong"));
                }
            }
        }
    }
    Ok(format!("{triples} triples checked"))
}

/// Compares the direct-convolution check message (and its Walsh-Hadamard
/// variant) against exhaustive enumeration of every satisfying
/// configuration, on random instances of degree <= 4 over q in {2, 4, 8}.
pub fn check_node_enumeration(seed: u64, instances: usize) -> SelftestReport {
    SelftestReport::from_result(
        "check-node enumeration oracle",
        check_node_enumeration_inner(seed, instances),
    )
}

fn check_node_enumeration_inner(seed: u64, instances: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_direct = 0.0f64;
    let mut max_wht = 0.0f64;
    for inst in 0..instances {
        let q = [2usize, 4, 8][rng.random_range(0..3)];
        let tables = GfTables::new(q).map_err(|e| e.to_string())?;
        let degree = rng.random_range(1..=4usize);
        let coeffs: Vec<u8> = (0..degree).map(|_| rng.random_range(1..q) as u8).collect();
        let z: u8 = rng.random_range(0..q) as u8;
        let msgs: Vec<Vec<f64>> = (0..degree - 1)
            .map(|_| {
                let mut v: Vec<f64> = (0..q).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = v.iter().sum();
                v.iter_mut().for_each(|x| *x /= s);
                v
            })
            .collect();
        let h_excl = coeffs[degree - 1];
        let incoming: Vec<(u8, &[f64])> = coeffs[..degree - 1]
            .iter()
            .zip(&msgs)
            .map(|(&h, m)| (h, m.as_slice()))
            .collect();

        // enumeration of every configuration of the non-excluded variables
        let mut oracle = vec![0.0f64; q];
        let others = degree - 1;
        let mut config = vec![0u8; others];
        loop {
            let mut partial = 0u8;
            let mut weight = 1.0f64;
            for (k, &x) in config.iter().enumerate() {
                partial ^= tables.mul(coeffs[k], x);
                weight *= msgs[k][x as usize];
            }
            let a = tables
                .mul(tables.inv(h_excl).map_err(|e| e.to_string())?, z ^ partial);
            oracle[a as usize] += weight;
            // mixed-radix increment
            let mut pos = 0;
            loop {
                if pos == others {
                    break;
                }
                config[pos] += 1;
                if (config[pos] as usize) < q {
                    break;
                }
                config[pos] = 0;
                pos += 1;
            }
            if pos == others {
                break;
            }
        }

        let direct = check_message_direct(&tables, &incoming, h_excl, z);
        let wht = check_message_wht(&tables, &incoming, h_excl, z);
        for a in 0..q {
            let dd = (direct[a] - oracle[a]).abs();
            let dw = (wht[a] - oracle[a]).abs();
            max_direct = max_direct.max(dd);
            max_wht = max_wht.max(dw);
            if dd > 1e-12 {
                return Err(format!(
                    "instance {inst}: direct kernel off by {dd:.3e} (q={q}, degree {degree})"
                ));
            }
            if dw > 1e-10 {
                return Err(format!(
                    "instance {inst}: WHT kernel off by {dw:.3e} (q={q}, degree {degree})"
                ));
            }
        }
    }
    Ok(format!(
        "{instances} instances; max |direct - enum| = {max_direct:.2e}, max |wht - enum| = {max_wht:.2e}"
    ))
}

/// On random cycle-free codes, both schedules' converged posteriors must
/// match brute-force marginals (enumeration of all q^V configurations
/// weighted by the priors and constrained to H x = z) to 1e-9.
pub fn tree_posterior_exactness(seed: u64, num_codes: usize) -> SelftestReport {
    SelftestReport::from_result(
        "tree posterior exactness",
        tree_posterior_exactness_inner(seed, num_codes),
    )
}

fn tree_posterior_exactness_inner(seed: u64, num_codes: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err = 0.0f64;
    for idx in 0..num_codes {
        // alternate fields; q = 4 keeps the enumeration small
        let q = if idx % 5 < 3 { 2usize } else { 4 };
        let max_vars = if q == 2 { 12 } else { 9 };
        let (code, priors, z) = random_tree_instance(q, max_vars, &mut rng)?;
        let v = code.n() + code.m_len();

        // brute force marginals
        let mut marg = vec![vec![0.0f64; q]; v];
        let mut config = vec![0u8; v];
        loop {
            if code.check_solution(&config, &z) {
                let mut weight = 1.0f64;
                for (j, &x) in config.iter().enumerate() {
                    weight *= priors[j][x as usize];
                }
                for (j, &x) in config.iter().enumerate() {
                    marg[j][x as usize] += weight;
                }
            }
            let mut pos = 0;
            loop {
                if pos == v {
                    break;
                }
                config[pos] += 1;
                if (config[pos] as usize) < q {
                    break;
                }
                config[pos] = 0;
                pos += 1;
            }
            if pos == v {
                break;
            }
        }
        for m in marg.iter_mut() {
            let s: f64 = m.iter().sum();
            if s <= 0.0 {
                return Err(format!("code {idx}: no configuration satisfies the syndrome"));
            }
            m.iter_mut().for_each(|x| *x /= s);
        }

        for sequential in [false, true] {
            let mut msgs = MessageSet::with_priors(&code, priors.clone());
            let reached = iterate_to_fixed_point(&code, &z, &mut msgs, sequential, 200, 1e-13)
                .map_err(|e| format!("code {idx}: {e}"))?;
            if !reached {
                return Err(format!(
                    "code {idx}: {} schedule did not reach a fixed point on a tree",
                    if sequential { "SUS" } else { "PUS" }
                ));
            }
            for j in 0..v {
                for a in 0..q {
                    let err = (msgs.posterior(j)[a] - marg[j][a]).abs();
                    max_err = max_err.max(err);
                    if err > 1e-9 {
                        return Err(format!(
                            "code {idx} ({}): posterior({j})[{a}] off by {err:.3e}",
                            if sequential { "SUS" } else { "PUS" }
                        ));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{num_codes} cycle-free codes; max |posterior - marginal| = {max_err:.2e}"
    ))
}

/// Generates a random code whose factor graph is a forest: A edges are
/// accepted only when they join two components (union-find), and B = I
/// adds one leaf noise variable per check.
fn random_tree_instance(
    q: usize,
    max_vars: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(SparseCode, Vec<Vec<f64>>, Vec<u8>), String> {
    let m = rng.random_range(2..=max_vars / 2);
    let n_src = rng.random_range(2..=max_vars - m);
    // union-find (path halving) over checks (0..m) and source vars
    // (m..m+n_src)
    let mut parent: Vec<usize> = (0..m + n_src).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut entries: Vec<(usize, usize, u8)> = Vec::new();
    for i in 0..m {
        let tries = rng.random_range(1..=3usize);
        for _ in 0..tries {
            let j = rng.random_range(0..n_src);
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, m + j));
            if ri == rj {
                continue; // would close a cycle (or duplicate the position)
            }
            parent[ri] = rj;
            entries.push((i, j, rng.random_range(1..q) as u8));
        }
    }
    let a = SparseMatrix::from_entries(q, m, n_src, entries).map_err(|e| e.to_string())?;
    let b = SparseMatrix::from_entries(q, m, m, (0..m).map(|i| (i, i, 1u8)))
        .map_err(|e| e.to_string())?;
    let code = SparseCode::from_matrices(a, b).map_err(|e| e.to_string())?;

    let v = n_src + m;
    let priors: Vec<Vec<f64>> = (0..v)
        .map(|_| {
            let mut p: Vec<f64> = (0..q).map(|_| 0.1 + rng.random::<f64>()).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= s);
            p
        })
        .collect();
    let x_true: Vec<u8> = (0..v).map(|_| rng.random_range(0..q) as u8).collect();
    let z = code
        .h()
        .mul_vec(&x_true, code.tables())
        .map_err(|e| e.to_string())?;
    Ok((code, priors, z))
}
