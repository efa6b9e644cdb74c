//! MacKay-Neal code matrices: construction, encoding and syndrome formation.
//!
//! An MN code is a pair of sparse matrices over GF(q): A (M x N) and an
//! invertible B (M x M). Encoding solves B t = A s by forward substitution;
//! the receiver computes the syndrome z = B r, which equals H x for
//! H = [A B] and x the concatenation of the source and noise symbol
//! vectors. The decoder works entirely on H and z.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::gf::GfTables;
use crate::sparse::SparseMatrix;
use crate::{Error, Result};

/// One nonzero position of H seen from a node of the factor graph.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    /// The node on the other side (variable index for check rows, check
    /// index for variable columns).
    pub other: usize,
    /// The H entry on this edge.
    pub coeff: u8,
    /// Dense edge id, assigned row-major over H.
    pub id: usize,
}

/// Row- and column-indexed adjacency of H with stable edge ids.
#[derive(Debug, Clone)]
pub struct CodeGraph {
    check_edges: Vec<Vec<Edge>>,
    var_edges: Vec<Vec<Edge>>,
    num_edges: usize,
    max_check_degree: usize,
    max_var_degree: usize,
}

impl CodeGraph {
    fn new(h: &SparseMatrix) -> CodeGraph {
        let mut check_edges = Vec::with_capacity(h.rows());
        let mut var_edges = vec![Vec::new(); h.cols()];
        let mut id = 0;
        for i in 0..h.rows() {
            let row = h.row(i);
            let mut edges = Vec::with_capacity(row.len());
            for &(j, v) in row {
                edges.push(Edge {
                    other: j,
                    coeff: v,
                    id,
                });
                var_edges[j].push(Edge {
                    other: i,
                    coeff: v,
                    id,
                });
                id += 1;
            }
            check_edges.push(edges);
        }
        let max_check_degree = check_edges.iter().map(Vec::len).max().unwrap_or(0);
        let max_var_degree = var_edges.iter().map(Vec::len).max().unwrap_or(0);
        CodeGraph {
            check_edges,
            var_edges,
            num_edges: id,
            max_check_degree,
            max_var_degree,
        }
    }

    /// Edges of check (row) `i`.
    pub fn check(&self, i: usize) -> &[Edge] {
        &self.check_edges[i]
    }

    /// Edges of variable (column) `j`.
    pub fn var(&self, j: usize) -> &[Edge] {
        &self.var_edges[j]
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_checks(&self) -> usize {
        self.check_edges.len()
    }

    pub fn num_vars(&self) -> usize {
        self.var_edges.len()
    }

    pub fn max_check_degree(&self) -> usize {
        self.max_check_degree
    }

    pub fn max_var_degree(&self) -> usize {
        self.max_var_degree
    }
}

/// An MN code: A, B, their concatenation H, and the field tables.
///
/// Immutable after construction; decode workers share it by reference.
#[derive(Debug, Clone)]
pub struct SparseCode {
    q: usize,
    n: usize,
    m_len: usize,
    a: SparseMatrix,
    b: SparseMatrix,
    h: SparseMatrix,
    tables: GfTables,
    graph: CodeGraph,
}

impl SparseCode {
    /// Assembles a code from explicit matrices. B must be lower-triangular
    /// with a unit diagonal so that encoding by forward substitution is
    /// well defined.
    pub fn from_matrices(a: SparseMatrix, b: SparseMatrix) -> Result<SparseCode> {
        if a.q() != b.q() {
            return Err(Error::InfeasibleParameters(format!(
                "field mismatch: A over GF({}), B over GF({})",
                a.q(),
                b.q()
            )));
        }
        if b.rows() != b.cols() || a.rows() != b.rows() {
            return Err(Error::InfeasibleParameters(format!(
                "A is {}x{} but B is {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        for i in 0..b.rows() {
            let row = b.row(i);
            if row.last() != Some(&(i, 1)) {
                return Err(Error::InfeasibleParameters(format!(
                    "B row {i} is not unit-diagonal lower-triangular"
                )));
            }
        }
        let h = SparseMatrix::hconcat(&a, &b)?;
        let tables = GfTables::new(a.q())?;
        let graph = CodeGraph::new(&h);
        Ok(SparseCode {
            q: a.q(),
            n: a.cols(),
            m_len: a.rows(),
            a,
            b,
            h,
            tables,
            graph,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Source block length in symbols.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Transmitted block length in symbols.
    pub fn m_len(&self) -> usize {
        self.m_len
    }

    /// Code rate N / M.
    pub fn rate(&self) -> f64 {
        self.n as f64 / self.m_len as f64
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn h(&self) -> &SparseMatrix {
        &self.h
    }

    pub fn tables(&self) -> &GfTables {
        &self.tables
    }

    pub fn graph(&self) -> &CodeGraph {
        &self.graph
    }

    /// Encodes a source vector: returns t with B t = A s over GF(q).
    pub fn encode(&self, s: &[u8]) -> Result<Vec<u8>> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        let rhs = self.a.mul_vec(s, &self.tables)?;
        forward_substitute(&self.b, &rhs, &self.tables)
    }

    /// Computes the syndrome z = B r from the received symbol vector.
    pub fn syndrome(&self, r: &[u8]) -> Result<Vec<u8>> {
        if r.len() != self.m_len {
            return Err(Error::DimensionMismatch {
                expected: self.m_len,
                got: r.len(),
            });
        }
        self.b.mul_vec(r, &self.tables)
    }

    /// True iff every check equation of H x = z holds over GF(q).
    pub fn check_solution(&self, x_hat: &[u8], z: &[u8]) -> bool {
        assert_eq!(x_hat.len(), self.n + self.m_len);
        assert_eq!(z.len(), self.m_len);
        for (i, edges) in self.graph.check_edges.iter().enumerate() {
            let mut acc = 0u8;
            for e in edges {
                acc ^= self.tables.mul(e.coeff, x_hat[e.other]);
            }
            if acc != z[i] {
                return false;
            }
        }
        true
    }
}

/// Solves B t = y for unit-diagonal lower-triangular B.
pub fn forward_substitute(b: &SparseMatrix, y: &[u8], tables: &GfTables) -> Result<Vec<u8>> {
    if y.len() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: b.rows(),
            got: y.len(),
        });
    }
    let mut t = vec![0u8; b.rows()];
    for i in 0..b.rows() {
        let mut acc = y[i];
        let row = b.row(i);
        // last entry of the row is the unit diagonal
        for &(j, v) in &row[..row.len() - 1] {
            acc ^= tables.mul(v, t[j]);
        }
        t[i] = acc;
    }
    Ok(t)
}

/// Bound on per-column resampling attempts while avoiding 4-cycles.
const FOUR_CYCLE_RETRIES: usize = 100;
/// Bound on whole-construction restarts when the balanced row budget
/// strands a column.
const CONSTRUCTION_RESTARTS: usize = 100;

/// Builds an MN code: A with exactly `col_weight` entries per column and
/// row weights differing by at most one, B bidiagonal (unit diagonal plus
/// one random subdiagonal). Deterministic for a given seed.
///
/// `rate` is the target N/M as an exact fraction (numerator, denominator).
pub fn build_code(
    q: usize,
    n: usize,
    rate: (usize, usize),
    col_weight: usize,
    seed: u64,
) -> Result<SparseCode> {
    let (num, den) = rate;
    if num == 0 || den == 0 || n == 0 {
        return Err(Error::InfeasibleParameters(
            "rate and block length must be positive".into(),
        ));
    }
    if (n * den) % num != 0 {
        return Err(Error::InfeasibleParameters(format!(
            "rate {num}/{den} does not divide N = {n} into an integer block length"
        )));
    }
    let m_len = n * den / num;
    if col_weight < 2 {
        return Err(Error::InfeasibleParameters(
            "column weight must be at least 2".into(),
        ));
    }
    if n < col_weight {
        return Err(Error::InfeasibleParameters(format!(
            "N = {n} smaller than column weight {col_weight}"
        )));
    }
    if col_weight > m_len {
        return Err(Error::InfeasibleParameters(format!(
            "column weight {col_weight} exceeds M = {m_len}: a column cannot have distinct rows"
        )));
    }
    GfTables::new(q)?; // validate the field size before any sampling
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let a = build_a_matrix(q, n, m_len, col_weight, &mut rng)?;
    // B: unit diagonal plus one random nonzero subdiagonal.
    let mut b_entries = Vec::with_capacity(2 * m_len - 1);
    for i in 0..m_len {
        if i > 0 {
            b_entries.push((i, i - 1, random_nonzero(q, &mut rng)));
        }
        b_entries.push((i, i, 1));
    }
    let b = SparseMatrix::from_entries(q, m_len, m_len, b_entries)?;
    SparseCode::from_matrices(a, b)
}

fn random_nonzero(q: usize, rng: &mut ChaCha8Rng) -> u8 {
    rng.random_range(1..q) as u8
}

/// Places `col_weight` entries per column with near-uniform row weights,
/// rejecting 4-cycles (two columns sharing two rows) for a bounded number
/// of retries per column.
fn build_a_matrix(
    q: usize,
    n: usize,
    m_len: usize,
    col_weight: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SparseMatrix> {
    let total = n * col_weight;
    let base = total / m_len;
    let extra = total % m_len;

    'restart: for _ in 0..CONSTRUCTION_RESTARTS {
        // Balanced row budget: `extra` randomly chosen rows carry one more
        // entry than the rest.
        let mut capacity = vec![base; m_len];
        let mut rows: Vec<usize> = (0..m_len).collect();
        for k in 0..extra {
            let pick = rng.random_range(k..m_len);
            rows.swap(k, pick);
            capacity[rows[k]] += 1;
        }

        let mut used_pairs: HashSet<(usize, usize)> = HashSet::new();
        let mut entries: Vec<(usize, usize, u8)> = Vec::with_capacity(total);
        let mut scratch: Vec<usize> = Vec::with_capacity(col_weight);

        for col in 0..n {
            let mut accepted = false;
            for attempt in 0..=FOUR_CYCLE_RETRIES {
                match sample_distinct_rows(&capacity, col_weight, rng, &mut scratch) {
                    Some(()) => {}
                    None => continue 'restart,
                }
                let collides = pairs_of(&scratch).any(|p| used_pairs.contains(&p));
                if collides && attempt < FOUR_CYCLE_RETRIES {
                    continue;
                }
                // accept (4-cycle avoidance is best effort)
                for &r in scratch.iter() {
                    capacity[r] -= 1;
                    entries.push((r, col, random_nonzero(q, rng)));
                }
                for p in pairs_of(&scratch) {
                    used_pairs.insert(p);
                }
                accepted = true;
                break;
            }
            if !accepted {
                continue 'restart;
            }
        }
        return SparseMatrix::from_entries(q, m_len, n, entries);
    }
    Err(Error::InfeasibleParameters(format!(
        "could not distribute {n} columns of weight {col_weight} over {m_len} rows \
         without duplicate positions"
    )))
}

/// Samples `k` distinct rows with probability proportional to remaining
/// capacity. Returns None when fewer than `k` rows have capacity left.
fn sample_distinct_rows(
    capacity: &[usize],
    k: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<usize>,
) -> Option<()> {
    out.clear();
    let mut cand: Vec<(usize, usize)> = capacity
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(r, &c)| (r, c))
        .collect();
    if cand.len() < k {
        return None;
    }
    for _ in 0..k {
        let total: usize = cand.iter().map(|&(_, c)| c).sum();
        let mut target = rng.random_range(0..total);
        let mut idx = 0;
        for (p, &(_, c)) in cand.iter().enumerate() {
            if target < c {
                idx = p;
                break;
            }
            target -= c;
        }
        out.push(cand.swap_remove(idx).0);
    }
    out.sort_unstable();
    Some(())
}

fn pairs_of(rows: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    rows.iter().enumerate().flat_map(move |(i, &a)| {
        rows[i + 1..]
            .iter()
            .map(move |&b| if a < b { (a, b) } else { (b, a) })
    })
}
