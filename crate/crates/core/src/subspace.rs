//! Canonical subspaces of F_q^n: reduced row echelon bases, lattice
//! operations, q-binomial counting, exhaustive enumeration in lexicographic
//! order, and uniform sampling restricted to a zoom range Q <= L <= W.
//!
//! Every subspace is stored as its unique RREF basis, so structural equality
//! is span equality and collections of subspaces deduplicate for free.
//! The ambient dimension is capped so that q^n stays at desk scale (2^24):
//! nothing here is meant for the asymptotic regime.

use std::sync::Arc;

use num::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

pub type Vector = Vec<Elem>;

/// Largest allowed value of q^n for an ambient space F_q^n.
pub const AMBIENT_CAP: u128 = 1 << 24;

/// Default cap on the number of subspaces an enumeration may materialize.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

pub fn vec_is_zero(v: &[Elem]) -> bool {
    v.iter().all(|&x| x == 0)
}

pub fn vec_add(f: &Field, a: &[Elem], b: &[Elem]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn vec_sub(f: &Field, a: &[Elem], b: &[Elem]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn vec_scale(f: &Field, c: Elem, a: &[Elem]) -> Vector {
    a.iter().map(|&x| f.mul(c, x)).collect()
}

/// Standard bilinear form sum_i a_i b_i (no conjugation).
pub fn dot(f: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0;
    for (&x, &y) in a.iter().zip(b) {
        acc = f.add(acc, f.mul(x, y));
    }
    acc
}

/// All q^n vectors of F_q^n in index order (digit decoding of 0..q^n).
pub fn all_vectors(f: &Field, n: usize) -> impl Iterator<Item = Vector> + '_ {
    let q = u64::from(f.order());
    let total = q.checked_pow(n as u32).expect("vector space too large to enumerate");
    (0..total).map(move |mut idx| {
        let mut v = vec![0u32; n];
        for slot in v.iter_mut() {
            *slot = (idx % q) as u32;
            idx /= q;
        }
        v
    })
}

pub fn rand_vector<R: Rng + ?Sized>(f: &Field, n: usize, rng: &mut R) -> Vector {
    (0..n).map(|_| f.rand_elem(rng)).collect()
}

/// Position of v in the `all_vectors` order (base-q digit encoding).
pub fn vector_index(f: &Field, v: &[Elem]) -> u64 {
    let q = u64::from(f.order());
    let mut idx = 0u64;
    for &x in v.iter().rev() {
        idx = idx * q + u64::from(x);
    }
    idx
}

/// Inverse of `vector_index`.
pub fn index_vector(f: &Field, n: usize, mut idx: u64) -> Vector {
    let q = u64::from(f.order());
    let mut v = vec![0u32; n];
    for slot in v.iter_mut() {
        *slot = (idx % q) as u32;
        idx /= q;
    }
    v
}

/// Gaussian binomial coefficient: the number of l-dimensional subspaces of
/// F_q^n, computed exactly as prod_{i=1}^{l} (q^{n-l+i} - 1) / (q^i - 1).
pub fn gaussian_binomial(n: u32, l: u32, q: u32) -> Result<BigUint> {
    if l > n {
        return Err(Error::domain(format!(
            "gaussian binomial undefined for l={l} > n={n}"
        )));
    }
    let q = BigUint::from(q);
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    let one = BigUint::from(1u32);
    for i in 1..=l {
        num *= q.pow(n - l + i) - &one;
        den *= q.pow(i) - &one;
    }
    Ok(num / den)
}

/// Row-reduce to RREF. Returns the nonzero rows and their pivot columns.
fn rref(f: &Field, mut rows: Vec<Vector>) -> (Vec<Vector>, Vec<usize>) {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pivot_row) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pivot_row);
        let inv = f.inv(rows[r][col]).expect("pivot entry is nonzero");
        for j in col..ncols {
            rows[r][j] = f.mul(rows[r][j], inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let c = rows[i][col];
                for j in col..ncols {
                    let t = f.mul(c, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], t);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Serialized shape of a subspace; the field travels separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceData {
    pub ambient: usize,
    pub rows: Vec<Vector>,
}

#[derive(Debug, Clone)]
pub struct Subspace {
    field: Arc<Field>,
    ambient: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.ambient == other.ambient && self.rows == other.rows
    }
}
impl Eq for Subspace {}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.ambient, &self.rows).cmp(&(other.ambient, &other.rows))
    }
}

impl std::hash::Hash for Subspace {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.rows.hash(state);
    }
}

fn check_ambient(f: &Field, n: usize) -> Result<()> {
    let mut size: u128 = 1;
    for _ in 0..n {
        size = size.saturating_mul(u128::from(f.order()));
        if size > AMBIENT_CAP {
            return Err(Error::usage(format!(
                "ambient space F_{}^{} exceeds the desk-scale cap q^n <= 2^24",
                f.order(),
                n
            )));
        }
    }
    Ok(())
}

impl Subspace {
    /// The zero subspace of F_q^n.
    pub fn zero(field: &Arc<Field>, ambient: usize) -> Result<Subspace> {
        check_ambient(field, ambient)?;
        Ok(Subspace {
            field: field.clone(),
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        })
    }

    /// The full space F_q^n.
    pub fn full(field: &Arc<Field>, ambient: usize) -> Result<Subspace> {
        let mut rows = Vec::with_capacity(ambient);
        for i in 0..ambient {
            let mut row = vec![0u32; ambient];
            row[i] = 1;
            rows.push(row);
        }
        Subspace::canonicalize(field, ambient, rows)
    }

    /// Span of the given rows, brought to RREF. The only way to build a
    /// subspace from arbitrary vectors, so canonical form is unconditional.
    pub fn canonicalize(field: &Arc<Field>, ambient: usize, rows: Vec<Vector>) -> Result<Subspace> {
        check_ambient(field, ambient)?;
        for row in &rows {
            if row.len() != ambient {
                return Err(Error::usage(format!(
                    "row length {} does not match ambient dimension {ambient}",
                    row.len()
                )));
            }
            if row.iter().any(|&x| x >= field.order()) {
                return Err(Error::usage("vector entry out of field range"));
            }
        }
        let (rows, pivots) = rref(field, rows);
        Ok(Subspace {
            field: field.clone(),
            ambient,
            rows,
            pivots,
        })
    }

    /// Parse from serialized form, rejecting bases that are not already
    /// canonical (the wire format is RREF, nothing looser).
    pub fn from_data(field: &Arc<Field>, data: &SubspaceData) -> Result<Subspace> {
        let s = Subspace::canonicalize(field, data.ambient, data.rows.clone())?;
        if s.rows != data.rows {
            return Err(Error::usage(
                "subspace rows are not in reduced row echelon form",
            ));
        }
        Ok(s)
    }

    pub fn to_data(&self) -> SubspaceData {
        SubspaceData {
            ambient: self.ambient,
            rows: self.rows.clone(),
        }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
    pub fn codim(&self) -> usize {
        self.ambient - self.rows.len()
    }
    /// Canonical basis: the RREF rows.
    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.field != other.field || self.ambient != other.ambient {
            return Err(Error::usage("subspaces live in different ambient spaces"));
        }
        Ok(())
    }

    /// Coordinates of v in the canonical basis, if v lies in the span.
    /// Because the basis is RREF, the coordinate at basis row i is just
    /// v[pivot_i]; membership is confirmed by full reduction.
    pub fn coords(&self, v: &[Elem]) -> Option<Vector> {
        debug_assert_eq!(v.len(), self.ambient);
        let f = &*self.field;
        let mut rem = v.to_vec();
        let mut coords = Vec::with_capacity(self.rows.len());
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = rem[p];
            coords.push(c);
            if c != 0 {
                for j in 0..self.ambient {
                    let t = f.mul(c, row[j]);
                    rem[j] = f.sub(rem[j], t);
                }
            }
        }
        vec_is_zero(&rem).then_some(coords)
    }

    pub fn contains_vector(&self, v: &[Elem]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|r| self.contains_vector(r))
    }

    /// The vector sum_i coeffs_i * basis_i for coefficients in the canonical
    /// basis.
    pub fn from_coords(&self, coeffs: &[Elem]) -> Vector {
        debug_assert_eq!(coeffs.len(), self.dim());
        let f = &*self.field;
        let mut v = vec![0u32; self.ambient];
        for (&c, row) in coeffs.iter().zip(&self.rows) {
            if c != 0 {
                for j in 0..self.ambient {
                    v[j] = f.add(v[j], f.mul(c, row[j]));
                }
            }
        }
        v
    }

    /// Uniformly random vector of the subspace.
    pub fn rand_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let coeffs: Vector = (0..self.dim()).map(|_| self.field.rand_elem(rng)).collect();
        self.from_coords(&coeffs)
    }

    /// All q^dim vectors of the subspace, in coefficient index order.
    pub fn members(&self) -> impl Iterator<Item = Vector> + '_ {
        let q = u64::from(self.field.order());
        let d = self.dim();
        let total = q.checked_pow(d as u32).expect("subspace too large to enumerate");
        (0..total).map(move |mut idx| {
            let mut coeffs = vec![0u32; d];
            for slot in coeffs.iter_mut() {
                *slot = (idx % q) as u32;
                idx /= q;
            }
            self.from_coords(&coeffs)
        })
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        Subspace::canonicalize(&self.field, self.ambient, rows)
    }

    /// Orthogonal complement under the standard bilinear form: the kernel of
    /// the basis matrix, read off the RREF free columns.
    pub fn perp(&self) -> Subspace {
        let f = &*self.field;
        let n = self.ambient;
        let mut rows = Vec::with_capacity(n - self.dim());
        for free in 0..n {
            if self.pivots.contains(&free) {
                continue;
            }
            let mut v = vec![0u32; n];
            v[free] = 1;
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                v[p] = f.neg(row[free]);
            }
            rows.push(v);
        }
        Subspace::canonicalize(&self.field, n, rows).expect("kernel rows are well-formed")
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        Ok(self.perp().sum(&other.perp())?.perp())
    }

    /// Basis vectors of `self` that extend `inside` to span `self`
    /// (representatives of a basis of the quotient self/inside).
    pub fn quotient_reps(&self, inside: &Subspace) -> Result<Vec<Vector>> {
        self.same_ambient(inside)?;
        if !self.contains(inside) {
            return Err(Error::domain("quotient base is not contained in the space"));
        }
        let mut acc = inside.clone();
        let mut reps = Vec::with_capacity(self.dim() - inside.dim());
        for row in &self.rows {
            if !acc.contains_vector(row) {
                reps.push(row.clone());
                let mut rows = acc.rows.clone();
                rows.push(row.clone());
                acc = Subspace::canonicalize(&self.field, self.ambient, rows)?;
            }
        }
        debug_assert_eq!(acc, *self);
        Ok(reps)
    }
}

/// A zoom range: the set of subspaces L with q_in <= L <= w_out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoomPair {
    q_in: Subspace,
    w_out: Subspace,
}

impl ZoomPair {
    pub fn new(q_in: Subspace, w_out: Subspace) -> Result<ZoomPair> {
        if q_in.field != w_out.field || q_in.ambient != w_out.ambient {
            return Err(Error::usage("zoom endpoints live in different ambients"));
        }
        if !w_out.contains(&q_in) {
            return Err(Error::domain("zoom-in subspace is not inside the zoom-out"));
        }
        Ok(ZoomPair { q_in, w_out })
    }

    /// The unrestricted range: everything between {0} and F_q^n.
    pub fn trivial(field: &Arc<Field>, ambient: usize) -> Result<ZoomPair> {
        ZoomPair::new(Subspace::zero(field, ambient)?, Subspace::full(field, ambient)?)
    }

    pub fn q_in(&self) -> &Subspace {
        &self.q_in
    }
    pub fn w_out(&self) -> &Subspace {
        &self.w_out
    }

    fn level_count(&self, l: usize) -> Result<BigUint> {
        let a = self.q_in.dim();
        let b = self.w_out.dim();
        if l < a || l > b {
            return Err(Error::domain(format!(
                "zoom level {l} outside [{a}, {b}]"
            )));
        }
        gaussian_binomial((b - a) as u32, (l - a) as u32, self.q_in.field.order())
    }

    /// Uniformly random L with q_in <= L <= w_out and dim L = l: draw the
    /// missing basis vectors uniformly from w_out and retry until they are
    /// independent modulo q_in. Every admissible L is spanned by the same
    /// number of ordered tuples, so acceptance is exactly uniform.
    pub fn sample<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Result<Subspace> {
        self.level_count(l)?;
        let need = l - self.q_in.dim();
        if need == 0 {
            return Ok(self.q_in.clone());
        }
        const MAX_BATCHES: u32 = 1_000_000;
        for _ in 0..MAX_BATCHES {
            let mut rows = self.q_in.rows.clone();
            for _ in 0..need {
                rows.push(self.w_out.rand_member(rng));
            }
            let cand = Subspace::canonicalize(&self.q_in.field, self.q_in.ambient, rows)?;
            if cand.dim() == l {
                return Ok(cand);
            }
        }
        Err(Error::resource(
            "zoom sampling failed to find independent vectors within the retry cap",
        ))
    }

    /// Every L with q_in <= L <= w_out and dim L = l, in lexicographic order
    /// of the RREF bases of the quotient space (a fixed, reproducible order).
    pub fn enumerate(&self, l: usize, cap: u64) -> Result<Vec<Subspace>> {
        let count = self.level_count(l)?;
        if count > BigUint::from(cap) {
            return Err(Error::resource(format!(
                "zoom enumeration would produce {count} subspaces (cap {cap})"
            )));
        }
        let reps = self.w_out.quotient_reps(&self.q_in)?;
        let t = reps.len();
        let d = l - self.q_in.dim();
        let f = &self.q_in.field;
        let mut out = Vec::new();
        for quot_rows in rref_matrices(f, t, d) {
            // Lift each quotient row through the representatives.
            let mut rows = self.q_in.rows.clone();
            for qr in &quot_rows {
                let mut v = vec![0u32; self.q_in.ambient];
                for (&c, rep) in qr.iter().zip(&reps) {
                    if c != 0 {
                        for j in 0..v.len() {
                            v[j] = f.add(v[j], f.mul(c, rep[j]));
                        }
                    }
                }
                rows.push(v);
            }
            out.push(Subspace::canonicalize(f, self.q_in.ambient, rows)?);
        }
        debug_assert_eq!(BigUint::from(out.len() as u64), count);
        Ok(out)
    }
}

/// All d x t matrices over F_q in RREF with d pivots, in lexicographic order:
/// pivot column sets ascending, then free entries counting up in base q.
fn rref_matrices(f: &Arc<Field>, t: usize, d: usize) -> Vec<Vec<Vector>> {
    let q = f.order() as u64;
    let mut out = Vec::new();
    for pivots in combinations(t, d) {
        // Free cells: row i may have arbitrary entries in columns greater
        // than pivots[i] that are not pivot columns themselves.
        let mut free_cells = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for col in p + 1..t {
                if !pivots.contains(&col) {
                    free_cells.push((i, col));
                }
            }
        }
        let total = q
            .checked_pow(free_cells.len() as u32)
            .expect("enumeration cap should have caught this");
        for mut idx in 0..total {
            let mut rows = vec![vec![0u32; t]; d];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = 1;
            }
            for &(i, col) in &free_cells {
                rows[i][col] = (idx % q) as u32;
                idx /= q;
            }
            out.push(rows);
        }
    }
    out
}

/// All d-element subsets of 0..t in lexicographic order.
fn combinations(t: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if d > t {
        return out;
    }
    let mut cur: Vec<usize> = (0..d).collect();
    loop {
        out.push(cur.clone());
        // Advance to the next combination.
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + t - d {
                break;
            }
        }
        if cur[i] == i + t - d {
            return out;
        }
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Deterministic complement of `avoid` inside `within`, built by scanning the
/// canonical rows of `within` and keeping those outside the running span.
/// The result depends only on the two subspaces, so callers that need a
/// canonical representative of "some complement" agree with each other.
pub fn greedy_complement(within: &Subspace, avoid: &Subspace) -> Result<Subspace> {
    if !within.contains(avoid) {
        return Err(Error::usage(
            "complement target does not contain the avoided space",
        ));
    }
    let mut acc = avoid.clone();
    let mut chosen: Vec<Vector> = Vec::new();
    for row in within.rows() {
        if !acc.contains_vector(row) {
            chosen.push(row.clone());
            let mut rows = acc.rows().to_vec();
            rows.push(row.clone());
            acc = Subspace::canonicalize(within.field(), within.ambient(), rows)?;
        }
    }
    let comp = Subspace::canonicalize(within.field(), within.ambient(), chosen)?;
    debug_assert_eq!(comp.dim() + avoid.dim(), within.dim());
    Ok(comp)
}

/// Uniformly random l-dimensional L inside `within` subject to
/// L intersect avoid = {0}. Vectors are drawn one at a time, uniformly
/// outside the forbidden span, which weights every admissible L by the same
/// number of ordered bases.
pub fn complement_avoiding<R: Rng + ?Sized>(
    within: &Subspace,
    avoid: &Subspace,
    l: usize,
    rng: &mut R,
) -> Result<Subspace> {
    if within.field() != avoid.field() || within.ambient() != avoid.ambient() {
        return Err(Error::usage("subspaces live in different ambient spaces"));
    }
    let overlap = within.intersect(avoid)?;
    if l + overlap.dim() > within.dim() {
        return Err(Error::domain(format!(
            "no {l}-dimensional subspace of a {}-dimensional space avoids a {}-dimensional overlap",
            within.dim(),
            overlap.dim()
        )));
    }
    const MAX_DRAWS: u32 = 10_000_000;
    let f = within.field().clone();
    let mut rows: Vec<Vector> = Vec::with_capacity(l);
    let mut forbidden = avoid.clone();
    let mut draws = 0;
    while rows.len() < l {
        draws += 1;
        if draws > MAX_DRAWS {
            return Err(Error::resource("complement sampling exceeded the draw cap"));
        }
        let v = within.rand_member(rng);
        if forbidden.contains_vector(&v) {
            continue;
        }
        rows.push(v.clone());
        let mut ext = forbidden.rows().to_vec();
        ext.push(v);
        forbidden = Subspace::canonicalize(&f, within.ambient(), ext)?;
    }
    let out = Subspace::canonicalize(&f, within.ambient(), rows)?;
    debug_assert_eq!(out.dim(), l);
    debug_assert_eq!(out.intersect(avoid)?.dim(), 0);
    Ok(out)
}

/// Solve A y = b over F_q. Returns a particular solution and a basis of the
/// kernel of A, or None when the system is inconsistent.
pub fn solve_linear_system(
    f: &Field,
    a_rows: &[Vector],
    b: &[Elem],
) -> Option<(Vector, Vec<Vector>)> {
    assert_eq!(a_rows.len(), b.len());
    let ncols = a_rows.first().map(|r| r.len()).unwrap_or(0);
    // Row-reduce the augmented matrix [A | b].
    let mut aug: Vec<Vector> = a_rows
        .iter()
        .zip(b)
        .map(|(row, &val)| {
            let mut r = row.clone();
            r.push(val);
            r
        })
        .collect();
    let (aug, pivots) = rref(f, std::mem::take(&mut aug));
    if pivots.contains(&ncols) {
        return None; // A pivot in the constants column: inconsistent.
    }
    let mut particular = vec![0u32; ncols];
    for (row, &p) in aug.iter().zip(&pivots) {
        particular[p] = row[ncols];
    }
    let mut kernel = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (row, &p) in aug.iter().zip(&pivots) {
            v[p] = f.neg(row[free]);
        }
        kernel.push(v);
    }
    Some((particular, kernel))
}
