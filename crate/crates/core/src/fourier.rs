//! Exact Fourier analysis over tiny matrix spaces F_q^{n x c}.
//!
//! Functions are dense tables over all q^{nc} matrices. In characteristic 2
//! the additive characters take values +1 and -1, so the entire pipeline
//! runs in exact rational arithmetic; odd characteristic falls back to
//! complex floating point with a 1e-10 tolerance. On top of the transform
//! sit the rank-level decomposition, the column-shrinking, column-growing,
//! and low-rank-shift averaging operators with their eigenvalue checks,
//! exhaustive pseudo-randomness scans over matrix zooms, and spot checks of
//! the level-norm, edge-count, loud-coefficient, and even-covering
//! inequalities. The spot checks evaluate both sides of each bound; the
//! stated constants are wildly loose at this scale, so reports carry the
//! slack so nobody mistakes a pass for a sharp estimate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::complex::Complex64;
use num::{BigInt, BigRational, BigUint, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agreement::rational_from_f64;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::subspace::{gaussian_binomial, index_vector, Subspace, SubspaceData, ZoomPair};

/// Largest dense table: q^{nc} points.
pub const MAX_POINTS: u64 = 1 << 20;

/// Budget for operator averages, matrix enumerations, and restriction scans.
const WORK_CAP: u64 = 1 << 26;

/// Tolerance for identities checked on the complex track.
const APPROX_TOL: f64 = 1e-10;

fn approx_tol_rational() -> BigRational {
    rational_from_f64(APPROX_TOL).expect("the tolerance is finite")
}

/// The matrix space F_q^{n x c} behind a value table. Tables are indexed by
/// the base-q digits of the entries in column-major order, so the first
/// column occupies the least significant digits.
#[derive(Debug, Clone, PartialEq)]
struct Space {
    field: Arc<Field>,
    n: usize,
    c: usize,
    points: u64,
}

impl Space {
    fn new(field: &Arc<Field>, n: usize, c: usize) -> Result<Space> {
        if n == 0 || c == 0 {
            return Err(Error::usage(
                "matrix spaces need at least one row and one column",
            ));
        }
        let q = u64::from(field.order());
        let mut points: u64 = 1;
        for _ in 0..n * c {
            points = points
                .checked_mul(q)
                .filter(|&p| p <= MAX_POINTS)
                .ok_or_else(|| {
                    Error::resource(format!(
                        "a table over {q}^{} matrices exceeds the {MAX_POINTS}-point cap",
                        n * c
                    ))
                })?;
        }
        Ok(Space {
            field: Arc::clone(field),
            n,
            c,
            points,
        })
    }

    fn decode(&self, idx: u64) -> Mat {
        Mat::from_index(self.field.order(), self.n, self.c, idx)
    }

    fn same_shape(&self, other: &Space) -> bool {
        self.field == other.field && self.n == other.n && self.c == other.c
    }

    /// Index of the entrywise sum of two matrices. In characteristic 2 the
    /// base-q digit packing makes this a plain xor.
    fn add_indices(&self, a: u64, b: u64) -> u64 {
        if self.field.characteristic() == 2 {
            return a ^ b;
        }
        let q = u64::from(self.field.order());
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut weight = 1u64;
        for _ in 0..self.n * self.c {
            let da = (a % q) as Elem;
            let db = (b % q) as Elem;
            out += u64::from(self.field.add(da, db)) * weight;
            weight *= q;
            a /= q;
            b /= q;
        }
        out
    }
}

/// Small dense matrix over F_q, stored column-major to match table indexing.
#[derive(Debug, Clone, PartialEq)]
struct Mat {
    rows: usize,
    cols: usize,
    a: Vec<Elem>,
}

impl Mat {
    fn zero(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            a: vec![0; rows * cols],
        }
    }

    fn from_index(q: u32, rows: usize, cols: usize, mut idx: u64) -> Mat {
        let qq = u64::from(q);
        let mut a = vec![0 as Elem; rows * cols];
        for cell in a.iter_mut() {
            *cell = (idx % qq) as Elem;
            idx /= qq;
        }
        Mat { rows, cols, a }
    }

    fn index(&self, q: u32) -> u64 {
        let qq = u64::from(q);
        let mut idx = 0u64;
        for &cell in self.a.iter().rev() {
            idx = idx * qq + u64::from(cell);
        }
        idx
    }

    fn from_rows(rows: &[Vec<Elem>], want_cols: usize, q: u32) -> Result<Mat> {
        let mut m = Mat::zero(rows.len(), want_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != want_cols {
                return Err(Error::usage(format!(
                    "matrix row {i} has {} entries where {want_cols} are expected",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= q {
                    return Err(Error::usage(format!(
                        "entry {v} is not an element of the order-{q} field"
                    )));
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j)).collect())
            .collect()
    }

    fn at(&self, i: usize, j: usize) -> Elem {
        self.a[j * self.rows + i]
    }

    fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.a[j * self.rows + i] = v;
    }

    fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    fn mul(&self, f: &Field, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zero(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let w = rhs.at(k, j);
                if w == 0 {
                    continue;
                }
                for i in 0..self.rows {
                    let prod = f.mul(self.at(i, k), w);
                    out.set(i, j, f.add(out.at(i, j), prod));
                }
            }
        }
        out
    }

    #[cfg(test)]
    fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    fn rank(&self, f: &Field) -> usize {
        let mut rows: Vec<Vec<Elem>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j)).collect())
            .collect();
        let mut r = 0;
        for col in 0..self.cols {
            let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
                continue;
            };
            rows.swap(r, pivot);
            let inv = f.inv(rows[r][col]).expect("pivot is nonzero");
            for j in col..self.cols {
                rows[r][j] = f.mul(rows[r][j], inv);
            }
            for i in 0..rows.len() {
                if i != r && rows[i][col] != 0 {
                    let factor = rows[i][col];
                    for j in col..self.cols {
                        let sub = f.mul(factor, rows[r][j]);
                        rows[i][j] = f.sub(rows[i][j], sub);
                    }
                }
            }
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        r
    }

    /// Entrywise dot product, the bilinear form behind the characters.
    fn dot(&self, f: &Field, rhs: &Mat) -> Elem {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.a
            .iter()
            .zip(&rhs.a)
            .fold(0, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
    }
}

/// All matrices of one shape, optionally filtered to a fixed rank.
fn enumerate_mats(
    f: &Field,
    rows: usize,
    cols: usize,
    want_rank: Option<usize>,
    cap: u64,
) -> Result<Vec<Mat>> {
    let q = u64::from(f.order());
    let mut total = 1u64;
    for _ in 0..rows * cols {
        total = total.checked_mul(q).filter(|&t| t <= cap).ok_or_else(|| {
            Error::resource(format!(
                "enumerating {q}^{} matrices exceeds the scan budget",
                rows * cols
            ))
        })?;
    }
    let mut out = Vec::new();
    for idx in 0..total {
        let m = Mat::from_index(f.order(), rows, cols, idx);
        if want_rank.map_or(true, |r| m.rank(f) == r) {
            out.push(m);
        }
    }
    Ok(out)
}

/// A single value: exact rational in characteristic 2, complex otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarValue {
    Exact(BigRational),
    Complex(Complex64),
}

impl ScalarValue {
    pub fn re(&self) -> f64 {
        match self {
            ScalarValue::Exact(x) => x.to_f64().unwrap_or(f64::NAN),
            ScalarValue::Complex(z) => z.re,
        }
    }

    pub fn im(&self) -> f64 {
        match self {
            ScalarValue::Exact(_) => 0.0,
            ScalarValue::Complex(z) => z.im,
        }
    }

    /// |value| as a rational, exact on the exact track.
    pub fn magnitude(&self) -> Result<BigRational> {
        match self {
            ScalarValue::Exact(x) => Ok(x.abs()),
            ScalarValue::Complex(z) => rational_from_f64(z.norm()),
        }
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarValue::Exact(x) => write!(out, "{x}"),
            ScalarValue::Complex(z) => write!(out, "{:.12}{:+.12}i", z.re, z.im),
        }
    }
}

/// Dense value table for one function, on one of the two tracks.
#[derive(Debug, Clone, PartialEq)]
pub enum FnValues {
    Exact(Vec<BigRational>),
    Approx(Vec<Complex64>),
}

/// A function on the n x c matrices over F_q, stored as a dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpaceFn {
    space: Space,
    values: FnValues,
}

impl MatrixSpaceFn {
    /// Exact rational table. Only characteristic 2 supports this track,
    /// because that is where the characters themselves are rational.
    pub fn exact(field: &Arc<Field>, n: usize, c: usize, values: Vec<BigRational>) -> Result<Self> {
        if field.characteristic() != 2 {
            return Err(Error::usage(
                "exact tables need characteristic 2, where characters are plus or minus one",
            ));
        }
        let space = Space::new(field, n, c)?;
        if values.len() as u64 != space.points {
            return Err(Error::usage(format!(
                "the value table has {} entries where the space has {}",
                values.len(),
                space.points
            )));
        }
        Ok(MatrixSpaceFn {
            space,
            values: FnValues::Exact(values),
        })
    }

    /// Complex floating-point table, available in any characteristic.
    pub fn approx(field: &Arc<Field>, n: usize, c: usize, values: Vec<Complex64>) -> Result<Self> {
        let space = Space::new(field, n, c)?;
        if values.len() as u64 != space.points {
            return Err(Error::usage(format!(
                "the value table has {} entries where the space has {}",
                values.len(),
                space.points
            )));
        }
        Ok(MatrixSpaceFn {
            space,
            values: FnValues::Approx(values),
        })
    }

    /// Constant function on the track the characteristic prefers.
    pub fn constant(field: &Arc<Field>, n: usize, c: usize, value: &BigRational) -> Result<Self> {
        let space = Space::new(field, n, c)?;
        let len = space.points as usize;
        if field.characteristic() == 2 {
            Self::exact(field, n, c, vec![value.clone(); len])
        } else {
            let v = Complex64::new(value.to_f64().unwrap_or(f64::NAN), 0.0);
            Self::approx(field, n, c, vec![v; len])
        }
    }

    fn from_bools(field: &Arc<Field>, n: usize, c: usize, hits: &[bool]) -> Result<Self> {
        if field.characteristic() == 2 {
            let values = hits
                .iter()
                .map(|&h| if h { BigRational::one() } else { BigRational::zero() })
                .collect();
            Self::exact(field, n, c, values)
        } else {
            let values = hits
                .iter()
                .map(|&h| Complex64::new(if h { 1.0 } else { 0.0 }, 0.0))
                .collect();
            Self::approx(field, n, c, values)
        }
    }

    /// Indicator of the matrices whose column span belongs to `family`.
    /// Matrices with dependent columns never qualify, since their span is
    /// too small to be a member.
    pub fn lift_family(
        field: &Arc<Field>,
        n: usize,
        c: usize,
        family: &[Subspace],
    ) -> Result<Self> {
        let space = Space::new(field, n, c)?;
        let mut set = BTreeSet::new();
        for s in family {
            if s.field() != field || s.ambient() != n {
                return Err(Error::usage(
                    "family members live in a different ambient space",
                ));
            }
            if s.dim() != c {
                return Err(Error::usage(format!(
                    "a dimension-{} member cannot be the span of {c} columns",
                    s.dim()
                )));
            }
            set.insert(s.clone());
        }
        let mut hits = vec![false; space.points as usize];
        for idx in 0..space.points {
            let m = space.decode(idx);
            if m.rank(field) != c {
                continue;
            }
            let cols: Vec<Vec<Elem>> = (0..c).map(|j| m.col(j)).collect();
            let span = Subspace::canonicalize(field, n, cols)?;
            hits[idx as usize] = set.contains(&span);
        }
        Self::from_bools(field, n, c, &hits)
    }

    /// Indicator of a zoom set.
    pub fn zoom_indicator(zoom: &MatrixZoom) -> Result<Self> {
        let mut hits = vec![false; zoom.space.points as usize];
        for idx in zoom.member_indices() {
            hits[idx as usize] = true;
        }
        Self::from_bools(&zoom.space.field, zoom.space.n, zoom.space.c, &hits)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.space.field
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn c(&self) -> usize {
        self.space.c
    }

    pub fn points(&self) -> u64 {
        self.space.points
    }

    pub fn values(&self) -> &FnValues {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, FnValues::Exact(_))
    }

    pub fn value(&self, idx: u64) -> Result<ScalarValue> {
        if idx >= self.space.points {
            return Err(Error::usage(format!(
                "index {idx} is outside a {}-point table",
                self.space.points
            )));
        }
        Ok(match &self.values {
            FnValues::Exact(v) => ScalarValue::Exact(v[idx as usize].clone()),
            FnValues::Approx(v) => ScalarValue::Complex(v[idx as usize]),
        })
    }

    /// Row-major copy of the matrix behind a table index.
    pub fn matrix_rows(&self, idx: u64) -> Vec<Vec<Elem>> {
        self.space.decode(idx).to_rows()
    }

    /// Table index of a matrix given as rows.
    pub fn index_of(&self, rows: &[Vec<Elem>]) -> Result<u64> {
        if rows.len() != self.space.n {
            return Err(Error::usage(format!(
                "the matrix needs {} rows, found {}",
                self.space.n,
                rows.len()
            )));
        }
        let m = Mat::from_rows(rows, self.space.c, self.space.field.order())?;
        Ok(m.index(self.space.field.order()))
    }
}

/// The additive character indexed by the matrix S, as a value table.
pub fn character_fn(
    field: &Arc<Field>,
    n: usize,
    c: usize,
    s_rows: &[Vec<Elem>],
) -> Result<MatrixSpaceFn> {
    let space = Space::new(field, n, c)?;
    if s_rows.len() != n {
        return Err(Error::usage(format!(
            "the character index needs {n} rows, found {}",
            s_rows.len()
        )));
    }
    let s = Mat::from_rows(s_rows, c, field.order())?;
    if field.characteristic() == 2 {
        let values = (0..space.points)
            .map(|idx| {
                let m = space.decode(idx);
                if field.trace(s.dot(field, &m)) == 0 {
                    BigRational::one()
                } else {
                    -BigRational::one()
                }
            })
            .collect();
        MatrixSpaceFn::exact(field, n, c, values)
    } else {
        let p = field.characteristic();
        let values = (0..space.points)
            .map(|idx| {
                let m = space.decode(idx);
                omega_pow(p, field.trace(s.dot(field, &m)))
            })
            .collect();
        MatrixSpaceFn::approx(field, n, c, values)
    }
}

fn omega_pow(p: u32, t: u32) -> Complex64 {
    let angle = 2.0 * std::f64::consts::PI * f64::from(t) / f64::from(p);
    Complex64::new(angle.cos(), angle.sin())
}

/// A random function that reads its input only through the column span.
/// Functions of that form are exactly the ones invariant under right
/// multiplication by invertible matrices.
pub fn random_basis_invariant<R: Rng + ?Sized>(
    field: &Arc<Field>,
    n: usize,
    c: usize,
    rng: &mut R,
) -> Result<MatrixSpaceFn> {
    let space = Space::new(field, n, c)?;
    let mut assigned: BTreeMap<Subspace, i32> = BTreeMap::new();
    let mut picks = Vec::with_capacity(space.points as usize);
    for idx in 0..space.points {
        let m = space.decode(idx);
        let cols: Vec<Vec<Elem>> = (0..c).map(|j| m.col(j)).collect();
        let span = Subspace::canonicalize(field, n, cols)?;
        let v = *assigned
            .entry(span)
            .or_insert_with(|| rng.gen_range(-8..=8));
        picks.push(v);
    }
    if field.characteristic() == 2 {
        let values = picks
            .into_iter()
            .map(|k| BigRational::new(BigInt::from(k), BigInt::from(4)))
            .collect();
        MatrixSpaceFn::exact(field, n, c, values)
    } else {
        let values = picks
            .into_iter()
            .map(|k| Complex64::new(f64::from(k) / 4.0, 0.0))
            .collect();
        MatrixSpaceFn::approx(field, n, c, values)
    }
}

fn values_close(f: &MatrixSpaceFn, i: u64, j: u64) -> bool {
    match &f.values {
        FnValues::Exact(v) => v[i as usize] == v[j as usize],
        FnValues::Approx(v) => (v[i as usize] - v[j as usize]).norm() <= APPROX_TOL,
    }
}

/// Check F(MA) = F(M) for every invertible A, exhaustively.
pub fn is_basis_invariant(f: &MatrixSpaceFn) -> Result<bool> {
    let space = &f.space;
    let field = &space.field;
    let changes = enumerate_mats(field, space.c, space.c, Some(space.c), WORK_CAP)?;
    (changes.len() as u64)
        .checked_mul(space.points)
        .filter(|&w| w <= WORK_CAP)
        .ok_or_else(|| Error::resource("the basis-invariance scan exceeds the work budget"))?;
    for a in &changes {
        for idx in 0..space.points {
            let moved = space.decode(idx).mul(field, a).index(field.order());
            if !values_close(f, idx, moved) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True when every value is 0 or 1 (within tolerance on the complex track).
pub fn is_boolean(f: &MatrixSpaceFn) -> bool {
    match &f.values {
        FnValues::Exact(v) => v.iter().all(|x| x.is_zero() || x.is_one()),
        FnValues::Approx(v) => v
            .iter()
            .all(|z| z.norm() <= APPROX_TOL || (z - Complex64::new(1.0, 0.0)).norm() <= APPROX_TOL),
    }
}

fn points_rational(space: &Space) -> BigRational {
    BigRational::from_integer(BigInt::from(space.points))
}

/// E[|F|^2], the squared 2-norm under the uniform expectation.
pub fn norm2_sq(f: &MatrixSpaceFn) -> Result<BigRational> {
    match &f.values {
        FnValues::Exact(v) => {
            let mut acc = BigRational::zero();
            for x in v {
                acc += x * x;
            }
            Ok(acc / points_rational(&f.space))
        }
        FnValues::Approx(v) => {
            let mean = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / f.space.points as f64;
            rational_from_f64(mean)
        }
    }
}

/// E[|F|^t], the t-th power of the t-norm.
pub fn norm_t_pow(f: &MatrixSpaceFn, t: u32) -> Result<BigRational> {
    if t == 0 {
        return Err(Error::usage("norms need a positive exponent"));
    }
    match &f.values {
        FnValues::Exact(v) => {
            let mut acc = BigRational::zero();
            for x in v {
                acc += x.abs().pow(t as i32);
            }
            Ok(acc / points_rational(&f.space))
        }
        FnValues::Approx(v) => {
            let mean = v.iter().map(|z| z.norm().powi(t as i32)).sum::<f64>()
                / f.space.points as f64;
            rational_from_f64(mean)
        }
    }
}

/// Expectation inner product E[F conj(G)].
pub fn inner(f: &MatrixSpaceFn, g: &MatrixSpaceFn) -> Result<ScalarValue> {
    if !f.space.same_shape(&g.space) {
        return Err(Error::usage("inner products need matching spaces"));
    }
    match (&f.values, &g.values) {
        (FnValues::Exact(a), FnValues::Exact(b)) => {
            let mut acc = BigRational::zero();
            for (x, y) in a.iter().zip(b) {
                acc += x * y;
            }
            Ok(ScalarValue::Exact(acc / points_rational(&f.space)))
        }
        (FnValues::Approx(a), FnValues::Approx(b)) => {
            let sum: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            Ok(ScalarValue::Complex(sum / f.space.points as f64))
        }
        _ => Err(Error::usage("cannot mix exact and approximate tables")),
    }
}

/// Largest pointwise distance between two tables, exact where possible.
pub fn sup_distance(f: &MatrixSpaceFn, g: &MatrixSpaceFn) -> Result<BigRational> {
    if !f.space.same_shape(&g.space) {
        return Err(Error::usage("distances need matching spaces"));
    }
    match (&f.values, &g.values) {
        (FnValues::Exact(a), FnValues::Exact(b)) => Ok(a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .max()
            .unwrap_or_else(BigRational::zero)),
        (FnValues::Approx(a), FnValues::Approx(b)) => {
            let worst = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0f64, f64::max);
            rational_from_f64(worst)
        }
        _ => Err(Error::usage("cannot mix exact and approximate tables")),
    }
}

fn kernel_signs(f: &Field) -> Vec<i64> {
    let q = f.order() as usize;
    let mut signs = vec![1i64; q * q];
    for s in 0..q {
        for x in 0..q {
            signs[s * q + x] = f.char_sign(s as Elem, x as Elem);
        }
    }
    signs
}

fn transform_exact(space: &Space, vals: &[BigRational], forward: bool) -> Vec<BigRational> {
    let q = space.field.order() as usize;
    // In characteristic 2 the kernel is its own inverse.
    let signs = kernel_signs(&space.field);
    let n_pts = space.points as usize;
    let mut cur = vals.to_vec();
    let mut gathered = vec![BigRational::zero(); q];
    let mut stride = 1usize;
    for _ in 0..space.n * space.c {
        let block = stride * q;
        for base in (0..n_pts).step_by(block) {
            for off in 0..stride {
                for (t, slot) in gathered.iter_mut().enumerate() {
                    slot.clone_from(&cur[base + off + t * stride]);
                }
                for s in 0..q {
                    let mut acc = BigRational::zero();
                    for (x, val) in gathered.iter().enumerate() {
                        if signs[s * q + x] >= 0 {
                            acc += val;
                        } else {
                            acc -= val;
                        }
                    }
                    cur[base + off + s * stride] = acc;
                }
            }
        }
        stride = block;
    }
    if forward {
        let scale = BigRational::from_integer(BigInt::from(n_pts as u64));
        for v in &mut cur {
            *v /= &scale;
        }
    }
    cur
}

fn transform_approx(space: &Space, vals: &[Complex64], forward: bool) -> Vec<Complex64> {
    let f = &space.field;
    let q = f.order() as usize;
    let mut kernel = vec![Complex64::new(0.0, 0.0); q * q];
    for s in 0..q {
        for x in 0..q {
            let chi = f.char_complex(s as Elem, x as Elem);
            kernel[s * q + x] = if forward { chi.conj() } else { chi };
        }
    }
    let n_pts = space.points as usize;
    let mut cur = vals.to_vec();
    let mut gathered = vec![Complex64::new(0.0, 0.0); q];
    let mut stride = 1usize;
    for _ in 0..space.n * space.c {
        let block = stride * q;
        for base in (0..n_pts).step_by(block) {
            for off in 0..stride {
                for (t, slot) in gathered.iter_mut().enumerate() {
                    *slot = cur[base + off + t * stride];
                }
                for s in 0..q {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, val) in gathered.iter().enumerate() {
                        acc += kernel[s * q + x] * val;
                    }
                    cur[base + off + s * stride] = acc;
                }
            }
        }
        stride = block;
    }
    if forward {
        let scale = 1.0 / n_pts as f64;
        for v in &mut cur {
            *v *= scale;
        }
    }
    cur
}

fn fourier_raw(f: &MatrixSpaceFn) -> MatrixSpaceFn {
    let values = match &f.values {
        FnValues::Exact(v) => FnValues::Exact(transform_exact(&f.space, v, true)),
        FnValues::Approx(v) => FnValues::Approx(transform_approx(&f.space, v, true)),
    };
    MatrixSpaceFn {
        space: f.space.clone(),
        values,
    }
}

fn inverse_raw(hat: &MatrixSpaceFn) -> MatrixSpaceFn {
    let values = match &hat.values {
        FnValues::Exact(v) => FnValues::Exact(transform_exact(&hat.space, v, false)),
        FnValues::Approx(v) => FnValues::Approx(transform_approx(&hat.space, v, false)),
    };
    MatrixSpaceFn {
        space: hat.space.clone(),
        values,
    }
}

/// Total squared coefficient mass, the right-hand side of Parseval.
fn coefficient_mass(hat: &MatrixSpaceFn) -> Result<BigRational> {
    match &hat.values {
        FnValues::Exact(v) => {
            let mut acc = BigRational::zero();
            for x in v {
                acc += x * x;
            }
            Ok(acc)
        }
        FnValues::Approx(v) => rational_from_f64(v.iter().map(|z| z.norm_sqr()).sum::<f64>()),
    }
}

/// Fourier transform: the table of inner products against every character.
/// Verifies Parseval and the inverse round trip before returning, exactly in
/// characteristic 2 and within 1e-10 otherwise.
pub fn fourier(f: &MatrixSpaceFn) -> Result<MatrixSpaceFn> {
    let hat = fourier_raw(f);
    let mass = coefficient_mass(&hat)?;
    let energy = norm2_sq(f)?;
    let parseval_gap = (mass - energy).abs();
    let round_trip_gap = sup_distance(f, &inverse_raw(&hat))?;
    if f.is_exact() {
        if !parseval_gap.is_zero() {
            return Err(Error::logic("the transform lost mass; Parseval failed"));
        }
        if !round_trip_gap.is_zero() {
            return Err(Error::logic(
                "the inverse transform failed to reproduce the input",
            ));
        }
    } else {
        let tol = approx_tol_rational();
        if parseval_gap > tol {
            return Err(Error::logic("the transform lost mass; Parseval failed"));
        }
        if round_trip_gap > tol {
            return Err(Error::logic(
                "the inverse transform failed to reproduce the input",
            ));
        }
    }
    Ok(hat)
}

/// Rebuild a function from its coefficient table.
pub fn inverse_fourier(hat: &MatrixSpaceFn) -> MatrixSpaceFn {
    inverse_raw(hat)
}

fn rank_table(space: &Space) -> Vec<u8> {
    (0..space.points)
        .map(|idx| space.decode(idx).rank(&space.field) as u8)
        .collect()
}

/// The part of the function carried by characters of one fixed rank. Ranks
/// beyond min(n, c) carry nothing, so those components are zero.
pub fn level_component(f: &MatrixSpaceFn, d: usize) -> Result<MatrixSpaceFn> {
    let mut hat = fourier_raw(f);
    let ranks = rank_table(&f.space);
    match &mut hat.values {
        FnValues::Exact(v) => {
            for (val, &r) in v.iter_mut().zip(&ranks) {
                if usize::from(r) != d {
                    *val = BigRational::zero();
                }
            }
        }
        FnValues::Approx(v) => {
            for (val, &r) in v.iter_mut().zip(&ranks) {
                if usize::from(r) != d {
                    *val = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
    Ok(inverse_raw(&hat))
}

/// Which averaging operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    T,
    G,
    Phi,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::T => write!(out, "T"),
            OperatorKind::G => write!(out, "G"),
            OperatorKind::Phi => write!(out, "Phi"),
        }
    }
}

/// Apply one of the three averaging operators with the given column drop.
pub fn operators(f: &MatrixSpaceFn, which: OperatorKind, drop: usize) -> Result<MatrixSpaceFn> {
    match which {
        OperatorKind::T => t_operator(f, drop),
        OperatorKind::G => g_operator(f, drop),
        OperatorKind::Phi => phi_operator(f, drop),
    }
}

/// Shrink: average over every way of appending `drop` fresh columns. The
/// result lives on matrices with `drop` fewer columns.
pub fn t_operator(f: &MatrixSpaceFn, drop: usize) -> Result<MatrixSpaceFn> {
    if drop == 0 || drop >= f.space.c {
        return Err(Error::usage(
            "the shrink operator must drop between 1 and c-1 columns",
        ));
    }
    let small = Space::new(&f.space.field, f.space.n, f.space.c - drop)?;
    let keep = small.points as usize;
    let appended = f.space.points / small.points;
    let values = match &f.values {
        FnValues::Exact(v) => {
            let mut out = vec![BigRational::zero(); keep];
            for (idx, val) in v.iter().enumerate() {
                out[idx % keep] += val;
            }
            let scale = BigRational::from_integer(BigInt::from(appended));
            for o in &mut out {
                *o /= &scale;
            }
            FnValues::Exact(out)
        }
        FnValues::Approx(v) => {
            let mut out = vec![Complex64::new(0.0, 0.0); keep];
            for (idx, val) in v.iter().enumerate() {
                out[idx % keep] += val;
            }
            let scale = 1.0 / appended as f64;
            for o in &mut out {
                *o *= scale;
            }
            FnValues::Approx(out)
        }
    };
    Ok(MatrixSpaceFn {
        space: small,
        values,
    })
}

/// Grow: average over right multiplication by every full-column-rank map
/// from the wider shape down to the current one. The result lives on
/// matrices with `drop` more columns.
pub fn g_operator(f: &MatrixSpaceFn, drop: usize) -> Result<MatrixSpaceFn> {
    if drop == 0 {
        return Err(Error::usage("the grow operator must add at least one column"));
    }
    let field = &f.space.field;
    let big = Space::new(field, f.space.n, f.space.c + drop)?;
    let maps = enumerate_mats(field, f.space.c + drop, f.space.c, Some(f.space.c), WORK_CAP)?;
    (maps.len() as u64)
        .checked_mul(big.points)
        .filter(|&w| w <= WORK_CAP)
        .ok_or_else(|| Error::resource("the grow average exceeds the work budget"))?;
    let count = maps.len() as u64;
    let q = field.order();
    let values = match &f.values {
        FnValues::Exact(v) => {
            let mut out = Vec::with_capacity(big.points as usize);
            for idx in 0..big.points {
                let m = big.decode(idx);
                let mut acc = BigRational::zero();
                for a in &maps {
                    acc += &v[m.mul(field, a).index(q) as usize];
                }
                out.push(acc / BigRational::from_integer(BigInt::from(count)));
            }
            FnValues::Exact(out)
        }
        FnValues::Approx(v) => {
            let mut out = Vec::with_capacity(big.points as usize);
            for idx in 0..big.points {
                let m = big.decode(idx);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in &maps {
                    acc += v[m.mul(field, a).index(q) as usize];
                }
                out.push(acc / count as f64);
            }
            FnValues::Approx(out)
        }
    };
    Ok(MatrixSpaceFn { space: big, values })
}

/// Collect every shift BC with C of full row rank, with multiplicities.
fn shift_deltas(space: &Space, drop: usize) -> Result<(BTreeMap<u64, u64>, u64)> {
    let field = &space.field;
    let bs = enumerate_mats(field, space.n, drop, None, WORK_CAP)?;
    let cs = enumerate_mats(field, drop, space.c, Some(drop), WORK_CAP)?;
    let total = (bs.len() as u64)
        .checked_mul(cs.len() as u64)
        .filter(|&w| w <= WORK_CAP)
        .ok_or_else(|| Error::resource("the shift average exceeds the work budget"))?;
    let mut deltas: BTreeMap<u64, u64> = BTreeMap::new();
    for b in &bs {
        for cm in &cs {
            let idx = b.mul(field, cm).index(field.order());
            *deltas.entry(idx).or_insert(0) += 1;
        }
    }
    Ok((deltas, total))
}

/// Average over the low-rank shifts M + BC, where C has full row rank.
pub fn phi_operator(f: &MatrixSpaceFn, drop: usize) -> Result<MatrixSpaceFn> {
    if drop == 0 || drop > f.space.c {
        return Err(Error::usage(
            "the shift operator needs a drop between 1 and the column count",
        ));
    }
    let (deltas, total) = shift_deltas(&f.space, drop)?;
    (deltas.len() as u64)
        .checked_mul(f.space.points)
        .filter(|&w| w <= WORK_CAP)
        .ok_or_else(|| Error::resource("the shift average exceeds the work budget"))?;
    let space = f.space.clone();
    let values = match &f.values {
        FnValues::Exact(v) => {
            let mut out = Vec::with_capacity(space.points as usize);
            for idx in 0..space.points {
                let mut acc = BigRational::zero();
                for (&delta, &count) in &deltas {
                    let shifted = space.add_indices(idx, delta);
                    acc += &v[shifted as usize] * BigRational::from_integer(BigInt::from(count));
                }
                out.push(acc / BigRational::from_integer(BigInt::from(total)));
            }
            FnValues::Exact(out)
        }
        FnValues::Approx(v) => {
            let mut out = Vec::with_capacity(space.points as usize);
            for idx in 0..space.points {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&delta, &count) in &deltas {
                    let shifted = space.add_indices(idx, delta);
                    acc += v[shifted as usize] * count as f64;
                }
                out.push(acc / total as f64);
            }
            FnValues::Approx(out)
        }
    };
    Ok(MatrixSpaceFn { space, values })
}

fn q_power(field: &Field, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(BigUint::from(u64::from(field.order())).pow(e)))
}

fn q_power_signed(field: &Field, e: i64) -> BigRational {
    let mag = q_power(field, e.unsigned_abs().try_into().expect("tiny exponent"));
    if e >= 0 {
        mag
    } else {
        mag.recip()
    }
}

fn real_string(x: &BigRational, exact: bool) -> String {
    if exact {
        compact_rational(x)
    } else {
        format!("{:.12}", x.to_f64().unwrap_or(f64::NAN))
    }
}

/// Report on one character eigenvalue of the shift-averaging operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiEigenvalue {
    pub rank: usize,
    pub value: String,
    pub value_re: f64,
    pub value_im: f64,
    pub magnitude: String,
    pub bound: String,
    pub within_bound: bool,
    pub exact: bool,
    pub shifts: u64,
}

/// Eigenvalue of the shift-averaging operator on the character indexed by S,
/// computed by enumerating every shift pair. Rank zero must come out as
/// exactly one, and positive ranks must stay inside
/// 3 q^(rank - n) + q^(-rank (drop - 1)).
pub fn phi_eigenvalue(
    field: &Arc<Field>,
    n: usize,
    c: usize,
    s_rows: &[Vec<Elem>],
    drop: usize,
) -> Result<PhiEigenvalue> {
    let space = Space::new(field, n, c)?;
    let _ = space;
    if s_rows.len() != n {
        return Err(Error::usage(format!(
            "the character index needs {n} rows, found {}",
            s_rows.len()
        )));
    }
    let s = Mat::from_rows(s_rows, c, field.order())?;
    if drop == 0 || drop > c {
        return Err(Error::usage(
            "the shift operator needs a drop between 1 and the column count",
        ));
    }
    let bs = enumerate_mats(field, n, drop, None, WORK_CAP)?;
    let cs = enumerate_mats(field, drop, c, Some(drop), WORK_CAP)?;
    let shifts = (bs.len() as u64)
        .checked_mul(cs.len() as u64)
        .filter(|&w| w <= WORK_CAP)
        .ok_or_else(|| Error::resource("the eigenvalue enumeration exceeds the work budget"))?;
    let rank = s.rank(field);
    let exact = field.characteristic() == 2;
    let (value, value_re, value_im, magnitude) = if exact {
        let mut sum = BigInt::zero();
        for b in &bs {
            for cm in &cs {
                let shift = b.mul(field, cm);
                if field.trace(s.dot(field, &shift)) == 0 {
                    sum += 1;
                } else {
                    sum -= 1;
                }
            }
        }
        let lambda = BigRational::new(sum, BigInt::from(shifts));
        let re = lambda.to_f64().unwrap_or(f64::NAN);
        let mag = lambda.abs();
        (lambda.to_string(), re, 0.0, mag)
    } else {
        let p = field.characteristic();
        let mut sum = Complex64::new(0.0, 0.0);
        for b in &bs {
            for cm in &cs {
                let shift = b.mul(field, cm);
                sum += omega_pow(p, field.trace(s.dot(field, &shift)));
            }
        }
        let lambda = sum / shifts as f64;
        let mag = rational_from_f64(lambda.norm())?;
        (
            format!("{:.12}{:+.12}i", lambda.re, lambda.im),
            lambda.re,
            lambda.im,
            mag,
        )
    };
    if rank == 0 {
        let is_one = if exact {
            magnitude.is_one() && value_re > 0.0
        } else {
            (value_re - 1.0).abs() <= APPROX_TOL && value_im.abs() <= APPROX_TOL
        };
        if !is_one {
            return Err(Error::logic(
                "the zero character must be fixed with eigenvalue one",
            ));
        }
        return Ok(PhiEigenvalue {
            rank,
            value,
            value_re,
            value_im,
            magnitude: real_string(&magnitude, exact),
            bound: "1".into(),
            within_bound: true,
            exact,
            shifts,
        });
    }
    let bound = BigRational::from_integer(BigInt::from(3))
        * q_power_signed(field, rank as i64 - n as i64)
        + q_power_signed(field, -((rank * (drop - 1)) as i64));
    let within_bound = if exact {
        magnitude <= bound
    } else {
        magnitude <= &bound + approx_tol_rational()
    };
    if !within_bound {
        return Err(Error::logic(format!(
            "a rank-{rank} character eigenvalue escaped its bound"
        )));
    }
    Ok(PhiEigenvalue {
        rank,
        value,
        value_re,
        value_im,
        magnitude: real_string(&magnitude, exact),
        bound: bound.to_string(),
        within_bound,
        exact,
        shifts,
    })
}

/// A zoom set inside one matrix space: the solutions M of MU = V and XM = Y.
#[derive(Debug, Clone)]
pub struct MatrixZoom {
    space: Space,
    u: Mat,
    v: Mat,
    x: Mat,
    y: Mat,
    size: usize,
    solution: Option<(Vec<Elem>, Vec<Vec<Elem>>)>,
}

fn shaped_rows(rows: &[Vec<Elem>], want_rows: usize, q: u32, what: &str) -> Result<Mat> {
    if rows.is_empty() {
        return Ok(Mat::zero(want_rows, 0));
    }
    if rows.len() != want_rows {
        return Err(Error::usage(format!(
            "{what} needs {want_rows} rows, found {}",
            rows.len()
        )));
    }
    Mat::from_rows(rows, rows[0].len(), q)
}

impl MatrixZoom {
    /// Zoom on both sides: pin MU = V and XM = Y. Pass empty slices for a
    /// side that does not constrain anything.
    pub fn new(
        field: &Arc<Field>,
        n: usize,
        c: usize,
        u: &[Vec<Elem>],
        v: &[Vec<Elem>],
        x: &[Vec<Elem>],
        y: &[Vec<Elem>],
    ) -> Result<Self> {
        let space = Space::new(field, n, c)?;
        let q = field.order();
        let um = shaped_rows(u, c, q, "the zoom-in map")?;
        let vm = shaped_rows(v, n, q, "the zoom-in target")?;
        if um.cols != vm.cols {
            return Err(Error::usage(
                "the zoom-in pair needs matching column counts",
            ));
        }
        let xm = Mat::from_rows(x, n, q)?;
        let ym = Mat::from_rows(y, c, q)?;
        if xm.rows != ym.rows {
            return Err(Error::usage(
                "the zoom-out pair needs matching row counts",
            ));
        }
        Self::from_mats(space, um, vm, xm, ym)
    }

    fn from_mats(space: Space, u: Mat, v: Mat, x: Mat, y: Mat) -> Result<Self> {
        let field = &space.field;
        let (n, c) = (space.n, space.c);
        let cells = n * c;
        let mut rows: Vec<Vec<Elem>> = Vec::new();
        let mut rhs: Vec<Elem> = Vec::new();
        // MU = V, one equation per target cell (i, t).
        for t in 0..u.cols {
            for i in 0..n {
                let mut row = vec![0 as Elem; cells];
                for j in 0..c {
                    row[j * n + i] = u.at(j, t);
                }
                rows.push(row);
                rhs.push(v.at(i, t));
            }
        }
        // XM = Y, one equation per target cell (s, j).
        for srow in 0..x.rows {
            for j in 0..c {
                let mut row = vec![0 as Elem; cells];
                for i in 0..n {
                    row[j * n + i] = x.at(srow, i);
                }
                rows.push(row);
                rhs.push(y.at(srow, j));
            }
        }
        // With no equations the system solver has nothing to infer the
        // unknown count from, so the free solution is built directly.
        let solution = if rows.is_empty() {
            let kernel = (0..cells)
                .map(|k| {
                    let mut e = vec![0 as Elem; cells];
                    e[k] = 1;
                    e
                })
                .collect();
            Some((vec![0 as Elem; cells], kernel))
        } else {
            crate::subspace::solve_linear_system(field, &rows, &rhs)
        };
        let size = u.rank(field) + x.rank(field);
        Ok(MatrixZoom {
            space,
            u,
            v,
            x,
            y,
            size,
            solution,
        })
    }

    /// Zoom-in only: the matrices with MU = V.
    pub fn zoom_in(
        field: &Arc<Field>,
        n: usize,
        c: usize,
        u: &[Vec<Elem>],
        v: &[Vec<Elem>],
    ) -> Result<Self> {
        Self::new(field, n, c, u, v, &[], &[])
    }

    /// Zoom-out only: the matrices with XM = Y.
    pub fn zoom_out(
        field: &Arc<Field>,
        n: usize,
        c: usize,
        x: &[Vec<Elem>],
        y: &[Vec<Elem>],
    ) -> Result<Self> {
        Self::new(field, n, c, &[], &[], x, y)
    }

    /// The unconstrained zoom, covering the whole space.
    pub fn whole(field: &Arc<Field>, n: usize, c: usize) -> Result<Self> {
        Self::new(field, n, c, &[], &[], &[], &[])
    }

    pub fn nonempty(&self) -> bool {
        self.solution.is_some()
    }

    /// Rank of the zoom-in map plus rank of the zoom-out map.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn member_count(&self) -> u64 {
        match &self.solution {
            None => 0,
            Some((_, kernel)) => {
                let q = u64::from(self.space.field.order());
                q.pow(kernel.len() as u32)
            }
        }
    }

    /// Table indices of every member, by walking the affine solution set.
    pub fn member_indices(&self) -> Vec<u64> {
        let Some((particular, kernel)) = &self.solution else {
            return Vec::new();
        };
        let field = &self.space.field;
        let q = u64::from(field.order());
        let combos = q.pow(kernel.len() as u32);
        let mut out = Vec::with_capacity(combos as usize);
        for combo in 0..combos {
            let mut flat = particular.clone();
            let mut rest = combo;
            for basis in kernel {
                let digit = (rest % q) as Elem;
                rest /= q;
                if digit != 0 {
                    for (cell, &b) in flat.iter_mut().zip(basis) {
                        *cell = field.add(*cell, field.mul(digit, b));
                    }
                }
            }
            let mut idx = 0u64;
            for &cell in flat.iter().rev() {
                idx = idx * q + u64::from(cell);
            }
            out.push(idx);
        }
        out
    }

    /// Mean of |F|^2 over the zoom set.
    pub fn restriction_norm(&self, f: &MatrixSpaceFn) -> Result<BigRational> {
        if !self.space.same_shape(&f.space) {
            return Err(Error::usage("the zoom and the table live on different spaces"));
        }
        let members = self.member_indices();
        if members.is_empty() {
            return Err(Error::domain("the zoom set is empty"));
        }
        match &f.values {
            FnValues::Exact(v) => {
                let mut acc = BigRational::zero();
                for &idx in &members {
                    let x = &v[idx as usize];
                    acc += x * x;
                }
                Ok(acc / BigRational::from_integer(BigInt::from(members.len() as u64)))
            }
            FnValues::Approx(v) => {
                let mean = members
                    .iter()
                    .map(|&idx| v[idx as usize].norm_sqr())
                    .sum::<f64>()
                    / members.len() as f64;
                rational_from_f64(mean)
            }
        }
    }

    fn witness(&self, norm: &BigRational, exact: bool) -> RestrictionWitness {
        RestrictionWitness {
            u: self.u.to_rows(),
            v: self.v.to_rows(),
            x: self.x.to_rows(),
            y: self.y.to_rows(),
            norm: real_string(norm, exact),
            members: self.member_count(),
        }
    }
}

/// One worst-case restriction out of a pseudo-randomness scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestrictionWitness {
    pub u: Vec<Vec<Elem>>,
    pub v: Vec<Vec<Elem>>,
    pub x: Vec<Vec<Elem>>,
    pub y: Vec<Vec<Elem>>,
    pub norm: String,
    pub members: u64,
}

/// Result of an exhaustive restriction scan at one size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoRandomReport {
    pub d: usize,
    pub epsilon: String,
    pub pseudo_random: bool,
    pub worst_norm: String,
    pub worst: Option<RestrictionWitness>,
    pub restrictions: u64,
    pub exact: bool,
}

fn worst_restriction(
    f: &MatrixSpaceFn,
    d: usize,
) -> Result<(BigRational, Option<RestrictionWitness>, u64)> {
    let space = &f.space;
    let field = &space.field;
    let exact = f.is_exact();
    let mut worst = BigRational::zero();
    let mut witness: Option<RestrictionWitness> = None;
    let mut seen: u64 = 0;
    let mut work: u64 = 0;
    for d_in in 0..=d.min(space.c) {
        let d_out = d - d_in;
        if d_out > space.n {
            continue;
        }
        let us = enumerate_mats(field, space.c, d_in, Some(d_in), WORK_CAP)?;
        let vs = enumerate_mats(field, space.n, d_in, None, WORK_CAP)?;
        let xs = enumerate_mats(field, d_out, space.n, Some(d_out), WORK_CAP)?;
        let ys = enumerate_mats(field, d_out, space.c, None, WORK_CAP)?;
        let tuples = (us.len() as u64)
            .checked_mul(vs.len() as u64)
            .and_then(|t| t.checked_mul(xs.len() as u64))
            .and_then(|t| t.checked_mul(ys.len() as u64))
            .filter(|&t| t <= WORK_CAP)
            .ok_or_else(|| Error::resource("the restriction scan exceeds the work budget"))?;
        let _ = tuples;
        for u in &us {
            for v in &vs {
                for x in &xs {
                    for y in &ys {
                        let zoom = MatrixZoom::from_mats(
                            space.clone(),
                            u.clone(),
                            v.clone(),
                            x.clone(),
                            y.clone(),
                        )?;
                        if !zoom.nonempty() {
                            continue;
                        }
                        work += zoom.member_count();
                        if work > WORK_CAP {
                            return Err(Error::resource(
                                "the restriction scan exceeds the work budget",
                            ));
                        }
                        seen += 1;
                        let norm = zoom.restriction_norm(f)?;
                        if norm > worst || witness.is_none() {
                            witness = Some(zoom.witness(&norm, exact));
                            worst = norm;
                        }
                    }
                }
            }
        }
    }
    Ok((worst, witness, seen))
}

/// Exhaustive scan of every size-d restriction against a target bound.
pub fn pseudorandomness_check(
    f: &MatrixSpaceFn,
    d: usize,
    epsilon: &BigRational,
) -> Result<PseudoRandomReport> {
    let (worst, witness, restrictions) = worst_restriction(f, d)?;
    Ok(PseudoRandomReport {
        d,
        epsilon: epsilon.to_string(),
        pseudo_random: &worst <= epsilon,
        worst_norm: real_string(&worst, f.is_exact()),
        worst: witness,
        restrictions,
        exact: f.is_exact(),
    })
}

fn log2_biguint(u: &BigUint) -> f64 {
    let bits = u.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        (u.to_u64().expect("fits") as f64).log2()
    } else {
        let shift = bits - 53;
        let top = (u >> shift).to_u64().expect("53 bits fit") as f64;
        top.log2() + shift as f64
    }
}

fn log2_rational(x: &BigRational) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    Some(log2_biguint(x.numer().magnitude()) - log2_biguint(x.denom().magnitude()))
}

/// Rational rendering that falls back to a power-of-two magnitude once the
/// exact digits stop being readable.
fn compact_rational(x: &BigRational) -> String {
    let bits = x.numer().magnitude().bits() + x.denom().magnitude().bits();
    if bits <= 256 {
        return x.to_string();
    }
    let log = log2_rational(&x.abs()).expect("nonzero");
    if x.is_negative() {
        format!("-2^{log:.3}")
    } else {
        format!("2^{log:.3}")
    }
}

/// base^(num/den), enclosed in exact rational bounds of width 2^-bits.
fn pow_frac_interval(
    base: &BigRational,
    num: i64,
    den: u32,
    bits: u64,
) -> Result<(BigRational, BigRational)> {
    if base.is_negative() {
        return Err(Error::logic("fractional powers need nonnegative bases"));
    }
    if den == 0 {
        return Err(Error::logic("fractional powers need a positive root degree"));
    }
    if base.is_zero() {
        return match num.cmp(&0) {
            std::cmp::Ordering::Greater => Ok((BigRational::zero(), BigRational::zero())),
            std::cmp::Ordering::Equal => Ok((BigRational::one(), BigRational::one())),
            std::cmp::Ordering::Less => {
                Err(Error::logic("zero base with a negative exponent"))
            }
        };
    }
    let expon: i32 = num
        .try_into()
        .map_err(|_| Error::logic("fractional power exponent out of range"))?;
    let powered = base.pow(expon);
    if den == 1 {
        return Ok((powered.clone(), powered));
    }
    let a = powered.numer().magnitude().clone();
    let b = powered.denom().magnitude().clone();
    let m = &a * b.pow(den - 1);
    let scaled = m << (u64::from(den) * bits);
    let root = scaled.nth_root(den);
    let denom = BigInt::from(b) << bits;
    let lo = BigRational::new(BigInt::from(root.clone()), denom.clone());
    let hi = BigRational::new(BigInt::from(root + BigUint::one()), denom);
    Ok((lo, hi))
}

/// One product term coeff * prod base_i^(num_i/den_i), all pieces nonnegative.
struct PowTerm {
    coeff: BigRational,
    factors: Vec<(BigRational, i64, u32)>,
}

fn eval_terms(terms: &[PowTerm], bits: u64) -> Result<(BigRational, BigRational)> {
    let mut lo_sum = BigRational::zero();
    let mut hi_sum = BigRational::zero();
    for term in terms {
        let mut lo = term.coeff.clone();
        let mut hi = term.coeff.clone();
        for (base, num, den) in &term.factors {
            let (flo, fhi) = pow_frac_interval(base, *num, *den, bits)?;
            lo *= flo;
            hi *= fhi;
        }
        lo_sum += lo;
        hi_sum += hi;
    }
    Ok((lo_sum, hi_sum))
}

fn decide_le(
    lhs: &BigRational,
    terms: &[PowTerm],
) -> Result<(bool, BigRational, BigRational)> {
    for bits in [64u64, 128, 256, 512, 1024] {
        let (lo, hi) = eval_terms(terms, bits)?;
        if lhs <= &lo {
            return Ok((true, lo, hi));
        }
        if lhs > &hi {
            return Ok((false, lo, hi));
        }
    }
    Err(Error::logic(
        "interval refinement failed to separate an inequality",
    ))
}

/// Both sides of one evaluated inequality. When `powered_by` is above one,
/// the recorded sides are both raised to that power, which preserves the
/// verdict for nonnegative quantities while keeping the arithmetic rational.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: String,
    pub rhs_lo: String,
    pub rhs_hi: String,
    pub holds: bool,
    pub powered_by: u32,
    pub slack_log2: Option<f64>,
    pub exact: bool,
}

fn slack_between(lhs: &BigRational, rhs: &BigRational) -> Option<f64> {
    let num = log2_rational(rhs)?;
    let den = log2_rational(lhs)?;
    Some(num - den)
}

fn bound_check_direct(
    lhs: &BigRational,
    rhs: &BigRational,
    powered_by: u32,
    exact: bool,
) -> BoundCheck {
    BoundCheck {
        lhs: real_string(lhs, true),
        rhs_lo: compact_rational(rhs),
        rhs_hi: compact_rational(rhs),
        holds: lhs <= rhs,
        powered_by,
        slack_log2: slack_between(lhs, rhs),
        exact,
    }
}

fn bound_check_terms(
    lhs: &BigRational,
    terms: &[PowTerm],
    powered_by: u32,
    exact: bool,
) -> Result<BoundCheck> {
    let (holds, lo, hi) = decide_le(lhs, terms)?;
    Ok(BoundCheck {
        lhs: real_string(lhs, true),
        rhs_lo: compact_rational(&lo),
        rhs_hi: compact_rational(&hi),
        holds,
        powered_by,
        slack_log2: slack_between(lhs, &hi),
        exact,
    })
}

fn validate_t(t: u32) -> Result<()> {
    if t < 4 || t.count_ones() != 1 {
        return Err(Error::usage(
            "the norm exponent must be a power of two, at least 4",
        ));
    }
    Ok(())
}

fn checked_exp(e: u64) -> Result<u32> {
    if e > (1 << 20) {
        return Err(Error::resource(format!(
            "a bound constant with exponent {e} is too large to materialize"
        )));
    }
    Ok(e as u32)
}

fn require_boolean(f: &MatrixSpaceFn) -> Result<()> {
    if !is_boolean(f) {
        return Err(Error::usage(
            "this spot check is stated for indicator tables",
        ));
    }
    Ok(())
}

/// Spot check of the level t-norm bound: with epsilon the worst size-r
/// restriction norm, the rank-d component must satisfy
/// |F^(=d)|_t <= q^(500 d^2 t) epsilon^((t-2)/t). Both sides are compared
/// after raising to the t-th power, which keeps everything rational.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelTNormReport {
    pub d: usize,
    pub r: usize,
    pub t: u32,
    pub epsilon: String,
    pub epsilon_witness: Option<RestrictionWitness>,
    pub check: BoundCheck,
}

pub fn level_t_norm_check(
    f: &MatrixSpaceFn,
    d: usize,
    r: usize,
    t: u32,
) -> Result<LevelTNormReport> {
    validate_t(t)?;
    if d > r {
        return Err(Error::usage(
            "the level must not exceed the restriction size",
        ));
    }
    require_boolean(f)?;
    let (eps, eps_witness, _) = worst_restriction(f, r)?;
    let comp = level_component(f, d)?;
    let lhs = norm_t_pow(&comp, t)?;
    let e = checked_exp(500 * (d as u64) * (d as u64) * u64::from(t) * u64::from(t))?;
    let rhs = q_power(&f.space.field, e) * eps.pow((t - 2) as i32);
    Ok(LevelTNormReport {
        d,
        r,
        t,
        epsilon: real_string(&eps, f.is_exact()),
        epsilon_witness: eps_witness,
        check: bound_check_direct(&lhs, &rhs, t, f.is_exact()),
    })
}

/// Spot check of the level-one bound: with epsilon the worst size-1
/// restriction norm, |F^(=1)|_2^2 <= q^(460 t) |F|_2^2 epsilon^(1-2/t).
/// Compared after raising both sides to the t-th power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelOneReport {
    pub t: u32,
    pub epsilon: String,
    pub epsilon_witness: Option<RestrictionWitness>,
    pub check: BoundCheck,
}

pub fn level_one_check(f: &MatrixSpaceFn, t: u32) -> Result<LevelOneReport> {
    validate_t(t)?;
    require_boolean(f)?;
    let (eps, eps_witness, _) = worst_restriction(f, 1)?;
    let comp = level_component(f, 1)?;
    let lhs = norm2_sq(&comp)?.pow(t as i32);
    let e = checked_exp(460 * u64::from(t) * u64::from(t))?;
    let rhs = q_power(&f.space.field, e) * norm2_sq(f)?.pow(t as i32) * eps.pow((t - 2) as i32);
    Ok(LevelOneReport {
        t,
        epsilon: real_string(&eps, f.is_exact()),
        epsilon_witness: eps_witness,
        check: bound_check_direct(&lhs, &rhs, t, f.is_exact()),
    })
}

/// Worst zoom density of a subspace family over all windows with
/// dim(anchor) + codim(outer) equal to the given size.
fn grassmann_worst_restriction(
    field: &Arc<Field>,
    n: usize,
    dim_l: usize,
    set: &BTreeSet<Subspace>,
    size: usize,
) -> Result<BigRational> {
    let full = Subspace::full(field, n)?;
    let zero = Subspace::zero(field, n)?;
    let mut worst = BigRational::zero();
    for a in 0..=size.min(dim_l) {
        let co = size - a;
        if co + dim_l > n {
            continue;
        }
        let anchors = ZoomPair::new(zero.clone(), full.clone())?.enumerate(a, WORK_CAP)?;
        for anchor in &anchors {
            let outers = ZoomPair::new(anchor.clone(), full.clone())?.enumerate(n - co, WORK_CAP)?;
            for outer in &outers {
                let members = ZoomPair::new(anchor.clone(), outer.clone())?
                    .enumerate(dim_l, WORK_CAP)?;
                if members.is_empty() {
                    continue;
                }
                let inside = members.iter().filter(|m| set.contains(m)).count();
                let density = BigRational::new(
                    BigInt::from(inside),
                    BigInt::from(members.len()),
                );
                if density > worst {
                    worst = density;
                }
            }
        }
    }
    Ok(worst)
}

/// Spot check of the edge bound for a pair of subspace families, one on each
/// side of a column drop. Verifies the exact incidence probability against
/// twice the shrink inner product, checks that lifting the left family to an
/// indicator table keeps its worst restriction within a factor of two, and
/// then evaluates the full bound with an explicit constant in place of the
/// unspecified one: 4 times the sum of q^(500 d^2 t) over d up to r.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeCountReport {
    pub n: usize,
    pub c: usize,
    pub drop: usize,
    pub r: usize,
    pub t: u32,
    pub incidence: String,
    pub operator_inner: String,
    pub lift_bound_ok: bool,
    pub family_epsilon: String,
    pub lifted_epsilon: String,
    pub lift_pseudorandom_ok: bool,
    pub alpha: String,
    pub beta: String,
    pub implied_constant: String,
    pub check: BoundCheck,
}

pub fn edge_count_check(
    field: &Arc<Field>,
    n: usize,
    c: usize,
    drop: usize,
    left: &[Subspace],
    right: &[Subspace],
    r: usize,
    t: u32,
) -> Result<EdgeCountReport> {
    validate_t(t)?;
    if drop == 0 || drop >= c {
        return Err(Error::usage(
            "the drop must leave at least one column on the small side",
        ));
    }
    if r == 0 {
        return Err(Error::usage("the restriction size must be positive"));
    }
    let big_fn = MatrixSpaceFn::lift_family(field, n, c, left)?;
    let small_fn = MatrixSpaceFn::lift_family(field, n, c - drop, right)?;
    let exact = big_fn.is_exact();
    let left_set: BTreeSet<Subspace> = left.iter().cloned().collect();
    let right_set: BTreeSet<Subspace> = right.iter().cloned().collect();

    let zero = Subspace::zero(field, n)?;
    let full = Subspace::full(field, n)?;
    let bigs = ZoomPair::new(zero.clone(), full)?.enumerate(c, WORK_CAP)?;
    let mut pair_total: u64 = 0;
    let mut pair_hits: u64 = 0;
    for l in &bigs {
        let smalls = ZoomPair::new(zero.clone(), l.clone())?.enumerate(c - drop, WORK_CAP)?;
        pair_total += smalls.len() as u64;
        if left_set.contains(l) {
            pair_hits += smalls.iter().filter(|s| right_set.contains(s)).count() as u64;
        }
    }
    if pair_total == 0 {
        return Err(Error::domain("no incidence pairs exist at these dimensions"));
    }
    let incidence = BigRational::new(BigInt::from(pair_hits), BigInt::from(pair_total));

    let shrunk = t_operator(&big_fn, drop)?;
    let ip = inner(&shrunk, &small_fn)?;
    if ip.im().abs() > APPROX_TOL {
        return Err(Error::logic("a real inner product came out complex"));
    }
    let ip_real = match &ip {
        ScalarValue::Exact(x) => x.clone(),
        ScalarValue::Complex(z) => rational_from_f64(z.re)?,
    };
    let two = BigRational::from_integer(BigInt::from(2));
    let lift_bound_ok = if exact {
        incidence <= &two * &ip_real
    } else {
        incidence <= &two * &ip_real + approx_tol_rational()
    };

    let family_eps = grassmann_worst_restriction(field, n, c, &left_set, r)?;
    let (lifted_eps, _, _) = worst_restriction(&big_fn, r)?;
    let lift_pseudorandom_ok = if exact {
        lifted_eps <= &two * &family_eps
    } else {
        lifted_eps <= &two * &family_eps + approx_tol_rational()
    };

    let alpha = norm2_sq(&big_fn)?;
    let beta = norm2_sq(&small_fn)?;
    let mut constant = BigRational::zero();
    for level in 0..=r {
        let e = checked_exp(500 * (level as u64) * (level as u64) * u64::from(t))?;
        constant += q_power(field, e);
    }
    constant *= BigRational::from_integer(BigInt::from(4));
    let q_rat = BigRational::from_integer(BigInt::from(u64::from(field.order())));
    let terms = [
        PowTerm {
            coeff: constant.clone(),
            factors: vec![
                (beta.clone(), i64::from(t) - 1, t),
                (family_eps.clone(), i64::from(t) - 2, t),
            ],
        },
        PowTerm {
            coeff: two,
            factors: vec![
                (q_rat, -((r * drop) as i64), 2),
                (alpha.clone(), 1, 2),
                (beta.clone(), 1, 2),
            ],
        },
    ];
    let check = bound_check_terms(&incidence, &terms, 1, exact)?;
    Ok(EdgeCountReport {
        n,
        c,
        drop,
        r,
        t,
        incidence: incidence.to_string(),
        operator_inner: real_string(&ip_real, exact),
        lift_bound_ok,
        family_epsilon: real_string(&family_eps, true),
        lifted_epsilon: real_string(&lifted_eps, exact),
        lift_pseudorandom_ok,
        alpha: real_string(&alpha, exact),
        beta: real_string(&beta, exact),
        implied_constant: compact_rational(&constant),
        check,
    })
}

/// One zoom-out examined by the loud-coefficient check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierFactCase {
    pub w: SubspaceData,
    pub mu_w: String,
    pub deviation: String,
    pub witness_columns: Option<Vec<Vec<Elem>>>,
    pub witness_magnitude: Option<String>,
    pub ok: bool,
}

/// Spot check: whenever restricting to a codimension-r subspace moves the
/// family density by at least a hundredth of itself, some nonzero character
/// supported on the dual must carry a coefficient of at least
/// eta / (20 q^(r j)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierFactReport {
    pub j: usize,
    pub r: usize,
    pub eta: String,
    pub threshold: String,
    pub assumptions_met: bool,
    pub scanned: u64,
    pub cases: Vec<FourierFactCase>,
    pub holds: bool,
}

fn family_shape(family: &[Subspace]) -> Result<(Arc<Field>, usize, usize)> {
    let first = family
        .first()
        .ok_or_else(|| Error::usage("the family fixes the ambient space, so it cannot be empty"))?;
    let field = Arc::clone(first.field());
    let n = first.ambient();
    let dim = first.dim();
    for s in family {
        if s.field() != &field || s.ambient() != n {
            return Err(Error::usage(
                "family members live in a different ambient space",
            ));
        }
        if s.dim() != dim {
            return Err(Error::usage("family members must share one dimension"));
        }
    }
    Ok((field, n, dim))
}

pub fn fourier_fact_check(family: &[Subspace], r: usize) -> Result<FourierFactReport> {
    let (field, n, j) = family_shape(family)?;
    if j == 0 {
        return Err(Error::usage("zero-dimensional members carry no signal"));
    }
    if r == 0 || r + j > n {
        return Err(Error::usage(
            "the zoom-outs must keep room for the family dimension",
        ));
    }
    let set: BTreeSet<Subspace> = family.iter().cloned().collect();
    let lifted = MatrixSpaceFn::lift_family(&field, n, j, family)?;
    let exact = lifted.is_exact();
    let hat = fourier_raw(&lifted);
    let grass_total = gaussian_binomial(n as u32, j as u32, field.order())?;
    let eta = BigRational::new(
        BigInt::from(set.len()),
        BigInt::from(grass_total),
    );
    let threshold = &eta
        / (BigRational::from_integer(BigInt::from(20))
            * q_power(&field, (r * j) as u32));
    let zero = Subspace::zero(&field, n)?;
    let full = Subspace::full(&field, n)?;
    let outs = ZoomPair::new(zero.clone(), full)?.enumerate(n - r, WORK_CAP)?;
    let q = u64::from(field.order());
    let mut cases = Vec::new();
    for w in &outs {
        let members = ZoomPair::new(zero.clone(), w.clone())?.enumerate(j, WORK_CAP)?;
        if members.is_empty() {
            continue;
        }
        let inside = members.iter().filter(|m| set.contains(m)).count();
        let mu = BigRational::new(BigInt::from(inside), BigInt::from(members.len()));
        let deviation = (&mu - &eta).abs();
        if &deviation * BigRational::from_integer(BigInt::from(100)) < eta {
            continue;
        }
        // Scan every nonzero character whose columns sit in the dual of W.
        let duals: Vec<Vec<Elem>> = w.perp().members().collect();
        let combos = (duals.len() as u64)
            .checked_pow(j as u32)
            .filter(|&t| t <= WORK_CAP)
            .ok_or_else(|| Error::resource("the dual character scan exceeds the work budget"))?;
        let mut best: Option<(Mat, BigRational)> = None;
        for combo in 0..combos {
            let mut rest = combo;
            let mut s = Mat::zero(n, j);
            let mut all_zero = true;
            for col in 0..j {
                let pick = &duals[(rest % duals.len() as u64) as usize];
                rest /= duals.len() as u64;
                for (i, &val) in pick.iter().enumerate() {
                    if val != 0 {
                        all_zero = false;
                    }
                    s.set(i, col, val);
                }
            }
            if all_zero {
                continue;
            }
            let magnitude = hat.value(s.index(field.order()))?.magnitude()?;
            if best.as_ref().map_or(true, |(_, m)| &magnitude > m) {
                best = Some((s, magnitude));
            }
        }
        let _ = q;
        let (witness_columns, witness_magnitude, ok) = match &best {
            Some((s, mag)) => (
                Some((0..j).map(|col| s.col(col)).collect()),
                Some(real_string(mag, exact)),
                mag >= &threshold,
            ),
            None => (None, None, false),
        };
        cases.push(FourierFactCase {
            w: w.to_data(),
            mu_w: mu.to_string(),
            deviation: deviation.to_string(),
            witness_columns,
            witness_magnitude,
            ok,
        });
    }
    // The stated hypotheses need n beyond q^j and a not-too-small eta; at
    // desk scale they rarely hold, so the flag travels with the verdict.
    let q_big = BigUint::from(u64::from(field.order()));
    let n_ok = BigUint::from(n as u64) > q_big.pow(j as u32);
    let eta_ok = eta
        >= BigRational::from_integer(BigInt::from(100 * j as u64))
            * q_power_signed(&field, j as i64 - n as i64);
    let holds = cases.iter().all(|c| c.ok);
    Ok(FourierFactReport {
        j,
        r,
        eta: eta.to_string(),
        threshold: threshold.to_string(),
        assumptions_met: n_ok && eta_ok,
        scanned: outs.len() as u64,
        cases,
        holds,
    })
}

/// Spot check: a family must cover almost every point evenly, with the
/// fraction of points whose zoom-in density sits within a tenth of the
/// global density at least 1 - q^(-l'/2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvenCoveringReport {
    pub l_prime: usize,
    pub eta: String,
    pub family_eps_size1: String,
    pub z_fraction: String,
    pub off_points: u64,
    pub check: BoundCheck,
}

pub fn even_covering_check(family: &[Subspace]) -> Result<EvenCoveringReport> {
    let (field, n, l_prime) = family_shape(family)?;
    if l_prime == 0 {
        return Err(Error::usage("zero-dimensional members cover nothing"));
    }
    let set: BTreeSet<Subspace> = family.iter().cloned().collect();
    let grass_total = gaussian_binomial(n as u32, l_prime as u32, field.order())?;
    let eta = BigRational::new(BigInt::from(set.len()), BigInt::from(grass_total));
    let full = Subspace::full(&field, n)?;
    let q = u64::from(field.order());
    let points = q.pow(n as u32);
    let ten = BigRational::from_integer(BigInt::from(10));
    // The zero vector sits in every subspace, so its local density is the
    // global one and it always lands inside Z.
    let mut in_z: u64 = 1;
    for idx in 1..points {
        let v = index_vector(&field, n, idx);
        let line = Subspace::canonicalize(&field, n, vec![v])?;
        let members = ZoomPair::new(line, full.clone())?.enumerate(l_prime, WORK_CAP)?;
        if members.is_empty() {
            continue;
        }
        let inside = members.iter().filter(|m| set.contains(m)).count();
        let mu = BigRational::new(BigInt::from(inside), BigInt::from(members.len()));
        if (&mu - &eta).abs() * &ten <= eta {
            in_z += 1;
        }
    }
    let z_fraction = BigRational::new(BigInt::from(in_z), BigInt::from(points));
    let lhs = BigRational::one() - &z_fraction;
    let q_rat = BigRational::from_integer(BigInt::from(q));
    let terms = [PowTerm {
        coeff: BigRational::one(),
        factors: vec![(q_rat, -(l_prime as i64), 2)],
    }];
    let check = bound_check_terms(&lhs, &terms, 1, true)?;
    let family_eps = grassmann_worst_restriction(&field, n, l_prime, &set, 1)?;
    Ok(EvenCoveringReport {
        l_prime,
        eta: eta.to_string(),
        family_eps_size1: family_eps.to_string(),
        z_fraction: z_fraction.to_string(),
        off_points: points - in_z,
        check,
    })
}

/// Uniform wrapper so callers can serialize any spot check the same way.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "inequality")]
pub enum InequalityReport {
    LevelTNorm(LevelTNormReport),
    LevelOne(LevelOneReport),
    EdgeCount(EdgeCountReport),
    FourierFact(FourierFactReport),
    EvenCovering(EvenCoveringReport),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::shard_rng;

    fn f2() -> Arc<Field> {
        Arc::new(Field::from_order(2).unwrap())
    }

    fn f3() -> Arc<Field> {
        Arc::new(Field::from_order(3).unwrap())
    }

    fn f4() -> Arc<Field> {
        Arc::new(Field::from_order(4).unwrap())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn random_boolean(field: &Arc<Field>, n: usize, c: usize, seed: u64) -> MatrixSpaceFn {
        let mut rng = shard_rng(seed, 0);
        let points = u64::from(field.order()).pow((n * c) as u32);
        let values = (0..points)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        MatrixSpaceFn::exact(field, n, c, values).unwrap()
    }

    fn exact_values(f: &MatrixSpaceFn) -> &[BigRational] {
        match f.values() {
            FnValues::Exact(v) => v,
            FnValues::Approx(_) => panic!("exact table expected"),
        }
    }

    /// Transform straight from the definition, one coefficient at a time.
    fn naive_fourier(f: &MatrixSpaceFn) -> Vec<BigRational> {
        let field = f.field();
        let points = f.points();
        let vals = exact_values(f);
        let mut out = Vec::new();
        for s_idx in 0..points {
            let s_rows = f.matrix_rows(s_idx);
            let mut acc = BigRational::zero();
            for m_idx in 0..points {
                let m_rows = f.matrix_rows(m_idx);
                let mut dot: Elem = 0;
                for (srow, mrow) in s_rows.iter().zip(&m_rows) {
                    for (&a, &b) in srow.iter().zip(mrow) {
                        dot = field.add(dot, field.mul(a, b));
                    }
                }
                if field.trace(dot) == 0 {
                    acc += &vals[m_idx as usize];
                } else {
                    acc -= &vals[m_idx as usize];
                }
            }
            out.push(acc / BigRational::from_integer(BigInt::from(points)));
        }
        out
    }

    #[test]
    fn the_constant_function_transforms_to_a_delta_at_zero() {
        let f = f2();
        let one = MatrixSpaceFn::constant(&f, 2, 2, &BigRational::one()).unwrap();
        let hat = fourier(&one).unwrap();
        let vals = exact_values(&hat);
        assert!(vals[0].is_one());
        assert!(vals[1..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn characters_transform_to_deltas_at_their_own_index() {
        let f = f2();
        let s_rows = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        let chi = character_fn(&f, 3, 2, &s_rows).unwrap();
        let hat = fourier(&chi).unwrap();
        let s_idx = chi.index_of(&s_rows).unwrap();
        let vals = exact_values(&hat);
        for (idx, v) in vals.iter().enumerate() {
            if idx as u64 == s_idx {
                assert!(v.is_one());
            } else {
                assert!(v.is_zero(), "stray coefficient at {idx}");
            }
        }
    }

    #[test]
    fn random_boolean_tables_round_trip_exactly_through_the_transform() {
        let f = f2();
        let fun = random_boolean(&f, 2, 2, 11);
        let expected = naive_fourier(&fun);
        let hat = fourier(&fun).unwrap();
        assert_eq!(exact_values(&hat), expected.as_slice());
        let back = inverse_fourier(&hat);
        assert_eq!(back.values(), fun.values());
        let mass = expected
            .iter()
            .fold(BigRational::zero(), |acc, v| acc + v * v);
        assert_eq!(mass, norm2_sq(&fun).unwrap());
    }

    #[test]
    fn binary_extension_fields_stay_on_the_exact_track() {
        let f = f4();
        let fun = random_boolean(&f, 1, 2, 3);
        assert!(fun.is_exact());
        let expected = naive_fourier(&fun);
        let hat = fourier(&fun).unwrap();
        assert_eq!(exact_values(&hat), expected.as_slice());
        assert_eq!(inverse_fourier(&hat).values(), fun.values());
    }

    #[test]
    fn odd_characteristic_transforms_hold_parseval_within_tolerance() {
        let f = f3();
        let mut rng = shard_rng(5, 0);
        let values: Vec<Complex64> = (0..81)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let fun = MatrixSpaceFn::approx(&f, 2, 2, values).unwrap();
        let hat = fourier(&fun).unwrap();
        let back = inverse_fourier(&hat);
        let drift = sup_distance(&fun, &back).unwrap();
        assert!(drift <= rational_from_f64(1e-10).unwrap(), "drift {drift}");
    }

    #[test]
    fn level_components_decompose_the_function_orthogonally() {
        let f = f2();
        let fun = random_boolean(&f, 3, 2, 17);
        let comps: Vec<MatrixSpaceFn> = (0..=2)
            .map(|d| level_component(&fun, d).unwrap())
            .collect();
        let mut acc = vec![BigRational::zero(); fun.points() as usize];
        for comp in &comps {
            for (slot, v) in acc.iter_mut().zip(exact_values(comp)) {
                *slot += v;
            }
        }
        assert_eq!(acc.as_slice(), exact_values(&fun));
        for i in 0..comps.len() {
            for j in 0..i {
                let ip = inner(&comps[i], &comps[j]).unwrap();
                assert_eq!(ip, ScalarValue::Exact(BigRational::zero()), "levels {i} {j}");
            }
        }
        let split: BigRational = comps
            .iter()
            .fold(BigRational::zero(), |acc, c| acc + norm2_sq(c).unwrap());
        assert_eq!(split, norm2_sq(&fun).unwrap());
    }

    #[test]
    fn levels_beyond_the_smaller_dimension_vanish() {
        let f = f2();
        let fun = random_boolean(&f, 3, 2, 19);
        let comp = level_component(&fun, 3).unwrap();
        assert!(exact_values(&comp).iter().all(|v| v.is_zero()));
    }

    #[test]
    fn basis_invariant_functions_keep_invariant_level_components() {
        let f = f2();
        let mut rng = shard_rng(23, 0);
        let fun = random_basis_invariant(&f, 3, 2, &mut rng).unwrap();
        assert!(is_basis_invariant(&fun).unwrap());
        for d in 0..=2 {
            let comp = level_component(&fun, d).unwrap();
            assert!(is_basis_invariant(&comp).unwrap(), "level {d}");
        }
        // A delta at one rank-one matrix is not invariant.
        let mut values = vec![BigRational::zero(); 64];
        values[1] = BigRational::one();
        let skew = MatrixSpaceFn::exact(&f, 3, 2, values).unwrap();
        assert!(!is_basis_invariant(&skew).unwrap());
    }

    #[test]
    fn right_multiplication_moves_characters_by_the_transpose() {
        let f = f2();
        let changes = enumerate_mats(&f, 2, 2, Some(2), WORK_CAP).unwrap();
        assert_eq!(changes.len(), 6);
        for a in &changes {
            let a_t = a.transpose();
            for s_idx in 0..64u64 {
                let s = Mat::from_index(2, 3, 2, s_idx);
                let moved_s = s.mul(&f, &a_t);
                for m_idx in 0..64u64 {
                    let m = Mat::from_index(2, 3, 2, m_idx);
                    let left = f.trace(s.dot(&f, &m.mul(&f, a)));
                    let right = f.trace(moved_s.dot(&f, &m));
                    assert_eq!(left, right, "s {s_idx} m {m_idx}");
                }
            }
        }
    }

    #[test]
    fn coefficients_of_invariant_functions_ignore_basis_changes() {
        let f = f2();
        let mut rng = shard_rng(29, 0);
        let fun = random_basis_invariant(&f, 3, 2, &mut rng).unwrap();
        let hat = fourier_raw(&fun);
        let vals = exact_values(&hat);
        let changes = enumerate_mats(&f, 2, 2, Some(2), WORK_CAP).unwrap();
        for a in &changes {
            for s_idx in 0..64u64 {
                let s = Mat::from_index(2, 3, 2, s_idx);
                let moved = s.mul(&f, a).index(2);
                assert_eq!(vals[s_idx as usize], vals[moved as usize]);
            }
        }
    }

    #[test]
    fn all_three_operators_fix_the_constant_function() {
        let f = f2();
        let one = MatrixSpaceFn::constant(&f, 3, 2, &BigRational::one()).unwrap();
        for (kind, cols) in [
            (OperatorKind::T, 1usize),
            (OperatorKind::G, 3),
            (OperatorKind::Phi, 2),
        ] {
            let out = operators(&one, kind, 1).unwrap();
            assert_eq!(out.c(), cols, "{kind}");
            assert!(exact_values(&out).iter().all(|v| v.is_one()), "{kind}");
        }
    }

    #[test]
    fn shrinking_then_growing_matches_the_shift_average_on_invariant_tables() {
        let f = f2();
        for seed in 0..20 {
            let mut rng = shard_rng(101, seed);
            let fun = random_basis_invariant(&f, 3, 2, &mut rng).unwrap();
            let composed = g_operator(&t_operator(&fun, 1).unwrap(), 1).unwrap();
            let averaged = phi_operator(&fun, 1).unwrap();
            assert_eq!(composed.values(), averaged.values(), "seed {seed}");
        }
    }

    fn random_rational_fn(field: &Arc<Field>, n: usize, c: usize, seed: u64) -> MatrixSpaceFn {
        let mut rng = shard_rng(seed, 1);
        let points = u64::from(field.order()).pow((n * c) as u32);
        let values = (0..points)
            .map(|_| rat(rng.gen_range(-8..=8), 4))
            .collect();
        MatrixSpaceFn::exact(field, n, c, values).unwrap()
    }

    #[test]
    fn shrink_and_grow_are_adjoint_for_invariant_tables() {
        let f = f2();
        let mut rng = shard_rng(31, 0);
        let fun = random_basis_invariant(&f, 3, 2, &mut rng).unwrap();
        let h = random_rational_fn(&f, 3, 1, 37);
        let lhs = inner(&t_operator(&fun, 1).unwrap(), &h).unwrap();
        let rhs = inner(&fun, &g_operator(&h, 1).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn shrunken_level_components_pair_only_with_matching_levels() {
        let f = f2();
        let mut rng = shard_rng(43, 0);
        let fun = random_basis_invariant(&f, 3, 2, &mut rng).unwrap();
        let h = random_rational_fn(&f, 3, 1, 47);
        for d in 0..=2 {
            let shrunk = t_operator(&level_component(&fun, d).unwrap(), 1).unwrap();
            let matched = level_component(&h, d).unwrap();
            assert_eq!(
                inner(&shrunk, &h).unwrap(),
                inner(&shrunk, &matched).unwrap(),
                "level {d}"
            );
        }
    }

    #[test]
    fn the_zero_character_is_fixed_with_eigenvalue_one() {
        let zeros = vec![vec![0, 0]; 3];
        let ev = phi_eigenvalue(&f2(), 3, 2, &zeros, 1).unwrap();
        assert_eq!(ev.rank, 0);
        assert_eq!(ev.value, "1");
        assert!(ev.within_bound);
        let odd = phi_eigenvalue(&f3(), 2, 2, &vec![vec![0, 0]; 2], 1).unwrap();
        assert!((odd.value_re - 1.0).abs() <= 1e-10);
        assert!(odd.value_im.abs() <= 1e-10);
    }

    #[test]
    fn rank_one_eigenvalues_match_the_hand_count_and_the_bound() {
        // For S with a single 1 in the corner, the sign of a shift BC only
        // sees B[0]C[0]. Over the three full-rank C rows, one has C[0] = 0
        // and contributes +1 for every B, while the other two average to
        // zero over B, leaving 1/3.
        let f = f2();
        let s_rows = vec![vec![1, 0], vec![0, 0], vec![0, 0]];
        let ev = phi_eigenvalue(&f, 3, 2, &s_rows, 1).unwrap();
        assert_eq!(ev.rank, 1);
        assert_eq!(ev.value, "1/3");
        assert_eq!(ev.bound, "7/4");
        assert!(ev.within_bound);
        // The tighter hand bound 3/4 + 1/2 also clears.
        assert!(rat(1, 3) <= rat(5, 4));
        // And the character really is an eigenvector of the shift average.
        let chi = character_fn(&f, 3, 2, &s_rows).unwrap();
        let averaged = phi_operator(&chi, 1).unwrap();
        let expected: Vec<BigRational> = exact_values(&chi)
            .iter()
            .map(|v| v * rat(1, 3))
            .collect();
        assert_eq!(exact_values(&averaged), expected.as_slice());
    }

    #[test]
    fn eigenvalues_are_a_function_of_character_rank_alone() {
        let f = f2();
        let mut by_rank: BTreeMap<usize, String> = BTreeMap::new();
        for s_idx in 0..64u64 {
            let s_rows = Mat::from_index(2, 3, 2, s_idx).to_rows();
            let ev = phi_eigenvalue(&f, 3, 2, &s_rows, 1).unwrap();
            let seen = by_rank.entry(ev.rank).or_insert_with(|| ev.value.clone());
            assert_eq!(seen, &ev.value, "rank {} at index {s_idx}", ev.rank);
        }
        assert_eq!(by_rank.get(&0).map(String::as_str), Some("1"));
        assert_eq!(by_rank.get(&1).map(String::as_str), Some("1/3"));
        assert!(by_rank.contains_key(&2));
    }

    #[test]
    fn zoom_members_match_a_brute_force_filter() {
        let f = f2();
        let u = vec![vec![1], vec![0]];
        let v = vec![vec![1], vec![0], vec![0]];
        let zoom = MatrixZoom::zoom_in(&f, 3, 2, &u, &v).unwrap();
        assert!(zoom.nonempty());
        assert_eq!(zoom.size(), 1);
        let um = Mat::from_rows(&u, 1, 2).unwrap();
        let vm = Mat::from_rows(&v, 1, 2).unwrap();
        let mut brute: Vec<u64> = Vec::new();
        for idx in 0..64u64 {
            let m = Mat::from_index(2, 3, 2, idx);
            if m.mul(&f, &um) == vm {
                brute.push(idx);
            }
        }
        let mut got = zoom.member_indices();
        got.sort_unstable();
        assert_eq!(got, brute);
        // Adding a contradictory zoom-out empties the set: the pinned first
        // column starts with 1, the row constraint wants that cell to be 0.
        let dead = MatrixZoom::new(
            &f,
            3,
            2,
            &u,
            &v,
            &[vec![1, 0, 0]],
            &[vec![0, 1]],
        )
        .unwrap();
        assert!(!dead.nonempty());
        assert_eq!(dead.member_count(), 0);
        let ind = MatrixSpaceFn::zoom_indicator(&zoom).unwrap();
        assert!(matches!(
            dead.restriction_norm(&ind),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn a_zoom_indicator_fails_pseudorandomness_at_its_own_size() {
        let f = f2();
        let zoom = MatrixZoom::zoom_in(
            &f,
            3,
            2,
            &[vec![1], vec![0]],
            &[vec![1], vec![0], vec![0]],
        )
        .unwrap();
        let ind = MatrixSpaceFn::zoom_indicator(&zoom).unwrap();
        assert!(zoom.restriction_norm(&ind).unwrap().is_one());
        let report = pseudorandomness_check(&ind, 1, &rat(99, 100)).unwrap();
        assert!(!report.pseudo_random);
        assert_eq!(report.worst_norm, "1");
        assert!(report.worst.is_some());
    }

    #[test]
    fn size_zero_scans_report_the_global_mean() {
        let f = f2();
        let mut values = vec![BigRational::zero(); 64];
        values[0] = BigRational::one();
        let fun = MatrixSpaceFn::exact(&f, 3, 2, values).unwrap();
        let report = pseudorandomness_check(&fun, 0, &BigRational::one()).unwrap();
        assert_eq!(report.restrictions, 1);
        assert_eq!(report.worst_norm, "1/64");
        assert!(report.pseudo_random);
    }

    #[test]
    fn random_tables_keep_restrictions_near_their_density() {
        let f = f2();
        let fun = random_boolean(&f, 3, 2, 41);
        let vals = exact_values(&fun);
        // Independent scan: filter members by checking the defining
        // equations directly instead of solving them.
        let mut brute_worst = BigRational::zero();
        for d_in in 0..=1usize {
            let d_out = 1 - d_in;
            let us = enumerate_mats(&f, 2, d_in, Some(d_in), WORK_CAP).unwrap();
            let vs = enumerate_mats(&f, 3, d_in, None, WORK_CAP).unwrap();
            let xs = enumerate_mats(&f, d_out, 3, Some(d_out), WORK_CAP).unwrap();
            let ys = enumerate_mats(&f, d_out, 2, None, WORK_CAP).unwrap();
            for u in &us {
                for v in &vs {
                    for x in &xs {
                        for y in &ys {
                            let mut acc = BigRational::zero();
                            let mut count = 0u64;
                            for idx in 0..64u64 {
                                let m = Mat::from_index(2, 3, 2, idx);
                                if m.mul(&f, u) == *v && x.mul(&f, &m) == *y {
                                    let val = &vals[idx as usize];
                                    acc += val * val;
                                    count += 1;
                                }
                            }
                            if count == 0 {
                                continue;
                            }
                            let norm = acc / BigRational::from_integer(BigInt::from(count));
                            if norm > brute_worst {
                                brute_worst = norm;
                            }
                        }
                    }
                }
            }
        }
        let (worst, witness, _) = worst_restriction(&fun, 1).unwrap();
        assert_eq!(worst, brute_worst);
        assert!(witness.is_some());
        assert!(worst >= rat(1, 4) && worst <= rat(19, 20), "worst {worst}");
    }

    fn lines_through(f: &Arc<Field>, n: usize, pivot: &[Elem], dim: usize) -> Vec<Subspace> {
        let full = Subspace::full(f, n).unwrap();
        let anchor = Subspace::canonicalize(f, n, vec![pivot.to_vec()]).unwrap();
        ZoomPair::new(anchor, full)
            .unwrap()
            .enumerate(dim, WORK_CAP)
            .unwrap()
    }

    #[test]
    fn edge_probabilities_stay_under_twice_the_shrunken_inner_product() {
        let f = f2();
        let left = lines_through(&f, 3, &[1, 0, 0], 2);
        assert_eq!(left.len(), 3);
        let right = vec![
            Subspace::canonicalize(&f, 3, vec![vec![1, 0, 0]]).unwrap(),
            Subspace::canonicalize(&f, 3, vec![vec![0, 1, 0]]).unwrap(),
        ];
        let report = edge_count_check(&f, 3, 2, 1, &left, &right, 1, 4).unwrap();
        // Hand count over the 21 plane-line pairs: the plane spanning the
        // first two axes hits both chosen lines, the other two marked planes
        // hit only the first, so 4 of 21.
        assert_eq!(report.incidence, "4/21");
        assert_eq!(report.operator_inner, "1/8");
        assert!(report.lift_bound_ok);
        assert_eq!(report.family_epsilon, "1");
        assert!(report.lift_pseudorandom_ok);
        assert!(report.check.holds);
        assert!(report.check.slack_log2.unwrap() > 0.0);
        assert!(report.implied_constant.starts_with("2^"));
    }

    #[test]
    fn constant_tables_pass_every_level_inequality() {
        let f = f2();
        let one = MatrixSpaceFn::constant(&f, 3, 2, &BigRational::one()).unwrap();
        let level = level_t_norm_check(&one, 1, 1, 4).unwrap();
        assert!(level.check.holds);
        assert_eq!(level.check.lhs, "0");
        assert_eq!(level.epsilon, "1");
        assert!(level.check.slack_log2.is_none());
        let first = level_one_check(&one, 4).unwrap();
        assert!(first.check.holds);
        assert_eq!(first.check.lhs, "0");
        // A lifted family clears the same bounds with room to spare.
        let lifted = MatrixSpaceFn::lift_family(&f, 3, 2, &lines_through(&f, 3, &[1, 0, 0], 2))
            .unwrap();
        let level = level_t_norm_check(&lifted, 1, 1, 4).unwrap();
        assert!(level.check.holds);
        assert!(level.check.slack_log2.unwrap() > 0.0);
        let first = level_one_check(&lifted, 4).unwrap();
        assert!(first.check.holds);
    }

    #[test]
    fn a_concentrated_family_leaves_a_loud_coefficient_on_the_dual() {
        let f = f2();
        let family = vec![Subspace::canonicalize(&f, 3, vec![vec![1, 0, 0]]).unwrap()];
        let report = fourier_fact_check(&family, 1).unwrap();
        assert_eq!(report.eta, "1/7");
        assert_eq!(report.threshold, "1/280");
        assert!(!report.assumptions_met);
        assert_eq!(report.scanned, 7);
        // Every plane shifts the density: to 1/3 when it holds the marked
        // line and to 0 otherwise. The lifted indicator has every
        // coefficient at magnitude exactly 1/8, so each case finds one.
        assert_eq!(report.cases.len(), 7);
        assert!(report.holds);
        for case in &report.cases {
            assert_eq!(case.witness_magnitude.as_deref(), Some("1/8"));
            assert!(case.ok);
        }
    }

    #[test]
    fn even_coverage_separates_uniform_from_lopsided_families() {
        let f = f2();
        let everything = lines_through(&f, 3, &[0, 0, 0], 2);
        assert_eq!(everything.len(), 7);
        let report = even_covering_check(&everything).unwrap();
        assert_eq!(report.eta, "1");
        assert_eq!(report.z_fraction, "1");
        assert_eq!(report.off_points, 0);
        assert!(report.check.holds);
        // Planes through one marked line overshoot on the line and fall
        // short everywhere else, so only the origin stays in range.
        let lopsided = lines_through(&f, 3, &[1, 0, 0], 2);
        let report = even_covering_check(&lopsided).unwrap();
        assert_eq!(report.eta, "3/7");
        assert_eq!(report.z_fraction, "1/8");
        assert_eq!(report.off_points, 7);
        assert!(!report.check.holds);
    }

    #[test]
    fn odd_characteristic_operators_satisfy_the_same_identities_approximately() {
        let f = f3();
        let mut rng = shard_rng(71, 0);
        let fun = random_basis_invariant(&f, 2, 2, &mut rng).unwrap();
        assert!(!fun.is_exact());
        let composed = g_operator(&t_operator(&fun, 1).unwrap(), 1).unwrap();
        let averaged = phi_operator(&fun, 1).unwrap();
        let drift = sup_distance(&composed, &averaged).unwrap();
        assert!(drift <= rational_from_f64(1e-10).unwrap(), "drift {drift}");
        let ev = phi_eigenvalue(&f, 2, 2, &[vec![1, 0], vec![0, 0]], 1).unwrap();
        assert_eq!(ev.rank, 1);
        assert!(ev.within_bound);
        assert!(ev.value_im.abs() <= 1e-10);
    }

    #[test]
    fn constructors_and_checks_validate_their_inputs() {
        let f2 = f2();
        let f3 = f3();
        let err = MatrixSpaceFn::exact(&f3, 1, 1, vec![BigRational::one(); 3]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = MatrixSpaceFn::constant(&f2, 5, 5, &BigRational::one()).unwrap_err();
        assert!(matches!(err, Error::Resource(_)), "{err}");
        let err = MatrixSpaceFn::exact(&f2, 2, 2, vec![BigRational::one(); 3]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let one = MatrixSpaceFn::constant(&f2, 3, 2, &BigRational::one()).unwrap();
        let err = t_operator(&one, 0).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = t_operator(&one, 2).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = phi_operator(&one, 3).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = MatrixZoom::zoom_in(&f2, 3, 2, &[vec![1], vec![0, 1]], &[]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = MatrixZoom::zoom_in(&f2, 3, 2, &[vec![2], vec![0]], &[]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = level_t_norm_check(&one, 2, 1, 4).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = level_t_norm_check(&one, 1, 1, 6).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = level_t_norm_check(&one, 1, 1, 2).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let skew = random_rational_fn(&f2, 3, 2, 53);
        let err = level_one_check(&skew, 4).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let other = MatrixSpaceFn::constant(&f2, 2, 2, &BigRational::one()).unwrap();
        let err = inner(&one, &other).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let err = fourier_fact_check(&[], 1).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
        let line = Subspace::canonicalize(&f2, 3, vec![vec![1, 0, 0]]).unwrap();
        let err = fourier_fact_check(&[line], 3).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
    }
}
