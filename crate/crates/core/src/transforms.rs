//! Bipartite constraint-graph surgery.
//!
//! The ops here take a two-player constraint satisfaction instance and
//! reshape its graph without moving its value by more than an explicit,
//! reported amount: removing left vertices whose constraints are forced,
//! replacing per-vertex weights by edge multiplicities to make the left side
//! regular, and splitting each right vertex into a cloud of copies wired
//! through a certified expander to cap the right degree.
//!
//! Everything that feeds a verdict is exact. Expanders carry a certificate
//! whose second singular value is bracketed by Sturm-chain root isolation on
//! the characteristic polynomial of the Gram matrix, so the spectral bound
//! and the mixing inequality are decided in rational arithmetic, never by
//! floating point.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;
use std::sync::Arc;

use num::{BigInt, BigRational, BigUint, Integer, One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::subspace::{vec_add, vec_scale, Subspace, Vector};

/// Largest per-side size the exact spectral certifier accepts.
pub const SPECTRAL_MAX_N: usize = 32;

/// Cap on `|left alphabet|^|left| * |right alphabet|^|right|` for brute
/// force value search.
pub const BRUTE_FORCE_CAP: u128 = 1 << 26;

/// Cap on the edge multiset produced by left regularization.
pub const REGULARIZE_EDGE_CAP: u64 = 1 << 22;

/// Random graphs drawn before the expander builder falls back to a
/// deterministic construction.
const BUILD_ATTEMPTS: usize = 200;

/// Width of the bracket isolated around a squared singular value.
const BRACKET_BITS: usize = 40;

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(big(n), big(d))
}

/// Parse an exact rational from `"num/den"` or plain integer form.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n = BigInt::from_str(num)
        .map_err(|_| Error::domain(format!("malformed rational {s:?}")))?;
    let d = BigInt::from_str(den)
        .map_err(|_| Error::domain(format!("malformed rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::domain(format!("zero denominator in rational {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Render an exact rational as `"num/den"` (or `"num"` when integral).
pub fn ratio_string(r: &BigRational) -> String {
    r.to_string()
}

mod ratio_opt {
    use super::parse_ratio;
    use num::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        match Option::<String>::deserialize(d)? {
            None => Ok(None),
            Some(raw) => parse_ratio(&raw).map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// Explicit label sets for the two sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

/// A binary predicate over the two alphabets, stored as a total table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    /// Acceptance table indexed `[left label][right label]`.
    pub table: Vec<Vec<bool>>,
    /// True when every left label accepts exactly one right label.
    pub projection: bool,
}

impl Predicate {
    /// Build a predicate from its table, computing the projection flag.
    pub fn new(table: Vec<Vec<bool>>) -> Predicate {
        let projection = Predicate::table_is_projection(&table);
        Predicate { table, projection }
    }

    fn table_is_projection(table: &[Vec<bool>]) -> bool {
        !table.is_empty()
            && table
                .iter()
                .all(|row| row.iter().filter(|&&x| x).count() == 1)
    }

    pub fn accepts(&self, a: usize, b: usize) -> bool {
        self.table[a][b]
    }
}

/// A left vertex; `basis` carries the vertex's subspace when the instance
/// has block structure for triviality tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspVertex {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vector>>,
}

impl CspVertex {
    pub fn plain(name: impl Into<String>) -> CspVertex {
        CspVertex {
            name: name.into(),
            basis: None,
        }
    }
}

/// One constraint; the edge list is a multiset, so repeats are meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub predicate: usize,
    /// Optional exact weight; absent means weight one (or uniform, where an
    /// op requires per-vertex normalization).
    #[serde(default, skip_serializing_if = "Option::is_none", with = "ratio_opt")]
    pub weight: Option<BigRational>,
}

impl Edge {
    pub fn plain(left: usize, right: usize, predicate: usize) -> Edge {
        Edge {
            left,
            right,
            predicate,
            weight: None,
        }
    }

    pub fn weighted(left: usize, right: usize, predicate: usize, w: BigRational) -> Edge {
        Edge {
            left,
            right,
            predicate,
            weight: Some(w),
        }
    }
}

/// Block layout for triviality tests: the ambient space splits into
/// `blocks` groups of three coordinates over `F_(field_order)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub field_order: u32,
    pub blocks: usize,
}

/// A bipartite two-player constraint instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteCSP {
    pub left: Vec<CspVertex>,
    pub right: Vec<String>,
    pub alphabets: Alphabets,
    pub predicates: Vec<Predicate>,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_structure: Option<BlockStructure>,
}

impl BipartiteCSP {
    pub fn new(
        left: Vec<CspVertex>,
        right: Vec<String>,
        alphabets: Alphabets,
        predicates: Vec<Predicate>,
        edges: Vec<Edge>,
    ) -> BipartiteCSP {
        BipartiteCSP {
            left,
            right,
            alphabets,
            predicates,
            edges,
            block_structure: None,
        }
    }

    /// Check structural invariants: total predicate tables with accurate
    /// projection flags, in-range edges, positive weights, unique names,
    /// and coherent block structure when bases are present.
    pub fn validate(&self) -> Result<()> {
        if self.alphabets.left.is_empty() || self.alphabets.right.is_empty() {
            return Err(Error::domain("alphabets must be nonempty"));
        }
        let mut seen = BTreeSet::new();
        for v in &self.left {
            if !seen.insert(&v.name) {
                return Err(Error::domain(format!("duplicate left vertex {:?}", v.name)));
            }
        }
        let mut seen = BTreeSet::new();
        for name in &self.right {
            if !seen.insert(name) {
                return Err(Error::domain(format!("duplicate right vertex {name:?}")));
            }
        }
        for (i, p) in self.predicates.iter().enumerate() {
            if p.table.len() != self.alphabets.left.len()
                || p.table.iter().any(|row| row.len() != self.alphabets.right.len())
            {
                return Err(Error::domain(format!(
                    "predicate {i} table is not total over the alphabets"
                )));
            }
            if p.projection != Predicate::table_is_projection(&p.table) {
                return Err(Error::domain(format!(
                    "predicate {i} projection flag does not match its table"
                )));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.left >= self.left.len()
                || e.right >= self.right.len()
                || e.predicate >= self.predicates.len()
            {
                return Err(Error::domain(format!("edge {i} references a missing endpoint")));
            }
            if let Some(w) = &e.weight {
                if !w.is_positive() {
                    return Err(Error::domain(format!("edge {i} has non-positive weight")));
                }
            }
        }
        let any_basis = self.left.iter().any(|v| v.basis.is_some());
        match (&self.block_structure, any_basis) {
            (None, false) => {}
            (Some(bs), _) => {
                let field = Arc::new(Field::from_order(bs.field_order)?);
                if bs.blocks == 0 {
                    return Err(Error::domain("block structure needs at least one block"));
                }
                for v in &self.left {
                    let rows = v.basis.as_ref().ok_or_else(|| {
                        Error::domain(format!("vertex {:?} is missing its basis", v.name))
                    })?;
                    Subspace::canonicalize(&field, 3 * bs.blocks, rows.clone())?;
                }
            }
            (None, true) => {
                return Err(Error::domain(
                    "vertices carry bases but the instance has no block structure",
                ));
            }
        }
        Ok(())
    }

    /// Edge indices incident to each left vertex, in edge order.
    pub fn left_edge_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.left.len()];
        for (i, e) in self.edges.iter().enumerate() {
            lists[e.left].push(i);
        }
        lists
    }

    /// Edge indices incident to each right vertex, in edge order.
    pub fn right_edge_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.right.len()];
        for (i, e) in self.edges.iter().enumerate() {
            lists[e.right].push(i);
        }
        lists
    }

    /// The common left degree when the instance is left-regular.
    pub fn left_regular_degree(&self) -> Option<usize> {
        let lists = self.left_edge_lists();
        let first = lists.first()?.len();
        lists.iter().all(|l| l.len() == first).then_some(first)
    }

    fn edge_weight(e: &Edge) -> BigRational {
        e.weight.clone().unwrap_or_else(BigRational::one)
    }

    /// Total weight over the edge multiset.
    pub fn total_weight(&self) -> BigRational {
        self.edges.iter().map(Self::edge_weight).sum()
    }

    /// Exact satisfied fraction of a labeling: satisfied weight over total
    /// weight, and one when there are no constraints at all.
    pub fn value_of(&self, left_labels: &[usize], right_labels: &[usize]) -> Result<BigRational> {
        if left_labels.len() != self.left.len() || right_labels.len() != self.right.len() {
            return Err(Error::usage("labeling length does not match the vertex sets"));
        }
        let la = self.alphabets.left.len();
        let lb = self.alphabets.right.len();
        if left_labels.iter().any(|&a| a >= la) || right_labels.iter().any(|&b| b >= lb) {
            return Err(Error::usage("label out of alphabet range"));
        }
        if self.edges.is_empty() {
            return Ok(BigRational::one());
        }
        let mut sat = BigRational::zero();
        for e in &self.edges {
            if self.predicates[e.predicate].accepts(left_labels[e.left], right_labels[e.right]) {
                sat += Self::edge_weight(e);
            }
        }
        Ok(sat / self.total_weight())
    }
}

/// Exact optimum of a small instance, with a witness labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspValue {
    /// Maximum satisfied fraction, as an exact rational.
    pub value: String,
    pub value_float: f64,
    pub best_left: Vec<usize>,
    pub best_right: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl CspValue {
    pub fn value_ratio(&self) -> BigRational {
        parse_ratio(&self.value).expect("value string is produced by ratio_string")
    }
}

/// Exhaustive exact value search.
///
/// Right labelings are enumerated outright; for each one every left vertex
/// picks its best label independently, which keeps the loop at
/// `|right alphabet|^|right| * |edges| * |left alphabet|` steps while the
/// formal precondition stays the full labeling-product cap.
pub fn brute_force_csp_value(csp: &BipartiteCSP) -> Result<CspValue> {
    csp.validate()?;
    let la = csp.alphabets.left.len();
    let lb = csp.alphabets.right.len();
    let space = BigUint::from(la).pow(csp.left.len() as u32)
        * BigUint::from(lb).pow(csp.right.len() as u32);
    if space > BigUint::from(BRUTE_FORCE_CAP) {
        return Err(Error::resource(format!(
            "labeling space {space} exceeds the brute force cap {BRUTE_FORCE_CAP}"
        )));
    }
    if csp.edges.is_empty() {
        return Ok(CspValue {
            value: "1".into(),
            value_float: 1.0,
            best_left: vec![0; csp.left.len()],
            best_right: vec![0; csp.right.len()],
            warning: Some("instance has no constraints; its value is vacuously one".into()),
        });
    }
    let lists = csp.left_edge_lists();
    let total = csp.total_weight();
    let mut right_labels = vec![0usize; csp.right.len()];
    let mut best: Option<(BigRational, Vec<usize>, Vec<usize>)> = None;
    loop {
        let mut num = BigRational::zero();
        let mut choice = vec![0usize; csp.left.len()];
        for (v, list) in lists.iter().enumerate() {
            let mut vertex_best = BigRational::zero();
            let mut vertex_label = 0usize;
            for a in 0..la {
                let mut sat = BigRational::zero();
                for &ei in list {
                    let e = &csp.edges[ei];
                    if csp.predicates[e.predicate].accepts(a, right_labels[e.right]) {
                        sat += BipartiteCSP::edge_weight(e);
                    }
                }
                if a == 0 || sat > vertex_best {
                    vertex_best = sat;
                    vertex_label = a;
                }
            }
            num += vertex_best;
            choice[v] = vertex_label;
        }
        if best.as_ref().map_or(true, |(b, _, _)| num > *b) {
            best = Some((num, choice, right_labels.clone()));
        }
        // Odometer over right labelings.
        let mut pos = 0;
        loop {
            if pos == right_labels.len() {
                let (num, left, right) = best.expect("at least one labeling was scored");
                let value = num / total;
                return Ok(CspValue {
                    value_float: value.to_f64().unwrap_or(f64::NAN),
                    value: ratio_string(&value),
                    best_left: left,
                    best_right: right,
                    warning: None,
                });
            }
            right_labels[pos] += 1;
            if right_labels[pos] < lb {
                break;
            }
            right_labels[pos] = 0;
            pos += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Exact spectra of tiny biregular graphs.
//
// Polynomials are integer coefficient vectors in ascending degree order,
// kept primitive (content one) so Sturm chains stay small.

fn poly_trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().map_or(false, Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_eval(p: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

fn poly_derivative(p: &[BigInt]) -> Vec<BigInt> {
    if p.len() <= 1 {
        return Vec::new();
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * big(i as u64))
        .collect()
}

fn poly_primitive(p: Vec<BigInt>) -> Vec<BigInt> {
    let p = poly_trim(p);
    let mut content = BigInt::zero();
    for c in &p {
        content = content.gcd(c);
    }
    if content.is_zero() || content.is_one() {
        return p;
    }
    p.into_iter().map(|c| c / &content).collect()
}

/// Remainder of `f` by `g` over the rationals, returned primitive with the
/// sign preserved.
fn poly_rem(f: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<BigRational> = f
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let dg = g.len() - 1;
    let lead = BigRational::from_integer(g[dg].clone());
    while r.len() > dg {
        let coeff = r.last().expect("nonempty during division").clone() / &lead;
        let shift = r.len() - 1 - dg;
        for (i, gc) in g.iter().enumerate() {
            let delta = &coeff * BigRational::from_integer(gc.clone());
            r[shift + i] -= delta;
        }
        while r.last().map_or(false, Zero::is_zero) {
            r.pop();
        }
        if r.is_empty() {
            return Vec::new();
        }
    }
    let mut denom = BigInt::one();
    for c in &r {
        denom = denom.lcm(c.denom());
    }
    let scaled: Vec<BigInt> = r
        .iter()
        .map(|c| (c * BigRational::from_integer(denom.clone())).to_integer())
        .collect();
    poly_primitive(scaled)
}

/// Exact quotient `f / g`, or None when `g` does not divide `f`.
fn poly_div_exact(f: &[BigInt], g: &[BigInt]) -> Option<Vec<BigInt>> {
    if g.is_empty() {
        return None;
    }
    let mut r: Vec<BigRational> = f
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let dg = g.len() - 1;
    let lead = BigRational::from_integer(g[dg].clone());
    let mut q = vec![BigRational::zero(); f.len().saturating_sub(dg)];
    while r.len() > dg {
        let coeff = r.last().expect("nonempty during division").clone() / &lead;
        let shift = r.len() - 1 - dg;
        q[shift] = coeff.clone();
        for (i, gc) in g.iter().enumerate() {
            let delta = &coeff * BigRational::from_integer(gc.clone());
            r[shift + i] -= delta;
        }
        while r.last().map_or(false, Zero::is_zero) {
            r.pop();
        }
    }
    if !r.is_empty() {
        return None;
    }
    if q.iter().any(|c| !c.denom().is_one()) {
        return None;
    }
    Some(poly_trim(q.into_iter().map(|c| c.to_integer()).collect()))
}

fn poly_gcd(f: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
    let mut a = poly_primitive(f.to_vec());
    let mut b = poly_primitive(g.to_vec());
    while !b.is_empty() {
        if b.len() == 1 {
            return vec![BigInt::one()];
        }
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// The square-free part `p / gcd(p, p')`, sharing p's root set.
fn poly_square_free(p: &[BigInt]) -> Vec<BigInt> {
    let d = poly_derivative(p);
    if d.is_empty() {
        return poly_primitive(p.to_vec());
    }
    let g = poly_gcd(p, &d);
    if g.len() <= 1 {
        return poly_primitive(p.to_vec());
    }
    poly_div_exact(p, &g).expect("gcd divides the polynomial")
}

/// Sturm chain of a square-free polynomial.
fn sturm_chain(p: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut chain = vec![poly_primitive(p.to_vec())];
    let d = poly_primitive(poly_derivative(p));
    if d.is_empty() {
        return chain;
    }
    chain.push(d);
    loop {
        let k = chain.len();
        if chain[k - 1].len() <= 1 {
            break;
        }
        let mut r = poly_rem(&chain[k - 2], &chain[k - 1]);
        if r.is_empty() {
            break;
        }
        for c in &mut r {
            *c = -c.clone();
        }
        chain.push(r);
    }
    chain
}

/// Sign variations of the chain at `x`, zeros skipped.
fn sign_variations(chain: &[Vec<BigInt>], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for p in chain {
        let v = poly_eval(p, x);
        let s = if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

/// Number of distinct roots in the half-open interval `(a, b]`.
fn roots_in(chain: &[Vec<BigInt>], a: &BigRational, b: &BigRational) -> usize {
    if a >= b {
        return 0;
    }
    sign_variations(chain, a).saturating_sub(sign_variations(chain, b))
}

/// Characteristic polynomial of an integer matrix, ascending coefficients,
/// computed by the trace recurrence (every division along the way is exact).
fn charpoly(a: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let n = a.len();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = a.to_vec();
    for k in 1..=n {
        if k > 1 {
            // m = a * (m + c_{k-1} I)
            let prev = coeffs[n - (k - 1)].clone();
            let mut shifted = m.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] += &prev;
            }
            let mut next = vec![vec![BigInt::zero(); n]; n];
            for i in 0..n {
                for (j, cell) in next[i].iter_mut().enumerate() {
                    let mut acc = BigInt::zero();
                    for t in 0..n {
                        acc += &a[i][t] * &shifted[t][j];
                    }
                    *cell = acc;
                }
            }
            m = next;
        }
        let mut tr = BigInt::zero();
        for (i, row) in m.iter().enumerate() {
            tr += &row[i];
        }
        let kk = big(k as u64);
        if !(&tr % &kk).is_zero() {
            return Err(Error::logic("trace recurrence produced a fractional coefficient"));
        }
        coeffs[n - k] = -(tr / kk);
    }
    Ok(coeffs)
}

/// Synthetic division by `(x - r)`; errors when `r` is not a root.
fn poly_divide_root(p: &[BigInt], r: &BigInt) -> Result<Vec<BigInt>> {
    let n = p.len() - 1;
    let mut q = vec![BigInt::zero(); n];
    let mut carry = BigInt::zero();
    for i in (0..=n).rev() {
        let b = &p[i] + &carry;
        if i == 0 {
            if !b.is_zero() {
                return Err(Error::logic("expected eigenvalue is not a root of the charpoly"));
            }
        } else {
            carry = &b * r;
            q[i - 1] = b;
        }
    }
    Ok(q)
}

/// Exact spectral data for one biregular bipartite graph: the deflated
/// characteristic polynomial of the Gram matrix and its Sturm chain, which
/// together decide any rational comparison against the squared second
/// singular value.
struct Spectrum {
    /// Squared top singular value, `d^2`.
    top: BigRational,
    square_free: Vec<BigInt>,
    chain: Vec<Vec<BigInt>>,
    /// False only for one-vertex sides, where no second value exists.
    has_roots: bool,
}

impl Spectrum {
    fn new(n: usize, d: usize, matrix: &[Vec<u8>]) -> Result<Spectrum> {
        let mut gram = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for (t, row) in matrix.iter().enumerate() {
                    let _ = t;
                    acc += u64::from(row[i]) * u64::from(row[j]);
                }
                gram[i][j] = big(acc);
            }
        }
        let cp = charpoly(&gram)?;
        let d2 = big((d * d) as u64);
        let quotient = poly_divide_root(&cp, &d2)?;
        let top = BigRational::from_integer(d2);
        if quotient.len() <= 1 {
            return Ok(Spectrum {
                top,
                square_free: Vec::new(),
                chain: Vec::new(),
                has_roots: false,
            });
        }
        let square_free = poly_square_free(&quotient);
        let chain = sturm_chain(&square_free);
        Ok(Spectrum {
            top,
            square_free,
            chain,
            has_roots: true,
        })
    }

    fn past_top(&self) -> BigRational {
        &self.top + BigRational::one()
    }

    /// Whether the squared second singular value is at most `t`.
    fn lambda_sq_at_most(&self, t: &BigRational) -> bool {
        !self.has_roots || roots_in(&self.chain, t, &self.past_top()) == 0
    }

    /// Whether the squared second singular value is at least `t`.
    fn lambda_sq_at_least(&self, t: &BigRational) -> bool {
        if !self.has_roots {
            return !t.is_positive();
        }
        poly_eval(&self.square_free, t).is_zero()
            || roots_in(&self.chain, t, &self.past_top()) >= 1
    }

    /// An exact rational bracket `(lo, hi]` around the squared second
    /// singular value, with the two exactly-representable endpoints (zero
    /// and the top value) snapped rather than bisected.
    fn bracket(&self) -> (BigRational, BigRational) {
        let tol = BigRational::new(BigInt::one(), BigInt::one() << BRACKET_BITS);
        if !self.has_roots || self.lambda_sq_at_most(&BigRational::zero()) {
            return (-tol, BigRational::zero());
        }
        if poly_eval(&self.square_free, &self.top).is_zero() {
            return (&self.top - tol, self.top.clone());
        }
        let mut lo = -BigRational::one();
        let mut hi = self.top.clone();
        for _ in 0..4 * BRACKET_BITS {
            if &hi - &lo <= tol {
                break;
            }
            let mid = (&lo + &hi) / ratio(2, 1);
            if roots_in(&self.chain, &mid, &self.past_top()) >= 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }
}

/// Validated 0/1 biadjacency matrix of a simple `d`-biregular graph,
/// indexed `[left][right]`.
fn biadjacency(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<u8>>> {
    let mut m = vec![vec![0u8; n]; n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::domain(format!("edge ({a}, {b}) is out of range")));
        }
        if m[a][b] != 0 {
            return Err(Error::domain(format!("duplicate edge ({a}, {b})")));
        }
        m[a][b] = 1;
    }
    for (i, row) in m.iter().enumerate() {
        let deg: usize = row.iter().map(|&x| x as usize).sum();
        if deg != d {
            return Err(Error::domain(format!("left vertex {i} has degree {deg}, want {d}")));
        }
    }
    for j in 0..n {
        let deg: usize = m.iter().map(|row| row[j] as usize).sum();
        if deg != d {
            return Err(Error::domain(format!("right vertex {j} has degree {deg}, want {d}")));
        }
    }
    Ok(m)
}

/// A biregular bipartite graph together with an exact bracket on its second
/// singular value, certifying it below the `3 sqrt(d)` threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderCert {
    /// Vertices on each side.
    pub n: usize,
    /// Common degree of every vertex.
    pub degree: usize,
    /// Sorted simple edge list.
    pub edges: Vec<(usize, usize)>,
    /// Exact rational bracket on the squared second singular value.
    pub lambda_sq_lo: String,
    pub lambda_sq_hi: String,
    /// Floating point root of the bracket's upper end.
    pub lambda: f64,
    /// The certified threshold, `3 sqrt(degree)`.
    pub threshold: f64,
    /// Graphs the random builder drew before this one certified; zero when
    /// the graph was supplied directly.
    pub attempts: usize,
}

impl ExpanderCert {
    /// Re-derive the spectral data from the edge list and require the
    /// stored certificate to match it exactly.
    pub fn verify(&self) -> Result<()> {
        let fresh = certify_expander(self.n, self.degree, self.edges.clone())?;
        if fresh.lambda_sq_lo != self.lambda_sq_lo
            || fresh.lambda_sq_hi != self.lambda_sq_hi
            || fresh.lambda != self.lambda
            || fresh.edges != self.edges
        {
            return Err(Error::domain(
                "certificate does not match the spectrum recomputed from its graph",
            ));
        }
        Ok(())
    }

    fn spectrum(&self) -> Result<Spectrum> {
        let m = biadjacency(self.n, self.degree, &self.edges)?;
        Spectrum::new(self.n, self.degree, &m)
    }
}

/// Certify a given biregular graph: exact spectral bracket plus the
/// `lambda <= 3 sqrt(d)` bound, decided in rational arithmetic.
pub fn certify_expander(n: usize, d: usize, mut edges: Vec<(usize, usize)>) -> Result<ExpanderCert> {
    if n == 0 || d == 0 || d > n {
        return Err(Error::usage(format!(
            "need 1 <= degree <= side size, got degree {d} on {n} vertices"
        )));
    }
    if n > SPECTRAL_MAX_N {
        return Err(Error::resource(format!(
            "side size {n} exceeds the exact spectral cap {SPECTRAL_MAX_N}"
        )));
    }
    edges.sort_unstable();
    let m = biadjacency(n, d, &edges)?;
    let spec = Spectrum::new(n, d, &m)?;
    let nine_d = ratio(9 * d as u64, 1);
    if !spec.lambda_sq_at_most(&nine_d) {
        return Err(Error::domain(format!(
            "second singular value exceeds 3 sqrt({d}); graph is not certified"
        )));
    }
    let (lo, hi) = spec.bracket();
    let lambda = hi.to_f64().map_or(f64::NAN, |x| x.max(0.0).sqrt());
    Ok(ExpanderCert {
        n,
        degree: d,
        edges,
        lambda_sq_lo: ratio_string(&lo),
        lambda_sq_hi: ratio_string(&hi),
        lambda,
        threshold: 3.0 * (d as f64).sqrt(),
        attempts: 0,
    })
}

fn circulant_edges(n: usize, d: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            edges.push((i, (i + j) % n));
        }
    }
    edges
}

/// Draw random `d`-biregular graphs until one certifies, then fall back to
/// a deterministic banded construction before giving up.
pub fn build_expander<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<ExpanderCert> {
    if n == 0 || d == 0 || d > n {
        return Err(Error::usage(format!(
            "need 1 <= degree <= side size, got degree {d} on {n} vertices"
        )));
    }
    if n > SPECTRAL_MAX_N {
        return Err(Error::resource(format!(
            "side size {n} exceeds the exact spectral cap {SPECTRAL_MAX_N}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for attempt in 1..=BUILD_ATTEMPTS {
        let mut edges = Vec::with_capacity(n * d);
        let mut used = BTreeSet::new();
        let mut simple = true;
        for _ in 0..d {
            perm.shuffle(rng);
            for (i, &j) in perm.iter().enumerate() {
                if !used.insert((i, j)) {
                    simple = false;
                    break;
                }
                edges.push((i, j));
            }
            if !simple {
                break;
            }
        }
        if !simple {
            continue;
        }
        match certify_expander(n, d, edges) {
            Ok(mut cert) => {
                cert.attempts = attempt;
                return Ok(cert);
            }
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    match certify_expander(n, d, circulant_edges(n, d)) {
        Ok(mut cert) => {
            cert.attempts = BUILD_ATTEMPTS + 1;
            Ok(cert)
        }
        Err(Error::Domain(_)) => Err(Error::resource(format!(
            "no certified expander with degree {d} on {n}+{n} vertices within {BUILD_ATTEMPTS} draws"
        ))),
        Err(e) => Err(e),
    }
}

/// One evaluation of the edge-distribution inequality on a certified graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub n: usize,
    pub degree: usize,
    /// Side densities of the two subsets, exact.
    pub alpha: String,
    pub beta: String,
    pub edges_between: u64,
    /// `|e(A0, B0)/|E| - alpha beta|`, exact.
    pub lhs: String,
    /// `(lambda / degree) sqrt(alpha beta)`, floating point display only;
    /// the verdict is decided exactly.
    pub rhs_float: f64,
    pub holds: bool,
    pub slack_float: f64,
}

/// Check `|e(A0, B0)/|E| - alpha beta| <= (lambda/degree) sqrt(alpha beta)`
/// on a certified graph. Both sides are compared exactly by squaring, and a
/// violation is a logic error because the inequality is a theorem for the
/// true second singular value.
pub fn mixing_check(cert: &ExpanderCert, a0: &[usize], b0: &[usize]) -> Result<MixingReport> {
    cert.verify()?;
    let mut a_set = BTreeSet::new();
    for &v in a0 {
        if v >= cert.n {
            return Err(Error::usage(format!("left subset vertex {v} is out of range")));
        }
        if !a_set.insert(v) {
            return Err(Error::usage(format!("left subset repeats vertex {v}")));
        }
    }
    let mut b_set = BTreeSet::new();
    for &v in b0 {
        if v >= cert.n {
            return Err(Error::usage(format!("right subset vertex {v} is out of range")));
        }
        if !b_set.insert(v) {
            return Err(Error::usage(format!("right subset repeats vertex {v}")));
        }
    }
    let crossing = cert
        .edges
        .iter()
        .filter(|(a, b)| a_set.contains(a) && b_set.contains(b))
        .count() as u64;
    let side = cert.n as u64;
    let alpha = ratio(a_set.len() as u64, side);
    let beta = ratio(b_set.len() as u64, side);
    let total_edges = side * cert.degree as u64;
    let lhs = (ratio(crossing, total_edges) - &alpha * &beta).abs();
    let ab = &alpha * &beta;
    let holds = if lhs.is_zero() {
        true
    } else if ab.is_zero() {
        // No crossing edges exist next to an empty side, so a nonzero
        // deviation here cannot happen.
        false
    } else {
        // lhs <= (lambda/d) sqrt(ab)  <=>  lambda^2 >= lhs^2 d^2 / ab.
        let d2 = ratio((cert.degree * cert.degree) as u64, 1);
        let needed = &lhs * &lhs * d2 / &ab;
        cert.spectrum()?.lambda_sq_at_least(&needed)
    };
    if !holds {
        return Err(Error::logic(format!(
            "edge distribution bound failed: deviation {lhs} with densities {alpha}, {beta}"
        )));
    }
    let rhs_float = cert.lambda / cert.degree as f64 * ab.to_f64().unwrap_or(f64::NAN).sqrt();
    let lhs_float = lhs.to_f64().unwrap_or(f64::NAN);
    Ok(MixingReport {
        n: cert.n,
        degree: cert.degree,
        alpha: ratio_string(&alpha),
        beta: ratio_string(&beta),
        edges_between: crossing,
        lhs: ratio_string(&lhs),
        rhs_float,
        holds,
        slack_float: rhs_float - lhs_float,
    })
}

// ---------------------------------------------------------------------------
// Trivial vertex removal.

/// Block indices on which every vector of the span has all three
/// coordinates equal. Works on any spanning set; the result depends only on
/// the span because the all-equal condition per block cuts out a subspace.
fn diagonal_blocks(rows: &[Vector], blocks: usize) -> Vec<usize> {
    (0..blocks)
        .filter(|&b| {
            rows.iter()
                .all(|r| r[3 * b] == r[3 * b + 1] && r[3 * b] == r[3 * b + 2])
        })
        .collect()
}

/// First block on which the subspace is forced diagonal, if any.
pub fn is_trivial_vertex(space: &Subspace, blocks: usize) -> Result<Option<usize>> {
    if space.ambient() != 3 * blocks {
        return Err(Error::usage(format!(
            "ambient dimension {} does not split into {blocks} blocks of three",
            space.ambient()
        )));
    }
    Ok(diagonal_blocks(space.rows(), blocks).into_iter().next())
}

/// Why one vertex was removed: the forced block found on the canonical
/// basis, re-verified on an independently drawn random basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialCertificate {
    pub vertex: usize,
    pub name: String,
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoveTrivialReport {
    pub examined: usize,
    pub kept: usize,
    pub removed: Vec<TrivialCertificate>,
    /// Fraction of left vertices removed, exact.
    pub removed_fraction: String,
    /// `2 k q^(-2 dim)`: twice a union bound over the k blocks on the rate
    /// at which a random subspace of that dimension is forced on one block.
    /// Present when every vertex has the same dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_rate_bound: Option<String>,
}

/// Random invertible change of basis for the rows, drawn from `rng`.
fn random_basis<R: Rng + ?Sized>(
    field: &Arc<Field>,
    rows: &[Vector],
    rng: &mut R,
) -> Result<Vec<Vector>> {
    let k = rows.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    for _ in 0..128 {
        let t: Vec<Vec<u32>> = (0..k)
            .map(|_| (0..k).map(|_| rng.gen_range(0..field.order())).collect())
            .collect();
        if Subspace::canonicalize(field, k, t.clone())?.dim() != k {
            continue;
        }
        let out = t
            .iter()
            .map(|coeffs| {
                let mut v = vec![0u32; rows[0].len()];
                for (c, row) in coeffs.iter().zip(rows) {
                    v = vec_add(field, &v, &vec_scale(field, *c, row));
                }
                v
            })
            .collect();
        return Ok(out);
    }
    Err(Error::resource("no invertible change of basis found in 128 draws"))
}

/// Delete left vertices that are forced on some block, and their edges.
///
/// Each removal is certified twice: the per-block scan runs on the
/// canonical basis and again on a random basis, and the two must agree
/// block for block.
pub fn remove_trivial<R: Rng + ?Sized>(
    csp: &BipartiteCSP,
    rng: &mut R,
) -> Result<(BipartiteCSP, RemoveTrivialReport)> {
    csp.validate()?;
    let bs = csp.block_structure.ok_or_else(|| {
        Error::domain("trivial vertex removal needs block structure on the instance")
    })?;
    let field = Arc::new(Field::from_order(bs.field_order)?);
    let ambient = 3 * bs.blocks;
    let mut keep_map = vec![usize::MAX; csp.left.len()];
    let mut kept_vertices = Vec::new();
    let mut removed = Vec::new();
    let mut dims = BTreeSet::new();
    for (i, v) in csp.left.iter().enumerate() {
        let rows = v.basis.as_ref().expect("validate checked bases");
        let space = Subspace::canonicalize(&field, ambient, rows.clone())?;
        dims.insert(space.dim());
        let canonical = diagonal_blocks(space.rows(), bs.blocks);
        let shuffled = random_basis(&field, space.rows(), rng)?;
        let rechecked = diagonal_blocks(&shuffled, bs.blocks);
        if canonical != rechecked {
            return Err(Error::logic(format!(
                "block scan depends on the basis at vertex {:?}",
                v.name
            )));
        }
        match canonical.first() {
            Some(&block) => removed.push(TrivialCertificate {
                vertex: i,
                name: v.name.clone(),
                block,
            }),
            None => {
                keep_map[i] = kept_vertices.len();
                kept_vertices.push(v.clone());
            }
        }
    }
    let edges = csp
        .edges
        .iter()
        .filter(|e| keep_map[e.left] != usize::MAX)
        .map(|e| Edge {
            left: keep_map[e.left],
            ..e.clone()
        })
        .collect();
    let out = BipartiteCSP {
        left: kept_vertices,
        right: csp.right.clone(),
        alphabets: csp.alphabets.clone(),
        predicates: csp.predicates.clone(),
        edges,
        block_structure: csp.block_structure,
    };
    let examined = csp.left.len();
    let fraction = if examined == 0 {
        BigRational::zero()
    } else {
        ratio(removed.len() as u64, examined as u64)
    };
    let random_rate_bound = (dims.len() == 1).then(|| {
        let dim = *dims.iter().next().expect("exactly one dimension") as u32;
        let per_block = BigRational::new(BigInt::one(), BigInt::from(bs.field_order).pow(2 * dim));
        ratio_string(&(ratio(2 * bs.blocks as u64, 1) * per_block))
    });
    let report = RemoveTrivialReport {
        examined,
        kept: out.left.len(),
        removed,
        removed_fraction: ratio_string(&fraction),
        random_rate_bound,
    };
    Ok((out, report))
}

// ---------------------------------------------------------------------------
// Left regularization.

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeftRegularizeReport {
    pub c: u64,
    /// Largest per-vertex constraint count, the `Q` in the output degree.
    pub q_bound: u64,
    /// Output left degree, `c * q_bound`.
    pub degree: u64,
    pub left_vertices: usize,
    pub edges_out: usize,
    /// No labeling's satisfied fraction moves by more than this, exact.
    pub value_shift_bound: String,
}

/// Replace per-vertex weights by edge multiplicities so every left vertex
/// has the same degree `c * Q`.
///
/// Each vertex's constraints after the first get the floor of their weight
/// share; the first constraint absorbs the remainder. Unweighted vertices
/// count as uniformly weighted. Any labeling's value moves by at most
/// `1/c`.
pub fn left_regularize(csp: &BipartiteCSP, c: u64) -> Result<(BipartiteCSP, LeftRegularizeReport)> {
    if c == 0 {
        return Err(Error::usage("regularization multiplier must be positive"));
    }
    csp.validate()?;
    let lists = csp.left_edge_lists();
    let q_bound = lists.iter().map(Vec::len).max().unwrap_or(0) as u64;
    if q_bound == 0 {
        return Err(Error::domain("cannot regularize an instance with no constraints"));
    }
    let degree = c
        .checked_mul(q_bound)
        .ok_or_else(|| Error::resource("output degree overflows"))?;
    let out_count = degree
        .checked_mul(csp.left.len() as u64)
        .filter(|&t| t <= REGULARIZE_EDGE_CAP)
        .ok_or_else(|| {
            Error::resource(format!(
                "output would need {} x {degree} edges, over the cap {REGULARIZE_EDGE_CAP}",
                csp.left.len()
            ))
        })?;
    let mut edges = Vec::with_capacity(out_count as usize);
    for (v, list) in lists.iter().enumerate() {
        if list.is_empty() {
            return Err(Error::domain(format!(
                "left vertex {:?} has no constraints to regularize",
                csp.left[v].name
            )));
        }
        let weighted = csp.edges[list[0]].weight.is_some();
        let mut weights = Vec::with_capacity(list.len());
        for &ei in list {
            match (&csp.edges[ei].weight, weighted) {
                (Some(w), true) => weights.push(w.clone()),
                (None, false) => weights.push(ratio(1, list.len() as u64)),
                _ => {
                    return Err(Error::domain(format!(
                        "left vertex {:?} mixes weighted and unweighted constraints",
                        csp.left[v].name
                    )));
                }
            }
        }
        if weights.iter().sum::<BigRational>() != BigRational::one() {
            return Err(Error::domain(format!(
                "weights at left vertex {:?} do not sum to one",
                csp.left[v].name
            )));
        }
        let scale = BigRational::from_integer(big(degree));
        let mut copies = vec![0u64; list.len()];
        let mut assigned = 0u64;
        for (i, w) in weights.iter().enumerate().skip(1) {
            let share = (w * &scale).floor().to_integer();
            let share = share.to_u64().expect("floor of a positive sub-degree share");
            copies[i] = share;
            assigned += share;
        }
        copies[0] = degree - assigned;
        for (&ei, &m) in list.iter().zip(&copies) {
            let e = &csp.edges[ei];
            for _ in 0..m {
                edges.push(Edge::plain(e.left, e.right, e.predicate));
            }
        }
    }
    let out = BipartiteCSP {
        left: csp.left.clone(),
        right: csp.right.clone(),
        alphabets: csp.alphabets.clone(),
        predicates: csp.predicates.clone(),
        edges,
        block_structure: csp.block_structure,
    };
    if out.left_regular_degree() != Some(degree as usize) {
        return Err(Error::logic("regularized instance is not left regular"));
    }
    let report = LeftRegularizeReport {
        c,
        q_bound,
        degree,
        left_vertices: out.left.len(),
        edges_out: out.edges.len(),
        value_shift_bound: ratio_string(&ratio(1, c)),
    };
    Ok((out, report))
}

// ---------------------------------------------------------------------------
// Right degree reduction.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInfo {
    pub right: usize,
    pub name: String,
    /// Ports on this vertex, the side size of its expander.
    pub degree: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RightDegreeReduceReport {
    pub d: usize,
    pub left_degree_in: usize,
    pub left_degree_out: usize,
    pub right_degree_out: usize,
    pub right_in: usize,
    pub right_out: usize,
    pub isolated_right_dropped: usize,
    pub max_lambda: f64,
    pub clusters: Vec<ClusterInfo>,
    /// `3 / sqrt(d)`, the recorded ceiling on how far the value can rise.
    pub value_shift_bound: f64,
}

/// Split every right vertex into one copy per incident constraint and wire
/// copies to constraints through a certified expander, capping the right
/// degree at `d` while multiplying the left degree by `d`.
pub fn right_degree_reduce<R: Rng + ?Sized>(
    csp: &BipartiteCSP,
    d: usize,
    rng: &mut R,
) -> Result<(BipartiteCSP, RightDegreeReduceReport)> {
    csp.validate()?;
    if d == 0 {
        return Err(Error::usage("target right degree must be positive"));
    }
    let left_degree_in = csp
        .left_regular_degree()
        .filter(|&deg| deg > 0)
        .ok_or_else(|| Error::domain("degree reduction needs a left regular instance"))?;
    if csp.edges.iter().any(|e| e.weight.is_some()) {
        return Err(Error::domain("degree reduction needs an unweighted instance"));
    }
    for (i, e) in csp.edges.iter().enumerate() {
        if !csp.predicates[e.predicate].projection {
            return Err(Error::domain(format!(
                "edge {i} uses non-projection predicate {}",
                e.predicate
            )));
        }
    }
    let ports = csp.right_edge_lists();
    let mut isolated = 0usize;
    for list in &ports {
        if list.is_empty() {
            isolated += 1;
        } else if list.len() < d {
            return Err(Error::usage(format!(
                "target degree {d} exceeds a right vertex's {} constraints",
                list.len()
            )));
        }
    }
    let mut cache: BTreeMap<usize, ExpanderCert> = BTreeMap::new();
    let mut right = Vec::new();
    let mut edges = Vec::new();
    let mut clusters = Vec::new();
    let mut max_lambda = 0.0f64;
    for (b, list) in ports.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let size = list.len();
        let cert = match cache.entry(size) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(build_expander(size, d, rng)?)
            }
        };
        let base = right.len();
        for j in 0..size {
            right.push(format!("{}~{}", csp.right[b], j));
        }
        for &(port, clone) in &cert.edges {
            let e = &csp.edges[list[port]];
            edges.push(Edge::plain(e.left, base + clone, e.predicate));
        }
        max_lambda = max_lambda.max(cert.lambda);
        clusters.push(ClusterInfo {
            right: b,
            name: csp.right[b].clone(),
            degree: size,
            lambda: cert.lambda,
        });
    }
    let out = BipartiteCSP {
        left: csp.left.clone(),
        right,
        alphabets: csp.alphabets.clone(),
        predicates: csp.predicates.clone(),
        edges,
        block_structure: csp.block_structure,
    };
    let want_left = left_degree_in * d;
    if out.left_regular_degree() != Some(want_left) {
        return Err(Error::logic("reduced instance lost left regularity"));
    }
    if out.right_edge_lists().iter().any(|l| l.len() != d) {
        return Err(Error::logic("reduced instance is not right regular"));
    }
    let report = RightDegreeReduceReport {
        d,
        left_degree_in,
        left_degree_out: want_left,
        right_degree_out: d,
        right_in: csp.right.len(),
        right_out: out.right.len(),
        isolated_right_dropped: isolated,
        max_lambda,
        clusters,
        value_shift_bound: 3.0 / (d as f64).sqrt(),
    };
    Ok((out, report))
}

// ---------------------------------------------------------------------------
// The combined pipeline the command line drives.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReduceOutcome {
    pub csp: BipartiteCSP,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed: Option<RemoveTrivialReport>,
    pub regularized: LeftRegularizeReport,
    pub reduced: RightDegreeReduceReport,
}

/// Run the full surgery chain: trivial vertex removal when the instance
/// carries block structure, then left regularization with multiplier `c`,
/// then right degree reduction to degree `d`.
pub fn degree_reduce<R: Rng + ?Sized>(
    csp: &BipartiteCSP,
    c: u64,
    d: usize,
    rng: &mut R,
) -> Result<DegreeReduceOutcome> {
    csp.validate()?;
    let (mut current, removed) = if csp.block_structure.is_some() {
        let (next, report) = remove_trivial(csp, rng)?;
        (next, Some(report))
    } else {
        (csp.clone(), None)
    };
    let (regular, regularized) = left_regularize(&current, c)?;
    current = regular;
    let (reduced_csp, reduced) = right_degree_reduce(&current, d, rng)?;
    Ok(DegreeReduceOutcome {
        csp: reduced_csp,
        removed,
        regularized,
        reduced,
    })
}
