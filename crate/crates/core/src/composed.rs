//! Two-layer assignment structure over equation neighborhoods of a sparse
//! linear instance.
//!
//! A question is a list of `k` instance equations whose variable sets are
//! pairwise disjoint and never bridged by a third equation. Each question `U`
//! carries the span of its coefficient rows and a side condition pinning
//! every row to its right-hand side. A left vertex pairs a question with a
//! key `L + H_U`, where `L` is a subspace of the question's coordinate space
//! meeting the pinned span `H_U` trivially; a right vertex is a smaller
//! subspace inside such an `L`. Two left vertices are related when each key
//! joined with the other vertex's pinned span generates the same space, and
//! the clique of a vertex collects everything related to it across all
//! questions. A constraint samples a left vertex, a right subspace inside
//! it, and a uniform clique member, transports the member's table entry to
//! the vertex through the two side conditions, and compares the transported
//! entry with the right table on the right subspace.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::outer::Gap3LinInstance;
use crate::rng::shard_rng;
use crate::stats::RateEstimate;
use crate::subspace::{greedy_complement, Subspace, Vector, ZoomPair};
use crate::tables::{
    clique_extension, honest_functional_under_condition, honest_table, unique_extension,
    AgreementTable, LinearFunctional, SideCondition,
};

fn default_enum_cap() -> u64 {
    1 << 20
}

fn default_sample_cap() -> u64 {
    1 << 20
}

/// Dimensions of the composed structure: `k` equations per question, left
/// complements of dimension `l1` (so keys have dimension `l1 + k`), right
/// subspaces of dimension `l2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComposedParams {
    pub k: usize,
    pub l1: usize,
    pub l2: usize,
    /// Cap on subspace enumeration during clique scans.
    #[serde(default = "default_enum_cap")]
    pub enum_cap: u64,
    /// Cap on rejection rounds while sampling a left complement.
    #[serde(default = "default_sample_cap")]
    pub sample_cap: u64,
}

impl ComposedParams {
    pub fn new(k: usize, l1: usize, l2: usize) -> ComposedParams {
        ComposedParams {
            k,
            l1,
            l2,
            enum_cap: default_enum_cap(),
            sample_cap: default_sample_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::usage("need at least one equation per question"));
        }
        if self.l2 == 0 || self.l2 >= self.l1 {
            return Err(Error::usage(
                "right dimension must sit strictly between zero and the left dimension",
            ));
        }
        if self.l1 > 2 * self.k {
            return Err(Error::usage(format!(
                "a {}-dimensional complement cannot avoid a {}-dimensional pinned span inside {} coordinates",
                self.l1,
                self.k,
                3 * self.k
            )));
        }
        if self.enum_cap == 0 || self.sample_cap == 0 {
            return Err(Error::usage("caps must be positive"));
        }
        Ok(())
    }
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=m.saturating_sub(need) {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= m {
        rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Check the question filter: the equation indices are sorted and in range,
/// their variable sets are pairwise disjoint, and no instance equation
/// touches the variables of two of them.
pub fn validate_question(inst: &Gap3LinInstance, u: &[usize]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::usage("a question needs at least one equation"));
    }
    if !u.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::usage(
            "question equation indices must be strictly increasing",
        ));
    }
    let last = *u.last().unwrap();
    if last >= inst.equations.len() {
        return Err(Error::usage(format!(
            "equation index {last} out of range for an instance with {} equations",
            inst.equations.len()
        )));
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (pos, &e) in u.iter().enumerate() {
        for &x in &inst.equations[e].vars {
            if let Some(prev) = owner.insert(x, pos) {
                return Err(Error::domain(format!(
                    "equations {} and {e} share variable {x}",
                    u[prev]
                )));
            }
        }
    }
    for (g_idx, g) in inst.equations.iter().enumerate() {
        let touched: BTreeSet<usize> = g
            .vars
            .iter()
            .filter_map(|x| owner.get(x).copied())
            .collect();
        if touched.len() >= 2 {
            let mut it = touched.into_iter();
            let a = u[it.next().unwrap()];
            let b = u[it.next().unwrap()];
            return Err(Error::domain(format!(
                "equation {g_idx} bridges variables of equations {a} and {b}"
            )));
        }
    }
    Ok(())
}

/// All sorted `k`-element equation lists passing the question filter.
pub fn filtered_questions(inst: &Gap3LinInstance, k: usize) -> Result<Vec<Vec<usize>>> {
    inst.validate()?;
    if k == 0 {
        return Err(Error::usage("need at least one equation per question"));
    }
    Ok(combinations(inst.equations.len(), k)
        .into_iter()
        .filter(|u| validate_question(inst, u).is_ok())
        .collect())
}

fn coefficient_row(inst: &Gap3LinInstance, e: usize) -> Vector {
    let eq = &inst.equations[e];
    let mut row = vec![0; inst.num_vars];
    for t in 0..3 {
        row[eq.vars[t]] = eq.coeffs[t];
    }
    row
}

/// Span of the coefficient rows of the question's equations.
pub fn h_subspace(inst: &Gap3LinInstance, u: &[usize]) -> Result<Subspace> {
    validate_question(inst, u)?;
    let field = inst.field()?;
    let rows = u.iter().map(|&e| coefficient_row(inst, e)).collect();
    let h = Subspace::canonicalize(&field, inst.num_vars, rows)?;
    debug_assert_eq!(h.dim(), u.len());
    Ok(h)
}

/// Coordinate subspace spanned by the unit vectors of the question's
/// variables.
pub fn question_space(inst: &Gap3LinInstance, u: &[usize]) -> Result<Subspace> {
    validate_question(inst, u)?;
    let field = inst.field()?;
    let mut rows = Vec::new();
    for &e in u {
        for &x in &inst.equations[e].vars {
            let mut unit = vec![0; inst.num_vars];
            unit[x] = field.one();
            rows.push(unit);
        }
    }
    Subspace::canonicalize(&field, inst.num_vars, rows)
}

/// Side condition pinning each coefficient row of the question to its
/// equation's right-hand side.
pub fn side_condition(inst: &Gap3LinInstance, u: &[usize]) -> Result<SideCondition> {
    validate_question(inst, u)?;
    let field = inst.field()?;
    let vectors: Vec<Vector> = u.iter().map(|&e| coefficient_row(inst, e)).collect();
    let values: Vec<Elem> = u.iter().map(|&e| inst.equations[e].rhs).collect();
    SideCondition::from_pins(&field, inst.num_vars, &vectors, &values)
}

/// Deterministic complement of `avoid` inside `within`, assembled from the
/// reduced rows of `within` in order. Keeping the stored complement
/// canonical makes vertex identity independent of which complement the
/// caller happened to sample.
/// Left vertex: a question together with the key `L + H_U`. The stored
/// complement is canonical, so constructions from different complements of
/// the same key compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LeftVertex {
    u: Vec<usize>,
    key: Subspace,
    l: Subspace,
}

impl LeftVertex {
    pub fn new(
        inst: &Gap3LinInstance,
        params: &ComposedParams,
        u: Vec<usize>,
        l_raw: &Subspace,
    ) -> Result<LeftVertex> {
        params.validate()?;
        if u.len() != params.k {
            return Err(Error::usage(format!(
                "question has {} equations, parameters ask for {}",
                u.len(),
                params.k
            )));
        }
        let h = h_subspace(inst, &u)?;
        let space = question_space(inst, &u)?;
        if l_raw.dim() != params.l1 {
            return Err(Error::usage(format!(
                "left complement has dimension {}, parameters ask for {}",
                l_raw.dim(),
                params.l1
            )));
        }
        if !space.contains(l_raw) {
            return Err(Error::domain(
                "left complement leaves the question's coordinates",
            ));
        }
        let key = l_raw.sum(&h)?;
        if key.dim() != params.l1 + params.k {
            return Err(Error::domain("left complement meets the pinned span"));
        }
        let l = greedy_complement(&key, &h)?;
        Ok(LeftVertex { u, key, l })
    }

    pub fn question(&self) -> &[usize] {
        &self.u
    }

    /// The table key `L + H_U`.
    pub fn key(&self) -> &Subspace {
        &self.key
    }

    /// Canonical complement of the pinned span inside the key.
    pub fn l(&self) -> &Subspace {
        &self.l
    }
}

/// Right vertex: an `l2`-dimensional subspace inside a left complement,
/// remembered with the question it was drawn for. The right table is keyed
/// by the subspace alone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RightVertex {
    pub u: Vec<usize>,
    pub r: Subspace,
}

/// Are two left vertices related: does each key joined with the other
/// vertex's pinned span produce the same space?
pub fn equiv_related(inst: &Gap3LinInstance, a: &LeftVertex, b: &LeftVertex) -> Result<bool> {
    let ha = h_subspace(inst, a.question())?;
    let hb = h_subspace(inst, b.question())?;
    Ok(a.key.sum(&hb)? == b.key.sum(&ha)?)
}

/// Result of scanning every question for vertices related to one vertex.
#[derive(Debug, Clone)]
pub struct CliqueScan {
    /// All related vertices, the scanned vertex included, sorted ascending.
    pub members: Vec<LeftVertex>,
    /// Number of questions contributing at least one member.
    pub questions_hit: usize,
}

impl CliqueScan {
    /// Canonical clique identifier: the least member.
    pub fn id(&self) -> &LeftVertex {
        &self.members[0]
    }
}

/// Collect every left vertex related to `v` by scanning all filtered
/// questions and enumerating candidate complements inside the span the
/// relation forces.
pub fn clique_members(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    v: &LeftVertex,
) -> Result<CliqueScan> {
    params.validate()?;
    let field = inst.field()?;
    let zero = Subspace::zero(&field, inst.num_vars)?;
    let h_v = h_subspace(inst, v.question())?;
    let mut members: BTreeSet<LeftVertex> = BTreeSet::new();
    let mut questions_hit = 0;
    for u2 in filtered_questions(inst, params.k)? {
        let h2 = h_subspace(inst, &u2)?;
        let joined = v.key.sum(&h2)?;
        let candidate = question_space(inst, &u2)?.intersect(&joined)?;
        if candidate.dim() < params.l1 {
            continue;
        }
        let mut hit = false;
        for cand in ZoomPair::new(zero.clone(), candidate)?.enumerate(params.l1, params.enum_cap)? {
            let key2 = cand.sum(&h2)?;
            if key2.dim() != params.l1 + params.k {
                continue;
            }
            if key2.sum(&h_v)? != joined {
                continue;
            }
            members.insert(LeftVertex::new(inst, params, u2.clone(), &cand)?);
            hit = true;
        }
        if hit {
            questions_hit += 1;
        }
    }
    debug_assert!(members.contains(v));
    Ok(CliqueScan {
        members: members.into_iter().collect(),
        questions_hit,
    })
}

/// Enumerate the whole left vertex set. Only sensible at toy scale; the
/// enumeration cap aborts anything larger.
pub fn left_vertices(inst: &Gap3LinInstance, params: &ComposedParams) -> Result<Vec<LeftVertex>> {
    params.validate()?;
    let field = inst.field()?;
    let zero = Subspace::zero(&field, inst.num_vars)?;
    let mut out: BTreeSet<LeftVertex> = BTreeSet::new();
    for u in filtered_questions(inst, params.k)? {
        let space = question_space(inst, &u)?;
        let h = h_subspace(inst, &u)?;
        for l in ZoomPair::new(zero.clone(), space)?.enumerate(params.l1, params.enum_cap)? {
            if l.sum(&h)?.dim() != params.l1 + params.k {
                continue;
            }
            out.insert(LeftVertex::new(inst, params, u.clone(), &l)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// One sampled constraint: a left vertex, a right subspace inside the
/// complement it was drawn with, and a uniform member of the vertex's
/// clique.
#[derive(Debug, Clone)]
pub struct SampledConstraint {
    pub left: LeftVertex,
    pub right: RightVertex,
    pub member: LeftVertex,
    pub clique_size: usize,
}

/// Sample a constraint: uniform question, uniform left complement avoiding
/// the pinned span, uniform right subspace inside that complement, uniform
/// clique member.
pub fn sample_constraint<R: Rng + ?Sized>(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    rng: &mut R,
) -> Result<SampledConstraint> {
    params.validate()?;
    let questions = filtered_questions(inst, params.k)?;
    if questions.is_empty() {
        return Err(Error::domain(
            "no equation set passes the disjointness filter",
        ));
    }
    let u = questions[rng.gen_range(0..questions.len())].clone();
    let field = inst.field()?;
    let zero = Subspace::zero(&field, inst.num_vars)?;
    let space = question_space(inst, &u)?;
    let h = h_subspace(inst, &u)?;
    let pair = ZoomPair::new(zero.clone(), space)?;
    let mut l_raw = None;
    for _ in 0..params.sample_cap {
        let l = pair.sample(params.l1, rng)?;
        if l.sum(&h)?.dim() == params.l1 + params.k {
            l_raw = Some(l);
            break;
        }
    }
    let l_raw =
        l_raw.ok_or_else(|| Error::resource("left complement rejection cap exhausted"))?;
    let r = ZoomPair::new(zero, l_raw.clone())?.sample(params.l2, rng)?;
    let left = LeftVertex::new(inst, params, u.clone(), &l_raw)?;
    let scan = clique_members(inst, params, &left)?;
    let member = scan.members[rng.gen_range(0..scan.members.len())].clone();
    Ok(SampledConstraint {
        left,
        right: RightVertex { u, r },
        member,
        clique_size: scan.members.len(),
    })
}

/// Left assignment table: one functional per left vertex, with the vertex
/// key as domain. Small tables are materialized; large ones are backed by a
/// pure generator.
#[derive(Clone)]
pub struct LeftTable {
    source: LeftSource,
}

#[derive(Clone)]
enum LeftSource {
    Dense(Arc<BTreeMap<LeftVertex, LinearFunctional>>),
    Generated(Arc<dyn Fn(&LeftVertex) -> Option<LinearFunctional> + Send + Sync>),
}

impl LeftTable {
    pub fn dense(entries: BTreeMap<LeftVertex, LinearFunctional>) -> Result<LeftTable> {
        for (v, f) in &entries {
            if f.domain() != v.key() {
                return Err(Error::usage(
                    "table entry domain differs from its vertex key",
                ));
            }
        }
        Ok(LeftTable {
            source: LeftSource::Dense(Arc::new(entries)),
        })
    }

    pub fn generated<G>(generator: G) -> LeftTable
    where
        G: Fn(&LeftVertex) -> Option<LinearFunctional> + Send + Sync + 'static,
    {
        LeftTable {
            source: LeftSource::Generated(Arc::new(generator)),
        }
    }

    pub fn get(&self, v: &LeftVertex) -> Option<LinearFunctional> {
        match &self.source {
            LeftSource::Dense(map) => map.get(v).cloned(),
            LeftSource::Generated(g) => {
                let f = g(v)?;
                debug_assert_eq!(f.domain(), v.key());
                Some(f)
            }
        }
    }
}

/// Outcome of checking one constraint against a pair of tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintOutcome {
    Accept,
    Reject,
    /// Either table lacks the queried entry.
    Missing,
}

/// Transport the clique member's entry to the sampled vertex through both
/// side conditions and compare it with the right table on the right
/// subspace.
pub fn check_constraint(
    inst: &Gap3LinInstance,
    t1: &LeftTable,
    t2: &AgreementTable,
    c: &SampledConstraint,
) -> Result<ConstraintOutcome> {
    let f = match t1.get(&c.member) {
        Some(f) => f,
        None => return Ok(ConstraintOutcome::Missing),
    };
    let g = match t2.get(&c.right.r) {
        Some(g) => g,
        None => return Ok(ConstraintOutcome::Missing),
    };
    let side_from = side_condition(inst, c.member.question())?;
    let side_to = side_condition(inst, c.left.question())?;
    let transported = clique_extension(&f, &side_from, c.left.l(), &side_to)?;
    if transported.restrict(&c.right.r)?.agrees_with(&g) {
        Ok(ConstraintOutcome::Accept)
    } else {
        Ok(ConstraintOutcome::Reject)
    }
}

/// Tables induced by one global assignment. Left entries follow the global
/// functional on the complement and the pins on the span (so they coincide
/// with a plain restriction exactly when the assignment satisfies the
/// question); right entries are plain restrictions.
pub fn honest_assignment(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    sigma: &[Elem],
) -> Result<(LeftTable, AgreementTable)> {
    params.validate()?;
    inst.validate()?;
    let field = inst.field()?;
    if sigma.len() != inst.num_vars {
        return Err(Error::usage(format!(
            "assignment has {} entries for {} variables",
            sigma.len(),
            inst.num_vars
        )));
    }
    if sigma.iter().any(|&x| x >= field.order()) {
        return Err(Error::usage("assignment entry outside the field"));
    }
    let full = Subspace::full(&field, inst.num_vars)?;
    let global = LinearFunctional::from_inner_product(full, sigma);
    let t2 = honest_table(&global, params.l2);
    let inst1 = inst.clone();
    let g1 = global.clone();
    let t1 = LeftTable::generated(move |v| {
        let side = side_condition(&inst1, v.question()).ok()?;
        honest_functional_under_condition(&g1, v.l(), &side).ok()
    });
    Ok((t1, t2))
}

fn subspace_seed(s: &Subspace) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for row in s.rows() {
        for &x in row {
            h ^= u64::from(x).wrapping_add(1);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn vertex_seed(v: &LeftVertex) -> u64 {
    let mut h = subspace_seed(v.key());
    for &e in v.question() {
        h ^= (e as u64).wrapping_add(0x517c);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent uniformly random legal tables, reproducible from the seed.
/// Left entries are uniform on the complement and pinned on the span; right
/// entries are uniform.
pub fn random_assignment(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    seed: u64,
) -> Result<(LeftTable, AgreementTable)> {
    params.validate()?;
    inst.validate()?;
    let inst1 = inst.clone();
    let t1 = LeftTable::generated(move |v| {
        let side = side_condition(&inst1, v.question()).ok()?;
        let mut rng = shard_rng(seed, vertex_seed(v));
        let on_l = LinearFunctional::random(v.l().clone(), &mut rng);
        unique_extension(v.key(), &[&on_l, side.psi()]).ok()
    });
    let t2 = AgreementTable::generated(params.l2, move |r| {
        let mut rng = shard_rng(seed ^ 0x9e37_79b9_7f4a_7c15, subspace_seed(r));
        Some(LinearFunctional::random(r.clone(), &mut rng))
    });
    Ok((t1, t2))
}

/// Rebuild the left table so each clique carries one transported entry: a
/// uniform member donates, and its entry is transported to every member.
/// Cliques whose donor lacks an entry stay missing.
pub fn clique_consistify<R: Rng + ?Sized>(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    t1: &LeftTable,
    rng: &mut R,
) -> Result<LeftTable> {
    let mut out: BTreeMap<LeftVertex, LinearFunctional> = BTreeMap::new();
    let mut seen: BTreeSet<LeftVertex> = BTreeSet::new();
    for v in left_vertices(inst, params)? {
        if seen.contains(&v) {
            continue;
        }
        let scan = clique_members(inst, params, &v)?;
        let donor = &scan.members[rng.gen_range(0..scan.members.len())];
        if let Some(f) = t1.get(donor) {
            let side_from = side_condition(inst, donor.question())?;
            for w in &scan.members {
                let side_to = side_condition(inst, w.question())?;
                out.insert(w.clone(), clique_extension(&f, &side_from, w.l(), &side_to)?);
            }
        }
        seen.extend(scan.members.into_iter());
    }
    LeftTable::dense(out)
}

/// Do all intra-clique transports reproduce the stored entries? A clique
/// with every entry missing passes vacuously; mixed presence fails.
pub fn is_clique_consistent(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    t1: &LeftTable,
) -> Result<bool> {
    let mut seen: BTreeSet<LeftVertex> = BTreeSet::new();
    for v in left_vertices(inst, params)? {
        if seen.contains(&v) {
            continue;
        }
        let scan = clique_members(inst, params, &v)?;
        let entries: Vec<Option<LinearFunctional>> =
            scan.members.iter().map(|w| t1.get(w)).collect();
        let present = entries.iter().filter(|e| e.is_some()).count();
        if present != 0 && present != entries.len() {
            return Ok(false);
        }
        if present != 0 {
            for (i, a) in scan.members.iter().enumerate() {
                let fa = entries[i].as_ref().unwrap();
                let side_a = side_condition(inst, a.question())?;
                for (j, b) in scan.members.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let side_b = side_condition(inst, b.question())?;
                    let moved = clique_extension(fa, &side_a, b.l(), &side_b)?;
                    if !moved.agrees_with(entries[j].as_ref().unwrap()) {
                        return Ok(false);
                    }
                }
            }
        }
        seen.extend(scan.members.into_iter());
    }
    Ok(true)
}

/// Monte Carlo acceptance report for a pair of tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueReport {
    pub trials: u64,
    pub accepts: u64,
    pub rejects: u64,
    /// Constraints whose left or right entry was absent. Counted separately
    /// and never as acceptance.
    pub missing: u64,
    /// Acceptance rate over all trials.
    pub estimate: RateEstimate,
}

/// Estimate the acceptance probability of a table pair over independently
/// sampled constraints.
pub fn estimate_value(
    inst: &Gap3LinInstance,
    params: &ComposedParams,
    t1: &LeftTable,
    t2: &AgreementTable,
    trials: u64,
    seed: u64,
) -> Result<ValueReport> {
    params.validate()?;
    inst.validate()?;
    if trials == 0 {
        return Err(Error::usage("need at least one trial"));
    }
    let (accepts, rejects, missing) = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64, u64)> {
            let mut rng = shard_rng(seed, trial);
            let c = sample_constraint(inst, params, &mut rng)?;
            Ok(match check_constraint(inst, t1, t2, &c)? {
                ConstraintOutcome::Accept => (1, 0, 0),
                ConstraintOutcome::Reject => (0, 1, 0),
                ConstraintOutcome::Missing => (0, 0, 1),
            })
        })
        .try_reduce(
            || (0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)),
        )?;
    Ok(ValueReport {
        trials,
        accepts,
        rejects,
        missing,
        estimate: RateEstimate::new(accepts, trials),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outer::Equation;
    use crate::stats::{chi_squared_ok, within_sigmas};

    fn disjoint_instance(m: usize) -> Gap3LinInstance {
        let equations = (0..m)
            .map(|i| Equation {
                vars: [3 * i, 3 * i + 1, 3 * i + 2],
                coeffs: [1, 1, 1],
                rhs: 0,
            })
            .collect();
        Gap3LinInstance {
            q: 2,
            num_vars: 3 * m,
            equations,
        }
    }

    fn unit(n: usize, i: usize) -> Vector {
        let mut v = vec![0; n];
        v[i] = 1;
        v
    }

    #[test]
    fn question_filter_flags_sharing_and_bridging() {
        let inst = Gap3LinInstance {
            q: 2,
            num_vars: 7,
            equations: vec![
                Equation {
                    vars: [0, 1, 2],
                    coeffs: [1, 1, 1],
                    rhs: 0,
                },
                Equation {
                    vars: [3, 4, 5],
                    coeffs: [1, 1, 1],
                    rhs: 0,
                },
                Equation {
                    vars: [0, 3, 6],
                    coeffs: [1, 1, 1],
                    rhs: 1,
                },
            ],
        };
        inst.validate().unwrap();

        let err = validate_question(&inst, &[0, 2]).unwrap_err();
        assert!(err.to_string().contains("share variable 0"), "{err}");
        let err = validate_question(&inst, &[0, 1]).unwrap_err();
        assert!(err.to_string().contains("bridges"), "{err}");

        assert!(filtered_questions(&inst, 2).unwrap().is_empty());
        assert_eq!(
            filtered_questions(&inst, 1).unwrap(),
            vec![vec![0], vec![1], vec![2]]
        );

        let clean = disjoint_instance(4);
        assert_eq!(filtered_questions(&clean, 2).unwrap().len(), 6);
    }

    #[test]
    fn pinned_span_matches_worked_examples() {
        let inst = disjoint_instance(1);
        let h = h_subspace(&inst, &[0]).unwrap();
        assert_eq!(h.rows(), &[vec![1, 1, 1]]);

        let inst = disjoint_instance(3);
        let h = h_subspace(&inst, &[0, 2]).unwrap();
        assert_eq!(
            h.rows(),
            &[
                vec![1, 1, 1, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 1, 1, 1]
            ]
        );
        let space = question_space(&inst, &[0, 2]).unwrap();
        assert_eq!(space.dim(), 6);
        assert!(space.contains(&h));
    }

    #[test]
    fn left_vertex_identity_ignores_the_complement_choice() {
        let inst = disjoint_instance(1);
        let params = ComposedParams::new(1, 2, 1);
        let f = inst.field().unwrap();
        let la = Subspace::canonicalize(&f, 3, vec![unit(3, 0), unit(3, 1)]).unwrap();
        let lb = Subspace::canonicalize(&f, 3, vec![unit(3, 0), unit(3, 2)]).unwrap();
        let va = LeftVertex::new(&inst, &params, vec![0], &la).unwrap();
        let vb = LeftVertex::new(&inst, &params, vec![0], &lb).unwrap();
        assert_eq!(va, vb);
        assert_eq!(va.key().dim(), 3);
        assert_eq!(va.l().sum(&h_subspace(&inst, &[0]).unwrap()).unwrap(), *va.key());
        assert!(equiv_related(&inst, &va, &vb).unwrap());

        let h = Subspace::canonicalize(&f, 3, vec![vec![1, 1, 1], unit(3, 0)]).unwrap();
        let err = LeftVertex::new(&inst, &params, vec![0], &h).unwrap_err();
        assert!(err.to_string().contains("meets the pinned span"), "{err}");
    }

    #[test]
    fn isolated_questions_have_singleton_cliques() {
        let inst = disjoint_instance(3);
        let params = ComposedParams::new(1, 2, 1);
        let vertices = left_vertices(&inst, &params).unwrap();
        assert_eq!(vertices.len(), 3);
        for v in &vertices {
            let scan = clique_members(&inst, &params, v).unwrap();
            assert_eq!(scan.members, vec![v.clone()]);
            assert_eq!(scan.questions_hit, 1);
            assert_eq!(scan.id(), v);
        }
    }

    #[test]
    fn block_confined_vertices_share_a_clique_across_questions() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let f = inst.field().unwrap();
        let n = inst.num_vars;
        let l = Subspace::canonicalize(&f, n, vec![unit(n, 0), unit(n, 1)]).unwrap();
        let v = LeftVertex::new(&inst, &params, vec![0, 1], &l).unwrap();
        let scan = clique_members(&inst, &params, &v).unwrap();
        assert_eq!(scan.members.len(), 3);
        assert_eq!(scan.questions_hit, 3);
        assert!(scan.questions_hit <= 100);
        let questions: Vec<&[usize]> = scan.members.iter().map(|m| m.question()).collect();
        assert_eq!(questions, vec![&[0, 1][..], &[0, 2], &[0, 3]]);
        for m in &scan.members {
            assert!(equiv_related(&inst, &v, m).unwrap());
        }

        let mixed = Subspace::canonicalize(
            &f,
            n,
            vec![
                vec![1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
            ],
        )
        .unwrap();
        let w = LeftVertex::new(&inst, &params, vec![0, 1], &mixed).unwrap();
        let scan = clique_members(&inst, &params, &w).unwrap();
        assert_eq!(scan.members, vec![w.clone()]);
    }

    #[test]
    fn clique_triples_satisfy_the_relation_transitively() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let vertices = left_vertices(&inst, &params).unwrap();
        assert_eq!(vertices.len(), 210);

        let mut cliques: Vec<Vec<LeftVertex>> = Vec::new();
        let mut seen: BTreeSet<LeftVertex> = BTreeSet::new();
        for v in &vertices {
            if seen.contains(v) {
                continue;
            }
            let scan = clique_members(&inst, &params, v).unwrap();
            seen.extend(scan.members.iter().cloned());
            cliques.push(scan.members);
        }

        let mut rng = shard_rng(3007, 0);
        for _ in 0..500 {
            let clique = &cliques[rng.gen_range(0..cliques.len())];
            let a = &clique[rng.gen_range(0..clique.len())];
            let b = &clique[rng.gen_range(0..clique.len())];
            let c = &clique[rng.gen_range(0..clique.len())];
            assert!(equiv_related(&inst, a, b).unwrap());
            assert!(equiv_related(&inst, b, c).unwrap());
            assert!(equiv_related(&inst, a, c).unwrap());
        }

        let ids: Vec<&LeftVertex> = cliques.iter().map(|c| &c[0]).collect();
        for pair in ids.windows(2).take(20) {
            assert!(!equiv_related(&inst, pair[0], pair[1]).unwrap());
        }
    }

    #[test]
    fn constraint_sampler_postconditions_hold() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let mut rng = shard_rng(41, 0);
        for _ in 0..100 {
            let c = sample_constraint(&inst, &params, &mut rng).unwrap();
            assert_eq!(c.right.u, c.left.question());
            assert_eq!(c.right.r.dim(), params.l2);
            assert!(c.left.key().contains(&c.right.r));
            assert!(h_subspace(&inst, c.left.question())
                .unwrap()
                .intersect(&c.right.r)
                .unwrap()
                .is_zero());
            assert!(equiv_related(&inst, &c.left, &c.member).unwrap());
            assert!(c.clique_size >= 1);
        }
    }

    #[test]
    fn question_marginal_is_uniform() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let questions = filtered_questions(&inst, 2).unwrap();
        let mut counts = vec![0u64; questions.len()];
        let trials = 10_000u64;
        for trial in 0..trials {
            let mut rng = shard_rng(57, trial);
            let c = sample_constraint(&inst, &params, &mut rng).unwrap();
            let pos = questions
                .iter()
                .position(|u| u.as_slice() == c.left.question())
                .unwrap();
            counts[pos] += 1;
        }
        let expected = vec![trials as f64 / questions.len() as f64; questions.len()];
        assert!(chi_squared_ok(&counts, &expected, 4.0));
    }

    #[test]
    fn honest_tables_accept_satisfying_assignments() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let sigma = vec![0; inst.num_vars];
        let (t1, t2) = honest_assignment(&inst, &params, &sigma).unwrap();
        let report = estimate_value(&inst, &params, &t1, &t2, 500, 7).unwrap();
        assert_eq!(report.accepts, 500);
        assert_eq!(report.missing, 0);
        assert_eq!(report.estimate.rate, 1.0);
    }

    #[test]
    fn honest_value_respects_the_violation_budget() {
        let mut inst = disjoint_instance(4);
        inst.equations[3].rhs = 1;
        let params = ComposedParams::new(2, 2, 1);
        let sigma = vec![0; inst.num_vars];
        let (t1, t2) = honest_assignment(&inst, &params, &sigma).unwrap();

        let vertices = left_vertices(&inst, &params).unwrap();
        for v in vertices.iter().step_by(7) {
            let entry = t1.get(v).unwrap();
            let side = side_condition(&inst, v.question()).unwrap();
            assert!(side.check(&entry).unwrap());
        }

        let trials = 2_000u64;
        let report = estimate_value(&inst, &params, &t1, &t2, trials, 11).unwrap();
        let bound = 1.0 - 2.0 / 4.0;
        assert!(
            report.estimate.rate + report.estimate.radius >= bound,
            "rate {} under bound {bound}",
            report.estimate.rate
        );
        assert_eq!(report.missing, 0);
    }

    #[test]
    fn tampered_right_entries_are_rejected() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let sigma = vec![0; inst.num_vars];
        let (t1, _) = honest_assignment(&inst, &params, &sigma).unwrap();
        let t2 = AgreementTable::generated(params.l2, |r| {
            let one = vec![1; r.dim()];
            LinearFunctional::new(r.clone(), one).ok()
        });
        let report = estimate_value(&inst, &params, &t1, &t2, 500, 13).unwrap();
        assert_eq!(report.accepts, 0);
        assert_eq!(report.rejects, 500);
    }

    #[test]
    fn missing_entries_are_counted_separately() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let t1 = LeftTable::dense(BTreeMap::new()).unwrap();
        let (_, t2) = honest_assignment(&inst, &params, &vec![0; inst.num_vars]).unwrap();
        let report = estimate_value(&inst, &params, &t1, &t2, 200, 17).unwrap();
        assert_eq!(report.missing, 200);
        assert_eq!(report.accepts, 0);
        assert_eq!(report.rejects, 0);
    }

    #[test]
    fn random_tables_score_near_chance() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let (t1, t2) = random_assignment(&inst, &params, 4242).unwrap();
        let trials = 4_000u64;
        let report = estimate_value(&inst, &params, &t1, &t2, trials, 19).unwrap();
        assert!(
            within_sigmas(report.accepts, trials, 0.5, 4.0),
            "rate {}",
            report.estimate.rate
        );
    }

    #[test]
    fn honest_tables_are_clique_consistent() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let sigma = vec![0; inst.num_vars];
        let (t1, _) = honest_assignment(&inst, &params, &sigma).unwrap();
        assert!(is_clique_consistent(&inst, &params, &t1).unwrap());

        let (bad, _) = random_assignment(&inst, &params, 90).unwrap();
        assert!(!is_clique_consistent(&inst, &params, &bad).unwrap());
    }

    #[test]
    fn consistify_produces_consistent_tables_and_keeps_honest_entries() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let sigma = vec![0; inst.num_vars];
        let (honest, _) = honest_assignment(&inst, &params, &sigma).unwrap();
        let mut rng = shard_rng(23, 0);
        let fixed = clique_consistify(&inst, &params, &honest, &mut rng).unwrap();
        assert!(is_clique_consistent(&inst, &params, &fixed).unwrap());
        for v in left_vertices(&inst, &params).unwrap() {
            assert!(fixed.get(&v).unwrap().agrees_with(&honest.get(&v).unwrap()));
        }

        let (random, _) = random_assignment(&inst, &params, 91).unwrap();
        let mut rng = shard_rng(29, 0);
        let fixed = clique_consistify(&inst, &params, &random, &mut rng).unwrap();
        assert!(is_clique_consistent(&inst, &params, &fixed).unwrap());
    }

    #[test]
    fn consistify_preserves_value_in_expectation() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let (t1, t2) = random_assignment(&inst, &params, 314).unwrap();
        let trials = 2_000u64;
        let base = estimate_value(&inst, &params, &t1, &t2, trials, 37).unwrap();

        let seeds = 20u64;
        let mut total = 0.0;
        for s in 0..seeds {
            let mut rng = shard_rng(43, s);
            let fixed = clique_consistify(&inst, &params, &t1, &mut rng).unwrap();
            let rep = estimate_value(&inst, &params, &fixed, &t2, trials, 47 + s).unwrap();
            total += rep.estimate.rate;
        }
        let mean = total / seeds as f64;
        let sigma = (0.25f64 / trials as f64).sqrt() * (1.0 + 1.0 / (seeds as f64).sqrt());
        assert!(
            (mean - base.estimate.rate).abs() <= 4.0 * sigma,
            "mean {mean} vs base {}",
            base.estimate.rate
        );
    }

    #[test]
    fn consistent_tables_check_like_direct_restriction() {
        let inst = disjoint_instance(4);
        let params = ComposedParams::new(2, 2, 1);
        let (t1, t2) = random_assignment(&inst, &params, 1001).unwrap();
        let mut rng = shard_rng(53, 0);
        let fixed = clique_consistify(&inst, &params, &t1, &mut rng).unwrap();
        for trial in 0..1_000u64 {
            let mut rng = shard_rng(59, trial);
            let c = sample_constraint(&inst, &params, &mut rng).unwrap();
            let via_clique = check_constraint(&inst, &fixed, &t2, &c).unwrap();
            let direct = fixed
                .get(&c.left)
                .unwrap()
                .restrict(&c.right.r)
                .unwrap()
                .agrees_with(&t2.get(&c.right.r).unwrap());
            assert_eq!(via_clique == ConstraintOutcome::Accept, direct);
        }
    }

    #[test]
    fn left_entries_satisfy_their_side_conditions() {
        let inst = disjoint_instance(4);
        let mut violated = inst.clone();
        violated.equations[1].rhs = 1;
        let params = ComposedParams::new(2, 2, 1);
        let sigma: Vec<Elem> = (0..inst.num_vars).map(|i| (i % 2) as Elem).collect();

        let mut tables: Vec<(Gap3LinInstance, LeftTable)> = Vec::new();
        let (t, _) = honest_assignment(&inst, &params, &vec![0; inst.num_vars]).unwrap();
        tables.push((inst.clone(), t));
        let (t, _) = honest_assignment(&inst, &params, &sigma).unwrap();
        tables.push((inst.clone(), t));
        let (t, _) = honest_assignment(&violated, &params, &vec![0; inst.num_vars]).unwrap();
        tables.push((violated.clone(), t));
        let (t, _) = random_assignment(&inst, &params, 777).unwrap();
        let mut rng = shard_rng(83, 0);
        let fixed = clique_consistify(&inst, &params, &t, &mut rng).unwrap();
        tables.push((inst.clone(), t));
        tables.push((inst.clone(), fixed));

        let mut checked = 0u64;
        for (which, t1) in &tables {
            for v in left_vertices(which, &params).unwrap() {
                let entry = t1.get(&v).unwrap();
                let side = side_condition(which, v.question()).unwrap();
                assert!(side.check(&entry).unwrap());
                checked += 1;
            }
        }
        assert!(checked >= 1_000, "only {checked} entries checked");
    }

    #[test]
    fn zeroed_left_table_matches_direct_count() {
        let inst = disjoint_instance(3);
        let params = ComposedParams::new(1, 2, 1);
        let field = inst.field().unwrap();
        let n = inst.num_vars;

        let sigma: Vec<Elem> = vec![1, 0, 0, 0, 1, 0, 0, 0, 0];
        let full = Subspace::full(&field, n).unwrap();
        let global = LinearFunctional::from_inner_product(full, &sigma);
        let t2 = honest_table(&global, params.l2);
        let inst1 = inst.clone();
        let t1 = LeftTable::generated(move |v| {
            let side = side_condition(&inst1, v.question()).ok()?;
            let zero = LinearFunctional::zero(v.l().clone());
            unique_extension(v.key(), &[&zero, side.psi()]).ok()
        });

        // Direct enumeration of the same process: per question, the right
        // line is uniform over the lines of the question space other than
        // the pinned one, and the zeroed entry evaluates each line through
        // its pinned component only.
        let questions = filtered_questions(&inst, 1).unwrap();
        let mut favorable = 0u64;
        let mut outcomes = 0u64;
        for u in &questions {
            let space = question_space(&inst, u).unwrap();
            let h = h_subspace(&inst, u).unwrap();
            let side = side_condition(&inst, u).unwrap();
            let entry = {
                let key = space.clone();
                let l = greedy_complement(&key, &h).unwrap();
                let zero = LinearFunctional::zero(l);
                unique_extension(&key, &[&zero, side.psi()]).unwrap()
            };
            let zero_sub = Subspace::zero(&field, n).unwrap();
            for line in ZoomPair::new(zero_sub, space.clone())
                .unwrap()
                .enumerate(1, 1 << 10)
                .unwrap()
            {
                if !h.intersect(&line).unwrap().is_zero() {
                    continue;
                }
                outcomes += 1;
                if entry
                    .restrict(&line)
                    .unwrap()
                    .agrees_with(&global.restrict(&line).unwrap())
                {
                    favorable += 1;
                }
            }
        }
        let exact = favorable as f64 / outcomes as f64;

        let trials = 20_000u64;
        let report = estimate_value(&inst, &params, &t1, &t2, trials, 61).unwrap();
        assert!(report.rejects > 0);
        assert!(
            within_sigmas(report.accepts, trials, exact, 4.0),
            "rate {} vs exact {exact}",
            report.estimate.rate
        );
    }
}
