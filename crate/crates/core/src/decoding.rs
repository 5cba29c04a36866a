//! Decoding one global linear function out of a family of local ones.
//!
//! The pieces here run the back half of the soundness pipeline at desk
//! scale: certify that a (subspace, functional) pair cannot be improved by
//! any strictly larger pair (`is_maximal`), climb a pair to such a summit
//! (`promote_to_maximal`), locate a zoom anchor whose conditioned table is
//! both popular and rarely wrong (`excellence_scan`), restrict a subspace
//! set until no single zoom step inflates its density (`restriction_walk`),
//! and finally read a single linear function off a family of locally
//! assigned ones by building their agreement graph, extracting a clique,
//! gluing, and self-correcting the glued table (`build_agreement_graph`,
//! `extract_clique_and_glue`).
//!
//! Everything is exhaustive and exact: probabilities are `BigRational`
//! counts over full enumerations, never sampled estimates.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, BigUint, One, Zero};
use serde::{Deserialize, Serialize};

use crate::agreement::blr;
use crate::error::{Error, Result};
use crate::field::Elem;
use crate::generic::{is_t_generic, GenericCheck, SubspaceFamily};
use crate::subspace::{
    gaussian_binomial, greedy_complement, vector_index, Subspace, SubspaceData, ZoomPair,
};
use crate::tables::{unique_extension, AgreementTable, FunctionalData, LinearFunctional};

fn big_ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Thresholds for the maximality test: a pair must reach agreement
/// `c_thresh`, and counts as blocked when some strictly larger pair reaches
/// `s_factor * c_thresh`. The zoom-in `q_in` is the anchor all considered
/// pairs share.
#[derive(Debug, Clone)]
pub struct MaximalityParams {
    c_thresh: BigRational,
    s_factor: BigRational,
    q_in: Subspace,
}

impl MaximalityParams {
    pub fn new(c_thresh: BigRational, s_factor: BigRational, q_in: Subspace) -> Result<Self> {
        if c_thresh <= BigRational::zero() {
            return Err(Error::usage("agreement threshold must be positive"));
        }
        if s_factor <= BigRational::zero() || s_factor > BigRational::one() {
            return Err(Error::usage("slack factor must lie in (0, 1]"));
        }
        Ok(MaximalityParams {
            c_thresh,
            s_factor,
            q_in,
        })
    }

    pub fn c_thresh(&self) -> &BigRational {
        &self.c_thresh
    }

    pub fn s_factor(&self) -> &BigRational {
        &self.s_factor
    }

    pub fn q_in(&self) -> &Subspace {
        &self.q_in
    }
}

/// A strictly larger pair that beats the slack threshold.
#[derive(Debug, Clone)]
pub struct BlockingWitness {
    pub w: Subspace,
    pub g: LinearFunctional,
    pub agreement: BigRational,
}

/// Outcome of `is_maximal`: the pair's own exact agreement, plus the first
/// blocking witness found when the pair is not maximal.
#[derive(Debug, Clone)]
pub struct MaximalityVerdict {
    pub maximal: bool,
    pub agreement: BigRational,
    pub witness: Option<BlockingWitness>,
}

/// Exact fraction of table entries between `q_in` and `w` (at the table's
/// dimension) on which `g` matches the table. Entries the table does not
/// define count as disagreements.
pub fn agreement_fraction(
    table: &AgreementTable,
    q_in: &Subspace,
    w: &Subspace,
    g: &LinearFunctional,
    cap: u64,
) -> Result<BigRational> {
    if g.domain() != w {
        return Err(Error::usage("functional is not defined on the outer space"));
    }
    let zoom = ZoomPair::new(q_in.clone(), w.clone())?;
    let entries = zoom.enumerate(table.dim(), cap)?;
    if entries.is_empty() {
        return Err(Error::domain(
            "no table entries lie between the zoom-in and the outer space",
        ));
    }
    let mut hits = 0u64;
    for l in &entries {
        if let Some(t) = table.get(l) {
            if t.agrees_with(&g.restrict(l)?) {
                hits += 1;
            }
        }
    }
    Ok(big_ratio(hits, entries.len() as u64))
}

/// All functionals on `target` that restrict to `f` on its domain, in a
/// fixed order: a base-q counter over the rows of the canonical complement
/// of the domain inside `target`, first row least significant.
fn extensions_of(
    f: &LinearFunctional,
    target: &Subspace,
    cap: u64,
) -> Result<Vec<LinearFunctional>> {
    let comp = greedy_complement(target, f.domain())?;
    let field = target.field().clone();
    let q = u64::from(field.order());
    let free = comp.dim();
    let total = q
        .checked_pow(free as u32)
        .filter(|&t| t <= cap)
        .ok_or_else(|| Error::resource("too many extensions to enumerate"))?;
    let mut out = Vec::with_capacity(total as usize);
    for idx in 0..total {
        let mut values = Vec::with_capacity(free);
        let mut rest = idx;
        for _ in 0..free {
            values.push((rest % q) as Elem);
            rest /= q;
        }
        let comp_fn = LinearFunctional::new(comp.clone(), values)?;
        out.push(unique_extension(target, &[f, &comp_fn])?);
    }
    Ok(out)
}

/// Tests whether `(zoom.w_out(), g)` is a maximal pair for `table`: its own
/// agreement over entries between `zoom.q_in()` and `zoom.w_out()` reaches
/// `c_thresh`, and no strictly larger outer space carries an extension of
/// `g` whose agreement reaches `s_factor * c_thresh`. The scan runs over
/// outer dimensions in ascending order, subspaces in canonical order, and
/// extensions in counter order, so the reported witness is deterministic.
pub fn is_maximal(
    table: &AgreementTable,
    zoom: &ZoomPair,
    g: &LinearFunctional,
    params: &MaximalityParams,
    cap: u64,
) -> Result<MaximalityVerdict> {
    if zoom.q_in() != params.q_in() {
        return Err(Error::usage(
            "the pair under test anchors at a different zoom-in than the parameters",
        ));
    }
    if g.domain() != zoom.w_out() {
        return Err(Error::usage("functional is not defined on the pair's outer space"));
    }
    let agreement = agreement_fraction(table, zoom.q_in(), zoom.w_out(), g, cap)?;
    if agreement < params.c_thresh {
        return Ok(MaximalityVerdict {
            maximal: false,
            agreement,
            witness: None,
        });
    }
    let w = zoom.w_out();
    let field = w.field().clone();
    let ambient = w.ambient();
    let full = Subspace::full(&field, ambient)?;
    let slack = &params.s_factor * &params.c_thresh;
    for dim in w.dim() + 1..=ambient {
        let larger = ZoomPair::new(w.clone(), full.clone())?.enumerate(dim, cap)?;
        for w_prime in larger {
            for g_prime in extensions_of(g, &w_prime, cap)? {
                let a = agreement_fraction(table, zoom.q_in(), &w_prime, &g_prime, cap)?;
                if a >= slack {
                    return Ok(MaximalityVerdict {
                        maximal: false,
                        agreement,
                        witness: Some(BlockingWitness {
                            w: w_prime,
                            g: g_prime,
                            agreement: a,
                        }),
                    });
                }
            }
        }
    }
    Ok(MaximalityVerdict {
        maximal: true,
        agreement,
        witness: None,
    })
}

/// One climb of the promotion loop, recorded after taking the witness.
#[derive(Debug, Clone)]
pub struct PromotionStep {
    pub w: Subspace,
    pub g: LinearFunctional,
    /// Threshold in force after this climb (the previous one times the
    /// slack factor).
    pub threshold: BigRational,
    pub agreement: BigRational,
}

/// Result of `promote_to_maximal`: the summit pair, the threshold it is
/// maximal at, the climb trace, and the final verdict that certified it.
#[derive(Debug, Clone)]
pub struct Promotion {
    pub zoom: ZoomPair,
    pub g: LinearFunctional,
    pub threshold: BigRational,
    pub steps: Vec<PromotionStep>,
    pub verdict: MaximalityVerdict,
}

/// Climbs a pair to a maximal one. Starting from a pair whose agreement
/// reaches `c_thresh`, repeatedly replaces it by a blocking witness and
/// multiplies the threshold by the slack factor, until `is_maximal`
/// certifies the current pair. Each climb strictly grows the outer space,
/// so the loop runs at most the starting pair's codimension many times and
/// the final threshold is `c_thresh * s_factor^steps`.
pub fn promote_to_maximal(
    table: &AgreementTable,
    zoom: &ZoomPair,
    g: &LinearFunctional,
    params: &MaximalityParams,
    cap: u64,
) -> Result<Promotion> {
    let start = agreement_fraction(table, zoom.q_in(), zoom.w_out(), g, cap)?;
    if start < params.c_thresh {
        return Err(Error::domain(format!(
            "starting agreement {start} is below the threshold {}",
            params.c_thresh
        )));
    }
    let max_climbs = zoom.w_out().ambient() - zoom.w_out().dim();
    let mut current = zoom.clone();
    let mut g_cur = g.clone();
    let mut threshold = params.c_thresh.clone();
    let mut steps = Vec::new();
    loop {
        let level = MaximalityParams::new(
            threshold.clone(),
            params.s_factor.clone(),
            params.q_in.clone(),
        )?;
        let verdict = is_maximal(table, &current, &g_cur, &level, cap)?;
        if verdict.maximal {
            debug_assert!(g_cur.restrict(zoom.w_out())?.agrees_with(g));
            return Ok(Promotion {
                zoom: current,
                g: g_cur,
                threshold,
                steps,
                verdict,
            });
        }
        let witness = verdict.witness.ok_or_else(|| {
            Error::logic("promotion lost its agreement floor without a blocking witness")
        })?;
        if steps.len() >= max_climbs {
            return Err(Error::logic("promotion exceeded the codimension step budget"));
        }
        threshold *= &params.s_factor;
        current = ZoomPair::new(params.q_in.clone(), witness.w.clone())?;
        g_cur = witness.g.clone();
        steps.push(PromotionStep {
            w: witness.w,
            g: witness.g,
            threshold: threshold.clone(),
            agreement: witness.agreement,
        });
    }
}

/// Serializable audit trail of a promotion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromotionReport {
    pub q_in: SubspaceData,
    pub w: SubspaceData,
    pub g: FunctionalData,
    pub threshold: String,
    pub agreement: String,
    pub steps: Vec<PromotionStepReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromotionStepReport {
    pub dim: usize,
    pub threshold: String,
    pub agreement: String,
}

impl Promotion {
    pub fn to_report(&self) -> PromotionReport {
        PromotionReport {
            q_in: self.zoom.q_in().to_data(),
            w: self.zoom.w_out().to_data(),
            g: self.g.to_data(),
            threshold: self.threshold.to_string(),
            agreement: self.verdict.agreement.to_string(),
            steps: self
                .steps
                .iter()
                .map(|s| PromotionStepReport {
                    dim: s.w.dim(),
                    threshold: s.threshold.to_string(),
                    agreement: s.agreement.to_string(),
                })
                .collect(),
        }
    }
}

/// A family of subspaces of a common ambient space, each carrying a linear
/// functional defined on it. Nodes are kept sorted by canonical subspace
/// order, must be distinct and of equal dimension strictly below the
/// ambient's, and may be empty.
#[derive(Debug, Clone)]
pub struct FunctionFamily {
    ambient: Subspace,
    subspaces: Vec<Subspace>,
    functions: Vec<LinearFunctional>,
}

impl FunctionFamily {
    pub fn new(ambient: Subspace, nodes: Vec<(Subspace, LinearFunctional)>) -> Result<Self> {
        let mut nodes = nodes;
        nodes.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in nodes.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::usage("family nodes must be distinct subspaces"));
            }
        }
        for (sub, f) in &nodes {
            if sub.field().order() != ambient.field().order() || sub.ambient() != ambient.ambient()
            {
                return Err(Error::usage("family node lives in a different space"));
            }
            if !ambient.contains(sub) {
                return Err(Error::usage("family node is not inside the ambient space"));
            }
            if sub.dim() >= ambient.dim() {
                return Err(Error::usage("family nodes must be proper subspaces"));
            }
            if f.domain() != sub {
                return Err(Error::usage("attached functional is not defined on its node"));
            }
        }
        if let Some(first) = nodes.first() {
            if nodes.iter().any(|(s, _)| s.dim() != first.0.dim()) {
                return Err(Error::usage("family nodes must share one dimension"));
            }
        }
        let (subspaces, functions) = nodes.into_iter().unzip();
        Ok(FunctionFamily {
            ambient,
            subspaces,
            functions,
        })
    }

    /// The family whose node functions are all restrictions of one global.
    pub fn honest(family: &SubspaceFamily, global: &LinearFunctional) -> Result<Self> {
        let mut nodes = Vec::with_capacity(family.len());
        for member in family.members() {
            nodes.push((member.clone(), global.restrict(member)?));
        }
        FunctionFamily::new(family.ambient().clone(), nodes)
    }

    pub fn ambient(&self) -> &Subspace {
        &self.ambient
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspace(&self, i: usize) -> &Subspace {
        &self.subspaces[i]
    }

    pub fn function(&self, i: usize) -> &LinearFunctional {
        &self.functions[i]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Subspace, &LinearFunctional)> {
        self.subspaces.iter().zip(self.functions.iter())
    }

    /// The bare subspace family, dropping the attached functions.
    pub fn to_family(&self) -> Result<SubspaceFamily> {
        SubspaceFamily::new(self.ambient.clone(), self.subspaces.clone())
    }
}

/// Exact disagreement statistics for one conditioned anchor: among pairs of
/// a family node through `x` carrying the label and a table entry inside
/// it, `q` is the fraction of entries whose table row restricts to the
/// label on `x`, and `p` the fraction of those that moreover disagree with
/// the node's own function.
#[derive(Debug, Clone)]
pub struct ExcellenceEntry {
    pub x: Subspace,
    pub sigma: LinearFunctional,
    /// Indices of the family nodes through `x` whose function restricts to
    /// `sigma`.
    pub members: Vec<usize>,
    pub p: BigRational,
    pub q: BigRational,
}

/// Full scan output: one entry per anchor pair that some node supports,
/// and the index of the best entry that cleared all three bars, if any.
#[derive(Debug, Clone)]
pub struct ExcellenceReport {
    pub entries: Vec<ExcellenceEntry>,
    pub best: Option<usize>,
    pub gamma: BigRational,
    pub c_thresh: BigRational,
    /// Population bar the best entry had to clear.
    pub min_members: BigRational,
}

/// The default precision bar for `excellence_scan`.
pub fn default_gamma() -> BigRational {
    big_ratio(1, 1_000_000)
}

/// Scans every anchor subspace of dimension `x_dim` and every label some
/// family node induces on it, computing the exact statistics `p` and `q`
/// for each. An entry is promoted to `best` when it keeps at least
/// `m / q^(10 * codim * table_dim)` of the nodes, reaches `q >= c_thresh / 2`,
/// and has `p < gamma * q`; among qualifiers the one with largest `q` wins,
/// ties to scan order.
pub fn excellence_scan(
    table: &AgreementTable,
    fam: &FunctionFamily,
    x_dim: usize,
    gamma: &BigRational,
    c_thresh: &BigRational,
    cap: u64,
) -> Result<ExcellenceReport> {
    if gamma <= &BigRational::zero() {
        return Err(Error::usage("precision bar must be positive"));
    }
    if c_thresh <= &BigRational::zero() {
        return Err(Error::usage("agreement threshold must be positive"));
    }
    if fam.is_empty() {
        return Ok(ExcellenceReport {
            entries: Vec::new(),
            best: None,
            gamma: gamma.clone(),
            c_thresh: c_thresh.clone(),
            min_members: BigRational::zero(),
        });
    }
    let member_dim = fam.subspace(0).dim();
    if x_dim > table.dim() || table.dim() > member_dim {
        return Err(Error::usage(
            "anchor dimension must be at most the table dimension, which must fit in the nodes",
        ));
    }
    let field = fam.ambient().field().clone();
    let q_order = field.order();
    let codim = fam.ambient().dim() - member_dim;
    let exponent = 10 * codim as u32 * table.dim() as u32;
    let min_members = BigRational::new(
        BigInt::from(fam.len()),
        BigUint::from(q_order).pow(exponent).into(),
    );

    let zero = Subspace::zero(&field, fam.ambient().ambient())?;
    let anchors = ZoomPair::new(zero, fam.ambient().clone())?.enumerate(x_dim, cap)?;
    let mut entries = Vec::new();
    for x in anchors {
        let mut groups: BTreeMap<Vec<Elem>, Vec<usize>> = BTreeMap::new();
        for (i, (sub, f)) in fam.nodes().enumerate() {
            if sub.contains(&x) {
                groups
                    .entry(f.restrict(&x)?.values().to_vec())
                    .or_default()
                    .push(i);
            }
        }
        for (sigma_values, members) in groups {
            let sigma = LinearFunctional::new(x.clone(), sigma_values)?;
            let mut total = 0u64;
            let mut labelled = 0u64;
            let mut wrong = 0u64;
            for &i in &members {
                let zoom = ZoomPair::new(x.clone(), fam.subspace(i).clone())?;
                for l in zoom.enumerate(table.dim(), cap)? {
                    total += 1;
                    let Some(t) = table.get(&l) else { continue };
                    if !t.restrict(&x)?.agrees_with(&sigma) {
                        continue;
                    }
                    labelled += 1;
                    if !t.agrees_with(&fam.function(i).restrict(&l)?) {
                        wrong += 1;
                    }
                }
            }
            entries.push(ExcellenceEntry {
                x: x.clone(),
                sigma,
                members,
                p: big_ratio(wrong, total),
                q: big_ratio(labelled, total),
            });
        }
    }

    let half_c = c_thresh / big_ratio(2, 1);
    let mut best: Option<usize> = None;
    for (i, e) in entries.iter().enumerate() {
        let populous = BigRational::from_integer(BigInt::from(e.members.len())) >= min_members;
        if populous && e.q >= half_c && e.p < gamma * &e.q {
            let better = best.map_or(true, |b| e.q > entries[b].q);
            if better {
                best = Some(i);
            }
        }
    }
    Ok(ExcellenceReport {
        entries,
        best,
        gamma: gamma.clone(),
        c_thresh: c_thresh.clone(),
        min_members,
    })
}

/// One restriction taken by the walk, with the density after taking it.
#[derive(Debug, Clone)]
pub struct WalkStep {
    pub a: Subspace,
    pub b: Subspace,
    pub eta: BigRational,
    /// True when the step grew the zoom-in, false when it shrank the
    /// zoom-out.
    pub zoomed_in: bool,
}

/// Result of `restriction_walk`: the final window, the surviving set and
/// its density, and the trace of restrictions taken.
#[derive(Debug, Clone)]
pub struct WalkReport {
    pub a: Subspace,
    pub b: Subspace,
    pub eta0: BigRational,
    pub eta: BigRational,
    pub steps: Vec<WalkStep>,
    pub survivors: Vec<Subspace>,
}

fn window_count(a: &Subspace, b: &Subspace, l: usize) -> Result<BigRational> {
    let n = (b.dim() - a.dim()) as u32;
    let k = (l - a.dim()) as u32;
    let count = gaussian_binomial(n, k, a.field().order())?;
    Ok(BigRational::from_integer(count.into()))
}

/// Restricts a set of `l`-dimensional subspaces to a window where no
/// single zoom step is dense. Starting from the window `[anchor, outer]`,
/// repeatedly scans every zoom-in one dimension above the current anchor
/// and every zoom-out one dimension below the current outer space; if the
/// set's fractional density inside some sub-window reaches `step_factor`
/// times the current density, the walk moves there (zoom-ins before
/// zoom-outs, canonical order within each, first hit wins). The density
/// grows by at least `step_factor` per step, so the walk stops after at
/// most `log(1/eta0) / log(step_factor)` steps.
pub fn restriction_walk(
    anchor: &Subspace,
    outer: &Subspace,
    l: usize,
    set: &[Subspace],
    step_factor: &BigRational,
    cap: u64,
) -> Result<WalkReport> {
    if !outer.contains(anchor) {
        return Err(Error::usage("outer space does not contain the anchor"));
    }
    if step_factor <= &BigRational::one() {
        return Err(Error::usage("step factor must exceed one"));
    }
    if set.is_empty() {
        return Err(Error::usage("an empty set has no density to amplify"));
    }
    let live: BTreeSet<Subspace> = set.iter().cloned().collect();
    for s in &live {
        if s.dim() != l || !s.contains(anchor) || !outer.contains(s) {
            return Err(Error::usage(
                "set members must sit between the anchor and the outer space at the stated dimension",
            ));
        }
    }
    let mut live: Vec<Subspace> = live.into_iter().collect();
    let mut a = anchor.clone();
    let mut b = outer.clone();
    let mut eta = BigRational::from_integer(BigInt::from(live.len() as u64))
        / window_count(&a, &b, l)?;
    let eta0 = eta.clone();
    let structural_budget = outer.dim() - anchor.dim();
    let mut steps: Vec<WalkStep> = Vec::new();

    'walk: loop {
        let bar = step_factor * &eta;
        if a.dim() + 1 <= l {
            for a_prime in ZoomPair::new(a.clone(), b.clone())?.enumerate(a.dim() + 1, cap)? {
                let kept: Vec<Subspace> = live
                    .iter()
                    .filter(|s| s.contains(&a_prime))
                    .cloned()
                    .collect();
                let mu = BigRational::from_integer(BigInt::from(kept.len() as u64))
                    / window_count(&a_prime, &b, l)?;
                if mu >= bar {
                    live = kept;
                    a = a_prime;
                    eta = mu;
                    steps.push(WalkStep {
                        a: a.clone(),
                        b: b.clone(),
                        eta: eta.clone(),
                        zoomed_in: true,
                    });
                    if steps.len() > structural_budget {
                        return Err(Error::logic("walk exceeded its structural step budget"));
                    }
                    continue 'walk;
                }
            }
        }
        if b.dim() >= l + 1 && b.dim() - 1 >= a.dim() {
            for b_prime in ZoomPair::new(a.clone(), b.clone())?.enumerate(b.dim() - 1, cap)? {
                let kept: Vec<Subspace> = live
                    .iter()
                    .filter(|s| b_prime.contains(s))
                    .cloned()
                    .collect();
                let mu = BigRational::from_integer(BigInt::from(kept.len() as u64))
                    / window_count(&a, &b_prime, l)?;
                if mu >= bar {
                    live = kept;
                    b = b_prime;
                    eta = mu;
                    steps.push(WalkStep {
                        a: a.clone(),
                        b: b.clone(),
                        eta: eta.clone(),
                        zoomed_in: false,
                    });
                    if steps.len() > structural_budget {
                        return Err(Error::logic("walk exceeded its structural step budget"));
                    }
                    continue 'walk;
                }
            }
        }
        return Ok(WalkReport {
            a,
            b,
            eta0,
            eta,
            steps,
            survivors: live,
        });
    }
}

/// Serializable audit trail of a restriction walk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkTraceReport {
    pub a: SubspaceData,
    pub b: SubspaceData,
    pub eta0: String,
    pub eta: String,
    pub survivors: usize,
    pub steps: Vec<WalkStepReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkStepReport {
    pub a_dim: usize,
    pub b_dim: usize,
    pub eta: String,
    pub zoomed_in: bool,
}

impl WalkReport {
    pub fn to_report(&self) -> WalkTraceReport {
        WalkTraceReport {
            a: self.a.to_data(),
            b: self.b.to_data(),
            eta0: self.eta0.to_string(),
            eta: self.eta.to_string(),
            survivors: self.survivors.len(),
            steps: self
                .steps
                .iter()
                .map(|s| WalkStepReport {
                    a_dim: s.a.dim(),
                    b_dim: s.b.dim(),
                    eta: s.eta.to_string(),
                    zoomed_in: s.zoomed_in,
                })
                .collect(),
        }
    }
}

/// Nodes with functions, plus the exact edge relation "the two functions
/// agree on the intersection" and the graph's worst common-neighbor
/// fraction over non-edges.
#[derive(Debug, Clone)]
pub struct AgreementGraph {
    nodes: FunctionFamily,
    adj: Vec<Vec<bool>>,
    beta: BigRational,
    four_generic: bool,
}

impl AgreementGraph {
    pub fn nodes(&self) -> &FunctionFamily {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adj[i][j]
    }

    /// Largest fraction of vertices adjacent to both ends of a non-edge;
    /// zero when the graph is complete.
    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    /// Whether the node family passed the four-way genericness check, which
    /// is what forces non-adjacent pairs to share at most one neighbor.
    pub fn is_four_generic(&self) -> bool {
        self.four_generic
    }

    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        (0..self.len())
            .filter(|&v| v != i && v != j && self.adj[v][i] && self.adj[v][j])
            .count()
    }

    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.adj[i][j] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() == self.len() * (self.len() - 1) / 2
    }
}

/// Builds the agreement graph of a function family: an edge joins two
/// nodes exactly when their functions agree on the nodes' intersection.
/// When the node family is four-generic, non-adjacent pairs provably share
/// at most one neighbor, and a violation is reported as a logic error.
pub fn build_agreement_graph(nodes: &FunctionFamily, cap: u64) -> Result<AgreementGraph> {
    if nodes.is_empty() {
        return Err(Error::usage("agreement graph needs at least one node"));
    }
    let n = nodes.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let meet = nodes.subspace(i).intersect(nodes.subspace(j))?;
            let agree = nodes
                .function(i)
                .restrict(&meet)?
                .agrees_with(&nodes.function(j).restrict(&meet)?);
            adj[i][j] = agree;
            adj[j][i] = agree;
        }
    }
    let four_generic = matches!(
        is_t_generic(&nodes.to_family()?, 4, cap)?,
        GenericCheck::Generic
    );
    let mut max_common = 0usize;
    let mut has_non_edge = false;
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] {
                continue;
            }
            has_non_edge = true;
            let common = (0..n)
                .filter(|&v| v != i && v != j && adj[v][i] && adj[v][j])
                .count();
            if four_generic && common > 1 {
                return Err(Error::logic(
                    "a four-generic family produced a non-edge with two common neighbors",
                ));
            }
            max_common = max_common.max(common);
        }
    }
    let beta = if has_non_edge {
        big_ratio(max_common as u64, n as u64)
    } else {
        BigRational::zero()
    };
    Ok(AgreementGraph {
        nodes: nodes.clone(),
        adj,
        beta,
        four_generic,
    })
}

/// Everything the clique-and-glue step produces: the clique, the glued
/// value table over the span of its nodes (zero off the covered part), the
/// self-corrected linear function read off that table, and the exact
/// statistics backing them.
#[derive(Debug, Clone)]
pub struct GlueOutcome {
    /// Node indices of the extracted clique, ascending.
    pub clique: Vec<usize>,
    /// Span of the clique's nodes; the glue and the decode live here.
    pub union: Subspace,
    /// Glued values in coordinate order on `union`.
    pub glued: Vec<Elem>,
    /// Which coordinates some clique node actually covers.
    pub covered: Vec<bool>,
    /// Plurality self-correction of the glued table, as a functional on
    /// `union`.
    pub h: LinearFunctional,
    /// Whether the full self-corrected table was already linear.
    pub decode_linear: bool,
    /// True when some plurality vote was settled by the tie rule.
    pub tie_broken: bool,
    /// How many clique nodes `h` reproduces exactly.
    pub agree_count: usize,
    /// Exact pass probability of the linearity test on the glued table.
    pub pass_rate: BigRational,
    /// Number of node triples carrying exactly two edges, a transitivity
    /// statistic for the whole graph.
    pub triple_violations: u64,
}

/// Extracts a clique greedily and glues its functions into one table.
/// Every node is tried as a seed and grown in index order; the largest
/// clique wins, ties to the earliest seed. The glue assigns each vector
/// the value of any covering clique node, reporting a logic error if two
/// nodes were to disagree, and is zero elsewhere. The table is then
/// self-corrected by plurality over all shifts (ties toward the smaller
/// field element) and read off as a linear function on the clique's span.
pub fn extract_clique_and_glue(graph: &AgreementGraph) -> Result<GlueOutcome> {
    let n = graph.len();
    if n > 512 {
        return Err(Error::resource("triple statistics need at most 512 nodes"));
    }
    let mut best: Vec<usize> = Vec::new();
    for seed in 0..n {
        let mut clique = vec![seed];
        for v in 0..n {
            if v != seed && clique.iter().all(|&u| graph.is_edge(u, v)) {
                clique.push(v);
            }
        }
        if clique.len() > best.len() {
            clique.sort_unstable();
            best = clique;
        }
    }
    let clique = best;
    debug_assert!(clique
        .iter()
        .enumerate()
        .all(|(k, &u)| clique[k + 1..].iter().all(|&v| graph.is_edge(u, v))));

    let mut triple_violations = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let edges = usize::from(graph.is_edge(i, j))
                    + usize::from(graph.is_edge(j, k))
                    + usize::from(graph.is_edge(i, k));
                if edges == 2 {
                    triple_violations += 1;
                }
            }
        }
    }

    let nodes = graph.nodes();
    let mut union = nodes.subspace(clique[0]).clone();
    for &i in &clique[1..] {
        union = union.sum(nodes.subspace(i))?;
    }
    if union.dim() == 0 {
        return Err(Error::usage("clique spans only the zero space"));
    }
    let field = union.field().clone();
    let q = u64::from(field.order());
    let size = q
        .checked_pow(union.dim() as u32)
        .ok_or_else(|| Error::resource("clique span too large to tabulate"))?;

    let mut glued = vec![0 as Elem; size as usize];
    let mut covered = vec![false; size as usize];
    for &i in &clique {
        let f = nodes.function(i);
        for v in nodes.subspace(i).members() {
            let coords = union
                .coords(&v)
                .ok_or_else(|| Error::logic("clique node escapes the clique span"))?;
            let idx = vector_index(&field, &coords) as usize;
            let value = f.eval(&v)?;
            if covered[idx] && glued[idx] != value {
                return Err(Error::logic("glued nodes disagree on a shared vector"));
            }
            glued[idx] = value;
            covered[idx] = true;
        }
    }

    let report = blr(&field, union.dim(), &glued)?;
    let mut h_values = Vec::with_capacity(union.dim());
    for k in 0..union.dim() {
        let mut unit = vec![0 as Elem; union.dim()];
        unit[k] = 1;
        h_values.push(report.decoded[vector_index(&field, &unit) as usize]);
    }
    let h = LinearFunctional::new(union.clone(), h_values)?;
    let mut agree_count = 0;
    for &i in &clique {
        if h.restrict(nodes.subspace(i))?.agrees_with(nodes.function(i)) {
            agree_count += 1;
        }
    }
    Ok(GlueOutcome {
        clique,
        union,
        glued,
        covered,
        h,
        decode_linear: report.decoded_functional.is_some(),
        tie_broken: report.tie_broken,
        agree_count,
        pass_rate: report.pass_rate,
        triple_violations,
    })
}
