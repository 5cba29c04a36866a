//! Agreement testing on subspace assignment tables.
//!
//! The central object is a pair of tables assigning linear functionals to the
//! `l1`- and `l2`-dimensional subspaces of an ambient space. The inclusion
//! test samples a nested pair and checks that the two entries agree on the
//! smaller subspace; the exact variant enumerates every nested pair. The rest
//! of the module supports structure recovery from tables that pass the test
//! with noticeable probability: zoom decoding, the iterated harvest that
//! strips one zoom-in per round, the Johnson-style list-size bound, and the
//! BLR linearity test used to certify glued functions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{BigInt, BigRational, FromPrimitive, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::rng::{key_rng, shard_rng};
use crate::stats::RateEstimate;
use crate::subspace::{gaussian_binomial, index_vector, vec_add, vector_index, Subspace, ZoomPair};
use crate::tables::{honest_table, AgreementTable, LinearFunctional};

/// Parameters shared by the agreement-test procedures.
///
/// `l2 < l1 < n` so that both table layers are proper and nested sampling has
/// room to move. All randomness in Monte Carlo procedures derives from `seed`
/// through per-trial stream splitting, so results are reproducible and
/// independent of worker count.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TestParams {
    pub q: u32,
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub trials: u64,
    pub seed: u64,
}

impl TestParams {
    pub fn validate(&self) -> Result<()> {
        if !(0 < self.l2 && self.l2 < self.l1 && self.l1 < self.n) {
            return Err(Error::usage(format!(
                "need 0 < l2 < l1 < n, got l1={} l2={} n={}",
                self.l1, self.l2, self.n
            )));
        }
        Ok(())
    }

    pub fn field(&self) -> Result<Arc<Field>> {
        Ok(Arc::new(Field::from_order(self.q)?))
    }
}

/// Outcome of the Monte Carlo inclusion test.
///
/// Missing table entries are rejections of their own kind and are tallied
/// separately from honest disagreements; the pass rate's denominator is the
/// full trial count either way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    pub estimate: RateEstimate,
    pub fails: u64,
    pub missing_outer: u64,
    pub missing_inner: u64,
}

/// Monte Carlo inclusion test: sample `L1` of dimension `l1` uniformly, then
/// `L2 <= L1` of dimension `l2` uniformly, and pass when the two table entries
/// agree on `L2`.
pub fn inclusion_test(
    t1: &AgreementTable,
    t2: &AgreementTable,
    params: &TestParams,
) -> Result<InclusionReport> {
    params.validate()?;
    if t1.dim() != params.l1 || t2.dim() != params.l2 {
        return Err(Error::usage(format!(
            "table dimensions ({}, {}) do not match params ({}, {})",
            t1.dim(),
            t2.dim(),
            params.l1,
            params.l2
        )));
    }
    if params.trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    let field = params.field()?;
    let outer = ZoomPair::trivial(&field, params.n)?;
    let zero = Subspace::zero(&field, params.n)?;

    // Tally order: pass, fail, missing outer, missing inner.
    let tally = (0..params.trials)
        .into_par_iter()
        .try_fold(
            || [0u64; 4],
            |mut acc, trial| -> Result<[u64; 4]> {
                let mut rng = shard_rng(params.seed, trial);
                let l1 = outer.sample(params.l1, &mut rng)?;
                let l2 = ZoomPair::new(zero.clone(), l1.clone())?.sample(params.l2, &mut rng)?;
                match t1.get(&l1) {
                    None => acc[2] += 1,
                    Some(f1) => match t2.get(&l2) {
                        None => acc[3] += 1,
                        Some(f2) => {
                            if f1.restrict(&l2)?.agrees_with(&f2) {
                                acc[0] += 1;
                            } else {
                                acc[1] += 1;
                            }
                        }
                    },
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || [0u64; 4],
            |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]),
        )?;

    Ok(InclusionReport {
        estimate: RateEstimate::new(tally[0], params.trials),
        fails: tally[1],
        missing_outer: tally[2],
        missing_inner: tally[3],
    })
}

/// Exact inclusion-test statistics over every nested pair `(L1, L2)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub passes: u64,
    pub fails: u64,
    pub missing: u64,
    pub pairs: u64,
    /// Set when no pair produced a definite comparison, in which case the
    /// probability is 0 by convention rather than by measurement.
    pub vacuous: bool,
}

impl ConsistencyReport {
    /// Exact pass probability as a rational number.
    pub fn probability(&self) -> BigRational {
        if self.pairs == 0 {
            return BigRational::zero();
        }
        BigRational::new(BigInt::from(self.passes), BigInt::from(self.pairs))
    }

    pub fn rate(&self) -> f64 {
        self.probability().to_f64().unwrap_or(0.0)
    }
}

/// Exact consistency: enumerate all `(L1, L2)` incidence pairs and count
/// agreements. Every `L1` contains the same number of `L2`, so the uniform
/// distribution over pairs matches the two-step sampler used by
/// `inclusion_test`.
pub fn exact_consistency(
    t1: &AgreementTable,
    t2: &AgreementTable,
    params: &TestParams,
    cap: u64,
) -> Result<ConsistencyReport> {
    params.validate()?;
    let field = params.field()?;
    let outer_count = gaussian_binomial(params.n as u32, params.l1 as u32, params.q)?;
    let inner_count = gaussian_binomial(params.l1 as u32, params.l2 as u32, params.q)?;
    let pair_count = outer_count * inner_count;
    if pair_count > num::BigUint::from(cap) {
        return Err(Error::resource(format!(
            "{pair_count} incidence pairs exceed the cap of {cap}"
        )));
    }

    let zero = Subspace::zero(&field, params.n)?;
    let outer = ZoomPair::trivial(&field, params.n)?.enumerate(params.l1, cap)?;
    let mut passes = 0u64;
    let mut fails = 0u64;
    let mut missing = 0u64;
    let mut pairs = 0u64;
    for l1 in &outer {
        let entry1 = t1.get(l1);
        for l2 in ZoomPair::new(zero.clone(), l1.clone())?.enumerate(params.l2, cap)? {
            pairs += 1;
            let Some(f1) = &entry1 else {
                missing += 1;
                continue;
            };
            let Some(f2) = t2.get(&l2) else {
                missing += 1;
                continue;
            };
            if f1.restrict(&l2)?.agrees_with(&f2) {
                passes += 1;
            } else {
                fails += 1;
            }
        }
    }
    Ok(ConsistencyReport {
        passes,
        fails,
        missing,
        pairs,
        vacuous: passes + fails == 0,
    })
}

/// Families of planted table pairs used as test fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    /// Both tables restrict one hidden global functional; passes always.
    Honest,
    /// Independent uniform entries; passes at the chance rate `q^{-l2}`.
    Random,
    /// Entries copied from a random codimension-1 cover, so nested pairs that
    /// land in a common hyperplane agree noticeably more often than chance.
    Codim1Cover,
}

fn subspace_key_bytes(tag: u64, s: &Subspace) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(16 + s.rows().len() * s.ambient() * 4);
    bytes.extend_from_slice(&tag.to_le_bytes());
    bytes.extend_from_slice(&(s.ambient() as u64).to_le_bytes());
    for row in s.rows() {
        for &x in row {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    bytes
}

fn random_entry_for_key(seed: u64, tag: u64, key: &Subspace) -> LinearFunctional {
    let mut rng = key_rng(seed, &subspace_key_bytes(tag, key));
    LinearFunctional::random(key.clone(), &mut rng)
}

/// Build a planted `(T1, T2)` pair. Entries of generator-backed tables are
/// derived purely from `(params.seed, kind, key)`, so lookups are reproducible
/// in any order. `count_w` sizes the hyperplane cover and is ignored by the
/// other kinds.
pub fn planted_tables(
    kind: PlantKind,
    params: &TestParams,
    count_w: usize,
) -> Result<(AgreementTable, AgreementTable)> {
    params.validate()?;
    let field = params.field()?;
    match kind {
        PlantKind::Honest => {
            let mut rng = shard_rng(params.seed, 0);
            let full = Subspace::full(&field, params.n)?;
            let global = LinearFunctional::random(full, &mut rng);
            Ok((
                honest_table(&global, params.l1),
                honest_table(&global, params.l2),
            ))
        }
        PlantKind::Random => {
            let seed = params.seed;
            let t1 = AgreementTable::generated(params.l1, move |key| {
                Some(random_entry_for_key(seed, 1, key))
            });
            let seed = params.seed;
            let t2 = AgreementTable::generated(params.l2, move |key| {
                Some(random_entry_for_key(seed, 2, key))
            });
            Ok((t1, t2))
        }
        PlantKind::Codim1Cover => {
            if count_w == 0 {
                return Err(Error::usage("codim1-cover needs at least one hyperplane"));
            }
            let outer = ZoomPair::trivial(&field, params.n)?;
            let mut rng = shard_rng(params.seed, u64::MAX);
            let mut cover = Vec::with_capacity(count_w);
            for _ in 0..count_w {
                let w = outer.sample(params.n - 1, &mut rng)?;
                let f = LinearFunctional::random(w, &mut rng);
                cover.push(f);
            }
            let cover = Arc::new(cover);
            let t1 = cover_table(params.seed, 3, params.l1, Arc::clone(&cover));
            let t2 = cover_table(params.seed, 4, params.l2, cover);
            Ok((t1, t2))
        }
    }
}

fn cover_table(
    seed: u64,
    tag: u64,
    dim: usize,
    cover: Arc<Vec<LinearFunctional>>,
) -> AgreementTable {
    AgreementTable::generated(dim, move |key| {
        let candidates: Vec<&LinearFunctional> = cover
            .iter()
            .filter(|f| f.domain().contains(key))
            .collect();
        let mut rng = key_rng(seed, &subspace_key_bytes(tag, key));
        if candidates.is_empty() {
            return Some(LinearFunctional::random(key.clone(), &mut rng));
        }
        let pick = rng.gen_range(0..candidates.len());
        candidates[pick].restrict(key).ok()
    })
}

/// One candidate recovered by zoom decoding: a zoom pair and a functional on
/// its outer space whose restrictions agree with the table on at least the
/// reported fraction of the zoom's keys.
#[derive(Debug, Clone)]
pub struct DecodeHit {
    pub zoom: ZoomPair,
    pub g: LinearFunctional,
    pub hits: u64,
    pub live: u64,
}

impl DecodeHit {
    pub fn agreement(&self) -> BigRational {
        BigRational::new(BigInt::from(self.hits), BigInt::from(self.live))
    }
}

/// Exhaustive zoom decoding: scan every zoom pair `(Q, W)` with
/// `dim Q + codim W <= r` and every functional `g` on `W`, and report those
/// whose agreement with the table on the zoom's keys reaches `threshold`.
/// Results come back sorted by agreement, best first, with ties broken by the
/// canonical order on `(Q, W, g)`.
///
/// Only proper zooms with `dim Q < l < dim W` are scanned. A zoom pinned at
/// either end has a single key, and the entry there certifies itself with
/// agreement 1 while carrying no signal about the rest of the table. At scale
/// the constraint `r < l < n - r` rules such pairs out on its own; small
/// ambient spaces need the properness requirement stated explicitly.
pub fn brute_force_zoom_decode(
    t: &AgreementTable,
    field: &Arc<Field>,
    n: usize,
    r: usize,
    threshold: &BigRational,
    cap: u64,
) -> Result<Vec<DecodeHit>> {
    let l = t.dim();
    if l == 0 || l > n {
        return Err(Error::usage("table dimension out of range"));
    }
    let q = field.order();
    // Generous overestimate of the functional evaluations ahead; enumeration
    // caps inside the loops do the precise policing.
    let mut budget: u64 = 0;
    let outer = ZoomPair::trivial(field, n)?;
    let mut hits = Vec::new();
    for codim in 0..=r.min(n) {
        let w_dim = n - codim;
        if w_dim <= l {
            continue;
        }
        for w in outer.enumerate(w_dim, cap)? {
            let zero = Subspace::zero(field, n)?;
            for q_dim in 0..=(r - codim).min(l - 1) {
                for q_sub in ZoomPair::new(zero.clone(), w.clone())?.enumerate(q_dim, cap)? {
                    let zoom = ZoomPair::new(q_sub, w.clone())?;
                    let keys = zoom.enumerate(l, cap)?;
                    if keys.is_empty() {
                        continue;
                    }
                    let entries: Vec<Option<LinearFunctional>> =
                        keys.iter().map(|k| t.get(k)).collect();
                    let g_count = (q as u64)
                        .checked_pow(w_dim as u32)
                        .ok_or_else(|| Error::resource("functional space too large"))?;
                    budget = budget
                        .saturating_add(g_count.saturating_mul(keys.len() as u64));
                    if budget > cap {
                        return Err(Error::resource(format!(
                            "zoom decode workload exceeds the cap of {cap}"
                        )));
                    }
                    for g_idx in 0..g_count {
                        let values: Vec<Elem> = index_vector(field, w_dim, g_idx);
                        let g = LinearFunctional::new(zoom.w_out().clone(), values)?;
                        let mut agree = 0u64;
                        for (key, entry) in keys.iter().zip(&entries) {
                            if let Some(f) = entry {
                                if g.restrict(key)?.agrees_with(f) {
                                    agree += 1;
                                }
                            }
                        }
                        let hit = DecodeHit {
                            zoom: zoom.clone(),
                            g,
                            hits: agree,
                            live: keys.len() as u64,
                        };
                        if &hit.agreement() >= threshold {
                            hits.push(hit);
                        }
                    }
                }
            }
        }
    }
    hits.sort_by(|a, b| {
        b.agreement()
            .cmp(&a.agreement())
            .then_with(|| a.zoom.q_in().cmp(b.zoom.q_in()))
            .then_with(|| a.zoom.w_out().cmp(b.zoom.w_out()))
            .then_with(|| a.g.values().cmp(b.g.values()))
    });
    Ok(hits)
}

/// Trace entry for one harvest round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarvestRound {
    pub round: usize,
    pub consistency_before: f64,
    pub q_dim: usize,
    pub w_codim: usize,
    pub agreement: f64,
    pub new_zoomin: bool,
    pub rerandomized_keys: u64,
}

/// Result of the iterated zoom harvest.
#[derive(Debug, Clone)]
pub struct HarvestReport {
    pub zoomins: Vec<Subspace>,
    pub rounds: Vec<HarvestRound>,
    pub final_consistency: ConsistencyReport,
    /// For each zoom-in dimension present, the fraction of all subspaces of
    /// that dimension that were harvested.
    pub pigeonhole: Vec<(usize, f64)>,
}

/// Iterated decoding loop: while the working copy of `T1` stays at least
/// `eps/2`-consistent with `T2`, decode the best zoom candidate, record its
/// zoom-in, and re-randomize every table entry inside any harvested zoom so
/// the same structure is not found twice. The working copy starts as a dense
/// materialization of `t1`; `t2` is left untouched.
pub fn zoom_harvest(
    t1: &AgreementTable,
    t2: &AgreementTable,
    params: &TestParams,
    r: usize,
    eps: &BigRational,
    max_rounds: usize,
    cap: u64,
) -> Result<HarvestReport> {
    params.validate()?;
    let field = params.field()?;
    let outer = ZoomPair::trivial(&field, params.n)?;
    let keys = outer.enumerate(params.l1, cap)?;
    let mut working: BTreeMap<Subspace, LinearFunctional> = keys
        .iter()
        .filter_map(|k| t1.get(k).map(|f| (k.clone(), f)))
        .collect();

    let mut zoomins: Vec<Subspace> = Vec::new();
    let mut seen: BTreeSet<Subspace> = BTreeSet::new();
    let mut tainted: BTreeSet<Subspace> = BTreeSet::new();
    let mut rounds = Vec::new();
    let half_eps = eps / BigRational::from_integer(BigInt::from(2));
    let zero_threshold = BigRational::zero();

    let mut round = 0usize;
    let final_consistency = loop {
        let table = AgreementTable::dense(params.l1, working.clone())?;
        let consistency = exact_consistency(&table, t2, params, cap)?;
        if consistency.probability() < half_eps {
            break consistency;
        }
        if round >= max_rounds {
            return Err(Error::resource(format!(
                "harvest still {:.4}-consistent after {round} rounds ({} zoom-ins found)",
                consistency.rate(),
                zoomins.len()
            )));
        }
        let hits = brute_force_zoom_decode(&table, &field, params.n, r, &zero_threshold, cap)?;
        let best = hits
            .into_iter()
            .next()
            .ok_or_else(|| Error::logic("consistent table produced no decode candidates"))?;
        let new_zoomin = seen.insert(best.zoom.q_in().clone());
        if new_zoomin {
            zoomins.push(best.zoom.q_in().clone());
        }
        for key in best.zoom.enumerate(params.l1, cap)? {
            tainted.insert(key);
        }
        let mut rng = shard_rng(params.seed, 0x4861_7276_0000_0000 ^ round as u64);
        for key in &tainted {
            working.insert(key.clone(), LinearFunctional::random(key.clone(), &mut rng));
        }
        rounds.push(HarvestRound {
            round,
            consistency_before: consistency.rate(),
            q_dim: best.zoom.q_in().dim(),
            w_codim: best.zoom.w_out().codim(),
            agreement: best.agreement().to_f64().unwrap_or(0.0),
            new_zoomin,
            rerandomized_keys: tainted.len() as u64,
        });
        round += 1;
    };

    let mut by_dim: BTreeMap<usize, u64> = BTreeMap::new();
    for q_sub in &zoomins {
        *by_dim.entry(q_sub.dim()).or_default() += 1;
    }
    let mut pigeonhole = Vec::new();
    for (dim, count) in by_dim {
        let total = gaussian_binomial(params.n as u32, dim as u32, params.q)?
            .to_f64()
            .unwrap_or(f64::INFINITY);
        pigeonhole.push((dim, count as f64 / total));
    }

    Ok(HarvestReport {
        zoomins,
        rounds,
        final_consistency,
        pigeonhole,
    })
}

/// Johnson-style list-size bound for codes over an alphabet of size
/// `alphabet` with relative distance `1 - gamma`, at agreement radius
/// `delta`. The bound only applies above the critical radius; below it the
/// report carries the threshold instead of a number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrsBound {
    pub alphabet: u64,
    pub gamma: f64,
    pub delta: f64,
    pub threshold: f64,
    pub applies: bool,
    pub raw: Option<f64>,
    pub bound: Option<u64>,
}

pub fn grs_list_bound(alphabet: u64, gamma: f64, delta: f64) -> Result<GrsBound> {
    if alphabet < 2 {
        return Err(Error::usage("alphabet size must be at least 2"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::usage("gamma must lie in (0, 1)"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::usage("delta must lie in (0, 1]"));
    }
    let inv_m = 1.0 / alphabet as f64;
    // A distance better than the alphabet bound only helps, so the excess
    // gamma - 1/M is clamped at zero inside the square root.
    let excess = (gamma - inv_m).max(0.0);
    let threshold = inv_m + (excess * (1.0 - inv_m)).sqrt();
    let applies = delta > threshold;
    let (raw, bound) = if applies {
        let denom = (delta - inv_m).powi(2) - (1.0 - inv_m) * (gamma - inv_m);
        let raw = 1.0 / denom;
        (Some(raw), Some(raw.floor() as u64))
    } else {
        (None, None)
    };
    Ok(GrsBound {
        alphabet,
        gamma,
        delta,
        threshold,
        applies,
        raw,
        bound,
    })
}

/// BLR linearity report for a total function on `F_q^n`, stored as a value
/// table in `all_vectors` order.
#[derive(Debug, Clone)]
pub struct BlrReport {
    /// Exact pass probability of the test `g(x + y) = g(x) + g(y)` over all
    /// ordered pairs.
    pub pass_rate: BigRational,
    /// Pointwise self-correction: at each `x` the plurality of
    /// `g(x + y) - g(y)` over all `y`, ties resolved toward the smaller
    /// field element.
    pub decoded: Vec<Elem>,
    /// The decoded table as a functional when it is linear.
    pub decoded_functional: Option<LinearFunctional>,
    /// Exact agreement between the decoded table and the input.
    pub agreement: BigRational,
    /// True when the decoded table agrees with the input on more than half
    /// the points; when false the decode is returned but unwitnessed.
    pub majority: bool,
    /// True when some point's plurality needed the tie rule.
    pub tie_broken: bool,
}

pub fn blr(field: &Arc<Field>, n: usize, g: &[Elem]) -> Result<BlrReport> {
    if n == 0 {
        return Err(Error::usage("ambient dimension must be positive"));
    }
    let q = u64::from(field.order());
    let size = q
        .checked_pow(n as u32)
        .ok_or_else(|| Error::resource("domain too large"))?;
    if g.len() as u64 != size {
        return Err(Error::usage(format!(
            "value table has {} entries, domain has {size}",
            g.len()
        )));
    }
    if size.saturating_mul(size) > 1 << 26 {
        return Err(Error::resource(
            "pair enumeration too large for the exact BLR test",
        ));
    }
    for &v in g {
        if u64::from(v) >= q {
            return Err(Error::usage("value table entry outside the field"));
        }
    }
    let vectors: Vec<Vec<Elem>> = (0..size).map(|i| index_vector(field, n, i)).collect();
    let index_of = |v: &[Elem]| vector_index(field, v) as usize;

    let mut pass = 0u64;
    for (i, x) in vectors.iter().enumerate() {
        for (j, y) in vectors.iter().enumerate() {
            let sum = index_of(&vec_add(field, x, y));
            if g[sum] == field.add(g[i], g[j]) {
                pass += 1;
            }
        }
    }
    let pass_rate = BigRational::new(BigInt::from(pass), BigInt::from(size * size));

    let mut decoded = Vec::with_capacity(size as usize);
    let mut tie_broken = false;
    for x in &vectors {
        let mut votes = vec![0u64; q as usize];
        for (j, y) in vectors.iter().enumerate() {
            let shifted = index_of(&vec_add(field, x, y));
            let vote = field.sub(g[shifted], g[j]);
            votes[vote as usize] += 1;
        }
        let best = *votes.iter().max().expect("q >= 2");
        let winners = votes.iter().filter(|&&c| c == best).count();
        if winners > 1 {
            tie_broken = true;
        }
        let winner = votes
            .iter()
            .position(|&c| c == best)
            .expect("some vote exists") as Elem;
        decoded.push(winner);
    }

    let full = Subspace::full(field, n)?;
    let covector: Vec<Elem> = (0..n)
        .map(|i| {
            let mut unit = vec![0 as Elem; n];
            unit[i] = 1;
            decoded[index_of(&unit)]
        })
        .collect();
    let candidate = LinearFunctional::from_inner_product(full, &covector);
    let linear = vectors
        .iter()
        .enumerate()
        .all(|(i, v)| candidate.eval(v).map(|e| e == decoded[i]).unwrap_or(false));

    let matches = vectors
        .iter()
        .enumerate()
        .filter(|(i, _)| decoded[*i] == g[*i])
        .count() as u64;
    let agreement = BigRational::new(BigInt::from(matches), BigInt::from(size));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));

    Ok(BlrReport {
        pass_rate,
        decoded,
        decoded_functional: linear.then_some(candidate),
        agreement: agreement.clone(),
        majority: agreement > half,
        tie_broken,
    })
}

/// Convenience conversion for thresholds supplied as floating point.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_f64(x).ok_or_else(|| Error::usage(format!("{x} is not a finite number")))
}
