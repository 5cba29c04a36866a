//! Covering statistics for tuple distributions over an equation gadget.
//!
//! The ambient space is `F_q^{3k}`: three coordinates per equation block. Two
//! distributions on `2l`-row tuples are compared: the uniform one, and a
//! structured one that first restricts each block to a surviving variable set
//! (all three with probability `1 - beta`, one uniformly chosen variable
//! otherwise), draws rows supported there, and then shifts every row by a
//! random member of the cover subspace spanned by the per-block all-ones
//! vectors. Because such shifts are constant within a block, the structured
//! density at a tuple depends only on how many blocks show repeated columns,
//! which gives a closed form evaluated here in exact rationals.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::subspace::{index_vector, vec_add, Subspace, Vector};

/// The cover subspace for `k` blocks: one generator per block, equal to one
/// on that block's three coordinates and zero elsewhere.
pub fn canonical_block_cover(field: &Arc<Field>, k: usize) -> Result<Subspace> {
    let mut rows = Vec::with_capacity(k);
    for j in 0..k {
        let mut row = vec![0 as Elem; 3 * k];
        row[3 * j] = 1;
        row[3 * j + 1] = 1;
        row[3 * j + 2] = 1;
        rows.push(row);
    }
    Subspace::canonicalize(field, 3 * k, rows)
}

/// Parameters for the covering distributions.
///
/// `beta` is the per-block drop probability; `beta = 0` is the degenerate
/// no-drop case in which both distributions coincide, and is accepted here
/// for calibration even though live parameter settings keep it positive.
/// `eta` scales the bad-event radius and has no principled value at this
/// scale, so it stays a knob that reports mention and no test asserts.
#[derive(Debug, Clone)]
pub struct CoveringParams {
    pub q: u32,
    pub l: usize,
    pub k: usize,
    pub beta: BigRational,
    pub eta: f64,
    /// Multiplier on the deviation radius sqrt(p k log(1/eta)) for the
    /// block-count event.
    pub e1_multiplier: f64,
    /// Cutoff for the all-columns-equal count event.
    pub s_prime_threshold: usize,
    pub h_u: Subspace,
}

impl CoveringParams {
    /// Standard setup: the block cover, radius multiplier 50, and the
    /// all-equal cutoff max(1, l^2).
    pub fn canonical(q: u32, l: usize, k: usize, beta: BigRational) -> Result<CoveringParams> {
        let field = Arc::new(Field::from_order(q)?);
        let h_u = canonical_block_cover(&field, k)?;
        let params = CoveringParams {
            q,
            l,
            k,
            beta,
            eta: 1e-3,
            e1_multiplier: 50.0,
            s_prime_threshold: (l * l).max(1),
            h_u,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.k == 0 {
            return Err(Error::usage("need l >= 1 and k >= 1"));
        }
        if self.beta < BigRational::zero() || self.beta > BigRational::one() {
            return Err(Error::usage("beta must lie in [0, 1]"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::usage("eta must lie in (0, 1)"));
        }
        if self.h_u.ambient() != 3 * self.k || self.h_u.dim() != self.k {
            return Err(Error::usage(format!(
                "cover subspace must have dimension {} in F_q^{}",
                self.k,
                3 * self.k
            )));
        }
        Ok(())
    }

    pub fn field(&self) -> &Arc<Field> {
        self.h_u.field()
    }

    pub fn ambient(&self) -> usize {
        3 * self.k
    }

    pub fn rows(&self) -> usize {
        2 * self.l
    }

    /// Probability that a uniform block shows exactly two equal columns.
    pub fn p_two_equal(&self) -> f64 {
        let ql = f64::from(self.q).powi(-2 * self.l as i32);
        3.0 * ql - 3.0 * ql * ql
    }

    fn beta_ratio(&self) -> Result<(u32, u32)> {
        let numer = self.beta.numer().to_u32();
        let denom = self.beta.denom().to_u32();
        match (numer, denom) {
            (Some(n), Some(d)) if d > 0 => Ok((n, d)),
            _ => Err(Error::usage("beta too finely grained for the sampler")),
        }
    }

    fn is_canonical_cover(&self) -> Result<bool> {
        Ok(self.h_u == canonical_block_cover(self.field(), self.k)?)
    }
}

/// Which distribution a tuple is drawn from or measured under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Uniform,
    Structured,
}

/// Surviving variables of one block: all three, or a single one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarChoice {
    Full,
    Single(usize),
}

impl VarChoice {
    pub fn keeps(&self, var: usize) -> bool {
        match self {
            VarChoice::Full => true,
            VarChoice::Single(t) => *t == var,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            VarChoice::Full => 3,
            VarChoice::Single(_) => 1,
        }
    }
}

/// How a tuple came to be: uniform draws carry nothing, structured draws
/// remember the per-block variable choice and the cover shifts.
#[derive(Debug, Clone)]
pub enum Provenance {
    Uniform,
    Structured {
        v_choice: Vec<VarChoice>,
        shifts: Vec<Vector>,
    },
}

#[derive(Debug, Clone)]
pub struct TupleSample {
    pub x: Vec<Vector>,
    pub provenance: Provenance,
}

fn sample_v_choice<R: Rng + ?Sized>(
    params: &CoveringParams,
    rng: &mut R,
) -> Result<Vec<VarChoice>> {
    let (num, den) = params.beta_ratio()?;
    let mut out = Vec::with_capacity(params.k);
    for _ in 0..params.k {
        if num > 0 && rng.gen_ratio(num, den) {
            out.push(VarChoice::Single(rng.gen_range(0..3)));
        } else {
            out.push(VarChoice::Full);
        }
    }
    Ok(out)
}

fn sample_supported_row<R: Rng + ?Sized>(
    params: &CoveringParams,
    v_choice: &[VarChoice],
    rng: &mut R,
) -> Vector {
    let f = params.field();
    let mut row = vec![0 as Elem; params.ambient()];
    for (j, choice) in v_choice.iter().enumerate() {
        for t in 0..3 {
            if choice.keeps(t) {
                row[3 * j + t] = f.rand_elem(rng);
            }
        }
    }
    row
}

/// Draw one tuple from the requested distribution.
pub fn sample<R: Rng + ?Sized>(
    dist: Dist,
    params: &CoveringParams,
    rng: &mut R,
) -> Result<TupleSample> {
    params.validate()?;
    let f = params.field().clone();
    match dist {
        Dist::Uniform => {
            let x = (0..params.rows())
                .map(|_| (0..params.ambient()).map(|_| f.rand_elem(rng)).collect())
                .collect();
            Ok(TupleSample {
                x,
                provenance: Provenance::Uniform,
            })
        }
        Dist::Structured => {
            let v_choice = sample_v_choice(params, rng)?;
            let mut x = Vec::with_capacity(params.rows());
            let mut shifts = Vec::with_capacity(params.rows());
            for _ in 0..params.rows() {
                let base = sample_supported_row(params, &v_choice, rng);
                let w = params.h_u.rand_member(rng);
                x.push(vec_add(&f, &base, &w));
                shifts.push(w);
            }
            Ok(TupleSample {
                x,
                provenance: Provenance::Structured { v_choice, shifts },
            })
        }
    }
}

/// Count the blocks of a tuple with exactly two equal columns (`s`) and with
/// all three columns equal (`s_prime`).
pub fn block_stats(x: &[Vector], k: usize) -> Result<(usize, usize)> {
    if x.is_empty() {
        return Err(Error::usage("tuple must have at least one row"));
    }
    for row in x {
        if row.len() != 3 * k {
            return Err(Error::usage("row length does not match 3k"));
        }
    }
    let column = |j: usize, t: usize| -> Vec<Elem> { x.iter().map(|row| row[3 * j + t]).collect() };
    let mut s = 0usize;
    let mut s_prime = 0usize;
    for j in 0..k {
        let c0 = column(j, 0);
        let c1 = column(j, 1);
        let c2 = column(j, 2);
        let e01 = c0 == c1;
        let e02 = c0 == c2;
        let e12 = c1 == c2;
        if e01 && e02 {
            s_prime += 1;
        } else if e01 || e02 || e12 {
            s += 1;
        }
    }
    Ok((s, s_prime))
}

fn rational_int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn q_power(q: u32, e: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(q).pow(e as u32))
}

/// Exact density of a tuple under either distribution.
///
/// The uniform branch is the constant `q^(-6lk)`. The structured branch is
/// the per-block product
/// `q^(-6lk) (1-b)^(k-s-s') (1-b + (b/3) q^(2l))^s (1-b + b q^(2l))^(s')`,
/// valid for the canonical block cover, whose shifts are constant within
/// each block.
pub fn pmf(dist: Dist, x: &[Vector], params: &CoveringParams) -> Result<BigRational> {
    params.validate()?;
    if x.len() != params.rows() {
        return Err(Error::usage(format!(
            "tuple has {} rows, expected {}",
            x.len(),
            params.rows()
        )));
    }
    let base = q_power(params.q, 6 * params.l * params.k).recip();
    match dist {
        Dist::Uniform => Ok(base),
        Dist::Structured => {
            if !params.is_canonical_cover()? {
                return Err(Error::domain(
                    "closed-form density needs the canonical block cover",
                ));
            }
            let (s, s_prime) = block_stats(x, params.k)?;
            let beta = &params.beta;
            let keep = BigRational::one() - beta;
            let q2l = q_power(params.q, 2 * params.l);
            let two_equal = keep.clone() + beta / rational_int(3) * q2l.clone();
            let all_equal = keep.clone() + beta * q2l;
            let plain = params.k - s - s_prime;
            Ok(base
                * pow_rational(&keep, plain)
                * pow_rational(&two_equal, s)
                * pow_rational(&all_equal, s_prime))
        }
    }
}

fn pow_rational(r: &BigRational, e: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= r;
    }
    out
}

/// Threshold flags for the bad event: a block count far from its mean, or
/// too many all-equal blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventFlags {
    pub s: usize,
    pub s_prime: usize,
    pub expected_s: f64,
    pub e1_radius: f64,
    pub in_e1: bool,
    pub in_e2: bool,
}

impl EventFlags {
    pub fn in_event(&self) -> bool {
        self.in_e1 || self.in_e2
    }
}

pub fn event_e(x: &[Vector], params: &CoveringParams) -> Result<EventFlags> {
    params.validate()?;
    let (s, s_prime) = block_stats(x, params.k)?;
    let expected_s = params.p_two_equal() * params.k as f64;
    let e1_radius =
        params.e1_multiplier * (expected_s * (1.0 / params.eta).ln()).sqrt();
    Ok(EventFlags {
        s,
        s_prime,
        expected_s,
        e1_radius,
        in_e1: (s as f64 - expected_s).abs() > e1_radius,
        in_e2: s_prime > params.s_prime_threshold,
    })
}

/// A draw from the advice-conditioned question distribution: the surviving
/// variables per block and the advice vectors whose span is the requested
/// zoom-in.
#[derive(Debug, Clone)]
pub struct AdviceSample {
    pub v_choice: Vec<VarChoice>,
    pub advice: Vec<Vector>,
    pub rejections: u64,
}

const REJECTION_CAP: u64 = 10_000_000;

/// Block-wise feasibility of a zoom-in: which variable survivals can still
/// support it.
fn block_support_options(params: &CoveringParams, q_sub: &Subspace) -> Vec<Vec<VarChoice>> {
    let mut out = Vec::with_capacity(params.k);
    let beta = &params.beta;
    let full_allowed = beta < &BigRational::one();
    let drop_allowed = beta > &BigRational::zero();
    for j in 0..params.k {
        let mut options = Vec::new();
        if full_allowed {
            options.push(VarChoice::Full);
        }
        if drop_allowed {
            for t in 0..3 {
                let ok = q_sub.rows().iter().all(|row| {
                    (0..3).all(|u| u == t || row[3 * j + u] == 0)
                });
                if ok {
                    options.push(VarChoice::Single(t));
                }
            }
        }
        out.push(options);
    }
    out
}

/// Sample the question distribution conditioned on the span of the advice
/// equaling `q_sub`, by rejection. The zoom-in must be reachable: each block
/// needs an admissible survival choice, and the advice count must cover its
/// dimension.
pub fn sample_v_given_q<R: Rng + ?Sized>(
    params: &CoveringParams,
    q_sub: &Subspace,
    r: usize,
    rng: &mut R,
) -> Result<AdviceSample> {
    params.validate()?;
    if q_sub.ambient() != params.ambient() {
        return Err(Error::usage("zoom-in lives in the wrong ambient space"));
    }
    if q_sub.dim() > r {
        return Err(Error::domain(format!(
            "a span of {} advice vectors cannot have dimension {}",
            r,
            q_sub.dim()
        )));
    }
    let options = block_support_options(params, q_sub);
    if options.iter().any(|opts| opts.is_empty()) {
        return Err(Error::domain(
            "no admissible variable survival supports this zoom-in",
        ));
    }

    let f = params.field().clone();
    let mut rejections = 0u64;
    loop {
        let v_choice = sample_v_choice(params, rng)?;
        let compatible = v_choice.iter().enumerate().all(|(j, choice)| {
            q_sub.rows().iter().all(|row| {
                (0..3).all(|t| choice.keeps(t) || row[3 * j + t] == 0)
            })
        });
        if compatible {
            let advice: Vec<Vector> = (0..r)
                .map(|_| sample_supported_row(params, &v_choice, rng))
                .collect();
            let span = Subspace::canonicalize(&f, params.ambient(), advice.clone())?;
            if &span == q_sub {
                return Ok(AdviceSample {
                    v_choice,
                    advice,
                    rejections,
                });
            }
        }
        rejections += 1;
        if rejections >= REJECTION_CAP {
            return Err(Error::resource(format!(
                "conditional sampler rejected {REJECTION_CAP} draws"
            )));
        }
    }
}

/// Exhaustive scan of the whole tuple space: exact totals, extreme density
/// ratios away from the bad event, and the event's exact mass under both
/// distributions.
#[derive(Debug, Clone)]
pub struct ExhaustiveScan {
    pub tuples: u64,
    pub uniform_total: BigRational,
    pub structured_total: BigRational,
    /// Extremes of uniform/structured over tuples outside the bad event.
    pub min_ratio: Option<BigRational>,
    pub max_ratio: Option<BigRational>,
    pub event_mass_uniform: BigRational,
    pub event_mass_structured: BigRational,
}

pub fn exhaustive_scan(params: &CoveringParams, cap: u64) -> Result<ExhaustiveScan> {
    params.validate()?;
    let per_row = (params.q as u64)
        .checked_pow(params.ambient() as u32)
        .ok_or_else(|| Error::resource("row space too large"))?;
    let total = per_row
        .checked_pow(params.rows() as u32)
        .filter(|&t| t <= cap)
        .ok_or_else(|| {
            Error::resource(format!(
                "tuple space exceeds the cap of {cap}; use sampling instead"
            ))
        })?;

    let f = params.field();
    let mut scan = ExhaustiveScan {
        tuples: total,
        uniform_total: BigRational::zero(),
        structured_total: BigRational::zero(),
        min_ratio: None,
        max_ratio: None,
        event_mass_uniform: BigRational::zero(),
        event_mass_structured: BigRational::zero(),
    };
    for idx in 0..total {
        let mut rest = idx;
        let mut x = Vec::with_capacity(params.rows());
        for _ in 0..params.rows() {
            x.push(index_vector(f, params.ambient(), rest % per_row));
            rest /= per_row;
        }
        let d = pmf(Dist::Uniform, &x, params)?;
        let dp = pmf(Dist::Structured, &x, params)?;
        let flags = event_e(&x, params)?;
        scan.uniform_total += &d;
        scan.structured_total += &dp;
        if flags.in_event() {
            scan.event_mass_uniform += &d;
            scan.event_mass_structured += &dp;
        } else if !dp.is_zero() {
            let ratio = d / dp;
            if scan
                .min_ratio
                .as_ref()
                .map(|m| &ratio < m)
                .unwrap_or(true)
            {
                scan.min_ratio = Some(ratio.clone());
            }
            if scan
                .max_ratio
                .as_ref()
                .map(|m| &ratio > m)
                .unwrap_or(true)
            {
                scan.max_ratio = Some(ratio);
            }
        }
    }
    Ok(scan)
}

/// Serializable face of a covering scan, for reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringRatioReport {
    pub tuples: u64,
    pub mode: String,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub event_mass_uniform: f64,
    pub event_mass_structured: f64,
    pub uniform_total: Option<String>,
    pub structured_total: Option<String>,
}

pub enum RatioMode {
    Exhaustive { cap: u64 },
    Sampled { trials: u64, seed: u64 },
}

pub fn covering_ratio_report(
    params: &CoveringParams,
    mode: RatioMode,
) -> Result<CoveringRatioReport> {
    match mode {
        RatioMode::Exhaustive { cap } => {
            let scan = exhaustive_scan(params, cap)?;
            Ok(CoveringRatioReport {
                tuples: scan.tuples,
                mode: "exhaustive".into(),
                min_ratio: scan.min_ratio.as_ref().and_then(|r| r.to_f64()),
                max_ratio: scan.max_ratio.as_ref().and_then(|r| r.to_f64()),
                event_mass_uniform: scan.event_mass_uniform.to_f64().unwrap_or(0.0),
                event_mass_structured: scan.event_mass_structured.to_f64().unwrap_or(0.0),
                uniform_total: Some(scan.uniform_total.to_string()),
                structured_total: Some(scan.structured_total.to_string()),
            })
        }
        RatioMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(Error::usage("sampled mode needs at least one trial"));
            }
            let mut rng = crate::rng::shard_rng(seed, 0);
            let mut min_ratio: Option<BigRational> = None;
            let mut max_ratio: Option<BigRational> = None;
            let mut in_event_uniform = 0u64;
            let mut in_event_structured = 0u64;
            for _ in 0..trials {
                let xu = sample(Dist::Uniform, params, &mut rng)?;
                if event_e(&xu.x, params)?.in_event() {
                    in_event_uniform += 1;
                } else {
                    let ratio = pmf(Dist::Uniform, &xu.x, params)?
                        / pmf(Dist::Structured, &xu.x, params)?;
                    if min_ratio.as_ref().map(|m| &ratio < m).unwrap_or(true) {
                        min_ratio = Some(ratio.clone());
                    }
                    if max_ratio.as_ref().map(|m| &ratio > m).unwrap_or(true) {
                        max_ratio = Some(ratio);
                    }
                }
                let xs = sample(Dist::Structured, params, &mut rng)?;
                if event_e(&xs.x, params)?.in_event() {
                    in_event_structured += 1;
                }
            }
            Ok(CoveringRatioReport {
                tuples: trials,
                mode: "sampled".into(),
                min_ratio: min_ratio.as_ref().and_then(|r| r.to_f64()),
                max_ratio: max_ratio.as_ref().and_then(|r| r.to_f64()),
                event_mass_uniform: in_event_uniform as f64 / trials as f64,
                event_mass_structured: in_event_structured as f64 / trials as f64,
                uniform_total: None,
                structured_total: None,
            })
        }
    }
}

/// Conditional measures of an event given the span of the first `r1` rows.
#[derive(Debug, Clone)]
pub struct QZoomStat {
    pub q_sub: Subspace,
    pub uniform_conditional: BigRational,
    pub structured_conditional: BigRational,
    pub uniform_mass: BigRational,
    pub structured_mass: BigRational,
}

/// Exhaustively group tuples by the span of their first `r1` rows and report
/// each span's conditional event measure under both distributions.
pub fn smooth_zoomin_stats(
    event: &dyn Fn(&[Vector]) -> bool,
    params: &CoveringParams,
    r1: usize,
    cap: u64,
) -> Result<Vec<QZoomStat>> {
    params.validate()?;
    if r1 == 0 || r1 > params.rows() {
        return Err(Error::usage("span prefix length out of range"));
    }
    let per_row = (params.q as u64)
        .checked_pow(params.ambient() as u32)
        .ok_or_else(|| Error::resource("row space too large"))?;
    let total = per_row
        .checked_pow(params.rows() as u32)
        .filter(|&t| t <= cap)
        .ok_or_else(|| Error::resource(format!("tuple space exceeds the cap of {cap}")))?;

    let f = params.field().clone();
    struct Acc {
        u_total: BigRational,
        s_total: BigRational,
        u_event: BigRational,
        s_event: BigRational,
    }
    let mut groups: BTreeMap<Subspace, Acc> = BTreeMap::new();
    for idx in 0..total {
        let mut rest = idx;
        let mut x = Vec::with_capacity(params.rows());
        for _ in 0..params.rows() {
            x.push(index_vector(&f, params.ambient(), rest % per_row));
            rest /= per_row;
        }
        let span = Subspace::canonicalize(&f, params.ambient(), x[..r1].to_vec())?;
        let d = pmf(Dist::Uniform, &x, params)?;
        let dp = pmf(Dist::Structured, &x, params)?;
        let hit = event(&x);
        let acc = groups.entry(span).or_insert_with(|| Acc {
            u_total: BigRational::zero(),
            s_total: BigRational::zero(),
            u_event: BigRational::zero(),
            s_event: BigRational::zero(),
        });
        acc.u_total += &d;
        acc.s_total += &dp;
        if hit {
            acc.u_event += d;
            acc.s_event += dp;
        }
    }

    let zero = BigRational::zero();
    Ok(groups
        .into_iter()
        .map(|(q_sub, acc)| QZoomStat {
            q_sub,
            uniform_conditional: if acc.u_total.is_zero() {
                zero.clone()
            } else {
                &acc.u_event / &acc.u_total
            },
            structured_conditional: if acc.s_total.is_zero() {
                zero.clone()
            } else {
                &acc.s_event / &acc.s_total
            },
            uniform_mass: acc.u_total,
            structured_mass: acc.s_total,
        })
        .collect())
}

/// Outcome of the projection-preservation check: how often the structured
/// conditional measure of an event survives restriction to the surviving
/// variables at half strength.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VPreserveStat {
    /// The event's conditional measure times q^(s(2l - r)).
    pub c_value: f64,
    /// Target fraction beta^(s+2).
    pub threshold_fraction: f64,
    pub fraction_good: f64,
    pub v_samples: u64,
    /// Draws whose restricted tuple space misses the zoom-in entirely.
    pub infeasible_v: u64,
    pub pass: bool,
}

/// For an event inside the zoom to `w_out`, sample survival patterns
/// conditioned on the zoom-in `q_sub` and measure, exactly, how often the
/// event keeps at least half its conditional mass when rows are confined to
/// `w_out` restricted to the surviving variables (then shifted by the cover).
pub fn v_preserve_stat<R: Rng + ?Sized>(
    params: &CoveringParams,
    q_sub: &Subspace,
    w_out: &Subspace,
    event: &dyn Fn(&[Vector]) -> bool,
    r: usize,
    v_samples: u64,
    cap: u64,
    rng: &mut R,
) -> Result<VPreserveStat> {
    params.validate()?;
    if !w_out.contains(q_sub) || !w_out.contains(&params.h_u) {
        return Err(Error::usage(
            "zoom-out must contain both the zoom-in and the cover",
        ));
    }
    if r == 0 || r > params.rows() {
        return Err(Error::usage("advice count must lie in 1..=2l"));
    }
    let s = w_out.codim();
    let f = params.field().clone();

    // Conditional measure of the event at this zoom-in, and from it the
    // constant the restricted conditionals are compared against.
    let stats = smooth_zoomin_stats(event, params, r, cap)?;
    let measure = stats
        .iter()
        .find(|st| &st.q_sub == q_sub)
        .map(|st| st.structured_conditional.clone())
        .unwrap_or_else(BigRational::zero);
    let c = measure * q_power(params.q, s * (params.rows() - r));
    let c_half = &c / rational_int(2);

    let mut good = 0u64;
    let mut infeasible = 0u64;
    for _ in 0..v_samples {
        let draw = sample_v_given_q(params, q_sub, r, rng)?;
        // Rows available under this survival pattern: a member of the
        // restricted zoom-out plus a cover shift, counted as pairs.
        let mut coord_rows = Vec::new();
        for (j, choice) in draw.v_choice.iter().enumerate() {
            for t in 0..3 {
                if choice.keeps(t) {
                    let mut e = vec![0 as Elem; params.ambient()];
                    e[3 * j + t] = 1;
                    coord_rows.push(e);
                }
            }
        }
        let coord = Subspace::canonicalize(&f, params.ambient(), coord_rows)?;
        let restricted = w_out.intersect(&coord)?;
        let mut rows_avail = Vec::new();
        for b in restricted.members() {
            for w in params.h_u.members() {
                rows_avail.push(vec_add(&f, &b, &w));
            }
        }
        let n_rows = rows_avail.len() as u64;
        let tuples = n_rows
            .checked_pow(params.rows() as u32)
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::resource("restricted tuple space exceeds the cap"))?;

        let mut conditioned = 0u64;
        let mut hits = 0u64;
        for idx in 0..tuples {
            let mut rest = idx;
            let mut x = Vec::with_capacity(params.rows());
            for _ in 0..params.rows() {
                x.push(rows_avail[(rest % n_rows) as usize].clone());
                rest /= n_rows;
            }
            let span = Subspace::canonicalize(&f, params.ambient(), x[..r].to_vec())?;
            if &span == q_sub {
                conditioned += 1;
                if event(&x) {
                    hits += 1;
                }
            }
        }
        if conditioned == 0 {
            infeasible += 1;
            continue;
        }
        let conditional = BigRational::new(BigInt::from(hits), BigInt::from(conditioned));
        if conditional >= c_half {
            good += 1;
        }
    }

    let fraction = good as f64 / v_samples as f64;
    let threshold = params
        .beta
        .to_f64()
        .unwrap_or(0.0)
        .powi(s as i32 + 2);
    Ok(VPreserveStat {
        c_value: c.to_f64().unwrap_or(f64::INFINITY),
        threshold_fraction: threshold,
        fraction_good: fraction,
        v_samples,
        infeasible_v: infeasible,
        pass: fraction >= threshold,
    })
}
