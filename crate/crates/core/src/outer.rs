//! Sparse 3-variable linear equation instances, the equation-sharing gadget,
//! and the two-prover equation-versus-variables game with smoothness, advice,
//! and parallel repetition.
//!
//! Instances keep the regularity every later stage relies on: three distinct
//! variables per equation, every variable in at most ten equations, and any
//! two equations sharing at most one variable. The game sampler follows the
//! verifier procedure literally: per repetition it keeps all three variables
//! or a single one, draws advice on the kept coordinates, and lifts it by
//! zeros to the equation side.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::VarChoice;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::rng::shard_rng;
use crate::stats::RateEstimate;

pub const MAX_OCCURRENCES: usize = 10;

/// One equation: `coeffs[0] vars[0] + coeffs[1] vars[1] + coeffs[2] vars[2] = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub vars: [usize; 3],
    pub coeffs: [Elem; 3],
    pub rhs: Elem,
}

impl Equation {
    pub fn satisfied_by(&self, f: &Field, assignment: &dyn Fn(usize) -> Elem) -> bool {
        let mut acc = f.zero();
        for t in 0..3 {
            acc = f.add(acc, f.mul(self.coeffs[t], assignment(self.vars[t])));
        }
        acc == self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct Gap3LinInstance {
    pub q: u32,
    pub num_vars: usize,
    pub equations: Vec<Equation>,
}

/// Serialized form: rows of `[i1, i2, i3, a, b, c, d]`.
#[derive(Serialize, Deserialize)]
struct InstanceData {
    q: u32,
    num_vars: usize,
    equations: Vec<[u64; 7]>,
}

impl Serialize for Gap3LinInstance {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceData {
            q: self.q,
            num_vars: self.num_vars,
            equations: self
                .equations
                .iter()
                .map(|e| {
                    [
                        e.vars[0] as u64,
                        e.vars[1] as u64,
                        e.vars[2] as u64,
                        u64::from(e.coeffs[0]),
                        u64::from(e.coeffs[1]),
                        u64::from(e.coeffs[2]),
                        u64::from(e.rhs),
                    ]
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Gap3LinInstance {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let data = InstanceData::deserialize(de)?;
        Ok(Gap3LinInstance {
            q: data.q,
            num_vars: data.num_vars,
            equations: data
                .equations
                .into_iter()
                .map(|row| Equation {
                    vars: [row[0] as usize, row[1] as usize, row[2] as usize],
                    coeffs: [row[3] as Elem, row[4] as Elem, row[5] as Elem],
                    rhs: row[6] as Elem,
                })
                .collect(),
        })
    }
}

impl Gap3LinInstance {
    pub fn field(&self) -> Result<Arc<Field>> {
        Ok(Arc::new(Field::from_order(self.q)?))
    }

    /// Check the regularity invariants, naming an offender on failure.
    pub fn validate(&self) -> Result<()> {
        let f = Field::from_order(self.q)?;
        let mut occurrences = vec![0usize; self.num_vars];
        for (i, e) in self.equations.iter().enumerate() {
            for t in 0..3 {
                if e.vars[t] >= self.num_vars {
                    return Err(Error::usage(format!(
                        "equation {i} references variable {} outside 0..{}",
                        e.vars[t], self.num_vars
                    )));
                }
                if e.coeffs[t] == f.zero() || e.coeffs[t] >= self.q {
                    return Err(Error::usage(format!(
                        "equation {i} has coefficient {} not in the multiplicative range",
                        e.coeffs[t]
                    )));
                }
                occurrences[e.vars[t]] += 1;
            }
            if e.rhs >= self.q {
                return Err(Error::usage(format!("equation {i} has rhs outside the field")));
            }
            if e.vars[0] == e.vars[1] || e.vars[0] == e.vars[2] || e.vars[1] == e.vars[2] {
                return Err(Error::usage(format!(
                    "equation {i} repeats a variable; each must depend on three distinct variables"
                )));
            }
        }
        if let Some(v) = occurrences.iter().position(|&c| c > MAX_OCCURRENCES) {
            return Err(Error::usage(format!(
                "variable {v} appears in {} equations, more than {MAX_OCCURRENCES}",
                occurrences[v]
            )));
        }
        for i in 0..self.equations.len() {
            for j in (i + 1)..self.equations.len() {
                let a: BTreeSet<usize> = self.equations[i].vars.iter().copied().collect();
                let shared = self.equations[j]
                    .vars
                    .iter()
                    .filter(|v| a.contains(v))
                    .count();
                if shared > 1 {
                    return Err(Error::usage(format!(
                        "equations {i} and {j} share {shared} variables"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True when the field has characteristic two, the case in which the
    /// sharing gadget's soundness argument goes through. Callers expanding
    /// instances over odd characteristic should surface a warning.
    pub fn char2_soundness(&self) -> Result<bool> {
        Ok(Field::from_order(self.q)?.characteristic() == 2)
    }
}

/// Replace each equation by three copies that share one original variable
/// each, through three fresh per-equation variables. Regularity is restored
/// no matter how entangled the input was, and over characteristic two the
/// value of the output is exactly (2 + value(input)) / 3.
pub fn gadget_expand(inst: &Gap3LinInstance) -> Result<Gap3LinInstance> {
    let mut equations = Vec::with_capacity(3 * inst.equations.len());
    for (i, e) in inst.equations.iter().enumerate() {
        let fresh = [
            inst.num_vars + 3 * i,
            inst.num_vars + 3 * i + 1,
            inst.num_vars + 3 * i + 2,
        ];
        for keep in 0..3 {
            let mut vars = fresh;
            vars[keep] = e.vars[keep];
            equations.push(Equation {
                vars,
                coeffs: e.coeffs,
                rhs: e.rhs,
            });
        }
    }
    let out = Gap3LinInstance {
        q: inst.q,
        num_vars: inst.num_vars + 3 * inst.equations.len(),
        equations,
    };
    out.validate()?;
    Ok(out)
}

/// Exact optimum satisfied fraction, by trying every assignment. An empty
/// equation list is vacuously satisfiable.
pub fn brute_force_3lin_value(inst: &Gap3LinInstance, cap: u64) -> Result<BigRational> {
    if inst.equations.is_empty() {
        return Ok(BigRational::one());
    }
    let f = inst.field()?;
    let total = (inst.q as u64)
        .checked_pow(inst.num_vars as u32)
        .filter(|&t| t <= cap)
        .ok_or_else(|| {
            Error::resource(format!(
                "q^{} assignments exceed the cap of {cap}",
                inst.num_vars
            ))
        })?;
    let q = inst.q as u64;
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let assign = |v: usize| ((idx / q.pow(v as u32)) % q) as Elem;
            inst.equations
                .iter()
                .filter(|e| e.satisfied_by(&f, &assign))
                .count()
        })
        .max()
        .unwrap_or(0);
    Ok(BigRational::new(
        BigInt::from(best),
        BigInt::from(inst.equations.len()),
    ))
}

/// Parameters of the repeated game: repetitions, drop probability, advice
/// count.
#[derive(Debug, Clone)]
pub struct RoundParams {
    pub k: usize,
    pub beta: BigRational,
    pub r: usize,
}

impl RoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::usage("need at least one repetition"));
        }
        if self.beta < BigRational::zero() || self.beta > BigRational::one() {
            return Err(Error::usage("beta must lie in [0, 1]"));
        }
        Ok(())
    }

    fn beta_ratio(&self) -> Result<(u32, u32)> {
        use num::ToPrimitive;
        match (self.beta.numer().to_u32(), self.beta.denom().to_u32()) {
            (Some(n), Some(d)) if d > 0 => Ok((n, d)),
            _ => Err(Error::usage("beta too finely grained for the sampler")),
        }
    }
}

/// One verifier round: the chosen equations, which variables each kept, and
/// the advice on both sides. Equation-side advice rows have one coordinate
/// per equation slot (3k total, zero on dropped slots); variable-side rows
/// concatenate the kept slots.
#[derive(Debug, Clone)]
pub struct OuterRound {
    pub equations: Vec<usize>,
    pub kept: Vec<VarChoice>,
    pub advice_u: Vec<Vec<Elem>>,
    pub advice_v: Vec<Vec<Elem>>,
    pub lifted: bool,
}

impl OuterRound {
    /// Distinct variables visible to the equation-side prover, ascending.
    pub fn u_vars(&self, inst: &Gap3LinInstance) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for &e in &self.equations {
            set.extend(inst.equations[e].vars);
        }
        set.into_iter().collect()
    }

    /// Distinct variables visible to the variable-side prover, ascending.
    pub fn v_vars(&self, inst: &Gap3LinInstance) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for (i, &e) in self.equations.iter().enumerate() {
            for t in 0..3 {
                if self.kept[i].keeps(t) {
                    set.insert(inst.equations[e].vars[t]);
                }
            }
        }
        set.into_iter().collect()
    }

    /// Widths of the kept blocks, in order.
    pub fn kept_widths(&self) -> Vec<usize> {
        self.kept.iter().map(|c| c.width()).collect()
    }
}

/// Run the verifier's sampling procedure once.
pub fn sample_round<R: Rng + ?Sized>(
    inst: &Gap3LinInstance,
    params: &RoundParams,
    rng: &mut R,
) -> Result<OuterRound> {
    params.validate()?;
    if inst.equations.is_empty() {
        return Err(Error::usage("cannot sample rounds of an empty instance"));
    }
    let f = inst.field()?;
    let (num, den) = params.beta_ratio()?;

    let equations: Vec<usize> = (0..params.k)
        .map(|_| rng.gen_range(0..inst.equations.len()))
        .collect();
    let kept: Vec<VarChoice> = (0..params.k)
        .map(|_| {
            if num > 0 && rng.gen_ratio(num, den) {
                VarChoice::Single(rng.gen_range(0..3))
            } else {
                VarChoice::Full
            }
        })
        .collect();

    let mut advice_v = Vec::with_capacity(params.r);
    let mut advice_u = Vec::with_capacity(params.r);
    for _ in 0..params.r {
        let mut v_row = Vec::new();
        let mut u_row = vec![f.zero(); 3 * params.k];
        for (i, choice) in kept.iter().enumerate() {
            for t in 0..3 {
                if choice.keeps(t) {
                    let val = f.rand_elem(rng);
                    v_row.push(val);
                    u_row[3 * i + t] = val;
                }
            }
        }
        advice_v.push(v_row);
        advice_u.push(u_row);
    }

    Ok(OuterRound {
        equations,
        kept,
        advice_u,
        advice_v,
        lifted: true,
    })
}

/// Decide one round given full assignments from both provers: they must
/// agree on every variable the second prover saw, and the first prover's
/// assignment must satisfy every chosen equation.
pub fn verify_round(
    inst: &Gap3LinInstance,
    round: &OuterRound,
    answer_u: &BTreeMap<usize, Elem>,
    answer_v: &BTreeMap<usize, Elem>,
) -> Result<bool> {
    let f = inst.field()?;
    let u_vars = round.u_vars(inst);
    let v_vars = round.v_vars(inst);
    if answer_u.len() != u_vars.len() || u_vars.iter().any(|v| !answer_u.contains_key(v)) {
        return Err(Error::usage("equation-side answer keys must match the question"));
    }
    if answer_v.len() != v_vars.len() || v_vars.iter().any(|v| !answer_v.contains_key(v)) {
        return Err(Error::usage("variable-side answer keys must match the question"));
    }
    for v in &v_vars {
        if answer_u[v] != answer_v[v] {
            return Ok(false);
        }
    }
    for &e in &round.equations {
        let eq = &inst.equations[e];
        if !eq.satisfied_by(&f, &|v| answer_u[&v]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// What each prover sees. The equation side gets the variable triples (which
/// determine the equations, since distinct equations share at most one
/// variable); the variable side gets only the kept variables per repetition.
#[derive(Debug, Clone)]
pub enum Question {
    Equations {
        triples: Vec<[usize; 3]>,
        advice: Vec<Vec<Elem>>,
    },
    Variables {
        kept: Vec<Vec<usize>>,
        advice: Vec<Vec<Elem>>,
    },
}

/// A deterministic strategy: question plus shared seed to a full assignment
/// of the visible variables.
pub type Strategy<'a> =
    &'a (dyn Fn(&Gap3LinInstance, &Question, u64) -> BTreeMap<usize, Elem> + Sync);

fn question_u(inst: &Gap3LinInstance, round: &OuterRound) -> Question {
    Question::Equations {
        triples: round
            .equations
            .iter()
            .map(|&e| inst.equations[e].vars)
            .collect(),
        advice: round.advice_u.clone(),
    }
}

fn question_v(inst: &Gap3LinInstance, round: &OuterRound) -> Question {
    Question::Variables {
        kept: round
            .equations
            .iter()
            .zip(&round.kept)
            .map(|(&e, choice)| {
                (0..3)
                    .filter(|&t| choice.keeps(t))
                    .map(|t| inst.equations[e].vars[t])
                    .collect()
            })
            .collect(),
        advice: round.advice_v.clone(),
    }
}

/// Answer every visible variable according to a fixed global assignment.
pub fn honest_strategy(
    assignment: Vec<Elem>,
) -> impl Fn(&Gap3LinInstance, &Question, u64) -> BTreeMap<usize, Elem> + Sync {
    move |_inst, question, _seed| {
        let vars: BTreeSet<usize> = match question {
            Question::Equations { triples, .. } => {
                triples.iter().flat_map(|t| t.iter().copied()).collect()
            }
            Question::Variables { kept, .. } => {
                kept.iter().flat_map(|g| g.iter().copied()).collect()
            }
        };
        vars.into_iter().map(|v| (v, assignment[v])).collect()
    }
}

/// Answer every visible variable with one constant.
pub fn constant_strategy(
    value: Elem,
) -> impl Fn(&Gap3LinInstance, &Question, u64) -> BTreeMap<usize, Elem> + Sync {
    move |_inst, question, _seed| {
        let vars: BTreeSet<usize> = match question {
            Question::Equations { triples, .. } => {
                triples.iter().flat_map(|t| t.iter().copied()).collect()
            }
            Question::Variables { kept, .. } => {
                kept.iter().flat_map(|g| g.iter().copied()).collect()
            }
        };
        vars.into_iter().map(|v| (v, value)).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameReport {
    pub estimate: RateEstimate,
    pub trials: u64,
}

/// Estimate the provers' win rate over independently sampled rounds. Trials
/// are sharded by seed, and the shared prover seed is the trial index.
pub fn play_game(
    inst: &Gap3LinInstance,
    params: &RoundParams,
    prover_u: Strategy,
    prover_v: Strategy,
    trials: u64,
    seed: u64,
) -> Result<GameReport> {
    params.validate()?;
    inst.validate()?;
    if trials == 0 {
        return Err(Error::usage("need at least one trial"));
    }
    let wins = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let mut rng = shard_rng(seed, trial);
            let round = sample_round(inst, params, &mut rng)?;
            let answer_u = prover_u(inst, &question_u(inst, &round), trial);
            let answer_v = prover_v(inst, &question_v(inst, &round), trial);
            Ok(verify_round(inst, &round, &answer_u, &answer_v)? as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(GameReport {
        estimate: RateEstimate::new(wins, trials),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{chi_squared_ok, within_sigmas};
    use crate::subspace::{gaussian_binomial, Subspace};
    use num::ToPrimitive;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// m disjoint equations x + y + z = rhs[i] over F_2.
    fn disjoint_instance(q: u32, rhs: &[Elem]) -> Gap3LinInstance {
        let equations = rhs
            .iter()
            .enumerate()
            .map(|(i, &d)| Equation {
                vars: [3 * i, 3 * i + 1, 3 * i + 2],
                coeffs: [1, 1, 1],
                rhs: d,
            })
            .collect();
        Gap3LinInstance {
            q,
            num_vars: 3 * rhs.len(),
            equations,
        }
    }

    #[test]
    fn validation_names_offenders() {
        let mut inst = disjoint_instance(2, &[0, 1]);
        assert!(inst.validate().is_ok());

        inst.equations[1].vars = [0, 1, 5];
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("share 2"), "got: {err}");

        let mut repeated = disjoint_instance(2, &[0]);
        repeated.equations[0].vars = [0, 0, 1];
        assert!(repeated.validate().is_err());

        let mut crowded = Gap3LinInstance {
            q: 2,
            num_vars: 23,
            equations: Vec::new(),
        };
        for i in 0..11 {
            crowded.equations.push(Equation {
                vars: [0, 2 * i + 1, 2 * i + 2],
                coeffs: [1, 1, 1],
                rhs: 0,
            });
        }
        let err = crowded.validate().unwrap_err().to_string();
        assert!(err.contains("variable 0"), "got: {err}");
    }

    #[test]
    fn json_round_trips() {
        let inst = disjoint_instance(4, &[0, 3]);
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"equations\":[[0,1,2,1,1,1,0],[3,4,5,1,1,1,3]]"));
        let back: Gap3LinInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back.equations, inst.equations);
        assert_eq!(back.num_vars, inst.num_vars);
    }

    #[test]
    fn gadget_shape_and_lift() {
        // One equation x + y + z = 1 expands to three over six variables.
        let inst = disjoint_instance(2, &[1]);
        let out = gadget_expand(&inst).unwrap();
        assert_eq!(out.num_vars, 6);
        assert_eq!(out.equations.len(), 3);
        out.validate().unwrap();

        // A satisfying assignment lifts by copying each variable to its
        // fresh stand-ins.
        let sigma = [1, 0, 0];
        let f = inst.field().unwrap();
        let lifted = |v: usize| {
            if v < 3 {
                sigma[v]
            } else {
                sigma[v - 3]
            }
        };
        for e in &out.equations {
            assert!(e.satisfied_by(&f, &lifted));
        }
    }

    #[test]
    fn gadget_value_identity_in_characteristic_two() {
        // Over characteristic 2 the expansion satisfies exactly two of each
        // violated triple and all of each satisfied one, so the optimum obeys
        // value(out) = (2 + value(in)) / 3.
        let pair = Gap3LinInstance {
            q: 2,
            num_vars: 4,
            equations: vec![
                Equation {
                    vars: [0, 1, 2],
                    coeffs: [1, 1, 1],
                    rhs: 0,
                },
                Equation {
                    vars: [0, 1, 3],
                    coeffs: [1, 1, 1],
                    rhs: 1,
                },
            ],
        };
        assert_eq!(
            brute_force_3lin_value(&pair, 1 << 20).unwrap(),
            BigRational::one(),
            "both equations hold at once through the free variables"
        );

        let out = gadget_expand(&pair).unwrap();
        let val_in = brute_force_3lin_value(&pair, 1 << 20).unwrap();
        let val_out = brute_force_3lin_value(&out, 1 << 20).unwrap();
        assert_eq!(val_out, (rational(2, 1) + val_in) / rational(3, 1));
    }

    #[test]
    fn gadget_value_identity_on_random_toys() {
        let mut rng = shard_rng(101, 0);
        for trial in 0..50 {
            // Up to two equations over up to six variables keeps the
            // expanded search space at 2^12.
            let n = rng.gen_range(3..=6);
            let m = if n >= 6 && rng.gen_bool(0.5) { 2 } else { 1 };
            let mut vars: Vec<usize> = (0..n).collect();
            let mut equations = Vec::new();
            for _ in 0..m {
                // Draw three distinct variables, preferring fresh ones so
                // the pair shares at most one.
                let mut triple = [0usize; 3];
                for slot in triple.iter_mut() {
                    let pick = rng.gen_range(0..vars.len());
                    *slot = vars.remove(pick);
                }
                vars.push(triple[0]);
                equations.push(Equation {
                    vars: triple,
                    coeffs: [1, 1, 1],
                    rhs: rng.gen_range(0..2) as Elem,
                });
            }
            let inst = Gap3LinInstance {
                q: 2,
                num_vars: n,
                equations,
            };
            inst.validate().unwrap();
            let out = gadget_expand(&inst).unwrap();
            let val_in = brute_force_3lin_value(&inst, 1 << 16).unwrap();
            let val_out = brute_force_3lin_value(&out, 1 << 16).unwrap();
            assert_eq!(
                val_out,
                (rational(2, 1) + val_in.clone()) / rational(3, 1),
                "trial {trial}: value(in) = {val_in}"
            );
            let eps_in = BigRational::one() - val_in;
            let eps_out = BigRational::one() - val_out;
            assert!(eps_in <= rational(3, 1) * eps_out + rational(1, 1_000_000_000));
        }
    }

    #[test]
    fn gadget_soundness_needs_characteristic_two() {
        // Over F_3 the three expanded equations are always jointly solvable
        // in the fresh variables, so the output value is 1 regardless of the
        // input.
        let inst = Gap3LinInstance {
            q: 3,
            num_vars: 4,
            equations: vec![
                Equation {
                    vars: [0, 1, 2],
                    coeffs: [1, 1, 1],
                    rhs: 0,
                },
                Equation {
                    vars: [0, 1, 3],
                    coeffs: [1, 2, 1],
                    rhs: 1,
                },
            ],
        };
        assert!(!inst.char2_soundness().unwrap());
        let out = gadget_expand(&inst).unwrap();
        assert_eq!(
            brute_force_3lin_value(&out, 1 << 22).unwrap(),
            BigRational::one()
        );
    }

    #[test]
    fn brute_force_edge_cases() {
        let empty = Gap3LinInstance {
            q: 2,
            num_vars: 0,
            equations: Vec::new(),
        };
        assert_eq!(brute_force_3lin_value(&empty, 10).unwrap(), BigRational::one());

        let pair = Gap3LinInstance {
            q: 2,
            num_vars: 4,
            equations: vec![
                Equation {
                    vars: [0, 1, 2],
                    coeffs: [1, 1, 1],
                    rhs: 0,
                },
                Equation {
                    vars: [0, 1, 3],
                    coeffs: [1, 1, 1],
                    rhs: 1,
                },
            ],
        };
        assert_eq!(brute_force_3lin_value(&pair, 1 << 10).unwrap(), BigRational::one());

        let big = disjoint_instance(2, &[0; 30]);
        assert!(matches!(
            brute_force_3lin_value(&big, 1 << 20),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn round_sampler_honors_beta() {
        let inst = disjoint_instance(2, &[0, 1, 0, 1]);
        let mut rng = shard_rng(7, 0);

        // beta = 0 never drops and the advice sides coincide slotwise.
        let full = RoundParams {
            k: 3,
            beta: BigRational::zero(),
            r: 2,
        };
        for _ in 0..50 {
            let round = sample_round(&inst, &full, &mut rng).unwrap();
            assert!(round.kept.iter().all(|c| matches!(c, VarChoice::Full)));
            assert_eq!(round.advice_u, round.advice_v);
            assert!(round.lifted);
        }

        // Drop frequency tracks beta = 1/3 per repetition.
        let params = RoundParams {
            k: 4,
            beta: rational(1, 3),
            r: 1,
        };
        let trials = 25_000u64;
        let mut drops = 0u64;
        for _ in 0..trials {
            let round = sample_round(&inst, &params, &mut rng).unwrap();
            drops += round
                .kept
                .iter()
                .filter(|c| !matches!(c, VarChoice::Full))
                .count() as u64;
            for (u_row, v_row) in round.advice_u.iter().zip(&round.advice_v) {
                assert_eq!(u_row.len(), 12);
                let widths: usize = round.kept_widths().iter().sum();
                assert_eq!(v_row.len(), widths);
                // Lifting: nonzero entries of the u row sit exactly on kept
                // slots, matching the v row in order.
                let mut v_iter = v_row.iter();
                for (i, choice) in round.kept.iter().enumerate() {
                    for t in 0..3 {
                        if choice.keeps(t) {
                            assert_eq!(u_row[3 * i + t], *v_iter.next().unwrap());
                        } else {
                            assert_eq!(u_row[3 * i + t], 0);
                        }
                    }
                }
            }
        }
        assert!(within_sigmas(drops, trials * 4, 1.0 / 3.0, 4.0));
    }

    #[test]
    fn verifier_checks_agreement_and_satisfaction() {
        let inst = disjoint_instance(2, &[1, 0]);
        let params = RoundParams {
            k: 2,
            beta: rational(1, 2),
            r: 1,
        };
        let mut rng = shard_rng(13, 0);
        let round = sample_round(&inst, &params, &mut rng).unwrap();


        // A satisfying assignment: 1 on the first equation's first slot.
        let sigma = vec![1, 0, 0, 0, 0, 0];
        let honest_u: BTreeMap<usize, Elem> =
            round.u_vars(&inst).into_iter().map(|v| (v, sigma[v])).collect();
        let honest_v: BTreeMap<usize, Elem> =
            round.v_vars(&inst).into_iter().map(|v| (v, sigma[v])).collect();
        assert!(verify_round(&inst, &round, &honest_u, &honest_v).unwrap());

        // Disagreement on a seen variable fails unless nothing is seen.
        if let Some(first) = round.v_vars(&inst).first().copied() {
            let mut bad_v = honest_v.clone();
            bad_v.insert(first, 1 - bad_v[&first]);
            assert!(!verify_round(&inst, &round, &honest_u, &bad_v).unwrap());
        }

        // Violating an equation fails: flip every variable of equation 0 to 0.
        let mut bad_u = honest_u.clone();
        bad_u.insert(0, 0);
        if round.equations.contains(&0) {
            assert!(!verify_round(&inst, &round, &bad_u, &honest_v).unwrap());
        }

        // Missing a key is a usage error.
        let mut short = honest_u.clone();
        short.remove(&round.u_vars(&inst)[0]);
        assert!(matches!(
            verify_round(&inst, &round, &short, &honest_v),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn honest_provers_win_satisfiable_games() {
        let inst = disjoint_instance(2, &[1, 0, 1]);
        let sigma = vec![1, 0, 0, 0, 0, 0, 1, 0, 0];
        let f = inst.field().unwrap();
        for e in &inst.equations {
            assert!(e.satisfied_by(&f, &|v| sigma[v]));
        }
        let a = honest_strategy(sigma.clone());
        let b = honest_strategy(sigma);
        let params = RoundParams {
            k: 3,
            beta: rational(1, 2),
            r: 1,
        };
        let report = play_game(&inst, &params, &a, &b, 2000, 17).unwrap();
        assert_eq!(report.estimate.successes, 2000);
    }

    #[test]
    fn one_violated_equation_of_ten_scores_eighty_one_percent() {
        // Ten disjoint equations, an assignment violating only the last, two
        // repetitions: win rate (9/10)^2.
        let mut rhs = vec![0 as Elem; 10];
        rhs[9] = 1;
        let inst = Gap3LinInstance {
            q: 2,
            num_vars: 30,
            equations: disjoint_instance(2, &rhs).equations,
        };
        let sigma = vec![0 as Elem; 30];
        let a = honest_strategy(sigma.clone());
        let b = honest_strategy(sigma);
        let params = RoundParams {
            k: 2,
            beta: rational(1, 2),
            r: 1,
        };
        let trials = 60_000u64;
        let report = play_game(&inst, &params, &a, &b, trials, 19).unwrap();
        assert!(
            within_sigmas(report.estimate.successes, trials, 0.81, 4.0),
            "win rate {}",
            report.estimate.rate
        );
    }

    #[test]
    fn constant_provers_lag_honest_ones() {
        // rhs = 1 equations reject the all-zero constant strategy outright.
        let inst = disjoint_instance(2, &[1, 1, 1, 1]);
        let a = constant_strategy(0);
        let b = constant_strategy(0);
        let params = RoundParams {
            k: 2,
            beta: rational(1, 2),
            r: 0,
        };
        let report = play_game(&inst, &params, &a, &b, 500, 23).unwrap();
        assert_eq!(report.estimate.successes, 0);
    }

    #[test]
    fn advice_span_is_uniform_over_subspaces()  {
        // k = 1, beta = 0, r = 2: conditioned on independence, the span of
        // the variable-side advice is uniform over the 2-dimensional
        // subspaces of F_2^3.
        let inst = disjoint_instance(2, &[0]);
        let params = RoundParams {
            k: 1,
            beta: BigRational::zero(),
            r: 2,
        };
        let f = inst.field().unwrap();
        let planes = gaussian_binomial(3, 2, 2).unwrap().to_u64().unwrap();
        assert_eq!(planes, 7);
        let mut counts: BTreeMap<Subspace, u64> = BTreeMap::new();
        let mut kept_trials = 0u64;
        let mut rng = shard_rng(29, 0);
        for _ in 0..30_000 {
            let round = sample_round(&inst, &params, &mut rng).unwrap();
            let span = Subspace::canonicalize(&f, 3, round.advice_v.clone()).unwrap();
            if span.dim() == 2 {
                kept_trials += 1;
                *counts.entry(span).or_insert(0) += 1;
            }
        }
        assert_eq!(counts.len(), planes as usize);
        let observed: Vec<u64> = counts.values().copied().collect();
        let expected = vec![kept_trials as f64 / planes as f64; planes as usize];
        assert!(chi_squared_ok(&observed, &expected, 4.0));
    }

    #[test]
    fn double_expansion_still_validates() {
        let inst = disjoint_instance(2, &[1, 0]);
        let once = gadget_expand(&inst).unwrap();
        let twice = gadget_expand(&once).unwrap();
        twice.validate().unwrap();
        assert_eq!(twice.equations.len(), 18);
    }
}
