//! Linear functionals on subspaces and the assignment tables built from
//! them: restriction, pinned extension, side conditions over a distinguished
//! subspace, and the unique cross-extension between equivalent table keys.
//!
//! A functional is stored as its values on the canonical (RREF) basis of its
//! domain, so equality of functionals is component-wise and every domain has
//! exactly q^dim functionals.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::subspace::{solve_linear_system, Subspace, SubspaceData, Vector};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearFunctional {
    domain: Subspace,
    values: Vec<Elem>,
}

impl LinearFunctional {
    pub fn new(domain: Subspace, values: Vec<Elem>) -> Result<LinearFunctional> {
        if values.len() != domain.dim() {
            return Err(Error::usage(format!(
                "{} values supplied for a {}-dimensional domain",
                values.len(),
                domain.dim()
            )));
        }
        if values.iter().any(|&v| v >= domain.field().order()) {
            return Err(Error::usage("functional value out of field range"));
        }
        Ok(LinearFunctional { domain, values })
    }

    pub fn zero(domain: Subspace) -> LinearFunctional {
        let values = vec![0; domain.dim()];
        LinearFunctional { domain, values }
    }

    /// The restriction of x -> <covector, x> to the given domain.
    pub fn from_inner_product(domain: Subspace, covector: &[Elem]) -> LinearFunctional {
        let f = domain.field().clone();
        let values = domain
            .rows()
            .iter()
            .map(|row| crate::subspace::dot(&f, covector, row))
            .collect();
        LinearFunctional { domain, values }
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    /// Values on the canonical basis rows of the domain.
    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn eval(&self, x: &[Elem]) -> Result<Elem> {
        let coords = self
            .domain
            .coords(x)
            .ok_or_else(|| Error::domain("evaluation point outside the functional's domain"))?;
        let f = self.domain.field();
        let mut acc = 0;
        for (&c, &v) in coords.iter().zip(&self.values) {
            acc = f.add(acc, f.mul(c, v));
        }
        Ok(acc)
    }

    pub fn restrict(&self, s: &Subspace) -> Result<LinearFunctional> {
        if !self.domain.contains(s) {
            return Err(Error::domain("restriction target is not inside the domain"));
        }
        let values = s
            .rows()
            .iter()
            .map(|row| self.eval(row))
            .collect::<Result<Vec<_>>>()?;
        LinearFunctional::new(s.clone(), values)
    }

    /// True when the two functionals are defined on the same domain and take
    /// the same values there.
    pub fn agrees_with(&self, other: &LinearFunctional) -> bool {
        self == other
    }

    /// Uniformly random functional on the domain.
    pub fn random<R: Rng + ?Sized>(domain: Subspace, rng: &mut R) -> LinearFunctional {
        let f = domain.field().clone();
        let values = (0..domain.dim()).map(|_| f.rand_elem(&mut *rng)).collect();
        LinearFunctional { domain, values }
    }

    pub fn to_data(&self) -> FunctionalData {
        FunctionalData {
            subspace: self.domain.to_data(),
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalData {
    pub subspace: SubspaceData,
    pub values: Vec<Elem>,
}

impl FunctionalData {
    pub fn to_functional(&self, field: &Arc<crate::field::Field>) -> Result<LinearFunctional> {
        let domain = Subspace::from_data(field, &self.subspace)?;
        LinearFunctional::new(domain, self.values.clone())
    }
}

/// The affine space of functionals on `space` satisfying a list of
/// (vector, value) constraints: one particular solution plus a basis of the
/// homogeneous solutions.
#[derive(Debug, Clone)]
pub struct FunctionalFit {
    pub base: LinearFunctional,
    pub kernel: Vec<LinearFunctional>,
}

/// Solve for all functionals on `space` with the prescribed values. Errors
/// when a constraint vector falls outside `space` or the constraints
/// contradict each other.
pub fn fit_functional(
    space: &Subspace,
    constraints: &[(Vector, Elem)],
) -> Result<FunctionalFit> {
    let f = space.field().clone();
    let mut rows = Vec::with_capacity(constraints.len());
    let mut rhs = Vec::with_capacity(constraints.len());
    for (v, val) in constraints {
        let coords = space
            .coords(v)
            .ok_or_else(|| Error::domain("constraint vector outside the target space"))?;
        rows.push(coords);
        rhs.push(*val);
    }
    if constraints.is_empty() {
        return Ok(FunctionalFit {
            base: LinearFunctional::zero(space.clone()),
            kernel: all_kernel(space),
        });
    }
    let (particular, kernel) = solve_linear_system(&f, &rows, &rhs)
        .ok_or_else(|| Error::domain("inconsistent functional constraints"))?;
    Ok(FunctionalFit {
        base: LinearFunctional::new(space.clone(), particular)?,
        kernel: kernel
            .into_iter()
            .map(|k| LinearFunctional::new(space.clone(), k))
            .collect::<Result<Vec<_>>>()?,
    })
}

fn all_kernel(space: &Subspace) -> Vec<LinearFunctional> {
    (0..space.dim())
        .map(|i| {
            let mut v = vec![0; space.dim()];
            v[i] = 1;
            LinearFunctional {
                domain: space.clone(),
                values: v,
            }
        })
        .collect()
}

fn pin_constraints(pins: &[&LinearFunctional]) -> Vec<(Vector, Elem)> {
    let mut out = Vec::new();
    for pin in pins {
        for (row, &val) in pin.domain().rows().iter().zip(pin.values()) {
            out.push((row.clone(), val));
        }
    }
    out
}

/// The unique functional on `target` agreeing with every pin, or a domain
/// error when the pins do not determine one (under- or over-constrained).
pub fn unique_extension(
    target: &Subspace,
    pins: &[&LinearFunctional],
) -> Result<LinearFunctional> {
    let fit = fit_functional(target, &pin_constraints(pins))?;
    if !fit.kernel.is_empty() {
        return Err(Error::domain(format!(
            "extension is not unique: {} free dimensions remain",
            fit.kernel.len()
        )));
    }
    Ok(fit.base)
}

/// Uniformly random functional on `target` extending `f` and agreeing with
/// every pin. The distribution is uniform over the affine solution space, so
/// each admissible full extension appears with probability q^-(free dims).
pub fn random_extension<R: Rng + ?Sized>(
    f: &LinearFunctional,
    target: &Subspace,
    pins: &[&LinearFunctional],
    rng: &mut R,
) -> Result<LinearFunctional> {
    if !target.contains(f.domain()) {
        return Err(Error::domain("extension target does not contain the domain"));
    }
    let mut all_pins = vec![f];
    all_pins.extend_from_slice(pins);
    let fit = fit_functional(target, &pin_constraints(&all_pins))?;
    let field = target.field().clone();
    let mut values = fit.base.values().to_vec();
    for k in &fit.kernel {
        let c = field.rand_elem(rng);
        if c != 0 {
            for (slot, &kv) in values.iter_mut().zip(k.values()) {
                *slot = field.add(*slot, field.mul(c, kv));
            }
        }
    }
    LinearFunctional::new(target.clone(), values)
}

/// A side condition: prescribed values psi on a distinguished subspace H.
/// Built from pin pairs (vector, value) whose vectors form a basis of H.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideCondition {
    h: Subspace,
    psi: LinearFunctional,
}

impl SideCondition {
    pub fn from_pins(
        field: &Arc<crate::field::Field>,
        ambient: usize,
        vectors: &[Vector],
        values: &[Elem],
    ) -> Result<SideCondition> {
        if vectors.len() != values.len() {
            return Err(Error::usage("side condition pin lists differ in length"));
        }
        let h = Subspace::canonicalize(field, ambient, vectors.to_vec())?;
        if h.dim() != vectors.len() {
            return Err(Error::domain(
                "side condition vectors are linearly dependent",
            ));
        }
        let constraints: Vec<(Vector, Elem)> = vectors
            .iter()
            .cloned()
            .zip(values.iter().copied())
            .collect();
        let fit = fit_functional(&h, &constraints)?;
        debug_assert!(fit.kernel.is_empty());
        Ok(SideCondition { h, psi: fit.base })
    }

    pub fn h(&self) -> &Subspace {
        &self.h
    }
    pub fn psi(&self) -> &LinearFunctional {
        &self.psi
    }

    /// Does `f` (whose domain must contain H) restrict to psi on H?
    pub fn check(&self, f: &LinearFunctional) -> Result<bool> {
        Ok(f.restrict(&self.h)? == self.psi)
    }
}

/// Unique transport of a table entry between equivalent keys. Given f on
/// L + H (direct sum) satisfying the side condition on H, and an equivalent
/// target key L' + H' (meaning both keys generate the same total space
/// together with each other's condition subspace), there is exactly one
/// linear g on the total space extending f and satisfying the target side
/// condition; the result is g restricted to the target key.
pub fn clique_extension(
    f: &LinearFunctional,
    side_from: &SideCondition,
    l_to: &Subspace,
    side_to: &SideCondition,
) -> Result<LinearFunctional> {
    if !side_from.check(f)? {
        return Err(Error::domain(
            "functional violates its own side condition",
        ));
    }
    let target_key = l_to.sum(side_to.h())?;
    if target_key.dim() != l_to.dim() + side_to.h().dim() {
        return Err(Error::domain("target key is not a direct sum"));
    }
    let total = f.domain().sum(side_to.h())?;
    let total_from_target = target_key.sum(side_from.h())?;
    if total != total_from_target {
        return Err(Error::domain(
            "keys are not equivalent: their condition-closed spans differ",
        ));
    }
    let g = unique_extension(&total, &[f, side_to.psi()])?;
    debug_assert!(side_from.check(&g).unwrap_or(false));
    g.restrict(&target_key)
}

/// Assignment table: one functional per subspace key of a fixed dimension.
/// Small tables are materialized; large ones are backed by a pure generator
/// so lazily queried entries are reproducible in any order.
#[derive(Clone)]
pub struct AgreementTable {
    dim: usize,
    source: TableSource,
}

#[derive(Clone)]
enum TableSource {
    Dense(Arc<BTreeMap<Subspace, LinearFunctional>>),
    Generated(Arc<dyn Fn(&Subspace) -> Option<LinearFunctional> + Send + Sync>),
}

impl std::fmt::Debug for AgreementTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.source {
            TableSource::Dense(map) => f
                .debug_struct("AgreementTable")
                .field("dim", &self.dim)
                .field("entries", &map.len())
                .finish(),
            TableSource::Generated(_) => f
                .debug_struct("AgreementTable")
                .field("dim", &self.dim)
                .field("entries", &"<generated>")
                .finish(),
        }
    }
}

impl AgreementTable {
    pub fn dense(dim: usize, entries: BTreeMap<Subspace, LinearFunctional>) -> Result<Self> {
        for (key, val) in &entries {
            if key.dim() != dim {
                return Err(Error::usage("table key of the wrong dimension"));
            }
            if val.domain() != key {
                return Err(Error::usage("table value's domain differs from its key"));
            }
        }
        Ok(AgreementTable {
            dim,
            source: TableSource::Dense(Arc::new(entries)),
        })
    }

    pub fn generated<G>(dim: usize, generator: G) -> Self
    where
        G: Fn(&Subspace) -> Option<LinearFunctional> + Send + Sync + 'static,
    {
        AgreementTable {
            dim,
            source: TableSource::Generated(Arc::new(generator)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry for a key; None models a missing entry, which test procedures
    /// count as a rejection of its own kind.
    pub fn get(&self, key: &Subspace) -> Option<LinearFunctional> {
        if key.dim() != self.dim {
            return None;
        }
        let out = match &self.source {
            TableSource::Dense(map) => map.get(key).cloned(),
            TableSource::Generated(g) => g(key),
        };
        if let Some(f) = &out {
            debug_assert_eq!(f.domain(), key, "generated entry domain mismatch");
        }
        out
    }

    /// Serialized form; only materialized tables have one.
    pub fn to_data(&self) -> Result<TableData> {
        match &self.source {
            TableSource::Dense(map) => Ok(TableData {
                dim: self.dim,
                entries: map.values().map(|f| f.to_data()).collect(),
            }),
            TableSource::Generated(_) => Err(Error::usage(
                "generator-backed tables cannot be serialized",
            )),
        }
    }

    pub fn from_data(field: &Arc<crate::field::Field>, data: &TableData) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in &data.entries {
            let f = e.to_functional(field)?;
            map.insert(f.domain().clone(), f);
        }
        AgreementTable::dense(data.dim, map)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableData {
    pub dim: usize,
    pub entries: Vec<FunctionalData>,
}

/// Table whose every entry is the restriction of one global functional.
pub fn honest_table(global: &LinearFunctional, dim: usize) -> AgreementTable {
    let g = global.clone();
    AgreementTable::generated(dim, move |key| g.restrict(key).ok())
}

/// The entry an honest global assignment induces on a key L + H carrying a
/// side condition. When the global already satisfies the condition the entry
/// is its plain restriction; otherwise it is the unique hybrid that matches
/// the global on L while obeying the condition on H.
pub fn honest_functional_under_condition(
    global: &LinearFunctional,
    l_part: &Subspace,
    side: &SideCondition,
) -> Result<LinearFunctional> {
    let key = l_part.sum(side.h())?;
    if key.dim() != l_part.dim() + side.h().dim() {
        return Err(Error::domain("key is not a direct sum of L and H"));
    }
    let on_h = global.restrict(side.h())?;
    if on_h == *side.psi() {
        return global.restrict(&key);
    }
    let on_l = global.restrict(l_part)?;
    unique_extension(&key, &[&on_l, side.psi()])
}
