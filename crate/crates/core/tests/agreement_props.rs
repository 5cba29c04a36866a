use std::sync::Arc;

use num::{BigInt, BigRational, ToPrimitive};

use grasspcp_core::agreement::{
    blr, brute_force_zoom_decode, grs_list_bound, planted_tables, rational_from_f64, PlantKind,
    TestParams,
};
use grasspcp_core::field::{Elem, Field};
use grasspcp_core::rng::shard_rng;
use grasspcp_core::subspace::{all_vectors, vector_index, Subspace};
use grasspcp_core::tables::LinearFunctional;

fn params(q: u32, n: usize, l1: usize, l2: usize, seed: u64) -> TestParams {
    TestParams {
        q,
        n,
        l1,
        l2,
        trials: 0,
        seed,
    }
}

/// Johnson-style list bound on zoom decoding: at agreement threshold beta the
/// number of functionals on W explaining a beta fraction of a zoom's keys is
/// at most 4/c^2 with c = beta - 2 q^(dim Q - l1). Checked over 100 random
/// tables plus the honest plant, where the list is exactly the global.
#[test]
fn decoded_lists_respect_the_johnson_bound() {
    let beta = rational_from_f64(0.875).unwrap();
    let q = 2u32;
    let n = 4usize;
    let l1 = 3usize;
    let field = Arc::new(Field::from_order(q).unwrap());

    let list_cap = |q_dim: usize| -> usize {
        let c = 0.875 - 2.0 * f64::from(q).powi(q_dim as i32 - l1 as i32);
        assert!(c > 0.0, "threshold must clear twice the chance rate");
        (4.0 / (c * c)).floor() as usize
    };

    for seed in 0..100u64 {
        let p = params(q, n, l1, 1, seed);
        let (t1, _) = planted_tables(PlantKind::Random, &p, 0).unwrap();
        let hits = brute_force_zoom_decode(&t1, &field, n, 1, &beta, 1 << 22).unwrap();
        let mut per_zoom: std::collections::BTreeMap<(Subspace, Subspace), usize> =
            std::collections::BTreeMap::new();
        for hit in &hits {
            *per_zoom
                .entry((hit.zoom.q_in().clone(), hit.zoom.w_out().clone()))
                .or_default() += 1;
        }
        for ((q_sub, _), count) in &per_zoom {
            assert!(
                *count <= list_cap(q_sub.dim()),
                "seed {seed}: list of {count} exceeds the bound at dim {}",
                q_sub.dim()
            );
        }
    }

    // Honest plant: the list at the trivial zoom is exactly its global.
    let p = params(q, n, l1, 1, 424_242);
    let (t1, _) = planted_tables(PlantKind::Honest, &p, 0).unwrap();
    let hits = brute_force_zoom_decode(&t1, &field, n, 1, &beta, 1 << 22).unwrap();
    let trivial: Vec<_> = hits
        .iter()
        .filter(|h| h.zoom.q_in().dim() == 0 && h.zoom.w_out().codim() == 0)
        .collect();
    assert_eq!(trivial.len(), 1);
    assert_eq!(
        trivial[0].agreement(),
        BigRational::from_integer(BigInt::from(1))
    );
}

/// BLR soundness at desk scale: when the rejection rate rho is below 2/9, some
/// linear function sits within distance 2*rho of the input. The nearest
/// linear function is found by exhaustive search over all covectors.
#[test]
fn blr_rejection_bounds_distance_to_linearity() {
    for (q, n, corruptions) in [(2u32, 3usize, 3usize), (3, 2, 2)] {
        let field = Arc::new(Field::from_order(q).unwrap());
        let size = (q as u64).pow(n as u32) as usize;
        let full = Subspace::full(&field, n).unwrap();
        for seed in 0..20u64 {
            let mut rng = shard_rng(0xb1f, seed * 7 + u64::from(q));
            let f = LinearFunctional::random(full.clone(), &mut rng);
            let mut g: Vec<Elem> = all_vectors(&field, n)
                .map(|v| f.eval(&v).unwrap())
                .collect();
            for _ in 0..(seed as usize % (corruptions + 1)) {
                let at = rand::Rng::gen_range(&mut rng, 0..size);
                g[at] = field.rand_elem(&mut rng);
            }

            let report = blr(&field, n, &g).unwrap();
            let reject = BigRational::from_integer(BigInt::from(1)) - report.pass_rate.clone();
            let two_ninths = BigRational::new(BigInt::from(2), BigInt::from(9));
            if reject >= two_ninths {
                continue;
            }

            // Exhaustive nearest-linear search.
            let mut best_agree = 0usize;
            for w in all_vectors(&field, n) {
                let cand = LinearFunctional::from_inner_product(full.clone(), &w);
                let agree = all_vectors(&field, n)
                    .enumerate()
                    .filter(|(i, v)| cand.eval(v).unwrap() == g[*i])
                    .count();
                best_agree = best_agree.max(agree);
            }
            let distance = BigRational::new(
                BigInt::from(size - best_agree),
                BigInt::from(size),
            );
            let doubled = reject.clone() * BigRational::from_integer(BigInt::from(2));
            assert!(
                distance <= doubled,
                "q={q} seed={seed}: distance {} exceeds 2*reject {}",
                distance.to_f64().unwrap(),
                doubled.to_f64().unwrap()
            );

            // With at most a handful of corruptions the self-correction
            // recovers the plant outright.
            if reject < BigRational::new(BigInt::from(1), BigInt::from(8)) {
                let clean: Vec<Elem> = all_vectors(&field, n)
                    .map(|v| f.eval(&v).unwrap())
                    .collect();
                assert_eq!(report.decoded, clean, "q={q} seed={seed}");
            }
        }
    }
}

/// Generator-backed planted tables answer the same key identically no matter
/// when or how often it is queried.
#[test]
fn planted_lookups_are_pure() {
    let p = params(3, 4, 2, 1, 99);
    for kind in [PlantKind::Random, PlantKind::Codim1Cover] {
        let (t1, _) = planted_tables(kind, &p, 20).unwrap();
        let (t1_again, _) = planted_tables(kind, &p, 20).unwrap();
        let field = p.field().unwrap();
        let mut rng = shard_rng(5, 5);
        for _ in 0..30 {
            let key = grasspcp_core::subspace::ZoomPair::trivial(&field, 4)
                .unwrap()
                .sample(2, &mut rng)
                .unwrap();
            let a = t1.get(&key).unwrap();
            let b = t1.get(&key).unwrap();
            let c = t1_again.get(&key).unwrap();
            assert_eq!(a.values(), b.values());
            assert_eq!(a.values(), c.values());
        }
    }
}

/// The applying branch of the list bound always reports at least one word,
/// and moving delta past the threshold switches the branch.
#[test]
fn grs_bound_branches_are_coherent() {
    for m in [2u64, 3, 4, 8, 16] {
        for gamma in [0.1, 0.3, 0.5, 0.7] {
            for delta in [0.3, 0.5, 0.7, 0.9, 0.99] {
                let b = grs_list_bound(m, gamma, delta).unwrap();
                assert_eq!(b.applies, delta > b.threshold);
                if let Some(bound) = b.bound {
                    assert!(bound >= 1);
                    assert!(b.raw.unwrap() >= 1.0);
                } else {
                    assert!(!b.applies);
                }
            }
        }
    }
}

/// vector_index round-trips through all_vectors ordering.
#[test]
fn vector_index_matches_enumeration_order() {
    for q in [2u32, 3, 4] {
        let field = Arc::new(Field::from_order(q).unwrap());
        for (i, v) in all_vectors(&field, 3).enumerate() {
            assert_eq!(vector_index(&field, &v), i as u64);
        }
    }
}
