//! Exhaustive field-axiom verification for every prime power up to 256.
//!
//! Pairwise laws are checked over all pairs, triple laws over all triples;
//! multiplication is memoized into a q x q table first so the triple loops
//! are lookups.

use grasspcp_core::field::Field;

fn prime_powers_up_to(cap: u32) -> Vec<u32> {
    (2..=cap).filter(|&q| Field::from_order(q).is_ok()).collect()
}

#[test]
fn axioms_exhaustive_all_prime_powers_to_256() {
    for q in prime_powers_up_to(256) {
        let f = Field::from_order(q).unwrap();
        let n = q as usize;
        let mut mul = vec![0u32; n * n];
        let mut add = vec![0u32; n * n];
        for a in 0..q {
            for b in 0..q {
                mul[(a * q + b) as usize] = f.mul(a, b);
                add[(a * q + b) as usize] = f.add(a, b);
            }
        }
        let m = |a: u32, b: u32| mul[(a * q + b) as usize];
        let s = |a: u32, b: u32| add[(a * q + b) as usize];

        for a in 0..q {
            assert_eq!(s(a, 0), a);
            assert_eq!(m(a, 1), a);
            assert_eq!(s(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(m(a, f.inv(a).unwrap()), 1, "q={q} a={a}");
            }
            for b in 0..q {
                assert_eq!(s(a, b), s(b, a));
                assert_eq!(m(a, b), m(b, a));
                if a != 0 && b != 0 {
                    assert_ne!(m(a, b), 0, "zero divisor at q={q}: {a}*{b}");
                }
            }
        }
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    assert_eq!(s(s(a, b), c), s(a, s(b, c)));
                    assert_eq!(m(m(a, b), c), m(a, m(b, c)));
                    assert_eq!(m(a, s(b, c)), s(m(a, b), m(a, c)));
                }
            }
        }
    }
}

#[test]
fn frobenius_is_additive_everywhere() {
    // (a+b)^p = a^p + b^p certifies the characteristic; checked on the
    // largest extension fields in the suite.
    for q in [64u32, 81, 128, 243, 256] {
        let f = Field::from_order(q).unwrap();
        let p = u64::from(f.characteristic());
        for a in f.elems() {
            for b in f.elems() {
                assert_eq!(
                    f.pow(f.add(a, b), p),
                    f.add(f.pow(a, p), f.pow(b, p)),
                    "q={q} a={a} b={b}"
                );
            }
        }
    }
}

#[test]
fn trace_is_linear_and_surjective() {
    for q in [4u32, 8, 9, 16, 27, 32, 64] {
        let f = Field::from_order(q).unwrap();
        let p = f.characteristic();
        for a in f.elems() {
            for b in f.elems() {
                assert_eq!(
                    f.trace(f.add(a, b)),
                    (f.trace(a) + f.trace(b)) % p,
                    "q={q}"
                );
            }
        }
        // Tr is onto the prime field: each fiber has size q/p exactly.
        for t in 0..p {
            let fiber = f.elems().filter(|&x| f.trace(x) == t).count();
            assert_eq!(fiber, (q / p) as usize, "q={q} t={t}");
        }
    }
}
