//! Random and property-based invariants for the word and automorphism
//! layers: normal-form laws, length inequalities, conjugation invariance,
//! the homomorphism law, and power compatibility of iteration.

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use polexp::automorphism::{parse_aut, Automorphism};
use polexp::words::{GroupSpec, NormalWord, Syllable};
use polexp::DEFAULT_BUDGET;

fn mixed_spec() -> GroupSpec {
    GroupSpec::new(vec![2], 2).unwrap()
}

/// Random raw syllable stream (not normalized) over Z² * F₂.
fn raw_syllables(rng: &mut StdRng, len: usize) -> Vec<Syllable> {
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Syllable::free(rng.gen_range(1..=2), if rng.gen_bool(0.5) { 1 } else { -1 })
            } else {
                Syllable::abelian(
                    1,
                    vec![
                        BigInt::from(rng.gen_range(-2i64..=2)),
                        BigInt::from(rng.gen_range(-2i64..=2)),
                    ],
                )
            }
        })
        .collect()
}

fn random_word(rng: &mut StdRng, max_len: usize) -> NormalWord {
    let len = rng.gen_range(0..=max_len);
    NormalWord::normalize(&raw_syllables(rng, len), &mixed_spec()).unwrap()
}

fn mixed_aut() -> Automorphism {
    parse_aut(
        "mixed",
        "group { abelian = [2]; free = 2 }\n\
         map a -> a g1[1,0] b\n\
         map b -> a\n\
         matrix g1 = [[1,1],[1,0]]\n\
         inverse {\n\
         map a -> b\n\
         map b -> g1[0,-1] B a\n\
         matrix g1 = [[0,1],[1,-1]]\n\
         }\n",
    )
    .unwrap()
}

proptest! {
    #[test]
    fn normalize_is_idempotent(seed in 0u64..500) {
        let mut rng = StdRng::seed_from_u64(seed);
        let raw = raw_syllables(&mut rng, 12);
        let spec = mixed_spec();
        let once = NormalWord::normalize(&raw, &spec).unwrap();
        let twice = NormalWord::normalize(once.syllables(), &spec).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn concat_is_subadditive_and_conj_shorter(seed in 0u64..500) {
        let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(97).wrapping_add(1));
        let u = random_word(&mut rng, 8);
        let v = random_word(&mut rng, 8);
        let uv = u.concat(&v);
        prop_assert!(uv.word_length() <= u.word_length() + v.word_length());
        prop_assert!(u.conj_length() <= u.word_length());
    }

    #[test]
    fn conj_length_is_conjugation_invariant(seed in 0u64..300) {
        let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
        let u = random_word(&mut rng, 8);
        let h = random_word(&mut rng, 6);
        let conjugated = h.concat(&u).concat(&h.invert());
        prop_assert_eq!(conjugated.conj_length(), u.conj_length());
    }
}

#[test]
fn cyclic_reduce_reassembles_the_word() {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..300 {
        let u = random_word(&mut rng, 10);
        let (core, conj) = u.cyclic_reduce();
        assert!(core.is_cyclically_reduced());
        assert_eq!(conj.concat(&core).concat(&conj.invert()), u);
    }
}

#[test]
fn apply_is_a_homomorphism() {
    let phi = mixed_aut();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let u = random_word(&mut rng, 6);
        let v = random_word(&mut rng, 6);
        let lhs = phi.apply(&u.concat(&v), DEFAULT_BUDGET).unwrap();
        let rhs = phi
            .apply(&u, DEFAULT_BUDGET)
            .unwrap()
            .concat(&phi.apply(&v, DEFAULT_BUDGET).unwrap());
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn iterate_respects_powers() {
    let phi = mixed_aut();
    let phi2 = phi.power(2, DEFAULT_BUDGET).unwrap();
    let phi3 = phi.power(3, DEFAULT_BUDGET).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let g = random_word(&mut rng, 5);
        for n in 0..4 {
            assert_eq!(
                phi2.iterate(&g, n, DEFAULT_BUDGET).unwrap(),
                phi.iterate(&g, 2 * n, DEFAULT_BUDGET).unwrap()
            );
            assert_eq!(
                phi3.iterate(&g, n, DEFAULT_BUDGET).unwrap(),
                phi.iterate(&g, 3 * n, DEFAULT_BUDGET).unwrap()
            );
        }
    }
}

#[test]
fn conjugacy_growth_is_conjugation_invariant_under_iteration() {
    let phi = mixed_aut();
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..40 {
        let g = random_word(&mut rng, 4);
        let h = random_word(&mut rng, 4);
        let conj = h.concat(&g).concat(&h.invert());
        for n in 0..8 {
            assert_eq!(
                phi.iterate(&conj, n, DEFAULT_BUDGET).unwrap().conj_length(),
                phi.iterate(&g, n, DEFAULT_BUDGET).unwrap().conj_length()
            );
        }
    }
}

#[test]
fn twisted_automorphism_has_same_conjugacy_growth() {
    let phi = mixed_aut();
    let spec = phi.spec().clone();
    let a = NormalWord::parse("b g1[1,1]", &spec).unwrap();
    let twisted = phi.twist_by_element(&a, DEFAULT_BUDGET).unwrap();
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..25 {
        let g = random_word(&mut rng, 4);
        for n in 0..8 {
            assert_eq!(
                twisted.iterate(&g, n, DEFAULT_BUDGET).unwrap().conj_length(),
                phi.iterate(&g, n, DEFAULT_BUDGET).unwrap().conj_length(),
                "conjugacy growth is an outer invariant"
            );
        }
    }
}

#[test]
fn abelian_power_law_on_random_matrices() {
    use polexp::abelian::{orbit_growth, IntMatrix};
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..30 {
        let k = rng.gen_range(2..=4);
        let mut m = IntMatrix::identity(k);
        for _ in 0..rng.gen_range(1..=8) {
            let i = rng.gen_range(0..k);
            let mut j = rng.gen_range(0..k);
            while j == i {
                j = rng.gen_range(0..k);
            }
            let mut rows = vec![vec![BigInt::from(0); k]; k];
            for (d, row) in rows.iter_mut().enumerate() {
                row[d] = BigInt::from(1);
            }
            rows[i][j] = BigInt::from(*[-1i64, 1, 2].iter().nth(rng.gen_range(0..3)).unwrap());
            m = m.mul(&IntMatrix::from_rows(rows).unwrap()).unwrap();
        }
        let v: Vec<BigInt> = (0..k).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect();
        let g1 = orbit_growth(&m, &v).unwrap();
        for p in [2usize, 3] {
            let gp = orbit_growth(&m.pow(p), &v).unwrap();
            assert_eq!(g1.d, gp.d);
            let expect = g1.lambda.powi(p as i32);
            assert!(
                (gp.lambda - expect).abs() <= 1e-6 * expect.max(1.0),
                "λ(A^{p}) = {} vs λ(A)^{p} = {expect}",
                gp.lambda
            );
        }
    }
}
