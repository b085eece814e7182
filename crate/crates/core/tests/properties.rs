use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cspwb_core::agespec::builtin_linear_order;
use cspwb_core::construct::{build_pcsp, full_power_instance, wreath_spec, BuildOptions};
use cspwb_core::datalog::{i4_preimage_reduce, i4_quotient_reduce};
use cspwb_core::fixtures::{chain, directed_cycle};
use cspwb_core::polyfind::{
    find_pcsp_polymorphism, find_polymorphism, find_polymorphism_unreduced, satisfies_identity, IdentityKind,
};
use cspwb_core::relcore::{
    all_homomorphisms, decode_tuple, direct_power, encode_tuple, enumerate_automorphisms, find_homomorphism,
    quotient, FiniteStructure, Partition, Relation, Signature,
};
use cspwb_core::text::{emit_spec, emit_structure, parse_spec, parse_structure};
use cspwb_core::Caps;

// Naive preservation check, kept separate from the library's own.
fn preserves_map(src: &FiniteStructure, dst: &FiniteStructure, map: &[u32]) -> bool {
    src.relations().iter().zip(dst.relations()).all(|(r, s)| {
        r.iter().all(|t| {
            let img: Vec<u32> = t.iter().map(|&x| map[x as usize]).collect();
            s.iter().any(|u| u == img.as_slice())
        })
    })
}

fn all_maps(n: usize, m: usize) -> Vec<Vec<u32>> {
    let total = m.pow(n as u32);
    (0..total).map(|x| decode_tuple(x as u32, m, n)).collect()
}

fn brute_homs(j: &FiniteStructure, a: &FiniteStructure, injective: bool) -> Vec<Vec<u32>> {
    all_maps(j.size(), a.size())
        .into_iter()
        .filter(|f| !injective || f.iter().collect::<HashSet<_>>().len() == f.len())
        .filter(|f| preserves_map(j, a, f))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn eu_sig() -> Signature {
    Signature::new([("E", 2), ("U", 1)]).unwrap()
}

fn structure_from_bits(sig: &Signature, n: usize, bits: &[bool]) -> FiniteStructure {
    let mut it = bits.iter().copied().cycle();
    let rels = sig
        .symbols()
        .iter()
        .map(|s| {
            let total = n.pow(s.arity as u32);
            let tuples: Vec<Vec<u32>> =
                (0..total).filter(|_| it.next().unwrap()).map(|x| decode_tuple(x as u32, n, s.arity)).collect();
            Relation::from_tuples(s.arity, tuples)
        })
        .collect();
    FiniteStructure::from_relations(sig.clone(), n, rels).unwrap()
}

fn arb_structure(sig: Signature, max: usize) -> impl Strategy<Value = FiniteStructure> {
    (1..=max, proptest::collection::vec(any::<bool>(), 64))
        .prop_map(move |(n, bits)| structure_from_bits(&sig, n, &bits))
}

fn arb_sparse(sig: Signature, max: usize) -> impl Strategy<Value = FiniteStructure> {
    (1..=max, proptest::collection::vec(prop::bool::weighted(0.25), 64))
        .prop_map(move |(n, bits)| structure_from_bits(&sig, n, &bits))
}

fn lt_i4() -> Signature {
    Signature::new([("<", 2), ("I4", 4)]).unwrap()
}

fn with_empty_i4(j: &FiniteStructure) -> FiniteStructure {
    j.expand(vec![("I4".to_string(), Relation::empty(4))]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hom_search_matches_brute_force(j in arb_structure(eu_sig(), 3), a in arb_structure(eu_sig(), 3)) {
        for injective in [false, true] {
            let brute = brute_homs(&j, &a, injective);
            let found = find_homomorphism(&j, &a, injective).unwrap();
            prop_assert_eq!(found.is_some(), !brute.is_empty());
            if let Some(w) = found {
                prop_assert!(preserves_map(&j, &a, &w.map));
                prop_assert_eq!(&w.map, &brute[0]);
            }
            let mut all = all_homomorphisms(&j, &a, injective).unwrap();
            all.sort();
            prop_assert_eq!(all, brute);
        }
    }

    #[test]
    fn tuple_codes_round_trip(m in 1usize..6, digits in proptest::collection::vec(0u32..6, 1..6)) {
        let digits: Vec<u32> = digits.into_iter().map(|x| x % m as u32).collect();
        let code = encode_tuple(&digits, m);
        prop_assert_eq!(decode_tuple(code, m, digits.len()), digits);
    }

    #[test]
    fn first_power_is_identity(a in arb_structure(eu_sig(), 4)) {
        let p = direct_power(&a, 1, &Caps::default()).unwrap();
        prop_assert_eq!(p.size(), a.size());
        prop_assert_eq!(p.relation_key(), a.relation_key());
    }

    #[test]
    fn square_is_coordinatewise(a in arb_sparse(eu_sig(), 3)) {
        let p = direct_power(&a, 2, &Caps::default()).unwrap();
        let m = a.size();
        prop_assert_eq!(p.size(), m * m);
        for (i, r) in p.relations().iter().enumerate() {
            prop_assert_eq!(r.len(), a.relation(i).len().pow(2));
            for t in r.iter() {
                for c in 0..2 {
                    let proj: Vec<u32> = t.iter().map(|&x| decode_tuple(x, m, 2)[c]).collect();
                    prop_assert!(a.relation(i).contains(&proj));
                }
            }
        }
        // Both projections are homomorphisms.
        for c in 0..2 {
            let map: Vec<u32> = (0..p.size() as u32).map(|x| decode_tuple(x, m, 2)[c]).collect();
            prop_assert!(preserves_map(&p, &a, &map));
        }
    }

    #[test]
    fn automorphisms_form_a_group(a in arb_structure(eu_sig(), 4)) {
        let auts: HashSet<Vec<u32>> = enumerate_automorphisms(&a, &Caps::default()).unwrap().into_iter().collect();
        let brute: HashSet<Vec<u32>> = all_maps(a.size(), a.size())
            .into_iter()
            .filter(|f| f.iter().collect::<HashSet<_>>().len() == f.len())
            .filter(|f| {
                preserves_map(&a, &a, f) && {
                    let mut inv = vec![0u32; f.len()];
                    for (i, &x) in f.iter().enumerate() {
                        inv[x as usize] = i as u32;
                    }
                    preserves_map(&a, &a, &inv)
                }
            })
            .collect();
        prop_assert_eq!(&auts, &brute);
        let id: Vec<u32> = (0..a.size() as u32).collect();
        prop_assert!(auts.contains(&id));
        for f in &auts {
            for g in &auts {
                let fg: Vec<u32> = g.iter().map(|&x| f[x as usize]).collect();
                prop_assert!(auts.contains(&fg));
            }
        }
    }

    #[test]
    fn identity_quotient_is_trivial(a in arb_structure(eu_sig(), 4)) {
        let q = quotient(&a, &Partition::identity(a.size())).unwrap();
        prop_assert_eq!(q.size(), a.size());
        prop_assert_eq!(q.relation_key(), a.relation_key());
    }

    #[test]
    fn quotient_map_is_a_homomorphism(a in arb_structure(eu_sig(), 4), labels in proptest::collection::vec(0u32..3, 4)) {
        let p = Partition::from_labels(&labels[..a.size()]);
        let q = quotient(&a, &p).unwrap();
        let map = p.dense_index();
        prop_assert!(preserves_map(&a, &q, &map));
    }

    #[test]
    fn structure_text_round_trips(a in arb_structure(eu_sig(), 4)) {
        let back = parse_structure(&emit_structure(&a, "A")).unwrap();
        prop_assert_eq!(back.size(), a.size());
        prop_assert_eq!(back.signature(), a.signature());
        prop_assert_eq!(back.relation_key(), a.relation_key());
    }

    #[test]
    fn i4_reduction_is_idempotent(j in arb_sparse(lt_i4(), 4)) {
        let once = i4_quotient_reduce(&j).unwrap();
        let twice = i4_quotient_reduce(&with_empty_i4(&once)).unwrap();
        prop_assert_eq!(twice.size(), once.size());
        prop_assert_eq!(twice.relation_key(), once.relation_key());
    }

    #[test]
    fn i4_quotient_and_preimage_are_equivalent(j in arb_sparse(lt_i4(), 4)) {
        let q = i4_quotient_reduce(&j).unwrap();
        let p = i4_preimage_reduce(&j).unwrap();
        prop_assert!(find_homomorphism(&q, &p, false).unwrap().is_some());
        prop_assert!(find_homomorphism(&p, &q, false).unwrap().is_some());
        for target in [chain(3), directed_cycle(3), chain(1)] {
            prop_assert_eq!(
                find_homomorphism(&q, &target, false).unwrap().is_some(),
                find_homomorphism(&p, &target, false).unwrap().is_some()
            );
        }
    }

    #[test]
    fn polymorphisms_are_sound(s1 in arb_sparse(eu_sig(), 2), s2 in arb_structure(eu_sig(), 3), n in 2usize..=3) {
        for kind in [IdentityKind::None, IdentityKind::Cyclic(n), IdentityKind::Commutative] {
            if kind == IdentityKind::Commutative && n != 2 {
                continue;
            }
            let f = find_polymorphism(&s1, &s2, n, kind, &Caps::default()).unwrap();
            let g = find_polymorphism_unreduced(&s1, &s2, n, kind, &Caps::default()).unwrap();
            prop_assert_eq!(&f, &g);
            if let Some(f) = f {
                prop_assert!(satisfies_identity(&f, kind).unwrap());
                let power = direct_power(&s1, n, &Caps::default()).unwrap();
                prop_assert!(preserves_map(&power, &s2, &f.values));
            }
        }
    }
}

fn every_structure(sig: &Signature, n: usize) -> Vec<FiniteStructure> {
    let width: usize = sig.symbols().iter().map(|s| n.pow(s.arity as u32)).sum();
    (0..1u64 << width)
        .map(|mask| {
            let bits: Vec<bool> = (0..width).map(|i| mask >> i & 1 == 1).collect();
            structure_from_bits(sig, n, &bits)
        })
        .collect()
}

#[test]
fn wreath_spec_survives_text_round_trip() {
    let w = wreath_spec(&builtin_linear_order("<1"), &builtin_linear_order("<")).unwrap();
    let back = parse_spec(&emit_spec(&w)).unwrap();
    assert_eq!(back.signature, w.signature);
    let mut members = 0;
    for n in 1..=2 {
        for f in every_structure(&w.signature, n) {
            let a = w.in_age(&f).unwrap();
            assert_eq!(a, back.in_age(&f).unwrap());
            members += a as usize;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let width: usize = w.signature.symbols().iter().map(|s| 3usize.pow(s.arity as u32)).sum();
    for _ in 0..20_000 {
        let bits: Vec<bool> = (0..width).map(|_| rng.gen_bool(0.4)).collect();
        let f = structure_from_bits(&w.signature, 3, &bits);
        let a = w.in_age(&f).unwrap();
        assert_eq!(a, back.in_age(&f).unwrap());
        members += a as usize;
    }
    assert!(members > 0);
}

#[test]
fn sandwich_on_chains() {
    let lin = builtin_linear_order("<");
    let tau = ["<".to_string()];
    for n in [3, 4] {
        let t = build_pcsp(&lin, &tau, &chain(n), &BuildOptions::default()).unwrap();
        assert!(t.verify());
        let again = full_power_instance(&t.s_hat, t.d, &Caps::default()).unwrap();
        assert_eq!(again.size(), t.s1.size());
        assert_eq!(again.relation_key(), t.s1.relation_key());
        assert_eq!(find_pcsp_polymorphism(&t, 2, IdentityKind::Cyclic(2), &Caps::default()).unwrap(), None);
    }
}
