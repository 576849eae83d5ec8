//! Property suites shared by the `properties` and `acceptance` targets.
//!
//! Each suite returns `Err` with the shrunk counterexample on failure.

#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use stacky::counting::heights::{mu_height, wps_height, HeightVariant};
use stacky::counting::mu::mu_count;
use stacky::counting::wps::wps_count;
use stacky::counting::Budget;
use stacky::galois::{f_conjugacy_classes, FieldDescriptor};
use stacky::group::FiniteGroup;
use stacky::invariants::{ab_invariants, argmin_sectors};
use stacky::perm::{index, GroupElement};
use stacky::sector::{junior_count, RaisingFunction, SectorLabel, StackDescriptor};
use stacky::stackspec::{parse_raising, parse_stack_spec};
use stacky::thin::{is_comprehensive, mu_subgroup_scan, subgroup_scan, Verdict};
use stacky::{Error, Q};

pub const CASES: u32 = 1000;

pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(e: Error) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

// ---------------------------------------------------------------------------
// Strategies

fn small_factor() -> impl Strategy<Value = StackDescriptor> {
    prop_oneof![
        (2u64..=6).prop_map(StackDescriptor::Mu),
        prop::collection::vec(1u64..=4, 1..=3).prop_map(StackDescriptor::Wps),
        (2usize..=5).prop_map(|n| StackDescriptor::bg(FiniteGroup::abelian(&[n]).unwrap(), FieldDescriptor::Split)),
        Just(StackDescriptor::bg(FiniteGroup::symmetric(3).unwrap(), FieldDescriptor::Rationals)),
    ]
}

/// A raising function with `age_c ≥ 1` on every twisted sector.
fn adequate_raising(stack: &StackDescriptor, seed: &[u8]) -> RaisingFunction {
    let mut values = BTreeMap::new();
    for (k, s) in stack.sectors().unwrap().into_iter().enumerate() {
        if s.is_twisted {
            let floor = if s.age < Q::from_integer(1) { Q::from_integer(1) - s.age } else { Q::from_integer(0) };
            let bump = Q::new(i64::from(seed[k % seed.len()] % 13), 6);
            values.insert(s.label, floor + bump);
        }
    }
    RaisingFunction::for_stack(stack, values).unwrap()
}

fn zero_dim_stack() -> impl Strategy<Value = StackDescriptor> {
    prop_oneof![
        (2u64..=12).prop_map(StackDescriptor::Mu),
        (2usize..=6, any::<bool>()).prop_map(|(n, q)| {
            let field = if q { FieldDescriptor::Rationals } else { FieldDescriptor::Split };
            StackDescriptor::bg(FiniteGroup::abelian(&[n]).unwrap(), field)
        }),
        (3usize..=4).prop_map(|n| StackDescriptor::bg(FiniteGroup::symmetric(n).unwrap(), FieldDescriptor::Rationals)),
    ]
}

fn permutation(n: usize) -> impl Strategy<Value = GroupElement> {
    Just((1..=n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| GroupElement::from_images(&v).unwrap())
}

fn random_group() -> impl Strategy<Value = FiniteGroup> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(permutation(n), 1..=3).prop_map(move |g| FiniteGroup::generate(n, &g).unwrap())
    })
}

/// Every abelian group of order at most 30, by invariant factors `m1 | m2 | …`.
pub fn abelian_groups_up_to(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, order: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        for m in 2..=n / order {
            if prefix.last().map_or(true, |&l| m % l == 0) {
                prefix.push(m);
                extend(prefix, order * m, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, n, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Suites

/// Sectors, ages, ⊞-values and junior counts of products are those of the factors.
pub fn product_additivity(cases: u32) -> Result<(), String> {
    let strat = (prop::collection::vec(small_factor(), 2..=3), prop::collection::vec(any::<u8>(), 1..=16));
    run(cases, strat, |(factors, seed)| {
        let product = StackDescriptor::Product(factors.clone());
        if product.validate().is_err() {
            return Ok(());
        }
        let cs: Vec<RaisingFunction> = factors.iter().map(|f| adequate_raising(f, &seed)).collect();
        let c = RaisingFunction::boxplus_on(&product, &cs).map_err(fail)?;
        let secs = product.sectors().map_err(fail)?;
        let factor_secs: Vec<_> = factors.iter().map(|f| f.sectors().unwrap()).collect();
        prop_assert_eq!(secs.len(), factor_secs.iter().map(Vec::len).product::<usize>());
        for s in &secs {
            let SectorLabel::Tuple(parts) = &s.label else {
                return Err(TestCaseError::fail("product label is not a tuple"));
            };
            let mut age = Q::from_integer(0);
            let mut value = Q::from_integer(0);
            for ((label, fs), ci) in parts.iter().zip(&factor_secs).zip(&cs) {
                age += fs.iter().find(|t| &t.label == label).expect("factor sector").age;
                value += ci.get(label).expect("factor value");
            }
            prop_assert_eq!(s.age, age);
            prop_assert_eq!(c.get(&s.label), Some(value));
        }
        let j: usize = factors.iter().zip(&cs).map(|(f, ci)| junior_count(f, ci).unwrap()).sum();
        prop_assert_eq!(junior_count(&product, &c).map_err(fail)?, j);
        Ok(())
    })
}

/// `a·min c = 1`, `b = #argmin`, and `(a, b, argmin)` transform correctly under `c ↦ r·c`.
pub fn scaling(cases: u32) -> Result<(), String> {
    let strat = (zero_dim_stack(), prop::collection::vec(1i64..=24, 1..=24), 1i64..=10, 1i64..=10);
    run(cases, strat, |(stack, seed, p, q)| {
        let mut values = BTreeMap::new();
        for (k, s) in stack.sectors().unwrap().into_iter().filter(|s| s.is_twisted).enumerate() {
            values.insert(s.label, Q::new(seed[k % seed.len()], 6));
        }
        let min = *values.values().min().expect("twisted sectors");
        let argmin = values.values().filter(|v| **v == min).count();
        let c = RaisingFunction::for_stack(&stack, values).map_err(fail)?;
        let (a, b) = ab_invariants(&stack, &c).map_err(fail)?;
        prop_assert_eq!(a * min, Q::from_integer(1));
        prop_assert_eq!(b, argmin);
        let r = Q::new(p, q);
        let scaled = c.scaled(r);
        let (a2, b2) = ab_invariants(&stack, &scaled).map_err(fail)?;
        prop_assert_eq!(a2, a / r);
        prop_assert_eq!(b2, b);
        prop_assert_eq!(argmin_sectors(&stack, &scaled).unwrap(), argmin_sectors(&stack, &c).unwrap());
        Ok(())
    })
}

fn class_sets(mut classes: Vec<Vec<GroupElement>>) -> Vec<Vec<GroupElement>> {
    for c in &mut classes {
        c.sort();
    }
    classes.sort();
    classes
}

/// With `U = {1}` the F-conjugacy classes are the conjugacy classes.
pub fn f_conjugacy_split(cases: u32) -> Result<(), String> {
    run(cases, random_group(), |g| {
        let f = f_conjugacy_classes(&g, &FieldDescriptor::Split).map_err(fail)?;
        let u1 = f_conjugacy_classes(&g, &FieldDescriptor::units(g.exponent(), vec![1]).unwrap()).map_err(fail)?;
        let plain = class_sets(g.conjugacy_classes().into_iter().map(|c| c.members).collect());
        prop_assert_eq!(class_sets(f.into_iter().map(|c| c.members).collect()), plain.clone());
        prop_assert_eq!(class_sets(u1.into_iter().map(|c| c.members).collect()), plain);
        Ok(())
    })
}

/// `ind` is constant on F-classes over `Q`, and `ind(g) = ind(g^u)` for units `u`.
pub fn index_constancy(cases: u32) -> Result<(), String> {
    run(cases, random_group(), |g| {
        for class in f_conjugacy_classes(&g, &FieldDescriptor::Rationals).map_err(fail)? {
            let i = index(&class.representative);
            prop_assert!(class.members.iter().all(|h| index(h) == i));
        }
        for h in g.elements() {
            let n = h.order();
            for u in (1..n.max(2)).filter(|u| num_integer::gcd(*u, n) == 1) {
                prop_assert_eq!(index(&h.pow(u)), index(h));
            }
        }
        Ok(())
    })
}

/// No abelian group of order ≤ 30 has a breaking subgroup, for random `c`,
/// over the full and the trivial unit group.
pub fn abelian_no_breaking(cases: u32) -> Result<(), String> {
    let groups: Vec<FiniteGroup> = abelian_groups_up_to(30)
        .iter()
        .map(|m| FiniteGroup::abelian(m).unwrap())
        .collect();
    // Every group once with c = ind, then random raising functions.
    for g in &groups {
        for field in [FieldDescriptor::Rationals, FieldDescriptor::Split] {
            let stack = StackDescriptor::bg(g.clone(), field.clone());
            let c = RaisingFunction::index(&stack).map_err(|e| e.to_string())?;
            let v = subgroup_scan(g, &field, &c).map_err(|e| e.to_string())?;
            if let Some(bad) = v.iter().find(|v| v.verdict == Verdict::Breaking) {
                return Err(format!("{bad:?} breaks {:?}", g.generators()));
            }
        }
    }
    let strat = (0..groups.len(), any::<bool>(), prop::collection::vec(1i64..=6, 1..=30));
    run(cases, strat, |(k, rational, seed)| {
        let g = &groups[k];
        let field = if rational { FieldDescriptor::Rationals } else { FieldDescriptor::Split };
        let stack = StackDescriptor::bg(g.clone(), field.clone());
        let mut values = BTreeMap::new();
        for (i, s) in stack.sectors().unwrap().into_iter().filter(|s| s.is_twisted).enumerate() {
            values.insert(s.label, Q::from_integer(seed[i % seed.len()]));
        }
        let c = RaisingFunction::for_stack(&stack, values).map_err(fail)?;
        for v in subgroup_scan(g, &field, &c).map_err(fail)? {
            prop_assert_ne!(v.verdict, Verdict::Breaking, "{:?}", v);
        }
        Ok(())
    })
}

/// `Bμ_p → Bμ_{p²}` is weakly breaking, and not breaking, when `c` is smaller on `pZ/p²Z`.
pub fn mu_square_weakly_breaking(cases: u32) -> Result<(), String> {
    let strat = (prop::sample::select(vec![2u64, 3]), 1i64..=30, 1i64..=30, 1i64..=6);
    run(cases, strat, |(p, x, y, d)| {
        prop_assume!(x != y);
        let (c1, c2) = (Q::new(x.min(y), d), Q::new(x.max(y), d));
        let l = p * p;
        let values: Vec<Q> = (1..l).map(|j| if j % p == 0 { c1 } else { c2 }).collect();
        let c = RaisingFunction::mu_table(l, &values).map_err(fail)?;
        let scan = mu_subgroup_scan(l, &c).map_err(fail)?;
        prop_assert_eq!(scan.len(), 1);
        prop_assert_eq!(scan[0].verdict, Verdict::WeaklyBreakingOnly);
        prop_assert!(scan[0].verdict.is_weakly_breaking());
        Ok(())
    })
}

/// `S_n` is ind-comprehensive for `3 ≤ n ≤ 6`.
pub fn symmetric_comprehensive() -> Result<(), String> {
    for n in 3..=6 {
        let g = FiniteGroup::symmetric(n).map_err(|e| e.to_string())?;
        let ind = |x: &GroupElement| Q::from_integer(index(x) as i64);
        let r = is_comprehensive(&g, &ind).map_err(|e| e.to_string())?;
        if !r.comprehensive {
            return Err(format!("S_{n} reported not comprehensive: {:?}", r.witness));
        }
    }
    Ok(())
}

/// Heights are constant on `λ·x = (λ^{a_i} x_i)` and on `a·t^l`.
pub fn height_orbit_invariance(cases: u32) -> Result<(), String> {
    let strat = (prop::collection::vec(1u64..=6, 2..=3), prop::collection::vec(-40i64..=40, 3), -5i64..=5)
        .prop_filter("nonzero", |(w, x, l)| *l != 0 && x[..w.len()].iter().any(|v| *v != 0));
    run(cases, strat, |(w, x, lambda)| {
        let x = &x[..w.len()];
        let y: Vec<i64> = w.iter().zip(x).map(|(&a, &v)| v * lambda.pow(a as u32)).collect();
        for variant in [HeightVariant::QuasiToric, HeightVariant::Stable] {
            match (wps_height(&w, x, variant), wps_height(&w, &y, variant)) {
                (Ok(h1), Ok(h2)) => prop_assert_eq!(h1, h2),
                (Err(_), Err(_)) => {}
                (a, b) => return Err(TestCaseError::fail(format!("{a:?} vs {b:?}"))),
            }
        }
        Ok(())
    })?;
    let strat = (2u64..=5, -2000i64..=2000, -12i64..=12, prop::collection::vec(1i64..=12, 4));
    run(cases, strat, |(l, a, t, seed)| {
        prop_assume!(a != 0 && t != 0);
        let values: Vec<Q> = (1..l).map(|j| Q::new(seed[(j - 1) as usize], 4)).collect();
        let c = RaisingFunction::mu_table(l, &values).map_err(fail)?;
        let scaled = a * t.pow(l as u32);
        prop_assert_eq!(mu_height(a, l, &c).map_err(fail)?, mu_height(scaled, l, &c).map_err(fail)?);
        Ok(())
    })
}

/// Counts are identical on one worker and on several.
pub fn worker_determinism(cases: u32) -> Result<(), String> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let budget = Budget::default();
    let strat = (
        prop::sample::select(vec![2u64, 3, 5]),
        prop::collection::vec(2i64..=8, 4),
        prop::collection::vec(1u64..=3000, 1..=6),
    );
    run(cases, strat, |(l, seed, samples)| {
        let values: Vec<Q> = (1..l).map(|j| Q::new(seed[(j - 1) as usize], 2)).collect();
        let c = RaisingFunction::mu_table(l, &values).map_err(fail)?;
        let a = one.install(|| mu_count(l, &c, &samples, &budget));
        let b = many.install(|| mu_count(l, &c, &samples, &budget));
        prop_assert_eq!(a, b);
        Ok(())
    })?;
    let strat = (
        prop::collection::vec(1u64..=4, 2..=3),
        any::<bool>(),
        prop::collection::vec(1u64..=40, 1..=4),
    );
    run(cases, strat, |(w, stable, samples)| {
        let variant = if stable { HeightVariant::Stable } else { HeightVariant::QuasiToric };
        let a = one.install(|| wps_count(&w, variant, &samples, &budget));
        let b = many.install(|| wps_count(&w, variant, &samples, &budget));
        prop_assert_eq!(a, b);
        Ok(())
    })
}

/// The parsers never panic, and every rejection carries an in-range offset.
pub fn parser_fuzz(cases: u32) -> Result<(), String> {
    let near_miss = "[bgmuwpsrodQUsplitindexquasitoriczeablefuxbuiltin():;,|={}/+ 0-9-]{0,48}";
    let strat = prop_oneof![
        near_miss.prop_map(|s| s),
        prop::collection::vec(any::<u8>(), 0..64).prop_map(|b| String::from_utf8_lossy(&b).into_owned()),
        any::<String>(),
    ];
    run(cases, strat, |s| {
        match parse_stack_spec(&s) {
            Ok(spec) => prop_assert_eq!(parse_stack_spec(&spec.to_string()).map_err(fail)?, spec),
            Err(Error::Parse { offset, .. }) => prop_assert!(offset <= s.len()),
            Err(e) => return Err(TestCaseError::fail(format!("non-positional error {e}"))),
        }
        match parse_raising(&s) {
            Ok(e) => prop_assert_eq!(parse_raising(&e.to_string()).map_err(fail)?, e),
            Err(Error::Parse { offset, .. }) => prop_assert!(offset <= s.len()),
            Err(e) => return Err(TestCaseError::fail(format!("non-positional error {e}"))),
        }
        Ok(())
    })
}
