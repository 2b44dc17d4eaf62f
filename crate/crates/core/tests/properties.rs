mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use ratrec_core::algebra::{parse_expr, poly_gcd, FieldTag, RationalFunction};
use ratrec_core::flatten::{chain_report, subfield_membership, transcendence_degree};
use ratrec_core::json::{system_from_json, system_to_json, to_canonical_string};
use ratrec_core::qbf::{brute_force_qbf, compile_qbf, counter_value, Quantifier, QbfFormula};
use ratrec_core::recsys::InitialCondition;
use ratrec_core::zeroness::{counterexample_system, prefix_zero_check, skolem_search, ZeronessVerdict};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_ratfun(r: &mut ChaCha8Rng, nvars: usize) -> RationalFunction {
    let num = random_poly(r, Q, nvars, 2);
    let den = random_poly(r, Q, nvars, 2);
    RationalFunction::new(num, den).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (random_ratfun(&mut r, 2), random_ratfun(&mut r, 2), random_ratfun(&mut r, 2));
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(a.sub(&a).unwrap().is_zero());
        if !b.is_zero() {
            prop_assert_eq!(a.div(&b).unwrap().mul(&b).unwrap(), a.clone());
        }
    }

    #[test]
    fn gcd_divides_and_is_maximal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_poly(&mut r, Q, 3, 2);
        let a = &g * &random_poly(&mut r, Q, 3, 2);
        let b = &g * &random_poly(&mut r, Q, 3, 2);
        let d = poly_gcd(&a, &b);
        prop_assert!(a.div_exact(&d).is_some() && b.div_exact(&d).is_some());
        prop_assert!(d.div_exact(&g.normalized()).is_some(), "gcd {} misses common factor {}", d, g);
    }

    #[test]
    fn display_parse_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_ratfun(&mut r, 2);
        let names = ["x1", "x2"];
        prop_assert_eq!(parse_expr(&f.to_string(), &names, Q).unwrap(), f);
    }

    #[test]
    fn step_homomorphism_commutes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=2);
        let sys = random_system(&mut r, Q, k, 2, true);
        let Some(trace) = bounded_trace(&sys, 3, 25) else { return Ok(()) };
        for n in 0..3 {
            for i in 0..k {
                prop_assert_eq!(sys.apply_step_homomorphism(&trace.rows[n][i]).unwrap(), trace.rows[n + 1][i].clone());
            }
        }
    }

    #[test]
    fn numeric_matches_symbolic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=3);
        let sys = random_system(&mut r, Q, k, 2, true);
        let Some(trace) = bounded_trace(&sys, 3, 25) else { return Ok(()) };
        let point = random_scalars(&mut r, Q, k);
        let (Ok(symbolic), Ok(numeric)) =
            (trace.at_point(&point), sys.evaluate(&InitialCondition::Numeric(point.clone()), 3))
        else {
            // a denominator vanished at this point; nothing to compare
            return Ok(());
        };
        prop_assert_eq!(symbolic, numeric);
    }

    #[test]
    fn prime_field_evaluation_is_reduction(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=3);
        let sys = random_system(&mut r, Q, k, 2, false);
        let point = random_scalars(&mut r, Q, k);
        let f7 = FieldTag::prime(7).unwrap();
        let doc = system_to_json(&sys, Some(&InitialCondition::Numeric(point)));
        let (sys7, init7) = system_from_json(&doc, Some(f7)).unwrap();
        let (sysq, initq) = system_from_json(&doc, None).unwrap();
        let rows7 = sys7.evaluate(&init7.unwrap(), 4).unwrap();
        let rowsq = sysq.evaluate(&initq.unwrap(), 4).unwrap();
        for (a, b) in rows7.iter().flatten().zip(rowsq.iter().flatten()) {
            let reduced = f7.from_bigint(b.as_rational().unwrap().numer());
            prop_assert_eq!(a, &reduced);
        }
    }

    #[test]
    fn trdeg_chain_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gens: Vec<RationalFunction> = (0..4).map(|_| random_ratfun(&mut r, 2)).collect();
        let chain = chain_report(&gens).unwrap();
        let mut prev = 0;
        for &t in &chain.trdegs {
            prop_assert!(t >= prev && t <= prev + 1 && t <= 2);
            prev = t;
        }
    }

    #[test]
    fn membership_agrees_with_trdeg(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gens: Vec<RationalFunction> = (0..2).map(|_| RationalFunction::from_polynomial(random_poly(&mut r, Q, 2, 2))).collect();
        let built = gens[0].mul(&gens[1]).unwrap().add(&gens[0].pow(2)).unwrap();
        let foreign = random_ratfun(&mut r, 2);
        for (f, must) in [(built, true), (foreign, false)] {
            let Ok(found) = subfield_membership(&f, &gens) else { continue };
            match found {
                Some(rep) => {
                    prop_assert_eq!(rep.substitute(&gens).unwrap(), f.clone());
                    let mut all = gens.clone();
                    all.push(f);
                    prop_assert_eq!(transcendence_degree(&all).unwrap(), transcendence_degree(&gens).unwrap());
                }
                None => prop_assert!(!must, "{} not found in the field it was built from", f),
            }
        }
    }

    #[test]
    fn prefix_probe_never_certifies(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=2);
        let sys = random_system(&mut r, Q, k, 2, false);
        let init = InitialCondition::Numeric(random_scalars(&mut r, Q, k));
        if let Ok(v) = prefix_zero_check(&sys, &init, Some(8)) {
            let certified = matches!(v, ZeronessVerdict::Zero { .. });
            prop_assert!(!certified);
        }
    }

    #[test]
    fn skolem_answer_is_minimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f5 = FieldTag::prime(5).unwrap();
        let k = r.gen_range(1..=3);
        let sys = random_system(&mut r, f5, k, 2, false);
        let init = InitialCondition::Numeric(random_scalars(&mut r, f5, k));
        let rows = sys.evaluate(&init, 20).unwrap();
        let first = rows.iter().position(|row| row[0].is_zero());
        prop_assert_eq!(skolem_search(&sys, &init, 20).unwrap(), first);
    }
}

#[test]
fn counterexample_entries_are_falling_factorials() {
    for d in 1..=12usize {
        let (sys, init) = counterexample_system(d).unwrap();
        let rows = sys.evaluate(&init, d + 2).unwrap();
        for (n, row) in rows.iter().enumerate() {
            let expected = if n < d { Q.zero() } else { int(Q, &(factorial(n as u64) / factorial((n - d) as u64))) };
            assert_eq!(row[0], expected, "d = {d}, n = {n}");
        }
    }
}

fn random_formula(r: &mut ChaCha8Rng, k: usize) -> QbfFormula {
    let vars: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let matrix = random_bool_expr(r, &vars, 3);
    let prefix = vars
        .into_iter()
        .map(|v| (if r.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall }, v))
        .collect();
    QbfFormula::new(prefix, matrix).unwrap()
}

/// Truth of the formula with prefix positions `< from` fixed by `outer`.
fn restricted(f: &QbfFormula, from: usize, outer: &dyn Fn(&str) -> bool) -> bool {
    fn go(f: &QbfFormula, j: usize, assigned: &mut Vec<(String, bool)>, outer: &dyn Fn(&str) -> bool) -> bool {
        if j == f.prefix.len() {
            let env = |v: &str| assigned.iter().find(|(n, _)| n == v).map(|(_, b)| *b).unwrap_or_else(|| outer(v));
            return f.matrix.eval(&env);
        }
        let (q, v) = &f.prefix[j];
        let mut branch = |b: bool| {
            assigned.push((v.clone(), b));
            let out = go(f, j + 1, assigned, outer);
            assigned.pop();
            out
        };
        match q {
            Quantifier::Exists => branch(false) || branch(true),
            Quantifier::Forall => branch(false) && branch(true),
        }
    }
    go(f, from, &mut Vec::new(), outer)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compiled_sequences_obey_their_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=3);
        let f = random_formula(&mut r, k);
        let field = if seed % 2 == 0 { FieldTag::prime(2).unwrap() } else { Q };
        let out = compile_qbf(&f, field).unwrap();
        let horizon = (1usize << k) + 8;
        let rows = out.system.evaluate(&out.init, horizon).unwrap();
        let bit = |n: usize, j: usize| !rows[n][j].is_zero();
        let (c, d, fi) = (|i: usize| i - 1, |i: usize| k + i, |i: usize| 2 * k + 1 + i);
        for (n, row) in rows.iter().enumerate() {
            prop_assert!(row.iter().all(|v| v.is_zero() || v.is_one()), "non-Boolean row {}", n);
            for i in 1..=k {
                prop_assert_eq!(bit(n, c(i)), counter_value(i, n), "c{} at n = {}", i, n);
            }
        }
        for n in 1..=(1usize << k) {
            for i in 0..=k {
                if n % (1 << i) != 0 {
                    prop_assert!(!bit(n, d(i)), "d{} nonzero at n = {}", i, n);
                    continue;
                }
                // the counter at n - 1 fixes every variable above level i
                let outer = |v: &str| counter_value(out.variable_levels[v], n - 1);
                let expected = restricted(&f, k - i, &outer);
                prop_assert_eq!(bit(n, d(i)), expected, "d{} at n = {}", i, n);
                if i >= 1 {
                    prop_assert_eq!(bit(n - 1, fi(i - 1)), bit(n - (1 << (i - 1)), d(i - 1)), "f{} at n = {}", i - 1, n - 1);
                }
            }
        }
        prop_assert_eq!(bit(1 << k, d(k)), brute_force_qbf(&f).unwrap());
    }

    #[test]
    fn json_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=3);
        let field = if seed % 3 == 0 { FieldTag::prime(11).unwrap() } else { Q };
        let sys = if seed % 2 == 0 {
            random_system(&mut r, field, k, 3, field.is_rationals())
        } else {
            random_extended_system(&mut r, field, k, seed % 4 == 1)
        };
        let init = InitialCondition::Numeric(random_scalars(&mut r, field, k));
        let text = to_canonical_string(&system_to_json(&sys, Some(&init)));
        let (back, back_init) = system_from_json(&serde_json::from_str(&text).unwrap(), None).unwrap();
        prop_assert_eq!(&back_init, &Some(init.clone()));
        prop_assert_eq!(to_canonical_string(&system_to_json(&back, back_init.as_ref())), text);
        prop_assert_eq!(back.evaluate(&init, 3).ok(), sys.evaluate(&init, 3).ok());
    }
}
