use cyclovan::ff_arith::{build_field, CyclotomicSetup, FieldContext};
use cyclovan::periods::compute_v;
use cyclovan::{nt, quadforms};
use num_bigint::BigInt;
use proptest::prelude::*;

const PAIRS: [(u64, u64); 6] = [(7, 2), (7, 3), (11, 3), (13, 3), (5, 2), (19, 7)];

fn field(i: usize) -> FieldContext {
    let (p, q) = PAIRS[i];
    let setup = CyclotomicSetup::new(p, q).unwrap();
    build_field(&setup, 1 << 24).unwrap()
}

fn element(ctx: &FieldContext, raw: &[u64]) -> cyclovan::ff_arith::FieldElement {
    let coeffs = raw.iter().take(ctx.n as usize).map(|c| c % ctx.q).collect();
    ctx.element(coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_is_linear(i in 0..PAIRS.len(), a in prop::collection::vec(0u64..100, 12),
                       b in prop::collection::vec(0u64..100, 12), c in 0u64..100) {
        let ctx = field(i);
        let (x, y) = (element(&ctx, &a), element(&ctx, &b));
        let lhs = ctx.trace(&ctx.add(&ctx.scale(c, &x), &y));
        let rhs = (c % ctx.q * ctx.trace(&x) + ctx.trace(&y)) % ctx.q;
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(ctx.trace(&x), ctx.full_trace(&x).unwrap());
    }

    #[test]
    fn zeta_powers_roundtrip_through_dlog(i in 0..PAIRS.len(), k in 0u64..1000) {
        let ctx = field(i);
        let y = ctx.pow_u64(&ctx.zeta, k);
        prop_assert_eq!(ctx.dlog_order_p(&y).unwrap(), k % ctx.p);
    }

    #[test]
    fn pow_is_a_homomorphism(i in 0..PAIRS.len(), a in prop::collection::vec(0u64..100, 12),
                             s in 0u64..500, t in 0u64..500) {
        let ctx = field(i);
        let x = element(&ctx, &a);
        prop_assert_eq!(ctx.mul(&ctx.pow_u64(&x, s), &ctx.pow_u64(&x, t)), ctx.pow_u64(&x, s + t));
    }

    #[test]
    fn v_ignores_the_primitive_root(i in 0..PAIRS.len(), pick in 0usize..20) {
        let (p, q) = PAIRS[i];
        let roots: Vec<u64> = (2..p).filter(|&g| nt::is_primitive_root(g, p)).collect();
        let g = roots[pick % roots.len()];
        prop_assert_eq!(compute_v(p, q, g).unwrap(), compute_v(p, q, roots[0]).unwrap());
    }

    #[test]
    fn power_representation_has_the_right_norm(u in -500i64..500, w in -500i64..500,
                                               half in 0u32..6, pi in 0usize..10) {
        let p = [5u64, 7, 11, 13, 19, 23, 31, 43, 59, 97][pi];
        let s = 2 * half + 1;
        let (u, w) = (BigInt::from(u), BigInt::from(w));
        let sol = quadforms::power_representation(&u, &w, s, p).unwrap();
        let base = &u * &u + BigInt::from(p) * &w * &w;
        prop_assert_eq!(sol.n.clone(), base.pow(s));
        prop_assert_eq!(sol.yval, quadforms::closed_form_y(&u, &w, s, p));
    }

    #[test]
    fn cornacchia_agrees_with_brute_force(d in 1u64..60, idx in 0usize..300) {
        let primes = nt::primes_up_to(2000);
        let n = primes[idx % primes.len()];
        let brute = (1..).take_while(|y| d * y * y <= n).find_map(|y| {
            let x = nt::isqrt(n - d * y * y);
            (x * x + d * y * y == n).then_some((x, y))
        });
        match quadforms::cornacchia(d, n) {
            Some((x, y)) => {
                prop_assert_eq!(x * x + d * y * y, n);
                prop_assert!(brute.is_some());
            }
            None => prop_assert!(brute.is_none()),
        }
    }

    #[test]
    fn four_prime_power_enumeration_is_complete(ki in 0usize..5, qi in 0usize..60, h in 1u32..4) {
        let k = [7u64, 11, 19, 23, 43][ki];
        let q = nt::primes_up_to(300)[qi];
        prop_assume!(q != k && nt::kronecker(-(k as i64), q) == 1);
        let fast = quadforms::represent_four_prime_power(k, q, h).unwrap();
        let target = BigInt::from(q).pow(h) * 4;
        let slow = quadforms::represent_all(k, &target, 10_000_000).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn qf_solution_deserialization_rejects_non_representations(x in -1000i64..1000, y in -1000i64..1000,
                                                             d in 1u64..100, off in 0i64..3) {
        let n = x * x + d as i64 * y * y + off;
        let text = format!(r#"{{"D":{d},"N":"{n}","x":"{x}","y":"{y}"}}"#);
        let parsed: Result<quadforms::QfSolution, _> = serde_json::from_str(&text);
        prop_assert_eq!(parsed.is_ok(), off == 0);
    }
}
