use gcam_pose::constraints::{EquationSystem, Variant};
use gcam_pose::finite_field::*;
use gcam_pose::polynomial::{cayley_scale, Field, Monomial, Poly3, PolyMatrix, PrimeField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fp() -> PrimeField {
    PrimeField::new(DEFAULT_PRIME).unwrap()
}

fn poly_strategy(max_deg: u8) -> impl Strategy<Value = Poly3<PrimeField>> {
    prop::collection::vec(
        ((0..=max_deg, 0..=max_deg, 0..=max_deg), 1..DEFAULT_PRIME),
        1..8,
    )
    .prop_map(move |ts| {
        Poly3::from_terms(
            fp(),
            ts.into_iter()
                .filter(|((a, b, c), _)| a + b + c <= max_deg)
                .map(|((a, b, c), v)| (Monomial::new(a, b, c), v)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn exact_quotient_inverts_multiplication(f in poly_strategy(4)) {
        let d = cayley_scale(fp());
        prop_assert_eq!(f.mul(&d).exact_quotient(&d).unwrap(), f);
    }

    #[test]
    fn division_identity(f in poly_strategy(5), d in poly_strategy(2)) {
        prop_assume!(!d.is_zero());
        let (q, r) = f.div_rem_grlex(&d).unwrap();
        prop_assert_eq!(q.mul(&d).add(&r), f);
    }
}

#[test]
fn repeated_row_determinant_is_zero() {
    let f = fp();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut entry = || {
        Poly3::from_terms(
            f,
            (0..3).map(|_| {
                let m = Monomial::new(
                    rng.random_range(0..2),
                    rng.random_range(0..2),
                    rng.random_range(0..2),
                );
                (m, rng.random_range(1..f.modulus()))
            }),
        )
    };
    for n in [3, 4] {
        let mut rows: Vec<Vec<Poly3<PrimeField>>> =
            (0..n).map(|_| (0..n).map(|_| entry()).collect()).collect();
        rows[n - 1] = rows[0].clone();
        assert!(PolyMatrix::from_rows(rows).det().unwrap().is_zero());
    }
}

/// Exact rationals over i128 for the oracle below.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Q(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Q {
    fn new(n: i128, d: i128) -> Self {
        assert!(d != 0);
        let g = gcd(n, d).max(1) * d.signum();
        Q(n / g, d / g)
    }
    fn int(n: i128) -> Self {
        Q(n, 1)
    }
    fn add(self, o: Q) -> Q {
        Q::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn sub(self, o: Q) -> Q {
        self.add(Q(-o.0, o.1))
    }
    fn mul(self, o: Q) -> Q {
        Q::new(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Q) -> Q {
        Q::new(self.0 * o.1, self.1 * o.0)
    }
    fn to_fp(self, f: PrimeField) -> u64 {
        let n = f.reduce((self.0 % f.modulus() as i128) as i64);
        let d = f.reduce((self.1 % f.modulus() as i128) as i64);
        f.mul(n, f.inv(d).unwrap())
    }
}

/// Dual number `a + b eps` over the rationals.
#[derive(Clone, Copy)]
struct Dual(Q, Q);

impl Dual {
    fn add(self, o: Dual) -> Dual {
        Dual(self.0.add(o.0), self.1.add(o.1))
    }
    fn scale(self, k: Q) -> Dual {
        Dual(self.0.mul(k), self.1.mul(k))
    }
    fn div(self, o: Dual) -> Dual {
        Dual(
            self.0.div(o.0),
            self.1.mul(o.0).sub(self.0.mul(o.1)).div(o.0.mul(o.0)),
        )
    }
}

/// Derivative of the projective map by forward-mode differentiation in
/// exact arithmetic, independent of the closed form under test.
fn rational_affine(h: &[[i128; 3]; 3], u: i128, v: i128) -> Option<[[Q; 2]; 2]> {
    let mut a = [[Q::int(0); 2]; 2];
    for dir in 0..2 {
        let x = [
            Dual(Q::int(u), Q::int((dir == 0) as i128)),
            Dual(Q::int(v), Q::int((dir == 1) as i128)),
            Dual(Q::int(1), Q::int(0)),
        ];
        let row = |r: usize| {
            (0..3).fold(Dual(Q::int(0), Q::int(0)), |acc, c| {
                acc.add(x[c].scale(Q::int(h[r][c])))
            })
        };
        let w = row(2);
        if w.0 .0 == 0 {
            return None;
        }
        for out in 0..2 {
            a[out][dir] = row(out).div(w).1;
        }
    }
    Some(a)
}

#[test]
fn affine_from_homography_matches_rational_oracle() {
    let f = fp();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let h: [[i128; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-40..=40)));
        let (u, v) = (rng.random_range(-40..=40), rng.random_range(-40..=40));
        let Some(want) = rational_affine(&h, u, v) else {
            continue;
        };
        let hf: Mat3 = std::array::from_fn(|r| std::array::from_fn(|c| f.reduce(h[r][c] as i64)));
        let x = [f.reduce(u as i64), f.reduce(v as i64), 1];
        let Ok(xp) = fp_project(f, &hf, &x) else {
            continue;
        };
        let got = fp_affine_from_homography(f, &hf, &x, &xp).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(got[r][c], want[r][c].to_fp(f), "H {h:?} at ({u}, {v})");
            }
        }
        checked += 1;
    }
}

fn recombined(
    eqs: &EquationSystem<PrimeField>,
    rng: &mut ChaCha8Rng,
) -> EquationSystem<PrimeField> {
    let f = eqs.polys[0].field();
    let n = eqs.polys.len();
    // unit lower triangular times random permutation-free upper mix: invertible
    let mut polys = eqs.polys.clone();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.5) {
                let c = rng.random_range(1..f.modulus());
                polys[i] = polys[i].add(&polys[j].scale(c));
            }
        }
        let s = rng.random_range(1..f.modulus());
        polys[i] = polys[i].scale(s);
    }
    EquationSystem {
        polys,
        ..eqs.clone()
    }
}

#[test]
fn solution_count_invariant_to_recombination() {
    let f = fp();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (k, name) in [
        "inter",
        "mono",
        "intra",
        "6pt-inter",
        "inter",
        "mono",
        "intra",
        "6pt-intra",
        "case3",
        "inter",
    ]
    .into_iter()
    .enumerate()
    {
        let layout = FpLayout::named(name).unwrap();
        let scene = synth_instance_fp(f, layout, &mut rng).unwrap();
        let eqs = scene.equations(default_variant(layout)).unwrap();
        let base = count_solutions_fp(&eqs).unwrap();
        assert_eq!(
            count_solutions_fp(&recombined(&eqs, &mut rng)).unwrap(),
            base,
            "instance {k} ({name})"
        );
    }
}

#[test]
fn counts_match_table_for_two_primes() {
    for p in [DEFAULT_PRIME, 10007] {
        let f = PrimeField::new(p).unwrap();
        for (name, variant, want) in [
            ("mono", Variant::E1, 20),
            ("inter", Variant::E1, 56),
            ("inter", Variant::E1E2, 48),
            ("intra", Variant::E1E2, 48),
            ("6pt-inter", Variant::E1E2, 48),
            ("6pt-inter", Variant::E1, 56),
            ("6pt-intra", Variant::E1E2, 48),
            ("case1", Variant::E1, 64),
            ("case5", Variant::E1E2, 48),
        ] {
            let r = verify_config(name, f, 3, 9, Some(variant), true).unwrap();
            assert_eq!(r.solution_count, Some(want), "{name} {variant:?} p={p}");
            assert_eq!(r.failures, 0);
        }
    }
}

#[test]
fn intra_e1_is_positive_dimensional() {
    let r = verify_config("intra", fp(), 2, 0, Some(Variant::E1), true).unwrap();
    assert_eq!(r.solution_count, None);
    assert_eq!(r.count_errors, 2);
}

#[test]
fn theorem_checks_pass_on_every_configuration() {
    for name in [
        "mono",
        "case1",
        "case2",
        "case3",
        "case4",
        "case5",
        "inter",
        "intra",
        "6pt-inter",
        "6pt-intra",
    ] {
        let r = verify_config(name, fp(), 25, 1, None, false).unwrap();
        assert_eq!(r.failures, 0, "{name}");
        assert!(r.checks.iter().all(|c| c.pass));
    }
    let mono = verify_config("mono", fp(), 1, 0, None, false).unwrap();
    assert_eq!(
        mono.checks
            .iter()
            .filter(|c| c.theorem == Theorem::T2)
            .count(),
        20
    );
}

#[test]
fn corrupted_affine_map_breaks_rank_and_consistency() {
    let f = fp();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut scene = synth_instance_fp(f, FpLayout::named("inter").unwrap(), &mut rng).unwrap();
    scene.corrupt_affine(0, &mut rng);
    let res = verify_theorems(&scene, &[Theorem::T3, Theorem::Consistency]).unwrap();
    assert!(res.iter().any(|c| c.theorem == Theorem::T3 && !c.pass));
    assert!(res
        .iter()
        .any(|c| c.theorem == Theorem::Consistency && !c.pass));
}

#[test]
fn small_and_unknown_inputs_rejected() {
    assert!(PrimeField::new(7).is_err());
    assert!(matches!(
        FpLayout::named("case10"),
        Err(FpError::UnknownConfig(_))
    ));
    assert!(matches!(
        FpLayout::named("stereo"),
        Err(FpError::UnknownConfig(_))
    ));
}
