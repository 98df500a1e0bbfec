use super::*;
use crate::channel::{entropy, spectrum};
use crate::optimize::maximize_concave_1d;
use crate::test_support::{normalize, random_states};
use proptest::prelude::*;

const LN2: f64 = std::f64::consts::LN_2;
// 30-digit references for eps = 0.5, prior 1/2
const MU1: f64 = 0.470003629245735553650937031148;
const MU_PRIME1: f64 = 0.397543301318591896578743529686;
const MUT_PRIME1: f64 = 0.192744757021757429884044182565;
const CAPACITY: f64 = 0.562335144618808350288030315224;

fn binary() -> ChannelSpec {
    ChannelSpec::binary(0.5).unwrap()
}

fn identical() -> ChannelSpec {
    ChannelSpec::from_real_states(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap()
}

fn half() -> Prior {
    Prior::uniform(2)
}

#[test]
fn mu_examples() {
    assert_eq!(mu(&binary(), &half(), 0.0).unwrap(), 0.0);
    let ortho = ChannelSpec::orthogonal(2).unwrap();
    assert!((mu(&ortho, &half(), 0.7).unwrap() - 0.7 * LN2).abs() < 1e-15);
    assert!((mu(&binary(), &half(), 1.0).unwrap() - MU1).abs() < 1e-14);
    assert!(mu(&binary(), &half(), -0.1).is_err());
}

#[test]
fn mu_derivative_examples() {
    let (p0, _) = mu_derivatives(&binary(), &half(), 0.0).unwrap();
    assert!((p0 - CAPACITY).abs() < 1e-14);
    let (p1, second) = mu_derivatives(&binary(), &half(), 1.0).unwrap();
    assert!((p1 - MU_PRIME1).abs() < 1e-14);
    assert!(second < 0.0);
    for k in 2..=4 {
        let ch = ChannelSpec::orthogonal(k).unwrap();
        for &s in &[0.0, 0.4, 1.0] {
            let (p, q) = mu_derivatives(&ch, &Prior::uniform(k), s).unwrap();
            assert!((p - (k as f64).ln()).abs() < 1e-14);
            assert!(q.abs() < 1e-14);
        }
    }
}

#[test]
fn mu_tilde_examples() {
    let b = binary();
    assert!((mu_tilde(&b, &half(), 1.0).unwrap() - mu(&b, &half(), 1.0).unwrap()).abs() < 1e-12);
    // -2 ln 0.75
    assert!((mu_tilde(&b, &half(), 2.0).unwrap() - 0.575_364_144_903_561_9).abs() < 1e-14);
    let ortho = ChannelSpec::orthogonal(2).unwrap();
    assert!((mu_tilde(&ortho, &half(), 1.0).unwrap() - LN2).abs() < 1e-15);
    assert!(mu_tilde(&b, &half(), 0.5).is_err());
}

#[test]
fn mu_tilde_inf_examples() {
    for &eps in &[0.2, 0.5, 0.9] {
        let ch = ChannelSpec::binary(eps).unwrap();
        let v = mu_tilde_inf(&ch, &half()).unwrap().finite().unwrap();
        assert!((v + eps.ln()).abs() < 1e-14);
    }
    let ortho = ChannelSpec::orthogonal(2).unwrap();
    assert_eq!(mu_tilde_inf(&ortho, &half()).unwrap(), ExtendedReal::Infinite);
    // zero-weight letters never contribute the infinity
    assert_eq!(mu_tilde_inf(&ortho, &Prior::point(2, 1)).unwrap(), ExtendedReal::Finite(0.0));
    assert_eq!(mu_tilde_inf(&identical(), &Prior::new(vec![0.3, 0.7]).unwrap()).unwrap(), ExtendedReal::Finite(0.0));
}

#[test]
fn random_coding_rhs_examples() {
    assert_eq!(random_coding_rhs(&binary(), &half(), 1, 5, 1.0).unwrap(), 0.0);
    let v = random_coding_rhs(&binary(), &half(), 2, 3, 1.0).unwrap();
    assert!((v - 0.48828125).abs() < 1e-15);
    let ortho = ChannelSpec::orthogonal(2).unwrap();
    assert!((random_coding_rhs(&ortho, &half(), 2, 4, 1.0).unwrap() - 0.125).abs() < 1e-15);
    let grows = (1..6).map(|m| random_coding_rhs(&binary(), &half(), m, 3, 0.5).unwrap()).collect::<Vec<_>>();
    assert!(grows.windows(2).all(|w| w[0] < w[1]));
    assert!(random_coding_rhs(&binary(), &half(), 0, 3, 0.5).is_err());
}

#[test]
fn expurgated_rhs_examples() {
    assert_eq!(expurgated_rhs(&binary(), &half(), 1, 3, 1.0).unwrap(), 0.0);
    let v = expurgated_rhs(&binary(), &half(), 2, 3, 1.0).unwrap();
    assert!((v - 0.9765625).abs() < 1e-15);
    let ortho = ChannelSpec::orthogonal(2).unwrap();
    assert!((expurgated_rhs(&ortho, &half(), 2, 2, 1.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn e_r_examples() {
    let p = e_r_at(&binary(), &half(), 0.0).unwrap();
    assert!((p.value - MU1).abs() < 1e-14);
    assert_eq!((p.s_star, p.region), (1.0, Region::RLinear));

    let p = e_r_at(&binary(), &half(), CAPACITY).unwrap();
    assert!(p.value.abs() < 1e-12);

    let knee = e_r_at(&binary(), &half(), MU_PRIME1).unwrap();
    assert!((knee.value - (MU1 - MU_PRIME1)).abs() < 1e-12);
    assert!((knee.value - 0.0724603).abs() < 1e-7);
    let above = e_r_at(&binary(), &half(), MU_PRIME1 + 1e-9).unwrap();
    assert_eq!(above.region, Region::RCurved);
    assert!((above.value - knee.value).abs() < 1e-8);
}

#[test]
fn e_ex_examples() {
    let b = binary();
    let p = e_ex_at(&b, &half(), MU1 + 0.1).unwrap();
    assert_eq!((p.value, p.region), (ExtendedReal::Finite(0.0), Region::ExZero));

    let p = e_ex_at(&b, &half(), 0.0).unwrap();
    assert!((p.value.finite().unwrap() - LN2).abs() < 1e-14);

    let knee_rate = mu_tilde_prime(&b, &half(), 1.0).unwrap();
    assert!((knee_rate - MUT_PRIME1).abs() < 1e-15);
    let knee = e_ex_at(&b, &half(), knee_rate).unwrap();
    assert_eq!(knee.region, Region::ExLinear);
    assert!((knee.value.finite().unwrap() - 0.2772589).abs() < 1e-7);
    let below = e_ex_at(&b, &half(), knee_rate - 1e-9).unwrap();
    assert_eq!(below.region, Region::ExCurved);
    assert!((below.value.finite().unwrap() - knee.value.finite().unwrap()).abs() < 1e-8);

    let at_top = e_ex_at(&b, &half(), MU1).unwrap();
    assert!(at_top.value.finite().unwrap().abs() < 1e-15);
}

#[test]
fn e_ex_below_resolution() {
    let b = binary();
    let tiny = 1e-7;
    let p = e_ex_at(&b, &half(), tiny).unwrap();
    assert!(p.below_resolution);
    assert!((p.value.finite().unwrap() - LN2).abs() < 1e-14);
    assert!(matches!(
        e_ex_at_with(&b, &half(), tiny, FloorPolicy::Error),
        Err(ExponentError::UnboundedParameter { .. })
    ));
    // resolvable rates are unaffected by the policy
    let a = e_ex_at_with(&b, &half(), 0.05, FloorPolicy::Error).unwrap();
    assert!(!a.below_resolution);
    assert!(a.value.finite().unwrap() < LN2);

    let ortho = ChannelSpec::orthogonal(2).unwrap();
    let p = e_ex_at_with(&ortho, &half(), 0.3, FloorPolicy::Error).unwrap();
    assert_eq!(p.value, ExtendedReal::Infinite);
}

#[test]
fn e_ex_root_matches_direct_maximization() {
    let x = ExpurgatedFunction::new(&binary(), &half()).unwrap();
    for &rate in &[0.01, 0.05, 0.1, 0.15, 0.19] {
        let p = x.exponent(rate, FloorPolicy::Error).unwrap();
        let (_, direct) = maximize_concave_1d(|s| x.value(s) - s * rate, 1.0, S_CAP, 1e-10).unwrap();
        assert!((p.value.finite().unwrap() - direct).abs() < 1e-9, "rate {rate}");
    }
}

#[test]
fn e_r_root_matches_direct_maximization() {
    let r = RandomCodingFunction::for_channel(&binary(), &half()).unwrap();
    for k in 0..=60 {
        let rate = k as f64 * 0.01;
        let p = r.exponent(rate);
        let (_, direct) = maximize_concave_1d(|s| r.value(s) - s * rate, 0.0, 1.0, 1e-12).unwrap();
        assert!((p.value - direct.max(0.0)).abs() < 1e-9, "rate {rate}");
    }
}

#[test]
fn capacity_examples() {
    for k in 2..=4 {
        let c = capacity(&ChannelSpec::orthogonal(k).unwrap()).unwrap();
        assert!((c.capacity - (k as f64).ln()).abs() < 1e-6);
    }
    let c = capacity(&binary()).unwrap();
    assert!((c.capacity - CAPACITY).abs() < 1e-12);
    assert_eq!(c.prior.weights(), &[0.5, 0.5]);
    assert!(capacity(&identical()).unwrap().capacity.abs() < 1e-15);
}

#[test]
fn e_r_envelope_examples() {
    let b = binary();
    for &rate in &[0.1, 0.3, 0.5] {
        let env = e_r_envelope(&b, rate).unwrap();
        let at_half = e_r_at(&b, &half(), rate).unwrap().value;
        assert!((env.value.finite().unwrap() - at_half).abs() < 1e-10, "rate {rate}");
    }
    assert_eq!(e_r_envelope(&b, CAPACITY + 0.01).unwrap().value, ExtendedReal::Finite(0.0));

    // mu = s ln k makes the bracket linear in s; grid oracle over s
    let k = 3usize;
    let ortho = ChannelSpec::orthogonal(k).unwrap();
    let rate = 0.4;
    let oracle =
        (0..=1000).map(|j| j as f64 / 1000.0).map(|s| s * (k as f64).ln() - s * rate).fold(f64::NEG_INFINITY, f64::max);
    let env = e_r_envelope(&ortho, rate).unwrap();
    assert!((env.value.finite().unwrap() - oracle).abs() < 1e-9);
    assert!((oracle - ((k as f64).ln() - rate)).abs() < 1e-12);
}

#[test]
fn zero_rate_examples() {
    for &eps in &[0.3, 0.5] {
        let z = zero_rate_exponent(&ChannelSpec::binary(eps).unwrap()).unwrap();
        assert!((z.value.finite().unwrap() + eps.ln()).abs() < 1e-12);
        assert_eq!(z.prior.unwrap().weights(), &[0.5, 0.5]);
    }
    let z = zero_rate_exponent(&ChannelSpec::orthogonal(3).unwrap()).unwrap();
    assert_eq!(z.value, ExtendedReal::Infinite);
    assert_eq!(z.witness, Some((0, 1)));
    assert_eq!(zero_rate_exponent(&identical()).unwrap().value, ExtendedReal::Finite(0.0));
}

#[test]
fn zero_rate_agrees_with_maximized_limit() {
    let ch = random_states(3, 2, &[0.3, 0.1, 0.9, -0.2, 0.5, 0.5, -0.7, 0.2, 0.1, 0.8, 0.4, -0.3]);
    let z = zero_rate_exponent(&ch).unwrap().value.finite().unwrap();
    let direct =
        optimize_simplex(|p| mu_tilde_inf(&ch, &prior_of(p)).unwrap().to_f64(), 3, Goal::Maximize, 0.01).unwrap();
    assert!((z - direct.value).abs() < 1e-9);
}

#[test]
fn region_report_examples() {
    let r = region_report(&binary(), &half()).unwrap();
    assert!((r.mu1 - MU1).abs() < 1e-14);
    assert!((r.mu_prime1 - MU_PRIME1).abs() < 1e-14);
    assert!((r.mut_prime1 - MUT_PRIME1).abs() < 1e-14);
    assert!((r.mut1 - MU1).abs() < 1e-14);
    assert!((r.capacity_at_prior - CAPACITY).abs() < 1e-14);
    assert_eq!(r.ordering, Ordering::Generic);

    let r = region_report(&ChannelSpec::orthogonal(2).unwrap(), &half()).unwrap();
    assert!((r.mut_prime1 - LN2).abs() < 1e-15);
    assert!((r.mut1 - LN2).abs() < 1e-15);
    assert_eq!(r.ordering, Ordering::Degenerate);

    let r = region_report(&identical(), &half()).unwrap();
    for v in [r.mu1, r.mu_prime1, r.mut_prime1, r.mut1, r.capacity_at_prior] {
        assert!(v.abs() < 1e-15);
    }
}

#[test]
fn curve_examples() {
    let mode = CurveMode::Prior(half());
    let c = curve(&binary(), &mode, 0.01, 0.56, 101).unwrap();
    assert_eq!(c.points.len(), 101);
    for p in &c.points {
        let ex = p.e_ex.finite().unwrap();
        if p.rate >= MUT_PRIME1 && p.rate <= MU_PRIME1 {
            assert!((ex - p.e_r).abs() <= 1e-9, "{p:?}");
            assert_eq!(p.region, Region::ExLinear);
        }
        if p.rate < MUT_PRIME1 {
            assert!(ex > p.e_r);
            assert_eq!(p.region, Region::ExCurved);
        }
        if p.rate > MU_PRIME1 {
            assert!(p.e_r > ex);
            assert_eq!(p.region, Region::RCurved);
        }
    }
    let small = curve(&binary(), &mode, 0.05, 0.06, 2).unwrap();
    let p = small.points[0];
    assert!(p.e_ex.finite().unwrap() > p.e_r);

    let beyond = curve(&binary(), &mode, 0.6, 1.0, 5).unwrap();
    assert!(beyond.points.iter().all(|p| p.e_r == 0.0 && p.e_ex == ExtendedReal::Finite(0.0)));
    assert!(beyond.points.iter().all(|p| p.region == Region::ExZero));

    assert!(curve(&binary(), &mode, 0.5, 0.5, 3).is_err());
    assert!(curve(&binary(), &mode, 0.1, 0.5, 1).is_err());
}

#[test]
fn orthogonal_curve_has_infinite_expurgated_exponent() {
    let c = curve(&ChannelSpec::orthogonal(2).unwrap(), &CurveMode::Prior(half()), 0.0, 0.6, 4).unwrap();
    assert!(c.points.iter().all(|p| p.e_ex.is_infinite()));
}

#[test]
fn envelope_curve_for_binary_matches_fixed_prior() {
    let fixed = curve(&binary(), &CurveMode::Prior(half()), 0.05, 0.55, 6).unwrap();
    let env = curve(&binary(), &CurveMode::Envelope, 0.05, 0.55, 6).unwrap();
    for (a, b) in fixed.points.iter().zip(&env.points) {
        assert!((a.e_r - b.e_r).abs() < 1e-9);
        assert!((a.e_ex.to_f64() - b.e_ex.to_f64()).abs() < 1e-9);
        assert_eq!(a.region, b.region);
    }
}

fn second_differences(values: &[f64]) -> impl Iterator<Item = f64> + '_ {
    values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2])
}

fn random_instance(raw: &[f64], w: &[f64], a: usize, d: usize) -> (ChannelSpec, Prior) {
    (random_states(a, d, raw), normalize(&w[..a]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mu_shape(
        raw in prop::collection::vec(-1.0f64..1.0, 32),
        w in prop::collection::vec(0.05f64..1.0, 4),
        a in 2usize..5, d in 2usize..5,
    ) {
        let (ch, p) = random_instance(&raw, &w, a, d);
        let r = RandomCodingFunction::for_channel(&ch, &p).unwrap();
        prop_assert_eq!(r.value(0.0), 0.0);
        let grid: Vec<f64> = (0..=50).map(|k| r.value(k as f64 / 50.0)).collect();
        prop_assert!(grid.windows(2).all(|v| v[0] <= v[1] + 1e-12));
        prop_assert!(second_differences(&grid).all(|x| x <= 1e-9));
        let h = entropy(&spectrum(&ch, &p).unwrap());
        prop_assert!((r.derivative(0.0) - h).abs() <= 1e-10);
        let xs = ExpurgatedFunction::new(&ch, &p).unwrap();
        prop_assert!((xs.value(1.0) - r.value(1.0)).abs() <= 1e-12);
        let tilde: Vec<f64> = (0..=50).map(|k| xs.value(1.0 + k as f64 * 0.2)).collect();
        prop_assert!(tilde.windows(2).all(|v| v[0] <= v[1] + 1e-12));
        prop_assert!(second_differences(&tilde).all(|x| x <= 1e-9));
    }

    #[test]
    fn derivatives_match_finite_differences(
        raw in prop::collection::vec(-1.0f64..1.0, 32),
        w in prop::collection::vec(0.05f64..1.0, 4),
        a in 2usize..5, d in 2usize..5,
        s in 0.01f64..0.99, t in 1.01f64..6.0,
    ) {
        let (ch, p) = random_instance(&raw, &w, a, d);
        let h = 1e-5;
        let r = RandomCodingFunction::for_channel(&ch, &p).unwrap();
        let fd = (r.value(s + h) - r.value(s - h)) / (2.0 * h);
        prop_assert!((r.derivative(s) - fd).abs() <= 1e-6);
        let fd2 = (r.derivative(s + h) - r.derivative(s - h)) / (2.0 * h);
        prop_assert!((r.derivatives(s).1 - fd2).abs() <= 1e-5);
        let x = ExpurgatedFunction::new(&ch, &p).unwrap();
        let fd = (x.value(t + h) - x.value(t - h)) / (2.0 * h);
        prop_assert!((x.derivative(t) - fd).abs() <= 1e-6);
    }

    #[test]
    fn exponents_nonincreasing_convex_continuous(
        raw in prop::collection::vec(-1.0f64..1.0, 32),
        w in prop::collection::vec(0.05f64..1.0, 4),
        a in 2usize..4,
    ) {
        let (ch, p) = random_instance(&raw, &w, a, 2);
        let r = RandomCodingFunction::for_channel(&ch, &p).unwrap();
        let x = ExpurgatedFunction::new(&ch, &p).unwrap();
        let top = r.entropy() * 1.1 + 0.01;
        let rates: Vec<f64> = (1..=200).map(|k| top * k as f64 / 200.0).collect();
        let er: Vec<f64> = rates.iter().map(|&q| r.exponent(q).value).collect();
        let ex: Vec<f64> = rates.iter().map(|&q| x.exponent(q, FloorPolicy::Limit).unwrap().value.to_f64()).collect();
        prop_assert!(er.windows(2).all(|v| v[1] <= v[0] + 1e-12));
        prop_assert!(ex.windows(2).all(|v| v[1] <= v[0] + 1e-12));
        prop_assert!(second_differences(&er).all(|d| d >= -1e-9));
        if ex.iter().all(|v| v.is_finite()) {
            prop_assert!(second_differences(&ex).all(|d| d >= -1e-9));
        }
        let knees = [r.derivative(1.0), x.derivative(1.0), x.value(1.0)];
        for k in knees {
            if k > 1e-6 {
                let lo = r.exponent(k - 1e-10).value;
                let hi = r.exponent(k + 1e-10).value;
                prop_assert!((lo - hi).abs() <= 1e-8);
                let lo = x.exponent(k - 1e-10, FloorPolicy::Limit).unwrap().value.to_f64();
                let hi = x.exponent(k + 1e-10, FloorPolicy::Limit).unwrap().value.to_f64();
                if lo.is_finite() {
                    prop_assert!((lo - hi).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn orthogonal_states_give_linear_mu(k in 2usize..6, s in 0.0f64..1.0) {
        let ch = ChannelSpec::orthogonal(k).unwrap();
        let v = mu(&ch, &Prior::uniform(k), s).unwrap();
        prop_assert!((v - s * (k as f64).ln()).abs() <= 1e-12);
    }
}
