//! Procedure levels against history-replay oracles, plus invariants on
//! random streams.

mod common;

use common::{close, gamma, replay_lord, replay_saffron_ai, replay_saffron_constant};
use proptest::prelude::*;
use saffron_core::estimators::{fdp_hat_lord, fdp_hat_saffron};
use saffron_core::{AlphaInvesting, LambdaRule, Lord, OnlineProcedure, PValue, Saffron, SpendRule};

fn p(x: f64) -> PValue {
    PValue::new(x).unwrap()
}

const SCRIPT: [f64; 10] = [0.3, 0.9, 0.0001, 0.6, 0.2, 0.00001, 0.7, 0.4, 0.95, 0.001];

#[test]
fn scripted_stream_matches_replay() {
    let g = gamma("power:2");
    let mut s = Saffron::new(0.05, 0.025, LambdaRule::Constant(0.5), g.clone()).unwrap();
    for &x in &SCRIPT {
        let expected = replay_saffron_constant(s.history(), 0.05, 0.025, 0.5, &g);
        let level = s.next_level();
        assert!(close(level.alpha, expected, 1e-14), "t={}", s.step_index());
        s.observe(p(x)).unwrap();
    }
    assert_eq!(s.rejection_times(), &[3, 6, 10]);
}

#[test]
fn rejection_at_three_adds_first_reward_term() {
    let g = gamma("power:2");
    let mut s = Saffron::new(0.05, 0.025, LambdaRule::Constant(0.5), g.clone()).unwrap();
    for &x in &SCRIPT[..3] {
        s.test(p(x));
    }
    assert_eq!(s.rejection_times(), &[3]);
    // candidates among steps 1..=3: P1 = 0.3 and P3; none after τ1 = 3.
    let expected = 0.5 * (0.025 * g.get(4 - 2) + 0.025 * g.get(4 - 3));
    assert!(close(s.next_level().alpha, expected, 1e-14));
    assert!(close(
        expected,
        replay_saffron_constant(s.history(), 0.05, 0.025, 0.5, &g),
        1e-14
    ));
}

#[test]
fn lord_after_rejection_at_five() {
    let g = gamma("log-optimal");
    let mut lord = Lord::new(0.05, 0.025, g.clone()).unwrap();
    let mut rejected = Vec::new();
    for t in 1..=6 {
        let r = lord.test(p(if t == 5 { 0.0 } else { 0.99 }));
        rejected.push(r.rejected);
    }
    let alpha7 = lord.next_level().alpha;
    assert!(close(alpha7, 0.025 * g.get(7) + 0.025 * g.get(2), 1e-14));
    assert!(close(
        alpha7,
        replay_lord(&rejected, 0.05, 0.025, &g),
        1e-14
    ));
}

fn stream_strategy() -> impl Strategy<Value = Vec<f64>> {
    // a mix of strong signals and uniform noise
    prop::collection::vec(
        prop_oneof![3 => 0.0..1.0f64, 1 => 0.0..0.002f64, 1 => Just(0.0), 1 => Just(1.0)],
        1..80,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn saffron_constant_invariants(
        ps in stream_strategy(),
        lambda in 0.05..0.95f64,
        w0_frac in 0.05..1.0f64,
        kind in prop::sample::select(vec!["power:1.6", "power:2", "log-optimal", "beta:0.5"]),
    ) {
        let g = gamma(kind);
        let (alpha, w0) = (0.05, 0.05 * w0_frac);
        let mut s = Saffron::new(alpha, w0, LambdaRule::Constant(lambda), g.clone()).unwrap();
        let mut records = Vec::new();
        for &x in &ps {
            let expected = replay_saffron_constant(s.history(), alpha, w0, lambda, &g);
            let level = s.next_level();
            prop_assert!(close(level.alpha, expected, 1e-13));
            prop_assert!(level.alpha > 0.0 && level.alpha <= level.lambda);
            let r = s.observe(p(x)).unwrap();
            prop_assert!(!r.rejected || r.candidate);
            records.push(r);
        }
        let c0 = s.candidates_since()[0] as usize;
        prop_assert_eq!(c0, records.iter().filter(|r| r.candidate).count());
        prop_assert!(fdp_hat_saffron(&records).max() <= alpha * (1.0 + 1e-12));
    }

    #[test]
    fn saffron_ai_invariants(ps in stream_strategy(), w0_frac in 0.05..1.0f64) {
        let g = gamma("power:1.6");
        let (alpha, w0) = (0.05, 0.05 * w0_frac);
        let mut s = Saffron::alpha_investing(alpha, w0, g.clone()).unwrap();
        let mut records = Vec::new();
        for &x in &ps {
            let expected = replay_saffron_ai(s.history(), alpha, w0, &g);
            let level = s.next_level();
            prop_assert!(close(level.alpha, expected, 1e-13));
            prop_assert_eq!(level.alpha, level.lambda);
            records.push(s.observe(p(x)).unwrap());
        }
        prop_assert!(fdp_hat_saffron(&records).max() <= alpha * (1.0 + 1e-12));
    }

    #[test]
    fn lord_invariants(ps in stream_strategy(), w0_frac in 0.05..1.0f64) {
        let g = gamma("power:1.4");
        let (alpha, w0) = (0.05, 0.05 * w0_frac);
        let mut lord = Lord::new(alpha, w0, g.clone()).unwrap();
        let mut rejected = Vec::new();
        let mut records = Vec::new();
        for &x in &ps {
            let expected = replay_lord(&rejected, alpha, w0, &g);
            prop_assert!(close(lord.next_level().alpha, expected, 1e-13));
            let r = lord.observe(p(x)).unwrap();
            rejected.push(r.rejected);
            records.push(r);
        }
        prop_assert!(fdp_hat_lord(&records).max() <= alpha * (1.0 + 1e-12));
    }

    #[test]
    fn alpha_investing_wealth_identity(ps in stream_strategy(), psi in 0.01..0.9f64) {
        let alpha = 0.05;
        for rule in [SpendRule::Constant(psi), SpendRule::GammaSinceRejection(gamma("power:2"))] {
            let mut ai = AlphaInvesting::new(alpha, rule).unwrap();
            let mut spent = 0.0;
            let mut rejections = 0usize;
            for &x in &ps {
                let r = ai.test(p(x));
                if r.rejected {
                    rejections += 1;
                } else {
                    spent += r.alpha / (1.0 - r.alpha);
                }
                let identity = alpha + alpha * rejections as f64 - spent;
                prop_assert!((ai.wealth() - identity).abs() < 1e-12);
                prop_assert!(ai.wealth() >= 0.0);
                // spending bound, counting the initial α of wealth
                prop_assert!(spent <= alpha * (rejections + 1) as f64 + 1e-12);
            }
        }
    }

    /// Levels are fixed by the past: two streams sharing a prefix get the
    /// same levels over it, whatever follows.
    #[test]
    fn predictability(prefix in stream_strategy(), a in stream_strategy(), b in stream_strategy()) {
        let g = gamma("power:1.6");
        let builders: Vec<Box<dyn Fn() -> Box<dyn OnlineProcedure>>> = vec![
            Box::new(|| Box::new(Saffron::new(0.05, 0.025, LambdaRule::Constant(0.5), g.clone()).unwrap())),
            Box::new(|| Box::new(Saffron::alpha_investing(0.05, 0.025, g.clone()).unwrap())),
            Box::new(|| Box::new(Lord::new(0.05, 0.025, g.clone()).unwrap())),
            Box::new(|| Box::new(AlphaInvesting::new(0.05, SpendRule::GammaSinceRejection(g.clone())).unwrap())),
        ];
        for build in &builders {
            let run = |tail: &[f64]| {
                let mut proc = build();
                prefix.iter().chain(tail).map(|&x| proc.test(p(x))).collect::<Vec<_>>()
            };
            let (ra, rb) = (run(&a), run(&b));
            for i in 0..prefix.len() {
                prop_assert_eq!(ra[i], rb[i]);
            }
            // the first level after the prefix also agrees
            prop_assert_eq!(ra[prefix.len()].alpha, rb[prefix.len()].alpha);
        }
    }
}

#[test]
fn adaptive_rule_controls_estimate() {
    let g = gamma("power:1.6");
    let rule = LambdaRule::adaptive(|x| (1.0 + x) / 2.0).unwrap();
    let mut s = Saffron::new(0.05, 0.025, rule, g).unwrap();
    let mut records = Vec::new();
    for i in 0..500u64 {
        let x = ((i * 7919) % 1000) as f64 / 1000.0;
        let x = if i % 4 == 0 { x * 1e-3 } else { x };
        records.push(s.test(p(x)));
    }
    assert!(records.iter().all(|r| r.alpha <= r.lambda));
    assert!(fdp_hat_saffron(&records).max() <= 0.05 * (1.0 + 1e-12));
}
