//! Test-only oracles that rebuild levels from a full decision history.
#![allow(dead_code)]

use std::sync::OnceLock;

use saffron_core::{GammaKind, GammaSequence};

pub fn gamma(kind: &str) -> GammaSequence {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(String, GammaSequence)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut cache = cache.lock().unwrap();
    if let Some((_, g)) = cache.iter().find(|(k, _)| k == kind) {
        return g.clone();
    }
    let parsed: GammaKind = kind.parse().unwrap();
    let g = GammaSequence::new(parsed).unwrap();
    cache.push((kind.to_string(), g.clone()));
    g
}

/// The bracketed wealth sum at step `t = history.len() + 1`, recomputed from
/// scratch: rejection times, then C_{j+} = Σ_{i=τ_j+1}^{t-1} C_i per window.
pub fn replay_sum(history: &[(bool, bool)], alpha: f64, w0: f64, g: &GammaSequence) -> f64 {
    let t = history.len() + 1;
    let mut taus = vec![0usize];
    for (i, &(r, _)) in history.iter().enumerate() {
        if r {
            taus.push(i + 1);
        }
    }
    let mut s = 0.0;
    for (j, &tau) in taus.iter().enumerate() {
        let cands: usize = (tau + 1..t).filter(|&i| history[i - 1].1).count();
        let weight = match j {
            0 => w0,
            1 => alpha - w0,
            _ => alpha,
        };
        s += weight * g.get((t - tau - cands) as u64);
    }
    s
}

pub fn replay_saffron_constant(
    history: &[(bool, bool)],
    alpha: f64,
    w0: f64,
    lambda: f64,
    g: &GammaSequence,
) -> f64 {
    ((1.0 - lambda) * replay_sum(history, alpha, w0, g)).min(lambda)
}

pub fn replay_saffron_ai(history: &[(bool, bool)], alpha: f64, w0: f64, g: &GammaSequence) -> f64 {
    let s = replay_sum(history, alpha, w0, g);
    s / (1.0 + s)
}

pub fn replay_lord(rejected: &[bool], alpha: f64, w0: f64, g: &GammaSequence) -> f64 {
    let t = rejected.len() + 1;
    let taus: Vec<usize> = (1..t).filter(|&i| rejected[i - 1]).collect();
    let mut a = w0 * g.get(t as u64);
    for (j, &tau) in taus.iter().enumerate() {
        a += if j == 0 { alpha - w0 } else { alpha } * g.get((t - tau) as u64);
    }
    a.min(1.0)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}
