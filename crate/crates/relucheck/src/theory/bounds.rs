//! Sound bounds on every pre-activation, post-activation, and output of
//! a network restricted to an input box and a partial activation
//! assignment.
//!
//! Two propagators are available and can be intersected:
//!
//! * interval arithmetic layer by layer, and
//! * backward linear substitution, which carries a linear function of the
//!   inputs through the layers, replacing each rectified unit by a linear
//!   envelope chosen by coefficient sign, and only rounds to an interval
//!   at the input box.
//!
//! Bounds are valid for every input in the box whose activation pattern
//! agrees with the partial assignment on all assigned neurons.

use crate::network::Network;

use super::ActivationMap;

/// Which propagator(s) to run; `Both` intersects their results at every
/// layer, so later layers build on the tightened bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Abstraction {
    Interval,
    Polytope,
    #[default]
    Both,
}

/// Per-neuron bounds for the whole network: `pre`/`post` are indexed by
/// hidden layer, `output` by output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBounds {
    pub pre: Vec<Vec<(f64, f64)>>,
    pub post: Vec<Vec<(f64, f64)>>,
    pub output: Vec<(f64, f64)>,
}

/// Interval image of an affine map: `weights . prev + bias` with each
/// `prev` coordinate ranging over its interval.
fn affine_interval(
    weights: &[Vec<f64>],
    bias: &[f64],
    prev: &[(f64, f64)],
) -> Vec<(f64, f64)> {
    weights
        .iter()
        .zip(bias)
        .map(|(row, &b)| {
            let mut lo = b;
            let mut hi = b;
            for (&w, &(plo, phi)) in row.iter().zip(prev) {
                if w >= 0.0 {
                    lo += w * plo;
                    hi += w * phi;
                } else {
                    lo += w * phi;
                    hi += w * plo;
                }
            }
            (lo, hi)
        })
        .collect()
}

/// Post-activation interval of a rectified unit with pre-activation in
/// `[lo, hi]`, honoring the assignment: an inactive unit outputs zero, an
/// active or undecided one at most `max(hi, 0)`.
fn post_interval(pre: (f64, f64), status: Option<bool>) -> (f64, f64) {
    match status {
        Some(false) => (0.0, 0.0),
        _ => (pre.0.max(0.0), pre.1.max(0.0)),
    }
}

/// Linear envelope `s * z + t` of a rectified unit, picked per bound
/// sense. Returns `(upper, lower)` as slope/intercept pairs.
fn relu_envelope(pre: (f64, f64), status: Option<bool>) -> ((f64, f64), (f64, f64)) {
    let identity = ((1.0, 0.0), (1.0, 0.0));
    let zero = ((0.0, 0.0), (0.0, 0.0));
    match status {
        Some(true) => identity,
        Some(false) => zero,
        None => {
            let (lo, hi) = pre;
            if lo >= 0.0 {
                identity
            } else if hi <= 0.0 {
                zero
            } else {
                // The chord through (lo, 0) and (hi, hi) bounds from
                // above; from below, the steeper of the two sides.
                let slope = hi / (hi - lo);
                let upper = (slope, -lo * slope);
                let lower = if hi >= -lo { (1.0, 0.0) } else { (0.0, 0.0) };
                (upper, lower)
            }
        }
    }
}

/// One-sided bound on `coeffs . post(k-1) + constant` (inputs when
/// `k == 0`) by substituting backward through layers `k-1 .. 0`.
/// `pre` must hold bounds for those layers already.
#[allow(clippy::too_many_arguments)]
fn backward_bound(
    net: &Network,
    input_box: &[(f64, f64)],
    status: &ActivationMap,
    pre: &[Vec<(f64, f64)>],
    k: usize,
    coeffs: &[f64],
    constant: f64,
    upper: bool,
) -> f64 {
    let mut a = coeffs.to_vec();
    let mut c = constant;
    for j in (0..k).rev() {
        // Replace each post-activation by the envelope side matching the
        // coefficient sign and the bound sense.
        let mut intercepts = 0.0;
        for (i, coef) in a.iter_mut().enumerate() {
            let (env_upper, env_lower) = relu_envelope(pre[j][i], status[j][i]);
            let (s, t) = if (*coef >= 0.0) == upper { env_upper } else { env_lower };
            intercepts += *coef * t;
            *coef *= s;
        }
        c += intercepts;
        // Now `a` ranges over layer j pre-activations; push through the
        // affine map onto the previous post-activations (or the inputs).
        let layer = &net.layers()[j];
        let prev_width = layer.weights[0].len();
        let mut a_prev = vec![0.0; prev_width];
        for (i, coef) in a.iter().enumerate() {
            c += coef * layer.bias[i];
            for (p, w) in a_prev.iter_mut().zip(&layer.weights[i]) {
                *p += coef * w;
            }
        }
        a = a_prev;
    }
    let mut value = c;
    for (&coef, &(lo, hi)) in a.iter().zip(input_box) {
        value += if (coef >= 0.0) == upper { coef * hi } else { coef * lo };
    }
    value
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

/// Propagate bounds through the whole network.
pub fn propagate(
    net: &Network,
    input_box: &[(f64, f64)],
    status: &ActivationMap,
    mode: Abstraction,
) -> NetworkBounds {
    let hidden = net.hidden_layers().len();
    assert_eq!(status.len(), hidden, "assignment shape mismatch");
    let mut pre: Vec<Vec<(f64, f64)>> = Vec::with_capacity(hidden);
    let mut post: Vec<Vec<(f64, f64)>> = Vec::with_capacity(hidden);
    for k in 0..hidden {
        let layer = &net.layers()[k];
        let prev: &[(f64, f64)] = if k == 0 { input_box } else { &post[k - 1] };
        let by_interval = affine_interval(&layer.weights, &layer.bias, prev);
        let zb = match mode {
            Abstraction::Interval => by_interval,
            Abstraction::Polytope | Abstraction::Both => {
                let by_subst: Vec<(f64, f64)> = (0..layer.weights.len())
                    .map(|i| {
                        let row = &layer.weights[i];
                        let b = layer.bias[i];
                        let hi = backward_bound(net, input_box, status, &pre, k, row, b, true);
                        let lo = backward_bound(net, input_box, status, &pre, k, row, b, false);
                        (lo, hi)
                    })
                    .collect();
                match mode {
                    Abstraction::Polytope => by_subst,
                    _ => by_interval.iter().zip(&by_subst).map(|(&a, &b)| intersect(a, b)).collect(),
                }
            }
        };
        let yb = zb
            .iter()
            .zip(&status[k])
            .map(|(&pre, &st)| post_interval(pre, st))
            .collect();
        pre.push(zb);
        post.push(yb);
    }
    let final_layer = net.layers().last().expect("network has layers");
    let prev: &[(f64, f64)] = if hidden == 0 { input_box } else { &post[hidden - 1] };
    let by_interval = affine_interval(&final_layer.weights, &final_layer.bias, prev);
    let output = match mode {
        Abstraction::Interval => by_interval,
        Abstraction::Polytope | Abstraction::Both => {
            let by_subst: Vec<(f64, f64)> = final_layer
                .weights
                .iter()
                .zip(&final_layer.bias)
                .map(|(row, &b)| {
                    let hi = backward_bound(net, input_box, status, &pre, hidden, row, b, true);
                    let lo = backward_bound(net, input_box, status, &pre, hidden, row, b, false);
                    (lo, hi)
                })
                .collect();
            match mode {
                Abstraction::Polytope => by_subst,
                _ => by_interval.iter().zip(&by_subst).map(|(&a, &b)| intersect(a, b)).collect(),
            }
        }
    };
    NetworkBounds { pre, post, output }
}
