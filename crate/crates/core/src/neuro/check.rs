//! Central finite differences against reverse-mode gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::ParameterStore;
use super::tape::{Tape, Var};

pub const DEFAULT_STEP: f64 = 1e-5;

fn analytic(inputs: &ParameterStore, f: &impl Fn(&mut Tape, &ParameterStore) -> Var) -> super::ParamGrads {
    let mut tape = Tape::new();
    let loss = f(&mut tape, inputs);
    let grads = tape.backward(loss);
    let mut store = inputs.clone();
    store.zero_grads();
    tape.accumulate_param_grads(&grads, &mut store);
    store
        .iter()
        .map(|(n, t)| (n.to_string(), t.grad().expect("zeroed").to_vec()))
        .collect()
}

fn eval(inputs: &ParameterStore, f: &impl Fn(&mut Tape, &ParameterStore) -> Var) -> f64 {
    let mut tape = Tape::new();
    let out = f(&mut tape, inputs);
    tape.value(out).item()
}

fn coordinate_error(
    work: &mut ParameterStore,
    name: &str,
    i: usize,
    analytic: f64,
    h: f64,
    f: &impl Fn(&mut Tape, &ParameterStore) -> Var,
) -> f64 {
    let orig = work.get(name).expect("known").data()[i];
    work.get_mut(name).expect("known").data_mut()[i] = orig + h;
    let plus = eval(work, f);
    work.get_mut(name).expect("known").data_mut()[i] = orig - h;
    let minus = eval(work, f);
    work.get_mut(name).expect("known").data_mut()[i] = orig;
    let numeric = (plus - minus) / (2.0 * h);
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

/// Maximum over every coordinate of every tensor in `inputs` of
/// `|analytic − numeric| / max(1, |numeric|)`. `f` must build a scalar.
pub fn finite_diff_check(
    inputs: &ParameterStore,
    h: f64,
    f: impl Fn(&mut Tape, &ParameterStore) -> Var,
) -> f64 {
    let grads = analytic(inputs, &f);
    let mut work = inputs.clone();
    let mut worst: f64 = 0.0;
    for (name, g) in &grads {
        for (i, &a) in g.iter().enumerate() {
            worst = worst.max(coordinate_error(&mut work, name, i, a, h, &f));
        }
    }
    worst
}

/// Like [`finite_diff_check`] but over `samples` coordinates drawn
/// uniformly (with a seeded RNG) from all tensors; for large models.
pub fn finite_diff_check_sampled(
    inputs: &ParameterStore,
    h: f64,
    samples: usize,
    seed: u64,
    f: impl Fn(&mut Tape, &ParameterStore) -> Var,
) -> f64 {
    let grads = analytic(inputs, &f);
    let total: usize = grads.iter().map(|(_, g)| g.len()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = inputs.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..samples.min(total) {
        let mut k = rng.gen_range(0..total);
        let (name, g) = grads
            .iter()
            .find(|(_, g)| {
                if k < g.len() {
                    true
                } else {
                    k -= g.len();
                    false
                }
            })
            .expect("k < total");
        worst = worst.max(coordinate_error(&mut work, name, k, g[k], h, &f));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::Tensor;

    fn scalar_store(x: f64) -> ParameterStore {
        let mut s = ParameterStore::new(0);
        s.insert("x", Tensor::scalar(x));
        s
    }

    #[test]
    fn square_at_three() {
        let err = finite_diff_check(&scalar_store(3.0), DEFAULT_STEP, |t, s| {
            let x = t.param(s, "x");
            t.mul(x, x)
        });
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn constant_function() {
        let err = finite_diff_check(&scalar_store(3.0), DEFAULT_STEP, |t, _| {
            t.constant(Tensor::scalar(4.0))
        });
        assert_eq!(err, 0.0);
    }

    #[test]
    fn softmax_cross_entropy_composite() {
        let mut s = ParameterStore::new(11);
        s.add_uniform("logits", vec![3, 5], 2.0);
        let err = finite_diff_check(&s, DEFAULT_STEP, |t, s| {
            let z = t.param(s, "logits");
            let lp = t.log_softmax(z);
            t.nll(lp, &[Some(1), None, Some(4)])
        });
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn detects_a_wrong_gradient() {
        // sigmoid(x)·x evaluated through a deliberately detached copy of x.
        let err = finite_diff_check(&scalar_store(0.7), DEFAULT_STEP, |t, s| {
            let x = t.param(s, "x");
            let detached = t.constant(t.value(x).clone());
            let sx = t.sigmoid(x);
            t.mul(sx, detached)
        });
        assert!(err > 1e-2, "{err}");
    }
}
