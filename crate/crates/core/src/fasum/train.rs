use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neuro::{adam_step, precision, with_precision, OptimizerState, ParamGrads, ParameterStore, Tape};

use super::model::{Example, FasumModel};

/// Learning rate at `step` (0-based) of `total`: linear warmup over the
/// first `fraction` of steps followed by linear decay, or constant when
/// `fraction` is 0.
pub fn scheduled_lr(base: f64, fraction: f64, step: usize, total: usize) -> f64 {
    if fraction <= 0.0 || total == 0 {
        return base;
    }
    let warm = ((fraction * total as f64).ceil() as usize).max(1);
    if step < warm {
        base * (step + 1) as f64 / warm as f64
    } else {
        let rest = (total - warm).max(1) as f64;
        base * ((total - step) as f64 / rest).min(1.0)
    }
}

/// Mean loss and gradients of a batch. Examples run in parallel on their
/// own tapes; gradients are summed in batch order.
pub fn batch_gradients(
    model: &FasumModel,
    batch: &[&Example],
    dropout_seed: u64,
) -> Result<(f64, ParamGrads)> {
    let prec = precision();
    let parts: Vec<Result<(f64, ParamGrads)>> = batch
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            with_precision(prec, || {
                let mut tape = Tape::training(dropout_seed.wrapping_add(i as u64));
                let loss = model.loss(&mut tape, ex)?;
                let grads = tape.backward(loss);
                Ok((tape.value(loss).item(), tape.param_grads(&grads)))
            })
        })
        .collect();
    sum_parts(parts, batch.len())
}

pub(crate) fn sum_parts(parts: Vec<Result<(f64, ParamGrads)>>, n: usize) -> Result<(f64, ParamGrads)> {
    let scale = 1.0 / n.max(1) as f64;
    let mut total = 0.0;
    let mut summed: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for part in parts {
        let (loss, grads) = part?;
        total += loss;
        for (name, g) in grads {
            let dst = summed.entry(name).or_insert_with(|| vec![0.0; g.len()]);
            for (d, v) in dst.iter_mut().zip(&g) {
                *d += v * scale;
            }
        }
    }
    Ok((total * scale, summed.into_iter().collect()))
}

/// Per-epoch validation callback returning a score to maximize.
pub type ValidationHook<'a> = &'a mut dyn FnMut(&EpochInfo) -> Result<f64>;

/// Epoch-level progress handed to the validation hook.
pub struct EpochInfo<'a> {
    pub epoch: usize,
    pub model: &'a FasumModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters with the best validation score, or the final ones when
    /// validation never ran.
    pub best: ParameterStore,
    pub last: ParameterStore,
    /// Mean training loss per completed epoch.
    pub loss_curve: Vec<f64>,
    /// `(epoch, score)` for every validation run, epochs counted from 1.
    pub validation: Vec<(usize, f64)>,
    pub best_epoch: Option<usize>,
}

/// Trains `model` in place with Adam on seeded shuffles of `data`.
///
/// Every `validate_every` epochs `validate` scores the current parameters
/// (higher is better); the best-scoring parameters are kept. Training ends
/// early once a validation score reaches 1.0, which no later epoch can
/// beat.
pub fn train(
    model: &mut FasumModel,
    data: &[Example],
    mut validate: Option<ValidationHook>,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cfg = model.config.clone();
    cfg.validate()?;
    let batches_per_epoch = data.len().div_ceil(cfg.batch_size);
    let total_steps = batches_per_epoch * cfg.epochs;
    let mut opt = OptimizerState::adam(cfg.lr);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut outcome = TrainOutcome {
        best: model.params.clone(),
        last: model.params.clone(),
        loss_curve: Vec::new(),
        validation: Vec::new(),
        best_epoch: None,
    };
    let mut best_score = f64::NEG_INFINITY;
    let mut step = 0usize;
    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &data[i]).collect();
            let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(step as u64 * 7919);
            let (loss, grads) = batch_gradients(model, &batch, seed)?;
            epoch_loss += loss * batch.len() as f64;
            model.params.zero_grads();
            for (name, g) in &grads {
                model.params.accumulate_grad(name, g);
            }
            opt.lr = scheduled_lr(cfg.lr, cfg.warmup_fraction, step, total_steps);
            adam_step(&mut model.params, &mut opt)?;
            step += 1;
        }
        outcome.loss_curve.push(epoch_loss / data.len() as f64);
        if cfg.validate_every > 0 && epoch % cfg.validate_every == 0 {
            if let Some(v) = validate.as_deref_mut() {
                let score = v(&EpochInfo { epoch, model })?;
                outcome.validation.push((epoch, score));
                if score > best_score {
                    best_score = score;
                    outcome.best = model.params.clone();
                    outcome.best_epoch = Some(epoch);
                }
                if score >= 1.0 {
                    break;
                }
            }
        }
    }
    outcome.last = model.params.clone();
    if outcome.best_epoch.is_none() {
        outcome.best = model.params.clone();
    }
    Ok(outcome)
}
