use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{loss_rel_l2_grad, AdamState, Model};
use crate::{Error, Result};

/// One encoded training pair: normalized input, physical target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Random access to training pairs, so large sets can be encoded lazily.
pub trait SampleSource {
    fn len(&self) -> usize;
    fn sample(&self, index: usize) -> Result<Sample>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SampleSource for [Sample] {
    fn len(&self) -> usize {
        <[Sample]>::len(self)
    }

    fn sample(&self, index: usize) -> Result<Sample> {
        Ok(self[index].clone())
    }
}

impl SampleSource for Vec<Sample> {
    fn len(&self) -> usize {
        <[Sample]>::len(self)
    }

    fn sample(&self, index: usize) -> Result<Sample> {
        Ok(self[index].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 1e-3,
            batch_size: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Parameters at the end of the epoch with the lowest mean loss (the
    /// initial model when no epoch finished).
    pub model: Model,
    /// Mean training loss per completed epoch.
    pub history: Vec<f64>,
    pub best_epoch: Option<usize>,
    pub steps: u64,
    /// Samples seen with an all-zero target, scored by absolute norm.
    pub zero_reference_samples: usize,
    /// Set when training stopped on a non-finite loss or gradient.
    pub aborted: Option<String>,
}

/// Mini-batch Adam on the mean relative L2 loss. Batches come from a
/// seeded shuffle; per-sample gradients are summed in batch order.
pub fn train(
    mut model: Model,
    data: &dyn SampleSource,
    opts: &TrainOptions,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if opts.batch_size == 0 || !(opts.lr > 0.0) {
        return Err(Error::InvalidArgument("batch size and learning rate must be positive".into()));
    }
    let total = model.layout().total;
    let mut adam = AdamState::new(total, opts.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut best = model.clone();
    let mut best_loss = f64::INFINITY;
    let mut report = TrainReport {
        model: model.clone(),
        history: Vec::with_capacity(opts.epochs),
        best_epoch: None,
        steps: 0,
        zero_reference_samples: 0,
        aborted: None,
    };
    let mut grad = vec![0.0; total];
    'epochs: for epoch in 0..opts.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(opts.batch_size) {
            grad.fill(0.0);
            let mut batch_loss = 0.0;
            for &i in batch {
                let s = data.sample(i)?;
                let trace = model.forward_trace(&s.input)?;
                let (loss, g) = loss_rel_l2_grad(&trace.output, &s.target)?;
                if loss.zero_reference {
                    report.zero_reference_samples += 1;
                }
                batch_loss += loss.value;
                model.backward(&trace, &g, &mut grad)?;
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                report.aborted = Some(format!(
                    "non-finite loss or gradient at epoch {} step {}",
                    epoch + 1,
                    report.steps + 1
                ));
                break 'epochs;
            }
            adam.step(model.params_mut(), &grad)?;
            report.steps += 1;
            loss_sum += batch_loss;
        }
        let mean = loss_sum / data.len() as f64;
        report.history.push(mean);
        on_epoch(epoch, mean);
        if mean < best_loss {
            best_loss = mean;
            best = model.clone();
            report.best_epoch = Some(epoch);
        }
    }
    report.model = best;
    Ok(report)
}
