//! Per-timestep denoising MLP imputer.
//!
//! Input is the zero-filled feature vector concatenated with its visibility
//! bits (length 2F); two ReLU hidden layers; linear output of F values.
//! Training minimises squared error over visible cells, a random share of
//! which (`hide_ratio`) is hidden from the input in every batch so the
//! network learns to reconstruct what it cannot see. Adam, mini-batches,
//! early stopping on validation MAE of held-out cells.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::params::Params;
use super::{FittedModel, Imputer, ImputerSpec};
use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::{rng_from, Rng};

const STREAM_INIT: u64 = 1;
const STREAM_VAL_SPLIT: u64 = 2;
const STREAM_VAL_HIDE: u64 = 3;
const STREAM_EPOCH: u64 = 4;

/// Fully connected network with ReLU hidden layers and a linear output.
/// Parameters live in one flat vector: per layer, the `out x in` weight
/// matrix (row-major) followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    sizes: Vec<usize>,
    params: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    /// He-uniform weights, zero biases.
    pub fn new(sizes: &[usize], rng: &mut Rng) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0));
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let bound = (6.0 / n_in as f64).sqrt();
            params.extend((0..n_in * n_out).map(|_| T::lit(rng.random_range(-bound..bound))));
            params.extend(std::iter::repeat_n(T::zero(), n_out));
        }
        Mlp {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Offset of layer `l`'s weights; its bias follows at `+ in * out`.
    fn offset(&self, layer: usize) -> usize {
        self.sizes
            .windows(2)
            .take(layer)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Activations of every layer, input first.
    fn forward_all(&self, x: &[T]) -> Vec<Vec<T>> {
        let mut acts = vec![x.to_vec()];
        for l in 0..self.n_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offset(l);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let prev = &acts[l];
            let hidden = l + 1 < self.n_layers();
            let out: Vec<T> = (0..n_out)
                .map(|j| {
                    let z = w[j * n_in..(j + 1) * n_in]
                        .iter()
                        .zip(prev)
                        .fold(b[j], |acc, (&wij, &xi)| acc + wij * xi);
                    if hidden {
                        z.max(T::zero())
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        self.forward_all(x).pop().unwrap()
    }

    /// Mean squared error over the cells flagged in `target_mask`, and its
    /// gradient with respect to every parameter. Samples are accumulated in
    /// order.
    pub fn loss_and_grad(&self, inputs: &[T], targets: &[T], target_mask: &[bool]) -> (T, Vec<T>) {
        let n_in = self.sizes[0];
        let n_out = *self.sizes.last().unwrap();
        let batch = inputs.len() / n_in;
        let count = target_mask.iter().filter(|&&b| b).count();
        let mut grad = vec![T::zero(); self.params.len()];
        if count == 0 {
            return (T::zero(), grad);
        }
        let scale = T::from_count(count).recip();
        let two = T::lit(2.0);
        let mut loss = T::zero();
        for s in 0..batch {
            let acts = self.forward_all(&inputs[s * n_in..(s + 1) * n_in]);
            let out = acts.last().unwrap();
            let mut delta: Vec<T> = (0..n_out)
                .map(|j| {
                    let k = s * n_out + j;
                    if target_mask[k] {
                        let e = out[j] - targets[k];
                        loss = loss + e * e;
                        two * e * scale
                    } else {
                        T::zero()
                    }
                })
                .collect();
            for l in (0..self.n_layers()).rev() {
                let (li, lo) = (self.sizes[l], self.sizes[l + 1]);
                let off = self.offset(l);
                let prev = &acts[l];
                for j in 0..lo {
                    if delta[j] == T::zero() {
                        continue;
                    }
                    for i in 0..li {
                        grad[off + j * li + i] = grad[off + j * li + i] + delta[j] * prev[i];
                    }
                    grad[off + li * lo + j] = grad[off + li * lo + j] + delta[j];
                }
                if l > 0 {
                    let w = &self.params[off..off + li * lo];
                    delta = (0..li)
                        .map(|i| {
                            if prev[i] > T::zero() {
                                (0..lo).fold(T::zero(), |acc, j| acc + w[j * li + i] * delta[j])
                            } else {
                                T::zero()
                            }
                        })
                        .collect();
                }
            }
        }
        (loss * scale, grad)
    }
}

/// Adaptive moment estimation.
#[derive(Debug, Clone)]
struct Adam<T> {
    lr: T,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    fn new(n: usize, lr: T) -> Self {
        Adam {
            lr,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [T], grad: &[T]) {
        let (b1, b2, eps) = (T::lit(0.9), T::lit(0.999), T::lit(1e-8));
        self.t += 1;
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * grad[i];
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] = params[i] - self.lr * mh / (vh.sqrt() + eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpImputer {
    pub hidden_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub hide_ratio: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for MlpImputer {
    fn default() -> Self {
        MlpImputer {
            hidden_width: 64,
            epochs: 100,
            batch_size: 256,
            learning_rate: 1e-3,
            patience: 10,
            hide_ratio: 0.1,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

/// One mini-batch: network inputs, reconstruction targets and target flags.
pub(crate) struct Batch<T> {
    pub inputs: Vec<T>,
    pub targets: Vec<T>,
    pub target_mask: Vec<bool>,
    /// Cells that were visible but withheld from the input.
    pub hidden: Vec<bool>,
}

/// Builds a batch from frame rows. Each visible cell is withheld from the
/// input with probability `hide_ratio`; all visible cells are targets.
pub(crate) fn build_batch<T: Scalar>(
    frame: &VitalsFrame<T>,
    rows: &[usize],
    hide_ratio: f64,
    rng: &mut Rng,
) -> Batch<T> {
    let nf = frame.n_features();
    let mut b = Batch {
        inputs: Vec::with_capacity(rows.len() * 2 * nf),
        targets: Vec::with_capacity(rows.len() * nf),
        target_mask: Vec::with_capacity(rows.len() * nf),
        hidden: Vec::with_capacity(rows.len() * nf),
    };
    let mut bits = Vec::with_capacity(nf);
    for &r in rows {
        bits.clear();
        for f in 0..nf {
            match frame.get(r, f) {
                Some(v) => {
                    let hide = hide_ratio > 0.0 && rng.random::<f64>() < hide_ratio;
                    b.inputs.push(if hide { T::zero() } else { v });
                    bits.push(if hide { T::zero() } else { T::one() });
                    b.targets.push(v);
                    b.target_mask.push(true);
                    b.hidden.push(hide);
                }
                None => {
                    b.inputs.push(T::zero());
                    bits.push(T::zero());
                    b.targets.push(T::zero());
                    b.target_mask.push(false);
                    b.hidden.push(false);
                }
            }
        }
        b.inputs.extend_from_slice(&bits);
    }
    b
}

fn row_input<T: Scalar>(frame: &VitalsFrame<T>, r: usize, buf: &mut Vec<T>) {
    buf.clear();
    buf.extend(frame.row(r).iter().map(|v| v.unwrap_or(T::zero())));
    buf.extend(frame.row(r).iter().map(|v| if v.is_some() { T::one() } else { T::zero() }));
}

impl MlpImputer {
    pub fn from_spec(spec: &ImputerSpec) -> Result<Self> {
        let d = MlpImputer::default();
        let mut p = Params::new(&spec.name, &spec.params);
        let m = MlpImputer {
            hidden_width: p.usize("hidden_width", d.hidden_width)?,
            epochs: p.usize("epochs", d.epochs)?,
            batch_size: p.usize("batch_size", d.batch_size)?,
            learning_rate: p.f64("learning_rate", d.learning_rate)?,
            patience: p.usize("patience", d.patience)?,
            hide_ratio: p.f64("hide_ratio", d.hide_ratio)?,
            validation_fraction: p.f64("validation_fraction", d.validation_fraction)?,
            seed: spec.seed,
        };
        p.finish()?;
        m.validate().map_err(|message| Error::InvalidParam {
            method: spec.name.clone(),
            message,
        })?;
        Ok(m)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.hidden_width == 0 {
            return Err("hidden_width must be >= 1".into());
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err("epochs and batch_size must be >= 1".into());
        }
        if self.learning_rate <= 0.0 {
            return Err("learning_rate must be > 0".into());
        }
        if !(0.0..1.0).contains(&self.hide_ratio) || !(0.0..1.0).contains(&self.validation_fraction) {
            return Err("hide_ratio and validation_fraction must lie in [0, 1)".into());
        }
        Ok(())
    }

    pub fn fit_model<T: Scalar>(&self, train: &VitalsFrame<T>) -> Result<MlpModel<T>> {
        self.validate().map_err(|message| Error::InvalidParam {
            method: "mlp".into(),
            message,
        })?;
        let nf = train.n_features();
        let obs = train.observation_mask();
        if let Some(f) = (0..nf).find(|&f| obs.count_feature(f) == 0) {
            return Err(Error::EmptyFeature {
                feature: train.features()[f].name.clone(),
            });
        }
        let sizes = [2 * nf, self.hidden_width, self.hidden_width, nf];
        let mut net = Mlp::<T>::new(&sizes, &mut rng_from(self.seed, &[STREAM_INIT]));

        let mut rows: Vec<usize> = (0..train.n_rows())
            .filter(|&r| train.row(r).iter().any(Option::is_some))
            .collect();
        rows.shuffle(&mut rng_from(self.seed, &[STREAM_VAL_SPLIT]));
        let n_val = if rows.len() >= 10 {
            ((rows.len() as f64 * self.validation_fraction).floor() as usize).max(1)
        } else {
            0
        };
        let (val_rows, train_rows) = rows.split_at(n_val);
        let mut train_rows = train_rows.to_vec();
        let val_batch = build_batch(
            train,
            val_rows,
            self.hide_ratio.max(0.1),
            &mut rng_from(self.seed, &[STREAM_VAL_HIDE]),
        );

        let mut adam = Adam::new(net.params.len(), T::lit(self.learning_rate));
        let mut best = (T::infinity(), net.params.clone());
        let mut stale = 0;
        let mut epochs_run = 0;
        for epoch in 0..self.epochs {
            epochs_run = epoch + 1;
            let mut rng = rng_from(self.seed, &[STREAM_EPOCH, epoch as u64]);
            train_rows.shuffle(&mut rng);
            for chunk in train_rows.chunks(self.batch_size) {
                let batch = build_batch(train, chunk, self.hide_ratio, &mut rng);
                let (loss, grad) = net.loss_and_grad(&batch.inputs, &batch.targets, &batch.target_mask);
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        method: "mlp".into(),
                        epoch: epoch + 1,
                    });
                }
                adam.step(&mut net.params, &grad);
            }
            if n_val == 0 {
                continue;
            }
            let mae = validation_mae(&net, &val_batch);
            if !mae.is_finite() {
                return Err(Error::Divergence {
                    method: "mlp".into(),
                    epoch: epoch + 1,
                });
            }
            if mae < best.0 {
                best = (mae, net.params.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale >= self.patience {
                    break;
                }
            }
        }
        if n_val > 0 {
            net.params = best.1;
        }
        Ok(MlpModel {
            net,
            epochs_run,
            best_validation_mae: (n_val > 0).then_some(best.0),
        })
    }
}

/// MAE over the withheld cells of a validation batch (all visible cells when
/// nothing was withheld).
fn validation_mae<T: Scalar>(net: &Mlp<T>, batch: &Batch<T>) -> T {
    let n_in = net.sizes()[0];
    let nf = n_in / 2;
    let use_hidden = batch.hidden.iter().any(|&h| h);
    let mut sum = T::zero();
    let mut n = 0usize;
    for (s, x) in batch.inputs.chunks_exact(n_in).enumerate() {
        let out = net.forward(x);
        for f in 0..nf {
            let k = s * nf + f;
            let scored = if use_hidden { batch.hidden[k] } else { batch.target_mask[k] };
            if scored {
                sum = sum + (out[f] - batch.targets[k]).abs();
                n += 1;
            }
        }
    }
    if n == 0 {
        T::zero()
    } else {
        sum / T::from_count(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    pub net: Mlp<T>,
    pub epochs_run: usize,
    pub best_validation_mae: Option<T>,
}

impl<T: Scalar> Imputer<T> for MlpImputer {
    fn fit(&self, train: &VitalsFrame<T>) -> Result<Box<dyn FittedModel<T>>> {
        Ok(Box::new(self.fit_model(train)?))
    }
}

impl<T: Scalar> FittedModel<T> for MlpModel<T> {
    fn complete(&self, frame: &VitalsFrame<T>) -> Result<Vec<T>> {
        let nf = frame.n_features();
        if self.net.sizes()[0] != 2 * nf {
            return Err(Error::Shape("network input width does not match frame".into()));
        }
        let mut out = frame.to_dense(T::zero());
        let mut buf = Vec::with_capacity(2 * nf);
        for r in 0..frame.n_rows() {
            if frame.row(r).iter().all(Option::is_some) {
                continue;
            }
            row_input(frame, r, &mut buf);
            let pred = self.net.forward(&buf);
            for f in 0..nf {
                if frame.get(r, f).is_none() {
                    out[r * nf + f] = pred[f];
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Feature;
    use rand::SeedableRng;

    #[test]
    fn zero_hidden_width_rejected() {
        let spec = ImputerSpec::new("mlp").with_param("hidden_width", 0);
        assert!(matches!(MlpImputer::from_spec(&spec), Err(Error::InvalidParam { .. })));
    }

    #[test]
    fn loss_without_hideout_is_plain_mse() {
        let mut vals = Vec::new();
        for i in 0..8 {
            for f in 0..3 {
                vals.push(Some((i as f64 * 0.3 - f as f64 * 0.7).sin()));
            }
        }
        let frame = VitalsFrame::from_dense(
            1,
            8,
            vec![Feature::new("a", ""), Feature::new("b", ""), Feature::new("c", "")],
            vals,
            None,
        )
        .unwrap();
        let net = Mlp::<f64>::new(&[6, 5, 5, 3], &mut Rng::seed_from_u64(3));
        let rows: Vec<usize> = (0..8).collect();
        let batch = build_batch(&frame, &rows, 0.0, &mut Rng::seed_from_u64(0));
        assert!(batch.hidden.iter().all(|&h| !h));
        let (loss, _) = net.loss_and_grad(&batch.inputs, &batch.targets, &batch.target_mask);
        let mut mse = 0.0;
        for r in 0..8 {
            let x: Vec<f64> = frame
                .row(r)
                .iter()
                .map(|v| v.unwrap())
                .chain([1.0; 3])
                .collect();
            let out = net.forward(&x);
            for f in 0..3 {
                mse += (out[f] - frame.get(r, f).unwrap()).powi(2);
            }
        }
        mse /= 24.0;
        assert!((loss - mse).abs() < 1e-12);
    }

    #[test]
    fn training_reduces_reconstruction_error() {
        let (frame, _) = crate::dataset::generate_synthetic::<f64>(20, 24, 2, &[0.2; 6]).unwrap();
        let stats = crate::dataset::fit_normalizer(&frame, &frame.observation_mask(), &(0..20).collect::<Vec<_>>()).unwrap();
        let z = stats.apply(&frame).unwrap();
        let imp = MlpImputer { epochs: 30, ..Default::default() };
        let model = imp.fit_model(&z).unwrap();
        assert!(model.best_validation_mae.unwrap() < 0.8);
        assert!(model.epochs_run >= 1);
    }
}
