//! Single-layer Elman network over the lag window with a linear skip path.
//!
//! The readout (hidden state, raw window and bias) starts from a ridge solve
//! on the initial hidden states, then every parameter is refined with
//! full-batch gradient descent through time.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{solve_normal_equations, Standardizer};
use crate::error::{Error, Result};
use crate::forecasting::TrainingSet;

pub const HIDDEN: usize = 16;
pub const EPOCHS: usize = 30;
pub const LEARNING_RATE: f64 = 0.01;
const READOUT_RIDGE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentParams {
    pub w_in: Vec<f64>,
    /// `HIDDEN x HIDDEN`, row-major; row `i` feeds unit `i`.
    pub w_hh: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_out: Vec<f64>,
    pub w_skip: Vec<f64>,
    pub b_out: f64,
}

impl RecurrentParams {
    fn hidden(&self) -> usize {
        self.b_h.len()
    }

    /// Hidden states `h_1..h_T` for a standardized window, written into `states`.
    fn forward_states(&self, z: &[f64], states: &mut [f64]) {
        let h = self.hidden();
        let mut prev = vec![0.0; h];
        for (t, &zt) in z.iter().enumerate() {
            let cur = &mut states[t * h..(t + 1) * h];
            for i in 0..h {
                let row = &self.w_hh[i * h..(i + 1) * h];
                let a = self.w_in[i] * zt
                    + self.b_h[i]
                    + row.iter().zip(&prev).map(|(w, p)| w * p).sum::<f64>();
                cur[i] = a.tanh();
            }
            prev.copy_from_slice(cur);
        }
    }

    fn readout(&self, last: &[f64], z: &[f64]) -> f64 {
        self.b_out
            + self.w_out.iter().zip(last).map(|(a, b)| a * b).sum::<f64>()
            + self.w_skip.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict_standardized(&self, z: &[f64]) -> f64 {
        let h = self.hidden();
        let mut states = vec![0.0; h * z.len()];
        self.forward_states(z, &mut states);
        self.readout(&states[(z.len() - 1) * h..], z)
    }
}

#[derive(Default)]
struct Gradients {
    w_in: Vec<f64>,
    w_hh: Vec<f64>,
    b_h: Vec<f64>,
    w_out: Vec<f64>,
    w_skip: Vec<f64>,
    b_out: f64,
}

impl Gradients {
    fn zeros(h: usize, lag: usize) -> Self {
        Self {
            w_in: vec![0.0; h],
            w_hh: vec![0.0; h * h],
            b_h: vec![0.0; h],
            w_out: vec![0.0; h],
            w_skip: vec![0.0; lag],
            b_out: 0.0,
        }
    }
}

/// Mean squared error (halved) and its gradient over the whole set.
fn loss_and_gradients(p: &RecurrentParams, zs: &[f64], ys: &[f64], lag: usize) -> (f64, Gradients) {
    let h = p.hidden();
    let n = ys.len();
    let mut g = Gradients::zeros(h, lag);
    let mut loss = 0.0;
    let mut states = vec![0.0; h * lag];
    let mut dh = vec![0.0; h];
    let mut da = vec![0.0; h];
    for (k, &y) in ys.iter().enumerate() {
        let z = &zs[k * lag..(k + 1) * lag];
        p.forward_states(z, &mut states);
        let last = &states[(lag - 1) * h..];
        let err = p.readout(last, z) - y;
        loss += 0.5 * err * err;
        let e = err / n as f64;

        g.b_out += e;
        for i in 0..h {
            g.w_out[i] += e * last[i];
            dh[i] = e * p.w_out[i];
        }
        for (gs, zj) in g.w_skip.iter_mut().zip(z) {
            *gs += e * zj;
        }
        for t in (0..lag).rev() {
            let cur = &states[t * h..(t + 1) * h];
            for i in 0..h {
                da[i] = dh[i] * (1.0 - cur[i] * cur[i]);
                g.w_in[i] += da[i] * z[t];
                g.b_h[i] += da[i];
            }
            if t > 0 {
                let prev = &states[(t - 1) * h..t * h];
                for i in 0..h {
                    for j in 0..h {
                        g.w_hh[i * h + j] += da[i] * prev[j];
                    }
                }
                for j in 0..h {
                    dh[j] = (0..h).map(|i| p.w_hh[i * h + j] * da[i]).sum();
                }
            }
        }
    }
    (loss / n as f64, g)
}

fn step(values: &mut [f64], grads: &[f64], lr: f64) {
    for (v, g) in values.iter_mut().zip(grads) {
        *v -= lr * g;
    }
}

fn fit_readout(p: &mut RecurrentParams, zs: &[f64], ys: &[f64], lag: usize) -> Result<()> {
    let h = p.hidden();
    let n = ys.len();
    let dim = h + lag + 1;
    let mut states = vec![0.0; h * lag];
    let mut design = DMatrix::zeros(n, dim);
    for k in 0..n {
        let z = &zs[k * lag..(k + 1) * lag];
        p.forward_states(z, &mut states);
        let last = &states[(lag - 1) * h..];
        for i in 0..h {
            design[(k, i)] = last[i];
        }
        for j in 0..lag {
            design[(k, h + j)] = z[j];
        }
        design[(k, dim - 1)] = 1.0;
    }
    let y = DVector::from_column_slice(ys);
    let gram = design.transpose() * &design;
    let rhs = design.transpose() * y;
    let w = solve_normal_equations(&gram, &rhs, READOUT_RIDGE)
        .ok_or_else(|| Error::Numerical("recurrent readout system".into()))?;
    p.w_out = w.rows(0, h).iter().copied().collect();
    p.w_skip = w.rows(h, lag).iter().copied().collect();
    p.b_out = w[dim - 1];
    Ok(())
}

pub(crate) fn fit(
    set: &TrainingSet,
    scaler: &Standardizer,
    target: &Standardizer,
    seed: u64,
) -> Result<RecurrentParams> {
    let lag = set.lag();
    let h = HIDDEN;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_init = Normal::new(0.0, 1.0).expect("valid normal");
    let recur_init = Normal::new(0.0, 0.5 / (h as f64).sqrt()).expect("valid normal");
    let bias_init = Normal::new(0.0, 0.1).expect("valid normal");

    let mut p = RecurrentParams {
        w_in: (0..h).map(|_| input_init.sample(&mut rng)).collect(),
        w_hh: (0..h * h).map(|_| recur_init.sample(&mut rng)).collect(),
        b_h: (0..h).map(|_| bias_init.sample(&mut rng)).collect(),
        w_out: vec![0.0; h],
        w_skip: vec![0.0; lag],
        b_out: 0.0,
    };

    let zs: Vec<f64> = set.flat_inputs().iter().map(|&x| scaler.apply(x)).collect();
    let ys: Vec<f64> = set.targets().iter().map(|&y| target.apply(y)).collect();

    fit_readout(&mut p, &zs, &ys, lag)?;

    for _ in 0..EPOCHS {
        let (loss, g) = loss_and_gradients(&p, &zs, &ys, lag);
        if !loss.is_finite() {
            return Err(Error::Numerical("non-finite recurrent training loss".into()));
        }
        step(&mut p.w_in, &g.w_in, LEARNING_RATE);
        step(&mut p.w_hh, &g.w_hh, LEARNING_RATE);
        step(&mut p.b_h, &g.b_h, LEARNING_RATE);
        step(&mut p.w_out, &g.w_out, LEARNING_RATE);
        step(&mut p.w_skip, &g.w_skip, LEARNING_RATE);
        p.b_out -= LEARNING_RATE * g.b_out;
    }
    let (loss, _) = loss_and_gradients(&p, &zs, &ys, lag);
    if !loss.is_finite() {
        return Err(Error::Numerical("non-finite recurrent training loss".into()));
    }
    Ok(p)
}
