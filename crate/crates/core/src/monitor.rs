//! Interval metrics: accuracy, normalized energy, the weighted performance
//! score with its EMA, and the KL drift statistic over binned true values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::{Observation, SustainabilityGoals};

/// Per-bin additive smoothing applied before renormalization.
pub const SMOOTHING: f64 = 1e-6;

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    assert_eq!(y_true.len(), y_pred.len(), "length mismatch");
    assert!(!y_true.is_empty(), "empty input");
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Degenerate);
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mean_squared_error(y_true: &[f64], y_pred: &[f64]) -> f64 {
    assert_eq!(y_true.len(), y_pred.len(), "length mismatch");
    if y_true.is_empty() {
        return 0.0;
    }
    y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum::<f64>()
        / y_true.len() as f64
}

/// `beta * a + (1 - beta) * (1 - e_bar)`. Callers clamp `e_bar` into `[0, 1]` first.
pub fn performance_score(accuracy: f64, e_bar: f64, beta: f64) -> f64 {
    beta * accuracy + (1.0 - beta) * (1.0 - e_bar)
}

/// One EMA step. With no previous value the EMA starts at the score itself.
pub fn update_ema(prev: Option<f64>, score: f64, gamma: f64) -> f64 {
    match prev {
        Some(prev) => gamma * score + (1.0 - gamma) * prev,
        None => score,
    }
}

/// Equal-width bin boundaries over a fixed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEdges(Vec<f64>);

impl HistogramEdges {
    /// `bins` equal-width bins over `[lo, hi]`. A degenerate range is widened to unit width.
    pub fn equal_width(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins >= 1, "need at least one bin");
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
        edges.push(hi);
        Self(edges)
    }

    /// Edges spanning the min/max of `values`.
    pub fn from_range(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::equal_width(lo, hi, bins)
    }

    pub fn bins(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Bin index of `v`; values outside the range land in the end bins.
    pub fn bin_of(&self, v: f64) -> usize {
        let lo = self.0[0];
        let hi = self.0[self.0.len() - 1];
        let bins = self.bins();
        let k = ((v - lo) / (hi - lo) * bins as f64).floor();
        if k.is_nan() || k < 0.0 {
            0
        } else {
            (k as usize).min(bins - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: HistogramEdges,
    pub probs: Vec<f64>,
}

impl Histogram {
    /// Wraps explicit probabilities; they must be positive and match the bin count.
    pub fn from_probs(edges: HistogramEdges, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != edges.bins() {
            return Err(Error::BinMismatch);
        }
        if probs.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Numerical("histogram probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        Ok(Self {
            edges,
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.probs.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    pub fn bins(&self) -> usize {
        self.probs.len()
    }
}

/// Counts `values` into `edges`, smooths every bin by [`SMOOTHING`] and renormalizes.
pub fn estimate_histogram(values: &[f64], edges: &HistogramEdges) -> Histogram {
    let bins = edges.bins();
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[edges.bin_of(v)] += 1;
    }
    let n = values.len().max(1) as f64;
    let raw: Vec<f64> = counts.iter().map(|&c| c as f64 / n + SMOOTHING).collect();
    let total: f64 = raw.iter().sum();
    Histogram {
        edges: edges.clone(),
        probs: raw.into_iter().map(|p| p / total).collect(),
    }
}

/// `KL(p ‖ q)` in nats.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.edges != q.edges || p.probs.len() != q.probs.len() {
        return Err(Error::BinMismatch);
    }
    let d: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(&pk, &qk)| if pk > 0.0 { pk * (pk / qk).ln() } else { 0.0 })
        .sum();
    // rounding can leave a tiny negative residue for p == q
    Ok(d.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMetrics {
    pub interval: usize,
    /// Accuracy clamped into `[0, 1]`.
    pub a_i: f64,
    pub raw_r2: f64,
    pub e_i: f64,
    /// Unclamped normalized energy.
    pub e_bar_i: f64,
    pub s_i: f64,
    pub ema_s_i: f64,
    pub d_i: f64,
    /// Set when accuracy could not be computed and the previous value was reused.
    pub carried_forward: bool,
}

/// Everything the monitor needs to score one interval.
#[derive(Debug, Clone, Copy)]
pub struct IntervalInput<'a> {
    pub interval: usize,
    /// Observations received since the previous interval.
    pub records: &'a [Observation],
    /// Trailing window of true values used for the drift statistic.
    pub recent_truth: &'a [f64],
    /// Training distribution of the deployed model.
    pub reference: &'a Histogram,
    pub e_max_train: f64,
    pub prev_accuracy: Option<f64>,
    pub prev_raw_r2: Option<f64>,
    pub prev_ema: Option<f64>,
}

pub fn aggregate_interval(
    input: &IntervalInput<'_>,
    goals: &SustainabilityGoals,
) -> Result<IntervalMetrics> {
    let y_true: Vec<f64> = input.records.iter().map(|r| r.y_true).collect();
    let y_pred: Vec<f64> = input.records.iter().map(|r| r.y_pred).collect();

    let accuracy = if y_true.len() >= 2 {
        match r_squared(&y_true, &y_pred) {
            Ok(r2) => Some(r2),
            Err(Error::Degenerate) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let (raw_r2, a_i, carried_forward) = match accuracy {
        Some(r2) => (r2, r2.clamp(0.0, 1.0), false),
        None => {
            let a = input.prev_accuracy.unwrap_or(0.0);
            (input.prev_raw_r2.unwrap_or(a), a, true)
        }
    };

    let e_i: f64 = input.records.iter().fold(0.0, |acc, r| acc + r.energy);
    let e_bar_i = if input.e_max_train > 0.0 {
        e_i / input.e_max_train
    } else {
        0.0
    };
    let s_i = performance_score(a_i, e_bar_i.clamp(0.0, 1.0), goals.beta);
    let ema_s_i = update_ema(input.prev_ema, s_i, goals.gamma);

    let d_i = if input.recent_truth.is_empty() {
        0.0
    } else {
        let current = estimate_histogram(input.recent_truth, &input.reference.edges);
        kl_divergence(&current, input.reference)?
    };

    Ok(IntervalMetrics {
        interval: input.interval,
        a_i,
        raw_r2,
        e_i,
        e_bar_i,
        s_i,
        ema_s_i,
        d_i,
        carried_forward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn r2_examples() {
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        // SS_res = 0.01 + 0.01 + 0.04 = 0.06, SS_tot = 2
        let r2 = r_squared(&[1.0, 2.0, 3.0], &[1.1, 1.9, 3.2]).unwrap();
        assert_abs_diff_eq!(r2, 0.97, epsilon = 1e-12);
    }

    #[test]
    fn r2_degenerate() {
        assert!(matches!(
            r_squared(&[4.0, 4.0], &[4.0, 3.0]),
            Err(Error::Degenerate)
        ));
    }

    #[test]
    fn score_examples() {
        assert_abs_diff_eq!(performance_score(0.9, 0.3, 0.5), 0.80, epsilon = 1e-12);
        assert_abs_diff_eq!(performance_score(0.7, 0.42, 1.0), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(performance_score(0.123, 0.0, 0.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ema_examples() {
        assert_abs_diff_eq!(update_ema(Some(0.5), 0.9, 0.3), 0.62, epsilon = 1e-12);
        assert_eq!(update_ema(Some(0.1), 0.77, 1.0), 0.77);
        assert_eq!(update_ema(None, 0.4, 0.3), 0.4);
        let mut ema = 0.35;
        for _ in 0..50 {
            ema = update_ema(Some(ema), 0.35, 0.3);
        }
        assert_abs_diff_eq!(ema, 0.35, epsilon = 1e-15);
    }

    #[test]
    fn histogram_single_bin_mass() {
        let edges = HistogramEdges::equal_width(0.0, 4.0, 4);
        let h = estimate_histogram(&[3.2, 3.5, 3.9], &edges);
        assert!(h.is_normalized(1e-12));
        assert!(h.probs[3] > 0.999_99);
        assert!(h.probs[..3].iter().all(|&p| p > 0.0 && p < 1e-5));
    }

    #[test]
    fn out_of_range_values_clamp() {
        let edges = HistogramEdges::equal_width(0.0, 4.0, 4);
        let h = estimate_histogram(&[100.0], &edges);
        assert!(h.probs[3] > 0.999_99);
        let h = estimate_histogram(&[-3.0], &edges);
        assert!(h.probs[0] > 0.999_99);
    }

    #[test]
    fn uniform_samples_approach_equal_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..200_000).map(|_| rng.random_range(0.0..1.0)).collect();
        let edges = HistogramEdges::equal_width(0.0, 1.0, 20);
        let h = estimate_histogram(&values, &edges);
        // direct counting oracle
        let mut counts = [0usize; 20];
        for v in &values {
            counts[((v * 20.0) as usize).min(19)] += 1;
        }
        for (k, p) in h.probs.iter().enumerate() {
            assert_abs_diff_eq!(*p, counts[k] as f64 / values.len() as f64, epsilon = 1e-5);
            assert_abs_diff_eq!(*p, 0.05, epsilon = 0.003);
        }
    }

    fn two_bin(p0: f64) -> Histogram {
        Histogram::from_probs(HistogramEdges::equal_width(0.0, 2.0, 2), vec![p0, 1.0 - p0]).unwrap()
    }

    #[test]
    fn kl_examples() {
        let p = two_bin(0.5);
        let q = two_bin(0.25);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let oracle = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(kl_divergence(&p, &q).unwrap(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(kl_divergence(&p, &q).unwrap(), 0.1438, epsilon = 5e-5);
        assert_abs_diff_eq!(kl_divergence(&q, &p).unwrap(), 0.1308, epsilon = 5e-5);
    }

    #[test]
    fn kl_bin_mismatch() {
        let p = two_bin(0.5);
        let q = Histogram::from_probs(HistogramEdges::equal_width(0.0, 3.0, 2), vec![0.5, 0.5])
            .unwrap();
        assert!(matches!(kl_divergence(&p, &q), Err(Error::BinMismatch)));
    }

    fn obs(t: usize, y: f64, p: f64, e: f64) -> Observation {
        Observation {
            timestep: t,
            y_true: y,
            y_pred: p,
            model_id: "linear".into(),
            energy: e,
        }
    }

    #[test]
    fn aggregate_perfect_interval() {
        let goals = SustainabilityGoals::default();
        let records: Vec<Observation> = (0..100)
            .map(|t| obs(t, (t as f64 * 0.1).sin() * 50.0 + 100.0, (t as f64 * 0.1).sin() * 50.0 + 100.0, 1.0))
            .collect();
        let truth: Vec<f64> = records.iter().map(|r| r.y_true).collect();
        let reference = estimate_histogram(&truth, &HistogramEdges::from_range(&truth, 20));
        let m = aggregate_interval(
            &IntervalInput {
                interval: 0,
                records: &records,
                recent_truth: &truth,
                reference: &reference,
                e_max_train: 150.0,
                prev_accuracy: None,
                prev_raw_r2: None,
                prev_ema: None,
            },
            &goals,
        )
        .unwrap();
        assert_eq!(m.a_i, 1.0);
        assert_eq!(m.e_i, 100.0);
        assert_abs_diff_eq!(m.e_bar_i, 100.0 / 150.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.e_bar_i, 0.667, epsilon = 5e-4);
        assert_eq!(m.d_i, 0.0);
        // first interval: EMA equals the score
        assert_eq!(m.ema_s_i, m.s_i);
    }

    #[test]
    fn aggregate_clamps_negative_r2() {
        let goals = SustainabilityGoals::default();
        // y = [0, 1, 2, 3, 4], SS_tot = 10; predictions chosen so SS_res = 14
        let y = [0.0, 1.0, 2.0, 3.0, 4.0];
        let p = [0.0, 1.0, 2.0, 3.0, 4.0 + 14f64.sqrt()];
        let records: Vec<Observation> = (0..5).map(|t| obs(t, y[t], p[t], 1.0)).collect();
        let reference = estimate_histogram(&y, &HistogramEdges::from_range(&y, 4));
        let m = aggregate_interval(
            &IntervalInput {
                interval: 3,
                records: &records,
                recent_truth: &[],
                reference: &reference,
                e_max_train: 10.0,
                prev_accuracy: Some(0.5),
                prev_raw_r2: Some(0.5),
                prev_ema: Some(0.5),
            },
            &goals,
        )
        .unwrap();
        assert_abs_diff_eq!(m.raw_r2, -0.4, epsilon = 1e-12);
        assert_eq!(m.a_i, 0.0);
    }

    #[test]
    fn aggregate_carries_forward_short_interval() {
        let goals = SustainabilityGoals::default();
        let records = [obs(0, 1.0, 2.0, 1.0)];
        let reference = estimate_histogram(&[1.0], &HistogramEdges::equal_width(0.0, 2.0, 2));
        let m = aggregate_interval(
            &IntervalInput {
                interval: 1,
                records: &records,
                recent_truth: &[],
                reference: &reference,
                e_max_train: 10.0,
                prev_accuracy: Some(0.8),
                prev_raw_r2: Some(0.8),
                prev_ema: Some(0.7),
            },
            &goals,
        )
        .unwrap();
        assert!(m.carried_forward);
        assert_eq!(m.a_i, 0.8);
    }

    #[test]
    fn same_source_windows_have_small_divergence() {
        // two independent 1200-sample draws from one distribution
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random_range(0.0..1.0);
                    let v: f64 = rng.random_range(0.0..1.0);
                    100.0 + 40.0 * (u + v)
                })
                .collect()
        };
        let train = draw(1200);
        let recent = draw(1200);
        let edges = HistogramEdges::from_range(&train, 20);
        let reference = estimate_histogram(&train, &edges);
        let current = estimate_histogram(&recent, &edges);
        let d = kl_divergence(&current, &reference).unwrap();
        assert!(d < 0.02, "d = {d}");
    }

    fn random_hist(raw: Vec<f64>) -> Histogram {
        let bins = raw.len();
        Histogram::from_probs(HistogramEdges::equal_width(0.0, 1.0, bins), raw).unwrap()
    }

    proptest! {
        #[test]
        fn kl_nonnegative(pairs in prop::collection::vec((1e-6f64..1.0, 1e-6f64..1.0), 2..30)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let p = random_hist(a);
            let q = random_hist(b);
            prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        }

        #[test]
        fn score_monotone(a in 0.0f64..1.0, da in 0.0f64..0.5, e in 0.0f64..1.0, beta in 0.0f64..=1.0) {
            let a2 = (a + da).min(1.0);
            prop_assert!(performance_score(a2, e, beta) >= performance_score(a, e, beta) - 1e-15);
            let e2 = (e + da).min(1.0);
            prop_assert!(performance_score(a, e2, beta) <= performance_score(a, e, beta) + 1e-15);
        }
    }
}
