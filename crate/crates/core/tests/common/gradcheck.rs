//! Central finite differences for a two-hidden-layer ReLU network, one
//! parameter at a time. Only the units downstream of the perturbed
//! parameter are recomputed, which makes a full sweep of a
//! 180-350-250-11 model affordable. Parameters whose +/- perturbation
//! switches a ReLU on or off are skipped (the loss is not differentiable
//! there) and counted.

use ndarray::Array2;
use unmark_core::predictor::MlpModel;

pub const EPS: f64 = 1e-4;
/// Denominator floor of the relative error, so gradients that are zero up
/// to rounding are compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-7;
/// Relative error above which a parameter counts as a mismatch.
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Default)]
pub struct GradReport {
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_rel_error: f64,
    /// Parameters whose relative error exceeds [`TOLERANCE`].
    pub over_tolerance: usize,
    /// (layer, is_bias, row, col) of the worst parameter.
    pub worst: (usize, bool, usize, usize),
}

impl GradReport {
    fn record(&mut self, analytic: f64, numeric: f64, at: (usize, bool, usize, usize)) {
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR);
        self.checked += 1;
        self.over_tolerance += usize::from(rel > TOLERANCE);
        if rel > self.max_rel_error {
            self.max_rel_error = rel;
            self.worst = at;
        }
    }

    pub fn merge(&mut self, other: &GradReport) {
        self.checked += other.checked;
        self.skipped_kinks += other.skipped_kinks;
        self.over_tolerance += other.over_tolerance;
        if other.max_rel_error > self.max_rel_error {
            self.max_rel_error = other.max_rel_error;
            self.worst = other.worst;
        }
    }
}

struct Sample {
    x: Vec<f64>,
    y: usize,
    z1: Vec<f64>,
    h1: Vec<f64>,
    z2: Vec<f64>,
    h2: Vec<f64>,
    logits: Vec<f64>,
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

fn nll(logits: &[f64], y: usize) -> f64 {
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - logits[y]
}

fn dense(w: &Array2<f64>, b: &[f64], x: &[f64]) -> Vec<f64> {
    (0..w.nrows())
        .map(|r| b[r] + w.row(r).iter().zip(x).map(|(a, c)| a * c).sum::<f64>())
        .collect()
}

/// Checks every parameter of `model` on one batch. The model must have
/// exactly three layers.
pub fn check_batch(model: &MlpModel, inputs: &Array2<f64>, labels: &[usize]) -> GradReport {
    let layers = model.layers();
    assert_eq!(layers.len(), 3, "gradient oracle expects two hidden layers");
    let (w1, w2, w3) = (&layers[0].w, &layers[1].w, &layers[2].w);
    let (b1, b2, b3) = (layers[0].b.to_vec(), layers[1].b.to_vec(), layers[2].b.to_vec());
    let n = labels.len() as f64;

    let samples: Vec<Sample> = inputs
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let x = row.to_vec();
            let z1 = dense(w1, &b1, &x);
            let h1: Vec<f64> = z1.iter().map(|&v| relu(v)).collect();
            let z2 = dense(w2, &b2, &h1);
            let h2: Vec<f64> = z2.iter().map(|&v| relu(v)).collect();
            let logits = dense(w3, &b3, &h2);
            Sample {
                x,
                y,
                z1,
                h1,
                z2,
                h2,
                logits,
            }
        })
        .collect();

    let (_, grads) = model
        .loss_and_gradients(inputs.view(), labels, 0.0)
        .expect("valid batch");
    let mut report = GradReport::default();
    let n_out = w3.nrows();
    let mut logits = vec![0.0; n_out];

    // Output layer: logits move linearly, no kinks.
    for c in 0..n_out {
        for k in 0..=w3.ncols() {
            let is_bias = k == w3.ncols();
            let mut diff = 0.0;
            for s in &samples {
                let step = if is_bias { EPS } else { EPS * s.h2[k] };
                logits.copy_from_slice(&s.logits);
                logits[c] = s.logits[c] + step;
                let up = nll(&logits, s.y);
                logits[c] = s.logits[c] - step;
                diff += up - nll(&logits, s.y);
            }
            let numeric = diff / (2.0 * EPS * n);
            let analytic = if is_bias { grads.layers[2].1[c] } else { grads.layers[2].0[[c, k]] };
            report.record(analytic, numeric, (2, is_bias, c, if is_bias { 0 } else { k }));
        }
    }

    // Second hidden layer: one unit of z2 moves.
    for k in 0..w2.nrows() {
        for i in 0..=w2.ncols() {
            let is_bias = i == w2.ncols();
            let mut diff = 0.0;
            let mut kink = false;
            for s in &samples {
                let dz = if is_bias { EPS } else { EPS * s.h1[i] };
                let (zp, zm) = (s.z2[k] + dz, s.z2[k] - dz);
                if (zp > 0.0) != (zm > 0.0) {
                    kink = true;
                    break;
                }
                let mut loss = [0.0; 2];
                for (slot, z) in [zp, zm].into_iter().enumerate() {
                    let dh = relu(z) - s.h2[k];
                    for (c, l) in logits.iter_mut().enumerate() {
                        *l = s.logits[c] + w3[[c, k]] * dh;
                    }
                    loss[slot] = nll(&logits, s.y);
                }
                diff += loss[0] - loss[1];
            }
            if kink {
                report.skipped_kinks += 1;
                continue;
            }
            let numeric = diff / (2.0 * EPS * n);
            let analytic = if is_bias { grads.layers[1].1[k] } else { grads.layers[1].0[[k, i]] };
            report.record(analytic, numeric, (1, is_bias, k, if is_bias { 0 } else { i }));
        }
    }

    // First hidden layer: one unit of z1 moves, then all of z2.
    let n2 = w2.nrows();
    let mut z2 = [vec![0.0; n2], vec![0.0; n2]];
    for i in 0..w1.nrows() {
        for j in 0..=w1.ncols() {
            let is_bias = j == w1.ncols();
            let mut diff = 0.0;
            let mut kink = false;
            for s in &samples {
                let dz = if is_bias { EPS } else { EPS * s.x[j] };
                let (zp, zm) = (s.z1[i] + dz, s.z1[i] - dz);
                if (zp > 0.0) != (zm > 0.0) {
                    kink = true;
                    break;
                }
                for (slot, z) in [zp, zm].into_iter().enumerate() {
                    let dh = relu(z) - s.h1[i];
                    for (k, out) in z2[slot].iter_mut().enumerate() {
                        *out = s.z2[k] + w2[[k, i]] * dh;
                    }
                }
                if z2[0].iter().zip(&z2[1]).any(|(p, m)| (*p > 0.0) != (*m > 0.0)) {
                    kink = true;
                    break;
                }
                let mut loss = [0.0; 2];
                for slot in 0..2 {
                    logits.copy_from_slice(&s.logits);
                    for (k, &z) in z2[slot].iter().enumerate() {
                        let dh = relu(z) - s.h2[k];
                        if dh != 0.0 {
                            for (c, l) in logits.iter_mut().enumerate() {
                                *l += w3[[c, k]] * dh;
                            }
                        }
                    }
                    loss[slot] = nll(&logits, s.y);
                }
                diff += loss[0] - loss[1];
            }
            if kink {
                report.skipped_kinks += 1;
                continue;
            }
            let numeric = diff / (2.0 * EPS * n);
            let analytic = if is_bias { grads.layers[0].1[i] } else { grads.layers[0].0[[i, j]] };
            report.record(analytic, numeric, (0, is_bias, i, if is_bias { 0 } else { j }));
        }
    }
    report
}
