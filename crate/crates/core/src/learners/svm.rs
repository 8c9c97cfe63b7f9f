//! RBF-kernel C-SVC trained by sequential minimal optimization.
//!
//! Training data beyond `max_train_points` is cut down by a seeded
//! stratified subsample so the kernel matrix stays desk-sized. Decision
//! values are mapped to probabilities by a sigmoid fitted with the logistic
//! module on the points the optimizer saw (Platt scaling).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::float::{cast, Float};
use crate::learners::logistic::{self, LogisticModel};
use crate::learners::{LearnerError, LogisticParams, SvmParams};
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct SvmModel<F> {
    support: Matrix<F>,
    /// alpha_i * y_i for each support vector
    coef: Vec<F>,
    bias: F,
    gamma: F,
    platt: LogisticModel<F>,
}

impl<F: Float> SvmModel<F> {
    pub fn dim(&self) -> usize {
        self.support.cols()
    }

    pub fn n_support(&self) -> usize {
        self.support.rows()
    }

    /// Uncalibrated kernel decision value.
    pub fn decision_value(&self, x: &[F]) -> F {
        let mut f = self.bias;
        for (s, &c) in self.support.iter_rows().zip(&self.coef) {
            f = f + c * rbf(s, x, self.gamma);
        }
        f
    }

    pub(crate) fn score_row(&self, x: &[F]) -> F {
        self.platt.score_row(&[self.decision_value(x)])
    }
}

fn rbf<F: Float>(a: &[F], b: &[F], gamma: F) -> F {
    let mut sq = F::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        sq = sq + d * d;
    }
    (-gamma * sq).exp()
}

pub(crate) fn fit<F: Float>(
    train: &LabeledDataset<F>,
    params: &SvmParams,
    seed: u64,
) -> Result<SvmModel<F>, LearnerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = stratified_cap(train.labels(), params.max_train_points, &mut rng);
    let m = keep.len();
    let d = train.dim();
    let gamma = cast::<F>(params.gamma.unwrap_or(1.0 / d as f64));
    let c_bound = cast::<F>(params.cost);
    let tol = cast::<F>(params.tol);

    let mut x = Matrix::with_capacity(m, d);
    let mut y = Vec::with_capacity(m);
    let mut labels01 = Vec::with_capacity(m);
    for &i in &keep {
        x.push_row(train.row(i));
        labels01.push(train.labels()[i]);
        y.push(if train.labels()[i] == 1 { F::one() } else { -F::one() });
    }

    let gram = {
        let mut g = vec![F::zero(); m * m];
        for i in 0..m {
            for j in 0..=i {
                let k = rbf(x.row(i), x.row(j), gamma);
                g[i * m + j] = k;
                g[j * m + i] = k;
            }
        }
        g
    };
    let k_at = |i: usize, j: usize| gram[i * m + j];

    let mut alpha = vec![F::zero(); m];
    let mut bias = F::zero();
    // decision values at the training points, kept current as alphas move
    let mut fval = vec![F::zero(); m];
    let min_step = cast::<F>(1e-5);
    for _ in 0..params.max_passes {
        let mut changed = 0usize;
        for i in 0..m {
            let e_i = fval[i] + bias - y[i];
            let r = y[i] * e_i;
            let violates =
                (r < -tol && alpha[i] < c_bound) || (r > tol && alpha[i] > F::zero());
            if !violates {
                continue;
            }
            let j = {
                let pick = rng.random_range(0..m - 1);
                if pick >= i {
                    pick + 1
                } else {
                    pick
                }
            };
            let e_j = fval[j] + bias - y[j];
            let eta = cast::<F>(2.0) * k_at(i, j) - k_at(i, i) - k_at(j, j);
            if eta >= F::zero() {
                continue;
            }
            let (lo, hi) = if y[i] == y[j] {
                ((alpha[i] + alpha[j] - c_bound).max(F::zero()), (alpha[i] + alpha[j]).min(c_bound))
            } else {
                ((alpha[j] - alpha[i]).max(F::zero()), (c_bound + alpha[j] - alpha[i]).min(c_bound))
            };
            if lo >= hi {
                continue;
            }
            let a_j_old = alpha[j];
            let a_j = (a_j_old - y[j] * (e_i - e_j) / eta).max(lo).min(hi);
            if (a_j - a_j_old).abs() < min_step {
                continue;
            }
            let a_i_old = alpha[i];
            let a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j);
            let d_i = a_i - a_i_old;
            let d_j = a_j - a_j_old;
            let b1 = bias - (e_i + y[i] * d_i * k_at(i, i) + y[j] * d_j * k_at(i, j));
            let b2 = bias - (e_j + y[i] * d_i * k_at(i, j) + y[j] * d_j * k_at(j, j));
            let new_bias = if alpha_interior(a_i, c_bound) {
                b1
            } else if alpha_interior(a_j, c_bound) {
                b2
            } else {
                (b1 + b2) / cast::<F>(2.0)
            };
            alpha[i] = a_i;
            alpha[j] = a_j;
            bias = new_bias;
            for (k, f) in fval.iter_mut().enumerate() {
                *f = *f + y[i] * d_i * k_at(i, k) + y[j] * d_j * k_at(j, k);
            }
            changed += 1;
        }
        if changed == 0 {
            break;
        }
    }

    // Platt scaling: fit a sigmoid over the decision values the optimizer saw
    let mut dv = Matrix::with_capacity(m, 1);
    for i in 0..m {
        dv.push_row(&[fval[i] + bias]);
    }
    let platt_data = LabeledDataset::new(dv, labels01).expect("decision values per row");
    let platt = logistic::fit(&platt_data, &LogisticParams::default())?;

    let mut support = Matrix::new(d);
    let mut coef = Vec::new();
    for i in 0..m {
        if alpha[i] > F::zero() {
            support.push_row(x.row(i));
            coef.push(alpha[i] * y[i]);
        }
    }
    Ok(SvmModel { support, coef, bias, gamma, platt })
}

fn alpha_interior<F: Float>(a: F, c: F) -> bool {
    a > F::zero() && a < c
}

/// Indices to train on: everything when it fits the cap, otherwise a
/// class-proportional sample without replacement, ascending.
fn stratified_cap(labels: &[u8], cap: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = labels.len();
    if n <= cap.max(2) {
        return (0..n).collect();
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l == 1)].push(i);
    }
    let n1 = by_class[1].len();
    let mut k1 = ((cap as f64 * n1 as f64 / n as f64).round() as usize).clamp(1, cap - 1);
    if k1 > n1 {
        k1 = n1;
    }
    let mut k0 = cap - k1;
    if k0 > by_class[0].len() {
        k0 = by_class[0].len();
    }
    let mut picked = Vec::with_capacity(k0 + k1);
    let [pool0, pool1] = &mut by_class;
    for (pool, k) in [(pool0, k0), (pool1, k1)] {
        for t in 0..k {
            let j = rng.random_range(t..pool.len());
            pool.swap(t, j);
            picked.push(pool[t]);
        }
    }
    picked.sort_unstable();
    picked
}
