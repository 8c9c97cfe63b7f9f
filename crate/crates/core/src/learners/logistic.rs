//! Logistic regression fitted by iteratively reweighted least squares.
//!
//! Each Newton step solves the ridge-jittered normal equations; if a full
//! step would raise the negative log-likelihood it is halved until it does
//! not, which keeps the recorded loss path non-increasing even on separable
//! data.

use crate::dataset::LabeledDataset;
use crate::float::{cast, Float};
use crate::learners::{sigmoid, LearnerError, LogisticParams};

#[derive(Debug, Clone)]
pub struct LogisticModel<F> {
    weights: Vec<F>,
    intercept: F,
    nll_path: Vec<F>,
}

impl<F: Float> LogisticModel<F> {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn coefficients(&self) -> (&[F], F) {
        (&self.weights, self.intercept)
    }

    /// Negative log-likelihood after the initial guess and after each
    /// accepted update.
    pub fn loss_history(&self) -> &[F] {
        &self.nll_path
    }

    pub(crate) fn score_row(&self, x: &[F]) -> F {
        let mut z = self.intercept;
        for (w, v) in self.weights.iter().zip(x) {
            z = z + *w * *v;
        }
        sigmoid(z)
    }
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n`. Returns `None` for a numerically singular system.
pub(crate) fn solve_linear<F: Float>(a: &mut [F], b: &mut [F], n: usize) -> Option<Vec<F>> {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > F::zero()) || !best.is_finite() {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let diag = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / diag;
            if factor == F::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col * n + c];
                a[r * n + c] = a[r * n + c] - factor * v;
            }
            b[r] = b[r] - factor * b[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for col in (0..n).rev() {
        let mut v = b[col];
        for c in (col + 1)..n {
            v = v - a[col * n + c] * x[c];
        }
        x[col] = v / a[col * n + col];
    }
    Some(x)
}

fn nll<F: Float>(train: &LabeledDataset<F>, weights: &[F], intercept: F) -> F {
    let mut total = F::zero();
    for i in 0..train.n() {
        let mut z = intercept;
        for (w, v) in weights.iter().zip(train.row(i)) {
            z = z + *w * *v;
        }
        // ln(1 + e^z) - y z, computed stably
        let softplus = z.max(F::zero()) + (-z.abs()).exp().ln_1p();
        let yz = if train.labels()[i] == 1 { z } else { F::zero() };
        total = total + softplus - yz;
    }
    total
}

pub(crate) fn fit<F: Float>(
    train: &LabeledDataset<F>,
    params: &LogisticParams,
) -> Result<LogisticModel<F>, LearnerError> {
    let n = train.n();
    let d = train.dim();
    let p = d + 1; // intercept last
    let ridge = cast::<F>(params.ridge);
    let tol = cast::<F>(params.tol);

    let mut weights = vec![F::zero(); d];
    let mut intercept = F::zero();
    let mut current = nll(train, &weights, intercept);
    let mut path = vec![current];

    let mut hess = vec![F::zero(); p * p];
    let mut grad = vec![F::zero(); p];
    for step in 1..=params.max_iter {
        hess.iter_mut().for_each(|v| *v = F::zero());
        grad.iter_mut().for_each(|v| *v = F::zero());
        for i in 0..n {
            let row = train.row(i);
            let mut z = intercept;
            for (w, v) in weights.iter().zip(row) {
                z = z + *w * *v;
            }
            let mu = sigmoid(z);
            let w_i = mu * (F::one() - mu);
            let resid = cast::<F>(f64::from(train.labels()[i])) - mu;
            for a in 0..d {
                let xa = row[a];
                grad[a] = grad[a] + xa * resid;
                let wxa = w_i * xa;
                for b in a..d {
                    hess[a * p + b] = hess[a * p + b] + wxa * row[b];
                }
                hess[a * p + d] = hess[a * p + d] + wxa;
            }
            grad[d] = grad[d] + resid;
            hess[d * p + d] = hess[d * p + d] + w_i;
        }
        // mirror the upper triangle and add the ridge jitter
        for a in 0..p {
            for b in (a + 1)..p {
                hess[b * p + a] = hess[a * p + b];
            }
            hess[a * p + a] = hess[a * p + a] + ridge;
        }
        let mut a_work = hess.clone();
        let mut b_work = grad.clone();
        let Some(delta) = solve_linear(&mut a_work, &mut b_work, p) else {
            break; // singular even with the jitter: keep the current fit
        };
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::NonFiniteLoss { at: step });
        }

        // halve the step until the objective does not increase
        let mut scale = F::one();
        let mut accepted = false;
        for _ in 0..40 {
            let cand_w: Vec<F> =
                weights.iter().zip(&delta).map(|(w, dl)| *w + scale * *dl).collect();
            let cand_b = intercept + scale * delta[d];
            let cand_nll = nll(train, &cand_w, cand_b);
            if !cand_nll.is_finite() {
                return Err(LearnerError::NonFiniteLoss { at: step });
            }
            if cand_nll <= current {
                weights = cand_w;
                intercept = cand_b;
                current = cand_nll;
                accepted = true;
                break;
            }
            scale = scale / cast::<F>(2.0);
        }
        if !accepted {
            break;
        }
        path.push(current);
        let max_step = delta.iter().fold(F::zero(), |m, v| m.max((*v * scale).abs()));
        if max_step <= tol {
            break;
        }
    }
    Ok(LogisticModel { weights, intercept, nll_path: path })
}
