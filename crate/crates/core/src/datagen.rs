//! Synthetic two-class Gaussian benchmarks.
//!
//! Two fixed 5-dimensional presets are exposed: one with a mean shift between
//! the classes, and a harder one where the minority sits between the two
//! modes of a bimodal majority. Class 0 is the minority; `ir = n1/n0` is the
//! imbalance ratio. Sampling is reproducible: the same seed and arguments
//! produce identical bytes.

use rand::Rng;

use crate::dataset::{DatasetError, LabeledDataset};
use crate::float::{cast, Float};
use crate::matrix::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum DatagenError {
    #[error("covariance not positive definite: pivot {pivot:e} at column {col}")]
    NotPositiveDefinite { col: usize, pivot: f64 },
    #[error("imbalance ratio must be a finite value >= 1, got {0}")]
    InvalidRatio(f64),
    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Multivariate normal parameters.
#[derive(Debug, Clone)]
pub struct GaussianSpec<F> {
    pub mean: Vec<F>,
    pub covariance: Matrix<F>,
}

impl<F: Float> GaussianSpec<F> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn validate(&self) -> Result<(), DatagenError> {
        let d = self.mean.len();
        if d == 0 {
            return Err(DatagenError::InvalidSpec("mean must be non-empty".into()));
        }
        if self.covariance.cols() != d || self.covariance.rows() != d {
            return Err(DatagenError::InvalidSpec(format!(
                "covariance must be {d}x{d}, got {}x{}",
                self.covariance.rows(),
                self.covariance.cols()
            )));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if self.covariance.get(i, j) != self.covariance.get(j, i) {
                    return Err(DatagenError::InvalidSpec(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Finite mixture of Gaussians with non-negative weights summing to one.
#[derive(Debug, Clone)]
pub struct MixtureSpec<F> {
    pub components: Vec<GaussianSpec<F>>,
    pub weights: Vec<f64>,
}

impl<F: Float> MixtureSpec<F> {
    fn validate(&self) -> Result<(), DatagenError> {
        if self.components.is_empty() {
            return Err(DatagenError::InvalidSpec("mixture needs at least one component".into()));
        }
        if self.components.len() != self.weights.len() {
            return Err(DatagenError::InvalidSpec(format!(
                "{} components but {} weights",
                self.components.len(),
                self.weights.len()
            )));
        }
        let d = self.components[0].dim();
        for c in &self.components {
            c.validate()?;
            if c.dim() != d {
                return Err(DatagenError::InvalidSpec("component dimensions differ".into()));
            }
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DatagenError::InvalidSpec("weights must be non-negative".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DatagenError::InvalidSpec(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, GaussianSpec::dim)
    }
}

/// Class-conditional sampling law.
#[derive(Debug, Clone)]
pub enum ClassLaw<F> {
    Gaussian(GaussianSpec<F>),
    Mixture(MixtureSpec<F>),
}

impl<F: Float> ClassLaw<F> {
    pub fn dim(&self) -> usize {
        match self {
            ClassLaw::Gaussian(g) => g.dim(),
            ClassLaw::Mixture(m) => m.dim(),
        }
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = cov`.
///
/// Fails with the offending column when a pivot is non-positive.
pub fn cholesky<F: Float>(cov: &Matrix<F>) -> Result<Matrix<F>, DatagenError> {
    let d = cov.rows();
    assert_eq!(cov.cols(), d, "covariance must be square");
    let mut lower = Matrix::zeros(d, d);
    for j in 0..d {
        let mut diag = cov.get(j, j);
        for k in 0..j {
            diag = diag - lower.get(j, k) * lower.get(j, k);
        }
        if diag <= F::zero() {
            return Err(DatagenError::NotPositiveDefinite {
                col: j,
                pivot: diag.to_f64().unwrap_or(f64::NEG_INFINITY),
            });
        }
        let ljj = diag.sqrt();
        lower.set(j, j, ljj);
        for i in (j + 1)..d {
            let mut v = cov.get(i, j);
            for k in 0..j {
                v = v - lower.get(i, k) * lower.get(j, k);
            }
            lower.set(i, j, v / ljj);
        }
    }
    Ok(lower)
}

/// Standard-normal stream via the Box-Muller transform, keeping the paired
/// draw so two uniforms yield two normals.
pub(crate) struct NormalSource {
    spare: Option<f64>,
}

impl NormalSource {
    pub(crate) fn new() -> Self {
        Self { spare: None }
    }

    pub(crate) fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let mut u1: f64 = rng.random();
        while u1 <= 0.0 {
            u1 = rng.random();
        }
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (core::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// One class-conditional law prepared for sampling.
struct LawKernel<F> {
    parts: Vec<MvnKernel<F>>,
    // cumulative component weights; empty for a plain Gaussian
    cumulative: Vec<f64>,
}

struct MvnKernel<F> {
    mean: Vec<F>,
    // None when the covariance is identically zero: degenerate point mass
    lower: Option<Matrix<F>>,
}

impl<F: Float> MvnKernel<F> {
    fn new(spec: &GaussianSpec<F>) -> Result<Self, DatagenError> {
        spec.validate()?;
        let zero = spec.covariance.as_slice().iter().all(|v| *v == F::zero());
        let lower = if zero { None } else { Some(cholesky(&spec.covariance)?) };
        Ok(Self { mean: spec.mean.clone(), lower })
    }

    fn sample_row<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        normals: &mut NormalSource,
        z: &mut Vec<F>,
        out: &mut Vec<F>,
    ) {
        out.clear();
        match &self.lower {
            None => out.extend_from_slice(&self.mean),
            Some(lower) => {
                let d = self.mean.len();
                z.clear();
                for _ in 0..d {
                    z.push(cast::<F>(normals.next(rng)));
                }
                for i in 0..d {
                    let mut v = self.mean[i];
                    for k in 0..=i {
                        v = v + lower.get(i, k) * z[k];
                    }
                    out.push(v);
                }
            }
        }
    }
}

impl<F: Float> LawKernel<F> {
    fn new(law: &ClassLaw<F>) -> Result<Self, DatagenError> {
        match law {
            ClassLaw::Gaussian(g) => {
                Ok(Self { parts: vec![MvnKernel::new(g)?], cumulative: Vec::new() })
            }
            ClassLaw::Mixture(m) => {
                m.validate()?;
                let parts = m
                    .components
                    .iter()
                    .map(MvnKernel::new)
                    .collect::<Result<Vec<_>, _>>()?;
                if parts.len() == 1 {
                    // single component: identical draw path to the plain Gaussian
                    return Ok(Self { parts, cumulative: Vec::new() });
                }
                let mut acc = 0.0;
                let cumulative = m
                    .weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                Ok(Self { parts, cumulative })
            }
        }
    }

    fn sample_into<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
        normals: &mut NormalSource,
        out: &mut Matrix<F>,
    ) {
        let mut z = Vec::new();
        let mut row = Vec::new();
        for _ in 0..count {
            let part = if self.cumulative.is_empty() {
                &self.parts[0]
            } else {
                let u: f64 = rng.random();
                let mut idx = self.cumulative.len() - 1;
                for (i, c) in self.cumulative.iter().enumerate() {
                    if u < *c {
                        idx = i;
                        break;
                    }
                }
                &self.parts[idx]
            };
            part.sample_row(rng, normals, &mut z, &mut row);
            out.push_row(&row);
        }
    }
}

/// Draws `count` rows from a multivariate normal.
///
/// A covariance of exactly zero yields `count` copies of the mean.
pub fn mvn_sample<F: Float, R: Rng + ?Sized>(
    spec: &GaussianSpec<F>,
    count: usize,
    rng: &mut R,
) -> Result<Matrix<F>, DatagenError> {
    let kernel = LawKernel::new(&ClassLaw::Gaussian(spec.clone()))?;
    let mut out = Matrix::with_capacity(count, spec.dim());
    let mut normals = NormalSource::new();
    kernel.sample_into(count, rng, &mut normals, &mut out);
    Ok(out)
}

/// Draws `count` rows from a Gaussian mixture.
pub fn mixture_sample<F: Float, R: Rng + ?Sized>(
    spec: &MixtureSpec<F>,
    count: usize,
    rng: &mut R,
) -> Result<Matrix<F>, DatagenError> {
    spec.validate()?;
    let kernel = LawKernel::new(&ClassLaw::Mixture(spec.clone()))?;
    let mut out = Matrix::with_capacity(count, spec.dim());
    let mut normals = NormalSource::new();
    kernel.sample_into(count, rng, &mut normals, &mut out);
    Ok(out)
}

/// Built-in benchmark preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    /// Two Gaussians sharing a covariance, means apart along three coordinates.
    Example1,
    /// Minority at the midpoint of a symmetric two-mode majority.
    Example2,
}

impl ExampleId {
    pub fn as_u8(self) -> u8 {
        match self {
            ExampleId::Example1 => 1,
            ExampleId::Example2 => 2,
        }
    }
}

impl TryFrom<u8> for ExampleId {
    type Error = DatagenError;

    fn try_from(v: u8) -> Result<Self, DatagenError> {
        match v {
            1 => Ok(ExampleId::Example1),
            2 => Ok(ExampleId::Example2),
            other => Err(DatagenError::InvalidSpec(format!("unknown example {other}, expected 1 or 2"))),
        }
    }
}

/// Config files refer to examples by number, so `"example": 1` not a string.
impl<'de> serde::Deserialize<'de> for ExampleId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(deserializer)?;
        ExampleId::try_from(v).map_err(serde::de::Error::custom)
    }
}

pub const EXAMPLE_DIM: usize = 5;

fn mu0<F: Float>() -> Vec<F> {
    vec![F::zero(); EXAMPLE_DIM]
}

fn mu1<F: Float>() -> Vec<F> {
    let two = cast::<F>(2.0);
    vec![two, two, two, F::zero(), F::zero()]
}

fn shared_covariance<F: Float>() -> Matrix<F> {
    let rows: [[f64; 5]; 5] = [
        [1.0, 0.5, 0.25, 0.0, 0.0],
        [0.5, 1.0, 0.5, 0.0, 0.0],
        [0.25, 0.5, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let mut m = Matrix::new(EXAMPLE_DIM);
    for row in rows {
        let row: Vec<F> = row.iter().map(|v| cast::<F>(*v)).collect();
        m.push_row(&row);
    }
    m
}

/// Class-conditional laws `(class 0, class 1)` of a preset.
pub fn example_laws<F: Float>(example: ExampleId) -> (ClassLaw<F>, ClassLaw<F>) {
    let sigma = shared_covariance::<F>();
    match example {
        ExampleId::Example1 => (
            ClassLaw::Gaussian(GaussianSpec { mean: mu0(), covariance: sigma.clone() }),
            ClassLaw::Gaussian(GaussianSpec { mean: mu1(), covariance: sigma }),
        ),
        ExampleId::Example2 => {
            let mid: Vec<F> = mu0::<F>()
                .iter()
                .zip(mu1::<F>())
                .map(|(a, b)| (*a + b) / cast::<F>(2.0))
                .collect();
            (
                ClassLaw::Gaussian(GaussianSpec { mean: mid, covariance: sigma.clone() }),
                ClassLaw::Mixture(MixtureSpec {
                    components: vec![
                        GaussianSpec { mean: mu0(), covariance: sigma.clone() },
                        GaussianSpec { mean: mu1(), covariance: sigma },
                    ],
                    weights: vec![0.5, 0.5],
                }),
            )
        }
    }
}

/// Samples a labeled dataset with `minority_count` class-0 rows and
/// `round(minority_count * ir)` class-1 rows, class 0 first.
pub fn make_dataset<F: Float, R: Rng + ?Sized>(
    example: ExampleId,
    ir: f64,
    minority_count: usize,
    rng: &mut R,
) -> Result<LabeledDataset<F>, DatagenError> {
    if !ir.is_finite() || ir < 1.0 {
        return Err(DatagenError::InvalidRatio(ir));
    }
    if minority_count == 0 {
        return Err(DatagenError::InvalidSpec("minority_count must be >= 1".into()));
    }
    let n0 = minority_count;
    let n1 = (minority_count as f64 * ir).round() as usize;
    let (law0, law1) = example_laws::<F>(example);
    let k0 = LawKernel::new(&law0)?;
    let k1 = LawKernel::new(&law1)?;
    let mut features = Matrix::with_capacity(n0 + n1, EXAMPLE_DIM);
    let mut normals = NormalSource::new();
    k0.sample_into(n0, rng, &mut normals, &mut features);
    k1.sample_into(n1, rng, &mut normals, &mut features);
    let mut labels = vec![0u8; n0];
    labels.extend(std::iter::repeat(1u8).take(n1));
    Ok(LabeledDataset::new(features, labels)?)
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

struct LogDensity {
    mean: Vec<f64>,
    lower: Matrix<f64>,
    log_norm: f64,
}

impl LogDensity {
    fn new<F: Float>(spec: &GaussianSpec<F>) -> Result<Self, DatagenError> {
        spec.validate()?;
        let d = spec.dim();
        let mut cov = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                cov.set(i, j, spec.covariance.get(i, j).to_f64().unwrap());
            }
        }
        let lower = cholesky(&cov)?;
        let mut log_det_half = 0.0;
        for i in 0..d {
            log_det_half += lower.get(i, i).ln();
        }
        let log_norm = -(d as f64) / 2.0 * (2.0 * core::f64::consts::PI).ln() - log_det_half;
        let mean = spec.mean.iter().map(|v| v.to_f64().unwrap()).collect();
        Ok(Self { mean, lower, log_norm })
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut v = x[i] - self.mean[i];
            for k in 0..i {
                v -= self.lower.get(i, k) * y[k];
            }
            y[i] = v / self.lower.get(i, i);
        }
        let quad: f64 = y.iter().map(|v| v * v).sum();
        self.log_norm - 0.5 * quad
    }
}

enum LawDensity {
    Gaussian(LogDensity),
    Mixture(Vec<(f64, LogDensity)>),
}

impl LawDensity {
    fn new<F: Float>(law: &ClassLaw<F>) -> Result<Self, DatagenError> {
        match law {
            ClassLaw::Gaussian(g) => Ok(LawDensity::Gaussian(LogDensity::new(g)?)),
            ClassLaw::Mixture(m) => {
                m.validate()?;
                let parts = m
                    .weights
                    .iter()
                    .zip(&m.components)
                    .map(|(w, c)| Ok((w.ln(), LogDensity::new(c)?)))
                    .collect::<Result<Vec<_>, DatagenError>>()?;
                Ok(LawDensity::Mixture(parts))
            }
        }
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        match self {
            LawDensity::Gaussian(g) => g.log_pdf(x),
            LawDensity::Mixture(parts) => {
                let terms: Vec<f64> = parts.iter().map(|(lw, g)| lw + g.log_pdf(x)).collect();
                let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if m == f64::NEG_INFINITY {
                    return m;
                }
                m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
            }
        }
    }
}

/// Population regression function of a preset, for oracle rules and tests.
pub struct BayesOracle {
    class0: LawDensity,
    class1: LawDensity,
}

impl BayesOracle {
    pub fn new(example: ExampleId) -> Result<Self, DatagenError> {
        let (law0, law1) = example_laws::<f64>(example);
        Ok(Self { class0: LawDensity::new(&law0)?, class1: LawDensity::new(&law1)? })
    }

    /// `P(Y = 1 | X = x)` when classes mix with `n1/n0 = ir`.
    pub fn eta<F: Float>(&self, x: &[F], ir: f64) -> Result<f64, DatagenError> {
        if !ir.is_finite() || ir < 1.0 {
            return Err(DatagenError::InvalidRatio(ir));
        }
        let xf: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap()).collect();
        let margin = self.class1.log_pdf(&xf) - self.class0.log_pdf(&xf) + ir.ln();
        Ok(1.0 / (1.0 + (-margin).exp()))
    }
}

/// `P(Y = 1 | X = x)` for a preset at imbalance ratio `ir`.
pub fn bayes_eta<F: Float>(example: ExampleId, x: &[F], ir: f64) -> Result<f64, DatagenError> {
    BayesOracle::new(example)?.eta(x, ir)
}

// Mahalanobis distance between the two class means of the first preset:
// solving the correlated 3x3 block gives (4/3, 2/3, 4/3), so the squared
// distance is 2*(4/3 + 2/3 + 4/3) = 20/3.
const EXAMPLE1_DELTA_SQ: f64 = 20.0 / 3.0;

/// Closed-form risk of the accuracy-optimal rule on the first preset.
pub fn bayes_risk_example1(ir: f64) -> Result<f64, DatagenError> {
    if !ir.is_finite() || ir < 1.0 {
        return Err(DatagenError::InvalidRatio(ir));
    }
    let delta = EXAMPLE1_DELTA_SQ.sqrt();
    // Log-likelihood ratio is N(-delta^2/2, delta^2) under class 0 and
    // N(+delta^2/2, delta^2) under class 1; the rule accepts class 1 when the
    // ratio exceeds log(pi0/pi1) = -ln(ir).
    let t = -ir.ln();
    let r0 = 1.0 - normal_cdf((t + EXAMPLE1_DELTA_SQ / 2.0) / delta);
    let r1 = normal_cdf((t - EXAMPLE1_DELTA_SQ / 2.0) / delta);
    Ok((r0 + ir * r1) / (1.0 + ir))
}
