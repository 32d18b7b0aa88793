//! Kernel classifier for raw-pixel descriptors.
//!
//! A soft-margin maximum-margin classifier with a Gaussian kernel, trained
//! by sequential minimal optimisation on the dual problem. The second index
//! of each working pair is chosen by the largest error gap, so training is
//! deterministic for a fixed sample order.

use super::pixels::{PixelDescriptor, DESCRIPTOR_LEN};
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

#[derive(Debug, Clone)]
pub struct KernelConfig<R> {
    /// Gaussian kernel width sigma; the kernel is exp(-|a - b|^2 / (2 sigma^2)).
    pub kernel_width: R,
    /// Soft-margin penalty; box constraint on the dual variables.
    pub penalty: R,
    /// KKT violation tolerance.
    pub tolerance: R,
    /// Upper bound on full passes over the data.
    pub max_passes: usize,
}

impl<R: Real> Default for KernelConfig<R> {
    fn default() -> Self {
        KernelConfig {
            kernel_width: real(4.0),
            penalty: real(10.0),
            tolerance: real(1e-3),
            max_passes: 200,
        }
    }
}

impl<R: Real> KernelConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.kernel_width > R::zero()) || !self.kernel_width.is_finite() {
            return Err(Error::InvalidParameter("kernel width must be positive".into()));
        }
        if !(self.penalty > R::zero()) || !self.penalty.is_finite() {
            return Err(Error::InvalidParameter("margin penalty must be positive".into()));
        }
        if !(self.tolerance > R::zero()) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidParameter("max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trained classifier: a sparse kernel expansion over the support vectors.
#[derive(Debug, Clone)]
pub struct KernelClassifier<R> {
    support_vectors: Vec<PixelDescriptor<R>>,
    /// alpha_i * y_i per support vector.
    coefficients: Vec<R>,
    bias: R,
    gamma: R,
    /// False when training stopped at the pass limit instead of at KKT
    /// convergence; the classifier is still usable.
    pub converged: bool,
}

fn kernel<R: Real>(a: &PixelDescriptor<R>, b: &PixelDescriptor<R>, gamma: R) -> R {
    let mut sq = R::zero();
    for k in 0..DESCRIPTOR_LEN {
        let d = a.values[k] - b.values[k];
        sq += d * d;
    }
    (-gamma * sq).exp()
}

impl<R: Real> KernelClassifier<R> {
    /// Decision value; positive means head.
    pub fn decision(&self, x: &PixelDescriptor<R>) -> R {
        let mut f = self.bias;
        for (sv, &c) in self.support_vectors.iter().zip(&self.coefficients) {
            f += c * kernel(sv, x, self.gamma);
        }
        f
    }

    pub fn classify(&self, x: &PixelDescriptor<R>) -> bool {
        self.decision(x) > R::zero()
    }

    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }

    /// Plain-text serialisation: header values, then one line per support
    /// vector holding its coefficient followed by the 81 descriptor values.
    pub fn to_text(&self) -> String {
        let f = |v: R| format!("{:?}", v.to_f64().unwrap_or(f64::NAN));
        let mut out = String::new();
        out.push_str(&format!("gamma = {}\n", f(self.gamma)));
        out.push_str(&format!("bias = {}\n", f(self.bias)));
        out.push_str(&format!("converged = {}\n", self.converged));
        out.push_str(&format!("support_vectors = {}\n", self.support_vectors.len()));
        for (sv, &c) in self.support_vectors.iter().zip(&self.coefficients) {
            out.push_str("sv =");
            out.push_str(&format!(" {}", f(c)));
            for &v in &sv.values {
                out.push_str(&format!(" {}", f(v)));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, context: &str) -> Result<Self> {
        let bad = |msg: String| Error::parse(context, msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing `{key}` line")))?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `{key} = ...`, got {line:?}")))?;
            if k.trim() != key {
                return Err(bad(format!("expected key {key:?}, got {:?}", k.trim())));
            }
            Ok(v.trim().to_string())
        };

        let parse_real = |s: &str| -> Result<R> {
            let v: f64 =
                s.parse().map_err(|_| bad(format!("bad number {s:?}")))?;
            Ok(real(v))
        };

        let gamma = parse_real(&field("gamma")?)?;
        let bias = parse_real(&field("bias")?)?;
        let converged = match field("converged")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("bad converged flag {other:?}"))),
        };
        let count: usize = field("support_vectors")?
            .parse()
            .map_err(|_| bad("bad support vector count".into()))?;
        if !(gamma > R::zero()) {
            return Err(bad(format!("gamma {gamma} must be positive")));
        }
        if count == 0 {
            return Err(bad("classifier has no support vectors".into()));
        }

        let mut support_vectors = Vec::with_capacity(count);
        let mut coefficients = Vec::with_capacity(count);
        for _ in 0..count {
            let numbers = field("sv")?;
            let mut it = numbers.split_whitespace();
            let c = parse_real(
                it.next().ok_or_else(|| bad("empty support vector line".into()))?,
            )?;
            let mut values = [R::zero(); DESCRIPTOR_LEN];
            for (k, slot) in values.iter_mut().enumerate() {
                let token = it
                    .next()
                    .ok_or_else(|| bad(format!("support vector ends after {k} values")))?;
                *slot = parse_real(token)?;
            }
            if it.next().is_some() {
                return Err(bad("support vector has too many values".into()));
            }
            coefficients.push(c);
            support_vectors.push(PixelDescriptor { values });
        }
        if lines.next().is_some() {
            return Err(bad("trailing content after support vectors".into()));
        }
        Ok(KernelClassifier { support_vectors, coefficients, bias, gamma, converged })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

/// Train on labelled descriptors (true = head).
pub fn train_kernel_classifier<R: Real>(
    samples: &[(PixelDescriptor<R>, bool)],
    config: &KernelConfig<R>,
) -> Result<KernelClassifier<R>> {
    config.validate()?;
    let n = samples.len();
    if n < 2 {
        return Err(Error::EmptyInput("kernel training needs at least two samples"));
    }
    if !samples.iter().any(|&(_, l)| l) || !samples.iter().any(|&(_, l)| !l) {
        return Err(Error::InvalidParameter(
            "kernel training needs both positive and negative samples".into(),
        ));
    }

    let gamma = (real::<R>(2.0) * config.kernel_width * config.kernel_width).recip();
    let c = config.penalty;
    let tol = config.tolerance;
    let y: Vec<R> = samples.iter().map(|&(_, l)| if l { R::one() } else { -R::one() }).collect();

    // Precomputed Gram matrix; descriptor sets stay small (hundreds).
    let gram: Vec<R> = (0..n * n)
        .map(|idx| kernel(&samples[idx / n].0, &samples[idx % n].0, gamma))
        .collect();
    let k = |i: usize, j: usize| gram[i * n + j];

    let mut alpha = vec![R::zero(); n];
    let mut bias = R::zero();
    // Cached decision values f[k] = sum alpha_j y_j K(j, k) + bias, updated
    // incrementally after every pair step.
    let mut f = vec![R::zero(); n];

    let mut converged = false;
    for _ in 0..config.max_passes {
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = f[i] - y[i];
            let violates = (y[i] * e_i < -tol && alpha[i] < c) || (y[i] * e_i > tol && alpha[i] > R::zero());
            if !violates {
                continue;
            }

            // Second choice: the sample with the largest error gap.
            let mut j_best = usize::MAX;
            let mut gap_best = R::zero();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let gap = (f[j] - y[j] - e_i).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = j;
                }
            }
            if j_best == usize::MAX {
                continue;
            }
            let j = j_best;
            let e_j = f[j] - y[j];

            let (a_i_old, a_j_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if y[i] == y[j] {
                ((a_i_old + a_j_old - c).max(R::zero()), (a_i_old + a_j_old).min(c))
            } else {
                ((a_j_old - a_i_old).max(R::zero()), (c + a_j_old - a_i_old).min(c))
            };
            if lo >= hi {
                continue;
            }
            let eta = real::<R>(2.0) * k(i, j) - k(i, i) - k(j, j);
            if eta >= R::zero() {
                continue;
            }

            let mut a_j = a_j_old - y[j] * (e_i - e_j) / eta;
            a_j = a_j.min(hi).max(lo);
            if (a_j - a_j_old).abs() < real::<R>(1e-7) {
                continue;
            }
            let a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j);

            let b1 = bias - e_i - y[i] * (a_i - a_i_old) * k(i, i) - y[j] * (a_j - a_j_old) * k(i, j);
            let b2 = bias - e_j - y[i] * (a_i - a_i_old) * k(i, j) - y[j] * (a_j - a_j_old) * k(j, j);
            let new_bias = if a_i > R::zero() && a_i < c {
                b1
            } else if a_j > R::zero() && a_j < c {
                b2
            } else {
                (b1 + b2) / real(2.0)
            };

            let d_i = y[i] * (a_i - a_i_old);
            let d_j = y[j] * (a_j - a_j_old);
            let d_b = new_bias - bias;
            for t in 0..n {
                f[t] += d_i * k(i, t) + d_j * k(j, t) + d_b;
            }

            alpha[i] = a_i;
            alpha[j] = a_j;
            bias = new_bias;
            changed += 1;
        }
        if changed == 0 {
            converged = true;
            break;
        }
    }

    let keep = real::<R>(1e-8);
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        if alpha[i] > keep {
            support_vectors.push(samples[i].0.clone());
            coefficients.push(alpha[i] * y[i]);
        }
    }
    if support_vectors.is_empty() {
        return Err(Error::Numerical("kernel training produced no support vectors".into()));
    }

    Ok(KernelClassifier { support_vectors, coefficients, bias, gamma, converged })
}
