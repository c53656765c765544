//! Uniformity testing and histogramming of sojourn samples.
//!
//! The Kolmogorov-Smirnov p-value uses the asymptotic Kolmogorov series; the
//! chi-square p-value uses the regularized upper incomplete gamma function.
//! Both are implemented here directly: every acceptance run needs them at
//! sample sizes where the asymptotics are solid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equal-width histogram on [0, 1]; all bins are right-open except the last,
/// which includes 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: usize,
    pub counts: Vec<u64>,
    pub sample_size: usize,
}

impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| i as f64 / self.bins as f64).collect()
    }

    /// Scaled bar heights: `count * bins / sample_size`, so a uniform sample
    /// hovers at density 1 in every bin.
    pub fn densities(&self) -> Vec<f64> {
        if self.sample_size == 0 {
            return vec![0.0; self.bins];
        }
        let scale = self.bins as f64 / self.sample_size as f64;
        self.counts.iter().map(|c| *c as f64 * scale).collect()
    }

    pub fn max_density_deviation(&self) -> f64 {
        self.densities()
            .iter()
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Bin the samples. Bin membership is decided against the exact bin edges
/// `i/bins`, so a sample equal to an edge always lands in the bin opening at
/// that edge (and 1.0 in the last bin).
pub fn histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin".into()));
    }
    let mut counts = vec![0u64; bins];
    let nb = bins as f64;
    for &s in samples {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::SampleOutOfRange(s));
        }
        let mut idx = ((s * nb) as usize).min(bins - 1);
        // Truncation of s*bins can disagree with the edge grid by one ulp;
        // settle membership against the edges themselves.
        if idx + 1 < bins && s >= (idx + 1) as f64 / nb {
            idx += 1;
        } else if s < idx as f64 / nb {
            idx -= 1;
        }
        counts[idx] += 1;
    }
    Ok(Histogram {
        bins,
        counts,
        sample_size: samples.len(),
    })
}

/// Two-sided Kolmogorov-Smirnov statistic and asymptotic p-value against
/// U(0, 1).
///
/// `D = max_i max(i/n - u_(i), u_(i) - (i-1)/n)` over the sorted sample, and
/// `p = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 n D^2)`, truncated once terms
/// drop below 1e-12 and clamped to [0, 1].
pub fn ks_uniform(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("ks_uniform needs samples"));
    }
    for &s in samples {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::SampleOutOfRange(s));
        }
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &u) in sorted.iter().enumerate() {
        let upper = (i + 1) as f64 / n - u;
        let lower = u - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    Ok((d, kolmogorov_p(sorted.len(), d)))
}

/// Tail of the asymptotic Kolmogorov distribution at `sqrt(n) * D`.
pub fn kolmogorov_p(n: usize, d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let lambda_sq = 2.0 * n as f64 * d * d;
    // Below sqrt(n)*D ~ 0.2 the tail mass is 1 to double precision and the
    // alternating series converges too slowly to say so.
    if lambda_sq < 0.08 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut sign = 1.0;
    for j in 1..=1000 {
        let term = (-lambda_sq * (j * j) as f64).exp();
        p += 2.0 * sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    p.clamp(0.0, 1.0)
}

/// Pearson chi-square test of observed counts against an expected pmf
/// (uniform across cells when omitted). Returns (statistic, degrees of
/// freedom, p-value).
pub fn chi_square_uniform(
    counts: &[u64],
    expected_pmf: Option<&[f64]>,
) -> Result<(f64, usize, f64)> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("chi_square_uniform needs cells"));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("chi_square_uniform needs observations"));
    }
    let cells = counts.len();
    let uniform = vec![1.0 / cells as f64; cells];
    let pmf = match expected_pmf {
        Some(p) => {
            if p.len() != cells {
                return Err(Error::InvalidConfig(format!(
                    "expected pmf has {} cells, counts have {}",
                    p.len(),
                    cells
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "expected pmf sums to {sum}, not 1"
                )));
            }
            p
        }
        None => &uniform,
    };
    let mut stat = 0.0;
    for (i, (&obs, &prob)) in counts.iter().zip(pmf).enumerate() {
        if prob <= 0.0 {
            return Err(Error::ZeroExpectedCell(i));
        }
        let expected = total as f64 * prob;
        let diff = obs as f64 - expected;
        stat += diff * diff / expected;
    }
    let df = cells - 1;
    Ok((stat, df, chi_square_sf(stat, df as f64)))
}

/// Survival function of the chi-square distribution: the regularized upper
/// incomplete gamma function Q(df/2, x/2).
pub fn chi_square_sf(stat: f64, df: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, stat / 2.0)
}

/// Regularized upper incomplete gamma Q(a, x), via the lower series for
/// x < a + 1 and the continued fraction otherwise.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).clamp(0.0, 1.0)
    } else {
        gamma_q_continued_fraction(a, x).clamp(0.0, 1.0)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..500 {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    // Lentz's algorithm on the standard continued fraction for Q.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Natural log of the gamma function (Lanczos, g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    // Published coefficient set, kept at full printed precision.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection for the left half-plane.
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
