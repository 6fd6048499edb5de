//! Studentized range distribution and Tukey HSD pairwise comparisons.
//!
//! The distribution function is evaluated by Gauss-Legendre quadrature of
//!
//! ```text
//! P(Q ≤ q) = ∫₀^∞ f_ν(s) · k ∫ φ(z) [Φ(z) − Φ(z − q·s)]^{k−1} dz ds
//! ```
//!
//! where `f_ν` is the density of `√(χ²_ν / ν)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use super::anova::AnovaResult;
use crate::error::{Error, Result};

pub const MIN_GROUPS: usize = 2;
pub const MAX_GROUPS: usize = 50;
pub const MIN_DF: usize = 2;
pub const MAX_DF: usize = 2000;

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Nodes and weights of composite 10-point Gauss-Legendre over `panels` equal panels of `[a, b]`.
fn gauss_legendre_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let half = 0.5 * h;
    let mut rule = Vec::with_capacity(panels * 10);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            rule.push((mid - half * x, w * half));
            rule.push((mid + half * x, w * half));
        }
    }
    rule
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inner integral: `P(range ≤ w)` for `k` standard normals. The `φ(z)` factor
/// vanishes outside `|z| ≤ 8.5`, so the nodes are fixed and `Φ(z)` is tabulated once.
struct NormalRange {
    k: i32,
    /// `(z, weight·φ(z), Φ(z))`
    nodes: Vec<(f64, f64, f64)>,
}

impl NormalRange {
    fn new(k: usize) -> Self {
        let nodes = gauss_legendre_rule(-8.5, 8.5, 20)
            .into_iter()
            .map(|(z, w)| (z, w * normal_pdf(z), normal_cdf(z)))
            .collect();
        Self { k: k as i32, nodes }
    }

    fn cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .nodes
            .iter()
            .map(|&(z, wphi, phi)| wphi * (phi - normal_cdf(z - w)).powi(self.k - 1))
            .sum();
        (f64::from(self.k) * sum).min(1.0)
    }
}

fn check_args(k: usize, df: usize) -> Result<()> {
    if !(MIN_GROUPS..=MAX_GROUPS).contains(&k) {
        return Err(Error::UnsupportedDf(format!(
            "{k} groups outside supported {MIN_GROUPS}..={MAX_GROUPS}"
        )));
    }
    if !(MIN_DF..=MAX_DF).contains(&df) {
        return Err(Error::UnsupportedDf(format!(
            "df {df} outside supported {MIN_DF}..={MAX_DF}"
        )));
    }
    Ok(())
}

/// Studentized range distribution for fixed `(k, df)`, with its quadrature
/// rule precomputed.
pub struct StudentizedRange {
    inner: NormalRange,
    /// `(s, weight·f_ν(s))`
    outer: Vec<(f64, f64)>,
}

impl StudentizedRange {
    pub fn new(k: usize, df: usize) -> Result<Self> {
        check_args(k, df)?;
        let nu = df as f64;
        let log_norm = 0.5 * nu * nu.ln() - ln_gamma(0.5 * nu) - (0.5 * nu - 1.0) * 2f64.ln();
        let density = |s: f64| (log_norm + (nu - 1.0) * s.ln() - 0.5 * nu * s * s).exp();
        let mode = ((nu - 1.0) / nu).sqrt();
        let spread = 1.0 / (2.0 * nu).sqrt();
        let lo = (mode - 12.0 * spread).max(0.0);
        let hi = mode + 14.0 * spread;
        // Small df puts weight on small s, where the integrand changes fastest.
        let panels = if df < 10 { 160 } else { 24 };
        let outer = gauss_legendre_rule(lo, hi, panels)
            .into_iter()
            .map(|(s, w)| (s, w * density(s)))
            .collect();
        Ok(Self {
            inner: NormalRange::new(k),
            outer,
        })
    }

    /// `P(Q ≤ q)`.
    pub fn cdf(&self, q: f64) -> f64 {
        if q.is_nan() || q <= 0.0 {
            return 0.0;
        }
        if q.is_infinite() {
            return 1.0;
        }
        let p: f64 = self
            .outer
            .iter()
            .map(|&(s, w)| w * self.inner.cdf(q * s))
            .sum();
        p.clamp(0.0, 1.0)
    }

    /// `q` with `P(Q ≤ q) = prob`, by bracketed secant (Illinois) iteration.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "probability must be in (0, 1), got {prob}"
            )));
        }
        let g = |q: f64| self.cdf(q) - prob;
        let (mut a, mut b) = (0.0, 1.0);
        let (mut ga, mut gb) = (-prob, g(1.0));
        while gb < 0.0 {
            a = b;
            ga = gb;
            b *= 2.0;
            if b > 1e4 {
                return Err(Error::InvalidParameter(format!(
                    "quantile {prob} out of range"
                )));
            }
            gb = g(b);
        }
        let mut side = 0;
        for _ in 0..200 {
            let c = (a * gb - b * ga) / (gb - ga);
            let gc = g(c);
            if gc == 0.0 || (b - a).abs() <= 1e-12 * c.abs() {
                return Ok(c);
            }
            if gc < 0.0 {
                a = c;
                ga = gc;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                gb = gc;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
            if (b - a).abs() <= 1e-12 * b.abs() {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// `P(Q ≤ q)` for the studentized range with `k` groups and `df` error degrees of freedom.
pub fn studentized_range_cdf(q: f64, k: usize, df: usize) -> Result<f64> {
    if q.is_nan() {
        return Err(Error::InvalidParameter("q is NaN".into()));
    }
    Ok(StudentizedRange::new(k, df)?.cdf(q))
}

/// Upper critical point: `q` with `P(Q ≤ q) = prob`.
pub fn studentized_range_quantile(prob: f64, k: usize, df: usize) -> Result<f64> {
    StudentizedRange::new(k, df)?.quantile(prob)
}

/// Error degrees of freedom covered by the embedded critical-value tables.
pub const TABLE_DFS: [usize; 8] = [10, 12, 15, 20, 24, 30, 40, 60];

/// Upper 5 % points of the studentized range, groups 2..=10 per row.
pub const TABLE_05: [[f64; 9]; 8] = [
    [
        3.151, 3.877, 4.327, 4.654, 4.912, 5.124, 5.304, 5.460, 5.598,
    ],
    [
        3.081, 3.773, 4.199, 4.508, 4.750, 4.950, 5.119, 5.265, 5.395,
    ],
    [
        3.014, 3.673, 4.076, 4.367, 4.595, 4.782, 4.940, 5.077, 5.198,
    ],
    [
        2.950, 3.578, 3.958, 4.232, 4.445, 4.620, 4.768, 4.895, 5.008,
    ],
    [
        2.919, 3.532, 3.901, 4.166, 4.373, 4.541, 4.684, 4.807, 4.915,
    ],
    [
        2.888, 3.486, 3.845, 4.102, 4.301, 4.464, 4.601, 4.720, 4.824,
    ],
    [
        2.858, 3.442, 3.791, 4.039, 4.232, 4.388, 4.521, 4.634, 4.735,
    ],
    [
        2.829, 3.399, 3.737, 3.977, 4.163, 4.314, 4.441, 4.550, 4.646,
    ],
];

/// Upper 1 % points of the studentized range, groups 2..=10 per row.
pub const TABLE_01: [[f64; 9]; 8] = [
    [
        4.482, 5.270, 5.769, 6.136, 6.428, 6.669, 6.875, 7.054, 7.213,
    ],
    [
        4.320, 5.046, 5.502, 5.836, 6.101, 6.320, 6.507, 6.670, 6.814,
    ],
    [
        4.167, 4.836, 5.252, 5.556, 5.796, 5.994, 6.162, 6.309, 6.438,
    ],
    [
        4.024, 4.639, 5.018, 5.293, 5.510, 5.688, 5.839, 5.970, 6.086,
    ],
    [
        3.955, 4.546, 4.907, 5.168, 5.373, 5.542, 5.685, 5.809, 5.919,
    ],
    [
        3.889, 4.455, 4.799, 5.048, 5.242, 5.401, 5.536, 5.653, 5.756,
    ],
    [
        3.825, 4.367, 4.695, 4.931, 5.114, 5.265, 5.392, 5.502, 5.599,
    ],
    [
        3.762, 4.282, 4.594, 4.818, 4.991, 5.133, 5.253, 5.356, 5.447,
    ],
];

/// Tabulated critical value for `alpha` ∈ {0.05, 0.01}, if the table covers `(k, df)`.
pub fn table_critical_value(alpha: f64, k: usize, df: usize) -> Option<f64> {
    let table = if alpha == 0.05 {
        &TABLE_05
    } else if alpha == 0.01 {
        &TABLE_01
    } else {
        return None;
    };
    let row = TABLE_DFS.iter().position(|&d| d == df)?;
    (2..=10).contains(&k).then(|| table[row][k - 2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub i: usize,
    pub j: usize,
    /// `mean_i - mean_j`
    pub diff: f64,
    pub q: f64,
    pub p: f64,
    pub significant_05: bool,
    pub significant_01: bool,
}

/// All pairwise Tukey comparisons of condition means, using the ANOVA error term.
pub fn tukey_hsd(data: &[Vec<f64>], anova: &AnovaResult) -> Result<Vec<TukeyPair>> {
    let k = anova.condition_means.len();
    if data.len() != anova.subjects || data.iter().any(|r| r.len() != k) {
        return Err(Error::Input(
            "data shape does not match the ANOVA result".into(),
        ));
    }
    let dist = StudentizedRange::new(k, anova.df2)?;
    let crit_05 = dist.quantile(0.95)?;
    let crit_01 = dist.quantile(0.99)?;
    let se = (anova.ms_error / anova.subjects as f64).sqrt();
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let diff = anova.condition_means[i] - anova.condition_means[j];
            let q = if diff == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                diff.abs() / se
            };
            let p = 1.0 - dist.cdf(q);
            pairs.push(TukeyPair {
                i,
                j,
                diff,
                q,
                p,
                significant_05: q > crit_05,
                significant_01: q > crit_01,
            });
        }
    }
    Ok(pairs)
}
