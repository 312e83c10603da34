//! Two-slit interference, which-way marking and the delayed-choice quantum eraser.
//!
//! The slit amplitudes at screen position `x` are `ψ₁,₂(x) = G(x)·exp(±i k_f x/2)` with
//! `G(x) = exp(−x²/(4σ²))` and `k_f = π·d`. A marker qubit records the slit: `|m₁⟩ = |0⟩`,
//! `|m₂⟩ = γ|0⟩ + √(1−γ²)|1⟩`, so `γ = 0` is perfect marking and an unmarked run is `γ = 1`.
//! Erasure measures the marker in the conjugate basis `|±⟩ = (|0⟩ ± |1⟩)/√2`.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{c, Amplitude};
use crate::rng::{par_draws, pick, uniform, GENERATOR_ID};

/// Midpoint subsamples per bin for bin-integrated probabilities.
const SUBSAMPLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EraseTiming {
    BeforeScreen,
    AfterScreen,
}

impl FromStr for EraseTiming {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "before-screen" | "before" => Ok(EraseTiming::BeforeScreen),
            "after-screen" | "after" => Ok(EraseTiming::AfterScreen),
            other => Err(Error::Parse(format!("unknown erase timing '{other}'"))),
        }
    }
}

/// Basis in which the marker is read out when `erase` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerBasis {
    /// `|±⟩`, which erases the which-way record.
    Conjugate,
    /// `|0⟩, |1⟩`, which reads it.
    WhichWay,
}

impl MarkerBasis {
    pub fn labels(self) -> [&'static str; 2] {
        match self {
            MarkerBasis::Conjugate => ["+", "-"],
            MarkerBasis::WhichWay => ["slit1", "slit2"],
        }
    }

    fn bras(self) -> [[f64; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            MarkerBasis::Conjugate => [[h, h], [h, -h]],
            MarkerBasis::WhichWay => [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

impl FromStr for MarkerBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "conjugate" | "pm" => Ok(MarkerBasis::Conjugate),
            "which-way" | "marker" => Ok(MarkerBasis::WhichWay),
            other => Err(Error::Parse(format!("unknown marker basis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EraserConfig {
    pub slit_separation: f64,
    pub sigma: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub bins: usize,
    pub mark: bool,
    pub erase: bool,
    pub timing: EraseTiming,
    pub erase_basis: MarkerBasis,
    /// Marker overlap `⟨m₁|m₂⟩` for partial marking; `0` when marking is perfect.
    pub marker_overlap: f64,
}

impl Default for EraserConfig {
    /// Bin centers fall on multiples of 0.05, so both fringe maxima and zeros are sampled.
    fn default() -> Self {
        Self {
            slit_separation: 4.0,
            sigma: 1.0,
            x_min: -4.025,
            x_max: 4.025,
            bins: 161,
            mark: false,
            erase: false,
            timing: EraseTiming::BeforeScreen,
            erase_basis: MarkerBasis::Conjugate,
            marker_overlap: 0.0,
        }
    }
}

impl EraserConfig {
    pub fn unmarked() -> Self {
        Self::default()
    }

    pub fn marked() -> Self {
        Self { mark: true, ..Self::default() }
    }

    pub fn erased(timing: EraseTiming) -> Self {
        Self { mark: true, erase: true, timing, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64| Err(Error::OutOfRange { name, value });
        if self.slit_separation <= 0.0 || !self.slit_separation.is_finite() {
            return bad("slit_separation", self.slit_separation);
        }
        if self.sigma <= 0.0 || !self.sigma.is_finite() {
            return bad("sigma", self.sigma);
        }
        if self.bins < 16 {
            return bad("bins", self.bins as f64);
        }
        if !self.x_min.is_finite() || !self.x_max.is_finite() || self.x_min >= self.x_max {
            return Err(Error::InvalidConfig(format!("screen range [{}, {}] is empty", self.x_min, self.x_max)));
        }
        if !(0.0..=1.0).contains(&self.marker_overlap) {
            return bad("marker_overlap", self.marker_overlap);
        }
        if self.erase && !self.mark {
            return Err(Error::InvalidConfig("erasing requires a which-way mark".into()));
        }
        Ok(())
    }

    pub fn fringe_wavenumber(&self) -> f64 {
        std::f64::consts::PI * self.slit_separation
    }

    pub fn bin_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.bins as f64
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.bins).map(|i| self.x_min + (i as f64 + 0.5) * w).collect()
    }

    /// Effective overlap: unmarked paths share one marker state.
    fn overlap(&self) -> f64 {
        if self.mark {
            self.marker_overlap
        } else {
            1.0
        }
    }

    /// Marker components of `|m₂⟩`.
    fn m2(&self) -> [f64; 2] {
        let g = self.overlap();
        [g, (1.0 - g * g).max(0.0).sqrt()]
    }
}

/// `(ψ₁(x), ψ₂(x))`, unnormalized.
pub fn slit_amplitudes(x: f64, cfg: &EraserConfig) -> (Amplitude, Amplitude) {
    let g = (-x * x / (4.0 * cfg.sigma * cfg.sigma)).exp();
    let phase = cfg.fringe_wavenumber() * x / 2.0;
    (c(g * phase.cos(), g * phase.sin()), c(g * phase.cos(), -g * phase.sin()))
}

/// `|ψ₁|² + |ψ₂|²`.
fn envelope_density(x: f64, cfg: &EraserConfig) -> f64 {
    let (a, b) = slit_amplitudes(x, cfg);
    a.norm_sqr() + b.norm_sqr()
}

/// Density of (screen at `x`, marker outcome `k`) in `basis`.
fn branch_density(x: f64, k: usize, basis: MarkerBasis, cfg: &EraserConfig) -> f64 {
    let (a, b) = slit_amplitudes(x, cfg);
    let m2 = cfg.m2();
    let bra = basis.bras()[k];
    let amp = a * bra[0] + b * (bra[0] * m2[0] + bra[1] * m2[1]);
    amp.norm_sqr()
}

fn screen_density(x: f64, cfg: &EraserConfig) -> f64 {
    branch_density(x, 0, MarkerBasis::WhichWay, cfg) + branch_density(x, 1, MarkerBasis::WhichWay, cfg)
}

/// Evaluates `f` at each bin center, or averages it over midpoint subsamples.
fn per_bin(cfg: &EraserConfig, integrated: bool, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let w = cfg.bin_width();
    (0..cfg.bins)
        .map(|i| {
            let lo = cfg.x_min + i as f64 * w;
            if integrated {
                let h = w / SUBSAMPLES as f64;
                (0..SUBSAMPLES).map(|s| f(lo + (s as f64 + 0.5) * h)).sum::<f64>() / SUBSAMPLES as f64
            } else {
                f(lo + 0.5 * w)
            }
        })
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|p| *p /= total);
    }
    total
}

/// Which series of a histogram a visibility refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Series {
    Screen,
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenHistogram {
    pub bin_centers: Vec<f64>,
    /// Unconditional screen distribution, summing to 1.
    pub p: Vec<f64>,
    /// Conditional distributions given marker outcome 0 and 1 of the erase basis.
    pub p_plus: Option<Vec<f64>>,
    pub p_minus: Option<Vec<f64>>,
    /// Probability of each marker outcome.
    pub marker_probabilities: Option<[f64; 2]>,
    pub marker_labels: Option<[String; 2]>,
    /// Normalized `|ψ₁|² + |ψ₂|²` on the same bins, the no-fringe reference.
    pub envelope: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    pub counts_plus: Option<Vec<u64>>,
    pub counts_minus: Option<Vec<u64>>,
    pub n_particles: Option<usize>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
}

impl ScreenHistogram {
    pub fn series(&self, s: Series) -> Option<&[f64]> {
        match s {
            Series::Screen => Some(&self.p),
            Series::Plus => self.p_plus.as_deref(),
            Series::Minus => self.p_minus.as_deref(),
        }
    }

    /// `(max − min)/(max + min)` of the fringe factor `p/envelope` over bins with `|x| ≤ half_width`.
    pub fn visibility(&self, s: Series, half_width: f64) -> Option<f64> {
        let p = self.series(s)?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for ((x, v), e) in self.bin_centers.iter().zip(p).zip(&self.envelope) {
            if x.abs() <= half_width + 1e-12 && *e > 0.0 {
                let r = v / e;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (hi + lo > 0.0).then(|| (hi - lo) / (hi + lo))
    }

    /// CSV with columns `bin_center,p,p_plus,p_minus`; absent conditionals are empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_center,p,p_plus,p_minus")?;
        let cell = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| v[i].to_string()).unwrap_or_default();
        for (i, x) in self.bin_centers.iter().enumerate() {
            writeln!(w, "{},{},{},{}", x, self.p[i], cell(&self.p_plus, i), cell(&self.p_minus, i))?;
        }
        Ok(())
    }
}

/// Joint probabilities `law[bin][k]` of screen bin and marker outcome in `basis`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLaw {
    pub basis: MarkerBasis,
    pub law: Vec<[f64; 2]>,
}

impl JointLaw {
    pub fn screen_marginal(&self) -> Vec<f64> {
        self.law.iter().map(|r| r[0] + r[1]).collect()
    }

    pub fn marker_marginal(&self) -> [f64; 2] {
        self.law.iter().fold([0.0; 2], |acc, r| [acc[0] + r[0], acc[1] + r[1]])
    }

    pub fn max_abs_diff(&self, other: &JointLaw) -> f64 {
        self.law
            .iter()
            .zip(&other.law)
            .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
            .fold(0.0, f64::max)
    }
}

fn branch_tables(cfg: &EraserConfig, basis: MarkerBasis, integrated: bool) -> [Vec<f64>; 2] {
    [0, 1].map(|k| per_bin(cfg, integrated, |x| branch_density(x, k, basis, cfg)))
}

/// The joint law computed in the order the timing prescribes.
///
/// Before the screen: marker outcome first, then the screen position given that outcome.
/// After the screen: position first, then the marker outcome given the position.
pub fn joint_law(cfg: &EraserConfig, timing: EraseTiming, integrated: bool) -> Result<JointLaw> {
    cfg.validate()?;
    let basis = cfg.erase_basis;
    let branches = branch_tables(cfg, basis, integrated);
    let total: f64 = branches.iter().flatten().sum();
    let law = match timing {
        EraseTiming::BeforeScreen => {
            let pk = [0, 1].map(|k| branches[k].iter().sum::<f64>() / total);
            (0..cfg.bins)
                .map(|i| {
                    [0, 1].map(|k| {
                        let mass: f64 = branches[k].iter().sum();
                        if mass > 0.0 {
                            pk[k] * branches[k][i] / mass
                        } else {
                            0.0
                        }
                    })
                })
                .collect()
        }
        EraseTiming::AfterScreen => (0..cfg.bins)
            .map(|i| {
                let px = (branches[0][i] + branches[1][i]) / total;
                let both = branches[0][i] + branches[1][i];
                [0, 1].map(|k| if both > 0.0 { px * branches[k][i] / both } else { 0.0 })
            })
            .collect(),
    };
    Ok(JointLaw { basis, law })
}

fn conditionals(law: &JointLaw) -> ([f64; 2], [Vec<f64>; 2]) {
    let pk = law.marker_marginal();
    let cond = [0, 1].map(|k| law.law.iter().map(|r| if pk[k] > 0.0 { r[k] / pk[k] } else { 0.0 }).collect());
    (pk, cond)
}

/// Point densities at the bin centers, normalized over the grid.
pub fn analytic_histogram(cfg: &EraserConfig) -> Result<ScreenHistogram> {
    cfg.validate()?;
    let mut envelope = per_bin(cfg, false, |x| envelope_density(x, cfg));
    normalize(&mut envelope);
    let mut p = per_bin(cfg, false, |x| screen_density(x, cfg));
    normalize(&mut p);
    let mut hist = ScreenHistogram {
        bin_centers: cfg.bin_centers(),
        p,
        p_plus: None,
        p_minus: None,
        marker_probabilities: None,
        marker_labels: None,
        envelope,
        counts: None,
        counts_plus: None,
        counts_minus: None,
        n_particles: None,
        seed: None,
        generator: None,
    };
    if cfg.erase {
        let (pk, [plus, minus]) = conditionals(&joint_law(cfg, cfg.timing, false)?);
        hist.p_plus = Some(plus);
        hist.p_minus = Some(minus);
        hist.marker_probabilities = Some(pk);
        hist.marker_labels = Some(cfg.erase_basis.labels().map(String::from));
    }
    Ok(hist)
}

/// Bin-integrated joint law shared by both timings; outcome-major `[bin][k]`.
///
/// With no erasure the marker is not read and only the screen column is used.
fn sampling_table(cfg: &EraserConfig) -> Result<Vec<f64>> {
    if cfg.erase {
        let law = joint_law(cfg, EraseTiming::AfterScreen, true)?;
        Ok(law.law.iter().flat_map(|r| [r[0], r[1]]).collect())
    } else {
        let mut p = per_bin(cfg, true, |x| screen_density(x, cfg));
        normalize(&mut p);
        Ok(p)
    }
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Seeded particle sampling; the histogram does not depend on `erase_timing`.
pub fn screen_distribution(cfg: &EraserConfig, seed: u64, n_particles: usize) -> Result<ScreenHistogram> {
    let erase = vec![cfg.erase; n_particles];
    sample(cfg, seed, &erase)
}

/// Marker measured in the erase basis; conditionals are filled.
pub fn erase_and_condition(cfg: &EraserConfig, seed: u64, n_particles: usize) -> Result<ScreenHistogram> {
    if !cfg.mark {
        return Err(Error::InvalidConfig("erasing requires a which-way mark".into()));
    }
    screen_distribution(&EraserConfig { erase: true, ..cfg.clone() }, seed, n_particles)
}

fn sample(cfg: &EraserConfig, seed: u64, erase: &[bool]) -> Result<ScreenHistogram> {
    cfg.validate()?;
    let n = erase.len();
    if n == 0 {
        return Err(Error::OutOfRange { name: "n_particles", value: 0.0 });
    }
    let on = EraserConfig { erase: cfg.mark, ..cfg.clone() };
    let off = EraserConfig { erase: false, ..cfg.clone() };
    let cum_on = cumulative(&sampling_table(&on)?);
    let cum_off = cumulative(&sampling_table(&off)?);
    let draws = par_draws(n, seed, |i, rng| {
        let u = uniform(rng);
        if erase[i] && cfg.mark {
            let j = pick(&cum_on, u * cum_on[cum_on.len() - 1]);
            (j / 2, Some(j % 2))
        } else {
            (pick(&cum_off, u * cum_off[cum_off.len() - 1]), None)
        }
    });
    let bins = cfg.bins;
    let mut counts = vec![0u64; bins];
    let mut by_marker = [vec![0u64; bins], vec![0u64; bins]];
    for (bin, k) in &draws {
        counts[*bin] += 1;
        if let Some(k) = k {
            by_marker[*k][*bin] += 1;
        }
    }
    let mut envelope = per_bin(cfg, true, |x| envelope_density(x, cfg));
    normalize(&mut envelope);
    let freq = |c: &[u64]| -> Vec<f64> {
        let total: u64 = c.iter().sum();
        c.iter().map(|&k| if total > 0 { k as f64 / total as f64 } else { 0.0 }).collect()
    };
    let any_erased = cfg.mark && erase.iter().any(|&e| e);
    let n_erased: u64 = by_marker.iter().flatten().sum();
    let [plus, minus] = by_marker;
    Ok(ScreenHistogram {
        bin_centers: cfg.bin_centers(),
        p: freq(&counts),
        p_plus: any_erased.then(|| freq(&plus)),
        p_minus: any_erased.then(|| freq(&minus)),
        marker_probabilities: any_erased.then(|| {
            let np: u64 = plus.iter().sum();
            [np as f64 / n_erased as f64, (n_erased - np) as f64 / n_erased as f64]
        }),
        marker_labels: any_erased.then(|| cfg.erase_basis.labels().map(String::from)),
        envelope,
        counts: Some(counts),
        counts_plus: any_erased.then_some(plus),
        counts_minus: any_erased.then_some(minus),
        n_particles: Some(n),
        seed: Some(seed),
        generator: Some(GENERATOR_ID.into()),
    })
}

/// Parses a choice sequence: one `0` or `1` per line, blank lines and `#` comments ignored.
pub fn parse_choices(text: &str) -> Result<Vec<bool>> {
    text.lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| match l {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Parse(format!("choice line {}: expected 0 or 1, got '{other}'", n + 1))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiceRun {
    /// Every particle, conditionals over the erased ones.
    pub all: ScreenHistogram,
    /// Particles whose marker was read in the erase basis.
    pub erased: ScreenHistogram,
    /// Particles whose marker was left alone.
    pub kept: ScreenHistogram,
    pub n_erased: usize,
    pub n_kept: usize,
    /// Largest per-bin difference of the two screen marginals in units of its standard error.
    pub max_marginal_z: f64,
}

/// One erase decision per particle; particle `i` follows `choices[i]`.
pub fn sample_with_choices(cfg: &EraserConfig, seed: u64, choices: &[bool]) -> Result<ChoiceRun> {
    if !cfg.mark {
        return Err(Error::InvalidConfig("a choice sequence needs a which-way mark".into()));
    }
    let all = sample(cfg, seed, choices)?;
    let idx_e: Vec<usize> = (0..choices.len()).filter(|&i| choices[i]).collect();
    let n_erased = idx_e.len();
    let n_kept = choices.len() - n_erased;
    if n_erased == 0 || n_kept == 0 {
        return Err(Error::InvalidConfig("choice sequence must contain both 0 and 1".into()));
    }
    let plus = all.counts_plus.clone().expect("erased particles present");
    let minus = all.counts_minus.clone().expect("erased particles present");
    let counts = all.counts.clone().expect("sampled");
    let erased_counts: Vec<u64> = plus.iter().zip(&minus).map(|(a, b)| a + b).collect();
    let kept_counts: Vec<u64> = counts.iter().zip(&erased_counts).map(|(a, b)| a - b).collect();
    let freq = |c: &[u64], n: usize| -> Vec<f64> { c.iter().map(|&k| k as f64 / n as f64).collect() };
    let pe = freq(&erased_counts, n_erased);
    let pk = freq(&kept_counts, n_kept);
    let max_marginal_z = pe
        .iter()
        .zip(&pk)
        .zip(&all.p)
        .map(|((a, b), pool)| {
            let se = (pool * (1.0 - pool) * (1.0 / n_erased as f64 + 1.0 / n_kept as f64)).sqrt();
            if se > 0.0 {
                (a - b).abs() / se
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let erased = ScreenHistogram {
        p: pe,
        counts: Some(erased_counts),
        n_particles: Some(n_erased),
        ..all.clone()
    };
    let kept = ScreenHistogram {
        p: pk,
        p_plus: None,
        p_minus: None,
        marker_probabilities: None,
        marker_labels: None,
        counts: Some(kept_counts),
        counts_plus: None,
        counts_minus: None,
        n_particles: Some(n_kept),
        ..all.clone()
    };
    Ok(ChoiceRun { all, erased, kept, n_erased, n_kept, max_marginal_z })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// Largest difference between the joint laws computed marker-first and screen-first.
    pub max_joint_diff: f64,
    /// Largest difference among screen marginals for: no erasure, erasure before and after the screen.
    pub max_marginal_diff: f64,
    pub seeds: Vec<u64>,
    /// Paired-seed histograms for both timings were identical.
    pub sampled_identical: bool,
    pub passed: bool,
}

/// Compares both erase timings exactly and with paired-seed sampling.
pub fn ordering_invariance_check(cfg: &EraserConfig, seeds: &[u64], n_particles: usize) -> Result<OrderingReport> {
    if !(cfg.mark && cfg.erase) {
        return Err(Error::InvalidConfig("ordering check needs mark and erase".into()));
    }
    let before = joint_law(cfg, EraseTiming::BeforeScreen, false)?;
    let after = joint_law(cfg, EraseTiming::AfterScreen, false)?;
    let max_joint_diff = before.max_abs_diff(&after);
    let no_erase = analytic_histogram(&EraserConfig { erase: false, ..cfg.clone() })?.p;
    let max_marginal_diff = [before.screen_marginal(), after.screen_marginal()]
        .iter()
        .flat_map(|m| m.iter().zip(&no_erase).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let mut sampled_identical = true;
    for &seed in seeds {
        let a = screen_distribution(&EraserConfig { timing: EraseTiming::BeforeScreen, ..cfg.clone() }, seed, n_particles)?;
        let b = screen_distribution(&EraserConfig { timing: EraseTiming::AfterScreen, ..cfg.clone() }, seed, n_particles)?;
        sampled_identical &= a == b;
    }
    let passed = max_joint_diff <= 1e-12 && max_marginal_diff <= 1e-12 && sampled_identical;
    Ok(OrderingReport { max_joint_diff, max_marginal_diff, seeds: seeds.to_vec(), sampled_identical, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitudes_share_envelope() {
        let cfg = EraserConfig::default();
        for x in [-3.1, -0.4, 0.0, 0.13, 2.5] {
            let (a, b) = slit_amplitudes(x, &cfg);
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let (a, b) = slit_amplitudes(0.0, &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn fringe_expansion() {
        let cfg = EraserConfig::default();
        let k = cfg.fringe_wavenumber();
        for x in [-1.7, -0.25, 0.0, 0.3, 1.1] {
            let (a, b) = slit_amplitudes(x, &cfg);
            let g2 = (-x * x / 2.0f64).exp();
            assert!(((a + b).norm_sqr() - 2.0 * g2 * (1.0 + (k * x).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grid_hits_fringe_extremes() {
        let cfg = EraserConfig::default();
        let centers = cfg.bin_centers();
        assert!(centers.iter().any(|x| x.abs() < 1e-12));
        assert!(centers.iter().any(|x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn analytic_visibilities() {
        let v = |cfg: EraserConfig, s: Series| analytic_histogram(&cfg).unwrap().visibility(s, 1.0).unwrap();
        assert!((v(EraserConfig::unmarked(), Series::Screen) - 1.0).abs() < 1e-9);
        assert!(v(EraserConfig::marked(), Series::Screen).abs() < 1e-9);
        let erased = EraserConfig::erased(EraseTiming::AfterScreen);
        assert!((v(erased.clone(), Series::Plus) - 1.0).abs() < 1e-9);
        assert!((v(erased, Series::Minus) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_marking_visibility_is_overlap() {
        let cfg = EraserConfig { marker_overlap: 0.4, ..EraserConfig::marked() };
        let v = analytic_histogram(&cfg).unwrap().visibility(Series::Screen, 1.0).unwrap();
        assert!((v - 0.4).abs() < 1e-9);
    }

    #[test]
    fn which_way_conditionals_are_flat() {
        let cfg = EraserConfig { erase_basis: MarkerBasis::WhichWay, ..EraserConfig::erased(EraseTiming::BeforeScreen) };
        let h = analytic_histogram(&cfg).unwrap();
        assert!(h.visibility(Series::Plus, 1.0).unwrap() < 1e-9);
        assert!(h.visibility(Series::Minus, 1.0).unwrap() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(EraserConfig { bins: 8, ..Default::default() }.validate().is_err());
        assert!(EraserConfig { sigma: 0.0, ..Default::default() }.validate().is_err());
        assert!(EraserConfig { x_min: 1.0, x_max: 1.0, ..Default::default() }.validate().is_err());
        assert!(EraserConfig { erase: true, ..Default::default() }.validate().is_err());
        assert!(EraserConfig { marker_overlap: 1.5, ..EraserConfig::marked() }.validate().is_err());
    }

    #[test]
    fn timings_agree() {
        let r = ordering_invariance_check(&EraserConfig::erased(EraseTiming::BeforeScreen), &[1, 2], 5000).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn choices_parse() {
        assert_eq!(parse_choices("0\n1\n# c\n\n1\n").unwrap(), vec![false, true, true]);
        assert!(parse_choices("0\n2\n").is_err());
    }

    #[test]
    fn csv_layout() {
        let h = analytic_histogram(&EraserConfig::erased(EraseTiming::BeforeScreen)).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("bin_center,p,p_plus,p_minus"));
        assert_eq!(text.lines().count(), 162);
    }
}
