// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic sequences `x_j = mu_j + eps_j` and replicated experiments.
//!
//! Randomness comes from ChaCha8 seeded with a `u64`. Replicate `r` of an
//! experiment with master seed `s` draws from stream `r` of the generator
//! seeded with `s` (see [`replicate_rng`]), so replicates are independent of
//! each other and of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;

use crate::detect::{detect, DetectionParams};
use crate::error::{Error, Result};
use crate::evaluate::classify;
use crate::inference::{annotate_p_values, filter_by_p};
use crate::segment::{validate_separated, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseFamily {
    /// IID standard normal.
    Gaussian,
    /// IID Student-t with `df` degrees of freedom (unscaled).
    StudentT { df: f64 },
    /// Stationary Gaussian AR(1) with unit marginal variance.
    Ar1 { rho: f64 },
}

impl NoiseFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseFamily::Gaussian => Ok(()),
            NoiseFamily::StudentT { df } if df > 0.0 && df.is_finite() => Ok(()),
            NoiseFamily::StudentT { df } => Err(Error::param(format!(
                "Student-t degrees of freedom must be positive; got {df}"
            ))),
            NoiseFamily::Ar1 { rho } if rho.abs() < 1.0 => Ok(()),
            NoiseFamily::Ar1 { rho } => Err(Error::param(format!(
                "AR(1) coefficient must satisfy |rho| < 1; got {rho}"
            ))),
        }
    }

    /// Marginal CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            NoiseFamily::Gaussian | NoiseFamily::Ar1 { .. } => normal_cdf(x),
            NoiseFamily::StudentT { df } => student_t_cdf(x, df),
        }
    }

    /// Marginal quantile function, `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param(format!(
                "quantile level must lie in (0, 1); got {p}"
            )));
        }
        self.validate()?;
        Ok(match *self {
            NoiseFamily::Gaussian | NoiseFamily::Ar1 { .. } => normal_quantile(p),
            NoiseFamily::StudentT { df } => student_t_quantile(p, df),
        })
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Student-t CDF through the regularized incomplete beta function.
pub fn student_t_cdf(x: f64, df: f64) -> f64 {
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, df / (df + x * x));
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Inverts [`student_t_cdf`] by bisection to an absolute tolerance of 1e-12.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p < 0.5 {
        return -student_t_quantile(1.0 - p, df);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while student_t_cdf(hi, df) < p {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Multiplies every noise draw; 0 gives a noiseless sequence.
    pub scale: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, seed: u64) -> Self {
        Self {
            family,
            scale: 1.0,
            seed,
        }
    }

    pub fn gaussian(seed: u64) -> Self {
        Self::new(NoiseFamily::Gaussian, seed)
    }

    pub fn student_t3(seed: u64) -> Self {
        Self::new(NoiseFamily::StudentT { df: 3.0 }, seed)
    }

    pub fn ar1(rho: f64, seed: u64) -> Self {
        Self::new(NoiseFamily::Ar1 { rho }, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::param(format!(
                "noise scale must be finite and non-negative; got {}",
                self.scale
            )));
        }
        self.family.validate()
    }
}

/// Ground truth: a length and a set of constant-height signal segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub seq_len: usize,
    pub segments: Vec<(Segment, f64)>,
}

impl SignalModel {
    pub fn new(seq_len: usize, segments: Vec<(Segment, f64)>) -> Result<Self> {
        let model = Self { seq_len, segments };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 {
            return Err(Error::InvalidModel(
                "sequence length must be positive".into(),
            ));
        }
        let segs = self.truth();
        validate_separated(&segs).map_err(|e| Error::InvalidModel(e.to_string()))?;
        if let Some(last) = segs.last() {
            if last.end > self.seq_len {
                return Err(Error::InvalidModel(format!(
                    "segment {last} extends past the sequence end {}",
                    self.seq_len
                )));
            }
        }
        for (seg, height) in &self.segments {
            if *height == 0.0 || !height.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "segment {seg} has height {height}; heights must be finite and nonzero"
                )));
            }
        }
        Ok(())
    }

    pub fn truth(&self) -> Vec<Segment> {
        self.segments.iter().map(|(s, _)| *s).collect()
    }

    /// The mean vector `mu`.
    pub fn means(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.seq_len];
        for (seg, height) in &self.segments {
            mu[seg.range()].fill(*height);
        }
        mu
    }
}

/// Signal strength for the two-level signal model: the 99th (`S1`) or
/// 97th (`S2`) percentile of the marginal noise distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalLevel {
    S1,
    S2,
}

impl SignalLevel {
    pub fn quantile_level(self) -> f64 {
        match self {
            SignalLevel::S1 => 0.99,
            SignalLevel::S2 => 0.97,
        }
    }
}

/// All-zero mean.
pub fn null_model(n: usize) -> Result<SignalModel> {
    SignalModel::new(n, Vec::new())
}

pub const FIVE_SEGMENT_LENGTHS: [usize; 5] = [8, 16, 24, 32, 40];
const FIVE_SEGMENT_FIRST_START: usize = 1000;
const FIVE_SEGMENT_MIN_GAP: usize = 100;

/// Five segments of lengths 8, 16, 24, 32, 40, in that order.
///
/// The first segment starts at position 1000 and the last one ends at
/// `n - 999`; the four gaps between them are equal (any remainder is left
/// at the end of the sequence).
pub fn five_segment_model(
    n: usize,
    noise: &NoiseFamily,
    level: SignalLevel,
) -> Result<SignalModel> {
    let height = noise.quantile(level.quantile_level())?;
    let total: usize = FIVE_SEGMENT_LENGTHS.iter().sum();
    let margins = 2 * (FIVE_SEGMENT_FIRST_START - 1);
    let room = n.saturating_sub(margins + total);
    let gap = room / (FIVE_SEGMENT_LENGTHS.len() - 1);
    if gap < FIVE_SEGMENT_MIN_GAP {
        return Err(Error::InvalidModel(format!(
            "n = {n} is too small to place the five segments with gaps of at least {FIVE_SEGMENT_MIN_GAP}"
        )));
    }
    let mut segments = Vec::with_capacity(FIVE_SEGMENT_LENGTHS.len());
    let mut start = FIVE_SEGMENT_FIRST_START;
    for len in FIVE_SEGMENT_LENGTHS {
        let seg = Segment::new(start, start + len - 1)?;
        segments.push((seg, height));
        start = seg.end + 1 + gap;
    }
    SignalModel::new(n, segments)
}

/// Generator for replicate `rep` under master seed `seed`.
pub fn replicate_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Draws `x = mu + eps` with the generator seeded from `noise.seed`.
pub fn generate(model: &SignalModel, noise: &NoiseSpec) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    generate_with(model, noise, &mut rng)
}

/// Like [`generate`] but draws from the supplied generator; `noise.seed`
/// is ignored.
pub fn generate_with<R: Rng + ?Sized>(
    model: &SignalModel,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    model.validate()?;
    noise.validate()?;
    let mut x = model.means();
    let scale = noise.scale;
    match noise.family {
        NoiseFamily::Gaussian => {
            for v in &mut x {
                let z: f64 = rng.sample(StandardNormal);
                *v += scale * z;
            }
        }
        NoiseFamily::StudentT { df } => {
            let dist = StudentT::new(df).map_err(|e| Error::param(e.to_string()))?;
            for v in &mut x {
                *v += scale * dist.sample(rng);
            }
        }
        NoiseFamily::Ar1 { rho } => {
            let innovation = (1.0 - rho * rho).sqrt();
            // start from the stationary marginal
            let mut prev: f64 = rng.sample(StandardNormal);
            for (i, v) in x.iter_mut().enumerate() {
                if i > 0 {
                    let z: f64 = rng.sample(StandardNormal);
                    prev = rho * prev + innovation * z;
                }
                *v += scale * prev;
            }
        }
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Standard error of the mean; zero for a single replicate.
    pub se: f64,
}

impl MeanSe {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Self { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

/// Outcome of one p-value level over all replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    /// `None` for the unfiltered detector.
    pub p_max: Option<f64>,
    pub tp: MeanSe,
    pub fp: MeanSe,
    /// Fraction of replicates where every signal segment was identified.
    pub all_identified: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub reps: usize,
    pub levels: Vec<LevelSummary>,
}

impl ExperimentReport {
    pub fn level(&self, p_max: Option<f64>) -> Option<&LevelSummary> {
        self.levels.iter().find(|l| l.p_max == p_max)
    }
}

/// `(tp, fp, all identified)` per level for one replicate.
type RepOutcome = Vec<(usize, usize, bool)>;

/// Runs `reps` independent replicates of generate, detect, annotate and
/// evaluate. The first level of the report is the unfiltered detector,
/// followed by one level per entry of `p_levels`.
pub fn run_replicated(
    model: &SignalModel,
    noise: &NoiseSpec,
    params: &DetectionParams,
    p_levels: &[f64],
    reps: usize,
) -> Result<ExperimentReport> {
    if reps == 0 {
        return Err(Error::param("at least one replicate is required"));
    }
    model.validate()?;
    noise.validate()?;
    params.validate()?;
    let truth = model.truth();
    let need_p = !p_levels.is_empty();

    let outcomes: Vec<RepOutcome> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(noise.seed, rep);
            let x = generate_with(model, noise, &mut rng)?;
            let mut result = detect(&x, params)?;
            if need_p {
                result = annotate_p_values(result)?;
            }
            let mut out = Vec::with_capacity(1 + p_levels.len());
            let score = |segs: Vec<Segment>| -> Result<(usize, usize, bool)> {
                let c = classify(&truth, &segs)?;
                Ok((c.tp, c.fp, c.identified == truth.len()))
            };
            out.push(score(result.plain_segments())?);
            for &p in p_levels {
                out.push(score(filter_by_p(result.clone(), p)?.plain_segments())?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let level_keys = std::iter::once(None).chain(p_levels.iter().map(|&p| Some(p)));
    let levels = level_keys
        .enumerate()
        .map(|(i, p_max)| {
            let tp: Vec<f64> = outcomes.iter().map(|o| o[i].0 as f64).collect();
            let fp: Vec<f64> = outcomes.iter().map(|o| o[i].1 as f64).collect();
            let all = outcomes.iter().filter(|o| o[i].2).count();
            LevelSummary {
                p_max,
                tp: MeanSe::from_samples(&tp),
                fp: MeanSe::from_samples(&fp),
                all_identified: all as f64 / reps as f64,
            }
        })
        .collect();
    Ok(ExperimentReport { reps, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: usize, b: usize) -> Segment {
        Segment::new(a, b).unwrap()
    }

    #[test]
    fn zero_noise_reproduces_mean() {
        let model = SignalModel::new(50, vec![(seg(10, 14), 3.0), (seg(30, 31), -2.0)]).unwrap();
        for family in [
            NoiseFamily::Gaussian,
            NoiseFamily::StudentT { df: 3.0 },
            NoiseFamily::Ar1 { rho: 0.2 },
        ] {
            let noise = NoiseSpec {
                family,
                scale: 0.0,
                seed: 3,
            };
            assert_eq!(generate(&model, &noise).unwrap(), model.means());
        }
    }

    #[test]
    fn seeds_determine_sequences() {
        let model = null_model(1000).unwrap();
        for noise in [
            NoiseSpec::gaussian(1),
            NoiseSpec::student_t3(1),
            NoiseSpec::ar1(0.2, 1),
        ] {
            let a = generate(&model, &noise).unwrap();
            let b = generate(&model, &noise).unwrap();
            assert_eq!(a, b);
            let other = NoiseSpec { seed: 2, ..noise };
            assert_ne!(a, generate(&model, &other).unwrap());
        }
    }

    #[test]
    fn replicate_streams_differ() {
        let mut a = replicate_rng(7, 0);
        let mut b = replicate_rng(7, 1);
        let va: u64 = a.random();
        let vb: u64 = b.random();
        assert_ne!(va, vb);
        let vc: u64 = replicate_rng(7, 0).random();
        assert_eq!(va, vc);
    }

    #[test]
    fn model_validation() {
        assert!(SignalModel::new(20, vec![(seg(1, 5), 1.0), (seg(5, 8), 1.0)]).is_err());
        assert!(SignalModel::new(20, vec![(seg(1, 5), 1.0), (seg(6, 8), 1.0)]).is_err());
        assert!(SignalModel::new(20, vec![(seg(15, 21), 1.0)]).is_err());
        assert!(SignalModel::new(20, vec![(seg(15, 20), 0.0)]).is_err());
        assert!(SignalModel::new(0, vec![]).is_err());
        assert!(NoiseSpec::ar1(1.0, 0).validate().is_err());
        assert!(NoiseSpec::new(NoiseFamily::StudentT { df: 0.0 }, 0)
            .validate()
            .is_err());
    }

    #[test]
    fn null_model_is_empty() {
        assert!(null_model(10_000).unwrap().segments.is_empty());
        assert!(null_model(1).unwrap().segments.is_empty());
    }

    #[test]
    fn five_segment_gaussian_heights() {
        let s1 = five_segment_model(10_000, &NoiseFamily::Gaussian, SignalLevel::S1).unwrap();
        let s2 = five_segment_model(10_000, &NoiseFamily::Gaussian, SignalLevel::S2).unwrap();
        assert!((s1.segments[0].1 - 2.326).abs() < 5e-4);
        assert!((s2.segments[0].1 - 1.881).abs() < 5e-4);
    }

    #[test]
    fn five_segment_layout() {
        let m = five_segment_model(10_000, &NoiseFamily::Gaussian, SignalLevel::S1).unwrap();
        let truth = m.truth();
        let lens: Vec<usize> = truth.iter().map(Segment::len).collect();
        assert_eq!(lens, FIVE_SEGMENT_LENGTHS);
        assert_eq!(truth[0].start, 1000);
        assert!(truth[4].end <= 10_000 - 999);
        let gaps: Vec<usize> = truth
            .windows(2)
            .map(|w| w[1].start - w[0].end - 1)
            .collect();
        assert!(gaps.iter().all(|&g| g == gaps[0]));
        assert!(five_segment_model(2_000, &NoiseFamily::Gaussian, SignalLevel::S1).is_err());
    }

    #[test]
    fn student_t_quantile_matches_closed_form_cdf() {
        // closed-form CDF of t with 3 degrees of freedom
        let cdf3 = |x: f64| {
            let u = x / 3f64.sqrt();
            0.5 + (u.atan() + u / (1.0 + u * u)) / std::f64::consts::PI
        };
        for p in [0.6, 0.9, 0.97, 0.99, 0.999] {
            let q = student_t_quantile(p, 3.0);
            assert!((cdf3(q) - p).abs() < 1e-10, "p = {p}");
        }
        assert!((student_t_quantile(0.99, 3.0) - 4.540_702_858_568_132).abs() < 1e-8);
        assert!((student_t_quantile(0.01, 3.0) + 4.540_702_858_568_132).abs() < 1e-8);
    }

    #[test]
    fn single_replicate_matches_direct_evaluation() {
        let model = five_segment_model(10_000, &NoiseFamily::Gaussian, SignalLevel::S1).unwrap();
        let noise = NoiseSpec::gaussian(11);
        let params = DetectionParams::percentile(0.95, 9, 3).unwrap();
        let report = run_replicated(&model, &noise, &params, &[0.05], 1).unwrap();

        let x = generate_with(&model, &noise, &mut replicate_rng(11, 0)).unwrap();
        let r = annotate_p_values(detect(&x, &params).unwrap()).unwrap();
        let vanilla = classify(&model.truth(), &r.plain_segments()).unwrap();
        let filtered = classify(
            &model.truth(),
            &filter_by_p(r, 0.05).unwrap().plain_segments(),
        )
        .unwrap();

        assert_eq!(report.reps, 1);
        assert_eq!(report.levels[0].tp.mean, vanilla.tp as f64);
        assert_eq!(report.levels[0].fp.mean, vanilla.fp as f64);
        assert_eq!(report.levels[1].tp.mean, filtered.tp as f64);
        assert_eq!(report.levels[1].fp.mean, filtered.fp as f64);
        assert_eq!(report.levels[0].tp.se, 0.0);
    }

    #[test]
    fn replicated_runs_are_deterministic() {
        let model = null_model(2_000).unwrap();
        let noise = NoiseSpec::student_t3(5);
        let params = DetectionParams::percentile(0.95, 9, 3).unwrap();
        let a = run_replicated(&model, &noise, &params, &[0.1], 8).unwrap();
        let b = run_replicated(&model, &noise, &params, &[0.1], 8).unwrap();
        assert_eq!(a, b);
        let other = NoiseSpec { seed: 6, ..noise };
        assert_ne!(
            a,
            run_replicated(&model, &other, &params, &[0.1], 8).unwrap()
        );
        assert!(run_replicated(&model, &noise, &params, &[], 0).is_err());
    }

    #[test]
    fn mean_se_formula() {
        let m = MeanSe::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
