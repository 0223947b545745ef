//! Noise laws for the discrete equation and their one-dimensional marginals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::rng::{standard_normal, PathRng};

const PROB_TOL: f64 = 1e-12;
/// Absolute tolerance for truncated moments of densities.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseFamily {
    /// Standard normal components.
    GaussianIid,
    TwoPoint { outcomes: [f64; 2], probs: [f64; 2] },
    Uniform { low: f64, high: f64 },
    FiniteDiscrete { outcomes: Vec<f64>, probs: Vec<f64> },
    /// Uniform draw from a fixed sample (an empirical law).
    CustomSampled { samples: Vec<f64> },
}

impl NoiseFamily {
    pub fn is_gaussian(&self) -> bool {
        matches!(self, NoiseFamily::GaussianIid)
    }

    fn validate(&self) -> Result<()> {
        let table = |outcomes: &[f64], probs: &[f64]| -> Result<()> {
            if outcomes.len() != probs.len() || outcomes.is_empty() {
                return Err(Error::InvalidParameter(
                    "outcome and probability tables must be non-empty and of equal length".into(),
                ));
            }
            if outcomes.iter().chain(probs).any(|v| !v.is_finite())
                || probs.iter().any(|&p| p < 0.0)
            {
                return Err(Error::InvalidParameter(
                    "outcomes must be finite and probabilities non-negative".into(),
                ));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidParameter(format!(
                    "probabilities must sum to 1, got {total}"
                )));
            }
            Ok(())
        };
        match self {
            NoiseFamily::GaussianIid => Ok(()),
            NoiseFamily::TwoPoint { outcomes, probs } => table(outcomes, probs),
            NoiseFamily::FiniteDiscrete { outcomes, probs } => table(outcomes, probs),
            NoiseFamily::Uniform { low, high } => {
                if low.is_finite() && high.is_finite() && low < high {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "uniform law needs finite low < high, got [{low}, {high}]"
                    )))
                }
            }
            NoiseFamily::CustomSampled { samples } => {
                if samples.is_empty() || samples.iter().any(|v| !v.is_finite()) {
                    Err(Error::InvalidParameter(
                        "custom-sampled law needs a non-empty finite sample".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut PathRng) -> f64 {
        match self {
            NoiseFamily::GaussianIid => standard_normal(rng),
            NoiseFamily::TwoPoint { outcomes, probs } => {
                if rng.random::<f64>() < probs[0] {
                    outcomes[0]
                } else {
                    outcomes[1]
                }
            }
            NoiseFamily::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            NoiseFamily::FiniteDiscrete { outcomes, probs } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for (x, p) in outcomes.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *x;
                    }
                }
                *outcomes.last().expect("validated non-empty")
            }
            NoiseFamily::CustomSampled { samples } => samples[rng.random_range(0..samples.len())],
        }
    }

    /// Law of a single component.
    pub fn marginal(&self) -> ComponentLaw {
        match self {
            NoiseFamily::GaussianIid => ComponentLaw::continuous(ContinuousPart::Normal {
                mean: 0.0,
                sd: 1.0,
            }),
            NoiseFamily::Uniform { low, high } => ComponentLaw::continuous(ContinuousPart::Uniform {
                low: *low,
                high: *high,
            }),
            NoiseFamily::TwoPoint { outcomes, probs } => {
                ComponentLaw::discrete(outcomes.iter().copied().zip(probs.iter().copied()).collect())
            }
            NoiseFamily::FiniteDiscrete { outcomes, probs } => {
                ComponentLaw::discrete(outcomes.iter().copied().zip(probs.iter().copied()).collect())
            }
            NoiseFamily::CustomSampled { samples } => {
                let w = 1.0 / samples.len() as f64;
                ComponentLaw::discrete(samples.iter().map(|&x| (x, w)).collect())
            }
        }
    }
}

fn default_true() -> bool {
    true
}

/// Law of the `R^m`-valued noise `ξ(n)`. Dependent components share a single
/// scalar draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    #[serde(default = "default_true")]
    pub independent_components: bool,
    pub dim: usize,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, independent_components: bool, dim: usize) -> Result<Self> {
        let spec = Self {
            family,
            independent_components,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(dim: usize) -> Self {
        Self {
            family: NoiseFamily::GaussianIid,
            independent_components: true,
            dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("noise dimension must be positive".into()));
        }
        self.family.validate()
    }

    /// Gaussian with independent components: the only law allowed with a
    /// non-diagonal diffusion.
    pub fn is_standard_gaussian(&self) -> bool {
        self.family.is_gaussian() && self.independent_components
    }

    pub fn sample_into(&self, rng: &mut PathRng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        if self.independent_components {
            for v in out.iter_mut() {
                *v = self.family.sample(rng);
            }
        } else {
            out.fill(self.family.sample(rng));
        }
    }
}

/// Closed interval ends are included; a point is `[x, x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo))
            && (x < self.hi || (self.hi_closed && x == self.hi))
    }
}

/// Bounded Borel set given as a finite union of intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BorelSet {
    intervals: Vec<Interval>,
}

impl BorelSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter("a set needs at least one interval".into()));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi {
                return Err(Error::InvalidParameter(format!(
                    "interval {i} is unbounded or reversed: [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
            for other in &intervals[..i] {
                if iv.lo < other.hi && other.lo < iv.hi {
                    return Err(Error::InvalidParameter(format!(
                        "interval {i} overlaps an earlier interval"
                    )));
                }
            }
        }
        Ok(Self { intervals })
    }

    pub fn interval(iv: Interval) -> Self {
        Self::new(vec![iv]).expect("single interval checked by caller")
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContinuousPart {
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
}

impl ContinuousPart {
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousPart::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            ContinuousPart::Uniform { low, high } => {
                if (low..=high).contains(&x) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
        }
    }

    /// Interval outside which the density is negligible (normal) or zero.
    pub fn effective_support(&self) -> (f64, f64) {
        match *self {
            ContinuousPart::Normal { mean, sd } => (mean - 12.0 * sd, mean + 12.0 * sd),
            ContinuousPart::Uniform { low, high } => (low, high),
        }
    }
}

/// One-dimensional law: weighted atoms plus an optional weighted
/// absolutely continuous part.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLaw {
    atoms: Vec<(f64, f64)>,
    continuous: Option<(f64, ContinuousPart)>,
}

impl ComponentLaw {
    pub fn discrete(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        merged.retain(|&(_, p)| p > 0.0);
        Self {
            atoms: merged,
            continuous: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::discrete(vec![(c, 1.0)])
    }

    pub fn continuous(part: ContinuousPart) -> Self {
        Self {
            atoms: Vec::new(),
            continuous: Some((1.0, part)),
        }
    }

    /// `weight * part + Σ atoms`; atom weights must sum to `1 - weight`.
    pub fn mixed(atoms: Vec<(f64, f64)>, weight: f64, part: ContinuousPart) -> Self {
        let mut law = Self::discrete(atoms);
        law.continuous = Some((weight, part));
        law
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn continuous_part(&self) -> Option<(f64, ContinuousPart)> {
        self.continuous
    }

    /// `P[ξ ∈ B]`.
    pub fn prob(&self, set: &BorelSet) -> f64 {
        self.moment(set, 0)
    }

    /// `E[ξ 1{ξ ∈ B}]`.
    pub fn truncated_mean(&self, set: &BorelSet) -> f64 {
        self.moment(set, 1)
    }

    fn moment(&self, set: &BorelSet, order: i32) -> f64 {
        let mut acc: f64 = self
            .atoms
            .iter()
            .filter(|(x, _)| set.contains(*x))
            .map(|(x, p)| p * x.powi(order))
            .sum();
        if let Some((w, part)) = self.continuous {
            let (slo, shi) = part.effective_support();
            for iv in set.intervals() {
                let (a, b) = (iv.lo.max(slo), iv.hi.min(shi));
                if a < b {
                    acc += w * adaptive_simpson(|x| x.powi(order) * part.pdf(x), a, b, QUAD_TOL);
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    #[test]
    fn tables_must_sum_to_one() {
        assert!(NoiseSpec::new(
            NoiseFamily::TwoPoint { outcomes: [1.0, 2.0], probs: [0.5, 0.4] },
            true,
            1
        )
        .is_err());
        assert!(NoiseSpec::new(
            NoiseFamily::FiniteDiscrete { outcomes: vec![0.0, 1.0, 2.0], probs: vec![0.2, 0.3, 0.5] },
            true,
            2
        )
        .is_ok());
    }

    #[test]
    fn dependent_components_share_draws() {
        let spec = NoiseSpec::new(NoiseFamily::Uniform { low: -1.0, high: 1.0 }, false, 3).unwrap();
        let mut rng = rng_stream(1, 0);
        let mut out = [0.0; 3];
        spec.sample_into(&mut rng, &mut out);
        assert!(out[0] == out[1] && out[1] == out[2]);
    }

    #[test]
    fn discrete_moments_are_exact() {
        let law = NoiseFamily::TwoPoint { outcomes: [1.0, 2.0], probs: [0.5, 0.5] }.marginal();
        let b = BorelSet::interval(Interval::point(2.0));
        assert_eq!(law.prob(&b), 0.5);
        assert_eq!(law.truncated_mean(&b), 1.0);
        let open = BorelSet::interval(Interval::open(1.0, 2.0));
        assert_eq!(law.prob(&open), 0.0);
    }

    #[test]
    fn uniform_moments() {
        let law = NoiseFamily::Uniform { low: 0.0, high: 2.0 }.marginal();
        let b = BorelSet::interval(Interval::open(0.0, 1.0));
        assert!((law.prob(&b) - 0.5).abs() < 1e-12);
        assert!((law.truncated_mean(&b) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sets_reject_overlap_and_unbounded() {
        assert!(BorelSet::new(vec![Interval::open(0.0, 2.0), Interval::open(1.0, 3.0)]).is_err());
        assert!(BorelSet::new(vec![Interval::open(0.0, f64::INFINITY)]).is_err());
        assert!(BorelSet::new(vec![Interval::open(0.0, 1.0), Interval::point(1.0)]).is_ok());
    }
}
