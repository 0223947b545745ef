//! Finite-horizon evidence for summability claims.
//!
//! An almost-sure or asymptotic statement ("the series converges") is
//! replaced by a three-valued verdict computed from partial sums at a
//! horizon `N` and at `N/2`:
//!
//! * summable / satisfied if the tail increment `S(N) - S(N/2)` is below
//!   `eps_tail * S(N/2) + eps_abs`,
//! * divergent / violated if `S(N) / S(N/2)` exceeds `ratio_div`,
//! * inconclusive otherwise.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailThresholds {
    pub eps_tail: f64,
    pub eps_abs: f64,
    pub ratio_div: f64,
    /// Minimum ensemble size for [`tail_decision`].
    pub min_paths: usize,
    /// Minimum comparison window; the horizon must be at least four windows.
    pub window: usize,
}

impl Default for TailThresholds {
    fn default() -> Self {
        Self {
            eps_tail: 1e-2,
            eps_abs: 1e-8,
            ratio_div: 1.5,
            min_paths: 30,
            window: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailVerdict {
    SummableEvidence,
    DivergentEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SatisfiedEvidence,
    ViolatedEvidence,
    Inconclusive,
}

impl From<TailVerdict> for Verdict {
    fn from(v: TailVerdict) -> Self {
        match v {
            TailVerdict::SummableEvidence => Verdict::SatisfiedEvidence,
            TailVerdict::DivergentEvidence => Verdict::ViolatedEvidence,
            TailVerdict::Inconclusive => Verdict::Inconclusive,
        }
    }
}

impl std::fmt::Display for TailVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailVerdict::SummableEvidence => "summable-evidence",
            TailVerdict::DivergentEvidence => "divergent-evidence",
            TailVerdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::SatisfiedEvidence => "satisfied-evidence",
            Verdict::ViolatedEvidence => "violated-evidence",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl Verdict {
    /// Conjunction over several sub-conditions.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut out = Verdict::SatisfiedEvidence;
        for v in verdicts {
            match v {
                Verdict::ViolatedEvidence => return Verdict::ViolatedEvidence,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::SatisfiedEvidence => {}
            }
        }
        out
    }
}

/// `S(N) / S(N/2)` with `0/0 = 1` and `x/0 = ∞`.
pub fn growth_ratio(full: f64, head: f64) -> f64 {
    if head > 0.0 {
        full / head
    } else if full > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// The tail rule on already aggregated statistics.
pub fn classify(increment: f64, head: f64, ratio: f64, t: &TailThresholds) -> TailVerdict {
    if increment < t.eps_tail * head + t.eps_abs {
        TailVerdict::SummableEvidence
    } else if ratio > t.ratio_div {
        TailVerdict::DivergentEvidence
    } else {
        TailVerdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics {
    pub paths: usize,
    pub horizon: usize,
    pub half: usize,
    pub median_head: f64,
    pub median_full: f64,
    pub median_increment: f64,
    pub median_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub diagnostics: TailDiagnostics,
    pub thresholds: TailThresholds,
    pub verdict: TailVerdict,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Ensemble verdict from per-path partial-sum sequences `S(0..=N)`.
pub fn tail_decision(ensemble: &[Vec<f64>], thresholds: &TailThresholds) -> Result<TailReport> {
    if ensemble.len() < thresholds.min_paths {
        return Err(Error::TooFewPaths {
            found: ensemble.len(),
            required: thresholds.min_paths,
        });
    }
    let len = ensemble.iter().map(Vec::len).min().unwrap_or(0);
    if len == 0 || len - 1 < 4 * thresholds.window {
        return Err(Error::LengthMismatch {
            what: "partial-sum horizon (four windows)",
            expected: 4 * thresholds.window,
            found: len.saturating_sub(1),
        });
    }
    let horizon = len - 1;
    let half = horizon / 2;
    let mut heads: Vec<f64> = ensemble.iter().map(|s| s[half]).collect();
    let mut fulls: Vec<f64> = ensemble.iter().map(|s| s[horizon]).collect();
    let mut incs: Vec<f64> = ensemble.iter().map(|s| s[horizon] - s[half]).collect();
    let mut ratios: Vec<f64> = ensemble
        .iter()
        .map(|s| growth_ratio(s[horizon], s[half]))
        .collect();
    let diagnostics = TailDiagnostics {
        paths: ensemble.len(),
        horizon,
        half,
        median_head: median(&mut heads),
        median_full: median(&mut fulls),
        median_increment: median(&mut incs),
        median_ratio: median(&mut ratios),
    };
    let verdict = classify(
        diagnostics.median_increment,
        diagnostics.median_head,
        diagnostics.median_ratio,
        thresholds,
    );
    Ok(TailReport {
        diagnostics,
        thresholds: *thresholds,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub at: f64,
    pub value: f64,
}

/// Diagnostics behind a condition verdict.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub increment: f64,
    pub head: f64,
    pub ratio: f64,
    /// `S(T_k) / S(T_{k-1})` for consecutive checkpoints.
    pub checkpoint_ratios: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

/// How a report turns its checkpoints into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rule {
    /// Tail rule on checkpointed partial sums.
    #[default]
    Tail,
    /// Checkpoints are block suprema: satisfied once the last one is below
    /// `tol`, violated if it is still at least `stall_ratio` times the first.
    Fading { tol: f64, stall_ratio: f64 },
}

fn fading_verdict(checkpoints: &[Checkpoint], tol: f64, stall_ratio: f64) -> Verdict {
    match (checkpoints.first(), checkpoints.last()) {
        (Some(_), Some(last)) if last.value < tol => Verdict::SatisfiedEvidence,
        (Some(first), Some(last)) if last.value >= stall_ratio * first.value => {
            Verdict::ViolatedEvidence
        }
        _ => Verdict::Inconclusive,
    }
}

/// Structured report for one admissibility condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub condition: String,
    pub parameters: serde_json::Value,
    pub checkpoints: Vec<Checkpoint>,
    pub diagnostics: Diagnostics,
    pub thresholds: TailThresholds,
    #[serde(default)]
    pub rule: Rule,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<EvidenceReport>,
}

impl EvidenceReport {
    /// Applies the tail rule to checkpointed partial sums; the last two
    /// checkpoints play the roles of `S(N/2)` and `S(N)`. Fewer than three
    /// checkpoints is inconclusive.
    pub fn from_checkpoints(
        condition: &str,
        parameters: serde_json::Value,
        checkpoints: Vec<Checkpoint>,
        thresholds: &TailThresholds,
    ) -> Self {
        let checkpoint_ratios = checkpoints
            .windows(2)
            .map(|w| growth_ratio(w[1].value, w[0].value))
            .collect();
        let mut diagnostics = Diagnostics {
            checkpoint_ratios,
            ..Default::default()
        };
        let verdict = if checkpoints.len() < 3 {
            Verdict::Inconclusive
        } else {
            let full = checkpoints[checkpoints.len() - 1].value;
            let head = checkpoints[checkpoints.len() - 2].value;
            diagnostics.increment = full - head;
            diagnostics.head = head;
            diagnostics.ratio = growth_ratio(full, head);
            classify(diagnostics.increment, head, diagnostics.ratio, thresholds).into()
        };
        Self {
            condition: condition.to_string(),
            parameters,
            checkpoints,
            diagnostics,
            thresholds: *thresholds,
            rule: Rule::Tail,
            verdict,
            parts: Vec::new(),
        }
    }

    /// Report on block suprema under [`Rule::Fading`].
    pub fn fading(
        condition: &str,
        parameters: serde_json::Value,
        checkpoints: Vec<Checkpoint>,
        tol: f64,
        stall_ratio: f64,
        thresholds: &TailThresholds,
    ) -> Self {
        let verdict = fading_verdict(&checkpoints, tol, stall_ratio);
        let checkpoint_ratios = checkpoints
            .windows(2)
            .map(|w| growth_ratio(w[1].value, w[0].value))
            .collect();
        Self {
            condition: condition.to_string(),
            parameters,
            checkpoints,
            diagnostics: Diagnostics {
                checkpoint_ratios,
                ..Default::default()
            },
            thresholds: *thresholds,
            rule: Rule::Fading { tol, stall_ratio },
            verdict,
            parts: Vec::new(),
        }
    }

    /// Conjunction of several reports (e.g. over a set of window widths).
    pub fn aggregate(
        condition: &str,
        parameters: serde_json::Value,
        parts: Vec<EvidenceReport>,
        thresholds: &TailThresholds,
    ) -> Self {
        let verdict = Verdict::all(parts.iter().map(|p| p.verdict));
        Self {
            condition: condition.to_string(),
            parameters,
            checkpoints: Vec::new(),
            diagnostics: Diagnostics::default(),
            thresholds: *thresholds,
            rule: Rule::Tail,
            verdict,
            parts,
        }
    }

    /// Recomputes the verdict from the stored diagnostics; equals `verdict`
    /// for every report built by [`EvidenceReport::from_checkpoints`].
    pub fn recomputed_verdict(&self) -> Verdict {
        if !self.parts.is_empty() {
            return Verdict::all(self.parts.iter().map(|p| p.recomputed_verdict()));
        }
        if let Rule::Fading { tol, stall_ratio } = self.rule {
            return fading_verdict(&self.checkpoints, tol, stall_ratio);
        }
        if self.checkpoints.len() < 3 {
            return Verdict::Inconclusive;
        }
        classify(
            self.diagnostics.increment,
            self.diagnostics.head,
            self.diagnostics.ratio,
            &self.thresholds,
        )
        .into()
    }
}

/// Doubling checkpoints `T_max / 2^j` that are at least `t_min`, ascending.
pub fn doubling_checkpoints(t_min: f64, t_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = t_max;
    while t >= t_min * (1.0 - 1e-12) && t > 0.0 {
        out.push(t);
        t /= 2.0;
    }
    out.reverse();
    out
}

/// Indices `N/2^j` (at least `n_min`), ascending.
pub fn doubling_indices(n_min: usize, n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = n_max;
    while n >= n_min.max(1) {
        out.push(n);
        n /= 2;
    }
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn copies(seq: Vec<f64>) -> Vec<Vec<f64>> {
        vec![seq; 30]
    }

    #[test]
    fn zero_paths_are_summable() {
        let r = tail_decision(&copies(vec![0.0; 101]), &TailThresholds::default()).unwrap();
        assert_eq!(r.verdict, TailVerdict::SummableEvidence);
    }

    #[test]
    fn linear_growth_is_divergent() {
        let s: Vec<f64> = (0..=1000).map(|n| n as f64 + 1.0).collect();
        let r = tail_decision(&copies(s), &TailThresholds::default()).unwrap();
        assert_eq!(r.verdict, TailVerdict::DivergentEvidence);
        assert!((r.diagnostics.median_ratio - 1001.0 / 501.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_sums_are_summable() {
        let s: Vec<f64> = (0..=64).map(|n| 2.0 - 2f64.powi(-n)).collect();
        let r = tail_decision(&copies(s), &TailThresholds::default()).unwrap();
        assert_eq!(r.verdict, TailVerdict::SummableEvidence);
        let expected = 2f64.powi(-32) - 2f64.powi(-64);
        assert!((r.diagnostics.median_increment - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_ensembles_and_short_horizons() {
        let t = TailThresholds::default();
        assert!(matches!(
            tail_decision(&vec![vec![0.0; 100]; 29], &t),
            Err(Error::TooFewPaths { found: 29, required: 30 })
        ));
        assert!(tail_decision(&copies(vec![0.0; 20]), &t).is_err());
    }

    #[test]
    fn checkpoint_reports() {
        let t = TailThresholds::default();
        let cps = |vals: &[f64]| {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| Checkpoint { at: 2f64.powi(i as i32), value: v })
                .collect::<Vec<_>>()
        };
        let r = EvidenceReport::from_checkpoints("x", serde_json::Value::Null, cps(&[1.0, 2.0]), &t);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = EvidenceReport::from_checkpoints("x", serde_json::Value::Null, cps(&[1.0, 2.0, 4.0]), &t);
        assert_eq!(r.verdict, Verdict::ViolatedEvidence);
        assert_eq!(r.recomputed_verdict(), r.verdict);
        let r = EvidenceReport::from_checkpoints("x", serde_json::Value::Null, cps(&[1.0, 1.5, 1.501]), &t);
        assert_eq!(r.verdict, Verdict::SatisfiedEvidence);
        let r = EvidenceReport::from_checkpoints("x", serde_json::Value::Null, cps(&[1.0, 1.2, 1.44]), &t);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn checkpoint_grids() {
        assert_eq!(doubling_checkpoints(32.0, 1024.0), vec![32.0, 64.0, 128.0, 256.0, 512.0, 1024.0]);
        assert_eq!(doubling_indices(10, 100), vec![12, 25, 50, 100]);
    }

    #[test]
    fn conjunction() {
        use Verdict::*;
        assert_eq!(Verdict::all([SatisfiedEvidence, SatisfiedEvidence]), SatisfiedEvidence);
        assert_eq!(Verdict::all([SatisfiedEvidence, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::all([Inconclusive, ViolatedEvidence]), ViolatedEvidence);
    }
}
