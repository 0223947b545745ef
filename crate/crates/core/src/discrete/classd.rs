//! Certificates that a scalar noise law belongs to class D: two bounded sets
//! `B1 != B2` with `p_i = P[ξ ∈ B_i] > 0`, `e_i = E[ξ 1{ξ ∈ B_i}] != 0` and
//! `p2 e1 - p1 e2 != 0`.

use std::fmt;

use serde::Serialize;

use crate::noise::{BorelSet, ComponentLaw, ContinuousPart, Interval};

pub const TOL_DET: f64 = 1e-8;
const TOL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDCertificate {
    pub b1: BorelSet,
    pub b2: BorelSet,
    pub p1: f64,
    pub p2: f64,
    pub e1: f64,
    pub e2: f64,
    pub det: f64,
}

/// The first clause that fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum ClassDFailure {
    IdenticalSets,
    ZeroProbability { set: u8, value: f64 },
    ZeroTruncatedMean { set: u8, value: f64 },
    ZeroDeterminant { det: f64 },
    NoTwoPositiveProbabilitySets,
    NoCertificateFound { pairs_tried: usize },
}

impl fmt::Display for ClassDFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassDFailure::IdenticalSets => write!(f, "B1 and B2 must be distinct"),
            ClassDFailure::ZeroProbability { set, value } => {
                write!(f, "p{set} > 0 fails (p{set} = {value})")
            }
            ClassDFailure::ZeroTruncatedMean { set, value } => {
                write!(f, "e{set} != 0 fails (e{set} = {value})")
            }
            ClassDFailure::ZeroDeterminant { det } => {
                write!(f, "p2 e1 - p1 e2 != 0 fails (det = {det})")
            }
            ClassDFailure::NoTwoPositiveProbabilitySets => {
                write!(f, "no two disjoint positive-probability sets exist")
            }
            ClassDFailure::NoCertificateFound { pairs_tried } => {
                write!(f, "no certificate among {pairs_tried} candidate pairs")
            }
        }
    }
}

impl std::error::Error for ClassDFailure {}

/// Checks the class-D clauses for the given sets, in order.
pub fn class_d_certificate(
    law: &ComponentLaw,
    b1: &BorelSet,
    b2: &BorelSet,
) -> Result<ClassDCertificate, ClassDFailure> {
    if b1 == b2 {
        return Err(ClassDFailure::IdenticalSets);
    }
    let p1 = law.prob(b1);
    if p1 <= TOL_MASS {
        return Err(ClassDFailure::ZeroProbability { set: 1, value: p1 });
    }
    let p2 = law.prob(b2);
    if p2 <= TOL_MASS {
        return Err(ClassDFailure::ZeroProbability { set: 2, value: p2 });
    }
    let e1 = law.truncated_mean(b1);
    if e1.abs() <= TOL_MASS {
        return Err(ClassDFailure::ZeroTruncatedMean { set: 1, value: e1 });
    }
    let e2 = law.truncated_mean(b2);
    if e2.abs() <= TOL_MASS {
        return Err(ClassDFailure::ZeroTruncatedMean { set: 2, value: e2 });
    }
    let det = p2 * e1 - p1 * e2;
    if det.abs() <= TOL_DET {
        return Err(ClassDFailure::ZeroDeterminant { det });
    }
    Ok(ClassDCertificate {
        b1: b1.clone(),
        b2: b2.clone(),
        p1,
        p2,
        e1,
        e2,
        det,
    })
}

fn continuous_candidates(part: ContinuousPart) -> Vec<Interval> {
    let (centre, half, lo, hi) = match part {
        ContinuousPart::Normal { mean, sd } => (mean, sd, mean - 4.0 * sd, mean + 4.0 * sd),
        ContinuousPart::Uniform { low, high } => {
            ((low + high) / 2.0, (high - low) / 2.0, low, high)
        }
    };
    let mut out = vec![
        Interval::open(centre, centre + half),
        Interval::open(centre - half, centre),
    ];
    let pieces = 16;
    let w = (hi - lo) / pieces as f64;
    out.extend((0..pieces).map(|i| Interval::open(lo + i as f64 * w, lo + (i + 1) as f64 * w)));
    out
}

/// Searches atoms, hulls of atom pairs and slices of the continuous part for
/// a certifying pair.
pub fn find_class_d_certificate(law: &ComponentLaw) -> Result<ClassDCertificate, ClassDFailure> {
    let atoms: Vec<f64> = law
        .atoms()
        .iter()
        .filter(|(_, p)| *p > TOL_MASS)
        .map(|(x, _)| *x)
        .collect();
    let continuous = law
        .continuous_part()
        .filter(|(w, _)| *w > TOL_MASS)
        .map(|(_, part)| part);
    if continuous.is_none() && atoms.len() < 2 {
        return Err(ClassDFailure::NoTwoPositiveProbabilitySets);
    }
    let mut candidates: Vec<BorelSet> = Vec::new();
    if let Some(part) = continuous {
        candidates.extend(continuous_candidates(part).into_iter().map(BorelSet::interval));
    }
    candidates.extend(atoms.iter().map(|&x| BorelSet::interval(Interval::point(x))));
    for (i, &a) in atoms.iter().enumerate() {
        for &b in &atoms[i + 1..] {
            candidates.push(BorelSet::interval(Interval::closed(a.min(b), a.max(b))));
        }
    }
    let mut tried = 0;
    for (i, b1) in candidates.iter().enumerate() {
        for b2 in &candidates[i + 1..] {
            tried += 1;
            if let Ok(cert) = class_d_certificate(law, b1, b2) {
                return Ok(cert);
            }
        }
    }
    Err(ClassDFailure::NoCertificateFound { pairs_tried: tried })
}
