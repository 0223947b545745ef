//! Run manifests, configuration digests and the state-space norm.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Norm on `R^d` used for partial sums and gaps. Any norm gives the same
/// summability classes; the max-norm is the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    #[default]
    Max,
    Euclidean,
    Sum,
}

impl Norm {
    pub fn of(&self, x: &[f64]) -> f64 {
        match self {
            Norm::Max => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            Norm::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Sum => x.iter().map(|v| v.abs()).sum(),
        }
    }
}

/// Everything needed to reproduce a run bit for bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub master_seed: u64,
    pub config_digest: String,
    pub artifact_version: String,
    pub norm: Norm,
}

impl RunManifest {
    pub fn new(master_seed: u64, config: &serde_json::Value, norm: Norm) -> Self {
        Self {
            master_seed,
            config_digest: digest_json(config),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            norm,
        }
    }
}

/// SHA-256 of the compact JSON rendering. `serde_json` keeps object keys
/// sorted, so equal values give equal digests.
pub fn digest_json(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_ignores_key_order() {
        let a = json!({"b": 1, "a": [1.5, 2]});
        let b: serde_json::Value = serde_json::from_str(r#"{"a":[1.5,2],"b":1}"#).unwrap();
        assert_eq!(digest_json(&a), digest_json(&b));
        assert_ne!(digest_json(&a), digest_json(&json!({"b": 2, "a": [1.5, 2]})));
    }

    #[test]
    fn norms() {
        let x = [3.0, -4.0];
        assert_eq!(Norm::Max.of(&x), 4.0);
        assert_eq!(Norm::Euclidean.of(&x), 5.0);
        assert_eq!(Norm::Sum.of(&x), 7.0);
    }
}
