use serde::{Deserialize, Serialize};

/// JSON form of a lifetime distribution, tagged by `family`.
///
/// ```json
/// {"family": "exponential", "rate": 1.0}
/// {"family": "uniform", "lo": 0, "hi": 1}
/// {"family": "hyperexp", "weights": [0.5, 0.5], "rates": [1, 2]}
/// {"family": "tabulated", "grid": [0, 1, 2], "density": [0, 1, 0]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Hyperexp { weights: Vec<f64>, rates: Vec<f64> },
    Tabulated { grid: Vec<f64>, density: Vec<f64> },
    Lomax { shape: f64, scale: f64 },
}

#[cfg(test)]
mod tests {
    use crate::distributions::{Lifetime, LifetimeModel};

    #[test]
    fn parses_documented_forms() {
        let e = LifetimeModel::from_json(r#"{"family": "exponential", "rate": 1.0}"#).unwrap();
        assert_eq!(e.pdf(0.0), 1.0);
        let u = LifetimeModel::from_json(r#"{"family":"uniform","lo":0,"hi":1}"#).unwrap();
        assert_eq!(u.cdf(0.5), 0.5);
        let h =
            LifetimeModel::from_json(r#"{"family":"hyperexp","weights":[0.5,0.5],"rates":[1,2]}"#)
                .unwrap();
        assert!((h.mean() - 0.75).abs() < 1e-15);
        let t =
            LifetimeModel::from_json(r#"{"family":"tabulated","grid":[0,1,2],"density":[0,1,0]}"#)
                .unwrap();
        assert!((t.cdf(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_fields_and_families() {
        assert!(
            LifetimeModel::from_json(r#"{"family":"exponential","rate":1,"shape":2}"#).is_err()
        );
        assert!(LifetimeModel::from_json(r#"{"family":"cauchy"}"#).is_err());
        assert!(LifetimeModel::from_json(r#"{"family":"exponential","rate":-1}"#).is_err());
    }

    #[test]
    fn spec_round_trips() {
        let m = LifetimeModel::gamma(2.0, 1.5).unwrap();
        let text = serde_json::to_string(&m.spec()).unwrap();
        assert_eq!(LifetimeModel::from_json(&text).unwrap(), m);
    }
}
