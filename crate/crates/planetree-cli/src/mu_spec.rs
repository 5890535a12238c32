//! Offspring-law specification: bare names, inline JSON, or `@file`.

use anyhow::{anyhow, bail, Context, Result};
use num_rational::BigRational;
use planetree::{ExactDistribution, FloatDistribution};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "default_backend")]
    pub backend: String,
}

fn default_backend() -> String {
    "float".to_string()
}

impl MuSpec {
    /// Accepts `geometric`, `poisson`, `power:1.5`, inline JSON, or
    /// `@path` pointing at a JSON file.
    pub fn parse(input: &str) -> Result<MuSpec> {
        let input = input.trim();
        if let Some(path) = input.strip_prefix('@') {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading mu spec from {path}"))?;
            return serde_json::from_str(&text).context("parsing mu spec JSON");
        }
        if input.starts_with('{') {
            return serde_json::from_str(input).context("parsing mu spec JSON");
        }
        match input {
            "geometric" => Ok(MuSpec {
                kind: "geometric".into(),
                masses: None,
                alpha: None,
                backend: "exact".into(),
            }),
            "poisson" => Ok(MuSpec {
                kind: "poisson".into(),
                masses: None,
                alpha: None,
                backend: "float".into(),
            }),
            other => {
                if let Some(alpha) = other.strip_prefix("power:") {
                    let alpha: f64 = alpha.parse().context("power-tail exponent")?;
                    return Ok(MuSpec {
                        kind: "power_tail".into(),
                        masses: None,
                        alpha: Some(alpha),
                        backend: "float".into(),
                    });
                }
                bail!("unknown mu spec {other:?}; use geometric, poisson, power:ALPHA, inline JSON or @file")
            }
        }
    }

    pub fn to_float(&self) -> Result<FloatDistribution> {
        match self.kind.as_str() {
            "geometric" => Ok(FloatDistribution::geometric_half()),
            "poisson" => Ok(FloatDistribution::poisson_one()?),
            "power_tail" => {
                let alpha = self.alpha.ok_or_else(|| anyhow!("power_tail needs alpha"))?;
                Ok(FloatDistribution::power_tail(alpha)?)
            }
            "finite" => {
                let masses = self
                    .masses
                    .as_ref()
                    .ok_or_else(|| anyhow!("finite kind needs masses"))?;
                let floats = masses
                    .iter()
                    .map(|m| parse_mass_f64(m))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(FloatDistribution::finite(floats)?)
            }
            other => bail!("unknown mu kind {other:?}"),
        }
    }

    pub fn to_exact(&self) -> Result<ExactDistribution> {
        match self.kind.as_str() {
            "geometric" => Ok(ExactDistribution::geometric_half()),
            "finite" => {
                let masses = self
                    .masses
                    .as_ref()
                    .ok_or_else(|| anyhow!("finite kind needs masses"))?;
                let rationals = masses
                    .iter()
                    .map(|m| parse_mass_rational(m))
                    .collect::<Result<Vec<BigRational>>>()?;
                Ok(ExactDistribution::finite(rationals)?)
            }
            other => bail!("kind {other:?} has no exact backend"),
        }
    }

    pub fn wants_exact(&self) -> bool {
        self.backend == "exact"
    }
}

fn parse_mass_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().context("mass numerator")?;
        let den: i64 = den.trim().parse().context("mass denominator")?;
        if den == 0 {
            bail!("zero denominator in mass {s:?}");
        }
        Ok(BigRational::new(num.into(), den.into()))
    } else if let Ok(int) = s.parse::<i64>() {
        Ok(BigRational::from_integer(int.into()))
    } else {
        bail!("mass {s:?} is not exact; write it as p/q for the exact backend")
    }
}

fn parse_mass_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().context("mass numerator")?;
        let den: f64 = den.trim().parse().context("mass denominator")?;
        Ok(num / den)
    } else {
        s.parse::<f64>().map_err(|e| anyhow!("mass {s:?}: {e}"))
    }
}
