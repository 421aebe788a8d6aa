use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which estimator produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    BetweenSubjectCI,
    WithinSubjectCI,
    WithinSubjectHDI,
    HeteroscedasticHDI,
    LargeSampleHDI,
    CousineauMorey,
    PairwiseDifferenceCI,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::BetweenSubjectCI,
        Method::WithinSubjectCI,
        Method::WithinSubjectHDI,
        Method::HeteroscedasticHDI,
        Method::LargeSampleHDI,
        Method::CousineauMorey,
        Method::PairwiseDifferenceCI,
    ];

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Method::BetweenSubjectCI => "between",
            Method::WithinSubjectCI => "wsci",
            Method::WithinSubjectHDI => "hdi",
            Method::HeteroscedasticHDI => "hetero",
            Method::LargeSampleHDI => "large-sample",
            Method::CousineauMorey => "cm",
            Method::PairwiseDifferenceCI => "pairwise",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.short_name() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            Method::BetweenSubjectCI => "between-subject CI",
            Method::WithinSubjectCI => "within-subject CI",
            Method::WithinSubjectHDI => "within-subject HDI",
            Method::HeteroscedasticHDI => "heteroscedastic within-subject HDI",
            Method::LargeSampleHDI => "large-sample HDI",
            Method::CousineauMorey => "Cousineau-Morey interval",
            Method::PairwiseDifferenceCI => "pairwise difference CI",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Degrees of freedom of the criterion value behind an interval.
///
/// Serialized as an integer, or the string `"asymptotic"` for normal-quantile
/// intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Df {
    Finite(u64),
    Asymptotic,
}

impl fmt::Display for Df {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Df::Finite(n) => write!(f, "{n}"),
            Df::Asymptotic => f.write_str("asymptotic"),
        }
    }
}

impl Serialize for Df {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Df::Finite(n) => s.serialize_u64(*n),
            Df::Asymptotic => s.serialize_str("asymptotic"),
        }
    }
}

impl<'de> Deserialize<'de> for Df {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Df::Finite(n)),
            Raw::Str(s) if s == "asymptotic" => Ok(Df::Asymptotic),
            Raw::Str(s) => Err(de::Error::custom(format!("unknown df {s:?}"))),
        }
    }
}

/// A symmetric interval `center ± half_width` at a given level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub center: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub df: Df,
    pub method: Method,
}

impl IntervalEstimate {
    pub fn new(center: f64, half_width: f64, level: f64, df: Df, method: Method) -> Result<Self> {
        if center.is_nan() || half_width.is_nan() || half_width < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "interval needs a center and a nonnegative half-width, got {center} ± {half_width}"
            )));
        }
        crate::error::check_level(level)?;
        Ok(Self {
            center,
            half_width,
            lower: center - half_width,
            upper: center + half_width,
            level,
            df,
            method,
        })
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub(crate) fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}
