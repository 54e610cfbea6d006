//! Parameter sequences `(r_k)`, `(n_k)` and the quantities derived from them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ParamError;

/// A finite prefix of the radius sequence `r` and degree sequence `n`.
///
/// Indices are 1-based in all public APIs (`k = 1..=len`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ParamSeq {
    r: Vec<f64>,
    n: Vec<u64>,
}

#[derive(Deserialize)]
struct RawParams {
    r: Vec<f64>,
    n: Vec<u64>,
}

impl TryFrom<RawParams> for ParamSeq {
    type Error = ParamError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        ParamSeq::new(raw.r, raw.n)
    }
}

impl ParamSeq {
    pub fn new(r: Vec<f64>, n: Vec<u64>) -> Result<Self, ParamError> {
        if r.is_empty() {
            return Err(ParamError::Empty);
        }
        if r.len() != n.len() {
            return Err(ParamError::LengthMismatch {
                radii: r.len(),
                degrees: n.len(),
            });
        }
        for (i, &rk) in r.iter().enumerate() {
            if !rk.is_finite() || rk <= 0.0 {
                return Err(ParamError::BadRadius {
                    k: i + 1,
                    value: rk,
                });
            }
            if i > 0 && rk <= r[i - 1] {
                return Err(ParamError::NotIncreasing { k: i + 1 });
            }
        }
        for (i, &nk) in n.iter().enumerate() {
            if nk < (i + 1) as u64 || nk > i64::MAX as u64 {
                return Err(ParamError::DegreeTooSmall { k: i + 1, n: nk });
            }
        }
        Ok(Self { r, n })
    }

    pub fn from_json_str(s: &str) -> Result<Self, ParamError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("params serialize")
    }

    /// Truncation length `K`.
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn degrees(&self) -> &[u64] {
        &self.n
    }

    /// `r_k`, 1-based.
    pub fn r(&self, k: usize) -> f64 {
        self.r[k - 1]
    }

    /// `n_k`, 1-based.
    pub fn n(&self, k: usize) -> u64 {
        self.n[k - 1]
    }

    /// The first `len` factors as a parameter sequence of their own.
    pub fn prefix(&self, len: usize) -> Result<Self, ParamError> {
        if len == 0 || len > self.len() {
            return Err(ParamError::BadPrefix {
                len,
                available: self.len(),
            });
        }
        Ok(Self {
            r: self.r[..len].to_vec(),
            n: self.n[..len].to_vec(),
        })
    }

    /// `m_k = n_1 + ... + n_{k-1}`, with `m_1 = 0`. Saturates at `u64::MAX`.
    pub fn m(&self, k: usize) -> u64 {
        self.n[..k - 1]
            .iter()
            .fold(0u64, |acc, &x| acc.saturating_add(x))
    }

    /// `s_k = (1 + 1/n_k) r_k`.
    pub fn s(&self, k: usize) -> f64 {
        (1.0 + 1.0 / self.n(k) as f64) * self.r(k)
    }

    /// `ln T_k = sum_{j<k} n_j ln(s_k / r_j)`.
    pub fn log_t(&self, k: usize) -> f64 {
        let s = self.s(k);
        (1..k)
            .map(|j| self.n(j) as f64 * (s / self.r(j)).ln())
            .sum()
    }

    /// SHA-256 of the canonical JSON form, used to tie output files to a truncation.
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.to_json().as_bytes()).into()
    }

    pub fn derive(&self) -> DerivedParams {
        let k_max = self.len();
        DerivedParams {
            m: (1..=k_max).map(|k| self.m(k)).collect(),
            s: (1..=k_max).map(|k| self.s(k)).collect(),
            log_t: (1..=k_max).map(|k| self.log_t(k)).collect(),
        }
    }

    pub fn validate(&self) -> ValidityReport {
        validate_growth(self, &ValidationConfig::default())
    }
}

/// Derived sequences, 0-based vectors holding indices `k = 1..=K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub m: Vec<u64>,
    pub s: Vec<f64>,
    /// `ln T_k`; `T_k` itself overflows for steep sequences.
    pub log_t: Vec<f64>,
}

/// Built-in desk-scale parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Doubling,
    Steep,
    /// The `k <= 2` prefix that genuinely satisfies the growth condition.
    Paper2,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Doubling, Profile::Steep, Profile::Paper2];

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Doubling => "doubling",
            Profile::Steep => "steep",
            Profile::Paper2 => "paper2",
        }
    }

    pub fn params(&self) -> ParamSeq {
        let (r, n): (Vec<f64>, Vec<u64>) = match self {
            Profile::Doubling => (vec![2.0, 4.0, 8.0, 16.0], vec![2, 4, 8, 16]),
            Profile::Steep => (vec![2.0, 4.0, 8.0, 16.0], vec![2, 8, 64, 512]),
            // 320 e^16 = 2_843_555_366.56..., so n_2 must be at least 2_843_555_367.
            Profile::Paper2 => (vec![2.0, 4.0], vec![1, 2_844_000_000]),
        };
        ParamSeq::new(r, n).expect("built-in profile is valid")
    }
}

impl FromStr for Profile {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ParamError::UnknownProfile(s.to_string()))
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn make_toy(profile: &str) -> Result<ParamSeq, ParamError> {
    Ok(profile.parse::<Profile>()?.params())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    /// Largest `m_k ln r_k` for which `4 r_k^{m_k}` is evaluated numerically.
    pub inner_exponent_cap: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            inner_exponent_cap: 700.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `r_1 >= 2`
    FirstRadius,
    /// `r_k >= 2 r_{k-1}`
    RadiusDoubling,
    /// `n_k >= 20 r_k^2 exp(4 r_k^{m_k})`, compared in log form.
    DegreeGrowth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    /// The right side is too large to evaluate; no 63-bit degree can meet it.
    UnrepresentableFail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub k: usize,
    pub clause: Clause,
    pub status: ClauseStatus,
    /// Left side (`ln n_k` for the degree clause).
    pub lhs: f64,
    /// Right side (`ln 20 + 2 ln r_k + 4 r_k^{m_k}` for the degree clause).
    pub rhs: f64,
    /// `m_k ln r_k`, present for the degree clause.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_exponent: Option<f64>,
}

impl ClauseCheck {
    pub fn passed(&self) -> bool {
        self.status == ClauseStatus::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub clauses: Vec<ClauseCheck>,
    pub overall: bool,
}

impl ValidityReport {
    pub fn failures(&self) -> impl Iterator<Item = &ClauseCheck> {
        self.clauses.iter().filter(|c| !c.passed())
    }
}

fn status(ok: bool) -> ClauseStatus {
    if ok {
        ClauseStatus::Pass
    } else {
        ClauseStatus::Fail
    }
}

/// Checks the radius and degree growth conditions clause by clause.
pub fn validate_growth(p: &ParamSeq, cfg: &ValidationConfig) -> ValidityReport {
    let mut clauses = vec![ClauseCheck {
        k: 1,
        clause: Clause::FirstRadius,
        status: status(p.r(1) >= 2.0),
        lhs: p.r(1),
        rhs: 2.0,
        inner_exponent: None,
    }];
    for k in 2..=p.len() {
        clauses.push(ClauseCheck {
            k,
            clause: Clause::RadiusDoubling,
            status: status(p.r(k) >= 2.0 * p.r(k - 1)),
            lhs: p.r(k),
            rhs: 2.0 * p.r(k - 1),
            inner_exponent: None,
        });
        let inner = p.m(k) as f64 * p.r(k).ln();
        let lhs = (p.n(k) as f64).ln();
        let (status, rhs) = if inner > cfg.inner_exponent_cap {
            (ClauseStatus::UnrepresentableFail, f64::INFINITY)
        } else {
            let rhs = 20f64.ln() + 2.0 * p.r(k).ln() + 4.0 * inner.exp();
            (status(lhs >= rhs), rhs)
        };
        clauses.push(ClauseCheck {
            k,
            clause: Clause::DegreeGrowth,
            status,
            lhs,
            rhs,
            inner_exponent: Some(inner),
        });
    }
    let overall = clauses.iter().all(ClauseCheck::passed);
    ValidityReport { clauses, overall }
}
