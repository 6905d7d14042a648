//! Maximum-likelihood decoding on the erasure channel.
//!
//! After an erasure `e`, the decoder knows which qubits were hit and that the
//! error is a uniformly random Pauli on them. Decoding fails exactly when it
//! picks the wrong logical class among the `2^g` classes of operators
//! supported on `e` that commute with all stabilizers, modulo stabilizers
//! supported on `e`. So ML decoding succeeds with probability `2^-g`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::CssCode;
use crate::gf2::{rank_gf2, BitMatrix, BitVec};
use crate::rng::RngSpec;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    erased: BitVec,
}

impl ErasurePattern {
    pub fn new(erased: BitVec) -> Self {
        Self { erased }
    }

    pub fn none(n: usize) -> Self {
        Self::new(BitVec::zeros(n))
    }

    pub fn all(n: usize) -> Self {
        Self::new(BitVec::ones(n))
    }

    pub fn from_indices(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self::new(BitVec::from_indices(n, qubits))
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn is_erased(&self, q: usize) -> bool {
        self.erased.get(q)
    }

    pub fn set(&mut self, q: usize, erased: bool) {
        self.erased.set(q, erased);
    }

    /// Number of erased qubits.
    pub fn weight(&self) -> usize {
        self.erased.count_ones()
    }

    pub fn bits(&self) -> &BitVec {
        &self.erased
    }

    pub fn to_hex(&self) -> String {
        self.erased.to_hex()
    }

    pub fn from_hex(n: usize, text: &str) -> Result<Self> {
        Ok(Self::new(BitVec::from_hex(n, text)?))
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("erasure probability {p} outside [0, 1]")))
    }
}

/// Erases each qubit independently with probability `p`.
///
/// One uniform is drawn per qubit in index order, so patterns drawn from the
/// same stream at `p <= p'` are nested.
pub fn sample_erasure(n: usize, p: f64, rng: RngSpec) -> Result<ErasurePattern> {
    check_p(p)?;
    let mut r = rng.rng();
    Ok(draw(n, p, &mut r))
}

fn draw(n: usize, p: f64, r: &mut impl Rng) -> ErasurePattern {
    let mut bits = BitVec::zeros(n);
    for q in 0..n {
        if r.gen::<f64>() < p {
            bits.set(q, true);
        }
    }
    ErasurePattern::new(bits)
}

/// One CSS sector: logical operators of the type of `same` supported on the
/// erasure, modulo generators of that type supported on it. `dual` holds the
/// checks of the other type.
fn sector_dim(same: &BitMatrix, dual: &BitMatrix, e: &ErasurePattern) -> usize {
    let inside = e.weight();
    let commuting = inside - rank_gf2(&dual.select_columns(e.bits(), true));
    let stabilizers = rank_gf2(same) - rank_gf2(&same.select_columns(e.bits(), false));
    commuting - stabilizers
}

/// `log2` of the number of logical classes supported on the erasure.
pub fn logical_class_log2(c: &CssCode, e: &ErasurePattern) -> Result<u32> {
    if e.len() != c.n() {
        return Err(Error::param(format!(
            "erasure pattern has length {}, code has {} qubits",
            e.len(),
            c.n()
        )));
    }
    let gx = sector_dim(c.hx(), c.hz(), e);
    let gz = sector_dim(c.hz(), c.hx(), e);
    Ok((gx + gz) as u32)
}

/// Probability that ML decoding recovers from the erasure, `2^-g`.
pub fn success_probability(c: &CssCode, e: &ErasurePattern) -> Result<f64> {
    Ok((-(logical_class_log2(c, e)? as f64)).exp2())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Average of the exact per-pattern failure probabilities `1 - 2^-g`.
    #[default]
    Exact,
    /// Average of Bernoulli draws with those probabilities.
    Bernoulli,
}

/// Monte-Carlo estimate of the ML failure rate at one erasure probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingReport {
    pub p: f64,
    pub trials: u64,
    /// Failure count; with the exact estimator, the summed failure
    /// probabilities.
    pub failures: f64,
    pub failure_rate: f64,
    /// Half-width of the 95% normal-approximation confidence interval.
    pub ci95: f64,
}

impl DecodingReport {
    pub fn interval(&self) -> (f64, f64) {
        (self.failure_rate - self.ci95, self.failure_rate + self.ci95)
    }
}

/// Per-trial failure values; trial `t` reads only from `rng.child(t)`.
pub fn trial_failures(
    c: &CssCode,
    p: f64,
    trials: u64,
    rng: RngSpec,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    check_p(p)?;
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    (0..trials)
        .map(|t| {
            let mut r = rng.child(t).rng();
            let e = draw(c.n(), p, &mut r);
            let fail = 1.0 - success_probability(c, &e)?;
            Ok(match estimator {
                Estimator::Exact => fail,
                Estimator::Bernoulli => {
                    if r.gen::<f64>() < fail {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
        })
        .collect()
}

/// Summarizes per-trial failure values.
pub fn report(p: f64, values: &[f64]) -> DecodingReport {
    let t = values.len() as f64;
    let sum: f64 = values.iter().sum();
    let mean = sum / t;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t;
    DecodingReport {
        p,
        trials: values.len() as u64,
        failures: sum,
        failure_rate: mean,
        ci95: 1.96 * (var / t).sqrt(),
    }
}

pub fn failure_rate(
    c: &CssCode,
    p: f64,
    trials: u64,
    rng: RngSpec,
    estimator: Estimator,
) -> Result<DecodingReport> {
    let values = trial_failures(c, p, trials, rng, estimator)?;
    Ok(report(p, &values))
}

/// Largest erasure probability a code of the given rate can tolerate,
/// `(1 - R) / 2`.
pub fn erasure_capacity_limit(rate: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::param(format!("rate {rate} outside [0, 1]")));
    }
    Ok((1.0 - rate) / 2.0)
}
