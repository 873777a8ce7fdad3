//! Small numeric helpers shared by the geometry and verification modules.

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Fixed chunk length for parallel reductions. The reduction tree depends only
/// on this constant, never on the number of worker threads.
pub const REDUCTION_CHUNK: usize = 4096;

/// Deterministic parallel sum of `f(i)` for `i in 0..len`.
///
/// Chunks of [`REDUCTION_CHUNK`] indices are summed (compensated) in parallel
/// and the chunk totals are then combined sequentially in index order, so the
/// result is bit-identical for any thread count.
pub fn par_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(REDUCTION_CHUNK);
    let partial: Vec<CompensatedSum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(len);
            (lo..hi).map(&f).collect()
        })
        .collect();
    let mut acc = CompensatedSum::new();
    for p in &partial {
        acc.add(p.sum);
        acc.add(p.carry);
    }
    acc.value()
}

/// Binomial coefficient as a float (exact for the small arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Formats a float with 17 significant digits (round-trip exact).
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn raw17(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        fmt17(x)
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

/// `serialize_with` helper writing an `f64` with 17 significant digits.
/// Non-finite values become `null`.
pub fn ser_f17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw17(*x).serialize(s)
}

/// `serialize_with` helper for float sequences.
pub fn ser_vec_f17<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&raw17(*x))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn par_sum_matches_sequential() {
        let n = 3 * REDUCTION_CHUNK + 17;
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let seq = compensated_sum((0..n).map(f));
        assert!((par_sum(n, f) - seq).abs() < 1e-12);
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(6, 3), 20.0);
    }

    #[test]
    fn f17_round_trips() {
        #[derive(serde::Serialize)]
        struct W {
            #[serde(serialize_with = "ser_f17")]
            x: f64,
            #[serde(serialize_with = "ser_vec_f17")]
            v: Vec<f64>,
        }
        let w = W {
            x: std::f64::consts::PI,
            v: vec![0.1, 1.0 / 3.0],
        };
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("3.1415926535897931e0"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), std::f64::consts::PI);
        assert_eq!(back["v"][1].as_f64().unwrap(), 1.0 / 3.0);
    }
}
