//! Log-domain intrinsic volume sequences.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::logdomain::{logaddexp, logsumexp};

/// The n+1 intrinsic volumes of an n-dimensional compact convex set, stored
/// as natural logarithms. `logv[j] = log V_j`; `NEG_INFINITY` encodes an
/// exact zero. Indices beyond `n` are treated as zero mass, matching the
/// convention that higher intrinsic volumes of a lower-dimensional set vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicVolumeSequence {
    dim: usize,
    logv: Vec<f64>,
}

impl IntrinsicVolumeSequence {
    /// Wrap a log-volume vector of length `dim + 1`.
    pub fn from_log(dim: usize, logv: Vec<f64>) -> Self {
        assert_eq!(logv.len(), dim + 1, "need exactly dim+1 log-volumes");
        Self { dim, logv }
    }

    /// The 0-dimensional body (a point): V_0 = 1 and nothing else.
    /// This is the identity of [`IntrinsicVolumeSequence::convolve`].
    pub fn point() -> Self {
        Self {
            dim: 0,
            logv: vec![0.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// log V_j, with −∞ for j > n.
    pub fn log_v(&self, j: usize) -> f64 {
        self.logv.get(j).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn log_values(&self) -> &[f64] {
        &self.logv
    }

    /// Intrinsic volumes in linear scale (may overflow to +∞ for large bodies).
    pub fn values(&self) -> Vec<f64> {
        self.logv.iter().map(|&x| x.exp()).collect()
    }

    /// Intrinsic volumes of the Cartesian product of two bodies: the
    /// convolution of their sequences, carried out with log-sum-exp.
    pub fn convolve(&self, other: &Self) -> Self {
        let dim = self.dim + other.dim;
        let mut logv = vec![f64::NEG_INFINITY; dim + 1];
        let mut terms = Vec::with_capacity(self.dim + 1);
        for (j, slot) in logv.iter_mut().enumerate() {
            terms.clear();
            let lo = j.saturating_sub(other.dim);
            let hi = j.min(self.dim);
            for i in lo..=hi {
                terms.push(self.logv[i] + other.logv[j - i]);
            }
            *slot = logsumexp(&terms);
        }
        Self { dim, logv }
    }

    /// log Σ_j V_j e^{j t}: the generating function of the sequence.
    pub fn log_generating(&self, t: f64) -> f64 {
        let terms: Vec<f64> = self
            .logv
            .iter()
            .enumerate()
            .map(|(j, &lv)| lv + j as f64 * t)
            .collect();
        logsumexp(&terms)
    }

    /// log Σ of V_j over j with j/n ∈ `[a,b]` — the mass the sequence puts on an index
    /// window, used for the large-deviations sandwich. Empty windows give −∞.
    pub fn log_window_mass(&self, a: f64, b: f64) -> f64 {
        let n = self.dim as f64;
        let mut acc = f64::NEG_INFINITY;
        for (j, &lv) in self.logv.iter().enumerate() {
            let frac = if self.dim == 0 { 0.0 } else { j as f64 / n };
            if frac >= a - 1e-15 && frac <= b + 1e-15 {
                acc = logaddexp(acc, lv);
            }
        }
        acc
    }

    /// Per-index margins of the Alexandrov–Fenchel inequality
    /// V_j² ≥ ((j+1)/j)·V_{j−1}·V_{j+1}, in log-domain:
    /// `2 log V_j − log V_{j−1} − log V_{j+1} − log((j+1)/j)` for 1 ≤ j ≤ n−1.
    /// A nonnegative margin means the inequality holds at that index.
    pub fn alexandrov_fenchel_margins(&self) -> Vec<f64> {
        let mut margins = Vec::new();
        for j in 1..self.dim {
            let prev = self.logv[j - 1];
            let next = self.logv[j + 1];
            if prev == f64::NEG_INFINITY || next == f64::NEG_INFINITY {
                // A vanishing neighbor makes the right-hand side zero.
                margins.push(f64::INFINITY);
                continue;
            }
            let jf = j as f64;
            margins.push(2.0 * self.logv[j] - prev - next - ((jf + 1.0) / jf).ln());
        }
        margins
    }

    /// Check the Alexandrov–Fenchel inequality at every index.
    pub fn check_alexandrov_fenchel(&self, tolerance: f64) -> AlexandrovFenchelReport {
        let margins = self.alexandrov_fenchel_margins();
        let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        AlexandrovFenchelReport {
            pass: worst >= -tolerance,
            worst_margin: worst,
            margins,
        }
    }

    /// Second-difference margins of j ↦ (1/n) log V_j (concavity of the
    /// normalized log-sequence, the weaker consequence of Alexandrov–Fenchel).
    pub fn concavity_margins(&self) -> Vec<f64> {
        (1..self.dim)
            .map(|j| {
                let prev = self.logv[j - 1];
                let next = self.logv[j + 1];
                if prev == f64::NEG_INFINITY || next == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    2.0 * self.logv[j] - prev - next
                }
            })
            .collect()
    }
}

/// Outcome of an Alexandrov–Fenchel check over a whole sequence.
#[derive(Debug, Clone, Serialize)]
pub struct AlexandrovFenchelReport {
    pub pass: bool,
    pub worst_margin: f64,
    pub margins: Vec<f64>,
}

// JSON form: {"n": 2, "log_v": [0.0, "-inf", 1.5]}. Minus infinity is not
// representable as a JSON number, so it round-trips as the string "-inf".
#[derive(Serialize, Deserialize)]
struct SeqRepr {
    n: usize,
    log_v: Vec<LogVal>,
}

struct LogVal(f64);

impl Serialize for LogVal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LogVal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(LogVal(x)),
            Raw::Tag(s) if s == "-inf" => Ok(LogVal(f64::NEG_INFINITY)),
            Raw::Tag(s) => Err(D::Error::custom(format!(
                "expected number or \"-inf\", got {s:?}"
            ))),
        }
    }
}

impl Serialize for IntrinsicVolumeSequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeqRepr {
            n: self.dim,
            log_v: self.logv.iter().map(|&x| LogVal(x)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntrinsicVolumeSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SeqRepr::deserialize(d)?;
        if repr.log_v.len() != repr.n + 1 {
            return Err(D::Error::custom(format!(
                "log_v has {} entries, expected n+1 = {}",
                repr.log_v.len(),
                repr.n + 1
            )));
        }
        Ok(Self {
            dim: repr.n,
            logv: repr.log_v.into_iter().map(|v| v.0).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn from_values(vals: &[f64]) -> IntrinsicVolumeSequence {
        IntrinsicVolumeSequence::from_log(vals.len() - 1, vals.iter().map(|v| v.ln()).collect())
    }

    #[test]
    fn convolve_squares_a_segment() {
        // (1 + 2x)² = 1 + 4x + 4x²
        let seg = from_values(&[1.0, 2.0]);
        let sq = seg.convolve(&seg);
        let vals = sq.values();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn point_is_convolution_identity() {
        let b = from_values(&[1.0, 3.5, 0.25]);
        let conv = IntrinsicVolumeSequence::point().convolve(&b);
        assert_eq!(conv, b);
    }

    #[test]
    fn log_v_beyond_dimension_is_minus_infinity() {
        let b = from_values(&[1.0, 2.0]);
        assert_eq!(b.log_v(2), f64::NEG_INFINITY);
        assert_eq!(b.log_v(100), f64::NEG_INFINITY);
    }

    #[test]
    fn alexandrov_fenchel_flags_a_convex_violation() {
        // [1, 1, 10]: 1² < (2/1)·1·10, margin = -log 20 at j = 1.
        let bad = from_values(&[1.0, 1.0, 10.0]);
        let report = bad.check_alexandrov_fenchel(1e-9);
        assert!(!report.pass);
        assert_abs_diff_eq!(report.worst_margin, -(20.0f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn window_mass_with_no_indices_is_empty() {
        let b = from_values(&[1.0, 2.0, 1.0, 4.0, 1.0, 9.0, 1.0]);
        // θn non-integer for every j: [0.3, 0.3] with n = 6 wants j = 1.8.
        assert_eq!(b.log_window_mass(0.29, 0.31), f64::NEG_INFINITY);
        assert_abs_diff_eq!(
            b.log_window_mass(0.0, 1.0),
            b.log_generating(0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn json_round_trip_preserves_minus_infinity() {
        let seq = IntrinsicVolumeSequence::from_log(2, vec![0.0, f64::NEG_INFINITY, 1.25]);
        let text = serde_json::to_string(&seq).unwrap();
        assert!(text.contains("\"-inf\""));
        let back: IntrinsicVolumeSequence = serde_json::from_str(&text).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn json_rejects_length_mismatch() {
        let bad = r#"{"n": 3, "log_v": [0.0, 1.0]}"#;
        assert!(serde_json::from_str::<IntrinsicVolumeSequence>(bad).is_err());
    }
}
