//! Detection metrics: greedy point matching, TPR/FDR and mean±std
//! localization errors.

use serde::{Deserialize, Serialize};

use crate::geom::Point2;

/// Matching outcome counts and the derived rates. Rates are omitted (not
/// reported as zero) when their denominator is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fdr: Option<f64>,
}

/// Localization error statistics in millimetres (population std, divisor n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub n: usize,
    pub mean_abs_mm: f64,
    pub std_mm: f64,
}

/// A matched detection/truth pair with its distance in pixels.
#[derive(Debug, Clone, Copy)]
pub struct MatchedPair {
    pub detected: usize,
    pub truth: usize,
    pub dist_px: f64,
}

/// Greedy nearest-first one-to-one matching under `max_dist_px`. Matched
/// pairs are true positives, leftover detections false positives, leftover
/// truth points false negatives.
pub fn match_points(
    detected: &[Point2],
    truth: &[Point2],
    max_dist_px: f64,
) -> (Vec<MatchedPair>, Vec<usize>, Vec<usize>) {
    let mut candidates: Vec<MatchedPair> = Vec::new();
    for (i, d) in detected.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let dist = d.dist(*t);
            if dist <= max_dist_px {
                candidates.push(MatchedPair {
                    detected: i,
                    truth: j,
                    dist_px: dist,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.dist_px
            .partial_cmp(&b.dist_px)
            .unwrap()
            .then(a.detected.cmp(&b.detected))
            .then(a.truth.cmp(&b.truth))
    });

    let mut used_d = vec![false; detected.len()];
    let mut used_t = vec![false; truth.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if used_d[c.detected] || used_t[c.truth] {
            continue;
        }
        used_d[c.detected] = true;
        used_t[c.truth] = true;
        pairs.push(c);
    }
    let unmatched_d = (0..detected.len()).filter(|&i| !used_d[i]).collect();
    let unmatched_t = (0..truth.len()).filter(|&j| !used_t[j]).collect();
    (pairs, unmatched_d, unmatched_t)
}

/// TPR = TP / (TP + FN), FDR = FP / (FP + TP).
pub fn metrics(tp: usize, fp: usize, false_neg: usize) -> EvalCounts {
    let tpr = (tp + false_neg > 0).then(|| tp as f64 / (tp + false_neg) as f64);
    let fdr = (fp + tp > 0).then(|| fp as f64 / (fp + tp) as f64);
    EvalCounts {
        true_positives: tp,
        false_positives: fp,
        false_negatives: false_neg,
        tpr,
        fdr,
    }
}

/// Mean absolute error and population standard deviation of the matched
/// pair distances, converted to millimetres.
pub fn error_stats(pairs: &[MatchedPair], px_per_mm: f64) -> ErrorStats {
    let n = pairs.len();
    if n == 0 {
        return ErrorStats {
            n: 0,
            mean_abs_mm: 0.0,
            std_mm: 0.0,
        };
    }
    let errs: Vec<f64> = pairs.iter().map(|p| p.dist_px / px_per_mm).collect();
    let mean = errs.iter().sum::<f64>() / n as f64;
    let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n as f64;
    ErrorStats {
        n,
        mean_abs_mm: mean,
        std_mm: var.sqrt(),
    }
}
