use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::chi2_1df_survival;
use crate::error::{Error, Result};
use crate::io::PredictionSet;

/// Continuity-corrected McNemar test on discordant correctness counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// A wrong, B right.
    pub b: u64,
    /// A right, B wrong.
    pub c: u64,
    pub chi2: f64,
    pub p: f64,
    /// `b - c`; positive favours B.
    pub net: i64,
}

pub fn mcnemar(b: u64, c: u64) -> McNemarResult {
    let net = b as i64 - c as i64;
    if b + c == 0 {
        return McNemarResult {
            b,
            c,
            chi2: 0.0,
            p: 1.0,
            net,
        };
    }
    let diff = (b.abs_diff(c) as f64 - 1.0).max(0.0);
    let chi2 = diff * diff / (b + c) as f64;
    McNemarResult {
        b,
        c,
        chi2,
        p: chi2_1df_survival(chi2),
        net,
    }
}

/// Discordant counts at the argmax operating point, pairing frames by id.
pub fn discordant_counts(a: &PredictionSet, b: &PredictionSet) -> Result<(u64, u64)> {
    if a.len() != b.len() {
        return Err(Error::shape(
            format!("{} paired frames", a.len()),
            format!("{} frames", b.len()),
        ));
    }
    let index: HashMap<&str, usize> = b
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.frame_id.as_str(), i))
        .collect();
    let (mut a_wrong_b_right, mut a_right_b_wrong) = (0, 0);
    for ra in &a.records {
        let rb = index
            .get(ra.frame_id.as_str())
            .map(|&i| &b.records[i])
            .ok_or_else(|| {
                Error::Missing(format!("frame {} absent from second dump", ra.frame_id))
            })?;
        if ra.true_label != rb.true_label {
            return Err(Error::InvalidArgument(format!(
                "frame {} has different labels in the two dumps",
                ra.frame_id
            )));
        }
        let ok_a = ra.argmax() == ra.true_label;
        let ok_b = rb.argmax() == rb.true_label;
        match (ok_a, ok_b) {
            (false, true) => a_wrong_b_right += 1,
            (true, false) => a_right_b_wrong += 1,
            _ => {}
        }
    }
    Ok((a_wrong_b_right, a_right_b_wrong))
}

pub fn mcnemar_from_predictions(a: &PredictionSet, b: &PredictionSet) -> Result<McNemarResult> {
    let (b_count, c_count) = discordant_counts(a, b)?;
    Ok(mcnemar(b_count, c_count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{PredictionRecord, ScoreKind};

    #[test]
    fn formula() {
        let r = mcnemar(10, 4);
        assert!((r.chi2 - 25.0 / 14.0).abs() < 1e-15);
        assert_eq!(r.net, 6);
        let r = mcnemar(5, 5);
        assert_eq!(r.chi2, 0.0);
        assert_eq!(r.p, 1.0);
        // |b-c| = 1 is fully absorbed by the correction
        assert_eq!(mcnemar(3, 2).chi2, 0.0);
    }

    #[test]
    fn no_discordance() {
        let r = mcnemar(0, 0);
        assert_eq!((r.chi2, r.p), (0.0, 1.0));
    }

    #[test]
    fn symmetric_in_chi2_and_p() {
        let (x, y) = (mcnemar(17, 40), mcnemar(40, 17));
        assert_eq!(x.chi2, y.chi2);
        assert_eq!(x.p, y.p);
        assert_eq!(x.net, -y.net);
    }

    fn rec(id: &str, label: usize, pick: usize) -> PredictionRecord {
        let mut scores = [0.0; crate::NUM_CLASSES];
        scores[pick] = 1.0;
        PredictionRecord {
            frame_id: id.into(),
            video_id: "v".into(),
            true_label: label,
            scores,
        }
    }

    #[test]
    fn counts_pair_by_frame_id() {
        let a = PredictionSet::new(
            vec![
                rec("f1", 0, 0),
                rec("f2", 1, 0),
                rec("f3", 2, 2),
                rec("f4", 3, 0),
            ],
            ScoreKind::Probabilities,
        )
        .unwrap();
        // same frames in a different order
        let b = PredictionSet::new(
            vec![
                rec("f4", 3, 3),
                rec("f3", 2, 0),
                rec("f2", 1, 1),
                rec("f1", 0, 0),
            ],
            ScoreKind::Probabilities,
        )
        .unwrap();
        assert_eq!(discordant_counts(&a, &b).unwrap(), (2, 1));
    }

    #[test]
    fn unmatched_frame_is_reported() {
        let a = PredictionSet::new(vec![rec("f1", 0, 0)], ScoreKind::Probabilities).unwrap();
        let b = PredictionSet::new(vec![rec("g1", 0, 0)], ScoreKind::Probabilities).unwrap();
        let err = discordant_counts(&a, &b).unwrap_err().to_string();
        assert!(err.contains("f1"), "{err}");
    }
}
