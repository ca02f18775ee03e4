//! Group majority vote, class winner-takes-all, and the model-level
//! winner-takes-all that ignores expat verdicts unless every class is expat.
//!
//! All three share one tie-breaking rule: most votes, then smallest loss,
//! then a uniform draw among the distinct tied labels (sorted ascending)
//! using `rng.below(k)`. The generator is consumed only when at least two
//! distinct labels remain tied.

use crate::labels::Label;
use crate::rng::SeededRng;
use crate::verdict::{AnnVerdict, ClassVerdict, GroupVerdict, ModelVerdict, Verdict};
use std::collections::BTreeMap;

/// Winner among candidate verdicts under the shared tie-breaking rule.
fn contest(candidates: impl IntoIterator<Item = Verdict>, rng: &mut SeededRng) -> Option<Verdict> {
    let candidates: Vec<Verdict> = candidates.into_iter().collect();
    let votes = candidates.iter().map(|c| c.votes).max()?;
    let loss = candidates
        .iter()
        .filter(|c| c.votes == votes)
        .map(|c| c.loss)
        .fold(f64::INFINITY, f64::min);
    let mut tied: Vec<Verdict> =
        candidates.into_iter().filter(|c| c.votes == votes && c.loss == loss).collect();
    tied.sort_by_key(|c| c.label);
    tied.dedup_by_key(|c| c.label);
    let pick = if tied.len() > 1 { rng.below(tied.len()) } else { 0 };
    Some(tied[pick])
}

/// Majority vote over the n_f ANN verdicts of one group. A label's loss is
/// the smallest loss among the ANNs that voted for it.
///
/// # Panics
/// If `verdicts` is empty.
pub fn group_vote(verdicts: &[AnnVerdict], rng: &mut SeededRng) -> GroupVerdict {
    let mut tally: BTreeMap<Label, (usize, f64)> = BTreeMap::new();
    for v in verdicts {
        let e = tally.entry(v.label).or_insert((0, f64::INFINITY));
        e.0 += 1;
        e.1 = e.1.min(v.loss);
    }
    contest(tally.into_iter().map(|(label, (votes, loss))| Verdict { label, votes, loss }), rng)
        .expect("group_vote needs at least one verdict")
}

/// Winner-takes-all over the group verdicts of one class.
///
/// # Panics
/// If `verdicts` is empty.
pub fn class_wta(verdicts: &[GroupVerdict], rng: &mut SeededRng) -> ClassVerdict {
    contest(verdicts.iter().copied(), rng).expect("class_wta needs at least one verdict")
}

/// Model output from the class verdicts. If every class says expat the
/// answer is `(expat, n_c, 0)`; otherwise expat verdicts are dropped and the
/// rest compete.
///
/// # Panics
/// If `verdicts` is empty.
pub fn model_output(verdicts: &[ClassVerdict], expat: Label, rng: &mut SeededRng) -> ModelVerdict {
    assert!(!verdicts.is_empty(), "model_output needs at least one verdict");
    if verdicts.iter().all(|v| v.label == expat) {
        return Verdict { label: expat, votes: verdicts.len(), loss: 0.0 };
    }
    contest(verdicts.iter().copied().filter(|v| v.label != expat), rng).expect("a non-expat verdict exists")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(label: u32, loss: f64) -> AnnVerdict {
        AnnVerdict { label: Label(label), loss }
    }

    fn v(label: u32, votes: usize, loss: f64) -> Verdict {
        Verdict { label: Label(label), votes, loss }
    }

    #[test]
    fn group_majority() {
        let mut rng = SeededRng::new(0);
        assert_eq!(group_vote(&[av(2, 0.3), av(2, 0.1), av(5, 0.05)], &mut rng), v(2, 2, 0.1));
        assert_eq!(group_vote(&[av(1, 0.2), av(3, 0.1)], &mut rng), v(3, 1, 0.1));
    }

    #[test]
    fn group_loss_tie_is_fair() {
        let mut rng = SeededRng::new(2024);
        let trials = 10_000;
        let ones = (0..trials)
            .filter(|_| group_vote(&[av(1, 0.2), av(3, 0.2)], &mut rng).label == Label(1))
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.03, "{freq}");
    }

    #[test]
    fn rng_untouched_without_a_full_tie() {
        let mut rng = SeededRng::new(5);
        let before = rng.clone();
        group_vote(&[av(1, 0.2), av(1, 0.2)], &mut rng);
        class_wta(&[v(4, 2, 0.1), v(4, 2, 0.1)], &mut rng);
        assert_eq!(rng, before);
    }

    #[test]
    fn class_wta_examples() {
        let mut rng = SeededRng::new(0);
        assert_eq!(class_wta(&[v(7, 3, 0.4), v(2, 1, 0.01)], &mut rng), v(7, 3, 0.4));
        assert_eq!(class_wta(&[v(7, 2, 0.4), v(2, 2, 0.1)], &mut rng).label, Label(2));
    }

    #[test]
    fn model_output_examples() {
        let mut rng = SeededRng::new(0);
        let expat = Label(11);
        assert_eq!(model_output(&[v(11, 1, 0.3), v(11, 2, 0.2), v(11, 4, 0.1)], expat, &mut rng), v(11, 3, 0.0));
        assert_eq!(model_output(&[v(11, 16, 0.01), v(4, 2, 0.9)], expat, &mut rng), v(4, 2, 0.9));
        assert_eq!(model_output(&[v(3, 2, 0.2)], Label(5), &mut rng), v(3, 2, 0.2));
    }

    #[test]
    fn votes_bounded_by_pool_size() {
        let mut rng = SeededRng::new(1);
        for n in 1..8 {
            let verdicts: Vec<AnnVerdict> = (0..n).map(|_| av(1 + rng.below(4) as u32, rng.next_f64())).collect();
            let g = group_vote(&verdicts, &mut rng);
            assert!(g.votes >= 1 && g.votes <= n);
            assert!(g.votes >= n.div_ceil(4));
        }
    }
}
