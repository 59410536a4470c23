//! Segmentation metrics: confusion matrix, per-class precision / recall /
//! F1 / IOU, macro and weighted aggregates, and the fixed-width report.

use crate::cloud::ClassLabel;
use crate::error::{Error, Result};

pub const CLASSES: [ClassLabel; 3] = [ClassLabel::Ground, ClassLabel::Building, ClassLabel::Tree];

/// 3x3 counts indexed by (truth class, predicted class); points that are
/// Unlabeled on either side are excluded and tallied separately.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
    pub unlabeled: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn truth_count(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn pred_count(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

pub fn confusion_matrix(pred: &[ClassLabel], truth: &[ClassLabel]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        if p == ClassLabel::Unlabeled || t == ClassLabel::Unlabeled {
            cm.unlabeled += 1;
            continue;
        }
        cm.counts[t.code() as usize - 1][p.code() as usize - 1] += 1;
    }
    Ok(cm)
}

/// Metrics of one class; `defined` is false when the class has neither
/// truth nor predicted points (all values report 0 in that case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub truth_points: u64,
    pub defined: bool,
}

pub fn class_metrics(cm: &ConfusionMatrix) -> [ClassMetrics; 3] {
    let mut out = [ClassMetrics {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        iou: 0.0,
        truth_points: 0,
        defined: false,
    }; 3];
    for c in 0..3 {
        let tp = cm.counts[c][c] as f64;
        let fp = cm.pred_count(c) as f64 - tp;
        let fn_ = cm.truth_count(c) as f64 - tp;
        let m = &mut out[c];
        m.truth_points = cm.truth_count(c);
        m.defined = tp + fp + fn_ > 0.0;
        if tp + fp > 0.0 {
            m.precision = tp / (tp + fp);
        }
        if tp + fn_ > 0.0 {
            m.recall = tp / (tp + fn_);
        }
        if m.precision + m.recall > 0.0 {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        }
        if tp + fp + fn_ > 0.0 {
            m.iou = tp / (tp + fp + fn_);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub points: u64,
}

/// Macro (unweighted) and weighted (by truth point count) averages.
pub fn aggregate_metrics(per_class: &[ClassMetrics]) -> (AggregateRow, AggregateRow) {
    assert!(!per_class.is_empty());
    let n = per_class.len() as f64;
    let total: u64 = per_class.iter().map(|m| m.truth_points).sum();
    let mut macro_row = AggregateRow {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        iou: 0.0,
        points: total,
    };
    let mut weighted = macro_row;
    for m in per_class {
        macro_row.precision += m.precision / n;
        macro_row.recall += m.recall / n;
        macro_row.f1 += m.f1 / n;
        macro_row.iou += m.iou / n;
        if total > 0 {
            let w = m.truth_points as f64 / total as f64;
            weighted.precision += w * m.precision;
            weighted.recall += w * m.recall;
            weighted.f1 += w * m.f1;
            weighted.iou += w * m.iou;
        }
    }
    (macro_row, weighted)
}

/// Full evaluation report in the per-class + aggregate layout.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub per_class: [ClassMetrics; 3],
    pub macro_avg: AggregateRow,
    pub weighted_avg: AggregateRow,
    pub unlabeled: u64,
}

pub fn evaluate(pred: &[ClassLabel], truth: &[ClassLabel]) -> Result<MetricsReport> {
    let cm = confusion_matrix(pred, truth)?;
    let per_class = class_metrics(&cm);
    let (macro_avg, weighted_avg) = aggregate_metrics(&per_class);
    Ok(MetricsReport {
        per_class,
        macro_avg,
        weighted_avg,
        unlabeled: cm.unlabeled,
    })
}

/// Rounds half-up to three decimals (0.9135 -> 0.914).
pub fn round3(x: f64) -> f64 {
    (x * 1000.0 + 0.5).floor() / 1000.0
}

fn fmt3(x: f64) -> String {
    format!("{:.3}", round3(x))
}

/// Fixed-width text table: per-class rows, then macro and weighted rows.
pub fn render_report(report: &MetricsReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<14}{:>10}{:>10}{:>10}{:>8}{:>12}\n",
        "", "precision", "recall", "f1-score", "IOU", "# points"
    ));
    for (c, m) in report.per_class.iter().enumerate() {
        s.push_str(&format!(
            "{:<14}{:>10}{:>10}{:>10}{:>8}{:>12}\n",
            CLASSES[c].name(),
            fmt3(m.precision),
            fmt3(m.recall),
            fmt3(m.f1),
            fmt3(m.iou),
            m.truth_points
        ));
    }
    for (name, row) in [
        ("macro avg", &report.macro_avg),
        ("weighted avg", &report.weighted_avg),
    ] {
        s.push_str(&format!(
            "{:<14}{:>10}{:>10}{:>10}{:>8}{:>12}\n",
            name,
            fmt3(row.precision),
            fmt3(row.recall),
            fmt3(row.f1),
            fmt3(row.iou),
            row.points
        ));
    }
    if report.unlabeled > 0 {
        s.push_str(&format!("unlabeled (excluded): {}\n", report.unlabeled));
    }
    s
}

/// Machine-readable report: one `key value` pair per line.
pub fn render_report_machine(report: &MetricsReport) -> String {
    let mut s = String::new();
    for (c, m) in report.per_class.iter().enumerate() {
        let name = CLASSES[c].name();
        s.push_str(&format!("{name}.precision {}\n", m.precision));
        s.push_str(&format!("{name}.recall {}\n", m.recall));
        s.push_str(&format!("{name}.f1 {}\n", m.f1));
        s.push_str(&format!("{name}.iou {}\n", m.iou));
        s.push_str(&format!("{name}.points {}\n", m.truth_points));
        s.push_str(&format!("{name}.defined {}\n", m.defined));
    }
    for (name, row) in [
        ("macro", &report.macro_avg),
        ("weighted", &report.weighted_avg),
    ] {
        s.push_str(&format!("{name}.precision {}\n", row.precision));
        s.push_str(&format!("{name}.recall {}\n", row.recall));
        s.push_str(&format!("{name}.f1 {}\n", row.f1));
        s.push_str(&format!("{name}.iou {}\n", row.iou));
    }
    s.push_str(&format!("unlabeled {}\n", report.unlabeled));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const G: ClassLabel = ClassLabel::Ground;
    const B: ClassLabel = ClassLabel::Building;
    const T: ClassLabel = ClassLabel::Tree;

    #[test]
    fn identical_labelings_are_diagonal() {
        let labels = vec![G, B, T, G, B, T];
        let cm = confusion_matrix(&labels, &labels).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cm.counts[i][j], if i == j { 2 } else { 0 });
            }
        }
    }

    #[test]
    fn all_ground_predicted_building() {
        let truth = vec![G; 5];
        let pred = vec![B; 5];
        let cm = confusion_matrix(&pred, &truth).unwrap();
        assert_eq!(cm.counts[0][1], 5);
        assert_eq!(cm.total(), 5);
    }

    #[test]
    fn mixed_six_point_case_matches_hand_count() {
        // truth:  G G B B T T
        // pred:   G B B T T G
        let truth = vec![G, G, B, B, T, T];
        let pred = vec![G, B, B, T, T, G];
        let cm = confusion_matrix(&pred, &truth).unwrap();
        assert_eq!(cm.counts[0][0], 1); // G->G
        assert_eq!(cm.counts[0][1], 1); // G->B
        assert_eq!(cm.counts[1][1], 1); // B->B
        assert_eq!(cm.counts[1][2], 1); // B->T
        assert_eq!(cm.counts[2][2], 1); // T->T
        assert_eq!(cm.counts[2][0], 1); // T->G
    }

    #[test]
    fn unlabeled_excluded_and_tallied() {
        let truth = vec![G, ClassLabel::Unlabeled, B];
        let pred = vec![ClassLabel::Unlabeled, B, B];
        let cm = confusion_matrix(&pred, &truth).unwrap();
        assert_eq!(cm.unlabeled, 2);
        assert_eq!(cm.total(), 1);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            confusion_matrix(&[G], &[G, B]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn perfect_prediction_metrics_are_one() {
        let labels = vec![G, B, T];
        let report = evaluate(&labels, &labels).unwrap();
        for m in &report.per_class {
            assert_eq!(m.precision, 1.0);
            assert_eq!(m.recall, 1.0);
            assert_eq!(m.f1, 1.0);
            assert_eq!(m.iou, 1.0);
        }
    }

    #[test]
    fn undefined_class_reports_zero() {
        let labels = vec![G, G];
        let report = evaluate(&labels, &labels).unwrap();
        assert!(!report.per_class[1].defined);
        assert_eq!(report.per_class[1].f1, 0.0);
    }

    #[test]
    fn metrics_match_set_arithmetic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.gen_range(10..200);
            let classes = [G, B, T];
            let truth: Vec<ClassLabel> = (0..n).map(|_| classes[rng.gen_range(0..3)]).collect();
            let pred: Vec<ClassLabel> = (0..n).map(|_| classes[rng.gen_range(0..3)]).collect();
            let report = evaluate(&pred, &truth).unwrap();
            for (c, &class) in classes.iter().enumerate() {
                let tp = truth
                    .iter()
                    .zip(&pred)
                    .filter(|&(&t, &p)| t == class && p == class)
                    .count() as f64;
                let p_count = pred.iter().filter(|&&p| p == class).count() as f64;
                let t_count = truth.iter().filter(|&&t| t == class).count() as f64;
                let union = p_count + t_count - tp;
                let m = report.per_class[c];
                if p_count > 0.0 {
                    assert!((m.precision - tp / p_count).abs() < 1e-12);
                }
                if t_count > 0.0 {
                    assert!((m.recall - tp / t_count).abs() < 1e-12);
                }
                if union > 0.0 {
                    assert!((m.iou - tp / union).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dice_jaccard_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let mut cm = ConfusionMatrix::default();
            for i in 0..3 {
                for j in 0..3 {
                    cm.counts[i][j] = rng.gen_range(0..1000);
                }
            }
            for m in class_metrics(&cm) {
                if m.f1 > 0.0 {
                    assert!((m.iou - m.f1 / (2.0 - m.f1)).abs() < 1e-12);
                }
                assert!(m.iou <= m.f1 + 1e-15);
            }
        }
    }

    #[test]
    fn weighted_average_between_min_and_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let per_class: Vec<ClassMetrics> = (0..3)
                .map(|_| ClassMetrics {
                    precision: rng.gen_range(0.0..1.0),
                    recall: rng.gen_range(0.0..1.0),
                    f1: rng.gen_range(0.0..1.0),
                    iou: rng.gen_range(0.0..1.0),
                    truth_points: rng.gen_range(1..10000),
                    defined: true,
                })
                .collect();
            let (_, weighted) = aggregate_metrics(&per_class);
            let lo = per_class.iter().map(|m| m.f1).fold(f64::INFINITY, f64::min);
            let hi = per_class.iter().map(|m| m.f1).fold(0.0, f64::max);
            assert!(weighted.f1 >= lo - 1e-12 && weighted.f1 <= hi + 1e-12);
        }
    }

    #[test]
    fn equal_counts_make_weighted_equal_macro() {
        let per_class: Vec<ClassMetrics> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&f| ClassMetrics {
                precision: f,
                recall: f,
                f1: f,
                iou: f,
                truth_points: 100,
                defined: true,
            })
            .collect();
        let (macro_row, weighted) = aggregate_metrics(&per_class);
        assert!((macro_row.f1 - weighted.f1).abs() < 1e-12);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round3(0.9135), 0.914);
        assert_eq!(round3(0.9136), 0.914);
        assert_eq!(round3(0.91349), 0.913);
    }

    #[test]
    fn report_header_matches_table_layout() {
        let labels = vec![G, B, T];
        let report = evaluate(&labels, &labels).unwrap();
        let text = render_report(&report);
        let header = text.lines().next().unwrap();
        for col in ["precision", "recall", "f1-score", "IOU", "# points"] {
            assert!(header.contains(col), "missing column {col}");
        }
        assert_eq!(text.lines().count(), 6); // header + 3 classes + 2 aggregates
    }
}
