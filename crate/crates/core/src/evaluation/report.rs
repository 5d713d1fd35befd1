use serde::{Deserialize, Serialize};

use super::{EvalError, EvaluationReport};
use crate::format::fixed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub entangled: Option<f64>,
    pub baseline: Option<f64>,
    /// `entangled - baseline`; `None` if either side is not applicable.
    pub delta: Option<f64>,
    /// `100 * delta / |baseline|`; `None` if the delta is undefined or the
    /// baseline is zero.
    pub percent: Option<f64>,
}

impl MetricDelta {
    fn new(metric: &str, entangled: Option<f64>, baseline: Option<f64>) -> Self {
        let delta = entangled.zip(baseline).map(|(e, b)| e - b);
        let percent = delta
            .zip(baseline)
            .and_then(|(d, b)| (b != 0.0).then(|| 100.0 * d / b.abs()));
        Self {
            metric: metric.to_string(),
            entangled,
            baseline,
            delta,
            percent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub entangled_label: String,
    pub baseline_label: String,
    pub metrics: Vec<MetricDelta>,
}

impl Comparison {
    pub fn metric(&self, name: &str) -> Option<&MetricDelta> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    /// Plain-text table, one metric per row.
    pub fn to_table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or("N/A".to_string(), |x| fixed(x, 3));
        let mut out = format!(
            "{:<12} {:>10} {:>10} {:>8} {:>9}\n",
            "metric", "entangled", "baseline", "delta", "change"
        );
        for m in &self.metrics {
            out.push_str(&format!(
                "{:<12} {:>10} {:>10} {:>8} {:>9}\n",
                m.metric,
                cell(m.entangled),
                cell(m.baseline),
                cell(m.delta),
                m.percent
                    .map_or("N/A".to_string(), |p| format!("{}%", fixed(p, 1)))
            ));
        }
        out
    }
}

/// Per-metric deltas between an entangled report and a baseline report
/// scored under the same configuration and embedding model. Human depth is
/// included when either report carries it.
pub fn compare(
    entangled: &EvaluationReport,
    baseline: &EvaluationReport,
) -> Result<Comparison, EvalError> {
    if entangled.config != baseline.config {
        return Err(EvalError::ConfigMismatch(
            "evaluation config differs".into(),
        ));
    }
    if entangled.embedding_model != baseline.embedding_model {
        return Err(EvalError::ConfigMismatch(format!(
            "embedding model {:?} vs {:?}",
            entangled.embedding_model, baseline.embedding_model
        )));
    }
    let mut metrics = vec![
        MetricDelta::new("coverage", entangled.coverage, baseline.coverage),
        MetricDelta::new("coherence", entangled.coherence, baseline.coherence),
        MetricDelta::new("novelty", Some(entangled.novelty), Some(baseline.novelty)),
    ];
    if entangled.human_depth.is_some() || baseline.human_depth.is_some() {
        metrics.push(MetricDelta::new(
            "human_depth",
            entangled.human_depth,
            baseline.human_depth,
        ));
    }
    Ok(Comparison {
        entangled_label: entangled.variant_label.clone(),
        baseline_label: baseline.variant_label.clone(),
        metrics,
    })
}

pub const RADAR_AXES: [&str; 3] = ["coverage", "coherence", "novelty"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub label: String,
    /// Values on [`RADAR_AXES`]; `None` marks a not-applicable slot.
    pub values: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarData {
    pub axes: Vec<String>,
    pub series: Vec<RadarSeries>,
}

/// One series per report, in the order given.
pub fn radar_export(reports: &[EvaluationReport]) -> Result<RadarData, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::NoReports);
    }
    Ok(RadarData {
        axes: RADAR_AXES.iter().map(|s| s.to_string()).collect(),
        series: reports
            .iter()
            .map(|r| RadarSeries {
                label: r.variant_label.clone(),
                values: [r.coverage, r.coherence, Some(r.novelty)],
            })
            .collect(),
    })
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

impl RadarData {
    /// Standalone SVG. Each axis is scaled to its metric range (coverage
    /// `[0, 1]`, coherence `[0, 1]` with negatives drawn at the centre,
    /// novelty `[0, 2]`); not-applicable slots are drawn at the centre and
    /// marked "N/A" in the legend.
    pub fn to_svg(&self) -> String {
        let (cx, cy, r) = (200.0, 190.0, 140.0);
        let maxima = [1.0, 1.0, 2.0];
        let angle =
            |k: usize| -std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
        let point = |k: usize, frac: f64| {
            let a = angle(k);
            (cx + r * frac * a.cos(), cy + r * frac * a.sin())
        };
        let mut out = String::from(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"420\" viewBox=\"0 0 400 420\" font-family=\"sans-serif\" font-size=\"12\">\n",
        );
        for ring in [0.25, 0.5, 0.75, 1.0] {
            let pts: Vec<String> = (0..3)
                .map(|k| {
                    let (x, y) = point(k, ring);
                    format!("{},{}", fixed(x, 1), fixed(y, 1))
                })
                .collect();
            out.push_str(&format!(
                "  <polygon points=\"{}\" fill=\"none\" stroke=\"#ccc\"/>\n",
                pts.join(" ")
            ));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            let (x, y) = point(k, 1.0);
            let (lx, ly) = point(k, 1.12);
            out.push_str(&format!(
                "  <line x1=\"{cx}\" y1=\"{cy}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\"/>\n",
                fixed(x, 1),
                fixed(y, 1)
            ));
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{axis}</text>\n",
                fixed(lx, 1),
                fixed(ly, 1)
            ));
        }
        for (s_idx, s) in self.series.iter().enumerate() {
            let color = PALETTE[s_idx % PALETTE.len()];
            let pts: Vec<String> = s
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let frac = v.map_or(0.0, |v| (v / maxima[k]).clamp(0.0, 1.0));
                    let (x, y) = point(k, frac);
                    format!("{},{}", fixed(x, 1), fixed(y, 1))
                })
                .collect();
            out.push_str(&format!(
                "  <polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                pts.join(" ")
            ));
            let cells: Vec<String> = s
                .values
                .iter()
                .map(|v| v.map_or("N/A".to_string(), |x| fixed(x, 3)))
                .collect();
            out.push_str(&format!(
                "  <text x=\"20\" y=\"{}\" fill=\"{color}\">{}: {}</text>\n",
                360 + 16 * s_idx,
                escape(&s.label),
                cells.join(" / ")
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
