use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::calibration::{pooled_stats, CalibrationSnapshot};
use super::metrics::{improvement, mean_std, MetricKind};
use super::run::{ExperimentRecord, TrialMetrics};
use super::svg::{box_plot, line_plot, Series};
use crate::ansatz::Variant;
use crate::attribution::{aggregate_trials, FeatureSummary};
use crate::data::Task;
use crate::{Error, Result};

fn task_name(task: Task) -> &'static str {
    match task {
        Task::Classification => "classification",
        Task::Regression => "regression",
    }
}

fn variant_rank(v: Variant) -> usize {
    match v {
        Variant::Baseline => 0,
        Variant::Ez => 1,
        Variant::Em => 2,
    }
}

/// One `mean ± std` cell of the performance table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub task: String,
    pub split: String,
    pub device: String,
    pub model: String,
    pub qubits: usize,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub formatted: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCurveRow {
    pub task: String,
    pub device: String,
    pub model: String,
    pub qubits: usize,
    pub epoch: usize,
    pub train_mean: f64,
    pub train_std: f64,
    pub val_mean: f64,
    pub val_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub task: String,
    pub device: String,
    pub qubits: usize,
    pub model: String,
    pub metric: String,
    pub delta: f64,
    pub std: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ShapRow {
    task: String,
    device: String,
    model: String,
    qubits: usize,
    feature: String,
    trial: usize,
    mean_abs_shap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CalibrationRow {
    task: String,
    device: String,
    model: String,
    qubits: usize,
    metric: String,
    mean: f64,
    std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ShapSummary {
    record: String,
    features: Vec<FeatureSummary>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportFiles {
    pub tables: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

fn sorted(records: &[ExperimentRecord]) -> Vec<&ExperimentRecord> {
    let mut v: Vec<&ExperimentRecord> = records.iter().collect();
    v.sort_by(|a, b| {
        let key = |r: &ExperimentRecord| {
            (
                task_name(r.config.task),
                r.config.device.clone(),
                r.config.num_qubits,
                variant_rank(r.config.variant),
                r.label.clone(),
            )
        };
        key(a).cmp(&key(b))
    });
    v
}

fn format_cell(mean: f64, std: f64, metric: MetricKind) -> String {
    match metric {
        MetricKind::Accuracy => format!("{mean:.1} ± {std:.3}"),
        _ => format!("{mean:.3} ± {std:.3}"),
    }
}

type MetricPick = (MetricKind, fn(&TrialMetrics) -> f64);

/// Train and test loss/score summaries of every record.
pub fn table_rows(records: &[ExperimentRecord]) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for split in ["train", "test"] {
        for r in sorted(records) {
            let picks: [MetricPick; 2] = if split == "train" {
                [
                    (r.loss_metric, |m| m.train_loss),
                    (r.score_metric, |m| m.train_score),
                ]
            } else {
                [
                    (r.loss_metric, |m| m.test_loss),
                    (r.score_metric, |m| m.test_score),
                ]
            };
            for (metric, pick) in picks {
                let (mean, std) = mean_std(&r.values(pick));
                rows.push(TableRow {
                    task: task_name(r.config.task).into(),
                    split: split.into(),
                    device: r.config.device.clone(),
                    model: r.config.variant.to_string(),
                    qubits: r.config.num_qubits,
                    metric: metric.name().into(),
                    mean,
                    std,
                    trials: r.trials.len(),
                    formatted: format_cell(mean, std, metric),
                });
            }
        }
    }
    rows
}

/// Per-epoch mean and std of the train and validation losses across trials.
pub fn loss_curve_rows(records: &[ExperimentRecord]) -> Vec<LossCurveRow> {
    let mut rows = Vec::new();
    for r in sorted(records) {
        let epochs = r.trials.iter().map(|t| t.trace.len()).min().unwrap_or(0);
        for e in 0..epochs {
            let train: Vec<f64> = r.trials.iter().map(|t| t.trace[e].train_loss).collect();
            let val: Vec<f64> = r.trials.iter().map(|t| t.trace[e].val_loss).collect();
            let (train_mean, train_std) = mean_std(&train);
            let (val_mean, val_std) = mean_std(&val);
            rows.push(LossCurveRow {
                task: task_name(r.config.task).into(),
                device: r.config.device.clone(),
                model: r.config.variant.to_string(),
                qubits: r.config.num_qubits,
                epoch: e + 1,
                train_mean,
                train_std,
                val_mean,
                val_std,
            });
        }
    }
    rows
}

/// Test-set improvement of each hybrid record over the baseline record that
/// shares its task, device, size, seed and trial count.
pub fn improvement_rows(records: &[ExperimentRecord]) -> Result<Vec<ImprovementRow>> {
    let key = |r: &ExperimentRecord| {
        (
            r.config.task,
            r.config.device.clone(),
            r.config.num_qubits,
            r.config.seed,
            r.trials.len(),
        )
    };
    let mut rows = Vec::new();
    for h in sorted(records)
        .into_iter()
        .filter(|r| r.config.variant != Variant::Baseline)
    {
        let Some(b) = records
            .iter()
            .find(|b| b.config.variant == Variant::Baseline && key(b) == key(h))
        else {
            continue;
        };
        let picks: [MetricPick; 2] = [
            (h.score_metric, |m| m.test_score),
            (h.loss_metric, |m| m.test_loss),
        ];
        for (metric, pick) in picks {
            let (delta, std) = improvement(&h.values(pick), &b.values(pick), metric)?;
            rows.push(ImprovementRow {
                task: task_name(h.config.task).into(),
                device: h.config.device.clone(),
                qubits: h.config.num_qubits,
                model: h.config.variant.to_string(),
                metric: metric.name().into(),
                delta,
                std,
                trials: h.trials.len(),
            });
        }
    }
    Ok(rows)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        w.write_record(header.split(','))
            .map_err(|e| Error::Data(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Reads every `*.json` record in `dir`, sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        })
        .collect()
}

/// Writes `tables/*.csv` and `plots/*.svg` under `out_dir`.
pub fn write_report(records: &[ExperimentRecord], out_dir: &Path) -> Result<ReportFiles> {
    if records.is_empty() {
        return Err(Error::Data("no experiment records to report".into()));
    }
    let tables = out_dir.join("tables");
    let plots = out_dir.join("plots");
    for d in [&tables, &plots] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut files = ReportFiles::default();

    let p = tables.join("performance.csv");
    write_csv(&p, &table_rows(records), "")?;
    files.tables.push(p);

    let curves = loss_curve_rows(records);
    let p = tables.join("loss_curves.csv");
    write_csv(
        &p,
        &curves,
        "task,device,model,qubits,epoch,train_mean,train_std,val_mean,val_std",
    )?;
    files.tables.push(p);

    let improvements = improvement_rows(records)?;
    let p = tables.join("improvement.csv");
    write_csv(
        &p,
        &improvements,
        "task,device,qubits,model,metric,delta,std,trials",
    )?;
    files.tables.push(p);

    let mut shap_rows = Vec::new();
    let mut summaries = Vec::new();
    let mut calib_rows = Vec::new();
    for r in sorted(records) {
        let reports: Vec<_> = r
            .trials
            .iter()
            .filter_map(|t| t.attribution.clone())
            .collect();
        for (t, rep) in r
            .trials
            .iter()
            .filter_map(|t| t.attribution.as_ref().map(|a| (t.trial, a)))
        {
            for (label, v) in rep.labels.iter().zip(&rep.mean_abs) {
                shap_rows.push(ShapRow {
                    task: task_name(r.config.task).into(),
                    device: r.config.device.clone(),
                    model: r.config.variant.to_string(),
                    qubits: r.config.num_qubits,
                    feature: label.clone(),
                    trial: t,
                    mean_abs_shap: *v,
                });
            }
        }
        if !reports.is_empty() {
            let features = aggregate_trials(&reports)?;
            let boxes: Vec<_> = features
                .iter()
                .map(|f| (f.label.clone(), f.stats.clone()))
                .collect();
            let p = plots.join(format!("shap_{}.svg", slug(&r.label)));
            write_text(
                &p,
                &box_plot(&format!("mean |SHAP|: {}", r.label), "mean |SHAP|", &boxes),
            )?;
            files.plots.push(p);
            summaries.push(ShapSummary {
                record: r.label.clone(),
                features,
            });
        }
        let snaps: Vec<CalibrationSnapshot> = r
            .trials
            .iter()
            .filter_map(|t| t.calibration.clone())
            .collect();
        for (metric, s) in pooled_stats(&snaps) {
            calib_rows.push(CalibrationRow {
                task: task_name(r.config.task).into(),
                device: r.config.device.clone(),
                model: r.config.variant.to_string(),
                qubits: r.config.num_qubits,
                metric,
                mean: s.mean,
                std: s.std,
            });
        }
    }
    let p = tables.join("shap.csv");
    write_csv(
        &p,
        &shap_rows,
        "task,device,model,qubits,feature,trial,mean_abs_shap",
    )?;
    files.tables.push(p);
    let p = tables.join("shap_summary.json");
    write_text(&p, &serde_json::to_string_pretty(&summaries)?)?;
    files.tables.push(p);
    let p = tables.join("calibration.csv");
    write_csv(&p, &calib_rows, "task,device,model,qubits,metric,mean,std")?;
    files.tables.push(p);

    let mut groups: BTreeMap<(String, String, usize), Vec<&LossCurveRow>> = BTreeMap::new();
    for c in &curves {
        groups
            .entry((c.task.clone(), c.device.clone(), c.qubits))
            .or_default()
            .push(c);
    }
    for ((task, device, n), rows) in &groups {
        let mut models: Vec<&str> = Vec::new();
        for r in rows {
            if !models.contains(&r.model.as_str()) {
                models.push(&r.model);
            }
        }
        let mut series = Vec::new();
        for (i, m) in models.iter().enumerate() {
            let mine: Vec<&&LossCurveRow> = rows.iter().filter(|r| r.model == *m).collect();
            for (dashed, suffix) in [(false, "train"), (true, "val")] {
                series.push(Series {
                    name: format!("{m} {suffix}"),
                    points: mine
                        .iter()
                        .map(|r| {
                            (
                                r.epoch as f64,
                                if dashed { r.val_mean } else { r.train_mean },
                            )
                        })
                        .collect(),
                    band: Some(
                        mine.iter()
                            .map(|r| if dashed { r.val_std } else { r.train_std })
                            .collect(),
                    ),
                    dashed,
                    color: i,
                });
            }
        }
        let p = plots.join(format!("loss_{}_{}_{n}q.svg", slug(task), slug(device)));
        write_text(
            &p,
            &line_plot(
                &format!("{task} loss, {device}, {n} qubits"),
                "epoch",
                "loss",
                &series,
            ),
        )?;
        files.plots.push(p);
    }

    let mut by_metric: BTreeMap<(String, String), Vec<&ImprovementRow>> = BTreeMap::new();
    for r in &improvements {
        by_metric
            .entry((r.task.clone(), r.metric.clone()))
            .or_default()
            .push(r);
    }
    for ((task, metric), rows) in &by_metric {
        let mut lines: BTreeMap<(String, String), Vec<&ImprovementRow>> = BTreeMap::new();
        for r in rows {
            lines
                .entry((r.device.clone(), r.model.clone()))
                .or_default()
                .push(r);
        }
        let series: Vec<Series> = lines
            .iter()
            .enumerate()
            .map(|(i, ((device, model), rs))| {
                let mut rs = rs.clone();
                rs.sort_by_key(|r| r.qubits);
                Series {
                    name: format!("{model} ({device})"),
                    points: rs.iter().map(|r| (r.qubits as f64, r.delta)).collect(),
                    band: Some(rs.iter().map(|r| r.std).collect()),
                    dashed: model == "hqcnn-ez",
                    color: i,
                }
            })
            .collect();
        let p = plots.join(format!("improvement_{}_{}.svg", slug(task), slug(metric)));
        write_text(
            &p,
            &line_plot(
                &format!("{task}: improvement in {metric} over the baseline"),
                "qubits",
                metric,
                &series,
            ),
        )?;
        files.plots.push(p);
    }
    Ok(files)
}
