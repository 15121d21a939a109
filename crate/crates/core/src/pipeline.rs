//! Two-stage recognition, corpus training and accuracy reporting.
//!
//! Stage one routes a glyph to its structural group; stage two runs that group's network
//! on the 32 zoning features. A group without a model rejects rather than borrowing a
//! neighbor's network, so accuracy accounting never hides a routing failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::features::{extract_features, scale_features, FeatureRow, FeatureVector, TILES_PER_SIDE};
use crate::fsutil::write_atomic;
use crate::nn::{self, Mlp, Sample, TrainReport};
use crate::raster::{
    is_normalized_skeleton, normalize, pnm, prune, thicken, thin_to_convergence, BinaryImage, Skeleton,
};
use crate::structural::{analyze, StructuralAnalysis, StructuralClass};
use crate::synth::{Split, MANIFEST_NAME};

/// Rounds of normalize-then-prune allowed for the output to settle.
const SETTLE_ROUNDS: usize = 4;

/// Binarized glyph to normalized skeleton: crop, pad, thicken, thin, prune, normalize,
/// prune.
///
/// The spur limit is meant at the 100×100 scale, so pruning runs again after
/// normalization; if that exposes a new bounding box the glyph is normalized again. An
/// input that is already a pruned normalized skeleton is returned unchanged, which makes
/// the whole chain idempotent.
pub fn preprocess_glyph(img: &BinaryImage, cfg: &Config) -> Result<Skeleton> {
    if is_normalized_skeleton(img) && prune(img, cfg.max_spur) == *img {
        return Skeleton::from_image(img.clone());
    }
    let bbox = img.bounding_box()?;
    // the margin lets thickening grow outward instead of clipping at the crop edge
    let glyph = img.crop(&bbox)?.pad(2);
    let mut current = prune(&thin_to_convergence(&thicken(&glyph)), cfg.max_spur);
    for _ in 0..SETTLE_ROUNDS {
        let pruned = prune(normalize(&current)?.image(), cfg.max_spur);
        if is_normalized_skeleton(&pruned) {
            return Skeleton::from_image(pruned);
        }
        current = pruned;
    }
    normalize(&current)
}

/// Feature vector with the matra stroke (if any) cleared one pixel either side.
pub fn body_features(skel: &Skeleton, analysis: &StructuralAnalysis) -> Result<FeatureVector> {
    match &analysis.spine.matra_run {
        None => extract_features(skel),
        Some(run) => {
            let mut img = skel.image().clone();
            for &(r, c) in &run.points {
                for cc in c.saturating_sub(1)..=(c + 1).min(img.width() - 1) {
                    img.set(r, cc, false);
                }
            }
            extract_features(&img)
        }
    }
}

/// Everything stage two needs from one glyph.
#[derive(Debug, Clone)]
pub struct PreparedGlyph {
    pub skeleton: Skeleton,
    pub analysis: StructuralAnalysis,
    pub features: FeatureVector,
}

impl PreparedGlyph {
    pub fn group(&self) -> StructuralClass {
        self.analysis.class
    }

    /// The accepted headline trace alone on a blank 100×100 raster.
    pub fn shirorekha_overlay(&self) -> BinaryImage {
        let mut img = BinaryImage::new(self.skeleton.width(), self.skeleton.height());
        for &(r, c) in self.analysis.shirorekha.trace.iter().flat_map(|t| &t.points) {
            img.set(r, c, true);
        }
        img
    }

    /// Spine and matra runs alone on a blank 100×100 raster.
    pub fn spine_overlay(&self) -> BinaryImage {
        let mut img = BinaryImage::new(self.skeleton.width(), self.skeleton.height());
        let spine = &self.analysis.spine;
        for run in spine.spine_run.iter().chain(&spine.matra_run) {
            for &(r, c) in &run.points {
                img.set(r, c, true);
            }
        }
        img
    }

    /// Plain-text account of the structural decision and the feature counts.
    pub fn summary(&self) -> String {
        let a = &self.analysis;
        let col = |c: Option<usize>| c.map_or_else(|| "-".to_string(), |c| c.to_string());
        let mut out = format!(
            "group: {} ({})\nshirorekha: {:?}, span {:.3}\nspine: {:?}, column {}, matra column {}\n",
            a.class.slug(),
            a.class.title(),
            a.shirorekha.kind,
            a.shirorekha.span_ratio,
            a.spine.kind,
            col(a.spine.spine_col),
            col(a.spine.matra_col),
        );
        out.push_str("features (intersections/open ends per tile, row-major):\n");
        for tr in 0..TILES_PER_SIDE {
            let cells: Vec<String> = (0..TILES_PER_SIDE)
                .map(|tc| {
                    let t = tr * TILES_PER_SIDE + tc;
                    format!("{}/{}", self.features.intersections(t), self.features.open_ends(t))
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        let values: Vec<String> = self.features.values().iter().map(u32::to_string).collect();
        out.push_str(&format!("vector: {}\n", values.join(",")));
        out
    }
}

pub fn prepare(img: &BinaryImage, cfg: &Config) -> Result<PreparedGlyph> {
    let skeleton = preprocess_glyph(img, cfg)?;
    let analysis = analyze(&skeleton, &cfg.structural)?;
    let features = body_features(&skeleton, &analysis)?;
    Ok(PreparedGlyph {
        skeleton,
        analysis,
        features,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictedLabel {
    Class(String),
    Rejected,
}

impl fmt::Display for PredictedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictedLabel::Class(s) => f.write_str(s),
            PredictedLabel::Rejected => f.write_str("REJECTED"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub group: StructuralClass,
    pub label: PredictedLabel,
    /// Winning softmax probability, or 0 when rejected.
    pub confidence: f64,
}

/// One network and the labels of its output units, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    pub net: Mlp,
    pub labels: Vec<String>,
}

impl GroupModel {
    pub fn new(net: Mlp, labels: Vec<String>) -> Result<Self> {
        if net.n_out() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: net.n_out(),
                found: labels.len(),
            });
        }
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::MalformedModelFile("duplicate labels".into()));
        }
        Ok(Self { net, labels })
    }
}

pub const MODELSET_NAME: &str = "modelset.txt";
const MODELSET_MAGIC: &str = "DEVOC-MODELSET v1";

/// Per-group networks. Groups without an entry reject.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupModelSet {
    models: BTreeMap<StructuralClass, GroupModel>,
}

impl GroupModelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, group: StructuralClass, model: GroupModel) {
        self.models.insert(group, model);
    }

    pub fn get(&self, group: StructuralClass) -> Option<&GroupModel> {
        self.models.get(&group)
    }

    pub fn groups(&self) -> impl Iterator<Item = StructuralClass> + '_ {
        self.models.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Writes `<slug>.mlp` per group and the `modelset.txt` index.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut index = format!("{MODELSET_MAGIC}\n");
        for (group, model) in &self.models {
            let file = format!("{}.mlp", group.slug());
            nn::save_model(&dir.join(&file), &model.net, &model.labels)?;
            index.push_str(&format!("{} {}\n", group.slug(), file));
        }
        write_atomic(&dir.join(MODELSET_NAME), index.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let index_path = dir.join(MODELSET_NAME);
        let text = fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.trim() == MODELSET_MAGIC => {}
            Some(l) if l.starts_with("DEVOC-MODELSET v") => {
                return Err(Error::VersionMismatch {
                    found: l["DEVOC-MODELSET v".len()..].to_string(),
                    supported: 1,
                })
            }
            _ => return Err(Error::MalformedModelFile(format!("{}: bad header", index_path.display()))),
        }
        let mut set = Self::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (slug, file) = line
                .split_once(' ')
                .ok_or_else(|| Error::MalformedModelFile(format!("bad modelset line {line:?}")))?;
            let group: StructuralClass = slug
                .parse()
                .map_err(|_| Error::MalformedModelFile(format!("unknown group {slug:?}")))?;
            let (net, labels) = nn::load_model(&dir.join(file.trim()))?;
            set.insert(group, GroupModel::new(net, labels)?);
        }
        Ok(set)
    }
}

/// Stage two on an already prepared glyph; the group is never overridden.
pub fn classify_prepared(glyph: &PreparedGlyph, models: &GroupModelSet) -> Result<Prediction> {
    let group = glyph.group();
    let Some(model) = models.get(group) else {
        return Ok(Prediction {
            group,
            label: PredictedLabel::Rejected,
            confidence: 0.0,
        });
    };
    let (idx, p) = model.net.predict(&scale_features(&glyph.features))?;
    Ok(Prediction {
        group,
        label: PredictedLabel::Class(model.labels[idx].clone()),
        confidence: p,
    })
}

pub fn recognize(img: &BinaryImage, models: &GroupModelSet, cfg: &Config) -> Result<Prediction> {
    classify_prepared(&prepare(img, cfg)?, models)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    /// Relative to the corpus root.
    pub path: String,
    pub class_label: String,
    pub group: StructuralClass,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    /// Reads `<root>/manifest.csv`.
    pub fn load(root: &Path) -> Result<Self> {
        let manifest = root.join(MANIFEST_NAME);
        let file = fs::File::open(&manifest).map_err(|e| Error::io(&manifest, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let headers = reader
            .headers()
            .map_err(|e| Error::MalformedManifest(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["path", "class_label", "group", "split"] {
            return Err(Error::MalformedManifest(format!("unexpected header {headers:?}")));
        }
        let mut entries = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::MalformedManifest(e.to_string()))?;
            entries.push(CorpusEntry {
                path: rec[0].to_string(),
                class_label: rec[1].to_string(),
                group: rec[2].parse()?,
                split: rec[3].parse()?,
            });
        }
        Ok(Self {
            root: root.to_path_buf(),
            entries,
        })
    }

    pub fn image(&self, entry: &CorpusEntry) -> Result<BinaryImage> {
        pnm::load_pbm(&self.root.join(&entry.path))
    }

    /// Prepares every entry in parallel; results keep manifest order.
    pub fn prepare_all(&self, cfg: &Config) -> Result<Vec<PreparedGlyph>> {
        self.entries
            .par_iter()
            .map(|e| {
                let img = self.image(e)?;
                prepare(&img, cfg).map_err(|err| match err {
                    Error::EmptyImage => {
                        warn!("{}: empty glyph", e.path);
                        Error::EmptyImage
                    }
                    other => other,
                })
            })
            .collect()
    }
}

/// Outcome of training one group network.
#[derive(Debug, Clone)]
pub struct GroupTrainReport {
    pub group: StructuralClass,
    pub labels: Vec<String>,
    pub n_samples: usize,
    /// Samples routed here whose manifest group differs.
    pub routing_errors: usize,
    pub report: TrainReport,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub models: GroupModelSet,
    pub reports: Vec<GroupTrainReport>,
    /// Detected groups skipped because they hold fewer than two classes.
    pub skipped: Vec<StructuralClass>,
    pub feature_rows: Vec<FeatureRow>,
}

/// Trains one network per detected group on the training split.
///
/// A detected group with a single class is fatal if the manifest also declares that
/// group; if it only exists because of routing errors it is skipped with a warning.
pub fn train_all(corpus: &Corpus, cfg: &Config) -> Result<TrainOutcome> {
    let train: Vec<&CorpusEntry> = corpus.entries.iter().filter(|e| e.split == Split::Train).collect();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sub = Corpus {
        root: corpus.root.clone(),
        entries: train.iter().map(|e| (*e).clone()).collect(),
    };
    let prepared = sub.prepare_all(cfg)?;

    let manifest_groups: BTreeSet<StructuralClass> = train.iter().map(|e| e.group).collect();
    let mut by_group: BTreeMap<StructuralClass, Vec<usize>> = BTreeMap::new();
    for (i, p) in prepared.iter().enumerate() {
        by_group.entry(p.group()).or_default().push(i);
    }

    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for (group, idx) in &by_group {
        let labels: Vec<String> = idx
            .iter()
            .map(|&i| train[i].class_label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if labels.len() < 2 {
            if manifest_groups.contains(group) {
                return Err(Error::InsufficientData {
                    group: group.slug(),
                    reason: format!("{} detected training samples, all of class {:?}", idx.len(), labels[0]),
                });
            }
            warn!("skipping {}: only routing errors, one class", group.slug());
            skipped.push(*group);
            continue;
        }
        let routing_errors = idx.iter().filter(|&&i| train[i].group != *group).count();
        if routing_errors > 0 {
            warn!("{}: {} routing errors among {} samples", group.slug(), routing_errors, idx.len());
        }
        let samples: Vec<Sample> = idx
            .iter()
            .map(|&i| Sample {
                x: scale_features(&prepared[i].features).to_vec(),
                label: labels.binary_search(&train[i].class_label).expect("label collected above"),
            })
            .collect();
        jobs.push((*group, labels, samples, routing_errors));
    }

    let trained: Vec<Result<(StructuralClass, GroupModel, GroupTrainReport)>> = jobs
        .into_par_iter()
        .map(|(group, labels, samples, routing_errors)| {
            let init = Mlp::init(cfg.train.n_hidden, labels.len(), cfg.train.seed)?;
            let (net, report) = nn::train(&init, &samples, &cfg.train)?;
            info!(
                "{}: {} samples, {} epochs, loss {:.3e}, {}",
                group.slug(),
                samples.len(),
                report.epochs_run,
                report.final_loss,
                report.stop_reason
            );
            let rep = GroupTrainReport {
                group,
                labels: labels.clone(),
                n_samples: samples.len(),
                routing_errors,
                report,
            };
            Ok((group, GroupModel::new(net, labels)?, rep))
        })
        .collect();

    let mut models = GroupModelSet::new();
    let mut reports = Vec::new();
    for t in trained {
        let (group, model, rep) = t?;
        models.insert(group, model);
        reports.push(rep);
    }
    let feature_rows = prepared
        .iter()
        .zip(&train)
        .map(|(p, e)| FeatureRow {
            label: e.class_label.clone(),
            group: p.group().slug(),
            features: p.features.clone(),
        })
        .collect();
    Ok(TrainOutcome {
        models,
        reports,
        skipped,
        feature_rows,
    })
}

/// One evaluated sample, as written to the prediction log.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub path: String,
    pub split: Split,
    pub true_label: String,
    pub true_group: StructuralClass,
    pub detected_group: StructuralClass,
    pub predicted: PredictedLabel,
    pub confidence: f64,
}

impl PredictionRecord {
    pub fn is_correct(&self) -> bool {
        matches!(&self.predicted, PredictedLabel::Class(l) if *l == self.true_label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupRow {
    pub n_test: usize,
    pub correct_test: usize,
    pub n_train: usize,
    pub correct_train: usize,
}

fn percent(correct: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| 100.0 * correct as f64 / n as f64)
}

impl GroupRow {
    pub fn test_accuracy(&self) -> Option<f64> {
        percent(self.correct_test, self.n_test)
    }

    pub fn train_accuracy(&self) -> Option<f64> {
        percent(self.correct_train, self.n_train)
    }
}

/// Accuracy per manifest group, so routing errors count against the true group.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: BTreeMap<StructuralClass, GroupRow>,
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

impl EvalReport {
    pub fn from_records(records: &[PredictionRecord]) -> Self {
        let mut rows: BTreeMap<StructuralClass, GroupRow> = BTreeMap::new();
        for r in records {
            let row = rows.entry(r.true_group).or_default();
            let ok = r.is_correct() as usize;
            match r.split {
                Split::Test => {
                    row.n_test += 1;
                    row.correct_test += ok;
                }
                Split::Train => {
                    row.n_train += 1;
                    row.correct_train += ok;
                }
            }
        }
        Self { rows }
    }

    fn totals(&self) -> GroupRow {
        self.rows.values().fold(GroupRow::default(), |a, r| GroupRow {
            n_test: a.n_test + r.n_test,
            correct_test: a.correct_test + r.correct_test,
            n_train: a.n_train + r.n_train,
            correct_train: a.correct_train + r.correct_train,
        })
    }

    /// Correct over all samples of both splits.
    pub fn overall_accuracy(&self) -> Option<f64> {
        let t = self.totals();
        percent(t.correct_test + t.correct_train, t.n_test + t.n_train)
    }

    pub fn overall_test_accuracy(&self) -> Option<f64> {
        let t = self.totals();
        percent(t.correct_test, t.n_test)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<40} {:>9} {:>10} {:>7} {:>8}\n",
            "group", "test_acc", "train_acc", "n_test", "n_train"
        );
        for (g, r) in &self.rows {
            out.push_str(&format!(
                "{:<40} {:>9} {:>10} {:>7} {:>8}\n",
                g.title(),
                fmt_pct(r.test_accuracy()),
                fmt_pct(r.train_accuracy()),
                r.n_test,
                r.n_train
            ));
        }
        let t = self.totals();
        out.push_str(&format!(
            "{:<40} {:>9} {:>10} {:>7} {:>8}\n",
            "overall",
            fmt_pct(t.test_accuracy()),
            fmt_pct(t.train_accuracy()),
            t.n_test,
            t.n_train
        ));
        out.push_str(&format!("overall accuracy (both splits): {}\n", fmt_pct(self.overall_accuracy())));
        out
    }

    /// `group,test_acc,train_acc,n_test,n_train`, one row per group then `overall`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,test_acc,train_acc,n_test,n_train\n");
        let t = self.totals();
        let rows = self.rows.iter().map(|(g, r)| (g.slug(), r)).chain(std::iter::once(("overall".to_string(), &t)));
        for (name, r) in rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                name,
                fmt_pct(r.test_accuracy()),
                fmt_pct(r.train_accuracy()),
                r.n_test,
                r.n_train
            ));
        }
        out
    }
}

pub fn prediction_log_csv(records: &[PredictionRecord]) -> String {
    let mut out = String::from("path,split,true_label,true_group,detected_group,predicted_label,confidence\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6}\n",
            r.path,
            r.split.as_str(),
            r.true_label,
            r.true_group.slug(),
            r.detected_group.slug(),
            r.predicted,
            r.confidence
        ));
    }
    out
}

/// Recognizes every manifest entry, both splits, in manifest order.
pub fn evaluate(corpus: &Corpus, models: &GroupModelSet, cfg: &Config) -> Result<(EvalReport, Vec<PredictionRecord>)> {
    let prepared = corpus.prepare_all(cfg)?;
    let records = prepared
        .par_iter()
        .zip(&corpus.entries)
        .map(|(p, e)| {
            let pred = classify_prepared(p, models)?;
            Ok(PredictionRecord {
                path: e.path.clone(),
                split: e.split,
                true_label: e.class_label.clone(),
                true_group: e.group,
                detected_group: pred.group,
                predicted: pred.label,
                confidence: pred.confidence,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((EvalReport::from_records(&records), records))
}

pub const REPORT_TEXT_NAME: &str = "report.txt";
pub const REPORT_CSV_NAME: &str = "report.csv";
pub const PREDICTIONS_NAME: &str = "predictions.csv";

/// Writes the text table, the report CSV and the prediction log into `dir`.
pub fn write_report(dir: &Path, report: &EvalReport, records: &[PredictionRecord]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_atomic(&dir.join(REPORT_TEXT_NAME), report.to_text().as_bytes())?;
    write_atomic(&dir.join(REPORT_CSV_NAME), report.to_csv().as_bytes())?;
    write_atomic(&dir.join(PREDICTIONS_NAME), prediction_log_csv(records).as_bytes())
}
