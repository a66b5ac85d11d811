//! Class-stratified, video-level train/val/test splitting.
//!
//! Three greedy passes pin videos so that every class has a training video
//! (1a), every class with at least two source videos has a test video (1b),
//! and every class with at least three has a validation video (1c). The
//! remaining videos fill whichever split is furthest below its frame-share
//! target. No randomness is involved, so the split fingerprint is a property
//! of the dataset alone.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classes::{class_index, class_name, CLASS_NAMES, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame_id: String,
    pub class_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub frames: Vec<FrameEntry>,
}

impl VideoEntry {
    pub fn frames_of(&self, class: usize) -> usize {
        self.frames
            .iter()
            .filter(|f| f.class_index == class)
            .count()
    }

    pub fn classes(&self) -> BTreeSet<usize> {
        self.frames.iter().map(|f| f.class_index).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub videos: Vec<VideoEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut videos = HashSet::new();
        let mut frames = HashSet::new();
        for v in &self.videos {
            if !videos.insert(v.video_id.as_str()) {
                issues.push(format!("duplicate video_id {:?}", v.video_id));
            }
            for f in &v.frames {
                if f.class_index >= NUM_CLASSES {
                    issues.push(format!(
                        "frame {:?} in video {:?}: class index {} out of range",
                        f.frame_id, v.video_id, f.class_index
                    ));
                }
                if !frames.insert(f.frame_id.as_str()) {
                    issues.push(format!("frame {:?} listed more than once", f.frame_id));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::validation("manifest", issues))
        }
    }

    pub fn total_frames(&self) -> usize {
        self.videos.iter().map(|v| v.frames.len()).sum()
    }

    /// Number of distinct videos containing each class.
    pub fn source_video_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for v in &self.videos {
            for c in v.classes() {
                counts[c] += 1;
            }
        }
        counts
    }

    fn video(&self, id: &str) -> Option<&VideoEntry> {
        self.videos.iter().find(|v| v.video_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

/// Target frame shares for train/val/test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios(pub [f64; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios([0.70, 0.15, 0.15])
    }
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let r = [train, val, test];
        if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "ratios must be >= 0, got {r:?}"
            )));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "ratios must sum to 1, got {sum}"
            )));
        }
        Ok(SplitRatios(r))
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("ratios {s:?}: {e}")))?;
        match parts[..] {
            [a, b, c] => SplitRatios::new(a, b, c),
            _ => Err(Error::InvalidArgument(format!(
                "expected three comma-separated ratios, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub assignment: BTreeMap<String, Split>,
    /// `coverage[class][split]` = number of videos of that class in that split.
    pub coverage: Vec<[usize; 3]>,
    pub frame_counts: [usize; 3],
    /// Classes with a single source video.
    pub training_only: Vec<String>,
}

impl SplitAssignment {
    /// Recomputes coverage and frame counts from `assignment`.
    pub fn from_assignment(
        manifest: &DatasetManifest,
        assignment: BTreeMap<String, Split>,
    ) -> Result<Self> {
        let mut coverage = vec![[0usize; 3]; NUM_CLASSES];
        let mut frame_counts = [0usize; 3];
        for (id, &split) in &assignment {
            let v = manifest
                .video(id)
                .ok_or_else(|| Error::Missing(format!("video {id:?} is not in the manifest")))?;
            frame_counts[split.index()] += v.frames.len();
            for c in v.classes() {
                coverage[c][split.index()] += 1;
            }
        }
        let counts = manifest.source_video_counts();
        let training_only = (0..NUM_CLASSES)
            .filter(|&c| counts[c] == 1)
            .map(|c| CLASS_NAMES[c].to_string())
            .collect();
        Ok(Self {
            assignment,
            coverage,
            frame_counts,
            training_only,
        })
    }

    pub fn split_of(&self, video_id: &str) -> Option<Split> {
        self.assignment.get(video_id).copied()
    }

    pub fn videos_in(&self, split: Split) -> usize {
        self.assignment.values().filter(|&&s| s == split).count()
    }
}

struct Planner<'a> {
    manifest: &'a DatasetManifest,
    assigned: Vec<Option<Split>>,
    source_counts: [usize; NUM_CLASSES],
}

impl Planner<'_> {
    fn coverage(&self) -> Vec<[usize; 3]> {
        let mut cov = vec![[0usize; 3]; NUM_CLASSES];
        for (v, s) in self.manifest.videos.iter().zip(&self.assigned) {
            if let Some(s) = s {
                for c in v.classes() {
                    cov[c][s.index()] += 1;
                }
            }
        }
        cov
    }

    /// Constraints (class, split) that are required and currently met.
    fn satisfied(&self) -> Vec<(usize, Split)> {
        let cov = self.coverage();
        REQUIREMENTS
            .iter()
            .flat_map(|&(split, min)| {
                (0..NUM_CLASSES)
                    .filter(move |&c| self.source_counts[c] >= min)
                    .map(move |c| (c, split))
            })
            .filter(|&(c, s)| cov[c][s.index()] > 0)
            .collect()
    }

    fn cover(&mut self, split: Split, min_videos: usize) {
        let mut classes: Vec<usize> = (0..NUM_CLASSES)
            .filter(|&c| self.source_counts[c] >= min_videos)
            .collect();
        classes.sort_by_key(|&c| (self.source_counts[c], c));
        for c in classes {
            if self.coverage()[c][split.index()] > 0 {
                continue;
            }
            let pick = self
                .manifest
                .videos
                .iter()
                .enumerate()
                .filter(|(i, v)| self.assigned[*i].is_none() && v.frames_of(c) > 0)
                .min_by(|(_, a), (_, b)| {
                    b.frames_of(c)
                        .cmp(&a.frames_of(c))
                        .then(b.frames.len().cmp(&a.frames.len()))
                        .then(a.video_id.cmp(&b.video_id))
                })
                .map(|(i, _)| i);
            match pick {
                Some(i) => self.assigned[i] = Some(split),
                None => self.repair(c, split),
            }
        }
    }

    /// Moves an already pinned video of `class` into `split` when doing so keeps
    /// every constraint that currently holds.
    fn repair(&mut self, class: usize, split: Split) {
        let before = self.satisfied();
        let mut candidates: Vec<usize> = (0..self.manifest.videos.len())
            .filter(|&i| {
                self.assigned[i].is_some_and(|s| s != split)
                    && self.manifest.videos[i].frames_of(class) > 0
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            let (va, vb) = (&self.manifest.videos[a], &self.manifest.videos[b]);
            vb.frames_of(class)
                .cmp(&va.frames_of(class))
                .then(va.video_id.cmp(&vb.video_id))
        });
        for i in candidates {
            let old = self.assigned[i];
            self.assigned[i] = Some(split);
            let after: HashSet<_> = self.satisfied().into_iter().collect();
            if before.iter().all(|k| after.contains(k)) {
                return;
            }
            self.assigned[i] = old;
        }
    }

    fn required(&self, class: usize) -> impl Iterator<Item = Split> + '_ {
        REQUIREMENTS
            .iter()
            .filter(move |&&(_, min)| self.source_counts[class] >= min)
            .map(|&(s, _)| s)
    }

    fn all_covered(&self) -> bool {
        let cov = self.coverage();
        (0..NUM_CLASSES).all(|c| self.required(c).all(|s| cov[c][s.index()] > 0))
    }

    /// Exhaustive fallback for manifests where the passes paint themselves into a
    /// corner. Each video is pinned to a split or left free for the remainder
    /// step; the greedy choice is tried first so a near-miss stays close to it.
    /// Gives up after `SEARCH_BUDGET` nodes and keeps the greedy plan.
    fn search(&mut self) {
        let n = self.manifest.videos.len();
        let classes: Vec<Vec<usize>> = self
            .manifest
            .videos
            .iter()
            .map(|v| v.classes().into_iter().collect())
            .collect();
        // most constrained videos first
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| {
            (
                std::cmp::Reverse(classes[i].len()),
                self.manifest.videos[i].video_id.clone(),
            )
        });
        let mut state = Search {
            classes: &classes,
            required: (0..NUM_CLASSES)
                .map(|c| self.required(c).collect())
                .collect(),
            cov: vec![[0; 3]; NUM_CLASSES],
            undecided: self.source_counts,
            choice: vec![None; n],
            nodes: 0,
        };
        if state.descend(&order, 0, &self.assigned) {
            self.assigned = state.choice;
        }
    }

    fn fill_remainder(&mut self, ratios: &SplitRatios) {
        let total = self.manifest.total_frames() as f64;
        let mut frames = [0usize; 3];
        for (v, s) in self.manifest.videos.iter().zip(&self.assigned) {
            if let Some(s) = s {
                frames[s.index()] += v.frames.len();
            }
        }
        let mut rest: Vec<usize> = (0..self.manifest.videos.len())
            .filter(|&i| self.assigned[i].is_none())
            .collect();
        rest.sort_by(|&a, &b| {
            let (va, vb) = (&self.manifest.videos[a], &self.manifest.videos[b]);
            vb.frames
                .len()
                .cmp(&va.frames.len())
                .then(va.video_id.cmp(&vb.video_id))
        });
        for i in rest {
            let deficit = |s: Split| ratios.0[s.index()] * total - frames[s.index()] as f64;
            let mut best = Split::Train;
            for s in [Split::Val, Split::Test] {
                if deficit(s) > deficit(best) {
                    best = s;
                }
            }
            self.assigned[i] = Some(best);
            frames[best.index()] += self.manifest.videos[i].frames.len();
        }
    }
}

const SEARCH_BUDGET: usize = 5_000_000;

struct Search<'a> {
    classes: &'a [Vec<usize>],
    required: Vec<Vec<Split>>,
    cov: Vec<[usize; 3]>,
    undecided: [usize; NUM_CLASSES],
    choice: Vec<Option<Split>>,
    nodes: usize,
}

impl Search<'_> {
    fn feasible(&self, classes: &[usize]) -> bool {
        classes.iter().all(|&c| {
            let missing = self.required[c]
                .iter()
                .filter(|s| self.cov[c][s.index()] == 0)
                .count();
            missing <= self.undecided[c]
        })
    }

    fn descend(&mut self, order: &[usize], depth: usize, greedy: &[Option<Split>]) -> bool {
        let Some(&v) = order.get(depth) else {
            return true;
        };
        let mut options = vec![greedy[v]];
        for s in [
            None,
            Some(Split::Train),
            Some(Split::Test),
            Some(Split::Val),
        ] {
            if !options.contains(&s) {
                options.push(s);
            }
        }
        for s in options {
            self.nodes += 1;
            if self.nodes > SEARCH_BUDGET {
                return false;
            }
            for &c in &self.classes[v] {
                self.undecided[c] -= 1;
                if let Some(s) = s {
                    self.cov[c][s.index()] += 1;
                }
            }
            self.choice[v] = s;
            if self.feasible(&self.classes[v]) && self.descend(order, depth + 1, greedy) {
                return true;
            }
            for &c in &self.classes[v] {
                self.undecided[c] += 1;
                if let Some(s) = s {
                    self.cov[c][s.index()] -= 1;
                }
            }
            self.choice[v] = None;
        }
        false
    }
}

/// (split, minimum number of source videos) for constraints 1a, 1b, 1c, in pass order.
const REQUIREMENTS: [(Split, usize); 3] = [(Split::Train, 1), (Split::Test, 2), (Split::Val, 3)];

pub fn greedy_video_split(
    manifest: &DatasetManifest,
    ratios: &SplitRatios,
) -> Result<SplitAssignment> {
    manifest.validate()?;
    if manifest.videos.is_empty() {
        return Err(Error::InvalidArgument("manifest has no videos".into()));
    }
    let mut planner = Planner {
        manifest,
        assigned: vec![None; manifest.videos.len()],
        source_counts: manifest.source_video_counts(),
    };
    for (split, min) in REQUIREMENTS {
        planner.cover(split, min);
    }
    if !planner.all_covered() {
        planner.search();
    }
    planner.fill_remainder(ratios);
    let assignment = manifest
        .videos
        .iter()
        .zip(&planner.assigned)
        .map(|(v, s)| (v.video_id.clone(), s.expect("every video assigned")))
        .collect();
    SplitAssignment::from_assignment(manifest, assignment)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub offending_classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub constraints: Vec<ConstraintCheck>,
    /// Classes with at least one test video.
    pub evaluable_classes: Vec<String>,
    pub training_only: Vec<String>,
    pub videos_per_split: [usize; 3],
    pub frames_per_split: [usize; 3],
}

impl ConstraintReport {
    pub fn all_passed(&self) -> bool {
        self.constraints.iter().all(|c| c.passed)
    }
}

pub fn validate_split(
    manifest: &DatasetManifest,
    assignment: &SplitAssignment,
) -> Result<ConstraintReport> {
    let known: HashSet<&str> = manifest
        .videos
        .iter()
        .map(|v| v.video_id.as_str())
        .collect();
    let unknown: Vec<String> = assignment
        .assignment
        .keys()
        .filter(|id| !known.contains(id.as_str()))
        .map(|id| format!("unknown video_id {id:?}"))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::validation("split assignment", unknown));
    }
    let missing: Vec<String> = manifest
        .videos
        .iter()
        .filter(|v| !assignment.assignment.contains_key(&v.video_id))
        .map(|v| format!("video {:?} has no split", v.video_id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::validation("split assignment", missing));
    }
    // recompute rather than trust the stored coverage
    let fresh = SplitAssignment::from_assignment(manifest, assignment.assignment.clone())?;
    let counts = manifest.source_video_counts();
    let descriptions = [
        "every class has >= 1 training video",
        "every class with >= 2 source videos has >= 1 test video",
        "every class with >= 3 source videos has >= 1 validation video",
    ];
    let constraints = REQUIREMENTS
        .iter()
        .zip(["1a", "1b", "1c"])
        .zip(descriptions)
        .map(|((&(split, min), id), description)| {
            let offending: Vec<String> = (0..NUM_CLASSES)
                .filter(|&c| counts[c] >= min && fresh.coverage[c][split.index()] == 0)
                .map(|c| CLASS_NAMES[c].to_string())
                .collect();
            ConstraintCheck {
                id: id.to_string(),
                description: description.to_string(),
                passed: offending.is_empty(),
                offending_classes: offending,
            }
        })
        .collect();
    Ok(ConstraintReport {
        constraints,
        evaluable_classes: (0..NUM_CLASSES)
            .filter(|&c| fresh.coverage[c][Split::Test.index()] > 0)
            .map(|c| CLASS_NAMES[c].to_string())
            .collect(),
        training_only: fresh.training_only.clone(),
        videos_per_split: Split::ALL.map(|s| fresh.videos_in(s)),
        frames_per_split: fresh.frame_counts,
    })
}

/// Lowercase hex SHA-256 over `video_id:split\n` lines sorted by video id.
pub fn split_fingerprint(assignment: &SplitAssignment) -> String {
    let mut hasher = Sha256::new();
    for (id, split) in &assignment.assignment {
        hasher.update(id.as_bytes());
        hasher.update(b":");
        hasher.update(split.as_str().as_bytes());
        hasher.update(b"\n");
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Video id encoded in a frame file name: the stem up to its last `_`.
pub fn video_id_from_frame(file_name: &str) -> &str {
    let stem = file_name.rsplit_once('.').map_or(file_name, |(s, _)| s);
    stem.rsplit_once('_').map_or(stem, |(v, _)| v)
}

/// Builds a manifest from `<source>/<class name>/<video>_<frame>.<ext>` files.
pub fn scan_source_dir(source: &Path) -> Result<DatasetManifest> {
    let entries = std::fs::read_dir(source).map_err(|e| Error::io(source, e))?;
    let mut videos: BTreeMap<String, Vec<FrameEntry>> = BTreeMap::new();
    let mut unknown = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(source, e))?;
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(class) = class_index(&name) else {
            unknown.push(format!("unknown class directory {name:?}"));
            continue;
        };
        let mut files: Vec<String> = std::fs::read_dir(&path)
            .map_err(|e| Error::io(&path, e))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        files.sort();
        for f in files {
            videos
                .entry(video_id_from_frame(&f).to_string())
                .or_default()
                .push(FrameEntry {
                    frame_id: f,
                    class_index: class,
                });
        }
    }
    if !unknown.is_empty() {
        return Err(Error::validation(source.display(), unknown));
    }
    let manifest = DatasetManifest {
        videos: videos
            .into_iter()
            .map(|(video_id, frames)| VideoEntry { video_id, frames })
            .collect(),
    };
    manifest.validate()?;
    Ok(manifest)
}

/// Copies frames into `out/<split>/<class name>/`, creating all 14 class
/// folders in every split so each split yields the same class-to-index mapping.
///
/// All source files are checked before anything is written.
pub fn materialize_split(
    manifest: &DatasetManifest,
    assignment: &SplitAssignment,
    source_dir: &Path,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut plan = Vec::new();
    let mut missing = Vec::new();
    for v in &manifest.videos {
        let split = assignment
            .split_of(&v.video_id)
            .ok_or_else(|| Error::Missing(format!("video {:?} has no split", v.video_id)))?;
        for f in &v.frames {
            let class = class_name(f.class_index).expect("validated class");
            let src = source_dir.join(class).join(&f.frame_id);
            if !src.is_file() {
                missing.push(format!(
                    "frame {:?}: {} not found",
                    f.frame_id,
                    src.display()
                ));
                continue;
            }
            plan.push((
                src,
                out_dir.join(split.as_str()).join(class).join(&f.frame_id),
            ));
        }
    }
    if !missing.is_empty() {
        return Err(Error::validation("materialize", missing));
    }
    let mut dirs = Vec::new();
    for split in Split::ALL {
        for class in CLASS_NAMES {
            let d = out_dir.join(split.as_str()).join(class);
            std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
            dirs.push(d);
        }
    }
    for (src, dst) in plan {
        std::fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
    }
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video(id: &str, frames: &[(usize, usize)]) -> VideoEntry {
        let mut out = Vec::new();
        for &(class, n) in frames {
            for k in 0..n {
                out.push(FrameEntry {
                    frame_id: format!("{id}_{class}_{k}.jpg"),
                    class_index: class,
                });
            }
        }
        VideoEntry {
            video_id: id.to_string(),
            frames: out,
        }
    }

    const A: usize = 1;
    const B: usize = 4;
    const C: usize = 13;

    fn toy() -> DatasetManifest {
        DatasetManifest {
            videos: vec![
                video("v1", &[(A, 10)]),
                video("v2", &[(A, 8)]),
                video("v3", &[(A, 6)]),
                video("v4", &[(B, 5)]),
                video("v5", &[(B, 4)]),
                video("v6", &[(C, 3)]),
            ],
        }
    }

    #[test]
    fn toy_manifest_coverage() {
        let m = toy();
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        assert_eq!(s.split_of("v6"), Some(Split::Train));
        let cov = |c: usize, sp: Split| s.coverage[c][sp.index()] > 0;
        assert!(cov(B, Split::Train) && cov(B, Split::Test));
        assert!(cov(A, Split::Train) && cov(A, Split::Val) && cov(A, Split::Test));
        // largest video of each class is pinned first
        assert_eq!(s.split_of("v1"), Some(Split::Train));
        assert_eq!(s.split_of("v4"), Some(Split::Train));
        assert_eq!(s.split_of("v5"), Some(Split::Test));
        assert_eq!(s.training_only, vec![CLASS_NAMES[C].to_string()]);
        let report = validate_split(&m, &s).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(
            report.frames_per_split.iter().sum::<usize>(),
            m.total_frames()
        );
    }

    #[test]
    fn single_video_goes_to_train() {
        let m = DatasetManifest {
            videos: vec![video("only", &[(3, 12)])],
        };
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        assert_eq!(s.split_of("only"), Some(Split::Train));
        assert_eq!(s.frame_counts, [12, 0, 0]);
        assert!(validate_split(&m, &s).unwrap().all_passed());
    }

    #[test]
    fn empty_manifest_is_an_error() {
        assert!(greedy_video_split(&DatasetManifest::default(), &SplitRatios::default()).is_err());
    }

    #[test]
    fn moving_only_test_video_fails_1b() {
        let m = toy();
        let mut s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        s.assignment.insert("v5".into(), Split::Train);
        let report = validate_split(&m, &s).unwrap();
        let c1b = &report.constraints[1];
        assert_eq!(c1b.id, "1b");
        assert!(!c1b.passed);
        assert_eq!(c1b.offending_classes, vec![CLASS_NAMES[B].to_string()]);
        assert!(!report
            .evaluable_classes
            .contains(&CLASS_NAMES[B].to_string()));
    }

    #[test]
    fn unknown_video_is_rejected() {
        let m = toy();
        let mut s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        s.assignment.insert("ghost".into(), Split::Val);
        assert!(validate_split(&m, &s).is_err());
    }

    #[test]
    fn repair_moves_pinned_video() {
        // Class A has two videos; both host a single-video class, which pins
        // them to train before the test pass runs. Unsatisfiable: 1a wins.
        let m = DatasetManifest {
            videos: vec![video("x", &[(A, 3), (2, 1)]), video("y", &[(A, 3), (3, 1)])],
        };
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        let r = validate_split(&m, &s).unwrap();
        assert!(r.constraints[0].passed);
        assert!(!r.constraints[1].passed);

        // Satisfiable variant: a later pass can still find a free video.
        let m = DatasetManifest {
            videos: vec![
                video("x", &[(A, 3), (2, 1)]),
                video("y", &[(A, 3)]),
                video("z", &[(2, 5)]),
            ],
        };
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        assert!(validate_split(&m, &s).unwrap().all_passed());
    }

    #[test]
    fn fingerprint_of_single_train_video() {
        let m = DatasetManifest {
            videos: vec![video("v1", &[(0, 1)])],
        };
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        // sha256 of the 9 bytes "v1:train\n"
        assert_eq!(
            split_fingerprint(&s),
            "d2406492558a4b829b3b61b218299b8148472ffc37b05593f732c3373eea8e21"
        );
    }

    #[test]
    fn fingerprint_is_sensitive() {
        let m = toy();
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        let again = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        assert_eq!(split_fingerprint(&s), split_fingerprint(&again));
        let mut moved = s.clone();
        let other = if s.split_of("v2") == Some(Split::Test) {
            Split::Val
        } else {
            Split::Test
        };
        moved.assignment.insert("v2".into(), other);
        assert_ne!(split_fingerprint(&s), split_fingerprint(&moved));
    }

    #[test]
    fn ratios_parse() {
        assert_eq!(
            "0.70,0.15,0.15".parse::<SplitRatios>().unwrap(),
            SplitRatios::default()
        );
        assert!("0.5,0.5".parse::<SplitRatios>().is_err());
        assert!("0.7,0.2,0.2".parse::<SplitRatios>().is_err());
    }

    #[test]
    fn video_id_from_kvasir_style_names() {
        assert_eq!(
            video_id_from_frame("04a78ef00c5245e0_10254.jpg"),
            "04a78ef00c5245e0"
        );
        assert_eq!(video_id_from_frame("a_b_c.png"), "a_b");
        assert_eq!(video_id_from_frame("plain.jpg"), "plain");
    }
}
