use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hemoprior::io::{load_image, load_predictions, DumpFormat, PredictionSet, RgbFrame, ScoreKind};
use hemoprior::json::{read_json, to_sorted_json};
use hemoprior::metrics::{evaluate, EvalOptions};
use hemoprior::prior::{compute_prior_maps, PercentileMethod, PriorParams, PriorVersion};
use hemoprior::report::{
    audit_best_vs_last, collect_sweep_inputs, compare_predictions, fmt6, list_images,
    parse_audit_file, parse_formats, write_audit_outputs, write_compare_outputs,
    write_eval_outputs, write_prior_outputs, write_sweep_outputs, zero_shot_separation,
    CheckpointTag, EvalArtifacts, OutputFormat, Provenance,
};
use hemoprior::split::{
    greedy_video_split, materialize_split, scan_source_dir, split_fingerprint, validate_split,
    SplitRatios,
};
use hemoprior::stats::{cross_seed_aggregate, BootstrapConfig};
use hemoprior::{ClassSet, Error};

use crate::{
    AuditArgs, CompareArgs, EvalArgs, PriorArgs, PriorParamArgs, SplitArgs, SweepArgs, ZeroshotArgs,
};

fn require_dir(p: &Path, what: &str) -> Result<()> {
    if !p.is_dir() {
        return Err(
            Error::InvalidArgument(format!("{what} {} is not a directory", p.display())).into(),
        );
    }
    Ok(())
}

fn require_file(p: &Path, what: &str) -> Result<()> {
    if !p.is_file() {
        return Err(Error::InvalidArgument(format!("{what} {} is not a file", p.display())).into());
    }
    Ok(())
}

fn prepare_out(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::Io {
        path: p.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn prior_params(a: &PriorParamArgs, version: Option<PriorVersion>) -> Result<PriorParams> {
    let mut p = PriorParams::default();
    if let Some(alpha) = a.alpha {
        match version {
            Some(PriorVersion::V1) => p.alpha_v1 = alpha,
            Some(PriorVersion::V2) => p.alpha_v2 = alpha,
            None => {
                p.alpha_v1 = alpha;
                p.alpha_v2 = alpha;
            }
        }
    }
    if let Some(pivot) = a.pivot {
        if version == Some(PriorVersion::V1) {
            bail!(Error::InvalidArgument(
                "--pivot only applies to the v2 prior".into()
            ));
        }
        p.pivot_v2 = pivot;
    }
    if let Some(l) = a.lambda_scale {
        p.lambda_scale = l;
    }
    if let Some(e) = a.epsilon {
        p.epsilon = e;
    }
    p.percentile_method = a.percentile.parse::<PercentileMethod>()?;
    p.validate()?;
    Ok(p)
}

fn load_dump(path: &Path, kind: ScoreKind) -> Result<PredictionSet> {
    Ok(load_predictions(path, DumpFormat::from_path(path), kind)?)
}

/// A hex fingerprint given inline or as the first line of a file.
fn resolve_fingerprint(arg: &Option<String>) -> Result<Option<String>> {
    let Some(v) = arg else { return Ok(None) };
    let text = if Path::new(v).is_file() {
        std::fs::read_to_string(v).with_context(|| format!("reading fingerprint file {v}"))?
    } else {
        v.clone()
    };
    let fp = text.trim().to_ascii_lowercase();
    if fp.len() != 64 || !fp.chars().all(|c| c.is_ascii_hexdigit()) {
        bail!(Error::InvalidArgument(format!(
            "'{v}' is not a SHA-256 hex fingerprint"
        )));
    }
    Ok(Some(fp))
}

fn report_written(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

pub fn prior(a: &PriorArgs) -> Result<()> {
    require_dir(&a.input, "--input")?;
    let version: PriorVersion = a.physics_prior_version.parse()?;
    let params = prior_params(&a.params, Some(version))?;
    let images = list_images(&a.input)?;
    if images.is_empty() {
        bail!(Error::InvalidArgument(format!(
            "no images in {}",
            a.input.display()
        )));
    }
    prepare_out(&a.out)?;
    let mut frames = Vec::new();
    for path in &images {
        let frame: RgbFrame<f64> = load_image(path)?;
        let maps = compute_prior_maps(&frame, &params, version)?;
        frames.push(write_prior_outputs(path, &frame, &maps, &a.out)?);
    }
    let prov = Provenance::new("prior", a)?;
    let doc = serde_json::json!({
        "provenance": prov,
        "version": version,
        "params": params,
        "layout": "f32 little-endian, row-major; input5 is CHW with channels [R, G, B, p_blood, h_afi_phi]",
        "frames": frames,
    });
    let manifest = a.out.join("prior_manifest.json");
    std::fs::write(&manifest, to_sorted_json(&doc)?)?;
    println!("{} frames processed with the {version} prior", frames.len());
    println!("wrote {}", manifest.display());
    Ok(())
}

pub fn split(a: &SplitArgs) -> Result<()> {
    require_dir(&a.source, "--source")?;
    let ratios: SplitRatios = a.ratios.parse()?;
    let manifest = scan_source_dir(&a.source)?;
    let assignment = greedy_video_split(&manifest, &ratios)?;
    let report = validate_split(&manifest, &assignment)?;
    let fingerprint = split_fingerprint(&assignment);
    prepare_out(&a.out)?;
    let prov = Provenance::new("split", a)?.with_fingerprint(Some(fingerprint.clone()));
    let doc = serde_json::json!({
        "provenance": prov,
        "assignment": assignment,
        "constraints": report,
        "fingerprint": fingerprint,
    });
    let manifest_out = a
        .manifest_out
        .clone()
        .unwrap_or_else(|| a.out.join("split_manifest.json"));
    let fingerprint_out = a
        .fingerprint_out
        .clone()
        .unwrap_or_else(|| a.out.join("split_fingerprint.txt"));
    std::fs::write(&manifest_out, to_sorted_json(&doc)?)
        .with_context(|| format!("writing {}", manifest_out.display()))?;
    std::fs::write(&fingerprint_out, format!("{fingerprint}\n"))
        .with_context(|| format!("writing {}", fingerprint_out.display()))?;
    for c in &report.constraints {
        let status = if c.passed { "ok" } else { "FAILED" };
        println!("[{status}] {} {}", c.id, c.description);
        if !c.passed {
            println!(
                "       offending classes: {}",
                c.offending_classes.join(", ")
            );
        }
    }
    println!(
        "videos train/val/test: {:?}; frames: {:?}; fingerprint {fingerprint}",
        report.videos_per_split, report.frames_per_split
    );
    if !report.all_passed() {
        bail!(Error::Degenerate(
            "split constraints cannot all be met for this dataset".into()
        ));
    }
    if !a.dry_run {
        let copied = materialize_split(&manifest, &assignment, &a.source, &a.out)?;
        println!("copied {} frames into {}", copied.len(), a.out.display());
    }
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    require_file(&a.pred, "--pred")?;
    let kind: ScoreKind = a.score_kind.parse()?;
    let evaluable: ClassSet = a.evaluable.parse()?;
    let formats = parse_formats(&a.formats)?;
    let fingerprint = resolve_fingerprint(&a.fingerprint)?;
    let stratification = a.stratify.parse()?;
    let bootstrap = (a.bootstrap > 0).then(|| BootstrapConfig {
        n_resamples: a.bootstrap,
        level: a.level,
        seed: a.bootstrap_seed,
        stratification,
        ..Default::default()
    });
    if let Some(b) = &bootstrap {
        b.validate()?;
    }
    prepare_out(&a.out)?;
    let preds = load_dump(&a.pred, kind)?;
    let report = evaluate(&preds, &evaluable, &EvalOptions { bootstrap })?;
    let prov = Provenance::new("eval", a)?.with_fingerprint(fingerprint);
    let art = EvalArtifacts::new(report, &preds);
    let files = write_eval_outputs(&art, &prov, &a.out, &formats)?;
    let r = &art.report;
    println!(
        "{} frames: macro AUC (evaluable) {}, accuracy {}, macro-F1 (evaluable) {}",
        r.n_frames,
        r.macro_auc_evaluable
            .map(fmt6)
            .unwrap_or_else(|| "n/a".into()),
        fmt6(r.accuracy),
        r.macro_f1_evaluable
            .map(fmt6)
            .unwrap_or_else(|| "n/a".into()),
    );
    report_written(&files);
    Ok(())
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    require_file(&a.pred_a, "--pred-a")?;
    require_file(&a.pred_b, "--pred-b")?;
    let kind_a: ScoreKind = a.score_kind.parse()?;
    let kind_b: ScoreKind = a
        .score_kind_b
        .as_deref()
        .map(str::parse)
        .transpose()?
        .unwrap_or(kind_a);
    let evaluable: ClassSet = a.evaluable.parse()?;
    let formats = parse_formats(&a.formats)?;
    let fingerprint = resolve_fingerprint(&a.fingerprint)?;
    prepare_out(&a.out)?;
    let pa = load_dump(&a.pred_a, kind_a)?;
    let pb = load_dump(&a.pred_b, kind_b)?;
    let report = compare_predictions(&pa, &pb, &evaluable, a.bonferroni_m)?;
    let prov = Provenance::new("compare", a)?.with_fingerprint(fingerprint);
    let files = write_compare_outputs(&report, &prov, &a.out, &formats)?;
    for c in &report.per_class {
        let t = &c.test;
        println!(
            "{:<24} AUC {} -> {}  p {}  p_Bonf {}",
            c.class,
            fmt6(t.auc_a),
            fmt6(t.auc_b),
            fmt6(t.p_two_sided),
            t.p_bonferroni.map(fmt6).unwrap_or_default()
        );
    }
    let m = &report.mcnemar;
    println!(
        "McNemar: b = {}, c = {}, chi2 = {}, p = {}",
        m.b,
        m.c,
        fmt6(m.chi2),
        fmt6(m.p)
    );
    report_written(&files);
    if report.any_degenerate() {
        bail!(Error::Degenerate(
            "zero DeLong variance with a nonzero AUC difference in at least one class".into()
        ));
    }
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    require_dir(&a.reports, "--reports")?;
    let formats = parse_formats(&a.formats)?;
    if formats.contains(&OutputFormat::Svg) {
        bail!(Error::InvalidArgument(
            "sweep writes json, csv and md only".into()
        ));
    }
    prepare_out(&a.out)?;
    let per_seed = collect_sweep_inputs(&a.reports, &a.metric)?;
    let sweep = cross_seed_aggregate(&per_seed, &a.baseline)?;
    let prov = Provenance::new("sweep", a)?;
    let files = write_sweep_outputs(&sweep, &a.metric, &prov, &a.out, &formats)?;
    for (arm, g) in &sweep.arms {
        println!("{arm:<16} {} ± {}", fmt6(g.mean), fmt6(g.sd_population));
    }
    for d in &sweep.deltas {
        println!(
            "{} - {}: {:+} ({}/{} seeds positive)",
            d.arm, d.baseline, d.paired_delta_mean, d.sign_positive_count, d.n_seeds
        );
    }
    report_written(&files);
    Ok(())
}

pub fn audit(a: &AuditArgs) -> Result<()> {
    require_file(&a.best, "--best")?;
    require_file(&a.last, "--last")?;
    let formats = parse_formats(&a.formats)?;
    prepare_out(&a.out)?;
    let mut entries = parse_audit_file(&read_json(&a.best)?, CheckpointTag::Best)?;
    entries.extend(parse_audit_file(&read_json(&a.last)?, CheckpointTag::Last)?);
    let table = audit_best_vs_last(&entries)?;
    let prov = Provenance::new("audit", a)?;
    let files = write_audit_outputs(&table, &prov, &a.out, &formats)?;
    println!("{}", table.recommendation);
    report_written(&files);
    Ok(())
}

fn load_dir(dir: &Path) -> Result<Vec<RgbFrame<f64>>> {
    let files = list_images(dir)?;
    if files.is_empty() {
        bail!(Error::InvalidArgument(format!(
            "no images in {}",
            dir.display()
        )));
    }
    files.iter().map(|p| Ok(load_image(p)?)).collect()
}

pub fn zeroshot(a: &ZeroshotArgs) -> Result<()> {
    require_dir(&a.blood, "--blood")?;
    require_dir(&a.normal, "--normal")?;
    let versions = match a.version.to_ascii_lowercase().as_str() {
        "both" => vec![PriorVersion::V1, PriorVersion::V2],
        v => vec![v.parse::<PriorVersion>()?],
    };
    let params = prior_params(&a.params, (versions.len() == 1).then(|| versions[0]))?;
    prepare_out(&a.out)?;
    let blood = load_dir(&a.blood)?;
    let normal = load_dir(&a.normal)?;
    let mut results = BTreeMap::new();
    for v in versions {
        let r = zero_shot_separation(&blood, &normal, v, &params)?;
        println!(
            "{v}: AUC {}  Cohen's d {}{}  (n = {} vs {})",
            fmt6(r.auc),
            fmt6(r.cohens_d),
            if r.d_degenerate {
                " (zero pooled SD)"
            } else {
                ""
            },
            r.n_blood,
            r.n_normal
        );
        results.insert(v.to_string(), r);
    }
    let prov = Provenance::new("zeroshot", a)?;
    let doc = serde_json::json!({ "provenance": prov, "params": params, "results": results });
    let path = a.out.join("zeroshot.json");
    std::fs::write(&path, to_sorted_json(&doc)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
