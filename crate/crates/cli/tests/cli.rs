//! End-to-end checks of the command-line surface: every subcommand runs
//! against a small synthetic dataset in a temp directory.

use std::path::Path;
use std::process::{Command, Output};

use semfuse_core::class_table::ClassTable;
use semfuse_core::cloud::ScenePointCloud;
use semfuse_core::io::{ply, pnm};
use semfuse_core::mask::BinaryMask;

fn semfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semfuse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Emits a small dataset and returns (dataset dir path, scene path).
fn small_dataset(dir: &Path) -> (String, String) {
    let data = dir.join("data");
    let out = semfuse(&[
        "synth",
        "--out",
        data.to_str().unwrap(),
        "--seed",
        "5",
        "--objects",
        "3",
        "--density",
        "400",
        "--room",
        "3x3x2",
        "--frames",
        "8",
        "--image-size",
        "96",
    ]);
    assert_ok(&out);
    let scene = data.join("scene.ply");
    assert!(scene.exists());
    (
        data.to_str().unwrap().to_string(),
        scene.to_str().unwrap().to_string(),
    )
}

#[test]
fn synth_fuse_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (data, scene) = small_dataset(dir.path());
    let fused = dir.path().join("fused.ply");
    let acc = dir.path().join("votes.bin");

    let out = semfuse(&[
        "fuse",
        "--scene",
        &scene,
        "--frames",
        &data,
        "--masks",
        "oracle",
        "--out",
        fused.to_str().unwrap(),
        "--acc-out",
        acc.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert!(stdout(&out).contains("frames used: 8"));
    assert!(fused.exists() && acc.exists());

    let out = semfuse(&["eval", fused.to_str().unwrap(), &scene, "--policy", "exclude"]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("avg"), "{text}");
    // zero-noise oracle masks on a small dataset still fuse very cleanly
    let avg_line = text.lines().nth(1).unwrap();
    let avg: f64 = avg_line.split_whitespace().last().unwrap().parse().unwrap();
    assert!(avg > 90.0, "exclude-policy average {avg} unexpectedly low\n{text}");
}

#[test]
fn fuse_reaches_high_coverage_on_low_occlusion_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert_ok(&semfuse(&[
        "synth",
        "--out",
        data.to_str().unwrap(),
        "--seed",
        "5",
        "--objects",
        "2",
        "--density",
        "400",
        "--room",
        "3x3x2",
        "--frames",
        "12",
        "--image-size",
        "128",
    ]));
    let fused = dir.path().join("fused.ply");
    let out = semfuse(&[
        "fuse",
        "--scene",
        data.join("scene.ply").to_str().unwrap(),
        "--frames",
        data.to_str().unwrap(),
        "--masks",
        "oracle",
        "--out",
        fused.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    let ignore: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("ignore fraction: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ignore <= 0.05, "non-ignore coverage {:.3} below 0.95\n{text}", 1.0 - ignore);
}

#[test]
fn synth_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "synth".to_string(),
            "--out".into(),
            out.to_string(),
            "--seed".into(),
            "9".into(),
            "--objects".into(),
            "2".into(),
            "--density".into(),
            "200".into(),
            "--room".into(),
            "3x3x2".into(),
            "--frames".into(),
            "2".into(),
            "--image-size".into(),
            "64".into(),
        ]
    };
    for sub in ["a", "b"] {
        let path = dir.path().join(sub);
        let argv = args(path.to_str().unwrap());
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_ok(&semfuse(&argv));
    }
    for rel in ["scene.ply", "depth/0.pgm", "depth/50.pgm", "label/0.pgm", "pose/50.txt", "color/50.ppm"] {
        let a = std::fs::read(dir.path().join("a").join(rel)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs for identical seeds");
    }
}

#[test]
fn synth_with_zero_objects() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("flat");
    let out = semfuse(&[
        "synth",
        "--out",
        data.to_str().unwrap(),
        "--objects",
        "0",
        "--density",
        "200",
        "--room",
        "3x3x2",
        "--frames",
        "2",
        "--image-size",
        "64",
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("wall") && text.contains("floor"));
    assert!(!text.contains("chair"));
}

#[test]
fn fuse_with_oversized_stride_warns_and_ignores_everything() {
    let dir = tempfile::tempdir().unwrap();
    let (data, scene) = small_dataset(dir.path());
    let fused = dir.path().join("fused.ply");
    let out = semfuse(&[
        "fuse",
        "--scene",
        &scene,
        "--frames",
        &data,
        "--masks",
        "oracle",
        "--out",
        fused.to_str().unwrap(),
        "--frame-stride",
        "100000",
    ]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(stdout(&out).contains("ignore fraction: 1.0000"));

    let ct = ClassTable::scannet20();
    let cloud = ply::load_scene(&fused, &ct).unwrap();
    assert!(cloud.gt_labels().unwrap().iter().all(|&l| l == ct.ignore_id()));
}

#[test]
fn fuse_from_mask_directory_with_skip_missing() {
    let dir = tempfile::tempdir().unwrap();
    let (data, scene) = small_dataset(dir.path());

    // only some frames get mask files
    let ct = ClassTable::scannet20();
    let masks = dir.path().join("masks");
    std::fs::create_dir(&masks).unwrap();
    for idx in [0u32, 100, 200] {
        let mask = pnm::read_mask_pgm(Path::new(&data).join(format!("label/{idx}.pgm")), &ct).unwrap();
        pnm::write_mask_pgm(masks.join(format!("{idx}.pgm")), &mask, &ct).unwrap();
    }

    let fused = dir.path().join("fused.ply");
    let without_skip = semfuse(&[
        "fuse",
        "--scene",
        &scene,
        "--frames",
        &data,
        "--masks",
        masks.to_str().unwrap(),
        "--out",
        fused.to_str().unwrap(),
    ]);
    assert!(!without_skip.status.success(), "missing masks must fail without --skip-missing");

    let with_skip = semfuse(&[
        "fuse",
        "--scene",
        &scene,
        "--frames",
        &data,
        "--masks",
        masks.to_str().unwrap(),
        "--out",
        fused.to_str().unwrap(),
        "--skip-missing",
    ]);
    assert_ok(&with_skip);
    assert!(stdout(&with_skip).contains("frames used: 3"));
}

#[test]
fn augment_prints_expected_pixels() {
    let dir = tempfile::tempdir().unwrap();
    // the horizontal segment (0,0)..(10,0)
    let mask_path = dir.path().join("segment.pgm");
    let segment = BinaryMask::from_fn(11, 1, |_, _| true);
    pnm::write_binary_mask_pgm(&mask_path, &segment).unwrap();

    let out = semfuse(&[
        "augment",
        "--mask",
        mask_path.to_str().unwrap(),
        "--anchor",
        "0,0",
        "--strategy",
        "max_distance",
    ]);
    assert_ok(&out);
    assert_eq!(stdout(&out).trim(), "(10, 0)");

    // constant image: every entropy difference ties, row-major wins
    let image_path = dir.path().join("flat.ppm");
    let img = semfuse_core::raster::ColorImage::filled(11, 1, [10, 10, 10]);
    pnm::write_ppm(&image_path, &img).unwrap();
    let out = semfuse(&[
        "augment",
        "--mask",
        mask_path.to_str().unwrap(),
        "--anchor",
        "5,0",
        "--strategy",
        "max_entropy",
        "--image",
        image_path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert_eq!(stdout(&out).trim(), "(0, 0)");

    let out = semfuse(&[
        "augment",
        "--mask",
        mask_path.to_str().unwrap(),
        "--anchor",
        "0,0",
        "--strategy",
        "maximal",
    ]);
    assert!(!out.status.success(), "unknown strategy must be a usage error");
}

#[test]
fn eval_toy_fixture_and_policy_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let ct = ClassTable::new(vec!["a".into(), "b".into()]).unwrap();
    let classes_path = dir.path().join("classes.txt");
    std::fs::write(&classes_path, "a\nb\n").unwrap();

    let ignore = ct.ignore_id();
    let positions: Vec<[f32; 3]> = (0..7).map(|i| [i as f32, 0.0, 0.0]).collect();
    let gt_labels = vec![0, 0, 0, 1, 1, 1, ignore];
    let pred_labels = vec![0, 0, ignore, 1, 1, 1, 0];
    let cloud = ScenePointCloud::new(positions, None, Some(gt_labels), &ct).unwrap();
    let gt_path = dir.path().join("gt.ply");
    let pred_path = dir.path().join("pred.ply");
    ply::save_scene(&cloud, None, &gt_path, &ct).unwrap();
    ply::save_scene(&cloud, Some(&pred_labels), &pred_path, &ct).unwrap();

    let run = |policy: &str| -> f64 {
        let out = semfuse(&[
            "eval",
            pred_path.to_str().unwrap(),
            gt_path.to_str().unwrap(),
            "--policy",
            policy,
            "--classes",
            classes_path.to_str().unwrap(),
        ]);
        assert_ok(&out);
        let text = stdout(&out);
        let row = text.lines().nth(1).unwrap();
        row.split_whitespace().last().unwrap().parse().unwrap()
    };
    assert_eq!(run("penalize"), 75.0);
    assert!(run("exclude") >= 75.0);

    // identical clouds score a perfect average
    let out = semfuse(&[
        "eval",
        gt_path.to_str().unwrap(),
        gt_path.to_str().unwrap(),
        "--classes",
        classes_path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap().ends_with("100.0"), "{text}");
}

#[test]
fn pipeline_writes_manifest_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    let run_once = |tag: &str| -> (serde_json::Value, String) {
        let work = dir.path().join(tag);
        std::fs::create_dir(&work).unwrap();
        let manifest = work.join("manifest.json");
        std::fs::write(
            &cfg_path,
            format!(
                "frames = {work}/data\nout = {work}/fused.ply\nsynth = true\nsynth_frames = 8\nsynth_objects = 3\nsynth_density = 400\nsynth_room = 3x3x2\nseed = 5\npolicy = exclude\n",
                work = work.display()
            ),
        )
        .unwrap();
        let out = semfuse(&[
            "pipeline",
            "--config",
            cfg_path.to_str().unwrap(),
            "--manifest",
            manifest.to_str().unwrap(),
        ]);
        assert_ok(&out);
        let text = std::fs::read_to_string(&manifest).unwrap();
        (serde_json::from_str(&text).unwrap(), text)
    };

    let (a, text_a) = run_once("a");
    let (b, text_b) = run_once("b");

    let miou = a["results"]["miou"].as_f64().unwrap();
    assert!(miou >= 0.95, "zero-noise pipeline mIoU {miou} below 0.95");
    assert!(a["results"]["coverage"].as_f64().unwrap() > 0.8);
    assert_eq!(a["config"]["policy"], "exclude");

    // byte-identical apart from the timestamp field and the echoed paths
    let strip = |text: &str, tag: &str| -> String {
        text.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .map(|l| l.replace(&format!("/{tag}/"), "/X/"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&text_a, "a"), strip(&text_b, "b"));
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn pipeline_with_prompted_oracle_and_augmentation() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, strategy: &str| -> f64 {
        let work = dir.path().join(tag);
        std::fs::create_dir(&work).unwrap();
        let manifest = work.join("manifest.json");
        let out = semfuse(&[
            "pipeline",
            "--synth",
            "--frames",
            work.join("data").to_str().unwrap(),
            "--out",
            work.join("fused.ply").to_str().unwrap(),
            "--masks",
            "prompted-oracle",
            "--strategy",
            strategy,
            "--seed",
            "5",
            "--policy",
            "exclude",
            "--manifest",
            manifest.to_str().unwrap(),
            "--config",
            write_small_synth_cfg(&work).to_str().unwrap(),
        ]);
        assert_ok(&out);
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
        manifest["results"]["miou"].as_f64().unwrap()
    };
    let plain = run("plain", "none");
    let augmented = run("augmented", "max_distance");
    assert!(
        augmented >= plain,
        "augmentation should not hurt: {augmented} vs {plain}"
    );
}

fn write_small_synth_cfg(work: &Path) -> std::path::PathBuf {
    let path = work.join("synth.cfg");
    std::fs::write(&path, "synth_frames = 6\nsynth_objects = 2\nsynth_density = 300\nsynth_room = 3x3x2\n").unwrap();
    path
}

#[test]
fn broken_config_path_fails_before_writing_output() {
    let dir = tempfile::tempdir().unwrap();
    let fused = dir.path().join("fused.ply");
    let out = semfuse(&[
        "pipeline",
        "--scene",
        "/nonexistent/scene.ply",
        "--frames",
        "/nonexistent/frames",
        "--out",
        fused.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!fused.exists(), "no output may be written after a failed validation");
}
