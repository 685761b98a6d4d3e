//! End-to-end runs of the study pipeline over synthetic WAV files.

use std::path::{Path, PathBuf};

use ltspid::audio_io::{Anchor, SegmentSpec};
use ltspid::harness::{
    self, load_manifest, pair_correlations, run_study, HarnessError, Order, Pairing, SessionRecord,
    StudyConfig,
};
use ltspid::lts::LtsConfig;
use ltspid::synth::{encode_wav, generate, Band, BitDepth, SynthSpec};
use ltspid::AudioClip;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/trio")
}

/// Renders the trio fixtures as 16-bit WAVs next to a copy of the manifest.
fn render_trio(dir: &Path) -> PathBuf {
    for name in ["normal1", "normal2", "angry"] {
        let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.synth"))).unwrap();
        let spec = SynthSpec::from_config_str(&text).unwrap();
        let clip: AudioClip = generate(&spec).unwrap();
        encode_wav(&clip, BitDepth::Pcm16, dir.join(format!("{name}.wav"))).unwrap();
    }
    let manifest = dir.join("manifest.csv");
    std::fs::copy(fixture_dir().join("manifest.csv"), &manifest).unwrap();
    manifest
}

fn trio_config() -> StudyConfig<f64> {
    StudyConfig {
        segment: SegmentSpec {
            duration_s: 3.0,
            anchor: Anchor::End,
            offset_s: 0.0,
        },
        lts: LtsConfig::with_fft_size(1024),
        ..StudyConfig::default()
    }
}

fn noise(seed: u64, tilt_db: f64, secs: f64) -> AudioClip {
    let spec = SynthSpec {
        peak: 0.4,
        ..SynthSpec::filtered_noise(
            vec![
                Band {
                    lo_hz: 50.0,
                    hi_hz: 1000.0,
                    gain_db: 0.0,
                },
                Band {
                    lo_hz: 1000.0,
                    hi_hz: 4000.0,
                    gain_db: tilt_db,
                },
            ],
            secs,
            8000,
            seed,
        )
    };
    generate(&spec).unwrap()
}

fn session(id: &str, order: Order, rating: u8, files: [&Path; 3]) -> SessionRecord {
    SessionRecord {
        subject_id: id.into(),
        order,
        recordings: files.map(Path::to_path_buf),
        anger_rating: rating,
    }
}

fn short_config() -> StudyConfig<f64> {
    StudyConfig {
        segment: SegmentSpec {
            duration_s: 1.5,
            ..SegmentSpec::default()
        },
        lts: LtsConfig::with_fft_size(256),
        ..StudyConfig::default()
    }
}

#[test]
fn identical_recordings_correlate_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("same.wav");
    encode_wav(&noise(1, -6.0, 2.0), BitDepth::Float32, &p).unwrap();
    let row =
        pair_correlations(&session("s", Order::Nna, 3, [&p, &p, &p]), &short_config()).unwrap();
    assert_eq!(row.r_nn, 1.0);
    assert!((row.r_na - 1.0).abs() < 1e-15);
    assert_eq!(row.sddd_nn, 0.0);
}

#[test]
fn doubled_amplitude_angry_take_still_correlates_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let base = noise(2, -6.0, 2.0);
    let (n, a) = (dir.path().join("n.wav"), dir.path().join("a.wav"));
    encode_wav(&base, BitDepth::Float32, &n).unwrap();
    encode_wav(&base.scaled(2.0).unwrap(), BitDepth::Float32, &a).unwrap();
    let row =
        pair_correlations(&session("s", Order::Nan, 3, [&n, &a, &n]), &short_config()).unwrap();
    assert!((row.r_na - 1.0).abs() < 1e-12, "{}", row.r_na);
    // A pure gain is a constant dB offset.
    assert!(row.sddd_na < 1e-9);
}

#[test]
fn trio_matches_independent_numpy_recomputation() {
    // Pinned from a separate numpy script that reads the same WAVs and
    // applies the windowed-FFT averaging and Pearson/std formulas directly.
    const R_NN: f64 = 0.9992318544070973;
    const R_NA_MEAN: f64 = 0.942496670413874;
    const R_NA_FIRST: f64 = 0.9426867069427449;
    const R_NA_SECOND: f64 = 0.9423066338850031;
    const SDDD_NN: f64 = 0.3764251182266915;
    const SDDD_NA_MEAN: f64 = 3.870563566055252;

    let dir = tempfile::tempdir().unwrap();
    let sessions = load_manifest(render_trio(dir.path())).unwrap();
    let mut cfg = trio_config();
    let row = pair_correlations(&sessions[0], &cfg).unwrap();
    assert!((row.r_nn - R_NN).abs() < 1e-9);
    assert!((row.r_na - R_NA_MEAN).abs() < 1e-9);
    assert!((row.sddd_nn - SDDD_NN).abs() < 1e-9);
    assert!((row.sddd_na - SDDD_NA_MEAN).abs() < 1e-9);

    cfg.pairing = Pairing::First;
    assert!((pair_correlations(&sessions[0], &cfg).unwrap().r_na - R_NA_FIRST).abs() < 1e-9);
    cfg.pairing = Pairing::Second;
    assert!((pair_correlations(&sessions[0], &cfg).unwrap().r_na - R_NA_SECOND).abs() < 1e-9);
}

#[test]
fn study_report_ignores_manifest_order_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (i, tilt) in [-3.0, -6.0, -9.0, -12.0].iter().enumerate() {
        let p = dir.path().join(format!("r{i}.wav"));
        encode_wav(&noise(10 + i as u64, *tilt, 2.0), BitDepth::Pcm16, &p).unwrap();
        paths.push(p);
    }
    let sessions = vec![
        session("s2", Order::Nan, 4, [&paths[0], &paths[3], &paths[1]]),
        session("s1", Order::Nna, 2, [&paths[0], &paths[1], &paths[2]]),
        session("s3", Order::Nna, 3, [&paths[1], &paths[2], &paths[3]]),
    ];
    let cfg = short_config();
    let a = run_study(&sessions, &cfg).unwrap();
    let mut rev = sessions.clone();
    rev.reverse();
    let b = run_study(&rev, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(harness::render_csv(&a, None), harness::render_csv(&b, None));
    assert_eq!(
        harness::render_text(&a, Some(3)),
        harness::render_text(&b, Some(3))
    );
    let ids: Vec<_> = a.rows.iter().map(|r| r.subject_id.as_str()).collect();
    assert_eq!(ids, ["s1", "s2", "s3"]);
    assert_eq!(a.overall.r_nn.n, 3);
    assert_eq!(a.angry_subset.as_ref().unwrap().n(), 1);

    // Rows parsed back from the machine report aggregate to the same report.
    let rows = harness::parse_rows::<f64>(&harness::render_csv(&a, None)).unwrap();
    let again = harness::aggregate(rows, &cfg.baselines, cfg.angry_threshold).unwrap();
    assert_eq!(again, a);
}

#[test]
fn failures_are_collected_per_session() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.wav");
    let short = dir.path().join("short.wav");
    let other_rate = dir.path().join("rate.wav");
    encode_wav(&noise(1, -6.0, 2.0), BitDepth::Pcm16, &ok).unwrap();
    encode_wav(&noise(2, -6.0, 0.5), BitDepth::Pcm16, &short).unwrap();
    let clip16k: AudioClip = generate(&SynthSpec::sine(440.0, 0.5, 2.0, 16000)).unwrap();
    encode_wav(&clip16k, BitDepth::Pcm16, &other_rate).unwrap();

    let sessions = vec![
        session("good", Order::Nna, 3, [&ok, &ok, &ok]),
        session("too_short", Order::Nna, 3, [&ok, &ok, &short]),
        session("mixed_rate", Order::Nna, 3, [&ok, &other_rate, &ok]),
    ];
    match run_study(&sessions, &short_config()) {
        Err(HarnessError::Sessions(errs)) => {
            assert_eq!(errs.len(), 2);
            assert_eq!(errs[0].subject_id, "mixed_rate");
            assert!(
                errs[0].to_string().contains("frequency axes differ"),
                "{}",
                errs[0]
            );
            assert_eq!(errs[1].subject_id, "too_short");
            assert!(errs[1].to_string().contains("angry recording"));
            assert!(errs[1].to_string().contains("insufficient duration"));
        }
        other => panic!("expected session errors, got {other:?}"),
    }
}
