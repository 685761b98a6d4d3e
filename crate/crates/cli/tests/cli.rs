use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ltspid(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltspid"))
        .current_dir(dir)
        .env_remove("LTSPID_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn trio_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/trio")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// 1 s sine centred on FFT bin 93 of a 4096-point frame at 44100 Hz.
fn sine_wav(dir: &Path, seconds: f64) -> f64 {
    let freq = 93.0 * 44100.0 / 4096.0;
    write(
        dir,
        "sine.synth",
        &format!(
            "kind = sine\ncomponents = {freq}:0.5\nduration_s = {seconds}\nsample_rate = 44100\n"
        ),
    );
    let o = ltspid(dir, &["synth", "sine.synth", "-o", "sine.wav"]);
    assert!(o.status.success(), "{}", stderr(&o));
    freq
}

#[test]
fn lts_peak_sits_at_the_sine_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let freq = sine_wav(dir.path(), 1.0);
    let o = ltspid(
        dir.path(),
        &["lts", "sine.wav", "--duration", "1", "-o", "sine.lts"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("k = 2048"), "{out}");
    assert!(out.contains("freq_step_hz = 10.7666015625"), "{out}");
    assert!(out.contains("frames_averaged = 20"), "{out}");

    let text = std::fs::read_to_string(dir.path().join("sine.lts")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("# fft_size=4096, sample_rate=44100, start_bin=1")
    );
    assert_eq!(lines.next(), Some("# frequency_hz\tlevel_db"));
    let (best, _) = lines
        .map(|l| {
            let (f, v) = l.split_once('\t').unwrap();
            (f.parse::<f64>().unwrap(), v.parse::<f64>().unwrap())
        })
        .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
    assert_eq!(best, freq);
}

#[test]
fn lts_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    sine_wav(dir.path(), 1.0);
    let o = ltspid(
        dir.path(),
        &["lts", "sine.wav", "--duration", "0.5", "--fft-size", "1024"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("# fft_size=1024, sample_rate=44100, start_bin=1\n"));
    assert!(stderr(&o).contains("k = 512"));
}

#[test]
fn lts_on_short_clip_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    sine_wav(dir.path(), 1.0);
    let o = ltspid(dir.path(), &["lts", "sine.wav"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("insufficient duration"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    sine_wav(dir.path(), 1.0);
    for args in [
        &["lts", "sine.wav", "--fft-size", "4000"][..],
        &["lts", "sine.wav", "--no-such-flag"],
        &["lts", "sine.wav", "--anchor", "middle"],
        &["lts", "sine.wav", "--duration", "-1"],
        &["compare", "a", "b", "--r-same", "0.8", "--r-diff", "0.9"],
        &["frobnicate"],
    ] {
        let o = ltspid(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn compare_self_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    sine_wav(dir.path(), 1.0);
    let noise = "kind = filtered_noise\nduration_s = 1\nsample_rate = 44100\nseed = 3\n\
                 bands = 100-5000:0, 5000-20000:-10\n";
    write(dir.path(), "noise.synth", noise);
    assert!(
        ltspid(dir.path(), &["synth", "noise.synth", "-o", "noise.wav"])
            .status
            .success()
    );
    let o = ltspid(
        dir.path(),
        &["lts", "noise.wav", "--duration", "1", "-o", "a.lts"],
    );
    assert!(o.status.success());
    let o = ltspid(
        dir.path(),
        &[
            "lts",
            "noise.wav",
            "--duration",
            "1",
            "--fft-size",
            "2048",
            "-o",
            "b.lts",
        ],
    );
    assert!(o.status.success());

    let o = ltspid(dir.path(), &["compare", "a.lts", "a.lts"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("r = 1\n"), "{out}");
    assert!(out.contains("sddd_db = 0\n"));
    assert!(out
        .contains("verdict: closer to the same-speaker baseline (r_same = 0.955, r_diff = 0.89)"));

    let o = ltspid(dir.path(), &["compare", "a.lts", "b.lts"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("fft_size=4096") && err.contains("fft_size=2048"),
        "{err}"
    );
}

#[test]
fn compare_trio_fixture_pair() {
    // Same pinned value as the core pipeline regression test.
    const R_NN: f64 = 0.9992318544070973;
    let dir = tempfile::tempdir().unwrap();
    for name in ["normal1", "normal2"] {
        let spec = trio_fixtures().join(format!("{name}.synth"));
        let o = ltspid(
            dir.path(),
            &[
                "synth",
                spec.to_str().unwrap(),
                "-o",
                &format!("{name}.wav"),
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let o = ltspid(
            dir.path(),
            &[
                "lts",
                &format!("{name}.wav"),
                "--duration",
                "3",
                "--fft-size",
                "1024",
                "-o",
                &format!("{name}.lts"),
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let o = ltspid(dir.path(), &["compare", "normal1.lts", "normal2.lts"]);
    let out = stdout(&o);
    let r: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("r = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((r - R_NN).abs() < 1e-9, "{r}");
}

#[test]
fn batch_with_empty_manifest_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.csv",
        "subject_id,order,rec1,rec2,rec3,anger_rating\n# nobody\n",
    );
    let o = ltspid(dir.path(), &["batch", "m.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn batch_with_bad_manifest_line_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.csv",
        "subject_id,order,rec1,rec2,rec3,anger_rating\ns1,NNA,a,b,c,9\n",
    );
    let o = ltspid(dir.path(), &["batch", "m.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("manifest line 2"), "{}", stderr(&o));
}

fn engineered_rows(dir: &Path) -> PathBuf {
    // r_na averages to 0.934; five subjects rated 4.
    let mut text = String::from("subject_id,order,anger_rating,r_nn,r_na,sddd_nn,sddd_na\n");
    let mut ratings = vec![4u8; 5];
    ratings.extend([3; 18]);
    ratings.extend([2; 9]);
    for (i, rating) in ratings.iter().enumerate() {
        let r_na = if i % 2 == 0 { 0.924 } else { 0.944 };
        let order = if i < 16 { "NNA" } else { "NAN" };
        text.push_str(&format!("s{i:02},{order},{rating},0.95,{r_na},1.5,2.5\n"));
    }
    write(dir, "rows.csv", &text)
}

#[test]
fn report_prints_offset_and_angriest_subset() {
    let dir = tempfile::tempdir().unwrap();
    engineered_rows(dir.path());
    let o = ltspid(
        dir.path(),
        &["report", "rows.csv", "--round", "3", "-o", "out"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("(32.3%; r_same = 0.955, r_diff = 0.890)"),
        "{out}"
    );
    assert!(
        out.contains("Table 3. Angriest recordings, rating >= 4 (n = 5)"),
        "{out}"
    );
    assert!(out.contains("Table 2. Self-reported anger level (n = 32)"));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.contains("\nr_na,all,32,0.934,"), "{csv}");
    assert!(dir.path().join("out.txt").is_file());
}

#[test]
fn config_file_and_env_var_supply_defaults() {
    let dir = tempfile::tempdir().unwrap();
    engineered_rows(dir.path());
    write(
        dir.path(),
        "ltspid.conf",
        "r-same = 0.96\nround = 2\nangry_threshold = 3\n",
    );
    let o = Command::new(env!("CARGO_BIN_EXE_ltspid"))
        .current_dir(dir.path())
        .env("LTSPID_CONFIG", "ltspid.conf")
        .args(["report", "rows.csv"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("r_same = 0.96, r_diff = 0.89"), "{out}");
    assert!(out.contains("rating >= 3 (n = 23)"), "{out}");

    // Flags win over the file.
    let o = ltspid(
        dir.path(),
        &[
            "--config",
            "ltspid.conf",
            "report",
            "rows.csv",
            "--r-same",
            "0.955",
        ],
    );
    assert!(
        stdout(&o).contains("r_same = 0.95, r_diff = 0.89"),
        "{}",
        stdout(&o)
    );

    write(dir.path(), "bad.conf", "voice = loud\n");
    let o = ltspid(dir.path(), &["--config", "bad.conf", "report", "rows.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_rejects_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.synth",
        "kind = sine\ncomponents = 30000:0.5\nsample_rate = 44100\n",
    );
    let o = ltspid(dir.path(), &["synth", "bad.synth", "-o", "x.wav"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Nyquist"), "{}", stderr(&o));
}
