//! `ltspid`: long-term-spectrum speaker comparison from the command line.
//!
//! Exit codes: 0 success, 1 data or pipeline failure, 2 usage error.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ltspid::audio_io::{decode_wav, Anchor, SegmentSpec};
use ltspid::correlation::compare;
use ltspid::harness::{self, load_manifest, Pairing, StudyConfig};
use ltspid::lts::{compute_lts, read_spectrum, write_spectrum, LtsConfig};
use ltspid::stats::Baselines;
use ltspid::synth::{encode_wav, generate, BitDepth, SynthSpec};
use ltspid::{AudioClip, Spectrum};

use config::{FileConfig, CONFIG_ENV};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

#[derive(Parser)]
#[command(
    name = "ltspid",
    version,
    about = "Long-term-spectrum speaker comparison"
)]
struct Cli {
    /// Defaults file in `key = value` form; flags override it.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the long-term spectrum of a WAV file.
    Lts(LtsCmd),
    /// Compare two spectrum files (R and SDDD).
    Compare(CompareCmd),
    /// Run a whole study from a manifest and write both reports.
    Batch(BatchCmd),
    /// Re-aggregate the per-subject rows of an earlier batch report.
    Report(ReportCmd),
    /// Render a synthetic test signal to WAV.
    Synth(SynthCmd),
}

fn power_of_two(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n >= 2 && n.is_power_of_two() {
        Ok(n)
    } else {
        Err(format!("{n} is not a power of two >= 2"))
    }
}

#[derive(Args, Clone, Default)]
struct AnalysisFlags {
    /// Segment length in seconds [default: 30].
    #[arg(long)]
    duration: Option<f64>,
    /// Which end the segment is measured from: start or end [default: end].
    #[arg(long)]
    anchor: Option<Anchor>,
    /// Seconds skipped at the anchored end [default: 0].
    #[arg(long)]
    offset: Option<f64>,
    /// FFT length, a power of two [default: 4096].
    #[arg(long, value_parser = power_of_two)]
    fft_size: Option<usize>,
    /// Frame hop in samples [default: fft-size / 2].
    #[arg(long)]
    hop: Option<usize>,
    /// Keep the DC bin.
    #[arg(long)]
    include_dc: bool,
    /// Power floor as a fraction of the strongest bin's power [default: 1e-12].
    #[arg(long)]
    power_floor: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct BaselineFlags {
    /// Same-speaker reference R [default: 0.955].
    #[arg(long)]
    r_same: Option<f64>,
    /// Different-speaker reference R [default: 0.890].
    #[arg(long)]
    r_diff: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct AggregateFlags {
    #[command(flatten)]
    baselines: BaselineFlags,
    /// Ratings at or above this form the angriest subset [default: 4].
    #[arg(long)]
    angry_threshold: Option<u8>,
    /// Print numbers with this many decimals instead of full precision.
    #[arg(long)]
    round: Option<usize>,
    /// Output prefix; writes PREFIX.csv and PREFIX.txt.
    #[arg(short, long, default_value = "report")]
    output: PathBuf,
}

#[derive(Args)]
struct LtsCmd {
    /// WAV recording.
    input: PathBuf,
    /// Spectrum file to write (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    analysis: AnalysisFlags,
}

#[derive(Args)]
struct CompareCmd {
    /// Spectrum file written by `lts`.
    a: PathBuf,
    /// Spectrum file written by `lts`.
    b: PathBuf,
    #[command(flatten)]
    baselines: BaselineFlags,
}

#[derive(Args)]
struct BatchCmd {
    /// Study manifest (CSV).
    manifest: PathBuf,
    #[command(flatten)]
    analysis: AnalysisFlags,
    /// Which normal/angry pair feeds r_na: mean, first or second [default: mean].
    #[arg(long)]
    pairing: Option<Pairing>,
    #[command(flatten)]
    aggregate: AggregateFlags,
}

#[derive(Args)]
struct ReportCmd {
    /// Machine-readable report written by `batch`.
    rows: PathBuf,
    #[command(flatten)]
    aggregate: AggregateFlags,
}

#[derive(Args)]
struct SynthCmd {
    /// Signal description in `key = value` form.
    spec: PathBuf,
    /// WAV file to write.
    #[arg(short, long)]
    output: PathBuf,
    /// 16, 24, float32 or float64 [default: 16].
    #[arg(long)]
    bit_depth: Option<BitDepth>,
}

fn segment_and_lts(
    flags: &AnalysisFlags,
    file: &FileConfig,
) -> Result<(SegmentSpec, LtsConfig<f64>), CliError> {
    let defaults = SegmentSpec::default();
    let segment = SegmentSpec {
        duration_s: file.pick(flags.duration, "duration", defaults.duration_s)?,
        anchor: file.pick(flags.anchor, "anchor", defaults.anchor)?,
        offset_s: file.pick(flags.offset, "offset", defaults.offset_s)?,
    };
    segment
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let fft_size = file.pick(flags.fft_size, "fft_size", 4096)?;
    let mut lts = LtsConfig::<f64>::with_fft_size(fft_size);
    lts.hop = file.pick(flags.hop, "hop", lts.hop)?;
    lts.include_dc = flags.include_dc || file.pick(None, "include_dc", false)?;
    lts.power_floor = file.pick(flags.power_floor, "power_floor", lts.power_floor)?;
    lts.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((segment, lts))
}

fn baselines(flags: &BaselineFlags, file: &FileConfig) -> Result<Baselines<f64>, CliError> {
    let d = Baselines::<f64>::default();
    Baselines::new(
        file.pick(flags.r_same, "r_same", d.r_same)?,
        file.pick(flags.r_diff, "r_diff", d.r_diff)?,
    )
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn read_spectrum_file(path: &Path) -> anyhow::Result<Spectrum> {
    let f = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_spectrum(std::io::BufReader::new(f)).with_context(|| format!("{}", path.display()))
}

fn run_lts(cmd: &LtsCmd, file: &FileConfig) -> Result<(), CliError> {
    let (segment, lts) = segment_and_lts(&cmd.analysis, file)?;
    let clip: AudioClip = decode_wav(&cmd.input).map_err(anyhow::Error::from)?;
    let seg = clip
        .extract_segment(&segment)
        .map_err(anyhow::Error::from)?;
    let spectrum = compute_lts(&seg, &lts).map_err(anyhow::Error::from)?;
    let summary = format!(
        "k = {}\nfreq_step_hz = {}\nframes_averaged = {}",
        spectrum.k(),
        spectrum.freq_step_hz(),
        lts.frame_count(seg.len())
    );
    match &cmd.output {
        Some(path) => {
            let mut buf = Vec::new();
            write_spectrum(&spectrum, &mut buf).map_err(anyhow::Error::from)?;
            write_file(path, &String::from_utf8_lossy(&buf))?;
            println!("{summary}");
        }
        None => {
            write_spectrum(&spectrum, std::io::stdout().lock()).map_err(anyhow::Error::from)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn run_compare(cmd: &CompareCmd, file: &FileConfig) -> Result<(), CliError> {
    let b = baselines(&cmd.baselines, file)?;
    let a = read_spectrum_file(&cmd.a)?;
    let c = read_spectrum_file(&cmd.b)?;
    let res = compare(&a, &c).map_err(anyhow::Error::from)?;
    println!("r = {}", res.r);
    println!("sddd_db = {}", res.sddd);
    println!("k = {}", res.k);
    let verdict = if (res.r - b.r_same).abs() <= (res.r - b.r_diff).abs() {
        "closer to the same-speaker baseline"
    } else {
        "closer to the different-speaker baseline"
    };
    println!(
        "verdict: {verdict} (r_same = {}, r_diff = {})",
        b.r_same, b.r_diff
    );
    Ok(())
}

fn emit_report(
    report: &ltspid::StudyReport,
    flags: &AggregateFlags,
    round: Option<usize>,
) -> Result<(), CliError> {
    let csv = harness::render_csv(report, round);
    let text = harness::render_text(report, round);
    let prefix = flags.output.as_os_str().to_string_lossy();
    let csv_path = PathBuf::from(format!("{prefix}.csv"));
    let txt_path = PathBuf::from(format!("{prefix}.txt"));
    write_file(&csv_path, &csv)?;
    write_file(&txt_path, &text)?;
    // Tables 1 to 3 on stdout.
    let head: Vec<&str> = text.split("\n\n").take(3).collect();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}\n", head.join("\n\n"));
    let _ = writeln!(
        out,
        "wrote {} and {}",
        csv_path.display(),
        txt_path.display()
    );
    Ok(())
}

fn run_batch(cmd: &BatchCmd, file: &FileConfig) -> Result<(), CliError> {
    let (segment, lts) = segment_and_lts(&cmd.analysis, file)?;
    let cfg = StudyConfig {
        segment,
        lts,
        pairing: file.pick(cmd.pairing, "pairing", Pairing::Mean)?,
        baselines: baselines(&cmd.aggregate.baselines, file)?,
        angry_threshold: file.pick(cmd.aggregate.angry_threshold, "angry_threshold", 4)?,
    };
    let round = file.pick_opt(cmd.aggregate.round, "round")?;
    let sessions = load_manifest(&cmd.manifest).map_err(anyhow::Error::from)?;
    if sessions.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: manifest lists no sessions",
            cmd.manifest.display()
        )));
    }
    let report = harness::run_study(&sessions, &cfg).map_err(anyhow::Error::from)?;
    emit_report(&report, &cmd.aggregate, round)
}

fn run_report(cmd: &ReportCmd, file: &FileConfig) -> Result<(), CliError> {
    let b = baselines(&cmd.aggregate.baselines, file)?;
    let threshold = file.pick(cmd.aggregate.angry_threshold, "angry_threshold", 4)?;
    let round = file.pick_opt(cmd.aggregate.round, "round")?;
    let rows = harness::read_rows::<f64>(&cmd.rows).map_err(anyhow::Error::from)?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: report has no subject rows",
            cmd.rows.display()
        )));
    }
    let report = harness::aggregate(rows, &b, threshold).map_err(anyhow::Error::from)?;
    emit_report(&report, &cmd.aggregate, round)
}

fn run_synth(cmd: &SynthCmd, file: &FileConfig) -> Result<(), CliError> {
    let depth = file.pick(cmd.bit_depth, "bit_depth", BitDepth::Pcm16)?;
    let text = fs::read_to_string(&cmd.spec)
        .with_context(|| format!("cannot read {}", cmd.spec.display()))?;
    let spec = SynthSpec::from_config_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", cmd.spec.display())))?;
    let clip: AudioClip = generate(&spec).map_err(anyhow::Error::from)?;
    encode_wav(&clip, depth, &cmd.output).map_err(anyhow::Error::from)?;
    println!(
        "wrote {} ({} samples at {} Hz)",
        cmd.output.display(),
        clip.len(),
        clip.sample_rate()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Lts(c) => run_lts(c, &file),
        Command::Compare(c) => run_compare(c, &file),
        Command::Batch(c) => run_batch(c, &file),
        Command::Report(c) => run_report(c, &file),
        Command::Synth(c) => run_synth(c, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
