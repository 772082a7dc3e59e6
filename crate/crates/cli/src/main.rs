use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use versekit::audio::{cut_segment, load_wav, peak_normalize, to_mono_16k, write_wav, AudioBuffer, TARGET_SAMPLE_RATE};
use versekit::config::Config;
use versekit::corpus::{
    align_chapter, compute_quality_stats, discover_pairs, emissions_from_path, emit_metadata_csv, filter_segments,
    read_manifest, split_dataset_by, synth_path, write_manifest, ChapterAlignOptions, ChapterPair, SegmentRecord,
    Split, SplitUnit,
};
use versekit::ctc::{greedy_decode, read_emissions, write_emissions, LogProbMatrix};
use versekit::metrics::{eval_report, parse_hypotheses};
use versekit::tags::TagStore;
use versekit::textnorm::{
    build_vocab, encode_labels, normalize_line_with, romanize, Vocab, BLANK_INDEX, DELIMITER_INDEX,
};
use versekit_review::{ReviewOptions, ReviewState};

/// Build, filter and score verse-aligned speech corpora.
#[derive(Debug, Parser)]
#[command(name = "versekit", version)]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize transcript lines and optionally write a vocabulary
    Normalize(NormalizeArgs),
    /// Match chapter audio with transcripts by file name
    Pairs {
        audio_dir: PathBuf,
        text_dir: PathBuf,
    },
    /// Write synthetic emissions (and optionally audio) for a transcript
    Synth(SynthArgs),
    /// Align every discovered chapter and cut it into verse segments
    Build(BuildArgs),
    /// Greedy-decode emission files into `id<TAB>text` lines
    Decode {
        #[arg(required = true)]
        emissions: Vec<PathBuf>,
    },
    /// Recompute word/char counts and rates, or summarize a manifest
    Stats {
        manifest: PathBuf,
        /// Write the updated manifest here
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Keep segments that pass the configured quality rules
    Filter(FilterArgs),
    /// Assign train/test splits
    Split(SplitArgs),
    /// Write the training metadata CSV for a split manifest
    Csv {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score hypotheses against manifest transcripts
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// `id<TAB>text` file
        #[arg(long)]
        hyp: PathBuf,
        /// Per-segment JSON lines instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Serve the review API (and frontend, if configured)
    Review(ReviewArgs),
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Build a vocabulary from the normalized lines and save it here
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Print romanized tokens instead of normalized text
    #[arg(long)]
    romanize: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Chapter transcript, one verse per line
    #[arg(long)]
    text: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long, default_value_t = 3)]
    frames_per_token: usize,
    #[arg(long, default_value_t = 0.02)]
    frame_duration: f64,
    /// Blank frames before the first token
    #[arg(long, default_value_t = 0)]
    lead_in: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write a 16 kHz WAV of matching length (tone on token frames)
    #[arg(long)]
    audio_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    audio_dir: PathBuf,
    #[arg(long)]
    text_dir: PathBuf,
    /// Directory with one `<Book_NN>.emissions` file per chapter
    #[arg(long)]
    emissions_dir: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    /// Receives `segments/` and `manifest.jsonl`
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct FilterArgs {
    manifest: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Review tag log to apply before filtering
    #[arg(long)]
    tags: Option<PathBuf>,
    /// Write `id<TAB>reason` for every rejected segment
    #[arg(long)]
    rejected: Option<PathBuf>,
    /// Ignore review tags
    #[arg(long)]
    no_require_high: bool,
}

#[derive(Debug, Args)]
struct SplitArgs {
    manifest: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep each chapter on one side of the split
    #[arg(long)]
    by_chapter: bool,
    /// Also write the metadata CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReviewArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Tag log; defaults to `tags.jsonl` next to the manifest
    #[arg(long)]
    tags: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn load_manifest(path: &Path) -> Result<Vec<SegmentRecord>> {
    read_manifest(path).with_context(|| format!("reading manifest {}", path.display()))
}

fn normalize(config: &Config, args: NormalizeArgs) -> Result<()> {
    let options = config.normalize_options();
    let overrides = config.override_table()?;
    let normalized: Vec<_> = read_lines(&args.input)?
        .iter()
        .map(|l| normalize_line_with(l, options))
        .collect();
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    for line in &normalized {
        if args.romanize {
            writeln!(out, "{}", romanize(line, &overrides))?;
        } else {
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    if let Some(path) = &args.vocab_out {
        let vocab = build_vocab(&normalized)?;
        vocab.save(path).with_context(|| format!("writing {}", path.display()))?;
        info!("{} tokens written to {}", vocab.len(), path.display());
    }
    Ok(())
}

fn pairs(audio_dir: &Path, text_dir: &Path) -> Result<()> {
    let found = discover_pairs(audio_dir, text_dir)?;
    let mut out = std::io::stdout().lock();
    for p in &found.pairs {
        writeln!(out, "{}\t{}\t{}", p.chapter_id, p.audio_path.display(), p.text_path.display())?;
    }
    for u in &found.unmatched {
        warn!("unmatched {}: {}", u.path.display(), u.reason);
    }
    Ok(())
}

/// Label sequence of a chapter as `align_chapter` builds it.
fn chapter_labels(config: &Config, lines: &[String], vocab: &Vocab) -> Vec<usize> {
    let mut labels = Vec::new();
    for line in lines {
        let n = normalize_line_with(line, config.normalize_options());
        if n.is_empty() {
            continue;
        }
        if !labels.is_empty() {
            labels.push(DELIMITER_INDEX);
        }
        labels.extend(encode_labels(&n, vocab).into_vec());
    }
    labels
}

fn synth(config: &Config, args: SynthArgs) -> Result<()> {
    if args.frames_per_token == 0 {
        bail!("--frames-per-token must be at least 1");
    }
    let vocab = Vocab::load(&args.vocab)?;
    let labels = chapter_labels(config, &read_lines(&args.text)?, &vocab);
    if labels.is_empty() {
        bail!("{} has no text after normalization", args.text.display());
    }
    let mut path = vec![BLANK_INDEX; args.lead_in];
    path.extend(synth_path(&labels, args.frames_per_token, BLANK_INDEX));
    path.push(BLANK_INDEX);
    let emissions = emissions_from_path(&path, vocab.len(), BLANK_INDEX, args.frame_duration)?
        .with_tokens(vocab.tokens().to_vec())?;
    write_emissions(&emissions, create(&args.output)?)?;
    if let Some(audio_path) = &args.audio_out {
        let per_frame = (args.frame_duration * TARGET_SAMPLE_RATE as f64).round() as usize;
        let samples: Vec<f32> = path
            .iter()
            .enumerate()
            .flat_map(|(t, &s)| {
                (0..per_frame).map(move |k| {
                    if s == BLANK_INDEX {
                        0.0
                    } else {
                        let n = (t * per_frame + k) as f32;
                        0.3 * (n * 2.0 * std::f32::consts::PI * (150.0 + 10.0 * s as f32) / 16000.0).sin()
                    }
                })
            })
            .collect();
        write_wav(&AudioBuffer::mono(samples, TARGET_SAMPLE_RATE)?, audio_path)?;
    }
    Ok(())
}

fn build_chapter(
    config: &Config,
    pair: &ChapterPair,
    emissions: &LogProbMatrix,
    vocab: &Vocab,
    options: &ChapterAlignOptions,
    out_dir: &Path,
) -> Result<Vec<SegmentRecord>> {
    let aligned = align_chapter(pair, emissions, vocab, options)?;
    let audio = load_wav(&pair.audio_path).with_context(|| format!("reading {}", pair.audio_path.display()))?;
    let audio = peak_normalize(&to_mono_16k(&audio), config.audio.target_dbfs);
    let fd = emissions.frame_duration();
    if (audio.duration_sec() - emissions.duration_sec()).abs() > fd {
        warn!(
            "{}: audio is {:.3}s but emissions cover {:.3}s",
            pair.chapter_id,
            audio.duration_sec(),
            emissions.duration_sec()
        );
    }
    for (record, &(start, end)) in aligned.records.iter().zip(&aligned.frame_spans) {
        let segment = cut_segment(&audio, start, end, fd)
            .with_context(|| format!("cutting {}", record.id))?;
        let path = out_dir.join(&record.audio_filepath);
        write_wav(&segment, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(aligned.records)
}

fn build(config: &Config, args: BuildArgs) -> Result<()> {
    let vocab = Vocab::load(&args.vocab)?;
    let segment_dir = args.out_dir.join("segments");
    std::fs::create_dir_all(&segment_dir).with_context(|| format!("creating {}", segment_dir.display()))?;
    let options = ChapterAlignOptions {
        align: config.align_options(),
        normalize: config.normalize_options(),
        overrides: config.override_table()?,
        // relative to the manifest
        segment_dir: PathBuf::from("segments"),
    };
    let found = discover_pairs(&args.audio_dir, &args.text_dir)?;
    for u in &found.unmatched {
        warn!("unmatched {}: {}", u.path.display(), u.reason);
    }
    let mut records = Vec::new();
    let mut failed = 0;
    for pair in &found.pairs {
        let emission_path = args.emissions_dir.join(format!("{}.emissions", pair.chapter_id));
        let result = read_emissions(&emission_path)
            .with_context(|| format!("reading {}", emission_path.display()))
            .and_then(|e| build_chapter(config, pair, &e, &vocab, &options, &args.out_dir));
        match result {
            Ok(mut chapter) => {
                info!("{}: {} segments", pair.chapter_id, chapter.len());
                records.append(&mut chapter);
            }
            Err(e) => {
                error!("{}: {e:#}", pair.chapter_id);
                failed += 1;
            }
        }
    }
    let manifest = args.out_dir.join("manifest.jsonl");
    write_manifest(&records, &manifest)?;
    println!("{} segments from {} chapters written to {}", records.len(), found.pairs.len() - failed, manifest.display());
    if failed > 0 {
        bail!("{failed} chapter(s) failed");
    }
    Ok(())
}

fn decode(paths: &[PathBuf]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    for path in paths {
        let emissions = read_emissions(path).with_context(|| format!("reading {}", path.display()))?;
        let vocab = Vocab::from_tokens(emissions.tokens().to_vec())
            .map_err(|e| anyhow::anyhow!("{}: token line is not a vocabulary: {e}", path.display()))?;
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        writeln!(out, "{id}\t{}", vocab.decode(greedy_decode(&emissions).as_slice()))?;
    }
    Ok(())
}

fn stats(manifest: &Path, output: Option<&Path>) -> Result<()> {
    let records: Vec<SegmentRecord> = load_manifest(manifest)?
        .iter()
        .map(compute_quality_stats)
        .collect::<Result<_, _>>()?;
    if let Some(path) = output {
        write_manifest(&records, path)?;
    }
    let n = records.len().max(1) as f64;
    let hours: f64 = records.iter().map(|r| r.duration).sum::<f64>() / 3600.0;
    println!("segments: {}", records.len());
    println!("hours: {hours:.3}");
    println!("mean word rate: {:.3}", records.iter().map(|r| r.word_rate).sum::<f64>() / n);
    println!("mean char rate: {:.3}", records.iter().map(|r| r.char_rate).sum::<f64>() / n);
    for split in [Split::Train, Split::Test, Split::Unassigned] {
        println!("{split}: {}", records.iter().filter(|r| r.split == split).count());
    }
    Ok(())
}

fn filter(config: &Config, args: FilterArgs) -> Result<()> {
    let mut records = load_manifest(&args.manifest)?;
    if let Some(path) = &args.tags {
        TagStore::open(path)?.apply(&mut records);
    }
    let mut rules = config.filter;
    if args.no_require_high {
        rules.require_tag_high = false;
    }
    let outcome = filter_segments(records, &rules)?;
    write_manifest(&outcome.kept, &args.output)?;
    if let Some(path) = &args.rejected {
        let mut out = create(path)?;
        for r in &outcome.rejected {
            writeln!(out, "{}\t{}", r.record.id, r.reason)?;
        }
        out.flush()?;
    }
    println!("kept {}, rejected {}", outcome.kept.len(), outcome.rejected.len());
    Ok(())
}

fn split(config: &Config, args: SplitArgs) -> Result<()> {
    let unit = if args.by_chapter { SplitUnit::Chapter } else { config.split.unit };
    let records = split_dataset_by(
        load_manifest(&args.manifest)?,
        args.ratio.unwrap_or(config.split.ratio),
        args.seed.unwrap_or(config.split.seed),
        unit,
    )?;
    write_manifest(&records, &args.output)?;
    if let Some(path) = &args.csv {
        emit_metadata_csv(&records, create(path)?)?;
    }
    let train = records.iter().filter(|r| r.split == Split::Train).count();
    println!("train {train}, test {}", records.len() - train);
    Ok(())
}

fn eval(manifest: &Path, hyp: &Path, json: bool) -> Result<()> {
    let records = load_manifest(manifest)?;
    let text = std::fs::read_to_string(hyp).with_context(|| format!("reading {}", hyp.display()))?;
    let report = eval_report(&records, &parse_hypotheses(&text)?)?;
    if report.missing() > 0 {
        warn!("{} segment(s) have no hypothesis and were scored as empty", report.missing());
    }
    if json {
        print!("{}", report.to_json_lines());
    } else {
        print!("{}", report.render_table());
    }
    Ok(())
}

fn review(config: &Config, args: ReviewArgs) -> Result<()> {
    let tags = args.tags.clone().unwrap_or_else(|| {
        args.manifest
            .parent()
            .unwrap_or(Path::new(""))
            .join("tags.jsonl")
    });
    let options = ReviewOptions {
        peak_buckets: config.review.peak_buckets,
        static_dir: args.static_dir.clone().or_else(|| config.review.static_dir.clone()),
    };
    let state = Arc::new(ReviewState::load(&args.manifest, &tags, options)?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port.unwrap_or(config.review.port))
        .parse()
        .context("invalid --host/--port")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(versekit_review::serve(state, addr))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Normalize(args) => normalize(&config, args),
        Command::Pairs { audio_dir, text_dir } => pairs(&audio_dir, &text_dir),
        Command::Synth(args) => synth(&config, args),
        Command::Build(args) => build(&config, args),
        Command::Decode { emissions } => decode(&emissions),
        Command::Stats { manifest, output } => stats(&manifest, output.as_deref()),
        Command::Filter(args) => filter(&config, args),
        Command::Split(args) => split(&config, args),
        Command::Csv { manifest, output } => {
            emit_metadata_csv(&load_manifest(&manifest)?, create(&output)?)?;
            Ok(())
        }
        Command::Eval { manifest, hyp, json } => eval(&manifest, &hyp, json),
        Command::Review(args) => review(&config, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
