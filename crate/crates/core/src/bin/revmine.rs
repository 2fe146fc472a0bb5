use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use revmine_core::fixture;
use revmine_core::insights::SentimentClass;
use revmine_core::ngram::NgramOrder;
use revmine_core::report::{
    count_segments, ranked, run_pipeline, write_outputs, ConfigFile, ErrorKind, FileFormat, OutputFormat,
    PipelineError, RunConfig, Stage, CONFIG_ENV_VAR,
};
use revmine_core::textprep::StemmerKind;

#[derive(Parser)]
#[command(name = "revmine", version, about = "Mine star-rated reviews for topics and a 7S assessment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write report files.
    Analyze(AnalyzeArgs),
    /// Print the top n-grams of each sentiment segment.
    Ngrams(NgramsArgs),
    /// Write the seeded synthetic review corpus.
    GenFixture(FixtureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for FileFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => FileFormat::Csv,
            FormatArg::Jsonl => FileFormat::Jsonl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StemmerArg {
    Porter,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Json,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Bigram,
    Trigram,
}

#[derive(Args)]
struct CommonArgs {
    /// Review file; repeat for several files.
    #[arg(long = "input", short = 'i')]
    inputs: Vec<PathBuf>,
    /// Input format; defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// CSV input has no header row.
    #[arg(long)]
    no_header: bool,
    /// JSON config file; also read from $REVMINE_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    stop_words: Option<PathBuf>,
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    #[arg(long, value_enum)]
    stemmer: Option<StemmerArg>,
    #[arg(long)]
    min_token_length: Option<usize>,
    /// Top-k bigrams and trigrams per segment.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    emit: Option<Vec<EmitArg>>,
    /// Topic dictionary JSON.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Topic-to-7S mapping JSON.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    strength_threshold: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    weakness_threshold: Option<f64>,
}

#[derive(Args)]
struct NgramsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "bigram")]
    order: OrderArg,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long, default_value_t = fixture::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = fixture::DEFAULT_REVIEWS)]
    reviews: usize,
    /// Output file; stdout if omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Defaults to the output extension, or CSV.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl CommonArgs {
    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            inputs: (!self.inputs.is_empty()).then(|| self.inputs.clone()),
            format: self.format.map(Into::into),
            has_header: self.no_header.then_some(false),
            stop_words: self.stop_words.clone(),
            abbreviations: self.abbreviations.clone(),
            stemmer: self.stemmer.map(|s| match s {
                StemmerArg::Porter => StemmerKind::Porter,
                StemmerArg::None => StemmerKind::None,
            }),
            min_token_length: self.min_token_length,
            k: self.k,
            min_count: self.min_count,
            threads: self.threads,
            ..ConfigFile::default()
        }
    }

    fn resolve(&self, extra: impl FnOnce(&mut ConfigFile)) -> Result<RunConfig, PipelineError> {
        let path = self.config.clone().or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
        let file = path.as_deref().map(ConfigFile::load).transpose()?;
        let mut overrides = self.overrides();
        extra(&mut overrides);
        RunConfig::resolve(file, overrides)
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), PipelineError> {
    let config = args.common.resolve(|o| {
        o.out = args.out.clone();
        o.emit = args.emit.as_ref().map(|v| {
            v.iter()
                .map(|e| match e {
                    EmitArg::Json => OutputFormat::Json,
                    EmitArg::Markdown => OutputFormat::Markdown,
                })
                .collect()
        });
        o.dictionary = args.dict.clone();
        o.mapping = args.map.clone();
        o.strength_threshold = args.strength_threshold;
        o.weakness_threshold = args.weakness_threshold;
    })?;
    let report = run_pipeline(&config)?;
    for path in write_outputs(&report, &config.out_dir, &config.emit)? {
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "{} records kept, {} rejected, {} topics",
        report.corpus.records_kept,
        report.corpus.records_rejected,
        report.topics.len()
    );
    Ok(())
}

fn ngrams(args: NgramsArgs) -> Result<(), PipelineError> {
    let config = args.common.resolve(|_| {})?;
    config.validate()?;
    let counted = count_segments(&config)?;
    let order = match args.order {
        OrderArg::Bigram => NgramOrder::Bigram,
        OrderArg::Trigram => NgramOrder::Trigram,
    };
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| PipelineError::new(Stage::Output, ErrorKind::Io, e.to_string());
    writeln!(out, "segment\tngram\tcount\tcond_prob").map_err(io_err)?;
    for class in SentimentClass::ALL {
        let table = &counted.tables[&class];
        for g in ranked(table, order, config.k, config.min_count) {
            writeln!(out, "{class}\t{}\t{}\t{:.6}", g.ngram.join(" "), g.count, g.cond_prob).map_err(io_err)?;
        }
    }
    Ok(())
}

fn gen_fixture(args: FixtureArgs) -> Result<(), PipelineError> {
    let records = fixture::generate(args.seed, args.reviews);
    let format = args
        .format
        .map(FileFormat::from)
        .or_else(|| args.out.as_deref().map(FileFormat::from_path))
        .unwrap_or(FileFormat::Csv);
    let io_err = |e: io::Error| PipelineError::new(Stage::Output, ErrorKind::Io, e.to_string());
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        FileFormat::Csv => fixture::write_csv(&records, sink),
        FileFormat::Jsonl => fixture::write_jsonl(&records, sink),
    }
    .map_err(io_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Ngrams(a) => ngrams(a),
        Command::GenFixture(a) => gen_fixture(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("revmine: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
