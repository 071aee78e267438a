use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use convtriple::conv::ConvExtractor;
use convtriple::corpus::{corpus_stats, Dialogue, DialogueSuite, TurnSuite};
use convtriple::eval::{
    aggregate_by_category, iaa_jaccard, iaa_pairwise_f, render_table, score_records, Annotations, GoldItem, IaaLevel,
    MatchPolicy,
};
use convtriple::extraction::PredictionRecord;
use convtriple::grammar::{generate, Grammar};
use convtriple::llm::{self, LlmConfig};
use convtriple::parallel::map_ordered;
use convtriple::pattern::PatternExtractor;
use convtriple::pipeline::{CfgExtractor, UtteranceExtractor};
use convtriple::SpeakerContext;
use rand::rngs::StdRng;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "convtriple", version, about = "Triple and perspective extraction from dialogue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Cfg,
    Pattern,
    Conv,
    Llm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Turns,
    Dialogues,
}

#[derive(clap::Args)]
struct PolicyArgs {
    /// Compare elements case-sensitively.
    #[arg(long)]
    no_case_fold: bool,
    /// Treat `-`, `_` and spaces as different characters.
    #[arg(long)]
    no_separator_fold: bool,
    /// Compare predicates without lemmatizing them.
    #[arg(long)]
    no_lemma_fold: bool,
}

impl PolicyArgs {
    fn policy(&self) -> MatchPolicy {
        MatchPolicy {
            case_fold: !self.no_case_fold,
            separator_fold: !self.no_separator_fold,
            lemma_fold: !self.no_lemma_fold,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract triples, writing one JSON record per line.
    Extract {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, value_enum, default_value = "turns")]
        format: Format,
        #[arg(long)]
        input: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Label for first-person pronouns in single turns.
        #[arg(long, default_value = "lenka")]
        self_label: String,
        /// Label for second-person pronouns in single turns.
        #[arg(long, default_value = "agent")]
        addressee_label: String,
        /// Triples kept per dialogue by the conversational model.
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Score predictions against gold annotations.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum, default_value = "turns")]
        format: Format,
        #[arg(long)]
        predictions: PathBuf,
        /// One row per `# category` section of a turn suite.
        #[arg(long)]
        per_category: bool,
        /// Also write the report rows as JSON.
        #[arg(long)]
        report_json: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Agreement between annotators, one dialogue-suite file each.
    Iaa {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Corpus statistics.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "dialogues")]
        format: Format,
    },
    /// Print the built-in grammar, optionally with random derivations.
    DumpGrammar {
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Errors that map to exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn write_output(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

fn jsonl(records: &[PredictionRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Raw completions keyed by endpoint, model, prompt and user message.
struct LlmCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, String>,
}

impl LlmCache {
    fn open(output: Option<&Path>) -> Result<Self> {
        let path = output.map(|o| {
            let mut name = o.file_name().unwrap_or_default().to_os_string();
            name.push(".llm-cache.json");
            o.with_file_name(name)
        });
        let entries = match &path {
            Some(p) if p.exists() => serde_json::from_str(&read(p)?).with_context(|| format!("corrupt cache {}", p.display()))?,
            _ => BTreeMap::new(),
        };
        Ok(Self { path, entries })
    }

    fn key(config: &LlmConfig, message: &str) -> String {
        let mut h = Sha256::new();
        for part in [config.endpoint.as_str(), config.model.as_str(), llm::PROMPT_SHA256, message] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        hex::encode(h.finalize())
    }

    fn save(&self) -> Result<()> {
        if let Some(p) = &self.path {
            fs::write(p, serde_json::to_string_pretty(&self.entries)?).with_context(|| format!("cannot write {}", p.display()))?;
        }
        Ok(())
    }
}

fn llm_records(items: &[(String, String)], ctx: &SpeakerContext, workers: usize, output: Option<&Path>) -> Result<Vec<PredictionRecord>> {
    let config = LlmConfig::from_env();
    config.validate()?;
    let mut cache = LlmCache::open(output)?;
    let pending: Vec<&(String, String)> = items
        .iter()
        .filter(|(_, m)| !cache.entries.contains_key(&LlmCache::key(&config, m)))
        .collect();
    let fresh = map_ordered(&pending, workers, |(_, m)| llm::call(&config, &llm::build_messages(m)?));
    for ((id, m), r) in pending.iter().zip(fresh) {
        match r {
            Ok(raw) => {
                cache.entries.insert(LlmCache::key(&config, m), raw.raw);
            }
            Err(e) => eprintln!("{id}: {e}"),
        }
    }
    cache.save()?;
    let mut records = Vec::new();
    for (id, m) in items {
        let Some(text) = cache.entries.get(&LlmCache::key(&config, m)) else {
            records.push(PredictionRecord::no_triple(id));
            continue;
        };
        match llm::parse_completion(id, text) {
            Ok(raw) => {
                let conv = llm::to_extractions(&raw, ctx);
                for w in conv.warnings.iter().chain(&conv.errors) {
                    eprintln!("{id}: {w}");
                }
                match conv.extractions.first() {
                    Some(e) => records.push(PredictionRecord::from_extraction(id, e)),
                    None => records.push(PredictionRecord::no_triple(id)),
                }
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                records.push(PredictionRecord::no_triple(id));
            }
        }
    }
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn cmd_extract(
    model: Model,
    format: Format,
    input: &Path,
    output: Option<&Path>,
    ctx: SpeakerContext,
    k: usize,
    workers: usize,
) -> Result<()> {
    match (model, format) {
        (Model::Cfg | Model::Pattern, Format::Dialogues) => {
            return Err(Usage("the cfg and pattern models read single turns; use --format turns".into()).into())
        }
        (Model::Conv, Format::Turns) => {
            return Err(Usage("the conv model reads three-turn dialogues; use --format dialogues".into()).into())
        }
        _ => {}
    }
    if k == 0 {
        return Err(Usage("-k must be at least 1".into()).into());
    }
    let text = read(input)?;
    let records = match format {
        Format::Turns => {
            let suite: TurnSuite = text.parse().with_context(|| format!("cannot parse {}", input.display()))?;
            let label = file_label(input);
            let items: Vec<(String, String)> = suite.items.iter().map(|i| (i.id(&label), i.utterance.clone())).collect();
            match model {
                Model::Llm => llm_records(&items, &ctx, workers, output)?,
                _ => {
                    let extractor: Box<dyn UtteranceExtractor> = match model {
                        Model::Cfg => Box::new(CfgExtractor::new(ctx)),
                        _ => Box::new(PatternExtractor::new(ctx)),
                    };
                    map_ordered(&items, workers, |(id, u)| match extractor.extract(id, u) {
                        Ok(e) => PredictionRecord::from_extraction(id, &e),
                        Err(_) => PredictionRecord::no_triple(id),
                    })
                }
            }
        }
        Format::Dialogues => {
            let suite: DialogueSuite = text.parse().with_context(|| format!("cannot parse {}", input.display()))?;
            match model {
                Model::Llm => {
                    let items: Vec<(String, String)> =
                        suite.dialogues.iter().map(|d| (d.id.clone(), llm::dialogue_message(d))).collect();
                    let ctx = SpeakerContext::new("speaker1", "speaker2")?;
                    llm_records(&items, &ctx, workers, output)?
                }
                _ => {
                    let x = ConvExtractor::new(k);
                    map_ordered(&suite.dialogues, workers, |d: &Dialogue| match x.extract(d) {
                        Ok(es) if !es.is_empty() => es.iter().map(|e| PredictionRecord::from_extraction(&d.id, e)).collect(),
                        _ => vec![PredictionRecord::no_triple(&d.id)],
                    })
                    .into_iter()
                    .flatten()
                    .collect()
                }
            }
        }
    };
    let missing = records.iter().filter(|r| r.no_triple).count();
    write_output(output, &jsonl(&records)?)?;
    eprintln!("{} records, {missing} without a triple", records.len());
    Ok(())
}

fn gold_items(path: &Path, format: Format) -> Result<Vec<GoldItem>> {
    let text = read(path)?;
    Ok(match format {
        Format::Turns => {
            let suite: TurnSuite = text.parse().with_context(|| format!("cannot parse {}", path.display()))?;
            let label = file_label(path);
            suite
                .items
                .iter()
                .map(|i| GoldItem {
                    id: i.id(&label),
                    category: i.category.clone().unwrap_or_else(|| "uncategorized".into()),
                    gold: i.gold.clone(),
                })
                .collect()
        }
        Format::Dialogues => {
            let suite: DialogueSuite = text.parse().with_context(|| format!("cannot parse {}", path.display()))?;
            suite
                .dialogues
                .into_iter()
                .filter_map(|d| {
                    let gold = d.gold.into_iter().next()?;
                    Some(GoldItem {
                        id: d.id,
                        category: "dialogues".into(),
                        gold,
                    })
                })
                .collect()
        }
    })
}

fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).with_context(|| format!("{}:{}: bad record", path.display(), n + 1)))
        .collect()
}

fn cmd_evaluate(
    gold: &Path,
    format: Format,
    predictions: &Path,
    per_category: bool,
    report_json: Option<&Path>,
    policy: MatchPolicy,
) -> Result<()> {
    let gold = gold_items(gold, format)?;
    let preds = read_predictions(predictions)?;
    let verdicts = score_records(&gold, &preds, &policy)?;
    let mut rows = aggregate_by_category(&verdicts)?;
    if !per_category {
        rows.retain(|(name, _)| name == "all");
    }
    print!("{}", render_table(&rows));
    if let Some(p) = report_json {
        let json: Vec<_> = rows
            .iter()
            .map(|(name, r)| serde_json::json!({"test": name, "report": r}))
            .collect();
        fs::write(p, serde_json::to_string_pretty(&json)? + "\n").with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

fn cmd_iaa(files: &[PathBuf]) -> Result<()> {
    if files.len() < 2 {
        return Err(Usage("agreement needs at least two annotation files".into()).into());
    }
    let mut anns = Vec::new();
    for f in files {
        let suite: DialogueSuite = read(f)?.parse().with_context(|| format!("cannot parse {}", f.display()))?;
        anns.push(Annotations {
            annotator: file_label(f),
            items: suite
                .dialogues
                .into_iter()
                .map(|d| (d.id, d.gold.into_iter().map(|g| g.triple).collect()))
                .collect(),
        });
    }
    println!("{:<12} {:>8} {:>11}", "", "Jaccard", "Pairwise-F");
    for level in IaaLevel::ALL {
        let j = iaa_jaccard(&anns, level)?;
        let f = iaa_pairwise_f(&anns, level)?;
        println!("{:<12} {:>8.4} {:>11.4}", level.name(), j, f);
    }
    Ok(())
}

fn cmd_stats(input: &Path, format: Format) -> Result<()> {
    let text = read(input)?;
    match format {
        Format::Dialogues => {
            let suite: DialogueSuite = text.parse().with_context(|| format!("cannot parse {}", input.display()))?;
            let s = corpus_stats(&suite.dialogues);
            println!("dialogues              {}", s.dialogues);
            println!("utterances             {}", s.utterances);
            println!("tokens                 {}", s.tokens);
            println!("triples                {}", s.triples);
            println!("tokens per dialogue    {:.2}", s.tokens_per_dialogue);
            println!("tokens per utterance   {:.2}", s.tokens_per_utterance);
            println!("triples per dialogue   {:.2}", s.triples_per_dialogue);
            println!("triples per utterance  {:.2}", s.triples_per_utterance);
        }
        Format::Turns => {
            let suite: TurnSuite = text.parse().with_context(|| format!("cannot parse {}", input.display()))?;
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for i in &suite.items {
                *counts.entry(i.category.as_deref().unwrap_or("uncategorized")).or_default() += 1;
            }
            for (cat, n) in &counts {
                println!("{cat:<22} {n}");
            }
            println!("{:<22} {}", "total", suite.items.len());
        }
    }
    Ok(())
}

fn cmd_dump_grammar(samples: usize, depth: usize, seed: u64) -> Result<()> {
    let g = Grammar::builtin();
    print!("{}", g.text());
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..samples {
        let s = generate(g, depth, &mut rng)?;
        println!("{}\t{}", s.terminal_names(g).join(" "), s.tree);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract {
            model,
            format,
            input,
            output,
            self_label,
            addressee_label,
            k,
            workers,
        } => {
            let ctx = SpeakerContext::new(self_label, addressee_label).map_err(|e| Usage(e.to_string()))?;
            cmd_extract(model, format, &input, output.as_deref(), ctx, k, workers)
        }
        Command::Evaluate {
            gold,
            format,
            predictions,
            per_category,
            report_json,
            policy,
        } => cmd_evaluate(&gold, format, &predictions, per_category, report_json.as_deref(), policy.policy()),
        Command::Iaa { files } => cmd_iaa(&files),
        Command::Stats { input, format } => cmd_stats(&input, format),
        Command::DumpGrammar { samples, depth, seed } => cmd_dump_grammar(samples, depth, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
