use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrerank::config::RunConfig;
use qrerank::data::{load_corpus, read_examples, write_examples, ExampleRecord};
use qrerank::error::{Error, Result, EXIT_USAGE};
use qrerank::experiment::{compare, featurize, groups_to_predictions, labels, Prepared};
use qrerank::formats::{
    prediction_groups, read_gram, read_model, read_predictions, write_gram, write_model, write_predictions, Prediction,
};
use qrerank_core::corpus::Task;
use qrerank_core::kernel::{TkKind, VectorKernel};
use qrerank_core::rankeval::{evaluate, per_query_ap, randomization_test, QueryGroup};
use qrerank_core::svm::train_smo;
use qrerank_core::Example;

#[derive(Parser)]
#[command(name = "qrerank", version, about = "Kernel-based re-ranking of forum questions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a JSONL corpus into featurized examples.
    Featurize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Compute the training Gram matrix.
    Gram {
        #[arg(long)]
        examples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Train an SVM on featurized examples.
    Train {
        #[arg(long)]
        examples: PathBuf,
        /// Reuse a Gram matrix written by `gram`.
        #[arg(long)]
        gram: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Score and re-rank examples with a trained model.
    Rerank {
        #[arg(long)]
        model: PathBuf,
        /// The examples the model was trained on.
        #[arg(long)]
        train_examples: PathBuf,
        #[arg(long)]
        examples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// MAP, AvgRec and MRR of a predictions file.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        /// Also report the original-rank baseline.
        #[arg(long)]
        baseline: bool,
        #[command(flatten)]
        opts: Opts,
    },
    /// Randomization test on per-query AP of two predictions files.
    Sigtest {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Train on one corpus, re-rank another and write a report.
    Run {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Tk {
    Stk,
    Ptk,
}

#[derive(Clone, Copy, ValueEnum)]
enum Vk {
    Linear,
    Rbf,
}

impl From<Vk> for VectorKernel {
    fn from(v: Vk) -> Self {
        match v {
            Vk::Linear => VectorKernel::Linear,
            Vk::Rbf => VectorKernel::Rbf,
        }
    }
}

/// Overrides applied on top of the configuration file.
#[derive(Args, Clone)]
struct Opts {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Fail instead of warning when a model's kernel fingerprint differs.
    #[arg(long)]
    strict: bool,
    /// Build REL-linked macro-trees.
    #[arg(long)]
    trees: bool,
    #[arg(long)]
    tk: Option<Tk>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rank_kernel: Option<Vk>,
    #[arg(long)]
    no_sim: bool,
    #[arg(long)]
    no_tk: bool,
    #[arg(long)]
    no_rank: bool,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:expr, $opt:expr) => {
                if let Some(v) = $opt {
                    $field = v.into();
                }
            };
        }
        set!(cfg.task, self.task);
        set!(cfg.seed, self.seed);
        set!(cfg.cutoff, self.cutoff.map(Some));
        set!(cfg.resamples, self.resamples);
        set!(cfg.stopwords, self.stopwords.clone().map(Some));
        set!(cfg.embeddings, self.embeddings.clone().map(Some));
        set!(cfg.kernel.lambda, self.lambda);
        set!(cfg.kernel.mu, self.mu);
        set!(cfg.kernel.gamma, self.gamma.map(Some));
        set!(cfg.kernel.rank_kernel, self.rank_kernel);
        set!(cfg.train.c, self.c);
        set!(cfg.train.tol, self.tol);
        if let Some(tk) = self.tk {
            cfg.kernel.tk_kind = match tk {
                Tk::Stk => TkKind::Stk,
                Tk::Ptk => TkKind::Ptk,
            };
        }
        cfg.strict |= self.strict;
        cfg.features.trees |= self.trees;
        cfg.kernel.use_sim &= !self.no_sim;
        cfg.kernel.use_tk &= !self.no_tk;
        cfg.kernel.use_rank &= !self.no_rank;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn example_records(path: &Path) -> Result<(Vec<ExampleRecord>, Vec<Example>)> {
    let recs = read_examples(path)?;
    let ex = recs.iter().map(|r| r.example.clone()).collect();
    Ok((recs, ex))
}

fn print_metrics(name: &str, groups: &[QueryGroup], k: usize) -> Result<()> {
    let m = evaluate(groups, k)?;
    println!("{name}\tMAP {:.2}\tAvgRec {:.2}\tMRR {:.2}\tqueries {}", m.map, m.avg_rec, m.mrr, m.groups);
    Ok(())
}

fn baseline(preds: &[Prediction]) -> Vec<Prediction> {
    preds
        .iter()
        .map(|p| Prediction { score: 1.0 / f64::from(p.original_rank), ..p.clone() })
        .collect()
}

fn ap_by_query(groups: &[QueryGroup], k: usize) -> Result<std::collections::BTreeMap<String, f64>> {
    Ok(per_query_ap(groups, k)?.into_iter().collect())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Featurize { corpus, out, opts } => {
            let cfg = opts.resolve()?;
            let c = load_corpus(&corpus, cfg.task)?;
            let ex = featurize(&c, &cfg)?;
            let recs: Vec<_> = c
                .records
                .iter()
                .zip(ex)
                .map(|(r, example)| ExampleRecord {
                    query_id: r.query_id.clone(),
                    candidate_id: r.candidate_id.clone(),
                    original_rank: r.original_rank,
                    example,
                })
                .collect();
            write_examples(&out, &recs)?;
            log::info!("wrote {} examples to {}", recs.len(), out.display());
        }
        Command::Gram { examples, out, opts } => {
            let cfg = opts.resolve()?;
            let (_, ex) = example_records(&examples)?;
            write_gram(&out, &Prepared::new(&ex, &cfg.kernel)?.gram())?;
        }
        Command::Train { examples, gram, model, opts } => {
            let cfg = opts.resolve()?;
            let (_, ex) = example_records(&examples)?;
            let g = match gram {
                Some(p) => {
                    let g = read_gram(&p)?;
                    let fp = cfg.kernel.fingerprint();
                    if g.fingerprint() != fp {
                        return Err(Error::FingerprintMismatch { model: g.fingerprint().to_string(), current: fp });
                    }
                    if g.len() != ex.len() {
                        return Err(Error::File {
                            path: p,
                            message: format!("{} rows for {} examples", g.len(), ex.len()),
                        });
                    }
                    g
                }
                None => Prepared::new(&ex, &cfg.kernel)?.gram(),
            };
            let m = train_smo(&g, &labels(&ex)?, &cfg.train_config())?;
            log::info!("{} support vectors after {} iterations", m.support_indices.len(), m.iterations);
            write_model(&model, &m, &cfg.kernel)?;
        }
        Command::Rerank { model, train_examples, examples, out, opts } => {
            let cfg = opts.resolve()?;
            let m = read_model(&model, Some(&cfg.kernel), cfg.strict)?;
            let (_, train) = example_records(&train_examples)?;
            let (recs, test) = example_records(&examples)?;
            let scores = Prepared::new(&train, &cfg.kernel)?.score(&m, &test)?;
            let preds: Vec<_> = recs
                .iter()
                .zip(scores)
                .map(|(r, score)| {
                    Ok(Prediction {
                        query_id: r.query_id.clone(),
                        candidate_id: r.candidate_id.clone(),
                        original_rank: u32::try_from(r.original_rank)
                            .map_err(|_| Error::Config(format!("rank {} out of range", r.original_rank)))?,
                        score,
                        relevant: r.example.label.is_some_and(|l| l > 0),
                    })
                })
                .collect::<Result<_>>()?;
            // group order, so files from equal inputs are byte-identical
            write_predictions(&out, &groups_to_predictions(&prediction_groups(&preds)?))?;
        }
        Command::Evaluate { predictions, baseline: with_baseline, opts } => {
            let cfg = opts.resolve()?;
            let preds = read_predictions(&predictions)?;
            let k = cfg.cutoff();
            print_metrics("model", &prediction_groups(&preds)?, k)?;
            if with_baseline {
                let base = prediction_groups(&baseline(&preds))?;
                print_metrics("baseline", &base, k)?;
                let c = compare(&prediction_groups(&preds)?, &base, k, cfg.resamples, cfg.seed)?;
                println!("p-value\t{}", c.p_value);
            }
        }
        Command::Sigtest { a, b, opts } => {
            let cfg = opts.resolve()?;
            let k = cfg.cutoff();
            let ga = ap_by_query(&prediction_groups(&read_predictions(&a)?)?, k)?;
            let gb = ap_by_query(&prediction_groups(&read_predictions(&b)?)?, k)?;
            if ga.keys().ne(gb.keys()) {
                return Err(Error::Config("the predictions files cover different queries".into()));
            }
            let va: Vec<f64> = ga.into_values().collect();
            let vb: Vec<f64> = gb.into_values().collect();
            println!("p-value\t{}", randomization_test(&va, &vb, cfg.resamples, cfg.seed)?);
        }
        Command::Run { train, test, out_dir, opts } => {
            let cfg = opts.resolve()?;
            let tr = load_corpus(&train, cfg.task)?;
            let te = load_corpus(&test, cfg.task)?;
            let r = qrerank::run_experiment(&tr, &te, &cfg, &out_dir)?;
            let c = &r.comparison;
            println!("model\tMAP {:.2}\tAvgRec {:.2}\tMRR {:.2}", c.model.map, c.model.avg_rec, c.model.mrr);
            println!("baseline\tMAP {:.2}\tAvgRec {:.2}\tMRR {:.2}", c.baseline.map, c.baseline.avg_rec, c.baseline.mrr);
            println!("p-value\t{}", c.p_value);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
