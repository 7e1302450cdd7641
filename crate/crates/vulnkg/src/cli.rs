//! Command-line pipeline: ingest → build → split → train → eval → predict,
//! plus graph statistics. One TOML config file (see [`crate::config`])
//! selects sources, paths, and hyperparameters; every report carries the
//! config checksum so results trace back to exact settings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use crate::baseline;
use crate::config::{parse_config, RunConfig};
use crate::eval::{
    predict_report, rank_rows, report_from_rows, EvalDirections, FilterIndex, GnnPredictor,
    MetricsReport, RankRow,
};
use crate::fusion::{EmbeddingCache, EmbeddingProvider, EmbeddingService, FusionContext};
use crate::graph::{
    build_graph, cpe_delay_report, graph_stats, load_graph, missing_cwe_fraction, save_graph,
    split_inductive, split_transductive, BuildOptions, DatasetSplit, KnowledgeGraph, SplitMode,
    Triple,
};
use crate::ingest::{
    cache_documents, fetch_records, parse_cve_record, parse_cwe_catalog, CveRecord, FetchMode,
    Source,
};
use crate::train::{load_checkpoint, save_checkpoint, train, Checkpoint};

#[derive(Parser)]
#[command(
    name = "vulnkg",
    version,
    about = "Vulnerability knowledge graph construction and CVE/CWE/CPE link prediction",
    long_about = "Builds a CVE/CWE/CPE knowledge graph from NVD, Red Hat, and the MITRE CWE \
catalog, trains a two-level graph neural network fused with text-description embeddings, and \
ranks candidate weaknesses and platforms for seen and unseen vulnerabilities.\n\n\
Environment: NVD_API_KEY authenticates live NVD fetching; the remote embedding provider reads \
its bearer token from the variable named by embedding.token_env (default VULNKG_EMBED_TOKEN)."
)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "vulnkg.toml")]
    config: PathBuf,
    /// Force fixture mode: no network access anywhere.
    #[arg(long, global = true)]
    offline: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch raw CVE documents and the CWE catalog into the raw cache.
    Ingest {
        /// Override the configured source (nvd, redhat).
        #[arg(long)]
        source: Option<String>,
        /// Live mode: only records modified on/after this date.
        #[arg(long)]
        since: Option<NaiveDate>,
    },
    /// Parse the raw cache and build the knowledge graph files.
    Build,
    /// Partition the graph into train/valid/test (and the inference extension).
    Split {
        /// transductive or inductive.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        valid_fraction: Option<f64>,
        #[arg(long)]
        test_fraction: Option<f64>,
        #[arg(long)]
        train_cutoff: Option<NaiveDate>,
        #[arg(long)]
        test_cutoff: Option<NaiveDate>,
    },
    /// Train the predictor on the training split; writes checkpoints and a loss log.
    Train,
    /// Rank the valid or test triples and write the metrics report.
    Eval {
        /// Which split part to evaluate (valid, test).
        #[arg(long, default_value = "test")]
        part: String,
        /// Evaluate the translation baseline instead of the GNN (trains it in-process).
        #[arg(long)]
        baseline: bool,
    },
    /// Rank candidate links for one CVE and emit a prediction table.
    Predict {
        #[arg(long)]
        cve: String,
        /// Relation to complete (matchingCVE ranks platforms, matchingCWE weaknesses).
        #[arg(long, default_value = "matchingCVE")]
        relation: String,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Drop candidates already linked in the graph.
        #[arg(long, default_value_t = true)]
        exclude_known: bool,
    },
    /// Print entity/relation/year statistics for the built graph.
    Stats,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut cfg = parse_config(&cli.config)
        .with_context(|| format!("loading config {}", cli.config.display()))?;
    if cli.offline {
        cfg.source.offline = true;
    }
    match cli.command {
        Command::Ingest { source, since } => cmd_ingest(&cfg, source, since),
        Command::Build => cmd_build(&cfg),
        Command::Split {
            mode,
            valid_fraction,
            test_fraction,
            train_cutoff,
            test_cutoff,
        } => {
            let mut cfg = cfg;
            if let Some(m) = mode {
                cfg.split.mode = m;
            }
            if let Some(v) = valid_fraction {
                cfg.split.valid_fraction = v;
            }
            if let Some(t) = test_fraction {
                cfg.split.test_fraction = t;
            }
            if let Some(d) = train_cutoff {
                cfg.split.train_cutoff = d;
            }
            if let Some(d) = test_cutoff {
                cfg.split.test_cutoff = d;
            }
            cfg.validate().map_err(|e| anyhow!(e))?;
            cmd_split(&cfg)
        }
        Command::Train => cmd_train(&cfg),
        Command::Eval { part, baseline } => cmd_eval(&cfg, &part, baseline),
        Command::Predict {
            cve,
            relation,
            top,
            exclude_known,
        } => cmd_predict(&cfg, &cve, &relation, top, exclude_known),
        Command::Stats => cmd_stats(&cfg),
    }
}

fn source_of(cfg: &RunConfig, flag: Option<String>) -> Result<Source> {
    let name = flag.unwrap_or_else(|| cfg.source.name.clone());
    name.parse::<Source>().map_err(|e| anyhow!(e))
}

fn cmd_ingest(cfg: &RunConfig, source_flag: Option<String>, since: Option<NaiveDate>) -> Result<()> {
    let source = source_of(cfg, source_flag)?;
    let since = since.or(cfg.source.since);
    let cache = &cfg.paths.raw_cache;

    let (mode, location) = if cfg.source.offline {
        (FetchMode::Offline, cfg.paths.fixtures.display().to_string())
    } else {
        (
            FetchMode::Live {
                cache_dir: cache.clone(),
            },
            cfg.source
                .url
                .clone()
                .unwrap_or_else(|| source.default_url().to_string()),
        )
    };
    let docs = fetch_records(source, since, &mode, &location)?;
    if cfg.source.offline {
        cache_documents(cache, source, &docs)?;
    }
    println!("{}: cached {} documents", source.name(), docs.len());

    // The CWE catalog rides along with every CVE source.
    let (mode, location) = if cfg.source.offline {
        (FetchMode::Offline, cfg.paths.cwe_catalog.display().to_string())
    } else {
        (
            FetchMode::Live {
                cache_dir: cache.clone(),
            },
            Source::MitreCwe.default_url().to_string(),
        )
    };
    let docs = fetch_records(Source::MitreCwe, None, &mode, &location)?;
    if cfg.source.offline {
        cache_documents(cache, Source::MitreCwe, &docs)?;
    }
    println!("mitre_cwe: cached {} documents", docs.len());
    Ok(())
}

fn load_cached_cves(cfg: &RunConfig, source: Source) -> Result<Vec<CveRecord>> {
    let dir = cfg.paths.raw_cache.join(source.name());
    let docs = fetch_records(source, None, &FetchMode::Offline, &dir.display().to_string())
        .with_context(|| format!("reading raw cache {} (run `ingest` first)", dir.display()))?;
    let mut records = Vec::with_capacity(docs.len());
    for doc in &docs {
        records.push(parse_cve_record(doc, source)?);
    }
    Ok(records)
}

fn cmd_build(cfg: &RunConfig) -> Result<()> {
    let source = source_of(cfg, None)?;
    let cves = load_cached_cves(cfg, source)?;

    let cwe_dir = cfg.paths.raw_cache.join(Source::MitreCwe.name());
    let docs = fetch_records(
        Source::MitreCwe,
        None,
        &FetchMode::Offline,
        &cwe_dir.display().to_string(),
    )
    .with_context(|| "reading cached CWE catalog (run `ingest` first)")?;
    let catalog_doc = docs
        .first()
        .ok_or_else(|| anyhow!("CWE cache is empty"))?;
    let (cwes, dropped) = parse_cwe_catalog(catalog_doc)?;

    let (graph, report) = build_graph(&cves, &cwes, &BuildOptions::default())?;
    save_graph(&graph, &cfg.paths.graph)?;

    let stats = graph_stats(&graph);
    println!(
        "graph: {} entities, {} relation types, {} triples",
        stats.total_entities, stats.relation_types, stats.total_triples
    );
    println!(
        "build: {} CVEs excluded by the association filter, {} unknown CWE refs dropped, {} catalog edges dropped, {} bad CPE uris",
        report.excluded_cves, report.dropped_cwe_refs, dropped, report.bad_cpe_uris
    );
    let missing = missing_cwe_fraction(&cves);
    println!("missing-CWE fraction over the raw corpus: {:.2}%", 100.0 * missing);
    Ok(())
}

fn triples_file(g: &KnowledgeGraph, triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            t.head,
            g.relation(t.relation).name,
            t.tail,
            t.created
        );
    }
    out
}

fn parse_triples_file(g: &KnowledgeGraph, content: &str) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for line in content.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        let [head, rel, tail, date] = fields.as_slice() else {
            bail!("bad split line: {line}");
        };
        out.push(Triple {
            head: head.parse()?,
            relation: g
                .relation_id(rel)
                .ok_or_else(|| anyhow!("unknown relation {rel:?}"))?,
            tail: tail.parse()?,
            created: date.parse()?,
        });
    }
    Ok(out)
}

fn cmd_split(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(&cfg.paths.graph)?;
    let (split, report) = match cfg.split.mode.as_str() {
        "transductive" => split_transductive(
            &g,
            cfg.split.valid_fraction,
            cfg.split.test_fraction,
            cfg.seed(),
        )?,
        _ => split_inductive(
            &g,
            cfg.split.train_cutoff,
            cfg.split.test_cutoff,
            cfg.split.valid_fraction,
            cfg.seed(),
        )?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let dir = &cfg.paths.splits;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("train.tsv"), triples_file(&g, &split.train))?;
    fs::write(dir.join("valid.tsv"), triples_file(&g, &split.valid))?;
    fs::write(dir.join("test.tsv"), triples_file(&g, &split.test))?;
    if let Some(ext) = &split.extension {
        fs::write(dir.join("extension.tsv"), triples_file(&g, ext))?;
    }
    let mut manifest = String::new();
    let _ = writeln!(manifest, "config_checksum\t{}", cfg.checksum);
    let _ = writeln!(manifest, "mode\t{}", cfg.split.mode);
    let _ = writeln!(manifest, "seed\t{}", cfg.seed());
    match split.mode {
        SplitMode::Transductive { .. } => {
            let _ = writeln!(manifest, "valid_fraction\t{}", cfg.split.valid_fraction);
            let _ = writeln!(manifest, "test_fraction\t{}", cfg.split.test_fraction);
        }
        SplitMode::Inductive {
            train_cutoff,
            test_cutoff,
        } => {
            let _ = writeln!(manifest, "train_cutoff\t{train_cutoff}");
            let _ = writeln!(manifest, "test_cutoff\t{test_cutoff}");
        }
    }
    let _ = writeln!(manifest, "train\t{}", split.train.len());
    let _ = writeln!(manifest, "valid\t{}", split.valid.len());
    let _ = writeln!(manifest, "test\t{}", split.test.len());
    if let Some(ext) = &split.extension {
        let _ = writeln!(manifest, "extension\t{}", ext.len());
    }
    fs::write(dir.join("manifest"), manifest)?;
    println!(
        "split ({}): train {}, valid {}, test {}{}",
        cfg.split.mode,
        split.train.len(),
        split.valid.len(),
        split.test.len(),
        split
            .extension
            .as_ref()
            .map(|e| format!(", extension {}", e.len()))
            .unwrap_or_default()
    );
    Ok(())
}

fn load_split(cfg: &RunConfig, g: &KnowledgeGraph) -> Result<DatasetSplit> {
    let dir = &cfg.paths.splits;
    let read = |name: &str| -> Result<Vec<Triple>> {
        let p = dir.join(name);
        if !p.exists() {
            return Ok(Vec::new());
        }
        parse_triples_file(g, &fs::read_to_string(&p)?)
    };
    let manifest = fs::read_to_string(dir.join("manifest"))
        .with_context(|| format!("reading split manifest in {} (run `split` first)", dir.display()))?;
    let mode_line = manifest
        .lines()
        .find_map(|l| l.strip_prefix("mode\t"))
        .ok_or_else(|| anyhow!("split manifest missing mode"))?;
    let mode = match mode_line {
        "transductive" => SplitMode::Transductive { seed: cfg.seed() },
        _ => SplitMode::Inductive {
            train_cutoff: cfg.split.train_cutoff,
            test_cutoff: cfg.split.test_cutoff,
        },
    };
    let extension = if dir.join("extension.tsv").exists() {
        Some(read("extension.tsv")?)
    } else {
        None
    };
    Ok(DatasetSplit {
        mode,
        train: read("train.tsv")?,
        valid: read("valid.tsv")?,
        test: read("test.tsv")?,
        extension,
    })
}

fn embedding_service(cfg: &RunConfig) -> Result<EmbeddingService> {
    let cache = if let Some(parent) = cfg.paths.embedding_cache.parent() {
        fs::create_dir_all(parent)?;
        EmbeddingCache::open(&cfg.paths.embedding_cache)?
    } else {
        EmbeddingCache::in_memory()
    };
    let provider = match cfg.embedding.provider.as_str() {
        "remote" if !cfg.source.offline => EmbeddingProvider::Remote {
            url: cfg.embedding.url.clone(),
            model: cfg.embedding.model.clone(),
            token_env: cfg.embedding.token_env.clone(),
        },
        _ => EmbeddingProvider::LocalFallback,
    };
    Ok(EmbeddingService::new(provider, cache))
}

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(&cfg.paths.graph)?;
    let split = load_split(cfg, &g)?;
    let g_train = g.with_triples(&split.train)?;

    let train_cfg = cfg.train_config();
    let mut service = embedding_service(cfg)?;
    let outcome = train(
        &g_train,
        &split.valid,
        cfg.model_config(),
        &train_cfg,
        Some(&mut service),
    )?;

    fs::create_dir_all(&cfg.paths.checkpoints)?;
    let final_ckpt = Checkpoint::from_params(
        "gnn",
        &outcome.params,
        &train_cfg,
        &g_train,
        train_cfg.epochs,
        &outcome.epoch_losses,
    );
    save_checkpoint(&final_ckpt, &cfg.paths.checkpoints.join("model.ckpt"))?;
    if let Some(best) = &outcome.best_params {
        let best_ckpt = Checkpoint::from_params(
            "gnn",
            best,
            &train_cfg,
            &g_train,
            train_cfg.epochs,
            &outcome.epoch_losses,
        );
        save_checkpoint(&best_ckpt, &cfg.paths.checkpoints.join("best.ckpt"))?;
    }

    let mut log = String::new();
    let _ = writeln!(log, "# config_checksum\t{}", cfg.checksum);
    let _ = writeln!(log, "epoch\tmean_loss");
    for (i, loss) in outcome.epoch_losses.iter().enumerate() {
        let _ = writeln!(log, "{i}\t{loss:.12}");
    }
    fs::create_dir_all(&cfg.paths.reports)?;
    fs::write(cfg.paths.reports.join("train_loss.tsv"), log)?;

    println!(
        "trained {} epochs; final mean loss {:.6}{}",
        outcome.epoch_losses.len(),
        outcome.epoch_losses.last().copied().unwrap_or(f64::NAN),
        outcome
            .best_valid_mrr
            .map(|m| format!("; best validation MRR {m:.4}"))
            .unwrap_or_default()
    );
    Ok(())
}

fn ranking_graph(g: &KnowledgeGraph, split: &DatasetSplit, augment: bool) -> Result<KnowledgeGraph> {
    let triples = match split.mode {
        SplitMode::Transductive { .. } => split.train.clone(),
        SplitMode::Inductive { .. } => split.inference_triples(),
    };
    let base = g.with_triples(&triples)?;
    Ok(if augment { base.augment_inverses()? } else { base })
}

fn directions_of(cfg: &RunConfig) -> EvalDirections {
    if cfg.eval.directions == "tails-only" {
        EvalDirections::TailsOnly
    } else {
        EvalDirections::Both
    }
}

fn write_metrics_report(
    path: &Path,
    cfg: &RunConfig,
    rows: &[RankRow],
    report: &MetricsReport,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# config_checksum\t{}", cfg.checksum);
    let _ = writeln!(out, "query\ttask\trank\ttruth");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.query_label, r.task, r.rank, r.truth_label
        );
    }
    let _ = writeln!(out, "# summary\ttask\tmrr\thits@1\thits@3\thits@10\tqueries");
    for (task, m) in &report.per_task {
        let _ = writeln!(
            out,
            "# summary\t{task}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            m.mrr, m.hits[&1], m.hits[&3], m.hits[&10], m.query_count
        );
    }
    let m = &report.overall;
    let _ = writeln!(
        out,
        "# summary\tall\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
        m.mrr, m.hits[&1], m.hits[&3], m.hits[&10], m.query_count
    );
    fs::write(path, out)?;
    Ok(())
}

fn cmd_eval(cfg: &RunConfig, part: &str, use_baseline: bool) -> Result<()> {
    let g = load_graph(&cfg.paths.graph)?;
    let split = load_split(cfg, &g)?;
    let eval_triples = match part {
        "valid" => split.valid.clone(),
        "test" => split.test.clone(),
        other => bail!("unknown split part {other:?} (expected valid or test)"),
    };
    if eval_triples.is_empty() {
        bail!("split part {part:?} is empty");
    }
    let directions = directions_of(cfg);

    let (rows, report) = if use_baseline {
        let rank_g = ranking_graph(&g, &split, false)?;
        let filter = FilterIndex::from_split(&rank_g, &split);
        let g_train = g.with_triples(&split.train)?;
        let params = baseline::transe_train(
            &g_train,
            &split.mode,
            &baseline::TransEConfig {
                seed: cfg.seed(),
                ..baseline::TransEConfig::default()
            },
        )?;
        let scorer = baseline::TransEScorer {
            params: &params,
            graph: &rank_g,
        };
        let rows = rank_rows(
            &scorer,
            &eval_triples,
            &filter,
            EvalDirections::TailsOnly,
            cfg.eval.filtered,
        )?;
        let report = report_from_rows(&rows, cfg.eval.filtered, EvalDirections::TailsOnly)?;
        (rows, report)
    } else {
        let train_cfg = cfg.train_config();
        let rank_g = ranking_graph(&g, &split, train_cfg.augment_inverses)?;
        let filter = FilterIndex::from_split(&rank_g, &split);
        let ckpt_path = if cfg.paths.checkpoints.join("best.ckpt").exists() {
            cfg.paths.checkpoints.join("best.ckpt")
        } else {
            cfg.paths.checkpoints.join("model.ckpt")
        };
        let ckpt = load_checkpoint(&ckpt_path, None, false)?;
        let params = ckpt.to_params()?;
        let fusion = if ckpt.model_config.fusion_enabled {
            let mut service = embedding_service(cfg)?;
            Some(FusionContext::build(&rank_g, &mut service)?)
        } else {
            None
        };
        let predictor = GnnPredictor::new(&params, &rank_g, fusion);
        let rows = rank_rows(&predictor, &eval_triples, &filter, directions, cfg.eval.filtered)?;
        let report = report_from_rows(&rows, cfg.eval.filtered, directions)?;
        (rows, report)
    };

    fs::create_dir_all(&cfg.paths.reports)?;
    let name = if use_baseline {
        format!("eval_{part}_baseline.tsv")
    } else {
        format!("eval_{part}.tsv")
    };
    write_metrics_report(&cfg.paths.reports.join(&name), cfg, &rows, &report)?;

    println!("{part} metrics ({} queries):", report.overall.query_count);
    for (task, m) in &report.per_task {
        println!(
            "  {task}: MRR {:.4}  Hits@1 {:.4}  Hits@3 {:.4}  Hits@10 {:.4}  ({} queries)",
            m.mrr, m.hits[&1], m.hits[&3], m.hits[&10], m.query_count
        );
    }
    let m = &report.overall;
    println!(
        "  all: MRR {:.4}  Hits@1 {:.4}  Hits@3 {:.4}  Hits@10 {:.4}",
        m.mrr, m.hits[&1], m.hits[&3], m.hits[&10]
    );
    Ok(())
}

fn cmd_predict(
    cfg: &RunConfig,
    cve: &str,
    relation: &str,
    top: usize,
    exclude_known: bool,
) -> Result<()> {
    let g = load_graph(&cfg.paths.graph)?;
    let train_cfg = cfg.train_config();
    let rank_g = if train_cfg.augment_inverses {
        g.augment_inverses()?
    } else {
        g
    };
    let ckpt_path = if cfg.paths.checkpoints.join("best.ckpt").exists() {
        cfg.paths.checkpoints.join("best.ckpt")
    } else {
        cfg.paths.checkpoints.join("model.ckpt")
    };
    let ckpt = load_checkpoint(&ckpt_path, None, false)?;
    let params = ckpt.to_params()?;
    let fusion = if ckpt.model_config.fusion_enabled {
        let mut service = embedding_service(cfg)?;
        Some(FusionContext::build(&rank_g, &mut service)?)
    } else {
        None
    };
    let predictor = GnnPredictor::new(&params, &rank_g, fusion);
    let rows = predict_report(&predictor, cve, relation, top, exclude_known)?;

    println!("rank\tcandidate\tscore");
    for r in &rows {
        println!("{}\t{}\t{:.6}", r.rank, r.label, r.score);
    }

    fs::create_dir_all(&cfg.paths.reports)?;
    let stem = format!("predict_{}_{}", cve.replace(':', "_"), relation);
    let mut tsv = String::new();
    let _ = writeln!(tsv, "# config_checksum\t{}", cfg.checksum);
    let _ = writeln!(tsv, "rank\tcandidate\tscore");
    let mut jsonl = String::new();
    for r in &rows {
        let _ = writeln!(tsv, "{}\t{}\t{:.12}", r.rank, r.label, r.score);
        let record = serde_json::json!({
            "rank": r.rank,
            "label": r.label,
            "score": r.score,
            "query": { "cve": cve, "relation": relation },
        });
        let _ = writeln!(jsonl, "{record}");
    }
    fs::write(cfg.paths.reports.join(format!("{stem}.tsv")), tsv)?;
    fs::write(cfg.paths.reports.join(format!("{stem}.jsonl")), jsonl)?;
    Ok(())
}

fn cmd_stats(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(&cfg.paths.graph)?;
    let stats = graph_stats(&g);
    println!("entities: {}", stats.total_entities);
    for (kind, n) in &stats.entities_per_kind {
        println!("  {}\t{n}", kind.name());
    }
    println!("relation types: {}", stats.relation_types);
    println!("triples: {}", stats.total_triples);
    for (rel, n) in &stats.triples_per_relation {
        println!("  {rel}\t{n}");
    }
    println!("triples per year:");
    for (year, n) in &stats.triples_per_year {
        println!("  {year}\t{n}");
    }

    // Delay and missing-CWE analyses need raw records; run them when the
    // cache is present.
    if let Ok(source) = source_of(cfg, None) {
        if let Ok(cves) = load_cached_cves(cfg, source) {
            let windows = [1, 7, 30, 180];
            let delay = cpe_delay_report(&cves, &windows);
            println!("CVEs gaining a new platform after N days (per publication year):");
            println!("  year\ttotal\t1d\t7d\t30d\t180d");
            for (year, (total, pcts)) in &delay.per_year {
                println!(
                    "  {year}\t{total}\t{:.2}%\t{:.2}%\t{:.2}%\t{:.2}%",
                    pcts[0], pcts[1], pcts[2], pcts[3]
                );
            }
            println!(
                "missing-CWE fraction: {:.2}%",
                100.0 * missing_cwe_fraction(&cves)
            );
        }
    }
    Ok(())
}
