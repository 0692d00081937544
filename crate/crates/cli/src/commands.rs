use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use newsgraph::gcn::{evaluate, train};
use newsgraph::pipeline::tuple_rows;
use newsgraph::t2g::{parse_matrix, parse_offsets, write_matrix};
use newsgraph::{
    build_kb, classify_document, parse_conllu, AdamState, Checkpoint, ClassIndex, Document,
    EmbeddingTable, ExtractOptions, FrameRecord, GcnConfig, GcnModel, GraphBatch, KnowledgeBase,
    Metrics, MiscNer, ParseOptions, PooledGraph,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Layer, Settings};
use crate::files;
use crate::{Cli, Command};

pub fn run(cli: Cli) -> Result<()> {
    let file_layer = match &cli.config {
        Some(p) => Layer::from_file(p)?,
        None => Layer::default(),
    };
    let mut flag_layer = match &cli.command {
        Command::Extract { extract, .. } | Command::Graph { extract, .. } => extract.layer(),
        Command::Train { model, .. } => model.layer(),
        Command::Eval { batch_size, .. } => Layer {
            batch_size: *batch_size,
            ..Layer::default()
        },
        Command::Pool { dummy, .. } => Layer {
            dummy: dummy.clone(),
            ..Layer::default()
        },
        Command::Stats { .. } => Layer::default(),
    };
    flag_layer.jobs = cli.jobs;
    let settings = Settings::resolve(file_layer.overlay(flag_layer))?;

    if let Some(n) = settings.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }

    match cli.command {
        Command::Extract {
            input, tuples, out, ..
        } => extract(&settings, &input, tuples, out.as_deref()),
        Command::Graph { input, out_dir, .. } => graph(&settings, &input, &out_dir),
        Command::Pool {
            kb,
            emb,
            offsets,
            out,
            ..
        } => pool(&settings, &kb, &emb, &offsets, out.as_deref()),
        Command::Train {
            graphs,
            features,
            out,
            log,
            ..
        } => train_cmd(&settings, &graphs, &features, &out, log.as_deref()),
        Command::Eval {
            graphs,
            features,
            checkpoint,
            out,
            ..
        } => eval_cmd(&settings, &graphs, &features, &checkpoint, out.as_deref()),
        Command::Stats { dir } => stats(&dir),
    }
}

fn read_corpus(settings: &Settings, path: &Path) -> Result<Vec<Document>> {
    let text = files::read(path)?;
    let scheme = settings.tag_scheme()?;
    let opts = ParseOptions {
        lenient: settings.lenient,
    };
    parse_conllu(&text, &scheme, opts).with_context(|| path.display().to_string())
}

fn extract_options(settings: &Settings) -> ExtractOptions<'static> {
    ExtractOptions {
        rectifier: if settings.ner_from_misc {
            Some(&MiscNer)
        } else {
            None
        },
    }
}

fn extract(settings: &Settings, input: &Path, tuples: bool, out: Option<&Path>) -> Result<()> {
    let docs = read_corpus(settings, input)?;
    let lex = settings.lexicon()?;
    let rendered = docs
        .par_iter()
        .map(|doc| -> Result<String> {
            let opts = extract_options(settings);
            let classified = classify_document(doc, &lex, opts)?;
            let mut text = String::new();
            if !tuples {
                for (frame, ty) in &classified {
                    text.push_str(&FrameRecord::new(&doc.doc_id, frame, *ty).to_json_line());
                }
            } else if !classified.is_empty() {
                for row in tuple_rows(&build_kb(doc, &lex, opts)?) {
                    text.push_str(&row);
                    text.push('\n');
                }
            }
            Ok(text)
        })
        .collect::<Result<Vec<_>>>()?;
    files::emit(out, &rendered.concat())
}

fn graph(settings: &Settings, input: &Path, out_dir: &Path) -> Result<()> {
    let docs = read_corpus(settings, input)?;
    let lex = settings.lexicon()?;
    for doc in &docs {
        files::check_file_stem(&doc.doc_id)?;
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let kbs = docs
        .par_iter()
        .map(|doc| build_kb(doc, &lex, extract_options(settings)))
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| input.display().to_string())?;
    for kb in &kbs {
        files::write_atomic(&out_dir.join(format!("{}.json", kb.doc_id)), &kb.to_json())?;
    }
    eprintln!("wrote {} graph(s) to {}", kbs.len(), out_dir.display());
    Ok(())
}

fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let kb = KnowledgeBase::from_json(&files::read(path)?)
        .with_context(|| path.display().to_string())?;
    kb.validate().with_context(|| path.display().to_string())?;
    Ok(kb)
}

fn load_matrix(path: &Path) -> Result<ndarray::Array2<f64>> {
    parse_matrix(&files::read(path)?).with_context(|| path.display().to_string())
}

fn pool(
    settings: &Settings,
    kb: &Path,
    emb: &Path,
    offsets: &Path,
    out: Option<&Path>,
) -> Result<()> {
    let kb = load_kb(kb)?;
    let rows = load_matrix(emb)?;
    let offsets_map =
        parse_offsets(&files::read(offsets)?).with_context(|| offsets.display().to_string())?;
    let table = EmbeddingTable::new(rows, offsets_map)
        .with_context(|| format!("{} with {}", emb.display(), offsets.display()))?;
    let features = newsgraph::pool_nodes(&kb, &table, settings.dummy)?;
    files::emit(out, &write_matrix(&features))
}

/// Graph files in `graphs` paired with `<stem>.emb` feature files in `features`.
fn load_dataset(
    graphs: &Path,
    features: &Path,
) -> Result<Vec<(KnowledgeBase, ndarray::Array2<f64>)>> {
    let paths = files::list(graphs, "json")?;
    if paths.is_empty() {
        bail!("no graph files (*.json) in {}", graphs.display());
    }
    paths
        .iter()
        .map(|p| {
            let kb = load_kb(p)?;
            let stem = p.file_stem().expect("listed files have names");
            let mut feat_path = features.join(stem);
            feat_path.set_extension("emb");
            let m = load_matrix(&feat_path)?;
            Ok((kb, m))
        })
        .collect()
}

fn to_batches(
    data: Vec<(KnowledgeBase, ndarray::Array2<f64>)>,
    classes: &ClassIndex,
    batch_size: usize,
) -> Result<Vec<GraphBatch>> {
    let graphs = data
        .into_iter()
        .map(|(kb, m)| {
            if kb.label.is_none() {
                bail!("graph `{}` has no label", kb.doc_id);
            }
            PooledGraph::from_features(&kb, m, classes)
                .with_context(|| format!("graph `{}`", kb.doc_id))
        })
        .collect::<Result<Vec<_>>>()?;
    graphs
        .chunks(batch_size)
        .map(|c| GraphBatch::from_graphs(c).map_err(anyhow::Error::from))
        .collect()
}

fn train_cmd(
    settings: &Settings,
    graphs: &Path,
    features: &Path,
    out: &Path,
    log_path: Option<&Path>,
) -> Result<()> {
    let data = load_dataset(graphs, features)?;
    let mut labels = Vec::with_capacity(data.len());
    for (kb, _) in &data {
        match &kb.label {
            Some(l) => labels.push(l.clone()),
            None => bail!("graph `{}` has no label", kb.doc_id),
        }
    }
    let classes = ClassIndex::from_labels(labels.iter().map(String::as_str));
    let input_dim = data[0].1.ncols();
    let batches = to_batches(data, &classes, settings.batch_size)?;

    let config = GcnConfig::new(input_dim, classes.len())
        .with_hidden(settings.hidden)
        .with_layers(settings.layers);
    let mut model = GcnModel::new(config, settings.seed);
    let mut adam = AdamState::new(settings.lr, model.params.tensors().iter().map(|t| t.len()));
    let log = train(
        &mut model,
        &batches,
        settings.epochs,
        &mut adam,
        settings.seed,
    )?;

    if let Some(p) = log_path {
        files::write_atomic(p, &log.to_csv())?;
    }
    let ckpt = Checkpoint {
        model,
        classes: classes.names().to_vec(),
        adam: Some(adam),
    };
    files::write_atomic(out, &ckpt.to_json())?;
    if let Some(last) = log.last() {
        eprintln!(
            "epoch {}: loss {:.6}, accuracy {:.4}",
            last.epoch, last.loss, last.acc
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    graphs: usize,
    #[serde(flatten)]
    metrics: Metrics,
}

fn eval_cmd(
    settings: &Settings,
    graphs: &Path,
    features: &Path,
    checkpoint: &Path,
    out: Option<&Path>,
) -> Result<()> {
    let ckpt = Checkpoint::from_json(&files::read(checkpoint)?)
        .with_context(|| checkpoint.display().to_string())?;
    let classes = ClassIndex::from_labels(ckpt.classes.iter().map(String::as_str));
    if classes.names() != ckpt.classes.as_slice() {
        bail!(
            "{}: class list is not sorted and unique",
            checkpoint.display()
        );
    }
    let data = load_dataset(graphs, features)?;
    let n = data.len();
    let batches = to_batches(data, &classes, settings.batch_size)?;
    let metrics = evaluate(&ckpt.model, &batches)?;
    let mut text = serde_json::to_string_pretty(&EvalReport { graphs: n, metrics })?;
    text.push('\n');
    files::emit(out, &text)
}

#[derive(Serialize)]
struct Stats {
    documents: usize,
    nodes: usize,
    edges: usize,
    clause_types: BTreeMap<String, usize>,
    labels: BTreeMap<String, usize>,
    unlabelled: usize,
}

fn stats(dir: &Path) -> Result<()> {
    let paths: Vec<PathBuf> = files::list(dir, "json")?;
    if paths.is_empty() {
        return Err(anyhow!("no graph files (*.json) in {}", dir.display()));
    }
    let mut s = Stats {
        documents: 0,
        nodes: 0,
        edges: 0,
        clause_types: BTreeMap::new(),
        labels: BTreeMap::new(),
        unlabelled: 0,
    };
    for p in &paths {
        let kb = load_kb(p)?;
        s.documents += 1;
        s.nodes += kb.node_count();
        s.edges += kb.edges.len();
        for c in &kb.clauses {
            *s.clause_types
                .entry(c.clause_type.as_str().to_string())
                .or_default() += 1;
        }
        match kb.label {
            Some(l) => *s.labels.entry(l).or_default() += 1,
            None => s.unlabelled += 1,
        }
    }
    let mut text = serde_json::to_string_pretty(&s)?;
    text.push('\n');
    files::emit(None, &text)
}
