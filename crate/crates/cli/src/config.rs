use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use newsgraph::{DummyPolicy, TagScheme, VerbLexicon};
use serde::Deserialize;

/// Every setting that may come from a flag or from the TOML config file.
/// `None` means "not given at this layer".
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Layer {
    pub scheme: Option<String>,
    pub linking_lexicon: Option<PathBuf>,
    pub lenient: Option<bool>,
    pub ner_from_misc: Option<bool>,
    pub hidden: Option<usize>,
    pub layers: Option<usize>,
    pub lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub dummy: Option<String>,
    pub jobs: Option<usize>,
}

impl Layer {
    /// Reads a TOML config file. Relative paths inside it resolve against the
    /// file's own directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut layer: Layer =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = &layer.linking_lexicon {
            layer.linking_lexicon = Some(base.join(p));
        }
        if let Some(s) = &layer.scheme {
            if s.ends_with(".json") {
                layer.scheme = Some(base.join(s).to_string_lossy().into_owned());
            }
        }
        Ok(layer)
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(self, top: Layer) -> Layer {
        Layer {
            scheme: top.scheme.or(self.scheme),
            linking_lexicon: top.linking_lexicon.or(self.linking_lexicon),
            lenient: top.lenient.or(self.lenient),
            ner_from_misc: top.ner_from_misc.or(self.ner_from_misc),
            hidden: top.hidden.or(self.hidden),
            layers: top.layers.or(self.layers),
            lr: top.lr.or(self.lr),
            batch_size: top.batch_size.or(self.batch_size),
            epochs: top.epochs.or(self.epochs),
            seed: top.seed.or(self.seed),
            dummy: top.dummy.or(self.dummy),
            jobs: top.jobs.or(self.jobs),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub scheme: String,
    pub linking_lexicon: Option<PathBuf>,
    pub lenient: bool,
    pub ner_from_misc: bool,
    pub hidden: usize,
    pub layers: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub dummy: DummyPolicy,
    pub jobs: Option<usize>,
}

impl Settings {
    pub const DEFAULT_SEED: u64 = 42;
    pub const DEFAULT_EPOCHS: usize = 20;
    pub const DEFAULT_BATCH: usize = 16;

    pub fn resolve(layer: Layer) -> Result<Self> {
        let positive = |name: &str, v: Option<usize>, default: usize| -> Result<usize> {
            match v {
                Some(0) => bail!("{name} must be positive"),
                Some(v) => Ok(v),
                None => Ok(default),
            }
        };
        let lr = layer.lr.unwrap_or(newsgraph::AdamState::DEFAULT_LR);
        if !lr.is_finite() || lr < 0.0 {
            bail!("lr must be a finite non-negative number, got {lr}");
        }
        let dummy = match layer.dummy.as_deref() {
            Some(s) => s.parse().map_err(anyhow::Error::msg)?,
            None => DummyPolicy::Zero,
        };
        Ok(Settings {
            scheme: layer.scheme.unwrap_or_else(|| "spacy".into()),
            linking_lexicon: layer.linking_lexicon,
            lenient: layer.lenient.unwrap_or(false),
            ner_from_misc: layer.ner_from_misc.unwrap_or(false),
            hidden: positive("hidden", layer.hidden, newsgraph::GcnConfig::DEFAULT_HIDDEN)?,
            layers: positive("layers", layer.layers, newsgraph::GcnConfig::DEFAULT_LAYERS)?,
            lr,
            batch_size: positive("batch-size", layer.batch_size, Self::DEFAULT_BATCH)?,
            epochs: positive("epochs", layer.epochs, Self::DEFAULT_EPOCHS)?,
            seed: layer.seed.unwrap_or(Self::DEFAULT_SEED),
            dummy,
            jobs: match layer.jobs {
                Some(0) => bail!("jobs must be positive"),
                j => j,
            },
        })
    }

    pub fn tag_scheme(&self) -> Result<TagScheme> {
        Ok(TagScheme::load(&self.scheme)?)
    }

    pub fn lexicon(&self) -> Result<VerbLexicon> {
        match &self.linking_lexicon {
            Some(p) => Ok(VerbLexicon::from_file(p)?),
            None => Ok(VerbLexicon::builtin()),
        }
    }
}
