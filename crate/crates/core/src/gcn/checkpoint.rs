use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{AdamState, Dense, GcnConfig, GcnError, GcnModel, GcnParams};

const FORMAT: &str = "newsgraph-gcn";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct DenseRepr {
    rows: usize,
    cols: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl From<&Dense> for DenseRepr {
    fn from(d: &Dense) -> Self {
        DenseRepr {
            rows: d.weight.nrows(),
            cols: d.weight.ncols(),
            weight: d.weight.iter().copied().collect(),
            bias: d.bias.to_vec(),
        }
    }
}

impl DenseRepr {
    fn into_dense(self, expect: (usize, usize)) -> Result<Dense, GcnError> {
        if (self.rows, self.cols) != expect || self.bias.len() != self.cols {
            return Err(GcnError::Checkpoint(format!(
                "layer shape {}x{} (bias {}) does not match config {}x{}",
                self.rows,
                self.cols,
                self.bias.len(),
                expect.0,
                expect.1
            )));
        }
        let weight = Array2::from_shape_vec((self.rows, self.cols), self.weight)
            .map_err(|e| GcnError::Checkpoint(e.to_string()))?;
        Ok(Dense {
            weight,
            bias: Array1::from(self.bias),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    format: String,
    version: u32,
    config: GcnConfig,
    classes: Vec<String>,
    layers: Vec<DenseRepr>,
    classifier: DenseRepr,
    adam: Option<AdamState>,
}

/// A trained model with its class names and optimizer state, stored as JSON
/// with row-major parameter arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: GcnModel,
    pub classes: Vec<String>,
    pub adam: Option<AdamState>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        let repr = Repr {
            format: FORMAT.into(),
            version: VERSION,
            config: self.model.config,
            classes: self.classes.clone(),
            layers: self
                .model
                .params
                .layers
                .iter()
                .map(DenseRepr::from)
                .collect(),
            classifier: (&self.model.params.classifier).into(),
            adam: self.adam.clone(),
        };
        let mut s = serde_json::to_string(&repr).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GcnError> {
        let repr: Repr =
            serde_json::from_str(text).map_err(|e| GcnError::Checkpoint(e.to_string()))?;
        if repr.format != FORMAT || repr.version != VERSION {
            return Err(GcnError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                repr.format, repr.version
            )));
        }
        let shapes = repr.config.shapes();
        if repr.layers.len() + 1 != shapes.len() {
            return Err(GcnError::Checkpoint(format!(
                "{} layers stored, config wants {}",
                repr.layers.len(),
                shapes.len() - 1
            )));
        }
        let layers = repr
            .layers
            .into_iter()
            .zip(&shapes)
            .map(|(d, &s)| d.into_dense(s))
            .collect::<Result<Vec<_>, _>>()?;
        let classifier = repr.classifier.into_dense(shapes[shapes.len() - 1])?;
        let params = GcnParams { layers, classifier };
        if !params.is_finite() {
            return Err(GcnError::NonFinite("checkpoint parameters".into()));
        }
        if let Some(adam) = &repr.adam {
            let lens: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
            let ok = adam.m.iter().map(Vec::len).eq(lens.iter().copied())
                && adam.v.iter().map(Vec::len).eq(lens.iter().copied());
            if !ok {
                return Err(GcnError::Checkpoint(
                    "optimizer state shape mismatch".into(),
                ));
            }
        }
        Ok(Checkpoint {
            model: GcnModel {
                config: repr.config,
                params,
            },
            classes: repr.classes,
            adam: repr.adam,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let model = GcnModel::new(GcnConfig::new(3, 2).with_hidden(4).with_layers(2), 9);
        let lens = model
            .params
            .tensors()
            .iter()
            .map(|t| t.len())
            .collect::<Vec<_>>();
        let mut adam = AdamState::new(1e-3, lens);
        adam.step = 7;
        adam.m[0][1] = 0.125;
        let ck = Checkpoint {
            model,
            classes: vec!["a".into(), "b".into()],
            adam: Some(adam),
        };
        let back = Checkpoint::from_json(&ck.to_json()).unwrap();
        assert_eq!(back, ck);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let ck = Checkpoint {
            model: GcnModel::zeros(GcnConfig::new(3, 2).with_hidden(4).with_layers(1)),
            classes: vec![],
            adam: None,
        };
        let text = ck.to_json().replace("\"input_dim\":3", "\"input_dim\":5");
        assert!(matches!(
            Checkpoint::from_json(&text),
            Err(GcnError::Checkpoint(_))
        ));
        assert!(Checkpoint::from_json("{}").is_err());
    }
}
