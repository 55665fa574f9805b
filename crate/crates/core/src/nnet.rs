//! Neural network architectures and their implementation as parametrised
//! functions.
//!
//! A layer `n → m` is a set `C ⊆ {1..m} × {1..n}` of connections `(j, i)`,
//! read "input `i` feeds output `j`". The layer function is
//!
//! ```text
//! I(w, b, x)ⱼ = σ( Σ_{(j,i) ∈ C} wⱼᵢ xᵢ + bⱼ )
//! ```
//!
//! with parameters laid out as the weights in lexicographic `(j, i)` order
//! followed by the `m` biases. A network's parameters are its layers'
//! parameters concatenated first layer first.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::para::{compose_para, identity_para, ParamFn};

type Scalar = dyn Fn(f64) -> f64 + Send + Sync;

/// A differentiable scalar function applied coordinatewise.
#[derive(Clone)]
pub struct Activation {
    name: String,
    value: Arc<Scalar>,
    derivative: Arc<Scalar>,
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Activation({})", self.name)
    }
}

pub const ACTIVATION_NAMES: [&str; 3] = ["identity", "sigmoid", "tanh"];

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Activation {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Activation {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }
}

pub fn builtin_activation(name: &str) -> Result<Activation> {
    match name {
        "identity" => Ok(Activation::new("identity", |x| x, |_| 1.0)),
        "sigmoid" => Ok(Activation::new("sigmoid", sigmoid, |x| {
            let s = sigmoid(x);
            s * (1.0 - s)
        })),
        "tanh" => Ok(Activation::new("tanh", f64::tanh, |x| {
            let t = x.tanh();
            1.0 - t * t
        })),
        _ => Err(Error::UnknownName {
            kind: "activation",
            name: name.to_string(),
            valid: ACTIVATION_NAMES.to_vec(),
        }),
    }
}

/// One layer: widths and connections `(j, i)`, 1-indexed, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    n_in: usize,
    n_out: usize,
    connections: Vec<(usize, usize)>,
}

impl Layer {
    pub fn new(n_in: usize, n_out: usize, connections: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(j, i) in connections {
            if j == 0 || j > n_out || i == 0 || i > n_in {
                return Err(Error::InvalidArgument(format!(
                    "connection ({j}, {i}) outside layer {n_in} -> {n_out} (1-indexed, output first)"
                )));
            }
            if !seen.insert((j, i)) {
                return Err(Error::InvalidArgument(format!("duplicate connection ({j}, {i})")));
            }
        }
        Ok(Layer {
            n_in,
            n_out,
            connections: seen.into_iter().collect(),
        })
    }

    /// Every input connected to every output.
    pub fn dense(n_in: usize, n_out: usize) -> Self {
        let connections = (1..=n_out)
            .flat_map(|j| (1..=n_in).map(move |i| (j, i)))
            .collect();
        Layer {
            n_in,
            n_out,
            connections,
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn connections(&self) -> &[(usize, usize)] {
        &self.connections
    }

    pub fn param_count(&self) -> usize {
        self.connections.len() + self.n_out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    width_in: usize,
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(width_in: usize, layers: Vec<Layer>) -> Result<Self> {
        let mut width = width_in;
        for (k, layer) in layers.iter().enumerate() {
            if layer.n_in != width {
                return Err(Error::DimensionMismatch {
                    context: format!("layer {k} input"),
                    expected: width,
                    found: layer.n_in,
                });
            }
            width = layer.n_out;
        }
        Ok(Network { width_in, layers })
    }

    pub fn width_in(&self) -> usize {
        self.width_in
    }

    pub fn width_out(&self) -> usize {
        self.layers.last().map_or(self.width_in, Layer::n_out)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn from_json_str(text: &str) -> Result<(Network, Option<String>)> {
        let file: NetworkFile = serde_json::from_str(text)?;
        let mut width = file.width_in;
        let mut layers = Vec::with_capacity(file.layers.len());
        for spec in &file.layers {
            let layer = Layer::new(width, spec.n_out, &spec.connections)?;
            width = spec.n_out;
            layers.push(layer);
        }
        Ok((Network::new(file.width_in, layers)?, file.activation))
    }

    pub fn from_json_file(path: &Path) -> Result<(Network, Option<String>)> {
        let text = std::fs::read_to_string(path)?;
        Network::from_json_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self, activation: Option<&str>) -> Result<String> {
        let file = NetworkFile {
            width_in: self.width_in,
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    n_out: l.n_out,
                    connections: l.connections.clone(),
                })
                .collect(),
            activation: activation.map(str::to_string),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    width_in: usize,
    layers: Vec<LayerFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    n_out: usize,
    connections: Vec<(usize, usize)>,
}

/// `N₁ ++ N₂`: the layers of `first` followed by those of `second`.
pub fn concat_networks(first: &Network, second: &Network) -> Result<Network> {
    let layers = first.layers.iter().chain(&second.layers).cloned().collect();
    if first.width_out() != second.width_in {
        return Err(Error::DimensionMismatch {
            context: "concatenated network joint".into(),
            expected: first.width_out(),
            found: second.width_in,
        });
    }
    Network::new(first.width_in, layers)
}

pub fn layer_param_fn(layer: &Layer, act: &Activation) -> ParamFn {
    let (n, m) = (layer.n_in, layer.n_out);
    let conn: Arc<[(usize, usize)]> = layer.connections.iter().map(|&(j, i)| (j - 1, i - 1)).collect();
    let k = conn.len();
    let act = act.clone();
    let label = format!("{}[{n}->{m}]", act.name());

    let preact = {
        let conn = conn.clone();
        move |p: &[f64], x: &[f64]| {
            let mut z = p[k..].to_vec();
            for (c, &(j, i)) in conn.iter().enumerate() {
                z[j] += p[c] * x[i];
            }
            z
        }
    };
    let forward = {
        let preact = preact.clone();
        let act = act.clone();
        move |p: &[f64], x: &[f64]| preact(p, x).into_iter().map(|z| act.value(z)).collect()
    };
    ParamFn::from_vjp(layer.param_count(), n, m, label, forward, move |p, x| {
        let z = preact(p, x);
        let out = z.iter().map(|&zj| act.value(zj)).collect();
        let slope: Vec<f64> = z.iter().map(|&zj| act.derivative(zj)).collect();
        let (p, x, conn) = (p.to_vec(), x.to_vec(), conn.clone());
        let back = move |w: &[f64]| {
            let delta: Vec<f64> = w.iter().zip(&slope).map(|(wj, sj)| wj * sj).collect();
            let mut gp = vec![0.0; k + m];
            let mut gx = vec![0.0; n];
            for (c, &(j, i)) in conn.iter().enumerate() {
                gp[c] = delta[j] * x[i];
                gx[i] += p[c] * delta[j];
            }
            gp[k..].copy_from_slice(&delta);
            (gp, gx)
        };
        (out, Box::new(back) as crate::para::Backward)
    })
}

/// The composite of the layer functions, first layer first. An empty
/// network is the identity on its input width.
pub fn implement_network(net: &Network, act: &Activation) -> ParamFn {
    let mut layers = net.layers.iter().map(|l| layer_param_fn(l, act));
    let Some(first) = layers.next() else {
        return identity_para(net.width_in);
    };
    layers.fold(first, |acc, next| {
        compose_para(&acc, &next).expect("network widths were checked on construction")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{sample_vec, Rng, FD_STEP};
    use crate::para::pullback_error;
    use proptest::prelude::*;

    fn sig() -> Activation {
        builtin_activation("sigmoid").unwrap()
    }

    #[test]
    fn single_connection_layer() {
        let l = Layer::new(1, 1, &[(1, 1)]).unwrap();
        let f = layer_param_fn(&l, &sig());
        assert_eq!(f.param_dim(), 2);
        assert_eq!(f.forward(&[0.0, 0.0], &[5.0]), vec![0.5]);
    }

    #[test]
    fn two_layer_dense_network() {
        let net = Network::new(2, vec![Layer::dense(2, 3), Layer::dense(3, 1)]).unwrap();
        assert_eq!(net.param_count(), 13);
        let f = implement_network(&net, &sig());
        assert_eq!(f.param_dim(), 13);
        assert_eq!((f.in_dim(), f.out_dim()), (2, 1));
    }

    #[test]
    fn empty_network_is_identity() {
        let net = Network::new(3, vec![]).unwrap();
        let f = implement_network(&net, &sig());
        assert_eq!(f.param_dim(), 0);
        assert_eq!(f.forward(&[], &[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn invalid_architectures() {
        assert!(Layer::new(2, 2, &[(3, 1)]).is_err());
        assert!(Layer::new(2, 2, &[(1, 0)]).is_err());
        assert!(Layer::new(2, 2, &[(1, 1), (1, 1)]).is_err());
        assert!(Network::new(2, vec![Layer::dense(3, 1)]).is_err());
        let a = Network::new(2, vec![Layer::dense(2, 3)]).unwrap();
        let b = Network::new(2, vec![Layer::dense(2, 1)]).unwrap();
        assert!(concat_networks(&a, &b).is_err());
    }

    #[test]
    fn connections_are_sorted_lexicographically() {
        let l = Layer::new(2, 2, &[(2, 1), (1, 2), (1, 1)]).unwrap();
        assert_eq!(l.connections(), &[(1, 1), (1, 2), (2, 1)]);
        // p = [w11, w12, w21, b1, b2]; identity activation keeps it readable
        let f = layer_param_fn(&l, &builtin_activation("identity").unwrap());
        let out = f.forward(&[1.0, 10.0, 100.0, 0.5, 0.25], &[1.0, 2.0]);
        assert_eq!(out, vec![21.5, 100.25]);
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"width_in":2,"layers":[{"n_out":2,"connections":[[1,1],[1,2],[2,1]]},{"n_out":1,"connections":[[1,1],[1,2]]}],"activation":"tanh"}"#;
        let (net, act) = Network::from_json_str(text).unwrap();
        assert_eq!(act.as_deref(), Some("tanh"));
        assert_eq!(net.param_count(), 3 + 2 + 2 + 1);
        let again = net.to_json_string(act.as_deref()).unwrap();
        assert_eq!(Network::from_json_str(&again).unwrap().0, net);
        assert!(Network::from_json_str(r#"{"width_in":1,"layers":[{"n_out":1,"connections":[[2,1]]}]}"#).is_err());
        assert!(Network::from_json_str("{").is_err());
    }

    #[test]
    fn unknown_activation_lists_choices() {
        let msg = builtin_activation("relu").unwrap_err().to_string();
        assert!(msg.contains("sigmoid") && msg.contains("relu"), "{msg}");
    }

    fn arb_layer(n_in: usize) -> impl Strategy<Value = Layer> {
        (1usize..4).prop_flat_map(move |m| {
            prop::collection::vec(any::<bool>(), n_in * m).prop_map(move |mask| {
                let conn: Vec<(usize, usize)> = mask
                    .iter()
                    .enumerate()
                    .filter(|(_, on)| **on)
                    .map(|(c, _)| (c / n_in + 1, c % n_in + 1))
                    .collect();
                Layer::new(n_in, m, &conn).unwrap()
            })
        })
    }

    fn arb_network() -> impl Strategy<Value = Network> {
        (1usize..4, 0usize..4).prop_flat_map(|(w, depth)| {
            let mut strat: BoxedStrategy<Vec<Layer>> = Just(Vec::new()).boxed();
            for _ in 0..depth {
                strat = strat
                    .prop_flat_map(move |layers: Vec<Layer>| {
                        let width = layers.last().map_or(w, Layer::n_out);
                        arb_layer(width).prop_map(move |l| {
                            let mut v = layers.clone();
                            v.push(l);
                            v
                        })
                    })
                    .boxed();
            }
            strat.prop_map(move |layers| Network::new(w, layers).unwrap())
        })
    }

    proptest! {
        #[test]
        fn parameter_count_is_connections_plus_biases(net in arb_network()) {
            let expected: usize = net.layers().iter().map(|l| l.connections().len() + l.n_out()).sum();
            let f = implement_network(&net, &sig());
            prop_assert_eq!(f.param_dim(), expected);
            prop_assert_eq!(f.in_dim(), net.width_in());
            prop_assert_eq!(f.out_dim(), net.width_out());
        }

        #[test]
        fn network_pullback_matches_finite_differences(net in arb_network(), seed in any::<u64>()) {
            let f = implement_network(&net, &sig());
            let mut rng = Rng::new(seed);
            let p = sample_vec(&mut rng, f.param_dim(), -1.0, 1.0);
            let a = sample_vec(&mut rng, f.in_dim(), -1.0, 1.0);
            let w = sample_vec(&mut rng, f.out_dim(), -1.0, 1.0);
            let err = pullback_error(&f, &p, &a, &w, FD_STEP).unwrap();
            prop_assert!(err <= 1e-5, "relative error {}", err);
        }

        #[test]
        fn concatenation_composes(a in arb_network(), seed in any::<u64>()) {
            let b = Network::new(a.width_out(), vec![Layer::dense(a.width_out(), 2)]).unwrap();
            let ab = concat_networks(&a, &b).unwrap();
            let whole = implement_network(&ab, &sig());
            let parts = compose_para(&implement_network(&a, &sig()), &implement_network(&b, &sig())).unwrap();
            let mut rng = Rng::new(seed);
            let p = sample_vec(&mut rng, whole.param_dim(), -1.0, 1.0);
            let x = sample_vec(&mut rng, whole.in_dim(), -1.0, 1.0);
            prop_assert_eq!(whole.forward(&p, &x), parts.forward(&p, &x));
        }
    }
}
