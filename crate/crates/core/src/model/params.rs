use crate::error::{Result, TdamError};
use crate::numerics::Tensor;

/// Structural sizes of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    /// Hidden size `n` of a bidirectional state (each direction holds `n / 2`).
    pub hidden: usize,
    /// Number of global topic vectors `K`.
    pub topics: usize,
    /// Word embedding size `d`.
    pub embedding: usize,
    pub vocab: usize,
    pub sentiment_classes: usize,
    pub domain_classes: usize,
}

impl ModelDims {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || !self.hidden.is_multiple_of(2) {
            return Err(TdamError::invalid(format!(
                "hidden size must be a positive even number, got {}",
                self.hidden
            )));
        }
        for (name, v) in [
            ("topics", self.topics),
            ("embedding", self.embedding),
            ("vocab", self.vocab),
            ("sentiment_classes", self.sentiment_classes),
            ("domain_classes", self.domain_classes),
        ] {
            if v == 0 {
                return Err(TdamError::invalid(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn half(&self) -> usize {
        self.hidden / 2
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Generates structural traversal helpers for a parameter tree node.
/// Leaves are visited before children, each in declaration order.
macro_rules! param_tree {
    ($ty:ident { leaves: [$($leaf:ident),*], children: [$($child:ident),*] }) => {
        impl<T> $ty<T> {
            pub fn try_map<U, E>(
                &self,
                prefix: &str,
                f: &mut dyn FnMut(&str, &T) -> std::result::Result<U, E>,
            ) -> std::result::Result<$ty<U>, E> {
                Ok($ty {
                    $($leaf: f(&join(prefix, stringify!($leaf)), &self.$leaf)?,)*
                    $($child: self.$child.try_map(&join(prefix, stringify!($child)), f)?,)*
                })
            }

            pub fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(&str, &'a T)) {
                $(f(&join(prefix, stringify!($leaf)), &self.$leaf);)*
                $(self.$child.visit(&join(prefix, stringify!($child)), f);)*
            }

            pub fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut T>) {
                $(out.push(&mut self.$leaf);)*
                $(self.$child.collect_mut(out);)*
            }
        }
    };
}

/// Gate matrices of one direction of a topical GRU (`W` input, `U` recurrent,
/// `V` topic) plus one bias per gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Gru<T> {
    pub w_r: T,
    pub u_r: T,
    pub v_r: T,
    pub b_r: T,
    pub w_z: T,
    pub u_z: T,
    pub v_z: T,
    pub b_z: T,
    pub w_h: T,
    pub u_h: T,
    pub v_h: T,
    pub b_h: T,
}
param_tree!(Gru { leaves: [w_r, u_r, v_r, b_r, w_z, u_z, v_z, b_z, w_h, u_h, v_h, b_h], children: [] });

/// One level (word or sentence) of the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Level<T> {
    /// `n×n` topic-attention projection (`W_w` at word level, `W_s` at sentence level).
    pub topic_proj: T,
    pub topic_bias: T,
    pub forward: Gru<T>,
    pub backward: Gru<T>,
    /// `n×n` final-attention projection `W_v`.
    pub attn_proj: T,
    pub attn_bias: T,
    /// Final-attention context vector (`v_w` / `v_s`).
    pub context: T,
}
param_tree!(Level { leaves: [topic_proj, topic_bias, attn_proj, attn_bias, context], children: [forward, backward] });

#[derive(Debug, Clone, PartialEq)]
pub struct Head<T> {
    pub weight: T,
    pub bias: T,
}
param_tree!(Head { leaves: [weight, bias], children: [] });

/// Every learnable tensor except the word embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    /// Global topic embedding `E`, one row per topic.
    pub topics: T,
    pub word: Level<T>,
    pub sentence: Level<T>,
    pub sentiment: Head<T>,
    pub domain: Head<T>,
}
param_tree!(Network { leaves: [topics], children: [word, sentence, sentiment, domain] });

impl<T> Network<T> {
    pub fn leaves_mut(&mut self) -> Vec<&mut T> {
        let mut out = Vec::new();
        self.collect_mut(&mut out);
        out
    }

    pub fn leaves(&self) -> Vec<(String, &T)> {
        let mut out = Vec::new();
        self.visit("", &mut |name, t| out.push((name.to_string(), t)));
        out
    }
}

/// Shapes of every network tensor for the given dimensions.
pub fn network_shapes(dims: &ModelDims) -> Network<Vec<usize>> {
    let n = dims.hidden;
    let h = dims.half();
    let gru = |input: usize| Gru {
        w_r: vec![h, input],
        u_r: vec![h, h],
        v_r: vec![h, n],
        b_r: vec![h],
        w_z: vec![h, input],
        u_z: vec![h, h],
        v_z: vec![h, n],
        b_z: vec![h],
        w_h: vec![h, input],
        u_h: vec![h, h],
        v_h: vec![h, n],
        b_h: vec![h],
    };
    let level = |input: usize| Level {
        topic_proj: vec![n, n],
        topic_bias: vec![n],
        forward: gru(input),
        backward: gru(input),
        attn_proj: vec![n, n],
        attn_bias: vec![n],
        context: vec![n],
    };
    Network {
        topics: vec![dims.topics, n],
        word: level(dims.embedding),
        sentence: level(n),
        sentiment: Head {
            weight: vec![dims.sentiment_classes, n],
            bias: vec![dims.sentiment_classes],
        },
        domain: Head {
            weight: vec![dims.domain_classes, n],
            bias: vec![dims.domain_classes],
        },
    }
}

/// All learnable state of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct TdamParams {
    pub dims: ModelDims,
    /// `V×d` word embedding table; row 0 is padding.
    pub embeddings: Tensor,
    pub net: Network<Tensor>,
}

pub const EMBEDDINGS_NAME: &str = "embeddings";

impl TdamParams {
    pub fn zeros(dims: ModelDims) -> Result<Self> {
        dims.validate()?;
        let net = network_shapes(&dims)
            .try_map::<Tensor, TdamError>("", &mut |_, shape| Ok(Tensor::zeros(shape)))?;
        Ok(Self {
            dims,
            embeddings: Tensor::zeros(&[dims.vocab, dims.embedding]),
            net,
        })
    }

    /// `(name, tensor)` pairs, embedding table first.
    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![(EMBEDDINGS_NAME.to_string(), &self.embeddings)];
        out.extend(self.net.leaves());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embeddings];
        out.extend(self.net.leaves_mut());
        out
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.named().into_iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        let idx = self.named().iter().position(|(n, _)| n == name)?;
        self.tensors_mut().into_iter().nth(idx)
    }

    pub fn parameter_count(&self) -> usize {
        self.named().iter().map(|(_, t)| t.len()).sum()
    }

    /// Checks every tensor against the shapes implied by `dims` and for finiteness.
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        let expected = network_shapes(&self.dims);
        let mut shapes = vec![(EMBEDDINGS_NAME.to_string(), vec![self.dims.vocab, self.dims.embedding])];
        shapes.extend(expected.leaves().into_iter().map(|(n, s)| (n, s.clone())));
        for ((name, t), (_, shape)) in self.named().into_iter().zip(shapes) {
            if t.shape() != shape.as_slice() {
                return Err(TdamError::Shape {
                    op: "parameter",
                    left: shape,
                    right: t.shape().to_vec(),
                });
            }
            if !t.is_finite() {
                return Err(TdamError::invalid(format!("parameter {name} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Sets the topic input matrices of every GRU to zero.
    pub fn zero_topic_inputs(&mut self) {
        for level in [&mut self.net.word, &mut self.net.sentence] {
            for gru in [&mut level.forward, &mut level.backward] {
                for v in [&mut gru.v_r, &mut gru.v_z, &mut gru.v_h] {
                    v.data_mut().iter_mut().for_each(|x| *x = 0.0);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> ModelDims {
        ModelDims {
            hidden: 6,
            topics: 2,
            embedding: 4,
            vocab: 10,
            sentiment_classes: 3,
            domain_classes: 5,
        }
    }

    #[test]
    fn names_are_unique_and_ordered() {
        let mut p = TdamParams::zeros(dims()).unwrap();
        let names: Vec<String> = p.named().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names[0], "embeddings");
        assert_eq!(names[1], "topics");
        assert!(names.contains(&"word.forward.v_h".to_string()));
        assert!(names.contains(&"sentence.backward.w_r".to_string()));
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
        assert_eq!(p.tensors_mut().len(), names.len());
    }

    #[test]
    fn shapes_follow_dims() {
        let p = TdamParams::zeros(dims()).unwrap();
        assert_eq!(p.get("word.forward.w_r").unwrap().shape(), &[3, 4]);
        assert_eq!(p.get("sentence.forward.w_r").unwrap().shape(), &[3, 6]);
        assert_eq!(p.get("word.backward.v_z").unwrap().shape(), &[3, 6]);
        assert_eq!(p.get("domain.weight").unwrap().shape(), &[5, 6]);
        assert_eq!(p.get("topics").unwrap().shape(), &[2, 6]);
        p.validate().unwrap();
    }

    #[test]
    fn odd_hidden_rejected() {
        let mut d = dims();
        d.hidden = 5;
        assert!(TdamParams::zeros(d).is_err());
        d.hidden = 6;
        d.topics = 0;
        assert!(TdamParams::zeros(d).is_err());
    }

    #[test]
    fn get_mut_targets_named_tensor() {
        let mut p = TdamParams::zeros(dims()).unwrap();
        p.get_mut("sentiment.bias").unwrap().data_mut()[1] = 2.5;
        assert_eq!(p.net.sentiment.bias.data()[1], 2.5);
    }
}
