use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::{round_in_place, Tensor};

/// Named trainable tensors, enumerated in sorted-name order.
///
/// Each parameter draws its initial values from an RNG seeded by the store
/// seed and the parameter name, so initialization does not depend on the
/// order in which parameters are registered.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore {
    params: BTreeMap<String, Tensor>,
    rng_seed: u64,
}

fn name_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

impl ParameterStore {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            params: BTreeMap::new(),
            rng_seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn insert(&mut self, name: &str, mut tensor: Tensor) {
        assert!(
            !self.params.contains_key(name),
            "parameter `{name}` registered twice"
        );
        round_in_place(tensor.data_mut());
        self.params.insert(name.to_string(), tensor);
    }

    /// Replaces the value of an existing parameter, keeping its shape.
    pub fn set(&mut self, name: &str, data: Vec<f64>) {
        let t = self
            .params
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown `{name}`"));
        assert_eq!(t.len(), data.len(), "set `{name}`: size mismatch");
        t.data_mut().copy_from_slice(&data);
    }

    fn rng_for(&self, name: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(name_seed(self.rng_seed, name))
    }

    /// Xavier-uniform matrix with bound `sqrt(6 / (rows + cols))`.
    pub fn add_xavier(&mut self, name: &str, rows: usize, cols: usize) {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        self.add_uniform(name, vec![rows, cols], bound);
    }

    pub fn add_uniform(&mut self, name: &str, shape: Vec<usize>, bound: f64) {
        let mut rng = self.rng_for(name);
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        self.insert(name, Tensor::new(shape, data).expect("sized from shape"));
    }

    pub fn add_zeros(&mut self, name: &str, shape: Vec<usize>) {
        self.insert(name, Tensor::zeros(shape));
    }

    pub fn add_ones(&mut self, name: &str, shape: Vec<usize>) {
        self.insert(name, Tensor::filled(shape, 1.0));
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.params.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.params.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar values.
    pub fn value_count(&self) -> usize {
        self.params.values().map(Tensor::len).sum()
    }

    /// Allocates (or clears) the gradient buffer of every parameter.
    pub fn zero_grads(&mut self) {
        self.params.values_mut().for_each(Tensor::zero_grad);
    }

    pub fn accumulate_grad(&mut self, name: &str, grad: &[f64]) {
        self.params
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown `{name}`"))
            .accumulate_grad(grad);
    }

    /// Largest absolute difference between matching parameters.
    pub fn max_abs_diff(&self, other: &ParameterStore) -> f64 {
        assert_eq!(self.params.len(), other.params.len());
        self.params
            .iter()
            .zip(&other.params)
            .map(|((na, a), (nb, b))| {
                assert_eq!(na, nb);
                a.max_abs_diff(b)
            })
            .fold(0.0, f64::max)
    }
}
