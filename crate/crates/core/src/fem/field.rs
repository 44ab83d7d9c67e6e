use crate::error::{Error, Result};

/// Per-node values of a scalar (1 component) or vector (2 components) field.
///
/// Values are stored node-major: `values[node * components + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    components: usize,
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(nodes: usize, components: usize) -> Self {
        NodalField {
            components,
            values: vec![0.0; nodes * components],
        }
    }

    pub fn from_values(nodes: usize, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 || values.len() != nodes * components {
            return Err(Error::Shape(format!(
                "{} values for {nodes} nodes x {components} components",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite value at index {i}")));
        }
        Ok(NodalField { components, values })
    }

    /// Vector field with `f(node)` at every node.
    pub fn from_fn(nodes: usize, f: impl Fn(usize) -> [f64; 2]) -> Self {
        let mut out = NodalField::zeros(nodes, 2);
        for i in 0..nodes {
            out.set_vector(i, f(i));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.components..(i + 1) * self.components]
    }

    pub fn vector(&self, i: usize) -> [f64; 2] {
        debug_assert_eq!(self.components, 2);
        [self.values[2 * i], self.values[2 * i + 1]]
    }

    pub fn set_vector(&mut self, i: usize, v: [f64; 2]) {
        debug_assert_eq!(self.components, 2);
        self.values[2 * i] = v[0];
        self.values[2 * i + 1] = v[1];
    }

    pub fn scalar(&self, i: usize) -> f64 {
        debug_assert_eq!(self.components, 1);
        self.values[i]
    }

    pub fn set_scalar(&mut self, i: usize, v: f64) {
        debug_assert_eq!(self.components, 1);
        self.values[i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest Euclidean norm over nodes.
    pub fn max_norm(&self) -> f64 {
        (0..self.node_count())
            .map(|i| self.node(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}
