//! Degree-of-freedom bookkeeping.
//!
//! Every (field, node, component) maps to a [`Dof`]: a free unknown, an
//! unknown slaved affinely to another free unknown (used to eliminate
//! interface fluid velocities in favour of solid displacements), or a fixed
//! value.

/// How one nodal component relates to the global unknown vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dof {
    Free(usize),
    /// `value = scale * x[index] + shift`; shares the test function of `index`.
    Linked { index: usize, scale: f64, shift: f64 },
    Fixed(f64),
}

impl Dof {
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Dof::Free(i) => x[i],
            Dof::Linked { index, scale, shift } => scale * x[index] + shift,
            Dof::Fixed(v) => v,
        }
    }

    /// Equation row receiving this dof's test-function contribution.
    #[inline]
    pub fn row(&self) -> Option<usize> {
        match *self {
            Dof::Free(i) | Dof::Linked { index: i, .. } => Some(i),
            Dof::Fixed(_) => None,
        }
    }

    /// Global column and chain-rule factor `d value / d x[col]`.
    #[inline]
    pub fn column(&self) -> Option<(usize, f64)> {
        match *self {
            Dof::Free(i) => Some((i, 1.0)),
            Dof::Linked { index, scale, .. } => Some((index, scale)),
            Dof::Fixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldId(usize);

/// Specification of a single dof before numbering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofSpec {
    Free,
    Fixed(f64),
    /// Slaved to (field, node, component), which must itself be free.
    Link {
        field: FieldId,
        node: usize,
        component: usize,
        scale: f64,
        shift: f64,
    },
}

#[derive(Debug, Clone)]
struct FieldEntry {
    name: String,
    nodes: usize,
    components: usize,
    specs: Vec<DofSpec>,
    dofs: Vec<Dof>,
}

/// Map (field, node, component) -> [`Dof`], with extra scalar unknowns
/// (e.g. Lagrange multipliers) appended at the end.
#[derive(Debug, Clone, Default)]
pub struct DofMap {
    fields: Vec<FieldEntry>,
    extra: usize,
    n_global: usize,
    finalized: bool,
}

impl DofMap {
    pub fn new() -> Self {
        DofMap::default()
    }

    pub fn add_field(&mut self, name: &str, nodes: usize, components: usize) -> FieldId {
        assert!(!self.finalized, "dof map already numbered");
        self.fields.push(FieldEntry {
            name: name.to_string(),
            nodes,
            components,
            specs: vec![DofSpec::Free; nodes * components],
            dofs: Vec::new(),
        });
        FieldId(self.fields.len() - 1)
    }

    /// Reserves a scalar global unknown; returns its offset among extras.
    pub fn add_extra(&mut self) -> usize {
        assert!(!self.finalized, "dof map already numbered");
        self.extra += 1;
        self.extra - 1
    }

    pub fn set(&mut self, field: FieldId, node: usize, component: usize, spec: DofSpec) {
        assert!(!self.finalized, "dof map already numbered");
        let f = &mut self.fields[field.0];
        f.specs[node * f.components + component] = spec;
    }

    /// Numbers free dofs (field-major, node-major) and resolves links.
    pub fn finalize(&mut self) {
        let mut next = 0;
        let free_index: Vec<Vec<Option<usize>>> = self
            .fields
            .iter()
            .map(|f| {
                f.specs
                    .iter()
                    .map(|s| {
                        matches!(s, DofSpec::Free).then(|| {
                            next += 1;
                            next - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let comps: Vec<usize> = self.fields.iter().map(|f| f.components).collect();
        for (fi, f) in self.fields.iter_mut().enumerate() {
            f.dofs = f
                .specs
                .iter()
                .enumerate()
                .map(|(k, s)| match *s {
                    DofSpec::Free => Dof::Free(free_index[fi][k].unwrap()),
                    DofSpec::Fixed(v) => Dof::Fixed(v),
                    DofSpec::Link { field, node, component, scale, shift } => {
                        let index = free_index[field.0][node * comps[field.0] + component]
                            .expect("dof link target must be free");
                        Dof::Linked { index, scale, shift }
                    }
                })
                .collect();
        }
        self.n_global = next + self.extra;
        self.finalized = true;
    }

    /// Number of global unknowns, including extras.
    pub fn len(&self) -> usize {
        assert!(self.finalized, "dof map not numbered");
        self.n_global
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global index of extra unknown `k`.
    pub fn extra_index(&self, k: usize) -> usize {
        assert!(self.finalized && k < self.extra);
        self.n_global - self.extra + k
    }

    pub fn dof(&self, field: FieldId, node: usize, component: usize) -> Dof {
        let f = &self.fields[field.0];
        f.dofs[node * f.components + component]
    }

    /// Dofs of `field` at `nodes`, node-major.
    pub fn cell_dofs(&self, field: FieldId, nodes: &[usize]) -> Vec<Dof> {
        let f = &self.fields[field.0];
        nodes
            .iter()
            .flat_map(|&n| (0..f.components).map(move |c| f.dofs[n * f.components + c]))
            .collect()
    }

    pub fn field_name(&self, field: FieldId) -> &str {
        &self.fields[field.0].name
    }

    pub fn field_nodes(&self, field: FieldId) -> usize {
        self.fields[field.0].nodes
    }

    pub fn field_components(&self, field: FieldId) -> usize {
        self.fields[field.0].components
    }

    /// Nodal values of `field` evaluated from the global vector.
    pub fn extract(&self, field: FieldId, x: &[f64]) -> Vec<f64> {
        self.fields[field.0].dofs.iter().map(|d| d.value(x)).collect()
    }

    /// Writes free nodal values of `field` into the global vector.
    pub fn scatter(&self, field: FieldId, values: &[f64], x: &mut [f64]) {
        for (d, &v) in self.fields[field.0].dofs.iter().zip(values) {
            if let Dof::Free(i) = *d {
                x[i] = v;
            }
        }
    }
}
