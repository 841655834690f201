//! Sequence-level schema: which descriptors exist, their order, and how
//! their values are sliced into tokens.

/// How a descriptor region is tokenized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorKind {
    /// Discretized value; the exact decimal string is one token ("95.2" and
    /// "95.20" are different tokens).
    Numeric,
    /// Symbolic value such as a chain-structure code; one token.
    Categorical,
    /// SMILES-valued descriptor (e.g. an anion); tokenized per atom like the
    /// polymer SMILES itself.
    Smiles,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorSpec {
    pub name: String,
    pub kind: DescriptorKind,
}

impl DescriptorSpec {
    pub fn new(name: impl Into<String>, kind: DescriptorKind) -> Self {
        DescriptorSpec {
            name: name.into(),
            kind,
        }
    }

    /// The placeholder token marking a missing value of this descriptor.
    pub fn nan_token(&self) -> String {
        format!("NAN_{}", self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDescriptorSpec {
    pub spec: DescriptorSpec,
    /// Ratio-style descriptors carry one slot per component and are padded
    /// with missing entries up to `max_components`.
    pub per_component: bool,
}

/// Descriptor layout shared by every record of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSchema {
    pub max_components: usize,
    /// Same ordered list for every component.
    pub component_descriptors: Vec<DescriptorSpec>,
    pub global_descriptors: Vec<GlobalDescriptorSpec>,
}

impl SequenceSchema {
    /// Schema with no descriptors at all: a record is just its SMILES.
    pub fn bare() -> Self {
        SequenceSchema {
            max_components: 1,
            component_descriptors: Vec::new(),
            global_descriptors: Vec::new(),
        }
    }

    /// Global descriptor slots in sequence order, with per-component
    /// descriptors repeated `max_components` times.
    pub fn expanded_globals(&self) -> Vec<&DescriptorSpec> {
        let mut out = Vec::new();
        for g in &self.global_descriptors {
            let repeat = if g.per_component {
                self.max_components
            } else {
                1
            };
            for _ in 0..repeat {
                out.push(&g.spec);
            }
        }
        out
    }

    /// All NAN tokens this schema can produce, in declaration order.
    pub fn nan_tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        for spec in self
            .component_descriptors
            .iter()
            .chain(self.global_descriptors.iter().map(|g| &g.spec))
        {
            let token = spec.nan_token();
            if !out.contains(&token) {
                out.push(token);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_component_globals_expand_to_max() {
        let schema = SequenceSchema {
            max_components: 3,
            component_descriptors: vec![],
            global_descriptors: vec![
                GlobalDescriptorSpec {
                    spec: DescriptorSpec::new("ratio", DescriptorKind::Numeric),
                    per_component: true,
                },
                GlobalDescriptorSpec {
                    spec: DescriptorSpec::new("temperature", DescriptorKind::Numeric),
                    per_component: false,
                },
            ],
        };
        let names: Vec<&str> = schema
            .expanded_globals()
            .iter()
            .map(|s| s.name.as_str())
            .collect();
        assert_eq!(names, ["ratio", "ratio", "ratio", "temperature"]);
        assert_eq!(schema.nan_tokens(), ["NAN_ratio", "NAN_temperature"]);
    }
}
