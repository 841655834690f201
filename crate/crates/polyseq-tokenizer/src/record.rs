//! Dataset rows as structured records.

/// One descriptor slot of a record. Present values hold the exact string
/// that will be tokenized; they are never re-formatted after assembly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    pub name: String,
    pub value: Option<String>,
}

impl Descriptor {
    pub fn present(name: impl Into<String>, value: impl Into<String>) -> Self {
        Descriptor {
            name: name.into(),
            value: Some(value.into()),
        }
    }

    pub fn missing(name: impl Into<String>) -> Self {
        Descriptor {
            name: name.into(),
            value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolymerComponent {
    /// Copolymer constituents stay `.`-joined inside one component.
    pub smiles: String,
    pub descriptors: Vec<Descriptor>,
}

impl PolymerComponent {
    pub fn new(smiles: impl Into<String>) -> Self {
        PolymerComponent {
            smiles: smiles.into(),
            descriptors: Vec::new(),
        }
    }
}

/// One dataset row: components, global descriptors, optional property label.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerRecord {
    pub components: Vec<PolymerComponent>,
    pub global_descriptors: Vec<Descriptor>,
    pub label: Option<f64>,
}

impl PolymerRecord {
    pub fn single(smiles: impl Into<String>) -> Self {
        PolymerRecord {
            components: vec![PolymerComponent::new(smiles)],
            global_descriptors: Vec::new(),
            label: None,
        }
    }
}
