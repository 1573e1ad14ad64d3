//! Parsed document structure, prior to semantic checking.

/// What a coalgebra declaration branches over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Over {
    /// A named signature declaration.
    Signature(String),
    /// The signature underlying a named presheaf morphism.
    Underlying(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub shape: String,
    pub children: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Signature {
        name: String,
        shapes: Vec<(String, Vec<String>)>,
        point: Option<String>,
    },
    Coalgebra {
        name: String,
        over: Over,
        states: Vec<StateDecl>,
    },
    Indexed {
        name: String,
        over: String,
        index: Vec<String>,
        fibres: Vec<(String, String)>,
    },
    Proto {
        name: String,
        over: String,
        carrier: Vec<String>,
        ambient: Vec<String>,
        gamma: Vec<(String, String)>,
        branch: Vec<(StateDecl, String)>,
    },
    Category {
        name: String,
        objects: Vec<String>,
        morphisms: Vec<(String, String, String)>,
        composites: Vec<(String, String, String)>,
        pullbacks: Vec<(String, String, String, String, String)>,
    },
    Presheaf {
        name: String,
        over: String,
        sections: Vec<(String, Vec<String>)>,
        restrictions: Vec<(String, String, String)>,
    },
    PshMorphism {
        name: String,
        from: String,
        to: String,
        components: Vec<(String, String, String)>,
    },
    Site {
        name: String,
        over: String,
        covers: Vec<(String, Vec<String>)>,
    },
    Family {
        name: String,
        site: String,
        using: String,
        at: String,
        cover: Vec<String>,
        legs: Vec<(String, String, String)>,
    },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Signature { name, .. }
            | Decl::Coalgebra { name, .. }
            | Decl::Indexed { name, .. }
            | Decl::Proto { name, .. }
            | Decl::Category { name, .. }
            | Decl::Presheaf { name, .. }
            | Decl::PshMorphism { name, .. }
            | Decl::Site { name, .. }
            | Decl::Family { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Decl::Signature { .. } => "signature",
            Decl::Coalgebra { .. } => "coalgebra",
            Decl::Indexed { .. } => "indexed",
            Decl::Proto { .. } => "proto",
            Decl::Category { .. } => "category",
            Decl::Presheaf { .. } => "presheaf",
            Decl::PshMorphism { .. } => "morphism",
            Decl::Site { .. } => "site",
            Decl::Family { .. } => "family",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub decls: Vec<Decl>,
}
