//! Label inventories for span tagging.
//!
//! Three schemes are supported: the plain `{B, I, O}` inventory, a fine
//! inventory that pairs every indicator with one of the seven method
//! categories, and a binary-fine inventory that pairs indicators with the
//! `GEN`-vs-rest coarsening. Fine labels project back to plain ones by
//! dropping the category component.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Span indicator: begin, inside, or outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseLabel {
    B,
    I,
    O,
}

impl CoarseLabel {
    pub const ALL: [CoarseLabel; 3] = [CoarseLabel::B, CoarseLabel::I, CoarseLabel::O];

    pub fn as_str(&self) -> &'static str {
        match self {
            CoarseLabel::B => "B",
            CoarseLabel::I => "I",
            CoarseLabel::O => "O",
        }
    }
}

impl fmt::Display for CoarseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoarseLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "B" => Ok(CoarseLabel::B),
            "I" => Ok(CoarseLabel::I),
            "O" => Ok(CoarseLabel::O),
            other => Err(LabelError::UnknownLabel(other.to_string())),
        }
    }
}

/// The seven method categories carried by every document.
///
/// Variants are kept in alphabetical order of their wire names so that label
/// and routing indices are reproducible across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "AUDIO")]
    Audio,
    #[serde(rename = "CV")]
    Cv,
    #[serde(rename = "GEN")]
    Gen,
    #[serde(rename = "GRAPH")]
    Graph,
    #[serde(rename = "NLP")]
    Nlp,
    #[serde(rename = "RL")]
    Rl,
    #[serde(rename = "SEQ")]
    Seq,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Audio,
        Category::Cv,
        Category::Gen,
        Category::Graph,
        Category::Nlp,
        Category::Rl,
        Category::Seq,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Audio => "AUDIO",
            Category::Cv => "CV",
            Category::Gen => "GEN",
            Category::Graph => "GRAPH",
            Category::Nlp => "NLP",
            Category::Rl => "RL",
            Category::Seq => "SEQ",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "AUDIO" => Ok(Category::Audio),
            "CV" => Ok(Category::Cv),
            "GEN" => Ok(Category::Gen),
            "GRAPH" => Ok(Category::Graph),
            "NLP" => Ok(Category::Nlp),
            "RL" => Ok(Category::Rl),
            "SEQ" => Ok(Category::Seq),
            other => Err(LabelError::UnknownCategory(other.to_string())),
        }
    }
}

/// Two-way coarsening of the category set: `GEN` against everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryGroup {
    #[serde(rename = "GEN")]
    Gen,
    #[serde(rename = "REST")]
    Rest,
}

impl BinaryGroup {
    pub const ALL: [BinaryGroup; 2] = [BinaryGroup::Gen, BinaryGroup::Rest];

    pub fn as_str(&self) -> &'static str {
        match self {
            BinaryGroup::Gen => "GEN",
            BinaryGroup::Rest => "REST",
        }
    }
}

impl fmt::Display for BinaryGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a category to its binary group: `GEN` stays, everything else merges.
pub fn coarsen_category(category: Category) -> BinaryGroup {
    match category {
        Category::Gen => BinaryGroup::Gen,
        _ => BinaryGroup::Rest,
    }
}

/// Category component of a fine label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    Category(Category),
    Binary(BinaryGroup),
}

impl Group {
    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Category(c) => c.as_str(),
            Group::Binary(b) => b.as_str(),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A member of a scheme inventory.
///
/// `Plain` entries are the labels of the coarse scheme and the shared `O` of
/// schemes built with `collapse_o`. `Tagged` entries carry a group component
/// and render as e.g. `B-NLP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Plain(CoarseLabel),
    Tagged { indicator: CoarseLabel, group: Group },
}

impl Label {
    pub fn indicator(&self) -> CoarseLabel {
        match self {
            Label::Plain(c) => *c,
            Label::Tagged { indicator, .. } => *indicator,
        }
    }

    pub fn group(&self) -> Option<Group> {
        match self {
            Label::Plain(_) => None,
            Label::Tagged { group, .. } => Some(*group),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Plain(c) => write!(f, "{c}"),
            Label::Tagged { indicator, group } => write!(f, "{indicator}-{group}"),
        }
    }
}

/// Strips the category component from a fine label sequence.
pub fn project_labels(labels: &[Label]) -> Vec<CoarseLabel> {
    labels.iter().map(Label::indicator).collect()
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("operation requires a fine scheme, got `{0}`")]
    SchemeMismatch(SchemeKind),
    #[error("label `{0}` is not in the scheme inventory")]
    NotInInventory(String),
}

/// Which label inventory a model decodes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "coarse")]
    Coarse,
    #[serde(rename = "fine")]
    Fine,
    #[serde(rename = "fine-binary")]
    FineBinary,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeKind::Coarse => "coarse",
            SchemeKind::Fine => "fine",
            SchemeKind::FineBinary => "fine-binary",
        };
        f.write_str(s)
    }
}

/// An ordered label inventory with a label/index bijection.
///
/// The inventory is fully determined by `(kind, collapse_o)`: groups are laid
/// out in their canonical order, indicators in `B, I, O` order within each
/// group, and under `collapse_o` the per-group `O` entries merge into a single
/// trailing `O`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SchemeDescriptor", into = "SchemeDescriptor")]
pub struct LabelScheme {
    kind: SchemeKind,
    collapse_o: bool,
    inventory: Vec<Label>,
}

/// Serialized form of a scheme; the inventory is rebuilt on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeDescriptor {
    kind: SchemeKind,
    collapse_o: bool,
}

impl From<SchemeDescriptor> for LabelScheme {
    fn from(d: SchemeDescriptor) -> Self {
        LabelScheme::new(d.kind, d.collapse_o)
    }
}

impl From<LabelScheme> for SchemeDescriptor {
    fn from(s: LabelScheme) -> Self {
        SchemeDescriptor { kind: s.kind, collapse_o: s.collapse_o }
    }
}

impl LabelScheme {
    pub fn new(kind: SchemeKind, collapse_o: bool) -> Self {
        let mut inventory = Vec::new();
        match kind {
            SchemeKind::Coarse => {
                inventory.extend(CoarseLabel::ALL.map(Label::Plain));
            }
            SchemeKind::Fine => {
                Self::push_groups(&mut inventory, Category::ALL.map(Group::Category), collapse_o);
            }
            SchemeKind::FineBinary => {
                Self::push_groups(&mut inventory, BinaryGroup::ALL.map(Group::Binary), collapse_o);
            }
        }
        LabelScheme { kind, collapse_o, inventory }
    }

    fn push_groups(inventory: &mut Vec<Label>, groups: impl IntoIterator<Item = Group>, collapse_o: bool) {
        for group in groups {
            for indicator in CoarseLabel::ALL {
                if collapse_o && indicator == CoarseLabel::O {
                    continue;
                }
                inventory.push(Label::Tagged { indicator, group });
            }
        }
        if collapse_o {
            inventory.push(Label::Plain(CoarseLabel::O));
        }
    }

    pub fn coarse() -> Self {
        Self::new(SchemeKind::Coarse, false)
    }

    pub fn fine(collapse_o: bool) -> Self {
        Self::new(SchemeKind::Fine, collapse_o)
    }

    pub fn fine_binary(collapse_o: bool) -> Self {
        Self::new(SchemeKind::FineBinary, collapse_o)
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn collapse_o(&self) -> bool {
        self.collapse_o
    }

    pub fn len(&self) -> usize {
        self.inventory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inventory.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.inventory
    }

    pub fn label(&self, index: usize) -> Label {
        self.inventory[index]
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.inventory.iter().position(|l| l == label)
    }

    /// The group a sentence of `category` belongs to under this scheme's
    /// granularity, or `None` for the coarse scheme.
    pub fn group_for_category(&self, category: Category) -> Option<Group> {
        match self.kind {
            SchemeKind::Coarse => None,
            SchemeKind::Fine => Some(Group::Category(category)),
            SchemeKind::FineBinary => Some(Group::Binary(coarsen_category(category))),
        }
    }

    /// Pairs every indicator with the (possibly coarsened) category group.
    ///
    /// Fails with `SchemeMismatch` on the coarse scheme, which has no group
    /// component to attach.
    pub fn expand_labels(&self, labels: &[CoarseLabel], category: Category) -> Result<Vec<Label>, LabelError> {
        let group = self
            .group_for_category(category)
            .ok_or(LabelError::SchemeMismatch(self.kind))?;
        Ok(labels
            .iter()
            .map(|&indicator| {
                if self.collapse_o && indicator == CoarseLabel::O {
                    Label::Plain(CoarseLabel::O)
                } else {
                    Label::Tagged { indicator, group }
                }
            })
            .collect())
    }

    /// Gold label indices for a sentence under this scheme.
    ///
    /// Coarse schemes index the labels directly; fine schemes expand them
    /// with the sentence category first.
    pub fn gold_indices(&self, labels: &[CoarseLabel], category: Category) -> Vec<usize> {
        let expanded = match self.kind {
            SchemeKind::Coarse => labels.iter().map(|&c| Label::Plain(c)).collect(),
            _ => self
                .expand_labels(labels, category)
                .expect("fine scheme expansion cannot fail"),
        };
        expanded
            .iter()
            .map(|l| self.index_of(l).expect("expanded label is in inventory"))
            .collect()
    }

    /// Maps decoded label indices back to plain indicators.
    pub fn project_indices(&self, indices: &[usize]) -> Vec<CoarseLabel> {
        indices.iter().map(|&i| self.inventory[i].indicator()).collect()
    }

    pub fn parse_label(&self, s: &str) -> Result<usize, LabelError> {
        let label = match s.split_once('-') {
            None => Label::Plain(s.parse()?),
            Some((ind, group)) => {
                let indicator: CoarseLabel = ind.parse()?;
                let group = match self.kind {
                    SchemeKind::Fine => Group::Category(group.parse()?),
                    SchemeKind::FineBinary => match group {
                        "GEN" => Group::Binary(BinaryGroup::Gen),
                        "REST" => Group::Binary(BinaryGroup::Rest),
                        other => return Err(LabelError::UnknownCategory(other.to_string())),
                    },
                    SchemeKind::Coarse => return Err(LabelError::UnknownLabel(s.to_string())),
                };
                Label::Tagged { indicator, group }
            }
        };
        self.index_of(&label)
            .ok_or_else(|| LabelError::NotInInventory(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_sizes() {
        assert_eq!(LabelScheme::coarse().len(), 3);
        assert_eq!(LabelScheme::fine(false).len(), 21);
        assert_eq!(LabelScheme::fine(true).len(), 15);
        assert_eq!(LabelScheme::fine_binary(false).len(), 6);
        assert_eq!(LabelScheme::fine_binary(true).len(), 4);
    }

    #[test]
    fn index_is_a_bijection() {
        for scheme in [
            LabelScheme::coarse(),
            LabelScheme::fine(false),
            LabelScheme::fine(true),
            LabelScheme::fine_binary(false),
            LabelScheme::fine_binary(true),
        ] {
            for (i, label) in scheme.labels().iter().enumerate() {
                assert_eq!(scheme.index_of(label), Some(i));
            }
        }
    }

    #[test]
    fn expand_attaches_category() {
        let scheme = LabelScheme::fine(false);
        let labels = [CoarseLabel::B, CoarseLabel::I, CoarseLabel::O];
        let fine = scheme.expand_labels(&labels, Category::Nlp).unwrap();
        assert_eq!(
            fine,
            vec![
                Label::Tagged { indicator: CoarseLabel::B, group: Group::Category(Category::Nlp) },
                Label::Tagged { indicator: CoarseLabel::I, group: Group::Category(Category::Nlp) },
                Label::Tagged { indicator: CoarseLabel::O, group: Group::Category(Category::Nlp) },
            ]
        );
    }

    #[test]
    fn expand_binary_coarsens_non_gen() {
        let scheme = LabelScheme::fine_binary(false);
        let fine = scheme.expand_labels(&[CoarseLabel::O, CoarseLabel::O], Category::Cv).unwrap();
        for label in &fine {
            assert_eq!(label.group(), Some(Group::Binary(BinaryGroup::Rest)));
        }
        let gen = scheme.expand_labels(&[CoarseLabel::B], Category::Gen).unwrap();
        assert_eq!(gen[0].group(), Some(Group::Binary(BinaryGroup::Gen)));
    }

    #[test]
    fn expand_rejects_coarse_scheme() {
        let err = LabelScheme::coarse().expand_labels(&[CoarseLabel::B], Category::Gen);
        assert!(matches!(err, Err(LabelError::SchemeMismatch(_))));
    }

    #[test]
    fn project_strips_groups() {
        let labels = vec![
            Label::Tagged { indicator: CoarseLabel::B, group: Group::Category(Category::Nlp) },
            Label::Tagged { indicator: CoarseLabel::I, group: Group::Category(Category::Graph) },
        ];
        assert_eq!(project_labels(&labels), vec![CoarseLabel::B, CoarseLabel::I]);
        assert_eq!(project_labels(&[]), Vec::<CoarseLabel>::new());
    }

    #[test]
    fn coarsening_rule() {
        assert_eq!(coarsen_category(Category::Gen), BinaryGroup::Gen);
        assert_eq!(coarsen_category(Category::Cv), BinaryGroup::Rest);
        assert_eq!(coarsen_category(Category::Audio), BinaryGroup::Rest);
    }

    #[test]
    fn label_strings_round_trip() {
        let scheme = LabelScheme::fine(false);
        for (i, label) in scheme.labels().iter().enumerate() {
            assert_eq!(scheme.parse_label(&label.to_string()).unwrap(), i);
        }
        let coarse = LabelScheme::coarse();
        assert_eq!(coarse.parse_label("B").unwrap(), 0);
        assert!(coarse.parse_label("B-NLP").is_err());
    }

    #[test]
    fn collapse_o_shares_a_single_outside_label() {
        let scheme = LabelScheme::fine(true);
        let a = scheme.expand_labels(&[CoarseLabel::O], Category::Nlp).unwrap();
        let b = scheme.expand_labels(&[CoarseLabel::O], Category::Cv).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], Label::Plain(CoarseLabel::O));
    }
}
