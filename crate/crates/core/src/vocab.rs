//! Closed label vocabularies.
//!
//! Every vocabulary starts with [`IDLE`], the label used wherever no
//! annotated element covers a frame.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::text::levenshtein;

pub const IDLE: &str = "Idle";

const PHASES: &[&str] = &[IDLE, "Suturing", "Knot Tying"];
const STEPS: &[&str] = &[
    IDLE,
    "Needle holding",
    "Suture making",
    "Suture handling",
    "1° knot",
    "2° knot",
    "3° knot",
];
const VERBS: &[&str] = &[
    IDLE,
    "Catch",
    "Give slack",
    "Hold",
    "Insert",
    "Loosen completely",
    "Loosen partially",
    "Make a loop",
    "Pass through",
    "Position",
    "Pull",
];
const TARGETS: &[&str] = &[
    IDLE,
    "Needle",
    "Wire",
    "Both artificial vessel",
    "Left artificial vessel",
    "Right artificial vessel",
    "Long wire strand",
    "Short wire strand",
    "Wire loop",
    "Knot",
];
const INSTRUMENTS: &[&str] = &[IDLE, "Needle holder"];

/// Granularity component a vocabulary describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Phase,
    Step,
    Verb,
    Target,
    Instrument,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Phase,
        Component::Step,
        Component::Verb,
        Component::Target,
        Component::Instrument,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::Phase => "phase",
            Component::Step => "step",
            Component::Verb => "verb",
            Component::Target => "target",
            Component::Instrument => "instrument",
        }
    }

    fn default_labels(self) -> &'static [&'static str] {
        match self {
            Component::Phase => PHASES,
            Component::Step => STEPS,
            Component::Verb => VERBS,
            Component::Target => TARGETS,
            Component::Instrument => INSTRUMENTS,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the eight label columns of a frame-synchronous sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Track {
    Phase,
    Step,
    VerbLeft,
    TargetLeft,
    InstrumentLeft,
    VerbRight,
    TargetRight,
    InstrumentRight,
}

impl Track {
    /// Column order of the discrete annotation format.
    pub const ALL: [Track; 8] = [
        Track::Phase,
        Track::Step,
        Track::VerbLeft,
        Track::TargetLeft,
        Track::InstrumentLeft,
        Track::VerbRight,
        Track::TargetRight,
        Track::InstrumentRight,
    ];

    /// The six activity tracks, in the order they enter the activity score.
    pub const ACTIVITY: [Track; 6] = [
        Track::VerbLeft,
        Track::TargetLeft,
        Track::InstrumentLeft,
        Track::VerbRight,
        Track::TargetRight,
        Track::InstrumentRight,
    ];

    pub fn component(self) -> Component {
        match self {
            Track::Phase => Component::Phase,
            Track::Step => Component::Step,
            Track::VerbLeft | Track::VerbRight => Component::Verb,
            Track::TargetLeft | Track::TargetRight => Component::Target,
            Track::InstrumentLeft | Track::InstrumentRight => Component::Instrument,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Track::Phase => "phase",
            Track::Step => "step",
            Track::VerbLeft => "verb_left",
            Track::TargetLeft => "target_left",
            Track::InstrumentLeft => "instrument_left",
            Track::VerbRight => "verb_right",
            Track::TargetRight => "target_right",
            Track::InstrumentRight => "instrument_right",
        }
    }

    pub fn from_name(name: &str) -> Option<Track> {
        Track::ALL.into_iter().find(|t| t.name() == name.trim())
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered, duplicate-free label list for one component. `Idle` is always
/// at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocabulary {
    component: Component,
    labels: Vec<String>,
}

impl LabelVocabulary {
    /// Builds a vocabulary from its non-idle labels; `Idle` is prepended
    /// (and removed from `labels` if the caller listed it).
    pub fn new<I, S>(component: Component, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        out.push(IDLE.to_string());
        for label in labels {
            let label = label.as_ref().trim();
            if label == IDLE {
                continue;
            }
            if label.is_empty() || out.iter().any(|l| l == label) {
                return Err(Error::DuplicateLabel {
                    component,
                    label: label.to_string(),
                });
            }
            out.push(label.to_string());
        }
        Ok(Self { component, labels: out })
    }

    /// The challenge vocabulary for `component`.
    pub fn misaw(component: Component) -> Self {
        Self {
            component,
            labels: component.default_labels().iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn component(&self) -> Component {
        self.component
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index of `label` after trimming surrounding whitespace. Matching is
    /// case-sensitive.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        let label = label.trim();
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    /// Index of `label`, or an [`Error::UnknownLabel`].
    pub fn lookup(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel {
            component: self.component,
            label: label.trim().to_string(),
        })
    }

    /// Closest label by edit distance, if it is within two edits.
    pub fn suggest(&self, label: &str) -> Option<&str> {
        let label = label.trim();
        self.labels
            .iter()
            .map(|l| (levenshtein(l, label), l))
            .filter(|(d, _)| *d > 0 && *d <= 2)
            .min_by_key(|(d, _)| *d)
            .map(|(_, l)| l.as_str())
    }
}

/// One vocabulary per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabularySet {
    vocabularies: [LabelVocabulary; 5],
}

impl VocabularySet {
    pub fn misaw() -> Self {
        Self {
            vocabularies: Component::ALL.map(LabelVocabulary::misaw),
        }
    }

    /// Replaces the vocabulary of `vocab.component()`.
    pub fn with(mut self, vocab: LabelVocabulary) -> Self {
        let slot = vocab.component() as usize;
        self.vocabularies[slot] = vocab;
        self
    }

    pub fn get(&self, component: Component) -> &LabelVocabulary {
        &self.vocabularies[component as usize]
    }

    pub fn for_track(&self, track: Track) -> &LabelVocabulary {
        self.get(track.component())
    }
}

impl Default for VocabularySet {
    fn default() -> Self {
        Self::misaw()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        let v = VocabularySet::misaw();
        assert_eq!(v.get(Component::Phase).len(), 3);
        assert_eq!(v.get(Component::Step).len(), 7);
        assert_eq!(v.get(Component::Verb).len(), 11);
        assert_eq!(v.get(Component::Target).len(), 10);
        assert_eq!(v.get(Component::Instrument).len(), 2);
        for c in Component::ALL {
            assert_eq!(v.get(c).labels()[0], IDLE);
        }
    }

    #[test]
    fn labels_unique() {
        for c in Component::ALL {
            let v = LabelVocabulary::misaw(c);
            for (i, a) in v.labels().iter().enumerate() {
                assert!(v.labels()[i + 1..].iter().all(|b| b != a));
            }
        }
    }

    #[test]
    fn lookup_trims_but_keeps_case() {
        let v = LabelVocabulary::misaw(Component::Phase);
        assert_eq!(v.index_of("  Knot Tying\t"), Some(2));
        assert_eq!(v.index_of("knot tying"), None);
        assert!(matches!(
            v.lookup("Sewing"),
            Err(Error::UnknownLabel {
                component: Component::Phase,
                ..
            })
        ));
    }

    #[test]
    fn suggestion() {
        let v = LabelVocabulary::misaw(Component::Phase);
        assert_eq!(v.suggest("Sutureing"), Some("Suturing"));
        assert_eq!(v.suggest("Completely different"), None);
    }

    #[test]
    fn custom_vocabulary() {
        let v = LabelVocabulary::new(Component::Phase, ["A", "Idle", "B"]).unwrap();
        assert_eq!(v.labels(), &["Idle", "A", "B"]);
        assert!(LabelVocabulary::new(Component::Phase, ["A", "A"]).is_err());
    }

    #[test]
    fn track_names_round_trip() {
        for t in Track::ALL {
            assert_eq!(Track::from_name(t.name()), Some(t));
        }
        assert_eq!(Track::InstrumentRight.component(), Component::Instrument);
    }
}
