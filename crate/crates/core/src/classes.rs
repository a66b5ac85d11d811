//! Fixed 14-class label space.
//!
//! Indices follow the lexicographic order of the published class names, so the
//! mapping never depends on which classes occur in a particular file or split.

pub const NUM_CLASSES: usize = 14;

pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "Ampulla of Vater",
    "Angiectasia",
    "Blood - fresh",
    "Blood - hematin",
    "Erosion",
    "Erythema",
    "Foreign Body",
    "Ileocecal valve",
    "Lymphangiectasia",
    "Normal clean mucosa",
    "Polyp",
    "Pylorus",
    "Reduced Mucosal View",
    "Ulcer",
];

/// Classes with a single source video; they only ever appear in the training split.
pub const TRAINING_ONLY: [&str; 3] = ["Ampulla of Vater", "Blood - hematin", "Polyp"];

pub fn class_index(name: &str) -> Option<usize> {
    CLASS_NAMES.iter().position(|c| *c == name)
}

pub fn class_name(index: usize) -> Option<&'static str> {
    CLASS_NAMES.get(index).copied()
}

/// A subset of the 14 classes, stored as a bitmask over class indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassSet(u16);

impl ClassSet {
    pub fn all() -> Self {
        ClassSet((1u16 << NUM_CLASSES) - 1)
    }

    pub fn empty() -> Self {
        ClassSet(0)
    }

    /// The 11 classes that have held-out test support.
    pub fn evaluable() -> Self {
        let mut set = Self::all();
        for name in TRAINING_ONLY {
            set.remove(class_index(name).expect("known class"));
        }
        set
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty();
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < NUM_CLASSES, "class index {index} out of range");
        self.0 |= 1 << index;
    }

    pub fn remove(&mut self, index: usize) {
        if index < NUM_CLASSES {
            self.0 &= !(1 << index);
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        index < NUM_CLASSES && self.0 & (1 << index) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_CLASSES).filter(move |&i| self.contains(i))
    }
}

impl std::str::FromStr for ClassSet {
    type Err = crate::error::Error;

    /// `default` (the evaluable classes), `all`, or a comma-separated list of
    /// class names or indices.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "default" | "evaluable" => return Ok(ClassSet::evaluable()),
            "all" => return Ok(ClassSet::all()),
            _ => {}
        }
        let mut set = ClassSet::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let idx = class_index(part)
                .or_else(|| part.parse::<usize>().ok().filter(|&i| i < NUM_CLASSES))
                .ok_or_else(|| {
                    crate::error::Error::InvalidArgument(format!("unknown class '{part}'"))
                })?;
            set.insert(idx);
        }
        if set.is_empty() {
            return Err(crate::error::Error::InvalidArgument(
                "empty class set".into(),
            ));
        }
        Ok(set)
    }
}
