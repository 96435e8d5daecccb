use crate::error::{Error, Result};

pub const DEFAULT_CONSONANTS: &str = "bcdfghjklmnpqrstvwxyz";
pub const TARGET_VOWELS: &str = "aeiou";
pub const SOURCE_VOWELS: &str = "aeiouäöü";

/// Consonant and vowel inventories used to generate artificial morphemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    pub consonants: Vec<char>,
    pub vowels: Vec<char>,
}

impl Alphabet {
    pub fn new(consonants: &str, vowels: &str) -> Result<Self> {
        let consonants: Vec<char> = consonants.chars().collect();
        let vowels: Vec<char> = vowels.chars().collect();
        if consonants.is_empty() || vowels.is_empty() {
            return Err(Error::Config("alphabets must be non-empty".into()));
        }
        if consonants.iter().any(|c| vowels.contains(c)) {
            return Err(Error::Config("consonant and vowel alphabets overlap".into()));
        }
        Ok(Alphabet { consonants, vowels })
    }

    pub fn source_default() -> Self {
        Alphabet::new(DEFAULT_CONSONANTS, SOURCE_VOWELS).expect("default alphabet is valid")
    }

    pub fn target_default() -> Self {
        Alphabet::new(DEFAULT_CONSONANTS, TARGET_VOWELS).expect("default alphabet is valid")
    }

    pub fn is_consonant(&self, c: char) -> bool {
        self.consonants.contains(&c)
    }

    pub fn is_vowel(&self, c: char) -> bool {
        self.vowels.contains(&c)
    }
}

/// Characters treated as vowels when reading vowels out of real words.
/// Matching is case-insensitive; `y` is not a vowel by default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VowelSet {
    vowels: Vec<char>,
}

impl Default for VowelSet {
    fn default() -> Self {
        VowelSet::new(SOURCE_VOWELS)
    }
}

impl VowelSet {
    pub fn new(vowels: &str) -> Self {
        let mut set: Vec<char> = vowels.chars().flat_map(char::to_lowercase).collect();
        set.sort_unstable();
        set.dedup();
        VowelSet { vowels: set }
    }

    pub fn is_vowel(&self, c: char) -> bool {
        c.to_lowercase().all(|l| self.vowels.binary_search(&l).is_ok())
    }

    /// Lowercased vowels of `word`, in order.
    pub fn vowels_of(&self, word: &str) -> Vec<char> {
        word.chars()
            .filter(|&c| self.is_vowel(c))
            .flat_map(char::to_lowercase)
            .collect()
    }

    /// The last two vowels of `word`; a single vowel is doubled.
    pub fn last_two(&self, word: &str) -> Option<(char, char)> {
        let vowels = self.vowels_of(word);
        match vowels.as_slice() {
            [] => None,
            [v] => Some((*v, *v)),
            [.., a, b] => Some((*a, *b)),
        }
    }
}
