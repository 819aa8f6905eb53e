//! Shipped closed-class function-word lists (determiners, prepositions,
//! conjunctions, pronouns, auxiliaries and negation particles).
//!
//! Entries ending in an apostrophe are elision prefixes: a token counts as a
//! function word when it *starts* with such an entry ("l'homme" carries the
//! article "l'"). Lookup lowercases tokens and folds the typographic
//! apostrophe to the ASCII one. Lists are versioned and user-overridable.

use std::collections::HashSet;

pub const WORDLIST_VERSION: &str = "1";

pub(crate) const ENGLISH_FUNCTION_WORDS: &[&str] = &[
    // Determiners and quantifiers.
    "a", "an", "the", "this", "that", "these", "those", "each", "every", "either", "neither",
    "some", "any", "no", "all", "both", "half", "several", "many", "much", "few", "little",
    "more", "most", "less", "least", "other", "another", "such", "what", "which", "whose",
    "enough", "certain", "own", "same",
    // Pronouns.
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "who",
    "whom", "whoever", "whomever", "someone", "somebody", "something", "anyone", "anybody",
    "anything", "everyone", "everybody", "everything", "nobody", "nothing", "one", "ones",
    "oneself", "none", "whatever", "whichever",
    // Prepositions.
    "about", "above", "across", "after", "against", "along", "amid", "among", "amongst",
    "around", "at", "before", "behind", "below", "beneath", "beside", "besides", "between",
    "beyond", "by", "concerning", "despite", "down", "during", "except", "for", "from", "in",
    "inside", "into", "like", "near", "of", "off", "on", "onto", "out", "outside", "over",
    "past", "per", "regarding", "since", "through", "throughout", "till", "to", "toward",
    "towards", "under", "underneath", "until", "unto", "up", "upon", "via", "with", "within",
    "without",
    // Conjunctions and relativizers.
    "and", "but", "or", "nor", "so", "yet", "although", "though", "because", "if", "unless",
    "while", "whereas", "when", "whenever", "where", "wherever", "whether", "as", "than",
    "once", "lest", "provided", "however", "therefore", "thus", "hence", "moreover",
    "furthermore", "nevertheless", "nonetheless", "meanwhile", "also", "too", "either",
    // Auxiliaries and modals.
    "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had", "having",
    "do", "does", "did", "doing", "will", "would", "shall", "should", "can", "could", "may",
    "might", "must", "ought", "need", "dare", "cannot",
    // Common contractions (tokens keep internal apostrophes).
    "don't", "doesn't", "didn't", "isn't", "aren't", "wasn't", "weren't", "haven't", "hasn't",
    "hadn't", "won't", "wouldn't", "shan't", "shouldn't", "can't", "couldn't", "mightn't",
    "mustn't", "needn't", "ain't", "it's", "i'm", "i've", "i'll", "i'd", "you're", "you've",
    "you'll", "you'd", "he's", "he'll", "he'd", "she's", "she'll", "she'd", "we're", "we've",
    "we'll", "we'd", "they're", "they've", "they'll", "they'd", "that's", "there's", "here's",
    "what's", "who's", "let's",
    // Negation and existentials.
    "not", "there", "here", "then", "now", "just", "only", "even", "ever", "never", "very",
    "quite", "rather",
];

pub(crate) const FRENCH_FUNCTION_WORDS: &[&str] = &[
    // Articles et déterminants.
    "le", "la", "les", "l'", "un", "une", "des", "du", "de", "d'", "au", "aux", "ce", "cet",
    "cette", "ces", "mon", "ma", "mes", "ton", "ta", "tes", "son", "sa", "ses", "notre", "nos",
    "votre", "vos", "leur", "leurs", "quel", "quelle", "quels", "quelles", "quelque",
    "quelques", "chaque", "tout", "toute", "tous", "toutes", "aucun", "aucune", "nul", "nulle",
    "plusieurs", "certains", "certaines", "même", "mêmes", "autre", "autres", "tel", "telle",
    "tels", "telles",
    // Pronoms.
    "je", "j'", "tu", "il", "elle", "on", "nous", "vous", "ils", "elles", "me", "m'", "te",
    "t'", "se", "s'", "moi", "toi", "soi", "lui", "eux", "y", "en", "celui", "celle", "ceux",
    "celles", "celui-ci", "celle-ci", "ceux-ci", "celui-là", "celle-là", "ceux-là", "ceci",
    "cela", "ça", "c'", "qui", "que", "qu'", "quoi", "dont", "où", "lequel", "laquelle",
    "lesquels", "lesquelles", "auquel", "auxquels", "auxquelles", "duquel", "desquels",
    "desquelles", "personne", "rien", "chacun", "chacune", "quelqu'un", "quelqu'une",
    "quelques-uns", "quelques-unes", "autrui", "quiconque",
    // Prépositions.
    "à", "dans", "sur", "sous", "vers", "par", "pour", "avec", "sans", "chez", "entre",
    "contre", "depuis", "pendant", "avant", "après", "dès", "jusque", "jusqu'", "malgré",
    "parmi", "selon", "envers", "derrière", "devant", "hors", "outre", "sauf", "durant",
    "moyennant", "concernant", "près", "auprès", "autour", "dessus", "dessous", "dedans",
    "dehors", "afin", "grâce", "lors", "via",
    // Conjonctions.
    "et", "ou", "mais", "donc", "or", "ni", "car", "si", "comme", "quand", "lorsque",
    "lorsqu'", "puisque", "puisqu'", "quoique", "quoiqu'", "parce", "tandis", "cependant",
    "pourtant", "néanmoins", "toutefois", "sinon", "soit", "ainsi", "alors", "aussi", "enfin",
    "ensuite", "puis", "déjà", "encore", "toujours", "jamais", "très", "trop", "peu", "assez",
    "plus", "moins", "bien", "ici", "là", "voici", "voilà",
    // Auxiliaires être et avoir.
    "suis", "es", "est", "sommes", "êtes", "sont", "étais", "était", "étions", "étiez",
    "étaient", "fus", "fut", "fûmes", "fûtes", "furent", "serai", "seras", "sera", "serons",
    "serez", "seront", "serais", "serait", "serions", "seriez", "seraient", "sois", "soyons",
    "soyez", "soient", "fusse", "fût", "être", "été", "étant", "ai", "as", "a", "avons",
    "avez", "ont", "avais", "avait", "avions", "aviez", "avaient", "eus", "eut", "eûmes",
    "eûtes", "eurent", "aurai", "auras", "aura", "aurons", "aurez", "auront", "aurais",
    "aurait", "aurions", "auriez", "auraient", "aie", "aies", "ait", "ayons", "ayez", "aient",
    "eusse", "eût", "avoir", "eu", "eue", "eus", "eues", "ayant",
    // Négation.
    "ne", "n'", "pas", "point", "guère", "non",
];

/// A resolved function-word matcher: exact entries plus elision prefixes.
#[derive(Debug, Clone)]
pub struct FunctionWords {
    exact: HashSet<String>,
    prefixes: Vec<String>,
    pub version: String,
}

impl FunctionWords {
    pub fn builtin(language: super::Language) -> Self {
        let entries = match language {
            super::Language::En => ENGLISH_FUNCTION_WORDS,
            super::Language::Fr => FRENCH_FUNCTION_WORDS,
        };
        Self::from_entries(entries.iter().map(|s| s.to_string()), WORDLIST_VERSION)
    }

    /// User-supplied replacement list; entries ending in `'` act as elision
    /// prefixes, like the builtin French clitics.
    pub fn custom(entries: impl IntoIterator<Item = String>, version: &str) -> Self {
        Self::from_entries(entries, version)
    }

    fn from_entries(entries: impl IntoIterator<Item = String>, version: &str) -> Self {
        let mut exact = HashSet::new();
        let mut prefixes = Vec::new();
        for raw in entries {
            let entry = raw.to_lowercase();
            if entry.ends_with('\'') {
                prefixes.push(entry.clone());
            }
            exact.insert(entry);
        }
        prefixes.sort();
        prefixes.dedup();
        Self { exact, prefixes, version: version.to_string() }
    }

    /// Case-insensitive membership; the typographic apostrophe folds to the
    /// ASCII one and elision prefixes match token heads.
    pub fn contains(&self, token: &str) -> bool {
        let normalized = token.to_lowercase().replace('\u{2019}', "'");
        if self.exact.contains(&normalized) {
            return true;
        }
        self.prefixes.iter().any(|p| normalized.starts_with(p.as_str()))
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stylometry::Language;

    #[test]
    fn english_membership() {
        let fw = FunctionWords::builtin(Language::En);
        assert!(fw.contains("The"));
        assert!(fw.contains("don\u{2019}t"));
        assert!(!fw.contains("bus"));
    }

    #[test]
    fn french_elision_prefixes() {
        let fw = FunctionWords::builtin(Language::Fr);
        assert!(fw.contains("l'homme"));
        assert!(fw.contains("L\u{2019}autobus"));
        assert!(fw.contains("qu'il"));
        assert!(!fw.contains("homme"));
    }

    #[test]
    fn lists_are_reasonably_sized() {
        assert!(FunctionWords::builtin(Language::En).len() >= 250);
        assert!(FunctionWords::builtin(Language::Fr).len() >= 250);
    }

    #[test]
    fn custom_list_overrides() {
        let fw = FunctionWords::custom(vec!["zork".to_string()], "user-1");
        assert!(fw.contains("ZORK"));
        assert!(!fw.contains("the"));
        assert_eq!(fw.version, "user-1");
    }
}
