//! Deterministic syllable counting for the readability metrics.
//!
//! English: count maximal vowel groups, then subtract a silent terminal "e"
//! unless it closes a consonant+"le" ending ("table" keeps both). French:
//! count vowel groups with adjacent vowels merged. Any word containing a
//! letter counts at least one syllable; digit-only tokens count zero.

use super::Language;

const EN_VOWELS: &str = "aeiouy";
const FR_VOWELS: &str = "aeiouyàâäéèêëîïôöùûüÿœæ";

pub fn count_syllables(word: &str, language: Language) -> usize {
    let letters: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return 0;
    }
    let vowels = match language {
        Language::En => EN_VOWELS,
        Language::Fr => FR_VOWELS,
    };
    let is_vowel = |c: char| vowels.contains(c);

    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &letters {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }

    if language == Language::En && groups > 1 {
        let n = letters.len();
        if letters[n - 1] == 'e' {
            let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
            if !consonant_le {
                groups -= 1;
            }
        }
    }
    groups.max(1)
}
