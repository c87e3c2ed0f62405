//! Embedded word list for synthetic pages.
//!
//! Short words dominate, as in running English prose: the length histogram
//! of the list peaks at three and four letters.

use rand::Rng;

pub const WORDS: &[&str] = &[
    // 1-2 letters
    "a", "I", "an", "as", "at", "be", "by", "do", "go", "he", "if", "in", "is", "it", "me", "my",
    "no", "of", "on", "or", "so", "to", "up", "us", "we",
    // 3 letters
    "all", "and", "any", "are", "ask", "bed", "big", "box", "but", "can", "car", "cat", "day",
    "did", "dog", "end", "eye", "far", "few", "for", "fun", "get", "had", "has", "her", "him",
    "his", "hot", "how", "its", "job", "let", "lot", "man", "may", "new", "not", "now", "old",
    "one", "our", "out", "own", "put", "red", "run", "sat", "saw", "say", "sea", "see", "she",
    "sun", "ten", "the", "too", "try", "two", "use", "war", "was", "way", "who", "why", "yes",
    "yet", "you", "Ann", "Tom", "The",
    // 4 letters
    "also", "away", "back", "been", "best", "book", "both", "came", "come", "cold", "dark",
    "door", "down", "each", "even", "face", "fact", "feel", "felt", "find", "five", "four",
    "from", "gave", "girl", "give", "good", "hand", "have", "head", "hear", "help", "here",
    "high", "home", "hope", "into", "just", "keep", "kind", "knew", "know", "last", "left",
    "life", "like", "line", "long", "look", "made", "make", "many", "mind", "more", "most",
    "much", "must", "name", "near", "need", "next", "nice", "once", "only", "open", "over",
    "part", "read", "room", "said", "same", "seen", "some", "soon", "such", "sure", "take",
    "tell", "than", "that", "them", "then", "they", "this", "time", "took", "told", "turn",
    "very", "wait", "walk", "want", "well", "went", "were", "what", "when", "with", "word",
    "work", "year", "your", "John", "Mary", "When",
    // 5 letters
    "about", "after", "again", "began", "being", "black", "bring", "could", "every", "first",
    "found", "great", "house", "large", "later", "light", "might", "never", "night", "often",
    "other", "place", "quite", "right", "round", "shall", "small", "sound", "still", "their",
    "there", "these", "thing", "think", "those", "three", "under", "until", "water", "where",
    "which", "while", "white", "whole", "would", "write", "young", "Peter",
    // 6 letters
    "almost", "always", "around", "before", "behind", "better", "called", "little", "looked",
    "mother", "nothing", "people", "really", "should", "turned", "window",
    // 7 letters
    "another", "because", "brother", "morning", "himself", "thought",
];

/// Picks a word uniformly from the list.
pub fn sample_word<R: Rng + ?Sized>(rng: &mut R) -> &'static str {
    WORDS[rng.random_range(0..WORDS.len())]
}

/// Picks a word no longer than `max_chars`, or `None` if nothing fits.
pub fn sample_word_within<R: Rng + ?Sized>(rng: &mut R, max_chars: usize) -> Option<&'static str> {
    if max_chars == 0 {
        return None;
    }
    // The list always contains one-letter words, so rejection terminates quickly.
    loop {
        let w = sample_word(rng);
        if w.len() <= max_chars {
            return Some(w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_distribution_peaks_at_three_or_four() {
        let mut counts = [0usize; 16];
        for w in WORDS {
            counts[w.len()] += 1;
            assert!(w.chars().all(|c| c.is_ascii_alphabetic()), "{w}");
        }
        let mode = (0..counts.len()).max_by_key(|&l| (counts[l], usize::MAX - l)).unwrap();
        assert!(mode == 3 || mode == 4, "mode {mode}");
    }
}
