#pragma once

// Document statistics: word/sentence lengths, Zipf frequency, MTLD lexical
// diversity, FKGL readability.

#include "gazegen/lexicon.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazegen {

struct TextStats {
    std::size_t word_count = 0;
    double mean_word_length = 0.0;   // characters, punctuation included
    double mean_zipf = 0.0;          // over known words only
    std::size_t unknown_words = 0;   // words not in the lexicon
    double mean_sentence_length = 0.0; // words per sentence
    double mtld = 0.0;
    double fkgl = 0.0;
};

// Bidirectional MTLD with the canonical 0.72 threshold (strict '<').
// Requires >= 10 tokens and at least one completed factor per direction,
// otherwise throws NumericError ("insufficient repetition").
double mtld(std::span<const std::string> tokens, double threshold = 0.72);

// Vowel-group syllable count: maximal runs of a,e,i,o,u,y; a terminal
// silent 'e' (own group, not preceded by 'l') is dropped when the word has
// at least two groups; minimum 1. Operates on the clean word form.
std::size_t count_syllables(std::string_view word);

// Flesch-Kincaid grade level: 0.39*(words/sentences) + 11.8*(syllables/words)
// - 15.59. Words that are empty after punctuation stripping do not count.
double fkgl(std::string_view text);

TextStats compute_text_stats(std::string_view text, const FrequencyLexicon& lexicon);

} // namespace gazegen
