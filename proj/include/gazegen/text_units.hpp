#pragma once

// Word segmentation, token/word alignment, and distribution of word-level
// values over subword tokens.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazegen {

// A whitespace-delimited word. Leading/trailing punctuation stays attached
// to the surface; char_begin/char_end are byte offsets into the source text.
struct Word {
    std::string surface;
    std::size_t index = 0;          // 0-based position in the document
    std::size_t char_begin = 0;     // [char_begin, char_end)
    std::size_t char_end = 0;
    std::size_t sentence_index = 0; // 0-based sentence id
};

// Mapping between subword tokens and the words they spell out.
// Tokens of one word are contiguous.
struct TokenAlignment {
    std::vector<std::size_t> token_to_word;              // per token
    std::vector<std::vector<std::size_t>> word_to_tokens; // per word
};

// Splits text into words (maximal non-whitespace runs). Sentence boundaries
// are '.', '!' or '?' directly followed by whitespace or end of text.
// Abbreviations are not special-cased. Empty text gives an empty list.
std::vector<Word> segment_words(std::string_view text);

// Assigns each token piece to the word whose characters it spells.
// A leading ' ' in a piece is a word-start marker, not text. Throws
// InputError naming the offending token index if the pieces do not
// reconstruct the words.
TokenAlignment align_tokens_to_words(std::span<const std::string> token_pieces,
                                     std::span<const Word> words);

// Distributes a word-level value uniformly over its subword tokens:
// n copies of value / n. Throws InputError if n_subwords == 0.
std::vector<double> distribute_word_value(double value, std::size_t n_subwords);

// Lowercased surface with leading/trailing punctuation removed (internal
// hyphens/apostrophes kept). Used for frequency/prevalence lookups.
std::string clean_word_form(std::string_view surface);

} // namespace gazegen
