#include "gazegen/text_units.hpp"

#include "gazegen/error.hpp"

#include <cctype>

namespace gazegen {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_sentence_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

// Edge punctuation for clean_word_form: ASCII punctuation except word-internal
// hyphens/apostrophes are stripped only at the edges anyway, so everything
// non-alphanumeric counts here.
bool is_edge_punct(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) != 0;
}

} // namespace

std::vector<Word> segment_words(std::string_view text) {
    std::vector<Word> words;
    std::size_t sentence = 0;
    bool sentence_open = false; // saw a word since the last boundary
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        while (i < text.size() && !is_space(text[i]))
            ++i;
        Word w;
        w.surface = std::string(text.substr(begin, i - begin));
        w.index = words.size();
        w.char_begin = begin;
        w.char_end = i;
        w.sentence_index = sentence;
        sentence_open = true;
        words.push_back(std::move(w));
        // A terminator at the end of the word run is followed by whitespace
        // or end of text by construction, so it closes the sentence.
        if (is_sentence_terminator(text[i - 1])) {
            ++sentence;
            sentence_open = false;
        }
    }
    (void)sentence_open;
    return words;
}

TokenAlignment align_tokens_to_words(std::span<const std::string> token_pieces,
                                     std::span<const Word> words) {
    TokenAlignment out;
    out.token_to_word.reserve(token_pieces.size());
    out.word_to_tokens.resize(words.size());

    std::size_t word_i = 0; // current word
    std::size_t char_j = 0; // position inside words[word_i].surface

    for (std::size_t t = 0; t < token_pieces.size(); ++t) {
        std::string_view piece = token_pieces[t];
        // Strip the word-start marker (leading spaces).
        std::size_t marker = 0;
        while (marker < piece.size() && piece[marker] == ' ')
            ++marker;
        bool starts_word = marker > 0;
        piece.remove_prefix(marker);

        if (piece.empty())
            throw InputError("align_tokens_to_words: token " + std::to_string(t) +
                             " is empty after removing whitespace markers");
        if (word_i >= words.size())
            throw InputError("align_tokens_to_words: token " + std::to_string(t) +
                             " extends past the last word");
        if (starts_word && char_j != 0)
            throw InputError("align_tokens_to_words: token " + std::to_string(t) +
                             " starts a word in the middle of \"" +
                             words[word_i].surface + "\"");

        std::size_t assigned = word_i;
        for (char c : piece) {
            if (word_i >= words.size())
                throw InputError("align_tokens_to_words: token " + std::to_string(t) +
                                 " extends past the last word");
            const std::string& surf = words[word_i].surface;
            if (surf[char_j] != c)
                throw InputError("align_tokens_to_words: token " + std::to_string(t) +
                                 " does not match word \"" + surf + "\"");
            if (++char_j == surf.size()) {
                ++word_i;
                char_j = 0;
            }
        }
        out.token_to_word.push_back(assigned);
        out.word_to_tokens[assigned].push_back(t);
    }
    if (word_i != words.size() || char_j != 0)
        throw InputError("align_tokens_to_words: tokens do not cover all words");
    return out;
}

std::vector<double> distribute_word_value(double value, std::size_t n_subwords) {
    if (n_subwords == 0)
        throw InputError("distribute_word_value: n_subwords must be >= 1");
    return std::vector<double>(n_subwords, value / static_cast<double>(n_subwords));
}

std::string clean_word_form(std::string_view surface) {
    std::size_t begin = 0;
    std::size_t end = surface.size();
    while (begin < end && is_edge_punct(surface[begin]))
        ++begin;
    while (end > begin && is_edge_punct(surface[end - 1]))
        --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        char c = surface[i];
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

} // namespace gazegen
