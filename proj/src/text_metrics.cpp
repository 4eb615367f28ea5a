#include "gazegen/text_metrics.hpp"

#include "gazegen/error.hpp"
#include "gazegen/text_units.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace gazegen {

namespace {

// One directional MTLD pass. Returns tokens / factor_total, with the
// remainder contributing (1 - TTR) / (1 - threshold) as a partial factor.
// completed is set to the number of full factors.
double mtld_pass(std::span<const std::string> tokens, double threshold,
                 std::size_t& completed) {
    completed = 0;
    double factor_total = 0.0;
    std::unordered_set<std::string_view> types;
    std::size_t factor_tokens = 0;
    for (const std::string& tok : tokens) {
        types.insert(tok);
        ++factor_tokens;
        double ttr = static_cast<double>(types.size()) / static_cast<double>(factor_tokens);
        if (ttr < threshold) {
            factor_total += 1.0;
            ++completed;
            types.clear();
            factor_tokens = 0;
        }
    }
    if (factor_tokens > 0) {
        double ttr = static_cast<double>(types.size()) / static_cast<double>(factor_tokens);
        factor_total += (1.0 - ttr) / (1.0 - threshold);
    }
    if (completed == 0)
        throw NumericError("mtld: insufficient repetition (no completed factor)");
    return static_cast<double>(tokens.size()) / factor_total;
}

bool is_vowel(char c) {
    switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
        return true;
    default:
        return false;
    }
}

} // namespace

double mtld(std::span<const std::string> tokens, double threshold) {
    if (tokens.size() < 10)
        throw NumericError("mtld: need at least 10 tokens, got " +
                           std::to_string(tokens.size()));
    std::size_t fwd_factors = 0;
    double forward = mtld_pass(tokens, threshold, fwd_factors);
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    std::size_t bwd_factors = 0;
    double backward = mtld_pass(reversed, threshold, bwd_factors);
    return 0.5 * (forward + backward);
}

std::size_t count_syllables(std::string_view word) {
    std::string clean = clean_word_form(word);
    if (clean.empty())
        throw InputError("count_syllables: word is empty after punctuation stripping");

    std::size_t groups = 0;
    bool in_group = false;
    std::size_t last_group_begin = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (is_vowel(clean[i])) {
            if (!in_group) {
                ++groups;
                in_group = true;
                last_group_begin = i;
            }
        } else {
            in_group = false;
        }
    }
    // Terminal silent 'e': the final character is an 'e' forming its own
    // group, the word has another group, and the 'e' is not part of a final
    // "-le" (where it is pronounced).
    if (groups >= 2 && clean.back() == 'e' && last_group_begin == clean.size() - 1 &&
        clean[clean.size() - 2] != 'l') {
        --groups;
    }
    return std::max<std::size_t>(groups, 1);
}

double fkgl(std::string_view text) {
    std::vector<Word> words = segment_words(text);
    if (words.empty())
        throw InputError("fkgl: empty text");

    std::size_t n_sentences = words.back().sentence_index + 1;
    std::size_t n_words = 0;
    std::size_t n_syllables = 0;
    for (const Word& w : words) {
        std::string clean = clean_word_form(w.surface);
        if (clean.empty())
            continue; // pure punctuation
        ++n_words;
        n_syllables += count_syllables(clean);
    }
    if (n_words == 0)
        throw InputError("fkgl: no countable words in text");
    double words_per_sentence =
        static_cast<double>(n_words) / static_cast<double>(n_sentences);
    double syllables_per_word =
        static_cast<double>(n_syllables) / static_cast<double>(n_words);
    return 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59;
}

TextStats compute_text_stats(std::string_view text, const FrequencyLexicon& lexicon) {
    std::vector<Word> words = segment_words(text);
    if (words.empty())
        throw InputError("compute_text_stats: empty text");

    TextStats stats;
    stats.word_count = words.size();

    double length_sum = 0.0;
    double zipf_sum = 0.0;
    std::size_t zipf_n = 0;
    std::vector<std::string> clean_tokens;
    clean_tokens.reserve(words.size());
    for (const Word& w : words) {
        length_sum += static_cast<double>(w.surface.size());
        ZipfScore z = zipf_score(w.surface, lexicon);
        if (z.unknown) {
            ++stats.unknown_words;
        } else {
            zipf_sum += z.value;
            ++zipf_n;
        }
        std::string clean = clean_word_form(w.surface);
        if (!clean.empty())
            clean_tokens.push_back(std::move(clean));
    }
    stats.mean_word_length = length_sum / static_cast<double>(words.size());
    stats.mean_zipf = zipf_n ? zipf_sum / static_cast<double>(zipf_n) : 0.0;

    std::size_t n_sentences = words.back().sentence_index + 1;
    stats.mean_sentence_length =
        static_cast<double>(words.size()) / static_cast<double>(n_sentences);

    stats.mtld = mtld(clean_tokens);
    stats.fkgl = fkgl(text);
    return stats;
}

} // namespace gazegen
