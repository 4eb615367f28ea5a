#pragma once

// Word-frequency lexicon backing Zipf scores and the gaze-model frequency
// features. Keys are clean word forms (lowercased, edge punctuation
// stripped).

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace gazegen {

class FrequencyLexicon {
public:
    FrequencyLexicon() = default;

    // counts: clean form -> occurrences. total may exceed the sum of the
    // listed counts (the lexicon can be a sample of a larger corpus).
    FrequencyLexicon(std::map<std::string, std::uint64_t> counts, std::uint64_t total);

    // Loads the TSV format: an optional "#total:<N>" line, then
    // "word<TAB>count" lines. Without the directive, total = sum of counts.
    static FrequencyLexicon load(const std::string& path);
    void save(const std::string& path) const;

    // Builds a lexicon by counting clean word forms in a text corpus.
    static FrequencyLexicon from_corpus(std::string_view text);

    bool empty() const { return counts_.empty(); }
    std::size_t size() const { return counts_.size(); }
    std::uint64_t total() const { return total_; }

    // Count of the clean form of `word` (0 if unknown). The argument is
    // cleaned internally, so raw surfaces are fine.
    std::uint64_t count(std::string_view word) const;
    bool contains(std::string_view word) const;

    // Unweighted mean Zipf score over all lexicon entries; used as the
    // padding value for missing context words in gaze features.
    double mean_zipf() const { return mean_zipf_; }

    const std::map<std::string, std::uint64_t>& counts() const { return counts_; }

private:
    std::map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
    double mean_zipf_ = 0.0;

    void recompute_mean_zipf();
};

// Zipf score: log10 of occurrences per billion tokens. Unknown words get
// the configured floor with the `unknown` flag set.
struct ZipfScore {
    double value = 0.0;
    bool unknown = false;
};

constexpr double kZipfUnknownFloor = 1.0;

ZipfScore zipf_score(std::string_view word, const FrequencyLexicon& lexicon,
                     double unknown_floor = kZipfUnknownFloor);

} // namespace gazegen
