#include "gazegen/lexicon.hpp"

#include "gazegen/error.hpp"
#include "gazegen/text_units.hpp"

#include <cmath>
#include <fstream>

namespace gazegen {

FrequencyLexicon::FrequencyLexicon(std::map<std::string, std::uint64_t> counts,
                                   std::uint64_t total)
    : counts_(std::move(counts)), total_(total) {
    std::uint64_t sum = 0;
    for (const auto& [word, c] : counts_) {
        if (c == 0)
            throw InputError("lexicon count for '" + word + "' must be >= 1");
        sum += c;
    }
    if (total_ < sum)
        throw InputError("lexicon total is smaller than the sum of counts");
    recompute_mean_zipf();
}

void FrequencyLexicon::recompute_mean_zipf() {
    if (counts_.empty() || total_ == 0) {
        mean_zipf_ = 0.0;
        return;
    }
    double acc = 0.0;
    for (const auto& [word, c] : counts_)
        acc += std::log10(static_cast<double>(c) / static_cast<double>(total_) * 1e9);
    mean_zipf_ = acc / static_cast<double>(counts_.size());
}

FrequencyLexicon FrequencyLexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open lexicon file: " + path);
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total_directive = 0;
    bool has_total = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.rfind("#total:", 0) == 0) {
            total_directive = std::stoull(line.substr(7));
            has_total = true;
            continue;
        }
        if (line[0] == '#')
            continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw InputError("malformed lexicon line (expected word<TAB>count): " + line);
        std::string word = line.substr(0, tab);
        std::uint64_t c = 0;
        try {
            c = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw InputError("bad count in lexicon line: " + line);
        }
        if (c == 0)
            throw InputError("lexicon count for '" + word + "' must be >= 1");
        counts[word] += c;
    }
    std::uint64_t sum = 0;
    for (const auto& [w, c] : counts)
        sum += c;
    return FrequencyLexicon(std::move(counts), has_total ? total_directive : sum);
}

void FrequencyLexicon::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write lexicon file: " + path);
    out << "#total:" << total_ << '\n';
    for (const auto& [word, c] : counts_)
        out << word << '\t' << c << '\n';
}

FrequencyLexicon FrequencyLexicon::from_corpus(std::string_view text) {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const Word& w : segment_words(text)) {
        std::string clean = clean_word_form(w.surface);
        if (clean.empty())
            continue;
        ++counts[clean];
        ++total;
    }
    return FrequencyLexicon(std::move(counts), total);
}

std::uint64_t FrequencyLexicon::count(std::string_view word) const {
    auto it = counts_.find(clean_word_form(word));
    return it == counts_.end() ? 0 : it->second;
}

bool FrequencyLexicon::contains(std::string_view word) const {
    return count(word) > 0;
}

ZipfScore zipf_score(std::string_view word, const FrequencyLexicon& lexicon,
                     double unknown_floor) {
    if (lexicon.empty())
        throw InputError("zipf_score: lexicon is empty");
    std::uint64_t c = lexicon.count(word);
    if (c == 0)
        return {unknown_floor, true};
    double per_billion = static_cast<double>(c) / static_cast<double>(lexicon.total()) * 1e9;
    return {std::log10(per_billion), false};
}

} // namespace gazegen
