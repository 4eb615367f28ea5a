#pragma once

// Shared test doubles: deterministic hand-built language models and gaze
// predictors for decoder/oracle tests.

#include "gazegen/decoder.hpp"
#include "gazegen/gaze_model.hpp"
#include "gazegen/lm.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace gazegen::testing {

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 1469598103934665603ULL) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 1469598103934665603ULL) {
    return fnv1a(s.data(), s.size(), seed);
}

// Vocabulary of n single-letter word pieces " a", " b", ... (every token is
// a full word), plus the reserved specials.
inline Vocabulary letter_vocab(std::size_t n_letters) {
    std::vector<std::string> pieces;
    for (std::size_t i = 0; i < n_letters; ++i)
        pieces.push_back(std::string(" ") + static_cast<char>('a' + i));
    return Vocabulary(std::move(pieces));
}

// LM with explicit conditional distributions; contexts not listed fall back
// to the default distribution.
class TableLM final : public LanguageModel {
public:
    TableLM(Vocabulary vocab, std::vector<double> default_probs)
        : vocab_(std::move(vocab)), default_probs_(std::move(default_probs)) {}

    void set_context(std::vector<TokenId> context, std::vector<double> probs) {
        table_[std::move(context)] = std::move(probs);
    }

    const Vocabulary& vocab() const override { return vocab_; }

    std::vector<double> next_token_logprobs(std::span<const TokenId> context) const override {
        std::vector<TokenId> key(context.begin(), context.end());
        auto it = table_.find(key);
        const std::vector<double>& probs = it == table_.end() ? default_probs_ : it->second;
        std::vector<double> out(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i)
            out[i] = std::log(probs[i]);
        return out;
    }

private:
    Vocabulary vocab_;
    std::vector<double> default_probs_;
    std::map<std::vector<TokenId>, std::vector<double>> table_;
};

// Deterministic pseudo-random LM: each context gets a fixed random
// distribution derived from (seed, context) so repeated queries agree.
class HashLM final : public LanguageModel {
public:
    HashLM(Vocabulary vocab, std::uint64_t seed) : vocab_(std::move(vocab)), seed_(seed) {}

    const Vocabulary& vocab() const override { return vocab_; }

    std::vector<double> next_token_logprobs(std::span<const TokenId> context) const override {
        std::uint64_t h = fnv1a(context.data(), context.size() * sizeof(TokenId), seed_);
        std::mt19937_64 rng(h);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        std::vector<double> probs(vocab_.size());
        double total = 0.0;
        for (double& p : probs) {
            p = u(rng);
            total += p;
        }
        std::vector<double> out(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i)
            out[i] = std::log(probs[i] / total);
        return out;
    }

private:
    Vocabulary vocab_;
    std::uint64_t seed_;
};

// Gaze predictor assigning each word a fixed pseudo-random value in
// [-scale, scale]; the sequence score is the sum over the scored range.
class HashGaze final : public GazePredictor {
public:
    explicit HashGaze(std::uint64_t seed, double scale = 1.0) : seed_(seed), scale_(scale) {}

    double word_value(const std::string& word) const {
        std::uint64_t h = fnv1a(word, seed_);
        double unit = static_cast<double>(h % 1000003ULL) / 1000003.0; // [0,1)
        return (2.0 * unit - 1.0) * scale_;
    }

    double sequence_score(std::span<const std::string> words,
                          std::size_t context_words) const override {
        double sum = 0.0;
        for (std::size_t i = context_words; i < words.size(); ++i)
            sum += word_value(words[i]);
        return sum;
    }

private:
    std::uint64_t seed_;
    double scale_;
};

class ConstGaze final : public GazePredictor {
public:
    explicit ConstGaze(double per_word) : per_word_(per_word) {}
    double sequence_score(std::span<const std::string> words,
                          std::size_t context_words) const override {
        return per_word_ * static_cast<double>(words.size() - context_words);
    }

private:
    double per_word_;
};

} // namespace gazegen::testing
