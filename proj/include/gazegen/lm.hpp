#pragma once

// Language-model contract plus the built-in trainable n-gram model that
// supplies next-token log probabilities.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazegen {

using TokenId = std::int32_t;

// Piece <-> id bijection with reserved BOS/EOS/UNK ids. Pieces that begin
// with ' ' start a new word (GPT-2 style marker); others continue the
// current word. Ids are assigned deterministically: reserved ids first,
// then the remaining pieces sorted lexicographically.
class Vocabulary {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;

    static const std::string& bos_piece();
    static const std::string& eos_piece();
    static const std::string& unk_piece();

    Vocabulary();
    explicit Vocabulary(std::vector<std::string> pieces); // non-reserved pieces

    TokenId id(std::string_view piece) const;       // kUnk if absent
    bool contains(std::string_view piece) const;
    const std::string& piece(TokenId id) const;
    std::size_t size() const { return pieces_.size(); }

    const std::vector<std::string>& pieces() const { return pieces_; }

private:
    std::vector<std::string> pieces_;          // index = id
    std::map<std::string, TokenId, std::less<>> ids_;
};

// Whitespace-word tokenizer with a byte-pair subword fallback: every word
// is split into character pieces (word-start marker attached to the first)
// and the trained merges are applied in order. Frequent words end up as a
// single piece, rare ones as several, which keeps the token/word alignment
// path genuinely multi-token.
class SubwordTokenizer {
public:
    SubwordTokenizer() = default;

    // Learns up to n_merges byte-pair merges from the corpus text.
    // Ties break on the lexicographically smallest pair.
    static SubwordTokenizer train(std::string_view corpus, std::size_t n_merges);

    // All pieces the tokenizer can emit (character pieces + merge results).
    std::vector<std::string> piece_inventory() const;

    // Splits text into pieces. Characters never seen in training become the
    // UNK piece. Throws InputError on invalid UTF-8.
    std::vector<std::string> tokenize(std::string_view text) const;

    const std::vector<std::pair<std::string, std::string>>& merges() const {
        return merges_;
    }
    const std::vector<std::string>& alphabet() const { return alphabet_; }

    static SubwordTokenizer from_parts(std::vector<std::string> alphabet,
                                       std::vector<std::pair<std::string, std::string>> merges);

private:
    std::vector<std::string> alphabet_; // single-codepoint pieces (with markers)
    std::vector<std::pair<std::string, std::string>> merges_; // in training order

    std::vector<std::string> split_word(std::string_view word_with_marker) const;
};

// Reassembles pieces into word surfaces using the word-start marker.
// Context-only specials (BOS) are skipped; EOS ends nothing; UNK renders
// as its literal piece.
std::vector<std::string> decode_words(const Vocabulary& vocab, std::span<const TokenId> ids);
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

// Behavioral contract for next-token prediction, as consumed by the
// decoder. Implementations must be immutable and concurrency-safe.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual const Vocabulary& vocab() const = 0;
    // Dense natural-log probabilities over the full vocabulary, exp-summing
    // to 1. Context ids outside the vocabulary must be mapped to UNK by the
    // caller (tokenize does this).
    virtual std::vector<double> next_token_logprobs(std::span<const TokenId> context) const = 0;
};

// Add-alpha smoothed n-gram model with recursive backoff to lower orders
// on unseen contexts.
class NGramModel final : public LanguageModel {
public:
    // Counts every (context, token) event in the corpus at orders 1..n,
    // padding contexts with BOS at sequence starts. No synthetic EOS events
    // are added; append EOS to the sequences beforehand if termination
    // should be learnable. Throws InputError on an empty corpus, n < 1 or
    // alpha <= 0.
    static NGramModel train(const std::vector<std::vector<TokenId>>& corpus,
                            std::size_t order, double alpha, Vocabulary vocab,
                            SubwordTokenizer tokenizer = {});

    const Vocabulary& vocab() const override { return vocab_; }
    const SubwordTokenizer& tokenizer() const { return tokenizer_; }
    std::size_t order() const { return order_; }
    double alpha() const { return alpha_; }

    std::vector<double> next_token_logprobs(std::span<const TokenId> context) const override;

    // Sum of stepwise log probabilities log P(t_i | t_<i). Throws
    // InputError on an empty sequence.
    double sequence_logprob(std::span<const TokenId> tokens) const;

    std::vector<TokenId> tokenize_to_ids(std::string_view text) const;

    // Versioned JSON persistence (magic header "gazegen.ngram").
    void save(const std::string& path) const;
    static NGramModel load(const std::string& path);

private:
    NGramModel() = default;

    std::size_t order_ = 1;
    double alpha_ = 1.0;
    Vocabulary vocab_;
    SubwordTokenizer tokenizer_;

    struct ContextCounts {
        std::map<TokenId, std::uint64_t> by_token;
        std::uint64_t total = 0;
    };
    // tables_[o-1]: context (o-1 ids) -> counts, for o = 1..order.
    std::vector<std::map<std::vector<TokenId>, ContextCounts>> tables_;

    std::vector<double> logprobs_at_order(std::span<const TokenId> context,
                                          std::size_t order) const;
};

} // namespace gazegen
