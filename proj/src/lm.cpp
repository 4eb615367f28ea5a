#include "gazegen/lm.hpp"

#include "gazegen/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace gazegen {

namespace {

// Splits a UTF-8 string into code point substrings. Throws on malformed
// byte sequences (these are the "untokenizable bytes" of the decoder
// contract).
std::vector<std::string> split_utf8(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char b = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        if (b < 0x80)
            len = 1;
        else if ((b & 0xE0) == 0xC0)
            len = 2;
        else if ((b & 0xF0) == 0xE0)
            len = 3;
        else if ((b & 0xF8) == 0xF0)
            len = 4;
        else
            throw InputError("invalid UTF-8 byte at offset " + std::to_string(i));
        if (i + len > s.size())
            throw InputError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80)
                throw InputError("invalid UTF-8 continuation at offset " +
                                 std::to_string(i + k));
        out.emplace_back(s.substr(i, len));
        i += len;
    }
    return out;
}

std::vector<std::string> whitespace_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t begin = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        if (i > begin)
            words.emplace_back(text.substr(begin, i - begin));
    }
    return words;
}

} // namespace

// ---------------------------------------------------------------------------
// Vocabulary

const std::string& Vocabulary::bos_piece() {
    static const std::string p = "<bos>";
    return p;
}
const std::string& Vocabulary::eos_piece() {
    static const std::string p = "<eos>";
    return p;
}
const std::string& Vocabulary::unk_piece() {
    static const std::string p = "<unk>";
    return p;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> pieces) {
    pieces_ = {bos_piece(), eos_piece(), unk_piece()};
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
    for (std::string& p : pieces) {
        if (p == bos_piece() || p == eos_piece() || p == unk_piece())
            continue;
        pieces_.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i)
        ids_.emplace(pieces_[i], static_cast<TokenId>(i));
}

TokenId Vocabulary::id(std::string_view piece) const {
    auto it = ids_.find(piece);
    return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view piece) const {
    return ids_.find(piece) != ids_.end();
}

const std::string& Vocabulary::piece(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= pieces_.size())
        throw InputError("token id " + std::to_string(id) + " out of range");
    return pieces_[static_cast<std::size_t>(id)];
}

// ---------------------------------------------------------------------------
// SubwordTokenizer

SubwordTokenizer SubwordTokenizer::train(std::string_view corpus, std::size_t n_merges) {
    SubwordTokenizer tok;

    std::map<std::string, std::uint64_t> word_freq;
    for (std::string& w : whitespace_words(corpus))
        ++word_freq[std::move(w)];

    // Symbol sequences per distinct word; the first symbol carries the
    // word-start marker.
    std::vector<std::pair<std::vector<std::string>, std::uint64_t>> words;
    std::map<std::string, bool> alphabet;
    words.reserve(word_freq.size());
    for (const auto& [word, freq] : word_freq) {
        std::vector<std::string> syms = split_utf8(word);
        if (syms.empty())
            continue;
        syms[0] = " " + syms[0];
        for (const std::string& s : syms)
            alphabet[s] = true;
        words.emplace_back(std::move(syms), freq);
    }
    for (const auto& [sym, _] : alphabet)
        tok.alphabet_.push_back(sym);

    for (std::size_t m = 0; m < n_merges; ++m) {
        std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
        for (const auto& [syms, freq] : words)
            for (std::size_t i = 0; i + 1 < syms.size(); ++i)
                pair_counts[{syms[i], syms[i + 1]}] += freq;
        if (pair_counts.empty())
            break;
        // Highest count wins; std::map order makes the lexicographically
        // smallest pair the tie-breaker.
        auto best = pair_counts.begin();
        for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
            if (it->second > best->second)
                best = it;
        if (best->second < 2)
            break;
        const auto [left, right] = best->first;
        tok.merges_.emplace_back(left, right);
        std::string merged = left + right;
        for (auto& [syms, freq] : words) {
            std::vector<std::string> next;
            next.reserve(syms.size());
            for (std::size_t i = 0; i < syms.size(); ++i) {
                if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
                    next.push_back(merged);
                    ++i;
                } else {
                    next.push_back(syms[i]);
                }
            }
            syms = std::move(next);
        }
    }
    return tok;
}

SubwordTokenizer SubwordTokenizer::from_parts(
    std::vector<std::string> alphabet,
    std::vector<std::pair<std::string, std::string>> merges) {
    SubwordTokenizer tok;
    tok.alphabet_ = std::move(alphabet);
    tok.merges_ = std::move(merges);
    return tok;
}

std::vector<std::string> SubwordTokenizer::piece_inventory() const {
    std::vector<std::string> pieces = alphabet_;
    for (const auto& [l, r] : merges_)
        pieces.push_back(l + r);
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
    return pieces;
}

std::vector<std::string> SubwordTokenizer::split_word(std::string_view word_with_marker) const {
    // word_with_marker starts with the ' ' marker glued to the first char.
    std::vector<std::string> syms = split_utf8(word_with_marker.substr(1));
    if (syms.empty())
        return {};
    syms[0] = " " + syms[0];

    std::unordered_map<std::string, std::size_t> rank;
    // rank map built lazily per call keeps the tokenizer immutable; words
    // are short so the cost is negligible at this scale.
    for (std::size_t r = 0; r < merges_.size(); ++r)
        rank.emplace(merges_[r].first + "\x1f" + merges_[r].second, r);

    while (syms.size() > 1) {
        std::size_t best_rank = std::numeric_limits<std::size_t>::max();
        std::size_t best_pos = 0;
        for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
            auto it = rank.find(syms[i] + "\x1f" + syms[i + 1]);
            if (it != rank.end() && it->second < best_rank) {
                best_rank = it->second;
                best_pos = i;
            }
        }
        if (best_rank == std::numeric_limits<std::size_t>::max())
            break;
        syms[best_pos] += syms[best_pos + 1];
        syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
    }
    return syms;
}

std::vector<std::string> SubwordTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (const std::string& word : whitespace_words(text)) {
        for (std::string& piece : split_word(" " + word))
            out.push_back(std::move(piece));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decoding helpers

std::vector<std::string> decode_words(const Vocabulary& vocab, std::span<const TokenId> ids) {
    std::vector<std::string> words;
    for (TokenId id : ids) {
        if (id == Vocabulary::kBos || id == Vocabulary::kEos)
            continue;
        const std::string& piece = vocab.piece(id);
        if (!piece.empty() && piece[0] == ' ') {
            words.push_back(piece.substr(1));
        } else if (words.empty()) {
            words.push_back(piece);
        } else {
            words.back() += piece;
        }
    }
    return words;
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
    std::string text;
    for (const std::string& w : decode_words(vocab, ids)) {
        if (!text.empty())
            text += ' ';
        text += w;
    }
    return text;
}

// ---------------------------------------------------------------------------
// NGramModel

NGramModel NGramModel::train(const std::vector<std::vector<TokenId>>& corpus,
                             std::size_t order, double alpha, Vocabulary vocab,
                             SubwordTokenizer tokenizer) {
    if (corpus.empty())
        throw InputError("train_ngram: corpus is empty");
    if (order < 1)
        throw InputError("train_ngram: order must be >= 1");
    if (!(alpha > 0.0))
        throw InputError("train_ngram: alpha must be > 0");

    NGramModel model;
    model.order_ = order;
    model.alpha_ = alpha;
    model.vocab_ = std::move(vocab);
    model.tokenizer_ = std::move(tokenizer);
    model.tables_.resize(order);

    for (const auto& seq : corpus) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            TokenId token = seq[t];
            if (token < 0 || static_cast<std::size_t>(token) >= model.vocab_.size())
                token = Vocabulary::kUnk;
            for (std::size_t o = 1; o <= order; ++o) {
                std::vector<TokenId> context;
                context.reserve(o - 1);
                for (std::size_t back = o - 1; back >= 1; --back) {
                    if (t >= back) {
                        TokenId c = seq[t - back];
                        if (c < 0 || static_cast<std::size_t>(c) >= model.vocab_.size())
                            c = Vocabulary::kUnk;
                        context.push_back(c);
                    } else {
                        context.push_back(Vocabulary::kBos);
                    }
                }
                auto& slot = model.tables_[o - 1][context];
                ++slot.by_token[token];
                ++slot.total;
            }
        }
    }
    return model;
}

std::vector<double> NGramModel::logprobs_at_order(std::span<const TokenId> context,
                                                  std::size_t order) const {
    const std::size_t vocab_size = vocab_.size();
    const double v = static_cast<double>(vocab_size);
    if (order == 1) {
        const auto it = tables_[0].find(std::vector<TokenId>{});
        const ContextCounts* counts = it == tables_[0].end() ? nullptr : &it->second;
        double total = counts ? static_cast<double>(counts->total) : 0.0;
        double denom = std::log(total + alpha_ * v);
        std::vector<double> out(vocab_size);
        for (std::size_t id = 0; id < vocab_size; ++id) {
            double c = 0.0;
            if (counts) {
                auto jt = counts->by_token.find(static_cast<TokenId>(id));
                if (jt != counts->by_token.end())
                    c = static_cast<double>(jt->second);
            }
            out[id] = std::log(c + alpha_) - denom;
        }
        return out;
    }

    // Key: last (order-1) context ids, BOS-padded on the left.
    std::vector<TokenId> key;
    key.reserve(order - 1);
    std::size_t need = order - 1;
    for (std::size_t i = context.size() < need ? need - context.size() : 0; i > 0; --i)
        key.push_back(Vocabulary::kBos);
    std::size_t start = context.size() > need ? context.size() - need : 0;
    for (std::size_t i = start; i < context.size(); ++i) {
        TokenId c = context[i];
        if (c < 0 || static_cast<std::size_t>(c) >= vocab_size)
            c = Vocabulary::kUnk;
        key.push_back(c);
    }

    auto it = tables_[order - 1].find(key);
    if (it == tables_[order - 1].end() || it->second.total == 0)
        return logprobs_at_order(context, order - 1); // backoff

    const ContextCounts& counts = it->second;
    double denom = std::log(static_cast<double>(counts.total) + alpha_ * v);
    std::vector<double> out(vocab_size);
    for (std::size_t id = 0; id < vocab_size; ++id) {
        double c = 0.0;
        auto jt = counts.by_token.find(static_cast<TokenId>(id));
        if (jt != counts.by_token.end())
            c = static_cast<double>(jt->second);
        out[id] = std::log(c + alpha_) - denom;
    }
    return out;
}

std::vector<double> NGramModel::next_token_logprobs(std::span<const TokenId> context) const {
    return logprobs_at_order(context, order_);
}

double NGramModel::sequence_logprob(std::span<const TokenId> tokens) const {
    if (tokens.empty())
        throw InputError("sequence_logprob: empty sequence");
    double score = 0.0;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        std::vector<double> lp = next_token_logprobs(tokens.subspan(0, t));
        TokenId id = tokens[t];
        if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size())
            id = Vocabulary::kUnk;
        score += lp[static_cast<std::size_t>(id)];
    }
    return score;
}

std::vector<TokenId> NGramModel::tokenize_to_ids(std::string_view text) const {
    std::vector<TokenId> ids;
    for (const std::string& piece : tokenizer_.tokenize(text))
        ids.push_back(vocab_.id(piece));
    return ids;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {
constexpr const char* kNgramMagic = "gazegen.ngram";
constexpr int kNgramVersion = 1;

std::string context_key(const std::vector<TokenId>& ctx) {
    std::string key;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (i)
            key += ' ';
        key += std::to_string(ctx[i]);
    }
    return key;
}

std::vector<TokenId> parse_context_key(const std::string& key) {
    std::vector<TokenId> ctx;
    std::size_t i = 0;
    while (i < key.size()) {
        std::size_t j = key.find(' ', i);
        if (j == std::string::npos)
            j = key.size();
        ctx.push_back(static_cast<TokenId>(std::stol(key.substr(i, j - i))));
        i = j + 1;
    }
    return ctx;
}
} // namespace

void NGramModel::save(const std::string& path) const {
    nlohmann::json j;
    j["format"] = kNgramMagic;
    j["version"] = kNgramVersion;
    j["order"] = order_;
    j["alpha"] = alpha_;

    nlohmann::json pieces = nlohmann::json::array();
    for (std::size_t id = 3; id < vocab_.size(); ++id)
        pieces.push_back(vocab_.piece(static_cast<TokenId>(id)));
    j["pieces"] = std::move(pieces);

    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [l, r] : tokenizer_.merges())
        merges.push_back(nlohmann::json::array({l, r}));
    j["tokenizer"] = {{"alphabet", tokenizer_.alphabet()}, {"merges", std::move(merges)}};

    nlohmann::json tables = nlohmann::json::array();
    for (const auto& table : tables_) {
        nlohmann::json jt = nlohmann::json::object();
        for (const auto& [ctx, counts] : table) {
            nlohmann::json jc = nlohmann::json::object();
            for (const auto& [tid, c] : counts.by_token)
                jc[std::to_string(tid)] = c;
            jt[context_key(ctx)] = std::move(jc);
        }
        tables.push_back(std::move(jt));
    }
    j["tables"] = std::move(tables);

    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write model file: " + path);
    out << j.dump(1) << '\n';
}

NGramModel NGramModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed model file " + path + ": " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kNgramMagic)
        throw InputError(path + " is not a gazegen n-gram model file");
    if (j.value("version", 0) != kNgramVersion)
        throw InputError("unsupported n-gram model version in " + path);

    NGramModel model;
    model.order_ = j.at("order").get<std::size_t>();
    model.alpha_ = j.at("alpha").get<double>();
    model.vocab_ = Vocabulary(j.at("pieces").get<std::vector<std::string>>());

    std::vector<std::pair<std::string, std::string>> merges;
    for (const auto& m : j.at("tokenizer").at("merges"))
        merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
    model.tokenizer_ = SubwordTokenizer::from_parts(
        j.at("tokenizer").at("alphabet").get<std::vector<std::string>>(), std::move(merges));

    model.tables_.resize(model.order_);
    const auto& tables = j.at("tables");
    if (tables.size() != model.order_)
        throw InputError("model file has wrong table count: " + path);
    for (std::size_t o = 0; o < model.order_; ++o) {
        for (const auto& [key, jc] : tables[o].items()) {
            ContextCounts counts;
            for (const auto& [tid, c] : jc.items()) {
                std::uint64_t n = c.get<std::uint64_t>();
                counts.by_token[static_cast<TokenId>(std::stol(tid))] = n;
                counts.total += n;
            }
            model.tables_[o][parse_context_key(key)] = std::move(counts);
        }
    }
    return model;
}

} // namespace gazegen
