#include "gazegen/decoder.hpp"

#include "gazegen/error.hpp"

#include <algorithm>
#include <cmath>

namespace gazegen {

namespace {

bool lex_less(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// total_score descending, ties to the lexicographically smallest id sequence.
bool better(const CandidateSequence& a, const CandidateSequence& b, double w) {
    double ta = a.total_score(w);
    double tb = b.total_score(w);
    if (ta != tb)
        return ta > tb;
    return lex_less(a.token_ids, b.token_ids);
}

struct Expander {
    const LanguageModel& lm;
    const GazePredictor* gaze;
    const DecoderConfig& config;
    std::size_t n_prompt_words;

    std::vector<TokenId> full_ids(const std::vector<TokenId>& generated) const {
        std::vector<TokenId> ids = config.prompt_ids;
        ids.insert(ids.end(), generated.begin(), generated.end());
        return ids;
    }

    // Builds a fully scored candidate for a generated id sequence. The gaze
    // score is recomputed over the whole word sequence so that a token
    // completing a word revises that word's prediction.
    CandidateSequence evaluate(std::vector<TokenId> generated, double token_score,
                               bool finished) const {
        CandidateSequence c;
        c.words = decode_words(lm.vocab(), full_ids(generated));
        c.context_words = n_prompt_words;
        if (!generated.empty() && n_prompt_words > 0) {
            const std::string& first = lm.vocab().piece(generated.front());
            bool continues_prompt_word = generated.front() != Vocabulary::kEos &&
                                         generated.front() != Vocabulary::kBos &&
                                         (first.empty() || first[0] != ' ');
            if (continues_prompt_word)
                c.context_words = n_prompt_words - 1;
        }
        c.token_ids = std::move(generated);
        c.token_score = token_score;
        c.finished = finished;

        if (gaze != nullptr) {
            std::size_t end = c.words.size();
            if (config.defer_partial_word && !finished && end > c.context_words)
                --end; // trailing word may still be extended
            c.gaze_score = gaze->sequence_score(
                std::span<const std::string>(c.words.data(), end), c.context_words);
        }
        return c;
    }
};

} // namespace

void DecoderConfig::validate() const {
    if (top_k < 1)
        throw InputError("decoder: top_k must be >= 1");
    if (beam_size < 1)
        throw InputError("decoder: beam_size must be >= 1");
    if (max_tokens < 1)
        throw InputError("decoder: max_tokens must be >= 1");
    if (std::abs(gaze_weight) > kGazeWeightMaxAbs)
        throw InputError("decoder: gaze weight must lie in [-5, +5]");
}

double total_score(const CandidateSequence& candidate, double gaze_weight) {
    return candidate.total_score(gaze_weight);
}

std::vector<CandidateSequence> beam_step(const std::vector<CandidateSequence>& beams,
                                         const LanguageModel& lm,
                                         const GazePredictor* gaze,
                                         const DecoderConfig& config) {
    bool any_unfinished = false;
    for (const auto& b : beams)
        any_unfinished = any_unfinished || !b.finished;
    if (!any_unfinished)
        throw InputError("beam_step: no unfinished beam to expand");

    std::size_t n_prompt_words = decode_words(lm.vocab(), config.prompt_ids).size();
    Expander expander{lm, gaze, config, n_prompt_words};

    std::vector<CandidateSequence> pool;
    for (const auto& beam : beams) {
        if (beam.finished) {
            pool.push_back(beam);
            continue;
        }
        std::vector<TokenId> context = expander.full_ids(beam.token_ids);
        std::vector<double> logprobs = lm.next_token_logprobs(context);

        std::vector<TokenId> order;
        order.reserve(logprobs.size());
        for (std::size_t id = 0; id < logprobs.size(); ++id) {
            TokenId tid = static_cast<TokenId>(id);
            // BOS is context-only; UNK stands for unknown input bytes and
            // is never generated.
            if (tid != Vocabulary::kBos && tid != Vocabulary::kUnk)
                order.push_back(tid);
        }
        std::size_t k = std::min(config.top_k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                          order.end(), [&](TokenId a, TokenId b) {
                              double la = logprobs[static_cast<std::size_t>(a)];
                              double lb = logprobs[static_cast<std::size_t>(b)];
                              if (la != lb)
                                  return la > lb;
                              return a < b;
                          });

        for (std::size_t j = 0; j < k; ++j) {
            TokenId id = order[j];
            std::vector<TokenId> child = beam.token_ids;
            child.push_back(id);
            pool.push_back(expander.evaluate(std::move(child),
                                             beam.token_score +
                                                 logprobs[static_cast<std::size_t>(id)],
                                             id == Vocabulary::kEos));
        }
    }

    std::size_t keep = std::min(config.beam_size, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep),
                      pool.end(), [&](const CandidateSequence& a, const CandidateSequence& b) {
                          return better(a, b, config.gaze_weight);
                      });
    pool.resize(keep);
    return pool;
}

GenerationResult generate(const LanguageModel& lm, const GazePredictor* gaze,
                          const DecoderConfig& config) {
    config.validate();

    std::size_t n_prompt_words = decode_words(lm.vocab(), config.prompt_ids).size();
    Expander expander{lm, gaze, config, n_prompt_words};

    std::vector<CandidateSequence> beams;
    beams.push_back(expander.evaluate({}, 0.0, false));

    GenerationResult result;
    for (std::size_t step = 1; step <= config.max_tokens; ++step) {
        bool any_unfinished = false;
        for (const auto& b : beams)
            any_unfinished = any_unfinished || !b.finished;
        if (!any_unfinished)
            break;
        beams = beam_step(beams, lm, gaze, config);

        const CandidateSequence* best = &beams.front();
        for (const auto& b : beams)
            if (better(b, *best, config.gaze_weight))
                best = &b;
        result.trace.push_back({step, best->token_score, best->gaze_score,
                                best->total_score(config.gaze_weight)});
    }

    // Plain max-total selection over the surviving candidates. Preferring
    // finished beams here would break beam soundness: a narrow beam that
    // pruned every EOS candidate could return an unfinished sequence whose
    // total exceeds the finished exhaustive optimum.
    const CandidateSequence* best = &beams.front();
    for (const auto& b : beams)
        if (better(b, *best, config.gaze_weight))
            best = &b;
    result.best = *best;
    result.text = detokenize(lm.vocab(), result.best.token_ids);
    return result;
}

GenerationResult exhaustive_generate(const LanguageModel& lm, const GazePredictor* gaze,
                                     const DecoderConfig& config) {
    config.validate();

    const std::size_t vocab_size = lm.vocab().size();
    double space = std::pow(static_cast<double>(vocab_size),
                            static_cast<double>(config.max_tokens));
    if (space > 1e6)
        throw InputError("exhaustive_generate: vocab^max_tokens exceeds the 1e6 guard");

    std::size_t n_prompt_words = decode_words(lm.vocab(), config.prompt_ids).size();
    Expander expander{lm, gaze, config, n_prompt_words};

    std::optional<CandidateSequence> best;
    auto consider = [&](CandidateSequence&& c) {
        if (!best || better(c, *best, config.gaze_weight))
            best = std::move(c);
    };

    std::vector<TokenId> ids;
    auto dfs = [&](auto&& self, double token_score) -> void {
        std::vector<double> logprobs = lm.next_token_logprobs(expander.full_ids(ids));
        for (std::size_t id = 0; id < vocab_size; ++id) {
            if (static_cast<TokenId>(id) == Vocabulary::kBos ||
                static_cast<TokenId>(id) == Vocabulary::kUnk)
                continue;
            double child_score = token_score + logprobs[id];
            ids.push_back(static_cast<TokenId>(id));
            if (static_cast<TokenId>(id) == Vocabulary::kEos) {
                consider(expander.evaluate(ids, child_score, true));
            } else if (ids.size() == config.max_tokens) {
                consider(expander.evaluate(ids, child_score, false));
            } else {
                self(self, child_score);
            }
            ids.pop_back();
        }
    };
    dfs(dfs, 0.0);

    GenerationResult result;
    if (!best)
        throw NumericError("exhaustive_generate: empty candidate space");
    result.best = std::move(*best);
    result.text = detokenize(lm.vocab(), result.best.token_ids);
    return result;
}

} // namespace gazegen
