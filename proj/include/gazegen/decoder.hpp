#pragma once

// Gaze-guided beam search: candidates are scored by
// token_score + gaze_weight * gaze_score, where the token score is the
// cumulative LM log probability and the gaze score is the summed predicted
// normalized FPRT over the generated words. An exhaustive-search oracle
// verifies the beam on tiny instances.

#include "gazegen/gaze_model.hpp"
#include "gazegen/lm.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gazegen {

struct CandidateSequence {
    std::vector<TokenId> token_ids;      // generated tokens (prompt excluded)
    std::vector<std::string> words;      // decoded words incl. prompt context
    std::size_t context_words = 0;       // words[0..context_words) come from the prompt
    double token_score = 0.0;            // cumulative log probability
    double gaze_score = 0.0;             // summed normalized FPRT
    bool finished = false;               // ended with EOS

    double total_score(double gaze_weight) const {
        return token_score + gaze_weight * gaze_score;
    }
};

struct DecoderConfig {
    std::size_t top_k = 8;       // candidates per beam handed to the gaze model
    std::size_t beam_size = 8;
    double gaze_weight = 0.0;
    std::size_t max_tokens = 64;
    std::vector<TokenId> prompt_ids;
    // Defer the trailing (possibly incomplete) word's gaze contribution
    // until the candidate finishes. Off by default: partial words are
    // scored as-is and beam search absorbs the noise.
    bool defer_partial_word = false;

    void validate() const;
};

// |w| beyond this is known to produce repetitive failure modes; the CLI
// warns but proceeds. Values beyond the hard range are rejected.
constexpr double kGazeWeightWarnAbs = 3.0;
constexpr double kGazeWeightMaxAbs = 5.0;

struct StepTrace {
    std::size_t step = 0;
    double token_score = 0.0;
    double gaze_score = 0.0;
    double total_score = 0.0;
};

struct GenerationResult {
    CandidateSequence best;
    std::string text; // detokenized generated tokens
    std::vector<StepTrace> trace;
};

double total_score(const CandidateSequence& candidate, double gaze_weight);

// One beam-search step: every unfinished beam is expanded with its top-k
// next tokens by LM log probability (BOS and UNK are never proposed),
// gaze scores are recomputed over the full candidate word sequence, and
// the top beam_size candidates by total score survive. Ties break on the
// lexicographically smallest token-id sequence. Finished beams carry over
// unchanged.
std::vector<CandidateSequence> beam_step(const std::vector<CandidateSequence>& beams,
                                         const LanguageModel& lm,
                                         const GazePredictor* gaze,
                                         const DecoderConfig& config);

// Runs beam_step until every beam has finished or max_tokens is reached;
// returns the surviving candidate with the highest total score plus a
// per-step score trace of the current best candidate.
GenerationResult generate(const LanguageModel& lm, const GazePredictor* gaze,
                          const DecoderConfig& config);

// Exact argmax of total score over every completed candidate
// (EOS-terminated sequences up to max_tokens, plus EOS-free sequences of
// exactly max_tokens), with the same tie-breaking as generate. Full-coverage
// beam search reproduces this result exactly; any narrower beam is bounded
// by it. Guarded to vocab^max_tokens <= 1e6.
GenerationResult exhaustive_generate(const LanguageModel& lm, const GazePredictor* gaze,
                                     const DecoderConfig& config);

} // namespace gazegen
