#pragma once

// Gaze-predictor contract plus the built-in feature-based linear regression
// predicting z-normalized word FPRT from preceding context only.

#include "gazegen/lexicon.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazegen {

// Lexical features of a word and its two predecessors. Missing predecessors
// are padded with length 0 and the lexicon's mean Zipf score.
struct GazeFeatures {
    double len_0 = 0.0;
    double len_1 = 0.0;
    double len_2 = 0.0;
    double zipf_0 = 0.0;
    double zipf_1 = 0.0;
    double zipf_2 = 0.0;

    static constexpr std::size_t kCount = 6;
    std::array<double, kCount> as_array() const {
        return {len_0, len_1, len_2, zipf_0, zipf_1, zipf_2};
    }
    static const char* name(std::size_t i);
};

// z-score parameters of the training FPRT distribution (population sigma).
struct ZScore {
    double mu = 0.0;
    double sigma = 1.0;

    double apply(double v) const { return (v - mu) / sigma; }
    double invert(double z) const { return z * sigma + mu; }
};

// Requires >= 2 values with nonzero spread; throws NumericError otherwise.
ZScore zscore_fit(std::span<const double> values);

GazeFeatures extract_features(std::span<const std::string> words, std::size_t i,
                              const FrequencyLexicon& lexicon);

// Behavioral contract used by the decoder: the summed prediction for
// words[context_words..n). Predictions for a word may depend only on that
// word and earlier ones.
class GazePredictor {
public:
    virtual ~GazePredictor() = default;
    virtual double sequence_score(std::span<const std::string> words,
                                  std::size_t context_words) const = 0;
};

// OLS regression on the six lexical features, targets z-normalized FPRT.
class LinearGazeModel final : public GazePredictor {
public:
    struct TrainingRecord {
        GazeFeatures features;
        double fprt_ms = 0.0;
    };

    LinearGazeModel() = default;
    LinearGazeModel(std::array<double, GazeFeatures::kCount> weights, double intercept,
                    ZScore normalization, const FrequencyLexicon* lexicon = nullptr);

    // Ordinary least squares on z-normalized targets. Needs more rows than
    // parameters (>= 7) and a full-rank design; a rank-deficient design
    // raises NumericError naming the collinear columns.
    static LinearGazeModel fit(std::span<const TrainingRecord> records);

    double predict_word_fprt(std::span<const std::string> words, std::size_t i,
                             const FrequencyLexicon& lexicon) const;
    double predict(const GazeFeatures& f) const;

    // Sum of per-word predictions over words[context_words..n); empty -> 0.
    double predict_sequence_gaze_score(std::span<const std::string> words,
                                       const FrequencyLexicon& lexicon,
                                       std::size_t context_words = 0) const;

    double sequence_score(std::span<const std::string> words,
                          std::size_t context_words) const override;

    const std::array<double, GazeFeatures::kCount>& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    const ZScore& normalization() const { return norm_; }

    // Binds the lexicon used by the GazePredictor interface (fit() callers
    // must set it before handing the model to the decoder).
    void bind_lexicon(const FrequencyLexicon* lexicon) { lexicon_ = lexicon; }

    // Versioned text persistence: 6 weights, intercept, mu, sigma.
    void save(const std::string& path) const;
    static LinearGazeModel load(const std::string& path);

private:
    std::array<double, GazeFeatures::kCount> weights_{};
    double intercept_ = 0.0;
    ZScore norm_{};
    const FrequencyLexicon* lexicon_ = nullptr; // not owned
};

// One row of the measure-record CSV (gaze-model training input).
struct MeasureRow {
    std::string reader_id;
    std::string text_id;
    std::size_t word_index = 0;
    std::string word;
    std::optional<double> fprt_ms;
    std::optional<double> go_past_ms;
    bool skipped = false;
};

std::vector<MeasureRow> load_measure_csv(const std::string& path);
void save_measure_csv(const std::string& path, std::span<const MeasureRow> rows);

// Builds OLS training records from measure rows: per text, words ordered by
// index provide the feature context; skipped words (and rows without FPRT)
// contribute context only, not targets.
std::vector<LinearGazeModel::TrainingRecord>
training_records_from_measures(std::span<const MeasureRow> rows,
                               const FrequencyLexicon& lexicon);

} // namespace gazegen
