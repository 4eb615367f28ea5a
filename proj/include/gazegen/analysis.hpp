#pragma once

// Statistical evaluation: FPRT regressions with per-reader intercepts
// (fixed-effect approximation of random intercepts), Pearson correlations
// with prevalence buckets, model-fit metrics, grouped mean/SEM.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazegen {

struct ObservationRow {
    std::string reader_id;
    std::string group;            // e.g. "L1" / "L2"
    int gaze_weight = 0;          // categorical level; 0 is the reference
    std::size_t word_index = 0;
    double fprt_ms = 0.0;
    double word_length = 0.0;     // characters, punctuation included
    std::optional<double> word_prevalence;
};

enum class FprtFormula {
    gaze_weight,                    // fprt ~ gaze_weight + reader
    length_prevalence,              // fprt ~ word_length + word_prevalence + reader
    gaze_weight_length_prevalence,  // fprt ~ gaze_weight + word_length
                                    //        + word_prevalence + reader
};

const char* formula_name(FprtFormula f);

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double ci_low = 0.0;   // 95% normal-approximation interval
    double ci_high = 0.0;
};

struct RegressionResult {
    std::vector<Coefficient> coefficients; // intercept + named slopes
    double r_squared = 0.0;
    std::size_t n_rows = 0;                 // rows used in the fit
    std::size_t n_excluded_missing_prevalence = 0;
};

// OLS with sum-coded per-reader intercept dummies. gaze_weight levels are
// dummy-coded against the reference level 0. Rows without prevalence are
// excluded (and counted) when the formula uses prevalence. Throws
// descriptive errors on a single reader, a missing reference level, or a
// rank-deficient design.
RegressionResult fit_reader_intercept_ols(std::span<const ObservationRow> rows,
                                          FprtFormula formula);

struct CorrelationResult {
    std::string bucket; // "overall", "low", "medium", "high", ...
    double r = 0.0;
    double ci_low = 0.0;  // Fisher-z 95% interval
    double ci_high = 0.0;
    std::size_t n = 0;
};

// Pearson r overall and, when prevalence values are supplied, per
// equal-count prevalence quantile bucket. Throws NumericError on zero
// variance; buckets need >= 3 pairs.
std::vector<CorrelationResult>
pearson_r(std::span<const double> pred, std::span<const double> obs,
          std::span<const double> prevalence = {}, std::size_t n_buckets = 3);

struct RegressionMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double r_squared = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> pred,
                                     std::span<const double> obs);

struct GroupStats {
    double mean = 0.0;
    std::optional<double> sem; // missing for singleton groups
    std::size_t n = 0;
};

// Mean and standard error of the mean (sample std / sqrt(n)) per group key.
std::map<std::string, GroupStats>
grouped_mean_sem(std::span<const std::pair<std::string, double>> records);

// Observation CSV (reader_id,group,gaze_weight,text_id,word_index,word,fprt_ms)
// joined with a word<TAB>prevalence TSV.
std::vector<ObservationRow> load_observations_csv(const std::string& path,
                                                  const std::string& prevalence_tsv_path);
std::map<std::string, double> load_prevalence_tsv(const std::string& path);

} // namespace gazegen
