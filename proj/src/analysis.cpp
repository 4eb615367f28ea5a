#include "gazegen/analysis.hpp"

#include "gazegen/csv.hpp"
#include "gazegen/error.hpp"
#include "gazegen/text_units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace gazegen {

const char* formula_name(FprtFormula f) {
    switch (f) {
    case FprtFormula::gaze_weight:
        return "fprt ~ gaze_weight + reader";
    case FprtFormula::length_prevalence:
        return "fprt ~ word_length + word_prevalence + reader";
    case FprtFormula::gaze_weight_length_prevalence:
        return "fprt ~ gaze_weight + word_length + word_prevalence + reader";
    }
    return "?";
}

namespace {

bool uses_gaze_weight(FprtFormula f) {
    return f == FprtFormula::gaze_weight ||
           f == FprtFormula::gaze_weight_length_prevalence;
}

bool uses_prevalence(FprtFormula f) {
    return f == FprtFormula::length_prevalence ||
           f == FprtFormula::gaze_weight_length_prevalence;
}

constexpr double kZ95 = 1.959963984540054; // Phi^-1(0.975)

} // namespace

RegressionResult fit_reader_intercept_ols(std::span<const ObservationRow> rows,
                                          FprtFormula formula) {
    RegressionResult result;

    std::vector<const ObservationRow*> used;
    used.reserve(rows.size());
    for (const auto& r : rows) {
        if (uses_prevalence(formula) && !r.word_prevalence) {
            ++result.n_excluded_missing_prevalence;
            continue;
        }
        used.push_back(&r);
    }
    if (used.empty())
        throw InputError("fit_reader_intercept_ols: no usable rows");

    std::set<std::string> reader_set;
    std::set<int> level_set;
    for (const auto* r : used) {
        reader_set.insert(r->reader_id);
        level_set.insert(r->gaze_weight);
    }
    if (reader_set.size() < 2)
        throw InputError("fit_reader_intercept_ols: need at least 2 readers, got " +
                         std::to_string(reader_set.size()));
    if (uses_gaze_weight(formula)) {
        if (level_set.size() < 2)
            throw InputError("fit_reader_intercept_ols: need at least 2 gaze-weight "
                             "levels in the data");
        if (!level_set.count(0))
            throw InputError("fit_reader_intercept_ols: reference gaze-weight level 0 "
                             "is absent from the data");
    }

    std::vector<std::string> readers(reader_set.begin(), reader_set.end());
    std::vector<int> levels;
    for (int l : level_set)
        if (l != 0)
            levels.push_back(l); // sorted, reference excluded

    std::vector<std::string> names;
    names.push_back("Intercept");
    if (uses_gaze_weight(formula))
        for (int l : levels)
            names.push_back("gaze_weight[" + (l > 0 ? "+" + std::to_string(l)
                                                    : std::to_string(l)) + "]");
    if (formula != FprtFormula::gaze_weight) {
        names.push_back("word_length");
        names.push_back("word_prevalence");
    }
    const std::size_t n_named = names.size();
    // Sum-coded reader contrasts: the intercept is the reader-average
    // baseline, matching the random-intercept interpretation.
    const std::size_t p = n_named + readers.size() - 1;

    const auto n = static_cast<Eigen::Index>(used.size());
    if (static_cast<std::size_t>(n) <= p)
        throw InputError("fit_reader_intercept_ols: more parameters than rows");

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ObservationRow& r = *used[static_cast<std::size_t>(i)];
        std::size_t c = 0;
        x(i, static_cast<Eigen::Index>(c++)) = 1.0;
        if (uses_gaze_weight(formula))
            for (int l : levels)
                x(i, static_cast<Eigen::Index>(c++)) = r.gaze_weight == l ? 1.0 : 0.0;
        if (formula != FprtFormula::gaze_weight) {
            x(i, static_cast<Eigen::Index>(c++)) = r.word_length;
            x(i, static_cast<Eigen::Index>(c++)) = *r.word_prevalence;
        }
        auto pos = static_cast<std::size_t>(
            std::lower_bound(readers.begin(), readers.end(), r.reader_id) - readers.begin());
        if (pos + 1 == readers.size()) {
            for (std::size_t k = 0; k + 1 < readers.size(); ++k)
                x(i, static_cast<Eigen::Index>(n_named + k)) = -1.0;
        } else {
            x(i, static_cast<Eigen::Index>(n_named + pos)) = 1.0;
        }
        y(i) = r.fprt_ms;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k) {
            if (!cols.empty())
                cols += ", ";
            std::size_t col = static_cast<std::size_t>(perm[k]);
            cols += col < n_named ? names[col] : "reader[" + readers[col - n_named] + "]";
        }
        throw NumericError("fit_reader_intercept_ols: rank-deficient design "
                           "(collinear columns: " + cols + ")");
    }

    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd residuals = y - x * beta;
    double ss_res = residuals.squaredNorm();
    double y_mean = y.mean();
    double ss_tot = (y.array() - y_mean).square().sum();
    if (ss_tot <= 0.0)
        throw NumericError("fit_reader_intercept_ols: response has zero variance");

    double sigma2 = ss_res / static_cast<double>(n - static_cast<Eigen::Index>(p));
    Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(
            static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));

    for (std::size_t c = 0; c < n_named; ++c) {
        double se = std::sqrt(sigma2 * xtx_inv(static_cast<Eigen::Index>(c),
                                               static_cast<Eigen::Index>(c)));
        Coefficient coef;
        coef.name = names[c];
        coef.estimate = beta(static_cast<Eigen::Index>(c));
        coef.ci_low = coef.estimate - kZ95 * se;
        coef.ci_high = coef.estimate + kZ95 * se;
        result.coefficients.push_back(std::move(coef));
    }
    result.r_squared = 1.0 - ss_res / ss_tot;
    result.n_rows = used.size();
    return result;
}

namespace {

struct PearsonParts {
    double r = 0.0;
    std::size_t n = 0;
};

PearsonParts pearson_core(std::span<const double> pred, std::span<const double> obs) {
    const std::size_t n = pred.size();
    double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / static_cast<double>(n);
    double mo = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = pred[i] - mp;
        double dy = obs[i] - mo;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw NumericError("pearson_r: zero variance in one of the vectors");
    return {sxy / std::sqrt(sxx * syy), n};
}

CorrelationResult with_fisher_ci(std::string bucket, PearsonParts parts) {
    CorrelationResult out;
    out.bucket = std::move(bucket);
    out.r = std::clamp(parts.r, -1.0, 1.0);
    out.n = parts.n;
    if (parts.n <= 3) {
        out.ci_low = -1.0;
        out.ci_high = 1.0;
    } else if (std::abs(out.r) >= 1.0) {
        out.ci_low = out.ci_high = out.r;
    } else {
        double z = std::atanh(out.r);
        double half = kZ95 / std::sqrt(static_cast<double>(parts.n - 3));
        out.ci_low = std::tanh(z - half);
        out.ci_high = std::tanh(z + half);
    }
    return out;
}

} // namespace

std::vector<CorrelationResult>
pearson_r(std::span<const double> pred, std::span<const double> obs,
          std::span<const double> prevalence, std::size_t n_buckets) {
    if (pred.size() != obs.size())
        throw InputError("pearson_r: pred and obs must have equal length");
    if (pred.size() < 3)
        throw InputError("pearson_r: need at least 3 pairs");

    std::vector<CorrelationResult> results;
    results.push_back(with_fisher_ci("overall", pearson_core(pred, obs)));

    if (prevalence.empty())
        return results;
    if (prevalence.size() != pred.size())
        throw InputError("pearson_r: prevalence length mismatch");
    if (n_buckets < 1)
        throw InputError("pearson_r: n_buckets must be >= 1");

    // Equal-count quantile buckets of prevalence, low to high.
    std::vector<std::size_t> idx(pred.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return prevalence[a] < prevalence[b];
    });

    std::vector<std::string> bucket_names;
    if (n_buckets == 3) {
        bucket_names = {"low", "medium", "high"};
    } else {
        for (std::size_t b = 0; b < n_buckets; ++b)
            bucket_names.push_back("q" + std::to_string(b + 1));
    }

    std::size_t base = pred.size() / n_buckets;
    std::size_t extra = pred.size() % n_buckets;
    std::size_t at = 0;
    for (std::size_t b = 0; b < n_buckets; ++b) {
        std::size_t size = base + (b < extra ? 1 : 0);
        if (size < 3)
            throw InputError("pearson_r: bucket '" + bucket_names[b] +
                             "' has fewer than 3 pairs");
        std::vector<double> bp, bo;
        bp.reserve(size);
        bo.reserve(size);
        for (std::size_t k = 0; k < size; ++k, ++at) {
            bp.push_back(pred[idx[at]]);
            bo.push_back(obs[idx[at]]);
        }
        results.push_back(with_fisher_ci(bucket_names[b], pearson_core(bp, bo)));
    }
    return results;
}

RegressionMetrics regression_metrics(std::span<const double> pred,
                                     std::span<const double> obs) {
    if (pred.size() != obs.size() || pred.empty())
        throw InputError("regression_metrics: vectors must be equal-length and non-empty");
    const double n = static_cast<double>(obs.size());
    double mse = 0.0, mae = 0.0, mean_obs = 0.0;
    for (double o : obs)
        mean_obs += o;
    mean_obs /= n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double err = pred[i] - obs[i];
        mse += err * err;
        mae += std::abs(err);
        ss_res += err * err;
        double d = obs[i] - mean_obs;
        ss_tot += d * d;
    }
    if (ss_tot <= 0.0)
        throw NumericError("regression_metrics: observations have zero variance, "
                           "R^2 undefined");
    return {mse / n, mae / n, 1.0 - ss_res / ss_tot};
}

std::map<std::string, GroupStats>
grouped_mean_sem(std::span<const std::pair<std::string, double>> records) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& [key, value] : records)
        groups[key].push_back(value);

    std::map<std::string, GroupStats> out;
    for (const auto& [key, values] : groups) {
        GroupStats stats;
        stats.n = values.size();
        stats.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                     static_cast<double>(values.size());
        if (values.size() >= 2) {
            double ss = 0.0;
            for (double v : values)
                ss += (v - stats.mean) * (v - stats.mean);
            double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
            stats.sem = sd / std::sqrt(static_cast<double>(values.size()));
        }
        out.emplace(key, stats);
    }
    return out;
}

std::map<std::string, double> load_prevalence_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open prevalence file: " + path);
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw InputError("malformed prevalence line (expected word<TAB>value): " + line);
        std::string word = clean_word_form(line.substr(0, tab));
        out[word] = csv::parse_double(line.substr(tab + 1), "prevalence");
    }
    return out;
}

std::vector<ObservationRow> load_observations_csv(const std::string& path,
                                                  const std::string& prevalence_tsv_path) {
    std::map<std::string, double> prevalence;
    if (!prevalence_tsv_path.empty())
        prevalence = load_prevalence_tsv(prevalence_tsv_path);

    csv::Table t = csv::read_file(path);
    const std::size_t c_reader = t.col("reader_id");
    const std::size_t c_group = t.col("group");
    const std::size_t c_weight = t.col("gaze_weight");
    const std::size_t c_index = t.col("word_index");
    const std::size_t c_word = t.col("word");
    const std::size_t c_fprt = t.col("fprt_ms");

    std::vector<ObservationRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        ObservationRow row;
        row.reader_id = r[c_reader];
        row.group = r[c_group];
        row.gaze_weight = static_cast<int>(csv::parse_long(r[c_weight], "gaze_weight"));
        row.word_index = static_cast<std::size_t>(csv::parse_long(r[c_index], "word_index"));
        row.fprt_ms = csv::parse_double(r[c_fprt], "fprt_ms");
        row.word_length = static_cast<double>(r[c_word].size());
        auto it = prevalence.find(clean_word_form(r[c_word]));
        if (it != prevalence.end())
            row.word_prevalence = it->second;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace gazegen
