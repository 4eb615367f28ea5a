#include "gazegen/gaze_model.hpp"

#include "gazegen/csv.hpp"
#include "gazegen/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gazegen {

const char* GazeFeatures::name(std::size_t i) {
    static const char* names[kCount] = {"len_0", "len_1", "len_2",
                                        "zipf_0", "zipf_1", "zipf_2"};
    return names[i];
}

ZScore zscore_fit(std::span<const double> values) {
    if (values.size() < 2)
        throw NumericError("zscore_fit: need at least 2 values");
    double mu = 0.0;
    for (double v : values)
        mu += v;
    mu /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values)
        var += (v - mu) * (v - mu);
    var /= static_cast<double>(values.size()); // population variance
    if (var <= 0.0)
        throw NumericError("zscore_fit: values have zero spread");
    return {mu, std::sqrt(var)};
}

GazeFeatures extract_features(std::span<const std::string> words, std::size_t i,
                              const FrequencyLexicon& lexicon) {
    if (i >= words.size())
        throw InputError("extract_features: index out of range");
    GazeFeatures f;
    const double pad_zipf = lexicon.mean_zipf();
    auto word_len = [](const std::string& w) { return static_cast<double>(w.size()); };
    auto word_zipf = [&](const std::string& w) { return zipf_score(w, lexicon).value; };

    f.len_0 = word_len(words[i]);
    f.zipf_0 = word_zipf(words[i]);
    if (i >= 1) {
        f.len_1 = word_len(words[i - 1]);
        f.zipf_1 = word_zipf(words[i - 1]);
    } else {
        f.zipf_1 = pad_zipf;
    }
    if (i >= 2) {
        f.len_2 = word_len(words[i - 2]);
        f.zipf_2 = word_zipf(words[i - 2]);
    } else {
        f.zipf_2 = pad_zipf;
    }
    return f;
}

LinearGazeModel::LinearGazeModel(std::array<double, GazeFeatures::kCount> weights,
                                 double intercept, ZScore normalization,
                                 const FrequencyLexicon* lexicon)
    : weights_(weights), intercept_(intercept), norm_(normalization), lexicon_(lexicon) {
    if (!(norm_.sigma > 0.0))
        throw InputError("LinearGazeModel: sigma must be > 0");
}

LinearGazeModel LinearGazeModel::fit(std::span<const TrainingRecord> records) {
    constexpr std::size_t p = GazeFeatures::kCount + 1; // + intercept
    if (records.size() < p)
        throw InputError("fit_gaze_model: need at least " + std::to_string(p) +
                         " records, got " + std::to_string(records.size()));

    std::vector<double> targets;
    targets.reserve(records.size());
    for (const auto& r : records)
        targets.push_back(r.fprt_ms);
    ZScore norm = zscore_fit(targets);

    const auto n = static_cast<Eigen::Index>(records.size());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(n);
    for (Eigen::Index row = 0; row < n; ++row) {
        auto feats = records[static_cast<std::size_t>(row)].features.as_array();
        for (std::size_t c = 0; c < GazeFeatures::kCount; ++c)
            x(row, static_cast<Eigen::Index>(c)) = feats[c];
        x(row, GazeFeatures::kCount) = 1.0;
        y(row) = norm.apply(records[static_cast<std::size_t>(row)].fprt_ms);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        // The permutation puts the dependent columns last.
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k) {
            if (!cols.empty())
                cols += ", ";
            std::size_t col = static_cast<std::size_t>(perm[k]);
            cols += col < GazeFeatures::kCount ? GazeFeatures::name(col) : "intercept";
        }
        throw NumericError("fit_gaze_model: design matrix is rank deficient "
                           "(collinear columns: " + cols + ")");
    }

    Eigen::VectorXd beta = qr.solve(y);
    LinearGazeModel model;
    for (std::size_t c = 0; c < GazeFeatures::kCount; ++c)
        model.weights_[c] = beta(static_cast<Eigen::Index>(c));
    model.intercept_ = beta(GazeFeatures::kCount);
    model.norm_ = norm;
    return model;
}

double LinearGazeModel::predict(const GazeFeatures& f) const {
    auto feats = f.as_array();
    double v = intercept_;
    for (std::size_t c = 0; c < GazeFeatures::kCount; ++c)
        v += weights_[c] * feats[c];
    return v;
}

double LinearGazeModel::predict_word_fprt(std::span<const std::string> words, std::size_t i,
                                          const FrequencyLexicon& lexicon) const {
    return predict(extract_features(words, i, lexicon));
}

double LinearGazeModel::predict_sequence_gaze_score(std::span<const std::string> words,
                                                    const FrequencyLexicon& lexicon,
                                                    std::size_t context_words) const {
    double sum = 0.0;
    for (std::size_t i = context_words; i < words.size(); ++i)
        sum += predict_word_fprt(words, i, lexicon);
    return sum;
}

double LinearGazeModel::sequence_score(std::span<const std::string> words,
                                       std::size_t context_words) const {
    if (!lexicon_)
        throw InputError("LinearGazeModel: no lexicon bound for sequence scoring");
    return predict_sequence_gaze_score(words, *lexicon_, context_words);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {
constexpr const char* kGazeMagic = "gazegen.gaze-linear v1";
}

void LinearGazeModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write gaze model file: " + path);
    out << kGazeMagic << '\n';
    out.precision(17);
    for (std::size_t c = 0; c < GazeFeatures::kCount; ++c)
        out << GazeFeatures::name(c) << ' ' << weights_[c] << '\n';
    out << "intercept " << intercept_ << '\n';
    out << "mu " << norm_.mu << '\n';
    out << "sigma " << norm_.sigma << '\n';
}

LinearGazeModel LinearGazeModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open gaze model file: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != kGazeMagic)
        throw InputError(path + " is not a gazegen linear gaze model file");

    std::map<std::string, double> kv;
    std::string key;
    double value = 0.0;
    while (in >> key >> value)
        kv[key] = value;

    LinearGazeModel model;
    for (std::size_t c = 0; c < GazeFeatures::kCount; ++c) {
        auto it = kv.find(GazeFeatures::name(c));
        if (it == kv.end())
            throw InputError("gaze model file missing weight " +
                             std::string(GazeFeatures::name(c)));
        model.weights_[c] = it->second;
    }
    auto need = [&](const char* k) {
        auto it = kv.find(k);
        if (it == kv.end())
            throw InputError("gaze model file missing field " + std::string(k));
        return it->second;
    };
    model.intercept_ = need("intercept");
    model.norm_.mu = need("mu");
    model.norm_.sigma = need("sigma");
    if (!(model.norm_.sigma > 0.0))
        throw InputError("gaze model file has sigma <= 0");
    return model;
}

// ---------------------------------------------------------------------------
// Measure-record CSV

std::vector<MeasureRow> load_measure_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    const std::size_t c_reader = t.col("reader_id");
    const std::size_t c_text = t.col("text_id");
    const std::size_t c_index = t.col("word_index");
    const std::size_t c_word = t.col("word");
    const std::size_t c_fprt = t.col("fprt_ms");
    const std::size_t c_gp = t.col("go_past_ms");
    const std::size_t c_skip = t.col("skipped");

    std::vector<MeasureRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        MeasureRow row;
        row.reader_id = r[c_reader];
        row.text_id = r[c_text];
        row.word_index = static_cast<std::size_t>(csv::parse_long(r[c_index], "word_index"));
        row.word = r[c_word];
        row.fprt_ms = csv::parse_optional_double(r[c_fprt]);
        row.go_past_ms = csv::parse_optional_double(r[c_gp]);
        long skip = csv::parse_long(r[c_skip], "skipped");
        if (skip != 0 && skip != 1)
            throw InputError("skipped must be 0 or 1, got " + r[c_skip]);
        row.skipped = skip == 1;
        if (row.skipped && (row.fprt_ms || row.go_past_ms))
            throw InputError("skipped word '" + row.word + "' must not carry measures");
        rows.push_back(std::move(row));
    }
    return rows;
}

void save_measure_csv(const std::string& path, std::span<const MeasureRow> rows) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write measures file: " + path);
    out << "reader_id,text_id,word_index,word,fprt_ms,go_past_ms,skipped\n";
    for (const auto& r : rows) {
        csv::write_row(out, {r.reader_id, r.text_id, std::to_string(r.word_index),
                             r.word,
                             r.fprt_ms ? csv::format_double(*r.fprt_ms) : "",
                             r.go_past_ms ? csv::format_double(*r.go_past_ms) : "",
                             r.skipped ? "1" : "0"});
    }
}

std::vector<LinearGazeModel::TrainingRecord>
training_records_from_measures(std::span<const MeasureRow> rows,
                               const FrequencyLexicon& lexicon) {
    // Word context per text: surfaces ordered by word_index.
    std::map<std::string, std::map<std::size_t, std::string>> text_words;
    for (const auto& r : rows) {
        auto& words = text_words[r.text_id];
        auto it = words.find(r.word_index);
        if (it != words.end() && it->second != r.word)
            throw InputError("conflicting surfaces for word " + std::to_string(r.word_index) +
                             " of text " + r.text_id);
        words.emplace(r.word_index, r.word);
    }

    std::map<std::string, std::vector<std::string>> ordered;
    std::map<std::string, std::map<std::size_t, std::size_t>> index_pos;
    for (const auto& [text, words] : text_words) {
        auto& vec = ordered[text];
        auto& pos = index_pos[text];
        for (const auto& [idx, surface] : words) {
            pos[idx] = vec.size();
            vec.push_back(surface);
        }
    }

    std::vector<LinearGazeModel::TrainingRecord> records;
    for (const auto& r : rows) {
        if (r.skipped || !r.fprt_ms)
            continue; // context only
        const auto& vec = ordered[r.text_id];
        std::size_t i = index_pos[r.text_id][r.word_index];
        records.push_back({extract_features(vec, i, lexicon), *r.fprt_ms});
    }
    return records;
}

} // namespace gazegen
