// gazegen CLI: train models, generate with gaze weights, extract reading
// measures, compute text statistics, run analyses.

#include "gazegen/analysis.hpp"
#include "gazegen/csv.hpp"
#include "gazegen/decoder.hpp"
#include "gazegen/error.hpp"
#include "gazegen/gaze_model.hpp"
#include "gazegen/gaze_processing.hpp"
#include "gazegen/lexicon.hpp"
#include "gazegen/lm.hpp"
#include "gazegen/text_metrics.hpp"
#include "gazegen/text_units.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw gazegen::InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw gazegen::InputError("cannot write file: " + path);
    return out;
}

// ---------------------------------------------------------------------------
// train-lm

struct TrainLmArgs {
    std::string corpus_path;
    std::string out_path;
    std::size_t order = 3;
    double alpha = 0.01;
    std::size_t merges = 400;
    bool no_append_eos = false;
};

int cmd_train_lm(const TrainLmArgs& args) {
    std::string corpus = read_text_file(args.corpus_path);
    gazegen::SubwordTokenizer tokenizer =
        gazegen::SubwordTokenizer::train(corpus, args.merges);
    gazegen::Vocabulary vocab(tokenizer.piece_inventory());

    std::vector<std::vector<gazegen::TokenId>> sequences;
    std::istringstream lines(corpus);
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<gazegen::TokenId> ids;
        for (const std::string& piece : tokenizer.tokenize(line))
            ids.push_back(vocab.id(piece));
        if (ids.empty())
            continue;
        if (!args.no_append_eos)
            ids.push_back(gazegen::Vocabulary::kEos);
        sequences.push_back(std::move(ids));
    }
    if (sequences.empty())
        throw gazegen::InputError("corpus has no non-empty lines: " + args.corpus_path);

    gazegen::NGramModel model = gazegen::NGramModel::train(
        sequences, args.order, args.alpha, std::move(vocab), std::move(tokenizer));
    model.save(args.out_path);
    std::cerr << "trained order-" << args.order << " model, vocab "
              << model.vocab().size() << ", saved to " << args.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-gaze

struct TrainGazeArgs {
    std::string measures_path;
    std::string lexicon_path;
    std::string out_path;
};

int cmd_train_gaze(const TrainGazeArgs& args) {
    gazegen::FrequencyLexicon lexicon = gazegen::FrequencyLexicon::load(args.lexicon_path);
    std::vector<gazegen::MeasureRow> rows = gazegen::load_measure_csv(args.measures_path);
    auto records = gazegen::training_records_from_measures(rows, lexicon);
    gazegen::LinearGazeModel model = gazegen::LinearGazeModel::fit(records);
    model.save(args.out_path);
    std::cerr << "fitted gaze model on " << records.size() << " records, saved to "
              << args.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    std::string lm_path;
    std::string gaze_path;
    std::string lexicon_path;
    std::vector<std::string> prompts;
    std::string prompts_path;
    std::vector<double> gaze_weights{0.0};
    std::size_t top_k = 8;
    std::size_t beam_size = 8;
    std::size_t max_tokens = 64;
    bool defer_partial_word = false;
    long seed = 0;
    std::string out_path;
};

int cmd_generate(const GenerateArgs& args) {
    gazegen::NGramModel lm = gazegen::NGramModel::load(args.lm_path);

    std::optional<gazegen::FrequencyLexicon> lexicon;
    std::optional<gazegen::LinearGazeModel> gaze;
    if (!args.gaze_path.empty()) {
        if (args.lexicon_path.empty())
            throw gazegen::InputError("--gaze requires --lexicon for feature lookups");
        lexicon = gazegen::FrequencyLexicon::load(args.lexicon_path);
        gaze = gazegen::LinearGazeModel::load(args.gaze_path);
        gaze->bind_lexicon(&*lexicon);
    }

    std::vector<std::string> prompts = args.prompts;
    if (!args.prompts_path.empty()) {
        std::istringstream lines(read_text_file(args.prompts_path));
        std::string line;
        while (std::getline(lines, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (!line.empty())
                prompts.push_back(line);
        }
    }
    if (prompts.empty())
        throw gazegen::InputError("no prompts given (use --prompt or --prompts)");

    std::ofstream file_out;
    std::ostream* out = &std::cout;
    if (!args.out_path.empty()) {
        file_out = open_output(args.out_path);
        out = &file_out;
    }

    for (const std::string& prompt : prompts) {
        for (double w : args.gaze_weights) {
            if (std::abs(w) > gazegen::kGazeWeightWarnAbs)
                std::cerr << "warning: gaze weight " << w << " is outside [-3, +3]; "
                          << "expect repetitive failure modes\n";
            gazegen::DecoderConfig config;
            config.top_k = args.top_k;
            config.beam_size = args.beam_size;
            config.max_tokens = args.max_tokens;
            config.gaze_weight = w;
            config.defer_partial_word = args.defer_partial_word;
            config.prompt_ids = lm.tokenize_to_ids(prompt);

            // The gaze model stays attached even at w = 0 so the reported
            // gaze_score is still informative; selection is unaffected.
            const gazegen::GazePredictor* predictor = gaze ? &*gaze : nullptr;
            gazegen::GenerationResult result = gazegen::generate(lm, predictor, config);

            json trace = json::array();
            for (const auto& step : result.trace)
                trace.push_back({step.step, step.token_score, step.gaze_score,
                                 step.total_score});
            json record{{"prompt", prompt},
                        {"gaze_weight", w},
                        {"k", args.top_k},
                        {"beam_size", args.beam_size},
                        {"max_tokens", args.max_tokens},
                        {"seed", args.seed},
                        {"text", result.text},
                        {"token_score", result.best.token_score},
                        {"gaze_score", result.best.gaze_score},
                        {"total_score", result.best.total_score(w)},
                        {"finished", result.best.finished},
                        {"trace", std::move(trace)}};
            *out << record.dump() << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// extract-measures

struct ExtractArgs {
    std::string trials_path;
    std::string out_path;
    std::string report_path;
    double dispersion_deg = 1.0;
    double min_duration_ms = 100.0;
    double snap_radius_px = -1.0; // <0: derive from AOI box heights
    bool strict_first_pass = false;
};

struct TrialEntry {
    std::string reader_id;
    std::string text_id;
    int page = 0;
    std::string samples_path;
    std::string aoi_path;
    double pixels_per_degree = 0.0;
    gazegen::TrialQuality::Status status = gazegen::TrialQuality::Status::kept;
};

std::vector<TrialEntry> load_trial_manifest(const std::string& path) {
    json j;
    try {
        std::ifstream in(path);
        if (!in)
            throw gazegen::InputError("cannot open trial manifest: " + path);
        in >> j;
    } catch (const json::exception& e) {
        throw gazegen::InputError("malformed trial manifest " + path + ": " + e.what());
    }
    fs::path base = fs::path(path).parent_path();
    std::vector<TrialEntry> entries;
    for (const auto& t : j.at("trials")) {
        TrialEntry e;
        e.reader_id = t.at("reader_id").get<std::string>();
        e.text_id = t.at("text_id").get<std::string>();
        e.page = t.value("page", 1);
        e.samples_path = (base / t.at("samples").get<std::string>()).string();
        e.aoi_path = (base / t.at("aoi").get<std::string>()).string();
        e.pixels_per_degree = t.at("pixels_per_degree").get<double>();
        std::string status = t.value("status", "kept");
        if (status == "removed")
            e.status = gazegen::TrialQuality::Status::removed;
        else if (status == "partial")
            e.status = gazegen::TrialQuality::Status::partial;
        else if (status != "kept")
            throw gazegen::InputError("unknown trial status '" + status + "' in " + path);
        entries.push_back(std::move(e));
    }
    return entries;
}

int cmd_extract_measures(const ExtractArgs& args) {
    std::vector<TrialEntry> trials = load_trial_manifest(args.trials_path);
    if (trials.empty())
        throw gazegen::InputError("trial manifest lists no trials");

    // (reader, text) -> page-ordered trial entries.
    std::map<std::pair<std::string, std::string>, std::vector<const TrialEntry*>> grouped;
    for (const auto& t : trials)
        grouped[{t.reader_id, t.text_id}].push_back(&t);

    // Total word count per text comes from the AOI files.
    std::map<std::string, std::size_t> text_n_words;
    std::map<std::string, std::vector<gazegen::AreaOfInterest>> aoi_cache;
    for (const auto& t : trials) {
        if (!aoi_cache.count(t.aoi_path))
            aoi_cache[t.aoi_path] = gazegen::load_aoi_csv(t.aoi_path);
        for (const auto& aoi : aoi_cache[t.aoi_path]) {
            auto& n = text_n_words[t.text_id];
            n = std::max(n, aoi.word_index + 1);
        }
    }

    std::vector<gazegen::TrialQuality> quality;
    std::vector<gazegen::MeasureRow> out_rows;
    for (auto& [key, entries] : grouped) {
        std::sort(entries.begin(), entries.end(),
                  [](const TrialEntry* a, const TrialEntry* b) { return a->page < b->page; });
        std::vector<gazegen::ScanpathEvent> scanpath;
        bool removed = false;
        // Word surfaces for the measure rows.
        std::map<std::size_t, std::string> surfaces;
        for (const TrialEntry* t : entries) {
            std::vector<gazegen::GazeSample> samples = gazegen::load_samples_csv(t->samples_path);
            gazegen::TrialQuality q;
            q.reader_id = t->reader_id;
            q.text_id = t->text_id;
            q.n_samples = samples.size();
            for (const auto& s : samples)
                if (!s.valid)
                    ++q.n_invalid;
            q.status = t->status;
            quality.push_back(q);
            if (t->status == gazegen::TrialQuality::Status::removed) {
                removed = true;
                continue;
            }

            const auto& all_aois = aoi_cache[t->aoi_path];
            std::vector<gazegen::AreaOfInterest> page_aois;
            for (const auto& aoi : all_aois)
                if (aoi.page == t->page)
                    page_aois.push_back(aoi);
            for (const auto& aoi : page_aois)
                surfaces[aoi.word_index] = aoi.word;

            double snap = args.snap_radius_px;
            if (snap < 0.0) {
                // Default snap radius: one line height, estimated as the
                // median AOI box height on this page.
                std::vector<double> heights;
                for (const auto& aoi : page_aois)
                    heights.push_back(aoi.y_max - aoi.y_min);
                std::sort(heights.begin(), heights.end());
                snap = heights.empty() ? 0.0 : heights[heights.size() / 2];
            }

            auto fixations = gazegen::detect_fixations_idt(
                samples, args.dispersion_deg, args.min_duration_ms, t->pixels_per_degree);
            auto assignment = gazegen::map_fixations_to_aois(fixations, page_aois, snap);
            for (std::size_t i = 0; i < fixations.size(); ++i)
                if (assignment[i])
                    scanpath.push_back({*assignment[i], fixations[i].duration_ms});
        }
        if (removed)
            continue;

        std::size_t n_words = text_n_words[key.second];
        auto measures = gazegen::compute_measures(scanpath, n_words, args.strict_first_pass);
        for (std::size_t w = 0; w < measures.size(); ++w) {
            gazegen::MeasureRow row;
            row.reader_id = key.first;
            row.text_id = key.second;
            row.word_index = w;
            auto it = surfaces.find(w);
            row.word = it == surfaces.end() ? "" : it->second;
            row.fprt_ms = measures[w].fprt_ms;
            row.go_past_ms = measures[w].go_past_ms;
            row.skipped = measures[w].skipped;
            out_rows.push_back(std::move(row));
        }
    }

    gazegen::save_measure_csv(args.out_path, out_rows);
    std::cerr << "wrote " << out_rows.size() << " measure rows to " << args.out_path << "\n";

    if (!args.report_path.empty()) {
        gazegen::DataQualityReport report = gazegen::data_quality_report(quality);
        json per_reader = json::object();
        for (const auto& [reader, r] : report.per_reader)
            per_reader[reader] = {{"n_samples", r.n_samples},
                                  {"n_invalid", r.n_invalid},
                                  {"loss_pct", r.loss_pct}};
        json jr{{"n_trials", report.n_trials},
                {"n_removed", report.n_removed},
                {"n_partial", report.n_partial},
                {"n_samples", report.n_samples},
                {"n_invalid", report.n_invalid},
                {"overall_loss_pct", report.overall_loss_pct},
                {"min_reader_loss_pct", report.min_reader_loss_pct},
                {"max_reader_loss_pct", report.max_reader_loss_pct},
                {"per_reader", std::move(per_reader)}};
        open_output(args.report_path) << jr.dump(1) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
    std::vector<std::string> inputs;
    std::string lexicon_path;
    std::string out_path;
};

int cmd_stats(const StatsArgs& args) {
    gazegen::FrequencyLexicon lexicon = gazegen::FrequencyLexicon::load(args.lexicon_path);
    std::ofstream out = open_output(args.out_path);
    out << "text_id,prompt,gaze_weight,word_count,mean_word_length,mean_zipf,"
           "unknown_words,mean_sentence_length,mtld,fkgl\n";

    auto write_stats = [&](const std::string& id, const std::string& prompt,
                           const std::string& weight, const std::string& text) {
        gazegen::TextStats s = gazegen::compute_text_stats(text, lexicon);
        gazegen::csv::write_row(
            out, {id, prompt, weight, std::to_string(s.word_count),
                  gazegen::csv::format_double(s.mean_word_length),
                  gazegen::csv::format_double(s.mean_zipf),
                  std::to_string(s.unknown_words),
                  gazegen::csv::format_double(s.mean_sentence_length),
                  gazegen::csv::format_double(s.mtld),
                  gazegen::csv::format_double(s.fkgl)});
    };

    for (const std::string& input : args.inputs) {
        std::string base = fs::path(input).filename().string();
        if (input.size() > 6 && input.substr(input.size() - 6) == ".jsonl") {
            std::istringstream lines(read_text_file(input));
            std::string line;
            std::size_t index = 0;
            while (std::getline(lines, line)) {
                if (line.empty())
                    continue;
                json record;
                try {
                    record = json::parse(line);
                } catch (const json::exception& e) {
                    throw gazegen::InputError("malformed JSONL in " + input + ": " + e.what());
                }
                write_stats(base + ":" + std::to_string(index++),
                            record.value("prompt", ""),
                            gazegen::csv::format_double(record.value("gaze_weight", 0.0)),
                            record.at("text").get<std::string>());
            }
        } else {
            write_stats(base, "", "", read_text_file(input));
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::string observations_path;
    std::string prevalence_path;
    std::string out_coefficients;
    std::string out_group_means;
};

int cmd_analyze(const AnalyzeArgs& args) {
    std::vector<gazegen::ObservationRow> rows =
        gazegen::load_observations_csv(args.observations_path, args.prevalence_path);
    if (rows.empty())
        throw gazegen::InputError("no observation rows in " + args.observations_path);

    std::map<std::string, std::vector<gazegen::ObservationRow>> by_group;
    for (auto& r : rows)
        by_group[r.group].push_back(r);

    std::ofstream coef_out = open_output(args.out_coefficients);
    // R^2 below is from the dummy-encoded OLS (fixed-effect approximation of
    // random reader intercepts).
    coef_out << "group,formula,coefficient,estimate,ci_low,ci_high,r_squared,"
                "n_rows,n_excluded_missing_prevalence\n";
    const gazegen::FprtFormula formulas[] = {
        gazegen::FprtFormula::gaze_weight,
        gazegen::FprtFormula::length_prevalence,
        gazegen::FprtFormula::gaze_weight_length_prevalence,
    };
    for (const auto& [group, group_rows] : by_group) {
        for (gazegen::FprtFormula f : formulas) {
            gazegen::RegressionResult res = gazegen::fit_reader_intercept_ols(group_rows, f);
            for (const auto& coef : res.coefficients)
                gazegen::csv::write_row(
                    coef_out,
                    {group, gazegen::formula_name(f), coef.name,
                     gazegen::csv::format_double(coef.estimate),
                     gazegen::csv::format_double(coef.ci_low),
                     gazegen::csv::format_double(coef.ci_high),
                     gazegen::csv::format_double(res.r_squared),
                     std::to_string(res.n_rows),
                     std::to_string(res.n_excluded_missing_prevalence)});
        }
    }

    if (!args.out_group_means.empty()) {
        std::vector<std::pair<std::string, double>> keyed;
        keyed.reserve(rows.size());
        for (const auto& r : rows)
            keyed.emplace_back(r.group + "," + std::to_string(r.gaze_weight), r.fprt_ms);
        auto stats = gazegen::grouped_mean_sem(keyed);
        std::ofstream means_out = open_output(args.out_group_means);
        means_out << "group,gaze_weight,mean_fprt_ms,sem,n\n";
        for (const auto& [key, s] : stats) {
            means_out << key << ',' << gazegen::csv::format_double(s.mean) << ','
                      << (s.sem ? gazegen::csv::format_double(*s.sem) : "") << ',' << s.n
                      << '\n';
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval-gaze

struct EvalGazeArgs {
    std::string model_path;
    std::string measures_path;
    std::string lexicon_path;
    std::string prevalence_path;
    std::string out_path;
    std::size_t n_buckets = 3;
};

int cmd_eval_gaze(const EvalGazeArgs& args) {
    gazegen::LinearGazeModel model = gazegen::LinearGazeModel::load(args.model_path);
    gazegen::FrequencyLexicon lexicon = gazegen::FrequencyLexicon::load(args.lexicon_path);
    std::vector<gazegen::MeasureRow> rows = gazegen::load_measure_csv(args.measures_path);
    std::map<std::string, double> prevalence;
    if (!args.prevalence_path.empty())
        prevalence = gazegen::load_prevalence_tsv(args.prevalence_path);

    // Word order per text for feature contexts.
    std::map<std::string, std::map<std::size_t, std::string>> text_words;
    for (const auto& r : rows)
        text_words[r.text_id].emplace(r.word_index, r.word);
    std::map<std::string, std::vector<std::string>> ordered;
    std::map<std::string, std::map<std::size_t, std::size_t>> pos_of;
    for (const auto& [text, words] : text_words) {
        for (const auto& [idx, surface] : words) {
            pos_of[text][idx] = ordered[text].size();
            ordered[text].push_back(surface);
        }
    }

    std::vector<double> pred, obs, prev;
    std::vector<bool> has_prev;
    for (const auto& r : rows) {
        if (r.skipped || !r.fprt_ms)
            continue;
        std::size_t i = pos_of[r.text_id][r.word_index];
        pred.push_back(model.predict_word_fprt(ordered[r.text_id], i, lexicon));
        obs.push_back(model.normalization().apply(*r.fprt_ms));
        auto it = prevalence.find(gazegen::clean_word_form(r.word));
        has_prev.push_back(it != prevalence.end());
        prev.push_back(it != prevalence.end() ? it->second : 0.0);
    }
    if (pred.empty())
        throw gazegen::InputError("no non-skipped measure rows to evaluate");

    gazegen::RegressionMetrics metrics = gazegen::regression_metrics(pred, obs);

    std::ofstream out = open_output(args.out_path);
    out << "metric,bucket,value,ci_low,ci_high,n\n";
    out << "mse,," << gazegen::csv::format_double(metrics.mse) << ",,," << pred.size() << "\n";
    out << "mae,," << gazegen::csv::format_double(metrics.mae) << ",,," << pred.size() << "\n";
    out << "r2,," << gazegen::csv::format_double(metrics.r_squared) << ",,," << pred.size()
        << "\n";

    auto emit_corr = [&](const gazegen::CorrelationResult& c) {
        out << "pearson," << c.bucket << ',' << gazegen::csv::format_double(c.r) << ','
            << gazegen::csv::format_double(c.ci_low) << ','
            << gazegen::csv::format_double(c.ci_high) << ',' << c.n << "\n";
    };
    if (prevalence.empty()) {
        for (const auto& c : gazegen::pearson_r(pred, obs))
            emit_corr(c);
    } else {
        // Overall over all rows; buckets over the rows with prevalence.
        for (const auto& c : gazegen::pearson_r(pred, obs))
            emit_corr(c);
        std::vector<double> bp, bo, bprev;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (!has_prev[i])
                continue;
            bp.push_back(pred[i]);
            bo.push_back(obs[i]);
            bprev.push_back(prev[i]);
        }
        if (!bp.empty()) {
            auto results = gazegen::pearson_r(bp, bo, bprev, args.n_buckets);
            for (std::size_t i = 1; i < results.size(); ++i) // skip duplicate overall
                emit_corr(results[i]);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaze-guided text generation toolkit"};
    app.require_subcommand(1);

    TrainLmArgs train_lm;
    auto* lm_cmd = app.add_subcommand("train-lm", "Train the built-in n-gram language model");
    lm_cmd->add_option("--corpus", train_lm.corpus_path, "Training text file")
        ->required()
        ->check(CLI::ExistingFile);
    lm_cmd->add_option("--out", train_lm.out_path, "Output model file")->required();
    lm_cmd->add_option("--order", train_lm.order, "N-gram order (>= 1)")
        ->capture_default_str();
    lm_cmd->add_option("--alpha", train_lm.alpha, "Add-alpha smoothing constant (> 0)")
        ->capture_default_str();
    lm_cmd->add_option("--merges", train_lm.merges, "Subword merge count for the tokenizer")
        ->capture_default_str();
    lm_cmd->add_flag("--no-append-eos", train_lm.no_append_eos,
                     "Do not append EOS to each corpus line");

    TrainGazeArgs train_gaze;
    auto* gz_cmd = app.add_subcommand("train-gaze", "Fit the linear FPRT gaze model");
    gz_cmd->add_option("--measures", train_gaze.measures_path, "Measure-record CSV")
        ->required()
        ->check(CLI::ExistingFile);
    gz_cmd->add_option("--lexicon", train_gaze.lexicon_path, "Frequency lexicon TSV")
        ->required()
        ->check(CLI::ExistingFile);
    gz_cmd->add_option("--out", train_gaze.out_path, "Output model file")->required();

    GenerateArgs generate;
    auto* gen_cmd = app.add_subcommand("generate", "Gaze-guided beam search generation");
    gen_cmd->add_option("--lm", generate.lm_path, "N-gram model file")
        ->required()
        ->check(CLI::ExistingFile);
    gen_cmd->add_option("--gaze", generate.gaze_path, "Gaze model file (optional)")
        ->check(CLI::ExistingFile);
    gen_cmd->add_option("--lexicon", generate.lexicon_path,
                        "Frequency lexicon TSV (required with --gaze)");
    gen_cmd->add_option("--prompt", generate.prompts, "Prompt text (repeatable)");
    gen_cmd->add_option("--prompts", generate.prompts_path, "File with one prompt per line")
        ->check(CLI::ExistingFile);
    gen_cmd->add_option("--gaze-weight", generate.gaze_weights,
                        "Gaze weight(s) in [-5, +5]; repeatable for sweeps")
        ->capture_default_str();
    gen_cmd->add_option("--top-k", generate.top_k, "Candidates per beam for gaze prediction")
        ->capture_default_str();
    gen_cmd->add_option("--beam-size", generate.beam_size, "Beam size")
        ->capture_default_str();
    gen_cmd->add_option("--max-tokens", generate.max_tokens, "Generation budget")
        ->capture_default_str();
    gen_cmd->add_flag("--defer-partial-word", generate.defer_partial_word,
                      "Defer the trailing incomplete word's gaze contribution");
    gen_cmd->add_option("--seed", generate.seed,
                        "Recorded in the output for provenance; decoding is deterministic")
        ->capture_default_str();
    gen_cmd->add_option("--out", generate.out_path, "Output JSONL file (default: stdout)");

    ExtractArgs extract;
    auto* ex_cmd = app.add_subcommand("extract-measures",
                                      "Raw gaze samples to word-level reading measures");
    ex_cmd->add_option("--trials", extract.trials_path, "Trial manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);
    ex_cmd->add_option("--out", extract.out_path, "Output measure CSV")->required();
    ex_cmd->add_option("--report", extract.report_path, "Data-quality report JSON");
    ex_cmd->add_option("--dispersion", extract.dispersion_deg,
                       "I-DT dispersion threshold in degrees")
        ->capture_default_str();
    ex_cmd->add_option("--min-duration", extract.min_duration_ms,
                       "Minimum fixation duration in ms")
        ->capture_default_str();
    ex_cmd->add_option("--snap-radius", extract.snap_radius_px,
                       "AOI snap radius in px (default: one line height)");
    ex_cmd->add_flag("--strict-first-pass", extract.strict_first_pass,
                     "Undefined FPRT for words first fixated after a word to their right");

    StatsArgs stats;
    auto* st_cmd = app.add_subcommand("stats", "Readability statistics for texts");
    st_cmd->add_option("inputs", stats.inputs, "Text files or generation .jsonl files")
        ->required()
        ->check(CLI::ExistingFile);
    st_cmd->add_option("--lexicon", stats.lexicon_path, "Frequency lexicon TSV")
        ->required()
        ->check(CLI::ExistingFile);
    st_cmd->add_option("--out", stats.out_path, "Output CSV")->required();

    AnalyzeArgs analyze;
    auto* an_cmd = app.add_subcommand("analyze", "FPRT regressions and grouped means");
    an_cmd->add_option("--observations", analyze.observations_path, "Observation CSV")
        ->required()
        ->check(CLI::ExistingFile);
    an_cmd->add_option("--prevalence", analyze.prevalence_path,
                       "word<TAB>prevalence TSV (rows without prevalence are excluded "
                       "from prevalence formulas)")
        ->check(CLI::ExistingFile);
    an_cmd->add_option("--out-coefficients", analyze.out_coefficients,
                       "Coefficient/CI/R^2 CSV")
        ->required();
    an_cmd->add_option("--out-group-means", analyze.out_group_means,
                       "Mean/SEM per (group, gaze_weight) CSV");

    EvalGazeArgs eval_gaze;
    auto* ev_cmd = app.add_subcommand("eval-gaze",
                                      "Evaluate a gaze model against observed measures");
    ev_cmd->add_option("--model", eval_gaze.model_path, "Gaze model file")
        ->required()
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--measures", eval_gaze.measures_path, "Measure CSV")
        ->required()
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--lexicon", eval_gaze.lexicon_path, "Frequency lexicon TSV")
        ->required()
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--prevalence", eval_gaze.prevalence_path,
                       "word<TAB>prevalence TSV for correlation buckets")
        ->check(CLI::ExistingFile);
    ev_cmd->add_option("--buckets", eval_gaze.n_buckets, "Prevalence bucket count")
        ->capture_default_str();
    ev_cmd->add_option("--out", eval_gaze.out_path, "Output CSV")->required();

    try {
        app.parse(argc, argv);
        if (lm_cmd->parsed())
            return cmd_train_lm(train_lm);
        if (gz_cmd->parsed())
            return cmd_train_gaze(train_gaze);
        if (gen_cmd->parsed())
            return cmd_generate(generate);
        if (ex_cmd->parsed())
            return cmd_extract_measures(extract);
        if (st_cmd->parsed())
            return cmd_stats(stats);
        if (an_cmd->parsed())
            return cmd_analyze(analyze);
        if (ev_cmd->parsed())
            return cmd_eval_gaze(eval_gaze);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return 2;
    } catch (const gazegen::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const gazegen::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
