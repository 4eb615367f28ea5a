// Python bindings for the main gazegen operations.

#include "gazegen/analysis.hpp"
#include "gazegen/decoder.hpp"
#include "gazegen/error.hpp"
#include "gazegen/gaze_model.hpp"
#include "gazegen/gaze_processing.hpp"
#include "gazegen/lexicon.hpp"
#include "gazegen/lm.hpp"
#include "gazegen/text_metrics.hpp"
#include "gazegen/text_units.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace gazegen;

namespace {

// Keeps the model together with the lexicon it predicts against, so Python
// callers do not juggle raw pointers.
struct PyGazeModel {
    LinearGazeModel model;
    std::shared_ptr<FrequencyLexicon> lexicon;

    PyGazeModel(LinearGazeModel m, std::shared_ptr<FrequencyLexicon> lex)
        : model(std::move(m)), lexicon(std::move(lex)) {
        model.bind_lexicon(lexicon.get());
    }
};

GenerationResult py_generate(const NGramModel& lm, const PyGazeModel* gaze,
                             const std::string& prompt, double gaze_weight,
                             std::size_t top_k, std::size_t beam_size,
                             std::size_t max_tokens, bool defer_partial_word) {
    DecoderConfig config;
    config.top_k = top_k;
    config.beam_size = beam_size;
    config.max_tokens = max_tokens;
    config.gaze_weight = gaze_weight;
    config.defer_partial_word = defer_partial_word;
    config.prompt_ids = lm.tokenize_to_ids(prompt);
    return generate(lm, gaze ? &gaze->model : nullptr, config);
}

} // namespace

PYBIND11_MODULE(_gazegen, m) {
    m.doc() = "gaze-guided text generation core";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // --- text units -------------------------------------------------------
    py::class_<Word>(m, "Word")
        .def_readonly("surface", &Word::surface)
        .def_readonly("index", &Word::index)
        .def_readonly("char_begin", &Word::char_begin)
        .def_readonly("char_end", &Word::char_end)
        .def_readonly("sentence_index", &Word::sentence_index)
        .def("__repr__", [](const Word& w) {
            return "Word('" + w.surface + "', sentence=" + std::to_string(w.sentence_index) +
                   ")";
        });
    m.def("segment_words", &segment_words, py::arg("text"));
    m.def("distribute_word_value", &distribute_word_value, py::arg("value"),
          py::arg("n_subwords"));
    m.def("clean_word_form", &clean_word_form, py::arg("surface"));

    // --- lexicon and text metrics ------------------------------------------
    py::class_<FrequencyLexicon, std::shared_ptr<FrequencyLexicon>>(m, "FrequencyLexicon")
        .def_static("load",
                    [](const std::string& path) {
                        return std::make_shared<FrequencyLexicon>(FrequencyLexicon::load(path));
                    },
                    py::arg("path"))
        .def_static("from_corpus",
                    [](const std::string& text) {
                        return std::make_shared<FrequencyLexicon>(
                            FrequencyLexicon::from_corpus(text));
                    },
                    py::arg("text"))
        .def("count", &FrequencyLexicon::count, py::arg("word"))
        .def_property_readonly("total", &FrequencyLexicon::total)
        .def_property_readonly("mean_zipf", &FrequencyLexicon::mean_zipf)
        .def("__len__", &FrequencyLexicon::size);

    m.def("zipf_score",
          [](const std::string& word, const FrequencyLexicon& lexicon) {
              ZipfScore z = zipf_score(word, lexicon);
              return py::make_tuple(z.value, z.unknown);
          },
          py::arg("word"), py::arg("lexicon"),
          "Returns (zipf, unknown_flag); unknown words get the floor value.");
    m.def("mtld",
          [](const std::vector<std::string>& tokens, double threshold) {
              return mtld(tokens, threshold);
          },
          py::arg("tokens"), py::arg("threshold") = 0.72);
    m.def("count_syllables", &count_syllables, py::arg("word"));
    m.def("fkgl", &fkgl, py::arg("text"));

    py::class_<TextStats>(m, "TextStats")
        .def_readonly("word_count", &TextStats::word_count)
        .def_readonly("mean_word_length", &TextStats::mean_word_length)
        .def_readonly("mean_zipf", &TextStats::mean_zipf)
        .def_readonly("unknown_words", &TextStats::unknown_words)
        .def_readonly("mean_sentence_length", &TextStats::mean_sentence_length)
        .def_readonly("mtld", &TextStats::mtld)
        .def_readonly("fkgl", &TextStats::fkgl);
    m.def("compute_text_stats", &compute_text_stats, py::arg("text"), py::arg("lexicon"));

    // --- language model -----------------------------------------------------
    py::class_<NGramModel>(m, "NGramModel")
        .def_static("train_from_text",
                    [](const std::string& corpus, std::size_t order, double alpha,
                       std::size_t merges, bool append_eos) {
                        SubwordTokenizer tok = SubwordTokenizer::train(corpus, merges);
                        Vocabulary vocab(tok.piece_inventory());
                        std::vector<std::vector<TokenId>> seqs;
                        std::istringstream lines(corpus);
                        std::string line;
                        while (std::getline(lines, line)) {
                            if (line.empty())
                                continue;
                            std::vector<TokenId> ids;
                            for (const auto& piece : tok.tokenize(line))
                                ids.push_back(vocab.id(piece));
                            if (append_eos)
                                ids.push_back(Vocabulary::kEos);
                            seqs.push_back(std::move(ids));
                        }
                        return NGramModel::train(seqs, order, alpha, std::move(vocab),
                                                 std::move(tok));
                    },
                    py::arg("corpus"), py::arg("order") = 3, py::arg("alpha") = 0.01,
                    py::arg("merges") = 400, py::arg("append_eos") = true)
        .def_static("load", &NGramModel::load, py::arg("path"))
        .def("save", &NGramModel::save, py::arg("path"))
        .def_property_readonly("order", &NGramModel::order)
        .def_property_readonly("alpha", &NGramModel::alpha)
        .def_property_readonly("vocab_size",
                               [](const NGramModel& mdl) { return mdl.vocab().size(); })
        .def("tokenize", [](const NGramModel& mdl,
                            const std::string& text) { return mdl.tokenize_to_ids(text); },
             py::arg("text"))
        .def("next_token_logprobs",
             [](const NGramModel& mdl, const std::vector<TokenId>& context) {
                 return mdl.next_token_logprobs(context);
             },
             py::arg("context"))
        .def("sequence_logprob",
             [](const NGramModel& mdl, const std::vector<TokenId>& tokens) {
                 return mdl.sequence_logprob(tokens);
             },
             py::arg("tokens"));

    // --- gaze model ----------------------------------------------------------
    py::class_<PyGazeModel>(m, "LinearGazeModel")
        .def_static("load",
                    [](const std::string& path, std::shared_ptr<FrequencyLexicon> lexicon) {
                        return PyGazeModel(LinearGazeModel::load(path), std::move(lexicon));
                    },
                    py::arg("path"), py::arg("lexicon"))
        .def_static(
            "fit_from_measures",
            [](const std::string& measures_csv, std::shared_ptr<FrequencyLexicon> lexicon) {
                auto rows = load_measure_csv(measures_csv);
                auto records = training_records_from_measures(rows, *lexicon);
                return PyGazeModel(LinearGazeModel::fit(records), std::move(lexicon));
            },
            py::arg("measures_csv"), py::arg("lexicon"))
        .def("save", [](const PyGazeModel& g, const std::string& path) { g.model.save(path); },
             py::arg("path"))
        .def_property_readonly("weights",
                               [](const PyGazeModel& g) { return g.model.weights(); })
        .def_property_readonly("intercept",
                               [](const PyGazeModel& g) { return g.model.intercept(); })
        .def("predict_word_fprt",
             [](const PyGazeModel& g, const std::vector<std::string>& words, std::size_t i) {
                 return g.model.predict_word_fprt(words, i, *g.lexicon);
             },
             py::arg("words"), py::arg("index"))
        .def("sequence_gaze_score",
             [](const PyGazeModel& g, const std::vector<std::string>& words,
                std::size_t context_words) {
                 return g.model.predict_sequence_gaze_score(words, *g.lexicon, context_words);
             },
             py::arg("words"), py::arg("context_words") = 0);

    // --- decoder --------------------------------------------------------------
    py::class_<StepTrace>(m, "StepTrace")
        .def_readonly("step", &StepTrace::step)
        .def_readonly("token_score", &StepTrace::token_score)
        .def_readonly("gaze_score", &StepTrace::gaze_score)
        .def_readonly("total_score", &StepTrace::total_score);
    py::class_<GenerationResult>(m, "GenerationResult")
        .def_readonly("text", &GenerationResult::text)
        .def_readonly("trace", &GenerationResult::trace)
        .def_property_readonly("token_ids",
                               [](const GenerationResult& r) { return r.best.token_ids; })
        .def_property_readonly("token_score",
                               [](const GenerationResult& r) { return r.best.token_score; })
        .def_property_readonly("gaze_score",
                               [](const GenerationResult& r) { return r.best.gaze_score; })
        .def_property_readonly("finished",
                               [](const GenerationResult& r) { return r.best.finished; })
        .def("total_score",
             [](const GenerationResult& r, double w) { return r.best.total_score(w); },
             py::arg("gaze_weight"));

    m.def("generate", &py_generate, py::arg("lm"), py::arg("gaze") = nullptr,
          py::arg("prompt") = "", py::arg("gaze_weight") = 0.0, py::arg("top_k") = 8,
          py::arg("beam_size") = 8, py::arg("max_tokens") = 64,
          py::arg("defer_partial_word") = false,
          "Gaze-guided beam search over the n-gram model.");

    // --- gaze processing --------------------------------------------------------
    py::class_<FixationEvent>(m, "FixationEvent")
        .def_readonly("onset_ms", &FixationEvent::onset_ms)
        .def_readonly("duration_ms", &FixationEvent::duration_ms)
        .def_readonly("centroid_x", &FixationEvent::centroid_x)
        .def_readonly("centroid_y", &FixationEvent::centroid_y);
    m.def("detect_fixations_idt",
          [](const std::vector<std::tuple<double, double, double, bool>>& samples,
             double dispersion_deg, double min_duration_ms, double pixels_per_degree) {
              std::vector<GazeSample> converted;
              converted.reserve(samples.size());
              for (const auto& [t, x, y, valid] : samples)
                  converted.push_back({t, x, y, valid});
              return detect_fixations_idt(converted, dispersion_deg, min_duration_ms,
                                          pixels_per_degree);
          },
          py::arg("samples"), py::arg("dispersion_threshold_deg") = 1.0,
          py::arg("min_duration_ms") = 100.0, py::arg("pixels_per_degree") = 40.0,
          "samples: iterable of (t_ms, x_px, y_px, valid).");
    m.def("compute_measures",
          [](const std::vector<std::pair<std::size_t, double>>& scanpath, std::size_t n_words,
             bool strict_first_pass) {
              std::vector<ScanpathEvent> events;
              events.reserve(scanpath.size());
              for (const auto& [w, d] : scanpath)
                  events.push_back({w, d});
              auto measures = compute_measures(events, n_words, strict_first_pass);
              py::list out;
              for (const auto& mzr : measures) {
                  py::dict d;
                  d["fprt_ms"] = mzr.fprt_ms ? py::cast(*mzr.fprt_ms) : py::none();
                  d["go_past_ms"] = mzr.go_past_ms ? py::cast(*mzr.go_past_ms) : py::none();
                  d["n_fixations"] = mzr.n_fixations;
                  d["skipped"] = mzr.skipped;
                  out.append(std::move(d));
              }
              return out;
          },
          py::arg("scanpath"), py::arg("n_words"), py::arg("strict_first_pass") = false,
          "scanpath: iterable of (word_index, duration_ms).");

    // --- analysis ------------------------------------------------------------
    m.def("pearson_r",
          [](const std::vector<double>& pred, const std::vector<double>& obs,
             const std::vector<double>& prevalence, std::size_t n_buckets) {
              auto results = pearson_r(pred, obs, prevalence, n_buckets);
              py::list out;
              for (const auto& r : results) {
                  py::dict d;
                  d["bucket"] = r.bucket;
                  d["r"] = r.r;
                  d["ci_low"] = r.ci_low;
                  d["ci_high"] = r.ci_high;
                  d["n"] = r.n;
                  out.append(std::move(d));
              }
              return out;
          },
          py::arg("pred"), py::arg("obs"), py::arg("prevalence") = std::vector<double>{},
          py::arg("n_buckets") = 3);
    m.def("regression_metrics",
          [](const std::vector<double>& pred, const std::vector<double>& obs) {
              RegressionMetrics r = regression_metrics(pred, obs);
              return py::make_tuple(r.mse, r.mae, r.r_squared);
          },
          py::arg("pred"), py::arg("obs"), "Returns (mse, mae, r_squared).");
    m.def("grouped_mean_sem",
          [](const std::vector<std::pair<std::string, double>>& records) {
              auto stats = grouped_mean_sem(records);
              py::dict out;
              for (const auto& [key, s] : stats) {
                  py::dict d;
                  d["mean"] = s.mean;
                  d["sem"] = s.sem ? py::cast(*s.sem) : py::none();
                  d["n"] = s.n;
                  out[py::str(key)] = std::move(d);
              }
              return out;
          },
          py::arg("records"));

    m.attr("__version__") = "0.1.0";
}
