#pragma once

// Raw gaze samples -> fixations -> word-level reading measures, plus the
// data-quality report. This pipeline produces the gaze-model training and
// evaluation data.

#include "gazegen/gaze_model.hpp" // MeasureRow

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazegen {

struct GazeSample {
    double t_ms = 0.0;
    double x_px = 0.0;
    double y_px = 0.0;
    bool valid = true; // false = tracking loss / blink
};

struct FixationEvent {
    double onset_ms = 0.0;
    double duration_ms = 0.0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
};

struct AreaOfInterest {
    std::size_t word_index = 0;
    int page = 0;
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;
    std::string word;
};

// Dispersion-threshold (I-DT) fixation detection. The window grows while
// dispersion (x-range + y-range) stays within threshold_deg * px_per_deg;
// maximal windows spanning at least min_duration_ms become fixations at
// the window centroid. Invalid samples close an open window. A window's
// duration counts each sample as one nominal sampling interval
// (t_last - t_first + median inter-sample interval). Throws InputError on
// unsorted timestamps.
std::vector<FixationEvent> detect_fixations_idt(std::span<const GazeSample> samples,
                                                double dispersion_threshold_deg,
                                                double min_duration_ms,
                                                double pixels_per_degree);

// Centroid-in-box assignment with nearest-box snapping within snap_radius_px.
// Returns one entry per fixation; nullopt = unassigned.
std::vector<std::optional<std::size_t>>
map_fixations_to_aois(std::span<const FixationEvent> fixations,
                      std::span<const AreaOfInterest> aois,
                      double snap_radius_px);

struct ScanpathEvent {
    std::size_t word_index = 0;
    double duration_ms = 0.0;
};

struct WordMeasures {
    std::optional<double> fprt_ms;
    std::optional<double> go_past_ms;
    std::size_t n_fixations = 0;
    bool skipped = true;
};

// FPRT = sum of the maximal initial run of consecutive fixations of the
// word's first visit. Go-past = all fixation time from first entering the
// word until (exclusive) the first later fixation on any word to its
// right; for the rightmost fixated words it runs to the end of the trial.
// With strict_first_pass, FPRT is undefined for words first fixated after
// a word to their right.
std::vector<WordMeasures> compute_measures(std::span<const ScanpathEvent> scanpath,
                                           std::size_t n_words,
                                           bool strict_first_pass = false);

struct TrialQuality {
    std::string reader_id;
    std::string text_id;
    std::size_t n_samples = 0;
    std::size_t n_invalid = 0;
    enum class Status { kept, partial, removed } status = Status::kept;
};

struct ReaderQuality {
    std::size_t n_samples = 0;
    std::size_t n_invalid = 0;
    double loss_pct = 0.0;
};

struct DataQualityReport {
    std::size_t n_trials = 0;
    std::size_t n_removed = 0;
    std::size_t n_partial = 0;
    std::size_t n_samples = 0;
    std::size_t n_invalid = 0;
    double overall_loss_pct = 0.0;
    std::map<std::string, ReaderQuality> per_reader;
    double min_reader_loss_pct = 0.0;
    double max_reader_loss_pct = 0.0;
};

DataQualityReport data_quality_report(std::span<const TrialQuality> trials);

// File plumbing: per-trial sample CSV (t_ms,x_px,y_px,valid) and AOI CSV
// (word_index,page,x_min,y_min,x_max,y_max,word).
std::vector<GazeSample> load_samples_csv(const std::string& path);
std::vector<AreaOfInterest> load_aoi_csv(const std::string& path);

} // namespace gazegen
