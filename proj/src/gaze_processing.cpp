#include "gazegen/gaze_processing.hpp"

#include "gazegen/csv.hpp"
#include "gazegen/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gazegen {

namespace {

// Nominal sampling interval: median of consecutive timestamp differences.
double median_sample_period(std::span<const GazeSample> samples) {
    if (samples.size() < 2)
        return 0.0;
    std::vector<double> diffs;
    diffs.reserve(samples.size() - 1);
    for (std::size_t i = 1; i < samples.size(); ++i)
        diffs.push_back(samples[i].t_ms - samples[i - 1].t_ms);
    std::sort(diffs.begin(), diffs.end());
    std::size_t n = diffs.size();
    if (n % 2 == 1)
        return diffs[n / 2];
    return 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);
}

struct WindowExtent {
    double min_x = std::numeric_limits<double>::max();
    double max_x = std::numeric_limits<double>::lowest();
    double min_y = std::numeric_limits<double>::max();
    double max_y = std::numeric_limits<double>::lowest();

    void add(const GazeSample& s) {
        min_x = std::min(min_x, s.x_px);
        max_x = std::max(max_x, s.x_px);
        min_y = std::min(min_y, s.y_px);
        max_y = std::max(max_y, s.y_px);
    }
    double dispersion() const { return (max_x - min_x) + (max_y - min_y); }
};

} // namespace

std::vector<FixationEvent> detect_fixations_idt(std::span<const GazeSample> samples,
                                                double dispersion_threshold_deg,
                                                double min_duration_ms,
                                                double pixels_per_degree) {
    if (!(pixels_per_degree > 0.0))
        throw InputError("detect_fixations_idt: pixels_per_degree must be > 0");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].t_ms < samples[i - 1].t_ms)
            throw InputError("detect_fixations_idt: timestamps not sorted at sample " +
                             std::to_string(i));

    const double threshold_px = dispersion_threshold_deg * pixels_per_degree;
    const double period = median_sample_period(samples);

    std::vector<FixationEvent> fixations;
    std::size_t i = 0;
    while (i < samples.size()) {
        if (!samples[i].valid) {
            ++i;
            continue;
        }
        // Grow the maximal window [i..j] of valid samples whose dispersion
        // stays within the threshold.
        WindowExtent extent;
        extent.add(samples[i]);
        std::size_t j = i;
        while (j + 1 < samples.size() && samples[j + 1].valid) {
            WindowExtent next = extent;
            next.add(samples[j + 1]);
            if (next.dispersion() > threshold_px)
                break;
            extent = next;
            ++j;
        }
        double duration = samples[j].t_ms - samples[i].t_ms + period;
        if (duration >= min_duration_ms) {
            FixationEvent fix;
            fix.onset_ms = samples[i].t_ms;
            fix.duration_ms = duration;
            double sx = 0.0, sy = 0.0;
            for (std::size_t k = i; k <= j; ++k) {
                sx += samples[k].x_px;
                sy += samples[k].y_px;
            }
            double n = static_cast<double>(j - i + 1);
            fix.centroid_x = sx / n;
            fix.centroid_y = sy / n;
            fixations.push_back(fix);
            i = j + 1;
        } else {
            ++i; // too short; slide the start forward
        }
    }
    return fixations;
}

std::vector<std::optional<std::size_t>>
map_fixations_to_aois(std::span<const FixationEvent> fixations,
                      std::span<const AreaOfInterest> aois,
                      double snap_radius_px) {
    std::vector<std::optional<std::size_t>> assignment;
    assignment.reserve(fixations.size());
    for (const auto& fix : fixations) {
        double best_dist = std::numeric_limits<double>::max();
        std::optional<std::size_t> best_word;
        for (const auto& aoi : aois) {
            // Euclidean distance from the centroid to the box (0 inside).
            double dx = std::max({aoi.x_min - fix.centroid_x, 0.0, fix.centroid_x - aoi.x_max});
            double dy = std::max({aoi.y_min - fix.centroid_y, 0.0, fix.centroid_y - aoi.y_max});
            double dist = std::hypot(dx, dy);
            if (dist < best_dist ||
                (dist == best_dist && best_word && aoi.word_index < *best_word)) {
                best_dist = dist;
                best_word = aoi.word_index;
            }
        }
        if (best_word && best_dist <= snap_radius_px)
            assignment.push_back(best_word);
        else
            assignment.push_back(std::nullopt);
    }
    return assignment;
}

std::vector<WordMeasures> compute_measures(std::span<const ScanpathEvent> scanpath,
                                           std::size_t n_words,
                                           bool strict_first_pass) {
    std::vector<WordMeasures> out(n_words);
    for (const auto& ev : scanpath)
        if (ev.word_index >= n_words)
            throw InputError("compute_measures: scanpath word index " +
                             std::to_string(ev.word_index) + " out of range");

    for (std::size_t w = 0; w < n_words; ++w) {
        WordMeasures& m = out[w];
        std::size_t first = scanpath.size();
        for (std::size_t e = 0; e < scanpath.size(); ++e) {
            if (scanpath[e].word_index == w) {
                ++m.n_fixations;
                if (first == scanpath.size())
                    first = e;
            }
        }
        if (first == scanpath.size())
            continue; // never fixated -> skipped
        m.skipped = false;

        // First-pass reading time: the initial consecutive run of the first
        // visit.
        bool passed_before_first_visit = false;
        for (std::size_t e = 0; e < first; ++e)
            passed_before_first_visit =
                passed_before_first_visit || scanpath[e].word_index > w;
        if (!(strict_first_pass && passed_before_first_visit)) {
            double fprt = 0.0;
            for (std::size_t e = first; e < scanpath.size() && scanpath[e].word_index == w; ++e)
                fprt += scanpath[e].duration_ms;
            m.fprt_ms = fprt;
        }

        // Go-past: everything from the first fixation on w until the gaze
        // first lands on a word to its right; to end of trial otherwise.
        double go_past = 0.0;
        for (std::size_t e = first; e < scanpath.size(); ++e) {
            if (scanpath[e].word_index > w)
                break;
            go_past += scanpath[e].duration_ms;
        }
        m.go_past_ms = go_past;
    }
    return out;
}

DataQualityReport data_quality_report(std::span<const TrialQuality> trials) {
    DataQualityReport report;
    report.n_trials = trials.size();
    for (const auto& t : trials) {
        if (t.status == TrialQuality::Status::removed)
            ++report.n_removed;
        else if (t.status == TrialQuality::Status::partial)
            ++report.n_partial;
        report.n_samples += t.n_samples;
        report.n_invalid += t.n_invalid;
        auto& r = report.per_reader[t.reader_id];
        r.n_samples += t.n_samples;
        r.n_invalid += t.n_invalid;
    }
    report.overall_loss_pct =
        report.n_samples == 0
            ? 0.0
            : 100.0 * static_cast<double>(report.n_invalid) /
                  static_cast<double>(report.n_samples);
    bool first = true;
    for (auto& [reader, r] : report.per_reader) {
        r.loss_pct = r.n_samples == 0 ? 0.0
                                      : 100.0 * static_cast<double>(r.n_invalid) /
                                            static_cast<double>(r.n_samples);
        if (first || r.loss_pct < report.min_reader_loss_pct)
            report.min_reader_loss_pct = r.loss_pct;
        if (first || r.loss_pct > report.max_reader_loss_pct)
            report.max_reader_loss_pct = r.loss_pct;
        first = false;
    }
    return report;
}

std::vector<GazeSample> load_samples_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    const std::size_t c_t = t.col("t_ms");
    const std::size_t c_x = t.col("x_px");
    const std::size_t c_y = t.col("y_px");
    const std::size_t c_valid = t.col("valid");

    std::vector<GazeSample> samples;
    samples.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        GazeSample s;
        s.t_ms = csv::parse_double(r[c_t], "t_ms");
        long valid = csv::parse_long(r[c_valid], "valid");
        if (valid != 0 && valid != 1)
            throw InputError("valid must be 0 or 1 in " + path);
        s.valid = valid == 1;
        auto x = csv::parse_optional_double(r[c_x]);
        auto y = csv::parse_optional_double(r[c_y]);
        if (s.valid && (!x || !y))
            throw InputError("valid sample without coordinates in " + path);
        s.x_px = x.value_or(0.0);
        s.y_px = y.value_or(0.0);
        samples.push_back(s);
    }
    return samples;
}

std::vector<AreaOfInterest> load_aoi_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    const std::size_t c_index = t.col("word_index");
    const std::size_t c_page = t.col("page");
    const std::size_t c_xmin = t.col("x_min");
    const std::size_t c_ymin = t.col("y_min");
    const std::size_t c_xmax = t.col("x_max");
    const std::size_t c_ymax = t.col("y_max");
    const std::size_t c_word = t.col("word");

    std::vector<AreaOfInterest> aois;
    aois.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        AreaOfInterest a;
        a.word_index = static_cast<std::size_t>(csv::parse_long(r[c_index], "word_index"));
        a.page = static_cast<int>(csv::parse_long(r[c_page], "page"));
        a.x_min = csv::parse_double(r[c_xmin], "x_min");
        a.y_min = csv::parse_double(r[c_ymin], "y_min");
        a.x_max = csv::parse_double(r[c_xmax], "x_max");
        a.y_max = csv::parse_double(r[c_ymax], "y_max");
        a.word = r[c_word];
        if (a.x_min >= a.x_max || a.y_min >= a.y_max)
            throw InputError("degenerate AOI box for word " + a.word + " in " + path);
        aois.push_back(std::move(a));
    }
    // Boxes on one page must not overlap.
    for (std::size_t i = 0; i < aois.size(); ++i)
        for (std::size_t j = i + 1; j < aois.size(); ++j) {
            const auto& a = aois[i];
            const auto& b = aois[j];
            if (a.page != b.page)
                continue;
            bool overlap = a.x_min < b.x_max && b.x_min < a.x_max &&
                           a.y_min < b.y_max && b.y_min < a.y_max;
            if (overlap)
                throw InputError("overlapping AOI boxes for words " + a.word + " and " +
                                 b.word + " in " + path);
        }
    return aois;
}

} // namespace gazegen
