#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "har/errors.hpp"

namespace har {

constexpr int kNoLabel = -1;

// Timestamped 3-axis acceleration stream for one subject, in units of G.
struct SampleSeries {
    std::string subject_id;
    std::vector<double> timestamps;            // seconds, strictly increasing
    std::vector<std::array<float, 3>> accel;   // G
    std::vector<int> labels;                   // empty = unlabeled; else 1:1 with timestamps

    bool has_labels() const { return !labels.empty(); }
    size_t size() const { return timestamps.size(); }
};

struct WindowingConfig {
    double sample_rate_hz = 30.0;
    double window_seconds = 10.0;

    int window_len() const {
        return static_cast<int>(std::lround(sample_rate_hz * window_seconds));
    }
};

inline void validate(const WindowingConfig& cfg) {
    if (cfg.sample_rate_hz <= 0.0) throw ConfigError("windowing: sample_rate_hz must be > 0");
    if (cfg.window_seconds <= 0.0) throw ConfigError("windowing: window_seconds must be > 0");
}

// Fixed window_len x 3 block of samples; the atomic unit of all learning.
struct Window {
    std::string subject_id;
    double start_time = 0.0;
    std::vector<float> samples;   // row-major, window_len rows of (x, y, z)
    int label = kNoLabel;

    int length() const { return static_cast<int>(samples.size() / 3); }
    float at(int row, int axis) const { return samples[static_cast<size_t>(row) * 3 + axis]; }
    float& at(int row, int axis) { return samples[static_cast<size_t>(row) * 3 + axis]; }
};

// Structural validation. Returns the number of samples with any component
// beyond 16 G in magnitude (expected range warning, not an error).
inline size_t validate(const SampleSeries& s) {
    if (s.accel.size() != s.timestamps.size())
        throw DataError("series '" + s.subject_id + "': accel/timestamp length mismatch");
    if (s.has_labels() && s.labels.size() != s.timestamps.size())
        throw DataError("series '" + s.subject_id + "': labels not aligned 1:1 with timestamps");
    size_t beyond_16g = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i > 0 && !(s.timestamps[i] > s.timestamps[i - 1]))
            throw DataError("series '" + s.subject_id + "': timestamps not strictly increasing at index " +
                            std::to_string(i));
        bool big = false;
        for (int a = 0; a < 3; ++a) {
            float v = s.accel[i][a];
            if (!std::isfinite(v))
                throw DataError("series '" + s.subject_id + "': non-finite accel at index " + std::to_string(i));
            if (std::fabs(v) > 16.0f) big = true;
        }
        if (big) ++beyond_16g;
    }
    return beyond_16g;
}

inline void validate(const Window& w, int expect_len) {
    if (w.length() != expect_len || w.samples.size() != static_cast<size_t>(expect_len) * 3)
        throw DataError("window '" + w.subject_id + "': expected " + std::to_string(expect_len) +
                        " rows, got " + std::to_string(w.length()));
    for (float v : w.samples)
        if (!std::isfinite(v)) throw DataError("window '" + w.subject_id + "': non-finite sample");
}

} // namespace har
