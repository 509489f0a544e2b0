#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "har/detail/csv.hpp"
#include "har/errors.hpp"
#include "har/rng.hpp"
#include "har/series.hpp"

namespace har {

// ============================================================================
// Units
// ============================================================================

enum class Unit { G, MetersPerSec2, MilliG };

constexpr double kG = 9.8; // m/s^2 per G

inline Unit parse_unit(const std::string& s) {
    if (s == "g" || s == "G") return Unit::G;
    if (s == "mps2" || s == "m/s2" || s == "m/s^2") return Unit::MetersPerSec2;
    if (s == "milli_g" || s == "mg" || s == "milli-G") return Unit::MilliG;
    throw ConfigError("unknown unit '" + s + "' (expected g, mps2 or milli_g)");
}

// Scale acceleration values to G. Timestamps are untouched.
inline SampleSeries normalize_units(const SampleSeries& series, Unit input_unit) {
    double scale = 1.0;
    switch (input_unit) {
        case Unit::G: scale = 1.0; break;
        case Unit::MetersPerSec2: scale = 1.0 / kG; break;
        case Unit::MilliG: scale = 1.0 / 1000.0; break;
    }
    SampleSeries out = series;
    for (size_t i = 0; i < out.accel.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            float v = out.accel[i][a];
            if (!std::isfinite(v))
                throw DataError("normalize_units: non-finite sample at index " + std::to_string(i));
            out.accel[i][a] = static_cast<float>(v * scale);
        }
    }
    return out;
}

// ============================================================================
// Resampling
// ============================================================================

// Input gaps larger than this split a recording into independent segments;
// nothing is ever interpolated across a gap.
constexpr double kGapSeconds = 1.0;

struct ResampleOptions {
    bool lowpass_12hz = false;   // optional anti-aliasing A/B flag
    double gap_seconds = kGapSeconds;
};

struct ResampleStats {
    size_t segments = 0;
    size_t dropped_segments = 0; // fewer than 2 samples
};

namespace detail {

// [first, last) index ranges of gap-free segments.
inline std::vector<std::pair<size_t, size_t>> segment_ranges(const std::vector<double>& ts,
                                                             double gap_seconds) {
    std::vector<std::pair<size_t, size_t>> segs;
    if (ts.empty()) return segs;
    size_t first = 0;
    for (size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] - ts[i - 1] > gap_seconds) {
            segs.emplace_back(first, i);
            first = i;
        }
    }
    segs.emplace_back(first, ts.size());
    return segs;
}

// Windowed-sinc low-pass FIR applied per segment at the (estimated) input
// rate. Only used behind ResampleOptions::lowpass_12hz.
inline void lowpass_segment(std::vector<std::array<float, 3>>& accel, size_t first, size_t last,
                            double input_rate_hz, double cutoff_hz) {
    if (last - first < 3 || input_rate_hz <= 2.0 * cutoff_hz) return;
    const int half = 15;
    const double fc = cutoff_hz / input_rate_hz; // normalized
    std::vector<double> h(2 * half + 1);
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) {
        double v = (k == 0) ? 2.0 * fc
                            : std::sin(2.0 * M_PI * fc * k) / (M_PI * k);
        v *= 0.54 + 0.46 * std::cos(M_PI * k / half); // Hamming
        h[k + half] = v;
        sum += v;
    }
    for (double& v : h) v /= sum;

    const size_t n = last - first;
    std::vector<std::array<float, 3>> out(n);
    for (size_t i = 0; i < n; ++i) {
        double acc[3] = {0, 0, 0};
        for (int k = -half; k <= half; ++k) {
            long j = static_cast<long>(i) + k;
            j = std::clamp<long>(j, 0, static_cast<long>(n) - 1); // edge hold
            for (int a = 0; a < 3; ++a) acc[a] += h[k + half] * accel[first + j][a];
        }
        for (int a = 0; a < 3; ++a) out[i][a] = static_cast<float>(acc[a]);
    }
    std::copy(out.begin(), out.end(), accel.begin() + first);
}

} // namespace detail

// Piecewise-linear resampling onto an arithmetic grid at cfg.sample_rate_hz.
// Each gap-free segment gets its own grid starting at the segment's first
// timestamp; segments with fewer than 2 samples are dropped. Labels, when
// present, are carried by nearest-neighbor in time.
inline SampleSeries resample(const SampleSeries& series, const WindowingConfig& cfg,
                             const ResampleOptions& opts = {}, ResampleStats* stats = nullptr) {
    validate(cfg);
    SampleSeries src = series;
    const double step = 1.0 / cfg.sample_rate_hz;

    SampleSeries out;
    out.subject_id = src.subject_id;
    auto segs = detail::segment_ranges(src.timestamps, opts.gap_seconds);
    if (stats) stats->segments += segs.size();
    for (auto [first, last] : segs) {
        const size_t n = last - first;
        if (n < 2) {
            if (stats) ++stats->dropped_segments;
            continue;
        }

        if (opts.lowpass_12hz) {
            double span = src.timestamps[last - 1] - src.timestamps[first];
            double rate = static_cast<double>(n - 1) / span;
            detail::lowpass_segment(src.accel, first, last, rate, 12.0);
        }

        const double t0 = src.timestamps[first];
        const double t_end = src.timestamps[last - 1];
        const long n_out = static_cast<long>(std::floor((t_end - t0) * cfg.sample_rate_hz + 1e-9)) + 1;

        size_t j = first; // src index with timestamps[j] <= t < timestamps[j+1]
        for (long k = 0; k < n_out; ++k) {
            const double t = t0 + static_cast<double>(k) * step;
            while (j + 1 < last - 1 && src.timestamps[j + 1] <= t) ++j;
            const double ta = src.timestamps[j];
            const double tb = src.timestamps[j + 1];
            const double u = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
            std::array<float, 3> v;
            for (int a = 0; a < 3; ++a) {
                const double va = src.accel[j][a];
                const double vb = src.accel[j + 1][a];
                v[a] = static_cast<float>(va + (vb - va) * u);
            }
            out.timestamps.push_back(t);
            out.accel.push_back(v);
            if (src.has_labels()) {
                const size_t nearest = (t - ta <= tb - t) ? j : j + 1;
                out.labels.push_back(src.labels[nearest]);
            }
        }
    }
    return out;
}

// ============================================================================
// Windowing
// ============================================================================

// Majority label must cover at least this fraction of a window's samples for
// the window to keep a label.
constexpr double kMajorityLabelFraction = 0.8;

// Cut consecutive non-overlapping windows of exactly window_len samples per
// gap-free segment. Trailing remainders are discarded. A window's label is
// the majority label over its samples; windows whose majority covers < 80%
// stay unlabeled.
inline std::vector<Window> cut_windows(const SampleSeries& series, const WindowingConfig& cfg,
                                       double gap_seconds = kGapSeconds) {
    validate(cfg);
    const int len = cfg.window_len();
    std::vector<Window> windows;
    auto segs = detail::segment_ranges(series.timestamps, gap_seconds);
    for (auto [first, last] : segs) {
        const size_t n = last - first;
        for (size_t off = 0; off + static_cast<size_t>(len) <= n; off += static_cast<size_t>(len)) {
            Window w;
            w.subject_id = series.subject_id;
            w.start_time = series.timestamps[first + off];
            w.samples.resize(static_cast<size_t>(len) * 3);
            for (int i = 0; i < len; ++i)
                for (int a = 0; a < 3; ++a)
                    w.samples[static_cast<size_t>(i) * 3 + a] = series.accel[first + off + i][a];
            if (series.has_labels()) {
                std::map<int, int> counts;
                for (int i = 0; i < len; ++i) ++counts[series.labels[first + off + i]];
                auto best = std::max_element(counts.begin(), counts.end(),
                                             [](auto& a, auto& b) { return a.second < b.second; });
                if (best->second >= static_cast<int>(std::ceil(kMajorityLabelFraction * len)))
                    w.label = best->first;
            }
            windows.push_back(std::move(w));
        }
    }
    return windows;
}

// ============================================================================
// Generic CSV reader
// ============================================================================

// A column is addressed by header name or by 0-based index.
using ColumnRef = std::variant<std::string, int>;

struct CsvSchema {
    char delimiter = ',';
    bool has_header = true;
    ColumnRef subject_col;
    ColumnRef time_col;
    std::array<ColumnRef, 3> xyz_cols;
    std::optional<ColumnRef> label_col;
    Unit unit = Unit::G;
};

struct CsvReadStats {
    size_t rows_read = 0;
    size_t rows_skipped = 0;       // unparseable numerics / non-finite values
    size_t duplicate_timestamps = 0;
};

namespace detail {

inline int resolve_column(const ColumnRef& ref, const std::vector<std::string>& header,
                          const char* what) {
    if (std::holds_alternative<int>(ref)) {
        int idx = std::get<int>(ref);
        if (idx < 0) throw ConfigError(std::string("csv schema: negative index for ") + what);
        return idx;
    }
    const std::string& name = std::get<std::string>(ref);
    for (size_t i = 0; i < header.size(); ++i)
        if (std::string(trim(header[i])) == name) return static_cast<int>(i);
    throw DataError("csv: missing declared column '" + name + "' (" + what + ")");
}

} // namespace detail

// One SampleSeries per subject, each time-sorted. Rows with unparseable
// numerics are skipped and counted.
inline std::vector<SampleSeries> read_csv_dataset(const std::string& path, const CsvSchema& schema,
                                                  CsvReadStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open '" + path + "'");

    std::string line;
    std::vector<std::string> header;
    if (schema.has_header) {
        if (!std::getline(in, line)) throw DataError("csv: empty file '" + path + "'");
        header = detail::split(line, schema.delimiter);
    }
    const int c_subj = detail::resolve_column(schema.subject_col, header, "subject_col");
    const int c_time = detail::resolve_column(schema.time_col, header, "time_col");
    const int c_xyz[3] = {detail::resolve_column(schema.xyz_cols[0], header, "x col"),
                          detail::resolve_column(schema.xyz_cols[1], header, "y col"),
                          detail::resolve_column(schema.xyz_cols[2], header, "z col")};
    const int c_label = schema.label_col ? detail::resolve_column(*schema.label_col, header, "label_col") : -1;
    int need = std::max({c_subj, c_time, c_xyz[0], c_xyz[1], c_xyz[2], c_label});

    struct Row {
        double t;
        std::array<float, 3> a;
        int label;
    };
    std::map<std::string, std::vector<Row>> by_subject;
    CsvReadStats st;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++st.rows_read;
        auto cells = detail::split(line, schema.delimiter);
        if (static_cast<int>(cells.size()) <= need) {
            ++st.rows_skipped;
            continue;
        }
        Row r{};
        double vals[4];
        bool ok = detail::parse_double(cells[c_time], vals[0]);
        for (int a = 0; a < 3 && ok; ++a) ok = detail::parse_double(cells[c_xyz[a]], vals[a + 1]);
        for (int i = 0; i < 4 && ok; ++i) ok = std::isfinite(vals[i]);
        r.label = kNoLabel;
        if (ok && c_label >= 0) {
            long lv;
            ok = detail::parse_long(cells[c_label], lv);
            r.label = static_cast<int>(lv);
        }
        if (!ok) {
            ++st.rows_skipped;
            continue;
        }
        r.t = vals[0];
        for (int a = 0; a < 3; ++a) r.a[a] = static_cast<float>(vals[a + 1]);
        by_subject[std::string(detail::trim(cells[c_subj]))].push_back(r);
    }

    std::vector<SampleSeries> out;
    const bool labeled = schema.label_col.has_value();
    for (auto& [subject, rows] : by_subject) {
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
        SampleSeries s;
        s.subject_id = subject;
        for (const Row& r : rows) {
            if (!s.timestamps.empty() && !(r.t > s.timestamps.back())) {
                ++st.duplicate_timestamps; // keep first occurrence
                continue;
            }
            s.timestamps.push_back(r.t);
            s.accel.push_back(r.a);
            if (labeled) s.labels.push_back(r.label);
        }
        out.push_back(std::move(s));
    }
    if (stats) *stats = st;
    return out;
}

// ============================================================================
// PAMAP2 protocol reader
// ============================================================================

// Column layout per the dataset readme: 54 space-separated columns per line;
// column 1 is the timestamp (s), column 2 the activity id, and the hand-IMU
// +/-16g accelerometer occupies columns 5-7 (x, y, z) in m/s^2.
struct Pamap2Layout {
    static constexpr int column_count = 54;
    static constexpr int timestamp_col = 0;
    static constexpr int activity_col = 1;
    static constexpr int hand_accel16_col0 = 4; // x; y, z follow
};

struct Pamap2Stats {
    size_t rows_skipped = 0;    // NaN accel (wireless dropout) or bad numerics
    size_t null_label_rows = 0; // activity id 0
};

// Activity id 0 ("null") is retained as a label but flagged via stats.
inline SampleSeries read_pamap2_file(const std::string& path, Pamap2Stats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw DataError("pamap2: cannot open '" + path + "'");
    SampleSeries s;
    s.subject_id = std::filesystem::path(path).stem().string();
    Pamap2Stats st;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = detail::split_ws(line);
        if (cells.size() != Pamap2Layout::column_count)
            throw DataError("pamap2: '" + path + "' line " + std::to_string(lineno) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(Pamap2Layout::column_count));
        double t;
        long act;
        double a[3];
        bool ok = detail::parse_double(cells[Pamap2Layout::timestamp_col], t) &&
                  detail::parse_long(cells[Pamap2Layout::activity_col], act);
        for (int i = 0; i < 3 && ok; ++i) {
            ok = detail::parse_double(cells[Pamap2Layout::hand_accel16_col0 + i], a[i]) &&
                 std::isfinite(a[i]);
        }
        if (!ok || !std::isfinite(t)) {
            ++st.rows_skipped;
            continue;
        }
        if (!s.timestamps.empty() && !(t > s.timestamps.back())) {
            ++st.rows_skipped;
            continue;
        }
        if (act == 0) ++st.null_label_rows;
        s.timestamps.push_back(t);
        s.accel.push_back({static_cast<float>(a[0] / kG), static_cast<float>(a[1] / kG),
                           static_cast<float>(a[2] / kG)});
        s.labels.push_back(static_cast<int>(act));
    }
    if (stats) *stats = st;
    return s;
}

// One series per protocol .dat file in the directory, sorted by filename.
inline std::vector<SampleSeries> read_pamap2(const std::string& dir, Pamap2Stats* stats = nullptr) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("pamap2: '" + dir + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".dat") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("pamap2: no .dat files under '" + dir + "'");
    std::vector<SampleSeries> out;
    Pamap2Stats total;
    for (const auto& f : files) {
        Pamap2Stats st;
        out.push_back(read_pamap2_file(f, &st));
        total.rows_skipped += st.rows_skipped;
        total.null_label_rows += st.null_label_rows;
    }
    if (stats) *stats = total;
    return out;
}

// Table of PAMAP2 activity names, keyed by activity id.
inline const std::map<int, std::string>& pamap2_class_names() {
    static const std::map<int, std::string> names = {
        {0, "null"},        {1, "lying"},        {2, "sit"},
        {3, "stand"},       {4, "walk"},         {5, "run"},
        {6, "cycling"},     {7, "nordic_walk"},  {9, "TV"},
        {10, "computer"},   {11, "drive"},       {12, "asc stairs"},
        {13, "desc stairs"},{16, "vacuum"},      {17, "iron"},
        {18, "fold_laundry"},{19, "clean house"},{20, "soccer"},
        {24, "rope_jump"},
    };
    return names;
}

// ============================================================================
// Synthetic corpus
// ============================================================================

struct SynthClassSpec {
    double base_freq_hz = 1.0;
    double amplitude_g = 0.35;
    std::array<double, 3> orientation = {0.0, 0.0, 1.0}; // axis of oscillation
};

struct SynthSpec {
    std::vector<SynthClassSpec> classes;
    int subjects = 2;
    double seconds_per_class = 100.0;
    double noise_sigma = 0.0;
    uint64_t seed = 0;
    double sample_rate_hz = 30.0;
    // Silence between class blocks of one subject, kept larger than the
    // temporal-pair horizon so cross-class windows are never "coincident".
    double class_gap_seconds = 120.0;
};

namespace detail {

inline std::array<double, 3> rotate_zxy(const std::array<double, 3>& v, double theta_z,
                                        double tilt_x, double tilt_y) {
    double cz = std::cos(theta_z), sz = std::sin(theta_z);
    std::array<double, 3> r1 = {cz * v[0] - sz * v[1], sz * v[0] + cz * v[1], v[2]};
    double cy = std::cos(tilt_y), sy = std::sin(tilt_y);
    std::array<double, 3> r2 = {cy * r1[0] + sy * r1[2], r1[1], -sy * r1[0] + cy * r1[2]};
    double cx = std::cos(tilt_x), sx = std::sin(tilt_x);
    return {r2[0], cx * r2[1] - sx * r2[2], sx * r2[1] + cx * r2[2]};
}

} // namespace detail

// Deterministic labeled corpus: one series per (subject, class). Each class
// is an oriented sinusoid plus a 1 G gravity offset plus Gaussian noise,
// with per-subject random phase and wrist rotation.
inline std::vector<SampleSeries> synth_corpus(const SynthSpec& spec) {
    if (spec.classes.empty()) throw ConfigError("synth: at least one class required");
    for (const auto& c : spec.classes)
        if (c.base_freq_hz >= spec.sample_rate_hz / 2.0)
            throw ConfigError("synth: base_freq_hz " + std::to_string(c.base_freq_hz) +
                              " is at or above Nyquist for " + std::to_string(spec.sample_rate_hz) + " Hz");
    if (spec.subjects < 1) throw ConfigError("synth: subjects must be >= 1");

    const double dt = 1.0 / spec.sample_rate_hz;
    const long n_per_class = static_cast<long>(std::llround(spec.seconds_per_class * spec.sample_rate_hz));
    Rng root(spec.seed);

    std::vector<SampleSeries> out;
    for (int subj = 0; subj < spec.subjects; ++subj) {
        Rng subj_rng = root.split(static_cast<uint64_t>(subj));
        const double theta_z = subj_rng.uniform(0.0, 2.0 * M_PI);
        const double tilt_x = subj_rng.uniform(-0.35, 0.35); // ~±20°, wrist wear variation
        const double tilt_y = subj_rng.uniform(-0.35, 0.35);
        const auto gravity = detail::rotate_zxy({0.0, 0.0, 1.0}, theta_z, tilt_x, tilt_y);

        for (size_t cls = 0; cls < spec.classes.size(); ++cls) {
            const auto& cs = spec.classes[cls];
            Rng rng = subj_rng.split(cls + 1);
            const double phase = rng.uniform(0.0, 2.0 * M_PI);
            const auto axis = detail::rotate_zxy(cs.orientation, theta_z, tilt_x, tilt_y);
            const double t_base =
                static_cast<double>(cls) * (spec.seconds_per_class + spec.class_gap_seconds);

            SampleSeries s;
            s.subject_id = "subj" + std::to_string(subj);
            s.timestamps.reserve(n_per_class);
            s.accel.reserve(n_per_class);
            s.labels.reserve(n_per_class);
            for (long i = 0; i < n_per_class; ++i) {
                const double t = static_cast<double>(i) * dt;
                const double osc = cs.amplitude_g * std::sin(2.0 * M_PI * cs.base_freq_hz * t + phase);
                std::array<float, 3> a;
                for (int ax = 0; ax < 3; ++ax) {
                    double v = gravity[ax] + osc * axis[ax];
                    if (spec.noise_sigma > 0.0) v += rng.normal(0.0, spec.noise_sigma);
                    a[ax] = static_cast<float>(v);
                }
                s.timestamps.push_back(t_base + t);
                s.accel.push_back(a);
                s.labels.push_back(static_cast<int>(cls));
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

// Default 4-class desk-scale corpus: classes share amplitude and orientation
// and differ only in frequency, so the statistical baseline cannot separate
// them while a frequency-aware encoder can.
inline SynthSpec default_synth_spec(int classes = 4, int subjects = 8, double seconds_per_class = 200.0,
                                    double noise_sigma = 0.03, uint64_t seed = 7) {
    static const double freqs[] = {0.8, 1.7, 3.4, 6.8, 1.2, 2.4, 4.8, 9.6};
    SynthSpec spec;
    for (int c = 0; c < classes; ++c) {
        SynthClassSpec cs;
        cs.base_freq_hz = freqs[c % 8] * (1.0 + 0.0 * c);
        cs.amplitude_g = 0.35;
        cs.orientation = {0.0, 0.0, 1.0};
        spec.classes.push_back(cs);
    }
    spec.subjects = subjects;
    spec.seconds_per_class = seconds_per_class;
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    return spec;
}

// ============================================================================
// Window cache (flat binary)
// ============================================================================

namespace detail {

constexpr char kWindowMagic[9] = "HARWIN01";

template <typename T>
void write_le(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("window cache: truncated file");
    return v;
}

} // namespace detail

inline void save_windows(const std::string& path, const std::vector<Window>& windows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("window cache: cannot write '" + path + "'");
    os.write(detail::kWindowMagic, 8);
    detail::write_le<uint32_t>(os, static_cast<uint32_t>(windows.size()));
    for (const Window& w : windows) {
        detail::write_le<uint32_t>(os, static_cast<uint32_t>(w.subject_id.size()));
        os.write(w.subject_id.data(), static_cast<std::streamsize>(w.subject_id.size()));
        detail::write_le<double>(os, w.start_time);
        detail::write_le<int32_t>(os, w.label);
        os.write(reinterpret_cast<const char*>(w.samples.data()),
                 static_cast<std::streamsize>(w.samples.size() * sizeof(float)));
    }
    if (!os) throw DataError("window cache: write failed for '" + path + "'");
}

inline std::vector<Window> load_windows(const std::string& path, int window_len = 300) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("window cache: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, detail::kWindowMagic, 8) != 0)
        throw DataError("window cache: bad magic in '" + path + "'");
    const uint32_t count = detail::read_le<uint32_t>(is);
    std::vector<Window> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Window w;
        const uint32_t slen = detail::read_le<uint32_t>(is);
        w.subject_id.resize(slen);
        is.read(w.subject_id.data(), slen);
        w.start_time = detail::read_le<double>(is);
        w.label = detail::read_le<int32_t>(is);
        w.samples.resize(static_cast<size_t>(window_len) * 3);
        is.read(reinterpret_cast<char*>(w.samples.data()),
                static_cast<std::streamsize>(w.samples.size() * sizeof(float)));
        if (!is) throw DataError("window cache: truncated windows in '" + path + "'");
        out.push_back(std::move(w));
    }
    return out;
}

// Full preprocessing: normalize -> resample -> cut, applied per series.
inline std::vector<Window> windows_from_series(const std::vector<SampleSeries>& series,
                                               const WindowingConfig& cfg, Unit unit = Unit::G,
                                               const ResampleOptions& opts = {},
                                               ResampleStats* stats = nullptr) {
    std::vector<Window> all;
    for (const auto& s : series) {
        SampleSeries n = normalize_units(s, unit);
        SampleSeries r = resample(n, cfg, opts, stats);
        auto w = cut_windows(r, cfg, opts.gap_seconds);
        all.insert(all.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    return all;
}

} // namespace har
