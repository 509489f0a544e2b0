#pragma once

// Shared test fixtures and oracles. Everything here is independent of the
// library's fast paths; reference implementations are naive on purpose.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "har/rng.hpp"
#include "har/series.hpp"

namespace test_support {

inline har::Window make_window(const std::string& subject, double t0, int len = 300,
                               float fill = 0.0f, int label = har::kNoLabel) {
    har::Window w;
    w.subject_id = subject;
    w.start_time = t0;
    w.samples.assign(static_cast<size_t>(len) * 3, fill);
    w.label = label;
    return w;
}

inline har::Window random_window(har::Rng& rng, const std::string& subject, double t0,
                                 int len = 300, int label = har::kNoLabel) {
    har::Window w = make_window(subject, t0, len, 0.0f, label);
    for (auto& v : w.samples) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return w;
}

// A regular grid of windows, `count` per subject, 10 s apart.
inline std::vector<har::Window> grid_corpus(int subjects, int count, int len = 300) {
    std::vector<har::Window> out;
    har::Rng rng(99);
    for (int s = 0; s < subjects; ++s)
        for (int i = 0; i < count; ++i)
            out.push_back(random_window(rng, "s" + std::to_string(s), 10.0 * i, len));
    return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("har_tests_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace test_support
