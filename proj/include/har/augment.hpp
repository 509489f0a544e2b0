#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/rng.hpp"
#include "har/series.hpp"

namespace har {

// Stochastic window transformations used to build augmentation coincidence
// pairs. Parameter ranges are centralized here; all magnitudes are chosen to
// be visible yet label-preserving at 1 G scale.
enum class AugKind { Smooth, TimeTranslate, BaselineJump, BaselineWander, Rotate, GaussianNoise, Compose };

struct AugmentationSpec {
    AugKind kind = AugKind::GaussianNoise;

    // smooth: per-axis median filter, odd kernel drawn from [kernel_min, kernel_max]
    int kernel_min = 5;
    int kernel_max = 15;

    // time_translate: circular shift by k ~ U{-max_shift, ..., max_shift} samples
    int max_shift = 60;

    // baseline_jump: step height ~ U(jump_min, jump_max) G on one random axis
    double jump_min = -0.5;
    double jump_max = 0.5;

    // baseline_wander: per-axis a*sin(2*pi*f*t + phi), a ~ U(0, wander_amp_max) G,
    // f ~ U(wander_freq_min, wander_freq_max) Hz
    double wander_amp_max = 0.25;
    double wander_freq_min = 0.01;
    double wander_freq_max = 0.1;

    // rotate: z rotation theta ~ U(0, 2*pi) plus tilts ~ U(-max_tilt_deg, max_tilt_deg)
    // about x and y; planar restricts to the z rotation alone
    double max_tilt_deg = 15.0;
    bool planar = false;

    // gaussian_noise: sigma ~ U(sigma_min, sigma_max) G
    double sigma_min = 0.01;
    double sigma_max = 0.05;

    // compose: ordered parts, depth capped
    std::vector<AugmentationSpec> parts;

    static AugmentationSpec of(AugKind k) {
        AugmentationSpec s;
        s.kind = k;
        return s;
    }
};

constexpr int kMaxComposeDepth = 3;

inline const char* aug_kind_name(AugKind k) {
    switch (k) {
        case AugKind::Smooth: return "smooth";
        case AugKind::TimeTranslate: return "time_translate";
        case AugKind::BaselineJump: return "baseline_jump";
        case AugKind::BaselineWander: return "baseline_wander";
        case AugKind::Rotate: return "rotate";
        case AugKind::GaussianNoise: return "gaussian_noise";
        case AugKind::Compose: return "compose";
    }
    return "?";
}

inline AugKind parse_aug_kind(const std::string& s) {
    for (AugKind k : {AugKind::Smooth, AugKind::TimeTranslate, AugKind::BaselineJump,
                      AugKind::BaselineWander, AugKind::Rotate, AugKind::GaussianNoise, AugKind::Compose})
        if (s == aug_kind_name(k)) return k;
    throw ConfigError("unknown augmentation kind '" + s + "'");
}

inline void validate(const AugmentationSpec& spec, int depth = 0) {
    if (depth > kMaxComposeDepth) throw ConfigError("augment: compose depth exceeds cap");
    switch (spec.kind) {
        case AugKind::Smooth:
            if (spec.kernel_min < 1 || spec.kernel_max < spec.kernel_min)
                throw ConfigError("augment: bad smooth kernel range");
            break;
        case AugKind::TimeTranslate:
            if (spec.max_shift < 0) throw ConfigError("augment: negative max_shift");
            break;
        case AugKind::BaselineJump:
            if (spec.jump_max < spec.jump_min) throw ConfigError("augment: bad jump range");
            break;
        case AugKind::BaselineWander:
            if (spec.wander_amp_max < 0 || spec.wander_freq_max < spec.wander_freq_min)
                throw ConfigError("augment: bad wander range");
            break;
        case AugKind::Rotate:
            if (spec.max_tilt_deg < 0 || spec.max_tilt_deg > 90) throw ConfigError("augment: bad tilt range");
            break;
        case AugKind::GaussianNoise:
            if (spec.sigma_min < 0 || spec.sigma_max < spec.sigma_min)
                throw ConfigError("augment: bad sigma range");
            break;
        case AugKind::Compose:
            if (spec.parts.empty()) throw ConfigError("augment: empty compose");
            for (const auto& p : spec.parts) validate(p, depth + 1);
            break;
    }
}

namespace detail {

inline void median_filter_axis(std::vector<float>& samples, int len, int axis, int kernel) {
    const int half = kernel / 2;
    std::vector<float> col(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) col[i] = samples[static_cast<size_t>(i) * 3 + axis];
    std::vector<float> buf;
    buf.reserve(kernel);
    for (int i = 0; i < len; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(len - 1, i + half);
        buf.assign(col.begin() + lo, col.begin() + hi + 1);
        const size_t mid = buf.size() / 2;
        std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
        samples[static_cast<size_t>(i) * 3 + axis] = buf[mid];
    }
}

// R = Rx(tx) * Ry(ty) * Rz(theta), applied to every sample vector.
inline std::array<std::array<float, 3>, 3> rotation_matrix(double theta, double tx, double ty) {
    const double cz = std::cos(theta), sz = std::sin(theta);
    const double cy = std::cos(ty), sy = std::sin(ty);
    const double cx = std::cos(tx), sx = std::sin(tx);
    // row-major Rx*Ry*Rz
    const double m[3][3] = {
        {cy * cz, -cy * sz, sy},
        {sx * sy * cz + cx * sz, -sx * sy * sz + cx * cz, -sx * cy},
        {-cx * sy * cz + sx * sz, cx * sy * sz + sx * cz, cx * cy},
    };
    std::array<std::array<float, 3>, 3> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = static_cast<float>(m[i][j]);
    return r;
}

} // namespace detail

// Apply one transformation. Output keeps the window's shape, identity and
// label; only the samples change.
inline Window apply(const AugmentationSpec& spec, const Window& w, Rng& rng) {
    validate(spec);
    Window out = w;
    const int len = w.length();
    switch (spec.kind) {
        case AugKind::Smooth: {
            // odd kernel size drawn from the configured range
            const int n_odd = (spec.kernel_max - spec.kernel_min) / 2 + 1;
            const int kernel = spec.kernel_min + 2 * static_cast<int>(rng.index(static_cast<size_t>(n_odd)));
            for (int a = 0; a < 3; ++a) detail::median_filter_axis(out.samples, len, a, kernel);
            break;
        }
        case AugKind::TimeTranslate: {
            const int k = static_cast<int>(rng.uniform_int(-spec.max_shift, spec.max_shift));
            const int shift = ((k % len) + len) % len;
            for (int i = 0; i < len; ++i) {
                const int src = (i + shift) % len;
                for (int a = 0; a < 3; ++a) out.at(i, a) = w.at(src, a);
            }
            break;
        }
        case AugKind::BaselineJump: {
            const float h = static_cast<float>(rng.uniform(spec.jump_min, spec.jump_max));
            const int axis = static_cast<int>(rng.index(3));
            const int onset = static_cast<int>(rng.index(static_cast<size_t>(len)));
            for (int i = onset; i < len; ++i) out.at(i, axis) += h;
            break;
        }
        case AugKind::BaselineWander: {
            for (int a = 0; a < 3; ++a) {
                const double amp = rng.uniform(0.0, spec.wander_amp_max);
                const double freq = rng.uniform(spec.wander_freq_min, spec.wander_freq_max);
                const double phase = rng.uniform(0.0, 2.0 * M_PI);
                for (int i = 0; i < len; ++i) {
                    const double t = static_cast<double>(i) / 30.0;
                    out.at(i, a) += static_cast<float>(amp * std::sin(2.0 * M_PI * freq * t + phase));
                }
            }
            break;
        }
        case AugKind::Rotate: {
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            double tx = 0.0, ty = 0.0;
            if (!spec.planar) {
                const double tilt = spec.max_tilt_deg * M_PI / 180.0;
                tx = rng.uniform(-tilt, tilt);
                ty = rng.uniform(-tilt, tilt);
            }
            const auto r = detail::rotation_matrix(theta, tx, ty);
            for (int i = 0; i < len; ++i) {
                const float x = w.at(i, 0), y = w.at(i, 1), z = w.at(i, 2);
                for (int a = 0; a < 3; ++a)
                    out.at(i, a) = r[a][0] * x + r[a][1] * y + r[a][2] * z;
            }
            break;
        }
        case AugKind::GaussianNoise: {
            const double sigma = rng.uniform(spec.sigma_min, spec.sigma_max);
            for (auto& v : out.samples) v += static_cast<float>(rng.normal(0.0, sigma));
            break;
        }
        case AugKind::Compose: {
            for (const auto& p : spec.parts) out = apply(p, out, rng);
            break;
        }
    }
    return out;
}

// Deterministic rotation with explicit angles; used by tests and by callers
// that need the theta = 0 identity.
inline Window rotate_exact(const Window& w, double theta, double tilt_x = 0.0, double tilt_y = 0.0) {
    Window out = w;
    const auto r = detail::rotation_matrix(theta, tilt_x, tilt_y);
    for (int i = 0; i < w.length(); ++i) {
        const float x = w.at(i, 0), y = w.at(i, 1), z = w.at(i, 2);
        for (int a = 0; a < 3; ++a) out.at(i, a) = r[a][0] * x + r[a][1] * y + r[a][2] * z;
    }
    return out;
}

struct AugChoice {
    size_t menu_index = 0;
    std::string description;
};

// (original, augmented view) pair; the menu choice is recorded for
// reproducibility when `choice` is provided.
inline std::pair<Window, Window> make_augmented_pair(const Window& w,
                                                     const std::vector<AugmentationSpec>& menu,
                                                     Rng& rng, AugChoice* choice = nullptr) {
    if (menu.empty()) throw ConfigError("augment: empty menu");
    const size_t pick = rng.index(menu.size());
    Window aug = apply(menu[pick], w, rng);
    if (choice) {
        choice->menu_index = pick;
        choice->description = aug_kind_name(menu[pick].kind);
    }
    return {w, std::move(aug)};
}

// The six single transformations with default parameter ranges.
inline std::vector<AugmentationSpec> default_menu() {
    return {AugmentationSpec::of(AugKind::Smooth),       AugmentationSpec::of(AugKind::TimeTranslate),
            AugmentationSpec::of(AugKind::BaselineJump), AugmentationSpec::of(AugKind::BaselineWander),
            AugmentationSpec::of(AugKind::Rotate),       AugmentationSpec::of(AugKind::GaussianNoise)};
}

} // namespace har
