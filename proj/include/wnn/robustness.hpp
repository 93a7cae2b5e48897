#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wnn/netlab.hpp"

namespace wnn {

enum class CorruptionKind { Gaussian, Shot, Impulse };

inline constexpr std::size_t kCorruptionKinds = 3;
inline constexpr int kSeverities = 5;

const char* to_string(CorruptionKind k);
CorruptionKind corruption_from_string(const std::string& s);

// Versioned severity table. The per-kind parameter is the noise magnitude at
// severity 1..5: Gaussian sigma, Shot photon budget (smaller is noisier),
// Impulse flip fraction.
extern const char* const kSeverityTableVersion;
double severity_param(CorruptionKind kind, int severity);

// Per-element noise on values in [0, 1], clamped back to [0, 1]. The input
// must already be in range. One private RNG stream per call: a (kind,
// severity, seed) triple always produces the same corruption.
Tensor corrupt(const Tensor& x, CorruptionKind kind, int severity,
               std::uint64_t seed);

// Corruption error ratio: sum of the candidate's error rates across the five
// severities over the baseline's, scaled by 100. Both vectors hold error
// percentages indexed by severity.
double corruption_error(const std::vector<double>& model_errors,
                        const std::vector<double>& baseline_errors);

// Mean of the three per-kind corruption error ratios.
double mce_noise(double ce_gaussian, double ce_shot, double ce_impulse);

struct AttackConfig {
    double eps = 0.03;
    double alpha = 0.0075;
    std::size_t steps = 10;
    std::uint64_t seed = 0;
    // Off replaces the uniform start inside the ball with the clean input.
    bool random_start = true;
};

// One signed-gradient step of size eps from the clean batch, clamped to
// [0, 1]. The result never leaves the L-infinity eps-ball of the input.
Tensor fgsm(const Model& model, const Tensor& batch,
            const std::vector<int>& labels, double eps);

// Iterated signed-gradient ascent: each step moves by alpha, clamps to
// [0, 1], and projects back onto the eps-ball around the clean batch.
Tensor pgd(const Model& model, const Tensor& batch,
           const std::vector<int>& labels, const AttackConfig& cfg);

// errors[kind][severity - 1] is the classification error percentage of the
// respective model on the corrupted test set.
struct RobustnessReport {
    std::string baseline_id;
    std::array<std::array<double, kSeverities>, kCorruptionKinds> model_errors{};
    std::array<std::array<double, kSeverities>, kCorruptionKinds> baseline_errors{};
    std::array<double, kCorruptionKinds> ce{};
    double mce = 0.0;
    double clean_accuracy = 0.0;
    std::uint64_t seed = 0;
    std::string severity_table_version;
};

// Runs the full corruption grid for both models over the test set. Image i in
// cell (kind, severity) is corrupted under mix_seed(seed, kind, severity, i),
// so cells are independent and the report does not depend on traversal order.
RobustnessReport evaluate_robustness(const Model& model, const Model& baseline,
                                     const std::string& baseline_id,
                                     const Dataset& test, std::uint64_t seed);

std::string report_json(const RobustnessReport& r);

}  // namespace wnn
