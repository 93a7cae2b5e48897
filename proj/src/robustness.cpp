#include "wnn/robustness.hpp"

#include <cmath>
#include <sstream>

#include "wnn/errors.hpp"
#include "wnn/rng.hpp"

#include "json.hpp"

namespace wnn {

namespace {

// Severity escalates left to right. Shot noise lists the photon budget, so it
// descends; the other two list the noise magnitude directly.
constexpr double kGaussianSigma[kSeverities] = {0.04, 0.08, 0.12, 0.18, 0.26};
constexpr double kShotPhotons[kSeverities] = {60.0, 25.0, 12.0, 5.0, 3.0};
constexpr double kImpulseFraction[kSeverities] = {0.03, 0.06, 0.09, 0.17, 0.27};

void check_unit_range(const Tensor& x, const char* who) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= 0.0 && x[i] <= 1.0))
            throw OutOfRangeInput(std::string(who) + ": value " +
                                  std::to_string(x[i]) + " at flat index " +
                                  std::to_string(i) + " is outside [0, 1]");
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Mean cross-entropy gradient with respect to the input pixels.
Tensor input_gradient(const Model& model, const Tensor& batch,
                      const std::vector<int>& labels) {
    Tape tape;
    const ForwardPass fp = model.forward(tape, batch);
    tape.backward(softmax_ce(tape, fp.logits, labels));
    return tape.grad(fp.input);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

const char* const kSeverityTableVersion = "noise-v1";

const char* to_string(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::Gaussian: return "gaussian";
        case CorruptionKind::Shot: return "shot";
        case CorruptionKind::Impulse: return "impulse";
    }
    return "?";
}

CorruptionKind corruption_from_string(const std::string& s) {
    if (s == "gaussian") return CorruptionKind::Gaussian;
    if (s == "shot") return CorruptionKind::Shot;
    if (s == "impulse") return CorruptionKind::Impulse;
    throw InvalidConfig("unknown corruption kind '" + s +
                        "', expected gaussian|shot|impulse");
}

double severity_param(CorruptionKind kind, int severity) {
    if (severity < 1 || severity > kSeverities)
        throw InvalidConfig("severity " + std::to_string(severity) +
                            " outside 1.." + std::to_string(kSeverities));
    const std::size_t s = static_cast<std::size_t>(severity - 1);
    switch (kind) {
        case CorruptionKind::Gaussian: return kGaussianSigma[s];
        case CorruptionKind::Shot: return kShotPhotons[s];
        case CorruptionKind::Impulse: return kImpulseFraction[s];
    }
    throw InvalidConfig("bad corruption kind");
}

Tensor corrupt(const Tensor& x, CorruptionKind kind, int severity,
               std::uint64_t seed) {
    check_unit_range(x, "corrupt");
    const double p = severity_param(kind, severity);
    Rng rng(seed);
    Tensor y = x;
    switch (kind) {
        case CorruptionKind::Gaussian:
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = clamp01(y[i] + rng.normal(0.0, p));
            break;
        case CorruptionKind::Shot:
            // Photon-counting model: intensity x observed as Poisson(x*p)/p.
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = clamp01(static_cast<double>(rng.poisson(y[i] * p)) / p);
            break;
        case CorruptionKind::Impulse:
            // Salt and pepper, each with half the flip budget. One uniform
            // per pixel keeps the stream layout independent of the outcome.
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double u = rng.uniform();
                if (u < 0.5 * p)
                    y[i] = 1.0;
                else if (u < p)
                    y[i] = 0.0;
            }
            break;
    }
    return y;
}

double corruption_error(const std::vector<double>& model_errors,
                        const std::vector<double>& baseline_errors) {
    if (model_errors.size() != baseline_errors.size() || model_errors.empty())
        throw ShapeMismatch("corruption_error: " +
                            std::to_string(model_errors.size()) + " vs " +
                            std::to_string(baseline_errors.size()) +
                            " severity entries");
    double num = 0.0, den = 0.0;
    for (double e : model_errors) num += e;
    for (double e : baseline_errors) den += e;
    if (den == 0.0)
        throw ZeroBaseline("baseline made no errors at any severity");
    // Grouped so a model measured against itself lands on 100 exactly.
    return 100.0 * (num / den);
}

double mce_noise(double ce_gaussian, double ce_shot, double ce_impulse) {
    return (ce_gaussian + ce_shot + ce_impulse) / 3.0;
}

Tensor fgsm(const Model& model, const Tensor& batch,
            const std::vector<int>& labels, double eps) {
    check_unit_range(batch, "fgsm");
    if (eps < 0.0) throw InvalidConfig("fgsm: negative eps");
    const Tensor g = input_gradient(model, batch, labels);
    Tensor adv = batch;
    for (std::size_t i = 0; i < adv.size(); ++i)
        adv[i] = clamp01(adv[i] + eps * sign(g[i]));
    return adv;
}

Tensor pgd(const Model& model, const Tensor& batch,
           const std::vector<int>& labels, const AttackConfig& cfg) {
    check_unit_range(batch, "pgd");
    if (cfg.eps < 0.0 || cfg.alpha < 0.0)
        throw InvalidConfig("pgd: negative eps or alpha");
    if (cfg.eps == 0.0) return batch;

    Tensor adv = batch;
    if (cfg.random_start) {
        Rng rng(cfg.seed);
        for (std::size_t i = 0; i < adv.size(); ++i)
            adv[i] = clamp01(adv[i] + rng.uniform(-cfg.eps, cfg.eps));
    }
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const Tensor g = input_gradient(model, adv, labels);
        for (std::size_t i = 0; i < adv.size(); ++i) {
            double v = clamp01(adv[i] + cfg.alpha * sign(g[i]));
            // Projection onto the eps-ball of the clean input. The ball of a
            // [0, 1] point never clips back outside [0, 1].
            const double lo = batch[i] - cfg.eps, hi = batch[i] + cfg.eps;
            adv[i] = v < lo ? lo : (v > hi ? hi : v);
        }
    }
    return adv;
}

RobustnessReport evaluate_robustness(const Model& model, const Model& baseline,
                                     const std::string& baseline_id,
                                     const Dataset& test, std::uint64_t seed) {
    if (test.size() == 0) throw EmptyDataset("evaluate_robustness");
    RobustnessReport r;
    r.baseline_id = baseline_id;
    r.seed = seed;
    r.severity_table_version = kSeverityTableVersion;
    r.clean_accuracy = evaluate(model, test).accuracy;

    const std::size_t n = test.size();
    const std::size_t pix = test.images.size() / n;
    for (std::size_t k = 0; k < kCorruptionKinds; ++k) {
        const CorruptionKind kind = static_cast<CorruptionKind>(k);
        for (int sev = 1; sev <= kSeverities; ++sev) {
            Dataset cell;
            cell.labels = test.labels;
            cell.images = zeros_like(test.images);
            for (std::size_t i = 0; i < n; ++i) {
                Tensor img({1, test.images.dim(1), test.images.dim(2),
                            test.images.dim(3)});
                std::copy(test.images.data() + i * pix,
                          test.images.data() + (i + 1) * pix, img.data());
                const Tensor noisy = corrupt(
                    img, kind, sev,
                    mix_seed(seed, k, static_cast<std::uint64_t>(sev), i));
                std::copy(noisy.data(), noisy.data() + pix,
                          cell.images.data() + i * pix);
            }
            r.model_errors[k][sev - 1] = 100.0 - evaluate(model, cell).accuracy;
            r.baseline_errors[k][sev - 1] =
                100.0 - evaluate(baseline, cell).accuracy;
        }
        r.ce[k] = corruption_error(
            std::vector<double>(r.model_errors[k].begin(),
                                r.model_errors[k].end()),
            std::vector<double>(r.baseline_errors[k].begin(),
                                r.baseline_errors[k].end()));
    }
    r.mce = mce_noise(r.ce[0], r.ce[1], r.ce[2]);
    return r;
}

std::string report_json(const RobustnessReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = "wnn-robustness-v1";
    j["baseline_id"] = r.baseline_id;
    for (std::size_t k = 0; k < kCorruptionKinds; ++k) {
        const char* kind = to_string(static_cast<CorruptionKind>(k));
        for (int sev = 1; sev <= kSeverities; ++sev) {
            j["errors"][kind][std::to_string(sev)] = r.model_errors[k][sev - 1];
            j["baseline_errors"][kind][std::to_string(sev)] =
                r.baseline_errors[k][sev - 1];
        }
        j["ce"][kind] = r.ce[k];
    }
    j["mce_noise"] = r.mce;
    j["clean_accuracy"] = r.clean_accuracy;
    j["seeds"]["corruption"] = r.seed;
    j["severity_table_version"] = r.severity_table_version;
    std::ostringstream out;
    out << j.dump(2) << "\n";
    return out.str();
}

}  // namespace wnn
