#include "wnn/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "wnn/errors.hpp"
#include "wnn/filterbank.hpp"
#include "wnn/image_io.hpp"
#include "wnn/netlab.hpp"
#include "wnn/rng.hpp"
#include "wnn/robustness.hpp"
#include "wnn/tensor_io.hpp"
#include "wnn/transforms.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace wnn {

namespace {

using nlohmann::ordered_json;

constexpr BoundaryMode kMode = BoundaryMode::Periodic;

BoundaryMode parse_boundary(const std::string& s) {
    if (s == "periodic") return BoundaryMode::Periodic;
    throw InvalidConfig("boundary '" + s +
                        "' is not supported here; use periodic");
}

// [C, H, W] image to the [1, C, H, W] layout the batch operations use.
Tensor as_batch(const Tensor& img) {
    Tensor x({1, img.dim(0), img.dim(1), img.dim(2)});
    std::copy(img.data(), img.data() + img.size(), x.data());
    return x;
}

Tensor as_image(const Tensor& batch) {
    Tensor img({batch.dim(1), batch.dim(2), batch.dim(3)});
    std::copy(batch.data(), batch.data() + batch.size(), img.data());
    return img;
}

struct Rescale {
    double min = 0.0;
    double max = 0.0;
};

// Affine map of arbitrary band values onto [0, 1] for 8-bit display. A flat
// tensor maps to zero. The inverse parameters go into a sidecar.
Rescale rescale_for_display(Tensor& t) {
    Rescale r{std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < t.size(); ++i) {
        r.min = std::min(r.min, t[i]);
        r.max = std::max(r.max, t[i]);
    }
    const double span = r.max - r.min;
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = span > 0.0 ? (t[i] - r.min) / span : 0.0;
    return r;
}

std::string image_ext(const Tensor& img) {
    return img.dim(0) == 1 ? ".pgm" : ".ppm";
}

void write_json_file(const std::string& path, const ordered_json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoFailure("cannot open '" + path + "' for writing");
    f << j.dump(2) << "\n";
}

DownsampleKind parse_mode(const std::string& s) {
    return downsample_from_string(s);
}

// Single-image downsampling for the CLI comparison surface. Pool modes run
// through a throwaway tape; dwt_concat tiles its four bands into a mosaic at
// the original extent.
Tensor downsample_image(const Tensor& img, DownsampleKind kind,
                        const WaveletSpec* spec) {
    const Tensor x = as_batch(img);
    switch (kind) {
        case DownsampleKind::MaxPool2: {
            Tape t;
            return as_image(t.value(maxpool2(t, t.leaf(x))));
        }
        case DownsampleKind::AvgPool2: {
            Tape t;
            return as_image(t.value(avgpool2(t, t.leaf(x))));
        }
        case DownsampleKind::StridedConv2:
            return as_image(subsample2(x));
        case DownsampleKind::DwtLL:
            return as_image(dwt_ll(x, *spec, kMode));
        case DownsampleKind::DwtAvg: {
            Tape t;
            return as_image(t.value(dwt_avg(t, t.leaf(x), *spec)));
        }
        case DownsampleKind::DwtConcat: {
            const Bands2d b = dwt2d(x, *spec, kMode);
            const std::size_t C = img.dim(0), m = b.ll.dim(2), n = b.ll.dim(3);
            Tensor mosaic({C, 2 * m, 2 * n});
            const Tensor* quads[2][2] = {{&b.ll, &b.lh}, {&b.hl, &b.hh}};
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t qi = 0; qi < 2; ++qi)
                    for (std::size_t qj = 0; qj < 2; ++qj)
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < n; ++j)
                                mosaic.at(c, qi * m + i, qj * n + j) =
                                    quads[qi][qj]->at(0, c, i, j);
            return mosaic;
        }
    }
    throw InvalidConfig("bad downsample mode");
}

std::array<DownsampleKind, 3> triple(DownsampleKind k) { return {k, k, k}; }

// Mean cross-entropy of a model on one labeled batch, no backward pass.
double batch_loss(const Model& m, const Tensor& batch,
                  const std::vector<int>& labels) {
    Tape tape;
    const ForwardPass fp = m.forward(tape, batch);
    return tape.value(softmax_ce(tape, fp.logits, labels))[0];
}

std::size_t count_correct(const Model& m, const Tensor& batch,
                          const std::vector<int>& labels) {
    Tape tape;
    const ForwardPass fp = m.forward(tape, batch);
    const Tensor& z = tape.value(fp.logits);
    const std::size_t K = z.dim(1);
    std::size_t hits = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < K; ++k)
            if (z.at(b, k) > z.at(b, best)) best = k;
        hits += best == static_cast<std::size_t>(labels[b]) ? 1 : 0;
    }
    return hits;
}

Tensor random_batch(const Model& m, std::size_t B, std::uint64_t seed) {
    Rng rng(seed);
    Tensor b({B, m.config.in_channels, m.config.input_extent,
              m.config.input_extent});
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(0.05, 0.95);
    return b;
}

void slice_batch(const Dataset& d, std::size_t lo, std::size_t hi,
                 Tensor& batch, std::vector<int>& labels) {
    const std::size_t pix = d.images.size() / d.size();
    batch = Tensor({hi - lo, d.images.dim(1), d.images.dim(2), d.images.dim(3)});
    std::copy(d.images.data() + lo * pix, d.images.data() + hi * pix,
              batch.data());
    labels.assign(d.labels.begin() + static_cast<std::ptrdiff_t>(lo),
                  d.labels.begin() + static_cast<std::ptrdiff_t>(hi));
}

int cmd_decompose(const std::string& in, const std::string& wavelet,
                  const std::string& boundary, const std::string& out_dir,
                  std::ostream& out) {
    const BoundaryMode mode = parse_boundary(boundary);
    const WaveletSpec& spec = get_wavelet(wavelet);
    const Tensor img = read_image(in);
    const Bands2d bands = dwt2d(as_batch(img), spec, mode);

    std::filesystem::create_directories(out_dir);
    const std::string ext = image_ext(img);
    const std::pair<const char*, const Tensor*> named[4] = {
        {"ll", &bands.ll}, {"lh", &bands.lh}, {"hl", &bands.hl},
        {"hh", &bands.hh}};

    ordered_json sidecar;
    sidecar["schema"] = "wnn-bands-v1";
    sidecar["wavelet"] = spec.name;
    sidecar["boundary"] = boundary;
    sidecar["height"] = img.dim(1);
    sidecar["width"] = img.dim(2);

    TensorMap raw;
    for (const auto& [name, band] : named) {
        raw.emplace_back(name, *band);
        Tensor display = as_image(*band);
        const Rescale r = rescale_for_display(display);
        sidecar["bands"][name] = {{"min", r.min}, {"max", r.max}};
        write_image(out_dir + "/" + name + ext, display);
    }
    write_tensors(out_dir + "/bands.wtns", raw, TensorDType::F64);
    write_json_file(out_dir + "/bands.json", sidecar);
    out << "wrote " << out_dir << "/{ll,lh,hl,hh}" << ext
        << ", bands.wtns, bands.json\n";
    return 0;
}

int cmd_reconstruct(const std::string& bands_path, const std::string& wavelet,
                    const std::string& out_path, std::ostream& out) {
    const WaveletSpec& spec = get_wavelet(wavelet);
    const TensorMap raw = read_tensors(bands_path);
    Bands2d bands;
    bands.ll = find_tensor(raw, "ll");
    bands.lh = find_tensor(raw, "lh");
    bands.hl = find_tensor(raw, "hl");
    bands.hh = find_tensor(raw, "hh");
    const Tensor y = idwt2d(bands, spec, kMode);
    write_image(out_path, as_image(y));
    out << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"wavelet network toolkit"};
    app.require_subcommand(1);

    // decompose
    std::string in_path, wavelet = "haar", boundary = "periodic", out_dir;
    auto* dec = app.add_subcommand("decompose",
                                   "split an image into wavelet bands");
    dec->add_option("--in", in_path, "input image (P5/P6)")->required();
    dec->add_option("--wavelet", wavelet, "wavelet name");
    dec->add_option("--boundary", boundary, "boundary handling");
    dec->add_option("--out-dir", out_dir, "output directory")->required();

    // reconstruct
    std::string bands_path, rec_wavelet = "haar", rec_out;
    auto* rec = app.add_subcommand("reconstruct",
                                   "rebuild an image from saved bands");
    rec->add_option("--bands", bands_path, "bands.wtns from decompose")
        ->required();
    rec->add_option("--wavelet", rec_wavelet, "wavelet name");
    rec->add_option("--out", rec_out, "output image")->required();

    // denoise
    std::string dn_in, dn_wavelet = "haar", dn_out;
    double dn_lambda = 0.1;
    std::size_t dn_levels = 1;
    auto* dn = app.add_subcommand("denoise", "soft-threshold detail bands");
    dn->add_option("--in", dn_in, "input image")->required();
    dn->add_option("--wavelet", dn_wavelet, "wavelet name");
    dn->add_option("--lambda", dn_lambda, "shrinkage threshold");
    dn->add_option("--levels", dn_levels, "decomposition depth");
    dn->add_option("--out", dn_out, "output image")->required();

    // downsample
    std::string ds_in, ds_mode, ds_wavelet = "haar", ds_out;
    auto* ds = app.add_subcommand("downsample",
                                  "halve an image by one of the model's modes");
    ds->add_option("--in", ds_in, "input image")->required();
    ds->add_option("--mode", ds_mode,
                   "maxpool|avgpool|stride|dwt_ll|dwt_avg|dwt_concat")
        ->required();
    ds->add_option("--wavelet", ds_wavelet, "wavelet for dwt modes");
    ds->add_option("--out", ds_out, "output image")->required();

    // corrupt
    std::string co_in, co_type, co_out;
    int co_severity = 3;
    std::uint64_t co_seed = 0;
    auto* co = app.add_subcommand("corrupt", "apply seeded test noise");
    co->add_option("--in", co_in, "input image")->required();
    co->add_option("--type", co_type, "gaussian|shot|impulse")->required();
    co->add_option("--severity", co_severity, "1..5");
    co->add_option("--seed", co_seed, "noise seed")->required();
    co->add_option("--out", co_out, "output image")->required();

    // train
    std::string tr_arch = "baseline", tr_wavelet = "haar", tr_down, tr_out;
    std::size_t tr_epochs = 20, tr_samples = 2000;
    std::uint64_t tr_seed = 0;
    auto* tr = app.add_subcommand("train", "train a toy classifier");
    tr->add_option("--arch", tr_arch, "baseline|wave");
    tr->add_option("--wavelet", tr_wavelet, "wavelet for wave models");
    tr->add_option("--downsample", tr_down,
                   "downsample kind for all three stages");
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_option("--samples", tr_samples, "synthetic training samples");
    tr->add_option("--seed", tr_seed, "data, init, and shuffle seed")
        ->required();
    tr->add_option("--out", tr_out, "model output path")->required();

    // eval
    std::string ev_model, ev_report;
    std::size_t ev_samples = 500;
    std::uint64_t ev_seed = 0;
    auto* ev = app.add_subcommand("eval", "clean accuracy on synthetic data");
    ev->add_option("--model", ev_model, "model path")->required();
    ev->add_option("--samples", ev_samples, "synthetic test samples");
    ev->add_option("--seed", ev_seed, "dataset seed")->required();
    ev->add_option("--report", ev_report, "also write the JSON report here");

    // attack
    std::string at_model, at_kind;
    double at_eps = 0.03, at_alpha = 0.0075;
    std::size_t at_steps = 10, at_samples = 64;
    std::uint64_t at_seed = 0;
    auto* at = app.add_subcommand("attack", "adversarial accuracy probe");
    at->add_option("--model", at_model, "model path")->required();
    at->add_option("--kind", at_kind, "fgsm|pgd")->required();
    at->add_option("--eps", at_eps, "perturbation budget");
    at->add_option("--alpha", at_alpha, "pgd step size");
    at->add_option("--steps", at_steps, "pgd iterations");
    at->add_option("--samples", at_samples, "synthetic test samples");
    at->add_option("--seed", at_seed, "dataset and start seed")->required();

    // gradcheck
    std::string gc_target, gc_wavelet, gc_down;
    std::uint64_t gc_seed = 0;
    double gc_step = 1e-5;
    auto* gc = app.add_subcommand("gradcheck",
                                  "finite-difference audit of a toy model");
    gc->add_option("--target", gc_target, "baseline|wave")->required();
    gc->add_option("--wavelet", gc_wavelet, "wavelet for wave models");
    gc->add_option("--downsample", gc_down, "downsample kind");
    gc->add_option("--step", gc_step, "finite-difference step");
    gc->add_option("--seed", gc_seed, "init and batch seed")->required();

    // madd
    std::uint64_t madd_m = 0, madd_n = 0, madd_c = 0;
    auto* md = app.add_subcommand("madd", "multiply-add counts of one level");
    md->add_option("--M", madd_m, "rows")->required();
    md->add_option("--N", madd_n, "columns")->required();
    md->add_option("--C", madd_c, "channels")->required();

    // validate-wavelets
    std::string vw_file;
    auto* vw = app.add_subcommand("validate-wavelets",
                                  "run filter-bank health checks");
    vw->add_option("--file", vw_file, "also validate banks from this file");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        // CLI11 maps --help to a zero-status "error"; everything else is a
        // usage problem.
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (dec->parsed())
            return cmd_decompose(in_path, wavelet, boundary, out_dir, out);

        if (rec->parsed())
            return cmd_reconstruct(bands_path, rec_wavelet, rec_out, out);

        if (dn->parsed()) {
            DenoiseConfig cfg;
            cfg.wavelet = dn_wavelet;
            cfg.lambda = dn_lambda;
            cfg.levels = dn_levels;
            write_image(dn_out, wavelet_denoise(read_image(dn_in), cfg));
            out << "wrote " << dn_out << "\n";
            return 0;
        }

        if (ds->parsed()) {
            const DownsampleKind kind = parse_mode(ds_mode);
            const WaveletSpec* spec = nullptr;
            if (kind == DownsampleKind::DwtLL || kind == DownsampleKind::DwtAvg ||
                kind == DownsampleKind::DwtConcat)
                spec = &get_wavelet(ds_wavelet);
            Tensor y = downsample_image(read_image(ds_in), kind, spec);
            const Rescale r = rescale_for_display(y);
            write_image(ds_out, y);
            ordered_json j;
            j["schema"] = "wnn-display-v1";
            j["mode"] = ds_mode;
            j["min"] = r.min;
            j["max"] = r.max;
            write_json_file(ds_out + ".json", j);
            out << "wrote " << ds_out << " (display range [" << r.min << ", "
                << r.max << "])\n";
            return 0;
        }

        if (co->parsed()) {
            const Tensor img = read_image(co_in);
            write_image(co_out, corrupt(img, corruption_from_string(co_type),
                                        co_severity, co_seed));
            out << "wrote " << co_out << "\n";
            return 0;
        }

        if (tr->parsed()) {
            ModelConfig mc;
            mc.architecture = architecture_from_string(tr_arch);
            mc.wavelet = tr_wavelet;
            if (tr_down.empty())
                mc.downsample = triple(mc.architecture == Architecture::ToyWave
                                           ? DownsampleKind::DwtLL
                                           : DownsampleKind::MaxPool2);
            else
                mc.downsample = triple(downsample_from_string(tr_down));
            mc.seed = tr_seed;
            Model m = build_toy_model(mc);
            const Dataset data = synth_shapes(tr_samples, mix_seed(tr_seed, 1));
            TrainConfig tc;
            tc.epochs = tr_epochs;
            tc.seed = tr_seed;
            const TrainReport r = train(m, data, tc);
            save_model(m, tr_out);
            ordered_json j;
            j["schema"] = "wnn-train-v1";
            j["model"] = tr_out;
            for (const EpochStats& e : r.epochs)
                j["epochs"].push_back({{"loss", e.loss},
                                       {"accuracy", e.accuracy},
                                       {"lr", e.lr}});
            out << j.dump(2) << "\n";
            return 0;
        }

        if (ev->parsed()) {
            const Model m = load_model(ev_model);
            const Dataset data = synth_shapes(ev_samples, ev_seed);
            const EvalReport r = evaluate(m, data);
            ordered_json j;
            j["schema"] = "wnn-eval-v1";
            j["model"] = ev_model;
            j["count"] = r.count;
            j["accuracy"] = r.accuracy;
            for (std::size_t k = 0; k < r.per_class_error.size(); ++k)
                j["per_class_error"][kClassNames[k]] = r.per_class_error[k];
            if (!ev_report.empty()) write_json_file(ev_report, j);
            out << j.dump(2) << "\n";
            return 0;
        }

        if (at->parsed()) {
            if (at_kind != "fgsm" && at_kind != "pgd")
                throw InvalidConfig("attack kind '" + at_kind +
                                    "', expected fgsm|pgd");
            const Model m = load_model(at_model);
            const Dataset data = synth_shapes(at_samples, at_seed);
            AttackConfig cfg;
            cfg.eps = at_eps;
            cfg.alpha = at_alpha;
            cfg.steps = at_steps;

            std::size_t clean_hits = 0, adv_hits = 0;
            double clean_loss = 0.0, adv_loss = 0.0;
            for (std::size_t lo = 0; lo < data.size(); lo += 50) {
                const std::size_t hi = std::min(data.size(), lo + 50);
                Tensor batch;
                std::vector<int> labels;
                slice_batch(data, lo, hi, batch, labels);
                cfg.seed = mix_seed(at_seed, 7, lo);
                const Tensor adv = at_kind == "fgsm"
                                       ? fgsm(m, batch, labels, at_eps)
                                       : pgd(m, batch, labels, cfg);
                const double w = static_cast<double>(hi - lo);
                clean_hits += count_correct(m, batch, labels);
                adv_hits += count_correct(m, adv, labels);
                clean_loss += batch_loss(m, batch, labels) * w;
                adv_loss += batch_loss(m, adv, labels) * w;
            }
            const double n = static_cast<double>(data.size());
            ordered_json j;
            j["schema"] = "wnn-attack-v1";
            j["kind"] = at_kind;
            j["eps"] = at_eps;
            if (at_kind == "pgd") {
                j["alpha"] = at_alpha;
                j["steps"] = at_steps;
            }
            j["samples"] = data.size();
            j["clean_accuracy"] = 100.0 * static_cast<double>(clean_hits) / n;
            j["attacked_accuracy"] = 100.0 * static_cast<double>(adv_hits) / n;
            j["clean_loss"] = clean_loss / n;
            j["attacked_loss"] = adv_loss / n;
            out << j.dump(2) << "\n";
            return 0;
        }

        if (gc->parsed()) {
            ModelConfig mc;
            mc.architecture = architecture_from_string(gc_target);
            const bool is_wave = mc.architecture == Architecture::ToyWave;
            mc.wavelet = gc_wavelet.empty() ? "haar" : gc_wavelet;
            if (gc_down.empty())
                mc.downsample = triple(is_wave ? DownsampleKind::DwtLL
                                               : DownsampleKind::MaxPool2);
            else
                mc.downsample = triple(downsample_from_string(gc_down));
            mc.seed = gc_seed;
            const Model m = build_toy_model(mc);
            const std::vector<int> labels = {0, 2};

            GradReport r;
            bool found = false;
            for (std::uint64_t trial = 0; trial < 500 && !found; ++trial) {
                const Tensor batch = random_batch(
                    m, labels.size(), mix_seed(gc_seed, 0xbead, trial));
                try {
                    r = grad_check(m, batch, labels, gc_step);
                    found = true;
                } catch (const KinkProximity&) {
                    // try the next seeded batch
                }
            }
            if (!found)
                throw KinkProximity(
                    "no batch cleared the kink margin in 500 trials");

            ordered_json j;
            j["schema"] = "wnn-gradcheck-v1";
            j["target"] = gc_target;
            j["step"] = gc_step;
            j["max_rel_err"] = r.max_rel_err;
            j["kink_margin"] = r.kink_margin;
            for (const auto& b : r.blocks) j["blocks"][b.name] = b.max_rel_err;
            out << j.dump(2) << "\n";
            if (r.max_rel_err > 1e-5)
                throw InvalidConfig("gradient mismatch: max relative error " +
                                    std::to_string(r.max_rel_err));
            return 0;
        }

        if (md->parsed()) {
            out << "dwt2d: " << madd_dwt2d(madd_m, madd_n, madd_c) << "\n"
                << "idwt2d: " << madd_idwt2d(madd_m, madd_n, madd_c) << "\n";
            return 0;
        }

        if (vw->parsed()) {
            std::vector<WaveletSpec> specs;
            for (const std::string& name : wavelet_names())
                specs.push_back(get_wavelet(name));
            if (!vw_file.empty()) {
                for (WaveletSpec& s : parse_wavelet_file(vw_file))
                    specs.push_back(std::move(s));
            }
            bool all_pass = true;
            for (const WaveletSpec& s : specs) {
                const ValidationReport r = validate_spec(s);
                all_pass = all_pass && r.pass;
                out << s.name << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
                if (!r.pass)
                    for (const CheckResult& c : r.checks)
                        if (!c.pass)
                            out << "  " << c.check << " residual " << c.residual
                                << " > " << c.tolerance << "\n";
            }
            if (!all_pass) throw InvalidConfig("a filter bank failed validation");
            return 0;
        }

        err << "no subcommand\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    }
}

}  // namespace wnn
