#include "wnn/image_io.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "wnn/errors.hpp"

namespace wnn {

namespace {

// Netpbm token reader: skips whitespace and '#' comment lines, which the
// format allows anywhere between header fields.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            // keep skipping
        } else {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

std::size_t parse_dim(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw MalformedHeader(std::string(what) + " field '" + tok +
                              "' is not a number");
    const unsigned long long v = std::stoull(tok);
    if (v == 0 || v > (1ull << 20))
        throw MalformedHeader(std::string(what) + " " + tok + " out of range");
    return static_cast<std::size_t>(v);
}

}  // namespace

Tensor read_image(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open '" + path + "' for reading");

    std::string magic = next_token(f);
    std::size_t channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw MalformedHeader("'" + path + "': magic '" + magic +
                              "', expected P5 or P6");

    const std::size_t w = parse_dim(next_token(f), "width");
    const std::size_t h = parse_dim(next_token(f), "height");
    const std::string maxval = next_token(f);
    if (maxval != "255")
        throw UnsupportedMaxval("'" + path + "': maxval " + maxval +
                                ", only 255 is supported");
    // The single whitespace byte after maxval was consumed by the tokenizer.

    std::vector<unsigned char> raw(w * h * channels);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(f.gcount()) != raw.size())
        throw TruncatedPayload("'" + path + "': expected " +
                               std::to_string(raw.size()) + " pixel bytes, got " +
                               std::to_string(f.gcount()));

    // Interleaved rows to channel planes.
    Tensor x({channels, h, w});
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t c = 0; c < channels; ++c)
                x.at(c, i, j) =
                    static_cast<double>(raw[(i * w + j) * channels + c]) / 255.0;
    return x;
}

void write_image(const std::string& path, const Tensor& x) {
    if (x.rank() != 3 || (x.dim(0) != 1 && x.dim(0) != 3))
        throw ShapeMismatch("write_image expects [1, H, W] or [3, H, W], got " +
                            x.shape_str());
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);

    std::vector<unsigned char> raw(w * h * c);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t ch = 0; ch < c; ++ch) {
                double v = x.at(ch, i, j);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                raw[(i * w + j) * c + ch] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open '" + path + "' for writing");
    f << (c == 1 ? "P5" : "P6") << "\n" << w << " " << h << "\n255\n";
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (!f) throw IoFailure("short write to '" + path + "'");
}

}  // namespace wnn
