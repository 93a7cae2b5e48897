#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wnn/errors.hpp"

namespace wnn {

enum class WaveletFamily { Orthogonal, Biorthogonal };

// A two-channel filter bank, fully expanded: analysis pair (lo_dec, hi_dec)
// and synthesis pair (lo_rec, hi_rec), all the same even length.
//
// rec_lo_offset / rec_hi_offset shift where a synthesis filter's first tap
// lands relative to sample 2k during reconstruction. Orthogonal banks use 0.
// Some biorthogonal banks store their two prototype filters with symmetry
// axes one slot apart; the offset restores the alignment that perfect
// reconstruction requires.
struct WaveletSpec {
    std::string name;
    WaveletFamily family = WaveletFamily::Orthogonal;
    std::vector<double> lo_dec;
    std::vector<double> hi_dec;
    std::vector<double> lo_rec;
    std::vector<double> hi_rec;
    int rec_lo_offset = 0;
    int rec_hi_offset = 0;

    std::size_t support_len() const { return lo_dec.size(); }
};

// Quadrature mirror: g[k] = (-1)^k h[N-1-k] for an even-length filter.
// Applying it twice gives back the negated input, which the registry's
// self-checks rely on.
std::vector<double> qmf_orthogonal(const std::vector<double>& lowpass);

// Biorthogonal high-pass pair, each derived from the opposite channel's
// low-pass: first = analysis high-pass (from the dual), second = synthesis
// high-pass (from the primal). Both inputs must share one even length.
std::pair<std::vector<double>, std::vector<double>> qmf_biorthogonal(
    const std::vector<double>& primal_low, const std::vector<double>& dual_low);

// Built-in bank lookup. Known names: haar, db1 (alias of haar), db2..db6,
// ch2.2, ch3.3, ch4.4, ch5.5. Throws UnknownWavelet otherwise.
const WaveletSpec& get_wavelet(const std::string& name);

// Names of all built-in banks, registration order, aliases excluded.
std::vector<std::string> wavelet_names();

// Install or replace a bank under spec.name. Later get_wavelet calls see it.
void register_custom(const WaveletSpec& spec);

// Load banks from the text format: one line per filter,
//   <name> <role> <v0> <v1> ...
// with role in {lo_dec, hi_dec, lo_rec, hi_rec}. Blank lines and '#'
// comments are skipped. lo_dec is required per name; missing high-pass
// filters are derived by the quadrature mirror relations, a missing lo_rec
// defaults to lo_dec. Reconstruction offsets are not part of the format;
// they are found by searching small shifts for the pair that actually
// reconstructs probe signals.
std::vector<WaveletSpec> parse_wavelet_file(const std::string& path);

struct CheckResult {
    std::string check;       // short identifier of the property tested
    double residual = 0.0;   // worst absolute deviation observed
    double tolerance = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::string wavelet;
    bool pass = false;       // conjunction of all checks
    std::vector<CheckResult> checks;
};

// Numeric health check of a bank: DC gains, norms, orthogonality where the
// family claims it, and 32 seeded random length-64 signals pushed through a
// one-level analysis/synthesis round trip. Reports per-check residuals and
// never throws on a failing bank.
ValidationReport validate_spec(const WaveletSpec& spec);

}  // namespace wnn
