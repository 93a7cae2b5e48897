#include "wnn/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "wnn/errors.hpp"

namespace wnn {

namespace {

constexpr char kMagic[4] = {'W', 'T', 'N', 'S'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxRank = 8;

// Explicit little-endian encoding keeps files identical across hosts.
template <typename U>
void put_le(std::string& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string bytes) : b_(std::move(bytes)) {}

    template <typename U>
    U le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(static_cast<unsigned char>(b_[pos_ + i]))
                 << (8 * i);
        pos_ += sizeof(U);
        return v;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return b_.size() - pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > b_.size())
            throw TruncatedPayload("file ends " + std::to_string(pos_ + n - b_.size()) +
                                   " bytes short");
    }
    std::string b_;
    std::size_t pos_ = 0;
};

}  // namespace

void write_tensors(const std::string& path, const TensorMap& tensors,
                   TensorDType dtype) {
    std::set<std::string> seen;
    for (const auto& [name, t] : tensors) {
        (void)t;
        if (!seen.insert(name).second)
            throw DuplicateName("tensor '" + name + "' appears twice");
        if (name.size() > 0xFFFF)
            throw IoFailure("tensor name longer than 65535 bytes");
    }

    std::string out;
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    out.push_back(static_cast<char>(dtype));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.append(name);
        out.push_back(static_cast<char>(t.rank()));
        for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (dtype == TensorDType::F64) {
                put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t[i]));
            } else {
                put_le<std::uint32_t>(
                    out, std::bit_cast<std::uint32_t>(static_cast<float>(t[i])));
            }
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open '" + path + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoFailure("short write to '" + path + "'");
}

TensorMap read_tensors(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open '" + path + "' for reading");
    std::string bytes((std::istreambuf_iterator<char>(f)),
                      std::istreambuf_iterator<char>());
    Reader r(std::move(bytes));

    const std::string magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw BadMagic("expected WTNS, got '" + magic + "'");
    const auto version = r.le<std::uint8_t>();
    if (version != kVersion)
        throw UnsupportedVersion("container version " + std::to_string(version));
    const auto dtype_raw = r.le<std::uint8_t>();
    if (dtype_raw > 1)
        throw MalformedHeader("unknown dtype code " + std::to_string(dtype_raw));
    const auto dtype = static_cast<TensorDType>(dtype_raw);
    const auto count = r.le<std::uint32_t>();

    TensorMap out;
    std::set<std::string> seen;
    for (std::uint32_t rec = 0; rec < count; ++rec) {
        const auto name_len = r.le<std::uint16_t>();
        const std::string name = r.bytes(name_len);
        if (!seen.insert(name).second)
            throw DuplicateName("tensor '" + name + "' appears twice");
        const auto rank = r.le<std::uint8_t>();
        if (rank > kMaxRank)
            throw MalformedHeader("rank " + std::to_string(rank) +
                                  " exceeds the limit of " +
                                  std::to_string(kMaxRank));
        std::vector<std::size_t> shape(rank);
        std::size_t total = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(r.le<std::uint64_t>());
            total *= d;
        }
        if (rank == 0) total = 0;
        const std::size_t elem = dtype == TensorDType::F64 ? 8 : 4;
        // Check the payload exists before sizing the buffer, so a corrupt
        // dim cannot demand absurd memory.
        if (total > r.remaining() / elem)
            throw TruncatedPayload("payload of '" + name + "' (" +
                                   std::to_string(total) +
                                   " elements) exceeds the file");
        std::vector<double> data(total);
        for (std::size_t i = 0; i < total; ++i) {
            if (dtype == TensorDType::F64)
                data[i] = std::bit_cast<double>(r.le<std::uint64_t>());
            else
                data[i] = static_cast<double>(
                    std::bit_cast<float>(r.le<std::uint32_t>()));
        }
        out.emplace_back(name, Tensor::from(std::move(shape), std::move(data)));
    }
    return out;
}

const Tensor& find_tensor(const TensorMap& tensors, const std::string& name) {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw Error("no tensor named '" + name + "' in container");
}

}  // namespace wnn
