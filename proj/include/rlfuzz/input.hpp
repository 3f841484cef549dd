#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rlfuzz/errors.hpp"
#include "rlfuzz/rng.hpp"

namespace rlfuzz {

using Byte = std::uint8_t;
using ByteString = std::vector<Byte>;

inline ByteString to_bytes(std::string_view s) {
    return ByteString(s.begin(), s.end());
}

// A candidate program input. Immutable: mutation operators return new values.
class Input {
public:
    Input() = default;
    explicit Input(ByteString bytes) : bytes_(std::move(bytes)) {}
    explicit Input(std::string_view s) : bytes_(to_bytes(s)) {}

    static Input from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw EnvironmentError("cannot open input file: " + path);
        ByteString data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return Input(std::move(data));
    }

    void write_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw EnvironmentError("cannot write input file: " + path);
        out.write(reinterpret_cast<const char*>(bytes_.data()),
                  static_cast<std::streamsize>(bytes_.size()));
    }

    const ByteString& bytes() const { return bytes_; }
    std::size_t size() const { return bytes_.size(); }
    Byte at(std::size_t i) const { return bytes_.at(i); }

    bool operator==(const Input& other) const { return bytes_ == other.bytes_; }

private:
    ByteString bytes_;
};

// The substring of the seed the agent observes: the MDP state before encoding.
struct StateWindow {
    std::size_t offset = 0;
    std::size_t width = 0;
    ByteString bytes;
};

using StateVector = std::vector<double>;

enum class StateEncoding {
    normalized01,  // byte / 255
    raw_byte,      // byte as-is
};

inline StateWindow extract_state(const Input& input, std::size_t offset, std::size_t width) {
    if (width < 1) throw ContractViolation("extract_state: width must be >= 1");
    if (offset > input.size() || width > input.size() - offset) {
        throw RangeError("extract_state: window out of bounds (offset=" + std::to_string(offset) +
                         ", width=" + std::to_string(width) +
                         ", input size=" + std::to_string(input.size()) + ")");
    }
    StateWindow w;
    w.offset = offset;
    w.width = width;
    w.bytes.assign(input.bytes().begin() + static_cast<std::ptrdiff_t>(offset),
                   input.bytes().begin() + static_cast<std::ptrdiff_t>(offset + width));
    return w;
}

// Uniform over the valid window placements {0, ..., input_len - width}.
inline std::size_t random_offset(Rng& rng, std::size_t input_len, std::size_t width) {
    if (width < 1) throw ContractViolation("random_offset: width must be >= 1");
    if (width > input_len) {
        throw RangeError("random_offset: width " + std::to_string(width) +
                         " exceeds input length " + std::to_string(input_len));
    }
    return rng.index(input_len - width + 1);
}

inline StateVector encode_state(const StateWindow& window,
                                StateEncoding encoding = StateEncoding::normalized01) {
    StateVector v(window.bytes.size());
    for (std::size_t i = 0; i < window.bytes.size(); ++i) {
        double b = static_cast<double>(window.bytes[i]);
        v[i] = encoding == StateEncoding::normalized01 ? b / 255.0 : b;
    }
    return v;
}

}  // namespace rlfuzz
