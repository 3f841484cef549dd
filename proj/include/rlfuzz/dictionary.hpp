#pragma once

#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"

namespace rlfuzz {

inline bool is_printable_ascii(Byte b) { return b >= 0x20 && b <= 0x7E; }

// Tokens for the insert-token action: printable ASCII strings harvested from
// seed files, in first-occurrence order.
struct TokenDictionary {
    std::vector<std::string> tokens;

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
};

// Maximal printable-ASCII runs of length >= min_len across all seeds,
// deduplicated, capped at max_tokens by first occurrence.
inline TokenDictionary build_dictionary(const std::vector<Input>& seeds,
                                        std::size_t min_len = 4,
                                        std::size_t max_tokens = 512) {
    if (min_len < 1) throw ContractViolation("build_dictionary: min_len must be >= 1");
    TokenDictionary dict;
    std::unordered_set<std::string> seen;
    for (const Input& seed : seeds) {
        const ByteString& data = seed.bytes();
        std::size_t i = 0;
        while (i < data.size() && dict.tokens.size() < max_tokens) {
            if (!is_printable_ascii(data[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < data.size() && is_printable_ascii(data[j])) ++j;
            if (j - i >= min_len) {
                std::string run(data.begin() + static_cast<std::ptrdiff_t>(i),
                                data.begin() + static_cast<std::ptrdiff_t>(j));
                if (seen.insert(run).second) dict.tokens.push_back(std::move(run));
            }
            i = j;
        }
    }
    return dict;
}

// Newline-delimited export with backslash escapes, so tokens containing
// backslashes survive the round trip even though harvested tokens are
// printable by construction.
inline std::string escape_token(const std::string& token) {
    std::string out;
    out.reserve(token.size());
    for (unsigned char c : token) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\r') {
            out += "\\r";
        } else if (c < 0x20 || c > 0x7E) {
            static const char* hex = "0123456789abcdef";
            out += "\\x";
            out += hex[c >> 4];
            out += hex[c & 0xF];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

inline std::string unescape_token(const std::string& line) {
    std::string out;
    out.reserve(line.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c != '\\') {
            out += c;
            continue;
        }
        if (i + 1 >= line.size()) throw FormatError("dictionary: dangling backslash in \"" + line + "\"");
        char e = line[++i];
        switch (e) {
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 'x': {
                if (i + 2 >= line.size()) throw FormatError("dictionary: truncated \\x escape in \"" + line + "\"");
                auto nib = [&](char h) -> int {
                    if (h >= '0' && h <= '9') return h - '0';
                    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                    throw FormatError("dictionary: bad hex digit in \"" + line + "\"");
                };
                int hi = nib(line[i + 1]);
                int lo = nib(line[i + 2]);
                i += 2;
                out += static_cast<char>(hi * 16 + lo);
                break;
            }
            default:
                throw FormatError(std::string("dictionary: unknown escape \\") + e);
        }
    }
    return out;
}

inline void save_dictionary(const TokenDictionary& dict, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write dictionary file: " + path);
    for (const auto& t : dict.tokens) out << escape_token(t) << '\n';
}

inline TokenDictionary load_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot open dictionary file: " + path);
    TokenDictionary dict;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) dict.tokens.push_back(unescape_token(line));
    }
    return dict;
}

}  // namespace rlfuzz
