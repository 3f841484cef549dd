#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "rlfuzz/input.hpp"
#include "rlfuzz/trace.hpp"

namespace rlfuzz {

// Probe identifiers for the built-in parser. Each one marks a distinct
// successfully-reached parse milestone; error paths are intentionally
// unprobed so that a truncated document can never hit blocks the intact
// one does not.
enum class Probe : std::uint32_t {
    entry = 0,

    hdr_magic = 1,
    hdr_version = 2,
    hdr_binary_marker = 3,

    ws_comment = 5,

    obj_number = 10,
    obj_gen = 11,
    obj_kw = 12,
    obj_body = 13,
    obj_end = 14,
    obj_depth_2 = 15,
    obj_depth_10 = 16,
    obj_depth_25 = 17,
    obj_depth_50 = 18,
    obj_depth_100 = 19,

    val_num_int = 20,
    val_num_real = 21,
    val_num_signed = 22,
    val_string = 23,
    val_string_escape = 24,
    val_string_nested = 25,
    val_string_done = 26,
    val_hexstr = 27,
    val_hexstr_odd = 28,
    val_name = 29,
    val_name_escaped = 30,
    val_array = 31,
    val_array_nested = 32,
    val_array_done = 33,
    val_dict = 34,
    val_dict_key = 35,
    val_dict_nested = 36,
    val_dict_done = 37,
    val_ref = 38,
    val_true = 39,
    val_false = 40,
    val_null = 41,

    stream_kw = 45,
    stream_len_ok = 46,
    stream_body = 47,
    stream_end = 48,

    xref_kw = 60,
    xref_subsection = 61,
    xref_entry_used = 62,
    xref_entry_free = 63,
    xref_entry_format = 64,
    xref_count_ok = 65,
    xref_bounds_ok = 66,
    xref_exact = 67,

    trailer_kw = 70,
    trailer_dict = 71,
    trailer_size = 72,
    trailer_size_exact = 73,
    trailer_root = 74,
    startxref_kw = 75,
    startxref_val = 76,
    startxref_exact = 77,
    eof_marker = 78,
    doc_accepted = 79,
};

constexpr std::size_t kMiniParserProbeCount = 59;

struct ParseResult {
    BlockSet blocks;
    bool accepted = false;
    std::size_t consumed = 0;
    std::size_t objects = 0;
    std::uint64_t payload_digest = 0;  // rolling digest of stream payloads
};

namespace detail {

class MiniParser {
public:
    explicit MiniParser(const ByteString& data) : data_(data) {}

    ParseResult run() {
        probe(Probe::entry);
        try {
            parse_header();
            parse_body();
            result_.accepted = true;
        } catch (const ParseFail&) {
            result_.accepted = false;
        }
        result_.consumed = pos_;
        result_.objects = object_count_;
        for (std::uint32_t v = 0; v < 128; ++v)
            if (probe_bits_[v >> 6] & (1ULL << (v & 63))) result_.blocks.insert(v);
        return std::move(result_);
    }

private:
    struct ParseFail {};

    enum class ValueKind { num_int, num_real, string, hexstring, name, array, dict, ref, boolean, null_value };

    struct Value {
        ValueKind kind = ValueKind::null_value;
        bool has_uint = false;
        std::uint64_t uint_value = 0;
        // dictionary extracts, used for streams and the trailer
        bool dict_has_length = false;
        std::uint64_t dict_length = 0;
        bool dict_has_size = false;
        std::uint64_t dict_size = 0;
        bool dict_has_root_ref = false;
    };

    [[noreturn]] void fail() { throw ParseFail{}; }

    void probe(Probe p) {
        auto v = static_cast<std::uint32_t>(p);
        probe_bits_[v >> 6] |= 1ULL << (v & 63);
    }

    bool at_end() const { return pos_ >= data_.size(); }
    Byte peek() const { return data_[pos_]; }
    Byte peek_at(std::size_t ahead) const { return data_[pos_ + ahead]; }
    bool has(std::size_t n) const { return pos_ + n <= data_.size(); }

    static bool is_ws(Byte b) {
        return b == ' ' || b == '\n' || b == '\r' || b == '\t' || b == '\f' || b == '\0';
    }
    static bool is_digit(Byte b) { return b >= '0' && b <= '9'; }
    static bool is_delim(Byte b) {
        return b == '(' || b == ')' || b == '<' || b == '>' || b == '[' || b == ']' || b == '{' ||
               b == '}' || b == '/' || b == '%';
    }
    bool at_boundary() const { return at_end() || is_ws(peek()) || is_delim(peek()); }

    bool looking_at(const char* lit) const {
        std::size_t n = std::char_traits<char>::length(lit);
        if (!has(n)) return false;
        for (std::size_t i = 0; i < n; ++i)
            if (data_[pos_ + i] != static_cast<Byte>(lit[i])) return false;
        return true;
    }

    // Whitespace and comments. "%%EOF" is a document token, not a comment,
    // so skipping stops in front of it.
    void skip_ws() {
        for (;;) {
            while (!at_end() && is_ws(peek())) ++pos_;
            if (at_end() || peek() != '%') return;
            if (looking_at("%%EOF")) return;
            probe(Probe::ws_comment);
            while (!at_end() && peek() != '\n' && peek() != '\r') ++pos_;
        }
    }

    void expect_keyword(const char* kw) {
        skip_ws();
        if (!looking_at(kw)) fail();
        pos_ += std::char_traits<char>::length(kw);
        if (!at_boundary()) fail();
    }

    bool try_keyword(const char* kw) {
        std::size_t save = pos_;
        skip_ws();
        if (looking_at(kw)) {
            std::size_t start = pos_;
            pos_ += std::char_traits<char>::length(kw);
            if (at_boundary()) {
                last_keyword_offset_ = start;
                return true;
            }
        }
        pos_ = save;
        return false;
    }

    std::uint64_t parse_uint() {
        skip_ws();
        std::size_t digits = 0;
        std::uint64_t v = 0;
        while (!at_end() && is_digit(peek())) {
            v = v * 10 + (peek() - '0');
            ++pos_;
            if (++digits > 18) fail();
        }
        if (digits == 0) fail();
        return v;
    }

    void parse_header() {
        if (!looking_at("%PDF-")) fail();
        pos_ += 5;
        probe(Probe::hdr_magic);
        if (!has(3) || !is_digit(peek()) || peek_at(1) != '.' || !is_digit(peek_at(2))) fail();
        pos_ += 3;
        probe(Probe::hdr_version);
        while (!at_end() && peek() != '\n') ++pos_;
        // binary-marker comment: a % line whose next bytes are non-printable
        std::size_t save = pos_;
        while (!at_end() && is_ws(peek())) ++pos_;
        if (!at_end() && peek() == '%' && has(2) && peek_at(1) < 0x20 && peek_at(1) != '\n' &&
            peek_at(1) != '\r') {
            probe(Probe::hdr_binary_marker);
            while (!at_end() && peek() != '\n' && peek() != '\r') ++pos_;
        } else {
            pos_ = save;
        }
    }

    void parse_body() {
        for (;;) {
            skip_ws();
            if (at_end()) fail();
            if (is_digit(peek()) || peek() == '+' || peek() == '-') {
                parse_indirect_object();
            } else if (try_keyword("xref")) {
                parse_xref();
                parse_trailer();
                return;
            } else {
                fail();
            }
        }
    }

    void parse_indirect_object() {
        skip_ws();
        std::size_t start_offset = pos_;
        std::uint64_t number = parse_uint();
        probe(Probe::obj_number);
        parse_uint();
        probe(Probe::obj_gen);
        expect_keyword("obj");
        probe(Probe::obj_kw);
        object_offsets_[number] = start_offset;

        Value body = parse_value(0);
        probe(Probe::obj_body);

        if (try_keyword("stream")) {
            probe(Probe::stream_kw);
            if (body.kind != ValueKind::dict || !body.dict_has_length) fail();
            probe(Probe::stream_len_ok);
            // EOL after the stream keyword: CRLF or LF
            if (!at_end() && peek() == '\r') ++pos_;
            if (at_end() || peek() != '\n') fail();
            ++pos_;
            auto len = static_cast<std::size_t>(body.dict_length);
            if (!has(len)) fail();
            // consume the payload the way a real reader would
            std::uint64_t digest = 0;
            for (std::size_t i = 0; i < len; ++i)
                digest = digest * 131 + data_[pos_ + i];
            result_.payload_digest ^= digest;
            pos_ += len;
            probe(Probe::stream_body);
            expect_keyword("endstream");
            probe(Probe::stream_end);
        }

        expect_keyword("endobj");
        probe(Probe::obj_end);
        ++object_count_;
        if (object_count_ >= 2) probe(Probe::obj_depth_2);
        if (object_count_ >= 10) probe(Probe::obj_depth_10);
        if (object_count_ >= 25) probe(Probe::obj_depth_25);
        if (object_count_ >= 50) probe(Probe::obj_depth_50);
        if (object_count_ >= 100) probe(Probe::obj_depth_100);
    }

    Value parse_value(int depth) {
        if (depth > 32) fail();
        skip_ws();
        if (at_end()) fail();
        Byte c = peek();
        if (c == '(') return parse_string();
        if (c == '<') {
            if (has(2) && peek_at(1) == '<') return parse_dict(depth);
            return parse_hex_string();
        }
        if (c == '/') return parse_name();
        if (c == '[') return parse_array(depth);
        if (is_digit(c) || c == '+' || c == '-' || c == '.') return parse_number();
        if (c == 't') {
            expect_keyword("true");
            probe(Probe::val_true);
            return {ValueKind::boolean};
        }
        if (c == 'f') {
            expect_keyword("false");
            probe(Probe::val_false);
            return {ValueKind::boolean};
        }
        if (c == 'n') {
            expect_keyword("null");
            probe(Probe::val_null);
            return {ValueKind::null_value};
        }
        fail();
    }

    Value parse_string() {
        ++pos_;  // (
        probe(Probe::val_string);
        int nesting = 1;
        while (nesting > 0) {
            if (at_end()) fail();
            Byte c = peek();
            ++pos_;
            if (c == '\\') {
                if (at_end()) fail();
                probe(Probe::val_string_escape);
                ++pos_;
            } else if (c == '(') {
                ++nesting;
                probe(Probe::val_string_nested);
            } else if (c == ')') {
                --nesting;
            }
        }
        probe(Probe::val_string_done);
        return {ValueKind::string};
    }

    Value parse_hex_string() {
        ++pos_;  // <
        probe(Probe::val_hexstr);
        std::size_t digits = 0;
        for (;;) {
            if (at_end()) fail();
            Byte c = peek();
            if (c == '>') {
                ++pos_;
                break;
            }
            if (is_ws(c)) {
                ++pos_;
                continue;
            }
            bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
            if (!hex) fail();
            ++digits;
            ++pos_;
        }
        if (digits % 2 == 1) probe(Probe::val_hexstr_odd);
        return {ValueKind::hexstring};
    }

    Value parse_name() {
        ++pos_;  // '/'
        probe(Probe::val_name);
        std::string name;
        while (!at_end() && !is_ws(peek()) && !is_delim(peek())) {
            if (peek() == '#') {
                if (!has(3)) fail();
                auto nib = [&](Byte h) -> int {
                    if (h >= '0' && h <= '9') return h - '0';
                    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                    return -1;
                };
                int hi = nib(peek_at(1)), lo = nib(peek_at(2));
                if (hi < 0 || lo < 0) fail();
                probe(Probe::val_name_escaped);
                name += static_cast<char>(hi * 16 + lo);
                pos_ += 3;
            } else {
                name += static_cast<char>(peek());
                ++pos_;
            }
        }
        Value v{ValueKind::name};
        last_name_ = std::move(name);
        return v;
    }

    Value parse_array(int depth) {
        ++pos_;  // [
        probe(Probe::val_array);
        if (depth > 0) probe(Probe::val_array_nested);
        for (;;) {
            skip_ws();
            if (at_end()) fail();
            if (peek() == ']') {
                ++pos_;
                probe(Probe::val_array_done);
                return {ValueKind::array};
            }
            parse_value(depth + 1);
        }
    }

    Value parse_dict(int depth) {
        pos_ += 2;  // <<
        probe(Probe::val_dict);
        if (depth > 0) probe(Probe::val_dict_nested);
        Value dict{ValueKind::dict};
        for (;;) {
            skip_ws();
            if (at_end()) fail();
            if (peek() == '>') {
                if (!has(2) || peek_at(1) != '>') fail();
                pos_ += 2;
                probe(Probe::val_dict_done);
                return dict;
            }
            if (peek() != '/') fail();
            parse_name();
            std::string key = last_name_;
            probe(Probe::val_dict_key);
            Value v = parse_value(depth + 1);
            if (key == "Length" && v.kind == ValueKind::num_int && v.has_uint) {
                dict.dict_has_length = true;
                dict.dict_length = v.uint_value;
            } else if (key == "Size" && v.kind == ValueKind::num_int && v.has_uint) {
                dict.dict_has_size = true;
                dict.dict_size = v.uint_value;
            } else if (key == "Root" && v.kind == ValueKind::ref) {
                dict.dict_has_root_ref = true;
            }
        }
    }

    Value parse_number() {
        bool negative = false;
        bool signed_num = false;
        if (peek() == '+' || peek() == '-') {
            negative = peek() == '-';
            signed_num = true;
            ++pos_;
        }
        std::size_t digits = 0;
        std::uint64_t ipart = 0;
        while (!at_end() && is_digit(peek())) {
            ipart = ipart * 10 + (peek() - '0');
            ++pos_;
            if (++digits > 18) fail();
        }
        bool real = false;
        if (!at_end() && peek() == '.') {
            real = true;
            ++pos_;
            while (!at_end() && is_digit(peek())) {
                ++pos_;
                if (++digits > 18) fail();
            }
        }
        if (digits == 0) fail();
        if (!at_boundary()) fail();
        if (signed_num) probe(Probe::val_num_signed);
        if (real) {
            probe(Probe::val_num_real);
            return {ValueKind::num_real};
        }
        probe(Probe::val_num_int);

        // "N G R" lookahead turns a plain integer into a reference
        if (!negative) {
            std::size_t save = pos_;
            std::array<std::uint64_t, 2> save_blocks = probe_bits_;
            try {
                skip_ws();
                if (!at_end() && is_digit(peek())) {
                    std::size_t d2 = 0;
                    while (!at_end() && is_digit(peek())) {
                        ++pos_;
                        if (++d2 > 18) fail();
                    }
                    skip_ws();
                    if (!at_end() && peek() == 'R') {
                        ++pos_;
                        if (at_boundary()) {
                            probe(Probe::val_ref);
                            return {ValueKind::ref};
                        }
                    }
                }
            } catch (const ParseFail&) {
            }
            pos_ = save;
            probe_bits_ = save_blocks;
        }
        Value v{ValueKind::num_int};
        v.has_uint = !negative;
        v.uint_value = ipart;
        return v;
    }

    void parse_xref() {
        probe(Probe::xref_kw);
        xref_offset_ = last_keyword_offset_;
        std::size_t total_entries = 0;
        bool all_bounded = true;
        bool all_exact = true;
        do {
            std::uint64_t first_id = parse_uint();
            std::uint64_t count = parse_uint();
            probe(Probe::xref_subsection);
            if (count > data_.size()) fail();  // cannot have more entries than bytes
            for (std::uint64_t i = 0; i < count; ++i) {
                skip_ws();
                std::uint64_t offset = parse_fixed_digits(10);
                if (at_end() || peek() != ' ') fail();
                ++pos_;
                parse_fixed_digits(5);
                if (at_end() || peek() != ' ') fail();
                ++pos_;
                if (at_end()) fail();
                Byte type = peek();
                ++pos_;
                if (type == 'n') {
                    probe(Probe::xref_entry_used);
                    if (offset >= data_.size()) all_bounded = false;
                    auto it = object_offsets_.find(first_id + i);
                    if (it == object_offsets_.end() || it->second != offset) all_exact = false;
                } else if (type == 'f') {
                    probe(Probe::xref_entry_free);
                } else {
                    fail();
                }
                if (!at_boundary()) fail();
                probe(Probe::xref_entry_format);
                ++total_entries;
            }
            probe(Probe::xref_count_ok);
            skip_ws();
        } while (!at_end() && is_digit(peek()));
        xref_entries_ = total_entries;
        if (all_bounded) probe(Probe::xref_bounds_ok);
        if (all_bounded && all_exact && total_entries > 0) probe(Probe::xref_exact);
    }

    std::uint64_t parse_fixed_digits(std::size_t n) {
        if (!has(n)) fail();
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!is_digit(peek())) fail();
            v = v * 10 + (peek() - '0');
            ++pos_;
        }
        return v;
    }

    void parse_trailer() {
        if (!try_keyword("trailer")) fail();
        probe(Probe::trailer_kw);
        Value dict = parse_value(0);
        if (dict.kind != ValueKind::dict) fail();
        probe(Probe::trailer_dict);
        if (dict.dict_has_size) {
            probe(Probe::trailer_size);
            if (dict.dict_size == xref_entries_) probe(Probe::trailer_size_exact);
        }
        if (dict.dict_has_root_ref) probe(Probe::trailer_root);
        expect_keyword("startxref");
        probe(Probe::startxref_kw);
        std::uint64_t pos_value = parse_uint();
        probe(Probe::startxref_val);
        if (pos_value == xref_offset_) probe(Probe::startxref_exact);
        skip_ws();
        if (!looking_at("%%EOF")) fail();
        pos_ += 5;
        if (!at_boundary()) fail();
        probe(Probe::eof_marker);
        probe(Probe::doc_accepted);
    }

    const ByteString& data_;
    std::size_t pos_ = 0;
    ParseResult result_;
    std::array<std::uint64_t, 2> probe_bits_ = {0, 0};
    std::size_t object_count_ = 0;
    std::map<std::uint64_t, std::size_t> object_offsets_;
    std::string last_name_;
    std::size_t last_keyword_offset_ = 0;
    std::size_t xref_offset_ = 0;
    std::size_t xref_entries_ = 0;
};

}  // namespace detail

// Parses a simplified object/xref/trailer document and reports the probe
// blocks reached. Total on all byte strings; structural errors end the parse
// early rather than raising.
inline ParseResult parse_document(const ByteString& data) {
    return detail::MiniParser(data).run();
}

}  // namespace rlfuzz
