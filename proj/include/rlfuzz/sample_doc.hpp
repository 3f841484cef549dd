#pragma once

#include <cstdio>
#include <string>

#include "rlfuzz/input.hpp"
#include "rlfuzz/rng.hpp"

namespace rlfuzz {

struct SampleDocSpec {
    std::size_t objects = 101;      // total indirect objects
    std::uint64_t rng_seed = 7;     // layout + stream payload randomness
    std::size_t stream_min = 2600;  // stream body length range, bytes
    std::size_t stream_max = 3400;
};

// Deterministically builds a structurally valid document for the built-in
// parser: header, numbered objects (dictionaries, strings, arrays, binary
// streams), a cross-reference section with exact byte offsets, and a
// trailer. Roughly 165 kB at the defaults, with most bytes in binary
// stream payloads.
inline ByteString make_sample_document(const SampleDocSpec& spec = {}) {
    if (spec.objects < 5) throw ContractViolation("make_sample_document: need at least 5 objects");
    Rng rng(spec.rng_seed);
    std::string out;
    out.reserve(spec.objects * 2048);
    std::vector<std::size_t> offsets(spec.objects + 1, 0);

    out += "%PDF-1.4\n";
    out += "%\x01\x02\x03\x04\n";
    out += "% synthetic corpus document\n\n";

    auto pad = [&](std::size_t tag) {
        out += '\n';
        out.append(4 + rng.index(25), ' ');
        out += "\n% sep-" + std::to_string(tag) + " layout filler\n\n";
    };

    auto begin_obj = [&](std::size_t num) {
        offsets[num] = out.size();
        out += std::to_string(num) + " 0 obj\n";
    };

    begin_obj(1);
    out += "<< /Type /Catalog /Pages 2 0 R >>\nendobj\n";
    pad(1);

    begin_obj(2);
    out += "<< /Type /Pages /Kids [3 0 R] /Count 1 >>\nendobj\n";
    pad(2);

    begin_obj(3);
    out += "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 5 0 R >>\nendobj\n";
    pad(3);

    // every value construct the parser distinguishes, early in the file
    begin_obj(4);
    out += "[ -7 +3 3.14159 .5 2. (hello (nested) \\( fin) <48656C6C6F> <ABC> ";
    out += "/Name#20X /Plain true false null 2 0 R [1 [2 3]] ";
    out += "<< /Inner << /Deep 1 >> /Tag (v) >> ]\nendobj\n";
    pad(4);

    for (std::size_t num = 5; num <= spec.objects; ++num) {
        begin_obj(num);
        if (num % 2 == 1) {
            std::size_t len =
                spec.stream_min + rng.index(spec.stream_max - spec.stream_min + 1);
            out += "<< /Length " + std::to_string(len) + " /Kind /Payload >>\nstream\n";
            for (std::size_t i = 0; i < len; ++i)
                out += static_cast<char>(rng.between(0x00, 0x1F));
            out += "\nendstream\nendobj\n";
        } else {
            out += "<< /Type /Note /Index " + std::to_string(num);
            out += " /Label (note-" + std::to_string(num) + " quick brown fuzz jumps over ";
            out += std::to_string(rng.between(100, 999)) + ")";
            out += " /Ratio " + std::to_string(num) + ".25 /Parent 2 0 R";
            out += " /Tags [/Alpha /Beta " + std::to_string(num) + "] >>\nendobj\n";
        }
        pad(num);
    }

    std::size_t xref_offset = out.size();
    out += "xref\n0 " + std::to_string(spec.objects + 1) + "\n";
    out += "0000000000 65535 f \n";
    char line[32];
    for (std::size_t num = 1; num <= spec.objects; ++num) {
        std::snprintf(line, sizeof line, "%010zu 00000 n \n", offsets[num]);
        out += line;
    }
    out += "trailer\n<< /Size " + std::to_string(spec.objects + 1) + " /Root 1 0 R >>\n";
    out += "startxref\n" + std::to_string(xref_offset) + "\n%%EOF\n";

    return to_bytes(out);
}

}  // namespace rlfuzz
