#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <map>

#include "rlfuzz/dictionary.hpp"
#include "rlfuzz/mutation.hpp"
#include "rlfuzz/sample_doc.hpp"

using namespace rlfuzz;

namespace {

Input random_input(Rng& rng, std::size_t n) {
    ByteString data(n);
    for (auto& b : data) b = static_cast<Byte>(rng.below(256));
    return Input(std::move(data));
}

ActionSpec spec_of(ActionKind kind, double ratio = 0.01) { return {kind, ratio, true}; }

// Reference scanner for object bounds: collects every (open, close) marker
// pair by a plain left-to-right scan, then applies the documented rule.
ObjectBounds scan_bounds_oracle(const ByteString& data, std::size_t offset,
                                const std::string& open, const std::string& close) {
    auto find_all = [&](const std::string& m) {
        std::vector<std::size_t> hits;
        if (data.size() < m.size()) return hits;
        for (std::size_t i = 0; i + m.size() <= data.size(); ++i)
            if (std::equal(m.begin(), m.end(), data.begin() + static_cast<std::ptrdiff_t>(i)))
                hits.push_back(i);
        return hits;
    };
    std::vector<std::size_t> opens = find_all(open);
    std::size_t best_open = data.size();
    for (std::size_t o : opens)
        if (o <= offset) best_open = o;
    if (best_open == data.size()) return {0, data.size()};
    for (std::size_t c : find_all(close))
        if (c >= best_open + open.size()) return {best_open, c + close.size()};
    return {0, data.size()};
}

}  // namespace

TEST_CASE("build_dictionary extracts maximal printable runs") {
    Input seed(ByteString{'1', ' ', '0', ' ', 'o', 'b', 'j', 0x00, 0x01, 'e', 'n', 'd', 'o', 'b', 'j'});
    TokenDictionary dict = build_dictionary({seed}, 4, 512);
    REQUIRE(dict.tokens == std::vector<std::string>{"1 0 obj", "endobj"});

    Input tiny(ByteString{'a', 'b', 0x00, 'c', 'd'});
    REQUIRE(build_dictionary({tiny}, 4, 512).empty());
}

TEST_CASE("build_dictionary deduplicates and caps by first occurrence") {
    Input seed("aaaa\x01"
               "bbbb\x01"
               "aaaa\x01"
               "cccc");
    TokenDictionary dict = build_dictionary({seed}, 4, 2);
    REQUIRE(dict.tokens == std::vector<std::string>{"aaaa", "bbbb"});
}

TEST_CASE("sample document yields the expected token families") {
    Input seed(make_sample_document());
    TokenDictionary dict = build_dictionary({seed}, 4, 512);
    auto contains_with = [&](const std::string& needle) {
        return std::any_of(dict.tokens.begin(), dict.tokens.end(), [&](const std::string& t) {
            return t.find(needle) != std::string::npos;
        });
    };
    REQUIRE(contains_with("obj"));
    REQUIRE(contains_with("endobj"));
    REQUIRE(contains_with("trailer"));
    for (const auto& t : dict.tokens) {
        REQUIRE(!t.empty());
        REQUIRE(std::all_of(t.begin(), t.end(),
                            [](char c) { return is_printable_ascii(static_cast<Byte>(c)); }));
    }
}

TEST_CASE("dictionary save/load round trip") {
    TokenDictionary dict;
    dict.tokens = {"plain", "with\\backslash", "with\x01control", "a b c"};
    std::string path = "dict_roundtrip.txt";
    save_dictionary(dict, path);
    TokenDictionary back = load_dictionary(path);
    REQUIRE(back.tokens == dict.tokens);
    std::remove(path.c_str());
}

TEST_CASE("locate_object_bounds brackets the offset") {
    Input input("xx obj AAA endobj yy");
    ObjectBounds b = locate_object_bounds(input, 8);  // inside AAA
    REQUIRE(b.start == 3);
    REQUIRE(b.end == 17);

    Input plain("no markers here at all");
    ObjectBounds whole = locate_object_bounds(input, 0);
    REQUIRE(whole.start == 0);
    REQUIRE(whole.end == input.size());
    ObjectBounds all = locate_object_bounds(plain, 5);
    REQUIRE(all.start == 0);
    REQUIRE(all.end == plain.size());
}

TEST_CASE("locate_object_bounds agrees with the reference scanner on the sample doc") {
    Input seed(make_sample_document());
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t offset = rng.index(seed.size());
        ObjectBounds got = locate_object_bounds(seed, offset);
        ObjectBounds want = scan_bounds_oracle(seed.bytes(), offset, "obj", "endobj");
        REQUIRE(got.start == want.start);
        REQUIRE(got.end == want.end);
    }
}

TEST_CASE("delete_window shortens by the window width") {
    Rng rng(1);
    Input input = random_input(rng, 1000);
    StateWindow w = extract_state(input, 100, 32);
    MutationResult r = apply_action(input, w, spec_of(ActionKind::delete_window), {}, rng);
    REQUIRE(r.mutated);
    REQUIRE(r.output.size() == 968);
    // bytes outside the window are untouched
    for (std::size_t i = 0; i < 100; ++i) REQUIRE(r.output.at(i) == input.at(i));
    for (std::size_t i = 132; i < 1000; ++i) REQUIRE(r.output.at(i - 32) == input.at(i));
}

TEST_CASE("delete_window refuses to empty the input") {
    Rng rng(1);
    Input input("abcd");
    StateWindow w = extract_state(input, 0, 4);
    REQUIRE_THROWS_AS(apply_action(input, w, spec_of(ActionKind::delete_window), {}, rng),
                      DegenerateInputError);
}

TEST_CASE("bit_flip with ratio 1 inverts the window and nothing else") {
    Rng rng(3);
    Input input(ByteString(64, 0xFF));
    StateWindow w = extract_state(input, 16, 8);
    MutationResult r = apply_action(input, w, spec_of(ActionKind::bit_flip, 1.0), {}, rng);
    REQUIRE(r.output.size() == 64);
    for (std::size_t i = 0; i < 64; ++i) {
        if (i >= 16 && i < 24)
            REQUIRE(r.output.at(i) == 0x00);
        else
            REQUIRE(r.output.at(i) == 0xFF);
    }
}

TEST_CASE("bit_flip mean flip count matches the Monte Carlo oracle") {
    Rng rng(77);
    Input input = random_input(rng, 256);
    StateWindow w = extract_state(input, 64, 32);
    const int trials = 10000;
    long long flips = 0;
    for (int t = 0; t < trials; ++t) {
        MutationResult r = apply_action(input, w, spec_of(ActionKind::bit_flip, 0.01), {}, rng);
        for (std::size_t i = 0; i < input.size(); ++i) {
            Byte diff = r.output.at(i) ^ input.at(i);
            flips += __builtin_popcount(diff);
        }
    }
    double mean = static_cast<double>(flips) / trials;
    double expected = 8.0 * 32.0 * 0.01;  // 2.56
    INFO("mean flips " << mean);
    REQUIRE(mean > expected * 0.95);
    REQUIRE(mean < expected * 1.05);
}

TEST_CASE("shuffle_window permutes exactly the window bytes") {
    Rng rng(9);
    Input input = random_input(rng, 300);
    StateWindow w = extract_state(input, 50, 32);
    for (int t = 0; t < 10000; ++t) {
        MutationResult r = apply_action(input, w, spec_of(ActionKind::shuffle_window), {}, rng);
        REQUIRE(r.output.size() == input.size());
        // histogram oracle: multiset of window bytes is preserved
        ByteString before(input.bytes().begin() + 50, input.bytes().begin() + 82);
        ByteString after(r.output.bytes().begin() + 50, r.output.bytes().begin() + 82);
        std::sort(before.begin(), before.end());
        std::sort(after.begin(), after.end());
        if (before != after) {
            REQUIRE(before == after);
        }
        for (std::size_t i = 0; i < 50; ++i)
            if (r.output.at(i) != input.at(i)) REQUIRE(false);
        for (std::size_t i = 82; i < 300; ++i)
            if (r.output.at(i) != input.at(i)) REQUIRE(false);
    }
}

TEST_CASE("insert_token splice-back oracle") {
    Rng rng(15);
    Input input = random_input(rng, 200);
    StateWindow w = extract_state(input, 40, 32);
    TokenDictionary dict;
    dict.tokens = {"endobj", "xref", "0 1 obj"};
    for (int t = 0; t < 500; ++t) {
        MutationResult r = apply_action(input, w, spec_of(ActionKind::insert_token), dict, rng);
        REQUIRE(r.mutated);
        bool explained = false;
        for (const auto& tok : dict.tokens) {
            if (r.output.size() != input.size() + tok.size()) continue;
            for (std::size_t pos = 40; pos < 72 && !explained; ++pos) {
                ByteString spliced = r.output.bytes();
                spliced.erase(spliced.begin() + static_cast<std::ptrdiff_t>(pos),
                              spliced.begin() + static_cast<std::ptrdiff_t>(pos + tok.size()));
                if (spliced == input.bytes() &&
                    std::equal(tok.begin(), tok.end(), r.output.bytes().begin() +
                                                           static_cast<std::ptrdiff_t>(pos)))
                    explained = true;
            }
            if (explained) break;
        }
        REQUIRE(explained);
    }
}

TEST_CASE("insert_token with an empty dictionary is a flagged no-op") {
    Rng rng(2);
    Input input = random_input(rng, 100);
    StateWindow w = extract_state(input, 0, 32);
    MutationResult r = apply_action(input, w, spec_of(ActionKind::insert_token), {}, rng);
    REQUIRE(!r.mutated);
    REQUIRE(r.output == input);
}

TEST_CASE("copy_window_insert grows by the window width") {
    Rng rng(21);
    Input input = random_input(rng, 500);
    StateWindow w = extract_state(input, 100, 32);
    MutationResult r = apply_action(input, w, spec_of(ActionKind::copy_window_insert), {}, rng);
    REQUIRE(r.output.size() == 532);
}

TEST_CASE("copy_window_overwrite preserves length and writes a window copy") {
    Rng rng(22);
    Input input = random_input(rng, 500);
    StateWindow w = extract_state(input, 100, 32);
    ByteString window_bytes = w.bytes;
    for (int t = 0; t < 200; ++t) {
        MutationResult r = apply_action(input, w, spec_of(ActionKind::copy_window_overwrite), {}, rng);
        REQUIRE(r.output.size() == input.size());
        bool found = false;
        for (std::size_t pos = 0; pos + 32 <= r.output.size() && !found; ++pos) {
            if (std::equal(window_bytes.begin(), window_bytes.end(),
                           r.output.bytes().begin() + static_cast<std::ptrdiff_t>(pos)))
                found = true;
        }
        REQUIRE(found);
    }
}

TEST_CASE("shuffle_object_segments permutes inside the enclosing object only") {
    Rng rng(31);
    std::string text = "head obj ABCDEFGHIJKLMNOPQRSTUVWX endobj tail";
    Input input(text);
    StateWindow w = extract_state(input, 12, 8);
    ObjectBounds b = locate_object_bounds(input, 12);
    for (int t = 0; t < 2000; ++t) {
        MutationResult r = apply_action(input, w, spec_of(ActionKind::shuffle_object_segments), {}, rng);
        REQUIRE(r.output.size() == input.size());
        for (std::size_t i = 0; i < b.start; ++i) REQUIRE(r.output.at(i) == input.at(i));
        for (std::size_t i = b.end; i < input.size(); ++i) REQUIRE(r.output.at(i) == input.at(i));
        ByteString before(input.bytes().begin() + static_cast<std::ptrdiff_t>(b.start),
                          input.bytes().begin() + static_cast<std::ptrdiff_t>(b.end));
        ByteString after(r.output.bytes().begin() + static_cast<std::ptrdiff_t>(b.start),
                         r.output.bytes().begin() + static_cast<std::ptrdiff_t>(b.end));
        std::sort(before.begin(), before.end());
        std::sort(after.begin(), after.end());
        REQUIRE(before == after);
    }
}

TEST_CASE("shuffle_object_segments produces all six orders eventually") {
    Rng rng(8);
    // object is exactly the whole input (no markers): segments of "abc...xyz"
    Input input("abcdefghij");
    StateWindow w = extract_state(input, 2, 3);
    std::map<std::string, int> seen;
    for (int t = 0; t < 3000; ++t) {
        MutationResult r = apply_action(input, w, spec_of(ActionKind::shuffle_object_segments), {}, rng);
        std::string s(r.output.bytes().begin(), r.output.bytes().end());
        ++seen[s];
    }
    REQUIRE(seen.size() >= 6);  // several distinct cut/permutation combinations
    REQUIRE(seen.count("abcdefghij") == 1);  // identity permutation occurs too
}

TEST_CASE("shift actions return the input unchanged and adjust the observation") {
    Rng rng(5);
    Input seed(make_sample_document(SampleDocSpec{.objects = 9, .rng_seed = 3,
                                                  .stream_min = 64, .stream_max = 96}));
    std::size_t offset = seed.size() / 2;
    StateWindow w = extract_state(seed, offset, 32);

    MutationResult left = apply_action(seed, w, spec_of(ActionKind::shift_offset_left), {}, rng);
    REQUIRE(!left.mutated);
    REQUIRE(left.output == seed);
    REQUIRE(left.next_offset <= offset);

    MutationResult right = apply_action(seed, w, spec_of(ActionKind::shift_offset_right), {}, rng);
    REQUIRE(right.next_offset + 32 <= seed.size());
    REQUIRE(right.next_offset >= offset);

    MutationResult grow = apply_action(seed, w, spec_of(ActionKind::grow_width), {}, rng);
    REQUIRE(grow.next_width == 33);
    MutationResult shrink = apply_action(seed, w, spec_of(ActionKind::shrink_width), {}, rng);
    REQUIRE(shrink.next_width == 31);

    StateWindow w1 = extract_state(seed, 0, 1);
    MutationResult shrink1 = apply_action(seed, w1, spec_of(ActionKind::shrink_width), {}, rng);
    REQUIRE(shrink1.next_width == 1);  // clamped

    MutationResult up = apply_action(seed, w, spec_of(ActionKind::adjust_ratio_up), {}, rng);
    REQUIRE(up.next_ratio_scale == 2.0);
    REQUIRE(!up.mutated);
}

TEST_CASE("length laws hold across random inputs, windows and actions") {
    Rng rng(101);
    TokenDictionary dict;
    dict.tokens = {"tok", "longertoken"};
    for (int trial = 0; trial < 400; ++trial) {
        Input input = random_input(rng, 40 + rng.index(400));
        std::size_t width = 1 + rng.index(std::min<std::size_t>(32, input.size() - 1));
        std::size_t offset = rng.index(input.size() - width + 1);
        StateWindow w = extract_state(input, offset, width);
        for (ActionKind kind :
             {ActionKind::bit_flip, ActionKind::shuffle_window, ActionKind::shuffle_object_segments,
              ActionKind::copy_window_overwrite, ActionKind::delete_window,
              ActionKind::copy_window_insert, ActionKind::insert_token}) {
            MutationResult r = apply_action(input, w, spec_of(kind), dict, rng);
            switch (kind) {
                case ActionKind::delete_window:
                    REQUIRE(r.output.size() == input.size() - width);
                    break;
                case ActionKind::copy_window_insert:
                    REQUIRE(r.output.size() == input.size() + width);
                    break;
                case ActionKind::insert_token:
                    REQUIRE(r.output.size() >= input.size() + 3);
                    break;
                default:
                    REQUIRE(r.output.size() == input.size());
            }
        }
    }
}

TEST_CASE("apply_action is deterministic given the rng seed") {
    TokenDictionary dict;
    dict.tokens = {"alpha", "beta"};
    for (ActionKind kind :
         {ActionKind::bit_flip, ActionKind::insert_token, ActionKind::shuffle_window,
          ActionKind::shuffle_object_segments, ActionKind::copy_window_insert,
          ActionKind::copy_window_overwrite, ActionKind::delete_window}) {
        Rng mk(55);
        Input input = random_input(mk, 300);
        StateWindow w = extract_state(input, 10, 32);
        Rng r1(1000), r2(1000);
        MutationResult a = apply_action(input, w, spec_of(kind), dict, r1);
        MutationResult b = apply_action(input, w, spec_of(kind), dict, r2);
        REQUIRE(a.output == b.output);
    }
}

TEST_CASE("disabled actions are rejected") {
    Rng rng(1);
    Input input("abcdefgh");
    StateWindow w = extract_state(input, 0, 4);
    ActionSpec disabled{ActionKind::bit_flip, 0.01, false};
    REQUIRE_THROWS_AS(apply_action(input, w, disabled, {}, rng), ContractViolation);
}

TEST_CASE("default action set has eight mutating actions") {
    ActionSet set = ActionSet::default_set();
    REQUIRE(set.size() == 8);
    REQUIRE(set.at(0).kind == ActionKind::bit_flip);
    REQUIRE(set.at(7).kind == ActionKind::delete_window);
    REQUIRE_THROWS_AS(set.at(8), ContractViolation);
    REQUIRE_THROWS_AS(ActionSet(std::vector<ActionSpec>{{ActionKind::bit_flip, 0.01, false}}),
                      ContractViolation);
}
