#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rlfuzz/dictionary.hpp"
#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"
#include "rlfuzz/rng.hpp"

namespace rlfuzz {

enum class ActionKind {
    bit_flip,
    insert_token,
    shuffle_window,
    shuffle_object_segments,
    copy_window_insert,
    copy_window_overwrite,
    delete_window,
    shift_offset_left,
    shift_offset_right,
    grow_width,
    shrink_width,
    adjust_ratio_up,
    adjust_ratio_down,
};

inline const char* action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::bit_flip: return "bit_flip";
        case ActionKind::insert_token: return "insert_token";
        case ActionKind::shuffle_window: return "shuffle_window";
        case ActionKind::shuffle_object_segments: return "shuffle_object_segments";
        case ActionKind::copy_window_insert: return "copy_window_insert";
        case ActionKind::copy_window_overwrite: return "copy_window_overwrite";
        case ActionKind::delete_window: return "delete_window";
        case ActionKind::shift_offset_left: return "shift_offset_left";
        case ActionKind::shift_offset_right: return "shift_offset_right";
        case ActionKind::grow_width: return "grow_width";
        case ActionKind::shrink_width: return "shrink_width";
        case ActionKind::adjust_ratio_up: return "adjust_ratio_up";
        case ActionKind::adjust_ratio_down: return "adjust_ratio_down";
    }
    return "?";
}

struct ActionSpec {
    ActionKind kind = ActionKind::bit_flip;
    double ratio = 0.01;  // per-bit flip probability, bit_flip only
    bool enabled = true;

    std::string name() const {
        std::string n = action_kind_name(kind);
        if (kind == ActionKind::bit_flip) n += "(" + std::to_string(ratio) + ")";
        return n;
    }
};

// The enabled actions in index order; indices are what the policy and the
// Q-net output refer to.
class ActionSet {
public:
    ActionSet() = default;
    explicit ActionSet(std::vector<ActionSpec> specs) : specs_(std::move(specs)) {
        for (const auto& s : specs_) {
            if (s.kind == ActionKind::bit_flip && (s.ratio <= 0.0 || s.ratio > 1.0))
                throw ContractViolation("ActionSet: bit_flip ratio must be in (0, 1]");
        }
        if (enabled_count() == 0) throw ContractViolation("ActionSet: enabled subset is empty");
    }

    // The eight input-mutating actions: two bit-flip ratios, token insertion,
    // two shuffles, two window copies, window deletion. Offset/width shifts
    // and ratio adjustment exist but ship disabled.
    static ActionSet default_set() {
        return ActionSet({
            {ActionKind::bit_flip, 0.01, true},
            {ActionKind::bit_flip, 0.05, true},
            {ActionKind::insert_token, 0.0, true},
            {ActionKind::shuffle_window, 0.0, true},
            {ActionKind::shuffle_object_segments, 0.0, true},
            {ActionKind::copy_window_insert, 0.0, true},
            {ActionKind::copy_window_overwrite, 0.0, true},
            {ActionKind::delete_window, 0.0, true},
        });
    }

    std::size_t size() const { return enabled_count(); }

    const ActionSpec& at(std::size_t action_index) const {
        std::size_t seen = 0;
        for (const auto& s : specs_) {
            if (!s.enabled) continue;
            if (seen == action_index) return s;
            ++seen;
        }
        throw ContractViolation("ActionSet: action index " + std::to_string(action_index) +
                                " out of range (|A|=" + std::to_string(size()) + ")");
    }

    const std::vector<ActionSpec>& specs() const { return specs_; }

private:
    std::size_t enabled_count() const {
        return static_cast<std::size_t>(
            std::count_if(specs_.begin(), specs_.end(), [](const ActionSpec& s) { return s.enabled; }));
    }

    std::vector<ActionSpec> specs_;
};

struct ObjectBounds {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
};

struct ObjectMarkers {
    std::string open = "obj";
    std::string close = "endobj";
};

namespace detail {

inline std::optional<std::size_t> find_marker_at_or_before(const ByteString& data,
                                                           std::size_t offset,
                                                           const std::string& marker) {
    if (marker.empty() || data.size() < marker.size()) return std::nullopt;
    std::size_t last_start = std::min(offset, data.size() - marker.size());
    for (std::size_t i = last_start + 1; i-- > 0;) {
        if (std::equal(marker.begin(), marker.end(), data.begin() + static_cast<std::ptrdiff_t>(i)))
            return i;
    }
    return std::nullopt;
}

inline std::optional<std::size_t> find_marker_at_or_after(const ByteString& data,
                                                          std::size_t from,
                                                          const std::string& marker) {
    if (marker.empty() || data.size() < marker.size()) return std::nullopt;
    for (std::size_t i = from; i + marker.size() <= data.size(); ++i) {
        if (std::equal(marker.begin(), marker.end(), data.begin() + static_cast<std::ptrdiff_t>(i)))
            return i;
    }
    return std::nullopt;
}

}  // namespace detail

// Innermost [start, end) bracketing `offset`: start of the nearest open
// marker at or before the offset, through the end of the nearest close
// marker after it. Falls back to the whole input when no markers bracket
// the offset, so the result is always usable.
inline ObjectBounds locate_object_bounds(const Input& input, std::size_t offset,
                                         const ObjectMarkers& markers = {}) {
    if (offset >= input.size())
        throw RangeError("locate_object_bounds: offset " + std::to_string(offset) +
                         " >= input size " + std::to_string(input.size()));
    const ByteString& data = input.bytes();
    auto open_pos = detail::find_marker_at_or_before(data, offset, markers.open);
    if (open_pos) {
        auto close_pos = detail::find_marker_at_or_after(data, *open_pos + markers.open.size(), markers.close);
        if (close_pos) return {*open_pos, *close_pos + markers.close.size()};
    }
    return {0, input.size()};
}

// Outcome of one action application. Shift/grow/shrink actions do not touch
// the bytes; they only adjust the observation for the next step.
struct MutationResult {
    Input output;
    bool mutated = false;
    std::size_t next_offset = 0;
    std::size_t next_width = 0;
    double next_ratio_scale = 1.0;
};

namespace detail {

inline void check_window(const Input& input, const StateWindow& window) {
    if (window.width < 1 || window.offset > input.size() ||
        window.width > input.size() - window.offset)
        throw ContractViolation("apply_action: window does not fit the input");
}

inline Input flip_bits(const Input& input, const StateWindow& w, double ratio, Rng& rng) {
    ByteString data = input.bytes();
    for (std::size_t i = w.offset; i < w.offset + w.width; ++i) {
        for (int bit = 0; bit < 8; ++bit) {
            if (rng.chance(ratio)) data[i] ^= static_cast<Byte>(1u << bit);
        }
    }
    return Input(std::move(data));
}

inline Input insert_at(const Input& input, std::size_t pos, const ByteString& payload) {
    ByteString data = input.bytes();
    data.insert(data.begin() + static_cast<std::ptrdiff_t>(pos), payload.begin(), payload.end());
    return Input(std::move(data));
}

inline Input shuffle_range(const Input& input, std::size_t begin, std::size_t end, Rng& rng) {
    ByteString data = input.bytes();
    // Fisher-Yates over [begin, end)
    for (std::size_t i = end - begin; i > 1; --i) {
        std::size_t j = rng.index(i);
        std::swap(data[begin + i - 1], data[begin + j]);
    }
    return Input(std::move(data));
}

inline Input shuffle_segments(const Input& input, const ObjectBounds& b, Rng& rng) {
    std::size_t len = b.end - b.start;
    // Two distinct interior cut points, sorted, give three non-empty segments.
    std::size_t c1 = b.start + 1 + rng.index(len - 1);
    std::size_t c2 = b.start + 1 + rng.index(len - 2);
    if (c2 >= c1) ++c2;
    if (c1 > c2) std::swap(c1, c2);
    std::array<std::pair<std::size_t, std::size_t>, 3> seg = {
        {{b.start, c1}, {c1, c2}, {c2, b.end}}};
    std::array<std::size_t, 3> order = {0, 1, 2};
    for (std::size_t i = 3; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    const ByteString& src = input.bytes();
    ByteString data(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(b.start));
    for (std::size_t k : order)
        data.insert(data.end(), src.begin() + static_cast<std::ptrdiff_t>(seg[k].first),
                    src.begin() + static_cast<std::ptrdiff_t>(seg[k].second));
    data.insert(data.end(), src.begin() + static_cast<std::ptrdiff_t>(b.end), src.end());
    return Input(std::move(data));
}

}  // namespace detail

// Applies one string-rewrite action at the observed window and returns the
// mutated input. Deterministic given the rng state.
inline MutationResult apply_action(const Input& input, const StateWindow& window,
                                   const ActionSpec& action, const TokenDictionary& dict,
                                   Rng& rng, const ObjectMarkers& markers = {}) {
    if (!action.enabled) throw ContractViolation("apply_action: action is disabled");
    detail::check_window(input, window);

    MutationResult r;
    r.next_offset = window.offset;
    r.next_width = window.width;

    switch (action.kind) {
        case ActionKind::bit_flip:
            r.output = detail::flip_bits(input, window, action.ratio, rng);
            r.mutated = true;
            return r;

        case ActionKind::insert_token: {
            if (dict.empty()) {
                r.output = input;  // flagged no-op: nothing to insert
                return r;
            }
            const std::string& token = dict.tokens[rng.index(dict.tokens.size())];
            std::size_t pos = window.offset + rng.index(window.width);
            r.output = detail::insert_at(input, pos, to_bytes(token));
            r.mutated = true;
            return r;
        }

        case ActionKind::shuffle_window:
            r.output = detail::shuffle_range(input, window.offset, window.offset + window.width, rng);
            r.mutated = true;
            return r;

        case ActionKind::shuffle_object_segments: {
            ObjectBounds b = locate_object_bounds(input, window.offset, markers);
            if (b.end - b.start < 3) {
                r.output = input;  // no room for three segments
                return r;
            }
            r.output = detail::shuffle_segments(input, b, rng);
            r.mutated = true;
            return r;
        }

        case ActionKind::copy_window_insert: {
            ByteString payload(input.bytes().begin() + static_cast<std::ptrdiff_t>(window.offset),
                               input.bytes().begin() +
                                   static_cast<std::ptrdiff_t>(window.offset + window.width));
            std::size_t pos = rng.index(input.size() + 1);
            r.output = detail::insert_at(input, pos, payload);
            r.mutated = true;
            return r;
        }

        case ActionKind::copy_window_overwrite: {
            ByteString payload(input.bytes().begin() + static_cast<std::ptrdiff_t>(window.offset),
                               input.bytes().begin() +
                                   static_cast<std::ptrdiff_t>(window.offset + window.width));
            std::size_t pos = std::min(rng.index(input.size()), input.size() - window.width);
            ByteString data = input.bytes();
            std::copy(payload.begin(), payload.end(),
                      data.begin() + static_cast<std::ptrdiff_t>(pos));
            r.output = Input(std::move(data));
            r.mutated = true;
            return r;
        }

        case ActionKind::delete_window: {
            if (window.width >= input.size())
                throw DegenerateInputError("delete_window would empty the input");
            ByteString data = input.bytes();
            data.erase(data.begin() + static_cast<std::ptrdiff_t>(window.offset),
                       data.begin() + static_cast<std::ptrdiff_t>(window.offset + window.width));
            r.output = Input(std::move(data));
            r.mutated = true;
            return r;
        }

        case ActionKind::shift_offset_left: {
            ObjectBounds cur = locate_object_bounds(input, window.offset, markers);
            std::size_t target = cur.start > 0
                                     ? locate_object_bounds(input, cur.start - 1, markers).start
                                     : 0;
            r.output = input;
            r.next_offset = std::min(target, input.size() - window.width);
            return r;
        }

        case ActionKind::shift_offset_right: {
            ObjectBounds cur = locate_object_bounds(input, window.offset, markers);
            auto next = detail::find_marker_at_or_after(input.bytes(), cur.end, markers.open);
            std::size_t target = next ? *next : input.size();
            r.output = input;
            r.next_offset = std::min(target, input.size() - window.width);
            return r;
        }

        case ActionKind::grow_width:
            r.output = input;
            r.next_width = std::min(window.width + 1, input.size() - window.offset);
            return r;

        case ActionKind::shrink_width:
            r.output = input;
            r.next_width = std::max<std::size_t>(1, window.width - 1);
            return r;

        case ActionKind::adjust_ratio_up:
            r.output = input;
            r.next_ratio_scale = 2.0;
            return r;

        case ActionKind::adjust_ratio_down:
            r.output = input;
            r.next_ratio_scale = 0.5;
            return r;
    }
    throw ContractViolation("apply_action: unknown action kind");
}

}  // namespace rlfuzz
