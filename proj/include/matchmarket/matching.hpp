#pragma once

#include <cstdint>
#include <vector>

namespace mm {

// Partial bijection between men and women; kUnmatched plays the role of
// self-matching for unmatched agents.
struct Matching {
    static constexpr std::int32_t kUnmatched = -1;

    std::vector<std::int32_t> man_to_woman;
    std::vector<std::int32_t> woman_to_man;

    int num_matched() const {
        int c = 0;
        for (auto w : man_to_woman) c += (w != kUnmatched);
        return c;
    }

    bool operator==(const Matching&) const = default;
};

}  // namespace mm
