#pragma once

#include "causalsem/discovery.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace causalsem::detail {

/// Node visiting order by name, so results do not depend on column order.
inline std::vector<std::size_t> name_order(const std::vector<std::string>& names) {
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    return order;
}

inline std::vector<std::size_t> rank_of(const std::vector<std::size_t>& order) {
    std::vector<std::size_t> rank(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
    return rank;
}

inline void sort_by_rank(std::vector<std::size_t>& v, const std::vector<std::size_t>& rank) {
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
}

/// Calls fn(subset) for every size-k subset of `items` in lexicographic
/// position order; stops early when fn returns true. Returns whether it stopped.
template <typename Fn>
bool for_each_subset(const std::vector<std::size_t>& items, std::size_t k, Fn&& fn) {
    if (k > items.size()) return false;
    std::vector<std::size_t> pos(k);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::vector<std::size_t> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = items[pos[i]];
        if (fn(subset)) return true;
        std::size_t i = k;
        while (i > 0 && pos[i - 1] == items.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++pos[i - 1];
        for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
}

inline std::pair<std::size_t, std::size_t> pair_key(std::size_t a, std::size_t b) {
    return {std::min(a, b), std::max(a, b)};
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace causalsem::detail
