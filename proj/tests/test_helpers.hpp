#pragma once

#include <vector>

#include "mfhier/hier_penalty.hpp"

// Hand-built structures for small examples.
namespace testing_util {

/// One group per listed cell set: cells are (row, col) pairs, priorities
/// parallel to them; chains and weights follow the usual formula.
inline mfhier::NestedGroup make_group(int k, const std::vector<std::pair<int, int>>& cells,
                                      const std::vector<int>& priority) {
    mfhier::NestedGroup g;
    int r0 = k, c0 = k, r1 = 0, c1 = 0;
    for (auto [r, c] : cells) {
        r0 = std::min(r0, r);
        c0 = std::min(c0, c);
        r1 = std::max(r1, r + 1);
        c1 = std::max(c1, c + 1);
    }
    g.block.row0 = r0;
    g.block.col0 = c0;
    g.block.rows = r1 - r0;
    g.block.cols = c1 - c0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto [r, c] = cells[i];
        g.local.push_back((r - r0) + (c - c0) * g.block.rows);
        g.linear.push_back(r + c * k);
        g.priority.push_back(priority[i]);
    }
    const int n = static_cast<int>(cells.size());
    for (int i = 0; i < n; ++i)
        if (i == 0 || g.priority[i] != g.priority[i - 1]) {
            g.chain.level_start.push_back(i);
            g.chain.weight.push_back(static_cast<double>(n - (n - i) + 1));
        }
    return g;
}

/// Every cell of a K x K matrix in a single group with one level.
inline mfhier::NestedGroupStructure single_group(int k) {
    std::vector<std::pair<int, int>> cells;
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < k; ++r) cells.emplace_back(r, c);
    mfhier::NestedGroupStructure s;
    s.dimension = k;
    s.groups.push_back(make_group(k, cells, std::vector<int>(cells.size(), 1)));
    return s;
}

inline mfhier::NestedChain chain(std::vector<int> start, std::vector<double> weight) {
    mfhier::NestedChain c;
    c.level_start = std::move(start);
    c.weight = std::move(weight);
    return c;
}

}  // namespace testing_util
