#pragma once

// Granger-causality networks read off an estimated coefficient matrix and
// their aggregation into category degree tables.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/mf_data.hpp"

namespace mfhier {

struct Edge {
    int from = 0;  // regressor column
    int to = 0;    // dependent row
    double weight = 0.0;
};

struct EdgeList {
    int dimension = 0;
    std::vector<Edge> edges;
};

/// Every exactly-nonzero cell (i, j) as the edge j -> i.
EdgeList edge_list(const Eigen::MatrixXd& coef);

using CategoryMap = std::map<std::string, std::string>;  // variable id -> category

/// Two-column CSV "id,category"; a header row is optional.
CategoryMap read_category_map(const std::string& path);
CategoryMap parse_category_map(std::istream& in);

struct CategoryTable {
    std::vector<std::string> categories;
    Eigen::MatrixXi counts;     // (i, j): edges from category j to category i
    Eigen::VectorXi in_degree;  // row sums
    Eigen::VectorXi out_degree; // column sums
    int total = 0;
};

/// Counts over all within-period columns of each variable. Categories are
/// ordered by first appearance in `order`, then alphabetically.
CategoryTable category_degrees(const EdgeList& edges, const StackedPanel& panel, const CategoryMap& map,
                               const std::vector<std::string>& order = {});

void write_edges_csv(std::ostream& out, const EdgeList& edges, const StackedPanel& panel);
void write_adjacency_csv(std::ostream& out, const Eigen::MatrixXd& coef, const StackedPanel& panel);
void write_dot(std::ostream& out, const EdgeList& edges, const StackedPanel& panel);
void write_category_table_csv(std::ostream& out, const CategoryTable& table);

}  // namespace mfhier
