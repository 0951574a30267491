#include "mfhier/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "mfhier/csv_io.hpp"
#include "mfhier/errors.hpp"

namespace mfhier {

EdgeList edge_list(const Eigen::MatrixXd& coef) {
    if (coef.rows() != coef.cols()) throw DimensionError("coefficient matrix must be square");
    EdgeList out;
    out.dimension = static_cast<int>(coef.rows());
    for (Eigen::Index i = 0; i < coef.rows(); ++i)
        for (Eigen::Index j = 0; j < coef.cols(); ++j)
            if (coef(i, j) != 0.0) out.edges.push_back({static_cast<int>(j), static_cast<int>(i), coef(i, j)});
    return out;
}

CategoryMap parse_category_map(std::istream& in) {
    CsvTable t = read_csv(in);
    CategoryMap map;
    auto add = [&](const std::vector<std::string>& row) {
        if (row.size() < 2 || row[0].empty() || row[1].empty())
            throw ConfigError("category map rows need 'id,category'");
        if (!map.emplace(row[0], row[1]).second) throw ConfigError("category map lists '" + row[0] + "' twice");
    };
    const bool header = t.header.size() >= 2 && (t.header[0] == "id" || t.header[0] == "variable");
    if (!header) add(t.header);
    for (const auto& r : t.rows) add(r);
    return map;
}

CategoryMap read_category_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open category map '" + path + "'");
    return parse_category_map(in);
}

CategoryTable category_degrees(const EdgeList& edges, const StackedPanel& panel, const CategoryMap& map,
                               const std::vector<std::string>& order) {
    if (edges.dimension != panel.cols()) throw DimensionError("edge list does not match the panel");
    auto category_of = [&](int column) -> const std::string& {
        const std::string& id = panel.columns[column].series_id;
        auto it = map.find(id);
        if (it == map.end()) throw ConfigError("category map has no entry for '" + id + "'");
        return it->second;
    };

    CategoryTable t;
    std::set<std::string> present;
    for (const auto& id : panel.variable_ids()) {
        auto it = map.find(id);
        if (it == map.end()) throw ConfigError("category map has no entry for '" + id + "'");
        present.insert(it->second);
    }
    for (const auto& c : order)
        if (present.count(c) && std::find(t.categories.begin(), t.categories.end(), c) == t.categories.end())
            t.categories.push_back(c);
    for (const auto& c : present)
        if (std::find(t.categories.begin(), t.categories.end(), c) == t.categories.end()) t.categories.push_back(c);

    const int n = static_cast<int>(t.categories.size());
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[t.categories[i]] = i;
    t.counts = Eigen::MatrixXi::Zero(n, n);
    for (const auto& e : edges.edges) ++t.counts(index.at(category_of(e.to)), index.at(category_of(e.from)));
    t.in_degree = t.counts.rowwise().sum();
    t.out_degree = t.counts.colwise().sum().transpose();
    t.total = t.counts.sum();
    return t;
}

void write_edges_csv(std::ostream& out, const EdgeList& edges, const StackedPanel& panel) {
    out << "from,to,weight\n";
    for (const auto& e : edges.edges)
        out << panel.columns[e.from].name() << ',' << panel.columns[e.to].name() << ',' << format_number(e.weight)
            << '\n';
}

void write_adjacency_csv(std::ostream& out, const Eigen::MatrixXd& coef, const StackedPanel& panel) {
    out << "dependent";
    for (const auto& c : panel.columns) out << ',' << c.name();
    out << '\n';
    for (Eigen::Index i = 0; i < coef.rows(); ++i) {
        out << panel.columns[i].name();
        for (Eigen::Index j = 0; j < coef.cols(); ++j) out << ',' << format_number(coef(i, j));
        out << '\n';
    }
}

void write_dot(std::ostream& out, const EdgeList& edges, const StackedPanel& panel) {
    out << "digraph granger {\n";
    for (const auto& c : panel.columns) out << "  \"" << c.name() << "\";\n";
    for (const auto& e : edges.edges)
        out << "  \"" << panel.columns[e.from].name() << "\" -> \"" << panel.columns[e.to].name()
            << "\" [weight=" << format_number(e.weight) << ", penwidth=" << format_number(std::abs(e.weight))
            << "];\n";
    out << "}\n";
}

void write_category_table_csv(std::ostream& out, const CategoryTable& t) {
    out << "to\\from";
    for (const auto& c : t.categories) out << ',' << c;
    out << ",in_degree\n";
    for (std::size_t i = 0; i < t.categories.size(); ++i) {
        out << t.categories[i];
        for (std::size_t j = 0; j < t.categories.size(); ++j) out << ',' << t.counts(i, j);
        out << ',' << t.in_degree(i) << '\n';
    }
    out << "out_degree";
    for (std::size_t j = 0; j < t.categories.size(); ++j) out << ',' << t.out_degree(j);
    out << ',' << t.total << '\n';
}

}  // namespace mfhier
