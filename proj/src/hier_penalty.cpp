#include "mfhier/hier_penalty.hpp"

#include <algorithm>
#include <numeric>

#include "mfhier/errors.hpp"

namespace mfhier {

std::string_view block_type_name(BlockType t) {
    switch (t) {
        case BlockType::OwnOnOwn: return "own_on_own";
        case BlockType::HigherOnLower: return "higher_on_lower";
        case BlockType::LowerOnHigher: return "lower_on_higher";
    }
    return "?";
}

std::string_view policy_name(Policy p) {
    switch (p) {
        case Policy::Recency: return "recency";
        case Policy::GroupLasso: return "group";
        case Policy::RowwiseRecency: return "rowwise_recency";
        case Policy::Seasonality: return "seasonality";
    }
    return "?";
}

Policy parse_policy(std::string_view text) {
    if (text == "recency") return Policy::Recency;
    if (text == "group" || text == "group_lasso") return Policy::GroupLasso;
    if (text == "rowwise_recency") return Policy::RowwiseRecency;
    if (text == "seasonality") return Policy::Seasonality;
    throw ConfigError("unknown priority policy '" + std::string(text) + "'");
}

GroupPartition partition_coefficients(const FrequencyScheme& scheme) {
    GroupPartition part;
    part.dimension = scheme.dimension();
    const auto& vars = scheme.variables();
    for (int a = 0; a < scheme.variable_count(); ++a) {
        for (int b = 0; b < scheme.variable_count(); ++b) {
            CoefficientGroup g;
            g.dependent = a;
            g.regressor = b;
            g.row0 = vars[a].first_column;
            g.rows = vars[a].ratio;
            g.col0 = vars[b].first_column;
            g.cols = vars[b].ratio;
            if (vars[a].ratio == vars[b].ratio)
                g.type = BlockType::OwnOnOwn;
            else if (vars[a].ratio < vars[b].ratio)
                g.type = BlockType::HigherOnLower;
            else
                g.type = BlockType::LowerOnHigher;
            part.groups.push_back(g);
        }
    }
    return part;
}

namespace {

// Local coordinates: row r = 0 is the newest dependent observation (a = m),
// column c = 0 the newest lagged regressor observation (b = m).
Eigen::MatrixXi recency_priorities(const CoefficientGroup& g) {
    Eigen::MatrixXi p(g.rows, g.cols);
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            switch (g.type) {
                case BlockType::HigherOnLower: p(r, c) = c + 1; break;
                // Row for within-period index a = rows - r; a = 1 sits closest to the lagged regressor.
                case BlockType::LowerOnHigher: p(r, c) = g.rows - r; break;
                // Gap between (t-1, b) and (t, a) is (m - b) + a = c - r + m.
                case BlockType::OwnOnOwn: p(r, c) = c - r + g.rows; break;
            }
        }
    }
    return p;
}

}  // namespace

PriorityAssignment assign_priorities(const GroupPartition& partition, const PolicySet& policies) {
    PriorityAssignment out;
    out.dimension = partition.dimension;
    for (const auto& g : partition.groups) {
        Policy policy = g.type == BlockType::OwnOnOwn        ? policies.own
                        : g.type == BlockType::HigherOnLower ? policies.higher_on_lower
                                                             : policies.lower_on_higher;
        if ((policy == Policy::RowwiseRecency || policy == Policy::Seasonality) && g.type != BlockType::OwnOnOwn)
            throw ConfigError(std::string(policy_name(policy)) + " priorities only apply to own-on-own blocks, not " +
                              std::string(block_type_name(g.type)));

        if (g.size() == 1 || policy == Policy::GroupLasso) {
            out.groups.push_back(g);
            out.priorities.push_back(Eigen::MatrixXi::Ones(g.rows, g.cols));
            continue;
        }
        switch (policy) {
            case Policy::Recency:
                out.groups.push_back(g);
                out.priorities.push_back(recency_priorities(g));
                break;
            case Policy::Seasonality: {
                Eigen::MatrixXi p(g.rows, g.cols);
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) p(r, c) = std::abs(r - c) + 1;
                out.groups.push_back(g);
                out.priorities.push_back(p);
                break;
            }
            case Policy::RowwiseRecency:
                for (int r = 0; r < g.rows; ++r) {
                    CoefficientGroup row = g;
                    row.row0 = g.row0 + r;
                    row.rows = 1;
                    Eigen::MatrixXi p(1, g.cols);
                    for (int c = 0; c < g.cols; ++c) p(0, c) = c + 1;
                    out.groups.push_back(row);
                    out.priorities.push_back(p);
                }
                break;
            case Policy::GroupLasso: break;
        }
    }
    return out;
}

Eigen::MatrixXi PriorityAssignment::priority_matrix() const {
    Eigen::MatrixXi m = Eigen::MatrixXi::Zero(dimension, dimension);
    for (std::size_t i = 0; i < groups.size(); ++i)
        m.block(groups[i].row0, groups[i].col0, groups[i].rows, groups[i].cols) = priorities[i];
    return m;
}

Eigen::MatrixXi PriorityAssignment::group_matrix() const {
    Eigen::MatrixXi m = Eigen::MatrixXi::Constant(dimension, dimension, -1);
    for (std::size_t i = 0; i < groups.size(); ++i)
        m.block(groups[i].row0, groups[i].col0, groups[i].rows, groups[i].cols).setConstant(static_cast<int>(i));
    return m;
}

NestedGroupStructure build_nested(const PriorityAssignment& assignment) {
    NestedGroupStructure s;
    s.dimension = assignment.dimension;
    const int K = assignment.dimension;
    for (std::size_t i = 0; i < assignment.groups.size(); ++i) {
        const auto& g = assignment.groups[i];
        const auto& pr = assignment.priorities[i];
        const int n = g.size();

        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return pr(x) < pr(y); });

        NestedGroup ng;
        ng.block = g;
        for (int idx : order) {
            const int r = idx % g.rows, c = idx / g.rows;
            ng.local.push_back(idx);
            ng.linear.push_back((g.row0 + r) + (g.col0 + c) * K);
            ng.priority.push_back(pr(idx));
        }
        const int levels = ng.priority.back();
        int pos = 0;
        for (int p = 1; p <= levels; ++p) {
            while (pos < n && ng.priority[pos] < p) ++pos;
            if (pos >= n || ng.priority[pos] != p)
                throw ValidationError("priorities of a group must be contiguous from 1");
            ng.chain.level_start.push_back(pos);
            // card(g) - card(s^(p)) + 1 with card(s^(p)) = n - pos
            ng.chain.weight.push_back(static_cast<double>(pos + 1));
        }
        s.groups.push_back(std::move(ng));
    }
    return s;
}

NestedGroupStructure NestedGroupStructure::singletons(int dimension) {
    NestedGroupStructure s;
    s.dimension = dimension;
    for (int r = 0; r < dimension; ++r) {
        for (int c = 0; c < dimension; ++c) {
            NestedGroup ng;
            ng.block = {BlockType::OwnOnOwn, r, c, r, 1, c, 1};
            ng.local = {0};
            ng.linear = {r + c * dimension};
            ng.priority = {1};
            ng.chain.level_start = {0};
            ng.chain.weight = {1.0};
            s.groups.push_back(std::move(ng));
        }
    }
    return s;
}

NestedGroupStructure build_structure(const FrequencyScheme& scheme, const PolicySet& policies) {
    return build_nested(assign_priorities(partition_coefficients(scheme), policies));
}

}  // namespace mfhier
