#pragma once

// Block partition of the K x K coefficient matrix and the nested priority
// groups that drive the hierarchical penalty.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfhier/mf_data.hpp"

namespace mfhier {

enum class BlockType { OwnOnOwn, HigherOnLower, LowerOnHigher };
enum class Policy { Recency, GroupLasso, RowwiseRecency, Seasonality };

std::string_view block_type_name(BlockType t);
std::string_view policy_name(Policy p);
Policy parse_policy(std::string_view text);

/// A rectangular block of B: rows [row0, row0+rows), cols [col0, col0+cols).
struct CoefficientGroup {
    BlockType type = BlockType::OwnOnOwn;
    int dependent = 0;  // variable index of the rows
    int regressor = 0;  // variable index of the columns
    int row0 = 0, rows = 0;
    int col0 = 0, cols = 0;

    int size() const { return rows * cols; }
};

struct GroupPartition {
    int dimension = 0;
    std::vector<CoefficientGroup> groups;  // row-major over (dependent, regressor) pairs
};

GroupPartition partition_coefficients(const FrequencyScheme& scheme);

struct PolicySet {
    Policy own = Policy::Recency;
    Policy higher_on_lower = Policy::Recency;
    Policy lower_on_higher = Policy::Recency;
};

/// Priority per cell, stored as a local rows x cols matrix per group.
/// RowwiseRecency splits an own-on-own block into one group per row.
struct PriorityAssignment {
    int dimension = 0;
    std::vector<CoefficientGroup> groups;
    std::vector<Eigen::MatrixXi> priorities;

    /// Full K x K matrix of priority values.
    Eigen::MatrixXi priority_matrix() const;
    /// K x K matrix of group ids.
    Eigen::MatrixXi group_matrix() const;
};

PriorityAssignment assign_priorities(const GroupPartition& partition, const PolicySet& policies = {});

/// Nested subgroups of one group. Cells are stored sorted by priority so that
/// s^(p) is the suffix starting at level_start[p-1].
struct NestedChain {
    std::vector<int> level_start;  // size P, level_start[0] == 0
    std::vector<double> weight;    // size P, weight[0] == 1 for structural chains

    int levels() const { return static_cast<int>(level_start.size()); }
};

struct NestedGroup {
    CoefficientGroup block;
    std::vector<int> local;    // cell offsets inside the block, column-major (r + c*rows)
    std::vector<int> linear;   // linear index into the K x K matrix, column-major
    std::vector<int> priority;
    NestedChain chain;

    int size() const { return static_cast<int>(local.size()); }
};

struct NestedGroupStructure {
    int dimension = 0;
    std::vector<NestedGroup> groups;

    /// Plain lasso: one singleton group per cell.
    static NestedGroupStructure singletons(int dimension);
};

/// Builds the chains with weights w_p = card(g) - card(s^(p)) + 1.
NestedGroupStructure build_nested(const PriorityAssignment& assignment);

/// Convenience: partition, assign and nest in one call.
NestedGroupStructure build_structure(const FrequencyScheme& scheme, const PolicySet& policies = {});

}  // namespace mfhier
