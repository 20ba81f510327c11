#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "qnet/topology.hpp"

namespace qnet {

struct SolveOptions {
    std::uint64_t seed{0};
    int local_search_rounds{20};
};

struct SolveStats {
    int pairs_used{};
    int split_pairs_used{};
    int max_channels_per_user{};
    std::size_t grants{};
};

struct SolveResult {
    bool feasible{};
    ChannelAssignment assignment;   // best effort; full mesh iff feasible
    std::vector<UserPair> uncovered;
    SolveStats stats;
};

/// Find a channel assignment giving every user pair a shared conjugate pair,
/// minimizing (max channel copies per user, conjugate pairs used)
/// lexicographically.
///
/// Greedy biclique covering: users are grouped, group pairs get one split
/// pair each, and each group's internal clique is covered by a single split
/// pair with overlapping sides (K_m needs sides of size m-1, so one pair
/// suffices up to m = 5). Local search then prunes redundant grants and
/// retires pairs whose links fit into spare ports elsewhere. Deterministic
/// for a fixed seed.
///
/// Pairs with either side in `excluded` are never used. Infeasible instances
/// come back with the uncoverable pairs listed, not thrown.
SolveResult solve_assignment(const UserDirectory& users, const std::vector<ConjugatePair>& available,
                             const std::set<LogicalChannel>& excluded, const GridConfig& grid,
                             const SolveOptions& options = {});

}  // namespace qnet
