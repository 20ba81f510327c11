#pragma once

// Exhaustive reference solver for small full-mesh channel assignments, shared
// by the unit tests and the acceptance gate. Independent of the production
// solver: it enumerates biclique covers directly.
//
// A "use" of a conjugate pair is a biclique (A, B): users holding the plus
// channel and users holding the minus channel (sides may overlap; a user on
// both sides spends two channel copies). The use covers every pair across the
// sides with distinct endpoints. The search finds the lexicographically
// minimal (max copies per user, pairs used) over ALL covers by branching on
// the lowest uncovered link: grow any existing use in either orientation, or
// open a fresh use. Any cover can be pruned to an irredundant one where each
// user holds at most n-1 copies and each use keeps a privately covered link,
// so iterating max copies m = 1..n-1 and uses p = 1..min(pool, links) in
// lexicographic order and returning the first hit is exact.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <utility>
#include <vector>

namespace qnet_test {

struct OracleUse {
    bool split{};
    unsigned a{};  // bitmask of users on the plus side
    unsigned b{};  // bitmask of users on the minus side
};

struct OracleResult {
    bool feasible{};
    int max_channels{};
    int pairs{};
};

class ExhaustiveCover {
public:
    ExhaustiveCover(int n, int splits, int unsplits) : n_(n), splits_(splits), unsplits_(unsplits) {
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) edges_.push_back({u, v});
    }

    OracleResult solve() {
        int max_uses = std::min(splits_ + unsplits_, static_cast<int>(edges_.size()));
        for (int m = 1; m <= std::max(1, n_ - 1); ++m) {
            for (int p = 1; p <= max_uses; ++p) {
                m_limit_ = m;
                p_limit_ = p;
                uses_.clear();
                if (dfs(0, 0)) return {true, m, p};
            }
        }
        return {false, 0, 0};
    }

private:
    bool covered(int u, int v) const {
        for (const OracleUse& use : uses_) {
            bool fwd = (use.a >> u & 1u) && (use.b >> v & 1u);
            bool rev = (use.a >> v & 1u) && (use.b >> u & 1u);
            if (fwd || rev) return true;
        }
        return false;
    }

    int memberships(int u) const {
        int count = 0;
        for (const OracleUse& use : uses_) count += (use.a >> u & 1) + (use.b >> u & 1);
        return count;
    }

    bool dfs(int used_splits, int used_unsplits) {
        int eu = -1, ev = -1;
        for (const auto& [u, v] : edges_) {
            if (!covered(u, v)) {
                eu = u;
                ev = v;
                break;
            }
        }
        if (eu < 0) return true;  // everything covered

        // Grow an existing use, either orientation.
        for (std::size_t i = 0; i < uses_.size(); ++i) {
            const int pairs[2][2] = {{eu, ev}, {ev, eu}};
            for (const auto& xy : pairs) {
                int x = xy[0], y = xy[1];
                OracleUse& use = uses_[i];
                unsigned cap = use.split ? 4u : 1u;
                bool need_a = !(use.a >> x & 1u);
                bool need_b = !(use.b >> y & 1u);
                if (!need_a && !need_b) continue;  // would already cover the edge
                if (std::popcount(use.a) + (need_a ? 1u : 0u) > cap) continue;
                if (std::popcount(use.b) + (need_b ? 1u : 0u) > cap) continue;
                if (need_a && memberships(x) + 1 > m_limit_) continue;
                if (need_b && memberships(y) + 1 > m_limit_) continue;
                unsigned old_a = use.a, old_b = use.b;
                use.a |= 1u << x;
                use.b |= 1u << y;
                if (dfs(used_splits, used_unsplits)) return true;
                use.a = old_a;
                use.b = old_b;
            }
        }

        // Open a fresh use on the edge (one orientation; the mirror image is
        // an isomorphic cover).
        if (static_cast<int>(uses_.size()) < p_limit_ && memberships(eu) < m_limit_ &&
            memberships(ev) < m_limit_) {
            for (bool split : {true, false}) {
                if (split && used_splits >= splits_) continue;
                if (!split && used_unsplits >= unsplits_) continue;
                uses_.push_back({split, 1u << eu, 1u << ev});
                if (dfs(used_splits + (split ? 1 : 0), used_unsplits + (split ? 0 : 1)))
                    return true;
                uses_.pop_back();
            }
        }
        return false;
    }

    int n_;
    int splits_;
    int unsplits_;
    int m_limit_{};
    int p_limit_{};
    std::vector<std::pair<int, int>> edges_;
    std::vector<OracleUse> uses_;
};

}  // namespace qnet_test
