#include "qnet/solver.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <tuple>

namespace qnet {

namespace {

enum class Side { plus, minus };

struct PairUse {
    int k{};
    bool split{};
    std::vector<int> plus;
    std::vector<int> minus;

    std::vector<int>& side(Side s) { return s == Side::plus ? plus : minus; }
    const std::vector<int>& side(Side s) const { return s == Side::plus ? plus : minus; }
    int capacity() const { return split ? 4 : 1; }
    bool empty() const { return plus.empty() && minus.empty(); }
};

// Mutable cover state over the complete graph on n users, with reference
// counts per edge so memberships can be retracted.
class Workspace {
public:
    Workspace(int n, std::vector<int> split_pool, std::vector<int> unsplit_pool)
        : n_(n),
          cover_(n >= 2 ? static_cast<size_t>(n) * (n - 1) / 2 : 0, 0),
          uncovered_(cover_.size()),
          channels_(n, 0),
          split_free_(std::move(split_pool)),
          unsplit_free_(std::move(unsplit_pool)) {
        std::sort(split_free_.begin(), split_free_.end());
        std::sort(unsplit_free_.begin(), unsplit_free_.end());
    }

    int n() const { return n_; }
    size_t edge_count() const { return cover_.size(); }
    size_t uncovered() const { return uncovered_; }
    int channels(int u) const { return channels_[u]; }

    int max_channels() const {
        return channels_.empty() ? 0 : *std::max_element(channels_.begin(), channels_.end());
    }
    int pairs_used() const { return static_cast<int>(used_.size()); }
    std::pair<int, int> objective() const { return {max_channels(), pairs_used()}; }

    const std::map<int, PairUse>& used() const { return used_; }

    size_t edge_index(int u, int v) const {
        if (u > v) std::swap(u, v);
        return static_cast<size_t>(u) * (2 * n_ - u - 1) / 2 + (v - u - 1);
    }
    bool edge_covered(int u, int v) const { return cover_[edge_index(u, v)] > 0; }
    int edge_cover(int u, int v) const { return cover_[edge_index(u, v)]; }

    std::vector<std::pair<int, int>> uncovered_edges() const {
        std::vector<std::pair<int, int>> out;
        for (int u = 0; u < n_; ++u)
            for (int v = u + 1; v < n_; ++v)
                if (!edge_covered(u, v)) out.emplace_back(u, v);
        return out;
    }

    bool has_free(bool split) const { return split ? !split_free_.empty() : !unsplit_free_.empty(); }

    /// Lowest free k of the requested kind, or -1.
    int peek_free(bool split) const {
        const auto& pool = split ? split_free_ : unsplit_free_;
        return pool.empty() ? -1 : pool.front();
    }

    PairUse& open_pair(bool split) {
        auto& pool = split ? split_free_ : unsplit_free_;
        if (pool.empty()) throw std::logic_error("no free pair of requested kind");
        int k = pool.front();
        pool.erase(pool.begin());
        auto [it, fresh] = used_.emplace(k, PairUse{k, split, {}, {}});
        assert(fresh);
        return it->second;
    }

    bool can_add(const PairUse& p, Side s, int u) const {
        const auto& side = p.side(s);
        return static_cast<int>(side.size()) < p.capacity() &&
               std::find(side.begin(), side.end(), u) == side.end();
    }

    void add(int k, Side s, int u) {
        PairUse& p = used_.at(k);
        assert(can_add(p, s, u));
        for (int v : p.side(s == Side::plus ? Side::minus : Side::plus)) {
            if (v == u) continue;
            if (cover_[edge_index(u, v)]++ == 0) --uncovered_;
        }
        p.side(s).push_back(u);
        ++channels_[u];
    }

    void remove(int k, Side s, int u) {
        PairUse& p = used_.at(k);
        auto& side = p.side(s);
        auto it = std::find(side.begin(), side.end(), u);
        assert(it != side.end());
        side.erase(it);
        for (int v : p.side(s == Side::plus ? Side::minus : Side::plus)) {
            if (v == u) continue;
            if (--cover_[edge_index(u, v)] == 0) ++uncovered_;
        }
        --channels_[u];
        if (p.empty()) retire_pair(k);
    }

    void retire_pair(int k) {
        auto it = used_.find(k);
        assert(it != used_.end());
        auto& pool = it->second.split ? split_free_ : unsplit_free_;
        pool.insert(std::lower_bound(pool.begin(), pool.end(), k), k);
        used_.erase(it);
    }

    // Full deep copy for snapshot/rollback in local search.
    struct Snapshot {
        std::map<int, PairUse> used;
        std::vector<int> cover;
        size_t uncovered;
        std::vector<int> channels;
        std::vector<int> split_free, unsplit_free;
    };
    Snapshot snapshot() const { return {used_, cover_, uncovered_, channels_, split_free_, unsplit_free_}; }
    void restore(Snapshot s) {
        used_ = std::move(s.used);
        cover_ = std::move(s.cover);
        uncovered_ = s.uncovered;
        channels_ = std::move(s.channels);
        split_free_ = std::move(s.split_free);
        unsplit_free_ = std::move(s.unsplit_free);
    }

private:
    int n_;
    std::map<int, PairUse> used_;
    std::vector<int> cover_;
    size_t uncovered_;
    std::vector<int> channels_;
    std::vector<int> split_free_;
    std::vector<int> unsplit_free_;
};

struct Biclique {
    std::vector<int> a;
    std::vector<int> b;

    bool single_edge() const { return a.size() == 1 && b.size() == 1; }
};

// One split pair covers the clique on `group` when sides overlap:
// A = group minus its last member, B = group minus its first. Any two members
// differ on at least one side boundary, so every internal pair is covered.
Biclique overlap_clique_cover(const std::vector<int>& group) {
    Biclique b;
    b.a.assign(group.begin(), group.end() - 1);
    b.b.assign(group.begin() + 1, group.end());
    return b;
}

void realize_on(Workspace& ws, int k, const Biclique& bc) {
    for (int u : bc.a) ws.add(k, Side::plus, u);
    for (int v : bc.b) ws.add(k, Side::minus, v);
}

// A candidate way to cover one edge: add up to two memberships, possibly on
// a newly opened pair.
struct CoverMove {
    int k{-1};
    bool open_split{};        // meaningful when opens_pair
    bool opens_pair{};
    std::vector<std::pair<Side, int>> adds;  // (side, user)
};

struct RepairLimits {
    bool allow_new_pairs{true};
    // no membership may push a user past this
    int max_channels_after{std::numeric_limits<int>::max()};
    int forbidden_user{-1};  // never add memberships to this user
};

std::optional<CoverMove> best_cover_move(const Workspace& ws, int u, int v, const RepairLimits& lim) {
    std::optional<CoverMove> best;
    auto resulting_max = [&](const CoverMove& m) {
        int mx = ws.max_channels();
        std::map<int, int> delta;
        for (auto& [s, w] : m.adds) ++delta[w];
        for (auto& [w, d] : delta) mx = std::max(mx, ws.channels(w) + d);
        return mx;
    };
    auto admissible = [&](const CoverMove& m) {
        for (auto& [s, w] : m.adds) {
            if (w == lim.forbidden_user) return false;
            if (ws.channels(w) + 1 > lim.max_channels_after) return false;
        }
        // two adds to the same user on one pair would be the same channel twice
        if (m.adds.size() == 2 && m.adds[0].second == m.adds[1].second) return false;
        return true;
    };
    auto consider = [&](CoverMove m) {
        if (!admissible(m)) return;
        if (!best) {
            best = std::move(m);
            return;
        }
        auto key = [&](const CoverMove& c) {
            return std::tuple(resulting_max(c), c.adds.size(), c.opens_pair ? 1 : 0, c.k);
        };
        if (key(m) < key(*best)) best = std::move(m);
    };

    for (const auto& [k, p] : ws.used()) {
        for (Side s : {Side::plus, Side::minus}) {
            Side opp = s == Side::plus ? Side::minus : Side::plus;
            const auto& mine = p.side(s);
            bool u_in = std::find(mine.begin(), mine.end(), u) != mine.end();
            bool v_in = std::find(mine.begin(), mine.end(), v) != mine.end();
            if (u_in && ws.can_add(p, opp, v)) consider({k, false, false, {{opp, v}}});
            if (v_in && ws.can_add(p, opp, u)) consider({k, false, false, {{opp, u}}});
            if (s == Side::plus && ws.can_add(p, Side::plus, u) && ws.can_add(p, Side::minus, v))
                consider({k, false, false, {{Side::plus, u}, {Side::minus, v}}});
            if (s == Side::plus && ws.can_add(p, Side::plus, v) && ws.can_add(p, Side::minus, u))
                consider({k, false, false, {{Side::plus, v}, {Side::minus, u}}});
        }
    }
    if (lim.allow_new_pairs) {
        for (bool split : {false, true}) {
            int k = ws.peek_free(split);
            if (k >= 0) {
                CoverMove m{k, split, true, {{Side::plus, u}, {Side::minus, v}}};
                consider(std::move(m));
            }
        }
    }
    return best;
}

void apply_cover_move(Workspace& ws, const CoverMove& m) {
    if (m.opens_pair) {
        [[maybe_unused]] PairUse& p = ws.open_pair(m.open_split);
        assert(p.k == m.k);
    }
    for (auto& [s, w] : m.adds) ws.add(m.k, s, w);
}

/// Cover every remaining edge, cheapest admissible move first. Returns edges
/// that could not be covered.
std::vector<std::pair<int, int>> repair(Workspace& ws, const RepairLimits& lim) {
    std::vector<std::pair<int, int>> uncoverable;
    for (auto [u, v] : ws.uncovered_edges()) {
        if (ws.edge_covered(u, v)) continue;  // an earlier move picked it up
        auto move = best_cover_move(ws, u, v, lim);
        if (!move) {
            uncoverable.emplace_back(u, v);
            continue;
        }
        apply_cover_move(ws, *move);
    }
    return uncoverable;
}

// ---- construction -----------------------------------------------------

void construct(Workspace& ws) {
    int n = ws.n();
    if (n < 2) return;

    std::vector<std::vector<int>> groups;
    if (n <= 5) {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        groups.push_back(std::move(all));
    } else {
        for (int start = 0; start < n; start += 4) {
            std::vector<int> g;
            for (int u = start; u < std::min(start + 4, n); ++u) g.push_back(u);
            groups.push_back(std::move(g));
        }
    }

    std::vector<Biclique> multi;
    std::vector<std::pair<int, int>> singles;
    auto enqueue = [&](Biclique bc) {
        if (bc.single_edge())
            singles.emplace_back(bc.a.front(), bc.b.front());
        else
            multi.push_back(std::move(bc));
    };

    for (size_t i = 0; i < groups.size(); ++i)
        for (size_t j = i + 1; j < groups.size(); ++j) enqueue({groups[i], groups[j]});
    for (const auto& g : groups)
        if (g.size() >= 2) enqueue(overlap_clique_cover(g));

    for (const Biclique& bc : multi) {
        if (ws.has_free(true)) {
            realize_on(ws, ws.open_pair(true).k, bc);
        } else {
            // no splitter capacity left: fall back to edge-by-edge coverage
            for (int u : bc.a)
                for (int v : bc.b)
                    if (u != v) singles.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    for (auto [u, v] : singles) {
        if (ws.edge_covered(u, v)) continue;
        if (ws.has_free(false))
            realize_on(ws, ws.open_pair(false).k, {{u}, {v}});
        else if (ws.has_free(true))
            realize_on(ws, ws.open_pair(true).k, {{u}, {v}});
        // else: left for repair / infeasibility reporting
    }
}

// ---- local search ------------------------------------------------------

struct Membership {
    int k;
    Side side;
    int user;
};

std::vector<Membership> all_memberships(const Workspace& ws) {
    std::vector<Membership> ms;
    for (const auto& [k, p] : ws.used()) {
        for (int u : p.plus) ms.push_back({k, Side::plus, u});
        for (int u : p.minus) ms.push_back({k, Side::minus, u});
    }
    return ms;
}

/// Drop memberships whose covered edges all have another cover.
bool prune_pass(Workspace& ws) {
    bool improved = false;
    auto ms = all_memberships(ws);
    // shed load from the busiest users first, retiring high pairs first
    std::stable_sort(ms.begin(), ms.end(), [&](const Membership& a, const Membership& b) {
        return std::tuple(-ws.channels(a.user), -a.k) < std::tuple(-ws.channels(b.user), -b.k);
    });
    for (const Membership& m : ms) {
        const auto it = ws.used().find(m.k);
        if (it == ws.used().end()) continue;
        const PairUse& p = it->second;
        const auto& side = p.side(m.side);
        if (std::find(side.begin(), side.end(), m.user) == side.end()) continue;
        bool redundant = true;
        for (int v : p.side(m.side == Side::plus ? Side::minus : Side::plus)) {
            if (v == m.user) continue;
            if (ws.edge_cover(m.user, v) < 2) {
                redundant = false;
                break;
            }
        }
        if (redundant) {
            ws.remove(m.k, m.side, m.user);
            improved = true;
        }
    }
    return improved;
}

/// Retire whole pairs whose links fit in spare ports elsewhere.
bool eliminate_pass(Workspace& ws, std::vector<int> order) {
    bool improved = false;
    for (int k : order) {
        auto it = ws.used().find(k);
        if (it == ws.used().end()) continue;
        auto before = ws.objective();
        auto snap = ws.snapshot();
        const PairUse p = it->second;
        for (int u : p.plus) ws.remove(k, Side::plus, u);
        for (int u : p.minus) {
            // removing the plus side may already have retired the pair
            if (ws.used().count(k)) ws.remove(k, Side::minus, u);
        }
        RepairLimits lim;
        lim.allow_new_pairs = false;
        bool ok = ws.uncovered() == 0 || repair(ws, lim).empty();
        if (ok && ws.objective() < before)
            improved = true;
        else
            ws.restore(std::move(snap));
    }
    return improved;
}

/// Try to push the busiest users below the current maximum, allowing extra
/// pairs in exchange (the channel count dominates the objective).
bool reduce_max_pass(Workspace& ws) {
    int target = ws.max_channels();
    if (target <= 1) return false;
    auto before = ws.objective();
    auto snap = ws.snapshot();
    std::vector<int> busiest;
    for (int u = 0; u < ws.n(); ++u)
        if (ws.channels(u) == target) busiest.push_back(u);

    for (int u : busiest) {
        bool reduced = false;
        auto ms = all_memberships(ws);
        for (const Membership& m : ms) {
            if (ws.channels(u) < target) break;
            if (m.user != u) continue;
            auto inner = ws.snapshot();
            ws.remove(m.k, m.side, m.user);
            RepairLimits lim;
            lim.max_channels_after = target - 1;
            lim.forbidden_user = u;
            if (repair(ws, lim).empty()) {
                reduced = true;
                break;
            }
            ws.restore(std::move(inner));
        }
        if (!reduced) {
            ws.restore(std::move(snap));
            return false;
        }
    }
    if (ws.objective() < before) return true;
    ws.restore(std::move(snap));
    return false;
}

void local_search(Workspace& ws, const SolveOptions& options) {
    std::mt19937_64 rng(options.seed);
    for (int round = 0; round < options.local_search_rounds; ++round) {
        std::vector<int> order;
        for (const auto& [k, p] : ws.used()) order.push_back(k);
        std::sort(order.begin(), order.end(), std::greater<>());
        if (options.seed != 0) std::shuffle(order.begin(), order.end(), rng);

        bool improved = prune_pass(ws);
        improved |= eliminate_pass(ws, order);
        improved |= reduce_max_pass(ws);
        if (!improved) break;
    }
}

}  // namespace

SolveResult solve_assignment(const UserDirectory& users, const std::vector<ConjugatePair>& available,
                             const std::set<LogicalChannel>& excluded, const GridConfig& grid,
                             const SolveOptions& options) {
    grid.validate();

    // canonical user order: lexicographic by id
    std::vector<int> order(users.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return users.users()[a].id < users.users()[b].id;
    });
    std::vector<std::string> ids;
    for (int i : order) ids.push_back(users.users()[i].id);

    std::vector<int> split_pool, unsplit_pool;
    for (ConjugatePair pair : available) {
        if (pair.k < 1 || !grid.contains_lc(pair.k) || !grid.contains_lc(-pair.k))
            throw std::invalid_argument("conjugate pair " + std::to_string(pair.k) +
                                        " not on the grid");
        if (excluded.count(LogicalChannel{pair.k}) || excluded.count(LogicalChannel{-pair.k}))
            continue;
        auto& pool = grid.is_split(pair) ? split_pool : unsplit_pool;
        if (std::find(pool.begin(), pool.end(), pair.k) == pool.end()) pool.push_back(pair.k);
    }

    int n = static_cast<int>(ids.size());
    Workspace ws(n, std::move(split_pool), std::move(unsplit_pool));
    construct(ws);
    std::vector<std::pair<int, int>> uncoverable;
    if (ws.uncovered() > 0) uncoverable = repair(ws, RepairLimits{});
    if (uncoverable.empty()) local_search(ws, options);

    SolveResult result;
    result.feasible = uncoverable.empty();
    for (auto [u, v] : uncoverable) result.uncovered.emplace_back(ids[u], ids[v]);

    ChannelAssignment assignment(grid);
    for (const auto& [k, p] : ws.used()) {
        auto emit = [&](const std::vector<int>& side, int lc) {
            std::vector<int> sorted = side;
            std::sort(sorted.begin(), sorted.end());
            for (int u : sorted) assignment.add_grant(ids[u], LogicalChannel{lc});
        };
        emit(p.plus, k);
        emit(p.minus, -k);
    }
    result.stats.pairs_used = ws.pairs_used();
    result.stats.max_channels_per_user = ws.max_channels();
    result.stats.grants = assignment.grant_count();
    for (const auto& [k, p] : ws.used())
        if (p.split) ++result.stats.split_pairs_used;
    result.assignment = std::move(assignment);
    return result;
}

}  // namespace qnet
