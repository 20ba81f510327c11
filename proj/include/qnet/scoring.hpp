#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnet/topology.hpp"

namespace qnet {

/// Network-level average-effective SKR. Failure (any link score 0) is a
/// distinct state, never the number 0, so it cannot be silently averaged
/// downstream.
class Aeskr {
public:
    static Aeskr failed() { return Aeskr{}; }
    static Aeskr of(double bps) {
        Aeskr a;
        a.failed_ = false;
        a.bps_ = bps;
        return a;
    }

    bool is_failed() const { return failed_; }
    double bps() const {
        if (failed_) throw std::logic_error("AE-SKR is FAILED; no numeric value");
        return bps_;
    }

    friend bool operator==(const Aeskr&, const Aeskr&) = default;

private:
    bool failed_{true};
    double bps_{0.0};
};

/// How to interpolate the score between breakpoints: straight lines on a
/// log10(SKR) axis (default) or on a linear SKR axis.
enum class ScoreInterp { log10, linear };

struct ScoreBreakpoint {
    double skr_bps{};
    double score{};
};

/// The link score function f: SKR -> [0, 1].
///
/// Piecewise interpolation through ordered breakpoints, 0 below the fail
/// threshold (a jump, not a ramp) and 1 above the last breakpoint. Exact at
/// every breakpoint.
class ScoreFunction {
public:
    ScoreFunction();  // default breakpoints, log10 interpolation
    ScoreFunction(std::vector<ScoreBreakpoint> breakpoints, double fail_threshold,
                  ScoreInterp interp = ScoreInterp::log10);

    double operator()(double skr_bps) const { return link_score(skr_bps); }
    double link_score(double skr_bps) const;

    /// Inverse of link_score on [first score, 1]. Scores in (0, first score)
    /// cannot arise from a network score and are rejected; 0 is rejected too
    /// (callers represent it as Aeskr::failed()).
    double inverse(double score) const;

    double fail_threshold() const { return fail_threshold_; }
    double min_score() const { return breakpoints_.front().score; }
    double max_skr() const { return breakpoints_.back().skr_bps; }
    const std::vector<ScoreBreakpoint>& breakpoints() const { return breakpoints_; }
    ScoreInterp interpolation() const { return interp_; }

private:
    std::vector<ScoreBreakpoint> breakpoints_;
    std::vector<double> log10_skr_;  // cached log10 of breakpoint rates
    double fail_threshold_{0.1};
    ScoreInterp interp_{ScoreInterp::log10};
};

/// Geometric mean of link scores (the network score W). Returns 0 if any
/// link fails; returns the common score exactly when all scores are equal.
double network_score(std::span<const double> skrs_bps, const ScoreFunction& f);

/// Map a network score back to an SKR-like figure. W = 0 means failure.
Aeskr aeskr_from_score(double network_score, const ScoreFunction& f);

/// network_score followed by aeskr_from_score.
Aeskr aeskr(std::span<const double> skrs_bps, const ScoreFunction& f);

struct LinkScoreEntry {
    std::string link_id;
    double skr_bps{};
    double score{};
};

struct ScoreReport {
    std::string selector;  // "all", "user:<id>" or "scenario:<L-L|D-L|D-D>"
    std::vector<LinkScoreEntry> links;
    double network_score{};
    Aeskr aeskr;
};

/// Which links of a network a score or summary is restricted to.
class Selector {
public:
    enum class Kind { all, user, scenario };

    static Selector all() { return Selector{}; }
    static Selector for_user(std::string user_id);
    static Selector for_scenario(LinkScenario s);

    Kind kind() const { return kind_; }
    std::string label() const;
    bool matches(const UserPair& link, const UserDirectory& users) const;

private:
    Kind kind_{Kind::all};
    std::string user_id_;
    LinkScenario scenario_{LinkScenario::local_local};
};

/// The selectors behind a per-user / per-scenario / full-network breakdown:
/// one per user, one per connectivity scenario, then the whole network.
std::vector<Selector> standard_selectors(const UserDirectory& users);

struct LinkSkr {
    UserPair link;
    double skr_bps{};
};

/// Score every link, keeping the report restricted to the selector's links.
/// Throws std::domain_error when the selector matches no link.
ScoreReport subgroup_aeskr(const std::vector<LinkSkr>& links, const UserDirectory& users,
                           const Selector& selector, const ScoreFunction& f);

/// Score links identified only by opaque ids (no subgroup selection).
ScoreReport score_links(const std::vector<std::pair<std::string, double>>& link_skrs,
                        const ScoreFunction& f, const std::string& selector_label = "all");

}  // namespace qnet
