#include "qnet/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace qnet {

ScoreFunction::ScoreFunction()
    : ScoreFunction({{0.1, 0.25}, {1.0, 0.75}, {5.0, 0.875}, {10.0, 0.925}, {1e12, 1.0}}, 0.1) {}

ScoreFunction::ScoreFunction(std::vector<ScoreBreakpoint> breakpoints, double fail_threshold,
                             ScoreInterp interp)
    : breakpoints_(std::move(breakpoints)), fail_threshold_(fail_threshold), interp_(interp) {
    if (breakpoints_.size() < 2) throw std::invalid_argument("score function needs >= 2 breakpoints");
    for (size_t i = 0; i < breakpoints_.size(); ++i) {
        const auto& bp = breakpoints_[i];
        if (bp.skr_bps <= 0) throw std::invalid_argument("score breakpoints need positive SKR");
        if (bp.score < 0 || bp.score > 1) throw std::invalid_argument("scores must lie in [0, 1]");
        if (i > 0 && (bp.skr_bps <= breakpoints_[i - 1].skr_bps || bp.score <= breakpoints_[i - 1].score))
            throw std::invalid_argument("score breakpoints must be strictly increasing in both coordinates");
    }
    if (fail_threshold_ > breakpoints_.front().skr_bps)
        throw std::invalid_argument("fail threshold above the first breakpoint");
    log10_skr_.reserve(breakpoints_.size());
    for (const auto& bp : breakpoints_) log10_skr_.push_back(std::log10(bp.skr_bps));
}

double ScoreFunction::link_score(double skr_bps) const {
    if (skr_bps < 0 || std::isnan(skr_bps)) throw std::domain_error("SKR must be non-negative");
    if (skr_bps < fail_threshold_) return 0.0;
    if (skr_bps <= breakpoints_.front().skr_bps) return breakpoints_.front().score;
    if (skr_bps >= breakpoints_.back().skr_bps) return breakpoints_.back().score;
    // find segment [i, i+1] with skr in (bp[i], bp[i+1])
    size_t i = 0;
    while (skr_bps >= breakpoints_[i + 1].skr_bps) ++i;
    if (skr_bps == breakpoints_[i + 1].skr_bps) return breakpoints_[i + 1].score;
    const auto& lo = breakpoints_[i];
    const auto& hi = breakpoints_[i + 1];
    double t = interp_ == ScoreInterp::log10
                   ? (std::log10(skr_bps) - log10_skr_[i]) / (log10_skr_[i + 1] - log10_skr_[i])
                   : (skr_bps - lo.skr_bps) / (hi.skr_bps - lo.skr_bps);
    return lo.score + t * (hi.score - lo.score);
}

double ScoreFunction::inverse(double score) const {
    if (std::isnan(score) || score < 0 || score > breakpoints_.back().score)
        throw std::domain_error("score outside [0, 1]");
    if (score < breakpoints_.front().score)
        throw std::domain_error("score below the first breakpoint is unreachable from a network score");
    // exact at breakpoints
    for (size_t i = 0; i < breakpoints_.size(); ++i)
        if (score == breakpoints_[i].score) return breakpoints_[i].skr_bps;
    size_t i = 0;
    while (score > breakpoints_[i + 1].score) ++i;
    const auto& lo = breakpoints_[i];
    const auto& hi = breakpoints_[i + 1];
    double t = (score - lo.score) / (hi.score - lo.score);
    if (interp_ == ScoreInterp::log10)
        return std::pow(10.0, log10_skr_[i] + t * (log10_skr_[i + 1] - log10_skr_[i]));
    return lo.skr_bps + t * (hi.skr_bps - lo.skr_bps);
}

double network_score(std::span<const double> skrs_bps, const ScoreFunction& f) {
    if (skrs_bps.empty()) throw std::domain_error("network score over an empty link set");
    double log_sum = 0.0;
    double first_score = f.link_score(skrs_bps.front());
    bool all_equal = true;
    for (double r : skrs_bps) {
        double s = f.link_score(r);
        if (s == 0.0) return 0.0;
        if (s != first_score) all_equal = false;
        log_sum += std::log(s);
    }
    if (all_equal) return first_score;  // geometric mean is idempotent
    return std::exp(log_sum / static_cast<double>(skrs_bps.size()));
}

Aeskr aeskr_from_score(double network_score, const ScoreFunction& f) {
    if (network_score == 0.0) return Aeskr::failed();
    return Aeskr::of(f.inverse(network_score));
}

Aeskr aeskr(std::span<const double> skrs_bps, const ScoreFunction& f) {
    // When every link runs at the same rate r the geometric mean is f(r) and
    // the inverse map lands back on r wherever f is invertible; return r
    // directly so the identity holds to the last bit.
    if (!skrs_bps.empty()) {
        bool all_equal = true;
        for (double r : skrs_bps)
            if (r != skrs_bps.front()) {
                all_equal = false;
                break;
            }
        if (all_equal) {
            double r = skrs_bps.front();
            double s = f.link_score(r);  // validates r and settles the FAILED case
            if (s == 0.0) return Aeskr::failed();
            if (r >= f.breakpoints().front().skr_bps && r <= f.breakpoints().back().skr_bps)
                return Aeskr::of(r);
            return aeskr_from_score(s, f);
        }
    }
    return aeskr_from_score(network_score(skrs_bps, f), f);
}

Selector Selector::for_user(std::string user_id) {
    Selector s;
    s.kind_ = Kind::user;
    s.user_id_ = std::move(user_id);
    return s;
}

Selector Selector::for_scenario(LinkScenario sc) {
    Selector s;
    s.kind_ = Kind::scenario;
    s.scenario_ = sc;
    return s;
}

std::string Selector::label() const {
    switch (kind_) {
        case Kind::all: return "all";
        case Kind::user: return "user:" + user_id_;
        case Kind::scenario: return std::string("scenario:") + to_string(scenario_);
    }
    return "?";
}

bool Selector::matches(const UserPair& link, const UserDirectory& users) const {
    switch (kind_) {
        case Kind::all: return true;
        case Kind::user: return link.a == user_id_ || link.b == user_id_;
        case Kind::scenario: return users.scenario_of(link) == scenario_;
    }
    return false;
}

std::vector<Selector> standard_selectors(const UserDirectory& users) {
    std::vector<Selector> out;
    for (const User& u : users.users()) out.push_back(Selector::for_user(u.id));
    out.push_back(Selector::for_scenario(LinkScenario::local_local));
    out.push_back(Selector::for_scenario(LinkScenario::deployed_local));
    out.push_back(Selector::for_scenario(LinkScenario::deployed_deployed));
    out.push_back(Selector::all());
    return out;
}

ScoreReport subgroup_aeskr(const std::vector<LinkSkr>& links, const UserDirectory& users,
                           const Selector& selector, const ScoreFunction& f) {
    ScoreReport report;
    report.selector = selector.label();
    std::vector<double> skrs;
    for (const LinkSkr& l : links) {
        if (!selector.matches(l.link, users)) continue;
        report.links.push_back({l.link.id(), l.skr_bps, f.link_score(l.skr_bps)});
        skrs.push_back(l.skr_bps);
    }
    if (skrs.empty())
        throw std::domain_error("selector '" + report.selector + "' matches no link");
    report.network_score = network_score(skrs, f);
    report.aeskr = aeskr_from_score(report.network_score, f);
    return report;
}

ScoreReport score_links(const std::vector<std::pair<std::string, double>>& link_skrs,
                        const ScoreFunction& f, const std::string& selector_label) {
    ScoreReport report;
    report.selector = selector_label;
    std::vector<double> skrs;
    for (const auto& [id, skr] : link_skrs) {
        report.links.push_back({id, skr, f.link_score(skr)});
        skrs.push_back(skr);
    }
    if (skrs.empty()) throw std::domain_error("no links to score");
    report.network_score = network_score(skrs, f);
    report.aeskr = aeskr_from_score(report.network_score, f);
    return report;
}

}  // namespace qnet
