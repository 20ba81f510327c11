#include "qnet/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qnet {

const ReceiverModel& NetworkModels::receiver_for(const std::string& user_id) const {
    auto it = receivers.find(user_id);
    return it == receivers.end() ? default_receiver : it->second;
}

void NetworkModels::validate() const {
    default_receiver.validate();
    for (const auto& [id, r] : receivers) r.validate();
    protocol.validate();
    if (!(reference_transmission > 0.0))
        throw std::invalid_argument("reference_transmission must be positive");
    for (const auto& [k, b] : channel_spectrum)
        if (!(b > 0.0)) throw std::invalid_argument("channel spectrum brightness must be positive");
}

std::vector<RatedLink> rate_links(const UserDirectory& users, const ChannelAssignment& assignment,
                                  const SourceModel& source, const NetworkModels& models) {
    LinkSet links = served_links(assignment);
    std::vector<RatedLink> out;
    out.reserve(users.size() * (users.size() - 1) / 2);
    for (const UserPair& pair : users.all_pairs()) {
        auto it = links.served.find(pair);
        if (it == links.served.end())
            throw std::invalid_argument("link " + pair.id() + " has no serving conjugate pair");
        RatedLink rl;
        rl.link = pair;
        rl.serving = it->second;
        rl.rates = evaluate_link(users.at(pair.a), users.at(pair.b), assignment, source,
                                 models.receiver_for(pair.a), models.receiver_for(pair.b),
                                 models.splitter, models.protocol);
        out.push_back(std::move(rl));
    }
    return out;
}

std::vector<double> make_log_grid(double min_value, double max_value, int points_per_decade) {
    if (!(min_value > 0.0) || !std::isfinite(max_value) || max_value < min_value)
        throw std::invalid_argument("log grid requires 0 < min <= max");
    if (points_per_decade < 2) throw std::invalid_argument("points_per_decade must be at least 2");
    if (min_value == max_value) return {min_value};

    const double lo = std::log10(min_value);
    const double hi = std::log10(max_value);
    const int intervals_per_decade = points_per_decade - 1;
    const int steps = std::max(1, static_cast<int>(std::ceil((hi - lo) * intervals_per_decade - 1e-9)));
    std::vector<double> grid;
    grid.reserve(steps + 1);
    grid.push_back(min_value);
    for (int i = 1; i < steps; ++i) grid.push_back(std::pow(10.0, lo + (hi - lo) * i / steps));
    grid.push_back(max_value);
    return grid;
}

std::vector<SweepPoint> run_sweep(const UserDirectory& users, const ChannelAssignment& assignment,
                                  const NetworkModels& models,
                                  const std::vector<double>& reference_singles_grid) {
    if (reference_singles_grid.empty()) throw std::invalid_argument("sweep grid is empty");
    for (double r : reference_singles_grid)
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("reference singles rates must be positive and finite");
    models.validate();
    MeshReport mesh = verify_full_mesh(assignment, users);
    if (!mesh.pass)
        throw std::invalid_argument("assignment does not give a full mesh; run the planner first");

    std::vector<SweepPoint> points;
    points.reserve(reference_singles_grid.size());
    for (double reference : reference_singles_grid) {
        SourceModel source;
        source.pair_rate_per_channel = reference / models.reference_transmission;
        source.channel_spectrum = models.channel_spectrum;
        source.validate();

        SweepPoint p;
        p.reference_singles = reference;
        p.mu = source.pair_rate_per_channel;
        p.min_skr = std::numeric_limits<double>::infinity();
        std::vector<double> skrs;
        for (const RatedLink& rl : rate_links(users, assignment, source, models)) {
            skrs.push_back(rl.rates.skr);
            p.mean_skr += rl.rates.skr;
            p.min_skr = std::min(p.min_skr, rl.rates.skr);
        }
        p.mean_skr /= static_cast<double>(skrs.size());
        p.aeskr = aeskr(skrs, models.score);
        points.push_back(std::move(p));
    }
    return points;
}

const SweepPoint& select_operating_point(const std::vector<SweepPoint>& points) {
    const SweepPoint* best = nullptr;
    for (const SweepPoint& p : points) {
        if (p.aeskr.is_failed()) continue;
        if (!best || p.aeskr.bps() > best->aeskr.bps() ||
            (p.aeskr.bps() == best->aeskr.bps() && p.reference_singles < best->reference_singles))
            best = &p;
    }
    if (!best) throw std::domain_error("no viable operating point: every sweep point is FAILED");
    return *best;
}

}  // namespace qnet
