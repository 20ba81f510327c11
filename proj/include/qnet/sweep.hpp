#pragma once

#include <map>
#include <string>
#include <vector>

#include "qnet/phys_model.hpp"
#include "qnet/scoring.hpp"
#include "qnet/topology.hpp"

namespace qnet {

/// Everything beyond the source brightness needed to rate a network's links:
/// per-user receivers, splitter behaviour, protocol constants and the score
/// function.
struct NetworkModels {
    ReceiverModel default_receiver;
    std::map<std::string, ReceiverModel> receivers;  // overrides by user id
    SplitterModel splitter;
    ProtocolParams protocol;
    ScoreFunction score;

    /// Corrected reference singles = mu * reference_transmission.
    double reference_transmission{1.0};
    std::map<int, double> channel_spectrum;  // optional per-pair brightness

    const ReceiverModel& receiver_for(const std::string& user_id) const;
    void validate() const;
};

struct RatedLink {
    UserPair link;
    std::vector<ConjugatePair> serving;
    LinkRates rates;
};

/// Evaluate every user pair of a full mesh. Throws std::invalid_argument if
/// some pair is unserved (verify the assignment first).
std::vector<RatedLink> rate_links(const UserDirectory& users, const ChannelAssignment& assignment,
                                  const SourceModel& source, const NetworkModels& models);

/// One evaluated brightness setting of the pump sweep.
struct SweepPoint {
    double reference_singles{};  // counts/s; equals mu * reference_transmission
    double mu{};                 // pairs/s per conjugate pair
    double mean_skr{};           // arithmetic mean over links, bits/s
    double min_skr{};            // worst link, bits/s
    Aeskr aeskr;
};

/// Log-spaced grid from min_value to max_value inclusive, with
/// points_per_decade points covering each decade (so a one-decade range has
/// exactly points_per_decade points, endpoints included and exact).
std::vector<double> make_log_grid(double min_value, double max_value, int points_per_decade = 31);

/// Rate every link at each reference singles setting and score the network.
/// The assignment must verify as a full mesh over `users`, and the grid must
/// be non-empty; both are std::invalid_argument otherwise. Output order
/// matches grid order.
std::vector<SweepPoint> run_sweep(const UserDirectory& users, const ChannelAssignment& assignment,
                                  const NetworkModels& models,
                                  const std::vector<double>& reference_singles_grid);

/// The sweep point maximizing AE-SKR, ties broken toward the lower reference
/// singles rate. Throws std::domain_error when every point is FAILED.
const SweepPoint& select_operating_point(const std::vector<SweepPoint>& points);

}  // namespace qnet
