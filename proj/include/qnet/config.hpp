#pragma once

#include <map>
#include <set>
#include <string>

#include "json.hpp"
#include "qnet/channel_grid.hpp"
#include "qnet/phys_model.hpp"
#include "qnet/scoring.hpp"
#include "qnet/stability.hpp"
#include "qnet/sweep.hpp"
#include "qnet/topology.hpp"

namespace qnet {

struct SweepDefaults {
    double min_reference_singles{1e4};
    double max_reference_singles{1e7};
    int points_per_decade{31};
};

struct StabilityDefaults {
    double bin_width_s{600.0};
    FullPeriodAggregation aggregation{FullPeriodAggregation::scoring_of_means};
};

/// One network description file: users, grid, physical models, protocol and
/// scoring parameters, plus per-command defaults. Deployed fibre loss is
/// given as the measured bounce-back (two-way) figure and halved on load.
struct NetworkConfig {
    GridConfig grid;
    std::set<LogicalChannel> excluded_lcs;
    UserDirectory users;

    double pair_rate_per_channel{1e6};
    std::map<int, double> channel_spectrum;
    double reference_transmission{1.0};

    ReceiverModel default_receiver;
    std::map<std::string, ReceiverModel> receivers;
    SplitterModel splitter;
    ProtocolParams protocol;
    ScoreFunction score;

    SweepDefaults sweep;
    StabilityDefaults stability;
    bool report_only{false};  // demote the failed-network exit code to success

    SourceModel source() const;
    NetworkModels models() const;
};

/// Parse a config document. Unknown keys and invalid values are
/// std::invalid_argument with the offending context named.
NetworkConfig parse_config(const nlohmann::json& doc);

/// Read and parse a config file; file errors are std::runtime_error.
NetworkConfig load_config(const std::string& path);

}  // namespace qnet
