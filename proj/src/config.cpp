#include "qnet/config.hpp"

#include <fstream>
#include <stdexcept>

namespace qnet {

namespace {

using nlohmann::json;

void require_known(const json& j, std::initializer_list<const char*> known,
                   const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw std::invalid_argument("unknown key \"" + key + "\" in " + context);
    }
}

GridConfig parse_grid(const json& j) {
    require_known(j, {"min_itu", "max_itu", "center_itu", "split_min_abs_lc", "excluded_lcs"},
                  "grid");
    GridConfig grid;
    grid.min_itu = j.value("min_itu", grid.min_itu);
    grid.max_itu = j.value("max_itu", grid.max_itu);
    grid.center_itu = j.value("center_itu", grid.center_itu);
    grid.split_min_abs_lc = j.value("split_min_abs_lc", grid.split_min_abs_lc);
    grid.validate();
    return grid;
}

std::set<LogicalChannel> parse_exclusions(const json& grid_section, const GridConfig& grid) {
    std::set<LogicalChannel> excluded;
    for (const auto& v : grid_section.value("excluded_lcs", json::array())) {
        if (!v.is_number_integer())
            throw std::invalid_argument("excluded_lcs entries must be integers");
        int lc = v.get<int>();
        if (!grid.contains_lc(lc))
            throw std::invalid_argument("excluded LC " + std::to_string(lc) + " is off the grid");
        excluded.insert(LogicalChannel{lc});
    }
    return excluded;
}

User parse_user(const json& j) {
    require_known(j, {"id", "attachment", "bounce_back_loss_db", "one_way_loss_db"}, "user");
    User u;
    u.id = j.at("id").get<std::string>();
    if (u.id.empty()) throw std::invalid_argument("user id must not be empty");
    u.attachment = attachment_from_string(j.value("attachment", std::string{"local"}));
    bool bounce = j.contains("bounce_back_loss_db");
    bool one_way = j.contains("one_way_loss_db");
    if (bounce && one_way)
        throw std::invalid_argument("user " + u.id +
                                    ": give bounce_back_loss_db or one_way_loss_db, not both");
    // bounce-back measurements see the fibre twice
    if (bounce) u.deployed_loss_db = j["bounce_back_loss_db"].get<double>() / 2.0;
    if (one_way) u.deployed_loss_db = j["one_way_loss_db"].get<double>();
    if (u.deployed_loss_db < 0.0)
        throw std::invalid_argument("user " + u.id + ": fibre loss must be non-negative");
    return u;
}

ReceiverModel parse_receiver(const json& j, const ReceiverModel& base, const std::string& context) {
    require_known(j, {"detector_efficiency", "dark_count_rate", "internal_loss_db", "visibility"},
                  context);
    ReceiverModel r = base;
    r.detector_efficiency = j.value("detector_efficiency", r.detector_efficiency);
    r.dark_count_rate = j.value("dark_count_rate", r.dark_count_rate);
    r.internal_loss_db = j.value("internal_loss_db", r.internal_loss_db);
    r.visibility = j.value("visibility", r.visibility);
    r.validate();
    return r;
}

ScoreFunction parse_scoring(const json& j) {
    require_known(j, {"breakpoints", "fail_threshold", "interpolation"}, "scoring");
    ScoreFunction defaults;
    std::vector<ScoreBreakpoint> breakpoints = defaults.breakpoints();
    if (j.contains("breakpoints")) {
        breakpoints.clear();
        for (const auto& bp : j["breakpoints"]) {
            if (!bp.is_array() || bp.size() != 2)
                throw std::invalid_argument("scoring breakpoints must be [skr, score] pairs");
            breakpoints.push_back({bp[0].get<double>(), bp[1].get<double>()});
        }
    }
    double threshold = j.value("fail_threshold", defaults.fail_threshold());
    std::string interp = j.value("interpolation", std::string{"log10"});
    ScoreInterp mode;
    if (interp == "log10")
        mode = ScoreInterp::log10;
    else if (interp == "linear")
        mode = ScoreInterp::linear;
    else
        throw std::invalid_argument("scoring interpolation must be \"log10\" or \"linear\"");
    return ScoreFunction(std::move(breakpoints), threshold, mode);
}

}  // namespace

SourceModel NetworkConfig::source() const {
    SourceModel s;
    s.pair_rate_per_channel = pair_rate_per_channel;
    s.channel_spectrum = channel_spectrum;
    return s;
}

NetworkModels NetworkConfig::models() const {
    NetworkModels m;
    m.default_receiver = default_receiver;
    m.receivers = receivers;
    m.splitter = splitter;
    m.protocol = protocol;
    m.score = score;
    m.reference_transmission = reference_transmission;
    m.channel_spectrum = channel_spectrum;
    return m;
}

NetworkConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config root must be a JSON object");
    require_known(doc,
                  {"grid", "users", "source", "receivers", "splitter", "protocol", "scoring",
                   "sweep", "stability", "report_only"},
                  "config");
    NetworkConfig cfg;

    if (doc.contains("grid")) {
        cfg.grid = parse_grid(doc["grid"]);
        cfg.excluded_lcs = parse_exclusions(doc["grid"], cfg.grid);
    }

    std::vector<User> users;
    for (const auto& uj : doc.value("users", json::array())) users.push_back(parse_user(uj));
    cfg.users = UserDirectory(std::move(users));

    if (doc.contains("source")) {
        const json& s = doc["source"];
        require_known(s,
                      {"pair_rate_per_channel", "reference_singles", "reference_transmission",
                       "channel_spectrum"},
                      "source");
        cfg.reference_transmission = s.value("reference_transmission", 1.0);
        if (!(cfg.reference_transmission > 0.0))
            throw std::invalid_argument("reference_transmission must be positive");
        if (s.contains("pair_rate_per_channel") && s.contains("reference_singles"))
            throw std::invalid_argument(
                "source: give pair_rate_per_channel or reference_singles, not both");
        if (s.contains("pair_rate_per_channel"))
            cfg.pair_rate_per_channel = s["pair_rate_per_channel"].get<double>();
        if (s.contains("reference_singles"))
            cfg.pair_rate_per_channel =
                s["reference_singles"].get<double>() / cfg.reference_transmission;
        // items() must not run on a temporary; it keeps a reference.
        const json spectrum = s.value("channel_spectrum", json::object());
        for (const auto& [key, value] : spectrum.items()) {
            int k = 0;
            try {
                size_t used = 0;
                k = std::stoi(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw std::invalid_argument("channel_spectrum keys must be conjugate pair numbers");
            }
            if (k < 1) throw std::invalid_argument("channel_spectrum keys must be >= 1");
            cfg.channel_spectrum[k] = value.get<double>();
        }
    }
    SourceModel probe = cfg.source();
    probe.validate();

    if (doc.contains("receivers")) {
        const json& r = doc["receivers"];
        require_known(r, {"default", "per_user"}, "receivers");
        if (r.contains("default"))
            cfg.default_receiver = parse_receiver(r["default"], ReceiverModel{}, "receivers.default");
        const json per_user = r.value("per_user", json::object());
        for (const auto& [id, rj] : per_user.items()) {
            if (!cfg.users.contains(id))
                throw std::invalid_argument("receiver for unknown user \"" + id + "\"");
            cfg.receivers[id] = parse_receiver(rj, cfg.default_receiver, "receiver for " + id);
        }
    }

    if (doc.contains("splitter")) {
        require_known(doc["splitter"], {"exact_quarter"}, "splitter");
        cfg.splitter.exact_quarter = doc["splitter"].value("exact_quarter", true);
    }

    if (doc.contains("protocol")) {
        const json& p = doc["protocol"];
        require_known(p, {"sifting_factor", "ec_efficiency", "coincidence_window_s"}, "protocol");
        cfg.protocol.sifting_factor = p.value("sifting_factor", cfg.protocol.sifting_factor);
        cfg.protocol.ec_efficiency = p.value("ec_efficiency", cfg.protocol.ec_efficiency);
        cfg.protocol.coincidence_window_s =
            p.value("coincidence_window_s", cfg.protocol.coincidence_window_s);
        cfg.protocol.validate();
    }

    if (doc.contains("scoring")) cfg.score = parse_scoring(doc["scoring"]);

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        require_known(s, {"min_reference_singles", "max_reference_singles", "points_per_decade"},
                      "sweep");
        cfg.sweep.min_reference_singles =
            s.value("min_reference_singles", cfg.sweep.min_reference_singles);
        cfg.sweep.max_reference_singles =
            s.value("max_reference_singles", cfg.sweep.max_reference_singles);
        cfg.sweep.points_per_decade = s.value("points_per_decade", cfg.sweep.points_per_decade);
        if (!(cfg.sweep.min_reference_singles > 0.0) ||
            cfg.sweep.max_reference_singles < cfg.sweep.min_reference_singles)
            throw std::invalid_argument("sweep range requires 0 < min <= max");
        if (cfg.sweep.points_per_decade < 2)
            throw std::invalid_argument("sweep points_per_decade must be at least 2");
    }

    if (doc.contains("stability")) {
        const json& s = doc["stability"];
        require_known(s, {"bin_width_s", "aggregation"}, "stability");
        cfg.stability.bin_width_s = s.value("bin_width_s", cfg.stability.bin_width_s);
        if (!(cfg.stability.bin_width_s > 0.0))
            throw std::invalid_argument("stability bin_width_s must be positive");
        std::string agg = s.value("aggregation", std::string{"scoring-of-means"});
        if (agg == "scoring-of-means")
            cfg.stability.aggregation = FullPeriodAggregation::scoring_of_means;
        else if (agg == "bin-mean")
            cfg.stability.aggregation = FullPeriodAggregation::mean_of_bin_scores;
        else
            throw std::invalid_argument(
                "stability aggregation must be \"scoring-of-means\" or \"bin-mean\"");
    }

    cfg.report_only = doc.value("report_only", false);
    cfg.default_receiver.validate();
    return cfg;
}

NetworkConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config " + path + " is not valid JSON: " + e.what());
    }
    try {
        return parse_config(doc);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
}

}  // namespace qnet
