#include "qnet/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qnet {

namespace {

std::string human_selector(const std::string& label) {
    if (label == "all") return "Full Network";
    if (label.rfind("user:", 0) == 0) return label.substr(5);
    if (label.rfind("scenario:", 0) == 0) return label.substr(9);
    return label;
}

std::string fixed(double v, int decimals) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, v);
    return buf.data();
}

std::string sig4(const Aeskr& v) {
    if (v.is_failed()) return "FAILED";
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.4g", v.bps());
    return buf.data();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw std::runtime_error("cannot format double");
    return std::string(buf.data(), end);
}

std::string format_aeskr(const Aeskr& value) {
    return value.is_failed() ? "FAILED" : format_double(value.bps());
}

Json aeskr_to_json(const Aeskr& value) {
    if (value.is_failed()) return Json("FAILED");
    return Json(value.bps());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + path.string());
}

Json grid_to_json(const GridConfig& grid) {
    return Json{{"min_itu", grid.min_itu},
                {"max_itu", grid.max_itu},
                {"center_itu", grid.center_itu},
                {"split_min_abs_lc", grid.split_min_abs_lc}};
}

GridConfig grid_from_json(const nlohmann::json& j) {
    GridConfig grid;
    grid.min_itu = j.value("min_itu", grid.min_itu);
    grid.max_itu = j.value("max_itu", grid.max_itu);
    grid.center_itu = j.value("center_itu", grid.center_itu);
    grid.split_min_abs_lc = j.value("split_min_abs_lc", grid.split_min_abs_lc);
    grid.validate();
    return grid;
}

Json assignment_to_json(const ChannelAssignment& assignment) {
    Json grants = Json::array();
    for (const Grant& g : assignment.grants())
        grants.push_back(Json{{"user", g.user_id}, {"lc", g.channel.lc}, {"port", g.port}});
    return Json{{"grid", grid_to_json(assignment.grid())}, {"grants", std::move(grants)}};
}

ChannelAssignment assignment_from_json(const nlohmann::json& j) {
    GridConfig grid = j.contains("grid") ? grid_from_json(j["grid"]) : GridConfig{};
    ChannelAssignment assignment(grid);
    for (const auto& g : j.at("grants")) {
        assignment.add_grant(g.at("user").get<std::string>(),
                             LogicalChannel{g.at("lc").get<int>()}, g.at("port").get<int>());
    }
    return assignment;
}

ChannelAssignment load_assignment(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("assignment " + path.string() + " is not valid JSON: " + e.what());
    }
    return assignment_from_json(doc);
}

Json mesh_report_to_json(const MeshReport& mesh, const SolveStats* stats) {
    Json j{{"total_links", mesh.total_links},
           {"covered_links", mesh.covered_links},
           {"pass", mesh.pass}};
    Json missing = Json::array();
    for (const UserPair& p : mesh.missing) missing.push_back(p.id());
    j["missing"] = std::move(missing);
    Json per_user = Json::object();
    for (const auto& [id, count] : mesh.channels_per_user) per_user[id] = count;
    j["channels_per_user"] = std::move(per_user);
    if (stats) {
        j["stats"] = Json{{"conjugate_pairs_used", stats->pairs_used},
                          {"split_pairs_used", stats->split_pairs_used},
                          {"max_channels_per_user", stats->max_channels_per_user},
                          {"grants", stats->grants}};
    }
    return j;
}

std::string assignment_table(const ChannelAssignment& assignment) {
    std::map<int, std::vector<std::string>> by_channel;
    for (const Grant& g : assignment.grants()) by_channel[g.channel.lc].push_back(g.user_id);
    std::ostringstream out;
    out << "LC    ITU   THz      users\n";
    for (const auto& [lc, users] : by_channel) {
        ItuChannel itu = assignment.grid().lc_to_itu(LogicalChannel{lc});
        std::array<char, 96> head{};
        std::snprintf(head.data(), head.size(), "%+-5d %-5d %-8s ", lc, itu.index,
                      fixed(assignment.grid().lc_frequency_thz(LogicalChannel{lc}), 1).c_str());
        out << head.data();
        for (size_t i = 0; i < users.size(); ++i) out << (i ? " " : "") << users[i];
        out << '\n';
    }
    return out.str();
}

std::string rates_csv(const std::vector<RatedLink>& links) {
    std::ostringstream out;
    out << "link,pair_ks,singles_a,singles_b,true_coincidences,accidentals,qber,sifted_bps,skr_"
           "bps\n";
    for (const RatedLink& rl : links) {
        std::string ks;
        for (size_t i = 0; i < rl.serving.size(); ++i)
            ks += (i ? "+" : "") + std::to_string(rl.serving[i].k);
        out << csv_field(rl.link.id()) << ',' << ks << ',' << format_double(rl.rates.singles_a)
            << ',' << format_double(rl.rates.singles_b) << ','
            << format_double(rl.rates.true_coincidences) << ','
            << format_double(rl.rates.accidentals) << ',' << format_double(rl.rates.qber) << ','
            << format_double(rl.rates.sifted_rate) << ',' << format_double(rl.rates.skr) << '\n';
    }
    return out.str();
}

Json score_report_to_json(const ScoreReport& report) {
    Json links = Json::array();
    for (const LinkScoreEntry& e : report.links)
        links.push_back(Json{{"link", e.link_id}, {"skr_bps", e.skr_bps}, {"score", e.score}});
    return Json{{"selector", report.selector},
                {"network_score", report.network_score},
                {"aeskr_bps", aeskr_to_json(report.aeskr)},
                {"links", std::move(links)}};
}

Json network_score_json(const std::vector<RatedLink>& links, const UserDirectory& users,
                        const ScoreFunction& score) {
    std::vector<LinkSkr> skrs;
    skrs.reserve(links.size());
    for (const RatedLink& rl : links) skrs.push_back({rl.link, rl.rates.skr});

    Json selectors = Json::array();
    for (const Selector& sel : standard_selectors(users)) {
        bool any = std::any_of(skrs.begin(), skrs.end(),
                               [&](const LinkSkr& l) { return sel.matches(l.link, users); });
        if (!any) continue;  // a network without e.g. D-D links has no D-D row
        ScoreReport report = subgroup_aeskr(skrs, users, sel, score);
        selectors.push_back(Json{{"selector", report.selector},
                                 {"links_counted", report.links.size()},
                                 {"network_score", report.network_score},
                                 {"aeskr_bps", aeskr_to_json(report.aeskr)}});
    }
    ScoreReport full = subgroup_aeskr(skrs, users, Selector::all(), score);
    Json link_rows = Json::array();
    for (const LinkScoreEntry& e : full.links)
        link_rows.push_back(Json{{"link", e.link_id}, {"skr_bps", e.skr_bps}, {"score", e.score}});
    return Json{{"selectors", std::move(selectors)}, {"links", std::move(link_rows)}};
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << "reference_singles,mean_skr,min_skr,aeskr\n";
    for (const SweepPoint& p : points) {
        out << format_double(p.reference_singles) << ',' << format_double(p.mean_skr) << ','
            << format_double(p.min_skr) << ',' << format_aeskr(p.aeskr) << '\n';
    }
    return out.str();
}

Json sweep_point_to_json(const SweepPoint& point) {
    return Json{{"reference_singles", point.reference_singles},
                {"mu", point.mu},
                {"mean_skr", point.mean_skr},
                {"min_skr", point.min_skr},
                {"aeskr_bps", aeskr_to_json(point.aeskr)}};
}

Json stability_summary_to_json(const StabilitySummary& summary) {
    Json j{{"bin_width_s", summary.bin_width_s},
           {"aggregation", summary.aggregation == FullPeriodAggregation::scoring_of_means
                               ? "scoring-of-means"
                               : "bin-mean"},
           {"bins_summarized", summary.bins_summarized}};
    if (summary.failure_time_s) {
        j["failure_time_s"] = *summary.failure_time_s;
        j["failure_time_days"] = *summary.failure_time_s / 86400.0;
    } else {
        j["failure_time_s"] = nullptr;
        j["failure_time_days"] = nullptr;
    }
    Json rows = Json::array();
    for (const SelectorSummary& row : summary.rows) {
        rows.push_back(Json{{"selector", row.selector},
                            {"aeskr_bps", aeskr_to_json(row.full_period)},
                            {"max_bps", aeskr_to_json(row.max_bin)},
                            {"min_bps", aeskr_to_json(row.min_bin)}});
    }
    j["rows"] = std::move(rows);
    return j;
}

std::string series_csv(const SelectorSummary& row) {
    std::ostringstream out;
    out << "bin_start_s,aeskr_bps\n";
    for (const auto& [start, value] : row.series)
        out << format_double(start) << ',' << format_aeskr(value) << '\n';
    return out.str();
}

std::string stability_table(const StabilitySummary& summary) {
    std::ostringstream out;
    size_t width = 12;
    for (const SelectorSummary& row : summary.rows)
        width = std::max(width, human_selector(row.selector).size());
    auto pad = [&](const std::string& s, size_t w) {
        std::string p = s;
        while (p.size() < w) p += ' ';
        return p;
    };
    out << pad("row", width + 2) << pad("AE-SKR", 12) << pad("max", 12) << "min\n";
    for (const SelectorSummary& row : summary.rows) {
        out << pad(human_selector(row.selector), width + 2) << pad(sig4(row.full_period), 12)
            << pad(sig4(row.max_bin), 12) << sig4(row.min_bin) << '\n';
    }
    if (summary.failure_time_s) {
        out << "network failure at " << fixed(*summary.failure_time_s / 86400.0, 3) << " days ("
            << format_double(*summary.failure_time_s) << " s)\n";
    } else {
        out << "no network failure detected\n";
    }
    out << "bins summarized: " << summary.bins_summarized << " x "
        << format_double(summary.bin_width_s) << " s\n";
    return out.str();
}

}  // namespace qnet
