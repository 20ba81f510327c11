#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnet/scoring.hpp"
#include "qnet/solver.hpp"
#include "qnet/stability.hpp"
#include "qnet/sweep.hpp"
#include "qnet/topology.hpp"

namespace qnet {

/// Key order is preserved so identical inputs serialize to identical bytes.
using Json = nlohmann::ordered_json;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// The numeric rate, or the literal FAILED.
std::string format_aeskr(const Aeskr& value);
Json aeskr_to_json(const Aeskr& value);  // number or "FAILED"

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: parent dirs created, content
/// replaced wholesale.
void write_text_file(const std::filesystem::path& path, const std::string& content);

Json grid_to_json(const GridConfig& grid);
GridConfig grid_from_json(const nlohmann::json& j);

/// Assignment files carry their grid so they are self-contained.
Json assignment_to_json(const ChannelAssignment& assignment);
ChannelAssignment assignment_from_json(const nlohmann::json& j);
ChannelAssignment load_assignment(const std::filesystem::path& path);

Json mesh_report_to_json(const MeshReport& mesh, const SolveStats* stats = nullptr);
/// Channel-by-channel table of who gets which copy.
std::string assignment_table(const ChannelAssignment& assignment);

std::string rates_csv(const std::vector<RatedLink>& links);
Json score_report_to_json(const ScoreReport& report);
/// Full scoring breakdown: every standard selector's row plus per-link scores.
Json network_score_json(const std::vector<RatedLink>& links, const UserDirectory& users,
                        const ScoreFunction& score);

std::string sweep_csv(const std::vector<SweepPoint>& points);
Json sweep_point_to_json(const SweepPoint& point);

Json stability_summary_to_json(const StabilitySummary& summary);
std::string series_csv(const SelectorSummary& row);
/// Table-style human summary, one row per selector.
std::string stability_table(const StabilitySummary& summary);

}  // namespace qnet
