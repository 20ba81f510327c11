// qnetplan: plan DWDM channel assignments for a fully meshed entanglement
// network, simulate per-link key rates, score the network, sweep the pump
// power, and analyze stability logs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qnet/config.hpp"
#include "qnet/report.hpp"
#include "qnet/solver.hpp"
#include "qnet/stability.hpp"
#include "qnet/sweep.hpp"

namespace {

// exit codes shared by all subcommands
constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kInfeasiblePlan = 2;
constexpr int kNoViablePoint = 3;
constexpr int kFailedNetwork = 4;

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir{"."};
    std::string format{"csv"};
};

void add_config_option(CLI::App& cmd, CommonArgs& args) {
    const char* env = std::getenv("QNETPLAN_CONFIG");
    auto* opt = cmd.add_option("--config,-c", args.config_path, "network config JSON");
    if (env && *env)
        opt->default_val(std::string(env));
    else
        opt->required();
}

void add_out_dir_option(CLI::App& cmd, CommonArgs& args) {
    cmd.add_option("--out-dir,-o", args.out_dir, "directory for output files")
        ->capture_default_str();
}

std::string dump(const qnet::Json& j) { return j.dump(2) + "\n"; }

void report_ingest(const qnet::IngestResult& ingest) {
    std::cerr << "ingested " << ingest.accepted << " samples";
    if (ingest.rejected) {
        std::cerr << ", rejected " << ingest.rejected;
        for (const std::string& e : ingest.errors) std::cerr << "\n  " << e;
    }
    std::cerr << "\n";
}

int run_plan(const CommonArgs& args, std::uint64_t seed) {
    qnet::NetworkConfig cfg = qnet::load_config(args.config_path);
    qnet::SolveOptions options;
    options.seed = seed;
    qnet::SolveResult result = qnet::solve_assignment(
        cfg.users, cfg.grid.conjugate_pairs(), cfg.excluded_lcs, cfg.grid, options);
    qnet::MeshReport mesh = qnet::verify_full_mesh(result.assignment, cfg.users);

    qnet::write_text_file(fs::path(args.out_dir) / "assignment.json",
                          dump(qnet::assignment_to_json(result.assignment)));
    qnet::write_text_file(fs::path(args.out_dir) / "verification.json",
                          dump(qnet::mesh_report_to_json(mesh, &result.stats)));

    std::cout << qnet::assignment_table(result.assignment);
    std::cout << "links covered: " << mesh.covered_links << "/" << mesh.total_links
              << ", conjugate pairs used: " << result.stats.pairs_used << " ("
              << result.stats.split_pairs_used
              << " split), max channels per user: " << result.stats.max_channels_per_user << "\n";
    if (!mesh.pass) {
        std::cout << "MISSING LINKS:\n";
        for (const qnet::UserPair& p : mesh.missing) std::cout << "  " << p.id() << "\n";
        return kInfeasiblePlan;
    }
    return kOk;
}

int run_simulate(const CommonArgs& args, const std::string& assignment_path) {
    qnet::NetworkConfig cfg = qnet::load_config(args.config_path);
    qnet::ChannelAssignment assignment = qnet::load_assignment(assignment_path);
    qnet::MeshReport mesh = qnet::verify_full_mesh(assignment, cfg.users);
    if (!mesh.pass) {
        std::cerr << "assignment does not cover the full mesh (" << mesh.covered_links << "/"
                  << mesh.total_links << "); re-run plan\n";
        return kInfeasiblePlan;
    }
    auto rated = qnet::rate_links(cfg.users, assignment, cfg.source(), cfg.models());
    qnet::write_text_file(fs::path(args.out_dir) / "rates.csv", qnet::rates_csv(rated));
    qnet::Json score = qnet::network_score_json(rated, cfg.users, cfg.score);
    qnet::write_text_file(fs::path(args.out_dir) / "score.json", dump(score));

    const auto& full = score["selectors"].back();  // the "all" row
    std::cout << "links: " << rated.size() << ", network AE-SKR: ";
    if (full["aeskr_bps"].is_string())
        std::cout << "FAILED\n";
    else
        std::cout << qnet::format_double(full["aeskr_bps"].get<double>()) << " bits/s\n";
    if (full["aeskr_bps"].is_string()) return cfg.report_only ? kOk : kFailedNetwork;
    return kOk;
}

int run_score(const CommonArgs& args, const std::string& input_path) {
    // Input: one SKR per line, or "link_id,skr" rows; '#' starts a comment.
    qnet::NetworkConfig cfg = qnet::load_config(args.config_path);
    std::ifstream in(input_path);
    if (!in) throw std::runtime_error("cannot open SKR list: " + input_path);
    std::vector<std::pair<std::string, double>> links;
    std::string line;
    size_t n = 0;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        ++n;
        auto comma = line.find(',');
        std::string id = comma == std::string::npos ? "link" + std::to_string(n)
                                                    : line.substr(0, comma);
        std::string value = comma == std::string::npos ? line : line.substr(comma + 1);
        links.emplace_back(id, std::stod(value));
    }
    qnet::ScoreReport report = qnet::score_links(links, cfg.score);
    std::cout << dump(qnet::score_report_to_json(report));
    if (report.aeskr.is_failed()) return cfg.report_only ? kOk : kFailedNetwork;
    return kOk;
}

int run_sweep(const CommonArgs& args, const std::string& assignment_path,
              std::optional<double> grid_min, std::optional<double> grid_max,
              std::optional<int> grid_points) {
    qnet::NetworkConfig cfg = qnet::load_config(args.config_path);
    qnet::ChannelAssignment assignment = qnet::load_assignment(assignment_path);
    double lo = grid_min.value_or(cfg.sweep.min_reference_singles);
    double hi = grid_max.value_or(cfg.sweep.max_reference_singles);
    int per_decade = grid_points.value_or(cfg.sweep.points_per_decade);
    auto grid = qnet::make_log_grid(lo, hi, per_decade);
    auto points = qnet::run_sweep(cfg.users, assignment, cfg.models(), grid);
    qnet::write_text_file(fs::path(args.out_dir) / "sweep.csv", qnet::sweep_csv(points));
    try {
        const qnet::SweepPoint& best = qnet::select_operating_point(points);
        qnet::write_text_file(fs::path(args.out_dir) / "operating_point.json",
                              dump(qnet::sweep_point_to_json(best)));
        std::cout << "operating point: reference singles "
                  << qnet::format_double(best.reference_singles) << " counts/s, AE-SKR "
                  << qnet::format_aeskr(best.aeskr) << " bits/s over " << points.size()
                  << " grid points\n";
    } catch (const std::domain_error& e) {
        std::cerr << e.what() << "\n";
        return kNoViablePoint;
    }
    return kOk;
}

int run_stability(const CommonArgs& args, const std::string& trace_path,
                  const std::string& mask_path, std::optional<double> bin_width,
                  const std::string& trace_format, const std::string& aggregation) {
    qnet::NetworkConfig cfg = qnet::load_config(args.config_path);
    double width = bin_width.value_or(cfg.stability.bin_width_s);

    std::string format = trace_format;
    if (format == "auto")
        format = trace_path.size() >= 6 && trace_path.substr(trace_path.size() - 6) == ".jsonl"
                     ? "jsonl"
                     : "csv";
    std::ifstream in(trace_path);
    if (!in) throw std::runtime_error("cannot open trace: " + trace_path);
    qnet::IngestResult ingest =
        format == "jsonl" ? qnet::ingest_jsonl(in, width) : qnet::ingest_csv(in, width);
    report_ingest(ingest);

    if (!mask_path.empty()) {
        std::ifstream mask_in(mask_path);
        if (!mask_in) throw std::runtime_error("cannot open mask file: " + mask_path);
        for (qnet::MaskInterval& m : qnet::parse_masks(mask_in))
            ingest.trace.add_mask(std::move(m));
    }

    qnet::FullPeriodAggregation agg = cfg.stability.aggregation;
    if (aggregation == "scoring-of-means") agg = qnet::FullPeriodAggregation::scoring_of_means;
    else if (aggregation == "bin-mean") agg = qnet::FullPeriodAggregation::mean_of_bin_scores;
    else if (aggregation != "config")
        throw std::invalid_argument("--aggregation must be scoring-of-means, bin-mean or config");

    qnet::StabilitySummary summary = qnet::summarize(ingest.trace, cfg.users, cfg.score, agg,
                                                     cfg.score.fail_threshold());
    qnet::write_text_file(fs::path(args.out_dir) / "summary.json",
                          dump(qnet::stability_summary_to_json(summary)));
    for (const qnet::SelectorSummary& row : summary.rows) {
        std::string name = row.selector;
        for (char& c : name)
            if (c == ':' || c == '/' || c == ' ') c = '_';
        qnet::write_text_file(fs::path(args.out_dir) / ("series_" + name + ".csv"),
                              qnet::series_csv(row));
    }
    std::cout << qnet::stability_table(summary);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavelength-multiplexed entanglement network planner and analyzer"};
    app.require_subcommand(1);

    CommonArgs plan_args, sim_args, score_args, sweep_args, stab_args;
    std::uint64_t seed = 0;
    std::string sim_assignment, sweep_assignment, score_input;
    std::string trace_path, mask_path, trace_format{"auto"}, aggregation{"config"};
    std::optional<double> grid_min, grid_max, bin_width;
    std::optional<int> grid_points;

    CLI::App* plan = app.add_subcommand("plan", "compute a full-mesh channel assignment");
    add_config_option(*plan, plan_args);
    add_out_dir_option(*plan, plan_args);
    plan->add_option("--seed", seed, "solver exploration seed")->capture_default_str();

    CLI::App* simulate = app.add_subcommand("simulate", "per-link rates and network score");
    add_config_option(*simulate, sim_args);
    add_out_dir_option(*simulate, sim_args);
    simulate->add_option("--assignment,-a", sim_assignment, "assignment JSON from plan")
        ->required();

    CLI::App* score = app.add_subcommand("score", "score a list of link SKRs");
    add_config_option(*score, score_args);
    score->add_option("--input,-i", score_input, "SKR list (one rate or link,rate per line)")
        ->required();

    CLI::App* sweep = app.add_subcommand("sweep", "sweep pump power and pick an operating point");
    add_config_option(*sweep, sweep_args);
    add_out_dir_option(*sweep, sweep_args);
    sweep->add_option("--assignment,-a", sweep_assignment, "assignment JSON from plan")->required();
    sweep->add_option("--grid-min", grid_min, "lowest reference singles rate, counts/s");
    sweep->add_option("--grid-max", grid_max, "highest reference singles rate, counts/s");
    sweep->add_option("--grid-points", grid_points, "grid points per decade");

    CLI::App* stability = app.add_subcommand("stability", "analyze a per-link SKR log");
    add_config_option(*stability, stab_args);
    add_out_dir_option(*stability, stab_args);
    stability->add_option("--trace,-t", trace_path, "SKR log (.jsonl or .csv)")->required();
    stability->add_option("--mask,-m", mask_path, "downtime intervals (JSON or CSV)");
    stability->add_option("--bin-width", bin_width, "bin width in seconds");
    stability->add_option("--trace-format", trace_format, "jsonl, csv or auto")
        ->capture_default_str();
    stability->add_option("--aggregation", aggregation,
                          "scoring-of-means, bin-mean, or config (use the config's choice)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*plan) return run_plan(plan_args, seed);
        if (*simulate) return run_simulate(sim_args, sim_assignment);
        if (*score) return run_score(score_args, score_input);
        if (*sweep) return run_sweep(sweep_args, sweep_assignment, grid_min, grid_max, grid_points);
        if (*stability)
            return run_stability(stab_args, trace_path, mask_path, bin_width, trace_format,
                                 aggregation);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}
