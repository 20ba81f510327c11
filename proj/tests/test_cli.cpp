#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int exit_code{};
    std::string output;  // stdout and stderr interleaved
};

CommandResult run_command(const std::string& cmd) {
    std::string full = cmd + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = out;
    return result;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qnetplan-cli-" + std::to_string(::getpid()) + "-" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

const char* kFourUserConfig = R"({
    "users": [
        {"id": "ann", "attachment": "deployed", "bounce_back_loss_db": 1.45},
        {"id": "ben", "attachment": "deployed", "bounce_back_loss_db": 1.8},
        {"id": "cal"},
        {"id": "dee"}
    ]
})";

std::string bin() { return std::string(QNETPLAN_BIN); }

nlohmann::json parse_json_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("plan writes the assignment and verification files") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    auto r = run_command(bin() + " plan -c " + (tmp.path / "net.json").string() + " -o " +
                         tmp.path.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("links covered: 6/6") != std::string::npos);
    CHECK(fs::exists(tmp.path / "assignment.json"));
    CHECK(fs::exists(tmp.path / "verification.json"));
    auto verification = parse_json_file(tmp.path / "verification.json");
    CHECK(verification["pass"] == true);
    CHECK(verification["total_links"] == 6);
    CHECK(verification["stats"]["max_channels_per_user"].get<int>() <= 2);
}

TEST_CASE("an impossible plan exits with the infeasible code") {
    TempDir tmp;
    // ITU 33..35 leaves only conjugate pair 1: one unsplit pair for six links.
    write_file(tmp.path / "net.json", R"({
        "grid": {"min_itu": 33, "max_itu": 35},
        "users": [{"id": "ann"}, {"id": "ben"}, {"id": "cal"}, {"id": "dee"}]
    })");
    auto r = run_command(bin() + " plan -c " + (tmp.path / "net.json").string() + " -o " +
                         tmp.path.string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("MISSING LINKS") != std::string::npos);
    CHECK(fs::exists(tmp.path / "assignment.json"));  // best effort is still written
}

TEST_CASE("simulate rates a planned mesh and scores the network") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    auto plan = run_command(bin() + " plan -c " + (tmp.path / "net.json").string() + " -o " +
                            tmp.path.string());
    REQUIRE(plan.exit_code == 0);

    auto r = run_command(bin() + " simulate -c " + (tmp.path / "net.json").string() + " -a " +
                         (tmp.path / "assignment.json").string() + " -o " + tmp.path.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("network AE-SKR") != std::string::npos);
    REQUIRE(fs::exists(tmp.path / "rates.csv"));
    REQUIRE(fs::exists(tmp.path / "score.json"));

    std::ifstream rates(tmp.path / "rates.csv");
    std::string header;
    std::getline(rates, header);
    CHECK(header ==
          "link,pair_ks,singles_a,singles_b,true_coincidences,accidentals,qber,sifted_bps,skr_bps");
    int rows = 0;
    for (std::string line; std::getline(rates, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 6);

    auto score = parse_json_file(tmp.path / "score.json");
    REQUIRE(score["selectors"].size() == 8);  // 4 users + 3 scenarios + all
    CHECK(score["selectors"].back()["selector"] == "all");
    CHECK(score["selectors"].back()["links_counted"] == 6);
    CHECK(score["links"].size() == 6);
}

TEST_CASE("simulate refuses an assignment that no longer covers the mesh") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    auto plan = run_command(bin() + " plan -c " + (tmp.path / "net.json").string() + " -o " +
                            tmp.path.string());
    REQUIRE(plan.exit_code == 0);

    // Drop one grant from the assignment file.
    auto doc = parse_json_file(tmp.path / "assignment.json");
    REQUIRE(doc["grants"].size() >= 2);
    doc["grants"].erase(doc["grants"].size() - 1);
    write_file(tmp.path / "partial.json", doc.dump(2));

    auto r = run_command(bin() + " simulate -c " + (tmp.path / "net.json").string() + " -a " +
                         (tmp.path / "partial.json").string() + " -o " + tmp.path.string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("re-run plan") != std::string::npos);
}

TEST_CASE("score reads plain rate lists and link,rate rows") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    write_file(tmp.path / "rates.txt", "# a comment\n5.0\n5.0\n\n5.0 # trailing note\n");
    auto r = run_command(bin() + " score -c " + (tmp.path / "net.json").string() + " -i " +
                         (tmp.path / "rates.txt").string());
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.output);
    CHECK(j["aeskr_bps"] == 5.0);
    CHECK(j["network_score"] == 0.875);
    CHECK(j["links"].size() == 3);
    CHECK(j["links"][0]["link"] == "link1");

    write_file(tmp.path / "named.txt", "ann-ben,2.0\nann-cal,2.0\n");
    auto named = run_command(bin() + " score -c " + (tmp.path / "net.json").string() + " -i " +
                             (tmp.path / "named.txt").string());
    CHECK(named.exit_code == 0);
    auto nj = nlohmann::json::parse(named.output);
    CHECK(nj["links"][0]["link"] == "ann-ben");
}

TEST_CASE("a failed network exits 4 unless the config demotes it") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    write_file(tmp.path / "rates.txt", "5.0\n0.096\n");
    auto r = run_command(bin() + " score -c " + (tmp.path / "net.json").string() + " -i " +
                         (tmp.path / "rates.txt").string());
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("FAILED") != std::string::npos);

    std::string report_only = std::string(kFourUserConfig);
    report_only.insert(report_only.rfind('}'), R"(, "report_only": true)");
    write_file(tmp.path / "report.json", report_only);
    auto demoted = run_command(bin() + " score -c " + (tmp.path / "report.json").string() +
                               " -i " + (tmp.path / "rates.txt").string());
    CHECK(demoted.exit_code == 0);
    CHECK(demoted.output.find("FAILED") != std::string::npos);
}

TEST_CASE("sweep writes the grid results and the chosen operating point") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    auto plan = run_command(bin() + " plan -c " + (tmp.path / "net.json").string() + " -o " +
                            tmp.path.string());
    REQUIRE(plan.exit_code == 0);

    auto r = run_command(bin() + " sweep -c " + (tmp.path / "net.json").string() + " -a " +
                         (tmp.path / "assignment.json").string() + " -o " + tmp.path.string() +
                         " --grid-min 1e5 --grid-max 1e7 --grid-points 6");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("operating point") != std::string::npos);
    REQUIRE(fs::exists(tmp.path / "sweep.csv"));
    REQUIRE(fs::exists(tmp.path / "operating_point.json"));

    std::ifstream csv(tmp.path / "sweep.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "reference_singles,mean_skr,min_skr,aeskr");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 11);  // two decades at 6 points per decade

    auto op = parse_json_file(tmp.path / "operating_point.json");
    CHECK(op.contains("reference_singles"));
    CHECK(op.contains("aeskr_bps"));
}

TEST_CASE("a sweep with no viable point exits 3") {
    TempDir tmp;
    // 300 dB of receiver loss kills every link at any pump power.
    std::string config = R"({
        "users": [{"id": "ann"}, {"id": "ben"}],
        "receivers": {"default": {"internal_loss_db": 300.0}}
    })";
    write_file(tmp.path / "net.json", config);
    auto plan = run_command(bin() + " plan -c " + (tmp.path / "net.json").string() + " -o " +
                            tmp.path.string());
    REQUIRE(plan.exit_code == 0);
    auto r = run_command(bin() + " sweep -c " + (tmp.path / "net.json").string() + " -a " +
                         (tmp.path / "assignment.json").string() + " -o " + tmp.path.string() +
                         " --grid-min 1e4 --grid-max 1e6 --grid-points 4");
    CHECK(r.exit_code == 3);
    CHECK(fs::exists(tmp.path / "sweep.csv"));  // the grid is still reported
    CHECK_FALSE(fs::exists(tmp.path / "operating_point.json"));
}

TEST_CASE("stability summarizes a jsonl trace into files and a table") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    std::string trace;
    const char* links[] = {"ann-ben", "ann-cal", "ann-dee", "ben-cal", "ben-dee", "cal-dee"};
    for (int b = 0; b < 3; ++b)
        for (const char* link : links)
            trace += "{\"timestamp\": " + std::to_string(b * 600 + 300) + ", \"link\": \"" +
                     link + "\", \"skr_bps\": 5.0}\n";
    write_file(tmp.path / "trace.jsonl", trace);

    auto r = run_command(bin() + " stability -c " + (tmp.path / "net.json").string() + " -t " +
                         (tmp.path / "trace.jsonl").string() + " -o " + tmp.path.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("ingested 18 samples") != std::string::npos);
    CHECK(r.output.find("Full Network") != std::string::npos);
    CHECK(r.output.find("no network failure detected") != std::string::npos);
    CHECK(r.output.find("bins summarized: 3 x 600 s") != std::string::npos);

    REQUIRE(fs::exists(tmp.path / "summary.json"));
    auto summary = parse_json_file(tmp.path / "summary.json");
    CHECK(summary["rows"].size() == 8);  // 4 users + 3 scenarios + all
    CHECK(summary["failure_time_s"].is_null());
    for (const auto& row : summary["rows"]) CHECK(row["aeskr_bps"] == 5.0);

    CHECK(fs::exists(tmp.path / "series_all.csv"));
    CHECK(fs::exists(tmp.path / "series_user_ann.csv"));
    CHECK(fs::exists(tmp.path / "series_scenario_D-D.csv"));
}

TEST_CASE("stability reads csv traces, masks and the aggregation override") {
    TempDir tmp;
    write_file(tmp.path / "net.json", R"({
        "users": [{"id": "ann"}, {"id": "ben"}]
    })");
    std::string trace = "timestamp,link,skr_bps\n";
    for (int b = 0; b < 4; ++b)
        trace += std::to_string(b * 600 + 300) + ",ann-ben," + (b == 2 ? "0.05" : "4.0") + "\n";
    write_file(tmp.path / "trace.csv", trace);

    SUBCASE("the failure bin shows up in the table in days") {
        auto r = run_command(bin() + " stability -c " + (tmp.path / "net.json").string() +
                             " -t " + (tmp.path / "trace.csv").string() + " -o " +
                             tmp.path.string());
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("network failure at 0.014 days (1200 s)") != std::string::npos);
    }

    SUBCASE("masking the dip removes the failure") {
        write_file(tmp.path / "mask.csv", "start_s,end_s,reason\n1200,1800,cryo cycle\n");
        auto r = run_command(bin() + " stability -c " + (tmp.path / "net.json").string() +
                             " -t " + (tmp.path / "trace.csv").string() + " -m " +
                             (tmp.path / "mask.csv").string() + " -o " + tmp.path.string());
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("no network failure detected") != std::string::npos);
        CHECK(r.output.find("bins summarized: 3 x 600 s") != std::string::npos);
    }

    SUBCASE("the aggregation flag overrides the config") {
        auto r = run_command(bin() + " stability -c " + (tmp.path / "net.json").string() +
                             " -t " + (tmp.path / "trace.csv").string() + " -o " +
                             tmp.path.string() + " --aggregation bin-mean");
        CHECK(r.exit_code == 0);
        auto summary = parse_json_file(tmp.path / "summary.json");
        CHECK(summary["aggregation"] == "bin-mean");

        auto bad = run_command(bin() + " stability -c " + (tmp.path / "net.json").string() +
                               " -t " + (tmp.path / "trace.csv").string() + " -o " +
                               tmp.path.string() + " --aggregation median");
        CHECK(bad.exit_code == 1);
    }
}

TEST_CASE("usage errors exit 1 and help exits 0") {
    TempDir tmp;
    auto nothing = run_command(bin());
    CHECK(nothing.exit_code == 1);
    auto unknown = run_command(bin() + " frobnicate");
    CHECK(unknown.exit_code == 1);
    auto no_config = run_command(bin() + " plan");
    CHECK(no_config.exit_code == 1);
    auto missing_file = run_command(bin() + " plan -c " + (tmp.path / "nope.json").string());
    CHECK(missing_file.exit_code == 1);
    CHECK(missing_file.output.find("error:") != std::string::npos);
    auto help = run_command(bin() + " --help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("plan") != std::string::npos);
}

TEST_CASE("the config path can come from the environment") {
    TempDir tmp;
    write_file(tmp.path / "net.json", kFourUserConfig);
    write_file(tmp.path / "rates.txt", "5.0\n");
    auto r = run_command("QNETPLAN_CONFIG=" + (tmp.path / "net.json").string() + " " + bin() +
                         " score -i " + (tmp.path / "rates.txt").string());
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.output);
    CHECK(j["aeskr_bps"] == 5.0);
}
