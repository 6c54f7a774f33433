#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string err;
};

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("uscqed_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Run run_cli(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(USCQED_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, UnknownKeyRejectedWithPath) {
    auto dir = scratch("unknown");
    auto cfg = write_config(dir, R"({"model": {"N": 2, "lamda2": 0.8}})");
    auto r = run_cli("potentials " + cfg.string() + " --out " + (dir / "out").string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("model.lamda2"), std::string::npos) << r.err;
}

TEST(Cli, WrongTypeRejectedWithPath) {
    auto dir = scratch("type");
    auto cfg = write_config(dir, R"({"model": {"N": 2.5}})");
    auto r = run_cli("potentials " + cfg.string() + " --out " + (dir / "out").string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("model.N"), std::string::npos) << r.err;
}

TEST(Cli, MalformedJsonIsAnError) {
    auto dir = scratch("malformed");
    auto cfg = write_config(dir, R"({"model": )");
    EXPECT_EQ(run_cli("potentials " + cfg.string(), dir).code, 1);
}

TEST(Cli, UnknownSubcommandIsAnError) {
    auto dir = scratch("subcommand");
    EXPECT_NE(run_cli("plot", dir).code, 0);
}

TEST(Cli, PotentialsDeterministicWithMetadata) {
    auto dir = scratch("potentials");
    auto cfg = write_config(dir, R"({"model": {"N": 2, "epsilon": 0.0, "lambda2": 0.8}, "grid": {"x_max": 3.0, "points": 301}})");
    ASSERT_EQ(run_cli("potentials " + cfg.string() + " --out " + (dir / "a").string(), dir).code, 0);
    ASSERT_EQ(run_cli("potentials " + cfg.string() + " --out " + (dir / "b").string(), dir).code, 0);
    const std::string a = slurp(dir / "a" / "potentials.csv"), b = slurp(dir / "b" / "potentials.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, 2), "X,");
    auto meta = nlohmann::json::parse(slurp(dir / "a" / "metadata.json"));
    EXPECT_EQ(meta["experiment"], "potentials");
    EXPECT_DOUBLE_EQ(meta["config"]["model"]["lambda2"].get<double>(), 0.8);
    EXPECT_DOUBLE_EQ(meta["config"]["spectrum"]["gamma"].get<double>(), 0.005);
    EXPECT_NEAR(meta["derived"]["lambda_c"].get<double>(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(meta["derived"]["lambda"].get<double>(), std::sqrt(0.8), 1e-15);
    EXPECT_DOUBLE_EQ(meta["derived"]["mu"].get<double>(), 1e4);
}

TEST(Cli, ExperimentMismatchRejected) {
    auto dir = scratch("mismatch");
    auto cfg = write_config(dir, R"({"experiment": "ramsey"})");
    auto r = run_cli("potentials " + cfg.string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("experiment"), std::string::npos);
}

TEST(Cli, CircuitBenchmarksJson) {
    auto dir = scratch("circuit");
    auto cfg = write_config(dir, "{}");
    ASSERT_EQ(run_cli("circuit " + cfg.string() + " --out " + (dir / "out").string(), dir).code, 0);
    auto j = nlohmann::json::parse(slurp(dir / "out" / "circuit.json"));
    const auto& b = j["benchmarks"];
    for (const char* k : {"omega_q_GHz", "omega_minus_MHz", "mu", "g_phi_minus_over_omega_minus", "g_Q_minus_over_omega_minus"}) {
        ASSERT_TRUE(b.contains(k)) << k;
        EXPECT_NEAR(b[k]["deviation"].get<double>(), b[k]["value"].get<double>() / b[k]["reference"].get<double>() - 1.0, 1e-12);
    }
    EXPECT_NEAR(b["omega_minus_MHz"]["value"].get<double>(), 49.756, 0.01);
}

TEST(Cli, SweepWritesAggregate) {
    auto dir = scratch("sweep");
    auto cfg = write_config(dir, R"({"experiment": "potentials", "model": {"N": 3, "epsilon": 0.02},
        "grid": {"x_max": 4.0, "points": 801},
        "sweep": {"key": "model.lambda2", "values": [0.5, 1.5, 2.5]}})");
    ASSERT_EQ(run_cli("sweep " + cfg.string() + " --out " + (dir / "out").string(), dir).code, 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "point_000" / "potentials.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "point_002" / "metadata.json"));
    std::ifstream in(dir / "out" / "aggregate.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line);
    EXPECT_NE(line.find("model.lambda2"), std::string::npos);
    EXPECT_NE(line.find("x_min_ground"), std::string::npos);
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(Cli, SweepRequiresValues) {
    auto dir = scratch("sweep_empty");
    auto cfg = write_config(dir, R"({"experiment": "potentials", "sweep": {"key": "model.lambda2", "values": []}})");
    auto r = run_cli("sweep " + cfg.string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("sweep.values"), std::string::npos);
}

TEST(Cli, SweepRejectsNonNumericKey) {
    auto dir = scratch("sweep_key");
    auto cfg = write_config(dir, R"({"experiment": "potentials", "sweep": {"key": "spectrum.method", "values": [1]}})");
    EXPECT_EQ(run_cli("sweep " + cfg.string(), dir).code, 1);
}

TEST(Cli, ValidateExitCodes) {
    auto dir = scratch("validate");
    auto ok = write_config(dir, R"({"validate": {"criteria": [1, 3]}})");
    EXPECT_EQ(run_cli("validate " + ok.string() + " --out " + (dir / "out").string(), dir).code, 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "validation.csv"));
    auto bad = write_config(dir, R"({"validate": {"criteria": [99]}})");
    EXPECT_EQ(run_cli("validate " + bad.string() + " --out " + (dir / "out2").string(), dir).code, 1);
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
    auto dir = scratch("workers");
    auto cfg = write_config(dir, R"({"model": {"N": 2, "lambda2": 1.2}, "grid": {"x_max": 4.0, "points": 401}})");
    ASSERT_EQ(run_cli("potentials " + cfg.string() + " --out " + (dir / "a").string(), dir).code, 0);
    setenv("USCQED_WORKERS", "3", 1);
    ASSERT_EQ(run_cli("potentials " + cfg.string() + " --out " + (dir / "b").string(), dir).code, 0);
    unsetenv("USCQED_WORKERS");
    EXPECT_EQ(slurp(dir / "a" / "potentials.csv"), slurp(dir / "b" / "potentials.csv"));
}
