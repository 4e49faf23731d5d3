#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "volcheck_cli/config.hpp"
#include "volcheck_cli/run.hpp"

using namespace volcheck;
using namespace volcheck::cli;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempFile {
public:
    explicit TempFile(const std::string& text) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("volcheck_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".toml");
        std::ofstream(path_) << text;
    }
    ~TempFile() { std::filesystem::remove(path_); }
    std::string path() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST(Cli, CatalogList) {
    const auto r = invoke({"catalog", "list"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("flrw-crunch"), std::string::npos);
    EXPECT_NE(r.out.find("perturbed-lapse"), std::string::npos);
}

TEST(Cli, CrunchThm01Csv) {
    const auto r = invoke({"check", "thm01-future", "--catalog", "flrw-crunch", "--grid", "2", "--ladder", "0.5,0.9999"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "theorem,t1,T,epsilon0_or_gamma,reference_volume,cylinder_volume,bound,margin,verdict");
    const auto last = split_csv_row(rows[2]);
    ASSERT_EQ(last.size(), 9u);
    EXPECT_EQ(last[0], "thm01-future");
    EXPECT_NEAR(std::stod(last[3]), 2.0, 1e-12);
    EXPECT_NEAR(std::stod(last[7]), 1.0 / 6.0, 1e-9);
    EXPECT_EQ(last[8], "holds");
    EXPECT_NE(r.err.find("note:"), std::string::npos);
}

TEST(Cli, KvFormat) {
    const auto r = invoke({"check", "thm12", "--catalog", "flrw-crunch", "--grid", "2", "--ladder", "0.9999",
                           "--format", "kv"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("verdict=holds"), std::string::npos);
    EXPECT_NE(r.out.find("epsilon0_or_gamma=1\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("sharper_bound[0]="), std::string::npos);
}

TEST(Cli, ExitCodesFollowTheVerdict) {
    EXPECT_EQ(invoke({"check", "thm01-future", "--catalog", "minkowski-strip", "--grid", "2", "--ladder", "1,2"}).code,
              kExitHypothesisNotMet);
    TempFile bumped(R"(
t1 = 0.0
ladder = [0.5]
grid = 4
hypothesis_samples = 2
[metric]
n = 1
psi = "0"
sigma = ["((1-t)*(1 + 50*sin(2*pi*t)^2))^2"]
[window]
tplus = 1.0
)");
    const auto r = invoke({"check", "thm01-future", "--config", bumped.path()});
    EXPECT_EQ(r.code, kExitViolated) << r.err;
    EXPECT_NE(r.out.find("violated"), std::string::npos);
    // Flags override the file.
    EXPECT_EQ(invoke({"check", "thm01-future", "--config", bumped.path(), "--hypothesis-samples", "64"}).code,
              kExitHypothesisNotMet);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(invoke({"check", "thm99", "--catalog", "flrw-crunch"}).code, kExitError);
    EXPECT_EQ(invoke({}).code, kExitError);
    EXPECT_EQ(invoke({"--help"}).code, kExitOk);
    const auto unknown = invoke({"info", "--catalog", "nope"});
    EXPECT_EQ(unknown.code, kExitError);
    EXPECT_EQ(unknown.err.rfind("error: ", 0), 0u) << unknown.err;
    EXPECT_EQ(invoke({"info"}).code, kExitError);
    EXPECT_EQ(invoke({"check", "thm01-future", "--catalog", "flrw-crunch", "--ladder", "0.5,2"}).code, kExitError);
}

TEST(Cli, SliceVolumeCylinderCurvature) {
    auto slice = invoke({"slice-volume", "--catalog", "flrw-crunch", "--t", "0.5", "--grid", "2"});
    ASSERT_EQ(slice.code, kExitOk) << slice.err;
    auto row = split_csv_row(lines(slice.out).at(1));
    EXPECT_NEAR(std::stod(row[1]), 0.25, 1e-14);
    EXPECT_NEAR(std::stod(row[4]), 0.25, 1e-14);

    auto cyl = invoke({"cylinder", "--catalog", "perturbed-lapse", "--T", "0.9", "--grid", "32,4"});
    ASSERT_EQ(cyl.code, kExitOk) << cyl.err;
    row = split_csv_row(lines(cyl.out).at(1));
    EXPECT_NEAR(std::stod(row[2]), std::stod(row[4]), 1e-10);

    auto curv = invoke({"curvature", "--catalog", "perturbed-lapse", "--t", "0.3", "--grid", "16"});
    ASSERT_EQ(curv.code, kExitOk) << curv.err;
    row = split_csv_row(lines(curv.out).at(1));
    EXPECT_LT(std::stod(row[1]), std::stod(row[2]));
    EXPECT_LT(std::stod(row[3]), 1e-8);
}

TEST(Cli, SweepAndInfo) {
    auto sweep = invoke({"sweep", "--catalog", "minkowski-strip", "--times", "0,1,2", "--grid", "2"});
    ASSERT_EQ(sweep.code, kExitOk) << sweep.err;
    EXPECT_EQ(lines(sweep.out).size(), 4u);
    auto info = invoke({"info", "--catalog", "flrw-crunch", "--param", "q=0.5"});
    ASSERT_EQ(info.code, kExitOk) << info.err;
    EXPECT_NE(info.out.find("param.q=0.5"), std::string::npos);
    EXPECT_NE(info.out.find("window=-inf,1"), std::string::npos) << info.out;
}

TEST(Cli, BoxIsSnappedWithANote) {
    const auto r = invoke({"slice-volume", "--catalog", "minkowski-strip", "--grid", "10", "--box", "0.21:0.49,0:1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.err.find("note:"), std::string::npos);
    EXPECT_NEAR(std::stod(split_csv_row(lines(r.out).at(1))[1]), 0.3, 1e-14);
}

TEST(Cli, Remark2OnCrunch) {
    const auto r = invoke({"check", "remark2", "--catalog", "flrw-crunch", "--grid", "2", "--tau", "4", "--tau2", "8"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto row = split_csv_row(lines(r.out).at(1));
    EXPECT_NEAR(std::stod(row[7]), 0.0130208333, 1e-7);
}

TEST(Cli, RiemannianCusp) {
    const auto r = invoke({"check", "riemann-ii", "--catalog", "riemannian-cusp", "--grid", "2", "--ladder", "8"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NEAR(std::stod(split_csv_row(lines(r.out).at(1))[7]), 0.5 * std::exp(-16.0), 1e-9);
}

TEST(Config, ParsesEveryKey) {
    const auto c = parse_config(R"(
catalog = "perturbed-flrw"
grid = [16, 8]
panels = 10
t1 = 0.1
t = 0.2
T = 0.8
times = [0.1, 0.5]
tol = 1e-6
format = "kv"
hypothesis_samples = 12
finite_differences = true
[params]
q = 0.5
epsilon = 0.2
[window]
tplus = 0.95
[subset]
box = [[0.0, 0.5], [0.25, 0.75]]
[ladder]
endpoint = 0.9
count = 3
ratio = 0.5
[remark]
tau = 2.0
tau2 = 3.0
range = [0.0, 0.5]
samples = 100
)");
    EXPECT_EQ(*c.catalog, "perturbed-flrw");
    EXPECT_EQ(c.grid, (std::vector<int>{16, 8}));
    EXPECT_EQ(c.panels, 10);
    EXPECT_EQ(c.t1, 0.1);
    EXPECT_EQ(*c.T, 0.8);
    EXPECT_EQ(c.format, "kv");
    EXPECT_TRUE(c.finite_differences);
    EXPECT_EQ(std::get<double>(c.params.at("epsilon")), 0.2);
    EXPECT_EQ(*c.window_tplus, 0.95);
    ASSERT_TRUE(c.box.has_value());
    EXPECT_EQ(c.box->intervals[1].second, 0.75);
    EXPECT_EQ(*c.ladder.endpoint, 0.9);
    EXPECT_EQ(c.ladder.count, 3);
    EXPECT_EQ(c.tau2, 3.0);
    EXPECT_EQ(c.cmc_samples, 100);
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, ErrorsNameTheKey) {
    auto key_of = [](const std::string& text) {
        try {
            validate(parse_config(text));
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(key_of("catalog = \"flrw-crunch\"\nbogus = 1\n"), "bogus");
    EXPECT_EQ(key_of("catalog = \"flrw-crunch\"\npanels = \"ten\"\n"), "panels");
    EXPECT_EQ(key_of("catalog = \"flrw-crunch\"\nt1 = 2.0\n[window]\ntplus = 1.0\n"), "window");
    EXPECT_EQ(key_of("catalog = \"flrw-crunch\"\nformat = \"xml\"\n"), "format");
    EXPECT_EQ(key_of("[metric]\nsigma = [\"1\"]\n"), "metric.n");
    EXPECT_EQ(key_of("t1 = 0\n"), "catalog");
    EXPECT_THROW(parse_config("catalog = \n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/run.toml"), ConfigError);
}

TEST(Config, MetricWindowIntersection) {
    auto c = parse_config("catalog = \"flrw-crunch\"\nt1 = 1.5\n");
    EXPECT_THROW(build_metric(c), ConfigError);
    c = parse_config("catalog = \"flrw-crunch\"\n[window]\ntplus = 0.5\n");
    EXPECT_EQ(build_metric(c).metric.window().t_plus, 0.5);
}

TEST(Config, GeometricLadders) {
    auto c = parse_config("catalog = \"flrw-crunch\"\n[ladder]\ncount = 3\n");
    const auto m = build_metric(c).metric;
    const auto future = resolve_ladder(c, m, Direction::Future);
    ASSERT_EQ(future.size(), 3u);
    EXPECT_NEAR(future[0], 0.9, 1e-15);
    EXPECT_NEAR(future[1], 0.99, 1e-15);
    EXPECT_NEAR(future[2], 0.999, 1e-15);

    auto open = parse_config("catalog = \"minkowski-strip\"\n[ladder]\ncount = 4\n");
    const auto mink = build_metric(open).metric;
    EXPECT_EQ(resolve_ladder(open, mink, Direction::Future), (std::vector<double>{1.0, 2.0, 4.0, 8.0}));
    EXPECT_EQ(resolve_ladder(open, mink, Direction::Past), (std::vector<double>{-1.0, -2.0, -4.0, -8.0}));
}
