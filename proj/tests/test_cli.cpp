#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    static fs::path root()
    {
        static const fs::path dir = fs::temp_directory_path() / ("projlab-cli-" + std::to_string(::getpid()));
        return dir;
    }

    static void TearDownTestSuite() { fs::remove_all(root()); }

    fs::path out(const std::string& name) const
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        return root() / info->name() / name;
    }

    static int run(const std::string& args, const fs::path& dir)
    {
        const std::string cmd =
            "\"" PROJLAB_CLI_PATH "\" " + args + " --out \"" + dir.string() + "\" > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static json read_json(const fs::path& p)
    {
        std::ifstream in(p);
        return json::parse(in);
    }

    static std::vector<std::vector<std::string>> read_csv(const fs::path& p)
    {
        // Enough of RFC 4180 for our own writer.
        std::ifstream in(p);
        std::vector<std::vector<std::string>> rows;
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> row(1);
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                const char c = line[i];
                if (quoted) {
                    if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                        row.back() += '"', ++i;
                    else if (c == '"')
                        quoted = false;
                    else
                        row.back() += c;
                } else if (c == '"')
                    quoted = true;
                else if (c == ',')
                    row.emplace_back();
                else
                    row.back() += c;
            }
            rows.push_back(row);
        }
        return rows;
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

TEST_F(Cli, MalformedGeneratorIsConfigError)
{
    EXPECT_EQ(run("scan --family mobius --gen 1,2,3", out("a")), 2);
    EXPECT_EQ(run("scan --family projective --gen 1,x", out("b")), 2);
    EXPECT_EQ(run("scan --family mobius --gen no-such-preset", out("c")), 2);
}

TEST_F(Cli, UnknownConfigKeyIsRejected)
{
    const fs::path dir = out("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"gen": "o2", "bogus": 1})";
    EXPECT_EQ(run("scan --config \"" + (dir / "bad.json").string() + "\"", out("bad")), 2);

    std::ofstream(dir / "good.json") << R"({"gen": "o2", "grid": 10, "samples": 200, "seed": 5})";
    ASSERT_EQ(run("scan --config \"" + (dir / "good.json").string() + "\"", out("good")), 0);
    EXPECT_EQ(read_json(out("good") / "scan.json")["seed"], 5);
}

TEST_F(Cli, ExplicitFlagsOverrideConfig)
{
    const fs::path dir = out("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"gen": "o2", "grid": 10, "samples": 200, "seed": 5})";
    ASSERT_EQ(run("scan --config \"" + (dir / "c.json").string() + "\" --seed 8", out("o")), 0);
    EXPECT_EQ(read_json(out("o") / "scan.json")["seed"], 8);
}

TEST_F(Cli, ZeroGeneratorIsConfigError) { EXPECT_EQ(run("classify --gen 0,0,0,0,0,0,0,0", out("z")), 2); }

TEST_F(Cli, EmptyRegionIsConfigError) { EXPECT_EQ(run("scan --gen o2 --region 1,1,0,1", out("r")), 2); }

TEST_F(Cli, BadGrassmannDimensions) { EXPECT_EQ(run("scan --family klein --n 2 --m 3", out("k")), 2); }

TEST_F(Cli, CloudInSingularFibersEverywhereIsDomainError)
{
    // exp(pi/2 * A) sends the origin to infinity for A = [[0,1],[-1,0]].
    EXPECT_EQ(run("sweep --gen 0,0,1,0,-1,0,0,0 --preset point --samples 2000 "
                  "--params 1.5707963267948966,1.5707963267948966,1",
                  out("s")),
              3);
}

TEST_F(Cli, EllipticScanHasBandAtImaginaryAxis)
{
    const fs::path dir = out("e");
    ASSERT_EQ(run("scan --family mobius --gen \"0,0, 0,0.5, 0,0.5, 0,0\" --region -1,1,-1,1 --grid 40 --samples 500",
                  dir),
              0);
    const auto rows = read_csv(dir / "degenerate.csv");
    ASSERT_GT(rows.size(), 10u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "y", "min_derivative", "phi_at_min"}));
    const double step = 2.0 / 39.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 4u);
        EXPECT_LE(std::abs(std::stod(rows[i][0])), 2 * step) << "row " << i;
    }
    const json report = read_json(dir / "scan.json");
    EXPECT_EQ(report["degeneracy_scan"]["degenerate_count"].get<std::size_t>(), rows.size() - 1);
}

TEST_F(Cli, RotationScanHasNoDegeneratePoints)
{
    const fs::path dir = out("o");
    ASSERT_EQ(run("scan --family mobius --gen o2 --grid 30 --samples 500", dir), 0);
    const auto rows = read_csv(dir / "degenerate.csv");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0][0], "x");
    EXPECT_GT(read_json(dir / "scan.json")["constant_scan"]["best_constant"].get<double>(), 0.1);
}

TEST_F(Cli, ClassifyVerdicts)
{
    ASSERT_EQ(run("classify --family mobius --gen translation", out("t")), 0);
    EXPECT_EQ(read_json(out("t") / "classify.json")["verdict"], "FailsGlobally");

    ASSERT_EQ(run("classify --family projective --gen rotation", out("r")), 0);
    const json r = read_json(out("r") / "classify.json");
    EXPECT_EQ(r["verdict"], "FailsOnLine");
    EXPECT_EQ(r["line"], "infinity");

    ASSERT_EQ(run("classify --family projective --gen point-source-corrected", out("p")), 0);
    const json p = read_json(out("p") / "classify.json");
    EXPECT_EQ(p["verdict"], "HoldsWithArtifactLocus");
    EXPECT_EQ(p["line"], "y=1 (transported)");

    ASSERT_EQ(run("classify --family projective --gen point-source", out("q")), 0);
    EXPECT_EQ(read_json(out("q") / "classify.json")["locus"]["kind"], "WholeSpace");
}

TEST_F(Cli, LocusReportsLine)
{
    ASSERT_EQ(run("locus --family projective --gen point-source-corrected", out("l")), 0);
    const json l = read_json(out("l") / "locus.json");
    EXPECT_EQ(l["command"], "locus");
    EXPECT_EQ(l["line"], "y=1 (transported)");
}

TEST_F(Cli, SweepCsvMatchesJson)
{
    const fs::path dir = out("s");
    ASSERT_EQ(run("sweep --family mobius --gen translation --preset cantor9 --samples 20000 --params 0,1,5", dir), 0);
    const auto rows = read_csv(dir / "sweep.csv");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "slope", "r_squared", "excluded_count", "exceptional"}));
    const json j = read_json(dir / "sweep.json");
    ASSERT_EQ(j["entries"].size(), 5u);
    // Translations do not change the projection, so the column is constant.
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_DOUBLE_EQ(std::stod(rows[i][1]), j["entries"][i - 1]["fit"]["slope"].get<double>());
        EXPECT_EQ(rows[i][1], rows[1][1]);
    }
}

TEST_F(Cli, OrbitCsvColumns)
{
    const fs::path dir = out("orb");
    ASSERT_EQ(run("orbit --family projective --gen point-source-corrected --from \"infY;0,0\"", dir), 0);
    const auto rows = read_csv(dir / "orbit.csv");
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"curve", "id", "t", "x", "y"}));
    bool orbit = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 5u) << "row " << i;
        orbit = orbit || rows[i][0] == "orbit";
    }
    EXPECT_TRUE(orbit);
}

TEST_F(Cli, ExpCheckPasses)
{
    ASSERT_EQ(run("exp-check --samples 50 --seed 2", out("x")), 0);
    const json j = read_json(out("x") / "exp-check.json");
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_LT(j["max_error_sl2"].get<double>(), 1e-10);
    EXPECT_LT(j["max_error_gl3"].get<double>(), 1e-10);
}

TEST_F(Cli, RerunsAreByteIdentical)
{
    const std::string args = "scan --family projective --gen rotation --grid 20 --samples 500 --seed 3";
    ASSERT_EQ(run(args, out("a")), 0);
    ASSERT_EQ(run(args, out("b")), 0);
    EXPECT_EQ(slurp(out("a") / "scan.json"), slurp(out("b") / "scan.json"));
    EXPECT_EQ(slurp(out("a") / "degenerate.csv"), slurp(out("b") / "degenerate.csv"));
}

TEST_F(Cli, ThreadCapDoesNotChangeResults)
{
    const std::string args = "sweep --family grassmann --n 2 --m 1 --preset cantor9 --samples 20000 --params -1,1,5";
    ASSERT_EQ(run(args, out("a")), 0);
    const std::string capped = "PROJLAB_THREADS=1 \"" PROJLAB_CLI_PATH "\" " + args + " --out \"" + out("b").string()
                               + "\" > /dev/null 2>&1";
    ASSERT_EQ(std::system(capped.c_str()), 0);
    EXPECT_EQ(slurp(out("a") / "sweep.json"), slurp(out("b") / "sweep.json"));
}

} // namespace
