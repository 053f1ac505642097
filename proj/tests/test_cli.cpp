#include <spikevol/cli.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace spikevol;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "spikevol");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const auto d = fs::temp_directory_path() / ("spikevol-cli-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

} // namespace

TEST(Cli, SveRunWritesTables)
{
    const auto dir = scratch("sve");
    const auto r = run({"sve", "--seed", "1", "--n-steps", "64", "--paths", "50", "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const fs::path run_dir = first_line(r.out);
    EXPECT_TRUE(fs::exists(run_dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(run_dir / "path.csv"));
    EXPECT_NO_THROW(io::load(run_dir));
    fs::remove_all(dir);
}

TEST(Cli, ValidationErrorsExitOne)
{
    const auto dir = scratch("invalid");
    auto r = run({"sve", "--alpha", "1.2", "--seed", "1", "--out-dir", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("alpha must lie in (1/2,1)"), std::string::npos);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"nonsense"}).code, 1);
    EXPECT_EQ(run({"study", "--kind", "mean", "--out-dir", dir.string()}).code, 1);
    EXPECT_EQ(run({"sve", "--paths", "many", "--seed", "1", "--out-dir", dir.string()}).code, 1);
    fs::remove_all(dir);
}

TEST(Cli, VersionString)
{
    const auto r = run({"--version"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("spikevol 1.0.0"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile)
{
    const auto dir = scratch("config");
    {
        std::ofstream f(dir / "run.conf");
        f << "# comment\nn_steps = 32\npaths = 20\nseed = 5\n";
    }
    const auto a = run({"sve", "--config", (dir / "run.conf").string(), "--out-dir", dir.string()});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto ra = io::load(first_line(a.out));
    EXPECT_EQ(ra.config.at("n_steps"), "32");
    EXPECT_EQ(ra.seed, 5u);
    const auto b = run({"sve", "--config", (dir / "run.conf").string(), "--n-steps", "16", "--out-dir", dir.string()});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto rb = io::load(first_line(b.out));
    EXPECT_EQ(rb.config.at("n_steps"), "16");
    EXPECT_EQ(rb.config.at("paths"), "20");
    {
        std::ofstream f(dir / "bad.conf");
        f << "n_stepz = 3\n";
    }
    EXPECT_EQ(run({"sve", "--config", (dir / "bad.conf").string(), "--out-dir", dir.string()}).code, 1);
    fs::remove_all(dir);
}

TEST(Cli, MissingSeedIsDrawnAndRecorded)
{
    const auto dir = scratch("seed");
    const auto r = run({"sve", "--n-steps", "16", "--paths", "10", "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("seed"), std::string::npos);
    const auto rep = io::load(first_line(r.out));
    EXPECT_NE(r.err.find(std::to_string(rep.seed)), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, SolverFailureExitsTwoWithDiagnostics)
{
    const auto dir = scratch("fail");
    const auto r = run({"riccati", "--lambda", "2", "--g", "0.5", "--max-iter", "1", "--zeta-m-star", "1",
                        "--lambda-m-star", "0.98", "--zeta-l-star", "2", "--lambda-l-star", "0.01", "--out-dir",
                        dir.string()});
    EXPECT_EQ(r.code, 2) << r.err;
    bool found = false;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind("failure-", 0) == 0) found = true;
    EXPECT_TRUE(found);
    fs::remove_all(dir);
}

TEST(Cli, SubcommandsProduceOutput)
{
    const auto dir = scratch("all");
    const std::string o = dir.string();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"table", "--function", "ml_cdf", "--n-steps", "10", "--out-dir", o},
             {"resolvent", "--n", "4", "--n-steps", "8", "--out-dir", o},
             {"hawkes", "--n", "3", "--paths", "20", "--seed", "2", "--out-dir", o},
             {"riccati", "--lambda", "0.5", "--g", "0.1", "--n-steps", "64", "--out-dir", o},
             {"laplace", "--lambda", "0.5", "--g", "0.1", "--n-steps", "32", "--paths", "100", "--seed", "2",
              "--out-dir", o}}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 0) << args[0] << ": " << r.err;
        if (r.code == 0) {
            EXPECT_NO_THROW(io::load(first_line(r.out))) << args[0];
        }
    }
    fs::remove_all(dir);
}

TEST(Cli, BinaryExitCodes)
{
    const auto dir = scratch("binary");
    auto status = [&](const std::string& args) {
        const std::string cmd = std::string("SPIKEVOL_OUT_DIR=") + dir.string() + " " SPIKEVOL_CLI " " + args +
                                " >/dev/null 2>&1";
        const int s = std::system(cmd.c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("--version"), 0);
    EXPECT_EQ(status("sve --seed 1 --n-steps 32 --paths 20"), 0);
    EXPECT_EQ(status("sve --alpha 1.2 --seed 1"), 1);
    EXPECT_EQ(status(""), 1);
    fs::remove_all(dir);
}

TEST(Cli, SampleConfigsRun)
{
    const auto dir = scratch("samples");
    for (const auto& e : fs::directory_iterator(SPIKEVOL_SAMPLES)) {
        if (e.path().extension() != ".conf") continue;
        const auto name = e.path().stem().string();
        const auto cmd = name.substr(0, name.find('-'));
        const auto r = run({cmd, "--config", e.path().string(), "--out-dir", dir.string()});
        EXPECT_EQ(r.code, 0) << name << ": " << r.err;
    }
    fs::remove_all(dir);
}
