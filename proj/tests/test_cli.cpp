#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include "test_support.hpp"

using namespace scmap;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scmap");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> instance(const std::string& topo, const std::string& chains, const std::string& demands) {
  return {"--topology", data(topo), "--chains", data(chains), "--demands", data(demands)};
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const auto kTriangle = instance("triangle.json", "chain1.json", "triangle_fullmesh.csv");
const auto kNsfnet = instance("nsfnet.json", "chain3.json", "nsfnet_fullmesh.csv");

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("scmap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  fs::path dir_;
};

std::string strip_wall(const std::string& csv) {
  // wall_ms is the tenth column.
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (cells.size() > 9) cells[9] = "";
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_F(Cli, SolveTriangleAndValidate) {
  const std::string plan = path("plan.json"), trace = path("trace.csv");
  const CliRun r = cli(std::vector<std::string>{"solve"} + kTriangle +
                    std::vector<std::string>{"--nc", "1", "--k", "3", "--out", plan, "--trace", trace});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("status=optimal"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("objective=8"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(trace).substr(0, 45), "iter,objective,columns_added,best_rc,wall_ms\n");
  const CliRun v = cli(std::vector<std::string>{"validate"} + kTriangle + std::vector<std::string>{"--plan", plan});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_EQ(v.out, "ok\n");
}

TEST_F(Cli, InputErrors) {
  const std::vector<std::string> solve = std::vector<std::string>{"solve"} + kTriangle;
  EXPECT_EQ(cli(solve + std::vector<std::string>{"--nc", "1", "--k", "0", "--out", path("p.json")}).code, 1);
  EXPECT_EQ(cli(solve + std::vector<std::string>{"--nc", "0", "--k", "1", "--out", path("p.json")}).code, 1);
  EXPECT_EQ(cli(solve + std::vector<std::string>{"--nc", "1", "--k", "1"}).code, 1);
  EXPECT_EQ(cli({"solve", "--topology", path("missing.json"), "--chains", data("chain1.json"), "--demands",
                 data("triangle_fullmesh.csv"), "--nc", "1", "--k", "1", "--out", path("p.json")})
                .code,
            1);
  EXPECT_EQ(cli({"bogus"}).code, 1);
  EXPECT_EQ(cli(std::vector<std::string>{"sweep"} + kTriangle + std::vector<std::string>{"--nc-list", "1,x", "--k-list", "1"}).code, 1);
  EXPECT_EQ(cli(std::vector<std::string>{"sweep"} + kTriangle + std::vector<std::string>{"--nc-list", "1", "--k-list", "9"}).code, 1);
  const CliRun r = cli(solve + std::vector<std::string>{"--nc", "1", "--k", "0", "--out", path("p.json")});
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, InfeasibleExitCode) {
  const std::string topo = path("thin.json");
  std::vector<LinkSpec> links = triangle().topology().links();
  for (LinkSpec& l : links) l.capacity_gbps = 0.5;
  std::ofstream(topo) << topology_to_json(Topology("thin", triangle().topology().nodes(), links));
  const CliRun r = cli({"solve", "--topology", topo, "--chains", data("chain1.json"), "--demands",
                     data("triangle_fullmesh.csv"), "--nc", "1", "--k", "3", "--out", path("p.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("capacity"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("p.json")));
}

TEST_F(Cli, TamperedPlans) {
  const std::string plan = path("plan.json");
  ASSERT_EQ(cli(std::vector<std::string>{"solve"} + kTriangle +
                std::vector<std::string>{"--nc", "3", "--k", "3", "--out", plan})
                .code,
            0);
  nlohmann::json doc = nlohmann::json::parse(slurp(plan));

  nlohmann::json loads = doc;
  loads["arc_loads"][0]["load_gbps"] = 500.0;
  std::ofstream(path("loads.json")) << loads.dump();
  const CliRun a = cli(std::vector<std::string>{"validate"} + kTriangle + std::vector<std::string>{"--plan", path("loads.json")});
  EXPECT_EQ(a.code, 3);
  EXPECT_NE(a.out.find("capacity_exceeded: a->b"), std::string::npos) << a.out;

  nlohmann::json unknown = doc;
  unknown["routes"][0]["src"] = "zz";
  std::ofstream(path("unknown.json")) << unknown.dump();
  EXPECT_EQ(cli(std::vector<std::string>{"validate"} + kTriangle + std::vector<std::string>{"--plan", path("unknown.json")}).code, 1);

  std::ofstream(path("garbage.json")) << "{ not json";
  EXPECT_EQ(cli(std::vector<std::string>{"validate"} + kTriangle + std::vector<std::string>{"--plan", path("garbage.json")}).code, 1);
  EXPECT_EQ(cli(std::vector<std::string>{"validate"} + kTriangle + std::vector<std::string>{"--plan", path("absent.json")}).code, 1);

  // An explicit --k overrides the recorded one.
  const CliRun k1 = cli(std::vector<std::string>{"validate"} + kTriangle + std::vector<std::string>{"--plan", plan, "--k", "1"});
  if (doc["nfv_nodes_used"].get<int>() > 1) {
    EXPECT_EQ(k1.code, 3);
    EXPECT_NE(k1.out.find("k_exceeded"), std::string::npos);
  }
}

TEST_F(Cli, LowerBound) {
  const CliRun t = cli(std::vector<std::string>{"lowerbound"} + kTriangle);
  ASSERT_EQ(t.code, 0);
  EXPECT_EQ(t.out, "shortest_path_lb=6\nsingle_node=8 at a\nper_pair=6\n");
  const CliRun p = cli(std::vector<std::string>{"lowerbound"} + instance("path5.json", "chain1.json", "path5_single.csv"));
  EXPECT_EQ(p.out.substr(0, 19), "shortest_path_lb=4\n");
  const CliRun n = cli(std::vector<std::string>{"lowerbound"} + kNsfnet);
  EXPECT_EQ(n.out, "shortest_path_lb=390\nsingle_node=624 at TX\nper_pair=390\n");
}

TEST_F(Cli, SweepSchemaAndKOneInvariance) {
  const std::string out = path("sweep.csv");
  const CliRun r = cli(std::vector<std::string>{"sweep"} + kNsfnet +
                    std::vector<std::string>{"--nc-list", "1,2,4", "--k-list", "1", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  std::stringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "nc,k,status,objective,lp_bound,gap,nfv_nodes_used,iterations,columns_generated,wall_ms,lb,single_node");
  const std::regex row(R"((\d+),1,(optimal|feasible),([0-9.]+),[-0-9.e+]+,[0-9.e+-]+,1,\d+,\d+,\d+\.\d,390,624)");
  std::vector<std::string> nc, obj;
  while (std::getline(in, line)) {
    std::smatch m;
    ASSERT_TRUE(std::regex_match(line, m, row)) << line;
    nc.push_back(m[1]);
    obj.push_back(m[3]);
  }
  EXPECT_EQ(nc, (std::vector<std::string>{"1", "2", "4"}));
  ASSERT_EQ(obj.size(), 3u);
  EXPECT_EQ(obj[0], "624");
  EXPECT_EQ(obj[1], obj[0]);
  EXPECT_EQ(obj[2], obj[0]);
}

TEST_F(Cli, SweepIsReproducibleAcrossThreadCounts) {
  const std::vector<std::string> args = std::vector<std::string>{"sweep"} + kNsfnet +
                                        std::vector<std::string>{"--nc-list", "1..3", "--k-list", "2,14"};
  setenv("SCMAP_THREADS", "1", 1);
  const CliRun a = cli(args);
  setenv("SCMAP_THREADS", "3", 1);
  const CliRun b = cli(args);
  unsetenv("SCMAP_THREADS");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(strip_wall(a.out), strip_wall(b.out));
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 7);
}

TEST_F(Cli, SolveIsByteReproducible) {
  const auto args = std::vector<std::string>{"solve"} + kNsfnet + std::vector<std::string>{"--nc", "4", "--k", "3"};
  ASSERT_EQ(cli(args + std::vector<std::string>{"--out", path("a.json")}).code, 0);
  ASSERT_EQ(cli(args + std::vector<std::string>{"--out", path("b.json")}).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, PartitionDump) {
  const CliRun r = cli(std::vector<std::string>{"partition"} + kNsfnet + std::vector<std::string>{"--nc", "34"});
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["groups"].size(), 34u);
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = SCMAP_CLI_PATH;
  if (!fs::exists(bin)) GTEST_SKIP() << "cli binary not built";
  auto run = [&](const std::string& args) {
    const int status = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::string inst = "--topology " + data("triangle.json") + " --chains " + data("chain1.json") +
                           " --demands " + data("triangle_fullmesh.csv");
  EXPECT_EQ(run("solve " + inst + " --nc 1 --k 3 --out " + path("p.json")), 0);
  EXPECT_EQ(run("validate " + inst + " --plan " + path("p.json")), 0);
  EXPECT_EQ(run("solve " + inst + " --nc 1 --k 0 --out " + path("q.json")), 1);
}
