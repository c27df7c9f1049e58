#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/cli.hpp"
#include "lowsnr/error.hpp"
#include "lowsnr/table_io.hpp"
#include "oracles.hpp"

using namespace lowsnr;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path tmp(const std::string& name) { return std::filesystem::path(LOWSNR_TEST_TMPDIR) / name; }

ErrorCode parse_error(const std::vector<std::string>& args) {
  try {
    cli::parse_config(args);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a usage error";
  return ErrorCode::IoError;
}

std::string jakes_path() {
  const auto p = tmp("jakes_0.2.csv");
  std::vector<double> g, v;
  oracle::jakes_table(0.2, 4097, g, v);
  write_density_table(p, g, v);
  return p.string();
}

}  // namespace

TEST(Parse, PhiFlags) {
  const auto c = cli::parse_config({"phi", "--model", "ar1", "--a", "0.5", "--method", "series"});
  EXPECT_EQ(c.command, cli::Command::Phi);
  EXPECT_EQ(c.model.kind, "ar1");
  EXPECT_EQ(c.model.a, std::complex<double>(0.5));
  EXPECT_EQ(c.method, "series");
  EXPECT_EQ(c.format, cli::OutputFormat::Json);
  EXPECT_EQ(c.seed, 0u);
}

TEST(Parse, ConfigFileAndOverride) {
  const auto path = tmp("run.cfg");
  {
    std::ofstream f(path);
    f << "# capacity run\ncommand=capacity\nmodel=bandlimited\nlambda_c=0.25\n\nseed = 12  # pinned\n";
  }
  const auto c = cli::parse_config({"--config", path.string()});
  EXPECT_EQ(c.command, cli::Command::Capacity);
  EXPECT_EQ(c.model.kind, "bandlimited");
  EXPECT_EQ(c.model.lambda_c, 0.25);
  EXPECT_EQ(c.seed, 12u);
  const auto o = cli::parse_config({"--config", path.string(), "--lambda-c", "0.1", "--seed", "5"});
  EXPECT_EQ(o.model.lambda_c, 0.1);
  EXPECT_EQ(o.seed, 5u);
  EXPECT_EQ(o.resolved.at("lambda-c"), "0.1");
}

TEST(Parse, Rejections) {
  EXPECT_EQ(parse_error({"phi", "--model", "ar1", "--a", "1.2"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"phi", "--model", "ar1"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"capacity", "--b", "3"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"capacity", "--bogus", "3"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"frobnicate"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"mi", "--b", "13"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"mi", "--samples", "100"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"scheme", "--alpha", "1.5"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"predict", "--delta2", "-1"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"predict", "--past", "0"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"capacity", "--seed", "-4"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"capacity", "--model", "line", "--mass", "0.6,0.6"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"capacity", "--model", "line", "--mass", "0.3"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"sweep", "--b-list", "1,2"}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"capacity", "--format", "xml"}), ErrorCode::UsageError);

  const auto cfg = tmp("bad.cfg");
  {
    std::ofstream f(cfg);
    f << "command=capacity\nsparkle=3\n";
  }
  EXPECT_EQ(parse_error({"--config", cfg.string()}), ErrorCode::UsageError);
  EXPECT_EQ(parse_error({"--config", tmp("missing.cfg").string()}), ErrorCode::IoError);
  EXPECT_EQ(run_cli({"phi", "--model", "ar1", "--a", "1.2"}).code, cli::kExitUsage);
}

TEST(Execute, CapacityMemoryless) {
  const auto r = run_cli({"capacity", "--model", "memoryless"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["phi"].get<double>(), 0.0);
  EXPECT_EQ(j["regime"], "quickly_forgetting");
  EXPECT_EQ(j["kappa"].get<double>(), 0.125);
  EXPECT_EQ(j["alpha_star"].get<double>(), 0.5);
  EXPECT_EQ(j["seed"], 0);
  EXPECT_EQ(j["config"]["command"], "capacity");
}

TEST(Execute, CapacityLine) {
  const auto r = run_cli({"capacity", "--model", "line", "--mass", "0.3", "--residual", "memoryless"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["regime"], "spectral_line");
  EXPECT_DOUBLE_EQ(j["linear_slope"].get<double>(), 0.3);
  EXPECT_FALSE(j.contains("kappa"));
  EXPECT_FALSE(j.contains("alpha_star"));
}

TEST(Execute, PhiAllAgrees) {
  const auto r = run_cli({"phi", "--model", "ar1", "--a", "0.8", "--method", "all"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["phi_integral"].get<double>(), 16.0 / 9.0, 1e-9);
  EXPECT_NEAR(j["phi_series"].get<double>(), 16.0 / 9.0, 1e-6);
  EXPECT_NEAR(j["phi_limit"].get<double>(), 16.0 / 9.0, 1e-3);
  EXPECT_EQ(j["cross_check"], "pass");
}

TEST(Execute, PhiAllFailsWhenLimitDisagrees) {
  // Strong memory pushes the rho-grid extrapolation outside its tolerance.
  const auto r = run_cli({"phi", "--model", "ar1", "--a", "0.9", "--method", "all"});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["cross_check"], "fail");
  EXPECT_EQ(j["condition"], "CrossCheckFailed");
}

TEST(Execute, NumericalConditionsExitTwo) {
  const auto d = run_cli({"phi", "--model", "line", "--mass", "1", "--method", "series"});
  EXPECT_EQ(d.code, cli::kExitNumerical);
  EXPECT_EQ(json::parse(d.out)["condition"], "Diverges");

  const auto table = jakes_path();
  const auto v = run_cli({"validate", "--model", "table", "--table", table});
  ASSERT_EQ(v.code, 0) << v.err;
  EXPECT_EQ(json::parse(v.out)["verdict"], "no");
  const auto p = run_cli({"phi", "--model", "table", "--table", table});
  EXPECT_EQ(p.code, cli::kExitNumerical);
  EXPECT_EQ(json::parse(p.out)["condition"], "ConditionTwelveFails");
  EXPECT_NE(p.err.find("ConditionTwelveFails"), std::string::npos);
}

TEST(Execute, IoErrorsExitThree) {
  EXPECT_EQ(run_cli({"capacity", "--model", "table", "--table", tmp("absent.csv").string()}).code, cli::kExitIo);
  EXPECT_EQ(run_cli({"capacity", "--out", (tmp("no_such_dir") / "x.json").string()}).code, cli::kExitIo);
}

TEST(Execute, OutFileReceivesReport) {
  const auto path = tmp("cap.json");
  const auto r = run_cli({"capacity", "--model", "ar1", "--a", "0.5", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const auto j = json::parse(in);
  EXPECT_NEAR(j["kappa"].get<double>(), 25.0 / 72.0, 1e-12);
}

TEST(Execute, Predict) {
  const auto r = run_cli({"predict", "--model", "ar1", "--a", "0.5", "--delta2", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["epsilon2"].get<double>(), std::sqrt(3.0) / 2.0, 1e-8);
  const auto f = run_cli({"predict", "--model", "ar1", "--a", "0.5", "--delta2", "1", "--past", "1"});
  EXPECT_NEAR(json::parse(f.out)["epsilon2"].get<double>(), 0.875, 1e-15);
  EXPECT_EQ(json::parse(f.out)["method"], "finite_past");
}

TEST(Execute, SchemeReport) {
  const auto r = run_cli({"scheme", "--model", "ar1", "--a", "0.5", "--b", "2", "--alpha", "0.8333333333333334"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["block_coeff"].get<double>(), 0.173611, 1e-6);
  EXPECT_NEAR(j["second_order_coeff_exact"].get<double>(), 2.0 * j["block_coeff"].get<double>(), 1e-12);
  EXPECT_EQ(j["s_of_b"].get<double>(), 0.5);
}

TEST(Execute, SweepCsv) {
  const auto r = run_cli({"sweep", "--model", "ar1", "--a", "0.5", "--b-list", "1,4,64", "--alpha-list",
                          "0.5,0.8333333333333334,1", "--snr-list", "0.1,0.2", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> rows;
  bool saw_gap = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      saw_gap = saw_gap || line.find("iid_gap=0.0138888888889") != std::string::npos;
      continue;
    }
    rows.push_back(line);
  }
  EXPECT_TRUE(saw_gap);
  ASSERT_EQ(rows.size(), 1u + 3 * 3 * 2);
  EXPECT_EQ(rows[0], "model,b,alpha,snr,upper_g,block_coeff,iid_coeff,mi_estimate,mi_stderr,seed");
  EXPECT_EQ(rows[1], "ar1:a=0.5,1,0.5,0.1,0.291666666667,0.125,0.125,,,9");
}

TEST(Execute, SweepJsonSummary) {
  const auto r = run_cli({"sweep", "--model", "ar1", "--a", "0.5", "--b-list", "2", "--alpha-list", "0.5",
                          "--snr-list", "0.1", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_GE(j["summary"]["iid_gap"].get<double>(), 0.0138);
  EXPECT_NEAR(j["summary"]["limit_max_block_coeff"].get<double>(), 25.0 / 72.0, 1e-12);
  EXPECT_NEAR(j["summary"]["limit_max_iid_coeff"].get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_TRUE(j["rows"][0]["mi_estimate"].is_null());
}

TEST(Execute, ByteIdenticalReruns) {
  const std::vector<std::string> sweep{"sweep", "--model", "bandlimited", "--lambda-c", "0.3", "--b-list", "2",
                                       "--alpha-list", "0.5", "--snr-list", "0.2", "--mc", "--samples", "10000",
                                       "--seed", "4"};
  const auto a = run_cli(sweep), b = run_cli(sweep);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const std::vector<std::string> sim{"simulate", "--model", "ar1", "--a", "0.5", "--n", "50",
                                     "--b", "2", "--alpha", "0.5", "--seed", "7"};
  EXPECT_EQ(run_cli(sim).out, run_cli(sim).out);
  EXPECT_NE(run_cli(sim).out, run_cli({"simulate", "--model", "ar1", "--a", "0.5", "--n", "50", "--b", "2",
                                       "--alpha", "0.5", "--seed", "8"}).out);
}

TEST(Execute, SimulateCarriesHeader) {
  const auto r = run_cli({"simulate", "--model", "memoryless", "--n", "4", "--sigma2", "0.5", "--A", "2",
                          "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# seed=3\n"), std::string::npos);
  EXPECT_NE(r.out.find("# snr=8\n"), std::string::npos);
  EXPECT_NE(r.out.find("k,re_x,im_x,re_h,im_h,re_y,im_y\n"), std::string::npos);
}

TEST(Execute, MiCsvAndJson) {
  const auto r = run_cli({"mi", "--model", "memoryless", "--b", "1", "--alpha", "0.5", "--sigma2", "2",
                          "--samples", "10000", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("b,snr,alpha,estimate,std_error,n_samples,seed\n1,0.5,0.5,"), std::string::npos);
  const auto j = run_cli({"mi", "--model", "memoryless", "--b", "1", "--alpha", "0.5", "--sigma2", "2",
                          "--samples", "10000", "--seed", "1", "--format", "json"});
  ASSERT_EQ(j.code, 0) << j.err;
  const auto doc = json::parse(j.out);
  EXPECT_EQ(doc["partitions"], 4);
  EXPECT_NEAR(doc["second_order_coeff"].get<double>(), 0.125, 1e-15);
}

TEST(Execute, HelpExitsCleanly) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--model"), std::string::npos);
}
