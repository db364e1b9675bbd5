#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvehull/jobfile.hpp"

using namespace curvehull;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CURVEHULL_CLI;
const std::string kJobs = CURVEHULL_JOBS;

std::string job(const std::string& name) { return kJobs + "/" + name + ".json"; }

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("curvehull_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Invocation {
  int code = -1;
  std::string out, err;
};

Invocation run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path o = scratch() / ("stdout" + std::to_string(counter));
  const fs::path e = scratch() / ("stderr" + std::to_string(counter++));
  const std::string cmd = env + " " + kCli + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  Invocation r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::string prefix(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST(JobFile, ExampleFileMatchesBuiltInJob) {
  const JobFile jf = load_job(job("example"));
  const CurveJob ref = golden_job();
  EXPECT_EQ(jf.job.variables, ref.variables);
  EXPECT_EQ(jf.job.subspaces, ref.subspaces);
  EXPECT_EQ(jf.job.isolated_points, ref.isolated_points);
  const auto pencil = [](const CurveJob& j) {
    return pencil_to_string(export_pencil(assemble_moment_sdp(explicit_spec(augment_presentation(j), j.subspaces))));
  };
  EXPECT_EQ(pencil(jf.job), pencil(ref));
}

TEST(JobFile, UnknownKeyIsRejectedWithItsPath) {
  try {
    parse_job(R"({"variables": ["x", "y"], "curve": {"defining_poly": "x", "degree": 1}})", "j");
    FAIL();
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("/curve/degree: unknown key"), std::string::npos) << e.what();
  }
}

TEST(JobFile, MalformedJsonReportsLineAndColumn) {
  try {
    parse_job("{\n  \"variables\": [\"x\",\n  ]\n}\n", "j");
    FAIL();
  } catch (const StructuralError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("j:3:3:", 0), 0u) << e.what();
  }
}

TEST(JobFile, ComponentsMultiplyToTheCurve) {
  const JobFile jf = parse_job(R"({"variables": ["x", "y"], "curve": {"components": ["x - y", "x + y"]}})");
  EXPECT_EQ(*jf.job.curve, parse_poly("x^2 - y^2", {"x", "y"}));
}

TEST(JobFile, FieldsAreTypeChecked) {
  const std::vector<std::string> bad{
      R"({"curve": {"defining_poly": "x"}})",
      R"({"variables": ["x", "x"], "curve": {"defining_poly": "x"}})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "x +* y"}})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "x", "components": ["x"]}})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "tol": -1})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "box": {"z": [0, 1]}})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "box": {"x": [1, 0]}})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "level": 0})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "isolated_points": [[1]]})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "subspaces": [["1"], ["1"]]})",
      R"({"variables": ["x", "y"], "curve": {"defining_poly": "y-x^2"}, "directions": [[1, 0, 0]]})",
      R"({"variables": ["x", "y"], "normalization": [{"variables": ["t"], "defining_poly": "t", "phi_map": {}}]})",
      R"([1, 2])",
  };
  for (const auto& text : bad) EXPECT_THROW(parse_job(text), StructuralError) << text;
}

TEST(JobFile, DirectionCountGivesUniformAngles) {
  const JobFile jf =
      parse_job(R"({"variables": ["x", "y"], "curve": {"defining_poly": "x^2+y^2-1"}, "directions": 8, "seed": 5})");
  ASSERT_EQ(jf.job.directions.size(), 8u);
  EXPECT_NEAR(jf.job.directions[2][0], 0.0, 1e-15);
  EXPECT_NEAR(jf.job.directions[2][1], 1.0, 1e-15);
  EXPECT_EQ(jf.job.seed, 5u);
}

TEST(JobFile, RationalCoordinatesAreExact) {
  const JobFile jf = parse_job(
      R"({"variables": ["x"], "isolated_points": [["1/3"], [0.25], [2]]})");
  EXPECT_EQ(jf.job.isolated_points[0][0], Rational(1, 3));
  EXPECT_EQ(jf.job.isolated_points[1][0], Rational(1, 4));
  EXPECT_EQ(jf.job.isolated_points[2][0], Rational(2));
}

TEST(CliRelax, ExampleIsExactAndPencilFileMatchesPrintedMatrix) {
  const Invocation r = run("relax " + job("example") + " --out " + prefix("example"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("status: exact"), std::string::npos);
  std::ifstream in(prefix("example") + ".pencil");
  const Pencil p = read_pencil(in);
  const CurveJob j = golden_job();
  const MomentSDP m = assemble_moment_sdp(explicit_spec(augment_presentation(j), j.subspaces));
  EXPECT_TRUE(golden_mismatches(m, p).empty());
  const auto report = nlohmann::json::parse(slurp(prefix("example") + ".report.json"));
  EXPECT_EQ(report["status"], "exact");
  EXPECT_EQ(report["provenance"]["job"], load_job(job("example")).source);
}

TEST(CliRelax, CircleIsExactAtLevelOne) {
  const Invocation r = run("relax " + job("circle") + " --format json --out " + prefix("circle"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["level"], 1);
  EXPECT_LE(report["gap"].get<double>(), 1e-3);
}

TEST(CliRelax, PencilGoesToStdoutWithoutOut) {
  const Invocation r = run("relax " + job("circle"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("curvehull-pencil 1\n", 0), 0u);
  EXPECT_NE(r.err.find("status: exact"), std::string::npos);
}

TEST(CliRelax, ApproximateExitsTwo) {
  const Invocation r = run("relax " + job("circle") + " --tol 1e-9");
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(CliRelax, MalformedFileExitsOneWithLineColumn) {
  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{\n  \"variables\": [\"x\", \"y\"],\n  \"curve\": {\"defining_poly\": \"x\",}\n}\n";
  const Invocation r = run("relax " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(bad.string() + ":3:"), std::string::npos) << r.err;
}

TEST(CliRelax, SchemaAndIoErrorsExitOne) {
  const fs::path bad = scratch() / "unknown.json";
  std::ofstream(bad) << R"({"variables": ["x", "y"], "curv": {}})";
  EXPECT_EQ(run("relax " + bad.string()).code, 1);
  EXPECT_EQ(run("relax " + (scratch() / "missing.json").string()).code, 1);
  EXPECT_EQ(run("relax").code, 1);
  EXPECT_EQ(run("relax " + job("circle"), "CURVEHULL_SEED=x").code, 1);
}

TEST(CliRelax, OutputIsByteIdenticalAcrossRuns) {
  for (const std::string name : {"example", "hyperbola"}) {
    ASSERT_EQ(run("relax " + job(name) + " --out " + prefix(name + "_a")).code, 0);
    ASSERT_EQ(run("relax " + job(name) + " --out " + prefix(name + "_b")).code, 0);
    for (const std::string ext : {".pencil", ".report.json"})
      EXPECT_EQ(slurp(prefix(name + "_a") + ext), slurp(prefix(name + "_b") + ext)) << name << ext;
    ASSERT_EQ(run("certify " + job(name) + " --out " + prefix(name + "_a")).code, 0);
    ASSERT_EQ(run("certify " + job(name) + " --out " + prefix(name + "_b")).code, 0);
    EXPECT_EQ(slurp(prefix(name + "_a") + ".support.csv"), slurp(prefix(name + "_b") + ".support.csv"));
  }
}

TEST(CliRelax, SeedOverrideIsRecorded) {
  const Invocation r = run("relax " + job("circle") + " --format json --out " + prefix("seeded"), "CURVEHULL_SEED=77");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["provenance"]["seed"], 77);
}

TEST(CliMember, ExamplePoints) {
  EXPECT_EQ(run("member " + job("example") + " 0 0").code, 0);
  EXPECT_EQ(run("member " + job("example") + " 2 0").code, 0);
  const Invocation out = run("member " + job("example") + " 3 0");
  EXPECT_EQ(out.code, 3);
  EXPECT_NE(out.out.find("outside"), std::string::npos);
  EXPECT_EQ(run("member " + job("example") + " -0.5 1").code, 3);
}

TEST(CliMember, ReusesAWrittenPencil) {
  ASSERT_EQ(run("relax " + job("circle") + " --out " + prefix("circle_m")).code, 0);
  const std::string pencil = " --pencil " + prefix("circle_m") + ".pencil";
  EXPECT_EQ(run("member " + job("circle") + " 0.5 0.5" + pencil).code, 0);
  EXPECT_EQ(run("member " + job("circle") + " 0.8 0.7" + pencil).code, 3);
  EXPECT_EQ(run("member " + job("circle") + " 0.5" + pencil).code, 1);
}

TEST(CliRecession, RaysPerJob) {
  auto rows = [](const std::string& csv) { return std::count(csv.begin(), csv.end(), '\n') - 1; };
  const Invocation par = run("recession " + job("parabola"));
  ASSERT_EQ(par.code, 0);
  EXPECT_EQ(rows(par.out), 1);
  EXPECT_EQ(par.out.substr(par.out.find('\n') + 1, 4), "0,1,");
  EXPECT_EQ(rows(run("recession " + job("example")).out), 0);
  EXPECT_EQ(rows(run("recession " + job("hyperbola")).out), 2);
}

TEST(CliCertify, GapsWithinTolerance) {
  for (const std::string name : {"example", "circle", "cubic_oval", "parabola", "hyperbola"}) {
    const Invocation r = run("certify " + job(name) + " --out " + prefix(name + "_cert") + " --format json");
    ASSERT_EQ(r.code, 0) << name << r.err;
    EXPECT_LE(nlohmann::json::parse(r.out)["gap"].get<double>(), 1e-3) << name;
    std::istringstream csv(slurp(prefix(name + "_cert") + ".support.csv"));
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    while (std::getline(csv, line)) {
      ++rows;
      const double diff = std::stod(line.substr(line.rfind(',') + 1));
      EXPECT_LE(diff, 1e-3) << name << ": " << line;
    }
    EXPECT_GT(rows, 0) << name;
  }
}
