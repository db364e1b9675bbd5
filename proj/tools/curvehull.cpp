#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "curvehull/jobfile.hpp"

using namespace curvehull;

namespace {

constexpr int kExact = 0, kError = 1, kApproximate = 2, kOutside = 3;

struct Common {
  std::string job;
  std::optional<int> level, max_level;
  std::optional<double> tol;
  std::string out;
  std::string format = "text";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("job", c.job, "job file (JSON)")->required();
  sub->add_option("--level", c.level, "fixed relaxation level d")->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tol, "exactness tolerance on the support gap")->check(CLI::PositiveNumber);
  sub->add_option("--max-level", c.max_level, "largest level tried by the level search")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output prefix; without it the artifact goes to stdout");
  sub->add_option("--format", c.format, "summary format")->check(CLI::IsMember({"text", "json"}));
}

JobFile load(const Common& c) {
  JobFile jf = load_job(c.job);
  CurveJob& job = jf.job;
  if (c.level) {
    job.level = *c.level;
    job.subspaces.clear();
  }
  if (c.max_level) job.max_level = *c.max_level;
  if (c.tol) job.tol = *c.tol;
  if (const char* s = std::getenv("CURVEHULL_SEED")) {
    try {
      size_t used = 0;
      const unsigned long v = std::stoul(s, &used);
      if (used != std::string(s).size()) throw std::invalid_argument(s);
      job.seed = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw StructuralError(std::string("CURVEHULL_SEED must be a nonnegative integer, got '") + s + "'");
    }
  }
  return jf;
}

std::string prefix(const Common& c, const JobFile& jf) {
  if (!c.out.empty()) return c.out;
  return jf.out.value_or("");
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StructuralError(path + ": cannot write");
  f << body;
  if (!f) throw StructuralError(path + ": write failed");
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string join(const std::vector<size_t>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s.empty() ? "-" : s;
}

std::string text_summary(const CertReport& r) {
  std::ostringstream os;
  os << "status: " << to_string(r.status) << "\n";
  if (!r.reason.empty()) os << "reason: " << r.reason << "\n";
  os << "level: " << r.level << "\n";
  os << "gap: " << fmt(r.gap) << " (tol " << fmt(r.tol) << ")\n";
  os << "blocks: " << join(r.block_sizes) << "\n";
  for (const auto& l : r.levels) {
    os << "  d=" << l.level << " gap=" << fmt(l.gap) << " blocks=" << join(l.block_sizes);
    if (!l.note.empty()) os << " note: " << l.note;
    os << "\n";
  }
  if (!r.fan.empty()) {
    os << "recession rays:";
    for (const auto& ray : r.fan.rays) os << " (" << fmt(ray.direction[0]) << ", " << fmt(ray.direction[1]) << ")";
    os << "\nchart functional:";
    for (const auto& c : r.w) os << " " << to_string(c);
    os << "\n";
  }
  return os.str();
}

std::string summary(const Common& c, const CertReport& r, const JobFile& jf) {
  return c.format == "json" ? report_json(r, jf).dump(2) + "\n" : text_summary(r);
}

int status_code(const CertReport& r) {
  switch (r.status) {
    case CertStatus::Exact: return kExact;
    case CertStatus::Approximate: return kApproximate;
    case CertStatus::Failed: return kError;
  }
  return kError;
}

// Artifact to <prefix><suffix> with the summary on stdout, or artifact on
// stdout with the summary on stderr.
void emit(const Common& c, const JobFile& jf, const CertReport* r, const std::string& artifact,
          const std::string& suffix, const std::string& side_summary) {
  const std::string p = prefix(c, jf);
  if (p.empty()) {
    std::cout << artifact;
    std::cerr << side_summary;
    return;
  }
  write_file(p + suffix, artifact);
  if (r) write_file(p + ".report.json", report_json(*r, jf).dump(2) + "\n");
  std::cout << side_summary;
}

int cmd_relax(const Common& c) {
  const JobFile jf = load(c);
  const CertReport r = run_job(jf.job);
  if (!r.pencil) {
    std::cerr << "error: " << r.reason << "\n";
    return kError;
  }
  emit(c, jf, &r, pencil_to_string(*r.pencil), ".pencil", summary(c, r, jf));
  const std::string p = prefix(c, jf);
  if (!p.empty()) {
    if (r.cone_pencil) write_file(p + ".cone.pencil", pencil_to_string(*r.cone_pencil));
    if (r.slice_pencil) write_file(p + ".slice.pencil", pencil_to_string(*r.slice_pencil));
  }
  if (r.status == CertStatus::Failed) std::cerr << "error: " << r.reason << "\n";
  return status_code(r);
}

int cmd_certify(const Common& c) {
  const JobFile jf = load(c);
  const CertReport r = run_job(jf.job);
  std::ostringstream csv;
  const std::vector<std::string> names =
      r.pencil ? r.pencil->x_names : jf.job.variables;
  write_support_csv(csv, r.directions, r.relaxed, r.sampled, names);
  emit(c, jf, &r, csv.str(), ".support.csv", summary(c, r, jf));
  if (r.status == CertStatus::Failed) std::cerr << "error: " << r.reason << "\n";
  return status_code(r);
}

int cmd_recession(const Common& c) {
  const JobFile jf = load(c);
  if (jf.job.variables.size() != 2 || !jf.job.curve)
    throw StructuralError("recession directions need a plane curve with a defining polynomial");
  const RecessionFan fan = recession_fan(jf.job);
  std::ostringstream csv;
  write_fan_csv(csv, fan);
  std::string side;
  if (c.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& ray : fan.rays) j.push_back(ray.direction);
    side = nlohmann::json{{"rays", j}}.dump(2) + "\n";
  } else {
    side = std::to_string(fan.rays.size()) + " recession ray(s)\n";
  }
  emit(c, jf, nullptr, csv.str(), ".recession.csv", side);
  return 0;
}

int cmd_member(const Common& c, const std::vector<double>& point, const std::string& pencil_path) {
  const JobFile jf = load(c);
  Pencil p;
  std::string source;
  if (!pencil_path.empty()) {
    std::ifstream in(pencil_path);
    if (!in) throw StructuralError(pencil_path + ": cannot open pencil file");
    p = read_pencil(in);
    source = pencil_path;
  } else {
    const CertReport r = run_job(jf.job);
    if (!r.pencil) {
      std::cerr << "error: " << r.reason << "\n";
      return kError;
    }
    p = *r.pencil;
    source = std::string("level ") + std::to_string(r.level) + " relaxation (" + to_string(r.status) + ")";
  }
  if (point.size() != p.n())
    throw DomainError("point has " + std::to_string(point.size()) + " coordinates, the pencil has " +
                      std::to_string(p.n()));
  const MembershipResult m = membership(point, p);
  if (c.format == "json") {
    nlohmann::json j{{"status", to_string(m.status)}, {"margin", m.margin}, {"point", point}, {"pencil", source}};
    if (m.status == MemberStatus::Outside)
      j["separating_direction"] = m.direction, j["support"] = m.direction_support;
    if (!m.diagnostics.empty()) j["diagnostics"] = m.diagnostics;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << to_string(m.status) << " margin " << fmt(m.margin) << "\n";
    if (m.status == MemberStatus::Outside) {
      std::cout << "separating direction:";
      for (double v : m.direction) std::cout << " " << fmt(v);
      std::cout << " (support " << fmt(m.direction_support) << ")\n";
    }
  }
  switch (m.status) {
    case MemberStatus::Inside: return kExact;
    case MemberStatus::Outside: return kOutside;
    case MemberStatus::Indeterminate: break;
  }
  std::cerr << "error: membership indeterminate: " << m.diagnostics << "\n";
  return kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semidefinite representations of convex hulls of curve pieces"};
  app.require_subcommand(1);
  Common relax, certify, recession, member;
  add_common(app.add_subcommand("relax", "build the relaxation and write its pencil"), relax);
  add_common(app.add_subcommand("certify", "support-function table and exactness gap"), certify);
  add_common(app.add_subcommand("recession", "recession directions of the curve piece"), recession);
  CLI::App* mem = app.add_subcommand("member", "decide membership of a point in the relaxation");
  add_common(mem, member);
  std::vector<double> point;
  std::string pencil_path;
  mem->add_option("point", point, "coordinates of the point")->required()->allow_extra_args();
  mem->add_option("--pencil", pencil_path, "use this pencil file instead of relaxing the job");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (app.got_subcommand("relax")) return cmd_relax(relax);
    if (app.got_subcommand("certify")) return cmd_certify(certify);
    if (app.got_subcommand("recession")) return cmd_recession(recession);
    return cmd_member(member, point, pencil_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
