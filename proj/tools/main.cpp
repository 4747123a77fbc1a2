#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "memfem/checks.hpp"
#include "memfem/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string mode = "run";
  int order = 1;
  int M = 8;
  std::vector<int> Ms = {4, 8, 16, 32, 64};
  double T = 0.5;
  double dt = 0;  // 0: use the dt rule
  std::string dt_rule = "h";
  double tol = 1e-10;
  int max_iter = 50;
  std::string out = ".";
  int jobs = 1;
  std::vector<double> kappa, membrane;  // empty: problem defaults
  double lipschitz = 0;                 // 0: shipped estimate
};

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

bool load_config(const std::string& path, Options& o,
                 const std::function<bool(const char*)>& flag_given, std::string& err) {
  std::ifstream f(path);
  if (!f) {
    err = "cannot read config file " + path;
    return false;
  }
  json j;
  try {
    f >> j;
    const auto take = [&](const char* key, auto& slot) {
      if (!flag_given(key) && j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    take("mode", o.mode);
    take("order", o.order);
    take("M", o.M);
    take("Ms", o.Ms);
    take("T", o.T);
    take("dt", o.dt);
    take("dt_rule", o.dt_rule);
    take("tol", o.tol);
    take("max_iter", o.max_iter);
    take("out", o.out);
    take("jobs", o.jobs);
    take("kappa", o.kappa);
    take("membrane", o.membrane);
    take("lipschitz", o.lipschitz);
  } catch (const json::exception& e) {
    err = "config file " + path + ": " + e.what();
    return false;
  }
  return true;
}

void apply_overrides(const Options& o, memfem::ProblemConfig& cfg) {
  if (!o.kappa.empty()) {
    if (static_cast<int>(o.kappa.size()) != cfg.num_species)
      throw std::invalid_argument("kappa override needs one value per species");
    cfg.kappa = o.kappa;
  }
  if (!o.membrane.empty()) {
    if (static_cast<int>(o.membrane.size()) != cfg.num_species)
      throw std::invalid_argument("membrane override needs one value per species");
    cfg.membrane = o.membrane;
  }
  if (o.lipschitz > 0) cfg.lipschitz_estimate = o.lipschitz;
}

void print_problem(const Options& o, const memfem::ProblemConfig& cfg) {
  std::cout << std::setprecision(10);
  std::cout << "  order:        " << o.order << "\n";
  std::cout << "  T:            " << o.T << "\n";
  std::cout << "  picard:       tol_rel " << o.tol << ", tol_abs 1e-14, max_iter " << o.max_iter
            << "\n";
  std::cout << "  kappa:        ";
  for (double k : cfg.kappa) std::cout << k << " ";
  std::cout << (o.kappa.empty() ? "(default)" : "(override)") << "\n";
  std::cout << "  membrane K:   ";
  for (double k : cfg.membrane) std::cout << k << " ";
  std::cout << (o.membrane.empty() ? "(derived)" : "(override)") << "\n";
  std::cout << "  lipschitz L:  " << cfg.lipschitz_estimate
            << (o.lipschitz > 0 ? " (override)" : " (ball |u| <= 3)") << "\n";
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& emit) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  emit(f);
  f.flush();
  if (!f.good()) throw std::runtime_error("failed writing " + p.string());
}

memfem::PicardOptions picard_options(const Options& o) {
  memfem::PicardOptions popt;
  popt.tol_rel = o.tol;
  popt.max_iter = o.max_iter;
  return popt;
}

int do_run(const Options& o) {
  using namespace memfem;
  const double dt = o.dt > 0 ? o.dt : 1.0 / o.M;
  const Mesh mesh = build_structured(o.M);
  const FunctionSpacePair sp = make_space_pair(mesh, o.order);
  ProblemConfig cfg = manufactured_config(DtPolicy::WarnAndProceed);
  apply_overrides(o, cfg);

  std::cout << "memfem run\n";
  print_problem(o, cfg);
  std::cout << "  M:            " << o.M << " (h = " << 1.0 / o.M << ")\n";
  std::cout << "  dt:           " << dt << (o.dt > 0 ? " (explicit)" : " (rule: dt = h)") << "\n";

  const ManufacturedSolution exact;
  long total = 0;
  int steps = 0, peak = 0;
  const StateVector final_state = run_transient(
      sp, cfg, o.T, dt, [&](int i, double x, double y) { return exact.conc(i, 0.0, x, y); },
      [&](int, double, const StateVector&, const PicardReport& rep) {
        ++steps;
        total += rep.iterations;
        peak = std::max(peak, rep.iterations);
      },
      picard_options(o));
  const FieldErrors err = compute_errors(sp, final_state, exact);

  std::cout << std::scientific << std::setprecision(4);
  std::cout << "final-time L2 errors vs exact solution:\n";
  std::cout << "  u1 " << err.conc[0] << "   u2 " << err.conc[1] << "   sigma1 " << err.flux[0]
            << "   sigma2 " << err.flux[1] << "\n";
  std::cout << "picard: steps " << steps << ", total corrector solves " << total << ", max per step "
            << peak << "\n";

  ConvergenceRecord rec;
  rec.M = o.M;
  rec.h = 1.0 / o.M;
  rec.errors = err;
  rec.rates.fill(std::numeric_limits<double>::quiet_NaN());
  fs::create_directories(o.out);
  const fs::path csv = fs::path(o.out) / "run_errors.csv";
  write_file(csv, [&](std::ostream& s) { write_csv({rec}, s); });
  std::cout << "wrote " << csv.string() << "\n";
  return 0;
}

int do_convergence(const Options& o) {
  using namespace memfem;
  std::function<void(ProblemConfig&)> tweak;
  if (!o.kappa.empty() || !o.membrane.empty() || o.lipschitz > 0)
    tweak = [&o](ProblemConfig& cfg) { apply_overrides(o, cfg); };

  {
    ProblemConfig cfg = manufactured_config(DtPolicy::WarnAndProceed);
    if (tweak) tweak(cfg);
    std::cout << "memfem convergence sweep\n";
    print_problem(o, cfg);
    std::cout << "  Ms:           ";
    for (int m : o.Ms) std::cout << m << " ";
    std::cout << "\n  dt rule:      dt = h\n  jobs:         " << o.jobs << "\n";
  }

  const auto records = run_convergence(o.order, o.Ms, o.T, o.jobs, DtPolicy::WarnAndProceed,
                                       picard_options(o), tweak);

  write_markdown(records, std::cout);
  std::cout << std::fixed << std::setprecision(2);
  for (const auto& r : records)
    std::cout << "M=" << r.M << ": steps " << r.steps << ", picard total " << r.picard_total
              << " (max " << r.picard_max << "), wall " << r.wall_seconds << "s\n";

  fs::create_directories(o.out);
  const fs::path base = fs::path(o.out);
  write_file(base / "convergence.csv", [&](std::ostream& s) { write_csv(records, s); });
  write_file(base / "convergence.md", [&](std::ostream& s) { write_markdown(records, s); });
  write_file(base / "convergence.svg", [&](std::ostream& s) { write_svg(records, s); });
  std::cout << "wrote " << (base / "convergence.csv").string() << ", "
            << (base / "convergence.md").string() << ", " << (base / "convergence.svg").string()
            << "\n";
  return 0;
}

int do_check() {
  bool all = true;
  for (const auto& r : memfem::run_checks()) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "all checks passed\n" : "checks FAILED\n");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  std::string mode_pos, config_path;

  CLI::App app{"Mixed finite element solver for membrane-coupled reaction-diffusion systems"};
  app.add_option("MODE", mode_pos, "run | convergence | check (same as --mode)");
  auto* mode_f = app.add_option("--mode", o.mode, "run | convergence | check");
  auto* order_f = app.add_option("--order", o.order, "flux space order, 1 or 2");
  auto* M_f = app.add_option("--M", o.M, "mesh subdivisions per side (even), run mode");
  auto* Ms_f = app.add_option("--Ms", o.Ms, "mesh sizes for the sweep")->delimiter(',');
  auto* T_f = app.add_option("--T", o.T, "final time");
  auto* dt_f = app.add_option("--dt", o.dt, "explicit time step (run mode only)");
  auto* rule_f = app.add_option("--dt-rule", o.dt_rule, "time step rule; only 'h' is available");
  auto* tol_f = app.add_option("--tol", o.tol, "picard relative tolerance");
  auto* iter_f = app.add_option("--max-iter", o.max_iter, "picard iteration cap");
  auto* out_f = app.add_option("--out", o.out, "output directory");
  auto* jobs_f = app.add_option("--jobs", o.jobs, "concurrent sweep levels");
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  if (!config_path.empty()) {
    const auto given = [&](const char* key) -> bool {
      const std::string k = key;
      if (k == "mode") return mode_f->count() > 0 || !mode_pos.empty();
      if (k == "order") return order_f->count() > 0;
      if (k == "M") return M_f->count() > 0;
      if (k == "Ms") return Ms_f->count() > 0;
      if (k == "T") return T_f->count() > 0;
      if (k == "dt") return dt_f->count() > 0;
      if (k == "dt_rule") return rule_f->count() > 0;
      if (k == "tol") return tol_f->count() > 0;
      if (k == "max_iter") return iter_f->count() > 0;
      if (k == "out") return out_f->count() > 0;
      if (k == "jobs") return jobs_f->count() > 0;
      return false;  // kappa/membrane/lipschitz are config-file only
    };
    std::string err;
    if (!load_config(config_path, o, given, err)) return usage_error(err);
  }

  if (!mode_pos.empty()) {
    if (mode_f->count() > 0 && o.mode != mode_pos)
      return usage_error("positional mode '" + mode_pos + "' conflicts with --mode " + o.mode);
    o.mode = mode_pos;
  }

  if (o.mode != "run" && o.mode != "convergence" && o.mode != "check")
    return usage_error("unknown mode '" + o.mode + "' (expected run, convergence, or check)");
  if (o.order != 1 && o.order != 2) return usage_error("--order must be 1 or 2");
  if (o.dt_rule != "h") return usage_error("--dt-rule only supports 'h'");
  if (o.dt < 0) return usage_error("--dt must be positive");
  if (o.dt > 0 && o.mode == "convergence")
    return usage_error("the convergence sweep is defined with dt = h; --dt applies to run mode");
  if (!(o.tol > 0)) return usage_error("--tol must be positive");
  if (o.max_iter < 1) return usage_error("--max-iter must be at least 1");
  if (o.jobs < 1) return usage_error("--jobs must be at least 1");

  try {
    if (o.mode == "run") return do_run(o);
    if (o.mode == "convergence") return do_convergence(o);
    return do_check();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
