#include "memfem/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "memfem/quadrature.hpp"

namespace memfem {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string sci4(double v) { return fmt("%.3e", v); }
std::string sci9(double v) { return fmt("%.8e", v); }

// Error columns in report order: u1, u2, s1, s2.
double col(const ConvergenceRecord& r, int c) {
  switch (c) {
    case 0: return r.errors.conc[0];
    case 1: return r.errors.conc[1];
    case 2: return r.errors.flux[0];
    default: return r.errors.flux[1];
  }
}

ConvergenceRecord run_level(int order, int M, double T, DtPolicy policy,
                            const PicardOptions& picard,
                            const std::function<void(ProblemConfig&)>& tweak) {
  const auto start = std::chrono::steady_clock::now();
  const Mesh mesh = build_structured(M);
  const FunctionSpacePair sp = make_space_pair(mesh, order);
  ProblemConfig cfg = manufactured_config(policy);
  if (tweak) tweak(cfg);
  const ManufacturedSolution exact;

  ConvergenceRecord rec;
  rec.M = M;
  rec.h = 1.0 / M;
  const StateVector final_state = run_transient(
      sp, cfg, T, rec.h,
      [&](int i, double x, double y) { return exact.conc(i, 0.0, x, y); },
      [&](int, double, const StateVector&, const PicardReport& rep) {
        ++rec.steps;
        rec.picard_total += rep.iterations;
        rec.picard_max = std::max(rec.picard_max, rep.iterations);
      },
      picard);
  rec.errors = compute_errors(sp, final_state, exact);
  rec.rates.fill(std::numeric_limits<double>::quiet_NaN());
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

double convergence_rate(double coarse, double fine) { return std::log2(coarse / fine); }

FieldErrors compute_errors(const FunctionSpacePair& sp, const StateVector& state,
                           const std::function<double(int, double, double, double)>& conc_exact,
                           const std::function<Eigen::Vector2d(int, double, double, double)>& flux_exact) {
  const Mesh& mesh = *sp.mesh;
  const int N = static_cast<int>(state.conc.size());
  const TriangleRule rule = triangle_rule(10);
  const size_t nq = rule.points.size();

  std::vector<std::vector<RtValue>> ref(nq);
  std::vector<std::array<double, 3>> psi(nq);
  int nc = 0;
  for (size_t q = 0; q < nq; ++q) {
    ref[q] = eval_rt_basis(sp.order, rule.points[q][0], rule.points[q][1]);
    nc = eval_conc_basis(sp.order, rule.points[q][0], rule.points[q][1], psi[q]);
  }

  FieldErrors err;
  err.conc.assign(N, 0.0);
  err.flux.assign(N, 0.0);
  const double t = state.t;
  std::array<RtValue, 8> phi;
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const CellGeometry& g = sp.geom[c];
    for (size_t q = 0; q < nq; ++q) {
      map_flux_basis(sp, c, ref[q], phi);
      const Eigen::Vector2d x = g.map(rule.points[q][0], rule.points[q][1]);
      const double w = rule.weights[q] * g.detB;
      for (int i = 0; i < N; ++i) {
        double uh = 0;
        for (int k = 0; k < nc; ++k) uh += state.conc[i][sp.conc_dof(c, k)] * psi[q][k];
        Eigen::Vector2d sh = Eigen::Vector2d::Zero();
        for (int k = 0; k < sp.flux_dofs_per_cell; ++k)
          sh += state.flux[i][sp.cell_flux_dofs[c][k]] * phi[k].value;
        const double du = uh - conc_exact(i, t, x[0], x[1]);
        err.conc[i] += w * du * du;
        err.flux[i] += w * (sh - flux_exact(i, t, x[0], x[1])).squaredNorm();
      }
    }
  }
  for (double& e : err.conc) e = std::sqrt(e);
  for (double& e : err.flux) e = std::sqrt(e);
  return err;
}

FieldErrors compute_errors(const FunctionSpacePair& sp, const StateVector& state,
                           const ManufacturedSolution& exact) {
  if (static_cast<int>(state.conc.size()) != exact.num_species)
    throw std::invalid_argument("compute_errors: species count mismatch");
  return compute_errors(
      sp, state, [&](int i, double t, double x, double y) { return exact.conc(i, t, x, y); },
      [&](int i, double t, double x, double y) { return exact.flux(i, t, x, y); });
}

std::vector<ConvergenceRecord> run_convergence(int order, const std::vector<int>& Ms, double T,
                                               int jobs, DtPolicy policy,
                                               const PicardOptions& picard,
                                               const std::function<void(ProblemConfig&)>& tweak) {
  if (Ms.empty()) throw std::invalid_argument("run_convergence: need at least one mesh size");
  for (size_t k = 1; k < Ms.size(); ++k)
    if (Ms[k] <= Ms[k - 1])
      throw std::invalid_argument("run_convergence: mesh sizes must be strictly increasing");

  std::vector<ConvergenceRecord> records(Ms.size());
  if (jobs <= 1) {
    for (size_t k = 0; k < Ms.size(); ++k)
      records[k] = run_level(order, Ms[k], T, policy, picard, tweak);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> failures(Ms.size());
    std::vector<std::thread> pool;
    const size_t n_threads = std::min(static_cast<size_t>(jobs), Ms.size());
    for (size_t w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (size_t k = next++; k < Ms.size(); k = next++) {
          try {
            records[k] = run_level(order, Ms[k], T, policy, picard, tweak);
          } catch (...) {
            failures[k] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : failures)
      if (e) std::rethrow_exception(e);
  }

  for (size_t k = 1; k < records.size(); ++k) {
    const double levels = std::log2(static_cast<double>(records[k].M) / records[k - 1].M);
    for (int c = 0; c < 4; ++c)
      records[k].rates[c] = convergence_rate(col(records[k - 1], c), col(records[k], c)) / levels;
  }
  return records;
}

void write_csv(const std::vector<ConvergenceRecord>& records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("write_csv: no records");
  out << "M,h,e_u1,rate_u1,e_u2,rate_u2,e_s1,rate_s1,e_s2,rate_s2,"
         "e_u1_full,e_u2_full,e_s1_full,e_s2_full\n";
  for (const auto& r : records) {
    out << r.M << ',' << sci9(r.h);
    for (int c = 0; c < 4; ++c) {
      out << ',' << sci4(col(r, c)) << ',';
      if (std::isfinite(r.rates[c])) out << fmt("%.2f", r.rates[c]);
    }
    for (int c = 0; c < 4; ++c) out << ',' << sci9(col(r, c));
    out << '\n';
  }
}

void write_markdown(const std::vector<ConvergenceRecord>& records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("write_markdown: no records");
  out << "| 1/h | e_u1 | rate | e_u2 | rate | e_s1 | rate | e_s2 | rate |\n"
         "|----:|-----:|-----:|-----:|-----:|-----:|-----:|-----:|-----:|\n";
  for (const auto& r : records) {
    out << "| " << r.M << " ";
    for (int c = 0; c < 4; ++c) {
      out << "| " << sci4(col(r, c)) << " | ";
      out << (std::isfinite(r.rates[c]) ? fmt("%.2f", r.rates[c]) : std::string("--")) << " ";
    }
    out << "|\n";
  }
}

void write_svg(const std::vector<ConvergenceRecord>& records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("write_svg: no records");
  const double W = 720, H = 540, ml = 80, mr = 170, mt = 40, mb = 60;
  const auto lg = [](double v) { return std::log10(std::max(v, 1e-300)); };

  double xmin = lg(records.back().h), xmax = lg(records.front().h);
  if (!(xmax > xmin)) {
    xmin -= 0.3;
    xmax += 0.3;
  }
  const double h0 = records.front().h;
  double anchor = 0;
  for (int c = 0; c < 4; ++c) anchor = std::max(anchor, col(records.front(), c));
  const double hl = std::pow(10.0, xmin), hr = std::pow(10.0, xmax);

  double ymin = std::numeric_limits<double>::infinity(), ymax = 0;
  for (const auto& r : records)
    for (int c = 0; c < 4; ++c) {
      ymin = std::min(ymin, col(r, c));
      ymax = std::max(ymax, col(r, c));
    }
  for (int p = 1; p <= 2; ++p)
    for (double h : {hl, hr}) {
      const double e = anchor * std::pow(h / h0, p);
      ymin = std::min(ymin, e);
      ymax = std::max(ymax, e);
    }
  const double ly0 = lg(ymin) - 0.15, ly1 = lg(ymax) + 0.15;

  const auto px = [&](double h) { return ml + (lg(h) - xmin) / (xmax - xmin) * (W - ml - mr); };
  const auto py = [&](double e) {
    return H - mb - (lg(e) - ly0) / (ly1 - ly0) * (H - mt - mb);
  };
  const auto num = [&](double v) { return fmt("%.2f", v); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << num(ml) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
         "L2 errors at final time vs h (log-log)</text>\n";

  // Axes.
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(H - mb) << "\" x2=\"" << num(W - mr)
      << "\" y2=\"" << num(H - mb) << "\" stroke=\"#000\"/>\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml) << "\" y2=\""
      << num(H - mb) << "\" stroke=\"#000\"/>\n";
  for (const auto& r : records) {
    const double x = px(r.h);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(H - mb) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(H - mb + 6) << "\" stroke=\"#000\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(H - mb + 22)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">1/" << r.M
        << "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(ly0)); k <= static_cast<int>(std::floor(ly1)); ++k) {
    const double y = py(std::pow(10.0, k));
    out << "<line x1=\"" << num(ml - 6) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ml)
        << "\" y2=\"" << num(y) << "\" stroke=\"#000\"/>\n";
    out << "<text x=\"" << num(ml - 10) << "\" y=\"" << num(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">1e" << k
        << "</text>\n";
  }
  out << "<text x=\"" << num((ml + W - mr) / 2) << "\" y=\"" << num(H - 14)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">h</text>\n";
  out << "<text x=\"22\" y=\"" << num((mt + H - mb) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
      << num((mt + H - mb) / 2) << ")\">L2 error</text>\n";

  // Reference slopes anchored at the coarsest-level error.
  for (int p = 1; p <= 2; ++p) {
    out << "<polyline class=\"ref\" fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"6 3\" points=\"";
    out << num(px(hl)) << ',' << num(py(anchor * std::pow(hl / h0, p))) << ' ' << num(px(hr))
        << ',' << num(py(anchor * std::pow(hr / h0, p))) << "\"/>\n";
  }

  static const char* colors[4] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  static const char* labels[4] = {"u1", "u2", "sigma1", "sigma2"};
  for (int c = 0; c < 4; ++c) {
    out << "<polyline class=\"data\" fill=\"none\" stroke=\"" << colors[c]
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < records.size(); ++k) {
      if (k) out << ' ';
      out << num(px(records[k].h)) << ',' << num(py(col(records[k], c)));
    }
    out << "\"/>\n";
  }

  // Legend.
  for (int c = 0; c < 4; ++c) {
    const double y = mt + 20 + 20 * c;
    out << "<line x1=\"" << num(W - mr + 16) << "\" y1=\"" << num(y - 4) << "\" x2=\""
        << num(W - mr + 44) << "\" y2=\"" << num(y - 4) << "\" stroke=\"" << colors[c]
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << num(W - mr + 50) << "\" y=\"" << num(y)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << labels[c] << "</text>\n";
  }
  for (int p = 1; p <= 2; ++p) {
    const double y = mt + 20 + 20 * (3 + p);
    out << "<line x1=\"" << num(W - mr + 16) << "\" y1=\"" << num(y - 4) << "\" x2=\""
        << num(W - mr + 44) << "\" y2=\"" << num(y - 4)
        << "\" stroke=\"#888888\" stroke-dasharray=\"6 3\"/>\n";
    out << "<text x=\"" << num(W - mr + 50) << "\" y=\"" << num(y)
        << "\" font-family=\"sans-serif\" font-size=\"12\">O(h" << (p == 2 ? "^2" : "")
        << ")</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace memfem
