#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "keyid/config.hpp"
#include "keyid/cuspforms.hpp"
#include "keyid/fuchsian.hpp"
#include "keyid/heatkernel.hpp"
#include "keyid/identity.hpp"
#include "keyid/parallel.hpp"
#include "keyid/quadrature.hpp"

using namespace keyid;

namespace {

enum Exit { kOk = 0, kUsage = 2, kTolerance = 3, kNumerical = 4 };

struct Options {
  std::optional<int> level, level2, threads;
  std::optional<double> tol;
  std::string config, out, radius;
  bool free = false;
  double t = 1;
  std::string z = "0.2,1.4", w = "0.3,1.1";
  std::size_t order = 100;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Point parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("point '" + s + "' needs the form x,y");
  try {
    const double x = std::stod(s.substr(0, comma));
    const double y = std::stod(s.substr(comma + 1));
    return Point(x, y);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("point '" + s + "' needs the form x,y");
  }
}

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.level) cfg.level = *o.level;
  if (o.level2) cfg.level2 = *o.level2;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.out.empty()) cfg.out = o.out;
  cfg.validate();
  return cfg;
}

// stdout unless a path is configured
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

int threads_of(const RunConfig& cfg) { return cfg.threads > 0 ? cfg.threads : default_threads(); }

int cmd_signature(const Options& o) {
  const auto cfg = resolve(o);
  const GroupSpec spec(cfg.level);
  const auto sig = signature(spec);
  std::cout << "level " << spec.level << "\n";
  std::cout << "genus " << sig.genus << "\n";
  std::cout << "cusps " << sig.cusp_count << "\n";
  std::cout << "elliptic_orders";
  if (sig.elliptic_orders.empty()) std::cout << " none";
  for (int m : sig.elliptic_orders) std::cout << ' ' << m;
  std::cout << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", volume(sig));
  std::cout << "volume " << buf << "\n";
  return kOk;
}

int cmd_heat(const Options& o) {
  const auto cfg = resolve(o);
  HeatParams params;
  params.t = o.t;
  params.tail_eps = o.tol.value_or(cfg.tail_eps);
  params.quad_rel_tol = cfg.quad_rel_tol;
  params.trunc_radius = cfg.trunc_radius;
  params.validate();
  const Point z = parse_point(o.z), w = parse_point(o.w);
  Sink sink(cfg.out);
  auto& os = sink.stream();
  if (o.free) {
    os << "khh " << num(khyp_free(params, z, w)) << "\n";
    return kOk;
  }
  const GroupSpec spec(cfg.level);
  if (!o.radius.empty()) {
    if (o.radius.front() == '+') {
      const double base = params.trunc_radius > 0 ? params.trunc_radius : auto_radius(spec, params, z, w);
      params.trunc_radius = base + std::stod(o.radius.substr(1));
    } else {
      params.trunc_radius = std::stod(o.radius);
    }
    if (!(params.trunc_radius > 0)) throw std::invalid_argument("radius must be positive");
  }
  const auto k = khyp(spec, params, z, w);
  os << "khyp " << num(k.value) << "\n";
  os << "tail_bound " << num(k.tail_bound) << "\n";
  os << "radius " << num(k.radius) << "\n";
  os << "terms " << k.terms << "\n";
  return k.tail_bound <= params.tail_eps ? kOk : kTolerance;
}

HeatIntegralOptions h_options(const RunConfig& cfg) {
  HeatIntegralOptions h;
  h.tol = cfg.h_tol;
  h.c_max = cfg.c_max;
  h.threads = 1;
  return h;
}

int cmd_verify_surface(const Options& o) {
  auto cfg = resolve(o);
  if (o.tol) cfg.target = *o.tol;
  const double target = cfg.target.value_or(1e-2);
  const GroupSpec spec(cfg.level);
  const auto basis = CuspFormBasis::standard(cfg.level);
  const auto pts = cfg.surface_points();
  HeatIntegralCache cache(h_options(cfg));
  std::vector<DensityPair> rows(pts.size());
  parallel_for(pts.size(), threads_of(cfg), [&](std::size_t i) { rows[i] = surface_residual(spec, basis, pts[i], &cache); });

  Sink sink(cfg.out);
  auto& os = sink.stream();
  os << "x,y,lhs,rhs,residual,error_budget\n";
  bool ok = true;
  double worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& r = rows[i];
    os << num(pts[i].x) << ',' << num(pts[i].y) << ',' << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.residual)
       << ',' << num(r.error_budget) << "\n";
    ok = ok && r.residual <= target && r.relative_budget() < target;
    worst = std::max(worst, r.residual);
  }
  std::cerr << "verify-surface: level " << spec.level << ", " << pts.size() << " points, max residual " << num(worst)
            << ", target " << num(target) << (ok ? ", ok" : ", FAILED") << "\n";
  return ok ? kOk : kTolerance;
}

int cmd_verify_product(const Options& o) {
  auto cfg = resolve(o);
  if (o.tol) cfg.target = *o.tol;
  const double target = cfg.target.value_or(2e-2);
  const GroupSpec spec1(cfg.level), spec2(cfg.level2);
  const auto basis1 = CuspFormBasis::standard(cfg.level);
  const auto basis2 = cfg.level2 == cfg.level ? basis1 : CuspFormBasis::standard(cfg.level2);
  const auto pairs = cfg.product_points();
  HeatIntegralCache cache(h_options(cfg));
  std::vector<ProductReport> rows(pairs.size());
  parallel_for(pairs.size(), threads_of(cfg), [&](std::size_t i) {
    rows[i] = product_residual(spec1, spec2, basis1, basis2, pairs[i].first, pairs[i].second, &cache);
  });

  Sink sink(cfg.out);
  auto& os = sink.stream();
  os << "# g1g2 = " << kunneth_dimension(basis1.genus(), basis2.genus()) << "\n";
  os << "x1,y1,x2,y2,lhs,term1,term2,term3,term4,rhs,residual,budget\n";
  bool ok = true;
  double worst = 0;
  for (const auto& r : rows) {
    os << num(r.z1.x) << ',' << num(r.z1.y) << ',' << num(r.z2.x) << ',' << num(r.z2.y) << ',' << num(r.lhs);
    for (double term : r.terms) os << ',' << num(term);
    os << ',' << num(r.rhs) << ',' << num(r.residual) << ',' << num(r.error_budget) << "\n";
    ok = ok && r.residual <= target && r.relative_budget() < target;
    worst = std::max(worst, r.residual);
  }
  std::cerr << "verify-product: levels " << spec1.level << " x " << spec2.level << ", " << rows.size()
            << " pairs, max residual " << num(worst) << ", target " << num(target) << (ok ? ", ok" : ", FAILED")
            << "\n";
  return ok ? kOk : kTolerance;
}

int cmd_coeffs(const Options& o) {
  const auto cfg = resolve(o);
  const GroupSpec spec(cfg.level);
  const auto forms = eta_product_basis(spec.level, std::max<std::size_t>(o.order, 1000));
  Sink sink(cfg.out);
  write_coefficient_table(sink.stream(), forms, o.order);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of the canonical/hyperbolic volume form identity on modular curves"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--level", o.level, "level N of Gamma0(N)");
    cmd->add_option("--config", o.config, "key = value configuration file");
    cmd->add_option("--out", o.out, "output path (default stdout)");
  };
  auto* sig = app.add_subcommand("signature", "genus, cusps, elliptic points and volume");
  common(sig);
  auto* heat = app.add_subcommand("heat", "automorphic heat kernel K_hyp(t; z, w)");
  common(heat);
  heat->add_option("--t", o.t, "diffusion time");
  heat->add_option("--z", o.z, "first point x,y");
  heat->add_option("--w", o.w, "second point x,y");
  heat->add_option("--tol", o.tol, "target bound for the truncated image sum");
  heat->add_option("--radius", o.radius, "truncation radius R, or +d to extend the automatic radius");
  heat->add_flag("--free", o.free, "kernel of the trivial group only");
  auto* vs = app.add_subcommand("verify-surface", "per-point residual of the single-surface identity");
  common(vs);
  vs->add_option("--threads", o.threads, "worker threads");
  vs->add_option("--tol", o.tol, "residual target");
  auto* vp = app.add_subcommand("verify-product", "per-pair residual of the product identity");
  common(vp);
  vp->add_option("--level2", o.level2, "level of the second factor");
  vp->add_option("--threads", o.threads, "worker threads");
  vp->add_option("--tol", o.tol, "residual target");
  auto* co = app.add_subcommand("coeffs", "dump q-expansions of the cusp form generators");
  common(co);
  co->add_option("--order", o.order, "number of coefficients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sig) return cmd_signature(o);
    if (*heat) return cmd_heat(o);
    if (*vs) return cmd_verify_surface(o);
    if (*vp) return cmd_verify_product(o);
    if (*co) return cmd_coeffs(o);
  } catch (const UnsupportedLevel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetUnachievable& e) {
    std::cerr << "tolerance failure: " << e.what() << "\n";
    return kTolerance;
  } catch (const TailNotAchievable& e) {
    std::cerr << "tolerance failure: " << e.what() << "\n";
    return kTolerance;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
