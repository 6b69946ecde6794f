#include "flatspec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "flatspec/errors.hpp"
#include "flatspec/explicit_bound.hpp"
#include "flatspec/fem2d.hpp"
#include "flatspec/polygon_io.hpp"
#include "flatspec/specfun.hpp"
#include "flatspec/sturm.hpp"

namespace flatspec::harness {

namespace {

constexpr double pi = std::numbers::pi;

double kroger1() { return 4 * specfun::j01() * specfun::j01(); }

// Evaluates f(0), ..., f(n-1) on up to `threads` workers and returns the
// results in index order. The first exception by index is rethrown.
template <class F>
auto parallel_map(std::size_t n, int threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using T = decltype(f(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned count = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  count = static_cast<unsigned>(std::min<std::size_t>(count, n));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string alpha_id(double alpha) {
  std::ostringstream s;
  s << "T_" << std::fixed << std::setprecision(4) << alpha << "pi";
  return s.str();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

Table row_table(const std::vector<SweepRow>& rows) {
  Table t{{"id", "alpha", "D", "w", "a2", "mu", "bound", "deficit", "deficit_a2", "deficit_w", "symmetric", "thin_path",
           "n_dof"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.id, std::isnan(r.alpha) ? "" : fmt(r.alpha), fmt(r.D), fmt(r.w), fmt(r.a2), fmt(r.mu),
                      fmt(r.bound), fmt(r.deficit), fmt(r.deficit_a2), fmt(r.deficit_w), r.symmetric ? "1" : "0",
                      r.thin_path ? "1" : "0", std::to_string(r.n_dof)});
  }
  return t;
}

geometry::ConvexPolygon reflected_random(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double a = 0.05 + 0.4 * u(rng);
    const int m = 2 + static_cast<int>(6 * u(rng));
    std::vector<geometry::Point> pts{{0.0, 0.0}, {1.0, 0.0}};
    for (int i = 0; i < m; ++i) {
      const geometry::Point p{0.05 + 0.45 * u(rng), a * (2 * u(rng) - 1)};
      pts.push_back(p);
      pts.push_back({1.0 - p.x, p.y});
    }
    try {
      auto hull = geometry::ConvexPolygon::hull(pts);
      const auto d = geometry::diameter(hull);
      if (std::abs(d.length - 1.0) < 1e-12 && std::abs(d.direction.y) < 1e-12 && geometry::symmetric_about_mediatrix(hull)) {
        return hull;
      }
    } catch (const GeometryError&) {
    }
  }
}

double default_h(const ExperimentConfig& c) {
  if (c.h_target > 0.0) return c.h_target;
  return c.command == Command::sharpness ? 0.001 : 0.02;
}

geometry::ConvexPolygon config_polygon(const ExperimentConfig& c) {
  if (!c.polygon_file.empty()) return geometry::read_polygon_file(c.polygon_file);
  if (c.shape == "square") return geometry::rectangle(1.0, 1.0);
  if (c.shape == "disk") return geometry::regular_polygon(256, 1.0);
  if (c.shape == "triangle") return geometry::unit_base_triangle(c.alpha * pi);
  if (c.shape == "lens") return geometry::symmetric_lens(64, 0.1);
  if (c.shape == "trapezoid") return geometry::symmetric_trapezoid(0.5, 0.3);
  throw DomainError("unknown shape '" + c.shape + "' (square, disk, triangle, lens, trapezoid)");
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "mu") return Command::mu;
  if (name == "sl") return Command::sl;
  if (name == "kroger") return Command::kroger;
  if (name == "constant") return Command::constant;
  if (name == "sharpness") return Command::sharpness;
  if (name == "verify") return Command::verify;
  if (name == "estimate-c") return Command::estimate_c;
  throw DomainError("unknown command '" + std::string(name) + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::mu: return "mu";
    case Command::sl: return "sl";
    case Command::kroger: return "kroger";
    case Command::constant: return "constant";
    case Command::sharpness: return "sharpness";
    case Command::verify: return "verify";
    case Command::estimate_c: return "estimate-c";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "triangles") return Family::triangles;
  if (name == "symmetric") return Family::symmetric;
  if (name == "random") return Family::random;
  if (name == "mixed") return Family::mixed;
  throw DomainError("unknown family '" + std::string(name) + "'");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::triangles: return "triangles";
    case Family::symmetric: return "symmetric";
    case Family::random: return "random";
    case Family::mixed: return "mixed";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  const bool fem = command == Command::mu || command == Command::sharpness || command == Command::verify ||
                   command == Command::estimate_c;
  if (k < 1 || k > 20) throw DomainError("k must lie in [1, 20]");
  if (fem && d != 2) throw DomainError("finite element commands need d = 2");
  if (d < 2 || d > 22) throw DomainError("d must lie in [2, 22]");
  if (!(h_target >= 0.0 && h_target <= 0.25)) throw DomainError("h must lie in (0, 1/4]");
  if (command == Command::sharpness) {
    if (!(alpha_min > 1.0 / 3 && alpha_max < 1.0 && alpha_min <= alpha_max)) {
      throw DomainError("alpha range must lie in (1/3, 1) (units of pi)");
    }
    if (alpha_steps < 2) throw DomainError("alpha-steps must be at least 2");
  }
  if (command == Command::verify && symmetric && k != 1) throw DomainError("verify --symmetric needs k = 1");
  if (shape == "triangle" && !(alpha > 1.0 / 3 && alpha < 1.0)) throw DomainError("alpha must lie in (1/3, 1) (units of pi)");
  if (n < 1) throw DomainError("n must be positive");
  if (n_elems < 8 * std::max(k, k_max)) throw DomainError("n-elems must be at least 8 k");
  if (k_max < 1 || k_max > 20 || d_max < 2 || d_max > 22) throw DomainError("k-max in [1, 20], d-max in [2, 22]");
  if (threads < 0) throw DomainError("threads must be non-negative");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"command", to_string(c.command)},
       {"k", c.k},
       {"d", c.d},
       {"h", c.h_target},
       {"alpha", c.alpha},
       {"alpha_min", c.alpha_min},
       {"alpha_max", c.alpha_max},
       {"alpha_steps", c.alpha_steps},
       {"n", c.n},
       {"n_elems", c.n_elems},
       {"k_max", c.k_max},
       {"d_max", c.d_max},
       {"seed", c.seed},
       {"shape", c.shape},
       {"polygon", c.polygon_file},
       {"profile", c.profile_file},
       {"symmetric", c.symmetric},
       {"family", to_string(c.family)},
       {"out", c.out},
       {"format", c.format == Format::csv ? "csv" : "json"},
       {"plot_prefix", c.plot_prefix},
       {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "schema") {
      if (value.get<int>() != kSchemaVersion) throw DomainError("unsupported config schema");
    } else if (key == "command") c.command = parse_command(value.get<std::string>());
    else if (key == "k") c.k = value.get<int>();
    else if (key == "d") c.d = value.get<int>();
    else if (key == "h") c.h_target = value.get<double>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "alpha_min") c.alpha_min = value.get<double>();
    else if (key == "alpha_max") c.alpha_max = value.get<double>();
    else if (key == "alpha_steps") c.alpha_steps = value.get<int>();
    else if (key == "n") c.n = value.get<int>();
    else if (key == "n_elems") c.n_elems = value.get<int>();
    else if (key == "k_max") c.k_max = value.get<int>();
    else if (key == "d_max") c.d_max = value.get<int>();
    else if (key == "seed") c.seed = value.get<unsigned long long>();
    else if (key == "shape") c.shape = value.get<std::string>();
    else if (key == "polygon") c.polygon_file = value.get<std::string>();
    else if (key == "profile") c.profile_file = value.get<std::string>();
    else if (key == "symmetric") c.symmetric = value.get<bool>();
    else if (key == "family") c.family = parse_family(value.get<std::string>());
    else if (key == "out") c.out = value.get<std::string>();
    else if (key == "format") {
      const auto f = value.get<std::string>();
      if (f != "csv" && f != "json") throw DomainError("format must be csv or json");
      c.format = f == "csv" ? Format::csv : Format::json;
    } else if (key == "plot_prefix") c.plot_prefix = value.get<std::string>();
    else if (key == "threads") c.threads = value.get<int>();
    else throw DomainError("unknown config key '" + key + "'");
  }
}

SweepRow measure(const geometry::ConvexPolygon& poly, int k, double h_target, std::string id) {
  const auto frame = geometry::diameter_frame(poly, true);
  const auto flat = geometry::flatness(frame.polygon);
  SweepRow r;
  r.id = std::move(id);
  r.D = frame.original.length;
  r.w = flat.w;
  r.a2 = flat.a2;
  r.thin_path = flat.w <= fem::ThinOptions{}.max_aspect * (1 + 1e-9);
  // The deficit of a thin domain shrinks like w^2 and the linear-element
  // error like h^2, so the column spacing follows the width.
  const auto eig = r.thin_path ? fem::neumann_eigs_thin(frame.polygon, k, std::min(h_target, 0.1 * flat.w))
                               : fem::neumann_eigs(frame.polygon, k, h_target);
  r.mu = eig.values[static_cast<std::size_t>(k)];
  r.n_dof = eig.n_dof;
  r.bound = sturm::kroger_bound(k, 2);
  r.deficit = r.bound - r.mu;
  r.deficit_a2 = r.deficit / (r.a2 * r.a2);
  r.deficit_w = r.deficit / (r.w * r.w);
  r.symmetric = geometry::symmetric_about_mediatrix(frame.polygon);
  return r;
}

std::vector<double> alphas_for_widths(double w_min, double w_max, int steps) {
  if (!(w_min > 0.0 && w_min < w_max) || steps < 2) throw DomainError("alphas_for_widths: need 0 < w_min < w_max, steps >= 2");
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    const double w = w_min * std::pow(w_max / w_min, static_cast<double>(i) / (steps - 1));
    out.push_back(2 * std::atan(1 / (2 * w)) / pi);  // height of T_alpha is cot(alpha/2)/2
  }
  return out;
}

SharpnessResult sharpness_sweep(const std::vector<double>& alphas, double h_target, int threads) {
  for (double a : alphas) {
    if (!(a > 1.0 / 3 && a < 1.0)) throw DomainError("sharpness_sweep: alpha must lie in (1/3, 1) (units of pi)");
  }
  SharpnessResult out;
  out.rows = parallel_map(alphas.size(), threads, [&](std::size_t i) {
    auto row = measure(geometry::unit_base_triangle(alphas[i] * pi), 1, h_target, alpha_id(alphas[i]));
    row.alpha = alphas[i];
    return row;
  });
  const double K = kroger1();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : out.rows) {
    const double lower = std::pow(std::sin(r.alpha * pi / 2), 2);
    const double ratio = r.mu / K;
    if (ratio < lower) out.violations.push_back({r.id, "mu_1 D^2 / (4 j01^2) >= sin^2(alpha/2)", ratio, lower});
    if (ratio >= 1.0) out.violations.push_back({r.id, "mu_1 D^2 < 4 j01^2", ratio, 1.0});
    if (r.deficit_w > 4 * K) out.violations.push_back({r.id, "deficit / w^2 <= 16 j01^2", r.deficit_w, 4 * K});
    if (r.w >= 0.02 * (1 - 1e-9) && r.w <= 0.2 * (1 + 1e-9) && r.deficit > 0.0) {
      const double x = std::log(r.w), y = std::log(r.deficit);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++out.fitted;
    }
  }
  if (out.fitted >= 2) {
    const double n = out.fitted;
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / n;
  } else {
    out.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

geometry::ConvexPolygon random_symmetric_polygon(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (index % 3) {
    case 0: {
      const double top = 0.9 * u(rng);
      const double hmax = std::sqrt(1 - 0.25 * (1 + top) * (1 + top));
      return geometry::symmetric_trapezoid(top, (0.05 + 0.9 * u(rng)) * hmax);
    }
    case 1: return geometry::symmetric_lens(16 + static_cast<int>(48 * u(rng)), 0.02 + 0.43 * u(rng));
    default: return reflected_random(rng);
  }
}

std::vector<std::pair<std::string, geometry::ConvexPolygon>> make_family(Family family, int n, unsigned long long seed) {
  if (n < 1) throw DomainError("make_family: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<std::string, geometry::ConvexPolygon>> out;
  int triangles = 0, symmetric = 0, randoms = 0;
  const int n_tri = family == Family::mixed ? (n + 2) / 3 : n;
  auto triangle = [&] {
    const double a = n_tri == 1 ? 0.7 : 0.4 + 0.58 * triangles / (n_tri - 1);
    ++triangles;
    out.emplace_back(alpha_id(a), geometry::unit_base_triangle(a * pi));
  };
  auto sym = [&] {
    out.emplace_back("sym_" + std::to_string(symmetric), random_symmetric_polygon(rng, symmetric));
    ++symmetric;
  };
  auto rnd = [&] {
    const double aspect = 0.05 + 0.95 * u(rng);
    out.emplace_back("rand_" + std::to_string(randoms), geometry::random_convex_polygon(rng, 6 + randoms % 20, aspect));
    ++randoms;
  };
  for (int i = 0; i < n; ++i) {
    switch (family) {
      case Family::triangles: triangle(); break;
      case Family::symmetric: sym(); break;
      case Family::random: rnd(); break;
      case Family::mixed:
        if (i % 3 == 0) triangle();
        else if (i % 3 == 1) sym();
        else rnd();
        break;
    }
  }
  return out;
}

EstimateC estimate_c(int k, Family family, int n, double h_target, unsigned long long seed, int threads) {
  const auto members = make_family(family, n, seed);
  EstimateC out;
  out.rows = parallel_map(members.size(), threads,
                          [&](std::size_t i) { return measure(members[i].second, k, h_target, members[i].first); });
  out.c_empirical = std::numeric_limits<double>::infinity();
  for (auto& r : out.rows) {
    if (r.id.rfind("T_", 0) == 0) r.alpha = std::stod(r.id.substr(2));
    if (r.deficit_a2 < out.c_empirical) out.c_empirical = r.deficit_a2, out.argmin = r.id;
    if (r.symmetric && (std::isnan(out.c_w_symmetric) || r.deficit_w < out.c_w_symmetric)) {
      out.c_w_symmetric = r.deficit_w;
      out.symmetric_argmin = r.id;
    }
    if (!(r.deficit > 0.0)) out.violations.push_back({r.id, "mu_k D^2 < mu*_{k,2}", r.mu, r.bound});
    if (k == 1 && r.symmetric && r.deficit_w < explicit_bound::kStatedConstant) {
      out.violations.push_back({r.id, "deficit D^2 / w^2 >= 0.432", r.deficit_w, explicit_bound::kStatedConstant});
    }
  }
  return out;
}

KrogerTable kroger_table(int k_max, int d_max, int n_elems, int threads) {
  if (k_max < 1 || d_max < 2) throw DomainError("kroger_table: need k_max >= 1, d_max >= 2");
  std::vector<std::pair<int, int>> cells;
  for (int d = 2; d <= d_max; ++d) {
    for (int k = 1; k <= k_max; ++k) cells.emplace_back(k, d);
  }
  KrogerTable out;
  out.cells = parallel_map(cells.size(), threads, [&](std::size_t i) {
    const auto [k, d] = cells[i];
    KrogerCell c{k, d, sturm::kroger_bound(k, d)};
    if (d != 3 || k == 1) {
      c.computed = sturm::sl_eigenvalue(sturm::maximizer_profile(k, d), k, n_elems);
      c.rel_error = std::abs(c.computed - c.bound) / c.bound;
    }
    return c;
  });
  for (const auto& c : out.cells) {
    if (std::isnan(c.rel_error)) continue;
    out.max_rel_error = std::max(out.max_rel_error, c.rel_error);
    if (c.rel_error > 1e-3) {
      out.violations.push_back({"k=" + std::to_string(c.k) + ",d=" + std::to_string(c.d),
                                "|sl_eigs - mu*| / mu* <= 1e-3", c.rel_error, 1e-3});
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const SweepRow& r) {
  j = {{"id", r.id},         {"D", r.D},
       {"w", r.w},           {"a2", r.a2},
       {"mu", r.mu},         {"bound", r.bound},
       {"deficit", r.deficit}, {"deficit_a2", r.deficit_a2},
       {"deficit_w", r.deficit_w}, {"symmetric", r.symmetric},
       {"thin_path", r.thin_path}, {"n_dof", r.n_dof}};
  if (!std::isnan(r.alpha)) j["alpha"] = r.alpha;
}

void to_json(nlohmann::json& j, const Violation& v) {
  j = {{"domain", v.domain}, {"check", v.check}, {"value", v.value}, {"limit", v.limit}};
}

void to_json(nlohmann::json& j, const KrogerCell& c) {
  j = {{"k", c.k}, {"d", c.d}, {"bound", c.bound}};
  if (!std::isnan(c.computed)) {
    j["computed"] = c.computed;
    j["rel_error"] = c.rel_error;
  }
}

namespace {

struct Outcome {
  nlohmann::json doc;
  Table table;
  std::vector<Violation> violations;
};

Outcome run_mu(const ExperimentConfig& c, double h) {
  const auto poly = config_polygon(c);
  const auto flat = geometry::flatness(poly);
  const auto eig = fem::neumann_eigs(poly, c.k, h * flat.D);
  Outcome o;
  const double bound = sturm::kroger_bound(c.k, 2);
  const double scaled = eig.values[c.k] * flat.D * flat.D;
  o.doc = {{"polygon", geometry::polygon_to_json(poly)},
           {"D", flat.D},
           {"w", flat.w},
           {"a2", flat.a2},
           {"result", eig},
           {"mu_k_D2", scaled},
           {"kroger_bound", bound}};
  o.table.header = {"index", "mu", "residual"};
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    o.table.rows.push_back({std::to_string(i), fmt(eig.values[i]), fmt(eig.residuals[i])});
  }
  if (!(scaled < bound)) o.violations.push_back({"polygon", "mu_k D^2 < mu*_{k,2}", scaled, bound});
  return o;
}

Outcome run_sl(const ExperimentConfig& c) {
  ProfileWeight w = ProfileWeight::tent(c.d);
  if (!c.profile_file.empty()) {
    std::ifstream in(c.profile_file);
    if (!in) throw std::ios_base::failure("cannot read " + c.profile_file);
    w = nlohmann::json::parse(in).get<ProfileWeight>();
  }
  const auto eig = sturm::sl_eigs(w, c.k, c.n_elems);
  Outcome o;
  const double bound = sturm::kroger_bound(c.k, w.dim);
  o.doc = {{"profile", w}, {"result", eig}, {"kroger_bound", bound}};
  o.table.header = {"index", "mu", "residual"};
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    o.table.rows.push_back({std::to_string(i), fmt(eig.values[i]), fmt(eig.residuals[i])});
  }
  if (!sturm::strictness_check(w, c.k, c.n_elems)) {
    o.violations.push_back({"profile", "mu_k(p) <= mu*_{k,d}", eig.values[c.k], bound});
  }
  return o;
}

Outcome run_kroger(const ExperimentConfig& c) {
  auto t = kroger_table(c.k_max, c.d_max, c.n_elems, c.threads);
  Outcome o;
  o.doc = {{"cells", t.cells}, {"max_rel_error", t.max_rel_error}};
  o.table.header = {"k", "d", "bound", "computed", "rel_error"};
  for (const auto& cell : t.cells) {
    o.table.rows.push_back({std::to_string(cell.k), std::to_string(cell.d), fmt(cell.bound),
                            std::isnan(cell.computed) ? "" : fmt(cell.computed),
                            std::isnan(cell.rel_error) ? "" : fmt(cell.rel_error)});
  }
  o.violations = std::move(t.violations);
  return o;
}

Outcome run_constant() {
  const auto r = explicit_bound::explicit_constant();
  Outcome o;
  o.doc = r;
  o.table.header = {"quantity", "value"};
  for (const char* key : {"I00", "psi1", "psi3", "psi5", "tau", "x0", "M", "constant"}) {
    o.table.rows.push_back({key, fmt(o.doc.at(key).get<double>())});
  }
  for (const auto& [w, q] : r.Q_samples) {
    if (q < r.M * (1 - 1e-12)) o.violations.push_back({"Q(" + fmt(w) + ")", "Q(w) >= Q(0) = M", q, r.M});
  }
  if (!explicit_bound::tau_optimality()) o.violations.push_back({"tau", "tau maximizes Q(0)", r.tau, r.tau});
  return o;
}

void write_plot_data(const std::string& prefix, const std::vector<SweepRow>& rows) {
  std::ofstream deficit(prefix + "_deficit.csv"), bounds(prefix + "_bounds.csv");
  if (!deficit || !bounds) throw std::ios_base::failure("cannot write plot data with prefix " + prefix);
  const double K = kroger1();
  Table a{{"w", "deficit"}, {}}, b{{"w", "lower", "mu", "upper"}, {}};
  for (const auto& r : rows) {
    a.rows.push_back({fmt(r.w), fmt(r.deficit)});
    b.rows.push_back({fmt(r.w), fmt(K * std::pow(std::sin(r.alpha * pi / 2), 2)), fmt(r.mu),
                      fmt(K - explicit_bound::kStatedConstant * r.w * r.w)});
  }
  a.write(deficit);
  b.write(bounds);
}

Outcome run_sharpness(const ExperimentConfig& c, double h) {
  std::vector<double> alphas;
  for (int i = 0; i < c.alpha_steps; ++i) {
    alphas.push_back(c.alpha_min + (c.alpha_max - c.alpha_min) * i / (c.alpha_steps - 1));
  }
  auto s = sharpness_sweep(alphas, h, c.threads);
  Outcome o;
  o.doc = {{"rows", s.rows}, {"slope", s.slope}, {"intercept", s.intercept}, {"fitted", s.fitted}};
  o.table = row_table(s.rows);
  o.violations = std::move(s.violations);
  if (!(s.slope >= 1.8 && s.slope <= 2.2)) o.violations.push_back({"sweep", "slope in [1.8, 2.2]", s.slope, 2.0});
  if (!c.plot_prefix.empty()) write_plot_data(c.plot_prefix, s.rows);
  return o;
}

Outcome run_verify(const ExperimentConfig& c, double h) {
  const auto poly = config_polygon(c);
  Outcome o;
  if (c.symmetric) {
    const auto b = explicit_bound::verify_symmetric_bound(poly, h);
    o.doc = b;
    o.table.header = {"D", "w", "lhs", "rhs", "margin"};
    o.table.rows.push_back({fmt(b.D), fmt(b.w), fmt(b.lhs), fmt(b.rhs), fmt(b.margin)});
    if (!(b.margin > 0.0)) o.violations.push_back({"polygon", "mu_1 <= 4 j01^2/D^2 - 0.432 w^2/D^4", b.lhs, b.rhs});
  } else {
    const auto r = measure(poly, c.k, h, "polygon");
    o.doc = r;
    o.table = row_table({r});
    if (!(r.deficit > 0.0)) o.violations.push_back({r.id, "mu_k D^2 < mu*_{k,2}", r.mu, r.bound});
  }
  return o;
}

Outcome run_estimate_c(const ExperimentConfig& c, double h) {
  auto e = estimate_c(c.k, c.family, c.n, h, c.seed, c.threads);
  Outcome o;
  o.doc = {{"rows", e.rows}, {"c_empirical", e.c_empirical}, {"argmin", e.argmin}};
  if (!std::isnan(e.c_w_symmetric)) {
    o.doc["c_w_symmetric"] = e.c_w_symmetric;
    o.doc["symmetric_argmin"] = e.symmetric_argmin;
  }
  o.table = row_table(e.rows);
  o.violations = std::move(e.violations);
  return o;
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  Outcome o;
  try {
    config.validate();
    const double h = default_h(config);
    switch (config.command) {
      case Command::mu: o = run_mu(config, h); break;
      case Command::sl: o = run_sl(config); break;
      case Command::kroger: o = run_kroger(config); break;
      case Command::constant: o = run_constant(); break;
      case Command::sharpness: o = run_sharpness(config, h); break;
      case Command::verify: o = run_verify(config, h); break;
      case Command::estimate_c: o = run_estimate_c(config, h); break;
    }
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::logic_error& e) {  // DomainError, GeometryError
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  }

  nlohmann::json doc = {{"schema", kSchemaVersion}, {"command", to_string(config.command)}, {"config", config}};
  doc.update(o.doc.is_object() ? o.doc : nlohmann::json{{"result", o.doc}});
  doc["violations"] = o.violations;

  std::ofstream file;
  if (!config.out.empty()) {
    file.open(config.out);
    if (!file) {
      err << "error: cannot write " << config.out << '\n';
      return 3;
    }
  }
  std::ostream& sink = config.out.empty() ? out : file;
  if (config.format == Format::json) {
    sink << doc.dump(2) << '\n';
  } else {
    o.table.write(sink);
  }
  sink.flush();
  if (!sink) {
    err << "error: write failed\n";
    return 3;
  }

  if (!o.violations.empty()) {
    err << nlohmann::json{{"schema", kSchemaVersion}, {"command", to_string(config.command)}, {"violations", o.violations}}
               .dump(2)
        << '\n';
    return 1;
  }
  return 0;
}

}  // namespace flatspec::harness
