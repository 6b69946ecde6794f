#pragma once

#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flatspec/geometry.hpp"

/// Experiment campaigns behind the command-line tool: Kroger strictness and
/// deficit sweeps, the flatness-exponent fit, Kroger tables, and the explicit
/// symmetric bound, with CSV/JSON output.
namespace flatspec::harness {

inline constexpr int kSchemaVersion = 1;

enum class Command { mu, sl, kroger, constant, sharpness, verify, estimate_c };
enum class Format { csv, json };
enum class Family { triangles, symmetric, random, mixed };

Command parse_command(std::string_view name);
std::string to_string(Command c);
Family parse_family(std::string_view name);
std::string to_string(Family f);

/// Everything a run needs. Angles are in units of pi.
struct ExperimentConfig {
  Command command = Command::constant;
  int k = 1;
  int d = 2;
  double h_target = 0.0;       // 2-D mesh size / diameter; 0: 0.001 for sharpness, 0.02 otherwise
  double alpha = 0.8;          // T_alpha for shape "triangle"
  double alpha_min = 0.76;     // sharpness sweep; the default range gives w in [0.02, 0.2]
  double alpha_max = 0.9745;
  int alpha_steps = 12;
  int n = 100;                 // family size for estimate-c
  int n_elems = 2048;          // 1-D mesh for sl and kroger
  int k_max = 5;
  int d_max = 5;
  unsigned long long seed = 1;
  std::string shape = "square";  // square, disk, triangle, lens, trapezoid
  std::string polygon_file;      // overrides shape
  std::string profile_file;      // sl: ProfileWeight JSON; default is the tent
  bool symmetric = false;        // verify: check the explicit symmetric bound
  Family family = Family::mixed;
  std::string out;               // empty: standard output
  Format format = Format::json;
  std::string plot_prefix;       // sharpness: <prefix>_deficit.csv and <prefix>_bounds.csv
  int threads = 0;               // 0: hardware concurrency

  /// Throws DomainError on out-of-range fields.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// One domain of a campaign, normalized to unit diameter.
struct SweepRow {
  std::string id;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // T_alpha apex angle / pi, if a triangle
  double D = 1.0;
  double w = 0.0;    // width orthogonal to the diameter
  double a2 = 0.0;   // smaller John semiaxis
  double mu = 0.0;   // mu_k D^2
  double bound = 0.0;  // Kroger mu*_{k,2}
  double deficit = 0.0;  // bound - mu_k D^2
  double deficit_a2 = 0.0;  // deficit D^2 / a2^2
  double deficit_w = 0.0;   // deficit D^2 / w^2
  bool symmetric = false;   // about the bisector of its diameter
  bool thin_path = false;
  std::size_t n_dof = 0;
};

struct Violation {
  std::string domain;
  std::string check;
  double value = 0.0;
  double limit = 0.0;
};

/// mu_k of one polygon, normalized to unit diameter. Aspect <= 0.2 uses the
/// thin path with column spacing min(h_target, w / 10).
SweepRow measure(const geometry::ConvexPolygon& poly, int k, double h_target, std::string id);

struct SharpnessResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;  // least squares of log(deficit) against log(w), w in [0.02, 0.2]
  double intercept = 0.0;
  int fitted = 0;
  std::vector<Violation> violations;
};

/// Apex angles (units of pi) of T_alpha whose widths are log-spaced in [w_min, w_max].
std::vector<double> alphas_for_widths(double w_min, double w_max, int steps);

/// mu_1 of T_alpha for each alpha (units of pi, in (1/3, 1)). Checks
/// sin^2(alpha/2) <= mu_1 D^2 / (4 j01^2) < 1 on every row.
SharpnessResult sharpness_sweep(const std::vector<double>& alphas, double h_target, int threads = 0);

/// Symmetric about the bisector of the diameter: a trapezoid, lens or
/// reflected random polygon, by turns.
geometry::ConvexPolygon random_symmetric_polygon(std::mt19937_64& rng, int index);

/// Seeded family members: T_alpha over (0.4, 0.98), symmetric polygons,
/// random convex polygons of varying aspect, or all three interleaved.
std::vector<std::pair<std::string, geometry::ConvexPolygon>> make_family(Family family, int n, unsigned long long seed);

struct EstimateC {
  std::vector<SweepRow> rows;
  double c_empirical = 0.0;  // min deficit_a2
  std::string argmin;
  double c_w_symmetric = std::numeric_limits<double>::quiet_NaN();  // min deficit_w over symmetric rows
  std::string symmetric_argmin;
  std::vector<Violation> violations;
};

/// Empirical C(k, 2) as the minimum normalized deficit over the family.
/// Violations: a non-positive deficit, and for k = 1 a symmetric row with
/// deficit_w below 0.432.
EstimateC estimate_c(int k, Family family, int n, double h_target, unsigned long long seed, int threads = 0);

struct KrogerCell {
  int k = 0;
  int d = 0;
  double bound = 0.0;
  double computed = std::numeric_limits<double>::quiet_NaN();  // sl_eigs on the maximizer
  double rel_error = std::numeric_limits<double>::quiet_NaN();
};

struct KrogerTable {
  std::vector<KrogerCell> cells;
  double max_rel_error = 0.0;
  std::vector<Violation> violations;  // cross-checks above 1e-3
};

/// mu*_{k,d} for k <= k_max, 2 <= d <= d_max, each cross-checked against the
/// maximizer profile at n_elems (only k = 1 when d = 3).
KrogerTable kroger_table(int k_max, int d_max, int n_elems, int threads = 0);

/// Runs one command. Output goes to config.out or `out`; diagnostics and the
/// violation report to `err`. Exit codes: 0 all checks hold, 1 violations,
/// 2 invalid configuration or input, 3 I/O failure, 4 a solver failed.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

void to_json(nlohmann::json& j, const SweepRow& r);
void to_json(nlohmann::json& j, const Violation& v);
void to_json(nlohmann::json& j, const KrogerCell& c);

}  // namespace flatspec::harness
