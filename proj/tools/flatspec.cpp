// Command-line front end for the experiment harness.
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatspec/errors.hpp"
#include "flatspec/harness.hpp"

using namespace flatspec::harness;

int main(int argc, char** argv) {
  CLI::App app{"Neumann eigenvalue bounds for convex domains"};
  app.set_help_flag("--help", "print this help and exit");

  const std::map<std::string, Command> commands{
      {"mu", Command::mu},           {"sl", Command::sl},         {"kroger", Command::kroger},
      {"constant", Command::constant}, {"sharpness", Command::sharpness}, {"verify", Command::verify},
      {"estimate-c", Command::estimate_c}};
  const std::map<std::string, Format> formats{{"csv", Format::csv}, {"json", Format::json}};
  const std::map<std::string, Family> families{{"triangles", Family::triangles},
                                               {"symmetric", Family::symmetric},
                                               {"random", Family::random},
                                               {"mixed", Family::mixed}};

  ExperimentConfig cfg;
  std::string config_file;
  app.add_option("--config", config_file, "JSON config; command-line flags override it")->check(CLI::ExistingFile);

  Command command = Command::constant;
  auto* cmd = app.add_option("command", command, "mu | sl | kroger | constant | sharpness | verify | estimate-c")
                  ->transform(CLI::CheckedTransformer(commands, CLI::ignore_case))
                  ->option_text("COMMAND");
  auto* k = app.add_option("--k", cfg.k, "eigenvalue index");
  auto* d = app.add_option("--d", cfg.d, "dimension (sl)");
  auto* h = app.add_option("--h", cfg.h_target, "2-D mesh size relative to the diameter");
  auto* alpha = app.add_option("--alpha", cfg.alpha, "apex angle of T_alpha in units of pi");
  auto* amin = app.add_option("--alpha-min", cfg.alpha_min, "sharpness sweep lower apex angle / pi");
  auto* amax = app.add_option("--alpha-max", cfg.alpha_max, "sharpness sweep upper apex angle / pi");
  auto* asteps = app.add_option("--alpha-steps", cfg.alpha_steps, "sharpness sweep size");
  auto* n = app.add_option("--n", cfg.n, "family size (estimate-c)");
  auto* ne = app.add_option("--n-elems", cfg.n_elems, "1-D mesh size (sl, kroger)");
  auto* kmax = app.add_option("--k-max", cfg.k_max, "kroger table rows");
  auto* dmax = app.add_option("--d-max", cfg.d_max, "kroger table columns");
  auto* seed = app.add_option("--seed", cfg.seed, "RNG seed");
  auto* shape = app.add_option("--shape", cfg.shape, "square | disk | triangle | lens | trapezoid");
  auto* polygon = app.add_option("--polygon", cfg.polygon_file, "polygon vertex file (overrides --shape)");
  auto* profile = app.add_option("--profile", cfg.profile_file, "profile weight JSON (sl)");
  auto* sym = app.add_flag("--symmetric", cfg.symmetric, "verify: check the explicit symmetric bound");
  auto* family = app.add_option("--family", cfg.family, "triangles | symmetric | random | mixed")
                     ->transform(CLI::CheckedTransformer(families, CLI::ignore_case))
                     ->option_text("FAMILY");
  auto* out = app.add_option("--out", cfg.out, "output file (default: standard output)");
  auto* format = app.add_option("--format", cfg.format, "csv | json")
                     ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
                     ->option_text("FORMAT");
  auto* plot = app.add_option("--plot-prefix", cfg.plot_prefix, "sharpness: write plot data files");
  auto* threads = app.add_option("--threads", cfg.threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (!config_file.empty()) {
    // Reload from the file, then reapply the flags given on the command line.
    const ExperimentConfig flags = cfg;
    try {
      std::ifstream in(config_file);
      cfg = nlohmann::json::parse(in).get<ExperimentConfig>();
    } catch (const std::exception& e) {
      std::cerr << "flatspec: " << config_file << ": " << e.what() << '\n';
      return 2;
    }
    auto keep = [](CLI::Option* o, auto& dst, const auto& src) {
      if (o->count() > 0) dst = src;
    };
    keep(k, cfg.k, flags.k);
    keep(d, cfg.d, flags.d);
    keep(h, cfg.h_target, flags.h_target);
    keep(alpha, cfg.alpha, flags.alpha);
    keep(amin, cfg.alpha_min, flags.alpha_min);
    keep(amax, cfg.alpha_max, flags.alpha_max);
    keep(asteps, cfg.alpha_steps, flags.alpha_steps);
    keep(n, cfg.n, flags.n);
    keep(ne, cfg.n_elems, flags.n_elems);
    keep(kmax, cfg.k_max, flags.k_max);
    keep(dmax, cfg.d_max, flags.d_max);
    keep(seed, cfg.seed, flags.seed);
    keep(shape, cfg.shape, flags.shape);
    keep(polygon, cfg.polygon_file, flags.polygon_file);
    keep(profile, cfg.profile_file, flags.profile_file);
    keep(sym, cfg.symmetric, flags.symmetric);
    keep(family, cfg.family, flags.family);
    keep(out, cfg.out, flags.out);
    keep(format, cfg.format, flags.format);
    keep(plot, cfg.plot_prefix, flags.plot_prefix);
    keep(threads, cfg.threads, flags.threads);
    if (cmd->count() > 0) cfg.command = command;
  } else {
    cfg.command = command;
  }
  if (config_file.empty() && cmd->count() == 0) {
    std::cerr << "flatspec: a command is required\n" << app.help();
    return 2;
  }
  return run(cfg, std::cout, std::cerr);
}
