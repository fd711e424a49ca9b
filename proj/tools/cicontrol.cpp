// Command-line front end: equilibrium report, surface export, forward
// evolution and field optimisation, each driven by INI configuration files.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cicontrol/config.hpp"
#include "cicontrol/errors.hpp"
#include "cicontrol/runner.hpp"

namespace {

using namespace cic;

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kBlowup = 3, kMonotonicity = 4 };

struct Options {
  std::vector<std::string> configs;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<int> max_iters;
  std::optional<std::string> seed_field;
  std::optional<std::string> field_file;
  bool batch = false;
  int jobs = 1;
};

std::mutex print_mutex;

void say(const std::string& prefix, const std::string& text) {
  std::lock_guard lock(print_mutex);
  std::cout << prefix << text << std::flush;
}

RunConfig resolve(const Options& o, const std::vector<fs::path>& files) {
  RunConfig c = load_config(files);
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.max_iters) {
    c.mca.max_iters = *o.max_iters;
    c.mca.validate();
  }
  if (o.seed_field) {
    c.guess.kind = parse_guess_kind(*o.seed_field);
    if (c.guess.kind == GuessKind::file) {
      if (o.field_file) c.guess.file = *o.field_file;
      if (c.guess.file.empty())
        throw ConfigError("--seed-field file needs --field-file or [control] guess_file");
    }
  }
  return c;
}

int run_one(const std::string& command, const Options& o, const std::vector<fs::path>& files,
            const std::optional<fs::path>& out_override, const std::string& prefix) {
  try {
    const RunConfig c = resolve(o, files);
    const fs::path out = resolve_output_dir(c, out_override);
    if (command == "equilibrium") {
      say(prefix, cmd_equilibrium(c, out).text);
    } else if (command == "surfaces") {
      const SurfacesReport r = cmd_surfaces(c, out);
      char line[160];
      std::snprintf(line, sizeof line, "CI at (%.6g nm, %.6g nm), |E+ - E-| at nearest node %.3g\n",
                    r.ci.qx, r.ci.qz, r.gap_at_ci);
      say(prefix, line);
    } else if (command == "evolve") {
      std::optional<fs::path> field;
      if (o.field_file && !o.seed_field) field = fs::path(*o.field_file);
      const EvolveReport r = cmd_evolve(c, out, field);
      char line[200];
      std::snprintf(line, sizeof line, "<qx(t_f)> = %.6g nm, J1(t_f) = %.6g, crossings = %d\n",
                    r.qx_final, r.j1_final, r.crossings);
      say(prefix, line);
    } else {
      const auto progress = [&](const McaState& s) {
        char line[160];
        std::snprintf(line, sizeof line, "iter %4d  J = %.9f  J1 = %.9f  J2 = %.9f\n",
                      s.iteration, s.J.back(), s.J1.back(), s.J2.back());
        say(prefix, line);
      };
      const OptimizeReport r = cmd_optimize(c, out, progress);
      char line[240];
      std::snprintf(line, sizeof line,
                    "stopped after %d iterations (%s); J1 = %.6g, plateau at %d, "
                    "<qx(t_f)> = %.6g nm, crossings = %d\n",
                    r.state.iteration, r.state.stop_reason.c_str(), r.state.J1.back(), r.plateau,
                    r.qx_final, r.crossings);
      say(prefix, line);
    }
    say(prefix, "outputs written to " + out.string() + "\n");
    return kOk;
  } catch (const ConfigError& e) {
    std::lock_guard lock(print_mutex);
    std::cerr << prefix << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalBlowup& e) {
    std::lock_guard lock(print_mutex);
    std::cerr << prefix << "numerical blowup: " << e.what() << '\n';
    return kBlowup;
  } catch (const MonotonicityFault& e) {
    std::lock_guard lock(print_mutex);
    std::cerr << prefix << "monotonicity fault: " << e.what() << '\n';
    return kMonotonicity;
  } catch (const std::exception& e) {
    std::lock_guard lock(print_mutex);
    std::cerr << prefix << "error: " << e.what() << '\n';
    return kOther;
  }
}

int dispatch(const std::string& command, const Options& o) {
  if (!o.batch) {
    std::vector<fs::path> files(o.configs.begin(), o.configs.end());
    std::optional<fs::path> out;
    if (o.out) out = fs::path(*o.out);
    return run_one(command, o, files, out, "");
  }

  // Independent runs, one per config file, each in its own sub-directory.
  std::atomic<std::size_t> next{0};
  std::vector<int> codes(o.configs.size(), kOk);
  auto worker = [&] {
    for (std::size_t k = next++; k < o.configs.size(); k = next++) {
      const fs::path cfg(o.configs[k]);
      std::optional<fs::path> out;
      if (o.out) out = fs::path(*o.out) / cfg.stem();
      codes[k] = run_one(command, o, {cfg}, out, "[" + cfg.stem().string() + "] ");
    }
  };
  const int n = std::clamp(o.jobs, 1, static_cast<int>(o.configs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-packet control near an engineered conical intersection"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.configs, "INI configuration; repeat to layer files")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "Output directory (overrides [output] directory)");
    sub->add_flag("--batch", o.batch,
                  "Treat every --config as an independent run written to <out>/<stem>");
    sub->add_option("-j,--jobs", o.jobs, "Concurrent runs in --batch mode")
        ->check(CLI::PositiveNumber);
  };
  auto add_dynamics = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "Propagation model")
        ->check(CLI::IsMember({"spinor", "bo"}));
    sub->add_option("--seed-field", o.seed_field, "Field source overriding [control] guess")
        ->check(CLI::IsMember({"zero", "rect", "gauss", "file"}));
    sub->add_option("--field-file", o.field_file, "Field CSV (t_us, u_V_per_m)")
        ->check(CLI::ExistingFile);
  };

  auto* eq = app.add_subcommand("equilibrium", "Equilibrium geometry report");
  add_common(eq);
  auto* surf = app.add_subcommand("surfaces", "Export E+-, S, W, G and the mixing angle");
  add_common(surf);
  auto* evo = app.add_subcommand("evolve", "Single forward propagation");
  add_common(evo);
  add_dynamics(evo);
  auto* opt = app.add_subcommand("optimize", "Monotonically convergent field optimisation");
  add_common(opt);
  add_dynamics(opt);
  opt->add_option("--max-iters", o.max_iters, "Iteration limit")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return dispatch(command, o);
}
