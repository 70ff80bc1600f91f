// Command-line entry point: constants, envelope, count, experiment,
// oracle-compare and subsequence subcommands.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 numerical
// consistency failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dosfluct/config.hpp"
#include "dosfluct/constants.hpp"
#include "dosfluct/envelope.hpp"
#include "dosfluct/errors.hpp"
#include "dosfluct/experiments.hpp"
#include "dosfluct/path.hpp"
#include "dosfluct/pruefer.hpp"
#include "dosfluct/subsequence.hpp"

namespace fs = std::filesystem;
using namespace dosfluct;

namespace {

TorusFunction function_from_flag(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return parse_function(json::parse(text));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("--F: malformed JSON: ") + e.what());
    }
  }
  return parse_function(json(text));
}

GeneratorConvention generator_from_flag(const std::string& s) {
  if (s == "half_laplacian") return GeneratorConvention::half_laplacian;
  if (s == "laplacian") return GeneratorConvention::laplacian;
  throw ConfigError("--generator: expected 'half_laplacian' or 'laplacian'");
}

EnvelopeProfile envelope_for_model(const std::string& model, double alpha, double n) {
  switch (parse_model(model)) {
    case Model::dc: return DcCoupling{alpha, n};
    case Model::decaying_potential: return PowerDecay{alpha};
  }
  throw ConfigError("--model: unknown");
}

void print(const json& j) {
  require_finite(j);
  std::cout << j.dump(2) << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << body;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-of-states fluctuation lab for 1-D random Schroedinger operators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  // constants
  auto* constants = app.add_subcommand("constants", "Print C_1..C_D and the covariance constants as JSON");
  std::string c_F = "cos";
  double c_kappa = 1.0;
  int c_D = 3;
  std::string c_generator = "half_laplacian";
  constants->add_option("--F", c_F, "cos, zero, or a coefficient object as JSON");
  constants->add_option("--kappa", c_kappa, "Energy parameter kappa > 0")->required();
  constants->add_option("--D", c_D, "Highest order");
  constants->add_option("--generator", c_generator, "half_laplacian (default) or laplacian");

  // envelope
  auto* envelope = app.add_subcommand("envelope", "Evaluate an envelope and the integral of its m-th power");
  std::string e_profile = "power";
  double e_param = 0.5;
  double e_n = 1.0;
  double e_t = 0.0;
  double e_T = 1.0;
  int e_m = 2;
  envelope->add_option("--profile", e_profile, "power, log, constant or dc");
  envelope->add_option("--param", e_param, "alpha (power, dc), delta (log) or lambda (constant)");
  envelope->add_option("--n", e_n, "Box length for the dc profile");
  envelope->add_option("--t", e_t, "Evaluation point");
  envelope->add_option("--T", e_T, "Upper integration limit");
  envelope->add_option("--m", e_m, "Power");

  // count
  auto* count = app.add_subcommand("count", "Count eigenvalues in (kappa1^2, kappa2^2) on one seeded path");
  double k_kappa1 = 0.8;
  double k_kappa2 = 1.3;
  double k_n = 100.0;
  double k_alpha = 0.3;
  std::string k_model = "decaying_potential";
  std::string k_F = "cos";
  std::uint64_t k_seed = 0;
  std::uint64_t k_path = 0;
  double k_dt = 1e-3;
  int k_substeps = 1;
  std::string k_trace;
  count->add_option("--kappa1", k_kappa1);
  count->add_option("--kappa2", k_kappa2);
  count->add_option("--n", k_n);
  count->add_option("--alpha", k_alpha);
  count->add_option("--model", k_model, "decaying_potential or dc");
  count->add_option("--F", k_F, "cos, zero, or a coefficient object as JSON");
  count->add_option("--seed", k_seed)->required();
  count->add_option("--path-index", k_path);
  count->add_option("--dt", k_dt);
  count->add_option("--substeps", k_substeps);
  count->add_option("--trace", k_trace, "Write the theta_tilde trace of kappa2 as CSV (t,theta_tilde)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
  std::string x_config;
  std::uint64_t x_seed = 0;
  std::string x_out = ".";
  unsigned x_workers = 0;
  experiment->add_option("--config", x_config, "Config file")->required();
  experiment->add_option("--seed", x_seed, "Experiment seed")->required();
  experiment->add_option("--out", x_out, "Output directory");
  experiment->add_option("--workers", x_workers, "Worker threads (default: DOSFLUCT_WORKERS or all cores)");

  // oracle-compare
  auto* oracle = app.add_subcommand("oracle-compare", "Compare the Pruefer count with a finite-difference inertia count");
  double o_kappa1 = 0.8;
  double o_kappa2 = 1.3;
  double o_n = 100.0;
  double o_alpha = 0.3;
  std::string o_model = "decaying_potential";
  std::string o_F = "cos";
  std::uint64_t o_seed = 0;
  std::uint64_t o_path = 0;
  double o_dt = 1e-3;
  oracle->add_option("--kappa1", o_kappa1);
  oracle->add_option("--kappa2", o_kappa2);
  oracle->add_option("--n", o_n);
  oracle->add_option("--alpha", o_alpha);
  oracle->add_option("--model", o_model);
  oracle->add_option("--F", o_F);
  oracle->add_option("--seed", o_seed)->required();
  oracle->add_option("--path-index", o_path);
  oracle->add_option("--dt", o_dt);

  // subsequence
  auto* subseq = app.add_subcommand("subsequence", "Build box lengths with kappa n mod pi near gamma");
  double s_kappa = 1.0;
  double s_gamma = 0.0;
  std::optional<double> s_kappa2;
  double s_gamma2 = 0.0;
  std::size_t s_count = 10;
  std::int64_t s_nmax = 100000;
  double s_max_error = std::numeric_limits<double>::infinity();
  subseq->add_option("--kappa", s_kappa)->required();
  subseq->add_option("--gamma", s_gamma)->required();
  subseq->add_option("--kappa2", s_kappa2, "Second energy for a joint subsequence");
  subseq->add_option("--gamma2", s_gamma2);
  subseq->add_option("--count", s_count);
  subseq->add_option("--n-max", s_nmax);
  subseq->add_option("--max-error", s_max_error);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*constants) {
      print(constants_json(function_from_flag(c_F), c_kappa, c_D, generator_from_flag(c_generator)));
    } else if (*envelope) {
      EnvelopeProfile p = PowerDecay{e_param};
      if (e_profile == "power") {
        p = PowerDecay{e_param};
      } else if (e_profile == "log") {
        p = LogDecay{e_param};
      } else if (e_profile == "constant") {
        p = Constant{e_param};
      } else if (e_profile == "dc") {
        p = DcCoupling{e_param, e_n};
      } else {
        throw ConfigError("--profile: expected power, log, constant or dc");
      }
      print({{"profile", e_profile},
             {"t", e_t},
             {"value", p.value(e_t)},
             {"m", e_m},
             {"T", e_T},
             {"integral", p.power_integral(e_m, e_T)}});
    } else if (*count) {
      if (!(k_kappa1 < k_kappa2)) throw ConfigError("--kappa1 must be smaller than --kappa2");
      const Potential potential{function_from_flag(k_F), envelope_for_model(k_model, k_alpha, k_n)};
      const TorusPath path = sample_path(k_n, k_dt, {k_seed, k_path});
      const auto t1 = integrate_theta(path, potential, k_kappa1, k_substeps);
      const auto t2 = integrate_theta(path, potential, k_kappa2, k_substeps);
      const CountResult r = count_interval(t1, t2, k_n);
      if (!k_trace.empty()) {
        std::ostringstream csv;
        csv << "t,theta_tilde\n";
        for (std::size_t i = 0; i < t2.theta_tilde.size(); ++i) {
          csv << format_double(t2.h * static_cast<double>(i)) << ',' << format_double(t2.theta_tilde[i]) << '\n';
        }
        write_file(k_trace, csv.str());
      }
      print({{"kappa1", r.kappa1},
             {"kappa2", r.kappa2},
             {"n", r.n},
             {"count", r.count},
             {"floor1", r.floor1},
             {"floor2", r.floor2},
             {"theta_tilde1", theta_tilde_at(t1, k_n)},
             {"theta_tilde2", theta_tilde_at(t2, k_n)},
             {"free_count", floor_pi(k_kappa2 * k_n) - floor_pi(k_kappa1 * k_n)}});
    } else if (*experiment) {
      const auto started = std::chrono::steady_clock::now();
      ExperimentConfig cfg = parse_config(read_file(x_config));
      cfg.seed = x_seed;
      cfg.workers = x_workers;
      const std::string hash = config_hash(cfg);
      const FluctuationSummary summary = run_experiment(cfg);
      const fs::path out(x_out);
      fs::create_directories(out);
      RunManifest manifest;
      manifest.config_hash = hash;
      manifest.seed = cfg.seed;
      write_file(out / "summary.json", summary_to_json(summary, hash).dump(2) + "\n");
      manifest.outputs["summary"] = (out / "summary.json").string();
      if (summary.subsequence) {
        std::ostringstream csv;
        write_subsequence_csv(csv, summary, hash);
        write_file(out / "subsequence.csv", csv.str());
        manifest.outputs["subsequence"] = (out / "subsequence.csv").string();
      } else {
        std::ostringstream samples;
        write_samples_csv(samples, summary, hash);
        write_file(out / "samples.csv", samples.str());
        std::ostringstream plot;
        write_plot_csv(plot, summary, hash);
        write_file(out / "plot.csv", plot.str());
        manifest.outputs["samples"] = (out / "samples.csv").string();
        manifest.outputs["plot"] = (out / "plot.csv").string();
      }
      manifest.wall_clock_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      const json mj = manifest_to_json(manifest);
      write_file(out / "manifest.json", mj.dump(2) + "\n");
      print(mj);
    } else if (*oracle) {
      if (!(o_kappa1 < o_kappa2)) throw ConfigError("--kappa1 must be smaller than --kappa2");
      const Potential potential{function_from_flag(o_F), envelope_for_model(o_model, o_alpha, o_n)};
      const TorusPath path = sample_path(o_n, o_dt, {o_seed, o_path});
      const double E1 = o_kappa1 * o_kappa1;
      const double E2 = o_kappa2 * o_kappa2;
      auto pruefer = [&](int substeps) {
        return count_interval(integrate_theta(path, potential, o_kappa1, substeps),
                              integrate_theta(path, potential, o_kappa2, substeps), o_n)
            .count;
      };
      const long long p1 = pruefer(1);
      const long long f1 = fd_count_interval(path, potential, o_n, path.dt, E1, E2);
      const long long p2 = pruefer(2);
      const long long f2 = fd_count_interval(path, potential, o_n, 0.5 * path.dt, E1, E2);
      const long long d1 = std::abs(p1 - f1);
      const long long d2 = std::abs(p2 - f2);
      print({{"seed", o_seed},
             {"path_index", o_path},
             {"n", o_n},
             {"kappa1", o_kappa1},
             {"kappa2", o_kappa2},
             {"h", path.dt},
             {"pruefer_count", p1},
             {"fd_count", f1},
             {"discrepancy", d1},
             {"refined", {{"h", 0.5 * path.dt}, {"pruefer_count", p2}, {"fd_count", f2}, {"discrepancy", d2}}}});
      if (d1 > 1) throw ConsistencyError("oracle-compare: discrepancy exceeds 1");
    } else if (*subseq) {
      if (s_kappa2) {
        const auto js = build_joint_subsequence(s_kappa, s_gamma, *s_kappa2, s_gamma2, s_count, s_nmax, s_max_error);
        print({{"first", subsequence_json(js.first)}, {"second", subsequence_json(js.second)}});
      } else {
        print(subsequence_json(build_subsequence(s_kappa, s_gamma, s_count, s_nmax, s_max_error)));
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
