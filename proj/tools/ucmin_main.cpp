#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ucmin/harness.hpp"

namespace {

using namespace ucmin;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<int> trials;
};

ExperimentConfig load(const std::string& path, const Overrides& ov) {
  ExperimentConfig cfg = parse_config_file(path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.workers) cfg.workers = *ov.workers;
  if (ov.trials) cfg.trials = *ov.trials;
  validate_config(cfg);
  return cfg;
}

std::vector<double> final_gaps_from_traces(const std::string& csv) {
  // last row per trial; f_gap is column 4 (0-based)
  std::vector<double> gaps;
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);  // header
  int last_trial = -1;
  double last_gap = 0.0;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string tok;
    int col = 0;
    int trial = -1;
    double gap = 0.0;
    bool have_gap = false;
    while (std::getline(ls, tok, ',')) {
      if (col == 0) trial = std::stoi(tok);
      if (col == 4 && !tok.empty()) {
        gap = std::stod(tok);
        have_gap = true;
      }
      ++col;
    }
    if (trial != last_trial && last_trial >= 0) gaps.push_back(last_gap);
    if (have_gap) last_gap = gap;
    last_trial = trial;
  }
  if (last_trial >= 0) gaps.push_back(last_gap);
  return gaps;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
  const ExperimentConfig cfg = load(config_path, ov);
  run_experiment(cfg);
  std::printf("run complete: %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig cfg = load(config_path, ov);
  if (cfg.sweep.empty()) {
    std::fprintf(stderr, "sweep: config has no run.sweep list\n");
    return 1;
  }
  cfg.mode = RunMode::FixedBudget;
  run_experiment(cfg);
  std::printf("sweep complete: %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_certify(const std::string& dir) {
  const ExperimentConfig cfg =
      parse_config_text(read_text_file(dir + "/config_resolved.txt"));
  if (cfg.family != ProblemFamily::Saddle) {
    std::fprintf(stderr, "certify: run is not a saddle problem\n");
    return 1;
  }
  ProblemInstance prob = build_problem(cfg);
  auto parse_vec = [&](const std::string& path) {
    std::stringstream ss(read_text_file(path));
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    Vec v(static_cast<Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
  };
  const Vec xhat = parse_vec(dir + "/xhat.txt");
  const Vec wbar = parse_vec(dir + "/wbar.txt");
  const GapCertificate cert =
      certify_gap(*prob.saddle, xhat, wbar, cfg.eps, cfg.rho);
  std::stringstream out;
  out << "eps = " << format_double(cfg.eps) << "\n";
  out << "f_at_xhat = " << format_double(cert.f_at_x) << "\n";
  out << "eta_at_wbar = " << format_double(cert.eta_at_w) << "\n";
  out << "gap = " << format_double(cert.gap) << "\n";
  out << "bound = " << format_double(cert.bound) << "\n";
  out << "pass = " << (cert.pass ? 1 : 0) << "\n";
  write_text_file(dir + "/certify.txt", out.str());
  std::printf("duality gap %.6g vs bound %.6g: %s\n", cert.gap, cert.bound,
              cert.pass ? "PASS" : "FAIL");
  return cert.pass ? 0 : 2;
}

int cmd_coverage(const std::string& dir, double alpha) {
  const ExperimentConfig cfg =
      parse_config_text(read_text_file(dir + "/config_resolved.txt"));
  ProblemInstance prob = build_problem(cfg);
  const AdaptiveLayout layout =
      adaptive_layout(cfg.budget, prob.setup.prox, false);
  if (layout.m < 1) {
    std::fprintf(stderr, "coverage: budget too small for the adaptive layout\n");
    return 1;
  }
  const double cert = adaptive_s_certificate(
      cfg.budget, layout.n0, prob.params.rho, prob.params.mu_f, prob.params.L,
      cfg.sigma, prob.setup.prox, alpha);
  const std::string name = cfg.sweep.empty()
                               ? "traces.csv"
                               : "traces_" + std::to_string(cfg.budget) + ".csv";
  const std::vector<double> gaps =
      final_gaps_from_traces(read_text_file(dir + "/" + name));
  const CoverageResult cov = coverage_check(gaps, cert, alpha);
  std::stringstream out;
  out << "alpha = " << format_double(alpha) << "\n";
  out << "certificate = " << format_double(cert) << "\n";
  out << "trials = " << gaps.size() << "\n";
  out << "violations = " << cov.violations << "\n";
  out << "rate = " << format_double(cov.rate) << "\n";
  out << "threshold = " << format_double(cov.threshold) << "\n";
  out << "pass = " << (cov.pass ? 1 : 0) << "\n";
  write_text_file(dir + "/coverage.txt", out.str());
  std::printf("violation rate %.4f vs threshold %.4f: %s\n", cov.rate,
              cov.threshold, cov.pass ? "PASS" : "FAIL");
  return cov.pass ? 0 : 2;
}

int cmd_plot(const std::string& dir) {
  std::string csv;
  try {
    csv = read_text_file(dir + "/sweep.csv");
  } catch (const std::exception&) {
    std::fprintf(stderr, "plot: no sweep.csv in %s (empty sweep?)\n",
                 dir.c_str());
    return 1;
  }
  std::vector<SweepPoint> pts;
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    pts.push_back({std::stoll(a), std::stod(b), std::stod(c)});
  }
  if (pts.empty()) {
    std::fprintf(stderr, "plot: sweep.csv has no rows\n");
    return 1;
  }
  emit_plots(pts, dir);
  std::printf("wrote %s/plot.svg\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual subgradient methods for uniformly convex problems"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, run_dir;
  double alpha = 0.1;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", ov.seed, "master seed override");
    cmd->add_option("--out", ov.out, "output directory override");
    cmd->add_option("--workers", ov.workers, "parallel trial workers");
    cmd->add_option("--trials", ov.trials, "trial count override");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config_path, "config file")->required();
  add_overrides(run);

  CLI::App* sweep = app.add_subcommand("sweep", "run the budget sweep");
  sweep->add_option("config", config_path, "config file")->required();
  add_overrides(sweep);

  CLI::App* certify =
      app.add_subcommand("certify", "duality-gap certificate for a run");
  certify->add_option("dir", run_dir, "run directory")->required();

  CLI::App* coverage =
      app.add_subcommand("coverage", "confidence coverage of a run");
  coverage->add_option("dir", run_dir, "run directory")->required();
  coverage->add_option("--alpha", alpha, "confidence level");

  CLI::App* plot = app.add_subcommand("plot", "render the sweep plot");
  plot->add_option("dir", run_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, ov);
    if (sweep->parsed()) return cmd_sweep(config_path, ov);
    if (certify->parsed()) return cmd_certify(run_dir);
    if (coverage->parsed()) return cmd_coverage(run_dir, alpha);
    if (plot->parsed()) return cmd_plot(run_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
