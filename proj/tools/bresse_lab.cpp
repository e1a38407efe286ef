#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bresse/config.hpp"
#include "bresse/scenario.hpp"

namespace {

void print_params(const bresse::ParamMap& p) {
  for (const auto& [k, v] : p) std::cout << " " << k << "=" << v;
  std::cout << "\n";
}

int catalog() {
  std::cout << "damping laws g(s):\n";
  const char* damp_forms[] = {"slope * s", "slope * s + tanh_weight * tanh(s)"};
  int i = 0;
  for (const auto& name : bresse::DampingLaw::catalog()) {
    std::cout << "  " << name << "  g(s) = " << damp_forms[i++] << "  defaults:";
    print_params(bresse::DampingLaw::from_catalog(name).params());
  }
  std::cout << "sources F(U), U = (phi, psi, w):\n";
  const char* src_forms[] = {"0", "e . U", "coef |U|^2", "kappa |U|^(p+1) / (p+1)",
                             "lambda/4 |U|^4 - mu/2 |U|^2"};
  i = 0;
  for (const auto& name : bresse::Source::catalog()) {
    std::cout << "  " << name << "  F = " << src_forms[i++] << "  defaults:";
    print_params(bresse::Source::from_catalog(name).params());
  }
  std::cout << "scenarios:";
  for (const auto& s : bresse::scenario_kinds()) std::cout << " " << s;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bresse beam simulation lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run the scenario described by a config file");
  run->add_option("config", config_path, "YAML config")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "override the output directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "parse and validate a config file");
  validate->add_option("config", validate_path, "YAML config")->required()->check(CLI::ExistingFile);

  app.add_subcommand("catalog", "list damping laws, sources and scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = bresse::load_config(config_path);
      if (*seed_opt) cfg.seed = seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const auto res = bresse::run_scenario(cfg, cfg.output_dir);
      if (res.exit_code != 0) {
        std::cerr << "run failed, see " << cfg.output_dir << "/error.json\n";
        return res.exit_code;
      }
      std::cout << res.summary.dump(2) << "\n";
      return 0;
    }
    if (*validate) {
      const auto cfg = bresse::load_config(validate_path);
      std::cout << "ok: scenario " << cfg.scenario << ", " << cfg.beam.label() << "\n";
      return 0;
    }
    return catalog();
  } catch (const bresse::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
