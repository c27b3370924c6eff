#include "yamabe/cli.hpp"
#include "yamabe/io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::optional<int> n;
  std::string config, out, geometry, profile, grid, delta_sweep, omega, epsilon_bar;
  std::optional<std::uint64_t> seed;
  bool csv = false, check = false;
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string item = s.substr(pos, comma - pos);
    std::size_t used = 0;
    const double x = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    v.push_back(x);
    pos = comma + 1;
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the perturbed boundary Yamabe problem"};
  app.require_subcommand(1);
  Flags f;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"integrals", "CSV table of the I_m^alpha integrals used for dimension n"},
      {"bubble", "residual report for the bubble and its kernel fields"},
      {"gamma", "solve the correction profile and write the profile artifact"},
      {"pohozaev", "evaluate P, P_hat and the I1/I2/I3 split for a configured field"},
      {"landscape", "reduced functional over a boundary geometry"},
      {"classify", "compact / blow-up verdict for a boundary geometry"},
      {"verify-all", "run every invariant suite"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--n", f.n, "dimension (>= 7)");
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--geometry", f.geometry, "boundary geometry JSON")->check(CLI::ExistingFile);
    sub->add_option("--profile", f.profile, "gamma profile artifact");
    sub->add_option("--grid", f.grid, "grid spec NSxNT[:FAR[:GRADING]]");
    sub->add_option("--delta-sweep", f.delta_sweep, "comma separated, strictly decreasing deltas");
    sub->add_option("--epsilon-bar", f.epsilon_bar, "comma separated values in (0, 1]");
    sub->add_option("--omega-convention", f.omega, "printed | corrected")
        ->check(CLI::IsMember({"printed", "corrected"}));
    sub->add_flag("--csv", f.csv, "also write plot-ready CSV");
    sub->add_flag("--check", f.check, "exit with status 1 when the residuals exceed tolerance");
  }
  CLI11_PARSE(app, argc, argv);

  using namespace yamabe;
  try {
    cli::RunConfig cfg;
    if (!f.config.empty()) cfg = cli::load_run_config(f.config);
    if (f.n) cfg.n = f.n;
    if (!f.out.empty()) cfg.out = f.out;
    if (f.seed) cfg.seed = *f.seed;
    if (!f.geometry.empty()) cfg.geometry = f.geometry;
    if (!f.profile.empty()) cfg.profile = f.profile;
    if (!f.grid.empty()) cfg.grid = GridSpec::parse(f.grid);
    if (!f.delta_sweep.empty()) cfg.delta_sweep = parse_list(f.delta_sweep);
    if (!f.epsilon_bar.empty()) cfg.epsilon_bar = parse_list(f.epsilon_bar);
    if (!f.omega.empty()) cfg.omega = parse_omega_convention(f.omega);
    cfg.csv = cfg.csv || f.csv;
    cfg.check = f.check;
    if (!cfg.n && cfg.geometry) cfg.n = load_geometry(*cfg.geometry).n;
    return cli::run(cli::parse_command(app.get_subcommands().front()->get_name()), cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
