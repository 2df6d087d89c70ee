#include "cli.hpp"

#include "aptforge/bounds.hpp"
#include "aptforge/error.hpp"
#include "aptforge/instances.hpp"
#include "aptforge/io.hpp"
#include "aptforge/policy_search.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace aptforge::cli {

namespace {

struct RunConfig {
  std::string env;
  std::string mdp_path;
  double gamma = 0.9;
  double lambda = 1.0;
  double epsilon = 0.1;
  std::string strategy = "constrain-optimize";
  std::string out_path;
  std::uint64_t seed = 0;
  std::int64_t cap = 10000;
  std::string sweep_lambda;
  std::string sweep_epsilon;
  bool gamma_set = false;
};

struct Instance {
  std::string name;
  Mdp mdp;
  AdmissibleSet admissible;
};

struct Grid {
  double a = 0.0;
  double b = 0.0;
  int n = 0;

  std::vector<double> points() const {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
};

Grid parse_grid(const std::string& text, const std::string& flag) {
  Grid g;
  char c1 = 0;
  char c2 = 0;
  std::istringstream in(text);
  if (!(in >> g.a >> c1 >> g.b >> c2 >> g.n) || c1 != ':' || c2 != ':' || g.n < 1 || !in.eof()) {
    throw Error(ErrorCode::BadSpec, flag + " expects a:b:n with n >= 1, got '" + text + "'");
  }
  return g;
}

std::string format(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

Instance load_instance(const RunConfig& cfg) {
  if (!cfg.env.empty() && !cfg.mdp_path.empty()) throw Error(ErrorCode::BadSpec, "--env and --mdp are exclusive");
  if (!cfg.env.empty()) {
    const auto path = std::filesystem::path(data_dir()) / (cfg.env + ".json");
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::BadSpec, "--env: no bundled config " + path.string());
    GridSpec spec = load_grid_spec(path.string());
    if (cfg.gamma_set) spec.gamma = cfg.gamma;
    auto grid = grid_from_config(spec);
    return {cfg.env, std::move(grid.mdp), std::move(grid.admissible)};
  }
  if (!cfg.mdp_path.empty()) {
    auto doc = load_mdp_json(cfg.mdp_path);
    Mdp mdp = doc.mdp;
    if (cfg.gamma_set) {
      auto fields = mdp.fields();
      fields.gamma = cfg.gamma;
      mdp = validate_mdp(std::move(fields));
    }
    auto admissible = doc.admissible ? *doc.admissible : AdmissibleSet::all(mdp.n_states(), mdp.n_actions());
    return {std::filesystem::path(cfg.mdp_path).stem().string(), std::move(mdp), std::move(admissible)};
  }
  throw Error(ErrorCode::BadSpec, "one of --env or --mdp is required");
}

void write_text(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::BadSpec, "--out: cannot write " + cfg.out_path);
  file << text;
}

int design_command(const RunConfig& cfg, std::ostream& out) {
  const auto inst = load_instance(cfg);
  const auto strategy = parse_strategy(cfg.strategy);
  const auto outcome = design(inst.mdp, inst.admissible, strategy, cfg.lambda, cfg.epsilon);
  BoundsOptions options;
  options.mu_min.cap = cfg.cap;
  options.mu_min.seed = cfg.seed;
  const auto bounds = phi_bounds(inst.mdp, inst.admissible, cfg.lambda, cfg.epsilon, outcome, options);
  if (!cfg.out_path.empty()) write_text(cfg, result_to_json(outcome, bounds) + "\n", out);
  out << outcome.strategy << ' ' << format(outcome.objective) << ' ' << format(outcome.cost) << ' '
      << format(outcome.score) << '\n';
  return kExitOk;
}

int sweep_command(const RunConfig& cfg, std::ostream& out) {
  if (cfg.sweep_lambda.empty() == cfg.sweep_epsilon.empty()) {
    throw Error(ErrorCode::BadSpec, "sweep needs exactly one of --sweep-lambda or --sweep-epsilon");
  }
  const bool over_lambda = !cfg.sweep_lambda.empty();
  const Grid grid = over_lambda ? parse_grid(cfg.sweep_lambda, "--sweep-lambda") : parse_grid(cfg.sweep_epsilon, "--sweep-epsilon");
  const auto inst = load_instance(cfg);
  std::ostringstream csv;
  csv << kCsvHeader << '\n';
  for (auto strategy : {Strategy::opt, Strategy::opt_adm, Strategy::qgreedy, Strategy::constrain_optimize}) {
    for (double x : grid.points()) {
      const double lambda = over_lambda ? x : cfg.lambda;
      const double epsilon = over_lambda ? cfg.epsilon : x;
      const auto o = design(inst.mdp, inst.admissible, strategy, lambda, epsilon);
      csv << inst.name << ',' << to_string(strategy) << ',' << format(lambda) << ',' << format(epsilon) << ','
          << format(o.objective) << ',' << format(o.cost) << ',' << format(o.score) << ',' << format(o.phi) << '\n';
    }
  }
  write_text(cfg, csv.str(), out);
  return kExitOk;
}

int generate_command(const std::string& kind, std::uint64_t seed, int states, int actions, bool special, double gamma,
                     const RunConfig& cfg, std::ostream& out) {
  if (kind == "random") {
    RandomMdpOptions options;
    options.special = special;
    options.gamma = gamma;
    write_text(cfg, mdp_to_json(random_mdp(seed, states, actions, options)) + "\n", out);
    return kExitOk;
  }
  const auto path = std::filesystem::path(data_dir()) / (kind + ".json");
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::BadSpec, "generate: unknown kind '" + kind + "'");
  GridSpec spec = load_grid_spec(path.string());
  if (cfg.gamma_set) spec.gamma = gamma;
  const auto grid = grid_from_config(spec);
  write_text(cfg, mdp_to_json(grid.mdp, &grid.admissible) + "\n", out);
  return kExitOk;
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--env", cfg.env, "Bundled environment name");
  cmd->add_option("--mdp", cfg.mdp_path, "MDP JSON file");
  cmd->add_option("--gamma", cfg.gamma, "Discount factor")->each([&](const std::string&) { cfg.gamma_set = true; });
  cmd->add_option("--lambda", cfg.lambda, "Trade-off weight")->capture_default_str();
  cmd->add_option("--epsilon", cfg.epsilon, "Score margin")->capture_default_str();
  cmd->add_option("--out", cfg.out_path, "Output path");
  cmd->add_option("--seed", cfg.seed, "Seed for sampled quantities")->capture_default_str();
  cmd->add_option("--cap", cfg.cap, "Policy enumeration cap")->capture_default_str();
}

}  // namespace

std::string data_dir() {
  if (const char* env = std::getenv("APT_FORGE_DATA"); env != nullptr && *env != '\0') return env;
#ifdef APTFORGE_DEFAULT_DATA_DIR
  return APTFORGE_DEFAULT_DATA_DIR;
#else
  return "data/envs";
#endif
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reward design for admissible policy teaching"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* design_cmd = app.add_subcommand("design", "Design a reward for one strategy");
  add_common(design_cmd, cfg);
  design_cmd->add_option("--strategy", cfg.strategy, "opt | opt-adm | qgreedy | constrain-optimize | special")
      ->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep lambda or epsilon and write CSV");
  add_common(sweep_cmd, cfg);
  sweep_cmd->add_option("--sweep-lambda", cfg.sweep_lambda, "a:b:n");
  sweep_cmd->add_option("--sweep-epsilon", cfg.sweep_epsilon, "a:b:n");

  std::string kind = "random";
  int states = 4;
  int actions = 3;
  bool special = false;
  auto* gen_cmd = app.add_subcommand("generate", "Write an MDP in the JSON schema");
  gen_cmd->add_option("kind", kind, "random or a bundled environment name")->capture_default_str();
  gen_cmd->add_option("--states", states)->capture_default_str();
  gen_cmd->add_option("--actions", actions)->capture_default_str();
  gen_cmd->add_flag("--special", special);
  gen_cmd->add_option("--gamma", cfg.gamma)->each([&](const std::string&) { cfg.gamma_set = true; });
  gen_cmd->add_option("--seed", cfg.seed)->capture_default_str();
  gen_cmd->add_option("--out", cfg.out_path);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (design_cmd->parsed()) return design_command(cfg, out);
    if (sweep_cmd->parsed()) return sweep_command(cfg, out);
    return generate_command(kind, cfg.seed, states, actions, special, cfg.gamma, cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace aptforge::cli
