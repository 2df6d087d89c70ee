#include "aptforge/instances.hpp"

#include "aptforge/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace aptforge {

namespace {

using json = nlohmann::json;

Mdp placeholder_mdp() {
  return validate_mdp({1, 1, {Eigen::MatrixXd::Ones(1, 1)}, RewardTable::Zero(1, 1), 0.0, Eigen::VectorXd::Ones(1)});
}

Eigen::VectorXd sparse_dirichlet(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution keep(density);
  std::exponential_distribution<double> weight(1.0);
  std::uniform_int_distribution<int> any(0, n - 1);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (keep(rng)) row(i) = weight(rng);
  }
  if (row.sum() <= 0.0) row(any(rng)) = 1.0;
  return row / row.sum();
}

}  // namespace

Mdp random_mdp(std::uint64_t seed, int n_states, int n_actions, const RandomMdpOptions& options) {
  if (n_states < 1 || n_actions < 1) throw Error(ErrorCode::BadShape, "random_mdp needs at least one state and action");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> reward(options.reward_low, options.reward_high);
  MdpFields f;
  f.n_states = n_states;
  f.n_actions = n_actions;
  f.gamma = options.gamma;
  f.transitions.assign(static_cast<size_t>(n_actions), Eigen::MatrixXd::Zero(n_states, n_states));
  for (int s = 0; s < n_states; ++s) {
    Eigen::VectorXd shared;
    if (options.special) shared = sparse_dirichlet(rng, n_states, options.density);
    for (int a = 0; a < n_actions; ++a) {
      f.transitions[static_cast<size_t>(a)].row(s) =
          options.special ? shared.transpose() : sparse_dirichlet(rng, n_states, options.density).transpose();
    }
  }
  f.base_reward.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) f.base_reward(s, a) = reward(rng);
  }
  f.initial_dist = sparse_dirichlet(rng, n_states, options.sigma_density);
  return validate_mdp(std::move(f));
}

AdmissibleSet random_admissible(std::uint64_t seed, int n_states, int n_actions, double density, double keep_nonempty) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution admit(density);
  std::bernoulli_distribution fill(keep_nonempty);
  std::uniform_int_distribution<int> any(0, n_actions - 1);
  AdmissibleSet mask = AdmissibleSet::none(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) mask.set(s, a, admit(rng));
    if (mask.empty(s) && fill(rng)) mask.set(s, any(rng), true);
  }
  return mask;
}

// ---------------------------------------------------------------- grids

std::string to_string(Direction d) {
  switch (d) {
    case Direction::up: return "up";
    case Direction::down: return "down";
    case Direction::left: return "left";
    case Direction::right: return "right";
  }
  return "?";
}

Direction parse_direction(const std::string& name) {
  for (auto d : {Direction::up, Direction::down, Direction::left, Direction::right}) {
    if (to_string(d) == name) return d;
  }
  throw Error(ErrorCode::BadSpec, "unknown direction '" + name + "'");
}

namespace {

CellKind kind_of(char c, int r, int col) {
  switch (c) {
    case 'S': return CellKind::start;
    case 'G': return CellKind::goal;
    case '#': return CellKind::blocked;
    case 'C': return CellKind::cliff;
    case 'g': return CellKind::grass;
    case 'm': return CellKind::mud;
    case '.': return CellKind::ordinary;
    default:
      if (c >= '1' && c <= '9') return CellKind::goal;
  }
  throw Error(ErrorCode::BadSpec, "unknown cell kind '" + std::string(1, c) + "' at (" + std::to_string(r) + ", " +
                                      std::to_string(col) + ")");
}

CellKind parse_kind(const std::string& name) {
  static const std::map<std::string, CellKind> names{{"start", CellKind::start}, {"goal", CellKind::goal},
                                                     {"blocked", CellKind::blocked}, {"cliff", CellKind::cliff},
                                                     {"grass", CellKind::grass}, {"mud", CellKind::mud},
                                                     {"ordinary", CellKind::ordinary}};
  auto it = names.find(name);
  if (it == names.end()) throw Error(ErrorCode::BadSpec, "unknown cell kind '" + name + "'");
  return it->second;
}

std::pair<int, int> step(int r, int c, Direction d) {
  switch (d) {
    case Direction::up: return {r - 1, c};
    case Direction::down: return {r + 1, c};
    case Direction::left: return {r, c - 1};
    case Direction::right: return {r, c + 1};
  }
  return {r, c};
}

std::pair<int, int> read_cell(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::BadSpec, what + ": cell must be [row, col]");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

GridSpec parse_grid_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("grid config: ") + e.what());
  }
  GridSpec spec;
  try {
    spec.name = j.value("name", std::string("grid"));
    spec.gamma = j.value("gamma", 0.9);
    if (!j.contains("cells")) throw Error(ErrorCode::BadSpec, "grid config: missing 'cells'");
    spec.cells = j.at("cells").get<std::vector<std::string>>();
    if (j.contains("actions")) {
      spec.actions.clear();
      for (const auto& a : j.at("actions")) spec.actions.push_back(parse_direction(a.get<std::string>()));
    }
    if (j.contains("rewards")) {
      const auto& r = j.at("rewards");
      spec.step_reward = r.value("step", spec.step_reward);
      spec.goal_reward = r.value("goal", spec.goal_reward);
      spec.grass_reward = r.value("grass", spec.grass_reward);
      spec.mud_reward = r.value("mud", spec.mud_reward);
      if (r.contains("goals")) {
        for (const auto& [label, value] : r.at("goals").items()) {
          if (label.size() != 1 || label[0] < '1' || label[0] > '9') {
            throw Error(ErrorCode::BadSpec, "grid config: goal label '" + label + "' must be a digit 1-9");
          }
          spec.goal_rewards[label[0]] = value.get<double>();
        }
      }
    }
    if (j.contains("slips")) {
      for (const auto& s : j.at("slips")) {
        Slip slip;
        std::tie(slip.row, slip.col) = read_cell(s.at("cell"), "slip");
        slip.action = parse_direction(s.at("action").get<std::string>());
        slip.actual = parse_direction(s.at("actual").get<std::string>());
        slip.probability = s.at("probability").get<double>();
        spec.slips.push_back(slip);
      }
    }
    if (j.contains("inadmissible_kinds")) {
      for (const auto& k : j.at("inadmissible_kinds")) spec.inadmissible_kinds.push_back(parse_kind(k.get<std::string>()));
    }
    if (j.contains("inadmissible_moves")) {
      for (const auto& m : j.at("inadmissible_moves")) {
        ForbiddenMove move;
        std::tie(move.row, move.col) = read_cell(m.at("cell"), "inadmissible move");
        move.action = parse_direction(m.at("action").get<std::string>());
        spec.inadmissible_moves.push_back(move);
      }
    }
    const std::string absent = j.value("absent_actions", std::string("penalty"));
    if (absent == "penalty") {
      spec.absent = AbsentActions::penalty;
    } else if (absent == "stay") {
      spec.absent = AbsentActions::stay;
    } else {
      throw Error(ErrorCode::BadSpec, "grid config: absent_actions must be 'penalty' or 'stay'");
    }
    if (j.contains("absent_reward")) spec.absent_reward = j.at("absent_reward").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadSpec, std::string("grid config: ") + e.what());
  }
  return spec;
}

GridSpec load_grid_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open grid config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid_spec(buf.str());
}

GridInstance grid_from_config(const GridSpec& spec) {
  const int rows = static_cast<int>(spec.cells.size());
  if (rows == 0) throw Error(ErrorCode::BadSpec, "grid has no rows");
  const int cols = static_cast<int>(spec.cells[0].size());
  if (spec.actions.empty()) throw Error(ErrorCode::BadSpec, "grid has no actions");

  GridInstance g{placeholder_mdp()};
  g.state_of.assign(static_cast<size_t>(rows), std::vector<int>(static_cast<size_t>(cols), -1));
  int starts = 0;
  int goals = 0;
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(spec.cells[static_cast<size_t>(r)].size()) != cols) {
      throw Error(ErrorCode::BadSpec, "row " + std::to_string(r) + " has a different width");
    }
    for (int c = 0; c < cols; ++c) {
      const char code = spec.cells[static_cast<size_t>(r)][static_cast<size_t>(c)];
      const CellKind kind = kind_of(code, r, c);
      if (kind == CellKind::blocked) continue;
      if (kind == CellKind::start) {
        ++starts;
        g.start = static_cast<int>(g.kind.size());
      }
      if (kind == CellKind::goal) {
        ++goals;
        if (code != 'G' && !spec.goal_rewards.count(code)) {
          throw Error(ErrorCode::BadSpec, "goal '" + std::string(1, code) + "' at (" + std::to_string(r) + ", " +
                                              std::to_string(c) + ") has no reward");
        }
      }
      g.state_of[static_cast<size_t>(r)][static_cast<size_t>(c)] = static_cast<int>(g.kind.size());
      g.cell_of.emplace_back(r, c);
      g.kind.push_back(kind);
      g.code.push_back(code);
    }
  }
  if (starts != 1) throw Error(ErrorCode::BadSpec, "grid needs exactly one start, found " + std::to_string(starts));
  if (goals < 1) throw Error(ErrorCode::BadSpec, "grid needs at least one goal");

  auto state_at = [&](int r, int c) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return -1;
    return g.state_of[static_cast<size_t>(r)][static_cast<size_t>(c)];
  };
  for (const auto& slip : spec.slips) {
    if (state_at(slip.row, slip.col) < 0) {
      throw Error(ErrorCode::BadSpec, "slip at (" + std::to_string(slip.row) + ", " + std::to_string(slip.col) +
                                          ") is not a state");
    }
    if (!(slip.probability >= 0.0 && slip.probability <= 1.0)) {
      throw Error(ErrorCode::BadSpec, "slip probability at (" + std::to_string(slip.row) + ", " +
                                          std::to_string(slip.col) + ") outside [0, 1]");
    }
  }

  const int S = static_cast<int>(g.kind.size());
  const int A = static_cast<int>(spec.actions.size());
  auto reward_of = [&](int s) {
    switch (g.kind[static_cast<size_t>(s)]) {
      case CellKind::goal: {
        const char code = g.code[static_cast<size_t>(s)];
        return code == 'G' ? spec.goal_reward : spec.goal_rewards.at(code);
      }
      case CellKind::grass: return spec.grass_reward;
      case CellKind::mud: return spec.mud_reward;
      default: return spec.step_reward;
    }
  };
  double r_min = spec.step_reward;
  double r_max = spec.step_reward;
  for (int s = 0; s < S; ++s) {
    r_min = std::min(r_min, reward_of(s));
    r_max = std::max(r_max, reward_of(s));
  }
  const double absent_reward =
      spec.absent_reward.value_or(r_min - (r_max - r_min + 1.0) * (2.0 / (1.0 - spec.gamma) + 1.0));

  MdpFields f;
  f.n_states = S;
  f.n_actions = A;
  f.gamma = spec.gamma;
  f.transitions.assign(static_cast<size_t>(A), Eigen::MatrixXd::Zero(S, S));
  f.base_reward = RewardTable::Zero(S, A);
  f.initial_dist = Eigen::VectorXd::Zero(S);
  f.initial_dist(g.start) = 1.0;
  g.admissible = AdmissibleSet::all(S, A);
  g.absent = ActionMask::none(S, A);

  for (int s = 0; s < S; ++s) {
    const auto [r, c] = g.cell_of[static_cast<size_t>(s)];
    const double base = reward_of(s);
    int first_real = -1;
    if (g.kind[static_cast<size_t>(s)] == CellKind::goal) {
      f.transitions[0](s, g.start) = 1.0;
      f.base_reward(s, 0) = base;
      first_real = 0;
      for (int a = 1; a < A; ++a) g.absent.set(s, a, true);
    } else {
      for (int a = 0; a < A; ++a) {
        const Direction d = spec.actions[static_cast<size_t>(a)];
        const auto [tr, tc] = step(r, c, d);
        const int target = state_at(tr, tc);
        if (target < 0) {
          g.absent.set(s, a, true);
          continue;
        }
        if (first_real < 0) first_real = a;
        double remaining = 1.0;
        for (const auto& slip : spec.slips) {
          if (slip.row != r || slip.col != c || slip.action != d) continue;
          const auto [sr, sc] = step(r, c, slip.actual);
          const int slipped = state_at(sr, sc);
          f.transitions[static_cast<size_t>(a)](s, slipped < 0 ? s : slipped) += slip.probability;
          remaining -= slip.probability;
        }
        if (remaining < -1e-12) {
          throw Error(ErrorCode::BadSpec, "slip probabilities at (" + std::to_string(r) + ", " + std::to_string(c) +
                                              ") exceed 1");
        }
        f.transitions[static_cast<size_t>(a)](s, target) += std::max(remaining, 0.0);
        f.base_reward(s, a) = base;
        const CellKind dest = g.kind[static_cast<size_t>(target)];
        if (std::find(spec.inadmissible_kinds.begin(), spec.inadmissible_kinds.end(), dest) !=
            spec.inadmissible_kinds.end()) {
          g.admissible.set(s, a, false);
        }
        for (const auto& m : spec.inadmissible_moves) {
          if (m.row == r && m.col == c && m.action == d) g.admissible.set(s, a, false);
        }
      }
      if (first_real < 0) {
        throw Error(ErrorCode::BadSpec, "cell (" + std::to_string(r) + ", " + std::to_string(c) + ") has no moves");
      }
    }
    for (int a = 0; a < A; ++a) {
      if (!g.absent(s, a)) continue;
      const bool goal = g.kind[static_cast<size_t>(s)] == CellKind::goal;
      if (spec.absent == AbsentActions::penalty) {
        f.transitions[static_cast<size_t>(a)].row(s) = f.transitions[static_cast<size_t>(first_real)].row(s);
        f.base_reward(s, a) = absent_reward;
        g.admissible.set(s, a, false);
      } else if (goal) {
        f.transitions[static_cast<size_t>(a)].row(s) = f.transitions[static_cast<size_t>(first_real)].row(s);
        f.base_reward(s, a) = base;
      } else {
        f.transitions[static_cast<size_t>(a)](s, s) = 1.0;
        f.base_reward(s, a) = base;
      }
    }
  }
  g.mdp = validate_mdp(std::move(f));
  return g;
}

// ---------------------------------------------------------------- X3C

double x3c_full_copies(const X3cInstance& instance, double gamma, double p) {
  const double k = instance.k;
  const double l = static_cast<double>(instance.subsets.size());
  const double ratio = 9.0 * l / gamma;
  const double phi = std::pow(6.0 * k * ratio * ratio * (3.0 * k + l + 5.0) * (l + 1.0), 1.0 / p);
  return std::ceil(3.0 * k * std::pow(phi, 1.0 - p) * ratio * ratio);
}

namespace {

void check_instance(const X3cInstance& instance) {
  if (instance.k < 1) throw Error(ErrorCode::BadSpec, "X3C needs k >= 1");
  const int n = 3 * instance.k;
  for (size_t j = 0; j < instance.subsets.size(); ++j) {
    const auto& subset = instance.subsets[j];
    if (subset.size() != 3) {
      throw Error(ErrorCode::SubsetArityError, "subset " + std::to_string(j + 1) + " has " +
                                                   std::to_string(subset.size()) + " elements");
    }
    const std::set<int> distinct(subset.begin(), subset.end());
    if (distinct.size() != 3) {
      throw Error(ErrorCode::SubsetArityError, "subset " + std::to_string(j + 1) + " repeats an element");
    }
    for (int e : subset) {
      if (e < 1 || e > n) {
        throw Error(ErrorCode::BadSpec, "subset " + std::to_string(j + 1) + " names element " + std::to_string(e) +
                                            " outside 1.." + std::to_string(n));
      }
    }
  }
  if (static_cast<int>(instance.subsets.size()) < instance.k) {
    throw Error(ErrorCode::BadSpec, "X3C needs at least k subsets");
  }
}

}  // namespace

X3cReduction x3c_reduction(const X3cInstance& instance, double epsilon, double gamma, double p,
                           std::optional<std::int64_t> n_override) {
  check_instance(instance);
  if (!(epsilon > 0.0)) throw Error(ErrorCode::BadSpec, "epsilon must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::BadDiscount, "gamma must lie in (0, 1)");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::BadSpec, "p must lie in (0, 1)");

  const int k = instance.k;
  const int l = static_cast<int>(instance.subsets.size());
  const double ratio = 9.0 * l / gamma;

  X3cReduction red{placeholder_mdp()};
  red.instance = instance;
  red.epsilon = epsilon;
  red.gamma = gamma;
  red.p = p;
  red.phi = std::pow(6.0 * k * ratio * ratio * (3.0 * k + l + 5.0) * (l + 1.0), 1.0 / p);
  const double full = x3c_full_copies(instance, gamma, p);
  const double n_copies = n_override ? static_cast<double>(*n_override) : full;
  if (n_override && *n_override < 1) throw Error(ErrorCode::BadSpec, "copy count must be positive");
  const double per_copy = 3.0 * k + 3.0;
  const double total = 2.0 + n_copies * per_copy + l;
  if (!(total <= kMaxReductionStates)) {
    throw Error(ErrorCode::InstanceTooLarge, "reduction needs " + std::to_string(total) + " states (N = " +
                                                 std::to_string(n_copies) + "); pass a copy-count override");
  }
  const int N = static_cast<int>(n_copies);
  red.n_copies = N;
  red.m = (3.0 * k + 1.0) * N;
  red.delta = gamma * gamma / (8.0 * red.m * l);
  red.xi = std::sqrt(static_cast<double>(k));
  const double lift = (red.m / gamma) * (epsilon / (1.0 - gamma) + red.delta);
  red.x = lift - gamma;
  red.y = gamma * k / l + lift;

  int next = 0;
  red.s0 = next++;
  red.element_state.assign(static_cast<size_t>(N), std::vector<int>(static_cast<size_t>(3 * k)));
  for (int c = 0; c < N; ++c) {
    for (int i = 0; i < 3 * k; ++i) red.element_state[static_cast<size_t>(c)][static_cast<size_t>(i)] = next++;
    red.star_state.push_back(next++);
    red.tilde0_state.push_back(next++);
    red.tilde1_state.push_back(next++);
  }
  for (int j = 0; j < l; ++j) red.subset_state.push_back(next++);
  red.final_state = next++;

  const int S = next;
  const int A = l + 1;
  MdpFields f;
  f.n_states = S;
  f.n_actions = A;
  f.gamma = gamma;
  f.transitions.assign(static_cast<size_t>(A), Eigen::MatrixXd::Zero(S, S));
  f.base_reward = RewardTable::Zero(S, A);
  f.initial_dist = Eigen::VectorXd::Zero(S);
  f.initial_dist(red.s0) = 1.0;
  red.admissible = AdmissibleSet::all(S, A);

  auto single = [&](int s, int target) {
    for (int a = 0; a < A; ++a) f.transitions[static_cast<size_t>(a)](s, target) = 1.0;
  };
  const double spread = 1.0 / red.m;
  for (int a = 0; a < A; ++a) {
    for (int c = 0; c < N; ++c) {
      for (int s : red.element_state[static_cast<size_t>(c)]) f.transitions[static_cast<size_t>(a)](red.s0, s) = spread;
      f.transitions[static_cast<size_t>(a)](red.s0, red.star_state[static_cast<size_t>(c)]) = spread;
    }
  }
  for (int c = 0; c < N; ++c) {
    for (int i = 0; i < 3 * k; ++i) {
      const int s = red.element_state[static_cast<size_t>(c)][static_cast<size_t>(i)];
      f.transitions[X3cReduction::kDagger](s, red.tilde0_state[static_cast<size_t>(c)]) = 1.0;
      red.admissible.set(s, X3cReduction::kDagger, false);
      int first = -1;
      for (int j = 1; j <= l; ++j) {
        const auto& subset = instance.subsets[static_cast<size_t>(j - 1)];
        if (std::find(subset.begin(), subset.end(), i + 1) == subset.end()) continue;
        if (first < 0) first = j;
        f.transitions[static_cast<size_t>(j)](s, red.subset_state[static_cast<size_t>(j - 1)]) = 1.0;
        f.base_reward(s, j) = red.x;
      }
      for (int j = 1; j <= l; ++j) {
        if (f.transitions[static_cast<size_t>(j)].row(s).sum() > 0.0) continue;
        const int source = first < 0 ? X3cReduction::kDagger : first;
        f.transitions[static_cast<size_t>(j)].row(s) = f.transitions[static_cast<size_t>(source)].row(s);
        f.base_reward(s, j) = f.base_reward(s, source);
        red.admissible.set(s, j, red.admissible(s, source));
      }
    }
    const int star = red.star_state[static_cast<size_t>(c)];
    for (int j = 0; j < l; ++j) f.transitions[X3cReduction::kDagger](star, red.subset_state[static_cast<size_t>(j)]) = 1.0 / l;
    red.admissible.set(star, X3cReduction::kDagger, false);
    for (int j = 1; j <= l; ++j) {
      f.transitions[static_cast<size_t>(j)](star, red.tilde1_state[static_cast<size_t>(c)]) = 1.0;
      f.base_reward(star, j) = red.y;
    }
    single(red.tilde0_state[static_cast<size_t>(c)], red.final_state);
    single(red.tilde1_state[static_cast<size_t>(c)], red.final_state);
  }
  for (int s : red.subset_state) single(s, red.final_state);
  single(red.final_state, red.s0);

  red.mdp = validate_mdp(std::move(f));
  return red;
}

bool is_exact_cover(const X3cInstance& instance, const std::vector<int>& cover) {
  std::vector<int> hits(static_cast<size_t>(3 * instance.k + 1), 0);
  for (int j : cover) {
    if (j < 1 || j > static_cast<int>(instance.subsets.size())) return false;
    for (int e : instance.subsets[static_cast<size_t>(j - 1)]) ++hits[static_cast<size_t>(e)];
  }
  return std::all_of(hits.begin() + 1, hits.end(), [](int h) { return h == 1; });
}

RewardTable x3c_yes_certificate(const X3cReduction& reduction, const std::vector<int>& cover) {
  if (!is_exact_cover(reduction.instance, cover)) throw Error(ErrorCode::NotAnExactCover, "subsets do not partition the elements");
  RewardTable r = reduction.mdp.base_reward();
  for (int j : cover) r(reduction.subset_state[static_cast<size_t>(j - 1)], 0) = 1.0;
  return r;
}

}  // namespace aptforge
