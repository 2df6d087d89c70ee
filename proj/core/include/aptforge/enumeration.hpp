#pragma once

#include "aptforge/mdp.hpp"

#include <cstdint>
#include <vector>

namespace aptforge {

/// Saturating |A|^|S|.
std::int64_t policy_count(int n_states, int n_actions);

/// Odometer over deterministic policies, each state ranging over its own
/// action list. The count is checked against a cap at construction.
class PolicyEnumeration {
 public:
  PolicyEnumeration(std::vector<std::vector<int>> choices, std::int64_t cap);

  /// Every action at every state.
  static PolicyEnumeration all(const Mdp& mdp, std::int64_t cap);

  std::int64_t count() const noexcept { return count_; }

  /// Calls `visit(const DetPolicy&)` for each policy in lexicographic order
  /// (state 0 varies slowest).
  template <typename Visit>
  void for_each(Visit&& visit) const {
    if (count_ == 0) return;
    const size_t S = choices_.size();
    std::vector<size_t> digit(S, 0);
    DetPolicy policy = DetPolicy::constant(static_cast<int>(S), 0);
    for (size_t s = 0; s < S; ++s) policy.actions[s] = choices_[s][0];
    while (true) {
      visit(static_cast<const DetPolicy&>(policy));
      size_t s = S;
      while (s > 0) {
        --s;
        if (++digit[s] < choices_[s].size()) {
          policy.actions[s] = choices_[s][digit[s]];
          break;
        }
        digit[s] = 0;
        policy.actions[s] = choices_[s][0];
        if (s == 0) return;
      }
      if (S == 0) return;
    }
  }

 private:
  std::vector<std::vector<int>> choices_;
  std::int64_t count_ = 0;
};

}  // namespace aptforge
