#include "aptforge/enumeration.hpp"

#include "aptforge/error.hpp"

#include <limits>
#include <string>

namespace aptforge {

namespace {

constexpr std::int64_t kSaturated = std::numeric_limits<std::int64_t>::max();

std::int64_t saturating_mul(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

}  // namespace

std::int64_t policy_count(int n_states, int n_actions) {
  std::int64_t count = 1;
  for (int s = 0; s < n_states; ++s) count = saturating_mul(count, n_actions);
  return count;
}

PolicyEnumeration::PolicyEnumeration(std::vector<std::vector<int>> choices, std::int64_t cap)
    : choices_(std::move(choices)) {
  count_ = 1;
  for (const auto& c : choices_) count_ = saturating_mul(count_, static_cast<std::int64_t>(c.size()));
  if (count_ > cap) {
    throw Error(ErrorCode::TooManyPolicies,
                (count_ == kSaturated ? std::string("overflowing count") : std::to_string(count_)) + " policies exceed cap " +
                    std::to_string(cap));
  }
}

PolicyEnumeration PolicyEnumeration::all(const Mdp& mdp, std::int64_t cap) {
  std::vector<int> every(static_cast<size_t>(mdp.n_actions()));
  for (int a = 0; a < mdp.n_actions(); ++a) every[static_cast<size_t>(a)] = a;
  return PolicyEnumeration(std::vector<std::vector<int>>(static_cast<size_t>(mdp.n_states()), every), cap);
}

}  // namespace aptforge
