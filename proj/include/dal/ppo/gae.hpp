#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace dal::ppo {

// Generalized advantage estimation over one rollout window.
//   delta_t = r_t + gamma * (1 - done_t) * V_{t+1} - V_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// `bootstrap` stands in for V at the step past the window end; a done flag
// cuts both the bootstrap and the recursion. returns = advantages + values.
inline std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<char>& dones, double bootstrap, double gamma,
    double lambda) {
  const size_t n = rewards.size();
  std::vector<double> adv(n, 0.0), ret(n, 0.0);
  double acc = 0.0;
  for (size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double v_next = (i + 1 < n) ? values[i + 1] : bootstrap;
    const double delta = rewards[i] + gamma * not_done * v_next - values[i];
    acc = delta + gamma * lambda * not_done * acc;
    adv[i] = acc;
    ret[i] = acc + values[i];
  }
  return {std::move(adv), std::move(ret)};
}

}  // namespace dal::ppo
