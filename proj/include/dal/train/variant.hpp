#pragma once

#include <string>

#include "dal/core/errors.hpp"

namespace dal::train {

// Ablation ladder. Each variant adds one mechanism on top of the previous:
//   baseline   - uniform replay, bare policy
//   fsm_replay - mode-balanced replay sampling
//   diffusion  - + runtime diffusion shield
//   full       - + learnable attention mask + expert relabeling on interventions
struct Variant {
  std::string name;
  bool balanced = false;
  bool dal = false;
  bool lam = false;
  bool saec = false;
};

inline Variant variant_from_name(const std::string& name) {
  if (name == "baseline") return {name, false, false, false, false};
  if (name == "fsm_replay") return {name, true, false, false, false};
  if (name == "diffusion") return {name, true, true, false, false};
  if (name == "full") return {name, true, true, true, true};
  throw ConfigError("unknown variant: " + name +
                    " (expected baseline|fsm_replay|diffusion|full)");
}

}  // namespace dal::train
