#include <map>

#include <fmt/format.h>

#include "stratlearn/experiment.hpp"

namespace stratlearn {

namespace {

// Frozen experiment definitions, format version 1. Changing any value here
// changes the reproduced figures; bump the version comment when doing so.
const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> table = {
      {"fig1-cusp", R"(# preset fig1-cusp, version 1
# Projected loss gradients on the cusp x0^2 + x1^3 = level and its smooth deformations.
[experiment]
name = fig1-cusp
model = cusp
levels = 0, 0.05, 0.2
quiver_points = 15
cusp_target = 1, -1
)"},
      {"fig5a", R"(# preset fig5a, version 1
# Three fixed initializations, one target on the same nappe; GD on cone vs. hyperboloid.
# Init 2 starts on the far side of the nappe and passes near the apex.
[experiment]
name = fig5a-cone
model = cone
method = gd
step_size = 0.05
max_steps = 20000
init = 1.3, 0.4; 0.8, -0.6; 0.8, 3.0
target = 1, 0

[experiment]
name = fig5a-hyp
model = hyperboloid
eps = 0.05
method = gd
step_size = 0.05
max_steps = 20000
init = 1.3, 0.4; 0.8, -0.6; 0.8, 3.0
target = 1, 0
)"},
      {"fig5b-gd", R"(# preset fig5b-gd, version 1
# GD sweep over random initializations, cone vs. hyperboloid; mean/median loss.
[experiment]
name = fig5b-gd-cone
model = cone
method = gd
step_size = 0.05
max_steps = 20000
thin = 10
init_xi = 0.2, 1.8
init_theta = -pi, pi
init_count = 20
init_seed = 5
target = 1, 0

[experiment]
name = fig5b-gd-hyp
model = hyperboloid
eps = 0.05
method = gd
step_size = 0.05
max_steps = 20000
thin = 10
init_xi = 0.2, 1.8
init_theta = -pi, pi
init_count = 20
init_seed = 5
target = 1, 0
)"},
      {"fig5b-ngd", R"(# preset fig5b-ngd, version 1
# NGD sweep over random initializations, cone (damped) vs. hyperboloid.
[experiment]
name = fig5b-ngd-cone
model = cone
method = ngd
damping = 1e-8
step_size = 0.1
max_steps = 20000
thin = 10
init_xi = 0.2, 1.8
init_theta = -pi, pi
init_count = 20
init_seed = 5
target = 1, 0

[experiment]
name = fig5b-ngd-hyp
model = hyperboloid
eps = 0.001
method = ngd
damping = 1e-8
step_size = 0.1
max_steps = 20000
thin = 10
init_xi = 0.2, 1.8
init_theta = -pi, pi
init_count = 20
init_seed = 5
target = 1, 0
)"},
      {"fig6-cone", R"(# preset fig6-cone, version 1
# Initialization on the xi > 0 nappe, target on the xi < 0 nappe: GD must cross the apex.
[experiment]
name = fig6-cone
model = cone
method = gd
step_size = 0.05
max_steps = 50000
grad_tol = 0
thin = 10
init = 1, 0
target = -1, pi
)"},
      {"fig6-hyp", R"(# preset fig6-hyp, version 1
[experiment]
name = fig6-hyp
model = hyperboloid
eps = 0.05
method = gd
step_size = 0.05
max_steps = 50000
grad_tol = 0
thin = 10
init = 1, 0
target = -1, pi
)"},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : preset_table()) out.push_back(k);
  return out;
}

std::string preset_text(const std::string& name) {
  auto it = preset_table().find(name);
  if (it == preset_table().end()) throw ConfigError(fmt::format("unknown preset '{}'", name));
  return it->second;
}

std::vector<ExperimentSpec> preset(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace stratlearn
