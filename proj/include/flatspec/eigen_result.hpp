#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace flatspec {

/// Leading eigenpairs of a discretized self-adjoint problem.
struct EigenResult {
  std::vector<double> values;                // mu_0 <= mu_1 <= ...
  std::vector<std::vector<double>> vectors;  // nodal values, unit mass norm
  std::vector<double> residuals;             // relative algebraic residuals
  double mesh_size = 0.0;
  std::size_t n_dof = 0;
};

/// {"mu": [...], "h": ..., "n_dof": ..., "residuals": [...]}; vectors omitted.
void to_json(nlohmann::json& j, const EigenResult& r);

}  // namespace flatspec
