#include "flatspec/eigen_result.hpp"

namespace flatspec {

void to_json(nlohmann::json& j, const EigenResult& r) {
  j = nlohmann::json{{"mu", r.values}, {"h", r.mesh_size}, {"n_dof", r.n_dof}, {"residuals", r.residuals}};
}

}  // namespace flatspec
