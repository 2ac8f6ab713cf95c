#pragma once

// JSON encodings of model structure pieces, shared by chain files, run
// manifests and experiment configs. Doubles are written with round-trip
// precision by nlohmann::json.

#include "rrgp/gibbs.hpp"
#include "rrgp/kernel_basis.hpp"

#include <json.hpp>

namespace rrgp {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& M);  // array of rows
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json kernel_to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const Json& j);

Json basis_to_json(const BasisConfig& basis);
BasisConfig basis_from_json(const Json& j);

Json features_to_json(const FeatureMap& features);
FeatureMapPtr features_from_json(const Json& j);

Json structure_to_json(const ModelStructure& s);
ModelStructure structure_from_json(const Json& j);

}  // namespace rrgp
