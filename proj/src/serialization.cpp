#include "rrgp/serialization.hpp"

namespace rrgp {

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError("matrix rows have different lengths");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return M;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json kernel_to_json(const KernelSpec& k) {
  Json j;
  j["family"] = to_string(k.family);
  j["variance"] = k.variance;
  j["lengthscales"] = k.lengthscales;
  if (k.family == KernelFamily::Matern) j["nu"] = k.matern_nu;
  return j;
}

KernelSpec kernel_from_json(const Json& j) {
  KernelSpec k;
  k.family = kernel_family_from_string(j.at("family").get<std::string>());
  k.variance = j.value("variance", 1.0);
  k.lengthscales = j.at("lengthscales").get<std::vector<double>>();
  k.matern_nu = j.value("nu", 1.5);
  return k;
}

Json basis_to_json(const BasisConfig& basis) {
  Json j;
  j["half_widths"] = basis.domain().half_widths();
  Json idx = Json::array();
  for (const auto& index : basis.indices()) idx.push_back(index.j);
  j["indices"] = std::move(idx);
  j["kernel"] = kernel_to_json(basis.kernel());
  return j;
}

BasisConfig basis_from_json(const Json& j) {
  std::vector<BasisIndex> indices;
  for (const auto& idx : j.at("indices")) indices.push_back({idx.get<std::vector<int>>()});
  return BasisConfig(Domain(j.at("half_widths").get<std::vector<double>>()), std::move(indices),
                     kernel_from_json(j.at("kernel")));
}

Json features_to_json(const FeatureMap& features) {
  Json j;
  if (const auto* h = dynamic_cast<const HilbertFeatures*>(&features)) {
    j["type"] = "hilbert";
    j["state"] = basis_to_json(h->state_basis());
    if (h->input_basis()) j["input"] = basis_to_json(*h->input_basis());
    return j;
  }
  if (dynamic_cast<const LinearFeatures*>(&features)) {
    j["type"] = "linear";
    j["dim"] = features.state_dim();
    j["precision"] = vector_to_json(features.precision(Vector(0)));
    return j;
  }
  throw std::invalid_argument("feature map type cannot be serialized");
}

FeatureMapPtr features_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "hilbert") {
    std::optional<BasisConfig> input;
    if (j.contains("input")) input = basis_from_json(j.at("input"));
    return std::make_shared<HilbertFeatures>(basis_from_json(j.at("state")), std::move(input));
  }
  if (type == "linear") {
    return std::make_shared<LinearFeatures>(j.at("dim").get<Eigen::Index>(),
                                            vector_from_json(j.at("precision")));
  }
  throw InputError("unknown feature map type '" + type + "'");
}

Json structure_to_json(const ModelStructure& s) {
  Json j;
  j["features"] = features_to_json(*s.features);
  Json obs;
  obs["C"] = matrix_to_json(s.observation.C);
  obs["R"] = matrix_to_json(s.observation.R);
  if (s.observation.features) obs["features"] = features_to_json(*s.observation.features);
  j["observation"] = std::move(obs);
  j["x1"] = {{"mean", vector_to_json(s.x1.mean)}, {"cov", matrix_to_json(s.x1.cov)}};
  return j;
}

ModelStructure structure_from_json(const Json& j) {
  ModelStructure s;
  s.features = features_from_json(j.at("features"));
  const Json& obs = j.at("observation");
  s.observation.C = matrix_from_json(obs.at("C"));
  s.observation.R = matrix_from_json(obs.at("R"));
  if (obs.contains("features")) s.observation.features = features_from_json(obs.at("features"));
  s.x1.mean = vector_from_json(j.at("x1").at("mean"));
  s.x1.cov = matrix_from_json(j.at("x1").at("cov"));
  return s;
}

}  // namespace rrgp
