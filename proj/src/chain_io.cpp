#include "rrgp/chain_io.hpp"

#include "rrgp/linalg.hpp"
#include "rrgp/serialization.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace rrgp {

namespace {

constexpr const char* kFormat = "rrgpssm-chain";
constexpr int kVersion = 1;

Json row_major(const Matrix& M) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

Matrix from_row_major(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw InputError("chain record matrix has wrong length");
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c)
      M(i, c) = j[static_cast<std::size_t>(i * cols + c)].get<double>();
  return M;
}

}  // namespace

void write_chain_header(std::ostream& os, const ModelStructure& structure,
                        bool learned_observation) {
  Json h;
  h["format"] = kFormat;
  h["version"] = kVersion;
  Json fields = {"iter", "A", "Q_lower", "theta", "accepted", "loglik"};
  if (learned_observation) {
    fields.push_back("C");
    fields.push_back("R_lower");
  }
  h["fields"] = std::move(fields);
  h["n_x"] = structure.features->state_dim();
  h["m"] = structure.features->size();
  h["theta_names"] = structure.features->theta_names();
  h["model"] = structure_to_json(structure);
  os << h.dump() << '\n';
}

void write_chain_record(std::ostream& os, const ChainRecord& record) {
  Json r;
  r["iter"] = record.iteration;
  r["A"] = row_major(record.A);
  r["Q_lower"] = vector_to_json(lower_triangle(record.Q));
  r["theta"] = vector_to_json(record.log_theta.array().exp().matrix());
  r["accepted"] = record.accepted;
  if (std::isfinite(record.log_likelihood))
    r["loglik"] = record.log_likelihood;
  else
    r["loglik"] = nullptr;
  if (record.C) r["C"] = row_major(*record.C);
  if (record.R) r["R_lower"] = vector_to_json(lower_triangle(*record.R));
  os << r.dump() << '\n';
}

void write_chain(std::ostream& os, const ModelStructure& structure, const GibbsChain& chain) {
  const bool learned = !chain.records.empty() && chain.records.front().C.has_value();
  write_chain_header(os, structure, learned);
  for (const auto& rec : chain.records) write_chain_record(os, rec);
}

ChainFile read_chain(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("chain file is empty");
  Json h;
  try {
    h = Json::parse(line);
  } catch (const std::exception& e) {
    throw InputError(std::string("chain header (line 1) is not valid JSON: ") + e.what());
  }
  if (h.value("format", std::string()) != kFormat)
    throw InputError("line 1 is not an rrgpssm chain header");
  if (h.value("version", 0) != kVersion) throw InputError("unsupported chain file version");

  ChainFile file;
  file.structure = structure_from_json(h.at("model"));
  file.theta_names = h.value("theta_names", std::vector<std::string>{});
  const Eigen::Index nx = file.structure.features->state_dim();
  const Eigen::Index m = file.structure.features->size();
  const Eigen::Index ny = file.structure.observation.C.rows();
  const Eigen::Index nc = file.structure.observation.C.cols();

  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json r = Json::parse(line);
      ChainRecord rec;
      rec.iteration = r.at("iter").get<int>();
      rec.A = from_row_major(r.at("A"), nx, m);
      rec.Q = from_lower_triangle(vector_from_json(r.at("Q_lower")), nx);
      rec.log_theta = vector_from_json(r.at("theta")).array().log();
      rec.accepted = r.at("accepted").get<bool>();
      const Json& ll = r.at("loglik");
      rec.log_likelihood =
          ll.is_null() ? -std::numeric_limits<double>::infinity() : ll.get<double>();
      if (r.contains("C")) rec.C = from_row_major(r.at("C"), ny, nc);
      if (r.contains("R_lower")) rec.R = from_lower_triangle(vector_from_json(r.at("R_lower")), ny);
      file.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw InputError("chain file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return file;
}

ChainFile read_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open chain file '" + path + "'");
  return read_chain(in);
}

}  // namespace rrgp
