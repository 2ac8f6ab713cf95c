#pragma once

// Numeric CSV ingestion. The header names every column:
//   t      optional timestamp
//   u...   exogenous inputs
//   y...   observations (at least one required)
//   x...   latent states, when known (synthetic data)

#include "rrgp/common.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rrgp {

struct Dataset {
  std::optional<Vector> timestamps;
  RowMatrix inputs;        // T x n_u
  RowMatrix observations;  // T x n_y
  RowMatrix states;        // T x n_x, zero columns when unknown
  std::vector<std::string> input_names;
  std::vector<std::string> observation_names;
  std::vector<std::string> state_names;

  Eigen::Index length() const { return observations.rows(); }
  bool has_states() const { return states.cols() > 0; }
};

/// Throws InputError naming the offending line for missing or unknown
/// columns, non-numeric or non-finite cells and ragged rows.
Dataset parse_csv(std::istream& is, const std::string& source = "<stream>");
Dataset load_csv(const std::string& path);

void write_csv(std::ostream& os, const Dataset& data);

}  // namespace rrgp
