#pragma once

// Newline-delimited chain files. Line 1 is a header object naming the field
// order and carrying the model structure; every following line is one Gibbs
// record:
//
//   {"iter": k, "A": [row-major n_x*m], "Q_lower": [...], "theta": [...],
//    "accepted": bool, "loglik": x[, "C": [row-major], "R_lower": [...]]}
//
// theta is written on its natural (not log) scale; Q_lower packs the lower
// triangle row by row.

#include "rrgp/gibbs.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rrgp {

struct ChainFile {
  ModelStructure structure;
  std::vector<std::string> theta_names;
  std::vector<ChainRecord> records;  // states are not persisted
};

void write_chain_header(std::ostream& os, const ModelStructure& structure, bool learned_observation);
void write_chain_record(std::ostream& os, const ChainRecord& record);
void write_chain(std::ostream& os, const ModelStructure& structure, const GibbsChain& chain);

ChainFile read_chain(std::istream& is);
ChainFile read_chain_file(const std::string& path);

}  // namespace rrgp
