#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "saferl/mlp.hpp"

namespace saferl {

// Binary checkpoint: named flat double vectors with an integer shape header.
// Layout (all integers and doubles little-endian):
//   magic "SRLCKPT1" | u32 version=1 | u32 section_count
//   per section: u32 name_len | name bytes | u32 ndims | i64 dims[] |
//                u64 value_count | f64 values[]
// MLP sections store the layer widths as dims and the flat parameter vector
// as values; plain vectors store a single dim.
struct CheckpointSection {
  std::string name;
  std::vector<std::int64_t> dims;
  Eigen::VectorXd data;
};

void save_checkpoint(const std::string& path, const std::vector<CheckpointSection>& sections);
std::vector<CheckpointSection> load_checkpoint(const std::string& path);

CheckpointSection mlp_section(const std::string& name, const MlpParams& params);
MlpParams mlp_from_section(const CheckpointSection& section);
CheckpointSection vector_section(const std::string& name, const Eigen::VectorXd& v);

}  // namespace saferl
