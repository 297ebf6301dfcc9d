#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskbench/classifiers.hpp"

namespace maskbench {

// Versioned binary model format: magic "MFRB", u32 version, u8 model tag,
// then the model payload with all floats as little-endian 64-bit doubles.
// Round-trips preserve predictions bit-exactly.
std::vector<std::uint8_t> serialize_model(const TrainedModel& m);
TrainedModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model_file(const std::string& path, const TrainedModel& m);
TrainedModel load_model_file(const std::string& path);

}  // namespace maskbench
