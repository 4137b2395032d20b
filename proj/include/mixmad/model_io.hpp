#ifndef MIXMAD_MODEL_IO_HPP
#define MIXMAD_MODEL_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mixmad/ensemble.hpp"

namespace mixmad {

inline constexpr int kModelFormatVersion = 1;

/// JSON envelope with every parameter array as base64-encoded little-endian
/// 64-bit reals; load(save(m)) is bit-exact and files from equal models are
/// byte-identical.
nlohmann::json ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const nlohmann::json& j);

void save_ensemble(const std::string& path, const EnsembleModel& model);
EnsembleModel load_ensemble(const std::string& path);

namespace detail {
std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);
std::string doubles_to_base64(std::span<const double> values);
std::vector<double> base64_to_doubles(const std::string& text, std::size_t expected_count);
}  // namespace detail

}  // namespace mixmad

#endif
