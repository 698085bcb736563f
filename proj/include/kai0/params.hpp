#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kai0 {

/// Flat model parameters. layout_id names the architecture the vector
/// flattens; two vectors are combinable only if layout_id and length match.
struct ParameterVector {
  std::string layout_id;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Throws if the vector is empty or contains non-finite entries.
void validate(const ParameterVector& p);

/// Throws (naming both layout ids) unless a and b are combinable.
void require_combinable(const ParameterVector& a, const ParameterVector& b);

/// Returns dst + alpha * src, elementwise. Inputs are not modified.
ParameterVector param_axpy(const ParameterVector& dst, double alpha,
                           const ParameterVector& src);

/// Binary checkpoint format, bit-exact round trip:
///   magic "KAI0PV1\0"
///   u32 LE layout_id byte length, layout_id bytes (UTF-8)
///   u64 LE value count, IEEE-754 LE doubles
void save_params(const ParameterVector& p, const std::filesystem::path& path);
ParameterVector load_params(const std::filesystem::path& path);

}  // namespace kai0
