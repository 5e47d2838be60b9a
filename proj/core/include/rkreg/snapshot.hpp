#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "rkreg/estimator.hpp"

namespace rkreg {

inline constexpr int kSnapshotVersion = 1;

/// Versioned JSON snapshot of an EstimatorState:
///   {format, version, kernel, alpha, n, grid, has_density, accumulators{...}}
/// Accumulators are stored as hexadecimal floating-point strings so that a
/// restored state continues bit-identically. Only built-in kernels can be
/// saved. The density model itself is not serialized; pass it back in on load.
std::string snapshot_to_json(const EstimatorState& state);
EstimatorState snapshot_from_json(std::string_view json,
                                  std::optional<DensityModel> density = std::nullopt);

void save_snapshot(const EstimatorState& state, const std::filesystem::path& path);
EstimatorState load_snapshot(const std::filesystem::path& path,
                             std::optional<DensityModel> density = std::nullopt);

}  // namespace rkreg
