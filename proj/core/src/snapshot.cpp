#include "rkreg/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rkreg/errors.hpp"

namespace rkreg {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "rkreg-estimator-state";

std::string hex_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%La", v);
  return buf;
}

Real parse_hex_real(const std::string& s) {
  char* end = nullptr;
  const Real v = std::strtold(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw DataError("snapshot: malformed accumulator value '" + s + "'");
  }
  return v;
}

}  // namespace

std::string snapshot_to_json(const EstimatorState& state) {
  if (state.kernel().kind() == KernelKind::custom) {
    throw std::invalid_argument("snapshots support built-in kernels only");
  }
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kSnapshotVersion;
  doc["kernel"] = state.kernel().name();
  doc["alpha"] = state.schedule().alpha();
  doc["n"] = state.count();
  doc["grid"] = std::vector<double>(state.grid().begin(), state.grid().end());
  doc["has_density"] = state.has_density();
  json acc = json::object();
  for (Accumulator a : kAllAccumulators) {
    const auto values = state.accumulator(a);
    if (values.empty()) continue;
    json arr = json::array();
    for (Real v : values) arr.push_back(hex_real(v));
    acc[to_string(a)] = std::move(arr);
  }
  doc["accumulators"] = std::move(acc);
  return doc.dump(1);
}

EstimatorState snapshot_from_json(std::string_view text,
                                  std::optional<DensityModel> density) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("snapshot: invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) {
      throw DataError("snapshot: unexpected format tag");
    }
    const int version = doc.at("version").get<int>();
    if (version != kSnapshotVersion) {
      throw DataError("snapshot: unsupported version " + std::to_string(version));
    }
    const bool has_density = doc.at("has_density").get<bool>();
    if (has_density && !density) {
      throw DataError("snapshot carries design-weighted accumulators; a density model is required");
    }
    if (!has_density) density.reset();

    std::vector<std::vector<Real>> accumulators;
    for (Accumulator a : kAllAccumulators) {
      const bool design = a == Accumulator::design_response ||
                          a == Accumulator::design_response_slope;
      if (design && !has_density) continue;
      std::vector<Real> values;
      for (const auto& item : doc.at("accumulators").at(to_string(a))) {
        values.push_back(parse_hex_real(item.get<std::string>()));
      }
      accumulators.push_back(std::move(values));
    }
    return EstimatorState::restore(
        doc.at("grid").get<std::vector<double>>(),
        Kernel::from_name(doc.at("kernel").get<std::string>()),
        BandwidthSchedule(doc.at("alpha").get<double>()), std::move(density),
        doc.at("n").get<std::uint64_t>(), std::move(accumulators));
  } catch (const json::exception& e) {
    throw DataError(std::string("snapshot: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const EstimatorState& state,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write snapshot " + path.string());
  out << snapshot_to_json(state) << '\n';
}

EstimatorState load_snapshot(const std::filesystem::path& path,
                             std::optional<DensityModel> density) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read snapshot " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return snapshot_from_json(buf.str(), std::move(density));
}

}  // namespace rkreg
