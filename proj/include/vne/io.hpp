#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vne/diagnostics.hpp"
#include "vne/optimize.hpp"
#include "vne/trainer.hpp"
#include "vne/verify.hpp"

namespace vne {

using Json = nlohmann::ordered_json;

// Reports are byte-stable by default: a fixed epoch timestamp unless the
// caller supplies a real one.
inline constexpr const char* kDefaultTimestamp = "1970-01-01T00:00:00Z";

enum class MatrixFormat { Auto, Csv, Binary };

// CSV (no header, comma-separated, shortest round-trip decimals) or the raw
// binary layout: magic "VNEM", u8 version = 1, u64 rows, u64 cols, then
// row-major f64, all little-endian. Auto detects by magic when reading and by
// extension (.bin / .vnem) when writing. Non-finite entries are rejected on
// both sides.
Mat read_matrix(const std::string& path, MatrixFormat format = MatrixFormat::Auto);
void write_matrix(const std::string& path, const Mat& m, MatrixFormat format = MatrixFormat::Auto);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Diagnostics payload without the meta envelope (reused inside train reports).
Json report_body(const DiagnosticsReport& rep, bool include_values = false);

Json report_json(const DiagnosticsReport& rep, std::uint64_t seed, bool include_values = false,
                 const std::string& timestamp = kDefaultTimestamp);
Json trajectory_json(const Trajectory& traj, const OptimizeConfig& cfg,
                     const std::string& timestamp = kDefaultTimestamp);
Json train_report_json(const TrainReport& rep, const TrainConfig& cfg,
                       const std::string& timestamp = kDefaultTimestamp);
Json verify_json(const std::vector<VerifyOutcome>& outcomes,
                 const std::string& timestamp = kDefaultTimestamp);

}  // namespace vne
