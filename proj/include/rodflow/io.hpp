#pragma once

// Diagnostics CSV, frame dumps (TSV) and binary checkpoints.

#include "rodflow/flow.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rodflow {

inline constexpr const char* kRecordHeader =
    "step,bending,twisting,penalty,tp,total,twist,uniformity,vy,vb,violation,wall_ms";

// Shortest decimal form that reads back to the same double; "nan"/"inf" otherwise.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string format_record(const DiagnosticsRecord& r);
DiagnosticsRecord parse_record(std::string_view line);

// Streaming CSV writer. The header is written on construction unless appending.
class RecordWriter {
 public:
  RecordWriter(const std::filesystem::path& path, bool append = false);
  void write(const DiagnosticsRecord& r);
  void flush();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_records(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_records(const std::filesystem::path& path);

// Drops records with step > max_step from a CSV file (used when resuming).
void truncate_records(const std::filesystem::path& path, long max_step);

struct FrameDump {
  long step = 0;
  double kappa = 0.0;
  RodState state;
};

void write_frame(const std::filesystem::path& path, const FrameDump& frame);
FrameDump read_frame(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string scenario;
  long step = 0;
  FlowConfig config;
  BoundaryCondition bc;
  RodState state;
};

// Written to a temporary file and renamed into place.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace rodflow
