#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "playtime/core_model.hpp"

namespace playtime {

inline constexpr std::string_view kRecordsHeader = "player_id,date,hour,hours_played";
inline constexpr std::string_view kLabelsHeader = "player_id,is_churner";

struct IngestIssue {
  std::size_t line = 0;  // 1-based; the header is line 1
  std::string message;
};

struct RecordsFile {
  std::vector<PlaytimeRecord> records;
  std::vector<IngestIssue> issues;
};

struct LabelsFile {
  std::vector<std::pair<std::string, bool>> labels;
  std::vector<IngestIssue> issues;
};

/// Parses the telemetry CSV. Invalid rows are skipped and reported in
/// `issues`; nothing throws on malformed content.
RecordsFile parse_records(std::istream& in);
LabelsFile parse_labels(std::istream& in);

/// File-level wrappers. Throw Error(InvalidInput) if the file is missing,
/// has any invalid row, or has no data rows.
std::vector<PlaytimeRecord> load_records(const std::filesystem::path& path);
std::vector<std::pair<std::string, bool>> load_labels(const std::filesystem::path& path);

void write_records(std::ostream& out, std::span<const PlaytimeRecord> records);
void write_labels(std::ostream& out, std::span<const ChurnLabel> labels);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

/// Writes via a temporary sibling file renamed into place, so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace playtime
