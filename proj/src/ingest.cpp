#include "playtime/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "playtime/error.hpp"

namespace playtime {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

// Reads the header and calls row(line_no, fields) for each non-blank line.
template <typename RowFn>
std::vector<IngestIssue> scan_csv(std::istream& in, std::string_view expected_header, RowFn&& row) {
  std::vector<IngestIssue> issues;
  std::string line;
  if (!std::getline(in, line)) {
    issues.push_back({1, "empty file, expected header '" + std::string(expected_header) + "'"});
    return issues;
  }
  if (trim(line) != expected_header) {
    issues.push_back({1, "bad header '" + std::string(trim(line)) + "', expected '" +
                             std::string(expected_header) + "'"});
    return issues;
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (auto message = row(split_fields(line)); !message.empty()) {
      issues.push_back({line_no, std::move(message)});
    }
  }
  return issues;
}

[[noreturn]] void throw_issues(const std::filesystem::path& path,
                               const std::vector<IngestIssue>& issues) {
  std::ostringstream msg;
  msg << path.string() << ": " << issues.size() << " invalid line(s)";
  const std::size_t shown = std::min<std::size_t>(issues.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    msg << "\n  line " << issues[i].line << ": " << issues[i].message;
  }
  throw Error(ErrorCode::InvalidInput, msg.str());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
  return in;
}

}  // namespace

RecordsFile parse_records(std::istream& in) {
  RecordsFile file;
  file.issues = scan_csv(in, kRecordsHeader, [&](const std::vector<std::string_view>& f) {
    if (f.size() != 4) return "expected 4 fields, got " + std::to_string(f.size());
    if (f[0].empty()) return std::string("empty player_id");
    const auto date = Date::parse(f[1]);
    if (!date) return "invalid date '" + std::string(f[1]) + "'";
    int hour = 0;
    if (!parse_int(f[2], hour) || hour < 0 || hour > 23) {
      return "hour must be an integer in 0..23, got '" + std::string(f[2]) + "'";
    }
    double hours = 0.0;
    if (!parse_real(f[3], hours) || hours < 0.0 || hours > 1.0) {
      return "hours_played must be a decimal in [0, 1], got '" + std::string(f[3]) + "'";
    }
    file.records.push_back({std::string(f[0]), *date, hour + 1, hours});
    return std::string();
  });
  return file;
}

LabelsFile parse_labels(std::istream& in) {
  LabelsFile file;
  file.issues = scan_csv(in, kLabelsHeader, [&](const std::vector<std::string_view>& f) {
    if (f.size() != 2) return "expected 2 fields, got " + std::to_string(f.size());
    if (f[0].empty()) return std::string("empty player_id");
    bool churner = false;
    if (f[1] == "1" || f[1] == "true") {
      churner = true;
    } else if (f[1] != "0" && f[1] != "false") {
      return "is_churner must be 0/1/true/false, got '" + std::string(f[1]) + "'";
    }
    file.labels.emplace_back(std::string(f[0]), churner);
    return std::string();
  });
  return file;
}

std::vector<PlaytimeRecord> load_records(const std::filesystem::path& path) {
  auto in = open_input(path);
  auto file = parse_records(in);
  if (!file.issues.empty()) throw_issues(path, file.issues);
  if (file.records.empty()) throw Error(ErrorCode::InvalidInput, path.string() + ": no data rows");
  return std::move(file.records);
}

std::vector<std::pair<std::string, bool>> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  auto file = parse_labels(in);
  if (!file.issues.empty()) throw_issues(path, file.issues);
  if (file.labels.empty()) throw Error(ErrorCode::InvalidInput, path.string() + ": no data rows");
  return std::move(file.labels);
}

void write_records(std::ostream& out, std::span<const PlaytimeRecord> records) {
  out << kRecordsHeader << '\n';
  for (const auto& rec : records) {
    out << rec.player_id << ',' << rec.date.to_string() << ',' << (rec.hour_slot - 1) << ','
        << format_double(rec.hours_played) << '\n';
  }
}

void write_labels(std::ostream& out, std::span<const ChurnLabel> labels) {
  out << kLabelsHeader << '\n';
  for (const auto& label : labels) out << label.player_id << ',' << (label.is_churner ? 1 : 0) << '\n';
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::InvalidInput, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace playtime
