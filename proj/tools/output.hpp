#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace cli {

// Shortest representation that reads back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Row-oriented CSV file whose first line is "# config: <json>".
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const nlohmann::json& config,
            const std::vector<std::string>& columns)
      : path_(path), out_(path) {
    if (!out_) throw Failure(kIo, "cannot open " + path.string() + " for writing");
    out_ << "# config: " << config.dump() << '\n';
    row(columns);
  }

  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw Failure(kIo, "failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Failure(kIo, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) throw Failure(kIo, "failed writing " + path.string());
}

// "<dir>/<stem><suffix>" next to the primary output file.
inline std::filesystem::path sibling(const std::filesystem::path& out, const std::string& suffix) {
  auto p = out;
  p.replace_extension();
  return p.string() + suffix;
}

}  // namespace cli
