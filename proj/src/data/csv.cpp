// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iterator>
#include <sstream>

#include "acap/data_prep.hpp"
#include "acap/errors.hpp"

namespace acap::data {

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_has_content = false;
        break;
      default:
        field += c;
        row_has_content = true;
    }
  }
  if (quoted) throw FormatError(path.string() + ": unterminated quoted field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const CsvRow& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<CaptionRecord> read_manifest(const std::filesystem::path& path) {
  const std::vector<CsvRow> rows = read_csv(path);
  if (rows.empty()) throw FormatError(path.string() + ": empty manifest");
  const CsvRow& header = rows[0];
  auto column = [&](const char* name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw FormatError(path.string() + ": manifest lacks column '" + name + "'");
  };
  const std::size_t id = column("id"), audio = column("audio_path"), caption = column("caption");
  std::vector<CaptionRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() != header.size()) {
      throw FormatError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(row.size()) + " fields, header has " + std::to_string(header.size()));
    }
    CaptionRecord rec;
    rec.id = row[id];
    rec.audio_path = row[audio];
    rec.raw_caption = row[caption];
    records.push_back(std::move(rec));
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<CaptionRecord>& records) {
  std::vector<CsvRow> rows;
  rows.push_back({"id", "audio_path", "caption"});
  for (const CaptionRecord& r : records) {
    rows.push_back({r.id, r.audio_path, r.tokens.empty() ? r.raw_caption : join(r.tokens)});
  }
  write_csv(path, rows);
}

}  // namespace acap::data
