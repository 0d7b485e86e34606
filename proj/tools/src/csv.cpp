/*
 Copyright 2026 The smoothmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/


#include "smoothmpc/experiments/csv.hpp"

#include <cmath>
#include <cstdio>

#include "smoothmpc/types.hpp"

namespace smoothmpc {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<CsvColumn> columns,
                     const std::string& config_hash, const std::string& command)
    : path_(path), out_(path), columns_(columns.size()) {
  if (!out_) throw InvalidArgument("cannot write " + path);
  out_ << "# smoothmpc " << command << " config_hash=" << config_hash << "\n";
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) out_ << ",";
    out_ << columns[i].name << " [" << columns[i].unit << "]";
  }
  out_ << "\n";
}

void CsvWriter::cell(const std::string& text) {
  if (filled_ == columns_) {
    throw InvalidArgument(path_ + ": too many cells in row");
  }
  if (filled_ > 0) out_ << ",";
  out_ << text;
  ++filled_;
}

CsvWriter& CsvWriter::operator<<(double v) {
  cell(format_number(v));
  return *this;
}

CsvWriter& CsvWriter::operator<<(long v) {
  cell(std::to_string(v));
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  const bool quote = v.find_first_of(",\"\n") != std::string::npos;
  if (!quote) {
    cell(v);
    return *this;
  }
  std::string q = "\"";
  for (char c : v) {
    if (c == '"') q += '"';
    q += c;
  }
  cell(q + "\"");
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) {
    throw InvalidArgument(path_ + ": row has " + std::to_string(filled_) +
                          " cells, expected " + std::to_string(columns_));
  }
  out_ << "\n";
  filled_ = 0;
}

}  // namespace smoothmpc
