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


#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace smoothmpc {

struct CsvColumn {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

/// Writes a comment line carrying the config hash, then a header row of
/// "name [unit]" cells, then data rows. Numbers use %.17g so reruns are
/// byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<CsvColumn> columns,
            const std::string& config_hash, const std::string& command);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
  CsvWriter& operator<<(const std::string& v);
  CsvWriter& operator<<(const char* v) { return *this << std::string(v); }

  /// Terminates the row; throws InvalidArgument on a column-count mismatch.
  void end_row();

  const std::string& path() const { return path_; }

 private:
  void cell(const std::string& text);

  std::string path_;
  std::ofstream out_;
  size_t columns_ = 0;
  size_t filled_ = 0;
};

/// Formats with %.17g; non-finite values become "inf", "-inf" or "nan".
std::string format_number(double v);

}  // namespace smoothmpc
