// Copyright 2026 The bandedge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV output of traces and small tables. Numbers use 12 significant digits so
// that identical runs give byte-identical files.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include "bandedge/dynamics.hpp"
#include "bandedge/error.hpp"

namespace bandedge {

inline constexpr const char* kTraceHeader =
    "gamma_c_t,pop_e,pop_d,pop_continuum,re_alpha,im_alpha,re_beta_d,im_beta_d,fidelity";

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", x == 0.0 ? 0.0 : x);
  return buf;
}

struct TraceCsvOptions {
  // Multiplies the time column.
  double gamma_c = 1.0;
  // Appends the target_fidelity column.
  bool target_fidelity = false;
};

inline void write_trace_csv(std::ostream& os, const Trace& trace, const TraceCsvOptions& opt = {}) {
  os << kTraceHeader;
  if (opt.target_fidelity) os << ",target_fidelity";
  os << '\n';
  for (const auto& s : trace.samples) {
    os << format_number(s.t * opt.gamma_c) << ',' << format_number(s.pop_e()) << ','
       << format_number(s.pop_d()) << ',' << format_number(s.pop_continuum) << ','
       << format_number(s.alpha.real()) << ',' << format_number(s.alpha.imag()) << ','
       << format_number(s.beta_d.real()) << ',' << format_number(s.beta_d.imag()) << ','
       << format_number(s.fidelity);
    if (opt.target_fidelity) os << ',' << format_number(s.target_fidelity);
    os << '\n';
  }
}

/// Header plus rows of numbers.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::initializer_list<double> row) {
    if (row.size() != columns.size()) throw InvalidArgument("csv table: row width mismatch");
    rows.emplace_back(row);
  }
};

inline void write_table_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace bandedge
