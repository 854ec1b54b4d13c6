#pragma once

#include <string>
#include <vector>

#include "rctmiss/dataset.hpp"

namespace rctmiss {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Eigen::Index column(const std::string& name) const;  // -1 when absent
};

// RFC-4180-style parser: quoted fields, doubled quotes, embedded separators
// and newlines inside quotes.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

void write_csv_file(const std::string& path, const CsvTable& table);

// Shortest round-trip decimal formatting, so a write/read cycle reproduces
// every finite double bit-exactly.
std::string format_double(double v);

// Writes y, arm, and covariate columns; masked cells become the first
// missing-value token (default "NA").
void write_dataset_csv(const std::string& path, const TrialDataset& dataset,
                       const std::string& na_token = "NA");

}  // namespace rctmiss
