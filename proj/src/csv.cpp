#include "rctmiss/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rctmiss {

Eigen::Index CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return static_cast<Eigen::Index>(i);
    }
  }
  return -1;
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  const size_t size = text.size();
  size_t i = 0;
  while (i < size) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < size && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      field += ch;
      ++i;
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < size && text[i + 1] == '\n') {
          ++i;  // the newline below closes the record
        } else {
          end_record();
          ++i;
        }
        break;
      case '\n':
        end_record();
        ++i;
        break;
      default:
        field += ch;
        ++i;
        break;
    }
  }
  if (in_quotes) {
    throw ValidationError("CSV: unterminated quoted field");
  }
  if (!field.empty() || !record.empty()) {
    end_record();
  }

  if (records.empty()) {
    throw ValidationError("CSV: no header row");
  }
  CsvTable table;
  table.header = std::move(records.front());
  table.rows.assign(records.begin() + 1, records.end());
  for (size_t row = 0; row < table.rows.size(); ++row) {
    if (table.rows[row].size() != table.header.size()) {
      std::ostringstream msg;
      msg << "CSV: row " << row + 1 << " has " << table.rows[row].size()
          << " fields; expected " << table.header.size();
      throw ValidationError(msg.str());
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

namespace {

std::string escape_field(const std::string& field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) {
    return field;
  }
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') {
      out += '"';
    }
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot open file for writing: " + path);
  }
  auto write_record = [&](const std::vector<std::string>& record) {
    for (size_t i = 0; i < record.size(); ++i) {
      if (i > 0) {
        out << ',';
      }
      out << escape_field(record[i]);
    }
    out << '\n';
  };
  write_record(table.header);
  for (const auto& row : table.rows) {
    write_record(row);
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(const std::string& path, const TrialDataset& dataset,
                       const std::string& na_token) {
  CsvTable table;
  table.header.push_back("y");
  table.header.push_back("arm");
  for (Eigen::Index j = 0; j < dataset.n_covariates(); ++j) {
    table.header.push_back("x" + std::to_string(j + 1));
  }
  table.rows.reserve(static_cast<size_t>(dataset.n()));
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(format_double(dataset.y[i]));
    row.push_back(std::to_string(dataset.arm[i]));
    for (Eigen::Index j = 0; j < dataset.n_covariates(); ++j) {
      row.push_back(dataset.r(i, j) == 1.0 ? format_double(dataset.x(i, j)) : na_token);
    }
    table.rows.push_back(std::move(row));
  }
  write_csv_file(path, table);
}

}  // namespace rctmiss
