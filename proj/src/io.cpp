#include "dcshs/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dcshs {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double* out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

struct Attribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> categories;  // nominal only
};

struct RawTable {
  std::string name;                       // relation or file stem
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // parsed feature values
  std::vector<std::string> class_cells;   // class value per kept row
  int dropped = 0;
};

std::string file_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  const std::size_t start = slash == std::string::npos ? 0 : slash + 1;
  const std::size_t dot = path.find_last_of('.');
  const std::size_t end =
      dot == std::string::npos || dot <= start ? path.size() : dot;
  return path.substr(start, end - start);
}

// Class bookkeeping shared by both parsers: exactly two values, majority by
// count (first appearance wins ties), "positive"-as-majority flagged.
LabeledDataset finish_dataset(RawTable table) {
  std::vector<std::string> order;  // distinct class values, first-seen order
  std::map<std::string, int> counts;
  for (const auto& cell : table.class_cells) {
    if (!counts.count(cell)) order.push_back(cell);
    counts[cell]++;
  }
  if (table.rows.empty())
    throw std::runtime_error(table.name + ": no usable data rows");
  if (order.size() < 2)
    throw std::runtime_error(table.name +
                             ": dataset holds a single class value");
  if (order.size() > 2)
    throw std::runtime_error(table.name + ": expected two class values, found " +
                             std::to_string(order.size()));

  std::string maj = order[0];
  std::string min = order[1];
  if (counts[min] > counts[maj]) std::swap(maj, min);

  LabeledDataset d;
  d.name = std::move(table.name);
  d.majority_name = maj;
  d.minority_name = min;
  d.relabeled = lower(maj) == "positive";
  d.dropped_rows = table.dropped;
  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  const Eigen::Index dim =
      n > 0 ? static_cast<Eigen::Index>(table.rows.front().size()) : 0;
  d.x.resize(n, dim);
  d.y.reserve(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j)
      d.x(i, j) = table.rows[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(j)];
    d.y.push_back(table.class_cells[static_cast<std::size_t>(i)] == maj
                      ? Label::majority
                      : Label::minority);
  }
  return d;
}

}  // namespace

LabeledDataset parse_keel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");

  std::vector<Attribute> attrs;
  std::string relation = file_stem(path);
  std::string outputs_name;
  bool in_data = false;
  RawTable table;
  int class_index = -1;
  int line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;

    if (!in_data && t[0] == '@') {
      const std::size_t sp = t.find_first_of(" \t");
      const std::string directive = lower(t.substr(0, sp));
      const std::string rest = sp == std::string::npos ? "" : trim(t.substr(sp));
      if (directive == "@relation") {
        if (!rest.empty()) relation = rest;
      } else if (directive == "@attribute") {
        Attribute a;
        const std::size_t brace = rest.find('{');
        if (brace != std::string::npos) {
          const std::size_t close = rest.find('}', brace);
          if (close == std::string::npos)
            fail(path, line_no, "unterminated category list");
          a.name = trim(rest.substr(0, brace));
          a.nominal = true;
          a.categories =
              split_commas(rest.substr(brace + 1, close - brace - 1));
          if (a.name.empty() || a.categories.empty())
            fail(path, line_no, "malformed nominal attribute");
        } else {
          std::istringstream parts(rest);
          std::string type;
          parts >> a.name >> type;
          const std::string lt = lower(type);
          if (a.name.empty() ||
              (lt != "real" && lt != "integer" && lt != "numeric"))
            fail(path, line_no,
                 "unsupported attribute type '" + type + "'");
        }
        attrs.push_back(std::move(a));
      } else if (directive == "@inputs") {
        // Informative: attribute order already fixes the layout.
      } else if (directive == "@outputs") {
        outputs_name = rest;
      } else if (directive == "@data") {
        if (attrs.size() < 2)
          fail(path, line_no, "need at least one feature and a class");
        class_index = static_cast<int>(attrs.size()) - 1;
        if (!outputs_name.empty()) {
          class_index = -1;
          for (std::size_t i = 0; i < attrs.size(); ++i)
            if (attrs[i].name == outputs_name)
              class_index = static_cast<int>(i);
          if (class_index < 0)
            fail(path, line_no,
                 "@outputs names unknown attribute '" + outputs_name + "'");
        }
        for (std::size_t i = 0; i < attrs.size(); ++i)
          if (static_cast<int>(i) != class_index)
            table.feature_names.push_back(attrs[i].name);
        in_data = true;
      } else {
        fail(path, line_no, "unknown directive '" + directive + "'");
      }
      continue;
    }

    if (!in_data) fail(path, line_no, "data before @data directive");

    const auto cells = split_commas(t);
    if (cells.size() != attrs.size())
      fail(path, line_no,
           "expected " + std::to_string(attrs.size()) + " values, got " +
               std::to_string(cells.size()));
    if (std::any_of(cells.begin(), cells.end(),
                    [](const std::string& c) { return c == "?"; })) {
      table.dropped++;
      continue;
    }
    std::vector<double> row;
    row.reserve(attrs.size() - 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<int>(i) == class_index) continue;
      const Attribute& a = attrs[i];
      double v = 0.0;
      if (a.nominal) {
        const auto it =
            std::find(a.categories.begin(), a.categories.end(), cells[i]);
        if (it == a.categories.end())
          fail(path, line_no,
               "value '" + cells[i] + "' is not a declared category of '" +
                   a.name + "'");
        v = static_cast<double>(it - a.categories.begin());
      } else if (!parse_double(cells[i], &v)) {
        fail(path, line_no,
             "non-numeric value '" + cells[i] + "' for attribute '" + a.name +
                 "'");
      }
      row.push_back(v);
    }
    const std::string& class_cell =
        cells[static_cast<std::size_t>(class_index)];
    const Attribute& class_attr = attrs[static_cast<std::size_t>(class_index)];
    if (class_attr.nominal &&
        std::find(class_attr.categories.begin(), class_attr.categories.end(),
                  class_cell) == class_attr.categories.end())
      fail(path, line_no,
           "value '" + class_cell + "' is not a declared category of '" +
               class_attr.name + "'");
    table.rows.push_back(std::move(row));
    table.class_cells.push_back(class_cell);
  }

  if (!in_data) throw std::runtime_error(path + ": missing @data section");
  table.name = relation;
  return finish_dataset(std::move(table));
}

namespace {

// RFC-4180 record reader: returns one logical record per call, honoring
// quoted fields (with doubled-quote escapes and embedded newlines).
bool read_record(std::istream& in, std::vector<std::string>* fields,
                 int* line_no) {
  fields->clear();
  std::string field;
  bool quoted = false;
  bool any = false;
  int c = 0;
  while ((c = in.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++*line_no;
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields->push_back(field);
      field.clear();
    } else if (ch == '\n') {
      ++*line_no;
      break;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (!any) return false;
  fields->push_back(field);
  return true;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

LabeledDataset parse_csv(const std::string& path,
                         const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open file");

  int line_no = 1;
  std::vector<std::string> header;
  if (!read_record(in, &header, &line_no))
    throw std::runtime_error(path + ": empty file");
  for (auto& h : header) h = trim(h);
  int label_index = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t j = i + 1; j < header.size(); ++j)
      if (header[i] == header[j])
        throw std::runtime_error(path + ":1: duplicate column name '" +
                                 header[i] + "'");
    if (header[i] == label_column) label_index = static_cast<int>(i);
  }
  if (label_index < 0)
    throw std::runtime_error(path + ":1: no column named '" + label_column +
                             "'");
  if (header.size() < 2)
    throw std::runtime_error(path + ":1: need at least one feature column");

  RawTable table;
  table.name = file_stem(path);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<int>(i) != label_index)
      table.feature_names.push_back(header[i]);

  std::vector<std::string> cells;
  while (true) {
    const int record_line = line_no;
    if (!read_record(in, &cells, &line_no)) break;
    if (cells.size() == 1 && trim(cells[0]).empty()) continue;  // blank line
    if (cells.size() != header.size())
      fail(path, record_line,
           "expected " + std::to_string(header.size()) + " fields, got " +
               std::to_string(cells.size()));
    bool missing = false;
    for (const auto& cell : cells) {
      const std::string t = trim(cell);
      if (t.empty() || t == "?") missing = true;
    }
    if (missing) {
      table.dropped++;
      continue;
    }
    std::vector<double> row;
    row.reserve(header.size() - 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<int>(i) == label_index) continue;
      double v = 0.0;
      if (!parse_double(cells[i], &v))
        fail(path, record_line,
             "non-numeric value '" + trim(cells[i]) + "' in column '" +
                 header[i] + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
    table.class_cells.push_back(
        trim(cells[static_cast<std::size_t>(label_index)]));
  }
  return finish_dataset(std::move(table));
}

void write_csv(const LabeledDataset& d, const std::string& path,
               const std::string& label_column) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  for (Eigen::Index j = 0; j < d.x.cols(); ++j)
    out << "x" << j << ",";
  out << csv_quote(label_column) << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.x(i, j));
      out << buf << ",";
    }
    const bool minority = d.y[static_cast<std::size_t>(i)] == Label::minority;
    out << csv_quote(minority ? d.minority_name : d.majority_name) << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

LabeledDataset load_dataset(const std::string& path,
                            const std::string& label_column) {
  const std::size_t dot = path.find_last_of('.');
  const std::string ext =
      dot == std::string::npos ? "" : lower(path.substr(dot));
  if (ext == ".dat") return parse_keel(path);
  return parse_csv(path, label_column);
}

}  // namespace dcshs
