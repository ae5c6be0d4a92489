#include "ncd/csv.hpp"

#include <charconv>

#include "ncd/errors.hpp"

namespace ncd {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

namespace {

template <typename T>
T parse_field(const std::string& field, const std::string& path, long line_no,
              const std::string& label) {
  T value{};
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse " +
                    label + " '" + field + "'");
  }
  return value;
}

}  // namespace

double parse_csv_double(const std::string& field, const std::string& path,
                        long line_no, const std::string& label) {
  return parse_field<double>(field, path, line_no, label);
}

long parse_csv_long(const std::string& field, const std::string& path,
                    long line_no, const std::string& label) {
  return parse_field<long>(field, path, line_no, label);
}

CsvReader::CsvReader(const std::string& path, const std::string& header)
    : path_(path) {
  in_.open(path);
  if (!in_) throw DataError("cannot open " + path);
  std::string line;
  if (next_raw(line)) {
    if (line != header) {
      throw DataError(path + ":" + std::to_string(line_no_) +
                      ": expected header '" + header + "'");
    }
  }
}

bool CsvReader::next(std::vector<std::string>& fields, long& line_no) {
  std::string line;
  if (!next_raw(line)) return false;
  fields = split_csv(line);
  line_no = line_no_;
  return true;
}

bool CsvReader::next_raw(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

}  // namespace ncd
