#ifndef NCD_CSV_HPP
#define NCD_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

namespace ncd {

// Splits a CSV line on commas; no quoting, fields may not contain commas.
std::vector<std::string> split_csv(const std::string& line);

// Strict field parsers: the whole field must be consumed. Errors are
// DataError carrying path:line and the field label.
double parse_csv_double(const std::string& field, const std::string& path,
                        long line_no, const std::string& label);
long parse_csv_long(const std::string& field, const std::string& path,
                    long line_no, const std::string& label);

// Reads non-empty lines; requires the first one to equal `header` unless the
// file has no content at all. Trailing '\r' is tolerated.
class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& header);

  // Fills the split fields of the next data line; false at end of file.
  bool next(std::vector<std::string>& fields, long& line_no);

  const std::string& path() const { return path_; }

 private:
  bool next_raw(std::string& line);

  std::string path_;
  std::ifstream in_;
  long line_no_ = 0;
};

}  // namespace ncd

#endif  // NCD_CSV_HPP
