#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace mfg::csv {

/// Shortest round-trip-safe text for a double: 17 significant digits,
/// decimal point, no locale.
std::string format(double x);

/// Accumulates an RFC 4180 table: header row, comma separated, LF line ends.
class Table {
 public:
  explicit Table(std::initializer_list<std::string_view> header);

  Table& cell(double x);
  Table& cell(long long x);
  Table& cell(int x) { return cell(static_cast<long long>(x)); }
  Table& cell(std::string_view text);
  Table& end_row();

  const std::string& str() const { return text_; }

 private:
  std::string text_;
  bool row_open_ = false;
};

/// Writes `content` to a temporary sibling and renames it over `file`.
void write_atomic(const std::filesystem::path& file, std::string_view content);

}  // namespace mfg::csv
