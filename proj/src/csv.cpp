#include "mfg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "mfg/errors.hpp"

namespace mfg::csv {

std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Table::Table(std::initializer_list<std::string_view> header) {
  for (auto h : header) cell(h);
  end_row();
}

Table& Table::cell(double x) { return cell(std::string_view(format(x))); }

Table& Table::cell(long long x) { return cell(std::string_view(std::to_string(x))); }

Table& Table::cell(std::string_view text) {
  if (row_open_) text_ += ',';
  const bool quote = text.find_first_of(",\"\n\r") != std::string_view::npos;
  if (quote) {
    text_ += '"';
    for (char c : text) {
      if (c == '"') text_ += '"';
      text_ += c;
    }
    text_ += '"';
  } else {
    text_ += text;
  }
  row_open_ = true;
  return *this;
}

Table& Table::end_row() {
  text_ += '\n';
  row_open_ = false;
  return *this;
}

void write_atomic(const std::filesystem::path& file, std::string_view content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace mfg::csv
