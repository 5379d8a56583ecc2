#include "qmem/counts_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "qmem/error.hpp"

namespace qmem {

namespace {

constexpr const char* kMagic = "# qmem-counts 1";

[[noreturn]] void malformed(int line, const std::string& why) {
  std::ostringstream os;
  os << "counts file line " << line << ": " << why;
  throw Error(ErrorCode::InvalidConfig, os.str());
}

}  // namespace

std::string CountsFile::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

void write_counts(std::ostream& os, const CountsFile& file) {
  os << kMagic << '\n';
  for (const auto& [k, v] : file.metadata) os << "# " << k << ": " << v << '\n';
  for (const auto& r : file.records) {
    os << r.input_index << ' ' << r.meas_index << ' ' << r.raw_counts << ' '
       << r.background_counts << '\n';
  }
}

CountsFile read_counts(std::istream& is) {
  CountsFile file;
  std::string line;
  int n = 0;
  if (!std::getline(is, line) || line != kMagic) malformed(1, "missing '# qmem-counts 1' header");
  ++n;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      key.erase(0, key.find_first_not_of(' '));
      std::string value = line.substr(colon + 1);
      value.erase(0, value.find_first_not_of(' '));
      file.metadata.emplace_back(std::move(key), std::move(value));
      continue;
    }
    std::istringstream fields(line);
    CountRecord r;
    if (!(fields >> r.input_index >> r.meas_index >> r.raw_counts >> r.background_counts)) {
      malformed(n, "expected '<input> <meas> <raw> <background>'");
    }
    std::string extra;
    if (fields >> extra) malformed(n, "trailing fields");
    if (r.input_index < 1 || r.meas_index < 1) malformed(n, "indices are 1-based");
    if (r.raw_counts < 0 || r.background_counts < 0) malformed(n, "negative counts");
    file.records.push_back(r);
  }
  return file;
}

}  // namespace qmem
