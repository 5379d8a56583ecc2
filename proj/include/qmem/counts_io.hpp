#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qmem/records.hpp"

namespace qmem {

/// Plain-text counts file:
///
///   # qmem-counts 1
///   # <key>: <value>          (metadata, in order)
///   <input> <meas> <raw> <background>
///
/// One record per line, indices 1-based.
struct CountsFile {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<CountRecord> records;

  /// Value of the first metadata entry named `key`, or "" if absent.
  std::string meta(const std::string& key) const;
};

void write_counts(std::ostream& os, const CountsFile& file);

/// Throws Error(InvalidConfig) naming the offending line.
CountsFile read_counts(std::istream& is);

}  // namespace qmem
