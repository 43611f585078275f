#pragma once

#include <iosfwd>
#include <string>

#include "nfsrd/dataset.hpp"

namespace nfsrd {

// Comma-separated numeric table with a header row. The column named `target`
// becomes the response, every other column a feature. Throws DataError on an
// empty file, a missing target, ragged rows or a non-numeric cell (the
// message names the 1-based line and the column).
Dataset read_csv(std::istream& in, const std::string& target);
Dataset read_csv_file(const std::string& path, const std::string& target);

// Features in column order, then the response under `target`. Values are
// written with shortest round-trip precision.
void write_csv(std::ostream& out, const Dataset& data, const std::string& target = "target");

}  // namespace nfsrd
