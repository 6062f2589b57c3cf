#pragma once

#include <istream>
#include <string>
#include <vector>

namespace stablerank::csv {

/// Reads one record (RFC 4180 quoting). Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields);

std::string quote(const std::string& field);

}  // namespace stablerank::csv
