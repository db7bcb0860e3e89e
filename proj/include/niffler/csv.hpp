#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace niffler {

// RFC-4180-style delimited text. Quoted fields may contain the delimiter,
// doubled quotes and embedded newlines; LF and CRLF row endings both accepted.
// Fully blank lines are skipped.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delimiter = ',');

// Reads the whole file; throws std::runtime_error when it cannot be opened.
std::vector<std::vector<std::string>> parse_delimited_file(const std::string& path,
                                                           char delimiter = ',');

// Quotes the field only when it contains the delimiter, a quote or a newline.
std::string csv_escape(std::string_view field, char delimiter = ',');

void write_delimited_row(std::ostream& out, const std::vector<std::string>& row,
                         char delimiter = ',');

}  // namespace niffler
