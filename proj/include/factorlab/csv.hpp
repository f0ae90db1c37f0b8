#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace factorlab {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

std::string_view trim(std::string_view text);
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest decimal text that reads back to the identical double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes the whole file or throws IoError; the parent directory must exist.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace factorlab
