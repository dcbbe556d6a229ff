#pragma once

#include "greedy_opt/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace greedy_opt {

// Plain-text matrix format: one point (or atom) per row, whitespace-separated
// decimals printed with 17 significant digits, d columns. Blank lines and
// lines starting with '#' are ignored on input.

std::string format_points(std::span<const Point> points);
std::vector<Point> parse_points(const std::string& text);

void write_points(const std::filesystem::path& path, std::span<const Point> points);
std::vector<Point> read_points(const std::filesystem::path& path);

void write_dictionary(const std::filesystem::path& path, const Dictionary& dictionary);
Dictionary read_dictionary(const std::filesystem::path& path, NormSpec norm, bool normalize = false);

/// %.17g, the fixed numeric format of every text output.
std::string format_double(double v);

}  // namespace greedy_opt
