#include "greedy_opt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace greedy_opt {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_points(std::span<const Point> points) {
  std::string out;
  for (const Point& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (i) out += ' ';
      out += format_double(p[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::vector<double> values;
    std::string token;
    while (row >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw InvalidArgument("line " + std::to_string(line_no) + ": cannot parse '" + token + "' as a number");
      }
      values.push_back(v);
    }
    const auto n = static_cast<Eigen::Index>(values.size());
    if (width >= 0 && n != width) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " columns, found " + std::to_string(n));
    }
    width = n;
    Point p = Eigen::Map<const Point>(values.data(), n);
    require_finite(p, "line " + std::to_string(line_no));
    out.push_back(std::move(p));
  }
  return out;
}

void write_points(const std::filesystem::path& path, std::span<const Point> points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_points(points);
}

std::vector<Point> read_points(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_points(ss.str());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_dictionary(const std::filesystem::path& path, const Dictionary& dictionary) {
  std::vector<Point> atoms;
  for (std::size_t i = 0; i < dictionary.size(); ++i) atoms.push_back(dictionary.atom(i));
  write_points(path, atoms);
}

Dictionary read_dictionary(const std::filesystem::path& path, NormSpec norm, bool normalize) {
  return Dictionary(read_points(path), norm, normalize);
}

}  // namespace greedy_opt
