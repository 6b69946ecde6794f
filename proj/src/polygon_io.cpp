#include "flatspec/polygon_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "flatspec/errors.hpp"

namespace flatspec::geometry {

ConvexPolygon parse_polygon(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw GeometryError("polygon input is empty");

  std::vector<Point> pts;
  if (text[first] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw GeometryError(std::string("polygon JSON: ") + e.what());
    }
    for (const auto& item : j) {
      if (!item.is_array() || item.size() != 2) throw GeometryError("polygon JSON: expected [x, y] pairs");
      pts.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    return ConvexPolygon(std::move(pts));
  }

  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double x, y;
    if (!(fields >> x)) continue;  // blank or comment-only line
    std::string rest;
    if (!(fields >> y) || (fields >> rest)) {
      throw GeometryError("polygon text: expected \"x y\" on line " + std::to_string(lineno));
    }
    pts.push_back({x, y});
  }
  return ConvexPolygon(std::move(pts));
}

ConvexPolygon read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open polygon file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_polygon(buffer.str());
}

void write_polygon(std::ostream& out, const ConvexPolygon& poly) {
  const auto old = out.precision(17);
  for (const auto& p : poly.vertices()) out << p.x << ' ' << p.y << '\n';
  out.precision(old);
}

nlohmann::json polygon_to_json(const ConvexPolygon& poly) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : poly.vertices()) j.push_back({p.x, p.y});
  return j;
}

}  // namespace flatspec::geometry
