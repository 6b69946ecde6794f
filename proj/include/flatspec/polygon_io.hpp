#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "flatspec/geometry.hpp"

namespace flatspec::geometry {

/// Parses either the plain-text format (one "x y" pair per line, '#' starts a
/// comment) or a JSON array of [x, y] pairs. The format is detected from the
/// first non-blank character.
ConvexPolygon parse_polygon(std::string_view text);

ConvexPolygon read_polygon_file(const std::string& path);

/// Plain-text writer, 17 significant digits per coordinate.
void write_polygon(std::ostream& out, const ConvexPolygon& poly);

nlohmann::json polygon_to_json(const ConvexPolygon& poly);

}  // namespace flatspec::geometry
