#pragma once

// JSON file formats.
//
//   field:   { "n": 2, "points": [ { "id": "p0", "weight": 1, "g": [g00, g01, g11] } ] }
//   tangent: same, with "h" holding the symmetric entries ("g" is accepted too)
//   density: same, with "nu" holding one positive number per point
//   path:    { "K": 4, "frames": [ <field body>, ... K + 1 of them ] }
//
// Matrices are stored as the row-major upper triangle. Points may carry
// optional coordinates "x". Floats are written in shortest round-trip form,
// so write followed by read reproduces every value bit for bit.
//
// Malformed documents raise ParseError (with line and column for JSON syntax,
// or the offending point for content); non-SPD matrices raise DomainError.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "metricspace/field.hpp"
#include "metricspace/optimizer.hpp"
#include "metricspace/product.hpp"

namespace metricspace {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);
Json parse_json(const std::string& text, const std::string& source = "<input>");
/// Two-space indented with a trailing newline.
std::string dump_json(const Json& doc);
void write_json_file(const std::string& path, const Json& doc);

MetricField metric_field_from_json(const Json& doc);
TangentField tangent_field_from_json(const Json& doc);
VolumeDensity density_from_json(const Json& doc);
/// All frames must share one chart.
DiscretePath path_from_json(const Json& doc);

Json to_json(const MetricField& field);
Json to_json(const TangentField& field);
Json to_json(const VolumeDensity& density);
Json to_json(const DiscretePath& path);
Json to_json(const IterationRecord& record);
/// Summary without the iteration trace.
Json to_json(const Diagnostics& diagnostics);

MetricField read_metric_field(const std::string& path);
TangentField read_tangent_field(const std::string& path);
VolumeDensity read_density(const std::string& path);
DiscretePath read_path(const std::string& path);

}  // namespace metricspace
