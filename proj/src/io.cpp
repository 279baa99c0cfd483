#include "metricspace/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "metricspace/error.hpp"

namespace metricspace {

namespace {

std::string point_label(const std::string& where, std::size_t i, const Json& point) {
  std::string label = where + "points[" + std::to_string(i) + "]";
  if (point.is_object() && point.contains("id") && point["id"].is_string()) {
    label += " ('" + point["id"].get<std::string>() + "')";
  }
  return label;
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing \"" + key + "\"");
  return *it;
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(where + ": non-finite number");
  return x;
}

std::vector<double> numbers(const Json& v, std::size_t expected, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  if (v.size() != expected) {
    throw ParseError(where + ": has " + std::to_string(v.size()) + " entries, expected " + std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(number(v[j], where + "[" + std::to_string(j) + "]"));
  return out;
}

int dimension(const Json& body, const std::string& where) {
  const Json& n = require(body, "n", where);
  if (!n.is_number_integer()) throw ParseError(where + "n: expected an integer");
  const auto value = n.get<long long>();
  if (value < 1 || value > kMaxDim) {
    throw ParseError(where + "n: must be in [1, " + std::to_string(kMaxDim) + "], got " + std::to_string(value));
  }
  return static_cast<int>(value);
}

const Json& point_list(const Json& body, const std::string& where) {
  const Json& points = require(body, "points", where);
  if (!points.is_array() || points.empty()) throw ParseError(where + "points: expected a nonempty array");
  return points;
}

ChartPtr parse_chart(const Json& body, const std::string& where) {
  const int n = dimension(body, where);
  const Json& points = point_list(body, where);
  std::vector<QuadChart::Point> pts;
  pts.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Json& p = points[i];
    const std::string label = point_label(where, i, p);
    const Json& id = require(p, "id", label);
    if (!id.is_string()) throw ParseError(label + ": \"id\" must be a string");
    const double weight = number(require(p, "weight", label), label + ".weight");
    if (!(weight > 0.0)) throw ParseError(label + ": weight must be positive");
    QuadChart::Point pt{id.get<std::string>(), weight, {}};
    if (auto x = p.find("x"); x != p.end()) pt.coords = numbers(*x, x->is_array() ? x->size() : 0, label + ".x");
    pts.push_back(std::move(pt));
  }
  try {
    return std::make_shared<const QuadChart>(n, std::move(pts));
  } catch (const StructuralError& e) {
    throw ParseError(where + e.what());
  }
}

/// Reads the chart of `body` unless `shared` is given, in which case the body
/// must describe the same chart.
ChartPtr chart_of(const Json& body, const std::string& where, const ChartPtr& shared) {
  ChartPtr chart = parse_chart(body, where);
  if (!shared) return chart;
  if (!same_chart(*chart, *shared)) {
    throw ParseError(where + "chart mismatch: " + chart->fingerprint_hex() + " vs " + shared->fingerprint_hex());
  }
  return shared;
}

std::vector<SymMatrix> symmetric_entries(const Json& body, const ChartPtr& chart, const std::string& where,
                                         bool tangent) {
  const Json& points = point_list(body, where);
  const std::size_t m = packed_size(chart->dim());
  std::vector<SymMatrix> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string label = point_label(where, i, points[i]);
    const char* key = "g";
    if (tangent && points[i].contains("h")) key = "h";
    const std::vector<double> v = numbers(require(points[i], key, label), m, label + "." + key);
    out.push_back(SymMatrix::from_upper(chart->dim(), v));
  }
  return out;
}

MetricField metric_field_in(const Json& body, const std::string& where, const ChartPtr& shared) {
  ChartPtr chart = chart_of(body, where, shared);
  std::vector<SymMatrix> syms = symmetric_entries(body, chart, where, false);
  std::vector<SpdMatrix> values;
  values.reserve(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (!is_spd(syms[i])) throw DomainError("metric is not positive definite", chart->point(i).id);
    values.emplace_back(syms[i]);
  }
  return MetricField(std::move(chart), std::move(values));
}

Json chart_body(const QuadChart& chart) {
  Json points = Json::array();
  for (const auto& p : chart.points()) {
    Json jp = {{"id", p.id}, {"weight", p.weight}};
    if (!p.coords.empty()) jp["x"] = p.coords;
    points.push_back(std::move(jp));
  }
  return {{"n", chart.dim()}, {"points", std::move(points)}};
}

Json upper(const SymMatrix& m) {
  const auto u = m.upper();
  return Json(std::vector<double>(u.begin(), u.end()));
}

template <class F>
auto with_source(const std::string& path, F&& read) {
  const Json doc = read_json_file(path);
  try {
    return read(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << dump_json(doc);
  if (!out) throw ParseError(path + ": write failed");
}

MetricField metric_field_from_json(const Json& doc) { return metric_field_in(doc, "", nullptr); }

TangentField tangent_field_from_json(const Json& doc) {
  ChartPtr chart = parse_chart(doc, "");
  std::vector<SymMatrix> values = symmetric_entries(doc, chart, "", true);
  return TangentField(std::move(chart), std::move(values));
}

VolumeDensity density_from_json(const Json& doc) {
  ChartPtr chart = parse_chart(doc, "");
  const Json& points = point_list(doc, "");
  std::vector<double> nu;
  nu.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string label = point_label("", i, points[i]);
    nu.push_back(number(require(points[i], "nu", label), label + ".nu"));
  }
  return VolumeDensity(std::move(chart), std::move(nu));
}

DiscretePath path_from_json(const Json& doc) {
  const Json& k = require(doc, "K", "path");
  if (!k.is_number_integer() || k.get<long long>() < 1) throw ParseError("K: expected a positive integer");
  const auto segments = k.get<long long>();
  const Json& frames = require(doc, "frames", "path");
  if (!frames.is_array() || static_cast<long long>(frames.size()) != segments + 1) {
    throw ParseError("frames: expected K + 1 = " + std::to_string(segments + 1) + " frames");
  }
  ChartPtr chart;
  std::vector<MetricField> fields;
  fields.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    fields.push_back(metric_field_in(frames[f], "frames[" + std::to_string(f) + "].", chart));
    chart = fields.back().chart;
  }
  return DiscretePath(std::move(chart), std::move(fields));
}

Json to_json(const MetricField& field) {
  Json body = chart_body(*field.chart);
  for (std::size_t i = 0; i < field.values.size(); ++i) body["points"][i]["g"] = upper(field.at(i).sym());
  return body;
}

Json to_json(const TangentField& field) {
  Json body = chart_body(*field.chart);
  for (std::size_t i = 0; i < field.values.size(); ++i) body["points"][i]["h"] = upper(field.at(i));
  return body;
}

Json to_json(const VolumeDensity& density) {
  Json body = chart_body(*density.chart);
  for (std::size_t i = 0; i < density.values.size(); ++i) body["points"][i]["nu"] = density.at(i);
  return body;
}

Json to_json(const DiscretePath& path) {
  Json frames = Json::array();
  for (const auto& f : path.frames) frames.push_back(to_json(f));
  return {{"K", path.segments()}, {"frames", std::move(frames)}};
}

Json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration}, {"energy", r.energy}, {"length", r.length}, {"step", r.step},
          {"backtracks", r.backtracks}};
}

Json to_json(const Diagnostics& d) {
  return {{"status", to_string(d.status)}, {"iterations", d.iterations}, {"initializer", d.initializer},
          {"returned", d.returned}, {"fd_fallback", d.fd_fallback}};
}

MetricField read_metric_field(const std::string& path) {
  return with_source(path, [](const Json& doc) { return metric_field_from_json(doc); });
}

TangentField read_tangent_field(const std::string& path) {
  return with_source(path, [](const Json& doc) { return tangent_field_from_json(doc); });
}

VolumeDensity read_density(const std::string& path) {
  return with_source(path, [](const Json& doc) { return density_from_json(doc); });
}

DiscretePath read_path(const std::string& path) {
  return with_source(path, [](const Json& doc) { return path_from_json(doc); });
}

}  // namespace metricspace
