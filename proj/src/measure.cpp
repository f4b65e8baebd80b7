#include "bw/measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace bw {

namespace {
constexpr double kDropWeight = 1e-15;
constexpr double kMassSlack = 1e-6;
}  // namespace

std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler =
      [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
  return handler;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DiscreteMeasure make_measure(Matrix points, Vector weights) {
  if (points.rows() != weights.size())
    throw input_error("measure: " + std::to_string(points.rows()) +
                      " atoms but " + std::to_string(weights.size()) +
                      " weights");
  if (points.rows() == 0) throw input_error("measure: no atoms");
  for (Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw input_error("measure: weight " + std::to_string(i) +
                        " is negative or not finite");
    for (Index j = 0; j < points.cols(); ++j)
      if (!std::isfinite(points(i, j)))
        throw input_error("measure: atom " + std::to_string(i) +
                          " has a non-finite coordinate");
  }

  double total = weights.sum();
  if (std::abs(total - 1.0) > kMassSlack)
    throw input_error("measure: total mass " + format_double(total) +
                      " is further than " + format_double(kMassSlack) +
                      " from 1");

  Index kept = 0;
  for (Index i = 0; i < weights.size(); ++i)
    if (weights[i] >= kDropWeight) ++kept;
  if (kept == 0) throw input_error("measure: all atoms below the weight floor");
  if (kept < weights.size()) {
    warning_handler()("measure: dropping " +
                      std::to_string(weights.size() - kept) +
                      " atom(s) with weight below 1e-15 and renormalizing");
    Matrix p(kept, points.cols());
    Vector w(kept);
    Index r = 0;
    for (Index i = 0; i < weights.size(); ++i)
      if (weights[i] >= kDropWeight) {
        p.row(r) = points.row(i);
        w[r] = weights[i];
        ++r;
      }
    points.swap(p);
    weights.swap(w);
  }

  weights /= weights.sum();
  return DiscreteMeasure{std::move(points), std::move(weights)};
}

DiscreteMeasure uniform_measure(Matrix points) {
  Vector w = Vector::Constant(points.rows(), 1.0 / double(points.rows()));
  return make_measure(std::move(points), std::move(w));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error(context + ": cannot parse '" + s + "' as a number");
  }
}

}  // namespace

DiscreteMeasure load_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open measure file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw input_error("measure file '" + path + "' is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "w")
    throw input_error("measure file '" + path +
                      "': header must be w,x1,...,xd");
  Index d = Index(header.size()) - 1;
  for (Index j = 0; j < d; ++j)
    if (header[std::size_t(j) + 1] != "x" + std::to_string(j + 1))
      throw input_error("measure file '" + path +
                        "': header must be w,x1,...,xd");

  std::vector<double> ws;
  std::vector<double> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (Index(fields.size()) != d + 1)
      throw input_error("measure file '" + path + "' line " +
                        std::to_string(lineno) + ": expected " +
                        std::to_string(d + 1) + " fields");
    std::string ctx = path + " line " + std::to_string(lineno);
    ws.push_back(parse_double(fields[0], ctx));
    for (Index j = 0; j < d; ++j)
      pts.push_back(parse_double(fields[std::size_t(j) + 1], ctx));
  }
  if (ws.empty()) throw input_error("measure file '" + path + "' has no atoms");

  Index n = Index(ws.size());
  Matrix points(n, d);
  Vector weights(n);
  for (Index i = 0; i < n; ++i) {
    weights[i] = ws[std::size_t(i)];
    for (Index j = 0; j < d; ++j)
      points(i, j) = pts[std::size_t(i * d + j)];
  }
  return make_measure(std::move(points), std::move(weights));
}

void save_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write measure file '" + path + "'");
  out << "w";
  for (Index j = 0; j < mu.dim(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (Index i = 0; i < mu.size(); ++i) {
    out << format_double(mu.weights[i]);
    for (Index j = 0; j < mu.dim(); ++j)
      out << "," << format_double(mu.points(i, j));
    out << "\n";
  }
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw input_error("measure JSON: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "points" && it.key() != "weights")
      throw input_error("measure JSON: unknown key '" + it.key() + "'");
  if (!j.contains("points") || !j.contains("weights"))
    throw input_error("measure JSON: need both 'points' and 'weights'");
  const auto& jp = j["points"];
  const auto& jw = j["weights"];
  if (!jp.is_array() || jp.empty() || !jw.is_array())
    throw input_error("measure JSON: 'points' and 'weights' must be arrays");
  if (jp.size() != jw.size())
    throw input_error("measure JSON: points/weights length mismatch");

  Index n = Index(jp.size());
  if (!jp[0].is_array() || jp[0].empty())
    throw input_error("measure JSON: each point must be a coordinate array");
  Index d = Index(jp[0].size());
  Matrix points(n, d);
  Vector weights(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = jp[std::size_t(i)];
    if (!row.is_array() || Index(row.size()) != d)
      throw input_error("measure JSON: point " + std::to_string(i) +
                        " has inconsistent dimension");
    for (Index k = 0; k < d; ++k) {
      if (!row[std::size_t(k)].is_number())
        throw input_error("measure JSON: non-numeric coordinate");
      points(i, k) = row[std::size_t(k)].get<double>();
    }
    if (!jw[std::size_t(i)].is_number())
      throw input_error("measure JSON: non-numeric weight");
    weights[i] = jw[std::size_t(i)].get<double>();
  }
  return make_measure(std::move(points), std::move(weights));
}

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  nlohmann::json jp = nlohmann::json::array();
  nlohmann::json jw = nlohmann::json::array();
  for (Index i = 0; i < mu.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < mu.dim(); ++j) row.push_back(mu.points(i, j));
    jp.push_back(std::move(row));
    jw.push_back(mu.weights[i]);
  }
  return nlohmann::json{{"points", std::move(jp)}, {"weights", std::move(jw)}};
}

DiscreteMeasure load_measure(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "json") {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open measure file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw input_error("measure file '" + path + "': " + e.what());
    }
    return measure_from_json(j);
  }
  return load_measure_csv(path);
}

Matrix to_dual(const Generator& gen, const DiscreteMeasure& mu) {
  if (mu.dim() != gen.dim)
    throw input_error(gen.name + ": to_dual got a measure of dimension " +
                      std::to_string(mu.dim()));
  Matrix out(mu.size(), mu.dim());
  for (Index i = 0; i < mu.size(); ++i) {
    Vector x = mu.points.row(i);
    gen.require_primal(x, "to_dual");
    out.row(i) = gen.grad(x);
  }
  return out;
}

}  // namespace bw
