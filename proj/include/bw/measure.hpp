#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "bw/defs.hpp"
#include "bw/errors.hpp"
#include "bw/generator.hpp"

namespace bw {

/* A finitely supported probability measure: n weighted atoms in R^d.
   Construct through make_measure so the invariants (positive weights,
   total mass 1 up to 1e-12) always hold. */
struct DiscreteMeasure {
  Matrix points;   // n x d, one atom per row
  Vector weights;  // n, positive, sums to 1

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

/* Validates and normalizes: atoms with weight below 1e-15 are dropped
   (with a warning) and the rest renormalized; a total mass within 1e-6
   of 1 is rescaled exactly, anything further off is rejected. */
DiscreteMeasure make_measure(Matrix points, Vector weights);

/* Convenience: uniform weights over the given atoms. */
DiscreteMeasure uniform_measure(Matrix points);

/* Warning sink for non-fatal conditions (defaults to stderr). */
std::function<void(const std::string&)>& warning_handler();

/* CSV format: header "w,x1,...,xd", one atom per line, 17 significant
   digits on write so that a round trip is exact. */
DiscreteMeasure load_measure_csv(const std::string& path);
void save_measure_csv(const DiscreteMeasure& mu, const std::string& path);

/* JSON format: {"points": [[...], ...], "weights": [...]}; unknown keys
   are rejected. */
DiscreteMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure load_measure(const std::string& path);  // dispatch on extension

/* Pushforward of every atom through the mirror map (dual coordinates). */
Matrix to_dual(const Generator& gen, const DiscreteMeasure& mu);

/* Format a double with 17 significant digits (shared by CSV and JSON
   emitters so artifacts are byte-stable). */
std::string format_double(double v);

}  // namespace bw
