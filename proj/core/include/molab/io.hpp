#pragma once

// JSON encoding of sets, descriptors, families, functions and results.
// Non-finite reals are written as the strings "inf", "-inf" and "nan".
// Decoding errors are PreconditionErrors whose field is a dotted JSON path.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "molab/density.hpp"

namespace molab {

using Json = nlohmann::json;

Json real_to_json(double v);
double real_from_json(const Json& j, const std::string& path);

/// {"dim": 1, "closed": true, "boxes": [[lo, hi], ...]}; 2D boxes are
/// [x0, y0, x1, y1].
Json to_json(const BoxSet& s);
BoxSet boxset_from_json(const Json& j, const std::string& path = "set");

Json to_json(const Box& b);
Box box_from_json(const Json& j, int dim, const std::string& path);

/// {"kind": "const" | "affine" | "sin" | "cos" | "reciprocal" | "piecewise", ...}
Json to_json(const Descriptor& d);
Descriptor descriptor_from_json(const Json& j, const std::string& path = "descriptor");

/// {"family": "phi1" | "phi2" | "orlicz_power" | "orlicz_exp" |
///  "weighted_linear" | "variable_exponent" | "double_phase", "domain": ..., ...}
MOFunction family_from_json(const Json& j);
Json family_to_json(const MOFunction& phi);

/// {"kind": "simple" | "indicator" | "smooth" | "log_singular" | "sum", ...}
PiecewiseFunction function_from_json(const Json& j, const std::string& path = "function");
Json to_json(const PiecewiseFunction& f);

Json to_json(const PoleInfo& p);
Json to_json(const DivergenceCertificate& c);
Json to_json(const ModularResult& m);
Json to_json(const NormResult& r);
Json to_json(const SingularSetEstimate& e);
Json to_json(const NondensityWitness& w);
Json to_json(const Delta2Report& r);

Json load_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace molab
