#include "molab/io.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <sstream>

#include "molab/error.hpp"

namespace molab {

namespace {

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw PreconditionError(fmt::format("{} must be an object", path), path);
  auto it = j.find(key);
  if (it == j.end()) throw PreconditionError(fmt::format("missing field {}.{}", path, key), path + "." + key);
  return *it;
}

double real_field(const Json& j, const char* key, const std::string& path) {
  return real_from_json(field(j, key, path), path + "." + key);
}

double real_or(const Json& j, const char* key, double fallback, const std::string& path) {
  return j.contains(key) ? real_field(j, key, path) : fallback;
}

int int_field(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number_integer()) throw PreconditionError(fmt::format("{}.{} must be an integer", path, key), path + "." + key);
  return v.get<int>();
}

std::string string_field(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_string()) throw PreconditionError(fmt::format("{}.{} must be a string", path, key), path + "." + key);
  return v.get<std::string>();
}

Side side_from_string(const std::string& s, const std::string& path) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "both") return Side::Both;
  throw PreconditionError(fmt::format("{} must be left, right or both", path), path);
}

BoxSet domain_or_default(const Json& j) {
  return j.contains("domain") ? boxset_from_json(j["domain"], "family.domain") : default_example_domain();
}

Json point_to_json(const Point& p, int dim) {
  return dim == 1 ? Json::array({real_to_json(p[0])}) : Json::array({real_to_json(p[0]), real_to_json(p[1])});
}

}  // namespace

Json real_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw PreconditionError(fmt::format("{} must be a real number", path), path);
}

Json to_json(const Box& b) {
  if (b.dim == 1) return Json::array({b.lo[0], b.hi[0]});
  return Json::array({b.lo[0], b.lo[1], b.hi[0], b.hi[1]});
}

Box box_from_json(const Json& j, int dim, const std::string& path) {
  const std::size_t want = dim == 1 ? 2 : 4;
  if (!j.is_array() || j.size() != want)
    throw PreconditionError(fmt::format("{} must be an array of {} reals", path, want), path);
  std::vector<double> v;
  for (std::size_t i = 0; i < want; ++i) v.push_back(real_from_json(j[i], fmt::format("{}[{}]", path, i)));
  try {
    return dim == 1 ? Box::interval(v[0], v[1]) : Box::rect(v[0], v[1], v[2], v[3]);
  } catch (const PreconditionError& e) {
    throw PreconditionError(fmt::format("{}: {}", path, e.what()), path);
  }
}

Json to_json(const BoxSet& s) {
  Json boxes = Json::array();
  for (const Box& b : s.boxes()) boxes.push_back(to_json(b));
  return Json{{"dim", s.dim()}, {"closed", s.closed()}, {"boxes", boxes}};
}

BoxSet boxset_from_json(const Json& j, const std::string& path) {
  int dim = j.contains("dim") ? int_field(j, "dim", path) : 1;
  if (dim != 1 && dim != 2) throw PreconditionError(fmt::format("{}.dim must be 1 or 2", path), path + ".dim");
  const Json& closed = field(j, "closed", path);
  if (!closed.is_boolean()) throw PreconditionError(fmt::format("{}.closed must be a boolean", path), path + ".closed");
  const Json& boxes = field(j, "boxes", path);
  if (!boxes.is_array()) throw PreconditionError(fmt::format("{}.boxes must be an array", path), path + ".boxes");
  std::vector<Box> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) out.push_back(box_from_json(boxes[i], dim, fmt::format("{}.boxes[{}]", path, i)));
  return BoxSet(dim, closed.get<bool>(), out);
}

Json to_json(const Descriptor& d) {
  switch (d.kind()) {
    case Descriptor::Kind::Const:
      return Json{{"kind", "const"}, {"value", d.c0()}};
    case Descriptor::Kind::Affine:
      return Json{{"kind", "affine"}, {"c0", d.c0()}, {"slope", Json::array({d.slope()[0], d.slope()[1]})}};
    case Descriptor::Kind::Sin:
      return Json{{"kind", "sin"},          {"a", d.c0()},         {"b", d.amplitude()},
                  {"omega", d.omega()}, {"phase", d.phase()}, {"axis", d.axis()}};
    case Descriptor::Kind::Reciprocal:
      return Json{{"kind", "reciprocal"}, {"c0", d.c0()}, {"c1", d.amplitude()}, {"s", d.pole()}, {"axis", d.axis()}};
    case Descriptor::Kind::Piecewise: {
      Json boxes = Json::array(), values = Json::array();
      for (const Box& b : d.piece_boxes()) boxes.push_back(to_json(b));
      const auto& ch = d.children();
      for (std::size_t i = 0; i + 1 < ch.size(); ++i) values.push_back(to_json(ch[i]));
      return Json{{"kind", "piecewise"}, {"dim", d.piece_boxes().empty() ? 1 : d.piece_boxes().front().dim},
                  {"boxes", boxes},      {"values", values},
                  {"fallback", to_json(ch.back())}};
    }
  }
  return Json();
}

Descriptor descriptor_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return Descriptor::constant(j.get<double>());
  const std::string kind = string_field(j, "kind", path);
  if (kind == "const") return Descriptor::constant(real_field(j, "value", path));
  if (kind == "affine") {
    const Json& s = field(j, "slope", path);
    if (!s.is_array() || s.empty() || s.size() > 2)
      throw PreconditionError(fmt::format("{}.slope must hold 1 or 2 reals", path), path + ".slope");
    Point slope{real_from_json(s[0], path + ".slope[0]"), s.size() == 2 ? real_from_json(s[1], path + ".slope[1]") : 0.0};
    return Descriptor::affine(real_field(j, "c0", path), slope);
  }
  const int axis = j.contains("axis") ? int_field(j, "axis", path) : 0;
  if (kind == "sin" || kind == "cos") {
    double a = real_field(j, "a", path), b = real_field(j, "b", path);
    double omega = real_or(j, "omega", 1.0, path), phase = real_or(j, "phase", 0.0, path);
    return kind == "sin" ? Descriptor::sine(a, b, omega, phase, axis) : Descriptor::cosine(a, b, omega, phase, axis);
  }
  if (kind == "reciprocal")
    return Descriptor::reciprocal(real_field(j, "c0", path), real_field(j, "c1", path), real_field(j, "s", path), axis);
  if (kind == "piecewise") {
    int dim = j.contains("dim") ? int_field(j, "dim", path) : 1;
    const Json& boxes = field(j, "boxes", path);
    const Json& values = field(j, "values", path);
    if (!boxes.is_array() || !values.is_array() || boxes.size() != values.size())
      throw PreconditionError(fmt::format("{}.boxes and {}.values must be arrays of equal length", path, path),
                              path + ".values");
    std::vector<Box> bs;
    std::vector<Descriptor> vs;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      bs.push_back(box_from_json(boxes[i], dim, fmt::format("{}.boxes[{}]", path, i)));
      vs.push_back(descriptor_from_json(values[i], fmt::format("{}.values[{}]", path, i)));
    }
    return Descriptor::piecewise(bs, vs, descriptor_from_json(field(j, "fallback", path), path + ".fallback"));
  }
  throw PreconditionError(fmt::format("unknown descriptor kind '{}'", kind), path + ".kind");
}

namespace {

MOFunction family_from_json_impl(const Json& j) {
  const std::string path = "family";
  const std::string name = string_field(j, "family", path);
  if (name == "phi1") return make_phi1(domain_or_default(j));
  if (name == "phi2") {
    int n = j.contains("N") ? int_field(j, "N", path) : 8;
    std::string en = j.contains("enumeration") ? string_field(j, "enumeration", path) : "calkin-wilf";
    return make_phi2(n, en, domain_or_default(j));
  }
  if (name == "orlicz_power")
    return make_orlicz_power(real_field(j, "q", path), real_or(j, "c", 1.0, path), domain_or_default(j));
  if (name == "orlicz_exp") return make_orlicz_exp(domain_or_default(j));
  if (name == "weighted_linear") {
    const Json& poles = field(j, "poles", path);
    if (!poles.is_array()) throw PreconditionError("family.poles must be an array", "family.poles");
    std::vector<PoleInfo> ps;
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const std::string pp = fmt::format("family.poles[{}]", i);
      PoleInfo p;
      p.location = real_field(poles[i], "location", pp);
      p.order = real_or(poles[i], "order", 1.0, pp);
      p.coefficient.mantissa = real_or(poles[i], "coefficient", 1.0, pp);
      if (poles[i].contains("side")) p.side = side_from_string(string_field(poles[i], "side", pp), pp + ".side");
      ps.push_back(p);
    }
    return make_weighted_linear(std::move(ps), domain_or_default(j));
  }
  if (name == "variable_exponent")
    return make_variable_exponent(descriptor_from_json(field(j, "p", path), "family.p"), domain_or_default(j));
  if (name == "double_phase")
    return make_double_phase(descriptor_from_json(field(j, "p", path), "family.p"),
                             descriptor_from_json(field(j, "r", path), "family.r"),
                             descriptor_from_json(field(j, "a", path), "family.a"), domain_or_default(j));
  throw PreconditionError(fmt::format("unknown family '{}'", name), "family.family");
}

}  // namespace

MOFunction family_from_json(const Json& j) {
  try {
    return family_from_json_impl(j);
  } catch (const PreconditionError& e) {
    // Constructor checks name bare parameters; report them as JSON paths.
    if (e.field().empty() || e.field().rfind("family", 0) == 0) throw;
    throw PreconditionError(e.what(), "family." + e.field());
  }
}

Json family_to_json(const MOFunction& phi) {
  Json j;
  if (phi.name() == "phi1") {
    j["family"] = "phi1";
  } else if (const auto* w = std::get_if<WeightParams>(&phi.params())) {
    if (phi.kind() == FamilyKind::SeriesWeight) {
      j = Json{{"family", "phi2"}, {"N", w->truncation}, {"enumeration", w->enumeration}};
    } else {
      j["family"] = "weighted_linear";
      Json poles = Json::array();
      for (const PoleInfo& p : w->terms)
        poles.push_back(Json{{"location", p.location},
                             {"order", p.order},
                             {"coefficient", p.coefficient.mantissa},
                             {"side", to_string(p.side)}});
      j["poles"] = poles;
    }
  } else if (const auto* o = std::get_if<OrliczParams>(&phi.params())) {
    if (o->kind == OrliczParams::Kind::Power)
      j = Json{{"family", "orlicz_power"}, {"q", o->q}, {"c", o->c}};
    else
      j["family"] = "orlicz_exp";
  } else if (const auto* e = std::get_if<ExponentParams>(&phi.params())) {
    j = Json{{"family", "variable_exponent"}, {"p", to_json(e->p)}};
  } else if (const auto* d = std::get_if<DoublePhaseParams>(&phi.params())) {
    j = Json{{"family", "double_phase"}, {"p", to_json(d->p)}, {"r", to_json(d->r)}, {"a", to_json(d->a)}};
  }
  j["domain"] = to_json(phi.domain());
  return j;
}

PiecewiseFunction function_from_json(const Json& j, const std::string& path) {
  const std::string kind = string_field(j, "kind", path);
  if (kind == "indicator")
    return PiecewiseFunction::indicator(boxset_from_json(field(j, "set", path), path + ".set"),
                                        real_or(j, "value", 1.0, path));
  const int dim = j.contains("dim") ? int_field(j, "dim", path) : 1;
  if (dim != 1 && dim != 2) throw PreconditionError(fmt::format("{}.dim must be 1 or 2", path), path + ".dim");
  if (kind == "simple") {
    const Json& pieces = field(j, "pieces", path);
    if (!pieces.is_array()) throw PreconditionError(fmt::format("{}.pieces must be an array", path), path + ".pieces");
    std::vector<SimplePiece> out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string pp = fmt::format("{}.pieces[{}]", path, i);
      SimplePiece p;
      p.value = real_field(pieces[i], "value", pp);
      p.box = box_from_json(field(pieces[i], "box", pp), dim, pp + ".box");
      p.closed = pieces[i].value("closed", true);
      out.push_back(p);
    }
    return PiecewiseFunction::simple(dim, std::move(out));
  }
  if (kind == "smooth") {
    const Json& terms = field(j, "terms", path);
    if (!terms.is_array()) throw PreconditionError(fmt::format("{}.terms must be an array", path), path + ".terms");
    std::vector<SmoothTerm> out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tp = fmt::format("{}.terms[{}]", path, i);
      SmoothTerm t;
      t.coef = real_or(terms[i], "coef", 1.0, tp);
      const Json& bumps = field(terms[i], "bumps", tp);
      if (!bumps.is_array()) throw PreconditionError(fmt::format("{}.bumps must be an array", tp), tp + ".bumps");
      for (std::size_t k = 0; k < bumps.size(); ++k) {
        const std::string bp = fmt::format("{}.bumps[{}]", tp, k);
        Bump b;
        b.plateau = box_from_json(field(bumps[k], "plateau", bp), dim, bp + ".plateau");
        const Json& ramp = field(bumps[k], "ramp", bp);
        if (ramp.is_array()) {
          if (ramp.size() != static_cast<std::size_t>(dim))
            throw PreconditionError(fmt::format("{}.ramp must hold {} reals", bp, dim), bp + ".ramp");
          for (int a = 0; a < dim; ++a) b.ramp[a] = real_from_json(ramp[a], bp + ".ramp");
        } else {
          double r = real_from_json(ramp, bp + ".ramp");
          b.ramp = Point{r, dim == 2 ? r : 0.0};
        }
        for (int a = 0; a < dim; ++a)
          if (!(b.ramp[a] > 0.0)) throw PreconditionError(fmt::format("{}.ramp must be positive", bp), bp + ".ramp");
        t.bumps.push_back(b);
      }
      out.push_back(std::move(t));
    }
    return PiecewiseFunction::smooth(dim, std::move(out));
  }
  if (kind == "log_singular") {
    // scale * ln(1 / |x - point|) on a set inside |x - point| < 1.
    const double scale = real_field(j, "scale", path), s = real_field(j, "point", path);
    BoxSet support = boxset_from_json(field(j, "support", path), path + ".support");
    if (support.dim() != 1) throw PreconditionError(fmt::format("{}.support must be 1D", path), path + ".support");
    OpaquePart part;
    part.support = support;
    part.fn = [s, support](const Point& x) {
      if (!contains(support, x)) return 0.0;
      return std::log(1.0 / std::abs(x[0] - s));
    };
    part.singular_points = {point1(s)};
    part.scale = scale;
    part.label = fmt::format("ln(1/|x-{}|)", s);
    return PiecewiseFunction::opaque(1, std::move(part));
  }
  if (kind == "sum") {
    const Json& terms = field(j, "terms", path);
    if (!terms.is_array()) throw PreconditionError(fmt::format("{}.terms must be an array", path), path + ".terms");
    PiecewiseFunction out(dim);
    for (std::size_t i = 0; i < terms.size(); ++i)
      out = out + function_from_json(terms[i], fmt::format("{}.terms[{}]", path, i));
    return out;
  }
  throw PreconditionError(fmt::format("unknown function kind '{}'", kind), path + ".kind");
}

Json to_json(const PiecewiseFunction& f) {
  Json parts = Json::array();
  if (!f.pieces().empty()) {
    Json pieces = Json::array();
    for (const SimplePiece& p : f.pieces())
      pieces.push_back(Json{{"value", p.value}, {"box", to_json(p.box)}, {"closed", p.closed}});
    parts.push_back(Json{{"kind", "simple"}, {"dim", f.dim()}, {"pieces", pieces}});
  }
  if (!f.terms().empty()) {
    Json terms = Json::array();
    for (const SmoothTerm& t : f.terms()) {
      Json bumps = Json::array();
      for (const Bump& b : t.bumps)
        bumps.push_back(Json{{"plateau", to_json(b.plateau)}, {"ramp", point_to_json(b.ramp, f.dim())}});
      terms.push_back(Json{{"coef", t.coef}, {"bumps", bumps}});
    }
    parts.push_back(Json{{"kind", "smooth"}, {"dim", f.dim()}, {"terms", terms}});
  }
  for (const OpaquePart& o : f.opaque_parts())
    parts.push_back(Json{{"kind", "opaque"}, {"label", o.label}, {"scale", o.scale}, {"support", to_json(o.support)}});
  if (parts.size() == 1) return parts.front();
  if (parts.empty()) return Json{{"kind", "simple"}, {"dim", f.dim()}, {"pieces", Json::array()}};
  return Json{{"kind", "sum"}, {"dim", f.dim()}, {"terms", parts}};
}

Json to_json(const PoleInfo& p) {
  Json j{{"location", real_to_json(p.location)},
         {"order", p.order},
         {"coefficient_mantissa", p.coefficient.mantissa},
         {"coefficient_log4_exponent", p.coefficient.log4_exponent.str()},
         {"side", to_string(p.side)},
         {"reach", real_to_json(p.reach)}};
  if (p.exact) j["exact"] = p.exact->str();
  if (p.index) {
    // Indices of on-demand poles can have millions of digits.
    const auto bits = p.index->is_zero() ? 0u : msb(*p.index) + 1;
    j["index"] = bits <= 256 ? p.index->str() : fmt::format("<{}-bit integer>", bits);
  }
  return j;
}

Json to_json(const DivergenceCertificate& c) {
  Json j{{"kind", to_string(c.kind)}, {"valid", check_certificate(c)}};
  if (c.pole) {
    j["pole"] = to_json(c.pole->pole);
    j["side"] = to_string(c.pole->side);
    j["window"] = to_json(c.pole->window);
    j["t_lower"] = c.pole->t_lower;
  }
  if (c.growth) {
    Json radii = Json::array(), partials = Json::array();
    for (double r : c.growth->radii) radii.push_back(real_to_json(r));
    for (double v : c.growth->partials) partials.push_back(real_to_json(v));
    j["growth"] = Json{{"location", point_to_json(c.growth->location, 2)},
                       {"radii", radii},
                       {"partials", partials},
                       {"threshold", c.growth->threshold},
                       {"ratio", c.growth->ratio}};
  }
  return j;
}

Json to_json(const ModularResult& m) {
  Json j{{"verdict", to_string(m.verdict)}, {"evaluations", m.evaluations}};
  if (m.finite()) {
    j["value"] = real_to_json(m.value);
    j["err"] = real_to_json(m.err);
  }
  if (m.inconclusive()) j["partial"] = real_to_json(m.partial);
  if (m.certificate) j["certificate"] = to_json(*m.certificate);
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

Json to_json(const NormResult& r) {
  Json j{{"value", real_to_json(r.value)},
         {"bracket", Json::array({real_to_json(r.lo), real_to_json(r.hi)})},
         {"membership", to_string(r.membership)},
         {"inconclusive", r.inconclusive},
         {"monotone", r.monotone},
         {"modular_at_value", to_json(r.modular_at_value)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const SingularSetEstimate& e) {
  Json flagged = Json::array();
  for (const SingularFlag& f : e.flagged) flagged.push_back(point_to_json(f.x, e.dim));
  return Json{{"dim", e.dim},
              {"grid_res", e.grid_res},
              {"nodes", e.nodes.size()},
              {"flagged_count", e.flagged.size()},
              {"flagged", flagged},
              {"inconclusive", e.inconclusive},
              {"spot_checked", e.spot_checked},
              {"spot_failures", e.spot_failures},
              {"measure_upper", e.measure_upper},
              {"flagged_outside_domain", e.flagged_outside_domain},
              {"verdict", to_string(e.verdict)}};
}

Json to_json(const NondensityWitness& w) {
  Json j{{"verdict", to_string(w.kind)}};
  switch (w.kind) {
    case NondensityWitness::Kind::Excluded:
      j["ball"] = to_json(w.ball);
      j["min_on_ball"] = w.min_on_ball;
      j["certificate"] = to_json(w.certificate);
      break;
    case NondensityWitness::Kind::DistanceBound:
      j["region"] = to_json(w.region);
      j["gap"] = w.gap;
      j["norm_lower_bound"] = real_to_json(w.norm_lower_bound);
      break;
    case NondensityWitness::Kind::NoneFound:
      j["ambiguous"] = to_json(w.ambiguous);
      break;
  }
  return j;
}

Json to_json(const Delta2Report& r) {
  return Json{{"pass", r.pass},
              {"samples", r.samples},
              {"worst_excess", real_to_json(r.worst_excess)},
              {"worst_x", Json::array({r.worst_x[0], r.worst_x[1]})},
              {"worst_t", r.worst_t}};
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw PreconditionError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()), path.string());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace molab
