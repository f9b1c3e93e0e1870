// config.hpp — the model-config JSON document: parsing with location-aware
// errors, named-parameter substitution into Pauli coefficients, instantiation
// to a PumpModel, and a normalized dump that round-trips exactly.
//
// Document layout:
// {
//   "parameters": {"omega": 1.0},                      // optional defaults
//   "subsystems": [
//     {"dim": 2, "beta": 1.0,
//      "hamiltonian": {"terms": [{"coeff": "omega", "pauli": "Z"}]}},
//     {"dim": 2, "beta": 2.0,
//      "hamiltonian": {"matrix": [[[re,im],[re,im]], [[re,im],[re,im]]]}}
//   ],
//   "interaction": [
//     {"duration": 1.0,
//      "terms": [{"coeff": 1.0, "factors": [[0,"X"],[1,"X"]]}]}
//     // or {"duration": 1.0, "matrix": [...]}
//   ],
//   "tau": 1.0,
//   "options": {"conservation": "error", "merge_tol": 1e-12, "drop_tol": 1e-15}
// }
// Coefficients are numbers or strings naming a parameter. Complex entries are
// [re, im] pairs.

#pragma once

#include "qpump/model.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <set>

namespace qpump {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A literal value or a reference to a named scalar parameter.
struct CoefficientExpr {
  double value = 0.0;
  std::string parameter;  // empty for literals
  bool symbolic() const { return !parameter.empty(); }
};

struct LocalTermConfig {
  CoefficientExpr coeff;
  Pauli op = Pauli::I;
};

struct SubsystemConfig {
  int dim = 0;
  double beta = 0.0;
  bool has_matrix = false;
  ComplexMatrix matrix;
  std::vector<LocalTermConfig> terms;
};

struct InteractionTermConfig {
  CoefficientExpr coeff;
  std::vector<std::pair<int, Pauli>> factors;
};

struct SegmentConfig {
  double duration = 0.0;
  bool has_matrix = false;
  ComplexMatrix matrix;
  std::vector<InteractionTermConfig> terms;
};

struct ModelConfig {
  std::vector<SubsystemConfig> subsystems;
  std::vector<SegmentConfig> interaction;
  double tau = 0.0;
  ModelOptions options;
  std::map<std::string, double> parameters;  // defaults for symbolic coefficients
};

namespace detail {

using json = nlohmann::json;

inline double expect_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw ParseError(where + ": expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

inline Complex expect_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError(where + ": expected a [re, im] pair");
  return Complex(expect_number(j[0], where + "[0]"), expect_number(j[1], where + "[1]"));
}

inline ComplexMatrix expect_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError(where + ": expected a non-empty array of rows");
  const size_t dim = j.size();
  ComplexMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (size_t r = 0; r < dim; ++r) {
    const json& row = j[r];
    const std::string row_where = where + " row " + std::to_string(r);
    if (!row.is_array() || row.size() != dim)
      throw ParseError(row_where + ": expected " + std::to_string(dim) + " entries");
    for (size_t c = 0; c < dim; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          expect_complex(row[c], row_where + " col " + std::to_string(c));
  }
  if (!m.allFinite()) throw ParseError(where + ": non-finite entries");
  return m;
}

inline CoefficientExpr expect_coeff(const json& j, const std::string& where) {
  CoefficientExpr c;
  if (j.is_number()) {
    c.value = j.get<double>();
  } else if (j.is_string()) {
    c.parameter = j.get<std::string>();
    if (c.parameter.empty()) throw ParseError(where + ": empty parameter name");
  } else {
    throw ParseError(where + ": expected a number or a parameter name");
  }
  return c;
}

inline Pauli expect_pauli(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a Pauli label");
  const std::string s = j.get<std::string>();
  if (s == "I") return Pauli::I;
  if (s == "X") return Pauli::X;
  if (s == "Y") return Pauli::Y;
  if (s == "Z") return Pauli::Z;
  throw ParseError(where + ": unknown Pauli label '" + s + "'");
}

inline const json& expect_field(const json& j, const std::string& key,
                                const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace detail

inline ModelConfig parse_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!root.is_object()) throw ParseError("config root must be an object");

  ModelConfig config;
  if (root.contains("parameters")) {
    const json& params = root.at("parameters");
    if (!params.is_object()) throw ParseError("parameters: expected an object");
    for (auto it = params.begin(); it != params.end(); ++it)
      config.parameters[it.key()] =
          detail::expect_number(it.value(), "parameters." + it.key());
  }

  const json& subsystems = detail::expect_field(root, "subsystems", "config");
  if (!subsystems.is_array() || subsystems.empty())
    throw ParseError("subsystems: expected a non-empty array");
  for (size_t i = 0; i < subsystems.size(); ++i) {
    const std::string where = "subsystems[" + std::to_string(i) + "]";
    const json& js = subsystems[i];
    SubsystemConfig sub;
    const double dim = detail::expect_number(detail::expect_field(js, "dim", where),
                                             where + ".dim");
    if (dim < 1 || dim != std::floor(dim))
      throw ParseError(where + ".dim: expected a positive integer");
    sub.dim = static_cast<int>(dim);
    sub.beta = detail::expect_number(detail::expect_field(js, "beta", where),
                                     where + ".beta");
    const json& ham = detail::expect_field(js, "hamiltonian", where);
    const std::string hwhere = where + ".hamiltonian";
    if (ham.contains("matrix")) {
      sub.has_matrix = true;
      sub.matrix = detail::expect_matrix(ham.at("matrix"), hwhere + ".matrix");
      if (sub.matrix.rows() != sub.dim)
        throw ParseError(hwhere + ".matrix: dimension " +
                         std::to_string(sub.matrix.rows()) + " does not match dim " +
                         std::to_string(sub.dim));
    } else if (ham.contains("terms")) {
      const json& terms = ham.at("terms");
      if (!terms.is_array()) throw ParseError(hwhere + ".terms: expected an array");
      for (size_t t = 0; t < terms.size(); ++t) {
        const std::string twhere = hwhere + ".terms[" + std::to_string(t) + "]";
        LocalTermConfig term;
        term.coeff = detail::expect_coeff(
            detail::expect_field(terms[t], "coeff", twhere), twhere + ".coeff");
        term.op = detail::expect_pauli(
            detail::expect_field(terms[t], "pauli", twhere), twhere + ".pauli");
        sub.terms.push_back(std::move(term));
      }
      if (sub.dim != 2)
        throw ParseError(hwhere + ": Pauli terms require dim 2, got " +
                         std::to_string(sub.dim));
    } else {
      throw ParseError(hwhere + ": expected 'matrix' or 'terms'");
    }
    config.subsystems.push_back(std::move(sub));
  }

  if (root.contains("interaction")) {
    const json& segments = root.at("interaction");
    if (!segments.is_array()) throw ParseError("interaction: expected an array");
    for (size_t s = 0; s < segments.size(); ++s) {
      const std::string where = "interaction[" + std::to_string(s) + "]";
      const json& jseg = segments[s];
      SegmentConfig seg;
      seg.duration = detail::expect_number(
          detail::expect_field(jseg, "duration", where), where + ".duration");
      if (jseg.contains("matrix")) {
        seg.has_matrix = true;
        seg.matrix = detail::expect_matrix(jseg.at("matrix"), where + ".matrix");
      } else if (jseg.contains("terms")) {
        const json& terms = jseg.at("terms");
        if (!terms.is_array()) throw ParseError(where + ".terms: expected an array");
        for (size_t t = 0; t < terms.size(); ++t) {
          const std::string twhere = where + ".terms[" + std::to_string(t) + "]";
          InteractionTermConfig term;
          term.coeff = detail::expect_coeff(
              detail::expect_field(terms[t], "coeff", twhere), twhere + ".coeff");
          const json& factors = detail::expect_field(terms[t], "factors", twhere);
          if (!factors.is_array() || factors.empty())
            throw ParseError(twhere + ".factors: expected a non-empty array");
          for (size_t f = 0; f < factors.size(); ++f) {
            const std::string fwhere =
                twhere + ".factors[" + std::to_string(f) + "]";
            const detail::json& jf = factors[f];
            if (!jf.is_array() || jf.size() != 2)
              throw ParseError(fwhere + ": expected [subsystem, pauli]");
            const double slot = detail::expect_number(jf[0], fwhere + "[0]");
            if (slot < 0 || slot != std::floor(slot))
              throw ParseError(fwhere + "[0]: expected a subsystem index");
            term.factors.emplace_back(static_cast<int>(slot),
                                      detail::expect_pauli(jf[1], fwhere + "[1]"));
          }
          seg.terms.push_back(std::move(term));
        }
      } else {
        throw ParseError(where + ": expected 'matrix' or 'terms'");
      }
      config.interaction.push_back(std::move(seg));
    }
  }

  config.tau =
      detail::expect_number(detail::expect_field(root, "tau", "config"), "tau");

  if (root.contains("options")) {
    const json& opts = root.at("options");
    if (!opts.is_object()) throw ParseError("options: expected an object");
    if (opts.contains("conservation")) {
      const json& c = opts.at("conservation");
      if (!c.is_string()) throw ParseError("options.conservation: expected a string");
      const std::string s = c.get<std::string>();
      if (s == "error")
        config.options.conservation = ConservationPolicy::Error;
      else if (s == "warn")
        config.options.conservation = ConservationPolicy::Warn;
      else
        throw ParseError("options.conservation: expected 'error' or 'warn', got '" +
                         s + "'");
    }
    if (opts.contains("merge_tol"))
      config.options.merge_tol =
          detail::expect_number(opts.at("merge_tol"), "options.merge_tol");
    if (opts.contains("drop_tol"))
      config.options.drop_tol =
          detail::expect_number(opts.at("drop_tol"), "options.drop_tol");
  }
  return config;
}

inline ModelConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

// Every parameter name referenced by a symbolic coefficient.
inline std::set<std::string> referenced_parameters(const ModelConfig& config) {
  std::set<std::string> names;
  for (const auto& sub : config.subsystems)
    for (const auto& term : sub.terms)
      if (term.coeff.symbolic()) names.insert(term.coeff.parameter);
  for (const auto& seg : config.interaction)
    for (const auto& term : seg.terms)
      if (term.coeff.symbolic()) names.insert(term.coeff.parameter);
  return names;
}

// Resolves symbolic coefficients (overrides shadow config defaults) and builds
// the PumpModel.
inline PumpModel instantiate(const ModelConfig& config,
                             const std::map<std::string, double>& overrides = {}) {
  auto resolve = [&](const CoefficientExpr& c, const std::string& where) {
    if (!c.symbolic()) return c.value;
    if (auto it = overrides.find(c.parameter); it != overrides.end())
      return it->second;
    if (auto it = config.parameters.find(c.parameter); it != config.parameters.end())
      return it->second;
    throw ParseError(where + ": parameter '" + c.parameter + "' has no value");
  };

  PumpModel model;
  model.tau = config.tau;
  model.options = config.options;
  for (const auto& sub : config.subsystems) model.dims.push_back(sub.dim);

  for (size_t j = 0; j < config.subsystems.size(); ++j) {
    const SubsystemConfig& sub = config.subsystems[j];
    model.beta.push_back(sub.beta);
    if (sub.has_matrix) {
      model.local_h.push_back(sub.matrix);
    } else {
      ComplexMatrix h = ComplexMatrix::Zero(2, 2);
      for (const auto& term : sub.terms)
        h += resolve(term.coeff, "subsystems[" + std::to_string(j) + "]") *
             pauli_matrix(term.op);
      model.local_h.push_back(std::move(h));
    }
  }

  for (size_t s = 0; s < config.interaction.size(); ++s) {
    const SegmentConfig& seg = config.interaction[s];
    InteractionSegment segment;
    segment.duration = seg.duration;
    if (seg.has_matrix) {
      segment.v = seg.matrix;
    } else {
      std::vector<PauliTerm> terms;
      terms.reserve(seg.terms.size());
      for (const auto& term : seg.terms)
        terms.push_back({resolve(term.coeff, "interaction[" + std::to_string(s) + "]"),
                         term.factors});
      segment.v = build_pauli_operator(terms, model.dims);
    }
    model.interaction.push_back(std::move(segment));
  }
  return model;
}

// Normalized form of an instantiated model: explicit matrices, resolved
// coefficients, explicit options. Parsing the dump reproduces the model,
// including bit-identical doubles.
inline nlohmann::ordered_json dump_model(const PumpModel& model) {
  using nlohmann::ordered_json;
  auto matrix_json = [](const ComplexMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        row.push_back({m(r, c).real(), m(r, c).imag()});
      rows.push_back(std::move(row));
    }
    return rows;
  };

  ordered_json doc;
  doc["subsystems"] = ordered_json::array();
  for (size_t j = 0; j < model.dims.size(); ++j) {
    ordered_json sub;
    sub["dim"] = model.dims[j];
    sub["beta"] = model.beta[j];
    sub["hamiltonian"] = {{"matrix", matrix_json(model.local_h[j])}};
    doc["subsystems"].push_back(std::move(sub));
  }
  doc["interaction"] = ordered_json::array();
  for (const auto& seg : model.interaction) {
    ordered_json jseg;
    jseg["duration"] = seg.duration;
    jseg["matrix"] = matrix_json(seg.v);
    doc["interaction"].push_back(std::move(jseg));
  }
  doc["tau"] = model.tau;
  doc["options"] = {
      {"conservation",
       model.options.conservation == ConservationPolicy::Error ? "error" : "warn"},
      {"merge_tol", model.options.merge_tol},
      {"drop_tol", model.options.drop_tol}};
  return doc;
}

}  // namespace qpump
