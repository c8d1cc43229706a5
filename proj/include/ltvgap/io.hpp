#ifndef LTVGAP_IO_HPP
#define LTVGAP_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltvgap/coprime.hpp"
#include "ltvgap/gap.hpp"
#include "ltvgap/lift.hpp"
#include "ltvgap/margin.hpp"
#include "ltvgap/operator.hpp"
#include "ltvgap/synthesis.hpp"

namespace ltvgap {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSystemSchema = "ltvgap-system/1";
inline constexpr const char* kReportSchema = "ltvgap-report/1";

using Json = nlohmann::ordered_json;

// Thrown on malformed documents; the CLI maps it to the validation exit
// code.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SystemKind { StateSpace, Fir, BlockMatrix };

// Parsed input document describing one plant.
struct SystemDescription {
  SystemKind kind = SystemKind::Fir;
  Index horizon = 0;
  std::string name;

  // fir payload
  std::vector<double> taps;
  Index block_dim = 1;

  // state_space payload (already expanded to per-step form)
  StateSpaceData<double> state_space;
  bool state_space_constant = false;

  // block_matrix payload
  std::vector<Index> dims, codims;
  MatrixX<double> entries;
  bool declared_causal = false;
};

namespace io_detail {

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

inline double finite_number(const Json& j, const std::string& where) {
  check(j.is_number(), where + ": expected a number");
  const double v = j.get<double>();
  check(std::isfinite(v), where + ": number is not finite");
  return v;
}

inline MatrixX<double> read_matrix(const Json& j, const std::string& where) {
  check(j.is_array() && !j.empty(), where + ": expected a non-empty matrix");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  MatrixX<double> m;
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    check(row.is_array(), where + "[" + std::to_string(r) + "]: expected a row array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    }
    check(static_cast<Index>(row.size()) == cols,
          where + "[" + std::to_string(r) + "]: ragged row");
    for (Index c = 0; c < cols; ++c)
      m(r, c) = finite_number(row[static_cast<std::size_t>(c)],
                              where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

inline Json write_matrix(const MatrixX<double>& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Per-step matrix list: either one matrix (replicated) or a list of
// matrices covering the horizon.
inline std::vector<MatrixX<double>> read_matrix_seq(const Json& j, Index horizon,
                                                    const std::string& where,
                                                    bool* constant) {
  check(j.is_array() && !j.empty(), where + ": expected matrix data");
  const bool per_step = j[0].is_array() && !j[0].empty() && j[0][0].is_array();
  std::vector<MatrixX<double>> out;
  if (!per_step) {
    const MatrixX<double> m = read_matrix(j, where);
    out.assign(static_cast<std::size_t>(horizon), m);
    if (constant) *constant = true;
  } else {
    check(static_cast<Index>(j.size()) >= horizon,
          where + ": needs at least " + std::to_string(horizon) + " entries");
    for (Index k = 0; k < horizon; ++k)
      out.push_back(read_matrix(j[static_cast<std::size_t>(k)],
                                where + "[" + std::to_string(k) + "]"));
    if (constant) *constant = false;
  }
  return out;
}

}  // namespace io_detail

// 64-bit FNV-1a content digest, hex encoded.
inline std::string digest_bytes(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char byte : bytes) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << "fnv1a:" << std::hex << h;
  return os.str();
}

inline SystemDescription system_from_json(const Json& doc) {
  using io_detail::check;
  check(doc.is_object(), "document: expected an object");
  check(doc.contains("kind") && doc["kind"].is_string(), "kind: missing or not a string");
  check(doc.contains("horizon") && doc["horizon"].is_number_integer(),
        "horizon: missing or not an integer");
  check(doc.contains("payload") && doc["payload"].is_object(),
        "payload: missing or not an object");

  SystemDescription desc;
  desc.horizon = doc["horizon"].get<Index>();
  check(desc.horizon >= 1, "horizon: must be at least 1");
  if (doc.contains("name")) {
    check(doc["name"].is_string(), "name: expected a string");
    desc.name = doc["name"].get<std::string>();
  }
  const Json& payload = doc["payload"];
  const std::string kind = doc["kind"].get<std::string>();

  if (kind == "fir") {
    desc.kind = SystemKind::Fir;
    check(payload.contains("h") && payload["h"].is_array() && !payload["h"].empty(),
          "payload.h: expected a non-empty tap array");
    for (std::size_t i = 0; i < payload["h"].size(); ++i)
      desc.taps.push_back(io_detail::finite_number(
          payload["h"][i], "payload.h[" + std::to_string(i) + "]"));
    if (payload.contains("block_dim")) {
      check(payload["block_dim"].is_number_integer(), "payload.block_dim: expected an integer");
      desc.block_dim = payload["block_dim"].get<Index>();
      check(desc.block_dim >= 1, "payload.block_dim: must be at least 1");
    }
  } else if (kind == "state_space") {
    desc.kind = SystemKind::StateSpace;
    for (const char* key : {"A", "B", "C", "D"})
      check(payload.contains(key), std::string("payload.") + key + ": missing");
    bool ca = false, cb = false, cc = false, cd = false;
    desc.state_space.A = io_detail::read_matrix_seq(payload["A"], desc.horizon, "payload.A", &ca);
    desc.state_space.B = io_detail::read_matrix_seq(payload["B"], desc.horizon, "payload.B", &cb);
    desc.state_space.C = io_detail::read_matrix_seq(payload["C"], desc.horizon, "payload.C", &cc);
    desc.state_space.D = io_detail::read_matrix_seq(payload["D"], desc.horizon, "payload.D", &cd);
    desc.state_space_constant = ca && cb && cc && cd;
  } else if (kind == "block_matrix") {
    desc.kind = SystemKind::BlockMatrix;
    check(payload.contains("dims"), "payload.dims: missing");
    auto read_dims = [&](const Json& j, const std::string& where) {
      std::vector<Index> dims;
      if (j.is_number_integer()) {
        dims.assign(static_cast<std::size_t>(desc.horizon), j.get<Index>());
      } else {
        check(j.is_array() && static_cast<Index>(j.size()) == desc.horizon,
              where + ": expected an integer or a list of length horizon");
        for (const auto& d : j) {
          check(d.is_number_integer(), where + ": entries must be integers");
          dims.push_back(d.get<Index>());
        }
      }
      for (Index d : dims) check(d >= 1, where + ": entries must be >= 1");
      return dims;
    };
    desc.dims = read_dims(payload["dims"], "payload.dims");
    desc.codims = payload.contains("codims")
                      ? read_dims(payload["codims"], "payload.codims")
                      : desc.dims;
    check(payload.contains("entries"), "payload.entries: missing");
    desc.entries = io_detail::read_matrix(payload["entries"], "payload.entries");
    if (payload.contains("causal")) {
      check(payload["causal"].is_boolean(), "payload.causal: expected a boolean");
      desc.declared_causal = payload["causal"].get<bool>();
    }
  } else {
    throw ValidationError("kind: unknown value '" + kind + "'");
  }
  return desc;
}

inline SystemDescription parse_system(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  try {
    return system_from_json(doc);
  } catch (ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// Realize a description as a lifted operator, optionally at an overridden
// horizon.  FIR systems rebuild at any horizon; per-step state-space data
// must cover the requested horizon unless given in constant form.
inline LtvOperator<double> to_operator(const SystemDescription& desc,
                                       Index horizon_override = 0) {
  const Index T = horizon_override > 0 ? horizon_override : desc.horizon;
  switch (desc.kind) {
    case SystemKind::Fir:
      return toeplitz_lift(desc.taps, desc.block_dim, T);
    case SystemKind::StateSpace: {
      StateSpaceData<double> sys = desc.state_space;
      if (T != desc.horizon) {
        io_detail::check(desc.state_space_constant || T < desc.horizon,
                         "horizon override: per-step state-space data cannot be extended");
        sys.A.resize(static_cast<std::size_t>(T), sys.A.back());
        sys.B.resize(static_cast<std::size_t>(T), sys.B.back());
        sys.C.resize(static_cast<std::size_t>(T), sys.C.back());
        sys.D.resize(static_cast<std::size_t>(T), sys.D.back());
      }
      try {
        return lift_state_space(sys);
      } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("payload: ") + e.what());
      }
    }
    case SystemKind::BlockMatrix: {
      io_detail::check(horizon_override == 0 || horizon_override == desc.horizon,
                       "horizon override: block_matrix systems are fixed-horizon");
      SignalSpace dom{desc.dims}, cod{desc.codims};
      io_detail::check(desc.entries.rows() == cod.total() &&
                           desc.entries.cols() == dom.total(),
                       "payload.entries: shape does not match dims/codims");
      LtvOperator<double> op(dom, cod, desc.entries);
      if (desc.declared_causal)
        io_detail::check(is_causal(op), "payload: declared causal but has upper blocks");
      return op;
    }
  }
  throw ValidationError("unreachable system kind");
}

inline Json operator_to_json(const LtvOperator<double>& op) {
  Json j;
  j["dims"] = op.domain().dims();
  j["codims"] = op.codomain().dims();
  j["entries"] = io_detail::write_matrix(op.matrix());
  return j;
}

inline Json residuals_to_json(const CoprimeResiduals<double>& r) {
  Json j;
  j["rcf_isometry"] = r.rcf_isometry;
  j["lcf_coisometry"] = r.lcf_coisometry;
  j["doubly_coprime_left"] = r.doubly_coprime_left;
  j["doubly_coprime_right"] = r.doubly_coprime_right;
  j["quotient_right"] = r.quotient_right;
  j["quotient_left"] = r.quotient_left;
  j["max"] = r.max();
  return j;
}

inline Json margin_to_json(const MarginReport<double>& m) {
  Json j;
  j["hankel_norm_R"] = m.hankel_norm_R;
  j["r_o"] = m.r_o;
  j["r_o_alt"] = m.r_o_alt;
  j["cross_residual"] = m.cross_residual;
  j["upsilon_norm"] = m.upsilon_norm;
  j["corona_value"] = m.corona_value;
  j["ball_equivalence_radius"] = m.ball_equivalence_radius;
  Json profile = Json::array();
  for (const auto& e : m.profile) {
    Json entry;
    entry["n"] = e.n;
    entry["value"] = e.value;
    entry["boundary"] = e.boundary;
    profile.push_back(std::move(entry));
  }
  j["profile"] = std::move(profile);
  j["r_opt_bracket"] = Json::array({m.r_opt_lower, m.r_opt_upper});
  j["r_opt_bracket_note"] =
      "upper endpoint uses restricted nest indices; entries flagged as "
      "boundary shrink with the horizon end and overstate the bracket";
  return j;
}

inline Json gap_to_json(const GapReport<double>& g) {
  Json j;
  j["per_n_directed_12"] = g.per_n_directed_12;
  j["per_n_directed_21"] = g.per_n_directed_21;
  j["per_n_delta"] = g.per_n_delta;
  j["first_n"] = -1;
  j["directed_12"] = g.directed_12;
  j["directed_21"] = g.directed_21;
  j["alpha"] = g.alpha;
  j["max_identity_residual"] = g.max_identity_residual;
  return j;
}

// Top-level result document written by the command-line tool.
struct RunReport {
  std::string command;
  std::string input_digest;
  std::optional<CoprimeResiduals<double>> residuals;
  std::optional<MarginReport<double>> margin;
  std::optional<GapReport<double>> gap;
  Json extra;  // command-specific sections (controller, schmidt data, ...)
  std::optional<Json> timings_ms;

  Json to_json() const {
    Json j;
    j["schema"] = kReportSchema;
    j["version"] = kToolVersion;
    j["command"] = command;
    j["input_digest"] = input_digest;
    Json results;
    if (residuals) results["factorization_residuals"] = residuals_to_json(*residuals);
    if (margin) results["margin"] = margin_to_json(*margin);
    if (gap) results["gap"] = gap_to_json(*gap);
    for (auto it = extra.begin(); it != extra.end(); ++it) results[it.key()] = it.value();
    j["results"] = std::move(results);
    if (timings_ms) j["timings_ms"] = *timings_ms;
    return j;
  }
};

}  // namespace ltvgap

#endif  // LTVGAP_IO_HPP
