#pragma once

// File formats: the JSON matrix format, TrigPoly JSON, function specs, and
// tabular reports (CSV or JSON). Numbers are written with 17 significant digits.

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "krein/circlefn.hpp"
#include "krein/error.hpp"
#include "krein/spectra.hpp"

namespace krein::io {

inline constexpr int schema_version = 1;

inline std::string format_number(double x) {
  if (!std::isfinite(x)) throw numerical_error("cannot serialize a non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

// ---------------------------------------------------------------------------
// Matrices: {"rows": r, "cols": c, "re": [[...]], "im": [[...]]}

inline std::string matrix_to_json(const ComplexMatrix& m) {
  std::ostringstream os;
  os << "{\n  \"schema_version\": " << schema_version << ",\n  \"rows\": " << m.rows() << ",\n  \"cols\": " << m.cols();
  for (int part = 0; part < 2; ++part) {
    os << ",\n  \"" << (part == 0 ? "re" : "im") << "\": [";
    for (Index i = 0; i < m.rows(); ++i) {
      os << (i ? ",\n    [" : "\n    [");
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) os << ", ";
        os << format_number(part == 0 ? m(i, j).real() : m(i, j).imag());
      }
      os << "]";
    }
    os << "\n  ]";
  }
  os << "\n}\n";
  return os.str();
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    const auto rows = j.at("rows").get<long>();
    const auto cols = j.at("cols").get<long>();
    if (rows <= 0 || cols <= 0) throw validation_error("matrix JSON: rows and cols must be positive");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || !im.is_array() || static_cast<long>(re.size()) != rows ||
        static_cast<long>(im.size()) != rows) {
      throw validation_error("matrix JSON: \"re\"/\"im\" must have `rows` rows");
    }
    ComplexMatrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
      if (static_cast<long>(re[i].size()) != cols || static_cast<long>(im[i].size()) != cols) {
        throw validation_error("matrix JSON: row " + std::to_string(i) + " does not have `cols` entries");
      }
      for (long k = 0; k < cols; ++k) m(i, k) = cplx(re[i][k].get<double>(), im[i][k].get<double>());
    }
    if (!all_finite(m)) throw validation_error("matrix JSON: non-finite entry");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("matrix JSON: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

inline ComplexMatrix read_matrix(const std::filesystem::path& path) {
  try {
    return matrix_from_json(read_json_file(path));
  } catch (const validation_error& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write " + path.string());
  out << text;
}

inline void write_matrix(const std::filesystem::path& path, const ComplexMatrix& m) {
  write_text(path, matrix_to_json(m));
}

// ---------------------------------------------------------------------------
// TrigPoly: {"degree": d, "coeffs_re": [...], "coeffs_im": [...]}, k = -d..d

inline std::string trig_poly_to_json(const TrigPoly& p) {
  std::ostringstream os;
  os << "{\"schema_version\": " << schema_version << ", \"degree\": " << p.degree() << ", \"coeffs_re\": [";
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) os << (k ? ", " : "") << format_number(p.coeffs()[k].real());
  os << "], \"coeffs_im\": [";
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) os << (k ? ", " : "") << format_number(p.coeffs()[k].imag());
  os << "]}\n";
  return os.str();
}

inline TrigPoly trig_poly_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("degree").get<int>();
    const auto re = j.at("coeffs_re").get<std::vector<double>>();
    const auto im = j.at("coeffs_im").get<std::vector<double>>();
    if (re.size() != im.size()) throw validation_error("TrigPoly JSON: coeffs_re and coeffs_im differ in length");
    std::vector<cplx> c(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) c[k] = cplx(re[k], im[k]);
    return TrigPoly(d, std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("TrigPoly JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Function specs: "z^n", "abs-theta", "cos", "sawtooth[:d]", "random:<degree>:<seed>",
// or a path to a TrigPoly JSON file.

inline CircleFunction parse_circle_function(const std::string& spec) {
  auto parse_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != s.size()) throw validation_error("function spec '" + spec + "': bad integer '" + s + "'");
    return v;
  };
  if (spec.rfind("z^", 0) == 0) return monomial(parse_int(spec.substr(2)));
  if (spec == "z") return monomial(1);
  if (spec == "abs-theta") return abs_theta();
  if (spec == "cos") return cosine();
  if (spec == "sawtooth") return sawtooth();
  if (spec.rfind("sawtooth:", 0) == 0) return sawtooth(parse_int(spec.substr(9)));
  if (spec.rfind("random:", 0) == 0) {
    const auto rest = spec.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw validation_error("function spec '" + spec + "': expected random:<degree>:<seed>");
    const int degree = parse_int(rest.substr(0, colon));
    const int seed = parse_int(rest.substr(colon + 1));
    if (degree < 0) throw validation_error("function spec '" + spec + "': negative degree");
    return CircleFunction(random_trig_poly(degree, static_cast<std::uint64_t>(seed)), spec);
  }
  if (std::filesystem::exists(spec)) return CircleFunction(trig_poly_from_json(read_json_file(spec)), spec);
  throw validation_error("unknown function spec '" + spec + "' (expected z^n, abs-theta, cos, sawtooth, "
                         "random:<degree>:<seed> or a TrigPoly JSON file)");
}

/// Real-line specs: "x^n".
inline LineFunction parse_line_function(const std::string& spec) {
  if (spec.rfind("x^", 0) == 0) {
    try {
      return LineFunction::power(std::stoi(spec.substr(2)));
    } catch (const std::logic_error&) {
    }
  }
  if (spec == "x") return LineFunction::power(1);
  throw validation_error("unknown real-line function spec '" + spec + "' (expected x^n)");
}

// ---------------------------------------------------------------------------
// Tables.

struct Table {
  std::string schema;  // e.g. "krein.ssf"
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // pre-rendered JSON values
};

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  os << "# schema: " << t.schema << "/" << schema_version << "\n";
  for (const auto& [k, v] : t.meta) os << "# " << k << ": " << v << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
    os << "\n";
  }
  return os.str();
}

inline std::string to_json(const Table& t) {
  std::ostringstream os;
  os << "{\n  \"schema\": " << quote(t.schema) << ",\n  \"schema_version\": " << schema_version;
  for (const auto& [k, v] : t.meta) os << ",\n  " << quote(k) << ": " << v;
  os << ",\n  \"columns\": [";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? ", " : "") << quote(t.columns[c]);
  os << "],\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << (r ? ",\n    [" : "\n    [");
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) os << (c ? ", " : "") << format_number(t.rows[r][c]);
    os << "]";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

/// Flat JSON object of pre-rendered values, keys in insertion order.
class Report {
 public:
  explicit Report(std::string schema) { add_string("schema", std::move(schema)); add_raw("schema_version", std::to_string(schema_version)); }
  Report& add(const std::string& key, double v) { return add_raw(key, format_number(v)); }
  Report& add_int(const std::string& key, long long v) { return add_raw(key, std::to_string(v)); }
  Report& add_bool(const std::string& key, bool v) { return add_raw(key, v ? "true" : "false"); }
  Report& add_string(const std::string& key, const std::string& v) { return add_raw(key, quote(v)); }
  Report& add_raw(const std::string& key, std::string rendered) {
    fields_.emplace_back(key, std::move(rendered));
    return *this;
  }
  std::string str() const {
    std::ostringstream os;
    os << "{";
    for (std::size_t k = 0; k < fields_.size(); ++k) {
      os << (k ? ",\n  " : "\n  ") << quote(fields_[k].first) << ": " << fields_[k].second;
    }
    os << "\n}\n";
    return os.str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

}  // namespace krein::io
